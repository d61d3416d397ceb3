//! Bivariate Laurent polynomials with complex coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::embedding::Cell;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly2 {
    terms: BTreeMap<Cell, Complex64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Coefficient {
    pub x: i32,
    pub y: i32,
    pub re: f64,
    pub im: f64,
}

impl LaurentPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term([0, 0], c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Cell, Complex64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: Cell, c: Complex64) {
        let slot = self.terms.entry(exp).or_default();
        *slot += c;
        if *slot == Complex64::new(0.0, 0.0) {
            self.terms.remove(&exp);
        }
    }

    pub fn coefficient(&self, exp: Cell) -> Complex64 {
        self.terms.get(&exp).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Cell, Complex64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coefficients(&self) -> Vec<Coefficient> {
        self.terms()
            .map(|(e, c)| Coefficient { x: e[0], y: e[1], re: c.re, im: c.im })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `∑ |c|`, the sup of `|P|` on the unit torus bound.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// `∑ |c_{xy}| |z|^x |w|^y`, a natural scale for evaluation errors.
    pub fn scale_at(&self, z: Complex64, w: Complex64) -> f64 {
        let (az, aw) = (z.norm(), w.norm());
        self.terms().map(|(e, c)| c.norm() * az.powi(e[0]) * aw.powi(e[1])).sum()
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.terms().map(|(e, c)| c * z.powi(e[0]) * w.powi(e[1])).sum()
    }

    /// Drops coefficients below `rel · max|c|`.
    pub fn pruned(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        Self {
            terms: self.terms.iter().filter(|(_, c)| c.norm() >= cut).map(|(&e, &c)| (e, c)).collect(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e, c * s)))
    }

    /// Multiplies by the unit phase making the largest coefficient positive.
    pub fn phase_normalized(&self) -> (Self, Complex64) {
        let Some((_, &c)) = self
            .terms
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        else {
            return (self.clone(), Complex64::new(1.0, 0.0));
        };
        let phase = c.conj() / c.norm();
        (self.scaled(phase), phase)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                p.add_term([a[0] + b[0], a[1] + b[1]], ca * cb);
            }
        }
        p
    }

    pub fn support(&self) -> Vec<Cell> {
        self.terms.keys().copied().collect()
    }

    /// Convex hull of the support, counter-clockwise, without collinear
    /// points.
    pub fn newton_polygon(&self) -> Result<Vec<Cell>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(convex_hull(self.support()))
    }
}

fn cross(o: Cell, a: Cell, b: Cell) -> i64 {
    (a[0] - o[0]) as i64 * (b[1] - o[1]) as i64 - (a[1] - o[1]) as i64 * (b[0] - o[0]) as i64
}

/// Monotone chain hull.
pub fn convex_hull(mut pts: Vec<Cell>) -> Vec<Cell> {
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let chain = |it: &mut dyn Iterator<Item = Cell>| {
        let mut h: Vec<Cell> = Vec::new();
        for p in it {
            while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
        h
    };
    let mut hull = chain(&mut pts.iter().copied());
    hull.extend(chain(&mut pts.iter().rev().copied()));
    hull
}

/// Lattice points of a convex polygon given by its ccw vertices.
pub fn polygon_lattice_points(hull: &[Cell]) -> Vec<Cell> {
    if hull.is_empty() {
        return Vec::new();
    }
    let (xmin, xmax) = hull.iter().fold((i32::MAX, i32::MIN), |a, p| (a.0.min(p[0]), a.1.max(p[0])));
    let (ymin, ymax) = hull.iter().fold((i32::MAX, i32::MIN), |a, p| (a.0.min(p[1]), a.1.max(p[1])));
    let mut out = Vec::new();
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            let p = [x, y];
            let inside = match hull.len() {
                1 => p == hull[0],
                2 => cross(hull[0], hull[1], p) == 0,
                _ => (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0),
            };
            if inside {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hull_of_monomial_and_segment() {
        let m = LaurentPoly2::from_terms([([2, -1], c(3.0))]);
        assert_eq!(m.newton_polygon().unwrap(), vec![[2, -1]]);
        let s = LaurentPoly2::from_terms([([-1, 0], c(-1.0)), ([0, 0], c(2.0)), ([1, 0], c(-1.0))]);
        assert_eq!(s.newton_polygon().unwrap(), vec![[-1, 0], [1, 0]]);
        assert!(matches!(LaurentPoly2::zero().newton_polygon(), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn diamond_hull() {
        let p = LaurentPoly2::from_terms(
            [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]].map(|e| (e, c(1.0))),
        );
        let h = p.newton_polygon().unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(polygon_lattice_points(&h).len(), 5);
    }

    #[test]
    fn arithmetic() {
        let a = LaurentPoly2::from_terms([([1, 0], c(1.0)), ([0, 0], c(-1.0))]);
        let b = LaurentPoly2::from_terms([([-1, 0], c(1.0)), ([0, 0], c(1.0))]);
        let p = a.mul(&b);
        assert_eq!(p.coefficient([0, 0]), c(0.0));
        assert_eq!(p.coefficient([1, 0]), c(1.0));
        assert_eq!(p.coefficient([-1, 0]), c(-1.0));
        assert!(p.sub(&p).is_zero());
        let z = Complex64::new(0.3, 0.8);
        assert!((p.eval(z, c(1.0)) - (z - 1.0 / z)).norm() < 1e-14);
    }
}
