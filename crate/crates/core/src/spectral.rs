//! Fourier symbols of periodic operators, characteristic polynomials, the
//! zero at (1,1), free energy and amoeba samples.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::Cell;
use crate::error::{Error, Result};
use crate::fisher::FisherGraph;
use crate::kasteleyn::KasteleynOrientation;
use crate::laurent::LaurentPoly2;

pub const PRUNE_REL: f64 = 1e-9;
pub const INTERPOLATION_TOL: f64 = 1e-8;

pub fn unit(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

/// `S(z,w) = ∑ A(x,y) z^x w^y`, stored as a list of monomial entries.
#[derive(Clone, Debug)]
pub struct TorusSymbol {
    rows: usize,
    cols: usize,
    terms: Vec<(usize, usize, Cell, Complex64)>,
}

impl TorusSymbol {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, terms: Vec::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, exp: Cell, c: Complex64) {
        self.terms.push((row, col, exp, c));
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &[(usize, usize, Cell, Complex64)] {
        &self.terms
    }

    /// Largest `|x|` and `|y|` exponent.
    pub fn bound(&self) -> [i32; 2] {
        self.terms.iter().fold([0, 0], |b, t| [b[0].max(t.2[0].abs()), b[1].max(t.2[1].abs())])
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, e, v) in &self.terms {
            m[(r, c)] += v * z.powi(e[0]) * w.powi(e[1]);
        }
        m
    }

    pub fn det(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.eval(z, w).determinant()
    }

    /// Symbol of the periodic Kasteleyn operator of a Fisher graph: an edge
    /// `u → v` with offset `d` contributes `ν z^d` at `(u,v)` and `−ν z^{−d}`
    /// at `(v,u)`.
    pub fn kasteleyn(f: &FisherGraph, o: &KasteleynOrientation) -> Self {
        let n = f.vertex_count();
        let mut s = Self::new(n, n);
        for (i, e) in f.edges().iter().enumerate() {
            let k = Complex64::new(o.signs[i] * f.weights()[i], 0.0);
            s.add(e.u, e.v, e.offset, k);
            s.add(e.v, e.u, [-e.offset[0], -e.offset[1]], -k);
        }
        s
    }
}

/// Recovers `det S(z,w)` as a Laurent polynomial by evaluation on a grid of
/// roots of unity and inverse discrete Fourier transform.
pub fn characteristic_polynomial(s: &TorusSymbol) -> Result<LaurentPoly2> {
    if s.rows() != s.cols() {
        return Err(Error::Domain("symbol is not square".into()));
    }
    let b = s.bound();
    let nx = s.rows() as i32 * b[0];
    let ny = s.rows() as i32 * b[1];
    let (mx, my) = ((2 * nx + 1) as usize, (2 * ny + 1) as usize);
    let values: Vec<Vec<Complex64>> = (0..mx)
        .into_par_iter()
        .map(|j| {
            let z = unit(2.0 * PI * j as f64 / mx as f64);
            (0..my).map(|k| s.det(z, unit(2.0 * PI * k as f64 / my as f64))).collect()
        })
        .collect();
    // transform along w, then along z
    let mut half = vec![vec![Complex64::default(); my]; mx];
    for j in 0..mx {
        for (bi, yb) in (-ny..=ny).enumerate() {
            half[j][bi] = (0..my)
                .map(|k| values[j][k] * unit(-2.0 * PI * (k as f64) * yb as f64 / my as f64))
                .sum::<Complex64>()
                / my as f64;
        }
    }
    let mut p = LaurentPoly2::zero();
    for xa in -nx..=nx {
        for (bi, yb) in (-ny..=ny).enumerate() {
            let c = (0..mx)
                .map(|j| half[j][bi] * unit(-2.0 * PI * (j as f64) * xa as f64 / mx as f64))
                .sum::<Complex64>()
                / mx as f64;
            p.add_term([xa, yb], c);
        }
    }
    let p = p.pruned(PRUNE_REL);
    let res = interpolation_residual(s, &p, 100, 0x5eed);
    if res > INTERPOLATION_TOL {
        return Err(Error::InterpolationResidual(res));
    }
    Ok(p)
}

/// Max over random torus points of `|P − det S| / ∑|c|`.
pub fn interpolation_residual(s: &TorusSymbol, p: &LaurentPoly2, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = p.l1_norm().max(f64::MIN_POSITIVE);
    (0..samples)
        .map(|_| {
            let z = unit(rng.random_range(0.0..2.0 * PI));
            let w = unit(rng.random_range(0.0..2.0 * PI));
            (p.eval(z, w) - s.det(z, w)).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// Local data of `P` at `(1,1)`.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroReport {
    pub value: [f64; 2],
    pub gradient: [[f64; 2]; 2],
    /// Quadratic form `αx² + 2βxy + γy²` of `P(e^{iπx}, e^{iπy})` at 0.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub discriminant: f64,
    pub definite: bool,
    pub max_coeff: f64,
    pub double_zero: bool,
}

pub fn zero_at_one_one(p: &LaurentPoly2) -> ZeroReport {
    zero_at_one_one_tol(p, 1e-8)
}

pub fn zero_at_one_one_tol(p: &LaurentPoly2, tol: f64) -> ZeroReport {
    let mut val = Complex64::default();
    let mut dz = Complex64::default();
    let mut dw = Complex64::default();
    let (mut saa, mut sab, mut sbb) = (Complex64::default(), Complex64::default(), Complex64::default());
    for (e, c) in p.terms() {
        let (a, b) = (e[0] as f64, e[1] as f64);
        val += c;
        dz += a * c;
        dw += b * c;
        saa += a * a * c;
        sab += a * b * c;
        sbb += b * b * c;
    }
    let k = -PI * PI / 2.0;
    let (alpha, beta, gamma) = ((k * saa).re, (k * sab).re, (k * sbb).re);
    let discriminant = alpha * gamma - beta * beta;
    let max_coeff = p.max_abs();
    let definite = discriminant > 0.0;
    let grad = (dz.norm_sqr() + dw.norm_sqr()).sqrt();
    ZeroReport {
        value: [val.re, val.im],
        gradient: [[dz.re, dz.im], [dw.re, dw.im]],
        alpha,
        beta,
        gamma,
        discriminant,
        definite,
        max_coeff,
        double_zero: val.norm() < tol * max_coeff && grad < tol * max_coeff && definite,
    }
}

/// Evaluates `P` on the grid `z = e^{2πi(j+sx)/mx}`, `w = e^{2πi(k+sy)/my}`,
/// row by row.
pub fn grid_values(p: &LaurentPoly2, m: [usize; 2], shift: [f64; 2]) -> Vec<Vec<Complex64>> {
    let terms: Vec<(Cell, Complex64)> = p.terms().collect();
    let (ymin, ymax) = terms.iter().fold((0, 0), |a, t| (a.0.min(t.0[1]), a.1.max(t.0[1])));
    (0..m[0])
        .into_par_iter()
        .map(|j| {
            let z = unit(2.0 * PI * (j as f64 + shift[0]) / m[0] as f64);
            // collapse to a polynomial in w
            let mut q = vec![Complex64::default(); (ymax - ymin + 1) as usize];
            for &(e, c) in &terms {
                q[(e[1] - ymin) as usize] += c * z.powi(e[0]);
            }
            (0..m[1])
                .map(|k| {
                    let w = unit(2.0 * PI * (k as f64 + shift[1]) / m[1] as f64);
                    let mut acc = Complex64::default();
                    for c in q.iter().rev() {
                        acc = acc * w + c;
                    }
                    acc * w.powi(ymin)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GridScan {
    pub m: usize,
    pub argmin: [usize; 2],
    pub min_abs: f64,
    /// Smallest `|P|` over cells not adjacent to (1,1), relative to `∑|c|`.
    pub margin: f64,
    pub minimum_adjacent: bool,
}

/// Scans `|P|` on the half-shifted `m × m` grid of the torus.
pub fn grid_scan(p: &LaurentPoly2, m: usize) -> GridScan {
    let vals = grid_values(p, [m, m], [0.5, 0.5]);
    let adjacent = |i: usize| i == 0 || i == m - 1;
    let mut best = (f64::INFINITY, [0, 0]);
    let mut far = f64::INFINITY;
    for (j, row) in vals.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let a = v.norm();
            if a < best.0 {
                best = (a, [j, k]);
            }
            if !(adjacent(j) && adjacent(k)) {
                far = far.min(a);
            }
        }
    }
    GridScan {
        m,
        argmin: best.1,
        min_abs: best.0,
        margin: far / p.l1_norm(),
        minimum_adjacent: adjacent(best.1[0]) && adjacent(best.1[1]),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub error_estimate: f64,
    /// `(m, mean of log|P| on the (1,0)-shifted m×m grid)`.
    pub ladder: Vec<(usize, f64)>,
}

/// Fits `S(h) = I + h²(a log h + b)` through three resolutions `h, h/2, h/4`.
pub fn richardson_log(s: [f64; 3], m0: usize) -> f64 {
    let h = [1.0 / m0 as f64, 0.5 / m0 as f64, 0.25 / m0 as f64];
    let a = DMatrix::from_fn(3, 3, |i, j| match j {
        0 => 1.0,
        1 => h[i] * h[i] * h[i].ln(),
        _ => h[i] * h[i],
    });
    let rhs = nalgebra::DVector::from_column_slice(&s);
    a.lu().solve(&rhs).map(|x| x[0]).unwrap_or(s[2])
}

/// Free energy per fundamental domain, `−½ ∬ log P` over the unit torus.
pub fn free_energy(p: &LaurentPoly2) -> Result<FreeEnergy> {
    free_energy_ladder(p, &[64, 128, 256, 512])
}

pub fn free_energy_ladder(p: &LaurentPoly2, ms: &[usize]) -> Result<FreeEnergy> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if ms.len() < 4 {
        return Err(Error::Domain("free energy needs four resolutions".into()));
    }
    let ladder: Vec<(usize, f64)> = ms
        .iter()
        .map(|&m| {
            let vals = grid_values(p, [m, m], [0.5, 0.0]);
            let s: f64 = vals.iter().map(|r| r.iter().map(|v| v.norm().ln()).sum::<f64>()).sum();
            (m, s / (m * m) as f64)
        })
        .collect();
    let s: Vec<f64> = ladder.iter().map(|x| x.1).collect();
    let k = s.len();
    let d1 = (s[k - 2] - s[k - 3]).abs();
    let d2 = (s[k - 1] - s[k - 2]).abs();
    if !s.iter().all(|x| x.is_finite()) || (d2 > d1 && d2 > 1e-12 * (1.0 + s[k - 1].abs())) {
        return Err(Error::NonConvergent(format!(
            "free-energy sums {s:?} do not settle"
        )));
    }
    let i1 = richardson_log([s[k - 4], s[k - 3], s[k - 2]], ms[k - 4]);
    let i2 = richardson_log([s[k - 3], s[k - 2], s[k - 1]], ms[k - 3]);
    Ok(FreeEnergy { value: -0.5 * i2, error_estimate: 0.5 * (i2 - i1).abs(), ladder })
}

/// Samples `(log|z|, log|w|)` on the zero set of `P`, solving for `w` at
/// random `z`.
pub fn amoeba_samples(p: &LaurentPoly2, samples: usize, radius: f64, seed: u64) -> Result<Vec<[f64; 2]>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (ymin, ymax) = p.terms().fold((i32::MAX, i32::MIN), |a, t| (a.0.min(t.0[1]), a.1.max(t.0[1])));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < samples {
        let z = Complex64::from_polar(rng.random_range(-radius..radius).exp(), rng.random_range(0.0..2.0 * PI));
        let mut q = vec![Complex64::default(); (ymax - ymin + 1) as usize];
        for (e, c) in p.terms() {
            q[(e[1] - ymin) as usize] += c * z.powi(e[0]);
        }
        while q.len() > 1 && q.last().unwrap().norm() < 1e-14 {
            q.pop();
        }
        if q.len() < 2 {
            continue;
        }
        for w in polynomial_roots(&q) {
            if w.norm() > 0.0 && w.is_finite() && out.len() < samples {
                out.push([z.norm().ln(), w.norm().ln()]);
            }
        }
    }
    Ok(out)
}

/// Roots of `∑ q_i w^i` by Durand–Kerner iteration.
pub fn polynomial_roots(q: &[Complex64]) -> Vec<Complex64> {
    let d = q.len() - 1;
    let lead = q[d];
    let monic: Vec<Complex64> = q.iter().map(|c| c / lead).collect();
    let r = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> =
        (0..d).map(|i| Complex64::from_polar(r, 2.0 * PI * i as f64 / d as f64 + 0.4)).collect();
    let eval = |w: Complex64| monic.iter().rev().fold(Complex64::default(), |acc, c| acc * w + c);
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * r {
            break;
        }
    }
    roots
}
