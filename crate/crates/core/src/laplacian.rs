//! Critical Laplacian, the double graph with its bipartite Kasteleyn operator,
//! incidence factorizations and discrete exponentials.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{cell_add, Cell, PeriodicEdge};
use crate::error::{Error, Result};
use crate::fisher::FisherGraph;
use crate::isoradial::{PeriodicIsoradialGraph, Point};
use crate::kasteleyn::orient;
use crate::laurent::LaurentPoly2;
use crate::oracle::EnumerationBudget;
use crate::spectral::{characteristic_polynomial, unit, TorusSymbol, PRUNE_REL};

/// Residuals above this (relative) are identity violations.
pub const IDENTITY_TOL: f64 = 1e-7;
/// Seed of the sample points used by [`identity_suite`].
pub const SUITE_SEED: u64 = 0x1501;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn neg(d: Cell) -> Cell {
    [-d[0], -d[1]]
}

/// Periodic weighted Laplacian `Δf(u) = ∑_{v∼u} c_{uv}(f(u) − f(v))`.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    vertex_count: usize,
    edges: Vec<PeriodicEdge>,
    conductances: Vec<f64>,
    symbol: TorusSymbol,
}

impl LaplacianOperator {
    pub fn from_conductances(vertex_count: usize, edges: &[PeriodicEdge], conductances: Vec<f64>) -> Self {
        let mut s = TorusSymbol::new(vertex_count, vertex_count);
        for (e, &w) in edges.iter().zip(&conductances) {
            s.add(e.u, e.u, [0, 0], c(w));
            s.add(e.v, e.v, [0, 0], c(w));
            s.add(e.u, e.v, e.offset, c(-w));
            s.add(e.v, e.u, neg(e.offset), c(-w));
        }
        Self { vertex_count, edges: edges.to_vec(), conductances, symbol: s }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[PeriodicEdge] {
        &self.edges
    }

    pub fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    pub fn symbol(&self) -> &TorusSymbol {
        &self.symbol
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> DMatrix<Complex64> {
        self.symbol.eval(z, w)
    }

    pub fn det(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.symbol.det(z, w)
    }

    /// `P_Δ(z,w) = det Δ̂(z,w)`.
    pub fn polynomial(&self) -> Result<LaurentPoly2> {
        characteristic_polynomial(&self.symbol)
    }
}

/// Laplacian of `G` with conductances `tan θ_e`.
pub fn laplacian(g: &PeriodicIsoradialGraph) -> LaplacianOperator {
    let cond = g.thetas().iter().map(|t| t.tan()).collect();
    LaplacianOperator::from_conductances(g.vertex_count(), g.edges(), cond)
}

/// Laplacian of `G*` with conductances `cot θ_e`; dual edge `i` crosses
/// edge `i`.
pub fn dual_laplacian(g: &PeriodicIsoradialGraph) -> Result<LaplacianOperator> {
    Ok(laplacian(&g.dual()?))
}

/// Bipartite graph with black vertices `V(G) ∪ V(G*)` (columns `0..V`, then
/// `V..V+F`) and one white vertex per edge of `G`.
#[derive(Clone, Debug)]
pub struct DoubleGraph {
    vertex_count: usize,
    face_count: usize,
    thetas: Vec<f64>,
    kasteleyn: TorusSymbol,
    incidence_primal: TorusSymbol,
    incidence_dual: TorusSymbol,
    a: Vec<Complex64>,
}

pub fn double_graph(g: &PeriodicIsoradialGraph) -> DoubleGraph {
    let nv = g.vertex_count();
    let nf = g.face_count();
    let ne = g.edge_count();
    let mut k = TorusSymbol::new(ne, nv + nf);
    let mut a = Vec::with_capacity(ne);
    for (w, (e, r)) in g.edges().iter().zip(g.rhombi()).enumerate() {
        let (s, co) = r.theta.sin_cos();
        let dir = r.direction();
        let i = Complex64::i();
        k.add(w, e.u, [0, 0], -2.0 * s * dir);
        k.add(w, e.v, e.offset, 2.0 * s * dir);
        k.add(w, nv + r.face_left.0, r.face_left.1, 2.0 * i * co * dir);
        k.add(w, nv + r.face_right.0, r.face_right.1, -2.0 * i * co * dir);
        a.push(dir.conj() / (2.0 * (s * co).sqrt()));
    }
    let (mg, mgs) = incidence(g, &vec![false; ne]);
    DoubleGraph {
        vertex_count: nv,
        face_count: nf,
        thetas: g.thetas(),
        kasteleyn: k,
        incidence_primal: mg,
        incidence_dual: mgs,
        a,
    }
}

impl DoubleGraph {
    pub fn black_count(&self) -> usize {
        self.vertex_count + self.face_count
    }

    pub fn white_count(&self) -> usize {
        self.thetas.len()
    }

    /// Number of black neighbours of a white vertex, with multiplicity.
    pub fn white_degree(&self, w: usize) -> usize {
        self.kasteleyn.terms().iter().filter(|t| t.0 == w).count()
    }

    /// `𝒦̂(z,w)`, white rows by black columns.
    pub fn kasteleyn(&self) -> &TorusSymbol {
        &self.kasteleyn
    }

    pub fn incidence_primal(&self) -> &TorusSymbol {
        &self.incidence_primal
    }

    pub fn incidence_dual(&self) -> &TorusSymbol {
        &self.incidence_dual
    }

    /// Diagonal of `A`, with `A𝒦 = (M^G, i M^{G*})`.
    pub fn a_diagonal(&self) -> &[Complex64] {
        &self.a
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// `A 𝒦̂(z,w)`.
    pub fn a_kasteleyn(&self, z: Complex64, w: Complex64) -> DMatrix<Complex64> {
        let mut m = self.kasteleyn.eval(z, w);
        for (i, a) in self.a.iter().enumerate() {
            m.row_mut(i).iter_mut().for_each(|x| *x *= a);
        }
        m
    }
}

/// `(M^G, M^{G*})` for the orientation of `G` flipped on the marked edges.
/// Row `w` of `M^G` is `−√tan θ` at the tail and `+√tan θ` at the head; the
/// dual edge is directed from the right face to the left face.
pub fn incidence(g: &PeriodicIsoradialGraph, flipped: &[bool]) -> (TorusSymbol, TorusSymbol) {
    let ne = g.edge_count();
    let mut mg = TorusSymbol::new(ne, g.vertex_count());
    let mut mgs = TorusSymbol::new(ne, g.face_count());
    for (w, (e, r)) in g.edges().iter().zip(g.rhombi()).enumerate() {
        let sgn = if flipped.get(w).copied().unwrap_or(false) { -1.0 } else { 1.0 };
        let t = r.theta.tan().sqrt() * sgn;
        let ct = sgn / r.theta.tan().sqrt();
        mg.add(w, e.u, [0, 0], c(-t));
        mg.add(w, e.v, e.offset, c(t));
        mgs.add(w, r.face_right.0, r.face_right.1, c(-ct));
        mgs.add(w, r.face_left.0, r.face_left.1, c(ct));
    }
    (mg, mgs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Identity {
    /// `A𝒦 = (M^G, i M^{G*})`.
    Factorization,
    /// `𝒦†A†A𝒦 = diag(Δ^G, Δ^{G*})`.
    BlockDiagonal,
    /// `∏(4 sin θ cos θ)⁻¹ |det 𝒦̂|² = det Δ̂^G det Δ̂^{G*}`.
    DeterminantProduct,
    /// `det Δ̂^G = ∏ tan θ · det Δ̂^{G*}`.
    DualDeterminant,
    /// `|det Δ̂^G| = ∏(2 cos θ)⁻¹ |det 𝒦̂|`.
    Modulus,
    /// `P / P_Δ` is constant.
    Proportional,
    /// `N(P) = N(P_Δ)`.
    NewtonPolygon,
}

impl Identity {
    pub const ALL: [Identity; 7] = [
        Identity::Factorization,
        Identity::BlockDiagonal,
        Identity::DeterminantProduct,
        Identity::DualDeterminant,
        Identity::Modulus,
        Identity::Proportional,
        Identity::NewtonPolygon,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Identity::Factorization => "i",
            Identity::BlockDiagonal => "ii",
            Identity::DeterminantProduct => "iii",
            Identity::DualDeterminant => "iv",
            Identity::Modulus => "v",
            Identity::Proportional => "vi",
            Identity::NewtonPolygon => "vii",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.label() == s)
            .ok_or_else(|| Error::Domain(format!("unknown identity `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityItem {
    pub which: Identity,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub items: Vec<IdentityItem>,
    /// `c = P/P_Δ` averaged over the samples, `[re, im]`.
    pub constant: [f64; 2],
    /// `|c(z̄,w̄) − c(z,w)| / |c|`, worst sample.
    pub conjugate_deviation: f64,
    /// `∏ tan θ_e`.
    pub dual_ratio: f64,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

/// Residual and, for the proportionality check, the constant and its
/// conjugate deviation.
type Check = (f64, Option<([f64; 2], f64)>);

struct Context {
    g: PeriodicIsoradialGraph,
    lap: LaplacianOperator,
    dual: LaplacianOperator,
    dg: DoubleGraph,
    points: Vec<(Complex64, Complex64)>,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn matrix_rel(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Random points of the unit torus.
pub fn torus_samples(count: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let b: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            (unit(a), unit(b))
        })
        .collect()
}

impl Context {
    fn check(&self, which: Identity) -> Result<Check> {
        let dg = &self.dg;
        let nv = dg.vertex_count;
        let thetas = dg.thetas();
        let worst = |f: &dyn Fn(Complex64, Complex64) -> f64| {
            self.points.iter().map(|&(z, w)| f(z, w)).fold(0.0, f64::max)
        };
        let r = match which {
            Identity::Factorization => worst(&|z, w| {
                let ak = dg.a_kasteleyn(z, w);
                let mut rhs = DMatrix::zeros(ak.nrows(), ak.ncols());
                rhs.columns_mut(0, nv).copy_from(&dg.incidence_primal.eval(z, w));
                rhs.columns_mut(nv, dg.face_count)
                    .copy_from(&(dg.incidence_dual.eval(z, w) * Complex64::i()));
                matrix_rel(&ak, &rhs)
            }),
            Identity::BlockDiagonal => worst(&|z, w| {
                let ak = dg.a_kasteleyn(z, w);
                let lhs = ak.adjoint() * ak;
                let mut rhs = DMatrix::zeros(lhs.nrows(), lhs.ncols());
                rhs.view_mut((0, 0), (nv, nv)).copy_from(&self.lap.eval(z, w));
                rhs.view_mut((nv, nv), (dg.face_count, dg.face_count))
                    .copy_from(&self.dual.eval(z, w));
                matrix_rel(&lhs, &rhs)
            }),
            Identity::DeterminantProduct => {
                let pre: f64 = thetas.iter().map(|t| 1.0 / (4.0 * t.sin() * t.cos())).product();
                worst(&|z, w| {
                    let k = dg.kasteleyn.det(z, w).norm_sqr() * pre;
                    rel(c(k), self.lap.det(z, w) * self.dual.det(z, w))
                })
            }
            Identity::DualDeterminant => {
                let pre: f64 = thetas.iter().map(|t| t.tan()).product();
                worst(&|z, w| rel(self.lap.det(z, w), self.dual.det(z, w) * pre))
            }
            Identity::Modulus => {
                let pre: f64 = thetas.iter().map(|t| 1.0 / (2.0 * t.cos())).product();
                worst(&|z, w| rel(c(self.lap.det(z, w).norm()), c(dg.kasteleyn.det(z, w).norm() * pre)))
            }
            Identity::Proportional => {
                let (p, pd) = self.polynomials()?;
                let ratio = |z: Complex64, w: Complex64| p.eval(z, w) / pd.eval(z, w);
                let cs: Vec<Complex64> = self.points.iter().map(|&(z, w)| ratio(z, w)).collect();
                let mean = cs.iter().sum::<Complex64>() / cs.len() as f64;
                let dev = cs.iter().map(|x| (x - mean).norm() / mean.norm()).fold(0.0, f64::max);
                let conj = self
                    .points
                    .iter()
                    .zip(&cs)
                    .map(|(&(z, w), x)| (ratio(z.conj(), w.conj()) - x).norm() / mean.norm())
                    .fold(0.0, f64::max);
                return Ok((dev, Some(([mean.re, mean.im], conj))));
            }
            Identity::NewtonPolygon => {
                let (p, pd) = self.polynomials()?;
                let a = p.pruned(PRUNE_REL).newton_polygon()?;
                let b = pd.pruned(PRUNE_REL).newton_polygon()?;
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        };
        Ok((r, None))
    }

    fn polynomials(&self) -> Result<(LaurentPoly2, LaurentPoly2)> {
        let f = FisherGraph::new(&self.g);
        let o = orient(&f, &EnumerationBudget::default())?;
        let p = characteristic_polynomial(&TorusSymbol::kasteleyn(&f, &o))?;
        Ok((p, self.lap.polynomial()?))
    }
}

/// Evaluates the requested identities; never fails on a large residual.
pub fn identity_report(g: &PeriodicIsoradialGraph, which: &[Identity], samples: usize, seed: u64) -> Result<IdentityReport> {
    let ctx = Context {
        g: g.clone(),
        lap: laplacian(g),
        dual: dual_laplacian(g)?,
        dg: double_graph(g),
        points: torus_samples(samples.max(1), seed),
    };
    let results: Vec<(Identity, Check)> = which
        .par_iter()
        .map(|&i| ctx.check(i).map(|r| (i, r)))
        .collect::<Result<_>>()?;
    let mut constant = [f64::NAN, f64::NAN];
    let mut conjugate_deviation = f64::NAN;
    let items = results
        .into_iter()
        .map(|(which, (residual, extra))| {
            if let Some((cst, conj)) = extra {
                constant = cst;
                conjugate_deviation = conj;
            }
            IdentityItem { which, residual, passed: residual <= IDENTITY_TOL }
        })
        .collect();
    Ok(IdentityReport {
        items,
        constant,
        conjugate_deviation,
        dual_ratio: g.thetas().iter().map(|t| t.tan()).product(),
        tolerance: IDENTITY_TOL,
    })
}

/// All seven identities at 100 torus points.
pub fn identity_suite(g: &PeriodicIsoradialGraph) -> Result<IdentityReport> {
    let report = identity_report(g, &Identity::ALL, 100, SUITE_SEED)?;
    if let Some(bad) = report.items.iter().find(|i| !i.passed) {
        return Err(Error::IdentityViolation { which: bad.which.to_string(), residual: bad.residual });
    }
    Ok(report)
}

/// Unit steps of the diamond graph along a path in the lift of `G` from
/// vertex 0 in cell `(0,0)` to vertex 0 in cell `target`.
fn diamond_path(g: &PeriodicIsoradialGraph, target: Cell) -> Result<Vec<Complex64>> {
    let start = (0usize, [0, 0]);
    let goal = (0usize, target);
    let bound = 2 + g.vertex_count() as i32;
    type Back = ((usize, Cell), [Point; 3]);
    let mut prev: HashMap<(usize, Cell), Back> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = std::collections::HashSet::from([start]);
    while let Some((x, cell)) = queue.pop_front() {
        if (x, cell) == goal {
            break;
        }
        for (e, r) in g.edges().iter().zip(g.rhombi()) {
            let shift = |p: Point, d: Cell| {
                let b = g.basis();
                let (dx, dy) = (d[0] as f64, d[1] as f64);
                [p[0] + dx * b[0][0] + dy * b[1][0], p[1] + dx * b[0][1] + dy * b[1][1]]
            };
            let mut steps = Vec::new();
            if e.u == x {
                let nc = cell_add(cell, e.offset);
                steps.push(((e.v, nc), [shift(r.u, cell), shift(r.center_left, cell), shift(r.v, cell)]));
            }
            if e.v == x {
                let base = [cell[0] - e.offset[0], cell[1] - e.offset[1]];
                steps.push(((e.u, base), [shift(r.v, base), shift(r.center_left, base), shift(r.u, base)]));
            }
            for (next, pts) in steps {
                if next.1[0].abs() > bound || next.1[1].abs() > bound || !seen.insert(next) {
                    continue;
                }
                prev.insert(next, ((x, cell), pts));
                queue.push_back(next);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = goal;
    while cur != start {
        let (p, pts) = prev
            .get(&cur)
            .ok_or_else(|| Error::Domain("lift of G is not connected".into()))?;
        for k in (0..2).rev() {
            let d = Complex64::new(pts[k + 1][0] - pts[k][0], pts[k + 1][1] - pts[k][1]);
            out.push(d / d.norm());
        }
        cur = *p;
    }
    out.reverse();
    Ok(out)
}

/// `(z(λ), w(λ))`: products of `(λ − e^{iα})/(λ + e^{iα})` over the diamond
/// steps of a path realising the period `(1,0)`, resp. `(0,1)`.
pub fn discrete_exponential_point(g: &PeriodicIsoradialGraph, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    let eval = |target: Cell| -> Result<Complex64> {
        let mut acc = c(1.0);
        for d in diamond_path(g, target)? {
            if (lambda + d).norm() < 1e-12 || (lambda - d).norm() < 1e-12 {
                return Err(Error::PoleHit(lambda.to_string()));
            }
            acc *= (lambda - d) / (lambda + d);
        }
        Ok(acc)
    };
    Ok((eval([1, 0])?, eval([0, 1])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoradial::LatticeKind;

    #[test]
    fn square_exponential() {
        let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
        let (z, w) = discrete_exponential_point(&g, c(1.0)).unwrap();
        let expect = [3.0 - 2.0 * 2f64.sqrt(), 1.0 / (3.0 - 2.0 * 2f64.sqrt())];
        assert!(expect.iter().any(|e| (z - e).norm() < 1e-12), "{z}");
        assert!((w + 1.0).norm() < 1e-12);
        let p = laplacian(&g).polynomial().unwrap();
        assert!(p.eval(z, w).norm() < 1e-12);
    }

    #[test]
    fn square_laplacian_entries() {
        let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
        let l = laplacian(&g);
        assert!(l.conductances().iter().all(|&t| (t - 1.0).abs() < 1e-12));
        let p = l.polynomial().unwrap();
        assert!((p.coefficient([0, 0]) - 4.0).norm() < 1e-12);
        assert!((p.coefficient([1, 0]) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn identity_labels_round_trip() {
        for i in Identity::ALL {
            assert_eq!(i.label().parse::<Identity>().unwrap(), i);
        }
        assert!("viii".parse::<Identity>().is_err());
    }
}
