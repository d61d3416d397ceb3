//! Inverse Kasteleyn coefficients on the infinite periodic Fisher graph and
//! Gibbs edge probabilities.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{cell_sub, Cell};
use crate::error::{Error, Result};
use crate::fisher::FisherGraph;
use crate::kasteleyn::{boltzmann_probability, KasteleynOrientation};
use crate::pfaffian::{pfaffian, SkewMatrix};
use crate::spectral::{richardson_log, unit, TorusSymbol};

/// Offsets farther than this (in cells, sup norm) are not cached.
pub const CACHE_RANGE: i32 = 16;
const ROW_CHUNKS: usize = 32;

/// A vertex of the infinite graph: fundamental-domain vertex and cell.
pub type Site = (usize, Cell);

/// Coefficients `K⁻¹_{(v,0),(v',δ)}` for one offset `δ`.
#[derive(Clone, Debug)]
pub struct CoeffBlock {
    pub values: DMatrix<Complex64>,
    /// Difference between the two extrapolations of the ladder.
    pub error: f64,
}

#[derive(Debug)]
pub struct GibbsCorrelator {
    fisher: FisherGraph,
    orientation: KasteleynOrientation,
    symbol: TorusSymbol,
    ladder: [usize; 4],
    tolerance: f64,
    cache: RwLock<HashMap<Cell, Arc<CoeffBlock>>>,
}

impl GibbsCorrelator {
    pub fn new(fisher: FisherGraph, orientation: KasteleynOrientation) -> Self {
        let symbol = TorusSymbol::kasteleyn(&fisher, &orientation);
        Self {
            fisher,
            orientation,
            symbol,
            ladder: [64, 128, 256, 512],
            tolerance: 1e-6,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Grid sizes `m, 2m, 4m, 8m`; the value is extrapolated from the last
    /// three and checked against the extrapolation from the first three.
    pub fn with_base_resolution(mut self, m: usize) -> Self {
        self.ladder = [m, 2 * m, 4 * m, 8 * m];
        self.cache.write().unwrap().clear();
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn fisher(&self) -> &FisherGraph {
        &self.fisher
    }

    pub fn orientation(&self) -> &KasteleynOrientation {
        &self.orientation
    }

    /// Riemann sums of `(K̂⁻¹)_{v,v'} z^{−δx} w^{−δy}` on the `(1,0)`-shifted
    /// `m × m` grid for every requested offset. At resolution `m` this is
    /// exactly the inverse of the twisted matrix `K_m^{10}`.
    pub fn riemann_blocks(&self, m: usize, offsets: &[Cell]) -> Vec<DMatrix<Complex64>> {
        let nv = self.symbol.rows();
        let chunk = m.div_ceil(ROW_CHUNKS).max(1);
        let partial: Vec<Vec<DMatrix<Complex64>>> = (0..m)
            .collect::<Vec<_>>()
            .par_chunks(chunk)
            .map(|rows| {
                let mut acc: Vec<DMatrix<Complex64>> = vec![DMatrix::zeros(nv, nv); offsets.len()];
                for &j in rows {
                    let z = unit(2.0 * PI * (j as f64 + 0.5) / m as f64);
                    for k in 0..m {
                        let w = unit(2.0 * PI * k as f64 / m as f64);
                        let inv = self
                            .symbol
                            .eval(z, w)
                            .try_inverse()
                            .expect("symbol is invertible off (1,1)");
                        for (a, d) in acc.iter_mut().zip(offsets) {
                            let phase = z.powi(-d[0]) * w.powi(-d[1]);
                            a.zip_apply(&inv, |x, y| *x += y * phase);
                        }
                    }
                }
                acc
            })
            .collect();
        let scale = 1.0 / (m * m) as f64;
        (0..offsets.len())
            .map(|i| partial.iter().fold(DMatrix::zeros(nv, nv), |s, p| s + &p[i]) * Complex64::new(scale, 0.0))
            .collect()
    }

    fn compute(&self, offsets: &[Cell]) -> Vec<CoeffBlock> {
        let levels: Vec<Vec<DMatrix<Complex64>>> =
            self.ladder.iter().map(|&m| self.riemann_blocks(m, offsets)).collect();
        (0..offsets.len())
            .map(|i| {
                let nv = levels[0][i].nrows();
                let mut values = DMatrix::zeros(nv, nv);
                let mut error = 0.0f64;
                for r in 0..nv {
                    for c in 0..nv {
                        let s: Vec<Complex64> = levels.iter().map(|l| l[i][(r, c)]).collect();
                        let ex = |a: usize, part: fn(Complex64) -> f64| {
                            richardson_log([part(s[a]), part(s[a + 1]), part(s[a + 2])], self.ladder[a])
                        };
                        let re = |z: Complex64| z.re;
                        let im = |z: Complex64| z.im;
                        let v1 = Complex64::new(ex(0, re), ex(0, im));
                        let v2 = Complex64::new(ex(1, re), ex(1, im));
                        values[(r, c)] = v2;
                        error = error.max((v2 - v1).norm());
                    }
                }
                CoeffBlock { values, error }
            })
            .collect()
    }

    /// Computes and caches all missing offsets in one grid pass.
    pub fn prefetch(&self, offsets: &[Cell]) {
        let missing: Vec<Cell> = {
            let cache = self.cache.read().unwrap();
            let mut m: Vec<Cell> = offsets
                .iter()
                .copied()
                .filter(|d| d[0].abs().max(d[1].abs()) <= CACHE_RANGE && !cache.contains_key(d))
                .collect();
            m.sort();
            m.dedup();
            m
        };
        if missing.is_empty() {
            return;
        }
        let blocks = self.compute(&missing);
        let mut cache = self.cache.write().unwrap();
        for (d, b) in missing.into_iter().zip(blocks) {
            cache.entry(d).or_insert_with(|| Arc::new(b));
        }
    }

    pub fn block(&self, offset: Cell) -> Arc<CoeffBlock> {
        if let Some(b) = self.cache.read().unwrap().get(&offset) {
            return b.clone();
        }
        if offset[0].abs().max(offset[1].abs()) <= CACHE_RANGE {
            self.prefetch(&[offset]);
            return self.cache.read().unwrap()[&offset].clone();
        }
        Arc::new(self.compute(&[offset]).remove(0))
    }

    /// `K⁻¹_{a,b}` on the infinite graph.
    pub fn inverse_coefficient(&self, a: Site, b: Site) -> Result<Complex64> {
        let nv = self.fisher.vertex_count();
        if a.0 >= nv || b.0 >= nv {
            return Err(Error::Domain("vertex label out of range".into()));
        }
        let blk = self.block(cell_sub(b.1, a.1));
        if blk.error > self.tolerance {
            return Err(Error::NonConvergent(format!(
                "inverse coefficient ladder disagrees by {:.3e}",
                blk.error
            )));
        }
        Ok(blk.values[(a.0, b.0)])
    }

    /// Endpoints of edge `e` of the fundamental domain translated to `cell`.
    pub fn edge_sites(&self, e: usize, cell: Cell) -> Result<(Site, Site)> {
        let pe = *self
            .fisher
            .edges()
            .get(e)
            .ok_or_else(|| Error::Domain(format!("no edge {e}")))?;
        Ok(((pe.u, cell), (pe.v, [cell[0] + pe.offset[0], cell[1] + pe.offset[1]])))
    }

    /// Probability under the Gibbs measure that all the edges occur.
    pub fn edge_probability(&self, edges: &[(usize, Cell)]) -> Result<f64> {
        if edges.is_empty() {
            return Ok(1.0);
        }
        let mut sites = Vec::with_capacity(2 * edges.len());
        let mut prod = 1.0;
        for &(e, c) in edges {
            let (a, b) = self.edge_sites(e, c)?;
            if sites.contains(&a) || sites.contains(&b) {
                return Err(Error::NotDisjoint);
            }
            sites.push(a);
            sites.push(b);
            prod *= self.orientation.signs[e] * self.fisher.weights()[e];
        }
        let offsets: Vec<Cell> = sites
            .iter()
            .flat_map(|a| sites.iter().map(move |b| cell_sub(b.1, a.1)))
            .collect();
        self.prefetch(&offsets);
        let k = sites.len();
        let mut s = SkewMatrix::<Complex64>::zeros(k);
        for i in 0..k {
            for j in i + 1..k {
                s.add_pair(i, j, self.inverse_coefficient(sites[j], sites[i])?);
            }
        }
        let pf = pfaffian(&s)?.value();
        Ok(prod * pf.re)
    }

    /// Finite-torus Boltzmann probabilities next to the Gibbs value.
    pub fn convergence_report(&self, edges: &[(usize, Cell)], n_list: &[usize]) -> Result<ConvergenceReport> {
        let p_inf = self.edge_probability(edges)?;
        let mut rows = Vec::with_capacity(n_list.len());
        for &n in n_list {
            let tg = self.fisher.quotient(n)?;
            let p = boltzmann_probability(&self.fisher, &self.orientation, &tg, edges)?;
            rows.push(ConvergenceRow { n, p_n: p, gap: (p - p_inf).abs() });
        }
        Ok(ConvergenceReport { p_inf, rows })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub p_n: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub p_inf: f64,
    pub rows: Vec<ConvergenceRow>,
}
