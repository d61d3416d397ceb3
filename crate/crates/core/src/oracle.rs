//! Exhaustive enumerations used as ground truth on small instances.

use serde::Serialize;

use crate::embedding::Cell;
use crate::error::{Error, Result};
use crate::isoradial::PeriodicIsoradialGraph;
use crate::laurent::LaurentPoly2;
use crate::torus::ToroidalGraph;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnumerationBudget {
    pub max_matching_vertices: usize,
    pub max_spins: usize,
    pub max_contour_edges: usize,
    pub max_crsf_vertices: usize,
    pub max_crsf_edges: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_matching_vertices: 40,
            max_spins: 20,
            max_contour_edges: 20,
            max_crsf_vertices: 6,
            max_crsf_edges: 14,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchingSum {
    pub count: u64,
    pub weighted_sum: f64,
    /// `∑_{M∋e} w(M) / Z` per edge.
    pub marginals: Vec<f64>,
}

/// Calls `visit` with the edge indices of every perfect matching, in a fixed
/// order (branching on the lowest unmatched vertex). Returning `false` from
/// `visit` stops the walk.
pub fn for_each_matching(
    n_vertices: usize,
    edges: &[(usize, usize)],
    budget: &EnumerationBudget,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<()> {
    if n_vertices > budget.max_matching_vertices {
        return Err(Error::BudgetExceeded(format!(
            "{n_vertices} vertices exceed the matching budget {}",
            budget.max_matching_vertices
        )));
    }
    if n_vertices % 2 == 1 {
        return Ok(());
    }
    let mut adj = vec![Vec::new(); n_vertices];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if u != v {
            adj[u].push(i);
            adj[v].push(i);
        }
    }
    let mut used = vec![false; n_vertices];
    let mut stack = Vec::with_capacity(n_vertices / 2);

    fn rec(
        edges: &[(usize, usize)],
        adj: &[Vec<usize>],
        used: &mut [bool],
        stack: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let Some(v) = used.iter().position(|&u| !u) else {
            return visit(stack);
        };
        used[v] = true;
        for &e in &adj[v] {
            let (a, b) = edges[e];
            let w = if a == v { b } else { a };
            if used[w] {
                continue;
            }
            used[w] = true;
            stack.push(e);
            let go_on = rec(edges, adj, used, stack, visit);
            stack.pop();
            used[w] = false;
            if !go_on {
                used[v] = false;
                return false;
            }
        }
        used[v] = false;
        true
    }

    rec(edges, &adj, &mut used, &mut stack, &mut visit);
    Ok(())
}

/// Exact weighted matching sum with per-edge marginals.
pub fn enumerate_matchings(
    n_vertices: usize,
    edges: &[(usize, usize, f64)],
    budget: &EnumerationBudget,
) -> Result<MatchingSum> {
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut count = 0u64;
    let mut sum = 0.0;
    let mut acc = vec![0.0; edges.len()];
    for_each_matching(n_vertices, &pairs, budget, |m| {
        let w: f64 = m.iter().map(|&e| edges[e].2).product();
        count += 1;
        sum += w;
        for &e in m {
            acc[e] += w;
        }
        true
    })?;
    let marginals = acc.into_iter().map(|a| if sum > 0.0 { a / sum } else { 0.0 }).collect();
    Ok(MatchingSum { count, weighted_sum: sum, marginals })
}

/// `∑_σ exp(∑ J_e σ_u σ_v)` over all spin configurations.
pub fn ising_partition(
    n_vertices: usize,
    edges: &[(usize, usize)],
    couplings: &[f64],
    budget: &EnumerationBudget,
) -> Result<f64> {
    if n_vertices > budget.max_spins {
        return Err(Error::BudgetExceeded(format!(
            "{n_vertices} spins exceed the budget {}",
            budget.max_spins
        )));
    }
    let mut z = 0.0;
    for s in 0u64..(1u64 << n_vertices) {
        let energy: f64 = edges
            .iter()
            .zip(couplings)
            .map(|(&(u, v), &j)| if ((s >> u) ^ (s >> v)) & 1 == 0 { j } else { -j })
            .sum();
        z += energy.exp();
    }
    Ok(z)
}

/// Gray-code walk over all edge subsets with even degree everywhere. The
/// visitor receives the subset mask and its mod-2 winding class.
fn for_each_even_subgraph(
    n_vertices: usize,
    edges: &[(usize, usize)],
    wraps: Option<&[Cell]>,
    budget: &EnumerationBudget,
    mut visit: impl FnMut(u64, [u8; 2]),
) -> Result<()> {
    let m = edges.len();
    if m > budget.max_contour_edges || n_vertices > 128 {
        return Err(Error::BudgetExceeded(format!(
            "{m} edges exceed the contour budget {}",
            budget.max_contour_edges
        )));
    }
    let toggle: Vec<u128> =
        edges.iter().map(|&(u, v)| (1u128 << u) ^ (1u128 << v)).collect();
    let winding: Vec<[u8; 2]> = match wraps {
        Some(w) => w.iter().map(|c| [(c[0] & 1) as u8, (c[1] & 1) as u8]).collect(),
        None => vec![[0, 0]; m],
    };
    let mut parity = 0u128;
    let mut class = [0u8; 2];
    let mut mask = 0u64;
    visit(0, [0, 0]);
    for i in 1u64..(1u64 << m) {
        let e = i.trailing_zeros() as usize;
        mask ^= 1 << e;
        parity ^= toggle[e];
        class[0] ^= winding[e][0];
        class[1] ^= winding[e][1];
        if parity == 0 {
            visit(mask, class);
        }
    }
    Ok(())
}

fn subset_product(mask: u64, x: &[f64]) -> f64 {
    x.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &w)| w).product()
}

/// `∑_{C even} ∏_{e∈C} x_e` over even-degree edge subsets.
pub fn even_subgraph_sum(
    n_vertices: usize,
    edges: &[(usize, usize)],
    x: &[f64],
    budget: &EnumerationBudget,
) -> Result<f64> {
    let mut terms = Vec::new();
    for_each_even_subgraph(n_vertices, edges, None, budget, |mask, _| {
        terms.push(subset_product(mask, x));
    })?;
    Ok(terms.iter().sum())
}

/// Same sum restricted to subsets that are null-homologous mod 2 on the
/// torus (domain walls of spin configurations).
pub fn null_homologous_even_subgraph_sum(
    tg: &ToroidalGraph,
    x: &[f64],
    budget: &EnumerationBudget,
) -> Result<f64> {
    let pairs: Vec<(usize, usize)> = tg.edges().iter().map(|e| (e.u, e.v)).collect();
    let wraps: Vec<Cell> = tg.edges().iter().map(|e| e.wraps).collect();
    let mut terms = Vec::new();
    for_each_even_subgraph(tg.vertex_count(), &pairs, Some(&wraps), budget, |mask, class| {
        if class == [0, 0] {
            terms.push(subset_product(mask, x));
        }
    })?;
    Ok(terms.iter().sum())
}

/// A cycle-rooted spanning forest of the fundamental domain.
#[derive(Clone, Debug, Serialize)]
pub struct Crsf {
    pub edges: Vec<usize>,
    /// Homology class of the cycle of each component, up to sign.
    pub homology: Vec<Cell>,
    /// Product of the conductances of the edges of each component.
    pub weights: Vec<f64>,
}

fn canonical_class(h: Cell) -> Cell {
    if h[0] < 0 || (h[0] == 0 && h[1] < 0) {
        [-h[0], -h[1]]
    } else {
        h
    }
}

/// All spanning subgraphs of `G₁` whose components are unicyclic with a
/// non-contractible cycle, with conductances `tan θ_e`.
pub fn enumerate_crsf(
    g: &PeriodicIsoradialGraph,
    budget: &EnumerationBudget,
) -> Result<Vec<Crsf>> {
    let nv = g.vertex_count();
    let ne = g.edge_count();
    if nv > budget.max_crsf_vertices || ne > budget.max_crsf_edges {
        return Err(Error::TooLarge(format!(
            "{nv} vertices / {ne} edges exceed the forest budget {} / {}",
            budget.max_crsf_vertices, budget.max_crsf_edges
        )));
    }
    let cond: Vec<f64> = g.thetas().iter().map(|t| t.tan()).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << ne) {
        if mask.count_ones() as usize != nv {
            continue;
        }
        let chosen: Vec<usize> = (0..ne).filter(|i| mask >> i & 1 == 1).collect();
        if let Some(f) = classify_forest(g, &chosen, &cond) {
            out.push(f);
        }
    }
    Ok(out)
}

fn classify_forest(g: &PeriodicIsoradialGraph, chosen: &[usize], cond: &[f64]) -> Option<Crsf> {
    let nv = g.vertex_count();
    // union-find with the lifted cell of each vertex relative to its root
    let mut parent: Vec<usize> = (0..nv).collect();
    let mut pot: Vec<Cell> = vec![[0, 0]; nv];
    let mut cycle: Vec<Option<Cell>> = vec![None; nv];
    fn find(parent: &mut [usize], pot: &mut [Cell], v: usize) -> usize {
        if parent[v] == v {
            return v;
        }
        let p = parent[v];
        let r = find(parent, pot, p);
        pot[v] = [pot[v][0] + pot[p][0], pot[v][1] + pot[p][1]];
        parent[v] = r;
        r
    }
    for &i in chosen {
        let e = g.edges()[i];
        let ru = find(&mut parent, &mut pot, e.u);
        let rv = find(&mut parent, &mut pot, e.v);
        if ru == rv {
            let h = [
                pot[e.u][0] + e.offset[0] - pot[e.v][0],
                pot[e.u][1] + e.offset[1] - pot[e.v][1],
            ];
            if h == [0, 0] || cycle[ru].is_some() {
                return None;
            }
            cycle[ru] = Some(h);
        } else {
            if cycle[ru].is_some() && cycle[rv].is_some() {
                return None;
            }
            // place rv's tree so that v sits at pot[u] + offset
            let shift = [
                pot[e.u][0] + e.offset[0] - pot[e.v][0],
                pot[e.u][1] + e.offset[1] - pot[e.v][1],
            ];
            parent[rv] = ru;
            pot[rv] = shift;
            cycle[ru] = cycle[ru].or(cycle[rv]);
        }
    }
    let mut roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, &mut pot, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut homology = Vec::new();
    let mut weights = Vec::new();
    for &r in &roots {
        homology.push(canonical_class(cycle[r]?));
        let w = chosen
            .iter()
            .filter(|&&i| find(&mut parent, &mut pot, g.edges()[i].u) == r)
            .map(|&i| cond[i])
            .product();
        weights.push(w);
    }
    Some(Crsf { edges: chosen.to_vec(), homology, weights })
}

/// `∑_F ∏_T w(T)(2 − z^{x_T}w^{y_T} − z^{−x_T}w^{−y_T})`.
pub fn crsf_polynomial(
    g: &PeriodicIsoradialGraph,
    budget: &EnumerationBudget,
) -> Result<LaurentPoly2> {
    let mut total = LaurentPoly2::zero();
    for f in enumerate_crsf(g, budget)? {
        let mut term = LaurentPoly2::constant(1.0.into());
        for (h, w) in f.homology.iter().zip(&f.weights) {
            let mut factor = LaurentPoly2::constant((2.0 * w).into());
            factor.add_term(*h, (-w).into());
            factor.add_term([-h[0], -h[1]], (-w).into());
            term = term.mul(&factor);
        }
        total = total.add(&term);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoradial::LatticeKind;

    #[test]
    fn four_cycle() {
        let e = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        let s = enumerate_matchings(4, &e, &EnumerationBudget::default()).unwrap();
        assert_eq!((s.count, s.weighted_sum), (2, 2.0));
        for v in 0..4 {
            let tot: f64 =
                e.iter().zip(&s.marginals).filter(|(e, _)| e.0 == v || e.1 == v).map(|x| x.1).sum();
            assert!((tot - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let b = EnumerationBudget { max_matching_vertices: 4, ..Default::default() };
        assert!(matches!(enumerate_matchings(6, &[], &b), Err(Error::BudgetExceeded(_))));
        assert!(ising_partition(21, &[], &[], &EnumerationBudget::default()).is_err());
    }

    #[test]
    fn spins() {
        let b = EnumerationBudget::default();
        assert_eq!(ising_partition(1, &[], &[], &b).unwrap(), 2.0);
        let j: f64 = 0.37;
        let z = ising_partition(2, &[(0, 1)], &[j], &b).unwrap();
        assert!((z - 4.0 * j.cosh()).abs() < 1e-14);
    }

    #[test]
    fn empty_even_sum() {
        assert_eq!(even_subgraph_sum(3, &[], &[], &EnumerationBudget::default()).unwrap(), 1.0);
    }

    #[test]
    fn square_forests() {
        let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
        let fs = enumerate_crsf(&g, &EnumerationBudget::default()).unwrap();
        let mut hs: Vec<Cell> = fs.iter().map(|f| f.homology[0]).collect();
        hs.sort();
        assert_eq!(hs, vec![[0, 1], [1, 0]]);
        let p = crsf_polynomial(&g, &EnumerationBudget::default()).unwrap();
        assert!(p.eval(1.0.into(), 1.0.into()).norm() < 1e-14);
    }
}
