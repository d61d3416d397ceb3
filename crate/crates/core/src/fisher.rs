//! Fisher's decorated graph and its critical dimer weights.

use std::f64::consts::PI;

use serde::Serialize;

use crate::embedding::{Cell, EmbeddedGraph, HalfEdge, PeriodicEdge};
use crate::error::{Error, Result};
use crate::isoradial::{Point, PeriodicIsoradialGraph};
use crate::oracle::{enumerate_matchings, EnumerationBudget};
use crate::torus::ToroidalGraph;

const DECORATION_RADIUS: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// Endpoint of a long edge.
    Out,
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FisherVertex {
    pub g_vertex: usize,
    /// Position of the half-edge in the rotation of `g_vertex`.
    pub slot: usize,
    pub kind: VertexKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeRole {
    /// Carries G-edge `g_edge`.
    Long { g_edge: usize },
    Triangle,
    Link,
}

#[derive(Clone, Debug)]
pub struct FisherGraph {
    map: EmbeddedGraph,
    vertices: Vec<FisherVertex>,
    roles: Vec<EdgeRole>,
    weights: Vec<f64>,
    positions: Vec<Point>,
    g_vertices: usize,
    g_edges: usize,
}

impl FisherGraph {
    /// Decorates every vertex of degree `k` with `k` triangles linked in a
    /// circle. Edge `j < |E(G)|` is the long edge carrying G-edge `j`.
    pub fn new(g: &PeriodicIsoradialGraph) -> Self {
        let gm = g.map();
        let mut base = vec![0usize; gm.vertex_count() + 1];
        for v in 0..gm.vertex_count() {
            base[v + 1] = base[v] + 3 * gm.degree(v);
        }
        let nf = base[gm.vertex_count()];
        let idx = |v: usize, slot: usize, kind: VertexKind| {
            base[v] + 3 * slot + kind as usize
        };

        let mut vertices = Vec::with_capacity(nf);
        let mut positions = Vec::with_capacity(nf);
        let mut slot_of = vec![[0usize; 2]; gm.edge_count()];
        for v in 0..gm.vertex_count() {
            let p = g.positions()[v];
            for (slot, &h) in gm.rotation(v).iter().enumerate() {
                slot_of[h.edge][usize::from(!h.forward)] = slot;
                let r = g.rhombus(h.edge);
                let d = if h.forward { r.direction() } else { -r.direction() };
                let phi = d.arg();
                for (kind, rad, dphi) in [
                    (VertexKind::Out, DECORATION_RADIUS, 0.0),
                    (VertexKind::A, DECORATION_RADIUS / 2.0, -PI / 12.0),
                    (VertexKind::B, DECORATION_RADIUS / 2.0, PI / 12.0),
                ] {
                    vertices.push(FisherVertex { g_vertex: v, slot, kind });
                    positions.push([
                        p[0] + rad * (phi + dphi).cos(),
                        p[1] + rad * (phi + dphi).sin(),
                    ]);
                }
            }
        }

        let mut edges = Vec::new();
        let mut roles = Vec::new();
        let mut weights = Vec::new();
        for (j, e) in gm.edges().iter().enumerate() {
            edges.push(PeriodicEdge {
                u: idx(e.u, slot_of[j][0], VertexKind::Out),
                v: idx(e.v, slot_of[j][1], VertexKind::Out),
                offset: e.offset,
            });
            roles.push(EdgeRole::Long { g_edge: j });
            weights.push(1.0 / (g.theta(j) / 2.0).tan());
        }
        let mut rotation = vec![Vec::new(); nf];
        for (j, e) in gm.edges().iter().enumerate() {
            rotation[idx(e.u, slot_of[j][0], VertexKind::Out)].push(HalfEdge::new(j, true));
            rotation[idx(e.v, slot_of[j][1], VertexKind::Out)].push(HalfEdge::new(j, false));
        }
        for v in 0..gm.vertex_count() {
            let k = gm.degree(v);
            let first = edges.len();
            // per slot: (out,a), (out,b), (a,b), link (b_i, a_{i+1})
            for i in 0..k {
                let (o, a, b) = (
                    idx(v, i, VertexKind::Out),
                    idx(v, i, VertexKind::A),
                    idx(v, i, VertexKind::B),
                );
                let a_next = idx(v, (i + 1) % k, VertexKind::A);
                for (p, q, role) in [
                    (o, a, EdgeRole::Triangle),
                    (o, b, EdgeRole::Triangle),
                    (a, b, EdgeRole::Triangle),
                    (b, a_next, EdgeRole::Link),
                ] {
                    edges.push(PeriodicEdge { u: p, v: q, offset: [0, 0] });
                    roles.push(role);
                    weights.push(1.0);
                }
            }
            let e_of = |i: usize, which: usize| first + 4 * (i % k) + which;
            for i in 0..k {
                let prev = (i + k - 1) % k;
                rotation[idx(v, i, VertexKind::Out)]
                    .extend([HalfEdge::new(e_of(i, 1), true), HalfEdge::new(e_of(i, 0), true)]);
                rotation[idx(v, i, VertexKind::A)] = vec![
                    HalfEdge::new(e_of(i, 0), false),
                    HalfEdge::new(e_of(i, 2), true),
                    HalfEdge::new(e_of(prev, 3), false),
                ];
                rotation[idx(v, i, VertexKind::B)] = vec![
                    HalfEdge::new(e_of(i, 1), false),
                    HalfEdge::new(e_of(i, 3), true),
                    HalfEdge::new(e_of(i, 2), false),
                ];
            }
        }
        let map = EmbeddedGraph::new(nf, edges, rotation).expect("decoration is a valid map");
        Self {
            map,
            vertices,
            roles,
            weights,
            positions,
            g_vertices: gm.vertex_count(),
            g_edges: gm.edge_count(),
        }
    }

    pub fn map(&self) -> &EmbeddedGraph {
        &self.map
    }

    pub fn vertex_count(&self) -> usize {
        self.map.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.map.edge_count()
    }

    pub fn edges(&self) -> &[PeriodicEdge] {
        self.map.edges()
    }

    pub fn vertices(&self) -> &[FisherVertex] {
        &self.vertices
    }

    pub fn roles(&self) -> &[EdgeRole] {
        &self.roles
    }

    /// Critical dimer weights: `cot(θ_e/2)` on long edges, 1 elsewhere.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn g_vertex_count(&self) -> usize {
        self.g_vertices
    }

    pub fn g_edge_count(&self) -> usize {
        self.g_edges
    }

    /// Long edge carrying G-edge `j`.
    pub fn long_edge(&self, j: usize) -> usize {
        j
    }

    pub fn is_long(&self, e: usize) -> bool {
        e < self.g_edges
    }

    pub fn quotient(&self, n: usize) -> Result<ToroidalGraph> {
        self.quotient_with_seam(n, [0, 0])
    }

    pub fn quotient_with_seam(&self, n: usize, seam: Cell) -> Result<ToroidalGraph> {
        ToroidalGraph::new(self.vertex_count(), self.edges(), n, seam)
    }
}

/// Weight map of the critical dimer model on `F`.
pub fn critical_weights(f: &FisherGraph) -> Vec<f64> {
    f.weights().to_vec()
}

/// Counts the dimer configurations of `F_n` whose set of unused long edges
/// is the given contour (G_n edge indices of `quotient(G, n)`), by
/// enumerating the completions of every decoration independently.
pub fn matchings_of_contour(
    f: &FisherGraph,
    n: usize,
    contour: &[usize],
    budget: &EnumerationBudget,
) -> Result<u64> {
    let tg = f.quotient(n)?;
    let ng = f.g_vertex_count();
    let per_cell_g_edges = f.g_edge_count();
    let mut in_contour = vec![false; per_cell_g_edges * n * n];
    for &c in contour {
        if c >= in_contour.len() || std::mem::replace(&mut in_contour[c], true) {
            return Err(Error::Domain(format!("contour edge {c} invalid or repeated")));
        }
    }
    let mut degree = vec![0usize; ng * n * n];
    let mut matched = vec![false; tg.vertex_count()];
    for e in tg.edges() {
        if !f.is_long(e.base) {
            continue;
        }
        let gi = e.base + per_cell_g_edges * (e.cell[0] as usize + n * e.cell[1] as usize);
        if in_contour[gi] {
            let fe = f.edges()[e.base];
            let gu = f.vertices()[fe.u].g_vertex;
            let gv = f.vertices()[fe.v].g_vertex;
            let (_, cu) = tg.vertex_label(e.u);
            let (_, cv) = tg.vertex_label(e.v);
            degree[gu + ng * (cu[0] as usize + n * cu[1] as usize)] += 1;
            degree[gv + ng * (cv[0] as usize + n * cv[1] as usize)] += 1;
        } else {
            matched[e.u] = true;
            matched[e.v] = true;
        }
    }
    if let Some(v) = degree.iter().position(|d| d % 2 == 1) {
        return Err(Error::NotAContour(v));
    }
    // decorations are the connected components once long edges are removed
    let mut total = 1u64;
    let mut group: Vec<Vec<usize>> = vec![Vec::new(); ng * n * n];
    for i in 0..tg.vertex_count() {
        let (v, c) = tg.vertex_label(i);
        let gv = f.vertices()[v].g_vertex;
        group[gv + ng * (c[0] as usize + n * c[1] as usize)].push(i);
    }
    for members in group {
        let free: Vec<usize> = members.iter().copied().filter(|&i| !matched[i]).collect();
        let local = |i: usize| free.iter().position(|&j| j == i);
        let mut edges = Vec::new();
        for e in tg.edges() {
            if f.is_long(e.base) {
                continue;
            }
            if let (Some(a), Some(b)) = (local(e.u), local(e.v)) {
                edges.push((a, b, 1.0));
            }
        }
        total *= enumerate_matchings(free.len(), &edges, budget)?.count;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoradial::LatticeKind;

    #[test]
    fn sizes_and_degrees() {
        for (kind, nv) in [
            (LatticeKind::Square, 12),
            (LatticeKind::Honeycomb, 18),
            (LatticeKind::Triangular, 18),
        ] {
            let g = PeriodicIsoradialGraph::standard_lattice(kind);
            let f = FisherGraph::new(&g);
            assert_eq!(f.vertex_count(), nv);
            for v in 0..f.vertex_count() {
                assert_eq!(f.map().degree(v), 3);
            }
            let faces = f.map().faces().unwrap();
            assert_eq!(faces.len(), 3 * g.edge_count());
        }
    }

    #[test]
    fn weights() {
        let sq = FisherGraph::new(&PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square));
        let tri =
            FisherGraph::new(&PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular));
        for (f, nu) in [(sq, 1.0 + 2f64.sqrt()), (tri, 2.0 + 3f64.sqrt())] {
            for (e, w) in critical_weights(&f).into_iter().enumerate() {
                let expect = if f.is_long(e) { nu } else { 1.0 };
                assert!((w - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contour_completions() {
        let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
        let f = FisherGraph::new(&g);
        let b = EnumerationBudget::default();
        assert_eq!(matchings_of_contour(&f, 1, &[], &b).unwrap(), 2);
        assert_eq!(matchings_of_contour(&f, 1, &[0], &b).unwrap(), 2);
        assert_eq!(matchings_of_contour(&f, 1, &[0, 1], &b).unwrap(), 2);
        assert_eq!(matchings_of_contour(&f, 2, &[], &b).unwrap(), 16);
        assert!(matches!(
            matchings_of_contour(&f, 2, &[0], &b),
            Err(Error::NotAContour(_))
        ));
    }
}
