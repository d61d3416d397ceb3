//! Toroidal quotients `G / nℤ²` of periodic graphs.

use serde::Serialize;

use crate::embedding::{Cell, EmbeddedGraph, HalfEdge, PeriodicEdge};
use crate::error::{Error, Result};

/// One copy of a periodic edge on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusEdge {
    pub u: usize,
    pub v: usize,
    /// Index of the edge in the fundamental domain.
    pub base: usize,
    /// Cell of the `u` endpoint.
    pub cell: Cell,
    /// Signed number of times the edge crosses the seam `x ≡ s_x (mod n)`
    /// (first entry) and `y ≡ s_y (mod n)` (second entry).
    pub wraps: Cell,
}

#[derive(Clone, Debug)]
pub struct ToroidalGraph {
    n: usize,
    base_vertices: usize,
    base_edges: usize,
    seam: Cell,
    edges: Vec<TorusEdge>,
}

impl ToroidalGraph {
    /// Quotient of a periodic graph by `nℤ²`. The seam fixes where wrapping
    /// is recorded: a step from column `x` to `x+1` wraps iff `x+1 ≡ s_x`.
    pub fn new(base_vertices: usize, base: &[PeriodicEdge], n: usize, seam: Cell) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("torus size must be positive".into()));
        }
        let ni = n as i32;
        let wrap = |x: i32, d: i32, s: i32| (x + d - s).div_euclid(ni) - (x - s).div_euclid(ni);
        let mut edges = Vec::with_capacity(n * n * base.len());
        for y in 0..ni {
            for x in 0..ni {
                for (i, e) in base.iter().enumerate() {
                    let tx = (x + e.offset[0]).rem_euclid(ni);
                    let ty = (y + e.offset[1]).rem_euclid(ni);
                    edges.push(TorusEdge {
                        u: e.u + base_vertices * (x + ni * y) as usize,
                        v: e.v + base_vertices * (tx + ni * ty) as usize,
                        base: i,
                        cell: [x, y],
                        wraps: [wrap(x, e.offset[0], seam[0]), wrap(y, e.offset[1], seam[1])],
                    });
                }
            }
        }
        Ok(Self { n, base_vertices, base_edges: base.len(), seam, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seam(&self) -> Cell {
        self.seam
    }

    pub fn base_vertex_count(&self) -> usize {
        self.base_vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.n * self.n * self.base_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[TorusEdge] {
        &self.edges
    }

    pub fn vertex_index(&self, v: usize, cell: Cell) -> usize {
        let n = self.n as i32;
        let x = cell[0].rem_euclid(n);
        let y = cell[1].rem_euclid(n);
        v + self.base_vertices * (x + n * y) as usize
    }

    pub fn vertex_label(&self, i: usize) -> (usize, Cell) {
        let c = i / self.base_vertices;
        (i % self.base_vertices, [(c % self.n) as i32, (c / self.n) as i32])
    }

    pub fn edge_index(&self, base: usize, cell: Cell) -> usize {
        let n = self.n as i32;
        let x = cell[0].rem_euclid(n);
        let y = cell[1].rem_euclid(n);
        base + self.base_edges * (x + n * y) as usize
    }

    pub fn total_wraps(&self) -> [i64; 2] {
        self.edges.iter().fold([0, 0], |acc, e| {
            [acc[0] + e.wraps[0] as i64, acc[1] + e.wraps[1] as i64]
        })
    }

    /// The quotient as a periodic map whose period is the whole torus: edge
    /// offsets are the wrap counts, rotations are lifted from `base`.
    pub fn embedded(&self, base: &EmbeddedGraph) -> Result<EmbeddedGraph> {
        let periodic: Vec<PeriodicEdge> =
            self.edges.iter().map(|e| PeriodicEdge { u: e.u, v: e.v, offset: e.wraps }).collect();
        let mut rotation = vec![Vec::new(); self.vertex_count()];
        for (i, rot) in rotation.iter_mut().enumerate() {
            let (v, cell) = self.vertex_label(i);
            for &h in base.rotation(v) {
                let e = base.edge(h.edge);
                let at = if h.forward {
                    cell
                } else {
                    [cell[0] - e.offset[0], cell[1] - e.offset[1]]
                };
                rot.push(HalfEdge::new(self.edge_index(h.edge, at), h.forward));
            }
        }
        EmbeddedGraph::new(self.vertex_count(), periodic, rotation)
    }
}
