//! Combinatorial maps of ℤ²-periodic planar graphs.
//!
//! A periodic graph is stored through its fundamental domain: every edge
//! joins vertex `u` in cell `(0,0)` to vertex `v` in cell `offset`. The planar
//! embedding is encoded as a rotation system (counter-clockwise order of the
//! outgoing half-edges at each vertex); faces are the orbits of
//! [`EmbeddedGraph::next_in_face`] and are traversed with the face on the left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Translation cell in ℤ².
pub type Cell = [i32; 2];

pub(crate) fn cell_add(a: Cell, b: Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn cell_sub(a: Cell, b: Cell) -> Cell {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn cell_neg(a: Cell) -> Cell {
    [-a[0], -a[1]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicEdge {
    pub u: usize,
    pub v: usize,
    pub offset: Cell,
}

/// An edge traversed in one direction; `forward` means `u → v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfEdge {
    pub edge: usize,
    pub forward: bool,
}

impl HalfEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn twin(self) -> Self {
        Self { edge: self.edge, forward: !self.forward }
    }

    fn index(self) -> usize {
        2 * self.edge + usize::from(!self.forward)
    }
}

/// One face, as the closed sequence of half-edges bounding it.
#[derive(Clone, Debug)]
pub struct FaceCycle {
    pub half_edges: Vec<HalfEdge>,
    /// Cell of the source of each half-edge, in the frame where the first
    /// source sits in cell `(0,0)`.
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug)]
pub struct Faces {
    pub cycles: Vec<FaceCycle>,
    /// `(face, position)` of every half-edge, indexed by `2*edge + !forward`.
    locate: Vec<(usize, usize)>,
}

impl Faces {
    /// Face lying to the left of the half-edge.
    pub fn face_of(&self, h: HalfEdge) -> usize {
        self.locate[h.index()].0
    }

    pub fn position_of(&self, h: HalfEdge) -> usize {
        self.locate[h.index()].1
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddedGraph {
    n_vertices: usize,
    edges: Vec<PeriodicEdge>,
    rotation: Vec<Vec<HalfEdge>>,
    slot: Vec<usize>,
}

impl EmbeddedGraph {
    /// Builds the map from a rotation system. Each half-edge must appear
    /// exactly once, in the rotation of its source vertex.
    pub fn new(
        n_vertices: usize,
        edges: Vec<PeriodicEdge>,
        rotation: Vec<Vec<HalfEdge>>,
    ) -> Result<Self> {
        if rotation.len() != n_vertices {
            return Err(Error::Schema(format!(
                "rotation system has {} vertices, expected {n_vertices}",
                rotation.len()
            )));
        }
        let mut slot = vec![usize::MAX; 2 * edges.len()];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &h) in rot.iter().enumerate() {
                let e = edges.get(h.edge).ok_or_else(|| {
                    Error::Schema(format!("rotation refers to unknown edge {}", h.edge))
                })?;
                let src = if h.forward { e.u } else { e.v };
                if src != v || slot[h.index()] != usize::MAX {
                    return Err(Error::Schema(format!(
                        "half-edge {h:?} misplaced in rotation of vertex {v}"
                    )));
                }
                slot[h.index()] = i;
            }
        }
        if slot.contains(&usize::MAX) {
            return Err(Error::Schema("rotation system misses half-edges".into()));
        }
        for e in &edges {
            if e.u >= n_vertices || e.v >= n_vertices {
                return Err(Error::Schema("edge endpoint out of range".into()));
            }
        }
        Ok(Self { n_vertices, edges, rotation, slot })
    }

    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[PeriodicEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> PeriodicEdge {
        self.edges[e]
    }

    pub fn rotation(&self, v: usize) -> &[HalfEdge] {
        &self.rotation[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    pub fn source(&self, h: HalfEdge) -> usize {
        let e = self.edges[h.edge];
        if h.forward {
            e.u
        } else {
            e.v
        }
    }

    pub fn target(&self, h: HalfEdge) -> usize {
        self.source(h.twin())
    }

    /// Cell of the target when the source sits in cell `(0,0)`.
    pub fn offset(&self, h: HalfEdge) -> Cell {
        let o = self.edges[h.edge].offset;
        if h.forward {
            o
        } else {
            cell_neg(o)
        }
    }

    /// Successor of `h` along the face on its left.
    pub fn next_in_face(&self, h: HalfEdge) -> HalfEdge {
        let t = h.twin();
        let rot = &self.rotation[self.source(t)];
        let i = self.slot[t.index()];
        rot[(i + rot.len() - 1) % rot.len()]
    }

    /// Traces every face. Fails if a face is not closed in the plane (the
    /// rotation system does not describe a planar periodic embedding) or if
    /// the Euler relation of the torus `V - E + F = 0` fails.
    pub fn faces(&self) -> Result<Faces> {
        let mut locate = vec![(usize::MAX, 0); 2 * self.edges.len()];
        let mut cycles = Vec::new();
        for start in 0..2 * self.edges.len() {
            if locate[start].0 != usize::MAX {
                continue;
            }
            let h0 = HalfEdge::new(start / 2, start % 2 == 0);
            let face = cycles.len();
            let mut half_edges = Vec::new();
            let mut cells = Vec::new();
            let mut cell = [0, 0];
            let mut h = h0;
            loop {
                locate[h.index()] = (face, half_edges.len());
                half_edges.push(h);
                cells.push(cell);
                cell = cell_add(cell, self.offset(h));
                h = self.next_in_face(h);
                if h == h0 {
                    break;
                }
            }
            if cell != [0, 0] {
                return Err(Error::Schema(format!(
                    "face {face} does not close in the plane (winds by {cell:?})"
                )));
            }
            cycles.push(FaceCycle { half_edges, cells });
        }
        if self.n_vertices + cycles.len() != self.edges.len() {
            return Err(Error::Schema(format!(
                "embedding is not a torus map: V={} E={} F={}",
                self.n_vertices,
                self.edges.len(),
                cycles.len()
            )));
        }
        Ok(Faces { cycles, locate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> EmbeddedGraph {
        // one vertex, loops east (0) and north (1); ccw: E, N, W, S
        let edges = vec![
            PeriodicEdge { u: 0, v: 0, offset: [1, 0] },
            PeriodicEdge { u: 0, v: 0, offset: [0, 1] },
        ];
        let rot = vec![vec![
            HalfEdge::new(0, true),
            HalfEdge::new(1, true),
            HalfEdge::new(0, false),
            HalfEdge::new(1, false),
        ]];
        EmbeddedGraph::new(1, edges, rot).unwrap()
    }

    #[test]
    fn square_has_one_quadrilateral_face() {
        let g = square();
        let faces = g.faces().unwrap();
        assert_eq!(faces.len(), 1);
        let c = &faces.cycles[0];
        assert_eq!(c.half_edges.len(), 4);
        assert_eq!(c.cells, vec![[0, 0], [1, 0], [1, 1], [0, 1]]);
    }

    #[test]
    fn bad_rotation_is_rejected() {
        let edges = vec![
            PeriodicEdge { u: 0, v: 0, offset: [1, 0] },
            PeriodicEdge { u: 0, v: 0, offset: [0, 1] },
        ];
        // E, W, N, S is not planar
        let rot = vec![vec![
            HalfEdge::new(0, true),
            HalfEdge::new(0, false),
            HalfEdge::new(1, true),
            HalfEdge::new(1, false),
        ]];
        let g = EmbeddedGraph::new(1, edges, rot).unwrap();
        assert!(g.faces().is_err());
    }
}
