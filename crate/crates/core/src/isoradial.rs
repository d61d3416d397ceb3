//! ℤ²-periodic isoradial graphs: loading, validation, rhombus data, duals.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embedding::{cell_add, cell_sub, Cell, EmbeddedGraph, Faces, HalfEdge, PeriodicEdge};
use crate::error::{Error, Result};
use crate::torus::ToroidalGraph;

pub const GEOMETRY_TOL: f64 = 1e-9;

pub type Point = [f64; 2];

/// On-disk description of a periodic graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub basis: [[f64; 2]; 2],
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub pos: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub offset: [i32; 2],
}

/// Rhombus of the diamond graph attached to an edge `u → v`. All points are
/// absolute, in the frame where `u` sits in cell `(0,0)`.
#[derive(Clone, Copy, Debug)]
pub struct Rhombus {
    pub theta: f64,
    pub u: Point,
    pub v: Point,
    pub center_left: Point,
    pub center_right: Point,
    /// Face to the left of `u → v` and the cell of that copy.
    pub face_left: (usize, Cell),
    pub face_right: (usize, Cell),
}

impl Rhombus {
    /// Unit sides at `u`, counter-clockwise: towards the right face, then the
    /// left face. They enclose the angle `2θ`.
    pub fn sides_at_u(&self) -> (Complex64, Complex64) {
        (unit(self.center_right, self.u), unit(self.center_left, self.u))
    }

    /// Direction of `u → v` as a unit complex number.
    pub fn direction(&self) -> Complex64 {
        unit(self.v, self.u)
    }
}

fn unit(to: Point, from: Point) -> Complex64 {
    let z = Complex64::new(to[0] - from[0], to[1] - from[1]);
    z / z.norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Triangular,
    Honeycomb,
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Self::Square),
            "triangular" => Ok(Self::Triangular),
            "honeycomb" => Ok(Self::Honeycomb),
            _ => Err(Error::Domain(format!("unknown lattice kind {s:?}"))),
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Square => "square",
            Self::Triangular => "triangular",
            Self::Honeycomb => "honeycomb",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicIsoradialGraph {
    ids: Vec<String>,
    positions: Vec<Point>,
    basis: [Point; 2],
    map: EmbeddedGraph,
    faces: Faces,
    face_centers: Vec<Point>,
    /// Cell of each traced face copy whose circumcenter lies in the unit cell.
    face_shift: Vec<Cell>,
    rhombi: Vec<Rhombus>,
}

impl PeriodicIsoradialGraph {
    pub fn new(
        ids: Vec<String>,
        positions: Vec<Point>,
        basis: [Point; 2],
        edges: Vec<PeriodicEdge>,
    ) -> Result<Self> {
        let nv = ids.len();
        if positions.len() != nv || nv == 0 {
            return Err(Error::Schema("vertex list empty or inconsistent".into()));
        }
        if positions.iter().flatten().chain(basis.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Schema("non-finite coordinate".into()));
        }
        let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::Schema("degenerate period basis".into()));
        }
        let mut seen_ids = HashSet::new();
        if !ids.iter().all(|id| seen_ids.insert(id.as_str())) {
            return Err(Error::Schema("duplicate vertex id".into()));
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if e.u >= nv || e.v >= nv {
                return Err(Error::Schema("edge endpoint out of range".into()));
            }
            if e.u == e.v && e.offset == [0, 0] {
                return Err(Error::Schema("loop with zero offset".into()));
            }
            let a = (e.u, e.v, e.offset);
            let b = (e.v, e.u, [-e.offset[0], -e.offset[1]]);
            if !seen.insert(a.min(b)) {
                return Err(Error::Schema(format!("duplicate edge {}-{}", ids[e.u], ids[e.v])));
            }
        }

        let lift = |v: usize, c: Cell| -> Point {
            [
                positions[v][0] + c[0] as f64 * basis[0][0] + c[1] as f64 * basis[1][0],
                positions[v][1] + c[0] as f64 * basis[0][1] + c[1] as f64 * basis[1][1],
            ]
        };

        let mut outgoing: Vec<Vec<(f64, HalfEdge)>> = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            let p = lift(e.v, e.offset);
            let q = positions[e.u];
            let ang = (p[1] - q[1]).atan2(p[0] - q[0]);
            outgoing[e.u].push((ang, HalfEdge::new(i, true)));
            let back = if ang > 0.0 { ang - PI } else { ang + PI };
            outgoing[e.v].push((back, HalfEdge::new(i, false)));
        }
        let mut rotation = Vec::with_capacity(nv);
        for (v, mut out) in outgoing.into_iter().enumerate() {
            out.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in out.windows(2) {
                if (w[1].0 - w[0].0).abs() < 1e-12 {
                    return Err(Error::Schema(format!("overlapping edges at vertex {}", ids[v])));
                }
            }
            rotation.push(out.into_iter().map(|(_, h)| h).collect());
        }
        let map = EmbeddedGraph::new(nv, edges, rotation)?;
        let faces = map.faces()?;

        let inv = {
            let d = det;
            [[basis[1][1] / d, -basis[1][0] / d], [-basis[0][1] / d, basis[0][0] / d]]
        };
        let mut face_centers = Vec::with_capacity(faces.len());
        let mut face_shift = Vec::with_capacity(faces.len());
        for (f, cyc) in faces.cycles.iter().enumerate() {
            let pts: Vec<Point> = cyc
                .half_edges
                .iter()
                .zip(&cyc.cells)
                .map(|(&h, &c)| lift(map.source(h), c))
                .collect();
            let k = pts.len();
            if k < 3 {
                return Err(Error::Isoradiality { face: f, deviation: f64::INFINITY });
            }
            let c = circumcenter(pts[0], pts[k / 3], pts[2 * k / 3])
                .ok_or(Error::Isoradiality { face: f, deviation: f64::INFINITY })?;
            let deviation = pts
                .iter()
                .map(|p| ((p[0] - c[0]).hypot(p[1] - c[1]) - 1.0).abs())
                .fold(0.0, f64::max);
            if deviation > GEOMETRY_TOL {
                return Err(Error::Isoradiality { face: f, deviation });
            }
            let s = [
                (inv[0][0] * c[0] + inv[0][1] * c[1] + GEOMETRY_TOL).floor() as i32,
                (inv[1][0] * c[0] + inv[1][1] * c[1] + GEOMETRY_TOL).floor() as i32,
            ];
            let shift_back = lift_vec(basis, s);
            face_centers.push([c[0] - shift_back[0], c[1] - shift_back[1]]);
            face_shift.push(s);
        }

        let mut rhombi = Vec::with_capacity(map.edge_count());
        for (i, e) in map.edges().iter().enumerate() {
            let fwd = HalfEdge::new(i, true);
            let bwd = HalfEdge::new(i, false);
            let (fl, pl) = (faces.face_of(fwd), faces.position_of(fwd));
            let (fr, pr) = (faces.face_of(bwd), faces.position_of(bwd));
            let cell_l = cell_sub(face_shift[fl], faces.cycles[fl].cells[pl]);
            let cell_r = cell_add(cell_sub(face_shift[fr], faces.cycles[fr].cells[pr]), e.offset);
            let cl = add_pt(face_centers[fl], lift_vec(basis, cell_l));
            let cr = add_pt(face_centers[fr], lift_vec(basis, cell_r));
            let u = positions[e.u];
            let v = lift(e.v, e.offset);
            let theta = angle_between(sub_pt(v, u), sub_pt(cl, u));
            if !(theta > GEOMETRY_TOL && theta < PI / 2.0 - GEOMETRY_TOL) {
                return Err(Error::DegenerateAngle { edge: i, theta });
            }
            rhombi.push(Rhombus {
                theta,
                u,
                v,
                center_left: cl,
                center_right: cr,
                face_left: (fl, cell_l),
                face_right: (fr, cell_r),
            });
        }

        Ok(Self { ids, positions, basis, map, faces, face_centers, face_shift, rhombi })
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let index: HashMap<&str, usize> =
            spec.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            let look = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("edge refers to unknown vertex {id:?}")))
            };
            edges.push(PeriodicEdge { u: look(&e.u)?, v: look(&e.v)?, offset: e.offset });
        }
        Self::new(
            spec.vertices.iter().map(|v| v.id.clone()).collect(),
            spec.vertices.iter().map(|v| v.pos).collect(),
            spec.basis,
            edges,
        )
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            basis: self.basis,
            vertices: self
                .ids
                .iter()
                .zip(&self.positions)
                .map(|(id, &pos)| VertexSpec { id: id.clone(), pos })
                .collect(),
            edges: self
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    u: self.ids[e.u].clone(),
                    v: self.ids[e.v].clone(),
                    offset: e.offset,
                })
                .collect(),
        }
    }

    pub fn standard_lattice(kind: LatticeKind) -> Self {
        let s3 = 3f64.sqrt();
        let s2 = 2f64.sqrt();
        let one = |offsets: &[Cell]| -> Vec<PeriodicEdge> {
            offsets.iter().map(|&offset| PeriodicEdge { u: 0, v: 0, offset }).collect()
        };
        let built = match kind {
            LatticeKind::Square => Self::new(
                vec!["o".into()],
                vec![[0.0, 0.0]],
                [[s2, 0.0], [0.0, s2]],
                one(&[[1, 0], [0, 1]]),
            ),
            LatticeKind::Triangular => Self::new(
                vec!["o".into()],
                vec![[0.0, 0.0]],
                [[s3, 0.0], [s3 / 2.0, 1.5]],
                one(&[[1, 0], [0, 1], [-1, 1]]),
            ),
            LatticeKind::Honeycomb => Self::new(
                vec!["a".into(), "b".into()],
                vec![[0.0, 0.0], [0.0, 1.0]],
                [[s3, 0.0], [s3 / 2.0, 1.5]],
                [[0, 0], [0, -1], [1, -1]]
                    .into_iter()
                    .map(|offset| PeriodicEdge { u: 0, v: 1, offset })
                    .collect(),
            ),
        };
        built.expect("standard lattices are isoradial")
    }

    /// Triangular lattice generated by an acute triangle with the given
    /// angles (radians, summing to π) inscribed in the unit circle.
    pub fn triangular_from_angles(angles: [f64; 3]) -> Result<Self> {
        let [a, b, c] = angles;
        if angles.iter().any(|&x| !(x > 0.0 && x < PI / 2.0)) || (a + b + c - PI).abs() > 1e-12 {
            return Err(Error::Domain("triangle angles must be acute and sum to pi".into()));
        }
        // side opposite an angle x has length 2 sin x
        let p1 = [2.0 * c.sin(), 0.0];
        let p2 = [2.0 * b.sin() * a.cos(), 2.0 * b.sin() * a.sin()];
        Self::new(
            vec!["o".into()],
            vec![[0.0, 0.0]],
            [p1, p2],
            [[1, 0], [0, 1], [-1, 1]]
                .into_iter()
                .map(|offset| PeriodicEdge { u: 0, v: 0, offset })
                .collect(),
        )
    }

    /// Two-vertex graph with three distinct half-angles, shipped as data.
    pub fn generic_hexagonal() -> Self {
        let spec: GraphSpec = serde_json::from_str(include_str!("../data/generic_hexagonal.json"))
            .expect("bundled graph parses");
        Self::from_spec(&spec).expect("bundled graph is isoradial")
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.map.edge_count()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[PeriodicEdge] {
        self.map.edges()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn basis(&self) -> [Point; 2] {
        self.basis
    }

    pub fn map(&self) -> &EmbeddedGraph {
        &self.map
    }

    pub fn faces(&self) -> &Faces {
        &self.faces
    }

    pub fn face_centers(&self) -> &[Point] {
        &self.face_centers
    }

    /// Translation taking the traced copy of face `f` to the copy whose
    /// circumcenter lies in the fundamental parallelogram.
    pub fn face_shift(&self, f: usize) -> Cell {
        self.face_shift[f]
    }

    pub fn theta(&self, e: usize) -> f64 {
        self.rhombi[e].theta
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.rhombi.iter().map(|r| r.theta).collect()
    }

    pub fn rhombus(&self, e: usize) -> &Rhombus {
        &self.rhombi[e]
    }

    pub fn rhombi(&self) -> &[Rhombus] {
        &self.rhombi
    }

    pub fn lift(&self, v: usize, c: Cell) -> Point {
        add_pt(self.positions[v], lift_vec(self.basis, c))
    }

    /// Dual graph on the circumcenters. Edge `i` of the dual crosses edge `i`
    /// and is directed from the right face to the left face.
    pub fn dual(&self) -> Result<Self> {
        let ids = (0..self.face_count()).map(|f| format!("f{f}")).collect();
        let edges = self
            .rhombi
            .iter()
            .map(|r| PeriodicEdge {
                u: r.face_right.0,
                v: r.face_left.0,
                offset: cell_sub(r.face_left.1, r.face_right.1),
            })
            .collect();
        Self::new(ids, self.face_centers.clone(), self.basis, edges)
    }

    pub fn quotient(&self, n: usize) -> Result<ToroidalGraph> {
        ToroidalGraph::new(self.vertex_count(), self.edges(), n, [0, 0])
    }
}

/// Parses and validates a graph description (JSON).
pub fn load_graph(document: &str) -> Result<PeriodicIsoradialGraph> {
    let spec: GraphSpec =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    PeriodicIsoradialGraph::from_spec(&spec)
}

fn lift_vec(basis: [Point; 2], c: Cell) -> Point {
    [
        c[0] as f64 * basis[0][0] + c[1] as f64 * basis[1][0],
        c[0] as f64 * basis[0][1] + c[1] as f64 * basis[1][1],
    ]
}

fn add_pt(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub_pt(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn angle_between(a: Point, b: Point) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dot)
}

fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-14 {
        return None;
    }
    let na = a[0] * a[0] + a[1] * a[1];
    let nb = b[0] * b[0] + b[1] * b[1];
    let nc = c[0] * c[0] + c[1] * c[1];
    Some([
        (na * (b[1] - c[1]) + nb * (c[1] - a[1]) + nc * (a[1] - b[1])) / d,
        (na * (c[0] - b[0]) + nb * (a[0] - c[0]) + nc * (b[0] - a[0])) / d,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: Point, b: Point) -> f64 {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    #[test]
    fn standard_angles() {
        for (kind, th, nv, ne) in [
            (LatticeKind::Square, PI / 4.0, 1, 2),
            (LatticeKind::Triangular, PI / 6.0, 1, 3),
            (LatticeKind::Honeycomb, PI / 3.0, 2, 3),
        ] {
            let g = PeriodicIsoradialGraph::standard_lattice(kind);
            assert_eq!((g.vertex_count(), g.edge_count()), (nv, ne));
            for t in g.thetas() {
                assert!((t - th).abs() < 1e-12, "{kind}: {t}");
            }
        }
    }

    #[test]
    fn rhombi_have_unit_sides() {
        for g in [
            PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular),
            PeriodicIsoradialGraph::generic_hexagonal(),
        ] {
            for r in g.rhombi() {
                for (p, q) in [
                    (r.u, r.center_left),
                    (r.u, r.center_right),
                    (r.v, r.center_left),
                    (r.v, r.center_right),
                ] {
                    assert!((dist(p, q) - 1.0).abs() < 1e-9);
                }
                let (a, b) = r.sides_at_u();
                assert!(((b / a).arg() - 2.0 * r.theta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_vertex_is_rejected() {
        let mut spec =
            PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb).to_spec();
        spec.vertices[1].pos[0] += 0.3;
        assert!(matches!(
            PeriodicIsoradialGraph::from_spec(&spec),
            Err(Error::Isoradiality { .. })
        ));
    }

    #[test]
    fn scaled_square_is_rejected() {
        let mut spec = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square).to_spec();
        spec.basis = [[2.0, 0.0], [0.0, 2.0]];
        assert!(matches!(
            PeriodicIsoradialGraph::from_spec(&spec),
            Err(Error::Isoradiality { .. })
        ));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(load_graph("{"), Err(Error::Schema(_))));
        let mut spec = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square).to_spec();
        spec.edges.push(spec.edges[0].clone());
        assert!(matches!(PeriodicIsoradialGraph::from_spec(&spec), Err(Error::Schema(_))));
        let mut spec = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square).to_spec();
        spec.edges[0].v = "nope".into();
        assert!(matches!(PeriodicIsoradialGraph::from_spec(&spec), Err(Error::Schema(_))));
    }

    #[test]
    fn dual_angles_are_complementary() {
        for kind in [LatticeKind::Square, LatticeKind::Triangular, LatticeKind::Honeycomb] {
            let g = PeriodicIsoradialGraph::standard_lattice(kind);
            let d = g.dual().unwrap();
            assert_eq!(d.edge_count(), g.edge_count());
            for e in 0..g.edge_count() {
                assert!((g.theta(e) + d.theta(e) - PI / 2.0).abs() < 1e-12);
            }
        }
        let tri = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular);
        let hex = tri.dual().unwrap();
        assert_eq!((hex.vertex_count(), hex.face_count()), (2, 1));
        for t in hex.thetas() {
            assert!((t - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_round_trip() {
        let g = PeriodicIsoradialGraph::generic_hexagonal();
        let text = serde_json::to_string(&g.to_spec()).unwrap();
        let h = load_graph(&text).unwrap();
        assert_eq!(g.thetas(), h.thetas());
    }
}
