//! Kasteleyn orientations of toroidal Fisher graphs, partition functions
//! from four Pfaffians, and Boltzmann edge probabilities.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{Cell, EmbeddedGraph, HalfEdge};
use crate::error::{Error, Result};
use crate::fisher::FisherGraph;
use crate::oracle::{for_each_matching, EnumerationBudget};
use crate::pfaffian::{pairing_sign, pfaffian, PfaffianValue, SkewMatrixReal};
use crate::torus::ToroidalGraph;

/// Twists in the order used throughout: `(θ,τ) = (0,0), (1,0), (0,1), (1,1)`.
pub const TWISTS: [(u8, u8); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Coefficients of the Pfaffians in `Z = ½ ∑ σ_{θτ} Pf'(K^{θτ})`.
pub const SIGN_PATTERN: [i8; 4] = [-1, 1, 1, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FaceParity {
    pub face: usize,
    pub length: usize,
    /// Edges oriented against the counter-clockwise boundary walk.
    pub clockwise: usize,
}

impl FaceParity {
    pub fn is_odd(&self) -> bool {
        self.clockwise % 2 == 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KasteleynOrientation {
    /// `+1` if the edge points `u → v`, `-1` otherwise.
    pub signs: Vec<f64>,
    /// A perfect matching of the fundamental domain whose lifts fix the sign
    /// of each Pfaffian.
    pub reference_matching: Vec<usize>,
    /// Seam flips applied so that every non-trivial winding class enters
    /// the untwisted Pfaffian with a minus sign.
    pub seam_flips: [bool; 2],
    pub certificate: Vec<FaceParity>,
}

impl KasteleynOrientation {
    /// The orientation with one edge reversed.
    pub fn reversed(&self, e: usize) -> Self {
        let mut o = self.clone();
        o.signs[e] = -o.signs[e];
        o
    }
}

/// Parity of every face of a map under the given edge signs.
pub fn face_parities(map: &EmbeddedGraph, signs: impl Fn(usize) -> f64) -> Result<Vec<FaceParity>> {
    let faces = map.faces()?;
    Ok(faces
        .cycles
        .iter()
        .enumerate()
        .map(|(f, c)| FaceParity {
            face: f,
            length: c.half_edges.len(),
            clockwise: c
                .half_edges
                .iter()
                .filter(|h| h.forward != (signs(h.edge) > 0.0))
                .count(),
        })
        .collect())
}

fn spanning_tree(map: &EmbeddedGraph) -> Vec<bool> {
    let mut in_tree = vec![false; map.edge_count()];
    let mut seen = vec![false; map.vertex_count()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &h in map.rotation(v) {
            let w = map.target(h);
            if !seen[w] {
                seen[w] = true;
                in_tree[h.edge] = true;
                queue.push_back(w);
            }
        }
    }
    in_tree
}

/// Builds a periodic Kasteleyn orientation of the Fisher graph: every face
/// is clockwise odd, and the seam flips are chosen so that the partition
/// function is `½(−Pf'₀₀ + Pf'₁₀ + Pf'₀₁ + Pf'₁₁)` on every torus.
pub fn orient(f: &FisherGraph, budget: &EnumerationBudget) -> Result<KasteleynOrientation> {
    let map = f.map();
    if map.vertex_count() % 2 == 1 {
        return Err(Error::OrientationFailure("odd number of vertices".into()));
    }
    let faces = map.faces()?;
    let tree = spanning_tree(map);
    let nf = faces.len();

    let mut parent: Vec<Option<usize>> = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut order = vec![0usize];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let fc = order[head];
        head += 1;
        for h in &faces.cycles[fc].half_edges {
            if tree[h.edge] {
                continue;
            }
            let g = faces.face_of(h.twin());
            if !seen[g] {
                seen[g] = true;
                parent[g] = Some(h.edge);
                order.push(g);
            }
        }
    }
    if order.len() != nf {
        return Err(Error::OrientationFailure("dual graph of the cotree is disconnected".into()));
    }

    let mut signs = vec![1.0; map.edge_count()];
    let clockwise = |signs: &[f64], face: usize| {
        faces.cycles[face]
            .half_edges
            .iter()
            .filter(|h| h.forward != (signs[h.edge] > 0.0))
            .count()
    };
    for &fc in order.iter().skip(1).rev() {
        if clockwise(&signs, fc) % 2 == 0 {
            let p = parent[fc].expect("non-root face has a parent edge");
            signs[p] = -signs[p];
        }
    }
    let certificate = face_parities(map, |e| signs[e])?;
    if let Some(bad) = certificate.iter().find(|p| !p.is_odd()) {
        return Err(Error::OrientationFailure(format!("face {} is clockwise even", bad.face)));
    }

    let (reference_matching, seam_flips) = normalize_seams(f, &signs, budget)?;
    for (e, s) in signs.iter_mut().enumerate() {
        let d = f.edges()[e].offset;
        if (seam_flips[0] && d[0] % 2 != 0) ^ (seam_flips[1] && d[1] % 2 != 0) {
            *s = -*s;
        }
    }
    Ok(KasteleynOrientation { signs, reference_matching, seam_flips, certificate })
}

fn normalize_seams(
    f: &FisherGraph,
    signs: &[f64],
    budget: &EnumerationBudget,
) -> Result<(Vec<usize>, [bool; 2])> {
    let edges = f.edges();
    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.u, e.v)).collect();
    let entry = |e: usize| signs[e] * f.weights()[e];
    let winding = |m: &[usize]| {
        m.iter().fold([0i32, 0i32], |acc, &e| {
            [acc[0] + edges[e].offset[0], acc[1] + edges[e].offset[1]]
        })
    };
    let term_sign = |m: &[usize]| {
        let p: Vec<(usize, usize)> = m.iter().map(|&e| pairs[e]).collect();
        let s = pairing_sign(&p, &[]) as f64 * m.iter().map(|&e| entry(e).signum()).product::<f64>();
        s as i8
    };

    let mut reference: Option<(Vec<usize>, Cell, i8)> = None;
    let mut ratio: [Option<i8>; 4] = [None; 4];
    let mut conflict = false;
    for_each_matching(f.vertex_count(), &pairs, budget, |m| {
        let w = winding(m);
        let s = term_sign(m);
        let (w0, s0) = match &reference {
            None => {
                reference = Some((m.to_vec(), w, s));
                (w, s)
            }
            Some((_, w0, s0)) => (*w0, *s0),
        };
        let class = ((w[0] - w0[0]).rem_euclid(2) + 2 * (w[1] - w0[1]).rem_euclid(2)) as usize;
        let r = s * s0;
        match ratio[class] {
            None => ratio[class] = Some(r),
            Some(q) if q != r => conflict = true,
            _ => {}
        }
        !conflict && ratio.iter().any(Option::is_none)
    })?;
    if conflict {
        return Err(Error::OrientationFailure(
            "matchings in one winding class carry different signs".into(),
        ));
    }
    let (matching, _, _) =
        reference.ok_or_else(|| Error::OrientationFailure("no perfect matching".into()))?;
    if ratio.iter().any(Option::is_none) {
        return Err(Error::OrientationFailure(
            "fundamental domain does not realise every winding class; use a larger domain".into(),
        ));
    }
    for flips in [[false, false], [true, false], [false, true], [true, true]] {
        let ok = (1..4).all(|class| {
            let hx = class & 1 == 1;
            let hy = class & 2 == 2;
            let twist = if (flips[0] && hx) ^ (flips[1] && hy) { -1 } else { 1 };
            ratio[class].unwrap() * twist == -1
        });
        if ok {
            return Ok((matching, flips));
        }
    }
    Err(Error::OrientationFailure("no seam flip yields the odd sign structure".into()))
}

/// Re-checks the face parities on the torus of size `n`.
pub fn certificate(
    f: &FisherGraph,
    o: &KasteleynOrientation,
    n: usize,
) -> Result<Vec<FaceParity>> {
    let tg = f.quotient(n)?;
    let m = tg.embedded(f.map())?;
    face_parities(&m, |e| o.signs[tg.edges()[e].base])
}

/// `K_n^{θτ}`: entries of edges wrapping the `x` seam an odd number of times
/// are negated when `θ = 1`, those wrapping the `y` seam when `τ = 1`.
pub fn twisted_matrix(
    f: &FisherGraph,
    o: &KasteleynOrientation,
    tg: &ToroidalGraph,
    theta: u8,
    tau: u8,
) -> SkewMatrixReal {
    let mut k = SkewMatrixReal::zeros(tg.vertex_count());
    for e in tg.edges() {
        let flip = (theta as i32 * e.wraps[0] + tau as i32 * e.wraps[1]).rem_euclid(2) == 1;
        let w = o.signs[e.base] * f.weights()[e.base];
        k.add_pair(e.u, e.v, if flip { -w } else { w });
    }
    k
}

/// Sign of the term of the lifted reference matching in `k`.
fn reference_sign(o: &KasteleynOrientation, tg: &ToroidalGraph, k: &SkewMatrixReal) -> f64 {
    let n = tg.n() as i32;
    let mut pairs = Vec::new();
    let mut sign = 1.0;
    for y in 0..n {
        for x in 0..n {
            for &b in &o.reference_matching {
                let e = tg.edges()[tg.edge_index(b, [x, y])];
                pairs.push((e.u, e.v));
                sign *= k.get(e.u, e.v).signum();
            }
        }
    }
    sign * pairing_sign(&pairs, &[]) as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub n: usize,
    pub z: f64,
    pub log_z: f64,
    /// Raw `Pf(K_n^{θτ})` in the order of [`TWISTS`].
    pub pfaffians: [f64; 4],
    /// `log |Pf(K_n^{θτ})|`.
    pub log_abs_pfaffians: [f64; 4],
    /// Signs applied to the raw Pfaffians: `Z = ½ ∑ sign_pattern · Pf`.
    pub sign_pattern: [i8; 4],
}

/// Exact partition function and its Pfaffian decomposition.
pub fn partition_function(
    f: &FisherGraph,
    o: &KasteleynOrientation,
    tg: &ToroidalGraph,
) -> Result<PartitionReport> {
    let parts: Vec<(PfaffianValue<f64>, f64)> = TWISTS
        .par_iter()
        .map(|&(t, u)| {
            let k = twisted_matrix(f, o, tg, t, u);
            let g = reference_sign(o, tg, &k);
            pfaffian(&k).map(|p| (p, g))
        })
        .collect::<Result<_>>()?;
    let top = parts.iter().map(|p| p.0.log_abs).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    let mut pattern = [0i8; 4];
    for (i, (p, g)) in parts.iter().enumerate() {
        pattern[i] = SIGN_PATTERN[i] * *g as i8;
        if !p.is_zero() {
            acc += pattern[i] as f64 * p.phase * (p.log_abs - top).exp();
        }
    }
    let log_z = top + (acc / 2.0).ln();
    Ok(PartitionReport {
        n: tg.n(),
        z: log_z.exp(),
        log_z,
        pfaffians: std::array::from_fn(|i| parts[i].0.value()),
        log_abs_pfaffians: std::array::from_fn(|i| parts[i].0.log_abs),
        sign_pattern: pattern,
    })
}

/// Probability that all the given edges of `F_n` (base edge, cell of its `u`
/// endpoint) occur in a matching drawn from the Boltzmann measure.
pub fn boltzmann_probability(
    f: &FisherGraph,
    o: &KasteleynOrientation,
    tg: &ToroidalGraph,
    edges: &[(usize, Cell)],
) -> Result<f64> {
    if edges.is_empty() {
        return Ok(1.0);
    }
    let mut used = vec![false; tg.vertex_count()];
    let mut pairs = Vec::with_capacity(edges.len());
    for &(b, c) in edges {
        if b >= f.edge_count() {
            return Err(Error::Domain(format!("no edge {b}")));
        }
        let e = tg.edges()[tg.edge_index(b, c)];
        if std::mem::replace(&mut used[e.u], true) || std::mem::replace(&mut used[e.v], true) {
            return Err(Error::NotDisjoint);
        }
        pairs.push((e.u, e.v));
    }
    let rest: Vec<usize> = (0..tg.vertex_count()).filter(|&i| !used[i]).collect();
    let eps = pairing_sign(&pairs, &rest) as f64;
    let z = partition_function(f, o, tg)?;
    let parts: Vec<(f64, PfaffianValue<f64>)> = TWISTS
        .par_iter()
        .enumerate()
        .map(|(i, &(t, u))| {
            let k = twisted_matrix(f, o, tg, t, u);
            let g = reference_sign(o, tg, &k);
            let prod: f64 = pairs.iter().map(|&(a, b)| k.get(a, b)).product();
            let sub = pfaffian(&k.submatrix(&rest))?;
            Ok((SIGN_PATTERN[i] as f64 * g * eps * prod, sub))
        })
        .collect::<Result<_>>()?;
    let p = parts
        .iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(c, s)| c * s.phase * (s.log_abs - z.log_z).exp())
        .sum::<f64>()
        / 2.0;
    Ok(p)
}

/// Half-edges of the `n`-torus lifted from one half-edge of the domain.
pub fn lifted_half_edges(tg: &ToroidalGraph, h: HalfEdge) -> Vec<HalfEdge> {
    let n = tg.n() as i32;
    (0..n)
        .flat_map(|y| (0..n).map(move |x| [x, y]))
        .map(|c| HalfEdge::new(tg.edge_index(h.edge, c), h.forward))
        .collect()
}
