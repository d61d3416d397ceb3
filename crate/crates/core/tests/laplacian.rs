use std::f64::consts::PI;

use isoising::fisher::FisherGraph;
use isoising::isoradial::{LatticeKind, PeriodicIsoradialGraph};
use isoising::kasteleyn::orient;
use isoising::laplacian::{
    discrete_exponential_point, double_graph, dual_laplacian, identity_report, identity_suite, incidence,
    laplacian, torus_samples, Identity,
};
use isoising::oracle::EnumerationBudget;
use isoising::spectral::{characteristic_polynomial, grid_scan, zero_at_one_one, TorusSymbol};
use isoising::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn lattices() -> Vec<PeriodicIsoradialGraph> {
    vec![
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square),
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular),
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb),
        PeriodicIsoradialGraph::generic_hexagonal(),
        PeriodicIsoradialGraph::triangular_from_angles([0.8, 1.2, PI - 2.0]).unwrap(),
    ]
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rel(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

#[test]
fn whole_suite_holds() {
    for g in lattices() {
        let r = identity_suite(&g).unwrap();
        assert!(r.passed(), "{:?}", r.items);
        assert_eq!(r.items.len(), 7);
        let prod: f64 = g.thetas().iter().map(|t| t.tan()).product();
        assert!((r.dual_ratio - prod).abs() < 1e-12 * prod);
        assert!(r.conjugate_deviation < 1e-9);
    }
}

#[test]
fn square_constant() {
    // P = 8ν² P_Δ with ν = 1 + √2
    let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
    let r = identity_report(&g, &[Identity::Proportional], 20, 1).unwrap();
    let nu = 1.0 + 2f64.sqrt();
    assert!((Complex64::new(r.constant[0], r.constant[1]).norm() - 8.0 * nu * nu).abs() < 1e-9);
}

#[test]
fn double_graph_shape() {
    for g in lattices() {
        let d = double_graph(&g);
        assert_eq!(d.black_count(), g.vertex_count() + g.face_count());
        assert_eq!(d.white_count(), g.edge_count());
        assert!((0..d.white_count()).all(|w| d.white_degree(w) == 4));
    }
}

#[test]
fn orientation_of_incidence_is_irrelevant() {
    let pts = torus_samples(10, 2);
    for g in lattices() {
        let ne = g.edge_count();
        let plain = incidence(&g, &vec![false; ne]);
        let flips: Vec<bool> = (0..ne).map(|i| i % 2 == 0).collect();
        let flipped = incidence(&g, &flips);
        let lap = laplacian(&g);
        let dual = dual_laplacian(&g).unwrap();
        for &(z, w) in &pts {
            for (mg, mgs) in [&plain, &flipped] {
                let a = mg.eval(z, w);
                let b = mgs.eval(z, w);
                assert!(rel(&(a.adjoint() * &a), &lap.eval(z, w)) < 1e-12);
                assert!((a.adjoint() * &b).norm() < 1e-12 * a.norm() * b.norm());
                assert!(b.ncols() == dual.vertex_count());
            }
        }
    }
}

#[test]
fn pole_of_the_exponential() {
    let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
    let lambda = Complex64::from_polar(1.0, PI / 4.0);
    assert!(matches!(discrete_exponential_point(&g, lambda), Err(Error::PoleHit(_))));
    assert!(matches!(discrete_exponential_point(&g, -lambda), Err(Error::PoleHit(_))));
}

#[test]
fn exponential_tends_to_one_one() {
    for g in lattices() {
        let (z, w) = discrete_exponential_point(&g, c(1e8)).unwrap();
        assert!((z - 1.0).norm() < 1e-6 && (w - 1.0).norm() < 1e-6);
    }
}

#[test]
fn exponential_points_are_fisher_zeros() {
    for g in lattices() {
        let f = FisherGraph::new(&g);
        let o = orient(&f, &EnumerationBudget::default()).unwrap();
        let s = TorusSymbol::kasteleyn(&f, &o);
        let p = characteristic_polynomial(&s).unwrap();
        for lambda in [Complex64::new(0.7, 0.4), Complex64::new(-2.0, 1.5), Complex64::new(0.1, -3.0)] {
            let (z, w) = discrete_exponential_point(&g, lambda).unwrap();
            assert!(p.eval(z, w).norm() < 1e-9 * p.scale_at(z, w));
            let d = s.det(z, w);
            assert!(d.norm() < 1e-9 * p.scale_at(z, w), "{d}");
        }
    }
}

#[test]
fn laplacian_polynomial_zero() {
    for g in lattices() {
        let p = laplacian(&g).polynomial().unwrap();
        assert!(zero_at_one_one(&p).double_zero);
        assert!(grid_scan(&p, 100).minimum_adjacent);
    }
}
