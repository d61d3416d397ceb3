use isoising::laurent::{convex_hull, LaurentPoly2};
use isoising::pfaffian::{pfaffian, SkewMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn skew_real(n: usize) -> impl Strategy<Value = SkewMatrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        let mut s = SkewMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                s.add_pair(i, j, v[i * n + j]);
            }
        }
        s
    })
}

fn poly() -> impl Strategy<Value = LaurentPoly2> {
    prop::collection::vec(((-3i32..=3, -3i32..=3), -2.0f64..2.0, -2.0f64..2.0), 1..8).prop_map(|t| {
        LaurentPoly2::from_terms(t.into_iter().map(|((a, b), re, im)| ([a, b], Complex64::new(re, im))))
    })
}

fn cross(o: [i32; 2], a: [i32; 2], b: [i32; 2]) -> i64 {
    (a[0] - o[0]) as i64 * (b[1] - o[1]) as i64 - (a[1] - o[1]) as i64 * (b[0] - o[0]) as i64
}

proptest! {
    #[test]
    fn pfaffian_squares_to_determinant(s in (1usize..5).prop_flat_map(|k| skew_real(2 * k))) {
        let n = s.size();
        let det = DMatrix::from_row_slice(n, n, &s.rows().concat()).determinant();
        let pf = pfaffian(&s).unwrap().value();
        prop_assert!((pf * pf - det).abs() < 1e-9 * det.abs().max(1.0));
    }

    #[test]
    fn complex_pfaffian_squares_to_determinant(
        re in skew_real(6),
        im in skew_real(6),
    ) {
        let mut s = SkewMatrix::<Complex64>::zeros(6);
        for i in 0..6 {
            for j in i + 1..6 {
                s.add_pair(i, j, Complex64::new(re.get(i, j), im.get(i, j)));
            }
        }
        let det = DMatrix::from_row_slice(6, 6, &s.rows().concat()).determinant();
        let pf = pfaffian(&s).unwrap().value();
        prop_assert!((pf * pf - det).norm() < 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn odd_sizes_are_rejected(s in skew_real(5)) {
        prop_assert!(matches!(pfaffian(&s), Err(isoising::Error::OddSize(5))));
    }

    #[test]
    fn evaluation_is_multiplicative(p in poly(), q in poly(), a in 0.5f64..2.0, t in 0.0f64..6.3) {
        let z = Complex64::from_polar(a, t);
        let w = Complex64::from_polar(1.0 / a, 2.0 * t);
        let lhs = p.mul(&q).eval(z, w);
        let rhs = p.eval(z, w) * q.eval(z, w);
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()) * 100.0);
        prop_assert!((p.add(&q).eval(z, w) - p.eval(z, w) - q.eval(z, w)).norm() < 1e-9 * 100.0);
    }

    #[test]
    fn hull_is_convex_and_contains_support(pts in prop::collection::vec((-5i32..=5, -5i32..=5), 1..20)) {
        let pts: Vec<[i32; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
        let hull = convex_hull(pts.clone());
        let k = hull.len();
        if k >= 3 {
            for i in 0..k {
                prop_assert!(cross(hull[i], hull[(i + 1) % k], hull[(i + 2) % k]) > 0);
                for p in &pts {
                    prop_assert!(cross(hull[i], hull[(i + 1) % k], *p) >= 0);
                }
            }
        }
        for h in &hull {
            prop_assert!(pts.contains(h));
        }
    }
}
