//! Z-invariant Ising couplings and the elliptic functions behind them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isoradial::PeriodicIsoradialGraph;

fn check_modulus(k: f64) -> Result<()> {
    if (0.0..1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::Domain(format!("elliptic modulus k = {k} outside [0, 1)")))
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
        if (an - bn).abs() <= f64::EPSILON * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Complete elliptic integral of the first kind, K(k).
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    Ok(PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt())))
}

/// Jacobi `sn(u|k)` and `cn(u|k)` by descending Landen transformation.
pub fn jacobi_sn_cn(u: f64, k: f64) -> Result<(f64, f64)> {
    check_modulus(k)?;
    if k == 0.0 {
        return Ok((u.sin(), u.cos()));
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = (1.0 - k * k).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 32 {
        let an = *a.last().unwrap();
        c.push((an - b) / 2.0);
        let bn = (an * b).sqrt();
        a.push((an + b) / 2.0);
        b = bn;
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = (phi + (c[j] / a[j] * phi.sin()).asin()) / 2.0;
    }
    Ok((phi.sin(), phi.cos()))
}

/// Coupling constant J(θ) of the Z-invariant model with modulus `k`.
pub fn coupling(theta: f64, k: f64) -> Result<f64> {
    check_modulus(k)?;
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::Domain(format!("half-angle {theta} outside (0, pi/2)")));
    }
    if k == 0.0 {
        return Ok(0.5 * ((1.0 + theta.sin()) / theta.cos()).ln());
    }
    let kk = complete_elliptic_k(k)?;
    let (sn, cn) = jacobi_sn_cn(2.0 * kk * theta / PI, k)?;
    Ok(0.5 * (sn / cn).asinh())
}

/// Dual modulus `k* = ik/√(1−k²)`.
pub fn dual_parameter(k: f64) -> Result<Complex64> {
    check_modulus(k)?;
    Ok(Complex64::new(0.0, k / (1.0 - k * k).sqrt()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingAssignment {
    pub k: f64,
    pub couplings: Vec<f64>,
}

impl CouplingAssignment {
    pub fn new(g: &PeriodicIsoradialGraph, k: f64) -> Result<Self> {
        let couplings = g.thetas().into_iter().map(|t| coupling(t, k)).collect::<Result<_>>()?;
        Ok(Self { k, couplings })
    }

    pub fn critical(g: &PeriodicIsoradialGraph) -> Self {
        Self::new(g, 0.0).expect("critical couplings exist on isoradial graphs")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn incomplete_f(phi: f64, k: f64) -> f64 {
        simpson(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 4000)
    }

    #[test]
    fn k_values() {
        assert_eq!(complete_elliptic_k(0.0).unwrap(), PI / 2.0);
        let q = incomplete_f(PI / 2.0, 0.5);
        assert!((complete_elliptic_k(0.5).unwrap() - q).abs() < 1e-10);
        assert!(complete_elliptic_k(1.0).is_err());
        assert!(complete_elliptic_k(-0.1).is_err());
    }

    #[test]
    fn sn_cn_values() {
        for k in [0.0, 0.3, 0.6, 0.9] {
            let (s, c) = jacobi_sn_cn(0.0, k).unwrap();
            assert_eq!((s, c), (0.0, 1.0));
            let kk = complete_elliptic_k(k).unwrap();
            let (s, _) = jacobi_sn_cn(kk, k).unwrap();
            assert!((s - 1.0).abs() < 1e-10);
            for phi in [0.2, 0.7, 1.3] {
                let (s, c) = jacobi_sn_cn(incomplete_f(phi, k), k).unwrap();
                assert!((s - phi.sin()).abs() < 1e-10, "k={k} phi={phi}");
                assert!((s * s + c * c - 1.0).abs() < 1e-12);
            }
        }
        let (s, c) = jacobi_sn_cn(0.8, 0.0).unwrap();
        assert_eq!((s, c), (0.8f64.sin(), 0.8f64.cos()));
    }

    #[test]
    fn critical_values() {
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        assert!((coupling(PI / 4.0, 0.0).unwrap() - (1.0 + s2).sqrt().ln()).abs() < 1e-12);
        assert!((coupling(PI / 3.0, 0.0).unwrap() - (2.0 + s3).sqrt().ln()).abs() < 1e-12);
        assert!((coupling(PI / 6.0, 0.0).unwrap() - 0.25 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn critical_grid_identities() {
        for i in 1..=100 {
            let t = i as f64 * (PI / 2.0) / 101.0;
            let j = coupling(t, 0.0).unwrap();
            assert!(((2.0 * j).sinh() - t.tan()).abs() < 1e-12 * t.tan().max(1.0));
            assert!((1.0 / j.tanh() - 1.0 / (t / 2.0).tan()).abs() < 1e-12 / (t / 2.0).tan());
        }
    }

    #[test]
    fn small_k_matches_critical() {
        for t in [0.3, 0.8, 1.2] {
            let a = coupling(t, 1e-9).unwrap();
            let b = coupling(t, 0.0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_parameter_values() {
        assert_eq!(dual_parameter(0.0).unwrap(), Complex64::new(0.0, 0.0));
        let d = dual_parameter(0.6).unwrap();
        assert!(((d * d).re + 0.5625).abs() < 1e-15 && (d * d).im.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(coupling(0.0, 0.0).is_err());
        assert!(coupling(PI / 2.0, 0.0).is_err());
        assert!(coupling(0.5, 1.0).is_err());
    }
}
