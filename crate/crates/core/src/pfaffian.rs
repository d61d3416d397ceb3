//! Dense skew-symmetric matrices and their Pfaffians.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Dense skew-symmetric matrix, row-major. Entries are only ever written in
/// antisymmetric pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type SkewMatrixReal = SkewMatrix<f64>;

impl<T: Scalar> SkewMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// `A[i][j] += x` and `A[j][i] -= x`.
    pub fn add_pair(&mut self, i: usize, j: usize, x: T) {
        let n = self.n;
        self.data[i * n + j] += x;
        self.data[j * n + i] -= x;
    }

    /// Principal submatrix on `keep`, in the given order.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let m = keep.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in keep {
            for &j in keep {
                data.push(self.get(i, j));
            }
        }
        Self { n: m, data }
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// `phase · exp(log_abs)`; zero is `phase = 0, log_abs = -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfaffianValue<T> {
    pub phase: T,
    pub log_abs: f64,
}

impl<T: Scalar> PfaffianValue<T> {
    pub fn value(&self) -> T {
        if self.log_abs == f64::NEG_INFINITY {
            T::zero()
        } else {
            self.phase * T::from_real(self.log_abs.exp())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

/// Pfaffian by skew Gaussian elimination with partial pivoting
/// (Parlett–Reid), `O(n³)`.
pub fn pfaffian<T: Scalar>(a: &SkewMatrix<T>) -> Result<PfaffianValue<T>> {
    let n = a.n;
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    let zero = PfaffianValue { phase: T::zero(), log_abs: f64::NEG_INFINITY };
    let mut m = a.data.clone();
    let mut phase = T::one();
    let mut log_abs = 0.0;
    let mut tau = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = m[(k + 1) * n + k].modulus();
        for i in k + 2..n {
            let v = m[i * n + k].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best == 0.0 {
            return Ok(zero);
        }
        if kp != k + 1 {
            for j in 0..n {
                m.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                m.swap(i * n + k + 1, i * n + kp);
            }
            phase = -phase;
        }
        let piv = m[k * n + k + 1];
        let r = piv.modulus();
        phase = phase * (piv / T::from_real(r));
        log_abs += r.ln();
        if k + 2 < n {
            for j in k + 2..n {
                tau[j] = m[k * n + j] / piv;
                col[j] = m[j * n + k + 1];
            }
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                let row = &mut m[i * n..(i + 1) * n];
                for j in k + 2..n {
                    row[j] += ti * col[j] - ci * tau[j];
                }
            }
        }
    }
    Ok(PfaffianValue { phase, log_abs })
}

/// Sign of the permutation listing the pairs `(u₁ v₁ u₂ v₂ …)` followed by
/// `rest`.
pub fn pairing_sign(pairs: &[(usize, usize)], rest: &[usize]) -> i8 {
    let perm: Vec<usize> =
        pairs.iter().flat_map(|&(u, v)| [u, v]).chain(rest.iter().copied()).collect();
    permutation_sign(&perm)
}

/// Sign of a permutation of `0..len` (given as a sequence of images).
pub fn permutation_sign(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// The term of the Pfaffian expansion contributed by a perfect matching.
pub fn matching_term<T: Scalar>(a: &SkewMatrix<T>, pairs: &[(usize, usize)]) -> T {
    let s = pairing_sign(pairs, &[]);
    let prod = pairs.iter().fold(T::one(), |acc, &(u, v)| acc * a.get(u, v));
    if s > 0 {
        prod
    } else {
        -prod
    }
}
