//! The SL(n) loop group: loop matrices, the Coxeter representative, the
//! q-gauge action and companion matrices.
//!
//! Positive roots are strictly lower triangular: the simple root `α_i`
//! corresponds to `E_{i+1,i}` (1-based). Under this labeling
//! `Ad s (X) = s X s⁻¹` shifts every index down by one, matching the
//! Coxeter element `s_1 ··· s_{n-1}` of the root-systems module.

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ratfunc::CycloRat;
use crate::ring::{int, Ring};
use crate::series::LaurentSeries;

/// An `n×n` matrix of Laurent series.
pub type LoopMatrix = Matrix<LaurentSeries>;

/// Embed a rational matrix as a constant loop matrix.
pub fn constant_loop(m: &Matrix<crate::ring::Rational>) -> LoopMatrix {
    m.map(|x| LaurentSeries::constant(CycloRat::from_rational(x.clone())))
}

/// The representative of `s⁻¹`: `−1` on the superdiagonal, `1` at `(n, 1)`.
pub fn coxeter_rep(n: usize) -> Matrix<crate::ring::Rational> {
    assert!(n >= 2);
    Matrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            int(-1)
        } else if i == n - 1 && j == 0 {
            int(1)
        } else {
            int(0)
        }
    })
}

/// Apply `τ^k` entrywise.
pub fn tau(m: &LoopMatrix, k: i64) -> LoopMatrix {
    m.map(|x| x.tau(k))
}

pub fn is_square_of(m: &LoopMatrix, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::Shape(format!(
            "expected a {}x{} matrix, got {}x{}",
            n,
            n,
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn is_one(x: &LaurentSeries) -> bool {
    x.agrees_on_common_window(&LaurentSeries::one())
}

fn is_zero(x: &LaurentSeries) -> bool {
    x.vanishes_on_window()
}

fn is_minus_one(x: &LaurentSeries) -> bool {
    x.agrees_on_common_window(&LaurentSeries::one().neg())
}

/// Lower unitriangular.
pub fn is_in_n(m: &LoopMatrix) -> bool {
    m.is_square()
        && (0..m.rows()).all(|i| {
            (0..m.cols()).all(|j| match j.cmp(&i) {
                std::cmp::Ordering::Greater => is_zero(&m[(i, j)]),
                std::cmp::Ordering::Equal => is_one(&m[(i, j)]),
                std::cmp::Ordering::Less => true,
            })
        })
}

/// Unipotent with off-diagonal entries only in the bottom row.
pub fn is_in_nprime(m: &LoopMatrix) -> bool {
    let n = m.rows();
    is_in_n(m) && (0..n - 1).all(|i| (0..i).all(|j| is_zero(&m[(i, j)])))
}

/// Lower triangular: the Borel subgroup `B` containing `N`.
pub fn is_in_b(m: &LoopMatrix) -> bool {
    m.is_square() && (0..m.rows()).all(|i| (i + 1..m.cols()).all(|j| is_zero(&m[(i, j)])))
}

/// Upper triangular: the opposite Borel subgroup `B̄`.
pub fn is_in_bbar(m: &LoopMatrix) -> bool {
    m.is_square() && (0..m.rows()).all(|i| (0..i).all(|j| is_zero(&m[(i, j)])))
}

/// Shape of `M^s`: `−1` on the superdiagonal, zero above it.
pub fn has_mcell_shape(m: &LoopMatrix) -> bool {
    m.is_square()
        && (0..m.rows()).all(|i| {
            (i + 1..m.cols()).all(|j| {
                if j == i + 1 {
                    is_minus_one(&m[(i, j)])
                } else {
                    is_zero(&m[(i, j)])
                }
            })
        })
}

/// Membership in `M^s`: the shape above and determinant one.
pub fn is_in_mcell(m: &LoopMatrix) -> bool {
    has_mcell_shape(m) && is_one(&det(m))
}

pub fn det(m: &LoopMatrix) -> LaurentSeries {
    m.det_expansion()
}

/// Inverse of a lower unitriangular matrix, `Σ_k (−N)^k` with `N = m − I`.
pub fn unipotent_inverse(m: &LoopMatrix) -> Result<LoopMatrix> {
    if !is_in_n(m) {
        return Err(Error::Shape("matrix is not lower unitriangular".into()));
    }
    let n = m.rows();
    let nil = m.sub(&Matrix::identity(n)).neg();
    let mut acc = Matrix::identity(n);
    let mut pw = Matrix::identity(n);
    for _ in 1..n {
        pw = pw.mul(&nil);
        acc = acc.add(&pw);
    }
    Ok(acc)
}

/// Inverse of a lower triangular matrix with invertible diagonal series.
pub fn triangular_inverse(m: &LoopMatrix) -> Result<LoopMatrix> {
    if !is_in_b(m) {
        return Err(Error::Shape("matrix is not lower triangular".into()));
    }
    if is_in_n(m) {
        return unipotent_inverse(m);
    }
    let n = m.rows();
    let d: Vec<LaurentSeries> = (0..n)
        .map(|i| m[(i, i)].invert())
        .collect::<Result<_>>()?;
    let mut inv: LoopMatrix = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = d[j].clone();
        for i in j + 1..n {
            let mut s = LaurentSeries::zero();
            for k in j..i {
                s = s.add(&m[(i, k)].mul(&inv[(k, j)]));
            }
            inv[(i, j)] = s.mul(&d[i]).neg();
        }
    }
    Ok(inv)
}

/// The q-gauge action `v^τ · L · v⁻¹` for lower triangular `v`.
pub fn qgauge(v: &LoopMatrix, l: &LoopMatrix) -> Result<LoopMatrix> {
    is_square_of(v, l.rows())?;
    let vi = triangular_inverse(v)?;
    Ok(tau(v, 1).mul(l).mul(&vi))
}

/// Canonical form: the companion matrix with bottom row `(1, u_1, ..., u_{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalOperator {
    pub u: Vec<LaurentSeries>,
}

impl CanonicalOperator {
    pub fn new(u: Vec<LaurentSeries>) -> Self {
        CanonicalOperator { u }
    }

    pub fn n(&self) -> usize {
        self.u.len() + 1
    }

    pub fn companion(&self) -> LoopMatrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                LaurentSeries::one().neg()
            } else if i == n - 1 {
                if j == 0 {
                    LaurentSeries::one()
                } else {
                    self.u[j - 1].clone()
                }
            } else {
                LaurentSeries::zero()
            }
        })
    }

    /// Read back from a matrix of companion shape.
    pub fn from_companion(m: &LoopMatrix) -> Result<Self> {
        let n = m.rows();
        if !has_mcell_shape(m) || !is_one(&m[(n - 1, 0)]) {
            return Err(Error::Shape("matrix is not a companion matrix".into()));
        }
        for i in 0..n - 1 {
            for j in 0..=i {
                if !is_zero(&m[(i, j)]) {
                    return Err(Error::Shape(format!(
                        "companion matrix has a nonzero entry at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(CanonicalOperator {
            u: (1..n).map(|j| m[(n - 1, j)].clone()).collect(),
        })
    }

    /// Coefficients `(1, u_1, ..., u_{n-1}, 1)` of `φ, τφ, ..., τⁿφ` in
    /// `τⁿφ + u_{n-1} τ^{n-1}φ + ... + u_1 τφ + φ = 0`.
    pub fn scalar_operator(&self) -> Vec<LaurentSeries> {
        let mut v = vec![LaurentSeries::one()];
        v.extend(self.u.iter().cloned());
        v.push(LaurentSeries::one());
        v
    }

    pub fn from_scalar_operator(c: &[LaurentSeries]) -> Result<Self> {
        if c.len() < 3 || !is_one(&c[0]) || !is_one(&c[c.len() - 1]) {
            return Err(Error::Shape(
                "scalar operator must have the form (1, u_1, ..., u_{n-1}, 1)".into(),
            ));
        }
        Ok(CanonicalOperator {
            u: c[1..c.len() - 1].to_vec(),
        })
    }
}

/// `Σ_k c_k(z) (τ^k φ)(z)`.
pub fn apply_scalar_operator(c: &[LaurentSeries], phi: &LaurentSeries) -> LaurentSeries {
    c.iter()
        .enumerate()
        .fold(LaurentSeries::zero(), |acc, (k, ck)| acc.add(&ck.mul(&phi.tau(k as i64))))
}

pub fn matrix_to_json(m: &LoopMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(|x| x.to_json()).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, conductor: u32) -> Result<LoopMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let parsed: Vec<Vec<LaurentSeries>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(|x| LaurentSeries::from_json(x, conductor))
                .collect()
        })
        .collect::<Result<_>>()?;
    let c = parsed.first().map_or(0, |r| r.len());
    if parsed.is_empty() || parsed.iter().any(|r| r.len() != c) {
        return Err(Error::Shape("matrix rows are empty or ragged".into()));
    }
    Ok(Matrix::from_rows(parsed))
}

/// Random Laurent polynomial on modes `lo..=hi` with small integer coefficients.
pub fn random_series<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> LaurentSeries {
    let coeffs = (lo..=hi)
        .map(|_| CycloRat::from_i64(rng.gen_range(-3..=3)))
        .collect();
    LaurentSeries::exact(lo, coeffs)
}

/// Random lower unitriangular matrix with entries on `lo..=hi`.
pub fn random_unipotent<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> LoopMatrix {
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = random_series(rng, lo, hi);
        }
    }
    m
}

/// Random element of `M^s`: all free entries on `lo..=hi`, with the
/// `(n, 1)` entry solved from `det = 1`.
pub fn random_mcell<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> LoopMatrix {
    let mut m: LoopMatrix = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i.min(n - 1) {
            m[(i, j)] = random_series(rng, lo, hi);
        }
        if i + 1 < n {
            m[(i, i + 1)] = LaurentSeries::one().neg();
        }
    }
    // det is affine in the (n,1) entry with slope 1 (the minor is the
    // product of the −1 superdiagonal, signed by (−1)^(n+1)).
    m[(n - 1, 0)] = LaurentSeries::zero();
    let rest = det(&m);
    m[(n - 1, 0)] = LaurentSeries::one().sub(&rest);
    m
}
