//! Coxeter-twisted classical r-matrices as mode operators.
//!
//! A [`ModeOperator`] is a matrix of rational functions in a variable `t`;
//! its action on the Fourier mode `m` is obtained by substituting `t = q^m`.
//! `θ = R_s τ` becomes `t R_s`, and every kernel of the construction is a
//! closed-form matrix function of `t`.

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ratfunc::CycloRat;
use crate::ring::{Field, Rational, Ring};
use crate::roots::CoxeterData;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    mat: Matrix<CycloRat>,
}

fn lift(m: &Matrix<Rational>) -> Matrix<CycloRat> {
    m.map(|x| CycloRat::from_rational(x.clone()))
}

fn lift_cyclo(m: &Matrix<Cyclo>) -> Matrix<CycloRat> {
    m.map(|x| CycloRat::from_cyclo(x.clone()))
}

impl ModeOperator {
    pub fn new(mat: Matrix<CycloRat>) -> Self {
        ModeOperator { mat }
    }

    /// A `t`-independent operator.
    pub fn constant(m: &Matrix<Rational>) -> Self {
        Self::new(lift(m))
    }

    pub fn identity(l: usize) -> Self {
        Self::new(Matrix::identity(l))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// The matrix as a function of `t`.
    pub fn symbol(&self) -> &Matrix<CycloRat> {
        &self.mat
    }

    /// The matrix acting on mode `m`, a function of `q`.
    pub fn at(&self, m: i64) -> Result<Matrix<CycloRat>> {
        let mut out = Matrix::zeros(self.mat.rows(), self.mat.cols());
        for i in 0..self.mat.rows() {
            for j in 0..self.mat.cols() {
                out[(i, j)] = self.mat[(i, j)]
                    .subs_power(m)
                    .ok_or_else(|| Error::Singular(format!("pole at mode {}", m)))?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.mat.add(&o.mat))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.mat.sub(&o.mat))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.mat.mul(&o.mat))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.mat.neg())
    }

    pub fn scale(&self, c: &CycloRat) -> Self {
        Self::new(self.mat.scale(c))
    }

    /// Inverse over the field of rational functions in `t`.
    pub fn inverse(&self) -> Result<Self> {
        self.mat
            .inverse()
            .map(Self::new)
            .ok_or_else(|| Error::Singular("operator is not invertible".into()))
    }

    /// Substitute `t → 1/t`.
    pub fn reflect(&self) -> Self {
        Self::new(self.mat.map(|x| x.subs_power(-1).unwrap()))
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.mat.transpose())
    }

    /// Adjoint for `Σ_m ⟨X_m, Y_{-m}⟩`: `A*(t) = B⁻¹ A(1/t)ᵀ B`.
    pub fn adjoint(&self, form: &Matrix<Rational>) -> Self {
        let b = lift(form);
        let bi = lift(&form.inverse().expect("nondegenerate form"));
        Self::new(bi.mul(&self.reflect().mat.transpose()).mul(&b))
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }
}

/// `t`, the symbol of `τ` on mode `m`.
fn t() -> CycloRat {
    CycloRat::q()
}

/// `θ = t R_s`.
pub fn theta(cd: &CoxeterData) -> ModeOperator {
    ModeOperator::constant(&cd.r_s).scale(&t())
}

/// The twisted family `θ_j = t R_s^j` used as a negative control.
pub fn theta_power(cd: &CoxeterData, j: u64) -> ModeOperator {
    ModeOperator::constant(&cd.r_s.pow(j)).scale(&t())
}

/// Cayley transform `(I + θ)(I − θ)⁻¹`.
pub fn cayley(theta: &ModeOperator) -> Result<ModeOperator> {
    let id = ModeOperator::identity(theta.dim());
    Ok(id.add(theta).mul(&id.sub(theta).inverse()?))
}

pub fn cayley_r0(cd: &CoxeterData) -> ModeOperator {
    cayley(&theta(cd)).expect("I - tR_s is invertible")
}

/// `ψ_p = (1 + ζ^k t)/(1 − ζ^k t)` for the exponent `k`.
pub fn psi_coeff(h: usize, k: usize) -> CycloRat {
    let zt = t().mul(&CycloRat::from_cyclo(Cyclo::root_of_unity(h as u32, k as i64)));
    CycloRat::one().add(&zt).div(&CycloRat::one().sub(&zt)).unwrap()
}

/// `r₀ = Σ_p ψ_p H_p ⟨·, H_σp⟩`, from the eigenbasis of the Coxeter element.
pub fn r0_spectral(cd: &CoxeterData) -> ModeOperator {
    let l = cd.rank();
    let b = crate::roots::to_cyclo(&cd.form());
    let mut acc: Matrix<CycloRat> = Matrix::zeros(l, l);
    for e in &cd.eigen {
        let psi = psi_coeff(cd.h, e.exponent);
        // ⟨X, dual⟩ = dualᵀ B X
        let row = b.transpose().mul_vec(&e.dual);
        let proj = Matrix::from_fn(l, l, |i, j| e.vector[i].mul(&row[j]));
        acc = acc.add(&lift_cyclo(&proj).scale(&psi));
    }
    ModeOperator::new(acc)
}

/// Sign convention of the q-difference equation for `ψ_p`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QdiffForm {
    /// `ψ(z) − ζ^k ψ(qz) = δ(z) + ζ^k δ(qz)`, satisfied by the kernel.
    Kernel,
    /// `ψ(z) + ζ^k ψ(qz) = δ(z) − ζ^k δ(qz)`, the opposite signs.
    Flipped,
}

/// Check the q-difference equation mode by mode on `lo..=hi`; at mode `m`
/// it reads `(1 ∓ ζ^k q^m) ψ(m) = 1 ± ζ^k q^m`. Returns the first failing mode.
pub fn check_qdiff(
    psi: impl Fn(i64) -> Option<CycloRat>,
    zeta_k: &Cyclo,
    form: QdiffForm,
    lo: i64,
    hi: i64,
) -> std::result::Result<(), i64> {
    let z = CycloRat::from_cyclo(zeta_k.clone());
    let z = if form == QdiffForm::Kernel { z.neg() } else { z };
    for m in lo..=hi {
        let zq = z.mul(&CycloRat::q_pow(m));
        let ok = psi(m).is_some_and(|v| CycloRat::one().add(&zq).mul(&v) == CycloRat::one().sub(&zq));
        if !ok {
            return Err(m);
        }
    }
    Ok(())
}

/// Residual of `r₀ + I + t⁻¹R_s⁻¹ − t⁻¹R_s⁻¹ r₀`, which vanishes exactly when
/// `r₀` is the Cayley transform of `t R_s`.
pub fn tangency_residual(cd: &CoxeterData, r0: &ModeOperator) -> ModeOperator {
    let l = cd.rank();
    let rinv = ModeOperator::constant(&cd.r_s.inverse().unwrap()).scale(&CycloRat::q_pow(-1));
    r0.add(&ModeOperator::identity(l))
        .add(&rinv)
        .sub(&rinv.mul(r0))
}

/// Check the tangency identity mode by mode for `θ_j = t R_s^j`. A singular
/// Cayley transform counts as a failure.
pub fn verify_tangency(cd: &CoxeterData, j: u64, lo: i64, hi: i64) -> std::result::Result<(), i64> {
    let th = theta_power(cd, j);
    let Ok(r0) = cayley(&th) else {
        return Err(0);
    };
    let res = tangency_residual(cd, &r0);
    for m in lo..=hi {
        match res.at(m) {
            Ok(v) if v.is_zero() => {}
            _ => return Err(m),
        }
    }
    Ok(())
}

/// Block-diagonal operator on the loop algebra `n₊ ⊕ h ⊕ n₋`. The root
/// blocks act on coordinates in bases of `n₊` and `n₋` that are dual under
/// the invariant form.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    pub pos: ModeOperator,
    pub cartan: ModeOperator,
    pub neg: ModeOperator,
}

impl BlockOperator {
    pub fn identity(npos: usize, l: usize) -> Self {
        BlockOperator {
            pos: ModeOperator::identity(npos),
            cartan: ModeOperator::identity(l),
            neg: ModeOperator::identity(npos),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        BlockOperator {
            pos: self.pos.sub(&o.pos),
            cartan: self.cartan.sub(&o.cartan),
            neg: self.neg.sub(&o.neg),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        BlockOperator {
            pos: self.pos.add(&o.pos),
            cartan: self.cartan.add(&o.cartan),
            neg: self.neg.add(&o.neg),
        }
    }

    pub fn scale(&self, c: &CycloRat) -> Self {
        BlockOperator {
            pos: self.pos.scale(c),
            cartan: self.cartan.scale(c),
            neg: self.neg.scale(c),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&CycloRat::from_i64(-1))
    }

    /// Adjoint under the residue pairing; the root blocks swap.
    pub fn adjoint(&self, form: &Matrix<Rational>) -> Self {
        BlockOperator {
            pos: self.neg.reflect().transpose(),
            cartan: self.cartan.adjoint(form),
            neg: self.pos.reflect().transpose(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pos.is_zero() && self.cartan.is_zero() && self.neg.is_zero()
    }
}

/// `r₊ = P₊ + (I − θ)⁻¹ P₀`.
pub fn r_plus(cd: &CoxeterData) -> BlockOperator {
    let npos = cd.root_system.positive_roots().len();
    let l = cd.rank();
    let id = ModeOperator::identity(l);
    BlockOperator {
        pos: ModeOperator::identity(npos),
        cartan: id.sub(&theta(cd)).inverse().expect("I - θ invertible"),
        neg: ModeOperator::new(Matrix::zeros(npos, npos)),
    }
}

/// `r₋ = −r₊*`.
pub fn r_minus(cd: &CoxeterData) -> BlockOperator {
    r_plus(cd).adjoint(&cd.form()).neg()
}

/// `r = ½(r₊ + r₋)`.
pub fn r_skew(cd: &CoxeterData) -> BlockOperator {
    r_plus(cd)
        .add(&r_minus(cd))
        .scale(&CycloRat::from_rational(crate::ring::rat(1, 2)))
}

/// `½(P₊ − P₋ + r₀ P₀)`.
pub fn r_skew_expected(cd: &CoxeterData) -> BlockOperator {
    let npos = cd.root_system.positive_roots().len();
    let half = CycloRat::from_rational(crate::ring::rat(1, 2));
    BlockOperator {
        pos: ModeOperator::identity(npos).scale(&half),
        cartan: cayley_r0(cd).scale(&half),
        neg: ModeOperator::identity(npos).scale(&half).neg(),
    }
}

/// Every block of a block operator at mode `m` vanishes.
pub fn block_vanishes_at(b: &BlockOperator, m: i64) -> Result<bool> {
    Ok(b.pos.at(m)?.is_zero() && b.cartan.at(m)?.is_zero() && b.neg.at(m)?.is_zero())
}
