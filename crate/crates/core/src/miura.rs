//! The q-Miura transform for SL(n).
//!
//! A diagonal loop element `x` is sent to `i(x) = x·f·s(x⁻¹)`, an upper
//! bidiagonal matrix whose diagonal gives the free-field coordinates
//! `Λ_i(q^{i−1}z)`. Gauge fixing `i(x)` yields the canonical operator, whose
//! coefficients are elementary q-symmetric functions of the `Λ`'s.

use rand::Rng;
use serde_json::Value;

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::loop_sl::{constant_loop, coxeter_rep, random_series, CanonicalOperator, LoopMatrix};
use crate::matrix::Matrix;
use crate::ratfunc::CycloRat;
use crate::ring::{Field, Rational, Ring};
use crate::rmatrix::ModeOperator;
use crate::roots::CoxeterData;
use crate::series::LaurentSeries;

/// The principal element `f`: 1 on the diagonal, −1 on the superdiagonal.
pub fn principal_f(n: usize) -> Matrix<Rational> {
    assert!(n >= 2, "principal_f needs n >= 2");
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            Rational::one()
        } else if j == i + 1 {
            Rational::one().neg()
        } else {
            Rational::zero()
        }
    })
}

/// The longest Weyl group element of SL(n) as a signed antidiagonal matrix.
pub fn longest_element(n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |i, j| {
        if i + j + 1 == n {
            if i % 2 == 0 {
                Rational::one()
            } else {
                Rational::one().neg()
            }
        } else {
            Rational::zero()
        }
    })
}

/// Free-field coordinates `Λ_1, ..., Λ_n` with `Π Λ_i(q^{i−1}z) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MiuraData {
    lambda: Vec<LaurentSeries>,
}

fn is_one(x: &LaurentSeries) -> bool {
    x.agrees_on_common_window(&LaurentSeries::one())
}

impl MiuraData {
    pub fn new(lambda: Vec<LaurentSeries>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::Shape(format!("need at least 2 coordinates, got {}", lambda.len())));
        }
        for (i, l) in lambda.iter().enumerate() {
            if l.valuation().is_none() {
                return Err(Error::Invalid(format!("Λ_{} is not invertible on its window", i + 1)));
            }
        }
        let md = MiuraData { lambda };
        if !is_one(&md.determinant()) {
            return Err(Error::Invalid("Π Λ_i(q^(i-1) z) is not 1".into()));
        }
        Ok(md)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[LaurentSeries] {
        &self.lambda
    }

    /// `Λ_i(q^{i−1}z)` for 1-based `i`.
    pub fn shifted(&self, i: usize) -> LaurentSeries {
        self.lambda[i - 1].tau(i as i64 - 1)
    }

    fn determinant(&self) -> LaurentSeries {
        (1..=self.n()).fold(LaurentSeries::one(), |acc, i| acc.mul(&self.shifted(i)))
    }

    /// The bidiagonal matrix `Λ(z)`.
    pub fn matrix(&self) -> LoopMatrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.shifted(i + 1)
            } else if j == i + 1 {
                LaurentSeries::one().neg()
            } else {
                LaurentSeries::zero()
            }
        })
    }

    /// Random data: `Λ_1, ..., Λ_{n−1}` are Laurent polynomials on
    /// `lo..=hi` with a nonzero lowest coefficient, and `Λ_n` is the inverse
    /// of the remaining product, truncated to `width` modes past its lowest.
    pub fn random<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64, width: i64) -> Self {
        let mut lambda = Vec::with_capacity(n);
        for _ in 0..n - 1 {
            let mut s = random_series(rng, lo, hi);
            if s.coeff(lo).is_some_and(|c| c.is_zero()) {
                let lead = LaurentSeries::monomial(CycloRat::from_i64(if rng.gen() { 1 } else { -1 }), lo);
                s = s.add(&lead);
            }
            lambda.push(s);
        }
        let prod = lambda
            .iter()
            .enumerate()
            .fold(LaurentSeries::one(), |acc, (i, l)| acc.mul(&l.tau(i as i64)));
        let v = prod.valuation().expect("nonzero product");
        let last = prod.truncate(v + width).invert().expect("nonzero leading term");
        lambda.push(last.tau(-(n as i64 - 1)));
        MiuraData::new(lambda).expect("constructed to satisfy the determinant constraint")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.lambda.iter().map(|l| l.to_json()).collect())
    }

    /// Accepts an array of series or an object with a `lambda` array.
    pub fn from_json(v: &Value, conductor: u32) -> Result<Self> {
        let arr = v
            .as_array()
            .or_else(|| v.get("lambda").and_then(Value::as_array))
            .ok_or_else(|| Error::Parse("expected an array of series for Λ".into()))?;
        let lambda = arr
            .iter()
            .map(|x| LaurentSeries::from_json(x, conductor))
            .collect::<Result<Vec<_>>>()?;
        MiuraData::new(lambda)
    }
}

/// `i(x) = x·f·s(x⁻¹)` for a diagonal loop element `x`.
pub fn cartan_embedding(x: &[LaurentSeries]) -> Result<LoopMatrix> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Shape(format!("need a diagonal of length at least 2, got {}", n)));
    }
    let inv = x
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            xi.invert()
                .map_err(|_| Error::Invalid(format!("x_{} is not a unit", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let det = x.iter().fold(LaurentSeries::one(), |acc, xi| acc.mul(xi));
    if !is_one(&det) {
        return Err(Error::Invalid("det x is not 1".into()));
    }
    let s_inv = coxeter_rep(n);
    let s = s_inv.inverse().expect("permutation matrix");
    // s(y) = s·y·s⁻¹
    let sy = constant_loop(&s)
        .mul(&Matrix::diagonal(&inv))
        .mul(&constant_loop(&s_inv));
    Ok(Matrix::diagonal(x).mul(&constant_loop(&principal_f(n))).mul(&sy))
}

/// Read the `Λ`'s off `i(x)`.
pub fn miura_embed(x: &[LaurentSeries]) -> Result<MiuraData> {
    let m = cartan_embedding(x)?;
    let lambda = (0..x.len()).map(|i| m[(i, i)].tau(-(i as i64))).collect();
    MiuraData::new(lambda)
}

/// `s_p(z) = Σ_{j_1<...<j_p} Λ_{j_1}(z) Λ_{j_2}(qz) ⋯ Λ_{j_p}(q^{p−1}z)` for
/// `p = 0..=n`.
pub fn elementary_functions(md: &MiuraData) -> Vec<LaurentSeries> {
    let n = md.n();
    // e[p] over the first j coordinates; the factor in position p is τ^{p−1}Λ_j.
    let mut e = vec![LaurentSeries::zero(); n + 1];
    e[0] = LaurentSeries::one();
    for j in 1..=n {
        for p in (1..=j).rev() {
            let term = e[p - 1].mul(&md.lambda[j - 1].tau(p as i64 - 1));
            e[p] = e[p].add(&term);
        }
    }
    e
}

/// How the canonical coefficients are read off the elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiuraIndexing {
    /// `u_p(z) = s_{n−p}(q^p z)`, the bottom row of the gauge-fixed `Λ(z)`.
    Companion,
    /// `u_p(z) = (−1)^{n−p−1} s_{n−p}(q^{n−p} z)`; agrees with the above only for n = 2.
    Printed,
}

/// The canonical operator of `Λ(z)` from the elementary functions.
pub fn miura_transform(md: &MiuraData) -> CanonicalOperator {
    miura_transform_with(md, MiuraIndexing::Companion)
}

pub fn miura_transform_with(md: &MiuraData, indexing: MiuraIndexing) -> CanonicalOperator {
    let n = md.n();
    let s = elementary_functions(md);
    let u = (1..n)
        .map(|p| match indexing {
            MiuraIndexing::Companion => s[n - p].tau(p as i64),
            MiuraIndexing::Printed => {
                let v = s[n - p].tau((n - p) as i64);
                if (n - p - 1) % 2 == 1 {
                    v.neg()
                } else {
                    v
                }
            }
        })
        .collect();
    CanonicalOperator::new(u)
}

/// Poisson operators on the Cartan loop algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanPoissonOp {
    /// `P_H = R_s(τ − 1)/((1 − R_s)(1 − R_s τ))`.
    pub p_h: ModeOperator,
    /// `P̃_H = (1 − τ)(1 − R_s)/(1 − R_s τ)`.
    pub p_tilde: ModeOperator,
}

pub fn cartan_poisson_ops(cd: &CoxeterData) -> CartanPoissonOp {
    let l = cd.rank();
    let id = ModeOperator::identity(l);
    let r = ModeOperator::constant(&cd.r_s);
    let t = CycloRat::q();
    let one_minus_r = id.sub(&r);
    let one_minus_rt = id.sub(&r.scale(&t));
    let t_minus_one = t.sub(&CycloRat::one());
    let p_h = r
        .scale(&t_minus_one)
        .mul(&one_minus_r.mul(&one_minus_rt).inverse().expect("1 − R_s is invertible"));
    let p_tilde = one_minus_r
        .scale(&t_minus_one.neg())
        .mul(&one_minus_rt.inverse().expect("1 − tR_s is invertible"));
    CartanPoissonOp { p_h, p_tilde }
}

/// `(1 − R_s) P_H (1 − R_s)* − P̃_H` as a function of `t`.
pub fn pushforward_residual(cd: &CoxeterData, ops: &CartanPoissonOp) -> ModeOperator {
    let l = cd.rank();
    let dp = ModeOperator::identity(l).sub(&ModeOperator::constant(&cd.r_s));
    dp.mul(&ops.p_h).mul(&dp.adjoint(&cd.form())).sub(&ops.p_tilde)
}

/// Check the pushforward identity at every mode in `lo..=hi`; on failure
/// returns the first offending mode.
pub fn verify_pushforward(cd: &CoxeterData, lo: i64, hi: i64) -> std::result::Result<(), i64> {
    let res = pushforward_residual(cd, &cartan_poisson_ops(cd));
    for m in lo..=hi {
        match res.at(m) {
            Ok(x) if x.is_zero() => {}
            _ => return Err(m),
        }
    }
    Ok(())
}

fn t_pow(k: i64) -> CycloRat {
    CycloRat::q_pow(k)
}

fn one_minus(x: &CycloRat) -> CycloRat {
    CycloRat::one().sub(x)
}

fn check_indices(n: usize, p: usize, s: usize) -> Result<()> {
    if n < 2 || p == 0 || s == 0 || p > n || s > n {
        return Err(Error::Invalid(format!(
            "indices p={}, s={} must lie in 1..={} with n >= 2",
            p, s, n
        )));
    }
    Ok(())
}

/// The bracket coefficient `c_{ps}` as a function of `t = q^m`.
pub fn fr_bracket_symbol(n: usize, p: usize, s: usize) -> Result<CycloRat> {
    check_indices(n, p, s)?;
    let t = CycloRat::q();
    let den = one_minus(&t_pow(n as i64));
    let c = if p == s {
        one_minus(&t).mul(&one_minus(&t_pow(n as i64 - 1))).div(&den)
    } else if s > p {
        one_minus(&t).mul(&one_minus(&t_pow(-1))).div(&den)
    } else {
        // c_{ps}(m) = −c_{sp}(−m)
        return Ok(fr_bracket_symbol(n, s, p)?.subs_power(-1).unwrap().neg());
    };
    Ok(c.expect("1 − t^n is nonzero"))
}

/// `c_{ps}(m)`; mode 0 is the value of the reduced function at `t = 1`.
pub fn fr_bracket_coeff(n: usize, p: usize, s: usize, m: i64) -> Result<CycloRat> {
    fr_bracket_symbol(n, p, s)?
        .subs_power(m)
        .ok_or_else(|| Error::Singular(format!("bracket coefficient has a pole at mode {}", m)))
}

/// The bracket coefficient from the eigenvector expansion of `P̃_H`:
/// `(1/n) Σ_k (1 − t)(1 − ω^k)/(1 − tω^k) · t^{s−p} ω^{k(s−p)}`, summed in
/// `Q(ω)(t)` with `ω = e^{2πi/n}`.
pub fn bra_symbol(n: usize, p: usize, s: usize) -> Result<CycloRat> {
    check_indices(n, p, s)?;
    let d = s as i64 - p as i64;
    let t = CycloRat::q();
    let sum = omega_sum(n, d);
    Ok(one_minus(&t).mul(&t_pow(d)).mul(&sum))
}

pub fn bra_coeff(n: usize, p: usize, s: usize, m: i64) -> Result<CycloRat> {
    bra_symbol(n, p, s)?
        .subs_power(m)
        .ok_or_else(|| Error::Singular(format!("bracket coefficient has a pole at mode {}", m)))
}

/// `(1/n) Σ_{k=1}^{n−1} (1 − ω^k)/(1 − tω^k) · ω^{kd}`.
pub fn omega_sum(n: usize, d: i64) -> CycloRat {
    let h = n as u32;
    let t = CycloRat::q();
    let mut acc = CycloRat::zero();
    for k in 1..n as i64 {
        let w = CycloRat::from_cyclo(Cyclo::root_of_unity(h, k));
        let wd = CycloRat::from_cyclo(Cyclo::root_of_unity(h, k * d));
        let term = one_minus(&w).div(&one_minus(&t.mul(&w))).unwrap().mul(&wd);
        acc = acc.add(&term);
    }
    acc.div(&CycloRat::from_i64(n as i64)).unwrap()
}

/// Which closed form the ω-sum is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractionForm {
    /// `d = 0`: `(1 − t^{n−1})/(1 − t^n)`; `d > 0`: `t^{n−d}(1 − t⁻¹)/(1 − t^n)`.
    Corrected,
    /// `d > 0`: `t^{−d}(1 − t⁻¹)/(1 − t^n)`; `d = 0` as in the corrected form.
    Printed,
}

/// Closed form of [`omega_sum`] as a function of `t`.
pub fn fraction_closed_form(n: usize, d: i64, form: FractionForm) -> CycloRat {
    let n = n as i64;
    let den = one_minus(&t_pow(n));
    let num = if d == 0 {
        one_minus(&t_pow(n - 1))
    } else {
        let e = match form {
            FractionForm::Corrected => n - d,
            FractionForm::Printed => -d,
        };
        t_pow(e).mul(&one_minus(&t_pow(-1)))
    };
    num.div(&den).unwrap()
}

/// Both sides of the collapsing identity at one mode.
#[derive(Clone, Debug)]
pub struct FractionReport {
    pub lhs: CycloRat,
    pub rhs: CycloRat,
}

impl FractionReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn residual(&self) -> CycloRat {
        self.lhs.sub(&self.rhs)
    }
}

/// Compare the ω-sum with exponent `sum_d` against the closed form for `d`
/// at mode `m`. Normally `sum_d = d`; a different value is a negative control.
pub fn fraction_report(n: usize, m: i64, d: i64, sum_d: i64, form: FractionForm) -> Result<FractionReport> {
    if n < 2 {
        return Err(Error::Invalid("n must be at least 2".into()));
    }
    if m == 0 {
        return Err(Error::Invalid("the identity is only asserted for m != 0".into()));
    }
    if d < 0 || d >= n as i64 {
        return Err(Error::Invalid(format!("d = {} must lie in 0..={}", d, n - 1)));
    }
    let at = |x: CycloRat| {
        x.subs_power(m)
            .ok_or_else(|| Error::Singular(format!("pole at mode {}", m)))
    };
    Ok(FractionReport {
        lhs: at(omega_sum(n, sum_d))?,
        rhs: at(fraction_closed_form(n, d, form))?,
    })
}

/// The collapsing identity with the corrected closed form.
pub fn verify_fraction_identity(n: usize, m: i64, d: i64) -> Result<FractionReport> {
    fraction_report(n, m, d, d, FractionForm::Corrected)
}

/// Log coordinates (simple-root basis) on the Cartan loop algebra.
///
/// Solves `τX − R_s X = D` mode by mode, i.e. `(q^m − R_s) X_m = D_m`. With
/// `twisted = false` the untwisted system `(1 − R_s) X_m = D_m` is solved.
pub fn twisted_cartan_solve(cd: &CoxeterData, d: &[LaurentSeries], twisted: bool) -> Result<Vec<LaurentSeries>> {
    let l = cd.rank();
    if d.len() != l {
        return Err(Error::Shape(format!("expected {} log coordinates, got {}", l, d.len())));
    }
    let (lo, hi, exact) = common_window(d);
    let r = cd.r_s.map(|x| CycloRat::from_rational(x.clone()));
    let mut cols: Vec<Vec<CycloRat>> = vec![Vec::new(); l];
    for m in lo..=hi {
        let qm = if twisted { CycloRat::q_pow(m) } else { CycloRat::one() };
        let a = Matrix::identity(l).scale(&qm).sub(&r);
        let rhs: Vec<CycloRat> = d.iter().map(|x| x.coeff(m).unwrap()).collect();
        let x = a
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("twisted Cartan system is singular at mode {}", m)))?;
        for (c, v) in cols.iter_mut().zip(x) {
            c.push(v);
        }
    }
    Ok(cols
        .into_iter()
        .map(|c| {
            if exact {
                LaurentSeries::exact(lo, c)
            } else {
                LaurentSeries::truncated(lo, c)
            }
        })
        .collect())
}

/// `τX − R_s X` (or `X − R_s X` when untwisted).
pub fn twisted_cartan_apply(cd: &CoxeterData, x: &[LaurentSeries], twisted: bool) -> Vec<LaurentSeries> {
    let l = cd.rank();
    (0..l)
        .map(|i| {
            let base = if twisted { x[i].tau(1) } else { x[i].clone() };
            (0..l).fold(base, |acc, j| {
                let c = &cd.r_s[(i, j)];
                if c.is_zero() {
                    acc
                } else {
                    acc.sub(&x[j].map_coeffs(|v| v.mul(&CycloRat::from_rational(c.clone()))))
                }
            })
        })
        .collect()
}

fn common_window(d: &[LaurentSeries]) -> (i64, i64, bool) {
    let lo = d.iter().map(|x| x.lo()).min().unwrap_or(0);
    let exact = d.iter().all(|x| x.is_exact());
    let hi = if exact {
        d.iter().map(|x| x.hi()).max().unwrap_or(-1)
    } else {
        d.iter().filter_map(|x| x.precision()).min().unwrap()
    };
    (lo, hi.max(lo - 1), exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::gauge_fix_elimination;
    use crate::loop_sl::{is_in_bbar, is_in_mcell, is_in_n};
    use crate::roots::RootSystem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(s: &str) -> CycloRat {
        s.parse().unwrap()
    }

    #[test]
    fn principal_f_shape() {
        let f = principal_f(2);
        assert_eq!(f, Matrix::from_rows(vec![vec![Rational::one(), Rational::from_i64(-1)], vec![Rational::zero(), Rational::one()]]));
        for n in 2..6 {
            let fl = constant_loop(&principal_f(n));
            assert!(is_in_mcell(&fl) && is_in_bbar(&fl));
            // w0⁻¹ f w0 is a product of simple root elements of N
            let w = longest_element(n);
            let x = constant_loop(&w.inverse().unwrap().mul(&principal_f(n)).mul(&w));
            assert!(is_in_n(&x));
        }
    }

    #[test]
    fn embed_identity_and_square() {
        let id = vec![LaurentSeries::one(); 3];
        let m = cartan_embedding(&id).unwrap();
        assert_eq!(m, constant_loop(&principal_f(3)));
        let a = LaurentSeries::exact(0, vec![r("2"), r("1")]);
        let ai = a.invert().unwrap();
        let md = miura_embed(&[a.clone(), ai.clone()]).unwrap();
        assert!(md.lambda()[0].agrees_on_common_window(&a.mul(&a)));
        assert!(md.shifted(2).agrees_on_common_window(&ai.mul(&ai)));
        assert!(is_in_mcell(&md.matrix()));
    }

    #[test]
    fn embed_rejects_non_units() {
        let z = LaurentSeries::zero();
        assert!(cartan_embedding(&[z.clone(), z]).is_err());
        let two = LaurentSeries::from_i64(2);
        assert!(cartan_embedding(&[two.clone(), two]).is_err());
    }

    #[test]
    fn top_elementary_function_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let md = MiuraData::random(&mut rng, 3, -2, 2, 8);
        let s = elementary_functions(&md);
        assert!(is_one(&s[3]));
    }

    #[test]
    fn miura_matches_gauge_fix_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let md = MiuraData::random(&mut rng, 2, -2, 2, 8);
        let u = miura_transform(&md);
        let expected = md.lambda()[0].tau(1).add(&md.lambda()[1].tau(1));
        assert_eq!(u.u[0], expected);
        let g = gauge_fix_elimination(&md.matrix()).unwrap();
        assert!(g.canonical.u[0].agrees_on_common_window(&u.u[0]));
    }

    #[test]
    fn miura_matches_gauge_fix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            for _ in 0..3 {
                let md = MiuraData::random(&mut rng, n, -2, 2, 8);
                let u = miura_transform(&md);
                let g = gauge_fix_elimination(&md.matrix()).unwrap();
                for (a, b) in u.u.iter().zip(&g.canonical.u) {
                    assert!(a.agrees_on_common_window(b));
                    assert_eq!(a.precision(), b.precision());
                }
                let printed = miura_transform_with(&md, MiuraIndexing::Printed);
                let same = printed.u.iter().zip(&g.canonical.u).all(|(a, b)| a.agrees_on_common_window(b));
                assert_eq!(same, n == 2);
            }
        }
    }

    #[test]
    fn n3_symbolic_bottom_row() {
        // u_1 = Λ1(qz)Λ2(q²z) + Λ1(qz)Λ3(q²z) + Λ2(qz)Λ3(q²z) by hand elimination
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let md = MiuraData::random(&mut rng, 3, -1, 1, 6);
        let l = |i: usize, k: i64| md.lambda()[i - 1].tau(k);
        let u1 = l(1, 1).mul(&l(2, 2)).add(&l(1, 1).mul(&l(3, 2))).add(&l(2, 1).mul(&l(3, 2)));
        assert_eq!(miura_transform(&md).u[0], u1);
    }

    #[test]
    fn pushforward_and_a1() {
        for label in ["A1", "A3", "B2", "G2"] {
            let cd = CoxeterData::new(&RootSystem::from_label(label).unwrap());
            assert_eq!(verify_pushforward(&cd, -5, 5), Ok(()));
        }
        let cd = CoxeterData::new(&RootSystem::from_label("A1").unwrap());
        let ops = cartan_poisson_ops(&cd);
        assert_eq!(ops.p_tilde.symbol()[(0, 0)], r("(2 - 2*q)/(1 + q)"));
        assert!(ops.p_tilde.at(0).unwrap().is_zero());
    }

    #[test]
    fn fr_examples() {
        for m in [-3, 1, 2, 5] {
            let expected = r("(1 - q)/(1 + q)").subs_power(m).unwrap();
            assert_eq!(fr_bracket_coeff(2, 1, 1, m).unwrap(), expected);
        }
        assert_eq!(fr_bracket_coeff(3, 1, 2, 1).unwrap(), r("(1 - q)*(1 - q^-1)/(1 - q^3)"));
        for n in 2..5 {
            for p in 1..=n {
                assert!(fr_bracket_coeff(n, p, p, 0).unwrap().is_zero());
                for m in 1..4 {
                    let a = fr_bracket_coeff(n, p, p, m).unwrap();
                    assert_eq!(a.add(&fr_bracket_coeff(n, p, p, -m).unwrap()), CycloRat::zero());
                }
            }
        }
    }

    #[test]
    fn bra_diagonal_and_transpose() {
        for n in 2..=4 {
            for p in 1..=n {
                for s in 1..=n {
                    for m in [-2, 1, 3] {
                        let fr = fr_bracket_coeff(n, p, s, m).unwrap();
                        assert_eq!(fr, bra_coeff(n, s, p, m).unwrap());
                        if p == s {
                            assert_eq!(fr, bra_coeff(n, p, s, m).unwrap());
                        }
                    }
                }
            }
        }
        // off the diagonal the expansion carries an extra t^n
        let fr = fr_bracket_symbol(3, 1, 2).unwrap();
        assert_eq!(bra_symbol(3, 1, 2).unwrap(), fr.mul(&CycloRat::q_pow(3)));
    }

    #[test]
    fn fraction_identity() {
        let rep = verify_fraction_identity(2, 1, 0).unwrap();
        assert_eq!(rep.lhs, r("1/(1 + q)"));
        assert!(rep.holds());
        for n in 2..=5 {
            for d in 0..n as i64 {
                for m in [-3, -1, 1, 2] {
                    assert!(verify_fraction_identity(n, m, d).unwrap().holds());
                }
            }
        }
        let printed = fraction_report(2, 1, 1, 1, FractionForm::Printed).unwrap();
        assert!(!printed.holds());
        assert_eq!(printed.lhs, r("-1/(1 + q)"));
        let control = fraction_report(4, 1, 1, 2, FractionForm::Corrected).unwrap();
        assert!(!control.holds());
        assert!(verify_fraction_identity(3, 0, 0).is_err());
    }

    #[test]
    fn twisted_solve_round_trip() {
        let cd = CoxeterData::new(&RootSystem::from_label("A1").unwrap());
        let d = vec![LaurentSeries::exact(-1, vec![r("1"), r("0"), r("3")])];
        let x = twisted_cartan_solve(&cd, &d, true).unwrap();
        // (q^m + 1) ξ_m = δ_m
        assert_eq!(x[0].coeff(1).unwrap(), r("3/(1 + q)"));
        assert_eq!(twisted_cartan_apply(&cd, &x, true), d);
        let cd = CoxeterData::new(&RootSystem::from_label("B2").unwrap());
        let d = vec![
            LaurentSeries::exact(0, vec![r("1"), r("2")]),
            LaurentSeries::exact(-2, vec![r("5")]),
        ];
        for twisted in [true, false] {
            let x = twisted_cartan_solve(&cd, &d, twisted).unwrap();
            let back = twisted_cartan_apply(&cd, &x, twisted);
            for (a, b) in back.iter().zip(&d) {
                assert!(a.agrees_on_common_window(b));
            }
        }
        let zero = vec![LaurentSeries::zero(), LaurentSeries::zero()];
        assert!(twisted_cartan_solve(&cd, &zero, true).unwrap().iter().all(|x| x.is_zero()));
    }
}
