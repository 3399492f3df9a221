//! Elements of cyclotomic fields `Q(ζ_H)`.
//!
//! An element is a polynomial in a fixed primitive `H`-th root of unity `w`
//! of degree below `φ(H)`, reduced modulo the `H`-th cyclotomic polynomial.
//! Rational values are always stored with conductor 1; operations on
//! elements of different conductors embed both into `Q(ζ_lcm)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;

use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::ring::{fmt_rational, int, Field, Rational, Ring};

#[derive(Clone, Debug)]
pub struct Cyclo {
    conductor: u32,
    coeffs: Vec<Rational>,
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u32, Poly<Rational>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Poly<Rational>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The `n`-th cyclotomic polynomial, computed from `x^n - 1 = Π_{d|n} Φ_d`.
pub fn cyclotomic_polynomial(n: u32) -> Poly<Rational> {
    assert!(n >= 1);
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut p = Poly::monomial(int(1), n as usize).sub(&Poly::one());
    for d in 1..n {
        if n.is_multiple_of(d) {
            let (q, r) = p.div_rem(&cyclotomic_polynomial(d));
            debug_assert!(r.is_zero());
            p = q;
        }
    }
    cyclotomic_cache().lock().unwrap().insert(n, p.clone());
    p
}

/// Coefficients of `p mod Φ_H` on the basis `1, w, ..., w^(φ(H)-1)`.
fn reduce(conductor: u32, p: &Poly<Rational>) -> Vec<Rational> {
    let (_, r) = p.div_rem(&cyclotomic_polynomial(conductor));
    (0..euler_phi(conductor)).map(|i| r.coeff(i)).collect()
}

/// Euler's totient.
pub fn euler_phi(n: u32) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

impl Cyclo {
    pub fn from_rational(r: Rational) -> Self {
        Cyclo {
            conductor: 1,
            coeffs: vec![r],
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(int(v))
    }

    /// `ζ_H^k` for the fixed primitive root `ζ_H`.
    pub fn root_of_unity(conductor: u32, k: i64) -> Self {
        assert!(conductor >= 1);
        let e = k.rem_euclid(conductor as i64) as usize;
        Self::from_poly(conductor, Poly::monomial(int(1), e))
    }

    /// Reduce an arbitrary polynomial in `w` modulo `Φ_H`.
    pub fn from_poly(conductor: u32, p: Poly<Rational>) -> Self {
        Cyclo {
            conductor,
            coeffs: reduce(conductor, &p),
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.conductor != 1 && self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            self.coeffs.truncate(1);
            self.conductor = 1;
        }
        self
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.conductor == 1 {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn to_poly(&self) -> Poly<Rational> {
        Poly::from_coeffs(self.coeffs.clone())
    }

    /// Embed into `Q(ζ_target)` via `ζ_H = ζ_target^(target/H)`.
    pub fn embed(&self, target: u32) -> Self {
        assert!(
            target.is_multiple_of(self.conductor),
            "cannot embed conductor {} into {}",
            self.conductor,
            target
        );
        if self.conductor == target || self.conductor == 1 {
            return self.clone();
        }
        let k = (target / self.conductor) as usize;
        Self::from_poly(target, self.to_poly().compose_power(k))
    }

    fn common(a: &Self, b: &Self) -> (u32, Poly<Rational>, Poly<Rational>) {
        if a.conductor == b.conductor {
            return (a.conductor, a.to_poly(), b.to_poly());
        }
        if a.conductor == 1 {
            return (b.conductor, a.to_poly(), b.to_poly());
        }
        if b.conductor == 1 {
            return (a.conductor, a.to_poly(), b.to_poly());
        }
        let l = a.conductor.lcm(&b.conductor);
        (l, a.embed(l).to_poly(), b.embed(l).to_poly())
    }

    /// Matrix of multiplication by `self` on the power basis.
    fn mult_matrix(&self) -> Matrix<Rational> {
        let phi = self.coeffs.len();
        let mut m = Matrix::zeros(phi, phi);
        for j in 0..phi {
            let col = reduce(self.conductor, &self.to_poly().shift_up(j));
            for (i, c) in col.into_iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        m
    }

    /// Galois action `ζ ↦ ζ^k` (`gcd(k, H) = 1`).
    pub fn galois(&self, k: i64) -> Self {
        let h = self.conductor as i64;
        let e = k.rem_euclid(h) as usize;
        if self.conductor == 1 {
            return self.clone();
        }
        let mut acc = Poly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = acc.add(&Poly::monomial(c.clone(), (i * e) % self.conductor as usize));
        }
        Self::from_poly(self.conductor, acc)
    }

    /// Canonical text form in the symbol `w`, e.g. `1 - 2/3*w^2`.
    pub fn to_text(&self) -> String {
        let terms: Vec<(Rational, usize)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (c.clone(), i))
            .collect();
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (c, i)) in terms.iter().enumerate() {
            let neg = *c < int(0);
            let mag = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&monomial_text(&mag, "w", *i));
        }
        out
    }

    /// True when the value has exactly one nonzero power-basis term.
    pub fn is_single_term(&self) -> bool {
        self.coeffs.iter().filter(|c| !c.is_zero()).count() == 1
    }
}

/// `c*sym^e` with the conventions `1*` and `^1` omitted; `c` is non-negative.
pub(crate) fn monomial_text(c: &Rational, sym: &str, e: usize) -> String {
    match (e, c == &int(1)) {
        (0, _) => fmt_rational(c),
        (1, true) => sym.to_string(),
        (1, false) => format!("{}*{}", fmt_rational(c), sym),
        (_, true) => format!("{}^{}", sym, e),
        (_, false) => format!("{}*{}^{}", fmt_rational(c), sym, e),
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        self.sub(other).is_zero()
    }
}

impl Ring for Cyclo {
    fn zero() -> Self {
        Self::from_int(0)
    }
    fn one() -> Self {
        Self::from_int(1)
    }
    fn add(&self, o: &Self) -> Self {
        if self.conductor == 1 && o.conductor == 1 {
            return Self::from_rational(&self.coeffs[0] + &o.coeffs[0]);
        }
        let (h, a, b) = Self::common(self, o);
        Self::from_poly(h, a.add(&b))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.conductor == 1 && o.conductor == 1 {
            return Self::from_rational(&self.coeffs[0] * &o.coeffs[0]);
        }
        if o.conductor == 1 {
            return Cyclo {
                conductor: self.conductor,
                coeffs: self.coeffs.iter().map(|c| c * &o.coeffs[0]).collect(),
            }
            .normalized_zero();
        }
        if self.conductor == 1 {
            return o.mul(self);
        }
        let (h, a, b) = Self::common(self, o);
        Self::from_poly(h, a.mul(&b))
    }
    fn neg(&self) -> Self {
        Cyclo {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    fn from_i64(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl Cyclo {
    fn normalized_zero(self) -> Self {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            Cyclo::from_int(0)
        } else {
            self.normalized()
        }
    }
}

impl Field for Cyclo {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.as_rational() {
            return Some(Self::from_rational(r.inv()?));
        }
        let m = self.mult_matrix();
        let mut e0 = vec![int(0); self.coeffs.len()];
        e0[0] = int(1);
        let x = m.solve(&e0)?;
        Some(Cyclo {
            conductor: self.conductor,
            coeffs: x,
        }
        .normalized())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials_match_tables() {
        let c = |v: &[i64]| Poly::from_coeffs(v.iter().map(|&x| int(x)).collect());
        assert_eq!(cyclotomic_polynomial(1), c(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(4), c(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(6), c(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), c(&[1, 0, -1, 0, 1]));
        assert_eq!(euler_phi(30), 8);
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = Cyclo::root_of_unity(4, 1);
        assert_eq!(i.mul(&i), Cyclo::from_int(-1));
        assert_eq!(i.mul(&i).conductor(), 1);
    }

    #[test]
    fn averaged_sum_over_cube_roots() {
        // (1/3) Σ_{k=1}^{2} (1 - ω^k) = 1
        let mut acc = Cyclo::zero();
        for k in 1..3 {
            acc = acc.add(&Cyclo::one().sub(&Cyclo::root_of_unity(3, k)));
        }
        let third = Cyclo::from_rational(crate::ring::rat(1, 3));
        assert_eq!(acc.mul(&third), Cyclo::one());
    }

    #[test]
    fn inverse_and_embedding() {
        let a = Cyclo::one().sub(&Cyclo::root_of_unity(5, 2));
        let b = a.inv().unwrap();
        assert_eq!(a.mul(&b), Cyclo::one());
        // ζ_3 = ζ_6^2, and mixing conductors 3 and 4 lands in Q(ζ_12).
        assert_eq!(Cyclo::root_of_unity(3, 1), Cyclo::root_of_unity(6, 2));
        let s = Cyclo::root_of_unity(3, 1).add(&Cyclo::root_of_unity(4, 1));
        assert_eq!(s.conductor(), 12);
        assert_eq!(s.sub(&Cyclo::root_of_unity(4, 1)), Cyclo::root_of_unity(3, 1));
    }

    #[test]
    fn text_form() {
        let x = Cyclo::one().sub(&Cyclo::root_of_unity(5, 1).mul(&Cyclo::from_rational(crate::ring::rat(2, 3))));
        assert_eq!(x.to_text(), "1 - 2/3*w");
        assert_eq!(Cyclo::root_of_unity(4, 3).to_text(), "-w");
    }
}
