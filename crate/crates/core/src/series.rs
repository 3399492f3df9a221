//! Truncated Laurent series in the loop variable `z` over [`CycloRat`].
//!
//! A series stores the coefficients of modes `lo..=hi`. Modes below `lo` are
//! zero. Above `hi` the series is either zero (an *exact* Laurent
//! polynomial) or unknown (a *truncated* series, written `O(z^(hi+1))`).
//! Every operation returns the largest window on which its result is
//! determined by the inputs.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ratfunc::CycloRat;
use crate::ring::{Field, Ring};

#[derive(Clone, Debug)]
pub struct LaurentSeries {
    lo: i64,
    coeffs: Vec<CycloRat>,
    exact: bool,
}

impl LaurentSeries {
    /// Exact Laurent polynomial with coefficients for modes `lo, lo+1, ...`.
    pub fn exact(lo: i64, coeffs: Vec<CycloRat>) -> Self {
        let mut s = LaurentSeries {
            lo,
            coeffs,
            exact: true,
        };
        s.trim_exact();
        s
    }

    /// Series known on modes `lo..=lo+len-1` and unknown above.
    pub fn truncated(lo: i64, coeffs: Vec<CycloRat>) -> Self {
        LaurentSeries {
            lo,
            coeffs,
            exact: false,
        }
    }

    /// The single term `c·z^m`.
    pub fn monomial(c: CycloRat, m: i64) -> Self {
        Self::exact(m, vec![c])
    }

    pub fn constant(c: CycloRat) -> Self {
        Self::monomial(c, 0)
    }

    /// `δ(z) = Σ z^m` restricted to `lo..=hi`, the all-ones series.
    pub fn delta(lo: i64, hi: i64) -> Self {
        Self::truncated(lo, vec![CycloRat::one(); (hi - lo + 1).max(0) as usize])
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.lo = 0;
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last stored mode; for a truncated series the last known one.
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    /// Highest mode known, `None` for exact series (known everywhere).
    pub fn precision(&self) -> Option<i64> {
        if self.exact {
            None
        } else {
            Some(self.hi())
        }
    }

    /// Coefficient of `z^m`, or `None` when `m` lies above the known window.
    pub fn coeff(&self, m: i64) -> Option<CycloRat> {
        if m < self.lo {
            return Some(CycloRat::zero());
        }
        match self.coeffs.get((m - self.lo) as usize) {
            Some(c) => Some(c.clone()),
            None if self.exact => Some(CycloRat::zero()),
            None => None,
        }
    }

    fn at(&self, m: i64) -> Option<&CycloRat> {
        if m < self.lo {
            return None;
        }
        self.coeffs.get((m - self.lo) as usize)
    }

    /// Nonzero stored modes in ascending order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, &CycloRat)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    /// Lowest mode with a nonzero coefficient. A truncated series that is
    /// zero on its whole window has valuation at least `hi + 1`.
    pub fn valuation(&self) -> Option<i64> {
        self.modes().next().map(|(m, _)| m)
    }

    fn effective_valuation(&self) -> i64 {
        self.valuation().unwrap_or(self.hi() + 1)
    }

    /// True when every known coefficient vanishes.
    pub fn vanishes_on_window(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Forget everything above mode `hi`.
    pub fn truncate(&self, hi: i64) -> Self {
        let top = match self.precision() {
            Some(p) => p.min(hi),
            None => hi,
        };
        let len = (top - self.lo + 1).max(0) as usize;
        let coeffs = (0..len)
            .map(|i| self.coeff(self.lo + i as i64).unwrap())
            .collect();
        Self::truncated(self.lo, coeffs)
    }

    /// Re-express on the window `lo..=hi` with `lo` no larger than the
    /// lowest nonzero mode; the result is truncated at `hi`.
    pub fn on_window(&self, lo: i64, hi: i64) -> Result<Self> {
        if let Some(v) = self.valuation() {
            if v < lo {
                return Err(Error::Invalid(format!(
                    "series has a nonzero mode {} below the window start {}",
                    v, lo
                )));
            }
        }
        if let Some(p) = self.precision() {
            if p < hi {
                return Err(window_error(hi - p, hi));
            }
        }
        let coeffs = (lo..=hi).map(|m| self.coeff(m).unwrap()).collect();
        Ok(Self::truncated(lo, coeffs))
    }

    /// True when both series agree on every mode known to both.
    pub fn agrees_on_common_window(&self, o: &Self) -> bool {
        let lo = self.lo.min(o.lo);
        let hi = match (self.precision(), o.precision()) {
            (None, None) => self.hi().max(o.hi()),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        (lo..=hi).all(|m| self.coeff(m) == o.coeff(m))
    }

    fn combine_precision(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn build(lo: i64, hi: Option<i64>, f: impl Fn(i64) -> CycloRat, natural_hi: i64) -> Self {
        let top = hi.unwrap_or(natural_hi);
        let len = (top - lo + 1).max(0) as usize;
        let coeffs = (0..len).map(|i| f(lo + i as i64)).collect();
        match hi {
            None => Self::exact(lo, coeffs),
            Some(_) => Self::truncated(lo, coeffs),
        }
    }

    /// Apply `τ^k`: the coefficient of `z^m` is multiplied by `q^(mk)`.
    pub fn tau(&self, k: i64) -> Self {
        if k == 0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_zero() {
                    c.clone()
                } else {
                    c.mul(&CycloRat::q_pow((self.lo + i as i64) * k))
                }
            })
            .collect();
        LaurentSeries {
            lo: self.lo,
            coeffs,
            exact: self.exact,
        }
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            lo: self.lo + k,
            coeffs: self.coeffs.clone(),
            exact: self.exact,
        }
    }

    /// Apply a coefficientwise map that sends zero to zero.
    pub fn map_coeffs(&self, f: impl Fn(&CycloRat) -> CycloRat) -> Self {
        let coeffs = self.coeffs.iter().map(f).collect();
        if self.exact {
            Self::exact(self.lo, coeffs)
        } else {
            Self::truncated(self.lo, coeffs)
        }
    }

    /// Multiplicative inverse of a series with a nonzero leading term.
    pub fn invert(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::Singular("series has no invertible leading term".into()))?;
        let lead_inv = self.at(v).unwrap().inv().unwrap();
        if self.exact && self.coeffs.len() == 1 {
            return Ok(Self::monomial(lead_inv, -v));
        }
        // Relative precision is preserved; an exact non-monomial series has
        // an infinite inverse, so it is cut at the same relative length.
        let rel = match self.precision() {
            Some(p) => p - v,
            None => self.hi() - v,
        };
        let a: Vec<CycloRat> = (0..=rel).map(|i| self.coeff(v + i).unwrap()).collect();
        let mut b = Vec::with_capacity(a.len());
        b.push(lead_inv.clone());
        for i in 1..a.len() {
            let mut s = CycloRat::zero();
            for j in 1..=i {
                if !a[j].is_zero() && !b[i - j].is_zero() {
                    s = s.add(&a[j].mul(&b[i - j]));
                }
            }
            b.push(s.mul(&lead_inv).neg());
        }
        Ok(Self::truncated(-v, b))
    }

    /// Invert a series of the form `1 + O(z)`.
    pub fn invert_unipotent(&self) -> Result<Self> {
        if self.valuation() != Some(0) || self.coeff(0) != Some(CycloRat::one()) {
            return Err(Error::Singular("series is not of the form 1 + O(z)".into()));
        }
        self.invert()
    }

    /// Residue pairing `Res_z x(z) y(z) dz/z = Σ_m x_m y_{-m}`.
    pub fn residue_pairing(&self, y: &Self) -> Result<CycloRat> {
        // Nonzero terms need m ≥ lo_x and -m ≥ lo_y.
        let (a, b) = (self.effective_valuation(), -y.effective_valuation());
        let mut acc = CycloRat::zero();
        if a > b {
            return Ok(acc);
        }
        if let Some(p) = self.precision() {
            if p < b {
                return Err(window_error(b - p, b));
            }
        }
        if let Some(p) = y.precision() {
            if p < -a {
                return Err(window_error(-a - p, -a));
            }
        }
        for m in a..=b {
            let (x, z) = (self.coeff(m).unwrap(), y.coeff(-m).unwrap());
            if !x.is_zero() && !z.is_zero() {
                acc = acc.add(&x.mul(&z));
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let mut modes = Map::new();
        let mut conductor = 1u32;
        for (m, c) in self.modes() {
            modes.insert(m.to_string(), Value::String(c.to_text()));
            conductor = conductor.max(conductor_of(c));
        }
        let (lo, hi) = if self.exact && self.coeffs.is_empty() {
            (0, -1)
        } else {
            (self.lo, self.hi())
        };
        let mut obj = Map::new();
        obj.insert("window".into(), serde_json::json!([lo, hi]));
        obj.insert("modes".into(), Value::Object(modes));
        if self.exact {
            obj.insert("exact".into(), Value::Bool(true));
        }
        if conductor > 1 {
            obj.insert("conductor".into(), Value::from(conductor));
        }
        Value::Object(obj)
    }

    /// Parse the JSON form. `w` in coefficient strings denotes a primitive
    /// root of unity of the object's `"conductor"` (default `conductor`).
    pub fn from_json(v: &Value, conductor: u32) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("series must be a JSON object".into()))?;
        let window = obj
            .get("window")
            .and_then(Value::as_array)
            .filter(|w| w.len() == 2)
            .ok_or_else(|| Error::Parse("missing \"window\": [lo, hi]".into()))?;
        let lo = window[0]
            .as_i64()
            .ok_or_else(|| Error::Parse("window bounds must be integers".into()))?;
        let hi = window[1]
            .as_i64()
            .ok_or_else(|| Error::Parse("window bounds must be integers".into()))?;
        let exact = obj.get("exact").and_then(Value::as_bool).unwrap_or(false);
        let h = match obj.get("conductor") {
            Some(c) => c
                .as_u64()
                .filter(|&c| c >= 1)
                .ok_or_else(|| Error::Parse("conductor must be a positive integer".into()))?
                as u32,
            None => conductor,
        };
        let len = (hi - lo + 1).max(0) as usize;
        let mut coeffs = vec![CycloRat::zero(); len];
        if let Some(modes) = obj.get("modes") {
            let modes = modes
                .as_object()
                .ok_or_else(|| Error::Parse("\"modes\" must be an object".into()))?;
            for (k, val) in modes {
                let m: i64 = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("mode key {:?} is not an integer", k)))?;
                if m < lo || m > hi {
                    return Err(Error::Parse(format!("mode {} outside window [{}, {}]", m, lo, hi)));
                }
                let s = val
                    .as_str()
                    .ok_or_else(|| Error::Parse(format!("mode {} must be a string", m)))?;
                coeffs[(m - lo) as usize] = CycloRat::parse(s, h)?;
            }
        }
        Ok(if exact {
            Self::exact(lo, coeffs)
        } else {
            Self::truncated(lo, coeffs)
        })
    }
}

/// Largest conductor among the coefficients of a rational function.
fn conductor_of(c: &CycloRat) -> u32 {
    c.numer()
        .coeffs()
        .iter()
        .chain(c.denom().coeffs())
        .map(|x| x.conductor())
        .max()
        .unwrap_or(1)
}

pub(crate) fn window_error(deficit: i64, required_hi: i64) -> Error {
    Error::Window {
        deficit,
        required_hi,
    }
}

impl PartialEq for LaurentSeries {
    fn eq(&self, o: &Self) -> bool {
        self.precision() == o.precision() && self.agrees_on_common_window(o)
    }
}

impl Ring for LaurentSeries {
    fn zero() -> Self {
        Self::exact(0, Vec::new())
    }
    fn one() -> Self {
        Self::constant(CycloRat::one())
    }
    fn add(&self, o: &Self) -> Self {
        let lo = self.lo.min(o.lo);
        let hi = Self::combine_precision(self.precision(), o.precision());
        let natural = self.hi().max(o.hi());
        Self::build(
            lo,
            hi,
            |m| match (self.at(m), o.at(m)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => CycloRat::zero(),
            },
            natural,
        )
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.exact && self.coeffs.is_empty() || o.exact && o.coeffs.is_empty() {
            return Self::zero();
        }
        let (va, vb) = (self.effective_valuation(), o.effective_valuation());
        let hi = match (self.precision(), o.precision()) {
            (None, None) => None,
            (Some(p), None) => Some(p + vb),
            (None, Some(p)) => Some(p + va),
            (Some(p), Some(r)) => Some((p + vb).min(r + va)),
        };
        let lo = self.lo + o.lo;
        let natural = self.hi() + o.hi();
        let top = hi.unwrap_or(natural);
        let len = (top - lo + 1).max(0) as usize;
        let mut coeffs = vec![CycloRat::zero(); len];
        for (i, a) in self.modes() {
            for (j, b) in o.modes() {
                let m = i + j;
                if m > top {
                    break;
                }
                let k = (m - lo) as usize;
                coeffs[k] = coeffs[k].add(&a.mul(b));
            }
        }
        match hi {
            None => Self::exact(lo, coeffs),
            Some(_) => Self::truncated(lo, coeffs),
        }
    }
    fn neg(&self) -> Self {
        LaurentSeries {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            exact: self.exact,
        }
    }
    /// Exactly zero; a truncated series is never known to be zero.
    fn is_zero(&self) -> bool {
        self.exact && self.coeffs.is_empty()
    }
    fn from_i64(v: i64) -> Self {
        Self::constant(CycloRat::from_i64(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CycloRat {
        s.parse().unwrap()
    }

    fn poly(lo: i64, v: &[&str]) -> LaurentSeries {
        LaurentSeries::exact(lo, v.iter().map(|s| c(s)).collect())
    }

    #[test]
    fn tau_scales_modes() {
        let x = LaurentSeries::monomial(c("3"), 2);
        assert_eq!(x.tau(1), LaurentSeries::monomial(c("3*q^2"), 2));
        let d = LaurentSeries::delta(-2, 2).tau(1);
        for m in -2..=2 {
            assert_eq!(d.coeff(m).unwrap(), CycloRat::q_pow(m));
        }
        assert_eq!(d.tau(-1), LaurentSeries::delta(-2, 2));
    }

    #[test]
    fn product_and_windows() {
        let a = poly(0, &["1", "1"]);
        let b = poly(0, &["1", "-1"]);
        assert_eq!(a.mul(&b), poly(0, &["1", "0", "-1"]));
        // (1 + z + O(z^3)) · (z^-1 + O(z^2)) is known through z^1.
        let t = LaurentSeries::truncated(0, vec![c("1"), c("1"), c("0"), c("0")]);
        let u = LaurentSeries::truncated(-1, vec![c("1"), c("0"), c("0")]);
        let p = t.mul(&u);
        assert_eq!(p.precision(), Some(1));
        assert_eq!(p.coeff(-1).unwrap(), c("1"));
        assert_eq!(p.coeff(0).unwrap(), c("1"));
        assert_eq!(p.coeff(2), None);
    }

    #[test]
    fn inverse_of_truncated_series() {
        let x = LaurentSeries::truncated(0, vec![c("1"), c("-q"), c("0"), c("0")]);
        let y = x.invert().unwrap();
        assert_eq!(y.coeff(2).unwrap(), c("q^2"));
        let one = x.mul(&y);
        assert!(one.agrees_on_common_window(&LaurentSeries::one()));
        assert_eq!(one.precision(), Some(3));
    }

    #[test]
    fn residue_pairing_of_dual_modes() {
        let x = LaurentSeries::monomial(c("2"), 1);
        let y = LaurentSeries::monomial(c("1"), -1);
        assert_eq!(x.residue_pairing(&y).unwrap(), c("2"));
        assert_eq!(x.tau(1).residue_pairing(&y.tau(1)).unwrap(), c("2"));
    }

    #[test]
    fn json_round_trip() {
        let x = LaurentSeries::truncated(-1, vec![c("1/(1 + q)"), c("0"), c("-q^2")]);
        let j = x.to_json();
        assert_eq!(
            j.to_string(),
            r#"{"window":[-1,1],"modes":{"-1":"(1)/(1 + q)","1":"-q^2"}}"#
        );
        assert_eq!(LaurentSeries::from_json(&j, 1).unwrap(), x);
        let w = LaurentSeries::monomial(CycloRat::parse("1 - w*q", 4).unwrap(), 0);
        let back = LaurentSeries::from_json(&w.to_json(), 1).unwrap();
        assert_eq!(back, w);
    }
}
