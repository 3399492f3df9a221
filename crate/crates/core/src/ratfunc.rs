//! Rational functions in the formal parameter `q` over a cyclotomic field.
//!
//! Canonical form: numerator and denominator are coprime, the denominator
//! is monic, and zero is `0/1`. Equality is therefore structural.

use std::fmt;
use std::str::FromStr;

use crate::cyclo::{monomial_text, Cyclo};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ring::{int, Field, Rational, Ring};

#[derive(Clone, PartialEq, Debug)]
pub struct CycloRat {
    num: Poly<Cyclo>,
    den: Poly<Cyclo>,
}

impl CycloRat {
    /// Build `num/den` and bring it to canonical form. Fails when `den = 0`.
    pub fn new(num: Poly<Cyclo>, den: Poly<Cyclo>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly<Cyclo>, den: Poly<Cyclo>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        // Common powers of q first; most values met in practice have
        // monomial denominators and never need a full gcd.
        let v = num.valuation().unwrap().min(den.valuation().unwrap());
        let (mut num, mut den) = if v > 0 {
            (num.shift_down(v), den.shift_down(v))
        } else {
            (num, den)
        };
        if !den.is_monomial() && !num.is_constant() {
            let g = num.gcd(&den);
            if !g.is_constant() {
                num = num.div_rem(&g).0;
                den = den.div_rem(&g).0;
            }
        }
        let lead = den.leading().unwrap().inv().unwrap();
        if !lead.is_one() {
            num = num.scale(&lead);
            den = den.scale(&lead);
        }
        CycloRat { num, den }
    }

    pub fn from_cyclo(c: Cyclo) -> Self {
        CycloRat {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::from_cyclo(Cyclo::from_rational(r))
    }

    pub fn from_poly(p: Poly<Cyclo>) -> Self {
        CycloRat {
            num: p,
            den: Poly::one(),
        }
    }

    /// The formal variable `q`.
    pub fn q() -> Self {
        Self::q_pow(1)
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i64) -> Self {
        let m = Poly::monomial(Cyclo::one(), k.unsigned_abs() as usize);
        if k >= 0 {
            CycloRat { num: m, den: Poly::one() }
        } else {
            CycloRat { num: Poly::one(), den: m }
        }
    }

    pub fn numer(&self) -> &Poly<Cyclo> {
        &self.num
    }

    pub fn denom(&self) -> &Poly<Cyclo> {
        &self.den
    }

    /// The value if this is a constant (no `q` dependence).
    pub fn as_constant(&self) -> Option<&Cyclo> {
        if self.den.is_constant() && self.num.degree() == Some(0) {
            self.num.coeffs().first()
        } else {
            None
        }
    }

    /// Constant value, with zero included.
    pub fn constant_value(&self) -> Option<Cyclo> {
        if self.num.is_zero() {
            Some(Cyclo::zero())
        } else {
            self.as_constant().cloned()
        }
    }

    /// Substitute `q → q^k` for an integer `k`. For `k = 0` this evaluates at
    /// `q = 1`, returning `None` if the denominator vanishes there.
    pub fn subs_power(&self, k: i64) -> Option<Self> {
        match k {
            0 => {
                let d = self.den.eval(&Cyclo::one());
                let n = self.num.eval(&Cyclo::one());
                n.div(&d).map(Self::from_cyclo)
            }
            1 => Some(self.clone()),
            k if k > 0 => Some(Self::canonical(
                self.num.compose_power(k as usize),
                self.den.compose_power(k as usize),
            )),
            k => {
                // p(q^-a) = q^-(a·deg p) · rev(p)(q^a)
                let a = k.unsigned_abs() as usize;
                let dn = self.num.degree().unwrap_or(0);
                let dd = self.den.degree().unwrap_or(0);
                let n = self.num.reversed(dn).compose_power(a);
                let d = self.den.reversed(dd).compose_power(a);
                let shift = (dd as i64 - dn as i64) * a as i64;
                let base = Self::canonical(n, d);
                Some(base.mul(&Self::q_pow(shift)))
            }
        }
    }

    /// Evaluate at a field element `q = x`; `None` on a pole.
    pub fn eval(&self, x: &Cyclo) -> Option<Cyclo> {
        self.num.eval(x).div(&self.den.eval(x))
    }

    /// Apply the Galois action `ζ ↦ ζ^k` to every coefficient.
    pub fn galois(&self, k: i64) -> Self {
        Self::canonical(self.num.map(|c| c.galois(k)), self.den.map(|c| c.galois(k)))
    }

    pub fn parse(s: &str, conductor: u32) -> Result<Self> {
        Parser::new(s, conductor).parse_all()
    }

    /// Canonical text: `num` when the denominator is 1, else `(num)/(den)`.
    pub fn to_text(&self) -> String {
        if self.den.is_constant() {
            poly_text(&self.num)
        } else {
            format!("({})/({})", poly_text(&self.num), poly_text(&self.den))
        }
    }
}

fn poly_text(p: &Poly<Cyclo>) -> String {
    let terms: Vec<(usize, &Cyclo)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (d, c)) in terms.into_iter().enumerate() {
        let (neg, body) = if c.is_single_term() {
            let (i, r) = c
                .coeffs()
                .iter()
                .enumerate()
                .find(|(_, r)| !r.is_zero())
                .unwrap();
            let neg = *r < int(0);
            let mag = if neg { -r.clone() } else { r.clone() };
            let w = monomial_text(&mag, "w", i);
            let body = match (w.as_str(), d) {
                (_, 0) => w,
                ("1", _) => monomial_text(&int(1), "q", d),
                _ => format!("{}*{}", w, monomial_text(&int(1), "q", d)),
            };
            (neg, body)
        } else {
            let inner = format!("({})", c.to_text());
            let body = if d == 0 {
                inner
            } else {
                format!("{}*{}", inner, monomial_text(&int(1), "q", d))
            };
            (false, body)
        };
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

impl fmt::Display for CycloRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for CycloRat {
    type Err = Error;
    /// Parses with conductor 1 (no `w`); use [`CycloRat::parse`] otherwise.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 1)
    }
}

impl Ring for CycloRat {
    fn zero() -> Self {
        CycloRat {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }
    fn one() -> Self {
        Self::from_cyclo(Cyclo::one())
    }
    fn add(&self, o: &Self) -> Self {
        if self.num.is_zero() {
            return o.clone();
        }
        if o.num.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::canonical(self.num.add(&o.num), self.den.clone());
        }
        Self::canonical(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return Self::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return CycloRat {
                num: self.num.mul(&o.num),
                den: Poly::one(),
            };
        }
        Self::canonical(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg(&self) -> Self {
        CycloRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        Self::from_rational(int(v))
    }
}

impl Field for CycloRat {
    fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Self::canonical(self.den.clone(), self.num.clone()))
    }
}

/// Recursive-descent parser for `+ - * / ^`, parentheses, rationals, `w`, `q`.
struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    conductor: u32,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str, conductor: u32) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
            conductor,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{} at offset {} in {:?}",
            msg,
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<CycloRat> {
        let v = self.expr()?;
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<CycloRat> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<CycloRat> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    acc = acc.div(&d).ok_or(Error::DivisionByZero)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<CycloRat> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let e = self.integer()?;
            let p = base.pow(e);
            return if neg {
                p.inv().ok_or(Error::DivisionByZero)
            } else {
                Ok(p)
            };
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer overflow"))
    }

    fn atom(&mut self) -> Result<CycloRat> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'q') => {
                self.pos += 1;
                Ok(CycloRat::q())
            }
            Some(b'w') => {
                self.pos += 1;
                Ok(CycloRat::from_cyclo(Cyclo::root_of_unity(self.conductor, 1)))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: num_bigint::BigInt = digits.parse().map_err(|_| self.err("bad number"))?;
                Ok(CycloRat::from_rational(Rational::from_integer(n)))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
