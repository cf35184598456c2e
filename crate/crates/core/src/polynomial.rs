//! Polynomials without constant term, `P(t) = a_1 t^{e_1} + ... + a_n t^{e_n}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One monomial `coeff * t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exponent: u32,
}

/// The pattern-defining polynomial.
///
/// Exponents are strictly increasing and positive and every coefficient is
/// nonzero. Linear `P` is accepted for pattern search only; the oscillatory
/// machinery needs curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidPolynomial("no terms".into()));
        }
        for w in terms.windows(2) {
            if w[1].exponent <= w[0].exponent {
                return Err(Error::InvalidPolynomial(
                    "exponents must be strictly increasing".into(),
                ));
            }
        }
        for t in &terms {
            if t.exponent == 0 {
                return Err(Error::InvalidPolynomial("constant term not allowed".into()));
            }
            if t.coeff == 0.0 || !t.coeff.is_finite() {
                return Err(Error::InvalidPolynomial(format!(
                    "coefficient of t^{} must be finite and nonzero",
                    t.exponent
                )));
            }
        }
        Ok(Self { terms })
    }

    /// Build from `(coefficient, exponent)` pairs.
    pub fn from_pairs(pairs: &[(f64, u32)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(coeff, exponent)| Term { coeff, exponent })
                .collect(),
        )
    }

    /// `t + t^2`, the running example.
    pub fn t_plus_t2() -> Self {
        Self::from_pairs(&[(1.0, 1), (1.0, 2)]).expect("valid")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.last().map(|t| t.exponent).unwrap_or(0)
    }

    /// Coefficient of the linear term, zero when absent.
    pub fn linear_coeff(&self) -> f64 {
        match self.terms.first() {
            Some(t) if t.exponent == 1 => t.coeff,
            _ => 0.0,
        }
    }

    pub fn has_linear_term(&self) -> bool {
        self.linear_coeff() != 0.0
    }

    /// `Q(t) = P(t) - a_1 t`.
    pub fn q_part(&self) -> DensePoly {
        let mut d = self.dense();
        if d.coeffs.len() > 1 {
            d.coeffs[1] = 0.0;
        }
        d
    }

    /// `R(t) = Q(t) - a_2 t^{e_2}`: everything beyond the two dominant terms.
    pub fn r_part(&self) -> DensePoly {
        let mut d = self.q_part();
        let skip = if self.has_linear_term() { 1 } else { 0 };
        if let Some(t) = self.terms.get(skip) {
            d.coeffs[t.exponent as usize] = 0.0;
        }
        d
    }

    /// Dense coefficient vector, index = power.
    pub fn dense(&self) -> DensePoly {
        let mut coeffs = vec![0.0; self.degree() as usize + 1];
        for t in &self.terms {
            coeffs[t.exponent as usize] = t.coeff;
        }
        DensePoly { coeffs }
    }

    /// `s -> P(2^{-l} s)` as a dense polynomial in `s`.
    pub fn rescaled(&self, l: i32) -> DensePoly {
        let mut d = self.dense();
        for (k, c) in d.coeffs.iter_mut().enumerate() {
            *c *= (-(l as f64) * k as f64).exp2();
        }
        d
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|m| m.coeff * t.powi(m.exponent as i32))
            .sum()
    }

    /// The `order`-th derivative at `t`.
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        self.terms
            .iter()
            .filter(|m| m.exponent >= order)
            .map(|m| {
                let falling: f64 = (0..order).map(|j| (m.exponent - j) as f64).product();
                m.coeff * falling * t.powi((m.exponent - order) as i32)
            })
            .sum()
    }

    /// Parse `"1:1, 1:2"` style `coeff:exponent` lists.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (c, e) = item.split_once(':').ok_or_else(|| {
                Error::InvalidPolynomial(format!("term `{item}` is not `coeff:exponent`"))
            })?;
            let coeff: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPolynomial(format!("bad coefficient `{c}`")))?;
            let exp: u32 = e
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPolynomial(format!("bad exponent `{e}`")))?;
            pairs.push((coeff, exp));
        }
        Self::from_pairs(&pairs)
    }

    /// Inverse of [`Polynomial::parse`].
    pub fn to_config_string(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{:?}:{}", t.coeff, t.exponent))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match t.exponent {
                1 => write!(f, "{}*t", t.coeff)?,
                e => write!(f, "{}*t^{}", t.coeff, e)?,
            }
        }
        Ok(())
    }
}

/// Dense real polynomial, `coeffs[k]` multiplies `s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePoly {
    pub coeffs: Vec<f64>,
}

impl DensePoly {
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> DensePoly {
        if self.coeffs.len() <= 1 {
            return DensePoly { coeffs: vec![0.0] };
        }
        DensePoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    pub fn nth_derivative(&self, n: usize) -> DensePoly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Real roots in the open interval `(a, b)`, isolated through the
    /// derivative chain: between consecutive roots of `p'` the polynomial is
    /// monotone, so each such piece holds at most one root.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if self.is_zero() || !(a < b) {
            return Vec::new();
        }
        let degree = self
            .coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0);
        if degree == 0 {
            return Vec::new();
        }
        let crit = self.derivative().roots_in(a, b);
        let mut knots = Vec::with_capacity(crit.len() + 2);
        knots.push(a);
        knots.extend(crit);
        knots.push(b);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 {
                if lo > a && roots.last().is_none_or(|&r: &f64| r < lo) {
                    roots.push(lo);
                }
                continue;
            }
            if flo.signum() != fhi.signum() && fhi != 0.0 {
                roots.push(bisect(|s| self.eval(s), lo, hi));
            }
        }
        roots
    }

    /// Exact range `[min, max]` of the polynomial over `[a, b]`.
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        for r in self.derivative().roots_in(a, b) {
            let v = self.eval(r);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Bisection to full precision on a bracket with a sign change.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
