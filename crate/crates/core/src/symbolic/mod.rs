//! Exact multivariate polynomials and rational functions over the rationals.
//!
//! Every polynomial carries the [`Symbols`] table it is written over. Two
//! polynomials can only be combined when their tables agree; the checked
//! entry points return [`SymbolicError::SymbolMismatch`] otherwise, while the
//! operator impls treat a mismatch as a programming error and panic.

mod expr;
mod gcd;
mod poly;
mod ratfun;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

pub use expr::{parse_expr, ExprError};
pub use gcd::{poly_gcd, poly_lcm};
pub use poly::{poly_arith, ArithOp, Monomial, Poly};
pub use ratfun::RatFun;

/// Exact rational scalar used for every coefficient.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("symbol tables differ: [{left}] vs [{right}]")]
    SymbolMismatch { left: String, right: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("no value given for symbol `{0}`")]
    MissingSymbol(String),
    #[error("division by the zero polynomial")]
    ZeroDenominator,
    #[error("division by zero while evaluating at the given point")]
    SingularPoint,
    #[error(transparent)]
    Parse(#[from] ExprError),
}

/// An ordered, shareable table of symbol names.
#[derive(Clone)]
pub struct Symbols(Arc<[String]>);

impl Symbols {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Symbols(names.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|s| s == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, SymbolicError> {
        self.index_of(name)
            .ok_or_else(|| SymbolicError::UnknownSymbol(name.to_string()))
    }

    fn mismatch(&self, other: &Symbols) -> SymbolicError {
        SymbolicError::SymbolMismatch {
            left: self.0.join(","),
            right: other.0.join(","),
        }
    }
}

impl PartialEq for Symbols {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Symbols {}

impl fmt::Debug for Symbols {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Build a rational from a numerator and denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(n.into(), d.into())
}

/// Render a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom() == &1.into() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort conversion to `f64` for numeric back ends.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational closest to `x` with denominator at most `max_den`
/// (continued-fraction convergents).
pub fn rational_from_f64(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(BigRational::new(h1.into(), k1.into()))
}
