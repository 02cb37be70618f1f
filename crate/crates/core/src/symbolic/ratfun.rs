use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gcd::poly_gcd;
use super::poly::Poly;
use super::{Rational, SymbolicError, Symbols};

/// Reduced quotient of two polynomials; the denominator is monic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<Self, SymbolicError> {
        if den.is_zero() {
            return Err(SymbolicError::ZeroDenominator);
        }
        if num.symbols() != den.symbols() {
            return Err(SymbolicError::SymbolMismatch {
                left: num.symbols().names().join(","),
                right: den.symbols().names().join(","),
            });
        }
        Ok(Self::reduce(num, den))
    }

    pub fn from_poly(p: Poly) -> Self {
        let den = Poly::one(p.symbols());
        RatFun { num: p, den }
    }

    pub fn zero(syms: &Symbols) -> Self {
        Self::from_poly(Poly::zero(syms))
    }

    pub fn one(syms: &Symbols) -> Self {
        Self::from_poly(Poly::one(syms))
    }

    pub fn constant(syms: &Symbols, c: Rational) -> Self {
        Self::from_poly(Poly::constant(syms, c))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        let syms = num.symbols().clone();
        if num.is_zero() {
            return RatFun::zero(&syms);
        }
        if let Some(c) = den.as_constant() {
            return RatFun {
                num: num.scale(&c.recip()),
                den: Poly::one(&syms),
            };
        }
        let g = poly_gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFun { num, den }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn symbols(&self) -> &Symbols {
        self.num.symbols()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_poly().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_poly() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rational) -> RatFun {
        if c.is_zero() {
            return RatFun::zero(self.symbols());
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFun {
        RatFun::reduce(&self.num * p, self.den.clone())
    }

    pub fn recip(&self) -> Result<RatFun, SymbolicError> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, other: &RatFun) -> Result<RatFun, SymbolicError> {
        if other.is_zero() {
            return Err(SymbolicError::ZeroDenominator);
        }
        Ok(RatFun::reduce(&self.num * &other.den, &self.den * &other.num))
    }

    /// Formal partial derivative (quotient rule).
    pub fn diff_idx(&self, idx: usize) -> RatFun {
        if self.is_poly() {
            return RatFun::from_poly(self.num.diff_idx(idx));
        }
        let n = &(&self.num.diff_idx(idx) * &self.den) - &(&self.num * &self.den.diff_idx(idx));
        RatFun::reduce(n, &self.den * &self.den)
    }

    pub fn eval_slice(&self, vals: &[Rational]) -> Result<Rational, SymbolicError> {
        let d = self.den.eval_slice(vals);
        if d.is_zero() {
            return Err(SymbolicError::SingularPoint);
        }
        Ok(self.num.eval_slice(vals) / d)
    }

    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, SymbolicError> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return Err(SymbolicError::SingularPoint);
        }
        Ok(self.num.eval(point)? / d)
    }

    pub fn eval_f64(&self, vals: &[f64]) -> f64 {
        self.num.eval_f64(vals) / self.den.eval_f64(vals)
    }

    pub fn to_text(&self) -> String {
        if self.is_poly() {
            return self.num.to_text();
        }
        format!("({})/({})", self.num.to_text(), self.den.to_text())
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({})", self.to_text())
    }
}

impl<'a> Add<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn add(self, rhs: &'a RatFun) -> RatFun {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            return RatFun::reduce(&self.num + &rhs.num, self.den.clone());
        }
        RatFun::reduce(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<'a> Sub<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &'a RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &'a RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero(self.symbols());
        }
        if self.is_poly() && rhs.is_poly() {
            return RatFun::from_poly(&self.num * &rhs.num);
        }
        RatFun::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<'a> Div<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn div(self, rhs: &'a RatFun) -> RatFun {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}
