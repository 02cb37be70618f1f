use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{fmt_rational, Rational, SymbolicError, Symbols};

/// Exponent vector, one entry per symbol of the owning table.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of the earliest symbol.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, idx: usize, pow: u32) -> Self {
        let mut e = vec![0; n];
        e[idx] = pow;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    syms: Symbols,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked ring operation; fails when the operands use different tables.
pub fn poly_arith(lhs: &Poly, rhs: &Poly, op: ArithOp) -> Result<Poly, SymbolicError> {
    match op {
        ArithOp::Add => lhs.checked_add(rhs),
        ArithOp::Sub => lhs.checked_sub(rhs),
        ArithOp::Mul => lhs.checked_mul(rhs),
    }
}

impl Poly {
    pub fn zero(syms: &Symbols) -> Self {
        Poly {
            syms: syms.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(syms: &Symbols, c: Rational) -> Self {
        let mut p = Poly::zero(syms);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(syms.len()), c);
        }
        p
    }

    pub fn from_int(syms: &Symbols, c: i64) -> Self {
        Poly::constant(syms, Rational::from_integer(c.into()))
    }

    pub fn one(syms: &Symbols) -> Self {
        Poly::from_int(syms, 1)
    }

    /// The polynomial consisting of a single symbol.
    pub fn var(syms: &Symbols, name: &str) -> Result<Self, SymbolicError> {
        let idx = syms.require(name)?;
        Ok(Poly::var_idx(syms, idx))
    }

    pub fn var_idx(syms: &Symbols, idx: usize) -> Self {
        let mut p = Poly::zero(syms);
        p.terms
            .insert(Monomial::var(syms.len(), idx, 1), Rational::one());
        p
    }

    pub fn monomial(syms: &Symbols, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.0.len(), syms.len(), "exponent vector length");
        let mut p = Poly::zero(syms);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I>(syms: &Symbols, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Poly::zero(syms);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn symbols(&self) -> &Symbols {
        &self.syms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant polynomial (zero for the zero polynomial).
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|m| m.0[idx]).max().unwrap_or(0)
    }

    /// Indices of symbols that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.syms.len())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check(&self, other: &Poly) -> Result<(), SymbolicError> {
        if self.syms == other.syms {
            Ok(())
        } else {
            Err(self.syms.mismatch(&other.syms))
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, SymbolicError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, SymbolicError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, SymbolicError> {
        self.check(other)?;
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Ok(Poly {
            syms: self.syms.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.syms);
        }
        Poly {
            syms: self.syms.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.syms);
        }
        Poly {
            syms: self.syms.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.mul(m), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one(&self.syms);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Divide by the leading coefficient so the leading term is monic.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = lc.recip();
                self.scale(&inv)
            }
        }
    }

    /// Scale so the coefficients are coprime integers with a positive
    /// leading coefficient.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut den_lcm = BigInt::one();
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            den_lcm = num_integer::lcm(den_lcm, c.denom().clone());
            num_gcd = num_integer::gcd(num_gcd, c.numer().clone());
        }
        let mut factor = Rational::new(den_lcm, num_gcd);
        if self.leading_coeff().is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Formal partial derivative with respect to symbol `idx`.
    pub fn diff_idx(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(&self.syms);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[idx] -= 1;
            out.add_term(nm, c * Rational::from_integer(e.into()));
        }
        out
    }

    pub fn diff(&self, wrt: &str) -> Result<Poly, SymbolicError> {
        Ok(self.diff_idx(self.syms.require(wrt)?))
    }

    /// Exact evaluation at a point given by symbol name.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, SymbolicError> {
        let mut vals = Vec::with_capacity(self.syms.len());
        for (i, name) in self.syms.names().iter().enumerate() {
            match point.get(name) {
                Some(v) => vals.push(Some(v.clone())),
                None => {
                    if self.terms.keys().any(|m| m.0[i] > 0) {
                        return Err(SymbolicError::MissingSymbol(name.clone()));
                    }
                    vals.push(None);
                }
            }
        }
        Ok(self.eval_with(|i| vals[i].clone().unwrap_or_else(Rational::zero)))
    }

    /// Exact evaluation with values indexed by symbol position.
    pub fn eval_slice(&self, vals: &[Rational]) -> Rational {
        self.eval_with(|i| vals[i].clone())
    }

    fn eval_with<F: Fn(usize) -> Rational>(&self, val: F) -> Rational {
        let vals: Vec<Rational> = (0..self.syms.len())
            .map(|i| {
                if self.terms.keys().any(|m| m.0[i] > 0) {
                    val(i)
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(vals[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating-point evaluation with values indexed by symbol position.
    pub fn eval_f64(&self, vals: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = super::rational_to_f64(c);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        t *= vals[i].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitute a polynomial (over the same table) for symbol `idx`.
    pub fn substitute(&self, idx: usize, value: &Poly) -> Poly {
        let mut out = Poly::zero(&self.syms);
        let mut powers: Vec<Poly> = vec![Poly::one(&self.syms)];
        for (m, c) in &self.terms {
            let e = m.0[idx] as usize;
            while powers.len() <= e {
                let next = &powers[powers.len() - 1] * value;
                powers.push(next);
            }
            let mut rest = m.clone();
            rest.0[idx] = 0;
            let t = powers[e].mul_monomial(&rest, c);
            out = &out + &t;
        }
        out
    }

    /// Re-express over another table that contains every symbol in use.
    pub fn rebase(&self, target: &Symbols) -> Result<Poly, SymbolicError> {
        let map: Vec<Option<usize>> = self
            .syms
            .names()
            .iter()
            .map(|n| target.index_of(n))
            .collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one(target.len());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => nm.0[j] += e,
                    None => {
                        return Err(SymbolicError::UnknownSymbol(self.syms.name(i).to_string()))
                    }
                }
            }
            out.add_term(nm, c.clone());
        }
        Ok(out)
    }

    /// Coefficients of powers of symbol `idx`; entry k multiplies `sym^k`.
    /// The coefficients no longer contain the symbol.
    pub fn to_univariate(&self, idx: usize) -> Vec<Poly> {
        let deg = self.degree_in(idx) as usize;
        let mut out = vec![Poly::zero(&self.syms); deg + 1];
        for (m, c) in &self.terms {
            let e = m.0[idx] as usize;
            let mut nm = m.clone();
            nm.0[idx] = 0;
            out[e].add_term(nm, c.clone());
        }
        out
    }

    pub fn from_univariate(coeffs: &[Poly], idx: usize, syms: &Symbols) -> Poly {
        let mut out = Poly::zero(syms);
        for (k, c) in coeffs.iter().enumerate() {
            let shift = Monomial::var(syms.len(), idx, k as u32);
            for (m, v) in &c.terms {
                out.add_term(m.mul(&shift), v.clone());
            }
        }
        out
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves
    /// a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        assert!(self.syms == divisor.syms, "symbol tables differ");
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.syms);
        while let Some((rm, rc)) = rem.leading_term() {
            if !lm.divides(rm) {
                return None;
            }
            let qm = rm.div(&lm);
            let qc = rc / &lc;
            rem = &rem - &divisor.mul_monomial(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Render with an explicit `*` and `^`, terms in descending graded-lex order.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.monomial_text(m);
            if mono.is_empty() {
                out.push_str(&fmt_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&fmt_rational(&abs));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }

    fn monomial_text(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.syms.name(i).to_string()),
                _ => parts.push(format!("{}^{}", self.syms.name(i), e)),
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self.to_text())
    }
}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial add")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial sub")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial mul")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse_expr, rat};

    fn syms() -> Symbols {
        Symbols::new(["a", "b", "c", "d", "e", "p", "r", "s"])
    }

    fn p(s: &str) -> Poly {
        parse_expr(s, &syms()).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(&p("a + b") * &p("a - b"), p("a^2 - b^2"));
    }

    #[test]
    fn additive_identity() {
        let f = p("3*a*b - 2/3*c + 5");
        assert_eq!(&f + &Poly::zero(&syms()), f);
    }

    #[test]
    fn cancellation() {
        assert_eq!(&p("a*d - b*c") - &p("a*d"), p("-b*c"));
    }

    #[test]
    fn mismatched_tables_rejected() {
        let other = Symbols::new(["a", "b"]);
        let f = Poly::var(&other, "a").unwrap();
        let g = p("a");
        assert!(matches!(
            poly_arith(&f, &g, ArithOp::Add),
            Err(SymbolicError::SymbolMismatch { .. })
        ));
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("a*d - b*c").diff("a").unwrap(), p("d"));
        assert_eq!(
            p("(d*p - b*r)^2 + b^2*s^2").diff("s").unwrap(),
            p("2*b^2*s")
        );
        assert!(matches!(
            p("a").diff("zz"),
            Err(SymbolicError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn evaluation() {
        let pt = |kv: &[(&str, i64)]| -> BTreeMap<String, Rational> {
            kv.iter().map(|(k, v)| (k.to_string(), rat(*v, 1))).collect()
        };
        assert_eq!(p("a + d").eval(&pt(&[("a", 1), ("d", 2)])).unwrap(), rat(3, 1));
        assert_eq!(
            p("a*d - b*c")
                .eval(&pt(&[("a", 2), ("b", 1), ("c", 1), ("d", 2)]))
                .unwrap(),
            rat(3, 1)
        );
        assert_eq!(
            p("(d*p - b*r)^2 + b^2*s^2")
                .eval(&pt(&[("d", 1), ("p", 2), ("b", 1), ("r", 1), ("s", 3)]))
                .unwrap(),
            rat(10, 1)
        );
        assert!(matches!(
            p("a + d").eval(&pt(&[("a", 1)])),
            Err(SymbolicError::MissingSymbol(_))
        ));
    }

    #[test]
    fn text_is_graded_lex_descending() {
        assert_eq!(p("1 + c + a*b - 3/2*a^2*b").to_text(), "-3/2*a^2*b + a*b + c + 1");
        assert_eq!(p("0").to_text(), "0");
    }

    #[test]
    fn exact_division() {
        let f = p("(a*d - b*c)*e");
        assert_eq!(f.div_exact(&p("a*d - b*c")).unwrap(), p("e"));
        assert!(p("a + 1").div_exact(&p("a - 1")).is_none());
    }

    #[test]
    fn primitive_integer_form() {
        assert_eq!(p("-2/3*a + 4/3*b").primitive_integer(), p("a - 2*b"));
    }
}
