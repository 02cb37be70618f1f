//! Itô moment recurrence for two-state polynomial SDEs.
//!
//! For `m_{i,j} = <x^i y^j>` with `x` observed, Itô's lemma gives
//!
//! ```text
//! m'_{i,j} = < i x^{i-1} y^j f_x + j x^i y^{j-1} f_y
//!            + 1/2 (i(i-1) x^{i-2} y^j G_xx + 2ij x^{i-1} y^{j-1} G_xy
//!                   + j(j-1) x^i y^{j-2} G_yy) >
//! ```
//!
//! and, every term being polynomial, the expectation is exchanged
//! syntactically (`<x^p y^q> -> m_{p,q}`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::dsl::{DslError, ModelSpec};
use crate::symbolic::{fmt_rational, Monomial, Poly, RatFun, Rational, Symbols};

/// `m_{i,j}` differentiated `deriv` times; `i` is the observed power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MomentSymbol {
    pub i: u32,
    pub j: u32,
    pub deriv: u32,
}

impl MomentSymbol {
    pub fn new(i: u32, j: u32) -> Self {
        MomentSymbol { i, j, deriv: 0 }
    }

    pub fn with_deriv(i: u32, j: u32, deriv: u32) -> Self {
        MomentSymbol { i, j, deriv }
    }

    pub fn order(&self) -> u32 {
        self.i + self.j
    }

    pub fn is_observed(&self) -> bool {
        self.j == 0
    }

    pub fn derivative(&self) -> Self {
        MomentSymbol {
            deriv: self.deriv + 1,
            ..*self
        }
    }

    /// Canonical text: `m(i,j)` followed by one `'` per derivative.
    pub fn to_text(&self) -> String {
        format!("m({},{}){}", self.i, self.j, "'".repeat(self.deriv as usize))
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let body = s.strip_prefix("m(")?;
        let close = body.find(')')?;
        let (idx, primes) = (&body[..close], &body[close + 1..]);
        if !primes.chars().all(|c| c == '\'') {
            return None;
        }
        let (i, j) = idx.split_once(',')?;
        Some(MomentSymbol {
            i: i.trim().parse().ok()?,
            j: j.trim().parse().ok()?,
            deriv: primes.len() as u32,
        })
    }
}

impl fmt::Display for MomentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Terms are listed with the highest derivative first, then the highest
/// moment order, then the larger observed power.
impl Ord for MomentSymbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .deriv
            .cmp(&self.deriv)
            .then_with(|| other.order().cmp(&self.order()))
            .then_with(|| other.i.cmp(&self.i))
    }
}

impl PartialOrd for MomentSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A linear combination of moment symbols with rational-function
/// coefficients plus a constant. `m_{0,0}` never appears as a symbol; it is
/// folded into the constant.
#[derive(Clone, PartialEq, Eq)]
pub struct MomentExpr {
    syms: Symbols,
    terms: BTreeMap<MomentSymbol, RatFun>,
    constant: RatFun,
}

impl MomentExpr {
    pub fn zero(syms: &Symbols) -> Self {
        MomentExpr {
            syms: syms.clone(),
            terms: BTreeMap::new(),
            constant: RatFun::zero(syms),
        }
    }

    pub fn symbol(syms: &Symbols, m: MomentSymbol) -> Self {
        let mut e = MomentExpr::zero(syms);
        e.add_term(m, RatFun::one(syms));
        e
    }

    pub fn symbols(&self) -> &Symbols {
        &self.syms
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MomentSymbol, &RatFun)> {
        self.terms.iter()
    }

    pub fn constant(&self) -> &RatFun {
        &self.constant
    }

    pub fn coeff(&self, m: &MomentSymbol) -> Option<&RatFun> {
        self.terms.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len() + usize::from(!self.constant.is_zero())
    }

    pub fn add_term(&mut self, m: MomentSymbol, c: RatFun) {
        if c.is_zero() {
            return;
        }
        if m.i == 0 && m.j == 0 {
            if m.deriv == 0 {
                self.constant = &self.constant + &c;
            }
            return;
        }
        let next = match self.terms.get(&m) {
            Some(prev) => prev + &c,
            None => c,
        };
        if next.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, next);
        }
    }

    pub fn add_constant(&mut self, c: &RatFun) {
        self.constant = &self.constant + c;
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &MomentExpr, factor: &RatFun) {
        for (m, c) in &other.terms {
            self.add_term(*m, c * factor);
        }
        self.constant = &self.constant + &(&other.constant * factor);
    }

    pub fn scale(&self, factor: &RatFun) -> MomentExpr {
        let mut out = MomentExpr::zero(&self.syms);
        out.add_scaled(self, factor);
        out
    }

    pub fn remove(&mut self, m: &MomentSymbol) -> Option<RatFun> {
        self.terms.remove(m)
    }

    /// Time derivative: constants vanish, every symbol gains one derivative.
    pub fn derivative(&self) -> MomentExpr {
        MomentExpr {
            syms: self.syms.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.derivative(), c.clone()))
                .collect(),
            constant: RatFun::zero(&self.syms),
        }
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(MomentSymbol::order).max().unwrap_or(0)
    }

    /// Render as `c1*m(1,0)'' + c2*m(2,0) + c0` with parenthesised
    /// multi-term coefficients.
    pub fn to_text(&self) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (m, c) in &self.terms {
            parts.push(signed_coeff_text(c, Some(&m.to_text())));
        }
        if !self.constant.is_zero() {
            parts.push(signed_coeff_text(&self.constant, None));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (neg, body)) in parts.into_iter().enumerate() {
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        out
    }
}

fn signed_coeff_text(c: &RatFun, sym: Option<&str>) -> (bool, String) {
    if let Some(k) = c.as_constant() {
        let neg = k < Rational::zero();
        let abs = if neg { -k } else { k };
        let body = match sym {
            Some(s) if abs.is_one() => s.to_string(),
            Some(s) => format!("{}*{}", fmt_rational(&abs), s),
            None => fmt_rational(&abs),
        };
        return (neg, body);
    }
    let single = c.is_poly() && c.numer().num_terms() == 1;
    if single {
        let neg = c.numer().leading_coeff() < Rational::zero();
        let text = if neg { (-c).to_text() } else { c.to_text() };
        return (
            neg,
            match sym {
                Some(s) => format!("{text}*{s}"),
                None => text,
            },
        );
    }
    let text = format!("({})", c.to_text());
    (
        false,
        match sym {
            Some(s) => format!("{text}*{s}"),
            None => text,
        },
    )
}

impl fmt::Display for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomentExpr({})", self.to_text())
    }
}

/// A polynomial in the states split by `(x power, y power)`, with
/// coefficients over the parameter table.
type SplitPoly = Vec<((u32, u32), Poly)>;

/// The model reduced to what the moment recurrence consumes: drift and the
/// noise covariance, split by state monomial, observed state first.
#[derive(Debug, Clone)]
pub struct MomentModel {
    params: Symbols,
    fx: SplitPoly,
    fy: SplitPoly,
    gxx: SplitPoly,
    gxy: SplitPoly,
    gyy: SplitPoly,
}

fn split(p: &Poly, xi: usize, yi: usize, nstates: usize, params: &Symbols) -> SplitPoly {
    let mut acc: BTreeMap<(u32, u32), Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key = (m.0[xi], m.0[yi]);
        let rest = Monomial(m.0[nstates..].to_vec());
        acc.entry(key).or_default().push((rest, c.clone()));
    }
    acc.into_iter()
        .map(|(k, ts)| (k, Poly::from_terms(params, ts)))
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

impl MomentModel {
    pub fn new(model: &ModelSpec) -> Result<Self, DslError> {
        let obs = model.require_elimination_shape()?;
        let (xi, yi) = (obs, 1 - obs);
        let params = model.param_symbols();
        let g = model.noise_covariance();
        let sp = |p: &Poly| split(p, xi, yi, 2, &params);
        Ok(MomentModel {
            fx: sp(&model.drift[xi]),
            fy: sp(&model.drift[yi]),
            gxx: sp(&g[xi][xi]),
            gxy: sp(&g[xi][yi]),
            gyy: sp(&g[yi][yi]),
            params,
        })
    }

    pub fn params(&self) -> &Symbols {
        &self.params
    }

    /// Sources of the generator: (split polynomial, x shift, y shift, factor).
    fn sources(&self) -> [(&SplitPoly, i64, i64, Factor); 5] {
        [
            (&self.fx, -1, 0, Factor::I),
            (&self.fy, 0, -1, Factor::J),
            (&self.gxx, -2, 0, Factor::HalfII),
            (&self.gxy, -1, -1, Factor::IJ),
            (&self.gyy, 0, -2, Factor::HalfJJ),
        ]
    }

    /// Right-hand side of `m'_{i,j}`.
    pub fn moment_ode(&self, i: u32, j: u32) -> MomentExpr {
        let mut out = MomentExpr::zero(&self.params);
        for (poly, sx, sy, factor) in self.sources() {
            let k = factor.eval(i as i64, j as i64);
            if k.is_zero() {
                continue;
            }
            for ((a, b), coef) in poly {
                let p = i as i64 + sx + *a as i64;
                let q = j as i64 + sy + *b as i64;
                debug_assert!(p >= 0 && q >= 0);
                out.add_term(
                    MomentSymbol::new(p as u32, q as u32),
                    RatFun::from_poly(coef.scale(&k)),
                );
            }
        }
        out
    }

    /// Generic recurrence: for formal integers `i, j >= 2`, the coefficient
    /// of `m_{i+dp, j+dq}` as a polynomial in `i, j` and the parameters.
    pub fn generic_recurrence(&self) -> (Symbols, BTreeMap<(i64, i64), Poly>) {
        let table = Symbols::new(
            ["i", "j"]
                .into_iter()
                .map(String::from)
                .chain(self.params.names().iter().cloned()),
        );
        let iv = Poly::var_idx(&table, 0);
        let jv = Poly::var_idx(&table, 1);
        let one = Poly::one(&table);
        let half = Rational::new(1.into(), 2.into());
        let factor_poly = |f: Factor| -> Poly {
            match f {
                Factor::I => iv.clone(),
                Factor::J => jv.clone(),
                Factor::HalfII => (&iv * &(&iv - &one)).scale(&half),
                Factor::IJ => &iv * &jv,
                Factor::HalfJJ => (&jv * &(&jv - &one)).scale(&half),
            }
        };
        let mut out: BTreeMap<(i64, i64), Poly> = BTreeMap::new();
        for (poly, sx, sy, factor) in self.sources() {
            let fp = factor_poly(factor);
            for ((a, b), coef) in poly {
                let off = (sx + *a as i64, sy + *b as i64);
                let lifted = coef.rebase(&table).expect("parameter table embeds");
                let term = &fp * &lifted;
                let entry = out.entry(off).or_insert_with(|| Poly::zero(&table));
                *entry = &*entry + &term;
            }
        }
        out.retain(|_, p| !p.is_zero());
        (table, out)
    }

    pub fn stencil(&self) -> Stencil {
        Stencil {
            offsets: self.generic_recurrence().1.into_keys().collect(),
        }
    }
}

#[derive(Clone, Copy)]
enum Factor {
    I,
    J,
    HalfII,
    IJ,
    HalfJJ,
}

impl Factor {
    fn eval(self, i: i64, j: i64) -> Rational {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        match self {
            Factor::I => r(i, 1),
            Factor::J => r(j, 1),
            Factor::HalfII => r(i * (i - 1), 2),
            Factor::IJ => r(i * j, 1),
            Factor::HalfJJ => r(j * (j - 1), 2),
        }
    }
}

/// Offsets `(p - i, q - j)` of the moments in the generic `m'_{i,j}` equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stencil {
    pub offsets: BTreeSet<(i64, i64)>,
}

impl Stencil {
    /// Grid display: rows are `dp` ascending, columns `dq` ascending.
    pub fn grid(&self) -> String {
        if self.offsets.is_empty() {
            return String::new();
        }
        let (pmin, pmax) = min_max(self.offsets.iter().map(|o| o.0).chain([0]));
        let (qmin, qmax) = min_max(self.offsets.iter().map(|o| o.1).chain([0]));
        let cell = |dp: i64, dq: i64| -> String {
            let ix = match dp {
                0 => "i".to_string(),
                d if d > 0 => format!("i+{d}"),
                d => format!("i{d}"),
            };
            let jx = match dq {
                0 => "j".to_string(),
                d if d > 0 => format!("j+{d}"),
                d => format!("j{d}"),
            };
            format!("m[{ix},{jx}]")
        };
        let width = 12;
        let mut out = String::new();
        for dp in pmin..=pmax {
            let row: Vec<String> = (qmin..=qmax)
                .map(|dq| {
                    let s = if self.offsets.contains(&(dp, dq)) {
                        cell(dp, dq)
                    } else {
                        "-".into()
                    };
                    format!("{s:^width$}")
                })
                .collect();
            out.push_str(row.join(" ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn min_max(it: impl Iterator<Item = i64>) -> (i64, i64) {
    it.fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applicability {
    Applicable { notes: Vec<String> },
    NotApplicable { reason: String },
}

impl Applicability {
    pub fn is_applicable(&self) -> bool {
        matches!(self, Applicability::Applicable { .. })
    }
}

fn fmt_offset((dp, dq): (i64, i64)) -> String {
    format!("({dp:+},{dq:+})").replace("+0", "0")
}

/// Every offset must satisfy `dq <= 0`, or `dq = +1` with `dp <= -1`.
pub fn check_applicability(stencil: &Stencil) -> Applicability {
    let mut notes = Vec::new();
    for &(dp, dq) in &stencil.offsets {
        if dq <= 0 {
            continue;
        }
        if dq == 1 && dp <= -1 {
            if dp < -1 {
                notes.push(format!(
                    "offset {} couples m[i-1,j+1] to m[i{dp},j+1]; unobserved moments are solved iteratively, smallest p first",
                    fmt_offset((dp, dq))
                ));
            }
            continue;
        }
        let reason = if dq == 1 {
            format!("stencil offset {} violates p < i for q = j + 1", fmt_offset((dp, dq)))
        } else {
            format!("stencil offset {} violates q <= j + 1", fmt_offset((dp, dq)))
        };
        return Applicability::NotApplicable { reason };
    }
    Applicability::Applicable { notes }
}

/// Moments up to a fixed total order as a linear ODE `v' = M v + c`, for
/// models whose recurrence closes (every `m'_{i,j}` references only moments
/// of order `<= i + j`). Parameters are numeric.
#[derive(Debug, Clone)]
pub struct ClosedSystem {
    pub moments: Vec<MomentSymbol>,
    pub matrix: nalgebra::DMatrix<f64>,
    pub offset: nalgebra::DVector<f64>,
}

impl ClosedSystem {
    /// `None` when some equation reaches past `order`.
    pub fn new(model: &MomentModel, order: u32, theta: &[f64]) -> Option<Self> {
        let moments: Vec<MomentSymbol> = (1..=order)
            .flat_map(|k| (0..=k).rev().map(move |i| MomentSymbol::new(i, k - i)))
            .collect();
        let index: BTreeMap<MomentSymbol, usize> =
            moments.iter().enumerate().map(|(k, m)| (*m, k)).collect();
        let n = moments.len();
        let mut matrix = nalgebra::DMatrix::zeros(n, n);
        let mut offset = nalgebra::DVector::zeros(n);
        for (row, m) in moments.iter().enumerate() {
            let rhs = model.moment_ode(m.i, m.j);
            offset[row] = rhs.constant().eval_f64(theta);
            for (sym, coeff) in rhs.terms() {
                let col = *index.get(sym)?;
                matrix[(row, col)] = coeff.eval_f64(theta);
            }
        }
        Some(ClosedSystem { moments, matrix, offset })
    }

    pub fn index_of(&self, m: MomentSymbol) -> Option<usize> {
        self.moments.iter().position(|s| *s == m)
    }

    /// Moments of a point mass at `(x0, y0)`.
    pub fn point_mass(&self, x0: f64, y0: f64) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(
            self.moments.len(),
            self.moments
                .iter()
                .map(|m| x0.powi(m.i as i32) * y0.powi(m.j as i32)),
        )
    }

    /// Exact solution at time `t` through the exponential of the augmented
    /// matrix `[[M, c], [0, 0]]`.
    pub fn solve(&self, v0: &nalgebra::DVector<f64>, t: f64) -> nalgebra::DVector<f64> {
        let n = self.moments.len();
        let mut aug = nalgebra::DMatrix::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.matrix * t));
        aug.view_mut((0, n), (n, 1)).copy_from(&(&self.offset * t));
        let e = crate::ou::expm(&aug);
        let mut x = nalgebra::DVector::zeros(n + 1);
        x.rows_mut(0, n).copy_from(v0);
        x[n] = 1.0;
        (e * x).rows(0, n).into_owned()
    }

    /// `v, v', v'', ...` up to `k` derivatives at a state `v`.
    pub fn derivatives(&self, v: &nalgebra::DVector<f64>, k: u32) -> Vec<nalgebra::DVector<f64>> {
        let mut out = vec![v.clone()];
        for d in 0..k {
            let mut next = &self.matrix * &out[d as usize];
            if d == 0 {
                next += &self.offset;
            }
            out.push(next);
        }
        out
    }
}

/// Convenience wrappers taking a parsed model.
pub fn moment_ode(model: &ModelSpec, i: u32, j: u32) -> Result<MomentExpr, DslError> {
    Ok(MomentModel::new(model)?.moment_ode(i, j))
}

pub fn stencil(model: &ModelSpec) -> Result<Stencil, DslError> {
    Ok(MomentModel::new(model)?.stencil())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin_model;
    use crate::symbolic::parse_expr;

    fn mm(id: &str) -> MomentModel {
        MomentModel::new(&builtin_model(id).unwrap()).unwrap()
    }

    fn coef(m: &MomentModel, s: &str) -> RatFun {
        RatFun::from_poly(parse_expr(s, m.params()).unwrap())
    }

    fn expr(m: &MomentModel, terms: &[(u32, u32, &str)], constant: &str) -> MomentExpr {
        let mut e = MomentExpr::zero(m.params());
        for (i, j, c) in terms {
            e.add_term(MomentSymbol::new(*i, *j), coef(m, c));
        }
        e.add_constant(&coef(m, constant));
        e
    }

    #[test]
    fn ou2_first_and_second_order_equations() {
        let m = mm("ou2");
        assert_eq!(
            m.moment_ode(1, 0),
            expr(&m, &[(1, 0, "-a"), (0, 1, "-b")], "a*e + b*f")
        );
        assert_eq!(
            m.moment_ode(0, 1),
            expr(&m, &[(1, 0, "-c"), (0, 1, "-d")], "c*e + d*f")
        );
        assert_eq!(
            m.moment_ode(2, 0),
            expr(&m, &[(1, 0, "2*(a*e + b*f)"), (2, 0, "-2*a"), (1, 1, "-2*b")], "p^2")
        );
        assert_eq!(
            m.moment_ode(0, 2),
            expr(&m, &[(0, 1, "2*(c*e + d*f)"), (0, 2, "-2*d"), (1, 1, "-2*c")], "r^2 + s^2")
        );
        assert_eq!(
            m.moment_ode(1, 1),
            expr(
                &m,
                &[
                    (1, 0, "c*e + d*f"),
                    (0, 1, "a*e + b*f"),
                    (2, 0, "-c"),
                    (0, 2, "-b"),
                    (1, 1, "-(a + d)")
                ],
                "p*r"
            )
        );
    }

    #[test]
    fn geometric_generic_diagonal_coefficient() {
        let m = mm("geometric2");
        let (table, rec) = m.generic_recurrence();
        let expected = parse_expr(
            "i*j*p*r - a*i - d*j + (i*(i - 1)*p^2 + j*(j - 1)*(r^2 + s^2))/2",
            &table,
        )
        .unwrap();
        assert_eq!(rec[&(0, 0)], expected);
        assert_eq!(rec[&(-1, 0)], parse_expr("(a*e + b*f)*i", &table).unwrap());
        assert_eq!(rec[&(0, -1)], parse_expr("(c*e + d*f)*j", &table).unwrap());
        assert_eq!(rec[&(-1, 1)], parse_expr("-b*i", &table).unwrap());
        assert_eq!(rec[&(1, -1)], parse_expr("-c*j", &table).unwrap());
        assert_eq!(rec.len(), 5);
    }

    #[test]
    fn geometric_constant_term_has_no_m00_symbol() {
        let m = mm("geometric2");
        let e = m.moment_ode(1, 0);
        assert_eq!(e.constant(), &coef(&m, "a*e + b*f"));
        assert!(e.coeff(&MomentSymbol::new(0, 0)).is_none());
    }

    #[test]
    fn lv_simple_second_unobserved_moment() {
        let m = mm("lv_simple");
        assert_eq!(
            m.moment_ode(0, 2),
            expr(&m, &[(0, 2, "2*c"), (1, 2, "2*d")], "s^2")
        );
    }

    fn offsets(v: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
        v.iter().copied().collect()
    }

    #[test]
    fn stencils_of_builtins() {
        assert_eq!(
            mm("semilogistic").stencil().offsets,
            offsets(&[(-2, 0), (-1, -1), (-1, 1), (0, -2), (0, 0), (1, -1), (1, 0), (2, -1)])
        );
        assert!(mm("lv_full").stencil().offsets.contains(&(0, 1)));
        assert_eq!(
            mm("lv_simple").stencil().offsets,
            offsets(&[(-2, 0), (-1, 1), (0, -2), (0, 0), (1, 0)])
        );
        assert_eq!(
            mm("cle").stencil().offsets,
            offsets(&[
                (-2, 0), (-2, 1), (-1, 0), (-1, 1), (0, -2), (0, -1), (0, 0),
                (1, -1), (1, 0), (2, -2), (2, -1)
            ])
        );
    }

    #[test]
    fn ou2_stencil_matches_concrete_equation_at_3_3() {
        // oracle: offsets read off the concrete m'_{3,3} equation
        let m = mm("ou2");
        let concrete: BTreeSet<(i64, i64)> = m
            .moment_ode(3, 3)
            .terms()
            .map(|(s, _)| (s.i as i64 - 3, s.j as i64 - 3))
            .collect();
        assert_eq!(m.stencil().offsets, concrete);
        assert_eq!(
            concrete,
            offsets(&[(-1, 0), (0, -1), (-1, 1), (1, -1), (0, 0), (-2, 0), (0, -2), (-1, -1)])
        );
    }

    #[test]
    fn applicability_verdicts() {
        for id in ["ou2", "geometric2", "semilogistic", "lv_simple", "linear_unobs(2)"] {
            assert!(check_applicability(&mm(id).stencil()).is_applicable(), "{id}");
        }
        match check_applicability(&mm("lv_full").stencil()) {
            Applicability::NotApplicable { reason } => {
                assert!(reason.contains("(0,+1)"), "{reason}");
                assert!(reason.contains("p < i"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
        match check_applicability(&mm("cle").stencil()) {
            Applicability::Applicable { notes } => {
                assert_eq!(notes.len(), 1);
                assert!(notes[0].contains("(-2,+1)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moment_ode_is_linear_and_closed_for_linear_models() {
        for id in ["ou2", "geometric2"] {
            let m = mm(id);
            for i in 0..=6u32 {
                for j in 0..=(6 - i) {
                    if i + j == 0 {
                        continue;
                    }
                    let e = m.moment_ode(i, j);
                    assert!(e.max_order() <= i + j, "{id} ({i},{j})");
                    assert!(e.terms().all(|(s, _)| s.deriv == 0));
                }
            }
        }
    }

    #[test]
    fn moment_symbol_text_round_trip() {
        let s = MomentSymbol::with_deriv(12, 3, 2);
        assert_eq!(s.to_text(), "m(12,3)''");
        assert_eq!(MomentSymbol::parse(&s.to_text()), Some(s));
    }

    #[test]
    fn non_elimination_shape_rejected() {
        let src = "model m\nstates: x, y\nparams: a\ndrift:\n  x: -a*x\n  y: -a*y\ndiffusion:\n  x: [1]\n  y: [1]\n";
        let spec = crate::dsl::parse_model(src).unwrap();
        assert!(MomentModel::new(&spec).is_err());
    }
}
