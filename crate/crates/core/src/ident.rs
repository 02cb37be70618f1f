//! Identifiable parameter combinations from necessarily satisfied equations.
//!
//! The coefficients of a monic NSE are identifiable. They are collected over
//! orders, reduced by field-preserving rewrites, and certified by the rank of
//! their Jacobian at random exact rational points.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{Builtin, ModelSpec};
use crate::elimination::{ElimError, Eliminator, Nse};
use crate::symbolic::{parse_expr, Poly, RatFun, Rational, Symbols};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentError {
    #[error(transparent)]
    Elimination(#[from] ElimError),
    #[error("degenerate NSE: {0}")]
    Degenerate(String),
    #[error("no published set for model `{model}` in regime `{regime}`")]
    UnknownCatalogEntry { model: String, regime: String },
}

/// Monic coefficients of `nse`, pivot excluded, constant term last.
pub fn extract_combos(nse: &Nse) -> Result<Vec<RatFun>, IdentError> {
    if nse.expr.num_terms() < 2 {
        return Err(IdentError::Degenerate(nse.to_text()));
    }
    let monic = nse.monic();
    let pivot = nse.pivot();
    let mut out: Vec<RatFun> = monic
        .terms()
        .filter(|(m, _)| **m != pivot)
        .map(|(_, c)| c.clone())
        .collect();
    if !monic.constant().is_zero() {
        out.push(monic.constant().clone());
    }
    Ok(out)
}

/// Scale so the numerator has coprime integer coefficients and a positive
/// leading term.
pub fn normalize_combo(c: &RatFun) -> RatFun {
    if c.is_zero() {
        return c.clone();
    }
    let num = c.numer();
    let mut lcm_den = BigInt::one();
    let mut gcd_num = BigInt::zero();
    for (_, k) in num.terms() {
        lcm_den = num_integer::lcm(lcm_den, k.denom().clone());
        gcd_num = num_integer::gcd(gcd_num, k.numer().clone());
    }
    let mut s = Rational::new(lcm_den, gcd_num);
    if num.leading_coeff().is_negative() {
        s = -s;
    }
    c.scale(&s)
}

/// Jacobian-rank certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCertificate {
    pub rank: usize,
    /// Evaluation points, one rational per parameter.
    pub points: Vec<Vec<String>>,
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let mut n: i64 = 0;
    while n == 0 {
        n = rng.random_range(-99..=99);
    }
    let d: i64 = rng.random_range(1..=9);
    Rational::new(n.into(), d.into())
}

/// Random points at which every listed function is defined.
fn sample_points(syms: &Symbols, funcs: &[&RatFun], trials: usize, seed: u64) -> Vec<Vec<Rational>> {
    (0..trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            loop {
                let pt: Vec<Rational> = (0..syms.len()).map(|_| random_rational(&mut rng)).collect();
                if funcs.iter().all(|f| !f.denom().eval_slice(&pt).is_zero()) {
                    break pt;
                }
            }
        })
        .collect()
}

/// Symbolic Jacobian rows, one per combination.
fn jacobian(combos: &[RatFun], nparams: usize) -> Vec<Vec<RatFun>> {
    combos
        .iter()
        .map(|c| (0..nparams).map(|j| c.diff_idx(j)).collect())
        .collect()
}

fn eval_rows(rows: &[Vec<RatFun>], pt: &[Rational]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|f| f.eval_slice(pt).expect("point avoids poles"))
                .collect()
        })
        .collect()
}

/// Rank by exact Gaussian elimination.
pub fn rank_exact(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = m[rank][col].recip();
        for r in rank + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..cols {
                let delta = &f * &m[rank][c];
                m[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn check_table(combos: &[RatFun], params: &Symbols) {
    for c in combos {
        assert!(c.symbols() == params, "combination over a different symbol table");
    }
}

/// Maximum over `trials` random points of the rank of the Jacobian of
/// `combos` with respect to `params`.
pub fn jacobian_rank(combos: &[RatFun], params: &Symbols, trials: usize, seed: u64) -> RankCertificate {
    check_table(combos, params);
    let rows = jacobian(combos, params.len());
    let mut funcs: Vec<&RatFun> = combos.iter().collect();
    funcs.extend(rows.iter().flatten());
    let points = sample_points(params, &funcs, trials.max(1), seed);
    let rank = points
        .iter()
        .map(|pt| rank_exact(eval_rows(&rows, pt)))
        .max()
        .unwrap_or(0);
    RankCertificate {
        rank,
        points: points
            .iter()
            .map(|p| p.iter().map(crate::symbolic::fmt_rational).collect())
            .collect(),
    }
}

/// True when both sets have the same Jacobian rank as their union at every
/// sampled point.
pub fn same_information(a: &[RatFun], b: &[RatFun], params: &Symbols, trials: usize, seed: u64) -> bool {
    check_table(a, params);
    check_table(b, params);
    let ja = jacobian(a, params.len());
    let jb = jacobian(b, params.len());
    let mut funcs: Vec<&RatFun> = a.iter().chain(b).collect();
    funcs.extend(ja.iter().chain(&jb).flatten());
    sample_points(params, &funcs, trials.max(1), seed)
        .iter()
        .all(|pt| {
            let ea = eval_rows(&ja, pt);
            let eb = eval_rows(&jb, pt);
            let ra = rank_exact(ea.clone());
            let rb = rank_exact(eb.clone());
            let rab = rank_exact(ea.into_iter().chain(eb).collect());
            ra == rb && rb == rab
        })
}

const REDUCE_SEED: u64 = 0x5eed;
const REDUCE_TRIALS: usize = 3;
const REDUCE_MAX_PASSES: usize = 64;

/// Single parameter isolated by a degree-one monomial combination.
fn isolated_var(c: &RatFun) -> Option<usize> {
    let p = c.as_poly()?;
    if p.num_terms() != 1 || p.total_degree() != 1 {
        return None;
    }
    p.support().first().copied()
}

fn support_within(p: &Poly, vars: &BTreeSet<usize>) -> bool {
    p.support().iter().all(|v| vars.contains(v))
}

/// One rewrite of `f` using the rest of the set; `None` when nothing applies.
fn rewrite(f: &Poly, others: &[&RatFun], isolated: &BTreeSet<usize>) -> Option<Poly> {
    let syms = f.symbols();
    // terms that are functions of isolated parameters alone
    let kept: Vec<_> = f
        .terms()
        .filter(|(m, _)| !m.0.iter().enumerate().all(|(i, &e)| e == 0 || isolated.contains(&i)))
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect();
    if !kept.is_empty() && kept.len() < f.num_terms() {
        return Some(Poly::from_terms(syms, kept));
    }
    for &v in isolated {
        if f.degree_in(v) > 0 {
            let x = Poly::var_idx(syms, v);
            if let Some(q) = f.div_exact(&x) {
                if !q.is_constant() {
                    return Some(q);
                }
            }
        }
    }
    for g in others.iter().filter_map(|g| g.as_poly()) {
        if g.is_constant() || g == f {
            continue;
        }
        if g.total_degree() <= f.total_degree() && g.num_terms() <= f.num_terms() {
            if let Some(q) = f.div_exact(g) {
                if !q.is_constant() {
                    return Some(q);
                }
            }
        }
    }
    for g in others.iter().filter_map(|g| g.as_poly()) {
        if g.is_constant() || g.num_terms() > f.num_terms() {
            continue;
        }
        for (m, gc) in g.terms() {
            let fc = f.coeff(m);
            if fc.is_zero() {
                continue;
            }
            let h = f - &g.scale(&(&fc / gc));
            if !h.is_zero() && !h.is_constant() && h.num_terms() < f.num_terms() {
                return Some(h);
            }
        }
    }
    None
}

fn tidy(set: Vec<RatFun>) -> Vec<RatFun> {
    let mut out: Vec<RatFun> = Vec::new();
    for c in set {
        if c.as_constant().is_some() {
            continue;
        }
        let c = normalize_combo(&c);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Heuristic simplification of a generating set. Every rewrite keeps the
/// generated field: scaling by constants, exact division by another member,
/// subtracting a rational multiple of another member, removing terms in
/// already isolated parameters, and dropping members that depend on isolated
/// parameters only. Falls back to the normalised input if the Jacobian rank
/// changes.
pub fn reduce_combos(combos: &[RatFun]) -> Vec<RatFun> {
    let input = tidy(combos.to_vec());
    let Some(syms) = input.first().map(|c| c.symbols().clone()) else {
        return input;
    };
    let mut set = input.clone();
    for _ in 0..REDUCE_MAX_PASSES {
        let isolated: BTreeSet<usize> = set.iter().filter_map(isolated_var).collect();
        let mut changed = false;
        for k in 0..set.len() {
            let Some(f) = set[k].as_poly().cloned() else {
                continue;
            };
            if isolated_var(&set[k]).is_some() {
                continue;
            }
            let others: Vec<&RatFun> = set
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, c)| c)
                .collect();
            if let Some(g) = rewrite(&f, &others, &isolated) {
                set[k] = RatFun::from_poly(g);
                changed = true;
                break;
            }
        }
        let isolated: BTreeSet<usize> = set.iter().filter_map(isolated_var).collect();
        let before = set.len();
        set.retain(|c| {
            isolated_var(c).is_some()
                || !(support_within(c.numer(), &isolated) && support_within(c.denom(), &isolated))
        });
        changed |= set.len() != before;
        let tidied = tidy(set.clone());
        changed |= tidied.len() != set.len();
        set = tidied;
        if !changed {
            break;
        }
    }
    set.sort_by_key(|c| (c.numer().total_degree(), c.numer().num_terms(), c.to_text()));
    let r_in = jacobian_rank(&input, &syms, REDUCE_TRIALS, REDUCE_SEED).rank;
    let r_out = jacobian_rank(&set, &syms, REDUCE_TRIALS, REDUCE_SEED).rank;
    if r_in == r_out {
        set
    } else {
        input
    }
}

/// Identifiable combinations with their rank certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentSet {
    pub combos: Vec<RatFun>,
    pub source_orders: Vec<u32>,
    pub rank: usize,
    pub rank_points: Vec<Vec<String>>,
    pub reduced: bool,
}

impl IdentSet {
    pub fn new(combos: Vec<RatFun>, params: &Symbols, source_orders: Vec<u32>, reduced: bool, trials: usize, seed: u64) -> Self {
        let cert = jacobian_rank(&combos, params, trials, seed);
        IdentSet {
            combos,
            source_orders,
            rank: cert.rank,
            rank_points: cert.points,
            reduced,
        }
    }

    pub fn texts(&self) -> Vec<String> {
        self.combos.iter().map(RatFun::to_text).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "combos": self.texts(),
            "source_orders": self.source_orders,
            "rank": self.rank,
            "rank_points": self.rank_points,
            "reduced": if self.reduced { "heuristic" } else { "none" },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderResult {
    pub order: u32,
    pub nse: Nse,
    pub combos: Vec<RatFun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub model: String,
    pub params: Symbols,
    pub orders: Vec<OrderResult>,
    /// Every extracted coefficient, normalised.
    pub raw: IdentSet,
    pub reduced: IdentSet,
    pub conditions: Vec<Poly>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

/// NSEs of orders `1..=max_order`, their coefficients, and the reduced set.
pub fn analyze(model: &ModelSpec, max_order: u32, trials: usize, seed: u64) -> Result<Analysis, IdentError> {
    let mut el = Eliminator::new(model)?;
    let params = model.param_symbols();
    let mut orders = Vec::new();
    let mut all = Vec::new();
    let mut warnings = Vec::new();
    for k in 1..=max_order.max(1) {
        let nse = el.nse(k)?;
        let combos = extract_combos(&nse)?;
        all.extend(combos.iter().cloned());
        warnings.extend(nse.warnings.iter().map(|w| format!("order {k}: {w}")));
        orders.push(OrderResult { order: k, nse, combos });
    }
    el.verify_resubstitution()?;
    let conditions = orders.last().map(|o| o.nse.conditions.clone()).unwrap_or_default();
    let source: Vec<u32> = (1..=max_order.max(1)).collect();
    let raw = IdentSet::new(tidy(all.clone()), &params, source.clone(), false, trials, seed);
    let reduced = IdentSet::new(reduce_combos(&all), &params, source, true, trials, seed);
    let mut notes = vec![format!(
        "orders 1..={} analysed; higher orders may add combinations",
        max_order.max(1)
    )];
    if reduced.combos.iter().any(|c| c.numer().total_degree() > 1) {
        notes.push("non-linear combinations certify local identifiability only".into());
    }
    Ok(Analysis {
        model: model.name.clone(),
        params,
        orders,
        raw,
        reduced,
        conditions,
        warnings,
        notes,
    })
}

/// A published set of identifiable combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSet {
    pub model: String,
    pub regime: String,
    pub symbols: Symbols,
    pub combos: Vec<Poly>,
    /// NSE order through which `analyze` should reproduce the set, when the
    /// regime is the moment-equation one.
    pub compare_order: Option<u32>,
    pub description: &'static str,
}

impl KnownSet {
    pub fn as_ratfuns(&self) -> Vec<RatFun> {
        self.combos.iter().cloned().map(RatFun::from_poly).collect()
    }

    pub fn texts(&self) -> Vec<String> {
        self.combos.iter().map(Poly::to_text).collect()
    }
}

struct Entry {
    regime: &'static str,
    extra_symbols: &'static [&'static str],
    combos: &'static [&'static str],
    compare_order: Option<u32>,
    description: &'static str,
}

const OU2: &[Entry] = &[
    Entry {
        regime: "moments",
        extra_symbols: &[],
        combos: &["a + d", "a*d - b*c", "e"],
        compare_order: Some(1),
        description: "first and second observed moments, arbitrary initial moments",
    },
    Entry {
        regime: "stationary",
        extra_symbols: &[],
        combos: &["a + d", "a*d - b*c", "e", "p", "(d*p - b*r)^2 + b^2*s^2"],
        compare_order: None,
        description: "trajectories sampled at statistical equilibrium",
    },
    Entry {
        regime: "constant_ic",
        extra_symbols: &["x0", "y0"],
        combos: &["a + d", "a*d - b*c", "e", "p", "d*p - b*r", "b^2*s^2", "d*(x0 - e) + b*(y0 - f)"],
        compare_order: None,
        description: "x(0) = x0 and y(0) = y0 fixed, y0 unobserved",
    },
    Entry {
        regime: "perturbed_ic",
        extra_symbols: &[],
        combos: &["a", "b*c", "d", "e", "p", "(d*p - b*r)^2 + b^2*s^2"],
        compare_order: None,
        description: "x(0) fixed, y(0) at its stationary marginal",
    },
    Entry {
        regime: "independent_xy",
        extra_symbols: &[],
        combos: &[
            "a + d",
            "a*d - b*c",
            "e",
            "f",
            "p",
            "r^2 + s^2",
            "(c*p - a*r)^2 + a^2*s^2",
            "(d*p - b*r)^2 + b^2*s^2",
        ],
        compare_order: None,
        description: "x and y each observed at equilibrium in separate experiments",
    },
];

const GEOMETRIC2: &[Entry] = &[Entry {
    regime: "general",
    extra_symbols: &[],
    combos: &["a", "d", "b*c", "b*f", "e", "p*r", "r^2", "s^2"],
    compare_order: Some(2),
    description: "moments up to second order",
}];

const SEMILOGISTIC: &[Entry] = &[
    Entry {
        regime: "ode",
        extra_symbols: &[],
        combos: &["a*b", "a + f", "a*f - c*d", "a*b*f - c*d*e"],
        compare_order: Some(1),
        description: "deterministic limit; first-order NSE",
    },
    Entry {
        regime: "general",
        extra_symbols: &[],
        combos: &[
            "a*b",
            "a + f",
            "a*f - c*d",
            "a*b*f - c*d*e",
            "p",
            "c^2",
            "(f*p - c*r)^2 + c^2*s^2",
        ],
        compare_order: Some(2),
        description: "NSEs through second order",
    },
];

const LV_SIMPLE: &[Entry] = &[
    Entry {
        regime: "ode",
        extra_symbols: &[],
        combos: &["a", "c", "d", "p^2"],
        compare_order: Some(1),
        description: "first-order NSE",
    },
    Entry {
        regime: "general",
        extra_symbols: &[],
        combos: &["a", "c", "d", "p^2", "b^2*s^2"],
        compare_order: Some(3),
        description: "NSEs through third order",
    },
];

const CLE: &[Entry] = &[
    Entry {
        regime: "ode",
        extra_symbols: &[],
        combos: &[
            "alpha",
            "delta",
            "beta + zeta",
            "(beta + delta)*zeta",
            "2*beta*gamma + (beta + delta)*epsilon",
        ],
        compare_order: Some(1),
        description: "large-molecule limit; first-order NSE",
    },
    Entry {
        regime: "general",
        extra_symbols: &[],
        combos: &[
            "alpha",
            "delta",
            "beta + zeta",
            "(beta + delta)*zeta",
            "2*beta*gamma + (beta + delta)*epsilon",
            "4*epsilon + 3*zeta",
        ],
        compare_order: Some(2),
        description: "NSEs through second order",
    },
];

fn entries(b: &Builtin) -> &'static [Entry] {
    match b {
        Builtin::Ou2 => OU2,
        Builtin::Geometric2 => GEOMETRIC2,
        Builtin::SemiLogistic => SEMILOGISTIC,
        Builtin::LvSimple => LV_SIMPLE,
        Builtin::Cle => CLE,
        Builtin::LvFull | Builtin::LinearUnobs(_) => &[],
    }
}

/// The published linear-in-unobserved relation's coefficient set.
fn linear_unobs_set(n: u32, model: &ModelSpec) -> Vec<Poly> {
    let syms = model.param_symbols();
    let p = |s: &str| parse_expr(s, &syms).expect("catalog expression");
    let mut out = vec![p("b + c1")];
    out.extend((2..=n).map(|j| p(&format!("c{j}"))));
    out.extend((0..=n).map(|j| p(&format!("a*d{j} + b*c{j}"))));
    out
}

/// Regimes published for a builtin model.
pub fn known_regimes(model_id: &str) -> Vec<String> {
    match Builtin::parse(model_id) {
        Ok(Builtin::LinearUnobs(_)) => vec!["general".into()],
        Ok(b) => entries(&b).iter().map(|e| e.regime.to_string()).collect(),
        Err(_) => Vec::new(),
    }
}

pub fn known_results(model_id: &str, regime: &str) -> Result<KnownSet, IdentError> {
    let unknown = || IdentError::UnknownCatalogEntry {
        model: model_id.to_string(),
        regime: regime.to_string(),
    };
    let builtin = Builtin::parse(model_id).map_err(|_| unknown())?;
    let model = builtin.model();
    if let Builtin::LinearUnobs(n) = builtin {
        if regime != "general" {
            return Err(unknown());
        }
        return Ok(KnownSet {
            model: builtin.id(),
            regime: regime.into(),
            symbols: model.param_symbols(),
            combos: linear_unobs_set(n, &model),
            compare_order: Some(1),
            description: "leading-order input-output relation",
        });
    }
    let e = entries(&builtin).iter().find(|e| e.regime == regime).ok_or_else(unknown)?;
    let symbols = Symbols::new(
        model
            .params
            .iter()
            .map(String::as_str)
            .chain(e.extra_symbols.iter().copied()),
    );
    let combos = e
        .combos
        .iter()
        .map(|s| parse_expr(s, &symbols).expect("catalog expression"))
        .collect();
    Ok(KnownSet {
        model: builtin.id(),
        regime: regime.into(),
        symbols,
        combos,
        compare_order: e.compare_order,
        description: e.description,
    })
}

/// Verdict of comparing an analysis with a published set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub regime: String,
    pub order: u32,
    pub same_information: bool,
    pub ours_rank: usize,
    pub published_rank: usize,
    pub union_rank: usize,
}

/// Compare the combinations extracted through `known.compare_order` with
/// the published set.
pub fn compare_with_known(analysis: &Analysis, known: &KnownSet, trials: usize, seed: u64) -> Option<Comparison> {
    let order = known.compare_order?;
    if known.symbols != analysis.params {
        return None;
    }
    let ours: Vec<RatFun> = analysis
        .orders
        .iter()
        .filter(|o| o.order <= order)
        .flat_map(|o| o.combos.iter().cloned())
        .collect();
    if analysis.orders.iter().all(|o| o.order < order) {
        return None;
    }
    let theirs = known.as_ratfuns();
    let params = &analysis.params;
    let union: Vec<RatFun> = ours.iter().chain(&theirs).cloned().collect();
    Some(Comparison {
        regime: known.regime.clone(),
        order,
        same_information: same_information(&ours, &theirs, params, trials, seed),
        ours_rank: jacobian_rank(&ours, params, trials, seed).rank,
        published_rank: jacobian_rank(&theirs, params, trials, seed).rank,
        union_rank: jacobian_rank(&union, params, trials, seed).rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin_model;
    use crate::elimination::derive_nse;

    fn rf(s: &str, syms: &Symbols) -> RatFun {
        RatFun::from_poly(parse_expr(s, syms).unwrap())
    }

    fn set(v: &[&str], syms: &Symbols) -> Vec<RatFun> {
        v.iter().map(|s| rf(s, syms)).collect()
    }

    #[test]
    fn geometric_combos() {
        let model = builtin_model("geometric2").unwrap();
        let syms = model.param_symbols();
        let combos = extract_combos(&derive_nse(&model, 1).unwrap()).unwrap();
        assert_eq!(combos, set(&["a + d", "a*d - b*c", "b*c*e - a*d*e"], &syms));
        assert_eq!(
            reduce_combos(&combos),
            set(&["e", "a + d", "a*d - b*c"], &syms)
        );
    }

    #[test]
    fn lv_simple_combos_reduce_to_individual_parameters() {
        let model = builtin_model("lv_simple").unwrap();
        let syms = model.param_symbols();
        let combos = extract_combos(&derive_nse(&model, 1).unwrap()).unwrap();
        let expected = set(&["-1/2*d", "-a - c", "a*d", "a*c", "1/2*d*p^2"], &syms);
        assert_eq!(combos, expected);
        assert_eq!(reduce_combos(&combos), set(&["a", "c", "d", "p^2"], &syms));
    }

    #[test]
    fn cle_reduction() {
        let model = builtin_model("cle").unwrap();
        let syms = model.param_symbols();
        let combos = extract_combos(&derive_nse(&model, 1).unwrap()).unwrap();
        let reduced = reduce_combos(&combos);
        assert_eq!(
            reduced,
            set(
                &[
                    "alpha",
                    "delta",
                    "beta + zeta",
                    "beta*zeta + delta*zeta",
                    "2*beta*gamma + beta*epsilon + delta*epsilon"
                ],
                &syms
            )
        );
    }

    #[test]
    fn sum_and_difference() {
        let syms = Symbols::new(["a", "b"]);
        assert_eq!(reduce_combos(&set(&["a + b", "a - b"], &syms)), set(&["a", "b"], &syms));
    }

    #[test]
    fn rank_examples() {
        let syms = Symbols::new(["a", "b", "c", "d", "e"]);
        let r = jacobian_rank(&set(&["a + d", "a*d - b*c", "e"], &syms), &syms, 5, 1);
        assert_eq!(r.rank, 3);
        assert_eq!(r.points.len(), 5);
        let r = jacobian_rank(&set(&["a", "a^2"], &syms), &syms, 3, 1);
        assert_eq!(r.rank, 1);
        assert_eq!(jacobian_rank(&[], &syms, 3, 1).rank, 0);
    }

    #[test]
    fn information_comparison() {
        let syms = Symbols::new(["a", "b"]);
        assert!(!same_information(&set(&["a + b"], &syms), &set(&["a - b"], &syms), &syms, 5, 0));
        assert!(same_information(&set(&["a + b", "a - b"], &syms), &set(&["a", "b"], &syms), &syms, 5, 0));
    }

    #[test]
    fn catalog_lookups() {
        let k = known_results("ou2", "perturbed_ic").unwrap();
        assert_eq!(k.combos.len(), 6);
        let k = known_results("ou2", "constant_ic").unwrap();
        assert_eq!(k.symbols.names().last().unwrap(), "y0");
        assert!(known_results("ou2", "nonsense").is_err());
        assert!(known_results("lv_full", "general").is_err());
        assert_eq!(known_results("linear_unobs(2)", "general").unwrap().combos.len(), 5);
    }

    #[test]
    fn extraction_is_scale_invariant() {
        let model = builtin_model("semilogistic").unwrap();
        let nse = derive_nse(&model, 1).unwrap();
        let mut scaled = nse.clone();
        let k = rf("3*a - c^2", &model.param_symbols());
        scaled.expr = nse.expr.scale(&k);
        assert_eq!(extract_combos(&nse).unwrap(), extract_combos(&scaled).unwrap());
    }
}
