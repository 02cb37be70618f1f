//! Elimination of unobserved moments into necessarily satisfied equations.
//!
//! Each unobserved `m_{p,q}` (`q >= 1`) is solved from the equation of
//! `m'_{p+1,q-1}`, where it enters through the `(-1,+1)` stencil offset.
//! Every other moment in that equation is either of lower `q`, or of the same
//! `q` and smaller `p`, so a memoised recursion over `(q, p)` terminates. An
//! NSE of order `k` is then `d/dt S(0,k) - rhs(0,k)` with every unobserved
//! moment replaced by its solution.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{DslError, ModelSpec};
use crate::moments::{check_applicability, Applicability, MomentExpr, MomentModel, MomentSymbol};
use crate::symbolic::{poly_gcd, poly_lcm, Poly, RatFun, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElimError {
    #[error(transparent)]
    Model(#[from] DslError),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("cannot solve for {target} from the equation of {equation}'")]
    CannotSolve {
        target: MomentSymbol,
        equation: MomentSymbol,
    },
    #[error("elimination of {0} depends on itself")]
    Cycle(MomentSymbol),
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("re-substitution of {0} into its source equation does not vanish")]
    ResubstitutionFailed(MomentSymbol),
    #[error("order must be at least 1")]
    BadOrder,
}

/// `target = expr`, obtained from the equation of `source'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedMoment {
    pub target: MomentSymbol,
    pub source: MomentSymbol,
    pub expr: MomentExpr,
    /// Coefficient of `target` in the source equation.
    pub divisor: RatFun,
}

/// Isolate `target` in `source' = rhs`. The returned expression still
/// refers to `source'` and to any other raw moments of `rhs`.
pub fn solve_for(
    source: MomentSymbol,
    rhs: &MomentExpr,
    target: MomentSymbol,
) -> Result<SolvedMoment, ElimError> {
    let cannot = || ElimError::CannotSolve {
        target,
        equation: source,
    };
    let coeff = rhs.coeff(&target).cloned().ok_or_else(cannot)?;
    if coeff.is_zero() {
        return Err(cannot());
    }
    let mut rest = rhs.clone();
    rest.remove(&target);
    let inv = coeff.recip().map_err(|_| cannot())?;
    let mut expr = MomentExpr::symbol(rhs.symbols(), source.derivative());
    expr.add_scaled(&rest, &-&RatFun::one(rhs.symbols()));
    Ok(SolvedMoment {
        target,
        source,
        expr: expr.scale(&inv),
        divisor: coeff,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProvenanceStep {
    pub target: String,
    pub source: String,
}

/// A relation among observed moments and their derivatives that vanishes
/// for every trajectory of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Nse {
    pub order: u32,
    /// Polynomial coefficients with denominators cleared and content removed.
    pub expr: MomentExpr,
    /// Factors assumed non-zero while solving.
    pub conditions: Vec<Poly>,
    pub provenance: Vec<ProvenanceStep>,
    pub warnings: Vec<String>,
}

impl Nse {
    pub fn pivot(&self) -> MomentSymbol {
        *self.expr.terms().next().expect("NSE has terms").0
    }

    /// The NSE divided by its pivot coefficient.
    pub fn monic(&self) -> MomentExpr {
        let lead = self.expr.coeff(&self.pivot()).expect("pivot present");
        let inv = lead.recip().expect("pivot coefficient non-zero");
        self.expr.scale(&inv)
    }

    pub fn to_text(&self) -> String {
        format!("{} = 0", self.expr.to_text())
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Term {
            moment: String,
            coeff: String,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            order: u32,
            text: String,
            monic_text: String,
            terms: Vec<Term>,
            constant: String,
            conditions: Vec<String>,
            provenance: &'a [ProvenanceStep],
        }
        let out = Out {
            order: self.order,
            text: self.to_text(),
            monic_text: format!("{} = 0", self.monic().to_text()),
            terms: self
                .expr
                .terms()
                .map(|(m, c)| Term {
                    moment: m.to_text(),
                    coeff: c.to_text(),
                })
                .collect(),
            constant: self.expr.constant().to_text(),
            conditions: self.conditions.iter().map(Poly::to_text).collect(),
            provenance: &self.provenance,
        };
        serde_json::to_value(out).expect("serialisable")
    }
}

/// Memoised elimination state for one model.
pub struct Eliminator {
    model: MomentModel,
    solved: BTreeMap<(u32, u32), SolvedMoment>,
    in_progress: BTreeSet<(u32, u32)>,
    conditions: Vec<Poly>,
    provenance: Vec<ProvenanceStep>,
}

impl Eliminator {
    pub fn new(model: &ModelSpec) -> Result<Self, ElimError> {
        let mm = MomentModel::new(model)?;
        if let Applicability::NotApplicable { reason } = check_applicability(&mm.stencil()) {
            return Err(ElimError::NotApplicable(reason));
        }
        Ok(Self::from_moment_model(mm))
    }

    pub fn from_moment_model(model: MomentModel) -> Self {
        Eliminator {
            model,
            solved: BTreeMap::new(),
            in_progress: BTreeSet::new(),
            conditions: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn moment_model(&self) -> &MomentModel {
        &self.model
    }

    pub fn solved(&self) -> impl Iterator<Item = &SolvedMoment> {
        self.solved.values()
    }

    /// `m_{p,q}` in observed moments only.
    pub fn solution(&mut self, p: u32, q: u32) -> Result<MomentExpr, ElimError> {
        debug_assert!(q >= 1);
        if let Some(s) = self.solved.get(&(p, q)) {
            return Ok(s.expr.clone());
        }
        let target = MomentSymbol::new(p, q);
        if !self.in_progress.insert((p, q)) {
            return Err(ElimError::Cycle(target));
        }
        let source = MomentSymbol::new(p + 1, q - 1);
        let rhs = self.model.moment_ode(p + 1, q - 1);
        let raw = solve_for(source, &rhs, target)?;
        let expr = self.substitute(&raw.expr)?;
        self.in_progress.remove(&(p, q));
        self.record_condition(&raw.divisor);
        self.provenance.push(ProvenanceStep {
            target: target.to_text(),
            source: format!("{}'", source.to_text()),
        });
        self.solved.insert(
            (p, q),
            SolvedMoment {
                expr: expr.clone(),
                ..raw
            },
        );
        Ok(expr)
    }

    fn record_condition(&mut self, divisor: &RatFun) {
        for f in [divisor.numer(), divisor.denom()] {
            if f.is_constant() {
                continue;
            }
            let f = f.monic();
            if !self.conditions.contains(&f) {
                self.conditions.push(f);
            }
        }
    }

    /// Replace every unobserved moment (and its derivatives) by its solution.
    pub fn substitute(&mut self, e: &MomentExpr) -> Result<MomentExpr, ElimError> {
        let mut out = MomentExpr::zero(e.symbols());
        out.add_constant(e.constant());
        for (m, c) in e.terms() {
            if m.is_observed() {
                out.add_term(*m, c.clone());
                continue;
            }
            let mut s = self.solution(m.i, m.j)?;
            for _ in 0..m.deriv {
                s = s.derivative();
            }
            out.add_scaled(&s, c);
        }
        Ok(out)
    }

    /// `d/dt m_{i,j}` in observed moments.
    fn derivative_of(&mut self, i: u32, j: u32) -> Result<MomentExpr, ElimError> {
        if j == 0 {
            Ok(MomentExpr::symbol(
                self.model.params(),
                MomentSymbol::with_deriv(i, 0, 1),
            ))
        } else {
            Ok(self.solution(i, j)?.derivative())
        }
    }

    /// Substituting each solution back into its source equation gives 0.
    pub fn verify_resubstitution(&mut self) -> Result<(), ElimError> {
        let keys: Vec<(u32, u32)> = self.solved.keys().copied().collect();
        for (p, q) in keys {
            let lhs = self.derivative_of(p + 1, q - 1)?;
            let rhs = self.substitute(&self.model.moment_ode(p + 1, q - 1))?;
            let mut diff = lhs;
            diff.add_scaled(&rhs, &-&RatFun::one(self.model.params()));
            if !diff.is_zero() {
                return Err(ElimError::ResubstitutionFailed(MomentSymbol::new(p, q)));
            }
        }
        Ok(())
    }

    /// Raw (uncleared) NSE of the given order.
    pub fn raw_nse(&mut self, order: u32) -> Result<MomentExpr, ElimError> {
        if order == 0 {
            return Err(ElimError::BadOrder);
        }
        let mut e = self.derivative_of(0, order)?;
        let rhs = self.substitute(&self.model.moment_ode(0, order))?;
        e.add_scaled(&rhs, &-&RatFun::one(self.model.params()));
        Ok(e)
    }

    pub fn nse(&mut self, order: u32) -> Result<Nse, ElimError> {
        let raw = self.raw_nse(order)?;
        if raw.num_terms() < 2 {
            return Err(ElimError::Degenerate(format!(
                "order-{order} relation has fewer than two terms: {raw}"
            )));
        }
        let (expr, lcm) = clear_denominators(&raw);
        let mut warnings = Vec::new();
        let mut factors = self.conditions.clone();
        if !lcm.is_constant() && !factors.contains(&lcm.monic()) {
            factors.push(lcm.monic());
        }
        for f in &factors {
            let shared: Vec<String> = expr
                .terms()
                .map(|(_, c)| c)
                .chain(std::iter::once(expr.constant()))
                .filter(|c| !c.is_zero() && !poly_gcd(c.numer(), f).is_constant())
                .map(RatFun::to_text)
                .collect();
            if !shared.is_empty() {
                warnings.push(format!(
                    "non-degeneracy factor {} shares a factor with coefficient(s) {}",
                    f.to_text(),
                    shared.join(", ")
                ));
            }
        }
        Ok(Nse {
            order,
            expr,
            conditions: self.conditions.clone(),
            provenance: self.provenance.clone(),
            warnings,
        })
    }
}

/// Multiply through by the LCM of denominators, divide out the polynomial
/// content, and scale to coprime integer coefficients with a positive pivot.
fn clear_denominators(e: &MomentExpr) -> (MomentExpr, Poly) {
    let syms = e.symbols();
    let coeffs: Vec<&RatFun> = e
        .terms()
        .map(|(_, c)| c)
        .chain(std::iter::once(e.constant()))
        .filter(|c| !c.is_zero())
        .collect();
    let lcm = coeffs
        .iter()
        .fold(Poly::one(syms), |acc, c| poly_lcm(&acc, c.denom()));
    let cleared: Vec<Poly> = coeffs
        .iter()
        .map(|c| {
            c.mul_poly(&lcm)
                .as_poly()
                .cloned()
                .expect("lcm clears every denominator")
        })
        .collect();
    let content = cleared
        .iter()
        .fold(Poly::zero(syms), |acc, c| poly_gcd(&acc, c));
    let mut numer_lcm = BigInt::one();
    let mut denom_gcd = BigInt::zero();
    let reduced: Vec<Poly> = cleared
        .iter()
        .map(|c| c.div_exact(&content).expect("content divides"))
        .collect();
    for p in &reduced {
        for (_, k) in p.terms() {
            numer_lcm = numer_lcm.lcm(k.denom());
            denom_gcd = denom_gcd.gcd(k.numer());
        }
    }
    let pivot_sign = reduced[0].leading_coeff().is_negative();
    let mut scale = Rational::new(denom_gcd, numer_lcm);
    if pivot_sign {
        scale = -scale;
    }
    let factor = RatFun::from_poly(content.scale(&scale)).recip().expect("non-zero content");
    let lcm_rf = RatFun::from_poly(lcm.clone());
    (e.scale(&(&lcm_rf * &factor)), lcm)
}

/// Order-`order` NSE of `model`, with the re-substitution check applied.
pub fn derive_nse(model: &ModelSpec, order: u32) -> Result<Nse, ElimError> {
    let mut el = Eliminator::new(model)?;
    let nse = el.nse(order)?;
    el.verify_resubstitution()?;
    Ok(nse)
}
