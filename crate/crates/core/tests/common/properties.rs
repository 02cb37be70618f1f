// Property checks shared by the core test suite and the acceptance target.
// Each runs `cases` random cases and returns the first failure.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use sde_ident::dsl::{builtin_model, parse_model};
use sde_ident::elimination::{Eliminator, Nse};
use sde_ident::moments::{ClosedSystem, MomentModel, MomentSymbol};
use sde_ident::sim::{simulate, Init, SimConfig};
use sde_ident::symbolic::{rat, Monomial, Poly, Symbols};

fn runner(cases: u32, tag: u64) -> TestRunner {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&tag.to_le_bytes());
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &seed),
    )
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn ring_syms() -> Symbols {
    Symbols::new(["x", "y", "z"])
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-5i64..=5, 1i64..=3, 0u32..3, 0u32..3, 0u32..3), 0..6).prop_map(|terms| {
        let syms = ring_syms();
        Poly::from_terms(
            &syms,
            terms
                .into_iter()
                .map(|(n, d, a, b, c)| (Monomial(vec![a, b, c]), rat(n, d))),
        )
    })
}

pub fn ring_axioms(cases: u32) -> Result<(), String> {
    let strat = (poly_strategy(), poly_strategy(), poly_strategy());
    report(runner(cases, 1).run(&strat, |(p, q, r)| {
        let zero = Poly::zero(&ring_syms());
        let one = Poly::one(&ring_syms());
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p + &zero, p.clone());
        prop_assert_eq!(&p * &one, p.clone());
        prop_assert_eq!(&p + &(-&p), zero.clone());
        prop_assert_eq!(&p - &q, &p + &(-&q));
        if !q.is_zero() {
            prop_assert_eq!((&p * &q).div_exact(&q), Some(p.clone()));
        }
        Ok(())
    }))
}

/// Random two-state models that are linear in `y` apart from an `x*y`
/// term in the unobserved drift, with integer coefficients and one
/// symbolic noise parameter.
fn model_strategy() -> impl Strategy<Value = String> {
    let c = || -3i64..=3;
    let nz = prop_oneof![-3i64..=-1, 1i64..=3];
    (c(), c(), c(), nz, c(), c(), c(), c(), c(), c(), c()).prop_map(|(c0, c1, c2, a, d0, d1, d2, b, g, r, s)| {
        format!(
            "model rnd\nstates: x observed, y\nparams: k\ndrift:\n  x: {c0} + ({c1})*x + ({c2})*x^2 + ({a})*y\n  y: {d0} + ({d1})*x + ({d2})*x^2 + ({b})*y + ({g})*x*y\ndiffusion:\n  x: [k, 0]\n  y: [{r}, ({s})*x]\n"
        )
    })
}

pub fn resubstitution(cases: u32) -> Result<(), String> {
    let strat = (model_strategy(), 1u32..=2);
    report(runner(cases, 2).run(&strat, |(src, order)| {
        let model = parse_model(&src).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut el = Eliminator::new(&model).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let nse = el.nse(order).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        prop_assert!(nse.expr.terms().all(|(m, _)| m.is_observed()), "unobserved moment left in {}", nse.to_text());
        el.verify_resubstitution().map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        Ok(())
    }))
}

fn cached_nse(id: &'static str, order: u32) -> &'static Nse {
    static CACHE: OnceLock<BTreeMap<(&'static str, u32), Nse>> = OnceLock::new();
    let map = CACHE.get_or_init(|| {
        let mut m = BTreeMap::new();
        for id in ["ou2", "geometric2"] {
            let model = builtin_model(id).unwrap();
            let mut el = Eliminator::new(&model).unwrap();
            for k in 1..=2 {
                m.insert((id, k), el.nse(k).unwrap());
            }
        }
        m
    });
    &map[&(id, order)]
}

/// Relative residual of an NSE along the exact moment trajectory of a
/// closed model from a point mass.
pub fn nse_residual(id: &'static str, order: u32, theta: &[f64], x0: f64, y0: f64, t: f64) -> f64 {
    let model = builtin_model(id).unwrap();
    let mm = MomentModel::new(&model).unwrap();
    let nse = cached_nse(id, order);
    let max_deriv = nse.expr.terms().map(|(m, _)| m.deriv).max().unwrap_or(0);
    let sys = ClosedSystem::new(&mm, nse.expr.max_order().max(1), theta).expect("closed model");
    let v = sys.solve(&sys.point_mass(x0, y0), t);
    let ders = sys.derivatives(&v, max_deriv);
    let mut total = nse.expr.constant().eval_f64(theta);
    let mut scale = total.abs();
    for (m, c) in nse.expr.terms() {
        let k = sys.index_of(MomentSymbol::new(m.i, m.j)).expect("moment in system");
        let term = c.eval_f64(theta) * ders[m.deriv as usize][k];
        total += term;
        scale += term.abs();
    }
    total.abs() / scale.max(1.0)
}

pub fn nse_numeric_residual(cases: u32) -> Result<(), String> {
    let strat = (
        prop::bool::ANY,
        1u32..=2,
        prop::collection::vec(-1.0f64..1.0, 9),
        -1.0f64..1.0,
        -1.0f64..1.0,
        0.0f64..1.0,
    );
    report(runner(cases, 3).run(&strat, |(geo, order, theta, x0, y0, t)| {
        let id = if geo { "geometric2" } else { "ou2" };
        let r = nse_residual(id, order, &theta, x0, y0, t);
        prop_assert!(r <= 1e-8, "{id} order {order}: residual {r:e}");
        Ok(())
    }))
}

pub fn seed_determinism(cases: u32) -> Result<(), String> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let ou2 = builtin_model("ou2").unwrap();
    let cle = builtin_model("cle").unwrap();
    let ou_theta: BTreeMap<String, f64> = [
        ("a", 1.0),
        ("b", 0.5),
        ("c", -1.0),
        ("d", 2.0),
        ("e", 1.0),
        ("f", -0.5),
        ("p", 0.5),
        ("r", 0.5),
        ("s", 1.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    let cle_theta: BTreeMap<String, f64> = [
        ("alpha", 0.1),
        ("beta", 0.5),
        ("gamma", 2.0),
        ("delta", 0.5),
        ("epsilon", 3.0),
        ("zeta", 1.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    let strat = (any::<u64>(), 1usize..8, 10usize..60, prop::bool::ANY);
    report(runner(cases, 4).run(&strat, |(seed, n_paths, steps, use_cle)| {
        let (model, theta, init) = if use_cle {
            (&cle, &cle_theta, Init::Point { x0: vec![1.0, 1.0] })
        } else {
            (&ou2, &ou_theta, Init::Stationary)
        };
        let cfg = SimConfig {
            dt: 0.01,
            t_end: steps as f64 * 0.01,
            n_paths,
            seed,
            init,
            record_dt: 0.05,
            burn_in: None,
        };
        let a = one.install(|| simulate(model, theta, &cfg)).unwrap();
        let b = many.install(|| simulate(model, theta, &cfg)).unwrap();
        prop_assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert_eq!(a.data.len(), b.data.len());
        prop_assert_eq!(a.clamped, b.clamped);
        Ok(())
    }))
}
