use std::collections::BTreeMap;

use sde_ident::dsl::builtin_model;
use sde_ident::ident::{analyze, compare_with_known, known_results, same_information};
use sde_ident::symbolic::{parse_expr, rat, RatFun, Rational};

const TRIALS: usize = 5;

fn agrees(model_id: &str, regime: &str, max_order: u32) -> bool {
    let model = builtin_model(model_id).unwrap();
    let analysis = analyze(&model, max_order, TRIALS, 0).unwrap();
    let known = known_results(model_id, regime).unwrap();
    compare_with_known(&analysis, &known, TRIALS, 0)
        .expect("comparable regime")
        .same_information
}

#[test]
fn published_sets_are_reproduced() {
    assert!(agrees("ou2", "moments", 1));
    assert!(agrees("geometric2", "general", 2));
    assert!(agrees("semilogistic", "ode", 1));
    assert!(agrees("lv_simple", "ode", 1));
    assert!(agrees("cle", "ode", 1));
    assert!(agrees("cle", "general", 2));
}

fn eval_all(combos: &[RatFun], point: &BTreeMap<String, Rational>) -> Vec<Rational> {
    combos.iter().map(|c| c.eval(point).unwrap()).collect()
}

#[test]
fn semilogistic_second_order_set_is_invariant_under_unobserved_rescaling() {
    // y -> k*y maps (c, d, r, s) to (c/k, k*d, k*r, k*s) and leaves the law
    // of x unchanged, so c^2 cannot be identifiable.
    let model = builtin_model("semilogistic").unwrap();
    let analysis = analyze(&model, 2, TRIALS, 0).unwrap();
    let combos: Vec<RatFun> = analysis.orders.iter().flat_map(|o| o.combos.clone()).collect();
    let base: BTreeMap<String, Rational> = [
        ("a", rat(3, 2)),
        ("b", rat(1, 3)),
        ("c", rat(2, 1)),
        ("d", rat(-1, 2)),
        ("e", rat(5, 4)),
        ("f", rat(-2, 1)),
        ("p", rat(1, 2)),
        ("r", rat(3, 5)),
        ("s", rat(7, 3)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let k = rat(5, 2);
    let mut moved = base.clone();
    moved.insert("c".into(), &base["c"] / &k);
    for name in ["d", "r", "s"] {
        moved.insert(name.into(), &base[name] * &k);
    }
    assert_eq!(eval_all(&combos, &base), eval_all(&combos, &moved));
    assert_ne!(&base["c"] * &base["c"], &moved["c"] * &moved["c"]);
    assert!(!agrees("semilogistic", "general", 2));
}

#[test]
fn linear_unobserved_relation_has_difference_coefficients() {
    // Eliminating <y> = (<x>' - sum c_j <x^j>)/a from the second equation
    // gives coefficients a*d_j - b*c_j on <x^j>.
    let model = builtin_model("linear_unobs(2)").unwrap();
    let syms = model.param_symbols();
    let analysis = analyze(&model, 1, TRIALS, 0).unwrap();
    let ours = analysis.orders[0].combos.clone();
    let hand: Vec<RatFun> = ["b + c1", "c2", "a*d0 - b*c0", "a*d1 - b*c1", "a*d2 - b*c2"]
        .iter()
        .map(|s| RatFun::from_poly(parse_expr(s, &syms).unwrap()))
        .collect();
    assert!(same_information(&ours, &hand, &syms, TRIALS, 0));
    assert!(!agrees("linear_unobs(2)", "general", 1));
}

#[test]
fn nse_texts_match_hand_derivations() {
    let model = builtin_model("geometric2").unwrap();
    let analysis = analyze(&model, 1, TRIALS, 0).unwrap();
    assert_eq!(
        analysis.orders[0].nse.to_text(),
        "m(1,0)'' + (a + d)*m(1,0)' + (a*d - b*c)*m(1,0) + (-a*d*e + b*c*e) = 0"
    );
}
