//! Exact rational construction of a second parameter set that agrees with
//! the first on every combination of a published identifiable set.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Init, SimError};
use crate::ident::known_results;
use crate::symbolic::{fmt_rational, rat, rational_to_f64, Rational};

type Theta = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservedCombo {
    pub combo: String,
    pub value: String,
    pub value_star: String,
    pub residual: String,
}

/// Two parameter sets with the same identifiable combinations, and the
/// initial conditions under which the regime says they agree.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub model: String,
    pub regime: String,
    pub theta: Theta,
    pub theta_star: Theta,
    pub init: Init,
    pub init_star: Init,
    /// Model state indices whose statistics should agree.
    pub observed: Vec<usize>,
    /// Observed states are seen in separate experiments, so their joint
    /// statistics are not observed.
    pub separate: bool,
    pub preserved: Vec<PreservedCombo>,
    pub construction: String,
}

fn to_f64(t: &Theta) -> BTreeMap<String, f64> {
    t.iter().map(|(k, v)| (k.clone(), rational_to_f64(v))).collect()
}

impl MatchedPair {
    pub fn theta_f64(&self) -> BTreeMap<String, f64> {
        to_f64(&self.theta)
    }

    pub fn theta_star_f64(&self) -> BTreeMap<String, f64> {
        to_f64(&self.theta_star)
    }
}

fn get(t: &Theta, k: &str) -> Result<Rational, SimError> {
    t.get(k).cloned().ok_or_else(|| SimError::MissingParameter(k.to_string()))
}

fn set(t: &mut Theta, k: &str, v: Rational) {
    t.insert(k.to_string(), v);
}

/// Parameter values used when none are supplied. Drift matrices are stable
/// where the model is linear.
pub fn default_theta(model_id: &str) -> Option<Theta> {
    let vals: &[(&str, (i64, i64))] = match model_id {
        "ou2" => &[
            ("a", (1, 1)),
            ("b", (1, 2)),
            ("c", (-1, 1)),
            ("d", (2, 1)),
            ("e", (1, 1)),
            ("f", (-1, 2)),
            ("p", (1, 2)),
            ("r", (1, 2)),
            ("s", (1, 1)),
        ],
        "geometric2" => &[
            ("a", (1, 1)),
            ("b", (1, 2)),
            ("c", (-1, 2)),
            ("d", (3, 2)),
            ("e", (1, 1)),
            ("f", (1, 1)),
            ("p", (1, 5)),
            ("r", (1, 10)),
            ("s", (1, 5)),
        ],
        "semilogistic" => &[
            ("a", (1, 1)),
            ("b", (1, 2)),
            ("c", (1, 2)),
            ("d", (1, 2)),
            ("e", (1, 2)),
            ("f", (-1, 1)),
            ("p", (1, 5)),
            ("r", (1, 10)),
            ("s", (1, 5)),
        ],
        "lv_simple" => &[
            ("a", (-1, 1)),
            ("b", (1, 2)),
            ("c", (-1, 1)),
            ("d", (1, 4)),
            ("p", (1, 5)),
            ("s", (1, 5)),
        ],
        "cle" => &[
            ("alpha", (1, 10)),
            ("beta", (1, 2)),
            ("gamma", (2, 1)),
            ("delta", (1, 2)),
            ("epsilon", (3, 1)),
            ("zeta", (1, 1)),
        ],
        _ => return None,
    };
    Some(vals.iter().map(|(k, (n, d))| (k.to_string(), rat(*n, *d))).collect())
}

const KAPPAS: [(i64, i64); 8] = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 4), (4, 3), (3, 2), (2, 1)];
const SHIFTS: [(i64, i64); 6] = [(1, 1), (-1, 1), (3, 2), (-3, 2), (2, 1), (-2, 1)];

fn pick(rng: &mut ChaCha8Rng, table: &[(i64, i64)]) -> Rational {
    let (n, d) = table[rng.random_range(0..table.len())];
    rat(n, d)
}

/// A rational rotation from a Pythagorean triple.
fn rotation(rng: &mut ChaCha8Rng) -> (Rational, Rational) {
    let m: i64 = rng.random_range(2..=5);
    let n: i64 = rng.random_range(1..m);
    let h = m * m + n * n;
    let sign = if rng.random::<bool>() { 1 } else { -1 };
    (rat(m * m - n * n, h), rat(sign * 2 * m * n, h))
}

/// Rotate `(d p - b r, b s)` and solve back for `r*, s*`.
fn rotate_noise(t: &Theta, out: &mut Theta, rng: &mut ChaCha8Rng) -> Result<(), SimError> {
    let (b, d, p, r, s) = (get(t, "b")?, get(t, "d")?, get(t, "p")?, get(t, "r")?, get(t, "s")?);
    let u = &d * &p - &b * &r;
    let v = &b * &s;
    let (cos, sin) = rotation(rng);
    let u2 = &cos * &u - &sin * &v;
    let v2 = &sin * &u + &cos * &v;
    let (b2, d2) = (get(out, "b")?, get(out, "d")?);
    set(out, "r", (&d2 * &p - u2) / &b2);
    set(out, "s", (v2 / &b2).abs());
    Ok(())
}

fn nonzero_b(t: &Theta) -> Result<(), SimError> {
    if get(t, "b")?.is_zero() {
        return Err(SimError::NoMatchedPair("construction needs b != 0".into()));
    }
    Ok(())
}

/// Stationary covariance of the two-state linear model, exactly.
fn lyapunov2(a: &[Rational; 4], q: &[Rational; 3]) -> Option<[Rational; 3]> {
    let [a11, a12, a21, a22] = a.clone();
    let two = rat(2, 1);
    // unknowns (s11, s12, s22)
    let mut m = vec![
        vec![&two * &a11, &two * &a12, Rational::zero(), q[0].clone()],
        vec![a21.clone(), &a11 + &a22, a12.clone(), q[1].clone()],
        vec![Rational::zero(), &two * &a21, &two * &a22, q[2].clone()],
    ];
    for col in 0..3 {
        let piv = (col..3).find(|r| !m[*r][col].is_zero())?;
        m.swap(col, piv);
        let inv = Rational::one() / &m[col][col];
        for k in col..4 {
            m[col][k] = &m[col][k] * &inv;
        }
        for r in 0..3 {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..4 {
                    let sub = &f * &m[col][k];
                    m[r][k] = &m[r][k] - sub;
                }
            }
        }
    }
    Some([m[0][3].clone(), m[1][3].clone(), m[2][3].clone()])
}

/// Time reversal `A* = Σ∞ A^T Σ∞^{-1}` with the same noise: the stationary
/// law and both marginal autocovariances are kept, the cross-covariance is
/// transposed.
fn time_reversal(t: &Theta) -> Result<Theta, SimError> {
    let g = |k| get(t, k);
    let a = [g("a")?, g("b")?, g("c")?, g("d")?];
    let (p, r, s) = (g("p")?, g("r")?, g("s")?);
    let q = [&p * &p, &p * &r, &r * &r + &s * &s];
    let [s11, s12, s22] =
        lyapunov2(&a, &q).ok_or_else(|| SimError::NoMatchedPair("singular Lyapunov system".into()))?;
    let det = &s11 * &s22 - &s12 * &s12;
    if det.is_zero() {
        return Err(SimError::NoMatchedPair("stationary covariance is singular".into()));
    }
    let inv = [&s22 / &det, -&s12 / &det, -&s12 / &det, &s11 / &det];
    let sig = [s11, s12.clone(), s12, s22];
    let at = [a[0].clone(), a[2].clone(), a[1].clone(), a[3].clone()];
    let mul = |x: &[Rational; 4], y: &[Rational; 4]| -> [Rational; 4] {
        [
            &x[0] * &y[0] + &x[1] * &y[2],
            &x[0] * &y[1] + &x[1] * &y[3],
            &x[2] * &y[0] + &x[3] * &y[2],
            &x[2] * &y[1] + &x[3] * &y[3],
        ]
    };
    let star = mul(&mul(&sig, &at), &inv);
    let mut out = t.clone();
    for (k, v) in ["a", "b", "c", "d"].iter().zip(star) {
        set(&mut out, k, v);
    }
    Ok(out)
}

fn x0_y0(model_id: &str, t: &Theta) -> Result<(Rational, Rational), SimError> {
    let (dx, dy) = if model_id == "ou2" {
        (get(t, "e")? + Rational::one(), get(t, "f")? - Rational::one())
    } else {
        (Rational::one(), Rational::one())
    };
    Ok((t.get("x0").cloned().unwrap_or(dx), t.get("y0").cloned().unwrap_or(dy)))
}

fn point(x0: &Rational, y0: &Rational) -> Init {
    Init::Point { x0: vec![rational_to_f64(x0), rational_to_f64(y0)] }
}

/// Build `θ*` for `(model_id, regime)` from `θ`, using `seed` for the free
/// choices. Every combination of the published set is checked to agree
/// exactly.
pub fn matched_parameters(model_id: &str, regime: &str, theta: &Theta, seed: u64) -> Result<MatchedPair, SimError> {
    let known = known_results(model_id, regime)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut star = theta.clone();
    let (x0, y0) = x0_y0(model_id, theta)?;
    let mut y0_star = y0.clone();
    let mut observed = vec![0];
    let mut separate = false;
    let construction;
    let (init, init_star);

    match (model_id, regime) {
        ("ou2", "moments" | "stationary") => {
            nonzero_b(theta)?;
            let kappa = pick(&mut rng, &KAPPAS);
            if rng.random::<bool>() {
                set(&mut star, "a", get(theta, "d")?);
                set(&mut star, "d", get(theta, "a")?);
            }
            set(&mut star, "b", get(theta, "b")? * &kappa);
            set(&mut star, "c", get(theta, "c")? / &kappa);
            rotate_noise(theta, &mut star, &mut rng)?;
            set(&mut star, "f", get(theta, "f")? + pick(&mut rng, &SHIFTS));
            construction = format!("b*=κb, c*=c/κ with κ={}, rotation of (dp-br, bs), f shifted", fmt_rational(&kappa));
            init = Init::ConditionalStationary { x0: vec![rational_to_f64(&x0)] };
            init_star = init.clone();
        }
        ("ou2", "perturbed_ic") => {
            nonzero_b(theta)?;
            let kappa = pick(&mut rng, &KAPPAS);
            set(&mut star, "b", get(theta, "b")? * &kappa);
            set(&mut star, "c", get(theta, "c")? / &kappa);
            rotate_noise(theta, &mut star, &mut rng)?;
            set(&mut star, "f", get(theta, "f")? + pick(&mut rng, &SHIFTS));
            construction = format!("a, d fixed; b*=κb, c*=c/κ with κ={}, rotation of (dp-br, bs), f shifted", fmt_rational(&kappa));
            init = Init::Perturbed { x0: vec![rational_to_f64(&x0)] };
            init_star = init.clone();
        }
        ("ou2", "constant_ic") => {
            let kappa = pick(&mut rng, &KAPPAS);
            for (k, mul) in [("b", true), ("c", false), ("r", false), ("s", false)] {
                let v = get(theta, k)?;
                set(&mut star, k, if mul { v * &kappa } else { v / &kappa });
            }
            let f = get(theta, "f")?;
            let mut f_star = &f + pick(&mut rng, &SHIFTS);
            y0_star = &f_star + (&y0 - &f) / &kappa;
            if y0_star == y0 {
                f_star += Rational::one();
                y0_star += Rational::one();
            }
            set(&mut star, "f", f_star);
            construction = format!("y rescaled by 1/κ about f with κ={}, f shifted", fmt_rational(&kappa));
            init = point(&x0, &y0);
            init_star = point(&x0, &y0_star);
        }
        ("ou2", "independent_xy") => {
            star = time_reversal(theta)?;
            observed = vec![0, 1];
            separate = true;
            construction = "time reversal A* = Σ∞ Aᵀ Σ∞⁻¹, same noise".into();
            init = Init::Stationary;
            init_star = Init::Stationary;
        }
        ("geometric2", "general") => {
            let kappa = pick(&mut rng, &KAPPAS);
            set(&mut star, "b", get(theta, "b")? / &kappa);
            set(&mut star, "c", get(theta, "c")? * &kappa);
            set(&mut star, "f", get(theta, "f")? * &kappa);
            y0_star = &y0 * &kappa;
            construction = format!("y rescaled by κ={}", fmt_rational(&kappa));
            init = point(&x0, &y0);
            init_star = point(&x0, &y0_star);
        }
        ("semilogistic", "ode" | "general") => {
            for k in ["c", "d", "r", "s"] {
                set(&mut star, k, -get(theta, k)?);
            }
            y0_star = -&y0;
            construction = "y reflected (κ = -1)".into();
            init = point(&x0, &y0);
            init_star = point(&x0, &y0_star);
        }
        ("lv_simple", "ode" | "general") => {
            let kappa = pick(&mut rng, &KAPPAS);
            set(&mut star, "b", get(theta, "b")? * &kappa);
            set(&mut star, "s", get(theta, "s")? / &kappa);
            y0_star = &y0 / &kappa;
            construction = format!("y rescaled by 1/κ with κ={}", fmt_rational(&kappa));
            init = point(&x0, &y0);
            init_star = point(&x0, &y0_star);
        }
        ("cle", "general") => {
            return Err(SimError::NoMatchedPair(
                "the published set has full rank; all parameters are locally identifiable".into(),
            ))
        }
        _ => {
            return Err(SimError::Unsupported { model: model_id.into(), regime: regime.into() });
        }
    }

    let extras = |t: &Theta, y0: &Rational| -> Theta {
        let mut t = t.clone();
        t.insert("x0".into(), x0.clone());
        t.insert("y0".into(), y0.clone());
        t
    };
    let (full, full_star) = (extras(theta, &y0), extras(&star, &y0_star));
    let mut preserved = Vec::new();
    for c in &known.combos {
        let v = c.eval(&full).map_err(|e| SimError::Config(e.to_string()))?;
        let w = c.eval(&full_star).map_err(|e| SimError::Config(e.to_string()))?;
        if v != w {
            return Err(SimError::Config(format!(
                "construction did not preserve {}: {} vs {}",
                c.to_text(),
                fmt_rational(&v),
                fmt_rational(&w)
            )));
        }
        preserved.push(PreservedCombo {
            combo: c.to_text(),
            value: fmt_rational(&v),
            value_star: fmt_rational(&w),
            residual: fmt_rational(&(&w - &v)),
        });
    }
    if star == *theta && y0_star == y0 {
        return Err(SimError::NoMatchedPair("construction returned the input".into()));
    }
    Ok(MatchedPair {
        model: known.model,
        regime: regime.into(),
        theta: theta.clone(),
        theta_star: star,
        init,
        init_star,
        observed,
        separate,
        preserved,
        construction,
    })
}
