//! Statistical comparison of two ensembles simulated from a matched pair.
//! A pass means "consistent with indistinguishable"; sampling can only
//! falsify.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::estimate::{empirical_autocov, empirical_moment, z_scores};
use super::plot::{svg_chart, Series};
use super::{observed_first, simulate, MatchedPair, PreservedCombo, SimConfig, SimError};
use crate::dsl::ModelSpec;
use crate::ou::OuSystem;
use crate::symbolic::fmt_rational;

/// Finite stand-in for an infinite z-score in reports.
const Z_CAP: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Grid, step and path count; the initial condition comes from the pair.
    pub sim: SimConfig,
    pub threshold: f64,
    pub max_lag: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { sim: SimConfig::default(), threshold: 4.0, max_lag: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatComparison {
    pub name: String,
    /// `moment` or `autocov`.
    pub kind: String,
    pub observed: bool,
    /// `theta_star` (second ensemble) or `analytic` (closed form at θ).
    pub against: String,
    /// Which ensemble is on the left: `theta` or `theta_star`.
    pub ensemble: String,
    pub x: Vec<f64>,
    pub left: Vec<f64>,
    pub left_se: Vec<f64>,
    pub right: Vec<f64>,
    pub right_se: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub regime: String,
    pub construction: String,
    pub theta: BTreeMap<String, String>,
    pub theta_star: BTreeMap<String, String>,
    pub preserved: Vec<PreservedCombo>,
    pub seeds: [u64; 2],
    pub dt: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub threshold: f64,
    pub statistics: Vec<StatComparison>,
    pub observed_pass: bool,
    pub unobserved_distinguishable: bool,
    pub verdict: String,
    pub multiplicity_note: String,
    pub clamp_fraction: [f64; 2],
    pub unreliable: bool,
}

impl VerifyReport {
    pub fn observed_max_z(&self) -> f64 {
        self.statistics
            .iter()
            .filter(|s| s.observed)
            .map(|s| s.max_abs_z)
            .fold(0.0, f64::max)
    }

    pub fn unobserved_max_z(&self) -> f64 {
        self.statistics
            .iter()
            .filter(|s| !s.observed)
            .map(|s| s.max_abs_z)
            .fold(0.0, f64::max)
    }

    pub fn stat(&self, name: &str, against: &str, ensemble: &str) -> Option<&StatComparison> {
        self.statistics
            .iter()
            .find(|s| s.name == name && s.against == against && s.ensemble == ensemble)
    }

    /// One SVG per statistic group: `(file name, document)`.
    pub fn plots(&self) -> Vec<(String, String)> {
        let palette = ["#7b3294", "#1b9e77", "#d95f02", "#2c7fb8", "#e7298a", "#66a61e"];
        let groups = [
            ("observed_moments.svg", "observed moments", "moment", true),
            ("unobserved_moments.svg", "unobserved moments", "moment", false),
            ("observed_autocov.svg", "observed autocovariance", "autocov", true),
            ("unobserved_autocov.svg", "unobserved cross-covariance", "autocov", false),
        ];
        let mut out = Vec::new();
        for (file, title, kind, observed) in groups {
            let stats: Vec<&StatComparison> = self
                .statistics
                .iter()
                .filter(|s| s.kind == kind && s.observed == observed && s.against == "theta_star")
                .collect();
            if stats.is_empty() {
                continue;
            }
            let mut series = Vec::new();
            for (k, s) in stats.iter().enumerate() {
                let color = palette[k % palette.len()].to_string();
                let band = |se: &[f64]| se.iter().map(|e| 2.0 * e).collect();
                series.push(Series {
                    label: format!("{} θ", s.name),
                    x: s.x.clone(),
                    y: s.left.clone(),
                    band: Some(band(&s.left_se)),
                    color,
                    dashed: false,
                });
                series.push(Series {
                    label: format!("{} θ*", s.name),
                    x: s.x.clone(),
                    y: s.right.clone(),
                    band: None,
                    color: "black".into(),
                    dashed: true,
                });
            }
            let xlabel = if kind == "moment" { "t" } else { "lag" };
            out.push((file.to_string(), svg_chart(&format!("{} ({}/{})", title, self.model, self.regime), xlabel, &series)));
        }
        out
    }
}

fn max_abs(z: &[f64]) -> f64 {
    z.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn compare(
    name: String,
    kind: &str,
    observed: bool,
    against: &str,
    ensemble: &str,
    x: Vec<f64>,
    left: (Vec<f64>, Vec<f64>),
    right: (Vec<f64>, Vec<f64>),
    threshold: f64,
) -> StatComparison {
    let z: Vec<f64> = z_scores(&left.0, &left.1, &right.0, &right.1)
        .into_iter()
        .map(|v| v.clamp(-Z_CAP, Z_CAP))
        .collect();
    let m = max_abs(&z);
    StatComparison {
        name,
        kind: kind.into(),
        observed,
        against: against.into(),
        ensemble: ensemble.into(),
        x,
        left: left.0,
        left_se: left.1,
        right: right.0,
        right_se: right.1,
        z,
        max_abs_z: m,
        pass: m <= threshold,
    }
}

fn derive_seeds(seed: u64) -> [u64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.random(), rng.random()]
}

/// Simulate both members of `pair` and compare observed moments (orders 1
/// and 2) and autocovariances, plus the unobserved ones for contrast. For
/// stationary linear runs the marginal autocovariances are also checked
/// against the closed form.
pub fn verify_indistinguishable(
    model: &ModelSpec,
    pair: &MatchedPair,
    opts: &VerifyOptions,
) -> Result<VerifyReport, SimError> {
    let seeds = derive_seeds(opts.sim.seed);
    let theta = pair.theta_f64();
    let theta_star = pair.theta_star_f64();
    let cfg_a = SimConfig { init: pair.init.clone(), seed: seeds[0], ..opts.sim.clone() };
    let cfg_b = SimConfig { init: pair.init_star.clone(), seed: seeds[1], ..opts.sim.clone() };
    let ens_a = simulate(model, &theta, &cfg_a)?;
    let ens_b = simulate(model, &theta_star, &cfg_b)?;
    let n = model.dim();
    let th = opts.threshold;
    let is_obs = |s: usize| pair.observed.contains(&s);
    let mut stats = Vec::new();

    // moments of order 1 and 2 of single states, and the mixed second moment
    let mut powers: Vec<Vec<u32>> = Vec::new();
    for s in 0..n {
        for k in 1..=2 {
            let mut p = vec![0; n];
            p[s] = k;
            powers.push(p);
        }
    }
    if n == 2 {
        powers.push(vec![1, 1]);
    }
    for p in &powers {
        let support: Vec<usize> = (0..n).filter(|s| p[*s] > 0).collect();
        let observed = if pair.separate {
            support.len() == 1 && is_obs(support[0])
        } else {
            support.iter().all(|s| is_obs(*s))
        };
        let a = empirical_moment(&ens_a, p);
        let b = empirical_moment(&ens_b, p);
        stats.push(compare(
            a.label.clone(),
            "moment",
            observed,
            "theta_star",
            "theta",
            a.grid.clone(),
            (a.values, a.stderr),
            (b.values, b.stderr),
            th,
        ));
    }

    let step = opts.sim.stride() as f64 * opts.sim.dt;
    let n_lags = ((opts.max_lag / step).round() as usize).min(ens_a.grid.len().saturating_sub(1));
    let lags: Vec<usize> = (0..=n_lags).collect();
    let analytic = match (&pair.init, OuSystem::from_model(model, &theta)) {
        (super::Init::Stationary, Ok(sys)) => Some(sys),
        _ => None,
    };
    let order = observed_first(model);
    let ou_pos = |s: usize| order.iter().position(|o| *o == s).expect("state in order");
    for a_state in 0..n {
        for b_state in 0..n {
            if b_state < a_state && !pair.separate {
                continue;
            }
            let observed = if a_state == b_state {
                is_obs(a_state)
            } else {
                !pair.separate && is_obs(a_state) && is_obs(b_state)
            };
            let ea = empirical_autocov(&ens_a, a_state, b_state, &lags, 0, None);
            let eb = empirical_autocov(&ens_b, a_state, b_state, &lags, 0, None);
            let name = format!("cov({}(t),{}(t+lag))", model.states[a_state].name, model.states[b_state].name);
            stats.push(compare(
                name.clone(),
                "autocov",
                observed,
                "theta_star",
                "theta",
                ea.lags.clone(),
                (ea.values.clone(), ea.stderr.clone()),
                (eb.values.clone(), eb.stderr.clone()),
                th,
            ));
            if let (Some(sys), true) = (&analytic, observed) {
                let exact: Vec<f64> = ea
                    .lags
                    .iter()
                    .map(|tau| {
                        sys.autocov(*tau)
                            .map(|m| m[(ou_pos(b_state), ou_pos(a_state))])
                            .unwrap_or(f64::NAN)
                    })
                    .collect();
                let zeros = vec![0.0; exact.len()];
                for (label, est) in [("theta", &ea), ("theta_star", &eb)] {
                    stats.push(compare(
                        name.clone(),
                        "autocov",
                        true,
                        "analytic",
                        label,
                        est.lags.clone(),
                        (est.values.clone(), est.stderr.clone()),
                        (exact.clone(), zeros.clone()),
                        th,
                    ));
                }
            }
        }
    }

    let observed_pass = stats.iter().filter(|s| s.observed).all(|s| s.pass);
    let unobserved_distinguishable = stats.iter().any(|s| !s.observed && !s.pass);
    let n_tests: usize = stats.iter().filter(|s| s.observed).map(|s| s.z.len()).sum();
    let tail = 6.334e-5;
    let verdict = if observed_pass {
        "consistent with indistinguishable".to_string()
    } else {
        "observed statistics differ".to_string()
    };
    let fmt = |t: &BTreeMap<String, num_rational::BigRational>| -> BTreeMap<String, String> {
        t.iter().map(|(k, v)| (k.clone(), fmt_rational(v))).collect()
    };
    let unreliable = ens_a.unreliable() || ens_b.unreliable();
    Ok(VerifyReport {
        model: pair.model.clone(),
        regime: pair.regime.clone(),
        construction: pair.construction.clone(),
        theta: fmt(&pair.theta),
        theta_star: fmt(&pair.theta_star),
        preserved: pair.preserved.clone(),
        seeds,
        dt: opts.sim.dt,
        t_end: opts.sim.t_end,
        n_paths: opts.sim.n_paths,
        threshold: th,
        statistics: stats,
        observed_pass,
        unobserved_distinguishable,
        verdict,
        multiplicity_note: format!(
            "{n_tests} observed z-scores at |z| <= {th}; under independence the chance of any false alarm is about {:.2}% (Bonferroni bound)",
            100.0 * (n_tests as f64 * tail).min(1.0)
        ),
        clamp_fraction: [ens_a.clamp_fraction(), ens_b.clamp_fraction()],
        unreliable,
    })
}
