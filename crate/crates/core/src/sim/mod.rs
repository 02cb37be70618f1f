//! Euler-Maruyama ensembles, estimators, matched parameter pairs and the
//! indistinguishability check built on them.

mod estimate;
mod matched;
mod plot;
mod verify;

pub use estimate::{
    empirical_autocov, empirical_moment, empirical_moments, pairwise_sum, z_scores, AutocovEstimate,
    MomentEstimate,
};
pub use matched::{default_theta, matched_parameters, MatchedPair, PreservedCombo};
pub use plot::{svg_chart, Series};
pub use verify::{verify_indistinguishable, StatComparison, VerifyOptions, VerifyReport};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{ModelSpec, Noise};
use crate::ident::IdentError;
use crate::ou::{psd_cholesky, OuError, OuSystem};
use crate::symbolic::{rational_to_f64, Poly};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no value for parameter `{0}`")]
    MissingParameter(String),
    #[error("initial condition needs the Gaussian oracle: {0}")]
    Oracle(#[from] OuError),
    #[error(transparent)]
    Catalog(#[from] IdentError),
    #[error("no matched pair: {0}")]
    NoMatchedPair(String),
    #[error("matched pair construction not available for {model}/{regime}")]
    Unsupported { model: String, regime: String },
}

/// Initial distribution of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    /// Every path starts at `x0` (one value per state, model order).
    Point { x0: Vec<f64> },
    /// Observed states fixed at `x0`; the rest drawn from the stationary
    /// law conditioned on them.
    ConditionalStationary { x0: Vec<f64> },
    /// Draws from the stationary law.
    Stationary,
    /// Observed states fixed at `x0`; the rest drawn independently from
    /// their stationary marginal.
    Perturbed { x0: Vec<f64> },
}

/// Burn-in run used for `Stationary` when the model has no closed-form
/// stationary law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnIn {
    pub duration: f64,
    pub from: Vec<f64>,
}

fn default_record_dt() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    pub init: Init,
    /// Spacing of the stored grid; rounded to a whole number of steps.
    #[serde(default = "default_record_dt")]
    pub record_dt: f64,
    #[serde(default)]
    pub burn_in: Option<BurnIn>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            t_end: 10.0,
            n_paths: 10_000,
            seed: 0,
            init: Init::Stationary,
            record_dt: default_record_dt(),
            burn_in: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::Config("dt must be positive".into()));
        }
        if !(self.t_end >= self.dt) {
            return Err(SimError::Config("T must be at least dt".into()));
        }
        if self.n_paths == 0 {
            return Err(SimError::Config("n_paths must be at least 1".into()));
        }
        if !(self.record_dt >= self.dt) {
            return Err(SimError::Config("record_dt must be at least dt".into()));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        ((self.record_dt / self.dt).round() as usize).max(1)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Fraction of clamped diffusion evaluations above which a run is marked
/// unreliable.
pub const CLAMP_LIMIT: f64 = 1e-3;

/// Stored trajectories: `data[(path * grid.len() + k) * dim + s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub states: Vec<String>,
    pub grid: Vec<f64>,
    pub n_paths: usize,
    pub data: Vec<f64>,
    pub clamped: Vec<u64>,
    pub steps_per_path: u64,
}

impl Ensemble {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn value(&self, path: usize, k: usize, state: usize) -> f64 {
        self.data[(path * self.grid.len() + k) * self.dim() + state]
    }

    pub fn total_clamped(&self) -> u64 {
        self.clamped.iter().sum()
    }

    pub fn clamp_fraction(&self) -> f64 {
        let total = self.steps_per_path as f64 * self.n_paths as f64;
        if total == 0.0 {
            0.0
        } else {
            self.total_clamped() as f64 / total
        }
    }

    pub fn unreliable(&self) -> bool {
        self.clamp_fraction() > CLAMP_LIMIT
    }

    /// Long-format CSV: `path,t,<states...>`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("path,t,{}\n", self.states.join(","));
        for p in 0..self.n_paths {
            for (k, t) in self.grid.iter().enumerate() {
                out.push_str(&format!("{p},{t}"));
                for s in 0..self.dim() {
                    out.push_str(&format!(",{}", self.value(p, k, s)));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// A polynomial in the states with numeric coefficients.
#[derive(Debug, Clone)]
struct NumPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl NumPoly {
    fn compile(p: &Poly, nstates: usize, params: &[f64]) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (m, c) in p.terms() {
            let mut v = rational_to_f64(c);
            for (k, e) in m.0[nstates..].iter().enumerate() {
                v *= params[k].powi(*e as i32);
            }
            *acc.entry(m.0[..nstates].to_vec()).or_insert(0.0) += v;
        }
        NumPoly {
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).map(|(e, c)| (c, e)).collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (p, v)| if *p == 0 { acc } else { acc * v.powi(*p as i32) })
            })
            .sum()
    }
}

enum NumNoise {
    Diffusion(Vec<Vec<NumPoly>>),
    Covariance(Vec<Vec<NumPoly>>),
}

/// Drift and noise with parameters substituted.
struct Compiled {
    drift: Vec<NumPoly>,
    noise: NumNoise,
    width: usize,
}

impl Compiled {
    fn new(model: &ModelSpec, theta: &BTreeMap<String, f64>) -> Result<Self, SimError> {
        let n = model.dim();
        let params: Vec<f64> = model
            .params
            .iter()
            .map(|p| theta.get(p).copied().ok_or_else(|| SimError::MissingParameter(p.clone())))
            .collect::<Result<_, _>>()?;
        let c = |p: &Poly| NumPoly::compile(p, n, &params);
        let drift = model.drift.iter().map(c).collect();
        let (noise, width) = match &model.noise {
            Noise::Diffusion(rows) => {
                let w = rows.first().map_or(0, Vec::len);
                (NumNoise::Diffusion(rows.iter().map(|r| r.iter().map(c).collect()).collect()), w)
            }
            Noise::Covariance(rows) => {
                (NumNoise::Covariance(rows.iter().map(|r| r.iter().map(c).collect()).collect()), n)
            }
        };
        Ok(Compiled { drift, noise, width })
    }

    /// Diffusion matrix at `x` into `g` (row-major, `n x width`); returns
    /// whether the covariance had to be clamped.
    fn diffusion(&self, x: &[f64], g: &mut [f64]) -> bool {
        let n = x.len();
        match &self.noise {
            NumNoise::Diffusion(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        g[i * self.width + j] = e.eval(x);
                    }
                }
                false
            }
            NumNoise::Covariance(rows) => {
                let mut clamped = false;
                let mut q = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        q[(i, j)] = rows[i][j].eval(x);
                    }
                    if q[(i, i)] < 0.0 {
                        q[(i, i)] = 0.0;
                        clamped = true;
                    }
                }
                if q.clone().cholesky().is_none() {
                    let l = psd_cholesky(&q);
                    if ((&l * l.transpose()) - &q).amax() > 1e-9 * (1.0 + q.amax()) {
                        clamped = true;
                    }
                    q = l;
                } else {
                    q = psd_cholesky(&q);
                }
                for i in 0..n {
                    for j in 0..n {
                        g[i * self.width + j] = q[(i, j)];
                    }
                }
                clamped
            }
        }
    }
}

/// Order of states in the Gaussian oracle: observed first.
pub fn observed_first(model: &ModelSpec) -> Vec<usize> {
    let mut order = model.observed_indices();
    order.extend((0..model.dim()).filter(|i| !model.states[*i].observed));
    order
}

/// Initial sampler: a Gaussian `(mean, cholesky)` in model order, or a
/// burn-in start.
enum Start {
    Gaussian(DVector<f64>, DMatrix<f64>),
    BurnIn(f64, Vec<f64>),
}

fn start_law(model: &ModelSpec, theta: &BTreeMap<String, f64>, cfg: &SimConfig) -> Result<Start, SimError> {
    let n = model.dim();
    if let Init::Point { x0 } = &cfg.init {
        if x0.len() != n {
            return Err(SimError::Config(format!("point init needs {n} values")));
        }
        return Ok(Start::Gaussian(DVector::from_column_slice(x0), DMatrix::zeros(n, n)));
    }
    let sys = match OuSystem::from_model(model, theta) {
        Ok(sys) => sys,
        Err(e) => {
            return match (&cfg.init, &cfg.burn_in) {
                (Init::Stationary, Some(b)) if b.from.len() == n => Ok(Start::BurnIn(b.duration, b.from.clone())),
                _ => Err(e.into()),
            }
        }
    };
    let (mu, cov) = match &cfg.init {
        Init::Stationary => (sys.b.clone(), sys.stationary_cov()?),
        Init::ConditionalStationary { x0 } => sys.conditional_init(x0)?,
        Init::Perturbed { x0 } => {
            let m = sys.m;
            if x0.len() != m {
                return Err(SimError::Config(format!("perturbed init needs {m} observed values")));
            }
            let sigma = sys.stationary_cov()?;
            let mut mu = sys.b.clone();
            mu.rows_mut(0, m).copy_from_slice(x0);
            let mut cov = sigma;
            for i in 0..n {
                for j in 0..n {
                    if i < m || j < m {
                        cov[(i, j)] = 0.0;
                    }
                }
            }
            (mu, cov)
        }
        Init::Point { .. } => unreachable!(),
    };
    let order = observed_first(model);
    let mut mu_m = DVector::zeros(n);
    let mut cov_m = DMatrix::zeros(n, n);
    for (r, &si) in order.iter().enumerate() {
        mu_m[si] = mu[r];
        for (c, &sj) in order.iter().enumerate() {
            cov_m[(si, sj)] = cov[(r, c)];
        }
    }
    Ok(Start::Gaussian(mu_m, psd_cholesky(&cov_m)))
}

/// Euler-Maruyama ensemble. Path `k` draws from ChaCha8 stream `k` of
/// `cfg.seed`, so the output does not depend on the thread count.
pub fn simulate(model: &ModelSpec, theta: &BTreeMap<String, f64>, cfg: &SimConfig) -> Result<Ensemble, SimError> {
    cfg.validate()?;
    let compiled = Compiled::new(model, theta)?;
    let start = start_law(model, theta, cfg)?;
    let n = model.dim();
    let stride = cfg.stride();
    let n_steps = cfg.n_steps();
    let n_grid = n_steps / stride + 1;
    let grid: Vec<f64> = (0..n_grid).map(|k| (k * stride) as f64 * cfg.dt).collect();
    let burn_steps = match &start {
        Start::BurnIn(d, _) => (d / cfg.dt).round() as usize,
        Start::Gaussian(..) => 0,
    };

    let paths: Vec<(Vec<f64>, u64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path as u64);
            let mut x = vec![0.0; n];
            match &start {
                Start::Gaussian(mu, l) => {
                    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    for i in 0..n {
                        x[i] = mu[i] + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>();
                    }
                }
                Start::BurnIn(_, from) => x.copy_from_slice(from),
            }
            let mut g = vec![0.0; n * compiled.width];
            let mut dw = vec![0.0; compiled.width];
            let mut fx = vec![0.0; n];
            let sq = cfg.dt.sqrt();
            let mut clamped = 0u64;
            let mut out = Vec::with_capacity(n_grid * n);
            for step in 0..burn_steps + n_steps {
                if step >= burn_steps && (step - burn_steps) % stride == 0 {
                    out.extend_from_slice(&x);
                }
                for (i, f) in compiled.drift.iter().enumerate() {
                    fx[i] = f.eval(&x);
                }
                if compiled.diffusion(&x, &mut g) {
                    clamped += 1;
                }
                for w in dw.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *w = z * sq;
                }
                for i in 0..n {
                    let row = &g[i * compiled.width..(i + 1) * compiled.width];
                    x[i] += fx[i] * cfg.dt + row.iter().zip(&dw).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            if n_steps % stride == 0 {
                out.extend_from_slice(&x);
            }
            out.truncate(n_grid * n);
            (out, clamped)
        })
        .collect();

    let mut data = Vec::with_capacity(cfg.n_paths * n_grid * n);
    let mut clamped = Vec::with_capacity(cfg.n_paths);
    for (p, c) in paths {
        data.extend(p);
        clamped.push(c);
    }
    Ok(Ensemble {
        states: model.states.iter().map(|s| s.name.clone()).collect(),
        grid,
        n_paths: cfg.n_paths,
        data,
        clamped,
        steps_per_path: (burn_steps + n_steps) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin_model;

    fn theta(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn zero_noise_follows_the_ode() {
        let model = builtin_model("ou2").unwrap();
        let th = theta(&[
            ("a", 1.0),
            ("b", 0.5),
            ("c", -0.5),
            ("d", 1.5),
            ("e", 1.0),
            ("f", -1.0),
            ("p", 0.0),
            ("r", 0.0),
            ("s", 0.0),
        ]);
        let cfg = SimConfig {
            dt: 1e-3,
            t_end: 2.0,
            n_paths: 3,
            init: Init::Point { x0: vec![2.0, 0.0] },
            ..SimConfig::default()
        };
        let ens = simulate(&model, &th, &cfg).unwrap();
        let sys = OuSystem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.5]),
            DVector::from_row_slice(&[1.0, -1.0]),
            DMatrix::zeros(2, 2),
            1,
        )
        .unwrap();
        let last = ens.grid.len() - 1;
        let exact = sys.time_mean(&DVector::from_row_slice(&[2.0, 0.0]), ens.grid[last]);
        for p in 0..3 {
            assert!((ens.value(p, last, 0) - exact[0]).abs() < 5e-3);
            assert!((ens.value(p, last, 1) - exact[1]).abs() < 5e-3);
        }
        assert_eq!(ens.value(0, last, 0), ens.value(2, last, 0));
    }

    #[test]
    fn grid_includes_both_ends() {
        let model = builtin_model("ou2").unwrap();
        let th = theta(&[
            ("a", 1.0),
            ("b", 0.0),
            ("c", 0.0),
            ("d", 1.0),
            ("e", 0.0),
            ("f", 0.0),
            ("p", 1.0),
            ("r", 0.0),
            ("s", 1.0),
        ]);
        let cfg = SimConfig {
            dt: 0.01,
            t_end: 1.0,
            n_paths: 2,
            init: Init::Point { x0: vec![0.0, 0.0] },
            ..SimConfig::default()
        };
        let ens = simulate(&model, &th, &cfg).unwrap();
        assert_eq!(ens.grid.len(), 11);
        assert!((ens.grid[10] - 1.0).abs() < 1e-12);
        assert_eq!(ens.data.len(), 2 * 11 * 2);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = SimConfig { dt: 0.0, ..SimConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
