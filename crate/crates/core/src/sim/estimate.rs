//! Ensemble averages with delete-one jackknife standard errors.

use serde::Serialize;

use super::Ensemble;

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub label: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Every standard error is zero (e.g. all paths identical).
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocovEstimate {
    pub label: String,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Jackknife standard error of `g(mean)` from per-path samples, where
/// `g` acts on the vector of sample means.
fn jackknife<F>(columns: &[Vec<f64>], g: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = columns[0].len();
    let sums: Vec<f64> = columns.iter().map(|c| pairwise_sum(c)).collect();
    let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let full = g(&means);
    if n < 2 {
        return (full, 0.0);
    }
    let mut loo = vec![0.0; columns.len()];
    let reps: Vec<f64> = (0..n)
        .map(|i| {
            for (k, c) in columns.iter().enumerate() {
                loo[k] = (sums[k] - c[i]) / (n - 1) as f64;
            }
            g(&loo)
        })
        .collect();
    let mean_rep = pairwise_sum(&reps) / n as f64;
    let dev: Vec<f64> = reps.iter().map(|r| (r - mean_rep).powi(2)).collect();
    let var = (n - 1) as f64 / n as f64 * pairwise_sum(&dev);
    (full, var.max(0.0).sqrt())
}

/// `<prod_s x_s^{powers[s]}>` over the grid.
pub fn empirical_moment(ens: &Ensemble, powers: &[u32]) -> MomentEstimate {
    let label = format!(
        "m({})",
        powers.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    );
    let mut values = Vec::with_capacity(ens.grid.len());
    let mut stderr = Vec::with_capacity(ens.grid.len());
    for k in 0..ens.grid.len() {
        let col: Vec<f64> = (0..ens.n_paths)
            .map(|p| {
                powers
                    .iter()
                    .enumerate()
                    .map(|(s, e)| ens.value(p, k, s).powi(*e as i32))
                    .product()
            })
            .collect();
        let (v, se) = jackknife(&[col], |m| m[0]);
        values.push(v);
        stderr.push(se);
    }
    let degenerate = stderr.iter().all(|s| *s == 0.0);
    MomentEstimate { label, grid: ens.grid.clone(), values, stderr, degenerate }
}

/// `m_{i,0}`: power `i` of the first state.
pub fn empirical_moments(ens: &Ensemble, i: u32) -> MomentEstimate {
    let mut powers = vec![0; ens.dim()];
    powers[0] = i;
    empirical_moment(ens, &powers)
}

/// `Cov(x_a(t), x_b(t + lag))` for each lag (in grid steps), averaging each
/// path over every origin `t` with `t + lag` on the grid, from grid index
/// `first_origin` on. With a single origin this is the plain ensemble
/// covariance.
pub fn empirical_autocov(
    ens: &Ensemble,
    a: usize,
    b: usize,
    lags: &[usize],
    first_origin: usize,
    max_origins: Option<usize>,
) -> AutocovEstimate {
    let n_grid = ens.grid.len();
    let step = if n_grid > 1 { ens.grid[1] - ens.grid[0] } else { 0.0 };
    let mut values = Vec::new();
    let mut stderr = Vec::new();
    let mut out_lags = Vec::new();
    for &lag in lags {
        if first_origin + lag >= n_grid {
            continue;
        }
        let mut last = n_grid - 1 - lag;
        if let Some(m) = max_origins {
            last = last.min(first_origin + m.max(1) - 1);
        }
        let count = (last - first_origin + 1) as f64;
        let mut u = Vec::with_capacity(ens.n_paths);
        let mut v = Vec::with_capacity(ens.n_paths);
        let mut uv = Vec::with_capacity(ens.n_paths);
        for p in 0..ens.n_paths {
            let (mut su, mut sv, mut suv) = (0.0, 0.0, 0.0);
            for t in first_origin..=last {
                let x = ens.value(p, t, a);
                let y = ens.value(p, t + lag, b);
                su += x;
                sv += y;
                suv += x * y;
            }
            u.push(su / count);
            v.push(sv / count);
            uv.push(suv / count);
        }
        let (val, se) = jackknife(&[uv, u, v], |m| m[0] - m[1] * m[2]);
        values.push(val);
        stderr.push(se);
        out_lags.push(lag as f64 * step);
    }
    AutocovEstimate {
        label: format!("cov({}(t), {}(t+lag))", ens.states[a], ens.states[b]),
        lags: out_lags,
        values,
        stderr,
    }
}

/// Two-sample z-scores `(a - b) / sqrt(se_a^2 + se_b^2)`. Equal values with
/// zero error give 0, unequal ones infinity.
pub fn z_scores(a: &[f64], sa: &[f64], b: &[f64], sb: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(sa)
        .zip(b.iter().zip(sb))
        .map(|((x, sx), (y, sy))| {
            let d = x - y;
            let s = (sx * sx + sy * sy).sqrt();
            if s > 0.0 {
                d / s
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect()
}
