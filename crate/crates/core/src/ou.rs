//! Closed-form Gaussian quantities for `dx = -A (x - b) dt + S dW`.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::dsl::ModelSpec;
use crate::symbolic::Poly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OuError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("drift matrix has an eigenvalue with non-positive real part ({0})")]
    Unstable(String),
    #[error("diffusion matrix is not lower triangular")]
    NotLowerTriangular,
    #[error("A ⊕ A is singular; no stationary covariance")]
    StationaryUndefined,
    #[error("observed block of the stationary covariance is singular")]
    SingularObservedBlock,
    #[error("eigenvalues of A are not distinct (relative gap {0:.3e})")]
    RepeatedEigenvalues(f64),
    #[error("model is not an Ornstein-Uhlenbeck process: {0}")]
    NotLinear(String),
    #[error("no value for parameter `{0}`")]
    MissingParameter(String),
}

/// Eigenvalue separation below which the spectral route is refused.
pub const EIGEN_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OuSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub s: DMatrix<f64>,
    /// Leading states that are observed.
    pub m: usize,
}

impl OuSystem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, s: DMatrix<f64>, m: usize) -> Result<Self, OuError> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || s.nrows() != n || s.ncols() != n || m > n {
            return Err(OuError::Shape(format!(
                "A {}x{}, b {}, S {}x{}, m {m}",
                a.nrows(),
                a.ncols(),
                b.len(),
                s.nrows(),
                s.ncols()
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if s[(i, j)] != 0.0 {
                    return Err(OuError::NotLowerTriangular);
                }
            }
        }
        let sys = OuSystem { a, b, s, m };
        if let Some(l) = sys.eigenvalues().iter().find(|l| l.re <= 0.0) {
            return Err(OuError::Unstable(format!("{:.6}{:+.6}i", l.re, l.im)));
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        self.a.clone().complex_eigenvalues().iter().copied().collect()
    }

    /// `S S^T`.
    pub fn noise_cov(&self) -> DMatrix<f64> {
        &self.s * self.s.transpose()
    }

    /// Build from a model whose drift is affine and whose noise is constant.
    /// Observed states are moved to the front.
    pub fn from_model(model: &ModelSpec, theta: &BTreeMap<String, f64>) -> Result<Self, OuError> {
        let n = model.dim();
        let mut order = model.observed_indices();
        let m = order.len();
        order.extend((0..n).filter(|i| !model.states[*i].observed));
        let syms = model.symbols();
        let vals: Vec<f64> = (0..syms.len())
            .map(|k| {
                if k < n {
                    Ok(0.0)
                } else {
                    theta
                        .get(syms.name(k))
                        .copied()
                        .ok_or_else(|| OuError::MissingParameter(syms.name(k).to_string()))
                }
            })
            .collect::<Result<_, _>>()?;
        let state_degree = |p: &Poly| -> u32 {
            p.terms()
                .map(|(mono, _)| mono.0[..n].iter().sum::<u32>())
                .max()
                .unwrap_or(0)
        };
        let mut a = DMatrix::zeros(n, n);
        let mut f0 = DVector::zeros(n);
        for (r, &si) in order.iter().enumerate() {
            let f = &model.drift[si];
            if state_degree(f) > 1 {
                return Err(OuError::NotLinear(format!("drift of {} is not affine", model.states[si].name)));
            }
            f0[r] = f.eval_f64(&vals);
            for (c, &sj) in order.iter().enumerate() {
                a[(r, c)] = -f.diff_idx(sj).eval_f64(&vals);
            }
        }
        let g = model.noise_covariance();
        let mut q = DMatrix::zeros(n, n);
        for (r, &si) in order.iter().enumerate() {
            for (c, &sj) in order.iter().enumerate() {
                let e = &g[si][sj];
                if state_degree(e) > 0 {
                    return Err(OuError::NotLinear("diffusion depends on the state".into()));
                }
                q[(r, c)] = e.eval_f64(&vals);
            }
        }
        let b = a
            .clone()
            .lu()
            .solve(&f0)
            .ok_or_else(|| OuError::NotLinear("drift matrix is singular".into()))?;
        OuSystem::new(a, b, psd_cholesky(&q), m)
    }

    /// `Σ∞` from `(A ⊕ A) vec(Σ∞) = vec(S S^T)`.
    pub fn stationary_cov(&self) -> Result<DMatrix<f64>, OuError> {
        let n = self.dim();
        let k = kron_sum(&self.a);
        let q = self.noise_cov();
        let v = DVector::from_column_slice(q.as_slice());
        let sol = k.lu().solve(&v).ok_or(OuError::StationaryUndefined)?;
        if sol.iter().any(|x| !x.is_finite()) {
            return Err(OuError::StationaryUndefined);
        }
        let sigma = DMatrix::from_column_slice(n, n, sol.as_slice());
        Ok((&sigma + sigma.transpose()) * 0.5)
    }

    /// `Cov(x(t), x(0)) = e^{-At} Σ∞` at equilibrium.
    pub fn autocov(&self, t: f64) -> Result<DMatrix<f64>, OuError> {
        Ok(expm(&(-t * &self.a)) * self.stationary_cov()?)
    }

    /// The same quantity as a sum of exponentials over the eigenvalues of
    /// `A`, using the Frobenius covariants of `A` so no eigenvectors are
    /// needed.
    pub fn autocov_spectral(&self, t: f64) -> Result<DMatrix<f64>, OuError> {
        let terms = self.spectral_terms()?;
        let n = self.dim();
        let mut acc = DMatrix::<Complex<f64>>::zeros(n, n);
        for (lambda, w) in &terms {
            acc += w * (-lambda * t).exp();
        }
        Ok(acc.map(|z| z.re))
    }

    /// Pairs `(λ_i, P_i Σ∞)` with `P_i` the spectral projector of `λ_i`.
    pub fn spectral_terms(&self) -> Result<Vec<(Complex<f64>, DMatrix<Complex<f64>>)>, OuError> {
        let lambdas = self.eigenvalues();
        let scale = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut gap = f64::INFINITY;
        for i in 0..lambdas.len() {
            for j in i + 1..lambdas.len() {
                gap = gap.min((lambdas[i] - lambdas[j]).norm() / scale);
            }
        }
        if gap < EIGEN_GAP {
            return Err(OuError::RepeatedEigenvalues(gap));
        }
        let n = self.dim();
        let ac = self.a.map(|x| Complex::new(x, 0.0));
        let sigma = self.stationary_cov()?.map(|x| Complex::new(x, 0.0));
        let eye = DMatrix::<Complex<f64>>::identity(n, n);
        Ok(lambdas
            .iter()
            .enumerate()
            .map(|(i, li)| {
                let mut p = eye.clone();
                for (k, lk) in lambdas.iter().enumerate() {
                    if k != i {
                        p = p * (&ac - &eye * *lk) / (li - lk);
                    }
                }
                (*li, p * &sigma)
            })
            .collect())
    }

    /// Condition `N(b, Σ∞)` on the leading `m` coordinates equal to `x0`.
    pub fn conditional_init(&self, x0: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>), OuError> {
        let (n, m) = (self.dim(), self.m);
        if x0.len() != m {
            return Err(OuError::Shape(format!("x0 has {} entries, expected {m}", x0.len())));
        }
        let sigma = self.stationary_cov()?;
        let s11 = sigma.view((0, 0), (m, m)).into_owned();
        let s21 = sigma.view((m, 0), (n - m, m)).into_owned();
        let s22 = sigma.view((m, m), (n - m, n - m)).into_owned();
        let inv = s11.try_inverse().ok_or(OuError::SingularObservedBlock)?;
        let dx = DVector::from_column_slice(x0) - self.b.rows(0, m);
        let mu2 = self.b.rows(m, n - m) + &s21 * &inv * dx;
        let c22 = &s22 - &s21 * &inv * s21.transpose();
        let mut mu = DVector::zeros(n);
        mu.rows_mut(0, m).copy_from_slice(x0);
        mu.rows_mut(m, n - m).copy_from(&mu2);
        let mut cov = DMatrix::zeros(n, n);
        cov.view_mut((m, m), (n - m, n - m))
            .copy_from(&((&c22 + c22.transpose()) * 0.5));
        Ok((mu, cov))
    }

    /// `E x(t)` from initial mean `mu0`.
    pub fn time_mean(&self, mu0: &DVector<f64>, t: f64) -> DVector<f64> {
        let e = expm(&(-t * &self.a));
        let n = self.dim();
        (DMatrix::identity(n, n) - &e) * &self.b + e * mu0
    }

    /// `Σ(t)` from initial covariance `sigma0`, through the Kronecker-sum
    /// exponential.
    pub fn time_cov(&self, sigma0: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, OuError> {
        let n = self.dim();
        let k = kron_sum(&self.a);
        let ek = expm(&(-t * &k));
        let q = self.noise_cov();
        let vq = DVector::from_column_slice(q.as_slice());
        let rhs = (DMatrix::identity(n * n, n * n) - ek) * vq;
        let part = k.lu().solve(&rhs).ok_or(OuError::StationaryUndefined)?;
        let e = expm(&(-t * &self.a));
        let init = &e * sigma0 * e.transpose();
        let out = DMatrix::from_column_slice(n, n, part.as_slice()) + init;
        Ok((&out + out.transpose()) * 0.5)
    }
}

/// `A ⊕ A = A ⊗ I + I ⊗ A`.
pub fn kron_sum(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    a.kronecker(&eye) + eye.kronecker(a)
}

/// Lower-triangular factor `L` with `L L^T ≈ q`; negative pivots are
/// treated as zero.
pub fn psd_cholesky(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = q[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        let ljj = if d > 0.0 { d.sqrt() } else { 0.0 };
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut v = q[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = if ljj > 0.0 { v / ljj } else { 0.0 };
        }
    }
    l
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3 to 13.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    if n == 0 {
        return eye;
    }
    let norm = norm1(a);
    for (deg, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let p = &v + &u;
    let q = &v - &u;
    q.lu().solve(&p).expect("Padé denominator is invertible")
}

fn pade_low(a: &DMatrix<f64>, c: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let mut powers = vec![eye.clone()];
    for k in 1..c.len() / 2 {
        let next = &powers[k - 1] * &a2;
        powers.push(next);
    }
    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        u += p * c[2 * k + 1];
        v += p * c[2 * k];
    }
    pade_solve(a * u, v)
}

fn pade13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let b = &PADE13;
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    pade_solve(u, v)
}
