//! Weighted nonlinear least squares for the two decay models, with
//! nonparametric bootstrap uncertainties.
//!
//! Gauss-Newton with Levenberg damping; parameters are bounded through a
//! logistic reparameterization and initialized from a log-linear transform
//! of (p - asymptote). Asymptotes are fixed by the models (1/4 for
//! randomized benchmarking, 1/2 for the T-gate decay), not fitted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use super::series::DecaySeries;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {0} distinct sequence lengths")]
    TooFewPoints(usize),
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("degenerate data: all survival probabilities equal {0}")]
    Degenerate(f64),
    #[error("bad series: {0}")]
    Series(#[from] super::series::SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayModel {
    /// p(L) = a f^L + 1/4
    RbClifford,
    /// p(L) = 1/2 + (1/2)(1-2e)^L
    TDephasing,
}

/// Fit output: estimates, derived average fidelities, bootstrap errors.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: DecayModel,
    /// (a, f) for the RB model; (epsilon,) for the T model.
    pub params: Vec<f64>,
    pub param_stderr: Vec<f64>,
    /// Average fidelity derived from the fitted decay.
    pub favg: f64,
    pub favg_stderr: f64,
    /// RB only: (1 - favg) / mean CNOTs per Clifford.
    pub per_cnot_infidelity: Option<f64>,
    pub residuals: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

struct Problem<'a> {
    lengths: &'a [u32],
    survival: &'a [f64],
    weights: Vec<f64>,
    model: DecayModel,
}

impl Problem<'_> {
    fn predict(&self, theta: &[f64], length: u32) -> f64 {
        let l = length as i32;
        match self.model {
            DecayModel::RbClifford => {
                let a = 0.75 * sigmoid(theta[0]);
                let f = sigmoid(theta[1]);
                a * f.powi(l) + 0.25
            }
            DecayModel::TDephasing => {
                let eps = 0.5 * sigmoid(theta[0]);
                0.5 + 0.5 * (1.0 - 2.0 * eps).powi(l)
            }
        }
    }

    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        self.lengths
            .iter()
            .zip(self.survival)
            .zip(&self.weights)
            .map(|((&l, &p), &w)| w * (p - self.predict(theta, l)))
            .collect()
    }

    fn sse(&self, theta: &[f64]) -> f64 {
        self.residuals(theta).iter().map(|r| r * r).sum()
    }

    /// d model / d theta_k at one length, analytic.
    fn jacobian_row(&self, theta: &[f64], length: u32) -> [f64; 2] {
        let l = f64::from(length);
        match self.model {
            DecayModel::RbClifford => {
                let sa = sigmoid(theta[0]);
                let sf = sigmoid(theta[1]);
                let a = 0.75 * sa;
                let f = sf;
                let fl = f.powi(length as i32);
                let da = 0.75 * sa * (1.0 - sa) * fl;
                let df = if length == 0 {
                    0.0
                } else {
                    a * l * f.powi(length as i32 - 1) * sf * (1.0 - sf)
                };
                [da, df]
            }
            DecayModel::TDephasing => {
                let sg = sigmoid(theta[0]);
                let eps = 0.5 * sg;
                let base = 1.0 - 2.0 * eps;
                let d = if length == 0 {
                    0.0
                } else {
                    // d/dg of 0.5 base^L with d eps/dg = 0.5 s(1-s).
                    -0.5 * l * base.powi(length as i32 - 1) * sg * (1.0 - sg)
                };
                [d, 0.0]
            }
        }
    }

    /// Gauss-Newton with Levenberg damping; analytic Jacobian.
    fn solve(&self, mut theta: Vec<f64>) -> Result<Vec<f64>, FitError> {
        let n = theta.len();
        let mut lambda = 1e-3;
        let mut sse = self.sse(&theta);
        for _ in 0..300 {
            let r = self.residuals(&theta);
            // r_i = w_i (p_i - m_i), so d r_i / d theta_k = -w_i dm/dtheta_k.
            let mut jac = vec![vec![0.0; n]; r.len()];
            for (i, (&l, &w)) in self.lengths.iter().zip(&self.weights).enumerate() {
                let dm = self.jacobian_row(&theta, l);
                for k in 0..n {
                    jac[i][k] = -w * dm[k];
                }
            }
            // Normal equations (at most 2x2).
            let mut jtj = [[0.0f64; 2]; 2];
            let mut jtr = [0.0f64; 2];
            for i in 0..r.len() {
                for a in 0..n {
                    jtr[a] += jac[i][a] * r[i];
                    for b in 0..n {
                        jtj[a][b] += jac[i][a] * jac[i][b];
                    }
                }
            }
            let mut improved = false;
            for _ in 0..20 {
                let mut m = jtj;
                for (a, row) in m.iter_mut().enumerate().take(n) {
                    row[a] += lambda * (jtj[a][a].max(1e-12));
                }
                let delta = match n {
                    1 => {
                        if m[0][0].abs() < 1e-300 {
                            return Err(FitError::NonConvergence("singular normal matrix".into()));
                        }
                        vec![-jtr[0] / m[0][0]]
                    }
                    2 => {
                        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                        if det.abs() < 1e-300 {
                            return Err(FitError::NonConvergence("singular normal matrix".into()));
                        }
                        vec![
                            -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det,
                            -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det,
                        ]
                    }
                    _ => unreachable!(),
                };
                let cand: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
                let cand_sse = self.sse(&cand);
                if cand_sse.is_finite() && cand_sse <= sse {
                    let step: f64 = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
                    theta = cand;
                    sse = cand_sse;
                    lambda = (lambda / 3.0).max(1e-14);
                    improved = true;
                    if step < 1e-12 || sse < 1e-22 {
                        return Ok(theta);
                    }
                    break;
                }
                lambda *= 5.0;
            }
            if !improved {
                return Ok(theta);
            }
        }
        Ok(theta)
    }
}

fn weights(survival: &[f64], shots: &[u64]) -> Vec<f64> {
    survival
        .iter()
        .zip(shots)
        .map(|(&p, &n)| {
            let var = (p * (1.0 - p)).max(1e-3);
            ((n.max(1) as f64) / var).sqrt()
        })
        .collect()
}

/// Log-linear initialization: ln(p - asymptote) = ln(amp) + L ln(decay).
fn log_linear_init(lengths: &[u32], survival: &[f64], asymptote: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = lengths
        .iter()
        .zip(survival)
        .filter(|(_, &p)| p > asymptote + 1e-6)
        .map(|(&l, &p)| (l as f64, (p - asymptote).ln()))
        .collect();
    if pts.len() < 2 {
        return (1.0 - asymptote, 0.9);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return (1.0 - asymptote, 0.9);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept.exp(), slope.exp())
}

fn check_series(series: &DecaySeries, min_points: usize) -> Result<(), FitError> {
    series.validate()?;
    if series.lengths.len() < min_points {
        return Err(FitError::TooFewPoints(min_points));
    }
    Ok(())
}

fn all_equal(survival: &[f64]) -> Option<f64> {
    let first = survival[0];
    if survival.iter().all(|&p| (p - first).abs() < 1e-12) {
        Some(first)
    } else {
        None
    }
}

fn fit_core(
    model: DecayModel,
    lengths: &[u32],
    survival: &[f64],
    shots: &[u64],
) -> Result<Vec<f64>, FitError> {
    let problem =
        Problem { lengths, survival, weights: weights(survival, shots), model };
    let theta0 = match model {
        DecayModel::RbClifford => {
            let (a0, f0) = log_linear_init(lengths, survival, 0.25);
            vec![logit((a0 / 0.75).clamp(0.05, 0.95)), logit(f0.clamp(0.05, 0.999))]
        }
        DecayModel::TDephasing => {
            let (_, d0) = log_linear_init(lengths, survival, 0.5);
            // decay base = 1 - 2 eps.
            let eps0 = (0.5 * (1.0 - d0)).clamp(1e-4, 0.45);
            vec![logit(eps0 / 0.5)]
        }
    };
    let theta = problem.solve(theta0)?;
    Ok(match model {
        DecayModel::RbClifford => vec![0.75 * sigmoid(theta[0]), sigmoid(theta[1])],
        DecayModel::TDephasing => vec![0.5 * sigmoid(theta[0])],
    })
}

fn bootstrap<F: Fn(&[f64]) -> f64>(
    model: DecayModel,
    series: &DecaySeries,
    replicates: usize,
    derive: F,
) -> (Vec<f64>, f64) {
    let mut rng = ChaCha12Rng::seed_from_u64(series.seed ^ 0x626f_6f74);
    let mut param_samples: Vec<Vec<f64>> = Vec::with_capacity(replicates);
    let mut derived_samples = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let resampled: Vec<f64> = series
            .survival
            .iter()
            .zip(&series.shots)
            .map(|(&p, &n)| {
                let n = n.max(1);
                let dist = rand_distr::Binomial::new(n, p.clamp(0.0, 1.0)).unwrap();
                rng.sample(dist) as f64 / n as f64
            })
            .collect();
        if let Ok(params) = fit_core(model, &series.lengths, &resampled, &series.shots) {
            derived_samples.push(derive(&params));
            param_samples.push(params);
        }
    }
    let nparams = match model {
        DecayModel::RbClifford => 2,
        DecayModel::TDephasing => 1,
    };
    let stderr = (0..nparams)
        .map(|k| std_dev(param_samples.iter().map(|p| p[k])))
        .collect();
    (stderr, std_dev(derived_samples.iter().copied()))
}

fn std_dev(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub const BOOTSTRAP_REPLICATES: usize = 200;

/// Fit the randomized-benchmarking decay and derive per-Clifford and
/// per-CNOT average fidelities.
pub fn fit_rb(series: &DecaySeries, mean_cnots_per_clifford: f64) -> Result<FitResult, FitError> {
    check_series(series, 3)?;
    if let Some(c) = all_equal(&series.survival) {
        if (c - 1.0).abs() < 1e-9 {
            return Ok(FitResult {
                model: DecayModel::RbClifford,
                params: vec![0.75, 1.0],
                param_stderr: vec![0.0, 0.0],
                favg: 1.0,
                favg_stderr: 0.0,
                per_cnot_infidelity: Some(0.0),
                residuals: vec![0.0; series.lengths.len()],
            });
        }
        return Err(FitError::Degenerate(c));
    }
    let params = fit_core(DecayModel::RbClifford, &series.lengths, &series.survival, &series.shots)?;
    let favg = 1.0 - 3.0 * (1.0 - params[1]) / 4.0;
    let (param_stderr, favg_stderr) =
        bootstrap(DecayModel::RbClifford, series, BOOTSTRAP_REPLICATES, |p| {
            1.0 - 3.0 * (1.0 - p[1]) / 4.0
        });
    let residuals = series
        .lengths
        .iter()
        .zip(&series.survival)
        .map(|(&l, &p)| p - (params[0] * params[1].powi(l as i32) + 0.25))
        .collect();
    Ok(FitResult {
        model: DecayModel::RbClifford,
        favg,
        favg_stderr,
        per_cnot_infidelity: Some((1.0 - favg) / mean_cnots_per_clifford),
        params,
        param_stderr,
        residuals,
    })
}

/// Fit the T-gate dephasing decay and derive the average fidelity.
pub fn fit_t_decay(series: &DecaySeries) -> Result<FitResult, FitError> {
    check_series(series, 3)?;
    if let Some(c) = all_equal(&series.survival) {
        if (c - 1.0).abs() < 1e-9 {
            return Ok(FitResult {
                model: DecayModel::TDephasing,
                params: vec![0.0],
                param_stderr: vec![0.0],
                favg: 1.0,
                favg_stderr: 0.0,
                per_cnot_infidelity: None,
                residuals: vec![0.0; series.lengths.len()],
            });
        }
        return Err(FitError::Degenerate(c));
    }
    let params = fit_core(DecayModel::TDephasing, &series.lengths, &series.survival, &series.shots)?;
    let eps = params[0];
    let favg = 1.0 - 2.0 * eps / 3.0;
    let (param_stderr, favg_stderr) =
        bootstrap(DecayModel::TDephasing, series, BOOTSTRAP_REPLICATES, |p| {
            1.0 - 2.0 * p[0] / 3.0
        });
    let residuals = series
        .lengths
        .iter()
        .zip(&series.survival)
        .map(|(&l, &p)| p - (0.5 + 0.5 * (1.0 - 2.0 * eps).powi(l as i32)))
        .collect();
    Ok(FitResult {
        model: DecayModel::TDephasing,
        favg,
        favg_stderr,
        per_cnot_infidelity: None,
        params,
        param_stderr,
        residuals,
    })
}
