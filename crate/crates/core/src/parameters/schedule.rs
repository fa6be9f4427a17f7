use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest λ kept as an exact integer.
const EXACT_LIMIT: f64 = 9.007_199_254_740_992e15;

/// Stage parameters in natural-log space.
///
/// `mu[q]` is the μ of the step that produces stage q (so `mu[0]` is unused and
/// NaN); `ell[q]` is the mollification length of that same step,
/// λ_q^{−1+ε₁}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub eps0: f64,
    pub alpha: f64,
    pub eps1: f64,
    pub ln_lambda0: f64,
    pub c0: f64,
    pub d: Option<f64>,
    /// highest stage index Q the schedule is checked up to
    pub stages: usize,
    pub ln_lambda: Vec<f64>,
    /// λ_q while it fits an f64 mantissa exactly
    pub lambda_exact: Vec<Option<u64>>,
    pub ln_delta: Vec<f64>,
    pub ln_mu: Vec<f64>,
    pub ln_ell: Vec<f64>,
}

impl ParameterSchedule {
    /// Builds the sequences without checking any inequality. Entries run to
    /// q = Q + 2 so that every inequality at q ≤ Q can look one stage ahead.
    pub fn build(eps0: f64, ln_lambda0: f64, stages: usize, c0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 <= 0.1) {
            return Err(Error::InvalidArgument(format!("ε₀ = {eps0} must lie in (0, 0.1]")));
        }
        if !(ln_lambda0 >= 2f64.ln()) || !ln_lambda0.is_finite() {
            return Err(Error::InvalidArgument("λ₀ must be at least 2".into()));
        }
        if !(c0 >= 1.0) {
            return Err(Error::InvalidArgument(format!("C₀ = {c0} must be at least 1")));
        }
        let alpha = 1.0 + eps0;
        let eps1 = eps0 * eps0 / 18.0;
        let len = stages + 3;
        let mut ln_lambda = Vec::with_capacity(len);
        let mut lambda_exact = Vec::with_capacity(len);
        for q in 0..len {
            let raw = alpha.powi(q as i32) * ln_lambda0;
            let v = raw.exp();
            if v < EXACT_LIMIT {
                // floor, guarding against exp rounding just below an integer
                let mut f = v.floor();
                if (v - f - 1.0).abs() < 1e-9 * v.max(1.0) {
                    f += 1.0;
                }
                let f = f.max(1.0);
                ln_lambda.push(f.ln());
                lambda_exact.push(Some(f as u64));
            } else {
                ln_lambda.push(raw);
                lambda_exact.push(None);
            }
        }
        let ln_delta: Vec<f64> = ln_lambda.iter().map(|l| (-0.4 + 2.0 * eps0) * l).collect();
        let mut ln_mu = vec![f64::NAN; len];
        let mut ln_ell = vec![f64::NAN; len];
        for q in 1..len {
            ln_mu[q] = 0.25 * ln_delta[q - 1]
                + 0.25 * ln_delta[q]
                + 0.5 * ln_lambda[q - 1]
                + 0.5 * ln_lambda[q];
            ln_ell[q] = (-1.0 + eps1) * ln_lambda[q];
        }
        Ok(ParameterSchedule {
            eps0,
            alpha,
            eps1,
            ln_lambda0,
            c0,
            d: None,
            stages,
            ln_lambda,
            lambda_exact,
            ln_delta,
            ln_mu,
            ln_ell,
        })
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }

    pub fn lambda(&self, q: usize) -> f64 {
        self.ln_lambda[q].exp()
    }

    pub fn delta(&self, q: usize) -> f64 {
        self.ln_delta[q].exp()
    }

    /// μ of the step producing stage q ≥ 1.
    pub fn mu(&self, q: usize) -> f64 {
        self.ln_mu[q].exp()
    }

    pub fn ell(&self, q: usize) -> f64 {
        self.ln_ell[q].exp()
    }

    /// Hausdorff threshold d_min(ε₀).
    pub fn d_min(&self) -> f64 {
        d_min(self.eps0)
    }
}

/// (1+α)(4/5+ε₀) / ((1+α)(4/5+ε₀) + 2αε₁)
pub fn d_min(eps0: f64) -> f64 {
    let alpha = 1.0 + eps0;
    let eps1 = eps0 * eps0 / 18.0;
    let a = (1.0 + alpha) * (0.8 + eps0);
    a / (a + 2.0 * alpha * eps1)
}

/// Checked constructor: rejects seeds for which a global inequality fails at
/// some q ≤ Q.
pub fn make_schedule(eps0: f64, lambda0: f64, stages: usize, c0: f64) -> Result<ParameterSchedule> {
    let s = ParameterSchedule::build(eps0, lambda0.ln(), stages, c0)?;
    let ledger = super::check_global_inequalities(&s, stages);
    if let Some(row) = ledger.rows.iter().find(|r| !r.pass) {
        return Err(Error::SeedTooSmall {
            inequality: row.name.clone(),
            q: row.q,
        });
    }
    Ok(s)
}
