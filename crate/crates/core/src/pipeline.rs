//! End-to-end runs: schedule, initial triple and Q inductive steps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::beltrami::{build_families, FrequencyFamily};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::iteration::{initial_triple, iterate, EulerReynoldsTriple, StepParams};
use crate::parameters::ParameterSchedule;

/// Everything a run depends on; identical configs give identical outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eps0: f64,
    pub lambda0: u64,
    /// number of inductive steps Q
    pub stages: usize,
    /// grid points per axis
    pub grid: usize,
    /// RK4 substeps per flow-map integration
    pub substeps: usize,
    /// equispaced report samples per stage
    pub samples: usize,
    pub c0: f64,
    pub d: Option<f64>,
    /// factor applied to the desk-scale μ
    pub mu_scale: f64,
    /// finite-difference step in time
    pub time_step: f64,
    /// write v, p and R̊ at t = 0 for every stage
    pub snapshots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps0: 0.05,
            lambda0: 4,
            stages: 1,
            grid: 128,
            substeps: 8,
            samples: 33,
            c0: 1.0,
            d: None,
            mu_scale: 2.0,
            time_step: 1e-5,
            snapshots: false,
        }
    }
}

impl RunConfig {
    /// Builds the schedule and checks the configuration before any field work.
    pub fn validate(&self) -> Result<ParameterSchedule> {
        if self.substeps == 0 || self.samples < 2 {
            return Err(Error::InvalidArgument(
                "substeps must be positive and samples at least 2".into(),
            ));
        }
        if !(self.mu_scale >= 1.0) || !(self.time_step > 0.0) {
            return Err(Error::InvalidArgument(
                "mu-scale must be at least 1 and the time step positive".into(),
            ));
        }
        let s = ParameterSchedule::build(self.eps0, (self.lambda0 as f64).ln(), self.stages, self.c0)?;
        let s = match self.d {
            Some(d) => {
                if !(d > s.d_min() && d < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "d = {d} must lie in (d_min, 1) = ({}, 1)",
                        s.d_min()
                    )));
                }
                s.with_d(d)
            }
            None => s,
        };
        let grid = GridSpec::new(self.grid)?;
        let top = s.lambda_exact[self.stages].ok_or_else(|| {
            Error::GridCapacity(format!("λ_{} does not fit an integer", self.stages))
        })?;
        if (self.grid as u128) < 8 * top as u128 {
            return Err(Error::GridCapacity(format!(
                "n = {} is below 8·λ_{} = {}",
                self.grid,
                self.stages,
                8 * top as u128
            )));
        }
        if 2.0 * self.lambda0 as f64 > grid.dealias_cutoff() {
            return Err(Error::GridCapacity(format!(
                "n = {} cannot resolve 2λ₀ = {} after dealiasing",
                self.grid,
                2 * self.lambda0
            )));
        }
        Ok(s)
    }

    /// μ used for the step into stage q: the schedule value raised to the
    /// 2^{q+2} floor, times `mu_scale`.
    pub fn run_mu(&self, s: &ParameterSchedule, q: usize) -> f64 {
        s.mu(q).max(2f64.powi(q as i32 + 2)) * self.mu_scale
    }

    pub fn step_params(&self, s: &ParameterSchedule, q: usize) -> Result<StepParams> {
        let lambda_next = s.lambda_exact[q]
            .ok_or_else(|| Error::GridCapacity(format!("λ_{q} does not fit an integer")))?;
        Ok(StepParams {
            lambda_next,
            mu: self.run_mu(s, q),
            ell: s.ell(q),
            eps1: s.eps1,
            substeps: self.substeps,
            time_step: self.time_step,
        })
    }
}

/// The triples of a run, lazily evaluable at any time.
pub struct Run {
    pub config: RunConfig,
    pub schedule: ParameterSchedule,
    pub even: FrequencyFamily,
    pub odd: FrequencyFamily,
    pub stages: Vec<Arc<EulerReynoldsTriple>>,
}

/// Initial triple followed by Q steps. Steps are lazy, so the cost is paid
/// when the stages are evaluated.
pub fn build_run(config: &RunConfig) -> Result<Run> {
    let schedule = config.validate()?;
    let (even, odd) = build_families()?;
    let grid = GridSpec::new(config.grid)?;
    let mut stages = vec![Arc::new(initial_triple(&grid, config.lambda0, config.eps0)?)];
    for q in 1..=config.stages {
        let params = config.step_params(&schedule, q)?;
        let next = iterate(stages[q - 1].clone(), &even, &odd, &params)?;
        stages.push(Arc::new(next));
    }
    Ok(Run {
        config: config.clone(),
        schedule,
        even,
        odd,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_parameters() {
        let c = RunConfig::default();
        let s = c.validate().unwrap();
        let p = c.step_params(&s, 1).unwrap();
        assert_eq!(p.lambda_next, 4);
        assert_eq!(p.mu, 16.0);
        assert!((p.ell - 4f64.powf(-1.0 + s.eps1)).abs() < 1e-15);
    }

    #[test]
    fn capacity_is_checked_first() {
        let c = RunConfig {
            grid: 16,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::GridCapacity(_))));
        let c = RunConfig {
            eps0: 0.5,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_steps_builds_initial_only() {
        let c = RunConfig {
            stages: 0,
            grid: 32,
            ..RunConfig::default()
        };
        let r = build_run(&c).unwrap();
        assert_eq!(r.stages.len(), 1);
        assert_eq!(r.stages[0].q, 0);
    }
}
