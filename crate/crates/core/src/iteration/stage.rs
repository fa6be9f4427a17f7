//! The inductive step (v, p, R̊) ↦ (v₁, p₁, R̊₁).

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::cutoff::CutoffFamily;
use super::flow::{SeparableSampler, VelocitySampler, ZeroSampler};
use super::interp::InterpolatingSampler;
use super::perturbation::{
    assemble_perturbation, AssemblyInput, AssemblyMode, PerturbationSlice, SliceStress,
};
use super::reynolds::{pressure_increment, ReynoldsComponents, ReynoldsInput};
use super::triple::EulerReynoldsTriple;
use crate::beltrami::FrequencyFamily;
use crate::error::{Error, Result};
use crate::field::{mean, mollify, ops, Field, TimeField};
use crate::linalg;
use crate::{ScalarField, TensorField, VectorField};

/// Stage parameters of one step at desk scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// λ_{q+1}
    pub lambda_next: u64,
    pub mu: f64,
    /// mollification length ℓ
    pub ell: f64,
    pub eps1: f64,
    pub substeps: usize,
    /// finite-difference step the cutoff overlaps must resolve
    pub time_step: f64,
}

/// ρ_l = 2‖R̊(·, l/μ)‖₀ / r0
pub fn rho(stress: &TensorField, r0: f64) -> f64 {
    SliceStress::rho(stress, r0)
}

/// p₁ = p + increment, normalized to zero mean.
pub fn new_pressure(
    p: &ScalarField,
    w_o: &VectorField,
    w_c: &VectorField,
    v: &VectorField,
    v_ell: &VectorField,
) -> Result<ScalarField> {
    let w = w_o.add(w_c)?;
    let inc = pressure_increment(w_o, w_c, &w, v, v_ell)?;
    let s = p.add(&inc)?;
    let m = mean(&s);
    Ok(s.map_components(|c| c.iter().map(|x| x - m).collect()))
}

const SLICE_MEMO: usize = 3;

/// Everything the new stage needs to evaluate itself at any t, plus the
/// internals diagnostics read back.
pub struct StepContext {
    pub prev: Arc<EulerReynoldsTriple>,
    pub even: FrequencyFamily,
    pub odd: FrequencyFamily,
    pub r0: f64,
    pub params: StepParams,
    pub cutoffs: CutoffFamily,
    sampler: Arc<dyn VelocitySampler>,
    slices: Mutex<BTreeMap<i64, Option<Arc<SliceStress>>>>,
    memo: Mutex<VecDeque<(u64, Arc<PerturbationSlice>)>>,
}

impl StepContext {
    pub fn sampler(&self) -> &dyn VelocitySampler {
        &*self.sampler
    }

    pub fn clear(&self) {
        self.memo.lock().unwrap().clear();
    }

    /// ρ_l and R_l ∗ ψ_ℓ, or `None` when ρ_l = 0.
    pub fn slice_stress(&self, l: i64) -> Result<Option<Arc<SliceStress>>> {
        if let Some(s) = self.slices.lock().unwrap().get(&l) {
            return Ok(s.clone());
        }
        let t = l as f64 / self.cutoffs.mu;
        let r = self.prev.stress(t)?;
        let rho = rho(&r, self.r0);
        let s = if rho == 0.0 {
            None
        } else {
            let mut rl = r.scale(-1.0);
            rl.add_identity(&vec![rho; rl.grid.len()]);
            let m = mollify(&rl, self.params.ell)?;
            Some(Arc::new(SliceStress::new(l, rho, &m.field)))
        };
        self.slices.lock().unwrap().insert(l, s.clone());
        Ok(s)
    }

    pub fn rho_l(&self, l: i64) -> Result<f64> {
        Ok(self.slice_stress(l)?.map(|s| s.rho).unwrap_or(0.0))
    }

    fn input(&self, t: f64) -> Result<AssemblyInput<'_>> {
        let mut slices = Vec::new();
        for l in self.cutoffs.active(t) {
            if let Some(s) = self.slice_stress(l)? {
                slices.push(s);
            }
        }
        Ok(AssemblyInput {
            grid: self.prev.grid,
            even: &self.even,
            odd: &self.odd,
            r0: self.r0,
            cutoffs: &self.cutoffs,
            lambda: self.params.lambda_next as f64,
            sampler: &*self.sampler,
            substeps: self.params.substeps,
            slices,
        })
    }

    /// w_o, w, w_c, Ω and Σχ²R_{ℓ,l} at t, memoized by the bits of t.
    pub fn perturbation(&self, t: f64) -> Result<Arc<PerturbationSlice>> {
        let key = t.to_bits();
        if let Some((_, s)) = self.memo.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(s.clone());
        }
        let input = self.input(t)?;
        let s = Arc::new(assemble_perturbation(&input, t, AssemblyMode::Full)?);
        let mut memo = self.memo.lock().unwrap();
        if memo.len() >= SLICE_MEMO {
            memo.pop_front();
        }
        memo.push_back((key, s.clone()));
        Ok(s)
    }

    pub fn v_ell(&self, t: f64) -> Result<VectorField> {
        Ok(mollify(&*self.prev.velocity(t)?, self.params.ell)?.field)
    }

    pub fn velocity(&self, t: f64) -> Result<VectorField> {
        let s = self.perturbation(t)?;
        self.prev.velocity(t)?.add(s.w.as_ref().unwrap())
    }

    /// ∂_t w = Ω − v_ℓ·∇w − w·∇v_ℓ
    pub fn perturbation_rate(&self, t: f64) -> Result<VectorField> {
        let s = self.perturbation(t)?;
        let w = s.w.as_ref().unwrap();
        let v_ell = self.v_ell(t)?;
        let adv = advect(&v_ell, w)?.add(&advect(w, &v_ell)?)?;
        s.omega.as_ref().unwrap().sub(&adv)
    }

    pub fn pressure(&self, t: f64) -> Result<ScalarField> {
        let s = self.perturbation(t)?;
        let v = self.prev.velocity(t)?;
        let v_ell = self.v_ell(t)?;
        new_pressure(
            &*self.prev.pressure(t)?,
            &s.w_o,
            s.w_c.as_ref().unwrap(),
            &v,
            &v_ell,
        )
    }

    pub fn reynolds(&self, t: f64) -> Result<ReynoldsComponents> {
        let s = self.perturbation(t)?;
        let v = self.prev.velocity(t)?;
        let v_ell = self.v_ell(t)?;
        let r = self.prev.stress(t)?;
        let r_ell = mollify(&*r, self.params.ell)?.field;
        ReynoldsComponents::compute(
            &s,
            &ReynoldsInput {
                v: &v,
                v_ell: &v_ell,
                stress: &r,
                stress_ell: &r_ell,
            },
        )
    }
}

/// (a·∇)b
pub fn advect(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    let grads = ops::first_derivatives(&b.grid, &b.comps);
    let n = a.grid.len();
    let comps: [Vec<f64>; 3] = std::array::from_fn(|m| {
        (0..n)
            .map(|i| (0..3).map(|j| a.comps[j][i] * grads[m][j][i]).sum())
            .collect()
    });
    VectorField::new(a.grid, comps)
}

fn sampler_for(prev: &Arc<EulerReynoldsTriple>, params: &StepParams) -> Result<Arc<dyn VelocitySampler>> {
    if let Some(sep) = &prev.separable {
        let shape = mollify(&sep.shape, params.ell)?.field;
        let s = SeparableSampler::new(sep.profile.clone(), &shape);
        if s.is_zero() {
            return Ok(Arc::new(ZeroSampler));
        }
        return Ok(Arc::new(s));
    }
    Ok(Arc::new(InterpolatingSampler::new(
        prev.clone(),
        params.ell,
        1.0 / (params.mu * 4.0 * params.substeps as f64),
    )))
}

/// One step of the construction from stage q to q + 1.
pub fn iterate(
    prev: Arc<EulerReynoldsTriple>,
    even: &FrequencyFamily,
    odd: &FrequencyFamily,
    params: &StepParams,
) -> Result<EulerReynoldsTriple> {
    let grid = prev.grid;
    let lambda = params.lambda_next;
    if lambda < 1 || (8 * lambda) as usize > grid.n {
        return Err(Error::GridCapacity(format!(
            "n = {} is below 8·λ_{} = {}",
            grid.n,
            prev.q + 1,
            8 * lambda
        )));
    }
    let min_mu = 2f64.powi(prev.q as i32 + 3);
    if !(params.mu >= min_mu) {
        return Err(Error::InvalidArgument(format!(
            "μ = {} is below 2^(q+2) = {min_mu} for stage {}",
            params.mu,
            prev.q + 1
        )));
    }
    if !(params.ell > 0.0) || params.substeps == 0 {
        return Err(Error::InvalidArgument("ℓ and substeps must be positive".into()));
    }
    let cutoffs = CutoffFamily::new(params.mu, params.eps1, lambda as f64, params.time_step)?;
    let reach = cutoffs.reach() / params.mu;
    let support = (prev.support.0 - reach, prev.support.1 + reach);
    if support.0 < -0.5 || support.1 > 0.5 {
        return Err(Error::SupportOverflow(support));
    }
    let sampler = sampler_for(&prev, params)?;
    let ctx = Arc::new(StepContext {
        prev: prev.clone(),
        even: even.clone(),
        odd: odd.clone(),
        r0: even.r0.min(odd.r0),
        params: params.clone(),
        cutoffs,
        sampler,
        slices: Mutex::new(BTreeMap::new()),
        memo: Mutex::new(VecDeque::new()),
    });
    let (c1, c2, c3, c4) = (ctx.clone(), ctx.clone(), ctx.clone(), ctx.clone());
    let v = TimeField::new(grid, support, move |t| c1.velocity(t));
    let p = TimeField::new(grid, support, move |t| c2.pressure(t));
    let r = TimeField::new(grid, support, move |t| Ok(c3.reynolds(t)?.total()?.0));
    let dv_dt = prev.dv_dt.as_ref().map(|_| {
        TimeField::new(grid, support, move |t| {
            let base = c4.prev.velocity_rate(t)?.unwrap();
            base.add(&c4.perturbation_rate(t)?)
        })
    });
    Ok(EulerReynoldsTriple {
        q: prev.q + 1,
        grid,
        support,
        v,
        p,
        r,
        dv_dt,
        separable: None,
        step: Some(ctx),
    })
}

/// Constant trace-free part of a symmetric matrix, used by tests and probes.
pub fn trace_free_matrix(m: &linalg::Sym3) -> linalg::Sym3 {
    let t = linalg::sym_trace(m) / 3.0;
    [m[0] - t, m[1], m[2], m[3] - t, m[4], m[5] - t]
}
