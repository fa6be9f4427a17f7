use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::residual::{euler_reynolds_residual, Residual, TimeDerivative};
use crate::error::Result;
use crate::field::{c0_norm, cn_norm, divergence, energy, holder_norm, ops, Field};
use crate::iteration::EulerReynoldsTriple;
use crate::parameters::{localized_delta, ParameterSchedule};
use crate::{TensorField, VectorField};

/// Norms of one stage at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub q: usize,
    pub t: f64,
    pub residual: Residual,
    pub residual_mode: TimeDerivative,
    pub div_v: f64,
    pub energy: f64,
    pub holder13_v: f64,
    pub holder23_p: f64,
    pub v1: f64,
    pub p1: f64,
    pub p2: f64,
    pub r0: f64,
    pub r1: f64,
    /// ‖(∂_t + v·∇)R̊‖₀ with a centered difference in time
    pub material_r: f64,
    /// ‖w‖₀, ‖w‖₁ and ‖∂_t w‖₀ for q ≥ 1
    pub w: Option<[f64; 3]>,
    /// ‖Δp‖₀, ‖Δp‖₁, ‖Δp‖₂ and ‖∂_tΔp‖₀ for q ≥ 1, Δp = p_q − p_{q−1}
    pub dp: Option<[f64; 4]>,
    /// Σ_{1 ≤ j ≤ q} ‖w_j‖₀
    pub w_sum: f64,
    /// ‖v₀‖₀
    pub v0_norm: f64,
}

/// (a·∇)R for a symmetric tensor R.
fn advect_tensor(a: &VectorField, r: &TensorField) -> Result<TensorField> {
    let grads = ops::first_derivatives(&r.grid, &r.comps);
    let n = r.grid.len();
    let comps: [Vec<f64>; 6] = std::array::from_fn(|c| {
        (0..n)
            .map(|i| (0..3).map(|j| a.comps[j][i] * grads[c][j][i]).sum())
            .collect()
    });
    TensorField::new(r.grid, comps)
}

/// Measures stage q at t; `stages` holds the stages 0..=q of one run.
pub fn measure(stages: &[Arc<EulerReynoldsTriple>], q: usize, t: f64, dt: f64) -> Result<Measurement> {
    let cur = &stages[q];
    // touch t − Δt, t, t + Δt in order so each perturbation is assembled once
    for s in [t - dt, t, t + dt] {
        cur.velocity(s)?;
        cur.pressure(s)?;
        cur.stress(s)?;
    }
    let mode = if cur.dv_dt.is_some() {
        TimeDerivative::Analytic
    } else {
        TimeDerivative::Centered(dt)
    };
    let residual = euler_reynolds_residual(cur, t, mode)?;
    let v = cur.velocity(t)?;
    let p = cur.pressure(t)?;
    let r = cur.stress(t)?;
    let dr = cur.stress(t + dt)?.sub(&*cur.stress(t - dt)?)?.scale(0.5 / dt);
    let material = dr.add(&advect_tensor(&v, &r)?)?;
    let (w, dp) = if q >= 1 {
        let prev = &stages[q - 1];
        let wq = v.sub(&*prev.velocity(t)?)?;
        let dtw = match &cur.step {
            Some(ctx) => ctx.perturbation_rate(t)?,
            None => {
                let a = cur.velocity(t + dt)?.sub(&*prev.velocity(t + dt)?)?;
                let b = cur.velocity(t - dt)?.sub(&*prev.velocity(t - dt)?)?;
                a.sub(&b)?.scale(0.5 / dt)
            }
        };
        let dpq = p.sub(&*prev.pressure(t)?)?;
        let a = cur.pressure(t + dt)?.sub(&*prev.pressure(t + dt)?)?;
        let b = cur.pressure(t - dt)?.sub(&*prev.pressure(t - dt)?)?;
        let dtdp = a.sub(&b)?.scale(0.5 / dt);
        (
            Some([c0_norm(&wq), cn_norm(&wq, 1)?, c0_norm(&dtw)]),
            Some([
                c0_norm(&dpq),
                cn_norm(&dpq, 1)?,
                cn_norm(&dpq, 2)?,
                c0_norm(&dtdp),
            ]),
        )
    } else {
        (None, None)
    };
    let mut w_sum = 0.0;
    for j in 1..=q {
        let a = stages[j].velocity(t)?;
        let b = stages[j - 1].velocity(t)?;
        w_sum += c0_norm(&a.sub(&b)?);
    }
    let v0_norm = c0_norm(&*stages[0].velocity(t)?);
    Ok(Measurement {
        q,
        t,
        residual,
        residual_mode: mode,
        div_v: c0_norm(&divergence(&v)),
        energy: energy(&*v),
        holder13_v: holder_norm(&*v, 1.0 / 3.0)?,
        holder23_p: holder_norm(&*p, 2.0 / 3.0)?,
        v1: cn_norm(&*v, 1)?,
        p1: cn_norm(&*p, 1)?,
        p2: cn_norm(&*p, 2)?,
        r0: c0_norm(&*r),
        r1: cn_norm(&*r, 1)?,
        material_r: c0_norm(&material),
        w,
        dp,
        w_sum,
        v0_norm,
    })
}

/// `samples` equispaced times over the support, plus the slice centres l/μ
/// and the overlap midpoints (l + ½)/μ inside it.
pub fn sample_times(support: (f64, f64), mu: Option<f64>, samples: usize) -> Vec<f64> {
    let (a, b) = support;
    let mut out: Vec<f64> = (0..samples)
        .map(|i| a + (b - a) * i as f64 / (samples.max(2) - 1) as f64)
        .collect();
    if let Some(mu) = mu {
        let lo = (a * mu).floor() as i64 - 1;
        let hi = (b * mu).ceil() as i64 + 1;
        for l in lo..=hi {
            for t in [l as f64 / mu, (l as f64 + 0.5) / mu] {
                if t > a && t < b {
                    out.push(t);
                }
            }
        }
    }
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    out
}

/// Natural-log parameters the bounds of stage q need at time t.
#[derive(Clone, Debug, PartialEq)]
pub struct StageScales {
    pub q: usize,
    pub eps0: f64,
    pub c0: f64,
    /// ln λ_{q−1}, ln λ_q, ln λ_{q+1} (the first is ln λ_q when q = 0)
    pub ln_lambda: [f64; 3],
    /// ln δ at the same indices
    pub ln_delta: [f64; 3],
    /// ln δ_{·,t} at the same indices
    pub ln_delta_loc: [f64; 3],
}

impl StageScales {
    pub fn new(s: &ParameterSchedule, q: usize, t: f64, stages: usize) -> Result<Self> {
        let idx = [q.saturating_sub(1), q, q + 1];
        let loc = localized_delta(s, t, stages)?;
        let loc_at = |j: usize| -> f64 {
            if loc.n.is_some() {
                loc.ln_delta[j]
            } else {
                s.ln_delta[j]
            }
        };
        Ok(StageScales {
            q,
            eps0: s.eps0,
            c0: s.c0,
            ln_lambda: idx.map(|j| s.ln_lambda[j]),
            ln_delta: idx.map(|j| s.ln_delta[j]),
            ln_delta_loc: idx.map(loc_at),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    /// a sharp row at a time inside the bad set
    Skipped,
    /// the row has no meaning at this (q, t)
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub q: usize,
    pub t: f64,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub status: RowStatus,
}

pub const V_ITER: &str = "v_iter";
pub const P_ITER: &str = "p_iter";
pub const R_ITER: &str = "r_iter";
pub const SHARP_V: &str = "sharp_v";
pub const SHARP_P: &str = "sharp_p";
pub const SHARP_R: &str = "sharp_r";
pub const NONTRIVIAL: &str = "nontrivial";
pub const DELTA_V: &str = "delta_v";
pub const DELTA_P: &str = "delta_p";
pub const ITER_REY: &str = "iter_rey";
pub const DELTA_MATERIAL: &str = "delta_material";
pub const DELTA_V_LOC: &str = "delta_v_localized";
pub const DELTA_P_LOC: &str = "delta_p_localized";
pub const ITER_REY_LOC: &str = "iter_rey_localized";
pub const DELTA_MATERIAL_LOC: &str = "delta_material_localized";

/// Every row a (q, t) set carries, in emission order.
pub const ESTIMATE_NAMES: [&str; 15] = [
    V_ITER,
    P_ITER,
    R_ITER,
    SHARP_V,
    SHARP_P,
    SHARP_R,
    NONTRIVIAL,
    DELTA_V,
    DELTA_P,
    ITER_REY,
    DELTA_MATERIAL,
    DELTA_V_LOC,
    DELTA_P_LOC,
    ITER_REY_LOC,
    DELTA_MATERIAL_LOC,
];

/// Measured-versus-bound rows for one (q, t). Sharp rows are only judged
/// outside the bad set; nothing here aborts.
pub fn verify_stage_estimates(m: &Measurement, sc: &StageScales, in_bad_set: bool) -> Vec<EstimateRow> {
    let (q, t, e0) = (m.q, m.t, sc.eps0);
    let lam = sc.ln_lambda[1].exp();
    let lam_next = sc.ln_lambda[2];
    let row = |name: &str, measured: f64, bound: f64, strict: bool| EstimateRow {
        q,
        t,
        name: name.to_string(),
        measured,
        bound,
        status: if (strict && measured < bound) || (!strict && measured <= bound) {
            RowStatus::Pass
        } else {
            RowStatus::Fail
        },
    };
    let na = |name: &str| EstimateRow {
        q,
        t,
        name: name.to_string(),
        measured: 0.0,
        bound: 0.0,
        status: RowStatus::NotApplicable,
    };
    let skip_if = |mut r: EstimateRow, skip: bool| {
        if skip {
            r.status = RowStatus::Skipped;
        }
        r
    };
    let lhs_w = m.w.map(|[w0, w1, dtw]| w0 + dtw / lam + w1 / lam);
    let lhs_p = m.dp.map(|[p0, _, p2, dtp]| p0 + dtp / lam + p2 / (lam * lam));
    let lhs_r = m.r0 + m.r1 / lam;
    let ln_lam = sc.ln_lambda[1];
    let mut rows = Vec::with_capacity(ESTIMATE_NAMES.len());
    match lhs_w {
        Some(x) => rows.push(row(V_ITER, x, ((-0.2 + e0) * ln_lam).exp(), false)),
        None => rows.push(na(V_ITER)),
    }
    match lhs_p {
        Some(x) => rows.push(row(P_ITER, x, ((-0.4 + 2.0 * e0) * ln_lam).exp(), false)),
        None => rows.push(na(P_ITER)),
    }
    rows.push(row(R_ITER, lhs_r, ((-0.4 + 2.0 * e0) * lam_next).exp(), false));
    match lhs_w {
        Some(x) => rows.push(skip_if(
            row(SHARP_V, x, ((-1.0 / 3.0 + e0) * ln_lam).exp(), false),
            in_bad_set,
        )),
        None => rows.push(na(SHARP_V)),
    }
    match lhs_p {
        Some(x) => rows.push(skip_if(
            row(SHARP_P, x, ((-2.0 / 3.0 + 2.0 * e0) * ln_lam).exp(), false),
            in_bad_set,
        )),
        None => rows.push(na(SHARP_P)),
    }
    rows.push(skip_if(
        row(SHARP_R, lhs_r, ((-2.0 / 3.0 + 2.0 * e0) * lam_next).exp(), false),
        in_bad_set,
    ));
    if q >= 1 && t.abs() <= 0.125 {
        rows.push(row(NONTRIVIAL, m.w_sum, 0.5 * m.v0_norm, true));
    } else {
        rows.push(na(NONTRIVIAL));
    }
    for (local, names) in [
        (false, [DELTA_V, DELTA_P, ITER_REY, DELTA_MATERIAL]),
        (true, [DELTA_V_LOC, DELTA_P_LOC, ITER_REY_LOC, DELTA_MATERIAL_LOC]),
    ] {
        let d = if local { sc.ln_delta_loc } else { sc.ln_delta };
        rows.push(row(names[0], m.v1 / lam, (0.5 * d[1]).exp(), false));
        rows.push(row(names[1], m.p1 / lam + m.p2 / (lam * lam), d[1].exp(), false));
        rows.push(row(names[2], lhs_r, d[2].exp() / sc.c0, false));
        rows.push(row(
            names[3],
            m.material_r,
            (d[2] + 0.5 * d[1] + ln_lam).exp(),
            false,
        ));
    }
    rows
}
