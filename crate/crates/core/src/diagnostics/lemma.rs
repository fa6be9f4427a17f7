use serde::{Deserialize, Serialize};

use crate::beltrami::FrequencyFamily;
use crate::error::Result;
use crate::field::{c0_norm, cn_norm};
use crate::iteration::PerturbationSlice;
use crate::linalg;

/// One measured left side against its constant-free right side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub q: usize,
    pub t: f64,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// measured / bound, the empirical constant; 0 when the bound vanishes
    pub constant: f64,
}

impl LemmaRow {
    fn new(q: usize, t: f64, name: &str, measured: f64, bound: f64) -> Self {
        LemmaRow {
            q,
            t,
            name: name.to_string(),
            measured,
            bound,
            constant: if bound > 0.0 { measured / bound } else { 0.0 },
        }
    }
}

pub const DPHI_MINUS_ID: &str = "dphi_minus_id";
pub const AMPLITUDE_PLUS_L: &str = "amplitude_plus_l";
pub const AMPLITUDE_GAMMA: &str = "amplitude_vs_gamma_range";
pub const CORRECTOR_0: &str = "corrector_c0";
pub const CORRECTOR_1: &str = "corrector_c1";
pub const OSCILLATION_0: &str = "oscillation_c0";
pub const OSCILLATION_1: &str = "oscillation_c1";

/// max over the certified ball of γ_k = sqrt(c_k): c_k(Id) plus r0 times the
/// nuclear norm of its dual matrix, since the ball is an operator-norm ball.
pub fn gamma_ceiling(family: &FrequencyFamily, r0: f64) -> f64 {
    let at_id = family.pair_coefficients(&linalg::SYM_IDENTITY);
    family
        .coefficient_duals()
        .iter()
        .zip(at_id)
        .map(|(c, base)| {
            let nuclear: f64 = linalg::sym_eigenvalues(*c).iter().map(|x| x.abs()).sum();
            (base + r0 * nuclear).max(0.0).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Parameters of the step into stage q, in natural units.
#[derive(Clone, Copy, Debug)]
pub struct StepScales {
    /// λ_{q−1} and δ_{q−1}^{1/2}, possibly localized
    pub lambda_prev: f64,
    pub sqrt_delta_prev: f64,
    /// λ_q and δ_q^{1/2}, possibly localized
    pub lambda: f64,
    pub sqrt_delta: f64,
    pub mu: f64,
}

/// Empirical constants of the perturbation estimates at one time.
pub fn track_lemma_quantities(
    q: usize,
    slice: &PerturbationSlice,
    sc: &StepScales,
    gamma_max: f64,
) -> Result<Vec<LemmaRow>> {
    let t = slice.t;
    let st = &slice.stats;
    let transport = sc.sqrt_delta_prev * sc.lambda_prev / sc.mu;
    let max_rho = st.rhos.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut rows = vec![
        LemmaRow::new(q, t, DPHI_MINUS_ID, st.max_distortion, transport),
        LemmaRow::new(q, t, AMPLITUDE_PLUS_L, st.max_amplitude + st.max_l_norm, sc.sqrt_delta),
        LemmaRow::new(q, t, AMPLITUDE_GAMMA, st.max_amplitude, max_rho.sqrt() * gamma_max),
    ];
    if let Some(w_c) = &slice.w_c {
        let b = sc.sqrt_delta * transport;
        rows.push(LemmaRow::new(q, t, CORRECTOR_0, c0_norm(w_c), b));
        rows.push(LemmaRow::new(q, t, CORRECTOR_1, cn_norm(w_c, 1)?, b * sc.lambda));
    }
    rows.push(LemmaRow::new(q, t, OSCILLATION_0, c0_norm(&slice.w_o), sc.sqrt_delta));
    rows.push(LemmaRow::new(
        q,
        t,
        OSCILLATION_1,
        cn_norm(&slice.w_o, 1)?,
        sc.sqrt_delta * sc.lambda,
    ));
    Ok(rows)
}

/// Largest empirical constant per row name, in first-seen order.
pub fn max_constants(rows: &[LemmaRow]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(n, _)| *n == r.name) {
            Some(e) => e.1 = e.1.max(r.constant),
            None => out.push((r.name.clone(), r.constant)),
        }
    }
    out
}
