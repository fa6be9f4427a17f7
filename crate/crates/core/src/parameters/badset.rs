use serde::{Deserialize, Serialize};

use super::ParameterSchedule;

/// Intervals are listed explicitly only up to this many.
const MAX_LISTED: f64 = 1e6;

/// U^(q): closed intervals of radius λ_q^{−ε₁}/μ_q centred at (l + ½)/μ_q,
/// l ∈ [−μ_q, μ_q].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadSet {
    pub q: usize,
    pub ln_mu: f64,
    /// λ_q^{−ε₁}, the radius in units of 1/μ_q
    pub radius_units: f64,
    /// explicit intervals when their count is manageable
    pub intervals: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    In,
    Out,
    /// not decidable: the computed stages miss t, but the tail or the
    /// floating-point resolution of μt leaves it open
    Unknown,
}

impl BadSet {
    pub fn new(q: usize, ln_mu: f64, ln_lambda: f64, eps1: f64) -> Self {
        let radius_units = (-eps1 * ln_lambda).exp();
        let mu = snap(ln_mu.exp());
        let intervals = (mu.is_finite() && 2.0 * mu + 1.0 <= MAX_LISTED).then(|| {
            let lo = (-mu).ceil() as i64;
            let hi = mu.floor() as i64;
            (lo..=hi)
                .map(|l| {
                    let c = l as f64 + 0.5;
                    ((c - radius_units) / mu, (c + radius_units) / mu)
                })
                .collect()
        });
        BadSet {
            q,
            ln_mu,
            radius_units,
            intervals,
        }
    }

    pub fn mu(&self) -> f64 {
        snap(self.ln_mu.exp())
    }

    /// Number of intervals, ⌊μ⌋ − ⌈−μ⌉ + 1.
    pub fn count(&self) -> f64 {
        let mu = self.mu();
        mu.floor() - (-mu).ceil() + 1.0
    }

    /// Σ interval lengths, 2·count·λ^{−ε₁}/μ.
    pub fn total_length(&self) -> f64 {
        2.0 * self.count() * self.radius_units / self.mu()
    }

    /// Neighbouring intervals do not touch.
    pub fn disjoint(&self) -> bool {
        self.radius_units < 0.5
    }

    pub fn contains(&self, t: f64) -> Membership {
        let mu = self.mu();
        if t == 0.0 {
            // l = 0 is always admissible, so the nearest centre is ½ whatever μ is
            return if 0.5 <= self.radius_units {
                Membership::In
            } else {
                Membership::Out
            };
        }
        let x = mu * t;
        if !x.is_finite() || (t != 0.0 && x.abs() > 2f64.powi(40)) {
            return Membership::Unknown;
        }
        let l_near = (x - 0.5).round();
        for l in [l_near - 1.0, l_near, l_near + 1.0] {
            if l < (-mu).ceil() || l > mu.floor() {
                continue;
            }
            if (x - (l + 0.5)).abs() <= self.radius_units {
                return Membership::In;
            }
        }
        Membership::Out
    }
}

/// Rounds μ onto an integer when exp has only missed it by rounding.
fn snap(mu: f64) -> f64 {
    let r = mu.round();
    if mu.is_finite() && (mu - r).abs() <= 1e-12 * mu.max(1.0) {
        r
    } else {
        mu
    }
}

/// U^(1) … U^(q_max) from the schedule's μ_q.
pub fn bad_sets(s: &ParameterSchedule, q_max: usize) -> Vec<BadSet> {
    (1..=q_max.min(s.ln_mu.len() - 1))
        .map(|q| BadSet::new(q, s.ln_mu[q], s.ln_lambda[q], s.eps1))
        .collect()
}

/// t ∈ V^(q) = ⋃_{q′ ≥ q} U^(q′), judged from the listed stages. `Out` is only
/// possible when nothing beyond the list can reach t; every U^(q′) spans
/// [−1, 1], so for |t| < 1 a miss is reported as `Unknown`.
pub fn in_v(sets: &[BadSet], q: usize, t: f64) -> Membership {
    let mut unknown = false;
    for s in sets.iter().filter(|s| s.q >= q) {
        match s.contains(t) {
            Membership::In => return Membership::In,
            Membership::Unknown => unknown = true,
            Membership::Out => {}
        }
    }
    if unknown || t.abs() < 1.0 {
        Membership::Unknown
    } else {
        Membership::Out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffCover {
    pub q: usize,
    pub d: f64,
    pub d_min: f64,
    /// false when d ≤ d_min or d ≥ 1
    pub admissible: bool,
    pub diverges: bool,
    /// ln of each summed term 3λ^{−dε₁}μ^{1−d}
    pub ln_terms: Vec<f64>,
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub total: f64,
}

const MAX_TERMS: usize = 100_000;

/// 3 Σ_{q′ ≥ q} λ_{q′}^{−dε₁} μ_{q′}^{1−d}, summed until the terms fall
/// below 1e-18 of the partial sum, then closed with a geometric tail bound.
pub fn hausdorff_cover(s: &ParameterSchedule, q: usize, d: f64) -> HausdorffCover {
    let d_min = s.d_min();
    let admissible = d > d_min && d < 1.0;
    let q = q.max(1);
    let lnl = |j: usize| -> f64 {
        if j < s.ln_lambda.len() {
            s.ln_lambda[j]
        } else {
            s.alpha.powi(j as i32) * s.ln_lambda0
        }
    };
    let ln_term = |j: usize| -> f64 {
        let dl = |i: usize| (-0.4 + 2.0 * s.eps0) * lnl(i);
        let ln_mu = 0.25 * dl(j - 1) + 0.25 * dl(j) + 0.5 * lnl(j - 1) + 0.5 * lnl(j);
        3f64.ln() - d * s.eps1 * lnl(j) + (1.0 - d) * ln_mu
    };
    let mut ln_terms = Vec::new();
    let mut sum = 0.0;
    let mut tail = f64::INFINITY;
    let mut diverges = d <= d_min;
    let mut j = q;
    if !diverges {
        loop {
            let lt = ln_term(j);
            if !lt.is_finite() {
                break;
            }
            ln_terms.push(lt);
            sum += lt.exp();
            let next = ln_term(j + 1);
            let ratio = (next - lt).exp();
            if ratio < 1.0 && next.exp() <= 1e-18 * sum {
                // the ratios of consecutive terms decrease, so the rest is
                // bounded by a geometric series
                tail = next.exp() / (1.0 - ratio);
                break;
            }
            j += 1;
            if ln_terms.len() >= MAX_TERMS {
                diverges = true;
                break;
            }
        }
    }
    let total = if diverges { f64::INFINITY } else { sum + tail };
    HausdorffCover {
        q,
        d,
        d_min,
        admissible,
        diverges,
        ln_terms,
        partial_sum: sum,
        tail_bound: if diverges { f64::INFINITY } else { tail },
        total,
    }
}
