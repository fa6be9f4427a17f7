use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Flatness parameter of the transition step; with this value the peak slope of
/// χ is about 3.44·μλ^{ε₁} for every overlap width.
pub const STEP_FLATNESS: f64 = 0.1;

fn step_weight(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (-STEP_FLATNESS / x).exp()
    }
}

fn step_weight_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-STEP_FLATNESS / x).exp() * (1.0 + STEP_FLATNESS / x)
    }
}

/// Smooth monotone step on [0, 1] with s(1 − u) = 1 − s(u), flat to all orders
/// at both ends.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = step_weight(u);
    let b = step_weight(1.0 - u);
    a / (a + b)
}

pub fn smooth_step_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let a = step_weight(u);
    let b = step_weight(1.0 - u);
    let s = a + b;
    if s == 0.0 {
        return 0.0;
    }
    (step_weight_prime(u) * b + a * step_weight_prime(1.0 - u)) / (s * s)
}

/// Time cutoffs χ_l(t) = χ(μt − l) whose squares sum to one.
#[derive(Clone, Debug)]
pub struct CutoffFamily {
    pub mu: f64,
    pub eps1: f64,
    pub lambda_next: f64,
    /// λ^{−ε₁}, the overlap width in units of 1/μ
    pub width: f64,
}

impl CutoffFamily {
    /// Rejects overlaps narrower than four steps `dt` of the time grid.
    pub fn new(mu: f64, eps1: f64, lambda_next: f64, dt: f64) -> Result<Self> {
        if !(mu > 0.0 && lambda_next >= 1.0 && eps1 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff parameters μ = {mu}, λ = {lambda_next}, ε₁ = {eps1}"
            )));
        }
        let width = lambda_next.powf(-eps1);
        let overlap = width / (2.0 * mu);
        if overlap < 4.0 * dt {
            return Err(Error::OverlapTooNarrow { overlap, dt });
        }
        Ok(CutoffFamily {
            mu,
            eps1,
            lambda_next,
            width,
        })
    }

    /// Plateau half-width ½ − w/4 and support half-width ½ + w/4 in τ units.
    pub fn plateau(&self) -> f64 {
        0.5 - self.width / 4.0
    }

    pub fn reach(&self) -> f64 {
        0.5 + self.width / 4.0
    }

    fn transition(&self, tau: f64) -> Option<f64> {
        let a = tau.abs();
        if a <= self.plateau() || a >= self.reach() {
            return None;
        }
        Some((a - self.plateau()) / (self.width / 2.0))
    }

    /// χ(τ)
    pub fn chi(&self, tau: f64) -> f64 {
        let a = tau.abs();
        if a <= self.plateau() {
            return 1.0;
        }
        match self.transition(tau) {
            Some(u) => (FRAC_PI_2 * smooth_step(u)).cos(),
            None => 0.0,
        }
    }

    /// dχ/dτ
    pub fn chi_prime(&self, tau: f64) -> f64 {
        match self.transition(tau) {
            Some(u) => {
                let du = 2.0 / self.width;
                -tau.signum() * FRAC_PI_2 * (FRAC_PI_2 * smooth_step(u)).sin() * smooth_step_prime(u) * du
            }
            None => 0.0,
        }
    }

    pub fn chi_l(&self, l: i64, t: f64) -> f64 {
        self.chi(self.mu * t - l as f64)
    }

    /// d/dt χ_l(t)
    pub fn chi_l_prime(&self, l: i64, t: f64) -> f64 {
        self.mu * self.chi_prime(self.mu * t - l as f64)
    }

    /// Indices l with χ_l(t) ≠ 0 or inside a transition.
    pub fn active(&self, t: f64) -> Vec<i64> {
        let c = self.mu * t;
        let lo = (c - self.reach()).floor() as i64;
        let hi = (c + self.reach()).ceil() as i64;
        (lo..=hi)
            .filter(|&l| (c - l as f64).abs() < self.reach())
            .collect()
    }

    /// Σ_l χ_l(t)²
    pub fn square_sum(&self, t: f64) -> f64 {
        self.active(t).iter().map(|&l| self.chi_l(l, t).powi(2)).sum()
    }

    /// Time interval where χ_l can be nonzero.
    pub fn slice_support(&self, l: i64) -> (f64, f64) {
        (
            (l as f64 - self.reach()) / self.mu,
            (l as f64 + self.reach()) / self.mu,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> CutoffFamily {
        CutoffFamily::new(16.0, 0.05f64.powi(2) / 18.0, 4.0, 1e-5).unwrap()
    }

    #[test]
    fn step_is_antisymmetric_about_one_half() {
        for u in [0.01, 0.2, 0.37, 0.5, 0.81] {
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smooth_step(0.5), 0.5);
    }

    #[test]
    fn partition_of_unity_and_plateau() {
        let f = family();
        assert_eq!(f.chi(0.0), 1.0);
        // overlap identity χ(τ)² + χ(τ − 1)² = 1
        for i in 0..200 {
            let tau = f.plateau() + (i as f64 + 0.5) / 200.0 * (f.width / 2.0);
            let s = f.chi(tau).powi(2) + f.chi(tau - 1.0).powi(2);
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!((f.chi(0.5).powi(2) - 0.5).abs() < 1e-14);
        for i in 0..1000 {
            let t = -0.6 + 1.2 * i as f64 / 999.0;
            assert!((f.square_sum(t) - 1.0).abs() < 1e-13);
        }
        assert_eq!(f.chi(f.reach() + 1e-12), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let f = family();
        let h = 1e-7;
        for i in 0..50 {
            let tau = f.plateau() + (i as f64 + 0.5) / 50.0 * (f.width / 2.0);
            let fd = (f.chi(tau + h) - f.chi(tau - h)) / (2.0 * h);
            assert!((fd - f.chi_prime(tau)).abs() < 1e-5);
            assert!((f.chi_prime(-tau) + f.chi_prime(tau)).abs() < 1e-15);
        }
    }

    #[test]
    fn narrow_overlap_rejected() {
        assert!(matches!(
            CutoffFamily::new(1e5, 0.5, 1e6, 1e-5),
            Err(Error::OverlapTooNarrow { .. })
        ));
    }
}
