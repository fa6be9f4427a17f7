//! The initial triple: a shear flow switched on and off in time by χ₀.

use std::sync::Arc;

use super::triple::{EulerReynoldsTriple, Separable};
use crate::error::{Error, Result};
use crate::field::{Field, GridSpec, TimeField};
use crate::{ScalarField, TensorField, VectorField};

fn flat(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn flat_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

/// S(x) = f(x)/(f(x) + f(1 − x)), f(x) = e^{−1/x}
fn step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (a, b) = (flat(x), flat(1.0 - x));
    a / (a + b)
}

fn step_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (flat(x), flat(1.0 - x));
    let s = a + b;
    (flat_prime(x) * b + a * flat_prime(1.0 - x)) / (s * s)
}

/// χ₀: 1 on [−⅛, ⅛], 0 outside (−¼, ¼).
pub fn chi0(t: f64) -> f64 {
    step((0.25 - t.abs()) * 8.0)
}

pub fn chi0_prime(t: f64) -> f64 {
    -t.signum() * 8.0 * step_prime((0.25 - t.abs()) * 8.0)
}

/// Closed-form pieces of the initial triple.
#[derive(Clone, Copy, Debug)]
pub struct InitialData {
    pub lambda0: u64,
    pub eps0: f64,
}

impl InitialData {
    /// ½λ₀^{−1/5+ε₀}
    pub fn amplitude(&self) -> f64 {
        0.5 * (self.lambda0 as f64).powf(-0.2 + self.eps0)
    }

    pub fn shape(&self, grid: &GridSpec) -> VectorField {
        let l = self.lambda0 as f64;
        VectorField::from_fn(grid, |x| [(l * x[2]).cos(), (l * x[2]).sin(), 0.0])
    }

    pub fn velocity(&self, grid: &GridSpec, t: f64) -> VectorField {
        self.shape(grid).scale(self.amplitude() * chi0(t))
    }

    pub fn velocity_rate(&self, grid: &GridSpec, t: f64) -> VectorField {
        self.shape(grid).scale(self.amplitude() * chi0_prime(t))
    }

    /// R̊₀ = ½λ₀^{−6/5+ε₀}χ₀′(t)[[0,0,s],[0,0,−c],[s,−c,0]], s = sin λ₀x₃, c = cos λ₀x₃
    pub fn stress(&self, grid: &GridSpec, t: f64) -> TensorField {
        let l = self.lambda0 as f64;
        let k = self.amplitude() / l * chi0_prime(t);
        TensorField::from_fn(grid, |x| {
            let (s, c) = (l * x[2]).sin_cos();
            [[0.0, 0.0, k * s], [0.0, 0.0, -k * c], [k * s, -k * c, 0.0]]
        })
    }
}

/// (v₀, p₀ ≡ 0, R̊₀) supported in [−¼, ¼].
pub fn initial_triple(grid: &GridSpec, lambda0: u64, eps0: f64) -> Result<EulerReynoldsTriple> {
    if lambda0 < 2 {
        return Err(Error::InvalidArgument(format!("λ₀ = {lambda0} must be at least 2")));
    }
    if !(eps0 > 0.0 && eps0 <= 0.1) {
        return Err(Error::InvalidArgument(format!("ε₀ = {eps0} must lie in (0, 0.1]")));
    }
    // v₀⊗v₀ and R̊₀ carry frequency 2λ₀ along x₃
    let need = 2.0 * lambda0 as f64;
    if need > grid.dealias_cutoff() {
        return Err(Error::GridCapacity(format!(
            "n = {} cannot resolve the initial frequency 2λ₀ = {need} after dealiasing",
            grid.n
        )));
    }
    let data = InitialData { lambda0, eps0 };
    let g = *grid;
    let support = (-0.25, 0.25);
    let amp = data.amplitude();
    Ok(EulerReynoldsTriple {
        q: 0,
        grid: g,
        support,
        v: TimeField::new(g, support, move |t| Ok(data.velocity(&g, t))),
        p: TimeField::new(g, support, move |_| Ok(ScalarField::zeros(&g))),
        r: TimeField::new(g, support, move |t| Ok(data.stress(&g, t))),
        dv_dt: Some(TimeField::new(g, support, move |t| Ok(data.velocity_rate(&g, t)))),
        separable: Some(Separable {
            profile: Arc::new(move |t| amp * chi0(t)),
            shape: data.shape(&g),
        }),
        step: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{divergence, divergence_tensor, energy, norms};

    #[test]
    fn bump_shape() {
        assert_eq!(chi0(0.0), 1.0);
        assert_eq!(chi0(0.125), 1.0);
        assert_eq!(chi0(-0.1), 1.0);
        assert_eq!(chi0(0.25), 0.0);
        assert_eq!(chi0(-0.3), 0.0);
        assert!(chi0(0.2) > 0.0 && chi0(0.2) < 1.0);
        assert!((chi0(0.1875) - 0.5).abs() < 1e-15);
        for &t in &[0.13, 0.17, 0.2, 0.24, -0.15, -0.22] {
            let h = 1e-6;
            let fd = (chi0(t + h) - chi0(t - h)) / (2.0 * h);
            assert!((fd - chi0_prime(t)).abs() < 1e-5 * (1.0 + fd.abs()), "{t}");
        }
    }

    #[test]
    fn values_at_time_zero() {
        let g = GridSpec::new(32).unwrap();
        let tr = initial_triple(&g, 4, 0.05).unwrap();
        let v = tr.velocity(0.0).unwrap();
        let amp = 0.5 * 4f64.powf(-0.15);
        assert!((v.at(0)[0] - amp).abs() < 1e-15);
        assert_eq!(v.at(0)[1], 0.0);
        assert_eq!(norms::c0_norm(&*tr.stress(0.0).unwrap()), 0.0);
        assert_eq!(norms::c0_norm(&divergence(&v)), 0.0);
    }

    #[test]
    fn stress_divergence_is_time_derivative() {
        let g = GridSpec::new(32).unwrap();
        let tr = initial_triple(&g, 4, 0.05).unwrap();
        for &t in &[0.14, 0.2, -0.18] {
            let dv = tr.velocity_rate(t).unwrap().unwrap();
            let div = divergence_tensor(&*tr.stress(t).unwrap());
            assert!(dv.max_abs_diff(&div) < 1e-12);
            assert!(norms::c0_norm(&tr.stress(t).unwrap().trace()) == 0.0);
        }
    }

    #[test]
    fn energy_closed_form() {
        let g = GridSpec::new(32).unwrap();
        let tr = initial_triple(&g, 4, 0.05).unwrap();
        let e = energy(&*tr.velocity(0.0).unwrap());
        let expect = 0.5 * (2.0 * std::f64::consts::PI).powi(3) * 0.25 * 4f64.powf(-0.4 + 0.1);
        assert!((e - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn capacity_rejected() {
        let g = GridSpec::new(8).unwrap();
        assert!(matches!(initial_triple(&g, 4, 0.05), Err(Error::GridCapacity(_))));
        assert!(initial_triple(&g, 1, 0.05).is_err());
    }
}
