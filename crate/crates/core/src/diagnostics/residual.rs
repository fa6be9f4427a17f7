use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{cn_norm, c0_norm, divergence_tensor, gradient, sym_product, Field};
use crate::iteration::EulerReynoldsTriple;
use crate::VectorField;

/// Keeps the relative residual finite on windows where everything vanishes.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

/// How ∂_t v enters the residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeDerivative {
    /// (v(t + Δt) − v(t − Δt)) / 2Δt
    Centered(f64),
    /// the closed-form rate carried by the triple
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// ‖∂_t v + div(v⊗v) + ∇p − div R̊‖₀
    pub absolute: f64,
    /// ‖v‖₁‖v‖₀ + ‖R̊‖₁ + floor
    pub scale: f64,
    pub relative: f64,
}

/// ∂_t v by the requested rule.
pub fn time_derivative(triple: &EulerReynoldsTriple, t: f64, mode: TimeDerivative) -> Result<VectorField> {
    match mode {
        TimeDerivative::Analytic => triple.velocity_rate(t)?.map(|d| (*d).clone()).ok_or_else(|| {
            Error::InvalidArgument(format!("stage {} carries no closed-form ∂_t v", triple.q))
        }),
        TimeDerivative::Centered(dt) => {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
            }
            let a = triple.velocity(t + dt)?;
            let b = triple.velocity(t - dt)?;
            Ok(a.sub(&b)?.scale(0.5 / dt))
        }
    }
}

/// Euler–Reynolds residual at t. The quadratic term is the dealiased
/// product, matching the way the stresses are built.
pub fn euler_reynolds_residual(
    triple: &EulerReynoldsTriple,
    t: f64,
    mode: TimeDerivative,
) -> Result<Residual> {
    let v = triple.velocity(t)?;
    let p = triple.pressure(t)?;
    let r = triple.stress(t)?;
    let dv = time_derivative(triple, t, mode)?;
    let flux = divergence_tensor(&sym_product(&v, None));
    let lhs = dv.add(&flux)?.add(&gradient(&p))?;
    let res = lhs.sub(&divergence_tensor(&r))?;
    let absolute = c0_norm(&res);
    let scale = cn_norm(&*v, 1)? * c0_norm(&*v) + cn_norm(&*r, 1)? + RESIDUAL_FLOOR;
    Ok(Residual {
        absolute,
        scale,
        relative: absolute / scale,
    })
}

/// Residual of a stationary solution (v, p, R̊) given directly as fields.
pub fn stationary_residual(
    v: &VectorField,
    p: &crate::ScalarField,
    r: &crate::TensorField,
) -> Result<Residual> {
    let flux = divergence_tensor(&sym_product(v, None));
    let res = flux.add(&gradient(p))?.sub(&divergence_tensor(r))?;
    let absolute = c0_norm(&res);
    let scale = cn_norm(v, 1)? * c0_norm(v) + cn_norm(r, 1)? + RESIDUAL_FLOOR;
    Ok(Residual {
        absolute,
        scale,
        relative: absolute / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::{beltrami_field, build_families};
    use crate::field::GridSpec;
    use crate::iteration::initial_triple;
    use crate::{Complex, ScalarField, TensorField};

    #[test]
    fn initial_triple_is_exact() {
        let g = GridSpec::new(32).unwrap();
        let tr = initial_triple(&g, 4, 0.05).unwrap();
        for &t in &[-0.3, -0.2, -0.1, 0.0, 0.13, 0.2, 0.24] {
            let r = euler_reynolds_residual(&tr, t, TimeDerivative::Analytic).unwrap();
            assert!(r.relative <= 1e-12, "{t}: {r:?}");
        }
        let r = euler_reynolds_residual(&tr, 0.0, TimeDerivative::Centered(1e-5)).unwrap();
        assert!(r.relative <= 1e-8);
    }

    #[test]
    fn steady_beltrami_flow() {
        let g = GridSpec::new(32).unwrap();
        let (even, _) = build_families().unwrap();
        // real amplitudes paired with their conjugates
        let amps: Vec<Complex> = (0..even.members.len())
            .map(|i| Complex::new(0.3 + 0.1 * (i / 2) as f64, 0.0))
            .collect();
        let w = beltrami_field(&amps, &even, 2, &g).unwrap();
        let p = w.dot(&w).scale(-0.5);
        let r = TensorField::zeros(&g);
        let res = stationary_residual(&w, &p, &r).unwrap();
        assert!(res.relative <= 1e-9, "{res:?}");
        let zero = stationary_residual(&VectorField::zeros(&g), &ScalarField::zeros(&g), &r).unwrap();
        assert_eq!(zero.relative, 0.0);
    }

    #[test]
    fn missing_rate_is_an_error() {
        let g = GridSpec::new(32).unwrap();
        let mut tr = initial_triple(&g, 4, 0.05).unwrap();
        tr.dv_dt = None;
        assert!(euler_reynolds_residual(&tr, 0.0, TimeDerivative::Analytic).is_err());
        assert!(euler_reynolds_residual(&tr, 0.0, TimeDerivative::Centered(0.0)).is_err());
    }
}
