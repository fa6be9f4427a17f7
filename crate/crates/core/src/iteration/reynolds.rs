//! The six stress pieces R⁰…R⁵ of the new Reynolds stress.

use super::perturbation::PerturbationSlice;
use crate::error::{Error, Result};
use crate::field::{dealias, divergence_tensor, norms, sym_product, Field};
use crate::inverse_div::inverse_divergence;
use crate::{TensorField, VectorField};

pub struct ReynoldsComponents {
    /// R⁰ … R⁵
    pub parts: [TensorField; 6],
}

/// Time slice inputs besides the perturbation.
pub struct ReynoldsInput<'a> {
    pub v: &'a VectorField,
    pub v_ell: &'a VectorField,
    pub stress: &'a TensorField,
    pub stress_ell: &'a TensorField,
}

impl ReynoldsComponents {
    pub fn compute(slice: &PerturbationSlice, inp: &ReynoldsInput<'_>) -> Result<Self> {
        let missing = || Error::InvalidArgument("Reynolds stress needs a full assembly".into());
        let w = slice.w.as_ref().ok_or_else(missing)?;
        let w_c = slice.w_c.as_ref().ok_or_else(missing)?;
        let omega = slice.omega.as_ref().ok_or_else(missing)?;
        let w_o = &slice.w_o;

        let r0 = inverse_divergence(omega);

        let mut a = sym_product(w_o, None);
        let half_sq: Vec<f64> = a.trace().data.iter().map(|x| -0.5 * x).collect();
        a.add_identity(&half_sq);
        let a = a.sub(&slice.sum_chi2_r)?;
        let r1 = inverse_divergence(&divergence_tensor(&a));

        let r2 = sym_product(w_o, Some(w_c)).add(&sym_product(w_c, None))?.trace_free();

        let dv = inp.v.sub(inp.v_ell)?;
        let r3 = sym_product(w, Some(&dv)).trace_free();

        let r4 = inp.stress.sub(inp.stress_ell)?;

        let mut r5 = slice.sum_chi2_r.add(inp.stress_ell)?;
        let shift = vec![-slice.sum_chi2_rho; r5.grid.len()];
        r5.add_identity(&shift);

        Ok(ReynoldsComponents {
            parts: [r0, r1, r2, r3, r4, r5],
        })
    }

    /// Σ Rⁱ before the trace correction.
    pub fn raw_sum(&self) -> Result<TensorField> {
        let mut s = self.parts[0].clone();
        for p in &self.parts[1..] {
            s = s.add(p)?;
        }
        Ok(s)
    }

    /// max |tr Σ Rⁱ| before correction.
    pub fn trace_residual(&self) -> Result<f64> {
        Ok(norms::c0_norm(&self.raw_sum()?.trace()))
    }

    /// R̊₁ with the residual trace removed exactly.
    pub fn total(&self) -> Result<(TensorField, f64)> {
        let s = self.raw_sum()?;
        let tr = norms::c0_norm(&s.trace());
        Ok((s.trace_free(), tr))
    }
}

/// Pressure increment −½|w_o|² − ⅓|w_c|² − ⅔⟨w_o,w_c⟩ − ⅔⟨v − v_ℓ, w⟩, dealiased
/// like every other quadratic term.
pub fn pressure_increment(
    w_o: &VectorField,
    w_c: &VectorField,
    w: &VectorField,
    v: &VectorField,
    v_ell: &VectorField,
) -> Result<crate::ScalarField> {
    let dv = v.sub(v_ell)?;
    let oo = w_o.dot(w_o);
    let cc = w_c.dot(w_c);
    let oc = w_o.dot(w_c);
    let dw = dv.dot(w);
    let raw = (0..oo.grid.len())
        .map(|i| -0.5 * oo.data[i] - cc.data[i] / 3.0 - 2.0 / 3.0 * oc.data[i] - 2.0 / 3.0 * dw.data[i])
        .collect();
    let s = crate::ScalarField::new(oo.grid, raw)?;
    Ok(dealias(&s))
}
