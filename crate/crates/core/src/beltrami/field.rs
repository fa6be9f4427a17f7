use super::FrequencyFamily;
use crate::error::{Error, Result};
use crate::field::{Fft3, GridSpec};
use crate::linalg::{self, Sym3};
use crate::{Complex, VectorField};

fn check_conjugate(amps: &[Complex], family: &FrequencyFamily) -> Result<()> {
    if amps.len() != family.members.len() {
        return Err(Error::InvalidArgument(format!(
            "{} amplitudes for {} members",
            amps.len(),
            family.members.len()
        )));
    }
    for p in 0..family.pairs() {
        let (a, b) = (amps[2 * p], amps[2 * p + 1]);
        if (a.conj() - b).norm() > 1e-12 * a.norm().max(1.0) {
            return Err(Error::NotConjugateSymmetric(family.members[2 * p]));
        }
    }
    Ok(())
}

/// W(x) = Σ_k a_k B_k e^{i λ k·x} together with the largest imaginary residue
/// of the synthesis.
pub fn beltrami_field_with_residue(
    amps: &[Complex],
    family: &FrequencyFamily,
    lambda_scale: u32,
    grid: &GridSpec,
) -> Result<(VectorField, f64)> {
    check_conjugate(amps, family)?;
    let fft = Fft3::<f64>::new(grid);
    let total = grid.len() as f64;
    let mut specs = vec![vec![Complex::new(0.0, 0.0); grid.len()]; 3];
    for (i, k) in family.members.iter().enumerate() {
        let bins: Option<Vec<usize>> = k
            .iter()
            .map(|&c| grid.bin(c as i64 * lambda_scale as i64))
            .collect();
        let bins = bins.ok_or_else(|| {
            Error::GridCapacity(format!(
                "mode {:?}·{lambda_scale} does not fit n = {}",
                k, grid.n
            ))
        })?;
        let idx = grid.index(bins[0], bins[1], bins[2]);
        for c in 0..3 {
            specs[c][idx] += amps[i] * family.b[i][c] * total;
        }
    }
    let mut residue: f64 = 0.0;
    let comps: Vec<Vec<f64>> = specs
        .into_iter()
        .map(|mut s| {
            fft.inverse(&mut s);
            residue = s.iter().fold(residue, |m, z| m.max(z.im.abs()));
            s.into_iter().map(|z| z.re).collect()
        })
        .collect();
    let [a, b, c]: [Vec<f64>; 3] = comps.try_into().unwrap();
    Ok((VectorField::new(*grid, [a, b, c])?, residue))
}

/// Real Beltrami field evaluated at ξ = λ_scale·x.
pub fn beltrami_field(
    amps: &[Complex],
    family: &FrequencyFamily,
    lambda_scale: u32,
    grid: &GridSpec,
) -> Result<VectorField> {
    let (w, residue) = beltrami_field_with_residue(amps, family, lambda_scale, grid)?;
    let scale = amps.iter().map(|a| a.norm()).fold(1.0, f64::max);
    if residue > 1e-10 * scale {
        return Err(Error::NotConjugateSymmetric(family.members[0]));
    }
    Ok(w)
}

/// ⟨W⊗W⟩ = ½ Σ |a_k|² (Id − k̂⊗k̂)
pub fn beltrami_average(amps: &[Complex], family: &FrequencyFamily) -> Sym3 {
    let mut r = [0.0; 6];
    for (k, a) in family.members.iter().zip(amps) {
        let p = linalg::transverse_projector(k);
        for c in 0..6 {
            r[c] += 0.5 * a.norm_sqr() * p[c];
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::build_families;
    use crate::field::{curl, divergence, Field};

    #[test]
    fn single_pair_is_real_divergence_free_and_curl_aligned() {
        let (e, _) = build_families().unwrap();
        let g = GridSpec::new(16).unwrap();
        let mut amps = vec![Complex::new(0.0, 0.0); 12];
        amps[2] = Complex::new(1.0, 0.0);
        amps[3] = Complex::new(1.0, 0.0);
        let (w, residue) = beltrami_field_with_residue(&amps, &e, 1, &g).unwrap();
        assert!(residue < 1e-13);
        assert!(divergence(&w).data.iter().all(|x| x.abs() < 1e-12));
        let c = curl(&w);
        let lam = 5f64.sqrt();
        assert!(c.max_abs_diff(&w.scale(lam)) < 1e-11);
    }

    #[test]
    fn rejects_asymmetric_amplitudes() {
        let (e, _) = build_families().unwrap();
        let g = GridSpec::new(16).unwrap();
        let mut amps = vec![Complex::new(0.0, 0.0); 12];
        amps[0] = Complex::new(0.0, 1.0);
        amps[1] = Complex::new(0.0, 1.0);
        assert!(matches!(
            beltrami_field(&amps, &e, 1, &g),
            Err(Error::NotConjugateSymmetric(_))
        ));
    }

    #[test]
    fn capacity() {
        let (e, _) = build_families().unwrap();
        let g = GridSpec::new(8).unwrap();
        let amps = vec![Complex::new(1.0, 0.0); 12];
        assert!(matches!(beltrami_field(&amps, &e, 2, &g), Err(Error::GridCapacity(_))));
    }
}
