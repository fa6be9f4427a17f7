use super::{Field, GridSpec};
use crate::error::{Error, Result};
use crate::real::Real;

/// Bump profile ψ(s) = exp(−1/(1−s²)) on (−1, 1), unnormalized.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Sampled one-dimensional taps ψ(jh/ℓ), |j|h < ℓ, renormalized to unit sum.
pub fn taps(grid: &GridSpec, ell: f64) -> Vec<(isize, f64)> {
    let h = grid.spacing();
    let reach = (ell / h).ceil() as isize;
    let mut t: Vec<(isize, f64)> = (-reach..=reach)
        .map(|j| (j, bump(j as f64 * h / ell)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = t.iter().map(|&(_, w)| w).sum();
    for (_, w) in t.iter_mut() {
        *w /= total;
    }
    t
}

/// Fourier symbol of the sampled kernel at integer wavenumber `k` along one axis.
pub fn mollifier_symbol(grid: &GridSpec, ell: f64, k: i64) -> f64 {
    let h = grid.spacing();
    taps(grid, ell)
        .iter()
        .map(|&(j, w)| w * (k as f64 * j as f64 * h).cos())
        .sum()
}

#[derive(Clone, Debug)]
pub struct Mollified<F> {
    pub field: F,
    /// Set when ℓ < 2h; the field is then returned unchanged.
    pub under_resolved: bool,
}

/// Convolution with the tensorized kernel ψ_ℓ, done as three circular passes.
pub fn mollify<T: Real, F: Field<T>>(f: &F, ell: f64) -> Result<Mollified<F>> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::InvalidArgument(format!("mollification length {ell} must be positive")));
    }
    let grid = *f.grid();
    if ell < 2.0 * grid.spacing() {
        return Ok(Mollified {
            field: f.clone(),
            under_resolved: true,
        });
    }
    let t: Vec<(isize, T)> = taps(&grid, ell).into_iter().map(|(j, w)| (j, T::lit(w))).collect();
    let field = f.map_components(|c| {
        let mut cur = c.to_vec();
        for axis in 0..3 {
            cur = convolve_axis(&grid, &cur, &t, axis);
        }
        cur
    });
    Ok(Mollified {
        field,
        under_resolved: false,
    })
}

fn convolve_axis<T: Real>(grid: &GridSpec, data: &[T], taps: &[(isize, T)], axis: usize) -> Vec<T> {
    let n = grid.n;
    let stride = [1, n, n * n][axis];
    let mut out = vec![T::zero(); data.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let c = (idx / stride) % n;
        let base = idx - c * stride;
        let mut acc = T::zero();
        for &(j, w) in taps {
            let cj = (c as isize + j).rem_euclid(n as isize) as usize;
            acc = acc + w * data[base + cj * stride];
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{derivative_field, mean, ScalarField};

    #[test]
    fn constant_is_preserved() {
        let g = GridSpec::new(16).unwrap();
        let f = ScalarField::<f64>::constant(&g, 2.5);
        let m = mollify(&f, 0.9).unwrap();
        assert!(!m.under_resolved);
        assert!(m.field.data.iter().all(|x| (x - 2.5).abs() < 1e-14));
    }

    #[test]
    fn under_resolved_returns_input() {
        let g = GridSpec::new(16).unwrap();
        let f = ScalarField::<f64>::from_fn(&g, |x| x[0].sin());
        let m = mollify(&f, g.spacing()).unwrap();
        assert!(m.under_resolved);
        assert_eq!(m.field, f);
        assert!(mollify(&f, 0.0).is_err());
        assert!(mollify(&f, -1.0).is_err());
    }

    #[test]
    fn single_mode_is_scaled_by_symbol() {
        let g = GridSpec::new(32).unwrap();
        let f = ScalarField::<f64>::from_fn(&g, |x| (3.0 * x[1]).cos());
        let m = mollify(&f, 0.5).unwrap().field;
        let s = mollifier_symbol(&g, 0.5, 3);
        assert!(s > 0.0 && s < 1.0);
        assert!(m.max_abs_diff(&f.scale(s)) < 1e-13);
    }

    #[test]
    fn commutes_with_derivative_and_keeps_mean() {
        let g = GridSpec::new(16).unwrap();
        let f = ScalarField::<f64>::from_fn(&g, |x| (x[0] + 2.0 * x[2]).sin() + 0.3 * (3.0 * x[1]).cos() + 0.7);
        let a = derivative_field(&mollify(&f, 0.6).unwrap().field, [1, 0, 1]).unwrap();
        let b = mollify(&derivative_field(&f, [1, 0, 1]).unwrap(), 0.6).unwrap().field;
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!((mean(&mollify(&f, 0.6).unwrap().field) - mean(&f)).abs() < 1e-13);
    }
}
