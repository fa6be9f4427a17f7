use super::ops::{apply_derivative, check_order};
use super::Fft3;
use super::{Field, VectorField};
use crate::error::{Error, Result};
use crate::real::Real;

/// max over the lattice of the pointwise norm (Euclidean for vectors,
/// operator norm for tensors).
pub fn c0_norm<T: Real, F: Field<T>>(f: &F) -> T {
    (0..f.grid().len()).fold(T::zero(), |m, i| m.max(f.point_norm(i)))
}

/// Lattice average of a scalar-like field's first component.
pub fn mean<T: Real, F: Field<T>>(f: &F) -> T {
    let c = &f.components()[0];
    let s = c.iter().fold(T::zero(), |a, &x| a + x);
    s / T::from_usize(c.len()).unwrap()
}

/// Multi-indices with |β| = order.
pub fn multi_indices(order: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in (0..=order).rev() {
        for b in (0..=order - a).rev() {
            out.push([a, b, order - a - b]);
        }
    }
    out
}

/// Σ_{j ≤ N} max_{|β| = j} ‖∂^β f‖₀ with spectral derivatives.
pub fn cn_norm<T: Real, F: Field<T>>(f: &F, order: u32) -> Result<T> {
    if order > 4 {
        return Err(Error::InvalidArgument(format!("C^N norm supports N ≤ 4, got {order}")));
    }
    let mut total = c0_norm(f);
    if order == 0 {
        return Ok(total);
    }
    let grid = *f.grid();
    let fft = Fft3::<T>::new(&grid);
    let specs: Vec<_> = f.components().iter().map(|c| fft.forward_real(c)).collect();
    for j in 1..=order {
        check_order::<T>(&grid, j)?;
        let mut m = T::zero();
        for beta in multi_indices(j) {
            let comps = specs
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    apply_derivative(&grid, &mut s, beta);
                    fft.inverse_real(s)
                })
                .collect();
            m = m.max(c0_norm(&F::from_components(grid, comps)?));
        }
        total = total + m;
    }
    Ok(total)
}

/// Hölder seminorm estimate from axis-aligned dyadic lags m·h, m = 1, 2, 4, …, n/2.
///
/// Differences use the Euclidean norm for vectors and the Frobenius norm for
/// tensors. The estimate is a lower bound for the true seminorm.
pub fn holder_seminorm<T: Real, F: Field<T>>(f: &F, theta: f64) -> Result<T> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent {theta} outside (0, 1]")));
    }
    let grid = *f.grid();
    let n = grid.n;
    let h = grid.spacing();
    let mut best = T::zero();
    let mut m = 1;
    while m <= n / 2 {
        let inv = T::lit((m as f64 * h).powf(-theta));
        for axis in 0..3 {
            let stride = [1, n, n * n][axis];
            for idx in 0..grid.len() {
                let c = (idx / stride) % n;
                let shifted = idx - c * stride + ((c + m) % n) * stride;
                best = best.max(f.diff_norm(shifted, idx) * inv);
            }
        }
        m *= 2;
    }
    Ok(best)
}

/// ‖f‖₀ + [f]_θ
pub fn holder_norm<T: Real, F: Field<T>>(f: &F, theta: f64) -> Result<T> {
    Ok(c0_norm(f) + holder_seminorm(f, theta)?)
}

/// ½∫|v|² over the torus by the lattice rule (exact for band-limited fields).
pub fn energy<T: Real>(v: &VectorField<T>) -> T {
    let mut s = T::zero();
    for i in 0..v.grid.len() {
        let n = v.point_norm(i);
        s = s + n * n;
    }
    s * T::lit(0.5 * v.grid.cell_volume())
}
