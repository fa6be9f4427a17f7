use num_complex::Complex;

use super::{Fft3, Field, GridSpec, ScalarField, TensorField, VectorField, SYM_PAIRS};
use crate::error::{Error, Result};
use crate::real::Real;

/// Visits every spectral bin in storage order.
pub fn for_each_mode(grid: &GridSpec, mut f: impl FnMut(usize, [usize; 3])) {
    let n = grid.n;
    let mut idx = 0;
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                f(idx, [i1, i2, i3]);
                idx += 1;
            }
        }
    }
}

/// Nyquist-zeroed wavevector of a bin.
#[inline]
pub fn kappa_vec(grid: &GridSpec, bins: [usize; 3]) -> [f64; 3] {
    [grid.kappa(bins[0]), grid.kappa(bins[1]), grid.kappa(bins[2])]
}

fn i_pow<T: Real>(m: u32) -> Complex<T> {
    match m % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

fn axis_factor<T: Real>(grid: &GridSpec, bin: usize, order: u32) -> T {
    if order == 0 {
        return T::one();
    }
    if order % 2 == 1 && grid.is_nyquist(bin) {
        return T::zero();
    }
    T::lit(grid.wavenumber(bin) as f64).powi(order as i32)
}

pub(crate) fn check_order<T: Real>(grid: &GridSpec, order: u32) -> Result<()> {
    let kmax = grid.n / 2;
    let growth = (kmax as f64).ln() * order as f64 + (grid.len() as f64).ln();
    if growth >= T::max_value().to_f64_lossy().ln() - 10.0 {
        return Err(Error::OrderTooLarge { order, kmax });
    }
    Ok(())
}

/// ∂^β applied to raw samples.
pub fn derivative_samples<T: Real>(grid: &GridSpec, data: &[T], beta: [u32; 3]) -> Result<Vec<T>> {
    let total: u32 = beta.iter().sum();
    check_order::<T>(grid, total)?;
    if total == 0 {
        return Ok(data.to_vec());
    }
    let fft = Fft3::new(grid);
    let mut spec = fft.forward_real(data);
    apply_derivative(grid, &mut spec, beta);
    Ok(fft.inverse_real(spec))
}

/// Multiplies a spectrum by the symbol of ∂^β; the order must already be checked.
pub(crate) fn apply_derivative<T: Real>(grid: &GridSpec, spec: &mut [Complex<T>], beta: [u32; 3]) {
    let unit = i_pow::<T>(beta.iter().sum());
    for_each_mode(grid, |idx, b| {
        let m = axis_factor::<T>(grid, b[0], beta[0])
            * axis_factor::<T>(grid, b[1], beta[1])
            * axis_factor::<T>(grid, b[2], beta[2]);
        spec[idx] = spec[idx] * unit * m;
    });
}

/// Exact derivative of the trigonometric interpolant along one axis (1-based).
pub fn spectral_derivative<T: Real>(
    f: &ScalarField<T>,
    axis: usize,
    order: u32,
) -> Result<ScalarField<T>> {
    if !(1..=3).contains(&axis) {
        return Err(Error::InvalidArgument(format!("axis {axis} not in 1..=3")));
    }
    if order == 0 {
        return Err(Error::InvalidArgument("derivative order must be positive".into()));
    }
    let mut beta = [0; 3];
    beta[axis - 1] = order;
    Ok(ScalarField {
        grid: f.grid,
        data: derivative_samples(&f.grid, &f.data, beta)?,
    })
}

/// Componentwise ∂^β of any field.
pub fn derivative_field<T: Real, F: Field<T>>(f: &F, beta: [u32; 3]) -> Result<F> {
    let grid = *f.grid();
    let comps = f
        .components()
        .iter()
        .map(|c| derivative_samples(&grid, c, beta))
        .collect::<Result<Vec<_>>>()?;
    F::from_components(grid, comps)
}

/// First derivatives of every component, computed from one forward transform each.
/// Returns `d[c][j] = ∂_j comp_c`.
pub fn first_derivatives<T: Real>(grid: &GridSpec, comps: &[Vec<T>]) -> Vec<[Vec<T>; 3]> {
    let fft = Fft3::new(grid);
    comps
        .iter()
        .map(|c| {
            let spec = fft.forward_real(c);
            std::array::from_fn(|j| {
                let mut s = spec.clone();
                for_each_mode(grid, |idx, b| {
                    let k = T::lit(grid.kappa(b[j]));
                    s[idx] = Complex::new(-s[idx].im * k, s[idx].re * k);
                });
                fft.inverse_real(s)
            })
        })
        .collect()
}

pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let mut d = first_derivatives(&f.grid, std::slice::from_ref(&f.data));
    VectorField {
        grid: f.grid,
        comps: d.pop().unwrap(),
    }
}

fn sum_of_derivatives<T: Real>(grid: &GridSpec, terms: &[(&[T], usize)]) -> Vec<T> {
    let fft = Fft3::new(grid);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for &(data, axis) in terms {
        let spec = fft.forward_real(data);
        for_each_mode(grid, |idx, b| {
            let k = T::lit(grid.kappa(b[axis]));
            acc[idx] = acc[idx] + Complex::new(-spec[idx].im * k, spec[idx].re * k);
        });
    }
    fft.inverse_real(acc)
}

/// Spectral divergence of a vector field.
pub fn divergence<T: Real>(u: &VectorField<T>) -> ScalarField<T> {
    let data = sum_of_derivatives(
        &u.grid,
        &[(&u.comps[0], 0), (&u.comps[1], 1), (&u.comps[2], 2)],
    );
    ScalarField { grid: u.grid, data }
}

/// Row divergence (div T)_i = ∂_j T_ij of a symmetric tensor field.
pub fn divergence_tensor<T: Real>(t: &TensorField<T>) -> VectorField<T> {
    let comps = std::array::from_fn(|i| {
        let terms: Vec<(&[T], usize)> = (0..3).map(|j| (t.entry(i, j), j)).collect();
        sum_of_derivatives(&t.grid, &terms)
    });
    VectorField {
        grid: t.grid,
        comps,
    }
}

pub fn curl<T: Real>(u: &VectorField<T>) -> VectorField<T> {
    let g = &u.grid;
    let c = &u.comps;
    VectorField {
        grid: *g,
        comps: [
            sub(&sum_of_derivatives(g, &[(&c[2], 1)]), &sum_of_derivatives(g, &[(&c[1], 2)])),
            sub(&sum_of_derivatives(g, &[(&c[0], 2)]), &sum_of_derivatives(g, &[(&c[2], 0)])),
            sub(&sum_of_derivatives(g, &[(&c[1], 0)]), &sum_of_derivatives(g, &[(&c[0], 1)])),
        ],
    }
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Leray projection: per mode, coefficient ↦ (Id − κ̂⊗κ̂)·coefficient, mean removed.
pub fn leray_project<T: Real>(u: &VectorField<T>) -> VectorField<T> {
    let grid = u.grid;
    let fft = Fft3::new(&grid);
    let mut s: Vec<Vec<Complex<T>>> = u.comps.iter().map(|c| fft.forward_real(c)).collect();
    for_each_mode(&grid, |idx, b| {
        let k = kappa_vec(&grid, b).map(T::lit);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == T::zero() {
            for c in s.iter_mut() {
                c[idx] = Complex::new(T::zero(), T::zero());
            }
            return;
        }
        let kc = (s[0][idx] * k[0] + s[1][idx] * k[1] + s[2][idx] * k[2]) / k2;
        for a in 0..3 {
            s[a][idx] = s[a][idx] - kc * k[a];
        }
    });
    let mut it = s.into_iter().map(|c| fft.inverse_real(c));
    VectorField {
        grid,
        comps: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
    }
}

/// Spectral truncation to |k_i| ≤ dealias_fraction·n/2 on every axis.
pub fn dealias_samples<T: Real>(grid: &GridSpec, data: &[T]) -> Vec<T> {
    let fft = Fft3::new(grid);
    let mut spec = fft.forward_real(data);
    truncate(grid, &mut spec);
    fft.inverse_real(spec)
}

pub(crate) fn truncate<T: Real>(grid: &GridSpec, spec: &mut [Complex<T>]) {
    let cut = grid.dealias_cutoff();
    for_each_mode(grid, |idx, b| {
        let keep = b.iter().all(|&i| (grid.wavenumber(i).abs() as f64) <= cut);
        if !keep {
            spec[idx] = Complex::new(T::zero(), T::zero());
        }
    });
}

pub fn dealias<T: Real, F: Field<T>>(f: &F) -> F {
    let grid = *f.grid();
    f.map_components(|c| dealias_samples(&grid, c))
}

/// Dealiased symmetric product a⊗b + b⊗a (or a⊗a when `b` is `None`), each
/// component truncated after the pointwise product.
pub fn sym_product<T: Real>(a: &VectorField<T>, b: Option<&VectorField<T>>) -> TensorField<T> {
    let grid = a.grid;
    let comps = SYM_PAIRS.map(|(i, j)| {
        let raw: Vec<T> = match b {
            None => (0..grid.len()).map(|x| a.comps[i][x] * a.comps[j][x]).collect(),
            Some(b) => (0..grid.len())
                .map(|x| a.comps[i][x] * b.comps[j][x] + b.comps[i][x] * a.comps[j][x])
                .collect(),
        };
        dealias_samples(&grid, &raw)
    });
    TensorField { grid, comps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn derivative_of_sin_x3() {
        let g = grid(16);
        let f = ScalarField::<f64>::from_fn(&g, |x| x[2].sin());
        let d = spectral_derivative(&f, 3, 1).unwrap();
        let want = ScalarField::<f64>::from_fn(&g, |x| x[2].cos());
        assert!(d.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn second_derivative_symbolic_oracle() {
        let g = grid(16);
        let f = ScalarField::<f64>::from_fn(&g, |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos());
        let d = spectral_derivative(&f, 1, 2).unwrap();
        assert!(d.max_abs_diff(&f.scale(-9.0)) < 1e-12);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = grid(8);
        let f = ScalarField::<f64>::constant(&g, 3.5);
        for axis in 1..=3 {
            let d = spectral_derivative(&f, axis, 1).unwrap();
            assert!(d.data.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn order_guard() {
        let f = ScalarField::<f32>::constant(&grid(8), 1.0);
        assert!(spectral_derivative(&f, 1, 80).is_err());
        assert!(spectral_derivative(&f, 1, 0).is_err());
        assert!(spectral_derivative(&f, 4, 1).is_err());
    }

    #[test]
    fn divergence_of_tensor_symbolic_oracle() {
        let g = grid(16);
        // T = -cos(x3)(e1⊗e3 + e3⊗e1) → div T = (sin x3, 0, 0)
        let t = TensorField::<f64>::from_fn(&g, |x| {
            let c = -x[2].cos();
            [[0.0, 0.0, c], [0.0, 0.0, 0.0], [c, 0.0, 0.0]]
        });
        let d = divergence_tensor(&t);
        let want = VectorField::<f64>::from_fn(&g, |x| [x[2].sin(), 0.0, 0.0]);
        assert!(d.max_abs_diff(&want) < 1e-12);
        let id = TensorField::<f64>::constant(&g, [1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert!(divergence_tensor(&id).comps.iter().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn shear_flow_is_divergence_free() {
        let g = grid(32);
        let u = VectorField::<f64>::from_fn(&g, |x| [(4.0 * x[2]).cos(), (4.0 * x[2]).sin(), 0.0]);
        assert!(divergence(&u).data.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_solenoidal() {
        let g = grid(16);
        let grad = VectorField::<f64>::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        assert!(leray_project(&grad).comps.iter().flatten().all(|x| x.abs() < 1e-13));
        let sol = VectorField::<f64>::from_fn(&g, |x| [x[1].sin(), x[2].cos(), (2.0 * x[0]).sin()]);
        assert!(leray_project(&sol).max_abs_diff(&sol) < 1e-12);
    }

    #[test]
    fn leray_per_mode_closed_form() {
        let g = grid(16);
        // u = (sin x1, 0, 0) is a pure gradient mode along k = e1
        let u = VectorField::<f64>::from_fn(&g, |x| [x[0].sin(), (x[0] + x[1]).cos(), 0.0]);
        let p = leray_project(&u);
        // mode k = (1,1,0): coefficient (0,1,0) ↦ (Id − k̂⊗k̂)(0,1,0) = (−½, ½, 0)
        let want = VectorField::<f64>::from_fn(&g, |x| {
            let c = (x[0] + x[1]).cos();
            [-0.5 * c, 0.5 * c, 0.0]
        });
        assert!(p.max_abs_diff(&want) < 1e-12);
        assert!(divergence(&p).data.iter().all(|x| x.abs() < 1e-12));
        assert!(leray_project(&p).max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn curl_of_abc_flow() {
        let g = grid(16);
        let u = VectorField::<f64>::from_fn(&g, |x| {
            [x[2].sin() + x[1].cos(), x[0].sin() + x[2].cos(), x[1].sin() + x[0].cos()]
        });
        assert!(curl(&u).max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn dealias_keeps_low_modes_and_drops_high() {
        let g = grid(16);
        let low = ScalarField::<f64>::from_fn(&g, |x| (5.0 * x[0]).cos());
        let high = ScalarField::<f64>::from_fn(&g, |x| (7.0 * x[1]).cos());
        assert!(dealias(&low).max_abs_diff(&low) < 1e-13);
        assert!(dealias(&high).data.iter().all(|x| x.abs() < 1e-13));
    }
}
