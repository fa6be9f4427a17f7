use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::GridSpec;
use crate::real::Real;

/// Unnormalized 3D FFT on an n³ lattice, applied one axis at a time.
///
/// `inverse` divides by n³ so the pair round-trips.
pub struct Fft3<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft3<T> {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n: grid.n,
            forward: planner.plan_fft(grid.n, FftDirection::Forward),
            inverse: planner.plan_fft(grid.n, FftDirection::Inverse),
        }
    }

    pub fn forward_real(&self, data: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = data.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.transform(buf, &self.forward);
    }

    /// Inverse transform, normalized.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.transform(buf, &self.inverse);
        let scale = T::one() / T::from_usize(buf.len()).unwrap();
        for c in buf.iter_mut() {
            *c = *c * scale;
        }
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, mut buf: Vec<Complex<T>>) -> Vec<T> {
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.n;
        assert_eq!(buf.len(), n * n * n);
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        // axis 1 is contiguous
        fft.process_with_scratch(buf, &mut scratch);

        let mut plane = vec![Complex::new(T::zero(), T::zero()); n * n];
        // axis 2: inside each x₃-plane, lines over i2 for fixed i1
        for i3 in 0..n {
            let base = i3 * n * n;
            for i2 in 0..n {
                for i1 in 0..n {
                    plane[i1 * n + i2] = buf[base + i1 + n * i2];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for i2 in 0..n {
                for i1 in 0..n {
                    buf[base + i1 + n * i2] = plane[i1 * n + i2];
                }
            }
        }
        // axis 3: for each i2, lines over i3 for fixed i1
        for i2 in 0..n {
            for i3 in 0..n {
                let row = n * (i2 + n * i3);
                for i1 in 0..n {
                    plane[i1 * n + i3] = buf[row + i1];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for i3 in 0..n {
                let row = n * (i2 + n * i3);
                for i1 in 0..n {
                    buf[row + i1] = plane[i1 * n + i3];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = GridSpec::new(8).unwrap();
        let fft = Fft3::<f64>::new(&g);
        let data: Vec<f64> = (0..g.len())
            .map(|idx| {
                let x = g.point(idx);
                (2.0 * x[1] - x[2]).cos()
            })
            .collect();
        let spec = fft.forward_real(&data);
        let half = g.len() as f64 / 2.0;
        let a = g.index(0, 2, g.bin(-1).unwrap());
        let b = g.index(0, g.bin(-2).unwrap(), 1);
        assert!((spec[a].re - half).abs() < 1e-9);
        assert!((spec[b].re - half).abs() < 1e-9);
        let total: f64 = spec.iter().map(|c| c.norm()).sum();
        assert!((total - 2.0 * half).abs() < 1e-8);
    }

    #[test]
    fn roundtrip_f32() {
        let g = GridSpec::new(8).unwrap();
        let fft = Fft3::<f32>::new(&g);
        let data: Vec<f32> = (0..g.len()).map(|i| ((i * 37 % 11) as f32) - 5.0).collect();
        let back = fft.inverse_real(fft.forward_real(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
