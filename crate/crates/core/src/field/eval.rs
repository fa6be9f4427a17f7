//! Off-lattice evaluation of band-limited periodic fields by direct
//! trigonometric summation over their nonzero modes.

use super::{Fft3, GridSpec};
use crate::Complex;

/// Sparse trigonometric representation of a C-component field.
#[derive(Clone, Debug)]
pub struct TrigEvaluator<const C: usize> {
    /// modes with k in the upper half space; their conjugates are implied
    ks: Vec<[i32; 3]>,
    coefs: Vec<[Complex; C]>,
    /// 1 for the zero mode, 2 otherwise
    weights: Vec<f64>,
    kmax: [usize; 3],
}

/// Per-thread buffers for [`TrigEvaluator::eval`].
#[derive(Default)]
pub struct EvalScratch {
    tables: [Vec<Complex>; 3],
}

fn upper_half(k: &[i64; 3]) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] >= 0)))
}

impl<const C: usize> TrigEvaluator<C> {
    /// Keeps modes whose largest coefficient exceeds `rel_tol` times the global
    /// maximum. Nyquist bins are dropped.
    pub fn from_components(grid: &GridSpec, comps: &[&[f64]; C], rel_tol: f64) -> Self {
        let fft = Fft3::<f64>::new(grid);
        let specs: Vec<Vec<Complex>> = comps.iter().map(|c| fft.forward_real(c)).collect();
        let scale = 1.0 / grid.len() as f64;
        let global = specs
            .iter()
            .flat_map(|s| s.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        let mut ks = Vec::new();
        let mut coefs = Vec::new();
        let mut weights = Vec::new();
        let mut kmax = [0usize; 3];
        if global == 0.0 {
            return TrigEvaluator {
                ks,
                coefs,
                weights,
                kmax,
            };
        }
        super::ops::for_each_mode(grid, |idx, b| {
            if b.iter().any(|&i| grid.is_nyquist(i)) {
                return;
            }
            let k = b.map(|i| grid.wavenumber(i));
            if !upper_half(&k) {
                return;
            }
            let c: [Complex; C] = std::array::from_fn(|a| specs[a][idx] * scale);
            let big = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big <= rel_tol * global * scale {
                return;
            }
            for a in 0..3 {
                kmax[a] = kmax[a].max(k[a].unsigned_abs() as usize);
            }
            weights.push(if k == [0, 0, 0] { 1.0 } else { 2.0 });
            ks.push(k.map(|x| x as i32));
            coefs.push(c);
        });
        TrigEvaluator {
            ks,
            coefs,
            weights,
            kmax,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.ks.len()
    }

    /// Value and gradient at an arbitrary point: `grad[c][j] = ∂_j f_c`.
    pub fn eval(&self, x: &[f64; 3], scratch: &mut EvalScratch) -> ([f64; C], [[f64; 3]; C]) {
        let mut val = [0.0; C];
        let mut grad = [[0.0; 3]; C];
        if self.ks.is_empty() {
            return (val, grad);
        }
        for a in 0..3 {
            let km = self.kmax[a];
            let t = &mut scratch.tables[a];
            t.clear();
            t.resize(2 * km + 1, Complex::new(1.0, 0.0));
            let e = Complex::new(x[a].cos(), x[a].sin());
            for k in 1..=km {
                t[km + k] = t[km + k - 1] * e;
                t[km - k] = t[km + k].conj();
            }
        }
        let [t1, t2, t3] = &scratch.tables;
        for ((k, c), &w) in self.ks.iter().zip(&self.coefs).zip(&self.weights) {
            let e = t1[(self.kmax[0] as i32 + k[0]) as usize]
                * t2[(self.kmax[1] as i32 + k[1]) as usize]
                * t3[(self.kmax[2] as i32 + k[2]) as usize];
            for a in 0..C {
                let z = c[a] * e;
                val[a] += w * z.re;
                // Re(i k z) = -k Im z
                let d = -w * z.im;
                grad[a][0] += d * k[0] as f64;
                grad[a][1] += d * k[1] as f64;
                grad[a][2] += d * k[2] as f64;
            }
        }
        (val, grad)
    }
}
