//! Backward characteristics of the mollified velocity.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::eval::{EvalScratch, TrigEvaluator};
use crate::field::GridSpec;
use crate::linalg::{self, Mat3, Vec3, IDENTITY};
use crate::VectorField;

/// Off-lattice access to a velocity and its Jacobian, `dv[m][j] = ∂_j v_m`.
pub trait VelocitySampler: Send + Sync {
    fn sample(&self, x: &Vec3, t: f64, scratch: &mut EvalScratch) -> (Vec3, Mat3);

    fn is_zero(&self) -> bool {
        false
    }

    /// Makes samples on the time window [t0, t1] available; called before any
    /// parallel sampling.
    fn prepare(&self, _t0: f64, _t1: f64) -> Result<()> {
        Ok(())
    }
}

pub struct ZeroSampler;

impl VelocitySampler for ZeroSampler {
    fn sample(&self, _: &Vec3, _: f64, _: &mut EvalScratch) -> (Vec3, Mat3) {
        ([0.0; 3], [[0.0; 3]; 3])
    }
    fn is_zero(&self) -> bool {
        true
    }
}

pub struct ConstantSampler(pub Vec3);

impl VelocitySampler for ConstantSampler {
    fn sample(&self, _: &Vec3, _: f64, _: &mut EvalScratch) -> (Vec3, Mat3) {
        (self.0, [[0.0; 3]; 3])
    }
    fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }
}

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// v(x, t) = f(t) V(x) with V band-limited.
pub struct SeparableSampler {
    profile: Profile,
    spatial: TrigEvaluator<3>,
    zero: bool,
}

impl SeparableSampler {
    pub fn new(profile: Profile, shape: &VectorField) -> Self {
        let spatial = TrigEvaluator::from_components(
            &shape.grid,
            &[&shape.comps[0], &shape.comps[1], &shape.comps[2]],
            1e-14,
        );
        let zero = spatial.mode_count() == 0;
        SeparableSampler {
            profile,
            spatial,
            zero,
        }
    }
}

impl VelocitySampler for SeparableSampler {
    fn sample(&self, x: &Vec3, t: f64, scratch: &mut EvalScratch) -> (Vec3, Mat3) {
        let f = (self.profile)(t);
        if f == 0.0 || self.zero {
            return ([0.0; 3], [[0.0; 3]; 3]);
        }
        let (v, d) = self.spatial.eval(x, scratch);
        (v.map(|c| c * f), d.map(|row| row.map(|c| c * f)))
    }
    fn is_zero(&self) -> bool {
        self.zero
    }
}

/// Φ and DΦ at one lattice point.
#[derive(Clone, Copy, Debug)]
pub struct Characteristic {
    pub x: Vec3,
    /// dphi[i][j] = ∂_j Φ_i
    pub dphi: Mat3,
}

/// Integrates dX/ds = v(X, s), dJ/ds = Dv(X, s) J from s = t (X = x, J = Id)
/// to s = s0 with classical RK4.
pub fn characteristic(
    sampler: &dyn VelocitySampler,
    x: &Vec3,
    t: f64,
    s0: f64,
    substeps: usize,
    scratch: &mut EvalScratch,
) -> Characteristic {
    if t == s0 || sampler.is_zero() {
        return Characteristic {
            x: *x,
            dphi: IDENTITY,
        };
    }
    let h = (s0 - t) / substeps as f64;
    let mut xs = *x;
    let mut j = IDENTITY;
    let rhs = |xs: &Vec3, j: &Mat3, s: f64, scratch: &mut EvalScratch| -> (Vec3, Mat3) {
        let (v, dv) = sampler.sample(xs, s, scratch);
        (v, linalg::mat_mul(&dv, j))
    };
    for step in 0..substeps {
        let s = t + step as f64 * h;
        let (k1x, k1j) = rhs(&xs, &j, s, scratch);
        let x2 = add(&xs, &k1x, 0.5 * h);
        let j2 = madd(&j, &k1j, 0.5 * h);
        let (k2x, k2j) = rhs(&x2, &j2, s + 0.5 * h, scratch);
        let x3 = add(&xs, &k2x, 0.5 * h);
        let j3 = madd(&j, &k2j, 0.5 * h);
        let (k3x, k3j) = rhs(&x3, &j3, s + 0.5 * h, scratch);
        let x4 = add(&xs, &k3x, h);
        let j4 = madd(&j, &k3j, h);
        let (k4x, k4j) = rhs(&x4, &j4, s + h, scratch);
        for a in 0..3 {
            xs[a] += h / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
            for b in 0..3 {
                j[a][b] += h / 6.0 * (k1j[a][b] + 2.0 * k2j[a][b] + 2.0 * k3j[a][b] + k4j[a][b]);
            }
        }
    }
    Characteristic { x: xs, dphi: j }
}

fn add(a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
    std::array::from_fn(|i| a[i] + s * b[i])
}

fn madd(a: &Mat3, b: &Mat3, s: f64) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + s * b[i][j]))
}

/// Step-doubling check on a deterministic subsample of lattice points.
/// Returns the largest change of Φ.
pub fn step_doubling_change(
    sampler: &dyn VelocitySampler,
    grid: &GridSpec,
    t: f64,
    s0: f64,
    substeps: usize,
) -> f64 {
    if sampler.is_zero() || t == s0 {
        return 0.0;
    }
    let stride = (grid.len() / 1024).max(1) | 1;
    let mut scratch = EvalScratch::default();
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    while idx < grid.len() {
        let x = grid.point(idx);
        let a = characteristic(sampler, &x, t, s0, substeps, &mut scratch);
        let b = characteristic(sampler, &x, t, s0, 2 * substeps, &mut scratch);
        let d = linalg::norm(&std::array::from_fn(|i| a.x[i] - b.x[i]));
        worst = worst.max(d);
        idx += stride;
    }
    worst
}

pub const STEP_DOUBLING_TOL: f64 = 1e-8;
pub const MAX_DISTORTION: f64 = 0.2;

/// Φ_l(·, t) and DΦ_l(·, t) on the lattice.
#[derive(Clone, Debug)]
pub struct FlowField {
    pub grid: GridSpec,
    /// unwrapped positions Φ(x); Φ − x is periodic
    pub phi: [Vec<f64>; 3],
    pub dphi: Vec<Mat3>,
    pub max_distortion: f64,
}

/// Backward characteristic map for slice `l`, anchored at s0 = l/μ.
pub fn flow_map(
    sampler: &dyn VelocitySampler,
    grid: &GridSpec,
    l: i64,
    mu: f64,
    t: f64,
    substeps: usize,
) -> Result<FlowField> {
    let s0 = l as f64 / mu;
    if (t - s0).abs() > 2.0 / mu {
        return Err(Error::InvalidArgument(format!(
            "flow for l = {l} requested at t = {t}, beyond 2/μ of its anchor"
        )));
    }
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be positive".into()));
    }
    sampler.prepare(t, s0)?;
    let change = step_doubling_change(sampler, grid, t, s0, substeps);
    if change > STEP_DOUBLING_TOL {
        return Err(Error::StepCountTooSmall { substeps, change });
    }
    let chars: Vec<Characteristic> = (0..grid.len())
        .into_par_iter()
        .map_init(EvalScratch::default, |scratch, idx| {
            characteristic(sampler, &grid.point(idx), t, s0, substeps, scratch)
        })
        .collect();
    let mut phi: [Vec<f64>; 3] = Default::default();
    let mut dphi = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for c in &chars {
        for a in 0..3 {
            phi[a].push(c.x[a]);
        }
        worst = worst.max(distortion(&c.dphi));
        dphi.push(c.dphi);
    }
    if worst >= MAX_DISTORTION {
        return Err(Error::FlowDistortion {
            l,
            t,
            distortion: worst,
        });
    }
    Ok(FlowField {
        grid: *grid,
        phi,
        dphi,
        max_distortion: worst,
    })
}

/// ‖DΦ − Id‖ in operator norm.
pub fn distortion(dphi: &Mat3) -> f64 {
    let d: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| dphi[i][j] - IDENTITY[i][j]));
    linalg::op_norm(&d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_velocity_gives_identity() {
        let g = GridSpec::new(8).unwrap();
        let f = flow_map(&ZeroSampler, &g, 1, 16.0, 0.1, 16).unwrap();
        for idx in 0..g.len() {
            let x = g.point(idx);
            for a in 0..3 {
                assert_eq!(f.phi[a][idx], x[a]);
            }
            assert_eq!(f.dphi[idx], IDENTITY);
        }
    }

    #[test]
    fn anchor_time_is_identity() {
        let g = GridSpec::new(8).unwrap();
        let s = ConstantSampler([1.0, 2.0, 3.0]);
        let f = flow_map(&s, &g, 2, 16.0, 2.0 / 16.0, 16).unwrap();
        assert_eq!(f.phi[1][9], g.point(9)[1]);
    }

    #[test]
    fn constant_velocity_exact_solution() {
        let g = GridSpec::new(8).unwrap();
        let c = [0.3, -0.2, 0.7];
        let (mu, l, t) = (16.0, 1i64, 0.1);
        let f = flow_map(&ConstantSampler(c), &g, l, mu, t, 16).unwrap();
        let dt = t - l as f64 / mu;
        for idx in 0..g.len() {
            let x = g.point(idx);
            for a in 0..3 {
                assert!((f.phi[a][idx] - (x[a] - c[a] * dt)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shear_flow_matches_variational_closed_form() {
        // v = (sin x3, 0, 0)·f with constant f: X3 is frozen, X1 moves linearly in s
        let g = GridSpec::new(16).unwrap();
        let shape = VectorField::from_fn(&g, |x| [x[2].sin(), 0.0, 0.0]);
        let s = SeparableSampler::new(Arc::new(|_| 0.5), &shape);
        let mut scratch = EvalScratch::default();
        let x = [0.3, 1.1, 0.9];
        let c = characteristic(&s, &x, 0.1, 0.0, 16, &mut scratch);
        let dt = -0.1;
        assert!((c.x[0] - (x[0] + 0.5 * x[2].sin() * dt)).abs() < 1e-13);
        assert!((c.dphi[0][2] - 0.5 * x[2].cos() * dt).abs() < 1e-13);
        assert!((distortion(&c.dphi) - (0.5 * x[2].cos() * dt).abs()).abs() < 1e-12);
    }

    #[test]
    fn too_far_from_anchor() {
        let g = GridSpec::new(8).unwrap();
        assert!(flow_map(&ZeroSampler, &g, 0, 16.0, 0.5, 16).is_err());
    }
}
