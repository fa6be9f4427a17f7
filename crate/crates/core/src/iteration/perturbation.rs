//! Pointwise assembly of w = w_o + w_c and of the transport term Ω.

use std::sync::Arc;

use rayon::prelude::*;

use super::cutoff::CutoffFamily;
use super::flow::{self, VelocitySampler, MAX_DISTORTION, STEP_DOUBLING_TOL};
use crate::beltrami::{FrequencyFamily, Parity};
use crate::error::{Error, Result};
use crate::field::eval::{EvalScratch, TrigEvaluator};
use crate::field::{Field, GridSpec};
use crate::linalg::{self, Mat3, Sym3, Vec3};
use crate::{Complex, TensorField, VectorField};

/// Data fixed at the slice time l/μ: ρ_l and R_l ∗ ψ_ℓ with R_l = ρ_l Id − R̊(l/μ).
pub struct SliceStress {
    pub l: i64,
    pub rho: f64,
    pub stress: TrigEvaluator<6>,
}

impl SliceStress {
    /// ρ_l = 2‖R̊(l/μ)‖₀ / r0
    pub fn rho(stress: &TensorField, r0: f64) -> f64 {
        2.0 * crate::field::c0_norm(stress) / r0
    }

    /// `mollified` is R_l ∗ ψ_ℓ on the lattice.
    pub fn new(l: i64, rho: f64, mollified: &TensorField) -> Self {
        let c = &mollified.comps;
        let stress = TrigEvaluator::from_components(
            &mollified.grid,
            &[&c[0], &c[1], &c[2], &c[3], &c[4], &c[5]],
            1e-14,
        );
        SliceStress { l, rho, stress }
    }

    /// Spatially constant R_l ∗ ψ_ℓ.
    pub fn constant(grid: &GridSpec, l: i64, rho: f64, value: Sym3) -> Self {
        Self::new(l, rho, &TensorField::constant(grid, value))
    }
}

/// Which outputs to keep; the oscillatory-only mode skips w_c and Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssemblyMode {
    Full,
    OscillatoryOnly,
}

pub struct AssemblyInput<'a> {
    pub grid: GridSpec,
    pub even: &'a FrequencyFamily,
    pub odd: &'a FrequencyFamily,
    pub r0: f64,
    pub cutoffs: &'a CutoffFamily,
    /// λ_{q+1}
    pub lambda: f64,
    pub sampler: &'a dyn VelocitySampler,
    pub substeps: usize,
    /// slices for every l active at the assembly time; missing l means ρ_l = 0
    pub slices: Vec<Arc<SliceStress>>,
}

/// Left sides of the pointwise estimates, maximized over the lattice.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaStats {
    pub max_distortion: f64,
    pub max_amplitude: f64,
    pub max_l_norm: f64,
    /// max ‖R_{ℓ,l}/ρ_l − Id‖
    pub max_ball_radius: f64,
    /// max |tr R_{ℓ,l} − 3ρ_l|
    pub max_trace_defect: f64,
    /// max ||φ_kl| − 1|
    pub max_phase_defect: f64,
    /// largest imaginary part of Σ_kl χ_l L_kl e^{iλk·Φ}
    pub max_imag_residue: f64,
    /// smallest γ-coefficient seen, a_kl²/ρ_l
    pub min_coefficient: f64,
    pub step_doubling_change: f64,
    pub rhos: Vec<(i64, f64)>,
}

impl LemmaStats {
    fn merge(&mut self, o: &LemmaStats) {
        self.max_distortion = self.max_distortion.max(o.max_distortion);
        self.max_amplitude = self.max_amplitude.max(o.max_amplitude);
        self.max_l_norm = self.max_l_norm.max(o.max_l_norm);
        self.max_ball_radius = self.max_ball_radius.max(o.max_ball_radius);
        self.max_trace_defect = self.max_trace_defect.max(o.max_trace_defect);
        self.max_phase_defect = self.max_phase_defect.max(o.max_phase_defect);
        self.max_imag_residue = self.max_imag_residue.max(o.max_imag_residue);
        self.min_coefficient = self.min_coefficient.min(o.min_coefficient);
    }
}

/// Everything the step needs at one time t.
#[derive(Clone, Debug)]
pub struct PerturbationSlice {
    pub t: f64,
    pub w_o: VectorField,
    /// w, w_c and Ω = ∂_t w + v_ℓ·∇w + w·∇v_ℓ; absent in oscillatory-only mode
    pub w: Option<VectorField>,
    pub w_c: Option<VectorField>,
    pub omega: Option<VectorField>,
    /// Σ_l χ_l² R_{ℓ,l}
    pub sum_chi2_r: TensorField,
    /// Σ_l χ_l² ρ_l
    pub sum_chi2_rho: f64,
    pub active: Vec<i64>,
    pub stats: LemmaStats,
}

struct Member {
    k: Vec3,
    pair: usize,
    b: [Complex; 3],
    /// (k × B)/|k|²
    u: [Complex; 3],
}

struct ActiveSlice<'a> {
    slice: &'a SliceStress,
    chi: f64,
    /// dχ_l/dt
    chi_dot: f64,
    anchor: f64,
    gamma: &'a nalgebra::Matrix6<f64>,
    members: Vec<Member>,
}

#[derive(Clone, Copy, Default)]
struct PointOut {
    w: [f64; 3],
    w_o: [f64; 3],
    omega: [f64; 3],
    r: Sym3,
}

fn members_of(f: &FrequencyFamily) -> Vec<Member> {
    f.members
        .iter()
        .zip(&f.b)
        .enumerate()
        .map(|(m, (k, b))| {
            let kf = k.map(f64::from);
            let k2 = linalg::dot(&kf, &kf);
            let kc = kf.map(|x| Complex::new(x / k2, 0.0));
            Member {
                k: kf,
                pair: m / 2,
                b: *b,
                u: linalg::ccross(&kc, b),
            }
        })
        .collect()
}

const BLOCK: usize = 1 << 15;

/// Builds w_o, w, w_c, Ω and Σχ²R_{ℓ,l} at time t.
pub fn assemble_perturbation(
    input: &AssemblyInput<'_>,
    t: f64,
    mode: AssemblyMode,
) -> Result<PerturbationSlice> {
    let grid = input.grid;
    let cut = input.cutoffs;
    let active = cut.active(t);
    let mut stats = LemmaStats {
        min_coefficient: f64::INFINITY,
        ..Default::default()
    };
    let mut sum_chi2_rho = 0.0;
    let mut live = Vec::new();
    for &l in &active {
        let chi = cut.chi_l(l, t);
        let chi_dot = cut.chi_l_prime(l, t);
        let Some(slice) = input.slices.iter().find(|s| s.l == l) else {
            stats.rhos.push((l, 0.0));
            continue;
        };
        stats.rhos.push((l, slice.rho));
        sum_chi2_rho += chi * chi * slice.rho;
        if slice.rho == 0.0 || (chi == 0.0 && chi_dot == 0.0) {
            continue;
        }
        let anchor = l as f64 / cut.mu;
        input.sampler.prepare(t, anchor)?;
        if mode == AssemblyMode::Full {
            let change = flow::step_doubling_change(input.sampler, &grid, t, anchor, input.substeps);
            stats.step_doubling_change = stats.step_doubling_change.max(change);
            if change > STEP_DOUBLING_TOL {
                return Err(Error::StepCountTooSmall {
                    substeps: input.substeps,
                    change,
                });
            }
        }
        let fam = match Parity::of_slice(l) {
            Parity::Even => input.even,
            Parity::Odd => input.odd,
        };
        live.push(ActiveSlice {
            slice,
            chi,
            chi_dot,
            anchor,
            gamma: &fam.gamma_matrix,
            members: members_of(fam),
        });
    }

    let n = grid.len();
    let full = mode == AssemblyMode::Full;
    let mut w_o = VectorField::zeros(&grid);
    let mut w = full.then(|| VectorField::zeros(&grid));
    let mut omega = full.then(|| VectorField::zeros(&grid));
    let mut sum_r = TensorField::zeros(&grid);

    // ρ_l = 0 slices contribute nothing; with no live slice everything vanishes.
    if !live.is_empty() {
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            let results: Vec<(PointOut, LemmaStats)> = (start..end)
                .into_par_iter()
                .map_init(EvalScratch::default, |scratch, idx| {
                    point(input, &live, grid.point(idx), t, full, scratch)
                })
                .collect::<Result<Vec<_>>>()?;
            for (off, (p, s)) in results.into_iter().enumerate() {
                let idx = start + off;
                stats.merge(&s);
                for a in 0..3 {
                    w_o.comps[a][idx] = p.w_o[a];
                }
                if let Some(w) = w.as_mut() {
                    for a in 0..3 {
                        w.comps[a][idx] = p.w[a];
                    }
                }
                if let Some(om) = omega.as_mut() {
                    for a in 0..3 {
                        om.comps[a][idx] = p.omega[a];
                    }
                }
                for c in 0..6 {
                    sum_r.comps[c][idx] = p.r[c];
                }
            }
            start = end;
        }
    }
    if stats.min_coefficient == f64::INFINITY {
        stats.min_coefficient = 0.0;
    }
    if stats.max_distortion >= MAX_DISTORTION {
        let l = live.first().map(|s| s.slice.l).unwrap_or(0);
        return Err(Error::FlowDistortion {
            l,
            t,
            distortion: stats.max_distortion,
        });
    }
    let w_c = match &w {
        Some(w) => Some(w.sub(&w_o)?),
        None => None,
    };
    Ok(PerturbationSlice {
        t,
        w_o,
        w,
        w_c,
        omega,
        sum_chi2_r: sum_r,
        sum_chi2_rho,
        active,
        stats,
    })
}

fn point(
    input: &AssemblyInput<'_>,
    live: &[ActiveSlice<'_>],
    x: Vec3,
    t: f64,
    full: bool,
    scratch: &mut EvalScratch,
) -> Result<(PointOut, LemmaStats)> {
    let mut out = PointOut::default();
    let mut st = LemmaStats {
        min_coefficient: f64::INFINITY,
        ..Default::default()
    };
    let mut imag = [0.0f64; 3];
    let (_, dv) = if full {
        input.sampler.sample(&x, t, scratch)
    } else {
        ([0.0; 3], [[0.0; 3]; 3])
    };
    let lambda = input.lambda;
    for s in live {
        let ch = flow::characteristic(input.sampler, &x, t, s.anchor, input.substeps, scratch);
        let j = ch.dphi;
        st.max_distortion = st.max_distortion.max(flow::distortion(&j));
        let (rv, dr) = s.slice.stress.eval(&ch.x, scratch);
        let rho = s.slice.rho;
        for c in 0..6 {
            out.r[c] += s.chi * s.chi * rv[c];
        }
        st.max_trace_defect = st
            .max_trace_defect
            .max((linalg::sym_trace(&rv) - 3.0 * rho).abs());
        let rel = linalg::sym_sub(&linalg::sym_scale(&rv, 1.0 / rho), &linalg::SYM_IDENTITY);
        let radius = linalg::sym_op_norm(rel);
        st.max_ball_radius = st.max_ball_radius.max(radius);
        if !(radius < input.r0) {
            return Err(Error::BallViolation {
                l: s.slice.l,
                t,
                x,
                radius,
                r0: input.r0,
            });
        }
        // a_p² = c_p(R_{ℓ,l}) by homogeneity of γ²; ∇ through Φ by the chain rule
        let c = s.gamma * nalgebra::Vector6::from_column_slice(&rv);
        let mut grad_r = [[0.0; 3]; 6];
        for (cmp, g) in grad_r.iter_mut().enumerate() {
            for (jj, gj) in g.iter_mut().enumerate() {
                *gj = (0..3).map(|m| dr[cmp][m] * j[m][jj]).sum();
            }
        }
        let mut amp = [0.0; 6];
        let mut grad_a = [[0.0; 3]; 6];
        for p in 0..6 {
            if !(c[p] > 0.0) {
                return Err(Error::BallViolation {
                    l: s.slice.l,
                    t,
                    x,
                    radius,
                    r0: input.r0,
                });
            }
            st.min_coefficient = st.min_coefficient.min(c[p] / rho);
            amp[p] = c[p].sqrt();
            st.max_amplitude = st.max_amplitude.max(amp[p]);
            for jj in 0..3 {
                let dc: f64 = (0..6).map(|cmp| s.gamma[(p, cmp)] * grad_r[cmp][jj]).sum();
                grad_a[p][jj] = dc / (2.0 * amp[p]);
            }
        }
        for m in &s.members {
            let a = amp[m.pair];
            let ga = &grad_a[m.pair];
            let theta = lambda * linalg::dot(&m.k, &ch.x);
            let (sn, cs) = theta.sin_cos();
            let e = Complex::new(cs, sn);
            let shift = lambda * linalg::dot(&m.k, &std::array::from_fn(|i| ch.x[i] - x[i]));
            let (ps, pc) = shift.sin_cos();
            st.max_phase_defect = st.max_phase_defect.max(((pc * pc + ps * ps).sqrt() - 1.0).abs());
            for a3 in 0..3 {
                out.w_o[a3] += s.chi * (a * m.b[a3] * e).re;
            }
            if !full {
                continue;
            }
            // G = DΦᵀk
            let g = linalg::mat_t_vec(&j, &m.k);
            let v: [Complex; 3] =
                std::array::from_fn(|i| Complex::new(-a * (g[i] - m.k[i]), ga[i] / lambda));
            let vxu = linalg::ccross(&v, &m.u);
            let l_vec: [Complex; 3] = std::array::from_fn(|i| a * m.b[i] + vxu[i]);
            let l_norm = l_vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            st.max_l_norm = st.max_l_norm.max(l_norm);
            // D_t of the bracket: −(i/λ)Dvᵀ∇a + a DvᵀG
            let dvt_ga = linalg::mat_t_vec(&dv, ga);
            let dvt_g = linalg::mat_t_vec(&dv, &g);
            let dtv: [Complex; 3] =
                std::array::from_fn(|i| Complex::new(a * dvt_g[i], -dvt_ga[i] / lambda));
            let dtl = linalg::ccross(&dtv, &m.u);
            let dv_l = cmat_vec(&dv, &l_vec);
            for a3 in 0..3 {
                let term = s.chi * l_vec[a3] * e;
                out.w[a3] += term.re;
                imag[a3] += term.im;
                let om = (s.chi_dot * l_vec[a3] + s.chi * dtl[a3] + s.chi * dv_l[a3]) * e;
                out.omega[a3] += om.re;
            }
        }
    }
    st.max_imag_residue = imag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((out, st))
}

fn cmat_vec(m: &Mat3, v: &[Complex; 3]) -> [Complex; 3] {
    std::array::from_fn(|i| v[0] * m[i][0] + v[1] * m[i][1] + v[2] * m[i][2])
}
