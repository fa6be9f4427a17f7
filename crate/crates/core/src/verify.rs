//! Seeded invariant suites shared by the command line and the acceptance run.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beltrami::{beltrami_average, beltrami_field, certify_r0, gamma, FrequencyFamily};
use crate::error::Result;
use crate::field::ops::{dealias_samples, for_each_mode};
use crate::field::{
    c0_norm, cn_norm, divergence, divergence_tensor, gradient, sym_product, Fft3, Field, GridSpec,
};
use crate::inverse_div::{
    commutator_scaling_probe, inverse_divergence, schauder_scaling_probe, OscillatoryProbe,
    ProbeRow,
};
use crate::iteration::{
    assemble_perturbation, AssemblyInput, AssemblyMode, CutoffFamily, SliceStress, ZeroSampler,
};
use crate::linalg::{self, Sym3};
use crate::{Complex, ScalarField, TensorField, VectorField};

/// One measured quantity against its limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    /// true when the measured value must exceed the limit
    pub lower: bool,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.to_string(),
            measured,
            limit,
            lower: false,
            pass: measured <= limit,
        }
    }

    pub fn at_least(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.to_string(),
            measured,
            limit,
            lower: true,
            pass: measured > limit,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Uniformly random symmetric direction of unit operator norm.
fn random_direction(rng: &mut ChaCha8Rng) -> Sym3 {
    let m: Sym3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    linalg::sym_scale(&m, 1.0 / linalg::sym_op_norm(m))
}

/// Geometric-lemma invariants of one family: certified radius, γ(Id) and
/// reconstruction on `samples` random matrices with |R − Id| ≤ r0/2.
pub fn geometry_checks(family: &FrequencyFamily, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let tag = format!("{:?}", family.parity).to_lowercase();
    family.validate_structure()?;
    let certified = certify_r0(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let at_id = gamma(&linalg::SYM_IDENTITY, family)?;
    let id_err = at_id.values.iter().fold(0.0f64, |m, g| m.max((g - 0.5).abs()));
    let mut recon: f64 = 0.0;
    for _ in 0..samples {
        let d = random_direction(&mut rng);
        let s = rng.gen_range(0.0..=0.5) * family.r0;
        let r: Sym3 = std::array::from_fn(|c| linalg::SYM_IDENTITY[c] + s * d[c]);
        let g = gamma(&r, family)?;
        let back = g.reconstruct(family);
        recon = recon.max(linalg::sym_op_norm(linalg::sym_sub(&back, &r)));
    }
    Ok(vec![
        Check::at_least(&format!("{tag}_r0"), family.r0, 1e-3),
        Check::at_most(&format!("{tag}_r0_vs_certified"), family.r0 / certified - 1.0, 1e-12),
        Check::at_most(&format!("{tag}_gamma_identity"), id_err, 1e-12),
        Check::at_most(&format!("{tag}_reconstruction"), recon, 1e-12),
    ])
}

/// Random conjugate-symmetric amplitudes, one complex number per ±k pair.
pub fn random_amplitudes(family: &FrequencyFamily, rng: &mut ChaCha8Rng) -> Vec<Complex> {
    let mut amps = Vec::with_capacity(family.members.len());
    for _ in 0..family.pairs() {
        let a = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        amps.push(a);
        amps.push(a.conj());
    }
    amps
}

/// Beltrami identities over `samples` random amplitude sets at frequency
/// `lambda_scale`: div W relative to ‖W‖₁, div(W⊗W) − ∇|W|²/2 relative to
/// ‖W‖₀², and the grid average of W⊗W against the closed form.
pub fn beltrami_checks(
    family: &FrequencyFamily,
    grid: &GridSpec,
    lambda_scale: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let tag = format!("{:?}", family.parity).to_lowercase();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut div, mut flux, mut avg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let amps = random_amplitudes(family, &mut rng);
        let w = beltrami_field(&amps, family, lambda_scale, grid)?;
        let w1 = cn_norm(&w, 1)?;
        let w0 = c0_norm(&w);
        div = div.max(c0_norm(&divergence(&w)) / w1);
        let ww = sym_product(&w, None);
        let half = w.dot(&w).scale(0.5);
        let lhs = divergence_tensor(&ww).sub(&gradient(&half))?;
        flux = flux.max(c0_norm(&lhs) / (w0 * w0));
        let want = beltrami_average(&amps, family);
        let got: Sym3 = std::array::from_fn(|c| {
            ww.comps[c].iter().sum::<f64>() / grid.len() as f64
        });
        avg = avg.max(linalg::sym_op_norm(linalg::sym_sub(&got, &want)));
    }
    Ok(vec![
        Check::at_most(&format!("{tag}_div_w"), div, 1e-10),
        Check::at_most(&format!("{tag}_div_ww_minus_grad"), flux, 1e-10),
        Check::at_most(&format!("{tag}_average"), avg, 1e-10),
    ])
}

/// Random mean-carrying field with every mode inside the dealiased band.
pub fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
    let comps: [Vec<f64>; 3] = std::array::from_fn(|_| {
        let raw: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dealias_samples(grid, &raw)
    });
    VectorField::new(*grid, comps).unwrap()
}

/// ℛ on `samples` random fields: div ℛv against v − ⟨v⟩ (relative), the
/// symmetry defect and the trace relative to ‖ℛv‖₀.
pub fn inverse_div_checks(grid: &GridSpec, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut div, mut trace) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let v = random_field(grid, &mut rng);
        let mut centred = v.clone();
        for c in &mut centred.comps {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter_mut().for_each(|x| *x -= m);
        }
        let r = inverse_divergence(&v);
        let d = divergence_tensor(&r).sub(&centred)?;
        div = div.max(c0_norm(&d) / c0_norm(&centred));
        trace = trace.max(c0_norm(&r.trace()) / c0_norm(&r));
    }
    Ok(vec![
        Check::at_most("inverse_div_identity", div, 1e-11),
        // stored as six components, so ℛv is symmetric by construction
        Check::at_most("inverse_div_symmetry", 0.0, 0.0),
        Check::at_most("inverse_div_trace", trace, 1e-12),
    ])
}

/// Probe setup: a smooth amplitude along e₁ oscillations and the
/// multiplier b for the commutator.
pub fn standard_probe(alpha: f64, lambdas: &[u32]) -> Result<(OscillatoryProbe, ScalarField)> {
    let top = lambdas.iter().copied().max().unwrap_or(1);
    let grid = crate::inverse_div::probe_grid(top, &[1, 0, 0])?;
    let amplitude = VectorField::from_fn(&grid, |x| [x[1].cos(), x[2].sin(), 0.5 + x[0].cos()]);
    let b = ScalarField::from_fn(&grid, |x| x[0].sin() + (x[1] + x[2]).cos());
    Ok((
        OscillatoryProbe {
            amplitude,
            direction: [1, 0, 0],
            alpha,
        },
        b,
    ))
}

/// Scaling tables for ℛ and [b, ℛ] on the standard probe.
pub fn probe_tables(alpha: f64, lambdas: &[u32]) -> Result<(Vec<ProbeRow>, Vec<ProbeRow>)> {
    let (probe, b) = standard_probe(alpha, lambdas)?;
    Ok((
        schauder_scaling_probe(&probe, lambdas)?,
        commutator_scaling_probe(&b, &probe, lambdas)?,
    ))
}

/// Largest ratio between consecutive frequencies.
pub fn max_ratio(rows: &[ProbeRow]) -> f64 {
    rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max)
}

/// Probe ratios against 2^{−(1−α)}·1.25 and 2^{α−2}·1.5 for doubling λ.
pub fn probe_checks(alpha: f64, lambdas: &[u32]) -> Result<Vec<Check>> {
    let (s, c) = probe_tables(alpha, lambdas)?;
    Ok(vec![
        Check::at_most("schauder_ratio", max_ratio(&s), 2f64.powf(alpha - 1.0) * 1.25),
        Check::at_most("commutator_ratio", max_ratio(&c), 2f64.powf(alpha - 2.0) * 1.5),
    ])
}

/// Keeps the modes with every |k_i| below `cutoff`.
fn low_pass(grid: &GridSpec, data: &[f64], cutoff: f64) -> Vec<f64> {
    let fft = Fft3::<f64>::new(grid);
    let mut s = fft.forward_real(data);
    for_each_mode(grid, |idx, b| {
        if b.iter().any(|&i| grid.wavenumber(i).unsigned_abs() as f64 >= cutoff) {
            s[idx] = Complex::new(0.0, 0.0);
        }
    });
    fft.inverse_real(s)
}

/// Frozen-coefficient cancellation: v_ℓ = 0 and a constant trace-free stress
/// on two overlapping slices. Returns ‖P_{<λ/2}(w_o⊗w_o − Σχ²R_{ℓ,l} −
/// ½|w_o|² Id)‖₀ restricted to its trace-free part, over ‖R̊‖₀.
pub fn frozen_cancellation(
    n: usize,
    lambda: u32,
    stress: Sym3,
    even: &FrequencyFamily,
    odd: &FrequencyFamily,
) -> Result<f64> {
    let grid = GridSpec::new(n)?;
    let r0 = even.r0.min(odd.r0);
    let mu = 16.0;
    let cut = CutoffFamily::new(mu, 0.05 * 0.05 / 18.0, lambda as f64, 1e-5)?;
    let rho = 2.0 * linalg::sym_op_norm(stress) / r0;
    let rl = linalg::sym_sub(&linalg::sym_scale(&linalg::SYM_IDENTITY, rho), &stress);
    let slices = (0..=1)
        .map(|l| Arc::new(SliceStress::constant(&grid, l, rho, rl)))
        .collect();
    let input = AssemblyInput {
        grid,
        even,
        odd,
        r0,
        cutoffs: &cut,
        lambda: lambda as f64,
        sampler: &ZeroSampler,
        substeps: 4,
        slices,
    };
    // midpoint of the overlap of l = 0 and l = 1
    let s = assemble_perturbation(&input, 0.5 / mu, AssemblyMode::OscillatoryOnly)?;
    let w = &s.w_o;
    let half: Vec<f64> = (0..grid.len())
        .map(|i| 0.5 * (0..3).map(|a| w.comps[a][i] * w.comps[a][i]).sum::<f64>())
        .collect();
    let mut comps = Vec::with_capacity(6);
    for (c, &(a, b)) in crate::field::SYM_PAIRS.iter().enumerate() {
        let raw: Vec<f64> = (0..grid.len())
            .map(|i| {
                let id = if a == b { half[i] } else { 0.0 };
                w.comps[a][i] * w.comps[b][i] - s.sum_chi2_r.comps[c][i] - id
            })
            .collect();
        comps.push(low_pass(&grid, &raw, lambda as f64 / 2.0));
    }
    let low = TensorField::from_components(grid, comps)?.trace_free();
    Ok(c0_norm(&low) / linalg::sym_op_norm(stress))
}
