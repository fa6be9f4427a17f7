//! The inverse-divergence operator ℛ and scaling probes for its estimates.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ops::{for_each_mode, kappa_vec};
use crate::field::{holder_norm, Fft3, Field, GridSpec, SYM_PAIRS};
use crate::{Complex, ScalarField, TensorField, VectorField};

/// ℛv = ¼(∇𝒫u + (∇𝒫u)ᵀ) + ¾(∇u + (∇u)ᵀ) − ½(div u) Id with Δu = v − ⟨v⟩,
/// evaluated per mode in spectral space.
pub fn inverse_divergence(v: &VectorField) -> TensorField {
    let grid = v.grid;
    let fft = Fft3::<f64>::new(&grid);
    let spec: Vec<Vec<Complex>> = v.comps.iter().map(|c| fft.forward_real(c)).collect();
    let mut out: Vec<Vec<Complex>> = vec![vec![Complex::new(0.0, 0.0); grid.len()]; 6];
    for_each_mode(&grid, |idx, b| {
        let k = kappa_vec(&grid, b);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return;
        }
        let u: [Complex; 3] = std::array::from_fn(|a| -spec[a][idx] / k2);
        let ku = (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]) / k2;
        let pu: [Complex; 3] = std::array::from_fn(|a| u[a] - ku * k[a]);
        let i = Complex::new(0.0, 1.0);
        let divu = i * (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]);
        for (c, &(a, bb)) in SYM_PAIRS.iter().enumerate() {
            let mut r = i * (pu[a] * k[bb] + pu[bb] * k[a]) * 0.25
                + i * (u[a] * k[bb] + u[bb] * k[a]) * 0.75;
            if a == bb {
                r -= divu * 0.5;
            }
            out[c][idx] = r;
        }
    });
    let comps: Vec<Vec<f64>> = out.into_iter().map(|s| fft.inverse_real(s)).collect();
    TensorField::from_components(grid, comps).unwrap()
}

/// F = a(x) e^{iλk·x}, probed through its real part.
#[derive(Clone, Debug)]
pub struct OscillatoryProbe {
    pub amplitude: VectorField,
    pub direction: [i32; 3],
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub lambda: u32,
    pub norm_alpha: f64,
    /// norm at this λ divided by the norm at the previous λ
    pub ratio: Option<f64>,
}

impl OscillatoryProbe {
    fn check(&self, lambdas: &[u32]) -> Result<()> {
        if self.direction == [0, 0, 0] {
            return Err(Error::InvalidArgument("probe direction must be nonzero".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("α = {} outside (0, 1)", self.alpha)));
        }
        let grid = &self.amplitude.grid;
        let kmax = self.direction.iter().map(|c| c.unsigned_abs()).max().unwrap();
        let band = amplitude_band(&self.amplitude);
        for &l in lambdas {
            let reach = (l * kmax) as f64 + band;
            if reach > grid.dealias_cutoff() {
                return Err(Error::GridCapacity(format!(
                    "probe frequency {reach} exceeds the dealiased range of n = {}",
                    grid.n
                )));
            }
        }
        Ok(())
    }

    /// Re(a e^{iλk·x})
    pub fn realize(&self, lambda: u32) -> VectorField {
        let grid = self.amplitude.grid;
        let k = self.direction.map(|c| (c as i64 * lambda as i64) as f64);
        let mut out = self.amplitude.clone();
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            let ph = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
            for c in 0..3 {
                out.comps[c][idx] *= ph;
            }
        }
        out
    }
}

/// Largest |k_i| carried by the amplitude.
fn amplitude_band(a: &VectorField) -> f64 {
    let grid = a.grid;
    let fft = Fft3::<f64>::new(&grid);
    let mut m: f64 = 0.0;
    for c in &a.comps {
        let s = fft.forward_real(c);
        let peak = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            continue;
        }
        for_each_mode(&grid, |idx, b| {
            if s[idx].norm() > 1e-12 * peak {
                for &i in &b {
                    m = m.max(grid.wavenumber(i).unsigned_abs() as f64);
                }
            }
        });
    }
    m
}

fn table(values: Vec<(u32, f64)>) -> Vec<ProbeRow> {
    let mut rows: Vec<ProbeRow> = Vec::with_capacity(values.len());
    for (i, &(lambda, norm_alpha)) in values.iter().enumerate() {
        let ratio = if i == 0 {
            None
        } else {
            let prev = values[i - 1].1;
            Some(if prev == 0.0 { 0.0 } else { norm_alpha / prev })
        };
        rows.push(ProbeRow {
            lambda,
            norm_alpha,
            ratio,
        });
    }
    rows
}

/// ‖ℛ(Re F)‖_α across the given frequencies.
pub fn schauder_scaling_probe(probe: &OscillatoryProbe, lambdas: &[u32]) -> Result<Vec<ProbeRow>> {
    probe.check(lambdas)?;
    let mut vals = Vec::new();
    for &l in lambdas {
        let r = inverse_divergence(&probe.realize(l));
        vals.push((l, holder_norm(&r, probe.alpha)?));
    }
    Ok(table(vals))
}

/// b ℛ(F) − ℛ(b F)
pub fn commutator(b: &ScalarField, f: &VectorField) -> Result<TensorField> {
    b.grid.check_same(&f.grid)?;
    let mut bf = f.clone();
    for c in 0..3 {
        for (x, &y) in bf.comps[c].iter_mut().zip(&b.data) {
            *x *= y;
        }
    }
    let mut out = inverse_divergence(f);
    let rbf = inverse_divergence(&bf);
    for c in 0..6 {
        for i in 0..out.comps[c].len() {
            out.comps[c][i] = b.data[i] * out.comps[c][i] - rbf.comps[c][i];
        }
    }
    Ok(out)
}

/// ‖[b, ℛ](Re F)‖_α across the given frequencies.
pub fn commutator_scaling_probe(
    b: &ScalarField,
    probe: &OscillatoryProbe,
    lambdas: &[u32],
) -> Result<Vec<ProbeRow>> {
    probe.check(lambdas)?;
    let mut vals = Vec::new();
    for &l in lambdas {
        let c = commutator(b, &probe.realize(l))?;
        vals.push((l, holder_norm(&c, probe.alpha)?));
    }
    Ok(table(vals))
}

/// CSV with columns lambda, norm_alpha, ratio (empty on the first row).
pub fn write_probe_csv(path: &Path, rows: &[ProbeRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda", "norm_alpha", "ratio"])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            format!("{:?}", r.norm_alpha),
            r.ratio.map(|x| format!("{x:?}")).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn probe_csv_string(rows: &[ProbeRow]) -> String {
    let mut buf = Vec::new();
    writeln!(buf, "lambda,norm_alpha,ratio").unwrap();
    for r in rows {
        let ratio = r.ratio.map(|x| format!("{x:?}")).unwrap_or_default();
        writeln!(buf, "{},{:?},{}", r.lambda, r.norm_alpha, ratio).unwrap();
    }
    String::from_utf8(buf).unwrap()
}

/// Smallest grid for which a probe at frequency `lambda` along `k` fits.
pub fn probe_grid(lambda: u32, k: &[i32; 3]) -> Result<GridSpec> {
    let reach = lambda * k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(1);
    let mut n = 8;
    while (n as f64) * (1.0 / 3.0) < reach as f64 + 1.0 {
        n *= 2;
    }
    GridSpec::new(n)
}
