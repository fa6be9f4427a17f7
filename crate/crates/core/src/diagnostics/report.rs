use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::estimates::{measure, sample_times, verify_stage_estimates, EstimateRow, StageScales};
use super::lemma::{gamma_ceiling, max_constants, track_lemma_quantities, LemmaRow, StepScales};
use super::residual::TimeDerivative;
use crate::error::{Error, Result};
use crate::field::snapshot;
use crate::parameters::{check_global_inequalities, BadSet, InequalityLedger, Membership, ParameterSchedule};
use crate::pipeline::{Run, RunConfig};

/// Version of the manifest and CSV layouts.
pub const SCHEMA_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.json";
pub const LEDGER_CSV: &str = "ledger.csv";
pub const TIMESERIES_CSV: &str = "timeseries.csv";
pub const NORMS_CSV: &str = "norms.csv";
pub const LEMMA_CSV: &str = "lemma.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub q: usize,
    pub t: f64,
    pub residual: f64,
    pub energy: f64,
    pub holder13_v: f64,
    pub holder23_p: f64,
    pub in_bad_set: bool,
}

/// Remaining per-time norms; the w and Δp columns are empty at q = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub q: usize,
    pub t: f64,
    pub residual_abs: f64,
    pub div_v: f64,
    pub v1: f64,
    pub p1: f64,
    pub p2: f64,
    pub r0: f64,
    pub r1: f64,
    pub material_r: f64,
    pub w0: Option<f64>,
    pub w1: Option<f64>,
    pub dtw0: Option<f64>,
    pub dp0: Option<f64>,
    pub dp1: Option<f64>,
    pub dp2: Option<f64>,
    pub dtdp0: Option<f64>,
    pub w_sum: f64,
    pub v0_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageMeta {
    pub q: usize,
    pub lambda: u64,
    /// μ and ℓ of the step into this stage
    pub mu: Option<f64>,
    pub ell: Option<f64>,
    pub support: (f64, f64),
    pub residual_mode: TimeDerivative,
    /// U^(q+1) as used for the bad-set column
    pub bad_set_mu: f64,
    pub bad_set_radius: f64,
    /// largest empirical constant per perturbation estimate
    pub lemma_constants: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub meta: StageMeta,
    pub series: Vec<TimeRow>,
    pub norms: Vec<NormRow>,
    pub ledger: Vec<EstimateRow>,
    pub lemma: Vec<LemmaRow>,
}

/// Schedule entry with the unused μ₀, ℓ₀ left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub q: usize,
    pub lambda: Option<u64>,
    pub ln_lambda: f64,
    pub ln_delta: f64,
    pub ln_mu: Option<f64>,
    pub ln_ell: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSnapshot {
    pub eps0: f64,
    pub alpha: f64,
    pub eps1: f64,
    pub c0: f64,
    pub d: Option<f64>,
    pub d_min: f64,
    pub rows: Vec<ScheduleRow>,
}

impl ScheduleSnapshot {
    pub fn new(s: &ParameterSchedule) -> Self {
        let opt = |x: f64| x.is_finite().then_some(x);
        ScheduleSnapshot {
            eps0: s.eps0,
            alpha: s.alpha,
            eps1: s.eps1,
            c0: s.c0,
            d: s.d,
            d_min: s.d_min(),
            rows: (0..s.ln_lambda.len())
                .map(|q| ScheduleRow {
                    q,
                    lambda: s.lambda_exact[q],
                    ln_lambda: s.ln_lambda[q],
                    ln_delta: s.ln_delta[q],
                    ln_mu: opt(s.ln_mu[q]),
                    ln_ell: opt(s.ln_ell[q]),
                })
                .collect(),
        }
    }
}

/// A whole run's diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub code_version: String,
    pub config: Option<RunConfig>,
    pub schedule: Option<ScheduleSnapshot>,
    pub parameter_ledger: Option<InequalityLedger>,
    pub stages: Vec<StageReport>,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: None,
            schedule: None,
            parameter_ledger: None,
            stages: vec![],
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    code_version: String,
    config: Option<RunConfig>,
    schedule: Option<ScheduleSnapshot>,
    parameter_ledger: Option<InequalityLedger>,
    stages: Vec<StageMeta>,
    files: Vec<String>,
}

fn bad_set_for(run: &Run, q: usize) -> BadSet {
    let s = &run.schedule;
    let mu = run.config.run_mu(s, q + 1);
    BadSet::new(q + 1, mu.ln(), s.ln_lambda[q + 1], s.eps1)
}

/// Samples stage q of a run and fills its report. `progress` receives each
/// finished sample time.
pub fn stage_report(run: &Run, q: usize, progress: &mut dyn FnMut(usize, f64)) -> Result<StageReport> {
    let triple = &run.stages[q];
    let cfg = &run.config;
    let step = triple.step.as_ref();
    let mu = step.map(|c| c.params.mu);
    let times = sample_times(triple.support, mu, cfg.samples);
    let bad = bad_set_for(run, q);
    let gamma_max = gamma_ceiling(&run.even, run.even.r0.min(run.odd.r0))
        .max(gamma_ceiling(&run.odd, run.even.r0.min(run.odd.r0)));
    let mut series = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    let mut ledger = Vec::new();
    let mut lemma = Vec::new();
    let mut mode = TimeDerivative::Analytic;
    for &t in &times {
        let m = measure(&run.stages[..=q], q, t, cfg.time_step)?;
        mode = m.residual_mode;
        let in_bad = bad.contains(t) != Membership::Out;
        let sc = StageScales::new(&run.schedule, q, t, cfg.stages)?;
        ledger.extend(verify_stage_estimates(&m, &sc, in_bad));
        if let Some(ctx) = step {
            let slice = ctx.perturbation(t)?;
            let scales = StepScales {
                lambda_prev: sc.ln_lambda[0].exp(),
                sqrt_delta_prev: (0.5 * sc.ln_delta_loc[0]).exp(),
                lambda: sc.ln_lambda[1].exp(),
                sqrt_delta: (0.5 * sc.ln_delta_loc[1]).exp(),
                mu: ctx.params.mu,
            };
            lemma.extend(track_lemma_quantities(q, &slice, &scales, gamma_max)?);
        }
        series.push(TimeRow {
            q,
            t,
            residual: m.residual.relative,
            energy: m.energy,
            holder13_v: m.holder13_v,
            holder23_p: m.holder23_p,
            in_bad_set: in_bad,
        });
        norms.push(NormRow {
            q,
            t,
            residual_abs: m.residual.absolute,
            div_v: m.div_v,
            v1: m.v1,
            p1: m.p1,
            p2: m.p2,
            r0: m.r0,
            r1: m.r1,
            material_r: m.material_r,
            w0: m.w.map(|w| w[0]),
            w1: m.w.map(|w| w[1]),
            dtw0: m.w.map(|w| w[2]),
            dp0: m.dp.map(|d| d[0]),
            dp1: m.dp.map(|d| d[1]),
            dp2: m.dp.map(|d| d[2]),
            dtdp0: m.dp.map(|d| d[3]),
            w_sum: m.w_sum,
            v0_norm: m.v0_norm,
        });
        progress(q, t);
    }
    let lambda = run.schedule.lambda_exact[q]
        .ok_or_else(|| Error::GridCapacity(format!("λ_{q} does not fit an integer")))?;
    Ok(StageReport {
        meta: StageMeta {
            q,
            lambda,
            mu,
            ell: step.map(|c| c.params.ell),
            support: triple.support,
            residual_mode: mode,
            bad_set_mu: bad.mu(),
            bad_set_radius: bad.radius_units / bad.mu(),
            lemma_constants: max_constants(&lemma),
        },
        series,
        norms,
        ledger,
        lemma,
    })
}

/// Reports every stage of the run, freeing field caches once a stage is done.
pub fn build_report(run: &Run, progress: &mut dyn FnMut(usize, f64)) -> Result<Report> {
    let mut stages = Vec::with_capacity(run.stages.len());
    for q in 0..run.stages.len() {
        stages.push(stage_report(run, q, progress)?);
        if q >= 1 {
            run.stages[q - 1].clear_caches();
        }
    }
    if let Some(last) = run.stages.last() {
        last.clear_caches();
    }
    Ok(Report {
        config: Some(run.config.clone()),
        schedule: Some(ScheduleSnapshot::new(&run.schedule)),
        parameter_ledger: Some(check_global_inequalities(&run.schedule, run.config.stages)),
        stages,
        ..Report::default()
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>, header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut any = false;
    for r in rows {
        w.serialize(r)?;
        any = true;
    }
    if !any {
        w.write_record(header)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

const TIME_HEADER: [&str; 7] = ["q", "t", "residual", "energy", "holder13_v", "holder23_p", "in_bad_set"];
const LEDGER_HEADER: [&str; 6] = ["q", "t", "name", "measured", "bound", "status"];
const LEMMA_HEADER: [&str; 6] = ["q", "t", "name", "measured", "bound", "constant"];
const NORM_HEADER: [&str; 19] = [
    "q", "t", "residual_abs", "div_v", "v1", "p1", "p2", "r0", "r1", "material_r", "w0", "w1",
    "dtw0", "dp0", "dp1", "dp2", "dtdp0", "w_sum", "v0_norm",
];

/// Writes manifest.json and the four CSV tables into `dir`.
pub fn emit_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [MANIFEST, LEDGER_CSV, TIMESERIES_CSV, NORMS_CSV, LEMMA_CSV];
    let manifest = Manifest {
        schema_version: report.schema_version,
        code_version: report.code_version.clone(),
        config: report.config.clone(),
        schedule: report.schedule.clone(),
        parameter_ledger: report.parameter_ledger.clone(),
        stages: report.stages.iter().map(|s| s.meta.clone()).collect(),
        files: files.iter().map(|s| s.to_string()).collect(),
    };
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let st = &report.stages;
    write_csv(&dir.join(LEDGER_CSV), st.iter().flat_map(|s| &s.ledger), &LEDGER_HEADER)?;
    write_csv(&dir.join(TIMESERIES_CSV), st.iter().flat_map(|s| &s.series), &TIME_HEADER)?;
    write_csv(&dir.join(NORMS_CSV), st.iter().flat_map(|s| &s.norms), &NORM_HEADER)?;
    write_csv(&dir.join(LEMMA_CSV), st.iter().flat_map(|s| &s.lemma), &LEMMA_HEADER)?;
    Ok(())
}

/// Reads a report back; rejects other schema versions.
pub fn read_report(dir: &Path) -> Result<Report> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest = serde_json::from_str(&text)?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "{}: schema version {} is not {SCHEMA_VERSION}",
            path.display(),
            m.schema_version
        )));
    }
    let ledger: Vec<EstimateRow> = read_csv(&dir.join(LEDGER_CSV))?;
    let series: Vec<TimeRow> = read_csv(&dir.join(TIMESERIES_CSV))?;
    let norms: Vec<NormRow> = read_csv(&dir.join(NORMS_CSV))?;
    let lemma: Vec<LemmaRow> = read_csv(&dir.join(LEMMA_CSV))?;
    let stages = m
        .stages
        .into_iter()
        .map(|meta| {
            let q = meta.q;
            StageReport {
                meta,
                series: series.iter().filter(|r| r.q == q).cloned().collect(),
                norms: norms.iter().filter(|r| r.q == q).cloned().collect(),
                ledger: ledger.iter().filter(|r| r.q == q).cloned().collect(),
                lemma: lemma.iter().filter(|r| r.q == q).cloned().collect(),
            }
        })
        .collect();
    Ok(Report {
        schema_version: m.schema_version,
        code_version: m.code_version,
        config: m.config,
        schedule: m.schedule,
        parameter_ledger: m.parameter_ledger,
        stages,
    })
}

/// v, p and R̊ of every stage at t, as stage_{q}_{v,p,r}.eulr.
pub fn write_snapshots(run: &Run, dir: &Path, t: f64) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for tr in &run.stages {
        let base = format!("stage_{}", tr.q);
        let v = format!("{base}_v.eulr");
        let p = format!("{base}_p.eulr");
        let r = format!("{base}_r.eulr");
        snapshot::write(&dir.join(&v), &*tr.velocity(t)?)?;
        snapshot::write(&dir.join(&p), &*tr.pressure(t)?)?;
        snapshot::write(&dir.join(&r), &*tr.stress(t)?)?;
        names.extend([v, p, r]);
    }
    Ok(names)
}
