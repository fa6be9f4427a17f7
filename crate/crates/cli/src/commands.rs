use std::fs;
use std::path::Path;

use cilab_core::beltrami::{build_families, io, FrequencyFamily};
use cilab_core::diagnostics::{
    build_report, emit_report, read_report, write_snapshots, Report, RowStatus, ScheduleSnapshot,
};
use cilab_core::inverse_div::write_probe_csv;
use cilab_core::parameters::{
    check_global_inequalities, check_localized_inequalities, hausdorff_cover, localized_delta,
    search_seed, HausdorffCover, InequalityLedger, LocalizedSchedule, ParameterSchedule,
};
use cilab_core::pipeline::{build_run, RunConfig};
use cilab_core::verify::{self, all_pass, Check};
use cilab_core::{Error, GridSpec, Result};
use serde::Serialize;

use crate::exit;
use crate::{GeometryArgs, OperatorArgs, ParamsArgs, ReportArgs, RunArgs};

/// println! that tolerates a closed stdout, e.g. when piped into head.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let rel = if c.lower { ">" } else { "<=" };
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        out!("{verdict} {:<28} {:.6e} {rel} {:.3e}", c.name, c.measured, c.limit);
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct GeometryOutput {
    pass: bool,
    r0: Vec<(String, f64)>,
    checks: Vec<Check>,
}

pub fn verify_geometry(a: &GeometryArgs) -> Result<u8> {
    let families: Vec<FrequencyFamily> = match &a.family {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            match io::from_json(&text) {
                Ok(f) if !f.is_empty() => f,
                Ok(_) => {
                    eprintln!("error: {}: no families", path.display());
                    return Ok(exit::GEOMETRY);
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return Ok(exit::GEOMETRY);
                }
            }
        }
        None => {
            let (e, o) = build_families()?;
            vec![e, o]
        }
    };
    if let Some(path) = &a.export {
        let refs: Vec<&FrequencyFamily> = families.iter().collect();
        write_text(path, &io::to_json(&refs)?)?;
    }
    let grid = GridSpec::new(a.grid)?;
    // Beltrami products reach 4·scale per axis and must stay dealiased
    let scale = ((grid.dealias_cutoff() / 4.0).floor() as u32).max(1);
    let mut checks = Vec::new();
    for (i, f) in families.iter().enumerate() {
        let seed = a.seed.wrapping_add(i as u64);
        checks.extend(verify::geometry_checks(f, a.samples, seed)?);
        checks.extend(verify::beltrami_checks(f, &grid, scale, 3, seed)?);
    }
    let r0: Vec<(String, f64)> = families
        .iter()
        .map(|f| (format!("{:?}", f.parity).to_lowercase(), f.r0))
        .collect();
    let pass = all_pass(&checks);
    if a.json {
        print_json(&GeometryOutput { pass, r0, checks })?;
    } else {
        print_checks(&checks);
        for (name, r) in &r0 {
            out!("r0 {name} = {r:.7}");
        }
    }
    Ok(if pass { exit::OK } else { exit::GEOMETRY })
}

#[derive(Serialize)]
struct OperatorOutput {
    pass: bool,
    checks: Vec<Check>,
    schauder: Vec<(u32, f64, Option<f64>)>,
    commutator: Vec<(u32, f64, Option<f64>)>,
}

pub fn verify_operators(a: &OperatorArgs) -> Result<u8> {
    let grid = GridSpec::new(a.grid)?;
    let mut checks = verify::inverse_div_checks(&grid, a.fields, a.seed)?;
    checks.extend(verify::probe_checks(a.alpha, &a.lambdas)?);
    let (s, c) = verify::probe_tables(a.alpha, &a.lambdas)?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_probe_csv(&dir.join("schauder.csv"), &s)?;
        write_probe_csv(&dir.join("commutator.csv"), &c)?;
    }
    let pass = all_pass(&checks);
    if a.json {
        let rows = |r: &[cilab_core::inverse_div::ProbeRow]| {
            r.iter().map(|x| (x.lambda, x.norm_alpha, x.ratio)).collect()
        };
        print_json(&OperatorOutput {
            pass,
            checks,
            schauder: rows(&s),
            commutator: rows(&c),
        })?;
    } else {
        print_checks(&checks);
    }
    Ok(if pass { exit::OK } else { exit::FAILURE })
}

pub fn run(a: &RunArgs) -> Result<u8> {
    let config = RunConfig {
        eps0: a.eps0,
        lambda0: a.lambda0,
        stages: a.stages,
        grid: a.grid,
        substeps: a.substeps,
        samples: a.samples,
        c0: a.c0,
        d: a.d,
        mu_scale: a.mu_scale,
        time_step: a.time_step,
        snapshots: a.snapshots,
    };
    config.validate()?;
    let run = build_run(&config)?;
    let report = build_report(&run, &mut |q, t| eprintln!("stage {q}: t = {t:+.6}"))?;
    emit_report(&report, &a.out)?;
    if config.snapshots {
        write_snapshots(&run, &a.out, 0.0)?;
    }
    summarize(&report, a.json)?;
    Ok(exit::OK)
}

#[derive(Serialize)]
struct StageSummary {
    q: usize,
    lambda: u64,
    mu: Option<f64>,
    support: (f64, f64),
    samples: usize,
    max_residual: f64,
    max_energy: f64,
    estimates_pass: usize,
    estimates_fail: usize,
    estimates_skipped: usize,
    lemma_constants: Vec<(String, f64)>,
}

fn stage_summaries(report: &Report) -> Vec<StageSummary> {
    report
        .stages
        .iter()
        .map(|s| {
            let count = |st: RowStatus| s.ledger.iter().filter(|r| r.status == st).count();
            StageSummary {
                q: s.meta.q,
                lambda: s.meta.lambda,
                mu: s.meta.mu,
                support: s.meta.support,
                samples: s.series.len(),
                max_residual: s.series.iter().map(|r| r.residual).fold(0.0, f64::max),
                max_energy: s.series.iter().map(|r| r.energy).fold(0.0, f64::max),
                estimates_pass: count(RowStatus::Pass),
                estimates_fail: count(RowStatus::Fail),
                estimates_skipped: count(RowStatus::Skipped),
                lemma_constants: s.meta.lemma_constants.clone(),
            }
        })
        .collect()
}

fn summarize(report: &Report, json: bool) -> Result<()> {
    let rows = stage_summaries(report);
    if json {
        return print_json(&rows);
    }
    if let Some(l) = &report.parameter_ledger {
        let failing = l.rows.iter().filter(|r| !r.pass).count();
        out!("parameter ledger: {} rows, {failing} failing", l.rows.len());
    }
    for s in &rows {
        out!(
            "stage {}: lambda {} mu {} support [{:.5}, {:.5}] samples {} max residual {:.3e} \
             max energy {:.6e} estimates {} pass / {} fail / {} skipped",
            s.q,
            s.lambda,
            s.mu.map(|m| format!("{m}")).unwrap_or_else(|| "-".into()),
            s.support.0,
            s.support.1,
            s.samples,
            s.max_residual,
            s.max_energy,
            s.estimates_pass,
            s.estimates_fail,
            s.estimates_skipped,
        );
        for (name, c) in &s.lemma_constants {
            out!("  {name}: {c:.4e}");
        }
    }
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<u8> {
    let report = read_report(&a.dir)?;
    summarize(&report, a.json)?;
    Ok(exit::OK)
}

#[derive(Serialize)]
struct ParamsOutput {
    lambda0: Option<u64>,
    ln_lambda0: f64,
    stages: usize,
    d: f64,
    d_min: f64,
    /// (1 − d_min)/ε₀², the measured constant in 1 − d_min ≥ cε₀²
    d_gap_constant: f64,
    schedule: ScheduleSnapshot,
    ledger_pass: bool,
    ledger: InequalityLedger,
    /// (name, slack dips at most once and then recovers)
    slack_unimodal: Vec<(String, bool)>,
    localized: LocalizedSchedule,
    localized_ledger: InequalityLedger,
    hausdorff: Vec<HausdorffCover>,
    search_tried: Option<Vec<u64>>,
}

fn ledger_names(l: &InequalityLedger) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in &l.rows {
        if !names.contains(&r.name) {
            names.push(r.name.clone());
        }
    }
    names
}

fn params_csv(s: &ParameterSchedule, l: &InequalityLedger, stages: usize) -> Result<String> {
    let names = ledger_names(l);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["q", "lambda", "ln_lambda", "ln_delta", "ln_mu", "ln_ell"].map(String::from).to_vec();
    header.extend(names.iter().map(|n| format!("slack_{n}")));
    w.write_record(&header)?;
    let opt = |x: f64| if x.is_finite() { format!("{x:?}") } else { String::new() };
    for q in 0..=stages {
        let mut rec = vec![
            q.to_string(),
            s.lambda_exact[q].map(|x| x.to_string()).unwrap_or_default(),
            format!("{:?}", s.ln_lambda[q]),
            format!("{:?}", s.ln_delta[q]),
            opt(s.ln_mu[q]),
            opt(s.ln_ell[q]),
        ];
        for n in &names {
            let slack = l.rows.iter().find(|r| r.q == q && &r.name == n);
            rec.push(slack.map(|r| format!("{:?}", r.slack)).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn params(a: &ParamsArgs) -> Result<u8> {
    let (lambda0, ln_lambda0, tried) = if a.search {
        let found = search_seed(a.eps0, a.stages, a.c0, a.search_max_log2)?;
        (Some(found.lambda0), found.ln_lambda0, Some(found.tried))
    } else {
        let l = a.lambda0.ok_or_else(|| {
            Error::InvalidArgument("give --lambda0 or --search".into())
        })?;
        if !(l >= 2.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("λ₀ = {l} must be at least 2")));
        }
        let exact = (l.fract() == 0.0 && l < 2f64.powi(53)).then_some(l as u64);
        (exact, l.ln(), None)
    };
    let mut s = ParameterSchedule::build(a.eps0, ln_lambda0, a.stages, a.c0)?;
    let d_min = s.d_min();
    let d = a.d.unwrap_or(0.5 * (1.0 + d_min));
    if !(d > d_min && d < 1.0) {
        return Err(Error::InvalidArgument(format!("d = {d} must lie in ({d_min}, 1)")));
    }
    s = s.with_d(d);
    let ledger = check_global_inequalities(&s, a.stages);
    let localized = localized_delta(&s, 0.0, a.stages)?;
    let localized_ledger = check_localized_inequalities(&s, &localized, a.stages);
    let hausdorff: Vec<HausdorffCover> =
        (1..=a.stages.max(1)).map(|q| hausdorff_cover(&s, q, d)).collect();
    let slack_unimodal = ledger_names(&ledger)
        .into_iter()
        .map(|n| {
            let u = ledger.slack_unimodal(&n);
            (n, u)
        })
        .collect();
    let out = ParamsOutput {
        lambda0,
        ln_lambda0,
        stages: a.stages,
        d,
        d_min,
        d_gap_constant: (1.0 - d_min) / (a.eps0 * a.eps0),
        schedule: ScheduleSnapshot::new(&s),
        ledger_pass: ledger.pass(),
        ledger: ledger.clone(),
        slack_unimodal,
        localized,
        localized_ledger,
        hausdorff,
        search_tried: tried,
    };
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_text(&dir.join("params.json"), &serde_json::to_string_pretty(&out)?)?;
        write_text(&dir.join("params.csv"), &params_csv(&s, &ledger, a.stages)?)?;
    }
    if a.json {
        print_json(&out)?;
    } else {
        match lambda0 {
            Some(l) => out!("lambda0 = {l}"),
            None => out!("ln lambda0 = {ln_lambda0}"),
        }
        out!("d_min = {d_min:.8}");
        out!("(1 - d_min)/eps0^2 = {:.6}", out.d_gap_constant);
        out!("d = {d:.8}");
        for h in &out.hausdorff {
            out!("cover q = {}: total {:.6e} tail bound {:.3e}", h.q, h.total, h.tail_bound);
        }
        let failing: Vec<_> = ledger.rows.iter().filter(|r| !r.pass).collect();
        out!("global ledger: {} rows, {} failing", ledger.rows.len(), failing.len());
        for r in failing {
            out!("  q = {} {}: slack {:.4e}", r.q, r.name, r.slack);
        }
    }
    if ledger.pass() {
        Ok(exit::OK)
    } else {
        Ok(exit::NO_SEED)
    }
}
