//! One line per acceptance criterion. Tolerances and runtime limits are fixed
//! here; the process exits nonzero when any criterion fails.

use std::fs;
use std::time::Instant;

use cilab_core::beltrami::{build_families, gamma, FrequencyFamily};
use cilab_core::diagnostics::{
    build_report, emit_report, euler_reynolds_residual, TimeDerivative,
};
use cilab_core::field::{c0_norm, cn_norm, divergence, energy, Field};
use cilab_core::iteration::initial_triple;
use cilab_core::linalg;
use cilab_core::parameters::{
    bad_sets, check_global_inequalities, hausdorff_cover, in_v, localized_delta, search_seed,
    Membership, ParameterSchedule,
};
use cilab_core::pipeline::{build_run, RunConfig};
use cilab_core::verify::{self, Check};
use cilab_core::{GridSpec, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS0: f64 = 0.05;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Runs one criterion, folding its runtime limit into the verdict.
fn criterion(name: &str, limit_secs: f64, f: impl FnOnce() -> Result<Verdict>) -> bool {
    let start = Instant::now();
    let v = f().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
    let secs = start.elapsed().as_secs_f64();
    let pass = v.pass && secs < limit_secs;
    println!(
        "{} {name} [{secs:.1} s of {limit_secs} s] {}",
        if pass { "PASS" } else { "FAIL" },
        v.detail
    );
    pass
}

fn measured(checks: &[Check], name: &str) -> f64 {
    checks.iter().find(|c| c.name == name).map(|c| c.measured).unwrap()
}

fn beltrami(even: &FrequencyFamily, odd: &FrequencyFamily) -> Result<Verdict> {
    let g = GridSpec::new(64)?;
    let mut ok = true;
    let mut detail = String::new();
    for (i, f) in [even, odd].into_iter().enumerate() {
        let c = verify::beltrami_checks(f, &g, 4, 3, 11 + i as u64)?;
        let tag = if i == 0 { "even" } else { "odd" };
        let div = measured(&c, &format!("{tag}_div_w"));
        let flux = measured(&c, &format!("{tag}_div_ww_minus_grad"));
        let avg = measured(&c, &format!("{tag}_average"));
        ok &= div <= 1e-10 && flux <= 1e-10 && avg <= 1e-10;
        detail += &format!("{tag}: div {div:.2e} flux {flux:.2e} mean {avg:.2e}; ");
    }
    Ok(verdict(ok, detail))
}

fn geometric_lemma(even: &FrequencyFamily, odd: &FrequencyFamily) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut detail = String::new();
    for (tag, f) in [("even", even), ("odd", odd)] {
        let at_id = gamma(&linalg::SYM_IDENTITY, f)?;
        let id_err = at_id.values.iter().fold(0.0f64, |m, g| m.max((g - 0.5).abs()));
        let mut recon: f64 = 0.0;
        for _ in 0..100 {
            let m: linalg::Sym3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let dir = linalg::sym_scale(&m, 1.0 / linalg::sym_op_norm(m));
            let s = rng.gen_range(0.0..=0.5) * f.r0;
            let r: linalg::Sym3 = std::array::from_fn(|c| linalg::SYM_IDENTITY[c] + s * dir[c]);
            let back = gamma(&r, f)?.reconstruct(f);
            recon = recon.max(linalg::sym_op_norm(linalg::sym_sub(&back, &r)));
        }
        ok &= f.r0 > 1e-3 && recon <= 1e-12 && id_err <= 1e-12;
        detail += &format!("{tag}: r0 {:.7} recon {recon:.2e} gamma(Id) {id_err:.2e}; ", f.r0);
    }
    Ok(verdict(ok, detail))
}

fn inverse_divergence() -> Result<Verdict> {
    let g = GridSpec::new(64)?;
    let c = verify::inverse_div_checks(&g, 50, 21)?;
    let id = measured(&c, "inverse_div_identity");
    let sym = measured(&c, "inverse_div_symmetry");
    let tr = measured(&c, "inverse_div_trace");
    let alpha = 0.1;
    let (s, k) = verify::probe_tables(alpha, &[4, 8, 16])?;
    let sr = verify::max_ratio(&s);
    let kr = verify::max_ratio(&k);
    let s_lim = 2f64.powf(-(1.0 - alpha)) * 1.25;
    let k_lim = 2f64.powf(alpha - 2.0) * 1.5;
    let ok = id <= 1e-11 && sym == 0.0 && tr <= 1e-12 && sr <= s_lim && kr <= k_lim;
    Ok(verdict(
        ok,
        format!(
            "div {id:.2e} sym {sym:.1e} trace {tr:.2e} schauder {sr:.4} (≤ {s_lim:.4}) \
             commutator {kr:.4} (≤ {k_lim:.4})"
        ),
    ))
}

fn initial() -> Result<Verdict> {
    // λ₀ = 4 and its products are resolved exactly at 32³
    let g = GridSpec::new(32)?;
    let tr = initial_triple(&g, 4, EPS0)?;
    let times = [-0.24, -0.2, -0.15, -0.1, 0.0, 0.05, 0.125, 0.19, 0.245];
    let mut res: f64 = 0.0;
    for &t in &times {
        res = res.max(euler_reynolds_residual(&tr, t, TimeDerivative::Analytic)?.relative);
    }
    let r_at_0 = c0_norm(&*tr.stress(0.0)?);
    let e0 = energy(&*tr.velocity(0.0)?);
    let mut drift: f64 = 0.0;
    for i in 0..=16 {
        let t = -0.125 + 0.25 * i as f64 / 16.0;
        drift = drift.max((energy(&*tr.velocity(t)?) - e0).abs() / e0);
    }
    let ok = res <= 1e-8 && r_at_0 == 0.0 && drift <= 1e-12;
    Ok(verdict(ok, format!("residual {res:.2e} |R(0)| {r_at_0:.1e} energy drift {drift:.2e}")))
}

fn one_step() -> Result<Verdict> {
    let cfg = RunConfig {
        grid: 128,
        stages: 1,
        ..RunConfig::default()
    };
    let run = build_run(&cfg)?;
    let tr = &run.stages[1];
    let ctx = tr.step.as_ref().expect("stage 1 has a step");
    let mu = ctx.params.mu;
    let dt = 1e-5;

    let mut chi: f64 = 0.0;
    for i in 0..=4000 {
        let t = -0.5 + i as f64 / 4000.0;
        chi = chi.max((ctx.cutoffs.square_sum(t) - 1.0).abs());
    }

    let (mut div, mut res, mut trace, mut rate) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &[-0.21875, -0.15625, 0.15625, 0.1875, 0.21875] {
        let r = euler_reynolds_residual(tr, t, TimeDerivative::Centered(dt))?;
        res = res.max(r.relative);
        let v = tr.velocity(t)?;
        div = div.max(c0_norm(&divergence(&*v)) / cn_norm(&*v, 1)?);
        let raw = ctx.reynolds(t)?.raw_sum()?;
        trace = trace.max(c0_norm(&raw.trace()) / c0_norm(&raw));
        let omega = ctx.perturbation_rate(t)?;
        let wp = ctx.perturbation(t + dt)?;
        let wm = ctx.perturbation(t - dt)?;
        let fd = wp.w.as_ref().unwrap().sub(wm.w.as_ref().unwrap())?.scale(0.5 / dt);
        rate = rate.max(c0_norm(&omega.sub(&fd)?) / c0_norm(&omega));
    }

    let (a, b) = ctx.prev.support;
    let (lo, hi) = tr.support;
    let support_ok = lo >= a - 1.0 / mu && hi <= b + 1.0 / mu && lo >= -0.5 && hi <= 0.5;
    let ok = div <= 1e-10 && chi <= 1e-12 && trace <= 1e-10 && res <= 1e-4 && rate <= 1e-6 && support_ok;
    Ok(verdict(
        ok,
        format!(
            "div {div:.2e} chi {chi:.1e} trace {trace:.2e} residual {res:.2e} rate {rate:.2e} \
             support [{lo:.5}, {hi:.5}] from [{a}, {b}] with 1/mu = {}",
            1.0 / mu
        ),
    ))
}

fn frozen(even: &FrequencyFamily, odd: &FrequencyFamily) -> Result<Verdict> {
    let stress = [0.01, 0.002, 0.0, -0.004, 0.0, -0.006];
    let r = verify::frozen_cancellation(256, 32, stress, even, odd)?;
    Ok(verdict(r <= 0.1, format!("low-pass / |R| = {r:.2e} at lambda 32 on 256^3")))
}

fn parameter_calculus() -> Result<Verdict> {
    let stages = 8;
    let search = search_seed(EPS0, stages, 1.0, 63)?;
    let s = ParameterSchedule::build(EPS0, search.ln_lambda0, stages, 1.0)?;
    let alpha = 1.0 + EPS0;
    let eps1 = EPS0 * EPS0 / 18.0;
    let a = (1.0 + alpha) * (0.8 + EPS0);
    let closed = a / (a + 2.0 * alpha * eps1);
    let d_min = s.d_min();
    let d_ok = (d_min - closed).abs() <= 1e-6 && (d_min - 0.99983).abs() < 5e-6;

    let d = 0.5 * (1.0 + d_min);
    let totals: Vec<f64> = (1..=stages).map(|q| hausdorff_cover(&s, q, d).total).collect();
    let monotone = totals.windows(2).all(|w| w[1] < w[0]);
    let tail = totals[stages - 1] / totals[0];

    let ledger = check_global_inequalities(&s, stages);
    let slacks_reported = ledger.rows.iter().all(|r| r.slack.is_finite());
    let ledger_ok = ledger.pass() && slacks_reported;

    let sets = bad_sets(&s, stages);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut outside = Vec::new();
    let mut tried = 0;
    while outside.len() < 100 && tried < 10_000 {
        tried += 1;
        let t0 = rng.gen_range(-1.0..1.0);
        if in_v(&sets, 1, t0) != Membership::In {
            outside.push(t0);
        }
    }
    let mut n_primes = Vec::new();
    for &t0 in &outside {
        n_primes.push(localized_delta(&s, t0, stages)?.n_prime);
    }
    let n_prime_ok = outside.len() == 100
        && n_primes.iter().all(|n| n.is_some() && *n == n_primes[0]);

    let ok = d_ok && monotone && tail < 1e-3 && ledger_ok && n_prime_ok;
    Ok(verdict(
        ok,
        format!(
            "d_min {d_min:.8} (closed form {closed:.8}); cover monotone {monotone}, \
             q=8/q=1 {tail:.3}; seed {} ledger pass {} ({} rows); \
             t0 outside V^(1): {} of {tried}, N' {:?}",
            search.lambda0,
            ledger.pass(),
            ledger.rows.len(),
            outside.len(),
            n_primes.first().copied().flatten(),
        ),
    ))
}

fn determinism() -> Result<Verdict> {
    let cfg = RunConfig {
        grid: 32,
        stages: 1,
        samples: 3,
        ..RunConfig::default()
    };
    let dir = tempfile::tempdir().map_err(|e| cilab_core::Error::io("tempdir", e))?;
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let run = build_run(&cfg)?;
        let report = build_report(&run, &mut |_, _| {})?;
        emit_report(&report, &out)?;
        let mut files: Vec<_> = fs::read_dir(&out)
            .map_err(|e| cilab_core::Error::io(&out, e))?
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        let bytes: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
            .collect();
        outputs.push(bytes);
    }
    let same = outputs[0] == outputs[1];
    Ok(verdict(same, format!("{} files compared byte for byte", outputs[0].len())))
}

fn main() {
    let (even, odd) = build_families().expect("families build");
    let results = [
        criterion("beltrami_identities", 10.0, || beltrami(&even, &odd)),
        criterion("geometric_lemma", 5.0, || geometric_lemma(&even, &odd)),
        criterion("inverse_divergence", 60.0, inverse_divergence),
        criterion("initial_triple", 10.0, initial),
        criterion("parameter_calculus", 5.0, parameter_calculus),
        criterion("frozen_cancellation", 300.0, || frozen(&even, &odd)),
        criterion("one_step", 1800.0, one_step),
        criterion("determinism", 600.0, determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
