//! Subcommand implementations. Each returns the process exit code on
//! completion; errors are mapped to codes by the caller.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use choquard_core::continuation::{newton_iterate, ContinuationConfig, ContinuationResult};
use choquard_core::extension::{d_s_constant, dtn_compare, energy_identity, HalfPlaneGrid};
use choquard_core::ground_state::{
    solve_fixed_point, tail_exponent, to_qstar, GroundState, SolveConfig, SweepRecord,
};
use choquard_core::io::{
    continuation_table, format_float, profile_filename, read_profile, spectrum_table, sweep_table,
    write_profile, ProfileFile, Table, GS_PREFIX,
};
use choquard_core::oracle::{oracle_compare, solve_classical, OracleConfig};
use choquard_core::potential::{hl_inner, hl_norm4, OperatorParams, SpectralContext};
use choquard_core::radial::{make_grid, RadialProfile};
use choquard_core::spectrum::{nondegeneracy_report, SpectrumReport, Verdict as SpectrumVerdict};
use choquard_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::{RunManifest, Status, Verdict, MANIFEST};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NUMERIC: u8 = 2;

const DTN_TOL: f64 = 0.02;
const GAUSS_WIDTHS: [f64; 3] = [0.25, 0.5, 1.0];

fn context(cfg: &RunConfig) -> Result<SpectralContext> {
    Ok(SpectralContext::new(make_grid(cfg.m, cfg.r_max)?))
}

fn solve_config(cfg: &RunConfig) -> SolveConfig {
    SolveConfig {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..SolveConfig::default()
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.clone())
}

fn save_profile(dir: &Path, p: &ProfileFile, manifest: Option<&mut RunManifest>) -> Result<String> {
    let name = p.filename();
    write_profile(&dir.join(&name), p)?;
    if let Some(m) = manifest {
        m.artifact(name.clone());
    }
    Ok(name)
}

fn save_table(dir: &Path, name: String, t: &Table, manifest: &mut RunManifest) -> Result<()> {
    t.write(&dir.join(&name))?;
    manifest.artifact(name);
    Ok(())
}

fn spectrum_verdict(v: &SpectrumVerdict) -> Verdict {
    match v {
        SpectrumVerdict::Nondegenerate => Verdict::Pass,
        SpectrumVerdict::Degenerate(_) => Verdict::Fail,
        SpectrumVerdict::Inconclusive(_) => Verdict::Inconclusive,
    }
}

fn pass(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn finish(manifest: RunManifest, dir: &Path) -> Result<u8> {
    let failed = manifest.any_failed() || manifest.verdicts.values().any(|v| *v == Verdict::Fail);
    manifest.write(dir)?;
    Ok(if failed { EXIT_NUMERIC } else { EXIT_OK })
}

/// Resolve a profile path given on the command line, falling back to the
/// output directory for bare file names.
fn resolve(cfg: &RunConfig, path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        path.to_path_buf()
    } else {
        cfg.out_dir.join(path)
    }
}

fn load_initial(cfg: &RunConfig, path: &Path) -> Result<Vec<f64>> {
    let p = read_profile(&resolve(cfg, path))?;
    if p.meta.m != cfg.m {
        return Err(Error::GridMismatch {
            expected: cfg.m,
            got: p.meta.m,
        });
    }
    Ok(p.u)
}

#[derive(Serialize)]
struct SolveRecord {
    s: f64,
    m: usize,
    r_max: f64,
    nu_p: f64,
    nu_q: f64,
    residual: f64,
    iterations: usize,
    tail_u: Option<f64>,
    tail_v: Option<f64>,
    pairing_defect_u: Option<f64>,
    pairing_defect_v: Option<f64>,
    profile: String,
}

pub fn solve(cfg: &RunConfig, s: f64, init: Option<&Path>) -> Result<u8> {
    cfg.validate()?;
    let ctx = context(cfg)?;
    let mut sc = solve_config(cfg);
    if let Some(path) = init {
        sc = sc.warm(&load_initial(cfg, path)?);
    }
    let gs = solve_fixed_point(&ctx, &sc, s)?;
    let q = to_qstar(&ctx, &gs)?;
    let tails = tail_exponent(ctx.grid(), &gs).ok();
    let dir = prepare_out(cfg)?;
    let name = save_profile(&dir, &ProfileFile::from_ground_state(ctx.grid(), &gs)?, None)?;
    let rec = SolveRecord {
        s,
        m: cfg.m,
        r_max: cfg.r_max,
        nu_p: gs.nu_p,
        nu_q: q.nu_q,
        residual: gs.diagnostics.residual,
        iterations: gs.diagnostics.iterations,
        tail_u: tails.map(|t| t.0),
        tail_v: tails.map(|t| t.1),
        pairing_defect_u: q.diagnostics.pairing_defect.map(|d| d.0),
        pairing_defect_v: q.diagnostics.pairing_defect.map(|d| d.1),
        profile: name.clone(),
    };
    let meta = name.replace(".csv", ".json");
    fs::write(
        dir.join(&meta),
        serde_json::to_string_pretty(&rec).expect("record serializes") + "\n",
    )?;
    println!(
        "s={s} nu_P={} nu_Q={} residual={:.3e} iterations={}",
        format_float(gs.nu_p),
        format_float(q.nu_q),
        gs.diagnostics.residual,
        gs.diagnostics.iterations
    );
    println!("wrote {} and {}", dir.join(&name).display(), dir.join(&meta).display());
    Ok(EXIT_OK)
}

/// `steps` equally spaced values from `from` to `to`, inclusive.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    if to >= from {
        return Err(Error::Config(format!("s-to ({to}) must be below s-from ({from})")));
    }
    let d = (from - to) / (steps - 1) as f64;
    // Round to 12 digits so that 1.0 - 5·0.02 prints as 0.9.
    Ok((0..steps)
        .map(|i| ((from - i as f64 * d) * 1e12).round() / 1e12)
        .collect())
}

fn report_for(ctx: &SpectralContext, cfg: &RunConfig, gs: &GroundState) -> Result<SpectrumReport> {
    let q = to_qstar(ctx, gs)?;
    nondegeneracy_report(ctx, &q, cfg.k_max, cfg.n_eigs)
}

fn spectrum_name(s: f64, m: usize) -> String {
    format!("spectrum_N3_s{s:.4}_M{m}.csv")
}

pub fn sweep(cfg: &RunConfig, from: f64, to: f64, steps: usize) -> Result<u8> {
    let values = sweep_values(from, to, steps)?;
    let cfg = RunConfig {
        s_values: values.clone(),
        ..cfg.clone()
    };
    cfg.validate()?;
    if cfg.continuation && from != 1.0 {
        return Err(Error::Config(
            "continuation needs s-from = 1.0 (disable it with --no-continuation)".into(),
        ));
    }
    let ctx = context(&cfg)?;
    let grid = ctx.grid();
    let dir = prepare_out(&cfg)?;
    let mut manifest = RunManifest::new("sweep", &cfg);
    let mut records = Vec::new();
    let mut verdicts = Vec::new();
    let mut states: Vec<GroundState> = Vec::new();

    for &s in &values {
        let t = Instant::now();
        let sc = match states.last() {
            Some(prev) => solve_config(&cfg).warm(&prev.u.values),
            None => solve_config(&cfg),
        };
        let solved = solve_fixed_point(&ctx, &sc, s).and_then(|gs| {
            let rec = SweepRecord::new(grid, &gs)?;
            Ok((gs, rec))
        });
        let (gs, rec) = match solved {
            Ok(x) => x,
            Err(e) => {
                manifest.stage(format!("solve s={s:.4}"), Status::Failed, t, e.to_string());
                continue;
            }
        };
        save_profile(&dir, &ProfileFile::from_ground_state(grid, &gs)?, Some(&mut manifest))?;
        manifest.stage(format!("solve s={s:.4}"), Status::Ok, t, format!("nu_P = {}", gs.nu_p));

        let t = Instant::now();
        match report_for(&ctx, &cfg, &gs) {
            Ok(r) => {
                save_table(&dir, spectrum_name(s, cfg.m), &spectrum_table(&r), &mut manifest)?;
                manifest.stage(format!("spectrum s={s:.4}"), Status::Ok, t, r.verdict.to_string());
                manifest.verdict(format!("nondegeneracy s={s:.4}"), spectrum_verdict(&r.verdict));
                verdicts.push(r.verdict.label().to_string());
            }
            Err(e) => {
                manifest.stage(format!("spectrum s={s:.4}"), Status::Failed, t, e.to_string());
                verdicts.push("ERROR".into());
            }
        }
        records.push(rec);
        states.push(gs);
    }

    let mut table = sweep_table(&records);
    table.header.push("verdict".into());
    for (row, v) in table.rows.iter_mut().zip(&verdicts) {
        row.push(v.clone());
    }
    save_table(&dir, format!("sweep_N3_M{}.csv", cfg.m), &table, &mut manifest)?;

    if cfg.continuation {
        let t = Instant::now();
        match states.first().filter(|b| b.s == 1.0) {
            Some(base) => {
                let mut results = Vec::new();
                let mut ok = true;
                for gs in states.iter().skip(1) {
                    match continue_to(&ctx, base, gs) {
                        Ok(r) => results.push(r),
                        Err(e) => {
                            ok = false;
                            manifest.stage(format!("continuation s={:.4}", gs.s), Status::Failed, t, e.to_string());
                        }
                    }
                }
                save_table(&dir, format!("continuation_N3_M{}.csv", cfg.m), &continuation_table(&results), &mut manifest)?;
                manifest.verdict("continuation ball-bound fit", ball_fit(&results, ok));
                manifest.stage("continuation", Status::Ok, t, format!("{} targets", results.len()));
            }
            None => manifest.stage("continuation", Status::Failed, t, "no s = 1 base state"),
        }
    }

    for (r, v) in records.iter().zip(&verdicts) {
        println!("s={:.4} nu_P={} {v}", r.s, format_float(r.nu_p));
    }
    finish(manifest, &dir)
}

fn continue_to(ctx: &SpectralContext, base: &GroundState, direct: &GroundState) -> Result<ContinuationResult> {
    let params = OperatorParams::new(direct.s, direct.nu_p)?;
    newton_iterate(ctx, base, &params, &ContinuationConfig::default(), None, Some(direct))
}

/// One radius `r₀` must serve every target: the spread of
/// `‖ω‖ / max{1-s, |ν₁-ν_s|}` stays within a factor 2.
fn ball_fit(results: &[ContinuationResult], all_converged: bool) -> Verdict {
    let ratios: Vec<f64> = results.iter().filter_map(|r| r.ball_ratio).collect();
    if !all_converged || ratios.is_empty() {
        return Verdict::Fail;
    }
    let hi = ratios.iter().cloned().fold(0.0_f64, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let agree = results.iter().all(|r| r.agreement.is_none_or(|a| a <= 1e-6));
    pass(hi / lo < 2.0 && agree)
}

pub fn spectrum(cfg: &RunConfig, init: Option<&Path>) -> Result<u8> {
    cfg.validate()?;
    let ctx = context(cfg)?;
    let dir = prepare_out(cfg)?;
    let mut manifest = RunManifest::new("spectrum", cfg);
    let mut warm = match init {
        Some(p) => Some(load_initial(cfg, p)?),
        None => None,
    };
    for &s in &cfg.s_values {
        let t = Instant::now();
        let sc = match &warm {
            Some(u) => solve_config(cfg).warm(u),
            None => solve_config(cfg),
        };
        let gs = solve_fixed_point(&ctx, &sc, s)?;
        let r = report_for(&ctx, cfg, &gs)?;
        save_table(&dir, spectrum_name(s, cfg.m), &spectrum_table(&r), &mut manifest)?;
        for sm in r.summaries() {
            println!(
                "s={s:.4} k={} min={} negative={} near_zero={}",
                sm.k,
                format_float(sm.min_eigenvalue),
                sm.negative,
                sm.near_zero
            );
        }
        println!("s={s:.4} Morse index {} {}", r.morse_index, r.verdict);
        manifest.stage(format!("spectrum s={s:.4}"), Status::Ok, t, r.verdict.to_string());
        manifest.verdict(format!("nondegeneracy s={s:.4}"), spectrum_verdict(&r.verdict));
        warm = Some(gs.u.values);
    }
    finish(manifest, &dir)
}

pub fn continuation(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let min = ContinuationConfig::default().s_min;
    if let Some(&s) = cfg.s_values.iter().find(|&&s| s < min || s >= 1.0) {
        return Err(Error::Config(format!("continuation targets must lie in [{min}, 1), got {s}")));
    }
    let ctx = context(cfg)?;
    let dir = prepare_out(cfg)?;
    let mut manifest = RunManifest::new("continuation", cfg);
    let base = solve_fixed_point(&ctx, &solve_config(cfg), 1.0)?;
    let mut results = Vec::new();
    for &s in &cfg.s_values {
        let t = Instant::now();
        let direct = solve_fixed_point(&ctx, &solve_config(cfg).warm(&base.u.values), s)?;
        let r = continue_to(&ctx, &base, &direct)?;
        println!(
            "s={s:.4} iterations={} |omega|={:.3e} ball_ratio={:.4} contraction={:.3} agreement={:.2e}",
            r.iterations,
            r.omega_norm,
            r.ball_ratio.unwrap_or(f64::NAN),
            r.contraction,
            r.agreement.unwrap_or(f64::NAN)
        );
        manifest.stage(format!("continuation s={s:.4}"), Status::Ok, t, format!("{} iterations", r.iterations));
        results.push(r);
    }
    save_table(&dir, format!("continuation_N3_M{}.csv", cfg.m), &continuation_table(&results), &mut manifest)?;
    manifest.verdict("continuation ball-bound fit", ball_fit(&results, true));
    finish(manifest, &dir)
}

fn extension_rows(ctx: &SpectralContext, s_values: &[f64]) -> Result<(Table, f64)> {
    let hp = HalfPlaneGrid::standard(ctx.grid())?;
    let mut t = Table::new(&["s", "width", "dtn_rel_err", "energy_rel_err"]);
    let mut worst = 0.0_f64;
    for &s in s_values {
        for a in GAUSS_WIDTHS {
            let u = RadialProfile::sample(ctx.grid(), 0, |r| (-a * r * r).exp());
            let d = dtn_compare(ctx, &u, s, &hp)?;
            let e = energy_identity(ctx, &u, s, &hp)?;
            worst = worst.max(d.rel_err);
            t.push(vec![format_float(s), format_float(a), format_float(d.rel_err), format_float(e.rel_err)]);
        }
    }
    Ok((t, worst))
}

pub fn extension_check(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    if let Some(&s) = cfg.s_values.iter().find(|&&s| s >= 1.0) {
        return Err(Error::Config(format!("extension check needs s < 1, got {s}")));
    }
    let ctx = context(cfg)?;
    let dir = prepare_out(cfg)?;
    let mut manifest = RunManifest::new("extension-check", cfg);
    let t = Instant::now();
    let (table, worst) = extension_rows(&ctx, &cfg.s_values)?;
    save_table(&dir, format!("extension_N3_M{}.csv", cfg.m), &table, &mut manifest)?;
    let d = (d_s_constant(0.5)? - 1.0).abs();
    println!("worst DtN relative error {worst:.3e}; |d_1/2 - 1| = {d:.1e}");
    manifest.stage("extension", Status::Ok, t, format!("worst DtN rel err {worst:.3e}"));
    manifest.verdict("extension agreement", pass(worst <= DTN_TOL && d <= 1e-12));
    finish(manifest, &dir)
}

fn oracle_check(ctx: &SpectralContext, gs: &GroundState) -> Result<(ProfileFile, bool, String)> {
    let o = solve_classical(&OracleConfig {
        m: ctx.grid().len(),
        r_max: ctx.grid().r_max(),
        ..OracleConfig::default()
    })?;
    let c = oracle_compare(ctx.grid(), gs, &o)?;
    let ok = c.nu_rel_diff <= 1e-4 && c.profile_distance <= 1e-3 * c.u_sup;
    let msg = format!(
        "nu rel diff {:.3e}, profile distance {:.3e} (|U|_inf {:.4}), tail slope diff {:.3e}",
        c.nu_rel_diff, c.profile_distance, c.u_sup, c.tail_diff
    );
    Ok((ProfileFile::from_oracle(&o), ok, msg))
}

pub fn oracle(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    let ctx = context(cfg)?;
    let dir = prepare_out(cfg)?;
    let mut manifest = RunManifest::new("oracle-compare", cfg);
    let t = Instant::now();
    let gs = solve_fixed_point(&ctx, &solve_config(cfg), 1.0)?;
    let (profile, ok, msg) = oracle_check(&ctx, &gs)?;
    save_profile(&dir, &profile, Some(&mut manifest))?;
    println!("{msg}");
    manifest.stage("oracle", Status::Ok, t, msg);
    manifest.verdict("oracle agreement", pass(ok));
    finish(manifest, &dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    Oracle,
    Spectrum,
    Extension,
    Continuation,
    Properties,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Oracle => "oracle",
            Check::Spectrum => "spectrum",
            Check::Extension => "extension",
            Check::Continuation => "continuation",
            Check::Properties => "properties",
        }
    }
}

fn random_profile(rng: &mut ChaCha8Rng, ctx: &SpectralContext) -> RadialProfile {
    let terms: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.random_range(0.1..1.0), rng.random_range(0.0..4.0), rng.random_range(0.8..2.0)))
        .collect();
    RadialProfile::sample(ctx.grid(), 0, |r| {
        terms.iter().map(|(c, m, w)| c * (-(r - m) * (r - m) / (w * w)).exp()).sum()
    })
}

fn property_check(ctx: &SpectralContext, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ctx.grid();
    let mut violations = 0;
    for _ in 0..200 {
        let u = random_profile(&mut rng, ctx);
        let w = random_profile(&mut rng, ctx);
        let lhs = hl_inner(g, &u, &w)?;
        let rhs = (hl_norm4(g, &u)? * hl_norm4(g, &w)?).sqrt();
        if lhs > rhs {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("HL Cauchy-Schwarz violations {violations}/200 (seed {seed})")))
}

pub fn verify(cfg: &RunConfig, skip: &[Check], solve_first: bool) -> Result<u8> {
    cfg.validate()?;
    let ctx = context(cfg)?;
    let grid = ctx.grid();
    let dir = prepare_out(cfg)?;
    let mut manifest = RunManifest::new("verify", cfg);
    let mut values = cfg.s_values.clone();
    if !values.contains(&1.0) {
        values.insert(0, 1.0);
    }

    let mut states = Vec::new();
    for &s in &values {
        let name = profile_filename(GS_PREFIX, s, cfg.m);
        let path = dir.join(&name);
        if !path.exists() {
            if !solve_first {
                return Err(Error::Config(format!(
                    "missing artifact {}; run `solve` first or pass --solve-first",
                    path.display()
                )));
            }
            let gs = solve_fixed_point(&ctx, &solve_config(cfg), s)?;
            save_profile(&dir, &ProfileFile::from_ground_state(grid, &gs)?, Some(&mut manifest))?;
        }
        states.push(read_profile(&path)?.to_ground_state(grid)?);
    }

    let enabled = |c: Check| {
        !skip.contains(&c)
            && match c {
                Check::Oracle => cfg.oracle,
                Check::Extension => cfg.extension,
                Check::Continuation => cfg.continuation,
                _ => true,
            }
    };
    let mut report = Table::new(&["check", "status", "detail"]);
    let row = |report: &mut Table, m: &mut RunManifest, c: &str, v: Option<Verdict>, detail: String| {
        let status = match v {
            None => "SKIPPED",
            Some(Verdict::Pass) => "PASS",
            Some(Verdict::Fail) => "FAIL",
            Some(Verdict::Inconclusive) => "INCONCLUSIVE",
        };
        println!("{status:<12} {c}: {detail}");
        report.push(vec![c.to_string(), status.to_string(), detail.replace(',', ";")]);
        if let Some(v) = v {
            m.verdict(c, v);
        }
    };

    let base = &states[0];
    for check in [Check::Oracle, Check::Spectrum, Check::Extension, Check::Continuation, Check::Properties] {
        let name = check.name();
        if !enabled(check) {
            row(&mut report, &mut manifest, name, None, "skipped".into());
            manifest.stage(name, Status::Skipped, Instant::now(), "");
            continue;
        }
        let t = Instant::now();
        match check {
            Check::Oracle => {
                let (_, ok, msg) = oracle_check(&ctx, base)?;
                row(&mut report, &mut manifest, name, Some(pass(ok)), msg);
            }
            Check::Spectrum => {
                for gs in &states {
                    let r = report_for(&ctx, cfg, gs)?;
                    let label = format!("{name} s={:.4}", gs.s);
                    row(&mut report, &mut manifest, &label, Some(spectrum_verdict(&r.verdict)), r.verdict.to_string());
                }
            }
            Check::Extension => {
                let (_, worst) = extension_rows(&ctx, &[0.5, 0.75, 0.9])?;
                let d = (d_s_constant(0.5)? - 1.0).abs();
                row(
                    &mut report,
                    &mut manifest,
                    name,
                    Some(pass(worst <= DTN_TOL && d <= 1e-12)),
                    format!("worst DtN rel err {worst:.3e}, |d_1/2 - 1| {d:.1e}"),
                );
            }
            Check::Continuation => {
                let targets: Vec<&GroundState> = states
                    .iter()
                    .filter(|g| g.s < 1.0 && g.s >= ContinuationConfig::default().s_min)
                    .collect();
                if targets.is_empty() {
                    row(&mut report, &mut manifest, name, None, "no targets in [0.85, 1)".into());
                } else {
                    let mut results = Vec::new();
                    let mut ok = true;
                    for gs in targets {
                        match continue_to(&ctx, base, gs) {
                            Ok(r) => results.push(r),
                            Err(_) => ok = false,
                        }
                    }
                    let v = ball_fit(&results, ok);
                    row(&mut report, &mut manifest, name, Some(v), format!("{} targets converged", results.len()));
                }
            }
            Check::Properties => {
                let (ok, msg) = property_check(&ctx, cfg.seed)?;
                row(&mut report, &mut manifest, name, Some(pass(ok)), msg);
            }
        }
        manifest.stage(name, Status::Ok, t, "");
    }
    save_table(&dir, format!("verify_N3_M{}.csv", cfg.m), &report, &mut manifest)?;
    finish(manifest, &dir)
}

pub fn report(cfg: &RunConfig) -> Result<u8> {
    let dir = &cfg.out_dir;
    if !dir.is_dir() {
        return Err(Error::Config(format!("output directory {} does not exist", dir.display())));
    }
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") && (n.starts_with("gs_") || n.starts_with("oracle_")))
        .collect();
    names.sort();
    println!("{:<34} {:>7} {:>6} {:>20} {:>20} {:>10}", "profile", "s", "M", "nu_P", "nu_Q", "residual");
    for n in &names {
        let p = read_profile(&dir.join(n))?;
        println!(
            "{n:<34} {:>7.4} {:>6} {:>20.15} {:>20.15} {:>10.2e}",
            p.meta.s, p.meta.m, p.meta.nu_p, p.meta.nu_q, p.meta.residual
        );
    }
    if dir.join(MANIFEST).exists() {
        let m = RunManifest::read(dir)?;
        println!("last run: {} ({} stages)", m.command, m.stages.len());
        for (k, v) in &m.verdicts {
            println!("  {k}: {}", serde_json::to_string(v).unwrap_or_default().trim_matches('"'));
        }
        for a in &m.artifacts {
            if !dir.join(a).exists() {
                return Err(Error::Config(format!("manifest lists missing artifact {a}")));
            }
        }
    }
    Ok(EXIT_OK)
}
