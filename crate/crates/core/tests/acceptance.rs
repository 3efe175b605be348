//! Acceptance suite at desk scale (N = 3, M = 1024, R_max = 40). Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use choquard_core::continuation::*;
use choquard_core::extension::*;
use choquard_core::ground_state::*;
use choquard_core::oracle::*;
use choquard_core::potential::*;
use choquard_core::radial::{make_grid, RadialProfile};
use choquard_core::spectrum::*;
use common::*;
use rand::Rng;

const SWEEP: [f64; 6] = [1.0, 0.98, 0.96, 0.94, 0.92, 0.90];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Shared {
    ctx: SpectralContext,
    sweep: Option<Sweep>,
}

impl Shared {
    fn sweep(&mut self) -> &Sweep {
        if self.sweep.is_none() {
            self.sweep = Some(sweep_s(&self.ctx, &SolveConfig::default(), &SWEEP).expect("sweep"));
        }
        self.sweep.as_ref().unwrap()
    }
}

fn l2(ctx: &SpectralContext, f: &[f64]) -> f64 {
    (FOUR_PI * ctx.grid().inner(f, f)).sqrt()
}

fn potential_closed_forms(sh: &mut Shared) -> Outcome {
    let g = sh.ctx.grid();
    let v = newton_potential(g, &ball_indicator(g)).unwrap();
    let err = max_abs_diff(&v.values, &g.sample(ball_potential));
    let hl = hl_norm4(g, &ball_indicator_root(g)).unwrap();
    let hl_rel = (hl / (8.0 * std::f64::consts::PI / 15.0) - 1.0).abs();
    outcome(
        err <= 2e-3 && hl_rel <= 1e-3,
        format!("ball potential sup err {err:.2e}, HL rel err {hl_rel:.2e}"),
    )
}

fn operator_identities(sh: &mut Shared) -> Outcome {
    let c = &sh.ctx;
    let g = c.grid();
    let (a, b, ab) = (
        OperatorParams::linear(0.4).unwrap(),
        OperatorParams::linear(0.5).unwrap(),
        OperatorParams::linear(0.9).unwrap(),
    );
    let mut semi = 0.0_f64;
    let mut round = 0.0_f64;
    for width in [0.5, 1.0, 2.0] {
        let f = gaussian(g, 0, width);
        let two = frac_laplacian(c, &a, 0, &frac_laplacian(c, &b, 0, &f).unwrap()).unwrap();
        let one = frac_laplacian(c, &ab, 0, &f).unwrap();
        semi = semi.max(max_abs_diff(&two.values, &one.values) / one.sup_norm());
        for s in [0.3, 0.6, 1.0] {
            let p = OperatorParams::linear(s).unwrap();
            let back = resolvent_apply(c, &p, 0, &shifted_frac_laplacian(c, &p, 0, &f).unwrap()).unwrap();
            round = round.max(max_abs_diff(&back.values, &f.values) / f.sup_norm());
        }
    }
    let lf = frac_laplacian(c, &OperatorParams::linear(1.0).unwrap(), 0, &gaussian(g, 0, 0.5)).unwrap();
    let lap = g
        .nodes()
        .iter()
        .zip(&lf.values)
        .fold(0.0_f64, |m, (r, v)| m.max((v - (3.0 - r * r) * (-0.5 * r * r).exp()).abs()));
    outcome(
        semi <= 1e-8 && round <= 1e-10 && lap <= 1e-4,
        format!("semigroup {semi:.2e}, resolvent round trip {round:.2e}, s=1 Laplacian {lap:.2e}"),
    )
}

fn ground_state_at_s1(sh: &mut Shared) -> Outcome {
    let c = &sh.ctx;
    let gs = solve_fixed_point(c, &SolveConfig::default(), 1.0).unwrap();
    let q = to_qstar(c, &gs).unwrap();
    let o = solve_classical(&OracleConfig::default()).unwrap();
    let cmp = oracle_compare(c.grid(), &gs, &o).unwrap();
    let nu_q = (q.nu_q - o.nu_q).abs() / q.nu_q;
    let hs = hs_norm_sq(c, &OperatorParams::linear(1.0).unwrap(), &gs.u).unwrap();
    let pair_p = (hs / (2.0 * gs.nu_p * gs.nu_p) - 1.0).abs();
    let (du, dv) = q.diagnostics.pairing_defect.unwrap();
    let pair_q = du.max(dv);
    let cross = (gs.nu_p * gs.nu_p / q.nu_q.powf(1.5) - 1.0).abs();
    outcome(
        cmp.nu_rel_diff <= 1e-4
            && nu_q <= 1e-4
            && cmp.profile_distance <= 1e-3 * cmp.u_sup
            && pair_p <= 1e-4
            && pair_q <= 1e-4
            && cross <= 1e-4,
        format!(
            "nu_P {:.2e}, nu_Q {nu_q:.2e}, profile {:.2e}·|U|, pairing P {pair_p:.1e} Q {pair_q:.1e}, cross law {cross:.1e}",
            cmp.nu_rel_diff,
            cmp.profile_distance / cmp.u_sup
        ),
    )
}

fn sweep_continuity(sh: &mut Shared) -> Outcome {
    let recs = &sh.sweep().records;
    let q: Vec<f64> = recs
        .windows(2)
        .map(|w| ((w[1].nu_p - w[0].nu_p) / (w[1].s - w[0].s)).abs())
        .collect();
    let (lo, hi) = q.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    let dist: Vec<f64> = recs.iter().map(|r| (r.nu_p - recs[0].nu_p).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] > w[0]);
    let sup = recs.iter().map(|r| r.u_sup).fold(0.0_f64, f64::max);
    let bounded = sup <= 10.0 * recs[0].u_sup;
    outcome(
        hi / lo < 3.0 && monotone && bounded,
        format!(
            "|Δν/Δs| in [{lo:.4}, {hi:.4}] (ratio {:.2}), monotone {monotone}, sup |U| {sup:.4} vs {:.4}",
            hi / lo,
            recs[0].u_sup
        ),
    )
}

fn nondegeneracy(sh: &mut Shared) -> Outcome {
    let states: Vec<GroundState> = sh.sweep().states.clone();
    let mut bad = Vec::new();
    let mut slow = Duration::ZERO;
    for gs in &states {
        let t = Instant::now();
        let q = to_qstar(&sh.ctx, gs).unwrap();
        let r = nondegeneracy_report(&sh.ctx, &q, 4, 4).unwrap();
        let el = t.elapsed();
        slow = slow.max(el);
        let kap = 1e-4;
        let k0 = &r.sectors[0].eigenvalues;
        let k1 = &r.sectors[1].eigenvalues;
        let ok0 = k0.iter().filter(|&&m| m < -kap).count() == 1 && !k0.iter().any(|m| m.abs() <= kap);
        let ok1 = k1.iter().filter(|&&m| m.abs() <= kap).count() == 1 && r.kernel.similarity >= 0.99;
        let okh = r.sectors[2..].iter().all(|s| s.eigenvalues.iter().all(|&m| m > kap));
        let ok = ok0 && ok1 && okh && r.minima_increasing && r.morse_index == 1 && r.verdict == Verdict::Nondegenerate;
        if !ok {
            bad.push(format!("s={}: {}", gs.s, r.verdict));
        }
    }
    outcome(
        bad.is_empty() && slow < Duration::from_secs(120),
        if bad.is_empty() {
            format!("NONDEGENERATE, Morse index 1 at all {} s values (slowest {:.1} s)", states.len(), slow.as_secs_f64())
        } else {
            bad.join("; ")
        },
    )
}

fn translation_kernel(sh: &mut Shared) -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64, 1.0_f64);
    let mut lines = Vec::new();
    for s in [1.0, 0.95, 0.9] {
        let gs = solve_fixed_point(&sh.ctx, &SolveConfig::default(), s).unwrap();
        let q = to_qstar(&sh.ctx, &gs).unwrap();
        let k = translation_kernel_check(&sh.ctx, &q).unwrap();
        worst = (worst.0.max(k.residual), worst.1.max(k.zeta_defect), worst.2.min(k.similarity));
        lines.push(format!("s={s}: {:.1e}", k.residual));
    }
    outcome(
        worst.0 <= 5e-4 && worst.1 <= 1e-2,
        format!(
            "residuals {}, worst ζ defect {:.1e}, min similarity {:.6}",
            lines.join(", "),
            worst.1,
            worst.2
        ),
    )
}

fn decay_exponents(sh: &mut Shared) -> Outcome {
    let mut bad = Vec::new();
    for r in &sh.sweep().records {
        let target = -(3.0 + 2.0 * r.s);
        if (r.tail_u - target).abs() > 0.3 || (r.tail_v + 1.0).abs() > 0.1 {
            bad.push(format!("s={}: U {:.2} (want {target:.2}), V {:.3}", r.s, r.tail_u, r.tail_v));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "all U slopes within 0.3 of -(3+2s), V within 0.1 of -1".into()
        } else {
            bad.join("; ")
        },
    )
}

fn extension_realization(sh: &mut Shared) -> Outcome {
    let hp = HalfPlaneGrid::standard(sh.ctx.grid()).unwrap();
    let mut worst = 0.0_f64;
    for s in [0.5, 0.75, 0.9] {
        for a in [0.25, 0.5, 1.0] {
            let u = gaussian(sh.ctx.grid(), 0, a);
            worst = worst.max(dtn_compare(&sh.ctx, &u, s, &hp).unwrap().rel_err);
        }
    }
    let d = (d_s_constant(0.5).unwrap() - 1.0).abs();
    outcome(
        worst <= 0.02 && d <= 1e-12,
        format!("worst DtN rel err {worst:.2e}, |d_1/2 - 1| {d:.1e}"),
    )
}

fn continuation(sh: &mut Shared) -> Outcome {
    let c = &sh.ctx;
    let targets = [0.99, 0.98, 0.95, 0.9];
    let cfg = ContinuationConfig::default();
    let base = solve_fixed_point(c, &SolveConfig::default(), 1.0).unwrap();
    let mut ratios = Vec::new();
    let mut agree = 0.0_f64;
    let mut spread = 0.0_f64;
    let mut rng = rng(0);
    for &s in &targets {
        let direct = solve_fixed_point(c, &SolveConfig::default().warm(&base.u.values), s).unwrap();
        let p = OperatorParams::new(s, direct.nu_p).unwrap();
        let h = assemble_hessian(c, &base.u, &p, cfg.kappa_prime).unwrap();
        let r = newton_iterate_with(c, &base, &h, &p, &cfg, None, Some(&direct)).unwrap();
        let mut u: Vec<f64> = base.u.values.iter().zip(&r.omega.values).map(|(a, b)| a + b).collect();
        let n4 = hl_norm4(c.grid(), &RadialProfile::new(u.clone(), 0)).unwrap();
        u.iter_mut().for_each(|x| *x /= n4.powf(0.25));
        agree = agree.max(max_abs_diff(&u, &direct.u.values));
        let ratio = r.ball_ratio.unwrap();
        ratios.push(ratio);
        let scale = (1.0 - s).max((base.nu_p - direct.nu_p).abs());
        let hs = |f: &[f64]| hs_norm_sq(c, &p, &RadialProfile::new(f.to_vec(), 0)).unwrap().sqrt();
        for _ in 0..5 {
            let dir = random_smooth_profile(&mut rng, c.grid(), 0);
            let frac: f64 = rng.random_range(0.1..1.0);
            let start = dir.scaled(frac * ratio * scale / hs(&dir.values));
            let other = newton_iterate_with(c, &base, &h, &p, &cfg, Some(&start.values), None).unwrap();
            spread = spread.max(max_abs_diff(&other.omega.values, &r.omega.values));
        }
    }
    let r0 = ratios.iter().cloned().fold(0.0_f64, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        agree <= 1e-6 && spread <= 1e-8 && r0.is_finite() && r0 / lo < 2.0,
        format!("direct-solve agreement {agree:.1e}, r0 = {r0:.3} (ratios {lo:.3}..{r0:.3}), perturbed-start spread {spread:.1e}"),
    )
}

fn inequality_battery(sh: &mut Shared) -> Outcome {
    let c = &sh.ctx;
    let g = c.grid();
    let mut rng = rng(0);
    let mut cs_fail = 0;
    for _ in 0..200 {
        let u = random_profile(&mut rng, g, 0, true);
        let w = random_profile(&mut rng, g, 0, true);
        let lhs = hl_inner(g, &u, &w).unwrap();
        let rhs = (hl_norm4(g, &u).unwrap() * hl_norm4(g, &w).unwrap()).sqrt();
        if lhs > rhs {
            cs_fail += 1;
        }
    }
    let delta = 0.25;
    let t = c.transform(0).unwrap();
    let f = gaussian(g, 0, 0.5);
    let mut sym_fail = 0;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let sigma: f64 = rng.random_range(0.3..0.95);
        let s: f64 = (sigma + rng.random_range(-0.05..0.05)).clamp(0.26, 1.0);
        let a = frac_laplacian(c, &OperatorParams::linear(s).unwrap(), 0, &f).unwrap();
        let b = frac_laplacian(c, &OperatorParams::linear(sigma).unwrap(), 0, &f).unwrap();
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        let weight: Vec<f64> = g
            .frequencies()
            .iter()
            .map(|p| (1.0 + p.powf(2.0 * (sigma + delta))).powi(2))
            .collect();
        let constant = (1.0 / std::f64::consts::E) * (1.0 / (2.0 * sigma) + 1.0 / delta);
        let rhs = 4.0 * constant * (s - sigma).abs() * (FOUR_PI * t.frequency_form(g, &f.values, &weight)).sqrt();
        let lhs = l2(c, &diff);
        if lhs > rhs {
            sym_fail += 1;
        }
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    outcome(
        cs_fail == 0 && sym_fail == 0,
        format!("Cauchy-Schwarz violations {cs_fail}/200, symbol bound violations {sym_fail}/20 (max ratio {worst:.3})"),
    )
}

type Criterion = (&'static str, Option<Duration>, fn(&mut Shared) -> Outcome);

fn main() {
    let mut sh = Shared {
        ctx: SpectralContext::new(make_grid(1024, 40.0).unwrap()),
        sweep: None,
    };
    let criteria: [Criterion; 10] = [
        ("potential closed forms", Some(Duration::from_secs(1)), potential_closed_forms),
        ("operator identities", Some(Duration::from_secs(5)), operator_identities),
        ("ground state at s=1 vs oracle", Some(Duration::from_secs(30)), ground_state_at_s1),
        ("sweep continuity", Some(Duration::from_secs(180)), sweep_continuity),
        ("nondegeneracy over the sweep", None, nondegeneracy),
        ("translation kernel", None, translation_kernel),
        ("decay exponents", None, decay_exponents),
        ("extension realization", Some(Duration::from_secs(60)), extension_realization),
        ("continuation from s=1", Some(Duration::from_secs(120)), continuation),
        ("inequality battery", Some(Duration::from_secs(30)), inequality_battery),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut sh)))
            .unwrap_or_else(|_| outcome(false, "panicked".into()));
        let el = t.elapsed();
        let in_time = budget.is_none_or(|b| el <= b);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let late = if in_time { String::new() } else { format!(" over budget {:?}", budget.unwrap()) };
        println!(
            "{} {:>2} {name} ({:.2} s{late}): {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            el.as_secs_f64(),
            out.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
