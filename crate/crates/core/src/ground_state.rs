//! Ground states by the normalized Choquard iteration
//! `u ← R_s[(I₂ ⋆ u²) u]`, renormalized to `‖u‖_HL = 1`, and conversions
//! between the three normalizations.

use crate::potential::{
    check_s, h1dot_norm_sq, hl_norm4, hs_norm_sq, newton_potential, resolvent_apply,
    shifted_frac_laplacian, OperatorParams, SpectralContext, FOUR_PI,
};
use crate::radial::{sup_norm, RadialGrid, RadialProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `‖U‖_HL = 1`, `(-Δ)^s U + U = 2ν_P² (I₂⋆U²) U`, `V = ν_P I₂⋆U²`.
    Pstar,
    /// `4π∫U²V = 1`, `(-Δ)^s U + U = 2ν_Q V U`, `-ΔV = ν_Q U²`.
    Qstar,
    /// Coefficient-free `(-Δ)^s w + w = 2 (I₂⋆w²) w`, `V = I₂⋆w²`.
    P,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::Pstar => "PSTAR",
            Normalization::Qstar => "QSTAR",
            Normalization::P => "P",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PSTAR" => Some(Self::Pstar),
            "QSTAR" => Some(Self::Qstar),
            "P" => Some(Self::P),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `exp(-r² / (2 width²))`.
    Gaussian { width: f64 },
    Profile(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub init: InitialGuess,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
            damping: 1.0,
            init: InitialGuess::Gaussian { width: 1.0 },
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if let InitialGuess::Gaussian { width } = self.init {
            if !(width > 0.0) {
                return Err(Error::Config(format!("Gaussian width must be positive, got {width}")));
            }
        }
        Ok(())
    }

    pub fn warm(&self, profile: &[f64]) -> Self {
        Self {
            init: InitialGuess::Profile(profile.to_vec()),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Relative strong residual `‖(-Δ)^s U + U - rhs‖ / ‖U‖`.
    pub residual: f64,
    /// Sup-norm of the last successive-iterate change.
    pub change: f64,
    pub damping: f64,
    /// Relative defects of `‖U‖²_{H^s} = 2ν_Q` and `‖V‖²_{Ḣ¹} = ν_Q` (QSTAR only).
    pub pairing_defect: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub s: f64,
    pub u: RadialProfile,
    pub v: RadialProfile,
    pub nu_p: f64,
    pub nu_q: f64,
    pub mode: Normalization,
    pub diagnostics: Diagnostics,
}

/// Relative roundoff floor for sign and monotonicity checks.
pub const SIGN_FLOOR: f64 = 1e-12;

const STALL_WINDOW: usize = 25;

fn initial_profile(grid: &RadialGrid, init: &InitialGuess) -> Result<Vec<f64>> {
    match init {
        InitialGuess::Gaussian { width } => {
            let a = 0.5 / (width * width);
            Ok(grid.sample(|r| (-a * r * r).exp()))
        }
        InitialGuess::Profile(p) => {
            grid.check(p)?;
            if p.iter().any(|x| !x.is_finite()) || sup_norm(p) == 0.0 {
                return Err(Error::Config("initial profile must be finite and nonzero".into()));
            }
            Ok(p.clone())
        }
    }
}

fn normalize_hl(grid: &RadialGrid, u: &mut [f64]) -> Result<()> {
    let n4 = hl_norm4(grid, &RadialProfile::new(u.to_vec(), 0))?;
    if !(n4 > 0.0 && n4.is_finite()) {
        return Err(Error::SolverFailure {
            message: "iterate has vanishing Coulomb norm".into(),
            residual: f64::NAN,
        });
    }
    let c = n4.powf(-0.25);
    u.iter_mut().for_each(|x| *x *= c);
    Ok(())
}

fn hartree(grid: &RadialGrid, u: &[f64]) -> Result<Vec<f64>> {
    let sq = RadialProfile::new(u.iter().map(|x| x * x).collect(), 0);
    let v = newton_potential(grid, &sq)?;
    Ok(v.values.iter().zip(u).map(|(a, b)| a * b).collect())
}

/// Normalized fixed-point iteration for `(-Δ)^s u + u = μ (I₂⋆u²) u`,
/// `‖u‖_HL = 1`. Returns the PSTAR ground state with `ν_P = (μ/2)^{1/2}`.
pub fn solve_fixed_point(ctx: &SpectralContext, config: &SolveConfig, s: f64) -> Result<GroundState> {
    check_s(s)?;
    config.validate()?;
    let grid = ctx.grid();
    let params = OperatorParams::linear(s)?;
    let mut u = initial_profile(grid, &config.init)?;
    normalize_hl(grid, &mut u)?;

    let mut theta = config.damping;
    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut prev_res: Option<f64> = None;
    let mut prev_diff: Option<f64> = None;
    let mut flips = 0;
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;

    for it in 0..=config.max_iter {
        let nl = hartree(grid, &u)?;
        let ku = shifted_frac_laplacian(ctx, &params, 0, &RadialProfile::new(u.clone(), 0))?;
        let hl = grid.inner(&u, &nl);
        let mu = grid.inner(&u, &ku.values) / hl;
        let r: Vec<f64> = ku.values.iter().zip(&nl).map(|(a, b)| a - mu * b).collect();
        residual = grid.norm(&r) / grid.norm(&u);
        if !residual.is_finite() {
            return Err(Error::SolverFailure {
                message: format!("non-finite residual at s = {s}"),
                residual,
            });
        }
        if residual < 0.5 * best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        // On fine grids the strong residual bottoms out at a roundoff floor
        // that grows like ρ_max^{2s}; a stalled residual with a converged
        // iterate is accepted and reported as is.
        let stalled = since_best >= STALL_WINDOW;
        if change <= config.tol && (residual <= config.tol || stalled) {
            let nu_p = (0.5 * mu).sqrt();
            let uprof = RadialProfile::new(u, 0);
            let sq = RadialProfile::new(uprof.values.iter().map(|x| x * x).collect(), 0);
            let v = newton_potential(grid, &sq)?.scaled(nu_p);
            return Ok(GroundState {
                s,
                u: uprof,
                v,
                nu_p,
                nu_q: nu_p.powf(4.0 / 3.0),
                mode: Normalization::Pstar,
                diagnostics: Diagnostics {
                    iterations: it,
                    residual,
                    change,
                    damping: theta,
                    pairing_defect: None,
                },
            });
        }
        if it == config.max_iter {
            break;
        }

        // Oscillation guard: three successive sign flips of Δresidual halve θ.
        if let Some(p) = prev_res {
            let d = residual - p;
            if let Some(pd) = prev_diff {
                if d * pd < 0.0 {
                    flips += 1;
                } else {
                    flips = 0;
                }
                if flips >= 3 {
                    theta *= 0.5;
                    flips = 0;
                }
            }
            prev_diff = Some(d);
        }
        prev_res = Some(residual);

        let mut next = resolvent_apply(ctx, &params, 0, &RadialProfile::new(nl, 0))?.values;
        normalize_hl(grid, &mut next)?;
        if theta < 1.0 {
            next.iter_mut()
                .zip(&u)
                .for_each(|(n, o)| *n = theta * *n + (1.0 - theta) * o);
            normalize_hl(grid, &mut next)?;
        }
        let top = sup_norm(&next);
        if next.iter().any(|&x| x < -SIGN_FLOOR * top) {
            return Err(Error::SolverFailure {
                message: format!("negative values in iterate {it} at s = {s} (grid too coarse)"),
                residual,
            });
        }
        change = next
            .iter()
            .zip(&u)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
    }
    Err(Error::SolverFailure {
        message: format!("no convergence in {} iterations at s = {s}", config.max_iter),
        residual,
    })
}

fn require_mode(gs: &GroundState, mode: Normalization) -> Result<()> {
    if gs.mode != mode {
        return Err(Error::Normalization(format!(
            "expected {} ground state, got {}",
            mode.as_str(),
            gs.mode.as_str()
        )));
    }
    Ok(())
}

/// PSTAR → QSTAR through the scaling family `(αu, αv, ν/α)`.
pub fn to_qstar(ctx: &SpectralContext, gs: &GroundState) -> Result<GroundState> {
    require_mode(gs, Normalization::Pstar)?;
    let grid = ctx.grid();
    let params = OperatorParams::linear(gs.s)?;
    let sq: Vec<f64> = gs.u.values.iter().map(|x| x * x).collect();
    let v0 = newton_potential(grid, &RadialProfile::new(sq.clone(), 0))?.scaled(gs.nu_p);
    let c = FOUR_PI * grid.inner(&sq, &v0.values);
    let alpha = c.powf(-1.0 / 3.0);
    let nu = gs.nu_p / alpha;
    let u = gs.u.scaled(alpha);
    let v = v0.scaled(alpha);
    let source = RadialProfile::new(u.values.iter().map(|x| nu * x * x).collect(), 0);
    let hs = hs_norm_sq(ctx, &params, &u)?;
    let h1 = h1dot_norm_sq(grid, &v, &source)?;
    let nu_q = (hs + h1) / 3.0;
    let du = (hs / (2.0 * nu_q) - 1.0).abs();
    let dv = (h1 / nu_q - 1.0).abs();
    if du > 1e-3 || dv > 1e-3 {
        return Err(Error::Normalization(format!(
            "pairing identities off by {du:.2e} / {dv:.2e} at s = {}",
            gs.s
        )));
    }
    Ok(GroundState {
        s: gs.s,
        u,
        v,
        nu_p: gs.nu_p,
        nu_q,
        mode: Normalization::Qstar,
        diagnostics: Diagnostics {
            pairing_defect: Some((du, dv)),
            ..gs.diagnostics.clone()
        },
    })
}

/// PSTAR → coefficient-free form `w = ν_P U`. The residual of the unscaled
/// equation is stored in the diagnostics.
pub fn to_unscaled(ctx: &SpectralContext, gs: &GroundState) -> Result<GroundState> {
    require_mode(gs, Normalization::Pstar)?;
    let grid = ctx.grid();
    let params = OperatorParams::linear(gs.s)?;
    let w = gs.u.scaled(gs.nu_p);
    let sq = RadialProfile::new(w.values.iter().map(|x| x * x).collect(), 0);
    let v = newton_potential(grid, &sq)?;
    let kw = shifted_frac_laplacian(ctx, &params, 0, &w)?;
    let r: Vec<f64> = kw
        .values
        .iter()
        .zip(&v.values)
        .zip(&w.values)
        .map(|((k, v), w)| k - 2.0 * v * w)
        .collect();
    let residual = grid.norm(&r) / grid.norm(&w.values);
    Ok(GroundState {
        s: gs.s,
        u: w,
        v,
        nu_p: gs.nu_p,
        nu_q: gs.nu_q,
        mode: Normalization::P,
        diagnostics: Diagnostics {
            residual,
            ..gs.diagnostics.clone()
        },
    })
}

/// Inverse of [`to_qstar`]: `U_P = U_Q / α` with `α = ν_P^{-1/3}`.
pub fn qstar_to_pstar(ctx: &SpectralContext, gs: &GroundState) -> Result<GroundState> {
    require_mode(gs, Normalization::Qstar)?;
    let mut u = gs.u.values.clone();
    normalize_hl(ctx.grid(), &mut u)?;
    let sq = RadialProfile::new(u.iter().map(|x| x * x).collect(), 0);
    let v = newton_potential(ctx.grid(), &sq)?.scaled(gs.nu_p);
    Ok(GroundState {
        s: gs.s,
        u: RadialProfile::new(u, 0),
        v,
        nu_p: gs.nu_p,
        nu_q: gs.nu_p.powf(4.0 / 3.0),
        mode: Normalization::Pstar,
        diagnostics: Diagnostics {
            pairing_defect: None,
            ..gs.diagnostics.clone()
        },
    })
}

/// Fit window `[0.5 R_max, 0.8 R_max]`.
pub fn tail_window(grid: &RadialGrid) -> Result<(usize, usize)> {
    let r = grid.nodes();
    let lo = r.partition_point(|&x| x < 0.5 * grid.r_max());
    let hi = r.partition_point(|&x| x <= 0.8 * grid.r_max());
    if hi - lo < 50 {
        return Err(Error::Config(format!(
            "tail window holds {} nodes, need at least 50",
            hi - lo
        )));
    }
    Ok((lo, hi))
}

pub(crate) fn log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numeric("non-positive values in tail fit window".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Least-squares slopes of `log U` and `log V` against `log r` over the
/// tail window.
pub fn tail_exponent(grid: &RadialGrid, gs: &GroundState) -> Result<(f64, f64)> {
    grid.check(&gs.u.values)?;
    let (lo, hi) = tail_window(grid)?;
    let r = &grid.nodes()[lo..hi];
    Ok((
        log_slope(r, &gs.u.values[lo..hi])?,
        log_slope(r, &gs.v.values[lo..hi])?,
    ))
}

/// Positive and non-increasing up to the roundoff floor.
pub fn is_positive_decreasing(f: &[f64]) -> bool {
    let floor = SIGN_FLOOR * sup_norm(f);
    f.iter().all(|&x| x > -floor) && f.windows(2).all(|w| w[1] <= w[0] + floor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorSummary {
    pub k: usize,
    pub min_eigenvalue: f64,
    pub negative: usize,
    pub near_zero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub s: f64,
    pub nu_p: f64,
    pub nu_q: f64,
    pub u_sup: f64,
    pub u_l2: f64,
    pub tail_u: f64,
    pub tail_v: f64,
    pub iterations: usize,
    pub residual: f64,
    pub sectors: Vec<SectorSummary>,
}

impl SweepRecord {
    pub fn new(grid: &RadialGrid, gs: &GroundState) -> Result<Self> {
        let (tail_u, tail_v) = tail_exponent(grid, gs)?;
        Ok(Self {
            s: gs.s,
            nu_p: gs.nu_p,
            nu_q: gs.nu_q,
            u_sup: gs.u.sup_norm(),
            u_l2: (FOUR_PI * grid.inner(&gs.u.values, &gs.u.values)).sqrt(),
            tail_u,
            tail_v,
            iterations: gs.diagnostics.iterations,
            residual: gs.diagnostics.residual,
            sectors: Vec::new(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub states: Vec<GroundState>,
    pub records: Vec<SweepRecord>,
}

pub fn check_sweep_values(s_values: &[f64]) -> Result<()> {
    if s_values.is_empty() {
        return Err(Error::Config("empty s list".into()));
    }
    if s_values[0] != 1.0 {
        return Err(Error::Config(format!("sweep must start at s = 1.0, got {}", s_values[0])));
    }
    for &s in s_values {
        check_s(s)?;
    }
    if s_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("s values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Sequential solves, each warm-started from the previous solution.
pub fn sweep_s(ctx: &SpectralContext, config: &SolveConfig, s_values: &[f64]) -> Result<Sweep> {
    check_sweep_values(s_values)?;
    let grid = ctx.grid();
    let mut states: Vec<GroundState> = Vec::with_capacity(s_values.len());
    let mut records = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let cfg = match states.last() {
            Some(prev) => config.warm(&prev.u.values),
            None => config.clone(),
        };
        let gs = solve_fixed_point(ctx, &cfg, s).map_err(|e| annotate(e, s))?;
        records.push(SweepRecord::new(grid, &gs)?);
        states.push(gs);
    }
    let (nu1, sup1) = (records[0].nu_p, records[0].u_sup);
    for r in &records {
        if !(r.nu_p.is_finite() && r.nu_p <= 10.0 * nu1 && r.u_sup <= 10.0 * sup1) {
            return Err(Error::Numeric(format!(
                "sweep bound violated at s = {}: ν = {}, ‖U‖∞ = {}",
                r.s, r.nu_p, r.u_sup
            )));
        }
    }
    Ok(Sweep { states, records })
}

fn annotate(e: Error, s: f64) -> Error {
    match e {
        Error::SolverFailure { message, residual } => Error::SolverFailure {
            message: format!("{message} [sweep at s = {s}]"),
            residual,
        },
        other => other,
    }
}
