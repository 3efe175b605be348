//! Continuation from the `s = 1` ground state: solve `Φ_s(ω) = 0` with
//! `Φ_s(ω) = R_s J'_s(U₁ + ω, ν_s)` by the fixed-point map
//! `ω ← -Φ'_s(0)⁻¹ (Φ_s(0) + Q_s(ω))`.
//!
//! Since `Φ'_s(0) = R_s H` with `H` the strong Hessian at `U₁`, the map is the
//! chord iteration `ω ← ω - H⁻¹ F(U₁ + ω)` on the strong form `F`.

use nalgebra::{DVector, LU};
use nalgebra::Dyn;

use crate::ground_state::{GroundState, Normalization};
use crate::potential::{
    hl_norm4, hs_norm_sq, newton_potential, resolvent_apply, shifted_frac_laplacian,
    OperatorParams, SpectralContext,
};
use crate::radial::{sup_norm, RadialProfile};
use crate::spectrum::{coupled_potential, lowest_eigenpairs, SectorOperatorMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationConfig {
    pub s_min: f64,
    /// Stop when `‖ω_{m+1} - ω_m‖_{H^s}` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible `|eigenvalue|` of the Hessian.
    pub kappa_prime: f64,
    pub residual_tol: f64,
    pub agreement_tol: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            s_min: 0.85,
            tol: 1e-10,
            max_iter: 200,
            kappa_prime: 1e-3,
            residual_tol: 1e-8,
            agreement_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub s: f64,
    pub omega: RadialProfile,
    pub iterations: usize,
    /// `‖Φ_s(ω^s)‖_{H^s}`.
    pub residual: f64,
    pub omega_norm: f64,
    /// `‖ω^s‖_{H^s} / max{|1 - s|, |ν₁ - ν_s|}`; `None` when the scale vanishes.
    pub ball_ratio: Option<f64>,
    /// Largest ratio of successive step norms.
    pub contraction: f64,
    /// Sup distance of the HL-renormalized `U₁ + ω^s` to the reference solve.
    pub agreement: Option<f64>,
}

fn pstar(gs: &GroundState) -> Result<()> {
    if gs.mode != Normalization::Pstar {
        return Err(Error::Normalization(format!(
            "continuation needs a PSTAR ground state, got {}",
            gs.mode.as_str()
        )));
    }
    Ok(())
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Strong form `((-Δ)^s + 1) u - 2ν² (I₂⋆u²) u`.
pub fn strong_form(ctx: &SpectralContext, params: &OperatorParams, u: &[f64]) -> Result<Vec<f64>> {
    let grid = ctx.grid();
    let ku = shifted_frac_laplacian(ctx, params, 0, &RadialProfile::new(u.to_vec(), 0))?;
    let sq = RadialProfile::new(u.iter().map(|x| x * x).collect(), 0);
    let n = newton_potential(grid, &sq)?;
    let c = 2.0 * params.nu * params.nu;
    Ok((0..u.len())
        .map(|i| ku.values[i] - c * n.values[i] * u[i])
        .collect())
}

/// `Φ_s(ω)`: the `H^s` Riesz representative of `J'_s(U₁ + ω, ν_s)`.
pub fn phi_residual(
    ctx: &SpectralContext,
    u1: &RadialProfile,
    omega: &RadialProfile,
    params: &OperatorParams,
) -> Result<RadialProfile> {
    let grid = ctx.grid();
    grid.check(&u1.values)?;
    grid.check(&omega.values)?;
    let f = strong_form(ctx, params, &add(&u1.values, &omega.values))?;
    resolvent_apply(ctx, params, 0, &RadialProfile::new(f, 0))
}

/// Matrix-free `H ω` with `H = (-Δ)^s + 1 - 2ν²(I₂⋆U₁²) - 4ν² U₁ I₂⋆(U₁ ·)`.
pub fn hessian_apply(
    ctx: &SpectralContext,
    u1: &RadialProfile,
    params: &OperatorParams,
    omega: &[f64],
) -> Result<Vec<f64>> {
    let grid = ctx.grid();
    let kw = shifted_frac_laplacian(ctx, params, 0, &RadialProfile::new(omega.to_vec(), 0))?;
    let sq = RadialProfile::new(u1.values.iter().map(|x| x * x).collect(), 0);
    let n = newton_potential(grid, &sq)?;
    let uw = RadialProfile::new(u1.values.iter().zip(omega).map(|(a, b)| a * b).collect(), 0);
    let m = newton_potential(grid, &uw)?;
    let nu2 = params.nu * params.nu;
    Ok((0..omega.len())
        .map(|i| {
            kw.values[i] - 2.0 * nu2 * n.values[i] * omega[i] - 4.0 * nu2 * u1.values[i] * m.values[i]
        })
        .collect())
}

/// `Q_s(ω) = Φ_s(ω) - Φ_s(0) - Φ'_s(0) ω`.
pub fn q_remainder(
    ctx: &SpectralContext,
    u1: &RadialProfile,
    omega: &RadialProfile,
    params: &OperatorParams,
) -> Result<RadialProfile> {
    let zero = RadialProfile::zeros(omega.len(), 0);
    let a = phi_residual(ctx, u1, omega, params)?;
    let b = phi_residual(ctx, u1, &zero, params)?;
    let h = hessian_apply(ctx, u1, params, &omega.values)?;
    let c = resolvent_apply(ctx, params, 0, &RadialProfile::new(h, 0))?;
    Ok(RadialProfile::new(
        (0..omega.len())
            .map(|i| a.values[i] - b.values[i] - c.values[i])
            .collect(),
        0,
    ))
}

#[derive(Debug)]
pub struct Hessian {
    pub op: SectorOperatorMatrix,
    lu: LU<f64, Dyn, Dyn>,
    sqrt_w: Vec<f64>,
    pub lowest: f64,
    pub min_abs_eigenvalue: f64,
    pub negative: usize,
}

impl Hessian {
    /// Solve `H ω = f` in node coordinates.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        let b = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_w).map(|(x, s)| x * s));
        let y = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::ContinuationAbort("singular Hessian factorization".into()))?;
        Ok(y.iter().zip(&self.sqrt_w).map(|(x, s)| x / s).collect())
    }
}

/// Sector-0 Hessian of `J_s` at `U₁` with `ν = ν_s`.
pub fn assemble_hessian(
    ctx: &SpectralContext,
    u1: &RadialProfile,
    params: &OperatorParams,
    kappa_prime: f64,
) -> Result<Hessian> {
    let grid = ctx.grid();
    grid.check(&u1.values)?;
    let v = coupled_potential(ctx, &u1.values, params.nu)?;
    let op = SectorOperatorMatrix::from_parts(ctx, 0, params.s, params.nu, &u1.values, &v, 1.0)?;
    let pairs = lowest_eigenpairs(&op, op.len())?;
    let min_abs = pairs.values.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if !(min_abs >= kappa_prime) {
        return Err(Error::ContinuationAbort(format!(
            "Hessian nearly singular at s = {}: min |eigenvalue| {min_abs:.3e} < {kappa_prime:.1e}",
            params.s
        )));
    }
    let negative = pairs.values.iter().filter(|&&m| m < 0.0).count();
    let lu = op.matrix().clone().lu();
    Ok(Hessian {
        lowest: pairs.values[0],
        min_abs_eigenvalue: min_abs,
        negative,
        sqrt_w: grid.weights().iter().map(|w| w.sqrt()).collect(),
        lu,
        op,
    })
}

fn hs_norm(ctx: &SpectralContext, params: &OperatorParams, f: &[f64]) -> Result<f64> {
    Ok(hs_norm_sq(ctx, params, &RadialProfile::new(f.to_vec(), 0))?.sqrt())
}

/// Run the continuation map from `ω = start` (default 0) at `params = (s, ν_s)`.
pub fn newton_iterate(
    ctx: &SpectralContext,
    base: &GroundState,
    params: &OperatorParams,
    config: &ContinuationConfig,
    start: Option<&[f64]>,
    reference: Option<&GroundState>,
) -> Result<ContinuationResult> {
    pstar(base)?;
    let s = params.s;
    if s < config.s_min {
        return Err(Error::Config(format!(
            "s = {s} is below the continuation threshold s_min = {}",
            config.s_min
        )));
    }
    let hess = assemble_hessian(ctx, &base.u, params, config.kappa_prime)?;
    newton_iterate_with(ctx, base, &hess, params, config, start, reference)
}

/// [`newton_iterate`] with a prebuilt Hessian, for repeated starts at one `s`.
pub fn newton_iterate_with(
    ctx: &SpectralContext,
    base: &GroundState,
    hess: &Hessian,
    params: &OperatorParams,
    config: &ContinuationConfig,
    start: Option<&[f64]>,
    reference: Option<&GroundState>,
) -> Result<ContinuationResult> {
    pstar(base)?;
    let s = params.s;
    if s < config.s_min {
        return Err(Error::Config(format!(
            "s = {s} is below the continuation threshold s_min = {}",
            config.s_min
        )));
    }
    if hess.op.s != s {
        return Err(Error::Config(format!(
            "Hessian assembled at s = {}, used at s = {s}",
            hess.op.s
        )));
    }
    let grid = ctx.grid();
    let u1 = &base.u.values;
    let scale = (base.s - s).abs().max((base.nu_p - params.nu).abs());
    let ratio = |norm: f64| if scale > 0.0 { Some(norm / scale) } else { None };

    let mut omega = match start {
        Some(w) => {
            grid.check(w)?;
            w.to_vec()
        }
        None => vec![0.0; grid.len()],
    };
    let mut prev_step: Option<f64> = None;
    let mut first_step = f64::NAN;
    let mut contraction = 0.0_f64;
    let mut iterations = 0;
    loop {
        if iterations >= config.max_iter {
            let n = hs_norm(ctx, params, &omega)?;
            return Err(Error::ContinuationFailure {
                message: format!("iteration cap {} reached at s = {s}", config.max_iter),
                iterations,
                ball_ratio: ratio(n).unwrap_or(f64::NAN),
            });
        }
        iterations += 1;
        let f = strong_form(ctx, params, &add(u1, &omega))?;
        let delta = hess.solve(&f)?;
        let step = hs_norm(ctx, params, &delta)?;
        omega = sub(&omega, &delta);
        if !step.is_finite() || iterations == 1 {
            first_step = step;
        }
        if let Some(p) = prev_step {
            if p > 0.0 {
                contraction = contraction.max(step / p);
            }
        }
        prev_step = Some(step);
        if !step.is_finite() || step > 1e3 * first_step.max(config.tol) {
            let n = hs_norm(ctx, params, &omega).unwrap_or(f64::NAN);
            return Err(Error::ContinuationFailure {
                message: format!("iteration diverged at s = {s}"),
                iterations,
                ball_ratio: ratio(n).unwrap_or(f64::NAN),
            });
        }
        if step <= config.tol {
            break;
        }
    }

    let omega = RadialProfile::new(omega, 0);
    let residual = hs_norm(ctx, params, &phi_residual(ctx, &base.u, &omega, params)?.values)?;
    let omega_norm = hs_norm(ctx, params, &omega.values)?;
    if !(residual <= config.residual_tol) {
        return Err(Error::ContinuationFailure {
            message: format!("converged map leaves ‖Φ‖ = {residual:.3e} at s = {s}"),
            iterations,
            ball_ratio: ratio(omega_norm).unwrap_or(f64::NAN),
        });
    }
    let agreement = match reference {
        Some(r) => {
            pstar(r)?;
            let mut u = add(u1, &omega.values);
            let n4 = hl_norm4(grid, &RadialProfile::new(u.clone(), 0))?;
            u.iter_mut().for_each(|x| *x /= n4.powf(0.25));
            let d = sup_norm(&sub(&u, &r.u.values));
            if d > config.agreement_tol {
                return Err(Error::ContinuationFailure {
                    message: format!("continuation and direct solve differ by {d:.3e} at s = {s}"),
                    iterations,
                    ball_ratio: ratio(omega_norm).unwrap_or(f64::NAN),
                });
            }
            Some(d)
        }
        None => None,
    };
    Ok(ContinuationResult {
        s,
        omega,
        iterations,
        residual,
        omega_norm,
        ball_ratio: ratio(omega_norm),
        contraction,
        agreement,
    })
}
