//! Classical `s = 1` Choquard (Schrödinger–Newton) solver on second-order
//! finite differences. Shares only the grid with the spectral code path, so
//! agreement with it is evidence rather than circularity.
//!
//! All operators act on `g = r u` with the reflection `g(-r) = ∓g(r)` at the
//! origin, which turns `-u'' - (2/r) u'` into `-g''`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ground_state::{log_slope, tail_window, GroundState, Normalization};
use crate::radial::{sup_norm, RadialGrid, RadialProfile};
use crate::tridiag::tridiagonal;
use crate::{Error, Result};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub m: usize,
    pub r_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Width of the Gaussian starting profile.
    pub init_width: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            m: 1024,
            r_max: 40.0,
            tol: 1e-10,
            max_iter: 2000,
            init_width: 1.0,
        }
    }
}

/// PSTAR pair `(U, V = ν_P I₂⋆U²)` with `‖U‖_HL = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub grid: RadialGrid,
    pub u: RadialProfile,
    pub v: RadialProfile,
    /// From the normalization constant of the last iterate.
    pub nu_p: f64,
    /// `(‖U‖²_{H¹} + ‖V‖²_{Ḣ¹}) / 3` after rescaling to QSTAR.
    pub nu_q: f64,
    /// `‖(-Δ_h + 1) g - 2ν_P² r N(u²) u‖ / ‖g‖`.
    pub residual: f64,
    pub iterations: usize,
}

impl OracleSolution {
    /// Wrap a spectral PSTAR ground state so it can be compared like an
    /// oracle run.
    pub fn from_ground_state(grid: &RadialGrid, gs: &GroundState) -> Result<Self> {
        require_pstar(gs)?;
        grid.check(&gs.u.values)?;
        Ok(Self {
            grid: grid.clone(),
            u: gs.u.clone(),
            v: gs.v.clone(),
            nu_p: gs.nu_p,
            nu_q: gs.nu_q,
            residual: gs.diagnostics.residual,
            iterations: gs.diagnostics.iterations,
        })
    }

    /// Tail slopes of `log U`, `log V` against `log r`.
    pub fn tail_exponent(&self) -> Result<(f64, f64)> {
        let (lo, hi) = tail_window(&self.grid)?;
        let r = &self.grid.nodes()[lo..hi];
        Ok((
            log_slope(r, &self.u.values[lo..hi])?,
            log_slope(r, &self.v.values[lo..hi])?,
        ))
    }

    /// `4π ∫ (|∇U|² + U²)` from the difference quotients of `g = rU`.
    pub fn h1_norm_sq(&self) -> f64 {
        h1_energy(&self.grid, &self.u.values)
    }

    /// `4π ∫ (I₂⋆U²) U²`.
    pub fn hl_norm4(&self) -> f64 {
        hl4(&self.grid, &self.u.values)
    }
}

fn require_pstar(gs: &GroundState) -> Result<()> {
    if gs.mode != Normalization::Pstar {
        return Err(Error::Normalization(format!(
            "oracle comparison needs a PSTAR ground state, got {}",
            gs.mode.as_str()
        )));
    }
    Ok(())
}

/// `∫_0^{r_i} F` on the half-integer grid by the four-point cubic segment
/// rule, with `F` extended evenly (`parity = 1`) or oddly (`-1`) through the
/// origin and by zero past `R`.
fn cumulative(h: f64, f: &[f64], parity: f64) -> Vec<f64> {
    let m = f.len();
    let at = |j: isize| -> f64 {
        if j < 0 {
            parity * f[(-j - 1) as usize]
        } else if (j as usize) < m {
            f[j as usize]
        } else {
            0.0
        }
    };
    let f1 = at(1);
    let mut acc = if parity > 0.0 {
        h * (13.0 * f[0] - f1) / 24.0
    } else {
        h * (51.0 * f[0] - f1) / 192.0
    };
    let mut out = Vec::with_capacity(m);
    out.push(acc);
    for j in 0..m as isize - 1 {
        acc += h * (-at(j - 1) + 13.0 * at(j) + 13.0 * at(j + 1) - at(j + 2)) / 24.0;
        out.push(acc);
    }
    out
}

/// `∫_0^R f r² dr`.
pub fn integrate(grid: &RadialGrid, f: &[f64]) -> f64 {
    let h = grid.h();
    let fr2: Vec<f64> = f.iter().zip(grid.nodes()).map(|(a, r)| a * r * r).collect();
    cumulative(h, &fr2, 1.0).last().copied().unwrap_or(0.0) + 0.25 * h * fr2.last().copied().unwrap_or(0.0)
}

/// `(I₂ ⋆ f)(r) = r⁻¹ ∫_0^r f ρ² dρ + ∫_r^R f ρ dρ` by cumulative quadrature.
pub fn cumulative_newton_potential(grid: &RadialGrid, f: &[f64]) -> Result<Vec<f64>> {
    grid.check(f)?;
    let h = grid.h();
    let r = grid.nodes();
    let inner = cumulative(h, &f.iter().zip(r).map(|(a, x)| a * x * x).collect::<Vec<_>>(), 1.0);
    let fr: Vec<f64> = f.iter().zip(r).map(|(a, x)| a * x).collect();
    let outer = cumulative(h, &fr, -1.0);
    let total = outer.last().copied().unwrap_or(0.0) + 0.25 * h * fr.last().copied().unwrap_or(0.0);
    Ok((0..f.len()).map(|i| inner[i] / r[i] + total - outer[i]).collect())
}

/// Direct `O(M²)` sum `v_i = Σ_j h r_j² f_j min(1/r_i, 1/r_j) - h² f_i / 12`
/// of the sphere-averaged kernel.
pub fn brute_force_newton_potential(grid: &RadialGrid, f: &RadialProfile) -> Result<RadialProfile> {
    f.validate(grid)?;
    if f.sector != 0 {
        return Err(Error::Config("brute-force Newton potential needs a sector-0 profile".into()));
    }
    let h = grid.h();
    let r = grid.nodes();
    let values = r
        .iter()
        .zip(&f.values)
        .map(|(&ri, &fi)| {
            let s: f64 = r
                .iter()
                .zip(&f.values)
                .map(|(&rj, &fj)| h * rj * rj * fj * (1.0 / ri).min(1.0 / rj))
                .sum();
            s - h * h * fi / 12.0
        })
        .collect();
    Ok(RadialProfile::new(values, 0))
}

fn hl4(grid: &RadialGrid, u: &[f64]) -> f64 {
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let v = cumulative_newton_potential(grid, &sq).unwrap_or_else(|_| vec![f64::NAN; u.len()]);
    FOUR_PI * integrate(grid, &v.iter().zip(&sq).map(|(a, b)| a * b).collect::<Vec<_>>())
}

fn h1_energy(grid: &RadialGrid, u: &[f64]) -> f64 {
    let h = grid.h();
    let g: Vec<f64> = u.iter().zip(grid.nodes()).map(|(a, r)| a * r).collect();
    let m = g.len();
    let mut grad = 2.0 * g[0] * g[0] / h;
    for j in 0..m {
        let next = if j + 1 < m { g[j + 1] } else { -g[j] };
        let w = if j + 1 < m { 1.0 } else { 0.5 };
        grad += w * (next - g[j]).powi(2) / h;
    }
    FOUR_PI * (grad + h * g.iter().map(|x| x * x).sum::<f64>())
}

/// Bands of `-d²/dr² + k(k+1)/r²` on `g`, with parity `(-1)^{k+1}` at the
/// origin. `outer` is the ghost factor `g_M = outer · g_{M-1}`.
fn sector_bands(grid: &RadialGrid, k: usize, outer: f64) -> (Vec<f64>, Vec<f64>) {
    let h2 = grid.h() * grid.h();
    let m = grid.len();
    let kk = (k * (k + 1)) as f64;
    let mut diag: Vec<f64> = grid.nodes().iter().map(|r| 2.0 / h2 + kk / (r * r)).collect();
    let parity = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    diag[0] -= parity / h2;
    diag[m - 1] -= outer / h2;
    (diag, vec![-1.0 / h2; m - 1])
}

/// Dirichlet at `R`: the ghost is the odd reflection through `r = R`.
const DIRICHLET: f64 = -1.0;

fn normalize(grid: &RadialGrid, u: &mut [f64]) -> Result<f64> {
    let n4 = hl4(grid, u);
    if !(n4 > 0.0 && n4.is_finite()) {
        return Err(Error::SolverFailure {
            message: "oracle iterate has vanishing Coulomb norm".into(),
            residual: f64::NAN,
        });
    }
    let c = n4.powf(-0.25);
    u.iter_mut().for_each(|x| *x *= c);
    Ok(c)
}

/// Normalized fixed-point iteration `u ← c (-Δ_h + 1)⁻¹[(I₂⋆u²) u]`,
/// `‖u‖_HL = 1`. At the fixed point `-Δu + u = c (I₂⋆u²) u`, so
/// `ν_P = (c/2)^{1/2}`.
pub fn solve_classical(config: &OracleConfig) -> Result<OracleSolution> {
    if config.tol <= 0.0 || config.max_iter == 0 || config.init_width <= 0.0 {
        return Err(Error::Config("oracle needs tol > 0, max_iter > 0, init_width > 0".into()));
    }
    let grid = RadialGrid::new(config.m, config.r_max)?;
    let r = grid.nodes().to_vec();
    let (a_diag, off) = sector_bands(&grid, 0, DIRICHLET);
    let diag: Vec<f64> = a_diag.iter().map(|d| d + 1.0).collect();
    let a = 0.5 / (config.init_width * config.init_width);
    let mut u = grid.sample(|x| (-a * x * x).exp());
    normalize(&grid, &mut u)?;
    let mut c = f64::NAN;
    let mut change = f64::INFINITY;

    for it in 0..=config.max_iter {
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let pot = cumulative_newton_potential(&grid, &sq)?;
        let rhs: Vec<f64> = pot.iter().zip(&u).zip(&r).map(|((p, x), ri)| p * x * ri).collect();
        let residual = if c.is_finite() {
            let g: Vec<f64> = u.iter().zip(&r).map(|(x, ri)| x * ri).collect();
            let m = g.len();
            let res: f64 = (0..m)
                .map(|j| {
                    let mut lg = diag[j] * g[j];
                    if j > 0 {
                        lg += off[j - 1] * g[j - 1];
                    }
                    if j + 1 < m {
                        lg += off[j] * g[j + 1];
                    }
                    (lg - c * rhs[j]).powi(2)
                })
                .sum();
            (res / g.iter().map(|x| x * x).sum::<f64>()).sqrt()
        } else {
            f64::INFINITY
        };
        if change <= config.tol && residual <= config.tol {
            let nu_p = (0.5 * c).sqrt();
            let v: Vec<f64> = pot.iter().map(|p| nu_p * p).collect();
            let mut sol = OracleSolution {
                grid,
                u: RadialProfile::new(u, 0),
                v: RadialProfile::new(v, 0),
                nu_p,
                nu_q: f64::NAN,
                residual,
                iterations: it,
            };
            sol.nu_q = qstar_multiplier(&sol)?;
            return Ok(sol);
        }
        if it == config.max_iter {
            return Err(Error::SolverFailure {
                message: format!("oracle: no convergence in {} iterations", config.max_iter),
                residual,
            });
        }

        let mut g = rhs;
        tridiagonal(&off, &diag, &off, &mut g)?;
        let mut next: Vec<f64> = g.iter().zip(&r).map(|(x, ri)| x / ri).collect();
        c = normalize(&grid, &mut next)?;
        if next.iter().any(|&x| x < -1e-12 * sup_norm(&next)) {
            return Err(Error::SolverFailure {
                message: format!("oracle: negative values in iterate {it}"),
                residual,
            });
        }
        change = next.iter().zip(&u).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        u = next;
    }
    unreachable!()
}

/// QSTAR rescaling `U_Q = αU`, `V_Q = αV`, `ν_Q = ν_P/α` with
/// `α = (ν_P ‖U‖⁴_HL)^{-1/3}`, then `(‖U_Q‖²_{H¹} + ‖V_Q‖²_{Ḣ¹}) / 3`.
fn qstar_multiplier(sol: &OracleSolution) -> Result<f64> {
    let hl = sol.hl_norm4();
    let alpha = (sol.nu_p * hl).powf(-1.0 / 3.0);
    let nu = sol.nu_p / alpha;
    let hu = alpha * alpha * sol.h1_norm_sq();
    // ‖V_Q‖²_{Ḣ¹} = 4π ∫ V_Q (-ΔV_Q) = 4π ν ∫ V_Q U_Q².
    let vu2: Vec<f64> = sol.v.values.iter().zip(&sol.u.values).map(|(v, u)| v * u * u).collect();
    let hv = FOUR_PI * nu * alpha.powi(3) * integrate(&sol.grid, &vu2);
    let q = (hu + hv) / 3.0;
    if !q.is_finite() {
        return Err(Error::Numeric("oracle QSTAR multiplier is not finite".into()));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// `|ν_P - ν_P^oracle| / ν_P`.
    pub nu_rel_diff: f64,
    /// `sup |U - U^oracle|` on the spectral grid.
    pub profile_distance: f64,
    pub u_sup: f64,
    /// Difference of the `log U` tail slopes.
    pub tail_diff: f64,
}

/// Cubic Lagrange interpolation of `(x, y)` at `t`, clamped to the end
/// values outside the node range.
fn interpolate(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|&v| v <= t).clamp(2, n - 2) - 2;
    let idx = [i, i + 1, i + 2, (i + 3).min(n - 1)];
    let mut acc = 0.0;
    for (a, &ia) in idx.iter().enumerate() {
        let mut l = 1.0;
        for (b, &ib) in idx.iter().enumerate() {
            if a != b {
                l *= (t - x[ib]) / (x[ia] - x[ib]);
            }
        }
        acc += l * y[ia];
    }
    acc
}

/// Cross-validate a spectral `s = 1` PSTAR ground state against an oracle
/// run, interpolating the oracle onto the spectral grid.
pub fn oracle_compare(grid: &RadialGrid, gs: &GroundState, oracle: &OracleSolution) -> Result<OracleComparison> {
    require_pstar(gs)?;
    grid.check(&gs.u.values)?;
    let on_grid: Vec<f64> = if *grid == oracle.grid {
        oracle.u.values.clone()
    } else {
        grid.nodes()
            .iter()
            .map(|&t| interpolate(oracle.grid.nodes(), &oracle.u.values, t))
            .collect()
    };
    let profile_distance = gs
        .u
        .values
        .iter()
        .zip(&on_grid)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let (lo, hi) = tail_window(grid)?;
    let r = &grid.nodes()[lo..hi];
    let (olo, ohi) = tail_window(&oracle.grid)?;
    let tail_diff = log_slope(r, &gs.u.values[lo..hi])?
        - log_slope(&oracle.grid.nodes()[olo..ohi], &oracle.u.values[olo..ohi])?;
    Ok(OracleComparison {
        nu_rel_diff: (gs.nu_p - oracle.nu_p).abs() / gs.nu_p,
        profile_distance,
        u_sup: sup_norm(&gs.u.values),
        tail_diff,
    })
}

/// Finite-difference `s = 1` linearized operator in sector `k`, acting on
/// `g = r ξ`:
/// `-g'' + k(k+1) g/r² + g - 2ν_P² N(U²) g - 4ν_P² U B_k⁻¹ (U g)`,
/// where `B_k` is the sector Poisson operator with the decaying ghost
/// `g_M = g_{M-1} (r_{M-1}/r_M)^k`. This is the QSTAR operator written in
/// PSTAR variables; the matrix is symmetric.
pub fn fd_sector_operator(sol: &OracleSolution, k: usize) -> Result<DMatrix<f64>> {
    let grid = &sol.grid;
    let m = grid.len();
    let r = grid.nodes();
    let nu2 = sol.nu_p * sol.nu_p;
    let u = &sol.u.values;
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let pot = cumulative_newton_potential(grid, &sq)?;

    let (ld, loff) = sector_bands(grid, k, DIRICHLET);
    let decay = (r[m - 1] / (r[m - 1] + grid.h())).powi(k as i32);
    let (bd, boff) = sector_bands(grid, k, decay);

    let mut a = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut col = vec![0.0; m];
        col[j] = u[j];
        tridiagonal(&boff, &bd, &boff, &mut col)?;
        for i in 0..m {
            a[(i, j)] = -4.0 * nu2 * u[i] * col[i];
        }
    }
    let a = (&a + a.transpose()) * 0.5;
    let mut a = a;
    for j in 0..m {
        a[(j, j)] += ld[j] + 1.0 - 2.0 * nu2 * pot[j];
        if j + 1 < m {
            a[(j, j + 1)] += loff[j];
            a[(j + 1, j)] += loff[j];
        }
    }
    Ok(a)
}

/// Lowest `n` eigenvalues of [`fd_sector_operator`], ascending.
pub fn fd_sector_eigenvalues(sol: &OracleSolution, k: usize, n: usize) -> Result<Vec<f64>> {
    let a = fd_sector_operator(sol, k)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite finite-difference eigenvalue".into()));
    }
    ev.sort_by(|a, b| a.total_cmp(b));
    ev.truncate(n);
    Ok(ev)
}
