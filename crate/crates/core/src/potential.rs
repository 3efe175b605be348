//! Fractional Laplacian and resolvent per sector, Newton potential and its
//! sector generalisation, and the `H^s`, `Ḣ¹` and Coulomb norms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::radial::{RadialGrid, RadialProfile};
use crate::transform::{SectorTransform, DEFAULT_K_MAX};
use crate::{Error, Result};

pub const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub s: f64,
    pub nu: f64,
}

impl OperatorParams {
    pub fn new(s: f64, nu: f64) -> Result<Self> {
        check_s(s)?;
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {nu}")));
        }
        Ok(Self { s, nu })
    }

    pub fn linear(s: f64) -> Result<Self> {
        Self::new(s, 1.0)
    }
}

pub fn check_s(s: f64) -> Result<()> {
    if !(s > 0.25 && s <= 1.0) {
        return Err(Error::Config(format!("s must lie in (0.25, 1.0], got {s}")));
    }
    Ok(())
}

/// A grid together with lazily built sector transforms.
#[derive(Debug)]
pub struct SpectralContext {
    grid: RadialGrid,
    k_max: usize,
    transforms: Vec<OnceLock<SectorTransform>>,
}

impl SpectralContext {
    pub fn new(grid: RadialGrid) -> Self {
        Self::with_k_max(grid, DEFAULT_K_MAX)
    }

    pub fn with_k_max(grid: RadialGrid, k_max: usize) -> Self {
        Self {
            grid,
            k_max,
            transforms: (0..=k_max).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn transform(&self, k: usize) -> Result<&SectorTransform> {
        let cell = self.transforms.get(k).ok_or_else(|| {
            Error::Config(format!("sector {k} exceeds k_max = {}", self.k_max))
        })?;
        if let Some(t) = cell.get() {
            return Ok(t);
        }
        let t = SectorTransform::new(&self.grid, k)?;
        Ok(cell.get_or_init(|| t))
    }

    /// `ρ_m^{2s}` on the frequency grid.
    pub fn symbol(&self, s: f64) -> Vec<f64> {
        self.grid
            .frequencies()
            .iter()
            .map(|p| p.powf(2.0 * s))
            .collect()
    }
}

fn check_sector(f: &RadialProfile, k: usize) -> Result<()> {
    if f.sector != k {
        return Err(Error::Config(format!(
            "profile tagged sector {} used on sector {k}",
            f.sector
        )));
    }
    Ok(())
}

/// `S_k [ρ^{2s} T_k f]`.
pub fn frac_laplacian(
    ctx: &SpectralContext,
    params: &OperatorParams,
    k: usize,
    f: &RadialProfile,
) -> Result<RadialProfile> {
    ctx.grid().check(&f.values)?;
    check_sector(f, k)?;
    let t = ctx.transform(k)?;
    Ok(RadialProfile::new(
        t.apply_symbol(&f.values, &ctx.symbol(params.s)),
        k,
    ))
}

/// `S_k [T_k g / (ρ^{2s} + 1)]`.
pub fn resolvent_apply(
    ctx: &SpectralContext,
    params: &OperatorParams,
    k: usize,
    g: &RadialProfile,
) -> Result<RadialProfile> {
    ctx.grid().check(&g.values)?;
    check_sector(g, k)?;
    let t = ctx.transform(k)?;
    let sym: Vec<f64> = ctx.symbol(params.s).iter().map(|x| 1.0 / (1.0 + x)).collect();
    Ok(RadialProfile::new(t.apply_symbol(&g.values, &sym), k))
}

/// `S_k [(ρ^{2s} + 1) T_k f]`.
pub fn shifted_frac_laplacian(
    ctx: &SpectralContext,
    params: &OperatorParams,
    k: usize,
    f: &RadialProfile,
) -> Result<RadialProfile> {
    ctx.grid().check(&f.values)?;
    check_sector(f, k)?;
    let t = ctx.transform(k)?;
    let sym: Vec<f64> = ctx.symbol(params.s).iter().map(|x| 1.0 + x).collect();
    Ok(RadialProfile::new(t.apply_symbol(&f.values, &sym), k))
}

/// Sector-`k` Green operator by running midpoint sums, with the diagonal
/// `-(h²/12) g` correction that lifts the midpoint rule to fourth order.
fn poisson_sums(grid: &RadialGrid, k: usize, g: &[f64]) -> Vec<f64> {
    let h = grid.h();
    let r = grid.nodes();
    let m = grid.len();
    let kk = k as i32;
    let scale = 1.0 / (2 * k + 1) as f64;
    let mut out = vec![0.0; m];
    let mut inner = 0.0;
    for i in 0..m {
        inner += h * r[i].powi(kk + 2) * g[i];
        out[i] = inner / r[i].powi(kk + 1);
    }
    let mut outer = 0.0;
    for i in (0..m).rev() {
        out[i] = scale * (out[i] + r[i].powi(kk) * outer) - h * h / 12.0 * g[i];
        outer += h * r[i].powi(1 - kk) * g[i];
    }
    out
}

/// `v = I₂ ⋆ f` for radial `f`, i.e. `-Δv = f`.
pub fn newton_potential(grid: &RadialGrid, f: &RadialProfile) -> Result<RadialProfile> {
    grid.check(&f.values)?;
    check_sector(f, 0)?;
    Ok(RadialProfile::new(poisson_sums(grid, 0, &f.values), 0))
}

/// Inverse of `-∂²_r - (2/r)∂_r + k(k+1)/r²` with decay at infinity.
pub fn sector_poisson_inverse(grid: &RadialGrid, k: usize, g: &RadialProfile) -> Result<RadialProfile> {
    grid.check(&g.values)?;
    check_sector(g, k)?;
    Ok(RadialProfile::new(poisson_sums(grid, k, &g.values), k))
}

/// Dense matrix of [`sector_poisson_inverse`]; `w_i K_ij = w_j K_ji`.
pub fn sector_poisson_matrix(grid: &RadialGrid, k: usize) -> DMatrix<f64> {
    let h = grid.h();
    let r = grid.nodes();
    let m = grid.len();
    let kk = k as i32;
    let scale = 1.0 / (2 * k + 1) as f64;
    DMatrix::from_fn(m, m, |i, j| {
        let base = if j <= i {
            h * r[j] * (r[j] / r[i]).powi(kk + 1)
        } else {
            h * r[j] * (r[i] / r[j]).powi(kk)
        };
        let diag = if i == j { h * h / 12.0 } else { 0.0 };
        scale * base - diag
    })
}

/// `4π (2/π) Σ ω ρ² (1 + ρ^{2s}) |T_k f|²`.
pub fn hs_norm_sq(ctx: &SpectralContext, params: &OperatorParams, f: &RadialProfile) -> Result<f64> {
    ctx.grid().check(&f.values)?;
    let t = ctx.transform(f.sector)?;
    let sym: Vec<f64> = ctx.symbol(params.s).iter().map(|x| 1.0 + x).collect();
    Ok(FOUR_PI * t.frequency_form(ctx.grid(), &f.values, &sym))
}

/// `‖u‖⁴_HL = 4π ∫ (I₂ ⋆ u²) u² r² dr`.
pub fn hl_norm4(grid: &RadialGrid, u: &RadialProfile) -> Result<f64> {
    hl_inner(grid, u, u)
}

/// `4π ∫ (I₂ ⋆ uw) uw r² dr`.
pub fn hl_inner(grid: &RadialGrid, u: &RadialProfile, w: &RadialProfile) -> Result<f64> {
    grid.check(&u.values)?;
    grid.check(&w.values)?;
    let uw: Vec<f64> = u.values.iter().zip(&w.values).map(|(a, b)| a * b).collect();
    let v = poisson_sums(grid, 0, &uw);
    Ok(FOUR_PI * grid.inner(&v, &uw))
}

/// `‖v‖²_{Ḣ¹}` by duality, for `v` the Newton potential of `source`.
pub fn h1dot_norm_sq(grid: &RadialGrid, v: &RadialProfile, source: &RadialProfile) -> Result<f64> {
    grid.check(&v.values)?;
    grid.check(&source.values)?;
    Ok(FOUR_PI * grid.inner(&v.values, &source.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    fn ctx(m: usize, r: f64) -> SpectralContext {
        SpectralContext::new(make_grid(m, r).unwrap())
    }

    #[test]
    fn params_validation() {
        assert!(OperatorParams::new(0.25, 1.0).is_err());
        assert!(OperatorParams::new(1.0001, 1.0).is_err());
        assert!(OperatorParams::new(0.5, 0.0).is_err());
        assert!(OperatorParams::new(1.0, 2.0).is_ok());
    }

    #[test]
    fn zero_inputs() {
        let c = ctx(128, 16.0);
        let p = OperatorParams::linear(0.7).unwrap();
        let z = RadialProfile::zeros(128, 0);
        assert_eq!(frac_laplacian(&c, &p, 0, &z).unwrap().sup_norm(), 0.0);
        assert_eq!(resolvent_apply(&c, &p, 0, &z).unwrap().sup_norm(), 0.0);
        assert_eq!(newton_potential(c.grid(), &z).unwrap().sup_norm(), 0.0);
        let z1 = RadialProfile::zeros(128, 1);
        assert_eq!(sector_poisson_inverse(c.grid(), 1, &z1).unwrap().sup_norm(), 0.0);
        assert_eq!(hs_norm_sq(&c, &p, &z).unwrap(), 0.0);
        assert_eq!(hl_norm4(c.grid(), &z).unwrap(), 0.0);
        assert_eq!(h1dot_norm_sq(c.grid(), &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn sector_tag_mismatch() {
        let c = ctx(64, 8.0);
        let p = OperatorParams::linear(1.0).unwrap();
        let f = RadialProfile::zeros(64, 1);
        assert!(frac_laplacian(&c, &p, 0, &f).is_err());
        assert!(frac_laplacian(&c, &p, 9, &RadialProfile::zeros(64, 9)).is_err());
    }

    #[test]
    fn matrix_matches_running_sums() {
        let g = make_grid(96, 12.0).unwrap();
        for k in [0, 1, 3] {
            let f = g.sample(|r| r.powi(k as i32) * (-r * r / 3.0).exp() * (1.0 + r.sin()));
            let a = poisson_sums(&g, k, &f);
            let b = sector_poisson_matrix(&g, k) * nalgebra::DVector::from_column_slice(&f);
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}
