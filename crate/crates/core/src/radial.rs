//! Uniform midpoint grids on `(0, R_max]`, radial profiles and the basic
//! quadrature/differentiation tools on them. Dimension is fixed to three.

use std::f64::consts::PI;

use crate::{Error, Result};

pub const DIM: usize = 3;
pub const MIN_POINTS: usize = 64;

/// Midpoint grid `r_j = (j - 1/2) h` with its dual frequency grid
/// `ρ_m = (m - 1/2) π / R_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    m: usize,
    r_max: f64,
    h: f64,
    r: Vec<f64>,
    w: Vec<f64>,
    rho: Vec<f64>,
    omega: Vec<f64>,
}

pub fn make_grid(m: usize, r_max: f64) -> Result<RadialGrid> {
    RadialGrid::new(m, r_max)
}

impl RadialGrid {
    pub fn new(m: usize, r_max: f64) -> Result<Self> {
        if m < MIN_POINTS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_POINTS} points, got {m}"
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Config(format!("R_max must be positive, got {r_max}")));
        }
        let h = r_max / m as f64;
        let r: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) * h).collect();
        let w = r.iter().map(|&x| h * x * x).collect();
        let dr = PI / r_max;
        let rho = (0..m).map(|j| (j as f64 + 0.5) * dr).collect();
        Ok(Self {
            m,
            r_max,
            h,
            r,
            w,
            rho,
            omega: vec![dr; m],
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    /// Weights for `∫₀^{R_max} f(r) r² dr`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.rho
    }

    pub fn frequency_weights(&self) -> &[f64] {
        &self.omega
    }

    pub fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.m {
            return Err(Error::GridMismatch {
                expected: self.m,
                got: values.len(),
            });
        }
        Ok(())
    }

    /// `Σ_j w_j f_j`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.w.iter().zip(f).map(|(w, f)| w * f).sum()
    }

    /// `Σ_j w_j f_j g_j`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.w.iter().zip(f).zip(g).map(|((w, f), g)| w * f * g).sum()
    }

    /// `(∫ f² r² dr)^{1/2}`, without the 4π.
    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.r.iter().map(|&r| f(r)).collect()
    }
}

/// Values of a radial function on a grid, tagged with the spherical-harmonic
/// degree it multiplies.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub values: Vec<f64>,
    pub sector: usize,
}

impl RadialProfile {
    pub fn new(values: Vec<f64>, sector: usize) -> Self {
        Self { values, sector }
    }

    pub fn zeros(m: usize, sector: usize) -> Self {
        Self::new(vec![0.0; m], sector)
    }

    pub fn sample(grid: &RadialGrid, sector: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.sample(f), sector)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::new(self.values.iter().map(|x| a * x).collect(), self.sector)
    }

    /// Length, finiteness, and for `k ≥ 1` the origin bound `|f_1| ≤ 10 |f_2|`.
    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        grid.check(&self.values)?;
        if let Some(j) = self.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite profile value at node {j}")));
        }
        if self.sector >= 1 && self.values[0].abs() > 10.0 * self.values[1].abs() {
            return Err(Error::Config(format!(
                "sector {} profile does not vanish at the origin",
                self.sector
            )));
        }
        Ok(())
    }
}

pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn radial_integral(grid: &RadialGrid, f: &RadialProfile) -> Result<f64> {
    grid.check(&f.values)?;
    Ok(grid.integrate(&f.values))
}

/// Finite-difference weights for the first derivative at `x0` on the given
/// stencil (Fornberg's recursion).
fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

const STENCIL: usize = 7;

/// Sixth-order first derivative: centered 7-point stencils in the interior,
/// one-sided 7-point stencils at both ends. Output is tagged sector 1.
pub fn differentiate(grid: &RadialGrid, f: &RadialProfile) -> Result<RadialProfile> {
    grid.check(&f.values)?;
    let m = grid.len();
    let half = STENCIL / 2;
    let unit: Vec<f64> = (0..STENCIL).map(|i| i as f64).collect();
    let mut out = vec![0.0; m];
    let h = grid.h();
    for (i, o) in out.iter_mut().enumerate() {
        let start = i.saturating_sub(half).min(m - STENCIL);
        let coeffs = first_derivative_weights((i - start) as f64, &unit);
        let acc: f64 = coeffs
            .iter()
            .zip(&f.values[start..start + STENCIL])
            .map(|(c, v)| c * v)
            .sum();
        *o = acc / h;
    }
    Ok(RadialProfile::new(out, 1))
}
