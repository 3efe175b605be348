//! Spherical Bessel transforms on a single harmonic sector.
//!
//! With midpoint nodes and the dual frequency grid the `k = 0` pair is a
//! scaled DST-IV, so `S₀ T₀ = I` to rounding. For `k ≥ 1` the forward matrix
//! has a handful of near-null directions concentrated at the origin; they are
//! found once here and deflated by the spectral code.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::radial::RadialGrid;
use crate::{Error, Result};

pub const DEFAULT_K_MAX: usize = 6;

/// Spherical Bessel function of the first kind `j_k(x)` for `x ≥ 0`.
pub fn spherical_jn(k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return x.sin() / x;
    }
    if x < (k as f64).max(1.0) {
        return series(k, x);
    }
    upward(k, x)
}

fn upward(k: usize, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let mut jm = s / x;
    let mut j = s / (x * x) - c / x;
    for n in 1..k {
        let next = (2 * n + 1) as f64 / x * j - jm;
        jm = j;
        j = next;
    }
    j
}

fn series(k: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for n in 0..k {
        lead *= x / (2 * n + 3) as f64;
    }
    // lead = x^k / (2k+1)!!
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..60 {
        term *= y / ((n + 1) as f64 * (2 * k + 2 * n + 3) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

#[derive(Debug, Clone)]
pub struct SectorTransform {
    k: usize,
    forward: DMatrix<f64>,
    inverse: DMatrix<f64>,
    null_basis: Option<DMatrix<f64>>,
}

pub fn build_sector_transform(grid: &RadialGrid, k: usize, k_max: usize) -> Result<SectorTransform> {
    if k > k_max {
        return Err(Error::Config(format!("sector {k} exceeds k_max = {k_max}")));
    }
    SectorTransform::new(grid, k)
}

impl SectorTransform {
    pub fn new(grid: &RadialGrid, k: usize) -> Result<Self> {
        let m = grid.len();
        let r = grid.nodes();
        let w = grid.weights();
        let rho = grid.frequencies();
        let om = grid.frequency_weights();
        let mut forward = DMatrix::zeros(m, m);
        let mut inverse = DMatrix::zeros(m, m);
        for j in 0..m {
            for (i, (&p, &o)) in rho.iter().zip(om).enumerate() {
                let b = spherical_jn(k, p * r[j]);
                forward[(i, j)] = w[j] * b;
                inverse[(j, i)] = 2.0 / PI * o * p * p * b;
            }
        }
        let mut t = Self {
            k,
            forward,
            inverse,
            null_basis: None,
        };
        if k >= 1 {
            t.null_basis = Some(t.compute_null_basis(grid)?);
        }
        Ok(t)
    }

    pub fn sector(&self) -> usize {
        self.k
    }

    pub fn forward_matrix(&self) -> &DMatrix<f64> {
        &self.forward
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Orthonormal basis (in `W^{1/2}`-scaled node coordinates) of the
    /// directions the forward transform annihilates. `None` for `k = 0`.
    pub fn null_basis(&self) -> Option<&DMatrix<f64>> {
        self.null_basis.as_ref()
    }

    pub fn forward(&self, f: &[f64]) -> Vec<f64> {
        (&self.forward * DVector::from_column_slice(f))
            .as_slice()
            .to_vec()
    }

    pub fn inverse(&self, g: &[f64]) -> Vec<f64> {
        (&self.inverse * DVector::from_column_slice(g))
            .as_slice()
            .to_vec()
    }

    /// `S diag(symbol) T f`.
    pub fn apply_symbol(&self, f: &[f64], symbol: &[f64]) -> Vec<f64> {
        let mut g = &self.forward * DVector::from_column_slice(f);
        for (x, s) in g.iter_mut().zip(symbol) {
            *x *= s;
        }
        (&self.inverse * g).as_slice().to_vec()
    }

    /// `(2/π) Σ_m ω_m ρ_m² φ(ρ_m) |T f|²`, the frequency-side quadratic form.
    pub fn frequency_form(&self, grid: &RadialGrid, f: &[f64], symbol: &[f64]) -> f64 {
        let g = &self.forward * DVector::from_column_slice(f);
        let rho = grid.frequencies();
        let om = grid.frequency_weights();
        g.iter()
            .enumerate()
            .map(|(i, x)| 2.0 / PI * om[i] * rho[i] * rho[i] * symbol[i] * x * x)
            .sum()
    }

    /// `Bs = W^{-1/2} Tᵀ C T W^{-1/2}` applied to a block, `C = (2/π) ω ρ²`.
    fn gram_apply(&self, grid: &RadialGrid, y: &DMatrix<f64>) -> DMatrix<f64> {
        let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut x = y.clone();
        for mut col in x.column_iter_mut() {
            for (v, s) in col.iter_mut().zip(&sw) {
                *v /= s;
            }
        }
        let mut z = &self.forward * x;
        let rho = grid.frequencies();
        let om = grid.frequency_weights();
        for mut col in z.column_iter_mut() {
            for (i, v) in col.iter_mut().enumerate() {
                *v *= 2.0 / PI * om[i] * rho[i] * rho[i];
            }
        }
        let mut out = self.forward.tr_mul(&z);
        for mut col in out.column_iter_mut() {
            for (v, s) in col.iter_mut().zip(&sw) {
                *v /= s;
            }
        }
        out
    }

    fn compute_null_basis(&self, grid: &RadialGrid) -> Result<DMatrix<f64>> {
        let m = grid.len();
        let b = (self.k + 3).min(m);
        let mut y = DMatrix::from_fn(m, b, |i, j| if i == j { 1.0 } else { 0.0 });
        // Bs is ≈ I off the null space, so (I - Bs) isolates it in a few sweeps.
        for _ in 0..8 {
            let by = self.gram_apply(grid, &y);
            y = (y - by).qr().q();
        }
        let by = self.gram_apply(grid, &y);
        let small = y.tr_mul(&by);
        let small = (&small + small.transpose()) * 0.5;
        let eig = SymmetricEigen::new(small);
        let keep: Vec<usize> = (0..b).filter(|&i| eig.eigenvalues[i] < 0.5).collect();
        if keep.is_empty() {
            return Ok(DMatrix::zeros(m, 0));
        }
        let vecs = DMatrix::from_fn(b, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);
        let q = &y * vecs;
        let resid = (self.gram_apply(grid, &q)).norm();
        if !resid.is_finite() || resid > 1e-6 {
            return Err(Error::Numeric(format!(
                "sector {} null directions not resolved (residual {resid:.2e})",
                self.k
            )));
        }
        Ok(q)
    }
}
