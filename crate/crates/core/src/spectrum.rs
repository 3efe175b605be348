//! Sector-reduced linearized operator
//! `L_k ξ = (-Δ)^s_k ξ + ξ - 2ν V ξ - 4ν² U G_k[U ξ]`
//! around a QSTAR ground state, its low spectrum, and the nondegeneracy
//! certificate.
//!
//! Matrices are held in `W^{1/2}`-scaled coordinates `y = W^{1/2} ξ`, where
//! the weighted inner product becomes Euclidean and the operator symmetric.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ground_state::{GroundState, Normalization, SectorSummary};
use crate::potential::{
    check_s, frac_laplacian, newton_potential, sector_poisson_inverse, sector_poisson_matrix,
    OperatorParams, SpectralContext,
};
use crate::radial::{differentiate, RadialProfile};
use crate::{Error, Result};

/// Default kernel tolerance κ at `M = 1024`.
pub const KERNEL_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SectorOperatorMatrix {
    pub k: usize,
    pub s: f64,
    matrix: DMatrix<f64>,
    sqrt_w: Vec<f64>,
    /// `‖A - Aᵀ‖_∞ / ‖A‖_∞` before symmetrization.
    pub asymmetry: f64,
    /// Number of transform null directions moved to the top of the spectrum.
    pub deflated: usize,
}

impl SectorOperatorMatrix {
    /// Assemble from raw coefficient profiles; `shift` multiplies the
    /// identity term (1 for `L_k`).
    pub fn from_parts(
        ctx: &SpectralContext,
        k: usize,
        s: f64,
        nu: f64,
        u: &[f64],
        v: &[f64],
        shift: f64,
    ) -> Result<Self> {
        check_s(s)?;
        let grid = ctx.grid();
        grid.check(u)?;
        grid.check(v)?;
        let t = ctx.transform(k)?;
        let m = grid.len();
        let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();

        // (T W^{-1/2})ᵀ diag(C ρ^{2s}) (T W^{-1/2}) with C = (2/π) ω ρ².
        let mut b = t.forward_matrix().clone();
        for (j, mut col) in b.column_iter_mut().enumerate() {
            col /= sqrt_w[j];
        }
        let mut cb = b.clone();
        let rho = grid.frequencies();
        let om = grid.frequency_weights();
        for (i, mut row) in cb.row_iter_mut().enumerate() {
            row *= 2.0 / PI * om[i] * rho[i] * rho[i] * rho[i].powf(2.0 * s);
        }
        let mut a = b.tr_mul(&cb);

        let mut g = sector_poisson_matrix(grid, k);
        let c = 4.0 * nu * nu;
        for j in 0..m {
            for i in 0..m {
                g[(i, j)] *= c * u[i] * u[j] * sqrt_w[i] / sqrt_w[j];
            }
        }
        a -= g;
        for i in 0..m {
            a[(i, i)] += shift - 2.0 * nu * v[i];
        }

        let scale = a.abs().row_sum().max().max(f64::MIN_POSITIVE);
        let asymmetry = (&a - a.transpose()).abs().row_sum().max() / scale;
        let mut sym = (&a + a.transpose()) * 0.5;

        let mut deflated = 0;
        if let Some(q) = t.null_basis() {
            if q.ncols() > 0 {
                let p = DMatrix::identity(m, m) - q * q.transpose();
                let lift = sym.abs().row_sum().max() + 1.0;
                sym = &p * sym * &p + q * q.transpose() * lift;
                sym = (&sym + sym.transpose()) * 0.5;
                deflated = q.ncols();
            }
        }
        Ok(Self {
            k,
            s,
            matrix: sym,
            sqrt_w,
            asymmetry,
            deflated,
        })
    }

    pub fn len(&self) -> usize {
        self.sqrt_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sqrt_w.is_empty()
    }

    /// The symmetric matrix in scaled coordinates.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.matrix.abs().row_sum().max().max(f64::MIN_POSITIVE);
        (&self.matrix - self.matrix.transpose()).abs().row_sum().max() / scale
    }

    /// Node-space action `W^{-1/2} A W^{1/2} ξ`.
    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        let y = DVector::from_iterator(self.len(), xi.iter().zip(&self.sqrt_w).map(|(x, s)| x * s));
        let z = &self.matrix * y;
        z.iter().zip(&self.sqrt_w).map(|(x, s)| x / s).collect()
    }

    /// `⟨ξ, A ξ⟩` in the `r² dr`-weighted inner product.
    pub fn quadratic_form(&self, xi: &[f64]) -> f64 {
        let y = DVector::from_iterator(self.len(), xi.iter().zip(&self.sqrt_w).map(|(x, s)| x * s));
        y.dot(&(&self.matrix * &y))
    }
}

fn require_qstar(gs: &GroundState) -> Result<()> {
    if gs.mode != Normalization::Qstar {
        return Err(Error::Normalization(format!(
            "linearization needs a QSTAR ground state, got {}",
            gs.mode.as_str()
        )));
    }
    Ok(())
}

pub fn assemble_sector_operator(
    ctx: &SpectralContext,
    gs: &GroundState,
    k: usize,
) -> Result<SectorOperatorMatrix> {
    require_qstar(gs)?;
    SectorOperatorMatrix::from_parts(ctx, k, gs.s, gs.nu_q, &gs.u.values, &gs.v.values, 1.0)
}

/// Matrix-free `L_k ξ` through the transform and running-sum operators.
pub fn apply_sector_operator(
    ctx: &SpectralContext,
    gs: &GroundState,
    k: usize,
    xi: &[f64],
) -> Result<Vec<f64>> {
    require_qstar(gs)?;
    let grid = ctx.grid();
    grid.check(xi)?;
    let params = OperatorParams::linear(gs.s)?;
    let f = RadialProfile::new(xi.to_vec(), k);
    let lap = frac_laplacian(ctx, &params, k, &f)?;
    let uxi = RadialProfile::new(gs.u.values.iter().zip(xi).map(|(a, b)| a * b).collect(), k);
    let z = sector_poisson_inverse(grid, k, &uxi)?;
    let nu = gs.nu_q;
    Ok((0..grid.len())
        .map(|i| {
            lap.values[i] + xi[i]
                - 2.0 * nu * gs.v.values[i] * xi[i]
                - 4.0 * nu * nu * gs.u.values[i] * z.values[i]
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Node-space eigenvectors, orthonormal in the weighted inner product.
    pub vectors: Vec<Vec<f64>>,
}

pub fn lowest_eigenpairs(op: &SectorOperatorMatrix, n: usize) -> Result<Eigenpairs> {
    let m = op.len();
    if n == 0 || n > m {
        return Err(Error::Config(format!("requested {n} eigenpairs of a {m}×{m} matrix")));
    }
    let norm = op.matrix.abs().row_sum().max();
    let eig = SymmetricEigen::try_new(op.matrix.clone(), 1e-15, 0).ok_or_else(|| {
        Error::Numeric(format!(
            "symmetric eigensolver failed on sector {} (‖A‖∞ = {norm:.3e}, symmetry defect {:.2e})",
            op.k,
            op.symmetry_defect()
        ))
    })?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &i in order.iter().take(n) {
        let mu = eig.eigenvalues[i];
        let y = eig.eigenvectors.column(i);
        let res = (&op.matrix * y - y * mu).norm();
        if !(res <= 1e-8 * norm) {
            return Err(Error::Numeric(format!(
                "eigenpair residual {res:.2e} exceeds 1e-8·‖A‖ = {:.2e} in sector {}",
                1e-8 * norm,
                op.k
            )));
        }
        values.push(mu);
        vectors.push(y.iter().zip(&op.sqrt_w).map(|(x, s)| x / s).collect());
    }
    Ok(Eigenpairs { values, vectors })
}

fn weighted_cosine(ctx: &SpectralContext, a: &[f64], b: &[f64]) -> f64 {
    let g = ctx.grid();
    (g.inner(a, b) / (g.norm(a) * g.norm(b))).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    /// `‖L₁ ∂_r U‖ / ‖∂_r U‖`.
    pub residual: f64,
    /// Eigenvalue of `L₁` closest to zero.
    pub eigenvalue: f64,
    /// `|cos|` between that eigenvector and `∂_r U`.
    pub similarity: f64,
    /// `‖ζ - ∂_r V‖ / ‖∂_r V‖` with `ζ = 2ν G₁[U ξ]`.
    pub zeta_defect: f64,
}

pub fn translation_kernel_check(ctx: &SpectralContext, gs: &GroundState) -> Result<KernelCheck> {
    let op = assemble_sector_operator(ctx, gs, 1)?;
    let pairs = lowest_eigenpairs(&op, 4)?;
    translation_kernel_from(ctx, gs, &pairs)
}

fn translation_kernel_from(
    ctx: &SpectralContext,
    gs: &GroundState,
    pairs: &Eigenpairs,
) -> Result<KernelCheck> {
    require_qstar(gs)?;
    let grid = ctx.grid();
    let du = differentiate(grid, &gs.u)?;
    let lxi = apply_sector_operator(ctx, gs, 1, &du.values)?;
    let residual = grid.norm(&lxi) / grid.norm(&du.values);

    let best = (0..pairs.values.len())
        .min_by(|&a, &b| pairs.values[a].abs().total_cmp(&pairs.values[b].abs()))
        .ok_or_else(|| Error::Numeric("no eigenpairs".into()))?;
    let vec = &pairs.vectors[best];
    let similarity = weighted_cosine(ctx, vec, &du.values).min(1.0);

    let c = grid.inner(vec, &du.values) / grid.inner(vec, vec);
    let src = RadialProfile::new(
        gs.u.values.iter().zip(vec).map(|(u, x)| u * c * x).collect(),
        1,
    );
    let zeta = sector_poisson_inverse(grid, 1, &src)?.scaled(2.0 * gs.nu_q);
    let dv = differentiate(grid, &gs.v)?;
    let diff: Vec<f64> = zeta.values.iter().zip(&dv.values).map(|(a, b)| a - b).collect();
    Ok(KernelCheck {
        residual,
        eigenvalue: pairs.values[best],
        similarity,
        zeta_defect: grid.norm(&diff) / grid.norm(&dv.values),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Nondegenerate,
    Degenerate(Vec<String>),
    Inconclusive(Vec<String>),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Nondegenerate => "NONDEGENERATE",
            Verdict::Degenerate(_) => "DEGENERATE",
            Verdict::Inconclusive(_) => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Nondegenerate => write!(f, "NONDEGENERATE"),
            Verdict::Degenerate(r) | Verdict::Inconclusive(r) => {
                write!(f, "{} ({})", self.label(), r.join("; "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpectrum {
    pub k: usize,
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub s: f64,
    pub kappa: f64,
    pub sectors: Vec<SectorSpectrum>,
    /// `(k, μ)` with `|μ| ≤ κ`.
    pub kernel_candidates: Vec<(usize, f64)>,
    pub similarity: f64,
    pub kernel: KernelCheck,
    pub morse_index: usize,
    pub minima_increasing: bool,
    pub verdict: Verdict,
}

impl SpectrumReport {
    /// One `(k, rank, μ)` row per reported eigenvalue.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().enumerate().map(move |(i, &m)| (s.k, i, m)))
    }

    pub fn summaries(&self) -> Vec<SectorSummary> {
        self.sectors
            .iter()
            .map(|s| SectorSummary {
                k: s.k,
                min_eigenvalue: s.eigenvalues[0],
                negative: s.eigenvalues.iter().filter(|&&m| m < -self.kappa).count(),
                near_zero: s.eigenvalues.iter().filter(|&&m| m.abs() <= self.kappa).count(),
            })
            .collect()
    }
}

pub fn nondegeneracy_report(
    ctx: &SpectralContext,
    gs: &GroundState,
    k_max: usize,
    n_eigs: usize,
) -> Result<SpectrumReport> {
    nondegeneracy_report_with(ctx, gs, k_max, n_eigs, KERNEL_TOL)
}

pub fn nondegeneracy_report_with(
    ctx: &SpectralContext,
    gs: &GroundState,
    k_max: usize,
    n_eigs: usize,
    kappa: f64,
) -> Result<SpectrumReport> {
    require_qstar(gs)?;
    if k_max < 2 {
        return Err(Error::Config(format!("k_max must be at least 2, got {k_max}")));
    }
    if k_max > ctx.k_max() {
        return Err(Error::Config(format!(
            "k_max = {k_max} exceeds the context limit {}",
            ctx.k_max()
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::Config(format!("kernel tolerance must be positive, got {kappa}")));
    }
    let n = n_eigs.max(2);
    let mut sectors = Vec::with_capacity(k_max + 1);
    let mut kernel = None;
    for k in 0..=k_max {
        let op = assemble_sector_operator(ctx, gs, k)?;
        let pairs = lowest_eigenpairs(&op, n)?;
        if k == 1 {
            kernel = Some(translation_kernel_from(ctx, gs, &pairs)?);
        }
        sectors.push(SectorSpectrum {
            k,
            eigenvalues: pairs.values,
        });
    }
    let kernel = kernel.expect("sector 1 assembled");

    let count = |k: usize, f: &dyn Fn(f64) -> bool| sectors[k].eigenvalues.iter().filter(|&&m| f(m)).count();
    let mut bad = Vec::new();
    let mut unsure = Vec::new();

    let neg0 = count(0, &|m| m < -kappa);
    let zero0 = count(0, &|m| m.abs() <= kappa);
    if neg0 != 1 || zero0 != 0 {
        bad.push(format!("k=0: {neg0} negative, {zero0} near zero"));
    }
    let zero1 = count(1, &|m| m.abs() <= kappa);
    let neg1 = count(1, &|m| m < -kappa);
    if zero1 != 1 || neg1 != 0 {
        bad.push(format!("k=1: {zero1} near zero, {neg1} negative"));
    }
    if kernel.similarity < 0.99 {
        bad.push(format!("k=1 kernel similarity {:.4}", kernel.similarity));
    }
    for sec in &sectors[2..] {
        if sec.eigenvalues[0] <= kappa {
            bad.push(format!("k={}: minimum {:.3e}", sec.k, sec.eigenvalues[0]));
        }
    }
    for sec in &sectors {
        for &m in &sec.eigenvalues {
            if m.abs() >= 0.5 * kappa && m.abs() <= 2.0 * kappa {
                unsure.push(format!("k={}: eigenvalue {m:.3e} within a factor 2 of κ", sec.k));
            }
        }
    }

    let morse_index = sectors
        .iter()
        .map(|s| s.eigenvalues.iter().filter(|&&m| m < -kappa).count() * (2 * s.k + 1))
        .sum();
    let minima_increasing = sectors[2..]
        .windows(2)
        .all(|w| w[1].eigenvalues[0] > w[0].eigenvalues[0]);
    let kernel_candidates = sectors
        .iter()
        .flat_map(|s| {
            s.eigenvalues
                .iter()
                .filter(|m| m.abs() <= kappa)
                .map(move |&m| (s.k, m))
        })
        .collect();

    let verdict = if !unsure.is_empty() {
        unsure.extend(bad);
        Verdict::Inconclusive(unsure)
    } else if !bad.is_empty() {
        Verdict::Degenerate(bad)
    } else {
        Verdict::Nondegenerate
    };
    Ok(SpectrumReport {
        s: gs.s,
        kappa,
        sectors,
        kernel_candidates,
        similarity: kernel.similarity,
        kernel,
        morse_index,
        minima_increasing,
        verdict,
    })
}

/// `V = ν I₂⋆U²`, used when assembling around profiles that are not solves.
pub fn coupled_potential(ctx: &SpectralContext, u: &[f64], nu: f64) -> Result<Vec<f64>> {
    let sq = RadialProfile::new(u.iter().map(|x| x * x).collect(), 0);
    Ok(newton_potential(ctx.grid(), &sq)?.scaled(nu).values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    #[test]
    fn zero_coefficients_leave_shifted_laplacian() {
        let ctx = SpectralContext::new(make_grid(96, 12.0).unwrap());
        let z = vec![0.0; 96];
        for k in 0..=2 {
            let op = SectorOperatorMatrix::from_parts(&ctx, k, 0.8, 1.0, &z, &z, 1.0).unwrap();
            let e = lowest_eigenpairs(&op, 3).unwrap();
            assert!(e.values[0] >= 1.0 - 1e-10, "k={k}: {}", e.values[0]);
            assert!(op.symmetry_defect() <= 1e-10);
            assert!(op.apply(&z).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn eigenpair_count_validation() {
        let ctx = SpectralContext::new(make_grid(64, 8.0).unwrap());
        let z = vec![0.0; 64];
        let op = SectorOperatorMatrix::from_parts(&ctx, 0, 1.0, 1.0, &z, &z, 1.0).unwrap();
        assert!(lowest_eigenpairs(&op, 0).is_err());
        assert!(lowest_eigenpairs(&op, 65).is_err());
    }
}
