mod common;

use std::sync::OnceLock;

use choquard_core::extension::*;
use choquard_core::ground_state::{solve_fixed_point, to_qstar, SolveConfig};
use choquard_core::potential::SpectralContext;
use choquard_core::radial::{make_grid, RadialProfile};
use choquard_core::Error;
use nalgebra::DMatrix;

fn ctx() -> &'static SpectralContext {
    static C: OnceLock<SpectralContext> = OnceLock::new();
    C.get_or_init(|| SpectralContext::new(make_grid(1024, 40.0).unwrap()))
}

fn hp() -> HalfPlaneGrid {
    HalfPlaneGrid::standard(ctx().grid()).unwrap()
}

fn gauss(a: f64) -> RadialProfile {
    RadialProfile::sample(ctx().grid(), 0, |r| (-a * r * r).exp())
}

#[test]
fn d_s_reference_values() {
    assert_eq!(d_s_constant(0.5).unwrap(), 1.0);
    let want = 2f64.sqrt() * libm::tgamma(0.75) / libm::tgamma(0.25);
    assert!((d_s_constant(0.75).unwrap() - 0.47799).abs() < 1e-5);
    assert!((d_s_constant(0.75).unwrap() / want - 1.0).abs() < 1e-12);
    assert!(d_s_constant(0.999).unwrap() < 0.01);
    assert!(matches!(d_s_constant(1.0), Err(Error::Config(_))));
}

#[test]
fn zero_trace_gives_zero_field() {
    let z = RadialProfile::zeros(1024, 0);
    let e = solve_extension(&z, 0.6, &hp()).unwrap();
    assert!(e.values.iter().all(|&x| x == 0.0));
    let d = dtn_compare(ctx(), &z, 0.6, &hp()).unwrap();
    assert_eq!(d.flux.sup_norm(), 0.0);
    assert_eq!(d.spectral.sup_norm(), 0.0);
}

#[test]
fn trace_is_exact_and_residual_small() {
    for &s in &[0.3, 0.5, 0.9] {
        let u = gauss(0.5);
        let e = solve_extension(&u, s, &hp()).unwrap();
        assert!(e.values.row(0).iter().zip(&u.values).all(|(a, b)| a == b));
        assert!(e.residual <= 1e-9, "s={s}: {:.2e}", e.residual);
    }
}

#[test]
fn harmonic_extension_energy_at_half() {
    let e = energy_identity(ctx(), &gauss(0.5), 0.5, &hp()).unwrap();
    assert!(e.rel_err <= 0.02, "{e:?}");
}

#[test]
fn energy_identity_battery() {
    let profiles = [
        gauss(0.5),
        gauss(1.0),
        RadialProfile::sample(ctx().grid(), 0, |r| (1.0 + r * r) * (-0.4 * r * r).exp()),
    ];
    for &s in &[0.4, 0.75, 0.9] {
        for (i, u) in profiles.iter().enumerate() {
            let e = energy_identity(ctx(), u, s, &hp()).unwrap();
            assert!(e.rel_err <= 0.02, "s={s} profile {i}: {e:?}");
        }
    }
}

#[test]
fn extension_minimizes_weighted_energy() {
    let grid = hp();
    let s = 0.7;
    let e = solve_extension(&gauss(0.5), s, &grid).unwrap();
    let base = dirichlet_energy(&grid, s, &e.values).unwrap();
    assert!((base / e.energy - 1.0).abs() <= 1e-10);
    let t = grid.t_nodes();
    let r = ctx().grid().nodes();
    let bump = DMatrix::from_fn(t.len(), r.len(), |i, j| {
        let x = ((t[i] - 2.0) / 1.5).powi(2) + ((r[j] - 3.0) / 2.0).powi(2);
        if x < 1.0 && i > 0 {
            (-1.0 / (1.0 - x)).exp()
        } else {
            0.0
        }
    });
    for eps in [1e-3, -1e-3, 1e-1] {
        let perturbed = &e.values + &bump * eps;
        assert!(dirichlet_energy(&grid, s, &perturbed).unwrap() > base);
    }
}

#[test]
fn dtn_flux_matches_spectral_operator() {
    for &s in &[0.5, 0.75, 0.9] {
        let d = dtn_compare(ctx(), &gauss(0.5), s, &hp()).unwrap();
        assert!(d.rel_err <= 0.02, "s={s}: {:.3e}", d.rel_err);
    }
}

#[test]
fn ground_state_boundary_system() {
    let gs = solve_fixed_point(ctx(), &SolveConfig::default(), 0.9).unwrap();
    let q = to_qstar(ctx(), &gs).unwrap();
    let res = boundary_system_residual(ctx(), &q, &hp()).unwrap();
    assert!(res <= 0.03, "{res:.3e}");
    assert!(matches!(
        boundary_system_residual(ctx(), &gs, &hp()),
        Err(Error::Normalization(_))
    ));
}

/// `M_t` sequence with `γ = 2`: each step halves `t₁ = T_max / M_t²`.
const HALVING: [usize; 5] = [64, 91, 128, 181, 256];

fn t1_halves(a: usize, b: usize) -> bool {
    let r = (b as f64 / a as f64).powi(2);
    (r - 2.0).abs() < 0.03
}

#[test]
fn grading_refinement_reduces_dtn_error() {
    for &s in &[0.5, 0.75, 0.9] {
        let errs: Vec<f64> = HALVING
            .iter()
            .map(|&m| {
                let g = HalfPlaneGrid::new(ctx().grid(), m, 2.0, 40.0).unwrap();
                dtn_compare(ctx(), &gauss(0.5), s, &g).unwrap().rel_err
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "s={s}: {errs:?}");
    }
}

#[test]
fn grading_refinement_converges_in_t() {
    assert!(HALVING.windows(2).all(|w| t1_halves(w[0], w[1])));
    let g = ctx().grid();
    for &s in &[0.3, 0.5, 0.75, 0.9] {
        let u = gauss(0.5);
        let reference = consistent_fractional_laplacian(&u, s, &hp()).unwrap();
        let d = d_s_constant(s).unwrap();
        let errs: Vec<f64> = HALVING
            .iter()
            .map(|&m| {
                let grid = HalfPlaneGrid::new(g, m, 2.0, 40.0).unwrap();
                let e = solve_extension(&u, s, &grid).unwrap();
                let diff: Vec<f64> = e.flux.iter().zip(&reference.values).map(|(f, r)| d * f - r).collect();
                g.norm(&diff) / g.norm(&reference.values)
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < 0.6 * w[0]), "s={s}: {errs:?}");
    }
}

#[test]
fn invalid_inputs_rejected() {
    let u = gauss(0.5);
    assert!(solve_extension(&u, 1.0, &hp()).is_err());
    assert!(solve_extension(&RadialProfile::new(u.values.clone(), 1), 0.5, &hp()).is_err());
    let other = SpectralContext::new(make_grid(512, 40.0).unwrap());
    assert!(matches!(
        dtn_compare(&other, &RadialProfile::zeros(512, 0), 0.5, &hp()),
        Err(Error::GridMismatch { .. })
    ));
}
