mod common;

use std::f64::consts::PI;

use choquard_core::radial::{differentiate, make_grid, radial_integral, RadialProfile};
use choquard_core::transform::build_sector_transform;
use common::*;

#[test]
fn quadrature_integrates_low_monomials_exactly() {
    // Weights for ∫ f r² dr; checks f = r^p, p = 0, 1, 2 against R^{p+3}/(p+3).
    let g = make_grid(1024, 40.0).unwrap();
    for p in 0..3 {
        let f = RadialProfile::sample(&g, 0, |r| r.powi(p));
        let got = radial_integral(&g, &f).unwrap();
        let exact = 40.0_f64.powi(p + 3) / (p + 3) as f64;
        let rel = (got / exact - 1.0).abs();
        assert!(rel <= 1e-10, "p={p}: relative error {rel:.3e}");
    }
}

#[test]
fn radial_integral_examples() {
    let g = make_grid(1024, 40.0).unwrap();
    let ind = RadialProfile::sample(&g, 0, |r| if r <= 1.0 { 1.0 } else { 0.0 });
    let v = radial_integral(&g, &ind).unwrap();
    assert!((v - 1.0 / 3.0).abs() <= 2.0 * g.h());
    let e = RadialProfile::sample(&g, 0, |r| (-r).exp());
    assert!((radial_integral(&g, &e).unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(radial_integral(&g, &RadialProfile::zeros(1024, 0)).unwrap(), 0.0);
    assert!(radial_integral(&g, &RadialProfile::zeros(1000, 0)).is_err());
}

/// Composite Simpson on [0, 40] with 40000 panels.
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 40000;
    let h = 40.0 / n as f64;
    let mut s = f(0.0) + f(40.0);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn gaussian_transform_shape_and_round_trip() {
    let g = make_grid(1024, 40.0).unwrap();
    let t = build_sector_transform(&g, 0, 6).unwrap();
    let f = gaussian(&g, 0, 0.5);
    let tf = t.forward(&f.values);
    // Oracle: high-resolution quadrature of ∫ e^{-r²/2} j₀(ρr) r² dr.
    for (m, &rho) in g.frequencies().iter().enumerate().step_by(37).take(12) {
        let q = simpson(|r| {
            let x = rho * r;
            let j0 = if x == 0.0 { 1.0 } else { x.sin() / x };
            (-0.5 * r * r).exp() * j0 * r * r
        });
        assert!((tf[m] - q).abs() < 1e-9, "ρ={rho}: {} vs {q}", tf[m]);
        let closed = (PI / 2.0).sqrt() * (-0.5 * rho * rho).exp();
        assert!((tf[m] - closed).abs() < 1e-9);
    }
    let back = t.inverse(&tf);
    assert!(max_abs_diff(&back, &f.values) <= 1e-8);
}

#[test]
fn sector_round_trip_and_parseval() {
    let g = make_grid(1024, 40.0).unwrap();
    for k in 0..=6 {
        let t = build_sector_transform(&g, k, 6).unwrap();
        let f = gaussian(&g, k, 1.0);
        let tf = t.forward(&f.values);
        let back = t.inverse(&tf);
        let rt = max_abs_diff(&back, &f.values) / f.sup_norm();
        assert!(rt <= 1e-6, "k={k}: round trip {rt:.2e}");
        let lhs = g.inner(&f.values, &f.values);
        let rhs = t.frequency_form(&g, &f.values, &vec![1.0; 1024]);
        assert!((lhs - rhs).abs() <= 1e-5 * lhs, "k={k}: Parseval");
    }
}

#[test]
fn sector_beyond_k_max_rejected() {
    let g = make_grid(64, 8.0).unwrap();
    assert!(build_sector_transform(&g, 7, 6).is_err());
    assert!(build_sector_transform(&g, 2, 1).is_err());
}

#[test]
fn derivative_of_exponential() {
    let g = make_grid(1024, 40.0).unwrap();
    let f = RadialProfile::sample(&g, 0, |r| (-r).exp());
    let d = differentiate(&g, &f).unwrap();
    let exact = g.sample(|r| -(-r).exp());
    let err = max_abs_diff(&d.values, &exact);
    assert!(err <= 1e-8 * f.sup_norm(), "err {err:.3e}");
}

fn bump(r: f64, c: f64, w: f64) -> f64 {
    let x = (r - c) / w;
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

#[test]
fn integration_by_parts() {
    let g = make_grid(1024, 40.0).unwrap();
    let pairs = [(5.0, 3.0, 6.0, 4.0), (10.0, 5.0, 8.0, 6.0), (3.0, 2.5, 4.0, 3.5)];
    for (c1, w1, c2, w2) in pairs {
        let f = RadialProfile::sample(&g, 0, |r| bump(r, c1, w1));
        let h = RadialProfile::sample(&g, 0, |r| bump(r, c2, w2));
        let df = differentiate(&g, &f).unwrap();
        let dh = differentiate(&g, &h).unwrap();
        let lhs = g.inner(&df.values, &h.values);
        let div: Vec<f64> = dh
            .values
            .iter()
            .zip(&h.values)
            .zip(g.nodes())
            .map(|((d, v), r)| d + 2.0 * v / r)
            .collect();
        let rhs = -g.inner(&f.values, &div);
        assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }
}
