#![allow(dead_code)]

use choquard_core::radial::{RadialGrid, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-ball indicator as cell averages: each node carries the fraction of
/// its cell `[r - h/2, r + h/2]` inside `r ≤ 1`.
pub fn ball_indicator(grid: &RadialGrid) -> RadialProfile {
    let h = grid.h();
    let vals = grid
        .nodes()
        .iter()
        .map(|&r| ((1.0 - (r - 0.5 * h)) / h).clamp(0.0, 1.0))
        .collect();
    RadialProfile::new(vals, 0)
}

/// Square root of [`ball_indicator`], so that `u²` carries the cell averages
/// of `χ² = χ`. Used where only `u²` enters.
pub fn ball_indicator_root(grid: &RadialGrid) -> RadialProfile {
    let b = ball_indicator(grid);
    RadialProfile::new(b.values.iter().map(|x| x.sqrt()).collect(), 0)
}

pub fn ball_potential(r: f64) -> f64 {
    if r <= 1.0 {
        0.5 - r * r / 6.0
    } else {
        1.0 / (3.0 * r)
    }
}

pub fn gaussian(grid: &RadialGrid, k: usize, a: f64) -> RadialProfile {
    RadialProfile::sample(grid, k, |r| r.powi(k as i32) * (-a * r * r).exp())
}

/// Smooth random profile `r^k Σ c_i exp(-(r - m_i)² / σ_i²)`, non-negative
/// when `positive` is set.
pub fn random_profile(rng: &mut ChaCha8Rng, grid: &RadialGrid, k: usize, positive: bool) -> RadialProfile {
    let n = 4;
    let terms: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let c = if positive {
                rng.random_range(0.1..1.0)
            } else {
                rng.random_range(-1.0..1.0)
            };
            (c, rng.random_range(0.0..4.0), rng.random_range(0.8..2.0))
        })
        .collect();
    RadialProfile::sample(grid, k, |r| {
        let s: f64 = terms
            .iter()
            .map(|(c, m, sg)| c * (-(r - m) * (r - m) / (sg * sg)).exp())
            .sum();
        r.powi(k as i32) * s
    })
}

/// Band-limited random profile `r^k Σ c_i exp(-a_i r²)`.
pub fn random_smooth_profile(rng: &mut ChaCha8Rng, grid: &RadialGrid, k: usize) -> RadialProfile {
    let terms: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.2..2.0)))
        .collect();
    RadialProfile::sample(grid, k, |r| {
        r.powi(k as i32) * terms.iter().map(|(c, a)| c * (-a * r * r).exp()).sum::<f64>()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Fourth-order centered sector Laplacian `-f'' - 2f'/r + k(k+1) f/r²`,
/// extending `f` to negative `r` by the parity `(-1)^k` of `r^k`. The last two
/// nodes are left at zero.
pub fn fd_sector_laplacian(grid: &RadialGrid, k: usize, f: &[f64]) -> Vec<f64> {
    let h = grid.h();
    let r = grid.nodes();
    let m = f.len();
    let lam = (k * (k + 1)) as f64;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    // index j ∈ [-2, m) with f(-r_j) = sign f(r_j); node -1 mirrors 0, -2 mirrors 1.
    let at = |j: isize| -> f64 {
        if j >= 0 {
            f[j as usize]
        } else {
            sign * f[(-j - 1) as usize]
        }
    };
    let mut out = vec![0.0; m];
    for i in 0..m - 2 {
        let j = i as isize;
        let (a, b, c, d, e) = (at(j - 2), at(j - 1), at(j), at(j + 1), at(j + 2));
        let d2 = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
        let d1 = (a - 8.0 * b + 8.0 * d - e) / (12.0 * h);
        out[i] = -d2 - 2.0 * d1 / r[i] + lam * c / (r[i] * r[i]);
    }
    out
}
