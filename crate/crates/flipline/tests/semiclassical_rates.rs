//! Fourier components of a(t) and the rate tables built from them.

use flipline::orbits;
use flipline::semiclassics::{self, ElementAnchor};
use flipline::{landscape, ModelParams, WellId};

fn params(mu: f64, alpha: f64, lambda: f64) -> ModelParams {
    ModelParams::new(mu, alpha, lambda, 1.0).unwrap()
}

/// Quasienergies spread over the right well, away from g_c.
fn grid(p: &ModelParams) -> Vec<f64> {
    let geo = landscape::stationary_points(p).unwrap();
    let (lo, hi) = (geo.g_min(WellId::Right).unwrap(), geo.g_s().unwrap());
    [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|t| lo + t * (hi - lo))
        .filter(|g| (g - geo.g_c).abs() > 1e-4)
        .collect()
}

#[test]
fn weighted_power_sum_equals_minus_action() {
    for (mu, alpha) in [(0.2, 0.1), (0.5, 0.2), (-0.3, 0.05), (1.0, 0.3)] {
        let p = params(mu, alpha, 0.05);
        for g in grid(&p) {
            let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
            let s: f64 = (-80..=80)
                .filter_map(|m| semiclassics::fourier_from_orbit(&od, m, p.lambda).map(|a| m as f64 * a.norm_sqr()))
                .sum();
            let want = -od.action / p.lambda;
            assert!((s - want).abs() < 1e-8 * want.abs(), "mu={mu} alpha={alpha} g={g}: {s} vs {want}");
        }
    }
}

#[test]
fn components_decay_at_the_pole_heights() {
    for (mu, alpha) in [(0.2, 0.1), (0.5, 0.2), (1.0, 0.3)] {
        let p = params(mu, alpha, 0.05);
        for g in grid(&p) {
            let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
            let a = |m: i32| semiclassics::fourier_by_quadrature(&p, g, m, WellId::Right, 1024).unwrap().norm();
            // deepest pair still well above the quadrature's roundoff floor
            let floor = 1e-9 * a(-1);
            let pair = |dir: i32| {
                let mut m = 2;
                while m < 8 && a(dir * (m + 2)) > floor {
                    m += 1;
                }
                (a(dir * m) / a(dir * (m + 1))).ln()
            };
            let (up, down) = (pair(1), pair(-1));
            let up_want = od.omega * (od.h() - od.tau_star_star.im.max(od.tau_star.im));
            let down_want = od.omega * od.tau_star.im.min(od.tau_star_star.im);
            let msg = format!("mu={mu} g={g}: {up} vs {up_want}, {down} vs {down_want}");
            assert!((up / up_want - 1.0).abs() < 0.05, "{msg}");
            assert!((down / down_want - 1.0).abs() < 0.05, "{msg}");
            assert!(down < up, "{msg}");
        }
    }
}

/// Around a three-level loop the rate products differ only by the second
/// difference of ωR′ over the quasienergies where the elements are taken.
#[test]
fn loop_products_follow_the_exponent_curvature() {
    for (mu, alpha, lambda) in [(0.2, 0.1, 0.025), (0.5, 0.2, 0.02)] {
        let p = params(mu, alpha, lambda);
        let lad = semiclassics::quantize_well(&p, WellId::Right).unwrap();
        let w = semiclassics::transition_rates(&p, &lad).unwrap();
        let at = |n: usize, m: i32| w.entries.iter().find(|e| e.n == n && e.m == m).unwrap().g_eval;
        let exponent = |g: f64| {
            let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
            od.omega * od.r_prime()
        };
        let mut checked = 0;
        for n in 0..lad.len() - 2 {
            let fwd = w.between(n, n + 1) * w.between(n + 1, n + 2) * w.between(n + 2, n);
            let bwd = w.between(n, n + 2) * w.between(n + 2, n + 1) * w.between(n + 1, n);
            // a_1 vanishes linearly at g_c, so a loop through that edge says nothing
            if fwd == 0.0 || bwd == 0.0 {
                continue;
            }
            let want = -(exponent(at(n, 1)) + exponent(at(n + 1, 1)) - 2.0 * exponent(at(n, 2)));
            let got = (fwd / bwd).ln();
            assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "mu={mu} n={n}: {got} vs {want}");
            checked += 1;
        }
        assert!(checked + 2 >= lad.len() - 2, "mu={mu}: only {checked} loops");
    }
}

#[test]
fn rates_are_linear_in_kappa() {
    let p = params(0.2, 0.1, 0.05);
    let lad = semiclassics::quantize_well(&p, WellId::Right).unwrap();
    let w1 = semiclassics::transition_rates(&p, &lad).unwrap();
    let w3 = semiclassics::transition_rates(&p.with_kappa(3.0), &lad).unwrap();
    for (a, b) in w1.entries.iter().zip(&w3.entries) {
        assert_eq!((a.n, a.m), (b.n, b.m));
        assert!((b.rate - 3.0 * a.rate).abs() <= 1e-12 * b.rate.max(1e-300));
    }
}

#[test]
fn downward_transitions_dominate() {
    for anchor in [ElementAnchor::Midpoint, ElementAnchor::Source] {
        for (mu, alpha) in [(0.2, 0.1), (0.5, 0.2), (0.5, -0.2)] {
            let p = params(mu, alpha, 0.05);
            for well in [WellId::Left, WellId::Right] {
                let lad = semiclassics::quantize_well(&p, well).unwrap();
                let w = semiclassics::transition_rates_with(&p, &lad, anchor).unwrap();
                for n in 1..lad.len() - 1 {
                    let (down, up) = (w.between(n, n - 1), w.between(n, n + 1));
                    assert!(down > up, "{anchor:?} mu={mu} alpha={alpha} {well:?} n={n}: {down} <= {up}");
                }
            }
        }
    }
}
