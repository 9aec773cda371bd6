//! Levels → rates → intrawell distributions → activation energies.

use flipline::{kinetics, landscape, semiclassics, ModelParams, WellId};

fn params(mu: f64, alpha: f64, lambda: f64) -> ModelParams {
    ModelParams::new(mu, alpha, lambda, 1.0).unwrap()
}

#[test]
fn balance_and_integral_slopes_agree_deep_in_the_well() {
    let mut compared = 0;
    for (mu, alpha) in [(0.2, 0.1), (0.2, 0.07), (0.5, 0.2), (1.0, 0.3)] {
        let p = params(mu, alpha, 0.05);
        let geo = landscape::stationary_points(&p).unwrap();
        let gs = geo.g_s().unwrap();
        for well in [WellId::Left, WellId::Right] {
            let lad = semiclassics::quantize_well(&p, well).unwrap();
            let w = semiclassics::transition_rates(&p, &lad).unwrap();
            let d = kinetics::quasistationary_distribution(&p, &lad, &w).unwrap();
            for (k, s) in d.slope_discrepancy.iter().enumerate() {
                let (a, b) = (&lad.levels[k], &lad.levels[k + 1]);
                let clear = |l: &semiclassics::Level| (geo.g_c - l.g).abs() > p.lambda * l.omega;
                if gs - a.g > 2.5 * p.lambda * a.omega && clear(a) && clear(b) {
                    assert!(*s < 0.05, "mu={mu} alpha={alpha} {well:?} n={k}: {s}");
                    compared += 1;
                }
            }
        }
    }
    assert!(compared >= 20, "{compared}");
}

#[test]
fn populations_fall_off_up_the_ladder() {
    for (mu, alpha, lambda) in [(0.2, 0.1, 0.05), (0.5, 0.2, 0.02), (1.0, -0.3, 0.05)] {
        let p = params(mu, alpha, lambda);
        for well in [WellId::Left, WellId::Right] {
            let lad = semiclassics::quantize_well(&p, well).unwrap();
            let w = semiclassics::transition_rates(&p, &lad).unwrap();
            let d = kinetics::quasistationary_distribution(&p, &lad, &w).unwrap();
            assert!((d.rho.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((d.rho_balance.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for pair in d.rho.windows(2) {
                assert!(pair[1] < pair[0], "mu={mu} {well:?}: {:?}", d.rho);
            }
            for pair in d.rho_balance.windows(2) {
                assert!(pair[1] < pair[0], "mu={mu} {well:?}: {:?}", d.rho_balance);
            }
            for pair in d.r_cumulative.windows(2) {
                assert!(pair[1] > pair[0]);
            }
        }
    }
}

#[test]
fn activation_difference_matches_the_two_integrals() {
    for (mu, alpha) in [(0.5, 0.2), (1.0, 0.3), (-0.3, 0.05), (0.2, -0.1)] {
        let p = ModelParams::classical(mu, alpha);
        let right = kinetics::activation_energy(&p, WellId::Right).unwrap();
        let left = kinetics::activation_energy(&p, WellId::Left).unwrap();
        let d = kinetics::delta_activation(&p).unwrap();
        assert!((d - (right - left)).abs() < 1e-8 * right.abs().max(left.abs()), "mu={mu}: {d} vs {}", right - left);
        assert!(d * alpha > 0.0);
        let mirrored = kinetics::delta_activation(&p.with_alpha(-alpha)).unwrap();
        assert!((mirrored + d).abs() < 1e-8 * d.abs());
    }
}

#[test]
fn finite_difference_susceptibility() {
    for mu in [0.5, 1.0] {
        let d = |a: f64| kinetics::delta_activation(&ModelParams::classical(mu, a)).unwrap();
        // odd in α, so d(α)/2α has only even corrections
        let (h1, h2) = (1e-3, 2e-3);
        let fd = (4.0 * d(h1) / (2.0 * h1) - d(h2) / (2.0 * h2)) / 3.0;
        let want = kinetics::log_susceptibility(mu).unwrap();
        assert!((fd / want - 1.0).abs() < 1e-8, "mu={mu}: {fd} vs {want}");
    }
}

#[test]
fn shallow_barrier_near_the_bifurcation() {
    let mu = 0.5;
    let ab = landscape::bifurcation_amplitude(mu).unwrap();
    let mut prev = f64::INFINITY;
    for da in [-0.02, -0.005, -0.001] {
        let p = ModelParams::classical(mu, ab + da);
        let exact = kinetics::activation_energy(&p, WellId::Left).unwrap();
        let closed = kinetics::prebifurcation_activation(mu, da).unwrap();
        let err = (exact / closed - 1.0).abs();
        assert!(err < prev, "da={da}: {err}");
        prev = err;
    }
    assert!(prev < 0.02, "{prev}");
}
