//! Real- and complex-time trajectories against the orbit data they are
//! built from.

use flipline::landscape;
use flipline::orbits::{self, OrbitData};
use flipline::{Complex64 as C, ModelParams, WellId};

fn cases() -> Vec<(ModelParams, f64)> {
    vec![
        (ModelParams::classical(0.2, 0.1), -0.2),
        (ModelParams::classical(0.2, 0.1), -0.1),
        (ModelParams::classical(0.5, 0.2), -0.2),
        (ModelParams::classical(0.5, 0.2), -0.02),
        (ModelParams::classical(-0.3, 0.05), -0.05),
        (ModelParams::classical(1.0, 0.3), -0.3),
    ]
}

/// Heights in (0, h) that stay clear of every singularity line by `margin`.
fn clear_heights(od: &OrbitData, margin: f64) -> Vec<f64> {
    let h = od.h();
    let lines: Vec<f64> = od.singularities().iter().map(|z| z.im.rem_euclid(h)).collect();
    (1..60)
        .map(|k| h * k as f64 / 60.0)
        .filter(|y| lines.iter().all(|l| (y - l).abs() > margin && (y - l).abs() < h - margin))
        .collect()
}

#[test]
fn quasienergy_is_conserved_along_real_and_complex_time() {
    for (p, g) in cases() {
        let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
        for y in clear_heights(&od, 0.1 * od.tau1).into_iter().step_by(7) {
            let s = orbits::integrate_orbit_in(&p, g, WellId::Right, C::new(0.0, y), 400).unwrap();
            let drift = orbits::energy_drift(&p, g, &s);
            assert!(drift < 1e-9, "mu={} alpha={} g={g} y={y}: drift {drift:e}", p.mu, p.alpha_d);
        }
    }
}

#[test]
fn forward_then_backward_retraces() {
    for (p, g) in cases() {
        let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
        let e = orbits::retrace_error(&p, g, 10.0 * od.tau1).unwrap();
        assert!(e < 1e-8, "mu={} alpha={} g={g}: {e:e}", p.mu, p.alpha_d);
    }
}

#[test]
fn half_period_shift_lands_on_the_other_well() {
    for (p, g) in cases() {
        let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
        let Ok(far) = orbits::orbit_data(&p, g, WellId::Left) else { continue };
        let s = orbits::integrate_orbit_in(&p, g, WellId::Right, od.tau_half, 600).unwrap();
        let im = s.iter().map(|x| x.q.im.abs() + x.p.im.abs()).fold(0.0, f64::max);
        assert!(im < 1e-7, "mu={} g={g}: trajectory leaves the real plane by {im:e}", p.mu);
        let tp = orbits::turning_points(&p, g);
        let (lo, hi) = (tp.q[0].re, tp.q[1].re);
        let (qmin, qmax) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.q.re), b.max(x.q.re)));
        assert!((qmin - lo).abs() < 1e-4 && (qmax - hi).abs() < 1e-4, "{qmin} {qmax} vs [{lo}, {hi}]");
        let i = orbits::action_of_imag_time_in(&p, g, WellId::Right, od.tau_half).unwrap();
        assert!((i - far.action).abs() < 1e-8, "mu={} g={g}: {i} vs {}", p.mu, far.action);
        assert!((far.tau1 - od.tau1).abs() < 1e-7 * od.tau1);
    }
}

#[test]
fn action_steps_across_singularity_lines() {
    for (p, g) in cases() {
        let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
        let h = od.h();
        let step = |z: C| {
            let c = z.im.rem_euclid(h);
            let below = orbits::action_of_imag_time_in(&p, g, WellId::Right, C::new(0.0, c - 0.05 * od.tau1)).unwrap();
            let above = orbits::action_of_imag_time_in(&p, g, WellId::Right, C::new(0.0, c + 0.05 * od.tau1)).unwrap();
            above - below
        };
        let [s1, s2, s3, s4] = od.singularities().map(step);
        let (big, small) = ((p.mu + p.alpha_d) / 2.0, (p.mu - p.alpha_d) / 2.0);
        let msg = format!("mu={} alpha={} g={g}: steps {s1} {s2} {s3} {s4}", p.mu, p.alpha_d);
        assert!((s1 + big).abs() < 1e-8, "{msg}");
        assert!((s2 + small).abs() < 1e-8, "{msg}");
        assert!((s3 - big).abs() < 1e-8, "{msg}");
        assert!((s4 - small).abs() < 1e-8, "{msg}");
        let low = orbits::action_of_imag_time_in(&p, g, WellId::Right, C::new(0.0, 0.3 * od.tau_star.im)).unwrap();
        assert!((low - od.action).abs() < 1e-9, "{msg}");
    }
}

#[test]
fn first_pole_sits_in_the_lower_half_strip() {
    for mu in [-0.5, 0.0, 0.3, 0.7, 1.0] {
        for frac in [0.2, 0.5, 0.8] {
            let p = ModelParams::classical(mu, 0.0);
            let ab = landscape::stationary_points(&p).unwrap().alpha_b;
            let p = p.with_alpha(frac * ab);
            let geo = landscape::stationary_points(&p).unwrap();
            let (lo, hi) = (geo.g_min(WellId::Right).unwrap(), geo.g_s().unwrap());
            for t in [0.1, 0.5, 0.9] {
                let g = lo + t * (hi - lo);
                if (g - geo.g_c).abs() < 1e-6 {
                    continue;
                }
                let od = orbits::orbit_data(&p, g, WellId::Right).unwrap();
                assert!(od.tau_star.im > 0.0 && od.tau_star.im < 0.5 * od.h(), "mu={mu} frac={frac} g={g}: {od:?}");
            }
        }
    }
}

#[test]
fn period_diverges_logarithmically_at_the_separatrix() {
    for (mu, alpha) in [(0.2, 0.1), (0.5, 0.2), (1.0, 0.3)] {
        let p = ModelParams::classical(mu, alpha);
        let geo = landscape::stationary_points(&p).unwrap();
        let s = geo.saddle().unwrap();
        let r2 = s.q * s.q - mu;
        let (gqq, gpp) = (3.0 * s.q * s.q - mu - 1.0, r2 + 1.0);
        let rate = (-gqq * gpp).sqrt();
        for well in [WellId::Left, WellId::Right] {
            let t = |eps: f64| orbits::orbit_data(&p, s.g - eps, well).unwrap().tau1;
            let slope = (t(1e-9) - t(1e-8)) / 10f64.ln();
            assert!((slope * rate - 1.0).abs() < 1e-3, "mu={mu} {well:?}: slope {slope} vs {}", 1.0 / rate);
        }
    }
}
