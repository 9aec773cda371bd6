//! Bohr–Sommerfeld levels of each well and the dissipative transition rates
//! W_{n,n+m} = 2κ|a_m|² built from the Fourier components of a(t) = (P − iQ)/√(2λ).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FliplineError, Result};
use crate::landscape;
use crate::orbits::{self, OrbitData};
use crate::params::{ModelParams, WellId};

type C = Complex64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Level {
    pub n: usize,
    pub g: f64,
    pub action: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelLadder {
    pub well: WellId,
    pub lambda: f64,
    pub levels: Vec<Level>,
}

impl LevelLadder {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.g).collect()
    }
}

/// Offset below g_s at which the saddle action is evaluated.
fn saddle_margin(g_s: f64) -> f64 {
    1e-10 * (1.0 + g_s.abs())
}

/// Quasienergy window (g_min, g_s) of a well in the double-well regime.
pub fn well_window(p: &ModelParams, well: WellId) -> Result<(f64, f64)> {
    let geo = landscape::stationary_points(p)?;
    geo.require_double_well()?;
    Ok((geo.g_min(well)?, geo.g_s()?))
}

/// I(g) for the orbit in `well`.
pub fn action(p: &ModelParams, g: f64, well: WellId) -> Result<f64> {
    Ok(orbits::action_and_period(p, g, well)?.0)
}

/// Action of the orbit just below the saddle.
pub fn saddle_action(p: &ModelParams, well: WellId) -> Result<f64> {
    let (_, gs) = well_window(p, well)?;
    action(p, gs - saddle_margin(gs), well)
}

/// Inverts I(g) = target on (g_min, g_s) by safeguarded Newton iteration
/// using I′(g) = 1/ω(g).
pub fn g_of_action(p: &ModelParams, well: WellId, target: f64) -> Result<f64> {
    let (gmin, gs) = well_window(p, well)?;
    let (mut lo, mut hi) = (gmin, gs - saddle_margin(gs));
    let i_hi = action(p, hi, well)?;
    if !(target > 0.0 && target < i_hi) {
        return Err(FliplineError::InvalidParameter {
            name: "action",
            reason: format!("{target} outside (0, {i_hi})"),
        });
    }
    // harmonic initial guess
    let om0 = landscape::omega_at_minimum(p, well)?;
    let mut g = (gmin + target * om0).min(0.5 * (lo + hi)).max(lo);
    for _ in 0..200 {
        let (i, _, om) = orbits::action_and_period(p, g, well)?;
        let f = i - target;
        if f > 0.0 {
            hi = g;
        } else {
            lo = g;
        }
        if f.abs() <= 1e-14 * target.max(1e-3) || hi - lo <= 4.0 * f64::EPSILON * g.abs().max(1e-3) {
            return Ok(g);
        }
        let newton = g - f * om;
        g = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(FliplineError::numerical("bohr-sommerfeld", format!("no convergence for I = {target}")))
}

/// Levels g_n with I(g_n) = λ(n + ½) below the saddle.
pub fn quantize_well(p: &ModelParams, well: WellId) -> Result<LevelLadder> {
    let i_s = saddle_action(p, well)?;
    if p.lambda / 2.0 >= i_s {
        return Err(FliplineError::NoBoundStates { half_lambda: p.lambda / 2.0, action_at_saddle: i_s });
    }
    let count = ((i_s / p.lambda) - 0.5).floor() as usize + 1;
    let levels = (0..count)
        .into_par_iter()
        .map(|n| {
            let target = p.lambda * (n as f64 + 0.5);
            let g = g_of_action(p, well, target)?;
            let (i, _, om) = orbits::action_and_period(p, g, well)?;
            Ok(Level { n, g, action: i, omega: om })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelLadder { well, lambda: p.lambda, levels })
}

/// a_m = iω Σ_p r_p e^{−imφ_p} / (1 − e^{−imφ_p^(2)}) with residues
/// r(τ*) = −1/√(2λ), r(τ**) = +1/√(2λ) and φ = ωτ; poles are those of the
/// orbit anchored in the requested well.
pub fn fourier_from_orbit(od: &OrbitData, m: i32, lambda: f64) -> Option<C> {
    if m == 0 {
        return None;
    }
    let i = C::new(0.0, 1.0);
    let mf = m as f64;
    let phase = |tau: C| (-i * mf * od.omega * tau).exp();
    // for m > 0 multiply through by e^{imφ_p^(2)} so no factor grows
    let (num, den) = if m < 0 {
        (phase(od.tau_star) - phase(od.tau_star_star), 1.0 - phase(od.tau2))
    } else {
        (phase(od.tau_star - od.tau2) - phase(od.tau_star_star - od.tau2), phase(-od.tau2) - 1.0)
    };
    if den.norm() < 1e-10 {
        return None;
    }
    Some(-i * od.omega / (2.0 * lambda).sqrt() * num / den)
}

/// Fourier component a_m(g) of a(t) on the orbit in `well`, with
/// a(t) = Σ_m a_m e^{imωt} and t = 0 at the well's inner turning point.
/// The mean value (m = 0) and any resonant denominator fall back to direct
/// quadrature over the real trajectory.
pub fn fourier_matrix_element(p: &ModelParams, g: f64, m: i32, well: WellId) -> Result<C> {
    let od = orbits::orbit_data(p, g, well)?;
    match fourier_from_orbit(&od, m, p.lambda) {
        Some(a) => Ok(a),
        None => fourier_by_quadrature(p, g, m, well, 256),
    }
}

/// a_m by trapezoidal quadrature of a(t)e^{−imωt} over n samples of one
/// real period (spectrally accurate for the analytic periodic integrand).
pub fn fourier_by_quadrature(p: &ModelParams, g: f64, m: i32, well: WellId, n: usize) -> Result<C> {
    let samples = orbits::integrate_orbit_in(p, g, well, C::new(0.0, 0.0), n)?;
    let (_, _, om) = orbits::action_and_period(p, g, well)?;
    let i = C::new(0.0, 1.0);
    let scale = 1.0 / (2.0 * p.lambda).sqrt();
    let sum: C = samples
        .iter()
        .map(|s| (s.p - i * s.q) * scale * (-i * m as f64 * om * s.t.re).exp())
        .sum();
    Ok(sum / n as f64)
}

/// Quasienergy at which ⟨n+m|â|n⟩ is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum ElementAnchor {
    /// I = λ(n + m/2 + ½), symmetric between the two levels
    #[default]
    Midpoint,
    /// g_n of the source level
    Source,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateEntry {
    pub n: usize,
    pub m: i32,
    /// quasienergy used for a_m
    pub g_eval: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub well: WellId,
    pub m_max: i32,
    pub kappa: f64,
    pub anchor: ElementAnchor,
    pub size: usize,
    /// sorted by (n, m)
    pub entries: Vec<RateEntry>,
}

impl RateTable {
    /// W_{n, n+m}; zero when absent or floored.
    pub fn rate(&self, n: usize, m: i32) -> f64 {
        self.entries
            .binary_search_by(|e| (e.n, e.m).cmp(&(n, m)))
            .map(|k| self.entries[k].rate)
            .unwrap_or(0.0)
    }

    /// W from level `from` to level `to`.
    pub fn between(&self, from: usize, to: usize) -> f64 {
        self.rate(from, to as i32 - from as i32)
    }

    /// Dense rate matrix, entry (i, j) = W from level i to level j.
    pub fn rate_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut w = nalgebra::DMatrix::<f64>::zeros(self.size, self.size);
        for e in &self.entries {
            w[(e.n, (e.n as i64 + e.m as i64) as usize)] = e.rate;
        }
        w
    }
}

/// Transition rates between the levels of a ladder, midpoint anchored.
pub fn transition_rates(p: &ModelParams, ladder: &LevelLadder) -> Result<RateTable> {
    transition_rates_with(p, ladder, ElementAnchor::Midpoint)
}

pub fn transition_rates_with(p: &ModelParams, ladder: &LevelLadder, anchor: ElementAnchor) -> Result<RateTable> {
    if ladder.is_empty() {
        return Err(FliplineError::InvalidParameter { name: "ladder", reason: "empty".into() });
    }
    let size = ladder.len();
    let m_max = p.tol.m_max as i32;
    let well = ladder.well;
    // orbit data on the half-integer action grid j ↦ λ(j/2 + ½)
    let keys: Vec<usize> = match anchor {
        ElementAnchor::Midpoint => (0..2 * size - 1).collect(),
        ElementAnchor::Source => (0..size).map(|n| 2 * n).collect(),
    };
    let orbits_at: Vec<(usize, f64, Vec<OrbitData>)> = keys
        .par_iter()
        .map(|&j| {
            let g = if j % 2 == 0 {
                ladder.levels[j / 2].g
            } else {
                g_of_action(p, well, ladder.lambda * (j as f64 / 2.0 + 0.5))?
            };
            Ok((j, g, orbits_near(p, g, well)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let lookup = |j: usize| orbits_at.iter().find(|(k, _, _)| *k == j).unwrap();
    let mut entries = Vec::new();
    for n in 0..size {
        for m in -m_max..=m_max {
            let to = n as i64 + m as i64;
            if m == 0 || to < 0 || to >= size as i64 {
                continue;
            }
            let j = match anchor {
                ElementAnchor::Midpoint => (2 * n as i64 + m as i64) as usize,
                ElementAnchor::Source => 2 * n,
            };
            let (_, g, ods) = lookup(j);
            let mut rate = 0.0;
            for od in ods {
                let a = match fourier_from_orbit(od, m, p.lambda) {
                    Some(a) => a,
                    None => fourier_by_quadrature(p, od.g, m, well, 256)?,
                };
                rate += 2.0 * p.kappa * a.norm_sqr() / ods.len() as f64;
            }
            entries.push(RateEntry { n, m, g_eval: *g, rate });
        }
    }
    let top = entries.iter().map(|e| e.rate).fold(0.0, f64::max);
    for e in entries.iter_mut() {
        if e.rate < p.tol.rate_floor * top {
            e.rate = 0.0;
        }
    }
    entries.sort_by_key(|a| (a.n, a.m));
    Ok(RateTable { well, m_max, kappa: p.kappa, anchor, size, entries })
}

/// Orbit data at g, or on both sides of g_c when g falls within the
/// critical cutoff (the elements are continuous there while the periods
/// are not defined).
fn orbits_near(p: &ModelParams, g: f64, well: WellId) -> Result<Vec<OrbitData>> {
    match orbits::orbit_data(p, g, well) {
        Ok(od) => Ok(vec![od]),
        Err(FliplineError::CriticalPoint { .. }) => {
            let (gc, _) = landscape::critical_quasienergy(p);
            let delta = 10.0 * p.tol.critical;
            Ok(vec![orbits::orbit_data(p, gc - delta, well)?, orbits::orbit_data(p, gc + delta, well)?])
        }
        Err(e) => Err(e),
    }
}

/// W_{n−m,n}/W_{n+m,n} at equal g: exp(2m Im(φ** + φ* − φ_p^(2))) = exp(−mωR′).
pub fn detailed_balance_ratio(p: &ModelParams, g: f64, m: i32, well: WellId) -> Result<f64> {
    if m == 0 {
        return Ok(1.0);
    }
    let od = orbits::orbit_data(p, g, well)?;
    Ok(balance_from_orbit(&od, m))
}

pub fn balance_from_orbit(od: &OrbitData, m: i32) -> f64 {
    let im = od.tau_star_star.im + od.tau_star.im - od.tau2.im;
    (2.0 * m as f64 * od.omega * im).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pr(mu: f64, a: f64, lambda: f64) -> ModelParams {
        ModelParams::new(mu, a, lambda, 1.0).unwrap()
    }

    #[test]
    fn ladder_satisfies_quantization() {
        let p = pr(0.2, 0.1, 0.05);
        let lad = quantize_well(&p, WellId::Right).unwrap();
        let (_, gs) = well_window(&p, WellId::Right).unwrap();
        for (k, l) in lad.levels.iter().enumerate() {
            assert_relative_eq!(l.action, 0.05 * (k as f64 + 0.5), max_relative = 1e-10);
            assert!(l.g < gs);
            if k > 0 {
                assert!(l.g > lad.levels[k - 1].g);
            }
        }
    }

    #[test]
    fn harmonic_ground_level() {
        let p = pr(0.2, 0.1, 0.002);
        let lad = quantize_well(&p, WellId::Right).unwrap();
        let geo = landscape::stationary_points(&p).unwrap();
        let om = landscape::omega_at_minimum(&p, WellId::Right).unwrap();
        let g0 = geo.g_min(WellId::Right).unwrap() + 0.001 * om;
        // the harmonic estimate is off by O(λ²)
        assert!((lad.levels[0].g - g0).abs() < 0.002 * 0.002);
    }

    #[test]
    fn level_counts_follow_action_offset() {
        let p = pr(0.2, 0.1, 0.05);
        let deep = quantize_well(&p, WellId::Right).unwrap();
        let shallow = quantize_well(&p, WellId::Left).unwrap();
        assert_eq!(deep.len() as i64 - shallow.len() as i64, 2);
        let i_s = saddle_action(&p, WellId::Right).unwrap();
        assert!((deep.len() as f64 - i_s / 0.05).abs() <= 1.0);
    }

    #[test]
    fn no_bound_states() {
        let p = pr(0.2, 0.1, 5.0);
        assert!(matches!(quantize_well(&p, WellId::Left), Err(FliplineError::NoBoundStates { .. })));
    }

    #[test]
    fn residue_formula_matches_trajectory_quadrature() {
        let p = pr(0.2, 0.1, 0.05);
        for well in [WellId::Right, WellId::Left] {
            for m in [-2, -1, 1, 2, 3] {
                let a = fourier_matrix_element(&p, -0.2, m, well).unwrap();
                let b = fourier_by_quadrature(&p, -0.2, m, well, 256).unwrap();
                assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()), "{well:?} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn detailed_balance_matches_quotient() {
        let p = pr(0.2, 0.1, 0.05);
        for g in [-0.3, -0.12, -0.05] {
            for m in 1..=3 {
                let up = fourier_matrix_element(&p, g, m, WellId::Right).unwrap().norm_sqr();
                let down = fourier_matrix_element(&p, g, -m, WellId::Right).unwrap().norm_sqr();
                let r = detailed_balance_ratio(&p, g, m, WellId::Right).unwrap();
                assert_relative_eq!(up / down, r, max_relative = 1e-8);
                assert!(r < 1.0);
            }
        }
        assert_eq!(detailed_balance_ratio(&p, -0.2, 0, WellId::Right).unwrap(), 1.0);
    }

    #[test]
    fn rates_scale_with_kappa_and_favour_relaxation() {
        let p = pr(0.2, 0.1, 0.05);
        let lad = quantize_well(&p, WellId::Right).unwrap();
        let t1 = transition_rates(&p, &lad).unwrap();
        let t2 = transition_rates(&p.with_kappa(3.0), &lad).unwrap();
        for (a, b) in t1.entries.iter().zip(&t2.entries) {
            assert!(a.rate >= 0.0);
            assert_relative_eq!(b.rate, 3.0 * a.rate, max_relative = 1e-12);
        }
        for n in 1..lad.len() - 1 {
            assert!(t1.rate(n, -1) > t1.rate(n, 1));
        }
    }
}
