//! The instanton distribution R(g), quasistationary populations, quantum
//! activation energies, logarithmic susceptibility, prebifurcation scaling
//! and switching-rate estimates.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{FliplineError, Result};
use crate::landscape;
use crate::markov;
use crate::orbits;
use crate::params::{ModelParams, WellId};
use crate::quad::{integrate_real, QuadOptions};
use crate::semiclassics::{LevelLadder, RateTable};

/// Upper limit of u in g = g_c ± e^{−u}.
const U_MAX: f64 = 20.0;

/// R′(g) = 2 Im(τ_p^(2) − τ* − τ**) on the deep-well orbit.
pub fn r_prime(p: &ModelParams, g: f64) -> Result<f64> {
    let geo = landscape::stationary_points(p)?;
    let deep = WellId::deep(p.alpha_d);
    let well = if geo.exists(deep) { deep } else { deep.other() };
    r_prime_in(p, g, well)
}

/// R′(g) computed from the orbit in `well` (the value does not depend on it).
pub fn r_prime_in(p: &ModelParams, g: f64, well: WellId) -> Result<f64> {
    Ok(orbits::orbit_data(p, g, well)?.r_prime())
}

/// 2(A_P A_Q)^{−1/2} log[(√A_P + √A_Q)/|√A_P − √A_Q|].
pub fn r_prime_harmonic(a_p: f64, a_q: f64) -> f64 {
    let (sp, sq) = (a_p.sqrt(), a_q.sqrt());
    2.0 / (sp * sq) * ((sp + sq) / (sp - sq).abs()).ln()
}

/// Limit of R′ at the bottom of a well.
pub fn r_prime_at_minimum(p: &ModelParams, well: WellId) -> Result<f64> {
    let geo = landscape::stationary_points(p)?;
    let (a_p, a_q) = landscape::harmonic_coefficients(p, geo.q_min(well)?);
    let (sp, sq) = (a_p.sqrt(), a_q.sqrt());
    if (sp - sq).abs() <= 1e-9 * (sp + sq) {
        return Err(FliplineError::LocalizationPoint { sigma: well.sigma() });
    }
    Ok(r_prime_harmonic(a_p, a_q))
}

/// Integrand wrapper that records the first error and stops evaluating
/// (returning zeros) once one has occurred.
fn guarded<'a>(
    failure: &'a RefCell<Option<FliplineError>>,
    f: impl Fn(f64) -> Result<f64> + 'a,
) -> impl FnMut(f64) -> f64 + 'a {
    move |x| {
        if failure.borrow().is_some() {
            return 0.0;
        }
        match f(x) {
            Ok(v) => v,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions { rel: 1e-10, abs: 1e-13, max_intervals: 2000 }
}

/// ∫_a^b R′ dg with a smooth integrand (g_c outside the interval).
fn smooth_piece(p: &ModelParams, well: WellId, a: f64, b: f64) -> Result<f64> {
    let failure = RefCell::new(None);
    let (v, _, ok) = integrate_real(
        guarded(&failure, |g| r_prime_in(p, g, well)),
        a,
        b,
        quad_opts(),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !ok {
        return Err(FliplineError::numerical("R' quadrature", format!("[{a}, {b}]")));
    }
    Ok(v)
}

/// ∫ R′ dg over the interval between g_c and `far` (sign of far − g_c sets
/// the side), with g = g_c ± e^{−u} and an analytic tail beyond u = U_MAX
/// where R′ ≈ A u + B.
fn log_piece(p: &ModelParams, well: WellId, gc: f64, far: f64) -> Result<f64> {
    let dist = (far - gc).abs();
    let dir = (far - gc).signum();
    let u0 = -dist.ln();
    if u0 >= U_MAX - 1.0 {
        // sliver within ~e^{−19} of g_c: bounded by dist·|R′| and dropped
        return Ok(0.0);
    }
    let at = |u: f64| r_prime_in(p, gc + dir * (-u).exp(), well);
    let failure = RefCell::new(None);
    let (v, _, ok) = integrate_real(
        guarded(&failure, |u| Ok(at(u)? * (-u).exp())),
        u0,
        U_MAX,
        quad_opts(),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !ok {
        return Err(FliplineError::numerical("R' quadrature", "near g_c"));
    }
    Ok(v + tail_beyond(at(U_MAX - 2.0)?, at(U_MAX - 1.0)?, at(U_MAX)?))
}

/// ∫_{U_MAX}^∞ R′ e^{−u} du from R′ at U_MAX − 2, U_MAX − 1, U_MAX with the
/// model R′ ≈ C e^{κu} + D (0 ≤ κ < 1): κ → 0 is the logarithmic divergence
/// R′ ≈ A u + B, κ > 0 a power law |g − g_c|^{−κ} (degenerate saddle).
fn tail_beyond(r0: f64, r1: f64, r2: f64) -> f64 {
    let (d1, d2) = (r1 - r0, r2 - r1);
    let e = (-U_MAX).exp();
    let ratio = d2 / d1;
    if d1 * d2 > 0.0 && ratio > 1.0 + 1e-3 && ratio < std::f64::consts::E {
        let kappa = ratio.ln();
        let c = d2 / (1.0 - (-kappa).exp());
        let d = r2 - c;
        e * (c / (1.0 - kappa) + d)
    } else {
        e * (r2 + d2)
    }
}

/// ∫_a^b R′(g) dg along the orbits of `well`, handling the logarithmic
/// singularity at g_c.
pub fn integrate_rprime(p: &ModelParams, well: WellId, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate_rprime(p, well, b, a)?);
    }
    let (gc, _) = landscape::critical_quasienergy(p);
    let eps = 10.0 * p.tol.critical;
    if (gc - a).abs() <= eps {
        log_piece(p, well, gc, b)
    } else if (gc - b).abs() <= eps {
        log_piece(p, well, gc, a)
    } else if gc > a && gc < b {
        Ok(log_piece(p, well, gc, a)? + log_piece(p, well, gc, b)?)
    } else {
        smooth_piece(p, well, a, b)
    }
}

/// R_A(σ) = ∫_{g_min(σ)}^{g_s} R′(g) dg.
pub fn activation_energy(p: &ModelParams, well: WellId) -> Result<f64> {
    let geo = landscape::stationary_points(p)?;
    geo.require_double_well()?;
    integrate_rprime(p, well, geo.g_min(well)?, geo.g_s()?)
}

/// R_A(+1) − R_A(−1) = ∫_{g_min(+1)}^{g_min(−1)} R′ dg, i.e. R_A(deep) −
/// R_A(shallow) for α_d > 0; odd in α_d.
pub fn delta_activation(p: &ModelParams) -> Result<f64> {
    let geo = landscape::stationary_points(p)?;
    geo.require_double_well()?;
    let deep = WellId::deep(p.alpha_d);
    integrate_rprime(p, deep, geo.g_min(WellId::Right)?, geo.g_min(WellId::Left)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionProfile {
    pub well: WellId,
    /// (g_n, R′(g_n)) at the levels
    pub samples: Vec<(f64, f64)>,
    /// R(g_n) = ∫_{g_min}^{g_n} R′ dg
    pub r_cumulative: Vec<f64>,
    /// ρ_n = C_w exp(−R(g_n)/λ), normalised to unit sum
    pub rho: Vec<f64>,
    pub normalization: f64,
    /// stationary vector of the intrawell balance equation, unit sum
    pub rho_balance: Vec<f64>,
    /// |slope_balance / slope_integral − 1| for each consecutive pair, where
    /// slope = Δ ln ρ / Δg
    pub slope_discrepancy: Vec<f64>,
    pub max_slope_discrepancy: f64,
}

/// R′ at g, averaged across g_c when g falls within the critical cutoff.
fn r_prime_sample(p: &ModelParams, g: f64, well: WellId) -> Result<f64> {
    match r_prime_in(p, g, well) {
        Err(FliplineError::CriticalPoint { .. }) => {
            let (gc, _) = landscape::critical_quasienergy(p);
            let d = 10.0 * p.tol.critical;
            Ok(0.5 * (r_prime_in(p, gc - d, well)? + r_prime_in(p, gc + d, well)?))
        }
        r => r,
    }
}

/// Quasistationary intrawell populations from the R′ integral and,
/// independently, from the null vector of the intrawell balance equation.
pub fn quasistationary_distribution(
    p: &ModelParams,
    ladder: &LevelLadder,
    rates: &RateTable,
) -> Result<DistributionProfile> {
    if ladder.well != rates.well || ladder.len() != rates.size {
        return Err(FliplineError::InvalidParameter { name: "rates", reason: "does not match the ladder".into() });
    }
    let well = ladder.well;
    r_prime_at_minimum(p, well)?;
    let geo = landscape::stationary_points(p)?;
    let gmin = geo.g_min(well)?;
    let gs: Vec<f64> = ladder.energies();
    let samples = gs.iter().map(|&g| Ok((g, r_prime_sample(p, g, well)?))).collect::<Result<Vec<_>>>()?;
    let mut r_cum = Vec::with_capacity(gs.len());
    let mut acc = integrate_rprime(p, well, gmin, gs[0])?;
    r_cum.push(acc);
    for w in gs.windows(2) {
        acc += integrate_rprime(p, well, w[0], w[1])?;
        r_cum.push(acc);
    }
    let weights: Vec<f64> = r_cum.iter().map(|r| (-(r - r_cum[0]) / p.lambda).exp()).collect();
    let total: f64 = weights.iter().sum();
    let rho: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let normalization = (-r_cum[0] / p.lambda).exp() / total;
    let rho_balance: Vec<f64> = markov::stationary(&rates.rate_matrix())?.iter().copied().collect();
    let mut slope_discrepancy = Vec::new();
    for k in 0..gs.len().saturating_sub(1) {
        let dg = gs[k + 1] - gs[k];
        let s_int = -(r_cum[k + 1] - r_cum[k]) / (p.lambda * dg);
        let s_bal = (rho_balance[k + 1].ln() - rho_balance[k].ln()) / dg;
        slope_discrepancy.push(if s_bal.is_finite() { (s_bal / s_int - 1.0).abs() } else { f64::INFINITY });
    }
    let max_slope_discrepancy = slope_discrepancy.iter().copied().fold(0.0, f64::max);
    Ok(DistributionProfile {
        well,
        samples,
        r_cumulative: r_cum,
        rho,
        normalization,
        rho_balance,
        slope_discrepancy,
        max_slope_discrepancy,
    })
}

/// R_A^(1)(μ) = ½ log[(μ+2+2√(1+μ))/(μ+2−2√(1+μ))].
pub fn log_susceptibility(mu: f64) -> Result<f64> {
    if !(mu > -1.0) || mu.abs() < 0.05 {
        return Err(FliplineError::InvalidParameter {
            name: "mu",
            reason: format!("{mu}: susceptibility needs μ > −1 and |μ| ≥ 0.05"),
        });
    }
    let s = (1.0 + mu).sqrt();
    Ok(0.5 * ((mu + 2.0 + 2.0 * s) / (mu + 2.0 - 2.0 * s)).ln())
}

/// √(μ+1) · R′(g_min) of the unbiased problem; equals `log_susceptibility`.
pub fn susceptibility_from_minimum(mu: f64) -> Result<f64> {
    let p = ModelParams::classical(mu, 0.0);
    Ok((mu + 1.0).sqrt() * r_prime_at_minimum(&p, WellId::Right)?)
}

/// R_A^shallow ≈ 8/(2−μ) |δα|^{3/2} / [3(1+μ)]^{1/4} near the bifurcation.
pub fn prebifurcation_activation(mu: f64, delta_alpha: f64) -> Result<f64> {
    if !(mu > -1.0 && mu < 2.0) {
        return Err(FliplineError::InvalidParameter { name: "mu", reason: format!("{mu} outside (−1, 2)") });
    }
    if !(delta_alpha < 0.0) || delta_alpha.abs() >= landscape::bifurcation_amplitude(mu)? {
        return Err(FliplineError::InvalidParameter {
            name: "delta_alpha",
            reason: format!("{delta_alpha}: needs −α_B < δα < 0"),
        });
    }
    Ok(8.0 / (2.0 - mu) * delta_alpha.abs().powf(1.5) / (3.0 * (1.0 + mu)).powf(0.25))
}

/// R′ = 2M/N with M the area inside the orbit and N = ½∬∇²g over it;
/// the P-integral of ∇²g/2 = 2(Q²+P²) − μ is done in closed form.
pub fn area_formula_rprime(p: &ModelParams, g: f64, well: WellId) -> Result<f64> {
    let prof = orbits::well_profile(p, g, well)?;
    let opts = QuadOptions::rel(1e-12);
    let (m, _, ok1) = prof.integrate(|x| 2.0 * x.sign * x.p * x.dq, opts);
    let (n, _, ok2) = prof.integrate(
        |x| 2.0 * x.sign * (2.0 * x.q * x.q * x.p + 2.0 / 3.0 * x.p.powi(3) - p.mu * x.p) * x.dq,
        opts,
    );
    if !(ok1 && ok2) {
        return Err(FliplineError::numerical("area formula", format!("g = {g}")));
    }
    Ok(2.0 * m / n)
}

/// Shallow-well activation energy from the area formula, ∫ 2M/N dg.
pub fn area_formula_activation(p: &ModelParams) -> Result<f64> {
    let geo = landscape::stationary_points(p)?;
    geo.require_double_well()?;
    let sh = WellId::shallow(p.alpha_d);
    let (a, b) = (geo.g_min(sh)?, geo.g_s()?);
    let failure = RefCell::new(None);
    let (v, _, _) = integrate_real(
        guarded(&failure, |g| area_formula_rprime(p, g, sh)),
        a,
        b,
        QuadOptions::rel(1e-9),
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Integers m with |α_d − mλ| within the resonance window.
pub fn resonance_offsets(p: &ModelParams) -> Vec<i64> {
    let x = p.alpha_d / p.lambda;
    ((x.floor() as i64 - 1)..=(x.ceil() as i64 + 1))
        .filter(|&m| (p.alpha_d - m as f64 * p.lambda).abs() < p.tol.resonance_window)
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ActivationResult {
    pub r_a_left: f64,
    pub r_a_right: f64,
    /// R_A(+1) − R_A(−1)
    pub delta_r_a: f64,
    /// (R_A(+1) − R_A(−1))/λ: log of the population ratio w(+1)/w(−1)
    pub population_ratio_exponent: f64,
    pub switching_exponent_left: f64,
    pub switching_exponent_right: f64,
    /// κ; order of magnitude only
    pub prefactor_estimate: f64,
}

impl ActivationResult {
    pub fn r_a(&self, well: WellId) -> f64 {
        match well {
            WellId::Left => self.r_a_left,
            WellId::Right => self.r_a_right,
        }
    }
}

pub fn activation_result(p: &ModelParams) -> Result<ActivationResult> {
    let r_a_left = activation_energy(p, WellId::Left)?;
    let r_a_right = activation_energy(p, WellId::Right)?;
    let delta_r_a = delta_activation(p)?;
    Ok(ActivationResult {
        r_a_left,
        r_a_right,
        delta_r_a,
        population_ratio_exponent: delta_r_a / p.lambda,
        switching_exponent_left: r_a_left / p.lambda,
        switching_exponent_right: r_a_right / p.lambda,
        prefactor_estimate: p.kappa,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SwitchingEstimate {
    pub well: WellId,
    /// κ exp(−R_A/λ)
    pub rate: f64,
    /// R_A/λ
    pub exponent: f64,
    /// κ, an order-of-magnitude placeholder
    pub prefactor: f64,
    pub prefactor_is_order_of_magnitude: bool,
}

/// W_sw(σ) ≈ κ exp(−R_A(σ)/λ) for both wells (left, right).
pub fn switching_rate_estimate(p: &ModelParams) -> Result<[SwitchingEstimate; 2]> {
    let est = |well: WellId| -> Result<SwitchingEstimate> {
        let exponent = activation_energy(p, well)? / p.lambda;
        Ok(SwitchingEstimate {
            well,
            rate: p.kappa * (-exponent).exp(),
            exponent,
            prefactor: p.kappa,
            prefactor_is_order_of_magnitude: true,
        })
    };
    Ok([est(WellId::Left)?, est(WellId::Right)?])
}

/// Mean drift of the action out of level n, Σ_m λm W_{n,n+m}, per level.
pub fn action_drift(ladder: &LevelLadder, rates: &RateTable) -> Vec<f64> {
    (0..ladder.len())
        .map(|n| {
            rates
                .entries
                .iter()
                .filter(|e| e.n == n)
                .map(|e| ladder.lambda * e.m as f64 * e.rate)
                .sum()
        })
        .collect()
}
