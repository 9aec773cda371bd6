//! The rotating-frame quasienergy g(Q,P) and its static geometry.

use serde::Serialize;

use crate::error::{FliplineError, Result};
use crate::params::{ModelParams, WellId};
use crate::poly;

/// g(Q,P) = ¼(Q²+P²−μ)² + ½(P²−Q²) − μ²/4 − α_d Q.
pub fn eval_g(p: &ModelParams, q: f64, pm: f64) -> f64 {
    let r2 = q * q + pm * pm - p.mu;
    0.25 * r2 * r2 + 0.5 * (pm * pm - q * q) - 0.25 * p.mu * p.mu - p.alpha_d * q
}

/// ∂_Q g(Q, 0).
pub fn dg_dq_axis(p: &ModelParams, q: f64) -> f64 {
    q * q * q - (p.mu + 1.0) * q - p.alpha_d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub q: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    DoubleWell,
    SingleWell,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeGeometry {
    pub left: Option<StationaryPoint>,
    pub right: Option<StationaryPoint>,
    pub saddle: Option<StationaryPoint>,
    pub g_c: f64,
    pub q_c: f64,
    pub alpha_b: f64,
    pub regime: Regime,
    /// the documented inequality −1 + 3(|α|/2)^{2/3} < μ < Q_s² + 1
    pub inequality_holds: bool,
    /// (Q_s, 0) is a minimum of g along P, i.e. μ ≤ Q_s² + 1; beyond that it
    /// is a hilltop and the wells connect through off-axis saddles at g_c
    pub saddle_on_axis: bool,
    pub mu: f64,
}

impl LandscapeGeometry {
    pub fn minimum(&self, well: WellId) -> Result<StationaryPoint> {
        let m = match well {
            WellId::Left => self.left,
            WellId::Right => self.right,
        };
        m.ok_or(FliplineError::SingleWellRegime)
    }

    pub fn q_min(&self, well: WellId) -> Result<f64> {
        Ok(self.minimum(well)?.q)
    }

    pub fn g_min(&self, well: WellId) -> Result<f64> {
        Ok(self.minimum(well)?.g)
    }

    pub fn saddle(&self) -> Result<StationaryPoint> {
        self.saddle.ok_or(FliplineError::SingleWellRegime)
    }

    pub fn g_s(&self) -> Result<f64> {
        Ok(self.saddle()?.g)
    }

    pub fn require_double_well(&self) -> Result<()> {
        match self.regime {
            Regime::DoubleWell if self.saddle_on_axis => Ok(()),
            Regime::DoubleWell => Err(FliplineError::DetuningTooLarge { mu: self.mu }),
            Regime::SingleWell => Err(FliplineError::SingleWellRegime),
        }
    }

    pub fn exists(&self, well: WellId) -> bool {
        self.minimum(well).is_ok()
    }
}

/// Minima, saddle, critical quasienergy and regime. In the single-well
/// regime the geometry carries only the surviving minimum; callers that
/// need both wells use `require_double_well`.
pub fn stationary_points(p: &ModelParams) -> Result<LandscapeGeometry> {
    if p.mu > 2.0 {
        return Err(FliplineError::DetuningTooLarge { mu: p.mu });
    }
    let coeffs = [1.0, 0.0, -(p.mu + 1.0), -p.alpha_d];
    let roots = poly::real_roots(&coeffs);
    let (g_c, q_c) = critical_quasienergy(p);
    let alpha_b = if p.mu >= -1.0 { bifurcation_amplitude(p.mu)? } else { 0.0 };
    let point = |q: f64| StationaryPoint { q, g: eval_g(p, q, 0.0) };

    let distinct = roots.len() == 3 && roots[1] - roots[0] > 1e-10 && roots[2] - roots[1] > 1e-10;
    if distinct {
        let (l, s, r) = (point(roots[0]), point(roots[1]), point(roots[2]));
        return Ok(LandscapeGeometry {
            left: Some(l),
            right: Some(r),
            saddle: Some(s),
            g_c,
            q_c,
            alpha_b,
            regime: Regime::DoubleWell,
            inequality_holds: p.double_well_inequality(s.q),
            saddle_on_axis: s.q * s.q + 1.0 - p.mu >= -1e-12,
            mu: p.mu,
        });
    }
    // one real root, or a degenerate pair at the bifurcation: keep the
    // nondegenerate minimum (the one with positive curvature farthest out)
    let q = if p.alpha_d >= 0.0 { *roots.last().unwrap() } else { roots[0] };
    let m = point(q);
    let (left, right) = if q >= 0.0 { (None, Some(m)) } else { (Some(m), None) };
    Ok(LandscapeGeometry {
        left,
        right,
        saddle: None,
        g_c,
        q_c,
        alpha_b,
        regime: Regime::SingleWell,
        inequality_holds: false,
        saddle_on_axis: false,
        mu: p.mu,
    })
}

/// g_c = −¼[(1−μ)² − α_d²], q_c = −α_d/2.
pub fn critical_quasienergy(p: &ModelParams) -> (f64, f64) {
    let one_minus = 1.0 - p.mu;
    (-0.25 * (one_minus * one_minus - p.alpha_d * p.alpha_d), -0.5 * p.alpha_d)
}

/// α_B = 2[(1+μ)/3]^{3/2}; zero at μ = −1 where the well range collapses.
pub fn bifurcation_amplitude(mu: f64) -> Result<f64> {
    if !(mu >= -1.0) {
        return Err(FliplineError::InvalidParameter { name: "mu", reason: format!("{mu} < -1") });
    }
    Ok(2.0 * ((1.0 + mu) / 3.0).powf(1.5))
}

/// Harmonic coefficients (A_P, A_Q) at the bottom of a well.
pub fn harmonic_coefficients(p: &ModelParams, q_min: f64) -> (f64, f64) {
    let q2 = q_min * q_min;
    (q2 - p.mu + 1.0, 3.0 * q2 - p.mu - 1.0)
}

/// Small-vibration frequency √(A_P A_Q) at the bottom of a well.
pub fn omega_at_minimum(p: &ModelParams, well: WellId) -> Result<f64> {
    let geo = stationary_points(p)?;
    let (ap, aq) = harmonic_coefficients(p, geo.q_min(well)?);
    Ok((ap * aq).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pr(mu: f64, a: f64) -> ModelParams {
        ModelParams::classical(mu, a)
    }

    #[test]
    fn origin_is_zero() {
        assert_eq!(eval_g(&pr(0.2, 0.0), 0.0, 0.0), 0.0);
    }

    #[test]
    fn symmetric_minimum_value() {
        for mu in [0.2, 0.5, 1.0, 1.7] {
            let q = (mu + 1.0f64).sqrt();
            assert_relative_eq!(eval_g(&pr(mu, 0.0), q, 0.0), -(mu + 1.0) * (mu + 1.0) / 4.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn biased_right_minimum_below_unbiased() {
        let p = pr(0.5, 0.2);
        let geo = stationary_points(&p).unwrap();
        // independent 1-D minimization by golden section
        let (mut a, mut b) = (0.5, 2.0);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if eval_g(&p, c, 0.0) < eval_g(&p, d, 0.0) {
                b = d
            } else {
                a = c
            }
        }
        let qm = 0.5 * (a + b);
        assert!((geo.q_min(WellId::Right).unwrap() - qm).abs() < 1e-7);
        assert!(geo.g_min(WellId::Right).unwrap() < -(1.5f64 * 1.5) / 4.0);
    }

    #[test]
    fn symmetric_geometry() {
        let geo = stationary_points(&pr(0.2, 0.0)).unwrap();
        assert_eq!(geo.regime, Regime::DoubleWell);
        assert_relative_eq!(geo.q_min(WellId::Right).unwrap(), 1.2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(geo.q_min(WellId::Left).unwrap(), -(1.2f64.sqrt()), max_relative = 1e-14);
        assert!(geo.saddle.unwrap().q.abs() < 1e-14);
        assert!(geo.g_s().unwrap().abs() < 1e-14);
        assert_relative_eq!(geo.g_min(WellId::Left).unwrap(), -0.36, max_relative = 1e-13);
    }

    #[test]
    fn shallow_well_merges_at_bifurcation() {
        let ab = bifurcation_amplitude(0.5).unwrap();
        assert_relative_eq!(ab, 0.5f64.powf(1.5) * 2.0, max_relative = 1e-14);
        assert_relative_eq!(ab, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-14);
        let below = stationary_points(&pr(0.5, ab - 1e-6)).unwrap();
        assert_eq!(below.regime, Regime::DoubleWell);
        let gap = below.saddle.unwrap().q - below.left.unwrap().q;
        assert!(gap > 0.0 && gap < 1e-2);
        let above = stationary_points(&pr(0.5, ab + 1e-6)).unwrap();
        assert_eq!(above.regime, Regime::SingleWell);
        assert!(above.require_double_well().is_err());
        assert!(above.left.is_none());
    }

    #[test]
    fn critical_values() {
        let (gc, qc) = critical_quasienergy(&pr(0.5, 0.2));
        assert_relative_eq!(gc, -0.0525, max_relative = 1e-14);
        assert_eq!(qc, -0.1);
        assert_eq!(critical_quasienergy(&pr(1.0, 0.0)).0, 0.0);
        assert_relative_eq!(critical_quasienergy(&pr(0.2, 0.1)).0, -0.1575, max_relative = 1e-14);
    }

    #[test]
    fn axis_point_must_stay_a_saddle() {
        let geo = stationary_points(&pr(1.2, 0.0)).unwrap();
        assert_eq!(geo.regime, Regime::DoubleWell);
        assert!(matches!(geo.require_double_well(), Err(FliplineError::DetuningTooLarge { .. })));
        // the bias pushes Q_s off the axis origin and restores the saddle
        assert!(stationary_points(&pr(1.2, 0.9)).unwrap().require_double_well().is_ok());
        assert!(stationary_points(&pr(1.0, 0.0)).unwrap().require_double_well().is_ok());
    }

    #[test]
    fn bifurcation_amplitude_values() {
        assert_relative_eq!(bifurcation_amplitude(2.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(bifurcation_amplitude(-1.0).unwrap(), 0.0);
        assert!(bifurcation_amplitude(-1.5).is_err());
    }

    #[test]
    fn rejects_large_detuning() {
        assert!(matches!(stationary_points(&pr(2.5, 0.1)), Err(FliplineError::DetuningTooLarge { .. })));
        // eval_g still accepts it
        assert!(eval_g(&pr(2.5, 0.1), 1.0, 1.0).is_finite());
    }

    #[test]
    fn stationarity_residuals() {
        let p = pr(0.3, 0.17);
        let geo = stationary_points(&p).unwrap();
        for q in [geo.left.unwrap().q, geo.right.unwrap().q, geo.saddle.unwrap().q] {
            assert!(dg_dq_axis(&p, q).abs() < 1e-12);
        }
        assert_eq!(geo.q_c, -0.085);
    }

    #[test]
    fn harmonic_frequency_symmetric() {
        let p = pr(0.2, 0.0);
        assert_relative_eq!(omega_at_minimum(&p, WellId::Right).unwrap(), 4.8f64.sqrt(), max_relative = 1e-13);
    }
}
