use serde::{Deserialize, Serialize};

use crate::error::{FliplineError, Result};

/// Numerical knobs shared by all modules. Defaults follow the library's
/// documented tolerances; the CLI can override any of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// absolute residual accepted for polynomial roots
    pub root: f64,
    /// relative tolerance of adaptive quadratures
    pub quad_rel: f64,
    /// |g - g_c| below which the critical point is signalled
    pub critical: f64,
    /// relative floor under which rates are zeroed
    pub rate_floor: f64,
    /// largest |m| kept in rate tables
    pub m_max: usize,
    /// window for |alpha_d/lambda - m| resonance detection
    pub resonance_window: f64,
    /// largest Fock dimension the oracle may use
    pub max_dimension: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: 1e-12,
            quad_rel: 1e-10,
            critical: 1e-9,
            rate_floor: 1e-12,
            m_max: 12,
            resonance_window: 1e-6,
            max_dimension: 1500,
        }
    }
}

/// The four dimensionless control parameters of the rotating-frame problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub alpha_d: f64,
    pub lambda: f64,
    pub kappa: f64,
    #[serde(skip)]
    pub tol: Tolerances,
}

impl ModelParams {
    pub fn new(mu: f64, alpha_d: f64, lambda: f64, kappa: f64) -> Result<Self> {
        let p = Self { mu, alpha_d, lambda, kappa, tol: Tolerances::default() };
        p.validate()?;
        Ok(p)
    }

    /// Classical-only parameters (lambda and kappa set to 1).
    pub fn classical(mu: f64, alpha_d: f64) -> Self {
        Self { mu, alpha_d, lambda: 1.0, kappa: 1.0, tol: Tolerances::default() }
    }

    pub fn with_alpha(mut self, alpha_d: f64) -> Self {
        self.alpha_d = alpha_d;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(FliplineError::InvalidParameter { name, reason: format!("{v} is not finite") })
            }
        };
        finite("mu", self.mu)?;
        finite("alpha_d", self.alpha_d)?;
        finite("lambda", self.lambda)?;
        finite("kappa", self.kappa)?;
        if self.lambda <= 0.0 {
            return Err(FliplineError::InvalidParameter { name: "lambda", reason: "must be > 0".into() });
        }
        if self.kappa <= 0.0 {
            return Err(FliplineError::InvalidParameter { name: "kappa", reason: "must be > 0".into() });
        }
        Ok(())
    }

    /// Documented double-well inequality −1 + 3(|α_d|/2)^{2/3} < μ < Q_s² + 1.
    /// Regime detection itself is done by root counting in `landscape`.
    pub fn double_well_inequality(&self, q_s: f64) -> bool {
        let lower = -1.0 + 3.0 * (self.alpha_d.abs() / 2.0).powf(2.0 / 3.0);
        lower < self.mu && self.mu < q_s * q_s + 1.0
    }
}

/// Which well: σ = −1 for Q < 0, σ = +1 for Q > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WellId {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Deep,
    Shallow,
    Symmetric,
}

impl WellId {
    pub fn from_sigma(sigma: i8) -> Self {
        if sigma < 0 {
            WellId::Left
        } else {
            WellId::Right
        }
    }

    pub fn sigma(self) -> i8 {
        match self {
            WellId::Left => -1,
            WellId::Right => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            WellId::Left => WellId::Right,
            WellId::Right => WellId::Left,
        }
    }

    /// For α_d > 0 the deeper minimum sits at Q > 0.
    pub fn role(self, alpha_d: f64) -> Role {
        if alpha_d == 0.0 {
            Role::Symmetric
        } else if (alpha_d > 0.0) == (self == WellId::Right) {
            Role::Deep
        } else {
            Role::Shallow
        }
    }

    pub fn deep(alpha_d: f64) -> Self {
        if alpha_d >= 0.0 {
            WellId::Right
        } else {
            WellId::Left
        }
    }

    pub fn shallow(alpha_d: f64) -> Self {
        Self::deep(alpha_d).other()
    }
}
