use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FliplineError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("single-well regime: the cubic dQ g(Q,0) = 0 has one real root")]
    SingleWellRegime,

    #[error("geometry rejected for mu = {mu}: (Q_s, 0) is no longer a saddle of g (needs mu <= Q_s^2 + 1 and mu <= 2)")]
    DetuningTooLarge { mu: f64 },

    #[error("g = {g} is outside the range of well {sigma}")]
    OutsideWellRange { g: f64, sigma: i8 },

    #[error("|g - g_c| = {distance:e} below the critical cutoff")]
    CriticalPoint { distance: f64 },

    #[error("integration line passes within {distance:e} of a pole")]
    PoleProximity { distance: f64 },

    #[error("localization point: g_c coincides with the minimum of well {sigma}")]
    LocalizationPoint { sigma: i8 },

    #[error("no bound states: lambda/2 = {half_lambda} exceeds I(g_s) = {action_at_saddle}")]
    NoBoundStates { half_lambda: f64, action_at_saddle: f64 },

    #[error("balance operator has {zero_modes} zero modes")]
    NullSpaceDegenerate { zero_modes: usize },

    #[error("truncation N = {dimension} insufficient: tail {tail:e}")]
    TruncationInsufficient { dimension: usize, tail: f64 },

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },
}

impl FliplineError {
    pub(crate) fn numerical(stage: &'static str, detail: impl Into<String>) -> Self {
        FliplineError::Numerical { stage, detail: detail.into() }
    }

    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            FliplineError::InvalidParameter { .. } => "InvalidParameter",
            FliplineError::SingleWellRegime => "SingleWellRegime",
            FliplineError::DetuningTooLarge { .. } => "DetuningTooLarge",
            FliplineError::OutsideWellRange { .. } => "OutsideWellRange",
            FliplineError::CriticalPoint { .. } => "CriticalPoint",
            FliplineError::PoleProximity { .. } => "PoleProximity",
            FliplineError::LocalizationPoint { .. } => "LocalizationPoint",
            FliplineError::NoBoundStates { .. } => "NoBoundStates",
            FliplineError::NullSpaceDegenerate { .. } => "NullSpaceDegenerate",
            FliplineError::TruncationInsufficient { .. } => "TruncationInsufficient",
            FliplineError::Numerical { .. } => "Numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, FliplineError>;
