use crate::keyrate::Scenario;

/// Errors raised by the physical model and the numerical drivers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("nu ({nu}) exceeds mu ({mu}); the long arm cannot be brighter than the short arm")]
    NuExceedsMu { mu: f64, nu: f64 },

    #[error("mu - nu = {excess} > 1: virtual source would need a negative vacuum probability")]
    NegativeVacuum { excess: f64 },

    #[error("photon-number truncation at n_max = {n_max} leaves tail mass {tail_mass:e} above tolerance {tolerance:e}")]
    Truncation { n_max: usize, tail_mass: f64, tolerance: f64 },

    #[error("QBER undefined: zero detection probability")]
    UndefinedQber,

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("{scenario} at {distance_km} km: {source}")]
    Point {
        scenario: Scenario,
        distance_km: f64,
        #[source]
        source: Box<ModelError>,
    },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips [`ModelError::Point`] wrappers.
    pub fn root_cause(&self) -> &ModelError {
        match self {
            ModelError::Point { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::invalid(name, format!("{value} is not a probability")))
    }
}
