//! Fiber, Bob-side interferometer and threshold-detector model.
//!
//! Bob's interferometer loss enters as a single multiplicative pass
//! efficiency, so a photon reaching the detector has survived
//! `fiber × p_b × eta_bob`. Double clicks count as detections with a random
//! bit.

use crate::error::{check_probability, ModelError, Result};
use crate::source_model::{InterferometerParams, PhotonNumberDistribution};

/// Fiber loss of the GYS link, dB/km.
pub const GYS_ALPHA_DB_PER_KM: f64 = 0.21;
/// Bob's detection efficiency in the GYS setup.
pub const GYS_ETA_BOB: f64 = 0.045;
/// Dark-count yield per pulse in the GYS setup.
pub const GYS_Y0: f64 = 1.7e-6;
/// Optical misalignment error in the GYS setup.
pub const GYS_E_DET: f64 = 0.033;
/// Dark counts produce random bits.
pub const DARK_COUNT_ERROR: f64 = 0.5;
/// Constant error-correction inefficiency.
pub const DEFAULT_F_EC: f64 = 1.22;
/// Basis-sifting factor of symmetric BB84.
pub const DEFAULT_Q_SIFT: f64 = 0.5;

/// Channel, detector and post-processing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub alpha_db_per_km: f64,
    pub distance_km: f64,
    pub eta_bob: f64,
    pub y0: f64,
    pub e_det: f64,
    pub e0: f64,
    /// Error-correction inefficiency `f`.
    pub f_ec: f64,
    /// Sifting factor `q`.
    pub q_sift: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::gys()
    }
}

impl ChannelParams {
    /// GYS fiber/detector figures at zero distance.
    pub fn gys() -> Self {
        Self {
            alpha_db_per_km: GYS_ALPHA_DB_PER_KM,
            distance_km: 0.0,
            eta_bob: GYS_ETA_BOB,
            y0: GYS_Y0,
            e_det: GYS_E_DET,
            e0: DARK_COUNT_ERROR,
            f_ec: DEFAULT_F_EC,
            q_sift: DEFAULT_Q_SIFT,
        }
    }

    pub fn with_distance(mut self, distance_km: f64) -> Self {
        self.distance_km = distance_km;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km > 0.0) {
            return Err(ModelError::invalid(
                "alpha_db_per_km",
                format!("{} must be positive", self.alpha_db_per_km),
            ));
        }
        if !(self.distance_km.is_finite() && self.distance_km >= 0.0) {
            return Err(ModelError::invalid(
                "distance_km",
                format!("{} must be non-negative", self.distance_km),
            ));
        }
        check_probability("eta_bob", self.eta_bob)?;
        check_probability("y0", self.y0)?;
        check_probability("e_det", self.e_det)?;
        check_probability("e0", self.e0)?;
        check_probability("q_sift", self.q_sift)?;
        if !(self.f_ec.is_finite() && self.f_ec >= 1.0) {
            return Err(ModelError::invalid("f_ec", format!("{} must be >= 1", self.f_ec)));
        }
        Ok(())
    }

    pub fn fiber_transmittance(&self) -> Result<f64> {
        fiber_transmittance(self.alpha_db_per_km, self.distance_km)
    }
}

/// Which arms of Bob's interferometer carry the extra attenuator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobInterferometer {
    /// Only the long arms are lossy: `P_B = nu / (mu + nu)`.
    Uncompensated,
    /// Matching attenuator in both short arms: `P_B' = nu / (2 mu)`.
    Compensated,
}

/// Transmittance budget seen by one channel photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub fiber_transmittance: f64,
    pub p_b: f64,
    pub eta_total: f64,
}

impl LinkBudget {
    pub fn new(fiber_transmittance: f64, p_b: f64, eta_bob: f64) -> Result<Self> {
        check_probability("fiber_transmittance", fiber_transmittance)?;
        check_probability("p_b", p_b)?;
        check_probability("eta_bob", eta_bob)?;
        Ok(Self {
            fiber_transmittance,
            p_b,
            eta_total: fiber_transmittance * p_b * eta_bob,
        })
    }
}

/// `10^{-alpha l / 10}`.
pub fn fiber_transmittance(alpha_db_per_km: f64, distance_km: f64) -> Result<f64> {
    if !(alpha_db_per_km.is_finite() && alpha_db_per_km > 0.0) {
        return Err(ModelError::invalid(
            "alpha_db_per_km",
            format!("{alpha_db_per_km} must be positive"),
        ));
    }
    if !(distance_km.is_finite() && distance_km >= 0.0) {
        return Err(ModelError::invalid(
            "distance_km",
            format!("{distance_km} must be non-negative"),
        ));
    }
    Ok(10f64.powf(-alpha_db_per_km * distance_km / 10.0))
}

pub fn pass_efficiency_bob(params: &InterferometerParams, arms: BobInterferometer) -> f64 {
    match arms {
        BobInterferometer::Uncompensated => params.nu() / params.total_intensity(),
        BobInterferometer::Compensated => params.nu() / (2.0 * params.mu()),
    }
}

/// `1 - (1 - eta)^n`, the probability that at least one of `n` photons clicks.
fn click_probability(eta: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else if eta >= 1.0 {
        1.0
    } else {
        -(n as f64 * (-eta).ln_1p()).exp_m1()
    }
}

/// Yield of an `n`-photon pulse, `y0 + 1 - (1 - eta)^n` clamped to `[0, 1]`.
pub fn yield_n(eta_total: f64, y0: f64, n: usize) -> Result<f64> {
    check_probability("eta_total", eta_total)?;
    check_probability("y0", y0)?;
    Ok((y0 + click_probability(eta_total, n)).clamp(0.0, 1.0))
}

/// Overall gain and QBER of a source distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainQber {
    pub gain: f64,
    pub qber: f64,
}

/// Sums `p_n Y_n` and `p_n (e0 y0 + e_det (1 - (1-eta)^n))` over photon number.
///
/// The per-`n` yields are summed unclamped and the total gain is clamped, so
/// a Poisson input reproduces `y0 + 1 - e^{-eta s}` exactly. The tail mass is
/// charged at order `n_max + 1`.
pub fn overall_gain_and_qber(
    dist: &PhotonNumberDistribution,
    budget: &LinkBudget,
    ch: &ChannelParams,
) -> Result<GainQber> {
    check_probability("y0", ch.y0)?;
    check_probability("e_det", ch.e_det)?;
    check_probability("e0", ch.e0)?;
    let eta = budget.eta_total;
    let mut clicks = 0.0;
    let mut mass = 0.0;
    for (n, p) in dist.probs().iter().enumerate() {
        clicks += p * click_probability(eta, n);
        mass += p;
    }
    clicks += dist.tail_mass() * click_probability(eta, dist.n_max() + 1);
    mass += dist.tail_mass();

    let gain = (ch.y0 * mass + clicks).clamp(0.0, 1.0);
    if gain <= 0.0 {
        return Err(ModelError::UndefinedQber);
    }
    let errors = ch.e0 * ch.y0 * mass + ch.e_det * clicks;
    Ok(GainQber {
        gain,
        qber: (errors / gain).clamp(0.0, 1.0),
    })
}
