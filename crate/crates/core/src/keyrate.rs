//! Single-photon rate bounds and the GLLP secure key rate per scenario.
//!
//! Every scenario shares one channel/detector model. They differ in which
//! source distribution feeds the measured gain and QBER, which photon
//! distribution supplies the tagged single photons, and what transmittance
//! a tagged single photon sees:
//!
//! | scenario             | measured source   | Bob pass     | tagged `P1`      | single-photon transmittance          |
//! |----------------------|-------------------|--------------|------------------|--------------------------------------|
//! | `IdealPM`            | Poisson(2μ)       | 1/2          | e^{-2μ} 2μ       | fiber · 1/2 · η_bob                  |
//! | `VirtualSource`      | Poisson(μ+ν)      | ν/(μ+ν)      | p̃1               | P_suc · fiber · ν/(μ+ν) · η_bob      |
//! | `NaiveEveAttenuator` | Poisson(μ+ν)      | ν/(μ+ν)      | e^{-2μ} 2μ       | ν/(2μ) · fiber · η_bob               |
//! | `ActiveCompensation` | Poisson(2μ)       | ν/(2μ)       | e^{-2μ} 2μ       | fiber · ν/(2μ) · η_bob               |
//!
//! With `y0 = 0` and `η_bob = 1` each row's `Q1` reduces to the matching
//! detector-free bound ([`naive_single_photon_rate`] and friends).
//! Multi-photon detections never contribute secret bits.

use std::fmt;
use std::str::FromStr;

use crate::channel::{
    overall_gain_and_qber, pass_efficiency_bob, BobInterferometer, ChannelParams, LinkBudget,
};
use crate::error::{check_probability, ModelError, Result};
use crate::source_model::{
    pass_efficiency_alice, virtual_source_distribution, InterferometerParams,
    PhotonNumberDistribution, DEFAULT_N_MAX,
};

/// Security treatment of the lossy-modulator interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Lossless modulator reference, `nu := mu`.
    IdealPM,
    /// Virtual source followed by the basis-independent unitary.
    VirtualSource,
    /// Long-arm attenuation conceded to the eavesdropper.
    NaiveEveAttenuator,
    /// Matching attenuators added in both short arms.
    ActiveCompensation,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::IdealPM,
        Scenario::VirtualSource,
        Scenario::NaiveEveAttenuator,
        Scenario::ActiveCompensation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::IdealPM => "IdealPM",
            Scenario::VirtualSource => "VirtualSource",
            Scenario::NaiveEveAttenuator => "NaiveEveAttenuator",
            Scenario::ActiveCompensation => "ActiveCompensation",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    /// Accepts the canonical names and the short forms `ideal`, `virtual`,
    /// `naive`, `compensated`, case-insensitively.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "idealpm" | "ideal" => Ok(Scenario::IdealPM),
            "virtualsource" | "virtual" => Ok(Scenario::VirtualSource),
            "naiveeveattenuator" | "naive" => Ok(Scenario::NaiveEveAttenuator),
            "activecompensation" | "compensated" | "compensation" => {
                Ok(Scenario::ActiveCompensation)
            }
            other => Err(format!("unknown scenario '{other}'")),
        }
    }
}

/// Rate breakdown for one scenario at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioRates {
    pub scenario: Scenario,
    pub distance_km: f64,
    pub q_total: f64,
    pub e_total: f64,
    pub q1: f64,
    pub e1: f64,
    /// Secure key rate per pulse, negative beyond the cutoff.
    pub rate: f64,
    pub rate_clamped: f64,
}

/// Binary Shannon entropy, `H2(0) = H2(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_probability("x", x)?;
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn check_fiber(fiber_t: f64) -> Result<()> {
    check_probability("fiber_t", fiber_t)
}

/// Tagged single-photon probability of a Poisson(2μ) source, `e^{-2μ} 2μ`.
fn balanced_single_photon_probability(params: &InterferometerParams) -> f64 {
    let two_mu = 2.0 * params.mu();
    (-two_mu).exp() * two_mu
}

/// Detector-free bound with the modulator loss conceded to Eve:
/// `e^{-2μ} 2μ · fiber · ν/(2μ)`.
pub fn naive_single_photon_rate(params: &InterferometerParams, fiber_t: f64) -> Result<f64> {
    check_fiber(fiber_t)?;
    let attenuation = params.nu() / (2.0 * params.mu());
    Ok(balanced_single_photon_probability(params) * fiber_t * attenuation)
}

/// Detector-free bound from the virtual source:
/// `p̃1 · P_suc · fiber · ν/(μ+ν) = e^{-(μ+ν)} ν · fiber`.
pub fn virtual_single_photon_rate(params: &InterferometerParams, fiber_t: f64) -> Result<f64> {
    check_fiber(fiber_t)?;
    let s = params.total_intensity();
    let p1 = (-s).exp() * s / pass_efficiency_alice(params);
    let p_b = pass_efficiency_bob(params, BobInterferometer::Uncompensated);
    Ok(p1 * pass_efficiency_alice(params) * fiber_t * p_b)
}

/// Detector-free bound with active compensation, `P_A' = 1`,
/// `P_B' = ν/(2μ)`. Identical to [`naive_single_photon_rate`].
pub fn compensated_single_photon_rate(params: &InterferometerParams, fiber_t: f64) -> Result<f64> {
    check_fiber(fiber_t)?;
    let pa_prime = 1.0;
    let pb_prime = pass_efficiency_bob(params, BobInterferometer::Compensated);
    Ok(balanced_single_photon_probability(params) * fiber_t * pa_prime * pb_prime)
}

/// Gain of the virtual-source bound over the naive one, `e^{μ-ν}`.
pub fn improvement_factor(params: &InterferometerParams) -> f64 {
    (params.mu() - params.nu()).exp()
}

/// Detector-free single-photon bound for any scenario. `IdealPM` is the
/// naive expression at `ν = μ`.
pub fn detector_free_bound(
    scenario: Scenario,
    params: &InterferometerParams,
    fiber_t: f64,
) -> Result<f64> {
    match scenario {
        Scenario::IdealPM => {
            naive_single_photon_rate(&InterferometerParams::balanced(params.mu())?, fiber_t)
        }
        Scenario::VirtualSource => virtual_single_photon_rate(params, fiber_t),
        Scenario::NaiveEveAttenuator => naive_single_photon_rate(params, fiber_t),
        Scenario::ActiveCompensation => compensated_single_photon_rate(params, fiber_t),
    }
}

/// Single-photon yield and error rate at their true channel values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonBounds {
    pub y1: f64,
    pub e1: f64,
}

/// `y1 = y0 + eta1`, `e1 = (e0 y0 + e_det eta1) / y1`.
pub fn ideal_decoy_bounds(eta1: f64, ch: &ChannelParams) -> Result<SinglePhotonBounds> {
    check_probability("eta1", eta1)?;
    let y1 = (ch.y0 + eta1).clamp(0.0, 1.0);
    if y1 <= 0.0 {
        return Err(ModelError::UndefinedQber);
    }
    Ok(SinglePhotonBounds {
        y1,
        e1: (ch.e0 * ch.y0 + ch.e_det * eta1) / y1,
    })
}

/// Source, budget and tagging choices of one row of the scenario table.
struct ScenarioSetup {
    source: PhotonNumberDistribution,
    budget: LinkBudget,
    tagged_p1: f64,
    eta1: f64,
}

fn scenario_setup(
    scenario: Scenario,
    params: &InterferometerParams,
    ch: &ChannelParams,
) -> Result<ScenarioSetup> {
    let fiber = ch.fiber_transmittance()?;
    let setup = match scenario {
        Scenario::IdealPM => {
            let ideal = InterferometerParams::balanced(params.mu())?;
            let p_b = pass_efficiency_bob(&ideal, BobInterferometer::Uncompensated);
            let budget = LinkBudget::new(fiber, p_b, ch.eta_bob)?;
            ScenarioSetup {
                source: PhotonNumberDistribution::poisson(ideal.total_intensity(), DEFAULT_N_MAX)?,
                tagged_p1: balanced_single_photon_probability(&ideal),
                eta1: budget.eta_total,
                budget,
            }
        }
        Scenario::VirtualSource => {
            let p_b = pass_efficiency_bob(params, BobInterferometer::Uncompensated);
            let budget = LinkBudget::new(fiber, p_b, ch.eta_bob)?;
            let virtual_source = virtual_source_distribution(params, DEFAULT_N_MAX)?;
            ScenarioSetup {
                source: PhotonNumberDistribution::poisson(params.total_intensity(), DEFAULT_N_MAX)?,
                tagged_p1: virtual_source.prob(1),
                eta1: pass_efficiency_alice(params) * budget.eta_total,
                budget,
            }
        }
        Scenario::NaiveEveAttenuator => {
            let p_b = pass_efficiency_bob(params, BobInterferometer::Uncompensated);
            let budget = LinkBudget::new(fiber, p_b, ch.eta_bob)?;
            let attenuation = params.nu() / (2.0 * params.mu());
            ScenarioSetup {
                source: PhotonNumberDistribution::poisson(params.total_intensity(), DEFAULT_N_MAX)?,
                tagged_p1: balanced_single_photon_probability(params),
                eta1: attenuation * fiber * ch.eta_bob,
                budget,
            }
        }
        Scenario::ActiveCompensation => {
            let p_b = pass_efficiency_bob(params, BobInterferometer::Compensated);
            let budget = LinkBudget::new(fiber, p_b, ch.eta_bob)?;
            ScenarioSetup {
                source: PhotonNumberDistribution::poisson(2.0 * params.mu(), DEFAULT_N_MAX)?,
                tagged_p1: balanced_single_photon_probability(params),
                eta1: budget.eta_total,
                budget,
            }
        }
    };
    Ok(setup)
}

/// GLLP secure key rate under the ideal-decoy assumption:
/// `R = q [ -Q f H2(E) + Q1 (1 - H2(e1)) ]`.
pub fn secure_key_rate(
    scenario: Scenario,
    params: &InterferometerParams,
    ch: &ChannelParams,
) -> Result<ScenarioRates> {
    ch.validate()?;
    let setup = scenario_setup(scenario, params, ch)?;
    let measured = overall_gain_and_qber(&setup.source, &setup.budget, ch)?;
    let single = ideal_decoy_bounds(setup.eta1, ch)?;
    let q1 = setup.tagged_p1 * single.y1;

    let e1_for_entropy = single.e1.clamp(0.0, 0.5);
    let rate = ch.q_sift
        * (-measured.gain * ch.f_ec * binary_entropy(measured.qber)?
            + q1 * (1.0 - binary_entropy(e1_for_entropy)?));

    Ok(ScenarioRates {
        scenario,
        distance_km: ch.distance_km,
        q_total: measured.gain,
        e_total: measured.qber,
        q1,
        e1: single.e1,
        rate,
        rate_clamped: rate.max(0.0),
    })
}
