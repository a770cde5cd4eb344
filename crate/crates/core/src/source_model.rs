//! Photon-number statistics and single-photon geometry of the
//! phase-randomized two-arm source.
//!
//! Alice's half-interferometer emits a weak coherent pulse of mean `mu` in
//! the short arm and `nu` (after the lossy phase modulator) in the long arm.
//! Once the global phase is randomized the emitted state is diagonal in total
//! photon number with Poisson weights of mean `mu + nu`; only that
//! distribution and the normalized single-photon amplitudes are modeled here.
//!
//! The virtual source rewrites the same emission as a balanced BB84 source
//! with distribution `p̃n` followed by a basis-independent unitary that
//! diverts part of the long-arm single photon into an ancilla flag.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{ModelError, Result};

/// Default photon-number truncation order.
pub const DEFAULT_N_MAX: usize = 64;

/// Default ceiling on the probability mass beyond `n_max`.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-15;

/// Tolerance on a rounding-negative virtual vacuum probability at `mu - nu = 1`.
const VACUUM_ROUNDING: f64 = 1e-14;

/// Short-arm and long-arm intensities of Alice's interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerParams {
    mu: f64,
    nu: f64,
}

impl InterferometerParams {
    /// Validates `0 <= nu <= mu`, `mu > 0` and `mu - nu <= 1`.
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(ModelError::invalid("mu", format!("{mu} must be positive and finite")));
        }
        if !nu.is_finite() || nu < 0.0 {
            return Err(ModelError::invalid("nu", format!("{nu} must be non-negative and finite")));
        }
        if nu > mu {
            return Err(ModelError::NuExceedsMu { mu, nu });
        }
        if mu - nu > 1.0 {
            return Err(ModelError::NegativeVacuum { excess: mu - nu });
        }
        Ok(Self { mu, nu })
    }

    /// Lossless modulator: both arms at `mu`.
    pub fn balanced(mu: f64) -> Result<Self> {
        Self::new(mu, mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Mean photon number entering the channel, `mu + nu`.
    pub fn total_intensity(&self) -> f64 {
        self.mu + self.nu
    }

    pub fn is_balanced(&self) -> bool {
        self.mu == self.nu
    }
}

/// Phase applied by the long-arm modulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisPhase {
    Zero,
    HalfPi,
    Pi,
    ThreeHalfPi,
}

impl BasisPhase {
    pub const ALL: [BasisPhase; 4] = [
        BasisPhase::Zero,
        BasisPhase::HalfPi,
        BasisPhase::Pi,
        BasisPhase::ThreeHalfPi,
    ];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn radians(self) -> f64 {
        std::f64::consts::FRAC_PI_2 * self.index() as f64
    }

    /// `e^{iφ}`, exact for the four allowed phases.
    pub fn phasor(self) -> Complex64 {
        match self {
            BasisPhase::Zero => Complex64::new(1.0, 0.0),
            BasisPhase::HalfPi => Complex64::new(0.0, 1.0),
            BasisPhase::Pi => Complex64::new(-1.0, 0.0),
            BasisPhase::ThreeHalfPi => Complex64::new(0.0, -1.0),
        }
    }
}

/// Single-photon state `amp_short |1>_s + amp_long |1>_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbalancedQubit {
    pub amp_short: Complex64,
    pub amp_long: Complex64,
    pub phase: BasisPhase,
}

impl UnbalancedQubit {
    pub fn norm_sqr(&self) -> f64 {
        self.amp_short.norm_sqr() + self.amp_long.norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &UnbalancedQubit) -> Complex64 {
        self.amp_short.conj() * other.amp_short + self.amp_long.conj() * other.amp_long
    }
}

/// Photon-number distribution truncated at `n_max` with the remaining mass
/// carried in `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonNumberDistribution {
    /// Poisson distribution of the given mean, truncated at `n_max`.
    pub fn poisson(mean: f64, n_max: usize) -> Result<Self> {
        Self::poisson_with_tolerance(mean, n_max, DEFAULT_TAIL_TOLERANCE)
    }

    pub fn poisson_with_tolerance(mean: f64, n_max: usize, tail_tolerance: f64) -> Result<Self> {
        check_mean(mean)?;
        let probs = (0..=n_max).map(|n| pmf_unchecked(mean, n)).collect::<Vec<_>>();
        let tail_mass = poisson_upper_tail(mean, n_max);
        if tail_mass > tail_tolerance {
            return Err(ModelError::Truncation {
                n_max,
                tail_mass,
                tolerance: tail_tolerance,
            });
        }
        Ok(Self { probs, tail_mass })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of exactly `n` photons, zero beyond the truncation order.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// `sum(probs) + tail_mass`.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail_mass
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::invalid("mean", format!("{mean} must be non-negative and finite")))
    }
}

/// Poisson probability `e^{-mean} mean^n / n!`.
pub fn poisson_pmf(mean: f64, n: usize) -> Result<f64> {
    check_mean(mean)?;
    Ok(pmf_unchecked(mean, n))
}

fn pmf_unchecked(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // e^{-mean} stays representable below ~708; the running product then
    // never underflows before the result itself does.
    if mean < 700.0 {
        let mut term = (-mean).exp();
        for k in 1..=n {
            term *= mean / k as f64;
        }
        term
    } else {
        let ln_factorial: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        (-mean + n as f64 * mean.ln() - ln_factorial).exp()
    }
}

/// `P(N > n_max)` summed forward from the first omitted term.
fn poisson_upper_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = pmf_unchecked(mean, n_max + 1);
    let mut sum = 0.0;
    let mut k = n_max + 1;
    loop {
        sum += term;
        k += 1;
        term *= mean / k as f64;
        if term <= sum * f64::EPSILON * 1e-2 || term == 0.0 {
            break;
        }
        if k > n_max + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Photon-number distribution of the real source, Poisson with mean `mu + nu`.
pub fn channel_source_distribution(
    params: &InterferometerParams,
    n_max: usize,
) -> Result<PhotonNumberDistribution> {
    PhotonNumberDistribution::poisson(params.total_intensity(), n_max)
}

/// The four unbalanced single-photon states, selected by `phase`.
pub fn single_photon_state(params: &InterferometerParams, phase: BasisPhase) -> UnbalancedQubit {
    let s = params.total_intensity();
    let short = (params.mu / s).sqrt();
    let long = (params.nu / s).sqrt();
    UnbalancedQubit {
        amp_short: Complex64::new(short, 0.0),
        amp_long: phase.phasor() * long,
        phase,
    }
}

/// Balanced BB84 state `(|1>_s + e^{iφ}|1>_l)/√2` of the virtual source.
pub fn balanced_state(phase: BasisPhase) -> UnbalancedQubit {
    UnbalancedQubit {
        amp_short: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp_long: phase.phasor() * FRAC_1_SQRT_2,
        phase,
    }
}

/// Probability that a virtual-source single photon survives the unitary
/// into the channel, `(mu + nu) / (2 mu)`.
pub fn pass_efficiency_alice(params: &InterferometerParams) -> f64 {
    params.total_intensity() / (2.0 * params.mu)
}

/// Virtual-source distribution: `p̃1 = e^{-s} s / P_suc`,
/// `p̃0 = e^{-s} - e^{-s} (s / P_suc - s)`, `p̃n` Poisson for `n >= 2`.
pub fn virtual_source_distribution(
    params: &InterferometerParams,
    n_max: usize,
) -> Result<PhotonNumberDistribution> {
    if n_max < 1 {
        return Err(ModelError::invalid("n_max", "virtual source needs n_max >= 1"));
    }
    let s = params.total_intensity();
    let p_suc = pass_efficiency_alice(params);
    let mut dist = PhotonNumberDistribution::poisson(s, n_max)?;
    let vacuum = (-s).exp();
    let p1 = vacuum * s / p_suc;
    let mut p0 = vacuum - vacuum * (s / p_suc - s);
    if p0 < 0.0 {
        if p0 < -VACUUM_ROUNDING {
            return Err(ModelError::NegativeVacuum {
                excess: params.mu - params.nu,
            });
        }
        p0 = 0.0;
    }
    dist.probs[0] = p0;
    dist.probs[1] = p1;
    Ok(dist)
}

/// Image of the long-arm single photon under the virtual unitary:
/// `U|1>_l|0>_A = pass |1>_l|0>_A + flag |0>_l|1>_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualUnitaryImage {
    pub pass_amplitude: f64,
    pub flag_amplitude: f64,
}

/// Result of applying the unitary to a single-photon state: the component
/// left in the channel (ancilla in `|0>_A`) and the flagged amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryOutput {
    pub channel: UnbalancedQubit,
    pub flag: Complex64,
}

impl UnitaryOutput {
    /// Norm² of the channel component, the conditional pass probability.
    pub fn pass_probability(&self) -> f64 {
        self.channel.norm_sqr()
    }

    /// Channel component renormalized to a unit vector.
    pub fn conditional_state(&self) -> UnbalancedQubit {
        let norm = self.pass_probability().sqrt();
        UnbalancedQubit {
            amp_short: self.channel.amp_short / norm,
            amp_long: self.channel.amp_long / norm,
            phase: self.channel.phase,
        }
    }
}

impl VirtualUnitaryImage {
    /// Short-arm photons and the long-arm vacuum pass unchanged.
    pub fn apply(&self, state: &UnbalancedQubit) -> UnitaryOutput {
        UnitaryOutput {
            channel: UnbalancedQubit {
                amp_short: state.amp_short,
                amp_long: state.amp_long * self.pass_amplitude,
                phase: state.phase,
            },
            flag: state.amp_long * self.flag_amplitude,
        }
    }
}

/// Amplitudes `(√(nu/mu), √((mu-nu)/mu))` of the virtual unitary.
pub fn virtual_unitary_action(params: &InterferometerParams) -> VirtualUnitaryImage {
    let mu = params.mu;
    VirtualUnitaryImage {
        pass_amplitude: (params.nu / mu).sqrt(),
        flag_amplitude: ((mu - params.nu) / mu).sqrt(),
    }
}
