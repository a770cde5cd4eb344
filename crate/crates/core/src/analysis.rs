//! Distance sweeps, zero-rate distance bisection and intensity optimization.

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::error::{ModelError, Result};
use crate::keyrate::{secure_key_rate, Scenario, ScenarioRates};
use crate::source_model::InterferometerParams;

/// Default bisection tolerance for cutoff distances, km.
pub const DEFAULT_DISTANCE_TOL_KM: f64 = 0.01;

/// Slack allowed when deciding whether `d_max` lies on the step grid.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub d_min_km: f64,
    pub d_max_km: f64,
    pub step_km: f64,
    pub scenarios: Vec<Scenario>,
    pub params: InterferometerParams,
    /// `distance_km` is overridden at each grid point.
    pub channel: ChannelParams,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min_km.is_finite() && self.d_min_km >= 0.0) {
            return Err(ModelError::invalid("d_min_km", format!("{} must be non-negative", self.d_min_km)));
        }
        if !(self.d_max_km.is_finite() && self.d_max_km >= self.d_min_km) {
            return Err(ModelError::invalid(
                "d_max_km",
                format!("{} must be >= d_min_km ({})", self.d_max_km, self.d_min_km),
            ));
        }
        if !(self.step_km.is_finite() && self.step_km > 0.0) {
            return Err(ModelError::invalid("step_km", format!("{} must be positive", self.step_km)));
        }
        if self.scenarios.is_empty() {
            return Err(ModelError::invalid("scenarios", "at least one scenario is required"));
        }
        self.channel.validate()
    }

    /// Inclusive grid `d_min + i step` up to `d_max`.
    pub fn distances(&self) -> Vec<f64> {
        let span = (self.d_max_km - self.d_min_km) / self.step_km;
        let count = (span + GRID_SLACK).floor() as usize;
        (0..=count)
            .map(|i| self.d_min_km + i as f64 * self.step_km)
            .collect()
    }

    /// Scenarios in enumeration order, duplicates removed.
    fn ordered_scenarios(&self) -> Vec<Scenario> {
        let mut scenarios = self.scenarios.clone();
        scenarios.sort();
        scenarios.dedup();
        scenarios
    }
}

/// Rates of one scenario along the distance grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSeries {
    pub scenario: Scenario,
    pub points: Vec<ScenarioRates>,
    /// Bisected zero-rate distance; `None` when the rate never turns
    /// positive or is still positive at `d_max`.
    pub max_distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub series: Vec<ScenarioSeries>,
}

impl SweepResult {
    pub fn get(&self, scenario: Scenario) -> Option<&ScenarioSeries> {
        self.series.iter().find(|s| s.scenario == scenario)
    }

    /// All points, scenario order first, then ascending distance.
    pub fn points(&self) -> impl Iterator<Item = &ScenarioRates> {
        self.series.iter().flat_map(|s| s.points.iter())
    }
}

fn rate_at(
    scenario: Scenario,
    params: &InterferometerParams,
    channel: &ChannelParams,
    distance_km: f64,
) -> Result<ScenarioRates> {
    secure_key_rate(scenario, params, &channel.with_distance(distance_km)).map_err(|source| {
        ModelError::Point {
            scenario,
            distance_km,
            source: Box::new(source),
        }
    })
}

/// Evaluates every scenario on the grid. Grid points are computed in
/// parallel and reassembled in scenario order, then ascending distance.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let distances = config.distances();
    let scenarios = config.ordered_scenarios();

    let mut series = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let points = distances
            .par_iter()
            .map(|&d| rate_at(scenario, &config.params, &config.channel, d))
            .collect::<Result<Vec<_>>>()?;

        let max_distance_km = match points.iter().position(|p| p.rate <= 0.0) {
            Some(i) if i > 0 => Some(max_distance(
                scenario,
                &config.params,
                &config.channel,
                (points[i - 1].distance_km, points[i].distance_km),
                DEFAULT_DISTANCE_TOL_KM,
            )?),
            _ => None,
        };
        series.push(ScenarioSeries {
            scenario,
            points,
            max_distance_km,
        });
    }
    Ok(SweepResult { series })
}

/// Bisects the zero crossing of the secure key rate in `bracket`.
///
/// Requires `rate(lo) > 0 >= rate(hi)`; returns the last distance known to
/// have a positive rate, within `tol_km` of the crossing.
pub fn max_distance(
    scenario: Scenario,
    params: &InterferometerParams,
    channel: &ChannelParams,
    bracket: (f64, f64),
    tol_km: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let bracket_error = |reason: &str| ModelError::Bracket {
        lo: bracket.0,
        hi: bracket.1,
        reason: reason.to_string(),
    };
    if !(tol_km.is_finite() && tol_km > 0.0) {
        return Err(ModelError::invalid("tol_km", format!("{tol_km} must be positive")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0) {
        return Err(bracket_error("endpoints must be finite and non-negative"));
    }
    if lo >= hi {
        return Err(bracket_error("empty bracket"));
    }
    if rate_at(scenario, params, channel, lo)?.rate <= 0.0 {
        return Err(bracket_error("rate is not positive at the lower end"));
    }
    if rate_at(scenario, params, channel, hi)?.rate > 0.0 {
        return Err(bracket_error("rate is still positive at the upper end"));
    }
    while hi - lo > tol_km {
        let mid = 0.5 * (lo + hi);
        if rate_at(scenario, params, channel, mid)?.rate > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Outcome of [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu: f64,
    pub nu: f64,
    /// Unclamped secure key rate at the optimum.
    pub rate: f64,
    /// Set when no intensity in the bracket yields a positive rate.
    pub zero_rate: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximizes the secure key rate over `mu` at fixed distance with
/// `nu = loss_ratio · mu`. Rate is assumed unimodal in `mu`.
pub fn optimize_mu(
    scenario: Scenario,
    loss_ratio: f64,
    channel: &ChannelParams,
    mu_bracket: (f64, f64),
    tol: f64,
) -> Result<MuOptimum> {
    let (lo, hi) = mu_bracket;
    if !(loss_ratio > 0.0 && loss_ratio <= 1.0) {
        return Err(ModelError::invalid("loss_ratio", format!("{loss_ratio} must lie in (0, 1]")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(ModelError::invalid("tol", format!("{tol} must be positive")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(ModelError::Bracket {
            lo,
            hi,
            reason: "need 0 < lo < hi".to_string(),
        });
    }
    // every mu in the bracket must give valid params
    InterferometerParams::new(hi, loss_ratio * hi)?;
    channel.validate()?;

    let rate = |mu: f64| -> Result<f64> {
        let params = InterferometerParams::new(mu, loss_ratio * mu)?;
        Ok(rate_at(scenario, &params, channel, channel.distance_km)?.rate)
    };
    let (mu, best) = golden_section_max(rate, lo, hi, tol)?;
    Ok(MuOptimum {
        mu,
        nu: loss_ratio * mu,
        rate: best,
        zero_rate: best <= 0.0,
    })
}
