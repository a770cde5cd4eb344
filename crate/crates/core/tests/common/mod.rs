//! Closed-form rate oracle shared by the integration tests.
//!
//! Everything here is written from the Poisson closed forms
//! (`Q = y0 + 1 - e^{-eta s}`, `E Q = e0 y0 + e_det (1 - e^{-eta s})`,
//! `p̃1 = 2 mu e^{-(mu+nu)}`) and never calls into the library's rate path.

#![allow(dead_code)]

use umzi_qkd::{ChannelParams, Scenario};

pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// `(q_total, e_total, q1, e1, rate)` from closed forms.
pub fn closed_form(scenario: Scenario, mu: f64, nu: f64, ch: &ChannelParams, l: f64) -> [f64; 5] {
    let fiber = 10f64.powf(-ch.alpha_db_per_km * l / 10.0);
    let eb = ch.eta_bob;
    // (mean photon number, per-photon transmittance, tagged P1, eta1)
    let (s, eta, p1, eta1) = match scenario {
        Scenario::IdealPM => {
            let eta = fiber * 0.5 * eb;
            (2.0 * mu, eta, 2.0 * mu * (-2.0 * mu).exp(), eta)
        }
        Scenario::VirtualSource => (
            mu + nu,
            fiber * nu / (mu + nu) * eb,
            2.0 * mu * (-(mu + nu)).exp(),
            nu / (2.0 * mu) * fiber * eb,
        ),
        Scenario::NaiveEveAttenuator => (
            mu + nu,
            fiber * nu / (mu + nu) * eb,
            2.0 * mu * (-2.0 * mu).exp(),
            nu / (2.0 * mu) * fiber * eb,
        ),
        Scenario::ActiveCompensation => {
            let eta = fiber * nu / (2.0 * mu) * eb;
            (2.0 * mu, eta, 2.0 * mu * (-2.0 * mu).exp(), eta)
        }
    };
    let detected = -(-eta * s).exp_m1();
    let q = ch.y0 + detected;
    let e = (ch.e0 * ch.y0 + ch.e_det * detected) / q;
    let y1 = ch.y0 + eta1;
    let e1 = (ch.e0 * ch.y0 + ch.e_det * eta1) / y1;
    let q1 = p1 * y1;
    let rate = ch.q_sift * (-q * ch.f_ec * h2(e) + q1 * (1.0 - h2(e1.min(0.5))));
    [q, e, q1, e1, rate]
}

pub fn closed_form_rate(scenario: Scenario, mu: f64, nu: f64, ch: &ChannelParams, l: f64) -> f64 {
    closed_form(scenario, mu, nu, ch, l)[4]
}

/// Last positive-rate distance on a uniform scan of `[lo, hi]`.
pub fn scan_cutoff(scenario: Scenario, mu: f64, nu: f64, ch: &ChannelParams, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let n = ((hi - lo) / step).round() as usize;
    let mut last = None;
    for i in 0..=n {
        let d = lo + i as f64 * step;
        if closed_form_rate(scenario, mu, nu, ch, d) > 0.0 {
            last = Some(d);
        } else if last.is_some() {
            break;
        }
    }
    last
}

/// Coarse-then-dense (0.001 km) scan for the zero-rate distance.
pub fn dense_cutoff(scenario: Scenario, mu: f64, nu: f64, ch: &ChannelParams) -> f64 {
    let coarse = scan_cutoff(scenario, mu, nu, ch, 0.0, 400.0, 1.0).expect("rate positive at 0 km");
    scan_cutoff(scenario, mu, nu, ch, coarse, coarse + 1.0, 0.001).unwrap()
}
