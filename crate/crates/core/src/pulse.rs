//! Gaussian femtosecond pulse train: envelope, instantaneous Rabi drive and
//! the scalar pulse diagnostics.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::state::DriveSample;

/// A pulse contributes to the field only within this many τ0 of its center.
pub const PULSE_CUTOFF: f64 = 5.0;

/// Minimum ratio of repetition period to pulse width.
pub const MIN_PERIOD_OVER_TAU: f64 = 100.0;

/// Parameters of the driving pulse train, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrainSpec {
    /// On-axis peak Rabi amplitude Ω_peak, rad/s.
    pub peak_rabi: f64,
    /// Temporal 1/e half-width τ0, s.
    pub tau0: f64,
    /// Spatial 1/e half-width W0, m.
    pub w0: f64,
    /// Repetition period T = 1/ν, s.
    pub period: f64,
    /// Number of pulses N.
    pub n_pulses: usize,
    /// Pulse-to-pulse phase shift Δθ, rad.
    pub phase_step: f64,
    /// Carrier angular frequency ω0, rad/s.
    pub carrier: f64,
    /// Fixed carrier phase offset Φ, rad.
    pub carrier_phase: f64,
}

impl PulseTrainSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau0", self.tau0),
            ("w0", self.w0),
            ("period", self.period),
            ("carrier", self.carrier),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.peak_rabi.is_finite() && self.peak_rabi >= 0.0) {
            return Err(Error::invalid(
                "peak_rabi",
                format!("must be finite and >= 0, got {}", self.peak_rabi),
            ));
        }
        if !(self.phase_step.is_finite() && self.carrier_phase.is_finite()) {
            return Err(Error::invalid("phase", "phases must be finite"));
        }
        if self.period < MIN_PERIOD_OVER_TAU * self.tau0 {
            return Err(Error::invalid(
                "period",
                format!(
                    "must be at least {MIN_PERIOD_OVER_TAU}·tau0 ({:e} s), got {:e} s",
                    MIN_PERIOD_OVER_TAU * self.tau0,
                    self.period
                ),
            ));
        }
        Ok(())
    }

    pub fn rep_rate(&self) -> f64 {
        1.0 / self.period
    }

    /// Local peak amplitude at radius `r`.
    pub fn local_peak(&self, r: f64) -> f64 {
        self.peak_rabi * (-(r / self.w0).powi(2)).exp()
    }

    /// Carrier phase accumulated between consecutive pulse centers, reduced
    /// to [-π, π).
    ///
    /// Computed as a fractional cycle count so that the per-pulse phase stays
    /// accurate for pulse indices in the thousands.
    pub fn carrier_slip(&self) -> f64 {
        let cycles = self.carrier * self.period / TAU;
        TAU * (cycles - cycles.round())
    }

    /// Phase of the carrier at the center of pulse `n`, including Δθ and Φ.
    pub fn pulse_phase(&self, n: usize) -> f64 {
        let cycles = self.carrier * self.period / TAU;
        let frac = (n as f64 * (cycles - cycles.round())).rem_euclid(1.0);
        TAU * frac + n as f64 * self.phase_step - self.carrier_phase
    }
}

/// Gaussian envelope g(r, t) = exp(−((r/W0)² + (t/τ0)²)) of a single pulse
/// centered at t = 0.
pub fn envelope(r: f64, t: f64, spec: &PulseTrainSpec) -> f64 {
    (-((r / spec.w0).powi(2) + (t / spec.tau0).powi(2))).exp()
}

/// Instantaneous Rabi drive at radius `r` and global time `t`. The carrier is
/// referenced to global time and pulse `n` adds n·Δθ.
pub fn drive_at(r: f64, t: f64, spec: &PulseTrainSpec) -> DriveSample {
    DriveSample::uniform(rabi_at(r, t, spec))
}

pub(crate) fn rabi_at(r: f64, t: f64, spec: &PulseTrainSpec) -> f64 {
    if spec.n_pulses == 0 {
        return 0.0;
    }
    let reach = PULSE_CUTOFF * spec.tau0;
    let center = (t / spec.period).round();
    let mut total = 0.0;
    for k in [center - 1.0, center, center + 1.0] {
        if k < 0.0 || k >= spec.n_pulses as f64 {
            continue;
        }
        let dt = t - k * spec.period;
        if dt.abs() > reach {
            continue;
        }
        let phase = spec.carrier * t - spec.carrier_phase + k * spec.phase_step;
        total += envelope(r, dt, spec) * phase.cos();
    }
    spec.peak_rabi * total
}

/// Envelope integral of one pulse at radius `r`, carrier excluded:
/// Ω_peak·e^{−(r/W0)²}·τ0·√π.
pub fn pulse_area(spec: &PulseTrainSpec, r: f64) -> f64 {
    spec.local_peak(r) * spec.tau0 * PI.sqrt()
}

/// Average Rabi frequency: one pulse's area divided by the repetition period.
pub fn avg_rabi(spec: &PulseTrainSpec, r: f64) -> f64 {
    pulse_area(spec, r) / spec.period
}

/// Peak amplitude that yields an average Rabi frequency `target_avg` for a
/// pulse width `tau0` and period `period`.
pub fn peak_for_avg(target_avg: f64, tau0: f64, period: f64) -> Result<f64> {
    if !(tau0 > 0.0) {
        return Err(Error::invalid("tau0", format!("must be > 0, got {tau0}")));
    }
    if !(target_avg >= 0.0) {
        return Err(Error::invalid("avg_rabi", format!("must be >= 0, got {target_avg}")));
    }
    Ok(target_avg * period / (tau0 * PI.sqrt()))
}
