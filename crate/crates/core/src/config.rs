//! Run configuration files.
//!
//! A config is a TOML document with one table per concern. Physical inputs
//! use lab units (MHz, fs, μm, rad/fs); everything is converted to SI when a
//! [`Scenario`] is built. See `docs/config.md` for the full schema.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{BruteForceOptions, Frame, IntegrationPolicy};
use crate::pulse::{peak_for_avg, PulseTrainSpec};
use crate::state::{DecayRates, DensityMatrix, LevelScheme, C64};
use crate::sweep::{AmplitudeMode, DopplerSpec, Scenario};

pub const HZ_PER_MHZ: f64 = 1e6;
/// Length and time conversions divide by these, which keeps decimal
/// inputs such as 50 μm exact.
pub const FS_PER_S: f64 = 1e15;
pub const UM_PER_M: f64 = 1e6;
/// rad/fs → rad/s.
pub const RAD_PER_S_PER_RAD_PER_FS: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Single,
    VelocitySweep,
    RadialSweep,
    RepRate,
    Oracle,
}

/// Level scheme, either as comb indices n_ij relative to the train's
/// repetition frequency or as absolute transition frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n21: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n41: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n43: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f21_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f41_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f43_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub gamma41: f64,
    pub gamma42: f64,
    pub gamma31: f64,
    pub gamma32: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub rep_rate_mhz: f64,
    pub pulses: usize,
    pub tau0_fs: f64,
    pub w0_um: f64,
    /// On-axis peak Rabi amplitude. Exactly one of this and `avg_rabi_per_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_rabi_rad_per_fs: Option<f64>,
    /// On-axis average Rabi frequency area/T, rad/s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_rabi_per_s: Option<f64>,
    #[serde(default)]
    pub phase_step_rad: f64,
    #[serde(default)]
    pub carrier_phase_rad: f64,
    /// Carrier as a comb index, ω0 = 2π·carrier_n·ν. Defaults to resonance
    /// with the rest-frame |1⟩→|4⟩ transition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_n: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default)]
    pub radius_um: f64,
    #[serde(default)]
    pub velocity_m_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    pub window: f64,
    pub steps_per_cycle: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        let p = IntegrationPolicy::default();
        IntegrationConfig {
            window: p.window_half_width,
            steps_per_cycle: p.steps_per_carrier_cycle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub populations: [f64; 4],
    /// Initial ground coherence [re, im].
    #[serde(default)]
    pub rho12: [f64; 2],
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            populations: [0.5, 0.5, 0.0, 0.0],
            rho12: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeConfig {
    FixedPeak,
    FixedAverage,
}

impl From<AmplitudeConfig> for AmplitudeMode {
    fn from(a: AmplitudeConfig) -> Self {
        match a {
            AmplitudeConfig::FixedPeak => AmplitudeMode::FixedPeak,
            AmplitudeConfig::FixedAverage => AmplitudeMode::FixedAverage,
        }
    }
}

/// Sweep grid. Units follow the mode: m/s for velocity, μm for radius, MHz
/// for repetition frequency. Either `values` or `start`/`stop`/`step`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Rep-rate mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<AmplitudeConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameConfig {
    Lab,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub step_fs: f64,
    #[serde(default)]
    pub allow_long_span: bool,
    #[serde(default = "default_frame")]
    pub frame: FrameConfig,
}

fn default_frame() -> FrameConfig {
    FrameConfig::Interaction
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            step_fs: 0.04,
            allow_long_span: false,
            frame: FrameConfig::Interaction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Worker threads for sweeps; 0 lets the pool decide.
    #[serde(default)]
    pub workers: usize,
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    pub levels: LevelsConfig,
    pub decay: DecayConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        match self.mode {
            RunMode::VelocitySweep | RunMode::RadialSweep | RunMode::RepRate => {
                let grid = self.grid()?;
                if grid.is_empty() && self.mode != RunMode::RepRate {
                    return Err(Error::invalid("sweep", "grid must not be empty"));
                }
                if self.mode == RunMode::RepRate {
                    if grid.iter().any(|&v| !(v > 0.0)) {
                        return Err(Error::invalid("sweep", "repetition frequencies must be > 0"));
                    }
                    if self.sweep.as_ref().and_then(|s| s.amplitude).is_none() {
                        return Err(Error::invalid("amplitude", "rep-rate mode needs sweep.amplitude"));
                    }
                } else if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("sweep", "grid must be strictly increasing"));
                }
                if self.mode == RunMode::VelocitySweep {
                    let carrier = self.carrier()?;
                    for &v in &grid {
                        DopplerSpec::new(v, carrier)?;
                    }
                }
            }
            RunMode::Single | RunMode::Oracle => {}
        }
        if let Some(o) = &self.oracle {
            if !(o.step_fs > 0.0) {
                return Err(Error::invalid("step_fs", format!("must be > 0, got {}", o.step_fs)));
            }
        }
        Ok(())
    }

    fn rep_rate_hz(&self) -> Result<f64> {
        let nu = self.train.rep_rate_mhz * HZ_PER_MHZ;
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::invalid("rep_rate_mhz", format!("must be > 0, got {}", self.train.rep_rate_mhz)));
        }
        Ok(nu)
    }

    pub fn level_scheme(&self) -> Result<LevelScheme> {
        let l = &self.levels;
        let comb = [l.n21, l.n41, l.n43];
        let abs = [l.f21_hz, l.f41_hz, l.f43_hz];
        match (comb, abs) {
            ([Some(n21), Some(n41), Some(n43)], [None, None, None]) => {
                LevelScheme::from_comb(n21, n41, n43, self.rep_rate_hz()?)
            }
            ([None, None, None], [Some(f21), Some(f41), Some(f43)]) => {
                LevelScheme::new(TAU * f21, TAU * (f41 - f43), TAU * f41)
            }
            _ => Err(Error::invalid(
                "levels",
                "give either n21, n41, n43 or f21_hz, f41_hz, f43_hz",
            )),
        }
    }

    pub fn decay_rates(&self) -> Result<DecayRates> {
        let d = &self.decay;
        DecayRates::new(d.gamma41, d.gamma42, d.gamma31, d.gamma32)
    }

    fn carrier(&self) -> Result<f64> {
        match self.train.carrier_n {
            Some(n) => Ok(TAU * n * self.rep_rate_hz()?),
            None => Ok(self.level_scheme()?.w41()),
        }
    }

    pub fn pulse_spec(&self) -> Result<PulseTrainSpec> {
        let t = &self.train;
        let period = 1.0 / self.rep_rate_hz()?;
        let tau0 = t.tau0_fs / FS_PER_S;
        let peak_rabi = match (t.peak_rabi_rad_per_fs, t.avg_rabi_per_s) {
            (Some(p), None) => p * RAD_PER_S_PER_RAD_PER_FS,
            (None, Some(avg)) => peak_for_avg(avg, tau0, period)?,
            _ => {
                return Err(Error::invalid(
                    "train",
                    "give exactly one of peak_rabi_rad_per_fs and avg_rabi_per_s",
                ))
            }
        };
        let spec = PulseTrainSpec {
            peak_rabi,
            tau0,
            w0: t.w0_um / UM_PER_M,
            period,
            n_pulses: t.pulses,
            phase_step: t.phase_step_rad,
            carrier: self.carrier()?,
            carrier_phase: t.carrier_phase_rad,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn policy(&self) -> Result<IntegrationPolicy> {
        let p = IntegrationPolicy {
            window_half_width: self.integration.window,
            steps_per_carrier_cycle: self.integration.steps_per_cycle,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let i = &self.initial;
        let mut rho = DensityMatrix::from_populations(i.populations);
        rho.set_hermitian(1, 2, C64::new(i.rho12[0], i.rho12[1]));
        rho.validate(&Default::default())
            .map_err(|what| Error::invalid("initial", what))?;
        Ok(rho)
    }

    /// The base trajectory this config describes.
    pub fn scenario(&self) -> Result<Scenario> {
        let spec = self.pulse_spec()?;
        let radius = self.sample.radius_um / UM_PER_M;
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::invalid("radius_um", format!("must be >= 0, got {}", self.sample.radius_um)));
        }
        let velocity = self.sample.velocity_m_per_s;
        DopplerSpec::new(velocity, spec.carrier)?;
        Ok(Scenario {
            levels: self.level_scheme()?,
            decays: self.decay_rates()?,
            spec,
            policy: self.policy()?,
            initial: self.initial_state()?,
            radius,
            velocity,
        })
    }

    /// Sweep grid in the mode's natural unit (m/s, μm or MHz).
    pub fn grid(&self) -> Result<Vec<f64>> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::invalid("sweep", "sweep modes need a [sweep] table"))?;
        match (&s.values, s.start, s.stop, s.step) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || !(stop >= start) {
                    return Err(Error::invalid("sweep", "need step > 0 and stop >= start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| start + k as f64 * step).collect())
            }
            _ => Err(Error::invalid("sweep", "give either values or start/stop/step")),
        }
    }

    /// Sweep grid converted to SI (m/s, m, Hz).
    pub fn grid_si(&self) -> Result<Vec<f64>> {
        let grid = self.grid()?.into_iter();
        Ok(match self.mode {
            RunMode::RadialSweep => grid.map(|v| v / UM_PER_M).collect(),
            RunMode::RepRate => grid.map(|v| v * HZ_PER_MHZ).collect(),
            _ => grid.collect(),
        })
    }

    pub fn amplitude_mode(&self) -> AmplitudeMode {
        self.sweep
            .as_ref()
            .and_then(|s| s.amplitude)
            .unwrap_or(AmplitudeConfig::FixedPeak)
            .into()
    }

    pub fn brute_force_options(&self) -> BruteForceOptions {
        let o = self.oracle.unwrap_or_default();
        BruteForceOptions {
            step: o.step_fs / FS_PER_S,
            frame: match o.frame {
                FrameConfig::Lab => Frame::Lab,
                FrameConfig::Interaction => Frame::Interaction,
            },
            allow_long_span: o.allow_long_span,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2A: &str = r#"
mode = "single"

[levels]
n21 = 30.0
n41 = 3750000.0
n43 = 3.6

[decay]
gamma41 = 2e7
gamma42 = 2e7
gamma31 = 2e7
gamma32 = 2e7

[train]
rep_rate_mhz = 100.0
pulses = 250
tau0_fs = 10.0
w0_um = 100.0
peak_rabi_rad_per_fs = 0.008862269254527580

[sample]
radius_um = 50.0
"#;

    #[test]
    fn parses_comb_levels() {
        let cfg = parse_config(FIG2A).unwrap();
        let l = cfg.level_scheme().unwrap();
        assert!((l.w21() / (TAU * 3e9) - 1.0).abs() < 1e-12);
        let s = cfg.scenario().unwrap();
        assert!((s.spec.period - 10e-9).abs() < 1e-22);
        assert_eq!(s.radius, 50e-6);
        assert_eq!(s.spec.carrier, l.w41());
    }

    #[test]
    fn missing_tau0_is_named() {
        let text = FIG2A.replace("tau0_fs = 10.0\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("tau0"), "{err}");
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn parse_error_has_line_context() {
        let text = FIG2A.replace("pulses = 250", "pulses = = 250");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn negative_decay_rejected() {
        let text = FIG2A.replace("gamma41 = 2e7", "gamma41 = -2e7");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "gamma41", .. }), "{err}");
    }

    #[test]
    fn mixed_level_forms_rejected() {
        let text = FIG2A.replace("n43 = 3.6", "f43_hz = 3.6e8");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn amplitude_forms_exclusive() {
        let text = FIG2A.replace("peak_rabi_rad_per_fs = 0.008862269254527580", "");
        assert!(parse_config(&text).is_err());
        let text = FIG2A.replace(
            "peak_rabi_rad_per_fs = 0.008862269254527580",
            "peak_rabi_rad_per_fs = 0.1\navg_rabi_per_s = 1e7",
        );
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unit_conversions_round_trip() {
        for x in [0.008862269254527580, 1.0, 113.7, 3.3e-5] {
            let back = (x * RAD_PER_S_PER_RAD_PER_FS) / RAD_PER_S_PER_RAD_PER_FS;
            assert!((back - x).abs() <= 1e-12 * x);
            let back = (x * HZ_PER_MHZ) / HZ_PER_MHZ;
            assert!((back - x).abs() <= 1e-12 * x);
            let back = (x / UM_PER_M) * UM_PER_M;
            assert!((back - x).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn sweep_grid_forms() {
        let text = FIG2A.replace("mode = \"single\"", "mode = \"velocity-sweep\"")
            + "\n[sweep]\nstart = 0.0\nstop = 800.0\nstep = 4.0\n";
        let cfg = parse_config(&text).unwrap();
        let g = cfg.grid().unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[200], 800.0);

        let text = FIG2A.replace("mode = \"single\"", "mode = \"radial-sweep\"")
            + "\n[sweep]\nvalues = [0.0, 50.0, 95.0]\n";
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.grid_si().unwrap(), vec![0.0, 50e-6, 95e-6]);

        let text = FIG2A.replace("mode = \"single\"", "mode = \"radial-sweep\"");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn rep_rate_needs_amplitude() {
        let text = FIG2A.replace("mode = \"single\"", "mode = \"rep-rate\"")
            + "\n[sweep]\nvalues = [25.0, 50.0]\n";
        assert!(parse_config(&text).is_err());
        let text = text + "amplitude = \"fixed-average\"\n";
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.amplitude_mode(), AmplitudeMode::FixedAverage);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = FIG2A.replace("pulses = 250", "pulses = 250\npulse_count = 3");
        assert!(parse_config(&text).is_err());
    }
}
