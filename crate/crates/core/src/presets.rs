//! Built-in scenarios for each figure.

use std::f64::consts::PI;

use crate::config::{
    AmplitudeConfig, DecayConfig, InitialConfig, IntegrationConfig, LevelsConfig, OutputConfig,
    RunConfig, RunMode, SampleConfig, SweepConfig, TrainConfig,
};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 11] = [
    "fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig8c",
];

/// Γ/2 for every decay channel, s⁻¹ (25 ns excited-state lifetime).
const GAMMA: f64 = 2e7;
/// √π/200 rad/fs: a π/20-area pulse at τ0 = 10 fs.
const PEAK_RABI_RAD_PER_FS: f64 = 0.00886226925452758;
/// Average Rabi frequency of the 100 MHz, π/20 train, rad/s.
const AVG_RABI_PER_S: f64 = PI / 20.0 / 10e-9;

const F21_HZ: f64 = 3e9;
const F41_HZ: f64 = 375e12;
const F43_HZ: f64 = 360e6;

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name {
        "fig2a" => fig2(100.0, 30.0, 3.75e6, 3.6),
        "fig2b" => fig2(120.0, 25.0, 3.125e6, 3.0),
        "fig2c" => fig2(375.0 / 3.4, 27.2, 3.4e6, 3.264),
        "fig3" => rep_rate(500, &[100.0, 500.0, 1000.0], AmplitudeConfig::FixedPeak),
        "fig4" => rep_rate(150, &[25.0, 50.0, 100.0], AmplitudeConfig::FixedAverage),
        "fig5" => {
            let mut c = doppler(1000);
            c.sweep = Some(values(&[0.0, 72.0, 145.0, 216.0, 288.0]));
            c
        }
        "fig6" => {
            let mut c = doppler(300);
            c.sweep = Some(range(0.0, 800.0, 4.0));
            c
        }
        "fig7" => {
            let mut c = low_rate(20.0, 150.0, 1.875e7, 93.0, 40);
            c.mode = RunMode::VelocitySweep;
            c.sweep = Some(range(0.0, 800.0, 4.0));
            c
        }
        "fig8a" => radial(low_rate(20.0, 150.0, 1.875e7, 93.0, 40)),
        "fig8b" => radial(low_rate(100.0, 30.0, 3.75e6, 18.6, 200)),
        "fig8c" => radial(low_rate(500.0, 6.0, 0.75e6, 3.72, 1000)),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(cfg)
}

/// Common starting point: 10 fs pulses, 100 μm waist, on-axis sampling.
fn base(mode: RunMode, levels: LevelsConfig, rep_rate_mhz: f64, pulses: usize) -> RunConfig {
    RunConfig {
        mode,
        levels,
        decay: DecayConfig {
            gamma41: GAMMA,
            gamma42: GAMMA,
            gamma31: GAMMA,
            gamma32: GAMMA,
        },
        train: TrainConfig {
            rep_rate_mhz,
            pulses,
            tau0_fs: 10.0,
            w0_um: 100.0,
            peak_rabi_rad_per_fs: Some(PEAK_RABI_RAD_PER_FS),
            avg_rabi_per_s: None,
            phase_step_rad: 0.0,
            carrier_phase_rad: 0.0,
            carrier_n: None,
        },
        sample: SampleConfig::default(),
        integration: IntegrationConfig::default(),
        initial: InitialConfig::default(),
        sweep: None,
        oracle: None,
        output: OutputConfig::default(),
    }
}

fn comb(n21: f64, n41: f64, n43: f64) -> LevelsConfig {
    LevelsConfig {
        n21: Some(n21),
        n41: Some(n41),
        n43: Some(n43),
        ..Default::default()
    }
}

fn absolute() -> LevelsConfig {
    LevelsConfig {
        f21_hz: Some(F21_HZ),
        f41_hz: Some(F41_HZ),
        f43_hz: Some(F43_HZ),
        ..Default::default()
    }
}

fn values(v: &[f64]) -> SweepConfig {
    SweepConfig {
        values: Some(v.to_vec()),
        ..Default::default()
    }
}

fn range(start: f64, stop: f64, step: f64) -> SweepConfig {
    SweepConfig {
        start: Some(start),
        stop: Some(stop),
        step: Some(step),
        ..Default::default()
    }
}

/// Single 250-pulse trajectory sampled at r = 50 μm.
fn fig2(rep_rate_mhz: f64, n21: f64, n41: f64, n43: f64) -> RunConfig {
    let mut c = base(RunMode::Single, comb(n21, n41, n43), rep_rate_mhz, 250);
    c.sample.radius_um = 50.0;
    c
}

/// Fixed absolute level scheme at several repetition frequencies.
fn rep_rate(pulses: usize, mhz: &[f64], amplitude: AmplitudeConfig) -> RunConfig {
    let mut c = base(RunMode::RepRate, absolute(), 100.0, pulses);
    c.sample.radius_um = 50.0;
    c.sweep = Some(SweepConfig {
        amplitude: Some(amplitude),
        ..values(mhz)
    });
    c
}

/// 500 MHz train with |3⟩ one-photon resonant at V = 288 m/s.
fn doppler(pulses: usize) -> RunConfig {
    base(RunMode::VelocitySweep, comb(6.0, 0.75e6, 3.72), 500.0, pulses)
}

/// Train with the same average Rabi frequency as the 100 MHz π/20 train.
fn low_rate(rep_rate_mhz: f64, n21: f64, n41: f64, n43: f64, pulses: usize) -> RunConfig {
    let mut c = base(RunMode::RadialSweep, comb(n21, n41, n43), rep_rate_mhz, pulses);
    c.train.peak_rabi_rad_per_fs = None;
    c.train.avg_rabi_per_s = Some(AVG_RABI_PER_S);
    c
}

fn radial(mut c: RunConfig) -> RunConfig {
    c.mode = RunMode::RadialSweep;
    c.sweep = Some(range(0.0, 150.0, 1.0));
    c
}
