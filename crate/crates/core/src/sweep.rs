//! Doppler shifts and parameter sweeps over velocity, radius and repetition
//! frequency.
//!
//! Grid points are independent trajectories. They are dispatched to a rayon
//! pool of the requested size and collected by grid index, so the output
//! does not depend on the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagator::{run_train, IntegrationPolicy, Trajectory};
use crate::pulse::{avg_rabi, peak_for_avg, PulseTrainSpec};
use crate::state::{DecayRates, DensityMatrix, LevelScheme, StateTolerance};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Longitudinal atom velocity relative to the co-propagating train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerSpec {
    velocity: f64,
    carrier: f64,
}

impl DopplerSpec {
    pub fn new(velocity: f64, carrier: f64) -> Result<Self> {
        if !velocity.is_finite() || velocity.abs() >= 1e-3 * SPEED_OF_LIGHT {
            return Err(Error::invalid(
                "velocity",
                format!("|V| must be below 1e-3·c, got {velocity} m/s"),
            ));
        }
        Ok(DopplerSpec { velocity, carrier })
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    /// k = ω0/c, rad/m.
    pub fn wave_number(&self) -> f64 {
        self.carrier / SPEED_OF_LIGHT
    }

    /// k·V, rad/s.
    pub fn optical_detuning(&self) -> f64 {
        self.wave_number() * self.velocity
    }
}

/// Level scheme seen by an atom moving at `d.velocity()`: every transition
/// frequency scaled by (1 + V/c).
pub fn doppler_shift(levels: &LevelScheme, d: &DopplerSpec) -> Result<LevelScheme> {
    if d.velocity == 0.0 {
        return Ok(*levels);
    }
    levels.scaled(1.0 + d.velocity / SPEED_OF_LIGHT)
}

/// Everything needed to run one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Rest-frame level scheme.
    pub levels: LevelScheme,
    pub decays: DecayRates,
    pub spec: PulseTrainSpec,
    pub policy: IntegrationPolicy,
    pub initial: DensityMatrix,
    /// Radial sampling position, m.
    pub radius: f64,
    /// Longitudinal velocity, m/s.
    pub velocity: f64,
}

impl Scenario {
    pub fn shifted_levels(&self) -> Result<LevelScheme> {
        doppler_shift(&self.levels, &DopplerSpec::new(self.velocity, self.spec.carrier)?)
    }

    pub fn run(&self) -> Result<Trajectory> {
        let levels = self.shifted_levels()?;
        run_train(&self.initial, &self.spec, &self.policy, &levels, &self.decays, self.radius)
    }

    /// Copy with a different repetition period. Level frequencies and the
    /// carrier do not change.
    pub fn with_rep_rate(&self, nu: f64, mode: AmplitudeMode) -> Result<Scenario> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::invalid("rep_rate", format!("must be > 0, got {nu}")));
        }
        let mut out = *self;
        out.spec.period = 1.0 / nu;
        if mode == AmplitudeMode::FixedAverage {
            let target = avg_rabi(&self.spec, 0.0);
            out.spec.peak_rabi = peak_for_avg(target, self.spec.tau0, out.spec.period)?;
        }
        Ok(out)
    }
}

/// How the peak amplitude follows a change in repetition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeMode {
    /// Keep Ω_peak.
    FixedPeak,
    /// Keep the on-axis average Rabi frequency Ω_avg = area/T.
    FixedAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Velocity,
    Radius,
    RepRate,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Velocity => "velocity_m_per_s",
            SweepAxis::Radius => "radius_m",
            SweepAxis::RepRate => "rep_rate_hz",
        }
    }
}

/// Per-pulse |ρ12| rows over a one-dimensional grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    /// `rows[i][k]` is |ρ12| after `k` pulses at `grid[i]`.
    pub rows: Vec<Vec<f64>>,
}

impl SweepResult {
    pub fn empty(axis: SweepAxis) -> Self {
        SweepResult {
            axis,
            grid: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Final |ρ12| for every grid point.
    pub fn final_coherence(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.last().copied().unwrap_or(0.0)).collect()
    }
}

/// Runs `jobs` on a pool of `workers` threads (0 = rayon default) and
/// returns the results in job order. Every snapshot is checked against the
/// density-matrix invariants.
fn run_ordered(jobs: Vec<Scenario>, workers: usize) -> Result<Vec<Trajectory>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let tol = StateTolerance::default();
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let t = job.run()?;
                t.check_invariants(&tol)?;
                Ok(t)
            })
            .collect()
    })
}

fn check_grid(grid: &[f64], field: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(field, "grid must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(field, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "grid must be strictly increasing"));
    }
    Ok(())
}

fn collect(axis: SweepAxis, grid: Vec<f64>, runs: Vec<Trajectory>) -> SweepResult {
    SweepResult {
        axis,
        grid,
        rows: runs.iter().map(Trajectory::abs_rho12).collect(),
    }
}

/// One trajectory per velocity group.
pub fn velocity_sweep(grid: &[f64], base: &Scenario, workers: usize) -> Result<SweepResult> {
    check_grid(grid, "velocity_grid")?;
    let jobs = grid
        .iter()
        .map(|&v| {
            DopplerSpec::new(v, base.spec.carrier)?;
            Ok(Scenario { velocity: v, ..*base })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(SweepAxis::Velocity, grid.to_vec(), run_ordered(jobs, workers)?))
}

/// One trajectory per radial position, grid within [0, 3·W0].
pub fn radial_sweep(grid: &[f64], base: &Scenario, workers: usize) -> Result<SweepResult> {
    check_grid(grid, "radial_grid")?;
    let limit = 3.0 * base.spec.w0;
    if grid[0] < 0.0 || grid[grid.len() - 1] > limit * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "radial_grid",
            format!("radii must lie in [0, 3·W0] = [0, {limit:e}] m"),
        ));
    }
    let jobs = grid.iter().map(|&r| Scenario { radius: r, ..*base }).collect();
    Ok(collect(SweepAxis::Radius, grid.to_vec(), run_ordered(jobs, workers)?))
}

/// One trajectory per (repetition frequency, amplitude mode) pair, in the
/// order given. Unlike the other sweeps the grid need not be sorted.
pub fn rep_rate_scenarios(
    scenarios: &[(f64, AmplitudeMode)],
    base: &Scenario,
    workers: usize,
) -> Result<SweepResult> {
    if scenarios.is_empty() {
        return Ok(SweepResult::empty(SweepAxis::RepRate));
    }
    let jobs = scenarios
        .iter()
        .map(|&(nu, mode)| base.with_rep_rate(nu, mode))
        .collect::<Result<Vec<_>>>()?;
    let grid = scenarios.iter().map(|&(nu, _)| nu).collect();
    Ok(collect(SweepAxis::RepRate, grid, run_ordered(jobs, workers)?))
}

/// Number of strict local maxima of `values` after a centered 3-point moving
/// average (end points use the available neighbours). Plateaus count once.
pub fn count_local_extrema(values: &[f64]) -> (usize, usize) {
    let n = values.len();
    if n < 3 {
        return (0, 0);
    }
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    // collapse equal neighbours so plateaus are seen as a single point
    let mut dedup: Vec<f64> = Vec::with_capacity(n);
    for v in smooth {
        if dedup.last() != Some(&v) {
            dedup.push(v);
        }
    }
    let mut maxima = 0;
    let mut minima = 0;
    for w in dedup.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            maxima += 1;
        }
        if w[1] < w[0] && w[1] < w[2] {
            minima += 1;
        }
    }
    (maxima, minima)
}

/// Same, but treating the sequence as one period of a periodic signal so
/// that an extremum sitting on the wrap-around seam is counted once.
pub fn count_periodic_extrema(period: &[f64]) -> (usize, usize) {
    let n = period.len();
    if n < 3 {
        return (0, 0);
    }
    let mut c: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let v = (period[(i + n - 1) % n] + period[i] + period[(i + 1) % n]) / 3.0;
        if c.last() != Some(&v) {
            c.push(v);
        }
    }
    while c.len() > 1 && c.first() == c.last() {
        c.pop();
    }
    let m = c.len();
    if m < 3 {
        return (0, 0);
    }
    let mut maxima = 0;
    let mut minima = 0;
    for i in 0..m {
        let (prev, v, next) = (c[(i + m - 1) % m], c[i], c[(i + 1) % m]);
        if v > prev && v > next {
            maxima += 1;
        }
        if v < prev && v < next {
            minima += 1;
        }
    }
    (maxima, minima)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn doppler_detuning_per_velocity() {
        let carrier = TAU * 0.75e6 * 500e6;
        let d = DopplerSpec::new(1.0, carrier).unwrap();
        let mhz_per_mps = d.optical_detuning() / TAU / 1e6;
        assert!((mhz_per_mps - 1.2509).abs() < 1e-3, "{mhz_per_mps}");
        let d = DopplerSpec::new(288.0, carrier).unwrap();
        assert!((d.optical_detuning() / TAU / 1e6 - 360.0).abs() < 0.5);
        let d = DopplerSpec::new(400.0, carrier).unwrap();
        assert!((d.optical_detuning() / TAU / 1e6 - 500.0).abs() < 0.5);
    }

    #[test]
    fn doppler_guard_and_identity() {
        let l = LevelScheme::from_comb(6.0, 0.75e6, 3.72, 500e6).unwrap();
        assert!(DopplerSpec::new(3.0e5, 1.0).is_err());
        assert!(DopplerSpec::new(f64::NAN, 1.0).is_err());
        let d = DopplerSpec::new(0.0, 1.0).unwrap();
        assert_eq!(doppler_shift(&l, &d).unwrap(), l);
        let d = DopplerSpec::new(300.0, 1.0).unwrap();
        let s = doppler_shift(&l, &d).unwrap();
        let f = 1.0 + 300.0 / SPEED_OF_LIGHT;
        assert_eq!(s.w41(), l.w41() * f);
        assert_eq!(s.w43(), s.w41() - s.w31());
    }

    #[test]
    fn extrema_counting() {
        let signal: Vec<f64> = (0..100).map(|i| (i as f64 / 100.0 * 2.0 * TAU).cos()).collect();
        assert_eq!(count_periodic_extrema(&signal), (2, 2));
        let (mx, mn) = count_local_extrema(&signal);
        assert_eq!((mx, mn), (1, 2));
        let plateau = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        assert_eq!(count_periodic_extrema(&plateau), (2, 2));
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[], "g").is_err());
        assert!(check_grid(&[1.0, 1.0], "g").is_err());
        assert!(check_grid(&[2.0, 1.0], "g").is_err());
        assert!(check_grid(&[0.0, 1.0], "g").is_ok());
    }

    fn base(n: usize) -> Scenario {
        let levels = LevelScheme::from_comb(6.0, 0.75e6, 3.72, 500e6).unwrap();
        Scenario {
            levels,
            decays: DecayRates::uniform(2e7).unwrap(),
            spec: PulseTrainSpec {
                peak_rabi: std::f64::consts::PI.sqrt() / 200.0 * 1e15,
                tau0: 10e-15,
                w0: 100e-6,
                period: 2e-9,
                n_pulses: n,
                phase_step: 0.0,
                carrier: levels.w41(),
                carrier_phase: 0.0,
            },
            policy: IntegrationPolicy::default(),
            initial: DensityMatrix::ground_mixture(),
            radius: 0.0,
            velocity: 0.0,
        }
    }

    #[test]
    fn single_velocity_matches_direct_run() {
        let b = base(20);
        let res = velocity_sweep(&[145.0], &b, 1).unwrap();
        let shifted = doppler_shift(&b.levels, &DopplerSpec::new(145.0, b.spec.carrier).unwrap()).unwrap();
        let direct = run_train(&b.initial, &b.spec, &b.policy, &shifted, &b.decays, 0.0).unwrap();
        assert_eq!(res.rows[0], direct.abs_rho12());
        assert_eq!(res.axis.label(), "velocity_m_per_s");
    }

    #[test]
    fn radial_rows_and_far_field() {
        let b = base(20);
        let res = radial_sweep(&[0.0, 300e-6], &b, 1).unwrap();
        assert_eq!(res.rows[0], b.run().unwrap().abs_rho12());
        assert!(res.final_coherence()[1] < 0.01);
        assert!(radial_sweep(&[0.0, 301e-6], &b, 1).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let b = base(10);
        let grid = [0.0, 50.0, 100.0, 150.0, 200.0];
        let one = velocity_sweep(&grid, &b, 1).unwrap();
        let three = velocity_sweep(&grid, &b, 3).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn rep_rate_scenarios_rescale_amplitude() {
        let b = base(5);
        let empty = rep_rate_scenarios(&[], &b, 1).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.axis, SweepAxis::RepRate);

        let s = b.with_rep_rate(100e6, AmplitudeMode::FixedAverage).unwrap();
        assert!((avg_rabi(&s.spec, 0.0) / avg_rabi(&b.spec, 0.0) - 1.0).abs() < 1e-12);
        assert!((s.spec.peak_rabi / b.spec.peak_rabi - 5.0).abs() < 1e-12);
        let s = b.with_rep_rate(100e6, AmplitudeMode::FixedPeak).unwrap();
        assert_eq!(s.spec.peak_rabi, b.spec.peak_rabi);
        assert_eq!(s.levels, b.levels);

        let res = rep_rate_scenarios(&[(250e6, AmplitudeMode::FixedPeak), (100e6, AmplitudeMode::FixedAverage)], &b, 1)
            .unwrap();
        assert_eq!(res.grid, vec![250e6, 100e6]);
        assert!(res.rows.iter().all(|r| r.len() == 6));
    }

    #[test]
    fn coherence_bounded() {
        let res = velocity_sweep(&[0.0, 288.0], &base(30), 1).unwrap();
        assert!(res.rows.iter().flatten().all(|&c| (0.0..=0.5 + 1e-9).contains(&c)));
    }
}
