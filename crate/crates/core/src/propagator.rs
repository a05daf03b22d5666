//! Pulse-train propagation.
//!
//! The hybrid propagator integrates the Bloch equations with RK4 only inside
//! a ±w·τ0 window around each pulse and applies the exact drive-free
//! solution across the dead time between windows. [`brute_force_run`] is the
//! uniform-step reference that integrates everything numerically.

use std::f64::consts::TAU;

use crate::bloch::{rk4_interaction, rk4_step, FramePhases, FrameSample, Packed};
use crate::error::{Error, Result};
use crate::pulse::{drive_at, PulseTrainSpec, PULSE_CUTOFF};
use crate::state::{DecayRates, DensityMatrix, DriveSample, LevelScheme, StateTolerance, C64};

/// Default guard on the brute-force integration span, s.
pub const BRUTE_FORCE_SPAN_LIMIT: f64 = 10e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationPolicy {
    /// Half-width of each integration window, in units of τ0.
    pub window_half_width: f64,
    /// RK4 steps per carrier cycle (or per τ0, whichever is finer).
    pub steps_per_carrier_cycle: usize,
}

impl Default for IntegrationPolicy {
    fn default() -> Self {
        IntegrationPolicy {
            window_half_width: 5.0,
            steps_per_carrier_cycle: 64,
        }
    }
}

impl IntegrationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_half_width >= 3.0 && self.window_half_width.is_finite()) {
            return Err(Error::invalid(
                "window",
                format!("half-width must be >= 3 tau0, got {}", self.window_half_width),
            ));
        }
        if self.steps_per_carrier_cycle < 16 {
            return Err(Error::invalid(
                "steps_per_cycle",
                format!("must be >= 16, got {}", self.steps_per_carrier_cycle),
            ));
        }
        Ok(())
    }

    /// Target RK4 step for a given spec: min(carrier period, τ0) / steps.
    pub fn step_size(&self, spec: &PulseTrainSpec) -> f64 {
        let cycle = TAU / spec.carrier;
        cycle.min(spec.tau0) / self.steps_per_carrier_cycle as f64
    }

    pub fn window(&self, spec: &PulseTrainSpec) -> f64 {
        self.window_half_width * spec.tau0
    }
}

/// State recorded at the end of a pulse window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    /// Number of pulses applied so far.
    pub pulse_index: usize,
    pub time: f64,
    pub rho: DensityMatrix,
}

impl Snapshot {
    pub fn abs_rho12(&self) -> f64 {
        self.rho.coherence12().norm()
    }

    pub fn populations(&self) -> [f64; 4] {
        self.rho.populations()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn final_state(&self) -> Option<DensityMatrix> {
        self.last().map(|s| s.rho)
    }

    pub fn abs_rho12(&self) -> Vec<f64> {
        self.snapshots.iter().map(Snapshot::abs_rho12).collect()
    }

    /// First pulse count at which |ρ12| reaches `threshold`.
    pub fn pulses_to_coherence(&self, threshold: f64) -> Option<usize> {
        self.snapshots
            .iter()
            .find(|s| s.abs_rho12() >= threshold)
            .map(|s| s.pulse_index)
    }

    /// Largest value of population `level` (1-based) over all snapshots.
    pub fn max_population(&self, level: usize) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.populations()[level - 1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks every snapshot against the density-matrix invariants.
    pub fn check_invariants(&self, tol: &StateTolerance) -> Result<()> {
        for s in &self.snapshots {
            s.rho.validate(tol).map_err(|what| Error::Invariant {
                pulse: s.pulse_index,
                what,
            })?;
        }
        Ok(())
    }
}

/// Exact solution of the drive-free Bloch equations over `dt`.
pub fn free_evolve(state: &DensityMatrix, dt: f64, levels: &LevelScheme, decays: &DecayRates) -> DensityMatrix {
    if dt == 0.0 {
        return *state;
    }
    let g3 = decays.gamma3();
    let g4 = decays.gamma4();
    let e3 = (-g3 * dt).exp();
    let e4 = (-g4 * dt).exp();
    // Fraction of |k⟩ that has decayed, split by branching ratio; zero total
    // rate means nothing decays.
    let branch = |g: f64, total: f64, lost: f64| if total > 0.0 { g / total * lost } else { 0.0 };
    let lost3 = -(-g3 * dt).exp_m1();
    let lost4 = -(-g4 * dt).exp_m1();

    let p = state.populations();
    let p11 = p[0] + branch(decays.g41, g4, lost4) * p[3] + branch(decays.g31, g3, lost3) * p[2];
    let p22 = p[1] + branch(decays.g42, g4, lost4) * p[3] + branch(decays.g32, g3, lost3) * p[2];

    let rot = |w: f64, damp: f64| C64::from_polar((-damp * dt).exp(), reduced_phase(w, dt));

    let mut out = DensityMatrix::from_populations([p11, p22, p[2] * e3, p[3] * e4]);
    out.set_hermitian(1, 2, state.at(1, 2) * rot(levels.w21(), 0.0));
    out.set_hermitian(1, 3, state.at(1, 3) * rot(levels.w31(), g3 / 2.0));
    out.set_hermitian(1, 4, state.at(1, 4) * rot(levels.w41(), g4 / 2.0));
    out.set_hermitian(2, 3, state.at(2, 3) * rot(levels.w32(), g3 / 2.0));
    out.set_hermitian(2, 4, state.at(2, 4) * rot(levels.w42(), g4 / 2.0));
    out.set_hermitian(3, 4, state.at(3, 4) * rot(levels.w43(), (g3 + g4) / 2.0));
    out
}

/// w·dt reduced to (−π, π], carrying the rounding error of the product and
/// of the reduction. Optical phases over a dead time reach ~10⁸ rad, where a
/// plain product is only good to ~10⁻⁸ rad.
fn reduced_phase(w: f64, dt: f64) -> f64 {
    const TAU_LO: f64 = 2.4492935982947064e-16;
    let p = w * dt;
    let p_err = w.mul_add(dt, -p);
    let k = (p / TAU).round();
    (-k).mul_add(TAU, p) - k * TAU_LO + p_err
}

/// Per-window samples that are identical for every pulse of a train: the
/// envelope, the carrier quadratures and the frame phases, tabulated on the
/// RK4 half-step grid of local time.
struct WindowTable {
    half: f64,
    h: f64,
    envelope: Vec<f64>,
    carrier_cos: Vec<f64>,
    carrier_sin: Vec<f64>,
    phases: Vec<FramePhases>,
}

impl WindowTable {
    fn new(spec: &PulseTrainSpec, policy: &IntegrationPolicy, levels: &LevelScheme) -> Self {
        let half = policy.window(spec);
        let span = 2.0 * half;
        let steps = (span / policy.step_size(spec)).ceil() as usize;
        let h = span / steps as f64;
        let reach = PULSE_CUTOFF * spec.tau0;
        let points = 2 * steps + 1;
        let mut table = WindowTable {
            half,
            h,
            envelope: Vec::with_capacity(points),
            carrier_cos: Vec::with_capacity(points),
            carrier_sin: Vec::with_capacity(points),
            phases: Vec::with_capacity(points),
        };
        for k in 0..points {
            let s = -half + k as f64 * 0.5 * h;
            let g = if s.abs() > reach { 0.0 } else { (-(s / spec.tau0).powi(2)).exp() };
            let (sin, cos) = (spec.carrier * s).sin_cos();
            table.envelope.push(g);
            table.carrier_cos.push(cos);
            table.carrier_sin.push(sin);
            table.phases.push(FramePhases::at(s, levels));
        }
        table
    }

    fn steps(&self) -> usize {
        (self.envelope.len() - 1) / 2
    }

    fn integrate(
        &self,
        state: &DensityMatrix,
        pulse_index: usize,
        spec: &PulseTrainSpec,
        decays: &DecayRates,
        r: f64,
    ) -> Result<DensityMatrix> {
        let amplitude = spec.local_peak(r);
        let (sin_p, cos_p) = spec.pulse_phase(pulse_index).sin_cos();
        let sample = |k: usize| FrameSample {
            drive: DriveSample::uniform(
                amplitude
                    * self.envelope[k]
                    * (self.carrier_cos[k] * cos_p - self.carrier_sin[k] * sin_p),
            ),
            phases: self.phases[k],
        };

        let mut s0 = sample(0);
        let mut rho = Packed::from_matrix(&s0.phases.to_frame(state));
        for k in 0..self.steps() {
            let sm = sample(2 * k + 1);
            let s1 = sample(2 * k + 2);
            rho = rk4_interaction(&rho, self.h, &s0, &sm, &s1, decays);
            s0 = s1;
        }
        let rho = s0.phases.to_lab(&rho.to_matrix());
        if !rho.is_finite() {
            return Err(Error::PulseFailure {
                pulse: pulse_index,
                source: Box::new(Error::NonFinite {
                    t: pulse_index as f64 * spec.period + self.half,
                    h: self.h,
                }),
            });
        }
        Ok(rho)
    }
}

/// RK4 integration of pulse `pulse_index` across its window, evaluated in
/// local time around the pulse center.
///
/// The state is carried in the interaction frame of the bare level energies
/// while stepping, so the RK4 truncation error scales with the drive rather
/// than with the optical transition frequencies.
pub fn integrate_pulse(
    state: &DensityMatrix,
    pulse_index: usize,
    spec: &PulseTrainSpec,
    policy: &IntegrationPolicy,
    levels: &LevelScheme,
    decays: &DecayRates,
    r: f64,
) -> Result<DensityMatrix> {
    spec.validate()?;
    policy.validate()?;
    WindowTable::new(spec, policy, levels).integrate(state, pulse_index, spec, decays, r)
}

/// Propagates `initial` through the whole train, one snapshot per pulse at
/// the end of its window plus the initial state at the start of the first
/// window.
pub fn run_train(
    initial: &DensityMatrix,
    spec: &PulseTrainSpec,
    policy: &IntegrationPolicy,
    levels: &LevelScheme,
    decays: &DecayRates,
    r: f64,
) -> Result<Trajectory> {
    spec.validate()?;
    policy.validate()?;
    let half = policy.window(spec);
    let dead_time = spec.period - 2.0 * half;
    let table = WindowTable::new(spec, policy, levels);

    let mut snapshots = Vec::with_capacity(spec.n_pulses + 1);
    snapshots.push(Snapshot {
        pulse_index: 0,
        time: -half,
        rho: *initial,
    });
    let mut rho = *initial;
    for n in 0..spec.n_pulses {
        if n > 0 {
            rho = free_evolve(&rho, dead_time, levels, decays);
        }
        rho = table.integrate(&rho, n, spec, decays, r)?;
        snapshots.push(Snapshot {
            pulse_index: n + 1,
            time: n as f64 * spec.period + half,
            rho,
        });
    }
    Ok(Trajectory { snapshots })
}

/// Frame in which [`brute_force_run`] carries the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Integrate the Bloch equations as written, free rotation included.
    Lab,
    /// Integrate in the interaction frame of the bare level energies.
    #[default]
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    /// Maximum uniform step, s.
    pub step: f64,
    pub frame: Frame,
    /// Lift the [`BRUTE_FORCE_SPAN_LIMIT`] guard.
    pub allow_long_span: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            step: 0.04e-15,
            frame: Frame::Interaction,
            allow_long_span: false,
        }
    }
}

/// Uniform-step RK4 over the full span, dead time included, with the drive
/// evaluated in global time. Same snapshot schedule as [`run_train`].
///
/// Each segment between snapshots is split into equal steps no longer than
/// `opts.step`. Spans above [`BRUTE_FORCE_SPAN_LIMIT`] are refused unless
/// `opts.allow_long_span` is set.
pub fn brute_force_run(
    initial: &DensityMatrix,
    spec: &PulseTrainSpec,
    policy: &IntegrationPolicy,
    levels: &LevelScheme,
    decays: &DecayRates,
    r: f64,
    opts: &BruteForceOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    policy.validate()?;
    let h = opts.step;
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step must be > 0, got {h}")));
    }
    let half = policy.window(spec);
    let mut snapshots = vec![Snapshot {
        pulse_index: 0,
        time: -half,
        rho: *initial,
    }];
    if spec.n_pulses == 0 {
        return Ok(Trajectory { snapshots });
    }
    let span = (spec.n_pulses - 1) as f64 * spec.period + 2.0 * half;
    if span > BRUTE_FORCE_SPAN_LIMIT && !opts.allow_long_span {
        return Err(Error::SpanGuard {
            span,
            limit: BRUTE_FORCE_SPAN_LIMIT,
        });
    }

    let drive = |t: f64| drive_at(r, t, spec);
    let sample = |t: f64| FrameSample {
        drive: drive(t),
        phases: FramePhases::at(t, levels),
    };
    let mut rho = *initial;
    let mut t0 = -half;
    for n in 0..spec.n_pulses {
        let t1 = n as f64 * spec.period + half;
        let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
        let hs = (t1 - t0) / steps as f64;
        let fail = |e: Error| Error::PulseFailure {
            pulse: n,
            source: Box::new(e),
        };
        match opts.frame {
            Frame::Lab => {
                for k in 0..steps {
                    let t = t0 + k as f64 * hs;
                    rho = rk4_step(&rho, t, hs, drive, levels, decays).map_err(fail)?;
                }
            }
            Frame::Interaction => {
                let mut s0 = sample(t0);
                let mut frame_rho = Packed::from_matrix(&s0.phases.to_frame(&rho));
                for k in 0..steps {
                    let t = t0 + k as f64 * hs;
                    let sm = sample(t + 0.5 * hs);
                    let s1 = sample(t0 + (k + 1) as f64 * hs);
                    frame_rho = rk4_interaction(&frame_rho, hs, &s0, &sm, &s1, decays);
                    s0 = s1;
                }
                rho = s0.phases.to_lab(&frame_rho.to_matrix());
                if !rho.is_finite() {
                    return Err(fail(Error::NonFinite { t: t1, h: hs }));
                }
            }
        }
        snapshots.push(Snapshot {
            pulse_index: n + 1,
            time: t1,
            rho,
        });
        t0 = t1;
    }
    Ok(Trajectory { snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::rabi_at;
    use crate::state::C64;
    use crate::testing::density_matrix;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn spec(nu: f64, n: usize) -> PulseTrainSpec {
        PulseTrainSpec {
            peak_rabi: PI.sqrt() / 200.0 * 1e15,
            tau0: 10e-15,
            w0: 100e-6,
            period: 1.0 / nu,
            n_pulses: n,
            phase_step: 0.0,
            carrier: TAU * 375e12,
            carrier_phase: 0.0,
        }
    }

    fn levels() -> LevelScheme {
        LevelScheme::new(TAU * 3e9, TAU * (375e12 - 360e6), TAU * 375e12).unwrap()
    }

    fn decays() -> DecayRates {
        DecayRates::uniform(2e7).unwrap()
    }

    #[test]
    fn phase_reduction() {
        let w = TAU * 375e12;
        for dt in [0.0, 1e-15, 2.5e-9, 1e-8, 3.3e-7] {
            let r = reduced_phase(w, dt);
            assert!(r.abs() <= PI + 1e-12);
            assert!((C64::cis(r) - C64::cis(w * dt)).norm() < 1e-6);
        }
        // TAU sits just below 2π, so 3·TAU is slightly short of a full turn
        assert!(reduced_phase(TAU, 3.0) < 0.0 && reduced_phase(TAU, 3.0) > -1e-15);
    }

    #[test]
    fn free_evolve_closed_forms() {
        let rho = DensityMatrix::from_populations([0.0, 0.0, 0.0, 1.0]);
        assert_eq!(free_evolve(&rho, 0.0, &levels(), &decays()), rho);
        let out = free_evolve(&rho, 25e-9, &levels(), &decays());
        let e = (-1.0f64).exp();
        assert!((out.at(4, 4).re - e).abs() < 1e-15);
        assert!((out.at(1, 1).re - (1.0 - e) / 2.0).abs() < 1e-15);
        assert!((out.at(2, 2).re - (1.0 - e) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_evolve_without_decay_keeps_populations() {
        let rho = DensityMatrix::from_populations([0.1, 0.2, 0.3, 0.4]);
        let out = free_evolve(&rho, 1e-6, &levels(), &DecayRates::none());
        assert_eq!(out.populations(), rho.populations());
    }

    /// Drive-free RK4 oracle. Uses GHz-scale level spacings so that 10⁵ lab
    /// frame steps over 2 ns resolve every coherence rotation.
    #[test]
    fn free_evolve_matches_rk4() {
        let l = LevelScheme::new(TAU * 1e9, TAU * 5e9, TAU * 7e9).unwrap();
        let g = DecayRates::new(1e7, 3e7, 2e7, 4e7).unwrap();
        let mut rho = DensityMatrix::from_populations([0.3, 0.2, 0.25, 0.25]);
        for (i, j, v) in [(1, 2, 0.1), (1, 3, 0.05), (1, 4, -0.07), (2, 3, 0.02), (2, 4, 0.03), (3, 4, 0.04)] {
            rho.set_hermitian(i, j, C64::new(v, 0.5 * v));
        }
        let dt = 2e-9;
        let n = 100_000;
        let h = dt / n as f64;
        let mut num = rho;
        for k in 0..n {
            num = crate::bloch::rk4_step(&num, k as f64 * h, h, |_| crate::state::DriveSample::zero(), &l, &g)
                .unwrap();
        }
        let exact = free_evolve(&rho, dt, &l, &g);
        assert!(num.max_abs_diff(&exact) <= 1e-9, "{}", num.max_abs_diff(&exact));
    }

    proptest! {
        #[test]
        fn free_evolve_composes(rho in density_matrix(), ka in 0u64..1 << 24, kb in 0u64..1 << 24) {
            // multiples of 2⁻⁵⁰ s, so that a + b is exact
            let (a, b) = (ka as f64 * 2f64.powi(-50), kb as f64 * 2f64.powi(-50));
            let (l, g) = (levels(), decays());
            let two = free_evolve(&free_evolve(&rho, a, &l, &g), b, &l, &g);
            let one = free_evolve(&rho, a + b, &l, &g);
            prop_assert!(two.max_abs_diff(&one) <= 1e-12);
        }

        #[test]
        fn single_pulse_preserves_invariants(rho in density_matrix(), r in 0.0f64..150e-6) {
            let s = spec(100e6, 1);
            let out = integrate_pulse(&rho, 0, &s, &IntegrationPolicy::default(), &levels(), &decays(), r).unwrap();
            prop_assert!((out.trace().re - rho.trace().re).abs() <= 1e-12);
            prop_assert!(out.hermiticity_defect() <= 1e-12);
            prop_assert!(out.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn window_table_matches_global_drive() {
        let mut s = spec(100e6, 5);
        s.phase_step = 0.7;
        s.carrier_phase = 0.3;
        let p = IntegrationPolicy::default();
        let table = WindowTable::new(&s, &p, &levels());
        let r = 30e-6;
        for n in [0usize, 3] {
            let (sin_p, cos_p) = s.pulse_phase(n).sin_cos();
            for k in (0..table.envelope.len()).step_by(97) {
                let local = -table.half + k as f64 * 0.5 * table.h;
                let from_table = s.local_peak(r)
                    * table.envelope[k]
                    * (table.carrier_cos[k] * cos_p - table.carrier_sin[k] * sin_p);
                let global = rabi_at(r, n as f64 * s.period + local, &s);
                assert!((from_table - global).abs() <= 1e-6 * s.peak_rabi, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn zero_drive_pulse_is_free_evolution() {
        let mut s = spec(100e6, 1);
        s.peak_rabi = 0.0;
        let mut rho = DensityMatrix::from_populations([0.4, 0.3, 0.2, 0.1]);
        rho.set_hermitian(1, 2, C64::new(0.1, -0.05));
        rho.set_hermitian(1, 4, C64::new(0.02, 0.03));
        rho.set_hermitian(3, 4, C64::new(0.01, 0.0));
        let p = IntegrationPolicy::default();
        let out = integrate_pulse(&rho, 0, &s, &p, &levels(), &decays(), 0.0).unwrap();
        let exact = free_evolve(&rho, 2.0 * p.window(&s), &levels(), &decays());
        assert!(out.max_abs_diff(&exact) <= 1e-12, "{}", out.max_abs_diff(&exact));
    }

    #[test]
    fn halving_step_converges() {
        let s = spec(100e6, 1);
        let rho = DensityMatrix::ground_mixture();
        let run = |spc| {
            let p = IntegrationPolicy {
                steps_per_carrier_cycle: spc,
                ..Default::default()
            };
            integrate_pulse(&rho, 0, &s, &p, &levels(), &decays(), 50e-6).unwrap()
        };
        let (a, b) = (run(64), run(128));
        assert!(a.max_abs_diff(&b) < 1e-10, "{}", a.max_abs_diff(&b));
    }

    #[test]
    fn single_pulse_matches_brute_force() {
        let s = spec(100e6, 1);
        let p = IntegrationPolicy::default();
        let rho = DensityMatrix::ground_mixture();
        let hybrid = run_train(&rho, &s, &p, &levels(), &decays(), 0.0).unwrap();
        for frame in [Frame::Interaction, Frame::Lab] {
            let opts = BruteForceOptions {
                frame,
                step: 0.002e-15,
                ..Default::default()
            };
            let brute = brute_force_run(&rho, &s, &p, &levels(), &decays(), 0.0, &opts).unwrap();
            let d = hybrid.final_state().unwrap().max_abs_diff(&brute.final_state().unwrap());
            assert!(d <= 1e-8, "{frame:?}: {d}");
        }
    }

    #[test]
    fn empty_train() {
        let rho = DensityMatrix::ground_mixture();
        let s = spec(100e6, 0);
        let p = IntegrationPolicy::default();
        let t = run_train(&rho, &s, &p, &levels(), &decays(), 0.0).unwrap();
        assert_eq!(t.snapshots.len(), 1);
        assert_eq!(t.final_state(), Some(rho));
        let b = brute_force_run(&rho, &s, &p, &levels(), &decays(), 0.0, &Default::default()).unwrap();
        assert_eq!(b, t);
    }

    #[test]
    fn brute_force_drive_free_span() {
        let mut s = spec(1e9, 2);
        s.peak_rabi = 0.0;
        let p = IntegrationPolicy::default();
        let mut rho = DensityMatrix::from_populations([0.3, 0.3, 0.2, 0.2]);
        rho.set_hermitian(1, 2, C64::new(0.2, 0.1));
        rho.set_hermitian(2, 4, C64::new(0.05, 0.0));
        let opts = BruteForceOptions {
            step: 1e-15,
            ..Default::default()
        };
        let b = brute_force_run(&rho, &s, &p, &levels(), &decays(), 0.0, &opts).unwrap();
        let span = s.period + 2.0 * p.window(&s);
        let exact = free_evolve(&rho, span, &levels(), &decays());
        assert!(b.final_state().unwrap().max_abs_diff(&exact) <= 1e-9);
    }

    #[test]
    fn span_guard() {
        let s = spec(100e6, 3);
        let rho = DensityMatrix::ground_mixture();
        let err = brute_force_run(&rho, &s, &Default::default(), &levels(), &decays(), 0.0, &Default::default())
            .unwrap_err();
        assert!(matches!(err, Error::SpanGuard { .. }));
    }

    #[test]
    fn coherence_magnitude_independent_of_snapshot_offset() {
        let s = spec(100e6, 20);
        let t = run_train(&DensityMatrix::ground_mixture(), &s, &Default::default(), &levels(), &decays(), 0.0).unwrap();
        let last = t.final_state().unwrap();
        let a = free_evolve(&last, 1e-9, &levels(), &decays()).coherence12().norm();
        let b = free_evolve(&last, 7e-9, &levels(), &decays()).coherence12().norm();
        assert!((a - b).abs() <= 1e-12);
        assert!((a - last.coherence12().norm()).abs() <= 1e-12);
    }

    #[test]
    fn trajectory_queries() {
        let s = spec(100e6, 30);
        let t = run_train(&DensityMatrix::ground_mixture(), &s, &Default::default(), &levels(), &decays(), 0.0).unwrap();
        assert_eq!(t.snapshots.len(), 31);
        assert!(t.snapshots.windows(2).all(|w| w[1].pulse_index == w[0].pulse_index + 1));
        assert!(t.check_invariants(&StateTolerance::default()).is_ok());
        let first = t.pulses_to_coherence(0.01).unwrap();
        assert!(t.abs_rho12()[first] >= 0.01);
        assert!(t.max_population(4) > 0.0);
    }

    #[test]
    fn policy_validation() {
        let mut p = IntegrationPolicy::default();
        assert!(p.validate().is_ok());
        p.window_half_width = 2.0;
        assert!(p.validate().is_err());
        let p = IntegrationPolicy {
            steps_per_carrier_cycle: 8,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let h = IntegrationPolicy::default().step_size(&spec(100e6, 1));
        assert!((h - 1.0 / 375e12 / 64.0).abs() < 1e-30);
    }
}
