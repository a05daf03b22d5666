//! Non-RWA optical Bloch equations of the double-lambda system and the
//! classic fourth-order Runge–Kutta stepper that advances them.

use crate::error::{Error, Result};
use crate::state::{DecayRates, DensityMatrix, DensityMatrixDerivative, DriveSample, LevelScheme, C64};

const I: C64 = C64::new(0.0, 1.0);

/// dρ/dt for the ten independent density-matrix equations. The lower
/// triangle of the result is the conjugate of the upper triangle.
///
/// All Rabi values are real, so Ω_ji = Ω_ij and the four drive entries
/// cover every coupling term.
pub fn bloch_rhs(
    state: &DensityMatrix,
    drive: &DriveSample,
    levels: &LevelScheme,
    decays: &DecayRates,
) -> DensityMatrixDerivative {
    rhs_terms(state, drive, [levels.w21(), levels.w31(), levels.w41()], decays)
}

/// The Bloch right-hand side with raw transition frequencies `[ω21, ω31, ω41]`.
/// Passing zeros drops the free-rotation terms, leaving drive and decay.
fn rhs_terms(
    state: &DensityMatrix,
    drive: &DriveSample,
    freqs: [f64; 3],
    decays: &DecayRates,
) -> DensityMatrixDerivative {
    let r = &state.0;
    let (r11, r12, r13, r14) = (r[0][0], r[0][1], r[0][2], r[0][3]);
    let (r21, r22, r23, r24) = (r[1][0], r[1][1], r[1][2], r[1][3]);
    let (r31, r32, r33, r34) = (r[2][0], r[2][1], r[2][2], r[2][3]);
    let (r41, r42, r43, r44) = (r[3][0], r[3][1], r[3][2], r[3][3]);

    let DriveSample { o13, o14, o23, o24 } = *drive;
    let (o31, o41, o32, o42) = (o13, o14, o23, o24);
    let DecayRates { g41, g42, g31, g32 } = *decays;

    let [w21, w31, w41] = freqs;
    let (w32, w42, w43) = (w31 - w21, w41 - w21, w41 - w31);

    let d11 = (g41 * r44 + g31 * r33) + I * (o13 * r31 - o31 * r13) + I * (o14 * r41 - o41 * r14);
    let d22 = (g42 * r44 + g32 * r33) + I * (o23 * r32 - o32 * r23) + I * (o24 * r42 - o42 * r24);
    let d33 = -(g31 + g32) * r33 + I * (o31 * r13 - o13 * r31) + I * (o32 * r23 - o23 * r32);
    let d44 = -(g41 + g42) * r44 + I * (o41 * r14 - o14 * r41) + I * (o42 * r24 - o24 * r42);

    let d12 = I * (w21 * r12 + o13 * r32 + o14 * r42 - o32 * r13 - o42 * r14);
    let d13 = -(g31 / 2.0 + g32 / 2.0) * r13
        + I * (w31 * r13 + o13 * (r33 - r11) + o14 * r43 - o23 * r12);
    let d14 = -(g41 / 2.0 + g42 / 2.0) * r14
        + I * (w41 * r14 + o14 * (r44 - r11) + o13 * r34 - o24 * r12);
    let d23 = -(g31 / 2.0 + g32 / 2.0) * r23
        + I * (w32 * r23 + o23 * (r33 - r22) + o24 * r43 - o13 * r21);
    let d24 = -(g41 / 2.0 + g42 / 2.0) * r24
        + I * (w42 * r24 + o24 * (r44 - r22) + o23 * r34 - o14 * r21);
    let d34 = -(g32 / 2.0 + g31 / 2.0 + g42 / 2.0 + g41 / 2.0) * r34
        + I * (w43 * r34 + o31 * r14 + o32 * r24 - o14 * r31 - o24 * r32);

    DensityMatrix([
        [d11, d12, d13, d14],
        [d12.conj(), d22, d23, d24],
        [d13.conj(), d23.conj(), d33, d34],
        [d14.conj(), d24.conj(), d34.conj(), d44],
    ])
}

/// One classic RK4 step of size `h` starting at time `t`. The drive is
/// sampled at `t`, `t + h/2` and `t + h`. The result is replaced by its
/// Hermitian part; the trace is left alone.
pub fn rk4_step<F>(
    state: &DensityMatrix,
    t: f64,
    h: f64,
    drive_fn: F,
    levels: &LevelScheme,
    decays: &DecayRates,
) -> Result<DensityMatrix>
where
    F: Fn(f64) -> DriveSample,
{
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step must be > 0, got {h}")));
    }
    let d0 = drive_fn(t);
    let dm = drive_fn(t + 0.5 * h);
    let d1 = drive_fn(t + h);
    let next = rk4_combine(state, h, &d0, &dm, &d1, levels, decays);
    if !next.is_finite() {
        return Err(Error::NonFinite { t, h });
    }
    Ok(next)
}

/// RK4 update with drive samples already evaluated at the start, midpoint
/// and end of the step.
pub(crate) fn rk4_combine(
    state: &DensityMatrix,
    h: f64,
    d0: &DriveSample,
    dm: &DriveSample,
    d1: &DriveSample,
    levels: &LevelScheme,
    decays: &DecayRates,
) -> DensityMatrix {
    let k1 = bloch_rhs(state, d0, levels, decays);
    let k2 = bloch_rhs(&axpy(state, &k1, 0.5 * h), dm, levels, decays);
    let k3 = bloch_rhs(&axpy(state, &k2, 0.5 * h), dm, levels, decays);
    let k4 = bloch_rhs(&axpy(state, &k3, h), d1, levels, decays);

    combine(state, h, &k1, &k2, &k3, &k4)
}

fn combine(
    state: &DensityMatrix,
    h: f64,
    k1: &DensityMatrix,
    k2: &DensityMatrix,
    k3: &DensityMatrix,
    k4: &DensityMatrix,
) -> DensityMatrix {
    let mut out = *state;
    let w = h / 6.0;
    for i in 0..4 {
        for j in 0..4 {
            out.0[i][j] += w * (k1.0[i][j] + 2.0 * k2.0[i][j] + 2.0 * k3.0[i][j] + k4.0[i][j]);
        }
    }
    out.hermitian_part()
}

fn axpy(base: &DensityMatrix, dir: &DensityMatrix, a: f64) -> DensityMatrix {
    let mut out = *base;
    for i in 0..4 {
        for j in 0..4 {
            out.0[i][j] += a * dir.0[i][j];
        }
    }
    out
}


/// Phase factors e^{i(ω_j − ω_i)t} of the bare level energies at one
/// instant, for the six upper-triangle pairs (12, 13, 14, 23, 24, 34). They
/// map between lab-frame ρ and the interaction-frame ρ̃ with
/// ρ_ij = ρ̃_ij·e^{i(ω_j − ω_i)t}.
#[derive(Debug, Clone, Copy)]
pub struct FramePhases([C64; 6]);

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl FramePhases {
    pub fn at(t: f64, levels: &LevelScheme) -> Self {
        let e21 = C64::cis(levels.w21() * t);
        let e31 = C64::cis(levels.w31() * t);
        let e41 = C64::cis(levels.w41() * t);
        FramePhases([e21, e31, e41, e31 * e21.conj(), e41 * e21.conj(), e41 * e31.conj()])
    }

    /// ρ̃ → ρ.
    #[inline]
    pub fn to_lab(&self, frame: &DensityMatrix) -> DensityMatrix {
        self.apply(frame, false)
    }

    /// ρ → ρ̃.
    #[inline]
    pub fn to_frame(&self, lab: &DensityMatrix) -> DensityMatrix {
        self.apply(lab, true)
    }

    /// Rebuilds the lower triangle from the upper one, so the input is
    /// assumed Hermitian.
    #[inline]
    fn apply(&self, m: &DensityMatrix, inverse: bool) -> DensityMatrix {
        let mut out = *m;
        for (&(i, j), &e) in PAIRS.iter().zip(self.0.iter()) {
            let e = if inverse { e.conj() } else { e };
            let v = m.0[i][j] * e;
            out.0[i][j] = v;
            out.0[j][i] = v.conj();
        }
        out
    }
}

/// dρ̃/dt in the interaction frame: the Bloch right-hand side without the
/// free-rotation terms, applied to the lab-frame state and rotated back.
pub fn interaction_rhs(
    frame_state: &DensityMatrix,
    drive: &DriveSample,
    phases: &FramePhases,
    decays: &DecayRates,
) -> DensityMatrixDerivative {
    let lab = phases.to_lab(frame_state);
    phases.to_frame(&rhs_terms(&lab, drive, [0.0; 3], decays))
}

/// Drive and frame phases sampled at one instant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrameSample {
    pub drive: DriveSample,
    pub phases: FramePhases,
}

/// Hermitian state stored as four real populations and the six upper
/// coherences in pair order 12, 13, 14, 23, 24, 34.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Packed {
    p: [f64; 4],
    c: [C64; 6],
}

impl Packed {
    pub(crate) fn from_matrix(m: &DensityMatrix) -> Self {
        let mut c = [C64::new(0.0, 0.0); 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            c[k] = (m.0[i][j] + m.0[j][i].conj()) * 0.5;
        }
        Packed {
            p: [m.0[0][0].re, m.0[1][1].re, m.0[2][2].re, m.0[3][3].re],
            c,
        }
    }

    pub(crate) fn to_matrix(&self) -> DensityMatrix {
        let mut m = DensityMatrix::from_populations(self.p);
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            m.0[i][j] = self.c[k];
            m.0[j][i] = self.c[k].conj();
        }
        m
    }

    #[inline]
    fn axpy(&self, d: &Packed, a: f64) -> Packed {
        let mut out = *self;
        for k in 0..4 {
            out.p[k] += a * d.p[k];
        }
        for k in 0..6 {
            out.c[k] += a * d.c[k];
        }
        out
    }
}

/// Interaction-frame derivative on the packed representation. Same terms as
/// [`bloch_rhs`] with the free rotation removed, written out for Hermitian
/// input: i·Ω·(ρ_ji − ρ_ij) = 2·Ω·Im ρ_ij.
#[inline]
fn packed_rhs(state: &Packed, drive: &DriveSample, phases: &FramePhases, decays: &DecayRates) -> Packed {
    let e = &phases.0;
    let [p1, p2, p3, p4] = state.p;
    let r12 = state.c[0] * e[0];
    let r13 = state.c[1] * e[1];
    let r14 = state.c[2] * e[2];
    let r23 = state.c[3] * e[3];
    let r24 = state.c[4] * e[4];
    let r34 = state.c[5] * e[5];

    let DriveSample { o13, o14, o23, o24 } = *drive;
    let DecayRates { g41, g42, g31, g32 } = *decays;
    let (g3, g4) = (g31 + g32, g41 + g42);

    let a13 = 2.0 * o13 * r13.im;
    let a14 = 2.0 * o14 * r14.im;
    let a23 = 2.0 * o23 * r23.im;
    let a24 = 2.0 * o24 * r24.im;

    let d12 = I * (o13 * r23.conj() + o14 * r24.conj() - o23 * r13 - o24 * r14);
    let d13 = -0.5 * g3 * r13 + I * (o13 * (p3 - p1) + o14 * r34.conj() - o23 * r12);
    let d14 = -0.5 * g4 * r14 + I * (o14 * (p4 - p1) + o13 * r34 - o24 * r12);
    let d23 = -0.5 * g3 * r23 + I * (o23 * (p3 - p2) + o24 * r34.conj() - o13 * r12.conj());
    let d24 = -0.5 * g4 * r24 + I * (o24 * (p4 - p2) + o23 * r34 - o14 * r12.conj());
    let d34 = -0.5 * (g3 + g4) * r34 + I * (o13 * r14 + o23 * r24 - o14 * r13.conj() - o24 * r23.conj());

    Packed {
        p: [
            g41 * p4 + g31 * p3 + a13 + a14,
            g42 * p4 + g32 * p3 + a23 + a24,
            -g3 * p3 - a13 - a23,
            -g4 * p4 - a14 - a24,
        ],
        c: [
            d12 * e[0].conj(),
            d13 * e[1].conj(),
            d14 * e[2].conj(),
            d23 * e[3].conj(),
            d24 * e[4].conj(),
            d34 * e[5].conj(),
        ],
    }
}

/// RK4 update of the packed interaction-frame state with samples at the
/// start, midpoint and end of the step. Packing keeps the state Hermitian.
#[inline]
pub(crate) fn rk4_interaction(
    state: &Packed,
    h: f64,
    s0: &FrameSample,
    sm: &FrameSample,
    s1: &FrameSample,
    decays: &DecayRates,
) -> Packed {
    let k1 = packed_rhs(state, &s0.drive, &s0.phases, decays);
    let k2 = packed_rhs(&state.axpy(&k1, 0.5 * h), &sm.drive, &sm.phases, decays);
    let k3 = packed_rhs(&state.axpy(&k2, 0.5 * h), &sm.drive, &sm.phases, decays);
    let k4 = packed_rhs(&state.axpy(&k3, h), &s1.drive, &s1.phases, decays);
    let w = h / 6.0;
    let mut out = *state;
    for k in 0..4 {
        out.p[k] += w * (k1.p[k] + 2.0 * k2.p[k] + 2.0 * k3.p[k] + k4.p[k]);
    }
    for k in 0..6 {
        out.c[k] += w * (k1.c[k] + 2.0 * k2.c[k] + 2.0 * k3.c[k] + k4.c[k]);
    }
    out
}

/// [`interaction_rhs`] evaluated through the packed kernel, for tests.
#[cfg(test)]
pub(crate) fn packed_interaction_rhs(
    frame_state: &DensityMatrix,
    drive: &DriveSample,
    phases: &FramePhases,
    decays: &DecayRates,
) -> DensityMatrix {
    packed_rhs(&Packed::from_matrix(frame_state), drive, phases, decays).to_matrix()
}
