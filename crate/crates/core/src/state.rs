//! Atomic state and level data for the four-level double-lambda system.
//!
//! Levels are labelled 1..4 in the public API: |1⟩ and |2⟩ are the ground
//! pair, |3⟩ and |4⟩ the excited pair. Storage is zero-based.

use std::f64::consts::TAU;
use std::ops::{Add, Index, IndexMut, Mul};

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Full 4×4 density matrix ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub [[C64; 4]; 4]);

/// Time derivative of a density matrix, in s⁻¹.
pub type DensityMatrixDerivative = DensityMatrix;

impl DensityMatrix {
    pub fn zeros() -> Self {
        DensityMatrix([[ZERO; 4]; 4])
    }

    /// Diagonal state with the given populations ρ11..ρ44.
    pub fn from_populations(p: [f64; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, &pi) in p.iter().enumerate() {
            m.0[i][i] = C64::new(pi, 0.0);
        }
        m
    }

    /// Equal ground-state populations and no coherence.
    pub fn ground_mixture() -> Self {
        Self::from_populations([0.5, 0.5, 0.0, 0.0])
    }

    /// Element ρ_ij using 1-based level labels.
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.0[i - 1][j - 1]
    }

    /// Sets ρ_ij and ρ_ji = conj(ρ_ij), 1-based labels.
    pub fn set_hermitian(&mut self, i: usize, j: usize, value: C64) {
        self.0[i - 1][j - 1] = value;
        self.0[j - 1][i - 1] = value.conj();
    }

    pub fn populations(&self) -> [f64; 4] {
        [
            self.0[0][0].re,
            self.0[1][1].re,
            self.0[2][2].re,
            self.0[3][3].re,
        ]
    }

    pub fn coherence12(&self) -> C64 {
        self.0[0][1]
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    /// Largest |ρ_ij − conj(ρ_ji)| over all pairs, diagonal included.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in i..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// (ρ + ρ†)/2.
    pub fn hermitian_part(&self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            out.0[i][i] = C64::new(self.0[i][i].re, 0.0);
            for j in (i + 1)..4 {
                let v = (self.0[i][j] + self.0[j][i].conj()) * 0.5;
                out.0[i][j] = v;
                out.0[j][i] = v.conj();
            }
        }
        out
    }

    pub fn to_matrix(&self) -> Matrix4<C64> {
        Matrix4::from_fn(|i, j| self.0[i][j])
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = SymmetricEigen::new(self.hermitian_part().to_matrix());
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest absolute element difference between two matrices.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Checks the density-matrix invariants at the given tolerances.
    pub fn validate(&self, tol: &StateTolerance) -> std::result::Result<(), String> {
        if !self.is_finite() {
            return Err("non-finite element".into());
        }
        let te = self.trace_error();
        if te > tol.trace {
            return Err(format!("trace error {te:e} exceeds {:e}", tol.trace));
        }
        let he = self.hermiticity_defect();
        if he > tol.hermiticity {
            return Err(format!("hermiticity defect {he:e} exceeds {:e}", tol.hermiticity));
        }
        for (k, p) in self.populations().iter().enumerate() {
            if *p < -tol.population || *p > 1.0 + tol.population {
                return Err(format!("population rho{0}{0} = {p} out of range", k + 1));
            }
        }
        let ev = self.min_eigenvalue();
        if ev < -tol.eigenvalue {
            return Err(format!("min eigenvalue {ev:e} below -{:e}", tol.eigenvalue));
        }
        Ok(())
    }
}

impl Default for DensityMatrix {
    fn default() -> Self {
        Self::ground_mixture()
    }
}

impl Index<(usize, usize)> for DensityMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for DensityMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for DensityMatrix {
    type Output = DensityMatrix;
    fn add(mut self, rhs: DensityMatrix) -> DensityMatrix {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for DensityMatrix {
    type Output = DensityMatrix;
    fn mul(mut self, rhs: f64) -> DensityMatrix {
        for row in self.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= rhs;
            }
        }
        self
    }
}

/// Tolerances for [`DensityMatrix::validate`].
#[derive(Debug, Clone, Copy)]
pub struct StateTolerance {
    pub trace: f64,
    pub hermiticity: f64,
    pub population: f64,
    pub eigenvalue: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        StateTolerance {
            trace: 1e-9,
            hermiticity: 1e-12,
            population: 1e-9,
            eigenvalue: 1e-9,
        }
    }
}

/// Transition angular frequencies ω21, ω31, ω41 in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme {
    w21: f64,
    w31: f64,
    w41: f64,
}

impl LevelScheme {
    pub fn new(w21: f64, w31: f64, w41: f64) -> Result<Self> {
        if !(w21.is_finite() && w31.is_finite() && w41.is_finite()) {
            return Err(Error::invalid("levels", "frequencies must be finite"));
        }
        if w21 <= 0.0 {
            return Err(Error::invalid("w21", format!("must be > 0, got {w21}")));
        }
        if w31 <= w21 {
            return Err(Error::invalid("w31", format!("must exceed w21 ({w31} <= {w21})")));
        }
        if w41 <= w31 {
            return Err(Error::invalid("w41", format!("must exceed w31 ({w41} <= {w31})")));
        }
        Ok(LevelScheme { w21, w31, w41 })
    }

    /// Builds ω_ij = 2π·n_ij·ν from comb indices n21, n41, n43 and repetition
    /// frequency `nu` in Hz.
    pub fn from_comb(n21: f64, n41: f64, n43: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::invalid("rep_rate", format!("must be > 0, got {nu}")));
        }
        let w41 = TAU * n41 * nu;
        let w43 = TAU * n43 * nu;
        Self::new(TAU * n21 * nu, w41 - w43, w41)
    }

    pub fn w21(&self) -> f64 {
        self.w21
    }
    pub fn w31(&self) -> f64 {
        self.w31
    }
    pub fn w41(&self) -> f64 {
        self.w41
    }
    pub fn w32(&self) -> f64 {
        self.w31 - self.w21
    }
    pub fn w42(&self) -> f64 {
        self.w41 - self.w21
    }
    pub fn w43(&self) -> f64 {
        self.w41 - self.w31
    }

    /// Every transition frequency multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.w21 * factor, self.w31 * factor, self.w41 * factor)
    }
}

/// Spontaneous decay rates in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub g41: f64,
    pub g42: f64,
    pub g31: f64,
    pub g32: f64,
}

impl DecayRates {
    pub fn new(g41: f64, g42: f64, g31: f64, g32: f64) -> Result<Self> {
        for (field, v) in [("gamma41", g41), ("gamma42", g42), ("gamma31", g31), ("gamma32", g32)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(DecayRates { g41, g42, g31, g32 })
    }

    pub fn uniform(g: f64) -> Result<Self> {
        Self::new(g, g, g, g)
    }

    pub fn none() -> Self {
        DecayRates {
            g41: 0.0,
            g42: 0.0,
            g31: 0.0,
            g32: 0.0,
        }
    }

    /// Total decay rate out of |3⟩.
    pub fn gamma3(&self) -> f64 {
        self.g31 + self.g32
    }

    /// Total decay rate out of |4⟩.
    pub fn gamma4(&self) -> f64 {
        self.g41 + self.g42
    }

    pub fn lifetime3(&self) -> f64 {
        1.0 / self.gamma3()
    }

    pub fn lifetime4(&self) -> f64 {
        1.0 / self.gamma4()
    }
}

/// Instantaneous real Rabi values (carrier included) for the four dipole
/// allowed transitions, rad/s. Ω_ji = Ω_ij.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriveSample {
    pub o13: f64,
    pub o14: f64,
    pub o23: f64,
    pub o24: f64,
}

impl DriveSample {
    pub fn uniform(value: f64) -> Self {
        DriveSample {
            o13: value,
            o14: value,
            o23: value,
            o24: value,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_frequencies_are_differences() {
        let l = LevelScheme::from_comb(30.0, 3.75e6, 3.6, 100e6).unwrap();
        assert_eq!(l.w32(), l.w31() - l.w21());
        assert_eq!(l.w42(), l.w41() - l.w21());
        assert_eq!(l.w43(), l.w41() - l.w31());
        assert!((l.w21() - TAU * 3e9).abs() < 1e-3);
        assert!((l.w43() / (TAU * 360e6) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_degenerate_levels() {
        assert!(LevelScheme::new(0.0, 1.0, 2.0).is_err());
        assert!(LevelScheme::new(1.0, 1.0, 2.0).is_err());
        assert!(LevelScheme::new(1.0, 3.0, 2.0).is_err());
        assert!(LevelScheme::from_comb(30.0, 3.75e6, 3.6, 0.0).is_err());
    }

    #[test]
    fn decay_lifetimes() {
        let d = DecayRates::uniform(2e7).unwrap();
        assert!((d.lifetime3() - 25e-9).abs() < 1e-20);
        assert!((d.lifetime4() - 25e-9).abs() < 1e-20);
        assert!(DecayRates::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(DecayRates::none().lifetime4().is_infinite());
    }

    #[test]
    fn diagnostics_on_mixture() {
        let rho = DensityMatrix::ground_mixture();
        assert_eq!(rho.trace_error(), 0.0);
        assert_eq!(rho.hermiticity_defect(), 0.0);
        assert!(rho.min_eigenvalue().abs() < 1e-15);
        assert!(rho.validate(&StateTolerance::default()).is_ok());
    }

    #[test]
    fn validate_flags_non_psd() {
        let mut rho = DensityMatrix::ground_mixture();
        rho.set_hermitian(1, 2, C64::new(0.6, 0.0));
        let err = rho.validate(&StateTolerance::default()).unwrap_err();
        assert!(err.contains("eigenvalue"), "{err}");
    }
}
