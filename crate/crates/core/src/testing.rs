//! Shared proptest strategies.

use proptest::prelude::*;

use crate::state::{DensityMatrix, DriveSample, C64};

/// Random valid density matrix ρ = A·A†/tr(A·A†).
pub fn density_matrix() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0f64..1.0, 32).prop_map(|v| {
        let a: Vec<C64> = v.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let mut m = DensityMatrix::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| a[4 * i + k] * a[4 * j + k].conj()).sum();
            }
        }
        let tr = m.trace().re.max(1e-3);
        m * (1.0 / tr)
    })
}

/// Four independent Rabi values up to `scale` rad/s in magnitude.
pub fn drive(scale: f64) -> impl Strategy<Value = DriveSample> {
    prop::array::uniform4(-scale..scale).prop_map(|[o13, o14, o23, o24]| DriveSample { o13, o14, o23, o24 })
}
