//! Flexible representation of quantum images (FRQI).
//!
//! A `2^n x 2^n` image becomes `2^-n * sum_i (cos t_i|0> + sin t_i|1>) (x) |i>`,
//! with the color qubit as the leading tensor factor: basis index
//! `c * 4^n + i`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{tensor_product, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct FrqiImage {
    state: StateVector,
    thetas: Vec<f64>,
    side_log2: u32,
}

impl FrqiImage {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Image side length `2^n`.
    pub fn side(&self) -> usize {
        1 << self.side_log2
    }

    pub fn positions(&self) -> usize {
        self.thetas.len()
    }

    /// Amplitude of `|color> (x) |position>`.
    pub fn amplitude(&self, color: usize, position: usize) -> Complex64 {
        assert!(color < 2 && position < self.positions());
        self.state.amplitudes()[color * self.positions() + position]
    }
}

fn side_log2_of(positions: usize) -> Result<u32> {
    if positions == 0 || !positions.is_power_of_two() || positions.trailing_zeros() % 2 != 0 {
        return Err(Error::dim(format!(
            "{positions} angles do not form a 2^n x 2^n grid"
        )));
    }
    Ok(positions.trailing_zeros() / 2)
}

/// Angles are given row-major, one per pixel, each in `[0, pi/2]`.
pub fn encode_frqi(thetas: &[f64]) -> Result<FrqiImage> {
    let side_log2 = side_log2_of(thetas.len())?;
    let positions = thetas.len();
    for (i, &t) in thetas.iter().enumerate() {
        if !(0.0..=FRAC_PI_2).contains(&t) {
            return Err(Error::range(format!(
                "angle {i} value {t} outside [0, pi/2]"
            )));
        }
    }
    let scale = 1.0 / (1u64 << side_log2) as f64;
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * positions];
    for (i, &t) in thetas.iter().enumerate() {
        let color = StateVector::from_real(&[t.cos(), t.sin()])?;
        let position = StateVector::basis(positions, i)?;
        let term = tensor_product(&color, &position);
        for (a, b) in amps.iter_mut().zip(term.amplitudes()) {
            *a += b * scale;
        }
    }
    Ok(FrqiImage {
        state: StateVector::new(amps)?,
        thetas: thetas.to_vec(),
        side_log2,
    })
}

/// Maps intensities in `[0, 1]` to angles `(pi/2) x` and encodes them.
pub fn encode_frqi_intensities(x: &[f64]) -> Result<FrqiImage> {
    let thetas = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if (0.0..=1.0).contains(&v) {
                Ok((FRAC_PI_2 * v).min(FRAC_PI_2))
            } else {
                Err(Error::range(format!(
                    "intensity {i} value {v} outside [0, 1]"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    encode_frqi(&thetas)
}
