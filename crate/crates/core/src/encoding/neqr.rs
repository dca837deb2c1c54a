//! Novel enhanced quantum representation (NEQR).
//!
//! Pixel `(y, x)` of a `2^n x 2^n` grid with `q`-bit intensity `C` contributes
//! basis state `|C>|y>|x>` with amplitude `2^-n`. The basis index is
//! `C << 2n | y << n | x`, so the intensity bits are the most significant.

use crate::error::{Error, Result};
use crate::quantum::SparseState;

/// Largest supported intensity bit depth.
pub const MAX_BIT_DEPTH: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct NeqrImage {
    state: SparseState,
    side_log2: u32,
    bit_depth: u32,
}

impl NeqrImage {
    pub fn state(&self) -> &SparseState {
        &self.state
    }

    pub fn side(&self) -> usize {
        1 << self.side_log2
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    /// Reads every pixel back from the nonzero basis indices, row-major.
    pub fn decode(&self) -> Result<Vec<u32>> {
        let n = self.side_log2;
        let side = self.side();
        let mut grid = vec![None; side * side];
        for &(index, _) in self.state.entries() {
            let position = index & ((1usize << (2 * n)) - 1);
            let intensity = (index >> (2 * n)) as u32;
            if grid[position].replace(intensity).is_some() {
                return Err(Error::Numerical(format!(
                    "position {position} carries more than one intensity"
                )));
            }
        }
        grid.into_iter()
            .enumerate()
            .map(|(p, v)| {
                v.ok_or_else(|| Error::Numerical(format!("position {p} carries no intensity")))
            })
            .collect()
    }
}

/// `intensities` is the row-major `side x side` grid; `side` must be a power of two `>= 2`.
pub fn encode_neqr(intensities: &[u32], side: usize, bit_depth: u32) -> Result<NeqrImage> {
    if side < 2 || !side.is_power_of_two() {
        return Err(Error::dim(format!(
            "side {side} is not a power of two >= 2"
        )));
    }
    if intensities.len() != side * side {
        return Err(Error::dim(format!(
            "grid has {} pixels, expected {}",
            intensities.len(),
            side * side
        )));
    }
    if bit_depth == 0 || bit_depth > MAX_BIT_DEPTH {
        return Err(Error::range(format!(
            "bit depth {bit_depth} outside 1..={MAX_BIT_DEPTH}"
        )));
    }
    let n = side.trailing_zeros();
    let dim = (1usize << bit_depth)
        .checked_mul(side * side)
        .ok_or_else(|| Error::dim("NEQR dimension overflows"))?;
    let max = (1u32 << bit_depth) - 1;
    let amp = 1.0 / side as f64;
    let mut entries = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let c = intensities[y * side + x];
            if c > max {
                return Err(Error::range(format!(
                    "intensity {c} at ({y}, {x}) exceeds {max}"
                )));
            }
            let index = ((c as usize) << (2 * n)) | (y << n) | x;
            entries.push((index, amp));
        }
    }
    Ok(NeqrImage {
        state: SparseState::from_real(dim, entries)?,
        side_log2: n,
        bit_depth,
    })
}
