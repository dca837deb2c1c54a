//! Direct-sum representation of feature vectors in `(C^k)^{+n}`.
//!
//! Pixel `i` occupies block `i` (basis indices `i*k .. i*k + k`). An image
//! pixel `x` is written as `x|0> + sqrt(1 - x^2)|1>`; pixel `i` of component
//! `l` as `v|0> + sqrt(1 - v^2)|l+1>`. The whole vector is scaled by
//! `1/sqrt(n)`. Image residuals and the residuals of different components sit
//! on distinct coordinates, so cross terms vanish and
//! `<Phi(a)|Phi(b)> = <a|b> / n`.

use crate::error::{Error, Result};
use crate::quantum::{sparse_inner_product, Ket, SparseState, StateVector};

/// Component entries may overshoot `[-1, 1]` by this much from rounding; they are clamped.
pub const COMPONENT_RANGE_SLACK: f64 = 1e-12;

/// Coordinate inside each block that carries the image residual.
pub const IMAGE_RESIDUAL_COORDINATE: usize = 1;

/// Smallest block dimension that gives `s` components and the image disjoint residual coordinates.
pub fn block_dim_for(component_count: usize) -> usize {
    component_count + 2
}

/// Common view of the two direct-sum encodings.
pub trait DirectSumEncoding {
    fn state(&self) -> &SparseState;
    fn pixel_count(&self) -> usize;
    fn block_dim(&self) -> usize;

    /// The same vector before the `1/sqrt(n)` scale (squared norm `n`).
    fn blocks(&self) -> &SparseState;

    /// The classical vector stored at coordinate 0 of every block.
    fn leading_amplitudes(&self) -> Vec<f64> {
        let k = self.block_dim();
        (0..self.pixel_count())
            .map(|i| self.blocks().amplitude(i * k).re)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    state: SparseState,
    blocks: SparseState,
    n: usize,
    k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedComponent {
    state: SparseState,
    blocks: SparseState,
    n: usize,
    k: usize,
    index: usize,
}

impl EncodedImage {
    pub fn to_dense(&self) -> StateVector {
        self.state.to_dense()
    }
}

impl EncodedComponent {
    /// One-based component index `l`; its residual lives at coordinate `l + 1`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn to_dense(&self) -> StateVector {
        self.state.to_dense()
    }

    pub fn into_state(self) -> SparseState {
        self.state
    }
}

impl DirectSumEncoding for EncodedImage {
    fn state(&self) -> &SparseState {
        &self.state
    }
    fn pixel_count(&self) -> usize {
        self.n
    }
    fn block_dim(&self) -> usize {
        self.k
    }
    fn blocks(&self) -> &SparseState {
        &self.blocks
    }
}

impl DirectSumEncoding for EncodedComponent {
    fn state(&self) -> &SparseState {
        &self.state
    }
    fn pixel_count(&self) -> usize {
        self.n
    }
    fn block_dim(&self) -> usize {
        self.k
    }
    fn blocks(&self) -> &SparseState {
        &self.blocks
    }
}

/// Normalized state and unscaled blocks from unscaled `(index, amplitude)` pairs.
fn scaled_pair(
    n: usize,
    k: usize,
    entries: Vec<(usize, f64)>,
) -> Result<(SparseState, SparseState)> {
    let scale = 1.0 / (n as f64).sqrt();
    let state = SparseState::from_real(n * k, entries.iter().map(|&(i, a)| (i, a * scale)))?;
    Ok((state, SparseState::from_real(n * k, entries)?))
}

/// `x -> (x, sqrt(1 - x^2))` for `x` in `[0, 1]`.
pub fn encode_pixel(x: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::range(format!("pixel value {x} outside [0, 1]")));
    }
    Ok([x, residual(x)])
}

fn residual(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

fn check_shape(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::dim("feature vector must have at least one entry"));
    }
    if k < 2 {
        return Err(Error::dim(format!("block dimension {k} is below 2")));
    }
    n.checked_mul(k)
        .ok_or_else(|| Error::dim("encoded dimension overflows"))?;
    Ok(())
}

pub fn encode_image(x: &[f64], k: usize) -> Result<EncodedImage> {
    let n = x.len();
    check_shape(n, k)?;
    let mut entries = Vec::with_capacity(2 * n);
    for (i, &xi) in x.iter().enumerate() {
        let [a, b] = encode_pixel(xi)
            .map_err(|_| Error::range(format!("pixel {i} value {xi} outside [0, 1]")))?;
        entries.push((i * k, a));
        entries.push((i * k + IMAGE_RESIDUAL_COORDINATE, b));
    }
    let (state, blocks) = scaled_pair(n, k, entries)?;
    Ok(EncodedImage {
        state,
        blocks,
        n,
        k,
    })
}

/// Encodes component `l` (one-based) of a set into blocks of dimension `k >= l + 2`.
pub fn encode_component(v: &[f64], l: usize, k: usize) -> Result<EncodedComponent> {
    let n = v.len();
    check_shape(n, k)?;
    if l == 0 {
        return Err(Error::range("component index is one-based"));
    }
    if k < l + 2 {
        return Err(Error::dim(format!(
            "block dimension {k} has no coordinate {} for component {l}",
            l + 1
        )));
    }
    let mut entries = Vec::with_capacity(2 * n);
    for (i, &vi) in v.iter().enumerate() {
        if vi.is_nan() || vi.abs() > 1.0 + COMPONENT_RANGE_SLACK {
            return Err(Error::range(format!(
                "component entry {i} value {vi} outside [-1, 1]"
            )));
        }
        let vi = vi.clamp(-1.0, 1.0);
        entries.push((i * k, vi));
        entries.push((i * k + l + 1, residual(vi)));
    }
    let (state, blocks) = scaled_pair(n, k, entries)?;
    Ok(EncodedComponent {
        state,
        blocks,
        n,
        k,
        index: l,
    })
}

/// Real part of the quantum inner product of two encodings sharing `n` and `k`.
/// The `1/n` from the two scales is applied once to the block overlap, so
/// dyadic inputs give exact results.
pub fn representation_inner_product(
    a: &impl DirectSumEncoding,
    b: &impl DirectSumEncoding,
) -> Result<f64> {
    if a.pixel_count() != b.pixel_count() || a.block_dim() != b.block_dim() {
        return Err(Error::dim(format!(
            "encodings differ in shape: n={}, k={} vs n={}, k={}",
            a.pixel_count(),
            a.block_dim(),
            b.pixel_count(),
            b.block_dim()
        )));
    }
    Ok(sparse_inner_product(a.blocks(), b.blocks())?.re / a.pixel_count() as f64)
}
