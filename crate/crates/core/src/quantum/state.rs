use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|<psi|psi> - 1|` for a state to count as normalized.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Read access shared by dense and sparse kets.
pub trait Ket {
    fn dim(&self) -> usize;

    /// Amplitude at basis index `i`. Panics if `i >= dim`.
    fn amplitude(&self, i: usize) -> Complex64;

    /// Visits stored amplitudes in increasing index order. Every nonzero
    /// amplitude is visited; zero amplitudes may or may not be.
    fn for_each_entry(&self, f: impl FnMut(usize, Complex64));

    fn norm_sqr(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each_entry(|_, a| acc += a.norm_sqr());
        acc
    }

    fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STATE_TOLERANCE
    }

    fn to_dense(&self) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.for_each_entry(|i, a| amps[i] = a);
        StateVector { amps }
    }
}

/// Dense complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::dim("state vector must have dimension >= 1"));
        }
        Ok(Self { amps })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Computational basis ket `|index>` in a space of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::dim(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Returns the state divided by its norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization {
                norm_sqr: norm * norm,
            });
        }
        Ok(Self {
            amps: self.amps.iter().map(|a| a / norm).collect(),
        })
    }
}

impl Ket for StateVector {
    fn dim(&self) -> usize {
        self.amps.len()
    }

    fn amplitude(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    fn for_each_entry(&self, mut f: impl FnMut(usize, Complex64)) {
        for (i, &a) in self.amps.iter().enumerate() {
            f(i, a);
        }
    }
}

/// Sparse ket stored as sorted `(index, amplitude)` pairs with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    dim: usize,
    entries: Vec<(usize, Complex64)>,
}

impl SparseState {
    /// Builds a sparse state. Entries are sorted; duplicate indices are an
    /// error; exact zeros are dropped.
    pub fn new(dim: usize, mut entries: Vec<(usize, Complex64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dim("state vector must have dimension >= 1"));
        }
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::dim(format!("duplicate sparse index {}", w[0].0)));
            }
        }
        if let Some(&(last, _)) = entries.last() {
            if last >= dim {
                return Err(Error::dim(format!(
                    "sparse index {last} outside dimension {dim}"
                )));
            }
        }
        entries.retain(|&(_, a)| a != Complex64::new(0.0, 0.0));
        Ok(Self { dim, entries })
    }

    pub fn from_real(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Self::new(
            dim,
            entries
                .into_iter()
                .map(|(i, v)| (i, Complex64::new(v, 0.0)))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

impl Ket for SparseState {
    fn dim(&self) -> usize {
        self.dim
    }

    fn amplitude(&self, i: usize) -> Complex64 {
        assert!(i < self.dim, "index {i} outside dimension {}", self.dim);
        match self.entries.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    fn for_each_entry(&self, mut f: impl FnMut(usize, Complex64)) {
        for &(i, a) in &self.entries {
            f(i, a);
        }
    }
}

impl From<&StateVector> for SparseState {
    fn from(s: &StateVector) -> Self {
        SparseState {
            dim: s.dim(),
            entries: s
                .amps
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
                .map(|(i, &a)| (i, a))
                .collect(),
        }
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::dim(format!("dimensions {a} and {b} differ")));
    }
    Ok(())
}

/// `<a|b>`-style pairing `sum_i conj(b_i) * a_i`.
///
/// Conjugate-symmetric: `inner_product(a, b) == inner_product(b, a).conj()`.
pub fn inner_product(a: &impl Ket, b: &impl Ket) -> Result<Complex64> {
    check_same_dim(a.dim(), b.dim())?;
    let mut acc = Complex64::new(0.0, 0.0);
    a.for_each_entry(|i, ai| acc += b.amplitude(i).conj() * ai);
    Ok(acc)
}

/// Inner product of two sparse states by merging their sorted supports.
pub fn sparse_inner_product(a: &SparseState, b: &SparseState) -> Result<Complex64> {
    check_same_dim(a.dim, b.dim)?;
    let (mut i, mut j) = (0, 0);
    let mut acc = Complex64::new(0.0, 0.0);
    while i < a.entries.len() && j < b.entries.len() {
        let (ia, va) = a.entries[i];
        let (ib, vb) = b.entries[j];
        match ia.cmp(&ib) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += vb.conj() * va;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(acc)
}

/// Kronecker product; entry `i * b.dim + j` is `a_i * b_j`.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for &ai in &a.amps {
        amps.extend(b.amps.iter().map(|&bj| ai * bj));
    }
    StateVector { amps }
}

/// Concatenates the summands and multiplies every amplitude by `scale`.
pub fn direct_sum(states: &[StateVector], scale: f64) -> Result<StateVector> {
    if states.is_empty() {
        return Err(Error::dim("direct sum of an empty list"));
    }
    let amps = states
        .iter()
        .flat_map(|s| s.amps.iter().map(|&a| a * scale))
        .collect();
    Ok(StateVector { amps })
}
