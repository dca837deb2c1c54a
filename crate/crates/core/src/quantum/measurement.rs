use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{inner_product, Ket, SparseState, StateVector, STATE_TOLERANCE};
use crate::error::{Error, Result};

/// Tolerance for operator identities (idempotence, hermiticity, orthonormality).
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

/// Largest ambient dimension for which a dense projector matrix is built.
pub const MAX_DENSE_DIM: usize = 4096;

/// Outcome labels of a two-outcome measurement `{P, 1 - P}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Yes,
    No,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Yes => "yes",
            Outcome::No => "no",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: Outcome,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Dense row-major projector matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProjector {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseProjector {
    /// Validates `P = P^dagger` and `P^2 = P` entrywise within [`OPERATOR_TOLERANCE`].
    pub fn from_matrix(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dense_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::dim(format!(
                "expected {} matrix entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let p = Self { dim, entries };
        let herm = p.hermiticity_error();
        if herm > OPERATOR_TOLERANCE {
            return Err(Error::NotProjector(format!(
                "matrix is not Hermitian (max deviation {herm:e})"
            )));
        }
        let idem = p.idempotence_error();
        if idem > OPERATOR_TOLERANCE {
            return Err(Error::NotProjector(format!(
                "matrix is not idempotent (max deviation {idem:e})"
            )));
        }
        Ok(p)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dense_dim(dim)?;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `max_ij |P_ij - conj(P_ji)|`
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `max_ij |(P^2)_ij - P_ij|`, computed one row of `P^2` at a time.
    pub fn idempotence_error(&self) -> f64 {
        let d = self.dim;
        if self.entries.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = self.entries.iter().map(|z| z.re).collect();
            let mut acc = vec![0.0_f64; d];
            let mut worst = 0.0_f64;
            for i in 0..d {
                acc.iter_mut().for_each(|a| *a = 0.0);
                let row_i = &re[i * d..(i + 1) * d];
                for (k, &pik) in row_i.iter().enumerate() {
                    if pik == 0.0 {
                        continue;
                    }
                    let row_k = &re[k * d..(k + 1) * d];
                    for (a, &pkj) in acc.iter_mut().zip(row_k) {
                        *a += pik * pkj;
                    }
                }
                for (a, &pij) in acc.iter().zip(row_i) {
                    worst = worst.max((a - pij).abs());
                }
            }
            return worst;
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); d];
        let mut worst = 0.0_f64;
        for i in 0..d {
            acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            let row_i = &self.entries[i * d..(i + 1) * d];
            for (k, &pik) in row_i.iter().enumerate() {
                if pik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row_k = &self.entries[k * d..(k + 1) * d];
                for (a, &pkj) in acc.iter_mut().zip(row_k) {
                    *a += pik * pkj;
                }
            }
            for (a, &pij) in acc.iter().zip(row_i) {
                worst = worst.max((a - pij).norm());
            }
        }
        worst
    }

    pub fn apply(&self, phi: &impl Ket) -> Result<StateVector> {
        check_dim(self.dim, phi.dim())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        phi.for_each_entry(|j, a| {
            if a == Complex64::new(0.0, 0.0) {
                return;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[i * self.dim + j] * a;
            }
        });
        StateVector::new(out)
    }

    fn expectation(&self, phi: &impl Ket) -> Result<f64> {
        let p_phi = self.apply(phi)?;
        Ok(inner_product(&p_phi, phi)?.re)
    }

    fn complement_expectation(&self, phi: &impl Ket) -> Result<f64> {
        // <phi|(1 - P)|phi> evaluated entry by entry of (1 - P)|phi>.
        let p_phi = self.apply(phi)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &pi) in p_phi.amplitudes().iter().enumerate() {
            let a = phi.amplitude(i);
            acc += a.conj() * (a - pi);
        }
        Ok(acc.re)
    }
}

/// Projector held implicitly as `sum_l |v_l><v_l|` over an orthonormal list.
#[derive(Debug, Clone, PartialEq)]
pub struct GramProjector {
    dim: usize,
    basis: Vec<SparseState>,
}

impl GramProjector {
    /// Checks pairwise orthonormality of `basis` within [`OPERATOR_TOLERANCE`].
    pub fn new(dim: usize, basis: Vec<SparseState>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dim("projector dimension must be >= 1"));
        }
        for v in &basis {
            check_dim(dim, v.dim())?;
        }
        let worst = orthonormality_error(&basis);
        if worst > OPERATOR_TOLERANCE {
            return Err(Error::NotProjector(format!(
                "spanning vectors are not orthonormal (max Gram deviation {worst:e})"
            )));
        }
        Ok(Self { dim, basis })
    }

    /// Identity on `dim` as a Gram list of computational basis kets.
    pub fn identity(dim: usize) -> Result<Self> {
        let basis = (0..dim)
            .map(|i| SparseState::from_real(dim, [(i, 1.0)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[SparseState] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `sum_l |<v_l|phi>|^2`. Does not require `phi` to be normalized.
    pub fn expectation(&self, phi: &impl Ket) -> Result<f64> {
        check_dim(self.dim, phi.dim())?;
        let mut acc = 0.0;
        for v in &self.basis {
            acc += inner_product(v, phi)?.norm_sqr();
        }
        Ok(acc)
    }

    pub fn apply(&self, phi: &impl Ket) -> Result<StateVector> {
        check_dim(self.dim, phi.dim())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for v in &self.basis {
            let coeff = inner_product(phi, v)?;
            for &(i, a) in v.entries() {
                out[i] += a * coeff;
            }
        }
        StateVector::new(out)
    }

    /// `|| phi - P phi ||^2`, the weight left outside the spanned subspace.
    fn complement_expectation(&self, phi: &impl Ket) -> Result<f64> {
        let residual = self.residual(phi)?;
        Ok(residual.norm_sqr())
    }

    fn residual(&self, phi: &impl Ket) -> Result<StateVector> {
        let p_phi = self.apply(phi)?;
        let amps = p_phi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, &p)| phi.amplitude(i) - p)
            .collect();
        StateVector::new(amps)
    }

    /// Materializes `sum_l |v_l><v_l|`; refused above [`MAX_DENSE_DIM`].
    pub fn to_dense(&self) -> Result<DenseProjector> {
        check_dense_dim(self.dim)?;
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for v in &self.basis {
            for &(i, a) in v.entries() {
                for &(j, b) in v.entries() {
                    entries[i * d + j] += a * b.conj();
                }
            }
        }
        Ok(DenseProjector { dim: d, entries })
    }
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub fn orthonormality_error(vectors: &[SparseState]) -> f64 {
    let mut worst = 0.0_f64;
    for (a, va) in vectors.iter().enumerate() {
        for (b, vb) in vectors.iter().enumerate().skip(a) {
            let g = match super::state::sparse_inner_product(va, vb) {
                Ok(g) => g,
                Err(_) => return f64::INFINITY,
            };
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectorOperator {
    Dense(DenseProjector),
    Gram(GramProjector),
}

impl ProjectorOperator {
    pub fn dim(&self) -> usize {
        match self {
            ProjectorOperator::Dense(p) => p.dim(),
            ProjectorOperator::Gram(p) => p.dim(),
        }
    }

    pub fn apply(&self, phi: &impl Ket) -> Result<StateVector> {
        match self {
            ProjectorOperator::Dense(p) => p.apply(phi),
            ProjectorOperator::Gram(p) => p.apply(phi),
        }
    }

    pub fn to_dense(&self) -> Result<DenseProjector> {
        match self {
            ProjectorOperator::Dense(p) => Ok(p.clone()),
            ProjectorOperator::Gram(p) => p.to_dense(),
        }
    }

    fn raw_expectation(&self, phi: &impl Ket) -> Result<f64> {
        match self {
            ProjectorOperator::Dense(p) => p.expectation(phi),
            ProjectorOperator::Gram(p) => p.expectation(phi),
        }
    }

    fn raw_complement_expectation(&self, phi: &impl Ket) -> Result<f64> {
        match self {
            ProjectorOperator::Dense(p) => p.complement_expectation(phi),
            ProjectorOperator::Gram(p) => p.complement_expectation(phi),
        }
    }
}

impl From<DenseProjector> for ProjectorOperator {
    fn from(p: DenseProjector) -> Self {
        ProjectorOperator::Dense(p)
    }
}

impl From<GramProjector> for ProjectorOperator {
    fn from(p: GramProjector) -> Self {
        ProjectorOperator::Gram(p)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::dim(format!(
            "operator acts on dimension {expected}, state has dimension {got}"
        )));
    }
    Ok(())
}

fn check_dense_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DENSE_DIM {
        return Err(Error::dim(format!(
            "dense projector dimension {dim} outside 1..={MAX_DENSE_DIM}"
        )));
    }
    Ok(())
}

fn check_normalized(phi: &impl Ket) -> Result<()> {
    let norm_sqr = phi.norm_sqr();
    if (norm_sqr - 1.0).abs() > STATE_TOLERANCE {
        return Err(Error::Normalization { norm_sqr });
    }
    Ok(())
}

/// `<phi|P|phi>` for a normalized `phi`, clamped to `[0, 1]`.
pub fn outcome_probability(p: &ProjectorOperator, phi: &impl Ket) -> Result<f64> {
    check_dim(p.dim(), phi.dim())?;
    check_normalized(phi)?;
    Ok(p.raw_expectation(phi)?.clamp(0.0, 1.0))
}

/// Projects `phi` onto `P` and renormalizes.
pub fn collapse(p: &ProjectorOperator, phi: &impl Ket) -> Result<MeasurementOutcome> {
    let probability = outcome_probability(p, phi)?;
    if probability <= STATE_TOLERANCE {
        return Err(Error::ZeroProbability);
    }
    let projected = p.apply(phi)?;
    Ok(MeasurementOutcome {
        label: Outcome::Yes,
        probability,
        post_state: projected.normalized()?,
    })
}

/// The two-outcome measurement `{P, 1 - P}` with outcomes yes / no.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMeasurement {
    yes: ProjectorOperator,
}

impl BinaryMeasurement {
    pub fn new(yes: ProjectorOperator) -> Self {
        Self { yes }
    }

    pub fn projector(&self) -> &ProjectorOperator {
        &self.yes
    }

    pub fn probability(&self, outcome: Outcome, phi: &impl Ket) -> Result<f64> {
        match outcome {
            Outcome::Yes => outcome_probability(&self.yes, phi),
            Outcome::No => {
                check_dim(self.yes.dim(), phi.dim())?;
                check_normalized(phi)?;
                Ok(self.yes.raw_complement_expectation(phi)?.clamp(0.0, 1.0))
            }
        }
    }

    pub fn collapse(&self, outcome: Outcome, phi: &impl Ket) -> Result<MeasurementOutcome> {
        let probability = self.probability(outcome, phi)?;
        if probability <= STATE_TOLERANCE {
            return Err(Error::ZeroProbability);
        }
        let projected = match outcome {
            Outcome::Yes => self.yes.apply(phi)?,
            Outcome::No => {
                let p_phi = self.yes.apply(phi)?;
                let amps = p_phi
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| phi.amplitude(i) - p)
                    .collect();
                StateVector::new(amps)?
            }
        };
        Ok(MeasurementOutcome {
            label: outcome,
            probability,
            post_state: projected.normalized()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::from_real(v).unwrap()
    }

    fn gram(dim: usize, kets: &[&[f64]]) -> ProjectorOperator {
        let basis = kets
            .iter()
            .map(|k| SparseState::from(&sv(k)))
            .collect::<Vec<_>>();
        GramProjector::new(dim, basis).unwrap().into()
    }

    #[test]
    fn amplitude_squared_rule() {
        let p = gram(2, &[&[1.0, 0.0]]);
        let prob = outcome_probability(&p, &sv(&[0.6, 0.8])).unwrap();
        assert!((prob - 0.36).abs() < 1e-15);
        let dense: ProjectorOperator = p.to_dense().unwrap().into();
        let prob = outcome_probability(&dense, &sv(&[0.6, 0.8])).unwrap();
        assert!((prob - 0.36).abs() < 1e-15);
    }

    #[test]
    fn identity_is_complete() {
        let phi = sv(&[0.6, 0.0, 0.8]);
        for p in [
            ProjectorOperator::from(GramProjector::identity(3).unwrap()),
            ProjectorOperator::from(DenseProjector::identity(3).unwrap()),
        ] {
            assert!((outcome_probability(&p, &phi).unwrap() - 1.0).abs() < 1e-15);
            let out = collapse(&p, &phi).unwrap();
            assert!((out.probability - 1.0).abs() < 1e-15);
            for (a, b) in out.post_state.amplitudes().iter().zip(phi.amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn orthogonal_subspace_has_zero_probability() {
        let p = gram(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let phi = sv(&[0.0, 0.0, 1.0]);
        assert_eq!(outcome_probability(&p, &phi).unwrap(), 0.0);
        assert!(matches!(collapse(&p, &phi), Err(Error::ZeroProbability)));
    }

    #[test]
    fn collapse_examples() {
        let p = gram(2, &[&[1.0, 0.0]]);
        let out = collapse(&p, &sv(&[0.6, 0.8])).unwrap();
        assert!((out.probability - 0.36).abs() < 1e-15);
        assert_eq!(out.label, Outcome::Yes);
        assert!((out.post_state.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert_eq!(out.post_state.amplitudes()[1].norm(), 0.0);

        let p = gram(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let out = collapse(&p, &sv(&[0.6, 0.0, 0.8])).unwrap();
        assert!((out.probability - 0.36).abs() < 1e-15);
        let expected = [1.0, 0.0, 0.0];
        for (a, e) in out.post_state.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-15);
        }
        let again = outcome_probability(&p, &out.post_state).unwrap();
        assert!((again - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let p = gram(2, &[&[1.0, 0.0]]);
        let err = outcome_probability(&p, &sv(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = gram(2, &[&[1.0, 0.0]]);
        assert!(matches!(
            outcome_probability(&p, &sv(&[1.0, 0.0, 0.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn non_orthonormal_gram_rejected() {
        let basis = vec![
            SparseState::from(&sv(&[0.6, 0.8])),
            SparseState::from(&sv(&[0.8, 0.6])),
        ];
        assert!(matches!(
            GramProjector::new(2, basis),
            Err(Error::NotProjector(_))
        ));
    }

    #[test]
    fn dense_validation() {
        let half = Complex64::new(0.5, 0.0);
        let p = DenseProjector::from_matrix(2, vec![half, half, half, half]).unwrap();
        assert!((p.trace().re - 1.0).abs() < 1e-15);
        // Hermitian but not idempotent.
        let bad = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(DenseProjector::from_matrix(2, bad).is_err());
        // Idempotent but not Hermitian.
        let oblique = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(DenseProjector::from_matrix(2, oblique).is_err());
        assert!(DenseProjector::identity(MAX_DENSE_DIM + 1).is_err());
    }

    #[test]
    fn complex_projector_idempotence() {
        // |v><v| with v = (1, i)/sqrt(2)
        let h = 0.5;
        let entries = vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, -h),
            Complex64::new(0.0, h),
            Complex64::new(h, 0.0),
        ];
        let p = DenseProjector::from_matrix(2, entries).unwrap();
        assert!(p.idempotence_error() < 1e-15);
    }

    #[test]
    fn binary_measurement_no_branch() {
        let m = BinaryMeasurement::new(gram(2, &[&[1.0, 0.0]]));
        let phi = sv(&[0.6, 0.8]);
        let no = m.probability(Outcome::No, &phi).unwrap();
        assert!((no - 0.64).abs() < 1e-15);
        let out = m.collapse(Outcome::No, &phi).unwrap();
        assert_eq!(out.label, Outcome::No);
        assert!((out.post_state.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }
}
