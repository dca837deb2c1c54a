//! Classical training phase: normalized sample matrix, SVD, and extraction
//! of the leading right singular vectors as feature-space components.

mod svd;

pub use svd::{svd, SvdResult, RANK_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Tolerance on row norms of a [`DataMatrix`].
pub const ROW_NORM_TOLERANCE: f64 = 1e-12;

/// Default cumulative-variance threshold for automatic component selection.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.95;

/// `m x n` matrix of vertically stacked, l2-normalized samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    matrix: Matrix,
}

impl DataMatrix {
    /// Stacks the samples as rows, each divided by its l2 norm.
    pub fn from_samples<S: AsRef<[f64]>>(samples: &[S]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::dim("at least one sample is required"))?;
        let n = first.as_ref().len();
        if n == 0 {
            return Err(Error::dim("samples must have at least one feature"));
        }
        let mut rows = Vec::with_capacity(samples.len());
        for (index, s) in samples.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != n {
                return Err(Error::dim(format!(
                    "sample {index} has {} features, expected {n}",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "sample {index} has non-finite entries"
                )));
            }
            let len = norm(s);
            if len == 0.0 {
                return Err(Error::DegenerateSample { index });
            }
            rows.push(s.iter().map(|v| v / len).collect::<Vec<_>>());
        }
        Ok(Self {
            matrix: Matrix::from_rows(&rows)?,
        })
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn sample_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn feature_count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    /// Copy with the column mean subtracted from every row.
    pub fn centered(&self) -> Matrix {
        let (m, n) = (self.matrix.rows(), self.matrix.cols());
        let mut mean = vec![0.0; n];
        for i in 0..m {
            for (acc, v) in mean.iter_mut().zip(self.matrix.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);
        let mut out = self.matrix.clone();
        for i in 0..m {
            for (j, mu) in mean.iter().enumerate() {
                out[(i, j)] -= mu;
            }
        }
        out
    }

    pub fn svd(&self) -> Result<SvdResult> {
        svd(&self.matrix)
    }
}

/// Ordered orthonormal feature-space directions with their singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalComponents {
    components: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
}

impl PrincipalComponents {
    /// Wraps already-extracted components; checks shape only.
    pub fn new(components: Vec<Vec<f64>>, singular_values: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::dim("at least one component is required"));
        }
        if components.len() != singular_values.len() {
            return Err(Error::dim(format!(
                "{} components but {} singular values",
                components.len(),
                singular_values.len()
            )));
        }
        let n = components[0].len();
        if n == 0 || components.iter().any(|c| c.len() != n) {
            return Err(Error::dim("components must share a nonzero length"));
        }
        Ok(Self {
            components,
            singular_values,
        })
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn feature_count(&self) -> usize {
        self.components[0].len()
    }

    /// Largest deviation of the component Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (a, ca) in self.components.iter().enumerate() {
            for (b, cb) in self.components.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(ca, cb) - target).abs());
            }
        }
        worst
    }

    /// `sum_l <V_l|x>^2`, the squared projection of `x` onto the span.
    pub fn projection_mass(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_count() {
            return Err(Error::dim(format!(
                "vector has {} features, components have {}",
                x.len(),
                self.feature_count()
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|c| {
                let p = dot(c, x);
                p * p
            })
            .sum())
    }
}

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSelection {
    Count(usize),
    /// Smallest `s` whose leading squared singular values carry at least this
    /// fraction of the total.
    VarianceThreshold(f64),
}

impl Default for ComponentSelection {
    fn default() -> Self {
        ComponentSelection::VarianceThreshold(DEFAULT_VARIANCE_THRESHOLD)
    }
}

impl ComponentSelection {
    pub fn resolve(&self, singular_values: &[f64]) -> Result<usize> {
        let rank = singular_values
            .iter()
            .take_while(|&&s| s > RANK_THRESHOLD)
            .count();
        match *self {
            ComponentSelection::Count(s) => {
                if s == 0 {
                    return Err(Error::range("component count must be at least 1"));
                }
                Ok(s)
            }
            ComponentSelection::VarianceThreshold(tau) => {
                if !(tau > 0.0 && tau <= 1.0) {
                    return Err(Error::range(format!(
                        "variance threshold {tau} outside (0, 1]"
                    )));
                }
                if rank == 0 {
                    return Err(Error::Rank {
                        requested: 1,
                        rank: 0,
                    });
                }
                let total: f64 = singular_values[..rank].iter().map(|s| s * s).sum();
                let mut acc = 0.0;
                for (i, s) in singular_values[..rank].iter().enumerate() {
                    acc += s * s;
                    if acc / total >= tau {
                        return Ok(i + 1);
                    }
                }
                Ok(rank)
            }
        }
    }
}

/// First `s` right singular vectors, sign-fixed so each one's largest
/// magnitude entry is positive (first index wins ties).
pub fn extract_components(svd: &SvdResult, s: usize) -> Result<PrincipalComponents> {
    let rank = svd.numerical_rank();
    if s == 0 || s > rank {
        return Err(Error::Rank { requested: s, rank });
    }
    let components = (0..s)
        .map(|l| {
            let mut c = svd.v.column(l);
            canonicalize_sign(&mut c);
            c
        })
        .collect();
    PrincipalComponents::new(components, svd.singular_values[..s].to_vec())
}

fn canonicalize_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
