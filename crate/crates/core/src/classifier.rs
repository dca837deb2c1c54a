//! Measurement construction and the repeated-measurement classification
//! protocol.
//!
//! The yes-projector is `sum_l |Phi(V_l)><Phi(V_l)|` over the encoded
//! components and is never materialized. For an input `x`, one measurement
//! answers yes with probability `P = <Phi(x)|Pi|Phi(x)> = M / n^2`, where
//! `M = sum_l <V_l|x>^2`. The protocol measures `n^2` fresh copies and
//! answers yes if any copy does, so the overall no-probability is
//! `(1 - P)^(n^2)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    block_dim_for, encode_component, encode_image, representation_inner_product, DirectSumEncoding,
    EncodedComponent,
};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::pca::{extract_components, ComponentSelection, DataMatrix, PrincipalComponents};
use crate::quantum::{
    orthonormality_error, GramProjector, Outcome, SparseState, OPERATOR_TOLERANCE,
};

/// Identifier of the encoding a model was built for.
pub const ENCODING_ID: &str = "direct-sum/k=s+2";

/// Classical component orthonormality accepted when a model is assembled.
pub const COMPONENT_ORTHONORMALITY_TOLERANCE: f64 = 1e-8;

/// Training provenance stored alongside a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub sample_count: usize,
    pub selection: ComponentSelection,
    #[serde(default)]
    pub centered: bool,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl ModelMetadata {
    pub fn new(sample_count: usize, selection: ComponentSelection) -> Self {
        Self {
            sample_count,
            selection,
            centered: false,
            created_unix: 0,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    components: PrincipalComponents,
    encoded: Vec<EncodedComponent>,
    projector: GramProjector,
    n: usize,
    k: usize,
    metadata: ModelMetadata,
}

impl ClassifierModel {
    /// Encodes the components with `k = s + 2` and checks the invariants a
    /// projector needs.
    pub fn from_components(
        components: PrincipalComponents,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let classical = components.orthonormality_error();
        if classical.is_nan() || classical > COMPONENT_ORTHONORMALITY_TOLERANCE {
            return Err(Error::ModelIntegrity(format!(
                "components are not orthonormal (max Gram deviation {classical:e})"
            )));
        }
        let n = components.feature_count();
        let s = components.count();
        let k = block_dim_for(s);
        let encoded = components
            .components()
            .iter()
            .enumerate()
            .map(|(l, v)| encode_component(v, l + 1, k))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::ModelIntegrity(e.to_string()))?;
        let basis: Vec<SparseState> = encoded.iter().map(|e| e.state().clone()).collect();
        let quantum = orthonormality_error(&basis);
        if quantum.is_nan() || quantum > OPERATOR_TOLERANCE {
            return Err(Error::ModelIntegrity(format!(
                "encoded components are not orthonormal (max Gram deviation {quantum:e})"
            )));
        }
        let projector =
            GramProjector::new(n * k, basis).map_err(|e| Error::ModelIntegrity(e.to_string()))?;
        Ok(Self {
            components,
            encoded,
            projector,
            n,
            k,
            metadata,
        })
    }

    pub fn components(&self) -> &PrincipalComponents {
        &self.components
    }

    pub fn encoded_components(&self) -> &[EncodedComponent] {
        &self.encoded
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut ModelMetadata {
        &mut self.metadata
    }

    /// Pixel count `n`.
    pub fn pixel_count(&self) -> usize {
        self.n
    }

    /// Per-pixel block dimension `k = s + 2`.
    pub fn block_dim(&self) -> usize {
        self.k
    }

    pub fn component_count(&self) -> usize {
        self.components.count()
    }

    /// Ambient Hilbert space dimension `n * k`.
    pub fn state_dim(&self) -> usize {
        self.n * self.k
    }

    /// Default trial count `n^2`.
    pub fn default_trials(&self) -> u64 {
        (self.n as u64).saturating_mul(self.n as u64)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::dim(format!(
                "input has {} pixels, model expects {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainOptions {
    pub selection: ComponentSelection,
    /// Subtract the column mean before the SVD. Off by default.
    pub center: bool,
    pub created_unix: u64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: ClassifierModel,
    /// Every singular value of the training matrix, non-increasing.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub warnings: Vec<String>,
}

/// Normalizes the samples, runs the SVD and keeps the leading components.
///
/// With a single sample an explicit component count above one is lowered to
/// one (with a warning); otherwise asking for more components than the
/// numerical rank is a [`Error::Rank`].
pub fn train<S: AsRef<[f64]>>(samples: &[S], options: &TrainOptions) -> Result<TrainReport> {
    let data = DataMatrix::from_samples(samples)?;
    let svd = if options.center {
        crate::pca::svd(&data.centered())?
    } else {
        data.svd()?
    };
    let rank = svd.numerical_rank();
    let mut warnings = Vec::new();
    let mut s = options.selection.resolve(&svd.singular_values)?;
    if data.sample_count() == 1 && s > 1 {
        warnings.push(format!(
            "a single training sample has rank 1; using 1 component instead of {s}"
        ));
        s = 1;
    }
    let components = extract_components(&svd, s)?;
    let mut metadata = ModelMetadata::new(data.sample_count(), options.selection);
    metadata.centered = options.center;
    metadata.created_unix = options.created_unix;
    let model = ClassifierModel::from_components(components, metadata)?;
    Ok(TrainReport {
        model,
        singular_values: svd.singular_values,
        rank,
        warnings,
    })
}

/// The implicit projector onto the span of the encoded components.
pub fn build_projector(model: &ClassifierModel) -> &GramProjector {
    &model.projector
}

/// `M = sum_l <V_l|x>^2`, computed classically.
pub fn classical_likelihood(model: &ClassifierModel, x: &[f64]) -> Result<f64> {
    model.check_len(x)?;
    model.components.projection_mass(x)
}

/// `<Phi(x)|Pi|Phi(x)> = sum_l <Phi(V_l)|Phi(x)>^2`, evaluated through the encoded states.
pub fn yes_probability(model: &ClassifierModel, x: &[f64]) -> Result<f64> {
    model.check_len(x)?;
    let phi = encode_image(x, model.k)?;
    let mut p = 0.0;
    for v in &model.encoded {
        p += representation_inner_product(v, &phi)?.powi(2);
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `(1 - p)^trials`
pub fn overall_no_probability(p: f64, trials: u64) -> f64 {
    match i32::try_from(trials) {
        Ok(t) => (1.0 - p).powi(t),
        Err(_) => (trials as f64 * (-p).ln_1p()).exp(),
    }
}

/// One two-outcome measurement with yes-probability `p`.
pub fn trial_outcome(p: f64, rng: &mut impl Rng) -> Outcome {
    if rng.gen::<f64>() < p {
        Outcome::Yes
    } else {
        Outcome::No
    }
}

/// Measures one fresh copy of `Phi(x)` with `{Pi, 1 - Pi}`.
pub fn run_trial(model: &ClassifierModel, x: &[f64], rng: &mut impl Rng) -> Result<Outcome> {
    let p = yes_probability(model, x)?;
    Ok(trial_outcome(p, rng))
}

/// Uniform draw for trial `index`, independent of every other trial and of scheduling.
fn trial_draw(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.gen::<f64>()
}

/// Analytic quantities for one input; shared by `classify` and the `prob` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub likelihood: f64,
    pub per_trial_probability: f64,
    pub trials: u64,
    pub overall_yes_probability: f64,
    pub overall_no_probability: f64,
    pub input_norm: f64,
}

pub fn analyze(model: &ClassifierModel, x: &[f64], trials: Option<u64>) -> Result<AnalyticReport> {
    let likelihood = classical_likelihood(model, x)?;
    let p = yes_probability(model, x)?;
    let trials = trials.unwrap_or_else(|| model.default_trials());
    let no = overall_no_probability(p, trials);
    Ok(AnalyticReport {
        likelihood,
        per_trial_probability: p,
        trials,
        overall_yes_probability: 1.0 - no,
        overall_no_probability: no,
        input_norm: norm(x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassifyOptions {
    pub seed: u64,
    /// Overrides the `n^2` trial count.
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub decision: Outcome,
    pub trials_run: u64,
    pub positive_trial_index: Option<u64>,
    pub per_trial_probability: f64,
    pub analytic_overall_no_probability: f64,
    pub seed: u64,
    /// l2 norm of the raw input vector.
    pub input_norm: f64,
}

pub fn classify(model: &ClassifierModel, x: &[f64], seed: u64) -> Result<ClassificationResult> {
    classify_with(model, x, ClassifyOptions { seed, trials: None })
}

/// Runs the trials and stops at the first yes. Trial `t` draws from ChaCha
/// stream `t` of `seed`, so the result does not depend on worker count.
pub fn classify_with(
    model: &ClassifierModel,
    x: &[f64],
    options: ClassifyOptions,
) -> Result<ClassificationResult> {
    let report = analyze(model, x, options.trials)?;
    let p = report.per_trial_probability;
    let trials = report.trials;
    let positive = if p > 0.0 {
        first_positive_trial(options.seed, trials, p)
    } else {
        None
    };
    Ok(ClassificationResult {
        decision: if positive.is_some() {
            Outcome::Yes
        } else {
            Outcome::No
        },
        trials_run: positive.map_or(trials, |t| t + 1),
        positive_trial_index: positive,
        per_trial_probability: p,
        analytic_overall_no_probability: report.overall_no_probability,
        seed: options.seed,
        input_norm: report.input_norm,
    })
}

const TRIAL_CHUNK: u64 = 1 << 14;

fn first_positive_trial(seed: u64, trials: u64, p: f64) -> Option<u64> {
    let mut start = 0;
    while start < trials {
        let end = trials.min(start + TRIAL_CHUNK);
        let hit = (start..end)
            .into_par_iter()
            .find_first(|&t| trial_draw(seed, t) < p);
        if hit.is_some() {
            return hit;
        }
        start = end;
    }
    None
}
