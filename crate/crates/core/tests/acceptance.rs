//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use qpca::classifier::{
    build_projector, classical_likelihood, classify, overall_no_probability, train,
    yes_probability, ClassifierModel, ModelMetadata, TrainOptions,
};
use qpca::encoding::{
    encode_component, encode_frqi_intensities, encode_image, encode_neqr,
    representation_inner_product,
};
use qpca::linalg::Matrix;
use qpca::pca::{svd, ComponentSelection, PrincipalComponents};
use qpca::quantum::{
    collapse, outcome_probability, BinaryMeasurement, DenseProjector, GramProjector, Ket, Outcome,
    ProjectorOperator, SparseState, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs as f64, || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-3 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn random_image(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

fn inner_product_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=64);
        let x = random_image(&mut rng, n);
        let v = random_unit(&mut rng, n);
        let ex = encode_image(&x, 3).map_err(|e| e.to_string())?;
        let ev = encode_component(&v, 1, 3).map_err(|e| e.to_string())?;
        let q = representation_inner_product(&ev, &ex).map_err(|e| e.to_string())?;
        let classical = v.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        worst = worst.max((q - classical).abs());
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    within(start.elapsed(), 5)?;
    Ok(format!(
        "1000 pairs, max error {worst:.1e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

/// Trains the 200 random models shared by the probability and projector checks.
fn random_models() -> Result<Vec<ClassifierModel>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..200)
        .map(|_| {
            let m = rng.gen_range(1..=16);
            let n = rng.gen_range(2..=64);
            let s = rng.gen_range(1..=m.min(n).min(8));
            let rows: Vec<Vec<f64>> = (0..m).map(|_| random_image(&mut rng, n)).collect();
            let options = TrainOptions {
                selection: ComponentSelection::Count(s),
                ..Default::default()
            };
            train(&rows, &options)
                .map(|r| r.model)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn probability_identity(models: &[ClassifierModel]) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_m, mut worst_dense) = (0.0_f64, 0.0_f64);
    for model in models {
        let n = model.pixel_count();
        let x = random_image(&mut rng, n);
        let p = yes_probability(model, &x).map_err(|e| e.to_string())?;
        let m = classical_likelihood(model, &x).map_err(|e| e.to_string())?;
        worst_m = worst_m.max((p - m / (n * n) as f64).abs());
        let dense: ProjectorOperator = build_projector(model)
            .to_dense()
            .map_err(|e| e.to_string())?
            .into();
        let phi = encode_image(&x, model.block_dim()).map_err(|e| e.to_string())?;
        let pd = outcome_probability(&dense, &phi.to_dense()).map_err(|e| e.to_string())?;
        worst_dense = worst_dense.max((p - pd).abs());
    }
    ensure(worst_m <= 1e-12, || {
        format!("|P - M/n^2| reached {worst_m:e}")
    })?;
    ensure(worst_dense <= 1e-10, || {
        format!("Gram vs dense reached {worst_dense:e}")
    })?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "200 models, |P - M/n^2| {worst_m:.1e}, Gram vs dense {worst_dense:.1e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

/// A model with `n` pixels and `s` orthonormal components whose encoded
/// dimension is `n * (s + 2)`.
fn wide_model(n: usize, s: usize) -> Result<ClassifierModel, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < s {
        let mut v = random_unit(&mut rng, n);
        for _ in 0..2 {
            for u in &basis {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|x| x / len).collect());
    }
    let pcs = PrincipalComponents::new(basis, vec![1.0; s]).map_err(|e| e.to_string())?;
    ClassifierModel::from_components(pcs, ModelMetadata::new(s, ComponentSelection::Count(s)))
        .map_err(|e| e.to_string())
}

fn check_projector(p: &DenseProjector, rank: usize) -> Result<(f64, f64, f64), String> {
    let idem = p.idempotence_error();
    let herm = p.hermiticity_error();
    let trace = (p.trace() - Complex64::new(rank as f64, 0.0)).norm();
    ensure(idem <= 1e-10 && herm <= 1e-10 && trace <= 1e-10, || {
        format!(
            "dim {}: idempotence {idem:e}, symmetry {herm:e}, trace error {trace:e}",
            p.dim()
        )
    })?;
    Ok((idem, herm, trace))
}

fn projector_validity(models: &[ClassifierModel]) -> Check {
    let start = Instant::now();
    let mut worst = [0.0_f64; 3];
    let large = wide_model(512, 6)?;
    let mut max_dim = 0;
    for model in models.iter().chain(std::iter::once(&large)) {
        let dense = build_projector(model)
            .to_dense()
            .map_err(|e| e.to_string())?;
        max_dim = max_dim.max(dense.dim());
        let (a, b, c) = check_projector(&dense, model.component_count())?;
        worst = [worst[0].max(a), worst[1].max(b), worst[2].max(c)];
    }
    Ok(format!(
        "201 projectors up to dim {max_dim}, idempotence {:.1e}, symmetry {:.1e}, trace {:.1e}, {:.2}s",
        worst[0],
        worst[1],
        worst[2],
        start.elapsed().as_secs_f64()
    ))
}

fn svd_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_rec, mut worst_eig) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let (m, n) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = Matrix::new(m, n, data.clone()).map_err(|e| e.to_string())?;
        let r = svd(&a).map_err(|e| e.to_string())?;
        let rec = r.reconstruction_error(&a) / a.frobenius_norm().max(1.0);
        worst_rec = worst_rec.max(rec);

        let dm = DMatrix::from_row_slice(m, n, &data);
        let mut ev: Vec<f64> = (dm.transpose() * &dm)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        for (i, e) in ev.iter().enumerate() {
            let s2 = r.singular_values.get(i).map_or(0.0, |s| s * s);
            worst_eig = worst_eig.max((s2 - e).abs());
        }
    }
    ensure(worst_rec <= 1e-8, || {
        format!("reconstruction {worst_rec:e}")
    })?;
    ensure(worst_eig <= 1e-8, || format!("eigen oracle {worst_eig:e}"))?;

    let hand = [
        (vec![1.0, 0.0, 0.0, 1.0], [1.0, 1.0]),
        (vec![0.6, 0.8, 0.8, 0.6], [1.4, 0.2]),
    ];
    for (data, expected) in hand {
        let a = Matrix::new(2, 2, data).map_err(|e| e.to_string())?;
        let got = svd(&a).map_err(|e| e.to_string())?.singular_values;
        ensure(
            got.iter()
                .zip(expected)
                .all(|(g, e)| (g - e).abs() <= 1e-10),
            || format!("hand case gave {got:?}, expected {expected:?}"),
        )?;
    }
    Ok(format!(
        "100 matrices, reconstruction {worst_rec:.1e}, eigen oracle {worst_eig:.1e}, hand cases ok, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn protocol_statistics() -> Check {
    let start = Instant::now();
    let pcs =
        PrincipalComponents::new(vec![vec![1.0, 0.0]], vec![1.0]).map_err(|e| e.to_string())?;
    let model =
        ClassifierModel::from_components(pcs, ModelMetadata::new(1, ComponentSelection::Count(1)))
            .map_err(|e| e.to_string())?;
    let x = [1.0, 0.0];
    let m = classical_likelihood(&model, &x).map_err(|e| e.to_string())?;
    let p = yes_probability(&model, &x).map_err(|e| e.to_string())?;
    let analytic = 1.0 - overall_no_probability(p, model.default_trials());
    ensure(m == 1.0 && analytic == 175.0 / 256.0, || {
        format!("M = {m}, overall yes = {analytic}")
    })?;

    let runs = 100_000u64;
    let mut yes = 0u64;
    for seed in 0..runs {
        if classify(&model, &x, seed)
            .map_err(|e| e.to_string())?
            .decision
            == Outcome::Yes
        {
            yes += 1;
        }
    }
    let freq = yes as f64 / runs as f64;
    let bound = 4.0 * (analytic * (1.0 - analytic) / runs as f64).sqrt();
    ensure((freq - analytic).abs() <= bound, || {
        format!("frequency {freq} vs {analytic}, bound {bound}")
    })?;

    for n in [2u64, 4, 8, 16] {
        for i in 1..=10 {
            let m = i as f64 / 10.0;
            let yes = 1.0 - overall_no_probability(m / (n * n) as f64, n * n);
            ensure(yes <= m + 1e-15 && yes >= m - m * m / 2.0 - 1e-15, || {
                format!("n = {n}, M = {m}: overall yes {yes}")
            })?;
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "175/256 exact, Monte Carlo {freq:.5} vs {analytic:.5} (4 sigma {bound:.4}), sandwich ok, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn random_complex_projector(
    rng: &mut impl Rng,
    dim: usize,
    rank: usize,
) -> Result<DenseProjector, String> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    while basis.len() < rank {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for _ in 0..2 {
            for u in &basis {
                let d: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-3 {
            basis.push(v.into_iter().map(|z| z / len).collect());
        }
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for v in &basis {
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] += v[i] * v[j].conj();
            }
        }
    }
    DenseProjector::from_matrix(dim, entries).map_err(|e| e.to_string())
}

fn measurement_repeatability() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_repeat, mut worst_sum) = (0.0_f64, 0.0_f64);
    for case in 0..100 {
        let dim = rng.gen_range(2..=32);
        let rank = rng.gen_range(1..dim);
        let projector: ProjectorOperator = if case % 2 == 0 {
            random_complex_projector(&mut rng, dim, rank)?.into()
        } else {
            let basis: Vec<SparseState> = (0..rank)
                .map(|i| SparseState::from_real(dim, [(i, 1.0)]))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            GramProjector::new(dim, basis)
                .map_err(|e| e.to_string())?
                .into()
        };
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let phi = StateVector::new(amps)
            .and_then(|s| s.normalized())
            .map_err(|e| e.to_string())?;
        let measurement = BinaryMeasurement::new(projector.clone());
        let yes = measurement
            .probability(Outcome::Yes, &phi)
            .map_err(|e| e.to_string())?;
        let no = measurement
            .probability(Outcome::No, &phi)
            .map_err(|e| e.to_string())?;
        worst_sum = worst_sum.max((yes + no - 1.0).abs());
        for outcome in [Outcome::Yes, Outcome::No] {
            let post = measurement
                .collapse(outcome, &phi)
                .map_err(|e| e.to_string())?;
            let again = measurement
                .probability(outcome, &post.post_state)
                .map_err(|e| e.to_string())?;
            worst_repeat = worst_repeat.max((again - 1.0).abs());
        }
        let direct = collapse(&projector, &phi).map_err(|e| e.to_string())?;
        ensure(direct.post_state.is_normalized(), || {
            "post state not normalized".into()
        })?;
    }
    ensure(worst_repeat <= 1e-10, || {
        format!("re-measurement {worst_repeat:e}")
    })?;
    ensure(worst_sum <= 1e-12, || {
        format!("probability sum {worst_sum:e}")
    })?;
    Ok(format!(
        "100 pairs, re-measurement {worst_repeat:.1e}, completeness {worst_sum:.1e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn encoder_suite() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let side = 1usize << rng.gen_range(0..=3);
        let x = random_image(&mut rng, side * side);
        let frqi = encode_frqi_intensities(&x).map_err(|e| e.to_string())?;
        worst = worst.max((frqi.state().norm_sqr() - 1.0).abs());

        let side = 1usize << rng.gen_range(1..=3);
        let grid: Vec<u32> = (0..side * side).map(|_| rng.gen_range(0..=255)).collect();
        let neqr = encode_neqr(&grid, side, 8).map_err(|e| e.to_string())?;
        worst = worst.max((neqr.state().norm_sqr() - 1.0).abs());
        let decoded = neqr.decode().map_err(|e| e.to_string())?;
        ensure(decoded == grid, || {
            format!("{side}x{side} NEQR round-trip mismatch")
        })?;
    }
    ensure(worst <= 1e-12, || format!("normalization error {worst:e}"))?;
    Ok(format!(
        "100 FRQI + 100 NEQR images, normalization {worst:.1e}, round-trips exact, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn end_to_end_determinism() -> Check {
    let start = Instant::now();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |tag: &str| -> Result<Vec<u8>, String> {
        let model = dir.path().join(format!("model-{tag}.json"));
        let mut transcript = Vec::new();
        let train_dir = fixtures.join("train");
        let mut invocations: Vec<Vec<String>> = vec![vec![
            "train".into(),
            "--model".into(),
            model.display().to_string(),
            "--components".into(),
            "3".into(),
            train_dir.display().to_string(),
        ]];
        for class in ["positive", "negative"] {
            let mut files: Vec<_> = std::fs::read_dir(fixtures.join("eval").join(class))
                .map_err(|e| e.to_string())?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            files.sort();
            for f in files {
                invocations.push(vec![
                    "classify".into(),
                    "--model".into(),
                    model.display().to_string(),
                    f.display().to_string(),
                ]);
            }
        }
        for args in invocations {
            let out = Command::new(env!("CARGO_BIN_EXE_qpca"))
                .args(["--records", "--seed", "42"])
                .args(&args)
                .env_remove("QPCA_SEED")
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(matches!(out.status.code(), Some(0 | 1)), || {
                format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
            })?;
            transcript.extend(out.stdout);
        }
        transcript.extend(std::fs::read(&model).map_err(|e| e.to_string())?);
        Ok(transcript)
    };
    let first = run("a")?;
    let second = run("b")?;
    let strip = |bytes: &[u8], tag: &str| {
        String::from_utf8_lossy(bytes).replace(&format!("model-{tag}.json"), "model.json")
    };
    let (a, b) = (strip(&first, "a"), strip(&second, "b"));
    ensure(a == b, || "transcripts differ between runs".into())?;
    Ok(format!(
        "{} bytes of records and model identical across two runs, {:.2}s",
        a.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn main() {
    let models = random_models();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);
    let criteria: Vec<Criterion> = vec![
        (
            "inner-product equivalence",
            Box::new(inner_product_equivalence),
        ),
        (
            "probability identity",
            Box::new(|| {
                models
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|m| probability_identity(m))
            }),
        ),
        (
            "projector validity",
            Box::new(|| {
                models
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|m| projector_validity(m))
            }),
        ),
        ("SVD correctness", Box::new(svd_correctness)),
        ("protocol statistics", Box::new(protocol_statistics)),
        (
            "measurement repeatability",
            Box::new(measurement_repeatability),
        ),
        ("encoder suite", Box::new(encoder_suite)),
        ("end-to-end determinism", Box::new(end_to_end_determinism)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
