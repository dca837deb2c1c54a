use proptest::prelude::*;
use qpca::classifier::{
    classical_likelihood, classify, yes_probability, ClassifierModel, ModelMetadata,
};
use qpca::encoding::{
    encode_component, encode_frqi, encode_image, encode_neqr, representation_inner_product,
    DirectSumEncoding,
};
use qpca::model_io::{
    model_from_str, model_to_string, parse_pgm, to_feature_vector, write_pgm, PgmEncoding, RawImage,
};
use qpca::pca::{ComponentSelection, PrincipalComponents};
use qpca::quantum::{
    collapse, direct_sum, outcome_probability, tensor_product, BinaryMeasurement, GramProjector,
    Ket, Outcome, ProjectorOperator, SparseState, StateVector,
};

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (len > 1e-3).then(|| v.into_iter().map(|x| x / len).collect())
}

/// Orthonormalizes `raw` by modified Gram-Schmidt, dropping near-dependent vectors.
fn orthonormal_set(raw: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in raw {
        for _ in 0..2 {
            for u in &out {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        if let Some(u) = unit(v) {
            out.push(u);
        }
    }
    out
}

fn vectors(dim: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim), count)
}

fn state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0..1.0f64, dim).prop_filter_map("nonzero", |v| {
        unit(v).map(|u| StateVector::from_real(&u).unwrap())
    })
}

fn model_from(components: Vec<Vec<f64>>) -> ClassifierModel {
    let s = components.len();
    let pcs = PrincipalComponents::new(components, vec![1.0; s]).unwrap();
    ClassifierModel::from_components(pcs, ModelMetadata::new(s, ComponentSelection::Count(s)))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_and_direct_sum_dimensions(a in 1usize..=16, b in 1usize..=16, c in 1usize..=16) {
        let sa = StateVector::from_real(&vec![0.5; a]).unwrap();
        let sb = StateVector::from_real(&vec![0.5; b]).unwrap();
        let sc = StateVector::from_real(&vec![0.5; c]).unwrap();
        prop_assert_eq!(tensor_product(&sa, &sb).dim(), a * b);
        prop_assert_eq!(direct_sum(&[sa, sb, sc], 1.0).unwrap().dim(), a + b + c);
    }

    #[test]
    fn tensor_preserves_normalization(a in state(5), b in state(7)) {
        prop_assert!(tensor_product(&a, &b).is_normalized());
    }

    #[test]
    fn repeatability_and_completeness(
        dim in 2usize..=24,
        raw in vectors(24, 4),
        phi in state(24),
    ) {
        let basis: Vec<SparseState> = orthonormal_set(raw.into_iter().map(|v| v[..dim].to_vec()).collect())
            .iter()
            .map(|v| SparseState::from(&StateVector::from_real(v).unwrap()))
            .collect();
        let phi = StateVector::from_real(
            &unit(phi.amplitudes()[..dim].iter().map(|a| a.re).collect()).unwrap_or_else(|| {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            }),
        ).unwrap();
        let gram: ProjectorOperator = GramProjector::new(dim, basis).unwrap().into();
        let dense: ProjectorOperator = gram.to_dense().unwrap().into();
        for p in [gram, dense] {
            let m = BinaryMeasurement::new(p.clone());
            let yes = m.probability(Outcome::Yes, &phi).unwrap();
            let no = m.probability(Outcome::No, &phi).unwrap();
            prop_assert!((yes + no - 1.0).abs() <= 1e-12);
            if yes > 1e-9 {
                let post = collapse(&p, &phi).unwrap().post_state;
                prop_assert!(post.is_normalized());
                prop_assert!((outcome_probability(&p, &post).unwrap() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn inner_product_equivalence(
        n in 2usize..=64,
        x in prop::collection::vec(0.0..=1.0f64, 64),
        v in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        prop_assume!(unit(v[..n].to_vec()).is_some());
        let v = unit(v[..n].to_vec()).unwrap();
        let x = &x[..n];
        let ex = encode_image(x, 3).unwrap();
        let ev = encode_component(&v, 1, 3).unwrap();
        let classical: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        let q = representation_inner_product(&ev, &ex).unwrap();
        prop_assert!((q - classical).abs() <= 1e-12);
        prop_assert!(ex.state().is_normalized());
        prop_assert!(ev.state().is_normalized());
        prop_assert!(ex.state().nnz() <= 2 * n && ev.state().nnz() <= 2 * n);
    }

    #[test]
    fn orthonormal_lift(n in 2usize..=32, raw in vectors(32, 5)) {
        let set = orthonormal_set(raw.into_iter().map(|v| v[..n].to_vec()).collect());
        let k = set.len() + 2;
        let enc: Vec<_> = set
            .iter()
            .enumerate()
            .map(|(l, v)| encode_component(v, l + 1, k).unwrap())
            .collect();
        for (a, ea) in enc.iter().enumerate() {
            for (b, eb) in enc.iter().enumerate() {
                let g = representation_inner_product(ea, eb).unwrap();
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((g - target).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn probability_identity(
        n in 2usize..=48,
        raw in vectors(48, 6),
        x in prop::collection::vec(0.0..=1.0f64, 48),
    ) {
        let set = orthonormal_set(raw.into_iter().map(|v| v[..n].to_vec()).collect());
        prop_assume!(!set.is_empty());
        let model = model_from(set);
        let x = &x[..n];
        let p = yes_probability(&model, x).unwrap();
        let m = classical_likelihood(&model, x).unwrap();
        prop_assert!((p - m / (n * n) as f64).abs() <= 1e-12);
        prop_assert!(m <= x.iter().map(|v| v * v).sum::<f64>() + 1e-12);
    }

    #[test]
    fn classify_is_pure(seed in any::<u64>(), x in prop::collection::vec(0.0..=1.0f64, 6)) {
        let model = model_from(vec![unit(vec![1.0, 2.0, 0.5, 0.1, 0.0, 0.3]).unwrap()]);
        let a = classify(&model, &x, seed).unwrap();
        let b = classify(&model, &x, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.decision == Outcome::Yes, a.positive_trial_index.is_some());
        if a.decision == Outcome::No {
            prop_assert_eq!(a.trials_run, 36);
        } else {
            prop_assert!(a.trials_run <= 36);
        }
    }

    #[test]
    fn frqi_normalized(side_log2 in 0u32..=3, angles in prop::collection::vec(0.0..=std::f64::consts::FRAC_PI_2, 64)) {
        let count = 1usize << (2 * side_log2);
        let img = encode_frqi(&angles[..count]).unwrap();
        prop_assert!(img.state().is_normalized());
        prop_assert_eq!(img.state().dim(), 2 * count);
    }

    #[test]
    fn neqr_roundtrip(side_log2 in 1u32..=3, q in 1u32..=8, seed in prop::collection::vec(any::<u32>(), 64)) {
        let side = 1usize << side_log2;
        let max = (1u32 << q) - 1;
        let grid: Vec<u32> = seed[..side * side].iter().map(|v| v % (max + 1)).collect();
        let img = encode_neqr(&grid, side, q).unwrap();
        prop_assert!(img.state().is_normalized());
        prop_assert_eq!(img.state().nnz(), side * side);
        prop_assert_eq!(img.decode().unwrap(), grid);
    }

    #[test]
    fn pgm_roundtrip(w in 1usize..=9, h in 1usize..=9, max in 1u32..=65535, raw in prop::collection::vec(any::<u32>(), 81)) {
        let pixels: Vec<u32> = raw[..w * h].iter().map(|v| v % (max + 1)).collect();
        let img = RawImage::new(w, h, max, pixels).unwrap();
        for enc in [PgmEncoding::Plain, PgmEncoding::Raw] {
            prop_assert_eq!(&parse_pgm(&write_pgm(&img, enc)).unwrap(), &img);
        }
        let fv = to_feature_vector(&img, "p");
        prop_assert!(fv.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn model_roundtrip_bit_exact(n in 2usize..=16, raw in vectors(16, 4)) {
        let set = orthonormal_set(raw.into_iter().map(|v| v[..n].to_vec()).collect());
        prop_assume!(!set.is_empty());
        let model = model_from(set);
        let back = model_from_str(&model_to_string(&model)).unwrap();
        for (a, b) in model.components().components().iter().flatten()
            .zip(back.components().components().iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back, model);
    }
}
