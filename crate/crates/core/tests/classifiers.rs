use mrcst_core::classifier::forest::{self, ForestParams};
use mrcst_core::classifier::svm::{self, solve, Gram, SvmParams};
use mrcst_core::classifier::{train, ClassifierSpec};
use mrcst_core::seed;
use mrcst_core::Label;
use proptest::prelude::*;
use rand::Rng;

/// Two Gaussian-ish blobs centred at ±2 in every coordinate.
fn blobs(n: usize, dim: usize, seed_value: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
    let mut rng = seed::rng(seed_value);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Parkinson } else { Label::Healthy };
        let centre = if label == Label::Parkinson { 2.0 } else { -2.0 };
        xs.push((0..dim).map(|_| centre + rng.random_range(-1.0..1.0)).collect());
        ys.push(label);
    }
    (xs, ys)
}

fn training_accuracy(spec: &ClassifierSpec, xs: &[Vec<f64>], ys: &[Label]) -> f64 {
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let model = train(spec, &refs, ys, 11).unwrap();
    let hits = xs.iter().zip(ys).filter(|(x, y)| model.predict(x).unwrap() == **y).count();
    hits as f64 / xs.len() as f64
}

#[test]
fn separable_blobs_are_learned() {
    let (xs, ys) = blobs(200, 4, 1);
    assert!(training_accuracy(&ClassifierSpec::Svm(SvmParams::default()), &xs, &ys) >= 0.95);
    assert!(training_accuracy(&ClassifierSpec::Forest(ForestParams::default()), &xs, &ys) >= 0.95);
}

#[test]
fn dual_solution_is_feasible() {
    for s in 0..10 {
        let (xs, ys) = blobs(60, 3, s);
        let mut rng = seed::rng(s + 100);
        // flip some labels so the problem is not separable
        let ys: Vec<Label> = ys
            .into_iter()
            .map(|l| if rng.random_bool(0.15) { if l == Label::Parkinson { Label::Healthy } else { Label::Parkinson } } else { l })
            .collect();
        let params = SvmParams { c: 2.0, gamma: 0.1, ..SvmParams::default() };
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let gram = Gram::new(&refs, &params);
        let y: Vec<f64> = ys.iter().map(|l| l.sign()).collect();
        let sol = solve(&gram, &y, params.c, params.tolerance, params.max_iter);
        assert!(sol.converged);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-6, "{balance}");
        assert!(sol.alpha.iter().all(|&a| (0.0..=params.c).contains(&a)));
    }
}

#[test]
fn svm_deterministic_and_sign_consistent() {
    let (xs, ys) = blobs(80, 5, 4);
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let a = svm::train(&SvmParams::default(), &refs, &ys).unwrap();
    let b = svm::train(&SvmParams::default(), &refs, &ys).unwrap();
    assert_eq!(a, b);
    let spec = ClassifierSpec::Svm(SvmParams::default());
    let model = train(&spec, &refs, &ys, 0).unwrap();
    for x in &xs {
        let s = model.score(x).unwrap();
        assert!((-1.0..=1.0).contains(&s));
        assert_eq!(Label::from_score(s), model.predict(x).unwrap());
        assert_eq!(Label::from_score(a.decision(x)), Label::from_score(s));
    }
}

#[test]
fn single_unbootstrapped_tree_fits_training_data() {
    let mut rng = seed::rng(9);
    let xs: Vec<Vec<f64>> = (0..120).map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let ys: Vec<Label> = (0..120).map(|_| if rng.random_bool(0.5) { Label::Parkinson } else { Label::Healthy }).collect();
    let params = ForestParams { trees: 1, bootstrap: false, ..ForestParams::default() };
    assert_eq!(training_accuracy(&ClassifierSpec::Forest(params), &xs, &ys), 1.0);
}

#[test]
fn forest_same_seed_same_model() {
    let (xs, ys) = blobs(50, 4, 2);
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let p = ForestParams::default();
    assert_eq!(forest::train(&p, &refs, &ys, 5).unwrap(), forest::train(&p, &refs, &ys, 5).unwrap());
}

#[test]
fn single_class_is_rejected() {
    let xs = [vec![0.0], vec![1.0]];
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let ys = [Label::Healthy, Label::Healthy];
    assert!(train(&ClassifierSpec::Svm(SvmParams::default()), &refs, &ys, 0).is_err());
    assert!(train(&ClassifierSpec::Forest(ForestParams::default()), &refs, &ys, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scores_stay_in_unit_interval(
        seed_value in any::<u64>(),
        probe in proptest::collection::vec(-50.0f64..50.0, 3),
    ) {
        let (xs, ys) = blobs(30, 3, seed_value);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        for spec in [ClassifierSpec::Svm(SvmParams::default()), ClassifierSpec::Forest(ForestParams { trees: 7, ..ForestParams::default() })] {
            let model = train(&spec, &refs, &ys, seed_value).unwrap();
            let s = model.score(&probe).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
