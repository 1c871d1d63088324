use std::collections::{BTreeMap, BTreeSet};

use mvtc::metrics::{accuracy, ari, evaluate, max_weight_assignment, nmi, pairwise_prf, purity};
use mvtc::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_labels(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..c)).collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best cluster-to-class bijection over all permutations of the padded label
/// alphabets.
fn brute_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().unwrap() + 1;
    let best = permutations(k)
        .into_iter()
        .map(|perm| pred.iter().zip(truth).filter(|(&p, &t)| perm[p] == t).count())
        .max()
        .unwrap();
    best as f64 / pred.len() as f64
}

fn brute_pairs(pred: &[usize], truth: &[usize]) -> (u64, u64, u64) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    (tp, fp, fn_)
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

fn counts<T: Ord + Copy>(items: impl Iterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in items {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

/// Plug-in adjusted Rand formula.
fn ari_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let joint = counts(pred.iter().copied().zip(truth.iter().copied()));
    let a = counts(pred.iter().copied());
    let b = counts(truth.iter().copied());
    let index: f64 = joint.values().map(|&c| choose2(c)).sum();
    let sa: f64 = a.values().map(|&c| choose2(c)).sum();
    let sb: f64 = b.values().map(|&c| choose2(c)).sum();
    let expected = sa * sb / choose2(pred.len());
    (index - expected) / (0.5 * (sa + sb) - expected)
}

fn entropy_of<T: Ord + Copy>(items: impl Iterator<Item = T>, n: f64) -> f64 {
    counts(items).values().map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum()
}

/// `H(P) + H(T) - H(P, T)` normalised by `sqrt(H(P) H(T))`.
fn nmi_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let hp = entropy_of(pred.iter().copied(), n);
    let ht = entropy_of(truth.iter().copied(), n);
    let hj = entropy_of(pred.iter().copied().zip(truth.iter().copied()), n);
    (hp + ht - hj) / (hp * ht).sqrt()
}

fn purity_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let clusters: BTreeSet<usize> = pred.iter().copied().collect();
    let hits: usize = clusters
        .iter()
        .map(|&c| {
            let members = pred.iter().zip(truth).filter(|(&p, _)| p == c).map(|(_, &t)| t);
            *counts(members).values().max().unwrap()
        })
        .sum();
    hits as f64 / pred.len() as f64
}

#[test]
fn accuracy_matches_permutation_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..200 {
        let cp = rng.random_range(1..=6);
        let ct = rng.random_range(1..=6);
        let n = rng.random_range(1..=40);
        let pred = random_labels(&mut rng, n, cp);
        let truth = random_labels(&mut rng, n, ct);
        let got = accuracy(&pred, &truth).unwrap();
        assert_eq!(got, brute_accuracy(&pred, &truth), "trial {trial}");
        assert!(purity(&pred, &truth).unwrap() >= got);
    }
}

#[test]
fn accuracy_examples() {
    assert_eq!(accuracy(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
    let pred = [0, 1, 1, 2, 2, 0];
    let truth = [0, 0, 1, 1, 2, 2];
    assert_eq!(accuracy(&pred, &truth).unwrap(), brute_accuracy(&pred, &truth));
    assert_eq!(accuracy(&pred, &truth).unwrap(), 0.5);
    assert!(matches!(accuracy(&[0, 1], &[0]), Err(Error::LengthMismatch { pred: 2, truth: 1 })));
    assert!(matches!(accuracy::<u8, u8>(&[], &[]), Err(Error::EmptyInput)));
}

#[test]
fn hungarian_matches_enumeration_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        let w: Vec<Vec<i64>> = (0..k).map(|_| (0..k).map(|_| rng.random_range(-20..50)).collect()).collect();
        let brute = permutations(k)
            .into_iter()
            .map(|p| (0..k).map(|i| w[i][p[i]]).sum::<i64>())
            .max()
            .unwrap();
        let (total, assignment) = max_weight_assignment(&w);
        assert_eq!(total, brute);
        let distinct: BTreeSet<usize> = assignment.iter().copied().collect();
        assert_eq!(distinct.len(), k);
    }
}

#[test]
fn pairwise_matches_all_pairs_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(2..=50);
        let c = rng.random_range(1..=8);
        let pred = random_labels(&mut rng, n, c);
        let c = rng.random_range(1..=8);
        let truth = random_labels(&mut rng, n, c);
        let (tp, fp, fn_) = brute_pairs(&pred, &truth);
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let got = pairwise_prf(&pred, &truth).unwrap();
        assert_eq!((got.precision, got.recall), (p, r));
        assert!((got.f_score - f).abs() <= 1e-15);
    }
}

#[test]
fn pairwise_worked_cases() {
    let got = pairwise_prf(&[0, 0, 0, 1], &[0, 0, 1, 1]).unwrap();
    assert_eq!(brute_pairs(&[0, 0, 0, 1], &[0, 0, 1, 1]), (1, 2, 1));
    assert_eq!(got.precision, 1.0 / 3.0);
    assert_eq!(got.recall, 1.0 / 2.0);
    assert_eq!(got.f_score, 2.0 / 5.0);

    let same = pairwise_prf(&[3, 3, 1], &[0, 0, 1]).unwrap();
    assert_eq!((same.precision, same.recall, same.f_score), (1.0, 1.0, 1.0));
    let singletons = pairwise_prf(&[0, 1, 2, 3], &[0, 0, 1, 1]).unwrap();
    assert_eq!((singletons.precision, singletons.recall, singletons.f_score), (0.0, 0.0, 0.0));
    assert!(matches!(pairwise_prf(&[0], &[0]), Err(Error::TooFewSamples { .. })));
}

#[test]
fn ari_worked_cases() {
    assert_eq!(ari(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), -0.5);
    assert!((ari_oracle(&[0, 1, 0, 1], &[0, 0, 1, 1]) + 0.5).abs() <= 1e-15);
    assert_eq!(ari(&[5, 5, 2, 2], &[0, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(ari(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
}

#[test]
fn ari_matches_plug_in_formula_and_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.random_range(4..=80);
        let c = rng.random_range(2..=6);
        let pred = random_labels(&mut rng, n, c);
        let c = rng.random_range(2..=6);
        let truth = random_labels(&mut rng, n, c);
        let oracle = ari_oracle(&pred, &truth);
        let got = ari(&pred, &truth).unwrap();
        if oracle.is_finite() {
            assert!((got - oracle).abs() <= 1e-12, "{got} vs {oracle}");
        }
        assert_eq!(got, ari(&truth, &pred).unwrap());
    }
}

#[test]
fn ari_is_centred_under_random_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mean = (0..1000)
        .map(|_| {
            let pred = random_labels(&mut rng, 100, 4);
            let truth = random_labels(&mut rng, 100, 4);
            ari(&pred, &truth).unwrap()
        })
        .sum::<f64>()
        / 1000.0;
    assert!((-0.02..=0.02).contains(&mean), "{mean}");
}

#[test]
fn nmi_examples_and_entropy_oracle() {
    assert_eq!(nmi(&[2, 2, 7, 7], &[0, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(nmi(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.0);
    assert!(nmi(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap().abs() <= 1e-15);
    assert_eq!(nmi(&[4, 4], &[1, 1]).unwrap(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let n = rng.random_range(2..=60);
        let c = rng.random_range(2..=6);
        let pred = random_labels(&mut rng, n, c);
        let c = rng.random_range(2..=6);
        let truth = random_labels(&mut rng, n, c);
        let oracle = nmi_oracle(&pred, &truth);
        if oracle.is_finite() {
            assert!((nmi(&pred, &truth).unwrap() - oracle.clamp(0.0, 1.0)).abs() <= 1e-12);
        }
    }
}

#[test]
fn purity_examples_and_row_max_oracle() {
    assert_eq!(purity(&[0, 0, 0, 0, 0, 0], &[0, 0, 1, 1, 2, 2]).unwrap(), 1.0 / 3.0);
    assert_eq!(purity(&[1, 1, 0], &[0, 0, 1]).unwrap(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let pred = random_labels(&mut rng, 20, 4);
        let truth = random_labels(&mut rng, 20, 3);
        assert_eq!(purity(&pred, &truth).unwrap(), purity_oracle(&pred, &truth));
    }
}

fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| perm[l] + 100).collect()
}

proptest! {
    #[test]
    fn prop_relabel_invariant(seed in 0u64..10_000, n in 2usize..60, c in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pred = random_labels(&mut rng, n, c);
        let truth = random_labels(&mut rng, n, c);
        let mut perm: Vec<usize> = (0..c).collect();
        for i in (1..c).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let base = evaluate(&pred, &truth).unwrap();
        prop_assert_eq!(evaluate(&relabel(&pred, &perm), &truth).unwrap(), base);
        prop_assert_eq!(evaluate(&pred, &relabel(&truth, &perm)).unwrap(), base);
        prop_assert!(base.purity >= base.acc);
        for x in [base.acc, base.nmi, base.purity, base.f_score, base.precision, base.recall] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!((-1.0..=1.0).contains(&base.ari));
    }
}
