use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokenscore::corpus::UnigramDistribution;
use tokenscore::metrics::{
    evaluate, percentile_curve, percentile_freq, renyi_efficiency, renyi_entropy,
    shannon_efficiency, shannon_entropy,
};
use tokenscore::{Distribution, Metric, MetricParams, TokenizedCorpus};

fn random_counts(rng: &mut ChaCha8Rng) -> Vec<u64> {
    let v = rng.gen_range(1..=80);
    let skew = rng.gen_range(0.0..4.0);
    (0..v)
        .map(|_| (rng.gen_range(1.0..1000.0f64).powf(skew) as u64).max(1))
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Entropies by direct summation in natural logs, converted at the end.
mod oracle {
    pub fn probs(counts: &[u64]) -> Vec<f64> {
        let n: u64 = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / n as f64).collect()
    }

    pub fn shannon(p: &[f64], base: f64) -> f64 {
        -p.iter().map(|&q| q * q.ln()).sum::<f64>() / base.ln()
    }

    pub fn renyi(p: &[f64], alpha: f64, base: f64) -> f64 {
        if alpha == 1.0 {
            return shannon(p, base);
        }
        let s: f64 = p.iter().map(|&q| q.powf(alpha)).sum();
        s.ln() / ((1.0 - alpha) * base.ln())
    }

    /// Nearest-rank percentile at grid point k/100 using integer rank arithmetic.
    pub fn percentile(p: &[f64], k: usize) -> f64 {
        let mut sorted = p.to_vec();
        sorted.sort_by(f64::total_cmp);
        let v = sorted.len();
        let rank = (k * v).div_ceil(100).clamp(1, v);
        sorted[rank - 1]
    }
}

#[test]
fn entropies_match_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let counts = random_counts(&mut rng);
        let dist = Distribution::from_counts(&counts).unwrap();
        let p = oracle::probs(&counts);
        for base in [2u32, 3, 10] {
            let b = f64::from(base);
            let h = shannon_entropy(&dist, base).unwrap();
            assert!(
                close(h, oracle::shannon(&p, b), 1e-12),
                "{h} vs {}",
                oracle::shannon(&p, b)
            );
            for alpha in [0.25, 0.5, 2.0, 2.5, 3.0, 7.0] {
                let got = renyi_entropy(&dist, alpha, base).unwrap();
                let want = oracle::renyi(&p, alpha, b);
                assert!(close(got, want, 1e-12), "α={alpha}: {got} vs {want}");
            }
        }
        if counts.len() >= 2 {
            let log_v = (counts.len() as f64).ln();
            let e = shannon_efficiency(&dist).unwrap();
            assert!(close(
                e,
                oracle::shannon(&p, std::f64::consts::E) / log_v,
                1e-12
            ));
            let e = renyi_efficiency(&dist, 2.5).unwrap();
            assert!(close(
                e,
                oracle::renyi(&p, 2.5, std::f64::consts::E) / log_v,
                1e-12
            ));
        }
    }
}

#[test]
fn percentiles_match_integer_rank_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let counts = random_counts(&mut rng);
        let dist = Distribution::from_counts(&counts).unwrap();
        let p = oracle::probs(&counts);
        let curve = percentile_curve(&dist);
        for (k, &v) in curve.iter().enumerate() {
            assert_eq!(v, oracle::percentile(&p, k), "k={k}, V={}", p.len());
        }
        let a = rng.gen_range(0..=100);
        let b = rng.gen_range(a..=100);
        let want: f64 = (a..=b).map(|k| oracle::percentile(&p, k)).sum();
        let got = percentile_freq(&dist, a as f64 / 100.0, b as f64 / 100.0).unwrap();
        assert!(close(got, want, 1e-12), "[{a}, {b}]: {got} vs {want}");
    }
}

#[test]
fn large_orders_do_not_underflow() {
    let dist = Distribution::from_counts(&[1, 2, 1_000_000]).unwrap();
    let h = renyi_entropy(&dist, 1e6, 2).unwrap();
    let h_inf = renyi_entropy(&dist, f64::INFINITY, 2).unwrap();
    assert!(h.is_finite());
    assert!((h - h_inf).abs() < 1e-9);
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let counts = random_counts(&mut rng);
        if counts.len() < 2 {
            continue;
        }
        let d64 = UnigramDistribution::<f64>::from_counts(&counts).unwrap();
        let d32 = UnigramDistribution::<f32>::from_counts(&counts).unwrap();
        let e64 = renyi_efficiency(&d64, 2.5).unwrap();
        let e32 = renyi_efficiency(&d32, 2.5f32).unwrap();
        assert!((f64::from(e32) - e64).abs() < 1e-4, "{e32} vs {e64}");
    }
}

#[test]
fn corpus_metrics_from_pooled_counts() {
    let corpus = TokenizedCorpus::from_lines(["a b a", "c a", "b"]).unwrap();
    let params = MetricParams::<f64>::default();
    let p = oracle::probs(&[3, 2, 1]);
    let value = |m| evaluate(&corpus, m, &params).unwrap().value;
    assert!(close(
        value(Metric::ShannonEntropy),
        oracle::shannon(&p, 2.0),
        1e-15
    ));
    assert!(close(
        value(Metric::RenyiEntropy),
        oracle::renyi(&p, 2.5, 2.0),
        1e-15
    ));
    assert!(close(
        value(Metric::Bits),
        6.0 * oracle::shannon(&p, 2.0),
        1e-15
    ));
    assert_eq!(value(Metric::SequenceLen), 2.0);
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6..1.0f64, 1..60)
}

proptest! {
    #[test]
    fn renyi_is_non_increasing_in_order(w in weights(), a in 0.0..8.0f64, step in 0.0..4.0f64) {
        let d = Distribution::from_weights(&w).unwrap();
        let lo = renyi_entropy(&d, a, 2).unwrap();
        let hi = renyi_entropy(&d, a + step, 2).unwrap();
        prop_assert!(hi <= lo + 1e-12 * lo.max(1.0));
    }

    #[test]
    fn renyi_is_bracketed_by_its_limits(w in weights(), a in 0.0..50.0f64) {
        let d = Distribution::from_weights(&w).unwrap();
        let h = renyi_entropy(&d, a, 2).unwrap();
        let h0 = renyi_entropy(&d, 0.0, 2).unwrap();
        let hinf = renyi_entropy(&d, f64::INFINITY, 2).unwrap();
        prop_assert!(h <= h0 + 1e-12 && h >= hinf - 1e-12);
    }

    #[test]
    fn efficiency_is_a_fraction(w in weights(), a in 0.0..10.0f64) {
        prop_assume!(w.len() >= 2);
        let d = Distribution::from_weights(&w).unwrap();
        let e = renyi_efficiency(&d, a).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
        let s = shannon_efficiency(&d).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
    }

    #[test]
    fn efficiency_is_one_at_uniform(v in 2usize..500, a in 0.0..10.0f64) {
        let d = Distribution::from_weights(&vec![1.0; v]).unwrap();
        prop_assert!((renyi_efficiency(&d, a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_permutation_invariant(mut w in weights(), a in 0.1..6.0f64) {
        let d = Distribution::from_weights(&w).unwrap();
        let before = renyi_entropy(&d, a, 2).unwrap();
        w.reverse();
        let after = renyi_entropy(&Distribution::from_weights(&w).unwrap(), a, 2).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn percentile_sum_grows_with_the_interval(w in weights(), a in 0usize..=100, b in 0usize..=100, c in 0usize..=100) {
        let mut ends = [a, b, c];
        ends.sort_unstable();
        let d = Distribution::from_weights(&w).unwrap();
        let f = |x: usize, y: usize| percentile_freq(&d, x as f64 / 100.0, y as f64 / 100.0).unwrap();
        prop_assert!(f(ends[0], ends[2]) >= f(ends[1], ends[2]) - 1e-15);
        prop_assert!(f(ends[0], ends[2]) >= f(ends[0], ends[1]) - 1e-15);
    }
}
