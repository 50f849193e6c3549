use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokenscore::analysis::{
    default_alpha_grid, format_number, grid_search_alpha, grid_search_percentile, pearson,
    spearman, PlotTable,
};
use tokenscore::metrics::{percentile_freq, renyi_efficiency};
use tokenscore::{Distribution, Error, Observations};

/// Textbook one-pass Pearson.
fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Two-sided p-value by Simpson integration of the Student t density.
fn t_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = (r * (df / (1.0 - r * r)).sqrt()).abs();
    let ln_c =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let steps = 20_000;
    let h = t / steps as f64;
    let mut s = pdf(0.0) + pdf(t);
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

/// Lanczos approximation.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn sample(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = x
        .iter()
        .map(|&a| rho * a + rng.gen_range(-1.0..1.0))
        .collect();
    (x, y)
}

#[test]
fn pearson_matches_textbook_formula_and_t_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..300 {
        let n = rng.gen_range(3..60);
        let rho = rng.gen_range(-2.0..2.0);
        let (x, y) = sample(&mut rng, n, rho);
        let r = pearson(&x, &y).unwrap();
        assert!((r.coefficient - naive_pearson(&x, &y)).abs() < 1e-10);
        assert!((r.r_squared - r.coefficient.powi(2)).abs() < 1e-15);
        let want = t_p_value(r.coefficient, n);
        assert!(
            (r.p_value - want).abs() < 1e-7,
            "n={n}: {} vs {want}",
            r.p_value
        );
    }
}

#[test]
fn spearman_matches_rank_difference_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..300 {
        let n = rng.gen_range(3..40);
        let (x, y) = sample(&mut rng, n, 1.0);
        let rank = |v: &[f64], i: usize| v.iter().filter(|&&w| w < v[i]).count() as f64 + 1.0;
        let d2: f64 = (0..n).map(|i| (rank(&x, i) - rank(&y, i)).powi(2)).sum();
        let nf = n as f64;
        let want = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        let got = spearman(&x, &y).unwrap().coefficient;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn null_p_values_are_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let trials = 4000;
    let hits = (0..trials)
        .filter(|_| {
            let (x, _) = sample(&mut rng, 12, 0.0);
            let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            pearson(&x, &y).unwrap().p_value < 0.05
        })
        .count();
    // Binomial(4000, 0.05) has sd ≈ 13.8; allow about four.
    assert!((145..=255).contains(&hits), "{hits} rejections");
}

#[test]
fn degenerate_and_short_samples_are_rejected() {
    assert!(matches!(
        pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        Err(Error::DegenerateVariance("x"))
    ));
    assert!(matches!(
        spearman(&[1.0, 2.0, 3.0], &[4.0; 3]),
        Err(Error::DegenerateVariance("y"))
    ));
    assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    assert!(pearson(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]).is_err());
}

fn random_dists(rng: &mut ChaCha8Rng, n: usize) -> Vec<Distribution> {
    (0..n)
        .map(|_| {
            let v = rng.gen_range(2..40);
            let skew = rng.gen_range(0.1..5.0);
            let counts: Vec<u64> = (0..v)
                .map(|_| (rng.gen_range(1.0..50.0f64).powf(skew) as u64).max(1))
                .collect();
            Distribution::from_counts(&counts).unwrap()
        })
        .collect()
}

#[test]
fn alpha_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let grid = default_alpha_grid::<f64>();
    for holdout in [false, true] {
        let dists = random_dists(&mut rng, 40);
        let perf: Vec<f64> = dists
            .iter()
            .map(|d| renyi_efficiency(d, 3.0).unwrap() + rng.gen_range(0.0..0.05))
            .collect();
        let rows: Vec<usize> = (0..40).filter(|i| !holdout || i % 2 == 0).collect();
        let y: Vec<f64> = rows.iter().map(|&i| perf[i]).collect();
        let (mut best_a, mut best_r) = (f64::NAN, 0.0f64);
        for &a in &grid {
            let x: Vec<f64> = rows
                .iter()
                .map(|&i| renyi_efficiency(&dists[i], a).unwrap())
                .collect();
            let r = naive_pearson(&x, &y);
            if r.abs() > best_r.abs() + 1e-12 {
                (best_a, best_r) = (a, r);
            }
        }
        let found = grid_search_alpha(&dists, &perf, &grid, holdout).unwrap();
        assert_eq!(found.curve.len(), grid.len());
        assert!((found.best.coefficient - best_r).abs() < 1e-9);
        let at = |a: f64| {
            found
                .curve
                .iter()
                .find(|p| p.alpha == a)
                .unwrap()
                .pearson
                .unwrap()
                .coefficient
        };
        assert!((at(found.best_alpha) - at(best_a)).abs() < 1e-9);
        assert_eq!(found.holdout.is_some(), holdout);
        if holdout {
            assert_eq!(found.holdout.unwrap().n, 20);
        }
    }
}

#[test]
fn percentile_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let dists = random_dists(&mut rng, 25);
    let f = |d: &Distribution, a: usize, b: usize| {
        percentile_freq(d, a as f64 / 100.0, b as f64 / 100.0).unwrap()
    };
    let perf: Vec<f64> = dists
        .iter()
        .map(|d| f(d, 40, 70) + rng.gen_range(0.0..0.01))
        .collect();
    let found = grid_search_percentile(&dists, &perf, false).unwrap();
    assert_eq!(found.cells.len(), 101 * 102 / 2);
    let mut best = 0.0f64;
    for a in (0..=100).step_by(3) {
        for b in (a..=100).step_by(3) {
            let x: Vec<f64> = dists.iter().map(|d| f(d, a, b)).collect();
            if x.iter().all(|&v| v == x[0]) {
                continue;
            }
            let r = naive_pearson(&x, &perf);
            let cell = found
                .cells
                .iter()
                .find(|c| {
                    (c.start * 100.0).round() as usize == a && (c.end * 100.0).round() as usize == b
                })
                .unwrap();
            let got = cell.pearson.map_or(f64::NAN, |p| p.coefficient);
            assert!((got - r).abs() < 1e-9, "[{a}, {b}]: {got} vs {r}");
            best = best.max(r.abs());
        }
    }
    assert!(found.best.coefficient.abs() >= best - 1e-12);
}

#[test]
fn observation_table_round_trip() {
    let text = "run\tgroup\teff\tlen\tperformance\nr1\tg\t0.5\t12\t31.5\nr2\tg\t0.25\t1e3\t30\nr3\th\t-1.5\t7\t29.25\n";
    let table = Observations::parse(text).unwrap();
    assert_eq!(table.len(), 3);
    assert_eq!(table.predictor_names(), ["eff", "len"]);
    assert_eq!(table.column("len").unwrap(), [12.0, 1000.0, 7.0]);
    assert_eq!(Observations::parse(&table.serialize()).unwrap(), table);
    assert!(matches!(
        table.column("bleu"),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        Observations::parse("run\tgroup\tx\tperformance\nr\tg\t1\n"),
        Err(Error::Parse { line: 2, .. })
    ));
    assert!(Observations::parse("run\tx\tperformance\n").is_err());
}

#[test]
fn observation_table_loads_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.tsv");
    std::fs::write(&path, "run\tgroup\tx\tperformance\na\tg\t1\t2\n").unwrap();
    assert_eq!(Observations::load(&path).unwrap().performance(), [2.0]);
    assert!(matches!(
        Observations::load(dir.path().join("missing.tsv")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn plot_table_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.tsv");
    let rows = vec![
        vec![0.1, f64::NAN],
        vec![1e-7, f64::INFINITY],
        vec![-3.0, 123456.789],
    ];
    let table = PlotTable::new(vec!["a".into(), "b".into()], rows).unwrap();
    table.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "a\tb\n0.1\tnan\n1e-7\tinf\n-3\t123456.789\n");
    let back = PlotTable::parse(&text).unwrap();
    assert_eq!(back.columns(), table.columns());
    assert!(back.rows()[0][1].is_nan());
    assert_eq!(back.rows()[1], [1e-7, f64::INFINITY]);
    assert!(PlotTable::new(vec!["a".into()], vec![vec![1.0, 2.0]]).is_err());
}

proptest! {
    #[test]
    fn pearson_is_affine_invariant(
        pts in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..40),
        scale in 0.01..100.0f64,
        shift in -1e3..1e3f64,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()); };
        let moved: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
        let flipped: Vec<f64> = x.iter().map(|v| -v * scale + shift).collect();
        let a = pearson(&moved, &y).unwrap().coefficient;
        let b = pearson(&flipped, &y).unwrap().coefficient;
        prop_assert!((a - r.coefficient).abs() < 1e-9);
        prop_assert!((b + r.coefficient).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn spearman_is_monotone_invariant(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..40),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let Ok(r) = spearman(&x, &y) else { return Ok(()); };
        let warped: Vec<f64> = x.iter().map(|v| v.exp() + v.powi(3)).collect();
        prop_assert_eq!(spearman(&warped, &y).unwrap().coefficient, r.coefficient);
    }

    #[test]
    fn exported_numbers_keep_ten_digits(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let back: f64 = format_number(x).parse().unwrap();
        let want: f64 = format!("{x:.9e}").parse().unwrap();
        prop_assert_eq!(back, want);
    }
}
