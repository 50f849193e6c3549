//! Correlation of intrinsic predictors with downstream performance, and the grid searches
//! over the Rényi order and the percentile interval.

use std::fmt::Write as _;
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::UnigramDistribution;
use crate::error::{Error, Result};
use crate::metrics::{percentile_curve, renyi_efficiency};
use crate::scalar::{stable_sum, Scalar};

/// A correlation coefficient with its two-sided t-test p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult<T> {
    pub coefficient: T,
    pub p_value: T,
    pub n: usize,
    pub r_squared: T,
}

fn check_pair<T: Scalar>(xs: &[T], ys: &[T]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "samples differ in length: {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "correlation needs at least 3 observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "samples contain non-finite values".into(),
        ));
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::DegenerateVariance("x"));
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::DegenerateVariance("y"));
    }
    Ok(())
}

fn t_test_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn correlate<T: Scalar>(xs: &[T], ys: &[T]) -> CorrelationResult<T> {
    let n = T::of_usize(xs.len());
    let mx = stable_sum(xs.iter().copied()) / n;
    let my = stable_sum(ys.iter().copied()) / n;
    let sxy = stable_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    let sxx = stable_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    let syy = stable_sum(ys.iter().map(|&y| (y - my) * (y - my)));
    let r = (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one());
    CorrelationResult {
        coefficient: r,
        p_value: T::of(t_test_p_value(r.as_f64(), xs.len())),
        n: xs.len(),
        r_squared: r * r,
    }
}

/// Sample Pearson correlation.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<CorrelationResult<T>> {
    check_pair(xs, ys)?;
    Ok(correlate(xs, ys))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<CorrelationResult<T>> {
    check_pair(xs, ys)?;
    Ok(correlate(&average_ranks(xs), &average_ranks(ys)))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite samples"));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = T::of((i + j) as f64 / 2.0 + 1.0);
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rows of (run, group, predictors..., performance).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTable<T> {
    runs: Vec<String>,
    groups: Vec<String>,
    predictor_names: Vec<String>,
    predictors: Vec<Vec<T>>,
    performance: Vec<T>,
}

impl<T: Scalar> ObservationTable<T> {
    /// Builds a table from rows of `(run, group, predictor values, performance)`.
    pub fn new(
        predictor_names: Vec<String>,
        rows: impl IntoIterator<Item = (String, String, Vec<T>, T)>,
    ) -> Result<Self> {
        let mut table = Self {
            runs: Vec::new(),
            groups: Vec::new(),
            predictors: vec![Vec::new(); predictor_names.len()],
            predictor_names,
            performance: Vec::new(),
        };
        for (run, group, values, perf) in rows {
            if values.len() != table.predictor_names.len() {
                return Err(Error::InvalidArgument(format!(
                    "run {run:?} has {} predictor values, expected {}",
                    values.len(),
                    table.predictor_names.len()
                )));
            }
            table.runs.push(run);
            table.groups.push(group);
            for (col, v) in table.predictors.iter_mut().zip(values) {
                col.push(v);
            }
            table.performance.push(perf);
        }
        Ok(table)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("observation table has no header".into()))?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 3
            || cols[0] != "run"
            || cols[1] != "group"
            || cols[cols.len() - 1] != "performance"
        {
            return Err(Error::parse(
                1,
                "header must be run<TAB>group<TAB><predictors...><TAB>performance",
            ));
        }
        let names: Vec<String> = cols[2..cols.len() - 1]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != cols.len() {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {} fields, found {}", cols.len(), fields.len()),
                ));
            }
            let mut nums = Vec::with_capacity(fields.len() - 2);
            for (name, field) in cols[2..].iter().zip(&fields[2..]) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("{name}: not a number: {field:?}")))?;
                if v.is_nan() {
                    return Err(Error::parse(i + 1, format!("{name}: missing value")));
                }
                nums.push(T::of(v));
            }
            let perf = nums.pop().expect("performance column");
            rows.push((fields[0].to_owned(), fields[1].to_owned(), nums, perf));
        }
        Self::new(names, rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from("run\tgroup");
        for name in &self.predictor_names {
            out.push('\t');
            out.push_str(name);
        }
        out.push_str("\tperformance\n");
        for i in 0..self.len() {
            out.push_str(&self.runs[i]);
            out.push('\t');
            out.push_str(&self.groups[i]);
            for col in &self.predictors {
                let _ = write!(out, "\t{}", col[i]);
            }
            let _ = writeln!(out, "\t{}", self.performance[i]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn runs(&self) -> &[String] {
        &self.runs
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    pub fn performance(&self) -> &[T] {
        &self.performance
    }

    pub fn column(&self, name: &str) -> Result<&[T]> {
        if name == "performance" {
            return Ok(&self.performance);
        }
        self.predictor_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.predictors[i].as_slice())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no column {name:?}; available: {}",
                    self.predictor_names.join(", ")
                ))
            })
    }
}

/// Default α grid: 0, 0.1 through 5.0 in steps of 0.1, and ∞.
pub fn default_alpha_grid<T: Scalar>() -> Vec<T> {
    std::iter::once(T::zero())
        .chain((1..=50).map(|k| T::of(k as f64 / 10.0)))
        .chain(std::iter::once(T::infinity()))
        .collect()
}

/// Row positions used for selection and for reporting. Without holdout both are all rows;
/// with holdout, even positions select and odd positions report.
fn split(n: usize, holdout: bool) -> (Vec<usize>, Vec<usize>) {
    if holdout {
        ((0..n).step_by(2).collect(), (1..n).step_by(2).collect())
    } else {
        ((0..n).collect(), Vec::new())
    }
}

fn pick<T: Copy>(values: &[T], rows: &[usize]) -> Vec<T> {
    rows.iter().map(|&i| values[i]).collect()
}

fn check_inputs<T>(dists: &[UnigramDistribution<T>], performance: &[T]) -> Result<()> {
    if dists.len() != performance.len() {
        return Err(Error::InvalidArgument(format!(
            "{} distributions for {} performance values",
            dists.len(),
            performance.len()
        )));
    }
    Ok(())
}

/// Correlations of one α with performance. `None` marks a degenerate predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoint<T> {
    pub alpha: T,
    pub pearson: Option<CorrelationResult<T>>,
    pub spearman: Option<CorrelationResult<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSearch<T> {
    pub curve: Vec<AlphaPoint<T>>,
    pub best_alpha: T,
    /// Pearson at `best_alpha` on the selection rows.
    pub best: CorrelationResult<T>,
    /// Pearson at `best_alpha` on the held-out rows.
    pub holdout: Option<CorrelationResult<T>>,
}

impl<T: Scalar> AlphaSearch<T> {
    pub fn plot_table(&self) -> PlotTable {
        let cols = ["alpha", "pearson", "pearson_p", "spearman", "spearman_p"];
        let rows = self
            .curve
            .iter()
            .map(|pt| {
                let (r, rp) = coefficient_and_p(pt.pearson);
                let (s, sp) = coefficient_and_p(pt.spearman);
                vec![pt.alpha.as_f64(), r, rp, s, sp]
            })
            .collect();
        PlotTable::new(cols.iter().map(|c| c.to_string()).collect(), rows)
            .expect("rows match columns")
    }
}

fn coefficient_and_p<T: Scalar>(c: Option<CorrelationResult<T>>) -> (f64, f64) {
    c.map_or((f64::NAN, f64::NAN), |c| {
        (c.coefficient.as_f64(), c.p_value.as_f64())
    })
}

fn degenerate_ok<V>(r: Result<V>) -> Result<Option<V>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateVariance(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Correlates Rényi efficiency at every α of `grid` with performance and picks the α
/// maximizing |Pearson|. Grid points where the predictor is constant are kept in the
/// curve without a correlation; an error is returned only if every point is degenerate.
pub fn grid_search_alpha<T: Scalar>(
    dists: &[UnigramDistribution<T>],
    performance: &[T],
    grid: &[T],
    holdout: bool,
) -> Result<AlphaSearch<T>> {
    check_inputs(dists, performance)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty α grid".into()));
    }
    let (select, report) = split(dists.len(), holdout);
    let perf_sel = pick(performance, &select);
    let mut curve = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, CorrelationResult<T>)> = None;
    for (gi, &alpha) in grid.iter().enumerate() {
        let eff = select
            .iter()
            .map(|&i| renyi_efficiency(&dists[i], alpha))
            .collect::<Result<Vec<T>>>()?;
        let p = degenerate_ok(pearson(&eff, &perf_sel))?;
        let s = degenerate_ok(spearman(&eff, &perf_sel))?;
        if let Some(p) = p {
            if best.is_none_or(|(_, b)| p.coefficient.abs() > b.coefficient.abs()) {
                best = Some((gi, p));
            }
        }
        curve.push(AlphaPoint {
            alpha,
            pearson: p,
            spearman: s,
        });
    }
    let (gi, best) = best.ok_or(Error::DegenerateVariance("predictor at every grid point"))?;
    let best_alpha = grid[gi];
    let holdout = if holdout {
        let eff = report
            .iter()
            .map(|&i| renyi_efficiency(&dists[i], best_alpha))
            .collect::<Result<Vec<T>>>()?;
        Some(pearson(&eff, &pick(performance, &report))?)
    } else {
        None
    };
    Ok(AlphaSearch {
        curve,
        best_alpha,
        best,
        holdout,
    })
}

/// Pearson correlation of F_{γ1,γ2} with performance for one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileCell<T> {
    pub start: T,
    pub end: T,
    pub pearson: Option<CorrelationResult<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileSearch<T> {
    /// Cells with start ≤ end, start-major in grid order.
    pub cells: Vec<PercentileCell<T>>,
    pub best_start: T,
    pub best_end: T,
    pub best: CorrelationResult<T>,
    pub holdout: Option<CorrelationResult<T>>,
}

impl<T: Scalar> PercentileSearch<T> {
    /// Heatmap as (gamma1, gamma2, pearson) triplets.
    pub fn plot_table(&self) -> PlotTable {
        let rows = self
            .cells
            .iter()
            .map(|c| {
                let r = c.pearson.map_or(f64::NAN, |p| p.coefficient.as_f64());
                vec![c.start.as_f64(), c.end.as_f64(), r]
            })
            .collect();
        PlotTable::new(
            vec!["gamma1".into(), "gamma2".into(), "pearson".into()],
            rows,
        )
        .expect("rows match columns")
    }
}

const PERCENTILE_POINTS: usize = 101;

/// Interval sums of the percentile curve from prefix sums.
fn interval_sum<T: Scalar>(prefix: &[T], start: usize, end: usize) -> T {
    prefix[end + 1] - prefix[start]
}

/// Correlates F_{γ1,γ2} with performance over every interval 0 ≤ γ1 ≤ γ2 ≤ 1 of the 1%
/// grid and picks the interval maximizing |Pearson|.
pub fn grid_search_percentile<T: Scalar>(
    dists: &[UnigramDistribution<T>],
    performance: &[T],
    holdout: bool,
) -> Result<PercentileSearch<T>> {
    check_inputs(dists, performance)?;
    let prefixes: Vec<Vec<T>> = dists
        .iter()
        .map(|d| {
            let mut acc = vec![T::zero()];
            for v in percentile_curve(d) {
                acc.push(*acc.last().unwrap() + v);
            }
            acc
        })
        .collect();
    let (select, report) = split(dists.len(), holdout);
    let perf_sel = pick(performance, &select);
    let step = |k: usize| T::of(k as f64 / (PERCENTILE_POINTS - 1) as f64);
    let mut cells = Vec::with_capacity(PERCENTILE_POINTS * (PERCENTILE_POINTS + 1) / 2);
    let mut best: Option<(usize, usize, CorrelationResult<T>)> = None;
    for a in 0..PERCENTILE_POINTS {
        for b in a..PERCENTILE_POINTS {
            let f: Vec<T> = select
                .iter()
                .map(|&i| interval_sum(&prefixes[i], a, b))
                .collect();
            let p = degenerate_ok(pearson(&f, &perf_sel))?;
            if let Some(p) = p {
                if best.is_none_or(|(_, _, q)| p.coefficient.abs() > q.coefficient.abs()) {
                    best = Some((a, b, p));
                }
            }
            cells.push(PercentileCell {
                start: step(a),
                end: step(b),
                pearson: p,
            });
        }
    }
    let (a, b, best) = best.ok_or(Error::DegenerateVariance("predictor in every interval"))?;
    let holdout = if holdout {
        let f: Vec<T> = report
            .iter()
            .map(|&i| interval_sum(&prefixes[i], a, b))
            .collect();
        Some(pearson(&f, &pick(performance, &report))?)
    } else {
        None
    };
    Ok(PercentileSearch {
        cells,
        best_start: step(a),
        best_end: step(b),
        best,
        holdout,
    })
}

/// Numeric table for plotting, written as TSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Significant digits of exported numbers.
pub const PLOT_DIGITS: usize = 10;

impl PlotTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument(
                "plot table needs at least one column".into(),
            ));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(Error::InvalidArgument(format!(
                "row {bad} has {} values for {} columns",
                rows[bad].len(),
                columns.len()
            )));
        }
        Ok(Self { columns, rows })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn export(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.export()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .filter(|h| !h.is_empty())
            .ok_or_else(|| Error::EmptyInput("plot table has no header".into()))?;
        let columns: Vec<String> = header.split('\t').map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split('\t')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(i + 2, format!("not a number: {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(columns, rows)
    }
}

/// Formats `x` rounded to [`PLOT_DIGITS`] significant digits in the shortest form that
/// parses back to the rounded value; scientific notation outside [1e-4, 1e10).
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", PLOT_DIGITS - 1, x)
        .parse()
        .expect("valid float");
    let mag = rounded.abs();
    if rounded != 0.0 && !(1e-4..1e10).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_worked_examples() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(r.coefficient, 1.0);
        assert_eq!(r.p_value, 0.0);
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.coefficient, -1.0);
        // Sxy = 5.5, Sxx = 5, Syy = 8.75.
        let r = pearson::<f64>(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0]).unwrap();
        assert!((r.coefficient - 5.5 / 43.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.r_squared, r.coefficient * r.coefficient);
        assert_eq!(r.n, 4);
    }

    #[test]
    fn t_test_matches_reference() {
        // With two degrees of freedom the two-sided p-value is 1 − |t| / √(t² + 2).
        let r = pearson::<f64>(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0]).unwrap();
        let c = r.coefficient;
        let t = c * (2.0 / (1.0 - c * c)).sqrt();
        let expected = 1.0 - t / (t * t + 2.0).sqrt();
        assert!(
            (r.p_value - expected).abs() < 1e-12,
            "{} vs {expected}",
            r.p_value
        );
    }

    #[test]
    fn spearman_ranks() {
        assert_eq!(
            average_ranks(&[1.0, 2.0, 2.0, 3.0]),
            vec![1.0, 2.5, 2.5, 4.0]
        );
        assert_eq!(
            average_ranks(&[5.0, 5.0, 5.0, 1.0]),
            vec![3.0, 3.0, 3.0, 1.0]
        );
        let xs = [0.5, 1.0, 2.0, 3.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.exp()).collect();
        assert_eq!(spearman(&xs, &ys).unwrap().coefficient, 1.0);
        assert!(pearson(&xs, &ys).unwrap().coefficient < 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateVariance("x"))
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]),
            Err(Error::DegenerateVariance("y"))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn observation_table_round_trip() {
        let text = "run\tgroup\trenyi\tseq_len\tperformance\n\
                    r1\tbpe\t0.5\t12\t30.5\n\
                    r2\tlzw\t0.25\t14\t28\n";
        let t = ObservationTable::<f64>::parse(text).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.column("seq_len").unwrap(), &[12.0, 14.0]);
        assert_eq!(t.performance(), &[30.5, 28.0]);
        assert_eq!(t.groups(), &["bpe", "lzw"]);
        assert!(matches!(t.column("bleu"), Err(Error::InvalidArgument(_))));
        assert_eq!(ObservationTable::parse(&t.serialize()).unwrap(), t);
    }

    #[test]
    fn observation_table_errors() {
        assert!(ObservationTable::<f64>::parse("").is_err());
        assert!(ObservationTable::<f64>::parse("run\tx\tperformance\n").is_err());
        let missing = "run\tgroup\tx\tperformance\nr1\tg\t\t1\n";
        assert!(matches!(
            ObservationTable::<f64>::parse(missing),
            Err(Error::Parse { line: 2, .. })
        ));
        let nan = "run\tgroup\tx\tperformance\nr1\tg\tnan\t1\n";
        assert!(ObservationTable::<f64>::parse(nan).is_err());
    }

    #[test]
    fn alpha_grid_shape() {
        let grid = default_alpha_grid::<f64>();
        assert_eq!(grid.len(), 52);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[10], 1.0);
        assert!(grid[51].is_infinite());
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(-123456.789012345), "-123456.789");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn plot_table_round_trip() {
        let t = PlotTable::new(
            vec!["alpha".into(), "pearson".into()],
            vec![vec![0.0, 0.25], vec![1.5, -0.75], vec![f64::INFINITY, 0.5]],
        )
        .unwrap();
        let text = t.export();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(PlotTable::parse(&text).unwrap(), t);
        assert!(PlotTable::new(vec!["a".into()], vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn alpha_search_on_planted_order() {
        let dists: Vec<_> = (0..12)
            .map(|i| {
                let w: Vec<f64> = (1..=6)
                    .map(|k| (k as f64).powf(-0.3 - 0.15 * i as f64))
                    .collect();
                UnigramDistribution::from_weights(&w).unwrap()
            })
            .collect();
        let perf: Vec<f64> = dists
            .iter()
            .map(|d| renyi_efficiency(d, 2.5).unwrap())
            .collect();
        let s = grid_search_alpha(&dists, &perf, &default_alpha_grid(), false).unwrap();
        assert_eq!(s.curve.len(), 52);
        // Every distribution has full support, so α = 0 gives a constant predictor.
        assert!(s.curve[0].pearson.is_none());
        assert!(
            (s.best_alpha - 2.5).abs() <= 0.1 + 1e-12,
            "{}",
            s.best_alpha
        );
        assert!(s.best.coefficient > 0.999);
        let held = grid_search_alpha(&dists, &perf, &default_alpha_grid(), true).unwrap();
        assert_eq!(held.best.n, 6);
        assert_eq!(held.holdout.unwrap().n, 6);
        assert_eq!(s.plot_table().rows().len(), 52);
    }

    #[test]
    fn percentile_cells_are_upper_triangular() {
        let dists: Vec<_> = (0..5)
            .map(|i| UnigramDistribution::from_counts(&[1, 2 + i, 4, 8 + 3 * i, 16]).unwrap())
            .collect();
        let perf = [1.0, 3.0, 2.0, 5.0, 4.0];
        let s = grid_search_percentile(&dists, &perf, false).unwrap();
        assert_eq!(s.cells.len(), 101 * 102 / 2);
        assert!(s.cells.iter().all(|c| c.start <= c.end));
        assert_eq!(s.plot_table().columns(), &["gamma1", "gamma2", "pearson"]);
    }
}
