//! Empirical error estimates, budget checks and report rows.
//!
//! Sample `i` is a pure function of `(seed, i)`, the sample range is cut into
//! fixed chunks, maxima are reduced in any order and sums are added chunk by
//! chunk in index order. Reports are therefore bit-identical for every worker
//! count, and the first `k` samples of a larger run are exactly the run of
//! `k`.
//!
//! Empirical sup-norms are lower estimates of the true sup-norm: a value
//! above the bound is a counterexample, a value below it is evidence.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::{BoundBudget, Construction, ConstructionRecord, NetKind};
use crate::data::{complex_target, matvec_target, qpsk_sample, Dataset};
use crate::error::{invalid, Error, Result};
use crate::fnn::{Fnn, NetworkMetrics, Scratch};
use crate::matrix::Matrix;
use crate::rng::{CounterRng, Stream};

const CHUNK: usize = 1024;
const CORNER_PROBES: u64 = 64;
/// Minimum distance of every pre-activation from zero at a Sobolev sample.
pub const KINK_MARGIN: f64 = 1e-9;
pub const MAX_RESAMPLES: u64 = 100;

/// Empirical deviation of a network from its target map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Largest max-norm deviation over random samples and probes.
    pub sup_error: f64,
    /// Mean over random samples of the squared deviation averaged over outputs.
    pub mse: f64,
    /// Largest entry-wise deviation of the Jacobian, when requested.
    pub grad_sup_error: Option<f64>,
    pub sample_count: usize,
    pub probe_count: usize,
    /// Samples dropped because no kink-free point was found.
    pub skipped: usize,
    pub seed: u64,
    pub domain_half_width: f64,
}

/// How many samples to draw, from which seed, on how many workers
/// (`jobs = 0` uses the global pool).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            jobs: 0,
        }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }
}

/// Runs `f` on a pool of `jobs` workers, or on the global pool for 0.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// The exact map a network approximates, with its input distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// `x -> x^2` on `[0, 1]`.
    Square,
    /// `[vec(W); x] -> Wx` with entries uniform in `[-D, D]`.
    Matvec { m: usize, n: usize, half_width: f64 },
    /// Complex product on Rayleigh/QPSK inputs clipped to `[-D, D]`.
    Complex { m: usize, n: usize, half_width: f64 },
    /// `x -> Wx` with entries uniform in `[-D, D]`.
    Affine { w: Matrix, half_width: f64 },
}

impl Target {
    pub fn for_record(rec: &ConstructionRecord) -> Result<Self> {
        let d = rec.half_width;
        Ok(match rec.kind {
            NetKind::Square => Target::Square,
            NetKind::ScalarProduct => Target::Matvec { m: 1, n: 1, half_width: d },
            NetKind::DotProduct => Target::Matvec { m: 1, n: rec.n, half_width: d },
            NetKind::Matvec => Target::Matvec { m: rec.m, n: rec.n, half_width: d },
            NetKind::ComplexMatvec => Target::Complex { m: rec.m, n: rec.n, half_width: d },
            _ => Target::Affine {
                w: rec.affine_matrix()?,
                half_width: d,
            },
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Target::Square => 1,
            Target::Matvec { m, n, .. } => n * (m + 1),
            Target::Complex { m, n, .. } => 2 * n * (m + 1),
            Target::Affine { w, .. } => w.cols(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Target::Square => 1,
            Target::Matvec { m, .. } => *m,
            Target::Complex { m, .. } => 2 * m,
            Target::Affine { w, .. } => w.rows(),
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            Target::Square => 1.0,
            Target::Matvec { half_width, .. }
            | Target::Complex { half_width, .. }
            | Target::Affine { half_width, .. } => *half_width,
        }
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Target::Square => vec![x[0] * x[0]],
            Target::Matvec { m, n, .. } => matvec_target(x, *m, *n),
            Target::Complex { m, n, .. } => complex_target(x, *m, *n),
            Target::Affine { w, .. } => w.matvec(x).expect("checked width"),
        }
    }

    /// Exact Jacobian of the target map at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        match self {
            Target::Square => Matrix::from_row_major(1, 1, vec![2.0 * x[0]]).expect("shape"),
            Target::Matvec { m, n, .. } => {
                let (m, n) = (*m, *n);
                let mut j = Matrix::zeros(m, n * (m + 1));
                for i in 0..m {
                    for c in 0..n {
                        j[(i, c * m + i)] = x[n * m + c];
                        j[(i, n * m + c)] = x[c * m + i];
                    }
                }
                j
            }
            Target::Complex { m, n, .. } => {
                let (m, n) = (*m, *n);
                let nm = n * m;
                let (x1, x2) = (2 * nm, 2 * nm + n);
                let mut j = Matrix::zeros(2 * m, 2 * n * (m + 1));
                for i in 0..m {
                    for c in 0..n {
                        let (a, b) = (c * m + i, nm + c * m + i);
                        // Real part: W1 x1 - W2 x2.
                        j[(i, a)] = x[x1 + c];
                        j[(i, b)] = -x[x2 + c];
                        j[(i, x1 + c)] = x[a];
                        j[(i, x2 + c)] = -x[b];
                        // Imaginary part: W1 x2 + W2 x1.
                        j[(m + i, a)] = x[x2 + c];
                        j[(m + i, b)] = x[x1 + c];
                        j[(m + i, x2 + c)] = x[a];
                        j[(m + i, x1 + c)] = x[b];
                    }
                }
                j
            }
            Target::Affine { w, .. } => w.clone(),
        }
    }

    /// Random input number `index` (attempt 0) or a kink-avoiding redraw.
    fn sample(&self, rng: &CounterRng, index: u64, attempt: u64) -> Vec<f64> {
        let (stream, counter) = if attempt == 0 {
            (Stream::Samples, index)
        } else {
            (Stream::Resample, index.wrapping_mul(MAX_RESAMPLES + 1).wrapping_add(attempt))
        };
        match self {
            Target::Square => vec![rng.unit_at(stream, counter, 0)],
            Target::Complex { m, n, half_width } => {
                let rng = CounterRng::new(rng.seed() ^ (stream as u64).wrapping_mul(0x9E37_79B9));
                qpsk_sample(&rng, counter, *m, *n, *half_width).0
            }
            _ => {
                let d = self.half_width();
                (0..self.input_dim() as u64)
                    .map(|lane| rng.symmetric_at(stream, counter, lane, d))
                    .collect()
            }
        }
    }

    /// Deterministic probes: the origin, the all-`+D` and all-`-D` points,
    /// the split point with matrix entries `+D` and vector entries `-D`,
    /// and 64 random sign patterns of `±D`. The square target uses 0 and 1.
    pub fn probes(&self, rng: &CounterRng) -> Vec<Vec<f64>> {
        let dim = self.input_dim();
        if *self == Target::Square {
            return vec![vec![0.0], vec![1.0]];
        }
        let d = self.half_width();
        let vec_start = match self {
            Target::Matvec { m, n, .. } => n * m,
            Target::Complex { m, n, .. } => 2 * n * m,
            _ => 0,
        };
        let mut probes = vec![vec![0.0; dim], vec![d; dim], vec![-d; dim]];
        if vec_start > 0 {
            probes.push((0..dim).map(|k| if k < vec_start { d } else { -d }).collect());
        }
        for c in 0..CORNER_PROBES {
            probes.push(
                (0..dim as u64)
                    .map(|lane| {
                        if rng.index_at(Stream::Corners, c, lane, 2) == 0 {
                            -d
                        } else {
                            d
                        }
                    })
                    .collect(),
            );
        }
        probes
    }
}

#[derive(Clone, Copy, Default)]
struct Partial {
    sup: f64,
    sum_sq: f64,
    grad: f64,
    skipped: usize,
}

fn deviation(y: &[f64], t: &[f64]) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for (a, b) in y.iter().zip(t) {
        let e = a - b;
        sup = sup.max(e.abs());
        sq += e * e;
    }
    (sup, sq / y.len() as f64)
}

fn check_shape(f: &Fnn, target: &Target) -> Result<()> {
    if f.input_dim() != target.input_dim() || f.output_dim() != target.output_dim() {
        return Err(Error::PackingMismatch(format!(
            "network maps {} -> {}, target expects {} -> {}",
            f.input_dim(),
            f.output_dim(),
            target.input_dim(),
            target.output_dim()
        )));
    }
    Ok(())
}

/// Sup-norm and MSE estimate of `f` against `target`. With `sobolev`, also
/// the Jacobian deviation at kink-free points; probes are then skipped since
/// they sit on kinks.
pub fn estimate(f: &Fnn, target: &Target, sampling: &Sampling, sobolev: bool) -> Result<ErrorReport> {
    check_shape(f, target)?;
    let rng = CounterRng::new(sampling.seed);
    let samples = sampling.samples;
    let chunks = samples.div_ceil(CHUNK);
    let run_chunk = |c: usize| -> Result<Partial> {
        let mut scratch = Scratch::default();
        let mut p = Partial::default();
        for i in (c * CHUNK..samples.min((c + 1) * CHUNK)).map(|i| i as u64) {
            if !sobolev {
                let x = target.sample(&rng, i, 0);
                let y = f.evaluate_with(&x, &mut scratch)?;
                let (sup, sq) = deviation(y, &target.value(&x));
                p.sup = p.sup.max(sup);
                p.sum_sq += sq;
                continue;
            }
            let mut point = None;
            for attempt in 0..=MAX_RESAMPLES {
                let x = target.sample(&rng, i, attempt);
                let (y, margin) = f.evaluate_with_margin(&x, &mut scratch)?;
                if margin >= KINK_MARGIN && target_is_smooth(target, &x) {
                    point = Some((x, y));
                    break;
                }
            }
            let Some((x, y)) = point else {
                p.skipped += 1;
                continue;
            };
            let (sup, sq) = deviation(&y, &target.value(&x));
            p.sup = p.sup.max(sup);
            p.sum_sq += sq;
            let jac = f.jacobian(&x)?;
            let exact = target.jacobian(&x);
            for (a, b) in jac.as_slice().iter().zip(exact.as_slice()) {
                p.grad = p.grad.max((a - b).abs());
            }
        }
        Ok(p)
    };
    let parts = with_jobs(sampling.jobs, || {
        (0..chunks)
            .into_par_iter()
            .map(run_chunk)
            .collect::<Result<Vec<_>>>()
    })??;
    let mut total = Partial::default();
    for p in &parts {
        total.sup = total.sup.max(p.sup);
        total.sum_sq += p.sum_sq;
        total.grad = total.grad.max(p.grad);
        total.skipped += p.skipped;
    }
    let mut probe_count = 0;
    if !sobolev {
        let mut scratch = Scratch::default();
        for x in target.probes(&rng) {
            let y = f.evaluate_with(&x, &mut scratch)?;
            total.sup = total.sup.max(deviation(y, &target.value(&x)).0);
            probe_count += 1;
        }
    }
    let used = samples - total.skipped;
    Ok(ErrorReport {
        sup_error: total.sup,
        mse: if used == 0 { 0.0 } else { total.sum_sq / used as f64 },
        grad_sup_error: sobolev.then_some(total.grad),
        sample_count: samples,
        probe_count,
        skipped: total.skipped,
        seed: sampling.seed,
        domain_half_width: target.half_width(),
    })
}

// Square inputs must stay inside the open unit interval for the derivative
// comparison to be meaningful.
fn target_is_smooth(target: &Target, x: &[f64]) -> bool {
    match target {
        Target::Square => x[0] > 0.0 && x[0] < 1.0,
        _ => true,
    }
}

/// Sup error of a real matrix-vector network over uniform `[-D, D]` entries.
pub fn sup_error_matvec(
    f: &Fnn,
    m: usize,
    n: usize,
    half_width: f64,
    samples: usize,
    seed: u64,
) -> Result<ErrorReport> {
    let target = Target::Matvec { m, n, half_width };
    estimate(f, &target, &Sampling::new(samples, seed), false)
}

/// Sup error of a complex matrix-vector network over Rayleigh/QPSK inputs
/// clipped to `[-D, D]`.
pub fn sup_error_complex(
    f: &Fnn,
    m: usize,
    n: usize,
    half_width: f64,
    samples: usize,
    seed: u64,
) -> Result<ErrorReport> {
    let target = Target::Complex { m, n, half_width };
    estimate(f, &target, &Sampling::new(samples, seed), false)
}

/// Value and Jacobian deviation of a real matrix-vector network.
pub fn sobolev_error_matvec(
    f: &Fnn,
    m: usize,
    n: usize,
    half_width: f64,
    samples: usize,
    seed: u64,
) -> Result<ErrorReport> {
    let target = Target::Matvec { m, n, half_width };
    estimate(f, &target, &Sampling::new(samples, seed), true)
}

/// Largest `|f'(x)|` over kink-free random points of `(0, 1)`.
pub fn square_derivative_sup(f: &Fnn, samples: usize, seed: u64) -> Result<f64> {
    check_shape(f, &Target::Square)?;
    let rng = CounterRng::new(seed);
    let mut scratch = Scratch::default();
    let mut best = 0.0f64;
    for i in 0..samples as u64 {
        for attempt in 0..=MAX_RESAMPLES {
            let x = Target::Square.sample(&rng, i, attempt);
            let (_, margin) = f.evaluate_with_margin(&x, &mut scratch)?;
            if margin >= KINK_MARGIN && x[0] > 0.0 {
                best = best.max(f.jacobian(&x)?[(0, 0)].abs());
                break;
            }
        }
    }
    Ok(best)
}

/// Sup of `|f_s(x) - x^2|` on the `2^14 + 1` equispaced points of `[0, 1]`
/// for every sawtooth order `s = 0..=max_order`.
pub fn square_error_curve(max_order: usize) -> Result<Vec<(usize, f64)>> {
    if max_order > 24 {
        return Err(invalid(format!("max_order must be at most 24, got {max_order}")));
    }
    let grid = 1usize << 14;
    Ok((0..=max_order)
        .into_par_iter()
        .map(|s| {
            let f = crate::constructors::square_net_with_order(s);
            let mut scratch = Scratch::default();
            let sup = (0..=grid).fold(0.0f64, |acc, j| {
                let x = j as f64 / grid as f64;
                let y = f.evaluate_with(&[x], &mut scratch).expect("width 1")[0];
                acc.max((y - x * x).abs())
            });
            (s, sup)
        })
        .collect())
}

/// Mean over samples of the per-output-averaged squared error.
pub fn mse_on_dataset(f: &Fnn, ds: &Dataset) -> Result<f64> {
    Ok(dataset_error(f, ds, 0)?.1)
}

/// `(sup error, mse)` of `f` over a dataset.
pub fn dataset_error(f: &Fnn, ds: &Dataset, jobs: usize) -> Result<(f64, f64)> {
    ds.validate()?;
    if ds.is_empty() {
        return Ok((0.0, 0.0));
    }
    if ds.input_dim() != f.input_dim() || ds.target_dim() != f.output_dim() {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected: f.input_dim() + f.output_dim(),
            found: ds.input_dim() + ds.target_dim(),
        });
    }
    let parts = with_jobs(jobs, || {
        ds.inputs
            .par_chunks(CHUNK)
            .zip(ds.targets.par_chunks(CHUNK))
            .map(|(xs, ts)| {
                let mut scratch = Scratch::default();
                let mut p = Partial::default();
                for (x, t) in xs.iter().zip(ts) {
                    let (sup, sq) = deviation(f.evaluate_with(x, &mut scratch)?, t);
                    p.sup = p.sup.max(sup);
                    p.sum_sq += sq;
                }
                Ok(p)
            })
            .collect::<Result<Vec<Partial>>>()
    })??;
    let sup = parts.iter().fold(0.0f64, |a, p| a.max(p.sup));
    let sum = parts.iter().fold(0.0, |a, p| a + p.sum_sq);
    Ok((sup, sum / ds.len() as f64))
}

/// One metric compared against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub metric: String,
    pub actual: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub checks: Vec<MetricCheck>,
    pub passed: bool,
}

impl ComplianceReport {
    pub fn get(&self, metric: &str) -> Option<&MetricCheck> {
        self.checks.iter().find(|c| c.metric == metric)
    }

    fn flag(&self, metric: &str) -> Option<bool> {
        self.get(metric).map(|c| c.ok)
    }
}

/// Compares every bound present in `budget` with the measured metrics.
pub fn check_budget(f: &Fnn, budget: &BoundBudget) -> ComplianceReport {
    let m = f.metrics();
    let mut checks = Vec::new();
    let mut push = |metric: &str, actual: f64, bound: Option<f64>| {
        if let Some(bound) = bound {
            checks.push(MetricCheck {
                metric: metric.to_string(),
                actual,
                bound,
                ok: actual <= bound,
            });
        }
    };
    push("depth", m.depth as f64, budget.depth_bound);
    push("width", m.max_width as f64, Some(budget.width_bound));
    push("weight", m.max_weight, Some(budget.weight_bound));
    push("connectivity", m.connectivity as f64, budget.connectivity_bound);
    push("neurons", m.neurons as f64, budget.neuron_bound);
    let passed = checks.iter().all(|c| c.ok);
    ComplianceReport { checks, passed }
}

/// Outcome of verifying a stored construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub report: ErrorReport,
    pub metrics: NetworkMetrics,
    pub compliance: Option<ComplianceReport>,
    /// Largest admissible deviation: `eps`, or a rounding allowance for the
    /// exact affine representations.
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_construction(c: &Construction, sampling: &Sampling, sobolev: bool) -> Result<Verification> {
    let target = Target::for_record(&c.record)?;
    let report = estimate(&c.fnn, &target, sampling, sobolev)?;
    let tolerance = match &target {
        Target::Affine { w, half_width } => {
            let row_sum = w
                .iter_rows()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            1e-9 * (row_sum * half_width).max(1.0)
        }
        _ => c.record.eps,
    };
    let compliance = c.record.budget().ok().map(|b| check_budget(&c.fnn, &b));
    let passed = report.sup_error <= tolerance
        && report.grad_sup_error.is_none_or(|g| g <= tolerance);
    Ok(Verification {
        report,
        metrics: c.fnn.metrics(),
        compliance,
        tolerance,
        passed,
    })
}

/// One line of the CSV report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "D")]
    pub half_width: f64,
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    pub sup_error: f64,
    pub mse: f64,
    pub grad_sup_error: Option<f64>,
    #[serde(rename = "L")]
    pub depth: usize,
    #[serde(rename = "M")]
    pub connectivity: usize,
    #[serde(rename = "N")]
    pub neurons: usize,
    #[serde(rename = "W")]
    pub max_width: usize,
    #[serde(rename = "B")]
    pub max_weight: f64,
    pub width_ok: Option<bool>,
    pub weight_ok: Option<bool>,
    pub depth_ok: Option<bool>,
}

impl ReportRow {
    pub fn new(record: &ConstructionRecord, v: &Verification) -> Self {
        let flag = |name: &str| v.compliance.as_ref().and_then(|c| c.flag(name));
        Self {
            kind: record.kind.to_string(),
            m: record.m,
            n: record.n,
            half_width: record.half_width,
            eps: record.eps,
            samples: v.report.sample_count,
            seed: v.report.seed,
            sup_error: v.report.sup_error,
            mse: v.report.mse,
            grad_sup_error: v.report.grad_sup_error,
            depth: v.metrics.depth,
            connectivity: v.metrics.connectivity,
            neurons: v.metrics.neurons,
            max_width: v.metrics.max_width,
            max_weight: v.metrics.max_weight,
            width_ok: flag("width"),
            weight_ok: flag("weight"),
            depth_ok: flag("depth"),
        }
    }
}

/// Writes rows as CSV with a header.
pub fn write_report_rows<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Appends rows to a CSV file, writing the header only into a new or empty
/// file.
pub fn append_report_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_report_rows<R: std::io::Read>(r: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::select_inputs;
    use crate::constructors::affine_representation;

    #[test]
    fn curve_first_orders() {
        let c = square_error_curve(3).unwrap();
        assert_eq!(c[0], (0, 0.25));
        assert_eq!(c[3].1, 0.00390625);
        assert!(square_error_curve(25).is_err());
    }

    #[test]
    fn exact_network_has_no_error() {
        // Ignores vec(W) and multiplies x by a fixed matrix, so the target
        // used here is the fixed map.
        let w = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.0]]).unwrap();
        let f = affine_representation(&w, 1, None).unwrap();
        let target = Target::Affine { w: w.clone(), half_width: 2.0 };
        let r = estimate(&f, &target, &Sampling::new(500, 3), false).unwrap();
        assert!(r.sup_error <= 1e-9);
        let g = estimate(&f, &target, &Sampling::new(200, 3), true).unwrap();
        assert!(g.grad_sup_error.unwrap() <= 1e-9);
        let wrapped = select_inputs(&f, &[4, 5], 6).unwrap();
        let zero_w = Target::Matvec { m: 2, n: 2, half_width: 1.0 };
        assert!(estimate(&wrapped, &zero_w, &Sampling::new(10, 1), false).unwrap().sup_error > 0.0);
    }

    #[test]
    fn packing_mismatch_is_reported() {
        let f = affine_representation(&Matrix::identity(2), 1, None).unwrap();
        assert!(matches!(
            sup_error_matvec(&f, 2, 2, 1.0, 10, 0),
            Err(Error::PackingMismatch(_))
        ));
    }

    #[test]
    fn budget_failure_is_flagged() {
        let f = affine_representation(&Matrix::zeros(250, 3), 1, None).unwrap();
        let b = crate::constructors::predicted_budget(NetKind::Matvec, 8, 4, 2.0, 0.03125, 2.0).unwrap();
        let r = check_budget(&f, &b);
        assert!(!r.passed);
        assert!(!r.get("width").unwrap().ok);
        assert!(r.get("weight").unwrap().ok);
    }

    #[test]
    fn target_jacobians_match_finite_differences() {
        let targets = [
            Target::Matvec { m: 3, n: 2, half_width: 1.0 },
            Target::Complex { m: 2, n: 3, half_width: 2.0 },
        ];
        let rng = CounterRng::new(5);
        for t in targets {
            let x: Vec<f64> = (0..t.input_dim() as u64)
                .map(|l| rng.symmetric_at(Stream::Samples, 0, l, 1.0))
                .collect();
            let j = t.jacobian(&x);
            let h = 1e-6;
            for k in 0..x.len() {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[k] += h;
                xm[k] -= h;
                let (yp, ym) = (t.value(&xp), t.value(&xm));
                for i in 0..t.output_dim() {
                    assert!(((yp[i] - ym[i]) / (2.0 * h) - j[(i, k)]).abs() < 1e-6);
                }
            }
        }
    }
}
