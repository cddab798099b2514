use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use relunet::constructors::{affine_construction, Accuracy, Construction, NetKind, ProductParams};
use relunet::data::{append_zero_channel_probe, equispaced_real_dataset, qpsk_rayleigh_dataset, Dataset};
use relunet::io::{load_network, save_network};
use relunet::verification::{
    append_report_rows, read_report_rows, square_error_curve, verify_construction, ComplianceReport,
    ReportRow, Sampling,
};
use relunet::{Error, Matrix};

use crate::plot::{self, Series};
use crate::{BuildArgs, CurveArgs, DataCommand, ReportArgs, VerifyArgs};

const DEFAULT_SEED: u64 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

/// Usage errors map to 2, I/O failures to 3.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::io(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

/// Accepts `0.03125`, `2^-5`, `2^(-5)` or `2^{-5}`.
pub fn parse_eps(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let exp = exp.trim_matches(|c| matches!(c, '(' | ')' | '{' | '}'));
        let k: i32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        return Ok(2f64.powi(k));
    }
    t.parse().map_err(|_| format!("{s:?} is neither a number nor 2^-k"))
}

fn parse_matrix(s: &str) -> Result<Matrix, Failure> {
    let rows = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(format!("bad matrix {s:?}: {e}")))?;
    Ok(Matrix::from_rows(&rows)?)
}

pub fn build(a: BuildArgs, seed: Option<u64>) -> CmdResult {
    let kind = a
        .kind_positional
        .or(a.kind)
        .ok_or_else(|| Failure::usage("missing network kind"))?;
    let mut c = if kind.trim().eq_ignore_ascii_case("affine") {
        affine(&a.matrix, a.variant, a.depth)?
    } else {
        let kind: NetKind = kind.parse()?;
        if let Some(v) = kind.affine_variant() {
            affine(&a.matrix, v, a.depth)?
        } else {
            let half_width = if kind == NetKind::Square { 1.0 } else { a.half_width };
            let accuracy = if a.sobolev { Accuracy::Sobolev } else { Accuracy::Lebesgue };
            let p = ProductParams::new(kind, a.m, a.n, half_width, a.eps).with_accuracy(accuracy);
            let mut c = match a.order {
                Some(order) => {
                    p.validate()?;
                    p.build_with_order(order)?
                }
                None => p.build()?,
            };
            if !(a.depth_constant > 0.0) {
                return Err(Failure::usage("--C must be positive"));
            }
            c.record.depth_constant = a.depth_constant;
            c.record.sobolev_constants = a.sobolev_constants.map(|v| [v[0], v[1]]);
            c
        }
    };
    c.record.seed = seed;
    save_network(&a.out, &c).map_err(|e| Failure::io(format!("{}: {e}", a.out.display())))?;

    println!("wrote {}", a.out.display());
    print_construction(&c);
    Ok(ExitCode::SUCCESS)
}

fn affine(matrix: &Option<String>, variant: u8, depth: Option<usize>) -> Result<Construction, Failure> {
    let literal = matrix
        .as_deref()
        .ok_or_else(|| Failure::usage("affine networks need --matrix"))?;
    Ok(affine_construction(&parse_matrix(literal)?, variant, depth)?)
}

fn print_construction(c: &Construction) {
    let r = &c.record;
    let m = c.fnn.metrics();
    println!("kind            {}", r.kind);
    println!("m x n           {} x {}", r.m, r.n);
    println!("D               {}", r.half_width);
    println!("eps             {}", r.eps);
    if let Some(s) = r.sawtooth_order {
        println!("sawtooth order  {s}");
        if r.kind == NetKind::Square {
            println!("sup error       {} (exact)", 0.25f64.powi(s as i32 + 1));
        }
    }
    println!("L               {}", m.depth);
    println!("M               {}", m.connectivity);
    println!("N               {}", m.neurons);
    println!("W               {}", m.max_width);
    println!("B               {}", m.max_weight);
    if let Ok(b) = r.budget() {
        print_compliance(&relunet::verification::check_budget(&c.fnn, &b));
    }
}

fn print_compliance(c: &ComplianceReport) {
    println!("budget:");
    for check in &c.checks {
        let verdict = if check.ok { "ok" } else { "EXCEEDED" };
        println!("  {:<13} {:>12} <= {:<12} {verdict}", check.metric, check.actual, check.bound);
    }
}

pub fn verify(a: VerifyArgs, seed: Option<u64>) -> CmdResult {
    let c = load_network(&a.file).map_err(|e| Failure::usage(format!("{}: {e}", a.file.display())))?;
    let sampling = Sampling::new(a.samples, seed.unwrap_or(DEFAULT_SEED)).with_jobs(a.jobs);
    let v = verify_construction(&c, &sampling, a.sobolev)?;
    let r = &v.report;

    println!("network         {}", a.file.display());
    println!("kind            {}", c.record.kind);
    println!("samples         {} (+{} probes, {} skipped)", r.sample_count, r.probe_count, r.skipped);
    println!("seed            {}", r.seed);
    println!("sup error       {:e}", r.sup_error);
    println!("mse             {:e}", r.mse);
    if let Some(g) = r.grad_sup_error {
        println!("jacobian error  {g:e}");
    }
    println!("tolerance       {:e}", v.tolerance);
    if let Some(comp) = &v.compliance {
        print_compliance(comp);
    }
    println!("result          {}", if v.passed { "PASS" } else { "BOUND VIOLATED" });

    if let Some(out) = &a.out {
        append_report_rows(out, &[ReportRow::new(&c.record, &v)])
            .map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    }
    Ok(if v.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn data(d: DataCommand, seed: Option<u64>) -> CmdResult {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let (ds, out) = match d {
        DataCommand::Equispaced { m, n, count, half_width, grid_points, out } => {
            (equispaced_real_dataset(m, n, count, half_width, grid_points, seed)?, out)
        }
        DataCommand::Qpsk { m, n, count, clip, zero_probe, out } => {
            let mut ds = qpsk_rayleigh_dataset(m, n, count, clip, seed)?;
            if zero_probe {
                append_zero_channel_probe(&mut ds)?;
            }
            (ds, out)
        }
    };
    write_dataset(&ds, &out).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    println!(
        "wrote {} rows of {} inputs and {} targets to {}",
        ds.len(),
        ds.input_dim(),
        ds.target_dim(),
        out.display()
    );
    if let Some(clipped) = ds.meta.clipped_entries {
        println!("clipped entries {clipped}");
    }
    Ok(ExitCode::SUCCESS)
}

/// JSON for a `.json` path, CSV otherwise.
fn write_dataset(ds: &Dataset, path: &Path) -> relunet::Result<()> {
    let w = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        ds.write_json(w)
    } else {
        ds.write_csv(w)
    }
}

pub fn curve(a: CurveArgs) -> CmdResult {
    let rows = square_error_curve(a.max_order)?;
    print_curve(&rows);
    if let Some(out) = &a.out {
        let write = || -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(out)?);
            writeln!(w, "order,depth,sup_error")?;
            for (s, e) in &rows {
                writeln!(w, "{s},{},{e:?}", s + 1)?;
            }
            w.flush()
        };
        write().map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn print_curve(rows: &[(usize, f64)]) {
    println!("{:>5} {:>5} {:>14} {:>7}", "order", "depth", "sup_error", "ratio");
    let mut prev: Option<f64> = None;
    for (s, e) in rows {
        let ratio = prev.map_or(String::from("-"), |p| format!("{:.3}", p / e));
        println!("{s:>5} {:>5} {e:>14.6e} {ratio:>7}", s + 1);
        prev = Some(*e);
    }
}

fn expand(inputs: &[String]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for pattern in inputs {
        let paths = glob::glob(pattern).map_err(|e| Failure::usage(format!("bad pattern {pattern:?}: {e}")))?;
        for p in paths {
            let p = p.map_err(|e| Failure::io(e.to_string()))?;
            if p.is_file() {
                files.push(p);
            }
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

fn read_curve(path: &Path) -> Result<Vec<(usize, f64)>, Failure> {
    let bad = |line: &str| Failure::usage(format!("{}: bad curve row {line:?}", path.display()));
    let file = File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for line in BufReader::new(file).lines().skip(1) {
        let line = line.map_err(|e| Failure::io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let (Some(s), Some(e)) = (cols.first(), cols.last()) else {
            return Err(bad(&line));
        };
        rows.push((s.parse().map_err(|_| bad(&line))?, e.parse().map_err(|_| bad(&line))?));
    }
    Ok(rows)
}

fn first_line(path: &Path) -> Result<String, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(line)
}

pub fn report(a: ReportArgs) -> CmdResult {
    let files = expand(&a.inputs)?;
    if files.is_empty() {
        return Err(Failure::usage("no report files matched"));
    }
    let mut series = Vec::new();
    for path in &files {
        println!("== {}", path.display());
        if first_line(path)?.starts_with("order") {
            let rows = read_curve(path)?;
            print_curve(&rows);
            series.push(Series {
                label: path.display().to_string(),
                points: rows.iter().map(|(s, e)| ((s + 1) as f64, *e)).collect(),
            });
        } else {
            let file = File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            let rows = read_report_rows(BufReader::new(file))
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            print_rows(&rows);
            let mut points: Vec<(f64, f64)> = rows.iter().map(|r| (r.depth as f64, r.sup_error)).collect();
            points.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            series.push(Series { label: path.display().to_string(), points });
        }
    }
    if let Some(out) = &a.plot {
        std::fs::write(out, plot::svg(&series)).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
        println!("plot written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn print_rows(rows: &[ReportRow]) {
    println!(
        "{:<15} {:>3} {:>3} {:>5} {:>10} {:>8} {:>11} {:>11} {:>11} {:>3} {:>7} {:>5} {:>5}  ok",
        "kind", "m", "n", "D", "eps", "samples", "sup_error", "mse", "grad_error", "L", "M", "W", "B"
    );
    let flag = |f: Option<bool>| match f {
        Some(true) => "y",
        Some(false) => "n",
        None => "-",
    };
    let mut within = 0;
    for r in rows {
        let grad = r.grad_sup_error.map_or(String::from("-"), |g| format!("{g:.3e}"));
        let ok = r.sup_error <= r.eps;
        within += usize::from(ok);
        println!(
            "{:<15} {:>3} {:>3} {:>5} {:>10.4e} {:>8} {:>11.3e} {:>11.3e} {:>11} {:>3} {:>7} {:>5} {:>5}  err:{} W:{} B:{} L:{}",
            r.kind,
            r.m,
            r.n,
            r.half_width,
            r.eps,
            r.samples,
            r.sup_error,
            r.mse,
            grad,
            r.depth,
            r.connectivity,
            r.max_width,
            r.max_weight,
            if ok { "y" } else { "n" },
            flag(r.width_ok),
            flag(r.weight_ok),
            flag(r.depth_ok),
        );
    }
    println!("{within}/{} rows within eps", rows.len());
}
