//! Verification datasets and input packing.
//!
//! Matrices are vectorized column-major: entry `W(i, j)` of an `m x n`
//! matrix sits at index `j * m + i`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::rng::{CounterRng, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub packing: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clipped_entries: Option<usize>,
    #[serde(default)]
    pub zero_channel_probe: bool,
}

/// Paired inputs and targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.targets.len() {
            return Err(Error::DimensionMismatch {
                at: 0,
                expected: self.inputs.len(),
                found: self.targets.len(),
            });
        }
        let (a, b) = (self.input_dim(), self.target_dim());
        for (i, (x, y)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if x.len() != a || y.len() != b {
                return Err(Error::DimensionMismatch {
                    at: i,
                    expected: a + b,
                    found: x.len() + y.len(),
                });
            }
        }
        Ok(())
    }

    /// One row per sample: columns `a0..` (inputs) then `b0..` (targets).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<String> = (0..self.input_dim())
            .map(|j| format!("a{j}"))
            .chain((0..self.target_dim()).map(|j| format!("b{j}")))
            .collect();
        out.write_record(&header)?;
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            out.write_record(x.iter().chain(y).map(|v| format!("{v:?}")))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`Dataset::write_csv`]; `meta` is supplied by
    /// the caller because CSV carries none.
    pub fn read_csv<R: Read>(r: R, meta: DatasetMeta) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let n_in = header.iter().filter(|h| h.starts_with('a')).count();
        if header.iter().take(n_in).any(|h| !h.starts_with('a'))
            || header.iter().skip(n_in).any(|h| !h.starts_with('b'))
        {
            return Err(invalid("CSV header must list a* columns before b* columns"));
        }
        let (mut inputs, mut targets) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| invalid(format!("row {i}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            targets.push(vals[n_in..].to_vec());
            inputs.push(vals[..n_in].to_vec());
        }
        let ds = Self {
            meta,
            inputs,
            targets,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let ds: Self = serde_json::from_reader(std::io::BufReader::new(r))?;
        ds.validate()?;
        Ok(ds)
    }
}

/// `[vec(W); x]`.
pub fn pack_matvec(w: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    if w.cols() != x.len() {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected: w.cols(),
            found: x.len(),
        });
    }
    let mut out = vec_col_major(w);
    out.extend_from_slice(x);
    Ok(out)
}

pub fn unpack_matvec(v: &[f64], m: usize, n: usize) -> Result<(Matrix, Vec<f64>)> {
    check_len(v, n * (m + 1))?;
    Ok((unvec(&v[..n * m], m, n), v[n * m..].to_vec()))
}

/// `[vec(W1); vec(W2); x1; x2]`.
pub fn pack_complex(w1: &Matrix, w2: &Matrix, x1: &[f64], x2: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (w1.rows(), w1.cols());
    if (w2.rows(), w2.cols()) != (m, n) {
        return Err(Error::DimensionMismatch {
            at: 1,
            expected: m * n,
            found: w2.rows() * w2.cols(),
        });
    }
    for (at, x) in [(2, x1), (3, x2)] {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                at,
                expected: n,
                found: x.len(),
            });
        }
    }
    let mut out = vec_col_major(w1);
    out.extend(vec_col_major(w2));
    out.extend_from_slice(x1);
    out.extend_from_slice(x2);
    Ok(out)
}

#[allow(clippy::type_complexity)]
pub fn unpack_complex(
    v: &[f64],
    m: usize,
    n: usize,
) -> Result<(Matrix, Matrix, Vec<f64>, Vec<f64>)> {
    check_len(v, 2 * n * (m + 1))?;
    let nm = n * m;
    Ok((
        unvec(&v[..nm], m, n),
        unvec(&v[nm..2 * nm], m, n),
        v[2 * nm..2 * nm + n].to_vec(),
        v[2 * nm + n..].to_vec(),
    ))
}

/// `Wx` read straight from a packed input, summing over `j` in order.
pub fn matvec_target(packed: &[f64], m: usize, n: usize) -> Vec<f64> {
    let x = &packed[n * m..];
    (0..m)
        .map(|i| (0..n).fold(0.0, |acc, j| acc + packed[j * m + i] * x[j]))
        .collect()
}

/// `[W1 x1 - W2 x2; W1 x2 + W2 x1]` from a packed complex input.
pub fn complex_target(packed: &[f64], m: usize, n: usize) -> Vec<f64> {
    let nm = n * m;
    let (w1, w2) = (&packed[..nm], &packed[nm..2 * nm]);
    let (x1, x2) = (&packed[2 * nm..2 * nm + n], &packed[2 * nm + n..]);
    let dot = |w: &[f64], x: &[f64], i: usize| (0..n).fold(0.0, |acc, j| acc + w[j * m + i] * x[j]);
    let re = (0..m).map(|i| dot(w1, x1, i) - dot(w2, x2, i));
    let im = (0..m).map(|i| dot(w1, x2, i) + dot(w2, x1, i));
    re.chain(im).collect()
}

/// Entries drawn uniformly from `{-h + 2h j / (G - 1)}`, targets `Wx`.
pub fn equispaced_real_dataset(
    m: usize,
    n: usize,
    count: usize,
    half_width: f64,
    grid_points: usize,
    seed: u64,
) -> Result<Dataset> {
    if m == 0 || n == 0 || count == 0 {
        return Err(invalid("m, n and count must be at least 1"));
    }
    if grid_points < 2 {
        return Err(invalid("grid_points must be at least 2"));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(invalid("half_width must be positive and finite"));
    }
    let rng = CounterRng::new(seed);
    let width = n * (m + 1);
    let step = (grid_points - 1) as f64;
    let inputs: Vec<Vec<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            (0..width as u64)
                .map(|lane| {
                    let j = rng.index_at(Stream::Dataset, i, lane, grid_points as u64) as f64;
                    -half_width + 2.0 * half_width * j / step
                })
                .collect()
        })
        .collect();
    let targets = inputs.iter().map(|a| matvec_target(a, m, n)).collect();
    Ok(Dataset {
        meta: DatasetMeta {
            kind: "equispaced".into(),
            m,
            n,
            count,
            seed,
            packing: "vec(W) column-major,x".into(),
            half_width: Some(half_width),
            grid_points: Some(grid_points),
            clip: None,
            clipped_entries: None,
            zero_channel_probe: false,
        },
        inputs,
        targets,
    })
}

/// Packed input number `index` of the Rayleigh/QPSK stream: channel
/// components `N(0, 1/2)` clipped to `[-clip, clip]` and QPSK symbols.
/// Returns the input and the number of clipped channel entries.
pub fn qpsk_sample(rng: &CounterRng, index: u64, m: usize, n: usize, clip: f64) -> (Vec<f64>, usize) {
    let nm = (n * m) as u64;
    let mut clipped = 0;
    let mut out = Vec::with_capacity(2 * n * (m + 1));
    for lane in 0..2 * nm {
        let z = FRAC_1_SQRT_2 * rng.normal_at(Stream::Dataset, index, lane);
        if z.abs() > clip {
            clipped += 1;
        }
        out.push(z.clamp(-clip, clip));
    }
    for lane in 0..2 * n as u64 {
        let bit = rng.index_at(Stream::Symbols, index, lane, 2);
        out.push(if bit == 0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 });
    }
    (out, clipped)
}

/// Rayleigh channels with QPSK symbols; targets are the real and imaginary
/// parts of `Hx`.
pub fn qpsk_rayleigh_dataset(m: usize, n: usize, count: usize, clip: f64, seed: u64) -> Result<Dataset> {
    if m == 0 || n == 0 || count == 0 {
        return Err(invalid("m, n and count must be at least 1"));
    }
    if !(clip > 0.0) {
        return Err(invalid(format!("clip must be positive, got {clip}")));
    }
    let rng = CounterRng::new(seed);
    let samples: Vec<(Vec<f64>, usize)> = (0..count as u64)
        .into_par_iter()
        .map(|i| qpsk_sample(&rng, i, m, n, clip))
        .collect();
    let clipped_entries = samples.iter().map(|s| s.1).sum();
    let inputs: Vec<Vec<f64>> = samples.into_iter().map(|s| s.0).collect();
    let targets = inputs.iter().map(|c| complex_target(c, m, n)).collect();
    Ok(Dataset {
        meta: DatasetMeta {
            kind: "qpsk_rayleigh".into(),
            m,
            n,
            count,
            seed,
            packing: "vec(W1) column-major,vec(W2) column-major,x1,x2".into(),
            half_width: None,
            grid_points: None,
            clip: Some(clip),
            clipped_entries: Some(clipped_entries),
            zero_channel_probe: false,
        },
        inputs,
        targets,
    })
}

/// Appends a sample with an all-zero channel (target exactly zero).
pub fn append_zero_channel_probe(ds: &mut Dataset) -> Result<()> {
    let (m, n) = (ds.meta.m, ds.meta.n);
    if ds.meta.kind != "qpsk_rayleigh" {
        return Err(invalid("zero-channel probe applies to qpsk_rayleigh datasets"));
    }
    let rng = CounterRng::new(ds.meta.seed);
    let (mut input, _) = qpsk_sample(&rng, ds.meta.count as u64, m, n, 1.0);
    input[..2 * n * m].iter_mut().for_each(|v| *v = 0.0);
    ds.targets.push(complex_target(&input, m, n));
    ds.inputs.push(input);
    ds.meta.zero_channel_probe = true;
    Ok(())
}

fn vec_col_major(w: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.rows() * w.cols());
    for j in 0..w.cols() {
        for i in 0..w.rows() {
            out.push(w[(i, j)]);
        }
    }
    out
}

fn unvec(v: &[f64], m: usize, n: usize) -> Matrix {
    let mut w = Matrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            w[(i, j)] = v[j * m + i];
        }
    }
    w
}

fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_major_packing() {
        let w = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let p = pack_matvec(&w, &[5.0, 6.0]).unwrap();
        assert_eq!(p, vec![1.0, 3.0, 2.0, 4.0, 5.0, 6.0]);
        let (w2, x) = unpack_matvec(&p, 2, 2).unwrap();
        assert_eq!(w2, w);
        assert_eq!(x, vec![5.0, 6.0]);
        assert_eq!(matvec_target(&p, 2, 2), vec![17.0, 39.0]);
        assert!(pack_matvec(&w, &[1.0]).is_err());
    }

    #[test]
    fn complex_packing() {
        let w1 = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let z = Matrix::zeros(1, 2);
        let p = pack_complex(&w1, &z, &[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 2.0, 0.0, 0.0, 3.0, 4.0, 0.0, 0.0]);
        let (a, b, c, d) = unpack_complex(&p, 1, 2).unwrap();
        assert_eq!((a, b), (w1, z));
        assert_eq!((c, d), (vec![3.0, 4.0], vec![0.0, 0.0]));
        assert_eq!(complex_target(&p, 1, 2), vec![11.0, 0.0]);
    }

    #[test]
    fn two_point_grid() {
        let ds = equispaced_real_dataset(2, 3, 50, 1.0, 2, 9).unwrap();
        assert!(ds.inputs.iter().flatten().all(|v| *v == 1.0 || *v == -1.0));
        assert!(equispaced_real_dataset(2, 3, 5, 1.0, 1, 9).is_err());
    }

    #[test]
    fn qpsk_shapes_and_symbols() {
        let ds = qpsk_rayleigh_dataset(8, 4, 20, 3.0, 7).unwrap();
        assert_eq!((ds.input_dim(), ds.target_dim()), (72, 16));
        for c in &ds.inputs {
            assert!(c[..64].iter().all(|v| v.abs() <= 3.0));
            assert!(c[64..].iter().all(|v| v.abs() == FRAC_1_SQRT_2));
        }
    }

    #[test]
    fn zero_channel_probe_has_zero_target() {
        let mut ds = qpsk_rayleigh_dataset(2, 2, 3, 3.0, 1).unwrap();
        append_zero_channel_probe(&mut ds).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.targets[3].iter().all(|v| *v == 0.0));
    }
}
