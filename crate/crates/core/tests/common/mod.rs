#![allow(dead_code)]

use relunet::fnn::{Fnn, Layer};
use relunet::matrix::Matrix;
use relunet::rng::{CounterRng, Stream};

/// Deterministic draws for test fixtures, one counter per call.
pub struct Draws {
    rng: CounterRng,
    counter: u64,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: CounterRng::new(seed),
            counter: 0,
        }
    }

    fn next(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    pub fn uniform(&mut self, half_width: f64) -> f64 {
        let c = self.next();
        self.rng.symmetric_at(Stream::Dataset, c, 0, half_width)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        let c = self.next();
        lo + self.rng.index_at(Stream::Dataset, c, 1, (hi - lo + 1) as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        let c = self.next();
        self.rng.unit_at(Stream::Dataset, c, 2) < p
    }

    pub fn vector(&mut self, len: usize, half_width: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(half_width)).collect()
    }

    /// Entries in `[-h, h]`, each zeroed with probability `zero_p`.
    pub fn sparse_matrix(&mut self, rows: usize, cols: usize, h: f64, zero_p: f64) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| {
                let v = self.uniform(h);
                if self.chance(zero_p) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    /// Random network `n0 -> out` with the given depth and hidden widths in
    /// `1..=6`.
    pub fn network(&mut self, n0: usize, out: usize, depth: usize) -> Fnn {
        let mut widths = vec![n0];
        for _ in 1..depth {
            widths.push(self.range(1, 6));
        }
        widths.push(out);
        let layers = widths
            .windows(2)
            .map(|w| {
                let weights = self.sparse_matrix(w[1], w[0], 1.0, 0.2);
                let bias = (0..w[1])
                    .map(|_| if self.chance(0.3) { 0.0 } else { self.uniform(1.0) })
                    .collect();
                Layer::new(weights, bias)
            })
            .collect();
        Fnn::new(layers).unwrap()
    }
}

/// `|a - b| <= tol * max(1, |b|)` entry-wise.
pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
}

pub fn nnz(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

/// Naive `Wx`, row by row.
pub fn naive_matvec(w: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..w.rows())
        .map(|i| (0..w.cols()).map(|j| w[(i, j)] * x[j]).sum())
        .collect()
}
