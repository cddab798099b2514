//! ReLU feedforward networks as sequences of `(weights, bias)` layers.
//!
//! A network `[[W_1, b_1], ..., [W_K, b_K]]` maps `x_0 = x` through
//! `x_k = relu(W_k x_{k-1} + b_k)` for `k < K` and returns the affine
//! `x_K = W_K x_{K-1} + b_K`.
//!
//! Storage is dense. Each layer also keeps an index of its nonzero weights,
//! and every matrix-vector product walks that index row by row in increasing
//! column order, then adds the bias. Skipping exact zeros never changes a
//! finite sum, so the results are the dense row-major results, and they are
//! bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{check_permutation, Matrix};

#[inline]
pub fn relu(a: f64) -> f64 {
    if a > 0.0 {
        a
    } else {
        0.0
    }
}

/// One affine map `x -> W x + b`.
#[derive(Clone, Debug)]
pub struct Layer {
    weights: Matrix,
    bias: Vec<f64>,
    // CSR view of the nonzero weights.
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl PartialEq for Layer {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights && self.bias == other.bias
    }
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Self {
        let mut row_start = Vec::with_capacity(weights.rows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..weights.rows() {
            for (j, &w) in weights.row(i).iter().enumerate() {
                if w != 0.0 {
                    cols.push(j as u32);
                    vals.push(w);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            weights,
            bias,
            row_start,
            cols,
            vals,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Matrix::from_rows(rows)?, bias))
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn into_parts(self) -> (Matrix, Vec<f64>) {
        (self.weights, self.bias)
    }

    fn nonzero_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_start[i], self.row_start[i + 1]);
        self.cols[s..e]
            .iter()
            .zip(&self.vals[s..e])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// Pre-activations `W x + b` written into `out`.
    #[inline]
    fn affine_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (i, &b) in self.bias.iter().enumerate() {
            let (s, e) = (self.row_start[i], self.row_start[i + 1]);
            let mut acc = 0.0;
            for (&j, &w) in self.cols[s..e].iter().zip(&self.vals[s..e]) {
                acc += w * x[j as usize];
            }
            out.push(acc + b);
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.weights.rows() != self.bias.len() {
            return Err(Error::DimensionMismatch {
                at: k,
                expected: self.weights.rows(),
                found: self.bias.len(),
            });
        }
        if self
            .weights
            .as_slice()
            .iter()
            .chain(&self.bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteEntry { layer: k });
        }
        Ok(())
    }
}

/// Checks the layer and chain invariants, reporting the first violating layer
/// (1-based).
pub fn validate_layers(layers: &[Layer]) -> Result<()> {
    if layers.is_empty() {
        return Err(invalid("a network needs at least one layer"));
    }
    for (idx, layer) in layers.iter().enumerate() {
        let k = idx + 1;
        if idx > 0 {
            let prev = layers[idx - 1].out_dim();
            if layer.in_dim() != prev {
                return Err(Error::DimensionMismatch {
                    at: k,
                    expected: prev,
                    found: layer.in_dim(),
                });
            }
        }
        layer.check(k)?;
    }
    Ok(())
}

/// The size measures of a network: depth `L`, connectivity `M`, neuron count
/// `N` (input layer included), maximum width `W` and maximum weight
/// magnitude `B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub depth: usize,
    pub connectivity: usize,
    pub neurons: usize,
    pub max_width: usize,
    pub max_weight: f64,
}

/// Reusable buffers for allocation-free evaluation.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

/// An immutable, validated ReLU network.
#[derive(Clone, Debug, PartialEq)]
pub struct Fnn {
    layers: Vec<Layer>,
}

impl Fnn {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        validate_layers(&layers)?;
        Ok(Self { layers })
    }

    /// Re-checks every invariant; always `Ok` for a network built through
    /// [`Fnn::new`].
    pub fn validate(&self) -> Result<()> {
        validate_layers(&self.layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// `[N_0, N_1, ..., N_K]`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = Scratch::default();
        Ok(self.evaluate_with(x, &mut scratch)?.to_vec())
    }

    /// Evaluates into `scratch` and returns the output slice.
    pub fn evaluate_with<'s>(&self, x: &[f64], scratch: &'s mut Scratch) -> Result<&'s [f64]> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let Scratch { a, b } = scratch;
        self.layers[0].affine_into(x, a);
        if last > 0 {
            a.iter_mut().for_each(|v| *v = relu(*v));
        }
        for (k, layer) in self.layers.iter().enumerate().skip(1) {
            layer.affine_into(a, b);
            if k < last {
                b.iter_mut().for_each(|v| *v = relu(*v));
            }
            std::mem::swap(a, b);
        }
        Ok(&scratch.a[..])
    }

    /// Output together with the smallest `|pre-activation|` over all hidden
    /// neurons, i.e. the distance in pre-activation space to the nearest kink.
    pub fn evaluate_with_margin(&self, x: &[f64], scratch: &mut Scratch) -> Result<(Vec<f64>, f64)> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut margin = f64::INFINITY;
        let Scratch { a, b } = scratch;
        a.clear();
        a.extend_from_slice(x);
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine_into(a, b);
            if k < last {
                for v in b.iter_mut() {
                    margin = margin.min(v.abs());
                    *v = relu(*v);
                }
            }
            std::mem::swap(a, b);
        }
        Ok((a.clone(), margin))
    }

    /// Evaluates each input in order. The error index is the 0-based position
    /// of the first input with the wrong length.
    pub fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut scratch = Scratch::default();
        xs.iter()
            .enumerate()
            .map(|(i, x)| {
                if x.len() != self.input_dim() {
                    return Err(Error::DimensionMismatch {
                        at: i,
                        expected: self.input_dim(),
                        found: x.len(),
                    });
                }
                Ok(self.evaluate_with(x, &mut scratch)?.to_vec())
            })
            .collect()
    }

    /// Almost-everywhere Jacobian `W_K D_{K-1} W_{K-1} ... D_1 W_1` at `x`,
    /// where `D_k` masks neurons with strictly positive pre-activation. A
    /// pre-activation of exactly zero counts as inactive.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        self.check_input(x)?;
        let n0 = self.input_dim();
        let last = self.layers.len() - 1;
        let mut act = x.to_vec();
        let mut pre = Vec::new();
        // Row-major N_k x N_0, starting from the identity.
        let mut jac = Matrix::identity(n0);
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine_into(&act, &mut pre);
            let mut next = Matrix::zeros(layer.out_dim(), n0);
            for i in 0..layer.out_dim() {
                if k < last && pre[i] <= 0.0 {
                    continue;
                }
                let row = next.row_mut(i);
                for (j, w) in layer.nonzero_row(i) {
                    for (r, &v) in row.iter_mut().zip(jac.row(j)) {
                        *r += w * v;
                    }
                }
            }
            jac = next;
            if k < last {
                act = pre.iter().map(|&v| relu(v)).collect();
            }
        }
        Ok(jac)
    }

    pub fn metrics(&self) -> NetworkMetrics {
        let widths = self.widths();
        NetworkMetrics {
            depth: self.depth(),
            connectivity: self
                .layers
                .iter()
                .map(|l| l.weights.count_nonzero() + l.bias.iter().filter(|b| **b != 0.0).count())
                .sum(),
            neurons: widths.iter().sum(),
            max_width: widths.iter().copied().max().unwrap_or(0),
            max_weight: self.layers.iter().fold(0.0, |m, l| {
                m.max(l.weights.max_abs())
                    .max(l.bias.iter().fold(0.0, |a, b| a.max(b.abs())))
            }),
        }
    }

    /// Reorders the neurons of hidden layer `k` (1-based, `1 <= k < K`):
    /// new neuron `i` is old neuron `perm[i]`. The function is unchanged.
    pub fn permute_neurons(&self, k: usize, perm: &[usize]) -> Result<Fnn> {
        if k == 0 || k >= self.depth() {
            return Err(invalid(format!(
                "hidden layer index {k} out of range 1..{}",
                self.depth()
            )));
        }
        check_permutation(perm, self.layers[k - 1].out_dim())?;
        let mut layers = self.layers.clone();
        let src = &self.layers[k - 1];
        let bias = perm.iter().map(|&p| src.bias[p]).collect();
        layers[k - 1] = Layer::new(src.weights.permute_rows(perm)?, bias);
        let next = &self.layers[k];
        layers[k] = Layer::new(next.weights.permute_cols(perm)?, next.bias.clone());
        Fnn::new(layers)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                at: 0,
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}
