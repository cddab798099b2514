//! The approximating networks: squaring, scalar and dot products, real and
//! complex matrix-vector products, and exact affine representations.
//!
//! Every product network is built from one sawtooth squaring network of order
//! `s`, which interpolates `x^2` on the dyadic grid of spacing `2^-s` and
//! therefore has sup error `2^-2(s+1)` and slope error `2^-s` on `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    concatenate, identity_fnn, parallelize_disjoint, parallelize_shared, select_inputs, superpose,
};
use crate::error::{invalid, Result};
use crate::fnn::{Fnn, Layer};
use crate::matrix::Matrix;

const MAX_ORDER: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Square,
    ScalarProduct,
    DotProduct,
    Matvec,
    ComplexMatvec,
    AffineV1,
    AffineV2,
    AffineV3,
}

impl NetKind {
    pub const ALL: [NetKind; 8] = [
        NetKind::Square,
        NetKind::ScalarProduct,
        NetKind::DotProduct,
        NetKind::Matvec,
        NetKind::ComplexMatvec,
        NetKind::AffineV1,
        NetKind::AffineV2,
        NetKind::AffineV3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NetKind::Square => "square",
            NetKind::ScalarProduct => "scalar_product",
            NetKind::DotProduct => "dot_product",
            NetKind::Matvec => "matvec",
            NetKind::ComplexMatvec => "complex_matvec",
            NetKind::AffineV1 => "affine_v1",
            NetKind::AffineV2 => "affine_v2",
            NetKind::AffineV3 => "affine_v3",
        }
    }

    pub fn is_affine(self) -> bool {
        matches!(self, NetKind::AffineV1 | NetKind::AffineV2 | NetKind::AffineV3)
    }

    pub fn affine_variant(self) -> Option<u8> {
        match self {
            NetKind::AffineV1 => Some(1),
            NetKind::AffineV2 => Some(2),
            NetKind::AffineV3 => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        NetKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| invalid(format!("unknown network kind {s:?}")))
    }
}

/// Which norm the sawtooth order is tuned for.
///
/// `Lebesgue` picks the smallest order meeting the sup-norm target. `Sobolev`
/// also bounds the slope error of every squaring unit, so both the values and
/// the almost-everywhere derivatives of the network stay within `eps`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accuracy {
    #[default]
    Lebesgue,
    Sobolev,
}

/// Provenance stored alongside a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub kind: NetKind,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "D")]
    pub half_width: f64,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sawtooth_order: Option<usize>,
    #[serde(default)]
    pub accuracy: Accuracy,
    pub input_packing: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_depth_constant")]
    pub depth_constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_constants: Option<[f64; 2]>,
    /// Requested depth of an affine representation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// The represented matrix of an affine representation, row by row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_offsets: Option<Vec<usize>>,
}

fn default_depth_constant() -> f64 {
    2.0
}

impl ConstructionRecord {
    /// Input width implied by the record.
    pub fn input_dim(&self) -> usize {
        let (m, n) = (self.m, self.n);
        match self.kind {
            NetKind::Square => 1,
            NetKind::ScalarProduct => 2,
            NetKind::DotProduct => 2 * n,
            NetKind::Matvec => n * (m + 1),
            NetKind::ComplexMatvec => 2 * n * (m + 1),
            _ => n,
        }
    }

    /// Output width implied by the record.
    pub fn output_dim(&self) -> usize {
        match self.kind {
            NetKind::Square | NetKind::ScalarProduct | NetKind::DotProduct => 1,
            NetKind::ComplexMatvec => 2 * self.m,
            _ => self.m,
        }
    }

    pub fn affine_matrix(&self) -> Result<Matrix> {
        let rows = self
            .matrix
            .as_ref()
            .ok_or_else(|| invalid("affine record without a matrix"))?;
        Matrix::from_rows(rows)
    }

    /// Closed-form budget for this construction.
    pub fn budget(&self) -> Result<BoundBudget> {
        if self.kind.is_affine() {
            return affine_budget(&self.affine_matrix()?, self.kind.affine_variant().unwrap_or(1), self.depth);
        }
        let mut b = predicted_budget(
            self.kind,
            self.m,
            self.n,
            self.half_width,
            self.eps,
            self.depth_constant,
        )?;
        if self.accuracy == Accuracy::Sobolev {
            b.depth_bound = None;
            if let Some([c1, c2]) = self.sobolev_constants {
                b = b.with_sobolev_constants(c1, c2);
            }
        }
        Ok(b)
    }
}

/// A network together with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Construction {
    pub fnn: Fnn,
    pub record: ConstructionRecord,
}

/// Parameters of a product network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductParams {
    pub kind: NetKind,
    pub m: usize,
    pub n: usize,
    pub half_width: f64,
    pub eps: f64,
    pub accuracy: Accuracy,
}

impl ProductParams {
    pub fn new(kind: NetKind, m: usize, n: usize, half_width: f64, eps: f64) -> Self {
        Self {
            kind,
            m,
            n,
            half_width,
            eps,
            accuracy: Accuracy::Lebesgue,
        }
    }

    pub fn with_accuracy(mut self, accuracy: Accuracy) -> Self {
        self.accuracy = accuracy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_affine() {
            return Err(invalid("affine representations are built by affine_representation"));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(invalid(format!("eps must lie in (0, 1/2), got {}", self.eps)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(invalid(format!("D must be positive and finite, got {}", self.half_width)));
        }
        if self.m == 0 || self.n == 0 {
            return Err(invalid("m and n must be at least 1"));
        }
        Ok(())
    }

    /// Accuracy demanded of each scalar product unit.
    pub fn unit_tolerance(&self) -> f64 {
        match self.kind {
            NetKind::Square | NetKind::ScalarProduct => self.eps,
            NetKind::DotProduct | NetKind::Matvec => self.eps / self.n as f64,
            _ => self.eps / (4 * self.n) as f64,
        }
    }

    /// Smallest sawtooth order meeting the accuracy target.
    pub fn sawtooth_order(&self) -> Result<usize> {
        self.validate()?;
        let d = self.half_width;
        let tol = self.unit_tolerance();
        let (value_target, slope_target) = if self.kind == NetKind::Square {
            (tol, tol)
        } else {
            (tol / (6.0 * d * d), tol / (2.0 * d))
        };
        (0..=MAX_ORDER)
            .find(|&s| {
                let value_ok = 0.25f64.powi(s as i32 + 1) <= value_target;
                let slope_ok = 0.5f64.powi(s as i32) <= slope_target;
                value_ok && (self.accuracy == Accuracy::Lebesgue || slope_ok)
            })
            .ok_or_else(|| invalid(format!("sawtooth order would exceed {MAX_ORDER}")))
    }

    pub fn build(&self) -> Result<Construction> {
        self.build_with_order(self.sawtooth_order()?)
    }

    /// Builds the architecture with an explicit sawtooth order. The record
    /// still carries the requested `eps`, which makes it possible to produce
    /// deliberately under-resolved networks.
    pub fn build_with_order(&self, order: usize) -> Result<Construction> {
        self.validate()?;
        let (m, n, d) = (self.m, self.n, self.half_width);
        let fnn = match self.kind {
            NetKind::Square => square_net_with_order(order),
            NetKind::ScalarProduct => scalar_product_core(d, order)?,
            NetKind::DotProduct => dot_product_core(n, d, order)?,
            NetKind::Matvec => matvec_core(m, n, d, order, 0, n * m, n * (m + 1))?,
            _ => complex_core(m, n, d, order)?,
        };
        let (rm, rn) = match self.kind {
            NetKind::Square | NetKind::ScalarProduct => (1, 1),
            NetKind::DotProduct => (1, n),
            _ => (m, n),
        };
        let record = ConstructionRecord {
            kind: self.kind,
            m: rm,
            n: rn,
            half_width: if self.kind == NetKind::Square { 1.0 } else { d },
            eps: self.eps,
            sawtooth_order: Some(order),
            accuracy: self.accuracy,
            input_packing: packing_description(self.kind).to_string(),
            seed: None,
            depth_constant: default_depth_constant(),
            sobolev_constants: None,
            depth: None,
            matrix: None,
            input_offsets: None,
        };
        Ok(Construction { fnn, record })
    }
}

fn packing_description(kind: NetKind) -> &'static str {
    match kind {
        NetKind::Square => "x",
        NetKind::ScalarProduct => "w,x",
        NetKind::DotProduct => "w[0..n],x[0..n]",
        NetKind::Matvec => "vec(W) column-major,x",
        NetKind::ComplexMatvec => "vec(W1) column-major,vec(W2) column-major,x1,x2",
        _ => "x",
    }
}

/// Squaring network on `[0, 1]` with sup error at most `eps`.
pub fn square_net(eps: f64) -> Result<Fnn> {
    Ok(ProductParams::new(NetKind::Square, 1, 1, 1.0, eps).build()?.fnn)
}

/// Width-4 network computing `f_s(x) = x - sum_{k=1..s} g_k(x) / 4^k`, where
/// `g_k` is the `k`-fold composition of the hat `g(x) = 2ρ(x) - 4ρ(x-1/2) + 2ρ(x-1)`.
///
/// Channels 1 to 3 carry `ρ(y), ρ(y - 1/2), ρ(y - 1)` for the current hat
/// iterate `y`; channel 4 carries the running partial sum, which is
/// nonnegative on `[0, 1]`. Depth is `s + 1`; order 0 is the identity.
pub fn square_net_with_order(order: usize) -> Fnn {
    if order == 0 {
        return Fnn::new(vec![Layer::new(Matrix::identity(1), vec![0.0])]).expect("valid identity");
    }
    let hat_bias = vec![0.0, -0.5, -1.0, 0.0];
    let mut layers = vec![Layer::new(
        Matrix::from_row_major(4, 1, vec![1.0; 4]).expect("shape"),
        hat_bias.clone(),
    )];
    let tail = |k: usize| {
        let q = 0.25f64.powi(k as i32);
        [-2.0 * q, 4.0 * q, -2.0 * q, 1.0]
    };
    for k in 1..order {
        let mut rows = vec![vec![2.0, -4.0, 2.0, 0.0]; 3];
        rows.push(tail(k).to_vec());
        layers.push(Layer::from_rows(&rows, hat_bias.clone()).expect("shape"));
    }
    layers.push(Layer::from_rows(&[tail(order).to_vec()], vec![0.0]).expect("shape"));
    Fnn::new(layers).expect("valid square network")
}

/// `(w, x) -> ≈ wx` on `[-D, D]^2` with sup error at most `eps`.
pub fn scalar_product_net(half_width: f64, eps: f64) -> Result<Fnn> {
    Ok(ProductParams::new(NetKind::ScalarProduct, 1, 1, half_width, eps).build()?.fnn)
}

/// `(w, x) -> ≈ w·x` for `w, x` in `[-D, D]^n`.
pub fn dot_product_net(n: usize, half_width: f64, eps: f64) -> Result<Fnn> {
    Ok(ProductParams::new(NetKind::DotProduct, 1, n, half_width, eps).build()?.fnn)
}

/// `[vec(W); x] -> ≈ Wx` for an `m x n` matrix `W`.
pub fn matvec_net(m: usize, n: usize, half_width: f64, eps: f64) -> Result<Fnn> {
    Ok(ProductParams::new(NetKind::Matvec, m, n, half_width, eps).build()?.fnn)
}

/// `[vec(W1); vec(W2); x1; x2] -> ≈ [W1 x1 - W2 x2; W1 x2 + W2 x1]`.
pub fn complex_matvec_net(m: usize, n: usize, half_width: f64, eps: f64) -> Result<Fnn> {
    Ok(ProductParams::new(NetKind::ComplexMatvec, m, n, half_width, eps).build()?.fnn)
}

/// Polarization: `wx = 2D^2 (u^2 - v^2 - z^2)` with `u = |w+x|/2D`,
/// `v = |w|/2D`, `z = |x|/2D`, each square replaced by the sawtooth network.
fn scalar_product_core(d: f64, order: usize) -> Result<Fnn> {
    let gamma = 1.0 / (2.0 * d);
    let abs_in = Layer::from_rows(
        &[
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ],
        vec![0.0; 6],
    )?;
    let mut scale = Matrix::zeros(3, 6);
    for blk in 0..3 {
        scale[(blk, 2 * blk)] = gamma;
        scale[(blk, 2 * blk + 1)] = gamma;
    }
    let abs_net = Fnn::new(vec![abs_in, Layer::new(scale, vec![0.0; 3])])?;
    let sq = square_net_with_order(order);
    let (squares, _) = parallelize_disjoint(&[sq.clone(), sq.clone(), sq], &[1.0; 3])?;
    let c = 2.0 * d * d;
    let out = Fnn::new(vec![Layer::from_rows(&[vec![c, -c, -c]], vec![0.0])?])?;
    let mut net = concatenate(&out, &concatenate(&squares, &abs_net)?)?;
    // Interleave the three squaring units channel by channel. Every output
    // term of the `|w+x|` unit is then immediately followed by its partner
    // from the `|w|` unit and the `|x|` unit, so when either factor is zero
    // the matching terms cancel exactly and the output is exactly zero.
    if order >= 1 {
        let perm: Vec<usize> = (0..4)
            .flat_map(|ch| (0..3).map(move |blk| blk * 4 + ch))
            .collect();
        for k in 2..=order + 1 {
            net = net.permute_neurons(k, &perm)?;
        }
    }
    Ok(net)
}

fn dot_product_core(n: usize, d: f64, order: usize) -> Result<Fnn> {
    let unit = scalar_product_core(d, order)?;
    let terms = (0..n)
        .map(|i| select_inputs(&unit, &[i, n + i], 2 * n))
        .collect::<Result<Vec<_>>>()?;
    superpose(&terms, &vec![1.0; n], true)
}

/// Matrix-vector network reading `vec(W)` at `w_offset` and `x` at
/// `x_offset` of a `full`-wide input.
fn matvec_core(
    m: usize,
    n: usize,
    d: f64,
    order: usize,
    w_offset: usize,
    x_offset: usize,
    full: usize,
) -> Result<Fnn> {
    let dot = dot_product_core(n, d, order)?;
    let rows = (0..m)
        .map(|i| {
            let idx: Vec<usize> = (0..n)
                .map(|j| w_offset + j * m + i)
                .chain((0..n).map(|j| x_offset + j))
                .collect();
            select_inputs(&dot, &idx, full)
        })
        .collect::<Result<Vec<_>>>()?;
    parallelize_shared(&rows)
}

fn complex_core(m: usize, n: usize, d: f64, order: usize) -> Result<Fnn> {
    let nm = n * m;
    let full = 2 * n * (m + 1);
    let (w1, w2, x1, x2) = (0, nm, 2 * nm, 2 * nm + n);
    let a = matvec_core(m, n, d, order, w1, x1, full)?;
    let b = matvec_core(m, n, d, order, w2, x2, full)?;
    let c = matvec_core(m, n, d, order, w1, x2, full)?;
    let e = matvec_core(m, n, d, order, w2, x1, full)?;
    let real = superpose(&[a, b], &[1.0, -1.0], true)?;
    let imag = superpose(&[c, e], &[1.0, 1.0], true)?;
    parallelize_shared(&[real, imag])
}

/// Exact ReLU network computing `x -> Wx`.
///
/// * variant 1: `[[W; -W], 0], [[I, -I], 0]`, depth 2, `M = 2|W|_0 + 2m`;
/// * variant 2: identity network on the input first, depth `K`,
///   `M = 2m + 2(K-2)n + 4|W|_0`;
/// * variant 3: identity network on the output last, depth `K`,
///   `M = 2Km + 2|W|_0`.
///
/// Variants 2 and 3 need `K >= 3`; variant 1 accepts no depth or `K = 2`.
pub fn affine_representation(w: &Matrix, variant: u8, depth: Option<usize>) -> Result<Fnn> {
    let (m, n) = (w.rows(), w.cols());
    if m == 0 || n == 0 {
        return Err(invalid("matrix must be nonempty"));
    }
    if w.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix entries must be finite"));
    }
    let id = Matrix::identity(m);
    let v1 = Fnn::new(vec![
        Layer::new(Matrix::vstack(&[w, &w.scale(-1.0)])?, vec![0.0; 2 * m]),
        Layer::new(Matrix::hstack(&[&id, &id.scale(-1.0)])?, vec![0.0; m]),
    ])?;
    match (variant, depth) {
        (1, None | Some(2)) => Ok(v1),
        (1, Some(k)) => Err(invalid(format!("variant 1 has depth 2, got K={k}"))),
        (2 | 3, Some(k)) if k >= 3 => {
            if variant == 2 {
                concatenate(&v1, &identity_fnn(n, k - 1)?)
            } else {
                concatenate(&identity_fnn(m, k - 1)?, &v1)
            }
        }
        (2 | 3, k) => Err(invalid(format!("variants 2 and 3 need K >= 3, got {k:?}"))),
        (v, _) => Err(invalid(format!("unknown affine variant {v}"))),
    }
}

/// Affine representation bundled with its record.
pub fn affine_construction(w: &Matrix, variant: u8, depth: Option<usize>) -> Result<Construction> {
    let fnn = affine_representation(w, variant, depth)?;
    let kind = match variant {
        1 => NetKind::AffineV1,
        2 => NetKind::AffineV2,
        _ => NetKind::AffineV3,
    };
    let record = ConstructionRecord {
        kind,
        m: w.rows(),
        n: w.cols(),
        half_width: 1.0,
        eps: 0.0,
        sawtooth_order: None,
        accuracy: Accuracy::Lebesgue,
        input_packing: packing_description(kind).to_string(),
        seed: None,
        depth_constant: default_depth_constant(),
        sobolev_constants: None,
        depth: Some(fnn.depth()),
        matrix: Some(w.iter_rows().map(<[f64]>::to_vec).collect()),
        input_offsets: None,
    };
    Ok(Construction { fnn, record })
}

/// Closed-form upper bounds on the size of a construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundBudget {
    pub target_eps: f64,
    pub depth_bound: Option<f64>,
    pub width_bound: f64,
    pub weight_bound: f64,
    pub connectivity_bound: Option<f64>,
    pub neuron_bound: Option<f64>,
    pub depth_constant: f64,
}

impl BoundBudget {
    /// Depth bound rounded up to the next integer, the form in which depth
    /// budgets are usually quoted.
    pub fn reported_depth_bound(&self) -> Option<usize> {
        self.depth_bound.map(|b| b.ceil().max(0.0) as usize)
    }

    /// Replaces the depth, connectivity and neuron bounds by
    /// `c1 log2(1/eps) + c2`.
    pub fn with_sobolev_constants(mut self, c1: f64, c2: f64) -> Self {
        let b = c1 * (1.0 / self.target_eps).log2() + c2;
        self.depth_bound = Some(b);
        self.connectivity_bound = Some(b);
        self.neuron_bound = Some(b);
        self
    }
}

/// Budget of a product network with depth constant `c`:
///
/// | kind | depth | width | weight |
/// |---|---|---|---|
/// | square | `c log2(1/ε)` | 4 | 4 |
/// | scalar product | `c log2(D²/ε)` | 12 | `max(4, 2D²)` |
/// | dot product | `c log2(nD²/ε)` | `12n` | `max(4, 2D²)` |
/// | matvec | `c log2(nD²/ε)` | `12mn` | `max(4, 2D²)` |
/// | complex matvec | `c log2(4nD²/ε)` | `48mn` | `max(4, 2D²)` |
pub fn predicted_budget(
    kind: NetKind,
    m: usize,
    n: usize,
    half_width: f64,
    eps: f64,
    c: f64,
) -> Result<BoundBudget> {
    if kind.is_affine() {
        return Err(invalid("affine budgets depend on the matrix; use affine_budget"));
    }
    if !(c > 0.0) {
        return Err(invalid(format!("depth constant must be positive, got {c}")));
    }
    ProductParams::new(kind, m, n, half_width, eps).validate()?;
    let (mf, nf, d2) = (m as f64, n as f64, half_width * half_width);
    let (arg, width) = match kind {
        NetKind::Square => (1.0 / eps, 4.0),
        NetKind::ScalarProduct => (d2 / eps, 12.0),
        NetKind::DotProduct => (nf * d2 / eps, 12.0 * nf),
        NetKind::Matvec => (nf * d2 / eps, 12.0 * mf * nf),
        _ => (4.0 * nf * d2 / eps, 48.0 * mf * nf),
    };
    let weight = if kind == NetKind::Square {
        4.0
    } else {
        f64::max(4.0, 2.0 * d2)
    };
    Ok(BoundBudget {
        target_eps: eps,
        depth_bound: Some(c * arg.log2()),
        width_bound: width,
        weight_bound: weight,
        connectivity_bound: None,
        neuron_bound: None,
        depth_constant: c,
    })
}

/// Exact size of an affine representation.
pub fn affine_budget(w: &Matrix, variant: u8, depth: Option<usize>) -> Result<BoundBudget> {
    let (m, n, nnz) = (w.rows() as f64, w.cols() as f64, w.count_nonzero() as f64);
    let k = match (variant, depth) {
        (1, _) => 2.0,
        (2 | 3, Some(k)) if k >= 3 => k as f64,
        _ => return Err(invalid("affine budget needs variant 1, or variant 2/3 with K >= 3")),
    };
    let (conn, neurons, width) = match variant {
        1 => (2.0 * nnz + 2.0 * m, n + 3.0 * m, n.max(2.0 * m)),
        2 => (
            2.0 * m + 2.0 * (k - 2.0) * n + 4.0 * nnz,
            n + 2.0 * n * (k - 2.0) + 3.0 * m,
            (2.0 * n).max(2.0 * m),
        ),
        _ => (
            2.0 * k * m + 2.0 * nnz,
            n + 2.0 * m * (k - 1.0) + m,
            n.max(2.0 * m),
        ),
    };
    Ok(BoundBudget {
        target_eps: 0.0,
        depth_bound: Some(k),
        width_bound: width,
        weight_bound: w.max_abs().max(1.0),
        connectivity_bound: Some(conn),
        neuron_bound: Some(neurons),
        depth_constant: 1.0,
    })
}
