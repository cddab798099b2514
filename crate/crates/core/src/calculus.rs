//! Exact combinators on networks: identity, concatenation, depth matching,
//! parallelization and superposition, plus input selection.

use crate::error::{invalid, Error, Result};
use crate::fnn::{Fnn, Layer};
use crate::matrix::Matrix;

/// Depth-`k` network computing `x -> x` on `R^d`.
///
/// For `k = 1` this is `[[I, 0]]`. Otherwise the first layer splits `x` into
/// `(x, -x)`, `k - 2` identity layers carry both halves, and the last layer
/// returns `relu(x) - relu(-x)`. One of the two terms is always zero, so the
/// result is bit-exact.
pub fn identity_fnn(d: usize, k: usize) -> Result<Fnn> {
    if d == 0 || k == 0 {
        return Err(invalid(format!("identity_fnn needs d >= 1 and K >= 1, got d={d}, K={k}")));
    }
    let id = Matrix::identity(d);
    if k == 1 {
        return Fnn::new(vec![Layer::new(id, vec![0.0; d])]);
    }
    let neg = id.scale(-1.0);
    let mut layers = Vec::with_capacity(k);
    layers.push(Layer::new(Matrix::vstack(&[&id, &neg])?, vec![0.0; 2 * d]));
    for _ in 0..k - 2 {
        layers.push(Layer::new(Matrix::identity(2 * d), vec![0.0; 2 * d]));
    }
    layers.push(Layer::new(Matrix::hstack(&[&id, &neg])?, vec![0.0; d]));
    Fnn::new(layers)
}

/// `f1 • f2`, computing `f1(f2(x))` with depth `L(f1) + L(f2) - 1`.
///
/// The last layer of `f2` and the first layer of `f1` merge into
/// `[W_1 W_K', W_1 b_K' + b_1]`.
pub fn concatenate(f1: &Fnn, f2: &Fnn) -> Result<Fnn> {
    if f1.input_dim() != f2.output_dim() {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected: f2.output_dim(),
            found: f1.input_dim(),
        });
    }
    let inner = &f2.layers()[f2.depth() - 1];
    let outer = &f1.layers()[0];
    let weights = outer.weights().matmul(inner.weights())?;
    let bias = outer
        .weights()
        .matvec(inner.bias())?
        .iter()
        .zip(outer.bias())
        .map(|(a, b)| a + b)
        .collect();
    let mut layers = Vec::with_capacity(f1.depth() + f2.depth() - 1);
    layers.extend_from_slice(&f2.layers()[..f2.depth() - 1]);
    layers.push(Layer::new(weights, bias));
    layers.extend_from_slice(&f1.layers()[1..]);
    Fnn::new(layers)
}

/// Extends `f` to depth exactly `k` by appending an identity network to its
/// output.
pub fn match_depth(f: &Fnn, k: usize) -> Result<Fnn> {
    let l = f.depth();
    if k < l {
        return Err(invalid(format!("cannot reduce depth {l} to {k}")));
    }
    if k == l {
        return Ok(f.clone());
    }
    concatenate(&identity_fnn(f.output_dim(), k - l + 1)?, f)
}

/// Stacks networks that read the same input: `x -> (f_1(x), ..., f_n(x))`.
///
/// The first layers are stacked vertically and all later layers are
/// block-diagonal, so `M = sum M_i` and `N = sum N_i - (n - 1) N_0`.
pub fn parallelize_shared(fnns: &[Fnn]) -> Result<Fnn> {
    let first = fnns
        .first()
        .ok_or_else(|| invalid("parallelize_shared needs at least one network"))?;
    let (n0, k) = (first.input_dim(), first.depth());
    for (i, f) in fnns.iter().enumerate() {
        if f.input_dim() != n0 {
            return Err(Error::DimensionMismatch {
                at: i,
                expected: n0,
                found: f.input_dim(),
            });
        }
        if f.depth() != k {
            return Err(Error::DepthMismatch {
                index: i,
                expected: k,
                found: f.depth(),
            });
        }
    }
    let mut layers = Vec::with_capacity(k);
    for l in 0..k {
        let ws: Vec<&Matrix> = fnns.iter().map(|f| f.layers()[l].weights()).collect();
        let weights = if l == 0 {
            Matrix::vstack(&ws)?
        } else {
            Matrix::block_diag(&ws)
        };
        layers.push(Layer::new(weights, stacked_bias(fnns, l, None)));
    }
    Fnn::new(layers)
}

/// Runs each network on its own input block and scales its output:
/// `(x_1, ..., x_n) -> (a_1 f_1(x_1), ..., a_n f_n(x_n))`.
///
/// All networks are first brought to the largest depth with [`match_depth`].
/// Returns the network and the offset of each input block.
pub fn parallelize_disjoint(fnns: &[Fnn], coefficients: &[f64]) -> Result<(Fnn, Vec<usize>)> {
    if fnns.is_empty() {
        return Err(invalid("parallelize_disjoint needs at least one network"));
    }
    check_coefficients(fnns.len(), coefficients)?;
    let k = fnns.iter().map(Fnn::depth).max().unwrap_or(1);
    let matched = fnns
        .iter()
        .map(|f| match_depth(f, k))
        .collect::<Result<Vec<_>>>()?;
    let mut layers = Vec::with_capacity(k);
    for l in 0..k {
        let scale = (l + 1 == k).then_some(coefficients);
        let ws: Vec<Matrix> = matched
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let w = f.layers()[l].weights();
                match scale {
                    Some(a) if a[i] != 1.0 => w.scale(a[i]),
                    _ => w.clone(),
                }
            })
            .collect();
        let refs: Vec<&Matrix> = ws.iter().collect();
        layers.push(Layer::new(
            Matrix::block_diag(&refs),
            stacked_bias(&matched, l, scale),
        ));
    }
    let mut offsets = Vec::with_capacity(fnns.len());
    let mut acc = 0;
    for f in fnns {
        offsets.push(acc);
        acc += f.input_dim();
    }
    Ok((Fnn::new(layers)?, offsets))
}

/// `sum_i a_i f_i`, either on a shared input or on disjoint input blocks.
///
/// The summing map `[a_1 I, ..., a_n I]` is merged into the last layer of the
/// parallelization, so the depth is `max_i L(f_i)`.
pub fn superpose(fnns: &[Fnn], coefficients: &[f64], shared_input: bool) -> Result<Fnn> {
    let first = fnns
        .first()
        .ok_or_else(|| invalid("superpose needs at least one network"))?;
    check_coefficients(fnns.len(), coefficients)?;
    let d = first.output_dim();
    if let Some((i, f)) = fnns.iter().enumerate().find(|(_, f)| f.output_dim() != d) {
        return Err(Error::DimensionMismatch {
            at: i,
            expected: d,
            found: f.output_dim(),
        });
    }
    let parallel = if shared_input {
        let k = fnns.iter().map(Fnn::depth).max().unwrap_or(1);
        let matched = fnns
            .iter()
            .map(|f| match_depth(f, k))
            .collect::<Result<Vec<_>>>()?;
        parallelize_shared(&matched)?
    } else {
        parallelize_disjoint(fnns, &vec![1.0; fnns.len()])?.0
    };
    let mut sum = Matrix::zeros(d, d * fnns.len());
    for (i, &a) in coefficients.iter().enumerate() {
        for j in 0..d {
            sum[(j, i * d + j)] = a;
        }
    }
    concatenate(&Fnn::new(vec![Layer::new(sum, vec![0.0; d])])?, &parallel)
}

/// Replaces the first weight matrix `W_1` of `f` by `W_1 π`, so the result
/// reads the full input and applies `f` to the selected coordinates.
pub fn compose_selection(f: &Fnn, selector: &Matrix) -> Result<Fnn> {
    if selector.rows() != f.input_dim() {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected: f.input_dim(),
            found: selector.rows(),
        });
    }
    for (row, r) in selector.iter_rows().enumerate() {
        let ones = r.iter().filter(|v| **v == 1.0).count();
        let zeros = r.iter().filter(|v| **v == 0.0).count();
        if ones != 1 || ones + zeros != r.len() {
            return Err(Error::InvalidSelector { row });
        }
    }
    let mut layers = f.layers().to_vec();
    let first = &layers[0];
    layers[0] = Layer::new(first.weights().matmul(selector)?, first.bias().to_vec());
    Fnn::new(layers)
}

/// The 0/1 matrix whose row `r` picks coordinate `indices[r]` out of `full`.
pub fn selection_matrix(indices: &[usize], full: usize) -> Result<Matrix> {
    let mut pi = Matrix::zeros(indices.len(), full);
    for (r, &c) in indices.iter().enumerate() {
        if c >= full {
            return Err(Error::InvalidSelector { row: r });
        }
        pi[(r, c)] = 1.0;
    }
    Ok(pi)
}

/// [`compose_selection`] with the selector given as an index list.
pub fn select_inputs(f: &Fnn, indices: &[usize], full: usize) -> Result<Fnn> {
    compose_selection(f, &selection_matrix(indices, full)?)
}

fn stacked_bias(fnns: &[Fnn], l: usize, scale: Option<&[f64]>) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, f) in fnns.iter().enumerate() {
        let b = f.layers()[l].bias();
        match scale {
            Some(a) => out.extend(b.iter().map(|&v| if v == 0.0 { 0.0 } else { a[i] * v })),
            None => out.extend_from_slice(b),
        }
    }
    out
}

fn check_coefficients(n: usize, coefficients: &[f64]) -> Result<()> {
    if coefficients.len() != n {
        return Err(Error::DimensionMismatch {
            at: 0,
            expected: n,
            found: coefficients.len(),
        });
    }
    if coefficients.iter().any(|a| !a.is_finite()) {
        return Err(invalid("coefficients must be finite"));
    }
    Ok(())
}
