mod common;

use common::{close, nnz, Draws};
use proptest::prelude::*;
use relunet::calculus::{
    concatenate, identity_fnn, match_depth, parallelize_disjoint, parallelize_shared, superpose,
};
use relunet::constructors::affine_representation;
use relunet::fnn::{Fnn, Layer};
use relunet::matrix::Matrix;

fn net(seed: u64, n0: usize, out: usize, depth: usize) -> Fnn {
    Draws::new(seed).network(n0, out, depth)
}

fn zero_bias(f: &Fnn) -> Fnn {
    let layers = f
        .layers()
        .iter()
        .map(|l| Layer::new(l.weights().clone(), vec![0.0; l.out_dim()]))
        .collect();
    Fnn::new(layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_is_exact(d in 1usize..6, k in 1usize..7, xs in prop::collection::vec(-10.0f64..10.0, 6)) {
        let f = identity_fnn(d, k).unwrap();
        prop_assert_eq!(f.evaluate(&xs[..d]).unwrap(), xs[..d].to_vec());
        prop_assert!(f.layers().iter().all(|l| l.weights().as_slice().iter().all(|w| [-1.0, 0.0, 1.0].contains(w))));
    }

    #[test]
    fn identity_laws(seed in any::<u64>(), n0 in 1usize..4, out in 1usize..4, k in 1usize..4, extra in 0usize..3) {
        let f = net(seed, n0, out, k);
        let x = Draws::new(seed ^ 1).vector(n0, 100.0);
        let y = f.evaluate(&x).unwrap();
        let left = concatenate(&identity_fnn(out, 2).unwrap(), &f).unwrap();
        let right = concatenate(&f, &identity_fnn(n0, 3).unwrap()).unwrap();
        prop_assert!(close(&left.evaluate(&x).unwrap(), &y, 1e-9));
        prop_assert!(close(&right.evaluate(&x).unwrap(), &y, 1e-9));
        let md = match_depth(&f, k + extra).unwrap();
        prop_assert_eq!(md.depth(), k + extra);
        prop_assert!(close(&md.evaluate(&x).unwrap(), &y, 1e-9));
    }

    #[test]
    fn match_depth_connectivity(seed in any::<u64>(), n0 in 1usize..4, out in 1usize..4, k in 1usize..4, extra in 1usize..4) {
        let f = net(seed, n0, out, k);
        let last = &f.layers()[k - 1];
        let md = match_depth(&f, k + extra).unwrap();
        let expected = f.metrics().connectivity
            + nnz(last.weights().as_slice())
            + nnz(last.bias())
            + 2 * out * extra;
        prop_assert_eq!(md.metrics().connectivity, expected);
    }

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), n0 in 1usize..4, k in 1usize..5, alpha in 0.0f64..20.0) {
        let f = zero_bias(&net(seed, n0, 2, k));
        let x = Draws::new(seed ^ 2).vector(n0, 10.0);
        let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let y: Vec<f64> = f.evaluate(&x).unwrap().iter().map(|v| alpha * v).collect();
        prop_assert!(close(&f.evaluate(&ax).unwrap(), &y, 1e-9));
    }

    #[test]
    fn neuron_permutation_invariance(seed in any::<u64>(), n0 in 1usize..4, k in 2usize..5) {
        let f = net(seed, n0, 2, k);
        let layer = 1 + (seed as usize) % (k - 1);
        let width = f.layers()[layer - 1].out_dim();
        let perm: Vec<usize> = (0..width).rev().collect();
        let g = f.permute_neurons(layer, &perm).unwrap();
        prop_assert_eq!(g.metrics(), f.metrics());
        let x = Draws::new(seed ^ 3).vector(n0, 100.0);
        prop_assert!(close(&g.evaluate(&x).unwrap(), &f.evaluate(&x).unwrap(), 1e-12));
    }

    #[test]
    fn batch_matches_single(seed in any::<u64>(), n0 in 1usize..4, k in 1usize..4) {
        let f = net(seed, n0, 3, k);
        let mut d = Draws::new(seed ^ 4);
        let xs: Vec<Vec<f64>> = (0..20).map(|_| d.vector(n0, 5.0)).collect();
        let batch = f.evaluate_batch(&xs).unwrap();
        for (x, y) in xs.iter().zip(&batch) {
            prop_assert_eq!(&f.evaluate(x).unwrap(), y);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(seed in any::<u64>(), n0 in 1usize..4) {
        let f = net(seed, n0, 2, 3);
        let x = Draws::new(seed ^ 5).vector(n0, 3.0);
        let mut scratch = Default::default();
        let (_, margin) = f.evaluate_with_margin(&x, &mut scratch).unwrap();
        // Central differences are exact on a linear piece; skip points whose
        // stencil may cross a kink.
        prop_assume!(margin > 1e-4);
        let j = f.jacobian(&x).unwrap();
        let h = 1e-6;
        for c in 0..n0 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[c] += h;
            xm[c] -= h;
            let (yp, ym) = (f.evaluate(&xp).unwrap(), f.evaluate(&xm).unwrap());
            for r in 0..2 {
                prop_assert!(((yp[r] - ym[r]) / (2.0 * h) - j[(r, c)]).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn parallelize_bookkeeping(seed in any::<u64>(), n0 in 1usize..4, k in 1usize..4, count in 1usize..5) {
        let nets: Vec<Fnn> = (0..count).map(|i| net(seed.wrapping_add(i as u64), n0, 1 + i % 2, k)).collect();
        let p = parallelize_shared(&nets).unwrap();
        let m = p.metrics();
        prop_assert_eq!(m.connectivity, nets.iter().map(|f| f.metrics().connectivity).sum::<usize>());
        prop_assert_eq!(m.neurons, nets.iter().map(|f| f.metrics().neurons).sum::<usize>() - (count - 1) * n0);
        prop_assert_eq!(m.depth, k);
        prop_assert!(p.validate().is_ok());
    }

    #[test]
    fn superposition_value(seed in any::<u64>(), count in 1usize..4) {
        let nets: Vec<Fnn> = (0..count).map(|i| net(seed.wrapping_add(i as u64), 2, 1, 1 + i)).collect();
        let mut d = Draws::new(seed ^ 6);
        let a = d.vector(count, 2.0);
        let x = d.vector(2 * count, 100.0);
        let s = superpose(&nets, &a, false).unwrap();
        let expected: f64 = nets.iter().enumerate().map(|(i, f)| a[i] * f.evaluate(&x[2 * i..2 * i + 2]).unwrap()[0]).sum();
        prop_assert!(close(&s.evaluate(&x).unwrap(), &[expected], 1e-9));
        let (p, offsets) = parallelize_disjoint(&nets, &a).unwrap();
        prop_assert_eq!(offsets, (0..count).map(|i| 2 * i).collect::<Vec<_>>());
        prop_assert_eq!(p.depth(), count);
    }

    #[test]
    fn affine_linear_regions(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, variant in 1u8..4) {
        let mut d = Draws::new(seed);
        let w = d.sparse_matrix(m, n, 3.0, 0.3);
        let depth = if variant == 1 { None } else { Some(4) };
        let f = affine_representation(&w, variant, depth).unwrap();
        let x = d.vector(n, 5.0);
        let mut scratch = Default::default();
        let (_, margin) = f.evaluate_with_margin(&x, &mut scratch).unwrap();
        // Zero rows of W give identically zero pre-activations, whose masks are
        // irrelevant because the corresponding weights vanish.
        let zero_rows = (0..m).any(|i| w.row(i).iter().all(|v| *v == 0.0));
        prop_assume!(margin > 0.0 || zero_rows);
        prop_assert_eq!(f.jacobian(&x).unwrap(), w.clone());
    }
}

#[test]
fn worked_examples() {
    let n = |k: usize| net(k as u64, 4, 1, 3);
    let nets = vec![n(1), n(2), n(3)];
    let p = parallelize_shared(&nets).unwrap();
    let each: usize = nets.iter().map(|f| f.metrics().neurons).sum();
    assert_eq!(p.metrics().neurons, each - 2 * 4);

    let copies = vec![n(7); 3];
    let pc = parallelize_shared(&copies).unwrap();
    assert_eq!(pc.metrics().connectivity, 3 * copies[0].metrics().connectivity);

    let f1 = net(11, 3, 2, 4);
    let f2 = net(12, 5, 3, 5);
    assert_eq!(concatenate(&f1, &f2).unwrap().depth(), 8);

    let sq = relunet::constructors::square_net(1.0 / 64.0).unwrap();
    let (two, _) = parallelize_disjoint(&[sq.clone(), sq], &[1.0, 1.0]).unwrap();
    assert!(two.metrics().max_width <= 8);

    let v1 = affine_representation(&Matrix::from_rows(&[vec![1.0]]).unwrap(), 1, None).unwrap();
    assert_eq!(v1.evaluate(&[-3.0]).unwrap(), vec![-3.0]);
}
