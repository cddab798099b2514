mod common;

use common::Draws;
use relunet::constructors::{
    complex_matvec_net, dot_product_net, matvec_net, scalar_product_net, square_net,
    square_net_with_order, Accuracy, NetKind, ProductParams,
};
use relunet::data::{pack_complex, pack_matvec};
use relunet::matrix::Matrix;
use relunet::verification::{check_budget, estimate, sobolev_error_matvec, Sampling, Target};

#[test]
fn square_net_interpolates_dyadic_points() {
    let f = square_net(1.0 / 64.0).unwrap();
    for j in 0..=4 {
        let x = j as f64 / 4.0;
        assert_eq!(f.evaluate(&[x]).unwrap()[0], x * x);
    }
    for eps in [0.4, 0.1, 1e-3, 1e-6] {
        let g = square_net(eps).unwrap();
        assert_eq!(g.evaluate(&[0.0]).unwrap()[0], 0.0);
        assert!(g.metrics().max_width <= 4 && g.metrics().max_weight <= 4.0);
    }
}

#[test]
fn square_error_is_tight_at_midpoints() {
    for s in 0..6 {
        let f = square_net_with_order(s);
        let h = 0.5f64.powi(s as i32 + 1);
        let y = f.evaluate(&[h]).unwrap()[0];
        assert_eq!(y - h * h, 0.25f64.powi(s as i32 + 1));
        assert_eq!(f.depth(), s + 1);
    }
}

#[test]
fn scalar_product_grid_error() {
    let f = scalar_product_net(2.0, 0.03125).unwrap();
    let mut sup = 0.0f64;
    for i in 0..=512 {
        for j in 0..=512 {
            let w = -2.0 + 4.0 * i as f64 / 512.0;
            let x = -2.0 + 4.0 * j as f64 / 512.0;
            sup = sup.max((f.evaluate(&[w, x]).unwrap()[0] - w * x).abs());
        }
    }
    assert!(sup <= 0.03125, "grid sup {sup}");
    let m = f.metrics();
    assert!(m.max_width <= 12);
    assert_eq!(m.max_weight, 8.0);
}

#[test]
fn scalar_product_is_nearly_symmetric() {
    // The two inputs play symmetric roles, but the output layer adds the |w|
    // and |x| terms in a fixed order, so swapping them may change the last bit.
    let f = scalar_product_net(2.0, 0.01).unwrap();
    let mut d = Draws::new(3);
    let mut bit_equal = 0;
    for _ in 0..500 {
        let (w, x) = (d.uniform(2.0), d.uniform(2.0));
        let a = f.evaluate(&[w, x]).unwrap()[0];
        let b = f.evaluate(&[x, w]).unwrap()[0];
        assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        bit_equal += usize::from(a == b);
    }
    assert!(bit_equal > 0);
}

#[test]
fn product_networks_vanish_exactly() {
    let mut d = Draws::new(17);
    let scalar = scalar_product_net(3.0, 0.01).unwrap();
    let dot = dot_product_net(3, 2.0, 0.01).unwrap();
    let mv = matvec_net(3, 2, 1.5, 0.05).unwrap();
    let cx = complex_matvec_net(2, 2, 2.0, 0.05).unwrap();
    for _ in 0..200 {
        let v = d.uniform(3.0);
        assert_eq!(scalar.evaluate(&[0.0, v]).unwrap()[0], 0.0);
        assert_eq!(scalar.evaluate(&[v, 0.0]).unwrap()[0], 0.0);

        let x = d.vector(3, 2.0);
        let zeros = [0.0; 3];
        assert_eq!(dot.evaluate(&[&zeros[..], &x].concat()).unwrap()[0], 0.0);
        assert_eq!(dot.evaluate(&[&x[..], &zeros].concat()).unwrap()[0], 0.0);

        let w = d.sparse_matrix(3, 2, 1.5, 0.0);
        let xv = d.vector(2, 1.5);
        let zero_w = pack_matvec(&Matrix::zeros(3, 2), &xv).unwrap();
        assert!(mv.evaluate(&zero_w).unwrap().iter().all(|v| *v == 0.0));
        let zero_x = pack_matvec(&w, &[0.0, 0.0]).unwrap();
        assert!(mv.evaluate(&zero_x).unwrap().iter().all(|v| *v == 0.0));

        let w1 = d.sparse_matrix(2, 2, 2.0, 0.0);
        let x1 = d.vector(2, 2.0);
        let real_only = pack_complex(&w1, &Matrix::zeros(2, 2), &x1, &[0.0, 0.0]).unwrap();
        let y = cx.evaluate(&real_only).unwrap();
        assert!(y[2..].iter().all(|v| *v == 0.0));
        let exact = common::naive_matvec(&w1, &x1);
        assert!(y[..2].iter().zip(&exact).all(|(a, b)| (a - b).abs() <= 0.05));
    }
}

#[test]
fn dot_product_of_one_term_is_the_scalar_network() {
    let dot = dot_product_net(1, 2.0, 0.01).unwrap();
    let scalar = scalar_product_net(2.0, 0.01).unwrap();
    let mut d = Draws::new(5);
    for _ in 0..100 {
        let x = d.vector(2, 2.0);
        let (a, b) = (dot.evaluate(&x).unwrap()[0], scalar.evaluate(&x).unwrap()[0]);
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }
}

#[test]
fn dot_product_monte_carlo() {
    let f = dot_product_net(4, 2.0, 0.03125).unwrap();
    assert!(f.metrics().max_width <= 48);
    let r = estimate(
        &f,
        &Target::Matvec { m: 1, n: 4, half_width: 2.0 },
        &Sampling::new(100_000, 8),
        false,
    )
    .unwrap();
    assert!(r.sup_error <= 0.03125, "{}", r.sup_error);
}

#[test]
fn matvec_budget_at_operating_point() {
    let c = ProductParams::new(NetKind::Matvec, 8, 4, 2.0, 0.03125).build().unwrap();
    let report = check_budget(&c.fnn, &c.record.budget().unwrap());
    assert!(report.passed, "{report:?}");
    assert_eq!(c.fnn.metrics().max_width, 384);
    assert_eq!(c.fnn.metrics().depth, 7);
}

#[test]
fn sobolev_tuned_network_passes_where_sup_tuned_does_not() {
    let lebesgue = matvec_net(2, 2, 1.0, 0.0625).unwrap();
    let l = sobolev_error_matvec(&lebesgue, 2, 2, 1.0, 2_000, 1).unwrap();
    assert!(l.sup_error <= 0.0625);
    assert!(l.grad_sup_error.unwrap() > 0.0625);

    let sob = ProductParams::new(NetKind::Matvec, 2, 2, 1.0, 0.0625)
        .with_accuracy(Accuracy::Sobolev)
        .build()
        .unwrap();
    let s = sobolev_error_matvec(&sob.fnn, 2, 2, 1.0, 2_000, 1).unwrap();
    assert!(s.sup_error.max(s.grad_sup_error.unwrap()) <= 0.0625);
    assert_eq!(s.skipped, 0);
}

#[test]
fn sobolev_mode_covers_other_kinds() {
    let sq = ProductParams::new(NetKind::Square, 1, 1, 1.0, 0.01)
        .with_accuracy(Accuracy::Sobolev)
        .build()
        .unwrap();
    let r = estimate(&sq.fnn, &Target::Square, &Sampling::new(2_000, 2), true).unwrap();
    assert!(r.grad_sup_error.unwrap() <= 0.01);

    let cx = ProductParams::new(NetKind::ComplexMatvec, 2, 2, 2.0, 0.1)
        .with_accuracy(Accuracy::Sobolev)
        .build()
        .unwrap();
    let t = Target::Complex { m: 2, n: 2, half_width: 2.0 };
    let r = estimate(&cx.fnn, &t, &Sampling::new(500, 2), true).unwrap();
    assert!(r.sup_error.max(r.grad_sup_error.unwrap()) <= 0.1);
}

#[test]
fn small_domains_exceed_the_weight_claim() {
    // The folded 1/(2D) input scaling dominates B once D < 1/8.
    let f = scalar_product_net(0.05, 1e-4).unwrap();
    assert_eq!(f.metrics().max_weight, 10.0);
}
