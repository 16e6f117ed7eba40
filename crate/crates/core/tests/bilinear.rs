use loewner::benchmarks::{burgers_input, burgers_spec, random_bilinear};
use loewner::bilinear::*;
use loewner::error::Error;
use loewner::linalg::{c, to_complex, CMat, RMat, C64};
use loewner::model::{BilinearModel, Field};

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn scalar_model() -> BilinearModel {
    let one = |x: f64| to_complex(&RMat::from_element(1, 1, x));
    BilinearModel::new(one(1.0), one(-1.0), one(1.0), one(1.0), one(1.0)).unwrap()
}

#[test]
fn scalar_kernels_are_resolvent_products() {
    let m = scalar_model();
    assert!((eval_generalized_tf(&m, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap() - 1.0).norm() < 1e-15);
    let (s1, s2, s3) = (c(0.5, 1.0), c(2.0, -0.3), c(0.0, 4.0));
    let want = 1.0 / ((s1 + 1.0) * (s2 + 1.0) * (s3 + 1.0));
    assert!(rel(eval_generalized_tf(&m, &[s1, s2, s3]).unwrap(), want) < 1e-14);
}

#[test]
fn scalar_carleman_first_kernel() {
    let (a, g0, g1) = (-0.7, 1.3, 0.4);
    let one = |x: f64| RMat::from_element(1, 1, x);
    let qb =
        loewner::bilinear::QuadraticBilinear::new(one(a), one(0.0), one(g0), one(g1), one(1.0))
            .unwrap();
    let m = carleman(&qb, 2).unwrap();
    assert_eq!(m.order(), 2);
    for s in [c(0.0, 1.0), c(1.0, 2.0), c(-0.2, 0.1)] {
        assert!(rel(eval_generalized_tf(&m, &[s]).unwrap(), g0 / (s - a)) < 1e-14);
    }
    assert!(matches!(
        carleman(&qb, 3),
        Err(Error::UnsupportedTruncation(3))
    ));
}

#[test]
fn burgers_carleman_dimension_and_short_horizon() {
    let qb = burgers_spec(10, 0.1).unwrap();
    let m = carleman(&qb, 2).unwrap();
    assert_eq!(m.order(), 110);
    let dt = 1e-3;
    let u: Vec<f64> = (0..=1000)
        .map(|k| 0.5 * burgers_input(k as f64 * dt))
        .collect();
    let yq = qb.simulate(&u, dt);
    let yc: Vec<f64> = m
        .simulate_complex(&u, dt)
        .unwrap()
        .iter()
        .map(|z| z.re)
        .collect();
    let peak = yq.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let err = yq
        .iter()
        .zip(&yc)
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    assert!(err < 1e-3 * peak, "{err} vs {peak}");
}

#[test]
fn two_tuple_example_quantities() {
    let m = random_bilinear(5, 21);
    let (lam, mu) = ([c(0.0, 0.3), c(0.0, 1.7)], [c(0.0, 0.8), c(0.0, 3.1)]);
    let tuples = InterpolationTuples::chain(&lam, &mu).unwrap();
    assert_eq!(tuples.right_points(1), vec![lam[1], lam[0]]);
    assert_eq!(tuples.left_points(1), vec![mu[0], mu[1]]);
    let set = build_bilinear_set(&tuples, &m).unwrap();
    let h = |p: &[C64]| eval_generalized_tf(&m, p).unwrap();
    let (l1, l2, m1, m2) = (lam[0], lam[1], mu[0], mu[1]);
    let want_ll = [
        [
            (h(&[m1]) - h(&[l1])) / (m1 - l1),
            (h(&[m1, l1]) - h(&[l2, l1])) / (m1 - l2),
        ],
        [
            (h(&[m1, m2]) - h(&[m1, l1])) / (m2 - l1),
            (h(&[m1, m2, l1]) - h(&[m1, l2, l1])) / (m2 - l2),
        ],
    ];
    let want_t = [
        [h(&[m1, l1]), h(&[m1, l2, l1])],
        [h(&[m1, m2, l1]), h(&[m1, m2, l2, l1])],
    ];
    for j in 0..2 {
        for i in 0..2 {
            assert!(rel(set.ll[(j, i)], want_ll[j][i]) < 1e-12);
            assert!(rel(set.t[(j, i)], want_t[j][i]) < 1e-12);
        }
    }
    assert!(rel(set.v[0], h(&[m1])) < 1e-14 && rel(set.v[1], h(&[m1, m2])) < 1e-14);
    assert!(rel(set.w[0], h(&[l1])) < 1e-14 && rel(set.w[1], h(&[l2, l1])) < 1e-14);

    let r = realize_bilinear(&set).unwrap();
    let eight = [
        vec![m1],
        vec![l1],
        vec![m1, m2],
        vec![m1, l1],
        vec![l2, l1],
        vec![m1, m2, l1],
        vec![m1, l2, l1],
        vec![m1, m2, l2, l1],
    ];
    for pts in eight {
        assert!(
            rel(eval_generalized_tf(&r, &pts).unwrap(), h(&pts)) < 1e-10,
            "{pts:?}"
        );
    }
}

#[test]
fn factored_form_matches_divided_differences() {
    let m = random_bilinear(6, 3);
    let (lam, mu) = default_points(3, 0.2, 8.0);
    let tuples = InterpolationTuples::chain(&lam, &mu).unwrap();
    let set = build_bilinear_set(&tuples, &m).unwrap();
    let o = generalized_observability(&m, &tuples).unwrap();
    let r = generalized_reachability(&m, &tuples).unwrap();
    let close = |a: &CMat, b: &CMat| (a - b).norm() <= 1e-10 * b.norm();
    assert!(close(&set.ll, &-(&o * &m.e * &r)));
    assert!(close(&set.mm, &-(&o * &m.a * &r)));
    assert!(close(&set.t, &(&o * &m.n * &r)));
    assert!(close(
        &CMat::from_column_slice(3, 1, set.v.as_slice()),
        &(&o * &m.b)
    ));
    assert!(close(
        &CMat::from_row_slice(1, 3, set.w.as_slice()),
        &(&m.c * &r)
    ));
    let (a, b) = sylvester_residuals(&m, &tuples).unwrap();
    assert!(a < 1e-10 && b < 1e-10);
}

#[test]
fn exact_order_recovery_real_and_complex() {
    for n in 2..=5 {
        let m = random_bilinear(n, n as u64);
        let (lam, mu) = default_points(n, 0.1, 10.0);
        let plain =
            build_bilinear_set(&InterpolationTuples::chain(&lam, &mu).unwrap(), &m).unwrap();
        let complex = realize_bilinear(&plain).unwrap();
        let paired = build_bilinear_set(
            &InterpolationTuples::conjugate_chains(&lam, &mu).unwrap(),
            &m,
        )
        .unwrap();
        let real_set = paired.realify().unwrap();
        assert!(real_set.is_real());
        assert_eq!(real_set.order(1e-10).unwrap().0, n);
        let real = reduce_bilinear(&real_set, n).unwrap();
        assert_eq!(real.field, Field::Real);
        for pts in [
            vec![c(0.3, 1.0)],
            vec![c(0.2, 0.5), c(1.0, -2.0)],
            vec![c(0.0, 0.7), c(0.4, 0.0), c(0.0, 3.0)],
        ] {
            let want = eval_generalized_tf(&m, &pts).unwrap();
            assert!(
                rel(eval_generalized_tf(&complex, &pts).unwrap(), want) < 1e-7,
                "n={n} complex"
            );
            assert!(
                rel(eval_generalized_tf(&real, &pts).unwrap(), want) < 1e-7,
                "n={n} real"
            );
        }
    }
}

#[test]
fn tabulated_kernels_match_model_oracle() {
    let m = random_bilinear(3, 8);
    let (lam, mu) = default_points(3, 0.1, 10.0);
    let tuples = InterpolationTuples::chain(&lam, &mu).unwrap();
    let mut table = KernelTable::default();
    for pts in tuples.matched_kernels() {
        table.insert(&pts, eval_generalized_tf(&m, &pts).unwrap());
    }
    let a = build_bilinear_set(&tuples, &m).unwrap();
    let b = build_bilinear_set(&tuples, &table).unwrap();
    assert!((&a.ll - &b.ll).norm() < 1e-14 * a.ll.norm());
    assert!((&a.t - &b.t).norm() < 1e-14 * a.t.norm());
    let short = KernelTable::default();
    assert!(matches!(
        build_bilinear_set(&tuples, &short),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn tuple_sets_reject_shared_points() {
    let p = [c(0.0, 1.0)];
    assert!(InterpolationTuples::chain(&p, &p).is_err());
}
