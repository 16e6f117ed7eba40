use loewner::benchmarks::*;
use loewner::bilinear::{carleman, eval_generalized_tf, QuadraticBilinear};
use loewner::hankel::recover_markov;
use loewner::io::{read_frequency_csv, read_time_csv, write_frequency_csv, write_time_csv};
use loewner::lddc::{ideal_controller_samples, ReferenceModel, TransferSpec};
use loewner::linalg::{c, to_complex, CMat, RMat, C64, I};
use loewner::lti::*;
use loewner::model::{conjugate_close, DescriptorModel, FrequencySample, TimeKind, TimeSeries};
use loewner::parametric::{fit_parametric, ParamFitOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn near_identity(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let t = RMat::identity(n, n) + RMat::from_fn(n, n, |_, _| rng.random_range(-0.4..0.4));
        let s = t.singular_values();
        if s.max() / s.min() < 1e3 {
            return to_complex(&t);
        }
    }
}

fn samples(m: &DescriptorModel, count: usize) -> Vec<FrequencySample> {
    conjugate_samples(|s| m.eval_transfer(s), 0.1, 10.0, count).unwrap()
}

fn test_points() -> Vec<C64> {
    vec![
        c(0.3, 0.7),
        c(-0.05, 2.3),
        c(1.0, -4.1),
        I * 0.05,
        c(0.0, 17.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transfer_is_similarity_invariant(order in 1usize..8, seed in 0u64..10_000) {
        let m = random_stable(order, 2, 2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = near_identity(order, &mut rng);
        let t2 = near_identity(order, &mut rng);
        let mt = DescriptorModel::new(&t1 * &m.e * &t2, &t1 * &m.a * &t2, &t1 * &m.b, &m.c * &t2, m.d.clone(), m.time).unwrap();
        for z in test_points() {
            prop_assert!(rel(&mt.eval_transfer(z).unwrap(), &m.eval_transfer(z).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn conjugate_close_is_idempotent(seed in 0u64..10_000, count in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<FrequencySample> = (0..count)
            .map(|_| {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(0.1..10.0));
                FrequencySample::scalar(z, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
            .collect();
        let once = conjugate_close(&s).unwrap();
        prop_assert_eq!(once.len(), 2 * count);
        prop_assert_eq!(conjugate_close(&once).unwrap(), once);
    }

    #[test]
    fn impulse_response_equals_markov_parameters(order in 1usize..11, seed in 0u64..10_000) {
        let m = random_stable_discrete(order, seed);
        let mut u = vec![0.0; 30];
        u[0] = 1.0;
        let y = m.simulate_discrete(&TimeSeries::from_input(1.0, &u)).unwrap();
        let h = m.markov_parameters(30).unwrap();
        for (k, hk) in h.iter().enumerate() {
            prop_assert!((y.y[(k, 0)] - hk[(0, 0)].re).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_recovery_for_any_input(order in 1usize..11, seed in 0u64..10_000) {
        let m = random_stable_discrete(order, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        // Forward substitution is exact only in exact arithmetic; a dominant
        // leading sample keeps the triangular Toeplitz inverse bounded.
        let mut u: Vec<f64> = (0..80i32).map(|k| rng.random_range(-1.0..1.0) * 0.5f64.powi(k)).collect();
        u[0] = if u[0] >= 0.0 { 1.0 + u[0] } else { u[0] - 1.0 };
        let y = m.simulate_discrete(&TimeSeries::from_input(1.0, &u)).unwrap();
        let h = recover_markov(&u, y.y.column(0).as_slice(), 40).unwrap();
        let truth = m.markov_parameters(41).unwrap();
        for k in 0..=40 {
            prop_assert!((h[k] - truth[k][(0, 0)].re).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_data_satisfies_sylvester_and_order(order in 1usize..9, seed in 0u64..10_000, mimo in any::<bool>()) {
        let io = if mimo { 2 } else { 1 };
        let m = random_stable(order, io, io, seed);
        let s = samples(&m, 2 * order + 4);
        let d = partition_data(&s, &PartitionPolicy::Alternating, DirectionPolicy::CyclicUnit).unwrap();
        let p = build_pencil(&d).unwrap();
        let (r1, r2) = sylvester_residual(&p);
        prop_assert!(r1 < 1e-10 && r2 < 1e-10);
        let rep = detect_order(&p, 1e-10).unwrap();
        prop_assert_eq!(rep.nu, order);
    }

    #[test]
    fn scaling_responses_scales_pencil(order in 1usize..7, seed in 0u64..10_000, k in 0.01f64..100.0, neg in any::<bool>()) {
        let k = if neg { -k } else { k };
        let m = random_stable(order, 1, 1, seed);
        let s = samples(&m, 2 * order + 4);
        let scaled: Vec<FrequencySample> =
            s.iter().map(|x| FrequencySample { point: x.point, value: &x.value * c(k, 0.0) }).collect();
        let split = |v: &[FrequencySample]| {
            partition_data(v, &PartitionPolicy::Alternating, DirectionPolicy::CyclicUnit).unwrap()
        };
        let p = build_pencil(&split(&s)).unwrap();
        let q = build_pencil(&split(&scaled)).unwrap();
        let kc = c(k, 0.0);
        for (a, b) in [(&p.ll, &q.ll), (&p.mm, &q.mm), (&p.v, &q.v), (&p.w, &q.w)] {
            prop_assert!(rel(b, &(a * kc)) < 1e-12);
        }
        let (a, b) = (detect_order(&p, 1e-10).unwrap(), detect_order(&q, 1e-10).unwrap());
        prop_assert_eq!((a.r, a.nu), (b.r, b.nu));
    }

    #[test]
    fn real_and_complex_fits_agree(order in 1usize..7, seed in 0u64..10_000) {
        let m = random_stable(order, 1, 1, seed);
        let s = samples(&m, 2 * order + 4);
        let real = fit(&s, &FitOptions { order: Some(order), ..Default::default() }).unwrap();
        let cplx = fit(&s, &FitOptions { order: Some(order), realify: false, ..Default::default() }).unwrap();
        for z in test_points() {
            let a = real.model.eval_transfer(z).unwrap();
            prop_assert!(rel(&a, &cplx.model.eval_transfer(z).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn kernels_scale_linearly_in_b_and_c(order in 1usize..6, seed in 0u64..10_000, k in 0.1f64..10.0, len in 1usize..4) {
        let m = random_bilinear(order, seed);
        let mut mb = m.clone();
        mb.b *= c(k, 0.0);
        let mut mc = m.clone();
        mc.c *= c(k, 0.0);
        let pts: Vec<C64> = (0..len).map(|j| c(0.2, 1.0 + j as f64)).collect();
        let h = eval_generalized_tf(&m, &pts).unwrap();
        for other in [&mb, &mc] {
            let hk = eval_generalized_tf(other, &pts).unwrap();
            prop_assert!((hk - h * k).norm() <= 1e-12 * (h * k).norm().max(1e-300));
        }
    }

    #[test]
    fn carleman_h1_is_linearization(n in 1usize..5, seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = |r: usize, cl: usize| RMat::from_fn(r, cl, |_, _| rng.random_range(-1.0..1.0));
        let f1 = g(n, n) - RMat::identity(n, n) * 3.0;
        let qb = QuadraticBilinear::new(f1.clone(), g(n, n * n), g(n, 1), g(n, n), g(1, n)).unwrap();
        let cm = carleman(&qb, 2).unwrap();
        let lin = DescriptorModel::from_real(RMat::identity(n, n), f1, qb.g0.clone(), qb.c.clone(), RMat::zeros(1, 1), TimeKind::Continuous).unwrap();
        for z in test_points() {
            let want = lin.eval_transfer(z).unwrap()[(0, 0)];
            prop_assert!((eval_generalized_tf(&cm, &[z]).unwrap() - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn parametric_model_interpolates_supports(r in 1usize..4, q in 1usize..3, seed in 0u64..10_000) {
        let f = RationalSurface::random(r, q, seed);
        let grid = f.grid(0.1, 10.0, 2 * (r + 1) + 6, 2 * (q + 1) + 4).unwrap();
        let fit = fit_parametric(&grid, &ParamFitOptions { orders: Some((r, q)), ..Default::default() }).unwrap();
        let md = &fit.model;
        for (i, &l) in md.lambda.iter().enumerate() {
            for (j, &p) in md.pi.iter().enumerate() {
                let v = md.eval(l, p).unwrap();
                prop_assert!((v - md.w[(i, j)]).norm() <= 1e-9 * md.w[(i, j)].norm());
            }
        }
    }

    #[test]
    fn transport_gain_is_position_independent(x in 0.0f64..3.0, w in 1e-3f64..1e3) {
        let s = I * w;
        let a = transport_tf(x, s).unwrap().norm();
        let b = transport_tf(0.0, s).unwrap().norm();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn spectral_shift_round_trip(order in 1usize..6, seed in 0u64..10_000, a in 0.1f64..5.0, b in 0.1f64..5.0, tau in 0.0f64..2.0) {
        let m = random_stable(order, 1, 1, seed);
        let s = samples(&m, 10);
        let w = Weight::Product(vec![Weight::integrator_removal(a, b), Weight::Delay { tau }]);
        let back = spectral_unshift(&spectral_shift(&s, &w).unwrap(), &w).unwrap();
        for (x, y) in s.iter().zip(&back) {
            prop_assert!(rel(&y.value, &x.value) < 1e-13);
        }
    }

    #[test]
    fn ideal_controller_is_plant_scale_equivariant(order in 1usize..5, seed in 0u64..10_000, k in 0.1f64..10.0) {
        let h = random_stable(order, 1, 1, seed);
        let plant = samples(&h, 12);
        let scaled: Vec<FrequencySample> =
            plant.iter().map(|x| FrequencySample { point: x.point, value: &x.value * c(k, 0.0) }).collect();
        let m = ReferenceModel::new(TransferSpec::Rational { num: vec![1.0], den: vec![1.0, 1.0] }, "1/(s+1)");
        let a = ideal_controller_samples(&plant, &m).unwrap();
        let b = ideal_controller_samples(&scaled, &m).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(&(&y.value * c(k, 0.0)), &x.value) < 1e-13);
        }
    }

    #[test]
    fn frequency_csv_round_trip(seed in 0u64..10_000, count in 1usize..10, p in 1usize..3, m in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<FrequencySample> = (0..count)
            .map(|k| FrequencySample {
                point: c(rng.random_range(-1.0..1.0), k as f64 + rng.random::<f64>()),
                value: CMat::from_fn(p, m, |_, _| c(rng.random_range(-1e3..1e3), rng.random_range(-1e-3..1e-3))),
            })
            .collect();
        let mut buf = Vec::new();
        write_frequency_csv(&mut buf, &s).unwrap();
        prop_assert_eq!(read_frequency_csv(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn time_csv_round_trip(seed in 0u64..10_000, len in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = TimeSeries {
            dt: 0.25,
            t0: 0.0,
            u: RMat::from_fn(len, 2, |_, _| rng.random_range(-5.0..5.0)),
            y: RMat::from_fn(len, 1, |_, _| rng.random_range(-5.0..5.0)),
        };
        let mut buf = Vec::new();
        write_time_csv(&mut buf, &ts).unwrap();
        prop_assert_eq!(read_time_csv(buf.as_slice()).unwrap(), ts);
    }
}
