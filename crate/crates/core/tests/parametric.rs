use loewner::benchmarks::RationalSurface;
use loewner::linalg::{c, numerical_rank, singular_values, CMat, C64};
use loewner::parametric::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pole_over_param() -> ParamGrid {
    let freq: Vec<C64> = (0..8).map(|k| c(0.0, 0.3 * 1.6f64.powi(k))).collect();
    let param: Vec<f64> = (0..6).map(|l| 0.5 + 0.5 * l as f64).collect();
    ParamGrid::from_fn(freq, param, |s, p| c(p, 0.0) / (s + 1.0)).unwrap()
}

fn rank(m: &CMat) -> usize {
    numerical_rank(&singular_values(m).unwrap(), 1e-10)
}

#[test]
fn single_pole_slices_have_rank_one() {
    let g = pole_over_param();
    for l in 0..g.param.len() {
        assert_eq!(rank(&slice_loewner(&g, Axis::Frequency, l).unwrap()), 1);
        // independent divided differences over an arbitrary split
        let p = g.param[l];
        let (xs, ys): (Vec<C64>, Vec<C64>) = (g.freq[..4].to_vec(), g.freq[4..].to_vec());
        let f = |s: C64| p / (s + 1.0);
        let m = CMat::from_fn(4, 4, |j, i| (f(ys[j]) - f(xs[i])) / (ys[j] - xs[i]));
        assert_eq!(rank(&m), 1);
    }
    for k in 0..g.freq.len() {
        let m = slice_loewner(&g, Axis::Parameter, k).unwrap();
        assert_eq!(rank(&m), 1);
        let d = m[(0, 0)];
        assert!(m.iter().all(|z| (z - d).norm() < 1e-12 * d.norm()));
    }
    assert_eq!(detect_orders(&g, 1e-10).unwrap(), (1, 1));
}

#[test]
fn sum_pole_orders() {
    let freq: Vec<C64> = (0..10).map(|k| c(0.0, 0.2 + 0.7 * k as f64)).collect();
    let param: Vec<f64> = (0..10).map(|l| 1.0 + l as f64 / 9.0).collect();
    let g = ParamGrid::from_fn(freq, param, |s, p| 1.0 / (s + p)).unwrap();
    assert_eq!(detect_orders(&g, 1e-10).unwrap(), (1, 1));
}

#[test]
fn null_vector_residual_and_off_grid_accuracy() {
    let g = pole_over_param();
    let a = assemble_2d(&g, 1, 1).unwrap();
    let ns = barycentric_coeffs(&a.l2hat, 1e-10).unwrap();
    let cvec = CMat::from_column_slice(ns.c.len(), 1, &ns.c);
    let s1 = singular_values(&a.l2hat).unwrap()[0];
    assert!((&a.l2hat * &cvec).norm() < 1e-10 * s1);
    assert_eq!(ns.deficiency, 1);
    let fit = fit_parametric(&g, &ParamFitOptions::default()).unwrap();
    assert!((fit.model.eval(c(0.0, 0.0), 2.0).unwrap() - 2.0).norm() < 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let s = c(rng.random_range(-0.5..0.5), rng.random_range(-10.0..10.0));
        let p = rng.random_range(0.3..3.0);
        let want = p / (s + 1.0);
        assert!((fit.model.eval(s, p).unwrap() - want).norm() < 1e-8 * want.norm());
    }
}

#[test]
fn block_and_ratio_forms_agree() {
    let surf = RationalSurface::random(3, 2, 17);
    let g = surf.grid(0.1, 10.0, 14, 10).unwrap();
    let fit = fit_parametric(&g, &ParamFitOptions::default()).unwrap();
    assert_eq!(fit.model.orders(), (3, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let s = c(rng.random_range(-1.0..1.0), rng.random_range(-12.0..12.0));
        let p = rng.random_range(0.4..3.0);
        let a = fit.model.eval(s, p).unwrap();
        let b = fit.model.eval_block(s, p).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm(), "{s} {p}");
        assert!((a - surf.eval(s, p)).norm() < 1e-7 * a.norm());
    }
}

#[test]
fn assembled_rank_is_one_short() {
    for (r, q, seed) in [(1, 1, 0), (2, 1, 1), (3, 2, 2), (4, 3, 3)] {
        let surf = RationalSurface::random(r, q, seed);
        let g = surf
            .grid(0.1, 10.0, 2 * (r + 1) + 6, 2 * (q + 1) + 4)
            .unwrap();
        let a = assemble_2d(&g, r, q).unwrap();
        assert_eq!(a.l2hat.ncols(), (r + 1) * (q + 1));
        assert_eq!(rank(&a.l2hat), (r + 1) * (q + 1) - 1, "(r,q)=({r},{q})");
    }
}

#[test]
fn real_mode_matches_complex_mode() {
    let surf = RationalSurface::random(3, 2, 9);
    let freq: Vec<C64> = loewner::linalg::logspace(0.1, 10.0, 8)
        .into_iter()
        .flat_map(|w| [c(0.0, -w), c(0.0, w)])
        .collect();
    let param: Vec<f64> = (0..10).map(|l| 0.5 + 0.25 * l as f64).collect();
    let g = ParamGrid::from_fn(freq, param, |s, p| surf.eval(s, p)).unwrap();
    let cplx = fit_parametric(&g, &ParamFitOptions::default()).unwrap();
    let real = fit_parametric(
        &g,
        &ParamFitOptions {
            real: true,
            ..Default::default()
        },
    )
    .unwrap();
    for (s, p) in [(c(0.0, 0.37), 0.9), (c(0.2, -4.0), 2.2)] {
        let a = cplx.model.eval(s, p).unwrap();
        let b = real.model.eval(s, p).unwrap();
        assert!((a - b).norm() < 1e-8 * a.norm());
        let bc = real.model.eval(s.conj(), p).unwrap();
        assert!((bc - b.conj()).norm() < 1e-10 * b.norm());
    }
}
