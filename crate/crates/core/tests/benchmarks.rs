use loewner::benchmarks::*;
use loewner::linalg::{c, eigenvalues, logspace, pencil_eigenvalues, to_complex, RMat, C64};
use loewner::lti::{fit, FitOptions};
use loewner::model::FrequencySample;

#[test]
fn transport_value_against_closed_form() {
    // At s = 1 the exponent is -x (s + 3)/sqrt(s^2 + 3 s + 9) * ... evaluated independently.
    let v = transport_tf(TRANSPORT_XM, c(1.0, 0.0)).unwrap();
    let oracle = std::f64::consts::PI.sqrt() * (-3.8384f64).exp() * 9.0 / 11.5;
    assert!((v.re - oracle).abs() < 2e-4, "{v} vs {oracle}");
    assert!((v.re - 0.0299).abs() < 5e-5);
}

#[test]
fn transport_gain_is_position_independent() {
    for w in logspace(1e-2, 1e2, 25) {
        let s = c(0.0, w);
        let g0 = transport_tf(0.0, s).unwrap().norm();
        for x in [0.5, 1.0, TRANSPORT_XM, 3.0] {
            assert!((transport_tf(x, s).unwrap().norm() - g0).abs() < 1e-12 * g0);
        }
    }
}

#[test]
fn gust_fixture_loewner_fit() {
    let sys = gust_fixture();
    let samples = conjugate_samples(|s| sys.eval(s), 1e-2, 1e1, 200).unwrap();
    let f = fit(
        &samples,
        &FitOptions {
            tol: 1e-9,
            ..Default::default()
        },
    )
    .unwrap();
    let grid = logspace(1e-2 * 1.013, 1e1 / 1.013, 333);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for w in grid {
        let s = c(0.0, w);
        let h = sys.eval(s).unwrap();
        num = num.max((f.model.eval_transfer(s).unwrap() - &h).norm());
        den = den.max(h.norm());
    }
    assert!(
        num / den < 1e-4,
        "order {} error {}",
        f.model.order(),
        num / den
    );
}

#[test]
fn delay_weight_flattens_pure_delay() {
    let tau = 0.7;
    let samples: Vec<FrequencySample> = logspace(0.1, 10.0, 20)
        .into_iter()
        .map(|w| FrequencySample::scalar(c(0.0, w), (c(0.0, -w) * tau).exp()))
        .collect();
    let shifted = spectral_shift(&samples, &Weight::Delay { tau }).unwrap();
    for s in shifted {
        assert!((s.value[(0, 0)] - 1.0).norm() < 1e-14);
    }
}

#[test]
fn single_floor_has_three_oscillatory_pairs() {
    let m = structural_chain(&ChainParams::new(1)).unwrap();
    assert_eq!(m.order(), 6);
    let ev: Vec<C64> = pencil_eigenvalues(&m.a, &m.e, 1e-10)
        .unwrap()
        .into_iter()
        .filter_map(|e| e.finite())
        .collect();
    assert_eq!(ev.len(), 6);
    assert_eq!(ev.iter().filter(|z| z.im > 0.0).count(), 3);
    assert!(ev.iter().all(|z| z.re < 0.0));
}

#[test]
fn burgers_two_point_linear_part() {
    let nu = 0.1;
    let q = burgers_spec(2, nu).unwrap();
    let d = nu * 9.0;
    let mut ev: Vec<f64> = eigenvalues(&to_complex(&q.f1))
        .unwrap()
        .iter()
        .map(|z| z.re)
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((ev[0] + 3.0 * d).abs() < 1e-12 && (ev[1] + d).abs() < 1e-12);
}

#[test]
fn diffusive_burgers_energy_decays() {
    let q = burgers_spec(10, 5.0).unwrap();
    let x0 = RMat::from_fn(10, 1, |i, _| 0.3 * ((i + 1) as f64 * 0.6).sin());
    let u = vec![0.0; 400];
    let (_, states) = q.simulate_from(&x0, &u, 1e-4);
    let energy: Vec<f64> = states.iter().map(|x| x.norm_squared()).collect();
    assert!(energy.windows(2).all(|w| w[1] < w[0]));
    assert!(energy.last().unwrap() < &(0.5 * energy[0]));
}

#[test]
fn building_input_fixture() {
    let u = building_input_samples();
    assert_eq!(u.len(), BUILDING_SAMPLES);
    assert!((u[0] - 0.6).abs() < 1e-15);
    assert!((BUILDING_DT * (BUILDING_SAMPLES - 1) as f64 - 8.0).abs() < 1e-12);
    assert!((burgers_input(0.0) - 0.2).abs() < 1e-15);
}
