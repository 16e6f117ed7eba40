//! Benchmark systems: irrational transfer functions, a structural chain,
//! the viscous Burgers equation and seeded random test systems.

use crate::bilinear::QuadraticBilinear;
use crate::error::{Error, Result};
use crate::linalg::{c, fmt_c, logspace, to_complex, CMat, Factored, RMat, C64};
use crate::model::{BilinearModel, DescriptorModel, FrequencySample, TimeKind, SINGULAR_RCOND};
use crate::parametric::ParamGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const TRANSPORT_OMEGA0: f64 = 3.0;
pub const TRANSPORT_DAMPING: f64 = 0.5;
pub const TRANSPORT_XM: f64 = 1.9592;

/// `sqrt(pi)/sqrt(s) exp(-x^2 s) w0^2 / (s^2 + m w0 s + w0^2)`.
pub fn transport_tf_with(x: f64, s: C64, omega0: f64, m: f64) -> Result<C64> {
    if s == c(0.0, 0.0) {
        return Err(Error::BranchPoint);
    }
    let w2 = omega0 * omega0;
    Ok(
        c(std::f64::consts::PI.sqrt(), 0.0) / s.sqrt() * (-s * (x * x)).exp() * w2
            / (s * s + s * (m * omega0) + w2),
    )
}

pub fn transport_tf(x: f64, s: C64) -> Result<C64> {
    transport_tf_with(x, s, TRANSPORT_OMEGA0, TRANSPORT_DAMPING)
}

/// Conjugate-closed samples `H(+-i w_k)` on `count / 2` log-spaced frequencies.
pub fn conjugate_samples<F: Fn(C64) -> Result<CMat>>(
    f: F,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Vec<FrequencySample>> {
    let mut out = Vec::with_capacity(count);
    for w in crate::linalg::logspace(lo, hi, count / 2) {
        let v = f(c(0.0, w))?;
        out.push(FrequencySample {
            point: c(0.0, -w),
            value: v.conjugate(),
        });
        out.push(FrequencySample {
            point: c(0.0, w),
            value: v,
        });
    }
    Ok(out)
}

pub fn transport_samples(x: f64, lo: f64, hi: f64, count: usize) -> Result<Vec<FrequencySample>> {
    conjugate_samples(
        |s| Ok(CMat::from_element(1, 1, transport_tf(x, s)?)),
        lo,
        hi,
        count,
    )
}

/// Multi-delay system
/// `(C0 + C1 e^{-tm s}) (sE - A0 - A1 e^{-t1 s} - A2 e^{-t2 s})^{-1} B`.
#[derive(Debug, Clone)]
pub struct DelaySystem {
    pub e: RMat,
    pub a0: RMat,
    pub a1: RMat,
    pub a2: RMat,
    pub b: RMat,
    pub c0: RMat,
    pub c1: RMat,
    pub tau1: f64,
    pub tau2: f64,
    pub tau_m: f64,
}

impl DelaySystem {
    pub fn eval(&self, s: C64) -> Result<CMat> {
        let e1 = (-s * self.tau1).exp();
        let e2 = (-s * self.tau2).exp();
        let em = (-s * self.tau_m).exp();
        let k = to_complex(&self.e) * s
            - to_complex(&self.a0)
            - to_complex(&self.a1) * e1
            - to_complex(&self.a2) * e2;
        let f = Factored::new(&k);
        if f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularPencil {
                point: fmt_c(s),
                rcond: f.rcond,
            });
        }
        let out = to_complex(&self.c0) + to_complex(&self.c1) * em;
        Ok(out * f.solve(&to_complex(&self.b)))
    }
}

pub fn gust_delay_tf(sys: &DelaySystem, s: C64) -> Result<CMat> {
    sys.eval(s)
}

/// Seeded synthetic stand-in for the aircraft gust-response model: a stable
/// modal system with two state delays and one output delay.
pub fn gust_fixture() -> DelaySystem {
    let n = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut a0 = RMat::zeros(n, n);
    let mut k = 0;
    while k < n {
        let sigma = -rng.random_range(0.3..1.5);
        let omega = rng.random_range(0.5..6.0);
        a0[(k, k)] = sigma;
        a0[(k + 1, k + 1)] = sigma;
        a0[(k, k + 1)] = omega;
        a0[(k + 1, k)] = -omega;
        k += 2;
    }
    let mut small =
        |scale: f64| RMat::from_fn(n, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    let a1 = small(0.04);
    let a2 = small(0.02);
    let b = RMat::from_fn(n, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c0 = RMat::from_fn(2, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c1 = RMat::from_fn(2, n, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal));
    DelaySystem {
        e: RMat::identity(n, n),
        a0,
        a1,
        a2,
        b,
        c0,
        c1,
        tau1: 0.4,
        tau2: 0.9,
        tau_m: 0.25,
    }
}

/// Frequency weight used to move poles/zeros away from the sampled region.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// Polynomial ratio, coefficients in descending powers.
    Rational {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    /// `e^{s tau}`.
    Delay {
        tau: f64,
    },
    Product(Vec<Weight>),
}

fn polyval(coef: &[f64], s: C64) -> C64 {
    coef.iter().fold(c(0.0, 0.0), |acc, &a| acc * s + a)
}

impl Weight {
    /// `s / ((s + a)(s + b))`.
    pub fn integrator_removal(a: f64, b: f64) -> Weight {
        Weight::Rational {
            num: vec![1.0, 0.0],
            den: vec![1.0, a + b, a * b],
        }
    }

    pub fn eval(&self, s: C64) -> Result<C64> {
        match self {
            Weight::Rational { num, den } => {
                let d = polyval(den, s);
                if d == c(0.0, 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "weight has a pole at {}",
                        fmt_c(s)
                    )));
                }
                Ok(polyval(num, s) / d)
            }
            Weight::Delay { tau } => Ok((s * *tau).exp()),
            Weight::Product(ws) => ws
                .iter()
                .try_fold(c(1.0, 0.0), |acc, w| Ok(acc * w.eval(s)?)),
        }
    }

    fn eval_nonzero(&self, s: C64) -> Result<C64> {
        let w = self.eval(s)?;
        if w.norm() == 0.0 {
            return Err(Error::WeightZeroAtPoint(fmt_c(s)));
        }
        Ok(w)
    }
}

/// Multiplies every sample by the weight.
pub fn spectral_shift(samples: &[FrequencySample], w: &Weight) -> Result<Vec<FrequencySample>> {
    samples
        .iter()
        .map(|s| {
            Ok(FrequencySample {
                point: s.point,
                value: &s.value * w.eval_nonzero(s.point)?,
            })
        })
        .collect()
}

/// Divides every sample by the weight.
pub fn spectral_unshift(samples: &[FrequencySample], w: &Weight) -> Result<Vec<FrequencySample>> {
    samples
        .iter()
        .map(|s| {
            Ok(FrequencySample {
                point: s.point,
                value: &s.value / w.eval_nonzero(s.point)?,
            })
        })
        .collect()
}

/// Evaluates a model fitted to weighted data with the weight removed.
pub fn unshift_eval(model: &DescriptorModel, w: &Weight, s: C64) -> Result<CMat> {
    Ok(model.eval_transfer(s)? / w.eval_nonzero(s)?)
}

#[derive(Debug, Clone)]
pub struct ChainParams {
    pub floors: usize,
    pub b_scaling: f64,
    /// Multiplies the Rayleigh damping coefficients; zero gives an undamped chain.
    pub damping: f64,
    pub seed: u64,
}

impl ChainParams {
    pub fn new(floors: usize) -> Self {
        ChainParams {
            floors,
            b_scaling: 1e4,
            damping: 4.0,
            seed: 11,
        }
    }
}

/// Mass-spring-damper chain with three degrees of freedom (two translations
/// and a rotation) per floor, in first-order form `[q; q']`. The input is a
/// force on the top floor, the output its first translation.
pub fn structural_chain(p: &ChainParams) -> Result<DescriptorModel> {
    let f = p.floors;
    if f == 0 {
        return Err(Error::InvalidArgument("at least one floor required".into()));
    }
    let nd = 3 * f;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut mass = RMat::zeros(nd, nd);
    let mut stiff = RMat::zeros(nd, nd);
    for fl in 0..f {
        let m = rng.random_range(0.8..1.2);
        let j = rng.random_range(0.8..1.2);
        mass[(3 * fl, 3 * fl)] = m;
        mass[(3 * fl + 1, 3 * fl + 1)] = m;
        mass[(3 * fl + 2, 3 * fl + 2)] = j;
        let kx: f64 = rng.random_range(150.0..250.0);
        let ky: f64 = rng.random_range(150.0..250.0);
        let kt: f64 = rng.random_range(150.0..250.0);
        let ex: f64 = rng.random_range(-0.1..0.1);
        let ey: f64 = rng.random_range(-0.1..0.1);
        let t = RMat::from_row_slice(3, 3, &[1.0, 0.0, -ey, 0.0, 1.0, ex, 0.0, 0.0, 1.0]);
        let ks = t.transpose()
            * RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![kx, ky, kt]))
            * &t;
        let i = 3 * fl;
        let mut add = |r: usize, cc: usize, sign: f64| {
            for a in 0..3 {
                for b in 0..3 {
                    stiff[(r + a, cc + b)] += sign * ks[(a, b)];
                }
            }
        };
        add(i, i, 1.0);
        if fl > 0 {
            let k = 3 * (fl - 1);
            add(k, k, 1.0);
            add(i, k, -1.0);
            add(k, i, -1.0);
        }
    }
    let damp = (&mass * 0.3 + &stiff * 0.002) * p.damping;
    let n = 2 * nd;
    let mut e = RMat::identity(n, n);
    e.view_mut((nd, nd), (nd, nd)).copy_from(&mass);
    let mut a = RMat::zeros(n, n);
    a.view_mut((0, nd), (nd, nd))
        .copy_from(&RMat::identity(nd, nd));
    a.view_mut((nd, 0), (nd, nd)).copy_from(&(-&stiff));
    a.view_mut((nd, nd), (nd, nd)).copy_from(&(-&damp));
    let top = 3 * (f - 1);
    let mut b = RMat::zeros(n, 1);
    b[(nd + top, 0)] = p.b_scaling;
    let mut cm = RMat::zeros(1, n);
    cm[(0, top)] = 1.0;
    DescriptorModel::from_real(e, a, b, cm, RMat::zeros(1, 1), TimeKind::Continuous)
}

pub const BUILDING_DT: f64 = 4e-3;
pub const BUILDING_SAMPLES: usize = 2001;

/// `(cos 50t + 2 cos 20t + 3 cos 10t) / 10`.
pub fn building_input(t: f64) -> f64 {
    ((50.0 * t).cos() + 2.0 * (20.0 * t).cos() + 3.0 * (10.0 * t).cos()) / 10.0
}

pub fn building_input_samples() -> Vec<f64> {
    (0..BUILDING_SAMPLES)
        .map(|k| building_input(k as f64 * BUILDING_DT))
        .collect()
}

/// `(cos 2 pi t + sin(20 pi t) e^{-t/5}) / 5`.
pub fn burgers_input(t: f64) -> f64 {
    use std::f64::consts::PI;
    ((2.0 * PI * t).cos() + (20.0 * PI * t).sin() * (-t / 5.0).exp()) / 5.0
}

/// Viscous Burgers equation `v_t + v v_x = nu v_xx` on `(0, 1)` with
/// `v(0, t) = u(t)`, `v(1, t) = 0`, on `n` interior points with spacing
/// `h = 1/(n+1)`: central second differences and first-order upwind
/// convection. The output is the spatial mean.
pub fn burgers_spec(n: usize, nu: f64) -> Result<QuadraticBilinear> {
    if n == 0 || nu <= 0.0 {
        return Err(Error::InvalidArgument("n >= 1 and nu > 0 required".into()));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let d = nu / (h * h);
    let mut f1 = RMat::zeros(n, n);
    let mut f2 = RMat::zeros(n, n * n);
    for i in 0..n {
        f1[(i, i)] = -2.0 * d;
        if i > 0 {
            f1[(i, i - 1)] = d;
            f2[(i, i * n + i - 1)] = 1.0 / h;
        }
        if i + 1 < n {
            f1[(i, i + 1)] = d;
        }
        f2[(i, i * n + i)] = -1.0 / h;
    }
    let mut g0 = RMat::zeros(n, 1);
    g0[(0, 0)] = d;
    let mut g1 = RMat::zeros(n, n);
    g1[(0, 0)] = 1.0 / h;
    let cm = RMat::from_element(1, n, 1.0 / n as f64);
    QuadraticBilinear::new(f1, f2, g0, g1, cm)
}

/// Records `p` (upper half plane representative) unless it lies within `gap`
/// of a pole already placed.
fn separated(placed: &mut Vec<C64>, p: C64, gap: f64) -> bool {
    if placed.iter().any(|q| (q - p).norm() < gap) {
        return false;
    }
    placed.push(p);
    true
}

/// Random stable continuous-time system with poles at least 0.1 apart, `D = 0`.
pub fn random_stable(order: usize, outputs: usize, inputs: usize, seed: u64) -> DescriptorModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = RMat::zeros(order, order);
    let mut k = 0;
    let mut placed: Vec<C64> = Vec::new();
    while k < order {
        if k + 1 < order && rng.random_bool(0.6) {
            let sigma = -rng.random_range(0.1..2.0);
            let omega = rng.random_range(0.3..5.0);
            if !separated(&mut placed, c(sigma, omega), 0.1) {
                continue;
            }
            a[(k, k)] = sigma;
            a[(k + 1, k + 1)] = sigma;
            a[(k, k + 1)] = omega;
            a[(k + 1, k)] = -omega;
            k += 2;
        } else {
            let p = -rng.random_range(0.1..5.0);
            if !separated(&mut placed, c(p, 0.0), 0.1) {
                continue;
            }
            a[(k, k)] = p;
            k += 1;
        }
    }
    let t = RMat::identity(order, order)
        + RMat::from_fn(order, order, |_, _| {
            0.3 * rng.sample::<f64, _>(StandardNormal)
        });
    let ti = t
        .clone()
        .try_inverse()
        .unwrap_or_else(|| RMat::identity(order, order));
    let a = &t * a * ti;
    let b = RMat::from_fn(order, inputs, |_, _| rng.sample::<f64, _>(StandardNormal));
    let cm = RMat::from_fn(outputs, order, |_, _| rng.sample::<f64, _>(StandardNormal));
    DescriptorModel::from_real(
        RMat::identity(order, order),
        a,
        b,
        cm,
        RMat::zeros(outputs, inputs),
        TimeKind::Continuous,
    )
    .expect("consistent dimensions")
}

/// Random stable discrete-time SISO system with poles of modulus in `[0.2, 0.85]`,
/// at least 0.03 apart.
pub fn random_stable_discrete(order: usize, seed: u64) -> DescriptorModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = RMat::zeros(order, order);
    let mut k = 0;
    let mut placed: Vec<C64> = Vec::new();
    while k < order {
        let rad = rng.random_range(0.2..0.85);
        if k + 1 < order && rng.random_bool(0.5) {
            let th: f64 = rng.random_range(0.2..2.5);
            if !separated(&mut placed, C64::from_polar(rad, th), 0.03) {
                continue;
            }
            a[(k, k)] = rad * th.cos();
            a[(k + 1, k + 1)] = rad * th.cos();
            a[(k, k + 1)] = rad * th.sin();
            a[(k + 1, k)] = -rad * th.sin();
            k += 2;
        } else {
            let p = if rng.random_bool(0.5) { rad } else { -rad };
            if !separated(&mut placed, c(p, 0.0), 0.03) {
                continue;
            }
            a[(k, k)] = p;
            k += 1;
        }
    }
    let t = RMat::identity(order, order)
        + RMat::from_fn(order, order, |_, _| {
            0.3 * rng.sample::<f64, _>(StandardNormal)
        });
    let ti = t
        .clone()
        .try_inverse()
        .unwrap_or_else(|| RMat::identity(order, order));
    let a = &t * a * ti;
    let b = RMat::from_fn(order, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let cm = RMat::from_fn(1, order, |_, _| rng.sample::<f64, _>(StandardNormal));
    let d = RMat::from_element(1, 1, rng.sample::<f64, _>(StandardNormal));
    DescriptorModel::from_real(
        RMat::identity(order, order),
        a,
        b,
        cm,
        d,
        TimeKind::Discrete { h: 1.0 },
    )
    .expect("consistent dimensions")
}

/// Random stable SISO bilinear system of the given order with a small `N`.
pub fn random_bilinear(order: usize, seed: u64) -> BilinearModel {
    let lin = random_stable(order, 1, 1, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let n = RMat::from_fn(order, order, |_, _| {
        0.5 * rng.sample::<f64, _>(StandardNormal)
    });
    BilinearModel::new(lin.e, lin.a, to_complex(&n), lin.b, lin.c).expect("consistent dimensions")
}

/// `f(s, p) = 1 + sum_kj a_kj / ((s - p_k)(p - z_j))`, of order `(r, q)`.
#[derive(Debug, Clone)]
pub struct RationalSurface {
    pub poles: Vec<f64>,
    pub param_poles: Vec<f64>,
    pub weights: RMat,
}

impl RationalSurface {
    /// Stable real poles in `[-5, -0.2]`, parameter poles in `[-3, -0.2]`,
    /// one per equal-width bin so that no two nearly coincide.
    pub fn random(r: usize, q: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spread = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
            let w = (hi - lo) / n as f64;
            (0..n)
                .map(|k| -(lo + w * (k as f64 + rng.random_range(0.2..0.8))))
                .collect()
        };
        let poles = spread(r, 0.2, 5.0);
        let param_poles = spread(q, 0.2, 3.0);
        let weights = RMat::from_fn(r, q, |_, _| rng.sample::<f64, _>(StandardNormal));
        RationalSurface {
            poles,
            param_poles,
            weights,
        }
    }

    pub fn eval(&self, s: C64, p: f64) -> C64 {
        let mut f = c(1.0, 0.0);
        for (k, pk) in self.poles.iter().enumerate() {
            for (j, zj) in self.param_poles.iter().enumerate() {
                f += self.weights[(k, j)] / ((s - pk) * (p - zj));
            }
        }
        f
    }

    /// Values at `count_freq` points `i w`, `w` log-spaced in `[lo, hi]`, and
    /// parameters `0.5 + 0.25 l`.
    pub fn grid(
        &self,
        lo: f64,
        hi: f64,
        count_freq: usize,
        count_param: usize,
    ) -> Result<ParamGrid> {
        let freq = logspace(lo, hi, count_freq)
            .into_iter()
            .map(|w| c(0.0, w))
            .collect();
        let param = (0..count_param).map(|l| 0.5 + 0.25 * l as f64).collect();
        ParamGrid::from_fn(freq, param, |s, p| self.eval(s, p))
    }
}
