//! Time-domain identification: Hankel matrices, Markov parameters and
//! realizations from impulse or input/output records.

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, rcond, svd, to_complex, Factored, RMat, C64};
use crate::model::{DescriptorModel, TimeKind, SINGULAR_RCOND};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const RANK_TOL: f64 = 1e-12;

/// `M x L` Hankel matrix `H(a, b) = seq[k + a + b]`.
pub fn hankel(seq: &[f64], k: usize, rows: usize, cols: usize) -> Result<RMat> {
    if rows == 0 || cols == 0 || k + rows + cols - 1 > seq.len() {
        return Err(Error::OutOfRange(format!(
            "hankel start {k} size {rows}x{cols} exceeds series length {}",
            seq.len()
        )));
    }
    Ok(RMat::from_fn(rows, cols, |a, b| seq[k + a + b]))
}

#[derive(Debug, Clone)]
pub struct HankelPair {
    pub u0: RMat,
    pub u1: RMat,
    pub y0: RMat,
    pub y1: RMat,
}

/// Input and output Hankel matrices starting at `k` and `k + 1`.
pub fn build_hankel(
    u: &[f64],
    y: &[f64],
    k: usize,
    rows: usize,
    cols: usize,
) -> Result<HankelPair> {
    if u.len() != y.len() {
        return Err(Error::DimensionMismatch(
            "input and output lengths differ".into(),
        ));
    }
    if k + rows + cols > u.len() {
        return Err(Error::OutOfRange(format!(
            "k + M + L = {} exceeds series length {}",
            k + rows + cols,
            u.len()
        )));
    }
    Ok(HankelPair {
        u0: hankel(u, k, rows, cols)?,
        u1: hankel(u, k + 1, rows, cols)?,
        y0: hankel(y, k, rows, cols)?,
        y1: hankel(y, k + 1, rows, cols)?,
    })
}

/// `h_0 .. h_n` from `y_t = sum_j h_j u_{t-j}` by forward substitution.
pub fn recover_markov(u: &[f64], y: &[f64], n: usize) -> Result<Vec<f64>> {
    let out = recover_markov_outputs(u, &RMat::from_column_slice(y.len(), 1, y), n)?;
    Ok(out.column(0).iter().copied().collect())
}

/// Multi-output variant: rows of `y` are samples, rows of the result are `h_k`.
pub fn recover_markov_outputs(u: &[f64], y: &RMat, n: usize) -> Result<RMat> {
    if u.len() != y.nrows() {
        return Err(Error::DimensionMismatch(
            "input and output lengths differ".into(),
        ));
    }
    if u.len() < n + 1 {
        return Err(Error::InsufficientData(format!(
            "need {} samples, have {}",
            n + 1,
            u.len()
        )));
    }
    let umax = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if u[0] == 0.0 || u[0].abs() <= f64::EPSILON * umax {
        return Err(Error::ZeroLeadingInput);
    }
    let p = y.ncols();
    let mut h = RMat::zeros(n + 1, p);
    for t in 0..=n {
        for o in 0..p {
            let mut acc = y[(t, o)];
            for j in 0..t {
                acc -= h[(j, o)] * u[t - j];
            }
            h[(t, o)] = acc / u[0];
        }
    }
    Ok(h)
}

fn discrete(dt: f64) -> TimeKind {
    TimeKind::Discrete { h: dt }
}

fn impulse_matrices(h: &[f64], n: usize) -> Result<(RMat, RMat, RMat, RMat)> {
    if h.len() < 2 * n + 1 {
        return Err(Error::InsufficientData(format!(
            "order {n} needs {} Markov parameters, have {}",
            2 * n + 1,
            h.len()
        )));
    }
    let e = RMat::from_fn(n, n, |a, b| h[1 + a + b]);
    let a = RMat::from_fn(n, n, |i, j| h[2 + i + j]);
    let cm = RMat::from_fn(1, n, |_, j| h[1 + j]);
    Ok((e, a, cm.transpose(), cm))
}

/// Order-`n` Hankel realization `E = [h_{i+j+1}]`, `A = [h_{i+j+2}]`,
/// `C = [h_1 .. h_n]`, `B = C^T`, `D = h_0`.
pub fn realize_from_impulse(h: &[f64], n: usize, dt: f64) -> Result<DescriptorModel> {
    let (e, a, b, cm) = impulse_matrices(h, n)?;
    DescriptorModel::from_real(e, a, b, cm, RMat::from_element(1, 1, h[0]), discrete(dt))
}

#[derive(Debug, Clone)]
pub struct HankelReduction {
    pub model: DescriptorModel,
    /// Singular values of the order-`n` Hankel matrix, descending.
    pub singular_values: Vec<f64>,
}

/// Projects the order-`n` Hankel realization onto its `r` dominant singular
/// directions.
pub fn reduce_hankel(h: &[f64], n: usize, r: usize, dt: f64) -> Result<HankelReduction> {
    let (e, a, b, cm) = impulse_matrices(h, n)?;
    if r > n {
        return Err(Error::RankTooLarge {
            requested: r,
            max: n,
        });
    }
    let dec = nalgebra::SVD::try_new(e.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("hankel svd".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    let sv = &dec.singular_values;
    idx.sort_by(|&i, &j| {
        sv[j]
            .partial_cmp(&sv[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let u = dec.u.unwrap();
    let vt = dec.v_t.unwrap();
    let y = RMat::from_fn(n, r, |i, k| u[(i, idx[k])]);
    let x = RMat::from_fn(n, r, |i, k| vt[(idx[k], i)]);
    let yt = y.transpose();
    let model = DescriptorModel::from_real(
        &yt * &e * &x,
        &yt * &a * &x,
        &yt * &b,
        &cm * &x,
        RMat::from_element(1, 1, h[0]),
        discrete(dt),
    )?;
    Ok(HankelReduction {
        model,
        singular_values: idx.iter().map(|&i| sv[i]).collect(),
    })
}

/// Compressed pole pencil `(Q0, Q1)` and its Markov parameters.
#[derive(Debug, Clone)]
pub struct PolePencil {
    pub q0: RMat,
    pub q1: RMat,
    pub markov: Vec<f64>,
}

fn default_dims(len: usize) -> (usize, usize) {
    let rows = len / 2;
    (rows, len.saturating_sub(rows + 1))
}

/// Pole pencil from input/output data with `rows x cols` Hankel matrices.
pub fn pole_pencil_with(
    u: &[f64],
    y: &[f64],
    n: usize,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<PolePencil> {
    let markov = recover_markov(u, y, n)?;
    if n == 0 {
        return Ok(PolePencil {
            q0: RMat::zeros(0, 0),
            q1: RMat::zeros(0, 0),
            markov,
        });
    }
    if cols < n || rows < n {
        return Err(Error::InsufficientData(format!(
            "Hankel size {rows}x{cols} too small for order {n}"
        )));
    }
    let hp = build_hankel(u, y, 0, rows, cols)?;
    let su = svd(&to_complex(&hp.u0))?;
    let rho = numerical_rank(&su.s, RANK_TOL);
    if rho + n > rows {
        return Err(Error::InsufficientExcitation(format!(
            "rank(U0) = {rho} exceeds M - n = {}",
            rows - n
        )));
    }
    let mut both = RMat::zeros(rows, 2 * cols);
    both.columns_mut(0, cols).copy_from(&hp.u0);
    both.columns_mut(cols, cols).copy_from(&hp.u1);
    let rho2 = numerical_rank(&svd(&to_complex(&both))?.s, RANK_TOL);
    if rho2 != rho {
        return Err(Error::InsufficientExcitation(format!(
            "shifted input Hankel leaves the column space of U0 (rank {rho} -> {rho2})"
        )));
    }
    let qu = RMat::from_fn(rows, rho, |i, j| su.u[(i, j)].re);
    let proj = RMat::identity(rows, rows) - &qu * qu.transpose();
    let q0 = &proj * hp.y0.columns(0, n);
    let q1 = &proj * hp.y1.columns(0, n);
    let mut qq = RMat::zeros(rows, 2 * n);
    qq.columns_mut(0, n).copy_from(&q0);
    qq.columns_mut(n, n).copy_from(&q1);
    let sq = svd(&to_complex(&qq))?;
    if numerical_rank(&sq.s, RANK_TOL) < n {
        return Err(Error::InsufficientExcitation(format!(
            "projected output Hankel has rank {} < {n}",
            numerical_rank(&sq.s, RANK_TOL)
        )));
    }
    let yl = RMat::from_fn(n, rows, |i, j| sq.u[(j, i)].re);
    let mut q0h = &yl * &q0;
    let mut q1h = &yl * &q1;
    if rcond(&to_complex(&q0h)) < RANK_TOL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = RMat::from_fn(n, rows, |_, _| StandardNormal.sample(&mut rng));
        q0h = &g * &q0;
        q1h = &g * &q1;
        if rcond(&to_complex(&q0h)) < RANK_TOL {
            return Err(Error::PencilNotRegular(
                "compressed pole pencil is singular".into(),
            ));
        }
    }
    Ok(PolePencil {
        q0: q0h,
        q1: q1h,
        markov,
    })
}

pub fn pole_pencil(u: &[f64], y: &[f64], n: usize) -> Result<PolePencil> {
    let (rows, cols) = default_dims(u.len());
    pole_pencil_with(u, y, n, rows, cols, 0)
}

impl PolePencil {
    pub fn poles(&self) -> Result<Vec<C64>> {
        let q0 = to_complex(&self.q0);
        let f = Factored::new(&q0);
        crate::linalg::eigenvalues(&f.solve(&to_complex(&self.q1)))
    }
}

/// Realization from a zero-initial-state input/output record:
/// `E = Q0`, `A = Q1`, `B` = first column of `Q0`, `C = [h_1 .. h_n]`, `D = h_0`.
pub fn realize_from_io(u: &[f64], y: &[f64], n: usize, dt: f64) -> Result<DescriptorModel> {
    let (rows, cols) = default_dims(u.len());
    realize_from_io_with(u, y, n, rows, cols, dt, 0)
}

pub fn realize_from_io_with(
    u: &[f64],
    y: &[f64],
    n: usize,
    rows: usize,
    cols: usize,
    dt: f64,
    seed: u64,
) -> Result<DescriptorModel> {
    let pp = pole_pencil_with(u, y, n, rows, cols, seed)?;
    let d = RMat::from_element(1, 1, pp.markov[0]);
    if n == 0 {
        return DescriptorModel::from_real(
            RMat::zeros(0, 0),
            RMat::zeros(0, 0),
            RMat::zeros(0, 1),
            RMat::zeros(1, 0),
            d,
            discrete(dt),
        );
    }
    let b = pp.q0.columns(0, 1).into_owned();
    let cm = RMat::from_fn(1, n, |_, j| pp.markov[1 + j]);
    DescriptorModel::from_real(pp.q0, pp.q1, b, cm, d, discrete(dt))
}

/// Backward-Euler discretization, written as a discrete descriptor model with
/// input at step `k`: `E_d = E - hA`, `A_d = E`, `B_d = h E (E-hA)^{-1} B`,
/// `C_d = C`, `D_d = D + h C (E-hA)^{-1} B`.
pub fn discretize_backward_euler(m: &DescriptorModel, h: f64) -> Result<DescriptorModel> {
    if m.time != TimeKind::Continuous {
        return Err(Error::InvalidArgument("model is already discrete".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let hc = C64::new(h, 0.0);
    let f = &m.e - &m.a * hc;
    let fac = Factored::new(&f);
    if m.order() > 0 && fac.rcond < SINGULAR_RCOND {
        return Err(Error::SingularStep(format!(
            "E - hA has rcond {:.3e}",
            fac.rcond
        )));
    }
    let fb = fac.solve(&m.b);
    let bd = &m.e * &fb * hc;
    let dd = &m.d + &m.c * &fb * hc;
    DescriptorModel::new(f, m.e.clone(), bd, m.c.clone(), dd, discrete(h))
}

/// Exact inverse of [`discretize_backward_euler`] (`z = 1/(1 - hs)`).
pub fn to_continuous_bilinear(m: &DescriptorModel) -> Result<DescriptorModel> {
    let h = match m.time {
        TimeKind::Discrete { h } => h,
        TimeKind::Continuous => {
            return Err(Error::InvalidArgument("model is already continuous".into()))
        }
    };
    let hc = C64::new(h, 0.0);
    if m.order() == 0 {
        return Ok(m.clone().with_time(TimeKind::Continuous));
    }
    let fac = Factored::new(&m.a);
    if fac.rcond < SINGULAR_RCOND {
        return Err(Error::SingularTransform(format!(
            "A has rcond {:.3e}",
            fac.rcond
        )));
    }
    let ae = fac.solve(&m.e);
    let ab = fac.solve(&m.b);
    let model = DescriptorModel::new(
        &m.a * hc,
        &m.a - &m.e,
        m.b.clone(),
        &m.c * ae,
        &m.d - &m.c * ab,
        TimeKind::Continuous,
    )?;
    Ok(if m.field == crate::model::Field::Real {
        model.into_real()
    } else {
        model
    })
}
