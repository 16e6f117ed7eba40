//! Two-variable Loewner interpolation in frequency and one real parameter.

use crate::error::{Error, Result};
use crate::linalg::{
    c, fmt_c, numerical_rank, singular_values, svd_full_right, CMat, Factored, RMat, C64,
};
use crate::model::{c_from_json, c_to_json, mat_from_json, mat_to_json, Field, SINGULAR_RCOND};
use serde_json::{json, Value};
use std::cmp::Ordering;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Samples `values[k][l] = H(freq[k], param[l])`.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    pub freq: Vec<C64>,
    pub param: Vec<f64>,
    pub values: CMat,
}

impl ParamGrid {
    pub fn new(freq: Vec<C64>, param: Vec<f64>, values: CMat) -> Result<Self> {
        if values.shape() != (freq.len(), param.len()) {
            return Err(Error::DimensionMismatch(format!(
                "grid values are {}x{}, expected {}x{}",
                values.nrows(),
                values.ncols(),
                freq.len(),
                param.len()
            )));
        }
        for i in 0..freq.len() {
            for j in i + 1..freq.len() {
                if freq[i] == freq[j] {
                    return Err(Error::ConflictingData(format!(
                        "frequency {} repeated",
                        fmt_c(freq[i])
                    )));
                }
            }
        }
        for i in 0..param.len() {
            for j in i + 1..param.len() {
                if param[i] == param[j] {
                    return Err(Error::ConflictingData(format!(
                        "parameter {} repeated",
                        param[i]
                    )));
                }
            }
        }
        Ok(ParamGrid {
            freq,
            param,
            values,
        })
    }

    pub fn from_fn<F: Fn(C64, f64) -> C64>(freq: Vec<C64>, param: Vec<f64>, f: F) -> Result<Self> {
        let values = CMat::from_fn(freq.len(), param.len(), |k, l| f(freq[k], param[l]));
        Self::new(freq, param, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Frequency,
    Parameter,
}

/// Sort key for frequencies: `|Im|`, then `Re`, then `Im`, so conjugate
/// pairs are adjacent with the lower member first.
fn freq_order(a: &C64, b: &C64) -> Ordering {
    a.im.abs()
        .total_cmp(&b.im.abs())
        .then(a.re.total_cmp(&b.re))
        .then(a.im.total_cmp(&b.im))
}

fn sorted_freq(grid: &ParamGrid) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grid.freq.len()).collect();
    idx.sort_by(|&i, &j| freq_order(&grid.freq[i], &grid.freq[j]));
    idx
}

fn sorted_param(grid: &ParamGrid) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grid.param.len()).collect();
    idx.sort_by(|&i, &j| grid.param[i].total_cmp(&grid.param[j]));
    idx
}

/// One-variable Loewner matrix with the sorted points split alternately into
/// right (even positions) and left (odd positions) sets.
fn loewner_1d(x: &[C64], f: &[C64]) -> CMat {
    let right: Vec<usize> = (0..x.len()).step_by(2).collect();
    let left: Vec<usize> = (1..x.len()).step_by(2).collect();
    CMat::from_fn(left.len(), right.len(), |a, b| {
        let (j, i) = (left[a], right[b]);
        (f[j] - f[i]) / (x[j] - x[i])
    })
}

/// Loewner matrix of one frozen-parameter column (`Axis::Frequency`) or one
/// frozen-frequency row (`Axis::Parameter`).
pub fn slice_loewner(grid: &ParamGrid, axis: Axis, index: usize) -> Result<CMat> {
    match axis {
        Axis::Frequency => {
            if index >= grid.param.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "parameter column {index} of {}",
                    grid.param.len()
                )));
            }
            let order = sorted_freq(grid);
            let x: Vec<C64> = order.iter().map(|&k| grid.freq[k]).collect();
            let f: Vec<C64> = order.iter().map(|&k| grid.values[(k, index)]).collect();
            Ok(loewner_1d(&x, &f))
        }
        Axis::Parameter => {
            if index >= grid.freq.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "frequency row {index} of {}",
                    grid.freq.len()
                )));
            }
            let order = sorted_param(grid);
            let x: Vec<C64> = order.iter().map(|&l| c(grid.param[l], 0.0)).collect();
            let f: Vec<C64> = order.iter().map(|&l| grid.values[(index, l)]).collect();
            Ok(loewner_1d(&x, &f))
        }
    }
}

fn slice_rank(m: &CMat, tol: f64) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let s = singular_values(m)?;
    if s[0] == 0.0 {
        return Ok(0);
    }
    Ok(numerical_rank(&s, tol))
}

/// `r` is the largest rank over frozen-parameter slices, `q` over
/// frozen-frequency slices.
pub fn detect_orders(grid: &ParamGrid, tol: f64) -> Result<(usize, usize)> {
    let mut r = 0;
    for l in 0..grid.param.len() {
        r = r.max(slice_rank(&slice_loewner(grid, Axis::Frequency, l)?, tol)?);
    }
    let mut q = 0;
    for k in 0..grid.freq.len() {
        q = q.max(slice_rank(&slice_loewner(grid, Axis::Parameter, k)?, tol)?);
    }
    Ok((r, q))
}

/// The stacked two-dimensional Loewner matrix with its partition.
#[derive(Debug, Clone)]
pub struct Assembled2d {
    pub l2hat: CMat,
    pub lambda: Vec<C64>,
    pub mu: Vec<C64>,
    pub pi: Vec<f64>,
    pub nu: Vec<f64>,
    /// Support values `w[(i, j)] = H(lambda_i, pi_j)`.
    pub w: CMat,
}

/// How the `r+1` frequency and `q+1` parameter supports are drawn from the
/// sorted axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportSelection {
    /// The first points of each sorted axis.
    Leading,
    /// Points evenly spread over each sorted axis, keeping conjugate pairs.
    #[default]
    Spread,
}

fn pick(
    order: &[usize],
    count: usize,
    sel: SupportSelection,
    paired: bool,
) -> (Vec<usize>, Vec<usize>) {
    let n = order.len();
    let chosen: Vec<usize> = match sel {
        SupportSelection::Leading => (0..count).collect(),
        SupportSelection::Spread if paired && count.is_multiple_of(2) && n.is_multiple_of(2) => {
            let units = count / 2;
            let total = n / 2;
            (0..units)
                .flat_map(|u| {
                    let k = if units == 1 {
                        0
                    } else {
                        u * (total - 1) / (units - 1)
                    };
                    [2 * k, 2 * k + 1]
                })
                .collect()
        }
        SupportSelection::Spread => (0..count)
            .map(|u| {
                if count == 1 {
                    0
                } else {
                    u * (n - 1) / (count - 1)
                }
            })
            .collect(),
    };
    let sup: Vec<usize> = chosen.iter().map(|&k| order[k]).collect();
    let rest: Vec<usize> = order.iter().copied().filter(|k| !sup.contains(k)).collect();
    (sup, rest)
}

/// Builds `[L_lambda; L_pi; L_2]` acting on `vec(c)` with index `i (q+1) + j`.
pub fn assemble_2d(grid: &ParamGrid, r: usize, q: usize) -> Result<Assembled2d> {
    assemble_2d_with(grid, r, q, SupportSelection::default())
}

pub fn assemble_2d_with(
    grid: &ParamGrid,
    r: usize,
    q: usize,
    sel: SupportSelection,
) -> Result<Assembled2d> {
    let (nb, mb) = (r + 1, q + 1);
    if nb > grid.freq.len() || mb > grid.param.len() {
        return Err(Error::DimensionMismatch(format!(
            "orders ({r},{q}) need at least {nb} frequencies and {mb} parameters"
        )));
    }
    let paired = grid.freq.iter().any(|z| z.im != 0.0);
    let (fs, fr) = pick(&sorted_freq(grid), nb, sel, paired);
    let (ps, pr) = pick(&sorted_param(grid), mb, sel, false);
    let (fs, fr, ps, pr) = (&fs[..], &fr[..], &ps[..], &pr[..]);
    let (nl, ml) = (fr.len(), pr.len());
    let h = |k: usize, l: usize| grid.values[(k, l)];
    let rows = nb * ml + nl * mb + nl * ml;
    let mut m = CMat::zeros(rows, nb * mb);
    let col = |i: usize, j: usize| i * mb + j;
    let mut row = 0;
    for (i, &ki) in fs.iter().enumerate() {
        for &lv in pr {
            for (j, &lp) in ps.iter().enumerate() {
                m[(row, col(i, j))] =
                    (h(ki, lv) - h(ki, lp)) / c(grid.param[lv] - grid.param[lp], 0.0);
            }
            row += 1;
        }
    }
    for (j, &lp) in ps.iter().enumerate() {
        for &km in fr {
            for (i, &ki) in fs.iter().enumerate() {
                m[(row, col(i, j))] = (h(km, lp) - h(ki, lp)) / (grid.freq[km] - grid.freq[ki]);
            }
            row += 1;
        }
    }
    for &km in fr {
        for &lv in pr {
            for (i, &ki) in fs.iter().enumerate() {
                for (j, &lp) in ps.iter().enumerate() {
                    let den = (grid.freq[km] - grid.freq[ki]) * (grid.param[lv] - grid.param[lp]);
                    m[(row, col(i, j))] = (h(km, lv) - h(ki, lp)) / den;
                }
            }
            row += 1;
        }
    }
    Ok(Assembled2d {
        l2hat: m,
        lambda: fs.iter().map(|&k| grid.freq[k]).collect(),
        mu: fr.iter().map(|&k| grid.freq[k]).collect(),
        pi: ps.iter().map(|&l| grid.param[l]).collect(),
        nu: pr.iter().map(|&l| grid.param[l]).collect(),
        w: CMat::from_fn(nb, mb, |i, j| h(fs[i], ps[j])),
    })
}

/// Null vector of `L2hat` and the normalized singular values (padded with
/// zeros up to the column count).
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub c: Vec<C64>,
    pub singular_values: Vec<f64>,
    pub deficiency: usize,
}

fn padded_sv(s: &[f64], cols: usize) -> Vec<f64> {
    let top = s.first().copied().unwrap_or(0.0);
    let mut out: Vec<f64> = s
        .iter()
        .map(|x| if top > 0.0 { x / top } else { 0.0 })
        .collect();
    out.resize(cols, 0.0);
    out
}

fn check_deficiency(sv: &[f64], tol: f64, allowed: usize) -> Result<usize> {
    let deficiency = sv.iter().filter(|&&x| x <= tol).count();
    if deficiency > allowed {
        return Err(Error::NullSpaceDimension(deficiency));
    }
    if deficiency == 0 {
        log::warn!("two-dimensional Loewner matrix has full column rank; using the smallest singular direction");
    }
    Ok(deficiency)
}

/// Right singular vector of the smallest singular value, unit norm, first
/// nonzero entry real positive.
pub fn barycentric_coeffs(l2hat: &CMat, tol: f64) -> Result<NullSpace> {
    let cols = l2hat.ncols();
    let d = svd_full_right(l2hat)?;
    let sv = padded_sv(&d.s, cols);
    let deficiency = check_deficiency(&sv, tol, 1)?;
    let mut v: Vec<C64> = d.v.column(cols - 1).iter().copied().collect();
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12 * big).copied() {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    Ok(NullSpace {
        c: v,
        singular_values: sv,
        deficiency,
    })
}

/// Pairs conjugate supports (adjacent after sorting) into the columns
/// `(1,1)/sqrt2` and `(-i,i)/sqrt2`; real supports map to themselves.
fn pair_transform(lambda: &[C64]) -> Result<CMat> {
    let n = lambda.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMat::zeros(n, n);
    let mut i = 0;
    while i < n {
        if lambda[i].im == 0.0 {
            t[(i, i)] = c(1.0, 0.0);
            i += 1;
            continue;
        }
        if i + 1 >= n || lambda[i + 1] != lambda[i].conj() {
            return Err(Error::NotConjugateClosed(format!(
                "support {} has no conjugate partner",
                fmt_c(lambda[i])
            )));
        }
        t[(i, i)] = c(s, 0.0);
        t[(i + 1, i)] = c(s, 0.0);
        t[(i, i + 1)] = c(0.0, -s);
        t[(i + 1, i + 1)] = c(0.0, s);
        i += 2;
    }
    Ok(t)
}

/// Null vector restricted to conjugate-symmetric coefficients, computed in
/// real arithmetic. The sign of the real coordinates is normalized instead of
/// the phase. `allowed` bounds the accepted null-space dimension.
pub fn barycentric_coeffs_real(a: &Assembled2d, tol: f64, allowed: usize) -> Result<NullSpace> {
    let mb = a.pi.len();
    let t = pair_transform(&a.lambda)?.kronecker(&CMat::identity(mb, mb));
    let m = &a.l2hat * &t;
    let rows = m.nrows();
    let cols = m.ncols();
    let mut stacked = RMat::zeros(2 * rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            stacked[(i, j)] = m[(i, j)].re;
            stacked[(rows + i, j)] = m[(i, j)].im;
        }
    }
    let padded = if stacked.nrows() < cols {
        stacked.clone().resize_vertically(cols, 0.0)
    } else {
        stacked.clone()
    };
    let d = padded.svd(false, true);
    let vt = d
        .v_t
        .ok_or_else(|| Error::NoConvergence("real SVD".into()))?;
    let mut order: Vec<usize> = (0..d.singular_values.len()).collect();
    order.sort_by(|&x, &y| d.singular_values[y].total_cmp(&d.singular_values[x]));
    let s: Vec<f64> = order.iter().map(|&k| d.singular_values[k]).collect();
    let sv = padded_sv(&s, cols);
    let deficiency = check_deficiency(&sv, tol, allowed)?;
    let mut x: Vec<f64> = vt
        .row(*order.last().expect("nonempty"))
        .iter()
        .copied()
        .collect();
    let big = x.iter().map(|z| z.abs()).fold(0.0, f64::max);
    if x.iter()
        .find(|z| z.abs() > 1e-12 * big)
        .is_some_and(|z| *z < 0.0)
    {
        x.iter_mut().for_each(|z| *z = -*z);
    }
    let xr = CMat::from_iterator(cols, 1, x.iter().map(|&z| c(z, 0.0)));
    let cv = &t * xr;
    let n = cv.norm();
    Ok(NullSpace {
        c: cv.iter().map(|z| z / n).collect(),
        singular_values: sv,
        deficiency,
    })
}

/// `H(xi, rho) = sum c_ij w_ij q_ij / sum c_ij q_ij`,
/// `q_ij = 1 / ((xi - lambda_i)(rho - pi_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricModel {
    pub lambda: Vec<C64>,
    pub pi: Vec<f64>,
    pub c: CMat,
    pub w: CMat,
}

impl ParametricModel {
    pub fn new(lambda: Vec<C64>, pi: Vec<f64>, c: CMat, w: CMat) -> Result<Self> {
        let shape = (lambda.len(), pi.len());
        if lambda.is_empty() || pi.is_empty() || c.shape() != shape || w.shape() != shape {
            return Err(Error::DimensionMismatch(
                "coefficient and value arrays must be (r+1)x(q+1)".into(),
            ));
        }
        Ok(ParametricModel { lambda, pi, c, w })
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.lambda.len() - 1, self.pi.len() - 1)
    }

    /// Barycentric ratio; at support coordinates the limit is taken.
    pub fn eval(&self, xi: C64, rho: f64) -> Result<C64> {
        let fi = self.lambda.iter().position(|&l| l == xi);
        let pj = self.pi.iter().position(|&p| p == rho);
        if let (Some(i), Some(j)) = (fi, pj) {
            if self.c[(i, j)] != c(0.0, 0.0) {
                return Ok(self.w[(i, j)]);
            }
        }
        let rows: Vec<usize> = fi.map_or_else(|| (0..self.lambda.len()).collect(), |i| vec![i]);
        let cols: Vec<usize> = pj.map_or_else(|| (0..self.pi.len()).collect(), |j| vec![j]);
        let mut num = c(0.0, 0.0);
        let mut den = c(0.0, 0.0);
        let mut scale = 0.0;
        for &i in &rows {
            let a = if fi.is_some() {
                c(1.0, 0.0)
            } else {
                c(1.0, 0.0) / (xi - self.lambda[i])
            };
            for &j in &cols {
                let b = if pj.is_some() {
                    1.0
                } else {
                    1.0 / (rho - self.pi[j])
                };
                let t = self.c[(i, j)] * a * b;
                num += t * self.w[(i, j)];
                den += t;
                scale += t.norm();
            }
        }
        if den.norm() <= 1e-14 * scale {
            return Err(Error::DenominatorZero(format!("at ({}, {rho})", fmt_c(xi))));
        }
        Ok(num / den)
    }

    /// `C Phi(xi, rho)^{-1} B` with the `J` blocks and Lagrange weights.
    pub fn eval_block(&self, xi: C64, rho: f64) -> Result<C64> {
        let (r, q) = self.orders();
        let nb = r + 1;
        let mb = q + 1;
        let n = r + 2 * q + 2;
        let tau: Vec<f64> = (0..mb)
            .map(|k| {
                1.0 / (0..mb)
                    .filter(|&l| l != k)
                    .map(|l| self.pi[k] - self.pi[l])
                    .product::<f64>()
            })
            .collect();
        let mut phi = CMat::zeros(n, n);
        for i in 0..r {
            phi[(i, 0)] = xi - self.lambda[0];
            phi[(i, i + 1)] = self.lambda[i + 1] - xi;
        }
        let rho_c = c(rho, 0.0);
        for j in 0..mb {
            for k in 0..nb {
                phi[(r + j, k)] = self.c[(k, j)];
                phi[(r + mb + j, k)] = self.c[(k, j)] * self.w[(k, j)];
            }
        }
        for l in 0..q {
            phi[(r, nb + l)] = rho_c - c(self.pi[0], 0.0);
            phi[(r + l + 1, nb + l)] = c(self.pi[l + 1], 0.0) - rho_c;
            phi[(r + mb, nb + q + l)] = rho_c - c(self.pi[0], 0.0);
            phi[(r + mb + l + 1, nb + q + l)] = c(self.pi[l + 1], 0.0) - rho_c;
        }
        for j in 0..mb {
            phi[(r + mb + j, n - 1)] = c(tau[j], 0.0);
        }
        let mut b = CMat::zeros(n, 1);
        for j in 0..mb {
            b[(r + j, 0)] = c(tau[j], 0.0);
        }
        let f = Factored::new(&phi);
        if f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularPencil {
                point: format!("({}, {rho})", fmt_c(xi)),
                rcond: f.rcond,
            });
        }
        Ok(-f.solve(&b)[(n - 1, 0)])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "r": self.lambda.len() - 1,
            "q": self.pi.len() - 1,
            "lambda": self.lambda.iter().map(|&z| c_to_json(z)).collect::<Vec<_>>(),
            "pi": self.pi,
            "c": mat_to_json(&self.c, Field::Complex),
            "w": mat_to_json(&self.w, Field::Complex),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let lambda = v
            .get("lambda")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("missing key 'lambda'".into()))?
            .iter()
            .map(c_from_json)
            .collect::<Result<Vec<_>>>()?;
        let pi = v
            .get("pi")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("missing key 'pi'".into()))?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::Schema("'pi' entries must be numbers".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Schema(format!("missing key '{k}'")))
        };
        let cm = mat_from_json(get("c")?, Some(lambda.len()), Some(pi.len()))?;
        let w = mat_from_json(get("w")?, Some(lambda.len()), Some(pi.len()))?;
        Self::new(lambda, pi, cm, w)
    }
}

#[derive(Debug, Clone)]
pub struct ParamFitOptions {
    pub tol: f64,
    pub orders: Option<(usize, usize)>,
    pub real: bool,
    pub supports: SupportSelection,
}

impl Default for ParamFitOptions {
    fn default() -> Self {
        ParamFitOptions {
            tol: DEFAULT_TOL,
            orders: None,
            real: false,
            supports: SupportSelection::Spread,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamFit {
    pub model: ParametricModel,
    pub detected: (usize, usize),
    pub null_space: NullSpace,
    pub rank: usize,
}

/// In real mode the frequency supports are rounded up to whole conjugate
/// pairs, which may add one extra support and one null direction.
pub fn fit_parametric(grid: &ParamGrid, opts: &ParamFitOptions) -> Result<ParamFit> {
    let detected = detect_orders(grid, opts.tol)?;
    let (r, q) = opts.orders.unwrap_or(detected);
    let paired = grid.freq.iter().any(|z| z.im != 0.0);
    let nb = if opts.real && paired && r % 2 == 0 {
        r + 2
    } else {
        r + 1
    };
    let mb = q + 1;
    let a = assemble_2d_with(grid, nb - 1, q, opts.supports)?;
    let ns = if opts.real {
        barycentric_coeffs_real(&a, opts.tol, (nb - r) * (mb - q))?
    } else {
        barycentric_coeffs(&a.l2hat, opts.tol)?
    };
    let rank = a.l2hat.ncols() - ns.deficiency;
    let cm = CMat::from_fn(nb, mb, |i, j| ns.c[i * mb + j]);
    let model = ParametricModel::new(a.lambda, a.pi, cm, a.w)?;
    Ok(ParamFit {
        model,
        detected,
        null_space: ns,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pole_grid() -> ParamGrid {
        let freq: Vec<C64> = (0..8).map(|k| c(0.0, 0.5 + k as f64)).collect();
        let param: Vec<f64> = (0..6).map(|l| 1.0 + 0.3 * l as f64).collect();
        ParamGrid::from_fn(freq, param, |s, p| c(p, 0.0) / (s + 1.0)).unwrap()
    }

    #[test]
    fn simple_pole_orders_and_value() {
        let g = pole_grid();
        assert_eq!(detect_orders(&g, 1e-10).unwrap(), (1, 1));
        let fit = fit_parametric(&g, &ParamFitOptions::default()).unwrap();
        let v = fit.model.eval(c(0.0, 0.0), 2.0).unwrap();
        assert!((v - c(2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn constant_surface_slices_vanish() {
        let g = ParamGrid::from_fn(
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            vec![0.0, 1.0],
            |_, _| c(4.0, 0.0),
        )
        .unwrap();
        assert_eq!(slice_loewner(&g, Axis::Frequency, 0).unwrap().norm(), 0.0);
        assert_eq!(slice_loewner(&g, Axis::Parameter, 1).unwrap().norm(), 0.0);
        assert!(matches!(
            slice_loewner(&g, Axis::Parameter, 3),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn support_values_are_interpolated() {
        let fit = fit_parametric(&pole_grid(), &ParamFitOptions::default()).unwrap();
        let m = &fit.model;
        for i in 0..m.lambda.len() {
            for j in 0..m.pi.len() {
                assert_eq!(m.eval(m.lambda[i], m.pi[j]).unwrap(), m.w[(i, j)]);
            }
        }
    }

    #[test]
    fn minimal_grid_rank() {
        let g = ParamGrid::from_fn(
            vec![c(0.0, 1.0), c(0.0, 2.0), c(0.0, 3.0)],
            vec![1.0, 2.0, 3.0],
            |s, p| c(p, 0.0) / (s + 1.0),
        )
        .unwrap();
        let a = assemble_2d(&g, 1, 1).unwrap();
        assert_eq!(a.l2hat.shape(), (5, 4));
        let ns = barycentric_coeffs(&a.l2hat, 1e-10).unwrap();
        assert_eq!(ns.deficiency, 1);
    }

    #[test]
    fn real_variant_is_conjugate_symmetric() {
        let freq: Vec<C64> = (0..6)
            .flat_map(|k| [c(0.0, -0.5 - k as f64), c(0.0, 0.5 + k as f64)])
            .collect();
        let param: Vec<f64> = (0..6).map(|l| 1.0 + 0.3 * l as f64).collect();
        let g =
            ParamGrid::from_fn(freq, param, |s, p| c(p, 0.0) / (s * s + s * 0.4 + 2.0)).unwrap();
        let opts = ParamFitOptions {
            real: true,
            ..Default::default()
        };
        let fit = fit_parametric(&g, &opts).unwrap();
        assert_eq!(fit.detected, (2, 1));
        let z = c(0.3, 1.7);
        let a = fit.model.eval(z, 1.3).unwrap();
        let b = fit.model.eval(z.conj(), 1.3).unwrap();
        assert!((a - b.conj()).norm() < 1e-12 * a.norm());
        let exact = c(1.3, 0.0) / (z * z + z * 0.4 + 2.0);
        assert!((a - exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn json_round_trip() {
        let fit = fit_parametric(&pole_grid(), &ParamFitOptions::default()).unwrap();
        let back = ParametricModel::from_json(&fit.model.to_json()).unwrap();
        assert_eq!(back, fit.model);
    }
}
