//! Dense linear algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Dim, Matrix, Schur, Storage, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| c(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|x| x.re)
}

pub fn max_imag<R: Dim, C: Dim, S: Storage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.im.abs()))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn fmt_c(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Sorted (descending) thin SVD: `m = u * diag(s) * v^H`.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Result<Svd> {
    let (r, k) = m.shape();
    let p = r.min(k);
    if p == 0 {
        return Ok(Svd {
            u: CMat::zeros(r, 0),
            s: vec![],
            v: CMat::zeros(k, 0),
        });
    }
    let (u, v, sv) = if max_imag(m) == 0.0 {
        let dec = SVD::try_new(real_part(m), true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::NoConvergence("svd".into()))?;
        (
            to_complex(&dec.u.unwrap()),
            to_complex(&dec.v_t.unwrap().transpose()),
            dec.singular_values,
        )
    } else {
        let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::NoConvergence("svd".into()))?;
        (
            dec.u.unwrap(),
            dec.v_t.unwrap().adjoint(),
            dec.singular_values,
        )
    };
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| {
        sv[b]
            .partial_cmp(&sv[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut us = CMat::zeros(r, p);
    let mut vs = CMat::zeros(k, p);
    let mut s = Vec::with_capacity(p);
    for (j, &i) in idx.iter().enumerate() {
        us.set_column(j, &u.column(i));
        vs.set_column(j, &v.column(i));
        s.push(sv[i]);
    }
    Ok(Svd { u: us, s, v: vs })
}

/// Right singular vectors of `m` including the full null space.
pub fn svd_full_right(m: &CMat) -> Result<Svd> {
    let (r, k) = m.shape();
    if r >= k {
        return svd(m);
    }
    let mut padded = CMat::zeros(k, k);
    padded.view_mut((0, 0), (r, k)).copy_from(m);
    svd(&padded)
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let (r, k) = m.shape();
    if r.min(k) == 0 {
        return Ok(vec![]);
    }
    let sv = if max_imag(m) == 0.0 {
        SVD::try_new(real_part(m), false, false, f64::EPSILON, 0).map(|d| d.singular_values)
    } else {
        SVD::try_new(m.clone(), false, false, f64::EPSILON, 0).map(|d| d.singular_values)
    };
    let sv = sv.ok_or_else(|| Error::NoConvergence("svd".into()))?;
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

pub fn normalized(s: &[f64]) -> Vec<f64> {
    match s.first() {
        Some(&s0) if s0 > 0.0 => s.iter().map(|x| x / s0).collect(),
        _ => vec![0.0; s.len()],
    }
}

/// Number of singular values with `s_k / s_0 > tol`.
pub fn numerical_rank(s: &[f64], tol: f64) -> usize {
    match s.first() {
        Some(&s0) if s0 > 0.0 => s.iter().filter(|&&x| x / s0 > tol).count(),
        _ => 0,
    }
}

pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factorization with a 1-norm reciprocal condition estimate.
pub struct Factored {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    pub rcond: f64,
}

impl Factored {
    pub fn new(a: &CMat) -> Factored {
        let n = a.nrows();
        if n == 0 {
            return Factored {
                lu: a.clone().lu(),
                rcond: 1.0,
            };
        }
        let lu = a.clone().lu();
        let anorm = norm1(a);
        let rcond = match lu.try_inverse() {
            Some(inv) if anorm > 0.0 => {
                let r = 1.0 / (anorm * norm1(&inv));
                if r.is_finite() {
                    r
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        Factored { lu, rcond }
    }

    pub fn solve(&self, b: &CMat) -> CMat {
        if b.nrows() == 0 {
            return b.clone();
        }
        self.lu
            .solve(b)
            .unwrap_or_else(|| CMat::from_element(b.nrows(), b.ncols(), c(f64::NAN, 0.0)))
    }

    pub fn solve_vec(&self, b: &CVec) -> CVec {
        if b.nrows() == 0 {
            return b.clone();
        }
        self.lu
            .solve(b)
            .unwrap_or_else(|| CVec::from_element(b.nrows(), c(f64::NAN, 0.0)))
    }
}

pub fn rcond(a: &CMat) -> f64 {
    Factored::new(a).rcond
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(a.clone());
    }
    a.clone().lu().try_inverse()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("schur".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenEig {
    Finite(C64),
    Infinite,
}

impl GenEig {
    pub fn finite(&self) -> Option<C64> {
        match self {
            GenEig::Finite(z) => Some(*z),
            GenEig::Infinite => None,
        }
    }
}

/// Eigenvalues of the pencil `(A, E)`, i.e. roots of `det(zE - A)`.
///
/// Computed from a shifted spectral transformation `(A - sE)^{-1} E`; small
/// eigenvalues of the transformed matrix map to infinity.
pub fn pencil_eigenvalues(a: &CMat, e: &CMat, inf_tol: f64) -> Result<Vec<GenEig>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let scale = {
        let na = a.norm();
        let ne = e.norm();
        if ne > 0.0 && na > 0.0 {
            na / ne
        } else {
            1.0
        }
    };
    let shifts = [
        c(0.0, 0.0),
        c(0.37, 0.61),
        c(-0.83, 0.29),
        c(1.13, -0.47),
        c(-0.21, -1.07),
        c(2.3, 1.7),
    ];
    let mut best: Option<(C64, Factored)> = None;
    for s in shifts {
        let sigma = s * scale;
        let f = Factored::new(&(a - e * sigma));
        if best.as_ref().is_none_or(|(_, b)| f.rcond > b.rcond) {
            best = Some((sigma, f));
        }
        if best.as_ref().unwrap().1.rcond > 1e-3 {
            break;
        }
    }
    let (sigma, f) = best.unwrap();
    if f.rcond < 1e-14 {
        return Err(Error::PencilNotRegular(format!(
            "no regular shift found (rcond {:.3e})",
            f.rcond
        )));
    }
    let t = f.solve(e);
    let theta = eigenvalues(&t)?;
    let tmax = theta.iter().fold(0.0f64, |acc, x| acc.max(x.norm()));
    // Defective infinite eigenvalues split like sqrt(eps), so the cutoff on the
    // transformed eigenvalues is sqrt(inf_tol); a regular E has none at all.
    let e_regular = rcond(e) > inf_tol;
    let cutoff = inf_tol.sqrt();
    let mut out: Vec<GenEig> = theta
        .iter()
        .map(|&th| {
            if tmax == 0.0 || (!e_regular && th.norm() <= cutoff * tmax) {
                GenEig::Infinite
            } else {
                GenEig::Finite(sigma + th.inv())
            }
        })
        .collect();
    out.sort_by(|x, y| match (x, y) {
        (GenEig::Finite(p), GenEig::Finite(q)) => (p.re, p.im)
            .partial_cmp(&(q.re, q.im))
            .unwrap_or(std::cmp::Ordering::Equal),
        (GenEig::Finite(_), GenEig::Infinite) => std::cmp::Ordering::Less,
        (GenEig::Infinite, GenEig::Finite(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });
    Ok(out)
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.log10(), b.log10());
    (0..n)
        .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Total order used throughout for sorting sample points.
pub fn cmp_point(a: &C64, b: &C64) -> std::cmp::Ordering {
    (a.im, a.re)
        .partial_cmp(&(b.im, b.re))
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub fn col_vec(v: &[C64]) -> CVec {
    CVec::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorted_and_reconstructs() {
        let m = CMat::from_fn(4, 3, |i, j| {
            c((i * 3 + j) as f64 + 0.5, (i as f64) - (j as f64))
        });
        let d = svd(&m).unwrap();
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        let rec = &d.u
            * CMat::from_diagonal(&CVec::from_iterator(3, d.s.iter().map(|&x| c(x, 0.0))))
            * d.v.adjoint();
        assert!((rec - m).norm() < 1e-12);
    }

    #[test]
    fn pencil_eigenvalues_with_infinite() {
        // det(zE - A) with E = diag(1, 0), A = diag(-1, 1) has eigenvalues {-1, inf}.
        let e = to_complex(&RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let a = to_complex(&RMat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        let ev = pencil_eigenvalues(&a, &e, 1e-10).unwrap();
        assert!((ev[0].finite().unwrap() - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(ev[1], GenEig::Infinite);
    }

    #[test]
    fn rank_helpers() {
        assert_eq!(numerical_rank(&[1.0, 1e-3, 1e-12], 1e-10), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-10), 0);
        let l = logspace(1e-3, 1e3, 7);
        assert!((l[3] - 1.0).abs() < 1e-12);
    }
}
