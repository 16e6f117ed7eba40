//! Bilinear systems: Carleman bilinearization, generalized transfer functions
//! and Loewner realization from multivariate kernel samples.

use crate::error::{Error, Result};
use crate::linalg::{
    c, fmt_c, max_imag, numerical_rank, singular_values, to_complex, CMat, CVec, Factored, RMat,
    C64,
};
use crate::lti::projectors;
use crate::model::{BilinearModel, SINGULAR_RCOND};
use std::collections::HashMap;

/// `x' = F1 x + F2 (x (x) x) + G0 u + G1 x u`, `y = C x`.
#[derive(Debug, Clone)]
pub struct QuadraticBilinear {
    pub f1: RMat,
    pub f2: RMat,
    pub g0: RMat,
    pub g1: RMat,
    pub c: RMat,
}

impl QuadraticBilinear {
    pub fn new(f1: RMat, f2: RMat, g0: RMat, g1: RMat, c: RMat) -> Result<Self> {
        let n = f1.nrows();
        let ok = f1.ncols() == n
            && f2.shape() == (n, n * n)
            && g0.shape() == (n, 1)
            && g1.shape() == (n, n)
            && c.ncols() == n
            && c.nrows() == 1;
        if !ok {
            return Err(Error::DimensionMismatch(
                "quadratic-bilinear matrix shapes".into(),
            ));
        }
        Ok(QuadraticBilinear { f1, f2, g0, g1, c })
    }

    pub fn order(&self) -> usize {
        self.f1.nrows()
    }

    fn rhs(&self, x: &RMat, u: f64) -> RMat {
        let xx = x.kronecker(x);
        &self.f1 * x + &self.f2 * xx + (&self.g0 + &self.g1 * x) * u
    }

    /// Fixed-step RK4 from `x0`; returns the outputs and the final state.
    pub fn simulate_from(&self, x0: &RMat, u: &[f64], dt: f64) -> (Vec<f64>, Vec<RMat>) {
        let mut x = x0.clone();
        let mut y = Vec::with_capacity(u.len());
        let mut states = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            y.push((&self.c * &x)[(0, 0)]);
            states.push(x.clone());
            if i + 1 == u.len() {
                break;
            }
            let (u0, u1) = (u[i], u[i + 1]);
            let um = 0.5 * (u0 + u1);
            let k1 = self.rhs(&x, u0);
            let k2 = self.rhs(&(&x + &k1 * (0.5 * dt)), um);
            let k3 = self.rhs(&(&x + &k2 * (0.5 * dt)), um);
            let k4 = self.rhs(&(&x + &k3 * dt), u1);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        (y, states)
    }

    pub fn simulate(&self, u: &[f64], dt: f64) -> Vec<f64> {
        self.simulate_from(&RMat::zeros(self.order(), 1), u, dt).0
    }
}

/// Carleman bilinearization truncated after the quadratic terms; the state is
/// `[x; x (x) x]`.
pub fn carleman(qb: &QuadraticBilinear, order: usize) -> Result<BilinearModel> {
    if order != 2 {
        return Err(Error::UnsupportedTruncation(order));
    }
    let n = qb.order();
    let n2 = n * n;
    let id = RMat::identity(n, n);
    let kron_sum = |m: &RMat| m.kronecker(&id) + id.kronecker(m);
    let big = n + n2;
    let mut a = RMat::zeros(big, big);
    a.view_mut((0, 0), (n, n)).copy_from(&qb.f1);
    a.view_mut((0, n), (n, n2)).copy_from(&qb.f2);
    a.view_mut((n, n), (n2, n2)).copy_from(&kron_sum(&qb.f1));
    let mut nn = RMat::zeros(big, big);
    nn.view_mut((0, 0), (n, n)).copy_from(&qb.g1);
    nn.view_mut((n, 0), (n2, n))
        .copy_from(&(qb.g0.kronecker(&id) + id.kronecker(&qb.g0)));
    nn.view_mut((n, n), (n2, n2)).copy_from(&kron_sum(&qb.g1));
    let mut b = RMat::zeros(big, 1);
    b.view_mut((0, 0), (n, 1)).copy_from(&qb.g0);
    let mut cm = RMat::zeros(1, big);
    cm.view_mut((0, 0), (1, n)).copy_from(&qb.c);
    BilinearModel::new(
        to_complex(&RMat::identity(big, big)),
        to_complex(&a),
        to_complex(&nn),
        to_complex(&b),
        to_complex(&cm),
    )
}

/// `H_l(s_1..s_l) = C Phi(s_1) N Phi(s_2) ... N Phi(s_l) B`, `Phi(s) = (sE - A)^{-1}`.
pub fn eval_generalized_tf(m: &BilinearModel, points: &[C64]) -> Result<C64> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "kernel needs at least one point".into(),
        ));
    }
    let mut v = m.b.clone();
    for (k, &s) in points.iter().rev().enumerate() {
        if k > 0 {
            v = &m.n * v;
        }
        let f = Factored::new(&(&m.e * s - &m.a));
        if f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularPencil {
                point: fmt_c(s),
                rcond: f.rcond,
            });
        }
        v = f.solve(&v);
    }
    Ok((&m.c * v)[(0, 0)])
}

/// Source of generalized transfer function values.
pub trait KernelOracle {
    fn kernel(&self, points: &[C64]) -> Result<C64>;
}

impl KernelOracle for BilinearModel {
    fn kernel(&self, points: &[C64]) -> Result<C64> {
        eval_generalized_tf(self, points)
    }
}

/// Model-backed oracle with one resolvent factorization per distinct point.
pub struct FactoredKernels<'a> {
    model: &'a BilinearModel,
    factors: Vec<(C64, Factored)>,
}

impl<'a> FactoredKernels<'a> {
    pub fn new(model: &'a BilinearModel, points: &[C64]) -> Result<Self> {
        let mut factors: Vec<(C64, Factored)> = Vec::new();
        for &s in points {
            if factors.iter().any(|(z, _)| *z == s) {
                continue;
            }
            let f = Factored::new(&(&model.e * s - &model.a));
            if f.rcond < SINGULAR_RCOND {
                return Err(Error::SingularPencil {
                    point: fmt_c(s),
                    rcond: f.rcond,
                });
            }
            factors.push((s, f));
        }
        Ok(FactoredKernels { model, factors })
    }

    fn solve(&self, s: C64, v: &CMat) -> Result<CMat> {
        match self.factors.iter().find(|(z, _)| *z == s) {
            Some((_, f)) => Ok(f.solve(v)),
            None => {
                let f = Factored::new(&(&self.model.e * s - &self.model.a));
                if f.rcond < SINGULAR_RCOND {
                    return Err(Error::SingularPencil {
                        point: fmt_c(s),
                        rcond: f.rcond,
                    });
                }
                Ok(f.solve(v))
            }
        }
    }
}

impl KernelOracle for FactoredKernels<'_> {
    fn kernel(&self, points: &[C64]) -> Result<C64> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "kernel needs at least one point".into(),
            ));
        }
        let mut v = self.model.b.clone();
        for (k, &s) in points.iter().rev().enumerate() {
            if k > 0 {
                v = &self.model.n * v;
            }
            v = self.solve(s, &v)?;
        }
        Ok((&self.model.c * v)[(0, 0)])
    }
}

fn point_key(points: &[C64]) -> Vec<(u64, u64)> {
    points
        .iter()
        .map(|z| (z.re.to_bits(), z.im.to_bits()))
        .collect()
}

/// Tabulated kernel values, e.g. loaded from a measurement file.
#[derive(Debug, Clone, Default)]
pub struct KernelTable {
    map: HashMap<Vec<(u64, u64)>, C64>,
}

impl KernelTable {
    pub fn insert(&mut self, points: &[C64], value: C64) {
        self.map.insert(point_key(points), value);
    }
    pub fn len(&self) -> usize {
        self.map.len()
    }
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl KernelOracle for KernelTable {
    fn kernel(&self, points: &[C64]) -> Result<C64> {
        self.map.get(&point_key(points)).copied().ok_or_else(|| {
            Error::InsufficientData(format!(
                "no kernel value for ({})",
                points
                    .iter()
                    .map(|z| fmt_c(*z))
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
    }
}

/// One interpolation tuple: its leading point and the tuple it extends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleNode {
    pub point: C64,
    pub parent: Option<usize>,
}

/// Right tuples `(lambda_i, tail)` and left tuples `(head, mu_j)`; every tail
/// (head) is itself a tuple of the set, so the sets are closed under
/// truncation. Nested chains are the standard choice.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationTuples {
    pub right: Vec<TupleNode>,
    pub left: Vec<TupleNode>,
}

impl InterpolationTuples {
    pub fn new(right: Vec<TupleNode>, left: Vec<TupleNode>) -> Result<Self> {
        for (side, nodes) in [("right", &right), ("left", &left)] {
            for (i, t) in nodes.iter().enumerate() {
                if let Some(p) = t.parent {
                    if p >= i {
                        return Err(Error::InvalidArgument(format!(
                            "{side} tuple {i} has parent {p} not before it"
                        )));
                    }
                }
            }
        }
        for l in &left {
            for r in &right {
                if l.point == r.point {
                    return Err(Error::CoincidentPoints {
                        left: fmt_c(l.point),
                        right: fmt_c(r.point),
                    });
                }
            }
        }
        Ok(InterpolationTuples { right, left })
    }

    /// Nested chains `(lambda_i, .., lambda_1)` and `(mu_1, .., mu_j)`.
    pub fn chain(lambda: &[C64], mu: &[C64]) -> Result<Self> {
        let nodes = |pts: &[C64]| -> Vec<TupleNode> {
            pts.iter()
                .enumerate()
                .map(|(i, &point)| TupleNode {
                    point,
                    parent: if i == 0 { None } else { Some(i - 1) },
                })
                .collect()
        };
        Self::new(nodes(lambda), nodes(mu))
    }

    /// Two mirrored chains per side, interleaved as conjugate pairs, so the
    /// data can be realified. `lambda` and `mu` hold the upper-half-plane
    /// points.
    pub fn conjugate_chains(lambda: &[C64], mu: &[C64]) -> Result<Self> {
        let nodes = |pts: &[C64]| -> Vec<TupleNode> {
            let mut out = Vec::with_capacity(2 * pts.len());
            for (i, &z) in pts.iter().enumerate() {
                let parent = |o: usize| if i == 0 { None } else { Some(2 * (i - 1) + o) };
                out.push(TupleNode {
                    point: z,
                    parent: parent(0),
                });
                out.push(TupleNode {
                    point: z.conj(),
                    parent: parent(1),
                });
            }
            out
        };
        Self::new(nodes(lambda), nodes(mu))
    }

    /// Right kernel points of tuple `i`: `lambda_i` first, root last.
    pub fn right_points(&self, i: usize) -> Vec<C64> {
        let mut out = Vec::new();
        let mut k = Some(i);
        while let Some(j) = k {
            out.push(self.right[j].point);
            k = self.right[j].parent;
        }
        out
    }

    /// Left kernel points of tuple `j`: root first, `mu_j` last.
    pub fn left_points(&self, j: usize) -> Vec<C64> {
        let mut out = Vec::new();
        let mut k = Some(j);
        while let Some(i) = k {
            out.push(self.left[i].point);
            k = self.left[i].parent;
        }
        out.reverse();
        out
    }

    /// Point sequences whose kernel values a full-order realization matches.
    pub fn matched_kernels(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::new();
        for j in 0..self.left.len() {
            out.push(self.left_points(j));
        }
        for i in 0..self.right.len() {
            out.push(self.right_points(i));
        }
        for j in 0..self.left.len() {
            for i in 0..self.right.len() {
                let mut p = self.left_points(j);
                p.extend(self.right_points(i));
                out.push(p);
            }
        }
        out
    }
}

/// Bilinear Loewner quantities `LL, MM, T, V, W`.
#[derive(Debug, Clone)]
pub struct BilinearLoewnerSet {
    pub ll: CMat,
    pub mm: CMat,
    pub t: CMat,
    pub v: CVec,
    pub w: CVec,
    pub tuples: InterpolationTuples,
}

pub fn build_bilinear_set<O: KernelOracle + ?Sized>(
    tuples: &InterpolationTuples,
    oracle: &O,
) -> Result<BilinearLoewnerSet> {
    let nl = tuples.left.len();
    let nr = tuples.right.len();
    let mut memo: HashMap<(Option<usize>, Option<usize>), C64> = HashMap::new();
    let mut kernel = |j: Option<usize>, i: Option<usize>| -> Result<C64> {
        if let Some(v) = memo.get(&(j, i)) {
            return Ok(*v);
        }
        let mut pts = j.map(|j| tuples.left_points(j)).unwrap_or_default();
        pts.extend(i.map(|i| tuples.right_points(i)).unwrap_or_default());
        let v = oracle.kernel(&pts)?;
        memo.insert((j, i), v);
        Ok(v)
    };
    let mut ll = CMat::zeros(nl, nr);
    let mut mm = CMat::zeros(nl, nr);
    let mut t = CMat::zeros(nl, nr);
    let mut v = CVec::zeros(nl);
    let mut w = CVec::zeros(nr);
    for j in 0..nl {
        v[j] = kernel(Some(j), None)?;
    }
    for i in 0..nr {
        w[i] = kernel(None, Some(i))?;
    }
    for j in 0..nl {
        let mu = tuples.left[j].point;
        let pj = tuples.left[j].parent;
        for i in 0..nr {
            let lam = tuples.right[i].point;
            let pi = tuples.right[i].parent;
            let a = kernel(Some(j), pi)?;
            let b = kernel(pj, Some(i))?;
            let den = mu - lam;
            if den == c(0.0, 0.0) {
                return Err(Error::CoincidentPoints {
                    left: fmt_c(mu),
                    right: fmt_c(lam),
                });
            }
            ll[(j, i)] = (a - b) / den;
            mm[(j, i)] = (mu * a - lam * b) / den;
            t[(j, i)] = kernel(Some(j), Some(i))?;
        }
    }
    Ok(BilinearLoewnerSet {
        ll,
        mm,
        t,
        v,
        w,
        tuples: tuples.clone(),
    })
}

fn model_from(e: CMat, a: CMat, n: CMat, b: CMat, cm: CMat, real: bool) -> Result<BilinearModel> {
    let strip = |m: CMat| if real { m.map(|x| c(x.re, 0.0)) } else { m };
    BilinearModel::new(strip(e), strip(a), strip(n), strip(b), strip(cm))
}

impl BilinearLoewnerSet {
    pub fn is_real(&self) -> bool {
        [&self.ll, &self.mm, &self.t]
            .iter()
            .all(|m| max_imag(*m) == 0.0)
            && max_imag(&self.v) == 0.0
            && max_imag(&self.w) == 0.0
    }

    /// Normalized singular values of `[LL, MM]` and the numerical rank.
    pub fn order(&self, tol: f64) -> Result<(usize, Vec<f64>)> {
        let (nl, nr) = self.ll.shape();
        let mut row = CMat::zeros(nl, 2 * nr);
        row.columns_mut(0, nr).copy_from(&self.ll);
        row.columns_mut(nr, nr).copy_from(&self.mm);
        let s = singular_values(&row)?;
        Ok((numerical_rank(&s, tol), crate::linalg::normalized(&s)))
    }

    /// Unitary change of basis pairing conjugate tuples, giving real matrices.
    pub fn realify(&self) -> Result<BilinearLoewnerSet> {
        let tr = conj_transform(&self.tuples.right)?;
        let tl = conj_transform(&self.tuples.left)?;
        let tla = tl.adjoint();
        let strip = |m: CMat| m.map(|x| c(x.re, 0.0));
        Ok(BilinearLoewnerSet {
            ll: strip(&tla * &self.ll * &tr),
            mm: strip(&tla * &self.mm * &tr),
            t: strip(&tla * &self.t * &tr),
            v: strip(&tla * CMat::from_column_slice(self.v.len(), 1, self.v.as_slice()))
                .column(0)
                .into_owned(),
            w: strip(CMat::from_row_slice(1, self.w.len(), self.w.as_slice()) * &tr)
                .row(0)
                .transpose(),
            tuples: self.tuples.clone(),
        })
    }
}

fn conj_transform(nodes: &[TupleNode]) -> Result<CMat> {
    let n = nodes.len();
    let mut partner = vec![usize::MAX; n];
    for i in 0..n {
        if partner[i] != usize::MAX {
            continue;
        }
        let z = nodes[i].point;
        let target = nodes[i].parent.map(|p| partner[p]);
        if z.im == 0.0 && target == nodes[i].parent {
            partner[i] = i;
            continue;
        }
        let j = (i + 1..n)
            .find(|&j| {
                partner[j] == usize::MAX && nodes[j].point == z.conj() && nodes[j].parent == target
            })
            .ok_or_else(|| {
                Error::NotConjugateClosed(format!(
                    "tuple led by {} has no conjugate mirror",
                    fmt_c(z)
                ))
            })?;
        partner[i] = j;
        partner[j] = i;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMat::zeros(n, n);
    let mut done = vec![false; n];
    let mut col = 0;
    for i in 0..n {
        if done[i] {
            continue;
        }
        let j = partner[i];
        done[i] = true;
        done[j] = true;
        if j == i {
            t[(i, col)] = c(1.0, 0.0);
            col += 1;
            continue;
        }
        let (lo, hi) = if nodes[i].point.im < 0.0 {
            (i, j)
        } else {
            (j, i)
        };
        t[(lo, col)] = c(s, 0.0);
        t[(hi, col)] = c(s, 0.0);
        t[(lo, col + 1)] = c(0.0, -s);
        t[(hi, col + 1)] = c(0.0, s);
        col += 2;
    }
    Ok(t)
}

/// Full-order realization `E = -LL`, `A = -MM`, `N = T`, `B = V`, `C = W^T`.
pub fn realize_bilinear(set: &BilinearLoewnerSet) -> Result<BilinearModel> {
    let k = set.ll.nrows();
    if set.ll.ncols() != k {
        return Err(Error::DimensionMismatch(
            "full realization needs as many left as right tuples".into(),
        ));
    }
    let f = Factored::new(&set.ll);
    if f.rcond < SINGULAR_RCOND {
        return Err(Error::SingularLoewner(format!("rcond {:.3e}", f.rcond)));
    }
    model_from(
        -set.ll.clone(),
        -set.mm.clone(),
        set.t.clone(),
        CMat::from_column_slice(k, 1, set.v.as_slice()),
        CMat::from_row_slice(1, k, set.w.as_slice()),
        set.is_real(),
    )
}

/// Order-`r` model projected with the dominant singular subspaces of
/// `[LL, MM]` and `[LL; MM]`.
pub fn reduce_bilinear(set: &BilinearLoewnerSet, r: usize) -> Result<BilinearModel> {
    let (y, x) = projectors(&set.ll, &set.mm, r)?;
    let yh = y.adjoint();
    let nl = set.v.len();
    let nr = set.w.len();
    let m = model_from(
        -(&yh * &set.ll * &x),
        -(&yh * &set.mm * &x),
        &yh * &set.t * &x,
        &yh * CMat::from_column_slice(nl, 1, set.v.as_slice()),
        CMat::from_row_slice(1, nr, set.w.as_slice()) * &x,
        set.is_real(),
    )?;
    let f = Factored::new(&m.e);
    if f.rcond < SINGULAR_RCOND {
        return Err(Error::SingularLoewner(format!(
            "projected E has rcond {:.3e}",
            f.rcond
        )));
    }
    Ok(m)
}

/// Default right/left chain points: `k` log-spaced frequencies on each side
/// of the imaginary axis range `[lo, hi]`, interleaved.
pub fn default_points(k: usize, lo: f64, hi: f64) -> (Vec<C64>, Vec<C64>) {
    let w = crate::linalg::logspace(lo, hi, 2 * k);
    let lam = (0..k).map(|i| c(0.0, w[2 * i])).collect();
    let mu = (0..k).map(|i| c(0.0, w[2 * i + 1])).collect();
    (lam, mu)
}

fn resolvent(m: &BilinearModel, s: C64) -> Result<Factored> {
    let f = Factored::new(&(&m.e * s - &m.a));
    if f.rcond < SINGULAR_RCOND {
        return Err(Error::SingularPencil {
            point: fmt_c(s),
            rcond: f.rcond,
        });
    }
    Ok(f)
}

/// Generalized reachability matrix: column `i` is `Phi(lambda_i) N r_parent`,
/// or `Phi(lambda_i) B` for a root tuple.
pub fn generalized_reachability(m: &BilinearModel, tuples: &InterpolationTuples) -> Result<CMat> {
    let n = m.order();
    let mut r = CMat::zeros(n, tuples.right.len());
    for (i, t) in tuples.right.iter().enumerate() {
        let rhs = match t.parent {
            Some(p) => &m.n * r.column(p),
            None => m.b.column(0).into_owned(),
        };
        let col = resolvent(m, t.point)?.solve(&CMat::from_column_slice(n, 1, rhs.as_slice()));
        r.set_column(i, &col.column(0));
    }
    Ok(r)
}

/// Generalized observability matrix: row `j` is `o_parent N Phi(mu_j)`, or
/// `C Phi(mu_j)` for a root tuple.
pub fn generalized_observability(m: &BilinearModel, tuples: &InterpolationTuples) -> Result<CMat> {
    let n = m.order();
    let mut o = CMat::zeros(tuples.left.len(), n);
    for (j, t) in tuples.left.iter().enumerate() {
        let lhs = match t.parent {
            Some(p) => o.row(p) * &m.n,
            None => m.c.row(0).into_owned(),
        };
        let f = Factored::new(&(&m.e * t.point - &m.a).transpose());
        if f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularPencil {
                point: fmt_c(t.point),
                rcond: f.rcond,
            });
        }
        let row = f
            .solve(&CMat::from_column_slice(n, 1, lhs.as_slice()))
            .transpose();
        o.set_row(j, &row.row(0));
    }
    Ok(o)
}

/// Relative residuals of `A R + N R S_R + B e^T = E R Lambda` and
/// `O A + S_L O N + e C = M O E`, where `S_R`/`S_L` link tuples to their
/// parents and `e` marks root tuples.
pub fn sylvester_residuals(m: &BilinearModel, tuples: &InterpolationTuples) -> Result<(f64, f64)> {
    let r = generalized_reachability(m, tuples)?;
    let o = generalized_observability(m, tuples)?;
    let (kr, kl) = (tuples.right.len(), tuples.left.len());
    let mut sr = CMat::zeros(kr, kr);
    let mut er = CMat::zeros(1, kr);
    let lam = CMat::from_diagonal(&CVec::from_iterator(
        kr,
        tuples.right.iter().map(|t| t.point),
    ));
    for (i, t) in tuples.right.iter().enumerate() {
        match t.parent {
            Some(p) => sr[(p, i)] = c(1.0, 0.0),
            None => er[(0, i)] = c(1.0, 0.0),
        }
    }
    let mut sl = CMat::zeros(kl, kl);
    let mut el = CMat::zeros(kl, 1);
    let mu = CMat::from_diagonal(&CVec::from_iterator(
        kl,
        tuples.left.iter().map(|t| t.point),
    ));
    for (j, t) in tuples.left.iter().enumerate() {
        match t.parent {
            Some(p) => sl[(j, p)] = c(1.0, 0.0),
            None => el[(j, 0)] = c(1.0, 0.0),
        }
    }
    let lhs_r = &m.a * &r + &m.n * &r * &sr + &m.b * &er;
    let rhs_r = &m.e * &r * &lam;
    let lhs_l = &o * &m.a + &sl * &o * &m.n + &el * &m.c;
    let rhs_l = &mu * &o * &m.e;
    let rel = |x: &CMat, y: &CMat| (x - y).norm() / y.norm().max(f64::MIN_POSITIVE);
    Ok((rel(&lhs_r, &rhs_r), rel(&lhs_l, &rhs_l)))
}
