//! Loewner-matrix identification of linear time-invariant systems from
//! tangential frequency-domain data.

use crate::error::{Error, Result};
use crate::linalg::{
    c, cmp_point, fmt_c, max_imag, numerical_rank, pencil_eigenvalues, singular_values, svd,
    svd_full_right, CMat, CVec, Factored, GenEig, C64,
};
use crate::model::{conjugate_close, DescriptorModel, FrequencySample, TimeKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const INFINITE_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RightTangent {
    pub lambda: C64,
    pub r: CVec,
    pub w: CVec,
}

/// Left datum `l^T H(mu) = v^T`; `l` and `v` are stored as column vectors.
#[derive(Debug, Clone)]
pub struct LeftTangent {
    pub mu: C64,
    pub l: CVec,
    pub v: CVec,
}

#[derive(Debug, Clone)]
pub struct TangentialDataSet {
    pub right: Vec<RightTangent>,
    pub left: Vec<LeftTangent>,
    pub time: TimeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionPolicy {
    /// Sort by (imag, real) and alternate, keeping conjugate pairs together.
    Alternating,
    /// The first `n` samples are right data, the rest left data.
    AsGiven(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionPolicy {
    CyclicUnit,
    Random { seed: u64 },
}

impl TangentialDataSet {
    pub fn inputs(&self) -> usize {
        self.right
            .first()
            .map(|t| t.r.len())
            .or(self.left.first().map(|t| t.v.len()))
            .unwrap_or(0)
    }
    pub fn outputs(&self) -> usize {
        self.right
            .first()
            .map(|t| t.w.len())
            .or(self.left.first().map(|t| t.l.len()))
            .unwrap_or(0)
    }
    pub fn points(&self) -> Vec<C64> {
        self.right
            .iter()
            .map(|t| t.lambda)
            .chain(self.left.iter().map(|t| t.mu))
            .collect()
    }
    pub fn with_time(mut self, time: TimeKind) -> Self {
        self.time = time;
        self
    }

    /// Scalar data: right points/values and left points/values.
    pub fn siso(right: &[(C64, C64)], left: &[(C64, C64)]) -> Self {
        let one = CVec::from_element(1, c(1.0, 0.0));
        TangentialDataSet {
            right: right
                .iter()
                .map(|&(lambda, w)| RightTangent {
                    lambda,
                    r: one.clone(),
                    w: CVec::from_element(1, w),
                })
                .collect(),
            left: left
                .iter()
                .map(|&(mu, v)| LeftTangent {
                    mu,
                    l: one.clone(),
                    v: CVec::from_element(1, v),
                })
                .collect(),
            time: TimeKind::Continuous,
        }
    }

    /// Data with the feed-through `d` removed from every response.
    pub fn subtract_feedthrough(&self, d: &CMat) -> Self {
        let mut out = self.clone();
        for t in &mut out.right {
            t.w = &t.w - d * &t.r;
        }
        for t in &mut out.left {
            t.v = &t.v - d.transpose() * &t.l;
        }
        out
    }
}

/// Groups sorted sample indices into conjugate-pair units `(lower, upper)` and
/// real or unpaired singletons.
fn conjugate_units(samples: &[FrequencySample]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| cmp_point(&samples[a].point, &samples[b].point));
    let mut used = vec![false; samples.len()];
    let mut units: Vec<(C64, Vec<usize>)> = Vec::new();
    for &i in &idx {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = samples[i].point;
        if z.im != 0.0 {
            if let Some(&j) = idx
                .iter()
                .find(|&&j| !used[j] && samples[j].point == z.conj())
            {
                used[j] = true;
                let (lo, hi) = if z.im < 0.0 { (i, j) } else { (j, i) };
                units.push((samples[hi].point, vec![lo, hi]));
                continue;
            }
        }
        units.push((c(z.re, z.im.abs()), vec![i]));
    }
    units.sort_by(|a, b| cmp_point(&a.0, &b.0));
    units.into_iter().map(|u| u.1).collect()
}

/// Splits samples into right and left tangential data.
pub fn partition_data(
    samples: &[FrequencySample],
    policy: &PartitionPolicy,
    directions: DirectionPolicy,
) -> Result<TangentialDataSet> {
    if samples.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: samples.len(),
        });
    }
    let (p, m) = samples[0].value.shape();
    if samples.iter().any(|s| s.value.shape() != (p, m)) {
        return Err(Error::DimensionMismatch(
            "samples have different shapes".into(),
        ));
    }
    let (right_units, left_units): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match policy {
        PartitionPolicy::Alternating => {
            let units = conjugate_units(samples);
            let mut r = Vec::new();
            let mut l = Vec::new();
            for (k, u) in units.into_iter().enumerate() {
                if k % 2 == 0 {
                    r.push(u)
                } else {
                    l.push(u)
                }
            }
            (r, l)
        }
        PartitionPolicy::AsGiven(n) => {
            if *n == 0 || *n >= samples.len() {
                return Err(Error::TooFewPoints { needed: 1, got: 0 });
            }
            (
                (0..*n).map(|i| vec![i]).collect(),
                (*n..samples.len()).map(|i| vec![i]).collect(),
            )
        }
    };
    if right_units.is_empty() || left_units.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut rng = match directions {
        DirectionPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        DirectionPolicy::CyclicUnit => None,
    };
    let mut direction = |k: usize, len: usize| -> CVec {
        match rng.as_mut() {
            None => {
                let mut v = CVec::zeros(len);
                v[k % len] = c(1.0, 0.0);
                v
            }
            Some(g) => {
                let v = CVec::from_fn(len, |_, _| c(StandardNormal.sample(g), 0.0));
                let n = v.norm();
                v / c(n, 0.0)
            }
        }
    };
    let mut right = Vec::new();
    for (k, unit) in right_units.iter().enumerate() {
        let r = direction(k, m);
        for &i in unit {
            right.push(RightTangent {
                lambda: samples[i].point,
                w: &samples[i].value * &r,
                r: r.clone(),
            });
        }
    }
    let mut left = Vec::new();
    for (k, unit) in left_units.iter().enumerate() {
        let l = direction(k, p);
        for &i in unit {
            left.push(LeftTangent {
                mu: samples[i].point,
                v: samples[i].value.transpose() * &l,
                l: l.clone(),
            });
        }
    }
    Ok(TangentialDataSet {
        right,
        left,
        time: TimeKind::Continuous,
    })
}

/// Tangential data in matrix form `(Lambda, R, W)`, `(M, L, V)`, possibly after a
/// block-unitary change of basis. Rows of `l` and `v` are the left directions
/// and responses.
#[derive(Debug, Clone)]
pub struct StructuredData {
    pub lambda: CMat,
    pub r: CMat,
    pub w: CMat,
    pub mu: CMat,
    pub l: CMat,
    pub v: CMat,
    pub right_blocks: Vec<std::ops::Range<usize>>,
    pub left_blocks: Vec<std::ops::Range<usize>>,
    /// Right and left basis changes relative to `source`.
    pub t_right: CMat,
    pub t_left: CMat,
    pub source: TangentialDataSet,
}

impl StructuredData {
    pub fn diagonal(data: &TangentialDataSet) -> Self {
        let nr = data.right.len();
        let nl = data.left.len();
        let (p, m) = (data.outputs(), data.inputs());
        StructuredData {
            lambda: CMat::from_diagonal(&CVec::from_iterator(
                nr,
                data.right.iter().map(|t| t.lambda),
            )),
            r: CMat::from_fn(m, nr, |i, j| data.right[j].r[i]),
            w: CMat::from_fn(p, nr, |i, j| data.right[j].w[i]),
            mu: CMat::from_diagonal(&CVec::from_iterator(nl, data.left.iter().map(|t| t.mu))),
            l: CMat::from_fn(nl, p, |j, i| data.left[j].l[i]),
            v: CMat::from_fn(nl, m, |j, i| data.left[j].v[i]),
            right_blocks: (0..nr).map(|i| i..i + 1).collect(),
            left_blocks: (0..nl).map(|i| i..i + 1).collect(),
            t_right: CMat::identity(nr, nr),
            t_left: CMat::identity(nl, nl),
            source: data.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        [&self.lambda, &self.r, &self.w, &self.mu, &self.l, &self.v]
            .iter()
            .all(|m| max_imag(m) == 0.0)
    }
}

/// Unitary basis change mapping each conjugate pair to a real 2x2 block.
/// Returns the transform and its block ranges.
fn realifying_transform(
    points: &[C64],
    dirs: &[&CVec],
    vals: &[&CVec],
) -> Result<(CMat, Vec<std::ops::Range<usize>>)> {
    let n = points.len();
    let mut t = CMat::zeros(n, n);
    let mut used = vec![false; n];
    let mut blocks = Vec::new();
    let mut col = 0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let close = |a: &CVec, b: &CVec| (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1e-300);
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = points[i];
        if z.im == 0.0 {
            if max_imag(dirs[i]) != 0.0 || max_imag(vals[i]) > 1e-12 * vals[i].norm() {
                return Err(Error::NotConjugateClosed(format!(
                    "real point {} carries complex data",
                    fmt_c(z)
                )));
            }
            t[(i, col)] = c(1.0, 0.0);
            blocks.push(col..col + 1);
            col += 1;
            continue;
        }
        let j = (0..n)
            .find(|&j| !used[j] && points[j] == z.conj())
            .ok_or_else(|| {
                Error::NotConjugateClosed(format!("missing conjugate of {}", fmt_c(z)))
            })?;
        if !close(dirs[j], &dirs[i].conjugate()) || !close(vals[j], &vals[i].conjugate()) {
            return Err(Error::NotConjugateClosed(format!(
                "data at {} is not the conjugate mirror",
                fmt_c(z)
            )));
        }
        used[j] = true;
        let (lo, hi) = if z.im < 0.0 { (i, j) } else { (j, i) };
        t[(lo, col)] = c(s, 0.0);
        t[(hi, col)] = c(s, 0.0);
        t[(lo, col + 1)] = c(0.0, -s);
        t[(hi, col + 1)] = c(0.0, s);
        blocks.push(col..col + 2);
        col += 2;
    }
    Ok((t, blocks))
}

type Blocks = Vec<std::ops::Range<usize>>;

fn realify_transforms(data: &TangentialDataSet) -> Result<(CMat, Blocks, CMat, Blocks)> {
    let rp: Vec<C64> = data.right.iter().map(|t| t.lambda).collect();
    let rd: Vec<&CVec> = data.right.iter().map(|t| &t.r).collect();
    let rv: Vec<&CVec> = data.right.iter().map(|t| &t.w).collect();
    let (tr, rb) = realifying_transform(&rp, &rd, &rv)?;
    let lp: Vec<C64> = data.left.iter().map(|t| t.mu).collect();
    let ld: Vec<&CVec> = data.left.iter().map(|t| &t.l).collect();
    let lv: Vec<&CVec> = data.left.iter().map(|t| &t.v).collect();
    let (tl, lb) = realifying_transform(&lp, &ld, &lv)?;
    Ok((tr, rb, tl, lb))
}

fn strip_imag(m: &CMat) -> CMat {
    m.map(|x| c(x.re, 0.0))
}

/// Real block-diagonal form of conjugate-closed data.
pub fn realify(data: &TangentialDataSet) -> Result<StructuredData> {
    let (tr, rb, tl, lb) = realify_transforms(data)?;
    let d = StructuredData::diagonal(data);
    let tla = tl.adjoint();
    Ok(StructuredData {
        lambda: strip_imag(&(tr.adjoint() * &d.lambda * &tr)),
        r: strip_imag(&(&d.r * &tr)),
        w: strip_imag(&(&d.w * &tr)),
        mu: strip_imag(&(&tla * &d.mu * &tl)),
        l: strip_imag(&(&tla * &d.l)),
        v: strip_imag(&(&tla * &d.v)),
        right_blocks: rb,
        left_blocks: lb,
        t_right: tr,
        t_left: tl,
        source: data.clone(),
    })
}

/// Loewner pencil `(LL, MM)` with the data matrices `V` (rows `v_j^T`) and `W`
/// (columns `w_i`).
#[derive(Debug, Clone)]
pub struct LoewnerPencil {
    pub ll: CMat,
    pub mm: CMat,
    pub v: CMat,
    pub w: CMat,
    pub data: StructuredData,
}

impl LoewnerPencil {
    pub fn is_real(&self) -> bool {
        self.data.is_real() && max_imag(&self.ll) == 0.0 && max_imag(&self.mm) == 0.0
    }
}

/// Solves `M X - X Lam = rhs` for small blocks.
fn small_sylvester(mu: &CMat, lam: &CMat, rhs: &CMat) -> Option<CMat> {
    let (a, b) = rhs.shape();
    if a == 1 && b == 1 {
        let den = mu[(0, 0)] - lam[(0, 0)];
        if den.norm() <= 1e-14 * mu[(0, 0)].norm().max(lam[(0, 0)].norm()).max(1e-300) {
            return None;
        }
        return Some(CMat::from_element(1, 1, rhs[(0, 0)] / den));
    }
    let k = CMat::identity(b, b).kronecker(mu) - lam.transpose().kronecker(&CMat::identity(a, a));
    let f = Factored::new(&k);
    if f.rcond < 1e-14 {
        return None;
    }
    let x = f.solve(&CMat::from_column_slice(a * b, 1, rhs.as_slice()));
    Some(CMat::from_column_slice(a, b, x.as_slice()))
}

pub fn build_pencil_structured(sd: &StructuredData) -> Result<LoewnerPencil> {
    let nr = sd.lambda.nrows();
    let nl = sd.mu.nrows();
    let mut ll = CMat::zeros(nl, nr);
    let mut mm = CMat::zeros(nl, nr);
    for lb in &sd.left_blocks {
        let mu = sd
            .mu
            .view((lb.start, lb.start), (lb.len(), lb.len()))
            .into_owned();
        let vj = sd.v.rows(lb.start, lb.len()).into_owned();
        let lj = sd.l.rows(lb.start, lb.len()).into_owned();
        for rb in &sd.right_blocks {
            let lam = sd
                .lambda
                .view((rb.start, rb.start), (rb.len(), rb.len()))
                .into_owned();
            let ri = sd.r.columns(rb.start, rb.len()).into_owned();
            let wi = sd.w.columns(rb.start, rb.len()).into_owned();
            let rhs_l = &vj * &ri - &lj * &wi;
            let rhs_m = &mu * &vj * &ri - &lj * &wi * &lam;
            let coincide = || {
                let left = sd
                    .source
                    .left
                    .get(lb.start)
                    .map(|t| t.mu)
                    .unwrap_or_default();
                let right = sd
                    .source
                    .right
                    .get(rb.start)
                    .map(|t| t.lambda)
                    .unwrap_or_default();
                Error::CoincidentPoints {
                    left: fmt_c(left),
                    right: fmt_c(right),
                }
            };
            let x = small_sylvester(&mu, &lam, &rhs_l).ok_or_else(coincide)?;
            let y = small_sylvester(&mu, &lam, &rhs_m).ok_or_else(coincide)?;
            ll.view_mut((lb.start, rb.start), (lb.len(), rb.len()))
                .copy_from(&x);
            mm.view_mut((lb.start, rb.start), (lb.len(), rb.len()))
                .copy_from(&y);
        }
    }
    if sd.is_real() {
        ll = strip_imag(&ll);
        mm = strip_imag(&mm);
    }
    Ok(LoewnerPencil {
        ll,
        mm,
        v: sd.v.clone(),
        w: sd.w.clone(),
        data: sd.clone(),
    })
}

/// Loewner and shifted Loewner matrices of point-wise tangential data.
pub fn build_pencil(data: &TangentialDataSet) -> Result<LoewnerPencil> {
    build_pencil_structured(&StructuredData::diagonal(data))
}

/// Applies the realifying basis change to a pencil built from diagonal data.
pub fn realify_pencil(p: &LoewnerPencil) -> Result<LoewnerPencil> {
    if p.data
        .right_blocks
        .iter()
        .chain(&p.data.left_blocks)
        .any(|b| b.len() > 1)
    {
        return Ok(p.clone());
    }
    let sd = realify(&p.data.source)?;
    let tla = sd.t_left.adjoint();
    let tr = &sd.t_right;
    Ok(LoewnerPencil {
        ll: strip_imag(&(&tla * &p.ll * tr)),
        mm: strip_imag(&(&tla * &p.mm * tr)),
        v: strip_imag(&(&tla * &p.v)),
        w: strip_imag(&(&p.w * tr)),
        data: sd,
    })
}

fn rel_residual(res: &CMat, parts: &[&CMat]) -> f64 {
    let scale: f64 = parts.iter().map(|m| m.norm()).sum();
    if scale == 0.0 {
        res.norm()
    } else {
        res.norm() / scale
    }
}

/// Relative Frobenius residuals of the two Sylvester equations
/// `M LL - LL Lam = V R - L W` and `M MM - MM Lam = M V R - L W Lam`.
pub fn sylvester_residual(p: &LoewnerPencil) -> (f64, f64) {
    let d = &p.data;
    let a1 = &d.mu * &p.ll;
    let b1 = &p.ll * &d.lambda;
    let c1 = &p.v * &d.r;
    let e1 = &d.l * &p.w;
    let r1 = &a1 - &b1 - (&c1 - &e1);
    let a2 = &d.mu * &p.mm;
    let b2 = &p.mm * &d.lambda;
    let c2 = &d.mu * &p.v * &d.r;
    let e2 = &d.l * &p.w * &d.lambda;
    let r2 = &a2 - &b2 - (&c2 - &e2);
    (
        rel_residual(&r1, &[&a1, &b1, &c1, &e1]),
        rel_residual(&r2, &[&a2, &b2, &c2, &e2]),
    )
}

#[derive(Debug, Clone)]
pub struct OrderReport {
    /// Singular values of `[LL, MM]`, `[LL; MM]` and `LL` (descending, unnormalized).
    pub sv_row: Vec<f64>,
    pub sv_col: Vec<f64>,
    pub sv_ll: Vec<f64>,
    pub r: usize,
    pub nu: usize,
    pub tol: f64,
    /// Data points where `rank(z LL - MM) != r`, with the observed rank.
    pub rank_violations: Vec<(C64, usize)>,
}

impl OrderReport {
    pub fn normalized_row(&self) -> Vec<f64> {
        crate::linalg::normalized(&self.sv_row)
    }
}

pub fn detect_order(p: &LoewnerPencil, tol: f64) -> Result<OrderReport> {
    let (nl, nr) = p.ll.shape();
    let mut row = CMat::zeros(nl, 2 * nr);
    row.columns_mut(0, nr).copy_from(&p.ll);
    row.columns_mut(nr, nr).copy_from(&p.mm);
    let mut col = CMat::zeros(2 * nl, nr);
    col.rows_mut(0, nl).copy_from(&p.ll);
    col.rows_mut(nl, nl).copy_from(&p.mm);
    let sv_row = singular_values(&row)?;
    let sv_col = singular_values(&col)?;
    let sv_ll = singular_values(&p.ll)?;
    let r = numerical_rank(&sv_row, tol);
    let negligible = sv_ll
        .first()
        .is_none_or(|&s| s <= tol * sv_row.first().copied().unwrap_or(0.0));
    let nu = if negligible {
        0
    } else {
        numerical_rank(&sv_ll, tol)
    };
    let mut rank_violations = Vec::new();
    let real = max_imag(&p.ll) == 0.0 && max_imag(&p.mm) == 0.0;
    let points = p.data.source.points();
    for &z in &points {
        if real && z.im < 0.0 && points.contains(&z.conj()) {
            continue;
        }
        let s = singular_values(&(&p.ll * z - &p.mm))?;
        let k = numerical_rank(&s, tol);
        if k != r {
            rank_violations.push((z, k));
            if real && z.im > 0.0 && points.contains(&z.conj()) {
                rank_violations.push((z.conj(), k));
            }
        }
    }
    Ok(OrderReport {
        sv_row,
        sv_col,
        sv_ll,
        r,
        nu,
        tol,
        rank_violations,
    })
}

/// Projection matrices from the SVDs of `[LL, MM]` (left) and `[LL; MM]` (right).
pub fn projectors(ll: &CMat, mm: &CMat, r: usize) -> Result<(CMat, CMat)> {
    let (nl, nr) = ll.shape();
    if r > nl.min(nr) {
        return Err(Error::RankTooLarge {
            requested: r,
            max: nl.min(nr),
        });
    }
    let mut row = CMat::zeros(nl, 2 * nr);
    row.columns_mut(0, nr).copy_from(ll);
    row.columns_mut(nr, nr).copy_from(mm);
    let mut col = CMat::zeros(2 * nl, nr);
    col.rows_mut(0, nl).copy_from(ll);
    col.rows_mut(nl, nl).copy_from(mm);
    let y = svd(&row)?.u.columns(0, r).into_owned();
    let x = svd_full_right(&col)?.v.columns(0, r).into_owned();
    Ok((y, x))
}

/// Order-`r` model `E = -Y^H LL X`, `A = -Y^H MM X`, `B = Y^H V`, `C = W X`, `D = 0`.
pub fn project_reduce(p: &LoewnerPencil, r: usize) -> Result<DescriptorModel> {
    let (y, x) = projectors(&p.ll, &p.mm, r)?;
    let yh = y.adjoint();
    let e = -(&yh * &p.ll * &x);
    let a = -(&yh * &p.mm * &x);
    let b = &yh * &p.v;
    let cm = &p.w * &x;
    let d = CMat::zeros(cm.nrows(), b.ncols());
    let model = DescriptorModel::new(e, a, b, cm, d, p.data.source.time)?;
    Ok(if p.is_real() {
        model.into_real()
    } else {
        model
    })
}

#[derive(Debug, Clone)]
pub struct PolynomialPart {
    pub d: CMat,
    pub improper: bool,
    /// Number of infinite eigenvalues of the order-`r` projected pencil.
    pub infinite_eigenvalues: usize,
    pub corrected: TangentialDataSet,
}

/// Feed-through term of the order-`r` model whose `E` has rank `nu`, from the
/// infinite eigenspace of its pencil. A singular restriction of `A` to the
/// null spaces of `E` marks a polynomial (improper) part.
pub fn extract_polynomial_part(p: &LoewnerPencil, nu: usize, r: usize) -> Result<PolynomialPart> {
    let src = &p.data.source;
    let (pp, m) = (src.outputs(), src.inputs());
    if r < nu {
        return Err(Error::InvalidArgument(format!(
            "r = {r} smaller than nu = {nu}"
        )));
    }
    let model = project_reduce(p, r)?;
    let ninf = pencil_eigenvalues(&model.a, &model.e, INFINITE_EIG_TOL)
        .map(|ev| ev.iter().filter(|e| matches!(e, GenEig::Infinite)).count())
        .unwrap_or(r - nu);
    let zero = CMat::zeros(pp, m);
    if r == nu {
        return Ok(PolynomialPart {
            d: zero,
            improper: false,
            infinite_eigenvalues: ninf,
            corrected: src.clone(),
        });
    }
    let k = r - nu;
    let se = svd(&model.e)?;
    let xi = se.v.columns(r - k, k).into_owned();
    let yi = se.u.columns(r - k, k).into_owned();
    let g = yi.adjoint() * &model.a * &xi;
    let sg = singular_values(&g)?;
    let anorm = singular_values(&model.a)?.first().copied().unwrap_or(0.0);
    let improper =
        sg.last().copied().unwrap_or(0.0) <= 1e-8 * anorm || (pp == 1 && m == 1 && k >= 2);
    if improper {
        return Ok(PolynomialPart {
            d: zero,
            improper: true,
            infinite_eigenvalues: ninf,
            corrected: src.clone(),
        });
    }
    let ginv = crate::linalg::inverse(&g)
        .ok_or_else(|| Error::SingularTransform("infinite block".into()))?;
    let mut d = -(&model.c * &xi * ginv * yi.adjoint() * &model.b);
    if p.is_real() {
        d = strip_imag(&d);
    }
    let corrected = src.subtract_feedthrough(&d);
    Ok(PolynomialPart {
        d,
        improper: false,
        infinite_eigenvalues: ninf,
        corrected,
    })
}

#[derive(Debug, Clone)]
pub struct InterpolationCheck {
    /// Relative residuals, right data first.
    pub residuals: Vec<f64>,
    pub max: f64,
    pub ok: bool,
}

fn rel(res: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

/// Verifies `H(lambda_i) r_i = w_i` and `l_j^T H(mu_j) = v_j^T`.
pub fn check_interpolation(
    model: &DescriptorModel,
    data: &TangentialDataSet,
    tol: f64,
) -> Result<InterpolationCheck> {
    let mut residuals = Vec::new();
    for t in &data.right {
        let h = model.eval_transfer(t.lambda)?;
        residuals.push(rel((&h * &t.r - &t.w).norm(), t.w.norm()));
    }
    for t in &data.left {
        let h = model.eval_transfer(t.mu)?;
        residuals.push(rel((h.transpose() * &t.l - &t.v).norm(), t.v.norm()));
    }
    let max = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(InterpolationCheck {
        residuals,
        max,
        ok: max <= tol,
    })
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub tol: f64,
    pub order: Option<usize>,
    pub realify: bool,
    pub extract_feedthrough: bool,
    pub partition: PartitionPolicy,
    pub directions: DirectionPolicy,
    pub time: TimeKind,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: DEFAULT_RANK_TOL,
            order: None,
            realify: true,
            extract_feedthrough: true,
            partition: PartitionPolicy::Alternating,
            directions: DirectionPolicy::CyclicUnit,
            time: TimeKind::Continuous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: DescriptorModel,
    pub report: OrderReport,
    pub data: TangentialDataSet,
    pub feedthrough: Option<CMat>,
    pub improper: bool,
}

fn pencil_for(data: &TangentialDataSet, real: bool) -> Result<LoewnerPencil> {
    if real {
        build_pencil_structured(&realify(data)?)
    } else {
        build_pencil(data)
    }
}

/// Full pipeline: (conjugate closure), partition, pencil, order detection,
/// feed-through extraction and projection.
pub fn fit(samples: &[FrequencySample], opts: &FitOptions) -> Result<FitResult> {
    let samples = if opts.realify {
        conjugate_close(samples)?
    } else {
        samples.to_vec()
    };
    let data = partition_data(&samples, &opts.partition, opts.directions)?.with_time(opts.time);
    let pencil = pencil_for(&data, opts.realify)?;
    let report = detect_order(&pencil, opts.tol)?;
    if let Some(k) = opts.order {
        let model = project_reduce(&pencil, k)?;
        return Ok(FitResult {
            model,
            report,
            data,
            feedthrough: None,
            improper: false,
        });
    }
    if opts.extract_feedthrough && report.r > report.nu {
        let pp = extract_polynomial_part(&pencil, report.nu, report.r)?;
        if !pp.improper {
            let p2 = pencil_for(&pp.corrected, opts.realify)?;
            let rep2 = detect_order(&p2, opts.tol)?;
            let mut model = project_reduce(&p2, rep2.r)?;
            model.d = pp.d.clone();
            let model =
                DescriptorModel::new(model.e, model.a, model.b, model.c, model.d, model.time)?;
            return Ok(FitResult {
                model,
                report,
                data,
                feedthrough: Some(pp.d),
                improper: false,
            });
        }
        let model = project_reduce(&pencil, report.r)?;
        return Ok(FitResult {
            model,
            report,
            data,
            feedthrough: None,
            improper: true,
        });
    }
    let model = project_reduce(&pencil, report.r)?;
    Ok(FitResult {
        model,
        report,
        data,
        feedthrough: None,
        improper: false,
    })
}
