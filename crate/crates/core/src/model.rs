//! Descriptor and bilinear state-space models, sample containers and simulation.

use crate::error::{Error, Result};
use crate::linalg::{c, cmp_point, fmt_c, max_imag, real_part, CMat, CVec, Factored, RMat, C64};
use serde_json::{json, Value};

pub const SINGULAR_RCOND: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeKind {
    Continuous,
    Discrete { h: f64 },
}

/// `E x' = A x + B u`, `y = C x + D u` (or the shift analogue in discrete time).
#[derive(Debug, Clone)]
pub struct DescriptorModel {
    pub e: CMat,
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
    pub field: Field,
    pub time: TimeKind,
}

fn field_of(ms: &[&CMat]) -> Field {
    if ms.iter().all(|m| max_imag(m) == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

impl DescriptorModel {
    pub fn new(e: CMat, a: CMat, b: CMat, c: CMat, d: CMat, time: TimeKind) -> Result<Self> {
        let n = e.nrows();
        let ok = e.ncols() == n
            && a.shape() == (n, n)
            && b.nrows() == n
            && c.ncols() == n
            && d.shape() == (c.nrows(), b.ncols());
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "E {:?} A {:?} B {:?} C {:?} D {:?}",
                e.shape(),
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        let field = field_of(&[&e, &a, &b, &c, &d]);
        Ok(DescriptorModel {
            e,
            a,
            b,
            c,
            d,
            field,
            time,
        })
    }

    pub fn from_real(e: RMat, a: RMat, b: RMat, c: RMat, d: RMat, time: TimeKind) -> Result<Self> {
        use crate::linalg::to_complex;
        Self::new(
            to_complex(&e),
            to_complex(&a),
            to_complex(&b),
            to_complex(&c),
            to_complex(&d),
            time,
        )
    }

    pub fn order(&self) -> usize {
        self.e.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn with_time(mut self, time: TimeKind) -> Self {
        self.time = time;
        self
    }

    /// Drops imaginary parts (used after a realifying transformation).
    pub fn into_real(mut self) -> Self {
        for m in [
            &mut self.e,
            &mut self.a,
            &mut self.b,
            &mut self.c,
            &mut self.d,
        ] {
            *m = m.map(|x| c(x.re, 0.0));
        }
        self.field = Field::Real;
        self
    }

    /// `C (xi E - A)^{-1} B + D`.
    pub fn eval_transfer(&self, xi: C64) -> Result<CMat> {
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let f = Factored::new(&(&self.e * xi - &self.a));
        if f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularPencil {
                point: fmt_c(xi),
                rcond: f.rcond,
            });
        }
        Ok(&self.c * f.solve(&self.b) + &self.d)
    }

    pub fn eval_many(&self, points: &[C64]) -> Result<Vec<FrequencySample>> {
        points
            .iter()
            .map(|&z| {
                Ok(FrequencySample {
                    point: z,
                    value: self.eval_transfer(z)?,
                })
            })
            .collect()
    }

    /// Markov parameters `h_0 = D`, `h_k = C (E^{-1}A)^{k-1} E^{-1} B`.
    pub fn markov_parameters(&self, count: usize) -> Result<Vec<CMat>> {
        let f = Factored::new(&self.e);
        if self.order() > 0 && f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularE(format!("rcond {:.3e}", f.rcond)));
        }
        let ea = f.solve(&self.a);
        let mut x = f.solve(&self.b);
        let mut out = Vec::with_capacity(count);
        if count > 0 {
            out.push(self.d.clone());
        }
        for _ in 1..count {
            out.push(&self.c * &x);
            x = &ea * x;
        }
        Ok(out)
    }

    /// `E x_{k+1} = A x_k + B u_k`, `y_k = C x_k + D u_k`, `x_0 = 0`.
    ///
    /// Complex models are simulated in complex arithmetic; the real part of the
    /// output is returned.
    pub fn simulate_discrete(&self, u: &TimeSeries) -> Result<TimeSeries> {
        if u.inputs() != self.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} channels, model expects {}",
                u.inputs(),
                self.inputs()
            )));
        }
        let n = self.order();
        let f = Factored::new(&self.e);
        if n > 0 && f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularE(format!("rcond {:.3e}", f.rcond)));
        }
        let ea = f.solve(&self.a);
        let eb = f.solve(&self.b);
        let steps = u.len();
        let mut y = RMat::zeros(steps, self.outputs());
        let mut x = CVec::zeros(n);
        for k in 0..steps {
            let uk = CVec::from_iterator(u.inputs(), u.u.row(k).iter().map(|&v| c(v, 0.0)));
            let yk = &self.c * &x + &self.d * &uk;
            for (j, v) in yk.iter().enumerate() {
                y[(k, j)] = v.re;
            }
            x = &ea * &x + &eb * &uk;
        }
        Ok(TimeSeries {
            dt: u.dt,
            t0: u.t0,
            u: u.u.clone(),
            y,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": match self.field { Field::Real => "real", Field::Complex => "complex" },
            "time": time_to_json(self.time),
            "n": self.order(),
            "m": self.inputs(),
            "p": self.outputs(),
            "E": mat_to_json(&self.e, self.field),
            "A": mat_to_json(&self.a, self.field),
            "B": mat_to_json(&self.b, self.field),
            "C": mat_to_json(&self.c, self.field),
            "D": mat_to_json(&self.d, self.field),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let time = time_from_json(v.get("time").unwrap_or(&Value::Null))?;
        let dims = json_dims(v);
        let n = dims.0;
        let get = |k: &str, r: Option<usize>, cc: Option<usize>| -> Result<CMat> {
            mat_from_json(
                v.get(k)
                    .ok_or_else(|| Error::Schema(format!("missing matrix {k}")))?,
                r,
                cc,
            )
        };
        let e = get("E", n, n)?;
        let n = e.nrows();
        let a = get("A", Some(n), Some(n))?;
        let b = get("B", Some(n), dims.1)?;
        let cm = get("C", dims.2, Some(n))?;
        let d = match v.get("D") {
            Some(_) => get("D", Some(cm.nrows()), Some(b.ncols()))?,
            None => CMat::zeros(cm.nrows(), b.ncols()),
        };
        let mut model =
            Self::new(e, a, b, cm, d, time).map_err(|e| Error::Schema(e.to_string()))?;
        if let Some(f) = v.get("field").and_then(|f| f.as_str()) {
            match f {
                "real" => {
                    if model.field != Field::Real {
                        return Err(Error::Schema(
                            "field is real but entries are complex".into(),
                        ));
                    }
                }
                "complex" => model.field = Field::Complex,
                other => return Err(Error::Schema(format!("unknown field {other}"))),
            }
        }
        Ok(model)
    }
}

pub(crate) fn json_dims(v: &Value) -> (Option<usize>, Option<usize>, Option<usize>) {
    let g = |k: &str| v.get(k).and_then(|x| x.as_u64()).map(|x| x as usize);
    (g("n"), g("m"), g("p"))
}

pub fn time_to_json(t: TimeKind) -> Value {
    match t {
        TimeKind::Continuous => json!("continuous"),
        TimeKind::Discrete { h } => json!({ "discrete": { "h": h } }),
    }
}

pub fn time_from_json(v: &Value) -> Result<TimeKind> {
    match v {
        Value::Null => Ok(TimeKind::Continuous),
        Value::String(s) if s == "continuous" => Ok(TimeKind::Continuous),
        Value::Object(o) => {
            let h = o
                .get("discrete")
                .and_then(|d| d.get("h"))
                .and_then(|h| h.as_f64())
                .ok_or_else(|| {
                    Error::Schema("time must be \"continuous\" or {\"discrete\":{\"h\":..}}".into())
                })?;
            if h <= 0.0 {
                return Err(Error::Schema("sampling step must be positive".into()));
            }
            Ok(TimeKind::Discrete { h })
        }
        _ => Err(Error::Schema(format!("invalid time kind {v}"))),
    }
}

pub fn c_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn c_from_json(v: &Value) -> Result<C64> {
    match v {
        Value::Number(x) => Ok(c(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0]
                .as_f64()
                .ok_or_else(|| Error::Schema("non-numeric entry".into()))?;
            let im = a[1]
                .as_f64()
                .ok_or_else(|| Error::Schema("non-numeric entry".into()))?;
            Ok(c(re, im))
        }
        _ => Err(Error::Schema(format!("invalid scalar {v}"))),
    }
}

pub fn mat_to_json(m: &CMat, field: Field) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| match field {
                        Field::Real => json!(m[(i, j)].re),
                        Field::Complex => c_to_json(m[(i, j)]),
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn mat_from_json(v: &Value, rows: Option<usize>, cols: Option<usize>) -> Result<CMat> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Schema("matrix must be an array of rows".into()))?;
    if arr.is_empty() {
        return Ok(CMat::zeros(rows.unwrap_or(0), cols.unwrap_or(0)));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for row in arr {
        let r = row
            .as_array()
            .ok_or_else(|| Error::Schema("matrix row must be an array".into()))?;
        if *ncols.get_or_insert(r.len()) != r.len() {
            return Err(Error::Schema("ragged matrix".into()));
        }
        for x in r {
            data.push(c_from_json(x)?);
        }
    }
    let ncols = ncols.unwrap();
    if let Some(rr) = rows {
        if rr != arr.len() {
            return Err(Error::Schema(format!(
                "expected {rr} rows, found {}",
                arr.len()
            )));
        }
    }
    if let Some(cc) = cols {
        if cc != ncols && !(ncols == 0 && cc > 0) {
            return Err(Error::Schema(format!(
                "expected {cc} columns, found {ncols}"
            )));
        }
    }
    let ncols = if ncols == 0 { cols.unwrap_or(0) } else { ncols };
    Ok(CMat::from_row_slice(arr.len(), ncols, &data))
}

/// One frequency-domain sample `H(point)`, a `p x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    pub point: C64,
    pub value: CMat,
}

impl FrequencySample {
    pub fn scalar(point: C64, value: C64) -> Self {
        FrequencySample {
            point,
            value: CMat::from_element(1, 1, value),
        }
    }
}

fn close_enough(a: &CMat, b: &CMat) -> bool {
    let scale = a.norm().max(b.norm()).max(1e-300);
    (a - b).norm() <= 1e-12 * scale
}

/// Adds the conjugate of every sample whose mirror is missing; output is sorted
/// by (imag, real).
pub fn conjugate_close(samples: &[FrequencySample]) -> Result<Vec<FrequencySample>> {
    let mut out: Vec<FrequencySample> = Vec::with_capacity(2 * samples.len());
    let find = |v: &[FrequencySample], z: C64| v.iter().position(|s| s.point == z);
    for s in samples {
        if s.point.im == 0.0 && !close_enough(&s.value, &s.value.conjugate()) {
            return Err(Error::ConflictingData(fmt_c(s.point)));
        }
        match find(&out, s.point) {
            Some(k) => {
                if !close_enough(&out[k].value, &s.value) {
                    return Err(Error::ConflictingData(fmt_c(s.point)));
                }
            }
            None => out.push(s.clone()),
        }
    }
    let n0 = out.len();
    for k in 0..n0 {
        let z = out[k].point.conj();
        let v = out[k].value.conjugate();
        match find(&out, z) {
            Some(j) => {
                if !close_enough(&out[j].value, &v) {
                    return Err(Error::ConflictingData(fmt_c(z)));
                }
            }
            None => out.push(FrequencySample { point: z, value: v }),
        }
    }
    out.sort_by(|a, b| cmp_point(&a.point, &b.point));
    Ok(out)
}

/// Uniformly sampled input/output record; rows of `u` and `y` are time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub t0: f64,
    pub u: RMat,
    pub y: RMat,
}

impl TimeSeries {
    pub fn from_input(dt: f64, u: &[f64]) -> Self {
        TimeSeries {
            dt,
            t0: 0.0,
            u: RMat::from_column_slice(u.len(), 1, u),
            y: RMat::zeros(u.len(), 0),
        }
    }
    pub fn len(&self) -> usize {
        self.u.nrows()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn inputs(&self) -> usize {
        self.u.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.y.ncols()
    }
    pub fn times(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.t0 + k as f64 * self.dt)
            .collect()
    }
    pub fn input_channel(&self, j: usize) -> Vec<f64> {
        self.u.column(j).iter().copied().collect()
    }
    pub fn output_channel(&self, j: usize) -> Vec<f64> {
        self.y.column(j).iter().copied().collect()
    }
}

/// `E x' = A x + N x u + B u`, `y = C x` (single input, single output).
#[derive(Debug, Clone)]
pub struct BilinearModel {
    pub e: CMat,
    pub a: CMat,
    pub n: CMat,
    pub b: CMat,
    pub c: CMat,
    pub field: Field,
}

impl BilinearModel {
    pub fn new(e: CMat, a: CMat, n: CMat, b: CMat, c: CMat) -> Result<Self> {
        let k = e.nrows();
        let ok = e.ncols() == k
            && a.shape() == (k, k)
            && n.shape() == (k, k)
            && b.shape() == (k, 1)
            && c.shape() == (1, k);
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "E {:?} A {:?} N {:?} B {:?} C {:?}",
                e.shape(),
                a.shape(),
                n.shape(),
                b.shape(),
                c.shape()
            )));
        }
        let field = field_of(&[&e, &a, &n, &b, &c]);
        Ok(BilinearModel {
            e,
            a,
            n,
            b,
            c,
            field,
        })
    }

    pub fn order(&self) -> usize {
        self.e.nrows()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": match self.field { Field::Real => "real", Field::Complex => "complex" },
            "n": self.order(),
            "E": mat_to_json(&self.e, self.field),
            "A": mat_to_json(&self.a, self.field),
            "N": mat_to_json(&self.n, self.field),
            "B": mat_to_json(&self.b, self.field),
            "C": mat_to_json(&self.c, self.field),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json_dims(v).0;
        let get = |k: &str, r: Option<usize>, cc: Option<usize>| -> Result<CMat> {
            mat_from_json(
                v.get(k)
                    .ok_or_else(|| Error::Schema(format!("missing matrix {k}")))?,
                r,
                cc,
            )
        };
        let e = get("E", n, n)?;
        let k = e.nrows();
        let m = Self::new(
            e,
            get("A", Some(k), Some(k))?,
            get("N", Some(k), Some(k))?,
            get("B", Some(k), Some(1))?,
            get("C", Some(1), Some(k))?,
        );
        m.map_err(|e| Error::Schema(e.to_string()))
    }

    /// Fixed-step RK4 from `x(0) = 0`; the input is linearly interpolated
    /// between samples. Returns the complex output trajectory.
    pub fn simulate_complex(&self, u: &[f64], dt: f64) -> Result<Vec<C64>> {
        let k = self.order();
        let f = Factored::new(&self.e);
        if k > 0 && f.rcond < SINGULAR_RCOND {
            return Err(Error::SingularE(format!("rcond {:.3e}", f.rcond)));
        }
        let ea = f.solve(&self.a);
        let en = f.solve(&self.n);
        let eb = f.solve(&self.b).column(0).into_owned();
        if self.field == Field::Real {
            let y = rk4_real(
                &real_part(&ea),
                &real_part(&en),
                &eb.map(|z| z.re),
                &self.c.row(0).map(|z| z.re),
                u,
                dt,
            );
            return Ok(y.into_iter().map(|v| c(v, 0.0)).collect());
        }
        let rhs = |x: &CVec, uu: f64| -> CVec { &ea * x + (&en * x + &eb) * c(uu, 0.0) };
        let mut x = CVec::zeros(k);
        let mut y = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            y.push((&self.c * &x)[(0, 0)]);
            if i + 1 == u.len() {
                break;
            }
            let (u0, u1) = (u[i], u[i + 1]);
            let um = 0.5 * (u0 + u1);
            let k1 = rhs(&x, u0);
            let k2 = rhs(&(&x + &k1 * c(0.5 * dt, 0.0)), um);
            let k3 = rhs(&(&x + &k2 * c(0.5 * dt, 0.0)), um);
            let k4 = rhs(&(&x + &k3 * c(dt, 0.0)), u1);
            x += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
        }
        Ok(y)
    }

    /// Real-valued output of [`simulate_complex`](Self::simulate_complex).
    pub fn simulate_bilinear(&self, u: &TimeSeries) -> Result<TimeSeries> {
        if u.inputs() != 1 {
            return Err(Error::DimensionMismatch(
                "bilinear models are single input".into(),
            ));
        }
        let y = self.simulate_complex(&u.input_channel(0), u.dt)?;
        Ok(TimeSeries {
            dt: u.dt,
            t0: u.t0,
            u: u.u.clone(),
            y: RMat::from_iterator(y.len(), 1, y.iter().map(|v| v.re)),
        })
    }
}

fn rk4_real(
    a: &RMat,
    n: &RMat,
    b: &nalgebra::DVector<f64>,
    cr: &nalgebra::RowDVector<f64>,
    u: &[f64],
    dt: f64,
) -> Vec<f64> {
    let rhs = |x: &nalgebra::DVector<f64>, uu: f64| a * x + (n * x + b) * uu;
    let mut x = nalgebra::DVector::zeros(a.nrows());
    let mut y = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        y.push((cr * &x)[0]);
        if i + 1 == u.len() {
            break;
        }
        let (u0, u1) = (u[i], u[i + 1]);
        let um = 0.5 * (u0 + u1);
        let k1 = rhs(&x, u0);
        let k2 = rhs(&(&x + &k1 * (0.5 * dt)), um);
        let k3 = rhs(&(&x + &k2 * (0.5 * dt)), um);
        let k4 = rhs(&(&x + &k3 * dt), u1);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    y
}
