//! Loewner data-driven control: ideal-controller samples from plant data and a
//! reference closed loop, controller identification and closed-loop checks.

use crate::benchmarks::transport_tf;
use crate::error::{Error, Result};
use crate::linalg::{c, fmt_c, pencil_eigenvalues, CMat, GenEig, C64};
use crate::lti::{fit, FitOptions, FitResult};
use crate::model::{DescriptorModel, FrequencySample};
use serde_json::{json, Value};

/// Threshold on `|1 - M(z)|` below which a sample is dropped.
pub const UNITY_TOL: f64 = 1e-12;

/// A SISO transfer function given by formula.
#[derive(Debug, Clone)]
pub enum TransferSpec {
    /// Polynomial coefficients in descending powers of `s`.
    Rational {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    /// `(kp + ki/s) / (s/a + 1)`.
    FilteredPi {
        kp: f64,
        ki: f64,
        a: f64,
    },
    Transport {
        x: f64,
    },
    Descriptor(Box<DescriptorModel>),
    /// `P K / (1 + P K)`.
    ClosedLoop {
        plant: Box<TransferSpec>,
        controller: Box<TransferSpec>,
    },
}

fn polyval(p: &[f64], s: C64) -> C64 {
    p.iter().fold(c(0.0, 0.0), |acc, &a| acc * s + a)
}

impl TransferSpec {
    pub fn eval(&self, s: C64) -> Result<C64> {
        match self {
            TransferSpec::Rational { num, den } => {
                let d = polyval(den, s);
                if d.norm() == 0.0 {
                    return Err(Error::DenominatorZero(format!("at {}", fmt_c(s))));
                }
                Ok(polyval(num, s) / d)
            }
            TransferSpec::FilteredPi { kp, ki, a } => {
                if s.norm() == 0.0 {
                    return Err(Error::DenominatorZero("integrator at 0".into()));
                }
                Ok((*kp + *ki / s) / (s / *a + 1.0))
            }
            TransferSpec::Transport { x } => transport_tf(*x, s),
            TransferSpec::Descriptor(m) => {
                if m.inputs() != 1 || m.outputs() != 1 {
                    return Err(Error::DimensionMismatch("reference models are SISO".into()));
                }
                Ok(m.eval_transfer(s)?[(0, 0)])
            }
            TransferSpec::ClosedLoop { plant, controller } => {
                let l = plant.eval(s)? * controller.eval(s)?;
                let den = l + 1.0;
                if den.norm() <= 1e-14 * l.norm().max(1.0) {
                    return Err(Error::ClosedLoopSingularAtPoint(fmt_c(s)));
                }
                Ok(l / den)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            TransferSpec::Rational { num, den } => {
                json!({"type": "rational", "num": num, "den": den})
            }
            TransferSpec::FilteredPi { kp, ki, a } => {
                json!({"type": "filtered_pi", "kp": kp, "ki": ki, "a": a})
            }
            TransferSpec::Transport { x } => json!({"type": "transport", "x": x}),
            TransferSpec::Descriptor(m) => json!({"type": "descriptor", "model": m.to_json()}),
            TransferSpec::ClosedLoop { plant, controller } => {
                json!({"type": "closed_loop", "plant": plant.to_json(), "controller": controller.to_json()})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Schema("missing key 'type'".into()))?;
        let num = |k: &str| -> Result<f64> {
            v.get(k)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Schema(format!("'{kind}' needs numeric '{k}'")))
        };
        let coeffs = |k: &str| -> Result<Vec<f64>> {
            v.get(k)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Schema(format!("'{kind}' needs array '{k}'")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::Schema(format!("'{k}' entries must be numbers")))
                })
                .collect()
        };
        let sub = |k: &str| -> Result<Box<TransferSpec>> {
            Ok(Box::new(TransferSpec::from_json(v.get(k).ok_or_else(
                || Error::Schema(format!("'{kind}' needs '{k}'")),
            )?)?))
        };
        match kind {
            "rational" => {
                let den = coeffs("den")?;
                if den.iter().all(|&d| d == 0.0) {
                    return Err(Error::Schema("denominator is identically zero".into()));
                }
                Ok(TransferSpec::Rational {
                    num: coeffs("num")?,
                    den,
                })
            }
            "filtered_pi" => Ok(TransferSpec::FilteredPi {
                kp: num("kp")?,
                ki: num("ki")?,
                a: num("a")?,
            }),
            "transport" => Ok(TransferSpec::Transport { x: num("x")? }),
            "descriptor" => Ok(TransferSpec::Descriptor(Box::new(
                DescriptorModel::from_json(
                    v.get("model")
                        .ok_or_else(|| Error::Schema("'descriptor' needs 'model'".into()))?,
                )?,
            ))),
            "closed_loop" => Ok(TransferSpec::ClosedLoop {
                plant: sub("plant")?,
                controller: sub("controller")?,
            }),
            other => Err(Error::Schema(format!("unknown transfer type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceModel {
    pub spec: TransferSpec,
    pub description: String,
}

impl ReferenceModel {
    pub fn new(spec: TransferSpec, description: impl Into<String>) -> Self {
        ReferenceModel {
            spec,
            description: description.into(),
        }
    }

    pub fn eval(&self, s: C64) -> Result<C64> {
        self.spec.eval(s)
    }
}

fn scalar(sample: &FrequencySample) -> Result<C64> {
    if sample.value.shape() != (1, 1) {
        return Err(Error::DimensionMismatch(
            "controller synthesis is SISO".into(),
        ));
    }
    Ok(sample.value[(0, 0)])
}

/// `K*(z) = H(z)^{-1} M(z) (1 - M(z))^{-1}` at every plant sample. Points
/// where `|1 - M| < UNITY_TOL` are dropped with a warning.
pub fn ideal_controller_samples(
    plant: &[FrequencySample],
    m: &ReferenceModel,
) -> Result<Vec<FrequencySample>> {
    log::warn!("reference model achievability is assumed, not checked");
    let mut out = Vec::with_capacity(plant.len());
    let mut dropped = 0;
    for s in plant {
        let h = scalar(s)?;
        if h.norm() == 0.0 {
            return Err(Error::PlantZeroAtPoint(fmt_c(s.point)));
        }
        let mv = m.eval(s.point)?;
        let gap = c(1.0, 0.0) - mv;
        if gap.norm() < UNITY_TOL {
            log::warn!(
                "dropping {}: reference model is numerically 1",
                fmt_c(s.point)
            );
            dropped += 1;
            continue;
        }
        out.push(FrequencySample::scalar(s.point, mv / (h * gap)));
    }
    if out.is_empty() && dropped > 0 {
        return Err(Error::ReferenceUnityAtPoint(format!(
            "all {dropped} points"
        )));
    }
    Ok(out)
}

/// Plant frequency response from input and output spectra, `y / u`.
pub fn spectra_ratio(points: &[C64], y: &[C64], u: &[C64]) -> Result<Vec<FrequencySample>> {
    if points.len() != y.len() || points.len() != u.len() {
        return Err(Error::DimensionMismatch("spectra lengths differ".into()));
    }
    points
        .iter()
        .zip(y.iter().zip(u))
        .map(|(&z, (&yv, &uv))| {
            if uv.norm() == 0.0 {
                return Err(Error::InsufficientExcitation(format!(
                    "zero input spectrum at {}",
                    fmt_c(z)
                )));
            }
            Ok(FrequencySample::scalar(z, yv / uv))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ControllerOptions {
    pub tol: f64,
    pub order: Option<usize>,
}

impl Default for ControllerOptions {
    fn default() -> Self {
        ControllerOptions {
            tol: crate::lti::DEFAULT_RANK_TOL,
            order: None,
        }
    }
}

/// Loewner fit of the ideal-controller samples with a real realization.
pub fn identify_controller(
    samples: &[FrequencySample],
    opts: &ControllerOptions,
) -> Result<FitResult> {
    if samples.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: samples.len(),
        });
    }
    fit(
        samples,
        &FitOptions {
            tol: opts.tol,
            order: opts.order,
            ..Default::default()
        },
    )
}

#[derive(Debug, Clone)]
pub struct ClosedLoopReport {
    pub points: Vec<C64>,
    pub closed_loop: Vec<C64>,
    pub reference: Vec<C64>,
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

/// Pointwise `H K / (1 + H K)` against the reference model.
pub fn closed_loop_eval(
    plant: &[FrequencySample],
    k: &DescriptorModel,
    m: &ReferenceModel,
) -> Result<ClosedLoopReport> {
    let mut rep = ClosedLoopReport {
        points: Vec::new(),
        closed_loop: Vec::new(),
        reference: Vec::new(),
        deviation: Vec::new(),
        max_deviation: 0.0,
        mean_deviation: 0.0,
    };
    for s in plant {
        let l = scalar(s)? * k.eval_transfer(s.point)?[(0, 0)];
        let den = l + 1.0;
        if den.norm() <= 1e-14 * l.norm().max(1.0) {
            return Err(Error::ClosedLoopSingularAtPoint(fmt_c(s.point)));
        }
        let t = l / den;
        let mv = m.eval(s.point)?;
        rep.points.push(s.point);
        rep.closed_loop.push(t);
        rep.reference.push(mv);
        rep.deviation.push((t - mv).norm());
    }
    rep.max_deviation = rep.deviation.iter().copied().fold(0.0, f64::max);
    if !rep.deviation.is_empty() {
        rep.mean_deviation = rep.deviation.iter().sum::<f64>() / rep.deviation.len() as f64;
    }
    Ok(rep)
}

/// Data-based small-gain level `max |H (1 - M)|` over the samples.
pub fn small_gain_bound(plant: &[FrequencySample], m: &ReferenceModel) -> Result<f64> {
    let mut g: f64 = 0.0;
    for s in plant {
        g = g.max((scalar(s)? * (c(1.0, 0.0) - m.eval(s.point)?)).norm());
    }
    Ok(g)
}

/// Finite poles and transmission zeros of a SISO descriptor model.
pub fn poles_and_zeros(k: &DescriptorModel) -> Result<(Vec<C64>, Vec<C64>)> {
    let finite = |v: Vec<GenEig>| v.into_iter().filter_map(|e| e.finite()).collect::<Vec<_>>();
    let poles = finite(pencil_eigenvalues(
        &k.a,
        &k.e,
        crate::lti::INFINITE_EIG_TOL,
    )?);
    let n = k.order();
    let mut a = CMat::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&k.a);
    a.view_mut((0, n), (n, 1)).copy_from(&k.b);
    a.view_mut((n, 0), (1, n)).copy_from(&k.c);
    a[(n, n)] = k.d[(0, 0)];
    let mut e = CMat::zeros(n + 1, n + 1);
    e.view_mut((0, 0), (n, n)).copy_from(&k.e);
    let zeros = finite(pencil_eigenvalues(&a, &e, crate::lti::INFINITE_EIG_TOL)?);
    Ok((poles, zeros))
}
