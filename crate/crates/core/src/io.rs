//! CSV and JSON file formats for samples, time series, grids and kernel data.

use crate::bilinear::KernelTable;
use crate::error::{Error, Result};
use crate::linalg::{c, fmt_c, CMat, RMat, C64};
use crate::model::{c_from_json, c_to_json, FrequencySample, TimeSeries};
use crate::parametric::ParamGrid;
use serde_json::{json, Value};
use std::io::{Read, Write};

/// Relative tolerance on the sampling step of time CSV files.
pub const STEP_JITTER_TOL: f64 = 1e-9;

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn number(rec: &csv::StringRecord, k: usize, line: usize) -> Result<f64> {
    let s = rec.get(k).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column {}", k + 1),
    })?;
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("'{s}' is not a number"),
    })
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn parse_h_name(name: &str) -> Option<(usize, usize, bool)> {
    let rest = name.strip_prefix("H_")?;
    let parts: Vec<&str> = rest.split('_').collect();
    if parts.len() != 3 {
        return None;
    }
    let i: usize = parts[0].parse().ok()?;
    let j: usize = parts[1].parse().ok()?;
    let re = match parts[2] {
        "re" => true,
        "im" => false,
        _ => return None,
    };
    (i >= 1 && j >= 1).then_some((i - 1, j - 1, re))
}

/// Reads `point_re,point_im,H_1_1_re,H_1_1_im,...`; one row per sample.
pub fn read_frequency_csv<R: Read>(r: R) -> Result<Vec<FrequencySample>> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("point_re") || header.get(1) != Some("point_im") {
        return Err(Error::Parse {
            line: 1,
            msg: "header must start with point_re,point_im".into(),
        });
    }
    let mut cols = Vec::new();
    let (mut p, mut m) = (0, 0);
    for name in header.iter().skip(2) {
        let (i, j, re) = parse_h_name(name).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("unrecognized column '{name}'"),
        })?;
        p = p.max(i + 1);
        m = m.max(j + 1);
        cols.push((i, j, re));
    }
    let mut seen = vec![[false; 2]; p * m];
    for &(i, j, re) in &cols {
        let slot = &mut seen[i * m + j][re as usize];
        if *slot {
            return Err(Error::Parse {
                line: 1,
                msg: format!("column H_{}_{} repeated", i + 1, j + 1),
            });
        }
        *slot = true;
    }
    if p == 0 || seen.iter().any(|s| !s[0] || !s[1]) {
        return Err(Error::Schema(
            "response columns do not form a full matrix".into(),
        ));
    }
    let mut out: Vec<FrequencySample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let point = c(number(&rec, 0, line)?, number(&rec, 1, line)?);
        let mut value = CMat::zeros(p, m);
        for (k, &(i, j, re)) in cols.iter().enumerate() {
            let x = number(&rec, k + 2, line)?;
            if re {
                value[(i, j)].re = x;
            } else {
                value[(i, j)].im = x;
            }
        }
        if out.iter().any(|s| s.point == point) {
            return Err(Error::Schema(format!(
                "duplicate point {} at line {line}",
                fmt_c(point)
            )));
        }
        out.push(FrequencySample { point, value });
    }
    Ok(out)
}

pub fn write_frequency_csv<W: Write>(w: W, samples: &[FrequencySample]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let (p, m) = samples.first().map(|s| s.value.shape()).unwrap_or((1, 1));
    let mut header = vec!["point_re".to_string(), "point_im".to_string()];
    for i in 0..p {
        for j in 0..m {
            header.push(format!("H_{}_{}_re", i + 1, j + 1));
            header.push(format!("H_{}_{}_im", i + 1, j + 1));
        }
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for s in samples {
        if s.value.shape() != (p, m) {
            return Err(Error::DimensionMismatch(
                "samples have different shapes".into(),
            ));
        }
        let mut row = vec![s.point.re.to_string(), s.point.im.to_string()];
        for i in 0..p {
            for j in 0..m {
                row.push(s.value[(i, j)].re.to_string());
                row.push(s.value[(i, j)].im.to_string());
            }
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `t,u_1,...,y_1,...`; the step must be constant.
pub fn read_time_csv<R: Read>(r: R) -> Result<TimeSeries> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Parse {
            line: 1,
            msg: "header must start with t".into(),
        });
    }
    let mut u_cols = Vec::new();
    let mut y_cols = Vec::new();
    for (k, name) in header.iter().enumerate().skip(1) {
        if name.starts_with("u_") {
            u_cols.push(k);
        } else if name.starts_with("y_") {
            y_cols.push(k);
        } else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unrecognized column '{name}'"),
            });
        }
    }
    if u_cols.is_empty() {
        return Err(Error::Schema(
            "time series needs at least one input column".into(),
        ));
    }
    let mut t = Vec::new();
    let mut u = Vec::new();
    let mut y = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        t.push(number(&rec, 0, line)?);
        for &k in &u_cols {
            u.push(number(&rec, k, line)?);
        }
        for &k in &y_cols {
            y.push(number(&rec, k, line)?);
        }
        lines.push(line);
    }
    let n = t.len();
    if n < 2 {
        return Err(Error::Schema("time series needs at least two rows".into()));
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if dt <= 0.0 {
        return Err(Error::Schema("time must increase".into()));
    }
    for k in 1..n {
        let step = t[k] - t[k - 1];
        if ((step - dt) / dt).abs() > STEP_JITTER_TOL {
            return Err(Error::Schema(format!(
                "non-uniform step {step} at line {}",
                lines[k]
            )));
        }
    }
    Ok(TimeSeries {
        dt,
        t0: t[0],
        u: RMat::from_row_slice(n, u_cols.len(), &u),
        y: RMat::from_row_slice(n, y_cols.len(), &y),
    })
}

pub fn write_time_csv<W: Write>(w: W, ts: &TimeSeries) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((1..=ts.inputs()).map(|j| format!("u_{j}")));
    header.extend((1..=ts.outputs()).map(|j| format!("y_{j}")));
    wtr.write_record(&header).map_err(csv_err)?;
    for (k, t) in ts.times().into_iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(ts.u.row(k).iter().map(|x| x.to_string()));
        row.extend(ts.y.row(k).iter().map(|x| x.to_string()));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Grid layout: header `point_re,point_im,re@<p1>,im@<p1>,...`; each row is
/// one frequency with the response at every parameter value.
pub fn read_grid_csv<R: Read>(r: R) -> Result<ParamGrid> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("point_re")
        || header.get(1) != Some("point_im")
        || header.len() % 2 != 0
    {
        return Err(Error::Parse {
            line: 1,
            msg: "header must be point_re,point_im then re@p,im@p pairs".into(),
        });
    }
    let mut param = Vec::new();
    for k in (2..header.len()).step_by(2) {
        let re = header[k].strip_prefix("re@");
        let im = header[k + 1].strip_prefix("im@");
        let (Some(re), Some(im)) = (re, im) else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("bad column pair '{}','{}'", &header[k], &header[k + 1]),
            });
        };
        let p: f64 = re.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("'{re}' is not a number"),
        })?;
        let q: f64 = im.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("'{im}' is not a number"),
        })?;
        if p != q {
            return Err(Error::Parse {
                line: 1,
                msg: format!("column pair mismatch {p} vs {q}"),
            });
        }
        if param.contains(&p) {
            return Err(Error::Schema(format!("duplicate parameter {p}")));
        }
        param.push(p);
    }
    let mut freq: Vec<C64> = Vec::new();
    let mut vals = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let z = c(number(&rec, 0, line)?, number(&rec, 1, line)?);
        if freq.contains(&z) {
            return Err(Error::Schema(format!(
                "duplicate point {} at line {line}",
                fmt_c(z)
            )));
        }
        freq.push(z);
        for k in (2..rec.len()).step_by(2) {
            vals.push(c(number(&rec, k, line)?, number(&rec, k + 1, line)?));
        }
    }
    let n = freq.len();
    ParamGrid::new(
        freq,
        param.clone(),
        CMat::from_row_slice(n, param.len(), &vals),
    )
}

pub fn write_grid_csv<W: Write>(w: W, grid: &ParamGrid) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["point_re".to_string(), "point_im".to_string()];
    for p in &grid.param {
        header.push(format!("re@{p}"));
        header.push(format!("im@{p}"));
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for (i, z) in grid.freq.iter().enumerate() {
        let mut row = vec![z.re.to_string(), z.im.to_string()];
        for j in 0..grid.param.len() {
            row.push(grid.values[(i, j)].re.to_string());
            row.push(grid.values[(i, j)].im.to_string());
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Kernel data: a JSON list of `{"points": [[re,im],...], "value": [re,im]}`.
/// An optional `order` field must equal the number of points.
pub fn read_kernel_json<R: Read>(r: R) -> Result<KernelTable> {
    let v: Value = serde_json::from_reader(r)?;
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Schema("kernel data must be a list".into()))?;
    let mut table = KernelTable::default();
    let mut seen: Vec<Vec<C64>> = Vec::new();
    for (k, entry) in arr.iter().enumerate() {
        let pts = entry
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema(format!("entry {k}: missing points")))?;
        let points = pts.iter().map(c_from_json).collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::Schema(format!("entry {k}: empty points")));
        }
        if let Some(order) = entry.get("order") {
            if order.as_u64() != Some(points.len() as u64) {
                return Err(Error::Schema(format!(
                    "entry {k}: order does not match point count"
                )));
            }
        }
        let value = c_from_json(
            entry
                .get("value")
                .ok_or_else(|| Error::Schema(format!("entry {k}: missing value")))?,
        )?;
        if seen.contains(&points) {
            return Err(Error::Schema(format!(
                "duplicate kernel point ({})",
                points
                    .iter()
                    .map(|z| fmt_c(*z))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        table.insert(&points, value);
        seen.push(points);
    }
    Ok(table)
}

pub fn kernel_entry(points: &[C64], value: C64) -> Value {
    json!({
        "order": points.len(),
        "points": points.iter().map(|z| c_to_json(*z)).collect::<Vec<_>>(),
        "value": c_to_json(value),
    })
}
