use clap::{Args, Parser, Subcommand, ValueEnum};
use loewner::benchmarks::{self, ChainParams, RationalSurface, TRANSPORT_XM};
use loewner::bilinear::{
    build_bilinear_set, default_points, eval_generalized_tf, realize_bilinear, reduce_bilinear,
    InterpolationTuples, KernelOracle,
};
use loewner::hankel;
use loewner::io;
use loewner::lddc::{self, ControllerOptions, ReferenceModel, TransferSpec};
use loewner::linalg::{c, logspace, pencil_eigenvalues, GenEig, C64};
use loewner::lti::{self, DirectionPolicy, FitOptions, INFINITE_EIG_TOL};
use loewner::model::{BilinearModel, DescriptorModel, FrequencySample, TimeKind, TimeSeries};
use loewner::parametric::{fit_parametric, ParamFitOptions, ParametricModel};
use loewner::{Error, Result};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "loewner",
    version,
    about = "Data-driven rational modelling from frequency, time and kernel data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Relative singular-value threshold for order detection.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Fixed target order; skips detection.
    #[arg(long)]
    order: Option<usize>,
    /// Output path for the model (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Seed for every randomized choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a descriptor model to frequency samples.
    FitLti {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Keep the complex realization instead of a real one.
        #[arg(long)]
        complex: bool,
        /// Samples lie on the unit circle of a discrete model with this step.
        #[arg(long)]
        discrete: Option<f64>,
        /// Random tangential directions instead of cyclic unit vectors.
        #[arg(long)]
        random_directions: bool,
        /// Singular-value table output.
        #[arg(long)]
        sv: Option<PathBuf>,
        /// Report output; the report goes to stdout when only --out is given.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit a two-variable rational model to a parameter grid.
    FitParam {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Fixed parameter order; requires --order.
        #[arg(long)]
        param_order: Option<usize>,
        /// Real coefficients for conjugate-symmetric data.
        #[arg(long)]
        real: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Identify a discrete model from an input/output record.
    FitTime {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = TimeMethod::Markov)]
        method: TimeMethod,
        /// Truncate the Hankel realization to this order.
        #[arg(long)]
        reduce: Option<usize>,
        /// Convert the result to continuous time.
        #[arg(long)]
        continuous: bool,
        #[arg(long)]
        sv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit a bilinear model from a bilinear model or tabulated kernels.
    FitBilinear {
        /// Bilinear model JSON (object) or kernel data JSON (list).
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Points per side.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 1e2)]
        hi: f64,
        /// Skip conjugate pairing and keep complex matrices.
        #[arg(long)]
        complex: bool,
        #[arg(long)]
        sv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Data-driven controller from plant samples and a reference model.
    Lddc {
        /// Plant frequency samples.
        plant: PathBuf,
        /// Reference model JSON.
        #[arg(long)]
        reference: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Frequency response of a model on a grid.
    Freqresp {
        model: PathBuf,
        /// Grid as KIND LO HI COUNT, KIND one of log, lin.
        #[arg(long, num_args = 4, value_names = ["KIND", "LO", "HI", "COUNT"])]
        grid: Vec<String>,
        /// Parameter value for two-variable models.
        #[arg(long)]
        param: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Drive a model with the inputs of a time CSV.
    Simulate {
        model: PathBuf,
        input: PathBuf,
        /// Discretize continuous descriptor models by backward Euler at the file step.
        #[arg(long)]
        discretize: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write benchmark data or models.
    Bench {
        #[arg(value_enum)]
        name: BenchName,
        #[arg(long, default_value_t = TRANSPORT_XM)]
        xm: f64,
        #[arg(long, default_value_t = 300)]
        points: usize,
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 1e1)]
        hi: f64,
        /// Order of random systems, or (r) of the parametric surface.
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Parameter order of the parametric surface.
        #[arg(long, default_value_t = 2)]
        param_order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TimeMethod {
    /// Markov parameters by forward substitution, then a Hankel realization.
    Markov,
    /// Hankel pencil of the input/output record.
    Io,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BenchName {
    Improper,
    DiscretePole,
    Transport,
    Building,
    Burgers,
    RandomLti,
    RandomBilinear,
    Surface,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn eig_json(v: &[GenEig]) -> Value {
    Value::Array(
        v.iter()
            .map(|e| match e {
                GenEig::Finite(z) => cjson(*z),
                GenEig::Infinite => json!("inf"),
            })
            .collect(),
    )
}

fn write_sv(path: &Path, columns: &[(&str, &[f64])]) -> Result<()> {
    let mut w = output(Some(path))?;
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(w, "index,{}", names.join(","))?;
    let rows = columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
    for i in 0..rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| c.1.get(i).map(|x| x.to_string()).unwrap_or_default())
            .collect();
        writeln!(w, "{},{}", i + 1, cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn max_rel_error(model: &DescriptorModel, samples: &[FrequencySample]) -> Result<f64> {
    let mut err: f64 = 0.0;
    for s in samples {
        let h = model.eval_transfer(s.point)?;
        err = err.max((&h - &s.value).norm() / s.value.norm().max(f64::MIN_POSITIVE));
    }
    Ok(err)
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s0 = v.first().copied().unwrap_or(0.0);
    if s0 > 0.0 {
        v.iter().map(|x| x / s0).collect()
    } else {
        v.to_vec()
    }
}

fn fit_lti_cmd(
    input: &Path,
    common: &Common,
    complex: bool,
    discrete: Option<f64>,
    random_directions: bool,
    sv: Option<&Path>,
    report: Option<&Path>,
) -> Result<()> {
    let samples = io::read_frequency_csv(open(input)?)?;
    let time = discrete.map_or(TimeKind::Continuous, |h| TimeKind::Discrete { h });
    let opts = FitOptions {
        tol: common.tol,
        order: common.order,
        realify: !complex,
        directions: if random_directions {
            DirectionPolicy::Random { seed: common.seed }
        } else {
            DirectionPolicy::CyclicUnit
        },
        time,
        ..Default::default()
    };
    let fit = lti::fit(&samples, &opts)?;
    let rep = &fit.report;
    let eigs = pencil_eigenvalues(&fit.model.a, &fit.model.e, INFINITE_EIG_TOL)?;
    let report_json = json!({
        "samples": samples.len(),
        "tol": common.tol,
        "r": rep.r,
        "nu": rep.nu,
        "order": fit.model.order(),
        "improper": fit.improper,
        "feedthrough": fit.feedthrough.as_ref().map(|d| d.iter().map(|z| cjson(*z)).collect::<Vec<_>>()),
        "eigenvalues": eig_json(&eigs),
        "rank_violations": rep.rank_violations.len(),
        "singular_values": rep.normalized_row(),
        "max_rel_error": max_rel_error(&fit.model, &samples)?,
    });
    if let Some(p) = sv {
        let row = normalized(&rep.sv_row);
        let col = normalized(&rep.sv_col);
        let ll = normalized(&rep.sv_ll);
        write_sv(
            p,
            &[("sigma_row", &row), ("sigma_col", &col), ("sigma_ll", &ll)],
        )?;
    }
    write_json(common.out.as_deref(), &fit.model.to_json())?;
    if common.out.is_some() || report.is_some() {
        write_json(report, &report_json)?;
    }
    Ok(())
}

fn fit_param_cmd(
    input: &Path,
    common: &Common,
    param_order: Option<usize>,
    real: bool,
    report: Option<&Path>,
) -> Result<()> {
    let grid = io::read_grid_csv(open(input)?)?;
    let orders = match (common.order, param_order) {
        (Some(r), Some(q)) => Some((r, q)),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidArgument(
                "--order and --param-order go together".into(),
            ))
        }
    };
    let fit = fit_parametric(
        &grid,
        &ParamFitOptions {
            tol: common.tol,
            orders,
            real,
            ..Default::default()
        },
    )?;
    let mut err: f64 = 0.0;
    for (i, z) in grid.freq.iter().enumerate() {
        for (j, p) in grid.param.iter().enumerate() {
            let v = grid.values[(i, j)];
            err = err.max((fit.model.eval(*z, *p)? - v).norm() / v.norm().max(f64::MIN_POSITIVE));
        }
    }
    let (r, q) = fit.model.orders();
    let report_json = json!({
        "detected": [fit.detected.0, fit.detected.1],
        "r": r,
        "q": q,
        "rank": fit.rank,
        "deficiency": fit.null_space.deficiency,
        "singular_values": fit.null_space.singular_values,
        "max_rel_error": err,
    });
    write_json(common.out.as_deref(), &fit.model.to_json())?;
    if common.out.is_some() || report.is_some() {
        write_json(report, &report_json)?;
    }
    Ok(())
}

fn fit_time_cmd(
    input: &Path,
    common: &Common,
    method: TimeMethod,
    reduce: Option<usize>,
    continuous: bool,
    sv: Option<&Path>,
    report: Option<&Path>,
) -> Result<()> {
    let ts = io::read_time_csv(open(input)?)?;
    if ts.inputs() != 1 || ts.outputs() != 1 {
        return Err(Error::DimensionMismatch(
            "time-domain identification needs one input and one output".into(),
        ));
    }
    let n = common.order.ok_or_else(|| {
        Error::InvalidArgument("--order is required for time-domain identification".into())
    })?;
    let u = ts.input_channel(0);
    let y = ts.output_channel(0);
    let mut hsv = Vec::new();
    let model = match method {
        TimeMethod::Markov => {
            let h = hankel::recover_markov(&u, &y, 2 * n)?;
            match reduce {
                Some(r) => {
                    let red = hankel::reduce_hankel(&h, n, r, ts.dt)?;
                    hsv = red.singular_values;
                    red.model
                }
                None => hankel::realize_from_impulse(&h, n, ts.dt)?,
            }
        }
        TimeMethod::Io => {
            if reduce.is_some() {
                return Err(Error::InvalidArgument(
                    "--reduce needs --method markov".into(),
                ));
            }
            let (rows, cols) = hankel_dims(u.len());
            hankel::realize_from_io_with(&u, &y, n, rows, cols, ts.dt, common.seed)?
        }
    };
    let model = if continuous {
        hankel::to_continuous_bilinear(&model)?
    } else {
        model
    };
    if let Some(p) = sv {
        let s = normalized(&hsv);
        write_sv(p, &[("sigma", &s)])?;
    }
    let report_json = json!({
        "samples": ts.len(),
        "dt": ts.dt,
        "order": model.order(),
        "hankel_singular_values": normalized(&hsv),
    });
    write_json(common.out.as_deref(), &model.to_json())?;
    if common.out.is_some() || report.is_some() {
        write_json(report, &report_json)?;
    }
    Ok(())
}

fn hankel_dims(len: usize) -> (usize, usize) {
    let rows = len / 2;
    (rows, len - rows - 1)
}

fn fit_bilinear_cmd(
    input: &Path,
    common: &Common,
    k: usize,
    (lo, hi): (f64, f64),
    complex: bool,
    sv: Option<&Path>,
    report: Option<&Path>,
) -> Result<()> {
    let doc = read_json(input)?;
    let oracle: Box<dyn KernelOracle> = if doc.is_array() {
        Box::new(io::read_kernel_json(doc.to_string().as_bytes())?)
    } else {
        Box::new(BilinearModel::from_json(&doc)?)
    };
    let (lam, mu) = default_points(k, lo, hi);
    let tuples = if complex {
        InterpolationTuples::chain(&lam, &mu)?
    } else {
        InterpolationTuples::conjugate_chains(&lam, &mu)?
    };
    let mut set = build_bilinear_set(&tuples, oracle.as_ref())?;
    if !complex {
        set = set.realify()?;
    }
    let (rank, sigma) = set.order(common.tol)?;
    let r = common.order.unwrap_or(rank);
    let model = if r == set.ll.nrows() {
        realize_bilinear(&set)?
    } else {
        reduce_bilinear(&set, r)?
    };
    let mut err: f64 = 0.0;
    for pts in tuples.matched_kernels() {
        let want = oracle.kernel(&pts)?;
        err = err.max(
            (eval_generalized_tf(&model, &pts)? - want).norm() / want.norm().max(f64::MIN_POSITIVE),
        );
    }
    if let Some(p) = sv {
        write_sv(p, &[("sigma", &sigma)])?;
    }
    let report_json = json!({
        "tuples": tuples.right.len(),
        "rank": rank,
        "order": model.order(),
        "singular_values": sigma,
        "max_rel_error_matched": err,
    });
    write_json(common.out.as_deref(), &model.to_json())?;
    if common.out.is_some() || report.is_some() {
        write_json(report, &report_json)?;
    }
    Ok(())
}

fn lddc_cmd(plant: &Path, reference: &Path, common: &Common, report: Option<&Path>) -> Result<()> {
    let samples = io::read_frequency_csv(open(plant)?)?;
    let doc = read_json(reference)?;
    let description = doc
        .get("description")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();
    let m = ReferenceModel::new(TransferSpec::from_json(&doc)?, description);
    let kstar = lddc::ideal_controller_samples(&samples, &m)?;
    let fit = lddc::identify_controller(
        &kstar,
        &ControllerOptions {
            tol: common.tol,
            order: common.order,
        },
    )?;
    let (poles, zeros) = lddc::poles_and_zeros(&fit.model)?;
    let cl = lddc::closed_loop_eval(&samples, &fit.model, &m)?;
    let report_json = json!({
        "samples": samples.len(),
        "used": kstar.len(),
        "r": fit.report.r,
        "nu": fit.report.nu,
        "order": fit.model.order(),
        "singular_values": fit.report.normalized_row(),
        "poles": poles.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "zeros": zeros.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "feedthrough": fit.feedthrough.as_ref().map(|d| cjson(d[(0, 0)])),
        "max_rel_error": max_rel_error(&fit.model, &kstar)?,
        "closed_loop_max_deviation": cl.max_deviation,
        "closed_loop_mean_deviation": cl.mean_deviation,
        "small_gain_bound": lddc::small_gain_bound(&samples, &m)?,
    });
    write_json(common.out.as_deref(), &fit.model.to_json())?;
    if common.out.is_some() || report.is_some() {
        write_json(report, &report_json)?;
    }
    Ok(())
}

enum AnyModel {
    Descriptor(DescriptorModel),
    Bilinear(BilinearModel),
    Parametric(ParametricModel),
}

fn load_model(path: &Path) -> Result<AnyModel> {
    let v = read_json(path)?;
    if v.get("lambda").is_some() {
        Ok(AnyModel::Parametric(ParametricModel::from_json(&v)?))
    } else if v.get("N").is_some() {
        Ok(AnyModel::Bilinear(BilinearModel::from_json(&v)?))
    } else {
        Ok(AnyModel::Descriptor(DescriptorModel::from_json(&v)?))
    }
}

fn grid_points(spec: &[String]) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument("grid is KIND LO HI COUNT".into());
    if spec.len() != 4 {
        return Err(bad());
    }
    let lo: f64 = spec[1].parse().map_err(|_| bad())?;
    let hi: f64 = spec[2].parse().map_err(|_| bad())?;
    let n: usize = spec[3].parse().map_err(|_| bad())?;
    match spec[0].as_str() {
        "log" if lo > 0.0 && hi > 0.0 => Ok(logspace(lo, hi, n)),
        "lin" => Ok((0..n)
            .map(|k| {
                if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()),
        _ => Err(bad()),
    }
}

fn freqresp_cmd(
    model: &Path,
    grid: &[String],
    param: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let w = if grid.is_empty() {
        logspace(1e-2, 1e2, 100)
    } else {
        grid_points(grid)?
    };
    let model = load_model(model)?;
    let mut samples = Vec::with_capacity(w.len());
    for &wk in &w {
        let sample = match &model {
            AnyModel::Descriptor(m) => {
                let z = match m.time {
                    TimeKind::Continuous => c(0.0, wk),
                    TimeKind::Discrete { h } => C64::from_polar(1.0, wk * h),
                };
                FrequencySample {
                    point: z,
                    value: m.eval_transfer(z)?,
                }
            }
            AnyModel::Bilinear(m) => {
                FrequencySample::scalar(c(0.0, wk), eval_generalized_tf(m, &[c(0.0, wk)])?)
            }
            AnyModel::Parametric(m) => {
                let p = param.ok_or_else(|| {
                    Error::InvalidArgument("two-variable model needs --param".into())
                })?;
                FrequencySample::scalar(c(0.0, wk), m.eval(c(0.0, wk), p)?)
            }
        };
        samples.push(sample);
    }
    io::write_frequency_csv(output(out)?, &samples)
}

fn simulate_cmd(model: &Path, input: &Path, discretize: bool, out: Option<&Path>) -> Result<()> {
    let ts = io::read_time_csv(open(input)?)?;
    let input_only = TimeSeries {
        y: loewner::linalg::RMat::zeros(ts.len(), 0),
        ..ts.clone()
    };
    let result = match load_model(model)? {
        AnyModel::Descriptor(m) => match m.time {
            TimeKind::Discrete { .. } => m.simulate_discrete(&input_only)?,
            TimeKind::Continuous if discretize => {
                hankel::discretize_backward_euler(&m, ts.dt)?.simulate_discrete(&input_only)?
            }
            TimeKind::Continuous => {
                return Err(Error::InvalidArgument(
                    "continuous descriptor model needs --discretize".into(),
                ))
            }
        },
        AnyModel::Bilinear(m) => m.simulate_bilinear(&input_only)?,
        AnyModel::Parametric(_) => {
            return Err(Error::InvalidArgument(
                "two-variable models have no time-domain simulation".into(),
            ))
        }
    };
    io::write_time_csv(output(out)?, &result)
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    name: BenchName,
    xm: f64,
    points: usize,
    (lo, hi): (f64, f64),
    order: usize,
    param_order: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    match name {
        BenchName::Improper => {
            let h = |s: f64| (s * s + s + 1.0) / (s + 1.0);
            let s: Vec<_> = (1..=8)
                .map(|k| FrequencySample::scalar(c(k as f64, 0.0), c(h(k as f64), 0.0)))
                .collect();
            io::write_frequency_csv(output(out)?, &s)
        }
        BenchName::DiscretePole => {
            let s: Vec<_> = [-0.1, 0.1, -1.0, 1.0, -2.0, 2.0, -3.0, 3.0]
                .iter()
                .map(|&t| {
                    let z = C64::from_polar(1.0, t);
                    FrequencySample::scalar(z, z / (z - 0.5))
                })
                .collect();
            io::write_frequency_csv(output(out)?, &s)
        }
        BenchName::Transport => io::write_frequency_csv(
            output(out)?,
            &benchmarks::transport_samples(xm, lo, hi, points)?,
        ),
        BenchName::Building => {
            let sys = benchmarks::structural_chain(&ChainParams::new(8))?;
            let d = hankel::discretize_backward_euler(&sys, benchmarks::BUILDING_DT)?;
            let u = benchmarks::building_input_samples();
            io::write_time_csv(
                output(out)?,
                &d.simulate_discrete(&TimeSeries::from_input(benchmarks::BUILDING_DT, &u))?,
            )
        }
        BenchName::Burgers => {
            let qb = benchmarks::burgers_spec(10, 0.1)?;
            let dt = 1e-3;
            let u: Vec<f64> = (0..=10_000)
                .map(|k| 0.5 * benchmarks::burgers_input(k as f64 * dt))
                .collect();
            let y = qb.simulate(&u, dt);
            let mut ts = TimeSeries::from_input(dt, &u);
            ts.y = loewner::linalg::RMat::from_column_slice(y.len(), 1, &y);
            io::write_time_csv(output(out)?, &ts)
        }
        BenchName::RandomLti => {
            write_json(out, &benchmarks::random_stable(order, 1, 1, seed).to_json())
        }
        BenchName::RandomBilinear => {
            write_json(out, &benchmarks::random_bilinear(order, seed).to_json())
        }
        BenchName::Surface => {
            let surf = RationalSurface::random(order, param_order, seed);
            let g = surf.grid(0.1, 10.0, 2 * (order + 1) + 6, 2 * (param_order + 1) + 4)?;
            io::write_grid_csv(output(out)?, &g)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FitLti {
            input,
            common,
            complex,
            discrete,
            random_directions,
            sv,
            report,
        } => {
            check_tol(common.tol)?;
            fit_lti_cmd(
                &input,
                &common,
                complex,
                discrete,
                random_directions,
                sv.as_deref(),
                report.as_deref(),
            )
        }
        Command::FitParam {
            input,
            common,
            param_order,
            real,
            report,
        } => {
            check_tol(common.tol)?;
            fit_param_cmd(&input, &common, param_order, real, report.as_deref())
        }
        Command::FitTime {
            input,
            common,
            method,
            reduce,
            continuous,
            sv,
            report,
        } => {
            check_tol(common.tol)?;
            fit_time_cmd(
                &input,
                &common,
                method,
                reduce,
                continuous,
                sv.as_deref(),
                report.as_deref(),
            )
        }
        Command::FitBilinear {
            input,
            common,
            k,
            lo,
            hi,
            complex,
            sv,
            report,
        } => {
            check_tol(common.tol)?;
            fit_bilinear_cmd(
                &input,
                &common,
                k,
                (lo, hi),
                complex,
                sv.as_deref(),
                report.as_deref(),
            )
        }
        Command::Lddc {
            plant,
            reference,
            common,
            report,
        } => {
            check_tol(common.tol)?;
            lddc_cmd(&plant, &reference, &common, report.as_deref())
        }
        Command::Freqresp {
            model,
            grid,
            param,
            out,
        } => freqresp_cmd(&model, &grid, param, out.as_deref()),
        Command::Simulate {
            model,
            input,
            discretize,
            out,
        } => simulate_cmd(&model, &input, discretize, out.as_deref()),
        Command::Bench {
            name,
            xm,
            points,
            lo,
            hi,
            order,
            param_order,
            seed,
            out,
        } => bench_cmd(
            name,
            xm,
            points,
            (lo, hi),
            order,
            param_order,
            seed,
            out.as_deref(),
        ),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance {tol} outside (0, 1)"
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOEWNER_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
