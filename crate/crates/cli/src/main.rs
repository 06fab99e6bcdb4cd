//! `fivevec`: simulate rigid bodies, run the property catalogue, and apply
//! derivatives and motions to serialized fields and tensors.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 malformed input or
//! configuration, 3 a residual above its tolerance.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fivevec::derivative::{d_form, r_partial_check, transform_field};
use fivevec::motion::{apply_motion, t_from_params, MotionParamsDoc};
use fivevec::poly::PolyFieldDoc;
use fivevec::rigid_body::{simulate, Body, SimulationOptions, Trajectory, TrajectorySummary};
use fivevec::tensor::TensorDoc;
use fivevec::verify::{self, VerifyOptions};
use fivevec::{ExtTensor, FieldKind, Frame, FrameKind, Metric, MetricSpec, PolyField};
use nalgebra::Vector3;
use serde::Serialize;

use config::RunConfig;

const SIMULATE_TOLERANCE: f64 = 1e-6;
const DERIVE_TOLERANCE: f64 = 1e-7;
const DERIVE_STEP: f64 = 1e-4;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Tolerance(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Tolerance(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Tolerance(m) | Failure::Other(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "fivevec",
    version,
    about = "Extended-tensor mechanics: simulate, verify, derive, transform"
)]
struct Cli {
    /// TOML or JSON file with default settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Metric preset: euclidean3 or minkowski4.
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a body and write its trajectory as CSV.
    Simulate {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Where to write the JSON summary.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        record_every: Option<u64>,
        /// Reference point for momentum and angular momentum, `x,y,z`.
        #[arg(long, value_delimiter = ',')]
        origin: Option<Vec<f64>>,
    },
    /// Run the seeded property catalogue and print a JSON report.
    Verify {
        #[arg(long)]
        cases: Option<usize>,
        /// Only properties whose id starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Bivector-derivative 2-form of a polynomial field.
    Derive {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also report the finite-difference residual of every component.
        #[arg(long)]
        residual: bool,
        #[arg(long)]
        h: Option<f64>,
        /// Chart origin, comma separated.
        #[arg(long, value_delimiter = ',')]
        origin: Option<Vec<f64>>,
    },
    /// Apply a finite motion to a tensor or a polynomial field.
    Transform {
        #[arg(long)]
        input: Option<PathBuf>,
        /// JSON file `{"L": [[...]], "a": [...]}`.
        #[arg(long)]
        motion: Option<PathBuf>,
    },
}

/// Flags merged over the config file.
struct Settings {
    cli: Cli,
    file: RunConfig,
}

impl Settings {
    fn seed(&self) -> u64 {
        self.cli.seed.or(self.file.seed).unwrap_or(0)
    }

    fn dt(&self) -> Option<f64> {
        self.cli.dt.or(self.file.dt)
    }

    fn steps(&self) -> Option<u64> {
        self.cli.steps.or(self.file.steps)
    }

    fn tolerance(&self) -> Option<f64> {
        self.cli.tolerance.or(self.file.tolerance)
    }

    fn metric(&self) -> Option<&str> {
        self.cli.metric.as_deref().or(self.file.metric.as_deref())
    }

    fn out(&self) -> Option<&Path> {
        self.cli.out.as_deref().or(self.file.out.as_deref())
    }
}

fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

fn read(path: Option<PathBuf>, what: &str) -> Result<String, Failure> {
    let path = path.ok_or_else(|| Failure::Usage(format!("missing --{what}")))?;
    std::fs::read_to_string(&path)
        .map_err(|e| Failure::Other(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| other(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(other)
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(other)
}

fn check_positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    #[serde(flatten)]
    summary: &'a TrajectorySummary,
    tolerance: f64,
    pass: bool,
}

fn trajectory_csv(traj: &Trajectory) -> Result<String, Failure> {
    let n = traj.samples.first().map_or(0, |s| s.particles.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for q in ["x", "v"] {
            for c in ["x", "y", "z"] {
                header.push(format!("{q}{i}_{c}"));
            }
        }
    }
    header.extend(["P_x", "P_y", "P_z", "M_x", "M_y", "M_z", "E_kin"].map(String::from));
    w.write_record(&header).map_err(other)?;
    for s in &traj.samples {
        let mut row = vec![s.t.to_string()];
        for p in &s.particles {
            row.extend(p.x.iter().chain(p.v.iter()).map(f64::to_string));
        }
        row.extend(
            s.momentum
                .iter()
                .chain(s.angular_momentum.iter())
                .map(f64::to_string),
        );
        row.push(s.kinetic_energy.to_string());
        w.write_record(&row).map_err(other)?;
    }
    String::from_utf8(w.into_inner().map_err(other)?).map_err(other)
}

fn run_simulate(
    s: &Settings,
    input: Option<PathBuf>,
    summary: Option<PathBuf>,
    record_every: Option<u64>,
    origin: Option<Vec<f64>>,
) -> Result<(), Failure> {
    if let Some(m) = s.metric() {
        if m != "euclidean3" {
            return Err(Failure::Usage(format!(
                "simulate works over euclidean3, got metric `{m}`"
            )));
        }
    }
    let body = Body::from_json(&read(input, "input")?).map_err(usage)?;
    let origin = match origin {
        Some(o) if o.len() == 3 => Vector3::new(o[0], o[1], o[2]),
        Some(o) => {
            return Err(Failure::Usage(format!(
                "origin needs 3 coordinates, got {}",
                o.len()
            )))
        }
        None => Vector3::zeros(),
    };
    let defaults = SimulationOptions::default();
    let opts = SimulationOptions {
        dt: check_positive("dt", s.dt().unwrap_or(defaults.dt))?,
        steps: s.steps().unwrap_or(defaults.steps),
        origin,
        record_every: record_every.unwrap_or(defaults.record_every),
    };
    let tolerance = s.tolerance().unwrap_or(SIMULATE_TOLERANCE);
    let traj = simulate(&body, &opts).map_err(other)?;
    emit(s.out(), &trajectory_csv(&traj)?)?;
    let residual = traj.summary.balance_max_residual;
    let pass = residual <= tolerance;
    let doc = to_json(&SimulateSummary {
        summary: &traj.summary,
        tolerance,
        pass,
    })?;
    match summary {
        Some(p) => std::fs::write(&p, doc)
            .map_err(|e| other(format!("cannot write {}: {e}", p.display())))?,
        None => eprint!("{doc}"),
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "dM/dt = K residual {residual:e} exceeds tolerance {tolerance:e}"
        )))
    }
}

fn run_verify(
    s: &Settings,
    cases: Option<usize>,
    only: Option<String>,
    sequential: bool,
) -> Result<(), Failure> {
    let opts = VerifyOptions {
        seed: s.seed(),
        cases: cases.unwrap_or(verify::DEFAULT_CASES),
        tolerance: s.tolerance(),
        only,
        parallel: !sequential,
    };
    if opts.cases == 0 {
        return Err(Failure::Usage("cases must be at least 1".into()));
    }
    let report = verify::run(&opts);
    if report.properties.is_empty() {
        return Err(Failure::Usage("no property matches the filter".into()));
    }
    for p in &report.properties {
        let status = if p.pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{status} {:<42} max {:>10.3e}  tol {:.0e}",
            p.id, p.max_residual, p.tolerance
        );
    }
    emit(s.out(), &to_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        let n = report.failures().count();
        Err(Failure::Tolerance(format!(
            "{n} of {} properties failed",
            report.properties.len()
        )))
    }
}

fn metric_for(name: Option<&str>, n: usize) -> Result<Arc<Metric>, Failure> {
    let metric = match name {
        Some(name) => Metric::from_name(name).map_err(usage)?,
        None => match n {
            3 => Metric::euclidean3(),
            4 => Metric::minkowski4(),
            _ => {
                return Err(Failure::Usage(format!(
                    "no default metric for {n} variables; pass --metric"
                )))
            }
        },
    };
    if metric.n() != n {
        return Err(Failure::Usage(format!(
            "field has {n} variables, metric `{}` has {}",
            name.unwrap_or("?"),
            metric.n()
        )));
    }
    Ok(Arc::new(metric))
}

#[derive(Serialize)]
struct PairDoc {
    k: usize,
    l: usize,
    field: PolyFieldDoc,
}

#[derive(Serialize)]
struct ResidualDoc {
    h: f64,
    max: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct DeriveDoc {
    metric: MetricSpec,
    origin: Vec<f64>,
    kind: &'static str,
    pairs: Vec<PairDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<ResidualDoc>,
}

fn run_derive(
    s: &Settings,
    input: Option<PathBuf>,
    residual: bool,
    h: Option<f64>,
    origin: Option<Vec<f64>>,
) -> Result<(), Failure> {
    let field = PolyField::from_json(&read(input, "input")?).map_err(usage)?;
    let n = field.n();
    let metric = metric_for(s.metric(), n)?;
    let origin = origin.unwrap_or_else(|| vec![0.0; n]);
    let chart = Frame::p_basis(metric.clone(), &origin).map_err(usage)?;
    let form = d_form(&field, &chart).map_err(other)?;
    let mut pairs = Vec::new();
    for k in 0..=n {
        for l in k + 1..=n {
            let comps: Vec<_> = (0..field.comps().len())
                .map(|a| form.component(a, k, l).clone())
                .collect();
            let f = match field.kind() {
                FieldKind::Scalar => {
                    PolyField::scalar(comps.into_iter().next().expect("one component"))
                }
                FieldKind::Vector => PolyField::vector(comps).map_err(other)?,
            };
            pairs.push(PairDoc {
                k,
                l,
                field: PolyFieldDoc::from(&f),
            });
        }
    }
    let residual = if residual {
        let h = check_positive("h", h.unwrap_or(DERIVE_STEP))?;
        let tolerance = s.tolerance().unwrap_or(DERIVE_TOLERANCE);
        let mut max: f64 = 0.0;
        for k in 0..=n {
            for l in k + 1..=n {
                max = max.max(r_partial_check(&field, &chart, k, l, h).map_err(usage)?);
            }
        }
        Some(ResidualDoc {
            h,
            max,
            tolerance,
            pass: max <= tolerance,
        })
    } else {
        None
    };
    let kind = match field.kind() {
        FieldKind::Scalar => "scalar",
        FieldKind::Vector => "vector",
    };
    let failed = residual.as_ref().filter(|r| !r.pass).map(|r| {
        format!(
            "finite-difference residual {:e} exceeds {:e}",
            r.max, r.tolerance
        )
    });
    let doc = DeriveDoc {
        metric: MetricSpec::from(metric.as_ref()),
        origin,
        kind,
        pairs,
        residual,
    };
    emit(s.out(), &to_json(&doc)?)?;
    failed.map_or(Ok(()), |m| Err(Failure::Tolerance(m)))
}

enum Transformable {
    Tensor(ExtTensor),
    Field(PolyField),
}

fn parse_transformable(text: &str) -> Result<Transformable, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(usage)?;
    if value.get("comps").is_some() {
        let doc: TensorDoc = serde_json::from_value(value).map_err(usage)?;
        Ok(Transformable::Tensor(doc.build().map_err(usage)?))
    } else {
        let doc: PolyFieldDoc = serde_json::from_value(value).map_err(usage)?;
        Ok(Transformable::Field(doc.build().map_err(usage)?))
    }
}

fn run_transform(
    s: &Settings,
    input: Option<PathBuf>,
    motion: Option<PathBuf>,
) -> Result<(), Failure> {
    let target = parse_transformable(&read(input, "input")?)?;
    let params = serde_json::from_str::<MotionParamsDoc>(&read(motion, "motion")?)
        .map_err(usage)?
        .build()
        .map_err(usage)?;
    let text = match target {
        Transformable::Tensor(t) => {
            if t.frame().kind() != FrameKind::PBasis {
                return Err(Failure::Usage(
                    "transform needs P-basis components; transport the tensor first".into(),
                ));
            }
            if let Some(name) = s.metric() {
                if t.frame().metric() != &Metric::from_name(name).map_err(usage)? {
                    return Err(Failure::Usage(format!(
                        "tensor metric differs from `{name}`"
                    )));
                }
            }
            let motion = t_from_params(&params, t.frame()).map_err(usage)?;
            let moved = apply_motion(&motion, &t).map_err(usage)?;
            to_json(&TensorDoc::from(&moved))?
        }
        Transformable::Field(f) => {
            let metric = metric_for(s.metric(), f.n())?;
            params.validate(&metric).map_err(usage)?;
            to_json(&PolyFieldDoc::from(
                &transform_field(&f, &params).map_err(usage)?,
            ))?
        }
    };
    emit(s.out(), &text)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?.resolve_paths(p.parent().unwrap_or(Path::new("."))),
        None => RunConfig::default(),
    };
    let command = match &cli.command {
        Some(_) => None,
        None => Some(file.command.clone().ok_or_else(|| {
            Failure::Usage("no command given (simulate, verify, derive, transform)".into())
        })?),
    };
    let mut settings = Settings { cli, file };
    let cmd = settings.cli.command.take();
    let f = settings.file.clone();
    match (cmd, command.as_deref()) {
        (
            Some(Command::Simulate {
                input,
                summary,
                record_every,
                origin,
            }),
            _,
        ) => run_simulate(
            &settings,
            pick(&input, &f.input),
            pick(&summary, &f.summary),
            pick(&record_every, &f.record_every),
            pick(&origin, &f.origin),
        ),
        (
            Some(Command::Verify {
                cases,
                only,
                sequential,
            }),
            _,
        ) => run_verify(
            &settings,
            pick(&cases, &f.cases),
            pick(&only, &f.only),
            sequential,
        ),
        (
            Some(Command::Derive {
                input,
                residual,
                h,
                origin,
            }),
            _,
        ) => run_derive(
            &settings,
            pick(&input, &f.input),
            residual || f.residual.unwrap_or(false),
            pick(&h, &f.h),
            pick(&origin, &f.origin),
        ),
        (Some(Command::Transform { input, motion }), _) => {
            run_transform(&settings, pick(&input, &f.input), pick(&motion, &f.motion))
        }
        (None, Some("simulate")) => {
            run_simulate(&settings, f.input, f.summary, f.record_every, f.origin)
        }
        (None, Some("verify")) => run_verify(&settings, f.cases, f.only, false),
        (None, Some("derive")) => run_derive(
            &settings,
            f.input,
            f.residual.unwrap_or(false),
            f.h,
            f.origin,
        ),
        (None, Some("transform")) => run_transform(&settings, f.input, f.motion),
        (None, Some(other)) => Err(Failure::Usage(format!(
            "unknown command `{other}` in config"
        ))),
        (None, None) => unreachable!("command resolved above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fivevec: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
