//! Command-line front end: parse a polynomial system and run one stage of the
//! pipeline, printing text or JSON.

mod format;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use holderbound::bounds::{
    exponent_for_system, quadratic_bound, quadratic_from_polynomial, ExponentJson, QuadraticJson,
};
use holderbound::newton::{FaceJson, SystemNewton};
use holderbound::nondegen::{certify_analyzed, CertifyConfig, FaceStatus, NondegVerdict};
use holderbound::verify::{
    slope, verify_bound, PenaltyConfig, PenaltyOracle, SamplePlan, Slope, VerificationReport,
    VerifyConfig,
};
use holderbound::{Execution, PolySystem};
use serde::Serialize;

use format::{point_set, sig6, vector};

#[derive(Parser, Debug)]
#[command(name = "holderbound", version, about = "Error bounds for polynomial inequality systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the data-parallel stages (1 runs sequentially).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polytopes, convenience, and faces at infinity.
    Analyze { input: PathBuf },
    /// Non-degeneracy at infinity on every face.
    Certify {
        input: PathBuf,
        /// Random samples per sign orthant and stage.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[command(flatten)]
        certify: CertifyArgs,
    },
    /// Explicit Hölder exponent of the global error bound.
    Exponent { input: PathBuf },
    /// Sample the error bound and fit its constant.
    Verify {
        input: PathBuf,
        /// Number of sample points.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Sampling box "lo:hi,lo:hi,..."; a single range applies to every axis.
        #[arg(long = "box", default_value = "-3:3", allow_hyphen_values = true)]
        bounds: String,
        /// Ring radii "r1,r2,..." for the slope probe.
        #[arg(long)]
        rings: Option<String>,
        /// Also write one CSV row per sample to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Certification samples per sign orthant and stage.
        #[arg(long, default_value_t = 4096)]
        certify_samples: usize,
        #[command(flatten)]
        certify: CertifyArgs,
    },
    /// Nonsmooth slope of max_i f_i at a point.
    Slope {
        input: PathBuf,
        /// Coordinates "v1,v2,...".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Square-root error bound of a single quadratic component.
    Quadratic {
        input: PathBuf,
        /// Component name; required when the system has several.
        #[arg(long)]
        component: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
struct CertifyArgs {
    #[arg(long, default_value_t = 1e-12)]
    tau_zero: f64,
    /// Axis-distance schedule "t1,t2,...".
    #[arg(long, default_value = "0.1,0.01,0.001")]
    tau_axis: String,
    #[arg(long, default_value_t = 16)]
    multistarts: usize,
}

/// Result of a run: rendered report plus whether it contains a finding.
struct Outcome {
    text: String,
    json: String,
    finding: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(finding) => ExitCode::from(u8::from(finding)),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let execution = match cli.common.workers {
        Some(0) => bail!("--workers must be at least 1"),
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring worker pool")?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let seed = cli.common.seed;
    let outcome = match &cli.command {
        Command::Analyze { input } => analyze(&load(input)?, execution)?,
        Command::Certify {
            input,
            samples,
            certify,
        } => {
            let sys = load(input)?;
            let verdict = certify_system(&sys, certify, *samples, seed, execution)?;
            render_certify(&verdict)?
        }
        Command::Exponent { input } => exponent(&load(input)?)?,
        Command::Verify {
            input,
            samples,
            bounds,
            rings,
            csv,
            certify_samples,
            certify,
        } => {
            let sys = load(input)?;
            let plan = SamplePlan::new(parse_box(bounds, sys.nvars())?, *samples, seed)?;
            let plan = match rings {
                Some(r) => plan.with_rings(parse_list(r, "--rings")?)?,
                None => plan,
            };
            verify(&sys, &plan, (certify, *certify_samples), execution, csv.as_deref())?
        }
        Command::Slope { input, point } => {
            let sys = load(input)?;
            let x = parse_list(point, "--point")?;
            if x.len() != sys.nvars() {
                bail!("--point has {} coordinates, the system has {} variables", x.len(), sys.nvars());
            }
            render_slope(&x, &slope(&sys.compile(), &x, None))?
        }
        Command::Quadratic { input, component } => quadratic(&load(input)?, component.as_deref())?,
    };
    let body = match cli.common.format {
        Format::Text => outcome.text,
        Format::Json => outcome.json + "\n",
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(outcome.finding)
}

fn load(path: &Path) -> Result<PolySystem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PolySystem::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("{flag}: '{v}' is not a number"))
        })
        .collect()
}

fn parse_box(s: &str, n: usize) -> Result<Vec<(f64, f64)>> {
    let ranges: Vec<(f64, f64)> = s
        .split(',')
        .map(|r| {
            let (lo, hi) = r
                .split_once(':')
                .with_context(|| format!("--box: '{r}' is not of the form lo:hi"))?;
            let lo = lo.trim().parse::<f64>().with_context(|| format!("--box: bad bound '{lo}'"))?;
            let hi = hi.trim().parse::<f64>().with_context(|| format!("--box: bad bound '{hi}'"))?;
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;
    match ranges.len() {
        1 => Ok(vec![ranges[0]; n]),
        m if m == n => Ok(ranges),
        m => bail!("--box has {m} ranges, the system has {n} variables"),
    }
}

fn certify_config(
    args: &CertifyArgs,
    samples_per_orthant: usize,
    seed: u64,
    execution: Execution,
) -> Result<CertifyConfig> {
    let cfg = CertifyConfig {
        samples_per_orthant,
        tau_zero: args.tau_zero,
        tau_axis: parse_list(&args.tau_axis, "--tau-axis")?,
        multistarts: args.multistarts,
        seed,
        execution,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn certify_system(
    sys: &PolySystem,
    args: &CertifyArgs,
    samples_per_orthant: usize,
    seed: u64,
    execution: Execution,
) -> Result<NondegVerdict> {
    let cfg = certify_config(args, samples_per_orthant, seed, execution)?;
    let analysis = SystemNewton::analyze(sys, &cfg.limits)?;
    Ok(certify_analyzed(sys, &analysis, &cfg)?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[derive(Serialize)]
struct ComponentJson {
    name: String,
    vertices: Vec<Vec<u32>>,
    convenient: bool,
    missing_axes: Vec<usize>,
}

#[derive(Serialize)]
struct AnalyzeJson {
    variables: Vec<String>,
    components: Vec<ComponentJson>,
    convenient: bool,
    gamma_vertices: Vec<Vec<u32>>,
    faces: Vec<FaceJson>,
}

fn analyze(sys: &PolySystem, execution: Execution) -> Result<Outcome> {
    let limits = holderbound::newton::EnumerationLimits {
        execution,
        ..Default::default()
    };
    let a = SystemNewton::analyze(sys, &limits)?;
    let components: Vec<ComponentJson> = sys
        .names()
        .iter()
        .zip(&a.components)
        .zip(&a.convenience)
        .map(|((name, poly), conv)| ComponentJson {
            name: name.clone(),
            vertices: poly.vertices().iter().map(|k| k.entries().to_vec()).collect(),
            convenient: conv.convenient,
            missing_axes: conv.missing_axes.clone(),
        })
        .collect();
    let report = AnalyzeJson {
        variables: sys.varnames().to_vec(),
        convenient: a.is_convenient(),
        gamma_vertices: a.sum.vertices().iter().map(|k| k.entries().to_vec()).collect(),
        faces: a.faces.iter().map(|f| f.to_json()).collect(),
        components,
    };

    let mut text = String::new();
    writeln!(text, "variables: {}", report.variables.join(", "))?;
    for c in &report.components {
        let status = if c.convenient { "convenient".to_string() } else {
            let names: Vec<&str> = c.missing_axes.iter().map(|&j| sys.varnames()[j].as_str()).collect();
            format!("not convenient (missing pure powers of {})", names.join(", "))
        };
        writeln!(text, "component {}: Newton polytope vertices {}; {status}", c.name, point_set(&c.vertices))?;
    }
    writeln!(text, "system convenient: {}", report.convenient)?;
    writeln!(text, "Gamma vertices: {}", point_set(&report.gamma_vertices))?;
    writeln!(text, "faces at infinity: {}", report.faces.len())?;
    for f in &report.faces {
        writeln!(text, "  face {} (dim {}): support {}", f.id, f.dim, point_set(&f.support))?;
        writeln!(text, "    normal ({}), value {}", f.normal.join(","), f.value)?;
        if let Some(parts) = &f.decomposition {
            let parts: Vec<String> = parts.iter().map(|p| point_set(p)).collect();
            writeln!(text, "    decomposition {}", parts.join(" + "))?;
        }
    }
    Ok(Outcome {
        json: to_json(&report)?,
        text,
        finding: false,
    })
}

fn certify_text(v: &NondegVerdict) -> Result<String> {
    let mut text = String::new();
    writeln!(text, "status: {}", v.status.as_str())?;
    writeln!(text, "convenient: {}", v.convenient)?;
    for f in &v.faces {
        write!(
            text,
            "  face {}: {} (objective min {}, {} samples)",
            f.face,
            f.status.as_str(),
            sig6(f.objective_min),
            f.samples
        )?;
        if let Some(w) = &f.witness {
            let exact = if f.witness_exact { ", rank drop confirmed exactly" } else { "" };
            write!(text, " witness {}{exact}", vector(w))?;
        }
        writeln!(text)?;
    }
    Ok(text)
}

fn render_certify(v: &NondegVerdict) -> Result<Outcome> {
    Ok(Outcome {
        text: certify_text(v)?,
        json: to_json(v)?,
        finding: v.status == FaceStatus::Degenerate,
    })
}

fn exponent_text(e: &ExponentJson) -> Result<String> {
    let mut text = String::new();
    writeln!(text, "d = {}, n = {}, p = {}", e.d, e.n, e.p)?;
    writeln!(text, "H = {}", e.h)?;
    writeln!(text, "alpha = {}", e.alpha)?;
    writeln!(text, "beta = {}", e.beta)?;
    for note in &e.notes {
        writeln!(text, "note: {note}")?;
    }
    Ok(text)
}

fn exponent(sys: &PolySystem) -> Result<Outcome> {
    let e = exponent_for_system(sys)?.to_json();
    Ok(Outcome {
        text: exponent_text(&e)?,
        json: to_json(&e)?,
        finding: false,
    })
}

const ESTABLISHED: &str = "certified: convenient and non-degenerate at infinity (probable)";

fn hypothesis_label(v: &NondegVerdict) -> String {
    if !v.convenient {
        "error-bound hypothesis not established: system is not convenient".into()
    } else if v.status == FaceStatus::NondegenerateProbable {
        ESTABLISHED.into()
    } else {
        format!("error-bound hypothesis not established: certification {}", v.status.as_str())
    }
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    exponent: ExponentJson,
    certification: &'a NondegVerdict,
    hypothesis: String,
    report: &'a VerificationReport,
}

fn verify(
    sys: &PolySystem,
    plan: &SamplePlan,
    (certify, certify_samples): (&CertifyArgs, usize),
    execution: Execution,
    csv: Option<&Path>,
) -> Result<Outcome> {
    let verdict = certify_system(sys, certify, certify_samples, plan.seed(), execution)?;
    let mut rep = exponent_for_system(sys)?;
    rep.assumptions.convenient = Some(verdict.convenient);
    rep.assumptions.nondegenerate_probable = Some(verdict.status == FaceStatus::NondegenerateProbable);
    let search_box = plan
        .bounds()
        .iter()
        .map(|&(lo, hi)| (lo.min(-10.0), hi.max(10.0)))
        .collect();
    let oracle = PenaltyOracle::new(
        sys,
        PenaltyConfig {
            search_box: Some(search_box),
            seed: plan.seed(),
            ..Default::default()
        },
    )?;
    let cfg = VerifyConfig {
        execution,
        ..Default::default()
    };
    let report = verify_bound(sys, &rep, plan, &oracle, &cfg)?;
    if let Some(path) = csv {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(file)?;
    }
    let hypothesis = hypothesis_label(&verdict);

    let mut text = String::new();
    writeln!(text, "{hypothesis}")?;
    writeln!(text, "alpha = {}", report.alpha_used)?;
    writeln!(text, "samples = {}", report.samples.len())?;
    match report.fitted_c {
        Some(c) => writeln!(text, "fitted_c = {}", sig6(c))?,
        None => writeln!(text, "fitted_c = n/a (no sample outside S)")?,
    }
    writeln!(text, "violations = {}", report.violations)?;
    for r in &report.rings {
        let floor = r.slope_floor.map_or_else(|| "n/a".to_string(), sig6);
        writeln!(text, "  R = {}: slope floor {floor} ({} positive samples)", sig6(r.radius), r.positive_samples)?;
    }
    if !report.rings.is_empty() {
        writeln!(text, "trend: {}", report.trend.as_str())?;
    }
    let json = to_json(&VerifyJson {
        exponent: rep.to_json(),
        certification: &verdict,
        hypothesis,
        report: &report,
    })?;
    Ok(Outcome {
        text,
        json,
        finding: report.violations > 0 || verdict.status == FaceStatus::Degenerate,
    })
}

#[derive(Serialize)]
struct SlopeJson<'a> {
    point: &'a [f64],
    slope: &'a Slope,
}

fn render_slope(x: &[f64], s: &Slope) -> Result<Outcome> {
    let mut text = String::new();
    writeln!(text, "point = {}", vector(x))?;
    writeln!(text, "slope = {}", sig6(s.value))?;
    let active: Vec<String> = s.active.iter().map(|i| (i + 1).to_string()).collect();
    writeln!(text, "active = {{{}}}", active.join(", "))?;
    writeln!(text, "lambda = {}", vector(&s.lambda))?;
    Ok(Outcome {
        json: to_json(&SlopeJson { point: x, slope: s })?,
        text,
        finding: false,
    })
}

fn quadratic(sys: &PolySystem, component: Option<&str>) -> Result<Outcome> {
    let index = match component {
        Some(name) => sys
            .names()
            .iter()
            .position(|n| n == name)
            .with_context(|| format!("no component named '{name}'"))?,
        None if sys.len() == 1 => 0,
        None => bail!("the system has {} components; choose one with --component", sys.len()),
    };
    let (a, b, c0) = quadratic_from_polynomial(&sys.polys()[index])?;
    let q = quadratic_bound(a, b, c0)?.to_json();
    let mut text = String::new();
    writeln!(text, "component {}", sys.names()[index])?;
    writeln!(text, "eigenvalues = {}", vector(&q.eigenvalues))?;
    writeln!(text, "lambda_min_nonzero = {}", sig6(q.lambda_min_nonzero))?;
    writeln!(text, "constant = {}", sig6(q.constant))?;
    writeln!(text, "critical_point = {}", vector(&q.critical_point))?;
    writeln!(text, "critical_value = {}", sig6(q.critical_value))?;
    Ok(Outcome {
        json: to_json::<QuadraticJson>(&q)?,
        text,
        finding: false,
    })
}
