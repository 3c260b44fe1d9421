//! Batch front end: argument parsing, command dispatch and artifacts.

pub mod output;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use floatlab_core::curvature::{boundary_samples, floating_curvature_with, limit_ratio_detail, DEFAULT_NODES};
use floatlab_core::directions::family;
use floatlab_core::floating::floating_body_with;
use floatlab_core::genbody::{convolution_body, illumination_body, santalo_region, GenKind, GenShape};
use floatlab_core::homothety::homothety_defect_with;
use floatlab_core::threshold::ABound;
use floatlab_core::{petty_scan, threshold, BodySpec, CapConfig, CapSolver, FloatingHull, FloatingOptions};

use crate::output::{cell, Svg, Table};
use crate::spec::{read_body_spec, read_threshold_inputs, SpecError};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "floatlab", version, about = "Floating bodies, their curvature and homothety checks")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Number of directions (or rays, or boundary samples).
    #[arg(long = "m", global = true, default_value_t = 720)]
    pub m: usize,
    /// Cut-level volume tolerance relative to |K|.
    #[arg(long = "tol-vol", global = true, default_value_t = 1e-10)]
    pub tol_vol: f64,
    /// Seed of the sampled cap volumes.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Write PREFIX.csv (and PREFIX.svg where there is a picture) instead
    /// of printing the table.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    /// Smallest defect that can count as non-homothetic.
    #[arg(long = "classify-floor", global = true, default_value_t = 1e-3)]
    pub classify_floor: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut levels of the floating body K_δ.
    Float {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Gauss curvature of ∂K_δ at the points with the given outer normals.
    Curvature {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        delta: f64,
        /// One outer normal (normalized); otherwise `count` spread directions.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Quadrature nodes on each section (spatial bodies).
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
    /// The normalized curvature ratio at a boundary point as δ shrinks.
    LimitStudy {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5,1e-6")]
        deltas: Vec<f64>,
    },
    /// Compares K_δ with the homothetic copy of K of the same area.
    HomothetyCheck {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Samples κ/⟨x,N⟩^{n+1} over the boundary.
    PettyScan {
        #[arg(long)]
        body: PathBuf,
    },
    /// The explicit threshold δ(K) and its components.
    Threshold {
        #[arg(long)]
        inputs: PathBuf,
        /// Use Δ_{a,M} with the denominators as printed.
        #[arg(long)]
        paper_literal: bool,
    },
    /// Illumination body, convolution body or Santaló region of a polygon.
    Genbody {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_enum)]
        kind: GenArg,
        /// δ for illumination, t otherwise.
        #[arg(long)]
        param: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenArg {
    Illumination,
    Convolution,
    Santalo,
}

/// What a command produced.
struct Artifacts {
    table: Table,
    svg: Option<Svg>,
    summary: Vec<String>,
    /// The summary is the primary result and goes to stdout even when the
    /// table does too.
    summary_is_result: bool,
}

impl Artifacts {
    fn table(table: Table) -> Self {
        Artifacts { table, svg: None, summary: Vec::new(), summary_is_result: false }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), SpecError> {
        if self.m < 8 {
            return Err(SpecError::Invalid(format!("--m must be at least 8 (got {})", self.m)));
        }
        for (name, v) in [("--tol-vol", self.tol_vol), ("--classify-floor", self.classify_floor)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpecError::Invalid(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }

    fn cap(&self) -> CapConfig {
        CapConfig { tol_vol_rel: self.tol_vol, seed: self.seed, ..CapConfig::default() }
    }
}

fn outline(body: &BodySpec, m: usize) -> anyhow::Result<Vec<[f64; 2]>> {
    Ok(boundary_samples(body, m)?.into_iter().map(|p| [p[0], p[1]]).collect())
}

fn polygon_points(p: &floatlab_core::PolygonChain) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v.x, v.y]).collect()
}

fn axis_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

fn float_cmd(cfg: &RunConfig, body: &BodySpec, delta: f64) -> anyhow::Result<Artifacts> {
    let n = body.dim();
    let opts = FloatingOptions { cap: cfg.cap(), estimate_error: n == 2 };
    let fb = floating_body_with(body, delta, cfg.m, &opts)?;
    let mut table = if n == 2 {
        Table::new(["angle", "cut_level"])
    } else {
        Table::new(axis_names("u", n).into_iter().chain(["cut_level".to_string()]))
    };
    for (u, t) in fb.directions.iter().zip(&fb.support_levels) {
        if n == 2 {
            table.push_numbers([u[1].atan2(u[0]).rem_euclid(std::f64::consts::TAU), *t]);
        } else {
            table.push_numbers(u.iter().copied().chain([*t]));
        }
    }
    let mut art = Artifacts::table(table);
    art.summary.push(format!("delta={}, m={}, contained_in_source={}", cell(delta), cfg.m, fb.contained_in_source));
    if let Some(e) = fb.discretization_error {
        art.summary.push(format!("estimated discretization error={}", cell(e)));
    }
    if let FloatingHull::Polygon(p) = &fb.hull {
        let mut svg = Svg::default();
        svg.curve("K", "black", outline(body, 720)?).curve("K_delta", "#1f77b4", polygon_points(p));
        art.svg = Some(svg);
    }
    Ok(art)
}

fn unit(v: &[f64]) -> Result<Vec<f64>, SpecError> {
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0 && len.is_finite()) {
        return Err(SpecError::Invalid("direction must be a nonzero finite vector".into()));
    }
    Ok(v.iter().map(|x| x / len).collect())
}

fn curvature_cmd(
    cfg: &RunConfig,
    body: &BodySpec,
    delta: f64,
    direction: Option<&[f64]>,
    count: usize,
    nodes: usize,
) -> anyhow::Result<Artifacts> {
    let n = body.dim();
    let dirs = match direction {
        Some(d) if d.len() != n => {
            return Err(SpecError::Invalid(format!("direction has {} components, the body lives in dimension {n}", d.len())).into())
        }
        Some(d) => vec![unit(d)?],
        None if count == 0 => return Err(SpecError::Invalid("--count must be positive".into()).into()),
        None => family(n, count),
    };
    let cap = cfg.cap();
    let solver = CapSolver::new(body, cap);
    let mut table = Table::new(axis_names("u", n).into_iter().chain(["cut_level".into(), "curvature".into()]));
    for u in &dirs {
        let t = solver.cut_level(u, delta)?.level;
        let k = floating_curvature_with(body, delta, u, &cap, nodes)?;
        table.push_numbers(u.iter().copied().chain([t, k]));
    }
    Ok(Artifacts::table(table))
}

fn limit_cmd(body: &BodySpec, point: &[f64], deltas: &[f64]) -> anyhow::Result<Artifacts> {
    let n = body.dim();
    if point.len() != n {
        return Err(SpecError::Invalid(format!("point has {} components, the body lives in dimension {n}", point.len())).into());
    }
    if !body.is_on_boundary(point) {
        return Err(SpecError::Invalid("point is not on the boundary of the body".into()).into());
    }
    let target = body.gauss_curvature(point)?.powf(1.0 / (n as f64 + 1.0));
    let mut table = Table::new(
        ["delta", "ratio", "target", "abs_error", "directions"]
            .into_iter()
            .map(String::from)
            .chain(axis_names("x_delta", n)),
    );
    for &delta in deltas {
        let r = limit_ratio_detail(body, point, delta)?;
        let mut row = vec![cell(delta), cell(r.ratio), cell(target), cell((r.ratio - target).abs()), r.directions.to_string()];
        row.extend(r.x_delta.iter().copied().map(cell));
        table.push(row);
    }
    Ok(Artifacts::table(table))
}

fn homothety_cmd(cfg: &RunConfig, body: &BodySpec, delta: f64) -> anyhow::Result<Artifacts> {
    let opts = FloatingOptions { cap: cfg.cap(), estimate_error: true };
    let rep = homothety_defect_with(body, delta, cfg.m, &opts)?;
    let threshold = cfg.classify_floor.max(5.0 * rep.discretization_error);
    let homothetic = rep.defect <= threshold;
    let mut table = Table::new(["delta", "m", "c", "defect", "discretization_error", "threshold", "homothetic", "c_lsq"]);
    table.push(vec![
        cell(delta),
        cfg.m.to_string(),
        cell(rep.c),
        cell(rep.defect),
        cell(rep.discretization_error),
        cell(threshold),
        homothetic.to_string(),
        cell(rep.c_lsq),
    ]);
    let verdict = if homothetic { "homothetic" } else { "NOT homothetic" };
    let centered = body.recentered();
    let mut svg = Svg::default();
    let k = outline(&centered, 720)?;
    let ck = k.iter().map(|p| [rep.c * p[0], rep.c * p[1]]).collect();
    svg.curve("K (centered)", "black", k)
        .curve("K_delta", "#1f77b4", polygon_points(&rep.hull))
        .curve("c K", "#d62728", ck);
    Ok(Artifacts {
        table,
        svg: Some(svg),
        summary: vec![format!(
            "defect={}, {verdict} at resolution m={} (c={}, discretization error={}; a numerical verdict, not a proof)",
            cell(rep.defect),
            cfg.m,
            cell(rep.c),
            cell(rep.discretization_error)
        )],
        summary_is_result: true,
    })
}

fn petty_cmd(cfg: &RunConfig, body: &BodySpec) -> anyhow::Result<Artifacts> {
    let n = body.dim();
    let scan = petty_scan(body, cfg.m)?;
    let mut table = Table::new(axis_names("x", n).into_iter().chain(["curvature".into(), "value".into()]));
    for s in &scan.samples {
        table.push_numbers(s.point.iter().copied().chain([s.curvature, s.value]));
    }
    let mut art = Artifacts::table(table);
    art.summary.push(format!(
        "tau={}, finite_tau={}, t_min={}, t_max={}, degenerate={}",
        cell(scan.tau),
        cell(scan.finite_tau),
        cell(scan.t_min),
        cell(scan.t_max),
        scan.degenerate
    ));
    Ok(art)
}

fn threshold_cmd(inputs: &std::path::Path, literal: bool) -> anyhow::Result<Artifacts> {
    let inp = read_threshold_inputs(inputs)?;
    let rep = threshold(&inp)?;
    let (delta_cap_m, big_delta) = if literal {
        (rep.literal_delta_cap_m, rep.literal_big_delta_a_cap_m)
    } else {
        (rep.delta_cap_m, rep.big_delta_a_cap_m)
    };
    let delta_k = [rep.delta_0, rep.delta_1, rep.delta_2, rep.delta_m, delta_cap_m, rep.ball_terms.0, rep.ball_terms.1]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let rows = [
        ("a", rep.a),
        ("delta_0", rep.delta_0),
        ("delta_1", rep.delta_1),
        ("delta_2", rep.delta_2),
        ("delta_m", rep.delta_m),
        ("delta_M", delta_cap_m),
        ("ball_m", rep.ball_terms.0),
        ("ball_M", rep.ball_terms.1),
        ("delta_K", delta_k),
        ("t_am", rep.t_am),
        ("t_M1", rep.t_m1),
        ("t_M2", rep.t_m2),
        ("Delta_am", rep.big_delta_am),
        ("Delta_aM", big_delta),
        ("xi", rep.xi),
    ];
    let mut table = Table::new(["component", "value"]);
    for (name, v) in rows {
        table.push(vec![name.to_string(), cell(v)]);
    }
    let mut art = Artifacts::table(table);
    let bound = match rep.a_bound {
        ABound::Lower => "1 - (2/(1+tau))^((n+1)/(n-1))",
        ABound::Upper => "(3 tau/(1+2 tau))^((n+1)/(n-1)) - 1",
    };
    art.summary.push(format!("a = {bound}; delta_K={}", cell(delta_k)));
    Ok(art)
}

fn genbody_cmd(cfg: &RunConfig, body: &BodySpec, kind: GenArg, param: f64) -> anyhow::Result<Artifacts> {
    let Some(poly) = body.as_polygon() else {
        return Err(SpecError::Invalid("genbody needs a polygon (or l_1 / l_inf disk)".into()).into());
    };
    let res = match kind {
        GenArg::Illumination => illumination_body(&poly, param, cfg.m)?,
        GenArg::Convolution => convolution_body(&poly, param, cfg.m)?,
        GenArg::Santalo => santalo_region(&poly, param, cfg.m)?,
    };
    let mut table = Table::new(["angle", "radius"]);
    for (k, r) in res.radii.iter().enumerate() {
        table.push_numbers([std::f64::consts::TAU * k as f64 / res.ray_count as f64, *r]);
    }
    let shape = match &res.shape {
        GenShape::Polygon(p) => format!("polygon with {} vertices, area {}", p.len(), cell(p.area())),
        GenShape::Point(_) => "a single point".into(),
        GenShape::Empty => "empty".into(),
    };
    let mut svg = Svg::default();
    svg.curve("P", "black", polygon_points(&poly));
    if let Some(p) = res.polygon() {
        svg.curve(res.kind.name(), "#1f77b4", polygon_points(p));
    }
    svg.mark([res.center.x, res.center.y], "#d62728");
    let mut art = Artifacts::table(table);
    art.summary.push(format!(
        "{} body: {shape}; center=({}, {})",
        res.kind.name(),
        cell(res.center.x),
        cell(res.center.y)
    ));
    if res.kind == GenKind::Santalo && res.shape == GenShape::Empty {
        art.summary.push("the minimal polar area exceeds 1/t".into());
    }
    art.svg = Some(svg);
    Ok(art)
}

fn execute(cli: &Cli) -> anyhow::Result<Artifacts> {
    let cfg = &cli.config;
    cfg.validate()?;
    let load = |p: &PathBuf| read_body_spec(p).with_context(|| format!("body spec {}", p.display()));
    match &cli.command {
        Command::Float { body, delta } => float_cmd(cfg, &load(body)?, *delta),
        Command::Curvature { body, delta, direction, count, nodes } => {
            curvature_cmd(cfg, &load(body)?, *delta, direction.as_deref(), *count, *nodes)
        }
        Command::LimitStudy { body, point, deltas } => limit_cmd(&load(body)?, point, deltas),
        Command::HomothetyCheck { body, delta } => homothety_cmd(cfg, &load(body)?, *delta),
        Command::PettyScan { body } => petty_cmd(cfg, &load(body)?),
        Command::Threshold { inputs, paper_literal } => {
            threshold_cmd(inputs, *paper_literal).with_context(|| format!("threshold inputs {}", inputs.display()))
        }
        Command::Genbody { body, kind, param } => genbody_cmd(cfg, &load(body)?, *kind, *param),
    }
}

/// Maps a failure to the exit-code contract: 2 for bad input, 3 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SpecError>() {
            return if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC };
        }
        if let Some(e) = cause.downcast_ref::<floatlab_core::Error>() {
            return if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC };
        }
    }
    EXIT_NUMERIC
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("FLOATLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => bail!(SpecError::Invalid(format!("FLOATLAB_THREADS must be a positive integer (got {raw:?})"))),
    };
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn emit(cli: &Cli, art: &Artifacts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<()> {
    match &cli.config.out {
        Some(prefix) => {
            let csv_path = with_suffix(prefix, "csv");
            let file = std::fs::File::create(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?;
            art.table.write(std::io::BufWriter::new(file))?;
            if let Some(svg) = &art.svg {
                let svg_path = with_suffix(prefix, "svg");
                std::fs::write(&svg_path, svg.render()).with_context(|| format!("cannot write {}", svg_path.display()))?;
            }
            for line in &art.summary {
                writeln!(stdout, "{line}")?;
            }
        }
        None => {
            if art.summary_is_result {
                for line in &art.summary {
                    writeln!(stdout, "{line}")?;
                }
            } else {
                art.table.write(&mut *stdout)?;
                for line in &art.summary {
                    writeln!(stderr, "{line}")?;
                }
            }
        }
    }
    Ok(())
}

fn with_suffix(prefix: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let result = configure_threads().and_then(|()| execute(&cli)).and_then(|art| emit(&cli, &art, stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            exit_code(&e)
        }
    }
}
