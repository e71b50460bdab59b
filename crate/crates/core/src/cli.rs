//! The `horoconv` command line.
//!
//! Every subcommand builds one `horoconv-report/1` document. Reports go to
//! stdout or `--out`; warnings and timing go to stderr so the report stays
//! byte-deterministic. Exit codes: 0 pass, 2 spec error, 3 domain error or
//! failed check, 4 eigenvalue bound, 5 solver singularity.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::catalog::{self, CatalogEntry, VerifyOptions};
use crate::chart::SpherePoint;
use crate::conformal::{
    dilate, dilation_for_max, schouten, schouten_in_chart, secondary_chart, sigma_k, ConformalMetricField,
    DerivativeMode, SigmaConvention, HALF_MARGIN,
};
use crate::correspondence::{bound_tol, dictionary_tol, is_horospherically_convex};
use crate::error::{Error, Result};
use crate::invariance::{
    detect_radial_structure, is_hypersurface_invariant, is_metric_invariant, mobius_from_isometry,
    StructureThresholds,
};
use crate::io::slice::{default_axes, hypersurface_slice, Slice};
use crate::io::spec::{parse_generator, MetricSpec};
use crate::io::{export_mesh, table, write_file, MeshFormat};
use crate::lorentz::make_isometry;
use crate::radial::{
    detect_period, profile_to_hypersurface, round_level, round_solution, shoot, shoot_both, Direction,
    PeriodDetection, RadialProfile, ShootConfig,
};
use crate::report::{fmt_f64, fmt_list, render_document, CheckRecord, VerificationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_BOUND: i32 = 4;
pub const EXIT_SINGULAR: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Raw,
    Normalized,
}

impl From<Convention> for SigmaConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Raw => SigmaConvention::Raw,
            Convention::Normalized => SigmaConvention::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Fd,
}

impl From<Mode> for DerivativeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Analytic => DerivativeMode::Analytic,
            Mode::Fd => DerivativeMode::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Constant,
    Delaunay,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Obj,
    Ply,
}

#[derive(Debug, Parser)]
#[command(
    name = "horoconv",
    version,
    about = "Conformal metrics on S^n and horospherically convex hypersurfaces in H^{n+1}"
)]
pub struct Cli {
    /// Sphere dimension n (at least 3).
    #[arg(long, global = true, default_value_t = 3)]
    pub n: usize,
    /// Override the tolerance of the command's main check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// sigma_k convention: raw e_k or e_k divided by binomial(n, k).
    #[arg(long, global = true, value_enum, default_value_t = Convention::Raw)]
    pub sigma_convention: Convention,
    /// Dilate the metric below the eigenvalue bound lambda < 1/2 when needed.
    #[arg(long, global = true)]
    pub dilate: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify isoparametric catalog entries over their default sweep.
    VerifyCatalog {
        /// Entry name or `all`.
        #[arg(long, default_value = "all")]
        entry: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
        /// Single instance instead of the sweep: radius parameter.
        #[arg(long)]
        r: Option<f64>,
        /// Single instance: distance parameter.
        #[arg(long)]
        t: Option<f64>,
        /// Single instance: product split k.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Schouten eigenvalues, sigma_k values and eigenvalue structure of a metric.
    Analyze {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Build the hypersurface of a metric: jets CSV and a slice mesh.
    ///
    /// The mesh is the great 2-sphere through `--slice-axes` (default
    /// n-1,n,n+1) sampled on a ROWSxCOLS grid, in Poincare-ball coordinates
    /// along the same axes.
    Correspond {
        #[arg(long)]
        spec: String,
        /// Slice grid ROWSxCOLS.
        #[arg(long, default_value = "16x32")]
        grid: String,
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        #[arg(long)]
        jets_out: Option<PathBuf>,
        /// Three distinct ambient axes in 1..=n+1.
        #[arg(long)]
        slice_axes: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Metric and hypersurface invariance under Lorentz generators.
    Invariance {
        #[arg(long)]
        spec: String,
        /// `rotation:a,b[,angle]` or `boost:axis[,rapidity]`; repeat or
        /// separate with ';'. A missing parameter sweeps +-1, +-0.3, +-0.05.
        #[arg(long = "generator", required = true)]
        generators: Vec<String>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Shoot radial solutions of sigma_k = c.
    Radial {
        #[arg(long)]
        k: usize,
        /// Level c (default: the round metric's level).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = Branch::Constant)]
        branch: Branch,
        /// Delaunay start offset: u(r0) = -perturb, r0 u'(r0) = -1.
        #[arg(long, default_value_t = 0.05)]
        perturb: f64,
        /// Log-radial span (default 4 for constant and flat, 40 for delaunay).
        #[arg(long)]
        span: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 1e-10)]
        ode_tol: f64,
        #[arg(long)]
        profile_out: Option<PathBuf>,
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        /// Profile samples along the lifted mesh.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Rotation segments of the lifted mesh.
        #[arg(long, default_value_t = 24)]
        segments: usize,
    },
    /// Write the slice mesh of a metric's hypersurface.
    ExportMesh {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value = "16x32")]
        grid: String,
        #[arg(long)]
        slice_axes: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Output file (.obj or .ply unless --format is given).
        output: PathBuf,
    },
}

/// What a run produced. `report` is `None` when the command failed before
/// building one.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<String>,
    /// Lines for stderr.
    pub messages: Vec<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidParameter(_)
        | Error::InvalidAxis { .. }
        | Error::KOutOfRange { .. }
        | Error::DimensionTooSmall(_)
        | Error::DimensionMismatch { .. }
        | Error::Io(_) => EXIT_SPEC,
        Error::EigenvalueBound { .. } => EXIT_BOUND,
        Error::SingularOde { .. } | Error::StepUnderflow { .. } => EXIT_SINGULAR,
        _ => EXIT_DOMAIN,
    }
}

struct Ctx {
    n: usize,
    tol: Option<f64>,
    seed: u64,
    convention: SigmaConvention,
    dilate: bool,
    messages: Vec<String>,
}

impl Ctx {
    fn warn(&mut self, msg: impl Into<String>) {
        self.messages.push(format!("warning: {}", msg.into()));
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Outcome {
    let mut ctx = Ctx {
        n: cli.n,
        tol: cli.tol,
        seed: cli.seed,
        convention: cli.sigma_convention.into(),
        dilate: cli.dilate,
        messages: Vec::new(),
    };
    let name = command_name(&cli.command);
    let result = dispatch(&mut ctx, cli.command);
    let mut messages = std::mem::take(&mut ctx.messages);
    match result {
        Ok(reports) => {
            let doc = render_document(name, &reports);
            let code = if reports.iter().all(|r| r.passed()) {
                EXIT_PASS
            } else {
                EXIT_DOMAIN
            };
            if let Some(path) = &cli.out {
                if let Err(e) = write_file(path, &doc) {
                    messages.push(format!("error: {e}"));
                    return Outcome {
                        code: exit_code(&e),
                        report: Some(doc),
                        messages,
                    };
                }
            }
            Outcome {
                code,
                report: Some(doc),
                messages,
            }
        }
        Err(e) => {
            messages.push(format!("error: {e}"));
            Outcome {
                code: exit_code(&e),
                report: None,
                messages,
            }
        }
    }
}

/// Parses `args` (program name first) and runs. Usage errors exit 2,
/// `--help` and `--version` exit 0.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC } else { EXIT_PASS };
            Outcome {
                code,
                report: None,
                messages: vec![e.render().to_string()],
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::VerifyCatalog { .. } => "verify-catalog",
        Command::Analyze { .. } => "analyze",
        Command::Correspond { .. } => "correspond",
        Command::Invariance { .. } => "invariance",
        Command::Radial { .. } => "radial",
        Command::ExportMesh { .. } => "export-mesh",
    }
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<Vec<VerificationReport>> {
    match command {
        Command::VerifyCatalog {
            entry,
            samples,
            mode,
            r,
            t,
            k,
        } => verify_catalog(ctx, &entry, samples, mode.into(), (r, t, k)),
        Command::Analyze { spec, points } => analyze(ctx, &spec, points).map(|r| vec![r]),
        Command::Correspond {
            spec,
            grid,
            mesh_out,
            jets_out,
            slice_axes,
            format,
        } => {
            let opts = SliceOptions::parse(ctx.n, &grid, slice_axes.as_deref())?;
            correspond(ctx, &spec, opts, mesh_out.as_deref(), jets_out.as_deref(), format).map(|r| vec![r])
        }
        Command::Invariance {
            spec,
            generators,
            samples,
        } => invariance(ctx, &spec, &generators, samples).map(|r| vec![r]),
        Command::Radial {
            k,
            c,
            branch,
            perturb,
            span,
            r0,
            ode_tol,
            profile_out,
            mesh_out,
            samples,
            segments,
        } => {
            let args = RadialArgs {
                k,
                c,
                branch,
                perturb,
                span,
                r0,
                ode_tol,
                samples,
                segments,
            };
            radial(ctx, &args, profile_out.as_deref(), mesh_out.as_deref()).map(|r| vec![r])
        }
        Command::ExportMesh {
            spec,
            grid,
            slice_axes,
            format,
            output,
        } => {
            let opts = SliceOptions::parse(ctx.n, &grid, slice_axes.as_deref())?;
            correspond(ctx, &spec, opts, Some(&output), None, format).map(|mut r| {
                r.title = format!("export-mesh {}", r.spec);
                vec![r]
            })
        }
    }
}

fn tol_or(ctx: &Ctx, default: f64) -> f64 {
    ctx.tol.unwrap_or(default)
}

// verify-catalog

fn verify_catalog(
    ctx: &mut Ctx,
    entry: &str,
    samples: usize,
    mode: DerivativeMode,
    (r, t, k): (Option<f64>, Option<f64>, Option<usize>),
) -> Result<Vec<VerificationReport>> {
    let n = ctx.n;
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    let names: Vec<&str> = if entry == "all" {
        catalog::ENTRY_NAMES.to_vec()
    } else if catalog::ENTRY_NAMES.contains(&entry) {
        vec![entry]
    } else {
        return Err(Error::InvalidParameter(format!(
            "unknown catalog entry '{entry}' (known: {}, all)",
            catalog::ENTRY_NAMES.join(", ")
        )));
    };
    let single = r.is_some() || t.is_some() || k.is_some();
    if single && names.len() != 1 {
        return Err(Error::InvalidParameter("--r/--t/--k need a single --entry".into()));
    }
    let mut entries: Vec<CatalogEntry> = Vec::new();
    for name in names {
        if single {
            entries.push(single_entry(name, n, r, t, k)?);
        } else {
            entries.extend(catalog::default_sweep(name, n)?);
        }
    }
    let mut opts = VerifyOptions::with_mode(mode);
    if let Some(tol) = ctx.tol {
        opts.quadric_tol = tol;
    }
    Ok(entries
        .iter()
        .map(|e| catalog::verify_entry_with(e, samples, ctx.seed, opts))
        .collect())
}

fn single_entry(name: &str, n: usize, r: Option<f64>, t: Option<f64>, k: Option<usize>) -> Result<CatalogEntry> {
    let unused = |what: &str| Error::InvalidParameter(format!("--{what} does not apply to {name}"));
    match name {
        "totally-geodesic" => {
            if t.is_some() || k.is_some() {
                return Err(unused("t/--k"));
            }
            catalog::totally_geodesic(r.unwrap_or(1.0), n)
        }
        "equidistant" => {
            if k.is_some() {
                return Err(unused("k"));
            }
            catalog::equidistant(r.unwrap_or(1.0), t.unwrap_or(0.5), n)
        }
        "product" => {
            if t.is_some() {
                return Err(unused("t"));
            }
            catalog::product_hk_snk(k.unwrap_or(1), r.unwrap_or(1.0), n)
        }
        "geodesic-sphere" => {
            if r.is_some() || k.is_some() {
                return Err(unused("r/--k"));
            }
            catalog::geodesic_sphere(t.unwrap_or(1.0), n)
        }
        _ => Err(Error::InvalidParameter(format!("{name} has no single-instance parameters"))),
    }
}

// analyze

/// Tolerance for eigenvalues computed in two different charts.
pub const CHART_TOL: f64 = 1e-6;

fn analyze(ctx: &mut Ctx, spec_text: &str, points: usize) -> Result<VerificationReport> {
    let spec = MetricSpec::parse(spec_text, ctx.n, ctx.convention)?;
    let f = spec.field()?;
    let n = f.n();
    let samples = spec.samples(points.max(2), ctx.seed)?;
    let count = samples.len();
    let normalized = ctx.convention == SigmaConvention::Normalized;
    let mut rep = VerificationReport::new(format!("analyze {}", spec.text), spec.label());

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sig_lo = vec![f64::INFINITY; n];
    let mut sig_hi = vec![f64::NEG_INFINITY; n];
    let mut asym = 0.0f64;
    let mut chart_res = 0.0f64;
    for x in &samples {
        let sch = schouten(&f, x)?;
        lo = lo.min(sch.eigenvalues[0]);
        hi = hi.max(sch.max());
        asym = asym.max(sch.asymmetry());
        for k in 1..=n {
            let s = sigma_k(&sch.eigenvalues, k, normalized)?;
            sig_lo[k - 1] = sig_lo[k - 1].min(s);
            sig_hi[k - 1] = sig_hi[k - 1].max(s);
        }
        let other = schouten_in_chart(&f, x, &secondary_chart(x))?;
        let d = sch
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = 1.0 + sch.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        chart_res = chart_res.max(d / scale);
    }
    rep.note("points", count.to_string());
    rep.note("lambda_min", fmt_f64(lo));
    rep.note("lambda_max", fmt_f64(hi));
    for k in 1..=n {
        rep.note(format!("sigma_{k}"), format!("[{}, {}]", fmt_f64(sig_lo[k - 1]), fmt_f64(sig_hi[k - 1])));
    }
    let bound = hi < 0.5 - HALF_MARGIN;
    rep.note("bound_lambda_below_half", bound.to_string());
    rep.note("bound_margin", fmt_f64(HALF_MARGIN));
    let t = dilation_for_max(hi);
    if bound {
        rep.note("dilation_needed", "none");
    } else {
        rep.note("dilation_needed", format!("t = {} (g -> e^t g scales every lambda by e^-t)", fmt_f64(t)));
    }

    let st = detect_radial_structure(&f, &samples, StructureThresholds::default())?;
    rep.note("structure.two_eigenvalues", st.two_eigenvalues.to_string());
    rep.note("structure.multiplicity_n_minus_1", st.multiplicity_n_minus_1.to_string());
    if let Some((pattern, hits)) = st.dominant_pattern() {
        let mut pattern = pattern;
        pattern.sort_by(|a, b| b.cmp(a));
        let p: Vec<String> = pattern.iter().map(usize::to_string).collect();
        rep.note("structure.multiplicities", format!("({}) at {hits} of {count} points", p.join(",")));
    }
    match st.dependence_score {
        Some(s) => rep.note(
            "structure.dependence_score",
            format!("{} (threshold {})", fmt_f64(s), fmt_f64(st.dependence_threshold)),
        ),
        None => rep.note("structure.dependence_score", "n/a"),
    }

    let rec = |name: &str, res: f64, tol: f64| CheckRecord::new(name, res, tol, count, ctx.seed);
    let eig_tol = match f.mode() {
        DerivativeMode::Analytic => 1e-9,
        DerivativeMode::FiniteDifference => 1e-6,
    };
    rep.push(rec("schouten.symmetry", asym, eig_tol));
    rep.push(rec("schouten.chart_independence", chart_res, tol_or(ctx, CHART_TOL)));
    if let Some(e) = spec.catalog_entry() {
        let mut want: Vec<f64> = e
            .expected_lambdas()
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat(v).take(m))
            .collect();
        want.sort_by(f64::total_cmp);
        let mut worst = 0.0f64;
        for x in &samples {
            let eig = schouten(&f, x)?.eigenvalues;
            for (a, b) in eig.iter().zip(&want) {
                worst = worst.max((a - b).abs());
            }
        }
        rep.note("catalog.lambda", fmt_list(&want));
        rep.push(rec("catalog.lambda", worst, 1e-6));
    }
    Ok(rep)
}

// correspond / export-mesh

#[derive(Debug, Clone, Copy)]
struct SliceOptions {
    rows: usize,
    cols: usize,
    axes: [usize; 3],
}

impl SliceOptions {
    fn parse(n: usize, grid: &str, axes: Option<&str>) -> Result<Self> {
        let bad_grid = || Error::InvalidParameter(format!("grid must be ROWSxCOLS, got '{grid}'"));
        let (r, c) = grid.split_once(['x', 'X']).ok_or_else(bad_grid)?;
        let rows = r.trim().parse().map_err(|_| bad_grid())?;
        let cols = c.trim().parse().map_err(|_| bad_grid())?;
        let axes = match axes {
            None => default_axes(n.max(2)),
            Some(text) => {
                let v: Vec<usize> = text
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidParameter(format!("slice axes must be integers, got '{text}'")))?;
                <[usize; 3]>::try_from(v)
                    .map_err(|_| Error::InvalidParameter("slice axes need exactly three entries".into()))?
            }
        };
        Ok(SliceOptions { rows, cols, axes })
    }
}

fn mesh_format(path: &Path, format: Option<Format>) -> Result<MeshFormat> {
    match format {
        Some(Format::Obj) => Ok(MeshFormat::Obj),
        Some(Format::Ply) => Ok(MeshFormat::Ply),
        None => MeshFormat::from_path(path),
    }
}

/// Max Schouten eigenvalue over the slice grid and the spec's samples.
fn sampled_max_lambda(f: &ConformalMetricField, pts: &[SpherePoint]) -> Result<(f64, usize)> {
    let mut max = f64::NEG_INFINITY;
    let mut used = 0;
    for x in pts {
        if !f.contains(x) {
            continue;
        }
        max = max.max(schouten(f, x)?.max());
        used += 1;
    }
    if used == 0 {
        return Err(Error::OutsideDomain);
    }
    Ok((max, used))
}

fn slice_grid_points(n: usize, opts: &SliceOptions) -> Result<Vec<SpherePoint>> {
    let mut pts = Vec::with_capacity(opts.rows * opts.cols);
    for i in 0..opts.rows {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / opts.rows as f64;
        for j in 0..opts.cols {
            let az = 2.0 * std::f64::consts::PI * j as f64 / opts.cols as f64;
            pts.push(crate::io::slice::slice_point(n, opts.axes, theta, az)?);
        }
    }
    Ok(pts)
}

fn correspond(
    ctx: &mut Ctx,
    spec_text: &str,
    opts: SliceOptions,
    mesh_out: Option<&Path>,
    jets_out: Option<&Path>,
    format: Option<Format>,
) -> Result<VerificationReport> {
    let spec = MetricSpec::parse(spec_text, ctx.n, ctx.convention)?;
    let f = spec.field()?;
    let n = f.n();
    let format = mesh_out.map(|p| mesh_format(p, format)).transpose()?;
    let mut pts = slice_grid_points(n, &opts)?;
    pts.extend(spec.samples(64, ctx.seed)?);
    let (max, used) = sampled_max_lambda(&f, &pts)?;
    let btol = tol_or(ctx, bound_tol(f.mode()));
    let mut rep = VerificationReport::new(format!("correspond {}", spec.text), spec.label());
    rep.note("lambda_max", fmt_f64(max));
    let mut t = 0.0;
    if max >= 0.5 - btol {
        if !ctx.dilate {
            return Err(Error::EigenvalueBound { max });
        }
        t = dilation_for_max(max);
        let degenerate = pts
            .iter()
            .filter(|x| f.contains(x))
            .map(|x| schouten(&f, x).map(|s| s.max() >= 0.5 - btol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|d| *d)
            .count();
        if degenerate > 0 {
            ctx.warn(format!(
                "{degenerate} of {used} sampled points have lambda >= 1/2 before dilation; the undilated hypersurface is not horospherically convex there"
            ));
        }
        rep.note("degenerate_points_before_dilation", format!("{degenerate} of {used}"));
    }
    rep.note("dilation", fmt_f64(t));
    let g = dilate(&f, t);
    let slice: Slice = hypersurface_slice(&g, opts.axes, opts.rows, opts.cols)?;
    let count = slice.jets.len();
    rep.note("grid", format!("{}x{}", opts.rows, opts.cols));
    rep.note("slice_axes", format!("{},{},{}", opts.axes[0], opts.axes[1], opts.axes[2]));
    rep.note("vertices", slice.mesh.vertices.len().to_string());
    rep.note("faces", slice.mesh.faces.len().to_string());
    rep.note("skipped_outside_domain", slice.skipped.to_string());
    if count == 0 {
        return Err(Error::OutsideDomain);
    }

    let rec = |name: &str, res: f64, tol: f64| CheckRecord::new(name, res, tol, count, ctx.seed);
    let quad = slice.jets.iter().map(|j| j.residuals().max()).fold(0.0, f64::max);
    let dict = slice.jets.iter().map(|j| j.dictionary_residual).fold(0.0, f64::max);
    let convex_fail = slice.jets.iter().filter(|j| !is_horospherically_convex(&j.kappas)).count();
    rep.push(rec("jets.quadrics", quad, 1e-9));
    rep.push(rec("jets.dictionary", dict, dictionary_tol(g.mode())));
    rep.push(rec("jets.convexity_failures", convex_fail as f64, 0.0));
    rep.push(CheckRecord::with_verdict(
        "mesh.inside_unit_ball",
        slice.max_ball_radius,
        1.0,
        slice.max_ball_radius < 1.0,
        count,
        ctx.seed,
    ));
    if let Some(e) = spec.catalog_entry() {
        if let catalog::EntryKind::GeodesicSphere { t: dist } = e.kind() {
            let radius = (0.5 * (dist + t)).tanh();
            let dev = slice
                .mesh
                .vertices
                .iter()
                .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - radius).abs())
                .fold(0.0, f64::max);
            rep.note("mesh.expected_radius", fmt_f64(radius));
            rep.push(rec("mesh.radius_matches_tanh_half_distance", dev, 1e-9));
        }
    }
    if let (Some(path), Some(fmt)) = (mesh_out, format) {
        export_mesh(&slice.mesh, path, fmt)?;
    }
    if let Some(path) = jets_out {
        write_file(path, &table::jets_csv(n, &slice.jets)?)?;
    }
    Ok(rep)
}

// invariance

/// Default tolerance for both invariance checks.
pub const INVARIANCE_TOL: f64 = 1e-7;

fn invariance(ctx: &mut Ctx, spec_text: &str, generators: &[String], count: usize) -> Result<VerificationReport> {
    let spec = MetricSpec::parse(spec_text, ctx.n, ctx.convention)?;
    let f = spec.field()?;
    let n = f.n();
    let tol = tol_or(ctx, INVARIANCE_TOL);
    let mut elements = Vec::new();
    for g in generators {
        for part in g.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            elements.extend(parse_generator(part, n)?.elements);
        }
    }
    if elements.is_empty() {
        return Err(Error::InvalidParameter("no generators given".into()));
    }
    let samples = spec.samples(count.max(1), ctx.seed)?;
    let mut maps = Vec::with_capacity(elements.len());
    let mut touched = samples.clone();
    for (label, kind) in &elements {
        let iso = make_isometry(kind, n)?;
        let m = mobius_from_isometry(&iso)?;
        touched.extend(samples.iter().map(|x| m.phi(x)));
        maps.push((label, iso, m));
    }
    // phi needs lambda < 1/2 at x and Phi(x); a constant shift of rho does
    // not change metric invariance and moves the hypersurface to a parallel one
    let (max, _) = sampled_max_lambda(&f, &touched)?;
    let t = dilation_for_max(max);
    let g = dilate(&f, t);
    let mut rep = VerificationReport::new(format!("invariance {}", spec.text), spec.label());
    rep.note("tolerance", fmt_f64(tol));
    rep.note("hypersurface_dilation", fmt_f64(t));
    let mut disagreements = 0;
    for (label, iso, m) in &maps {
        let met = is_metric_invariant(&f, m, &samples, tol)?;
        let hyp = is_hypersurface_invariant(&g, iso, &samples, tol)?;
        let word = |b: bool| if b { "invariant" } else { "not invariant" };
        rep.note(
            format!("{label}.metric"),
            format!("{} residual={} admissible={}", word(met.invariant), fmt_f64(met.max_residual), met.admissible),
        );
        rep.note(
            format!("{label}.hypersurface"),
            format!("{} residual={} admissible={}", word(hyp.invariant), fmt_f64(hyp.max_residual), hyp.admissible),
        );
        let agree = met.invariant == hyp.invariant;
        if !agree {
            disagreements += 1;
        }
        rep.adjudicate(label.to_string(), if agree { word(met.invariant) } else { "disagreement" });
        rep.push(CheckRecord::with_verdict(
            format!("{label}.agreement"),
            if agree { 0.0 } else { 1.0 },
            0.0,
            agree,
            met.admissible.min(hyp.admissible),
            ctx.seed,
        ));
    }
    rep.note("disagreements", disagreements.to_string());
    Ok(rep)
}

// radial

struct RadialArgs {
    k: usize,
    c: Option<f64>,
    branch: Branch,
    perturb: f64,
    span: Option<f64>,
    r0: f64,
    ode_tol: f64,
    samples: usize,
    segments: usize,
}

/// Residual tolerance for shot profiles.
pub const PROFILE_TOL: f64 = 1e-8;
/// Period agreement under tolerance halving.
pub const PERIOD_STABILITY_TOL: f64 = 1e-4;
/// Section matching tolerance for period detection.
pub const PERIOD_MATCH_TOL: f64 = 1e-6;

fn radial(
    ctx: &mut Ctx,
    a: &RadialArgs,
    profile_out: Option<&Path>,
    mesh_out: Option<&Path>,
) -> Result<VerificationReport> {
    let (n, k) = (ctx.n, a.k);
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mesh_format = mesh_out.map(|p| mesh_format(p, None)).transpose()?;
    let conv = ctx.convention;
    let branch = match a.branch {
        Branch::Constant => "constant",
        Branch::Delaunay => "delaunay",
        Branch::Flat => "flat",
    };
    let c = a.c.unwrap_or(match a.branch {
        Branch::Flat => 0.0,
        _ => round_level(n, k, conv),
    });
    let span = a.span.unwrap_or(match a.branch {
        Branch::Delaunay => 40.0,
        _ => 4.0,
    });
    let config = |tol: f64| ShootConfig {
        span,
        ode_tol: tol,
        convention: conv,
        ..Default::default()
    };
    let initial = match a.branch {
        Branch::Constant => {
            let (u, du, _) = round_solution(a.r0, 0.0);
            (u, du)
        }
        Branch::Delaunay => (-a.perturb, -1.0 / a.r0),
        Branch::Flat => (0.0, 0.0),
    };
    let run = |tol: f64| -> Result<RadialProfile> {
        match a.branch {
            Branch::Delaunay => shoot(initial, a.r0, Direction::Outward, n, k, c, &config(tol)),
            _ => {
                let mut cfg = config(tol);
                cfg.span = 0.5 * span;
                shoot_both(initial, a.r0, n, k, c, &cfg)
            }
        }
    };
    let p = run(a.ode_tol)?;
    let count = p.len();
    let spec = format!("radial n={n} k={k} c={} branch={branch} sigma={conv}", fmt_f64(c));
    let mut rep = VerificationReport::new(format!("radial {branch}"), spec);
    let rec = |name: &str, res: f64, tol: f64| CheckRecord::new(name, res, tol, count, ctx.seed);
    rep.note("r0", fmt_f64(a.r0));
    rep.note("initial", fmt_list(&[initial.0, initial.1]));
    rep.note("ode_tol", fmt_f64(a.ode_tol));
    rep.note("span", fmt_f64(p.span()));
    rep.note("samples", count.to_string());
    rep.note("termination", p.termination().to_string());
    rep.note("lambda_max", fmt_f64(p.max_lambda()));
    rep.push(rec("sigma_k_residual", p.max_residual(), tol_or(ctx, PROFILE_TOL)));
    let h = p.first_integral();
    rep.push(rec("first_integral_drift", p.first_integral_drift() / (1.0 + h[0].abs()), 1e-7));
    if a.branch == Branch::Constant {
        let dev = p
            .s()
            .iter()
            .zip(p.u())
            .map(|(s, u)| (u - round_solution(s.exp(), 0.0).0).abs())
            .fold(0.0, f64::max);
        rep.push(rec("closed_form_deviation", dev, tol_or(ctx, PROFILE_TOL)));
    }
    match detect_period(&p, PERIOD_MATCH_TOL) {
        PeriodDetection::Degenerate => rep.note("period", "degenerate (eigenvalues constant)"),
        PeriodDetection::NotFound { crossings } => {
            rep.note("period", format!("none ({crossings} section crossings)"));
            let wmax = p.s().iter().zip(p.u()).map(|(s, u)| s + u).fold(f64::NEG_INFINITY, f64::max);
            rep.note("orbit.max_u_plus_s", fmt_f64(wmax));
        }
        PeriodDetection::Periodic {
            period,
            drift,
            mismatch,
            crossings,
        } => {
            rep.note("period", fmt_f64(period));
            rep.note("period.drift", fmt_f64(drift));
            rep.note("period.mismatch", fmt_f64(mismatch));
            rep.note("period.crossings", crossings.to_string());
            let half = run(0.5 * a.ode_tol)?;
            match detect_period(&half, PERIOD_MATCH_TOL).period() {
                Some(q) => rep.push(rec("period_stability", (period - q).abs(), PERIOD_STABILITY_TOL)),
                None => rep.push(CheckRecord::with_verdict(
                    "period_stability",
                    f64::INFINITY,
                    PERIOD_STABILITY_TOL,
                    false,
                    count,
                    ctx.seed,
                )),
            }
        }
    }
    if let Some(path) = profile_out {
        write_file(path, &table::profile_csv(&p)?)?;
    }
    if let (Some(path), Some(fmt)) = (mesh_out, mesh_format) {
        let lifted = profile_to_hypersurface(&p, a.samples, a.segments, ctx.dilate)?;
        rep.note("lift.dilation", fmt_f64(lifted.dilation));
        rep.note("lift.horosphere_type", lifted.horosphere_type.to_string());
        rep.note("lift.vertices", lifted.mesh.vertices.len().to_string());
        rep.push(CheckRecord::new(
            "lift.weingarten_spread",
            lifted.weingarten_spread(),
            1e-6,
            lifted.jets.len(),
            ctx.seed,
        ));
        export_mesh(&lifted.mesh, path, fmt)?;
    }
    Ok(rep)
}
