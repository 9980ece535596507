//! Command-line harness: each subcommand resolves its parameters from flags
//! and an optional `key=value` run file (flags win), runs one experiment and
//! emits CSV whose leading `#` lines echo the resolved configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exact::{robin_roots, ExactSolutionSpec};
use crate::fem::{assemble_shared, error_norms, interpolate, l2_project, ProblemCoefficients};
use crate::geometry::{quarter_disk_mesh, write_mesh, Mesh};
use crate::rational::{build_negative_power, build_resolvent, log_samples};
use crate::stepper::{run, SchemeConfig, SchemeKind, Source};

/// Expansion point used by `gamma`/`approx-error` under `--mu auto`: the
/// first continuous eigenvalue for this Robin coefficient.
pub const AUTO_MU_G: f64 = 10.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParameterDomain(m) => CliError::Usage(m),
            Error::Parse { .. } | Error::Io { .. } | Error::Validation(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "fracpow",
    version,
    about = "Time stepping for du/dt + A^alpha u = f via rational approximations"
)]
pub struct Cli {
    /// key=value run file; command-line flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of the Robin eigenvalue equation.
    Roots(RootsArgs),
    /// Extreme generalized eigenvalues of the discrete operator.
    Spectrum(SpectrumArgs),
    /// Upper bounds gamma(M, alpha) = sum of the rational coefficients.
    Gamma(GammaArgs),
    /// Pointwise error of the rational approximations on a z-range.
    ApproxError(ApproxArgs),
    /// Error of the explicit or implicit scheme on the test problem.
    Converge(ConvergeArgs),
    /// Writes a quarter-disk mesh in the text format.
    Mesh(MeshArgs),
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// Robin coefficients, comma separated.
    #[arg(long)]
    pub g: Option<String>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub g: Option<String>,
    /// Mesh levels, comma separated.
    #[arg(long)]
    pub level: Option<String>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    /// `auto` or a positive value.
    #[arg(long)]
    pub mu: Option<String>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Exponent of z^(-beta) (ignored when --nu is given).
    #[arg(long)]
    pub beta: Option<String>,
    /// Exponent of the resolvent form (with --nu).
    #[arg(long)]
    pub alpha: Option<String>,
    /// Switches to the resolvent form 1/(nu + z^alpha).
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long = "z-min")]
    pub z_min: Option<String>,
    #[arg(long = "z-max")]
    pub z_max: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// `explicit` or `implicit`.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub level: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    /// `auto` (lower spectrum bound) or a positive value.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long = "t-final")]
    pub t_final: Option<String>,
    /// Initial vector: `interp` (nodal interpolant) or `project` (L2 projection).
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long)]
    pub level: Option<String>,
}

/// Flag values layered over run-file values, recording what was resolved.
pub struct Params {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Params {
    pub fn new(config: Option<&Path>) -> CliResult<Self> {
        let file = match config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn raw(&mut self, key: &str, flag: &Option<String>, default: &str) -> String {
        let v = flag
            .clone()
            .or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    fn one<T: FromStr>(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<T> {
        let v = self.raw(key, flag, default);
        parse_value(key, &v)
    }

    fn list<T: FromStr>(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<Vec<T>> {
        let v = self.raw(key, flag, default);
        let items: Vec<T> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(key, s))
            .collect::<CliResult<_>>()?;
        if items.is_empty() {
            return Err(CliError::Usage(format!("--{key} needs at least one value")));
        }
        Ok(items)
    }

    fn header(&self, command: &str, notes: &[&str]) -> String {
        let mut s = format!("# fracpow {command}\n");
        for (k, v) in &self.resolved {
            let _ = writeln!(s, "# {k}={v}");
        }
        for n in notes {
            let _ = writeln!(s, "# note: {n}");
        }
        s
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse --{key} value '{v}'")))
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        CliError::Usage(
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
            .to_string(),
        )
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(
                Error::Parse {
                    line: i + 1,
                    msg: "expected key=value".into(),
                }
                .to_string(),
            )
        })?;
        map.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Fixed-width scientific notation with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn resolve_mu(raw: &str, key: &str) -> CliResult<Option<f64>> {
    if raw.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        let v: f64 = parse_value(key, raw)?;
        if v > 0.0 && v.is_finite() {
            Ok(Some(v))
        } else {
            Err(CliError::Usage(format!("--{key} must be positive or 'auto'")))
        }
    }
}

fn auto_mu() -> CliResult<f64> {
    Ok(robin_roots(AUTO_MU_G, 1)?.eigenvalues()[0])
}

fn check_level(level: u32) -> CliResult<u32> {
    if (1..=3).contains(&level) {
        Ok(level)
    } else {
        Err(CliError::Usage(format!("mesh level must be 1, 2 or 3, got {level}")))
    }
}

pub fn cmd_roots(args: &RootsArgs, p: &mut Params) -> CliResult<String> {
    let gs: Vec<f64> = p.list("g", &args.g, "1,10,100")?;
    let mut body = csv_row(&["g".into(), "k".into(), "nu_k".into(), "lambda_k".into()]);
    for g in gs {
        let r = robin_roots(g, 3)?;
        for k in [1usize, 3] {
            let nu = r.roots()[k - 1];
            body += &csv_row(&[fmt_num(g), k.to_string(), fmt_num(nu), fmt_num(nu * nu)]);
        }
    }
    Ok(p.header("roots", &[]) + &body)
}

pub fn cmd_spectrum(args: &SpectrumArgs, p: &mut Params) -> CliResult<String> {
    let gs: Vec<f64> = p.list("g", &args.g, "1,10,100")?;
    let levels: Vec<u32> = p.list("level", &args.level, "1,2,3")?;
    for &l in &levels {
        check_level(l)?;
    }
    let meshes: Vec<Arc<Mesh>> = levels
        .iter()
        .map(|&l| quarter_disk_mesh(l).map(Arc::new))
        .collect::<Result<_, _>>()?;
    let mut body = csv_row(
        &[
            "g",
            "level",
            "vertices",
            "delta_lower",
            "delta_upper",
            "lambda1",
            "rel_gap",
            "upper_ratio",
        ]
        .map(String::from),
    );
    for g in gs {
        let lambda1 = robin_roots(g, 1)?.eigenvalues()[0];
        let coeff = ProblemCoefficients::laplace_robin(g)?;
        let mut prev_upper: Option<f64> = None;
        for (&level, mesh) in levels.iter().zip(&meshes) {
            let op = assemble_shared(mesh.clone(), &coeff)?;
            let b = op.bounds()?;
            let gap = (b.lower - lambda1) / lambda1;
            if gap.abs() > 0.01 {
                log::warn!(
                    "g={g} level={level}: lower bound {:.6} is {:.2}% from lambda1",
                    b.lower,
                    100.0 * gap
                );
            }
            let ratio = prev_upper.map_or("nan".to_string(), |u| fmt_num(b.upper / u));
            if let Some(u) = prev_upper {
                eprintln!("g={g}: upper bound grows by {:.4} at level {level}", b.upper / u);
            }
            prev_upper = Some(b.upper);
            body += &csv_row(&[
                fmt_num(g),
                level.to_string(),
                mesh.vertex_count().to_string(),
                fmt_num(b.lower),
                fmt_num(b.upper),
                fmt_num(lambda1),
                fmt_num(gap),
                ratio,
            ]);
        }
    }
    Ok(p.header("spectrum", &[]) + &body)
}

pub fn cmd_gamma(args: &GammaArgs, p: &mut Params) -> CliResult<String> {
    let alphas: Vec<f64> = p.list("alpha", &args.alpha, "0.25,0.5,0.75")?;
    let ms: Vec<usize> = p.list("M", &args.m, "5,10,20,40")?;
    let mu_raw = p.raw("mu", &args.mu, "auto");
    let mu = match resolve_mu(&mu_raw, "mu")? {
        Some(v) => v,
        None => auto_mu()?,
    };
    let mut body = csv_row(&["M", "alpha", "beta", "mu", "gamma_bar", "tau0"].map(String::from));
    for &m in &ms {
        for &alpha in &alphas {
            let r = build_negative_power(1.0 - alpha, mu, m)?;
            let gb = r.gamma_bar();
            body += &csv_row(&[
                m.to_string(),
                fmt_num(alpha),
                fmt_num(1.0 - alpha),
                fmt_num(mu),
                fmt_num(gb.value()),
                fmt_num(gb.step_limit()),
            ]);
        }
    }
    Ok(p.header(
        "gamma",
        &["R_M approximates z^(alpha-1); gamma_bar = sum of coefficients"],
    ) + &body)
}

pub fn cmd_approx_error(args: &ApproxArgs, p: &mut Params) -> CliResult<String> {
    let ms: Vec<usize> = p.list("M", &args.m, "5,10,20,40")?;
    let mu_raw = p.raw("mu", &args.mu, "auto");
    let mu = match resolve_mu(&mu_raw, "mu")? {
        Some(v) => v,
        None => auto_mu()?,
    };
    let nu: Option<f64> = match args.nu.clone().or_else(|| p.file.get("nu").cloned()) {
        Some(v) => Some(p.one("nu", &Some(v), "")?),
        None => None,
    };
    let exponent: f64 = match nu {
        Some(_) => p.one("alpha", &args.alpha, "0.5")?,
        None => p.one("beta", &args.beta, "0.5")?,
    };
    let z_min: f64 = match args.z_min.clone().or_else(|| p.file.get("z-min").cloned()) {
        Some(v) => p.one("z-min", &Some(v), "")?,
        None => p.one("z-min", &None, &mu.to_string())?,
    };
    let z_max: f64 = p.one("z-max", &args.z_max, "75000")?;
    let samples: usize = p.one("samples", &args.samples, "200")?;
    if !(z_min > 0.0 && z_max > z_min) || samples < 2 {
        return Err(CliError::Usage("need 0 < z-min < z-max and samples >= 2".into()));
    }
    let zs = log_samples(z_min, z_max, samples);
    let mut body = csv_row(
        &[
            "M",
            "z",
            "approx",
            "target",
            "abs_err",
            "rel_err",
            "z_approx",
            "gamma_bar",
        ]
        .map(String::from),
    );
    for &m in &ms {
        let r = match nu {
            Some(nu) => build_resolvent(exponent, nu, mu, m)?,
            None => build_negative_power(exponent, mu, m)?,
        };
        let gb = r.gamma_bar().value();
        for &z in &zs {
            let approx = r.eval_scalar(z)?;
            let target = r.target(z);
            body += &csv_row(&[
                m.to_string(),
                fmt_num(z),
                fmt_num(approx),
                fmt_num(target),
                fmt_num((approx - target).abs()),
                fmt_num(((approx - target) / target).abs()),
                fmt_num(z * approx),
                fmt_num(gb),
            ]);
        }
    }
    let note = match nu {
        Some(_) => "target is 1/(nu + z^alpha)",
        None => "target is z^(-beta)",
    };
    Ok(p.header("approx-error", &[note]) + &body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// Nodal interpolant of `u(·, 0)`.
    Interpolate,
    /// L2 projection of `u(·, 0)`.
    Project,
}

impl FromStr for InitialData {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "interp" | "interpolate" => Ok(Self::Interpolate),
            "project" | "projection" => Ok(Self::Project),
            _ => Err(format!("unknown initial data '{s}'")),
        }
    }
}

/// Parameters of a convergence study on the two-mode test problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeParams {
    pub kind: SchemeKind,
    pub alpha: f64,
    pub g: f64,
    pub level: u32,
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    pub sigma: f64,
    pub mu: Option<f64>,
    pub t_final: f64,
    pub init: InitialData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub m: usize,
    pub n: usize,
    pub eps2: f64,
    pub eps_inf: f64,
    pub certificate: String,
}

/// Runs every `(M, N)` pair; `N = 0` reports the error of the initial vector.
pub fn converge_rows(cp: &ConvergeParams) -> crate::Result<Vec<ConvergeRow>> {
    let spec = ExactSolutionSpec::new(cp.g, cp.alpha, cp.t_final)?;
    let mesh = Arc::new(quarter_disk_mesh(cp.level)?);
    let op = assemble_shared(mesh.clone(), &ProblemCoefficients::laplace_robin(cp.g)?)?;
    let w0 = match cp.init {
        InitialData::Interpolate => interpolate(|x| spec.initial(x), &mesh),
        InitialData::Project => l2_project(|x| spec.initial(x), &mesh, op.mass())?,
    };
    let mut rows = Vec::new();
    for &m in &cp.ms {
        for &n in &cp.ns {
            let row = if n == 0 {
                let e = error_norms(&w0, |x| spec.initial(x), &mesh, op.mass())?;
                ConvergeRow {
                    m,
                    n,
                    eps2: e.eps2,
                    eps_inf: e.eps_inf,
                    certificate: "none".into(),
                }
            } else {
                let cfg = SchemeConfig::new(cp.kind, cp.t_final, n, cp.sigma, m, cp.alpha, cp.mu)?;
                let mut r = run(&op, &w0, &Source::Zero, &cfg)?;
                let e = r.evaluate_error(|x| spec.at_point(x, cp.t_final), &op)?;
                ConvergeRow {
                    m,
                    n,
                    eps2: e.eps2,
                    eps_inf: e.eps_inf,
                    certificate: r.certificate.summary(),
                }
            };
            log::info!("M={m} N={n}: eps2={:.6e}", row.eps2);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn cmd_converge(args: &ConvergeArgs, p: &mut Params) -> CliResult<String> {
    let kind = match p.raw("scheme", &args.scheme, "explicit").as_str() {
        "explicit" => SchemeKind::Explicit,
        "implicit" => SchemeKind::ImplicitWeighted,
        other => {
            return Err(CliError::Usage(format!(
                "--scheme must be explicit or implicit, got '{other}'"
            )))
        }
    };
    let mu_raw = p.raw("mu", &args.mu, "auto");
    let init_raw = p.raw("init", &args.init, "interp");
    let cp = ConvergeParams {
        kind,
        alpha: p.one("alpha", &args.alpha, "0.5")?,
        g: p.one("g", &args.g, "10")?,
        level: check_level(p.one("level", &args.level, "2")?)?,
        ms: p.list("M", &args.m, "5,10,20,40")?,
        ns: p.list("N", &args.n, "25,50,100,200")?,
        sigma: p.one("sigma", &args.sigma, "1")?,
        mu: resolve_mu(&mu_raw, "mu")?,
        t_final: p.one("t-final", &args.t_final, "0.25")?,
        init: init_raw.parse().map_err(CliError::Usage)?,
    };
    let rows = converge_rows(&cp)?;
    let mut body = csv_row(&["M", "N", "tau", "eps2", "eps_inf", "certificate"].map(String::from));
    for r in rows {
        let tau = if r.n == 0 {
            "nan".into()
        } else {
            fmt_num(cp.t_final / r.n as f64)
        };
        body += &csv_row(&[
            r.m.to_string(),
            r.n.to_string(),
            tau,
            fmt_num(r.eps2),
            fmt_num(r.eps_inf),
            r.certificate,
        ]);
    }
    let notes = [
        "exact solution exp(-nu1^(2 alpha) t) J0(nu1 r) + 1.5 exp(-nu3^(2 alpha) t) J0(nu3 r); the third mode is read as J0",
        "mu=auto uses the lower spectrum bound of the discrete operator",
    ];
    Ok(p.header("converge", &notes) + &body)
}

pub fn cmd_mesh(args: &MeshArgs, p: &mut Params, out: Option<&Path>) -> CliResult<String> {
    let level = check_level(p.one("level", &args.level, "1")?)?;
    let mesh = quarter_disk_mesh(level)?;
    eprintln!(
        "level {level}: {} vertices, {} cells",
        mesh.vertex_count(),
        mesh.cell_count()
    );
    match out {
        Some(path) => {
            write_mesh(&mesh, path)?;
            Ok(String::new())
        }
        None => Ok(mesh.to_text()),
    }
}

/// Sizes the global rayon pool from `FRACPOW_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("FRACPOW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FRACPOW_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Usage("FRACPOW_THREADS must be >= 1".into()));
        }
        // a pool that already exists (e.g. in tests) keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Executes a parsed command line and returns the text destined for stdout
/// (empty when the output went to `--out`).
pub fn execute(cli: &Cli) -> CliResult<String> {
    configure_threads()?;
    let mut p = Params::new(cli.config.as_deref())?;
    let out: Option<PathBuf> = cli.out.clone().or_else(|| p.file.get("out").map(PathBuf::from));
    let text = match &cli.command {
        Command::Roots(a) => cmd_roots(a, &mut p)?,
        Command::Spectrum(a) => cmd_spectrum(a, &mut p)?,
        Command::Gamma(a) => cmd_gamma(a, &mut p)?,
        Command::ApproxError(a) => cmd_approx_error(a, &mut p)?,
        Command::Converge(a) => cmd_converge(a, &mut p)?,
        Command::Mesh(a) => return cmd_mesh(a, &mut p, out.as_deref()),
    };
    match out {
        Some(path) => {
            std::fs::write(&path, &text).map_err(|source| CliError::from(Error::Io { path, source }))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Parses `args` (including the program name) and executes.
pub fn execute_args<I, T>(args: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("fracpow: {e}");
            e.exit_code()
        }
    }
}
