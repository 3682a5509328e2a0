//! `bellgup` command-line front end.
//!
//! Every command produces one document: JSON `{"manifest", "result", "flags"}`
//! or CSV whose manifest sits in leading `#` lines. Floats are written with 17
//! significant digits so they read back bit-exact.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{gup_bounds, reproduce_paper_table, Agreement, ExperimentSpec};
use crate::cglmp::{
    cglmp_max, g_correlator, optimal_gamma, optimal_state, optimal_value, square_gap, CglmpSearch, CglmpSettings,
};
use crate::chsh::{
    bell_state, chsh_square_identity, tsirelson_max, BellStateKind, ChshSettings, SettingsConstraint, StateSearch,
    TsirelsonSearch,
};
use crate::error::{Error, Result};
use crate::fit::{log_space, loglog_fit, PowerLaw};
use crate::gup::{deformed_b2, deformed_c223_sq, spin_commutator_residual, Deformed, EvalMode, GupParams, Kinematics};
use crate::matkernel::expectation;
use crate::observables::{random_unitary, Direction, OutcomeSpectrum, QutritObservable};
use crate::optimize::OptimizerConfig;
use crate::rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug, Serialize)]
#[command(name = "bellgup", version, about = "Bell-operator squares and their minimal-length deformations")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Optimizer restarts (each command has its own default).
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum States {
    /// The four Bell states.
    Bell,
    /// All two-qubit pure states.
    Pure,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Gap between each Bell operator's square and its closed form, over random settings.
    IdentityCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Maximal CHSH value.
    Tsirelson {
        #[arg(long, value_enum, default_value_t = States::Bell)]
        states: States,
        /// Force Alice's two settings to coincide.
        #[arg(long)]
        commuting: bool,
    },
    /// Maximal CGLMP value per outcome convention.
    Cglmp {
        /// hermitian, unitary or centered; all three when omitted.
        #[arg(long)]
        convention: Option<OutcomeSpectrum>,
        /// Pin the state parameter γ.
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        max_evals: usize,
    },
    /// Deformed CHSH square, exact against series, for the optimal settings on Φ⁺.
    GupSweep {
        /// `start:stop:count`, log-spaced, or a single value.
        #[arg(long, default_value = "1e-5:1e-2:20")]
        beta_grid: Grid,
        /// Switches to the linear-quadratic model.
        #[arg(long)]
        alpha_grid: Option<Grid>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Deformed CGLMP square form, exact against series, for the `l_z` configuration.
    GupQutritSweep {
        #[arg(long, default_value = "1e-5:1e-2:20")]
        beta_grid: Grid,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Upper bounds on α and β from a splitting accuracy.
    Bounds {
        #[arg(long, default_value_t = ExperimentSpec::STERN_GERLACH_P_SQUARED)]
        p2: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Runs every reproduction and prints one PASS/FLAG line each.
    PaperTable {
        /// Per-restart budget of the CGLMP searches.
        #[arg(long, default_value_t = 6000)]
        max_evals: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::IdentityCheck { .. } => "identity-check",
            Command::Tsirelson { .. } => "tsirelson",
            Command::Cglmp { .. } => "cglmp",
            Command::GupSweep { .. } => "gup-sweep",
            Command::GupQutritSweep { .. } => "gup-qutrit-sweep",
            Command::Bounds { .. } => "bounds",
            Command::PaperTable { .. } => "paper-table",
        }
    }
}

/// `start:stop:count` (log-spaced) or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        log_space(self.start, self.stop, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let real = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => {
                let v = real(v)?;
                Grid { start: v, stop: v, count: 1 }
            }
            [a, b, n] => {
                let count = n.trim().parse::<usize>().map_err(|e| format!("`{n}`: {e}"))?;
                Grid { start: real(a)?, stop: real(b)?, count }
            }
            _ => return Err(format!("expected start:stop:count or a single value, got `{s}`")),
        };
        if !(grid.start.is_finite() && grid.stop.is_finite()) || grid.start < 0.0 || grid.stop < 0.0 {
            return Err("grid bounds must be finite and nonnegative".into());
        }
        if grid.count == 0 {
            return Err("grid count must be positive".into());
        }
        if grid.count > 1 && !(grid.start > 0.0 && grid.stop > 0.0) {
            return Err("log-spaced grids need positive bounds".into());
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// JSON formatter writing every float as `{:.16e}`.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(v))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{}", fmt_f64(f64::from(v)))
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact JSON with 17 significant digits per float.
pub fn to_json_string<S: Serialize>(value: &S) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Drops the timestamp so two runs of the same command compare byte for byte.
pub fn canonicalize(doc: &str) -> String {
    const KEY: &str = "\"timestamp\":\"";
    if let Some(start) = doc.find(KEY) {
        let rest = &doc[start + KEY.len()..];
        if let Some(end) = rest.find('"') {
            return format!("{}{}", &doc[..start], &rest[end + 1..]);
        }
    }
    doc.lines().filter(|l| !l.starts_with("# timestamp:")).map(|l| format!("{l}\n")).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Debug, Default)]
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Default)]
struct Report {
    result: Value,
    table: Table,
    /// Computation flags; any entry makes the exit code 1.
    flags: Vec<String>,
    /// Human-readable lines printed to standard output (paper-table only).
    lines: Vec<String>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(&cli, &report, out) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if report.flags.is_empty() {
        EXIT_OK
    } else {
        EXIT_FLAGGED
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::IdentityCheck { samples } => identity_check(*samples, cli.seed),
        Command::Tsirelson { states, commuting } => tsirelson(*states, *commuting, cli.restarts, cli.seed),
        Command::Cglmp { convention, gamma, max_evals } => {
            cglmp(*convention, *gamma, *max_evals, cli.restarts, cli.seed)
        }
        Command::GupSweep { beta_grid, alpha_grid, p } => gup_sweep(beta_grid, alpha_grid.as_ref(), *p),
        Command::GupQutritSweep { beta_grid, p } => gup_qutrit_sweep(beta_grid, *p),
        Command::Bounds { p2, eps } => bounds(*p2, *eps),
        Command::PaperTable { max_evals } => paper_table(*max_evals, cli.restarts, cli.seed),
    }
}

fn manifest(cli: &Cli) -> Value {
    json!({
        "command": cli.command.name(),
        "flags": serde_json::to_value(cli).expect("flags serialize"),
        "seed": cli.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

fn render(cli: &Cli, report: &Report) -> io::Result<String> {
    let manifest = manifest(cli);
    match cli.format {
        Format::Json => {
            let doc = json!({ "manifest": manifest, "result": report.result, "flags": report.flags });
            Ok(to_json_string(&doc) + "\n")
        }
        Format::Csv => {
            let mut text = String::new();
            if let Value::Object(m) = &manifest {
                for (k, v) in m {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => to_json_string(other),
                    };
                    text.push_str(&format!("# {k}: {v}\n"));
                }
            }
            text.push_str(&format!("# computation_flags: {}\n", to_json_string(&report.flags)));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.header)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            let body = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
            text.push_str(&String::from_utf8(body).expect("CSV of UTF-8 cells"));
            Ok(text)
        }
    }
}

fn emit(cli: &Cli, report: &Report, out: &mut dyn Write) -> io::Result<()> {
    let doc = render(cli, report)?;
    for line in &report.lines {
        writeln!(out, "{line}")?;
    }
    match &cli.out {
        Some(path) => std::fs::write(path, doc),
        // Commands that print lines only emit the document when asked for a file.
        None if report.lines.is_empty() => out.write_all(doc.as_bytes()),
        None => Ok(()),
    }
}

fn optimizer(restarts: Option<usize>, default_restarts: usize, max_evals: usize) -> Result<OptimizerConfig> {
    let config = OptimizerConfig {
        restarts: restarts.unwrap_or(default_restarts),
        max_evals_per_restart: max_evals,
        ..OptimizerConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn direction_json(d: &Direction<f64>) -> Value {
    json!(d.components())
}

fn amplitudes_json(amps: &[Complex<f64>]) -> Value {
    json!(amps.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GapStats {
    samples: usize,
    min_gap: f64,
    mean_gap: f64,
    max_gap: f64,
}

fn gap_stats(gaps: &[f64]) -> GapStats {
    GapStats {
        samples: gaps.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
    }
}

const CHSH_IDENTITY_TOLERANCE: f64 = 1e-12;

fn chsh_gaps(samples: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..samples).map(|_| chsh_square_identity(&ChshSettings::<f64>::random(&mut r)).gap).collect()
}

fn identity_check(samples: usize, seed: u64) -> Result<Report> {
    if samples == 0 {
        return Err(Error::InvalidConfig("--samples must be positive".into()));
    }
    let chsh = gap_stats(&chsh_gaps(samples, seed));
    let mut cglmp = Vec::new();
    for (i, conv) in OutcomeSpectrum::ALL.into_iter().enumerate() {
        let mut r = rng::stream(seed, 1 + i as u64);
        let mut gaps = Vec::with_capacity(samples);
        for _ in 0..samples {
            let obs =
                (0..4).map(|_| QutritObservable::new(random_unitary(&mut r, 3)?, conv)).collect::<Result<Vec<_>>>()?;
            let s = CglmpSettings::from_observables([&obs[0], &obs[1], &obs[2], &obs[3]])?;
            gaps.push(square_gap(&s));
        }
        cglmp.push((conv, gap_stats(&gaps)));
    }
    let mut table = Table {
        header: vec!["operator", "convention", "samples", "min_gap", "mean_gap", "max_gap"],
        rows: vec![row!["chsh", "qubit", chsh.samples, chsh.min_gap, chsh.mean_gap, chsh.max_gap]],
    };
    for (conv, g) in &cglmp {
        table.rows.push(row!["cglmp", conv.name(), g.samples, g.min_gap, g.mean_gap, g.max_gap]);
    }
    let mut flags = Vec::new();
    if chsh.max_gap > CHSH_IDENTITY_TOLERANCE {
        flags.push("chsh_square_identity_gap".to_string());
    }
    let result = json!({
        "chsh": chsh,
        "chsh_tolerance": CHSH_IDENTITY_TOLERANCE,
        "cglmp": cglmp.iter().map(|(c, g)| json!({"convention": c.name(), "gaps": g})).collect::<Vec<_>>(),
    });
    Ok(Report { result, table, flags, lines: Vec::new() })
}

struct TsirelsonRun {
    value: f64,
    b2: f64,
    settings: ChshSettings<f64>,
    bell: Option<BellStateKind>,
    amplitudes: Vec<Complex<f64>>,
    evals: usize,
    flagged: bool,
}

fn run_tsirelson(states: States, commuting: bool, restarts: Option<usize>, seed: u64) -> Result<TsirelsonRun> {
    let search = TsirelsonSearch {
        config: optimizer(restarts, 64, 20_000)?,
        states: match states {
            States::Bell => StateSearch::BellFamily,
            States::Pure => StateSearch::PureStates,
        },
        constraint: if commuting { SettingsConstraint::CommutingAlice } else { SettingsConstraint::Free },
    };
    let r = tsirelson_max::<f64>(&search, seed)?;
    let b2 = expectation(&chsh_square_identity(&r.settings).direct, &r.state)?.re;
    Ok(TsirelsonRun {
        value: r.value,
        b2,
        settings: r.settings,
        bell: r.bell_kind,
        amplitudes: r.state.amplitudes().to_vec(),
        evals: r.evals,
        flagged: r.flagged,
    })
}

fn tsirelson(states: States, commuting: bool, restarts: Option<usize>, seed: u64) -> Result<Report> {
    let r = run_tsirelson(states, commuting, restarts, seed)?;
    let s = &r.settings;
    let result = json!({
        "value": r.value,
        "b2_at_optimum": r.b2,
        "bell_state": r.bell,
        "state": amplitudes_json(&r.amplitudes),
        "settings": {
            "a": direction_json(&s.a),
            "a_prime": direction_json(&s.a_prime),
            "b": direction_json(&s.b),
            "b_prime": direction_json(&s.b_prime),
        },
        "evals": r.evals,
    });
    let mut cells =
        row![r.value, r.b2, r.bell.map_or("none".to_string(), |k| to_json_string(&k).replace('"', "")), r.evals];
    for d in [&s.a, &s.a_prime, &s.b, &s.b_prime] {
        cells.extend(d.components().map(Cell::from));
    }
    let table = Table {
        header: vec![
            "value",
            "b2_at_optimum",
            "bell_state",
            "evals",
            "a_x",
            "a_y",
            "a_z",
            "a_prime_x",
            "a_prime_y",
            "a_prime_z",
            "b_x",
            "b_y",
            "b_z",
            "b_prime_x",
            "b_prime_y",
            "b_prime_z",
        ],
        rows: vec![cells],
    };
    let flags = if r.flagged { vec!["below_classical_bound".to_string()] } else { Vec::new() };
    Ok(Report { result, table, flags, lines: Vec::new() })
}

fn cglmp(
    convention: Option<OutcomeSpectrum>,
    gamma: Option<f64>,
    max_evals: usize,
    restarts: Option<usize>,
    seed: u64,
) -> Result<Report> {
    if gamma.is_some_and(|g| !g.is_finite()) {
        return Err(Error::NonFinite { context: "gamma" });
    }
    let search = CglmpSearch { config: optimizer(restarts, 200, max_evals)?, pinned_gamma: gamma };
    let conventions = convention.map_or(OutcomeSpectrum::ALL.to_vec(), |c| vec![c]);
    let mut reports = Vec::new();
    for conv in conventions {
        reports.push(cglmp_max::<f64>(conv, &search, seed)?.report());
    }
    let table = Table {
        header: vec!["convention", "value", "imaginary_part", "gamma", "evals", "flagged"],
        rows: reports
            .iter()
            .map(|r| row![r.convention.name(), r.value, r.imaginary_part, r.gamma, r.evals, r.flagged])
            .collect(),
    };
    let flags = reports.iter().filter(|r| r.flagged).map(|r| format!("no_violation:{}", r.convention.name())).collect();
    let result = json!({ "restarts": search.config.restarts, "max_evals_per_restart": max_evals, "maxima": reports });
    Ok(Report { result, table, flags, lines: Vec::new() })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    alpha: f64,
    beta: f64,
    alpha_p: f64,
    beta_p2: f64,
    undeformed: f64,
    exact_shift: f64,
    series_shift: f64,
    exact_value: f64,
    /// `exact_shift − series_shift`.
    residual: f64,
}

impl SweepRow {
    fn new(alpha: f64, beta: f64, p: f64, exact: Deformed<f64>, series: Deformed<f64>) -> Self {
        Self {
            alpha,
            beta,
            alpha_p: alpha * p,
            beta_p2: beta * p * p,
            undeformed: exact.undeformed,
            exact_shift: exact.shift,
            series_shift: series.shift,
            exact_value: exact.value(),
            residual: exact.shift - series.shift,
        }
    }

    fn cells(&self) -> Vec<Cell> {
        row![
            self.alpha,
            self.beta,
            self.alpha_p,
            self.beta_p2,
            self.undeformed,
            self.exact_shift,
            self.series_shift,
            self.exact_value,
            self.residual
        ]
    }
}

const SWEEP_HEADER: [&str; 9] =
    ["alpha", "beta", "alpha_p", "beta_p2", "undeformed", "exact_shift", "series_shift", "exact_value", "residual"];

#[derive(Debug, Clone, Copy, Serialize)]
struct SweepFits {
    /// Variable the fits run over.
    along: &'static str,
    shift: Option<PowerLaw>,
    residual: Option<PowerLaw>,
}

fn sweep_fits(rows: &[SweepRow], along: &'static str) -> SweepFits {
    let x: Vec<f64> = rows.iter().map(|r| if along == "alpha_p" { r.alpha_p } else { r.beta_p2 }).collect();
    let shift: Vec<f64> = rows.iter().map(|r| r.exact_shift).collect();
    let residual: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    SweepFits { along, shift: loglog_fit(&x, &shift), residual: loglog_fit(&x, &residual) }
}

fn qubit_sweep_rows(betas: &[f64], alphas: Option<&[f64]>, p: f64) -> Result<Vec<SweepRow>> {
    let kin = Kinematics::equal(p)?;
    let state = bell_state::<f64>(BellStateKind::PhiPlus);
    let settings = ChshSettings::optimal();
    let mut rows = Vec::new();
    for &alpha in alphas.unwrap_or(&[0.0]) {
        for &beta in betas {
            let params =
                if alphas.is_some() { GupParams::linear_quadratic(alpha, beta)? } else { GupParams::quadratic(beta)? };
            let exact = deformed_b2(&state, &settings, &kin, &params, EvalMode::Exact)?;
            let series = deformed_b2(&state, &settings, &kin, &params, EvalMode::Series2)?;
            rows.push(SweepRow::new(alpha, beta, p, exact, series));
        }
    }
    Ok(rows)
}

fn gup_sweep(beta_grid: &Grid, alpha_grid: Option<&Grid>, p: f64) -> Result<Report> {
    let betas = beta_grid.points();
    let alphas = alpha_grid.map(Grid::points);
    let rows = qubit_sweep_rows(&betas, alphas.as_deref(), p)?;
    let fits = match (alphas.as_ref().map_or(1, Vec::len), betas.len()) {
        (1, n) if n > 1 => Some(sweep_fits(&rows, "beta_p2")),
        (m, 1) if m > 1 => Some(sweep_fits(&rows, "alpha_p")),
        _ => None,
    };
    let model = if alphas.is_some() { "linear_quadratic" } else { "quadratic" };
    let table = Table { header: SWEEP_HEADER.to_vec(), rows: rows.iter().map(SweepRow::cells).collect() };
    let result = json!({ "model": model, "p": p, "rows": rows, "fits": fits });
    Ok(Report { result, table, flags: Vec::new(), lines: Vec::new() })
}

/// Maximally entangled qutrit pair `(|00⟩ + |11⟩ + |22⟩)/√3`.
fn qutrit_max_entangled() -> crate::matkernel::StateVector<f64> {
    optimal_state(1.0).expect("finite γ")
}

fn qutrit_sweep_rows(betas: &[f64], p: f64) -> Result<Vec<SweepRow>> {
    let kin = Kinematics::equal(p)?;
    let state = qutrit_max_entangled();
    let settings = CglmpSettings::<f64>::lz_example();
    betas
        .iter()
        .map(|&beta| {
            let params = GupParams::quadratic(beta)?;
            let exact = deformed_c223_sq(&state, &settings, &kin, &params, EvalMode::Exact)?;
            let series = deformed_c223_sq(&state, &settings, &kin, &params, EvalMode::Series2)?;
            Ok(SweepRow::new(0.0, beta, p, exact, series))
        })
        .collect()
}

fn gup_qutrit_sweep(beta_grid: &Grid, p: f64) -> Result<Report> {
    let rows = qutrit_sweep_rows(&beta_grid.points(), p)?;
    let g = g_correlator(&CglmpSettings::<f64>::lz_example(), &qutrit_max_entangled())?;
    let fits = (rows.len() > 1).then(|| sweep_fits(&rows, "beta_p2"));
    let table = Table { header: SWEEP_HEADER.to_vec(), rows: rows.iter().map(SweepRow::cells).collect() };
    let result = json!({ "model": "quadratic", "p": p, "g_correlator": g, "rows": rows, "fits": fits });
    Ok(Report { result, table, flags: Vec::new(), lines: Vec::new() })
}

fn bounds(p2: f64, eps: f64) -> Result<Report> {
    let spec = ExperimentSpec::new(p2, eps)?;
    let b = gup_bounds(&spec);
    let result = json!({
        "p_squared": p2,
        "epsilon": eps,
        "alpha_max": b.alpha_max,
        "alpha0_max": b.alpha0_max,
        "log10_alpha0_max": b.alpha0_max.log10(),
        "beta_max": b.beta_max,
        "beta0_max": b.beta0_max,
        "log10_beta0_max": b.beta0_max.log10(),
    });
    let table = Table {
        header: vec!["p_squared", "epsilon", "alpha_max", "alpha0_max", "beta_max", "beta0_max"],
        rows: vec![row![p2, eps, b.alpha_max, b.alpha0_max, b.beta_max, b.beta0_max]],
    };
    Ok(Report { result, table, flags: Vec::new(), lines: Vec::new() })
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    status: &'static str,
    computed: f64,
    reference: f64,
    tolerance: f64,
    detail: String,
}

impl Check {
    /// PASS when `|computed − reference| ≤ tolerance`.
    fn absolute(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let ok = (computed - reference).abs() <= tolerance;
        Self::with(name, ok, computed, reference, tolerance, format!("|Δ| = {:.3e}", (computed - reference).abs()))
    }

    /// PASS when the relative deviation is within `tolerance`.
    fn relative(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let rel = ((computed - reference) / reference).abs();
        Self::with(name, rel <= tolerance, computed, reference, tolerance, format!("relative {rel:.3e}"))
    }

    /// PASS when `computed ≥ reference`.
    fn at_least(name: impl Into<String>, computed: f64, reference: f64) -> Self {
        Self::with(name, computed >= reference, computed, reference, 0.0, "lower bound".into())
    }

    fn with(name: impl Into<String>, ok: bool, computed: f64, reference: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), status: if ok { "PASS" } else { "FLAG" }, computed, reference, tolerance, detail }
    }

    fn line(&self) -> String {
        format!(
            "{} {}: computed {:.10e}, reference {:.10e} ({})",
            self.status, self.name, self.computed, self.reference, self.detail
        )
    }
}

fn fit_or_nan(f: Option<PowerLaw>) -> PowerLaw {
    f.unwrap_or(PowerLaw { slope: f64::NAN, intercept: f64::NAN })
}

fn paper_table(max_evals: usize, restarts: Option<usize>, seed: u64) -> Result<Report> {
    let mut checks = Vec::new();
    let mut flags = Vec::new();

    let max_gap = chsh_gaps(1000, seed).into_iter().fold(0.0, f64::max);
    checks.push(Check::absolute("chsh square identity, max gap", max_gap, 0.0, CHSH_IDENTITY_TOLERANCE));

    let t = run_tsirelson(States::Bell, false, restarts, seed)?;
    if t.flagged {
        flags.push("below_classical_bound".to_string());
    }
    checks.push(Check::absolute("tsirelson value", t.value, 8f64.sqrt(), 1e-6));
    checks.push(Check::absolute("chsh square at optimum", t.b2, 8.0, 1e-9));
    let c = run_tsirelson(States::Bell, true, restarts, seed)?;
    checks.push(Check::absolute("commuting settings maximum", c.value, 2.0, 1e-6));

    let bp2 = log_space(1e-5, 1e-2, 16);
    let q = qubit_sweep_rows(&bp2, None, 1.0)?;
    let at = qubit_sweep_rows(&[1e-3], None, 1.0)?;
    checks.push(Check::relative("qubit series correction at beta p^2 = 1e-3", at[0].exact_shift, 16e-6, 0.01));
    let fit = fit_or_nan(sweep_fits(&q, "beta_p2").residual);
    checks.push(Check::at_least("qubit series residual slope", fit.slope, 2.9));

    let l = qubit_sweep_rows(&[0.0], Some(&log_space(1e-6, 1e-3, 16)), 1.0)?;
    let fit = fit_or_nan(sweep_fits(&l, "alpha_p").shift);
    checks.push(Check::absolute("linear model slope in alpha p", fit.slope, 2.0, 0.1));
    checks.push(Check::relative("linear model coefficient", fit.coefficient(), 8.0, 0.05));

    let lz = CglmpSettings::<f64>::lz_example();
    let psi = qutrit_max_entangled();
    checks.push(Check::absolute("l_z correlator G", g_correlator(&lz, &psi)?, 52.0, 1e-10));
    let sq = qutrit_sweep_rows(&[0.0], 1.0)?[0].undeformed;
    checks.push(Check::absolute("l_z square form, exact", sq, 100.0 / 3.0, 1e-10));
    checks.push(Check::absolute("l_z square form, quoted", sq, 32.7, 0.05));
    let qs = qutrit_sweep_rows(&[1e-3], 1.0)?;
    checks.push(Check::relative(
        "qutrit series ratio at beta p^2 = 1e-3",
        qs[0].exact_shift / qs[0].series_shift,
        1.0,
        0.01,
    ));
    let qfit = fit_or_nan(sweep_fits(&qutrit_sweep_rows(&bp2, 1.0)?, "beta_p2").residual);
    checks.push(Check::at_least("qutrit series residual slope", qfit.slope, 2.9));

    for row in reproduce_paper_table() {
        let ok = row.agreement == Agreement::Consistent;
        let name = format!("bound {} at eps = {:e}", row.parameter, row.epsilon);
        let agreement = to_json_string(&row.agreement).replace('"', "");
        let detail = format!("log10 {:.2} vs {:.0}, {agreement}", row.log10_computed, row.quoted_log10);
        checks.push(Check::with(name, ok, row.computed, 10f64.powf(row.quoted_log10), 0.0, detail));
    }

    let target = optimal_value(optimal_gamma::<f64>());
    let search = CglmpSearch { config: optimizer(restarts, 200, max_evals)?, pinned_gamma: None };
    for conv in OutcomeSpectrum::ALL {
        let m = cglmp_max::<f64>(conv, &search, seed)?;
        checks.push(Check::absolute(format!("cglmp maximum, {} outcomes", conv.name()), m.value, target, 0.05));
        if m.flagged {
            flags.push(format!("no_violation:{}", conv.name()));
        }
    }

    let betas = log_space(1e-6, 1e-3, 16);
    let residuals = betas.iter().map(|&b| spin_commutator_residual(b, 1.0)).collect::<Result<Vec<_>>>()?;
    let fit = fit_or_nan(loglog_fit(&betas, &residuals));
    checks.push(Check::absolute("spin commutator residual slope", fit.slope, 2.0, 0.1));

    let table = Table {
        header: vec!["check", "status", "computed", "reference", "tolerance", "detail"],
        rows: checks
            .iter()
            .map(|c| row![c.name.clone(), c.status, c.computed, c.reference, c.tolerance, c.detail.clone()])
            .collect(),
    };
    let lines = checks.iter().map(Check::line).collect();
    Ok(Report { result: json!({ "checks": checks }), table, flags, lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("bellgup").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_parsing() {
        assert_eq!("1e-5:1e-2:20".parse::<Grid>().unwrap(), Grid { start: 1e-5, stop: 1e-2, count: 20 });
        assert_eq!("0".parse::<Grid>().unwrap(), Grid { start: 0.0, stop: 0.0, count: 1 });
        for bad in ["1:2", "0:1:5", "1:2:0", "a:b:c", "-1"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(to_json_string(&json!([0.1, 2.0])), "[1.0000000000000001e-1,2.0000000000000000e0]");
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn canonicalize_drops_timestamp() {
        let a = r#"{"manifest":{"seed":1,"timestamp":"2026-01-01T00:00:00Z"},"x":1}"#;
        let b = r#"{"manifest":{"seed":1,"timestamp":"2027-05-05T10:00:00Z"},"x":1}"#;
        assert_eq!(canonicalize(a), canonicalize(b));
        let c = "# seed: 1\n# timestamp: now\nx\n1\n";
        assert_eq!(canonicalize(c), "# seed: 1\nx\n1\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_capture(&["no-such-command"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
        assert_eq!(run_capture(&["bounds", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bounds", "--eps", "-1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["tsirelson", "--restarts", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn bounds_json_shape() {
        let (code, out, _) = run_capture(&["bounds", "--p2", "2.8e-26", "--eps", "0.1"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["manifest"]["command"], "bounds");
        assert!(v["flags"].as_array().unwrap().is_empty());
        let a0 = v["result"]["alpha0_max"].as_f64().unwrap();
        assert!((a0 / 1.2e13 - 1.0).abs() < 0.05, "{a0}");
    }

    #[test]
    fn csv_sweep_has_one_row_per_grid_point() {
        let (code, out, _) = run_capture(&["gup-sweep", "--beta-grid", "1e-5:1e-2:20", "--p", "1", "--format", "csv"]);
        assert_eq!(code, EXIT_OK);
        let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], SWEEP_HEADER.join(","));
        assert_eq!(data.len(), 21);
    }

    #[test]
    fn linear_sweep_fits_along_alpha() {
        let (_, out, _) = run_capture(&["gup-sweep", "--beta-grid", "0", "--alpha-grid", "1e-6:1e-3:8"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["fits"]["along"], "alpha_p");
        let slope = v["result"]["fits"]["shift"]["slope"].as_f64().unwrap();
        assert!((slope - 2.0).abs() < 0.01, "{slope}");
    }
}
