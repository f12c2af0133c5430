//! Command-line front end: exact set and match probabilities, outcome and
//! duration distributions, scoring-system comparisons, seeded simulation,
//! and strength estimation from observation files.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use rallyprob::estimate::{
    mle_scores, mle_serve_counts, MleOptions, ScoreObservation, ServeCountData,
};
use rallyprob::matches::{match_duration_moments, match_win_prob, MatchQuery};
use rallyprob::model::{PlayerId, RallyModel, ScoringSystem};
use rallyprob::set::{duration_moments, duration_pmf, final_score_distribution, set_win_probs};
use rallyprob::sim::{simulate_match, simulate_set, SimConfig};

#[derive(Parser)]
#[command(
    name = "rallyprob",
    about = "Exact probabilities for games under (m, n, G) scoring",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Set-winning probability and duration moments, single point or sweep
    SetProb {
        #[command(flatten)]
        system: SetSystemArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Match-winning probability and duration moments (first to G sets)
    MatchProb {
        #[command(flatten)]
        system: MatchSystemArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Distribution of the final set score
    ScoreDist {
        #[command(flatten)]
        system: SetSystemArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Stop materializing tie outcomes below this remaining mass
        #[arg(long, default_value_t = 1e-10)]
        truncation: f64,
    },
    /// Distribution of the number of rallies in a set
    DurationDist {
        #[command(flatten)]
        system: SetSystemArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-10)]
        truncation: f64,
    },
    /// Compare two scoring systems: win probabilities and duration ratios
    Compare {
        /// Old system as m,n,G
        #[arg(long, value_parser = parse_system)]
        old: ScoringSystem,
        /// New system as m,n,G
        #[arg(long, value_parser = parse_system)]
        new: ScoringSystem,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo simulation with a fixed seed
    Simulate {
        #[command(flatten)]
        system: MatchSystemArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Abort any single play-out beyond this many rallies
        #[arg(long, default_value_t = 1_000_000)]
        rally_cap: u64,
    },
    /// Estimate rally-winning probabilities from an observation file
    Estimate {
        /// JSON-lines file: {m, n, first_server, score_a, score_b} per line,
        /// optionally with serve tallies {a_sw, a_s, b_sw, b_s}
        #[arg(long)]
        input: PathBuf,
        /// Fit the one-parameter model p_b = 1 - p_a
        #[arg(long)]
        no_server: bool,
        /// Grid spacing for the likelihood search
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct SetSystemArgs {
    /// Serves per pre-tie service turn
    #[arg(long)]
    m: u32,
    /// Points needed to win a set
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct MatchSystemArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    /// Sets needed to win the match
    #[arg(long, default_value_t = 1)]
    g: u32,
}

#[derive(Args)]
struct ModelArgs {
    /// A's rally-winning probability on own serve
    #[arg(long, conflicts_with = "p")]
    pa: Option<f64>,
    /// B's rally-winning probability on own serve
    #[arg(long, conflicts_with = "p")]
    pb: Option<f64>,
    /// No-server model: A wins any rally with probability p
    #[arg(long)]
    p: Option<f64>,
    /// With --grid, sweep p in the no-server model instead of pa
    #[arg(long)]
    no_server: bool,
    /// Sweep: a step like 0.1 (values step..1) or start:end:step inclusive
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value_t = ServerArg::A)]
    first_server: ServerArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Significant digits for printed probabilities and moments
    #[arg(long, default_value_t = 6)]
    precision: usize,
    /// Write to this path (atomically) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ServerArg {
    A,
    B,
}

impl ServerArg {
    fn id(self) -> PlayerId {
        match self {
            ServerArg::A => PlayerId::A,
            ServerArg::B => PlayerId::B,
        }
    }
    fn label(self) -> &'static str {
        match self {
            ServerArg::A => "A",
            ServerArg::B => "B",
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

impl Format {
    fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "json-lines",
        }
    }
}

fn parse_system(s: &str) -> Result<ScoringSystem, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected m,n,G".into());
    }
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse().map_err(|_| format!("bad number {p:?}")))
        .collect::<Result<_, _>>()?;
    ScoringSystem::new(nums[0], nums[1], nums[2]).map_err(|e| e.to_string())
}

/// A bad flag combination or malformed flag value: exits with the usage
/// code rather than the domain-error code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (start, end, step) = match parts.len() {
        1 => {
            let step: f64 = parts[0]
                .parse()
                .map_err(|_| usage(format!("bad grid step {:?}", parts[0])))?;
            (step, 1.0 - step / 2.0, step)
        }
        3 => {
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.parse().map_err(|_| usage(format!("bad grid bound {p:?}"))))
                .collect::<Result<_, _>>()?;
            (nums[0], nums[1], nums[2])
        }
        _ => return Err(usage("grid must be STEP or START:END:STEP")),
    };
    if step <= 0.0 || start <= 0.0 || end >= 1.0 + 1e-12 {
        return Err(usage("grid values must lie strictly inside (0, 1) with positive step"));
    }
    let mut values = Vec::new();
    let mut i = 0u32;
    loop {
        let v = start + i as f64 * step;
        if v > end + 1e-9 {
            break;
        }
        // Snap to the step lattice to keep labels like 0.3 exact.
        values.push((v / step).round() * step);
        i += 1;
    }
    if values.is_empty() {
        return Err(usage("empty grid"));
    }
    Ok(values)
}

/// Resolve model flags into the list of models to evaluate.
fn resolve_models(args: &ModelArgs) -> anyhow::Result<Vec<RallyModel<f64>>> {
    if let Some(spec) = &args.grid {
        let grid = parse_grid(spec)?;
        if args.no_server {
            return grid
                .iter()
                .map(|&p| RallyModel::no_server(p).map_err(Into::into))
                .collect();
        }
        if let Some(pb) = args.pb {
            return grid
                .iter()
                .map(|&pa| RallyModel::server(pa, pb).map_err(Into::into))
                .collect();
        }
        let mut models = Vec::with_capacity(grid.len() * grid.len());
        for &pa in &grid {
            for &pb in &grid {
                models.push(RallyModel::server(pa, pb)?);
            }
        }
        return Ok(models);
    }
    if let Some(p) = args.p {
        return Ok(vec![RallyModel::no_server(p)?]);
    }
    match (args.pa, args.pb) {
        (Some(pa), Some(pb)) => Ok(vec![RallyModel::server(pa, pb)?]),
        _ => Err(usage("give --pa and --pb, or --p, or --grid")),
    }
}

fn single_model(args: &ModelArgs) -> anyhow::Result<RallyModel<f64>> {
    if args.grid.is_some() {
        return Err(usage("this command takes a single model, not a grid"));
    }
    Ok(resolve_models(args)?.remove(0))
}

/// Number with a fixed count of significant digits, plain decimal notation.
fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

struct Report {
    header: Vec<(String, String)>,
    format: Format,
    /// CSV column names, doubling as JSON field names.
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn new(command: &str, common: &CommonArgs, columns: Vec<&'static str>) -> Self {
        let mut report = Report {
            header: Vec::new(),
            format: common.format,
            columns,
            rows: Vec::new(),
        };
        report.push("command", command);
        report.push("first_server", common.first_server.label());
        report.push("format", common.format.label());
        report.push("precision", common.precision);
        report
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    fn push_system(&mut self, system: &ScoringSystem) {
        self.push("m", system.serves_per_turn());
        self.push("n", system.points_to_win());
        self.push("g", system.sets_to_win());
    }

    fn push_model_args(&mut self, args: &ModelArgs) {
        if let Some(grid) = &args.grid {
            self.push("grid", grid);
            self.push("no_server", args.no_server);
            if let Some(pb) = args.pb {
                self.push("pb", pb);
            }
        } else if let Some(p) = args.p {
            self.push("model", "no-server");
            self.push("p", p);
        } else {
            self.push("model", "server");
            self.push("pa", args.pa.unwrap_or(f64::NAN));
            self.push("pb", args.pb.unwrap_or(f64::NAN));
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        match self.format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    writeln!(out, "{}", row.join(",")).unwrap();
                }
            }
            Format::JsonLines => {
                for row in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .filter(|(_, v)| !v.is_empty())
                        .map(|(&k, v)| {
                            let value = v
                                .parse::<f64>()
                                .ok()
                                .and_then(serde_json::Number::from_f64)
                                .map(serde_json::Value::Number)
                                .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                            (k.to_string(), value)
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::Value::Object(obj)).unwrap();
                }
            }
        }
        out
    }
}

fn emit(out: &Option<PathBuf>, body: &str) -> anyhow::Result<()> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp.partial");
            fs::write(&tmp, body)
                .with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path)
                .with_context(|| format!("renaming into {}", path.display()))?;
            Ok(())
        }
    }
}

fn model_cells(model: &RallyModel<f64>, digits: usize) -> (String, String) {
    (sig(model.p_a(), digits), sig(model.p_b(), digits))
}

fn cmd_set_prob(system: SetSystemArgs, model: ModelArgs, common: CommonArgs) -> anyhow::Result<()> {
    let sys = ScoringSystem::new(system.m, system.n, 1)?;
    let mut report = Report::new(
        "set-prob",
        &common,
        vec!["p_a", "p_b", "win_prob", "mean_duration", "var_duration"],
    );
    report.push_system(&sys);
    report.push_model_args(&model);
    let first = common.first_server.id();
    let d = common.precision;
    for m in resolve_models(&model)? {
        let (win, _) = set_win_probs(&sys, &m, first)?;
        let (mean, var) = duration_moments(&sys, &m, first)?;
        let (pa, pb) = model_cells(&m, d);
        report.row(vec![pa, pb, sig(win, d), sig(mean, d), sig(var, d)]);
    }
    emit(&common.out, &report.render())
}

fn cmd_match_prob(
    system: MatchSystemArgs,
    model: ModelArgs,
    common: CommonArgs,
) -> anyhow::Result<()> {
    let sys = ScoringSystem::new(system.m, system.n, system.g)?;
    let mut report = Report::new(
        "match-prob",
        &common,
        vec!["p_a", "p_b", "win_prob", "mean_duration", "var_duration"],
    );
    report.push_system(&sys);
    report.push_model_args(&model);
    let first = common.first_server.id();
    let d = common.precision;
    for m in resolve_models(&model)? {
        let query = MatchQuery {
            system: sys,
            model: m,
            first_server: first,
        };
        let win = match_win_prob(&query)?;
        let (mean, var) = match_duration_moments(&query)?;
        let (pa, pb) = model_cells(&m, d);
        report.row(vec![pa, pb, sig(win, d), sig(mean, d), sig(var, d)]);
    }
    emit(&common.out, &report.render())
}

fn cmd_score_dist(
    system: SetSystemArgs,
    model: ModelArgs,
    common: CommonArgs,
    truncation: f64,
) -> anyhow::Result<()> {
    let sys = ScoringSystem::new(system.m, system.n, 1)?;
    let m = single_model(&model)?;
    let mut report = Report::new(
        "score-dist",
        &common,
        vec!["kind", "score_a", "score_b", "probability"],
    );
    report.push_system(&sys);
    report.push_model_args(&model);
    report.push("truncation", truncation);
    let d = common.precision;
    let dist = final_score_distribution(&sys, &m, common.first_server.id(), truncation)?;
    for (score, p) in &dist.entries {
        let (a, b) = score.points(sys.points_to_win());
        report.row(vec![
            "score".into(),
            a.to_string(),
            b.to_string(),
            sig(*p, d),
        ]);
    }
    report.row(vec!["tail".into(), String::new(), String::new(), sig(dist.tail, d)]);
    emit(&common.out, &report.render())
}

fn cmd_duration_dist(
    system: SetSystemArgs,
    model: ModelArgs,
    common: CommonArgs,
    truncation: f64,
) -> anyhow::Result<()> {
    let sys = ScoringSystem::new(system.m, system.n, 1)?;
    let m = single_model(&model)?;
    let mut report = Report::new(
        "duration-dist",
        &common,
        vec!["kind", "duration", "probability"],
    );
    report.push_system(&sys);
    report.push_model_args(&model);
    report.push("truncation", truncation);
    let d = common.precision;
    let pmf = duration_pmf(&sys, &m, common.first_server.id(), truncation)?;
    for (duration, p) in pmf.iter() {
        report.row(vec!["pmf".into(), duration.to_string(), sig(p, d)]);
    }
    report.row(vec!["tail".into(), String::new(), sig(pmf.tail(), d)]);
    emit(&common.out, &report.render())
}

fn cmd_compare(
    old: ScoringSystem,
    new: ScoringSystem,
    model: ModelArgs,
    common: CommonArgs,
) -> anyhow::Result<()> {
    let mut report = Report::new(
        "compare",
        &common,
        vec![
            "p_a",
            "p_b",
            "win_prob_old",
            "win_prob_new",
            "ratio_mean",
            "ratio_std",
        ],
    );
    report.push(
        "old",
        format!(
            "{},{},{}",
            old.serves_per_turn(),
            old.points_to_win(),
            old.sets_to_win()
        ),
    );
    report.push(
        "new",
        format!(
            "{},{},{}",
            new.serves_per_turn(),
            new.points_to_win(),
            new.sets_to_win()
        ),
    );
    report.push_model_args(&model);
    let models = resolve_models(&model)?;
    let d = common.precision;
    let rows = rallyprob::matches::compare_systems(&old, &new, &models, common.first_server.id())?;
    for row in rows {
        let (pa, pb) = model_cells(&row.model, d);
        report.row(vec![
            pa,
            pb,
            sig(row.win_prob_old, d),
            sig(row.win_prob_new, d),
            sig(row.ratio_mean, d),
            sig(row.ratio_std, d),
        ]);
    }
    emit(&common.out, &report.render())
}

fn cmd_simulate(
    system: MatchSystemArgs,
    model: ModelArgs,
    common: CommonArgs,
    trials: u64,
    seed: u64,
    rally_cap: u64,
) -> anyhow::Result<()> {
    let sys = ScoringSystem::new(system.m, system.n, system.g)?;
    let m = single_model(&model)?;
    let mut config = SimConfig::new(trials, seed, sys, m, common.first_server.id());
    config.rally_cap = rally_cap;
    let summary = if sys.sets_to_win() > 1 {
        simulate_match(&config)?
    } else {
        simulate_set(&config)?
    };
    let mut header = String::new();
    for (k, v) in [
        ("command", "simulate".to_string()),
        ("m", sys.serves_per_turn().to_string()),
        ("n", sys.points_to_win().to_string()),
        ("g", sys.sets_to_win().to_string()),
        ("pa", m.p_a().to_string()),
        ("pb", m.p_b().to_string()),
        ("first_server", common.first_server.label().to_string()),
        ("trials", trials.to_string()),
        ("seed", seed.to_string()),
        ("rally_cap", rally_cap.to_string()),
    ] {
        writeln!(header, "# {k} = {v}").unwrap();
    }
    let durations: serde_json::Map<String, serde_json::Value> = summary
        .duration_histogram
        .iter()
        .map(|(&d, &c)| (d.to_string(), json!(c)))
        .collect();
    let scores: serde_json::Map<String, serde_json::Value> = summary
        .final_score_histogram
        .iter()
        .map(|(&(a, b), &c)| (format!("{a}-{b}"), json!(c)))
        .collect();
    let body = json!({
        "trials": summary.trials,
        "wins_a": summary.wins_a,
        "win_fraction_a": summary.win_fraction_a(),
        "mean_duration": summary.mean_duration(),
        "duration_variance": summary.duration_variance(),
        "a_own_serve_wins": summary.a_own_serve_wins,
        "a_own_serves": summary.a_own_serves,
        "b_own_serve_wins": summary.b_own_serve_wins,
        "b_own_serves": summary.b_own_serves,
        "duration_histogram": durations,
        "final_score_histogram": scores,
    });
    emit(&common.out, &format!("{header}{body}\n"))
}

#[derive(Deserialize)]
struct ObservationLine {
    m: u32,
    n: u32,
    first_server: String,
    score_a: u32,
    score_b: u32,
    a_sw: Option<u64>,
    a_s: Option<u64>,
    b_sw: Option<u64>,
    b_s: Option<u64>,
}

fn cmd_estimate(
    input: PathBuf,
    no_server: bool,
    grid_step: f64,
    common: CommonArgs,
) -> anyhow::Result<()> {
    let text = fs::read_to_string(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: ObservationLine = serde_json::from_str(line)
            .with_context(|| format!("line {} of {}", idx + 1, input.display()))?;
        lines.push(parsed);
    }
    if lines.is_empty() {
        bail!("no observations in {}", input.display());
    }
    let mut header = String::new();
    for (k, v) in [
        ("command", "estimate".to_string()),
        ("input", input.display().to_string()),
        ("no_server", no_server.to_string()),
        ("grid_step", grid_step.to_string()),
        ("observations", lines.len().to_string()),
    ] {
        writeln!(header, "# {k} = {v}").unwrap();
    }

    let has_tallies = lines
        .iter()
        .any(|l| l.a_sw.is_some() && l.a_s.is_some() && l.b_sw.is_some() && l.b_s.is_some());
    let body = if has_tallies {
        let mut data = ServeCountData::default();
        for line in &lines {
            data.a_serve_wins += line.a_sw.unwrap_or(0);
            data.a_serves += line.a_s.unwrap_or(0);
            data.b_serve_wins += line.b_sw.unwrap_or(0);
            data.b_serves += line.b_s.unwrap_or(0);
        }
        let est = mle_serve_counts(&data)?;
        json!({
            "estimator": "serve-counts",
            "p_a": est.p_a,
            "p_b": est.p_b,
            "se_a": est.se_a,
            "se_b": est.se_b,
            "degenerate": est.degenerate,
        })
    } else {
        let observations: Vec<ScoreObservation> = lines
            .iter()
            .map(|l| {
                let first_server = match l.first_server.as_str() {
                    "A" | "a" => Ok(PlayerId::A),
                    "B" | "b" => Ok(PlayerId::B),
                    other => Err(anyhow!("bad first_server {other:?}")),
                }?;
                Ok(ScoreObservation {
                    m: l.m,
                    n: l.n,
                    first_server,
                    score_a: l.score_a,
                    score_b: l.score_b,
                })
            })
            .collect::<anyhow::Result<_>>()?;
        let options = MleOptions {
            grid_step,
            no_server,
            ..MleOptions::default()
        };
        let fit = mle_scores(&observations, &options)?;
        json!({
            "estimator": "likelihood",
            "p_a": fit.p_a,
            "p_b": fit.p_b,
            "log_likelihood": fit.log_likelihood,
            "at_boundary": fit.at_boundary,
        })
    };
    emit(&common.out, &format!("{header}{body}\n"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::SetProb {
            system,
            model,
            common,
        } => cmd_set_prob(system, model, common),
        Command::MatchProb {
            system,
            model,
            common,
        } => cmd_match_prob(system, model, common),
        Command::ScoreDist {
            system,
            model,
            common,
            truncation,
        } => cmd_score_dist(system, model, common, truncation),
        Command::DurationDist {
            system,
            model,
            common,
            truncation,
        } => cmd_duration_dist(system, model, common, truncation),
        Command::Compare {
            old,
            new,
            model,
            common,
        } => cmd_compare(old, new, model, common),
        Command::Simulate {
            system,
            model,
            common,
            trials,
            seed,
            rally_cap,
        } => cmd_simulate(system, model, common, trials, seed, rally_cap),
        Command::Estimate {
            input,
            no_server,
            grid_step,
            common,
        } => cmd_estimate(input, no_server, grid_step, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
