//! Argument parsing and command dispatch for the `cubeslide` binary. Kept in
//! a library so tests can drive it in-process.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cubeslide::classify::{classify_with, Kind};
use cubeslide::config::{ConfigDoc, LabeledConfig, Rules};
use cubeslide::explore::{census, CensusMode, CensusOptions, CensusReport, DiameterMode, Regime};
use cubeslide::formulas::{diameter_conjecture_value, sdk_table};
use cubeslide::moves::MoveEngine;
use cubeslide::parity::{strong_parity_verdict, ParityReport};
use cubeslide::solver::{solve, SolveStatus};
use cubeslide::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "cubeslide", version, about = "Sliding puzzles on the vertices of a d-cube under the k-face rule")]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct RulesArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub l: u32,
}

impl RulesArgs {
    fn rules(&self) -> Result<Rules, Error> {
        Rules::new(self.d, self.k, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Orbit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiameterArg {
    Auto,
    AllPairs,
    Orbit,
    Bound,
    Skip,
}

impl From<DiameterArg> for DiameterMode {
    fn from(d: DiameterArg) -> Self {
        match d {
            DiameterArg::Auto => DiameterMode::Auto,
            DiameterArg::AllPairs => DiameterMode::ExactAllPairs,
            DiameterArg::Orbit => DiameterMode::ExactOrbit,
            DiameterArg::Bound => DiameterMode::Bound,
            DiameterArg::Skip => DiameterMode::Skip,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Census of one puzzle graph: biggest component, diameter, regime
    Analyze {
        #[command(flatten)]
        rules: RulesArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Orbit)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = DiameterArg::Auto)]
        diameter_mode: DiameterArg,
        /// Cap on labeled states held by one BFS
        #[arg(long)]
        budget: Option<u64>,
        /// Report wall-clock time (makes output run-dependent)
        #[arg(long)]
        timings: bool,
    },
    /// Isolated / semi-isolated / mobile verdict for a configuration file
    Classify {
        /// JSON configuration: {"d":3,"tokens":{"001":1,...}}
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = cubeslide::classify::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Shortest move sequence between two configurations
    Solve {
        #[arg(long)]
        start: PathBuf,
        /// Target configuration; omit together with --scramble to use a
        /// random walk from the start
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        k: Option<u32>,
        /// Random legal moves applied to the start to make the target
        #[arg(long)]
        scramble: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = cubeslide::solver::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// S(d,k) values
    Sdk {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Cycle-parity analysis of the mobile stratum
    Parity {
        #[command(flatten)]
        rules: RulesArgs,
    },
    /// Compare k=1 diameters with d*(2^d - l)
    Conjecture {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 2)]
        l_min: u32,
        #[arg(long)]
        l_max: Option<u32>,
        #[arg(long, value_enum, default_value_t = DiameterArg::Auto)]
        diameter_mode: DiameterArg,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory with built UI assets
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Allowed CORS origin; repeatable (default: any localhost origin)
        #[arg(long)]
        cors_origin: Vec<String>,
        #[arg(long, default_value_t = cubeslide_server::DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
}

/// What a run produced: exit code and the text bound for stdout and stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget(_) | Error::Infeasible(_) => EXIT_BUDGET,
        _ => EXIT_INVALID,
    }
}

fn error_outcome(e: &Error) -> Outcome {
    let body = serde_json::json!({ "error": e.to_string() });
    Outcome { code: exit_code(e), stdout: format!("{body}\n"), stderr: format!("error: {e}\n") }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_config(path: &PathBuf) -> Result<ConfigDoc, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn need_k(flag: Option<u32>, doc: &ConfigDoc) -> Result<u32, Error> {
    flag.or(doc.k).ok_or_else(|| Error::Config("k missing: pass --k or put \"k\" in the file".into()))
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            return Outcome { code, stdout: String::new(), stderr: e.render().to_string() };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return Outcome { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let mut out = pool.install(|| dispatch(&cli));
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &out.stdout) {
            return Outcome { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) };
        }
        out.stdout.clear();
    }
    out
}

fn dispatch(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Analyze { rules, mode, diameter_mode, budget, timings } => {
            analyze(cli.format, *rules, *mode, *diameter_mode, *budget, *timings)
        }
        Command::Classify { config, k, budget } => classify_cmd(cli.format, config, *k, *budget),
        Command::Solve { start, target, k, scramble, seed, budget } => {
            solve_cmd(cli.format, start, target.as_ref(), *k, *scramble, *seed, *budget)
        }
        Command::Sdk { d, k } => sdk_cmd(cli.format, *d, *k),
        Command::Parity { rules } => parity_cmd(cli.format, *rules),
        Command::Conjecture { d, l_min, l_max, diameter_mode, budget } => {
            conjecture_cmd(cli.format, *d, *l_min, *l_max, *diameter_mode, *budget)
        }
        Command::Serve { port, host, static_dir, cors_origin, budget } => {
            serve_cmd(*port, host, static_dir.clone(), cors_origin.clone(), *budget)
        }
    };
    result.unwrap_or_else(|e| error_outcome(&e))
}

fn csv_unsupported(what: &str) -> Result<Outcome, Error> {
    Err(Error::Config(format!("--format csv is not available for {what}")))
}

fn analyze(
    format: Format,
    rules: RulesArgs,
    mode: ModeArg,
    diameter: DiameterArg,
    budget: Option<u64>,
    timings: bool,
) -> Result<Outcome, Error> {
    let rules = rules.rules()?;
    let mut opts = CensusOptions {
        mode: match mode {
            ModeArg::Full => CensusMode::Full,
            ModeArg::Orbit => CensusMode::OrbitReduced,
        },
        diameter: diameter.into(),
        timings,
        ..CensusOptions::default()
    };
    if let Some(b) = budget {
        opts.state_budget = b;
        opts.exact_work = opts.exact_work.min(b);
    }
    let report = census(rules, &opts)?;
    let wanted_exact = matches!(diameter, DiameterArg::AllPairs | DiameterArg::Orbit);
    let code = if wanted_exact && report.diameter_exact().is_none() && report.biggest_component > 1 {
        EXIT_BUDGET
    } else {
        EXIT_OK
    };
    let stdout = match format {
        Format::Json => json(&report),
        Format::Csv => format!("{}\n{}\n", CensusReport::CSV_HEADER, report.csv_row()),
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

fn classify_cmd(format: Format, path: &PathBuf, k: Option<u32>, budget: u64) -> Result<Outcome, Error> {
    let doc = read_config(path)?;
    let k = need_k(k, &doc)?;
    let cfg = doc.to_labeled()?;
    let engine = MoveEngine::new(cfg.dim(), k)?;
    let c = classify_with(&engine, &cfg, budget)?;
    let code = if c.kind == Kind::Inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK };
    let stdout = match format {
        Format::Json => json(&c),
        Format::Csv => {
            let kind = serde_json::to_value(c.kind).expect("serializable");
            let stuck: Vec<String> = c.stuck.iter().map(|x| x.to_string()).collect();
            format!(
                "kind,stuck,component_size,truncated\n{},{},{},{}\n",
                kind.as_str().unwrap_or(""),
                stuck.join(" "),
                c.component_size,
                c.truncated
            )
        }
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

fn random_walk(engine: &MoveEngine, start: &LabeledConfig, steps: u32, seed: u64) -> LabeledConfig {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut c = *start;
    for _ in 0..steps {
        let moves = engine.legal_moves(&c);
        if moves.is_empty() {
            break;
        }
        let m = moves[rng.gen_range(0..moves.len())];
        c = engine.apply_move(&c, &m).expect("legal move");
    }
    c
}

fn solve_cmd(
    format: Format,
    start: &PathBuf,
    target: Option<&PathBuf>,
    k: Option<u32>,
    scramble: Option<u32>,
    seed: u64,
    budget: u64,
) -> Result<Outcome, Error> {
    if format == Format::Csv {
        return csv_unsupported("solve");
    }
    let sdoc = read_config(start)?;
    let k = need_k(k, &sdoc)?;
    let s = sdoc.to_labeled()?;
    let engine = MoveEngine::new(s.dim(), k)?;
    let t = match (target, scramble) {
        (Some(p), None) => read_config(p)?.to_labeled()?,
        (None, Some(n)) => random_walk(&engine, &s, n, seed),
        _ => return Err(Error::Config("give exactly one of --target and --scramble".into())),
    };
    let r = solve(&engine, &s, &t, budget)?;
    let code = if r.status == SolveStatus::UnknownBudget { EXIT_BUDGET } else { EXIT_OK };
    Ok(Outcome { code, stdout: json(&r), stderr: String::new() })
}

fn sdk_cmd(format: Format, d: u32, k: Option<u32>) -> Result<Outcome, Error> {
    if d == 0 || d > 12 {
        return Err(Error::Config("d must be in 1..=12".into()));
    }
    let rows: Vec<_> = match k {
        Some(k) if k == 0 || k > d => return Err(Error::FaceDimension { k, d }),
        Some(k) => sdk_table(d).into_iter().filter(|e| e.d == d && e.k == k).collect(),
        None => sdk_table(d),
    };
    let stdout = match format {
        Format::Json if k.is_some() => json(&rows[0]),
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("d,k,S,provenance,closed_form\n");
            for e in &rows {
                let prov = serde_json::to_value(e.provenance).expect("serializable");
                let closed = e.closed_form.map(|x| x.to_string()).unwrap_or_default();
                s += &format!("{},{},{},{},{}\n", e.d, e.k, e.s, prov.as_str().unwrap_or(""), closed);
            }
            s
        }
    };
    Ok(Outcome { code: EXIT_OK, stdout, stderr: String::new() })
}

#[derive(Serialize)]
struct ParityOutput {
    #[serde(flatten)]
    report: ParityReport,
    regime: Option<Regime>,
    mobile_unlabeled_components: u64,
    verdict_evidence: Vec<cubeslide::parity::Evidence>,
}

fn parity_cmd(format: Format, rules: RulesArgs) -> Result<Outcome, Error> {
    if format == Format::Csv {
        return csv_unsupported("parity");
    }
    let v = strong_parity_verdict(rules.rules()?)?;
    let code = match v.regime {
        Some(Regime::AtMostTwo) | None => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let stdout = match v.reports.first() {
        Some(r) if v.reports.len() == 1 => json(&ParityOutput {
            report: r.clone(),
            regime: v.regime,
            mobile_unlabeled_components: v.mobile_unlabeled_components,
            verdict_evidence: v.evidence.clone(),
        }),
        _ => json(&v),
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

#[derive(Serialize)]
struct ConjectureRow {
    d: u32,
    l: u32,
    predicted: u64,
    measured_lo: Option<u32>,
    measured_hi: Option<u32>,
    /// `None` until the diameter is known exactly.
    holds: Option<bool>,
}

fn conjecture_cmd(
    format: Format,
    d: u32,
    l_min: u32,
    l_max: Option<u32>,
    diameter: DiameterArg,
    budget: Option<u64>,
) -> Result<Outcome, Error> {
    let l_max = l_max.unwrap_or((1 << d) - 1);
    let mut opts = CensusOptions { diameter: diameter.into(), ..CensusOptions::default() };
    if let Some(b) = budget {
        opts.state_budget = b;
        opts.exact_work = opts.exact_work.min(b);
    }
    let mut rows = Vec::new();
    for l in l_min.max(2)..=l_max {
        let report = census(Rules::new(d, 1, l)?, &opts)?;
        let predicted = diameter_conjecture_value(d, l);
        let exact = report.diameter_exact();
        rows.push(ConjectureRow {
            d,
            l,
            predicted,
            measured_lo: report.diameter_lo,
            measured_hi: report.diameter_hi,
            holds: exact.map(|x| x as u64 == predicted),
        });
    }
    let code = if rows.iter().any(|r| r.holds.is_none()) { EXIT_INCONCLUSIVE } else { EXIT_OK };
    let stdout = match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
            let mut s = String::from("d,l,predicted,measured_lo,measured_hi,holds\n");
            for r in &rows {
                let holds = r.holds.map(|h| h.to_string()).unwrap_or_default();
                s += &format!("{},{},{},{},{},{}\n", r.d, r.l, r.predicted, opt(r.measured_lo), opt(r.measured_hi), holds);
            }
            s
        }
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

fn serve_cmd(
    port: u16,
    host: &str,
    static_dir: Option<PathBuf>,
    cors_origins: Vec<String>,
    budget: u64,
) -> Result<Outcome, Error> {
    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| Error::Config(format!("address: {e}")))?;
    let config = cubeslide_server::ServerConfig {
        search_budget: budget,
        cors_origins,
        static_dir,
        ..cubeslide_server::ServerConfig::default()
    };
    cubeslide_server::serve_blocking(addr, config).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Outcome::default())
}
