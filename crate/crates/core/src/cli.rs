//! Command-line front end. Every run echoes its resolved configuration as
//! `#` lines so outputs can be regenerated from their own headers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config_model::{sample_regular_switching, sample_simple_regular, Uniformity};
use crate::error::Error;
use crate::graph::{fixtures, format_graph, load_graph, DirectedEdgeSpace, RegularGraph};
use crate::mixing::{
    format_sig17, mixing_time, projected_nbrw_profile, worst_case_profile, write_profile_csv, MixingProfile,
    StartPolicy, DEFAULT_SAMPLE_STARTS, DEFAULT_WORK_BUDGET,
};
use crate::monte_carlo::distance_speed_profile;
use crate::theory::{large_d_predictions, nbrw_bounds, srw_prediction, COINCIDE_THRESHOLD};
use crate::verify::{fixture_report, exact_checks, lemma_suite, ExactOptions, LemmaOptions};
use crate::walk::Kernel;

#[derive(Parser, Debug)]
#[command(name = "rrg-cutoff", version, about = "Random regular graphs and exact random-walk mixing profiles")]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a d-regular graph and write it to a file.
    Gen(GenArgs),
    /// Worst-case total-variation profile as CSV.
    Profile(ProfileArgs),
    /// Mixing times at the given levels.
    Tmix(TmixArgs),
    /// Theoretical predictions.
    Predict(PredictArgs),
    /// Exact identities and lemma checks.
    Verify(VerifyArgs),
    /// Distance of the simple walk from its start, as CSV.
    BdSpeed(BdSpeedArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(short = 'n', long)]
    n: usize,
    #[arg(short = 'd', long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(short = 'o', long)]
    output: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    max_attempts: u64,
    /// Repair a single pairing by switchings (approximately uniform).
    #[arg(long)]
    approx: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Walk {
    Srw,
    Lazy,
    Nbrw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Starts {
    All,
    Sample(usize),
    Single(usize),
}

impl std::fmt::Display for Starts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::All => write!(f, "all"),
            Self::Sample(m) => write!(f, "sample:{m}"),
            Self::Single(x) => write!(f, "single:{x}"),
        }
    }
}

impl FromStr for Starts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| v.parse::<usize>().map_err(|e| format!("{s}: {e}"));
        match s.split_once(':') {
            None if s == "all" => Ok(Self::All),
            Some(("sample", m)) => Ok(Self::Sample(parse(m)?)),
            Some(("single", x)) => Ok(Self::Single(parse(x)?)),
            _ => Err(format!("expected all, sample:m or single:x, got {s}")),
        }
    }
}

#[derive(Args, Debug)]
struct WalkArgs {
    #[arg(long, value_enum)]
    walk: Walk,
    #[arg(short = 'g', long)]
    graph: PathBuf,
    #[arg(long, default_value_t = Starts::Sample(DEFAULT_SAMPLE_STARTS))]
    starts: Starts,
    #[arg(long)]
    tmax: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    budget: f64,
    /// Measure the non-backtracking walk on the vertex it sits at.
    #[arg(long)]
    project: bool,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TmixArgs {
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.25")]
    eps: Vec<f64>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long, group = "model")]
    srw: bool,
    #[arg(long, group = "model")]
    nbrw: bool,
    #[arg(long, group = "model")]
    large_d: bool,
    #[arg(short = 'n', long)]
    n: u128,
    #[arg(short = 'd', long)]
    d: usize,
    /// Level for the non-backtracking bounds.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Level for the simple-walk mixing time.
    #[arg(short = 's', long, default_value_t = 0.25)]
    s: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(short = 'g', long, conflicts_with_all = ["fixtures", "n"])]
    graph: Option<PathBuf>,
    /// Run on K4, K3,3 and the Petersen graph.
    #[arg(long)]
    fixtures: bool,
    #[arg(short = 'n', long, requires = "seed")]
    n: Option<usize>,
    #[arg(short = 'd', long, default_value_t = 3)]
    d: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Graphs sampled for the tree-excess check.
    #[arg(long, default_value_t = 20)]
    graphs: usize,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args, Debug)]
struct BdSpeedArgs {
    #[arg(short = 'g', long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(short = 'c', long, value_delimiter = ',', default_value = "0.5,1,1.5,2,3,4,6,9")]
    c: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

/// A failed run: exit code 1 for invalid requests, 2 for runtime failures.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OddProduct { .. }
            | Error::DegreeTooSmall(_)
            | Error::BadDegree { .. }
            | Error::InvalidTrials
            | Error::IndexOutOfRange { .. }
            | Error::BudgetExceeded { .. }
            | Error::BadLevel(_)
            | Error::BadEpsilon(_) => 1,
            _ => 2,
        };
        let mut message = e.to_string();
        if let Error::BudgetExceeded { .. } = e {
            message.push_str(" (try --starts sample:m)");
        }
        Self { code, message }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(Failure::invalid("--threads must be positive")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure {
                code: 2,
                message: e.to_string(),
            }),
        },
        None => dispatch(&cli.command),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Gen(a) => gen(a),
        Command::Profile(a) => profile(a),
        Command::Tmix(a) => tmix(a),
        Command::Predict(a) => predict(a),
        Command::Verify(a) => verify(a),
        Command::BdSpeed(a) => bd_speed(a),
    }
}

fn open_output(path: Option<&Path>) -> std::result::Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen(a: &GenArgs) -> Outcome {
    let sampled = if a.approx {
        sample_regular_switching(a.n, a.d, a.seed)?
    } else {
        sample_simple_regular(a.n, a.d, a.seed, a.max_attempts)?
    };
    let uniformity = match sampled.uniformity {
        Uniformity::Exact => "exact".to_string(),
        Uniformity::Approximate { switchings } => format!("approximate switchings={switchings}"),
    };
    let comments = vec![
        format!("gen n={} d={} seed={} max_attempts={} approx={}", a.n, a.d, a.seed, a.max_attempts, a.approx),
        format!("attempts={} uniformity={uniformity}", sampled.attempts),
    ];
    let mut out = open_output(Some(&a.output))?;
    out.write_all(format_graph(&sampled.graph, &comments).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn compute_profile(a: &WalkArgs, g: &RegularGraph) -> std::result::Result<MixingProfile, Failure> {
    let policy = match a.starts {
        Starts::All => StartPolicy::All,
        Starts::Single(x) => StartPolicy::Single(x),
        Starts::Sample(count) => {
            let seed = a.seed.ok_or_else(|| Failure::invalid("--starts sample:m requires --seed"))?;
            StartPolicy::Sample { count, seed }
        }
    };
    if a.project && a.walk != Walk::Nbrw {
        return Err(Failure::invalid("--project applies only to --walk nbrw"));
    }
    let es = DirectedEdgeSpace::new(g);
    let kernel = match a.walk {
        Walk::Srw => Kernel::Srw(g),
        Walk::Lazy => Kernel::Lazy(g),
        Walk::Nbrw => Kernel::Nbrw(&es),
    };
    Ok(if a.project {
        projected_nbrw_profile(&es, policy, a.tmax, a.budget)?
    } else {
        worst_case_profile(kernel, policy, a.tmax, a.budget)?
    })
}

fn walk_metadata(command: &str, a: &WalkArgs, g: &RegularGraph) -> Vec<(String, String)> {
    vec![
        ("command".into(), command.into()),
        ("graph".into(), a.graph.display().to_string()),
        ("n".into(), g.n().to_string()),
        ("d".into(), g.d().to_string()),
        ("starts".into(), a.starts.to_string()),
        ("tmax".into(), a.tmax.to_string()),
        ("seed".into(), a.seed.map_or("none".into(), |s| s.to_string())),
        ("budget".into(), format!("{:e}", a.budget)),
    ]
}

fn profile(a: &ProfileArgs) -> Outcome {
    let g = load_graph(&a.walk.graph)?;
    let p = compute_profile(&a.walk, &g)?;
    let mut out = open_output(a.output.as_deref())?;
    write_profile_csv(&mut out, &p, &walk_metadata("profile", &a.walk, &g))?;
    out.flush()?;
    Ok(())
}

fn tmix(a: &TmixArgs) -> Outcome {
    if let Some(&e) = a.eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::BadLevel(e).into());
    }
    let g = load_graph(&a.walk.graph)?;
    let p = compute_profile(&a.walk, &g)?;
    let mut out = io::stdout().lock();
    for (k, v) in walk_metadata("tmix", &a.walk, &g) {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# walk={} exactness={}", p.kind, if p.exact { "exact" } else { "lower_bound" })?;
    writeln!(out, "{:<10}  {:>6}", "eps", "t_mix")?;
    for &e in &a.eps {
        writeln!(out, "{:<10}  {:>6}", e, mixing_time(&p, e).to_string())?;
    }
    Ok(())
}

fn predict(a: &PredictArgs) -> Outcome {
    let mut out = io::stdout().lock();
    let small_n = || usize::try_from(a.n).map_err(|_| Failure::invalid(format!("n = {} is too large for this model", a.n)));
    if a.nbrw {
        let b = nbrw_bounds(small_n()?, a.d, a.eps)?;
        writeln!(out, "# predict nbrw n={} d={} eps={}", a.n, a.d, a.eps)?;
        writeln!(out, "lower {} upper {}", b.lower, b.upper)?;
        writeln!(out, "{:<26}  {}", "ceil log_{d-1}(dn)", b.log_dn)?;
        writeln!(out, "{:<26}  {}", "ceil log_{d-1}(1/eps)", b.log_inv_eps)?;
    } else if a.large_d {
        let p = large_d_predictions(a.n, a.d)?;
        writeln!(out, "# predict large-d n={} d={}", a.n, a.d)?;
        writeln!(out, "{:<16}  {{{}, {}}}", "nbrw t_mix", p.tmix_set[0], p.tmix_set[1])?;
        writeln!(out, "{:<16}  {}", "srw window", format_sig17(p.srw_window))?;
        writeln!(out, "{:<16}  {}", "coincide ratio", format_sig17(p.coincide_ratio))?;
        writeln!(
            out,
            "{:<16}  {} (d*log2(log2 n)/log2 n >= {COINCIDE_THRESHOLD})",
            "coincide", p.coincide
        )?;
    } else if a.srw {
        let p = srw_prediction(small_n()?, a.d, a.s)?;
        writeln!(out, "# predict srw n={} d={} s={}", a.n, a.d, a.s)?;
        writeln!(out, "{:<16}  {}", "cutoff point", format_sig17(p.cutoff_point))?;
        writeln!(out, "{:<16}  {}", "t_mix(s)", format_sig17(p.tmix_estimate))?;
        writeln!(out, "{:<16}  {}", "window scale", format_sig17(p.window_scale))?;
        writeln!(out, "{:<16}  {}", "lambda", format_sig17(p.lambda))?;
    } else {
        return Err(Failure::invalid("choose one of --srw, --nbrw, --large-d"));
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> Outcome {
    let seed = a.seed.unwrap_or(0);
    let report = if a.fixtures {
        fixture_report(
            &[("K4", fixtures::k4()), ("K33", fixtures::k33()), ("Petersen", fixtures::petersen())],
            seed,
        )?
    } else if let Some(path) = &a.graph {
        let g = load_graph(path)?;
        exact_checks(&g, &path.display().to_string(), &ExactOptions::for_graph(&g, seed))?
    } else if let Some(n) = a.n {
        let mut opts = LemmaOptions::new(n, a.d, seed);
        opts.graphs = a.graphs;
        opts.trials = a.trials;
        lemma_suite(&opts)?
    } else {
        return Err(Failure::invalid("give --fixtures, -g FILE or -n N --seed S"));
    };
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "# verify fixtures={} graph={} n={} d={} seed={} graphs={} trials={}",
        a.fixtures,
        a.graph.as_ref().map_or("none".into(), |p| p.display().to_string()),
        a.n.map_or("none".into(), |n| n.to_string()),
        a.d,
        seed,
        a.graphs,
        a.trials
    )?;
    out.write_all(report.render().as_bytes())?;
    if report.hard_failures() > 0 {
        return Err(Failure {
            code: 2,
            message: format!("{} hard failures", report.hard_failures()),
        });
    }
    Ok(())
}

fn bd_speed(a: &BdSpeedArgs) -> Outcome {
    let g = load_graph(&a.graph)?;
    let points = distance_speed_profile(&g, a.start, &a.c, a.trials, a.seed)?;
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "# command=bd-speed")?;
    writeln!(out, "# graph={}", a.graph.display())?;
    writeln!(out, "# n={} d={} start={} trials={} seed={}", g.n(), g.d(), a.start, a.trials, a.seed)?;
    writeln!(out, "c,t,mean,std_error,predicted")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_sig17(p.c),
            p.t,
            format_sig17(p.mean),
            format_sig17(p.std_error),
            format_sig17(p.predicted)
        )?;
    }
    out.flush()?;
    Ok(())
}
