//! joinfd: discover functional dependencies holding on joins of CSV tables.
//!
//! Reports are printed to stdout as JSON; diagnostics go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use joinfd::fd::{parse_fd_records, resolve_records, to_records};
use joinfd::fixture::{make_fixture, FixtureProfile};
use joinfd::join::join_schema;
use joinfd::relation::Column;
use joinfd::sample::Grouping;
use joinfd::{
    coverage, discover_chain, discover_fds, load_csv, CsvOptions, Error, Instance, JoinOperator,
    JoinSpec, PipelineConfig, ProvidedFds, SampleConfig, Strategy,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "joinfd", version, about = "Functional dependency discovery over relational joins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover the minimal dependencies of a single table
    Discover {
        /// Table to profile
        #[arg(long)]
        input: PathBuf,
        /// Error bound for approximate dependencies; 0 reports exact ones only
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Discover the dependencies holding on a join without materializing it
    JoinDiscover(JoinDiscoverArgs),
    /// Join coverage of two tables
    Coverage {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Join condition `X=Y,X2=Y2`; a natural join when omitted
        #[arg(long)]
        on: Option<String>,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Closure-aware precision and recall of a candidate set against the truth
    Compare {
        /// Dependency records or a discovery report
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Write a synthetic table pair with planted properties
    Fixture {
        /// Preset name followed by `key=value` overrides, comma separated
        #[arg(long, default_value = "default")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct JoinDiscoverArgs {
    #[arg(long)]
    left: PathBuf,
    /// Right table; repeat for a left-deep chain
    #[arg(long, required = true)]
    right: Vec<PathBuf>,
    /// Join condition per right table, `X=Y,X2=Y2`; natural joins when omitted
    #[arg(long)]
    on: Vec<String>,
    /// inner, lsemi, rsemi, louter, router or fouter
    #[arg(long, default_value = "inner")]
    op: String,
    /// selective, sampling or oracle
    #[arg(long, default_value = "selective")]
    strategy: String,
    /// Join values kept per attribute-value branch when sampling
    #[arg(long, default_value_t = 1)]
    nb: usize,
    /// Highest-cardinality attributes skipped when sampling
    #[arg(long, default_value_t = 0)]
    nv: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// merged or per-branch
    #[arg(long, default_value = "merged")]
    grouping: String,
    /// Precomputed dependencies as `left.json,right.json`
    #[arg(long)]
    afds: Option<String>,
    /// Error bound for approximate input dependencies
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Largest join the oracle strategy may materialize
    #[arg(long, env = "JOINFD_ROW_LIMIT", default_value_t = joinfd::oracle::DEFAULT_ROW_LIMIT)]
    row_limit: u64,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Args)]
struct CsvArgs {
    /// Cell text read as null; repeatable
    #[arg(long = "null-token", default_value = "")]
    null_tokens: Vec<String>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The first line holds data rather than column names
    #[arg(long)]
    no_header: bool,
}

impl CsvArgs {
    fn options(&self) -> Result<CsvOptions, Error> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!("delimiter `{}` is not ASCII", self.delimiter)));
        }
        Ok(CsvOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
            null_tokens: self.null_tokens.clone(),
        })
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::RowLimit { .. } => 3,
        Error::Invariant(_) | Error::PartitionMismatch { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<String, Error> {
    match command {
        Command::Discover { input, epsilon, csv } => {
            let t = load_csv(&input, &csv.options()?)?;
            let (exact, afds) = discover_fds(&t, epsilon)?;
            let names = t.attr_names();
            let approximate: Vec<_> = afds
                .iter()
                .map(|a| joinfd::fd::FdRecord::from_fd(&a.fd, None, a.error, &names))
                .collect();
            pretty(&json!({
                "attributes": names,
                "rows": t.row_count(),
                "fds": to_records(&exact, &names),
                "afds": approximate,
            }))
        }
        Command::JoinDiscover(args) => join_discover(args),
        Command::Coverage { left, right, on, csv } => {
            let opts = csv.options()?;
            let l = load_csv(&left, &opts)?;
            let r = load_csv(&right, &opts)?;
            let spec = build_spec(JoinOperator::Inner, &l, &r, on.as_deref())?;
            let report = coverage(&l, &r, &spec)?;
            pretty(&report)
        }
        Command::Compare { truth, candidate } => {
            let t = parse_fd_records(&read(&truth)?)?;
            let c = parse_fd_records(&read(&candidate)?)?;
            pretty(&joinfd::eval::evaluate_records(&c, &t)?)
        }
        Command::Fixture { profile, seed, out_dir } => {
            let p: FixtureProfile = FixtureProfile::parse(&profile)?;
            let f = make_fixture(&p, seed)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;
            f.left.write_csv(&out_dir.join("left.csv"), b',')?;
            f.right.write_csv(&out_dir.join("right.csv"), b',')?;
            let names = f.left.attr_names();
            let on: Vec<String> = f
                .spec
                .left_on
                .iter()
                .zip(&f.spec.right_on)
                .map(|(&a, &b)| format!("{}={}", f.left.attr_name(a), f.right.attr_name(b)))
                .collect();
            let meta = json!({
                "profile": p.to_string(),
                "seed": seed,
                "op": f.spec.op.as_str(),
                "on": on.join(","),
                "planted": f.planted.map(|fd| fd.display(&names).to_string()),
                "violators": f.violators,
                "epsilon": f.epsilon,
            });
            let text = pretty(&meta)?;
            let path = out_dir.join("fixture.json");
            std::fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
            Ok(text)
        }
    }
}

fn join_discover(args: JoinDiscoverArgs) -> Result<String, Error> {
    let opts = args.csv.options()?;
    let op: JoinOperator = args.op.parse()?;
    let strategy: Strategy = args.strategy.parse()?;
    let grouping = match args.grouping.as_str() {
        "merged" => Grouping::Merged,
        "per-branch" => Grouping::PerBranch,
        other => return Err(Error::Config(format!("unknown grouping `{other}`"))),
    };
    if !args.on.is_empty() && args.on.len() != args.right.len() {
        return Err(Error::InvalidSpec(format!(
            "{} right tables need {} --on conditions, got {}",
            args.right.len(),
            args.right.len(),
            args.on.len()
        )));
    }
    let mut tables = vec![load_csv(&args.left, &opts)?];
    for r in &args.right {
        tables.push(load_csv(r, &opts)?);
    }
    let mut cfg = PipelineConfig {
        strategy,
        epsilon: args.epsilon,
        sample: SampleConfig {
            n_b: args.nb,
            n_v: args.nv,
            seed: args.seed,
            grouping,
        },
        row_limit: args.row_limit,
        ..PipelineConfig::default()
    };
    if let Some(files) = &args.afds {
        let (lf, rf) = files
            .split_once(',')
            .ok_or_else(|| Error::Config("--afds expects `left.json,right.json`".into()))?;
        if tables.len() > 2 {
            return Err(Error::Config("--afds applies to two-table joins only".into()));
        }
        cfg.left_fds = Some(provided(Path::new(lf), &tables[0])?);
        cfg.right_fds = Some(provided(Path::new(rf), &tables[1])?);
    }
    let mut specs = Vec::new();
    let mut acc = tables[0].clone();
    for (i, right) in tables[1..].iter().enumerate() {
        let spec = build_spec(op, &acc, right, args.on.get(i).map(String::as_str))?;
        acc = schema_only(&join_schema(&acc, right, &spec))?;
        specs.push(spec);
    }
    let run = discover_chain(&tables, &specs, &cfg)?;
    for w in &run.report.warnings {
        eprintln!("warning: {w}");
    }
    run.report.to_json()
}

fn build_spec(op: JoinOperator, l: &Instance, r: &Instance, on: Option<&str>) -> Result<JoinSpec, Error> {
    match on {
        Some(on) => JoinSpec::parse_on(op, l, r, on),
        None => JoinSpec::natural(op, l, r),
    }
}

/// An empty instance with the given attribute names, used to resolve join
/// conditions against an intermediate result.
fn schema_only(names: &[String]) -> Result<Instance, Error> {
    let none: [Option<&str>; 0] = [];
    let columns = names.iter().map(|n| Column::encode(n.as_str(), &none)).collect();
    Instance::new("join", columns, 0)
}

fn provided(path: &Path, table: &Instance) -> Result<ProvidedFds, Error> {
    let records = parse_fd_records(&read(path)?)?;
    let (exact, afds) = resolve_records(&records, table)?;
    Ok(ProvidedFds { exact, afds })
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)?)
}
