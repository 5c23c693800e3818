mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abelcount_core::brauer::Place;
use abelcount_core::census::{census, geometric_checkpoints, CensusConfig, DEFAULT_CHECKPOINT_FLOOR};
use abelcount_core::constant::{
    leading_constant, parse_local_conditions, LocalConditions, DEFAULT_CONSTANT_PRIME_CUTOFF,
};
use abelcount_core::exponent::{varpi_disjoint, varpi_mean, varpi_sots_closed_form, varpi_subgroup_scan, Rationals};
use abelcount_core::fit::{checkpoints_from_records, fit_exponent};
use abelcount_core::local::{
    hom_count_residue_identity, is_locally_trivial, local_ft_bruteforce, local_ft_exact, local_ft_tame, LocalSpot,
    LocalTensorClass,
};
use abelcount_core::report::{
    read_census_csv, replay, run_census, write_checkpoint_series, write_json, CsvRecordWriter, RunManifest,
};
use abelcount_core::witness::{find_witness_sots, find_witness_split, verify_witness, WitnessSearch};
use abelcount_core::{
    arith, poisson_check, Error, FactorizationTable, FiniteAbelianGroup, FrobenianFunction, FunctionSpec,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const FUNCTION_HELP: &str = "\
Function specs:
  one                 the constant function 1
  sots                1 on sums of two squares, 0 elsewhere
  congruence:a,q      1 on prime powers p^j with p = a mod q
  split:q,h1+h2+...   1 on prime powers p^j with p mod q in {h1, h2, ...}
  divisor             the number of divisors

Groups are lists of cyclic orders, e.g. 2 or 4,2 or 2,2,2.

Every flag can also be set in a file passed with --config (lines of
`key = value`). ABELCOUNT_WORKERS and ABELCOUNT_MEMORY_MB override the file.

Exit codes: 0 success, 2 invalid input, 3 resource limit, 4 identity check failed.";

#[derive(Parser)]
#[command(name = "abelcount", version, about = "Count abelian extensions of Q by conductor with frobenian weights", after_help = FUNCTION_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Problem {
    /// Cyclic orders of the Galois group.
    #[arg(long, default_value = "2")]
    group: FiniteAbelianGroup,
    /// Weight function.
    #[arg(long, default_value = "one")]
    function: FunctionSpec,
}

#[derive(Args)]
struct Resources {
    #[arg(long, env = "ABELCOUNT_WORKERS", default_value_t = default_workers())]
    workers: usize,
    /// Memory budget for the factorization table.
    #[arg(long = "memory-mb", env = "ABELCOUNT_MEMORY_MB", default_value_t = 1024)]
    memory_mb: u64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl Resources {
    fn table(&self, bound: u64) -> Result<FactorizationTable, Failure> {
        Ok(FactorizationTable::with_budget(bound.max(2), self.memory_mb.saturating_mul(1 << 20))?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Count surjections (Z/m)^* -> G of exact conductor m for m up to a bound.
    Census {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        resources: Resources,
        #[arg(long)]
        bound: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary destination; stderr when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Run manifest destination.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Checkpoint series (CSV) destination.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CHECKPOINT_FLOOR)]
        checkpoint_floor: u64,
    },
    /// The log-power exponent by every applicable route.
    Exponent {
        #[command(flatten)]
        problem: Problem,
        /// Also report the exponent of every subgroup.
        #[arg(long)]
        scan: bool,
    },
    /// The leading constant of the counting function.
    Constant {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        resources: Resources,
        #[arg(long, default_value_t = DEFAULT_CONSTANT_PRIME_CUTOFF)]
        prime_cutoff: u64,
        /// Allowed conductor exponents at primes of S, e.g. `2:0+2,3:1`.
        #[arg(long)]
        local: Option<String>,
    },
    /// Compare the conductor series with the sum of global transforms.
    PoissonCheck {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        resources: Resources,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        /// Conductor bound for the series side.
        #[arg(long, default_value_t = 1_000_000)]
        bound: u64,
        /// Prime cutoff for the Euler products.
        #[arg(long, default_value_t = 1_000_000)]
        primes: u64,
    },
    /// Check the tame local transform against brute force at small primes.
    LocalCheck {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 100)]
        max_prime: u64,
    },
    /// Smallest conductor of a G-extension that is a sum of two squares.
    WitnessSots {
        #[arg(long, default_value = "2")]
        group: FiniteAbelianGroup,
        #[command(flatten)]
        resources: Resources,
        #[arg(long, default_value_t = 100)]
        bound: u64,
    },
    /// Smallest conductor of a G-extension whose ramified primes split in a field.
    WitnessSplit {
        #[arg(long, default_value = "2")]
        group: FiniteAbelianGroup,
        /// The field, as a split:q,h1+... function.
        #[arg(long, default_value = "split:4,1")]
        field: FunctionSpec,
        #[command(flatten)]
        resources: Resources,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
    },
    /// Fit the exponent of log B from census checkpoints.
    Fit {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        resources: Resources,
        /// Largest checkpoint; defaults to the last conductor in the input.
        #[arg(long)]
        bound: Option<u64>,
        /// Census CSV to read instead of running a census.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CHECKPOINT_FLOOR)]
        checkpoint_floor: u64,
    },
    /// Replay a run manifest, check its digest and write all report files.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        resources: Resources,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Resource(String),
    Identity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Identity(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource(_) | Error::GroupTooLarge { .. } | Error::Io(_) => Failure::Resource(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Resource(e.to_string())
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(config::ConfigError(e)) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Validation(msg) | Failure::Resource(msg) | Failure::Identity(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

fn function(spec: &FunctionSpec) -> Result<FrobenianFunction, Failure> {
    Ok(FrobenianFunction::builtin(spec)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    drop(write_json(value, io::stdout().lock())?);
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Resource(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Census { problem, resources, bound, out, summary, manifest, series, checkpoint_floor } => {
            let f = function(&problem.function)?;
            let table = resources.table(bound)?;
            let config = CensusConfig {
                group: &problem.group,
                function: &f,
                bound,
                workers: resources.workers,
                checkpoints: geometric_checkpoints(bound, checkpoint_floor),
            };
            let (summary_value, manifest_value) = if manifest.is_some() {
                let run = run_census(&config, &table)?;
                match &out {
                    Some(path) => create(path)?.write_all(&run.csv)?,
                    None => io::stdout().lock().write_all(&run.csv)?,
                }
                (run.summary, Some(run.manifest))
            } else {
                let sink: Box<dyn Write> = match &out {
                    Some(path) => Box::new(create(path)?),
                    None => Box::new(BufWriter::new(io::stdout().lock())),
                };
                let mut writer = CsvRecordWriter::new(sink)?;
                let s = census(&config, &table, |r| writer.write(r))?;
                writer.finish()?.flush()?;
                (s, None)
            };
            match &summary {
                Some(path) => drop(write_json(&summary_value, create(path)?)?),
                None => drop(write_json(&summary_value, io::stderr().lock())?),
            }
            if let (Some(path), Some(m)) = (&manifest, &manifest_value) {
                write_json(m, create(path)?)?;
            }
            if let Some(path) = &series {
                write_checkpoint_series(&summary_value.checkpoints, create(path)?)?;
            }
            Ok(())
        }
        Command::Exponent { problem, scan } => {
            let f = function(&problem.function)?;
            let g = &problem.group;
            let mean = varpi_mean(g, &f, &Rationals)?;
            let disjoint = varpi_disjoint(g, &f, &Rationals);
            let closed =
                (problem.function == FunctionSpec::SumOfTwoSquares).then(|| varpi_sots_closed_form(g, &Rationals));
            let scan = if scan { Some(varpi_subgroup_scan(g, &f, &Rationals)?) } else { None };
            let agree = closed.as_ref().is_none_or(|c| c.value == mean.value)
                && (!disjoint.disjointness_ok || disjoint.value == mean.value);
            print_json(&json!({
                "group": g.to_string(),
                "function": problem.function.to_string(),
                "mean": mean,
                "sots_closed_form": closed,
                "disjoint": disjoint,
                "routes_agree": agree,
                "subgroups": scan,
            }))?;
            if agree {
                Ok(())
            } else {
                Err(Failure::Identity("exponent routes disagree".into()))
            }
        }
        Command::Constant { problem, resources, prime_cutoff, local } => {
            let f = function(&problem.function)?;
            let conditions = match &local {
                Some(text) => parse_local_conditions(text)?,
                None => LocalConditions::new(),
            };
            let table = resources.table(prime_cutoff)?;
            let report = leading_constant(&problem.group, &f, &conditions, prime_cutoff, &table)?;
            if report.interval_flag {
                eprintln!("warning: unresolved classes could change the constant; see c_with_unresolved");
            }
            print_json(&report)
        }
        Command::PoissonCheck { problem, resources, s, bound, primes } => {
            let f = function(&problem.function)?;
            let table = resources.table(bound.max(primes))?;
            let report = poisson_check(&problem.group, &f, s, bound, primes, &table)?;
            print_json(&report)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Identity(format!("|LHS - RHS| = {:e} exceeds the tail bounds", report.difference)))
            }
        }
        Command::LocalCheck { problem, max_prime } => local_check(&problem, max_prime),
        Command::WitnessSots { group, resources, bound } => {
            let table = resources.table(bound)?;
            let search = find_witness_sots(&group, bound, &table)?;
            report_witness(&group, search)
        }
        Command::WitnessSplit { group, field, resources, bound } => {
            let table = resources.table(bound)?;
            let search = find_witness_split(&group, &field, bound, &table)?;
            report_witness(&group, search)
        }
        Command::Fit { problem, resources, bound, input, checkpoint_floor } => {
            let f = function(&problem.function)?;
            let predicted = varpi_mean(&problem.group, &f, &Rationals)?.value;
            let checkpoints = match &input {
                Some(path) => {
                    let file = File::open(path).map_err(|e| Failure::Resource(format!("{}: {e}", path.display())))?;
                    let records = read_census_csv(file)?;
                    let top = bound.or(records.last().map(|r| r.m)).unwrap_or(0);
                    checkpoints_from_records(&records, &geometric_checkpoints(top, checkpoint_floor))
                }
                None => {
                    let bound = bound.ok_or_else(|| Failure::Validation("--bound or --input is required".into()))?;
                    let table = resources.table(bound)?;
                    let config = CensusConfig {
                        group: &problem.group,
                        function: &f,
                        bound,
                        workers: resources.workers,
                        checkpoints: geometric_checkpoints(bound, checkpoint_floor),
                    };
                    census(&config, &table, |_| Ok(()))?.checkpoints
                }
            };
            print_json(&fit_exponent(&checkpoints, predicted)?)
        }
        Command::Report { manifest, resources, out_dir } => {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| Failure::Resource(format!("{}: {e}", manifest.display())))?;
            let m: RunManifest =
                serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("manifest: {e}")))?;
            let table = resources.table(m.bound)?;
            let run = replay(&m, &table)?;
            std::fs::create_dir_all(&out_dir)?;
            create(&out_dir.join("census.csv"))?.write_all(&run.csv)?;
            write_json(&run.summary, create(&out_dir.join("summary.json"))?)?;
            write_checkpoint_series(&run.summary.checkpoints, create(&out_dir.join("checkpoints.csv"))?)?;
            let matches = run.manifest.digest == m.digest;
            print_json(&json!({ "expected": m.digest, "reproduced": run.manifest.digest, "matches": matches }))?;
            if matches {
                Ok(())
            } else {
                Err(Failure::Identity("replayed census does not reproduce the manifest digest".into()))
            }
        }
    }
}

fn report_witness(group: &FiniteAbelianGroup, search: WitnessSearch) -> Result<(), Failure> {
    let verified = match &search.witness {
        Some(w) => verify_witness(group, w).map_err(|e| Failure::Identity(e.to_string())).map(|_| true)?,
        None => false,
    };
    print_json(&json!({ "search": search, "verified": verified }))
}

fn local_check(problem: &Problem, max_prime: u64) -> Result<(), Failure> {
    let g = &problem.group;
    let f = function(&problem.function)?;
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for p in (2..=max_prime).filter(|&p| arith::is_prime(p) && !g.order().is_multiple_of(p) && !f.is_exceptional(p)) {
        if !hom_count_residue_identity(p, g)? {
            failures.push(format!("p={p}: hom count identity"));
        }
        let spot = LocalSpot::for_group(Place::Prime(p), g);
        let mut seen = [false, false];
        for u in 1..p {
            let mut x = LocalTensorClass::trivial(spot, g);
            for c in &mut x.components {
                c.unit = u % spot.modulus();
            }
            let trivial = is_locally_trivial(spot, g, &x)?;
            if std::mem::replace(&mut seen[trivial as usize], true) {
                continue;
            }
            let tame = local_ft_tame(p, g, &f, trivial)?;
            let exact = local_ft_exact(spot, g, &f, &x, None)?;
            for s in [1.0, 2.0, 3.0] {
                let brute = local_ft_bruteforce(spot, g, &f, &x, s)?;
                let (a, b) = (exact.eval(s), tame.eval(s));
                if (a - b).abs() > 1e-12 || (brute - b).abs() > 1e-12 * brute.abs().max(1.0) {
                    failures.push(format!("p={p} u={u} s={s}: closed form {b}, exact {a}, brute force {brute}"));
                }
            }
            checked += 1;
        }
    }
    print_json(&json!({
        "group": g.to_string(),
        "function": problem.function.to_string(),
        "max_prime": max_prime,
        "classes_checked": checked,
        "failures": failures,
    }))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Identity(format!("{} local identity failures", failures.len())))
    }
}
