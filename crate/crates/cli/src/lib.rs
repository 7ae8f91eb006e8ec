//! Command-line frontend for the `hmatch` solver: instance and solution
//! files, a random instance generator, pipeline comparison and timing
//! sweeps.

pub mod bench;
pub mod format;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use hmatch::oracle::DEFAULT_BUDGET;
use hmatch::{generate, solve, verify_certificate, Algorithm, Certificate, GeneratorConfig, Instance, SolveOptions};

use bench::{run_bench, BenchConfig, CSV_HEADER};
use format::{emit_instance, emit_solution, parse_instance, parse_solution, FormatError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// Environment variable overriding the exhaustive-search node budget.
pub const BUDGET_ENV: &str = "HMATCH_ORACLE_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "hmatch", version, about = "Maximum hierarchical b-matching solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance and write the solution
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        /// poly, pseudo, oracle or flow-only
        #[arg(long, default_value = "poly")]
        algo: Algorithm,
        /// Solution file; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recorded in the solution file; every pipeline is deterministic
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check an instance file, and optionally a solution against it
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Generate a random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "0.3")]
        density: f64,
        #[arg(long, default_value = "3")]
        max_b: u64,
        #[arg(long, default_value = "2")]
        max_c: u64,
        /// Levels of non-singleton sets below the root
        #[arg(long, default_value = "3")]
        depth: usize,
        #[arg(long, default_value = "2")]
        branch_min: usize,
        #[arg(long, default_value = "4")]
        branch_max: usize,
        #[arg(long)]
        max_edges: Option<usize>,
        #[arg(long, default_value = "0")]
        seed: u64,
        /// Instance file; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve with several pipelines and check they agree
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "poly,pseudo,oracle")]
        algos: Vec<Algorithm>,
    },
    /// Time a pipeline on generated instances of growing size
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        sizes: Vec<usize>,
        #[arg(long, default_value = "3")]
        trials: usize,
        #[arg(long, default_value = "0.05")]
        density: f64,
        #[arg(long, default_value = "3")]
        max_b: u64,
        #[arg(long, default_value = "2")]
        max_c: u64,
        #[arg(long, default_value = "3")]
        depth: usize,
        #[arg(long, default_value = "1")]
        seed: u64,
        #[arg(long, default_value = "poly")]
        algo: Algorithm,
        /// Fail when the log-log slope of time against n exceeds this
        #[arg(long)]
        max_slope: Option<f64>,
        /// CSV file; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Oracle budget from the environment, or the default.
pub fn oracle_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

fn solve_options() -> SolveOptions {
    SolveOptions {
        oracle_budget: oracle_budget(),
        ..SolveOptions::default()
    }
}

fn format_exit(e: &FormatError) -> i32 {
    if e.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_PARSE
    }
}

fn load_instance(path: &Path, err: &mut dyn Write) -> Result<Instance, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    parse_instance(&text).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        format_exit(&e)
    })
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
            EXIT_PARSE
        }),
        None => out.write_all(text.as_bytes()).map_err(|_| EXIT_PARSE),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_PARSE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve { input, algo, out: path, seed } => cmd_solve(&input, algo, path.as_deref(), seed, out, err),
        Command::Validate { input, solution } => cmd_validate(&input, solution.as_deref(), out, err),
        Command::Gen {
            n,
            density,
            max_b,
            max_c,
            depth,
            branch_min,
            branch_max,
            max_edges,
            seed,
            out: path,
        } => {
            if n == 0 || branch_min < 2 || branch_max < branch_min || !(0.0..=1.0).contains(&density) {
                let _ = writeln!(err, "error: need n >= 1, 2 <= branch-min <= branch-max, 0 <= density <= 1");
                Err(EXIT_INVALID)
            } else {
                let inst = generate(&GeneratorConfig {
                    n,
                    density,
                    max_b,
                    max_c,
                    depth,
                    branching: (branch_min, branch_max),
                    max_edges,
                    seed,
                });
                write_output(path.as_deref(), &emit_instance(&inst), out, err)
            }
        }
        Command::Compare { input, algos } => cmd_compare(&input, &algos, out, err),
        Command::Bench {
            sizes,
            trials,
            density,
            max_b,
            max_c,
            depth,
            seed,
            algo,
            max_slope,
            out: path,
        } => {
            let cfg = BenchConfig {
                sizes,
                trials: trials.max(1),
                density,
                max_b,
                max_c,
                depth,
                seed,
                algo,
                options: solve_options(),
                ..BenchConfig::default()
            };
            cmd_bench(&cfg, max_slope, path.as_deref(), out, err)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_solve(
    input: &Path,
    algo: Algorithm,
    path: Option<&Path>,
    seed: Option<u64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), i32> {
    let inst = load_instance(input, err)?;
    let report = solve(&inst, algo, &solve_options()).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        if e.is_resource_limit() {
            EXIT_LIMIT
        } else {
            EXIT_INVALID
        }
    })?;
    write_output(path, &emit_solution(&inst, &report, seed), out, err)?;
    if path.is_some() {
        let _ = writeln!(out, "size {}", report.cardinality);
    }
    Ok(())
}

fn cmd_validate(input: &Path, solution: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
    let inst = load_instance(input, err)?;
    let _ = writeln!(
        out,
        "valid instance: n={} edges={} sets={}",
        inst.vertex_count(),
        inst.edge_count(),
        inst.set_count()
    );
    let Some(sol_path) = solution else { return Ok(()) };
    let text = fs::read_to_string(sol_path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", sol_path.display());
        EXIT_PARSE
    })?;
    let x = parse_solution(&text).and_then(|f| f.to_hmatching(&inst)).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", sol_path.display());
        format_exit(&e)
    })?;
    match verify_certificate(&inst, &x, oracle_budget()) {
        Certificate::Optimal => {
            let _ = writeln!(out, "solution feasible and optimal (size {})", x.cardinality());
            Ok(())
        }
        Certificate::FeasibleOnly => {
            let _ = writeln!(out, "solution feasible (size {}); optimality not checked", x.cardinality());
            Ok(())
        }
        Certificate::Suboptimal { optimum } => {
            let _ = writeln!(err, "solution feasible but size {} < optimum {optimum}", x.cardinality());
            Err(EXIT_INVALID)
        }
        Certificate::Infeasible(violations) => {
            for v in &violations {
                let _ = writeln!(err, "violation: {v}");
            }
            Err(EXIT_INVALID)
        }
    }
}

fn cmd_compare(input: &Path, algos: &[Algorithm], out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
    let inst = load_instance(input, err)?;
    let opts = solve_options();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = algos
            .iter()
            .map(|&a| {
                let inst = &inst;
                s.spawn(move || solve(inst, a, &opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut sizes = Vec::new();
    let mut limited = false;
    for (algo, r) in algos.iter().zip(&results) {
        match r {
            Ok(rep) => {
                let _ = writeln!(out, "{algo}\t{}\t{}us", rep.cardinality, rep.counters.elapsed_us);
                sizes.push((*algo, rep.cardinality));
            }
            Err(e) => {
                let _ = writeln!(out, "{algo}\t-\t{e}");
                limited |= e.is_resource_limit();
                if !e.is_resource_limit() {
                    return Err(EXIT_INVALID);
                }
            }
        }
    }
    // flow-only is a lower bound, not an exact pipeline.
    let exact: Vec<u64> = sizes.iter().filter(|(a, _)| *a != Algorithm::FlowOnly).map(|&(_, s)| s).collect();
    if exact.windows(2).any(|w| w[0] != w[1]) {
        let _ = writeln!(out, "disagree");
        return Err(EXIT_INVALID);
    }
    let _ = writeln!(out, "agree");
    if limited {
        Err(EXIT_LIMIT)
    } else {
        Ok(())
    }
}

fn cmd_bench(
    cfg: &BenchConfig,
    max_slope: Option<f64>,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), i32> {
    let result = run_bench(cfg).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        if e.is_resource_limit() {
            EXIT_LIMIT
        } else {
            EXIT_INVALID
        }
    })?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &result.rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    let slope = result.slope;
    if let Some(s) = slope {
        csv.push_str(&format!("# slope={s:.3}\n"));
    }
    write_output(path, &csv, out, err)?;
    match (slope, max_slope) {
        (Some(s), Some(limit)) if s > limit => {
            let _ = writeln!(err, "slope {s:.3} exceeds {limit}");
            Err(EXIT_INVALID)
        }
        _ => Ok(()),
    }
}
