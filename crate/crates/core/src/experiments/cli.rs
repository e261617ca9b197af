//! The `prevkit` command line.
//!
//! Every long flag may also come from a `--config PATH` file of `key = value`
//! lines (keys are flag names without the dashes, `#` starts a comment).
//! Flags given on the command line take precedence over the file. The seed
//! falls back to `PREVKIT_SEED`, then to [`DEFAULT_SEED`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use super::report::{self, EstimateReport};
use super::svg::{self, LineChart, Series};
use super::{
    population_grid, reference_kits, run_figure1_sweep, run_scenario_detailed, run_table_grid,
    GridConfig, SweepConfig, SweepRow,
};
use crate::error::{Error, Result};
use crate::estimators::{estimate, SampleSummary, TestKit};
use crate::intervals::{credible_misclass, wald_ci};
use crate::sim::ScenarioConfig;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "PREVKIT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "prevkit",
    version,
    about = "Misclassification-aware prevalence estimation and coverage simulations"
)]
struct Cli {
    /// Master seed for all simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications per cell.
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Output file (stdout for `estimate` and `scenario` when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (text for `estimate`, csv elsewhere, when omitted).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate prevalence, standard error and intervals from one sample.
    Estimate {
        /// Sample size.
        #[arg(long)]
        n: u64,
        /// Test-positive count in the sample.
        #[arg(long = "n-pos")]
        n_pos: u64,
        /// Population size.
        #[arg(long = "pop-size")]
        pop_size: u64,
        /// Sensitivity.
        #[arg(long, value_parser = parse_probability)]
        se: f64,
        /// Specificity.
        #[arg(long, value_parser = parse_probability)]
        sp: f64,
        /// Two-sided error rate; intervals have level 1 − alpha.
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
    },
    /// Simulate one scenario cell.
    Scenario {
        /// Population size.
        #[arg(long = "pop-size")]
        pop_size: u64,
        /// True prevalence.
        #[arg(long = "pi-c", value_parser = parse_probability)]
        pi_c: f64,
        /// Sampling rate.
        #[arg(long, value_parser = parse_probability)]
        phi: f64,
        /// Sensitivity.
        #[arg(long, value_parser = parse_probability)]
        se: f64,
        /// Specificity.
        #[arg(long, value_parser = parse_probability)]
        sp: f64,
        /// Two-sided error rate; intervals have level 1 − alpha.
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
        /// Also write every replication to this CSV file.
        #[arg(long = "emit-replications")]
        emit_replications: Option<PathBuf>,
    },
    /// Simulate the full scenario grid (or a subset of it).
    Tables {
        /// Comma-separated population sizes.
        #[arg(long = "pop-sizes", value_delimiter = ',')]
        pop_sizes: Option<Vec<u64>>,
        /// Comma-separated true prevalences.
        #[arg(long, value_delimiter = ',', value_parser = parse_probability)]
        prevalences: Option<Vec<f64>>,
        /// Comma-separated sampling rates.
        #[arg(long, value_delimiter = ',', value_parser = parse_probability)]
        rates: Option<Vec<f64>>,
        /// Two-sided error rate; intervals have level 1 − alpha.
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
    },
    /// Standard-error comparison across population sizes at a fixed sample size.
    Figure1 {
        #[arg(long = "sample-size", default_value_t = 100)]
        sample_size: u64,
        #[arg(long = "pi-c", default_value_t = 0.2, value_parser = parse_probability)]
        pi_c: f64,
        #[arg(long = "n-min", default_value_t = 120)]
        n_min: u64,
        #[arg(long = "n-max", default_value_t = 2000)]
        n_max: u64,
        #[arg(long, default_value_t = 20)]
        step: u64,
        /// Restrict to one kit (requires --sp as well).
        #[arg(long, value_parser = parse_probability, requires = "sp")]
        se: Option<f64>,
        #[arg(long, value_parser = parse_probability, requires = "se")]
        sp: Option<f64>,
        /// Write a line chart of the sweep to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must be a probability in [0, 1], got {v}"))
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code: 0 on success, 2 on configuration errors, 1 on I/O
/// failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            eprintln!(
                "{}",
                text.lines().next().unwrap_or("error: invalid arguments")
            );
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Splices `--key value` pairs from the config file right after the
/// subcommand, skipping keys already given on the command line.
fn merge_config_file(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("--config {}: {e}", path.display())))?;

    let command = Cli::command();
    let sub_names: Vec<String> = command
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let Some(sub_pos) = argv
        .iter()
        .skip(1)
        .position(|a| sub_names.contains(a))
        .map(|p| p + 1)
    else {
        return Ok(argv);
    };
    let sub = command
        .find_subcommand(&argv[sub_pos])
        .expect("subcommand exists");
    let known_here: Vec<String> = command
        .get_arguments()
        .chain(sub.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let known_anywhere: Vec<String> = command
        .get_subcommands()
        .flat_map(|c| c.get_arguments())
        .chain(command.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();

    let mut extra = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
        let key = key.trim_start_matches('-');
        if key == "config" {
            continue;
        }
        if !known_anywhere.iter().any(|k| k == key) {
            return Err(Error::Config(format!(
                "{}:{}: unknown key `{key}`",
                path.display(),
                lineno + 1
            )));
        }
        let flag = format!("--{key}");
        let given = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if known_here.iter().any(|k| k == key) && !given {
            extra.push(flag);
            extra.push(value.to_string());
        }
    }
    let mut merged = argv[..=sub_pos].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[sub_pos + 1..]);
    Ok(merged)
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn kit_from_flags(se: f64, sp: f64) -> Result<TestKit> {
    TestKit::new(se, sp).map_err(|e| Error::Config(format!("--se/--sp: {e}")))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    let job = move || execute(cli);
    match threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?
            .install(job),
        None => job(),
    }
}

fn execute(cli: Cli) -> Result<()> {
    let seed = resolve_seed(cli.seed)?;
    let format = cli.format;
    match cli.command {
        Command::Estimate {
            n,
            n_pos,
            pop_size,
            se,
            sp,
            alpha,
        } => {
            let kit = kit_from_flags(se, sp)?;
            let sample = SampleSummary::new(pop_size, n, n_pos)
                .map_err(|e| Error::Config(format!("--n/--n-pos/--pop-size: {e}")))?;
            let est = estimate(&sample, &kit);
            let wald = wald_ci(est.pi_c_hat, est.se_pi_c, alpha)?;
            let cred = credible_misclass(&sample, &kit, alpha)?;
            let rep = EstimateReport {
                population_size: pop_size,
                n,
                n_pos,
                se,
                sp,
                alpha,
                pi_hat: est.pi_hat,
                pi_c_hat: est.pi_c_hat,
                pi_c_raw: est.pi_c_raw,
                se_pi_c: est.se_pi_c,
                wald_lower: wald.lower,
                wald_upper: wald.upper,
                cred_lower: cred.lower,
                cred_upper: cred.upper,
            };
            let out = open_output(cli.out.as_deref())?;
            match format {
                None => report::write_estimate_text(out, &rep),
                Some(Format::Csv) => report::write_estimate_csv(out, &rep),
                Some(Format::Json) => report::write_estimate_json(out, &rep),
            }
        }
        Command::Scenario {
            pop_size,
            pi_c,
            phi,
            se,
            sp,
            alpha,
            emit_replications,
        } => {
            let cfg = ScenarioConfig {
                population_size: pop_size,
                true_prevalence: pi_c,
                sampling_rate: phi,
                kit: kit_from_flags(se, sp)?,
                replications: cli.reps.unwrap_or(5000),
                alpha,
                seed,
            };
            let (summary, records) = run_scenario_detailed(&cfg)?;
            if let Some(path) = emit_replications {
                report::write_replications(open_output(Some(&path))?, &records)?;
            }
            let out = open_output(cli.out.as_deref())?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => report::write_summaries_csv(out, &[summary]),
                Format::Json => report::write_summaries_json(out, &[summary]),
            }
        }
        Command::Tables {
            pop_sizes,
            prevalences,
            rates,
            alpha,
        } => {
            let mut grid = GridConfig::reference(cli.reps.unwrap_or(5000), seed);
            grid.alpha = alpha;
            if let Some(v) = pop_sizes {
                grid.population_sizes = v;
            }
            if let Some(v) = prevalences {
                grid.prevalences = v;
            }
            if let Some(v) = rates {
                grid.sampling_rates = v;
            }
            let rows = run_table_grid(&grid)?;
            let format = format.unwrap_or(Format::Csv);
            let path = cli.out.unwrap_or_else(|| match format {
                Format::Csv => PathBuf::from("tables.csv"),
                Format::Json => PathBuf::from("tables.json"),
            });
            let out = open_output(Some(&path))?;
            match format {
                Format::Csv => report::write_summaries_csv(out, &rows)?,
                Format::Json => report::write_summaries_json(out, &rows)?,
            }
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        Command::Figure1 {
            sample_size,
            pi_c,
            n_min,
            n_max,
            step,
            se,
            sp,
            svg,
        } => {
            if step == 0 {
                return Err(Error::Config("--step must be positive".into()));
            }
            let kits = match (se, sp) {
                (Some(se), Some(sp)) => vec![kit_from_flags(se, sp)?],
                _ => reference_kits(),
            };
            let sweep = SweepConfig {
                sample_size,
                true_prevalence: pi_c,
                population_sizes: population_grid(n_min, n_max, step),
                kits,
                replications: cli.reps.unwrap_or(20_000),
                seed,
            };
            let rows = run_figure1_sweep(&sweep)?;
            let format = format.unwrap_or(Format::Csv);
            let path = cli.out.unwrap_or_else(|| match format {
                Format::Csv => PathBuf::from("figure1.csv"),
                Format::Json => PathBuf::from("figure1.json"),
            });
            let out = open_output(Some(&path))?;
            match format {
                Format::Csv => report::write_sweep_csv(out, &rows)?,
                Format::Json => report::write_sweep_json(out, &rows)?,
            }
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
            if let Some(svg_path) = svg {
                let doc = svg::render(&sweep_charts(&sweep, &rows));
                std::fs::write(&svg_path, doc)
                    .map_err(|e| Error::Io(format!("{}: {e}", svg_path.display())))?;
                eprintln!("wrote {}", svg_path.display());
            }
            Ok(())
        }
    }
}

/// One panel per kit, four standard-error curves each.
pub fn sweep_charts(sweep: &SweepConfig, rows: &[SweepRow]) -> Vec<LineChart> {
    type Pick = fn(&SweepRow) -> f64;
    let curves: [(&str, &'static str, Option<&'static str>, Pick); 4] = [
        ("MLE_SE (v1)", "black", None, |r| r.se_mle),
        ("MLE_SE_new (v3)", "#1f5fbf", Some("8 4"), |r| r.se_new),
        ("MLE_SE_true (empirical)", "#2a9d3a", Some("4 3"), |r| {
            r.se_empirical
        }),
        ("MLE_SE_fpc (v2)", "#555555", Some("1 3"), |r| r.se_fpc),
    ];
    sweep
        .kits
        .iter()
        .map(|kit| {
            let panel: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.se == kit.sensitivity() && r.sp == kit.specificity())
                .collect();
            LineChart {
                title: format!(
                    "Se = {}, Sp = {} (n = {}, pi_c = {})",
                    kit.sensitivity(),
                    kit.specificity(),
                    sweep.sample_size,
                    sweep.true_prevalence
                ),
                x_label: "population size N".into(),
                y_label: "standard error".into(),
                series: curves
                    .iter()
                    .map(|&(label, color, dash, pick)| Series {
                        label: label.into(),
                        color,
                        dash,
                        points: panel
                            .iter()
                            .map(|r| (r.population_size as f64, pick(r)))
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect()
}
