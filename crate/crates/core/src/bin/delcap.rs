use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deletion_capacity::cli::{
    exit, exit_code, figure_data, gnuplot_script, parse_source, render_table, run_table, BoundsTable, OutputFormat,
};
use deletion_capacity::constants::{compute_constants, DEFAULT_TOLERANCE};
use deletion_capacity::error::{Error, Result};
use deletion_capacity::estimation::{estimate_rate, n_doubling_drift, RateConfig, DEFAULT_SEED};
use deletion_capacity::runstats::{distribution_stats, empirical_run_distribution, DEFAULT_L_CAP};
use deletion_capacity::sources::{sample_sequence, BinarySequence, SourceSpec};
use deletion_capacity::verify::{run_verify, Status, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "delcap", version, about = "Binary deletion channel capacity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the series constants.
    Constants {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value = "json")]
        format: OutputFormat,
    },
    /// C_est next to the best known bounds.
    Table {
        /// Bounds CSV with header `d,lower,upper`; defaults to the shipped table.
        #[arg(long)]
        bounds: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Plot data for C_est and the bounds over a grid of d.
    Figure {
        #[arg(long)]
        bounds: Option<PathBuf>,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value_t = 0.5)]
        d_max: f64,
        /// Write the data here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a gnuplot script that plots the data file.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Monte Carlo information rate of a source through the deletion channel.
    Estimate {
        #[arg(long)]
        d: f64,
        /// bernoulli | markov:<p> | dagger[:<d>] | renewal:<file>
        #[arg(long, default_value = "dagger")]
        source: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 10_000_000)]
        out_bits: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads; 0 picks the number of cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        miller_madow: bool,
        /// Accept Markov sources and report an upper-bound estimate.
        #[arg(long)]
        allow_upper_bound: bool,
        /// Add the finite-block length term H(|Y|)/n to h_out.
        #[arg(long)]
        finite_block: bool,
        /// Also report h_cond(2n) - h_cond(n) on stderr.
        #[arg(long)]
        drift: bool,
    },
    /// Run a verification suite and print a JSON report.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 1_000_000)]
        bits: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 10_000_000)]
        out_bits: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Write a source's run-length distribution in the `l<TAB>prob` format.
    Dist {
        #[arg(long, default_value = "dagger")]
        source: String,
        #[arg(long, default_value_t = 0.05)]
        d: f64,
        /// Print entropy, mean and divergence from the geometric law as JSON instead.
        #[arg(long)]
        stats: bool,
    },
    /// Empirical run statistics of a sampled path or a file of bits.
    Runstats {
        /// File holding a 0/1 string; whitespace is ignored.
        #[arg(long, conflicts_with = "source")]
        input: Option<PathBuf>,
        #[arg(long)]
        source: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        d: f64,
        #[arg(long, default_value_t = 1_000_000)]
        bits: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_L_CAP)]
        l_cap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        // A closed pipe (`delcap dist | head`) is not a failure.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("delcap: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_bounds(path: Option<&PathBuf>) -> Result<BoundsTable> {
    path.map_or_else(|| Ok(BoundsTable::shipped()), |p| BoundsTable::load(p))
}

fn run(command: Command, out: &mut impl Write) -> Result<u8> {
    match command {
        Command::Constants { tol, format } => {
            let c = compute_constants(tol)?;
            match format {
                OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&c)?)?,
                OutputFormat::Csv => {
                    writeln!(out, "name,value")?;
                    for (name, v) in [
                        ("c2", c.c2),
                        ("A1", c.a1),
                        ("A2", c.a2),
                        ("c3", c.c3),
                        ("c4", c.c4),
                        ("c5", c.c5),
                        ("A2_prime", c.a2_prime),
                        ("truncation_error_bound", c.truncation_error_bound),
                    ] {
                        writeln!(out, "{name},{v}")?;
                    }
                }
            }
        }
        Command::Table { bounds, format, tol } => {
            let rows = run_table(&load_bounds(bounds.as_ref())?, &compute_constants(tol)?)?;
            write!(out, "{}", render_table(&rows, format)?)?;
            for r in rows.iter().filter(|r| r.exceeds_upper()) {
                eprintln!("note: C_est({}) = {:.4} exceeds the upper bound {:.4}", r.d, r.c_est, r.upper.unwrap_or(f64::NAN));
            }
        }
        Command::Figure {
            bounds,
            step,
            d_max,
            output,
            gnuplot,
            format,
        } => {
            let rows = figure_data(&load_bounds(bounds.as_ref())?, &compute_constants(DEFAULT_TOLERANCE)?, step, d_max)?;
            let text = render_table(&rows, format)?;
            match &output {
                Some(path) => fs::write(path, text)?,
                None => write!(out, "{text}")?,
            }
            if let Some(script) = gnuplot {
                let data = output.as_ref().map_or("figure.csv".into(), |p| p.display().to_string());
                fs::write(script, gnuplot_script(&data))?;
            }
        }
        Command::Estimate {
            d,
            source,
            n,
            samples,
            out_bits,
            seed,
            threads,
            miller_madow,
            allow_upper_bound,
            finite_block,
            drift,
        } => {
            let spec = parse_source(&source, d)?;
            let cfg = RateConfig {
                n,
                samples,
                out_bits,
                threads,
                seed,
                miller_madow,
                allow_upper_bound,
                finite_block,
            };
            let est = estimate_rate(&spec, d, &cfg)?;
            if allow_upper_bound && matches!(spec, SourceSpec::Markov { .. }) {
                eprintln!("warning: Markov output is not renewal; the rate is an upper-bound estimate");
            }
            writeln!(out, "{}", est.to_json()?)?;
            if drift {
                let dr = n_doubling_drift(&spec, d, n, samples, seed)?;
                eprintln!("n-doubling drift of h_cond: {:+.3e} +- {:.1e}", dr.value, dr.std_err);
            }
        }
        Command::Verify {
            suite,
            bits,
            n,
            samples,
            out_bits,
            seed,
            threads,
        } => {
            let opts = VerifyOptions {
                bits,
                n,
                samples,
                out_bits,
                seed,
                threads,
            };
            let report = run_verify(suite, &opts)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            match report.status {
                Status::Underpowered => eprintln!("warning: budget too small for suite {}; results are underpowered", report.suite),
                Status::Fail => {
                    for c in report.checks.iter().filter(|c| c.status == Status::Fail) {
                        eprintln!("FAIL {}: value {} target {} ({})", c.name, c.value, c.target, c.relation);
                    }
                }
                Status::Pass => {}
            }
            return Ok(report.exit_code());
        }
        Command::Dist { source, d, stats } => {
            let spec = parse_source(&source, d)?;
            let dist = spec
                .renewal_distribution()
                .ok_or_else(|| Error::UnsupportedSource(format!("{} has no i.i.d. run-length law", spec.label())))?;
            if stats {
                writeln!(out, "{}", serde_json::to_string_pretty(&distribution_stats(&dist))?)?;
            } else {
                dist.write(&mut *out)?;
            }
        }
        Command::Runstats {
            input,
            source,
            d,
            bits,
            seed,
            l_cap,
        } => {
            let x = match input {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    let clean: String = text.chars().filter(|c| !c.is_whitespace()).collect();
                    clean.parse::<BinarySequence>().map_err(|e| Error::Parse {
                        line: 1,
                        msg: e.to_string(),
                    })?
                }
                None => sample_sequence(&parse_source(source.as_deref().unwrap_or("bernoulli"), d)?, bits, seed, false)?,
            };
            let stats = empirical_run_distribution(&x, 1, l_cap)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&stats.export())?)?;
        }
    }
    Ok(exit::OK)
}
