use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use qrdm_core::{Algorithm, DenseMatrix, DmParams, StopCriterion};
use qrdm_harness::config::{parse_stop, Input};
use qrdm_harness::mm::write_matrix_market;
use qrdm_harness::report::{self, CompareOptions};
use qrdm_harness::suite;

#[derive(Parser)]
#[command(name = "qrdm", version, about = "Pivoted QR experiments: QRP, QRDM and QRDM2")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor one matrix and print its report row.
    Factor {
        /// MatrixMarket file or generator spec (identity:N, kahan:N:C, random:M:N:R:GAP).
        input: String,
        #[arg(long, default_value = "qrdm2")]
        algo: Algorithm,
        #[command(flatten)]
        common: Common,
    },
    /// Compare algorithms over a set of matrices.
    Compare {
        inputs: Vec<String>,
        /// Use the committed fixture suite (in addition to any inputs).
        #[arg(long)]
        suite: bool,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_value = "qrp,qrdm,qrdm2")]
        algo: Vec<Algorithm>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep QRDM2 over a (tau, delta) grid.
    Sweep {
        inputs: Vec<String>,
        #[arg(long)]
        suite: bool,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0:1:0.05")]
        taus: String,
        #[arg(long, default_value = "0:1:0.05")]
        deltas: String,
        #[arg(long, default_value_t = 64)]
        kdm: usize,
        #[arg(long, default_value = "n", value_parser = parse_stop)]
        stop: StopCriterion,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Oracle rank threshold relative to sigma_1 (default eps * n).
        #[arg(long)]
        rank_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated matrix, or the whole fixture suite, as MatrixMarket.
    Gen {
        /// Generator spec; omit with --suite.
        spec: Option<String>,
        #[arg(long)]
        suite: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file, or directory with --suite.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0.15)]
    tau: f64,
    #[arg(long, default_value_t = 0.9)]
    delta: f64,
    #[arg(long, default_value_t = 64)]
    kdm: usize,
    /// Stopping criterion: n, sqrt-n or none.
    #[arg(long, default_value = "n", value_parser = parse_stop)]
    stop: StopCriterion,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle rank threshold relative to sigma_1 (default eps * n).
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn params(&self) -> anyhow::Result<DmParams> {
        Ok(DmParams::new(self.tau, self.delta, self.kdm)?)
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_inputs(inputs: &[String], use_suite: bool, seed: u64) -> anyhow::Result<Vec<(String, DenseMatrix)>> {
    let mut out = Vec::new();
    if use_suite {
        for (f, a) in suite::load_suite(&suite::fixture_dir())? {
            out.push((f.id, a));
        }
    }
    for s in inputs {
        let input = Input::parse(s)?;
        out.push((input.label(), input.load(seed)?));
    }
    if out.is_empty() {
        bail!("no input matrices given");
    }
    Ok(out)
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step): (f64, f64, f64) = (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
        if !(step > 0.0) || stop < start {
            bail!("bad grid range {s:?}");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // multiply rather than accumulate so grid points are exact multiples
        return Ok((0..=count).map(|i| (start + i as f64 * step).min(stop)).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad grid value {x:?}")))
        .collect()
}

/// Exit status 2 signals an oracle failure in a requested check.
fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Command::Factor { input, algo, common } => {
            let params = common.params()?;
            let mats = load_inputs(&[input], false, common.seed)?;
            let opts = CompareOptions {
                algos: vec![algo],
                params,
                stop: common.stop,
                jobs: Some(1),
                rank_tol: common.rank_tol,
            };
            let rows = report::compare_run(&mats, &opts)?;
            report::write_csv(&rows, sink(&common.out)?)?;
            Ok(if rows.iter().any(|r| r.oracle_failed()) { 2 } else { 0 })
        }
        Command::Compare {
            inputs,
            suite,
            algo,
            jobs,
            common,
        } => {
            let params = common.params()?;
            let mats = load_inputs(&inputs, suite, common.seed)?;
            let opts = CompareOptions {
                algos: algo,
                params,
                stop: common.stop,
                jobs,
                rank_tol: common.rank_tol,
            };
            let rows = report::compare_run(&mats, &opts)?;
            report::write_csv(&rows, sink(&common.out)?)?;
            let failed = rows.iter().filter(|r| r.oracle_failed()).count();
            if failed > 0 {
                eprintln!("oracle failed on {failed} row(s)");
                return Ok(2);
            }
            Ok(0)
        }
        Command::Sweep {
            inputs,
            suite,
            taus,
            deltas,
            kdm,
            stop,
            seed,
            rank_tol,
            out,
        } => {
            let mats = load_inputs(&inputs, suite, seed)?;
            let rows = report::grid_sweep(&mats, &parse_grid(&taus)?, &parse_grid(&deltas)?, kdm, stop, rank_tol)?;
            report::write_sweep_csv(&rows, sink(&out)?)?;
            Ok(if rows.iter().any(|r| r.min_ratio.is_none()) { 2 } else { 0 })
        }
        Command::Gen { spec, suite, seed, out } => {
            match (spec, suite) {
                (None, true) => {
                    let written = suite::write_suite(&out)?;
                    eprintln!("wrote {} fixtures to {}", written.len(), out.display());
                }
                (Some(spec), false) => {
                    let Input::Gen(g) = Input::parse(&spec)? else {
                        bail!("{spec:?} is not a generator spec");
                    };
                    write_matrix_market(&g.generate(seed)?, &out)
                        .with_context(|| format!("writing {}", out.display()))?;
                }
                _ => bail!("give either a generator spec or --suite"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
