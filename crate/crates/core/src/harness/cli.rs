//! The `fkmoments` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::ahe::{find_heavy, find_heavy_one_pass, AheConfig};
use crate::harness::config::ParamOverrides;
use crate::harness::report::RunReport;
use crate::harness::validate::{run_suite, Suite};
use crate::martingale::{build_schedule, estimate_fk, EstimateOptions, HeavyProvider, Schedule};
use crate::oracle::exact_moments;
use crate::stream::{gen_planted, gen_uniform, gen_zipf, read_stream, write_binary, write_text, Stream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SUITE_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fkmoments",
    version,
    about = "Frequency-moment sketches and heavy-element finders"
)]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Planted,
    Zipf,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Oracle,
    /// Three-pass finder per level.
    Ahe,
    /// One-pass finder per level; frequencies are approximate.
    Ahe1p,
}

#[derive(Debug, clap::Args)]
pub struct HeavyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 4)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a stream file.
    Gen {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long)]
        n: u64,
        /// Stream length (planted streams have length n).
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value_t = 4)]
        k: u32,
        /// Planted frequency is ceil(c n^(1/k)).
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        /// Zipf exponent.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact moments of a stream.
    Exact {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: u32,
    },
    /// Three-pass heavy-element finder.
    Heavy(HeavyArgs),
    /// One-pass heavy-element finder.
    Heavy1p(HeavyArgs),
    /// Estimate F_k.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// Heavy sets from the exact oracle, the three-pass finder or the
        /// one-pass finder
        #[arg(long, value_enum, default_value_t = Mode::Oracle)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Level count.
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Run a validation suite.
    Validate {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

fn load_stream(path: &Path) -> Result<Stream, Failure> {
    read_stream(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_overrides(path: Option<&Path>) -> Result<ParamOverrides, Failure> {
    path.map(ParamOverrides::load)
        .transpose()
        .map(Option::unwrap_or_default)
        .map_err(usage)
}

fn heavy_config(a: &HeavyArgs) -> Result<AheConfig, Failure> {
    let mut cfg = AheConfig {
        rho: a.rho,
        delta: a.delta,
        k: a.k,
        seed: a.seed,
        ..AheConfig::default()
    };
    load_overrides(a.params.as_deref())?
        .apply_ahe(&mut cfg)
        .map_err(usage)?;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn heavy_report(mode: &str, a: &HeavyArgs, one_pass: bool) -> Result<RunReport, Failure> {
    let s = load_stream(&a.input)?;
    let cfg = heavy_config(a)?;
    let r = if one_pass {
        find_heavy_one_pass(&s.tokens, s.n, &cfg)
    } else {
        find_heavy(&s.tokens, s.n, &cfg)
    }
    .map_err(usage)?;
    let mut rep = RunReport::new(mode, s.n, a.k).with_candidates(&r.entries);
    rep.rho = Some(a.rho);
    rep.delta = Some(a.delta);
    rep.seed = Some(a.seed);
    rep.ledger = Some(r.ledger);
    rep.passes = r.passes;
    rep.params = serde_json::to_value(&cfg).expect("config serializes");
    rep.details = json!({
        "m": s.tokens.len(),
        "f0": r.f0,
        "f1": r.f1,
        "p": r.p,
        "p_rule": "min(1, max(c_p F0, min_sample_len) / F1)",
        "z": r.z,
        "repetitions": r.repetitions,
        "pool_cap": r.pool_cap,
        "candidates_pooled": r.candidates_pooled,
        "games_played": r.games_played,
        "games_skipped": r.games_skipped,
        "budget_bits": r.budget_bits,
        "ledger_bits": r.ledger.total(),
        "c_eff": r.c_eff,
        "halvings": r.halvings,
    });
    Ok(rep)
}

fn estimate_options(
    k: u32,
    epsilon: f64,
    mode: Mode,
    seed: u64,
    t: Option<u32>,
    overrides: &ParamOverrides,
) -> Result<EstimateOptions, Failure> {
    let schedule = if k > 2 {
        build_schedule(epsilon, k, 10.0, 0.6).map_err(usage)?
    } else if overrides.entries().contains_key("u") {
        Schedule::with_u(epsilon, 0.5).map_err(usage)?
    } else {
        return Err(usage("k <= 2 needs an explicit u in --params"));
    };
    let provider = match mode {
        Mode::Oracle => HeavyProvider::Oracle,
        Mode::Ahe | Mode::Ahe1p => HeavyProvider::Ahe {
            config: AheConfig {
                k,
                seed,
                ..AheConfig::default()
            },
            rho_floor: 0.5,
            one_pass: mode == Mode::Ahe1p,
        },
    };
    let mut o = EstimateOptions {
        k,
        schedule,
        t,
        dt_cap: 64,
        provider,
        seed,
    };
    overrides.apply_estimate(&mut o).map_err(usage)?;
    Ok(o)
}

fn execute(cli: &Cli) -> Result<(RunReport, i32), Failure> {
    match &cli.command {
        Command::Gen {
            dist,
            n,
            m,
            k,
            c,
            s,
            seed,
            out,
            format,
        } => {
            let (stream, details) = match dist {
                Dist::Planted => {
                    let p = gen_planted(*n, *k, *c, *seed).map_err(usage)?;
                    let d = json!({ "planted": p.planted, "frequency": p.frequency, "interval": p.interval });
                    (p.stream, d)
                }
                Dist::Zipf => (
                    gen_zipf(*n, m.unwrap_or(*n), *s, *seed).map_err(usage)?,
                    json!({ "s": s }),
                ),
                Dist::Uniform => (gen_uniform(*n, m.unwrap_or(*n), *seed).map_err(usage)?, json!({})),
            };
            match format {
                Format::Text => write_text(out, &stream),
                Format::Binary => write_binary(out, &stream),
            }
            .map_err(|e| usage(format!("{}: {e}", out.display())))?;
            let mut rep = RunReport::new("gen", *n, *k);
            rep.seed = Some(*seed);
            rep.params = json!({ "dist": format!("{dist:?}").to_lowercase(), "m": stream.len() });
            rep.details = details;
            Ok((rep, EXIT_OK))
        }
        Command::Exact { input, k } => {
            let s = load_stream(input)?;
            let m = exact_moments(&s.tokens, *k).map_err(usage)?;
            let mut rep = RunReport::new("exact", s.n, *k);
            rep.estimate = Some(m.fk as i128);
            rep.passes = 1;
            rep.details = json!({ "f0": m.f0, "f1": m.f1, "f_inf": m.f_inf });
            Ok((rep, EXIT_OK))
        }
        Command::Heavy(a) => Ok((heavy_report("heavy", a, false)?, EXIT_OK)),
        Command::Heavy1p(a) => Ok((heavy_report("heavy1p", a, true)?, EXIT_OK)),
        Command::Estimate {
            input,
            k,
            epsilon,
            mode,
            seed,
            t,
            params,
        } => {
            let s = load_stream(input)?;
            let overrides = load_overrides(params.as_deref())?;
            let opts = estimate_options(*k, *epsilon, *mode, *seed, *t, &overrides)?;
            let r = estimate_fk(&s.tokens, s.n, &opts).map_err(usage)?;
            let mut rep = RunReport::new("estimate", s.n, *k);
            rep.epsilon = Some(*epsilon);
            rep.seed = Some(*seed);
            rep.estimate = Some(r.estimate);
            rep.passes = r.heavy_reports.iter().map(|h| h.passes).sum::<u32>().max(1);
            let mut ledger = crate::ledger::MemoryLedger::default();
            for h in &r.heavy_reports {
                ledger.merge(&h.ledger);
            }
            rep.ledger = Some(ledger);
            rep.params = serde_json::to_value(&opts).expect("options serialize");
            rep.details = json!({
                "provider": format!("{mode:?}").to_lowercase(),
                "t": r.t,
                "u": r.u,
                "b_t": r.b_t,
                "levels": r.levels,
            });
            Ok((rep, EXIT_OK))
        }
        Command::Validate { suite, trials, seed } => {
            let r = run_suite(*suite, *trials, *seed).map_err(usage)?;
            let mut rep = RunReport::new("validate", 0, 0);
            rep.seed = Some(*seed);
            let code = if r.passed { EXIT_OK } else { EXIT_SUITE_FAILED };
            rep.details = serde_json::to_value(&r).expect("suite result serializes");
            Ok((rep, code))
        }
    }
}

/// Runs the command line; returns the process exit code. Diagnostics go to
/// `err`, the report to `out` or to `--report`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("usage error");
            let _ = writeln!(err, "{line}");
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok((mut rep, code)) => {
            rep.wall_ms = start.elapsed().as_millis() as u64;
            let json = rep.to_json();
            let written = match &cli.report {
                Some(p) => std::fs::write(p, json + "\n").map_err(|e| format!("{}: {e}", p.display())),
                None => writeln!(out, "{json}").map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            if code == EXIT_SUITE_FAILED {
                let _ = writeln!(err, "error: validation suite failed");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message.lines().next().unwrap_or(""));
            f.code
        }
    }
}
