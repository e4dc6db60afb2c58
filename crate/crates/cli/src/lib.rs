//! `unitgroup` command line: structure reports, checks and suites.
//!
//! Exit status is 0 on success, 1 when some check fails, 2 on usage,
//! input or budget errors.

pub mod report;
pub mod suite;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use unitgroup::{
    structure_report, theory, CheckId, CheckParams, GroupRing, GroupSpec, RingElement64, RingSpec,
    Verdict, Verifier, DEFAULT_BUDGET,
};

use report::{render_suite_text, render_text, to_json, Format, RingReport};
use suite::{write_atomic, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "unitgroup",
    version,
    about = "Normalized units of Z/p^e[G] for abelian p-groups G"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RingArgs {
    /// The prime p.
    #[arg(long)]
    p: u64,
    /// Cyclic factor exponents of G, comma separated, any order.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<u32>,
    /// Coefficients live in Z/p^e.
    #[arg(long)]
    e: u32,
}

impl RingArgs {
    fn spec(&self) -> unitgroup::Result<RingSpec> {
        RingSpec::new(GroupSpec::new(self.p, self.lambda.clone())?, self.e)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form invariants of V.
    Invariants {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compare closed forms against exhaustive computation.
    Verify {
        #[command(flatten)]
        ring: RingArgs,
        /// Comma separated check ids; defaults to every check suited to the instance.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<CheckId>>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only this n for the dimension subgroup check.
        #[arg(long)]
        n: Option<u64>,
        /// Only this d for the `1 + p^d y` check.
        #[arg(long)]
        d: Option<u32>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run a catalog of instances and write a JSON summary.
    Suite {
        /// JSON suite configuration; the built-in catalog when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rendering for standard output when no output file is set.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Multiplicative order of an element with augmentation 1 mod p.
    Order {
        #[command(flatten)]
        ring: RingArgs,
        /// Coefficients in group-element order; negative values are reduced mod p^e.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        coeffs: Vec<i64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Dimension subgroup G ∩ (1 + ω^n).
    Dimsub {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        n: u64,
        /// Also compute it by Howell membership.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Mismatch,
}

impl From<unitgroup::Error> for Failure {
    fn from(e: unitgroup::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Runs the command line `argv` (program name first).
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            return if err.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Mismatch) => EXIT_MISMATCH,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(
    command: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    match command {
        Command::Invariants { ring, format } => {
            let rs = ring.spec()?;
            let report = RingReport::new(&structure_report(rs.group(), rs.e())?, &[]);
            match format {
                Format::Json => stdout.write_all(to_json(&report).as_bytes())?,
                Format::Text => stdout.write_all(render_text(&report).as_bytes())?,
            }
            Ok(())
        }
        Command::Verify {
            ring,
            checks,
            budget,
            workers,
            seed,
            n,
            d,
            out,
            format,
        } => {
            let rs = ring.spec()?;
            let params = CheckParams {
                n,
                d,
                seed,
                budget,
                workers,
                ..CheckParams::default()
            };
            let checks = match checks {
                Some(list) => list,
                None => CheckId::ALL
                    .into_iter()
                    .filter(|c| c.in_default_suite(&rs))
                    .collect(),
            };
            let verifier = Verifier::new(&rs, params)?;
            let results = checks
                .into_iter()
                .map(|c| verifier.run(c))
                .collect::<Result<Vec<_>, _>>()?;
            let report = RingReport::new(&structure_report(rs.group(), rs.e())?, &results);
            let json = to_json(&report);
            if let Some(path) = out {
                write_atomic(&path, &json)?;
            }
            match format {
                Format::Json => stdout.write_all(json.as_bytes())?,
                Format::Text => stdout.write_all(render_text(&report).as_bytes())?,
            }
            if report.failures() > 0 {
                return Err(Failure::Mismatch);
            }
            Ok(())
        }
        Command::Suite {
            config,
            workers,
            seed,
            budget,
            out,
            format,
        } => {
            let mut cfg = match config {
                Some(path) => SuiteConfig::load(&path).map_err(Failure::Usage)?,
                None => SuiteConfig::default(),
            };
            cfg.workers = workers.unwrap_or(cfg.workers);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.output = out.or(cfg.output);
            let result = cfg.run()?;
            let json = to_json(&result);
            match (&cfg.output, format) {
                (Some(path), _) => write_atomic(path, &json)?,
                (None, Some(Format::Text)) => {
                    stdout.write_all(render_suite_text(&result).as_bytes())?
                }
                (None, _) => stdout.write_all(json.as_bytes())?,
            }
            let m = &result.summary;
            let _ = writeln!(
                stderr,
                "suite: {} instances, {} checks, {} failed",
                m.instances, m.checks, m.failed
            );
            if m.failed > 0 {
                return Err(Failure::Mismatch);
            }
            Ok(())
        }
        Command::Order {
            ring,
            coeffs,
            format,
        } => {
            let rs = ring.spec()?;
            let ring = GroupRing::new(rs)?;
            let x: RingElement64 = ring.element_from_ints(&coeffs)?;
            let order = x.unit_order()?;
            match format {
                Format::Json => {
                    let v = serde_json::json!({ "element": x.coeffs_u64(), "order": order });
                    stdout.write_all(to_json(&v).as_bytes())?;
                }
                Format::Text => match order.value() {
                    Some(v) => writeln!(stdout, "{v}")?,
                    None => writeln!(stdout, "{order}")?,
                },
            }
            Ok(())
        }
        Command::Dimsub {
            ring,
            n,
            oracle,
            format,
        } => {
            let rs = ring.spec()?;
            let group = rs.group();
            let formula = theory::dimension_subgroup(group, rs.e(), n)?;
            let order_exp = formula.order_exp(group);
            let observed = if oracle {
                let params = CheckParams {
                    n: Some(n),
                    ..CheckParams::default()
                };
                Some(Verifier::new(&rs, params)?.run(CheckId::Lemma3)?)
            } else {
                None
            };
            let agree = observed.as_ref().map(|r| r.verdict == Verdict::Pass);
            match format {
                Format::Json => {
                    let mut v = serde_json::json!({
                        "group": group,
                        "e": rs.e(),
                        "n": n,
                        "agemo_index": formula.agemo_index(),
                        "order_exp": order_exp,
                    });
                    if let Some(r) = &observed {
                        v["oracle_order_exp"] =
                            r.observed["dimension_subgroups"][0]["order_exp"].clone();
                        v["verdict"] = serde_json::to_value(r.verdict).expect("verdict serializes");
                    }
                    stdout.write_all(to_json(&v).as_bytes())?;
                }
                Format::Text => {
                    let k = formula.agemo_index();
                    let shape = if k == 0 {
                        "G".to_string()
                    } else {
                        format!("G^({}^{k})", group.p())
                    };
                    writeln!(stdout, "D_{n} = {shape}, order {}^{order_exp}", group.p())?;
                    if let Some(r) = &observed {
                        let seen = &r.observed["dimension_subgroups"][0]["order_exp"];
                        writeln!(stdout, "oracle: order {}^{seen}", group.p())?;
                    }
                }
            }
            if agree == Some(false) {
                return Err(Failure::Mismatch);
            }
            Ok(())
        }
    }
}
