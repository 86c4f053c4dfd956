//! `hopinv`: verify, tabulate, trace, partition and simulate hopping
//! patterns.
//!
//! Exit codes: 0 success / all checks pass, 1 a property check failed,
//! 2 invalid input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hopinv::grid::MAX_DIMENSION;
use hopinv::io::{self, Format};
use hopinv::verify::{default_check_frames, feature_table, verify_all, RepresentativeParams};
use hopinv::{sim, Family, FamilyParams, GridShape, Pattern, PatternSpec, Resource};

#[derive(Parser)]
#[command(name = "hopinv", version, about = "Invariant-bearing hopping patterns for D2D discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check every property of one pattern.
    Verify {
        #[command(flatten)]
        pattern: PatternArgs,
        /// Frames examined for frame-dependent patterns [default: 2·lcm(m, n)].
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Print the feature comparison of QC against A1, A2, B1 and B2.
    Table {
        #[arg(long, default_value_t = 5)]
        m: u32,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Print a resource's position frame by frame.
    Trace {
        #[command(flatten)]
        pattern: PatternArgs,
        /// Frame-0 resource as "i,j".
        #[arg(long, value_parser = parse_resource)]
        start: Resource,
        #[arg(long, default_value_t = 8)]
        frames: u64,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// List the invariant classes of a pattern.
    Partition {
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Run a discovery simulation from a JSON scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
    },
}

#[derive(Args)]
struct PatternArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    e: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<i64>,
}

fn need(value: Option<i64>, flag: &str, family: Family) -> Result<i64, String> {
    value.ok_or_else(|| format!("family {family} needs --{flag}"))
}

impl PatternArgs {
    fn params(&self) -> Result<FamilyParams, String> {
        let fam = self.family;
        Ok(match fam {
            Family::Qc => FamilyParams::Qc { c: need(self.c, "c", fam)? },
            Family::A1 => FamilyParams::A1 { u: need(self.u, "u", fam)?, v: need(self.v, "v", fam)? },
            Family::A2 => FamilyParams::A2,
            Family::B1 => FamilyParams::B1 {
                c: need(self.c, "c", fam)?,
                e: need(self.e, "e", fam)?,
                f: need(self.f, "f", fam)?,
            },
            Family::B2 => FamilyParams::B2 {
                c: need(self.c, "c", fam)?,
                e: need(self.e, "e", fam)?,
                f: need(self.f, "f", fam)?,
            },
        })
    }

    fn build(&self) -> Result<Pattern, String> {
        let spec = PatternSpec::new(GridShape::new(self.m, self.n), self.params()?);
        Pattern::new(spec).map_err(|e| e.to_string())
    }
}

fn parse_resource(s: &str) -> Result<Resource, String> {
    let (i, j) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"i,j\", got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("bad coordinate `{x}`: {e}"));
    Ok(Resource::new(parse(i)?, parse(j)?))
}

const PASS: u8 = 0;
const VIOLATION: u8 = 1;
const INVALID: u8 = 2;

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Verify { pattern, frames, format } => {
            let p = pattern.build()?;
            let frames = frames.unwrap_or_else(|| default_check_frames(p.shape()));
            if frames == 0 {
                return Err("--frames must be positive".into());
            }
            let report = verify_all(&p, frames);
            print!("{}", io::render_verify(&report, format));
            Ok(if report.all_pass { PASS } else { VIOLATION })
        }
        Command::Table { m, n, format } => {
            if m < 3 || m % 2 == 0 {
                return Err(format!("table needs an odd m >= 3 (m={m})"));
            }
            if n % m != 0 {
                return Err(format!("table needs m to divide n (m={m}, n={n})"));
            }
            if n > MAX_DIMENSION {
                return Err(format!("grid dimensions must not exceed {MAX_DIMENSION}"));
            }
            let rows = feature_table(GridShape::new(m, n), RepresentativeParams::default());
            print!("{}", io::render_table(&rows, format));
            Ok(PASS)
        }
        Command::Trace { pattern, start, frames, format } => {
            let p = pattern.build()?;
            let rows = io::trace_records(&p, start, frames).map_err(|e| e.to_string())?;
            print!("{}", io::render_trace(&rows, format));
            Ok(PASS)
        }
        Command::Partition { pattern, format } => {
            let p = pattern.build()?;
            let rows = io::partition_rows(&p).map_err(|e| e.to_string())?;
            print!("{}", io::render_partition(&rows, format));
            Ok(PASS)
        }
        Command::Simulate { config, out, format } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let scenario = io::parse_scenario(&text).map_err(|e| format!("{}: {e}", config.display()))?;
            let result = sim::run(&scenario).map_err(|e| e.to_string())?;
            let doc = io::render_sim(&result, format);
            match out {
                Some(path) => fs::write(&path, doc).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{doc}"),
            }
            Ok(PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID } else { PASS });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(INVALID)
        }
    }
}
