use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use tubecheck::report::{
    emit_corpus, run, run_guess, run_nondegen, BoundsOverride, Command, GuessFile, GuessReport, Mode, ProblemFile,
    Report, RunOptions, WitnessSpec,
};

/// Holomorphic-equivalence obstructions for tube and rigid polar hypersurfaces.
#[derive(Parser, Debug)]
#[command(name = "tubecheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Search for a finite-nondegeneracy witness of a tube.
    Nondegen(ProblemArgs),
    /// Run the algebraic-relation test on a tube.
    Obstruct(ProblemArgs),
    /// Run the relation test on a rigid polar profile.
    Polar(ProblemArgs),
    /// Look for a polynomial relation satisfied by one series.
    Guess(GuessArgs),
    /// Write the bundled problem files into a directory.
    Corpus { dir: PathBuf },
}

#[derive(Args, Debug, Clone, Default)]
struct BoundFlags {
    /// Maximal total degree D of the relation.
    #[arg(long)]
    degree: Option<u32>,
    /// Truncation order N used for the kernel.
    #[arg(long)]
    order: Option<u32>,
    /// Extra rows beyond the unknown count.
    #[arg(long)]
    margin: Option<u32>,
    /// Longest multiindex tried by the witness search.
    #[arg(long)]
    max_witness_order: Option<u32>,
    /// Additional orders used to validate a candidate.
    #[arg(long)]
    validate_bump: Option<u32>,
}

impl From<&BoundFlags> for BoundsOverride {
    fn from(f: &BoundFlags) -> Self {
        BoundsOverride {
            degree: f.degree,
            order: f.order,
            margin: f.margin,
            max_witness_order: f.max_witness_order,
            validate_bump: f.validate_bump,
        }
    }
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Problem file (JSON).
    file: PathBuf,
    #[command(flatten)]
    bounds: BoundFlags,
    /// Witness as JSON, e.g. '{"betas":[[1,0]],"ks":[1]}' (ks are 1-based).
    #[arg(long)]
    witness: Option<String>,
    /// Record that the automorphism-group hypotheses are assumed.
    #[arg(long)]
    assume_family: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include per-stage wall-clock timings.
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug)]
struct GuessArgs {
    /// Series file (JSON).
    file: PathBuf,
    #[command(flatten)]
    bounds: BoundFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid problem file {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn problem_report(command: Command, a: &ProblemArgs) -> Report {
    let p: ProblemFile = match read_json(&a.file) {
        Ok(p) => p,
        Err(e) => return Report::input_error(command, None, format!("{e:#}")),
    };
    let witness = match a.witness.as_deref().map(serde_json::from_str::<WitnessSpec>) {
        None => None,
        Some(Ok(w)) => Some(w),
        Some(Err(e)) => return Report::input_error(command, Some(p), format!("invalid --witness: {e}")),
    };
    let expected = match command {
        Command::Polar => Some(Mode::RigidPolar),
        Command::Obstruct => Some(Mode::Tube),
        _ => None,
    };
    if let Some(mode) = expected {
        if p.mode != mode {
            let hint = if mode == Mode::Tube { "polar" } else { "obstruct" };
            return Report::input_error(command, Some(p), format!("problem mode does not match; use `{hint}`"));
        }
    }
    let opts = RunOptions {
        bounds: (&a.bounds).into(),
        witness,
        assume_family: a.assume_family,
        timings: a.timings,
    };
    match command {
        Command::Nondegen => run_nondegen(&p, &opts),
        _ => run(&p, &opts),
    }
}

fn guess_report(a: &GuessArgs) -> GuessReport {
    match read_json::<GuessFile>(&a.file) {
        Ok(g) => run_guess(&g, &(&a.bounds).into()),
        Err(e) => GuessReport {
            tool: "tubecheck".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input: None,
            bounds: None,
            result: None,
            error: Some(format!("{e:#}")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, out, code) = match &cli.command {
        Cmd::Nondegen(a) | Cmd::Obstruct(a) | Cmd::Polar(a) => {
            let command = match &cli.command {
                Cmd::Nondegen(_) => Command::Nondegen,
                Cmd::Obstruct(_) => Command::Obstruct,
                _ => Command::Polar,
            };
            let r = problem_report(command, a);
            (r.to_json(), a.out.as_deref(), r.exit_code())
        }
        Cmd::Guess(a) => {
            let r = guess_report(a);
            (r.to_json(), a.out.as_deref(), r.exit_code())
        }
        Cmd::Corpus { dir } => {
            return match emit_corpus(dir) {
                Ok(files) => {
                    for (path, _) in files {
                        println!("{}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: cannot write corpus to {}: {e}", dir.display());
                    ExitCode::from(1)
                }
            };
        }
    };
    if let Err(e) = emit(&text, out) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
