use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use floc_core::corpus::{self, CORPUS};
use floc_core::frontend::FrontendError;
use floc_core::localize::{
    localize, render_detection, render_text, verify, Analysis, LocalizeConfig, Mode, VerdictTag,
};
use floc_core::solvers::{Backend, SolverConfig, PROVER_ENV};
use floc_core::span::SourceFile;

/// Locate faulty expressions in contract-annotated MCL programs.
#[derive(Parser, Debug)]
#[command(name = "floc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check functions against their contracts.
    Verify(RunArgs),
    /// Verify, then report the expressions that could be the fault.
    Localize(RunArgs),
    /// Print the candidate table.
    ListCandidates(RunArgs),
    /// Print the proof obligations.
    DumpVc(RunArgs),
    /// Print the normalized functions with original line numbers.
    DumpNormalized(RunArgs),
    /// Work with the bundled example programs.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Subcommand, Debug)]
enum CorpusCommand {
    /// List entries with their settings.
    List,
    /// Print the source of an entry.
    Show { name: String },
    /// Localize an entry with its bundled settings.
    Run {
        name: String,
        #[arg(long, value_enum, default_value_t = ModeArg::PerObligation)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        no_timings: bool,
    },
    /// Write every corpus file into a directory.
    Export { dir: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// MCL source file.
    file: PathBuf,
    /// Only this function (default: every function with a contract).
    #[arg(long)]
    function: Option<String>,
    #[arg(long, value_enum, default_value_t = SolverKind::Internal)]
    solver: SolverKind,
    /// Prover command for `--solver external`; the script path is appended.
    #[arg(long, env = PROVER_ENV)]
    prover: Option<String>,
    /// Integer variables range over [-B, B] in the internal solver.
    #[arg(long, default_value_t = 8)]
    bound: i64,
    /// Range of integer placeholders (default: the bound).
    #[arg(long)]
    placeholder_bound: Option<i64>,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::PerObligation)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Candidate checks run at once (0: one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Leave timings out of reports so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
    #[arg(long)]
    list_candidates: bool,
    #[arg(long)]
    dump_vc: bool,
    #[arg(long)]
    dump_normalized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Internal,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    PerObligation,
    Conjunction,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::PerObligation => Mode::PerObligation,
            ModeArg::Conjunction => Mode::Conjunction,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Verify(args) => cmd_verify(&args),
        Command::Localize(args) => cmd_localize(&args),
        Command::ListCandidates(args) => {
            let (analysis, functions) = load(&args)?;
            emit(args.format, list_candidates(&analysis, &functions, args.format)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpVc(args) => {
            let (analysis, functions) = load(&args)?;
            emit(args.format, dump_vc(&analysis, &functions, args.format)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpNormalized(args) => {
            let (analysis, functions) = load(&args)?;
            print!("{}", dump_normalized(&analysis, &functions)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Corpus(c) => cmd_corpus(c),
    }
}

fn emit(format: Format, s: String) {
    match format {
        Format::Text => print!("{s}"),
        Format::Json => println!("{s}"),
    }
}

fn read_source(path: &Path) -> Result<SourceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(SourceFile::new(path.display().to_string(), text))
}

fn analyze(source: &SourceFile) -> Result<Analysis> {
    Analysis::new(source).map_err(|e| match e {
        FrontendError::Syntax { .. } => anyhow::anyhow!("{}:{e}", source.name),
        FrontendError::Type(_) => anyhow::anyhow!("type errors:\n{e}"),
    })
}

fn load(args: &RunArgs) -> Result<(Analysis, Vec<String>)> {
    let analysis = analyze(&read_source(&args.file)?)?;
    let functions = match &args.function {
        Some(name) => {
            analysis.function(name)?;
            vec![name.clone()]
        }
        None => analysis
            .program
            .program
            .functions
            .iter()
            .filter(|f| f.has_contract)
            .map(|f| f.name.clone())
            .collect(),
    };
    if functions.is_empty() {
        bail!("{} has no function with a contract", args.file.display());
    }
    Ok((analysis, functions))
}

fn config(args: &RunArgs) -> Result<LocalizeConfig> {
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        bail!("--timeout must be a positive number of seconds");
    }
    let backend = match args.solver {
        SolverKind::Internal => Backend::Internal,
        SolverKind::External => match &args.prover {
            Some(command) if !command.trim().is_empty() => Backend::External {
                command: command.clone(),
            },
            _ => bail!("--solver external needs --prover or {PROVER_ENV}"),
        },
    };
    let solver = SolverConfig {
        backend,
        bound: args.bound,
        placeholder_bound: args.placeholder_bound.unwrap_or(args.bound),
        timeout: Duration::from_secs_f64(args.timeout),
    };
    solver.validate()?;
    Ok(LocalizeConfig {
        solver,
        mode: args.mode.into(),
        workers: args.workers,
        timings: !args.no_timings,
    })
}

/// Dumps requested by flags; on stderr when stdout carries JSON.
fn side_dumps(args: &RunArgs, analysis: &Analysis, functions: &[String]) -> Result<()> {
    let mut s = String::new();
    if args.dump_normalized {
        s.push_str(&dump_normalized(analysis, functions)?);
    }
    if args.list_candidates {
        s.push_str(&list_candidates(analysis, functions, Format::Text)?);
    }
    if args.dump_vc {
        s.push_str(&dump_vc(analysis, functions, Format::Text)?);
    }
    match args.format {
        Format::Text => print!("{s}"),
        Format::Json => eprint!("{s}"),
    }
    Ok(())
}

fn cmd_verify(args: &RunArgs) -> Result<ExitCode> {
    let cfg = config(args)?;
    let (analysis, functions) = load(args)?;
    side_dumps(args, &analysis, &functions)?;
    let mut all_valid = true;
    let mut text = String::new();
    let mut docs = Vec::new();
    for name in &functions {
        let d = verify(&analysis, name, &cfg)?;
        all_valid &= d.verdict == VerdictTag::Valid;
        let _ = writeln!(text, "{}", render_detection(name, &d));
        docs.push(json!({ "function": name, "detection": d }));
    }
    match args.format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&docs)?),
    }
    Ok(if all_valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_localize(args: &RunArgs) -> Result<ExitCode> {
    let cfg = config(args)?;
    let (analysis, functions) = load(args)?;
    side_dumps(args, &analysis, &functions)?;
    let mut reports = Vec::new();
    for name in &functions {
        reports.push(localize(&analysis, name, &cfg)?);
    }
    match args.format {
        Format::Text => {
            let texts: Vec<String> = reports.iter().map(render_text).collect();
            print!("{}", texts.join("\n"));
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn list_candidates(analysis: &Analysis, functions: &[String], format: Format) -> Result<String> {
    let mut out = String::new();
    let mut docs = Vec::new();
    for name in functions {
        let cands = analysis.candidates(name)?;
        let _ = writeln!(out, "candidates of {name}:");
        let _ = writeln!(out, "  {:<5} {:<10} {:<6} text", "id", "kind", "line");
        for c in &cands {
            let scoped = if c.loop_scoped { "  [loop-scoped]" } else { "" };
            let _ = writeln!(
                out,
                "  C{:<4} {:<10} {:<6} {}{scoped}",
                c.id,
                c.kind.to_string(),
                c.location.original_line,
                c.expr
            );
            docs.push(json!({
                "function": name,
                "id": c.id,
                "kind": c.kind,
                "site": c.path().to_string(),
                "normalizedText": c.expr,
                "originalLine": c.location.original_line,
                "originalText": c.location.original_text,
                "loopScoped": c.loop_scoped,
            }));
        }
    }
    Ok(match format {
        Format::Text => out,
        Format::Json => serde_json::to_string_pretty(&docs)?,
    })
}

fn dump_vc(analysis: &Analysis, functions: &[String], format: Format) -> Result<String> {
    let mut out = String::new();
    let mut docs = Vec::new();
    for name in functions {
        for o in analysis.obligations(name)? {
            let _ = writeln!(out, "{} ({})\n    {}", o.id, o.span, o.query);
            docs.push(json!({
                "id": o.id,
                "kind": o.kind.tag(),
                "span": o.span.to_string(),
                "formula": o.query.to_string(),
            }));
        }
    }
    Ok(match format {
        Format::Text => out,
        Format::Json => serde_json::to_string_pretty(&docs)?,
    })
}

fn dump_normalized(analysis: &Analysis, functions: &[String]) -> Result<String> {
    let mut out = String::new();
    for name in functions {
        out.push_str(&analysis.map.render_function(analysis.function(name)?));
    }
    Ok(out)
}

fn cmd_corpus(cmd: CorpusCommand) -> Result<ExitCode> {
    let entry = |name: &str| {
        corpus::find(name).with_context(|| format!("no corpus entry named `{name}` (see `floc corpus list`)"))
    };
    match cmd {
        CorpusCommand::List => {
            println!("{:<14} {:<18} {:<24} {:>3} {:>5}  status", "name", "file", "function", "B", "Bc");
            for e in CORPUS {
                let status = if e.buggy { "buggy" } else { "correct" };
                println!(
                    "{:<14} {:<18} {:<24} {:>3} {:>5}  {status}",
                    e.name, e.file, e.function, e.bound, e.placeholder_bound
                );
            }
        }
        CorpusCommand::Show { name } => print!("{}", entry(&name)?.source),
        CorpusCommand::Run {
            name,
            mode,
            format,
            no_timings,
        } => {
            let e = entry(&name)?;
            let analysis = analyze(&e.source_file())?;
            let mut cfg = e.config();
            cfg.mode = mode.into();
            cfg.timings = !no_timings;
            let r = localize(&analysis, e.function, &cfg)?;
            match format {
                Format::Text => print!("{}", render_text(&r)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&r)?),
            }
        }
        CorpusCommand::Export { dir } => {
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let mut written: Vec<&str> = Vec::new();
            for e in CORPUS {
                if written.contains(&e.file) {
                    continue;
                }
                let path = dir.join(e.file);
                fs::write(&path, e.source).with_context(|| format!("cannot write {}", path.display()))?;
                written.push(e.file);
            }
            println!("wrote {} files to {}", written.len(), dir.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
