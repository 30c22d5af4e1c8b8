use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use contextuality::analysis::{analyze_document, AnalysisOptions};
use contextuality::cohomology::{connecting_hom_check, obstruction_vanishes};
use contextuality::document::ModelDocument;
use contextuality::dot::export_bundle_dot;
use contextuality::search::DEFAULT_BUDGET;
use contextuality::stabiliser::{
    generate_subgroup, is_avn_triple, model_of_generators, scenario_for_operators, theory_of_subgroup,
    PauliOperator,
};
use contextuality::theory::{is_avn, is_avn_at, AvnCertificate};
use contextuality::{corpus, Error, RingSpec};

const BUDGET_VAR: &str = "CONTEXTUALITY_BUDGET";

/// `print!`/`println!` that exit quietly once the reader has gone away
/// (`contextuality ... | head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if write!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

/// Contextuality analysis of possibilistic empirical models.
///
/// FILE arguments take a path to a model document, `-` for standard input,
/// or `corpus:NAME` for a builtin entry.
#[derive(Parser)]
#[command(name = "contextuality", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a model over the given rings and check the implication chain.
    Analyze {
        file: String,
        /// `z`, `z2`, `z3`, ... (repeatable; ℤ is always included).
        #[arg(long = "ring")]
        rings: Vec<RingSpec>,
        /// Node budget for each global-section search (overrides CONTEXTUALITY_BUDGET).
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether the cohomological obstruction of one section vanishes.
    Obstruction {
        file: String,
        /// Context, e.g. `a1,b1`.
        #[arg(long)]
        context: String,
        /// Section, e.g. `a1=0,b1=0`.
        #[arg(long)]
        section: String,
        #[arg(long, default_value = "z")]
        ring: RingSpec,
        #[arg(long)]
        json: bool,
    },
    /// Decide All-vs-Nothing over a finite ring, optionally at a section.
    Avn {
        file: String,
        #[arg(long)]
        ring: RingSpec,
        /// Section to pin, e.g. `a1=0,b1=0`.
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// List or print builtin model documents.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Write the bundle diagram of a model as DOT.
    Bundle {
        file: String,
        /// Output path; standard output when absent.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check an AvN triple and print the parity theory of its stabiliser group.
    Stabiliser {
        /// Comma-separated Pauli operators, e.g. `XYY,YXY,YYX`.
        #[arg(long)]
        triple: String,
        /// Print the induced model as a support document instead.
        #[arg(long)]
        emit_model: bool,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    Show { name: String },
}

/// Failures other than library errors (I/O, bad arguments).
enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn load(file: &str) -> Result<ModelDocument, Failure> {
    if let Some(name) = file.strip_prefix("corpus:") {
        return Ok(corpus::document(name)?);
    }
    let text = if file == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("reading standard input: {e}")))?;
        s
    } else {
        fs::read_to_string(file).map_err(|e| Failure::Input(format!("reading {file}: {e}")))?
    };
    Ok(ModelDocument::parse(&text)?)
}

fn budget(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{BUDGET_VAR}={v:?} is not a node count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn print_json(v: &serde_json::Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze {
            file,
            rings,
            budget: flag,
            json,
        } => {
            let doc = load(&file)?;
            let options = AnalysisOptions {
                rings,
                budget: budget(flag)?,
            };
            let report = analyze_document(&doc, &options)?;
            if json {
                print_json(&report.to_json());
            } else {
                out!("{}", report.to_text());
            }
        }
        Command::Obstruction {
            file,
            context,
            section,
            ring,
            json,
        } => {
            let model = load(&file)?.build()?.model;
            let scn = model.scenario();
            let ci = scn.parse_context(&context)?;
            let s0 = scn.parse_section(&section)?;
            if s0.domain() != scn.context(ci) {
                return Err(Failure::Input(format!(
                    "section {section} does not assign exactly the measurements of {}",
                    scn.format_context(scn.context(ci))
                )));
            }
            let vanishes = obstruction_vanishes(&model, ci, &s0, ring)?;
            if connecting_hom_check(&model, ci, &s0, ring)? != vanishes {
                return Err(Error::SelfCheck(
                    "the connecting-homomorphism computation disagrees with the linear system".into(),
                )
                .into());
            }
            if json {
                print_json(&json!({
                    "ring": ring.to_string(),
                    "context": scn.format_context(scn.context(ci)),
                    "section": scn.format_section(&s0),
                    "vanishes": vanishes,
                }));
            } else {
                outln!(
                    "obstruction over {ring} at {} for {}: {}",
                    scn.format_context(scn.context(ci)),
                    scn.format_section(&s0),
                    if vanishes { "vanishes" } else { "does not vanish" }
                );
            }
        }
        Command::Avn { file, ring, at, json } => {
            let model = load(&file)?.build()?.model;
            let scn = model.scenario();
            let report = match &at {
                Some(text) => is_avn_at(&model, &scn.parse_section(text)?, ring)?,
                None => is_avn(&model, ring)?,
            };
            let certificate = match &report.certificate {
                AvnCertificate::Consistent(g) => format!("consistent; solution {}", scn.format_section(g)),
                AvnCertificate::Inconsistent(h) => {
                    format!("inconsistent; Howell form of [A | b] has {} rows", h.form.rows())
                }
            };
            if json {
                print_json(&json!({
                    "ring": ring.to_string(),
                    "at": at,
                    "avn": report.avn,
                    "theory": report.theory.display_lines(),
                    "certificate": certificate,
                }));
            } else {
                outln!("AvN over {ring}: {}", report.avn);
                outln!("theory ({} equations):", report.theory.len());
                let tscn = report.theory.scenario();
                for eq in report.theory.equations() {
                    outln!(
                        "  {}    on {}",
                        eq.display(tscn, ring),
                        tscn.format_context(tscn.context(eq.context))
                    );
                }
                outln!("certificate: {certificate}");
            }
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                for name in corpus::names() {
                    outln!("{name}");
                }
            }
            CorpusAction::Show { name } => out!("{}", corpus::text(&name)?),
        },
        Command::Bundle { file, output } => {
            let model = load(&file)?.build()?.model;
            let dot = export_bundle_dot(&model);
            match output {
                Some(path) => fs::write(&path, dot)
                    .map_err(|e| Failure::Input(format!("writing {}: {e}", path.display())))?,
                None => out!("{dot}"),
            }
        }
        Command::Stabiliser { triple, emit_model } => {
            let ops = triple
                .split(',')
                .map(str::parse::<PauliOperator>)
                .collect::<Result<Vec<_>, _>>()?;
            if emit_model {
                let model = model_of_generators(&ops)?;
                out!("{}", ModelDocument::from_model(&model).to_canonical_string());
                return Ok(());
            }
            if let [e, f, g] = ops.as_slice() {
                let check = is_avn_triple(e, f, g)?;
                outln!("AvN triple: {}", check.holds());
                for d in &check.diagnostics {
                    outln!("  {d}");
                }
            } else {
                outln!("AvN triple: n/a ({} operators given)", ops.len());
            }
            let group = generate_subgroup(&ops)?;
            outln!("subgroup ({} elements):", group.len());
            for p in &group {
                outln!("  {p}");
            }
            let scn = scenario_for_operators(&ops)?;
            let theory = theory_of_subgroup(&group, &scn)?;
            outln!("theory ({} equations):", theory.len());
            for line in theory.display_lines() {
                outln!("  {line}");
            }
        }
    }
    Ok(())
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
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
