use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pengu_core::bench::{self, ProbMode, Setting};
use pengu_core::justify::JustifyConfig;
use pengu_core::pipeline::{
    run_oracle, run_query, PipelineError, QueryOptions, QueryReport, SemanticsMode,
    UNDEFINED_REASON,
};
use pengu_core::semantics::{Removability, ORACLE_MAX_WORLD_AXIOMS};
use pengu_core::tableau::{TableauConfig, DEFAULT_MAX_STEPS};
use pengu_core::{parse_kb, parse_query, serialize_kb, AxiomSet, KnowledgeBase, Query};

#[derive(Parser)]
#[command(
    name = "pengu",
    version,
    about = "Probabilistic and repair-based query answering over inconsistent ALC knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report consistency, P(Incons) and every inconsistency justification.
    Check {
        kb: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
    },
    /// Answer a query: justifications, DISPONTE probabilities and repair verdict.
    Query {
        kb: PathBuf,
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long)]
        max_justifications: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
    },
    /// Answer a query by brute-force enumeration of worlds and repairs.
    Oracle {
        kb: PathBuf,
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long, default_value_t = ORACLE_MAX_WORLD_AXIOMS)]
        max_prob_axioms: usize,
    },
    /// Benchmark generation.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Axiom to test, e.g. "ClassAssertion(Bird, pingu)", or "Consistent()".
    #[arg(short, long)]
    query: String,
    #[arg(long, value_enum, default_value_t = SemanticsArg::All)]
    semantics: SemanticsArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Which axioms a repair may drop.
    #[arg(long, value_enum, default_value_t = RemovableArg::Prob)]
    removable: RemovableArg,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Write a chain benchmark KB.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_setting)]
        setting: Setting,
        #[arg(long, value_enum, default_value_t = ProbModeArg::None)]
        prob_mode: ProbModeArg,
        #[arg(long, default_value_t = bench::DEFAULT_P)]
        p: f64,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Disponte,
    Repairs,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum RemovableArg {
    Prob,
    Abox,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbModeArg {
    None,
    Assertional,
    All,
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    s.parse().map_err(|e: bench::BenchError| e.to_string())
}

/// Error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

fn input(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error,
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = if e.is_limit() {
            EXIT_LIMIT
        } else {
            EXIT_INTERNAL
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Check {
            kb,
            format,
            max_steps,
        } => {
            let kb = load_kb(&kb)?;
            let opts = QueryOptions {
                semantics: SemanticsMode::Disponte,
                justify: JustifyConfig {
                    max_justifications: None,
                    tableau: TableauConfig { max_steps },
                },
                ..Default::default()
            };
            let report = run_query(&kb, &Query::IsConsistent, &opts)?;
            Ok(match format {
                Format::Json => json(&CheckReport::from(&report)),
                Format::Text => check_text(&kb, &report),
            })
        }
        Command::Query {
            kb,
            q,
            max_justifications,
            max_steps,
        } => {
            let kb = load_kb(&kb)?;
            let query = load_query(&q.query)?;
            let mut opts = options(&q);
            opts.justify = JustifyConfig {
                max_justifications,
                tableau: TableauConfig { max_steps },
            };
            let report = run_query(&kb, &query, &opts)?;
            Ok(render(&kb, &report, q.format))
        }
        Command::Oracle {
            kb,
            q,
            max_prob_axioms,
        } => {
            let kb = load_kb(&kb)?;
            let query = load_query(&q.query)?;
            let count = kb.probabilistic_ids().len();
            if count > max_prob_axioms {
                return Err(Failure {
                    code: EXIT_LIMIT,
                    error: anyhow!(
                        "{count} probabilistic axioms exceed the oracle limit of {max_prob_axioms}"
                    ),
                });
            }
            let report = run_oracle(&kb, &query, &options(&q))?;
            Ok(render(&kb, &report, q.format))
        }
        Command::Bench {
            command:
                BenchCommand::Gen {
                    n,
                    setting,
                    prob_mode,
                    p,
                    output,
                },
        } => {
            let mode = match prob_mode {
                ProbModeArg::None => ProbMode::None,
                ProbModeArg::Assertional => ProbMode::Assertional,
                ProbModeArg::All => ProbMode::All,
            };
            let kb = bench::generate(n, setting, mode, p).map_err(|e| input(e.into()))?;
            let text = serialize_kb(&kb).map_err(|e| Failure {
                code: EXIT_INTERNAL,
                error: e.into(),
            })?;
            match output {
                Some(path) => {
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))
                        .map_err(input)?;
                    Ok(format!("query: {}\n", bench::query(n, setting)))
                }
                None => Ok(text),
            }
        }
    }
}

fn options(q: &QueryArgs) -> QueryOptions {
    QueryOptions {
        semantics: match q.semantics {
            SemanticsArg::Disponte => SemanticsMode::Disponte,
            SemanticsArg::Repairs => SemanticsMode::Repairs,
            SemanticsArg::All => SemanticsMode::All,
        },
        removability: match q.removable {
            RemovableArg::Prob => Removability::Probabilistic,
            RemovableArg::Abox => Removability::Abox,
        },
        justify: JustifyConfig::default(),
    }
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    parse_kb(&text).map_err(|e| input(anyhow!("{}:{e}", path.display())))
}

fn load_query(text: &str) -> Result<Query, Failure> {
    parse_query(text).map_err(|e| input(anyhow!("query {e}")))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CheckReport<'a> {
    consistent: bool,
    p_incons: f64,
    partial: bool,
    incons_justifications: &'a [AxiomSet],
}

impl<'a> From<&'a QueryReport> for CheckReport<'a> {
    fn from(r: &'a QueryReport) -> Self {
        CheckReport {
            consistent: r.consistent,
            p_incons: r.p_incons,
            partial: r.partial,
            incons_justifications: &r.incons_justifications,
        }
    }
}

fn render(kb: &KnowledgeBase, r: &QueryReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Text => query_text(kb, r),
    }
}

fn write_justs(out: &mut String, kb: &KnowledgeBase, title: &str, justs: &[AxiomSet]) {
    let _ = writeln!(out, "{title} ({}):", justs.len());
    for j in justs {
        let _ = writeln!(out, "  {j}");
        for id in j.iter() {
            if let Some(ax) = kb.get(id) {
                let _ = writeln!(out, "    {ax}");
            }
        }
    }
}

fn check_text(kb: &KnowledgeBase, r: &QueryReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "consistent: {}", r.consistent);
    let _ = writeln!(out, "P(Incons) = {}", r.p_incons);
    if r.partial {
        let _ = writeln!(
            out,
            "partial: justification limit reached, P(Incons) is a lower bound"
        );
    }
    write_justs(
        &mut out,
        kb,
        "inconsistency justifications",
        &r.incons_justifications,
    );
    out
}

fn query_text(kb: &KnowledgeBase, r: &QueryReport) -> String {
    let mut out = String::new();
    if r.oracle {
        out.push_str("(brute-force oracle)\n");
    }
    let _ = writeln!(out, "query: {}", r.query);
    let _ = writeln!(out, "consistent: {}", r.consistent);
    let _ = writeln!(out, "P(Incons) = {}", r.p_incons);
    let _ = writeln!(out, "P(Cons) = {}", r.p_cons);
    let _ = writeln!(out, "P(Q, Cons) = {}", r.p_q_and_cons);
    match r.p_c {
        Some(p) => {
            let _ = writeln!(out, "P_C(Q) = {p}");
        }
        None => {
            let _ = writeln!(out, "P_C(Q) undefined ({UNDEFINED_REASON})");
        }
    }
    if let Some(v) = r.verdict {
        let _ = writeln!(out, "verdict: {v}");
    }
    if r.no_repair {
        out.push_str("no repair: the non-removable axioms are inconsistent\n");
    }
    if r.partial {
        out.push_str("partial: justification limit reached, probabilities are lower bounds\n");
    }
    write_justs(
        &mut out,
        kb,
        "query justifications",
        &r.query_justifications,
    );
    write_justs(
        &mut out,
        kb,
        "inconsistency justifications",
        &r.incons_justifications,
    );
    let t = &r.timings;
    let _ = writeln!(
        out,
        "time (ms): justifications {:.3}, disponte {:.3}, repairs {:.3}, total {:.3}",
        t.justification_ms, t.disponte_ms, t.repair_ms, t.total_ms
    );
    out
}
