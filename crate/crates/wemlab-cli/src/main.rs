//! Command-line experiments over the wemlab library.
//!
//! Every subcommand is a pure function of its flags: seeds are explicit,
//! reports embed the full configuration and the tool version, and
//! identical invocations write byte-identical artifacts. Exit status is 0
//! iff the command completed; what an experiment *found* (improved or
//! not) never affects the status.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wemlab::blockmodel::{
    count_states, count_transitions, discrepancy_report, rate, BlockShape, BlockState,
    MemoryModel, Scm,
};
use wemlab::codecraft::{indicator_code, trivial_code, Code, CostReport};
use wemlab::flipsim::{run_workload, EncodingKind, WorkloadConfig};
use wemlab::report::{csv_document, discrepancy_csv, json_document, render_discrepancy_table};
use wemlab::search::{exhaustive_scm_search, redundant_search, swap_search, Objective};
use wemlab::semilinear::{search_matrix, BasisMatrix, Independence};
use wemlab::setcodec::compressed_code;

const TOOL: &str = "wemlab";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default directory for `--out` paths.
const OUT_DIR_VAR: &str = "WEMLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = TOOL, version = VERSION, about = "write-efficient memory coding laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Report file to write; relative paths land in $WEMLAB_OUT_DIR if set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format for --out.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Bits per slot.
    #[arg(long)]
    n: u32,
    /// Slots per block.
    #[arg(long)]
    k: u32,
}

impl ShapeArgs {
    fn shape(&self) -> Result<BlockShape, CliError> {
        Ok(BlockShape::new(self.n, self.k)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Number of valid states of a model (closed form).
    CountStates {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Model flags, e.g. "gmm", "loa+uoe", "loa+scm:overwrite".
        #[arg(long)]
        model: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Number of valid transitions from a state (closed form).
    CountTransitions {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        model: String,
        /// Source state, e.g. `[0,3,7,7]`; optional when the count is
        /// state-independent.
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coding rate log2(states) / (n*k).
    Rate {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        model: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cost metrics of a named code or a code document.
    EvalCode {
        #[command(flatten)]
        shape: ShapeArgs,
        /// One of "trivial", "indicator", "compressed" (trivial and
        /// compressed need --model).
        #[arg(long, conflicts_with = "code_file")]
        code: Option<String>,
        #[arg(long)]
        model: Option<String>,
        /// A code JSON document to evaluate instead of a named code.
        #[arg(long)]
        code_file: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact search over every bijective overwrite-SCM code (n*k <= 3).
    SearchExhaustive {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value = "max")]
        objective: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded hill climbing over codeword swaps.
    SearchSwap {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "max")]
        objective: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        restarts: u64,
        /// Optional wall-clock cutoff in milliseconds.
        #[arg(long)]
        wall_ms: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded multi-codeword search over a compressed code's redundancy.
    SearchRedundant {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "max")]
        objective: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        iterations: u64,
        #[arg(long)]
        wall_ms: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Column-independence check of a basis matrix document.
    SemilinearVerify {
        /// Matrix JSON file (shape plus textual bit-string columns).
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Randomized search for an independent basis matrix.
    SemilinearSearch {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 256)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Linear-probing hash table workload under selected encodings.
    SimHash {
        /// Workload config JSON; overrides the individual flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 16)]
        blocks: usize,
        #[arg(long, default_value_t = 256)]
        ops: u64,
        #[arg(long, default_value_t = 0.7)]
        insert_ratio: f64,
        /// Comma-separated: trivial,indicator,compressed,semilinear.
        #[arg(long, default_value = "trivial,indicator")]
        encodings: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        trace_points: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Audit of the published closed forms against enumeration.
    DiscrepancyReport {
        #[arg(long, default_value_t = 3)]
        max_n: u32,
        #[arg(long, default_value_t = 3)]
        max_k: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// Reports wrap their payload with the tool version and the full config,
/// so every artifact is self-describing and reproducible.
#[derive(Serialize)]
struct Envelope<C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: C,
    report: R,
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_VAR) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn emit(output: &OutputArgs, json: String, csv: Option<String>) -> Result<(), CliError> {
    let Some(path) = &output.out else {
        return Ok(());
    };
    let target = resolve_out(path);
    let body = match output.format {
        Format::Json => json,
        Format::Csv => {
            csv.ok_or_else(|| CliError("this command has no CSV schema; use json".into()))?
        }
    };
    fs::write(&target, body)
        .map_err(|e| CliError(format!("cannot write {}: {e}", target.display())))?;
    Ok(())
}

fn single_row_csv(header: &[&str], row: Vec<String>) -> String {
    csv_document(header, &[row])
}

fn parse_model(text: &str) -> Result<MemoryModel, CliError> {
    Ok(text.parse::<MemoryModel>()?)
}

fn cost_summary(report: &CostReport) -> String {
    let total = report
        .total_cost
        .map(|t| {
            format!(
                "total_cost={} total_cost_per_codeword={}",
                t,
                report.total_cost_per_codeword.expect("set together")
            )
        })
        .unwrap_or_else(|| "total_cost=- (multi-codeword)".to_string());
    format!(
        "max_cost={} avg_cost={} ({:.4}) {} codewords={} samples={}",
        report.max_cost,
        report.avg_cost,
        report.avg_cost.to_f64(),
        total,
        report.codeword_count,
        report.transition_samples
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CountStates { shape, model, output } => {
            let sh = shape.shape()?;
            let m = parse_model(&model)?;
            let count = count_states(sh, m)?;
            println!("{count}");
            #[derive(Serialize)]
            struct Config {
                n: u32,
                k: u32,
                model: MemoryModel,
            }
            #[derive(Serialize)]
            struct Report {
                count: u64,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "count-states",
                config: Config { n: sh.n(), k: sh.k(), model: m },
                report: Report { count: count as u64 },
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &["n", "k", "model", "count"],
                    vec![sh.n().to_string(), sh.k().to_string(), m.to_string(), count.to_string()],
                )),
            )
        }
        Command::CountTransitions { shape, model, state, output } => {
            let sh = shape.shape()?;
            let m = parse_model(&model)?;
            let state = match state {
                Some(text) => text.parse::<BlockState>()?,
                None => {
                    let independent =
                        m.scm == Scm::None || (m.scm == Scm::Overwrite && !m.loa && !m.uoe);
                    if !independent {
                        return Err(CliError(format!(
                            "the transition count of {m} depends on the state; pass --state"
                        )));
                    }
                    BlockState::empty_block(sh)
                }
            };
            let count = count_transitions(&state, sh, m)?;
            println!("{count}");
            #[derive(Serialize)]
            struct Config {
                n: u32,
                k: u32,
                model: MemoryModel,
                state: BlockState,
            }
            #[derive(Serialize)]
            struct Report {
                count: u64,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "count-transitions",
                config: Config { n: sh.n(), k: sh.k(), model: m, state: state.clone() },
                report: Report { count: count as u64 },
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &["n", "k", "model", "state", "count"],
                    vec![
                        sh.n().to_string(),
                        sh.k().to_string(),
                        m.to_string(),
                        state.to_string(),
                        count.to_string(),
                    ],
                )),
            )
        }
        Command::Rate { shape, model, output } => {
            let sh = shape.shape()?;
            let m = parse_model(&model)?;
            let value = rate(sh, m)?;
            println!("{value:?}");
            #[derive(Serialize)]
            struct Config {
                n: u32,
                k: u32,
                model: MemoryModel,
            }
            #[derive(Serialize)]
            struct Report {
                rate: f64,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "rate",
                config: Config { n: sh.n(), k: sh.k(), model: m },
                report: Report { rate: value },
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &["n", "k", "model", "rate"],
                    vec![
                        sh.n().to_string(),
                        sh.k().to_string(),
                        m.to_string(),
                        format!("{value:?}"),
                    ],
                )),
            )
        }
        Command::EvalCode { shape, code, model, code_file, output } => {
            let sh = shape.shape()?;
            let (the_code, source) = if let Some(path) = code_file {
                let text = fs::read_to_string(&path)
                    .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
                (Code::from_json(&text)?, format!("file:{}", path.display()))
            } else {
                let name = code.ok_or_else(|| {
                    CliError("pass --code trivial|indicator|compressed or --code-file".into())
                })?;
                let built = match name.as_str() {
                    "trivial" => {
                        let m = parse_model(model.as_deref().ok_or_else(|| {
                            CliError("--code trivial needs --model".into())
                        })?)?;
                        trivial_code(sh, m)?
                    }
                    "indicator" => indicator_code(sh)?,
                    "compressed" => {
                        let m = parse_model(model.as_deref().ok_or_else(|| {
                            CliError("--code compressed needs --model".into())
                        })?)?;
                        compressed_code(sh, m)?
                    }
                    other => {
                        return Err(CliError(format!(
                            "unknown code {other:?}; expected trivial, indicator, or compressed"
                        )))
                    }
                };
                (built, name)
            };
            the_code.validate().map_err(|d| CliError(format!("invalid code: {d}")))?;
            let report = the_code.cost_report()?;
            println!("{}", cost_summary(&report));
            #[derive(Serialize)]
            struct Config {
                n: u32,
                k: u32,
                code: String,
                model: MemoryModel,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "eval-code",
                config: Config { n: sh.n(), k: sh.k(), code: source, model: the_code.model() },
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(&CostReport::csv_header(), report.csv_row())),
            )
        }
        Command::SearchExhaustive { shape, objective, output } => {
            let sh = shape.shape()?;
            let objective: Objective = objective.parse()?;
            let report = exhaustive_scm_search(sh, objective)?;
            println!(
                "examined {} canonical codes; baseline: {}; best: {}; improved={}",
                report.codes_examined,
                cost_summary(&report.baseline),
                cost_summary(&report.best_found),
                report.improved
            );
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "search-exhaustive",
                config: (),
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &wemlab::search::SearchReport::csv_header(),
                    report.csv_row(),
                )),
            )
        }
        Command::SearchSwap {
            shape,
            model,
            objective,
            seed,
            iterations,
            restarts,
            wall_ms,
            output,
        } => {
            let sh = shape.shape()?;
            let m = parse_model(&model)?;
            let objective: Objective = objective.parse()?;
            let report = swap_search(sh, m, objective, seed, iterations, restarts, wall_ms)?;
            println!(
                "examined {} codes ({} isolated bits in baseline); baseline: {}; best: {}; improved={}",
                report.codes_examined,
                report.isolated_bits.len(),
                cost_summary(&report.baseline),
                cost_summary(&report.best_found),
                report.improved
            );
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "search-swap",
                config: (),
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &wemlab::search::SearchReport::csv_header(),
                    report.csv_row(),
                )),
            )
        }
        Command::SearchRedundant { shape, model, objective, seed, iterations, wall_ms, output } => {
            let sh = shape.shape()?;
            let m = parse_model(&model)?;
            let objective: Objective = objective.parse()?;
            let report = redundant_search(sh, m, objective, seed, iterations, wall_ms)?;
            println!(
                "examined {} assignments; baseline: {}; best: {}; improved={}",
                report.codes_examined,
                cost_summary(&report.baseline),
                cost_summary(&report.best_found),
                report.improved
            );
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "search-redundant",
                config: (),
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &wemlab::search::SearchReport::csv_header(),
                    report.csv_row(),
                )),
            )
        }
        Command::SemilinearVerify { matrix, output } => {
            let text = fs::read_to_string(&matrix)
                .map_err(|e| CliError(format!("cannot read {}: {e}", matrix.display())))?;
            let m = BasisMatrix::from_json(&text)?;
            let verdict = m.verify()?;
            match &verdict {
                Independence::Holds => println!("independent"),
                Independence::Violated { witness } => {
                    println!("dependent: columns {witness:?} xor to zero")
                }
            }
            #[derive(Serialize)]
            struct Report {
                holds: bool,
                witness: Option<Vec<u64>>,
            }
            let report = match verdict {
                Independence::Holds => Report { holds: true, witness: None },
                Independence::Violated { witness } => {
                    Report { holds: false, witness: Some(witness) }
                }
            };
            #[derive(Serialize)]
            struct Config {
                matrix: String,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "semilinear-verify",
                config: Config { matrix: matrix.display().to_string() },
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &["holds", "witness"],
                    vec![
                        report.holds.to_string(),
                        report
                            .witness
                            .as_ref()
                            .map(|w| {
                                w.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
                            })
                            .unwrap_or_default(),
                    ],
                )),
            )
        }
        Command::SemilinearSearch { shape, trials, seed, output } => {
            let sh = shape.shape()?;
            let report = search_matrix(sh, trials, seed)?;
            println!(
                "{} of {} trials passed; best max write cost {:?}",
                report.passing, report.trials, report.best_max_write_cost
            );
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "semilinear-search",
                config: (),
                report: &report,
            };
            emit(
                &output,
                json_document(&envelope),
                Some(single_row_csv(
                    &["n", "k", "trials", "seed", "passing", "best_max", "best_avg"],
                    vec![
                        sh.n().to_string(),
                        sh.k().to_string(),
                        report.trials.to_string(),
                        report.seed.to_string(),
                        report.passing.to_string(),
                        report.best_max_write_cost.map(|v| v.to_string()).unwrap_or_default(),
                        report.best_avg_write_cost.map(|v| v.to_string()).unwrap_or_default(),
                    ],
                )),
            )
        }
        Command::SimHash {
            config,
            n,
            k,
            blocks,
            ops,
            insert_ratio,
            encodings,
            seed,
            trace_points,
            output,
        } => {
            let workload = if let Some(path) = config {
                let text = fs::read_to_string(&path)
                    .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<WorkloadConfig>(&text)
                    .map_err(|e| CliError(format!("invalid workload config: {e}")))?
            } else {
                let parsed: Result<Vec<EncodingKind>, _> =
                    encodings.split(',').map(|e| e.trim().parse()).collect();
                WorkloadConfig {
                    shape: BlockShape::new(n, k)?,
                    blocks,
                    operations: ops,
                    insert_ratio,
                    encodings: parsed?,
                    seed,
                    trace_points,
                }
            };
            let report = run_workload(&workload)?;
            for run in &report.runs {
                println!(
                    "{:<12} ops={} flips={} flips/op={:.4} load={:.3}",
                    run.encoding.to_string(),
                    run.operations,
                    run.total_flips,
                    run.flips_per_op,
                    run.final_load_factor
                );
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "sim-hash",
                config: (),
                report: &report,
            };
            let (header, rows) = (wemlab::flipsim::FlipReport::csv_header(), report.csv_rows());
            emit(&output, json_document(&envelope), Some(csv_document(&header, &rows)))
        }
        Command::DiscrepancyReport { max_n, max_k, output } => {
            let report = discrepancy_report(max_n, max_k)?;
            print!("{}", render_discrepancy_table(&report));
            let flagged_states = report.flagged_state_rows().count();
            let flagged_transitions = report.flagged_transition_rows().count();
            println!(
                "\n{flagged_states} state rows and {flagged_transitions} transition rows disagree with the published formulas"
            );
            #[derive(Serialize)]
            struct Config {
                max_n: u32,
                max_k: u32,
            }
            let envelope = Envelope {
                tool: TOOL,
                version: VERSION,
                command: "discrepancy-report",
                config: Config { max_n, max_k },
                report: &report,
            };
            let (header, rows) = discrepancy_csv(&report);
            emit(&output, json_document(&envelope), Some(csv_document(&header, &rows)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
