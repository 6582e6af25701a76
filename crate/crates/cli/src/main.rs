//! `mse` — command-line front end for multiset estimates, morphological
//! synthesis and knapsack selection.
//!
//! Exit status: 0 on success, 1 for domain or validation errors, 2 for I/O
//! or schema errors, 64 for usage errors.

mod render;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mset_core::io::{parse_estimate, parse_problem, Problem};
use mset_core::knapsack::{self, CardinalityOrder, GroupMode, ObjectiveMode};
use mset_core::synthesis::{self, Retention, SynthesisMode, TiePolicy};
use mset_core::*;

const EXIT_DOMAIN: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "mse", version, about = "Interval multiset estimates: ordering, medians, synthesis and knapsack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Dot => "dot",
        }
    }
}

#[derive(Args, Clone, Copy)]
struct ModeFlags {
    /// Require occupied levels to be contiguous (default).
    #[arg(long, conflicts_with = "relaxed")]
    strict: bool,
    /// Accept any count vector with the right total.
    #[arg(long)]
    relaxed: bool,
}

impl ModeFlags {
    fn mode(self) -> ValidationMode {
        if self.relaxed {
            ValidationMode::Relaxed
        } else {
            ValidationMode::Strict
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    /// Same-cardinality componentwise dominance.
    Standard,
    /// Replicate both sides to a common cardinality.
    Mixed,
    /// Unnormalised cumulative counts.
    Cumulative,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Generalized,
    Set,
}

#[derive(Subcommand)]
enum Command {
    /// Check an estimate literal, or a whole problem file.
    Validate {
        /// Count vector `[1,2,0]` or `{"elements":[1,2,2],"levels":3}`.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        estimate: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        /// Expected cardinality (defaults to the literal's own total).
        #[arg(long)]
        cardinality: Option<u32>,
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List every estimate of a scale, best first.
    Enumerate {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        cardinality: u32,
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Hasse diagram of a scale, or of the estimates in a set file.
    Poset {
        #[arg(long, required_unless_present = "input")]
        levels: Option<usize>,
        #[arg(long, required_unless_present = "input")]
        cardinality: Option<u32>,
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long, conflicts_with_all = ["levels", "cardinality"])]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Proximity δ(a, b) as (improvements, degradations).
    Proximity {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare two estimates.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "standard")]
        order: OrderArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Median of an estimate set; CSV output is the total-proximity table.
    Median {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "generalized")]
        kind: KindArg,
        /// Search domain of the generalized median.
        #[arg(long, value_enum, default_value = "strict")]
        domain: DomainArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Embed an estimate into a larger scale.
    Align {
        #[arg(long)]
        estimate: String,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        cardinality: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Morphological synthesis of a system or a system tree.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        /// Override the system estimate mode.
        #[arg(long, value_enum)]
        mode: Option<SynthesisArg>,
        #[arg(long)]
        w_min: Option<u32>,
        /// Report every admissible composite, not only the Pareto set.
        #[arg(long)]
        all: bool,
        /// Dominance must hold against every tied median.
        #[arg(long)]
        all_medians: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Knapsack or multiple-choice selection.
    Knapsack {
        #[arg(long)]
        input: PathBuf,
        /// Override the budget (one fractional digit at most).
        #[arg(long)]
        budget: Option<String>,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        #[arg(long, value_enum)]
        group_mode: Option<GroupArg>,
        #[arg(long, value_enum)]
        order: Option<CardinalityArg>,
        /// Solve by exhaustive enumeration instead.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthesisArg {
    BasicCounts,
    Integrated,
    SetMedian,
    GeneralizedMedian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Scalar,
    Integrated,
    GeneralizedMedian,
    SetMedian,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    None,
    ExactlyOne,
    AtMostOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum CardinalityArg {
    Cumulative,
    Proportional,
}

enum Failure {
    Usage(String),
    Core(Error),
    /// Already reported on stdout (e.g. a failed validation).
    Reported(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("mse: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_INPUT);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("mse: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Reported(code)) => ExitCode::from(code),
        Err(Failure::Core(e)) => {
            eprintln!("mse: error[{}]: {}", render::error_kind(&e), render::error_message(&e));
            ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { EXIT_DOMAIN })
        }
    }
}

/// `MSE_THREADS` caps the worker pool; 0 means sequential.
fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("MSE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("MSE_THREADS must be a non-negative integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .map_err(|e| format!("cannot configure thread pool: {e}"))
}

fn allow(cmd: &str, format: Format, allowed: &[Format]) -> std::result::Result<(), Failure> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let names: Vec<&str> = allowed.iter().map(|f| f.name()).collect();
        Err(Failure::Usage(format!(
            "{cmd} does not support --format {}; use one of: {}",
            format.name(),
            names.join(", ")
        )))
    }
}

fn read(path: &Path) -> std::result::Result<Problem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_problem(&text)?)
}

/// An estimate literal on an optional fixed number of levels.
fn literal(text: &str, levels: Option<usize>) -> Result<MultisetEstimate> {
    let e = parse_estimate(text, None, ValidationMode::Relaxed)?;
    match levels {
        Some(l) if l != e.levels() => Err(Error::LengthMismatch {
            expected: l,
            found: e.levels(),
        }),
        _ => Ok(e),
    }
}

fn run(cmd: Command) -> Outcome {
    use Format::*;
    match cmd {
        Command::Validate {
            estimate,
            levels,
            cardinality,
            mode,
            input,
            format,
        } => {
            allow("validate", format, &[Text, Json])?;
            if let Some(path) = input {
                let p = read(&path)?;
                return Ok(render::problem_summary(&p, format == Json));
            }
            let e = literal(estimate.as_deref().unwrap_or_default(), levels)?;
            let scale = ScaleSpec::new(e.levels(), cardinality.unwrap_or(e.cardinality()))?;
            let v = validate_estimate(e.counts(), scale, mode.mode())?;
            let out = render::validation(&e, scale, mode.mode(), &v, format == Json);
            if v.is_ok() {
                Ok(out)
            } else {
                print!("{out}");
                Err(Failure::Reported(EXIT_DOMAIN))
            }
        }
        Command::Enumerate {
            levels,
            cardinality,
            mode,
            format,
        } => {
            allow("enumerate", format, &[Text, Json, Csv])?;
            let all = enumerate(ScaleSpec::new(levels, cardinality)?, mode.mode())?;
            Ok(render::estimate_list(&all, levels, format))
        }
        Command::Poset {
            levels,
            cardinality,
            mode,
            input,
            format,
        } => {
            allow("poset", format, &[Text, Json, Dot])?;
            let g = match input {
                Some(path) => match read(&path)? {
                    Problem::EstimateSet(set) => hasse_of(&set.estimates)?,
                    _ => return Err(Error::schema("", "poset --input expects an estimate set").into()),
                },
                None => hasse(
                    ScaleSpec::new(levels.unwrap_or_default(), cardinality.unwrap_or_default())?,
                    mode.mode(),
                )?,
            };
            Ok(render::poset(&g, format))
        }
        Command::Proximity { a, b, levels, format } => {
            allow("proximity", format, &[Text, Json])?;
            let p = proximity(&literal(&a, levels)?, &literal(&b, levels)?)?;
            Ok(if format == Json {
                render::json_line(&serde_json::json!({ "proximity": p, "magnitude": p.magnitude() }))
            } else {
                format!("{p}\n")
            })
        }
        Command::Compare {
            a,
            b,
            levels,
            order,
            format,
        } => {
            allow("compare", format, &[Text, Json])?;
            let (a, b) = (literal(&a, levels)?, literal(&b, levels)?);
            let c = match order {
                OrderArg::Standard => compare(&a, &b)?,
                OrderArg::Mixed => compare_mixed(&a, &b)?,
                OrderArg::Cumulative => compare_cumulative(&a, &b)?,
            };
            Ok(if format == Json {
                render::json_line(&serde_json::json!({ "a": a, "b": b, "comparison": c }))
            } else {
                format!("{c}\n")
            })
        }
        Command::Median {
            input,
            kind,
            domain,
            format,
        } => {
            allow("median", format, &[Text, Json, Csv])?;
            let set = match read(&input)? {
                Problem::EstimateSet(s) => s,
                _ => return Err(Error::schema("", "median expects an estimate set").into()),
            };
            let domain = match domain {
                DomainArg::Strict => ValidationMode::Strict,
                DomainArg::Relaxed => ValidationMode::Relaxed,
            };
            let r = match kind {
                KindArg::Generalized => generalized_median(&set.estimates, domain)?,
                KindArg::Set => set_median(&set.estimates)?,
            };
            let d = deviation(&r.canonical, &set.estimates)?;
            Ok(match format {
                Csv => render::upsilon_csv(&r, &set.estimates)?,
                Json => render::json_line(&serde_json::json!({ "median": r, "deviation": d })),
                _ => render::median_text(&r, &d),
            })
        }
        Command::Align {
            estimate,
            levels,
            cardinality,
            format,
        } => {
            allow("align", format, &[Text, Json])?;
            let e = literal(&estimate, None)?;
            let a = align(&e, ScaleSpec::new(levels, cardinality)?)?;
            Ok(if format == Json {
                render::json_line(&serde_json::json!({ "from": e, "to": a }))
            } else {
                format!("{a}\n")
            })
        }
        Command::Synthesize {
            input,
            mode,
            w_min,
            all,
            all_medians,
            format,
        } => {
            allow("synthesize", format, &[Text, Json, Dot])?;
            let patch = |o: &mut synthesis::SynthesisOptions| {
                if let Some(m) = mode {
                    o.mode = match m {
                        SynthesisArg::BasicCounts => SynthesisMode::BasicCounts,
                        SynthesisArg::Integrated => SynthesisMode::Integrated,
                        SynthesisArg::SetMedian => SynthesisMode::SetMedian,
                        SynthesisArg::GeneralizedMedian => SynthesisMode::GeneralizedMedian,
                    };
                }
                if let Some(w) = w_min {
                    o.w_min = w;
                }
                if all_medians {
                    o.tie_policy = TiePolicy::AllMedians;
                }
            };
            match read(&input)? {
                Problem::System(sys, mut opts) => {
                    patch(&mut opts);
                    let admissible = synthesis::scored_compositions(&sys, &opts)?;
                    let shown = if all {
                        admissible.clone()
                    } else {
                        synthesis::pareto_solutions(&sys, &opts)?
                    };
                    Ok(render::system(&opts, admissible.len(), &shown, all, format)?)
                }
                Problem::Tree(mut tree) => {
                    // Overrides apply to the root only; inner nodes keep
                    // their own settings.
                    if let Some(root) = tree.nodes.iter_mut().find(|n| n.name == tree.root) {
                        patch(&mut root.options);
                        if all {
                            root.retention = Retention::AllAdmissible;
                        }
                    }
                    let results = synthesis::hierarchical_synthesize(&tree)?;
                    Ok(render::tree(&tree, &results, format)?)
                }
                _ => Err(Error::schema("", "synthesize expects a system or a system tree").into()),
            }
        }
        Command::Knapsack {
            input,
            budget,
            objective,
            group_mode,
            order,
            oracle,
            format,
        } => {
            allow("knapsack", format, &[Text, Json, Csv])?;
            let mut inst = match read(&input)? {
                Problem::Knapsack(k) => k,
                _ => return Err(Error::schema("", "knapsack expects a knapsack instance").into()),
            };
            if let Some(b) = budget {
                inst.budget = b.parse().map_err(|e: Error| Failure::Usage(format!("--budget: {e}")))?;
            }
            if let Some(o) = objective {
                inst.objective = match o {
                    ObjectiveArg::Scalar => ObjectiveMode::Scalar,
                    ObjectiveArg::Integrated => ObjectiveMode::Integrated,
                    ObjectiveArg::GeneralizedMedian => ObjectiveMode::GeneralizedMedian,
                    ObjectiveArg::SetMedian => ObjectiveMode::SetMedian,
                };
            }
            if let Some(g) = group_mode {
                inst.group_mode = match g {
                    GroupArg::None => GroupMode::None,
                    GroupArg::ExactlyOne => GroupMode::ExactlyOne,
                    GroupArg::AtMostOne => GroupMode::AtMostOne,
                };
            }
            if let Some(o) = order {
                inst.order = match o {
                    CardinalityArg::Cumulative => CardinalityOrder::Cumulative,
                    CardinalityArg::Proportional => CardinalityOrder::Proportional,
                };
            }
            let sols = if oracle {
                knapsack::brute_force_oracle(&inst)?
            } else {
                knapsack::solve(&inst)?
            };
            Ok(render::knapsack(&inst, &sols, format)?)
        }
    }
}
