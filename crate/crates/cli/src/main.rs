//! `rulex`: rule explanations and explainability audits from the command line.
//!
//! Every run writes one JSON document `{command, config_digest, seed, result}`.
//! Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
//! 3 external classifier failure.

mod digest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value as Json};

use rulex_core::classifiers::parse_model;
use rulex_core::config::{load_family, load_scheme, load_space};
use rulex_core::lab::is_explainable;
use rulex_core::measures::read_points;
use rulex_core::{
    audit, check_equivalence, explain, verify_scalable, Classifier, Error, ExplanationScheme, SearchBudget,
};

use digest::Digest;

#[derive(Parser)]
#[command(
    name = "rulex",
    version,
    about = "Rule explanations over topological explanation schemes"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for searches and audits.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the output document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a rule explaining the model's label at one point.
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        /// Point as comma-separated values in feature order.
        #[arg(long)]
        point: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Smallest acceptable coverage.
        #[arg(long, default_value_t = 0.0)]
        alpha_min: f64,
    },
    /// Run the search at many points and report where it fails.
    Audit {
        #[command(flatten)]
        inputs: Inputs,
        /// Points sampled from the measure; every point of a finite space when omitted.
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Decide explainability exactly on a finite space.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Check whether two families generate the same topology on a finite space.
    Equiv {
        #[arg(long)]
        family_a: PathBuf,
        #[arg(long)]
        family_b: PathBuf,
        /// Space document, or any scheme document whose features to use.
        #[arg(long)]
        space: PathBuf,
    },
    /// Classify every row of a CSV file.
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    /// Fidelity threshold in (0, 1].
    #[arg(long, default_value_t = 0.95)]
    tau: f64,
    #[arg(long, default_value_t = SearchBudget::default().samples_per_candidate)]
    samples: usize,
    #[arg(long, default_value_t = SearchBudget::default().confidence)]
    confidence: f64,
    #[arg(long, default_value_t = SearchBudget::default().max_expansions)]
    max_expansions: usize,
}

impl SearchArgs {
    fn budget(&self, seed: u64) -> Result<SearchBudget, Failure> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Failure::usage(format!("--tau must lie in (0, 1], got {}", self.tau)));
        }
        Ok(SearchBudget {
            samples_per_candidate: self.samples,
            confidence: self.confidence,
            max_expansions: self.max_expansions,
            seed,
            ..SearchBudget::default()
        })
    }
}

/// A run that produced no output document.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::External { .. }) { 3 } else { 2 };
        let message = match &e {
            Error::External { payload, .. } if !payload.is_empty() => format!("{e}\npayload: {payload}"),
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

/// Result document plus whether it is a negative verdict.
struct Outcome {
    result: Json,
    negative: bool,
}

fn to_json<T: Serialize>(value: &T) -> Result<Json, Failure> {
    serde_json::to_value(value).map_err(|e| Failure::usage(format!("cannot encode result: {e}")))
}

fn read_file(path: &Path, digest: &mut Digest) -> Result<String, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    digest.add_bytes(text.as_bytes());
    Ok(text)
}

fn load_inputs(inputs: &Inputs, digest: &mut Digest) -> Result<(ExplanationScheme, Classifier), Failure> {
    read_file(&inputs.scheme, digest)?;
    let scheme = load_scheme(&inputs.scheme)?;
    if let rulex_core::CoverageMeasure::Empirical(data) = scheme.measure() {
        digest.add_json(&to_json(&(data.points(), data.weights()))?);
    }
    let model = read_file(&inputs.model, digest)?;
    let f = parse_model(&model, scheme.space())?;
    Ok((scheme, f))
}

fn run(command: &Command, seed: u64, digest: &mut Digest) -> Result<(&'static str, Outcome), Failure> {
    Ok(match command {
        Command::Explain {
            inputs,
            point,
            search,
            alpha_min,
        } => {
            let (scheme, f) = load_inputs(inputs, digest)?;
            digest.add_json(&json!({"point": point, "search": to_json(search)?, "alpha_min": alpha_min}));
            let x = scheme.space().parse_point(point)?;
            let outcome = explain(&scheme, &f, &x, search.tau, *alpha_min, &search.budget(seed)?)?;
            (
                "explain",
                Outcome {
                    negative: !outcome.is_explained(),
                    result: to_json(&outcome)?,
                },
            )
        }
        Command::Audit { inputs, points, search } => {
            let (scheme, f) = load_inputs(inputs, digest)?;
            digest.add_json(&json!({"points": points, "search": to_json(search)?}));
            let report = audit(&scheme, &f, *points, search.tau, &search.budget(seed)?)?;
            (
                "audit",
                Outcome {
                    negative: !report.unexplained_points.is_empty(),
                    result: to_json(&report)?,
                },
            )
        }
        Command::Verify { inputs } => {
            let (scheme, f) = load_inputs(inputs, digest)?;
            let scalability = verify_scalable(scheme.family(), scheme.space())?;
            let (negative, result) = if scalability.is_scalable() {
                let verdict = is_explainable(&scheme, &f)?;
                (
                    !verdict.explainable,
                    json!({"scalability": to_json(&scalability)?, "explainability": to_json(&verdict)?}),
                )
            } else {
                (
                    true,
                    json!({"scalability": to_json(&scalability)?, "explainability": null}),
                )
            };
            ("verify", Outcome { result, negative })
        }
        Command::Equiv {
            family_a,
            family_b,
            space,
        } => {
            read_file(space, digest)?;
            read_file(family_a, digest)?;
            read_file(family_b, digest)?;
            let sp = load_space(space)?;
            let a = load_family(family_a, &sp)?;
            let b = load_family(family_b, &sp)?;
            let verdict = check_equivalence(&a, &b, &sp)?;
            (
                "equiv",
                Outcome {
                    negative: !verdict.equivalent,
                    result: to_json(&verdict)?,
                },
            )
        }
        Command::Eval { inputs, data } => {
            let (scheme, f) = load_inputs(inputs, digest)?;
            let text = read_file(data, digest)?;
            let (points, _) = read_points(scheme.space(), text.as_bytes(), &data.display().to_string(), false)?;
            let labels = f.evaluate_batch(&points)?;
            let rows: Vec<Json> = points
                .iter()
                .zip(labels)
                .map(|(p, k)| Ok(json!({"point": to_json(p)?, "label": to_json(&f.labels()[k])?})))
                .collect::<Result<_, Failure>>()?;
            (
                "eval",
                Outcome {
                    negative: false,
                    result: json!({"count": rows.len(), "rows": rows}),
                },
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot start {n} workers: {e}")))?;
    }
    let mut digest = Digest::new();
    let (command, outcome) = run(&cli.command, cli.seed, &mut digest)?;
    digest.add_json(&json!({"command": command, "seed": cli.seed}));
    let doc = json!({
        "command": command,
        "config_digest": digest.finish(),
        "seed": cli.seed,
        "result": outcome.result,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::usage(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(u8::from(outcome.negative))
}
