//! Command-line front end.
//!
//! Exit codes: 0 when the verdict matches the mode (closed for `--prove`,
//! open for `--sat`), 1 for the opposite verdict, 2 when a bound tripped,
//! 3 when the run is unsupported, 64 on usage or parse errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{parse, Formula};
use crate::frame::{parse_horn, preset, FrameCondition};
use crate::semantics::random_model_with_vars;
use crate::tableau::{run, Bounds, ProverResult, Verdict};

pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Dot,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "iltab",
    version,
    about = "Labelled tableau prover for Horn interpretability logics"
)]
struct Args {
    /// Formula to prove (the tableau starts from its negation)
    #[arg(long, conflicts_with = "sat", required_unless_present = "sat")]
    prove: Option<String>,
    /// `;`-separated formulas to test for joint satisfiability
    #[arg(long)]
    sat: Option<String>,
    /// Preset logic: il, ilm or ilp
    #[arg(long, conflicts_with = "frames")]
    logic: Option<String>,
    /// File of Horn clauses, one per line
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Stop with `exhausted` after this many stages
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    max_stages: u64,
    /// Stop with `exhausted` when a branch would need more labels
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_labels: u64,
    /// Stop with `exhausted` when more branches are open at once
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    max_branches: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
    /// Include the tableau in text and json output
    #[arg(long)]
    dump_tableau: bool,
    /// Seed for --spot-check sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// After a successful proof, evaluate the goal on this many random models
    #[arg(long, default_value_t = 0)]
    spot_check: usize,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Prove,
    Sat,
}

#[derive(Debug, Clone)]
pub enum LogicSource {
    Preset(String),
    Frames(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub formulas: String,
    pub logic: LogicSource,
    pub bounds: Bounds,
    pub output: OutputFormat,
    pub dump_tableau: bool,
    pub seed: u64,
    pub spot_check: usize,
    pub out: Option<PathBuf>,
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        let (mode, formulas) = match (a.prove, a.sat) {
            (Some(f), _) => (Mode::Prove, f),
            (None, Some(f)) => (Mode::Sat, f),
            (None, None) => unreachable!("clap enforces one of --prove/--sat"),
        };
        let logic = match a.frames {
            Some(path) => LogicSource::Frames(path),
            None => LogicSource::Preset(a.logic.unwrap_or_else(|| "il".into())),
        };
        RunConfig {
            mode,
            formulas,
            logic,
            bounds: Bounds {
                max_stages: a.max_stages as usize,
                max_labels_per_branch: a.max_labels as usize,
                max_branches: a.max_branches as usize,
            },
            output: a.output,
            dump_tableau: a.dump_tableau,
            seed: a.seed,
            spot_check: a.spot_check,
            out: a.out,
        }
    }
}

fn load_condition(src: &LogicSource) -> Result<FrameCondition, String> {
    match src {
        LogicSource::Preset(name) => preset(name).map_err(|e| e.to_string()),
        LogicSource::Frames(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let name = path.file_stem().map_or_else(
                || "custom".to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            parse_horn(&text)
                .map(|c| c.with_name(name))
                .map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

fn parse_inputs(mode: Mode, text: &str) -> Result<Vec<Formula>, String> {
    let pieces: Vec<&str> = match mode {
        Mode::Prove => vec![text],
        Mode::Sat => text
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect(),
    };
    if pieces.is_empty() {
        return Err("no formulas given".into());
    }
    pieces
        .into_iter()
        .map(|s| parse(s).map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

/// Evaluates `goal` on `samples` random frames of the logic. Returns the
/// number of models on which it failed somewhere.
fn spot_check(goal: &Formula, condition: &FrameCondition, samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<String> = goal.variables().into_iter().collect();
    (0..samples)
        .filter(|_| {
            let n = rng.gen_range(1..=6);
            match random_model_with_vars(n, condition, rng.gen(), &vars) {
                Ok(m) => !m.validates(goal).unwrap_or(true),
                Err(_) => false,
            }
        })
        .count()
}

fn exit_code(mode: Mode, verdict: &Verdict) -> i32 {
    match (mode, verdict) {
        (Mode::Prove, Verdict::Closed) | (Mode::Sat, Verdict::Open { .. }) => 0,
        (_, Verdict::Closed | Verdict::Open { .. }) => 1,
        (_, Verdict::Exhausted) => 2,
        (_, Verdict::Unsupported(_)) => 3,
    }
}

fn render(
    cfg: &RunConfig,
    result: &ProverResult,
    formula: &str,
    logic: &str,
    spot: Option<usize>,
) -> String {
    match cfg.output {
        OutputFormat::Dot => result.tableau.render_dot(),
        OutputFormat::Json => {
            let mut value =
                serde_json::to_value(result.record(formula, logic)).expect("record serializes");
            if let Some(bad) = spot {
                value["spot_check"] = serde_json::json!({ "samples": cfg.spot_check, "seed": cfg.seed, "failures": bad });
            }
            if cfg.dump_tableau {
                value["tableau"] = result.tableau.render_text().into();
            }
            format!("{value}\n")
        }
        OutputFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("status: {}\n", result.verdict.status()));
            out.push_str(&format!("logic: {logic}\n"));
            out.push_str(&format!("formula: {formula}\n"));
            out.push_str(&format!("stages: {}\n", result.stages));
            out.push_str(&format!("labels: {}\n", result.tableau.max_labels()));
            if let Verdict::Unsupported(reason) = &result.verdict {
                out.push_str(&format!("reason: {reason}\n"));
            }
            if let Some(bad) = spot {
                out.push_str(&format!(
                    "spot-check: {} models (seed {}), {bad} failures\n",
                    cfg.spot_check, cfg.seed
                ));
            }
            if let Some(model) = result.model() {
                out.push_str("countermodel:\n");
                out.push_str(&model.to_text());
            }
            if cfg.dump_tableau {
                out.push_str("tableau:\n");
                out.push_str(&result.tableau.render_text());
            }
            out
        }
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let cfg = RunConfig::from(args);
    let usage = |stderr: &mut dyn Write, msg: String| {
        let _ = writeln!(stderr, "error: {msg}");
        EXIT_USAGE
    };
    let condition = match load_condition(&cfg.logic) {
        Ok(c) => c,
        Err(e) => return usage(stderr, e),
    };
    let inputs = match parse_inputs(cfg.mode, &cfg.formulas) {
        Ok(f) => f,
        Err(e) => return usage(stderr, e),
    };
    let gamma: Vec<Formula> = match cfg.mode {
        Mode::Prove => vec![Formula::neg(inputs[0].clone())],
        Mode::Sat => inputs.clone(),
    };
    let result = match run(&gamma, &condition, cfg.bounds) {
        Ok(r) => r,
        Err(e) => return usage(stderr, e.to_string()),
    };
    let spot = (cfg.mode == Mode::Prove && cfg.spot_check > 0 && result.verdict.is_closed())
        .then(|| spot_check(&inputs[0], &condition, cfg.spot_check, cfg.seed));
    let formula_text = inputs
        .iter()
        .map(Formula::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    let text = render(&cfg, &result, &formula_text, condition.name(), spot);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return usage(stderr, format!("{}: {e}", path.display()));
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    exit_code(cfg.mode, &result.verdict)
}
