//! The `kginv` command line.
//!
//! Exit codes: `0` valid (or success), `2` not valid, `1` error or budget
//! exhausted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::formula::{parse, Formula};
use crate::fuzz::{self, FuzzConfig};
use crate::models::{load_model, model_to_json, save_model, LoadedModel};
use crate::oracle::{prop_counterexample, refute_small, standard_prop_eval, RefuteBounds};
use crate::rational::format_rational;
use crate::solver::Betweenness;
use crate::tableau::{prove, to_dot, ProveConfig, ProveError, Strategy, Verdict, DEFAULT_BUDGET};

pub const EXIT_VALID: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_VALID: u8 = 2;

pub const CRISP_BANNER: &str =
    "note: crisp mode is an experimental extension (crisp side conditions in the solver; the rules are unchanged)";

#[derive(Parser, Debug)]
#[command(
    name = "kginv",
    version,
    about = "Constraint tableau prover for Gödel modal logic with involutive negation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide validity; prints a countermodel when the formula is not valid.
    Prove(ProveArgs),
    /// Evaluate a formula at a world of a model file.
    Eval {
        model: PathBuf,
        world: String,
        /// Formula text, or @file.
        formula: String,
        /// Evaluate illegal F-models anyway.
        #[arg(long)]
        override_validation: bool,
    },
    /// Report the legality violations of a model file.
    CheckModel { model: PathBuf },
    /// Parse and print a formula with its core form and metrics.
    Parse { formula: String },
    /// Check formulas without the tableau.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run the seeded cross-check suites.
    Fuzz(FuzzArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Full,
    OnTheFly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BetweennessArg {
    Consecutive,
    Literal,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Restrict accessibility to 0 and 1.
    #[arg(long)]
    pub crisp: bool,
    #[arg(long, value_enum, default_value = "full")]
    pub strategy: StrategyArg,
    /// Maximum number of rule applications.
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_nodes: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_seconds: Option<u64>,
    #[arg(long, value_enum, default_value = "consecutive")]
    pub betweenness: BetweennessArg,
    /// Explore every alternative of a split even when a sibling closed
    /// without using it.
    #[arg(long)]
    pub no_backjump: bool,
}

impl RunArgs {
    fn config(&self, trace: bool) -> ProveConfig {
        ProveConfig {
            crisp: self.crisp,
            strategy: match self.strategy {
                StrategyArg::Full => Strategy::Full,
                StrategyArg::OnTheFly => Strategy::OnTheFly,
            },
            budget: self.budget_nodes,
            time_limit: self.budget_seconds.map(Duration::from_secs),
            betweenness: match self.betweenness {
                BetweennessArg::Consecutive => Betweenness::Consecutive,
                BetweennessArg::Literal => Betweenness::Literal,
            },
            trace,
            backjumping: !self.no_backjump,
        }
    }
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    /// Formula text, or @file.
    pub formula: String,
    #[command(flatten)]
    pub run: RunArgs,
    /// Write the countermodel as JSON.
    #[arg(long)]
    pub emit_model: Option<PathBuf>,
    /// Write the countermodel as Graphviz DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Print the numbered constraint trace.
    #[arg(long)]
    pub trace: bool,
    /// Write the inequality system of the open branch.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Grid validity of a modality-free formula.
    Prop { formula: String },
    /// Search small F-models for a countermodel.
    Refute {
        formula: String,
        #[arg(long, default_value_t = 2)]
        worlds: usize,
        #[arg(long, default_value_t = 2)]
        denominator: u32,
        #[arg(long, default_value_t = 3)]
        max_t: usize,
        #[arg(long)]
        crisp: bool,
        #[arg(long)]
        emit_model: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    #[arg(long, default_value_t = 500)]
    pub prop_count: usize,
    #[arg(long, default_value_t = 200)]
    pub modal_count: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Formula text, reading `@path` from disk.
fn formula_text(arg: &str) -> Result<String, String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| format!("cannot read {path}: {e}")),
        None => Ok(arg.to_string()),
    }
}

fn read_formula(arg: &str) -> Result<Formula, String> {
    let text = formula_text(arg)?;
    parse(&text).map_err(|e| format!("{e}\n  {text}\n  {}^", " ".repeat(e.position)))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Runs one command. Diagnostics go to `err`, everything else to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_VALID };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<u8, String> {
    match command {
        Command::Prove(args) => cmd_prove(&args, out),
        Command::Eval {
            model,
            world,
            formula,
            override_validation,
        } => cmd_eval(&model, &world, &formula, override_validation, out),
        Command::CheckModel { model } => cmd_check_model(&model, out),
        Command::Parse { formula } => cmd_parse(&formula, out),
        Command::Oracle(OracleCommand::Prop { formula }) => {
            let phi = read_formula(&formula)?;
            match prop_counterexample(&phi, &standard_prop_eval).map_err(|e| e.to_string())? {
                None => {
                    say(out, "VALID")?;
                    Ok(EXIT_VALID)
                }
                Some(v) => {
                    let shown: Vec<String> = v.iter().map(|(p, x)| format!("{p} = {}", format_rational(x))).collect();
                    say(out, &format!("NOT VALID\nvaluation: {}", shown.join(", ")))?;
                    Ok(EXIT_NOT_VALID)
                }
            }
        }
        Command::Oracle(OracleCommand::Refute {
            formula,
            worlds,
            denominator,
            max_t,
            crisp,
            emit_model,
        }) => {
            let phi = read_formula(&formula)?;
            let bounds = RefuteBounds {
                max_worlds: worlds,
                denominator,
                max_t_size: max_t,
                crisp,
            };
            match refute_small(&phi, &bounds) {
                None => {
                    say(out, "no countermodel within bounds")?;
                    Ok(EXIT_VALID)
                }
                Some(m) => {
                    let value = m.eval(&m.worlds()[0], &phi).map_err(|e| e.to_string())?;
                    let loaded = LoadedModel::F(m);
                    say(out, &format!("countermodel, value {}", format_rational(&value)))?;
                    emit(&loaded, emit_model.as_deref(), out)?;
                    Ok(EXIT_NOT_VALID)
                }
            }
        }
        Command::Fuzz(args) => cmd_fuzz(&args, out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<(), String> {
    writeln!(out, "{text}").map_err(|e| e.to_string())
}

/// Writes the model to `path`, or prints it when there is none.
fn emit(model: &LoadedModel, path: Option<&Path>, out: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => save_model(p, model).map_err(|e| e.to_string()),
        None => say(out, model_to_json(model).trim_end()),
    }
}

pub fn cmd_prove(args: &ProveArgs, out: &mut dyn Write) -> Result<u8, String> {
    let phi = read_formula(&args.formula)?;
    let config = args.run.config(args.trace);
    if config.crisp {
        say(out, CRISP_BANNER)?;
    }
    let report = match prove(&phi, &config) {
        Ok(r) => r,
        Err(e @ (ProveError::Budget(_) | ProveError::Time(_))) => return Err(format!("resource limit: {e}")),
        Err(e) => return Err(e.to_string()),
    };
    if let Some(trace) = &report.trace {
        out.write_all(trace.as_bytes()).map_err(|e| e.to_string())?;
    }
    let stats = format!(
        "rule applications: {}\nclosed branches: {}\nskipped branches: {}\npeak live constraints: {}",
        report.stats.applications, report.stats.closed_branches, report.stats.skipped_branches, report.stats.peak_live
    );
    match &report.verdict {
        Verdict::Valid => {
            say(out, &format!("VALID\n{stats}"))?;
            if let Some(p) = &args.dump_lp {
                write_file(p, "# all branches closed\n")?;
            }
            Ok(EXIT_VALID)
        }
        Verdict::NotValid(cm) => {
            say(
                out,
                &format!(
                    "NOT VALID\n{stats}\ncountermodel: {} worlds, value {} at {}",
                    cm.model.worlds().len(),
                    format_rational(&cm.value),
                    cm.witness
                ),
            )?;
            let loaded = LoadedModel::F(cm.model.clone());
            emit(&loaded, args.emit_model.as_deref(), out)?;
            if let Some(p) = &args.dot {
                write_file(p, &to_dot(&cm.model))?;
            }
            if let Some(p) = &args.dump_lp {
                let mut text = cm.solution.system.dump();
                text.push_str("# solver witness\n");
                for (i, x) in cm.solution.values.iter().enumerate() {
                    text.push_str(&format!("# x{i} = {}\n", format_rational(x)));
                }
                write_file(p, &text)?;
            }
            Ok(EXIT_NOT_VALID)
        }
    }
}

pub fn cmd_eval(
    model: &Path,
    world: &str,
    formula: &str,
    override_validation: bool,
    out: &mut dyn Write,
) -> Result<u8, String> {
    let phi = read_formula(formula)?;
    let loaded = load_model(model).map_err(|e| e.to_string())?;
    let value = match &loaded {
        LoadedModel::Standard(m) => m.eval(world, &phi),
        LoadedModel::F(m) if override_validation => m.eval_unchecked(world, &phi),
        LoadedModel::F(m) => m.eval(world, &phi),
    }
    .map_err(|e| e.to_string())?;
    say(out, &format_rational(&value))?;
    Ok(EXIT_VALID)
}

pub fn cmd_check_model(model: &Path, out: &mut dyn Write) -> Result<u8, String> {
    match load_model(model).map_err(|e| e.to_string())? {
        LoadedModel::Standard(m) => {
            say(out, &format!("standard model, {} worlds", m.worlds().len()))?;
            Ok(EXIT_VALID)
        }
        LoadedModel::F(m) => {
            let violations = m.validate();
            if violations.is_empty() {
                say(out, &format!("legal F-model, {} worlds", m.worlds().len()))?;
                return Ok(EXIT_VALID);
            }
            for v in &violations {
                say(out, &format!("violation: {v}"))?;
            }
            Ok(EXIT_ERROR)
        }
    }
}

pub fn cmd_parse(formula: &str, out: &mut dyn Write) -> Result<u8, String> {
    let phi = read_formula(formula)?;
    let m = phi.metrics();
    say(
        out,
        &format!(
            "{}\ncore: {}\nlength: {}\nmodal depth: {}\natoms: {}",
            phi.render(),
            phi.desugar().render(),
            m.length,
            m.modal_depth,
            m.atom_count
        ),
    )?;
    Ok(EXIT_VALID)
}

pub fn cmd_fuzz(args: &FuzzArgs, out: &mut dyn Write) -> Result<u8, String> {
    let config = FuzzConfig {
        seed: args.seed,
        prop_count: args.prop_count,
        modal_count: args.modal_count,
        prove: args.run.config(false),
        threads: args.threads as usize,
        ..FuzzConfig::default()
    };
    if config.prove.crisp {
        say(out, CRISP_BANNER)?;
    }
    let report = fuzz::run(&config);
    say(out, &report.to_string())?;
    Ok(if report.passed() { EXIT_VALID } else { EXIT_ERROR })
}
