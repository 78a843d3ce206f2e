use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use pfj::approx::{analyze_termination, approximants_with, TerminationVerdict};
use pfj::eval::{reduce, Outcome};
use pfj::parser::{parse_predicate, parse_program, ParseError};
use pfj::predicates::{
    check_predicate, infer_with_derivations, Bounds, PredEnv, PredicateError, Verdict, DEFAULT_DEPTH,
};
use pfj::program::{check_program, CheckFailure, CheckedProgram};
use pfj::syntax::Expr;

const OK: u8 = 0;
const CHECK_FAILED: u8 = 1;
const IO_OR_SYNTAX: u8 = 2;
const BUDGET_EXHAUSTED: u8 = 3;
const STUCK_NULL: u8 = 4;
const NOT_PROVEN: u8 = 5;

#[derive(Parser)]
#[command(
    name = "pfj",
    version,
    about = "Type, run and reason about behavioural predicates of small class-based programs"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for reduct enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness, method typing and the type of main.
    Check(FileArg),
    /// Reduce the main expression.
    Run {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Print every intermediate expression.
        #[arg(long)]
        trace: bool,
    },
    /// Search for a derivation assigning a predicate to main.
    Pred {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        pred: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Print the derivation.
        #[arg(long)]
        explain: bool,
    },
    /// List every predicate derivable for main within the depth bound.
    Infer {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// List approximants of main reachable within a step budget.
    Approx {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Look for a normal predicate guaranteeing a head normal form.
    Analyze {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        explain: bool,
    },
}

#[derive(Args)]
struct FileArg {
    file: PathBuf,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicates: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivation: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witnesses: Option<Vec<String>>,
    budgets: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    messages: Vec<String>,
    #[serde(skip)]
    lines: Vec<String>,
    #[serde(skip)]
    code: u8,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report {
            command,
            verdict: String::new(),
            predicate: None,
            predicates: None,
            derivation: None,
            witnesses: None,
            budgets: Map::new(),
            messages: Vec::new(),
            lines: Vec::new(),
            code: OK,
        }
    }

    fn budget(mut self, key: &str, value: usize) -> Report {
        self.budgets.insert(key.into(), json!(value));
        self
    }

    fn verdict(mut self, verdict: impl Into<String>, code: u8) -> Report {
        self.verdict = verdict.into();
        self.code = code;
        self
    }

    fn line(&mut self, l: impl Into<String>) {
        self.lines.push(l.into());
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Style {
        Style { color: std::env::var("PFJ_COLOR").is_ok_and(|v| v == "1") }
    }

    fn verdict(&self, v: &str, code: u8) -> String {
        if !self.color {
            return v.to_string();
        }
        let c = if code == OK { 32 } else { 31 };
        format!("\x1b[{c}m{v}\x1b[0m")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let report = dispatch(&cli.command, cli.jobs > 1);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    } else {
        let style = Style::from_env();
        for l in &report.lines {
            println!("{l}");
        }
        if !report.verdict.is_empty() {
            println!("{}", style.verdict(&report.verdict, report.code));
        }
        for m in &report.messages {
            eprintln!("{m}");
        }
    }
    ExitCode::from(report.code)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check(_) => "check",
        Command::Run { .. } => "run",
        Command::Pred { .. } => "pred",
        Command::Infer { .. } => "infer",
        Command::Approx { .. } => "approx",
        Command::Analyze { .. } => "analyze",
    }
}

fn file_of(cmd: &Command) -> &Path {
    match cmd {
        Command::Check(f)
        | Command::Run { file: f, .. }
        | Command::Pred { file: f, .. }
        | Command::Infer { file: f, .. }
        | Command::Approx { file: f, .. }
        | Command::Analyze { file: f, .. } => &f.file,
    }
}

fn dispatch(cmd: &Command, parallel: bool) -> Report {
    let name = command_name(cmd);
    let path = file_of(cmd);
    let checked = match load(path) {
        Ok(c) => c,
        Err(Load::Io(msg)) => {
            let mut r = Report::new(name).verdict("io-error", IO_OR_SYNTAX);
            r.messages.push(msg);
            return r;
        }
        Err(Load::Syntax(err)) => {
            let mut r = Report::new(name).verdict("syntax-error", IO_OR_SYNTAX);
            r.messages.push(format!("{}:{err}", path.display()));
            return r;
        }
        Err(Load::Check(fail)) => {
            let mut r = Report::new(name).verdict("check-failed", CHECK_FAILED);
            r.messages = fail.messages();
            return r;
        }
    };
    match cmd {
        Command::Check(_) => {
            let mut r = Report::new(name).verdict("ok", OK);
            r.line("well-formed: ok");
            r.line("method typing: ok");
            r.line(format!("main : {}", checked.main_type));
            r
        }
        Command::Run { max_steps, trace, .. } => run(&checked, *max_steps, *trace),
        Command::Pred { pred, depth, explain, .. } => pred_cmd(&checked, pred, *depth, *explain),
        Command::Infer { depth, .. } => infer(&checked, *depth),
        Command::Approx { steps, .. } => approx(&checked, *steps, parallel),
        Command::Analyze { depth, steps, explain, .. } => analyze(&checked, *depth, *steps, *explain),
    }
}

enum Load {
    Io(String),
    Syntax(ParseError),
    Check(CheckFailure),
}

fn load(path: &Path) -> Result<CheckedProgram, Load> {
    let src = std::fs::read_to_string(path).map_err(|e| Load::Io(format!("{}: {e}", path.display())))?;
    let program = parse_program(&src).map_err(Load::Syntax)?;
    check_program(program).map_err(Load::Check)
}

fn run(checked: &CheckedProgram, max_steps: usize, trace: bool) -> Report {
    let mut r = Report::new("run").budget("max_steps", max_steps);
    let red = match reduce(&checked.ec, &checked.program.main, max_steps, trace) {
        Ok(red) => red,
        Err(e) => {
            r.messages.push(e.to_string());
            return r.verdict("error", CHECK_FAILED);
        }
    };
    for (i, e) in red.trace.iter().enumerate() {
        r.line(format!("{i}: {e}"));
    }
    r.line(red.expr.to_string());
    r.line(format!("steps: {}", red.steps));
    r.witnesses = Some(vec![red.expr.to_string()]);
    r.budgets.insert("steps_taken".into(), json!(red.steps));
    let code = match red.outcome {
        Outcome::Normal => OK,
        Outcome::BudgetExhausted => BUDGET_EXHAUSTED,
        Outcome::StuckNull => STUCK_NULL,
        Outcome::StuckOpen => CHECK_FAILED,
    };
    r.verdict(red.outcome.tag(), code)
}

fn predicate_error(mut r: Report, e: PredicateError) -> Report {
    let code = match e {
        PredicateError::UniverseTooLarge { .. } => BUDGET_EXHAUSTED,
        _ => CHECK_FAILED,
    };
    r.messages.push(e.to_string());
    r.verdict("error", code)
}

fn pred_cmd(checked: &CheckedProgram, src: &str, depth: usize, explain: bool) -> Report {
    let mut r = Report::new("pred").budget("depth", depth);
    let p = match parse_predicate(src) {
        Ok(p) => p,
        Err(e) => {
            r.messages.push(format!("predicate: {e}"));
            return r.verdict("ill-formed-query", CHECK_FAILED);
        }
    };
    r.predicate = Some(p.to_string());
    let class = checked.main_class();
    match check_predicate(&checked.ec, &PredEnv::new(), &checked.program.main, &class, &p, depth) {
        Ok(Verdict::Proven(d)) => {
            r.line(format!("{} : {} : {}", checked.program.main, class, p));
            if explain {
                r.line(d.to_text().trim_end().to_string());
            }
            r.derivation = Some(d.to_json());
            r.verdict("proven", OK)
        }
        Ok(Verdict::NotProvenWithinBound) => {
            r.line(format!("{} : {} : {}", checked.program.main, class, p));
            r.verdict(format!("not-proven-within-depth-{depth}"), NOT_PROVEN)
        }
        Err(e) => predicate_error(r, e),
    }
}

fn infer(checked: &CheckedProgram, depth: usize) -> Report {
    let r = Report::new("infer").budget("depth", depth);
    let class = checked.main_class();
    match infer_with_derivations(&checked.ec, &PredEnv::new(), &checked.program.main, &class, Bounds::new(depth)) {
        Ok(found) => {
            let mut r = r;
            let preds: Vec<String> = found.iter().map(|(p, _)| p.to_string()).collect();
            for p in &preds {
                r.line(p.clone());
            }
            r.predicates = Some(preds);
            let code = if found.is_empty() { NOT_PROVEN } else { OK };
            let verdict = if found.is_empty() { "none" } else { "found" };
            r.verdict(verdict, code)
        }
        Err(e) => predicate_error(r, e),
    }
}

fn approx(checked: &CheckedProgram, steps: usize, parallel: bool) -> Report {
    let mut r = Report::new("approx").budget("steps", steps);
    let set = approximants_with(&checked.ec, &checked.program.main, steps, parallel);
    let mut items: Vec<&Expr> = set.expressions.iter().collect();
    items.sort_by_key(|a| (**a != Expr::Omega, a.size(), a.to_string()));
    let shown: Vec<String> = items.iter().map(|a| a.to_string()).collect();
    for a in &shown {
        r.line(a.clone());
    }
    r.witnesses = Some(shown);
    r.verdict(if set.complete { "complete" } else { "incomplete" }, OK)
}

fn analyze(checked: &CheckedProgram, depth: usize, steps: usize, explain: bool) -> Report {
    let mut r = Report::new("analyze").budget("depth", depth).budget("steps", steps);
    let class = checked.main_class();
    match analyze_termination(&checked.ec, &PredEnv::new(), &checked.program.main, &class, depth, steps) {
        Ok(TerminationVerdict::WillHeadNormalize(ev)) => {
            r.line(format!("predicate: {}", ev.predicate));
            r.predicate = Some(ev.predicate.to_string());
            match &ev.head_normal {
                Some((h, n)) => {
                    r.line(format!("head normal form: {h} after {n} steps"));
                    r.witnesses = Some(vec![h.to_string()]);
                }
                None => r.line(format!("head normal form not reached within {steps} steps")),
            }
            if explain {
                r.line(ev.derivation.to_text().trim_end().to_string());
            }
            r.derivation = Some(ev.derivation.to_json());
            r.verdict("will-head-normalize", OK)
        }
        Ok(TerminationVerdict::NoEvidence) => r.verdict("no-evidence", NOT_PROVEN),
        Err(e) => predicate_error(r, e),
    }
}
