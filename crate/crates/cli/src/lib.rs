//! Command-line front end: subcommands and the interactive session.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use taglr::oracle::{all_strings, derive_strings, render};
use taglr::{
    apply_edit, build_eager, build_lazy, export_dot, parse, parse_grammar_text, parse_tree_decl, validate,
    EditReport, EngineError, Fsa, Grammar, GrammarEdit, ParseOptions, ParseOutcome, Snapshot, StateId,
    Symbol,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "taglr", version, about = "LR parsing workbench for tree adjoining grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Eager,
    Lazy,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a grammar, reporting table conflicts.
    Check { grammar: PathBuf },
    /// Build the automaton and optionally save a snapshot.
    Build {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value = "eager")]
        mode: Mode,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Parse a token sequence.
    Parse {
        grammar: PathBuf,
        tokens: Vec<String>,
        /// Start from a saved automaton instead of an empty lazy one.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        stats: bool,
        /// Split the token arguments on whitespace.
        #[arg(long)]
        string: bool,
        /// Load a snapshot built for another grammar in kernel form.
        #[arg(long)]
        force_rekernel: bool,
        /// Step budget; overrides TAGLR_STEP_BUDGET.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Interactive session.
    Repl { grammar: PathBuf },
    /// Export an automaton in Graphviz format.
    Dot {
        /// Grammar file or snapshot.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "eager")]
        mode: Mode,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Enumerate the language up to a length bound.
    Oracle {
        grammar: PathBuf,
        #[arg(long)]
        maxlen: usize,
        /// Compare the parser against the oracle on every string.
        #[arg(long)]
        compare: bool,
    },
    /// Drop unreachable states from a snapshot, in place.
    Purge { snapshot: PathBuf },
}

/// A failure with its exit code; the message goes to standard error.
struct Failure(i32, String);

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure(EXIT_USAGE, msg.into())
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_prompt(args, stdin, out, err, false)
}

/// [`run`], showing a prompt in the interactive session when `prompt` is set.
pub fn run_with_prompt<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
    prompt: bool,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, stdin, out, prompt) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Loads and validates a grammar file.
pub fn load_grammar(path: &Path) -> Result<Grammar, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let g = parse_grammar_text(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    let findings = validate(&g);
    if !findings.is_empty() {
        let list: Vec<String> = findings.iter().map(ToString::to_string).collect();
        return Err(format!("{}: {}", path.display(), list.join("; ")));
    }
    Ok(g)
}

fn grammar(path: &Path) -> Result<Grammar, Failure> {
    load_grammar(path).map_err(Failure::usage)
}

fn build(g: &Grammar, mode: Mode) -> Fsa {
    match mode {
        Mode::Eager => build_eager(g),
        Mode::Lazy => build_lazy(g),
    }
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, out: &mut dyn Write, prompt: bool) -> CmdResult {
    match command {
        Command::Check { grammar: path } => {
            let g = grammar(&path)?;
            let fsa = build_eager(&g);
            let conflicts = fsa.conflicts();
            writeln!(
                out,
                "ok: {} trees ({} initial, {} auxiliary), {} states, {} conflicted",
                g.trees().count(),
                g.initial_trees().count(),
                g.auxiliary_trees().count(),
                fsa.len(),
                conflicts.len()
            )
            .map_err(io)?;
            for c in conflicts {
                writeln!(out, "conflict {c}").map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Build { grammar: path, mode, output } => {
            let g = grammar(&path)?;
            let fsa = build(&g, mode);
            writeln!(
                out,
                "{} states, {} expanded, {} conflicted",
                fsa.len(),
                fsa.expanded_count(),
                fsa.conflicts().len()
            )
            .map_err(io)?;
            if let Some(o) = output {
                write_file(&o, &taglr::snapshot::save(&fsa, &g))?;
            }
            Ok(EXIT_OK)
        }
        Command::Parse {
            grammar: path,
            tokens,
            table,
            trace,
            stats,
            string,
            force_rekernel,
            budget,
        } => {
            let g = grammar(&path)?;
            let mut fsa = match table {
                Some(t) => taglr::snapshot::load(&read(&t)?, &g, force_rekernel)
                    .map_err(|e| Failure::usage(format!("{}: {e}", t.display())))?,
                None => build_lazy(&g),
            };
            let tokens: Vec<String> = if string {
                tokens.iter().flat_map(|t| t.split_whitespace()).map(String::from).collect()
            } else {
                tokens
            };
            let mut opts = ParseOptions { trace, ..ParseOptions::from_env() };
            if let Some(b) = budget {
                opts.step_budget = b;
            }
            let outcome = parse(&mut fsa, &g, &tokens, &opts).map_err(engine_failure)?;
            report_parse(out, &outcome, stats).map_err(io)?;
            Ok(if outcome.accepted() { EXIT_OK } else { EXIT_REJECT })
        }
        Command::Repl { grammar: path } => {
            let g = grammar(&path)?;
            Session::new(g).run(stdin, out, prompt).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Dot { input, mode, output } => {
            let text = read(&input)?;
            let fsa = if text.trim_start().starts_with('{') {
                Snapshot::from_json(&text)
                    .and_then(|s| s.to_fsa())
                    .map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?
            } else {
                build(&grammar(&input)?, mode)
            };
            let dot = export_dot(&fsa);
            match output {
                Some(o) => write_file(&o, &dot)?,
                None => write!(out, "{dot}").map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Oracle { grammar: path, maxlen, compare } => {
            let g = grammar(&path)?;
            let language = derive_strings(&g, maxlen);
            if !compare {
                for s in &language {
                    writeln!(out, "{}", display_tokens(s)).map_err(io)?;
                }
                writeln!(out, "{} strings", language.len()).map_err(io)?;
                return Ok(EXIT_OK);
            }
            let alphabet: Vec<Symbol> = g.terminals().into_iter().collect();
            let mut inputs = vec![Vec::new()];
            inputs.extend(all_strings(&alphabet, maxlen));
            let mut fsa = build_lazy(&g);
            let opts = ParseOptions::from_env();
            let mut disagreements = 0;
            for s in &inputs {
                let outcome = parse(&mut fsa, &g, s, &opts).map_err(engine_failure)?;
                let expected = language.contains(s);
                if outcome.accepted() != expected {
                    disagreements += 1;
                    writeln!(
                        out,
                        "disagreement: {} parser={} oracle={}",
                        display_tokens(s),
                        verdict_word(outcome.accepted()),
                        verdict_word(expected)
                    )
                    .map_err(io)?;
                }
            }
            writeln!(
                out,
                "{} strings checked, {} in language, {disagreements} disagreements",
                inputs.len(),
                language.len()
            )
            .map_err(io)?;
            Ok(if disagreements == 0 { EXIT_OK } else { EXIT_REJECT })
        }
        Command::Purge { snapshot } => {
            let snap = Snapshot::from_json(&read(&snapshot)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", snapshot.display())))?;
            let mut fsa = snap
                .to_fsa()
                .map_err(|e| Failure::usage(format!("{}: {e}", snapshot.display())))?;
            let purged = fsa.purge_unreachable();
            let text = Snapshot::capture_with_hash(&fsa, snap.grammar_hash.clone()).to_json();
            write_file(&snapshot, &text)?;
            writeln!(out, "purged {purged} states, {} remain", fsa.len()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::StepBudgetExceeded { .. } => Failure(EXIT_BUDGET, e.to_string()),
        EngineError::InternalInconsistency(_) => Failure(EXIT_USAGE, e.to_string()),
    }
}

fn verdict_word(accepted: bool) -> &'static str {
    if accepted {
        "accept"
    } else {
        "reject"
    }
}

fn display_tokens(s: &[Symbol]) -> String {
    if s.is_empty() {
        "ε".to_string()
    } else {
        render(s)
    }
}

fn report_parse(out: &mut dyn Write, outcome: &ParseOutcome, stats: bool) -> std::io::Result<()> {
    for line in outcome.trace.iter().flatten() {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{}", verdict_word(outcome.accepted()))?;
    if let Some(d) = &outcome.diagnostic {
        writeln!(out, "note: {d}")?;
    }
    if stats {
        let s = &outcome.stats;
        writeln!(
            out,
            "steps={} expansions={} backtracks={} max_depth={}",
            s.steps, s.expansions, s.backtracks, s.max_depth
        )?;
    }
    Ok(())
}

/// Counts shown by `:stats`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatsReport {
    pub total: usize,
    pub expanded: usize,
    pub kernel_form: usize,
    pub reachable: usize,
    pub unreachable: usize,
    pub expansions: u64,
    pub last_rekerneled: usize,
    /// Pre-edit states left untouched by the last edit that are reachable now.
    pub last_reused: usize,
}

impl std::fmt::Display for StatsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "states: {} total, {} expanded, {} kernel-form",
            self.total, self.expanded, self.kernel_form
        )?;
        writeln!(f, "reachable: {}, unreachable: {}", self.reachable, self.unreachable)?;
        writeln!(f, "expansions this session: {}", self.expansions)?;
        write!(f, "last edit: rekerneled {}, reused {}", self.last_rekerneled, self.last_reused)
    }
}

struct LastEdit {
    report: EditReport,
    /// Ids below this existed before the edit.
    watermark: u32,
}

/// State of an interactive session.
pub struct Session {
    grammar: Grammar,
    fsa: Fsa,
    expansions: u64,
    last_edit: Option<LastEdit>,
}

impl Session {
    pub fn new(grammar: Grammar) -> Session {
        Session {
            fsa: build_lazy(&grammar),
            grammar,
            expansions: 0,
            last_edit: None,
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    pub fn stats(&self) -> StatsReport {
        let reachable = self.fsa.reachable();
        let (last_rekerneled, last_reused) = match &self.last_edit {
            None => (0, 0),
            Some(edit) => (
                edit.report.rekerneled.len(),
                reachable
                    .iter()
                    .filter(|id| id.0 < edit.watermark && !edit.report.rekerneled.contains(id))
                    .count(),
            ),
        };
        StatsReport {
            total: self.fsa.len(),
            expanded: self.fsa.expanded_count(),
            kernel_form: self.fsa.len() - self.fsa.expanded_count(),
            reachable: reachable.len(),
            unreachable: self.fsa.len() - reachable.len(),
            expansions: self.expansions,
            last_rekerneled,
            last_reused,
        }
    }

    /// Reads commands until `:quit` or end of input.
    pub fn run(&mut self, input: &mut dyn BufRead, out: &mut dyn Write, prompt: bool) -> std::io::Result<()> {
        let mut line = String::new();
        loop {
            if prompt {
                write!(out, "taglr> ")?;
                out.flush()?;
            }
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Ok(());
            }
            let reply = self.execute(line.trim());
            match reply {
                Reply::Quit => return Ok(()),
                Reply::Text(text) => {
                    if !text.is_empty() {
                        writeln!(out, "{text}")?;
                    }
                }
            }
        }
    }

    /// Executes one command line and returns the text to show.
    pub fn execute(&mut self, line: &str) -> Reply {
        let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let text = match cmd {
            "" => String::new(),
            ":quit" | ":q" => return Reply::Quit,
            ":parse" => self.parse(rest),
            ":add" => match parse_tree_decl(rest) {
                Ok(tree) => self.edit(GrammarEdit::add(tree)),
                Err(e) => format!("error: {e}"),
            },
            ":rm" if !rest.is_empty() => self.edit(GrammarEdit::Remove(rest.to_string())),
            ":stats" => self.stats().to_string(),
            ":dot" if !rest.is_empty() => match fs::write(rest, export_dot(&self.fsa)) {
                Ok(()) => format!("wrote {rest}"),
                Err(e) => format!("error: {rest}: {e}"),
            },
            ":purge" => format!("purged {} states", self.fsa.purge_unreachable()),
            ":save" if !rest.is_empty() => match fs::write(rest, taglr::snapshot::save(&self.fsa, &self.grammar)) {
                Ok(()) => format!("saved {} states to {rest}", self.fsa.len()),
                Err(e) => format!("error: {rest}: {e}"),
            },
            ":load" if !rest.is_empty() => self.load(rest),
            ":grammar" => self.grammar.to_string().trim_end().to_string(),
            ":help" => HELP.to_string(),
            other => format!("error: unknown command `{other}` (try :help)"),
        };
        Reply::Text(text)
    }

    fn parse(&mut self, tokens: &str) -> String {
        let tokens: Vec<&str> = tokens.split_whitespace().collect();
        match parse(&mut self.fsa, &self.grammar, &tokens, &ParseOptions::from_env()) {
            Ok(outcome) => {
                self.expansions += outcome.stats.expansions;
                match &outcome.diagnostic {
                    Some(d) => format!("{} ({d})", verdict_word(outcome.accepted())),
                    None => verdict_word(outcome.accepted()).to_string(),
                }
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn edit(&mut self, edit: GrammarEdit) -> String {
        let watermark = self.fsa.next_id();
        match apply_edit(&mut self.fsa, &self.grammar, &edit) {
            Ok((next, report)) => {
                self.grammar = next;
                let text = describe_edit(&report);
                self.last_edit = Some(LastEdit { report, watermark });
                text
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn load(&mut self, path: &str) -> String {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return format!("error: {path}: {e}"),
        };
        match taglr::snapshot::load(&text, &self.grammar, false) {
            Ok(fsa) => {
                self.fsa = fsa;
                self.last_edit = None;
                format!("loaded {} states from {path}", self.fsa.len())
            }
            Err(e) => format!("error: {path}: {e}"),
        }
    }
}

fn ids(set: &std::collections::BTreeSet<StateId>) -> String {
    if set.is_empty() {
        "none".to_string()
    } else {
        set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn describe_edit(report: &EditReport) -> String {
    format!(
        "rekerneled: {}\nremoved: {}\ndropped transitions: {}\nunreachable retained: {}\ngrammar version: {}",
        ids(&report.rekerneled),
        ids(&report.removed),
        report.dropped_transitions,
        report.retained_unreachable,
        report.version
    )
}

/// Result of one session command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    Quit,
}

const HELP: &str = "\
:parse <tokens>     parse a whitespace-separated token string
:add <tree-decl>    add a tree, e.g. :add aux g : (S:na \"b\" (S*:na))
:rm <name>          remove a tree
:stats              automaton statistics
:dot <file>         write the automaton in Graphviz format
:purge              drop unreachable states
:save <file>        save a snapshot
:load <file>        load a snapshot built for the current grammar
:grammar            print the grammar
:quit               leave";
