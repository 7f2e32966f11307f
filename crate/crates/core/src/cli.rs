//! Command-line front end: problem files, trace files, and the `synth`,
//! `check`, and `sample` subcommands.
//!
//! A problem file is a list of `key = value` lines:
//!
//! ```text
//! # mutual exclusion
//! inputs = r1 r2
//! outputs = g1 g2
//! spec = G(!g1 | !g2)
//! spec = G(r1 -> F g1) & G(r2 -> F g2)
//! traces = mutex.traces
//! max_k = 10
//! ```
//!
//! Repeated `spec` lines are conjoined; `assume` lines, if any, become the
//! premise of an implication. `spec_automaton` names a `.ucw` file instead.
//! `traces` names a trace file and `trace` holds one trace inline. Paths are
//! relative to the problem file.
//!
//! A trace is a `#`-separated list of steps `{lits}.{lits}` where the dot is
//! optional and `lits` are `p` or `!p` separated by `,` or `&`. `{true}` or
//! `{}` leave every proposition of that side free. Free propositions expand
//! to all their values. In trace files, `%` starts a comment line, and a
//! line starting or ending with `#` continues the previous trace.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::automata::{parse_automaton, ucw_of_formula, FormatError, TranslateError, Ucw};
use crate::counting::cf_initial;
use crate::games::SafetyContext;
use crate::logic::{
    parse_formula, Alphabet, AlphabetError, Formula, IoLetter, IoWord, LassoWord, ParseError, Side, Valuation,
};
use crate::machines::{parse_machine, ExampleSet, PreMealy};
use crate::realize::{machine_counterexample, machine_realizes};
use crate::synth::{
    characteristic_sample, synth_learn, CompleteStrategy, LearnError, LearnOptions, MergeStrategy, Outcome,
    SampleError, SynthStats,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceErrorKind {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("proposition `{0}` belongs to the other side")]
    WrongSide(String),
    #[error("contradictory literals for `{0}`")]
    Contradiction(String),
}

/// A malformed trace, with 1-based line and column.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct TraceError {
    pub line: usize,
    pub col: usize,
    pub kind: TraceErrorKind,
}

/// Partial valuation of one side: (mask of mentioned props, their values).
type Partial = (Valuation, Valuation);

struct TraceLexer<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
}

impl TraceLexer<'_> {
    fn err(&self, kind: TraceErrorKind) -> TraceError {
        TraceError {
            line: self.line,
            col: self.col0 + self.pos + 1,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), TraceError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(TraceErrorKind::Expected(what)))
        }
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.text[start..self.pos]).expect("ascii"))
    }

    fn block(&mut self, side: Side, alpha: &Alphabet) -> Result<Partial, TraceError> {
        self.expect(b'{', "`{`")?;
        let (mut mask, mut val) = (0, 0);
        if self.eat(b'}') {
            return Ok((0, 0));
        }
        loop {
            let neg = self.eat(b'!');
            let at = self.pos;
            let Some(name) = self.ident().map(str::to_string) else {
                return Err(self.err(TraceErrorKind::Expected("a proposition")));
            };
            let fail = |kind| TraceError {
                line: self.line,
                col: self.col0 + at + 1,
                kind,
            };
            if name == "true" && !neg {
                // no constraint
            } else {
                let v = alpha
                    .lookup(&name)
                    .ok_or_else(|| fail(TraceErrorKind::UnknownProp(name.clone())))?;
                if v.side != side {
                    return Err(fail(TraceErrorKind::WrongSide(name)));
                }
                let bit = alpha.mask(v);
                let want = if neg { 0 } else { bit };
                if mask & bit != 0 && val & bit != want {
                    return Err(fail(TraceErrorKind::Contradiction(name)));
                }
                mask |= bit;
                val |= want;
            }
            if self.eat(b'}') {
                return Ok((mask, val));
            }
            if !(self.eat(b',') || self.eat(b'&')) {
                return Err(self.err(TraceErrorKind::Expected("`,`, `&` or `}`")));
            }
        }
    }
}

fn completions(p: Partial, width: usize) -> Vec<Valuation> {
    (0..width as Valuation).filter(|v| v & p.0 == p.1).collect()
}

/// Parse one trace and expand its free propositions.
fn parse_trace(text: &str, line: usize, col0: usize, alpha: &Alphabet) -> Result<Vec<IoWord>, TraceError> {
    let mut lx = TraceLexer {
        text: text.as_bytes(),
        pos: 0,
        line,
        col0,
    };
    let mut words: Vec<IoWord> = vec![Vec::new()];
    loop {
        let ins = lx.block(Side::Input, alpha)?;
        lx.eat(b'.');
        let outs = lx.block(Side::Output, alpha)?;
        let letters: Vec<IoLetter> = completions(ins, alpha.num_inputs())
            .into_iter()
            .flat_map(|i| {
                completions(outs, alpha.num_outputs())
                    .into_iter()
                    .map(move |o| IoLetter::new(i, o))
            })
            .collect();
        words = words
            .iter()
            .flat_map(|w| {
                letters.iter().map(move |&l| {
                    let mut w2 = w.clone();
                    w2.push(l);
                    w2
                })
            })
            .collect();
        lx.skip_ws();
        if lx.pos == lx.text.len() {
            return Ok(words);
        }
        lx.expect(b'#', "`#` or end of trace")?;
    }
}

/// Parse a trace file: one trace per line, with `#`-continuations and `%` comments.
pub fn parse_traces(text: &str, alpha: &Alphabet) -> Result<ExampleSet, TraceError> {
    // Group physical lines into traces, remembering where each piece starts.
    let mut traces: Vec<Vec<(usize, usize, &str)>> = Vec::new();
    let mut open = false;
    for (n, raw) in text.lines().enumerate() {
        let body = raw.trim_start();
        let indent = raw.len() - body.len();
        let body = body.trim_end();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        if (open || body.starts_with('#')) && !traces.is_empty() {
            traces.last_mut().expect("nonempty").push((n + 1, indent, body));
        } else {
            traces.push(vec![(n + 1, indent, body)]);
        }
        open = body.ends_with('#');
    }
    let mut out = Vec::new();
    for pieces in traces {
        let (line, col0, _) = pieces[0];
        if pieces.len() == 1 {
            out.extend(parse_trace(pieces[0].2, line, col0, alpha)?);
        } else {
            // Positions in joined traces are reported against the first line.
            let joined: Vec<&str> = pieces.iter().map(|p| p.2).collect();
            out.extend(parse_trace(&joined.join(" "), line, col0, alpha)?);
        }
    }
    Ok(out)
}

/// Render a word as a fully specified trace.
pub fn format_trace(w: &[IoLetter], alpha: &Alphabet) -> String {
    let lits = |side: Side, v: Valuation| {
        let names = match side {
            Side::Input => alpha.inputs(),
            Side::Output => alpha.outputs(),
        };
        let present = alpha.present(side, v);
        names
            .iter()
            .map(|n| {
                if present.contains(&n.as_str()) {
                    n.clone()
                } else {
                    format!("!{n}")
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    };
    w.iter()
        .map(|l| format!("{{{}}}.{{{}}}", lits(Side::Input, l.i), lits(Side::Output, l.o)))
        .collect::<Vec<_>>()
        .join(" # ")
}

fn format_lasso(w: &LassoWord, alpha: &Alphabet) -> String {
    format!(
        "prefix: {}\ncycle: {}\n",
        format_trace(w.prefix(), alpha),
        format_trace(w.cycle(), alpha)
    )
}

/// Everything a `synth` run needs, read from a problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub alpha: Alphabet,
    pub spec: Spec,
    pub examples: ExampleSet,
    pub max_k: Option<i16>,
    pub merge: Option<MergeStrategy>,
    pub complete: Option<CompleteStrategy>,
}

#[derive(Clone, Debug)]
pub enum Spec {
    Formula(Formula),
    Automaton(Ucw),
}

impl Spec {
    pub fn to_ucw(&self, alpha: &Alphabet) -> Result<Ucw, TranslateError> {
        match self {
            Spec::Formula(f) => ucw_of_formula(f, alpha),
            Spec::Automaton(u) => Ok(u.clone()),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Problem { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("formula at column {}: {source}", col(.source))]
    Formula { source: ParseError },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("{0}")]
    Usage(String),
}

fn col(e: &ParseError) -> usize {
    match e {
        ParseError::BadChar { pos, .. } | ParseError::Unexpected { pos, .. } | ParseError::Undeclared { pos, .. } => {
            pos + 1
        }
    }
}

impl CliError {
    /// Process exit status: 3 for malformed user input, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Learn(_) | CliError::Translate(_) => 4,
            _ => 3,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn formula(text: &str, alpha: &Alphabet) -> Result<Formula, CliError> {
    parse_formula(text, alpha).map_err(|source| CliError::Formula { source })
}

pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let bad = |line: usize, msg: String| CliError::Problem {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (n, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| bad(n + 1, "expected `key = value`".into()))?;
        entries.push((n + 1, k.trim().to_string(), v.trim().to_string()));
    }
    let single = |key: &str| -> Result<Option<(usize, String)>, CliError> {
        let found: Vec<_> = entries.iter().filter(|e| e.1 == key).collect();
        match found.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some((one.0, one.2.clone()))),
            [_, second, ..] => Err(bad(second.0, format!("`{key}` given twice"))),
        }
    };
    let ins = single("inputs")?.map(|e| e.1).unwrap_or_default();
    let outs = single("outputs")?.map(|e| e.1).unwrap_or_default();
    let ins: Vec<&str> = ins.split_whitespace().collect();
    let outs: Vec<&str> = outs.split_whitespace().collect();
    if ins.is_empty() || outs.is_empty() {
        return Err(bad(0, "`inputs` and `outputs` must both be given and nonempty".into()));
    }
    let alpha = Alphabet::new(&ins, &outs)?;
    for (n, k, _) in &entries {
        if !matches!(
            k.as_str(),
            "inputs"
                | "outputs"
                | "spec"
                | "assume"
                | "spec_automaton"
                | "traces"
                | "trace"
                | "max_k"
                | "merge"
                | "complete"
                | "seed"
        ) {
            return Err(bad(*n, format!("unknown key `{k}`")));
        }
    }
    let conj = |key: &str| -> Result<Option<Formula>, CliError> {
        let mut acc: Option<Formula> = None;
        for (_, _, v) in entries.iter().filter(|e| e.1 == key) {
            let f = formula(v, &alpha)?;
            acc = Some(match acc {
                None => f,
                Some(g) => Formula::and(g, f),
            });
        }
        Ok(acc)
    };
    let guarantees = conj("spec")?;
    let assumptions = conj("assume")?;
    let spec = match (single("spec_automaton")?, guarantees) {
        (Some(_), Some(_)) => return Err(bad(0, "give either `spec` or `spec_automaton`".into())),
        (Some((n, p)), None) => {
            if assumptions.is_some() {
                return Err(bad(n, "`assume` needs an LTL `spec`".into()));
            }
            let file = dir.join(p);
            let u = parse_automaton(&read(&file)?).map_err(|source| CliError::Format { path: file, source })?;
            if u.alphabet() != &alpha {
                return Err(bad(n, "automaton propositions differ from the problem's".into()));
            }
            Spec::Automaton(u)
        }
        (None, Some(g)) => Spec::Formula(match assumptions {
            Some(a) => Formula::implies(a, g),
            None => g,
        }),
        (None, None) => return Err(bad(0, "missing `spec`".into())),
    };
    let mut examples = Vec::new();
    for (n, k, v) in &entries {
        match k.as_str() {
            "traces" => {
                let file = dir.join(v);
                examples.extend(
                    parse_traces(&read(&file)?, &alpha).map_err(|source| CliError::Trace { path: file, source })?,
                );
            }
            "trace" => {
                examples.extend(parse_trace(v, *n, 0, &alpha).map_err(|source| CliError::Trace {
                    path: path.to_path_buf(),
                    source,
                })?);
            }
            _ => {}
        }
    }
    let max_k = match single("max_k")? {
        Some((n, v)) => Some(v.parse().map_err(|_| bad(n, "bad `max_k`".into()))?),
        None => None,
    };
    let seed: u64 = match single("seed")? {
        Some((n, v)) => v.parse().map_err(|_| bad(n, "bad `seed`".into()))?,
        None => 0,
    };
    let merge = match single("merge")? {
        Some((n, v)) => Some(merge_strategy(&v, seed).ok_or_else(|| bad(n, format!("unknown merge strategy `{v}`")))?),
        None => None,
    };
    let complete = match single("complete")? {
        Some((n, v)) => {
            Some(complete_strategy(&v, seed).ok_or_else(|| bad(n, format!("unknown completion strategy `{v}`")))?)
        }
        None => None,
    };
    Ok(Problem {
        alpha,
        spec,
        examples,
        max_k,
        merge,
        complete,
    })
}

fn merge_strategy(name: &str, seed: u64) -> Option<MergeStrategy> {
    match name {
        "min-cf" => Some(MergeStrategy::MinCf),
        "first" => Some(MergeStrategy::First),
        "random" => Some(MergeStrategy::Random(seed)),
        _ => None,
    }
}

fn complete_strategy(name: &str, seed: u64) -> Option<CompleteStrategy> {
    match name {
        "lazy-min-cf" => Some(CompleteStrategy::LazyMinCf),
        "lazy-first" => Some(CompleteStrategy::LazyFirst),
        "lazy-random" => Some(CompleteStrategy::LazyRandom(seed)),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MergeArg {
    MinCf,
    First,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CompleteArg {
    LazyMinCf,
    LazyFirst,
    LazyRandom,
}

#[derive(Debug, Parser)]
#[command(
    name = "mealysynth",
    version,
    about = "Synthesize Mealy machines from LTL specifications and example traces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a machine for a problem file.
    Synth {
        problem: PathBuf,
        /// Largest co-Büchi bound to try.
        #[arg(long)]
        max_k: Option<i16>,
        /// Run up to the theoretical completeness bound; report unrealizable past it.
        #[arg(long)]
        complete_bound: bool,
        #[arg(long, value_enum)]
        strategy_merge: Option<MergeArg>,
        #[arg(long, value_enum)]
        strategy_complete: Option<CompleteArg>,
        /// Seed for the random strategies.
        #[arg(long)]
        seed: Option<u64>,
        /// Write DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the machine in text format.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the maximal winning counting functions of the final bound.
        #[arg(long)]
        dump_antichain: Option<PathBuf>,
        /// Append one JSON line of statistics (`-` for stdout).
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write the merge decisions of the generalization phase as JSON lines.
        #[arg(long)]
        gen_trace: Option<PathBuf>,
    },
    /// Check a machine against a specification.
    Check {
        machine: PathBuf,
        /// Problem file providing the specification.
        #[arg(long, conflicts_with_all = ["spec", "spec_automaton"])]
        problem: Option<PathBuf>,
        /// Inline LTL specification.
        #[arg(long, conflicts_with = "spec_automaton")]
        spec: Option<String>,
        #[arg(long)]
        spec_automaton: Option<PathBuf>,
    },
    /// Emit a characteristic sample of a minimal machine as a trace file.
    Sample {
        machine: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct StatsLine<'a> {
    problem: String,
    outcome: &'a str,
    #[serde(flatten)]
    stats: &'a SynthStats,
}

/// Exit codes of `synth`.
pub const EXIT_MACHINE: i32 = 0;
pub const EXIT_UNREAL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;

/// Parse arguments and run; returns the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 3;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

pub fn run(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Synth {
            problem,
            max_k,
            complete_bound,
            strategy_merge,
            strategy_complete,
            seed,
            dot,
            out: machine_out,
            dump_antichain,
            stats,
            gen_trace,
        } => {
            let p = load_problem(&problem)?;
            let seed = seed.unwrap_or(0);
            let merge = match strategy_merge {
                Some(MergeArg::MinCf) => MergeStrategy::MinCf,
                Some(MergeArg::First) => MergeStrategy::First,
                Some(MergeArg::Random) => MergeStrategy::Random(seed),
                None => p.merge.unwrap_or(MergeStrategy::MinCf),
            };
            let complete = match strategy_complete {
                Some(CompleteArg::LazyMinCf) => CompleteStrategy::LazyMinCf,
                Some(CompleteArg::LazyFirst) => CompleteStrategy::LazyFirst,
                Some(CompleteArg::LazyRandom) => CompleteStrategy::LazyRandom(seed),
                None => p.complete.unwrap_or(CompleteStrategy::LazyMinCf),
            };
            let ucw = p.spec.to_ucw(&p.alpha)?;
            let opts = LearnOptions {
                max_k: max_k.or(p.max_k).unwrap_or(10),
                complete_bound,
                merge,
                complete,
            };
            let res = synth_learn(&p.examples, &ucw, opts)?;
            let (code, label) = match &res.outcome {
                Outcome::Machine(m) => {
                    let d = m.to_dot();
                    match &dot {
                        Some(path) => write(path, &d)?,
                        None => emit(out, &d)?,
                    }
                    if let Some(path) = &machine_out {
                        write(path, &m.to_text())?;
                    }
                    (EXIT_MACHINE, "machine")
                }
                Outcome::Unreal => {
                    emit(out, "unrealizable\n")?;
                    (EXIT_UNREAL, "unreal")
                }
                Outcome::Unknown => {
                    emit(out, &format!("unknown: no machine found up to k = {}\n", res.stats.k))?;
                    (EXIT_UNKNOWN, "unknown")
                }
            };
            if let Some(path) = &dump_antichain {
                let ctx = SafetyContext::new(ucw.clone(), res.stats.k);
                let mut text = format!("# initial {}\n", cf_initial(&ucw, res.stats.k).dump(res.stats.k));
                text.push_str(&ctx.winning().dump(res.stats.k));
                write(path, &text)?;
            }
            if let (Some(path), Some(g)) = (&gen_trace, &res.gen) {
                let text: String = g
                    .steps
                    .iter()
                    .map(|s| serde_json::to_string(s).expect("step serialize") + "\n")
                    .collect();
                write(path, &text)?;
            }
            if let Some(path) = &stats {
                let line = serde_json::to_string(&StatsLine {
                    problem: problem.display().to_string(),
                    outcome: label,
                    stats: &res.stats,
                })
                .expect("stats serialize")
                    + "\n";
                if path.as_os_str() == "-" {
                    emit(out, &line)?;
                } else {
                    let mut f = fs::OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(path)
                        .map_err(|source| CliError::Io {
                            path: path.clone(),
                            source,
                        })?;
                    f.write_all(line.as_bytes()).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                }
            }
            Ok(code)
        }
        Command::Check {
            machine,
            problem,
            spec,
            spec_automaton,
        } => {
            let m = load_machine(&machine)?;
            let alpha = m.alphabet().clone();
            let ucw = if let Some(p) = problem {
                let p = load_problem(&p)?;
                if p.alpha != alpha {
                    return Err(CliError::Usage(
                        "machine and problem declare different propositions".into(),
                    ));
                }
                p.spec.to_ucw(&alpha)?
            } else if let Some(s) = spec {
                ucw_of_formula(&formula(&s, &alpha)?, &alpha)?
            } else if let Some(path) = spec_automaton {
                let u = parse_automaton(&read(&path)?).map_err(|source| CliError::Format { path, source })?;
                if u.alphabet() != &alpha {
                    return Err(CliError::Usage(
                        "machine and automaton declare different propositions".into(),
                    ));
                }
                u
            } else {
                return Err(CliError::Usage("give --problem, --spec, or --spec-automaton".into()));
            };
            if !m.is_complete() {
                return Err(CliError::Usage("machine has holes".into()));
            }
            if machine_realizes(&m, &ucw) {
                emit(out, "yes\n")?;
                Ok(0)
            } else {
                emit(out, "no\n")?;
                if let Some(w) = machine_counterexample(&m, &ucw) {
                    emit(out, &format_lasso(&w, &alpha))?;
                }
                Ok(1)
            }
        }
        Command::Sample { machine, out: path } => {
            let m = load_machine(&machine)?;
            let sample = characteristic_sample(&m)?;
            let text: String = sample.iter().map(|w| format_trace(w, m.alphabet()) + "\n").collect();
            match path {
                Some(p) => write(&p, &text)?,
                None => emit(out, &text)?,
            }
            Ok(0)
        }
    }
}

fn load_machine(path: &Path) -> Result<PreMealy, CliError> {
    parse_machine(&read(path)?).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spec::Formula(_) => write!(f, "formula"),
            Spec::Automaton(u) => write!(f, "automaton with {} states", u.num_states()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ebike() -> Alphabet {
        Alphabet::new(&["brk", "ful", "spd"], &["as", "re", "ri"]).unwrap()
    }

    #[test]
    fn partial_steps_expand() {
        let a = ebike();
        let e = parse_traces(
            "{!brk,spd}{!as,!re,!ri} # {brk,!ful}{!as,re,!ri} # {brk,!ful}{!as,re,!ri}\n",
            &a,
        )
        .unwrap();
        assert_eq!(e.len(), 8);
        let e = parse_traces("{brk,ful}{!as,!re,ri}", &a).unwrap();
        assert_eq!(e.len(), 2);
        let e = parse_traces("{brk,ful,!spd}.{!as,!re,ri}", &a).unwrap();
        assert_eq!(e.len(), 1);
        let e = parse_traces("{true}{as & re & ri}", &a).unwrap();
        assert_eq!(e.len(), 8);
    }

    #[test]
    fn continuation_lines_and_comments() {
        let a = ebike();
        let text = "% scenario one\n{!brk,spd}{!as,!re,!ri} # {brk,!ful}{!as,re,!ri}\n  # {brk,!ful}{!as,re,!ri}\n\n{brk,ful}{!as,!re,ri}\n";
        assert_eq!(parse_traces(text, &a).unwrap().len(), 10);
    }

    #[test]
    fn trace_errors() {
        let a = ebike();
        let e = parse_traces("{brk}{as} # {zap}{as}", &a).unwrap_err();
        assert_eq!((e.line, e.col), (1, 14));
        assert_eq!(e.kind, TraceErrorKind::UnknownProp("zap".into()));
        let e = parse_traces("{brk,!brk}{as}", &a).unwrap_err();
        assert_eq!(e.kind, TraceErrorKind::Contradiction("brk".into()));
        let e = parse_traces("{as}{as}", &a).unwrap_err();
        assert_eq!(e.kind, TraceErrorKind::WrongSide("as".into()));
        let e = parse_traces("\n{brk}{as} {brk}{as}", &a).unwrap_err();
        assert_eq!((e.line, e.col), (2, 11));
    }

    #[test]
    fn format_round_trip() {
        let a = ebike();
        let w = vec![IoLetter::new(0b101, 0b010), IoLetter::new(0, 7)];
        let text = format_trace(&w, &a);
        assert_eq!(text, "{brk,!ful,spd}.{!as,re,!ri} # {!brk,!ful,!spd}.{as,re,ri}");
        assert_eq!(parse_traces(&text, &a).unwrap(), vec![w]);
    }
}
