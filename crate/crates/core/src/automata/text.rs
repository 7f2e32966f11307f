//! Line-based text formats shared by automata and machines.
//!
//! ```text
//! ucw
//! inputs: a
//! outputs: b
//! states: 2
//! initial: 0
//! counted: 1
//! 0 {a}/{} -> 0,1
//! 0 */{b} -> 0
//! ```
//!
//! A set `{p,q}` names the propositions that hold; the others are false.
//! `*` stands for every valuation of that side. Lines starting with `#` are
//! comments.

use thiserror::Error;

use super::{AutomatonError, Ucw};
use crate::logic::{Alphabet, AlphabetError, Side, Valuation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Non-empty, non-comment lines with their 1-based numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Expects `key: value` and returns the value.
pub(crate) fn header<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str, FormatError> {
    let (n, l) = line;
    l.strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix(':'))
        .map(str::trim)
        .ok_or_else(|| syntax(n, format!("expected `{key}:`")))
}

pub(crate) fn parse_index(n: usize, s: &str, bound: usize) -> Result<usize, FormatError> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| syntax(n, format!("bad state `{}`", s.trim())))?;
    if v >= bound {
        return Err(syntax(n, format!("state {v} out of range")));
    }
    Ok(v)
}

/// Header block shared by both formats: magic word, props, state count, initial state.
pub(crate) fn parse_preamble<'a, I>(lines: &mut I, magic: &str) -> Result<(Alphabet, usize, usize), FormatError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let end = |what: &str| syntax(0, format!("unexpected end of input, expected {what}"));
    let (n, first) = lines.next().ok_or_else(|| end(magic))?;
    if first != magic {
        return Err(syntax(n, format!("expected `{magic}`")));
    }
    let ins = header(lines.next().ok_or_else(|| end("inputs"))?, "inputs")?;
    let outs = header(lines.next().ok_or_else(|| end("outputs"))?, "outputs")?;
    let ins: Vec<&str> = ins.split_whitespace().collect();
    let outs: Vec<&str> = outs.split_whitespace().collect();
    let alpha = Alphabet::new(&ins, &outs)?;
    let st = lines.next().ok_or_else(|| end("states"))?;
    let num: usize = header(st, "states")?
        .parse()
        .map_err(|_| syntax(st.0, "bad state count"))?;
    if num == 0 {
        return Err(syntax(st.0, "state count must be positive"));
    }
    let init = lines.next().ok_or_else(|| end("initial"))?;
    let initial = parse_index(init.0, header(init, "initial")?, num)?;
    Ok((alpha, num, initial))
}

/// Parse `{p,q}` or `*` into the list of matching valuations.
pub(crate) fn parse_set(n: usize, s: &str, side: Side, alpha: &Alphabet) -> Result<Vec<Valuation>, FormatError> {
    let s = s.trim();
    let width = match side {
        Side::Input => alpha.num_inputs(),
        Side::Output => alpha.num_outputs(),
    };
    if s == "*" {
        return Ok((0..width as Valuation).collect());
    }
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| syntax(n, format!("expected `{{...}}` or `*`, found `{s}`")))?;
    let names: Vec<&str> = inner.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    let val = alpha
        .valuation_of(side, &names)
        .ok_or_else(|| syntax(n, format!("unknown proposition in `{s}`")))?;
    Ok(vec![val])
}

pub(crate) fn fmt_set(alpha: &Alphabet, side: Side, val: Valuation) -> String {
    format!("{{{}}}", alpha.present(side, val).join(","))
}

/// Split `SRC I/O -> DST` into its four parts.
pub(crate) fn split_transition(n: usize, l: &str) -> Result<(&str, &str, &str, &str), FormatError> {
    let (lhs, dst) = l.split_once("->").ok_or_else(|| syntax(n, "expected `->`"))?;
    let lhs = lhs.trim();
    let (src, label) = lhs
        .split_once(char::is_whitespace)
        .ok_or_else(|| syntax(n, "expected `SRC IN/OUT -> DST`"))?;
    let (i, o) = label
        .split_once('/')
        .ok_or_else(|| syntax(n, "expected `/` between input and output"))?;
    Ok((src, i, o, dst.trim()))
}

pub fn parse_automaton(text: &str) -> Result<Ucw, FormatError> {
    let mut lines = content_lines(text);
    let (alpha, num, initial) = parse_preamble(&mut lines, "ucw")?;
    let cl = lines
        .next()
        .ok_or_else(|| syntax(0, "unexpected end of input, expected counted"))?;
    let mut counted = vec![false; num];
    for s in header(cl, "counted")?.split_whitespace() {
        counted[parse_index(cl.0, s, num)?] = true;
    }
    let letters = alpha.num_letters();
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); num * letters];
    for (n, l) in lines {
        let (src, i, o, dst) = split_transition(n, l)?;
        let src = parse_index(n, src, num)?;
        let ins = parse_set(n, i, Side::Input, &alpha)?;
        let outs = parse_set(n, o, Side::Output, &alpha)?;
        let mut targets = Vec::new();
        for d in dst.split(',') {
            targets.push(parse_index(n, d, num)? as u32);
        }
        for &iv in &ins {
            for &ov in &outs {
                let li = alpha.letter_index(crate::logic::IoLetter::new(iv, ov));
                succ[src * letters + li].extend(&targets);
            }
        }
    }
    Ok(Ucw::new(alpha, num, vec![initial], succ, counted)?)
}

/// Serialize a UCW with a single initial state; additional initial states
/// are not representable and are rejected by assertion.
pub fn serialize_automaton(a: &Ucw) -> String {
    assert_eq!(a.initial().len(), 1, "text format has one initial state");
    let alpha = a.alphabet();
    let mut out = String::new();
    out.push_str("ucw\n");
    out.push_str(&format!("inputs: {}\n", alpha.inputs().join(" ")));
    out.push_str(&format!("outputs: {}\n", alpha.outputs().join(" ")));
    out.push_str(&format!("states: {}\n", a.num_states()));
    out.push_str(&format!("initial: {}\n", a.initial()[0]));
    let counted: Vec<String> = (0..a.num_states())
        .filter(|&q| a.is_counted(q))
        .map(|q| q.to_string())
        .collect();
    out.push_str(&format!("counted: {}\n", counted.join(" ")));
    for q in 0..a.num_states() {
        for l in alpha.letters() {
            let t: Vec<String> = a.succ(q, l).iter().map(|t| t.to_string()).collect();
            out.push_str(&format!(
                "{q} {}/{} -> {}\n",
                fmt_set(alpha, Side::Input, l.i),
                fmt_set(alpha, Side::Output, l.o),
                t.join(",")
            ));
        }
    }
    out
}
