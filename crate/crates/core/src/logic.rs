//! LTL over input and output propositions: alphabet, syntax trees, a
//! parser for the textual grammar, negation normal form, and an exact
//! evaluator on ultimately periodic words.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Which player controls a proposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Input,
    Output,
}

/// A declared proposition, identified by side and by its rank in the sorted
/// name list of that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub side: Side,
    pub index: u8,
}

/// A valuation of one side, as a bit vector. The alphabetically first
/// proposition is the most significant bit, so numeric order is the
/// characteristic-vector order (absent before present).
pub type Valuation = u32;

/// One time step: an input valuation followed by an output valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IoLetter {
    pub i: Valuation,
    pub o: Valuation,
}

impl IoLetter {
    pub fn new(i: Valuation, o: Valuation) -> Self {
        IoLetter { i, o }
    }
}

/// A finite word of steps.
pub type IoWord = Vec<IoLetter>;

/// Upper bound on propositions per side; letters are enumerated explicitly.
pub const MAX_PROPS_PER_SIDE: usize = 8;

const RESERVED: &[&str] = &["true", "false", "G", "F", "X", "U", "W", "R"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("invalid proposition name `{0}`")]
    BadName(String),
    #[error("proposition `{0}` declared twice")]
    Duplicate(String),
    #[error("too many propositions on one side (max {MAX_PROPS_PER_SIDE})")]
    TooMany,
}

/// The proposition universe of a problem instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    inputs: Arc<[String]>,
    outputs: Arc<[String]>,
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(inputs: &[S], outputs: &[S]) -> Result<Self, AlphabetError> {
        let mut ins: Vec<String> = inputs.iter().map(|s| s.as_ref().to_string()).collect();
        let mut outs: Vec<String> = outputs.iter().map(|s| s.as_ref().to_string()).collect();
        if ins.len() > MAX_PROPS_PER_SIDE || outs.len() > MAX_PROPS_PER_SIDE {
            return Err(AlphabetError::TooMany);
        }
        ins.sort();
        outs.sort();
        let mut all: Vec<&String> = ins.iter().chain(outs.iter()).collect();
        for name in &all {
            if !valid_ident(name) || RESERVED.contains(&name.as_str()) {
                return Err(AlphabetError::BadName(name.to_string()));
            }
        }
        all.sort();
        for w in all.windows(2) {
            if w[0] == w[1] {
                return Err(AlphabetError::Duplicate(w[0].clone()));
            }
        }
        Ok(Alphabet {
            inputs: ins.into(),
            outputs: outs.into(),
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Number of input valuations, `2^|P_I|`.
    pub fn num_inputs(&self) -> usize {
        1 << self.inputs.len()
    }

    /// Number of output valuations, `2^|P_O|`.
    pub fn num_outputs(&self) -> usize {
        1 << self.outputs.len()
    }

    pub fn num_letters(&self) -> usize {
        self.num_inputs() * self.num_outputs()
    }

    /// Dense index of a letter; inputs vary slowest.
    pub fn letter_index(&self, l: IoLetter) -> usize {
        l.i as usize * self.num_outputs() + l.o as usize
    }

    pub fn letter_at(&self, idx: usize) -> IoLetter {
        let no = self.num_outputs();
        IoLetter::new((idx / no) as Valuation, (idx % no) as Valuation)
    }

    pub fn letters(&self) -> impl Iterator<Item = IoLetter> + '_ {
        (0..self.num_letters()).map(move |x| self.letter_at(x))
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        if let Ok(ix) = self.inputs.binary_search_by(|n| n.as_str().cmp(name)) {
            return Some(Var {
                side: Side::Input,
                index: ix as u8,
            });
        }
        if let Ok(ix) = self.outputs.binary_search_by(|n| n.as_str().cmp(name)) {
            return Some(Var {
                side: Side::Output,
                index: ix as u8,
            });
        }
        None
    }

    pub fn name(&self, v: Var) -> &str {
        match v.side {
            Side::Input => &self.inputs[v.index as usize],
            Side::Output => &self.outputs[v.index as usize],
        }
    }

    /// Bit mask of `v` within a valuation of its side.
    pub fn mask(&self, v: Var) -> Valuation {
        let n = match v.side {
            Side::Input => self.inputs.len(),
            Side::Output => self.outputs.len(),
        };
        1 << (n - 1 - v.index as usize)
    }

    pub fn holds(&self, v: Var, l: IoLetter) -> bool {
        let val = match v.side {
            Side::Input => l.i,
            Side::Output => l.o,
        };
        val & self.mask(v) != 0
    }

    fn side_names(&self, side: Side) -> &[String] {
        match side {
            Side::Input => &self.inputs,
            Side::Output => &self.outputs,
        }
    }

    /// Names of the propositions set in `val`, in sorted order.
    pub fn present(&self, side: Side, val: Valuation) -> Vec<&str> {
        let names = self.side_names(side);
        let n = names.len();
        (0..n)
            .filter(|&j| val & (1 << (n - 1 - j)) != 0)
            .map(|j| names[j].as_str())
            .collect()
    }

    /// Full conjunction of literals, e.g. `!r1 & r2`; `true` when the side is empty.
    pub fn conjunction(&self, side: Side, val: Valuation) -> String {
        let names = self.side_names(side);
        let n = names.len();
        if n == 0 {
            return "true".into();
        }
        (0..n)
            .map(|j| {
                if val & (1 << (n - 1 - j)) != 0 {
                    names[j].clone()
                } else {
                    format!("!{}", names[j])
                }
            })
            .collect::<Vec<_>>()
            .join(" & ")
    }

    /// Parse a set such as `r1,r2` (names present, others absent).
    pub fn valuation_of(&self, side: Side, names: &[&str]) -> Option<Valuation> {
        let mut val = 0;
        for name in names {
            let v = self.lookup(name)?;
            if v.side != side {
                return None;
            }
            val |= self.mask(v);
        }
        Some(val)
    }
}

/// An ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    prefix: IoWord,
    cycle: IoWord,
}

impl LassoWord {
    /// Returns `None` when the cycle is empty.
    pub fn new(prefix: IoWord, cycle: IoWord) -> Option<Self> {
        if cycle.is_empty() {
            None
        } else {
            Some(LassoWord { prefix, cycle })
        }
    }

    pub fn prefix(&self) -> &[IoLetter] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[IoLetter] {
        &self.cycle
    }

    /// Number of distinct positions.
    pub fn span(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn at(&self, pos: usize) -> IoLetter {
        if pos < self.prefix.len() {
            self.prefix[pos]
        } else {
            self.cycle[(pos - self.prefix.len()) % self.cycle.len()]
        }
    }

    fn succ(&self, pos: usize) -> usize {
        if pos + 1 < self.span() {
            pos + 1
        } else {
            self.prefix.len()
        }
    }
}

/// LTL syntax tree. Implication and equivalence are expanded by the parser.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    WeakUntil(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

use Formula as F;

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        F::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        F::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        F::Or(Box::new(a), Box::new(b))
    }
    pub fn next(a: Formula) -> Formula {
        F::Next(Box::new(a))
    }
    pub fn until(a: Formula, b: Formula) -> Formula {
        F::Until(Box::new(a), Box::new(b))
    }
    pub fn weak_until(a: Formula, b: Formula) -> Formula {
        F::WeakUntil(Box::new(a), Box::new(b))
    }
    pub fn release(a: Formula, b: Formula) -> Formula {
        F::Release(Box::new(a), Box::new(b))
    }
    pub fn eventually(a: Formula) -> Formula {
        F::Eventually(Box::new(a))
    }
    pub fn always(a: Formula) -> Formula {
        F::Always(Box::new(a))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        F::or(F::not(a), b)
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        F::or(F::and(a.clone(), b.clone()), F::and(F::not(a), F::not(b)))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            F::True | F::False | F::Atom(_) => 1,
            F::Not(a) | F::Next(a) | F::Eventually(a) | F::Always(a) => 1 + a.size(),
            F::And(a, b) | F::Or(a, b) | F::Until(a, b) | F::WeakUntil(a, b) | F::Release(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// True when negations only sit on atoms and only the NNF core operators occur.
    pub fn is_nnf(&self) -> bool {
        match self {
            F::True | F::False | F::Atom(_) => true,
            F::Not(a) => matches!(**a, F::Atom(_)),
            F::Next(a) => a.is_nnf(),
            F::And(a, b) | F::Or(a, b) | F::Until(a, b) | F::Release(a, b) => a.is_nnf() && b.is_nnf(),
            F::WeakUntil(..) | F::Eventually(_) | F::Always(_) => false,
        }
    }

    pub fn display<'a>(&'a self, alpha: &'a Alphabet) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, alpha }
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    alpha: &'a Alphabet,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha = self.alpha;
        let d = |g: &'_ Formula| format!("{}", FormulaDisplay { f: g, alpha });
        match self.f {
            F::True => write!(out, "true"),
            F::False => write!(out, "false"),
            F::Atom(v) => write!(out, "{}", self.alpha.name(*v)),
            F::Not(a) => write!(out, "!{}", d(a)),
            F::And(a, b) => write!(out, "({} & {})", d(a), d(b)),
            F::Or(a, b) => write!(out, "({} | {})", d(a), d(b)),
            F::Next(a) => write!(out, "X {}", d(a)),
            F::Until(a, b) => write!(out, "({} U {})", d(a), d(b)),
            F::WeakUntil(a, b) => write!(out, "({} W {})", d(a), d(b)),
            F::Release(a, b) => write!(out, "({} R {})", d(a), d(b)),
            F::Eventually(a) => write!(out, "F {}", d(a)),
            F::Always(a) => write!(out, "G {}", d(a)),
        }
    }
}

// --- parsing -----------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    BadChar { ch: char, pos: usize },
    #[error("expected {expected} at offset {pos}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
        pos: usize,
    },
    #[error("undeclared proposition `{name}` at offset {pos}")]
    Undeclared { name: String, pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Ident(String),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '(' => toks.push((Tok::LParen, start)),
            ')' => toks.push((Tok::RParen, start)),
            '!' => toks.push((Tok::Bang, start)),
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    i += 1;
                }
                toks.push((Tok::Amp, start))
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    i += 1;
                }
                toks.push((Tok::Bar, start))
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                toks.push((Tok::Arrow, start))
            }
            '<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                toks.push((Tok::DArrow, start))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::BadChar { ch, pos: start });
            }
        }
        i += 1;
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    alpha: &'a Alphabet,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::DArrow => "`<->`".into(),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError::Unexpected {
            expected,
            found: describe(self.peek()),
            pos: self.pos(),
        }
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.imp()?;
            lhs = F::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            return Ok(F::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            lhs = F::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.binary_temporal()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = F::and(lhs, self.binary_temporal()?);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        for (kw, mk) in [
            ("U", F::until as fn(Formula, Formula) -> Formula),
            ("W", F::weak_until),
            ("R", F::release),
        ] {
            if self.is_ident(kw) {
                self.bump();
                let rhs = self.binary_temporal()?;
                return Ok(mk(lhs, rhs));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(F::not(self.unary()?))
            }
            Tok::Ident(name) if self.alpha.lookup(&name).is_none() && is_unary_chain(&name) => {
                self.bump();
                let mut f = self.unary()?;
                for c in name.chars().rev() {
                    f = match c {
                        'X' => F::next(f),
                        'F' => F::eventually(f),
                        _ => F::always(f),
                    };
                }
                Ok(f)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => Ok(F::True),
                    "false" => Ok(F::False),
                    "U" | "W" | "R" => Err(ParseError::Unexpected {
                        expected: "a formula",
                        found: format!("`{name}`"),
                        pos,
                    }),
                    _ => match self.alpha.lookup(&name) {
                        Some(v) => Ok(F::Atom(v)),
                        None => Err(ParseError::Undeclared { name, pos }),
                    },
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(f)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// `X`, `G`, `F` and juxtapositions such as `XX` or `GF`.
fn is_unary_chain(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| matches!(c, 'X' | 'F' | 'G'))
}

/// Parse an LTL formula. Precedence, tightest first: `!`, `X G F`, `U W R`,
/// `&`, `|`, `->`, `<->`. Binary temporal operators and `->` associate to the
/// right. Juxtaposed unary operators (`XX p`) are accepted.
pub fn parse_formula(text: &str, alpha: &Alphabet) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, alpha };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

// --- normal form -------------------------------------------------------------

/// Negation normal form over the core `true false X U R & |`, with negation
/// only on atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (F::True, false) | (F::False, true) => F::True,
        (F::True, true) | (F::False, false) => F::False,
        (F::Atom(_), false) => f.clone(),
        (F::Atom(_), true) => F::not(f.clone()),
        (F::Not(a), _) => nnf(a, !neg),
        (F::And(a, b), false) => F::and(nnf(a, false), nnf(b, false)),
        (F::And(a, b), true) => F::or(nnf(a, true), nnf(b, true)),
        (F::Or(a, b), false) => F::or(nnf(a, false), nnf(b, false)),
        (F::Or(a, b), true) => F::and(nnf(a, true), nnf(b, true)),
        (F::Next(a), _) => F::next(nnf(a, neg)),
        (F::Until(a, b), false) => F::until(nnf(a, false), nnf(b, false)),
        (F::Until(a, b), true) => F::release(nnf(a, true), nnf(b, true)),
        (F::Release(a, b), false) => F::release(nnf(a, false), nnf(b, false)),
        (F::Release(a, b), true) => F::until(nnf(a, true), nnf(b, true)),
        // a W b == b R (a | b)
        (F::WeakUntil(a, b), false) => F::release(nnf(b, false), F::or(nnf(a, false), nnf(b, false))),
        (F::WeakUntil(a, b), true) => F::until(nnf(b, true), F::and(nnf(a, true), nnf(b, true))),
        (F::Eventually(a), false) => F::until(F::True, nnf(a, false)),
        (F::Eventually(a), true) => F::release(F::False, nnf(a, true)),
        (F::Always(a), false) => F::release(F::False, nnf(a, false)),
        (F::Always(a), true) => F::until(F::True, nnf(a, true)),
    }
}

// --- evaluation ----------------------------------------------------------------

/// Truth value of `f` on `w`. Every node of `f` is evaluated once per lasso
/// position; fixpoint operators are solved on the finite position graph.
pub fn eval_lasso(f: &Formula, w: &LassoWord, alpha: &Alphabet) -> bool {
    truth(f, w, alpha)[0]
}

fn truth(f: &Formula, w: &LassoWord, alpha: &Alphabet) -> Vec<bool> {
    let n = w.span();
    match f {
        F::True => vec![true; n],
        F::False => vec![false; n],
        F::Atom(v) => (0..n).map(|j| alpha.holds(*v, w.at(j))).collect(),
        F::Not(a) => truth(a, w, alpha).into_iter().map(|x| !x).collect(),
        F::And(a, b) => zip(truth(a, w, alpha), truth(b, w, alpha), |x, y| x && y),
        F::Or(a, b) => zip(truth(a, w, alpha), truth(b, w, alpha), |x, y| x || y),
        F::Next(a) => {
            let t = truth(a, w, alpha);
            (0..n).map(|j| t[w.succ(j)]).collect()
        }
        F::Until(a, b) => {
            let (ta, tb) = (truth(a, w, alpha), truth(b, w, alpha));
            fixpoint(w, false, |j, nx| tb[j] || (ta[j] && nx))
        }
        F::WeakUntil(a, b) => {
            let (ta, tb) = (truth(a, w, alpha), truth(b, w, alpha));
            fixpoint(w, true, |j, nx| tb[j] || (ta[j] && nx))
        }
        F::Release(a, b) => {
            let (ta, tb) = (truth(a, w, alpha), truth(b, w, alpha));
            fixpoint(w, true, |j, nx| tb[j] && (ta[j] || nx))
        }
        F::Eventually(a) => {
            let t = truth(a, w, alpha);
            fixpoint(w, false, |j, nx| t[j] || nx)
        }
        F::Always(a) => {
            let t = truth(a, w, alpha);
            fixpoint(w, true, |j, nx| t[j] && nx)
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Least (`init = false`) or greatest (`init = true`) solution of
/// `v[j] = step(j, v[succ j])` over the lasso positions.
fn fixpoint(w: &LassoWord, init: bool, step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    let n = w.span();
    let mut v = vec![init; n];
    loop {
        let mut changed = false;
        for j in (0..n).rev() {
            let nv = step(j, v[w.succ(j)]);
            if nv != v[j] {
                v[j] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}
