//! Büchi and universal co-Büchi automata over input/output letters.

mod ltl;
mod product;
pub(crate) mod text;

pub use ltl::{ltl_to_nba, ltl_to_nba_capped, ucw_of_formula, TranslateError, DEFAULT_STATE_CAP};
pub use product::{product_counterexample, product_empty};
pub use text::{parse_automaton, serialize_automaton, FormatError};

use thiserror::Error;

use crate::logic::{Alphabet, IoLetter, LassoWord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("automaton has no initial state")]
    NoInitial,
    #[error("state index {0} out of range")]
    BadState(usize),
    #[error("transition table has wrong shape")]
    BadShape,
    #[error("state {state} has no successor on letter {letter}")]
    Incomplete { state: usize, letter: usize },
}

fn check_shape(alpha: &Alphabet, n: usize, initial: &[usize], succ: &[Vec<u32>]) -> Result<(), AutomatonError> {
    if initial.is_empty() {
        return Err(AutomatonError::NoInitial);
    }
    if succ.len() != n * alpha.num_letters() {
        return Err(AutomatonError::BadShape);
    }
    if let Some(&q) = initial.iter().find(|&&q| q >= n) {
        return Err(AutomatonError::BadState(q));
    }
    for list in succ {
        if let Some(&q) = list.iter().find(|&&q| q as usize >= n) {
            return Err(AutomatonError::BadState(q as usize));
        }
    }
    Ok(())
}

/// Nondeterministic Büchi automaton with state-based acceptance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nba {
    alpha: Alphabet,
    num_states: usize,
    initial: Vec<usize>,
    succ: Vec<Vec<u32>>,
    accepting: Vec<bool>,
}

impl Nba {
    /// `succ` is indexed by `state * num_letters + letter_index`.
    pub fn new(
        alpha: Alphabet,
        num_states: usize,
        initial: Vec<usize>,
        mut succ: Vec<Vec<u32>>,
        accepting: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        check_shape(&alpha, num_states, &initial, &succ)?;
        if accepting.len() != num_states {
            return Err(AutomatonError::BadShape);
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Nba {
            alpha,
            num_states,
            initial,
            succ,
            accepting,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alpha
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn succ(&self, q: usize, l: IoLetter) -> &[u32] {
        self.succ_at(q, self.alpha.letter_index(l))
    }

    pub fn succ_at(&self, q: usize, letter: usize) -> &[u32] {
        &self.succ[q * self.alpha.num_letters() + letter]
    }

    pub fn is_complete(&self) -> bool {
        self.succ.iter().all(|s| !s.is_empty())
    }

    /// Existential Büchi membership of a lasso word.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let span = w.span();
        let p = w.prefix().len();
        let next_pos = |pos: usize| if pos + 1 < span { pos + 1 } else { p };
        let n = self.num_states;
        let idx = |pos: usize, q: usize| pos * n + q;
        let succs = |node: usize| -> Vec<usize> {
            let (pos, q) = (node / n, node % n);
            let np = next_pos(pos);
            self.succ(q, w.at(pos)).iter().map(|&t| idx(np, t as usize)).collect()
        };
        let mut seen = vec![false; span * n];
        let mut stack: Vec<usize> = self.initial.iter().map(|&q| idx(0, q)).collect();
        for &s in &stack {
            seen[s] = true;
        }
        let mut reach = Vec::new();
        while let Some(v) = stack.pop() {
            reach.push(v);
            for t in succs(v) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        reach.into_iter().filter(|&v| self.accepting[v % n]).any(|v| {
            let mut seen = vec![false; span * n];
            let mut stack = succs(v);
            while let Some(x) = stack.pop() {
                if x == v {
                    return true;
                }
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(succs(x));
                }
            }
            false
        })
    }
}

/// Add one non-accepting sink absorbing every missing transition. Returns
/// the automaton unchanged when it is already complete.
pub fn complete_nba(a: &Nba) -> Nba {
    if a.is_complete() {
        return a.clone();
    }
    let sink = a.num_states as u32;
    let letters = a.alpha.num_letters();
    let mut succ = a.succ.clone();
    for list in &mut succ {
        if list.is_empty() {
            list.push(sink);
        }
    }
    succ.extend((0..letters).map(|_| vec![sink]));
    let mut accepting = a.accepting.clone();
    accepting.push(false);
    Nba {
        alpha: a.alpha.clone(),
        num_states: a.num_states + 1,
        initial: a.initial.clone(),
        succ,
        accepting,
    }
}

/// Universal co-Büchi automaton: a word is accepted when every run visits
/// counted states finitely often. The transition relation is complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ucw {
    alpha: Alphabet,
    num_states: usize,
    initial: Vec<usize>,
    succ: Vec<Vec<u32>>,
    counted: Vec<bool>,
}

impl Ucw {
    /// `succ` is indexed by `state * num_letters + letter_index`.
    pub fn new(
        alpha: Alphabet,
        num_states: usize,
        mut initial: Vec<usize>,
        mut succ: Vec<Vec<u32>>,
        counted: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        check_shape(&alpha, num_states, &initial, &succ)?;
        if counted.len() != num_states {
            return Err(AutomatonError::BadShape);
        }
        let letters = alpha.num_letters();
        for (k, list) in succ.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(AutomatonError::Incomplete {
                    state: k / letters,
                    letter: k % letters,
                });
            }
            list.sort_unstable();
            list.dedup();
        }
        initial.sort_unstable();
        initial.dedup();
        Ok(Ucw {
            alpha,
            num_states,
            initial,
            succ,
            counted,
        })
    }

    /// Reinterpret a complete NBA universally; accepting states become counted.
    pub fn from_complete_nba(a: &Nba) -> Result<Self, AutomatonError> {
        Ucw::new(
            a.alpha.clone(),
            a.num_states,
            a.initial.clone(),
            a.succ.clone(),
            a.accepting.clone(),
        )
    }

    /// The same graph read existentially, with counted states accepting.
    /// Its language is the complement of this automaton's.
    pub fn dual_nba(&self) -> Nba {
        Nba {
            alpha: self.alpha.clone(),
            num_states: self.num_states,
            initial: self.initial.clone(),
            succ: self.succ.clone(),
            accepting: self.counted.clone(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alpha
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_counted(&self, q: usize) -> bool {
        self.counted[q]
    }

    pub fn num_counted(&self) -> usize {
        self.counted.iter().filter(|&&c| c).count()
    }

    pub fn succ(&self, q: usize, l: IoLetter) -> &[u32] {
        self.succ_at(q, self.alpha.letter_index(l))
    }

    pub fn succ_at(&self, q: usize, letter: usize) -> &[u32] {
        &self.succ[q * self.alpha.num_letters() + letter]
    }

    /// Universal co-Büchi membership of a lasso word.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        !self.dual_nba().accepts_lasso(w)
    }

    /// The universal automaton accepting every word.
    pub fn universal(alpha: &Alphabet) -> Ucw {
        let l = alpha.num_letters();
        Ucw::new(alpha.clone(), 1, vec![0], vec![vec![0]; l], vec![false]).expect("well-formed")
    }
}
