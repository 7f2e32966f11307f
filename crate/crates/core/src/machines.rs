//! Mealy and preMealy machines, prefix-tree acceptors, state merging and
//! quotients, reachable automaton states, and DOT / text rendering.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::automata::text::{content_lines, fmt_set, parse_index, parse_preamble, parse_set, split_transition, syntax};
use crate::automata::{FormatError, Ucw};
use crate::logic::{Alphabet, IoLetter, IoWord, Side, Valuation};

/// One defined transition: output and target state.
pub type Edge = (Valuation, usize);

/// Deterministic transducer whose transition function may be partial.
/// A missing `(state, input)` entry is a hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreMealy {
    alpha: Alphabet,
    initial: usize,
    num_states: usize,
    trans: Vec<Option<Edge>>,
}

/// A preMealy machine without holes. Completeness is a property checked with
/// [`PreMealy::is_complete`], not a separate representation.
pub type Mealy = PreMealy;

/// Finite example words.
pub type ExampleSet = Vec<IoWord>;

/// Result of reading an input sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunResult {
    Reached {
        state: usize,
        last_output: Option<Valuation>,
    },
    Hole {
        pos: usize,
        state: usize,
    },
}

/// Length-lexicographic order on words.
pub fn ll_cmp(a: &[IoLetter], b: &[IoLetter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl PreMealy {
    /// A machine with `n` states and no transitions.
    pub fn new(alpha: Alphabet, num_states: usize, initial: usize) -> Self {
        assert!(initial < num_states);
        let width = alpha.num_inputs();
        PreMealy {
            alpha,
            initial,
            num_states,
            trans: vec![None; num_states * width],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alpha
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn add_state(&mut self) -> usize {
        self.num_states += 1;
        self.trans.extend(std::iter::repeat_n(None, self.alpha.num_inputs()));
        self.num_states - 1
    }

    pub fn get(&self, q: usize, i: Valuation) -> Option<Edge> {
        self.trans[q * self.alpha.num_inputs() + i as usize]
    }

    pub fn set(&mut self, q: usize, i: Valuation, o: Valuation, t: usize) {
        assert!(t < self.num_states && (o as usize) < self.alpha.num_outputs());
        let w = self.alpha.num_inputs();
        self.trans[q * w + i as usize] = Some((o, t));
    }

    pub fn is_complete(&self) -> bool {
        self.trans.iter().all(Option::is_some)
    }

    pub fn num_holes(&self) -> usize {
        self.trans.iter().filter(|t| t.is_none()).count()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.len() - self.num_holes()
    }

    /// Defined transitions as `(src, input, output, dst)`, by source then input.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, Valuation, Valuation, usize)> + '_ {
        let w = self.alpha.num_inputs();
        self.trans
            .iter()
            .enumerate()
            .filter_map(move |(k, t)| t.map(|(o, d)| (k / w, (k % w) as Valuation, o, d)))
    }

    /// Reachable states in breadth-first order, successors visited by input.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut k = 0;
        while k < order.len() {
            let q = order[k];
            k += 1;
            for i in 0..self.alpha.num_inputs() as Valuation {
                if let Some((_, t)) = self.get(q, i) {
                    if !seen[t] {
                        seen[t] = true;
                        order.push(t);
                    }
                }
            }
        }
        order
    }

    /// First hole in breadth-first state order, inputs ascending.
    pub fn first_hole(&self) -> Option<(usize, Valuation)> {
        self.bfs_order()
            .into_iter()
            .flat_map(|q| (0..self.alpha.num_inputs() as Valuation).map(move |i| (q, i)))
            .find(|&(q, i)| self.get(q, i).is_none())
    }

    pub fn run(&self, inputs: &[Valuation]) -> RunResult {
        let mut q = self.initial;
        let mut last = None;
        for (pos, &i) in inputs.iter().enumerate() {
            match self.get(q, i) {
                Some((o, t)) => {
                    last = Some(o);
                    q = t;
                }
                None => return RunResult::Hole { pos, state: q },
            }
        }
        RunResult::Reached {
            state: q,
            last_output: last,
        }
    }

    /// Output word produced on `inputs`, if no hole is met.
    pub fn outputs(&self, inputs: &[Valuation]) -> Option<IoWord> {
        let mut q = self.initial;
        let mut w = Vec::with_capacity(inputs.len());
        for &i in inputs {
            let (o, t) = self.get(q, i)?;
            w.push(IoLetter::new(i, o));
            q = t;
        }
        Some(w)
    }

    pub fn accepts(&self, w: &[IoLetter]) -> bool {
        let mut q = self.initial;
        for l in w {
            match self.get(q, l.i) {
                Some((o, t)) if o == l.o => q = t,
                _ => return false,
            }
        }
        true
    }

    /// The sub-machine on reachable states, renumbered in breadth-first order.
    pub fn trim(&self) -> PreMealy {
        let order = self.bfs_order();
        let mut pos = vec![usize::MAX; self.num_states];
        for (k, &q) in order.iter().enumerate() {
            pos[q] = k;
        }
        let mut out = PreMealy::new(self.alpha.clone(), order.len(), 0);
        for (k, &q) in order.iter().enumerate() {
            for i in 0..self.alpha.num_inputs() as Valuation {
                if let Some((o, t)) = self.get(q, i) {
                    out.set(k, i, o, pos[t]);
                }
            }
        }
        out
    }

    /// Structural equality up to renaming of states, initial state fixed.
    /// Every state of both machines must take part in the bijection.
    pub fn isomorphic(&self, other: &PreMealy) -> bool {
        if self.alpha != other.alpha || self.num_states != other.num_states {
            return false;
        }
        let mut fwd = vec![usize::MAX; self.num_states];
        let mut bwd = vec![usize::MAX; other.num_states];
        fwd[self.initial] = other.initial;
        bwd[other.initial] = self.initial;
        let mut queue = VecDeque::from([self.initial]);
        let mut mapped = 1;
        while let Some(q) = queue.pop_front() {
            let p = fwd[q];
            for i in 0..self.alpha.num_inputs() as Valuation {
                match (self.get(q, i), other.get(p, i)) {
                    (None, None) => {}
                    (Some((o1, t1)), Some((o2, t2))) if o1 == o2 => {
                        if fwd[t1] == usize::MAX && bwd[t2] == usize::MAX {
                            fwd[t1] = t2;
                            bwd[t2] = t1;
                            mapped += 1;
                            queue.push_back(t1);
                        } else if fwd[t1] != t2 || bwd[t2] != t1 {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
        mapped == self.num_states
    }

    /// Graphviz rendering. Edges with the same endpoints and output are
    /// grouped; their input sets are printed as a small DNF.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph mealy {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.num_states {
            let _ = writeln!(s, "  q{q} [shape=circle];");
        }
        let _ = writeln!(s, "  init -> q{};", self.initial);
        let mut groups: BTreeMap<(usize, usize, Valuation), Vec<Valuation>> = BTreeMap::new();
        for (q, i, o, t) in self.transitions() {
            groups.entry((q, t, o)).or_default().push(i);
        }
        for ((q, t, o), ins) in groups {
            let label = format!(
                "{} / {}",
                dnf(&self.alpha, Side::Input, &ins),
                self.alpha.conjunction(Side::Output, o)
            );
            let _ = writeln!(s, "  q{q} -> q{t} [label=\"{label}\"];");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let a = &self.alpha;
        let mut s = String::from("mealy\n");
        let _ = writeln!(s, "inputs: {}", a.inputs().join(" "));
        let _ = writeln!(s, "outputs: {}", a.outputs().join(" "));
        let _ = writeln!(s, "states: {}", self.num_states);
        let _ = writeln!(s, "initial: {}", self.initial);
        for (q, i, o, t) in self.transitions() {
            let _ = writeln!(
                s,
                "{q} {}/{} -> {t}",
                fmt_set(a, Side::Input, i),
                fmt_set(a, Side::Output, o)
            );
        }
        s
    }
}

/// Parse the `mealy` text format: like the automaton format but with one
/// target per line and a single output valuation.
pub fn parse_machine(text: &str) -> Result<PreMealy, FormatError> {
    let mut lines = content_lines(text);
    let (alpha, num, initial) = parse_preamble(&mut lines, "mealy")?;
    let mut m = PreMealy::new(alpha.clone(), num, initial);
    for (n, l) in lines {
        let (src, i, o, dst) = split_transition(n, l)?;
        let src = parse_index(n, src, num)?;
        let dst = parse_index(n, dst, num)?;
        let ins = parse_set(n, i, Side::Input, &alpha)?;
        let outs = parse_set(n, o, Side::Output, &alpha)?;
        let [o] = outs[..] else {
            return Err(syntax(n, "a transition has exactly one output valuation"));
        };
        for iv in ins {
            match m.get(src, iv) {
                Some(prev) if prev != (o, dst) => {
                    return Err(syntax(n, "conflicting transition for this state and input"));
                }
                _ => m.set(src, iv, o, dst),
            }
        }
    }
    Ok(m)
}

/// Minimal sum of cubes for a set of valuations, rendered over the side's
/// proposition names. Prime implicants are found by repeated merging and a
/// cover is chosen greedily.
fn dnf(alpha: &Alphabet, side: Side, vals: &[Valuation]) -> String {
    let names = match side {
        Side::Input => alpha.inputs(),
        Side::Output => alpha.outputs(),
    };
    let n = names.len();
    let full: Valuation = (1 << n) - 1;
    let minterms: BTreeSet<Valuation> = vals.iter().copied().collect();
    if minterms.len() == 1 << n {
        return "true".into();
    }
    let mut level: BTreeSet<(Valuation, Valuation)> = minterms.iter().map(|&v| (full, v)).collect();
    let mut primes: Vec<(Valuation, Valuation)> = Vec::new();
    while !level.is_empty() {
        let mut next = BTreeSet::new();
        let mut used = BTreeSet::new();
        for &a in &level {
            for &b in &level {
                let diff = a.1 ^ b.1;
                if a.0 == b.0 && diff.count_ones() == 1 {
                    next.insert((a.0 & !diff, a.1 & !diff));
                    used.insert(a);
                    used.insert(b);
                }
            }
        }
        primes.extend(level.iter().filter(|c| !used.contains(c)));
        level = next;
    }
    primes.sort_by_key(|&(care, val)| (care.count_ones(), std::cmp::Reverse(care), val));
    let covers = |c: (Valuation, Valuation), v: Valuation| v & c.0 == c.1;
    let mut uncovered = minterms;
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let best = primes
            .iter()
            .copied()
            .max_by_key(|&c| {
                let hit = uncovered.iter().filter(|&&v| covers(c, v)).count();
                (hit, std::cmp::Reverse(c.0.count_ones()))
            })
            .expect("minterms are covered by primes");
        uncovered.retain(|&v| !covers(best, v));
        chosen.push(best);
    }
    chosen.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
    chosen
        .iter()
        .map(|&(care, val)| {
            (0..n)
                .filter(|&j| care & (1 << (n - 1 - j)) != 0)
                .map(|j| {
                    if val & (1 << (n - 1 - j)) != 0 {
                        names[j].clone()
                    } else {
                        format!("!{}", names[j])
                    }
                })
                .collect::<Vec<_>>()
                .join(" & ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Two examples disagree on the output after a common prefix and input.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("inconsistent examples: after {} steps, input {input} yields outputs {first} and {second}", prefix.len())]
pub struct Inconsistency {
    pub prefix: IoWord,
    pub input: Valuation,
    pub first: Valuation,
    pub second: Valuation,
}

/// Build the prefix-tree acceptor of the examples. States are numbered in
/// length-lexicographic order of the prefixes they stand for.
pub fn pta_build(alpha: &Alphabet, examples: &[IoWord]) -> Result<PreMealy, Inconsistency> {
    let width = alpha.num_inputs();
    let mut tree: Vec<Vec<Option<Edge>>> = vec![vec![None; width]];
    for w in examples {
        let mut node = 0;
        for (pos, l) in w.iter().enumerate() {
            match tree[node][l.i as usize] {
                Some((o, t)) if o == l.o => node = t,
                Some((o, _)) => {
                    return Err(Inconsistency {
                        prefix: w[..pos].to_vec(),
                        input: l.i,
                        first: o,
                        second: l.o,
                    })
                }
                None => {
                    let t = tree.len();
                    tree.push(vec![None; width]);
                    tree[node][l.i as usize] = Some((l.o, t));
                    node = t;
                }
            }
        }
    }
    let mut raw = PreMealy::new(alpha.clone(), tree.len(), 0);
    for (q, row) in tree.iter().enumerate() {
        for (i, e) in row.iter().enumerate() {
            if let Some((o, t)) = *e {
                raw.set(q, i as Valuation, o, t);
            }
        }
    }
    Ok(raw.trim())
}

/// Whether every common prefix is continued with a unique output.
pub fn is_consistent(alpha: &Alphabet, examples: &[IoWord]) -> Result<(), Inconsistency> {
    pta_build(alpha, examples).map(|_| ())
}

/// Order in which non-congruent points are resolved while folding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldOrder {
    Fifo,
    Lifo,
}

/// Equivalence on the states of a fixed machine. Each class is represented
/// by its least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatePartition {
    parent: Vec<usize>,
}

impl StatePartition {
    /// The identity relation.
    pub fn discrete(n: usize) -> Self {
        StatePartition {
            parent: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn same(&self, x: usize, y: usize) -> bool {
        self.find(x) == self.find(y)
    }

    fn union(&mut self, x: usize, y: usize) -> Option<(usize, usize)> {
        let (a, b) = (self.find(x), self.find(y));
        if a == b {
            return None;
        }
        let (root, child) = (a.min(b), a.max(b));
        self.parent[child] = root;
        for k in 0..self.parent.len() {
            let r = self.find(k);
            self.parent[k] = r;
        }
        Some((root, child))
    }

    /// Classes ordered by least member, each sorted.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut by_rep: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            by_rep.entry(self.find(x)).or_default().push(x);
        }
        by_rep.into_values().collect()
    }

    pub fn num_classes(&self) -> usize {
        (0..self.parent.len()).filter(|&x| self.parent[x] == x).count()
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &StatePartition) -> bool {
        (0..self.len()).all(|x| other.same(x, self.find(x)))
    }
}

/// Outcome of folding: the resulting congruence and whether some class
/// ended up with two different outputs for the same input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeOutcome {
    pub partition: StatePartition,
    pub output_conflict: bool,
}

/// Merge the classes of `x` and `y`, then fold successors until the
/// relation is a congruence for the transition structure.
pub fn merge_class(m: &PreMealy, part: &StatePartition, x: usize, y: usize) -> MergeOutcome {
    merge_class_with(m, part, x, y, FoldOrder::Fifo)
}

pub fn merge_class_with(m: &PreMealy, part: &StatePartition, x: usize, y: usize, order: FoldOrder) -> MergeOutcome {
    let width = m.alpha.num_inputs();
    let mut p = part.clone();
    let mut table: Vec<Vec<Option<Edge>>> = vec![vec![None; width]; m.num_states];
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    let mut conflict = false;
    for (q, i, o, t) in m.transitions() {
        let r = p.find(q);
        match table[r][i as usize] {
            None => table[r][i as usize] = Some((o, t)),
            Some((o2, t2)) => {
                conflict |= o2 != o;
                work.push_back((t2, t));
            }
        }
    }
    work.push_front((x, y));
    loop {
        let next = match order {
            FoldOrder::Fifo => work.pop_front(),
            FoldOrder::Lifo => work.pop_back(),
        };
        let Some((a, b)) = next else { break };
        let Some((root, child)) = p.union(a, b) else { continue };
        for i in 0..width {
            match (table[root][i], table[child][i]) {
                (Some((o1, t1)), Some((o2, t2))) => {
                    conflict |= o1 != o2;
                    work.push_back((t1, t2));
                }
                (None, Some(e)) => table[root][i] = Some(e),
                _ => {}
            }
        }
    }
    MergeOutcome {
        partition: p,
        output_conflict: conflict,
    }
}

/// Whether merging `x` and `y` yields a congruence that agrees on outputs.
pub fn mergeable(m: &PreMealy, part: &StatePartition, x: usize, y: usize) -> bool {
    !merge_class(m, part, x, y).output_conflict
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum QuotientError {
    #[error("partition is not a congruence: states {x} and {y} differ on input {input}")]
    NotCongruent { x: usize, y: usize, input: Valuation },
    #[error("partition size {0} does not match the machine")]
    SizeMismatch(usize),
}

/// The machine on classes. Classes are numbered by least member; a class
/// transition is defined when some member defines it.
pub fn quotient(m: &PreMealy, part: &StatePartition) -> Result<PreMealy, QuotientError> {
    if part.len() != m.num_states {
        return Err(QuotientError::SizeMismatch(part.len()));
    }
    let classes = part.classes();
    let mut index = vec![0; m.num_states];
    for (c, members) in classes.iter().enumerate() {
        for &s in members {
            index[s] = c;
        }
    }
    let mut out = PreMealy::new(m.alpha.clone(), classes.len(), index[m.initial]);
    let mut witness: Vec<Vec<usize>> = vec![vec![usize::MAX; m.alpha.num_inputs()]; classes.len()];
    for (q, i, o, t) in m.transitions() {
        let c = index[q];
        match out.get(c, i) {
            None => {
                out.set(c, i, o, index[t]);
                witness[c][i as usize] = q;
            }
            Some((o2, t2)) if o2 != o || t2 != index[t] => {
                return Err(QuotientError::NotCongruent {
                    x: witness[c][i as usize],
                    y: q,
                    input: i,
                })
            }
            _ => {}
        }
    }
    Ok(out)
}

/// For each machine state, the automaton states reachable along some word
/// that leads the machine there.
pub fn reach_sets(m: &PreMealy, a: &Ucw) -> Vec<BTreeSet<usize>> {
    assert_eq!(m.alphabet(), a.alphabet());
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.num_states];
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    for &q in a.initial() {
        if sets[m.initial].insert(q) {
            work.push_back((m.initial, q));
        }
    }
    while let Some((s, q)) = work.pop_front() {
        for i in 0..m.alpha.num_inputs() as Valuation {
            if let Some((o, t)) = m.get(s, i) {
                for &q2 in a.succ(q, IoLetter::new(i, o)) {
                    if sets[t].insert(q2 as usize) {
                        work.push_back((t, q2 as usize));
                    }
                }
            }
        }
    }
    sets
}
