//! Tableau translation from NNF LTL to a Büchi automaton.
//!
//! States are sets of obligations still to be met from the current step on.
//! Expanding an obligation set yields branches: literal constraints on the
//! current letter, the obligations for the next step, and the set of until
//! formulas whose fulfilment was postponed. A transition is marked for an
//! until formula when it did not postpone it; the generalized condition is
//! then turned into a state-based one with a level counter.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::{complete_nba, Nba, Ucw};
use crate::logic::{to_nnf, Alphabet, Formula, Side, Var};

pub const DEFAULT_STATE_CAP: usize = 50_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("translation too large: more than {0} automaton states")]
    TooLarge(usize),
    #[error("formula is not in negation normal form")]
    NotNnf,
}

type Obligations = BTreeSet<Formula>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Branch {
    pos: u32,
    neg: u32,
    postponed: u64,
    next: Obligations,
}

impl Branch {
    fn subsumes(&self, other: &Branch) -> bool {
        self.pos & !other.pos == 0
            && self.neg & !other.neg == 0
            && self.postponed & !other.postponed == 0
            && self.next.is_subset(&other.next)
    }
}

fn var_bit(v: Var) -> u32 {
    match v.side {
        Side::Input => 1 << v.index,
        Side::Output => 1 << (16 + v.index as u32),
    }
}

struct Tableau {
    untils: BTreeMap<Formula, usize>,
}

impl Tableau {
    fn collect(&mut self, f: &Formula) {
        match f {
            Formula::Until(a, b) => {
                let n = self.untils.len();
                self.untils.entry(f.clone()).or_insert(n);
                self.collect(a);
                self.collect(b);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Release(a, b) => {
                self.collect(a);
                self.collect(b);
            }
            Formula::Not(a) | Formula::Next(a) => self.collect(a),
            _ => {}
        }
    }

    fn expand(&self, mut todo: Vec<Formula>, mut br: Branch, out: &mut Vec<Branch>) {
        while let Some(f) = todo.pop() {
            match f {
                Formula::True => {}
                Formula::False => return,
                Formula::Atom(v) => {
                    let b = var_bit(v);
                    if br.neg & b != 0 {
                        return;
                    }
                    br.pos |= b;
                }
                Formula::Not(ref a) => {
                    let Formula::Atom(v) = **a else {
                        unreachable!("checked NNF")
                    };
                    let b = var_bit(v);
                    if br.pos & b != 0 {
                        return;
                    }
                    br.neg |= b;
                }
                Formula::And(a, b) => {
                    todo.push(*a);
                    todo.push(*b);
                }
                Formula::Or(a, b) => {
                    let mut left = todo.clone();
                    left.push(*a);
                    self.expand(left, br.clone(), out);
                    todo.push(*b);
                }
                Formula::Next(a) => match *a {
                    Formula::True => {}
                    Formula::False => return,
                    g => {
                        br.next.insert(g);
                    }
                },
                Formula::Until(ref a, ref b) => {
                    let mut now = todo.clone();
                    now.push((**b).clone());
                    self.expand(now, br.clone(), out);
                    br.postponed |= 1 << self.untils[&f];
                    todo.push((**a).clone());
                    br.next.insert(f.clone());
                }
                Formula::Release(ref a, ref b) => {
                    let mut both = todo.clone();
                    both.push((**a).clone());
                    both.push((**b).clone());
                    self.expand(both, br.clone(), out);
                    todo.push((**b).clone());
                    br.next.insert(f.clone());
                }
                Formula::WeakUntil(..) | Formula::Eventually(_) | Formula::Always(_) => {
                    unreachable!("checked NNF")
                }
            }
        }
        out.push(br);
    }

    fn branches(&self, obligations: &Obligations) -> Vec<Branch> {
        let mut out = Vec::new();
        let start = Branch {
            pos: 0,
            neg: 0,
            postponed: 0,
            next: Obligations::new(),
        };
        self.expand(obligations.iter().cloned().collect(), start, &mut out);
        out.sort();
        out.dedup();
        let keep: Vec<bool> = (0..out.len())
            .map(|j| !(0..out.len()).any(|i| i != j && out[i].subsumes(&out[j]) && (out[i] != out[j])))
            .collect();
        out.into_iter().zip(keep).filter(|(_, k)| *k).map(|(b, _)| b).collect()
    }
}

fn letter_bits(alpha: &Alphabet) -> Vec<u32> {
    alpha
        .letters()
        .map(|l| {
            let mut bits = 0;
            for j in 0..alpha.inputs().len() {
                let v = Var {
                    side: Side::Input,
                    index: j as u8,
                };
                if alpha.holds(v, l) {
                    bits |= var_bit(v);
                }
            }
            for j in 0..alpha.outputs().len() {
                let v = Var {
                    side: Side::Output,
                    index: j as u8,
                };
                if alpha.holds(v, l) {
                    bits |= var_bit(v);
                }
            }
            bits
        })
        .collect()
}

/// Translate an NNF formula with the default state cap.
pub fn ltl_to_nba(f: &Formula, alpha: &Alphabet) -> Result<Nba, TranslateError> {
    ltl_to_nba_capped(f, alpha, DEFAULT_STATE_CAP)
}

/// Translate an NNF formula into a Büchi automaton accepting exactly its
/// models. Fails once more than `cap` states would be built.
pub fn ltl_to_nba_capped(f: &Formula, alpha: &Alphabet, cap: usize) -> Result<Nba, TranslateError> {
    if !f.is_nnf() {
        return Err(TranslateError::NotNnf);
    }
    let mut tab = Tableau {
        untils: BTreeMap::new(),
    };
    tab.collect(f);
    let n_untils = tab.untils.len();
    if n_untils > 63 {
        return Err(TranslateError::TooLarge(cap));
    }
    let all_marks: u64 = (1u64 << n_untils) - 1;
    let bits = letter_bits(alpha);
    let letters = alpha.num_letters();

    let mut init = Obligations::new();
    if *f != Formula::True {
        init.insert(f.clone());
    }
    let mut index: HashMap<(Obligations, usize), usize> = HashMap::new();
    let mut keys: Vec<(Obligations, usize)> = Vec::new();
    let mut expansions: HashMap<Obligations, Vec<Branch>> = HashMap::new();
    let mut succ: Vec<Vec<u32>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((init.clone(), 0), 0);
    keys.push((init, 0));
    queue.push_back(0usize);

    while let Some(s) = queue.pop_front() {
        let (obl, level) = keys[s].clone();
        let brs = expansions
            .entry(obl.clone())
            .or_insert_with(|| tab.branches(&obl))
            .clone();
        let mut targets: Vec<Vec<u32>> = vec![Vec::new(); letters];
        for br in &brs {
            let marks = all_marks & !br.postponed;
            let mut lvl = if level == n_untils { 0 } else { level };
            while lvl < n_untils && marks & (1 << lvl) != 0 {
                lvl += 1;
            }
            let key = (br.next.clone(), lvl);
            let t = match index.get(&key) {
                Some(&t) => t,
                None => {
                    let t = keys.len();
                    if t >= cap {
                        return Err(TranslateError::TooLarge(cap));
                    }
                    index.insert(key.clone(), t);
                    keys.push(key);
                    queue.push_back(t);
                    t
                }
            };
            for (l, &lb) in bits.iter().enumerate() {
                if br.pos & !lb == 0 && br.neg & lb == 0 {
                    targets[l].push(t as u32);
                }
            }
        }
        if succ.len() < (s + 1) * letters {
            succ.resize((s + 1) * letters, Vec::new());
        }
        for (l, t) in targets.into_iter().enumerate() {
            succ[s * letters + l] = t;
        }
    }
    let n = keys.len();
    succ.resize(n * letters, Vec::new());
    let accepting: Vec<bool> = keys.iter().map(|(_, lvl)| *lvl == n_untils).collect();
    let raw = Nba::new(alpha.clone(), n, vec![0], succ, accepting).expect("tableau output is well-formed");
    let mut a = reduce(&raw);
    loop {
        let b = reduce(&simulation_reduce(&a));
        if b.num_states() == a.num_states() && edge_count(&b) == edge_count(&a) {
            return Ok(b);
        }
        a = b;
    }
}

fn edge_count(a: &Nba) -> usize {
    (0..a.num_states())
        .map(|q| {
            (0..a.alphabet().num_letters())
                .map(|l| a.succ_at(q, l).len())
                .sum::<usize>()
        })
        .sum()
}

/// Greatest direct simulation: `sim[p][q]` when `q` can match every move of
/// `p` letter by letter, visiting accepting states whenever `p` does.
fn direct_simulation(a: &Nba) -> Vec<Vec<bool>> {
    let n = a.num_states();
    let letters = a.alphabet().num_letters();
    let mut sim: Vec<Vec<bool>> = (0..n)
        .map(|p| (0..n).map(|q| !a.is_accepting(p) || a.is_accepting(q)).collect())
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for p in 0..n {
            for q in 0..n {
                if p == q || !sim[p][q] {
                    continue;
                }
                let ok = (0..letters).all(|l| {
                    a.succ_at(p, l)
                        .iter()
                        .all(|&pt| a.succ_at(q, l).iter().any(|&qt| sim[pt as usize][qt as usize]))
                });
                if !ok {
                    sim[p][q] = false;
                    changed = true;
                }
            }
        }
    }
    sim
}

/// Merge simulation-equivalent states, then drop every transition whose
/// target is simulated by another target of the same source and letter.
fn simulation_reduce(a: &Nba) -> Nba {
    let n = a.num_states();
    let letters = a.alphabet().num_letters();
    let sim = direct_simulation(a);
    let rep: Vec<usize> = (0..n)
        .map(|q| (0..n).find(|&r| sim[q][r] && sim[r][q]).expect("reflexive"))
        .collect();
    let prune = |targets: BTreeSet<usize>| -> Vec<u32> {
        targets
            .iter()
            .copied()
            .filter(|&t| !targets.iter().any(|&u| u != t && sim[t][u]))
            .map(|t| t as u32)
            .collect()
    };
    let mut succ = vec![Vec::new(); n * letters];
    for q in 0..n {
        if rep[q] != q {
            continue;
        }
        for l in 0..letters {
            let targets: BTreeSet<usize> = (0..n)
                .filter(|&p| rep[p] == q)
                .flat_map(|p| a.succ_at(p, l).iter().map(|&t| rep[t as usize]))
                .collect();
            succ[q * letters + l] = prune(targets);
        }
    }
    let initial = prune(a.initial().iter().map(|&q| rep[q]).collect());
    let accepting = (0..n).map(|q| a.is_accepting(q)).collect();
    // Non-representatives become unreachable and are trimmed by the caller.
    Nba::new(
        a.alphabet().clone(),
        n,
        initial.into_iter().map(|q| q as usize).collect(),
        succ,
        accepting,
    )
    .expect("well-formed")
}

/// Drop states that are unreachable or cannot reach an accepting cycle, then
/// merge bisimilar states. The language is unchanged.
fn reduce(a: &Nba) -> Nba {
    let n = a.num_states();
    let letters = a.alphabet().num_letters();
    let fwd: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            let mut v: Vec<usize> = (0..letters)
                .flat_map(|l| a.succ_at(q, l).iter().map(|&t| t as usize))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let comp = sccs(&fwd);
    let nc = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut good_scc = vec![false; nc];
    for q in 0..n {
        if a.is_accepting(q) && fwd[q].iter().any(|&t| comp[t] == comp[q]) {
            good_scc[comp[q]] = true;
        }
    }
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        for &t in &fwd[q] {
            rev[t].push(q);
        }
    }
    let mut productive = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&q| good_scc[comp[q]]).collect();
    for &q in &stack {
        productive[q] = true;
    }
    while let Some(q) = stack.pop() {
        for &p in &rev[q] {
            if !productive[p] {
                productive[p] = true;
                stack.push(p);
            }
        }
    }
    let mut reach = vec![false; n];
    let mut stack: Vec<usize> = a.initial().iter().copied().filter(|&q| productive[q]).collect();
    for &q in &stack {
        reach[q] = true;
    }
    while let Some(q) = stack.pop() {
        for &t in &fwd[q] {
            if productive[t] && !reach[t] {
                reach[t] = true;
                stack.push(t);
            }
        }
    }
    let live: Vec<usize> = (0..n).filter(|&q| reach[q]).collect();
    if live.is_empty() {
        return Nba::new(a.alphabet().clone(), 1, vec![0], vec![Vec::new(); letters], vec![false])
            .expect("well-formed");
    }
    // Coarsest bisimulation over live states, by signature refinement.
    let mut block: Vec<usize> = vec![usize::MAX; n];
    for &q in &live {
        block[q] = a.is_accepting(q) as usize;
    }
    loop {
        let mut sigs: BTreeMap<(usize, Vec<Vec<usize>>), usize> = BTreeMap::new();
        let mut next = vec![usize::MAX; n];
        for &q in &live {
            let sig: Vec<Vec<usize>> = (0..letters)
                .map(|l| {
                    let mut v: Vec<usize> = a
                        .succ_at(q, l)
                        .iter()
                        .map(|&t| t as usize)
                        .filter(|&t| reach[t])
                        .map(|t| block[t])
                        .collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                })
                .collect();
            let key = (block[q], sig);
            let len = sigs.len();
            next[q] = *sigs.entry(key).or_insert(len);
        }
        let before = live.iter().map(|&q| block[q]).collect::<BTreeSet<_>>().len();
        let after = sigs.len();
        block = next;
        if before == after {
            break;
        }
    }
    // Renumber blocks in order of first appearance along a BFS from the initial state.
    let mut order: Vec<usize> = vec![usize::MAX; n];
    let mut renum: HashMap<usize, usize> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in a.initial() {
        if reach[q] && !renum.contains_key(&block[q]) {
            renum.insert(block[q], renum.len());
            queue.push_back(q);
        }
    }
    let mut rep: Vec<usize> = Vec::new();
    while let Some(q) = queue.pop_front() {
        let b = renum[&block[q]];
        if rep.len() <= b {
            rep.resize(b + 1, usize::MAX);
        }
        if rep[b] == usize::MAX {
            rep[b] = q;
        }
        for l in 0..letters {
            for &t in a.succ_at(q, l) {
                let t = t as usize;
                if reach[t] && !renum.contains_key(&block[t]) {
                    renum.insert(block[t], renum.len());
                    queue.push_back(t);
                }
            }
        }
    }
    for &q in &live {
        order[q] = renum[&block[q]];
    }
    let m = renum.len();
    let mut succ = vec![Vec::new(); m * letters];
    let mut accepting = vec![false; m];
    for (b, &q) in rep.iter().enumerate() {
        accepting[b] = a.is_accepting(q);
        for l in 0..letters {
            succ[b * letters + l] = a
                .succ_at(q, l)
                .iter()
                .map(|&t| t as usize)
                .filter(|&t| reach[t])
                .map(|t| order[t] as u32)
                .collect();
        }
    }
    let mut initial: Vec<usize> = a.initial().iter().filter(|&&q| reach[q]).map(|&q| order[q]).collect();
    initial.sort_unstable();
    initial.dedup();
    Nba::new(a.alphabet().clone(), m, initial, succ, accepting).expect("well-formed")
}

/// Tarjan's strongly connected components, iterative. Returns a component id per node.
fn sccs(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Universal co-Büchi automaton accepting exactly the models of `f`: the
/// Büchi automaton of the negation, completed with a non-counted sink, with
/// its accepting states counted.
pub fn ucw_of_formula(f: &Formula, alpha: &Alphabet) -> Result<Ucw, TranslateError> {
    ucw_of_formula_capped(f, alpha, DEFAULT_STATE_CAP)
}

pub fn ucw_of_formula_capped(f: &Formula, alpha: &Alphabet, cap: usize) -> Result<Ucw, TranslateError> {
    let neg = to_nnf(&Formula::not(f.clone()));
    let nba = complete_nba(&ltl_to_nba_capped(&neg, alpha, cap)?);
    Ok(Ucw::from_complete_nba(&nba).expect("completed automaton"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, IoLetter, LassoWord};

    fn mutex() -> Alphabet {
        Alphabet::new(&["r1", "r2"], &["g1", "g2"]).unwrap()
    }

    #[test]
    fn always_p_is_one_state() {
        let a = mutex();
        let f = to_nnf(&parse_formula("G g1", &a).unwrap());
        let nba = ltl_to_nba(&f, &a).unwrap();
        assert_eq!(nba.num_states(), 1);
        assert!(nba.is_accepting(0));
        for l in a.letters() {
            let want: &[u32] = if l.o & 2 != 0 { &[0] } else { &[] };
            assert_eq!(nba.succ(0, l), want);
        }
    }

    #[test]
    fn true_is_one_accepting_state() {
        let a = mutex();
        let nba = ltl_to_nba(&Formula::True, &a).unwrap();
        assert_eq!(nba.num_states(), 1);
        assert!(nba.is_accepting(0));
        assert!(nba.is_complete());
    }

    #[test]
    fn eventually_grant() {
        let a = mutex();
        let f = to_nnf(&parse_formula("F g1", &a).unwrap());
        let nba = ltl_to_nba(&f, &a).unwrap();
        let grant = LassoWord::new(vec![], vec![IoLetter::new(0, 2)]).unwrap();
        let idle = LassoWord::new(vec![], vec![IoLetter::new(0, 0)]).unwrap();
        assert!(nba.accepts_lasso(&grant));
        assert!(!nba.accepts_lasso(&idle));
    }

    #[test]
    fn cap_is_enforced() {
        let a = mutex();
        let f = to_nnf(&parse_formula("G(r1 -> F g1) & G(r2 -> F g2) & G F (g1 & X g2)", &a).unwrap());
        assert_eq!(ltl_to_nba_capped(&f, &a, 2), Err(TranslateError::TooLarge(2)));
        assert!(ltl_to_nba(&f, &a).is_ok());
    }

    #[test]
    fn rejects_non_nnf() {
        let a = mutex();
        let f = parse_formula("G g1", &a).unwrap();
        assert_eq!(ltl_to_nba(&f, &a), Err(TranslateError::NotNnf));
    }
}
