//! Test-side generators and oracles. Everything here is written against the
//! raw automaton and machine accessors only, so it can be used to check the
//! library's own algorithms.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::{Path, PathBuf};

use mealysynth::automata::Ucw;
use mealysynth::logic::{Alphabet, IoLetter, IoWord, Valuation};
use mealysynth::machines::{parse_machine, Mealy, PreMealy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(name)
}

pub fn corpus_machine(name: &str) -> PreMealy {
    let text = std::fs::read_to_string(corpus(name)).expect("corpus file");
    parse_machine(&text).expect("corpus machine parses")
}

/// Propositions `i0 i1 ...` and `o0 o1 ...`.
pub fn alphabet(ni: usize, no: usize) -> Alphabet {
    let ins: Vec<String> = (0..ni).map(|k| format!("i{k}")).collect();
    let outs: Vec<String> = (0..no).map(|k| format!("o{k}")).collect();
    Alphabet::new(&ins, &outs).expect("small alphabet")
}

pub fn random_alphabet(rng: &mut ChaCha8Rng, max_props: usize) -> Alphabet {
    let ni = rng.gen_range(0..=max_props);
    let no = rng.gen_range(0..=max_props);
    alphabet(ni, no)
}

fn nonempty_subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<u32> {
    let mut v: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(p)).collect();
    if v.is_empty() {
        v.push(rng.gen_range(0..n as u32));
    }
    v
}

pub fn random_ucw_over(rng: &mut ChaCha8Rng, alpha: &Alphabet, max_states: usize) -> Ucw {
    let n = rng.gen_range(1..=max_states);
    let initial = nonempty_subset(rng, n, 0.3).into_iter().map(|q| q as usize).collect();
    let density = rng.gen_range(0.2..0.6);
    let succ = (0..n * alpha.num_letters())
        .map(|_| nonempty_subset(rng, n, density))
        .collect();
    let counted = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    Ucw::new(alpha.clone(), n, initial, succ, counted).expect("generated automaton is well-formed")
}

pub fn random_ucw(rng: &mut ChaCha8Rng, max_states: usize, max_props: usize) -> Ucw {
    let alpha = random_alphabet(rng, max_props);
    random_ucw_over(rng, &alpha, max_states)
}

/// Counting-function values as plain vectors.
pub type Cf = Vec<i16>;

/// Run prefixes as (state, exact visit count) pairs.
pub type RunSet = BTreeSet<(usize, u16)>;

pub type RunCheck<'a> = dyn FnMut(&RunSet, &[usize]) -> Result<(), String> + 'a;

pub fn oracle_initial(a: &Ucw) -> Cf {
    let mut v = vec![-1; a.num_states()];
    for &q in a.initial() {
        v[q] = if a.is_counted(q) { 1 } else { 0 };
    }
    v
}

pub fn oracle_step(a: &Ucw, k: i16, f: &[i16], letter: usize) -> Cf {
    let n = a.num_states();
    let mut out = vec![-1; n];
    for q in 0..n {
        for p in 0..n {
            if f[p] >= 0 && a.succ_at(p, letter).contains(&(q as u32)) {
                let c = (f[p] + a.is_counted(q) as i16).min(k + 1);
                out[q] = out[q].max(c);
            }
        }
    }
    out
}

pub fn oracle_join(f: &[i16], g: &[i16]) -> Cf {
    f.iter().zip(g).map(|(a, b)| *a.max(b)).collect()
}

pub fn oracle_leq(f: &[i16], g: &[i16]) -> bool {
    f.iter().zip(g).all(|(a, b)| a <= b)
}

pub fn random_cf(rng: &mut ChaCha8Rng, n: usize, k: i16) -> Cf {
    (0..n).map(|_| rng.gen_range(-1..=k + 1)).collect()
}

/// Every run prefix on a word of length at most `depth`, tracked as a set
/// of (state, exact visit count) pairs. At each node, `check` gets the
/// run set and the word so far.
pub fn explore_runs(a: &Ucw, depth: usize, check: &mut RunCheck) -> Result<usize, String> {
    let start: RunSet = a.initial().iter().map(|&q| (q, a.is_counted(q) as u16)).collect();
    let mut seen: HashSet<(RunSet, usize)> = HashSet::new();
    let mut word = Vec::new();
    let mut nodes = 0;
    fn go(
        a: &Ucw,
        runs: RunSet,
        left: usize,
        word: &mut Vec<usize>,
        seen: &mut HashSet<(RunSet, usize)>,
        nodes: &mut usize,
        check: &mut RunCheck,
    ) -> Result<(), String> {
        *nodes += 1;
        check(&runs, word)?;
        if left == 0 || !seen.insert((runs.clone(), left)) {
            return Ok(());
        }
        for l in 0..a.alphabet().num_letters() {
            let mut next = BTreeSet::new();
            for &(p, c) in &runs {
                for &q in a.succ_at(p, l) {
                    next.insert((q as usize, c + a.is_counted(q as usize) as u16));
                }
            }
            word.push(l);
            go(a, next, left - 1, word, seen, nodes, check)?;
            word.pop();
        }
        Ok(())
    }
    go(a, start, depth, &mut word, &mut seen, &mut nodes, check)?;
    Ok(nodes)
}

fn cf_index(f: &[i16], k: i16) -> usize {
    f.iter().fold(0, |acc, &v| acc * (k as usize + 3) + (v + 1) as usize)
}

fn cf_of_index(mut x: usize, n: usize, k: i16) -> Cf {
    let base = k as usize + 3;
    let mut v = vec![0; n];
    for slot in v.iter_mut().rev() {
        *slot = (x % base) as i16 - 1;
        x /= base;
    }
    v
}

/// Winning set of the counting-function game, by enumerating every
/// function and removing losers until nothing changes.
pub fn explicit_winning(a: &Ucw, k: i16) -> Vec<Cf> {
    let n = a.num_states();
    let total = (k as usize + 3).pow(n as u32);
    let all: Vec<Cf> = (0..total).map(|x| cf_of_index(x, n, k)).collect();
    let mut win: Vec<bool> = all.iter().map(|f| f.iter().all(|&v| v <= k)).collect();
    let alpha = a.alphabet();
    let succ: Vec<Vec<usize>> = all
        .iter()
        .map(|f| {
            (0..alpha.num_letters())
                .map(|l| cf_index(&oracle_step(a, k, f, l), k))
                .collect()
        })
        .collect();
    loop {
        let mut changed = false;
        for x in 0..total {
            if !win[x] {
                continue;
            }
            let ok = (0..alpha.num_inputs() as Valuation).all(|i| {
                (0..alpha.num_outputs() as Valuation).any(|o| win[succ[x][alpha.letter_index(IoLetter::new(i, o))]])
            });
            if !ok {
                win[x] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    all.into_iter().zip(win).filter_map(|(f, w)| w.then_some(f)).collect()
}

/// Synchronous label iteration: every round recomputes all labels from the
/// previous ones. Returns the limit and the number of rounds that changed
/// something.
pub fn jacobi_labels(p: &PreMealy, a: &Ucw, k: i16) -> (Vec<Cf>, usize) {
    let alpha = a.alphabet();
    let mut f = vec![vec![-1; a.num_states()]; p.num_states()];
    f[p.initial()] = oracle_initial(a);
    let mut rounds = 0;
    loop {
        let mut next = f.clone();
        for s in 0..p.num_states() {
            for i in 0..alpha.num_inputs() as Valuation {
                if let Some((o, t)) = p.get(s, i) {
                    let g = oracle_step(a, k, &f[s], alpha.letter_index(IoLetter::new(i, o)));
                    next[t] = oracle_join(&next[t], &g);
                }
            }
        }
        if next == f {
            return (f, rounds);
        }
        f = next;
        rounds += 1;
    }
}

pub fn random_premealy(rng: &mut ChaCha8Rng, alpha: &Alphabet, max_states: usize, fill: f64) -> PreMealy {
    let n = rng.gen_range(1..=max_states);
    let mut m = PreMealy::new(alpha.clone(), n, 0);
    for q in 0..n {
        for i in 0..alpha.num_inputs() as Valuation {
            if rng.gen_bool(fill) {
                let o = rng.gen_range(0..alpha.num_outputs() as Valuation);
                m.set(q, i, o, rng.gen_range(0..n));
            }
        }
    }
    m
}

/// Whether every state is reachable and no two states are equivalent.
pub fn is_minimal(m: &Mealy) -> bool {
    let n = m.num_states();
    let w = m.alphabet().num_inputs() as Valuation;
    let mut seen = vec![false; n];
    seen[m.initial()] = true;
    let mut queue = VecDeque::from([m.initial()]);
    while let Some(q) = queue.pop_front() {
        for i in 0..w {
            let (_, t) = m.get(q, i).expect("complete");
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    if seen.contains(&false) {
        return false;
    }
    let mut block = vec![0usize; n];
    loop {
        let sig: Vec<Vec<(Valuation, usize)>> = (0..n)
            .map(|q| {
                (0..w)
                    .map(|i| {
                        let (o, t) = m.get(q, i).expect("complete");
                        (o, block[t])
                    })
                    .collect()
            })
            .collect();
        let mut ids: HashMap<(usize, Vec<(Valuation, usize)>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|q| {
                let len = ids.len();
                *ids.entry((block[q], sig[q].clone())).or_insert(len)
            })
            .collect();
        let stable = ids.len() == block.iter().collect::<HashSet<_>>().len();
        block = next;
        if stable {
            return ids.len() == n;
        }
    }
}

/// A complete, minimal machine with up to `max_states` states.
pub fn random_minimal_machine(rng: &mut ChaCha8Rng, alpha: &Alphabet, max_states: usize) -> Mealy {
    loop {
        let m = random_premealy(rng, alpha, max_states, 1.0);
        if is_minimal(&m) {
            return m;
        }
    }
}

/// The automaton accepting exactly the behaviors of `t`: a copy of `t`
/// plus a counted sink entered on any other output.
pub fn spec_of_machine(t: &Mealy) -> Ucw {
    let alpha = t.alphabet().clone();
    let n = t.num_states();
    let sink = n as u32;
    let mut succ = Vec::new();
    for q in 0..=n {
        for l in 0..alpha.num_letters() {
            if q == n {
                succ.push(vec![sink]);
                continue;
            }
            let IoLetter { i, o } = alpha.letter_at(l);
            let (o2, t2) = t.get(q, i).expect("complete");
            succ.push(vec![if o == o2 { t2 as u32 } else { sink }]);
        }
    }
    let mut counted = vec![false; n + 1];
    counted[n] = true;
    Ucw::new(alpha, n + 1, vec![t.initial()], succ, counted).expect("well-formed")
}

/// Random words produced by `t`.
pub fn random_behaviors(rng: &mut ChaCha8Rng, t: &Mealy, count: usize, max_len: usize) -> Vec<IoWord> {
    let w = t.alphabet().num_inputs() as Valuation;
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            let mut q = t.initial();
            let mut word = Vec::new();
            for _ in 0..len {
                let i = rng.gen_range(0..w);
                let (o, next) = t.get(q, i).expect("complete");
                word.push(IoLetter::new(i, o));
                q = next;
            }
            word
        })
        .collect()
}

/// Whether `m` can follow `w`, producing the recorded outputs.
pub fn follows(m: &PreMealy, w: &[IoLetter]) -> bool {
    let mut q = m.initial();
    for l in w {
        match m.get(q, l.i) {
            Some((o, t)) if o == l.o => q = t,
            _ => return false,
        }
    }
    true
}

/// Whether the product of `m` with `a`, read existentially with counted
/// states accepting, has a reachable cycle through a counted state.
pub fn product_has_accepting_cycle(m: &PreMealy, a: &Ucw) -> bool {
    let alpha = a.alphabet();
    let succs = |(s, q): (usize, usize)| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..alpha.num_inputs() as Valuation {
            if let Some((o, t)) = m.get(s, i) {
                let l = alpha.letter_index(IoLetter::new(i, o));
                out.extend(a.succ_at(q, l).iter().map(|&r| (t, r as usize)));
            }
        }
        out
    };
    let mut reach: HashSet<(usize, usize)> = a.initial().iter().map(|&q| (m.initial(), q)).collect();
    let mut queue: VecDeque<_> = reach.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for u in succs(v) {
            if reach.insert(u) {
                queue.push_back(u);
            }
        }
    }
    reach.iter().filter(|v| a.is_counted(v.1)).any(|&v| {
        let mut seen = HashSet::new();
        let mut queue: VecDeque<_> = succs(v).into();
        while let Some(u) = queue.pop_front() {
            if u == v {
                return true;
            }
            if seen.insert(u) {
                queue.extend(succs(u));
            }
        }
        false
    })
}

/// Whether `golden`'s transitions appear in `m` under a bijection of
/// states fixed by the initial states. Holes of `golden` are unconstrained.
pub fn embeds(golden: &PreMealy, m: &PreMealy) -> bool {
    if golden.alphabet() != m.alphabet() || golden.num_states() != m.num_states() {
        return false;
    }
    let n = golden.num_states();
    let mut fwd = vec![usize::MAX; n];
    let mut bwd = vec![usize::MAX; n];
    fwd[golden.initial()] = m.initial();
    bwd[m.initial()] = golden.initial();
    let mut queue = VecDeque::from([golden.initial()]);
    while let Some(q) = queue.pop_front() {
        for i in 0..golden.alphabet().num_inputs() as Valuation {
            let Some((o, t)) = golden.get(q, i) else { continue };
            let Some((o2, t2)) = m.get(fwd[q], i) else { return false };
            if o != o2 {
                return false;
            }
            match (fwd[t], bwd[t2]) {
                (usize::MAX, usize::MAX) => {
                    fwd[t] = t2;
                    bwd[t2] = t;
                    queue.push_back(t);
                }
                (x, y) if x == t2 && y == t => {}
                _ => return false,
            }
        }
    }
    !fwd.contains(&usize::MAX)
}

/// Isomorphism, checked independently of the library.
pub fn same_machine(golden: &PreMealy, m: &PreMealy) -> bool {
    embeds(golden, m) && golden.num_transitions() == m.num_transitions()
}
