//! Synthesis from a specification and examples: generalize the examples by
//! merging prefix-tree states, complete the remaining holes, and raise the
//! co-Büchi bound until both phases succeed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::automata::Ucw;
use crate::counting::{cf_leq, cf_step, CountingFunction};
use crate::games::SafetyContext;
use crate::logic::{IoLetter, IoWord, Valuation};
use crate::machines::{
    merge_class, mergeable, pta_build, quotient, ExampleSet, Inconsistency, Mealy, PreMealy, StatePartition,
};
use crate::realize::{p_realizable, p_realizable_extended, p_realizable_labels, FStar};

/// How GEN picks among merge candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeStrategy {
    /// A candidate with a ⪯-minimal label, lowest state index on ties.
    MinCf,
    /// The lowest state index.
    First,
    /// Uniformly at random from a seeded generator.
    Random(u64),
}

/// How COMP picks among hole fillings. All variants are lazy: a fresh state
/// is only used when no existing state qualifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompleteStrategy {
    /// ⪯-minimal target label, then (state index, output) on ties.
    LazyMinCf,
    /// Lowest (state index, output).
    LazyFirst,
    /// Uniformly at random from a seeded generator.
    LazyRandom(u64),
}

/// Why a phase gave up.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Unreal {
    #[error(transparent)]
    Inconsistent(#[from] Inconsistency),
    #[error("the specification is not realizable from the prefix tree")]
    PrefixTree,
    #[error("the specification is not realizable from the given machine")]
    Machine,
}

/// One GEN loop iteration, for inspection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenStep {
    /// Prefix-tree state being processed.
    pub state: usize,
    /// Earlier classes (by least member) that passed the output check.
    pub mergeable: Vec<usize>,
    /// Those whose merge kept the specification realizable.
    pub realizable: Vec<usize>,
    pub chosen: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GenResult {
    pub machine: PreMealy,
    pub pta: PreMealy,
    pub partition: StatePartition,
    pub steps: Vec<GenStep>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CompStats {
    pub iterations: usize,
    pub fresh_states: usize,
    pub initial_holes: usize,
}

fn pick_min_label(cands: &[(usize, &CountingFunction)]) -> usize {
    let minimal: Vec<usize> = (0..cands.len())
        .filter(|&a| !cands.iter().any(|(_, g)| cf_leq(g, cands[a].1) && *g != cands[a].1))
        .collect();
    minimal[0]
}

/// Generalize the examples into a preMealy machine from which the bounded
/// specification stays realizable.
pub fn gen(examples: &[IoWord], ctx: &SafetyContext, strategy: MergeStrategy) -> Result<GenResult, Unreal> {
    let alpha = ctx.ucw().alphabet();
    let pta = pta_build(alpha, examples)?;
    if !p_realizable(&pta, ctx) {
        return Err(Unreal::PrefixTree);
    }
    let mut rng = match strategy {
        MergeStrategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let n = pta.num_states();
    let mut part = StatePartition::discrete(n);
    let mut steps = Vec::new();
    for e in 0..n {
        let own = part.find(e);
        let mut reps: Vec<usize> = (0..e).map(|x| part.find(x)).filter(|&r| r != own).collect();
        reps.sort_unstable();
        reps.dedup();
        let merge_ok: Vec<usize> = reps.into_iter().filter(|&r| mergeable(&pta, &part, e, r)).collect();
        let mut real_ok = Vec::new();
        for &r in &merge_ok {
            let merged = merge_class(&pta, &part, e, r).partition;
            let q = quotient(&pta, &merged).expect("mergeable classes give a Mealy congruence");
            if p_realizable(&q, ctx) {
                real_ok.push(r);
            }
        }
        let chosen = if real_ok.is_empty() {
            None
        } else {
            let idx = match strategy {
                MergeStrategy::First => 0,
                MergeStrategy::Random(_) => rng.as_mut().expect("seeded").gen_range(0..real_ok.len()),
                MergeStrategy::MinCf => {
                    let current = quotient(&pta, &part).expect("congruence");
                    let labels = p_realizable_labels(&current, ctx).expect("invariant: current machine is realizable");
                    let class_index = |r: usize| part.classes().iter().position(|c| c[0] == r).expect("class");
                    let cands: Vec<(usize, &CountingFunction)> =
                        real_ok.iter().map(|&r| (r, &labels.labels[class_index(r)])).collect();
                    pick_min_label(&cands)
                }
            };
            let r = real_ok[idx];
            part = merge_class(&pta, &part, e, r).partition;
            Some(r)
        };
        steps.push(GenStep {
            state: e,
            mergeable: merge_ok,
            realizable: real_ok,
            chosen,
        });
    }
    let machine = quotient(&pta, &part).expect("congruence");
    debug_assert!(examples.iter().all(|w| machine.accepts(w)));
    Ok(GenResult {
        machine,
        pta,
        partition: part,
        steps,
    })
}

/// Holes in breadth-first order from the initial state, then any holes of
/// unreachable states by index.
fn next_hole(m: &PreMealy) -> Option<(usize, Valuation)> {
    m.first_hole().or_else(|| {
        let w = m.alphabet().num_inputs() as Valuation;
        (0..m.num_states())
            .flat_map(|q| (0..w).map(move |i| (q, i)))
            .find(|&(q, i)| m.get(q, i).is_none())
    })
}

/// Fill every hole of `p` so that the specification stays realizable.
pub fn comp(p: &PreMealy, ctx: &SafetyContext, strategy: CompleteStrategy) -> Result<(Mealy, CompStats), Unreal> {
    let mut labels: FStar = p_realizable_labels(p, ctx).ok_or(Unreal::Machine)?;
    let mut rng = match strategy {
        CompleteStrategy::LazyRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let a = ctx.ucw();
    let k = ctx.k();
    let alpha = a.alphabet().clone();
    let width = alpha.num_inputs();
    let mut m = p.clone();
    let mut stats = CompStats {
        initial_holes: m.num_holes(),
        ..CompStats::default()
    };
    while let Some((s, i)) = next_hole(&m) {
        stats.iterations += 1;
        let mut existing: Vec<(usize, Valuation, FStar)> = Vec::new();
        let mut fresh: Vec<(Valuation, FStar)> = Vec::new();
        for t in 0..m.num_states() {
            for o in 0..alpha.num_outputs() as Valuation {
                let mut m2 = m.clone();
                m2.set(s, i, o, t);
                if let Some(fs) = p_realizable_extended(&m2, ctx, &labels, s) {
                    existing.push((t, o, fs));
                }
            }
        }
        if existing.is_empty() {
            for o in 0..alpha.num_outputs() as Valuation {
                let mut m2 = m.clone();
                let t = m2.add_state();
                m2.set(s, i, o, t);
                if let Some(fs) = p_realizable_extended(&m2, ctx, &labels, s) {
                    fresh.push((o, fs));
                }
            }
        }
        assert!(
            !existing.is_empty() || !fresh.is_empty(),
            "no realizable completion of a hole of a realizable machine"
        );
        let choose = |n: usize, lab: &dyn Fn(usize) -> CountingFunction, rng: &mut Option<ChaCha8Rng>| -> usize {
            match strategy {
                CompleteStrategy::LazyFirst => 0,
                CompleteStrategy::LazyRandom(_) => rng.as_mut().expect("seeded").gen_range(0..n),
                CompleteStrategy::LazyMinCf => {
                    let ls: Vec<CountingFunction> = (0..n).map(lab).collect();
                    let cands: Vec<(usize, &CountingFunction)> = ls.iter().enumerate().collect();
                    pick_min_label(&cands)
                }
            }
        };
        if !existing.is_empty() {
            let idx = choose(existing.len(), &|j| labels.labels[existing[j].0].clone(), &mut rng);
            let (t, o, fs) = existing.swap_remove(idx);
            m.set(s, i, o, t);
            labels = fs;
        } else {
            let src = labels.labels[s].clone();
            let idx = choose(
                fresh.len(),
                &|j| cf_step(a, k, &src, IoLetter::new(i, fresh[j].0)),
                &mut rng,
            );
            let (o, fs) = fresh.swap_remove(idx);
            let t = m.add_state();
            m.set(s, i, o, t);
            labels = fs;
            stats.fresh_states += 1;
        }
    }
    assert_eq!(stats.iterations, stats.initial_holes + stats.fresh_states * width);
    let distinct_labels = (k as u64 + 3).checked_pow(a.num_states() as u32).unwrap_or(u64::MAX);
    assert!(stats.fresh_states as u64 <= distinct_labels);
    Ok((m, stats))
}

/// Statistics of one synthesis run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    pub k: i16,
    pub ucw_states: usize,
    pub pta_states: usize,
    pub gen_states: usize,
    pub merges: usize,
    pub comp_iterations: usize,
    pub fresh_states: usize,
    pub machine_states: usize,
    pub winning_size: usize,
    pub wall_ms: u128,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Machine(Mealy),
    Unreal,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SynthResult {
    pub outcome: Outcome,
    pub stats: SynthStats,
    /// The GEN result of the successful bound, for inspection.
    pub gen: Option<GenResult>,
}

/// GEN followed by COMP for a fixed bound.
pub fn synth_safe(
    examples: &[IoWord],
    ctx: &SafetyContext,
    merge: MergeStrategy,
    complete: CompleteStrategy,
) -> Result<(Mealy, SynthStats, GenResult), Unreal> {
    let start = Instant::now();
    let g = gen(examples, ctx, merge)?;
    let (m, cs) = comp(&g.machine, ctx, complete)?;
    let stats = SynthStats {
        k: ctx.k(),
        ucw_states: ctx.ucw().num_states(),
        pta_states: g.pta.num_states(),
        gen_states: g.machine.num_states(),
        merges: g.steps.iter().filter(|s| s.chosen.is_some()).count(),
        comp_iterations: cs.iterations,
        fresh_states: cs.fresh_states,
        machine_states: m.num_states(),
        winning_size: ctx.winning().len(),
        wall_ms: start.elapsed().as_millis(),
    };
    Ok((m, stats, g))
}

/// Options for the bound schedule.
#[derive(Clone, Copy, Debug)]
pub struct LearnOptions {
    pub max_k: i16,
    /// Run up to the theoretical bound and report `Unreal` past it.
    pub complete_bound: bool,
    pub merge: MergeStrategy,
    pub complete: CompleteStrategy,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            max_k: 10,
            complete_bound: false,
            merge: MergeStrategy::MinCf,
            complete: CompleteStrategy::LazyMinCf,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("theoretical bound {0} exceeds the supported range")]
    BoundTooLarge(f64),
}

/// `n·m·|I|·2^(n·log2 n)` with the constant in the exponent taken as 1,
/// where `n` is the automaton size and `m` the prefix-tree size.
pub fn completeness_bound(a: &Ucw, pta_states: usize) -> f64 {
    let n = a.num_states() as f64;
    let exp = if n > 1.0 { n * n.log2() } else { 0.0 };
    n * pta_states as f64 * a.alphabet().num_inputs() as f64 * exp.exp2()
}

/// Try bounds `0, 1, 2, ...` and return the first machine found.
pub fn synth_learn(examples: &ExampleSet, a: &Ucw, opts: LearnOptions) -> Result<SynthResult, LearnError> {
    let start = Instant::now();
    let mut stats = SynthStats::default();
    let pta = match pta_build(a.alphabet(), examples) {
        Ok(p) => p,
        Err(_) => {
            stats.wall_ms = start.elapsed().as_millis();
            return Ok(SynthResult {
                outcome: Outcome::Unreal,
                stats,
                gen: None,
            });
        }
    };
    let limit = if opts.complete_bound {
        let b = completeness_bound(a, pta.num_states()).ceil();
        if b >= (i16::MAX - 1) as f64 {
            return Err(LearnError::BoundTooLarge(b));
        }
        b as i16
    } else {
        opts.max_k
    };
    for k in 0..=limit {
        let ctx = SafetyContext::new(a.clone(), k);
        stats.k = k;
        stats.winning_size = ctx.winning().len();
        stats.ucw_states = a.num_states();
        if !ctx.realizable() {
            continue;
        }
        if let Ok((m, mut s, g)) = synth_safe(examples, &ctx, opts.merge, opts.complete) {
            s.wall_ms = start.elapsed().as_millis();
            return Ok(SynthResult {
                outcome: Outcome::Machine(m),
                stats: s,
                gen: Some(g),
            });
        }
    }
    stats.wall_ms = start.elapsed().as_millis();
    Ok(SynthResult {
        outcome: if opts.complete_bound {
            Outcome::Unreal
        } else {
            Outcome::Unknown
        },
        stats,
        gen: None,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("machine has holes")]
    Incomplete,
    #[error("machine is not minimal: states {0} and {1} are equivalent")]
    NotMinimal(usize, usize),
    #[error("machine is not minimal: state {0} is unreachable")]
    Unreachable(usize),
}

/// Coarsest partition of a complete machine into behaviorally equivalent states.
fn equivalence_classes(t: &Mealy) -> Vec<usize> {
    let w = t.alphabet().num_inputs() as Valuation;
    let n = t.num_states();
    let mut block: Vec<usize> = vec![0; n];
    loop {
        let sigs: Vec<(usize, Vec<(Valuation, usize)>)> = (0..n)
            .map(|q| {
                let row = (0..w)
                    .map(|i| {
                        let (o, d) = t.get(q, i).expect("complete");
                        (o, block[d])
                    })
                    .collect();
                (block[q], row)
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort();
        uniq.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| uniq.binary_search(s).expect("present")).collect();
        let before = {
            let mut b = block.clone();
            b.sort_unstable();
            b.dedup();
            b.len()
        };
        block = next;
        if uniq.len() == before {
            return block;
        }
    }
}

/// Breadth-first shortest, then lexicographically least, input words
/// reaching each state.
fn access_words(t: &Mealy) -> Vec<Option<Vec<Valuation>>> {
    let w = t.alphabet().num_inputs() as Valuation;
    let mut acc: Vec<Option<Vec<Valuation>>> = vec![None; t.num_states()];
    acc[t.initial()] = Some(Vec::new());
    let mut queue = std::collections::VecDeque::from([t.initial()]);
    while let Some(q) = queue.pop_front() {
        for i in 0..w {
            if let Some((_, d)) = t.get(q, i) {
                if acc[d].is_none() {
                    let mut s = acc[q].clone().expect("visited");
                    s.push(i);
                    acc[d] = Some(s);
                    queue.push_back(d);
                }
            }
        }
    }
    acc
}

/// Length-lexicographically least input word on which `x` and `y` produce
/// different outputs.
fn distinguishing_word(t: &Mealy, x: usize, y: usize) -> Option<Vec<Valuation>> {
    let w = t.alphabet().num_inputs() as Valuation;
    let n = t.num_states();
    let mut path: Vec<Option<Vec<Valuation>>> = vec![None; n * n];
    path[x * n + y] = Some(Vec::new());
    let mut queue = std::collections::VecDeque::from([(x, y)]);
    while let Some((a, b)) = queue.pop_front() {
        let here = path[a * n + b].clone().expect("visited");
        for i in 0..w {
            let (oa, da) = t.get(a, i).expect("complete");
            let (ob, db) = t.get(b, i).expect("complete");
            let mut word = here.clone();
            word.push(i);
            if oa != ob {
                return Some(word);
            }
            if path[da * n + db].is_none() {
                path[da * n + db] = Some(word);
                queue.push_back((da, db));
            }
        }
    }
    None
}

/// Examples forcing GEN to rebuild a minimal machine: one per transition,
/// plus one separating each ordered pair of distinct states.
pub fn characteristic_sample(t: &Mealy) -> Result<ExampleSet, SampleError> {
    if !t.is_complete() {
        return Err(SampleError::Incomplete);
    }
    let acc = access_words(t);
    if let Some(q) = acc.iter().position(Option::is_none) {
        return Err(SampleError::Unreachable(q));
    }
    let acc: Vec<Vec<Valuation>> = acc.into_iter().map(|a| a.expect("reachable")).collect();
    let blocks = equivalence_classes(t);
    for x in 0..t.num_states() {
        for y in x + 1..t.num_states() {
            if blocks[x] == blocks[y] {
                return Err(SampleError::NotMinimal(x, y));
            }
        }
    }
    let image = |inputs: &[Valuation]| t.outputs(inputs).expect("complete");
    let mut sample = Vec::new();
    for s in &acc {
        for i in 0..t.alphabet().num_inputs() as Valuation {
            let mut word = s.clone();
            word.push(i);
            sample.push(image(&word));
        }
    }
    for x in 0..t.num_states() {
        for y in 0..t.num_states() {
            if x == y {
                continue;
            }
            let d = distinguishing_word(t, x, y).expect("minimal machine");
            let mut word = acc[x].clone();
            word.extend(d);
            sample.push(image(&word));
        }
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ucw_of_formula;
    use crate::logic::{parse_formula, Alphabet, Formula};

    fn alpha() -> Alphabet {
        Alphabet::new(&["r1", "r2"], &["g1", "g2"]).unwrap()
    }

    #[test]
    fn empty_examples_give_single_state() {
        let a = alpha();
        let ctx = SafetyContext::new(ucw_of_formula(&Formula::True, &a).unwrap(), 0);
        let g = gen(&[], &ctx, MergeStrategy::MinCf).unwrap();
        assert_eq!(g.machine.num_states(), 1);
        assert_eq!(g.machine.num_transitions(), 0);
    }

    #[test]
    fn complete_machine_is_unchanged() {
        let a = alpha();
        let ctx = SafetyContext::new(ucw_of_formula(&Formula::True, &a).unwrap(), 0);
        let mut m = PreMealy::new(a.clone(), 1, 0);
        for i in 0..4 {
            m.set(0, i, 1, 0);
        }
        let (out, st) = comp(&m, &ctx, CompleteStrategy::LazyMinCf).unwrap();
        assert_eq!(out, m);
        assert_eq!(st.iterations, 0);
    }

    #[test]
    fn false_spec_is_unreal_or_unknown() {
        let a = alpha();
        let u = ucw_of_formula(&Formula::False, &a).unwrap();
        let ctx = SafetyContext::new(u.clone(), 0);
        assert_eq!(
            synth_safe(&[], &ctx, MergeStrategy::MinCf, CompleteStrategy::LazyMinCf).unwrap_err(),
            Unreal::PrefixTree
        );
        let r = synth_learn(
            &vec![],
            &u,
            LearnOptions {
                max_k: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(r.outcome, Outcome::Unknown));
    }

    #[test]
    fn violating_example_is_unreal() {
        let a = alpha();
        let f = parse_formula("G(!g1 | !g2) & G(r1 -> F g1) & G(r2 -> F g2)", &a).unwrap();
        let ctx = SafetyContext::new(ucw_of_formula(&f, &a).unwrap(), 1);
        let e = vec![vec![IoLetter::new(0b10, 0b11)]];
        assert_eq!(
            synth_safe(&e, &ctx, MergeStrategy::MinCf, CompleteStrategy::LazyMinCf).unwrap_err(),
            Unreal::PrefixTree
        );
    }

    #[test]
    fn true_spec_single_example() {
        let a = alpha();
        let u = ucw_of_formula(&Formula::True, &a).unwrap();
        let e = vec![vec![IoLetter::new(1, 2)]];
        let r = synth_learn(&e, &u, LearnOptions::default()).unwrap();
        let Outcome::Machine(m) = r.outcome else {
            panic!("expected a machine")
        };
        assert_eq!(r.stats.k, 0);
        assert!(m.accepts(&e[0]));
        assert!(m.is_complete());
    }

    #[test]
    fn min_label_choice() {
        let lo = CountingFunction::from_values(vec![0, 1]);
        let hi = CountingFunction::from_values(vec![1, 1]);
        assert_eq!(pick_min_label(&[(0, &hi), (1, &lo)]), 1);
        let a = CountingFunction::from_values(vec![0, 1]);
        let b = CountingFunction::from_values(vec![1, 0]);
        assert_eq!(pick_min_label(&[(3, &a), (5, &b)]), 0);
    }

    #[test]
    fn one_state_sample() {
        let a = alpha();
        let mut m = PreMealy::new(a.clone(), 1, 0);
        for i in 0..4 {
            m.set(0, i, 0, 0);
        }
        let s = characteristic_sample(&m).unwrap();
        assert_eq!(s.len(), 4);
        let mut two = PreMealy::new(a, 2, 0);
        for i in 0..4 {
            two.set(0, i, 0, 1);
            two.set(1, i, 0, 0);
        }
        assert_eq!(characteristic_sample(&two), Err(SampleError::NotMinimal(0, 1)));
    }
}
