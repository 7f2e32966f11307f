//! Realizability relative to a preMealy machine, via the least fixpoint of
//! counting-function labels over the machine's states, and model checking
//! of complete machines.

use std::collections::VecDeque;

use crate::automata::{product_counterexample, Ucw};
use crate::counting::{cf_initial, cf_is_unsafe, cf_join, cf_step_at, CountingFunction};
use crate::games::SafetyContext;
use crate::logic::{IoLetter, LassoWord};
use crate::machines::PreMealy;

/// Labels of the fixpoint and the number of label changes it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FStar {
    pub labels: Vec<CountingFunction>,
    pub updates: usize,
}

/// For every state, the join of the counting functions reached along the
/// words leading there. Worklist order is FIFO over changed states.
pub fn fstar_labels(p: &PreMealy, a: &Ucw, k: i16) -> FStar {
    let n = a.num_states();
    let mut labels = vec![CountingFunction::constant(n, -1); p.num_states()];
    labels[p.initial()] = cf_initial(a, k);
    let mut fs = FStar { labels, updates: 0 };
    propagate(p, a, k, &mut fs, vec![p.initial()], |_| true);
    fs
}

/// Continue the fixpoint from `fs` after transitions were added at the
/// states in `dirty`. Stops early, returning false, once `keep` rejects a
/// label.
fn propagate(
    p: &PreMealy,
    a: &Ucw,
    k: i16,
    fs: &mut FStar,
    dirty: Vec<usize>,
    keep: impl Fn(&CountingFunction) -> bool,
) -> bool {
    let alpha = a.alphabet();
    let mut queued = vec![false; p.num_states()];
    let mut work = VecDeque::new();
    for s in dirty {
        if !queued[s] {
            queued[s] = true;
            work.push_back(s);
        }
    }
    let bound = p.num_states() * a.num_states() * (k as usize + 2);
    while let Some(s) = work.pop_front() {
        queued[s] = false;
        for i in 0..alpha.num_inputs() as u32 {
            let Some((o, t)) = p.get(s, i) else { continue };
            let g = cf_step_at(a, k, &fs.labels[s], alpha.letter_index(IoLetter::new(i, o)));
            let joined = cf_join(&fs.labels[t], &g);
            if joined != fs.labels[t] {
                fs.labels[t] = joined;
                fs.updates += 1;
                assert!(fs.updates <= bound, "label updates exceed |M|*|Q|*(k+2)");
                if !keep(&fs.labels[t]) {
                    return false;
                }
                if !queued[t] {
                    queued[t] = true;
                    work.push_back(t);
                }
            }
        }
    }
    true
}

/// Whether the bounded specification is realizable by some machine
/// containing `p`: every label must be winning.
pub fn p_realizable(p: &PreMealy, ctx: &SafetyContext) -> bool {
    p_realizable_labels(p, ctx).is_some()
}

/// The fixpoint labels when `p` is realizable, computed with early exit.
pub fn p_realizable_labels(p: &PreMealy, ctx: &SafetyContext) -> Option<FStar> {
    let a = ctx.ucw();
    let init = cf_initial(a, ctx.k());
    if !ctx.is_winning(&init) {
        return None;
    }
    let mut labels = vec![CountingFunction::constant(a.num_states(), -1); p.num_states()];
    labels[p.initial()] = init;
    let mut fs = FStar { labels, updates: 0 };
    propagate(p, a, ctx.k(), &mut fs, vec![p.initial()], |f| ctx.is_winning(f)).then_some(fs)
}

/// Realizability after adding transitions out of `changed` to a machine
/// whose labels `before` were already known. `p` may have more states than
/// `before` has labels; new states start inactive.
pub fn p_realizable_extended(p: &PreMealy, ctx: &SafetyContext, before: &FStar, changed: usize) -> Option<FStar> {
    let a = ctx.ucw();
    let mut fs = before.clone();
    fs.labels
        .resize(p.num_states(), CountingFunction::constant(a.num_states(), -1));
    propagate(p, a, ctx.k(), &mut fs, vec![changed], |f| ctx.is_winning(f)).then_some(fs)
}

/// Whether every infinite behavior of the complete machine `m` is accepted
/// by `a`, using the bound `|Q|·|M|` beyond which counting is exact.
pub fn machine_realizes(m: &PreMealy, a: &Ucw) -> bool {
    let k = i16::try_from(a.num_states() * m.num_states()).expect("bound fits in i16");
    fstar_labels(m, a, k).labels.iter().all(|f| !cf_is_unsafe(f, k))
}

/// A behavior of `m` rejected by `a`, found in the product with the dual automaton.
pub fn machine_counterexample(m: &PreMealy, a: &Ucw) -> Option<LassoWord> {
    product_counterexample(m, &a.dual_nba())
}
