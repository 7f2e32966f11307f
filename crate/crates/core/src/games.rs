//! The safety game on counting functions: the system wins from `f` when it
//! can answer every input so that the counting function stays safe forever.
//! Winning regions are downward closed and kept as antichains.

use crate::automata::Ucw;
use crate::counting::{cf_initial, cf_meet, cf_pre_max_at, cf_step_at, CfAntichain, CountingFunction};
use crate::logic::{IoLetter, Valuation};

/// A bound, its automaton, and the maximal winning counting functions.
#[derive(Clone, Debug)]
pub struct SafetyContext {
    ucw: Ucw,
    k: i16,
    winning: CfAntichain,
}

impl SafetyContext {
    pub fn new(ucw: Ucw, k: i16) -> Self {
        let winning = winning_antichain(&ucw, k);
        SafetyContext { ucw, k, winning }
    }

    pub fn ucw(&self) -> &Ucw {
        &self.ucw
    }

    pub fn k(&self) -> i16 {
        self.k
    }

    pub fn winning(&self) -> &CfAntichain {
        &self.winning
    }

    pub fn is_winning(&self, f: &CountingFunction) -> bool {
        self.winning.member_below(f)
    }

    /// Whether the bounded specification is realizable at all.
    pub fn realizable(&self) -> bool {
        self.is_winning(&cf_initial(&self.ucw, self.k))
    }
}

/// Meet every element of `a` with every element of `b`, keeping maxima.
fn pairwise_meet(a: &CfAntichain, b: &CfAntichain) -> CfAntichain {
    let mut out = CfAntichain::new();
    for x in a.iter() {
        for y in b.iter() {
            let m = cf_meet(x, y);
            if !out.member_below(&m) {
                out.insert(m);
            }
        }
    }
    out
}

/// Maximal functions from which, for every input, some output leads below `ac`.
pub fn cpre_antichain(a: &Ucw, k: i16, ac: &CfAntichain) -> CfAntichain {
    let alpha = a.alphabet();
    let mut acc: Option<CfAntichain> = None;
    for i in 0..alpha.num_inputs() as Valuation {
        let mut big = CfAntichain::new();
        for o in 0..alpha.num_outputs() as Valuation {
            let li = alpha.letter_index(IoLetter::new(i, o));
            for f in ac.iter() {
                big.insert(cf_pre_max_at(a, k, f, li));
            }
        }
        acc = Some(match acc {
            None => big,
            Some(prev) => pairwise_meet(&prev, &big),
        });
    }
    acc.expect("at least one input valuation")
}

/// Greatest fixpoint of the controllable predecessor, starting from the
/// constant-`k` function.
pub fn winning_antichain(a: &Ucw, k: i16) -> CfAntichain {
    assert!(k >= 0);
    let mut ac = CfAntichain::singleton(CountingFunction::constant(a.num_states(), k));
    loop {
        let next = pairwise_meet(&cpre_antichain(a, k, &ac), &ac);
        if next.same_set(&ac) {
            return ac;
        }
        ac = next;
    }
}

/// Outputs for input `i` that keep the play inside the winning region,
/// with the successor function.
pub fn allowed_moves(ctx: &SafetyContext, f: &CountingFunction, i: Valuation) -> Vec<(Valuation, CountingFunction)> {
    debug_assert!(ctx.is_winning(f));
    let alpha = ctx.ucw.alphabet();
    let moves: Vec<_> = (0..alpha.num_outputs() as Valuation)
        .filter_map(|o| {
            let g = cf_step_at(&ctx.ucw, ctx.k, f, alpha.letter_index(IoLetter::new(i, o)));
            ctx.is_winning(&g).then_some((o, g))
        })
        .collect();
    assert!(!moves.is_empty(), "winning function without a winning move");
    moves
}

/// Whether every element of `sub` lies below some element of `sup`.
pub fn below_all(sub: &CfAntichain, sup: &CfAntichain) -> bool {
    sub.iter().all(|f| sup.member_below(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ucw_of_formula;
    use crate::counting::cf_leq;
    use crate::logic::{parse_formula, Alphabet, Formula};

    fn alpha() -> Alphabet {
        Alphabet::new(&["r1", "r2"], &["g1", "g2"]).unwrap()
    }

    #[test]
    fn true_spec_wins_everywhere() {
        let a = alpha();
        let u = ucw_of_formula(&Formula::True, &a).unwrap();
        for k in 0..3 {
            let w = winning_antichain(&u, k);
            assert_eq!(w.sorted(), vec![CountingFunction::constant(u.num_states(), k)]);
            let ctx = SafetyContext::new(u.clone(), k);
            assert!(ctx.realizable());
            assert_eq!(allowed_moves(&ctx, &cf_initial(&u, k), 0).len(), 4);
        }
    }

    #[test]
    fn no_counted_states_is_a_fixpoint() {
        let a = alpha();
        let u = Ucw::universal(&a);
        let top = CfAntichain::singleton(CountingFunction::constant(1, 2));
        assert!(cpre_antichain(&u, 2, &top).same_set(&top));
    }

    #[test]
    fn false_spec_is_lost() {
        let a = alpha();
        let u = ucw_of_formula(&Formula::False, &a).unwrap();
        let ctx = SafetyContext::new(u.clone(), 0);
        assert!(!ctx.realizable());
        let c = cpre_antichain(
            &u,
            0,
            &CfAntichain::singleton(CountingFunction::constant(u.num_states(), 0)),
        );
        assert!(!c.member_below(&cf_initial(&u, 0)));
    }

    #[test]
    fn never_g1_forbids_g1() {
        let a = alpha();
        let u = ucw_of_formula(&parse_formula("G !g1", &a).unwrap(), &a).unwrap();
        let ctx = SafetyContext::new(u.clone(), 0);
        assert!(ctx.realizable());
        for i in 0..4 {
            let outs: Vec<Valuation> = allowed_moves(&ctx, &cf_initial(&u, 0), i)
                .into_iter()
                .map(|m| m.0)
                .collect();
            assert_eq!(outs, vec![0, 1]);
        }
    }

    #[test]
    fn mutex_realizable_at_one() {
        let a = alpha();
        let f = parse_formula("G(!g1 | !g2) & G(r1 -> F g1) & G(r2 -> F g2)", &a).unwrap();
        let u = ucw_of_formula(&f, &a).unwrap();
        let w = winning_antichain(&u, 1);
        assert!(w.member_below(&cf_initial(&u, 1)));
        assert!(below_all(&w, &cpre_antichain(&u, 1, &w)));
        for f in w.iter() {
            let lower = CountingFunction::from_values(f.values().iter().map(|&v| (v - 1).max(-1)).collect());
            assert!(w.member_below(&lower));
            assert!(cf_leq(&lower, f));
        }
    }
}
