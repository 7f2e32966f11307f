mod common;

use common::*;
use mealysynth::automata::{ltl_to_nba, product_empty, ucw_of_formula};
use mealysynth::counting::{cf_is_unsafe, cf_join, cf_leq, cf_pre_max_at, cf_step_at, CountingFunction};
use mealysynth::games::{allowed_moves, below_all, cpre_antichain, SafetyContext};
use mealysynth::logic::{eval_lasso, to_nnf, Alphabet, Formula, IoLetter, LassoWord, Side, Valuation, Var};
use mealysynth::machines::{merge_class, merge_class_with, pta_build, quotient, FoldOrder, StatePartition};
use mealysynth::realize::{fstar_labels, machine_counterexample, machine_realizes, p_realizable};
use mealysynth::synth::{
    characteristic_sample, synth_learn, synth_safe, CompleteStrategy, LearnOptions, MergeStrategy, Outcome,
};
use proptest::prelude::*;
use rand::Rng;

fn one_each() -> Alphabet {
    Alphabet::new(&["a"], &["b"]).unwrap()
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::Atom(Var {
            side: Side::Input,
            index: 0
        })),
        Just(Formula::Atom(Var {
            side: Side::Output,
            index: 0
        })),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::until(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::weak_until(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::release(a, b)),
        ]
    })
}

fn lasso() -> impl Strategy<Value = LassoWord> {
    let letter = (0u32..2, 0u32..2).prop_map(|(i, o)| IoLetter::new(i, o));
    (
        proptest::collection::vec(letter.clone(), 0..4),
        proptest::collection::vec(letter, 1..4),
    )
        .prop_map(|(p, c)| LassoWord::new(p, c).expect("non-empty cycle"))
}

fn cf(v: Cf) -> CountingFunction {
    CountingFunction::from_values(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nnf_keeps_meaning(f in formula(), w in lasso()) {
        let a = one_each();
        let g = to_nnf(&f);
        prop_assert!(g.is_nnf());
        prop_assert_eq!(eval_lasso(&f, &w, &a), eval_lasso(&g, &w, &a));
    }

    #[test]
    fn automata_agree_with_semantics(f in formula(), w in lasso()) {
        let a = one_each();
        let holds = eval_lasso(&f, &w, &a);
        prop_assert_eq!(ltl_to_nba(&to_nnf(&f), &a).unwrap().accepts_lasso(&w), holds);
        prop_assert_eq!(ucw_of_formula(&f, &a).unwrap().accepts_lasso(&w), holds);
    }

    #[test]
    fn step_is_monotone_and_joins(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let k = r.gen_range(0..=2i16);
        let n = a.num_states();
        let f = random_cf(&mut r, n, k);
        let g = random_cf(&mut r, n, k);
        let l = r.gen_range(0..a.alphabet().num_letters());
        let fg = oracle_join(&f, &g);
        let (sf, sg) = (cf_step_at(&a, k, &cf(f.clone()), l), cf_step_at(&a, k, &cf(g.clone()), l));
        prop_assert!(cf_leq(&sf, &cf_step_at(&a, k, &cf(fg.clone()), l)));
        prop_assert_eq!(cf_step_at(&a, k, &cf(fg), l), cf_join(&sf, &sg));
        prop_assert_eq!(sf.values().to_vec(), oracle_step(&a, k, &f, l));
    }

    #[test]
    fn pre_max_is_the_largest_predecessor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let k = r.gen_range(0..=2i16);
        let n = a.num_states();
        let f: Cf = (0..n).map(|_| r.gen_range(-1..=k)).collect();
        let g = random_cf(&mut r, n, k);
        let l = r.gen_range(0..a.alphabet().num_letters());
        let pre = cf_pre_max_at(&a, k, &cf(f.clone()), l);
        prop_assert!(cf_leq(&cf_step_at(&a, k, &pre, l), &cf(f.clone())));
        let fits = oracle_leq(&oracle_step(&a, k, &g, l), &f);
        prop_assert_eq!(fits, cf_leq(&cf(g), &pre));
    }

    #[test]
    fn winning_region_is_a_post_fixpoint(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let k = r.gen_range(0..=2i16);
        let ctx = SafetyContext::new(a.clone(), k);
        let w = ctx.winning();
        prop_assert!(below_all(w, &cpre_antichain(&a, k, w)));
        for f in w.iter() {
            prop_assert!(!cf_is_unsafe(f, k));
            for i in 0..a.alphabet().num_inputs() as Valuation {
                prop_assert!(!allowed_moves(&ctx, f, i).is_empty());
            }
        }
    }

    #[test]
    fn fold_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alpha = alphabet(r.gen_range(1..=2), r.gen_range(1..=2));
        let t = random_premealy(&mut r, &alpha, 4, 1.0);
        let words = random_behaviors(&mut r, &t, 4, 5);
        let pta = pta_build(&alpha, &words).unwrap();
        let n = pta.num_states();
        let d = StatePartition::discrete(n);
        let (x, y) = (r.gen_range(0..n), r.gen_range(0..n));
        prop_assert_eq!(
            merge_class_with(&pta, &d, x, y, FoldOrder::Fifo),
            merge_class_with(&pta, &d, x, y, FoldOrder::Lifo)
        );
    }

    #[test]
    fn quotients_keep_the_examples(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alpha = alphabet(r.gen_range(1..=2), r.gen_range(1..=2));
        let t = random_premealy(&mut r, &alpha, 3, 1.0);
        let words = random_behaviors(&mut r, &t, 5, 6);
        let pta = pta_build(&alpha, &words).unwrap();
        let n = pta.num_states();
        let mut part = StatePartition::discrete(n);
        for _ in 0..4 {
            let out = merge_class(&pta, &part, r.gen_range(0..n), r.gen_range(0..n));
            if !out.output_conflict {
                prop_assert!(part.refines(&out.partition));
                part = out.partition;
            }
        }
        let q = quotient(&pta, &part).unwrap();
        prop_assert_eq!(q.num_states(), part.num_classes());
        for w in &words {
            prop_assert!(follows(&q, w));
        }
    }

    #[test]
    fn larger_bounds_keep_realizability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let p = random_premealy(&mut r, a.alphabet(), 3, 0.5);
        let k = r.gen_range(0..=2i16);
        let lo = SafetyContext::new(a.clone(), k);
        let hi = SafetyContext::new(a, k + 1);
        prop_assert!(lo.winning().iter().all(|f| hi.is_winning(f)));
        prop_assert!(!p_realizable(&p, &lo) || p_realizable(&p, &hi));
    }

    #[test]
    fn label_fixpoint_is_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let p = random_premealy(&mut r, a.alphabet(), 4, 0.8);
        let k = r.gen_range(0..=2i16);
        let fs = fstar_labels(&p, &a, k);
        let (limit, rounds) = jacobi_labels(&p, &a, k);
        prop_assert!(fs.updates <= p.num_states() * a.num_states() * (k as usize + 2));
        prop_assert!(rounds <= p.num_states() * a.num_states() * (k as usize + 1));
        let labels: Vec<Cf> = fs.labels.iter().map(|f| f.values().to_vec()).collect();
        prop_assert_eq!(labels, limit);
    }

    #[test]
    fn model_checking_oracles_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 4, 2);
        let m = random_premealy(&mut r, a.alphabet(), 4, 1.0);
        let ok = machine_realizes(&m, &a);
        prop_assert_eq!(ok, product_empty(&m, &a.dual_nba()));
        prop_assert_eq!(ok, !product_has_accepting_cycle(&m, &a));
        if let Some(w) = machine_counterexample(&m, &a) {
            prop_assert!(!a.accepts_lasso(&w));
            let unrolled: Vec<IoLetter> = (0..w.span() + w.cycle().len() * m.num_states()).map(|p| w.at(p)).collect();
            prop_assert!(follows(&m, &unrolled));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn extra_examples_keep_completeness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alpha = alphabet(r.gen_range(1..=2), r.gen_range(1..=2));
        let t = random_minimal_machine(&mut r, &alpha, 4);
        let mut sample = characteristic_sample(&t).unwrap();
        sample.extend(random_behaviors(&mut r, &t, 3, 6));
        let ctx = SafetyContext::new(spec_of_machine(&t), 0);
        let (m, _, _) = synth_safe(&sample, &ctx, MergeStrategy::MinCf, CompleteStrategy::LazyMinCf).unwrap();
        prop_assert!(same_machine(&t, &m));
    }

    #[test]
    fn learned_machines_are_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ucw(&mut r, 3, 1);
        let t = random_premealy(&mut r, a.alphabet(), 3, 1.0);
        let examples = random_behaviors(&mut r, &t, 2, 3);
        let opts = LearnOptions { max_k: 2, ..LearnOptions::default() };
        let first = synth_learn(&examples, &a, opts).unwrap();
        if let Outcome::Machine(m) = &first.outcome {
            prop_assert!(m.is_complete());
            prop_assert!(examples.iter().all(|w| follows(m, w)));
            prop_assert!(machine_realizes(m, &a));
            prop_assert!(product_empty(m, &a.dual_nba()));
            let again = synth_learn(&examples, &a, opts).unwrap();
            let Outcome::Machine(m2) = &again.outcome else { panic!("second run differs") };
            prop_assert_eq!(m.to_text(), m2.to_text());
        }
    }
}
