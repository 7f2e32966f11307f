//! Counting functions: for each automaton state, the largest number of
//! counted-state visits over the run prefixes ending there, capped at
//! `k + 1`; `-1` marks a state no run reaches. The bound `k` is supplied by
//! the caller and never stored in a function.

use std::fmt::Write as _;

use crate::automata::Ucw;
use crate::logic::IoLetter;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountingFunction(Vec<i16>);

impl CountingFunction {
    pub fn from_values(values: Vec<i16>) -> Self {
        CountingFunction(values)
    }

    pub fn constant(n: usize, v: i16) -> Self {
        CountingFunction(vec![v; n])
    }

    pub fn values(&self) -> &[i16] {
        &self.0
    }

    pub fn get(&self, q: usize) -> i16 {
        self.0[q]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `q0:0 q1:-1 | k=2`
    pub fn dump(&self, k: i16) -> String {
        let mut s = String::new();
        for (q, v) in self.0.iter().enumerate() {
            let _ = write!(s, "q{q}:{v} ");
        }
        let _ = write!(s, "| k={k}");
        s
    }
}

pub fn cf_initial(a: &Ucw, _k: i16) -> CountingFunction {
    let mut v = vec![-1; a.num_states()];
    for &q in a.initial() {
        v[q] = a.is_counted(q) as i16;
    }
    CountingFunction(v)
}

pub fn cf_step(a: &Ucw, k: i16, f: &CountingFunction, sigma: IoLetter) -> CountingFunction {
    cf_step_at(a, k, f, a.alphabet().letter_index(sigma))
}

/// [`cf_step`] with the letter given by its dense index.
pub fn cf_step_at(a: &Ucw, k: i16, f: &CountingFunction, letter: usize) -> CountingFunction {
    debug_assert_eq!(f.len(), a.num_states());
    let mut best = vec![-1i16; a.num_states()];
    for (p, &v) in f.0.iter().enumerate() {
        if v < 0 {
            continue;
        }
        for &q in a.succ_at(p, letter) {
            let q = q as usize;
            if v > best[q] {
                best[q] = v;
            }
        }
    }
    for (q, b) in best.iter_mut().enumerate() {
        if *b >= 0 {
            *b = (*b + a.is_counted(q) as i16).min(k + 1);
        }
    }
    CountingFunction(best)
}

pub fn cf_leq(f: &CountingFunction, g: &CountingFunction) -> bool {
    debug_assert_eq!(f.len(), g.len());
    f.0.iter().zip(&g.0).all(|(a, b)| a <= b)
}

pub fn cf_join(f: &CountingFunction, g: &CountingFunction) -> CountingFunction {
    CountingFunction(f.0.iter().zip(&g.0).map(|(a, b)| *a.max(b)).collect())
}

pub fn cf_meet(f: &CountingFunction, g: &CountingFunction) -> CountingFunction {
    CountingFunction(f.0.iter().zip(&g.0).map(|(a, b)| *a.min(b)).collect())
}

pub fn cf_is_unsafe(f: &CountingFunction, k: i16) -> bool {
    f.0.iter().any(|&v| v > k)
}

/// The largest `g` with `cf_step(g, sigma) ⪯ f`, for a safe `f`.
pub fn cf_pre_max(a: &Ucw, k: i16, f: &CountingFunction, sigma: IoLetter) -> CountingFunction {
    cf_pre_max_at(a, k, f, a.alphabet().letter_index(sigma))
}

pub fn cf_pre_max_at(a: &Ucw, k: i16, f: &CountingFunction, letter: usize) -> CountingFunction {
    debug_assert!(!cf_is_unsafe(f, k));
    let g = (0..a.num_states())
        .map(|p| {
            let m = a
                .succ_at(p, letter)
                .iter()
                .map(|&q| f.0[q as usize] - a.is_counted(q as usize) as i16)
                .min()
                .expect("complete automaton");
            if m < 0 {
                -1
            } else {
                m.min(k)
            }
        })
        .collect();
    CountingFunction(g)
}

/// Pairwise incomparable counting functions standing for their downward
/// closure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CfAntichain {
    elems: Vec<CountingFunction>,
}

impl CfAntichain {
    pub fn new() -> Self {
        CfAntichain { elems: Vec::new() }
    }

    pub fn singleton(f: CountingFunction) -> Self {
        CfAntichain { elems: vec![f] }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CountingFunction> {
        self.elems.iter()
    }

    /// Add `f` unless it is dominated; drop elements it dominates. Returns
    /// whether `f` was added.
    pub fn insert(&mut self, f: CountingFunction) -> bool {
        if self.member_below(&f) {
            return false;
        }
        self.elems.retain(|g| !cf_leq(g, &f));
        self.elems.push(f);
        true
    }

    /// Persistent variant of [`CfAntichain::insert`].
    pub fn with(&self, f: CountingFunction) -> Self {
        let mut c = self.clone();
        c.insert(f);
        c
    }

    pub fn member_below(&self, f: &CountingFunction) -> bool {
        self.elems.iter().any(|g| cf_leq(f, g))
    }

    /// Elements in sorted order, for comparison and display.
    pub fn sorted(&self) -> Vec<CountingFunction> {
        let mut v = self.elems.clone();
        v.sort();
        v
    }

    pub fn same_set(&self, other: &CfAntichain) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }

    pub fn dump(&self, k: i16) -> String {
        self.sorted().iter().map(|f| f.dump(k) + "\n").collect()
    }
}

impl FromIterator<CountingFunction> for CfAntichain {
    fn from_iter<T: IntoIterator<Item = CountingFunction>>(iter: T) -> Self {
        let mut c = CfAntichain::new();
        for f in iter {
            c.insert(f);
        }
        c
    }
}
