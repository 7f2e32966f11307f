//! Emptiness of the product of a machine with a Büchi automaton, by nested
//! depth-first search.

use std::collections::HashSet;

use super::Nba;
use crate::logic::{IoLetter, LassoWord, Valuation};
use crate::machines::PreMealy;

type Node = (usize, usize);
type Edges = Vec<(IoLetter, Node)>;

struct Product<'a> {
    m: &'a PreMealy,
    b: &'a Nba,
}

impl Product<'_> {
    fn succs(&self, (s, q): Node) -> Edges {
        let mut out = Vec::new();
        for i in 0..self.m.alphabet().num_inputs() as Valuation {
            if let Some((o, t)) = self.m.get(s, i) {
                let l = IoLetter::new(i, o);
                out.extend(self.b.succ(q, l).iter().map(|&q2| (l, (t, q2 as usize))));
            }
        }
        out
    }
}

/// True when no infinite behavior of `m` is accepted by `b`.
pub fn product_empty(m: &PreMealy, b: &Nba) -> bool {
    product_counterexample(m, b).is_none()
}

/// A lasso word produced by `m` and accepted by `b`, if one exists.
pub fn product_counterexample(m: &PreMealy, b: &Nba) -> Option<LassoWord> {
    assert_eq!(m.alphabet(), b.alphabet());
    let p = Product { m, b };
    let mut blue: HashSet<Node> = HashSet::new();
    let mut red: HashSet<Node> = HashSet::new();
    for &q0 in b.initial() {
        let root = (m.initial(), q0);
        if blue.contains(&root) {
            continue;
        }
        blue.insert(root);
        // Each frame: node, its successors, next index, letter used to enter it.
        let mut stack: Vec<(Node, Edges, usize, Option<IoLetter>)> = vec![(root, p.succs(root), 0, None)];
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let (l, t) = top.1[top.2];
                top.2 += 1;
                if blue.insert(t) {
                    let s = p.succs(t);
                    stack.push((t, s, 0, Some(l)));
                }
                continue;
            }
            let seed = top.0;
            if b.is_accepting(seed.1) {
                if let Some(cycle) = red_search(&p, seed, &mut red) {
                    let prefix: Vec<IoLetter> = stack.iter().filter_map(|f| f.3).collect();
                    return LassoWord::new(prefix, cycle);
                }
            }
            stack.pop();
        }
    }
    None
}

/// Search for a path from `seed` back to itself through nodes not yet
/// explored by earlier red searches. Returns the letters of the cycle.
fn red_search(p: &Product, seed: Node, red: &mut HashSet<Node>) -> Option<Vec<IoLetter>> {
    let mut stack: Vec<(Edges, usize, Option<IoLetter>)> = vec![(p.succs(seed), 0, None)];
    while let Some(top) = stack.last_mut() {
        if top.1 < top.0.len() {
            let (l, t) = top.0[top.1];
            top.1 += 1;
            if t == seed {
                let mut cycle: Vec<IoLetter> = stack.iter().filter_map(|f| f.2).collect();
                cycle.push(l);
                return Some(cycle);
            }
            if red.insert(t) {
                let s = p.succs(t);
                stack.push((s, 0, Some(l)));
            }
            continue;
        }
        stack.pop();
    }
    None
}
