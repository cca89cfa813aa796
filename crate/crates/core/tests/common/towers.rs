//! Reference blockworld model that shares no code with the planner: a state
//! is a set of towers (bottom block first), and a move takes one top block
//! to the table or onto another tower.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use brouwer_core::planner::{GroundAtom, WorldState};

pub type Towers = BTreeSet<Vec<usize>>;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

pub fn all_on_table(n: usize) -> Towers {
    (0..n).map(|i| vec![i]).collect()
}

pub fn moves(s: &Towers) -> Vec<Towers> {
    let stacks: Vec<&Vec<usize>> = s.iter().collect();
    let mut out = Vec::new();
    for (i, from) in stacks.iter().enumerate() {
        let top = *from.last().unwrap();
        let rest: Vec<usize> = from[..from.len() - 1].to_vec();
        let base = |extra: Vec<Vec<usize>>| -> Towers {
            let mut t: Towers = stacks
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, s)| (*s).clone())
                .collect();
            if !rest.is_empty() {
                t.insert(rest.clone());
            }
            t.extend(extra);
            t
        };
        if !rest.is_empty() {
            out.push(base(vec![vec![top]]));
        }
        for (j, to) in stacks.iter().enumerate() {
            if j != i {
                let mut t = base(vec![]);
                t.remove(*to);
                let mut grown = (*to).clone();
                grown.push(top);
                t.insert(grown);
                out.push(t);
            }
        }
    }
    out
}

/// Shortest move counts from `start` to every reachable state.
pub fn distances(start: &Towers) -> BTreeMap<Towers, usize> {
    let mut dist = BTreeMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for t in moves(&s) {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Positive atoms that hold in a state: `on`, `onTable` and `clear`.
pub fn atoms(s: &Towers, names: &[String]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in s {
        out.insert(format!("onTable({})", names[t[0]]));
        for w in t.windows(2) {
            out.insert(format!("on({},{})", names[w[1]], names[w[0]]));
        }
        out.insert(format!("clear({})", names[*t.last().unwrap()]));
    }
    out
}

pub fn world(s: &Towers, names: &[String], extra: &[&str]) -> WorldState {
    atoms(s, names)
        .iter()
        .map(String::as_str)
        .chain(extra.iter().copied())
        .map(|a| a.parse::<GroundAtom>().unwrap())
        .collect()
}
