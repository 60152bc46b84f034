//! Brute-force reference implementations and random instance generators
//! shared by the integration and acceptance tests. Nothing here uses the
//! library's own counting or iteration code.
#![allow(dead_code)]

use leadsto_core::dtmc::Dtmc;
use leadsto_core::pctl::{Comparison, Formula, TimeBound};
use leadsto_core::traces::Trace;
use num_rational::Ratio;
use rand::Rng;

pub type Q = Ratio<i64>;

pub const ATOM_NAMES: [&str; 6] = ["a", "b", "c_up", "d_down", "x1", "gene_7"];

/// Random formula of bounded depth over [`ATOM_NAMES`].
pub fn random_formula<R: Rng>(rng: &mut R, depth: u32) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(ATOM_NAMES[rng.gen_range(0..ATOM_NAMES.len())]),
        };
    }
    let sub = |rng: &mut R| random_formula(rng, depth - 1);
    let bound = |rng: &mut R| {
        if rng.gen_bool(0.2) {
            TimeBound::Infinite
        } else {
            TimeBound::Finite(rng.gen_range(0..50))
        }
    };
    match rng.gen_range(0..9) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        2 => sub(rng).or(sub(rng)),
        3 => sub(rng).implies(sub(rng)),
        4 => {
            let b = bound(rng);
            sub(rng).until(sub(rng), b)
        }
        5 => {
            let b = bound(rng);
            sub(rng).unless(sub(rng), b)
        }
        6 => {
            let tmin = rng.gen_range(0..10);
            let tmax = if rng.gen_bool(0.2) {
                TimeBound::Infinite
            } else {
                TimeBound::Finite(tmin + rng.gen_range(0..10))
            };
            sub(rng).leads_to(sub(rng), tmin, tmax)
        }
        7 => {
            let cmp = if rng.gen_bool(0.5) {
                Comparison::AtLeast
            } else {
                Comparison::Greater
            };
            let p = rng.gen_range(0..=1000) as f64 / 1000.0;
            let b = bound(rng);
            sub(rng).until(sub(rng), b).prob(cmp, p)
        }
        _ => {
            let p = rng.gen::<f64>();
            let tmin = rng.gen_range(1..5);
            sub(rng)
                .leads_to(
                    sub(rng),
                    tmin,
                    TimeBound::Finite(tmin + rng.gen_range(0..5)),
                )
                .prob(Comparison::AtLeast, p)
        }
    }
}

/// Random trace; each atom holds at each tick with its own density.
pub fn random_trace<R: Rng>(rng: &mut R, len: usize, atoms: usize) -> Trace {
    let vars: Vec<String> = (0..atoms).map(|i| format!("v{i}")).collect();
    let cols = (0..atoms)
        .map(|_| {
            let density = rng.gen_range(0.05..0.7);
            (0..len).map(|_| rng.gen_bool(density)).collect()
        })
        .collect();
    Trace::new(vars, cols).unwrap()
}

/// Random model over atoms `p`, `q`, `r` with sparse stochastic rows.
pub fn random_dtmc<R: Rng>(rng: &mut R, states: usize) -> Dtmc {
    let atoms: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let labels = (0..states)
        .map(|_| {
            atoms
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect()
        })
        .collect();
    let rows = (0..states)
        .map(|_| {
            let mut w: Vec<f64> = (0..states)
                .map(|_| {
                    if rng.gen_bool(0.6) {
                        rng.gen_range(0.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                w[rng.gen_range(0..states)] = 1.0;
            }
            let sum: f64 = w.iter().sum();
            w.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(j, &x)| (j, x / sum))
                .collect()
        })
        .collect();
    let freq = (0..states).map(|_| rng.gen_range(0..20)).collect();
    Dtmc::from_parts(atoms, labels, rng.gen_range(0..states), rows, Some(freq)).unwrap()
}

/// Sum over every path of `steps` transitions from `start` of
/// `prob(path) * accept(path)`.
pub fn enumerate_paths(
    model: &Dtmc,
    start: usize,
    steps: usize,
    accept: &dyn Fn(&[usize]) -> bool,
) -> f64 {
    fn walk(
        model: &Dtmc,
        path: &mut Vec<usize>,
        prob: f64,
        steps: usize,
        accept: &dyn Fn(&[usize]) -> bool,
    ) -> f64 {
        if path.len() == steps + 1 {
            return if accept(path) { prob } else { 0.0 };
        }
        let here = *path.last().unwrap();
        let mut total = 0.0;
        for to in 0..model.state_count() {
            let p = model.prob(here, to);
            if p > 0.0 {
                path.push(to);
                total += walk(model, path, prob * p, steps, accept);
                path.pop();
            }
        }
        total
    }
    walk(model, &mut vec![start], 1.0, steps, accept)
}

pub fn until_oracle(model: &Dtmc, f1: &[bool], f2: &[bool], tmax: usize, start: usize) -> f64 {
    enumerate_paths(model, start, tmax, &|path| {
        for &s in path {
            if f2[s] {
                return true;
            }
            if !f1[s] {
                return false;
            }
        }
        false
    })
}

pub fn unless_oracle(model: &Dtmc, f1: &[bool], f2: &[bool], tmax: usize, start: usize) -> f64 {
    enumerate_paths(model, start, tmax, &|path| {
        for &s in path {
            if f2[s] {
                return true;
            }
            if !f1[s] {
                return false;
            }
        }
        true
    })
}

/// Probability that `e` holds at some step in `tmin..=tmax` from `start`.
pub fn window_oracle(model: &Dtmc, e: &[bool], tmin: usize, tmax: usize, start: usize) -> f64 {
    enumerate_paths(model, start, tmax, &|path| {
        path[tmin..=tmax].iter().any(|&s| e[s])
    })
}

/// `(hits, total)` over ticks where `antecedent` holds and the whole window
/// `[t + tmin, t + tmax]` is inside the trace.
pub fn window_counts(
    antecedent: &dyn Fn(usize, usize) -> bool,
    effect: &[Vec<bool>],
    tmin: usize,
    tmax: usize,
) -> (i64, i64) {
    let (mut hits, mut total) = (0, 0);
    for (tr, e) in effect.iter().enumerate() {
        for t in 0..e.len() {
            if t + tmax >= e.len() || !antecedent(tr, t) {
                continue;
            }
            total += 1;
            if (t + tmin..=t + tmax).any(|k| e[k]) {
                hits += 1;
            }
        }
    }
    (hits, total)
}

pub fn ratio((hits, total): (i64, i64)) -> Option<Q> {
    (total > 0).then(|| Q::new(hits, total))
}

/// Exact ε_x, `None` when either conditioning set is empty.
pub fn eps_x_oracle(
    c: &[Vec<bool>],
    x: &[Vec<bool>],
    e: &[Vec<bool>],
    tmin: usize,
    tmax: usize,
) -> Option<Q> {
    let with = ratio(window_counts(&|tr, t| c[tr][t] && x[tr][t], e, tmin, tmax))?;
    let without = ratio(window_counts(&|tr, t| !c[tr][t] && x[tr][t], e, tmin, tmax))?;
    Some(with - without)
}

/// Exact ε_avg over the defined terms of `family \ {c}`.
pub fn eps_avg_oracle(
    c: usize,
    family: &[usize],
    masks: &[Vec<Vec<bool>>],
    e: &[Vec<bool>],
    tmin: usize,
    tmax: usize,
) -> Option<Q> {
    let terms: Vec<Q> = family
        .iter()
        .filter(|&&x| x != c)
        .filter_map(|&x| eps_x_oracle(&masks[c], &masks[x], e, tmin, tmax))
        .collect();
    if terms.is_empty() {
        return None;
    }
    let n = terms.len() as i64;
    Some(terms.into_iter().sum::<Q>() / n)
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}
