//! Satisfaction sets and path probabilities, computed exactly on a [`Dtmc`]
//! or estimated by counting windows directly on traces.
//!
//! Trace semantics: a propositional formula is evaluated tick by tick. An
//! until/unless formula holds at tick `t` when the trace suffix starting at
//! `t` satisfies it; a suffix that ends before the formula is decided counts
//! as not satisfying it. Windows that run past the end of a trace are
//! censored: the tick is left out of both numerator and denominator.

use std::collections::VecDeque;
use std::ops::Deref;

use thiserror::Error;

use crate::dtmc::Dtmc;
use crate::pctl::{Formula, TimeBound};
use crate::traces::{Trace, TraceSet};

/// Absolute tolerance for unbounded fixed-point iteration.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
/// Iteration cap for unbounded fixed-point iteration.
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("unknown atom '{0}'")]
    UnknownAtom(String),
    #[error("'{0}' is not a state formula")]
    NotStateFormula(String),
    #[error("'{0}' cannot be evaluated tick by tick on a trace")]
    NotTraceEvaluable(String),
    #[error("fixed point not reached after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid window [{tmin}, {tmax}]: need 1 <= tmin <= tmax")]
    InvalidWindow { tmin: u64, tmax: TimeBound },
    #[error("the cause never holds in any state")]
    EmptyCause,
    #[error("no tick has a fully observed window")]
    NoFullWindow,
}

/// Per-state probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(pub Vec<f64>);

impl Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A probability together with the counts behind it. Trace estimates have
/// an integral numerator; model estimates carry a frequency-weighted one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub probability: f64,
    pub numerator: f64,
    pub denominator: u64,
}

impl FrequencyEstimate {
    /// `hits / total`, with probability zero when nothing was counted.
    pub fn from_counts(hits: u64, total: u64) -> Self {
        FrequencyEstimate {
            probability: if total == 0 {
                0.0
            } else {
                hits as f64 / total as f64
            },
            numerator: hits as f64,
            denominator: total,
        }
    }

    pub fn hits(&self) -> u64 {
        self.numerator as u64
    }
}

fn window_ok(tmin: u64, tmax: TimeBound) -> Result<(), CheckError> {
    let ok = tmin >= 1 && tmax.finite().is_none_or(|t| tmin <= t);
    if ok {
        Ok(())
    } else {
        Err(CheckError::InvalidWindow { tmin, tmax })
    }
}

// ---------------------------------------------------------------------------
// Exact checking on a model

/// States satisfying a state formula.
pub fn sat_set(model: &Dtmc, f: &Formula) -> Result<Vec<bool>, CheckError> {
    let n = model.state_count();
    Ok(match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(name) => {
            let a = model
                .atom_index(name)
                .ok_or_else(|| CheckError::UnknownAtom(name.clone()))?;
            (0..n).map(|s| model.holds(s, a)).collect()
        }
        Formula::Not(inner) => sat_set(model, inner)?.into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => zip_with(sat_set(model, a)?, sat_set(model, b)?, |x, y| x && y),
        Formula::Or(a, b) => zip_with(sat_set(model, a)?, sat_set(model, b)?, |x, y| x || y),
        Formula::Implies(a, b) => zip_with(sat_set(model, a)?, sat_set(model, b)?, |x, y| !x || y),
        Formula::Prob { path, bound } => match &**path {
            Formula::Until {
                left,
                right,
                bound: t,
            } => {
                let p = until_prob(model, &sat_set(model, left)?, &sat_set(model, right)?, *t)?;
                p.iter().map(|&v| bound.cmp.holds(v, bound.p)).collect()
            }
            Formula::Unless {
                left,
                right,
                bound: t,
            } => {
                let p = unless_prob(model, &sat_set(model, left)?, &sat_set(model, right)?, *t)?;
                p.iter().map(|&v| bound.cmp.holds(v, bound.p)).collect()
            }
            Formula::LeadsTo {
                cause,
                effect,
                tmin,
                tmax,
            } => {
                window_ok(*tmin, *tmax)?;
                // AG(cause -> F[tmin,tmax] effect): no reachable cause state
                // may fall short of the bound.
                let c = sat_set(model, cause)?;
                let u = window_prob(model, &sat_set(model, effect)?, *tmin, *tmax)?;
                let bad: Vec<bool> = (0..n)
                    .map(|s| c[s] && !bound.cmp.holds(u[s], bound.p))
                    .collect();
                can_reach(model, &bad).into_iter().map(|r| !r).collect()
            }
            other => return Err(CheckError::NotStateFormula(other.to_string())),
        },
        other => return Err(CheckError::NotStateFormula(other.to_string())),
    })
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// States from which some `target` state is reachable (including itself).
fn can_reach(model: &Dtmc, target: &[bool]) -> Vec<bool> {
    let n = model.state_count();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for &(to, _) in model.row(s) {
            preds[to].push(s);
        }
    }
    let mut reach = target.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| target[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !reach[p] {
                reach[p] = true;
                queue.push_back(p);
            }
        }
    }
    reach
}

/// Iterates `next(s) = 1` on `goal`, `sum T(s,s') prev(s')` on `carry`, 0
/// elsewhere, starting from `init`.
fn iterate(
    model: &Dtmc,
    carry: &[bool],
    goal: &[bool],
    init: Vec<f64>,
    tmax: TimeBound,
) -> Result<ProbVector, CheckError> {
    let mut cur = init;
    let step = |prev: &[f64]| -> Vec<f64> {
        (0..model.state_count())
            .map(|s| {
                if goal[s] {
                    1.0
                } else if carry[s] {
                    model.row(s).iter().map(|&(to, p)| p * prev[to]).sum()
                } else {
                    0.0
                }
            })
            .collect()
    };
    match tmax {
        TimeBound::Finite(k) => {
            for _ in 0..k {
                let next = step(&cur);
                if next == cur {
                    break;
                }
                cur = next;
            }
            Ok(ProbVector(cur))
        }
        TimeBound::Infinite => {
            let mut residual = f64::INFINITY;
            for _ in 0..MAX_ITERATIONS {
                let next = step(&cur);
                residual = next
                    .iter()
                    .zip(&cur)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                cur = next;
                if residual < FIXED_POINT_TOLERANCE {
                    return Ok(ProbVector(cur));
                }
            }
            Err(CheckError::NoConvergence {
                iterations: MAX_ITERATIONS,
                residual,
            })
        }
    }
}

/// `P(f1 U<=tmax f2)` for every state.
pub fn until_prob(
    model: &Dtmc,
    f1: &[bool],
    f2: &[bool],
    tmax: TimeBound,
) -> Result<ProbVector, CheckError> {
    let init = f2.iter().map(|&b| f64::from(u8::from(b))).collect();
    iterate(model, f1, f2, init, tmax)
}

/// `P(f1 W<=tmax f2)` for every state: like until, but `f1` holding for the
/// whole horizon also satisfies the formula.
pub fn unless_prob(
    model: &Dtmc,
    f1: &[bool],
    f2: &[bool],
    tmax: TimeBound,
) -> Result<ProbVector, CheckError> {
    let init = f1
        .iter()
        .zip(f2)
        .map(|(&a, &b)| f64::from(u8::from(a || b)))
        .collect();
    iterate(model, f1, f2, init, tmax)
}

/// Probability, per state, that `effect` holds at some step in
/// `[tmin, tmax]`: `M^tmin` applied to `P(true U<=(tmax-tmin) effect)`.
pub fn window_prob(
    model: &Dtmc,
    effect: &[bool],
    tmin: u64,
    tmax: TimeBound,
) -> Result<ProbVector, CheckError> {
    let span = match tmax {
        TimeBound::Finite(t) => TimeBound::Finite(t.saturating_sub(tmin)),
        TimeBound::Infinite => TimeBound::Infinite,
    };
    let all = vec![true; model.state_count()];
    let mut v = until_prob(model, &all, effect, span)?.0;
    for _ in 0..tmin {
        v = model.step(&v);
    }
    Ok(ProbVector(v))
}

/// Frequency-weighted probability that `e` holds within `[tmin, tmax]` steps
/// of a `c` state. The denominator is the number of `c` observations.
pub fn leads_to_prob(
    model: &Dtmc,
    c: &Formula,
    e: &Formula,
    tmin: u64,
    tmax: TimeBound,
) -> Result<FrequencyEstimate, CheckError> {
    window_ok(tmin, tmax)?;
    let cause = sat_set(model, c)?;
    let u = window_prob(model, &sat_set(model, e)?, tmin, tmax)?;
    let freq = model.frequency();
    let mut weight = 0u64;
    let mut acc = 0.0;
    for s in (0..model.state_count()).filter(|&s| cause[s]) {
        weight += freq[s];
        acc += freq[s] as f64 * u[s];
    }
    if weight == 0 {
        return Err(CheckError::EmptyCause);
    }
    Ok(FrequencyEstimate {
        probability: acc / weight as f64,
        numerator: acc,
        denominator: weight,
    })
}

// ---------------------------------------------------------------------------
// Frequency semantics on traces

/// Truth of `f` at every tick of one trace.
pub fn evaluate_trace(trace: &Trace, f: &Formula) -> Result<Vec<bool>, CheckError> {
    let n = trace.len();
    Ok(match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(name) => trace
            .column(name)
            .ok_or_else(|| CheckError::UnknownAtom(name.clone()))?
            .to_vec(),
        Formula::Not(inner) => evaluate_trace(trace, inner)?
            .into_iter()
            .map(|b| !b)
            .collect(),
        Formula::And(a, b) => zip_with(
            evaluate_trace(trace, a)?,
            evaluate_trace(trace, b)?,
            |x, y| x && y,
        ),
        Formula::Or(a, b) => zip_with(
            evaluate_trace(trace, a)?,
            evaluate_trace(trace, b)?,
            |x, y| x || y,
        ),
        Formula::Implies(a, b) => zip_with(
            evaluate_trace(trace, a)?,
            evaluate_trace(trace, b)?,
            |x, y| !x || y,
        ),
        Formula::Until { left, right, bound } => {
            let l = evaluate_trace(trace, left)?;
            let r = evaluate_trace(trace, right)?;
            let dist = steps_to_goal(&l, &r);
            dist.iter()
                .map(|d| d.is_some_and(|k| within(k, *bound)))
                .collect()
        }
        Formula::Unless { left, right, bound } => {
            let l = evaluate_trace(trace, left)?;
            let r = evaluate_trace(trace, right)?;
            let dist = steps_to_goal(&l, &r);
            let mut run = vec![0u64; n + 1];
            for t in (0..n).rev() {
                run[t] = if l[t] { run[t + 1] + 1 } else { 0 };
            }
            (0..n)
                .map(|t| {
                    dist[t].is_some_and(|k| within(k, *bound))
                        || bound.finite().is_some_and(|b| run[t] > b)
                })
                .collect()
        }
        other => return Err(CheckError::NotTraceEvaluable(other.to_string())),
    })
}

fn within(k: u64, bound: TimeBound) -> bool {
    bound.finite().is_none_or(|b| k <= b)
}

/// For each tick, the fewest steps until `goal` holds with `carry` holding
/// at every tick before it.
fn steps_to_goal(carry: &[bool], goal: &[bool]) -> Vec<Option<u64>> {
    let n = goal.len();
    let mut out = vec![None; n];
    for t in (0..n).rev() {
        out[t] = if goal[t] {
            Some(0)
        } else if carry[t] && t + 1 < n {
            out[t + 1].map(|k: u64| k + 1)
        } else {
            None
        };
    }
    out
}

/// Evaluates `f` on every member trace.
pub fn evaluate(data: &TraceSet, f: &Formula) -> Result<Vec<Vec<bool>>, CheckError> {
    data.traces().iter().map(|t| evaluate_trace(t, f)).collect()
}

/// Prefix counts of an effect's truth, for constant-time window queries.
#[derive(Debug, Clone)]
pub struct WindowIndex {
    prefix: Vec<Vec<u32>>,
}

impl WindowIndex {
    pub fn new(masks: &[Vec<bool>]) -> Self {
        let prefix = masks
            .iter()
            .map(|m| {
                let mut p = Vec::with_capacity(m.len() + 1);
                let mut acc = 0u32;
                p.push(0);
                for &b in m {
                    acc += u32::from(b);
                    p.push(acc);
                }
                p
            })
            .collect();
        WindowIndex { prefix }
    }

    pub fn trace_count(&self) -> usize {
        self.prefix.len()
    }

    pub fn trace_len(&self, trace: usize) -> usize {
        self.prefix[trace].len() - 1
    }

    /// Whether the effect holds at some tick in `from..=to` of `trace`.
    pub fn any_in(&self, trace: usize, from: usize, to: usize) -> bool {
        let p = &self.prefix[trace];
        p[to + 1] > p[from]
    }

    /// `(hits, total)` over ticks where `antecedent` holds and the window
    /// `[t + tmin, t + tmax]` lies inside the trace.
    pub fn leads_to_counts(
        &self,
        antecedent: impl Fn(usize, usize) -> bool,
        tmin: u64,
        tmax: u64,
    ) -> (u64, u64) {
        let (tmin, tmax) = (tmin as usize, tmax as usize);
        let mut hits = 0;
        let mut total = 0;
        for trace in 0..self.trace_count() {
            let len = self.trace_len(trace);
            for t in 0..len.saturating_sub(tmax) {
                if antecedent(trace, t) {
                    total += 1;
                    if self.any_in(trace, t + tmin, t + tmax) {
                        hits += 1;
                    }
                }
            }
        }
        (hits, total)
    }
}

/// Fraction of `c` ticks (with a fully observed window) followed by `e`
/// somewhere in `[t + tmin, t + tmax]`.
pub fn trace_leads_to(
    data: &TraceSet,
    c: &Formula,
    e: &Formula,
    tmin: u64,
    tmax: u64,
) -> Result<FrequencyEstimate, CheckError> {
    window_ok(tmin, TimeBound::Finite(tmax))?;
    let cause = evaluate(data, c)?;
    let index = WindowIndex::new(&evaluate(data, e)?);
    let (hits, total) = index.leads_to_counts(|tr, t| cause[tr][t], tmin, tmax);
    if total == 0 {
        return Err(CheckError::NoFullWindow);
    }
    Ok(FrequencyEstimate::from_counts(hits, total))
}

/// Fraction of ticks `t` such that `e` holds somewhere in
/// `[t + offset, t + offset + width - 1]`, over ticks whose window fits.
pub fn marginal_window_prob(
    data: &TraceSet,
    e: &Formula,
    width: u64,
    offset: u64,
) -> Result<FrequencyEstimate, CheckError> {
    if width < 1 {
        return Err(CheckError::InvalidWindow {
            tmin: offset,
            tmax: TimeBound::Finite(offset),
        });
    }
    let index = WindowIndex::new(&evaluate(data, e)?);
    let est = marginal_counts(&index, width, offset);
    if est.denominator == 0 {
        return Err(CheckError::NoFullWindow);
    }
    Ok(est)
}

/// Counting core of [`marginal_window_prob`]; zero denominator when no
/// window fits.
pub fn marginal_counts(index: &WindowIndex, width: u64, offset: u64) -> FrequencyEstimate {
    let last = (offset + width - 1) as usize;
    index_counts(index, |_, _| true, offset as usize, last)
}

fn index_counts(
    index: &WindowIndex,
    antecedent: impl Fn(usize, usize) -> bool,
    from: usize,
    to: usize,
) -> FrequencyEstimate {
    let (hits, total) = index.leads_to_counts(antecedent, from as u64, to as u64);
    FrequencyEstimate::from_counts(hits, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pctl::{parse, Comparison};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    /// s0 {a} -> s1 {b} 0.5 | s2 {} 0.5; s1, s2 absorbing.
    fn dtmc_a() -> Dtmc {
        Dtmc::from_parts(
            s(&["a", "b"]),
            vec![s(&["a"]), s(&["b"]), vec![]],
            0,
            vec![vec![(1, 0.5), (2, 0.5)], vec![(1, 1.0)], vec![(2, 1.0)]],
            None,
        )
        .unwrap()
    }

    /// s0 {a} self-loop 0.5, -> s1 {b} 0.5; s1 absorbing.
    fn dtmc_b() -> Dtmc {
        Dtmc::from_parts(
            s(&["a", "b"]),
            vec![s(&["a"]), s(&["b"])],
            0,
            vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]],
            None,
        )
        .unwrap()
    }

    fn set(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    fn trace(vars: &[&str], len: usize, on: &[(&str, &[usize])]) -> TraceSet {
        let mut cols = vec![vec![false; len]; vars.len()];
        for (name, ticks) in on {
            let i = vars.iter().position(|v| v == name).unwrap();
            for &t in *ticks {
                cols[i][t] = true;
            }
        }
        TraceSet::single(Trace::new(s(vars), cols).unwrap())
    }

    #[test]
    fn sat_sets_on_dtmc_a() {
        let m = dtmc_a();
        assert_eq!(sat_set(&m, &parse("b").unwrap()).unwrap(), set(&[0, 1, 0]));
        assert_eq!(sat_set(&m, &parse("!b").unwrap()).unwrap(), set(&[1, 0, 1]));
        assert_eq!(
            sat_set(&m, &parse("[a U{<=2} b]{>=0.5}").unwrap()).unwrap(),
            set(&[1, 1, 0])
        );
        assert_eq!(
            sat_set(&m, &parse("zz").unwrap()),
            Err(CheckError::UnknownAtom("zz".into()))
        );
        assert!(matches!(
            sat_set(&m, &parse("a U{<=2} b").unwrap()),
            Err(CheckError::NotStateFormula(_))
        ));
    }

    #[test]
    fn until_values() {
        let m = dtmc_a();
        let p = until_prob(&m, &set(&[1, 0, 0]), &set(&[0, 1, 0]), TimeBound::Finite(2)).unwrap();
        assert_eq!(p.0, vec![0.5, 1.0, 0.0]);
        let m = dtmc_b();
        let p = until_prob(&m, &set(&[1, 0]), &set(&[0, 1]), TimeBound::Finite(2)).unwrap();
        assert_eq!(p[0], 0.75);
        let p = until_prob(&m, &set(&[1, 0]), &set(&[0, 1]), TimeBound::Infinite).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        let p = until_prob(&m, &set(&[1, 0]), &set(&[0, 1]), TimeBound::Finite(0)).unwrap();
        assert_eq!(p.0, vec![0.0, 1.0]);
    }

    #[test]
    fn unless_values() {
        let lone = Dtmc::from_parts(
            s(&["a", "b"]),
            vec![s(&["a"])],
            0,
            vec![vec![(0, 1.0)]],
            None,
        )
        .unwrap();
        let p = unless_prob(&lone, &set(&[1]), &set(&[0]), TimeBound::Finite(3)).unwrap();
        assert_eq!(p[0], 1.0);
        let p = unless_prob(&lone, &set(&[1]), &set(&[0]), TimeBound::Infinite).unwrap();
        assert_eq!(p[0], 1.0);
        let p = unless_prob(&lone, &set(&[1]), &set(&[0]), TimeBound::Finite(0)).unwrap();
        assert_eq!(p[0], 1.0);

        let m = dtmc_a();
        let p = unless_prob(&m, &set(&[1, 0, 0]), &set(&[0, 1, 0]), TimeBound::Finite(2)).unwrap();
        assert_eq!(p[0], 0.5);
    }

    #[test]
    fn leads_to_values() {
        let m = dtmc_a();
        let est = leads_to_prob(
            &m,
            &Formula::atom("a"),
            &Formula::atom("b"),
            1,
            TimeBound::Finite(2),
        )
        .unwrap();
        assert_eq!(est.probability, 0.5);
        assert_eq!(est.denominator, 1);

        let est = leads_to_prob(
            &m,
            &Formula::atom("a"),
            &Formula::True,
            1,
            TimeBound::Finite(3),
        )
        .unwrap();
        assert_eq!(est.probability, 1.0);

        let chain = Dtmc::from_parts(
            s(&["c", "e"]),
            vec![s(&["c"]), vec![], s(&["e"])],
            0,
            vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(2, 1.0)]],
            None,
        )
        .unwrap();
        let est = leads_to_prob(
            &chain,
            &Formula::atom("c"),
            &Formula::atom("e"),
            2,
            TimeBound::Finite(2),
        )
        .unwrap();
        assert_eq!(est.probability, 1.0);

        assert_eq!(
            leads_to_prob(
                &m,
                &Formula::False,
                &Formula::atom("b"),
                1,
                TimeBound::Finite(2)
            ),
            Err(CheckError::EmptyCause)
        );
        assert!(matches!(
            leads_to_prob(
                &m,
                &Formula::atom("a"),
                &Formula::atom("b"),
                0,
                TimeBound::Finite(2)
            ),
            Err(CheckError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn leads_to_state_reading() {
        let m = dtmc_a();
        let f = Formula::atom("a")
            .leads_to(Formula::atom("b"), 1, TimeBound::Finite(2))
            .prob(Comparison::AtLeast, 0.5);
        assert_eq!(sat_set(&m, &f).unwrap(), set(&[1, 1, 1]));
        let f = Formula::atom("a")
            .leads_to(Formula::atom("b"), 1, TimeBound::Finite(2))
            .prob(Comparison::AtLeast, 0.6);
        assert_eq!(sat_set(&m, &f).unwrap(), set(&[0, 1, 1]));
    }

    #[test]
    fn trace_leads_to_counts() {
        let data = trace(&["c", "e"], 10, &[("c", &[1, 5]), ("e", &[2, 9])]);
        let est = trace_leads_to(&data, &Formula::atom("c"), &Formula::atom("e"), 1, 2).unwrap();
        assert_eq!((est.hits(), est.denominator), (1, 2));

        let data = trace(&["c", "e"], 10, &[("c", &[9]), ("e", &[2])]);
        assert_eq!(
            trace_leads_to(&data, &Formula::atom("c"), &Formula::atom("e"), 1, 2),
            Err(CheckError::NoFullWindow)
        );

        let data = trace(&["c"], 5, &[("c", &[0, 1, 2, 3])]);
        let est = trace_leads_to(&data, &Formula::atom("c"), &Formula::atom("c"), 1, 1).unwrap();
        assert_eq!((est.hits(), est.denominator), (3, 4));
    }

    #[test]
    fn marginal_counts_example() {
        let data = trace(&["e"], 10, &[("e", &[2, 9])]);
        let est = marginal_window_prob(&data, &Formula::atom("e"), 2, 1).unwrap();
        assert_eq!((est.hits(), est.denominator), (3, 8));
        let est = marginal_window_prob(&data, &Formula::True, 2, 1).unwrap();
        assert_eq!(est.probability, 1.0);
        let est = marginal_window_prob(&data, &Formula::False, 2, 1).unwrap();
        assert_eq!(est.probability, 0.0);
        assert_eq!(
            marginal_window_prob(&data, &Formula::atom("e"), 5, 8),
            Err(CheckError::NoFullWindow)
        );
    }

    #[test]
    fn windows_do_not_cross_traces() {
        let t1 = Trace::new(s(&["c", "e"]), vec![set(&[0, 0, 1]), set(&[0, 0, 0])]).unwrap();
        let t2 = Trace::new(s(&["c", "e"]), vec![set(&[0, 0, 0]), set(&[1, 0, 0])]).unwrap();
        let data = TraceSet::new(vec![t1, t2]).unwrap();
        // c at the last tick of the first trace has no observed window.
        assert_eq!(
            trace_leads_to(&data, &Formula::atom("c"), &Formula::atom("e"), 1, 1),
            Err(CheckError::NoFullWindow)
        );
    }

    #[test]
    fn temporal_causes_on_traces() {
        let data = trace(
            &["a", "b", "c"],
            6,
            &[("a", &[0, 1, 3]), ("b", &[2]), ("c", &[5])],
        );
        let until = parse("a U{<=2} b").unwrap();
        let got = evaluate(&data, &until).unwrap();
        assert_eq!(got[0], set(&[1, 1, 1, 0, 0, 0]));
        let unless = parse("a W{<=0} c").unwrap();
        assert_eq!(
            evaluate(&data, &unless).unwrap()[0],
            set(&[1, 1, 0, 1, 0, 1])
        );
        let unless = parse("a W{<=1} c").unwrap();
        assert_eq!(
            evaluate(&data, &unless).unwrap()[0],
            set(&[1, 0, 0, 0, 0, 1])
        );
        assert!(matches!(
            evaluate(&data, &parse("[a U{<=1} b]{>0}").unwrap()),
            Err(CheckError::NotTraceEvaluable(_))
        ));
    }
}
