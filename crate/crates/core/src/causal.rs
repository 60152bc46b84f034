//! Causal hypotheses, the prima facie test and the ε significance scores.
//!
//! A hypothesis `c ~>[tmin,tmax] e` passes the prima facie test when `c`
//! occurs (with a fully observed window), and the frequency of `e` in the
//! window after `c` strictly exceeds the frequency of `e` in a window of
//! the same shape after an arbitrary tick.
//!
//! For a prima facie cause `c` of `e` and each rival prima facie cause `x`,
//! `ε_x = P(e | c ∧ x) − P(e | ¬c ∧ x)`, where both conditions are read at
//! the same tick and `P(e | ·)` is the leads-to frequency over the window.
//! `ε_avg` averages those terms over the rivals.

use std::fmt;

use thiserror::Error;

use crate::checker::{evaluate, marginal_counts, CheckError, FrequencyEstimate, WindowIndex};
use crate::pctl::Formula;
use crate::traces::TraceSet;

#[derive(Debug, Error, PartialEq)]
pub enum CausalError {
    #[error("invalid window [{tmin}, {tmax}]: need 1 <= tmin <= tmax")]
    InvalidWindow { tmin: u64, tmax: u64 },
    #[error("the cause '{0}' is not in the family of prima facie causes")]
    CauseNotInFamily(String),
    #[error("cause and rival are the same formula '{0}'")]
    SelfRival(String),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// `cause ~>{>=tmin,<=tmax} effect`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub cause: Formula,
    pub effect: Formula,
    pub tmin: u64,
    pub tmax: u64,
}

impl Hypothesis {
    pub fn new(cause: Formula, effect: Formula, tmin: u64, tmax: u64) -> Result<Self, CausalError> {
        check_window(tmin, tmax)?;
        Ok(Hypothesis {
            cause,
            effect,
            tmin,
            tmax,
        })
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ~>{{>={},<={}}} {}",
            self.cause, self.tmin, self.tmax, self.effect
        )
    }
}

fn check_window(tmin: u64, tmax: u64) -> Result<(), CausalError> {
    if tmin >= 1 && tmin <= tmax {
        Ok(())
    } else {
        Err(CausalError::InvalidWindow { tmin, tmax })
    }
}

/// All ordered atom pairs `(c, e)` with `c != e`. With negations the cause
/// also ranges over `!a` for every atom `a` other than the effect.
pub fn enumerate_pairwise(
    atoms: &[String],
    tmin: u64,
    tmax: u64,
    include_negations: bool,
) -> Result<Vec<Hypothesis>, CausalError> {
    check_window(tmin, tmax)?;
    let mut causes: Vec<(usize, Formula)> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (i, Formula::atom(a.clone())))
        .collect();
    if include_negations {
        causes.extend(
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (i, Formula::atom(a.clone()).not())),
        );
    }
    let mut out = Vec::with_capacity(causes.len() * atoms.len().saturating_sub(1));
    for (ci, cause) in &causes {
        for (ei, effect) in atoms.iter().enumerate() {
            if ei != *ci {
                out.push(Hypothesis {
                    cause: cause.clone(),
                    effect: Formula::atom(effect.clone()),
                    tmin,
                    tmax,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimaFacieResult {
    pub hypothesis: Hypothesis,
    /// `P(e in window | c)`.
    pub p_cond: FrequencyEstimate,
    /// `P(e in window)` from an arbitrary tick.
    pub p_marginal: FrequencyEstimate,
    /// The cause occurs with a fully observed window.
    pub occurred: bool,
    pub passed: bool,
}

/// Prima facie test against precomputed truth masks.
pub fn prima_facie_with(
    h: &Hypothesis,
    cause: &[Vec<bool>],
    effect: &WindowIndex,
) -> PrimaFacieResult {
    let (hits, total) = effect.leads_to_counts(|tr, t| cause[tr][t], h.tmin, h.tmax);
    let p_cond = FrequencyEstimate::from_counts(hits, total);
    let occurred = total > 0;
    let p_marginal = if occurred {
        marginal_counts(effect, h.tmax - h.tmin + 1, h.tmin)
    } else {
        FrequencyEstimate::from_counts(0, 0)
    };
    PrimaFacieResult {
        hypothesis: h.clone(),
        passed: occurred && p_cond.probability > p_marginal.probability,
        p_cond,
        p_marginal,
        occurred,
    }
}

pub fn prima_facie_test(data: &TraceSet, h: &Hypothesis) -> Result<PrimaFacieResult, CausalError> {
    check_window(h.tmin, h.tmax)?;
    let cause = evaluate(data, &h.cause)?;
    let effect = WindowIndex::new(&evaluate(data, &h.effect)?);
    Ok(prima_facie_with(h, &cause, &effect))
}

/// One `ε_x` term.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonTerm {
    pub x: Formula,
    /// `P(e | c ∧ x)`.
    pub with_cause: FrequencyEstimate,
    /// `P(e | ¬c ∧ x)`.
    pub without_cause: FrequencyEstimate,
    /// `None` when either conditioning set is below the support floor.
    pub value: Option<f64>,
}

impl EpsilonTerm {
    pub fn defined(&self) -> bool {
        self.value.is_some()
    }
}

/// `ε_x` against precomputed truth masks.
pub fn epsilon_x_with(
    x: &Formula,
    cause: &[Vec<bool>],
    rival: &[Vec<bool>],
    effect: &WindowIndex,
    tmin: u64,
    tmax: u64,
    min_support: u64,
) -> EpsilonTerm {
    let (tmin, tmax) = (tmin as usize, tmax as usize);
    let (mut h1, mut n1, mut h0, mut n0) = (0u64, 0u64, 0u64, 0u64);
    for tr in 0..effect.trace_count() {
        let (c, r) = (&cause[tr], &rival[tr]);
        for t in 0..effect.trace_len(tr).saturating_sub(tmax) {
            if !r[t] {
                continue;
            }
            let hit = u64::from(effect.any_in(tr, t + tmin, t + tmax));
            if c[t] {
                n1 += 1;
                h1 += hit;
            } else {
                n0 += 1;
                h0 += hit;
            }
        }
    }
    let with_cause = FrequencyEstimate::from_counts(h1, n1);
    let without_cause = FrequencyEstimate::from_counts(h0, n0);
    let floor = min_support.max(1);
    let value =
        (n1 >= floor && n0 >= floor).then_some(with_cause.probability - without_cause.probability);
    EpsilonTerm {
        x: x.clone(),
        with_cause,
        without_cause,
        value,
    }
}

/// `ε_x(c, e) = P(e | c ∧ x) − P(e | ¬c ∧ x)` with a support floor of one.
pub fn epsilon_x(
    data: &TraceSet,
    c: &Formula,
    x: &Formula,
    e: &Formula,
    tmin: u64,
    tmax: u64,
) -> Result<EpsilonTerm, CausalError> {
    check_window(tmin, tmax)?;
    if c == x {
        return Err(CausalError::SelfRival(c.to_string()));
    }
    let effect = WindowIndex::new(&evaluate(data, e)?);
    Ok(epsilon_x_with(
        x,
        &evaluate(data, c)?,
        &evaluate(data, x)?,
        &effect,
        tmin,
        tmax,
        1,
    ))
}

/// Divisor used when averaging ε terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivisorMode {
    /// Divide by the number of defined terms.
    #[default]
    Defined,
    /// Divide by the size of the whole family, including the cause itself;
    /// undefined terms count as zero.
    Strict,
}

impl std::str::FromStr for DivisorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "defined" => Ok(DivisorMode::Defined),
            "strict" => Ok(DivisorMode::Strict),
            other => Err(format!(
                "unknown divisor mode '{other}' (expected defined or strict)"
            )),
        }
    }
}

impl fmt::Display for DivisorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivisorMode::Defined => "defined",
            DivisorMode::Strict => "strict",
        })
    }
}

/// Averages term values (one per rival, `None` when undefined). `family_size`
/// is the number of prima facie causes including the one being scored.
pub fn average_terms(values: &[Option<f64>], family_size: usize, mode: DivisorMode) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let sum: f64 = defined.iter().sum();
    match mode {
        DivisorMode::Defined if defined.is_empty() => None,
        DivisorMode::Defined => Some(sum / defined.len() as f64),
        DivisorMode::Strict => Some(sum / family_size as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonAverage {
    pub terms: Vec<EpsilonTerm>,
    /// `None` when there are no rivals or no defined term.
    pub eps_avg: Option<f64>,
}

/// `ε_avg(c, e)` over the rivals `family \ {c}`.
#[allow(clippy::too_many_arguments)]
pub fn epsilon_avg(
    data: &TraceSet,
    c: &Formula,
    e: &Formula,
    family: &[Formula],
    tmin: u64,
    tmax: u64,
    mode: DivisorMode,
    min_support: u64,
) -> Result<EpsilonAverage, CausalError> {
    check_window(tmin, tmax)?;
    if !family.contains(c) {
        return Err(CausalError::CauseNotInFamily(c.to_string()));
    }
    let effect = WindowIndex::new(&evaluate(data, e)?);
    let cause = evaluate(data, c)?;
    let terms = family
        .iter()
        .filter(|x| *x != c)
        .map(|x| {
            Ok(epsilon_x_with(
                x,
                &cause,
                &evaluate(data, x)?,
                &effect,
                tmin,
                tmax,
                min_support,
            ))
        })
        .collect::<Result<Vec<_>, CausalError>>()?;
    let values: Vec<Option<f64>> = terms.iter().map(|t| t.value).collect();
    Ok(EpsilonAverage {
        eps_avg: average_terms(&values, family.len(), mode),
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Significant,
    Insignificant,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Significant => "significant",
            Label::Insignificant => "insignificant",
        })
    }
}

/// Score and classification of one prima facie cause.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRecord {
    pub hypothesis: Hypothesis,
    pub eps: EpsilonAverage,
    pub z: Option<f64>,
    pub fdr: Option<f64>,
    pub label: Option<Label>,
}
