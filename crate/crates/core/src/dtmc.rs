//! Labeled discrete-time Markov chains inferred from trace frequencies.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::traces::TraceSet;

/// Tolerance on row sums.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DtmcError {
    #[error("empty trace set")]
    Empty,
    #[error("row {state} sums to {sum}, not 1")]
    NotStochastic { state: usize, sum: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `K = <S, s_i, L, T>` with one state per distinct observed labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc {
    atoms: Vec<String>,
    labels: Vec<Vec<bool>>,
    initial: usize,
    /// Sparse rows of `T`, sorted by target state.
    rows: Vec<Vec<(usize, f64)>>,
    frequency: Vec<u64>,
    transitions_observed: u64,
}

impl Dtmc {
    /// Assembles a model from explicit parts. `labels[s]` lists the atoms
    /// true in state `s`; `frequency` defaults to one per state.
    pub fn from_parts(
        atoms: Vec<String>,
        labels: Vec<Vec<String>>,
        initial: usize,
        rows: Vec<Vec<(usize, f64)>>,
        frequency: Option<Vec<u64>>,
    ) -> Result<Self, DtmcError> {
        let n = labels.len();
        if n == 0 {
            return Err(DtmcError::Invalid("model has no states".into()));
        }
        if rows.len() != n || initial >= n {
            return Err(DtmcError::Invalid(format!(
                "{n} states but {} rows, initial {initial}",
                rows.len()
            )));
        }
        let index: HashMap<&str, usize> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let masks = labels
            .iter()
            .map(|l| {
                let mut mask = vec![false; atoms.len()];
                for a in l {
                    let &i = index.get(a.as_str()).ok_or_else(|| {
                        DtmcError::Invalid(format!("label uses unknown atom '{a}'"))
                    })?;
                    mask[i] = true;
                }
                Ok(mask)
            })
            .collect::<Result<Vec<_>, DtmcError>>()?;
        let mut sorted_rows = Vec::with_capacity(n);
        for (s, row) in rows.into_iter().enumerate() {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (to, p) in row {
                if to >= n || !(0.0..=1.0).contains(&p) {
                    return Err(DtmcError::Invalid(format!(
                        "bad transition {s} -> {to} with probability {p}"
                    )));
                }
                *merged.entry(to).or_default() += p;
            }
            let sum: f64 = merged.values().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(DtmcError::NotStochastic { state: s, sum });
            }
            sorted_rows.push(merged.into_iter().filter(|&(_, p)| p > 0.0).collect());
        }
        let frequency = frequency.unwrap_or_else(|| vec![1; n]);
        if frequency.len() != n {
            return Err(DtmcError::Invalid("frequency length mismatch".into()));
        }
        Ok(Dtmc {
            atoms,
            labels: masks,
            initial,
            rows: sorted_rows,
            frequency,
            transitions_observed: 0,
        })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Whether `atom` (by index) holds in `state`.
    pub fn holds(&self, state: usize, atom: usize) -> bool {
        self.labels[state][atom]
    }

    pub fn label(&self, state: usize) -> Vec<&str> {
        self.labels[state]
            .iter()
            .zip(&self.atoms)
            .filter(|(on, _)| **on)
            .map(|(_, a)| a.as_str())
            .collect()
    }

    /// State whose labeling is exactly the given atom set.
    pub fn state_with_label(&self, atoms: &[&str]) -> Option<usize> {
        let mut mask = vec![false; self.atoms.len()];
        for a in atoms {
            mask[self.atom_index(a)?] = true;
        }
        self.labels.iter().position(|l| *l == mask)
    }

    pub fn row(&self, state: usize) -> &[(usize, f64)] {
        &self.rows[state]
    }

    /// `T(from, to)`.
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .iter()
            .find(|(s, _)| *s == to)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn frequency(&self) -> &[u64] {
        &self.frequency
    }

    /// Number of consecutive tick pairs counted while building.
    pub fn transitions_observed(&self) -> u64 {
        self.transitions_observed
    }

    /// Largest deviation of any row sum from one.
    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(T v)(s) = sum over s' of T(s, s') v(s')`.
    pub fn step(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(to, p)| p * v[to]).sum())
            .collect()
    }
}

/// Counts consecutive labelings within each trace. States are ordered by
/// label vector, so the result does not depend on trace order apart from
/// the initial state, which is the first tick of the first trace.
pub fn build_dtmc(data: &TraceSet) -> Result<Dtmc, DtmcError> {
    let traces = data.traces();
    if traces.is_empty() {
        return Err(DtmcError::Empty);
    }
    let atoms = data.variables().to_vec();
    let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut found: Vec<Vec<bool>> = Vec::new();
    let mut freq: Vec<u64> = Vec::new();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let mut first = None;
    let mut transitions = 0u64;

    for trace in traces {
        let mut prev: Option<usize> = None;
        for t in 0..trace.len() {
            let label: Vec<bool> = (0..atoms.len()).map(|v| trace.value(v, t)).collect();
            let id = *ids.entry(label.clone()).or_insert_with(|| {
                found.push(label);
                freq.push(0);
                found.len() - 1
            });
            freq[id] += 1;
            first.get_or_insert(id);
            if let Some(p) = prev {
                *counts.entry((p, id)).or_default() += 1;
                transitions += 1;
            }
            prev = Some(id);
        }
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| found[a].cmp(&found[b]));
    let mut rank = vec![0; found.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }

    let n = found.len();
    let mut out_counts: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); n];
    for (&(from, to), &c) in &counts {
        out_counts[rank[from]].insert(rank[to], c);
    }
    let rows = out_counts
        .into_iter()
        .enumerate()
        .map(|(s, row)| {
            let total: u64 = row.values().sum();
            if total == 0 {
                vec![(s, 1.0)]
            } else {
                row.into_iter()
                    .map(|(to, c)| (to, c as f64 / total as f64))
                    .collect()
            }
        })
        .collect();
    let labels = order.iter().map(|&old| found[old].clone()).collect();
    let frequency = order.iter().map(|&old| freq[old]).collect();

    Ok(Dtmc {
        atoms,
        labels,
        initial: rank[first.ok_or(DtmcError::Empty)?],
        rows,
        frequency,
        transitions_observed: transitions,
    })
}

fn fmt_set<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let items: Vec<&str> = items.into_iter().collect();
    format!("{{{}}}", items.join(", "))
}

/// Writes the textual model listing:
///
/// ```text
/// atoms: {a, b}
/// initial 0
/// state 0: {a, b}
/// freq 0 2
/// trans 0 1 0.5
/// ```
pub fn write_model<W: Write>(model: &Dtmc, mut out: W) -> std::io::Result<()> {
    let mut buf = String::new();
    let _ = writeln!(
        buf,
        "atoms: {}",
        fmt_set(model.atoms.iter().map(String::as_str))
    );
    let _ = writeln!(buf, "initial {}", model.initial);
    for s in 0..model.state_count() {
        let _ = writeln!(buf, "state {s}: {}", fmt_set(model.label(s)));
        let _ = writeln!(buf, "freq {s} {}", model.frequency[s]);
    }
    for (s, row) in model.rows.iter().enumerate() {
        for (to, p) in row {
            let _ = writeln!(buf, "trans {s} {to} {p}");
        }
    }
    out.write_all(buf.as_bytes())
}

/// Reads a model listing. `atoms`, `initial` and `freq` lines are optional;
/// the atom universe then defaults to the atoms seen in state labels.
pub fn read_model<R: BufRead>(source: R) -> Result<Dtmc, DtmcError> {
    let mut atoms: Option<Vec<String>> = None;
    let mut initial = 0usize;
    let mut states: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut freq: BTreeMap<usize, u64> = BTreeMap::new();
    let mut trans: Vec<(usize, usize, f64)> = Vec::new();

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = i + 1;
        let bad = |reason: &str| DtmcError::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_set = |text: &str| -> Result<Vec<String>, DtmcError> {
            let inner = text
                .trim()
                .strip_prefix('{')
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| bad("expected '{...}'"))?;
            Ok(inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect())
        };
        if let Some(rest) = line.strip_prefix("atoms:") {
            atoms = Some(parse_set(rest)?);
        } else if let Some(rest) = line.strip_prefix("initial ") {
            initial = rest.trim().parse().map_err(|_| bad("bad initial state"))?;
        } else if let Some(rest) = line.strip_prefix("state ") {
            let (id, set) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected 'state <id>: {...}'"))?;
            let id: usize = id.trim().parse().map_err(|_| bad("bad state id"))?;
            states.insert(id, parse_set(set)?);
        } else if let Some(rest) = line.strip_prefix("freq ") {
            let mut parts = rest.split_whitespace();
            let id = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad freq"))?;
            let c = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad freq"))?;
            freq.insert(id, c);
        } else if let Some(rest) = line.strip_prefix("trans ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("expected 'trans <from> <to> <prob>'"));
            }
            let from = parts[0].parse().map_err(|_| bad("bad state id"))?;
            let to = parts[1].parse().map_err(|_| bad("bad state id"))?;
            let p = parts[2].parse().map_err(|_| bad("bad probability"))?;
            trans.push((from, to, p));
        } else {
            return Err(bad("unrecognized line"));
        }
    }

    let n = states.len();
    if states.keys().copied().ne(0..n) {
        return Err(DtmcError::Invalid("state ids must be 0..n-1".into()));
    }
    let atoms = atoms.unwrap_or_else(|| {
        let mut seen: Vec<String> = Vec::new();
        for l in states.values().flatten() {
            if !seen.contains(l) {
                seen.push(l.clone());
            }
        }
        seen
    });
    let mut rows = vec![Vec::new(); n];
    for (from, to, p) in trans {
        rows.get_mut(from)
            .ok_or_else(|| DtmcError::Invalid(format!("transition from unknown state {from}")))?
            .push((to, p));
    }
    let frequency = if freq.is_empty() {
        None
    } else {
        Some((0..n).map(|s| freq.get(&s).copied().unwrap_or(0)).collect())
    };
    Dtmc::from_parts(
        atoms,
        states.into_values().collect(),
        initial,
        rows,
        frequency,
    )
}
