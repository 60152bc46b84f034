//! End-to-end inference: enumerate, prima facie filter, ε_avg, fdr, classify.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::causal::{
    average_terms, enumerate_pairwise, epsilon_x_with, prima_facie_with, CausalError, DivisorMode,
    EpsilonAverage, Hypothesis, Label, PrimaFacieResult,
};
use crate::checker::{evaluate, WindowIndex};
use crate::fdr::{analyze, FdrError, FdrOptions, FdrResult};
use crate::pctl::Formula;
use crate::traces::TraceSet;

pub const TABLE_HEADER: [&str; 11] = [
    "cause",
    "effect",
    "tmin",
    "tmax",
    "p_cond",
    "p_marginal",
    "prima_facie",
    "eps_avg",
    "z",
    "fdr",
    "label",
];
const NA: &str = "NA";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("enumerate stage: {0}")]
    Enumerate(CausalError),
    #[error("prima facie stage: {0}")]
    PrimaFacie(CausalError),
    #[error("fdr stage: {0}")]
    Fdr(#[from] FdrError),
    #[error("table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceOptions {
    pub tmin: u64,
    pub tmax: u64,
    pub include_negations: bool,
    pub divisor: DivisorMode,
    /// Minimum conditioning count for an ε term to be defined.
    pub min_support: u64,
    pub fdr: FdrOptions,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            tmin: 20,
            tmax: 40,
            include_negations: false,
            divisor: DivisorMode::Defined,
            min_support: 1,
            fdr: FdrOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    pub prima: PrimaFacieResult,
    /// Present for prima facie causes.
    pub eps: Option<EpsilonAverage>,
    pub z: Option<f64>,
    pub fdr: Option<f64>,
    pub underflow: bool,
    pub label: Option<Label>,
}

impl HypothesisRow {
    pub fn hypothesis(&self) -> &Hypothesis {
        &self.prima.hypothesis
    }

    pub fn eps_avg(&self) -> Option<f64> {
        self.eps.as_ref().and_then(|e| e.eps_avg)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub enumerated: usize,
    pub prima_facie: usize,
    pub scored: usize,
    pub classified: usize,
    pub significant: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<HypothesisRow>,
    /// `(cause, effect)` of significant rows, in row order.
    pub edges: Vec<(String, String)>,
    pub fdr: Option<FdrResult>,
    pub stages: StageCounts,
    pub wall_time: Duration,
}

impl Report {
    pub fn table(&self) -> Vec<TableRow> {
        self.rows.iter().map(TableRow::from).collect()
    }
}

/// Runs the pipeline over all ordered atom pairs.
pub fn infer(data: &TraceSet, opts: &InferenceOptions) -> Result<Report, PipelineError> {
    let hypotheses = enumerate_pairwise(
        data.variables(),
        opts.tmin,
        opts.tmax,
        opts.include_negations,
    )
    .map_err(PipelineError::Enumerate)?;
    infer_hypotheses(data, hypotheses, opts)
}

/// Runs the pipeline over a given hypothesis family. Rival causes are the
/// prima facie causes sharing the effect and window.
pub fn infer_hypotheses(
    data: &TraceSet,
    hypotheses: Vec<Hypothesis>,
    opts: &InferenceOptions,
) -> Result<Report, PipelineError> {
    let start = Instant::now();
    for h in &hypotheses {
        if h.tmin < 1 || h.tmin > h.tmax {
            return Err(PipelineError::Enumerate(CausalError::InvalidWindow {
                tmin: h.tmin,
                tmax: h.tmax,
            }));
        }
    }

    let mut keys: HashMap<String, usize> = HashMap::new();
    let mut formulas: Vec<&Formula> = Vec::new();
    let mut slots: Vec<(usize, usize)> = Vec::with_capacity(hypotheses.len());
    for h in &hypotheses {
        let mut pair = [0usize; 2];
        for (slot, f) in pair.iter_mut().zip([&h.cause, &h.effect]) {
            let key = f.to_string();
            *slot = match keys.get(&key) {
                Some(&k) => k,
                None => {
                    keys.insert(key, formulas.len());
                    formulas.push(f);
                    formulas.len() - 1
                }
            };
        }
        slots.push((pair[0], pair[1]));
    }
    let masks: Vec<Vec<Vec<bool>>> = formulas
        .par_iter()
        .map(|f| evaluate(data, f))
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::PrimaFacie(e.into()))?;
    let mut effect_slots: Vec<usize> = slots.iter().map(|s| s.1).collect();
    effect_slots.sort_unstable();
    effect_slots.dedup();
    let indices: HashMap<usize, WindowIndex> = effect_slots
        .par_iter()
        .map(|&e| (e, WindowIndex::new(&masks[e])))
        .collect();

    let prima: Vec<PrimaFacieResult> = hypotheses
        .par_iter()
        .zip(&slots)
        .map(|(h, &(c, e))| prima_facie_with(h, &masks[c], &indices[&e]))
        .collect();

    let mut families: BTreeMap<(usize, u64, u64), Vec<usize>> = BTreeMap::new();
    for (i, r) in prima.iter().enumerate() {
        if r.passed {
            let h = &r.hypothesis;
            families
                .entry((slots[i].1, h.tmin, h.tmax))
                .or_default()
                .push(i);
        }
    }
    let family_of: HashMap<usize, &Vec<usize>> = families
        .values()
        .flat_map(|members| members.iter().map(move |&i| (i, members)))
        .collect();

    let passed: Vec<usize> = (0..prima.len()).filter(|&i| prima[i].passed).collect();
    let eps: Vec<EpsilonAverage> = passed
        .par_iter()
        .map(|&i| {
            let h = &hypotheses[i];
            let (c, e) = slots[i];
            let family = family_of[&i];
            let terms: Vec<_> = family
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    epsilon_x_with(
                        &hypotheses[j].cause,
                        &masks[c],
                        &masks[slots[j].0],
                        &indices[&e],
                        h.tmin,
                        h.tmax,
                        opts.min_support,
                    )
                })
                .collect();
            let values: Vec<Option<f64>> = terms.iter().map(|t| t.value).collect();
            EpsilonAverage {
                eps_avg: average_terms(&values, family.len(), opts.divisor),
                terms,
            }
        })
        .collect();

    let mut rows: Vec<HypothesisRow> = prima
        .into_iter()
        .map(|prima| HypothesisRow {
            prima,
            eps: None,
            z: None,
            fdr: None,
            underflow: false,
            label: None,
        })
        .collect();
    for (&i, e) in passed.iter().zip(eps) {
        rows[i].eps = Some(e);
    }

    let scored: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].eps_avg().is_some())
        .collect();
    let fdr = if scored.is_empty() {
        None
    } else {
        let scores: Vec<f64> = scored.iter().map(|&i| rows[i].eps_avg().unwrap()).collect();
        let result = analyze(&scores, &opts.fdr)?;
        for (k, &i) in scored.iter().enumerate() {
            let row = &mut rows[i];
            row.z = Some(result.z.values[k]);
            row.fdr = Some(result.fdr[k].fdr);
            row.underflow = result.fdr[k].underflow;
            row.label = Some(if result.significant[k] {
                Label::Significant
            } else {
                Label::Insignificant
            });
        }
        Some(result)
    };

    let edges: Vec<(String, String)> = rows
        .iter()
        .filter(|r| r.label == Some(Label::Significant))
        .map(|r| {
            (
                r.hypothesis().cause.to_string(),
                r.hypothesis().effect.to_string(),
            )
        })
        .collect();
    let stages = StageCounts {
        enumerated: rows.len(),
        prima_facie: passed.len(),
        scored: scored.len(),
        classified: rows.iter().filter(|r| r.label.is_some()).count(),
        significant: edges.len(),
    };
    Ok(Report {
        rows,
        edges,
        fdr,
        stages,
        wall_time: start.elapsed(),
    })
}

/// One line of the hypothesis table, in its textual form.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub cause: String,
    pub effect: String,
    pub tmin: u64,
    pub tmax: u64,
    pub p_cond: Option<f64>,
    pub p_marginal: Option<f64>,
    pub prima_facie: bool,
    pub eps_avg: Option<f64>,
    pub z: Option<f64>,
    pub fdr: Option<f64>,
    pub label: Option<Label>,
}

impl From<&HypothesisRow> for TableRow {
    fn from(r: &HypothesisRow) -> Self {
        let h = r.hypothesis();
        let p = &r.prima;
        TableRow {
            cause: h.cause.to_string(),
            effect: h.effect.to_string(),
            tmin: h.tmin,
            tmax: h.tmax,
            p_cond: (p.p_cond.denominator > 0).then_some(p.p_cond.probability),
            p_marginal: (p.p_marginal.denominator > 0).then_some(p.p_marginal.probability),
            prima_facie: p.passed,
            eps_avg: r.eps_avg(),
            z: r.z,
            fdr: r.fdr,
            label: r.label,
        }
    }
}

struct Num(Option<f64>);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str(NA),
            Some(v) if v == 0.0 || (1e-4..1e9).contains(&v.abs()) => write!(f, "{v}"),
            Some(v) => write!(f, "{v:e}"),
        }
    }
}

pub fn write_table<W: Write>(mut out: W, rows: &[TableRow]) -> std::io::Result<()> {
    writeln!(out, "{}", TABLE_HEADER.join("\t"))?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.cause,
            r.effect,
            r.tmin,
            r.tmax,
            Num(r.p_cond),
            Num(r.p_marginal),
            r.prima_facie,
            Num(r.eps_avg),
            Num(r.z),
            Num(r.fdr),
            r.label.map_or(NA.to_string(), |l| l.to_string()),
        )?;
    }
    Ok(())
}

pub fn read_table<R: BufRead>(source: R) -> Result<Vec<TableRow>, PipelineError> {
    let mut rows = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let err = |reason: String| PipelineError::Table { line: n, reason };
        if i == 0 {
            if line.split('\t').ne(TABLE_HEADER) {
                return Err(err("unexpected header".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != TABLE_HEADER.len() {
            return Err(err(format!(
                "expected {} fields, got {}",
                TABLE_HEADER.len(),
                f.len()
            )));
        }
        let num = |k: usize| -> Result<Option<f64>, PipelineError> {
            if f[k] == NA {
                return Ok(None);
            }
            f[k].parse::<f64>()
                .map(Some)
                .map_err(|_| err(format!("bad {} value '{}'", TABLE_HEADER[k], f[k])))
        };
        let int = |k: usize| -> Result<u64, PipelineError> {
            f[k].parse::<u64>()
                .map_err(|_| err(format!("bad {} value '{}'", TABLE_HEADER[k], f[k])))
        };
        rows.push(TableRow {
            cause: f[0].to_string(),
            effect: f[1].to_string(),
            tmin: int(2)?,
            tmax: int(3)?,
            p_cond: num(4)?,
            p_marginal: num(5)?,
            prima_facie: match f[6] {
                "true" => true,
                "false" => false,
                other => return Err(err(format!("bad prima_facie value '{other}'"))),
            },
            eps_avg: num(7)?,
            z: num(8)?,
            fdr: num(9)?,
            label: match f[10] {
                NA => None,
                "significant" => Some(Label::Significant),
                "insignificant" => Some(Label::Insignificant),
                other => return Err(err(format!("bad label '{other}'"))),
            },
        });
    }
    Ok(rows)
}

/// Re-runs z-scoring, fitting and classification on a table's ε_avg column.
pub fn rescore(rows: &mut [TableRow], opts: &FdrOptions) -> Result<Option<FdrResult>, FdrError> {
    let scored: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].eps_avg.is_some())
        .collect();
    for r in rows.iter_mut() {
        r.z = None;
        r.fdr = None;
        r.label = None;
    }
    if scored.is_empty() {
        return Ok(None);
    }
    let scores: Vec<f64> = scored.iter().map(|&i| rows[i].eps_avg.unwrap()).collect();
    let result = analyze(&scores, opts)?;
    for (k, &i) in scored.iter().enumerate() {
        rows[i].z = Some(result.z.values[k]);
        rows[i].fdr = Some(result.fdr[k].fdr);
        rows[i].label = Some(if result.significant[k] {
            Label::Significant
        } else {
            Label::Insignificant
        });
    }
    Ok(Some(result))
}

pub fn significant_edges(rows: &[TableRow]) -> Vec<(String, String)> {
    rows.iter()
        .filter(|r| r.label == Some(Label::Significant))
        .map(|r| (r.cause.clone(), r.effect.clone()))
        .collect()
}

pub fn write_edges<W: Write>(mut out: W, edges: &[(String, String)]) -> std::io::Result<()> {
    for (c, e) in edges {
        writeln!(out, "{c}\t{e}")?;
    }
    Ok(())
}

pub fn stage_counts(rows: &[TableRow]) -> StageCounts {
    StageCounts {
        enumerated: rows.len(),
        prima_facie: rows.iter().filter(|r| r.prima_facie).count(),
        scored: rows.iter().filter(|r| r.eps_avg.is_some()).count(),
        classified: rows.iter().filter(|r| r.label.is_some()).count(),
        significant: rows
            .iter()
            .filter(|r| r.label == Some(Label::Significant))
            .count(),
    }
}

/// `key<TAB>value` run summary. Contains nothing time-dependent.
pub fn write_summary<W: Write>(
    mut out: W,
    stages: &StageCounts,
    fdr: Option<&FdrResult>,
) -> std::io::Result<()> {
    writeln!(out, "enumerated\t{}", stages.enumerated)?;
    writeln!(out, "prima_facie\t{}", stages.prima_facie)?;
    writeln!(out, "scored\t{}", stages.scored)?;
    writeln!(out, "classified\t{}", stages.classified)?;
    writeln!(out, "significant\t{}", stages.significant)?;
    let (mean, sd, d0, s0, p0, threshold, underflow) = match fdr {
        Some(r) => (
            Some(r.z.mean),
            Some(r.z.sd),
            Some(r.null.delta0),
            Some(r.null.sigma0),
            r.null.p0,
            Some(r.threshold),
            r.fdr.iter().filter(|l| l.underflow).count(),
        ),
        None => (None, None, None, None, None, None, 0),
    };
    writeln!(out, "eps_mean\t{}", Num(mean))?;
    writeln!(out, "eps_sd\t{}", Num(sd))?;
    writeln!(out, "null_delta0\t{}", Num(d0))?;
    writeln!(out, "null_sigma0\t{}", Num(s0))?;
    writeln!(out, "null_p0\t{}", Num(p0))?;
    writeln!(out, "threshold\t{}", Num(threshold))?;
    writeln!(out, "fdr_underflow\t{underflow}")?;
    Ok(())
}
