//! Synthetic spike trains with an embedded causal structure.
//!
//! Simulation rule, one tick at a time: each eligible neuron may fire
//! spontaneously, and each firing schedules one delayed trigger per
//! out-edge. When a trigger comes due the child fires with the edge's
//! trigger probability, provided it is eligible. A neuron that fired at `t`
//! is eligible again from `t + refractory`.
//!
//! Random draws are taken in a fixed order: ticks ascending, neurons in
//! declaration order; for an eligible neuron one draw for spontaneous firing
//! then one per due trigger (in scheduling order); for a neuron that fires,
//! one delay draw per out-edge in edge order. Ineligible neurons draw nothing.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::traces::{Event, EventList, TraceError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown preset '{0}' (expected chain, fork, collider or tree)")]
    UnknownPreset(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no neuron can fire spontaneously, so no firing would ever occur")]
    NoSources,
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub parent: String,
    pub child: String,
    pub trigger_prob: f64,
}

/// Neurons and the directed trigger edges between them.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSpec {
    neurons: Vec<String>,
    edges: Vec<Edge>,
}

impl StructureSpec {
    pub fn new(neurons: Vec<String>, edges: Vec<Edge>) -> Result<Self, GenError> {
        let mut seen = BTreeMap::new();
        for (i, n) in neurons.iter().enumerate() {
            if seen.insert(n.as_str(), i).is_some() {
                return Err(GenError::InvalidStructure(format!(
                    "duplicate neuron '{n}'"
                )));
            }
        }
        for e in &edges {
            for end in [&e.parent, &e.child] {
                if !seen.contains_key(end.as_str()) {
                    return Err(GenError::InvalidStructure(format!(
                        "edge endpoint '{end}' is not a declared neuron"
                    )));
                }
            }
            if e.parent == e.child {
                return Err(GenError::InvalidStructure(format!(
                    "self-edge on '{}'",
                    e.parent
                )));
            }
            if !(0.0..=1.0).contains(&e.trigger_prob) {
                return Err(GenError::InvalidStructure(format!(
                    "trigger probability {} outside [0, 1]",
                    e.trigger_prob
                )));
            }
        }
        Ok(StructureSpec { neurons, edges })
    }

    pub fn neurons(&self) -> &[String] {
        &self.neurons
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sets every edge's trigger probability.
    pub fn with_trigger_prob(mut self, p: f64) -> Result<Self, GenError> {
        for e in &mut self.edges {
            e.trigger_prob = p;
        }
        StructureSpec::new(self.neurons, self.edges)
    }

    /// Neurons with no incoming edge.
    pub fn roots(&self) -> Vec<&str> {
        self.neurons
            .iter()
            .filter(|n| !self.edges.iter().any(|e| &e.child == *n))
            .map(String::as_str)
            .collect()
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            edges: self
                .edges
                .iter()
                .map(|e| (e.parent.clone(), e.child.clone()))
                .collect(),
        }
    }
}

/// Letter names A..Z, then N26, N27, ...
pub fn neuron_name(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("N{index}")
    }
}

/// Builds a named structure. `size` is the neuron count for `chain`, the
/// number of children for `fork`, the number of parents for `collider`, and
/// the depth for `tree`.
pub fn preset(name: &str, size: Option<usize>) -> Result<StructureSpec, GenError> {
    let edge = |p: usize, c: usize| Edge {
        parent: neuron_name(p),
        child: neuron_name(c),
        trigger_prob: 1.0,
    };
    let (count, edges): (usize, Vec<Edge>) = match name {
        "chain" => {
            let n = size.unwrap_or(4).max(2);
            (n, (1..n).map(|i| edge(i - 1, i)).collect())
        }
        "fork" => {
            let k = size.unwrap_or(2).max(1);
            (k + 1, (1..=k).map(|i| edge(0, i)).collect())
        }
        "collider" => {
            let k = size.unwrap_or(2).max(1);
            (k + 1, (0..k).map(|i| edge(i, k)).collect())
        }
        "tree" => {
            let depth = size.unwrap_or(4).clamp(1, 16) as u32;
            let n = (1usize << depth) - 1;
            let edges = (1..n).map(|c| edge((c - 1) / 2, c)).collect();
            (n, edges)
        }
        other => return Err(GenError::UnknownPreset(other.to_string())),
    };
    StructureSpec::new((0..count).map(neuron_name).collect(), edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub structure: StructureSpec,
    /// Per-tick spontaneous firing probability of every neuron.
    pub spontaneous_rate: f64,
    /// Per-neuron replacements for `spontaneous_rate`.
    pub rate_overrides: BTreeMap<String, f64>,
    pub refractory: u64,
    pub delay_min: u64,
    pub delay_max: u64,
    pub target_firings: u64,
    pub seed: u64,
}

impl GenConfig {
    pub const DEFAULT_SPONTANEOUS_RATE: f64 = 0.0323;
    pub const DEFAULT_REFRACTORY: u64 = 20;
    pub const DEFAULT_DELAY_MIN: u64 = 20;
    pub const DEFAULT_DELAY_MAX: u64 = 40;
    pub const DEFAULT_TARGET: u64 = 100_000;

    pub fn new(structure: StructureSpec, seed: u64) -> Self {
        GenConfig {
            structure,
            spontaneous_rate: Self::DEFAULT_SPONTANEOUS_RATE,
            rate_overrides: BTreeMap::new(),
            refractory: Self::DEFAULT_REFRACTORY,
            delay_min: Self::DEFAULT_DELAY_MIN,
            delay_max: Self::DEFAULT_DELAY_MAX,
            target_firings: Self::DEFAULT_TARGET,
            seed,
        }
    }

    fn rates(&self) -> Result<Vec<f64>, GenError> {
        let neurons = self.structure.neurons();
        for name in self.rate_overrides.keys() {
            if !neurons.contains(name) {
                return Err(GenError::InvalidConfig(format!(
                    "rate override for unknown neuron '{name}'"
                )));
            }
        }
        let rates: Vec<f64> = neurons
            .iter()
            .map(|n| *self.rate_overrides.get(n).unwrap_or(&self.spontaneous_rate))
            .collect();
        if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(GenError::InvalidConfig(format!(
                "spontaneous rate {r} outside [0, 1]"
            )));
        }
        Ok(rates)
    }

    fn check(&self) -> Result<Vec<f64>, GenError> {
        if self.delay_min < 1 {
            return Err(GenError::InvalidConfig(
                "delay_min must be at least 1".into(),
            ));
        }
        if self.delay_min > self.delay_max {
            return Err(GenError::InvalidConfig(format!(
                "delay_min {} exceeds delay_max {}",
                self.delay_min, self.delay_max
            )));
        }
        if self.target_firings == 0 {
            return Err(GenError::InvalidConfig(
                "target_firings must be positive".into(),
            ));
        }
        let rates = self.rates()?;
        if rates.iter().all(|&r| r == 0.0) {
            return Err(GenError::NoSources);
        }
        Ok(rates)
    }
}

/// The embedded (cause, effect) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    pub edges: Vec<(String, String)>,
}

impl GroundTruth {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (p, c) in &self.edges {
            writeln!(out, "{p},{c}")?;
        }
        Ok(())
    }

    /// Reads `<parent>,<child>` rows; blank lines are skipped.
    pub fn read<R: BufRead>(source: R) -> Result<Self, TraceError> {
        let mut edges = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (p, c) = line.split_once(',').ok_or_else(|| TraceError::Malformed {
                line: i as u64 + 1,
                reason: "expected '<parent>,<child>'".into(),
            })?;
            edges.push((p.trim().to_string(), c.trim().to_string()));
        }
        Ok(GroundTruth { edges })
    }
}

/// Runs the simulation until at least `target_firings` firings occurred.
pub fn generate(config: &GenConfig) -> Result<(EventList, GroundTruth), GenError> {
    let rates = config.check()?;
    let structure = &config.structure;
    let n = structure.neurons().len();
    let index: HashMap<&str, usize> = structure
        .neurons()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut out_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in structure.edges() {
        out_edges[index[e.parent.as_str()]].push((index[e.child.as_str()], e.trigger_prob));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ring = (config.delay_max + 1) as usize;
    let mut pending: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ring];
    let mut due: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut last_fire: Vec<Option<u64>> = vec![None; n];
    let gap = config.refractory.max(1);
    let mut events = Vec::new();
    let mut fired_total = 0u64;
    let mut t = 0u64;

    loop {
        let slot = (t % ring as u64) as usize;
        for (child, p) in pending[slot].drain(..) {
            due[child].push(p);
        }
        for neuron in 0..n {
            let eligible = last_fire[neuron].is_none_or(|lf| t >= lf + gap);
            let triggers = std::mem::take(&mut due[neuron]);
            if !eligible {
                continue;
            }
            let mut fires = rng.gen::<f64>() < rates[neuron];
            for p in triggers {
                fires |= rng.gen::<f64>() < p;
            }
            if !fires {
                continue;
            }
            last_fire[neuron] = Some(t);
            fired_total += 1;
            events.push(Event {
                time: t,
                variable: structure.neurons()[neuron].clone(),
            });
            for &(child, p) in &out_edges[neuron] {
                let d = rng.gen_range(config.delay_min..=config.delay_max);
                pending[((t + d) % ring as u64) as usize].push((child, p));
            }
        }
        if fired_total >= config.target_firings {
            break;
        }
        t += 1;
    }

    let list = EventList::new(structure.neurons().to_vec(), events, t + 1)?;
    Ok((list, structure.ground_truth()))
}
