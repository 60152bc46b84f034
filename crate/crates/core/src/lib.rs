//! Causal inference over discrete event traces with probabilistic temporal
//! logic, frequency-based model checking and local false discovery rates.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod checker;
pub mod dtmc;
pub mod fdr;
pub mod pctl;
pub mod pipeline;
pub mod synthgen;
pub mod traces;

pub use causal::{DivisorMode, Hypothesis, Label, PrimaFacieResult, SignificanceRecord};
pub use checker::{CheckError, FrequencyEstimate, ProbVector};
pub use dtmc::{build_dtmc, Dtmc, DtmcError};
pub use fdr::{FdrError, FdrOptions, FitOptions, MixtureDensity, NullModel, ZScores};
pub use pctl::{parse, Comparison, Formula, ParseError, ProbBound, TimeBound};
pub use pipeline::{infer, InferenceOptions, PipelineError, Report, StageCounts, TableRow};
pub use synthgen::{generate, preset, GenConfig, GenError, GroundTruth, StructureSpec};
pub use traces::{Event, EventList, Format, Series, Trace, TraceError, TraceSet};
