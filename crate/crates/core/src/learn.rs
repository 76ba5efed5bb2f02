//! End-to-end learning: traces in, typed domain out.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::complete::{assign_parameter_types, infer_object_types, synth_preconditions};
use crate::model::{ActionSchema, Domain, ModelError, Name};
use crate::synth::{
    check_witness, synth_label_with_encoding, EffectSolution, FinalEncoding, SynthError,
    SynthLimits,
};
use crate::trace::{decompose, LabelGroup, Trace, TraceError};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("learned preconditions of `{0}` fail on an observed before-state")]
    Unsound(Name),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}

#[derive(Debug, Clone)]
pub struct LearnConfig {
    /// Shared across labels in proportion to their number of transitions.
    pub time_limit: Option<Duration>,
    pub param_budget_extra: usize,
    /// Worker threads for label-parallel synthesis; 0 picks a default.
    pub workers: usize,
    pub record_cnf: bool,
    /// Keep each label's final formula in the result.
    pub keep_encodings: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            time_limit: Some(Duration::from_secs(60)),
            param_budget_extra: 3,
            workers: 0,
            record_cnf: false,
            keep_encodings: false,
        }
    }
}

#[derive(Debug)]
pub struct LearnedAction {
    pub solution: EffectSolution,
    pub schema: ActionSchema,
    pub min_pars: usize,
    pub encoding: Option<FinalEncoding>,
}

impl LearnedAction {
    pub fn summary_line(&self) -> String {
        format!(
            "{} k={} pre={} add={} del={}",
            self.schema.name,
            self.schema.arity(),
            self.schema.pre.len(),
            self.schema.add.len(),
            self.schema.del.len()
        )
    }
}

#[derive(Debug)]
pub struct Learned {
    pub domain: Domain,
    /// In label order, same as `domain.actions`.
    pub actions: Vec<LearnedAction>,
}

pub fn learn(header: &Domain, traces: &[Trace], cfg: &LearnConfig) -> Result<Learned, LearnError> {
    let groups = decompose(traces)?;
    learn_groups(header, &groups, cfg)
}

pub fn learn_groups(
    header: &Domain,
    groups: &BTreeMap<Name, LabelGroup>,
    cfg: &LearnConfig,
) -> Result<Learned, LearnError> {
    let total: usize = groups.values().map(LabelGroup::len).sum();
    let budget = |g: &LabelGroup| {
        cfg.time_limit
            .map(|t| t.mul_f64(g.len() as f64 / total.max(1) as f64))
    };
    let run = |g: &LabelGroup| {
        let limits = SynthLimits {
            param_budget_extra: cfg.param_budget_extra,
            deadline: budget(g).map(|b| Instant::now() + b),
            record_cnf: cfg.record_cnf,
        };
        synth_label_with_encoding(g, &limits)
    };
    let list: Vec<&LabelGroup> = groups.values().collect();
    let results: Vec<Result<(EffectSolution, FinalEncoding), SynthError>> = if cfg.workers == 1 {
        list.iter().map(|g| run(g)).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if cfg.workers > 0 {
            builder = builder.num_threads(cfg.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| LearnError::Workers(e.to_string()))?;
        pool.install(|| list.par_iter().map(|g| run(g)).collect())
    };

    let table = infer_object_types(groups.values(), header)?;
    let mut domain = header.header();
    let mut actions = Vec::with_capacity(list.len());
    for (group, res) in list.into_iter().zip(results) {
        let (solution, encoding) = res?;
        let mut schema = solution.schema();
        schema.pre = synth_preconditions(group, &solution);
        schema.param_types = assign_parameter_types(group, &solution, &table, &header.types)?;
        if !check_witness(&schema, &solution.substitutions, group) {
            return Err(LearnError::Unsound(group.label.clone()));
        }
        domain.actions.push(schema.clone());
        actions.push(LearnedAction {
            solution,
            schema,
            min_pars: group.min_pars,
            encoding: cfg.keep_encodings.then_some(encoding),
        });
    }
    Ok(Learned { domain, actions })
}
