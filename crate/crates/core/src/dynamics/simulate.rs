use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::{apply_rule, enabled_rules, Applied};
use super::rule::DynamicRule;
use super::trace::{Step, Trace};
use crate::conformance::{conform, ConformOptions, ModelMismatch};
use crate::instance::{BoundState, Condition, ConditionBinding, System};
use crate::metamodel::Model;
use crate::rules::Violation;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimulateError {
    #[error(transparent)]
    ModelMismatch(#[from] ModelMismatch),
    #[error("initial system does not conform ({} violations)", .0.len())]
    InitialNonConforming(Vec<Violation>),
}

/// Rule applications possible from `system`: enabled pairs whose
/// execution succeeds and leaves a conforming system, in enumeration order.
pub fn applicable<'m>(system: &System, model: &'m Model) -> Vec<(&'m DynamicRule, Applied)> {
    enabled_rules(system, model)
        .pairs
        .into_iter()
        .filter_map(|(rule, b)| {
            let applied = apply_rule(system, model, rule, &b).ok()?;
            let report = conform(&applied.system, model, ConformOptions::default()).ok()?;
            report.violations.is_empty().then_some((rule, applied))
        })
        .collect()
}

/// Runs up to `steps` transitions from `initial`, choosing uniformly among
/// applicable rule applications with a ChaCha8 generator seeded by `seed`.
/// Stops early when nothing applies.
pub fn simulate(model: &Model, initial: &System, steps: usize, seed: u64) -> Result<Trace, SimulateError> {
    let report = conform(initial, model, ConformOptions::default())?;
    if !report.violations.is_empty() {
        return Err(SimulateError::InitialNonConforming(report.violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::new(model.name.clone(), initial.clone(), Some(seed));
    for _ in 0..steps {
        let current = trace.last();
        let mut options = applicable(current, model);
        if options.is_empty() {
            break;
        }
        let pick = rng.random_range(0..options.len());
        let (rule, applied) = options.swap_remove(pick);
        let step = record_step(rule, model, current, &applied);
        let mut next = applied.system;
        next.time_points.clear();
        trace.push(step, next);
    }
    Ok(trace)
}

fn record_step(rule: &DynamicRule, model: &Model, start: &System, applied: &Applied) -> Step {
    let mut conditions = Vec::new();
    for p in &rule.participants {
        if let Some(id) = applied.binding.object_of(&p.var) {
            if start.objects.contains_key(id) {
                conditions.push(ConditionBinding {
                    condition: Condition::Pre,
                    rule: rule.name.clone(),
                    object: id.to_string(),
                    bound: BoundState::Start,
                });
            }
        }
    }
    for (_, datum) in applied.binding.iter() {
        if let Some(id) = datum.as_object() {
            if applied.system.objects.contains_key(id) {
                conditions.push(ConditionBinding {
                    condition: Condition::Post,
                    rule: rule.name.clone(),
                    object: id.to_string(),
                    bound: BoundState::End,
                });
            }
        }
    }
    let kind = model
        .action_templates
        .get(&rule.action)
        .map(|a| a.kind())
        .unwrap_or(crate::metamodel::ActionKind::Internal);
    Step {
        rule: rule.name.clone(),
        kind,
        binding: applied.binding.clone(),
        conditions,
    }
}
