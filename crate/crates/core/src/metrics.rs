//! Behavior-space coverage measured in the concept vocabulary: a descriptor
//! falls into one bucket (or none) per axis, and coverage counts distinct
//! bucket combinations.

use std::collections::BTreeSet;

use crate::language::PropertySpec;
use crate::novelty::EvolutionOutcome;

/// Per-axis bucket index: which of the axis's properties (in listed order)
/// contains the value, or `None` if no bucket does.
pub fn bucket_key(descriptor: &[f64], properties: &[PropertySpec]) -> Vec<Option<usize>> {
    descriptor
        .iter()
        .enumerate()
        .map(|(axis, &v)| {
            properties
                .iter()
                .filter(|p| p.descriptor_axis == axis)
                .position(|p| p.bucket.contains(v))
        })
        .collect()
}

pub fn coverage<'a>(descriptors: impl IntoIterator<Item = &'a [f64]>, properties: &[PropertySpec]) -> usize {
    descriptors
        .into_iter()
        .map(|d| bucket_key(d, properties))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Coverage of the archive together with the final population.
pub fn outcome_coverage(outcome: &EvolutionOutcome, properties: &[PropertySpec]) -> usize {
    let archive = outcome.archive.descriptors();
    let population = outcome.population.iter().map(|i| i.descriptor.as_slice());
    coverage(archive.chain(population), properties)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
