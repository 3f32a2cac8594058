//! Choosing the deployable parameter from a certified set.
//!
//! Every member of the certified set carries the same guarantee, so any
//! deterministic rule is valid, including data-driven ones. The
//! lexicographic optimizer applies a pipeline of stages, each of which
//! restricts the surviving candidates; final ties break by flat grid index.

use crate::error::{Error, Result};
use crate::fwer::RejectionSet;
use crate::grid::ParameterGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// One step of a lexicographic selection pipeline.
pub enum Stage<'a> {
    /// Keep the candidates extremizing one coordinate.
    Extremize { axis: usize, direction: Direction },
    /// Keep the candidates whose parameter vector satisfies a predicate.
    Filter(Box<dyn Fn(&[f64]) -> bool + 'a>),
    /// Keep the candidates minimizing an empirical objective indexed by
    /// flat grid index (for example an observed secondary risk column).
    MinimizeObjective(&'a [f64]),
}

/// The certified index maximizing one coordinate (ties by flat index).
pub fn select_sup(rejections: &RejectionSet, grid: &ParameterGrid, axis: usize) -> Result<usize> {
    select_lexicographic(
        rejections,
        grid,
        &[Stage::Extremize {
            axis,
            direction: Direction::Max,
        }],
    )
}

/// Applies the stages in order over the certified set and returns the flat
/// index of the unique survivor.
pub fn select_lexicographic(
    rejections: &RejectionSet,
    grid: &ParameterGrid,
    stages: &[Stage],
) -> Result<usize> {
    if rejections.rejected.is_empty() {
        return Err(Error::NoParameterCertified);
    }
    if rejections.rejected.iter().any(|&j| j >= grid.len()) {
        return Err(Error::invalid("certified index outside the grid"));
    }
    let mut candidates = rejections.rejected.clone();
    for stage in stages {
        match stage {
            Stage::Extremize { axis, direction } => {
                if *axis >= grid.dim() {
                    return Err(Error::invalid("stage axis outside the grid dimension"));
                }
                let pick = |acc: f64, v: f64| match direction {
                    Direction::Min => acc.min(v),
                    Direction::Max => acc.max(v),
                };
                let start = match direction {
                    Direction::Min => f64::INFINITY,
                    Direction::Max => f64::NEG_INFINITY,
                };
                let extreme = candidates
                    .iter()
                    .fold(start, |acc, &j| pick(acc, grid.value(j)[*axis]));
                candidates.retain(|&j| grid.value(j)[*axis] == extreme);
            }
            Stage::Filter(predicate) => {
                candidates.retain(|&j| predicate(grid.value(j)));
            }
            Stage::MinimizeObjective(objective) => {
                if objective.len() != grid.len() {
                    return Err(Error::invalid(
                        "objective column length must match the grid",
                    ));
                }
                let best = candidates
                    .iter()
                    .fold(f64::INFINITY, |acc, &j| acc.min(objective[j]));
                candidates.retain(|&j| objective[j] == best);
            }
        }
        if candidates.is_empty() {
            return Err(Error::SelectionUnsatisfiable);
        }
    }
    Ok(candidates[0])
}
