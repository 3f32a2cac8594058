//! Family-wise error rate controlling selection procedures.
//!
//! Every procedure consumes a vector of per-hypothesis p-values and returns
//! the certified index set together with an audit log that replays to the
//! same set. The sequential graphical test (SGT) is exposed both as a
//! one-shot driver and as an explicit state machine ([`SgtState`]) so tests
//! can explore alternative rejection orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pvalues::{PValueMatrix, PValueVector};

const BUDGET_TOL: f64 = 1e-12;

/// Node budgets and edge weights driving sequential graphical testing.
///
/// Budgets are nonnegative and sum to the total error level; each weight row
/// sums to at most one and the diagonal is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TestGraph {
    budgets: Vec<f64>,
    /// Dense row-major weights; entry `(i, j)` at `i * n + j`.
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TestGraphFile {
    n: usize,
    budgets: Vec<f64>,
    /// Sparse `[from, to, weight]` triples.
    edges: Vec<(usize, usize, f64)>,
}

impl TestGraph {
    pub fn new(budgets: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = budgets.len();
        if n == 0 {
            return Err(Error::invalid("test graph needs at least one node"));
        }
        if weights.len() != n * n {
            return Err(Error::invalid("weight matrix must be n x n"));
        }
        if budgets.iter().any(|b| *b < 0.0 || !b.is_finite()) {
            return Err(Error::invalid("budgets must be nonnegative"));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::invalid("weight diagonal must be zero"));
            }
            let mut row_sum = 0.0;
            for j in 0..n {
                let w = weights[i * n + j];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::invalid("edge weights must lie in [0, 1]"));
                }
                row_sum += w;
            }
            if row_sum > 1.0 + BUDGET_TOL {
                return Err(Error::invalid(format!(
                    "weight row {i} sums to {row_sum}, above one"
                )));
            }
        }
        Ok(TestGraph { budgets, weights })
    }

    pub fn n(&self) -> usize {
        self.budgets.len()
    }

    /// Total error level implied by the budgets.
    pub fn delta(&self) -> f64 {
        self.budgets.iter().sum()
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.n() + to]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TestGraphFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph json: {e}")))?;
        if file.budgets.len() != file.n {
            return Err(Error::Parse("graph json: budgets length != n".into()));
        }
        let mut weights = vec![0.0; file.n * file.n];
        for (from, to, w) in file.edges {
            if from >= file.n || to >= file.n {
                return Err(Error::Parse("graph json: edge endpoint out of range".into()));
            }
            weights[from * file.n + to] = w;
        }
        TestGraph::new(file.budgets, weights)
    }

    pub fn to_json(&self) -> String {
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = self.weights[i * n + j];
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        let file = TestGraphFile {
            n,
            budgets: self.budgets.clone(),
            edges,
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }
}

/// One tested hypothesis in a procedure's audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub index: usize,
    pub level: f64,
    pub p: f64,
    pub rejected: bool,
    /// Post-update budget vector; recorded by SGT rejections only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets_after: Option<Vec<f64>>,
}

/// The certified subset of grid indices plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSet {
    pub procedure: String,
    pub delta: f64,
    /// Sorted flat grid indices.
    pub rejected: Vec<usize>,
    pub log: Vec<AuditEvent>,
}

impl RejectionSet {
    fn from_events(procedure: &str, delta: f64, log: Vec<AuditEvent>) -> Self {
        let mut rejected: Vec<usize> = log
            .iter()
            .filter(|e| e.rejected)
            .map(|e| e.index)
            .collect();
        rejected.sort_unstable();
        rejected.dedup();
        RejectionSet {
            procedure: procedure.to_string(),
            delta,
            rejected,
            log,
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.rejected.binary_search(&index).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    /// Reconstructs the rejection set from the audit log alone.
    pub fn replay(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .log
            .iter()
            .filter(|e| e.rejected)
            .map(|e| e.index)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rejection set serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("rejection set json: {e}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    Ok(())
}

/// Rejects every hypothesis with `p_j <= delta / N`.
pub fn bonferroni(p: &PValueVector, delta: f64) -> Result<RejectionSet> {
    check_delta(delta)?;
    let n = p.len();
    let level = delta / n as f64;
    let log = p
        .values
        .iter()
        .enumerate()
        .map(|(j, &pj)| AuditEvent {
            index: j,
            level,
            p: pj,
            rejected: pj <= level,
            budgets_after: None,
        })
        .collect();
    Ok(RejectionSet::from_events("bonferroni", delta, log))
}

/// Holm's step-down refinement of Bonferroni.
pub fn holm(p: &PValueVector, delta: f64) -> Result<RejectionSet> {
    check_delta(delta)?;
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p.values[a].total_cmp(&p.values[b]));
    let mut log = Vec::with_capacity(n);
    let mut failed = false;
    for (rank, &j) in order.iter().enumerate() {
        let level = delta / (n - rank) as f64;
        let pj = p.values[j];
        let rejected = !failed && pj <= level;
        if !rejected {
            failed = true;
        }
        log.push(AuditEvent {
            index: j,
            level,
            p: pj,
            rejected,
            budgets_after: None,
        });
    }
    Ok(RejectionSet::from_events("holm", delta, log))
}

/// Fixed sequence testing over the natural index order (Algorithm-style
/// multi-start): from every start, walk upward rejecting while
/// `p_j <= delta / |starts|`, stopping at the first failure or the grid end.
pub fn fixed_sequence(p: &PValueVector, delta: f64, starts: &[usize]) -> Result<RejectionSet> {
    let order: Vec<usize> = (0..p.len()).collect();
    let positions = starts.to_vec();
    fixed_sequence_over_order(p, delta, &order, &positions, "fixed-sequence")
}

/// Fixed sequence testing along an arbitrary hypothesis ordering.
///
/// `start_positions` index into `order`. The significance level is
/// `delta / #starts` after deduplication.
pub fn fixed_sequence_over_order(
    p: &PValueVector,
    delta: f64,
    order: &[usize],
    start_positions: &[usize],
    procedure: &str,
) -> Result<RejectionSet> {
    check_delta(delta)?;
    if order.is_empty() || order.iter().any(|&j| j >= p.len()) {
        return Err(Error::invalid("ordering indices out of range"));
    }
    let mut starts: Vec<usize> = start_positions.to_vec();
    starts.sort_unstable();
    starts.dedup();
    if starts.is_empty() || starts.iter().any(|&s| s >= order.len()) {
        return Err(Error::invalid("start positions must be nonempty and in range"));
    }
    let level = delta / starts.len() as f64;
    let mut rejected = vec![false; p.len()];
    let mut log = Vec::new();
    for &start in &starts {
        if rejected[order[start]] {
            continue;
        }
        let mut pos = start;
        while pos < order.len() {
            let j = order[pos];
            let pj = p.values[j];
            let ok = pj <= level;
            log.push(AuditEvent {
                index: j,
                level,
                p: pj,
                rejected: ok,
                budgets_after: None,
            });
            if !ok {
                break;
            }
            rejected[j] = true;
            pos += 1;
        }
    }
    Ok(RejectionSet::from_events(procedure, delta, log))
}

/// Explicit state of a sequential graphical test.
///
/// [`sgt`] drives this with a lowest-index selection rule; tests can drive
/// it with any other eligible-node choice to probe order invariance.
#[derive(Debug, Clone)]
pub struct SgtState {
    n: usize,
    budgets: Vec<f64>,
    weights: Vec<f64>,
    rejected: Vec<bool>,
}

impl SgtState {
    pub fn new(graph: &TestGraph) -> Self {
        SgtState {
            n: graph.n(),
            budgets: graph.budgets.clone(),
            weights: graph.weights.clone(),
            rejected: vec![false; graph.n()],
        }
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn is_rejected(&self, i: usize) -> bool {
        self.rejected[i]
    }

    /// Unrejected nodes whose p-value is within their current budget.
    pub fn eligible(&self, p: &[f64]) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| !self.rejected[i] && p[i] <= self.budgets[i])
            .collect()
    }

    /// Rejects node `i`, redistributing its budget along the edges and
    /// rewiring the graph.
    pub fn reject(&mut self, i: usize) {
        assert!(!self.rejected[i], "node already rejected");
        self.rejected[i] = true;
        let freed = self.budgets[i];
        let n = self.n;
        let old = self.weights.clone();
        for j in 0..n {
            if self.rejected[j] {
                self.budgets[j] = 0.0;
            } else {
                self.budgets[j] += freed * old[i * n + j];
            }
        }
        for k in 0..n {
            for j in 0..n {
                let updated = if k != j && !self.rejected[k] && !self.rejected[j] {
                    let denom = 1.0 - old[k * n + i] * old[i * n + k];
                    if denom <= BUDGET_TOL {
                        // The rewiring formula is undefined at a saturated
                        // two-cycle; zero is the conservative limit.
                        0.0
                    } else {
                        (old[k * n + j] + old[k * n + i] * old[i * n + j]) / denom
                    }
                } else {
                    0.0
                };
                self.weights[k * n + j] = updated;
            }
        }
    }

    pub fn rejected_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.rejected[i]).collect()
    }
}

/// Sequential graphical testing with the deterministic lowest-index
/// selection rule among eligible nodes.
pub fn sgt(p: &PValueVector, graph: &TestGraph) -> Result<RejectionSet> {
    if p.len() != graph.n() {
        return Err(Error::invalid("p-value vector and graph size differ"));
    }
    let delta = graph.delta();
    let mut state = SgtState::new(graph);
    let mut log = Vec::new();
    loop {
        let candidates = state.eligible(&p.values);
        let Some(&i) = candidates.first() else { break };
        let level = state.budgets[i];
        state.reject(i);
        log.push(AuditEvent {
            index: i,
            level,
            p: p.values[i],
            rejected: true,
            budgets_after: Some(state.budgets.clone()),
        });
    }
    Ok(RejectionSet::from_events("sgt", delta, log))
}

/// Fallback-procedure graph for a `rows x cols` grid (flat row-major).
///
/// Each row is a chain walked from its last column to its first, with the
/// initial budget `delta / rows` at every chain head and weight-one edges
/// along the chain. The terminal node of each chain passes its budget to
/// the next row's head.
pub fn build_fallback_graph(rows: usize, cols: usize, delta: f64) -> Result<TestGraph> {
    check_delta(delta)?;
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let n = rows * cols;
    let flat = |r: usize, c: usize| r * cols + c;
    let mut budgets = vec![0.0; n];
    let mut weights = vec![0.0; n * n];
    for r in 0..rows {
        budgets[flat(r, cols - 1)] = delta / rows as f64;
        for c in (1..cols).rev() {
            weights[flat(r, c) * n + flat(r, c - 1)] = 1.0;
        }
        if r + 1 < rows {
            weights[flat(r, 0) * n + flat(r + 1, cols - 1)] = 1.0;
        }
    }
    TestGraph::new(budgets, weights)
}

/// Hamming graph on an `n_side x n_side` grid.
///
/// Node `(i, j)` (1-based, `i` rows from the bottom and `j` columns from the
/// right) maps to flat index `(i-1) * n_side + (j-1)`; the whole budget sits
/// at the root corner `(1, 1)` and cascades outward so the lower-right
/// triangle has balanced inflow.
pub fn build_hamming_graph(n_side: usize, delta: f64) -> Result<TestGraph> {
    check_delta(delta)?;
    if n_side < 2 {
        return Err(Error::invalid("hamming graph needs n_side >= 2"));
    }
    let n = n_side * n_side;
    let flat = |i: usize, j: usize| (i - 1) * n_side + (j - 1);
    let mut budgets = vec![0.0; n];
    budgets[flat(1, 1)] = delta;
    let mut weights = vec![0.0; n * n];
    for i in 1..=n_side {
        for j in 1..=n_side {
            let from = flat(i, j);
            if j + 1 <= n_side {
                let w = if i + j <= n_side {
                    j as f64 / (i + j) as f64
                } else if i == n_side {
                    1.0
                } else {
                    0.0
                };
                weights[from * n + flat(i, j + 1)] = w;
            }
            if i + 1 <= n_side {
                let w = if i + j <= n_side {
                    i as f64 / (i + j) as f64
                } else if i < n_side {
                    1.0
                } else {
                    0.0
                };
                weights[from * n + flat(i + 1, j)] = w;
            }
        }
    }
    TestGraph::new(budgets, weights)
}

/// Two-phase fixed sequence testing for a 2-D grid (flat row-major over
/// `shape = (rows, cols)`).
///
/// Row 0 holds the safest second-axis level. Phase one walks the columns of
/// row 0 at level `delta / 2` to pin the first-axis index; phase two walks
/// down the rows of that column, also at `delta / 2`.
pub fn cascaded_2d_fixed_sequence(
    p: &PValueVector,
    shape: (usize, usize),
    delta: f64,
) -> Result<RejectionSet> {
    check_delta(delta)?;
    let (rows, cols) = shape;
    if rows == 0 || cols == 0 || rows * cols != p.len() {
        return Err(Error::invalid(
            "cascaded 2-D testing requires matching 2-D shape metadata",
        ));
    }
    let level = delta / 2.0;
    let flat = |r: usize, c: usize| r * cols + c;
    let mut log = Vec::new();
    let mut pinned_col = None;
    for c in 0..cols {
        let j = flat(0, c);
        let pj = p.values[j];
        let ok = pj <= level;
        log.push(AuditEvent {
            index: j,
            level,
            p: pj,
            rejected: ok,
            budgets_after: None,
        });
        if !ok {
            break;
        }
        pinned_col = Some(c);
    }
    if let Some(col) = pinned_col {
        for r in 1..rows {
            let j = flat(r, col);
            let pj = p.values[j];
            let ok = pj <= level;
            log.push(AuditEvent {
                index: j,
                level,
                p: pj,
                rejected: ok,
                budgets_after: None,
            });
            if !ok {
                break;
            }
        }
    }
    Ok(RejectionSet::from_events("cascade-2d", delta, log))
}

/// Learns a hypothesis ordering from one data split and runs fixed sequence
/// testing on the other.
///
/// For each `beta = d / d_steps`, the ordering picks the grid point whose
/// p-value row is closest to `(beta, ..., beta)` in the sup norm (ties to
/// the smallest index); repeats are dropped keeping first occurrences. The
/// test split is then walked from the head of that ordering at level
/// `delta`.
pub fn split_fixed_sequence(
    p_graph: &PValueMatrix,
    p_test: &PValueVector,
    d_steps: usize,
    delta: f64,
) -> Result<(Vec<usize>, RejectionSet)> {
    check_delta(delta)?;
    if d_steps == 0 {
        return Err(Error::invalid("d_steps must be at least 1"));
    }
    if p_graph.n_params() == 0 || p_graph.n_params() != p_test.len() {
        return Err(Error::invalid("both splits must share the grid"));
    }
    let mut order = Vec::new();
    let mut seen = vec![false; p_graph.n_params()];
    for d in 0..=d_steps {
        let beta = d as f64 / d_steps as f64;
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for j in 0..p_graph.n_params() {
            let dist = p_graph
                .row(j)
                .iter()
                .map(|&pv| (pv - beta).abs())
                .fold(0.0f64, f64::max);
            if dist < best_dist {
                best_dist = dist;
                best = j;
            }
        }
        if !seen[best] {
            seen[best] = true;
            order.push(best);
        }
    }
    let set = fixed_sequence_over_order(p_test, delta, &order, &[0], "split-fixed-sequence")?;
    Ok((order, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvalues::PValueMethod;

    fn pvec(values: Vec<f64>) -> PValueVector {
        PValueVector::new(values, PValueMethod::Hb).unwrap()
    }

    #[test]
    fn bonferroni_threshold() {
        let set = bonferroni(&pvec(vec![0.001, 0.2, 0.004]), 0.05).unwrap();
        assert_eq!(set.rejected, vec![0, 2]);
    }

    #[test]
    fn bonferroni_all_ones_rejects_nothing() {
        let set = bonferroni(&pvec(vec![1.0, 1.0, 1.0]), 0.05).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn holm_hand_computed() {
        // 0.001 <= 0.05/3, 0.004 <= 0.05/2, 0.2 > 0.05.
        let set = holm(&pvec(vec![0.001, 0.2, 0.004]), 0.05).unwrap();
        assert_eq!(set.rejected, vec![0, 2]);
    }

    #[test]
    fn holm_single_hypothesis_is_plain_threshold() {
        assert_eq!(holm(&pvec(vec![0.04]), 0.05).unwrap().rejected, vec![0]);
        assert!(holm(&pvec(vec![0.06]), 0.05).unwrap().is_empty());
    }

    #[test]
    fn fixed_sequence_single_start() {
        let set = fixed_sequence(&pvec(vec![0.01, 0.02, 0.2, 0.01]), 0.05, &[0]).unwrap();
        assert_eq!(set.rejected, vec![0, 1]);
    }

    #[test]
    fn fixed_sequence_two_starts() {
        // Level 0.05 each; start 0 rejects {0, 1} and stops at index 2;
        // start 2 fails immediately.
        let set = fixed_sequence(&pvec(vec![0.01, 0.02, 0.2, 0.01]), 0.1, &[0, 2]).unwrap();
        assert_eq!(set.rejected, vec![0, 1]);
    }

    #[test]
    fn fixed_sequence_duplicate_starts_collapse() {
        let p = pvec(vec![0.01, 0.02, 0.2, 0.01]);
        let a = fixed_sequence(&p, 0.05, &[0, 0]).unwrap();
        let b = fixed_sequence(&p, 0.05, &[0]).unwrap();
        assert_eq!(a.rejected, b.rejected);
    }

    #[test]
    fn fixed_sequence_rejections_are_contiguous_runs() {
        let p = pvec(vec![0.001, 0.001, 0.9, 0.001, 0.001, 0.9]);
        let set = fixed_sequence(&p, 0.2, &[0, 3]).unwrap();
        assert_eq!(set.rejected, vec![0, 1, 3, 4]);
    }

    #[test]
    fn sgt_budget_flows_along_chain() {
        let graph = TestGraph::new(vec![0.05, 0.0], vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let set = sgt(&pvec(vec![0.02, 0.045]), &graph).unwrap();
        assert_eq!(set.rejected, vec![0, 1]);
    }

    #[test]
    fn sgt_zero_edges_matches_bonferroni() {
        let p = pvec(vec![0.004, 0.03, 0.012, 0.9]);
        let delta = 0.05;
        let n = p.len();
        let graph = TestGraph::new(vec![delta / n as f64; n], vec![0.0; n * n]).unwrap();
        let a = sgt(&p, &graph).unwrap();
        let b = bonferroni(&p, delta).unwrap();
        assert_eq!(a.rejected, b.rejected);
    }

    #[test]
    fn sgt_audit_log_replays() {
        let graph = build_fallback_graph(2, 2, 0.1).unwrap();
        let set = sgt(&pvec(vec![0.2, 0.01, 0.04, 0.03]), &graph).unwrap();
        assert_eq!(set.replay(), set.rejected);
    }

    #[test]
    fn fallback_one_row_is_a_chain() {
        let g = build_fallback_graph(1, 3, 0.1).unwrap();
        assert_eq!(g.budgets(), &[0.0, 0.0, 0.1]);
        assert_eq!(g.weight(2, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert_eq!(g.weight(0, 1), 0.0);
    }

    #[test]
    fn fallback_two_rows_single_column() {
        let g = build_fallback_graph(2, 1, 0.1).unwrap();
        assert_eq!(g.budgets(), &[0.05, 0.05]);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 0.0);
    }

    #[test]
    fn hamming_root_splits_evenly() {
        let g = build_hamming_graph(4, 0.1).unwrap();
        // Root (1,1) -> (1,2) and (2,1) both at 1/2.
        assert!((g.weight(0, 1) - 0.5).abs() < 1e-15);
        assert!((g.weight(0, 4) - 0.5).abs() < 1e-15);
        // Node (1,2) -> (1,3) at 2/3 and -> (2,2) at 1/3.
        assert!((g.weight(1, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((g.weight(1, 5) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hamming_budget_all_at_root() {
        let g = build_hamming_graph(3, 0.07).unwrap();
        assert_eq!(g.budgets()[0], 0.07);
        assert!(g.budgets()[1..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn cascade_rejects_row_and_column_on_zero_pvalues() {
        let p = pvec(vec![0.0; 6]);
        let set = cascaded_2d_fixed_sequence(&p, (2, 3), 0.1).unwrap();
        // Full first row plus the full column at the pinned first-axis index.
        assert_eq!(set.rejected, vec![0, 1, 2, 5]);
    }

    #[test]
    fn cascade_empty_when_phase_one_fails() {
        let p = pvec(vec![0.9; 6]);
        let set = cascaded_2d_fixed_sequence(&p, (2, 3), 0.1).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn cascade_requires_matching_shape() {
        let p = pvec(vec![0.5; 5]);
        assert!(cascaded_2d_fixed_sequence(&p, (2, 3), 0.1).is_err());
    }

    #[test]
    fn split_learns_descending_order() {
        let p_graph =
            PValueMatrix::new(3, 1, vec![0.9, 0.5, 0.1], PValueMethod::Hb).unwrap();
        let p_test = pvec(vec![0.9, 0.5, 0.1]);
        let (order, _) = split_fixed_sequence(&p_graph, &p_test, 2, 0.1).unwrap();
        assert_eq!(order, vec![2, 1, 0]);
    }

    #[test]
    fn split_collapses_identical_rows() {
        let p_graph =
            PValueMatrix::new(3, 1, vec![0.4, 0.4, 0.4], PValueMethod::Hb).unwrap();
        let p_test = pvec(vec![0.01, 0.01, 0.01]);
        let (order, set) = split_fixed_sequence(&p_graph, &p_test, 4, 0.1).unwrap();
        assert_eq!(order, vec![0]);
        assert_eq!(set.rejected, vec![0]);
    }

    #[test]
    fn graph_json_round_trip() {
        let g = build_hamming_graph(3, 0.1).unwrap();
        let back = TestGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn graph_rejects_heavy_rows() {
        // Middle row sums to 1.2.
        let weights = vec![
            0.0, 0.5, 0.0, //
            0.6, 0.0, 0.6, //
            0.0, 0.5, 0.0,
        ];
        assert!(TestGraph::new(vec![0.02, 0.02, 0.02], weights).is_err());
    }
}
