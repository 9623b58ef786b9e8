//! Hungarian (Kuhn–Munkres) assignment in its matrix-reduction form.
//!
//! The cost matrix is reduced row-wise and column-wise, then the minimum
//! number of lines covering every zero is found. While fewer than `M` lines
//! suffice, the smallest uncovered entry is subtracted from every uncovered
//! entry and added to every entry covered twice. Once `M` lines are needed an
//! optimal assignment lies on the zeros.
//!
//! The minimum line cover comes from König's theorem: with a maximum matching
//! on the zero entries, let `Z` be everything reachable from unmatched rows by
//! alternating paths; the cover is the rows outside `Z` plus the columns
//! inside `Z`.

/// Record of the reduction loop, one entry per line-cover step.
#[derive(Debug, Clone, PartialEq)]
pub struct HungarianTrace {
    /// Matrix after row and column reduction, row-major.
    pub reduced: Vec<f64>,
    /// `(lines, smallest uncovered entry)`; the last step has no adjustment.
    pub steps: Vec<(usize, Option<f64>)>,
    /// Final reduced matrix whose zeros carry the optimal assignments.
    pub final_reduced: Vec<f64>,
}

struct ZeroGraph<'a> {
    n: usize,
    work: &'a [f64],
}

impl ZeroGraph<'_> {
    fn is_zero(&self, i: usize, j: usize) -> bool {
        self.work[i * self.n + j] == 0.0
    }

    fn try_augment(
        &self,
        row: usize,
        seen: &mut [bool],
        col_match: &mut [Option<usize>],
        row_match: &mut [Option<usize>],
    ) -> bool {
        for j in 0..self.n {
            if seen[j] || !self.is_zero(row, j) {
                continue;
            }
            seen[j] = true;
            let free = match col_match[j] {
                None => true,
                Some(r) => self.try_augment(r, seen, col_match, row_match),
            };
            if free {
                col_match[j] = Some(row);
                row_match[row] = Some(j);
                return true;
            }
        }
        false
    }
}

fn snap(work: &mut [f64], eps: f64) {
    for x in work.iter_mut() {
        if x.abs() <= eps {
            *x = 0.0;
        }
    }
}

/// Minimum-cost assignment of an `n x n` row-major cost matrix. Returns
/// `assignment[row] = column`, choosing the lexicographically smallest
/// assignment among those of (numerically) equal cost.
pub fn solve_min(costs: &[f64], n: usize) -> (Vec<usize>, HungarianTrace) {
    assert_eq!(costs.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return (
            Vec::new(),
            HungarianTrace {
                reduced: Vec::new(),
                steps: Vec::new(),
                final_reduced: Vec::new(),
            },
        );
    }
    let scale = costs.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let eps = 1e-12 * scale;

    // Shift to non-negative entries; a constant offset leaves the argmin alone.
    let min_all = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut work: Vec<f64> = costs.iter().map(|&c| c - min_all).collect();

    for row in work.chunks_exact_mut(n) {
        let rmin = row.iter().copied().fold(f64::INFINITY, f64::min);
        row.iter_mut().for_each(|x| *x -= rmin);
    }
    for j in 0..n {
        let cmin = (0..n).map(|i| work[i * n + j]).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            work[i * n + j] -= cmin;
        }
    }
    snap(&mut work, eps);
    let reduced = work.clone();

    let mut row_match: Vec<Option<usize>> = vec![None; n];
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    let mut steps = Vec::new();
    loop {
        let graph = ZeroGraph { n, work: &work };
        for i in 0..n {
            if row_match[i].is_none() {
                let mut seen = vec![false; n];
                graph.try_augment(i, &mut seen, &mut col_match, &mut row_match);
            }
        }
        let lines = row_match.iter().filter(|m| m.is_some()).count();
        if lines == n {
            steps.push((lines, None));
            break;
        }

        // Alternating reachability from unmatched rows.
        let mut row_in = vec![false; n];
        let mut col_in = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| row_match[i].is_none()).collect();
        for &i in &stack {
            row_in[i] = true;
        }
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !col_in[j] && graph.is_zero(i, j) {
                    col_in[j] = true;
                    if let Some(r) = col_match[j] {
                        if !row_in[r] {
                            row_in[r] = true;
                            stack.push(r);
                        }
                    }
                }
            }
        }

        // Uncovered: rows reached, columns not reached.
        let mut r_min = f64::INFINITY;
        for i in (0..n).filter(|&i| row_in[i]) {
            for j in (0..n).filter(|&j| !col_in[j]) {
                r_min = r_min.min(work[i * n + j]);
            }
        }
        steps.push((lines, Some(r_min)));
        for i in 0..n {
            for j in 0..n {
                match (row_in[i], col_in[j]) {
                    (true, false) => work[i * n + j] -= r_min,
                    (false, true) => work[i * n + j] += r_min,
                    _ => {}
                }
            }
        }
        snap(&mut work, eps);
    }

    let assignment = lex_smallest_matching(&work, n, &row_match);
    (
        assignment,
        HungarianTrace {
            reduced,
            steps,
            final_reduced: work,
        },
    )
}

/// Lexicographically smallest perfect matching on the zero entries.
fn lex_smallest_matching(work: &[f64], n: usize, found: &[Option<usize>]) -> Vec<usize> {
    let found: Vec<usize> = found.iter().map(|m| m.expect("perfect matching")).collect();
    let zeros = work.iter().filter(|&&x| x == 0.0).count();
    if zeros == n {
        // Only one matching exists.
        return found;
    }
    let graph = ZeroGraph { n, work };
    let mut assignment = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if used[j] || !graph.is_zero(i, j) {
                continue;
            }
            used[j] = true;
            if completes(&graph, i + 1, &used) {
                assignment.push(j);
                break;
            }
            used[j] = false;
        }
    }
    debug_assert_eq!(assignment.len(), n);
    assignment
}

/// Whether rows `first..n` can be perfectly matched into unused columns.
fn completes(graph: &ZeroGraph<'_>, first: usize, used: &[bool]) -> bool {
    let n = graph.n;
    // Used columns are pre-marked as seen, so they are never entered.
    let mut col_match = vec![None; n];
    let mut row_match = vec![None; n];
    for i in first..n {
        let mut seen = used.to_vec();
        if !graph.try_augment(i, &mut seen, &mut col_match, &mut row_match) {
            return false;
        }
    }
    true
}
