//! Chain diagnostics: irreducibility, primitivity, limiting matrix and
//! stationary vector, transition-graph export and order sweeps.
//!
//! All checks run over the *considered* states: rows with at least one
//! successor. Never-observed tuples are all-zero rows and are left out (and
//! listed in the report), otherwise every higher-order chain would come out
//! reducible.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::NoteSequence;
use crate::model::{count_transitions_limited, ratio_str, sparsity, to_tpm, ModelError, TransitionMatrix};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_POWER: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("chain is not regular")]
    NotRegular,
    #[error("powers did not converge within {0} multiplications")]
    NoConvergence(usize),
    #[error("stationary system is singular (chain has more than one closed class)")]
    SingularSystem,
    #[error("chain has no observed states")]
    NoStates,
}

/// Observed rows and the support edges among them.
#[derive(Debug, Clone)]
pub struct SupportGraph {
    /// tpm row index of each state.
    pub rows: Vec<usize>,
    pub labels: Vec<String>,
    /// `adj[i]` lists successor states of `i`, ascending.
    pub adj: Vec<Vec<usize>>,
}

impl SupportGraph {
    pub fn new(tpm: &TransitionMatrix) -> Self {
        let rows: Vec<usize> = tpm.observed_rows().map(|(r, _)| r).collect();
        let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let adj = rows
            .iter()
            .map(|&r| {
                let probs = tpm.row(r).expect("observed");
                let targets: BTreeSet<usize> = probs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .filter_map(|(c, _)| pos.get(&tpm.successor_row(r, c)).copied())
                    .collect();
                targets.into_iter().collect()
            })
            .collect();
        let labels = rows.iter().map(|&r| tpm.row_label(r)).collect();
        Self { rows, labels, adj }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn reaches_all(&self, adj: &[Vec<usize>]) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Strongly connected: state 0 reaches everything and everything
    /// reaches state 0.
    pub fn is_strongly_connected(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut rev = vec![Vec::new(); self.len()];
        for (v, succ) in self.adj.iter().enumerate() {
            for &w in succ {
                rev[w].push(v);
            }
        }
        self.reaches_all(&self.adj) && self.reaches_all(&rev)
    }
}

/// Irreducibility over the observed states.
pub fn is_ergodic(tpm: &TransitionMatrix) -> bool {
    SupportGraph::new(tpm).is_strongly_connected()
}

/// Smallest power with an entrywise positive support matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regularity {
    pub regular: bool,
    pub power: Option<usize>,
}

/// `(m-1)^2 + 1` for `m` states.
pub fn wielandt_bound(states: usize) -> usize {
    let m = states.max(1);
    (m - 1) * (m - 1) + 1
}

/// Boolean matrix as one bitset per row.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn from_adj(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for (i, succ) in adj.iter().enumerate() {
            for &j in succ {
                bits[i * words + j / 64] |= 1 << (j % 64);
            }
        }
        Self { n, words, bits }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// `self * rhs` over the boolean semiring.
    fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = vec![0u64; self.bits.len()];
        for i in 0..self.n {
            let dst = &mut out[i * self.words..(i + 1) * self.words];
            for (w, &word) in self.row(i).iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let j = w * 64 + word.trailing_zeros() as usize;
                    word &= word - 1;
                    for (d, s) in dst.iter_mut().zip(rhs.row(j)) {
                        *d |= s;
                    }
                }
            }
        }
        BitMatrix {
            n: self.n,
            words: self.words,
            bits: out,
        }
    }

    fn all_ones(&self) -> bool {
        let tail = self.n % 64;
        (0..self.n).all(|i| {
            let row = self.row(i);
            let (last, full) = row.split_last().expect("n > 0");
            full.iter().all(|&w| w == u64::MAX)
                && if tail == 0 {
                    *last == u64::MAX
                } else {
                    *last == (1u64 << tail) - 1
                }
        })
    }
}

fn regularity_of(graph: &SupportGraph) -> Regularity {
    let none = Regularity {
        regular: false,
        power: None,
    };
    if !graph.is_strongly_connected() {
        return none;
    }
    let base = BitMatrix::from_adj(&graph.adj);
    let mut power = base.clone();
    for n in 1..=wielandt_bound(graph.len()) {
        if power.all_ones() {
            return Regularity {
                regular: true,
                power: Some(n),
            };
        }
        power = power.mul(&base);
    }
    none
}

/// Primitivity of the support pattern, searched up to the Wielandt bound.
pub fn is_regular(tpm: &TransitionMatrix) -> Regularity {
    regularity_of(&SupportGraph::new(tpm))
}

/// Dense float matrix over the observed states.
pub fn restricted_dense(tpm: &TransitionMatrix, graph: &SupportGraph) -> Vec<Vec<f64>> {
    let pos: HashMap<usize, usize> = graph.rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    graph
        .rows
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; graph.len()];
            for c in 0..tpm.num_cols() {
                if let Some(&j) = pos.get(&tpm.successor_row(r, c)) {
                    row[j] += tpm.prob_f64(r, c);
                }
            }
            row
        })
        .collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            let mut out = vec![0.0; n];
            for (k, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    for (o, &y) in out.iter_mut().zip(&b[k]) {
                        *o += x * y;
                    }
                }
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitingMatrix {
    pub states: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    /// First `n` of `A, A^2, A^3, ...` meeting the tolerance.
    pub power: usize,
    /// Column means of the limiting matrix.
    pub stationary: Vec<f64>,
}

/// Largest column spread `max_i A[i][j] - min_i A[i][j]`.
fn row_spread(m: &[Vec<f64>]) -> f64 {
    let n = m.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| {
            let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[j]), hi.max(r[j]))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Multiplies `A^n = A^(n-1) A` until successive powers differ by less than
/// `tol` entrywise and all rows agree within `tol`. At `n = 1` only the row
/// agreement is checked.
pub fn limiting_matrix(tpm: &TransitionMatrix, tol: f64, max_power: usize) -> Result<LimitingMatrix, AnalysisError> {
    let graph = SupportGraph::new(tpm);
    if graph.is_empty() {
        return Err(AnalysisError::NoStates);
    }
    if !regularity_of(&graph).regular {
        return Err(AnalysisError::NotRegular);
    }
    let a = restricted_dense(tpm, &graph);
    let mut power = a.clone();
    let mut n = 1;
    if row_spread(&power) >= tol {
        loop {
            if n >= max_power {
                return Err(AnalysisError::NoConvergence(max_power));
            }
            let next = mat_mul(&power, &a);
            n += 1;
            let settled = max_abs_diff(&next, &power) < tol;
            power = next;
            if settled && row_spread(&power) < tol {
                break;
            }
        }
    }
    let m = graph.len() as f64;
    let stationary = (0..graph.len())
        .map(|j| power.iter().map(|r| r[j]).sum::<f64>() / m)
        .collect();
    Ok(LimitingMatrix {
        states: graph.labels,
        matrix: power,
        power: n,
        stationary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stationary {
    pub states: Vec<String>,
    pub w: Vec<f64>,
    /// When false, `w` is still the unique balance solution but powers of the
    /// chain do not converge to it.
    pub regular: bool,
}

/// Solves `w A = w`, `sum w = 1` by Gaussian elimination with partial
/// pivoting, one balance equation replaced by the normalization.
pub fn stationary_solve(tpm: &TransitionMatrix) -> Result<Stationary, AnalysisError> {
    let graph = SupportGraph::new(tpm);
    if graph.is_empty() {
        return Err(AnalysisError::NoStates);
    }
    let a = restricted_dense(tpm, &graph);
    let w = solve_balance(&a)?;
    Ok(Stationary {
        states: graph.labels.clone(),
        w,
        regular: regularity_of(&graph).regular,
    })
}

fn solve_balance(a: &[Vec<f64>]) -> Result<Vec<f64>, AnalysisError> {
    let n = a.len();
    // (A^T - I) w = 0, last equation -> sum w = 1
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| a[j][i] - f64::from(u8::from(i == j))).collect();
            row.push(0.0);
            row
        })
        .collect();
    m[n - 1] = vec![1.0; n + 1];

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .expect("non-empty range");
        if m[pivot][col].abs() < 1e-12 {
            return Err(AnalysisError::SingularSystem);
        }
        m.swap(col, pivot);
        let (top, rest) = m.split_at_mut(col + 1);
        let prow = &top[col];
        for row in rest {
            let f = row[col] / prow[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&prow[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut w = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * w[j]).sum();
        w[i] = (m[i][n] - s) / m[i][i];
    }
    Ok(w)
}

/// `max_j |(wA)_j - w_j|`.
pub fn balance_residual(tpm: &TransitionMatrix, w: &[f64]) -> f64 {
    let graph = SupportGraph::new(tpm);
    let a = restricted_dense(tpm, &graph);
    (0..a.len())
        .map(|j| {
            let wa: f64 = (0..a.len()).map(|i| w[i] * a[i][j]).sum();
            (wa - w[j]).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub order: usize,
    pub states: Vec<String>,
    pub excluded_states: Vec<String>,
    pub ergodic: bool,
    pub regular: bool,
    pub regularity_power: Option<usize>,
    pub stationary: Option<Vec<f64>>,
    pub convergence_power: Option<usize>,
    /// Zero entries over all `K^k x K` entries.
    pub sparsity: f64,
    pub tolerance: f64,
}

pub fn analyze(tpm: &TransitionMatrix, tol: f64, max_power: usize) -> Result<ChainReport, AnalysisError> {
    let graph = SupportGraph::new(tpm);
    let reg = regularity_of(&graph);
    let ergodic = graph.is_strongly_connected();
    let (stationary, convergence_power) = if reg.regular {
        let lim = limiting_matrix(tpm, tol, max_power)?;
        (Some(lim.stationary), Some(lim.power))
    } else if graph.is_empty() {
        (None, None)
    } else {
        (solve_balance(&restricted_dense(tpm, &graph)).ok(), None)
    };
    let excluded_states = (0..tpm.num_rows())
        .filter(|&r| !tpm.is_observed(r))
        .map(|r| tpm.row_label(r))
        .collect();
    Ok(ChainReport {
        order: tpm.order(),
        states: graph.labels,
        excluded_states,
        ergodic,
        regular: reg.regular,
        regularity_power: reg.power,
        stationary,
        convergence_power,
        sparsity: sparsity(tpm, true),
        tolerance: tol,
    })
}

impl ChainReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order: {}", self.order);
        let _ = writeln!(
            s,
            "states: {} ({} excluded as all-zero rows)",
            self.states.len(),
            self.excluded_states.len()
        );
        let _ = writeln!(s, "ergodic: {}", self.ergodic);
        match self.regularity_power {
            Some(p) => {
                let _ = writeln!(s, "regular: true (all entries of A^{p} positive)");
            }
            None => {
                let _ = writeln!(s, "regular: false");
            }
        }
        if let Some(n) = self.convergence_power {
            let _ = writeln!(s, "limiting matrix reached at A^{n} (tol {:e})", self.tolerance);
        }
        if let Some(w) = &self.stationary {
            let _ = writeln!(s, "stationary vector:");
            for (label, x) in self.states.iter().zip(w) {
                let _ = writeln!(s, "  {label:>8} {x:.6}");
            }
        }
        let _ = writeln!(s, "sparsity: {:.4}", self.sparsity);
        s
    }
}

/// Graphviz digraph with one labeled edge per positive transition.
pub fn export_dot(tpm: &TransitionMatrix) -> String {
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for (row, probs) in tpm.observed_rows() {
        nodes.insert(row);
        for (c, p) in probs.iter().enumerate() {
            if !p.is_zero() {
                let to = tpm.successor_row(row, c);
                nodes.insert(to);
                edges.push((row, to, *p));
            }
        }
    }
    let mut out = String::from("digraph markov {\n");
    for &n in &nodes {
        let _ = writeln!(out, "  \"{}\";", escape(&tpm.row_label(n)));
    }
    for (from, to, p) in edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(&tpm.row_label(from)),
            escape(&tpm.row_label(to)),
            ratio_str(p)
        );
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub order: usize,
    /// Over all `K^k x K` entries.
    pub sparsity: f64,
    pub observed_rows: usize,
    /// All-zero rows.
    pub dead_end_rows: usize,
}

/// Fits orders `1..=k_max` and reports sparsity and all-zero rows.
pub fn order_sweep(corpus: &[NoteSequence], k_max: usize, max_rows: usize) -> Result<Vec<SweepEntry>, ModelError> {
    if k_max == 0 {
        return Err(ModelError::ZeroOrder);
    }
    (1..=k_max)
        .map(|k| {
            let tpm = to_tpm(&count_transitions_limited(corpus, k, max_rows)?);
            let observed = tpm.observed_rows().count();
            Ok(SweepEntry {
                order: k,
                sparsity: sparsity(&tpm, true),
                observed_rows: observed,
                dead_end_rows: tpm.num_rows() - observed,
            })
        })
        .collect()
}

/// Whether sparsity never decreases with order.
pub fn sparsity_is_monotone(entries: &[SweepEntry]) -> bool {
    entries.windows(2).all(|w| w[1].sparsity >= w[0].sparsity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_sequence, Alphabet};
    use crate::model::{Prob, TransitionMatrix};
    use proptest::prelude::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn ab(n: usize) -> Arc<Alphabet> {
        Arc::new(Alphabet::new((0..n).map(|i| format!("s{i}"))).unwrap())
    }

    fn tpm_of(rows: &[&[(u64, u64)]]) -> TransitionMatrix {
        let rows: BTreeMap<usize, Vec<Prob>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().map(|&(n, d)| Prob::new(n, d)).collect()))
            .collect();
        TransitionMatrix::from_rows(ab(rows.len()), 1, rows).unwrap()
    }

    fn uniform2() -> TransitionMatrix {
        tpm_of(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]])
    }

    fn swap2() -> TransitionMatrix {
        tpm_of(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]])
    }

    #[test]
    fn identity_is_not_ergodic() {
        let id = tpm_of(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        assert!(!is_ergodic(&id));
        assert!(!is_regular(&id).regular);
    }

    #[test]
    fn funnel_state_is_still_ergodic() {
        // state 0 only reaches 1; 1 reaches everything
        let t = tpm_of(&[
            &[(0, 1), (1, 1), (0, 1)],
            &[(1, 3), (1, 3), (1, 3)],
            &[(1, 2), (1, 2), (0, 1)],
        ]);
        assert!(is_ergodic(&t));
        assert_eq!(
            is_regular(&t),
            Regularity {
                regular: true,
                power: Some(2)
            }
        );
    }

    #[test]
    fn periodic_and_positive() {
        assert_eq!(
            is_regular(&swap2()),
            Regularity {
                regular: false,
                power: None
            }
        );
        assert!(is_ergodic(&swap2()));
        assert_eq!(
            is_regular(&uniform2()),
            Regularity {
                regular: true,
                power: Some(1)
            }
        );
    }

    #[test]
    fn wielandt_extremal_pattern_needs_full_bound() {
        // n-cycle plus one chord 0 -> 2: exponent (n-1)^2 + 1
        let n = 5;
        let mut rows: Vec<Vec<(u64, u64)>> = (0..n)
            .map(|i| {
                let mut r = vec![(0, 1); n];
                r[(i + 1) % n] = (1, 1);
                r
            })
            .collect();
        rows[n - 1] = vec![(0, 1); n];
        rows[n - 1][0] = (1, 2);
        rows[n - 1][1] = (1, 2);
        let refs: Vec<&[(u64, u64)]> = rows.iter().map(Vec::as_slice).collect();
        let reg = is_regular(&tpm_of(&refs));
        assert_eq!(
            reg,
            Regularity {
                regular: true,
                power: Some(wielandt_bound(n))
            }
        );
    }

    #[test]
    fn limiting_uniform() {
        let lim = limiting_matrix(&uniform2(), 1e-6, DEFAULT_MAX_POWER).unwrap();
        assert_eq!(lim.power, 1);
        assert_eq!(lim.stationary, vec![0.5, 0.5]);
        assert_eq!(
            limiting_matrix(&swap2(), 1e-6, DEFAULT_MAX_POWER).unwrap_err(),
            AnalysisError::NotRegular
        );
    }

    #[test]
    fn limiting_no_convergence() {
        let t = tpm_of(&[&[(1, 2), (1, 2)], &[(1, 3), (2, 3)]]);
        assert_eq!(
            limiting_matrix(&t, 1e-12, 2).unwrap_err(),
            AnalysisError::NoConvergence(2)
        );
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_solve(&uniform2()).unwrap();
        assert!((s.w[0] - 0.5).abs() < 1e-15 && s.regular);
        let s = stationary_solve(&swap2()).unwrap();
        assert!((s.w[0] - 0.5).abs() < 1e-15 && (s.w[1] - 0.5).abs() < 1e-15);
        assert!(!s.regular);
        let id = tpm_of(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        assert_eq!(stationary_solve(&id).unwrap_err(), AnalysisError::SingularSystem);
    }

    #[test]
    fn two_state_closed_form() {
        // stationary of [[1-a, a], [b, 1-b]] is [b, a] / (a + b)
        let t = tpm_of(&[&[(7, 10), (3, 10)], &[(1, 5), (4, 5)]]);
        let s = stationary_solve(&t).unwrap();
        assert!((s.w[0] - 0.2 / 0.5).abs() < 1e-12);
        let lim = limiting_matrix(&t, 1e-9, DEFAULT_MAX_POWER).unwrap();
        assert!((lim.stationary[0] - 0.4).abs() < 1e-8);
        assert!(balance_residual(&t, &lim.stationary) < 1e-8);
    }

    #[test]
    fn stopping_power_matches_closed_form() {
        // A^n = Pi + l^n (I - Pi) with l = 1/4 and Pi rows [1/3, 2/3]:
        // row spread l^n, successive difference l^(n-1) (1 - l) 2/3
        let t = tpm_of(&[&[(1, 2), (1, 2)], &[(1, 4), (3, 4)]]);
        let l: f64 = 0.25;
        for tol in [1e-3, 1e-6, 1e-9] {
            let expected = (2..)
                .find(|&n| l.powi(n) < tol && l.powi(n - 1) * (1.0 - l) * 2.0 / 3.0 < tol)
                .unwrap() as usize;
            assert_eq!(limiting_matrix(&t, tol, DEFAULT_MAX_POWER).unwrap().power, expected, "tol {tol}");
        }
        assert_eq!(limiting_matrix(&t, 1e-6, DEFAULT_MAX_POWER).unwrap().power, 11);
        assert_eq!(
            limiting_matrix(&t, 1e-6, 10).unwrap_err(),
            AnalysisError::NoConvergence(10)
        );
    }

    #[test]
    fn dot_single_self_loop() {
        let a = Arc::new(Alphabet::new(["a", "b"]).unwrap());
        let t = TransitionMatrix::from_rows(a, 1, BTreeMap::from([(0, vec![Prob::from_integer(1), Prob::zero()])]))
            .unwrap();
        assert_eq!(
            export_dot(&t),
            "digraph markov {\n  \"a\";\n  \"a\" -> \"a\" [label=\"1\"];\n}\n"
        );
    }

    #[test]
    fn second_order_restricts_to_observed() {
        let a = Arc::new(Alphabet::bageshree());
        let s = parse_sequence("SRgSRgSRgS", &a).unwrap();
        let t = to_tpm(&crate::model::count_transitions(&[s], 2).unwrap());
        let r = analyze(&t, 1e-6, 1000).unwrap();
        assert_eq!(r.states, ["SR", "Rg", "gS"]);
        assert_eq!(r.excluded_states.len(), 46);
        assert!(r.ergodic);
        assert!(!r.regular);
        assert!(r.stationary.is_some());
    }

    #[test]
    fn sweep_counts() {
        let a = Arc::new(Alphabet::bageshree());
        // every order-1 transition over {S, R}
        let s = parse_sequence("SSRRS", &a).unwrap();
        let sw = order_sweep(&[s], 2, 1000).unwrap();
        assert_eq!(sw[0].order, 1);
        assert_eq!(sw[0].observed_rows, 2);
        assert_eq!(sw[0].dead_end_rows, 5);
        assert!(sparsity_is_monotone(&sw));
        let two = Arc::new(Alphabet::new(["S", "R"]).unwrap());
        let s = parse_sequence("SSRRS", &two).unwrap();
        assert_eq!(order_sweep(&[s], 1, 1000).unwrap()[0].sparsity, 0.0);
        assert!(matches!(
            order_sweep(&[parse_sequence("SRS", &two).unwrap()], 30, 1000),
            Err(ModelError::OrderTooLarge { .. })
        ));
    }

    fn arb_support(n: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), n).prop_map(move |mut m| {
            for (i, row) in m.iter_mut().enumerate() {
                if !row.iter().any(|&b| b) {
                    row[i] = true;
                }
            }
            m
        })
    }

    fn weighted(support: &[Vec<bool>], weights: &[u64]) -> TransitionMatrix {
        let n = support.len();
        let rows = support
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let w: Vec<u64> = r
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| if b { weights[(i * n + j) % weights.len()] } else { 0 })
                    .collect();
                let total: u64 = w.iter().sum();
                (i, w.iter().map(|&x| Prob::new(x, total)).collect())
            })
            .collect();
        TransitionMatrix::from_rows(ab(n), 1, rows).unwrap()
    }

    proptest! {
        #[test]
        fn regular_implies_ergodic(s in arb_support(5), w in prop::collection::vec(1u64..9, 25)) {
            let t = weighted(&s, &w);
            if is_regular(&t).regular {
                prop_assert!(is_ergodic(&t));
            }
        }

        #[test]
        fn regularity_depends_only_on_support(
            s in arb_support(5),
            w1 in prop::collection::vec(1u64..9, 25),
            w2 in prop::collection::vec(1u64..9, 25),
        ) {
            prop_assert_eq!(is_regular(&weighted(&s, &w1)), is_regular(&weighted(&s, &w2)));
            prop_assert_eq!(is_ergodic(&weighted(&s, &w1)), is_ergodic(&weighted(&s, &w2)));
        }

        #[test]
        fn limiting_rows_agree_and_match_solver(s in arb_support(4), w in prop::collection::vec(1u64..9, 16)) {
            let t = weighted(&s, &w);
            prop_assume!(is_regular(&t).regular);
            let tol = 1e-9;
            let lim = limiting_matrix(&t, tol, DEFAULT_MAX_POWER).unwrap();
            let sum: f64 = lim.stationary.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            for row in &lim.matrix {
                for (x, y) in row.iter().zip(&lim.stationary) {
                    prop_assert!((x - y).abs() < tol);
                }
            }
            let st = stationary_solve(&t).unwrap();
            for (x, y) in st.w.iter().zip(&lim.stationary) {
                prop_assert!((x - y).abs() < 10.0 * tol);
                prop_assert!(*x > 0.0);
            }
        }
    }
}
