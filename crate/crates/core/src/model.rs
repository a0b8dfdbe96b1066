//! Order-k transition counts, exact transition probability matrices and
//! cumulative class matrices.
//!
//! Matrices keep the full logical shape `K^k x K` but only store rows that
//! were observed with at least one successor; every other row is all zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::corpus::{format_sequence, parse_sequence, Alphabet, Note, NoteSequence};

/// Exact probability.
pub type Prob = Ratio<u64>;

/// Default cap on `K^k`.
pub const DEFAULT_MAX_ROWS: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model order must be at least 1")]
    ZeroOrder,
    #[error("order {order} over {symbols} symbols needs more than {limit} rows")]
    OrderTooLarge { order: usize, symbols: usize, limit: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus sequences use different alphabets")]
    AlphabetMismatch,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn schema(msg: impl Into<String>) -> ModelError {
    ModelError::SchemaMismatch(msg.into())
}

/// Number of rows `K^k`, or `None` past `limit`.
pub fn row_count(symbols: usize, order: usize, limit: usize) -> Option<usize> {
    let mut rows = 1usize;
    for _ in 0..order {
        rows = rows.checked_mul(symbols)?;
        if rows > limit {
            return None;
        }
    }
    Some(rows)
}

fn checked_rows(alphabet: &Alphabet, order: usize, limit: usize) -> Result<usize, ModelError> {
    if order == 0 {
        return Err(ModelError::ZeroOrder);
    }
    row_count(alphabet.len(), order, limit).ok_or(ModelError::OrderTooLarge {
        order,
        symbols: alphabet.len(),
        limit,
    })
}

/// The conditioning context of an order-k row: the last k notes, oldest
/// first. Row index is `sum notes[i] * K^(k-1-i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateTuple {
    notes: Vec<Note>,
}

impl StateTuple {
    pub fn new(notes: Vec<Note>) -> Self {
        Self { notes }
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn order(&self) -> usize {
        self.notes.len()
    }

    pub fn row_index(&self, symbols: usize) -> usize {
        self.notes.iter().fold(0, |acc, n| acc * symbols + n.index())
    }

    pub fn from_row_index(mut row: usize, order: usize, symbols: usize) -> Self {
        let mut notes = vec![Note(0); order];
        for slot in notes.iter_mut().rev() {
            *slot = Note(row % symbols);
            row /= symbols;
        }
        Self { notes }
    }

    pub fn label(&self, alphabet: &Arc<Alphabet>) -> String {
        let seq =
            NoteSequence::new(Arc::clone(alphabet), self.notes.clone()).expect("tuple notes belong to the alphabet");
        format_sequence(&seq)
    }
}

/// Row label for `row` of an order-`order` matrix.
pub fn row_label(alphabet: &Arc<Alphabet>, order: usize, row: usize) -> String {
    StateTuple::from_row_index(row, order, alphabet.len()).label(alphabet)
}

/// Successor counts per k-tuple. A tuple occurrence with no successor
/// (the final k notes of a sequence) is not counted in its row total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    alphabet: Arc<Alphabet>,
    order: usize,
    num_rows: usize,
    rows: BTreeMap<usize, Vec<u64>>,
    skipped_sequences: usize,
}

impl CountMatrix {
    pub fn empty(alphabet: Arc<Alphabet>, order: usize, max_rows: usize) -> Result<Self, ModelError> {
        let num_rows = checked_rows(&alphabet, order, max_rows)?;
        Ok(Self {
            alphabet,
            order,
            num_rows,
            rows: BTreeMap::new(),
            skipped_sequences: 0,
        })
    }

    /// Builds from explicit rows. All-zero rows are dropped.
    pub fn from_rows(
        alphabet: Arc<Alphabet>,
        order: usize,
        rows: BTreeMap<usize, Vec<u64>>,
    ) -> Result<Self, ModelError> {
        let mut m = Self::empty(alphabet, order, DEFAULT_MAX_ROWS)?;
        for (row, counts) in rows {
            if row >= m.num_rows || counts.len() != m.alphabet.len() {
                return Err(schema(format!("row {row} has the wrong shape")));
            }
            if counts.iter().any(|&c| c > 0) {
                m.rows.insert(row, counts);
            }
        }
        Ok(m)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.alphabet.len()
    }

    /// Sequences shorter than `order + 1` that contributed nothing.
    pub fn skipped_sequences(&self) -> usize {
        self.skipped_sequences
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.rows.get(&row).map_or(0, |r| r[col])
    }

    pub fn row(&self, row: usize) -> Option<&[u64]> {
        self.rows.get(&row).map(Vec::as_slice)
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.rows.get(&row).map_or(0, |r| r.iter().sum())
    }

    /// Rows with a positive total, in row order.
    pub fn observed_rows(&self) -> impl Iterator<Item = (usize, &[u64])> + '_ {
        self.rows.iter().map(|(&r, v)| (r, v.as_slice()))
    }

    pub fn total_transitions(&self) -> u64 {
        self.rows.values().flatten().sum()
    }

    pub fn add_sequence(&mut self, seq: &NoteSequence) -> Result<(), ModelError> {
        if **seq.alphabet() != *self.alphabet {
            return Err(ModelError::AlphabetMismatch);
        }
        let notes = seq.notes();
        let k = self.order;
        if notes.len() < k + 1 {
            self.skipped_sequences += 1;
            return Ok(());
        }
        let symbols = self.alphabet.len();
        let mut row = StateTuple::new(notes[..k].to_vec()).row_index(symbols);
        for &next in &notes[k..] {
            self.rows.entry(row).or_insert_with(|| vec![0; symbols])[next.index()] += 1;
            row = (row * symbols + next.index()) % self.num_rows;
        }
        Ok(())
    }

    /// Adds another matrix of the same shape. Merging is associative and
    /// commutative, so per-sequence counts can be folded in any order.
    pub fn merge(&mut self, other: &CountMatrix) -> Result<(), ModelError> {
        if other.alphabet != self.alphabet || other.order != self.order {
            return Err(ModelError::AlphabetMismatch);
        }
        for (&row, counts) in &other.rows {
            let dst = self.rows.entry(row).or_insert_with(|| vec![0; counts.len()]);
            for (d, c) in dst.iter_mut().zip(counts) {
                *d += c;
            }
        }
        self.skipped_sequences += other.skipped_sequences;
        Ok(())
    }
}

/// Counts order-`order` transitions over every sequence of the corpus.
/// Transitions never span two sequences.
pub fn count_transitions(corpus: &[NoteSequence], order: usize) -> Result<CountMatrix, ModelError> {
    count_transitions_limited(corpus, order, DEFAULT_MAX_ROWS)
}

pub fn count_transitions_limited(
    corpus: &[NoteSequence],
    order: usize,
    max_rows: usize,
) -> Result<CountMatrix, ModelError> {
    let first = corpus.first().ok_or(ModelError::EmptyCorpus)?;
    let mut m = CountMatrix::empty(Arc::clone(first.alphabet()), order, max_rows)?;
    for seq in corpus {
        m.add_sequence(seq)?;
    }
    Ok(m)
}

/// Row-stochastic matrix with exact entries. Unobserved rows are all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    alphabet: Arc<Alphabet>,
    order: usize,
    num_rows: usize,
    rows: BTreeMap<usize, Vec<Prob>>,
}

impl TransitionMatrix {
    /// Builds from explicit probability rows; each row must sum to exactly 1
    /// or be entirely zero.
    pub fn from_rows(
        alphabet: Arc<Alphabet>,
        order: usize,
        rows: BTreeMap<usize, Vec<Prob>>,
    ) -> Result<Self, ModelError> {
        let num_rows = checked_rows(&alphabet, order, DEFAULT_MAX_ROWS)?;
        let mut kept = BTreeMap::new();
        for (row, probs) in rows {
            if row >= num_rows || probs.len() != alphabet.len() {
                return Err(schema(format!("row {row} has the wrong shape")));
            }
            if probs.iter().any(|p| *p > Prob::one()) {
                return Err(schema(format!(
                    "row {} has an entry above 1",
                    row_label(&alphabet, order, row)
                )));
            }
            let sum: Prob = probs.iter().copied().sum();
            if sum.is_zero() {
                continue;
            }
            if !sum.is_one() {
                return Err(schema(format!(
                    "row {} sums to {}",
                    row_label(&alphabet, order, row),
                    sum
                )));
            }
            kept.insert(row, probs);
        }
        Ok(Self {
            alphabet,
            order,
            num_rows,
            rows: kept,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn prob(&self, row: usize, col: usize) -> Prob {
        self.rows.get(&row).map_or(Prob::zero(), |r| r[col])
    }

    pub fn prob_f64(&self, row: usize, col: usize) -> f64 {
        to_f64(self.prob(row, col))
    }

    pub fn row(&self, row: usize) -> Option<&[Prob]> {
        self.rows.get(&row).map(Vec::as_slice)
    }

    /// Rows that sum to 1, in row order.
    pub fn observed_rows(&self) -> impl Iterator<Item = (usize, &[Prob])> + '_ {
        self.rows.iter().map(|(&r, v)| (r, v.as_slice()))
    }

    pub fn is_observed(&self, row: usize) -> bool {
        self.rows.contains_key(&row)
    }

    pub fn row_label(&self, row: usize) -> String {
        row_label(&self.alphabet, self.order, row)
    }

    /// Row reached from `row` after emitting `col`.
    pub fn successor_row(&self, row: usize, col: usize) -> usize {
        (row * self.alphabet.len() + col) % self.num_rows
    }
}

pub fn to_f64(p: Prob) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Normalizes each row by its total.
pub fn to_tpm(counts: &CountMatrix) -> TransitionMatrix {
    let rows = counts
        .observed_rows()
        .map(|(row, c)| {
            let total: u64 = c.iter().sum();
            (row, c.iter().map(|&n| Prob::new(n, total)).collect())
        })
        .collect();
    TransitionMatrix {
        alphabet: Arc::clone(&counts.alphabet),
        order: counts.order,
        num_rows: counts.num_rows,
        rows,
    }
}

/// Half-open cumulative interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: Prob,
    pub hi: Prob,
}

impl Interval {
    pub fn new(lo: Prob, hi: Prob) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> Prob {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// Per-row partition of `[0, 1)` into successor intervals, alphabet order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMatrix {
    alphabet: Arc<Alphabet>,
    order: usize,
    num_rows: usize,
    rows: BTreeMap<usize, Vec<Interval>>,
}

impl ClassMatrix {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    /// Intervals of an observed row; `None` for an all-zero row.
    pub fn row(&self, row: usize) -> Option<&[Interval]> {
        self.rows.get(&row).map(Vec::as_slice)
    }

    /// Intervals for any row, `[0, 0)` everywhere for an all-zero row.
    pub fn row_or_zero(&self, row: usize) -> Vec<Interval> {
        self.rows
            .get(&row)
            .cloned()
            .unwrap_or_else(|| vec![Interval::new(Prob::zero(), Prob::zero()); self.alphabet.len()])
    }
}

/// Running sums of a probability row.
pub fn class_row(probs: &[Prob]) -> Vec<Interval> {
    let mut lo = Prob::zero();
    probs
        .iter()
        .map(|&p| {
            let iv = Interval::new(lo, lo + p);
            lo = iv.hi;
            iv
        })
        .collect()
}

pub fn to_class_matrix(tpm: &TransitionMatrix) -> ClassMatrix {
    ClassMatrix {
        alphabet: Arc::clone(&tpm.alphabet),
        order: tpm.order,
        num_rows: tpm.num_rows,
        rows: tpm.observed_rows().map(|(row, p)| (row, class_row(p))).collect(),
    }
}

/// Fraction of zero entries. Over all `K^k x K` entries when
/// `include_unobserved_rows`, else over observed rows only (0 when there
/// are none).
pub fn sparsity(tpm: &TransitionMatrix, include_unobserved_rows: bool) -> f64 {
    let cols = tpm.num_cols();
    let nonzero: usize = tpm
        .observed_rows()
        .map(|(_, r)| r.iter().filter(|p| !p.is_zero()).count())
        .sum();
    let rows = if include_unobserved_rows {
        tpm.num_rows()
    } else {
        tpm.rows.len()
    };
    let total = rows * cols;
    if total == 0 {
        return 0.0;
    }
    (total - nonzero) as f64 / total as f64
}

/// Either form a model file can hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Counts(CountMatrix),
    Transitions(TransitionMatrix),
}

impl Model {
    pub fn order(&self) -> usize {
        match self {
            Model::Counts(c) => c.order(),
            Model::Transitions(t) => t.order(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        match self {
            Model::Counts(c) => c.alphabet(),
            Model::Transitions(t) => t.alphabet(),
        }
    }

    pub fn tpm(&self) -> TransitionMatrix {
        match self {
            Model::Counts(c) => to_tpm(c),
            Model::Transitions(t) => t.clone(),
        }
    }

    pub fn counts(&self) -> Option<&CountMatrix> {
        match self {
            Model::Counts(c) => Some(c),
            Model::Transitions(_) => None,
        }
    }
}

/// Formats a rational as `0`, `1` or `num/den`.
pub fn ratio_str(p: Prob) -> String {
    if p.is_integer() {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

pub fn parse_ratio(s: &str) -> Result<Prob, ModelError> {
    let bad = || schema(format!("invalid probability {s:?}"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: u64 = n.parse().map_err(|_| bad())?;
    let d: u64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Prob::new(n, d))
}

/// Serializes a model as
/// `{alphabet, order, kind, rows: [{tuple, total, counts: {symbol: value}}]}`.
/// Count values are integers; probabilities are `"num/den"` strings.
pub fn model_to_json(model: &Model) -> String {
    let alphabet = model.alphabet();
    let order = model.order();
    let mut rows = Vec::new();
    let mut push_row = |row: usize, total: Option<u64>, cells: Vec<(usize, Value)>| {
        let mut rec = Map::new();
        rec.insert("tuple".into(), row_label(alphabet, order, row).into());
        if let Some(t) = total {
            rec.insert("total".into(), t.into());
        }
        let counts: Map<String, Value> = cells
            .into_iter()
            .map(|(c, v)| (alphabet.symbols()[c].clone(), v))
            .collect();
        rec.insert("counts".into(), Value::Object(counts));
        rows.push(Value::Object(rec));
    };
    let kind = match model {
        Model::Counts(m) => {
            for (row, counts) in m.observed_rows() {
                let cells = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i, Value::from(c)))
                    .collect();
                push_row(row, Some(counts.iter().sum()), cells);
            }
            "counts"
        }
        Model::Transitions(t) => {
            for (row, probs) in t.observed_rows() {
                let cells = probs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(i, &p)| (i, Value::from(ratio_str(p))))
                    .collect();
                push_row(row, None, cells);
            }
            "tpm"
        }
    };
    let mut root = Map::new();
    root.insert("alphabet".into(), alphabet.symbols().to_vec().into());
    root.insert("order".into(), order.into());
    root.insert("kind".into(), kind.into());
    root.insert("rows".into(), Value::Array(rows));
    let mut out = serde_json::to_string_pretty(&Value::Object(root)).expect("json values serialize");
    out.push('\n');
    out
}

pub fn model_from_json(text: &str) -> Result<Model, ModelError> {
    let root: Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("top level must be an object"))?;

    let symbols: Vec<String> = obj
        .get("alphabet")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing alphabet array"))?
        .iter()
        .map(|v| v.as_str().map(str::to_owned))
        .collect::<Option<_>>()
        .ok_or_else(|| schema("alphabet entries must be strings"))?;
    let alphabet = Arc::new(Alphabet::new(symbols).map_err(|e| schema(e.to_string()))?);
    let order = obj
        .get("order")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("missing integer order"))? as usize;
    let num_rows = checked_rows(&alphabet, order, DEFAULT_MAX_ROWS)?;
    let rows = obj
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing rows array"))?;

    let declared_kind = match obj.get("kind") {
        None => None,
        Some(Value::String(k)) if k == "counts" => Some(true),
        Some(Value::String(k)) if k == "tpm" => Some(false),
        Some(other) => return Err(schema(format!("unknown kind {other}"))),
    };
    // Without a declared kind, integer-only cells mean counts.
    let is_counts = declared_kind.unwrap_or_else(|| {
        rows.iter().all(|r| {
            r.get("counts")
                .and_then(Value::as_object)
                .is_some_and(|m| m.values().all(Value::is_u64))
        })
    });

    let mut count_rows = BTreeMap::new();
    let mut prob_rows = BTreeMap::new();
    for rec in rows {
        let label = rec
            .get("tuple")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("row without tuple"))?;
        let tuple = parse_sequence(label, &alphabet).map_err(|e| schema(format!("tuple {label:?}: {e}")))?;
        if tuple.len() != order {
            return Err(schema(format!("tuple {label:?} does not have {order} notes")));
        }
        let row = StateTuple::new(tuple.notes().to_vec()).row_index(alphabet.len());
        if count_rows.contains_key(&row) || prob_rows.contains_key(&row) {
            return Err(schema(format!("duplicate tuple {label:?}")));
        }
        let cells = rec
            .get("counts")
            .and_then(Value::as_object)
            .ok_or_else(|| schema(format!("tuple {label:?} has no counts object")))?;
        let total = rec.get("total").map(|t| {
            t.as_u64()
                .ok_or_else(|| schema(format!("tuple {label:?}: total must be an integer")))
        });
        let col_of = |sym: &str| {
            alphabet
                .index_of(sym)
                .map(Note::index)
                .ok_or_else(|| schema(format!("tuple {label:?}: unknown symbol {sym:?}")))
        };
        if is_counts {
            let mut counts = vec![0u64; alphabet.len()];
            for (sym, v) in cells {
                counts[col_of(sym)?] = v
                    .as_u64()
                    .ok_or_else(|| schema(format!("tuple {label:?}: count for {sym:?} is not an integer")))?;
            }
            let sum: u64 = counts.iter().sum();
            if let Some(total) = total {
                let total = total?;
                if total != sum {
                    return Err(schema(format!(
                        "tuple {label:?}: counts sum to {sum} but total is {total}"
                    )));
                }
            }
            count_rows.insert(row, counts);
        } else {
            let mut probs = vec![Prob::zero(); alphabet.len()];
            for (sym, v) in cells {
                let p = match v {
                    Value::String(s) => parse_ratio(s)?,
                    Value::Number(n) if n.is_u64() => Prob::from_integer(n.as_u64().unwrap()),
                    _ => return Err(schema(format!("tuple {label:?}: bad probability {v}"))),
                };
                probs[col_of(sym)?] = p;
            }
            prob_rows.insert(row, probs);
        }
    }
    debug_assert!(num_rows > 0);
    if is_counts {
        CountMatrix::from_rows(alphabet, order, count_rows).map(Model::Counts)
    } else {
        TransitionMatrix::from_rows(alphabet, order, prob_rows).map(Model::Transitions)
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })?;
    model_from_json(&text)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })
}

fn csv_header(alphabet: &Alphabet) -> String {
    let mut s = String::from("state");
    for sym in alphabet.symbols() {
        s.push(',');
        s.push_str(sym);
    }
    s.push('\n');
    s
}

/// One line per row (all `K^k` of them), columns in alphabet order.
pub fn tpm_to_csv(tpm: &TransitionMatrix) -> String {
    let mut out = csv_header(tpm.alphabet());
    for row in 0..tpm.num_rows() {
        out.push_str(&tpm.row_label(row));
        for col in 0..tpm.num_cols() {
            let _ = write!(out, ",{}", ratio_str(tpm.prob(row, col)));
        }
        out.push('\n');
    }
    out
}

/// Cells are `[lo-hi)`; unobserved rows print `0` cells.
pub fn class_matrix_to_csv(cm: &ClassMatrix) -> String {
    let mut out = csv_header(cm.alphabet());
    for row in 0..cm.num_rows() {
        out.push_str(&row_label(cm.alphabet(), cm.order(), row));
        match cm.row(row) {
            Some(ivs) => {
                for iv in ivs {
                    let _ = write!(out, ",[{}-{})", ratio_str(iv.lo), ratio_str(iv.hi));
                }
            }
            None => {
                for _ in 0..cm.alphabet().len() {
                    out.push_str(",0");
                }
            }
        }
        out.push('\n');
    }
    out
}
