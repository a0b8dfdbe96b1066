//! Note generation by inverse-transform sampling over class matrices.
//!
//! The first note is the start note (the tonic by default). Every later note
//! draws one uniform `u` and picks the successor whose class interval
//! `[lo, hi)` contains it. Order-1 generation conditions on the previous note;
//! order-2 generation bootstraps its second note from the order-1 model and
//! then conditions on the last two notes. Higher orders extend the same
//! ladder.
//!
//! Uniform consumption: one uniform per emitted note after the first, whatever
//! the dead-end policy does, plus one more when the start note is drawn from
//! the unconditional note frequencies.

use std::sync::Arc;

use num_traits::Zero;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Alphabet, Note, NoteSequence};
use crate::model::{
    class_row, count_transitions, to_tpm, ClassMatrix, CountMatrix, Interval, ModelError, Prob, StateTuple,
    TransitionMatrix,
};

/// Identifies the uniform stream produced by [`SeededUniform`].
pub const RNG_ID: &str = "chacha20 (rand_chacha 0.9), top 53 bits of next_u64";

const UNIT_BITS: u32 = 53;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("state {state:?} has no successors (order {order}, note {position})")]
    DeadEndRow {
        state: String,
        order: usize,
        position: usize,
    },
    #[error("length must be at least 1")]
    ZeroLength,
    #[error("expected an order-{expected} model, got order {found}")]
    WrongOrder { expected: usize, found: usize },
    #[error("models use different alphabets")]
    AlphabetMismatch,
    #[error("order {0} generation is disabled; enable high-order generation to use it")]
    HighOrderDisabled(usize),
    #[error("start note index {0} is not in the alphabet")]
    InvalidStart(usize),
}

/// A uniform value `m / 2^53` in `[0, 1)`, kept as its integer numerator so
/// interval tests are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit(u64);

impl Unit {
    pub const ZERO: Unit = Unit(0);

    pub fn from_bits(m: u64) -> Option<Self> {
        (m < 1u64 << UNIT_BITS).then_some(Self(m))
    }

    /// Truncates `u` to the 53-bit grid. `None` outside `[0, 1)`.
    pub fn from_f64(u: f64) -> Option<Self> {
        if !(0.0..1.0).contains(&u) {
            return None;
        }
        Self::from_bits((u * (1u64 << UNIT_BITS) as f64) as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / (1u64 << UNIT_BITS) as f64
    }

    /// `self < p`, exactly.
    fn lt(self, p: Prob) -> bool {
        (self.0 as u128) * (*p.denom() as u128) < (*p.numer() as u128) << UNIT_BITS
    }
}

pub trait UniformSource {
    fn next_unit(&mut self) -> Unit;
    fn consumed(&self) -> u64;
}

/// Deterministic uniform stream from a 64-bit seed.
#[derive(Debug, Clone)]
pub struct SeededUniform {
    rng: ChaCha20Rng,
    consumed: u64,
}

impl SeededUniform {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            consumed: 0,
        }
    }
}

impl UniformSource for SeededUniform {
    fn next_unit(&mut self) -> Unit {
        self.consumed += 1;
        Unit(self.rng.next_u64() >> (64 - UNIT_BITS))
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Replays a fixed list of values, cycling when it runs out.
#[derive(Debug, Clone)]
pub struct ScriptedUniform {
    values: Vec<Unit>,
    consumed: u64,
}

impl ScriptedUniform {
    pub fn new(values: Vec<Unit>) -> Self {
        assert!(!values.is_empty(), "scripted source needs at least one value");
        Self { values, consumed: 0 }
    }

    pub fn from_f64(values: &[f64]) -> Self {
        Self::new(
            values
                .iter()
                .map(|&u| Unit::from_f64(u).expect("value in [0, 1)"))
                .collect(),
        )
    }
}

impl UniformSource for ScriptedUniform {
    fn next_unit(&mut self) -> Unit {
        let u = self.values[(self.consumed % self.values.len() as u64) as usize];
        self.consumed += 1;
        u
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Picks the note whose interval contains `u`. Zero-width intervals are
/// never chosen.
pub fn sample_class(row: &[Interval], u: Unit) -> Option<Note> {
    row.iter().position(|iv| !u.lt(iv.lo) && u.lt(iv.hi)).map(Note)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadEndPolicy {
    Error,
    /// Re-sample with the same uniform from the next lower order.
    #[default]
    BackoffToLowerOrder,
    /// Emit the start note and restart the history there.
    RestartAtStart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartNote {
    Fixed(Note),
    /// Draw the first note from these intervals (see [`unconditional_start`]).
    Unconditional(Vec<Interval>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub order: usize,
    pub length: usize,
    pub start: StartNote,
    pub seed: u64,
    pub dead_end_policy: DeadEndPolicy,
    pub allow_high_order: bool,
}

impl GeneratorConfig {
    /// Starts on the first alphabet symbol (the tonic `S` for Bageshree).
    pub fn new(order: usize, length: usize, seed: u64) -> Self {
        Self {
            order,
            length,
            start: StartNote::Fixed(Note(0)),
            seed,
            dead_end_policy: DeadEndPolicy::default(),
            allow_high_order: false,
        }
    }
}

/// Note frequencies from order-1 counts, as class intervals.
pub fn unconditional_start(counts1: &CountMatrix) -> Vec<Interval> {
    let k = counts1.num_cols();
    let totals: Vec<u64> = (0..k).map(|r| counts1.row_total(r)).collect();
    let sum: u64 = totals.iter().sum();
    if sum == 0 {
        return vec![Interval::new(Prob::zero(), Prob::zero()); k];
    }
    let probs: Vec<Prob> = totals.iter().map(|&t| Prob::new(t, sum)).collect();
    class_row(&probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PolicyAction {
    Backoff { to_order: usize },
    Restart,
}

/// A dead end met during generation and how it was repaired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyEvent {
    /// Index of the note that was being generated.
    pub position: usize,
    pub state: String,
    pub order: usize,
    #[serde(flatten)]
    pub action: PolicyAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub sequence: NoteSequence,
    pub events: Vec<PolicyEvent>,
    pub uniforms_consumed: u64,
}

/// Order-1 generation.
pub fn generate_snca(
    model1: &ClassMatrix,
    cfg: &GeneratorConfig,
    src: &mut dyn UniformSource,
) -> Result<Generation, GenerateError> {
    expect_order(cfg.order, 1)?;
    generate_ladder(&[model1], cfg, src)
}

/// Order-2 generation with the second note taken from the order-1 model.
pub fn generate_snca2(
    model1: &ClassMatrix,
    model2: &ClassMatrix,
    cfg: &GeneratorConfig,
    src: &mut dyn UniformSource,
) -> Result<Generation, GenerateError> {
    expect_order(cfg.order, 2)?;
    generate_ladder(&[model1, model2], cfg, src)
}

/// Generation from models of orders `1..=k`, `ladder[j]` having order `j+1`.
/// Note `t` (0-based) uses order `min(t, k)`.
pub fn generate_ladder(
    ladder: &[&ClassMatrix],
    cfg: &GeneratorConfig,
    src: &mut dyn UniformSource,
) -> Result<Generation, GenerateError> {
    let k = ladder.len();
    expect_order(cfg.order, k)?;
    if k > 2 && !cfg.allow_high_order {
        return Err(GenerateError::HighOrderDisabled(k));
    }
    if cfg.length == 0 {
        return Err(GenerateError::ZeroLength);
    }
    let alphabet: &Arc<Alphabet> = ladder[0].alphabet();
    for (j, m) in ladder.iter().enumerate() {
        expect_order(m.order(), j + 1)?;
        if m.alphabet() != alphabet {
            return Err(GenerateError::AlphabetMismatch);
        }
    }
    let symbols = alphabet.len();
    let start_src = src.consumed();

    let draw_start = |src: &mut dyn UniformSource, pos: usize| -> Result<Note, GenerateError> {
        match &cfg.start {
            StartNote::Fixed(n) if n.index() < symbols => Ok(*n),
            StartNote::Fixed(n) => Err(GenerateError::InvalidStart(n.index())),
            StartNote::Unconditional(row) => sample_class(row, src.next_unit()).ok_or(GenerateError::DeadEndRow {
                state: String::new(),
                order: 0,
                position: pos,
            }),
        }
    };

    let mut notes = Vec::with_capacity(cfg.length);
    let mut events = Vec::new();
    notes.push(draw_start(src, 0)?);
    let mut history_start = 0usize;

    while notes.len() < cfg.length {
        let position = notes.len();
        let order = (position - history_start).min(k);
        let u = src.next_unit();

        let mut chosen = None;
        for j in (1..=order).rev() {
            let ctx = &notes[position - j..];
            let row = StateTuple::new(ctx.to_vec()).row_index(symbols);
            if let Some(note) = ladder[j - 1].row(row).and_then(|r| sample_class(r, u)) {
                chosen = Some(note);
                if j < order {
                    events.push(PolicyEvent {
                        position,
                        state: StateTuple::new(notes[position - order..].to_vec()).label(alphabet),
                        order,
                        action: PolicyAction::Backoff { to_order: j },
                    });
                }
                break;
            }
            if cfg.dead_end_policy != DeadEndPolicy::BackoffToLowerOrder {
                break;
            }
        }

        match chosen {
            Some(note) => notes.push(note),
            None if cfg.dead_end_policy == DeadEndPolicy::RestartAtStart => {
                events.push(PolicyEvent {
                    position,
                    state: StateTuple::new(notes[position - order..].to_vec()).label(alphabet),
                    order,
                    action: PolicyAction::Restart,
                });
                let note = match &cfg.start {
                    StartNote::Unconditional(row) => sample_class(row, u).ok_or(GenerateError::DeadEndRow {
                        state: String::new(),
                        order: 0,
                        position,
                    })?,
                    StartNote::Fixed(n) => *n,
                };
                notes.push(note);
                history_start = position;
            }
            None => {
                return Err(GenerateError::DeadEndRow {
                    state: StateTuple::new(notes[position - order..].to_vec()).label(alphabet),
                    order,
                    position,
                })
            }
        }
    }

    Ok(Generation {
        sequence: NoteSequence::new(Arc::clone(alphabet), notes).expect("sampled notes are valid"),
        events,
        uniforms_consumed: src.consumed() - start_src,
    })
}

fn expect_order(found: usize, expected: usize) -> Result<(), GenerateError> {
    if found == expected {
        Ok(())
    } else {
        Err(GenerateError::WrongOrder { expected, found })
    }
}

/// Re-estimates an order-k tpm from a single sequence.
pub fn empirical_tpm(seq: &NoteSequence, k: usize) -> Result<TransitionMatrix, ModelError> {
    count_transitions(std::slice::from_ref(seq), k).map(|c| to_tpm(&c))
}

/// A transition in a sequence that the model gives zero probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportViolation {
    /// Index of the offending (successor) note.
    pub position: usize,
    pub state: String,
    pub next: String,
}

/// Every order-k transition of `seq` with zero probability in `tpm`.
pub fn support_violations(seq: &NoteSequence, tpm: &TransitionMatrix) -> Vec<SupportViolation> {
    let k = tpm.order();
    let symbols = tpm.num_cols();
    let alphabet = tpm.alphabet();
    seq.notes()
        .windows(k + 1)
        .enumerate()
        .filter_map(|(i, w)| {
            let tuple = StateTuple::new(w[..k].to_vec());
            let next = w[k];
            tpm.prob(tuple.row_index(symbols), next.index())
                .is_zero()
                .then(|| SupportViolation {
                    position: i + k,
                    state: tuple.label(alphabet),
                    next: alphabet.symbol(next).to_owned(),
                })
        })
        .collect()
}

/// L1 distance between each row observed in `empirical` and the same row of
/// `source`, in row order.
pub fn row_l1_distances(empirical: &TransitionMatrix, source: &TransitionMatrix) -> Vec<(usize, f64)> {
    empirical
        .observed_rows()
        .map(|(row, probs)| {
            let d = probs
                .iter()
                .enumerate()
                .map(|(c, &p)| (crate::model::to_f64(p) - source.prob_f64(row, c)).abs())
                .sum();
            (row, d)
        })
        .collect()
}
