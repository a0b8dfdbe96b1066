//! Python bindings: alphabets, model estimation and loading, generation,
//! chain analysis and pitch export.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use raga_markov::analysis::{self, analyze};
use raga_markov::bundled;
use raga_markov::corpus::{self, Alphabet, NoteSequence};
use raga_markov::generate::{generate_ladder, DeadEndPolicy, GeneratorConfig, SeededUniform, StartNote};
use raga_markov::model::{
    self, count_transitions, load_model, save_model, to_class_matrix, ModelError, StateTuple, TransitionMatrix,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Io { .. } => PyIOError::new_err(e.to_string()),
        e => value_err(e),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Alphabet", module = "raga_markov_py", frozen)]
struct PyAlphabet {
    inner: Arc<Alphabet>,
}

#[pymethods]
impl PyAlphabet {
    #[new]
    fn new(symbols: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(Alphabet::new(symbols).map_err(value_err)?),
        })
    }

    #[staticmethod]
    fn bageshree() -> Self {
        Self {
            inner: bundled::bageshree().0,
        }
    }

    #[getter]
    fn symbols(&self) -> Vec<String> {
        self.inner.symbols().to_vec()
    }

    /// Splits `text` into symbols, raising on anything outside the alphabet.
    fn parse(&self, text: &str) -> PyResult<Vec<String>> {
        let seq = corpus::parse_sequence(text, &self.inner).map_err(value_err)?;
        Ok(seq.symbols().map(str::to_owned).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Alphabet({:?})", self.inner.symbols())
    }
}

#[pyclass(name = "Model", module = "raga_markov_py", frozen)]
struct PyModel {
    inner: model::Model,
    tpm: TransitionMatrix,
}

impl PyModel {
    fn wrap(inner: model::Model) -> Self {
        let tpm = inner.tpm();
        Self { inner, tpm }
    }

    fn row_of(&self, state: &str) -> PyResult<usize> {
        let alphabet = self.tpm.alphabet();
        let seq = corpus::parse_sequence(state, alphabet).map_err(value_err)?;
        if seq.len() != self.tpm.order() {
            return Err(value_err(format!(
                "state {state:?} has {} notes, model order is {}",
                seq.len(),
                self.tpm.order()
            )));
        }
        Ok(StateTuple::new(seq.notes().to_vec()).row_index(alphabet.len()))
    }

    fn col_of(&self, symbol: &str) -> PyResult<usize> {
        self.tpm
            .alphabet()
            .index_of(symbol)
            .map(|n| n.index())
            .ok_or_else(|| value_err(format!("unknown symbol {symbol:?}")))
    }
}

#[pymethods]
impl PyModel {
    /// Fits an order-`order` count model; each string is one sequence.
    #[staticmethod]
    #[pyo3(signature = (corpus, order, alphabet=None))]
    fn estimate(corpus: Vec<String>, order: usize, alphabet: Option<&PyAlphabet>) -> PyResult<Self> {
        let alphabet = alphabet.map_or_else(|| bundled::bageshree().0, |a| Arc::clone(&a.inner));
        let seqs = corpus
            .iter()
            .map(|t| corpus::parse_sequence(t, &alphabet))
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_err)?;
        let counts = count_transitions(&seqs, order).map_err(model_err)?;
        Ok(Self::wrap(model::Model::Counts(counts)))
    }

    /// The bundled Bageshree counts of order 1 or 2.
    #[staticmethod]
    fn bageshree(order: usize) -> PyResult<Self> {
        let counts = match order {
            1 => bundled::bageshree_order1(),
            2 => bundled::bageshree_order2(),
            _ => return Err(value_err("bundled models exist for orders 1 and 2")),
        }
        .map_err(model_err)?;
        Ok(Self::wrap(model::Model::Counts(counts)))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self::wrap(load_model(path).map_err(model_err)?))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_model(&self.inner, path).map_err(model_err)
    }

    fn to_json(&self) -> String {
        model::model_to_json(&self.inner)
    }

    #[getter]
    fn order(&self) -> usize {
        self.tpm.order()
    }

    #[getter]
    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet {
            inner: Arc::clone(self.tpm.alphabet()),
        }
    }

    /// `P(next | state)` as `(numerator, denominator)`.
    fn prob(&self, state: &str, next: &str) -> PyResult<(u64, u64)> {
        let p = self.tpm.prob(self.row_of(state)?, self.col_of(next)?);
        Ok((*p.numer(), *p.denom()))
    }

    /// Observed rows as `{state: [p, ...]}` in floating point.
    fn tpm(&self) -> Vec<(String, Vec<f64>)> {
        self.tpm
            .observed_rows()
            .map(|(r, probs)| (self.tpm.row_label(r), probs.iter().map(|&p| model::to_f64(p)).collect()))
            .collect()
    }

    /// Class intervals of one state as `(lo, hi)` strings like `"13/46"`.
    fn class_row(&self, state: &str) -> PyResult<Vec<(String, String)>> {
        let cm = to_class_matrix(&self.tpm);
        Ok(cm
            .row_or_zero(self.row_of(state)?)
            .iter()
            .map(|i| (model::ratio_str(i.lo), model::ratio_str(i.hi)))
            .collect())
    }

    #[pyo3(signature = (include_unobserved_rows=true))]
    fn sparsity(&self, include_unobserved_rows: bool) -> f64 {
        model::sparsity(&self.tpm, include_unobserved_rows)
    }

    fn is_ergodic(&self) -> bool {
        analysis::is_ergodic(&self.tpm)
    }

    fn is_regular(&self) -> bool {
        analysis::is_regular(&self.tpm).regular
    }

    /// Full chain report as a dict.
    #[pyo3(signature = (tol=analysis::DEFAULT_TOL, max_power=analysis::DEFAULT_MAX_POWER))]
    fn analyze<'py>(&self, py: Python<'py>, tol: f64, max_power: usize) -> PyResult<Bound<'py, PyAny>> {
        let report = analyze(&self.tpm, tol, max_power).map_err(value_err)?;
        json_to_py(py, &serde_json::to_string(&report).map_err(value_err)?)
    }

    fn stationary(&self) -> PyResult<Vec<(String, f64)>> {
        let st = analysis::stationary_solve(&self.tpm).map_err(value_err)?;
        Ok(st.states.into_iter().zip(st.w).collect())
    }

    fn to_dot(&self) -> String {
        analysis::export_dot(&self.tpm)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(order={}, observed_rows={})",
            self.tpm.order(),
            self.tpm.observed_rows().count()
        )
    }
}

/// Generates `length` notes from models of orders 1..=k (any order given).
#[pyfunction]
#[pyo3(signature = (models, length, seed=0, policy="backoff", start="S", allow_high_order=false))]
fn generate(
    models: Vec<PyRef<'_, PyModel>>,
    length: usize,
    seed: u64,
    policy: &str,
    start: &str,
    allow_high_order: bool,
) -> PyResult<Vec<String>> {
    let mut models: Vec<&PyModel> = models.iter().map(|m| &**m).collect();
    models.sort_by_key(|m| m.tpm.order());
    let k = models.len();
    if models.iter().map(|m| m.tpm.order()).ne(1..=k) {
        return Err(value_err("need exactly one model for each order 1..=k"));
    }
    let classes: Vec<_> = models.iter().map(|m| to_class_matrix(&m.tpm)).collect();
    let ladder: Vec<_> = classes.iter().collect();
    let alphabet = models[0].tpm.alphabet();
    let start = if start == "random" {
        let counts = models[0]
            .inner
            .counts()
            .ok_or_else(|| value_err("start='random' needs an order-1 counts model"))?;
        StartNote::Unconditional(raga_markov::generate::unconditional_start(counts))
    } else {
        StartNote::Fixed(
            alphabet
                .index_of(start)
                .ok_or_else(|| value_err(format!("unknown start symbol {start:?}")))?,
        )
    };
    let dead_end_policy = match policy {
        "error" => DeadEndPolicy::Error,
        "backoff" => DeadEndPolicy::BackoffToLowerOrder,
        "restart" => DeadEndPolicy::RestartAtStart,
        other => return Err(value_err(format!("unknown policy {other:?}"))),
    };
    let cfg = GeneratorConfig {
        order: k,
        length,
        start,
        seed,
        dead_end_policy,
        allow_high_order,
    };
    let g = generate_ladder(&ladder, &cfg, &mut SeededUniform::new(seed)).map_err(value_err)?;
    Ok(g.sequence.symbols().map(str::to_owned).collect())
}

/// Bageshree notes to MIDI numbers (or semitones from the tonic when
/// `tonic=0`), each note placed in the octave nearest its predecessor.
#[pyfunction]
#[pyo3(signature = (notes, tonic=60))]
fn pitch_track(notes: Vec<String>, tonic: i32) -> PyResult<Vec<i32>> {
    let (alphabet, table) = bundled::bageshree();
    let idx = notes
        .iter()
        .map(|s| {
            alphabet
                .index_of(s)
                .ok_or_else(|| value_err(format!("unknown symbol {s:?}")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let seq = NoteSequence::new(alphabet, idx).map_err(value_err)?;
    corpus::to_pitch_track(&seq, &table, tonic).map_err(value_err)
}

#[pymodule]
fn raga_markov_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlphabet>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(pitch_track, m)?)?;
    m.add("RNG_ID", raga_markov::generate::RNG_ID)?;
    Ok(())
}
