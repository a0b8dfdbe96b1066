//! Bundled Bageshree data: alphabet with pitch table, order-1 and order-2
//! transition counts.
//!
//! The files are compiled in. Setting `RAGA_MARKOV_DATA` to a directory makes
//! the loaders read same-named files from there instead.

use std::path::PathBuf;
use std::sync::Arc;

use crate::corpus::{Alphabet, AlphabetDef, PitchTable};
use crate::model::{model_from_json, CountMatrix, Model, ModelError};

pub const DATA_DIR_ENV: &str = "RAGA_MARKOV_DATA";

pub const ALPHABET_FILE: &str = "bageshree_alphabet.json";
pub const ORDER1_FILE: &str = "bageshree_order1_counts.json";
pub const ORDER2_FILE: &str = "bageshree_order2_counts.json";

const ALPHABET_JSON: &str = include_str!("../data/bageshree_alphabet.json");
const ORDER1_JSON: &str = include_str!("../data/bageshree_order1_counts.json");
const ORDER2_JSON: &str = include_str!("../data/bageshree_order2_counts.json");

fn embedded(name: &str) -> Option<&'static str> {
    match name {
        ALPHABET_FILE => Some(ALPHABET_JSON),
        ORDER1_FILE => Some(ORDER1_JSON),
        ORDER2_FILE => Some(ORDER2_JSON),
        _ => None,
    }
}

/// Contents of a bundled file, honoring the data directory override.
pub fn read(name: &str) -> std::io::Result<String> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return std::fs::read_to_string(PathBuf::from(dir).join(name));
    }
    embedded(name)
        .map(str::to_owned)
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, name.to_owned()))
}

fn load(name: &str) -> Result<Model, ModelError> {
    let text = read(name).map_err(|source| ModelError::Io {
        path: name.into(),
        source,
    })?;
    model_from_json(&text)
}

fn expect_counts(model: Model) -> CountMatrix {
    match model {
        Model::Counts(c) => c,
        Model::Transitions(_) => panic!("bundled model must hold counts"),
    }
}

/// First-order counts (239 transitions).
pub fn bageshree_order1() -> Result<CountMatrix, ModelError> {
    load(ORDER1_FILE).map(expect_counts)
}

/// Second-order counts, 49 x 7.
pub fn bageshree_order2() -> Result<CountMatrix, ModelError> {
    load(ORDER2_FILE).map(expect_counts)
}

pub fn bageshree_alphabet_def() -> Result<AlphabetDef, ModelError> {
    let text = read(ALPHABET_FILE).map_err(|source| ModelError::Io {
        path: ALPHABET_FILE.into(),
        source,
    })?;
    AlphabetDef::from_json(&text).map_err(|e| ModelError::SchemaMismatch(e.to_string()))
}

pub fn bageshree() -> (Arc<Alphabet>, PitchTable) {
    let t = PitchTable::bageshree();
    (Arc::clone(t.alphabet()), t)
}
