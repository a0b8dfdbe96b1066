//! Note alphabets, textual note sequences and pitch mapping.
//!
//! Sequences are written the way sargam is usually typed: one symbol per
//! note, run together (`nDMgRS`), with whitespace and newlines ignored.
//! Alphabets with multi-character labels are tokenized longest-match first.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SEMITONES_PER_OCTAVE: i32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet symbol #{0} is empty")]
    EmptySymbol(usize),
    #[error("alphabet symbol {0:?} appears more than once")]
    DuplicateSymbol(String),
    #[error("alphabet symbol {0:?} contains whitespace")]
    WhitespaceInSymbol(String),
    #[error("unknown symbol {fragment:?} at position {position}")]
    UnknownSymbol { position: usize, fragment: String },
    #[error("pitch table has no offset for symbol {0:?}")]
    MissingOffset(String),
    #[error("pitch table offset {offset} for {symbol:?} is outside [0, 12)")]
    OffsetOutOfRange { symbol: String, offset: i32 },
    #[error("pitch table names symbol {0:?} which is not in the alphabet")]
    ExtraOffset(String),
    #[error("cannot build a pitch track from an empty sequence")]
    EmptySequence,
    #[error("note index {index} is out of range for an alphabet of {size} symbols")]
    NoteOutOfRange { index: usize, size: usize },
    #[error("invalid alphabet definition: {0}")]
    Definition(String),
}

/// An ordered set of note labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
    single_char: bool,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(CorpusError::AlphabetTooSmall(symbols.len()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(CorpusError::EmptySymbol(i));
            }
            if s.chars().any(char::is_whitespace) {
                return Err(CorpusError::WhitespaceInSymbol(s.clone()));
            }
            if symbols[..i].contains(s) {
                return Err(CorpusError::DuplicateSymbol(s.clone()));
            }
        }
        let single_char = symbols.iter().all(|s| s.chars().count() == 1);
        Ok(Self { symbols, single_char })
    }

    /// The seven notes of raga Bageshree: `S R g M P D n`.
    pub fn bageshree() -> Self {
        Self::new(["S", "R", "g", "M", "P", "D", "n"]).expect("static alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, note: Note) -> &str {
        &self.symbols[note.index()]
    }

    pub fn index_of(&self, symbol: &str) -> Option<Note> {
        self.symbols.iter().position(|s| s == symbol).map(Note)
    }

    pub fn note(&self, index: usize) -> Result<Note, CorpusError> {
        if index < self.len() {
            Ok(Note(index))
        } else {
            Err(CorpusError::NoteOutOfRange {
                index,
                size: self.len(),
            })
        }
    }

    /// Longest label that prefixes `text`.
    fn match_prefix(&self, text: &str) -> Option<(Note, usize)> {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| text.starts_with(s.as_str()))
            .max_by_key(|(_, s)| s.len())
            .map(|(i, s)| (Note(i), s.len()))
    }
}

/// Index of a symbol within its alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Note(pub(crate) usize);

impl Note {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteSequence {
    alphabet: Arc<Alphabet>,
    notes: Vec<Note>,
}

impl NoteSequence {
    pub fn new(alphabet: Arc<Alphabet>, notes: Vec<Note>) -> Result<Self, CorpusError> {
        if let Some(bad) = notes.iter().find(|n| n.0 >= alphabet.len()) {
            return Err(CorpusError::NoteOutOfRange {
                index: bad.0,
                size: alphabet.len(),
            });
        }
        Ok(Self { alphabet, notes })
    }

    pub fn from_indices(alphabet: Arc<Alphabet>, indices: &[usize]) -> Result<Self, CorpusError> {
        Self::new(alphabet, indices.iter().map(|&i| Note(i)).collect())
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> + '_ {
        self.notes.iter().map(|&n| self.alphabet.symbol(n))
    }
}

impl fmt::Display for NoteSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_sequence(self))
    }
}

/// A symbol that was dropped by [`parse_sequence_lenient`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedSymbol {
    pub position: usize,
    pub fragment: String,
}

/// Parses contiguous note symbols, ignoring whitespace. Matching is
/// case-sensitive. Positions in errors are character offsets into `text`.
pub fn parse_sequence(text: &str, alphabet: &Arc<Alphabet>) -> Result<NoteSequence, CorpusError> {
    let mut notes = Vec::new();
    tokenize(text, alphabet, |tok| match tok {
        Token::Note(n) => {
            notes.push(n);
            Ok(())
        }
        Token::Unknown { position, fragment } => Err(CorpusError::UnknownSymbol { position, fragment }),
    })?;
    Ok(NoteSequence {
        alphabet: Arc::clone(alphabet),
        notes,
    })
}

/// Like [`parse_sequence`] but skips unknown characters, returning them.
pub fn parse_sequence_lenient(text: &str, alphabet: &Arc<Alphabet>) -> (NoteSequence, Vec<SkippedSymbol>) {
    let mut notes = Vec::new();
    let mut skipped = Vec::new();
    let _ = tokenize(text, alphabet, |tok| {
        match tok {
            Token::Note(n) => notes.push(n),
            Token::Unknown { position, fragment } => skipped.push(SkippedSymbol { position, fragment }),
        }
        Ok(())
    });
    (
        NoteSequence {
            alphabet: Arc::clone(alphabet),
            notes,
        },
        skipped,
    )
}

enum Token {
    Note(Note),
    Unknown { position: usize, fragment: String },
}

fn tokenize(
    text: &str,
    alphabet: &Alphabet,
    mut emit: impl FnMut(Token) -> Result<(), CorpusError>,
) -> Result<(), CorpusError> {
    let mut rest = text;
    let mut position = 0usize;
    while let Some(c) = rest.chars().next() {
        if c.is_whitespace() {
            rest = &rest[c.len_utf8()..];
            position += 1;
            continue;
        }
        let matched = if alphabet.single_char {
            let mut buf = [0u8; 4];
            alphabet.index_of(c.encode_utf8(&mut buf)).map(|n| (n, c.len_utf8()))
        } else {
            alphabet.match_prefix(rest)
        };
        match matched {
            Some((note, bytes)) => {
                position += rest[..bytes].chars().count();
                rest = &rest[bytes..];
                emit(Token::Note(note))?;
            }
            None => {
                emit(Token::Unknown {
                    position,
                    fragment: c.to_string(),
                })?;
                rest = &rest[c.len_utf8()..];
                position += 1;
            }
        }
    }
    Ok(())
}

/// Concatenates symbols. Multi-character alphabets are space separated so
/// the output tokenizes back unambiguously.
pub fn format_sequence(seq: &NoteSequence) -> String {
    let sep = if seq.alphabet.single_char { "" } else { " " };
    seq.symbols().collect::<Vec<_>>().join(sep)
}

/// Wraps a formatted sequence into lines of at most `width` characters.
pub fn wrap_columns(text: &str, width: usize) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + text.len() / width.max(1) + 1);
    for line in chars.chunks(width.max(1)) {
        out.extend(line);
        out.push('\n');
    }
    out
}

/// Semitone offset of each symbol relative to the tonic, within one octave.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitchTable {
    alphabet: Arc<Alphabet>,
    offsets: Vec<i32>,
}

impl PitchTable {
    pub fn new(alphabet: Arc<Alphabet>, offsets: &BTreeMap<String, i32>) -> Result<Self, CorpusError> {
        if let Some(extra) = offsets.keys().find(|k| alphabet.index_of(k).is_none()) {
            return Err(CorpusError::ExtraOffset(extra.clone()));
        }
        let mut out = Vec::with_capacity(alphabet.len());
        for sym in alphabet.symbols() {
            let offset = *offsets
                .get(sym)
                .ok_or_else(|| CorpusError::MissingOffset(sym.clone()))?;
            if !(0..SEMITONES_PER_OCTAVE).contains(&offset) {
                return Err(CorpusError::OffsetOutOfRange {
                    symbol: sym.clone(),
                    offset,
                });
            }
            out.push(offset);
        }
        Ok(Self { alphabet, offsets: out })
    }

    /// `S:0 R:2 g:3 M:5 P:7 D:9 n:10`.
    pub fn bageshree() -> Self {
        let alphabet = Arc::new(Alphabet::bageshree());
        Self {
            alphabet,
            offsets: vec![0, 2, 3, 5, 7, 9, 10],
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn offset(&self, note: Note) -> i32 {
        self.offsets[note.index()]
    }

    pub fn offsets(&self) -> BTreeMap<String, i32> {
        self.alphabet
            .symbols()
            .iter()
            .cloned()
            .zip(self.offsets.iter().copied())
            .collect()
    }
}

pub fn pitch_of(note: Note, octave_shift: i32, table: &PitchTable) -> i32 {
    table.offset(note) + SEMITONES_PER_OCTAVE * octave_shift
}

/// Assigns each note the octave (one below, same, one above) closest to the
/// previous pitch. The first note is placed closest to the tonic. Ties go to
/// the middle octave, then the lower one. `tonic_reference` is added to every
/// value (60 gives MIDI note numbers with the tonic at middle C).
pub fn to_pitch_track(seq: &NoteSequence, table: &PitchTable, tonic_reference: i32) -> Result<Vec<i32>, CorpusError> {
    to_pitch_track_anchored(seq, table, tonic_reference, 0)
}

/// [`to_pitch_track`] continuing from a known previous pitch (relative to
/// the tonic), for decoding a segment taken from the middle of a track.
pub fn to_pitch_track_anchored(
    seq: &NoteSequence,
    table: &PitchTable,
    tonic_reference: i32,
    previous: i32,
) -> Result<Vec<i32>, CorpusError> {
    if seq.is_empty() {
        return Err(CorpusError::EmptySequence);
    }
    let mut prev = previous;
    let mut out = Vec::with_capacity(seq.len());
    for &note in seq.notes() {
        let pitch = [0, -1, 1]
            .into_iter()
            .map(|shift| pitch_of(note, shift, table))
            .min_by_key(|p| (p - prev).abs())
            .expect("three candidates");
        out.push(pitch + tonic_reference);
        prev = pitch;
    }
    Ok(out)
}

/// JSON form of an alphabet with its pitch table:
/// `{"symbols": [...], "offsets": {"S": 0, ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetDef {
    pub symbols: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub offsets: BTreeMap<String, i32>,
}

impl AlphabetDef {
    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        serde_json::from_str(text).map_err(|e| CorpusError::Definition(e.to_string()))
    }

    pub fn alphabet(&self) -> Result<Arc<Alphabet>, CorpusError> {
        Alphabet::new(self.symbols.iter().cloned()).map(Arc::new)
    }

    /// Returns `None` when the definition carries no offsets.
    pub fn pitch_table(&self) -> Result<Option<PitchTable>, CorpusError> {
        if self.offsets.is_empty() {
            return Ok(None);
        }
        PitchTable::new(self.alphabet()?, &self.offsets).map(Some)
    }
}
