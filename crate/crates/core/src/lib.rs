//! Order-k Markov chain models of raga note sequences: estimation from a
//! corpus, inverse-transform generation, and chain diagnostics.

pub mod analysis;
pub mod bundled;
pub mod cli;
pub mod corpus;
pub mod generate;
pub mod model;

pub use analysis::{analyze, is_ergodic, is_regular, limiting_matrix, stationary_solve, ChainReport};
pub use corpus::{parse_sequence, to_pitch_track, Alphabet, Note, NoteSequence, PitchTable};
pub use generate::{generate_snca, generate_snca2, DeadEndPolicy, GeneratorConfig, SeededUniform};
pub use model::{count_transitions, to_class_matrix, to_tpm, ClassMatrix, CountMatrix, Model, Prob, TransitionMatrix};
