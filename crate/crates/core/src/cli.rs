//! Command-line front end.
//!
//! Primary output goes to stdout or `--out`; diagnostics go to stderr as
//! `error[CODE]: message`. Exit codes: 0 success, 1 validation failed,
//! 2 usage, 3 data or schema, 4 analysis or generation precondition.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{self, analyze, export_dot, order_sweep, AnalysisError};
use crate::bundled;
use crate::corpus::{
    format_sequence, parse_sequence, parse_sequence_lenient, to_pitch_track, wrap_columns, Alphabet, AlphabetDef,
    CorpusError, NoteSequence, PitchTable,
};
use crate::generate::{
    empirical_tpm, generate_ladder, row_l1_distances, support_violations, unconditional_start, DeadEndPolicy,
    GenerateError, GeneratorConfig, PolicyEvent, SeededUniform, StartNote, RNG_ID,
};
use crate::model::{
    class_matrix_to_csv, count_transitions_limited, load_model, model_to_json, save_model, to_class_matrix, to_tpm,
    tpm_to_csv, Model, ModelError, DEFAULT_MAX_ROWS,
};

pub const WRAP_WIDTH: usize = 80;

#[derive(Debug, Parser)]
#[command(name = "raga-markov", version, about = "Markov chain note models for raga sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an order-k model to one or more corpus files.
    Estimate(EstimateArgs),
    /// Generate a note sequence from fitted models.
    Generate(GenerateArgs),
    /// Ergodicity, regularity, limiting matrix and sparsity of a model.
    Analyze(AnalyzeArgs),
    /// Check a generated sequence against a model.
    Validate(ValidateArgs),
    /// Write a model as CSV/DOT/JSON, or a note file as pitches.
    Export(ExportArgs),
    /// Sparsity and dead-end rows for orders 1..=k.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Corpus files; each file is one sequence.
    #[arg(long = "corpus", required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    /// Alphabet definition JSON, or `bageshree`.
    #[arg(long, default_value = "bageshree")]
    pub alphabet: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the tpm as CSV.
    #[arg(long)]
    pub csv_tpm: Option<PathBuf>,
    /// Also write the class matrix as CSV.
    #[arg(long)]
    pub csv_class: Option<PathBuf>,
    /// Skip unknown symbols with a warning instead of failing.
    #[arg(long)]
    pub skip_unknown: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ROWS)]
    pub max_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Error,
    Backoff,
    Restart,
}

impl From<PolicyArg> for DeadEndPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Error => DeadEndPolicy::Error,
            PolicyArg::Backoff => DeadEndPolicy::BackoffToLowerOrder,
            PolicyArg::Restart => DeadEndPolicy::RestartAtStart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Notes,
    Pitches,
    Midi,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model files, one per order 1..=k. Defaults to the bundled Bageshree
    /// models. `bageshree:1` and `bageshree:2` name them explicitly.
    #[arg(long = "model")]
    pub models: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start symbol, or `random` to draw it from note frequencies.
    #[arg(long, default_value = "S")]
    pub start: String,
    #[arg(long, value_enum, default_value_t = PolicyArg::Backoff)]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = Emit::Notes)]
    pub emit: Emit,
    /// Alphabet/pitch definition used for `--emit pitches|midi`.
    #[arg(long, default_value = "bageshree")]
    pub alphabet: String,
    /// Added to every pitch; 60 puts the tonic on middle C.
    #[arg(long, default_value_t = 60)]
    pub tonic: i32,
    /// One line of notes instead of 80-column wrapping.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the run manifest and policy events as JSON.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Allow orders above 2.
    #[arg(long)]
    pub allow_high_order: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Model file or `bageshree:1` / `bageshree:2`.
    #[arg(long, default_value = "bageshree:1")]
    pub model: String,
    #[arg(long, default_value_t = analysis::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = analysis::DEFAULT_MAX_POWER)]
    pub max_power: usize,
    /// Also write the transition graph in DOT format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value = "bageshree:1")]
    pub model: String,
    /// Generated note file.
    #[arg(long)]
    pub generated: PathBuf,
    /// Order to check at; must match the model.
    #[arg(long)]
    pub order: Option<usize>,
    /// Fail when any observed row's L1 distance exceeds this.
    #[arg(long)]
    pub max_l1: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    TpmCsv,
    ClassCsv,
    Dot,
    Json,
    Pitches,
    Midi,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// Note file for `pitches` / `midi`.
    #[arg(long)]
    pub notes: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    #[arg(long, default_value = "bageshree")]
    pub alphabet: String,
    #[arg(long, default_value_t = 60)]
    pub tonic: i32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "corpus", required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[arg(long, default_value = "bageshree")]
    pub alphabet: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_order: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_ROWS)]
    pub max_rows: usize,
    #[arg(long)]
    pub skip_unknown: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: CorpusError },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Corpus(_) | CliError::Model(_) => 3,
            CliError::Generate(_) | CliError::Analysis(_) => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Io { .. } => "E_IO",
            CliError::Parse { .. } | CliError::Corpus(_) => "E_PARSE",
            CliError::Model(ModelError::EmptyCorpus) => "E_EMPTY_CORPUS",
            CliError::Model(ModelError::OrderTooLarge { .. }) => "E_ORDER_TOO_LARGE",
            CliError::Model(ModelError::Io { .. }) => "E_IO",
            CliError::Model(_) => "E_SCHEMA",
            CliError::Generate(GenerateError::DeadEndRow { .. }) => "E_DEAD_END",
            CliError::Generate(_) => "E_GENERATE",
            CliError::Analysis(AnalysisError::NotRegular) => "E_NOT_REGULAR",
            CliError::Analysis(AnalysisError::NoConvergence(_)) => "E_NO_CONVERGENCE",
            CliError::Analysis(_) => "E_ANALYSIS",
            CliError::ValidationFailed(_) => "E_VALIDATION",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(&cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Estimate(a) => cmd_estimate(a, stdout, stderr),
        Command::Generate(a) => cmd_generate(a, stdout, stderr),
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::Export(a) => cmd_export(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_output(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// `bageshree` or a path to an alphabet definition.
fn load_alphabet_def(source: &str) -> Result<AlphabetDef> {
    if source == "bageshree" {
        return Ok(bundled::bageshree_alphabet_def()?);
    }
    let path = Path::new(source);
    Ok(AlphabetDef::from_json(&read_file(path)?)?)
}

/// `bageshree:1`, `bageshree:2` or a model file path.
fn load_model_source(source: &str) -> Result<Model> {
    match source {
        "bageshree:1" => Ok(Model::Counts(bundled::bageshree_order1()?)),
        "bageshree:2" => Ok(Model::Counts(bundled::bageshree_order2()?)),
        path => Ok(load_model(path)?),
    }
}

fn read_corpus(
    paths: &[PathBuf],
    alphabet: &Arc<Alphabet>,
    skip_unknown: bool,
    stderr: &mut dyn Write,
) -> Result<Vec<NoteSequence>> {
    paths
        .iter()
        .map(|p| {
            let text = read_file(p)?;
            if skip_unknown {
                let (seq, skipped) = parse_sequence_lenient(&text, alphabet);
                for s in skipped {
                    let (line, col) = line_col(&text, s.position);
                    let _ = writeln!(
                        stderr,
                        "warning[W_SKIPPED_SYMBOL]: {}:{line}:{col}: skipped {:?}",
                        p.display(),
                        s.fragment
                    );
                }
                Ok(seq)
            } else {
                parse_sequence(&text, alphabet).map_err(|source| CliError::Parse {
                    path: located(p, &text, &source),
                    source,
                })
            }
        })
        .collect()
}

fn line_col(text: &str, char_pos: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars().take(char_pos) {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn located(path: &Path, text: &str, err: &CorpusError) -> PathBuf {
    match err {
        CorpusError::UnknownSymbol { position, .. } => {
            let (line, col) = line_col(text, *position);
            PathBuf::from(format!("{}:{line}:{col}", path.display()))
        }
        _ => path.to_owned(),
    }
}

pub fn cmd_estimate(a: &EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let alphabet = load_alphabet_def(&a.alphabet)?.alphabet()?;
    let corpus = read_corpus(&a.corpus, &alphabet, a.skip_unknown, stderr)?;
    if corpus.iter().all(NoteSequence::is_empty) {
        return Err(ModelError::EmptyCorpus.into());
    }
    let counts = count_transitions_limited(&corpus, a.order as usize, a.max_rows)?;
    if counts.skipped_sequences() > 0 {
        let _ = writeln!(
            stderr,
            "warning[W_SHORT_SEQUENCE]: {} sequence(s) shorter than order + 1 were skipped",
            counts.skipped_sequences()
        );
    }
    let tpm = to_tpm(&counts);
    if let Some(p) = &a.csv_tpm {
        write_output(Some(p), stdout, &tpm_to_csv(&tpm))?;
    }
    if let Some(p) = &a.csv_class {
        write_output(Some(p), stdout, &class_matrix_to_csv(&to_class_matrix(&tpm)))?;
    }
    let model = Model::Counts(counts);
    match &a.out {
        Some(p) => save_model(&model, p)?,
        None => write_output(None, stdout, &model_to_json(&model))?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub alphabet: Vec<String>,
    pub order: usize,
    pub length: usize,
    pub seed: u64,
    pub start: String,
    pub policy: DeadEndPolicy,
    pub rng_id: &'static str,
    pub tool_version: &'static str,
    pub timestamp: u64,
    pub uniforms_consumed: u64,
    pub policy_events: Vec<PolicyEvent>,
}

pub fn cmd_generate(a: &GenerateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let k = a.order as usize;
    let sources: Vec<String> = if a.models.is_empty() {
        match k {
            1 => vec!["bageshree:1".into()],
            2 => vec!["bageshree:1".into(), "bageshree:2".into()],
            _ => {
                return Err(CliError::Usage(format!(
                    "order {k} needs explicit --model files for orders 1..={k}"
                )))
            }
        }
    } else {
        a.models.clone()
    };
    let mut models: Vec<Model> = sources.iter().map(|s| load_model_source(s)).collect::<Result<_>>()?;
    models.sort_by_key(Model::order);
    let orders: Vec<usize> = models.iter().map(Model::order).collect();
    if orders != (1..=k).collect::<Vec<_>>() {
        return Err(CliError::Usage(format!(
            "order {k} generation needs one model for each order 1..={k}, got orders {orders:?}"
        )));
    }
    let classes: Vec<_> = models.iter().map(|m| to_class_matrix(&m.tpm())).collect();
    let ladder: Vec<_> = classes.iter().collect();
    let alphabet = Arc::clone(models[0].alphabet());

    let start = if a.start == "random" {
        let counts = models[0]
            .counts()
            .ok_or_else(|| CliError::Usage("--start random needs an order-1 counts model".into()))?;
        StartNote::Unconditional(unconditional_start(counts))
    } else {
        StartNote::Fixed(
            alphabet
                .index_of(&a.start)
                .ok_or_else(|| CliError::Usage(format!("start symbol {:?} is not in the alphabet", a.start)))?,
        )
    };
    let cfg = GeneratorConfig {
        order: k,
        length: a.length as usize,
        start,
        seed: a.seed,
        dead_end_policy: a.policy.into(),
        allow_high_order: a.allow_high_order,
    };
    let mut src = SeededUniform::new(a.seed);
    let generation = generate_ladder(&ladder, &cfg, &mut src)?;
    for e in &generation.events {
        let _ = writeln!(
            stderr,
            "warning[W_DEAD_END]: note {}: state {:?} (order {}) had no successors: {:?}",
            e.position, e.state, e.order, e.action
        );
    }

    let text = match a.emit {
        Emit::Notes => {
            let notes = format_sequence(&generation.sequence);
            if a.raw {
                notes + "\n"
            } else {
                wrap_columns(&notes, WRAP_WIDTH)
            }
        }
        Emit::Pitches | Emit::Midi => {
            let table = pitch_table_for(&a.alphabet, &alphabet)?;
            render_pitches(&generation.sequence, &table, a.tonic, a.emit == Emit::Midi)?
        }
    };
    write_output(a.out.as_deref(), stdout, &text)?;

    if let Some(path) = &a.sidecar {
        let manifest = RunManifest {
            command: "generate".into(),
            inputs: sources,
            alphabet: alphabet.symbols().to_vec(),
            order: k,
            length: cfg.length,
            seed: a.seed,
            start: a.start.clone(),
            policy: cfg.dead_end_policy,
            rng_id: RNG_ID,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            uniforms_consumed: generation.uniforms_consumed,
            policy_events: generation.events.clone(),
        };
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_output(Some(path), stdout, &body)?;
    }
    Ok(())
}

fn pitch_table_for(source: &str, alphabet: &Arc<Alphabet>) -> Result<PitchTable> {
    let def = load_alphabet_def(source)?;
    let table = def
        .pitch_table()?
        .ok_or_else(|| CliError::Usage(format!("alphabet {source:?} has no pitch offsets")))?;
    if **table.alphabet() != **alphabet {
        return Err(CliError::Usage(format!(
            "alphabet {source:?} does not match the model alphabet"
        )));
    }
    Ok(table)
}

/// `index,symbol,semitone` CSV, or one MIDI note number per line.
fn render_pitches(seq: &NoteSequence, table: &PitchTable, tonic: i32, midi: bool) -> Result<String> {
    let seq = NoteSequence::new(Arc::clone(table.alphabet()), seq.notes().to_vec())?;
    if midi {
        let track = to_pitch_track(&seq, table, tonic)?;
        Ok(track.iter().map(|p| format!("{p}\n")).collect())
    } else {
        let track = to_pitch_track(&seq, table, 0)?;
        let mut out = String::from("index,symbol,semitone\n");
        for (i, (sym, p)) in seq.symbols().zip(track).enumerate() {
            out.push_str(&format!("{},{sym},{p}\n", i + 1));
        }
        Ok(out)
    }
}

pub fn cmd_analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    let tpm = load_model_source(&a.model)?.tpm();
    let report = analyze(&tpm, a.tol, a.max_power)?;
    if let Some(p) = &a.dot {
        write_output(Some(p), stdout, &export_dot(&tpm))?;
    }
    let text = if a.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.to_text()
    };
    write_output(a.out.as_deref(), stdout, &text)
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub order: usize,
    pub transitions_checked: usize,
    pub support_violations: usize,
    pub first_violations: Vec<crate::generate::SupportViolation>,
    pub max_row_l1: f64,
    pub row_l1: Vec<(String, f64)>,
    pub pass: bool,
}

pub fn cmd_validate(a: &ValidateArgs, stdout: &mut dyn Write) -> Result<()> {
    let tpm = load_model_source(&a.model)?.tpm();
    let k = a.order.unwrap_or(tpm.order());
    if k != tpm.order() {
        return Err(CliError::Usage(format!(
            "model has order {}, asked to validate at order {k}",
            tpm.order()
        )));
    }
    let text = read_file(&a.generated)?;
    let seq = parse_sequence(&text, tpm.alphabet()).map_err(|source| CliError::Parse {
        path: located(&a.generated, &text, &source),
        source,
    })?;
    let violations = support_violations(&seq, &tpm);
    let emp = empirical_tpm(&seq, k)?;
    let row_l1: Vec<(String, f64)> = row_l1_distances(&emp, &tpm)
        .into_iter()
        .map(|(r, d)| (tpm.row_label(r), d))
        .collect();
    let max_row_l1 = row_l1.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let pass = violations.is_empty() && a.max_l1.is_none_or(|m| max_row_l1 < m);
    let report = ValidationReport {
        order: k,
        transitions_checked: seq.len().saturating_sub(k),
        support_violations: violations.len(),
        first_violations: violations.into_iter().take(20).collect(),
        max_row_l1,
        row_l1,
        pass,
    };
    let body = if a.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        let mut s = format!(
            "order: {}\ntransitions checked: {}\nsupport violations: {}\nmax row L1: {:.6}\n",
            report.order, report.transitions_checked, report.support_violations, report.max_row_l1
        );
        for v in &report.first_violations {
            s.push_str(&format!(
                "  violation at note {}: {} -> {}\n",
                v.position, v.state, v.next
            ));
        }
        for (label, d) in &report.row_l1 {
            s.push_str(&format!("  L1 {label:>8} {d:.6}\n"));
        }
        s.push_str(if pass { "result: pass\n" } else { "result: fail\n" });
        s
    };
    write_output(None, stdout, &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::ValidationFailed(format!(
            "{} support violation(s), max row L1 {max_row_l1:.6}",
            report.support_violations
        )))
    }
}

pub fn cmd_export(a: &ExportArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = match a.format {
        ExportFormat::Pitches | ExportFormat::Midi => {
            let notes = a
                .notes
                .as_ref()
                .ok_or_else(|| CliError::Usage("--notes is required for pitch export".into()))?;
            let def = load_alphabet_def(&a.alphabet)?;
            let alphabet = def.alphabet()?;
            let table = pitch_table_for(&a.alphabet, &alphabet)?;
            let text = read_file(notes)?;
            let seq = parse_sequence(&text, &alphabet).map_err(|source| CliError::Parse {
                path: located(notes, &text, &source),
                source,
            })?;
            render_pitches(&seq, &table, a.tonic, a.format == ExportFormat::Midi)?
        }
        fmt => {
            let source = a
                .model
                .as_deref()
                .ok_or_else(|| CliError::Usage("--model is required for model export".into()))?;
            let model = load_model_source(source)?;
            let tpm = model.tpm();
            match fmt {
                ExportFormat::TpmCsv => tpm_to_csv(&tpm),
                ExportFormat::ClassCsv => class_matrix_to_csv(&to_class_matrix(&tpm)),
                ExportFormat::Dot => export_dot(&tpm),
                ExportFormat::Json => model_to_json(&model),
                ExportFormat::Pitches | ExportFormat::Midi => unreachable!(),
            }
        }
    };
    write_output(a.out.as_deref(), stdout, &text)
}

pub fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let alphabet = load_alphabet_def(&a.alphabet)?.alphabet()?;
    let corpus = read_corpus(&a.corpus, &alphabet, a.skip_unknown, stderr)?;
    let entries = order_sweep(&corpus, a.max_order as usize, a.max_rows)?;
    let body = json!({
        "entries": entries,
        "sparsity_monotone": analysis::sparsity_is_monotone(&entries),
    });
    write_output(
        None,
        stdout,
        &(serde_json::to_string_pretty(&body).expect("sweep serializes") + "\n"),
    )
}
