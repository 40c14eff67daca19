//! Problem specs, command orchestration and run reports for the `qiso` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive::{saturate, DeriveError, EngineConfig, InferenceRule};
use crate::grpalg::{GenSet, GroupElement, GroupError};
use crate::models::{
    classify, compare, doubling_coassociativity_check, metric_aut_group, Classification, CoassociativityVerdict,
    Commutativity, Comparison, Invariants, SoundnessVerdict, SurjectivityWitness,
};
use crate::spectral::{check_all, CommutationVerdict, SpectralError};

pub const SCHEMA_VERSION: &str = "qiso-run-report/1";
pub const DEFAULT_SPECTRAL_RADIUS: usize = 10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed spec document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid generating set: {0}")]
    Invalid(#[from] GroupError),
    #[error("unknown inference rule {0:?}")]
    UnknownRule(String),
    #[error("bad --gens value {0:?}: {1}")]
    BadGens(String, String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Derive(DeriveError::Inconsistent { .. }) => EXIT_UNSOUND,
            _ => EXIT_INVALID,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecOptions {
    pub max_word_len: Option<usize>,
    pub max_rounds: Option<usize>,
    pub disabled_rules: Vec<String>,
    pub spectral_radius: Option<usize>,
    pub symmetrize: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub rank: usize,
    pub generators: Vec<Vec<i64>>,
    #[serde(default)]
    pub options: SpecOptions,
}

impl ProblemSpec {
    pub fn new(rank: usize, generators: Vec<Vec<i64>>) -> Self {
        ProblemSpec { rank, generators, options: SpecOptions::default() }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// A validated spec with its generating set and engine configuration.
#[derive(Clone, Debug)]
pub struct ParsedSpec {
    pub spec: ProblemSpec,
    pub gens: GenSet,
    pub config: EngineConfig,
    pub spectral_radius: usize,
    pub warnings: Vec<String>,
}

pub fn parse_spec(text: &str) -> Result<ParsedSpec, CliError> {
    validate(serde_json::from_str(text)?)
}

pub fn validate(spec: ProblemSpec) -> Result<ParsedSpec, CliError> {
    if spec.rank == 0 {
        return Err(GroupError::ZeroRank.into());
    }
    let mut gens = Vec::with_capacity(spec.generators.len());
    for v in &spec.generators {
        if v.len() != spec.rank {
            return Err(GroupError::RankMismatch(format!("{v:?}"), v.len(), spec.rank).into());
        }
        let g = GroupElement::new(v);
        if gens.contains(&g) {
            return Err(GroupError::Duplicate(g.to_string()).into());
        }
        gens.push(g);
    }
    let mut warnings = Vec::new();
    if spec.options.symmetrize {
        let missing: Vec<GroupElement> = gens.iter().map(GroupElement::neg).filter(|g| !gens.contains(g)).collect();
        for g in missing {
            warnings.push(format!("added missing inverse {g}"));
            gens.push(g);
        }
    }
    let s = GenSet::new(spec.rank, gens)?;
    let mut config = EngineConfig::for_genset(&s);
    if let Some(l) = spec.options.max_word_len {
        config = config.with_word_len(l);
    }
    if let Some(r) = spec.options.max_rounds {
        config.max_rounds = r;
    }
    for name in &spec.options.disabled_rules {
        let rule = InferenceRule::from_name(name).ok_or_else(|| CliError::UnknownRule(name.clone()))?;
        config.disabled_rules.insert(rule);
    }
    config.validate()?;
    let spectral_radius = spec.options.spectral_radius.unwrap_or(DEFAULT_SPECTRAL_RADIUS);
    if spectral_radius == 0 {
        return Err(SpectralError::ZeroRadius.into());
    }
    Ok(ParsedSpec { spec, gens: s, config, spectral_radius, warnings })
}

/// Parses `"1;-1;2;-2"` or `"1,0;0,1;-1,0;0,-1"`.
pub fn parse_gens(text: &str) -> Result<Vec<Vec<i64>>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| CliError::BadGens(text.into(), e.to_string())))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    Derive(ParsedSpec),
    Verify(ParsedSpec),
    Compare(ParsedSpec, ParsedSpec),
    Spectral(ParsedSpec),
    DoublingCheck(usize),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Derive(_) => "derive",
            Command::Verify(_) => "verify",
            Command::Compare(..) => "compare",
            Command::Spectral(_) => "spectral",
            Command::DoublingCheck(_) => "doubling-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionRecord {
    pub id: usize,
    pub rule: InferenceRule,
    pub relation: String,
    pub sources: Vec<usize>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationSummary {
    pub config: EngineConfig,
    pub fixpoint: bool,
    pub rounds: usize,
    pub zero_history: Vec<usize>,
    pub reduced_matrix: Vec<Vec<String>>,
    pub zero_symbols: Vec<String>,
    pub surviving_symbols: Vec<String>,
    pub survivor_relations: Vec<String>,
    pub facts: BTreeMap<String, Vec<String>>,
    pub deductions: Vec<DeductionRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub zero_pattern: Vec<String>,
    pub block_sizes: Vec<usize>,
    pub commutativity_status: Commutativity,
    pub aut_order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSection {
    pub generators: Vec<GroupElement>,
    pub derivation: DerivationSummary,
    pub classification: Option<String>,
    pub witnesses: Vec<SurjectivityWitness>,
    pub notes: Vec<String>,
    pub soundness: Vec<SoundnessVerdict>,
    pub invariants: InvariantSummary,
    #[serde(skip)]
    pub rendered_matrix: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralSection {
    pub generators: Vec<GroupElement>,
    pub radius: usize,
    pub verdicts: Vec<CommutationVerdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub code: i32,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub specs: Vec<ProblemSpec>,
    pub warnings: Vec<String>,
    pub runs: Vec<RunSection>,
    pub comparison: Option<Comparison>,
    pub spectral: Vec<SpectralSection>,
    pub coassociativity: Option<CoassociativityVerdict>,
    pub status: Status,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        render_text(self)
    }
}

fn run_section(p: &ParsedSpec) -> Result<RunSection, CliError> {
    let report = saturate(&p.gens, &p.config)?;
    let c: Classification = classify(&report, &p.gens);
    let names = report.names();
    let derivation = DerivationSummary {
        config: report.config.clone(),
        fixpoint: report.fixpoint,
        rounds: report.rounds,
        zero_history: report.zero_history.clone(),
        reduced_matrix: report
            .reduced
            .entries
            .iter()
            .map(|r| r.iter().map(|e| names.polynomial(e)).collect())
            .collect(),
        zero_symbols: report.zero_symbols.iter().map(|s| names.symbol(s)).collect(),
        surviving_symbols: report.surviving_symbols.iter().map(|s| names.symbol(s)).collect(),
        survivor_relations: report
            .survivor_relations
            .iter()
            .map(|r| format!("{} = {}", names.word(&r.lhs), names.polynomial(&r.rhs)))
            .collect(),
        facts: report
            .facts
            .iter()
            .map(|(s, f)| (names.symbol(s), f.iter().map(|x| format!("{x:?}").to_lowercase()).collect()))
            .collect(),
        deductions: report
            .deductions
            .iter()
            .map(|d| DeductionRecord {
                id: d.id,
                rule: d.rule,
                relation: format!("{} = 0", names.polynomial(&d.relation)),
                sources: d.sources.clone(),
                note: d.note.clone(),
            })
            .collect(),
    };
    let invariants = InvariantSummary {
        zero_pattern: c.zero_pattern.iter().map(|r| r.iter().map(|&z| if z { '0' } else { '*' }).collect()).collect(),
        block_sizes: c.invariants.block_sizes.clone(),
        commutativity_status: c.invariants.commutativity,
        aut_order: c.invariants.aut_order,
    };
    Ok(RunSection {
        generators: p.gens.gens().to_vec(),
        derivation,
        classification: c.template.clone(),
        witnesses: c.witnesses.clone(),
        notes: c.notes.clone(),
        soundness: c.soundness.clone(),
        invariants,
        rendered_matrix: report.reduced.render(&names),
    })
}

fn spectral_section(p: &ParsedSpec) -> Result<SpectralSection, CliError> {
    Ok(SpectralSection {
        generators: p.gens.gens().to_vec(),
        radius: p.spectral_radius,
        verdicts: check_all(&p.gens, p.spectral_radius)?,
    })
}

fn status_for(runs: &[RunSection], spectral: &[SpectralSection], coassoc: Option<&CoassociativityVerdict>) -> Status {
    // Automorphisms of S must commute; other probes such as the swap may fail.
    let spectral_bad = spectral.iter().any(|s| {
        let gens = GenSet::new(s.generators[0].rank(), s.generators.clone()).expect("validated generators");
        let group = metric_aut_group(&gens);
        s.verdicts.iter().any(|v| group.contains(&v.matrix) && !v.commutes())
    });
    let unsound = runs.iter().any(|r| r.soundness.iter().any(|v| !v.is_sound()))
        || spectral_bad
        || coassoc.is_some_and(|c| !c.passed());
    if unsound {
        Status { code: EXIT_UNSOUND, label: "soundness-failure".into() }
    } else if runs.iter().any(|r| !r.derivation.fixpoint) {
        Status { code: EXIT_BUDGET, label: "budget-exhausted".into() }
    } else {
        Status { code: EXIT_OK, label: "ok".into() }
    }
}

pub fn execute(command: &Command) -> Result<RunReport, CliError> {
    let mut specs = Vec::new();
    let mut warnings = Vec::new();
    let mut runs = Vec::new();
    let mut comparison = None;
    let mut spectral = Vec::new();
    let mut coassociativity = None;
    let mut take = |p: &ParsedSpec| {
        specs.push(p.spec.clone());
        warnings.extend(p.warnings.iter().cloned());
    };
    match command {
        Command::Derive(p) => {
            take(p);
            runs.push(run_section(p)?);
        }
        Command::Verify(p) => {
            take(p);
            runs.push(run_section(p)?);
            spectral.push(spectral_section(p)?);
        }
        Command::Compare(a, b) => {
            take(a);
            take(b);
            let (ra, rb) = std::thread::scope(|scope| {
                let h = scope.spawn(|| run_section(b));
                let ra = run_section(a);
                (ra, h.join().expect("derivation thread panicked"))
            });
            let (ra, rb) = (ra?, rb?);
            let ca = classification_of(&ra);
            let cb = classification_of(&rb);
            comparison = Some(compare(&ca, &cb));
            runs.push(ra);
            runs.push(rb);
        }
        Command::Spectral(p) => {
            take(p);
            spectral.push(spectral_section(p)?);
        }
        Command::DoublingCheck(n) => {
            if *n == 0 {
                return Err(GroupError::ZeroRank.into());
            }
            coassociativity = Some(doubling_coassociativity_check(*n));
        }
    }
    let status = status_for(&runs, &spectral, coassociativity.as_ref());
    Ok(RunReport {
        schema: SCHEMA_VERSION.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        specs,
        warnings,
        runs,
        comparison,
        spectral,
        coassociativity,
        status,
    })
}

fn classification_of(r: &RunSection) -> Classification {
    Classification {
        template: r.classification.clone(),
        invariants: Invariants {
            block_sizes: r.invariants.block_sizes.clone(),
            commutativity: r.invariants.commutativity_status,
            aut_order: r.invariants.aut_order,
        },
        zero_pattern: r.invariants.zero_pattern.iter().map(|row| row.chars().map(|c| c == '0').collect()).collect(),
        witnesses: r.witnesses.clone(),
        soundness: r.soundness.clone(),
        notes: r.notes.clone(),
    }
}

fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qiso {} ({})", r.command, r.schema);
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for run in &r.runs {
        let gens: Vec<String> = run.generators.iter().map(ToString::to_string).collect();
        let d = &run.derivation;
        let _ = writeln!(out, "\nS = {{{}}}", gens.join(", "));
        let _ = writeln!(
            out,
            "fixpoint: {} after {} rounds, {} deductions, {} zero symbols",
            d.fixpoint,
            d.rounds,
            d.deductions.len(),
            d.zero_symbols.len()
        );
        let _ = writeln!(out, "fundamental unitary:\n{}", run.rendered_matrix);
        let _ = writeln!(out, "forced zeros: {}", d.zero_symbols.join(" "));
        let _ = writeln!(out, "relations among survivors:");
        for rel in &d.survivor_relations {
            let _ = writeln!(out, "  {rel}");
        }
        let _ = writeln!(out, "classification: {}", run.classification.as_deref().unwrap_or("no template matched"));
        for n in &run.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        for w in &run.witnesses {
            let _ = writeln!(
                out,
                "  surjectivity witness (axis {}): {} ↦ {} [{}]",
                w.axis + 1,
                w.rendered,
                w.image,
                if w.valid { "valid" } else { "invalid" }
            );
        }
        let inv = &run.invariants;
        let _ = writeln!(
            out,
            "invariants: block sizes {:?}, commutativity {:?}, aut order {}",
            inv.block_sizes, inv.commutativity_status, inv.aut_order
        );
        for v in &run.soundness {
            let _ = writeln!(
                out,
                "soundness [{}]: {} relations, {} violations, unitary {}",
                v.model,
                v.checked,
                v.violations.len(),
                v.unitary
            );
            for x in v.violations.iter().take(5) {
                let _ = writeln!(out, "  {}: {} evaluates to {}", x.source, x.relation, x.value);
            }
        }
    }
    if let Some(c) = &r.comparison {
        let _ = writeln!(
            out,
            "\n{}",
            if c.distinguished { "distinguished" } else { "not distinguished at available invariants" }
        );
        for d in &c.differing {
            let _ = writeln!(out, "  {d}");
        }
    }
    for s in &r.spectral {
        let _ = writeln!(out, "\nspectral checks at radius {}:", s.radius);
        for v in &s.verdicts {
            match v.witness() {
                None => {
                    let _ = writeln!(out, "  M = {}: commutes on {} basis vectors", v.matrix, v.checked);
                }
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "  M = {}: fails, l({}) = {} but l({}) = {}",
                        v.matrix, w.point, w.length, w.image, w.image_length
                    );
                }
            }
        }
    }
    if let Some(c) = &r.coassociativity {
        let _ = writeln!(
            out,
            "\ndoubling coassociativity, n = {}: {}",
            c.rank,
            if c.passed() { "passed" } else { "FAILED" }
        );
        for case in &c.cases {
            let _ = writeln!(
                out,
                "  {}: {} terms, {}",
                case.generator,
                case.terms,
                if case.equal { "equal" } else { "differ" }
            );
        }
    }
    let _ = writeln!(out, "\nstatus: {} ({})", r.status.label, r.status.code);
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "qiso", version, about = "Quantum isometry groups of word-length spectral triples on Z^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Saturate the relations, classify and check soundness.
    Derive(InputArgs),
    /// Derive, then run the soundness and spectral checks.
    Verify(InputArgs),
    /// Derive two presentations and compare their invariants.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        /// Spec document for the second generating set.
        #[arg(long)]
        other_spec: Option<PathBuf>,
        /// Second generating set, same syntax as --gens.
        #[arg(long, allow_hyphen_values = true)]
        other_gens: Option<String>,
    },
    /// Check point isometries against the truncated Dirac operator.
    Spectral(InputArgs),
    /// Check coassociativity of the doubled coproduct.
    DoublingCheck {
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Spec document (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Generators as `1;-1;2;-2` or `1,0;0,1;-1,0;0,-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub gens: Option<String>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Add missing inverses.
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long)]
    pub max_word_len: Option<usize>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub spectral_radius: Option<usize>,
    /// Disable an inference rule by name; repeatable.
    #[arg(long = "disable-rule")]
    pub disabled_rules: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load(args: &InputArgs, spec: Option<&PathBuf>, gens: Option<&String>) -> Result<ParsedSpec, CliError> {
    let mut problem: ProblemSpec = match (spec, gens) {
        (Some(path), None) => serde_json::from_str(&read(path)?)?,
        (None, Some(g)) => {
            let vectors = parse_gens(g)?;
            let rank = args.rank.or_else(|| vectors.first().map(Vec::len)).unwrap_or(0);
            ProblemSpec::new(rank, vectors)
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("give either a spec file or generators, not both".into())),
        (None, None) => return Err(CliError::Usage("a spec file or generators is required".into())),
    };
    let o = &mut problem.options;
    o.symmetrize |= args.symmetrize;
    o.max_word_len = args.max_word_len.or(o.max_word_len);
    o.max_rounds = args.max_rounds.or(o.max_rounds);
    o.spectral_radius = args.spectral_radius.or(o.spectral_radius);
    o.disabled_rules.extend(args.disabled_rules.iter().cloned());
    validate(problem)
}

fn emit(report: &RunReport, output: &OutputArgs) -> Result<String, CliError> {
    let text = match output.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    match &output.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Runs a parsed command line; returns stdout text and the exit code.
pub fn run(cli: Cli) -> Result<(String, i32), CliError> {
    let (command, output) = match &cli.command {
        CliCommand::Derive(a) => (Command::Derive(load(a, a.spec.as_ref(), a.gens.as_ref())?), &a.output),
        CliCommand::Verify(a) => (Command::Verify(load(a, a.spec.as_ref(), a.gens.as_ref())?), &a.output),
        CliCommand::Spectral(a) => (Command::Spectral(load(a, a.spec.as_ref(), a.gens.as_ref())?), &a.output),
        CliCommand::Compare { input, other_spec, other_gens } => {
            let first = load(input, input.spec.as_ref(), input.gens.as_ref())?;
            let second = load(input, other_spec.as_ref(), other_gens.as_ref())?;
            (Command::Compare(first, second), &input.output)
        }
        CliCommand::DoublingCheck { rank, output } => (Command::DoublingCheck(*rank), output),
    };
    let report = execute(&command)?;
    Ok((emit(&report, output)?, report.status.code))
}

/// Entry point for the binary: parses `args`, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_spec() {
        let p = parse_spec(r#"{"rank":1,"generators":[[1],[-1],[2],[-2]]}"#).unwrap();
        assert_eq!(p.gens.len(), 4);
        assert_eq!(p.spectral_radius, DEFAULT_SPECTRAL_RADIUS);
    }

    #[test]
    fn parses_plane_spec() {
        let p = parse_spec(r#"{"rank":2,"generators":[[1,0],[0,1],[-1,0],[0,-1],[2,0],[-2,0]]}"#).unwrap();
        assert_eq!(p.gens.positives().len(), 3);
    }

    #[test]
    fn rejects_bad_specs() {
        let not_generating = parse_spec(r#"{"rank":1,"generators":[[2],[-2]]}"#).unwrap_err();
        assert!(matches!(not_generating, CliError::Invalid(GroupError::NotGenerating { .. })));
        assert!(matches!(
            parse_spec(r#"{"rank":1,"generators":[[0]]}"#),
            Err(CliError::Invalid(GroupError::ContainsIdentity))
        ));
        assert!(matches!(
            parse_spec(r#"{"rank":1,"generators":[[1],[1],[-1]]}"#),
            Err(CliError::Invalid(GroupError::Duplicate(_)))
        ));
        assert!(matches!(
            parse_spec(r#"{"rank":1,"generators":[[1]]}"#),
            Err(CliError::Invalid(GroupError::NotSymmetric(..)))
        ));
        assert!(matches!(parse_spec(r#"{"rank":1}"#), Err(CliError::Malformed(_))));
        assert!(matches!(
            parse_spec(r#"{"rank":1,"generators":[[1],[-1]],"options":{"disabled_rules":["nope"]}}"#),
            Err(CliError::UnknownRule(_))
        ));
    }

    #[test]
    fn symmetrize_warns() {
        let p = parse_spec(r#"{"rank":1,"generators":[[1],[2]],"options":{"symmetrize":true}}"#).unwrap();
        assert_eq!(p.gens.len(), 4);
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn spec_round_trip() {
        let mut spec = ProblemSpec::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]);
        spec.options.max_word_len = Some(3);
        spec.options.disabled_rules = vec!["sandwich".into()];
        let back: ProblemSpec = serde_json::from_str(&spec.render()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn gens_flag_syntax() {
        assert_eq!(parse_gens("1;-1;5;-5").unwrap(), vec![vec![1], vec![-1], vec![5], vec![-5]]);
        assert_eq!(parse_gens("1,0; 0,1").unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert!(parse_gens("1;x").is_err());
    }

    #[test]
    fn doubling_check_command() {
        let r = execute(&Command::DoublingCheck(2)).unwrap();
        assert_eq!(r.status.code, EXIT_OK);
        assert!(r.coassociativity.unwrap().passed());
    }

    #[test]
    fn budget_exhaustion_exit_code() {
        let p = parse_spec(r#"{"rank":1,"generators":[[1],[-1],[2],[-2]],"options":{"max_rounds":1}}"#).unwrap();
        let r = execute(&Command::Derive(p)).unwrap();
        assert_eq!(r.status.code, EXIT_BUDGET);
    }
}
