use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mbs_slocc::coeff::coefficient_matrix_view;
use mbs_slocc::ilo::{apply_certificate, verify_equivalence};
use mbs_slocc::schmidt::{all_schmidt_ranks, RANK_TOL};
use mbs_slocc::{class_hierarchy, classify, ClassifyOptions, InputSpec, ProductSearchConfig, Scenario, Status};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::report::{ComplexPair, ReportDoc};
use crate::spec::parse_input_spec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Number,
    Cat,
}

#[derive(Debug, Parser)]
#[command(name = "mbs-slocc", version, about = "Multiport beam-splitter outputs and their SLOCC classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input spec (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for the product-state search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also count product states in each reduced range (slow).
    #[arg(long, global = true)]
    pub compute_a: bool,
    /// Relative singular-value threshold for Schmidt ranks.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Accept a certificate replay when fidelity ≥ 1 - X.
    #[arg(long, global = true, value_name = "X")]
    pub tol_fid: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Build the output state and print its amplitudes.
    Build,
    /// Classify the output and emit a report with its certificate.
    Classify,
    /// Schmidt rank across every bipartition.
    Rank,
    /// Replay a report's certificate on the spec's output.
    Verify {
        /// Report written by `classify`.
        #[arg(long, value_name = "PATH")]
        report: PathBuf,
    },
    /// Coefficient matrix of the output, mode 1 as rows.
    DumpMatrix,
    /// Containment chain of the classes.
    Hierarchy {
        #[arg(long, value_enum, default_value_t = ScenarioArg::Number)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 3)]
        upto: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Build,
    Classify,
    Rank,
    Verify { report_path: PathBuf },
    DumpMatrix,
    Hierarchy { scenario: Scenario, upto: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub rank_tol: Option<f64>,
    pub tol_fid: Option<f64>,
    pub seed: u64,
    pub compute_a: bool,
    pub format: Option<Format>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let command = match cli.command {
            CommandArgs::Build => Command::Build,
            CommandArgs::Classify => Command::Classify,
            CommandArgs::Rank => Command::Rank,
            CommandArgs::Verify { report } => Command::Verify { report_path: report },
            CommandArgs::DumpMatrix => Command::DumpMatrix,
            CommandArgs::Hierarchy { scenario, upto } => Command::Hierarchy {
                scenario: match scenario {
                    ScenarioArg::Number => Scenario::Number,
                    ScenarioArg::Cat => Scenario::Cat,
                },
                upto,
            },
        };
        let c = cli.common;
        Self {
            command,
            spec_path: c.spec,
            out_path: c.out,
            rank_tol: c.tol,
            tol_fid: c.tol_fid,
            seed: c.seed,
            compute_a: c.compute_a,
            format: c.format,
        }
    }
}

/// What a command produced. `failure` is set when the command ran to
/// completion but its check did not pass; the output is still written.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self { output, failure: None }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn positive(value: Option<f64>, flag: &str) -> Result<Option<f64>> {
    match value {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("{flag} must be a positive number"))),
        v => Ok(v),
    }
}

impl RunConfig {
    fn load_spec(&self) -> Result<InputSpec> {
        let path = self.spec_path.as_deref().ok_or_else(|| CliError::Usage("--spec PATH is required".into()))?;
        parse_input_spec(&read(path)?)
    }

    fn format_for(&self, allowed: &[Format]) -> Result<Format> {
        match self.format {
            None => Ok(allowed[0]),
            Some(f) if allowed.contains(&f) => Ok(f),
            Some(f) => Err(CliError::Usage(format!("format {f:?} is not available for this command; use one of {allowed:?}"))),
        }
    }

    fn options(&self) -> Result<ClassifyOptions> {
        Ok(ClassifyOptions {
            rank_tol: positive(self.rank_tol, "--tol")?.unwrap_or(RANK_TOL),
            tol_fid: positive(self.tol_fid, "--tol-fid")?,
            compute_a: self.compute_a,
            search: ProductSearchConfig { seed: self.seed, ..Default::default() },
        })
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BuildDoc {
    modes: usize,
    cutoff: usize,
    norm: f64,
    truncation_deficit: f64,
    warnings: Vec<String>,
    /// Row-major over occupations, mode 1 slowest.
    amplitudes: Vec<ComplexPair>,
}

fn build(cfg: &RunConfig) -> Result<Outcome> {
    cfg.format_for(&[Format::Json])?;
    let spec = cfg.load_spec()?;
    let built = spec.build_output()?;
    let doc = BuildDoc {
        modes: spec.modes,
        cutoff: built.state.dim(),
        norm: built.norm,
        truncation_deficit: built.deficit,
        warnings: spec.warnings.clone(),
        amplitudes: built.state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    };
    Ok(Outcome::ok(json_line(&doc)))
}

fn classify_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let format = cfg.format_for(&[Format::Json, Format::Text])?;
    let spec = cfg.load_spec()?;
    let report = classify(&spec, &cfg.options()?)?;
    let doc = ReportDoc::from_report(&report);
    let output = match format {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "status: {}", doc.status).unwrap();
            writeln!(s, "label: {}", doc.label.name).unwrap();
            match doc.schmidt_rank {
                Some(r) => writeln!(s, "schmidt rank: {r}").unwrap(),
                None => writeln!(s, "schmidt ranks: {:?}", doc.schmidt_ranks).unwrap(),
            }
            writeln!(s, "fidelity: {}", doc.fidelity).unwrap();
            if let Some(a) = &doc.a_values {
                writeln!(s, "a-values: {a:?}").unwrap();
            }
            writeln!(s, "hierarchy: {}", doc.hierarchy_note).unwrap();
            for w in &doc.warnings {
                writeln!(s, "warning: {w}").unwrap();
            }
            s
        }
        _ => doc.to_json(),
    };
    let failure = (report.status == Status::Failed)
        .then(|| CliError::ClassificationFailed(report.failure.clone().unwrap_or_default()));
    Ok(Outcome { output, failure })
}

#[derive(Serialize)]
struct RankDoc {
    modes: usize,
    cutoff: usize,
    tol: f64,
    schmidt_ranks: std::collections::BTreeMap<String, usize>,
}

fn rank(cfg: &RunConfig) -> Result<Outcome> {
    let format = cfg.format_for(&[Format::Json, Format::Csv, Format::Text])?;
    let spec = cfg.load_spec()?;
    let built = spec.build_output()?;
    let tol = cfg.options()?.rank_tol.max(10.0 * built.deficit);
    let ranks = all_schmidt_ranks(&built.state, tol)?;
    let output = match format {
        Format::Json => json_line(&RankDoc {
            modes: spec.modes,
            cutoff: built.state.dim(),
            tol,
            schmidt_ranks: ranks.iter().map(|(bp, r)| (bp.to_string(), *r)).collect(),
        }),
        Format::Csv => {
            let mut s = String::from("bipartition,rank\n");
            for (bp, r) in &ranks {
                writeln!(s, "\"{bp}\",{r}").unwrap();
            }
            s
        }
        Format::Text => ranks.iter().map(|(bp, r)| format!("{bp}\t{r}\n")).collect(),
    };
    Ok(Outcome::ok(output))
}

#[derive(Serialize)]
struct VerifyDoc {
    label: String,
    cutoff: usize,
    fidelity: f64,
    tol_fid: f64,
    ok: bool,
}

fn verify(cfg: &RunConfig, report_path: &Path) -> Result<Outcome> {
    cfg.format_for(&[Format::Json])?;
    let spec = cfg.load_spec()?;
    let report = ReportDoc::parse(&read(report_path)?)?;
    if report.modes != spec.modes {
        return Err(CliError::schema("/modes", format!("report has {} modes, spec has {}", report.modes, spec.modes)));
    }
    let label = report.label.to_label()?;
    let dim = report.cutoff;
    let cert = report.certificate.to_certificate(spec.modes, dim)?;
    let source = spec.build_output_at(dim)?.state;
    let image = apply_certificate(&source, &cert)?;
    let target = label.representative(spec.modes, dim)?;
    let tol_fid = positive(cfg.tol_fid, "--tol-fid")?.unwrap_or(report.tol_fid);
    let fidelity = verify_equivalence(&image, &target, tol_fid).map(|e| e.fidelity).unwrap_or(0.0);
    let ok = fidelity >= 1.0 - tol_fid;
    let output = json_line(&VerifyDoc { label: label.to_string(), cutoff: dim, fidelity, tol_fid, ok });
    Ok(Outcome { output, failure: (!ok).then_some(CliError::Verification { fidelity, tol_fid }) })
}

fn dump_matrix(cfg: &RunConfig) -> Result<Outcome> {
    let format = cfg.format_for(&[Format::Text, Format::Json])?;
    let spec = cfg.load_spec()?;
    let built = spec.build_output()?;
    let view = coefficient_matrix_view(&built.state)?;
    let output = match format {
        Format::Json => {
            let rows: Vec<Vec<ComplexPair>> =
                (0..view.rows()).map(|r| (0..view.cols()).map(|c| view.entry(r, c)).map(|z| [z.re, z.im]).collect()).collect();
            json_line(&rows)
        }
        _ => view.to_text(true),
    };
    Ok(Outcome::ok(output))
}

fn hierarchy(cfg: &RunConfig, scenario: Scenario, upto: usize) -> Result<Outcome> {
    let format = cfg.format_for(&[Format::Text, Format::Json])?;
    let h = class_hierarchy(scenario, upto);
    let output = match format {
        Format::Json => json_line(&serde_json::json!({
            "chain": h.chain.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "note": h.note,
        })),
        _ => format!("{h}\n{}\n", h.note),
    };
    Ok(Outcome::ok(output))
}

/// Runs one command. Errors are input or computation failures; a check that ran
/// and failed is reported through [`Outcome::failure`].
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Build => build(cfg),
        Command::Classify => classify_cmd(cfg),
        Command::Rank => rank(cfg),
        Command::Verify { report_path } => verify(cfg, report_path),
        Command::DumpMatrix => dump_matrix(cfg),
        Command::Hierarchy { scenario, upto } => hierarchy(cfg, *scenario, *upto),
    }
}
