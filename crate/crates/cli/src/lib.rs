//! Command-line front end for `equivcheck`.
//!
//! Exit codes: 0 success, 2 config error, 3 analysis error (the partial
//! report is still emitted).

pub mod config;
pub mod run;
pub mod specs;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use equivcheck::representations::hom_dimension;
use equivcheck::universality::normal_subgroup_certificate;
use serde_json::json;

use crate::config::{parse_config, AnalysisSpec, OutputSpec};
use crate::run::{run_config, RunOptions};
use crate::specs::{parse_group, parse_rep, parse_subgroup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ANALYSIS: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Analysis(_) => EXIT_ANALYSIS,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<equivcheck::Error> for CliError {
    fn from(e: equivcheck::Error) -> Self {
        CliError::Analysis(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "equivcheck", version, about = "Exact universality and separation analysis for invariant networks")]
pub struct Cli {
    /// Analysis config (JSON); may also be given positionally to config subcommands.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report.json, report.txt and fit CSVs.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "EQUIVCHECK_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Record wall-clock milliseconds per analysis (reports are then no longer byte-stable).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every analysis in a config.
    Analyze { config: Option<PathBuf> },
    /// Run only the separation analyses of a config.
    Separation { config: Option<PathBuf> },
    /// Run only the fit analyses of a config.
    Fit { config: Option<PathBuf> },
    /// Dimension of the space of equivariant linear maps V -> W.
    Homdim { group: String, source: String, target: String },
    /// Normal-subgroup universality certificate for hidden representation R^{G/H}.
    CertifyNormal {
        group: String,
        subgroup: String,
        /// Comma-separated subgroup specs for the input components.
        #[arg(long, value_delimiter = ',', default_value = "stabilizer:0")]
        components: Vec<String>,
    },
}

/// Rendered command output in every format.
struct Rendered {
    json: String,
    text: String,
    csv: String,
    /// Extra files for `--out-dir`.
    files: Vec<(String, String)>,
    outputs: OutputSpec,
}

impl Rendered {
    fn pick(&self, format: Format) -> &str {
        match format {
            Format::Json => &self.json,
            Format::Text => &self.text,
            Format::Csv => &self.csv,
        }
    }

    fn write_dir(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Config(format!("out dir {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join(&self.outputs.json), &self.json).map_err(io)?;
        std::fs::write(dir.join(&self.outputs.text), &self.text).map_err(io)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
        Ok(())
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn load_config(cli: &Cli, positional: &Option<PathBuf>) -> Result<config::AnalysisConfig, CliError> {
    let path = positional.as_ref().or(cli.config.as_ref()).ok_or_else(|| CliError::Config("no config path given".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Runs a config, optionally keeping only analyses accepted by `keep`. Returns the
/// rendering and whether any analysis failed.
fn analyze(cli: &Cli, positional: &Option<PathBuf>, keep: fn(&AnalysisSpec) -> bool) -> Result<(Rendered, bool), CliError> {
    let cfg = load_config(cli, positional)?;
    let outcome = run_config(&cfg, &RunOptions { seed: cli.seed, timings: cli.timings }, &keep)?;
    let files: Vec<(String, String)> =
        outcome.curves.iter().map(|(i, csv)| (format!("{}_{i}.csv", cfg.outputs.csv_prefix), csv.clone())).collect();
    let csv = outcome.curves.iter().map(|(i, csv)| format!("# analysis {i}\n{csv}")).collect::<Vec<_>>().join("\n");
    let rendered = Rendered { json: pretty(&outcome.report), text: outcome.text.clone(), csv, files, outputs: cfg.outputs };
    Ok((rendered, outcome.failed()))
}

fn homdim(group: &str, source: &str, target: &str) -> Result<Rendered, CliError> {
    let g = Arc::new(parse_group(group)?);
    let dim = hom_dimension(&parse_rep(&g, source)?, &parse_rep(&g, target)?)?;
    Ok(Rendered {
        json: pretty(&json!({ "group": group, "source": source, "target": target, "dim": dim })),
        text: format!("{dim}\n"),
        csv: format!("group,source,target,dim\n{group},{source},{target},{dim}\n"),
        files: Vec::new(),
        outputs: OutputSpec::default(),
    })
}

fn certify_normal(group: &str, subgroup: &str, components: &[String]) -> Result<Rendered, CliError> {
    let g = Arc::new(parse_group(group)?);
    let h = parse_subgroup(&g, subgroup)?;
    let ks = components.iter().map(|k| parse_subgroup(&g, k)).collect::<Result<Vec<_>, _>>()?;
    let cert = normal_subgroup_certificate(&g, &h, &ks)?;
    let verdict = match &cert.refusal {
        Some(reason) => format!("refused: {reason}"),
        None if cert.granted => "granted".to_string(),
        None => "not granted".to_string(),
    };
    let mut text = format!("{verdict}\n");
    if let (Some(q), Some(d)) = (cert.quotient_order, cert.hidden_dim) {
        text.push_str(&format!("quotient order {q}, hidden dim {d}\n"));
    }
    for (spec, c) in components.iter().zip(&cert.components) {
        text.push_str(&format!("  component {spec}: {}\n", if c.passed { "pass" } else { "fail" }));
    }
    let mut value = serde_json::to_value(&cert).expect("certificate serializes");
    value["group"] = json!(group);
    value["subgroup"] = json!(subgroup);
    value["component_specs"] = json!(components);
    Ok(Rendered {
        json: pretty(&value),
        text,
        csv: format!("group,subgroup,granted\n{group},{subgroup},{}\n", cert.granted),
        files: Vec::new(),
        outputs: OutputSpec::default(),
    })
}

fn execute(cli: &Cli) -> Result<(Rendered, bool), CliError> {
    match &cli.command {
        Command::Analyze { config } => analyze(cli, config, |_| true),
        Command::Separation { config } => analyze(cli, config, |a| matches!(a, AnalysisSpec::Separation { .. })),
        Command::Fit { config } => analyze(cli, config, |a| matches!(a, AnalysisSpec::Fit { .. })),
        Command::Homdim { group, source, target } => Ok((homdim(group, source, target)?, false)),
        Command::CertifyNormal { group, subgroup, components } => Ok((certify_normal(group, subgroup, components)?, false)),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // the global pool can only be set once per process; later calls keep the first size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let result = execute(&cli).and_then(|(rendered, failed)| {
        if let Some(dir) = &cli.out_dir {
            rendered.write_dir(dir)?;
        }
        Ok((rendered, failed))
    });
    match result {
        Ok((rendered, failed)) => {
            let _ = out.write_all(rendered.pick(cli.format).as_bytes());
            if failed {
                EXIT_ANALYSIS
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "equivcheck: {e}");
            e.exit_code()
        }
    }
}
