use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shexgen_core::MatchCriteria;
use shexgen_pipeline::ml::DEFAULT_SEED;
use shexgen_pipeline::{CardinalityModel, CardinalitySource, HttpChatClient, LlmClient, ProviderConfig, RecordingClient, StubClient};

use crate::commands::convert::{cmd_convert, Target};
use crate::commands::evaluate::{cmd_evaluate, EvaluateOptions};
use crate::commands::extract::{cmd_extract, ExtractOptions};
use crate::commands::generate::{cmd_generate, GenerateOptions};
use crate::commands::report::{cmd_report, csv_records, markdown_evaluation, Format};
use crate::commands::train::{cmd_train, TrainOptions};
use crate::commands::Method;
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::outcome::{to_json, write_file};
use crate::runtime::Runtime;

#[derive(Debug, Parser)]
#[command(name = "shexgen", version, about = "Generate ShEx schemas from knowledge-graph statistics and score them against ground truth")]
pub struct Cli {
    /// Directory of cached SPARQL results shared by all commands.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Never contact an endpoint; a cache miss is an error.
    #[arg(long, global = true)]
    pub offline: bool,
    /// Classes processed concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Selection {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Class URI, label or file slug; repeat to select several. Default: all.
    #[arg(long = "class")]
    pub classes: Vec<String>,
}

#[derive(Debug, Args)]
pub struct LlmArgs {
    /// Replay recorded replies from this directory instead of calling a provider.
    #[arg(long)]
    pub stub_dir: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible chat API.
    #[arg(long)]
    pub provider_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    pub api_key_env: String,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    /// Also write every live exchange here in the stub format.
    #[arg(long)]
    pub record_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run and cache the queries a setting needs.
    Extract {
        #[command(flatten)]
        sel: Selection,
        #[arg(long, default_value = "global")]
        setting: Method,
        /// Also write each class's extracted material here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the extraction report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate one schema per class.
    Generate {
        #[command(flatten)]
        sel: Selection,
        #[arg(long, default_value = "global")]
        setting: Method,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        llm: LlmArgs,
        /// Few-shot exemplar root (`<dir>/<kg>/<kind>.json`).
        #[arg(long)]
        exemplars: Option<PathBuf>,
        /// `llm`, or `dt`/`gb` to take global-setting bounds from a trained model.
        #[arg(long, default_value = "llm")]
        cardinality: String,
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// Build schemas from KG statistics alone.
    Mine {
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated schemas against the ground truth.
    Evaluate {
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        generated: PathBuf,
        /// `node=exact|subclass|datatype,card=exact|loosened`; repeat for several. Default: all six.
        #[arg(long = "criteria")]
        criteria: Vec<MatchCriteria>,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use declared value-type classes when a class has no superclass path.
        #[arg(long)]
        value_type_fallback: bool,
        /// Record per-class timings (makes output run-dependent).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        setting: Option<String>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Tabulate evaluation result files.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long, default_value = "md")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a cardinality model from ground-truth labels.
    Train {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long = "class")]
        classes: Vec<String>,
        #[arg(long, default_value = "dt")]
        cardinality: shexgen_pipeline::ModelKind,
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        features_in: Option<PathBuf>,
        #[arg(long)]
        features_out: Option<PathBuf>,
        /// Fraction of rows held out for testing.
        #[arg(long, default_value_t = 0.0)]
        holdout: f64,
    },
    /// Print a schema in canonical ShExC or JSON.
    Convert {
        input: PathBuf,
        #[arg(long, default_value = "shexc")]
        to: Target,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn llm_client(args: &LlmArgs) -> Result<Box<dyn LlmClient>, CliError> {
    if let Some(dir) = &args.stub_dir {
        if !dir.is_dir() {
            return Err(CliError::Config(format!("stub directory {} not found", dir.display())));
        }
        let model = args.model.clone().unwrap_or_else(|| "stub".into());
        return Ok(Box::new(StubClient::new(dir).with_model_id(model)));
    }
    let mut cfg = ProviderConfig { api_key_env: args.api_key_env.clone(), temperature: args.temperature, ..ProviderConfig::default() };
    if let Some(url) = &args.provider_url {
        cfg.url = url.clone();
    }
    if let Some(m) = &args.model {
        cfg.model = m.clone();
    }
    let client = HttpChatClient::new(cfg)?;
    Ok(match &args.record_dir {
        Some(dir) => Box::new(RecordingClient::new(client, Some(dir.clone()))),
        None => Box::new(client),
    })
}

fn cardinality_source(name: &str, model_file: Option<&PathBuf>) -> Result<CardinalitySource, CliError> {
    if name.eq_ignore_ascii_case("llm") {
        return Ok(CardinalitySource::Llm);
    }
    let kind: shexgen_pipeline::ModelKind = name.parse().map_err(CliError::Config)?;
    let path = model_file.ok_or_else(|| CliError::Config(format!("--cardinality {kind} needs --model-file")))?;
    let model = CardinalityModel::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if model.kind != kind {
        return Err(CliError::Config(format!("{} holds a {} model, not {kind}", path.display(), model.kind)));
    }
    Ok(CardinalitySource::Ml(Box::new(model)))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let rt = Runtime::http(cli.cache_dir.clone(), cli.offline, cli.jobs).jobs(cli.jobs);
    match cli.command {
        Command::Extract { sel, setting, out, report } => {
            let manifest = Manifest::load(&sel.manifest)?;
            let outcome = cmd_extract(&manifest, &sel.classes, setting, &ExtractOptions::default(), &rt, out.as_deref())?;
            emit(report.as_ref(), &to_json(&outcome.value))?;
            outcome.status()
        }
        Command::Generate { sel, setting, out, llm, exemplars, cardinality, model_file } => {
            let manifest = Manifest::load(&sel.manifest)?;
            let mut opts = GenerateOptions::new(setting, out);
            opts.exemplars_dir = exemplars;
            opts.cardinality = cardinality_source(&cardinality, model_file.as_ref())?;
            if !matches!(opts.cardinality, CardinalitySource::Llm) && setting != Method::Global {
                return Err(CliError::Config("--cardinality dt|gb applies to the global setting only".into()));
            }
            let client = llm_client(&llm)?;
            let outcome = cmd_generate(&manifest, &sel.classes, &opts, client.as_ref(), &rt)?;
            outcome.status()
        }
        Command::Mine { sel, out } => {
            let manifest = Manifest::load(&sel.manifest)?;
            let opts = GenerateOptions::new(Method::Mined, out);
            let outcome = cmd_generate(&manifest, &sel.classes, &opts, &StubClient::new(std::env::temp_dir()), &rt)?;
            outcome.status()
        }
        Command::Evaluate { sel, generated, criteria, format, out, value_type_fallback, timings, setting, model } => {
            let manifest = Manifest::load(&sel.manifest)?;
            let mut opts = EvaluateOptions { value_type_fallback, timings, setting, model, ..EvaluateOptions::default() };
            if !criteria.is_empty() {
                opts.criteria = criteria;
            }
            let outcome = cmd_evaluate(&manifest, &sel.classes, &generated, &opts, &rt)?;
            let text = match format {
                Format::Json => to_json(&outcome.value),
                Format::Csv => csv_records(&outcome.value)?,
                Format::Md => markdown_evaluation(&outcome.value),
            };
            emit(out.as_ref(), &text)?;
            outcome.status()
        }
        Command::Report { results, format, out } => emit(out.as_ref(), &cmd_report(&results, format)?),
        Command::Train { manifest, classes, cardinality, model_file, features_in, features_out, holdout } => {
            let manifest = manifest.map(|m| Manifest::load(&m)).transpose()?;
            let opts = TrainOptions {
                kind: cardinality,
                seed: cli.seed,
                params: Default::default(),
                model_file,
                features_in,
                features_out,
                holdout,
                max_predicates: ExtractOptions::default().max_predicates,
            };
            let outcome = cmd_train(manifest.as_ref(), &classes, &opts, &rt)?;
            emit(None, &to_json(&outcome.value))?;
            outcome.status()
        }
        Command::Convert { input, to } => emit(None, &cmd_convert(&input, to)?),
    }
}
