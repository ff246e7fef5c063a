use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glyphpress_core::metrics::{HeuristicTokenizer, TextTokenizer, VisualTokenModel, VocabTokenizer};
use glyphpress_datagen::SpanPolicy;
use glyphpress_search::Endpoint;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "glyphpress", version, about = "Render long text as page images and measure the compression")]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    /// Where to write the run manifest. Commands with an output directory
    /// default to `run_manifest.json` inside it; the rest print it to stderr.
    #[arg(long, global = true)]
    pub run_manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample or validate rendering configs.
    Config(ConfigArgs),
    /// Render a text file to PNG pages plus a compression report.
    Render(RenderArgs),
    /// Print the compression report of a text under a config.
    Stats(StatsArgs),
    /// Search for a rendering config that balances accuracy and compression.
    Search(SearchArgs),
    /// Generate training samples and their manifest.
    Datagen(DatagenArgs),
    /// Audit rewards and the clipped group objective of rollout groups.
    Rlcheck(RlcheckArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[command(subcommand)]
    pub action: ConfigAction,
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Draw a config from the sampling policy.
    Sample {
        #[arg(long)]
        seed: u64,
        /// document_style, web_style, dark_mode, code_style or artistic_pixel.
        #[arg(long)]
        theme: Option<String>,
        /// Sampling policy JSON replacing the built-in distributions.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file against every rule.
    Validate { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct TokenArgs {
    /// Vision patch size in pixels.
    #[arg(long, default_value_t = 14)]
    pub patch_px: u32,
    /// Patches merged per side into one visual token.
    #[arg(long, default_value_t = 2)]
    pub merge: u32,
    /// Upper bound on visual tokens per page.
    #[arg(long)]
    pub token_cap: Option<u64>,
    /// Vocabulary file, one token per line; the default is the
    /// characters-per-four heuristic.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

impl TokenArgs {
    pub fn vtm(&self) -> Result<VisualTokenModel, CliError> {
        VisualTokenModel::new(self.patch_px, self.merge, self.token_cap).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn tokenizer(&self) -> Result<Box<dyn TextTokenizer>, CliError> {
        Ok(match &self.vocab {
            Some(p) => Box::new(VocabTokenizer::from_file(p).map_err(|e| CliError::Failed(format!("{}: {e}", p.display())))?),
            None => Box::new(HeuristicTokenizer),
        })
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each page's glyph layout as JSON.
    #[arg(long)]
    pub emit_layout: bool,
    #[command(flatten)]
    pub tokens: TokenArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub tokens: TokenArgs,
}

#[derive(Debug, Args)]
pub struct RemoteArgs {
    /// Chat endpoint of the vision-language model under evaluation.
    #[arg(long, env = "GLYPHPRESS_MODEL_URL")]
    pub model_url: Option<String>,
    /// Judge endpoint; without one answers are scored by exact match.
    #[arg(long, env = "GLYPHPRESS_JUDGE_URL")]
    pub judge_url: Option<String>,
    /// Critic endpoint proposing config edits.
    #[arg(long = "critic-endpoint", env = "GLYPHPRESS_CRITIC_URL")]
    pub critic_url: Option<String>,
    #[arg(long, env = "GLYPHPRESS_API_TOKEN", hide_env_values = true)]
    pub api_token: Option<String>,
    #[arg(long, env = "GLYPHPRESS_TIMEOUT_S", default_value_t = 60)]
    pub timeout_s: u64,
    /// Model name sent with every request.
    #[arg(long, default_value = "default")]
    pub model_name: String,
}

impl RemoteArgs {
    pub fn endpoint(&self, url: &str) -> Endpoint {
        Endpoint {
            token: self.api_token.clone(),
            model: self.model_name.clone(),
            timeout: Duration::from_secs(self.timeout_s),
            ..Endpoint::new(url)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Constrained,
    Scalarized,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub seed: u64,
    /// Validation set JSONL. With `--mock` and no set, the synthetic
    /// accuracy landscape is searched instead.
    #[arg(long)]
    pub valset: Option<PathBuf>,
    /// Maximum number of config evaluations.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = PolicyKind::Constrained)]
    pub policy: PolicyKind,
    /// Accuracy tolerance of the constrained policy.
    #[arg(long, default_value_t = 0.02)]
    pub delta: f64,
    /// Compression weight of the scalarized policy.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Compression normalizer of the scalarized policy.
    #[arg(long, default_value_t = 4.0)]
    pub rho_norm: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..))]
    pub population: u64,
    #[arg(long, default_value_t = 2)]
    pub elites: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub patience: u64,
    /// Answer with a deterministic legibility model and never call any endpoint.
    #[arg(long)]
    pub mock: bool,
    /// Continue the history in this file; records already there are replayed.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Output directory for `theta.json` and `history.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub remote: RemoteArgs,
    #[command(flatten)]
    pub tokens: TokenArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Ocr,
    Interleave,
    Generation,
    /// Draw each sample's family from the mixture weights.
    Mix,
    /// Package reasoning responses; the corpus is a JSONL of records.
    Sft,
}

fn parse_pages(s: &str) -> Result<SpanPolicy, String> {
    match s {
        "whole" => Ok(SpanPolicy::Whole),
        "single" => Ok(SpanPolicy::Single),
        _ => {
            let (a, b) = s.split_once('-').unwrap_or((s, s));
            let min = a.parse::<usize>().map_err(|e| format!("{s}: {e}"))?;
            let max = b.parse::<usize>().map_err(|e| format!("{s}: {e}"))?;
            if min == 0 || max < min {
                return Err(format!("{s}: expected MIN-MAX with 1 <= MIN <= MAX"));
            }
            Ok(SpanPolicy::Range { min, max })
        }
    }
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Directory of `.txt` files or a single file.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Fixed config; without one every sample draws its own.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Number of samples; defaults to one per document.
    #[arg(long)]
    pub samples: Option<usize>,
    /// OCR page span: `whole`, `single`, `N` or `MIN-MAX` pages.
    #[arg(long, default_value = "single", value_parser = parse_pages)]
    pub pages: SpanPolicy,
    #[arg(long)]
    pub w_ocr: Option<f64>,
    #[arg(long)]
    pub w_interleave: Option<f64>,
    #[arg(long)]
    pub w_generation: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RlcheckArgs {
    /// JSONL of reward groups: `{"rewards": [...], "records": [...], "responses"?: [...]}`.
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long = "eps-l", default_value_t = 0.2)]
    pub eps_low: f64,
    #[arg(long = "eps-h", default_value_t = 0.28)]
    pub eps_high: f64,
    #[arg(long)]
    pub beta: f64,
}
