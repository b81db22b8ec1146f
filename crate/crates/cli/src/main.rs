use std::collections::BTreeMap;
use std::fs::File;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eipe_cli::config::{ApiConfig, BackendConfig, LimitOverrides};
use eipe_cli::setup::{build_engine, build_harness};
use eipe_cli::{grade_batch, serve};
use eipe_core::analytics::{self, LabelRecord, StatsOptions, RECONCILED_RATER};
use eipe_core::bank::validate_problem;
use eipe_core::engine::read_log;
use eipe_core::load_bank;

#[derive(Parser)]
#[command(name = "eipe", version, about = "Grade plain-English code explanations by generating and testing code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Mock,
    Http,
}

#[derive(Args)]
struct BackendArgs {
    /// Code generation backend.
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
    /// Canned replies for the mock backend.
    #[arg(long, default_value = "fixtures/mock.toml")]
    fixture: PathBuf,
    /// Chat-completions endpoint for the http backend.
    #[arg(long)]
    llm_url: Option<String>,
    /// Model id sent to the http backend.
    #[arg(long, default_value = "default")]
    model: String,
    /// Per-case run timeout in milliseconds.
    #[arg(long)]
    run_timeout_ms: Option<u64>,
}

impl BackendArgs {
    fn backend(&self) -> Result<BackendConfig> {
        Ok(match self.backend {
            BackendKind::Mock => BackendConfig::Mock {
                fixture: self.fixture.clone(),
            },
            BackendKind::Http => BackendConfig::Http {
                url: self.llm_url.clone().context("--llm-url is required with --backend http")?,
                model: self.model.clone(),
                max_in_flight: None,
                timeout_ms: None,
            },
        })
    }

    fn limits(&self) -> LimitOverrides {
        LimitOverrides {
            run_timeout_ms: self.run_timeout_ms,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    TaskStats,
    Lengths,
    Crosstab,
    Kappa,
}

#[derive(Args)]
struct AnalyzeArgs {
    log: PathBuf,
    #[arg(value_enum)]
    report: Report,
    /// `attempt_id,rater_id,label` file (crosstab, kappa).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Bank used for task titles and lab groups.
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long, default_value_t = analytics::DEFAULT_BIN_WIDTH)]
    bin_width: usize,
    #[arg(long)]
    rater_a: Option<String>,
    #[arg(long)]
    rater_b: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        /// TOML configuration; flags below are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, default_value = "bank")]
        bank: PathBuf,
        /// Append-only attempt log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Show expected and actual observations before a problem is solved.
        #[arg(long)]
        no_redact: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Check that every problem in a bank loads and validates.
    ValidateBank { dir: PathBuf },
    /// Grade a CSV of `user_id,problem_id,prompt_text` rows.
    GradeBatch {
        bank: PathBuf,
        prompts: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Reports over an attempt log.
    Analyze(AnalyzeArgs),
    /// Pass rate of one prompt over repeated sampled generations.
    Reliability {
        bank: PathBuf,
        problem: String,
        prompt_file: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Draw attempts for manual coding, one id per line.
    Sample {
        log: PathBuf,
        #[arg(long, default_value_t = 200)]
        per_problem: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Summarise Likert responses (one code per line or comma-separated).
    Likert {
        responses: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn read_label_file(path: &Path) -> Result<Vec<LabelRecord>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(analytics::read_labels(f)?)
}

fn raters(labels: &[LabelRecord]) -> Vec<String> {
    let mut r: Vec<String> = labels.iter().map(|l| l.rater_id.clone()).collect();
    r.sort();
    r.dedup();
    r
}

/// One label per attempt: the reconciled set if present, the only rater's
/// labels, or the agreement of two raters.
fn final_labels(labels: &[LabelRecord]) -> Result<Vec<LabelRecord>> {
    let rs = raters(labels);
    if rs.iter().any(|r| r == RECONCILED_RATER) {
        return Ok(analytics::by_rater(labels, RECONCILED_RATER));
    }
    match rs.as_slice() {
        [_] => Ok(labels.to_vec()),
        [a, b] => Ok(analytics::reconcile(&analytics::by_rater(labels, a), &analytics::by_rater(labels, b), &[])?),
        _ => bail!("labels come from {} raters; add `{RECONCILED_RATER}` rows", rs.len()),
    }
}

fn analyze(args: AnalyzeArgs) -> Result<String> {
    let AnalyzeArgs { log, report, labels, bank, bin_width, rater_a, rater_b, format } = args;
    let log = read_log(&log)?;
    let labels = labels.as_deref();
    let bank = bank.as_deref().map(load_bank).transpose()?;
    let groups = bank.as_ref().map(|b| b.groups());
    let titles: BTreeMap<String, String> = bank
        .iter()
        .flat_map(|b| b.iter().map(|p| (p.id.clone(), p.title.clone())))
        .collect();
    let need_labels = || -> Result<Vec<LabelRecord>> {
        read_label_file(labels.context("this report needs --labels")?)
    };
    Ok(match report {
        Report::TaskStats => {
            let stats = analytics::task_stats(&log, &StatsOptions::default());
            match format {
                Format::Table => analytics::render_table(&stats, &titles),
                Format::Csv => analytics::task_stats_csv(&stats),
            }
        }
        Report::Lengths => {
            let h = analytics::length_distribution(&log, bin_width, groups.as_ref())?;
            match format {
                Format::Table => analytics::length_distribution_table(&h),
                Format::Csv => analytics::length_distribution_csv(&h),
            }
        }
        Report::Crosstab => {
            let labels = final_labels(&need_labels()?)?;
            let t = analytics::solo_crosstab(&labels, &log, groups.as_ref())?;
            match format {
                Format::Table => analytics::solo_crosstab_table(&t),
                Format::Csv => analytics::solo_crosstab_csv(&t),
            }
        }
        Report::Kappa => {
            let labels = need_labels()?;
            let rs: Vec<String> = raters(&labels).into_iter().filter(|r| r != RECONCILED_RATER).collect();
            let (a, b) = match (rater_a, rater_b) {
                (Some(a), Some(b)) => (a, b),
                _ if rs.len() == 2 => (rs[0].clone(), rs[1].clone()),
                _ => bail!("pick two raters with --rater-a and --rater-b (found {})", rs.join(", ")),
            };
            let k = analytics::cohens_kappa(&analytics::by_rater(&labels, &a), &analytics::by_rater(&labels, &b))?;
            match format {
                Format::Table => format!("raters: {a} vs {b}\n{}", analytics::kappa_table(&k)),
                Format::Csv => analytics::kappa_csv(&k),
            }
        }
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Serve { config, listen, bank, log, no_redact, backend } => {
            let cfg = match config {
                Some(path) => ApiConfig::load(&path)?,
                None => ApiConfig {
                    listen,
                    log,
                    redact_observations: !no_redact,
                    limits: backend.limits(),
                    ..ApiConfig::new(bank, backend.backend()?)
                },
            };
            let mut handle = serve(&cfg)?;
            println!("listening on http://{}", handle.addr);
            handle.join()?;
        }
        Command::ValidateBank { dir } => {
            let harness = build_harness(&LimitOverrides::default())?;
            let bank = load_bank(&dir)?;
            let mut failed = bank.diagnostics.len();
            for d in &bank.diagnostics {
                println!("{}: {}", d.path.display(), d.message);
            }
            for p in bank.iter() {
                let report = validate_problem(p, &harness);
                failed += usize::from(!report.ok());
                println!("{}", report.to_string().trim_end());
            }
            println!("{} problems, {failed} failing", bank.len());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::GradeBatch { bank, prompts, out, backend } => {
            let summary = grade_batch(&bank, &prompts, &out, &backend.backend()?, &backend.limits())?;
            print!("{summary}");
        }
        Command::Analyze(args) => print!("{}", analyze(args)?),
        Command::Reliability { bank, problem, prompt_file, n, format, backend } => {
            let text = std::fs::read_to_string(&prompt_file)
                .with_context(|| format!("reading {}", prompt_file.display()))?;
            let cfg = ApiConfig {
                limits: backend.limits(),
                ..ApiConfig::new(bank, backend.backend()?)
            };
            let engine = build_engine(&cfg)?;
            let r = engine.prompt_reliability(&problem, text.trim_end_matches(['\n', '\r']), n)?;
            match format {
                Format::Table => print!("{}", analytics::reliability_table(&r)),
                Format::Csv => print!("{}", analytics::reliability_csv(&r)),
            }
        }
        Command::Sample { log, per_problem, seed } => {
            for id in analytics::sample_for_coding(&read_log(&log)?, per_problem, seed)? {
                println!("{id}");
            }
        }
        Command::Likert { responses, format } => {
            let text = std::fs::read_to_string(&responses)
                .with_context(|| format!("reading {}", responses.display()))?;
            let s = analytics::likert_summary(&analytics::parse_responses(&text)?)?;
            match format {
                Format::Table => print!("{}", analytics::likert_table(&s)),
                Format::Csv => print!("{}", analytics::likert_csv(&s)),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
