use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use meanbirds::config::{parse_mask, AnnotationSource, PipelineConfig, Stage};
use meanbirds::io;
use meanbirds::parallel::Pool;
use meanbirds::pipeline::{graph_metrics, Pipeline};
use meanbirds::service::{self, Service, ServiceConfig, SystemClock};
use meanbirds_core::sessionizer::Batch;
use meanbirds_core::UserAccount;

#[derive(Parser)]
#[command(name = "meanbirds", version, about = "Detect bullying and aggressive accounts in a tweet corpus")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Output does not depend on this.
    #[arg(long, short = 'N', global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured stage, skipping those already up to date.
    Run {
        /// Comma-separated subset, e.g. `spamfilter,sessionize`.
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<Stage>>,
    },
    /// Generate a synthetic corpus with planted labels.
    Synth {
        #[arg(long)]
        users: Option<usize>,
    },
    /// Load tweets.jsonl / accounts.jsonl (and an optional edge list).
    Ingest {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        accounts: PathBuf,
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    Spamfilter {
        #[arg(long)]
        hashtag_cutoff: Option<f64>,
        #[arg(long)]
        sim_cutoff: Option<f64>,
        #[arg(long)]
        max_pairwise_tweets: Option<usize>,
    },
    /// Split users' tweets into sessions and sessions into batches.
    Sessionize {
        #[arg(long)]
        gap_hours: Option<f64>,
        #[arg(long)]
        min_tweets: Option<usize>,
    },
    /// Re-batch sessions with other size bounds.
    Batch {
        #[arg(long)]
        min: Option<usize>,
        #[arg(long)]
        max: Option<usize>,
    },
    /// Turn annotation records into ground-truth labels.
    Annotate {
        #[arg(long, value_enum)]
        source: Option<Source>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        panel: Option<usize>,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        groundtruth: Option<PathBuf>,
    },
    /// Network metrics. With `--edges` and `--out` it works on those files alone.
    Graph {
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accounts to include as nodes even without edges (standalone mode).
        #[arg(long)]
        accounts: Option<PathBuf>,
    },
    /// Write features.csv.
    Extract,
    Train {
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long, value_enum)]
        balance: Option<OnOff>,
        /// `model18`, `all`, or a comma-separated column list.
        #[arg(long)]
        mask: Option<String>,
    },
    /// Run the annotation service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Control batches: batch records carrying a `gold_label`.
        #[arg(long)]
        gold: PathBuf,
        /// Batches to label; defaults to batches.jsonl in the output directory.
        #[arg(long)]
        batches: Option<PathBuf>,
        /// Accounts for profile descriptions; defaults to accounts.jsonl in the output directory.
        #[arg(long)]
        accounts: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 3600)]
        timeout_secs: i64,
        /// Replace the bundled label definitions.
        #[arg(long)]
        definitions: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Simulate,
    Records,
    Groundtruth,
}

fn base_config(common: &Common) -> Result<PipelineConfig> {
    let mut config = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(d) = &common.out_dir {
        config.out_dir = d.clone();
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(n) = common.workers {
        config.workers = n;
    }
    Ok(config)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run_stage(config: PipelineConfig, stage: Stage) -> Result<()> {
    Pipeline::new(config)?.run_stages(&[stage])?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut config = base_config(&cli.common)?;
    match cli.command {
        Command::Run { stages } => {
            if stages.is_some() {
                config.stages = stages;
            }
            config.validate()?;
            let report = Pipeline::new(config)?.run()?;
            eprintln!("{} stage(s) ran, {} up to date", report.executed.len(), report.skipped.len());
        }
        Command::Synth { users } => {
            set(&mut config.synth.users, users);
            run_stage(config, Stage::Synth)?;
        }
        Command::Ingest { tweets, accounts, edges } => {
            config.input.tweets = Some(tweets);
            config.input.accounts = Some(accounts);
            if edges.is_some() {
                config.input.edges = edges;
            }
            run_stage(config, Stage::Ingest)?;
        }
        Command::Spamfilter {
            hashtag_cutoff,
            sim_cutoff,
            max_pairwise_tweets,
        } => {
            set(&mut config.spamfilter.hashtag_cutoff, hashtag_cutoff);
            set(&mut config.spamfilter.sim_cutoff, sim_cutoff);
            set(&mut config.spamfilter.max_pairwise_tweets, max_pairwise_tweets);
            run_stage(config, Stage::Spamfilter)?;
        }
        Command::Sessionize { gap_hours, min_tweets } => {
            set(&mut config.sessionize.gap_hours, gap_hours);
            set(&mut config.sessionize.min_tweets, min_tweets);
            run_stage(config, Stage::Sessionize)?;
        }
        Command::Batch { min, max } => {
            set(&mut config.sessionize.batch_min, min);
            set(&mut config.sessionize.batch_max, max);
            run_stage(config, Stage::Sessionize)?;
        }
        Command::Annotate {
            source,
            noise,
            panel,
            records,
            groundtruth,
        } => {
            let a = &mut config.annotate;
            set(
                &mut a.source,
                source.map(|s| match s {
                    Source::Simulate => AnnotationSource::Simulate,
                    Source::Records => AnnotationSource::Records,
                    Source::Groundtruth => AnnotationSource::Groundtruth,
                }),
            );
            set(&mut a.noise, noise);
            set(&mut a.panel, panel);
            if records.is_some() {
                a.records = records;
            }
            if groundtruth.is_some() {
                a.groundtruth = groundtruth;
            }
            run_stage(config, Stage::Annotate)?;
        }
        Command::Graph { edges, out, accounts } => match (edges, out) {
            (Some(edges), Some(out)) => {
                let accounts: Vec<UserAccount> = match accounts {
                    Some(p) => io::read_jsonl(&p)?,
                    None => Vec::new(),
                };
                let pool = Pool::new(config.workers)?;
                let (metrics, summary) = graph_metrics(&accounts, &io::read_edges(&edges)?, &config, &pool);
                io::write_jsonl(&out, &metrics)?;
                println!("{}", serde_json::to_string_pretty(&summary)?);
            }
            (None, None) => run_stage(config, Stage::Graph)?,
            _ => bail!("standalone graph mode needs both --edges and --out"),
        },
        Command::Extract => run_stage(config, Stage::Extract)?,
        Command::Train {
            trees,
            folds,
            repeats,
            classes,
            balance,
            mask,
        } => {
            let t = &mut config.train;
            set(&mut t.trees, trees);
            set(&mut t.folds, folds);
            set(&mut t.repeats, repeats);
            set(&mut t.classes, classes);
            set(&mut t.balance, balance.map(|b| matches!(b, OnOff::On)));
            if let Some(m) = mask {
                parse_mask(&m)?;
                t.mask = m;
            }
            config.validate()?;
            run_stage(config, Stage::Train)?;
        }
        Command::Serve {
            port,
            gold,
            batches,
            accounts,
            log,
            timeout_secs,
            definitions,
        } => {
            let out = &config.out_dir;
            let batches: Vec<Batch> = io::read_jsonl(&batches.unwrap_or_else(|| out.join("batches.jsonl")))
                .context("loading batches to label (run `sessionize` first or pass --batches)")?;
            let controls: Vec<Batch> = io::read_jsonl(&gold)?;
            let accounts_path = accounts.unwrap_or_else(|| out.join("accounts.jsonl"));
            let accounts: Vec<UserAccount> = match accounts_path.exists() {
                true => io::read_jsonl(&accounts_path)?,
                false => Vec::new(),
            };
            let mut sc = ServiceConfig {
                seed: config.seed,
                assignment_timeout_secs: timeout_secs,
                ..ServiceConfig::default()
            };
            if let Some(p) = definitions {
                sc.definitions = io::read_text(&p)?;
            }
            let log = log.unwrap_or_else(|| out.join("annotation_log.jsonl"));
            let svc = Arc::new(Service::open(sc, batches, controls, &accounts, &log, Box::new(SystemClock))?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                service::serve(listener, svc).await
            })?;
        }
    }
    Ok(())
}
