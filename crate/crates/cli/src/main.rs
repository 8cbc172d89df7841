use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use kgrules_cli::commands;
use kgrules_cli::config::{Settings, KEYS};

#[derive(Parser)]
#[command(name = "kgrules", version, about = "Rule learning and evaluation over knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    dataset_dir: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    targets: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    measure: Option<String>,
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Rule length limits as `insA-carB`.
    #[arg(long, global = true)]
    ins_car: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(p) = &self.config {
            s.load_file(p)?;
        }
        for pair in &self.set {
            s.set_pair(pair)?;
        }
        let flags = [
            ("dataset-dir", &self.dataset_dir),
            ("out-dir", &self.out_dir),
            ("targets", &self.targets),
            ("seed", &self.seed),
            ("measure", &self.measure),
            ("workers", &self.workers),
            ("ins-car", &self.ins_car),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        Ok(s)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Learn rules for the target predicates and write one file per target.
    Learn {
        #[command(flatten)]
        common: Common,
    },
    /// Time collective against per-rule evaluation of stored rules.
    BenchEval {
        #[command(flatten)]
        common: Common,
        /// Rule file or directory; defaults to <out-dir>/rules.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Overfitting report of stored rules on the valid and test splits.
    AnalyzeOverfit {
        #[command(flatten)]
        common: Common,
    },
    /// Link prediction with stored rules on the test split.
    Kgc {
        #[command(flatten)]
        common: Common,
        /// Also write per-query rankings to kgc_debug.tsv.
        #[arg(long)]
        debug: bool,
    },
    /// Pool a dataset's splits and redistribute them 6:2:2.
    Resplit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// List every config key with its default.
    Keys,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Learn { common } => {
            let settings = common.settings()?;
            let cfg = settings.resolve()?;
            let summary = commands::learn(&cfg, &settings)?;
            println!("{}", commands::learn_report(&summary));
        }
        Command::BenchEval { common, rules } => {
            let cfg = common.settings()?.resolve()?;
            let rules = rules.unwrap_or_else(|| cfg.rules_dir());
            let timings = commands::bench_eval(&cfg, &rules)?;
            print!("{}", commands::render_timings(&timings));
        }
        Command::AnalyzeOverfit { common } => {
            let cfg = common.settings()?.resolve()?;
            let out = commands::analyze_overfit(&cfg)?;
            println!(
                "{} reports, {} sweep rows written to {}",
                out.reports.len(),
                out.sweep.len(),
                cfg.out_dir.display()
            );
        }
        Command::Kgc { common, debug } => {
            let cfg = common.settings()?.resolve()?;
            let rep = commands::kgc(&cfg, debug)?;
            let m = rep.overall;
            println!(
                "queries {}  MRR {:.4}  hits@1 {:.4}  hits@3 {:.4}  hits@10 {:.4}",
                m.queries, m.mrr, m.hits1, m.hits3, m.hits10
            );
        }
        Command::Resplit { input, output, seed } => {
            let [a, b, c] = commands::resplit(&input, &output, seed)?;
            println!("train {a}, valid {b}, test {c}");
        }
        Command::Keys => {
            for (k, v, d) in KEYS {
                println!("{k:<22}{v:<22}{d}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
