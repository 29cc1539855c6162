use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cross_conformal::experiment::{
    parse_eps_grid, render_table, run_experiment, write_outputs, LearnerKind, Method, OutputFormat,
    RunConfig,
};
use cross_conformal::learners::BoostingConfig;
use cross_conformal::{Error, Result};

/// Inductive and cross-conformal predictors on a binary-labeled CSV.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Headerless CSV; the last column is the 0/1 label.
    #[arg(long)]
    data: PathBuf,
    /// Comma list of icp, ccp, naive-ccp.
    #[arg(long, default_value = "icp,ccp")]
    method: String,
    /// Comma list of fold counts for ccp / naive-ccp [default: 5].
    #[arg(long)]
    folds: Option<String>,
    /// ICP proper-training:calibration proportion [default: 2:1].
    #[arg(long)]
    split_ratio: Option<String>,
    #[arg(long, default_value = "boost", value_parser = ["boost", "baseline", "external"])]
    learner: String,
    #[arg(long, default_value_t = 500)]
    trees: usize,
    #[arg(long, default_value_t = 0.1)]
    shrinkage: f64,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value_t = 1.0)]
    bag_fraction: f64,
    /// Comma list of seeds, or a range `a..b` (exclusive).
    #[arg(long, default_value = "0..8")]
    seeds: String,
    #[arg(long, default_value_t = 3600)]
    train_size: usize,
    /// `full`, `corner`, `full+corner`, `start:stop:step` or a comma list.
    #[arg(long, default_value = "full+corner")]
    eps_grid: String,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output directory; results only go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root of the external score files (see the README).
    #[arg(long)]
    scores_dir: Option<PathBuf>,
}

fn comma_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} `{p}`")))
        })
        .collect()
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad seed range `{s}`")))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad seed range `{s}`")))?;
            Ok((a..b).collect())
        }
        None => comma_list(s, "seed"),
    }
}

fn parse_ratio(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("bad split ratio `{s}`, expected a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn config(args: &Args) -> Result<RunConfig> {
    let methods = args
        .method
        .split(',')
        .map(|m| m.trim().parse::<Method>())
        .collect::<Result<Vec<_>>>()?;
    Ok(RunConfig {
        data_path: args.data.clone(),
        methods,
        folds: args
            .folds
            .as_deref()
            .map(|f| comma_list(f, "fold count"))
            .transpose()?,
        split_ratio: args.split_ratio.as_deref().map(parse_ratio).transpose()?,
        learner: args.learner.parse::<LearnerKind>()?,
        boosting: BoostingConfig {
            num_trees: args.trees,
            shrinkage: args.shrinkage,
            interaction_depth: args.depth,
            bag_fraction: args.bag_fraction,
            ..BoostingConfig::default()
        },
        seeds: parse_seeds(&args.seeds)?,
        train_size: args.train_size,
        eps_grid: parse_eps_grid(&args.eps_grid)?,
        format: args.format.parse::<OutputFormat>()?,
        out: args.out.clone(),
        scores_dir: args.scores_dir.clone(),
    })
}

fn run(args: &Args) -> Result<()> {
    let config = config(args)?;
    config.validate()?;
    let table = run_experiment(&config)?;
    print!("{}", render_table(&table));
    if let Some(dir) = &config.out {
        for path in write_outputs(&table, config.format, dir)? {
            log::info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
