//! The Spambase protocol: 8 random 3600/1001 splits, ICP against CCP with
//! K = 5 and 10, 500 boosted stumps, mean confidence and credibility per seed.
//!
//! cargo run --release --example spambase_table -- path/to/spambase.data [seeds]

use cross_conformal::experiment::{render_table, run_experiment, Method, RunConfig};

fn main() -> cross_conformal::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next().or_else(|| std::env::var("SPAMBASE_PATH").ok()) else {
        eprintln!("usage: spambase_table <spambase.data> [seeds]");
        std::process::exit(2);
    };
    let seeds = args.next().and_then(|s| s.parse().ok()).unwrap_or(8u64);
    let config = RunConfig {
        data_path: path.into(),
        methods: vec![Method::Icp, Method::Ccp],
        folds: Some(vec![5, 10]),
        seeds: (0..seeds).collect(),
        ..RunConfig::default()
    };
    let table = run_experiment(&config)?;
    print!("{}", render_table(&table));
    Ok(())
}
