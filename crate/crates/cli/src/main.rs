use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use graphdrift::detector::default_horizon;
use graphdrift::ged::{pairwise_distances, BipartiteGed};
use graphdrift::rng::{derive_seed, rng_from};
use graphdrift_cli::config::ExperimentSpec;
use graphdrift_cli::experiment::{collections, run_experiment, thresholds, RunContext};
use graphdrift_cli::report::{load_summary, table_row, write_outcome, TABLE_HEADER};
use graphdrift_cli::validate::{validate_theory, TheoryOptions, BOUNDS_FILE};
use log::info;
use rand::seq::IndexedRandom;

#[derive(Parser)]
#[command(name = "graphdrift", version, about = "Change detection in streams of attributed graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment config file or preset name (L-D2, L-D5, L-O, L-S, MUT, AIDS).
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory holding the IAM datasets.
    #[arg(long, global = true, env = "GRAPHDRIFT_DATA")]
    dataset_root: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the threshold table for M and ARL0.
    Calibrate {
        #[arg(long = "M", short = 'M')]
        m: Option<usize>,
        #[arg(long)]
        arl0: Option<usize>,
        #[arg(long)]
        num_sims: Option<usize>,
    },
    /// Run an experiment and write metrics.csv, summary.json and a trace.
    Run {
        /// Override the detector window size.
        #[arg(long)]
        n: Option<usize>,
        /// Override the number of prototypes.
        #[arg(long = "M", short = 'M')]
        m: Option<usize>,
    },
    /// Time distance computations and calibration.
    Bench {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Check the distance bounds on random graphs and write bounds.json.
    ValidateTheory {
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long, default_value_t = 10_000)]
        frechet_trials: usize,
    },
    /// Print the aggregate table for finished runs.
    Report {
        /// Run directories; defaults to --out-dir.
        dirs: Vec<PathBuf>,
    },
}

fn spec(global: &GlobalArgs) -> anyhow::Result<ExperimentSpec> {
    let name = global.config.as_deref().context("--config is required")?;
    let mut spec = ExperimentSpec::load(name)?;
    if let Some(s) = global.seed {
        spec.seed = s;
    }
    if let Some(r) = global.replicates {
        spec.replicates = r;
    }
    Ok(spec)
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let ctx = RunContext {
        dataset_root: g.dataset_root.clone(),
        out_dir: Some(g.out_dir.clone()),
    };

    match cli.command {
        Command::Calibrate { m, arl0, num_sims } => {
            let base = g.config.as_ref().map(|_| spec(g)).transpose()?;
            let m = m.or(base.as_ref().map(|s| s.effective_m())).context("--M or --config needed")?;
            let arl0 = arl0.or(base.as_ref().map(|s| s.arl0_target)).unwrap_or(200);
            let sims = num_sims.or(base.as_ref().map(|s| s.num_sims)).unwrap_or(1_000_000);
            let seed = derive_seed(g.seed.or(base.as_ref().map(|s| s.seed)).unwrap_or(0), 1);
            let start = Instant::now();
            let table = thresholds(m, arl0, sims, seed, Some(&g.out_dir))?;
            println!(
                "M = {m}, ARL0 = {arl0}: q = {:.4}, h_1 = {:.4}, h_{} = {:.4} ({:.1?})",
                table.offset,
                table.threshold(1),
                table.horizon,
                table.threshold(table.horizon),
                start.elapsed()
            );
        }
        Command::Run { n, m } => {
            let mut spec = spec(g)?;
            if let Some(n) = n {
                spec.n = n;
            }
            if let Some(m) = m {
                spec.m = m;
            }
            let start = Instant::now();
            let outcome = run_experiment(&spec, &ctx)?;
            write_outcome(&g.out_dir, &outcome)?;
            info!("{} replicates in {:.1?}", outcome.replicates.len(), start.elapsed());
            println!("{TABLE_HEADER}");
            println!("{}", table_row(&graphdrift_cli::report::Summary::new(&outcome)));
            if !outcome.failures.is_empty() {
                for (r, e) in &outcome.failures {
                    eprintln!("replicate {r} failed: {e}");
                }
                bail!("{} replicates failed", outcome.failures.len());
            }
        }
        Command::Bench { pairs } => {
            let spec = spec(g)?;
            let t = Instant::now();
            let data = collections(&spec, &ctx)?;
            println!(
                "loaded {} nominal and {} non-nominal graphs in {:.1?}",
                data.nominal.len(),
                data.non_nominal.len(),
                t.elapsed()
            );
            let mut rng = rng_from(spec.seed);
            let count = ((pairs as f64).sqrt().ceil() as usize).max(2);
            let sample: Vec<_> = data.nominal.choose_multiple(&mut rng, count).cloned().collect();
            let d = BipartiteGed::new(spec.cost_model.model());
            let t = Instant::now();
            pairwise_distances(&sample, &d)?;
            let done = sample.len() * (sample.len() - 1) / 2;
            println!("bipartite GED: {done} pairs in {:.1?}", t.elapsed());
            let t = Instant::now();
            graphdrift::detector::calibrate_thresholds(spec.effective_m(), spec.arl0_target, 100 * spec.arl0_target, default_horizon(spec.arl0_target), 0)?;
            println!(
                "calibration (M = {}, {} trajectories): {:.1?}",
                spec.effective_m(),
                100 * spec.arl0_target,
                t.elapsed()
            );
        }
        Command::ValidateTheory { pairs, frechet_trials } => {
            let opts = TheoryOptions {
                pairs,
                frechet_trials,
                seed: g.seed.unwrap_or(1),
                ..TheoryOptions::default()
            };
            let report = validate_theory(&opts)?;
            std::fs::create_dir_all(&g.out_dir)?;
            let path = g.out_dir.join(BOUNDS_FILE);
            std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            for b in [&report.lemma2, &report.distance_chain, &report.lemma4, &report.lemma4_homogeneous] {
                println!("{:<20} {} / {} pairs violate", b.bound_name, b.violations, b.pairs_tested);
            }
            for f in &report.frechet {
                println!(
                    "frechet n = {:<3} E[V] = {:.4} expected {:.4} (se {:.4})",
                    f.sample_size, f.mean_variation, f.expected_variation, f.standard_error
                );
            }
            println!(
                "bipartite triangle violations: {} / {}; v2 = {:.4}",
                report.ged.bipartite_triangle_violations, report.ged.triples, report.v2.v2
            );
            println!("wrote {}", path.display());
        }
        Command::Report { dirs } => {
            let dirs = if dirs.is_empty() { vec![g.out_dir.clone()] } else { dirs };
            println!("{TABLE_HEADER}");
            for d in dirs {
                println!("{}", table_row(&load_summary(&d)?));
            }
        }
    }
    Ok(())
}
