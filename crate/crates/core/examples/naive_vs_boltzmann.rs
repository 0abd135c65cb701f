//! Attempts per accepted walk for naive rejection and for the pipeline.
//!
//! cargo run --release --example naive_vs_boltzmann [-- target_len count]

use orthant_walks::boltzmann::rng_from_seed;
use orthant_walks::cli::bench_window;
use orthant_walks::pipeline::naive_sample;
use orthant_walks::{Error, Model, ModelOptions, SampleReport, WeightedStepSet3};

fn describe(name: &str, r: orthant_walks::Result<SampleReport>) {
    let r = match r {
        Ok(r) => r,
        Err(Error::AttemptsExhausted(r)) => *r,
        Err(e) => {
            println!("{name}: {e}");
            return;
        }
    };
    let c = r.counters;
    println!(
        "{name:>9}: {:>10} attempts, {:>5} accepted, {:>12.1} attempts/walk, {:?}",
        c.free_draws,
        c.accepted,
        c.free_draws as f64 / c.accepted.max(1) as f64,
        r.wall_time
    );
}

fn main() -> orthant_walks::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: usize = args
        .next()
        .map_or(30, |s| s.parse().expect("target length"));
    let count: usize = args.next().map_or(200, |s| s.parse().expect("count"));
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let (lo, hi) = bench_window(target);
    println!("target {target}: naive at exactly {target}, pipeline in [{lo}, {hi}]");
    describe(
        "naive",
        naive_sample(
            &model.stepset,
            target,
            count,
            100_000_000,
            &mut rng_from_seed(7),
        ),
    );
    describe(
        "boltzmann",
        model.sample_walks(lo, hi, count, 10_000_000, &mut rng_from_seed(7)),
    );
    Ok(())
}
