//! Uniform orthant walks of length about 100 for the reluctant flagship
//! model (drift (-1,-1,-1)), where naive rejection is hopeless.

use orthant_walks::pipeline::sample_orthant_walks;
use orthant_walks::{Model, ModelOptions, SampleRequest, WeightedStepSet3};

fn main() -> orthant_walks::Result<()> {
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let report = sample_orthant_walks(
        &model,
        &SampleRequest {
            n_min: 95,
            n_max: 105,
            count: 10,
            max_attempts: 10_000_000,
            seed: 1,
            workers: 1,
        },
    )?;
    for w in &report.walks {
        println!("length {:>3}, endpoint {:?}", w.len(), w.endpoint());
    }
    println!("{:?} in {:?}", report.counters, report.wall_time);
    Ok(())
}
