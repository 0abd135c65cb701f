//! Endpoint distribution of sampled walks against exact counts.

use orthant_walks::pipeline::sample_orthant_walks;
use orthant_walks::{
    count_orthant_walks, endpoint_chi_square, endpoint_rmse, endpoint_tally, frequencies, Model,
    ModelOptions, SampleRequest, WeightedStepSet3,
};

fn main() -> orthant_walks::Result<()> {
    let n = 8;
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let exact = count_orthant_walks(&model.stepset, n)?;
    println!(
        "{} weighted orthant walks of length {n}, {} endpoints",
        exact.total(n),
        exact.level(n).len()
    );
    for (i, count) in [100, 1_000, 10_000, 100_000].into_iter().enumerate() {
        let report = sample_orthant_walks(
            &model,
            &SampleRequest {
                n_min: n,
                n_max: n,
                count,
                max_attempts: u64::MAX,
                seed: i as u64,
                workers: 1,
            },
        )?;
        let tally = endpoint_tally(&report.walks);
        let rmse = endpoint_rmse(&frequencies(&tally), &exact, n)?;
        let chi = endpoint_chi_square(&tally, &exact, n)?;
        println!(
            "{count:>7} samples: RMSE {rmse:.3e}, chi-square p {:.3}",
            chi.p_value
        );
    }
    Ok(())
}
