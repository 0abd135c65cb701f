//! Set-up phase for a model: half-space, 1D projection, grammar and
//! generating-function values.
//!
//! cargo run --example analyze_flagship [-- path/to/model.json]

use orthant_walks::cli::analysis_document;
use orthant_walks::io::ModelFile;
use orthant_walks::{Model, ModelOptions, WeightedStepSet3};

fn main() -> orthant_walks::Result<()> {
    let stepset = match std::env::args().nth(1) {
        Some(path) => ModelFile::load(path.as_ref())?.stepset()?,
        None => WeightedStepSet3::flagship(),
    };
    let model = Model::build(stepset, &ModelOptions::default())?;
    println!(
        "drift {:?} ({:?})",
        model.drift.as_array(),
        model.drift.class
    );
    println!(
        "minimizer {:?}, S_min = {:.9}",
        model.minimizer.point, model.minimizer.s_min
    );
    println!(
        "projection {:?} -> {:?} ({:?} branch)",
        model.vector.components(),
        model.projection.coefficients,
        model.vector.branch()
    );
    println!(
        "1D steps (value, weight): {:?}",
        model.step1d.value_multiset()
    );
    println!(
        "tau = {:.9}, A(tau) = {:.9}, rho = {:.9}",
        model.growth.tau, model.growth.a_tau, model.growth.rho
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&analysis_document(&model)).unwrap()
    );
    Ok(())
}
