//! Writes sampled walks as PLY (hue from red to magenta along each walk),
//! OBJ polylines and CSV positions.
//!
//! cargo run --example export_ply [-- output_dir]

use std::path::PathBuf;

use orthant_walks::boltzmann::rng_from_seed;
use orthant_walks::io::{export_string, ExportFormat};
use orthant_walks::{Model, ModelOptions, WeightedStepSet3};

fn main() -> orthant_walks::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| ".".into()).into();
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let report = model.sample_walks(40, 60, 5, 10_000_000, &mut rng_from_seed(3))?;
    for (format, ext) in [
        (ExportFormat::Ply, "ply"),
        (ExportFormat::Obj, "obj"),
        (ExportFormat::Csv, "csv"),
    ] {
        let path = dir.join(format!("walks.{ext}"));
        std::fs::write(&path, export_string(format, &report.walks))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
