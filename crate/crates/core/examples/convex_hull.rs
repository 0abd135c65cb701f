//! Convex hull of the simultaneous positions of many walks, step by step.

use orthant_walks::boltzmann::rng_from_seed;
use orthant_walks::hull::convex_hull_3d;
use orthant_walks::io::{hull_obj_string, positions_at};
use orthant_walks::{Error, Model, ModelOptions, WeightedStepSet3};

fn main() -> orthant_walks::Result<()> {
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let report = model.sample_walks(50, 60, 40, 10_000_000, &mut rng_from_seed(11))?;
    for t in [0, 1, 2, 5, 10, 20, 40, 60] {
        let points = positions_at(&report.walks, t);
        match convex_hull_3d(&points) {
            Ok(mesh) => println!(
                "step {t:>2}: {} hull vertices, {} faces",
                mesh.vertices.len(),
                mesh.faces.len()
            ),
            Err(Error::DegenerateHull) => println!("step {t:>2}: positions are coplanar"),
            Err(e) => return Err(e),
        }
    }
    let mesh = convex_hull_3d(&positions_at(&report.walks, 30))?;
    let path = std::env::temp_dir().join("hull_step_30.obj");
    std::fs::write(&path, hull_obj_string(&mesh))?;
    println!("wrote {}", path.display());
    Ok(())
}
