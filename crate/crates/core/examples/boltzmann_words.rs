//! Draws 1D meanders of the flagship projection with the singular Boltzmann
//! sampler and prints them as height profiles.

use orthant_walks::boltzmann::{rng_from_seed, Draw};
use orthant_walks::{Model, ModelOptions, WeightedStepSet3};

fn main() -> orthant_walks::Result<()> {
    let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default())?;
    let sampler = model.sampler();
    println!("x0 = {}", sampler.x0());
    let mut rng = rng_from_seed(2024);
    let mut shown = 0;
    while shown < 8 {
        match sampler.sample_word(60, &mut rng) {
            Draw::Oversize => continue,
            Draw::Word(w) => {
                let mut h = 0;
                let profile: String = w
                    .atoms
                    .iter()
                    .map(|a| {
                        let v = model.step1d.atom(*a).unwrap().value;
                        h += v;
                        if v > 0 {
                            '/'
                        } else {
                            '\\'
                        }
                    })
                    .collect();
                println!("len {:>2} end {:>2}  {profile}", w.len(), h);
                shown += 1;
            }
        }
    }
    let (word, stats) = sampler.sample_in_window(40, 44, 10_000_000, &mut rng)?;
    println!(
        "\none word with length in [40, 44]: {} atoms after {:?}",
        word.len(),
        stats
    );
    Ok(())
}
