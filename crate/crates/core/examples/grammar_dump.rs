//! Prints the meander grammar of a few 1D stepsets together with the first
//! coefficients of each nonterminal, checked against the height recurrence.

use orthant_walks::grammar::{build_meander_grammar, count_walks_dp, grammar_counts};
use orthant_walks::StepSet1D;

fn main() -> orthant_walks::Result<()> {
    let sets: [&[(i64, u64)]; 3] = [
        &[(1, 3), (-1, 6)],
        &[(1, 1), (-2, 1)],
        &[(0, 4), (1, 1), (-1, 2)],
    ];
    for values in sets {
        let a = StepSet1D::from_weighted_values(values)?;
        let g = build_meander_grammar(&a)?;
        println!("steps {values:?}");
        println!("{}", g.dump());
        let table = grammar_counts(&g, 12);
        for (i, nt) in g.nonterminals().iter().enumerate() {
            let coeffs: Vec<String> = table.series(i).iter().map(|c| c.to_string()).collect();
            println!("  {:>6}: {}", nt.name, coeffs.join(" "));
        }
        let dp = count_walks_dp(&a, 12);
        let agree = (0..=12).all(|n| table.series(g.start())[n] == dp.meanders(n));
        println!("  meander counts agree with the height recurrence: {agree}\n");
    }
    Ok(())
}
