//! Nine-parameter dual-band tuning under a 60-call budget.
//!
//! Two resonances serve the 2.4 and 5.8 GHz bands and compete for shared
//! coupling parameters, so the best design balances both notches.
//!
//! ```text
//! cargo run --release --example nine_parameters [seed]
//! ```

use taylor_ego::testbed::{instance, random_search_oracle};
use taylor_ego::{driver, DoeConfig, OptimizerConfig};

fn main() -> taylor_ego::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let inst = instance("dual-band-9d").expect("shipped instance");
    let (model, spec) = (&inst.model, inst.objective_spec());
    let space = model.space();

    let mut config = OptimizerConfig::new(DoeConfig::Lhs { size: 20 });
    config.max_iterations = 20;
    config.stagnation_limit = 20;
    config.doe_seed = seed;
    config.ei_seed = seed;
    config.parallel_evals = true;

    let (history, best) =
        driver::run_with_progress(&config, space, model, &spec, |r| println!("{r}"))?;
    let oracle = random_search_oracle(model, &spec, 100_000, 7)?;
    println!(
        "{} solver calls, best {:.3} dB",
        history.len(),
        best.objective_value()
    );
    println!("random search with 100000 samples: {:.3} dB", oracle.value);
    for (p, v) in space.params().iter().zip(best.x().values()) {
        println!("  {:<6} {v:>8.4}  in [{}, {}]", p.name, p.lower, p.upper);
    }
    Ok(())
}
