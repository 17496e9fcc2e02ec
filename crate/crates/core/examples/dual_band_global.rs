//! Global search on the two-optimum testbed.
//!
//! Started from a 3x3 factorial, a pure local search gets trapped in
//! whichever basin it starts in. The combined global/local loop visits
//! both optima and ends in the better one.
//!
//! ```text
//! cargo run --release --example dual_band_global
//! ```

use taylor_ego::local_model::run_local;
use taylor_ego::testbed::{grid_oracle, instance, ORACLE_RESOLUTION};
use taylor_ego::{driver, DesignEvaluation, DoeConfig, LocalConfig, OptimizerConfig};

fn main() -> taylor_ego::Result<()> {
    let inst = instance("dual-band-2d").expect("shipped instance");
    let (model, spec) = (&inst.model, inst.objective_spec());
    let space = model.space();

    let optima = grid_oracle(model, &spec, ORACLE_RESOLUTION)?;
    for (i, o) in optima.iter().enumerate() {
        println!(
            "oracle optimum {i}: {:.3} dB at {:?}",
            o.value,
            o.x.values()
        );
    }

    // a start in the basin of the weaker optimum
    let start = DesignEvaluation::evaluate(model, space.denormalize(&[0.7, 0.3]), &spec)?;
    let trapped = run_local(start, &LocalConfig::default(), model, &spec, space)?;
    let last = trapped.last().expect("non-empty");
    println!(
        "local search alone: {:.3} dB at {:?}",
        last.objective_value(),
        last.x().values()
    );

    let mut config = OptimizerConfig::new(DoeConfig::FullFactorial { levels: vec![3, 3] });
    config.max_iterations = 15;
    let (history, best) =
        driver::run_with_progress(&config, space, model, &spec, |r| println!("{r}"))?;
    println!(
        "global run: {:.3} dB at {:?} after {} calls",
        best.objective_value(),
        best.x().values(),
        history.len()
    );
    for o in &optima {
        let nearest = history
            .evaluations()
            .map(|e| space.distance(e.x(), &o.x).expect("in bounds"))
            .fold(f64::INFINITY, f64::min);
        println!(
            "  closest visit to the {:.3} dB optimum: {nearest:.2e} (normalized)",
            o.value
        );
    }
    Ok(())
}
