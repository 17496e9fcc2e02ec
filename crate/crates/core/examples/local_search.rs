//! Shrinking trust-region search on the single-band testbeds.
//!
//! Starts at the box centre and prints every solver call, the way a
//! designer would watch a tuning run converge.
//!
//! ```text
//! cargo run --release --example local_search
//! ```

use taylor_ego::local_model::run_local;
use taylor_ego::testbed::{grid_oracle, instance, ORACLE_RESOLUTION};
use taylor_ego::{DesignEvaluation, LocalConfig};

fn main() -> taylor_ego::Result<()> {
    for name in ["single-band-1d", "single-band-2d"] {
        let inst = instance(name).expect("shipped instance");
        let (model, spec) = (&inst.model, inst.objective_spec());
        let space = model.space();
        let oracle = grid_oracle(model, &spec, ORACLE_RESOLUTION)?;
        println!(
            "{name}: oracle optimum {:.3} dB at {:?}",
            oracle[0].value,
            oracle[0].x.values()
        );

        let start = DesignEvaluation::evaluate(model, space.center(), &spec)?;
        let history = run_local(start, &LocalConfig::default(), model, &spec, space)?;
        let mut best = f64::INFINITY;
        for (call, e) in history.iter().enumerate() {
            best = best.min(e.objective_value());
            println!(
                "  call {:>2}  {:>9.3} dB  best {:>9.3} dB  x = {:?}",
                call + 1,
                e.objective_value(),
                best,
                e.x().values()
            );
        }
    }
    Ok(())
}
