//! Writes the surrogate landscape of the two-optimum testbed before and
//! after optimization, ready for any plotting tool.
//!
//! ```text
//! cargo run --release --example surface_dump -- target/surfaces
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use taylor_ego::testbed::instance;
use taylor_ego::{driver, DesignEvaluation, DoeConfig, GlobalSurrogate, OptimizerConfig};

fn main() -> taylor_ego::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/surfaces".into()),
    );
    fs::create_dir_all(&dir)?;
    let inst = instance("dual-band-2d").expect("shipped instance");
    let (model, spec) = (&inst.model, inst.objective_spec());
    let space = model.space();

    let doe = DoeConfig::FullFactorial { levels: vec![3, 3] };
    let anchors = doe
        .generate(space, 0)?
        .into_iter()
        .map(|x| DesignEvaluation::evaluate(model, x, &spec))
        .collect::<Result<Vec<_>, _>>()?;
    let initial = GlobalSurrogate::new(anchors, space.clone())?;
    initial.write_surface_csv(
        &spec,
        101,
        BufWriter::new(File::create(dir.join("initial.csv"))?),
    )?;

    let mut config = OptimizerConfig::new(doe);
    config.max_iterations = 15;
    let (history, _) = driver::run(&config, space, model, &spec)?;
    let last = GlobalSurrogate::new(history.evaluations().cloned().collect(), space.clone())?;
    last.write_surface_csv(
        &spec,
        101,
        BufWriter::new(File::create(dir.join("final.csv"))?),
    )?;

    println!(
        "wrote {} and {}",
        dir.join("initial.csv").display(),
        dir.join("final.csv").display()
    );
    println!("columns: x1, x2, surrogate objective (dB), error estimate (dB)");
    Ok(())
}
