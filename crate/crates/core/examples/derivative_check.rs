//! Analytic derivatives against central differences on every testbed.
//!
//! Also shows the check catching a model whose derivative map is wrong.
//!
//! ```text
//! cargo run --release --example derivative_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taylor_ego::testbed::{fd_check, instance, INSTANCE_NAMES};
use taylor_ego::{ResonatorModel, Solver};

fn main() -> taylor_ego::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in INSTANCE_NAMES {
        let inst = instance(name).expect("shipped instance");
        let space = inst.model.space();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u: Vec<f64> = (0..space.dim())
                .map(|_| rng.random_range(0.01..0.99))
                .collect();
            worst = worst
                .max(fd_check(&inst.model, space, &space.denormalize(&u), 1e-6)?.max_rel_error);
        }
        println!("{name:<15} worst relative error over 100 points: {worst:.2e}");
    }

    let inst = instance("dual-band-2d").expect("shipped instance");
    let center = inst.model.space().center();
    for step in [1e-3, 5e-4, 2.5e-4] {
        let r = fd_check(&inst.model, inst.model.space(), &center, step)?;
        println!("step {step:.1e}: {:.3e}", r.max_rel_error);
    }

    let mut broken = inst.model.resonances().to_vec();
    broken[0].derivative_freq_sensitivity = Some(vec![0.26, 0.03]);
    let model = ResonatorModel::new(
        inst.model.space().clone(),
        inst.model.grid().clone(),
        broken,
    )?;
    let r = fd_check(&model, model.space(), &center, 1e-6)?;
    println!(
        "corrupted map: {:.3e}, worst (node, parameter, imaginary) = {:?}",
        r.max_rel_error, r.worst
    );
    Ok(())
}
