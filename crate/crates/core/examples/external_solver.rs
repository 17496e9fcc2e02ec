//! Driving an out-of-process solver through the file protocol.
//!
//! The example doubles as its own solver: invoked as
//! `external_solver serve <request> <response>` it answers one request for
//! a closed-form two-parameter resonator, reading and writing the JSON
//! files a real simulator wrapper would.
//!
//! ```text
//! cargo run --release --example external_solver
//! ```

use std::f64::consts::PI;
use std::fs;

use taylor_ego::external::{ExternalSolver, Request, Response};
use taylor_ego::testbed::fd_check;
use taylor_ego::{
    driver, DoeConfig, FrequencyGrid, ObjectiveSpec, OptimizerConfig, Parameter, ParameterSpace,
};

// Series LC tank across a 50 ohm port: f0 = 1/(2π√(LC)), loss R.
fn respond(request: &Request) -> Response {
    let (l_nh, c_pf) = (request.parameters[0].value, request.parameters[1].value);
    let (r, z0) = (45.0, 50.0);
    let mut out = Response {
        re: vec![],
        im: vec![],
        d_re: vec![],
        d_im: vec![],
    };
    for &f in &request.frequencies_ghz {
        let w = 2.0 * PI * f * 1e9;
        let (l, c) = (l_nh * 1e-9, c_pf * 1e-12);
        let x = w * l - 1.0 / (w * c);
        // Γ = (Z - z0) / (Z + z0), Z = r + jx, so dΓ/dx = 2j z0 / (Z + z0)²
        let (den_re, den_im) = (r + z0, x);
        let den2 = den_re * den_re + den_im * den_im;
        let g_re = ((r - z0) * den_re + x * den_im) / den2;
        let g_im = (x * den_re - (r - z0) * den_im) / den2;
        let (sq_re, sq_im) = (den_re * den_re - den_im * den_im, 2.0 * den_re * den_im);
        let sq2 = sq_re * sq_re + sq_im * sq_im;
        let (dg_re, dg_im) = (2.0 * z0 * sq_im / sq2, 2.0 * z0 * sq_re / sq2);
        let (dx_dl, dx_dc) = (w * 1e-9, 1.0 / (w * c * c_pf));
        out.re.push(g_re);
        out.im.push(g_im);
        out.d_re.push(vec![dg_re * dx_dl, dg_re * dx_dc]);
        out.d_im.push(vec![dg_im * dx_dl, dg_im * dx_dc]);
    }
    out
}

fn serve(request: &str, response: &str) -> std::io::Result<()> {
    let req: Request = serde_json::from_str(&fs::read_to_string(request)?)?;
    fs::write(response, serde_json::to_vec(&respond(&req))?)
}

fn main() -> taylor_ego::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some("serve") {
        serve(&args[2], &args[3])?;
        return Ok(());
    }

    let space = ParameterSpace::new(vec![
        Parameter::new("l_nh", 2.0, 12.0),
        Parameter::new("c_pf", 0.3, 2.0),
    ])?;
    let grid = FrequencyGrid::uniform(2.0, 3.0, 101)?;
    let spec = ObjectiveSpec::new(vec![2.44], &grid)?;
    let work = std::env::temp_dir().join("taylor-ego-external-example");
    let me = std::env::current_exe()?.to_string_lossy().into_owned();
    let solver = ExternalSolver::new(vec![me, "serve".into()], &work, space.clone(), grid)?;

    let fd = fd_check(&solver, &space, &space.center(), 1e-6)?;
    println!(
        "hand-written derivatives vs finite differences: {:.2e}",
        fd.max_rel_error
    );

    let mut config = OptimizerConfig::new(DoeConfig::Lhs { size: 6 });
    config.max_iterations = 10;
    let (history, best) =
        driver::run_with_progress(&config, &space, &solver, &spec, |r| println!("{r}"))?;
    println!(
        "{} external calls, best {:.2} dB at {:?}",
        history.len(),
        best.objective_value(),
        best.x().values()
    );
    Ok(())
}
