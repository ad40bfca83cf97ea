//! Sensitivity of the fused result to the ADMM penalty.

use panfuse::metrics::{rmse, sam};
use panfuse::sim::*;
use panfuse::{PanSharpener, Psf, SensorModel, SolverConfig};

fn main() -> panfuse::Result<()> {
    let reference = piecewise_constant_scene(&SceneSpec {
        width: 32,
        height: 32,
        bands: 8,
        shapes: 6,
        seed: 5,
    })?;
    let q = 2;
    let clean = SensorModel::uniform(q, Psf::box_average(q), 8, 0.0, 0.0)?;
    let scenario = SimScenario::new(reference.clone(), clean, 0)?;
    let (x, p) = (degrade_hx(&scenario)?, degrade_pan(&scenario)?);
    let model = SensorModel::uniform(q, Psf::box_average(q), 8, 1e-4, 1e-4)?;

    println!("{:>8} {:>10} {:>9} {:>12} {:>12}", "beta", "RMSE x100", "SAM deg", "rel primal", "violation");
    for beta in [10.0, 100.0, 1000.0, 1e4, 1e5] {
        let config = SolverConfig {
            beta,
            max_iters: 500,
            ..Default::default()
        };
        let solver = PanSharpener::new(&x, &p, &model, &config)?;
        let (u, report) = solver.run()?;
        let last = report.last().expect("at least one iteration");
        println!(
            "{beta:>8.0e} {:>10.4} {:>9.4} {:>12.2e} {:>12.2e}",
            100.0 * rmse(&u, &reference)?,
            sam(&u, &reference)?,
            last.relative_primal,
            solver.constraints(&u)?.relative_violation()
        );
    }
    Ok(())
}
