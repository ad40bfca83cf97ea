//! End-to-end fusion on a synthetic scene, compared with nearest-neighbour
//! upsampling.
//!
//!     cargo run --release --example sharpen -- [q] [iterations] [csv path]

use panfuse::metrics::{ergas, rmse, sam};
use panfuse::operators::nearest_upsample;
use panfuse::sim::*;
use panfuse::{PanSharpener, Psf, SensorModel, SolverConfig};

fn main() -> panfuse::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let q: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let iters: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(300);

    let reference = piecewise_constant_scene(&SceneSpec {
        width: 64,
        height: 64,
        bands: 16,
        shapes: 10,
        seed: 3,
    })?;
    let sigma = 1e-4;
    let model = SensorModel::uniform(q, Psf::box_average(q), 16, sigma, sigma)?;
    let scenario = SimScenario::new(reference.clone(), model.clone(), 0)?;
    let x = degrade_hx(&scenario)?;
    let p = degrade_pan(&scenario)?;

    let config = SolverConfig {
        max_iters: iters,
        log_every: 25,
        ..Default::default()
    };
    let solver = PanSharpener::new(&x, &p, &model, &config)?;
    let start = std::time::Instant::now();
    let (u, report) = solver.run()?;
    println!("{} iterations in {:.2?}", report.iterations, start.elapsed());
    println!("{:>6} {:>12} {:>12} {:>12}", "iter", "objective", "rel primal", "hx slack");
    for r in &report.records {
        println!("{:>6} {:>12.4} {:>12.3e} {:>12.3e}", r.iteration, r.objective, r.relative_primal, r.hx_slack);
    }
    if let Some(path) = args.get(2) {
        report.write_csv(path)?;
        println!("convergence log written to {path}");
    }

    let baseline = nearest_upsample(&x, q);
    println!("\n{:<22} {:>10} {:>10} {:>10}", "", "RMSE x100", "ERGAS", "SAM deg");
    for (name, est) in [("nearest neighbour", &baseline), ("level-line + TV", &u)] {
        println!(
            "{name:<22} {:>10.4} {:>10.4} {:>10.4}",
            100.0 * rmse(est, &reference)?,
            ergas(est, &reference, q)?,
            sam(est, &reference)?
        );
    }
    Ok(())
}
