//! Degrades a scene into a low-resolution hyperspectral cube and a
//! panchromatic image, and compares the drawn noise with the constraint radii.

use panfuse::operators::pan_mix;
use panfuse::sim::*;
use panfuse::{Psf, SensorModel};

fn main() -> panfuse::Result<()> {
    let reference = piecewise_constant_scene(&SceneSpec {
        width: 32,
        height: 32,
        bands: 6,
        shapes: 5,
        seed: 1,
    })?;
    let q = 4;
    let sigma = 0.01;
    let model = SensorModel::uniform(q, gaussian_psf(q, DEFAULT_SIGMA_REL)?, 6, sigma, sigma)?;
    let scenario = SimScenario::new(reference.clone(), model.clone(), 42)?;

    let x = degrade_hx(&scenario)?;
    let p = degrade_pan(&scenario)?;
    println!("reference {}x{}x{}", reference.width(), reference.height(), reference.bands());
    println!("hyperspectral {}x{}x{}, pan {}x{}", x.width(), x.height(), x.bands(), p.width(), p.height());

    // the noise norm sits near sqrt(M) sigma, on either side of it
    let clean = blur_and_decimate(&reference, &model)?;
    let radius = (x.pixels() as f64).sqrt() * sigma;
    for b in 0..x.bands() {
        let n: f64 = x.band_data(b).iter().zip(clean.band_data(b)).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        println!("band {}: |n| = {n:.4}, radius = {radius:.4}, inside = {}", b + 1, n <= radius);
    }
    let clean_p = pan_mix(&reference, &model.g)?;
    let n: f64 = p.data().iter().zip(clean_p.data()).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
    println!("pan: |n| = {n:.4}, radius = {:.4}", (p.len() as f64).sqrt() * sigma);

    // box averaging is the other common choice
    let boxed = SensorModel::uniform(q, Psf::box_average(q), 6, 0.0, 0.0)?;
    let low = blur_and_decimate(&reference, &boxed)?;
    println!("box-average band 1 mean {:.4} vs reference {:.4}", low.band(1)?.mean(), reference.band(1)?.mean());
    Ok(())
}
