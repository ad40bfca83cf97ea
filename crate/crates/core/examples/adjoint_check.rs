//! Dot-product test of every linear operator in the model against its adjoint.

use panfuse::operators::*;
use panfuse::sim::gaussian_psf;
use panfuse::{HyperCube, Plane, SensorModel, SplitOperator, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> panfuse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut noise = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let (w, h, l, q) = (12, 8, 5, 2);
    let psf = gaussian_psf(q, 0.5)?;
    let g = vec![0.1, 0.3, 0.2, 0.25, 0.15];
    let model = SensorModel::new(q, psf.clone(), g.clone(), vec![0.0; l], 0.0)?;

    let u = Plane::new(w, h, noise(w * h))?;
    let v = Plane::new(w, h, noise(w * h))?;
    let f = VectorField::new(w, h, noise(w * h), noise(w * h))?;
    let low = Plane::new(w / q, h / q, noise(w * h / (q * q)))?;
    let cube = HyperCube::new(w, h, l, noise(w * h * l))?;
    let other = HyperCube::new(w, h, l, noise(w * h * l))?;

    let report = |name: &str, lhs: f64, rhs: f64| {
        println!("{name:<14} <Au,v> = {lhs:+.12}  <u,A'v> = {rhs:+.12}  gap {:.1e}", (lhs - rhs).abs());
    };
    report("gradient", gradient(&u).dot(&f)?, u.dot(&divergence(&f))?);
    report(
        "decimation",
        spatial_downsample(&u, q, (1, 0))?.dot(&low)?,
        u.dot(&spatial_downsample_adjoint(&low, q, (1, 0))?)?,
    );
    report("spatial blur", spatial_convolve(&u, &psf).dot(&v)?, u.dot(&spatial_convolve_adjoint(&v, &psf))?);
    report("pan mix", pan_mix(&cube, &g)?.dot(&v)?, cube.dot(&pan_mix_adjoint(&v, &g)?)?);
    report(
        "spectral blur",
        spectral_convolve(&cube, &g)?.dot(&other)?,
        cube.dot(&spectral_convolve_adjoint(&other, &g)?)?,
    );

    let op = SplitOperator::new(&model, w, h)?;
    let mut y = op.apply(&other)?;
    y.map_inplace(|a| a * 0.5 - 0.1);
    report("stacked M", op.apply(&cube)?.dot(&y)?, cube.dot(&op.adjoint(&y)?)?);

    // the normal operator is inverted exactly in Fourier space
    let back = op.solve_u_fourier(&op.apply(&cube)?)?;
    let err = back.data().iter().zip(cube.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("(M'M)^-1 M' M u recovers u to {err:.1e}");
    Ok(())
}
