//! Forward sensor simulation.
//!
//! Given a reference high-resolution cube, produces the low-resolution
//! hyperspectral measurement `x_l = D_s H_s u_l + n_l` and the panchromatic
//! image `p = G u + n_p`. Noise is Gaussian and drawn from a seeded ChaCha
//! generator, one stream for the cube and one for the pan image, so each
//! output is reproducible on its own.
//!
//! The noise radii of the solver constraints are `√M σ`, the expected norm
//! of the noise. The true image therefore sits outside a constraint ball
//! about half the time; scale radii with `SolverConfig::radius_scale` when
//! a strictly feasible reference is needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::operators::{downsample_slice, pan_mix, Psf, SensorModel, SpatialBlur};
use crate::tensor::{HyperCube, PanImage, Plane};

const HX_STREAM: u64 = 1;
const PAN_STREAM: u64 = 2;

/// Default Gaussian PSF width, in units of `q` pixels.
pub const DEFAULT_SIGMA_REL: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SimScenario {
    pub reference: HyperCube,
    pub model: SensorModel,
    pub seed: u64,
}

impl SimScenario {
    pub fn new(reference: HyperCube, model: SensorModel, seed: u64) -> Result<Self> {
        model.validate()?;
        model.check_grid(reference.width(), reference.height())?;
        if reference.bands() != model.bands() {
            return Err(Error::Shape(format!(
                "reference has {} bands, sensor model {}",
                reference.bands(),
                model.bands()
            )));
        }
        Ok(Self {
            reference,
            model,
            seed,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn add_noise(data: &mut [f64], sigma: f64, rng: &mut impl Rng) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise level {sigma}: {e}")))?;
    data.iter_mut().for_each(|v| *v += normal.sample(rng));
    Ok(())
}

/// Noiseless `D_s H_s u` for every band.
pub fn blur_and_decimate(cube: &HyperCube, model: &SensorModel) -> Result<HyperCube> {
    model.check_grid(cube.width(), cube.height())?;
    let blur = SpatialBlur::new(&model.psf, cube.width(), cube.height());
    let (w, h) = (cube.width() / model.q, cube.height() / model.q);
    let mut data = Vec::with_capacity(w * h * cube.bands());
    for b in 0..cube.bands() {
        let blurred = blur.apply(cube.band_data(b));
        data.extend(downsample_slice(&blurred, cube.width(), model.q, model.offset, w, h));
    }
    HyperCube::new(w, h, cube.bands(), data)
}

/// Low-resolution hyperspectral measurement.
pub fn degrade_hx(scenario: &SimScenario) -> Result<HyperCube> {
    let clean = blur_and_decimate(&scenario.reference, &scenario.model)?;
    let mut rng = scenario.rng(HX_STREAM);
    let (w, h, l) = (clean.width(), clean.height(), clean.bands());
    let mut data = clean.into_data();
    let pixels = w * h;
    for (b, band) in data.chunks_mut(pixels).enumerate() {
        add_noise(band, scenario.model.sigma_x[b], &mut rng)?;
    }
    HyperCube::new(w, h, l, data)
}

/// Panchromatic measurement.
pub fn degrade_pan(scenario: &SimScenario) -> Result<PanImage> {
    if !(scenario.model.g.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidParameter("spectral weights must have a positive sum".into()));
    }
    let p = pan_mix(&scenario.reference, &scenario.model.g)?;
    let (w, h) = (p.width(), p.height());
    let mut data = p.into_data();
    add_noise(&mut data, scenario.model.sigma_p, &mut scenario.rng(PAN_STREAM))?;
    Plane::new(w, h, data)
}

/// Isotropic Gaussian PSF with standard deviation `sigma_rel · q` pixels,
/// truncated at four standard deviations and normalized to unit sum.
pub fn gaussian_psf(q: usize, sigma_rel: f64) -> Result<Psf> {
    if !(sigma_rel > 0.0) || q == 0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian psf needs q >= 1 and sigma_rel > 0, got q = {q}, sigma_rel = {sigma_rel}"
        )));
    }
    let sigma = sigma_rel * q as f64;
    let radius = (4.0 * sigma).ceil() as usize;
    let size = 2 * radius + 1;
    let mut weights = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let dy = r as f64 - radius as f64;
            let dx = c as f64 - radius as f64;
            weights.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Psf::new(size, size, (radius, radius), weights)
}

/// Parameters of a synthetic piecewise-constant scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    /// Number of shapes painted over the background.
    pub shapes: usize,
    pub seed: u64,
}

/// Piecewise-constant cube whose bands all share the same level lines: a
/// set of random rectangles and discs, each with its own positive spectrum,
/// painted over a background.
pub fn piecewise_constant_scene(spec: &SceneSpec) -> Result<HyperCube> {
    if spec.width == 0 || spec.height == 0 || spec.bands == 0 {
        return Err(Error::InvalidParameter("scene must be nonempty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.width * spec.height;
    let mut label = vec![0usize; n];
    let (w, h) = (spec.width as f64, spec.height as f64);
    for k in 1..=spec.shapes {
        let cx = rng.random_range(0.0..w);
        let cy = rng.random_range(0.0..h);
        let rx = rng.random_range(0.1..0.35) * w;
        let ry = rng.random_range(0.1..0.35) * h;
        let disc = rng.random_bool(0.5);
        for r in 0..spec.height {
            for c in 0..spec.width {
                let dx = (c as f64 - cx) / rx;
                let dy = (r as f64 - cy) / ry;
                let inside = if disc {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if inside {
                    label[r * spec.width + c] = k;
                }
            }
        }
    }
    let spectra: Vec<Vec<f64>> = (0..=spec.shapes)
        .map(|_| {
            let base = rng.random_range(0.15..0.7);
            let amp = rng.random_range(0.0..0.2);
            let freq = rng.random_range(0.5..2.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (0..spec.bands)
                .map(|b| {
                    let t = b as f64 / spec.bands as f64;
                    base + amp * (std::f64::consts::TAU * freq * t + phase).sin()
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * spec.bands);
    for b in 0..spec.bands {
        data.extend(label.iter().map(|&k| spectra[k][b]));
    }
    HyperCube::new(spec.width, spec.height, spec.bands, data)
}
