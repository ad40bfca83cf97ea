//! Linear sensing and splitting operators, each paired with its exact adjoint.
//!
//! Boundaries are periodic everywhere so that every spatial operator is a
//! circulant matrix and every spectral operator a circulant along the band
//! axis. That makes the normal operator `MᵀM` diagonal in the 3-D Fourier
//! basis, which is what [`SplitOperator::solve_u_fourier`] relies on.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{take_real, to_complex, Fft2, Fft3, SpectralFft};
use crate::tensor::{HyperCube, PanImage, Plane, VectorField};

/// Default relative threshold below which the level-line direction is zeroed.
pub const DEFAULT_ETA_EPS_REL: f64 = 1e-8;

/// Spatial point spread function.
///
/// Tap `(row, col)` of `weights` acts at spatial offset
/// `(row - origin.0, col - origin.1)`, i.e. the blurred image is
/// `(H u)(i) = Σ_a w_a · u(i - offset_a)` with periodic wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Psf {
    width: usize,
    height: usize,
    origin: (usize, usize),
    weights: Vec<f64>,
}

impl Psf {
    pub fn new(width: usize, height: usize, origin: (usize, usize), weights: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || weights.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "psf of {}x{} needs {} weights, got {}",
                width,
                height,
                width * height,
                weights.len()
            )));
        }
        if origin.0 >= height || origin.1 >= width {
            return Err(Error::InvalidParameter("psf origin outside the kernel".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("psf weight".into()));
        }
        Ok(Self {
            width,
            height,
            origin,
            weights,
        })
    }

    /// Identity blur.
    pub fn delta() -> Self {
        Self {
            width: 1,
            height: 1,
            origin: (0, 0),
            weights: vec![1.0],
        }
    }

    /// Uniform average over the `q × q` block that starts at the output pixel,
    /// so decimation at block offset `(0, 0)` returns each block's mean.
    pub fn box_average(q: usize) -> Self {
        let q = q.max(1);
        Self {
            width: q,
            height: q,
            origin: (q - 1, q - 1),
            weights: vec![1.0 / (q * q) as f64; q * q],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight at signed offset `(dr, dc)`, zero outside the support.
    pub fn at_offset(&self, dr: isize, dc: isize) -> f64 {
        let r = dr + self.origin.0 as isize;
        let c = dc + self.origin.1 as isize;
        if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
            0.0
        } else {
            self.weights[r as usize * self.width + c as usize]
        }
    }

    /// `(row offset, col offset, weight)` for every tap.
    pub fn taps(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(k, &w)| {
            let r = (k / self.width) as isize - self.origin.0 as isize;
            let c = (k % self.width) as isize - self.origin.1 as isize;
            (r, c, w)
        })
    }

    /// Kernel wrapped onto a periodic `width × height` grid.
    pub fn embed(&self, width: usize, height: usize) -> Vec<f64> {
        let mut grid = vec![0.0; width * height];
        for (dr, dc, w) in self.taps() {
            let r = dr.rem_euclid(height as isize) as usize;
            let c = dc.rem_euclid(width as isize) as usize;
            grid[r * width + c] += w;
        }
        grid
    }
}

/// Sensor description shared by the simulator and the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    /// Resolution factor between the hyperspectral and panchromatic grids.
    pub q: usize,
    pub psf: Psf,
    /// Panchromatic spectral weights, one per band.
    pub g: Vec<f64>,
    /// Per-band hyperspectral noise standard deviation.
    pub sigma_x: Vec<f64>,
    pub sigma_p: f64,
    /// Row/column of the pixel kept in each `q × q` block.
    pub offset: (usize, usize),
}

impl SensorModel {
    pub fn new(q: usize, psf: Psf, g: Vec<f64>, sigma_x: Vec<f64>, sigma_p: f64) -> Result<Self> {
        let model = Self {
            q,
            psf,
            g,
            sigma_x,
            sigma_p,
            offset: (0, 0),
        };
        model.validate()?;
        Ok(model)
    }

    /// Uniform spectral weights `1/L` and the same noise level on every band.
    pub fn uniform(q: usize, psf: Psf, bands: usize, sigma_x: f64, sigma_p: f64) -> Result<Self> {
        Self::new(q, psf, vec![1.0 / bands as f64; bands], vec![sigma_x; bands], sigma_p)
    }

    pub fn bands(&self) -> usize {
        self.g.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if self.offset.0 >= self.q || self.offset.1 >= self.q {
            return Err(Error::InvalidParameter(format!(
                "decimation offset {:?} must lie inside the {}x{} block",
                self.offset, self.q, self.q
            )));
        }
        if (self.psf.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "psf must have unit sum, got {}",
                self.psf.sum()
            )));
        }
        if self.g.is_empty() {
            return Err(Error::InvalidParameter("g must have at least one band".into()));
        }
        if self.g.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("g entries must be finite and >= 0".into()));
        }
        if self.sigma_x.len() != self.g.len() {
            return Err(Error::InvalidParameter(format!(
                "sigma_x has {} entries for {} bands",
                self.sigma_x.len(),
                self.g.len()
            )));
        }
        if self.sigma_x.iter().any(|s| !(*s >= 0.0)) || !(self.sigma_p >= 0.0) {
            return Err(Error::InvalidParameter("noise levels must be >= 0".into()));
        }
        Ok(())
    }

    /// Checks that a high-resolution grid decimates evenly.
    pub fn check_grid(&self, width: usize, height: usize) -> Result<()> {
        if width % self.q != 0 || height % self.q != 0 {
            return Err(Error::Shape(format!(
                "q = {} does not divide {}x{}",
                self.q, width, height
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Gradient and its adjoint

pub(crate) fn gradient_into(u: &[f64], width: usize, height: usize, gh: &mut [f64], gv: &mut [f64]) {
    for r in 0..height {
        let down = ((r + 1) % height) * width;
        let row = r * width;
        for c in 0..width {
            let right = (c + 1) % width;
            let here = u[row + c];
            gh[row + c] = u[row + right] - here;
            gv[row + c] = u[down + c] - here;
        }
    }
}

/// Accumulates `∇ᵀ(gh, gv)` into `out`.
pub(crate) fn gradient_adjoint_add(gh: &[f64], gv: &[f64], width: usize, height: usize, out: &mut [f64]) {
    for r in 0..height {
        let up = ((r + height - 1) % height) * width;
        let row = r * width;
        for c in 0..width {
            let left = (c + width - 1) % width;
            out[row + c] += gh[row + left] - gh[row + c] + gv[up + c] - gv[row + c];
        }
    }
}

/// Forward differences with periodic wrap:
/// `∂_h u(r, c) = u(r, c+1) − u(r, c)` and `∂_v u(r, c) = u(r+1, c) − u(r, c)`.
pub fn gradient(plane: &Plane) -> VectorField {
    let (w, h) = (plane.width(), plane.height());
    let mut field = VectorField::zeros(w, h);
    gradient_into(plane.data(), w, h, &mut field.h, &mut field.v);
    field
}

/// Exact adjoint of [`gradient`], i.e. minus the backward-difference divergence.
pub fn divergence(field: &VectorField) -> Plane {
    let (w, h) = (field.width(), field.height());
    let mut out = vec![0.0; w * h];
    gradient_adjoint_add(&field.h, &field.v, w, h, &mut out);
    Plane::from_raw(w, h, out)
}

/// Unit tangent to the level lines of `p`, `∇⊥p / ‖∇p‖` with
/// `∇⊥ = (−∂_v, ∂_h)`.
///
/// Pixels whose gradient magnitude does not exceed `eps_rel` times the
/// largest magnitude in the image get a zero vector.
pub fn eta_field(p: &PanImage, eps_rel: f64) -> Result<VectorField> {
    if !(eps_rel > 0.0) {
        return Err(Error::InvalidParameter("eps_rel must be > 0".into()));
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("panchromatic image".into()));
    }
    let grad = gradient(p);
    let mags = grad.magnitudes();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let cutoff = eps_rel * max;
    let mut eta = VectorField::zeros(p.width(), p.height());
    for (i, &m) in mags.iter().enumerate() {
        if m > cutoff && m > 0.0 {
            eta.set(i, [-grad.v[i] / m, grad.h[i] / m]);
        }
    }
    Ok(eta)
}

// ---------------------------------------------------------------------------
// Spatial decimation

/// Decimation `D_s`: keeps pixel `offset` of every `q × q` block.
pub fn spatial_downsample(plane: &Plane, q: usize, offset: (usize, usize)) -> Result<Plane> {
    if q == 0 || plane.width() % q != 0 || plane.height() % q != 0 {
        return Err(Error::Shape(format!(
            "q = {} does not divide {}x{}",
            q,
            plane.width(),
            plane.height()
        )));
    }
    if offset.0 >= q || offset.1 >= q {
        return Err(Error::InvalidParameter("decimation offset outside block".into()));
    }
    let (w, h) = (plane.width() / q, plane.height() / q);
    let data = downsample_slice(plane.data(), plane.width(), q, offset, w, h);
    Ok(Plane::from_raw(w, h, data))
}

pub(crate) fn downsample_slice(
    data: &[f64],
    width: usize,
    q: usize,
    offset: (usize, usize),
    low_w: usize,
    low_h: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(low_w * low_h);
    for r in 0..low_h {
        let src = (r * q + offset.0) * width;
        for c in 0..low_w {
            out.push(data[src + c * q + offset.1]);
        }
    }
    out
}

/// Adjoint `D_sᵀ`: zero-fills every pixel except the kept one of each block.
pub fn spatial_downsample_adjoint(low: &Plane, q: usize, offset: (usize, usize)) -> Result<Plane> {
    if q == 0 || offset.0 >= q || offset.1 >= q {
        return Err(Error::InvalidParameter("invalid decimation factor or offset".into()));
    }
    let (w, h) = (low.width() * q, low.height() * q);
    let mut out = vec![0.0; w * h];
    for r in 0..low.height() {
        for c in 0..low.width() {
            out[(r * q + offset.0) * w + c * q + offset.1] = low.get(r, c);
        }
    }
    Ok(Plane::from_raw(w, h, out))
}

// ---------------------------------------------------------------------------
// Spatial blur

/// Periodic convolution with a PSF on a fixed grid, applied through the FFT.
pub struct SpatialBlur {
    fft: Fft2,
    transfer: Vec<Complex64>,
}

impl SpatialBlur {
    pub fn new(psf: &Psf, width: usize, height: usize) -> Self {
        let fft = Fft2::new(width, height);
        let transfer = fft.forward_real(&psf.embed(width, height));
        Self { fft, transfer }
    }

    /// Transfer function `ĥ_s(ξ)` in row-major frequency order.
    pub fn transfer(&self) -> &[Complex64] {
        &self.transfer
    }

    fn filter(&self, data: &[f64], conjugate: bool) -> Vec<f64> {
        let mut buf = to_complex(data);
        self.fft.forward(&mut buf);
        for (v, t) in buf.iter_mut().zip(&self.transfer) {
            *v *= if conjugate { t.conj() } else { *t };
        }
        self.fft.inverse(&mut buf);
        take_real(&buf).0
    }

    pub fn apply(&self, data: &[f64]) -> Vec<f64> {
        self.filter(data, false)
    }

    pub fn adjoint(&self, data: &[f64]) -> Vec<f64> {
        self.filter(data, true)
    }
}

/// `H_s u`: periodic convolution of a plane with `psf`.
pub fn spatial_convolve(plane: &Plane, psf: &Psf) -> Plane {
    let blur = SpatialBlur::new(psf, plane.width(), plane.height());
    Plane::from_raw(plane.width(), plane.height(), blur.apply(plane.data()))
}

/// `H_sᵀ u`: convolution with the conjugate transfer function.
pub fn spatial_convolve_adjoint(plane: &Plane, psf: &Psf) -> Plane {
    let blur = SpatialBlur::new(psf, plane.width(), plane.height());
    Plane::from_raw(plane.width(), plane.height(), blur.adjoint(plane.data()))
}

// ---------------------------------------------------------------------------
// Spectral operators

fn check_weights(cube_bands: usize, g: &[f64]) -> Result<()> {
    if g.len() != cube_bands {
        return Err(Error::Shape(format!(
            "{} spectral weights for {} bands",
            g.len(),
            cube_bands
        )));
    }
    Ok(())
}

/// Panchromatic mixing `G u`: `p(i) = Σ_l g_l · u_l(i)`.
pub fn pan_mix(cube: &HyperCube, g: &[f64]) -> Result<PanImage> {
    check_weights(cube.bands(), g)?;
    let mut out = vec![0.0; cube.pixels()];
    for (b, &w) in g.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(cube.band_data(b)) {
            *o += w * v;
        }
    }
    Ok(Plane::from_raw(cube.width(), cube.height(), out))
}

/// `Gᵀ p`: band `l` receives `g_l · p`.
pub fn pan_mix_adjoint(p: &PanImage, g: &[f64]) -> Result<HyperCube> {
    if g.is_empty() {
        return Err(Error::Shape("empty spectral weights".into()));
    }
    let mut data = Vec::with_capacity(p.len() * g.len());
    for &w in g {
        data.extend(p.data().iter().map(|v| w * v));
    }
    Ok(HyperCube::from_raw(p.width(), p.height(), g.len(), data))
}

/// Circulant spectral operator `H_λ` with `(H_λ u)_l = Σ_k g_k u_{(l+k) mod L}`.
///
/// Band 0 of `H_λ u` is exactly `G u`, so keeping spectral index 0 after
/// `H_λ` reproduces the panchromatic mixing.
pub struct SpectralMix {
    bands: usize,
    fft: SpectralFft,
    transfer: Vec<Complex64>,
}

impl SpectralMix {
    pub fn new(g: &[f64]) -> Self {
        let fft = SpectralFft::new(g.len());
        let transfer = fft.forward_vector(g);
        Self {
            bands: g.len(),
            fft,
            transfer,
        }
    }

    /// `ĝ(ω) = Σ_k g_k e^{-2πiωk/L}`.
    pub fn transfer(&self) -> &[Complex64] {
        &self.transfer
    }

    fn filter(&self, data: &[f64], pixels: usize, adjoint: bool) -> Vec<f64> {
        let mut buf = to_complex(data);
        self.fft.forward(&mut buf, pixels);
        for (b, chunk) in buf.chunks_mut(pixels).enumerate() {
            // correlation multiplies by conj(ĝ); its adjoint by ĝ
            let t = if adjoint {
                self.transfer[b]
            } else {
                self.transfer[b].conj()
            };
            chunk.iter_mut().for_each(|v| *v *= t);
        }
        self.fft.inverse(&mut buf, pixels);
        take_real(&buf).0
    }

    pub fn apply(&self, data: &[f64], pixels: usize) -> Vec<f64> {
        debug_assert_eq!(data.len(), pixels * self.bands);
        self.filter(data, pixels, false)
    }

    pub fn adjoint(&self, data: &[f64], pixels: usize) -> Vec<f64> {
        debug_assert_eq!(data.len(), pixels * self.bands);
        self.filter(data, pixels, true)
    }
}

/// `H_λ u`, the spectral circulant built from the panchromatic weights.
pub fn spectral_convolve(cube: &HyperCube, g: &[f64]) -> Result<HyperCube> {
    check_weights(cube.bands(), g)?;
    let mix = SpectralMix::new(g);
    let data = mix.apply(cube.data(), cube.pixels());
    Ok(HyperCube::from_raw(cube.width(), cube.height(), cube.bands(), data))
}

/// `H_λᵀ v`, circulant along the bands with the reversed kernel.
pub fn spectral_convolve_adjoint(cube: &HyperCube, g: &[f64]) -> Result<HyperCube> {
    check_weights(cube.bands(), g)?;
    let mix = SpectralMix::new(g);
    let data = mix.adjoint(cube.data(), cube.pixels());
    Ok(HyperCube::from_raw(cube.width(), cube.height(), cube.bands(), data))
}

/// Nearest-neighbour replication by factor `q`.
pub fn nearest_upsample(cube: &HyperCube, q: usize) -> HyperCube {
    let (w, h) = (cube.width() * q, cube.height() * q);
    let mut data = Vec::with_capacity(w * h * cube.bands());
    for b in 0..cube.bands() {
        let band = cube.band_data(b);
        for r in 0..h {
            let src = (r / q) * cube.width();
            for c in 0..w {
                data.push(band[src + c / q]);
            }
        }
    }
    HyperCube::from_raw(w, h, cube.bands(), data)
}

// ---------------------------------------------------------------------------
// Stacked splitting operator

/// Element of the range of `M`: two per-band gradient blocks, the blurred
/// cube and the spectrally mixed cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVector {
    /// Block paired with the total-variation term.
    pub tv: Vec<VectorField>,
    /// Block paired with the level-line term.
    pub levelline: Vec<VectorField>,
    /// `H_s u`, one plane per band.
    pub blur: HyperCube,
    /// `H_λ u`.
    pub spectral: HyperCube,
}

impl SplitVector {
    pub fn zeros(width: usize, height: usize, bands: usize) -> Self {
        Self {
            tv: vec![VectorField::zeros(width, height); bands],
            levelline: vec![VectorField::zeros(width, height); bands],
            blur: HyperCube::zeros(width, height, bands),
            spectral: HyperCube::zeros(width, height, bands),
        }
    }

    pub fn same_shape(&self, other: &SplitVector) -> bool {
        self.tv.len() == other.tv.len()
            && self.levelline.len() == other.levelline.len()
            && self.tv.iter().zip(&other.tv).all(|(a, b)| a.same_shape(b))
            && self.levelline.iter().zip(&other.levelline).all(|(a, b)| a.same_shape(b))
            && self.blur.same_shape(&other.blur)
            && self.spectral.same_shape(&other.spectral)
    }

    fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.tv
            .iter()
            .chain(&self.levelline)
            .flat_map(|f| [f.h.as_slice(), f.v.as_slice()])
            .chain([self.blur.data(), self.spectral.data()])
    }

    fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.tv
            .iter_mut()
            .chain(self.levelline.iter_mut())
            .flat_map(|f| [f.h.as_mut_slice(), f.v.as_mut_slice()])
            .chain([self.blur.data_mut(), self.spectral.data_mut()])
    }

    pub fn dot(&self, other: &SplitVector) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::Shape("split vector dot product".into()));
        }
        Ok(self
            .slices()
            .zip(other.slices())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.slices()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `self += a · other`.
    pub fn add_scaled(&mut self, a: f64, other: &SplitVector) {
        for (dst, src) in self.slices_mut().zip(other.slices()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += a * s);
        }
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &SplitVector, b: f64) -> SplitVector {
        let mut out = self.clone();
        for (dst, src) in out.slices_mut().zip(other.slices()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d = a * *d + b * s);
        }
        out
    }

    pub fn map_inplace(&mut self, mut f: impl FnMut(f64) -> f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|v| *v = f(*v));
        }
    }

    /// Name of the first block holding a non-finite sample, if any.
    pub fn non_finite_block(&self) -> Option<&'static str> {
        if !self.tv.iter().all(VectorField::is_finite) {
            Some("tv block")
        } else if !self.levelline.iter().all(VectorField::is_finite) {
            Some("level-line block")
        } else if !self.blur.is_finite() {
            Some("blur block")
        } else if !self.spectral.is_finite() {
            Some("spectral block")
        } else {
            None
        }
    }
}

/// Fourier symbol of `MᵀM` and its parts.
#[derive(Debug, Clone)]
pub struct TransferSet {
    width: usize,
    height: usize,
    bands: usize,
    /// `|d_h(ξ)|² + |d_v(ξ)|²` per spatial frequency.
    pub gradient: Vec<f64>,
    /// `|ĥ_s(ξ)|²` per spatial frequency.
    pub psf: Vec<f64>,
    /// `|ĝ(ω)|²` per spectral frequency.
    pub spectral: Vec<f64>,
    /// `2(|d_h|² + |d_v|²) + |ĥ_s|² + |ĝ|²`, indexed `ω · N + ξ`.
    pub denominator: Vec<f64>,
}

impl TransferSet {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.bands)
    }

    pub fn at(&self, spatial: usize, spectral: usize) -> f64 {
        self.denominator[spectral * self.width * self.height + spatial]
    }
}

fn gradient_symbols(width: usize, height: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        let sv = (PI * r as f64 / height as f64).sin();
        for c in 0..width {
            let sh = (PI * c as f64 / width as f64).sin();
            out.push(4.0 * (sh * sh + sv * sv));
        }
    }
    out
}

fn transfer_from_parts(
    width: usize,
    height: usize,
    psf_hat: &[Complex64],
    g_hat: &[Complex64],
) -> Result<TransferSet> {
    let gradient = gradient_symbols(width, height);
    let psf: Vec<f64> = psf_hat.iter().map(|c| c.norm_sqr()).collect();
    let spectral: Vec<f64> = g_hat.iter().map(|c| c.norm_sqr()).collect();
    let n = width * height;
    let mut denominator = Vec::with_capacity(n * spectral.len());
    for &s in &spectral {
        for i in 0..n {
            denominator.push(2.0 * gradient[i] + psf[i] + s);
        }
    }
    if let Some(k) = denominator.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::SingularTransfer(k));
    }
    Ok(TransferSet {
        width,
        height,
        bands: spectral.len(),
        gradient,
        psf,
        spectral,
        denominator,
    })
}

/// Fourier symbol of `MᵀM` on a `width × height` grid.
pub fn build_transfer_set(model: &SensorModel, width: usize, height: usize) -> Result<TransferSet> {
    model.validate()?;
    let blur = SpatialBlur::new(&model.psf, width, height);
    let mix = SpectralMix::new(&model.g);
    transfer_from_parts(width, height, blur.transfer(), mix.transfer())
}

/// The stacked operator `M = [∇π_1; …; ∇π_L; ∇π_1; …; ∇π_L; H_s; H_λ]`
/// bound to one grid, with FFT plans and transfer functions cached.
pub struct SplitOperator {
    width: usize,
    height: usize,
    bands: usize,
    blur: SpatialBlur,
    mix: SpectralMix,
    fft3: Fft3,
    transfer: TransferSet,
}

impl SplitOperator {
    pub fn new(model: &SensorModel, width: usize, height: usize) -> Result<Self> {
        model.validate()?;
        let blur = SpatialBlur::new(&model.psf, width, height);
        let mix = SpectralMix::new(&model.g);
        let transfer = transfer_from_parts(width, height, blur.transfer(), mix.transfer())?;
        Ok(Self {
            width,
            height,
            bands: model.bands(),
            blur,
            mix,
            fft3: Fft3::new(width, height, model.bands()),
            transfer,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.bands)
    }

    pub fn transfer(&self) -> &TransferSet {
        &self.transfer
    }

    pub fn blur(&self) -> &SpatialBlur {
        &self.blur
    }

    pub fn mix(&self) -> &SpectralMix {
        &self.mix
    }

    fn check_cube(&self, u: &HyperCube) -> Result<()> {
        if u.width() != self.width || u.height() != self.height || u.bands() != self.bands {
            return Err(Error::Shape(format!(
                "operator expects {}x{}x{}, got {}x{}x{}",
                self.width,
                self.height,
                self.bands,
                u.width(),
                u.height(),
                u.bands()
            )));
        }
        Ok(())
    }

    pub fn zeros(&self) -> SplitVector {
        SplitVector::zeros(self.width, self.height, self.bands)
    }

    pub fn apply(&self, u: &HyperCube) -> Result<SplitVector> {
        self.check_cube(u)?;
        let (w, h, n) = (self.width, self.height, self.width * self.height);
        let mut tv = Vec::with_capacity(self.bands);
        let mut blurred = Vec::with_capacity(n * self.bands);
        for b in 0..self.bands {
            let band = u.band_data(b);
            let mut field = VectorField::zeros(w, h);
            gradient_into(band, w, h, &mut field.h, &mut field.v);
            tv.push(field);
            blurred.extend(self.blur.apply(band));
        }
        let spectral = self.mix.apply(u.data(), n);
        Ok(SplitVector {
            levelline: tv.clone(),
            tv,
            blur: HyperCube::from_raw(w, h, self.bands, blurred),
            spectral: HyperCube::from_raw(w, h, self.bands, spectral),
        })
    }

    pub fn adjoint(&self, v: &SplitVector) -> Result<HyperCube> {
        if !v.same_shape(&self.zeros()) {
            return Err(Error::Shape("split vector does not match operator".into()));
        }
        let (w, h, n) = (self.width, self.height, self.width * self.height);
        let mut out = self.mix.adjoint(v.spectral.data(), n);
        for b in 0..self.bands {
            let dst = &mut out[b * n..(b + 1) * n];
            gradient_adjoint_add(&v.tv[b].h, &v.tv[b].v, w, h, dst);
            gradient_adjoint_add(&v.levelline[b].h, &v.levelline[b].v, w, h, dst);
            let blurred = self.blur.adjoint(v.blur.band_data(b));
            dst.iter_mut().zip(blurred).for_each(|(d, s)| *d += s);
        }
        Ok(HyperCube::from_raw(w, h, self.bands, out))
    }

    /// `MᵀM u` through the Fourier symbol.
    pub fn apply_normal(&self, u: &HyperCube) -> Result<HyperCube> {
        self.check_cube(u)?;
        let mut buf = to_complex(u.data());
        self.fft3.forward(&mut buf);
        buf.iter_mut()
            .zip(&self.transfer.denominator)
            .for_each(|(v, d)| *v *= d);
        self.fft3.inverse(&mut buf);
        let (data, _) = take_real(&buf);
        Ok(HyperCube::from_raw(self.width, self.height, self.bands, data))
    }

    /// Least-squares solve `u = (MᵀM)⁻¹ Mᵀ rhs` in the Fourier domain.
    pub fn solve_u_fourier(&self, rhs: &SplitVector) -> Result<HyperCube> {
        let mt = self.adjoint(rhs)?;
        let mut buf = to_complex(mt.data());
        self.fft3.forward(&mut buf);
        for (k, (v, d)) in buf.iter_mut().zip(&self.transfer.denominator).enumerate() {
            if !(*d > 0.0) {
                return Err(Error::SingularTransfer(k));
            }
            *v /= d;
        }
        self.fft3.inverse(&mut buf);
        let (data, max_imag) = take_real(&buf);
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        debug_assert!(max_imag <= 1e-10 * scale, "imaginary residue {max_imag}");
        Ok(HyperCube::from_raw(self.width, self.height, self.bands, data))
    }
}

/// `M u` for a one-off evaluation.
pub fn apply_m(u: &HyperCube, model: &SensorModel) -> Result<SplitVector> {
    SplitOperator::new(model, u.width(), u.height())?.apply(u)
}

/// `Mᵀ v` for a one-off evaluation.
pub fn apply_m_adjoint(v: &SplitVector, model: &SensorModel) -> Result<HyperCube> {
    SplitOperator::new(model, v.blur.width(), v.blur.height())?.adjoint(v)
}
