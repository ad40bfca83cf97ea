//! Multi-dimensional FFTs over band-sequential buffers.
//!
//! Inverse transforms are normalized, so `inverse(forward(x)) == x`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub(crate) fn pixels(&self) -> usize {
        self.width * self.height
    }

    fn transform(&self, buf: &mut [Complex64], rows: &dyn Fft<f64>, cols: &dyn Fft<f64>) {
        debug_assert_eq!(buf.len(), self.pixels());
        rows.process(buf);
        let mut column = vec![Complex64::default(); self.height];
        for c in 0..self.width {
            for (r, slot) in column.iter_mut().enumerate() {
                *slot = buf[r * self.width + c];
            }
            cols.process(&mut column);
            for (r, value) in column.iter().enumerate() {
                buf[r * self.width + c] = *value;
            }
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.row_fwd.as_ref(), self.col_fwd.as_ref());
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, self.row_inv.as_ref(), self.col_inv.as_ref());
        let scale = 1.0 / self.pixels() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    pub(crate) fn forward_real(&self, plane: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }
}

/// 1-D transforms along the band axis of a band-sequential buffer.
pub(crate) struct SpectralFft {
    bands: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralFft {
    pub(crate) fn new(bands: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            bands,
            fwd: planner.plan_fft_forward(bands),
            inv: planner.plan_fft_inverse(bands),
        }
    }

    fn transform(&self, buf: &mut [Complex64], pixels: usize, fft: &dyn Fft<f64>) {
        debug_assert_eq!(buf.len(), pixels * self.bands);
        if self.bands == 1 {
            return;
        }
        let mut spectrum = vec![Complex64::default(); self.bands];
        for i in 0..pixels {
            for (b, slot) in spectrum.iter_mut().enumerate() {
                *slot = buf[b * pixels + i];
            }
            fft.process(&mut spectrum);
            for (b, value) in spectrum.iter().enumerate() {
                buf[b * pixels + i] = *value;
            }
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64], pixels: usize) {
        self.transform(buf, pixels, self.fwd.as_ref());
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64], pixels: usize) {
        self.transform(buf, pixels, self.inv.as_ref());
        let scale = 1.0 / self.bands as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// DFT of a short real vector, `X(ω) = Σ_k x_k e^{-2πiωk/L}`.
    pub(crate) fn forward_vector(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }
}

/// Spatial 2-D transform of every band followed by the band-axis transform.
pub(crate) struct Fft3 {
    pub(crate) spatial: Fft2,
    pub(crate) spectral: SpectralFft,
}

impl Fft3 {
    pub(crate) fn new(width: usize, height: usize, bands: usize) -> Self {
        Self {
            spatial: Fft2::new(width, height),
            spectral: SpectralFft::new(bands),
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        let n = self.spatial.pixels();
        for band in buf.chunks_mut(n) {
            self.spatial.forward(band);
        }
        self.spectral.forward(buf, n);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        let n = self.spatial.pixels();
        self.spectral.inverse(buf, n);
        for band in buf.chunks_mut(n) {
            self.spatial.inverse(band);
        }
    }
}

pub(crate) fn to_complex(data: &[f64]) -> Vec<Complex64> {
    data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Real parts, plus the largest imaginary magnitude that was dropped.
pub(crate) fn take_real(buf: &[Complex64]) -> (Vec<f64>, f64) {
    let max_imag = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    (buf.iter().map(|c| c.re).collect(), max_imag)
}
