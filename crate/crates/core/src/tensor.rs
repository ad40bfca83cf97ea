//! Dense image containers.
//!
//! Every container stores `f64` samples row-major. A [`HyperCube`] is
//! band-sequential: all pixels of the first band, then all pixels of the
//! second band, and so on, which is the stacked-vector layout
//! `u = (u_1; ...; u_L)` used by the operators.

use crate::error::{Error, Result};

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("{what} sample {i}"))),
        None => Ok(()),
    }
}

fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A single-band image on a `width × height` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// A panchromatic image is a single-band plane.
pub type PanImage = Plane;

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape("plane must be nonempty".into()));
        }
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "plane data length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        check_finite(&data, "plane")?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Wraps a buffer without the finiteness scan. Used on hot paths where
    /// the producer already guarantees the invariant.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn dot(&self, other: &Plane) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::Shape("plane dot product".into()));
        }
        Ok(dot_slices(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        dot_slices(&self.data, &self.data).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// An `L`-band image stored band-sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HyperCube {
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::Shape("cube must be nonempty".into()));
        }
        if data.len() != width * height * bands {
            return Err(Error::Shape(format!(
                "cube data length {} != {}x{}x{}",
                data.len(),
                width,
                height,
                bands
            )));
        }
        check_finite(&data, "cube")?;
        Ok(Self {
            width,
            height,
            bands,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, bands: usize) -> Self {
        Self {
            width,
            height,
            bands,
            data: vec![0.0; width * height * bands],
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, bands: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * bands);
        Self {
            width,
            height,
            bands,
            data,
        }
    }

    /// Stacks single-band planes into a cube, first plane first.
    pub fn from_bands(planes: &[Plane]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::Shape("cannot build a cube from zero bands".into()))?;
        let mut data = Vec::with_capacity(first.len() * planes.len());
        for (l, plane) in planes.iter().enumerate() {
            if !plane.same_shape(first) {
                return Err(Error::Shape(format!("band {} has a different shape", l + 1)));
            }
            data.extend_from_slice(&plane.data);
        }
        Ok(Self {
            width: first.width,
            height: first.height,
            bands: planes.len(),
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Pixels per band.
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Copy of band `l`, numbered from 1 as in the stacked notation.
    pub fn band(&self, l: usize) -> Result<Plane> {
        if l == 0 || l > self.bands {
            return Err(Error::BandIndex {
                index: l,
                bands: self.bands,
            });
        }
        Ok(Plane::from_raw(
            self.width,
            self.height,
            self.band_data(l - 1).to_vec(),
        ))
    }

    /// Zero-based borrowed view of one band.
    pub fn band_data(&self, index: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn band_data_mut(&mut self, index: usize) -> &mut [f64] {
        let n = self.pixels();
        &mut self.data[index * n..(index + 1) * n]
    }

    /// All bands as owned planes, first band first.
    pub fn planes(&self) -> Vec<Plane> {
        (0..self.bands)
            .map(|b| Plane::from_raw(self.width, self.height, self.band_data(b).to_vec()))
            .collect()
    }

    /// Spectral vector at pixel `index` (row-major).
    pub fn spectrum(&self, index: usize) -> Vec<f64> {
        let n = self.pixels();
        (0..self.bands).map(|b| self.data[b * n + index]).collect()
    }

    pub fn same_shape(&self, other: &HyperCube) -> bool {
        self.width == other.width && self.height == other.height && self.bands == other.bands
    }

    fn require_same_shape(&self, other: &HyperCube, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.bands, other.width, other.height, other.bands
            )))
        }
    }

    pub fn dot(&self, other: &HyperCube) -> Result<f64> {
        self.require_same_shape(other, "cube dot product")?;
        Ok(dot_slices(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        dot_slices(&self.data, &self.data).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Elementwise `a·x + y`.
pub fn axpy(a: f64, x: &HyperCube, y: &HyperCube) -> Result<HyperCube> {
    x.require_same_shape(y, "axpy")?;
    let data = x.data.iter().zip(&y.data).map(|(xi, yi)| a * xi + yi).collect();
    Ok(HyperCube::from_raw(x.width, x.height, x.bands, data))
}

/// A per-pixel 2-vector field, stored as horizontal and vertical planes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, h: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if h.len() != width * height || v.len() != width * height {
            return Err(Error::Shape(format!(
                "vector field components must have {}x{} samples",
                width, height
            )));
        }
        Ok(Self {
            width,
            height,
            h,
            v,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            h: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn at(&self, index: usize) -> [f64; 2] {
        [self.h[index], self.v[index]]
    }

    pub fn set(&mut self, index: usize, value: [f64; 2]) {
        self.h[index] = value[0];
        self.v[index] = value[1];
    }

    pub fn same_shape(&self, other: &VectorField) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::Shape("vector field dot product".into()));
        }
        Ok(dot_slices(&self.h, &other.h) + dot_slices(&self.v, &other.v))
    }

    pub fn norm_sq(&self) -> f64 {
        dot_slices(&self.h, &self.h) + dot_slices(&self.v, &self.v)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Per-pixel Euclidean magnitude.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.h.iter().zip(&self.v).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(&self.v).all(|x| x.is_finite())
    }
}
