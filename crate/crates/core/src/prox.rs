//! Closed-form proximal maps and constraint-set projections used by the
//! ADMM splitting.

use crate::error::{Error, Result};
use crate::operators::downsample_slice;
use crate::tensor::VectorField;

/// Vector soft-threshold, the prox of `tau·‖y‖₂`.
pub fn shrink(z: [f64; 2], tau: f64) -> [f64; 2] {
    let norm = z[0].hypot(z[1]);
    if norm <= tau || norm == 0.0 {
        return [0.0, 0.0];
    }
    let scale = (norm - tau) / norm;
    [z[0] * scale, z[1] * scale]
}

/// Prox of `tau·|⟨y, eta⟩|` for `‖eta‖ ∈ {0, 1}`: soft-thresholds the
/// component of `z` along `eta` and keeps the orthogonal part.
pub fn shrink_along(z: [f64; 2], eta: [f64; 2], tau: f64) -> [f64; 2] {
    let along = z[0] * eta[0] + z[1] * eta[1];
    let shrunk = along.signum() * (along.abs() - tau).max(0.0);
    let delta = shrunk - along;
    [z[0] + delta * eta[0], z[1] + delta * eta[1]]
}

/// Per-pixel [`shrink`] over a field.
pub fn prox_tv(z: &VectorField, tau: f64) -> VectorField {
    let mut out = z.clone();
    prox_tv_inplace(&mut out, tau);
    out
}

pub(crate) fn prox_tv_inplace(z: &mut VectorField, tau: f64) {
    if tau == 0.0 {
        return;
    }
    for i in 0..z.pixels() {
        let y = shrink(z.at(i), tau);
        z.set(i, y);
    }
}

/// Per-pixel [`shrink_along`] over a field.
pub fn prox_levelline(z: &VectorField, eta: &VectorField, tau: f64) -> Result<VectorField> {
    if !z.same_shape(eta) {
        return Err(Error::Shape("level-line prox: eta shape".into()));
    }
    let mut out = z.clone();
    prox_levelline_inplace(&mut out, eta, tau);
    Ok(out)
}

pub(crate) fn prox_levelline_inplace(z: &mut VectorField, eta: &VectorField, tau: f64) {
    if tau == 0.0 {
        return;
    }
    for i in 0..z.pixels() {
        let e = eta.at(i);
        if e == [0.0, 0.0] {
            continue;
        }
        let y = shrink_along(z.at(i), e, tau);
        z.set(i, y);
    }
}

/// Decimation mapping a block variable to its measurement.
///
/// Every selector satisfies `S Sᵀ = I`, so the kept coordinates are a subset
/// of the block and projection only needs to move those.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Identity,
    /// Keeps pixel `offset` of every `q × q` block of a `width × height` plane.
    Spatial {
        width: usize,
        height: usize,
        q: usize,
        offset: (usize, usize),
    },
    /// Keeps band 0 of a band-sequential cube with `pixels` pixels per band.
    Spectral { pixels: usize },
}

impl Selector {
    /// Length of the block variable the selector accepts, if fixed.
    fn input_len(&self) -> Option<usize> {
        match *self {
            Selector::Identity => None,
            Selector::Spatial { width, height, .. } => Some(width * height),
            Selector::Spectral { .. } => None,
        }
    }

    fn output_len(&self, input: usize) -> usize {
        match *self {
            Selector::Identity => input,
            Selector::Spatial {
                width, height, q, ..
            } => (width / q) * (height / q),
            Selector::Spectral { pixels } => pixels,
        }
    }

    /// Index into the block variable of every kept coordinate, in measurement order.
    fn kept(&self, input: usize) -> Vec<usize> {
        match *self {
            Selector::Identity => (0..input).collect(),
            Selector::Spatial {
                width,
                height,
                q,
                offset,
            } => {
                let mut idx = Vec::with_capacity((width / q) * (height / q));
                for r in 0..height / q {
                    for c in 0..width / q {
                        idx.push((r * q + offset.0) * width + c * q + offset.1);
                    }
                }
                idx
            }
            Selector::Spectral { pixels } => (0..pixels).collect(),
        }
    }

    pub fn select(&self, z: &[f64]) -> Vec<f64> {
        match *self {
            Selector::Identity => z.to_vec(),
            Selector::Spatial {
                width,
                height,
                q,
                offset,
            } => downsample_slice(z, width, q, offset, width / q, height / q),
            Selector::Spectral { pixels } => z[..pixels].to_vec(),
        }
    }

    /// `Sᵀ m` for a block variable of length `input`.
    pub fn scatter(&self, m: &[f64], input: usize) -> Vec<f64> {
        let mut out = vec![0.0; input];
        for (k, i) in self.kept(input).into_iter().enumerate() {
            out[i] = m[k];
        }
        out
    }
}

/// Constraint set `{y : ‖S y − data‖₂ ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    pub data: Vec<f64>,
    pub radius: f64,
    pub selector: Selector,
}

impl BallSpec {
    pub fn new(data: Vec<f64>, radius: f64, selector: Selector) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius {radius} < 0")));
        }
        Ok(Self {
            data,
            radius,
            selector,
        })
    }

    /// `‖S z − data‖₂`.
    pub fn distance(&self, z: &[f64]) -> f64 {
        self.selector
            .select(z)
            .iter()
            .zip(&self.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if let Some(n) = self.selector.input_len() {
            if n != z.len() {
                return Err(Error::Shape(format!("block of {} for selector of {}", z.len(), n)));
            }
        }
        if let Selector::Spectral { pixels } = self.selector {
            if pixels == 0 || z.len() % pixels != 0 {
                return Err(Error::Shape("spectral block length".into()));
            }
        }
        if self.selector.output_len(z.len()) != self.data.len() {
            return Err(Error::Shape(format!(
                "measurement of {} for a selector producing {}",
                self.data.len(),
                self.selector.output_len(z.len())
            )));
        }
        Ok(())
    }
}

/// Euclidean projection of `z` onto the ball described by `spec`.
pub fn project_ball(z: &[f64], spec: &BallSpec) -> Result<Vec<f64>> {
    if !(spec.radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("ball radius {} < 0", spec.radius)));
    }
    spec.check(z)?;
    let mut out = z.to_vec();
    project_ball_inplace(&mut out, spec);
    Ok(out)
}

pub(crate) fn project_ball_inplace(z: &mut [f64], spec: &BallSpec) {
    let kept = spec.selector.kept(z.len());
    let dist = kept
        .iter()
        .zip(&spec.data)
        .map(|(&i, d)| (z[i] - d) * (z[i] - d))
        .sum::<f64>()
        .sqrt();
    if dist <= spec.radius {
        return;
    }
    // kept coordinates move to data + r·radius/‖r‖, the rest stay put
    let scale = spec.radius / dist;
    for (&i, d) in kept.iter().zip(&spec.data) {
        z[i] = d + (z[i] - d) * scale;
    }
}
