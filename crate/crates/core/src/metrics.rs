//! Fusion quality measures.
//!
//! Reference-based: RMSE, ERGAS, SAM. Pan-based: FCC. No-reference: the QNR
//! spectral and spatial distortion indices `D_λ` and `D_s`, built on the
//! universal image quality index computed over the whole image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{SensorModel, SpatialBlur, downsample_slice};
use crate::tensor::{HyperCube, PanImage, Plane};

fn require_same(a: &HyperCube, b: &HyperCube) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.bands(),
            b.width(),
            b.height(),
            b.bands()
        )))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Root mean square difference over all samples.
pub fn rmse(est: &HyperCube, reference: &HyperCube) -> Result<f64> {
    require_same(est, reference)?;
    Ok(mse(est.data(), reference.data()).sqrt())
}

/// `100/q · sqrt(mean_l (RMSE_l / μ_l)²)` with `μ_l` the reference band mean.
pub fn ergas(est: &HyperCube, reference: &HyperCube, q: usize) -> Result<f64> {
    require_same(est, reference)?;
    if q == 0 {
        return Err(Error::InvalidParameter("ergas needs q >= 1".into()));
    }
    let mut acc = 0.0;
    for b in 0..reference.bands() {
        let mu = mean(reference.band_data(b));
        if mu == 0.0 {
            return Err(Error::Degenerate(format!("reference band {} has zero mean", b + 1)));
        }
        acc += mse(est.band_data(b), reference.band_data(b)) / (mu * mu);
    }
    Ok(100.0 / q as f64 * (acc / reference.bands() as f64).sqrt())
}

/// Angle between two nonzero vectors in radians, computed from the
/// difference and sum of the normalized vectors so that identical and
/// proportional vectors give exactly zero.
fn angle(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (ux, uy) = (x / na, y / nb);
        diff += (ux - uy) * (ux - uy);
        sum += (ux + uy) * (ux + uy);
    }
    Some(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// Spectral angle mapper: mean per-pixel spectral angle, in degrees.
pub fn sam(est: &HyperCube, reference: &HyperCube) -> Result<f64> {
    require_same(est, reference)?;
    let n = est.pixels();
    let mut total = 0.0;
    for i in 0..n {
        total += angle(&est.spectrum(i), &reference.spectrum(i))
            .ok_or_else(|| Error::Degenerate(format!("zero spectrum at pixel {i}")))?;
    }
    Ok((total / n as f64).to_degrees())
}

/// 3×3 Laplacian high-pass (centre 8, neighbours −1) with periodic wrap.
pub fn laplacian(plane: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    for r in 0..height {
        for c in 0..width {
            let mut acc = 9.0 * plane[r * width + c];
            for dr in [height - 1, 0, 1] {
                for dc in [width - 1, 0, 1] {
                    acc -= plane[((r + dr) % height) * width + (c + dc) % width];
                }
            }
            out[r * width + c] = acc;
        }
    }
    out
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Filtered correlation coefficient: mean over bands of the correlation
/// between the Laplacian-filtered band and the Laplacian-filtered pan image.
pub fn fcc(est: &HyperCube, p: &PanImage) -> Result<f64> {
    if est.width() != p.width() || est.height() != p.height() {
        return Err(Error::Shape("fcc: cube and pan grids differ".into()));
    }
    let (w, h) = (p.width(), p.height());
    let pan_hp = laplacian(p.data(), w, h);
    let mut total = 0.0;
    for b in 0..est.bands() {
        let band_hp = laplacian(est.band_data(b), w, h);
        total += correlation(&band_hp, &pan_hp).ok_or_else(|| {
            Error::Degenerate(format!("fcc: zero high-pass variance (band {})", b + 1))
        })?;
    }
    Ok(total / est.bands() as f64)
}

/// Universal image quality index over the whole image,
/// `4 σ_ab μ_a μ_b / ((σ_a² + σ_b²)(μ_a² + μ_b²))`.
pub fn q_index(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Shape("q index: sample counts differ".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let n = a.len() as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let (sab, saa, sbb) = (sab / n, saa / n, sbb / n);
    let den = (saa + sbb) * (ma * ma + mb * mb);
    if den == 0.0 {
        return Err(Error::Degenerate("q index: zero variance or zero mean".into()));
    }
    Ok(4.0 * sab * ma * mb / den)
}

/// Spectral distortion: mean over band pairs `l ≠ r` of
/// `|Q(est_l, est_r) − Q(x_l, x_r)|`.
pub fn d_lambda(est: &HyperCube, x_lr: &HyperCube) -> Result<f64> {
    let l = est.bands();
    if l < 2 {
        return Err(Error::InvalidParameter("d_lambda needs at least two bands".into()));
    }
    if x_lr.bands() != l {
        return Err(Error::Shape("d_lambda: band counts differ".into()));
    }
    let mut total = 0.0;
    for a in 0..l {
        for b in (a + 1)..l {
            let high = q_index(est.band_data(a), est.band_data(b))?;
            let low = q_index(x_lr.band_data(a), x_lr.band_data(b))?;
            total += 2.0 * (high - low).abs();
        }
    }
    Ok(total / (l * (l - 1)) as f64)
}

/// Spatial distortion: mean over bands of `|Q(est_l, p) − Q(x_l, p_lr)|`.
pub fn d_s(est: &HyperCube, x_lr: &HyperCube, p: &PanImage, p_lr: &PanImage) -> Result<f64> {
    if est.width() != p.width() || est.height() != p.height() {
        return Err(Error::Shape("d_s: cube and pan grids differ".into()));
    }
    if x_lr.width() != p_lr.width() || x_lr.height() != p_lr.height() {
        return Err(Error::Shape("d_s: low-resolution grids differ".into()));
    }
    if x_lr.bands() != est.bands() {
        return Err(Error::Shape("d_s: band counts differ".into()));
    }
    let mut total = 0.0;
    for b in 0..est.bands() {
        let high = q_index(est.band_data(b), p.data())?;
        let low = q_index(x_lr.band_data(b), p_lr.data())?;
        total += (high - low).abs();
    }
    Ok(total / est.bands() as f64)
}

/// Degrades a high-resolution plane with the sensor's blur and decimation.
pub fn degrade_plane(plane: &Plane, model: &SensorModel) -> Result<Plane> {
    model.check_grid(plane.width(), plane.height())?;
    let blur = SpatialBlur::new(&model.psf, plane.width(), plane.height());
    let blurred = blur.apply(plane.data());
    let (w, h) = (plane.width() / model.q, plane.height() / model.q);
    Plane::new(w, h, downsample_slice(&blurred, plane.width(), model.q, model.offset, w, h))
}

/// The six-metric report. Entries are `None` when their inputs were not supplied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub rmse: Option<f64>,
    pub ergas: Option<f64>,
    /// Degrees.
    pub sam: Option<f64>,
    pub fcc: Option<f64>,
    pub d_s: Option<f64>,
    pub d_lambda: Option<f64>,
}

/// Inputs available to [`evaluate`]. Metrics whose inputs are missing are skipped.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationInputs<'a> {
    pub estimate: &'a HyperCube,
    pub reference: Option<&'a HyperCube>,
    pub x: Option<&'a HyperCube>,
    pub p: Option<&'a PanImage>,
    pub model: Option<&'a SensorModel>,
    pub q: usize,
}

pub fn evaluate(inputs: EvaluationInputs<'_>) -> Result<QualityReport> {
    let est = inputs.estimate;
    let mut report = QualityReport::default();
    if let Some(reference) = inputs.reference {
        report.rmse = Some(rmse(est, reference)?);
        report.ergas = Some(ergas(est, reference, inputs.q)?);
        report.sam = Some(sam(est, reference)?);
    }
    if let Some(p) = inputs.p {
        report.fcc = Some(fcc(est, p)?);
    }
    if let Some(x) = inputs.x {
        if est.bands() >= 2 {
            report.d_lambda = Some(d_lambda(est, x)?);
        }
        if let (Some(p), Some(model)) = (inputs.p, inputs.model) {
            let p_lr = degrade_plane(p, model)?;
            report.d_s = Some(d_s(est, x, p, &p_lr)?);
        }
    }
    Ok(report)
}

impl QualityReport {
    pub fn is_empty(&self) -> bool {
        self.rows().iter().all(|(_, _, v)| v.is_none())
    }

    /// `(key, display label, value as displayed)`; percentage-like metrics
    /// are shown multiplied by 100.
    fn rows(&self) -> [(&'static str, &'static str, Option<f64>); 6] {
        let scaled = |v: Option<f64>| v.map(|x| 100.0 * x);
        [
            ("rmse_x100", "RMSE (x100)", scaled(self.rmse)),
            ("ergas", "ERGAS", self.ergas),
            ("sam_deg", "SAM (deg)", self.sam),
            ("fcc_x100", "FCC (x100)", scaled(self.fcc)),
            ("d_s_x100", "D_s (x100)", scaled(self.d_s)),
            ("d_lambda_x100", "D_lambda (x100)", scaled(self.d_lambda)),
        ]
    }

    /// Flat `key = value` block; missing metrics read `n/a`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, label, value) in self.rows() {
            let shown = match value {
                Some(v) => format!("{v:.6}"),
                None => "n/a".to_string(),
            };
            out.push_str(&format!("{key} = {shown}  # {label}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
