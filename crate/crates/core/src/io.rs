//! Raw band-sequential little-endian image files with a JSON header sidecar.
//!
//! `scene.bin` is described by `scene.hdr.json`:
//!
//! ```json
//! {"width": 64, "height": 64, "bands": 80, "dtype": "float64",
//!  "interleave": "bsq", "byte_order": "little"}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{HyperCube, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Float32,
    #[default]
    Float64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::Float32 => 4,
            Dtype::Float64 => 8,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "float32" => Ok(Dtype::Float32),
            "float64" => Ok(Dtype::Float64),
            other => Err(Error::UnknownDtype(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::Float32 => "float32",
            Dtype::Float64 => "float64",
        }
    }
}

pub const INTERLEAVE: &str = "bsq";
pub const BYTE_ORDER: &str = "little";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: Dtype,
}

#[derive(Serialize, Deserialize)]
struct RawHeader {
    width: usize,
    height: usize,
    bands: usize,
    dtype: String,
    interleave: String,
    byte_order: String,
}

impl ImageHeader {
    pub fn payload_len(&self) -> u64 {
        (self.width * self.height * self.bands * self.dtype.size()) as u64
    }

    pub fn to_json(&self) -> String {
        let raw = RawHeader {
            width: self.width,
            height: self.height,
            bands: self.bands,
            dtype: self.dtype.name().to_string(),
            interleave: INTERLEAVE.to_string(),
            byte_order: BYTE_ORDER.to_string(),
        };
        serde_json::to_string_pretty(&raw).expect("header serializes")
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let inconsistent = |reason: String| Error::InconsistentHeader {
            path: path.to_path_buf(),
            reason,
        };
        let raw: RawHeader = serde_json::from_str(text).map_err(|e| inconsistent(e.to_string()))?;
        let dtype = Dtype::parse(&raw.dtype)?;
        if raw.interleave != INTERLEAVE {
            return Err(inconsistent(format!("unsupported interleave {:?}", raw.interleave)));
        }
        if raw.byte_order != BYTE_ORDER {
            return Err(inconsistent(format!("unsupported byte order {:?}", raw.byte_order)));
        }
        if raw.width == 0 || raw.height == 0 || raw.bands == 0 {
            return Err(inconsistent("zero dimension".into()));
        }
        Ok(Self {
            width: raw.width,
            height: raw.height,
            bands: raw.bands,
            dtype,
        })
    }
}

/// Sidecar path: `dir/name.bin` → `dir/name.hdr.json`.
pub fn header_path(path: &Path) -> PathBuf {
    path.with_extension("hdr.json")
}

pub fn read_header(path: &Path) -> Result<ImageHeader> {
    let hdr = header_path(path);
    let text = match fs::read_to_string(&hdr) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingHeader(hdr)),
        Err(e) => return Err(Error::io(hdr, e)),
    };
    ImageHeader::parse(&text, &hdr)
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    let path = path.as_ref();
    let header = read_header(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = header.payload_len();
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::InconsistentHeader {
            path: header_path(path),
            reason: format!("payload has {found} bytes, header implies {expected}"),
        });
    }
    let data: Vec<f64> = match header.dtype {
        Dtype::Float64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        Dtype::Float32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
    };
    HyperCube::new(header.width, header.height, header.bands, data)
}

pub fn write_cube(cube: &HyperCube, path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    let header = ImageHeader {
        width: cube.width(),
        height: cube.height(),
        bands: cube.bands(),
        dtype,
    };
    let mut bytes = Vec::with_capacity(header.payload_len() as usize);
    match dtype {
        Dtype::Float64 => cube.data().iter().for_each(|v| bytes.extend(v.to_le_bytes())),
        Dtype::Float32 => cube
            .data()
            .iter()
            .for_each(|v| bytes.extend((*v as f32).to_le_bytes())),
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let hdr = header_path(path);
    fs::write(&hdr, header.to_json()).map_err(|e| Error::io(hdr, e))
}

/// Reads a single-band file as a plane.
pub fn read_plane(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let cube = read_cube(path)?;
    if cube.bands() != 1 {
        return Err(Error::Shape(format!(
            "{} has {} bands, expected 1",
            path.display(),
            cube.bands()
        )));
    }
    let (w, h) = (cube.width(), cube.height());
    Plane::new(w, h, cube.into_data())
}

pub fn write_plane(plane: &Plane, path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let cube = HyperCube::new(plane.width(), plane.height(), 1, plane.data().to_vec())?;
    write_cube(&cube, path, dtype)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HyperCube {
        HyperCube::new(3, 2, 2, (0..12).map(|i| (i as f64).exp().sin() / 3.0).collect()).unwrap()
    }

    #[test]
    fn float64_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.bin");
        write_cube(&sample(), &path, Dtype::Float64).unwrap();
        assert!(dir.path().join("cube.hdr.json").exists());
        let back = read_cube(&path).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn float32_round_trip_is_close() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.bin");
        let cube = sample();
        write_cube(&cube, &path, Dtype::Float32).unwrap();
        let back = read_cube(&path).unwrap();
        for (a, b) in back.data().iter().zip(cube.data()) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.bin");
        write_cube(&sample(), &path, Dtype::Float64).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_cube(&path), Err(Error::Truncated { .. })));
    }

    #[test]
    fn header_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.bin");
        fs::write(&path, [0u8; 8]).unwrap();
        assert!(matches!(read_cube(&path), Err(Error::MissingHeader(_))));

        let hdr = header_path(&path);
        fs::write(
            &hdr,
            r#"{"width":1,"height":1,"bands":1,"dtype":"int16","interleave":"bsq","byte_order":"little"}"#,
        )
        .unwrap();
        assert!(matches!(read_cube(&path), Err(Error::UnknownDtype(_))));

        fs::write(
            &hdr,
            r#"{"width":1,"height":1,"bands":1,"dtype":"float64","interleave":"bil","byte_order":"little"}"#,
        )
        .unwrap();
        assert!(matches!(read_cube(&path), Err(Error::InconsistentHeader { .. })));

        fs::write(
            &hdr,
            r#"{"width":1,"height":1,"bands":1,"dtype":"float32","interleave":"bsq","byte_order":"little"}"#,
        )
        .unwrap();
        assert!(matches!(read_cube(&path), Err(Error::InconsistentHeader { .. })));
    }

    #[test]
    fn plane_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        let plane = Plane::from_fn(4, 3, |r, c| (r * 10 + c) as f64);
        write_plane(&plane, &path, Dtype::Float64).unwrap();
        assert_eq!(read_plane(&path).unwrap(), plane);
        write_cube(&sample(), &path, Dtype::Float64).unwrap();
        assert!(read_plane(&path).is_err());
    }
}
