//! Generates a piecewise-constant hyperspectral scene and writes it as a
//! band-sequential cube.
//!
//!     cargo run --example synthetic_scene -- out/scene.bin 64 80

use panfuse::io::{write_cube, Dtype};
use panfuse::sim::{piecewise_constant_scene, SceneSpec};

fn main() -> panfuse::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| "scene.bin".into());
    let size: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let bands: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(32);

    let cube = piecewise_constant_scene(&SceneSpec {
        width: size,
        height: size,
        bands,
        shapes: 8,
        seed: 7,
    })?;
    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir).ok();
    }
    write_cube(&cube, &path, Dtype::Float64)?;

    let min = cube.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = cube.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("wrote {path}: {size}x{size}x{bands}, values in [{min:.3}, {max:.3}]");
    let centre = cube.spectrum(size * size / 2 + size / 2);
    println!("centre spectrum, first bands: {:?}", &centre[..centre.len().min(6)]);
    Ok(())
}
