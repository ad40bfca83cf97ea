//! Band-sequential cube files with their JSON header sidecar.

use panfuse::io::{read_cube, read_header, write_cube, Dtype};
use panfuse::HyperCube;

fn main() -> panfuse::Result<()> {
    let dir = std::env::temp_dir().join("panfuse_cube_io");
    std::fs::create_dir_all(&dir).ok();
    let cube = HyperCube::new(4, 3, 2, (0..24).map(|i| (i as f64 * 0.37).sin()).collect())?;

    for dtype in [Dtype::Float64, Dtype::Float32] {
        let path = dir.join(format!("cube_{}.bin", dtype.name()));
        write_cube(&cube, &path, dtype)?;
        let header = read_header(&path)?;
        let back = read_cube(&path)?;
        let err = back.data().iter().zip(cube.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{}: {} bytes payload, max round-trip error {err:.1e}", dtype.name(), header.payload_len());
    }
    let sidecar = std::fs::read_to_string(dir.join("cube_float64.hdr.json")).unwrap_or_default();
    println!("header sidecar:\n{sidecar}");

    // a short payload is reported rather than silently padded
    let path = dir.join("cube_float64.bin");
    let bytes = std::fs::read(&path).unwrap_or_default();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).ok();
    match read_cube(&path) {
        Err(e) => println!("truncated file: {e} (exit code {})", e.exit_code()),
        Ok(_) => println!("truncated file unexpectedly read"),
    }
    Ok(())
}
