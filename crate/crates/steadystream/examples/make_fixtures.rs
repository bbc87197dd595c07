//! Regenerates the golden files under `tests/fixtures/`.
//!
//! cargo run -p steadystream --example make_fixtures

use std::fs;
use std::path::Path;

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for (name, bytes) in steadystream::synth::fixture_set() {
        let path = root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        println!("{}", path.display());
    }
    Ok(())
}
