//! Writes the canonical diagram of a state as ASCII and as SVG.
//!
//!     cargo run --example render_diagram -- out.svg

use locc_areas::diagram::{canonical_diagram, render, RenderFormat};
use locc_areas::parse_schmidt;

fn main() -> locc_areas::Result<()> {
    let state = parse_schmidt(&["2/5", "3/10", "1/5", "1/10"])?;
    let d = canonical_diagram(&state);
    print!("{}", render(&d, RenderFormat::Ascii)?);
    let svg = render(&d, RenderFormat::Svg)?;
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, svg).map_err(|e| locc_areas::Error::Io(e.to_string()))?;
            println!("wrote {path}");
        }
        None => println!("{} bytes of svg", svg.len()),
    }
    Ok(())
}
