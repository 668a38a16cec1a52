//! Best probability of a single m-state, with the diagram that achieves it.
//!
//!     cargo run --example max_probability -- 2 7/10 1/5 1/10

use locc_areas::diagram::{render_ascii, DEFAULT_ASCII_CAP};
use locc_areas::distill::{colour_transform, max_prob};
use locc_areas::parse_schmidt;

fn main() -> locc_areas::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let rest: Vec<String> = args.collect();
    let coeffs = if rest.is_empty() {
        vec!["7/10".to_string(), "1/5".into(), "1/10".into()]
    } else {
        rest
    };
    let state = parse_schmidt(&coeffs)?;
    let res = max_prob(&state, m)?;
    println!(
        "p_max = {} for m = {m} (r0 = {}, h_max = {})",
        res.p_max, res.r0, res.h_max
    );
    println!("target profile {}", res.target);
    let d = colour_transform(&state, &res.target)?;
    print!("{}", render_ascii(&d, DEFAULT_ASCII_CAP)?);
    Ok(())
}
