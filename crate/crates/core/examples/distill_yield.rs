//! Optimal distillation of a single copy into maximally entangled m-states.
//!
//!     cargo run --example distill_yield -- 1/2 3/10 1/5

use locc_areas::distill::optimal_distribution;
use locc_areas::{average_yield, parse_schmidt};

fn main() -> locc_areas::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let coeffs = if args.is_empty() {
        vec!["1/2".to_string(), "3/10".into(), "1/5".into()]
    } else {
        args
    };
    let state = parse_schmidt(&coeffs)?;
    let dist = optimal_distribution(&state);
    println!("state {state}");
    for (m, p) in dist.entries() {
        println!("  p_{m} = {p}");
    }
    println!("average yield {:.10} ebits", average_yield(&dist)?);
    Ok(())
}
