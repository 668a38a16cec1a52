//! Colouring I step by step: which pieces move where, and the diagram that
//! results.

use locc_areas::diagram::{render_ascii, verify_row_distinct, StepProfile};
use locc_areas::distill::colour_transform_traced;
use locc_areas::{parse_schmidt, Rational};

fn main() -> locc_areas::Result<()> {
    let state = parse_schmidt(&["2/5", "3/10", "3/10"])?;
    let target = StepProfile::new(vec![
        Rational::new(1, 2),
        Rational::new(2, 5),
        Rational::new(1, 10),
    ])?;
    let (d, plan) = colour_transform_traced(&state, &target)?;
    for bunch in &plan.bunches {
        println!("column {}:", bunch.column);
        if let Some(p) = &bunch.incoming {
            println!(
                "  swapped back colour {} ({}) from height {} to {}",
                p.colour, p.area, p.origin_lo, p.landing_lo
            );
        }
        for p in &bunch.direct {
            println!(
                "  colour {} ({}) from column {} lands at {}",
                p.colour, p.area, p.from, p.landing_lo
            );
        }
        if bunch.overflow.is_positive() {
            println!("  overflow {} of its own colour", bunch.overflow);
        }
    }
    println!("rows distinct: {}", verify_row_distinct(&d));
    print!("{}", render_ascii(&d, 240)?);
    Ok(())
}
