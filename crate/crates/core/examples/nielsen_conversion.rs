//! Deterministic conversion between two states, with the slice corrections
//! that make it possible.

use locc_areas::convert::{choose_q, colour_transform_nielsen, verify_slice_distinct};
use locc_areas::protocol::{kraus_convert, post_states};
use locc_areas::{nielsen_condition, parse_schmidt, Error};

fn main() -> locc_areas::Result<()> {
    let start = parse_schmidt(&["1/2", "1/4", "1/4"])?;
    let target = parse_schmidt(&["1/2", "7/20", "3/20"])?;
    println!(
        "{start} -> {target}: nielsen {}",
        nielsen_condition(&start, &target)
    );

    let (d, records) = colour_transform_nielsen(&start, &target)?;
    for rec in &records {
        println!(
            "correction on column {}: R = {:?}, X = {:?}, Y = {:?}, W = {}",
            rec.l,
            rec.r,
            rec.x.iter().map(ToString::to_string).collect::<Vec<_>>(),
            rec.y.iter().map(ToString::to_string).collect::<Vec<_>>(),
            rec.w
        );
    }
    let q = choose_q(&d);
    println!(
        "Q = {q}, slices distinct: {}",
        verify_slice_distinct(&d).is_distinct()
    );

    let p = kraus_convert(&d, &start, &target, &q)?;
    for (k, post) in post_states(&p, &start).into_iter().enumerate() {
        let post = post?;
        println!(
            "outcome {k}: p = {}, state {:?}",
            post.probability,
            post.coefficients
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
        );
    }

    // the reverse direction would need more entanglement than there is
    match colour_transform_nielsen(&target, &start) {
        Err(Error::NotConvertible) => println!("{target} -> {start}: not convertible"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
