//! Builds a conversion protocol, serialises it, reads it back and re-checks
//! everything from the file alone.

use locc_areas::convert::{choose_q, colour_transform_nielsen};
use locc_areas::diagram::verify_colour_conservation;
use locc_areas::io::{verify_protocol_file, DiagramFile, ProtocolFile, ProtocolKind, StateFile};
use locc_areas::parse_schmidt;
use locc_areas::protocol::{kraus_convert, simulate_float, verify_completeness};

fn main() -> locc_areas::Result<()> {
    let start = parse_schmidt(&["1/2", "3/10", "1/5"])?;
    let target = parse_schmidt(&["1/2", "1/2"])?;
    let (d, corrections) = colour_transform_nielsen(&start, &target)?;
    let q = choose_q(&d);
    let operators = kraus_convert(&d, &start, &target, &q)?;
    assert!(verify_colour_conservation(&d, &start) && verify_completeness(&operators));
    let float = simulate_float(&operators, &start, 1e-12)?;
    println!(
        "{} outcomes, float deviation {:.1e}",
        operators.outcome_count(),
        float.max_deviation()
    );

    let file = ProtocolFile {
        kind: ProtocolKind::Convert,
        start: StateFile::from_state(&start, Some("start".into())),
        target: StateFile::from_state(&target, Some("target".into())),
        operators,
        diagram: DiagramFile::from_diagram(&d),
        corrections,
        q: Some(q.to_string()),
    };
    let text = file.to_json();
    let back = ProtocolFile::from_json(&text)?;
    assert_eq!(back, file);

    let report = verify_protocol_file(&back, 1e-12)?;
    for check in &report.checks {
        println!(
            "{:<26} {}",
            check.name,
            if check.passed { "ok" } else { &check.detail }
        );
    }
    println!("verified: {}", report.passed());
    Ok(())
}
