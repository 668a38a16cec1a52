//! JSON documents: state files in, protocol files out and back in.
//!
//! Every rational is written as a lowest-terms `"num/den"` string. Float
//! fields, where present, are conveniences for people and are never read
//! back.

use serde::{Deserialize, Serialize};

use crate::convert::{verify_slice_distinct_at, CorrectionRecord};
use crate::diagram::{
    verify_colour_conservation, verify_row_distinct, ColourSegment, ColouredDiagram,
};
use crate::error::{Error, Result};
use crate::protocol::{
    kraus_convert, kraus_distill, post_states, simulate_float, verify_completeness, KrausProtocol,
    OutcomeTag,
};
use crate::rational::Rational;
use crate::state::{make_schmidt, nielsen_condition, SchmidtVector};

/// A coefficient as written in a state file: a string such as `"3/10"` or
/// `"0.3"`, or a bare JSON number, which is read by its decimal text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Text(String),
    Number(serde_json::Number),
}

impl Coefficient {
    fn parse(&self) -> Result<Rational> {
        match self {
            Coefficient::Text(s) => Rational::parse(s),
            Coefficient::Number(n) => Rational::parse(&n.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub lambda: Vec<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_state(state: &SchmidtVector, label: Option<String>) -> StateFile {
        StateFile {
            lambda: state
                .lambdas()
                .iter()
                .map(|l| Coefficient::Text(rational_text(l)))
                .collect(),
            label,
        }
    }

    /// A step profile written as a coefficient list; zero heights are kept
    /// in the file and trimmed when it is read back.
    pub fn from_heights(heights: &[Rational], label: Option<String>) -> StateFile {
        StateFile {
            lambda: heights
                .iter()
                .map(|l| Coefficient::Text(rational_text(l)))
                .collect(),
            label,
        }
    }

    pub fn to_state(&self) -> Result<SchmidtVector> {
        let values = self
            .lambda
            .iter()
            .map(Coefficient::parse)
            .collect::<Result<Vec<_>>>()?;
        make_schmidt(&values)
    }
}

/// `"num/den"` text, the same as the serde form.
pub fn rational_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Reads a state document such as `{"lambda": ["1/2", "0.3", "1/5"]}`.
pub fn parse_state(text: &str) -> Result<SchmidtVector> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    file.to_state()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramFile {
    /// Bottom-to-top colour stacks, one per column.
    pub columns: Vec<Vec<ColourSegment>>,
    /// N, as a decimal string.
    pub denominator: String,
}

impl DiagramFile {
    pub fn from_diagram(d: &ColouredDiagram) -> DiagramFile {
        DiagramFile {
            columns: d.columns().to_vec(),
            denominator: d.denominator().to_string(),
        }
    }

    pub fn to_diagram(&self) -> Result<ColouredDiagram> {
        let d = ColouredDiagram::from_columns(self.columns.clone())?;
        if d.denominator().to_string() != self.denominator {
            return Err(Error::InvalidDiagram(format!(
                "stored denominator {} but segments need {}",
                self.denominator,
                d.denominator()
            )));
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Distill,
    Convert,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub kind: ProtocolKind,
    pub start: StateFile,
    /// Distillation: the target step profile. Conversion: the target state.
    pub target: StateFile,
    pub operators: KrausProtocol,
    pub diagram: DiagramFile,
    #[serde(default)]
    pub corrections: Vec<CorrectionRecord>,
    /// Number of slices of a conversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
}

impl ProtocolFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol files always serialise")
    }

    pub fn from_json(text: &str) -> Result<ProtocolFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("protocol file: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Largest deviation seen by the floating-point cross-check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_float_deviation: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, outcome: std::result::Result<(), String>) {
        let (passed, detail) = match outcome {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Re-runs every check on a stored protocol without recomputing the
/// colouring. Returns `Err` only when the file itself cannot be read as
/// states and a diagram; failed checks are reported in the
/// [`VerifyReport`].
pub fn verify_protocol_file(file: &ProtocolFile, tol: f64) -> Result<VerifyReport> {
    let start = file.start.to_state()?;
    let target_values = file
        .target
        .lambda
        .iter()
        .map(Coefficient::parse)
        .collect::<Result<Vec<_>>>()?;
    let target = make_schmidt(&target_values)?;
    let diagram = file.diagram.to_diagram()?;
    let heights = diagram.heights();
    let mut report = VerifyReport {
        checks: Vec::new(),
        max_float_deviation: None,
    };

    report.record(
        "profile",
        ensure(heights == target.padded(heights.len()), || {
            "diagram column heights differ from the target".into()
        }),
    );
    report.record(
        "colour_conservation",
        ensure(verify_colour_conservation(&diagram, &start), || {
            "colour areas differ from the start coefficients".into()
        }),
    );

    let rebuilt = match file.kind {
        ProtocolKind::Distill => {
            report.record(
                "row_distinct",
                ensure(verify_row_distinct(&diagram), || {
                    "a row repeats a colour".into()
                }),
            );
            kraus_distill(&diagram, &start)
        }
        ProtocolKind::Convert => {
            report.record(
                "nielsen_condition",
                ensure(nielsen_condition(&start, &target), || {
                    "the target does not majorize the start".into()
                }),
            );
            let q = file
                .q
                .as_deref()
                .ok_or_else(|| Error::Parse("conversion protocol without Q".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("Q: {e}")))?;
            let slices = verify_slice_distinct_at(&diagram, &q);
            report.record(
                "slice_distinct",
                ensure(slices.is_distinct(), || {
                    format!("{} slice conflicts", slices.violations.len())
                }),
            );
            let mut records = Ok(());
            for rec in &file.corrections {
                if let Err(e) = rec.check(&heights) {
                    records = Err(e.to_string());
                    break;
                }
            }
            report.record("correction_records", records);
            kraus_convert(&diagram, &start, &target, &q)
        }
    };
    report.record(
        "operators_match_diagram",
        match rebuilt {
            Ok(p) => ensure(p == file.operators, || {
                "stored operators differ from those the diagram gives".into()
            }),
            Err(e) => Err(e.to_string()),
        },
    );

    let p = &file.operators;
    report.record(
        "shape",
        ensure(
            p.operators.len() == p.labels.len() && p.operators.len() == p.probabilities.len(),
            || "operators, labels and probabilities differ in length".into(),
        ),
    );
    report.record(
        "completeness",
        ensure(verify_completeness(p), || "Σ M†M ≠ 1".into()),
    );
    report.record(
        "probabilities_sum_to_one",
        ensure(p.total_probability() == 1, || {
            format!("total probability {}", p.total_probability())
        }),
    );

    let mut posts = Ok(());
    for (k, post) in post_states(p, &start).into_iter().enumerate() {
        let outcome = match post {
            Ok(post) => {
                let stored = p.probabilities.get(k);
                let expected: Vec<Rational> = match p.labels.get(k) {
                    Some(OutcomeTag::MState { m }) => {
                        vec![Rational::new(1, *m as i64); *m as usize]
                    }
                    Some(OutcomeTag::Slices { .. }) => target.lambdas().to_vec(),
                    None => Vec::new(),
                };
                if stored != Some(&post.probability) {
                    Err(format!("outcome {k}: probability {}", post.probability))
                } else if post.coefficients != expected {
                    Err(format!("outcome {k}: post-state differs from its label"))
                } else {
                    Ok(())
                }
            }
            Err(e) => Err(format!("outcome {k}: {e}")),
        };
        if outcome.is_err() {
            posts = outcome;
            break;
        }
    }
    report.record("post_states", posts);

    match simulate_float(p, &start, tol) {
        Ok(f) => {
            report.max_float_deviation = Some(f.max_deviation());
            report.record("float_simulation", Ok(()));
        }
        Err(e) => report.record("float_simulation", Err(e.to_string())),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        let s = parse_state(r#"{"lambda": ["1/2", "1/2"]}"#).unwrap();
        assert_eq!(s.lambdas(), &[Rational::new(1, 2), Rational::new(1, 2)]);
        let s = parse_state(r#"{"lambda": ["0.5", "0.3", "0.2"]}"#).unwrap();
        assert_eq!(
            s.lambdas(),
            &[
                Rational::new(1, 2),
                Rational::new(3, 10),
                Rational::new(1, 5)
            ]
        );
        let s = parse_state(r#"{"lambda": [0.5, 0.3, 0.2], "label": "psi"}"#).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn reports_bad_sums() {
        let err = parse_state(r#"{"lambda": ["1/2", "1/4"]}"#).unwrap_err();
        assert_eq!(err.to_string(), "sum 3/4 ≠ 1");
        assert!(matches!(parse_state("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_state(r#"{"lamda": ["1"]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn state_round_trip() {
        let s = parse_state(r#"{"lambda": ["0.5", "0.3", "0.2"]}"#).unwrap();
        let text = serde_json::to_string(&StateFile::from_state(&s, None)).unwrap();
        assert_eq!(text, r#"{"lambda":["1/2","3/10","1/5"]}"#);
        assert_eq!(parse_state(&text).unwrap(), s);
    }
}
