//! Measurement protocols read off coloured diagrams.
//!
//! Each outcome is a Kraus operator M on Alice's index. Its entries map a
//! source index j (a colour) to a target index i (a column). Amplitudes
//! are square roots and usually irrational, so operators store squared
//! coefficients and every exact identity is checked in squared form. Only
//! [`simulate_float`] takes square roots.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::convert::{q_is_admissible, slice_bands, verify_slice_distinct_at};
use crate::diagram::{
    elementary_bands, verify_colour_conservation, verify_row_distinct, ColouredDiagram,
};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::state::{OutcomeDistribution, SchmidtVector};

/// One nonzero matrix element `(i ← j)` with its squared coefficient.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KrausEntry {
    pub i: usize,
    pub j: usize,
    pub coeff2: Rational,
}

/// A Kraus operator standing for `multiplicity` identical outcomes.
///
/// A conversion measurement has Q outcomes and Q can be astronomically
/// large, but consecutive slices with the same colour table give the same
/// operator, so they are stored once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrausOperator {
    pub entries: Vec<KrausEntry>,
    #[serde(with = "crate::rational::biguint_string")]
    pub multiplicity: BigUint,
}

impl KrausOperator {
    pub fn new(mut entries: Vec<KrausEntry>, multiplicity: BigUint) -> KrausOperator {
        entries.sort();
        KrausOperator {
            entries,
            multiplicity,
        }
    }

    pub fn coeff2(&self, i: usize, j: usize) -> Rational {
        self.entries
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map_or_else(Rational::zero, |e| e.coeff2.clone())
    }

    /// Distinct targets and distinct sources: the row it came from was
    /// bi-orthogonal, and `M†M` is diagonal.
    pub fn is_bi_orthogonal(&self) -> bool {
        let is: BTreeSet<usize> = self.entries.iter().map(|e| e.i).collect();
        let js: BTreeSet<usize> = self.entries.iter().map(|e| e.j).collect();
        is.len() == self.entries.len() && js.len() == self.entries.len()
    }
}

/// What an outcome yields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeTag {
    /// A maximally entangled m-state.
    MState { m: u64 },
    /// Slices `q_first..=q_last` of a conversion, each giving the target.
    Slices {
        #[serde(with = "crate::rational::biguint_string")]
        q_first: BigUint,
        #[serde(with = "crate::rational::biguint_string")]
        q_last: BigUint,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrausProtocol {
    pub operators: Vec<KrausOperator>,
    pub labels: Vec<OutcomeTag>,
    /// Probability of each single outcome; an operator of multiplicity k
    /// contributes k times this.
    pub probabilities: Vec<Rational>,
}

impl KrausProtocol {
    /// Total number of outcomes, counting multiplicities.
    pub fn outcome_count(&self) -> BigUint {
        self.operators.iter().map(|o| &o.multiplicity).sum()
    }

    /// `Σ multiplicity · probability`.
    pub fn total_probability(&self) -> Rational {
        self.operators
            .iter()
            .zip(&self.probabilities)
            .map(|(o, p)| Rational::from_biguint(&o.multiplicity) * p)
            .sum()
    }

    /// Probabilities summed per m over the m-state outcomes.
    pub fn distribution_by_m(&self) -> Result<OutcomeDistribution> {
        let mut pairs = Vec::new();
        for ((op, label), p) in self
            .operators
            .iter()
            .zip(&self.labels)
            .zip(&self.probabilities)
        {
            match label {
                OutcomeTag::MState { m } => {
                    pairs.push((*m, Rational::from_biguint(&op.multiplicity) * p))
                }
                OutcomeTag::Slices { .. } => {
                    return Err(Error::NonIntegerLabel("slice outcome".into()))
                }
            }
        }
        OutcomeDistribution::from_m_states(pairs)
    }

    /// The identity measurement on the first `dim` indices.
    pub fn identity(dim: usize, label: OutcomeTag) -> KrausProtocol {
        let entries = (0..dim)
            .map(|j| KrausEntry {
                i: j,
                j,
                coeff2: Rational::one(),
            })
            .collect();
        KrausProtocol {
            operators: vec![KrausOperator::new(entries, BigUint::one())],
            labels: vec![label],
            probabilities: vec![Rational::one()],
        }
    }
}

/// One outcome per maximal horizontal band of constant row composition.
/// A band of height h holding `(i, j_i)` gets `coeff²(i ← j_i) = h / λ_{j_i}`,
/// label m = band width and probability `h · m`.
pub fn kraus_distill(d: &ColouredDiagram, state: &SchmidtVector) -> Result<KrausProtocol> {
    if !verify_row_distinct(d) {
        return Err(Error::RowsNotDistinct);
    }
    if !verify_colour_conservation(d, state) {
        return Err(Error::Verification(
            "diagram colour areas do not match the state".into(),
        ));
    }
    Ok(band_operators(d, state))
}

/// The band-by-band operators of [`kraus_distill`] without its checks.
/// On a diagram that breaks colour conservation the result is not a
/// complete measurement.
pub fn band_operators(d: &ColouredDiagram, state: &SchmidtVector) -> KrausProtocol {
    let mut merged: Vec<(Rational, Vec<(usize, usize)>)> = Vec::new();
    for band in elementary_bands(d) {
        let h = &band.hi - &band.lo;
        match merged.last_mut() {
            Some((height, cells)) if *cells == band.cells => *height += h,
            _ => merged.push((h, band.cells)),
        }
    }
    let mut protocol = KrausProtocol {
        operators: Vec::new(),
        labels: Vec::new(),
        probabilities: Vec::new(),
    };
    for (h, cells) in merged {
        if cells.is_empty() {
            continue;
        }
        let m = cells.len();
        let entries = cells
            .iter()
            .map(|&(i, j)| KrausEntry {
                i,
                j,
                coeff2: &h / &state.get(j),
            })
            .collect();
        protocol
            .operators
            .push(KrausOperator::new(entries, BigUint::one()));
        protocol.labels.push(OutcomeTag::MState { m: m as u64 });
        protocol
            .probabilities
            .push(&h * Rational::from_integer(m as i64));
    }
    protocol
}

/// Q outcomes of probability 1/Q, slice q giving
/// `coeff²(i ← j_{q,i}) = λ'_i / (Q · λ_{j_{q,i}})`.
pub fn kraus_convert(
    d: &ColouredDiagram,
    start: &SchmidtVector,
    target: &SchmidtVector,
    q: &BigUint,
) -> Result<KrausProtocol> {
    if !q_is_admissible(d, q) {
        return Err(Error::SlicesNotDistinct(format!(
            "Q = {q} does not cut every column into single-colour pieces"
        )));
    }
    let report = verify_slice_distinct_at(d, q);
    if let Some(v) = report.violations.first() {
        return Err(Error::SlicesNotDistinct(format!(
            "colour {} sits in columns {} and {} within slices {}..={} ({} conflicts)",
            v.colour,
            v.columns.0,
            v.columns.1,
            v.q_first,
            v.q_last,
            report.violations.len()
        )));
    }
    if !verify_colour_conservation(d, start) {
        return Err(Error::Verification(
            "diagram colour areas do not match the start state".into(),
        ));
    }
    let heights = d.heights();
    if heights != target.padded(heights.len()) {
        return Err(Error::Verification(
            "diagram column heights differ from the target".into(),
        ));
    }
    let qr = Rational::from_biguint(q);
    let mut protocol = KrausProtocol {
        operators: Vec::new(),
        labels: Vec::new(),
        probabilities: Vec::new(),
    };
    for band in slice_bands(d) {
        let lo_q = (&band.lo * &qr).floor();
        let hi_q = (&band.hi * &qr).floor();
        let multiplicity = (&hi_q - &lo_q)
            .to_biguint()
            .expect("slice bands run upwards");
        let entries = band
            .cells
            .iter()
            .map(|&(i, j)| KrausEntry {
                i,
                j,
                coeff2: &heights[i] / (&qr * &start.get(j)),
            })
            .collect();
        protocol
            .operators
            .push(KrausOperator::new(entries, multiplicity));
        protocol.labels.push(OutcomeTag::Slices {
            q_first: (lo_q + BigInt::one()).to_biguint().expect("positive"),
            q_last: hi_q.to_biguint().expect("positive"),
        });
        protocol.probabilities.push(qr.recip());
    }
    Ok(protocol)
}

/// Exact completeness `Σ_n M_n† M_n = 1`: every operator is bi-orthogonal
/// (so the sum is diagonal) and, for every source index j up to the
/// largest one used, `Σ multiplicity · coeff²(· ← j) = 1`.
pub fn verify_completeness(p: &KrausProtocol) -> bool {
    if p.operators.is_empty() || p.operators.iter().any(|o| !o.is_bi_orthogonal()) {
        return false;
    }
    let mut sums: BTreeMap<usize, Rational> = BTreeMap::new();
    for op in &p.operators {
        let k = Rational::from_biguint(&op.multiplicity);
        for e in &op.entries {
            *sums.entry(e.j).or_insert_with(Rational::zero) += &k * &e.coeff2;
        }
    }
    let dim = sums.keys().next_back().map_or(0, |j| j + 1);
    (0..dim).all(|j| sums.get(&j).is_some_and(|s| *s == 1))
}

/// Probability of one outcome and the sorted squared Schmidt coefficients
/// of the normalised post-measurement state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostState {
    pub probability: Rational,
    pub coefficients: Vec<Rational>,
}

/// Exact post-measurement states, one per operator. A zero-probability
/// outcome is reported as an error in its own slot.
pub fn post_states(p: &KrausProtocol, state: &SchmidtVector) -> Vec<Result<PostState>> {
    p.operators
        .iter()
        .enumerate()
        .map(|(index, op)| {
            if !op.is_bi_orthogonal() {
                return Err(Error::Verification(format!(
                    "operator {index} maps two indices onto one"
                )));
            }
            let weights: Vec<Rational> = op
                .entries
                .iter()
                .map(|e| &e.coeff2 * &state.get(e.j))
                .filter(|w| !w.is_zero())
                .collect();
            let probability: Rational = weights.iter().sum();
            if probability.is_zero() {
                return Err(Error::ZeroProbabilityOutcome { index });
            }
            let mut coefficients: Vec<Rational> =
                weights.iter().map(|w| w / &probability).collect();
            coefficients.sort_by(|a, b| b.cmp(a));
            Ok(PostState {
                probability,
                coefficients,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatReport {
    /// `‖Σ multiplicity · M†M − 1‖_max`.
    pub completeness_deviation: f64,
    /// Largest gap between a simulated and a stored outcome probability.
    pub probability_deviation: f64,
    /// Largest gap between simulated and exact squared Schmidt
    /// coefficients of a post-state.
    pub coefficient_deviation: f64,
    pub outcomes: usize,
}

impl FloatReport {
    pub fn max_deviation(&self) -> f64 {
        self.completeness_deviation
            .max(self.probability_deviation)
            .max(self.coefficient_deviation)
    }
}

/// Rebuilds every operator as a dense `f64` matrix and checks completeness,
/// probabilities and post-state Schmidt coefficients (from an SVD) against
/// the exact values.
pub fn simulate_float(p: &KrausProtocol, state: &SchmidtVector, tol: f64) -> Result<FloatReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let max_i = p
        .operators
        .iter()
        .flat_map(|o| o.entries.iter().map(|e| e.i))
        .max();
    let max_j = p
        .operators
        .iter()
        .flat_map(|o| o.entries.iter().map(|e| e.j))
        .max();
    let dim_out = max_i.map_or(0, |i| i + 1).max(state.len());
    let dim_in = max_j.map_or(0, |j| j + 1).max(state.len());

    let psi = DMatrix::from_fn(dim_in, dim_in, |a, b| {
        if a == b {
            state.get(a).to_f64().sqrt()
        } else {
            0.0
        }
    });
    let exact = post_states(p, state);

    let mut gram = DMatrix::<f64>::zeros(dim_in, dim_in);
    let mut probability_deviation: f64 = 0.0;
    let mut coefficient_deviation: f64 = 0.0;
    for (k, op) in p.operators.iter().enumerate() {
        let mut m = DMatrix::<f64>::zeros(dim_out, dim_in);
        for e in &op.entries {
            m[(e.i, e.j)] += e.coeff2.to_f64().sqrt();
        }
        let weight = op.multiplicity.to_f64().unwrap_or(f64::INFINITY);
        gram += m.transpose() * &m * weight;

        let after = &m * &psi;
        let prob = after.norm_squared();
        let stored = p.probabilities.get(k).map_or(f64::NAN, Rational::to_f64);
        probability_deviation = probability_deviation.max(deviation(prob, stored));
        if let Some(Ok(post)) = exact.get(k) {
            if prob > 0.0 {
                let mut sv: Vec<f64> = (after / prob.sqrt())
                    .svd(false, false)
                    .singular_values
                    .iter()
                    .map(|s| s * s)
                    .collect();
                sv.sort_by(|a, b| b.total_cmp(a));
                for (t, s) in sv.iter().enumerate() {
                    let want = post.coefficients.get(t).map_or(0.0, Rational::to_f64);
                    coefficient_deviation = coefficient_deviation.max(deviation(*s, want));
                }
            }
        }
    }
    let completeness_deviation = (gram - DMatrix::<f64>::identity(dim_in, dim_in)).amax();
    let report = FloatReport {
        completeness_deviation,
        probability_deviation,
        coefficient_deviation,
        outcomes: p.operators.len(),
    };
    let worst = report.max_deviation();
    if p.operators.is_empty() || worst.is_nan() || worst > tol {
        return Err(Error::ToleranceExceeded(format!(
            "completeness {:.3e}, probability {:.3e}, coefficients {:.3e} against tolerance {tol:e}",
            report.completeness_deviation, report.probability_deviation, report.coefficient_deviation
        )));
    }
    Ok(report)
}

fn deviation(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}
