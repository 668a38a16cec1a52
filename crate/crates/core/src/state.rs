//! Schmidt vectors, the majorization test between them, and outcome
//! distributions over maximally entangled m-states.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Squared Schmidt coefficients of a bipartite pure state, sorted in
/// non-increasing order, strictly positive and summing to exactly one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SchmidtVector {
    lambdas: Vec<Rational>,
    source_permutation: Vec<usize>,
}

impl SchmidtVector {
    /// Sorted coefficients λ_1 ≥ λ_2 ≥ … > 0.
    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    /// `source_permutation[k]` is the input position of the k-th sorted
    /// coefficient. Positions of trimmed zeros follow the kept entries, so
    /// the slice is as long as the original input.
    pub fn source_permutation(&self) -> &[usize] {
        &self.source_permutation
    }

    /// Schmidt rank.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn get(&self, i: usize) -> Rational {
        self.lambdas.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// The coefficients zero-padded to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<Rational> {
        (0..len.max(self.len())).map(|i| self.get(i)).collect()
    }

    /// The product state (1).
    pub fn product() -> SchmidtVector {
        SchmidtVector {
            lambdas: vec![Rational::one()],
            source_permutation: vec![0],
        }
    }

    /// The maximally entangled m-state, all coefficients 1/m.
    pub fn m_state(m: usize) -> SchmidtVector {
        assert!(m >= 1, "an m-state needs m ≥ 1");
        SchmidtVector {
            lambdas: vec![Rational::new(1, m as i64); m],
            source_permutation: (0..m).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.lambdas.iter().map(Rational::to_f64).collect()
    }
}

impl fmt::Debug for SchmidtVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SchmidtVector").field(&self.lambdas).finish()
    }
}

impl fmt::Display for SchmidtVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.lambdas.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Builds a [`SchmidtVector`] from raw squared coefficients.
///
/// Coefficients are sorted descending (stable, so equal values keep their
/// input order) and zeros are dropped. The exact sum must be one.
pub fn make_schmidt(coeffs: &[Rational]) -> Result<SchmidtVector> {
    if coeffs.is_empty() {
        return Err(Error::EmptyState);
    }
    for (index, value) in coeffs.iter().enumerate() {
        if value.is_negative() {
            return Err(Error::NegativeCoefficient {
                index,
                value: value.clone(),
            });
        }
        if *value > 1 {
            return Err(Error::CoefficientAboveOne {
                index,
                value: value.clone(),
            });
        }
    }
    let sum: Rational = coeffs.iter().sum();
    if sum != 1 {
        return Err(Error::SumNotOne { sum });
    }

    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].cmp(&coeffs[a]));
    let (kept, trimmed): (Vec<usize>, Vec<usize>) =
        order.into_iter().partition(|&k| coeffs[k].is_positive());
    let lambdas = kept.iter().map(|&k| coeffs[k].clone()).collect();
    let mut trimmed = trimmed;
    trimmed.sort_unstable();
    let source_permutation = kept.into_iter().chain(trimmed).collect();
    Ok(SchmidtVector {
        lambdas,
        source_permutation,
    })
}

/// Parses each string as an exact rational and calls [`make_schmidt`].
pub fn parse_schmidt<S: AsRef<str>>(coeffs: &[S]) -> Result<SchmidtVector> {
    let values = coeffs
        .iter()
        .map(|s| Rational::parse(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    make_schmidt(&values)
}

/// Suffix-sum test: `true` iff `Σ_{i≥p} high[i] ≤ Σ_{i≥p} low[i]` for every
/// p, both sequences zero-padded to a common length. Inputs must each be
/// sorted non-increasing with equal totals.
pub(crate) fn suffix_dominated(high: &[Rational], low: &[Rational]) -> bool {
    let n = high.len().max(low.len());
    let at = |v: &[Rational], i: usize| v.get(i).cloned().unwrap_or_else(Rational::zero);
    let mut tail_high = Rational::zero();
    let mut tail_low = Rational::zero();
    for i in (0..n).rev() {
        tail_high += at(high, i);
        tail_low += at(low, i);
        if tail_high > tail_low {
            return false;
        }
    }
    true
}

/// Nielsen's condition: `target` can be reached from `start` with certainty
/// by LOCC iff every suffix sum of the target is at most the matching suffix
/// sum of the start.
pub fn nielsen_condition(start: &SchmidtVector, target: &SchmidtVector) -> bool {
    suffix_dominated(target.lambdas(), start.lambdas())
}

/// Key of an [`OutcomeDistribution`]: either the size m of a maximally
/// entangled m-state, or a named target state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeLabel {
    MState(u64),
    Named(String),
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::MState(m) => write!(f, "{m}"),
            OutcomeLabel::Named(name) => f.write_str(name),
        }
    }
}

/// Exact probabilities over outcomes, summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    entries: BTreeMap<OutcomeLabel, Rational>,
}

impl OutcomeDistribution {
    pub fn new(entries: BTreeMap<OutcomeLabel, Rational>) -> Result<OutcomeDistribution> {
        for (label, p) in &entries {
            if p.is_negative() || *p > 1 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} of outcome {label} is outside [0, 1]"
                )));
            }
        }
        let total: Rational = entries.values().sum();
        if total != 1 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(OutcomeDistribution { entries })
    }

    /// Builds a distribution over m-states from `(m, p_m)` pairs, summing
    /// duplicate m and dropping zero entries.
    pub fn from_m_states(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (m, p) in pairs {
            if p.is_zero() {
                continue;
            }
            *entries
                .entry(OutcomeLabel::MState(m))
                .or_insert_with(Rational::zero) += p;
        }
        OutcomeDistribution::new(entries)
    }

    pub fn entries(&self) -> &BTreeMap<OutcomeLabel, Rational> {
        &self.entries
    }

    /// Probability of the m-state outcome (zero when absent).
    pub fn probability_of(&self, m: u64) -> Rational {
        self.entries
            .get(&OutcomeLabel::MState(m))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// Average distilled entanglement `Σ p_m log2 m` in ebits.
pub fn average_yield(dist: &OutcomeDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (label, p) in dist.entries() {
        match label {
            OutcomeLabel::MState(m) if *m >= 1 => total += p.to_f64() * (*m as f64).log2(),
            other => return Err(Error::NonIntegerLabel(other.to_string())),
        }
    }
    Ok(total)
}
