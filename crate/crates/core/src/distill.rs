//! Distillation into maximally entangled m-states: outcome probabilities of
//! a step profile, the optimal yield, the Lo–Popescu maximum probability,
//! and the first colouring algorithm that realises any upward-only target
//! profile with row-distinct colours.

use num_bigint::BigInt;

use crate::diagram::{
    move_area, verify_colour_conservation, verify_no_downward_flow, verify_row_distinct,
    ColourSegment, ColouredDiagram, Region, StepProfile,
};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::state::{OutcomeDistribution, SchmidtVector};

/// `p_m = (λ'_m − λ'_{m+1}) · m`, with zero entries left out.
pub fn distribution_from_profile(target: &StepProfile) -> OutcomeDistribution {
    let h = target.heights();
    let pairs = (0..h.len()).map(|k| {
        let m = k + 1;
        let step = &h[k] - &target.get(k + 1);
        (m as u64, step * Rational::from_integer(m as i64))
    });
    OutcomeDistribution::from_m_states(pairs)
        .expect("step probabilities of a normalised profile always sum to one")
}

/// The best m-state distribution: measure the untouched start diagram.
pub fn optimal_distribution(state: &SchmidtVector) -> OutcomeDistribution {
    distribution_from_profile(&StepProfile::from_state(state))
}

/// Change in `N·E` when one area element moves from a row of width `ma` to
/// a row of width `mb`:
/// `log2[((mb+1)/mb)^mb · ((ma−1)/ma)^ma · (mb+1)/(ma−1)]`.
///
/// The product is formed exactly, so `ma = mb + 1` gives exactly zero.
pub fn swap_delta(ma: u64, mb: u64) -> Result<f64> {
    if ma <= 1 {
        return Err(Error::Domain(format!(
            "row width ma = {ma} leaves no row to take from"
        )));
    }
    if mb == 0 {
        return Err(Error::Domain("row width mb must be at least 1".into()));
    }
    let pow = |n: u64, d: u64, e: u64| -> Rational {
        let e = e as usize;
        Rational::from_bigs(
            num_traits::pow(BigInt::from(n), e),
            num_traits::pow(BigInt::from(d), e),
        )
    };
    let product = pow(mb + 1, mb, mb)
        * pow(ma - 1, ma, ma)
        * Rational::from_bigs((mb + 1).into(), (ma - 1).into());
    if product == 1 {
        return Ok(0.0);
    }
    Ok(product.to_f64().log2())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxProbResult {
    pub p_max: Rational,
    /// The minimising r. On ties the largest one, which is the width of the
    /// flat block in the target profile.
    pub r0: usize,
    /// Height of the main block, `λ^max_{m−r0}`.
    pub h_max: Rational,
    pub target: StepProfile,
}

/// Maximum probability of obtaining an m-state:
/// `min_{1≤r≤m} (m/r) Σ_{i=m−r+1}^{I} λ_i`, together with the profile that
/// achieves it. For m beyond the Schmidt rank the answer is zero.
pub fn max_prob(state: &SchmidtVector, m: usize) -> Result<MaxProbResult> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let lam = state.padded(m);
    // tail[k] = Σ_{i≥k} λ_i, zero-based
    let mut tail = vec![Rational::zero(); lam.len() + 1];
    for k in (0..lam.len()).rev() {
        tail[k] = &tail[k + 1] + &lam[k];
    }
    let mut best: Option<(Rational, usize)> = None;
    for r in 1..=m {
        let value = Rational::new(m as i64, r as i64) * &tail[m - r];
        if best.as_ref().is_none_or(|(b, _)| value <= *b) {
            best = Some((value, r));
        }
    }
    let (p_max, r0) = best.expect("m ≥ 1 gives at least one candidate");
    let h_max = &tail[m - r0] / Rational::from_integer(r0 as i64);
    let mut heights: Vec<Rational> = lam[..m - r0].to_vec();
    heights.extend(std::iter::repeat_n(h_max.clone(), r0));
    heights.resize(lam.len(), Rational::zero());
    let target = StepProfile::new(heights)?;
    Ok(MaxProbResult {
        p_max,
        r0,
        h_max,
        target,
    })
}

/// A whole piece of one colour moved into a deficit column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovedPiece {
    pub colour: usize,
    /// Column the piece was cut from.
    pub from: usize,
    pub area: Rational,
    /// Absolute height of the bottom of the piece before the move.
    pub origin_lo: Rational,
    /// Absolute height of the bottom of the piece in its new column.
    pub landing_lo: Rational,
}

/// Everything that lands in one deficit column P (a column whose target
/// height exceeds its start height).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BunchPlan {
    pub column: usize,
    /// Overflow of the deficit column to the right, swapped back into this
    /// one. Always the first arrival.
    pub incoming: Option<MovedPiece>,
    /// Surplus pieces from source columns, in arrival order.
    pub direct: Vec<MovedPiece>,
    /// Own colour pushed out of the top and handed to the next bunch.
    pub overflow: Rational,
    /// Own colour left at the bottom, `λ_P − overflow`.
    pub own_remaining: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColouringPlan {
    /// The target profile, padded to the working number of columns.
    pub target: StepProfile,
    /// Bunches right to left.
    pub bunches: Vec<BunchPlan>,
}

impl ColouringPlan {
    pub fn bunch_at(&self, column: usize) -> Option<&BunchPlan> {
        self.bunches.iter().find(|b| b.column == column)
    }
}

/// Recolours the start diagram so that its column heights become `target`
/// while every row stays colour-distinct.
pub fn colour_transform(state: &SchmidtVector, target: &StepProfile) -> Result<ColouredDiagram> {
    colour_transform_traced(state, target).map(|(d, _)| d)
}

/// [`colour_transform`] plus the plan of moved pieces it executed.
pub fn colour_transform_traced(
    state: &SchmidtVector,
    target: &StepProfile,
) -> Result<(ColouredDiagram, ColouringPlan)> {
    let n = state.len().max(target.len());
    let start = StepProfile::from_state(state).padded(n);
    let target = target.padded(n);
    if !verify_no_downward_flow(&start, &target) {
        return Err(Error::NotReachable);
    }
    let lam = start.heights();
    let tgt = target.heights();
    let fail = |msg: String| Error::InternalColouringFailure(msg);

    let deficits: Vec<usize> = (0..n).rev().filter(|&i| tgt[i] > lam[i]).collect();
    let sources: Vec<usize> = (0..n).rev().filter(|&i| tgt[i] < lam[i]).collect();

    let mut bunches: Vec<BunchPlan> = deficits
        .iter()
        .map(|&p| BunchPlan {
            column: p,
            incoming: None,
            direct: Vec::new(),
            overflow: Rational::zero(),
            own_remaining: lam[p].clone(),
        })
        .collect();
    let mut received = vec![Rational::zero(); bunches.len()];
    let mut cursor = 0usize;

    for &s in &sources {
        let mut piece = MovedPiece {
            colour: s,
            from: s,
            area: &lam[s] - &tgt[s],
            origin_lo: tgt[s].clone(),
            landing_lo: Rational::zero(),
        };
        let mut swapped_back = false;
        loop {
            let Some(bunch) = bunches.get_mut(cursor) else {
                return Err(fail(format!(
                    "no deficit column left for colour {}",
                    piece.colour
                )));
            };
            let p = bunch.column;
            if p >= piece.from {
                return Err(fail(format!(
                    "piece of colour {} would move right from {} to {p}",
                    piece.colour, piece.from
                )));
            }
            received[cursor] += &piece.area;
            if swapped_back {
                bunch.incoming = Some(piece);
            } else {
                bunch.direct.push(piece);
            }
            let need = &tgt[p] - &lam[p];
            if received[cursor] < need {
                break;
            }
            cursor += 1;
            let overflow = &received[cursor - 1] - &need;
            if overflow.is_zero() {
                break;
            }
            if overflow > lam[p] {
                return Err(fail(format!("column {p} cannot swap back {overflow}")));
            }
            bunch.own_remaining = &lam[p] - &overflow;
            bunch.overflow = overflow.clone();
            piece = MovedPiece {
                colour: p,
                from: p,
                area: overflow,
                origin_lo: bunch.own_remaining.clone(),
                landing_lo: Rational::zero(),
            };
            swapped_back = true;
        }
    }
    if cursor != bunches.len() {
        return Err(fail("deficit columns left unfilled".into()));
    }

    // landing heights: own colour, then arrivals latest first
    for bunch in &mut bunches {
        let mut h = bunch.own_remaining.clone();
        for piece in bunch
            .direct
            .iter_mut()
            .rev()
            .chain(bunch.incoming.iter_mut())
        {
            piece.landing_lo = h.clone();
            h += &piece.area;
        }
        if h != tgt[bunch.column] {
            return Err(fail(format!("column {} stacks to {h}", bunch.column)));
        }
    }

    let plan = ColouringPlan {
        target: target.clone(),
        bunches,
    };
    let diagram = execute_plan(state, n, &plan)?;
    if diagram.heights() != tgt
        || !verify_row_distinct(&diagram)
        || !verify_colour_conservation(&diagram, state)
    {
        return Err(fail("colouring I produced an invalid diagram".into()));
    }
    Ok((diagram, plan))
}

/// Replays a plan with top-only moves. Deficit columns are filled left to
/// right; a swapped-back piece is cut from the top of the next deficit
/// column before that column receives anything.
fn execute_plan(state: &SchmidtVector, n: usize, plan: &ColouringPlan) -> Result<ColouredDiagram> {
    let mut columns: Vec<Vec<ColourSegment>> = state
        .lambdas()
        .iter()
        .enumerate()
        .map(|(j, l)| vec![ColourSegment::new(j, l.clone())])
        .collect();
    columns.resize(n, Vec::new());
    let mut d = ColouredDiagram::from_columns(columns)?;
    for bunch in plan.bunches.iter().rev() {
        for piece in bunch.direct.iter().rev().chain(bunch.incoming.iter()) {
            let top = d.column_height(piece.from);
            let src = Region::new(piece.from, &top - &piece.area, top);
            let dst = d.column_height(bunch.column);
            d = move_area(&d, &src, bunch.column, &dst)?;
        }
    }
    Ok(d)
}
