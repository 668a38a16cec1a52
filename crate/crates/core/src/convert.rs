//! Deterministic conversion between Schmidt vectors under majorization.
//!
//! Every column is cut into Q equal horizontal pieces; piece q of every
//! column together forms slice q, and each slice becomes one measurement
//! outcome whose post-state is the target. That needs *slice-distinct*
//! colours: no colour may appear at the same relative height in two
//! columns. The diagram from the first colouring is row-distinct but not
//! slice-distinct, so each bunch is corrected by trading equal areas of
//! colour between the deficit column and the columns that fed it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::diagram::{verify_colour_conservation, ColourSegment, ColouredDiagram, StepProfile};
use crate::distill::{colour_transform_traced, BunchPlan};
use crate::error::{Error, Result};
use crate::rational::{lcm_of_denominators, Rational};
use crate::state::{nielsen_condition, SchmidtVector};

/// Audit trail of one corrected bunch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    /// The deficit column L.
    #[serde(rename = "L")]
    pub l: usize,
    /// Source columns R_1..R_K, R_1 being the last to have arrived.
    #[serde(rename = "Rk")]
    pub r: Vec<usize>,
    /// Area X_k moved from R_k into L by the first colouring.
    #[serde(rename = "Xk")]
    pub x: Vec<Rational>,
    /// Area Y_k of L's own colour traded into R_k.
    #[serde(rename = "Yk")]
    pub y: Vec<Rational>,
    /// Swapped-back area that arrived from the previous bunch.
    #[serde(rename = "S_back")]
    pub s_back: Rational,
    /// Area of L's own colour traded into the host of the swapped-back
    /// colour.
    #[serde(rename = "W")]
    pub w: Rational,
    /// Own colour left in L by the first colouring.
    pub z: Rational,
    /// Column holding the swapped-back colour that W was traded into.
    pub host: Option<usize>,
}

impl CorrectionRecord {
    /// Checks the record against the target heights:
    /// `Y_k = λ'_{R_k} X_k / (λ'_L − λ'_{R_k})`, `λ'_L > λ'_{R_k}`,
    /// the matching bound on W, and `Σ Y_k + W ≤ z`.
    pub fn check(&self, target: &[Rational]) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::Verification(format!(
                "bunch at column {}: {msg}",
                self.l
            )))
        };
        let height = |i: usize| target.get(i).cloned().unwrap_or_else(Rational::zero);
        if self.r.len() != self.x.len() || self.r.len() != self.y.len() {
            return bad("R, X and Y have different lengths".into());
        }
        let ell = height(self.l);
        for ((&rk, x), y) in self.r.iter().zip(&self.x).zip(&self.y) {
            let r = height(rk);
            if r >= ell {
                return bad(format!(
                    "λ'_L = {ell} is not above λ'_R = {r} of column {rk}"
                ));
            }
            let expected = &r * x / (&ell - &r);
            if *y != expected {
                return bad(format!("Y = {y} for column {rk}, expected {expected}"));
            }
        }
        match self.host {
            Some(h) => {
                let r = height(h);
                if r >= ell {
                    return bad(format!("host column {h} is not below L"));
                }
                let bound = &self.s_back * &r / (&ell - &r);
                if self.w > bound {
                    return bad(format!("W = {} exceeds {bound}", self.w));
                }
            }
            None if !self.w.is_zero() => return bad("W without a host".into()),
            None => {}
        }
        let total: Rational = self.y.iter().sum::<Rational>() + &self.w;
        if total > self.z {
            return bad(format!("Σ Y + W = {total} exceeds z = {}", self.z));
        }
        Ok(())
    }
}

/// Two columns sharing a colour inside slices `q_first..=q_last` (1-based,
/// counted from the bottom).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceViolation {
    #[serde(with = "crate::rational::biguint_string")]
    pub q_first: BigUint,
    #[serde(with = "crate::rational::biguint_string")]
    pub q_last: BigUint,
    pub colour: usize,
    pub columns: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceReport {
    #[serde(rename = "Q", with = "crate::rational::biguint_string")]
    pub q: BigUint,
    pub violations: Vec<SliceViolation>,
}

impl SliceReport {
    pub fn is_distinct(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A colour interval in relative column coordinates, `[lo, hi)` ⊂ `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeSegment {
    pub column: usize,
    pub colour: usize,
    pub lo: Rational,
    pub hi: Rational,
}

/// Every segment of every non-empty column, rescaled by the column height.
pub fn relative_segments(d: &ColouredDiagram) -> Vec<RelativeSegment> {
    let heights = d.heights();
    d.placed_segments()
        .into_iter()
        .map(|p| RelativeSegment {
            column: p.column,
            colour: p.colour,
            lo: &p.lo / &heights[p.column],
            hi: &p.hi / &heights[p.column],
        })
        .collect()
}

/// A band of relative height over which every column keeps one colour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceBand {
    pub lo: Rational,
    pub hi: Rational,
    /// `(column, colour)` for every non-empty column, left to right.
    pub cells: Vec<(usize, usize)>,
}

/// Cuts `[0, 1)` at every relative breakpoint of the diagram.
pub fn slice_bands(d: &ColouredDiagram) -> Vec<SliceBand> {
    let rel = relative_segments(d);
    let mut cuts: BTreeSet<Rational> = [Rational::zero(), Rational::one()].into();
    for s in &rel {
        cuts.insert(s.lo.clone());
        cuts.insert(s.hi.clone());
    }
    let cuts: Vec<Rational> = cuts.into_iter().collect();
    cuts.windows(2)
        .map(|w| {
            let cells = rel
                .iter()
                .filter(|s| s.lo <= w[0] && w[1] <= s.hi)
                .map(|s| (s.column, s.colour))
                .collect();
            SliceBand {
                lo: w[0].clone(),
                hi: w[1].clone(),
                cells,
            }
        })
        .collect()
}

/// Smallest Q for which every piece of every column is one colour: the
/// LCM of the denominators of all relative breakpoints.
pub fn choose_q(d: &ColouredDiagram) -> BigUint {
    let rel = relative_segments(d);
    lcm_of_denominators(rel.iter().flat_map(|s| [&s.lo, &s.hi]))
}

pub fn verify_slice_distinct(d: &ColouredDiagram) -> SliceReport {
    verify_slice_distinct_at(d, &choose_q(d))
}

/// Slice-distinctness with each column cut into `q` pieces. Pieces that
/// straddle a breakpoint count as carrying both colours.
pub fn verify_slice_distinct_at(d: &ColouredDiagram, q: &BigUint) -> SliceReport {
    let rel = relative_segments(d);
    let qr = Rational::from_biguint(q);
    let first = |lo: &Rational| -> BigInt { (lo * &qr).floor() + 1 };
    let last = |hi: &Rational| -> BigInt { (hi * &qr).ceil() };
    let mut violations = Vec::new();
    for (a_idx, a) in rel.iter().enumerate() {
        for b in &rel[a_idx + 1..] {
            if a.colour != b.colour || a.column == b.column {
                continue;
            }
            let q_first = first(&a.lo).max(first(&b.lo));
            let q_last = last(&a.hi).min(last(&b.hi));
            if q_first <= q_last {
                violations.push(SliceViolation {
                    q_first: q_first.to_biguint().expect("slice indices are positive"),
                    q_last: q_last.to_biguint().expect("slice indices are positive"),
                    colour: a.colour,
                    columns: (a.column.min(b.column), a.column.max(b.column)),
                });
            }
        }
    }
    violations
        .sort_by(|x, y| (&x.q_first, x.colour, x.columns).cmp(&(&y.q_first, y.colour, y.columns)));
    SliceReport {
        q: q.clone(),
        violations,
    }
}

type Intervals = Vec<(Rational, Rational)>;

/// Removes the top `amount` of measure from `set` and returns it.
fn take_top(set: &mut Intervals, amount: &Rational) -> Result<Intervals> {
    let mut left = amount.clone();
    let mut taken = Vec::new();
    while left.is_positive() {
        let Some((lo, hi)) = set.pop() else {
            return Err(Error::InternalColouringFailure(format!(
                "relative interval too short by {left}"
            )));
        };
        let len = &hi - &lo;
        if len <= left {
            left -= len;
            taken.push((lo, hi));
        } else {
            let cut = &hi - &left;
            taken.push((cut.clone(), hi));
            set.push((lo, cut));
            left = Rational::zero();
        }
    }
    taken.reverse();
    Ok(taken)
}

fn complement(set: &Intervals) -> Intervals {
    let mut sorted = set.clone();
    sorted.sort();
    let mut out = Vec::new();
    let mut at = Rational::zero();
    for (lo, hi) in sorted {
        if lo > at {
            out.push((at.clone(), lo.clone()));
        }
        at = hi;
    }
    if at < Rational::one() {
        out.push((at, Rational::one()));
    }
    out
}

/// Per-column relative layout, bottom to top, covering `[0, 1)` for every
/// column of positive target height.
type Layout = Vec<Vec<(Rational, Rational, usize)>>;

fn paint(
    column: &mut Vec<(Rational, Rational, usize)>,
    lo: &Rational,
    hi: &Rational,
    from: usize,
    to: usize,
) -> Result<()> {
    let mut out = Vec::with_capacity(column.len() + 2);
    for (a, b, c) in column.drain(..) {
        let x = a.clone().max(lo.clone());
        let y = b.clone().min(hi.clone());
        if x >= y {
            out.push((a, b, c));
            continue;
        }
        if c != from {
            return Err(Error::InternalColouringFailure(format!(
                "expected colour {from} on [{x}, {y}), found {c}"
            )));
        }
        if a < x {
            out.push((a, x.clone(), c));
        }
        out.push((x, y.clone(), to));
        if y < b {
            out.push((y, b, c));
        }
    }
    *column = out;
    Ok(())
}

fn layout_from(parts: Vec<(Intervals, usize)>) -> Vec<(Rational, Rational, usize)> {
    let mut col: Vec<(Rational, Rational, usize)> = parts
        .into_iter()
        .flat_map(|(set, c)| set.into_iter().map(move |(lo, hi)| (lo, hi, c)))
        .filter(|(lo, hi, _)| lo < hi)
        .collect();
    col.sort();
    col
}

/// Where the colour handed on by an overflowing bunch can be placed next.
#[derive(Clone, Debug)]
enum Source {
    /// `column` holds the colour on `set` and nothing else holds it there;
    /// placing it elsewhere on `set` costs a trade of area with `column`.
    Host { column: usize, set: Intervals },
    /// Nothing holds the colour on `set`.
    Free { set: Intervals },
}

/// Builds a slice-distinct diagram with column heights `target`, together
/// with a record for every bunch that needed a non-trivial correction.
pub fn colour_transform_nielsen(
    start: &SchmidtVector,
    target: &SchmidtVector,
) -> Result<(ColouredDiagram, Vec<CorrectionRecord>)> {
    if !nielsen_condition(start, target) {
        return Err(Error::NotConvertible);
    }
    let n = start.len();
    let profile = StepProfile::new(target.padded(n))?;
    let (first, plan) = colour_transform_traced(start, &profile).map_err(|e| match e {
        Error::NotReachable => Error::NotConvertible,
        other => other,
    })?;
    let tgt = plan.target.heights().to_vec();
    let fail = |msg: String| Error::InternalColouringFailure(msg);

    let mut layout: Layout = first
        .columns()
        .iter()
        .enumerate()
        .map(|(i, stack)| {
            let mut lo = Rational::zero();
            stack
                .iter()
                .map(|seg| {
                    let hi = &lo + &seg.height / &tgt[i];
                    let cell = (lo.clone(), hi.clone(), seg.colour);
                    lo = hi;
                    cell
                })
                .collect()
        })
        .collect();

    let mut chain: Option<Source> = None;
    let mut records = Vec::new();
    for bunch in &plan.bunches {
        let (record, next) = correct_bunch(bunch, &tgt, &mut layout, chain.take())?;
        chain = next;
        if let Some(rec) = record {
            rec.check(&tgt)?;
            records.push(rec);
        }
        if !layout_conserves(&layout, &tgt, start) {
            return Err(fail(format!(
                "colour areas drifted at column {}",
                bunch.column
            )));
        }
    }

    let columns = layout
        .iter()
        .enumerate()
        .map(|(i, col)| {
            col.iter()
                .map(|(lo, hi, c)| ColourSegment::new(*c, (hi - lo) * &tgt[i]))
                .collect()
        })
        .collect();
    let diagram = ColouredDiagram::from_columns(columns)?;
    if diagram.heights() != tgt || !verify_colour_conservation(&diagram, start) {
        return Err(fail("corrected diagram lost its shape".into()));
    }
    let report = verify_slice_distinct(&diagram);
    if !report.is_distinct() {
        return Err(fail(format!(
            "{} slice conflicts remain",
            report.violations.len()
        )));
    }
    Ok((diagram, records))
}

fn correct_bunch(
    bunch: &BunchPlan,
    tgt: &[Rational],
    layout: &mut Layout,
    chain: Option<Source>,
) -> Result<(Option<CorrectionRecord>, Option<Source>)> {
    let fail = |msg: String| Error::InternalColouringFailure(msg);
    let l = bunch.column;
    let own = l;
    let ell = &tgt[l];

    // the swapped-back colour goes where the previous bunch left room for it
    let mut back: Intervals = Vec::new();
    let mut back_colour = None;
    let mut w = Rational::zero();
    let mut host = None;
    let mut carried = None;
    let s_back = bunch
        .incoming
        .as_ref()
        .map_or_else(Rational::zero, |p| p.area.clone());
    if let Some(piece) = &bunch.incoming {
        back_colour = Some(piece.colour);
        match chain {
            Some(Source::Host { column: h, mut set }) => {
                let r = &tgt[h];
                if r >= ell {
                    return Err(fail(format!(
                        "host column {h} is not lower than column {l}"
                    )));
                }
                let span = &piece.area / (ell - r);
                w = r * &span;
                let v = take_top(&mut set, &span)?;
                for (lo, hi) in &v {
                    paint(&mut layout[h], lo, hi, piece.colour, own)?;
                }
                back = v.clone();
                host = Some(h);
                carried = Some(Source::Host { column: h, set: v });
            }
            Some(Source::Free { mut set }) => {
                back = take_top(&mut set, &(&piece.area / ell))?;
                carried = Some(Source::Free { set: back.clone() });
            }
            None => {
                return Err(fail(format!(
                    "column {l} received a piece nobody handed on"
                )))
            }
        }
    }

    // blocks for the direct pieces, last arrival first, from the top down
    let mut free = complement(&back);
    let mut blocks: Vec<(usize, Rational, Intervals)> = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rs = Vec::new();
    for piece in bunch.direct.iter().rev() {
        let rk = piece.from;
        let r = &tgt[rk];
        if r >= ell {
            return Err(fail(format!("column {rk} is not lower than column {l}")));
        }
        let y = r * &piece.area / (ell - r);
        let block = take_top(&mut free, &((&piece.area + &y) / ell))?;
        rs.push(rk);
        xs.push(piece.area.clone());
        ys.push(y);
        blocks.push((piece.colour, r.clone(), block));
    }

    let mut parts = vec![(free, own)];
    if let Some(c) = back_colour {
        parts.push((back, c));
    }
    for (colour, _, block) in &blocks {
        parts.push((block.clone(), *colour));
    }
    layout[l] = layout_from(parts);

    for ((colour, r, block), &rk) in blocks.iter().zip(&rs) {
        if r.is_zero() {
            continue;
        }
        if layout[rk].len() != 1 || layout[rk][0].2 != *colour {
            return Err(fail(format!(
                "column {rk} was touched before its own bunch"
            )));
        }
        layout[rk] = layout_from(vec![(complement(block), *colour), (block.clone(), own)]);
    }

    let total: Rational = ys.iter().sum::<Rational>() + &w;
    if total > bunch.own_remaining {
        return Err(fail(format!(
            "column {l} lacks own colour: needs {total}, has {}",
            bunch.own_remaining
        )));
    }

    let next = if bunch.overflow.is_positive() {
        match blocks.first() {
            Some((_, r, block)) if r.is_positive() => Some(Source::Host {
                column: rs[0],
                set: block.clone(),
            }),
            Some((_, _, block)) => Some(Source::Free { set: block.clone() }),
            None => carried,
        }
    } else {
        None
    };

    let record = if ys.iter().any(Rational::is_positive) || w.is_positive() {
        Some(CorrectionRecord {
            l,
            r: rs,
            x: xs,
            y: ys,
            s_back,
            w,
            z: bunch.own_remaining.clone(),
            host,
        })
    } else {
        None
    };
    Ok((record, next))
}

fn layout_conserves(layout: &Layout, tgt: &[Rational], state: &SchmidtVector) -> bool {
    let mut areas: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, col) in layout.iter().enumerate() {
        for (lo, hi, c) in col {
            *areas.entry(*c).or_insert_with(Rational::zero) += (hi - lo) * &tgt[i];
        }
    }
    areas.len() == state.len()
        && state
            .lambdas()
            .iter()
            .enumerate()
            .all(|(j, l)| areas.get(&j) == Some(l))
}

/// True iff `q` is a positive multiple of [`choose_q`].
pub fn q_is_admissible(d: &ColouredDiagram, q: &BigUint) -> bool {
    !q.is_zero() && q.is_multiple_of(&choose_q(d))
}
