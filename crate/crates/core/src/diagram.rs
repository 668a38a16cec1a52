//! Area diagrams.
//!
//! A diagram has one unit-width column per Alice index i. Each column is a
//! bottom-to-top stack of [`ColourSegment`]s, and the colour of a segment is
//! the Bob index j its area came from. Area only ever moves between columns
//! as whole colour-preserving pieces, so the per-colour totals stay equal to
//! the Schmidt coefficients of the start state.
//!
//! Segments are stored at exact rational heights rather than as 1/N cells;
//! `denominator` records the smallest N for which every boundary is a
//! multiple of 1/N.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{lcm_of_denominators, Rational};
use crate::state::{suffix_dominated, SchmidtVector};

/// Non-increasing column heights with total area one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepProfile {
    heights: Vec<Rational>,
}

impl StepProfile {
    pub fn new(heights: Vec<Rational>) -> Result<StepProfile> {
        if heights.is_empty() {
            return Err(Error::InvalidProfile("no columns".into()));
        }
        if let Some(h) = heights.iter().find(|h| h.is_negative()) {
            return Err(Error::InvalidProfile(format!("negative height {h}")));
        }
        if heights.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidProfile(
                "heights must not increase to the right".into(),
            ));
        }
        let total: Rational = heights.iter().sum();
        if total != 1 {
            return Err(Error::InvalidProfile(format!("total area {total} ≠ 1")));
        }
        Ok(StepProfile { heights })
    }

    pub fn from_state(state: &SchmidtVector) -> StepProfile {
        StepProfile {
            heights: state.lambdas().to_vec(),
        }
    }

    pub fn heights(&self) -> &[Rational] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    /// Height of column i; zero past the last column.
    pub fn get(&self, i: usize) -> Rational {
        self.heights.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// The same profile with trailing zero columns added up to `len`.
    pub fn padded(&self, len: usize) -> StepProfile {
        StepProfile {
            heights: (0..len.max(self.len())).map(|i| self.get(i)).collect(),
        }
    }
}

impl std::fmt::Display for StepProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.heights.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColourSegment {
    pub colour: usize,
    pub height: Rational,
}

impl ColourSegment {
    pub fn new(colour: usize, height: Rational) -> ColourSegment {
        ColourSegment { colour, height }
    }
}

/// A height interval `[lo, hi)` of one column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub column: usize,
    pub lo: Rational,
    pub hi: Rational,
}

impl Region {
    pub fn new(column: usize, lo: Rational, hi: Rational) -> Region {
        Region { column, lo, hi }
    }

    pub fn area(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// A segment together with its absolute position in the diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedSegment {
    pub column: usize,
    pub colour: usize,
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColouredDiagram {
    columns: Vec<Vec<ColourSegment>>,
    denominator: BigUint,
}

impl ColouredDiagram {
    /// Builds a diagram from bottom-to-top column stacks. Adjacent segments
    /// of one colour are merged; the total area must be exactly one.
    pub fn from_columns(columns: Vec<Vec<ColourSegment>>) -> Result<ColouredDiagram> {
        if columns.is_empty() {
            return Err(Error::InvalidDiagram("no columns".into()));
        }
        let mut merged = Vec::with_capacity(columns.len());
        let mut total = Rational::zero();
        for (i, column) in columns.into_iter().enumerate() {
            let mut stack: Vec<ColourSegment> = Vec::with_capacity(column.len());
            for seg in column {
                if !seg.height.is_positive() {
                    return Err(Error::InvalidDiagram(format!(
                        "segment of colour {} in column {i} has height {}",
                        seg.colour, seg.height
                    )));
                }
                total += &seg.height;
                match stack.last_mut() {
                    Some(top) if top.colour == seg.colour => top.height += seg.height,
                    _ => stack.push(seg),
                }
            }
            merged.push(stack);
        }
        if total != 1 {
            return Err(Error::InvalidDiagram(format!("total area {total} ≠ 1")));
        }
        let mut boundaries = Vec::new();
        for column in &merged {
            let mut acc = Rational::zero();
            for seg in column {
                acc += &seg.height;
                boundaries.push(acc.clone());
            }
        }
        let denominator = lcm_of_denominators(&boundaries);
        Ok(ColouredDiagram {
            columns: merged,
            denominator,
        })
    }

    pub fn columns(&self) -> &[Vec<ColourSegment>] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// N: every segment boundary is an integer multiple of 1/N.
    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn column_height(&self, i: usize) -> Rational {
        self.columns[i].iter().map(|s| &s.height).sum()
    }

    pub fn heights(&self) -> Vec<Rational> {
        (0..self.columns.len())
            .map(|i| self.column_height(i))
            .collect()
    }

    /// The column heights as a step profile; fails if they increase
    /// somewhere to the right.
    pub fn profile(&self) -> Result<StepProfile> {
        StepProfile::new(self.heights())
    }

    pub fn placed_segments(&self) -> Vec<PlacedSegment> {
        let mut out = Vec::new();
        for (column, stack) in self.columns.iter().enumerate() {
            let mut lo = Rational::zero();
            for seg in stack {
                let hi = &lo + &seg.height;
                out.push(PlacedSegment {
                    column,
                    colour: seg.colour,
                    lo: lo.clone(),
                    hi: hi.clone(),
                });
                lo = hi;
            }
        }
        out
    }

    pub fn num_segments(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Total area of each colour.
    pub fn colour_areas(&self) -> BTreeMap<usize, Rational> {
        let mut areas = BTreeMap::new();
        for seg in self.columns.iter().flatten() {
            *areas.entry(seg.colour).or_insert_with(Rational::zero) += &seg.height;
        }
        areas
    }

    /// Columns each colour occupies.
    pub fn colour_columns(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (i, stack) in self.columns.iter().enumerate() {
            for seg in stack {
                out.entry(seg.colour).or_default().insert(i);
            }
        }
        out
    }

    /// Pieces of column `column` lying in `[lo, hi)`, bottom to top.
    pub fn slice_column(&self, column: usize, lo: &Rational, hi: &Rational) -> Vec<ColourSegment> {
        let mut out = Vec::new();
        let mut base = Rational::zero();
        for seg in &self.columns[column] {
            let top = &base + &seg.height;
            let a = base.clone().max(lo.clone());
            let b = top.clone().min(hi.clone());
            if a < b {
                out.push(ColourSegment::new(seg.colour, b - a));
            }
            base = top;
        }
        out
    }
}

/// One horizontal band of constant row composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub lo: Rational,
    pub hi: Rational,
    /// `(column, colour)` of every column covering the band, left to right.
    pub cells: Vec<(usize, usize)>,
}

impl Band {
    pub fn width(&self) -> usize {
        self.cells.len()
    }
}

/// Cuts the diagram at every segment boundary and returns the elementary
/// bands bottom to top. Between two consecutive breakpoints every column is
/// a single colour or empty, so these bands decide every row property.
pub fn elementary_bands(d: &ColouredDiagram) -> Vec<Band> {
    let placed = d.placed_segments();
    let mut breaks: BTreeSet<Rational> = BTreeSet::new();
    breaks.insert(Rational::zero());
    for p in &placed {
        breaks.insert(p.lo.clone());
        breaks.insert(p.hi.clone());
    }
    let breaks: Vec<Rational> = breaks.into_iter().collect();
    let mut bands = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mut cells: Vec<(usize, usize)> = placed
            .iter()
            .filter(|p| p.lo <= *lo && *hi <= p.hi)
            .map(|p| (p.column, p.colour))
            .collect();
        cells.sort_unstable();
        bands.push(Band {
            lo: lo.clone(),
            hi: hi.clone(),
            cells,
        });
    }
    bands
}

/// The start-state diagram: column i has height λ_i and colour i.
pub fn canonical_diagram(state: &SchmidtVector) -> ColouredDiagram {
    let columns = state
        .lambdas()
        .iter()
        .enumerate()
        .map(|(j, l)| vec![ColourSegment::new(j, l.clone())])
        .collect();
    ColouredDiagram::from_columns(columns).expect("a Schmidt vector always yields a valid diagram")
}

/// Cuts the region `src` off the top of its column and pastes it, colours
/// unchanged, onto the free top of `dst_column` at height `dst_offset`.
///
/// Only tops move: `src.hi` must be the height of its column and
/// `dst_offset` the current height of the destination. Displacing swaps
/// are built by callers as pairs of such moves.
pub fn move_area(
    d: &ColouredDiagram,
    src: &Region,
    dst_column: usize,
    dst_offset: &Rational,
) -> Result<ColouredDiagram> {
    let n = d.num_columns();
    if src.column >= n || dst_column >= n {
        return Err(Error::RegionOutOfBounds(format!(
            "column index out of range (diagram has {n} columns)"
        )));
    }
    let src_height = d.column_height(src.column);
    if src.lo.is_negative() || src.lo > src.hi || src.hi > src_height {
        return Err(Error::RegionOutOfBounds(format!(
            "[{}, {}) is not inside column {} of height {}",
            src.lo, src.hi, src.column, src_height
        )));
    }
    if src.lo == src.hi {
        return Ok(d.clone());
    }
    if src.hi != src_height {
        return Err(Error::RegionOutOfBounds(format!(
            "[{}, {}) is not the top of column {} (height {})",
            src.lo, src.hi, src.column, src_height
        )));
    }
    if src.column == dst_column {
        return if *dst_offset == src.lo {
            Ok(d.clone())
        } else {
            Err(Error::DestinationOccupied(format!(
                "column {dst_column} cannot receive its own top at {dst_offset}"
            )))
        };
    }
    let dst_height = d.column_height(dst_column);
    if *dst_offset < dst_height {
        return Err(Error::DestinationOccupied(format!(
            "column {dst_column} is filled up to {dst_height}, paste requested at {dst_offset}"
        )));
    }
    if *dst_offset > dst_height {
        return Err(Error::RegionOutOfBounds(format!(
            "paste at {dst_offset} would float above column {dst_column} (height {dst_height})"
        )));
    }

    let piece = d.slice_column(src.column, &src.lo, &src.hi);
    let mut columns = d.columns.clone();
    columns[src.column] = d.slice_column(src.column, &Rational::zero(), &src.lo);
    columns[dst_column].extend(piece);
    ColouredDiagram::from_columns(columns)
}

/// True iff no colour appears twice within any row.
pub fn verify_row_distinct(d: &ColouredDiagram) -> bool {
    elementary_bands(d).iter().all(|band| {
        let mut seen = BTreeSet::new();
        band.cells.iter().all(|&(_, colour)| seen.insert(colour))
    })
}

/// True iff every colour j carries exactly the area λ_j of the state and no
/// other colour is present.
pub fn verify_colour_conservation(d: &ColouredDiagram, state: &SchmidtVector) -> bool {
    let areas = d.colour_areas();
    areas.len() == state.len()
        && state
            .lambdas()
            .iter()
            .enumerate()
            .all(|(j, l)| areas.get(&j) == Some(l))
}

/// True iff `target` can be reached from `start` by moving area only
/// upwards: every suffix sum of the target is at most that of the start.
pub fn verify_no_downward_flow(start: &StepProfile, target: &StepProfile) -> bool {
    suffix_dominated(target.heights(), start.heights())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

pub const DEFAULT_ASCII_CAP: u64 = 240;

const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#e7ba52",
];

const SVG_COLUMN_WIDTH: f64 = 100.0;
const SVG_UNIT_HEIGHT: f64 = 400.0;

pub fn glyph(colour: usize) -> char {
    GLYPHS[colour % GLYPHS.len()] as char
}

pub fn render(d: &ColouredDiagram, format: RenderFormat) -> Result<String> {
    match format {
        RenderFormat::Ascii => render_ascii(d, DEFAULT_ASCII_CAP),
        RenderFormat::Svg => Ok(render_svg(d)),
    }
}

/// One glyph per column and one text row per 1/N of height, top row first.
/// Empty cells above a column are spaces.
pub fn render_ascii(d: &ColouredDiagram, cap: u64) -> Result<String> {
    let rows = match d.denominator().to_u64() {
        Some(n) if n <= cap => n,
        _ => {
            return Err(Error::ResolutionTooFine {
                denominator: d.denominator().to_string(),
                cap,
            })
        }
    };
    let placed = d.placed_segments();
    let mut out = String::new();
    for r in (0..rows).rev() {
        let mid = Rational::new(2 * r as i64 + 1, 2 * rows as i64);
        let line: String = (0..d.num_columns())
            .map(|i| {
                placed
                    .iter()
                    .find(|p| p.column == i && p.lo <= mid && mid < p.hi)
                    .map_or(' ', |p| glyph(p.colour))
            })
            .collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Standalone SVG, one `<rect>` per segment, colour keyed by Bob index.
pub fn render_svg(d: &ColouredDiagram) -> String {
    let width = SVG_COLUMN_WIDTH * d.num_columns() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SVG_UNIT_HEIGHT}" viewBox="0 0 {width} {SVG_UNIT_HEIGHT}">"#
    );
    for p in d.placed_segments() {
        let x = SVG_COLUMN_WIDTH * p.column as f64;
        let y = SVG_UNIT_HEIGHT * (1.0 - p.hi.to_f64());
        let h = SVG_UNIT_HEIGHT * (&p.hi - &p.lo).to_f64();
        let _ = writeln!(
            out,
            r#"  <rect x="{x}" y="{y:.6}" width="{SVG_COLUMN_WIDTH}" height="{h:.6}" fill="{}" stroke="black" stroke-width="0.5" data-colour="{}" data-lo="{}" data-hi="{}"/>"#,
            PALETTE[p.colour % PALETTE.len()],
            p.colour,
            p.lo,
            p.hi
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Least common multiple of `denominator()` over several diagrams; handy
/// for rendering diagrams side by side at one resolution.
pub fn common_denominator<'a>(diagrams: impl IntoIterator<Item = &'a ColouredDiagram>) -> BigUint {
    use num_integer::Integer;
    diagrams
        .into_iter()
        .fold(BigUint::one(), |acc, d| acc.lcm(d.denominator()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_schmidt;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn state(v: &[(i64, i64)]) -> SchmidtVector {
        make_schmidt(&v.iter().map(|&(n, d)| r(n, d)).collect::<Vec<_>>()).unwrap()
    }

    fn worked() -> ColouredDiagram {
        canonical_diagram(&state(&[(1, 2), (3, 10), (1, 5)]))
    }

    #[test]
    fn canonical_columns() {
        let d = canonical_diagram(&state(&[(1, 2), (1, 2)]));
        assert_eq!(d.num_columns(), 2);
        assert_eq!(d.columns()[0], vec![ColourSegment::new(0, r(1, 2))]);
        assert_eq!(d.columns()[1], vec![ColourSegment::new(1, r(1, 2))]);
        let one = canonical_diagram(&SchmidtVector::product());
        assert_eq!(one.columns(), &[vec![ColourSegment::new(0, r(1, 1))]]);
        assert_eq!(worked().heights(), vec![r(1, 2), r(3, 10), r(1, 5)]);
        assert_eq!(*worked().denominator(), BigUint::from(10u32));
    }

    #[test]
    fn move_whole_column_onto_neighbour() {
        let d = worked();
        let moved = move_area(&d, &Region::new(2, r(0, 1), r(1, 5)), 1, &r(3, 10)).unwrap();
        assert_eq!(
            moved.columns()[1],
            vec![
                ColourSegment::new(1, r(3, 10)),
                ColourSegment::new(2, r(1, 5))
            ]
        );
        assert!(moved.columns()[2].is_empty());
        assert_eq!(moved.columns()[0], d.columns()[0]);
        assert!(verify_colour_conservation(
            &moved,
            &state(&[(1, 2), (3, 10), (1, 5)])
        ));
    }

    #[test]
    fn zero_area_move_is_identity() {
        let d = worked();
        let same = move_area(&d, &Region::new(1, r(1, 10), r(1, 10)), 0, &r(1, 2)).unwrap();
        assert_eq!(same, d);
    }

    #[test]
    fn move_errors() {
        let d = worked();
        assert!(matches!(
            move_area(&d, &Region::new(2, r(0, 1), r(1, 2)), 1, &r(3, 10)),
            Err(Error::RegionOutOfBounds(_))
        ));
        assert!(matches!(
            move_area(&d, &Region::new(2, r(0, 1), r(1, 5)), 1, &r(1, 10)),
            Err(Error::DestinationOccupied(_))
        ));
        assert!(matches!(
            move_area(&d, &Region::new(2, r(0, 1), r(1, 10)), 1, &r(3, 10)),
            Err(Error::RegionOutOfBounds(_))
        ));
        assert!(matches!(
            move_area(&d, &Region::new(7, r(0, 1), r(1, 10)), 1, &r(3, 10)),
            Err(Error::RegionOutOfBounds(_))
        ));
    }

    #[test]
    fn row_distinct_detects_repeat() {
        assert!(verify_row_distinct(&worked()));
        let bad = ColouredDiagram::from_columns(vec![
            vec![ColourSegment::new(0, r(1, 2))],
            vec![
                ColourSegment::new(2, r(1, 5)),
                ColourSegment::new(1, r(1, 10)),
            ],
            vec![ColourSegment::new(2, r(1, 5))],
        ])
        .unwrap();
        assert!(!verify_row_distinct(&bad));
    }

    #[test]
    fn conservation_detects_recolouring() {
        let s = state(&[(1, 2), (3, 10), (1, 5)]);
        assert!(verify_colour_conservation(&worked(), &s));
        let recoloured = ColouredDiagram::from_columns(vec![
            vec![ColourSegment::new(0, r(1, 2))],
            vec![ColourSegment::new(1, r(3, 10))],
            vec![ColourSegment::new(1, r(1, 5))],
        ])
        .unwrap();
        assert!(!verify_colour_conservation(&recoloured, &s));
    }

    #[test]
    fn downward_flow_examples() {
        let a = StepProfile::new(vec![r(1, 2), r(3, 10), r(1, 5)]).unwrap();
        let b = StepProfile::new(vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        assert!(verify_no_downward_flow(&a, &b));
        assert!(verify_no_downward_flow(&a, &a));
        assert!(!verify_no_downward_flow(&b, &a));
    }

    #[test]
    fn profile_validation() {
        assert!(StepProfile::new(vec![r(1, 4), r(3, 4)]).is_err());
        assert!(StepProfile::new(vec![r(1, 2), r(1, 4)]).is_err());
        assert!(StepProfile::new(vec![r(1, 1), r(0, 1)]).is_ok());
    }

    #[test]
    fn merges_adjacent_same_colour() {
        let d = ColouredDiagram::from_columns(vec![vec![
            ColourSegment::new(0, r(1, 4)),
            ColourSegment::new(0, r(3, 4)),
        ]])
        .unwrap();
        assert_eq!(d.columns()[0], vec![ColourSegment::new(0, r(1, 1))]);
    }

    #[test]
    fn ascii_rendering() {
        let one = canonical_diagram(&SchmidtVector::product());
        assert_eq!(render(&one, RenderFormat::Ascii).unwrap(), "A\n");
        let half = canonical_diagram(&state(&[(1, 2), (1, 2)]));
        assert_eq!(render(&half, RenderFormat::Ascii).unwrap(), "\nAB\n");
        let fine = canonical_diagram(&state(&[(1, 1000), (999, 1000)]));
        assert!(matches!(
            render(&fine, RenderFormat::Ascii),
            Err(Error::ResolutionTooFine { .. })
        ));
        assert!(render_ascii(&fine, 1000).is_ok());
    }

    #[test]
    fn svg_has_one_rect_per_segment() {
        let d = move_area(&worked(), &Region::new(2, r(0, 1), r(1, 5)), 1, &r(3, 10)).unwrap();
        let svg = render(&d, RenderFormat::Svg).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), d.num_segments());
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
