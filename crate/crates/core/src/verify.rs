//! Exhaustive checks of hopping-pattern properties.
//!
//! Every check enumerates the whole domain (and, for frame-dependent
//! patterns, every per-frame map up to a horizon), so a pass is a proof at
//! that size. Failures carry the first offending resource in lexicographic
//! order.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{GridShape, InvariantValue, Resource};
use crate::pattern::{FamilyParams, Pattern, PatternError, PatternSpec};

/// Anything the checks can run against. [`Pattern`] is the real
/// implementation; tests plug in deliberately broken maps.
pub trait HoppingMap {
    fn shape(&self) -> GridShape;
    /// Domain, ordered by `i` then `j`.
    fn domain(&self) -> Vec<Resource>;
    fn contains(&self, r: Resource) -> bool;
    fn is_frame_independent(&self) -> bool;
    /// Map from a position in frame `frame` to the position in `frame + 1`.
    fn transition(&self, r: Resource, frame: u64) -> Resource;
    /// Frame-`t` position of the resource at `r0` in frame 0.
    fn position_at(&self, r0: Resource, t: u64) -> Resource;
    fn invariant_modulus(&self) -> Option<u64>;
    /// Invariant polynomial over the integers, unreduced.
    fn invariant_raw(&self, r: Resource) -> Option<i128>;
}

impl HoppingMap for Pattern {
    fn shape(&self) -> GridShape {
        Pattern::shape(self)
    }
    fn domain(&self) -> Vec<Resource> {
        Pattern::domain(self)
    }
    fn contains(&self, r: Resource) -> bool {
        Pattern::contains(self, r)
    }
    fn is_frame_independent(&self) -> bool {
        Pattern::is_frame_independent(self)
    }
    fn transition(&self, r: Resource, frame: u64) -> Resource {
        Pattern::transition(self, r, frame)
    }
    fn position_at(&self, r0: Resource, t: u64) -> Resource {
        self.position_unchecked(r0, t)
    }
    fn invariant_modulus(&self) -> Option<u64> {
        Pattern::invariant_modulus(self)
    }
    fn invariant_raw(&self, r: Resource) -> Option<i128> {
        Pattern::invariant_raw(self, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Bijection,
    HalfDuplex,
    FrequencyHopping,
    TimeHopping,
    Invariant,
    FrameIndependence,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Bijection => "bijection",
            Property::HalfDuplex => "half_duplex",
            Property::FrequencyHopping => "frequency_hopping",
            Property::TimeHopping => "time_hopping",
            Property::Invariant => "invariant",
            Property::FrameIndependence => "frame_independence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Frame of the offending per-frame map, when the check is per-frame.
    pub frame: Option<u64>,
    pub resources: Vec<Resource>,
    /// Observed values (invariant residues, subframes, ...), check specific.
    pub values: Vec<i64>,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub outcome: Outcome,
    /// Number of (resource, frame-map) cases examined.
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Counterexample>,
    /// Share of resources that change subframe (time hopping only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fraction: Option<Fraction>,
}

impl PropertyReport {
    fn pass(property: Property, checked: u64) -> Self {
        Self { property, outcome: Outcome::Pass, checked, counterexample: None, fraction: None }
    }

    fn fail(property: Property, checked: u64, cx: Counterexample) -> Self {
        Self { property, outcome: Outcome::Fail, checked, counterexample: Some(cx), fraction: None }
    }

    fn not_applicable(property: Property) -> Self {
        Self { property, outcome: Outcome::NotApplicable, checked: 0, counterexample: None, fraction: None }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

/// Default horizon for frame-dependent checks: `2·lcm(m, n)` frames.
pub fn default_check_frames(shape: GridShape) -> u64 {
    2 * shape.lcm()
}

/// Frames whose per-frame maps must be examined.
fn frames_to_examine<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> u64 {
    if map.is_frame_independent() {
        1
    } else {
        frames.max(1)
    }
}

fn cx(frame: Option<u64>, resources: Vec<Resource>, values: Vec<i64>, note: impl Into<String>) -> Counterexample {
    Counterexample { frame, resources, values, note: note.into() }
}

fn frame_tag<H: HoppingMap + ?Sized>(map: &H, t: u64) -> Option<u64> {
    (!map.is_frame_independent()).then_some(t)
}

pub fn check_bijection<H: HoppingMap + ?Sized>(map: &H) -> PropertyReport {
    check_bijection_for(map, default_check_frames(map.shape()))
}

/// Each per-frame map must permute the domain.
pub fn check_bijection_for<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> PropertyReport {
    let shape = map.shape();
    let domain = map.domain();
    let mut checked = 0;
    for t in 0..frames_to_examine(map, frames) {
        let mut preimage: Vec<Option<Resource>> = vec![None; shape.cells()];
        for &r in &domain {
            checked += 1;
            let img = map.transition(r, t);
            if !map.contains(img) {
                return PropertyReport::fail(
                    Property::Bijection,
                    checked,
                    cx(frame_tag(map, t), vec![r, img], vec![], "image outside the domain"),
                );
            }
            let slot = &mut preimage[shape.index(img)];
            if let Some(first) = *slot {
                return PropertyReport::fail(
                    Property::Bijection,
                    checked,
                    cx(frame_tag(map, t), vec![first, r, img], vec![], "two resources share an image"),
                );
            }
            *slot = Some(r);
        }
    }
    PropertyReport::pass(Property::Bijection, checked)
}

pub fn check_half_duplex<H: HoppingMap + ?Sized>(map: &H) -> PropertyReport {
    check_half_duplex_for(map, default_check_frames(map.shape()))
}

/// Resources sharing a subframe must land in different subframes next frame.
pub fn check_half_duplex_for<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> PropertyReport {
    let shape = map.shape();
    let domain = map.domain();
    let n = shape.n as usize;
    let mut checked = 0;
    for t in 0..frames_to_examine(map, frames) {
        // claimed[j * n + j'] = channel that moved from subframe j to j'
        let mut claimed: Vec<Option<u32>> = vec![None; n * n];
        for &r in &domain {
            checked += 1;
            let img = map.transition(r, t);
            let slot = &mut claimed[r.j as usize * n + img.j as usize];
            if let Some(i1) = *slot {
                return PropertyReport::fail(
                    Property::HalfDuplex,
                    checked,
                    cx(
                        frame_tag(map, t),
                        vec![Resource::new(i1, r.j), r],
                        vec![i64::from(img.j), i64::from(img.j)],
                        "two resources of one subframe share the next subframe",
                    ),
                );
            }
            *slot = Some(r.i);
        }
    }
    PropertyReport::pass(Property::HalfDuplex, checked)
}

pub fn check_frequency_hopping<H: HoppingMap + ?Sized>(map: &H) -> PropertyReport {
    check_frequency_hopping_for(map, default_check_frames(map.shape()))
}

/// Every resource must change channel at every hop.
pub fn check_frequency_hopping_for<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> PropertyReport {
    let domain = map.domain();
    let mut checked = 0;
    for t in 0..frames_to_examine(map, frames) {
        for &r in &domain {
            checked += 1;
            let img = map.transition(r, t);
            if img.i == r.i {
                return PropertyReport::fail(
                    Property::FrequencyHopping,
                    checked,
                    cx(
                        frame_tag(map, t),
                        vec![r, img],
                        vec![i64::from(r.i), i64::from(img.i)],
                        "channel unchanged by the hop",
                    ),
                );
            }
        }
    }
    PropertyReport::pass(Property::FrequencyHopping, checked)
}

pub fn check_time_hopping<H: HoppingMap + ?Sized>(map: &H) -> PropertyReport {
    check_time_hopping_for(map, default_check_frames(map.shape()))
}

/// At least one resource changes subframe; reports the moving share.
pub fn check_time_hopping_for<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> PropertyReport {
    let domain = map.domain();
    let mut checked = 0;
    let mut moved = 0;
    for t in 0..frames_to_examine(map, frames) {
        for &r in &domain {
            checked += 1;
            if map.transition(r, t).j != r.j {
                moved += 1;
            }
        }
    }
    let fraction = Some(Fraction { num: moved, den: checked });
    let mut report = if moved > 0 {
        PropertyReport::pass(Property::TimeHopping, checked)
    } else {
        let first = domain.first().copied();
        PropertyReport::fail(
            Property::TimeHopping,
            checked,
            cx(
                frame_tag(map, 0),
                first.into_iter().collect(),
                vec![],
                "no resource changes subframe",
            ),
        )
    };
    report.fraction = fraction;
    report
}

/// `g(step(r)) ≡ g(r)` for the family's invariant polynomial, reduced
/// modulo `modulus_override` or the family's own modulus.
pub fn check_invariant<H: HoppingMap + ?Sized>(map: &H, modulus_override: Option<u64>) -> PropertyReport {
    let Some(modulus) = modulus_override.or_else(|| map.invariant_modulus()) else {
        return PropertyReport::not_applicable(Property::Invariant);
    };
    if !map.is_frame_independent() || map.invariant_modulus().is_none() || modulus == 0 {
        return PropertyReport::not_applicable(Property::Invariant);
    }
    let mut checked = 0;
    for r in map.domain() {
        checked += 1;
        let img = map.transition(r, 0);
        let (Some(a), Some(b)) = (map.invariant_raw(r), map.invariant_raw(img)) else {
            return PropertyReport::not_applicable(Property::Invariant);
        };
        let (a, b) = (InvariantValue::from_raw(a, modulus), InvariantValue::from_raw(b, modulus));
        if a != b {
            return PropertyReport::fail(
                Property::Invariant,
                checked,
                cx(
                    None,
                    vec![r, img],
                    vec![a.value as i64, b.value as i64],
                    format!("invariant mod {modulus} changes across the hop"),
                ),
            );
        }
    }
    PropertyReport::pass(Property::Invariant, checked)
}

/// Derives `M_t = {position_at(r, t) ↦ position_at(r, t + 1)}` for every
/// `t < frames` and requires all of them to equal `M_0`.
pub fn check_frame_independence<H: HoppingMap + ?Sized>(map: &H, frames: u64) -> PropertyReport {
    let shape = map.shape();
    let starts = map.domain();
    let order = starts.clone();
    let frames = frames.max(1);

    let mut here: Vec<Resource> = starts.clone();
    let mut first_map: Vec<Option<Resource>> = vec![None; shape.cells()];
    let mut checked = 0;
    for t in 0..frames {
        let next: Vec<Resource> = starts.iter().map(|&r0| map.position_at(r0, t + 1)).collect();
        let mut this_map: Vec<Option<Resource>> = vec![None; shape.cells()];
        for (from, to) in here.iter().zip(&next) {
            this_map[shape.index(*from)] = Some(*to);
        }
        if t == 0 {
            first_map = this_map;
            checked += order.len() as u64;
        } else {
            for &pos in &order {
                checked += 1;
                let (a, b) = (first_map[shape.index(pos)], this_map[shape.index(pos)]);
                if a != b {
                    let resources = [Some(pos), a, b].into_iter().flatten().collect();
                    return PropertyReport::fail(
                        Property::FrameIndependence,
                        checked,
                        cx(Some(t), resources, vec![], format!("next-frame map at frame {t} differs from frame 0")),
                    );
                }
            }
        }
        here = next;
    }
    PropertyReport::pass(Property::FrameIndependence, checked)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pattern: PatternSpec,
    pub frames: u64,
    pub all_pass: bool,
    pub reports: Vec<PropertyReport>,
}

/// Runs every check; overall pass iff no applicable check fails.
pub fn verify_all(pattern: &Pattern, frames: u64) -> VerifyReport {
    let reports = vec![
        check_bijection_for(pattern, frames),
        check_half_duplex_for(pattern, frames),
        check_frequency_hopping_for(pattern, frames),
        check_time_hopping_for(pattern, frames),
        check_invariant(pattern, None),
        check_frame_independence(pattern, frames),
    ];
    let all_pass = reports.iter().all(|r| r.outcome != Outcome::Fail);
    VerifyReport { pattern: *pattern.spec(), frames, all_pass, reports }
}

/// The four structural conditions of an invariant-bearing pattern:
/// bijection, half duplex, frequency hopping, invariant preservation.
pub fn check_conditions(pattern: &Pattern) -> [PropertyReport; 4] {
    let frames = default_check_frames(pattern.shape());
    [
        check_bijection_for(pattern, frames),
        check_half_duplex_for(pattern, frames),
        check_frequency_hopping_for(pattern, frames),
        check_invariant(pattern, None),
    ]
}

/// Runs [`check_conditions`] over many specs in parallel, one pattern per
/// worker. Output order follows `specs`.
pub fn sweep(specs: &[PatternSpec]) -> Vec<(PatternSpec, Result<[PropertyReport; 4], PatternError>)> {
    specs
        .par_iter()
        .map(|&spec| (spec, Pattern::new(spec).map(|p| check_conditions(&p))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    Y,
    N,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Flag {
    fn from_report(r: &PropertyReport) -> Self {
        if r.passed() {
            Flag::Y
        } else {
            Flag::N
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Flag::Y => "Y",
            Flag::N => "N",
            Flag::NotApplicable => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub label: String,
    pub time_hopping: Flag,
    pub frequency_hopping: Flag,
    pub independent_of_t: Flag,
    pub has_invariant: Flag,
}

impl FeatureRow {
    pub fn flags(&self) -> [Flag; 4] {
        [self.time_hopping, self.frequency_hopping, self.independent_of_t, self.has_invariant]
    }
}

/// Parameters used for each row of the feature table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeParams {
    /// Offset for the frame-dependent QC row; must be nonzero mod m.
    pub qc_c: i64,
    pub a1_u: i64,
    pub a1_v: i64,
    pub b_c: i64,
    pub b_e: i64,
    pub b_f: i64,
}

impl Default for RepresentativeParams {
    fn default() -> Self {
        Self { qc_c: 1, a1_u: 2, a1_v: 1, b_c: 1, b_e: 1, b_f: 0 }
    }
}

pub const FEATURE_LABELS: [&str; 6] = [
    "QC(c = 0 mod m)",
    "QC(c != 0 mod m)",
    "type A1",
    "type A2",
    "type B1",
    "type B2",
];

pub fn feature_row(label: &str, pattern: &Pattern) -> FeatureRow {
    let frames = default_check_frames(pattern.shape());
    FeatureRow {
        label: label.to_string(),
        time_hopping: Flag::from_report(&check_time_hopping_for(pattern, frames)),
        frequency_hopping: Flag::from_report(&check_frequency_hopping_for(pattern, frames)),
        independent_of_t: Flag::from_report(&check_frame_independence(pattern, frames)),
        has_invariant: Flag::from_report(&check_invariant(pattern, None)),
    }
}

/// The six-row comparison of QC against the invariant-bearing families,
/// computed by running the checks. Rows whose family rejects `shape` are
/// marked not applicable.
pub fn feature_table(shape: GridShape, params: RepresentativeParams) -> Vec<FeatureRow> {
    let p = params;
    let rows = [
        FamilyParams::Qc { c: 0 },
        FamilyParams::Qc { c: p.qc_c },
        FamilyParams::A1 { u: p.a1_u, v: p.a1_v },
        FamilyParams::A2,
        FamilyParams::B1 { c: p.b_c, e: p.b_e, f: p.b_f },
        FamilyParams::B2 { c: p.b_c, e: p.b_e, f: p.b_f },
    ];
    FEATURE_LABELS
        .iter()
        .zip(rows)
        .map(|(label, params)| match Pattern::new(PatternSpec::new(shape, params)) {
            Ok(pattern) => feature_row(label, &pattern),
            Err(_) => FeatureRow {
                label: label.to_string(),
                time_hopping: Flag::NotApplicable,
                frequency_hopping: Flag::NotApplicable,
                independent_of_t: Flag::NotApplicable,
                has_invariant: Flag::NotApplicable,
            },
        })
        .collect()
}
