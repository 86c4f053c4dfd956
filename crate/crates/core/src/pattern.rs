//! The five hopping-pattern families.
//!
//! Every family maps a UE's resource in discovery frame `t` to its resource
//! in frame `t + 1`:
//!
//! | family | domain        | next resource                                   | invariant                                         |
//! |--------|---------------|-------------------------------------------------|---------------------------------------------------|
//! | QC     | `I × J`       | `((i0 + c·t) mod m, (j0 + i0·t) mod n)`          | `i mod m` (only when `c = 0`)                     |
//! | A1     | `I' × J`      | `(ui mod m, (j − vi + v·(ui mod m)) mod n)`     | `(j − vi) mod n`                                  |
//! | A2     | `I' × J`      | `(2i mod m, (j − i + (2i mod m)) mod n)`        | `(j − i) mod n`                                   |
//! | B1     | `I × J`       | `((i + e) mod m, (ci + j + f) mod n)`           | `(ci² + (2f − ce)i − 2ej) mod m`                  |
//! | B2     | `I × J`       | `((i + e) mod m, (ci − j + f) mod n)`           | `(c²i² + 4j² − 4cij + c(2f − ce)i + 2(ce − 2f)j) mod m` |
//!
//! `I = {0, …, m−1}`, `I' = I \ {0}` and `J = {0, …, n−1}`. A1 and A2 give up
//! channel 0, so they carry `(m − 1)·n` logical resources instead of `m·n`.
//!
//! QC with `c ≠ 0` is the only frame-dependent family: its next-frame map
//! depends on `t`, so it has no `step` and no invariant. Everything else is a
//! fixed bijection of its domain.
//!
//! The B2 invariant is taken modulo `m`. Modulo `n` it is not preserved once
//! `i + e` wraps past `m` (e.g. `m=3, n=6, c=1, e=2, f=0` at `(1,0)`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{gcd, mod_inverse, GridShape, InvariantValue, Resource, MAX_DIMENSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Qc,
    A1,
    A2,
    B1,
    B2,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Qc, Family::A1, Family::A2, Family::B1, Family::B2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Qc => "qc",
            Family::A1 => "a1",
            Family::A2 => "a2",
            Family::B1 => "b1",
            Family::B2 => "b2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qc" => Ok(Family::Qc),
            "a1" => Ok(Family::A1),
            "a2" => Ok(Family::A2),
            "b1" => Ok(Family::B1),
            "b2" => Ok(Family::B2),
            other => Err(format!("unknown pattern family `{other}` (expected qc, a1, a2, b1 or b2)")),
        }
    }
}

/// Family tag plus its integer parameters, as written by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyParams {
    Qc { c: i64 },
    A1 { u: i64, v: i64 },
    A2,
    B1 { c: i64, e: i64, f: i64 },
    B2 { c: i64, e: i64, f: i64 },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Qc { .. } => Family::Qc,
            FamilyParams::A1 { .. } => Family::A1,
            FamilyParams::A2 => Family::A2,
            FamilyParams::B1 { .. } => Family::B1,
            FamilyParams::B2 { .. } => Family::B2,
        }
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilyParams::Qc { c } => write!(f, "QC(c={c})"),
            FamilyParams::A1 { u, v } => write!(f, "A1(u={u}, v={v})"),
            FamilyParams::A2 => write!(f, "A2"),
            FamilyParams::B1 { c, e, f: ff } => write!(f, "B1(c={c}, e={e}, f={ff})"),
            FamilyParams::B2 { c, e, f: ff } => write!(f, "B2(c={c}, e={e}, f={ff})"),
        }
    }
}

/// Unvalidated pattern description: a family instance on a grid shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternSpec {
    pub shape: GridShape,
    #[serde(rename = "pattern")]
    pub params: FamilyParams,
}

impl PatternSpec {
    pub fn new(shape: GridShape, params: FamilyParams) -> Self {
        Self { shape, params }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on m={}, n={}", self.params, self.shape.m, self.shape.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("grid dimensions must be positive (m={m}, n={n})")]
    EmptyShape { m: u32, n: u32 },
    #[error("grid dimensions must not exceed {max} (m={m}, n={n})", max = MAX_DIMENSION)]
    ShapeTooLarge { m: u32, n: u32 },
    #[error("m must be odd (m={m})")]
    EvenChannelCount { m: u32 },
    #[error("m must be at least 3 (m={m})")]
    TooFewChannels { m: u32 },
    #[error("m must divide n (m={m}, n={n})")]
    ChannelsDoNotDivideSubframes { m: u32, n: u32 },
    #[error("n must be at least m (m={m}, n={n})")]
    TooFewSubframes { m: u32, n: u32 },
    #[error("QC offset c must satisfy 0 <= c < m (c={c}, m={m})")]
    QcOffsetOutOfRange { c: i64, m: u32 },
    #[error("u not coprime to m (u={u}, m={m})")]
    UNotCoprime { u: i64, m: u32 },
    #[error("u-1 not coprime to m (u={u}, m={m})")]
    UMinusOneNotCoprime { u: i64, m: u32 },
    #[error("v not coprime to m (v={v}, m={m})")]
    VNotCoprime { v: i64, m: u32 },
    #[error("c not coprime to m (c={c}, m={m})")]
    CNotCoprime { c: i64, m: u32 },
    #[error("e must not be divisible by m (e={e}, m={m})")]
    EDivisibleByM { e: i64, m: u32 },
    #[error("pattern is frame-dependent (QC with c={c} != 0); its next-frame map needs the frame number, use position_at")]
    FrameDependent { c: u64 },
    #[error("pattern has no hopping invariant (QC with c={c} != 0)")]
    NoInvariant { c: u64 },
    #[error("resource {r} is outside the pattern domain")]
    OutsideDomain { r: Resource },
}

/// Reduced, validated parameters. All values are canonical residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Hop {
    Qc { c: i64 },
    // u mod m, v mod n, u^-1 mod m
    A1 { u: i64, v: i64, u_inv: i64 },
    // half = 2^-1 mod m
    A2 { half: i64 },
    // c mod n, e mod m, f mod n
    B1 { c: i64, e: i64, f: i64 },
    B2 { c: i64, e: i64, f: i64 },
}

/// Position of a UE's logical resource in one discovery frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub frame: u64,
    pub resource: Resource,
    pub invariant: Option<InvariantValue>,
}

/// A validated hopping pattern. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    spec: PatternSpec,
    hop: Hop,
}

fn coprime(a: i64, m: u32) -> bool {
    gcd(a.rem_euclid(i64::from(m)) as u64, u64::from(m)) == 1
}

fn check_shape(shape: GridShape) -> Result<(), PatternError> {
    let GridShape { m, n } = shape;
    if m == 0 || n == 0 {
        return Err(PatternError::EmptyShape { m, n });
    }
    if m > MAX_DIMENSION || n > MAX_DIMENSION {
        return Err(PatternError::ShapeTooLarge { m, n });
    }
    Ok(())
}

fn check_odd_channels(shape: GridShape) -> Result<(), PatternError> {
    let m = shape.m;
    if m.is_multiple_of(2) {
        return Err(PatternError::EvenChannelCount { m });
    }
    if m < 3 {
        return Err(PatternError::TooFewChannels { m });
    }
    Ok(())
}

fn check_divides(shape: GridShape) -> Result<(), PatternError> {
    if !shape.n.is_multiple_of(shape.m) {
        return Err(PatternError::ChannelsDoNotDivideSubframes { m: shape.m, n: shape.n });
    }
    Ok(())
}

fn check_b_params(shape: GridShape, c: i64, e: i64) -> Result<(), PatternError> {
    let m = shape.m;
    check_odd_channels(shape)?;
    check_divides(shape)?;
    if e.rem_euclid(i64::from(m)) == 0 {
        return Err(PatternError::EDivisibleByM { e, m });
    }
    if !coprime(c, m) {
        return Err(PatternError::CNotCoprime { c, m });
    }
    Ok(())
}

/// Validates `spec` and builds the pattern.
pub fn make_pattern(spec: PatternSpec) -> Result<Pattern, PatternError> {
    Pattern::new(spec)
}

impl Pattern {
    pub fn new(spec: PatternSpec) -> Result<Self, PatternError> {
        let shape = spec.shape;
        check_shape(shape)?;
        let (m, n) = (i64::from(shape.m), i64::from(shape.n));
        let hop = match spec.params {
            FamilyParams::Qc { c } => {
                if shape.m > shape.n {
                    return Err(PatternError::TooFewSubframes { m: shape.m, n: shape.n });
                }
                if !(0..m).contains(&c) {
                    return Err(PatternError::QcOffsetOutOfRange { c, m: shape.m });
                }
                Hop::Qc { c }
            }
            FamilyParams::A1 { u, v } => {
                check_odd_channels(shape)?;
                check_divides(shape)?;
                if !coprime(u, shape.m) {
                    return Err(PatternError::UNotCoprime { u, m: shape.m });
                }
                if !coprime(u - 1, shape.m) {
                    return Err(PatternError::UMinusOneNotCoprime { u, m: shape.m });
                }
                if !coprime(v, shape.m) {
                    return Err(PatternError::VNotCoprime { v, m: shape.m });
                }
                let u = u.rem_euclid(m);
                let u_inv = mod_inverse(u, m).expect("u checked coprime to m");
                Hop::A1 { u, v: v.rem_euclid(n), u_inv }
            }
            FamilyParams::A2 => {
                check_odd_channels(shape)?;
                if shape.n < shape.m {
                    return Err(PatternError::TooFewSubframes { m: shape.m, n: shape.n });
                }
                Hop::A2 { half: (m + 1) / 2 }
            }
            FamilyParams::B1 { c, e, f } => {
                check_b_params(shape, c, e)?;
                Hop::B1 { c: c.rem_euclid(n), e: e.rem_euclid(m), f: f.rem_euclid(n) }
            }
            FamilyParams::B2 { c, e, f } => {
                check_b_params(shape, c, e)?;
                Hop::B2 { c: c.rem_euclid(n), e: e.rem_euclid(m), f: f.rem_euclid(n) }
            }
        };
        Ok(Self { spec, hop })
    }

    pub fn spec(&self) -> &PatternSpec {
        &self.spec
    }

    pub fn shape(&self) -> GridShape {
        self.spec.shape
    }

    pub fn family(&self) -> Family {
        self.spec.params.family()
    }

    /// False only for QC with `c ≠ 0`.
    pub fn is_frame_independent(&self) -> bool {
        !matches!(self.hop, Hop::Qc { c } if c != 0)
    }

    pub fn has_invariant(&self) -> bool {
        self.is_frame_independent()
    }

    /// Lowest usable channel: 1 for A1/A2, 0 otherwise.
    fn first_channel(&self) -> u32 {
        match self.hop {
            Hop::A1 { .. } | Hop::A2 { .. } => 1,
            _ => 0,
        }
    }

    pub fn contains(&self, r: Resource) -> bool {
        self.shape().contains(r) && r.i >= self.first_channel()
    }

    pub fn domain_len(&self) -> usize {
        let s = self.shape();
        (s.m - self.first_channel()) as usize * s.n as usize
    }

    /// All resources of the domain, ordered by `i` then `j`.
    pub fn domain(&self) -> Vec<Resource> {
        let s = self.shape();
        (self.first_channel()..s.m)
            .flat_map(|i| (0..s.n).map(move |j| Resource::new(i, j)))
            .collect()
    }

    fn ensure_in_domain(&self, r: Resource) -> Result<(), PatternError> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(PatternError::OutsideDomain { r })
        }
    }

    fn dims(&self) -> (i64, i64) {
        (i64::from(self.shape().m), i64::from(self.shape().n))
    }

    /// Next-frame map taken from frame `frame`. For frame-independent
    /// families `frame` is ignored. `r` must be in the domain.
    pub fn transition(&self, r: Resource, frame: u64) -> Resource {
        let (m, n) = self.dims();
        let (i, j) = (i64::from(r.i), i64::from(r.j));
        let (ni, nj) = match self.hop {
            Hop::Qc { c } => {
                // the subframe advances by the frame-0 channel i0 = i - c·t
                let t = (frame % m as u64) as i64;
                let i0 = (i - c * t).rem_euclid(m);
                ((i + c) % m, (j + i0) % n)
            }
            Hop::A1 { u, v, .. } => {
                let ni = u * i % m;
                (ni, (j - v * i + v * ni).rem_euclid(n))
            }
            Hop::A2 { .. } => {
                let ni = 2 * i % m;
                (ni, (j - i + ni).rem_euclid(n))
            }
            Hop::B1 { c, e, f } => ((i + e) % m, (c * i + j + f) % n),
            Hop::B2 { c, e, f } => ((i + e) % m, (c * i - j + f).rem_euclid(n)),
        };
        Resource::new(ni as u32, nj as u32)
    }

    fn frame_independent_or_err(&self) -> Result<(), PatternError> {
        match self.hop {
            Hop::Qc { c } if c != 0 => Err(PatternError::FrameDependent { c: c as u64 }),
            _ => Ok(()),
        }
    }

    /// The resource occupied in the next discovery frame.
    pub fn step(&self, r: Resource) -> Result<Resource, PatternError> {
        self.frame_independent_or_err()?;
        self.ensure_in_domain(r)?;
        Ok(self.transition(r, 0))
    }

    /// The resource occupied in the previous discovery frame.
    pub fn step_back(&self, r: Resource) -> Result<Resource, PatternError> {
        self.frame_independent_or_err()?;
        self.ensure_in_domain(r)?;
        let (m, n) = self.dims();
        let (i, j) = (i64::from(r.i), i64::from(r.j));
        let (pi, pj) = match self.hop {
            Hop::Qc { .. } => (i, (j - i).rem_euclid(n)),
            Hop::A1 { v, u_inv, .. } => {
                let pi = u_inv * i % m;
                (pi, (j + v * pi - v * i).rem_euclid(n))
            }
            Hop::A2 { half } => {
                let pi = half * i % m;
                (pi, (j + pi - i).rem_euclid(n))
            }
            Hop::B1 { c, e, f } => {
                let pi = (i - e).rem_euclid(m);
                (pi, (j - c * pi - f).rem_euclid(n))
            }
            Hop::B2 { c, e, f } => {
                let pi = (i - e).rem_euclid(m);
                (pi, (c * pi + f - j).rem_euclid(n))
            }
        };
        Ok(Resource::new(pi as u32, pj as u32))
    }

    /// Position in frame `t` of the logical resource that sits at `r0` in
    /// frame 0.
    pub fn position_at(&self, r0: Resource, t: u64) -> Result<Resource, PatternError> {
        self.ensure_in_domain(r0)?;
        Ok(self.position_unchecked(r0, t))
    }

    pub(crate) fn position_unchecked(&self, r0: Resource, t: u64) -> Resource {
        let (m, n) = self.dims();
        if let Hop::Qc { c } = self.hop {
            let i0 = i64::from(r0.i);
            let i = (i0 + c * (t % m as u64) as i64) % m;
            let j = (i64::from(r0.j) + i0 * (t % n as u64) as i64) % n;
            return Resource::new(i as u32, j as u32);
        }
        let steps = if t as usize > self.domain_len() {
            t % self.cycle_len(r0)
        } else {
            t
        };
        (0..steps).fold(r0, |r, _| self.transition(r, 0))
    }

    fn cycle_len(&self, r0: Resource) -> u64 {
        let mut r = self.transition(r0, 0);
        let mut len = 1;
        while r != r0 {
            r = self.transition(r, 0);
            len += 1;
        }
        len
    }

    /// Smallest `t > 0` with `position_at(r, t) == r`.
    pub fn period(&self, r: Resource) -> Result<u64, PatternError> {
        self.frame_independent_or_err()?;
        self.ensure_in_domain(r)?;
        Ok(self.cycle_len(r))
    }

    /// Modulus of the family's invariant, if it has one.
    pub fn invariant_modulus(&self) -> Option<u64> {
        let s = self.shape();
        match self.hop {
            Hop::Qc { c: 0 } | Hop::B1 { .. } | Hop::B2 { .. } => Some(u64::from(s.m)),
            Hop::A1 { .. } | Hop::A2 { .. } => Some(u64::from(s.n)),
            Hop::Qc { .. } => None,
        }
    }

    /// The invariant polynomial evaluated over the integers, before any
    /// reduction. `None` for QC with `c ≠ 0`.
    pub fn invariant_raw(&self, r: Resource) -> Option<i128> {
        let (i, j) = (i128::from(r.i), i128::from(r.j));
        let v = match self.hop {
            Hop::Qc { c: 0 } => i,
            Hop::Qc { .. } => return None,
            Hop::A1 { v, .. } => j - i128::from(v) * i,
            Hop::A2 { .. } => j - i,
            Hop::B1 { c, e, f } => {
                let (c, e, f) = (i128::from(c), i128::from(e), i128::from(f));
                c * i * i + (2 * f - c * e) * i - 2 * e * j
            }
            Hop::B2 { c, e, f } => {
                let (c, e, f) = (i128::from(c), i128::from(e), i128::from(f));
                c * c * i * i + 4 * j * j - 4 * c * i * j
                    + c * (2 * f - c * e) * i
                    + 2 * (c * e - 2 * f) * j
            }
        };
        Some(v)
    }

    /// Hopping invariant of `r`; constant along every trajectory.
    pub fn invariant(&self, r: Resource) -> Result<InvariantValue, PatternError> {
        self.ensure_in_domain(r)?;
        match (self.invariant_raw(r), self.invariant_modulus()) {
            (Some(raw), Some(q)) => Ok(InvariantValue::from_raw(raw, q)),
            _ => Err(self.no_invariant()),
        }
    }

    fn no_invariant(&self) -> PatternError {
        match self.hop {
            Hop::Qc { c } => PatternError::NoInvariant { c: c as u64 },
            _ => unreachable!("only frame-dependent QC lacks an invariant"),
        }
    }

    /// Domain split into invariant classes, keyed by invariant value.
    pub fn invariant_partition(
        &self,
    ) -> Result<BTreeMap<InvariantValue, Vec<Resource>>, PatternError> {
        if !self.has_invariant() {
            return Err(self.no_invariant());
        }
        let mut classes: BTreeMap<InvariantValue, Vec<Resource>> = BTreeMap::new();
        for r in self.domain() {
            classes.entry(self.invariant(r)?).or_default().push(r);
        }
        Ok(classes)
    }

    /// `frames + 1` points, frame 0 through `frames`.
    pub fn trajectory(&self, r0: Resource, frames: u64) -> Result<Vec<TrajectoryPoint>, PatternError> {
        self.ensure_in_domain(r0)?;
        let invariant = self.invariant(r0).ok();
        let mut out = Vec::with_capacity(frames as usize + 1);
        let mut r = r0;
        for t in 0..=frames {
            if t > 0 {
                r = self.transition(r, t - 1);
            }
            out.push(TrajectoryPoint { frame: t, resource: r, invariant });
        }
        Ok(out)
    }
}
