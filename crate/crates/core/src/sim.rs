//! Slotted half-duplex discovery simulation.
//!
//! Each UE owns one logical discovery resource and transmits on its current
//! position every discovery frame. A UE listens on every channel of every
//! subframe it does not transmit in, so A can hear B in frame `t` iff their
//! subframes differ in that frame. Receptions then succeed per the channel
//! model. With filtering enabled a receiver only decodes resources whose
//! hopping invariant belongs to a service type it is interested in.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Resource;
use crate::pattern::{Pattern, PatternError, PatternSpec};

pub const DEFAULT_HORIZON: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UeConfig {
    pub id: u64,
    /// Frame-0 position of the UE's logical resource.
    pub start: Resource,
    pub service_type: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    #[default]
    Ideal,
    Erasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    /// Reception success probability; only used by the erasure channel.
    pub p_rx: f64,
    pub seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ChannelModel {
    pub fn ideal() -> Self {
        Self { kind: ChannelKind::Ideal, p_rx: 1.0, seed: 0 }
    }

    pub fn erasure(p_rx: f64, seed: u64) -> Self {
        Self { kind: ChannelKind::Erasure, p_rx, seed }
    }

    /// Whether `rx` receives `tx` in `frame`, given that it is eligible to.
    ///
    /// Draws come from ChaCha8 keyed by `(seed, rx, tx)` with the frame as
    /// the stream id, so each draw depends only on its own coordinates.
    pub fn delivers(&self, frame: u64, rx: u64, tx: u64) -> bool {
        match self.kind {
            ChannelKind::Ideal => true,
            ChannelKind::Erasure => {
                let mut key = [0u8; 32];
                key[..8].copy_from_slice(&self.seed.to_le_bytes());
                key[8..16].copy_from_slice(&rx.to_le_bytes());
                key[16..24].copy_from_slice(&tx.to_le_bytes());
                let mut rng = ChaCha8Rng::from_seed(key);
                rng.set_stream(frame);
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                u < self.p_rx
            }
        }
    }
}

/// Invariant-based decode filtering.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Filtering {
    /// Service type → invariant values it is carried on. Empty means the
    /// identity assignment: type `k` uses invariant value `k`.
    #[serde(default)]
    pub service_map: BTreeMap<u64, BTreeSet<u64>>,
    /// UE id → service types that UE wants to decode. UEs without an entry
    /// decode everything.
    #[serde(default)]
    pub interest: BTreeMap<u64, BTreeSet<u64>>,
}

impl Filtering {
    fn invariants_for(&self, service_type: u64) -> BTreeSet<u64> {
        if self.service_map.is_empty() {
            BTreeSet::from([service_type])
        } else {
            self.service_map.get(&service_type).cloned().unwrap_or_default()
        }
    }

    /// Invariant values `ue` decodes, or `None` when it decodes everything.
    pub fn interest_invariants(&self, ue: u64) -> Option<BTreeSet<u64>> {
        self.interest
            .get(&ue)
            .map(|types| types.iter().flat_map(|&k| self.invariants_for(k)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub pattern: PatternSpec,
    pub ues: Vec<UeConfig>,
    pub channel: ChannelModel,
    pub horizon: u64,
    pub filtering: Option<Filtering>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("horizon must be at least 1 frame")]
    ZeroHorizon,
    #[error("reception probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("duplicate UE id {0}")]
    DuplicateId(u64),
    #[error("UEs {first} and {second} share start resource {r}")]
    DuplicateStart { r: Resource, first: u64, second: u64 },
    #[error("UE {id} starts at {r}, outside the pattern domain")]
    StartOutsideDomain { id: u64, r: Resource },
    #[error("filtering needs a pattern with a hopping invariant (QC with c={c} != 0 has none)")]
    FilteringWithoutInvariant { c: u64 },
    #[error("UE {id} advertises service type {service_type} but its resource carries invariant {invariant}, which that type does not map to")]
    ServiceTypeMismatch { id: u64, service_type: u64, invariant: u64 },
    #[error("interest set given for unknown UE {0}")]
    UnknownInterestUe(u64),
    #[error("pair needs two distinct resources, got {0} twice")]
    SameResource(Resource),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub rx: u64,
    pub tx: u64,
    /// First frame in which `rx` received `tx`.
    pub first_heard: Option<u64>,
    /// Same, counting only receptions `rx` chose to decode.
    pub first_heard_filtered: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UeDecode {
    pub id: u64,
    /// Decode attempts per frame without filtering.
    pub unfiltered: Vec<u64>,
    /// Decode attempts per frame with filtering (equal to `unfiltered` when
    /// filtering is off).
    pub filtered: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ordered_pairs: u64,
    pub discovered: u64,
    pub undiscovered: u64,
    pub mean_first_heard: Option<f64>,
    pub max_first_heard: Option<u64>,
    /// Largest frame by which both UEs of an unordered pair heard each other.
    pub max_mutual: Option<u64>,
    pub mutual_undiscovered: u64,
    /// `cdf[t]`: share of ordered pairs discovered by frame `t`.
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub pattern: PatternSpec,
    pub horizon: u64,
    pub filtering: bool,
    /// Ordered pairs, sorted by `(rx, tx)`.
    pub pairs: Vec<PairOutcome>,
    /// One entry per UE, sorted by id.
    pub decode: Vec<UeDecode>,
    pub summary: Summary,
}

impl SimResult {
    pub fn pair(&self, rx: u64, tx: u64) -> Option<&PairOutcome> {
        self.pairs
            .binary_search_by(|p| (p.rx, p.tx).cmp(&(rx, tx)))
            .ok()
            .map(|k| &self.pairs[k])
    }

    /// Frame by which `a` and `b` have both heard each other.
    pub fn mutual_discovery(&self, a: u64, b: u64) -> Option<u64> {
        let ab = self.pair(a, b)?.first_heard?;
        let ba = self.pair(b, a)?.first_heard?;
        Some(ab.max(ba))
    }
}

fn validate(scenario: &Scenario) -> Result<Pattern, SimError> {
    let pattern = Pattern::new(scenario.pattern)?;
    if scenario.horizon == 0 {
        return Err(SimError::ZeroHorizon);
    }
    let p = scenario.channel.p_rx;
    if scenario.channel.kind == ChannelKind::Erasure && !(0.0..=1.0).contains(&p) {
        return Err(SimError::InvalidProbability(p));
    }
    let mut ids = BTreeSet::new();
    let mut starts: HashMap<Resource, u64> = HashMap::new();
    for ue in &scenario.ues {
        if !ids.insert(ue.id) {
            return Err(SimError::DuplicateId(ue.id));
        }
        if !pattern.contains(ue.start) {
            return Err(SimError::StartOutsideDomain { id: ue.id, r: ue.start });
        }
        if let Some(&first) = starts.get(&ue.start) {
            return Err(SimError::DuplicateStart { r: ue.start, first, second: ue.id });
        }
        starts.insert(ue.start, ue.id);
    }
    if let Some(filtering) = &scenario.filtering {
        if !pattern.has_invariant() {
            let c = match scenario.pattern.params {
                crate::pattern::FamilyParams::Qc { c } => c as u64,
                _ => 0,
            };
            return Err(SimError::FilteringWithoutInvariant { c });
        }
        for ue in &scenario.ues {
            let invariant = pattern.invariant(ue.start)?.value;
            if !filtering.invariants_for(ue.service_type).contains(&invariant) {
                return Err(SimError::ServiceTypeMismatch { id: ue.id, service_type: ue.service_type, invariant });
            }
        }
        if let Some(&id) = filtering.interest.keys().find(|id| !ids.contains(id)) {
            return Err(SimError::UnknownInterestUe(id));
        }
    }
    Ok(pattern)
}

/// Runs the scenario frame by frame. Deterministic for a fixed scenario.
pub fn run(scenario: &Scenario) -> Result<SimResult, SimError> {
    let pattern = validate(scenario)?;
    let mut ues = scenario.ues.clone();
    ues.sort_by_key(|u| u.id);
    let k = ues.len();
    let horizon = scenario.horizon;

    let interest: Vec<Option<BTreeSet<u64>>> = ues
        .iter()
        .map(|u| scenario.filtering.as_ref().and_then(|f| f.interest_invariants(u.id)))
        .collect();

    let mut first = vec![None; k * k];
    let mut first_filtered = vec![None; k * k];
    let mut unfiltered = vec![Vec::with_capacity(horizon as usize); k];
    let mut filtered = vec![Vec::with_capacity(horizon as usize); k];

    let mut pos: Vec<Resource> = ues.iter().map(|u| u.start).collect();
    for t in 0..horizon {
        if t > 0 {
            for p in pos.iter_mut() {
                *p = pattern.transition(*p, t - 1);
            }
        }
        // invariant as a receiver would compute it from the observed position
        let observed: Vec<Option<u64>> = pos.iter().map(|&p| pattern.invariant(p).ok().map(|v| v.value)).collect();
        for a in 0..k {
            let (mut tries, mut tries_filtered) = (0, 0);
            for b in 0..k {
                if a == b || pos[a].j == pos[b].j {
                    continue;
                }
                tries += 1;
                let decode = match (&interest[a], observed[b]) {
                    (None, _) => true,
                    (Some(set), Some(v)) => set.contains(&v),
                    (Some(_), None) => false,
                };
                if decode {
                    tries_filtered += 1;
                }
                if scenario.channel.delivers(t, ues[a].id, ues[b].id) {
                    first[a * k + b].get_or_insert(t);
                    if decode {
                        first_filtered[a * k + b].get_or_insert(t);
                    }
                }
            }
            unfiltered[a].push(tries);
            filtered[a].push(tries_filtered);
        }
    }

    let mut pairs = Vec::with_capacity(k * k.saturating_sub(1));
    for a in 0..k {
        for b in 0..k {
            if a != b {
                pairs.push(PairOutcome {
                    rx: ues[a].id,
                    tx: ues[b].id,
                    first_heard: first[a * k + b],
                    first_heard_filtered: first_filtered[a * k + b],
                });
            }
        }
    }
    let decode = ues
        .iter()
        .zip(unfiltered.into_iter().zip(filtered))
        .map(|(u, (unfiltered, filtered))| UeDecode { id: u.id, unfiltered, filtered })
        .collect();

    let mut mutual = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            mutual.push(match (first[a * k + b], first[b * k + a]) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            });
        }
    }
    let summary = summarize(&pairs, &mutual, horizon);

    Ok(SimResult {
        pattern: scenario.pattern,
        horizon,
        filtering: scenario.filtering.is_some(),
        pairs,
        decode,
        summary,
    })
}

fn summarize(pairs: &[PairOutcome], mutual: &[Option<u64>], horizon: u64) -> Summary {
    let heard: Vec<u64> = pairs.iter().filter_map(|p| p.first_heard).collect();
    let total = pairs.len() as u64;
    let mut by_frame = vec![0u64; horizon as usize];
    for &t in &heard {
        by_frame[t as usize] += 1;
    }
    let mut cumulative = 0;
    let cdf = by_frame
        .iter()
        .map(|&c| {
            cumulative += c;
            if total == 0 {
                1.0
            } else {
                cumulative as f64 / total as f64
            }
        })
        .collect();
    Summary {
        ordered_pairs: total,
        discovered: heard.len() as u64,
        undiscovered: total - heard.len() as u64,
        mean_first_heard: (!heard.is_empty())
            .then(|| heard.iter().sum::<u64>() as f64 / heard.len() as f64),
        max_first_heard: heard.iter().copied().max(),
        max_mutual: mutual.iter().flatten().copied().max(),
        mutual_undiscovered: mutual.iter().filter(|m| m.is_none()).count() as u64,
        cdf,
    }
}

/// Ideal-channel first frame in which the UE on `ra` can hear the UE on
/// `rb`, i.e. the first frame their subframes differ.
pub fn pairwise_first_hear(
    pattern: &Pattern,
    ra: Resource,
    rb: Resource,
    horizon: u64,
) -> Result<Option<u64>, SimError> {
    if ra == rb {
        return Err(SimError::SameResource(ra));
    }
    let (mut a, mut b) = (ra, rb);
    for r in [a, b] {
        if !pattern.contains(r) {
            return Err(PatternError::OutsideDomain { r }.into());
        }
    }
    for t in 0..horizon {
        if t > 0 {
            a = pattern.transition(a, t - 1);
            b = pattern.transition(b, t - 1);
        }
        if a.j != b.j {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeCost {
    pub id: u64,
    pub attempts_unfiltered: u64,
    pub attempts_filtered: u64,
    /// `filtered / unfiltered`; `None` when there was nothing to decode.
    pub ratio: Option<f64>,
}

/// Total decode attempts per UE over the run, in scenario UE order.
pub fn decode_cost(scenario: &Scenario, result: &SimResult) -> Vec<DecodeCost> {
    let by_id: BTreeMap<u64, &UeDecode> = result.decode.iter().map(|d| (d.id, d)).collect();
    scenario
        .ues
        .iter()
        .filter_map(|u| by_id.get(&u.id))
        .map(|d| {
            let attempts_unfiltered: u64 = d.unfiltered.iter().sum();
            let attempts_filtered: u64 = d.filtered.iter().sum();
            DecodeCost {
                id: d.id,
                attempts_unfiltered,
                attempts_filtered,
                ratio: (attempts_unfiltered > 0)
                    .then(|| attempts_filtered as f64 / attempts_unfiltered as f64),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;
    use crate::pattern::FamilyParams;
    use proptest::prelude::*;

    fn spec(m: u32, n: u32, params: FamilyParams) -> PatternSpec {
        PatternSpec::new(GridShape::new(m, n), params)
    }

    fn r(i: u32, j: u32) -> Resource {
        Resource::new(i, j)
    }

    fn ues_at(starts: &[Resource]) -> Vec<UeConfig> {
        starts
            .iter()
            .enumerate()
            .map(|(k, &start)| UeConfig { id: k as u64, start, service_type: 0 })
            .collect()
    }

    fn scenario(pattern: PatternSpec, ues: Vec<UeConfig>, channel: ChannelModel) -> Scenario {
        Scenario { pattern, ues, channel, horizon: 8, filtering: None }
    }

    const B1: FamilyParams = FamilyParams::B1 { c: 1, e: 1, f: 0 };

    #[test]
    fn same_subframe_pair_meets_next_frame() {
        let s = scenario(spec(3, 6, B1), ues_at(&[r(0, 0), r(1, 0)]), ChannelModel::ideal());
        let res = run(&s).unwrap();
        assert_eq!(res.pair(0, 1).unwrap().first_heard, Some(1));
        assert_eq!(res.pair(1, 0).unwrap().first_heard, Some(1));
        assert_eq!(res.mutual_discovery(0, 1), Some(1));
        assert_eq!(res.decode[0].unfiltered[0], 0);
        assert_eq!(res.decode[0].unfiltered[1], 1);
    }

    #[test]
    fn different_subframes_meet_immediately() {
        let s = scenario(spec(3, 6, B1), ues_at(&[r(0, 0), r(2, 3)]), ChannelModel::ideal());
        assert_eq!(run(&s).unwrap().mutual_discovery(0, 1), Some(0));
    }

    #[test]
    fn full_occupancy_a1_discovers_within_one_frame() {
        let sp = spec(5, 10, FamilyParams::A1 { u: 2, v: 1 });
        let p = Pattern::new(sp).unwrap();
        let s = scenario(sp, ues_at(&p.domain()), ChannelModel::ideal());
        let res = run(&s).unwrap();
        assert_eq!(res.pairs.len(), 40 * 39);
        assert!(res.pairs.iter().all(|x| x.first_heard.unwrap() <= 1));
        assert_eq!(res.summary.max_mutual, Some(1));
        assert_eq!(res.summary.undiscovered, 0);
        assert_eq!(*res.summary.cdf.last().unwrap(), 1.0);
    }

    #[test]
    fn pairwise_examples() {
        let b1 = Pattern::new(spec(3, 6, B1)).unwrap();
        assert_eq!(pairwise_first_hear(&b1, r(0, 0), r(1, 0), 8), Ok(Some(1)));
        assert_eq!(pairwise_first_hear(&b1, r(0, 0), r(1, 4), 8), Ok(Some(0)));
        assert_eq!(pairwise_first_hear(&b1, r(0, 0), r(0, 0), 8), Err(SimError::SameResource(r(0, 0))));
        assert_eq!(pairwise_first_hear(&b1, r(0, 0), r(1, 0), 1), Ok(None));
        // QC(c=0) never moves channel 0, but pairs still split after a frame
        let qc = Pattern::new(spec(5, 10, FamilyParams::Qc { c: 0 })).unwrap();
        assert_eq!(pairwise_first_hear(&qc, r(0, 3), r(2, 3), 4), Ok(Some(1)));
    }

    #[test]
    fn pairwise_first_hear_is_zero_or_one_under_half_duplex() {
        for params in [
            FamilyParams::A1 { u: 2, v: 1 },
            FamilyParams::A2,
            FamilyParams::B1 { c: 1, e: 1, f: 0 },
            FamilyParams::B2 { c: 2, e: 3, f: 4 },
            FamilyParams::Qc { c: 3 },
        ] {
            let p = Pattern::new(spec(5, 10, params)).unwrap();
            let d = p.domain();
            for &a in &d {
                for &b in &d {
                    if a != b {
                        let t = pairwise_first_hear(&p, a, b, 4).unwrap().unwrap();
                        assert!(t <= 1, "{params:?} {a} {b}");
                        assert_eq!(t == 0, a.j != b.j);
                    }
                }
            }
        }
    }

    #[test]
    fn run_rejects_bad_scenarios() {
        let sp = spec(3, 6, B1);
        let dup = scenario(sp, ues_at(&[r(0, 0), r(0, 0)]), ChannelModel::ideal());
        assert!(matches!(run(&dup), Err(SimError::DuplicateStart { .. })));
        let mut ids = scenario(sp, ues_at(&[r(0, 0), r(0, 1)]), ChannelModel::ideal());
        ids.ues[1].id = 0;
        assert_eq!(run(&ids), Err(SimError::DuplicateId(0)));
        let outside = scenario(spec(3, 6, FamilyParams::A2), ues_at(&[r(0, 0)]), ChannelModel::ideal());
        assert!(matches!(run(&outside), Err(SimError::StartOutsideDomain { .. })));
        let mut qc = scenario(spec(3, 6, FamilyParams::Qc { c: 1 }), ues_at(&[r(0, 0)]), ChannelModel::ideal());
        qc.filtering = Some(Filtering::default());
        assert_eq!(run(&qc), Err(SimError::FilteringWithoutInvariant { c: 1 }));
        let bad_p = scenario(sp, ues_at(&[r(0, 0)]), ChannelModel::erasure(1.5, 0));
        assert_eq!(run(&bad_p), Err(SimError::InvalidProbability(1.5)));
        let mut zero = scenario(sp, ues_at(&[r(0, 0)]), ChannelModel::ideal());
        zero.horizon = 0;
        assert_eq!(run(&zero), Err(SimError::ZeroHorizon));
        // (0,0) under B1(c=1,e=1,f=0) carries invariant 0, not 2
        let mut mismatch = scenario(sp, ues_at(&[r(0, 0)]), ChannelModel::ideal());
        mismatch.ues[0].service_type = 2;
        mismatch.filtering = Some(Filtering::default());
        assert!(matches!(run(&mismatch), Err(SimError::ServiceTypeMismatch { id: 0, .. })));
    }

    #[test]
    fn erasure_draws_are_keyed_not_sequential() {
        let ch = ChannelModel::erasure(0.5, 42);
        let draws: Vec<bool> = (0..64).map(|t| ch.delivers(t, 3, 7)).collect();
        let again: Vec<bool> = (0..64).rev().map(|t| ch.delivers(t, 3, 7)).rev().collect();
        assert_eq!(draws, again);
        assert!(draws.iter().any(|&x| x) && draws.iter().any(|&x| !x));
        assert_ne!(draws, (0..64).map(|t| ch.delivers(t, 7, 3)).collect::<Vec<_>>());
        let certain = ChannelModel::erasure(1.0, 9);
        assert!((0..1000).all(|t| certain.delivers(t, 1, 2)));
        let never = ChannelModel::erasure(0.0, 9);
        assert!((0..1000).all(|t| !never.delivers(t, 1, 2)));
    }

    #[test]
    fn erasure_success_rate_tracks_probability() {
        let ch = ChannelModel::erasure(0.3, 7);
        let hits = (0..20_000u64).filter(|&t| ch.delivers(t, t % 13, 99)).count();
        let rate = hits as f64 / 20_000.0;
        assert!((rate - 0.3).abs() < 0.02, "{rate}");
    }

    #[test]
    fn decode_cost_edges() {
        let sp = spec(5, 10, FamilyParams::A1 { u: 2, v: 1 });
        let p = Pattern::new(sp).unwrap();
        let ues: Vec<UeConfig> = p
            .domain()
            .into_iter()
            .enumerate()
            .map(|(k, start)| UeConfig { id: k as u64, start, service_type: p.invariant(start).unwrap().value })
            .collect();
        let all_types: BTreeSet<u64> = (0..10).collect();
        let mut s = scenario(sp, ues, ChannelModel::ideal());

        s.filtering = Some(Filtering {
            service_map: BTreeMap::new(),
            interest: BTreeMap::from([(0, all_types), (1, BTreeSet::new())]),
        });
        let res = run(&s).unwrap();
        let costs = decode_cost(&s, &res);
        assert_eq!(costs[0].ratio, Some(1.0));
        assert_eq!(costs[1].attempts_filtered, 0);
        assert_eq!(costs[1].ratio, Some(0.0));
        // no interest entry: decodes everything
        assert_eq!(costs[2].ratio, Some(1.0));
        assert_eq!(costs[0].attempts_unfiltered, 36 * 8);
    }

    fn small_scenario() -> impl Strategy<Value = Scenario> {
        let params = prop_oneof![
            Just(FamilyParams::A1 { u: 2, v: 1 }),
            Just(FamilyParams::A2),
            Just(FamilyParams::B1 { c: 1, e: 1, f: 0 }),
            Just(FamilyParams::B2 { c: 2, e: 1, f: 3 }),
            Just(FamilyParams::Qc { c: 0 }),
        ];
        (params, any::<u64>(), 0.0f64..=1.0, any::<u64>(), 1u64..12, prop::collection::btree_set(0u64..10, 0..4))
            .prop_map(|(params, pick, p_rx, seed, horizon, interest)| {
                let sp = spec(5, 10, params);
                let pat = Pattern::new(sp).unwrap();
                let ues: Vec<UeConfig> = pat
                    .domain()
                    .into_iter()
                    .enumerate()
                    .filter(|(k, _)| pick >> (k % 64) & 1 == 1)
                    .map(|(k, start)| UeConfig {
                        id: k as u64,
                        start,
                        service_type: pat.invariant(start).unwrap().value,
                    })
                    .collect();
                let interest = ues.iter().step_by(2).map(|u| (u.id, interest.clone())).collect();
                Scenario {
                    pattern: sp,
                    ues,
                    channel: ChannelModel::erasure(p_rx, seed),
                    horizon,
                    filtering: Some(Filtering { service_map: BTreeMap::new(), interest }),
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn simulation_invariants(s in small_scenario()) {
            let res = run(&s).unwrap();
            let pat = Pattern::new(s.pattern).unwrap();
            let start: BTreeMap<u64, &UeConfig> = s.ues.iter().map(|u| (u.id, u)).collect();
            let filtering = s.filtering.as_ref().unwrap();
            for p in &res.pairs {
                // half duplex: whenever heard, subframes differed that frame
                if let Some(t) = p.first_heard {
                    prop_assert!(t < s.horizon);
                    let a = pat.position_at(start[&p.rx].start, t).unwrap();
                    let b = pat.position_at(start[&p.tx].start, t).unwrap();
                    prop_assert_ne!(a.j, b.j);
                }
                // filtering soundness and completeness
                let wanted = match filtering.interest_invariants(p.rx) {
                    None => true,
                    Some(set) => set.contains(&pat.invariant(start[&p.tx].start).unwrap().value),
                };
                let expect = if wanted { p.first_heard } else { None };
                prop_assert_eq!(p.first_heard_filtered, expect);
            }
            for d in &res.decode {
                prop_assert!(d.filtered.iter().zip(&d.unfiltered).all(|(f, u)| f <= u));
            }
            prop_assert!(res.summary.cdf.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(run(&s).unwrap(), res);
        }

        #[test]
        fn certain_erasure_matches_ideal(s in small_scenario()) {
            let mut certain = s.clone();
            certain.channel = ChannelModel::erasure(1.0, s.channel.seed);
            let mut ideal = s;
            ideal.channel = ChannelModel::ideal();
            prop_assert_eq!(run(&certain).unwrap(), run(&ideal).unwrap());
        }
    }
}
