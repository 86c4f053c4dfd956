use hopinv::sim::pairwise_first_hear;
use hopinv::verify::{
    check_bijection, check_frame_independence, check_half_duplex, check_invariant, default_check_frames,
    verify_all, HoppingMap, Outcome,
};
use hopinv::{FamilyParams, GridShape, Pattern, PatternSpec, Resource};

fn all_small_patterns() -> Vec<Pattern> {
    let mut out = Vec::new();
    for m in [3u32, 5, 7] {
        for n in [m, 2 * m, m + 1, m + 2] {
            let shape = GridShape::new(m, n);
            let mut params = vec![FamilyParams::A2, FamilyParams::Qc { c: 0 }, FamilyParams::Qc { c: 1 }];
            for a in 0..i64::from(n) {
                for b in 0..i64::from(m) {
                    params.push(FamilyParams::A1 { u: b, v: a });
                    params.push(FamilyParams::B1 { c: a, e: b, f: a + b });
                    params.push(FamilyParams::B2 { c: a, e: b, f: 2 * a - b });
                }
            }
            out.extend(params.into_iter().filter_map(|p| Pattern::new(PatternSpec::new(shape, p)).ok()));
        }
    }
    out
}

#[test]
fn every_valid_pattern_verifies_except_frame_dependent_qc() {
    let patterns = all_small_patterns();
    assert!(patterns.len() > 500);
    for p in &patterns {
        let report = verify_all(p, default_check_frames(p.shape()));
        let expect = match p.spec().params {
            FamilyParams::Qc { c: 1 } => false,
            // QC(c=0) never changes channel
            FamilyParams::Qc { c: 0 } => false,
            _ => true,
        };
        assert_eq!(report.all_pass, expect, "{}", p.spec());
        for rep in &report.reports {
            if rep.outcome == Outcome::Pass {
                let per_frame = if p.is_frame_independent() { 1 } else { report.frames };
                let expected = match rep.property {
                    hopinv::verify::Property::FrameIndependence => report.frames,
                    hopinv::verify::Property::Invariant => 1,
                    _ => per_frame,
                } * p.domain_len() as u64;
                assert_eq!(rep.checked, expected, "{} {}", p.spec(), rep.property);
            } else {
                assert!(rep.outcome == Outcome::NotApplicable || rep.counterexample.is_some());
            }
        }
    }
}

#[test]
fn half_duplex_patterns_meet_every_pair_within_one_frame() {
    for p in all_small_patterns() {
        if check_half_duplex(&p).outcome != Outcome::Pass {
            continue;
        }
        let d = p.domain();
        for &a in d.iter().step_by(3) {
            for &b in &d {
                if a != b {
                    let t = pairwise_first_hear(&p, a, b, 3).unwrap();
                    assert!(matches!(t, Some(0) | Some(1)), "{} {a} {b}", p.spec());
                }
            }
        }
    }
}

#[test]
fn invariant_classes_partition_and_are_step_closed() {
    for p in all_small_patterns().iter().filter(|p| p.has_invariant()) {
        let classes = p.invariant_partition().unwrap();
        let total: usize = classes.values().map(Vec::len).sum();
        assert_eq!(total, p.domain_len());
        for (k, members) in &classes {
            for &r in members {
                assert_eq!(p.invariant(p.step(r).unwrap()).unwrap(), *k);
            }
        }
    }
}

/// B1's formula on a grid where m does not divide n, bypassing validation.
struct UncheckedB1 {
    shape: GridShape,
    c: i64,
    e: i64,
    f: i64,
}

impl HoppingMap for UncheckedB1 {
    fn shape(&self) -> GridShape {
        self.shape
    }
    fn domain(&self) -> Vec<Resource> {
        (0..self.shape.m).flat_map(|i| (0..self.shape.n).map(move |j| Resource::new(i, j))).collect()
    }
    fn contains(&self, r: Resource) -> bool {
        self.shape.contains(r)
    }
    fn is_frame_independent(&self) -> bool {
        true
    }
    fn transition(&self, r: Resource, _: u64) -> Resource {
        let (m, n) = (i64::from(self.shape.m), i64::from(self.shape.n));
        let (i, j) = (i64::from(r.i), i64::from(r.j));
        Resource::new(((i + self.e) % m) as u32, ((self.c * i + j + self.f) % n) as u32)
    }
    fn position_at(&self, r0: Resource, t: u64) -> Resource {
        (0..t).fold(r0, |r, _| self.transition(r, 0))
    }
    fn invariant_modulus(&self) -> Option<u64> {
        Some(u64::from(self.shape.m))
    }
    fn invariant_raw(&self, r: Resource) -> Option<i128> {
        let (i, j) = (i128::from(r.i), i128::from(r.j));
        let (c, e, f) = (i128::from(self.c), i128::from(self.e), i128::from(self.f));
        Some(c * i * i + (2 * f - c * e) * i - 2 * e * j)
    }
}

#[test]
fn divisibility_rule_is_needed_for_b1() {
    let raw = UncheckedB1 { shape: GridShape::new(3, 4), c: 1, e: 1, f: 0 };
    assert_eq!(check_bijection(&raw).outcome, Outcome::Pass);
    assert_eq!(check_frame_independence(&raw, 4).outcome, Outcome::Pass);
    assert_eq!(check_invariant(&raw, None).outcome, Outcome::Fail);
    assert!(Pattern::new(PatternSpec::new(GridShape::new(3, 4), FamilyParams::B1 { c: 1, e: 1, f: 0 })).is_err());
}
