use av1lab::frame::MotionVector;
use av1lab::mvref::{pack_mv, MotionField, Origin, ProjectionSetup, StoredMotion};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn mv(r: i32, c: i32) -> MotionVector {
    MotionVector::new(r, c)
}

/// Projects three random stored-motion fields onto each of `grids` random
/// motion fields and checks every write against the projection window in
/// 8x8 units, and that no stored interpolated entry is ever replaced.
/// Panics on a violation.
pub fn check_random_grids(rng: &mut ChaCha8Rng, grids: usize) {
    for _ in 0..grids {
        let (w8, h8) = (rng.gen_range(8..40), rng.gen_range(8..40));
        let mut f = MotionField::new(w8, h8);
        let mut interpolated = vec![false; w8 * h8];
        for _ in 0..3 {
            let mut s = StoredMotion::new(w8, h8);
            for r in s.records.iter_mut() {
                if rng.gen_bool(0.7) {
                    *r = pack_mv(mv(rng.gen_range(-1500..1500), rng.gen_range(-1500..1500)), rng.gen_range(0..4));
                }
            }
            let spans = [rng.gen_range(-8..8), rng.gen_range(1..8), -rng.gen_range(1..8), 0];
            let st = ProjectionSetup { ref_spans: spans, d3: rng.gen_range(-4..5), d2: rng.gen_range(1..6) * [1, -1][rng.gen_range(0..2)] };
            let rep = f.project(&s, &st);
            for wr in &rep.writes {
                // Independent window check in 8x8 units.
                let (br, bc) = (wr.from.0 / 8 * 8, wr.from.1 / 8 * 8);
                assert!(wr.to.0 >= br && wr.to.0 < br + 8, "{wr:?}");
                assert!(wr.to.1 as isize >= bc as isize - 8 && wr.to.1 < bc + 16, "{wr:?}");
                let i = wr.to.0 * w8 + wr.to.1;
                if interpolated[i] {
                    assert!(!wr.stored, "interpolated entry replaced: {wr:?}");
                }
                if wr.stored && wr.origin == Origin::Interpolated {
                    interpolated[i] = true;
                }
            }
        }
        for (i, &was) in interpolated.iter().enumerate() {
            if was {
                assert_eq!(f.get(i / w8, i % w8).unwrap().origin, Origin::Interpolated);
            }
        }
    }
}
