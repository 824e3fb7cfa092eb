use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempjoint::inference::{map_inference, random_instance, Constraints};
use tempjoint::scoring::ScoreTable;
use tempjoint::JointAssignment;

fn event_part(s: &ScoreTable, a: &JointAssignment) -> f64 {
    a.events.iter().map(|(k, l)| s.events[k][l.index()]).sum()
}

#[test]
fn event_score_of_the_map_grows_with_c_event() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0];
    for _ in 0..200 {
        let (c, s) = random_instance(&mut rng, 5, 8, 1.0);
        let mut prev = f64::NEG_INFINITY;
        for ce in grid {
            let sol = map_inference(&s, &c, ce, Constraints::FULL, &[]).unwrap();
            let e = event_part(&s, &sol.assignment);
            assert!(e >= prev - 1e-9, "c_event {ce}: {e} < {prev}");
            prev = e;
        }
    }
}
