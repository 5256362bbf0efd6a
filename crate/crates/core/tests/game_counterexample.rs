//! Three-provider log-utility game with the published coefficients.

use datacollab::game::counterexample::{followers, EXPECTED_TABLE};
use datacollab::game::*;

fn table() -> ValueTable {
    upper_stage_value_table(&followers()).unwrap()
}

#[test]
fn value_table_matches_published_rows() {
    let t = table();
    for (row, a) in EXPECTED_TABLE.iter().zip(t.profiles_lexicographic()) {
        let v = t.value(&a);
        for k in 0..3 {
            assert!((v[k] - row[k]).abs() <= 0.005 + 1e-12, "a={a:?} k={k}: {} vs {}", v[k], row[k]);
        }
    }
}

#[test]
fn no_pure_equilibrium() {
    assert!(pure_ne(&table()).is_empty());
}

#[test]
fn mixed_equilibrium_has_small_regret() {
    let t = table();
    let m = mixed_ne(&t).unwrap();
    assert!(m.regret < 1e-6);
    // independent check over all pure deviations
    let base = expected_payoffs(&t, &m.probs);
    for k in 0..3 {
        for dev in [0.0, 1.0] {
            let mut p = m.probs.clone();
            p[k] = dev;
            assert!(expected_payoffs(&t, &p)[k] - base[k] < 1e-6);
        }
    }
}

#[test]
fn decreasing_differences_hold() {
    assert!(decreasing_differences_check(&table()).holds);
}
