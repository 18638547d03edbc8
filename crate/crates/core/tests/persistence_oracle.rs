mod common;

use common::oracle::{level_set_betti, oracle_pairs};
use common::sorted;
use pif::persistence::persistence_of_values;
use pif::{Direction, RngSeed};
use proptest::prelude::*;

/// Distinct values: a random permutation of 0..n scaled, plus jitter.
fn distinct_grid(seed: u64, rows: usize, cols: usize) -> Vec<f64> {
    let mut rng = RngSeed(seed).stream();
    let mut v: Vec<f64> = (0..rows * cols).map(|k| k as f64).collect();
    rng.shuffle(&mut v);
    v.iter().map(|x| 0.5 * x + 0.1 * rng.uniform()).collect()
}

fn check(rows: usize, cols: usize, values: &[f64], dir: Direction) {
    let superlevel = dir == Direction::Superlevel;
    let got = sorted(persistence_of_values(rows, cols, values, dir, 1).unwrap());
    let want = oracle_pairs(rows, cols, values, superlevel, 1);
    assert_eq!(got, want, "{rows}x{cols} {dir:?} {values:?}");
}

#[test]
fn matches_oracle_on_small_grids() {
    for seed in 0..120u64 {
        let rows = 1 + (seed % 6) as usize;
        let cols = 1 + (seed / 6 % 6) as usize;
        let v = distinct_grid(seed, rows, cols);
        check(rows, cols, &v, Direction::Superlevel);
        check(rows, cols, &v, Direction::Sublevel);
    }
}

#[test]
fn worked_examples_agree_with_oracle() {
    let line = [1.0, 3.0, 2.0, 4.0, 1.0];
    // The oracle needs distinct values; perturb the duplicated 1.
    let line_distinct = [1.0, 3.0, 2.0, 4.0, 0.5];
    assert_eq!(oracle_pairs(1, 5, &line_distinct, true, 0), vec![(0, 2.0, 3.0)]);
    assert_eq!(sorted(persistence_of_values(1, 5, &line, Direction::Superlevel, 0).unwrap()), vec![(0, 2.0, 3.0)]);
    let ring = [5.0, 5.1, 5.2, 5.3, 1.0, 5.4, 5.5, 5.6, 5.7];
    let got = sorted(persistence_of_values(3, 3, &ring, Direction::Superlevel, 1).unwrap());
    assert_eq!(got, oracle_pairs(3, 3, &ring, true, 1));
    assert!(got.contains(&(1, 1.0, 5.0)));
}

/// Alive classes at threshold `t` read off the diagram (plus the essential
/// component once anything is present).
fn alive(pairs: &[(u8, f64, f64)], dim: u8, t: f64, superlevel: bool) -> i64 {
    pairs
        .iter()
        .filter(|p| p.0 == dim)
        .filter(|&&(_, b, d)| if superlevel { d >= t && t > b } else { b <= t && t < d })
        .count() as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_consistency(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, sup in any::<bool>()) {
        let v = distinct_grid(seed, rows, cols);
        let dir = if sup { Direction::Superlevel } else { Direction::Sublevel };
        let pairs = sorted(persistence_of_values(rows, cols, &v, dir, 1).unwrap());
        for &t in &v {
            let (b0, b1) = level_set_betti(rows, cols, &v, t, sup);
            let essential = 1;
            prop_assert_eq!(alive(&pairs, 0, t, sup) + essential, b0);
            prop_assert_eq!(alive(&pairs, 1, t, sup), b1);
        }
    }

    #[test]
    fn shift_equivariance(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, k in -8i32..8) {
        // Dyadic shift keeps the arithmetic exact.
        let c = k as f64 * 0.25;
        let v = distinct_grid(seed, rows, cols);
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        for dir in [Direction::Superlevel, Direction::Sublevel] {
            let a = sorted(persistence_of_values(rows, cols, &v, dir, 1).unwrap());
            let b = sorted(persistence_of_values(rows, cols, &shifted, dir, 1).unwrap());
            let a_shift: Vec<_> = a.iter().map(|&(d, x, y)| (d, x + c, y + c)).collect();
            prop_assert_eq!(a_shift, b);
        }
    }

    #[test]
    fn direction_duality(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let v = distinct_grid(seed, rows, cols);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let sup = sorted(persistence_of_values(rows, cols, &v, Direction::Superlevel, 1).unwrap());
        let sub = persistence_of_values(rows, cols, &neg, Direction::Sublevel, 1).unwrap();
        // Sublevel pair (b, d) of −f is the superlevel pair (−d, −b) of f.
        let mapped = sorted(sub.into_iter().map(|p| pif::PersistencePair { dim: p.dim, birth: -p.death, death: -p.birth }).collect());
        prop_assert_eq!(sup, mapped);
    }
}
