mod common;

use common::{exact_with_index, index, pseudo_core_oracle, Q, QMat};
use pcore::geninv::{self, pseudo_core};
use pcore::matrix::relative_distance;
use pcore::TolerancePolicy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_on_the_fixed_pair() {
    let a = QMat::from_ints(2, 2, &[(0, 1), (0, 0), (0, 0), (0, 0)]);
    let b = QMat::from_ints(2, 2, &[(0, 0), (0, 0), (1, 0), (0, 0)]);
    assert_eq!(pseudo_core_oracle(&a), QMat::from_ints(2, 2, &[(0, -1), (0, 0), (0, 0), (0, 0)]));
    assert!(pseudo_core_oracle(&b).is_zero());

    let s = QMat {
        rows: 2,
        cols: 2,
        e: a.e.iter().zip(&b.e).map(|(x, y)| x + y).collect(),
    };
    let half = |re: i64, im: i64| Q::ratio((re, 2), (im, 2));
    let expected = QMat {
        rows: 2,
        cols: 2,
        e: vec![half(0, -1), half(1, 0), half(-1, 0), half(0, -1)],
    };
    assert_eq!(pseudo_core_oracle(&s), expected);
}

#[test]
fn oracle_small_cases() {
    // Jordan block of order 2: index 2, inverse 0.
    let n = QMat::from_ints(2, 2, &[(0, 0), (1, 0), (0, 0), (0, 0)]);
    assert_eq!(index(&n), 2);
    assert!(pseudo_core_oracle(&n).is_zero());
    // [[1,1],[0,0]] is idempotent; its inverse is the projector onto its range.
    let e = QMat::from_ints(2, 2, &[(1, 0), (1, 0), (0, 0), (0, 0)]);
    assert_eq!(index(&e), 1);
    assert_eq!(pseudo_core_oracle(&e), QMat::from_ints(2, 2, &[(1, 0), (0, 0), (0, 0), (0, 0)]));
}

#[test]
fn exact_generator_hits_requested_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=4 {
        for k in 0..=n.min(3) {
            let a = exact_with_index(&mut rng, n, k);
            assert_eq!(index(&a), k, "n={n} k={k}");
            let tol = TolerancePolicy::default();
            assert_eq!(geninv::index(&a.to_float(), &tol).unwrap(), k);
        }
    }
}

#[test]
fn library_matches_oracle() {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..24 {
        let n = 2 + trial % 3;
        let k = (trial / 3) % (n.min(3) + 1);
        let a = exact_with_index(&mut rng, n, k);
        let exact = pseudo_core_oracle(&a).to_float();
        let got = pseudo_core(&a.to_float(), &tol).unwrap().inverse;
        let d = relative_distance(&got, &exact).unwrap();
        assert!(d < 1e-8, "trial {trial}: n={n} k={k} distance {d:e}");
    }
}
