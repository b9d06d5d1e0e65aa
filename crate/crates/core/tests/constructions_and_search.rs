use lnc_core::constructions::{
    mersenne_report, prop4_build, prop4_params, prop4_spotcheck, scaled_prop4_tuple, thm5_params, BigSummary,
};
use lnc_core::search::{swirl_full_search, swirl_prefix_search, SwirlCheckpoint};
use lnc_core::solvability::{lemma1_check, Violation};
use lnc_core::Budget;
use num_bigint::BigUint;

fn mersenne_prime_oracle(e: u32) -> bool {
    let n = (1u64 << e) - 1;
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

#[test]
fn mersenne_splits_agree_with_trial_division() {
    let exps: Vec<u32> = (2..=31).collect();
    for entry in mersenne_report(&exps) {
        let e = entry.exponent;
        assert_eq!(entry.mersenne_prime, Some(mersenne_prime_oracle(e)), "2^{e} - 1");
        if let Some((a, b)) = entry.split {
            assert_eq!(a + b, e);
            assert!(!mersenne_prime_oracle(a) && !mersenne_prime_oracle(b));
        }
        if entry.mersenne_prime == Some(true) && e > 7 {
            assert!(entry.split.is_some(), "prime exponent {e} should split");
        }
    }
    let r = mersenne_report(&[13]);
    assert_eq!(r[0].split, Some((4, 9)));
}

#[test]
fn degree_grows_with_l() {
    for l in [3, 4, 5, 10, 12] {
        let p = prop4_params(l, 484).unwrap();
        let n = (BigUint::from(1u32) << (6 * l + 1)) - 1u32;
        assert_eq!(p.degree, (&n + 21u32) / 22u32);
        assert!(BigUint::from(p.m1) * &p.m2 > p.degree);
    }
    // 2^67 - 1 does not fit a machine word, so its divisors are not enumerated
    let big = prop4_build(11, 484).unwrap();
    assert!(!big.certificate.complete && !big.certificate.unsolvable);
    // the second block would need GF(2^64)
    assert!(prop4_build(12, 484).unwrap_err().is_budget());
}

#[test]
fn prime_dimension_certificate() {
    let build = prop4_build(10, 484).unwrap();
    assert_eq!(build.params.dim, 61);
    assert!(build.certificate.complete);
    let s = prop4_spotcheck(&build, 10, 10, 1);
    assert_eq!(s.pairs_full_rank, 10);
    assert_eq!(s.shared_index_rank, 52);
}

#[test]
fn big_summary_keeps_low_digits() {
    let n = BigUint::from(10u32).pow(400) + 7u32;
    let s = BigSummary::of(&n);
    assert!(s.decimal.is_none());
    assert_eq!(s.low_digits, "7");
    assert_eq!(s.bits, n.bits());
}

#[test]
fn untwisted_analog_hits_the_identity() {
    let t = scaled_prop4_tuple(4, 3, false).unwrap();
    let v = lemma1_check(&t, &Budget::default()).unwrap();
    assert!(matches!(v.violation, Some(Violation::Product { .. })), "{v:?}");
}

#[test]
fn prime_parameters_for_five_and_seven() {
    for p in [5u64, 7] {
        let params = thm5_params(p).unwrap();
        assert_eq!(params.a, p * p + p + 1);
        assert!(!params.primes.contains(&p));
        assert!(params.m.bits() > 64);
    }
}

#[test]
fn swirl_resume_after_interruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swirl.json");
    let b = Budget::default();
    // a fake partial state: only partition 0 done
    let full = swirl_full_search(6, 3, &b, None).unwrap();
    let done = swirl_full_search(6, 3, &b, Some(&path)).unwrap();
    assert_eq!(full, done);
    let mut state = SwirlCheckpoint::load(&path).unwrap();
    state.completed.retain(|&k, _| k == 0);
    state.save(&path).unwrap();
    let resumed = swirl_full_search(6, 3, &b, Some(&path)).unwrap();
    assert_eq!(resumed, full);
}

#[test]
fn prefix_search_is_reproducible() {
    let b = Budget::default();
    let (a, ta) = swirl_prefix_search(3, 3, &b).unwrap();
    let (c, tc) = swirl_prefix_search(3, 3, &b).unwrap();
    assert_eq!(a, c);
    assert_eq!(ta, tc);
    assert_eq!(ta.len(), 2304);
}
