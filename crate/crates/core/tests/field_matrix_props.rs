use lnc_core::field::{make_field, Field};
use lnc_core::matrix::{singleton_filter, Gf2Mat, GroupMat, MatF};
use proptest::prelude::*;

/// Primitive-polynomial oracle: x has multiplicative order exactly p^k - 1
/// modulo f, computed by repeated multiplication of coefficient vectors.
fn x_order(p: u64, f: &[u64]) -> u64 {
    let k = f.len() - 1;
    let mut v = vec![0u64; k];
    v[0] = 1;
    let one = v.clone();
    let mut n = 0;
    loop {
        // multiply by x and reduce by the monic f
        let top = v[k - 1];
        for i in (1..k).rev() {
            v[i] = (v[i - 1] + p - top * f[i] % p) % p;
        }
        v[0] = (p - top * f[0] % p) % p;
        n += 1;
        if v == one || n > p.pow(k as u32) {
            return n;
        }
    }
}

#[test]
fn chosen_polynomial_is_first_primitive_in_order() {
    for (p, k) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2), (7, 2)] {
        let spec = make_field(p, k).unwrap();
        let q = p.pow(k);
        assert_eq!(x_order(p, &spec.poly), q - 1, "GF({p}^{k})");
        // no smaller candidate (low-degree coefficient most significant) is primitive
        let count = p.pow(k);
        let chosen: u64 = spec.poly[..k as usize].iter().fold(0, |acc, &c| acc * p + c);
        for code in 0..chosen {
            let mut coeffs: Vec<u64> = (0..k).rev().map(|i| code / p.pow(i) % p).collect();
            coeffs.push(1);
            if coeffs[0] != 0 {
                assert_ne!(x_order(p, &coeffs), q - 1, "smaller primitive {coeffs:?}");
            }
        }
        assert!(chosen < count);
    }
}

#[test]
fn small_field_examples() {
    let f4 = Field::gf(2, 2).unwrap();
    let g = f4.gamma();
    assert_eq!(f4.phi(g), MatF::from_rows(2, &[vec![0, 1], vec![1, 1]]).unwrap());
    assert_eq!(f4.mul(g, g), f4.add(g, 1));
    let f9 = Field::gf(3, 2).unwrap();
    assert_eq!(f9.elements().count(), 9);
}

fn fields() -> impl Strategy<Value = (u64, u32)> {
    prop_oneof![Just((2, 1)), Just((2, 3)), Just((2, 4)), Just((3, 2)), Just((5, 1)), Just((5, 2)), Just((7, 1))]
}

proptest! {
    #[test]
    fn field_axioms((p, k) in fields(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let f = Field::gf(p, k).unwrap();
        let q = f.order();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            prop_assert_eq!(f.pow(a, q - 1), 1);
        }
    }

    #[test]
    fn phi_is_a_ring_homomorphism((p, k) in fields(), a in 0u64..1000, b in 0u64..1000) {
        let f = Field::gf(p, k).unwrap();
        let q = f.order();
        let (a, b) = (a % q, b % q);
        prop_assert_eq!(f.phi(f.add(a, b)), f.phi(a).add(&f.phi(b)));
        prop_assert_eq!(f.phi(f.mul(a, b)), f.phi(a).mul(&f.phi(b)));
        prop_assert_eq!(f.phi(a).rank(), if a == 0 { 0 } else { k as usize });
        // row 0 of Φ(a) is the coordinate vector of a
        let row: Vec<u64> = f.phi(a).row(0).iter().map(|&x| x as u64).collect();
        prop_assert_eq!(row, f.coeffs(a));
    }

    #[test]
    fn dense_and_packed_agree(rows_a in proptest::collection::vec(0u8..32, 5), rows_b in proptest::collection::vec(0u8..32, 5)) {
        let a = Gf2Mat::from_row_bits(5, &rows_a).unwrap();
        let b = Gf2Mat::from_row_bits(5, &rows_b).unwrap();
        let (da, db) = (a.to_matf(), b.to_matf());
        prop_assert_eq!(a.mul(&b).to_matf(), da.mul(&db));
        prop_assert_eq!(GroupMat::add(&a, &b).to_matf(), da.add(&db));
        prop_assert_eq!(a.rank(), da.rank());
        prop_assert!(a.mul(&b).rank() <= a.rank().min(b.rank()));
        if let Ok(inv) = da.inverse() {
            prop_assert_eq!(inv.mul(&da), MatF::identity(2, 5));
            prop_assert_eq!(a.inverse().unwrap().to_matf(), inv);
        } else {
            prop_assert!(a.rank() < 5);
        }
    }

    #[test]
    fn rank_is_transpose_invariant(entries in proptest::collection::vec(0u32..7, 12)) {
        let m = MatF::from_vec(7, 3, 4, entries).unwrap();
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }
}

#[test]
fn singleton_bound_on_companion_powers() {
    let f = Field::gf(2, 5).unwrap();
    let c = f.companion();
    let powers: Vec<MatF> = (0..31).map(|i| c.pow(i)).collect();
    // with 0 these are 32 codewords, exactly the bound
    assert!(singleton_filter(&powers, 5));
    let mut extra = powers.clone();
    extra.push(MatF::from_fn(2, 5, 5, |i, j| (i == 0 && j == 0) as u32));
    assert!(!singleton_filter(&extra, 5));
    assert!(singleton_filter::<MatF>(&[], 5));
}
