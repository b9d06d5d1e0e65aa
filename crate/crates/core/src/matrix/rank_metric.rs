//! Rank distance between matrices and the Singleton bound for codes of
//! full minimum rank distance.

use super::GroupMat;
use crate::error::{Error, Result};

/// Minimum of `rank(A_i - A_j)` over all pairs `i < j`.
pub fn rank_distance_spectrum<M: GroupMat>(set: &[M]) -> Result<usize> {
    if set.len() < 2 {
        return Err(Error::InvalidParameter("need at least two matrices".into()));
    }
    let mut best = usize::MAX;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            best = best.min(a.sub(b).rank());
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}

/// Whether `set ∪ {0}` can be a code of `L x L` matrices over GF(p) with
/// every pairwise difference of full rank.
///
/// Such a code has at most `p^L` codewords: two codewords agreeing in the
/// first row would differ by a singular matrix. The filter fails when the
/// size exceeds that bound or when some difference is rank deficient, and
/// passes otherwise (the empty set passes).
pub fn singleton_filter<M: GroupMat>(set: &[M], l: usize) -> bool {
    let Some(first) = set.first() else {
        return true;
    };
    let zero = first.scale(0);
    let mut with_zero: Vec<M> = set.to_vec();
    with_zero.push(zero);
    with_zero.sort();
    with_zero.dedup();
    let bound = (first.modulus() as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if with_zero.len() as u128 > bound {
        return false;
    }
    rank_distance_spectrum(&with_zero).map_or(true, |d| d == l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::matrix::{Gf2Mat, MatF};

    #[test]
    fn field_elements_are_at_full_distance() {
        let f = Field::gf(2, 2).unwrap();
        let set: Vec<MatF> = (0..3).map(|j| f.phi(f.exp(j))).collect();
        assert_eq!(rank_distance_spectrum(&set).unwrap(), 2);
        let id = MatF::identity(2, 2);
        assert_eq!(rank_distance_spectrum(&[id.clone(), id]).unwrap(), 0);
        assert!(rank_distance_spectrum::<MatF>(&[]).is_err());
    }

    #[test]
    fn singleton_extremal_gf32() {
        let f = Field::gf(2, 5).unwrap();
        let c = f.companion().to_gf2().unwrap();
        let powers: Vec<Gf2Mat> = (0..31).map(|j| c.pow(j)).collect();
        assert!(singleton_filter(&powers, 5));
        assert_eq!(rank_distance_spectrum(&powers).unwrap(), 5);
        // one more matrix can't fit
        let mut extra = powers.clone();
        extra.push(Gf2Mat::from_row_bits(5, &[1, 2, 4, 8, 17]).unwrap());
        assert!(!singleton_filter(&extra, 5));
        assert!(singleton_filter::<Gf2Mat>(&[], 5));
    }
}
