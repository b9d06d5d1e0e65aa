//! Machine-word number theory: primality, factoring, divisors and
//! multiplicative orders.
//!
//! Everything here works on `u64` with `u128` intermediates. Factoring uses
//! trial division by small primes followed by Brent's variant of Pollard rho.

use num_integer::Integer;

/// Exponents `e` for which `2^e - 1` is prime, complete up to 127.
pub const MERSENNE_EXPONENTS: [u32; 12] = [2, 3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127];

/// Largest exponent covered by [`MERSENNE_EXPONENTS`].
pub const MERSENNE_TABLE_LIMIT: u32 = 127;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `Some((p, k))` when `q = p^k` with `p` prime and `k >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let (p, _) = *factor(q).first()?;
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

fn pollard_brent(n: u64, seed: u64) -> u64 {
    let f = |x: u64| (mul_mod(x, x, n) + seed) % n;
    let mut y = seed % n;
    let m = 128u64;
    let mut g = 1u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    g
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let mut seed = 1;
    loop {
        let d = pollard_brent(n, seed);
        if d != n && d != 1 {
            split_into(d, out);
            split_into(n / d, out);
            return;
        }
        seed += 1;
    }
}

/// Prime factorization as `(prime, exponent)` pairs in ascending prime order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    if n <= 1 {
        return Vec::new();
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    split_into(n, &mut primes);
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor(n) {
        let base = divs.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            divs.extend(base.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Smallest `m >= 1` with `a^m = 1 (mod n)`, or `None` when `gcd(a, n) != 1`.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if a.gcd(&n) != 1 {
        return None;
    }
    let mut order = euler_phi(n);
    for (r, _) in factor(order) {
        while order.is_multiple_of(r) && pow_mod(a, order / r, n) == 1 {
            order /= r;
        }
    }
    Some(order)
}

/// Primes strictly below `n`.
pub fn primes_below(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i < n {
        if sieve[i] {
            let mut j = i * i;
            while j < n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| p.then_some(i as u64))
        .collect()
}

/// `Some(true)` when `2^e - 1` is prime, from the fixed exponent table.
pub fn mersenne_is_prime(e: u32) -> Option<bool> {
    (e <= MERSENNE_TABLE_LIMIT).then(|| MERSENNE_EXPONENTS.contains(&e))
}

/// `p^k` if it fits in a `u64`.
pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    p.checked_pow(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        let ps: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, primes_below(60));
        assert!(is_prime(524_287));
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(8191 * 131_071));
    }

    #[test]
    fn factor_and_divisors() {
        assert_eq!(factor(1023), vec![(3, 1), (11, 1), (31, 1)]);
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        let big = 2_147_483_647u64 * 8191;
        assert_eq!(factor(big), vec![(8191, 1), (2_147_483_647, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn orders() {
        // 2 mod 3,5,7,11,13,17,19 -> 2,4,3,10,12,8,18
        let want = [(3, 2), (5, 4), (7, 3), (11, 10), (13, 12), (17, 8), (19, 18)];
        for (p, o) in want {
            assert_eq!(multiplicative_order(2, p), Some(o));
        }
        assert_eq!(multiplicative_order(3, 9), None);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(7), Some((7, 1)));
    }

    #[test]
    fn mersenne_table_agrees_with_miller_rabin() {
        for e in 2..=63u32 {
            let m = (1u64 << e) - 1;
            assert_eq!(mersenne_is_prime(e), Some(is_prime(m)), "e = {e}");
        }
    }
}
