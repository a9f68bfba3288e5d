//! Word-sized modular helpers. Every modulus handled here is a prime power
//! bounded by [`MAX_MODULUS`], so products fit comfortably in `u128`.

/// Upper bound for `p^precision`.
pub const MAX_MODULUS: u64 = 1 << 62;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn neg_mod(a: u64, m: u64) -> u64 {
    let a = a % m;
    if a == 0 {
        0
    } else {
        m - a
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// `p^k`, or `None` when it would exceed [`MAX_MODULUS`].
pub fn prime_power(p: u64, k: u32) -> Option<u64> {
    let v = p.checked_pow(k)?;
    (v <= MAX_MODULUS).then_some(v)
}

/// Inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Largest `t` with `p^t | n`; `n` must be nonzero.
pub fn val_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut t = 0;
    while n.is_multiple_of(p) {
        n /= p;
        t += 1;
    }
    t
}

/// Euler's criterion. `a` must be coprime to the odd prime `p`.
pub fn is_residue(a: u64, p: u64) -> bool {
    pow_mod(a, (p - 1) / 2, p) == 1
}

/// Smallest positive integer that is a quadratic non-residue modulo the odd prime `p`.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| !is_residue(n, p)).expect("odd prime has a non-residue")
}
