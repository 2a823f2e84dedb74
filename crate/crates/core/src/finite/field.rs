//! Arithmetic in the prime field `F_q`, `q < 2^31`.

#[inline]
pub fn reduce(v: i64, q: u64) -> u32 {
    v.rem_euclid(q as i64) as u32
}

#[inline]
pub fn add(a: u32, b: u32, q: u64) -> u32 {
    ((a as u64 + b as u64) % q) as u32
}

#[inline]
pub fn sub(a: u32, b: u32, q: u64) -> u32 {
    ((a as u64 + q - b as u64) % q) as u32
}

#[inline]
pub fn mul(a: u32, b: u32, q: u64) -> u32 {
    ((a as u64 * b as u64) % q) as u32
}

pub fn pow(mut base: u32, mut exp: u64, q: u64) -> u32 {
    let mut acc = 1u32 % q as u32;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, q);
        }
        base = mul(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero element by Fermat.
pub fn inv(a: u32, q: u64) -> u32 {
    debug_assert!(!(a as u64).is_multiple_of(q), "zero has no inverse");
    pow(a, q - 2, q)
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
