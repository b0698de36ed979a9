//! Integer helpers shared by the field, construction and inversion code.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModInverseError {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("{value} is not invertible modulo {modulus} (gcd = {gcd})")]
    NotInvertible { value: i128, modulus: u64, gcd: u64 },
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(|a|, b)` for a signed left operand.
pub fn gcd_signed(a: i128, b: u64) -> u64 {
    let a = a.unsigned_abs() % u128::from(b.max(1));
    gcd(a as u64, b)
}

/// Least non-negative residue of `a` modulo `modulus`.
pub fn rem_euclid(a: i128, modulus: u64) -> u64 {
    a.rem_euclid(i128::from(modulus)) as u64
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`.
pub fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let quotient = old_r / r;
        (old_r, r) = (r, old_r - quotient * r);
        (old_s, s) = (s, old_s - quotient * s);
        (old_t, t) = (t, old_t - quotient * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// The unique `b` in `[1, modulus - 1]` with `a*b ≡ 1 (mod modulus)`.
pub fn mod_inverse(a: i128, modulus: u64) -> Result<u64, ModInverseError> {
    if modulus < 2 {
        return Err(ModInverseError::BadModulus(modulus));
    }
    let reduced = rem_euclid(a, modulus);
    let (g, x, _) = extended_gcd(i128::from(reduced), i128::from(modulus));
    if g != 1 {
        return Err(ModInverseError::NotInvertible {
            value: a,
            modulus,
            gcd: g as u64,
        });
    }
    Ok(rem_euclid(x, modulus))
}

/// Distinct prime factors of `n`, ascending. Trial division; `n < 2^33` here.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
