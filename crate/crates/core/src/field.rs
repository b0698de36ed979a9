//! Arithmetic in GF(2^n) for even `n = 2m`, polynomial basis.
//!
//! Elements are bit vectors packed in a `u32`: bit `i` is the coefficient of
//! `x^i`. Every field up to `n = 32` is supported by carry-less multiplication
//! with reduction; fields with `n <= 16` additionally carry log/antilog tables
//! built from a primitive element, which the exhaustive verifiers lean on.
//!
//! ```text
//! n = 4, modulus x^4 + x + 1 = 0b1_0011
//! 0b0010 * 0b1000 = x * x^3 = x^4 = x + 1 = 0b0011
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::{prime_factors, rem_euclid};

/// Largest supported half-degree `m` (so `n <= 32`).
pub const MAX_HALF_DEGREE: u32 = 16;

/// Log tables are built for `n` up to this degree (2^16 entries).
const TABLE_MAX_DEGREE: u32 = 16;

/// Low-weight irreducible moduli, indexed by `n / 2 - 1`. Trinomial
/// `x^n + x^k + 1` with the smallest `k` when one exists, otherwise the
/// pentanomial with lexicographically smallest middle exponents.
const REDUCTION_TABLE: [u64; 16] = [
    0b111,                    // n = 2:  x^2 + x + 1
    0b1_0011,                 // n = 4:  x^4 + x + 1
    0b100_0011,               // n = 6:  x^6 + x + 1
    0x11b,                    // n = 8:  x^8 + x^4 + x^3 + x + 1
    (1 << 10) | (1 << 3) | 1, // n = 10
    (1 << 12) | (1 << 3) | 1, // n = 12
    (1 << 14) | (1 << 5) | 1, // n = 14
    (1 << 16) | (1 << 5) | (1 << 3) | (1 << 1) | 1,
    (1 << 18) | (1 << 3) | 1,
    (1 << 20) | (1 << 3) | 1,
    (1 << 22) | (1 << 1) | 1,
    (1 << 24) | (1 << 4) | (1 << 3) | (1 << 1) | 1,
    (1 << 26) | (1 << 4) | (1 << 3) | (1 << 1) | 1,
    (1 << 28) | (1 << 1) | 1,
    (1 << 30) | (1 << 1) | 1,
    (1 << 32) | (1 << 7) | (1 << 3) | (1 << 2) | 1,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("half-degree m = {0} is outside the supported range 1..={MAX_HALF_DEGREE}")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#b} is not irreducible of degree {n}")]
    ReducibleModulus { n: u32, poly: u64 },
    #[error("0^e with e ≡ 0 (mod q-1) is undefined")]
    ZeroToZeroPower,
    #[error("0 has no multiplicative inverse")]
    ZeroInverse,
    #[error("{d} does not divide q - 1 = {q_minus_1}")]
    NotADivisor { d: u64, q_minus_1: u64 },
}

/// An element of GF(2^n), fully reduced.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

struct LogTables {
    log: Vec<u32>,
    // doubled so that exp[log a + log b] needs no reduction
    exp: Vec<u32>,
}

/// A binary field GF(2^n), `n = 2m`, together with its reduction polynomial.
#[derive(Clone)]
pub struct FieldSpec {
    m: u32,
    n: u32,
    reduction_poly: u64,
    primitive: FieldElement,
    trace_mask: u32,
    tables: Option<Arc<LogTables>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("m", &self.m)
            .field("n", &self.n)
            .field(
                "reduction_poly",
                &format_args!("{:#b}", self.reduction_poly),
            )
            .field("primitive", &self.primitive)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.reduction_poly == other.reduction_poly
    }
}

impl Eq for FieldSpec {}

/// Builds GF(2^{2m}) from the built-in modulus table.
pub fn make_field(m: u32) -> Result<FieldSpec, FieldError> {
    if m == 0 || m > MAX_HALF_DEGREE {
        return Err(FieldError::UnsupportedDegree(m));
    }
    FieldSpec::with_modulus(m, REDUCTION_TABLE[(m - 1) as usize])
}

impl FieldSpec {
    /// Builds GF(2^{2m}) modulo `reduction_poly`, which must be irreducible of
    /// degree exactly `2m`.
    pub fn with_modulus(m: u32, reduction_poly: u64) -> Result<FieldSpec, FieldError> {
        if m == 0 || m > MAX_HALF_DEGREE {
            return Err(FieldError::UnsupportedDegree(m));
        }
        let n = 2 * m;
        if gf2x::degree(reduction_poly) != Some(n) || !gf2x::is_irreducible(reduction_poly) {
            return Err(FieldError::ReducibleModulus {
                n,
                poly: reduction_poly,
            });
        }
        let mut field = FieldSpec {
            m,
            n,
            reduction_poly,
            primitive: FieldElement::ONE,
            trace_mask: 0,
            tables: None,
        };
        field.primitive = field.find_primitive();
        field.trace_mask = (0..n)
            .filter(|&i| field.trace_by_definition(FieldElement(1 << i)) == 1)
            .fold(0u32, |mask, i| mask | (1 << i));
        if n <= TABLE_MAX_DEGREE {
            field.tables = Some(Arc::new(field.build_tables()));
        }
        Ok(field)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn reduction_poly(&self) -> u64 {
        self.reduction_poly
    }

    /// Field size `q = 2^n`.
    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    /// `q - 1`, the order of the multiplicative group.
    pub fn group_order(&self) -> u64 {
        self.order() - 1
    }

    /// `2^m + 1`, the order of the unit circle.
    pub fn circle_order(&self) -> u64 {
        (1u64 << self.m) + 1
    }

    /// `2^m - 1`, the order of the multiplicative group of GF(2^m).
    pub fn subfield_group_order(&self) -> u64 {
        (1u64 << self.m) - 1
    }

    /// The primitive element found at construction (smallest bit pattern).
    pub fn primitive_element(&self) -> FieldElement {
        self.primitive
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        u64::from(a.0) < self.order()
    }

    /// Every element in increasing bit-pattern order, starting at 0.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Send {
        (0..self.order()).map(|v| FieldElement(v as u32))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => {
                if a.0 == 0 || b.0 == 0 {
                    FieldElement::ZERO
                } else {
                    FieldElement(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
                }
            }
            None => self.mul_carryless(a, b),
        }
    }

    /// Schoolbook carry-less product followed by long-division reduction.
    pub fn mul_carryless(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let product = gf2x::clmul(u64::from(a.0), u64::from(b.0));
        FieldElement(gf2x::rem(product, self.reduction_poly) as u32)
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// Least non-negative residue of `e` modulo `q - 1`.
    pub fn normalize_exponent(&self, e: i128) -> u64 {
        rem_euclid(e, self.group_order())
    }

    /// `a^e` for any integer `e`. Nonzero bases use `e mod (q-1)`; a zero base
    /// gives 0 unless `e ≡ 0`, which is rejected.
    pub fn pow(&self, a: FieldElement, e: i128) -> Result<FieldElement, FieldError> {
        let r = self.normalize_exponent(e);
        if a.is_zero() {
            return if r == 0 {
                Err(FieldError::ZeroToZeroPower)
            } else {
                Ok(FieldElement::ZERO)
            };
        }
        Ok(self.pow_residue(a, r))
    }

    /// `a^r` for a non-negative exponent assumed positive when `a = 0`.
    #[inline]
    pub fn pow_residue(&self, a: FieldElement, r: u64) -> FieldElement {
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let r = r % self.group_order();
        match &self.tables {
            Some(t) => {
                let idx = (u64::from(t.log[a.0 as usize]) * r) % self.group_order();
                FieldElement(t.exp[idx as usize])
            }
            None => self.pow_square_multiply(a, r),
        }
    }

    fn pow_square_multiply(&self, mut base: FieldElement, mut r: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        while r != 0 {
            if r & 1 == 1 {
                acc = self.mul_carryless(acc, base);
            }
            base = self.mul_carryless(base, base);
            r >>= 1;
        }
        acc
    }

    /// `a^{2^k}`.
    pub fn frobenius(&self, a: FieldElement, k: u32) -> FieldElement {
        let mut out = a;
        for _ in 0..(k % self.n) {
            out = self.square(out);
        }
        out
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow_residue(a, self.group_order() - 1))
    }

    /// Absolute trace `a + a^2 + ... + a^{2^{n-1}}`, as 0 or 1.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u8 {
        ((a.0 & self.trace_mask).count_ones() & 1) as u8
    }

    fn trace_by_definition(&self, a: FieldElement) -> u8 {
        let mut acc = FieldElement::ZERO;
        let mut power = a;
        for _ in 0..self.n {
            acc = self.add(acc, power);
            power = self.mul_carryless(power, power);
        }
        debug_assert!(acc.0 <= 1, "trace must land in GF(2)");
        acc.0 as u8
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<u64, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let mut order = self.group_order();
        for p in prime_factors(self.group_order()) {
            while order.is_multiple_of(p)
                && self.pow_square_multiply(a, order / p) == FieldElement::ONE
            {
                order /= p;
            }
        }
        Ok(order)
    }

    /// The cyclic subgroup of order `d`, listed as `g^0, g^1, ...` for the
    /// generator `g = primitive^{(q-1)/d}`.
    pub fn subgroup(&self, d: u64) -> Result<Vec<FieldElement>, FieldError> {
        let q_minus_1 = self.group_order();
        if d == 0 || !q_minus_1.is_multiple_of(d) {
            return Err(FieldError::NotADivisor { d, q_minus_1 });
        }
        let generator = self.pow_residue(self.primitive, q_minus_1 / d);
        let mut out = Vec::with_capacity(d as usize);
        let mut x = FieldElement::ONE;
        for _ in 0..d {
            out.push(x);
            x = self.mul(x, generator);
        }
        Ok(out)
    }

    fn find_primitive(&self) -> FieldElement {
        let q_minus_1 = self.group_order();
        let factors = prime_factors(q_minus_1);
        (2..self.order())
            .map(|v| FieldElement(v as u32))
            .find(|&c| {
                factors
                    .iter()
                    .all(|p| self.pow_square_multiply(c, q_minus_1 / p) != FieldElement::ONE)
            })
            .expect("the multiplicative group of a finite field is cyclic")
    }

    fn build_tables(&self) -> LogTables {
        let q_minus_1 = self.group_order() as usize;
        let mut log = vec![0u32; q_minus_1 + 1];
        let mut exp = vec![0u32; 2 * q_minus_1];
        let mut x = FieldElement::ONE;
        for k in 0..q_minus_1 {
            exp[k] = x.0;
            exp[k + q_minus_1] = x.0;
            log[x.0 as usize] = k as u32;
            x = self.mul_carryless(x, self.primitive);
        }
        LogTables { log, exp }
    }
}

/// Polynomials over GF(2) packed in a `u64`, degree at most 63.
pub mod gf2x {
    pub fn degree(p: u64) -> Option<u32> {
        if p == 0 {
            None
        } else {
            Some(63 - p.leading_zeros())
        }
    }

    /// Carry-less product; inputs must have degree sum below 64.
    pub fn clmul(a: u64, mut b: u64) -> u64 {
        debug_assert!(degree(a).unwrap_or(0) + degree(b).unwrap_or(0) < 64);
        let mut acc = 0u64;
        let mut shifted = a;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= shifted;
            }
            shifted <<= 1;
            b >>= 1;
        }
        acc
    }

    pub fn rem(mut a: u64, modulus: u64) -> u64 {
        let dm = degree(modulus).expect("nonzero modulus");
        while let Some(da) = degree(a) {
            if da < dm {
                break;
            }
            a ^= modulus << (da - dm);
        }
        a
    }

    pub fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let r = rem(a, b);
            a = b;
            b = r;
        }
        a
    }

    /// `x^{2^k} mod modulus`.
    fn x_pow_two_pow(k: u32, modulus: u64) -> u64 {
        let mut x = rem(0b10, modulus);
        for _ in 0..k {
            x = rem(clmul(x, x), modulus);
        }
        x
    }

    /// Rabin's test: `x^{2^n} ≡ x (mod p)` and `gcd(x^{2^{n/r}} - x, p) = 1`
    /// for every prime `r | n`. Degree must be at most 32.
    pub fn is_irreducible(p: u64) -> bool {
        let n = match degree(p) {
            Some(n) if (1..=32).contains(&n) => n,
            _ => return false,
        };
        if x_pow_two_pow(n, p) != rem(0b10, p) {
            return false;
        }
        crate::numtheory::prime_factors(u64::from(n))
            .into_iter()
            .all(|r| gcd(p, x_pow_two_pow(n / r as u32, p) ^ 0b10) == 1)
    }
}
