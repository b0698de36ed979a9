//! All-ones permutation trinomials of Niho type from reciprocal fractions on
//! the unit circle.
//!
//! For `n = 2m`, `Q = 2^m + 1`, distinct `i, j >= 1` and any integer `u`, the
//! exponents
//!
//! ```text
//! d1 =   2^{i-1} - 2^{j-1} + u Q
//! d2 =   2^{i-1} + 2^{j-1} + (u - 2^{j-1}) Q
//! d3 = -(2^{i-1} + 2^{j-1}) + (u + 2^{i-1}) Q
//! ```
//!
//! give a permutation `x^{d1} + x^{d2} + x^{d3}` of GF(2^n) whenever
//! `gcd(d1, 2^n - 1) = 1` (C1) and `gcd(2^i - 2^j, Q) = 1` (C2). The
//! derivation goes through a handful of auxiliary integers (`t`, `L`, `L1`,
//! `L2`, `a`) which are kept on [`ExponentTriple`] so they can be checked
//! independently.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec, MAX_HALF_DEGREE};
use crate::numtheory::{gcd, gcd_signed, mod_inverse, rem_euclid};

/// Largest accepted `i` or `j`; keeps every raw exponent well inside `i128`.
pub const MAX_SHIFT: u32 = 64;
/// Largest accepted `|u|`.
pub const MAX_ABS_U: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("condition C1 failed: gcd(d1, 2^n - 1) = {gcd}")]
    ConditionC1Failed { gcd: u64 },
    #[error("condition C2 failed: gcd(2^|i-j| - 1, 2^m + 1) = {gcd}")]
    ConditionC2Failed { gcd: u64 },
    #[error("normalized exponent d{} is 0 modulo 2^n - 1", index + 1)]
    DegenerateZeroExponent { index: usize },
    #[error("exponent {0} is 0 modulo q - 1; constant terms are not allowed")]
    ZeroExponent(i128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TheoremParams {
    pub m: u32,
    pub i: u32,
    pub j: u32,
    pub u: i64,
}

/// Auxiliary integers from the reversed derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intermediates {
    /// `(J - I)^{-1} mod Q`, in `(0, Q)`.
    pub t: u64,
    /// `t J`.
    pub l: i128,
    /// The integer with `t J = t I + 1 + b Q`.
    pub b: i128,
    /// `(I + J) / 2 = 2^{i-1} + 2^{j-1}`.
    pub l1: i128,
    /// `(I - J) / 2 = 2^{i-1} - 2^{j-1}`.
    pub l2: i128,
    /// `(2t)^{-1} mod Q`, in `(0, Q)`.
    pub a: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub params: TheoremParams,
    /// Raw integer exponents before any reduction.
    pub raw: [i128; 3],
    /// Residues modulo `2^n - 1`.
    pub normalized: [u64; 3],
    pub intermediates: Intermediates,
    /// Two normalized exponents coincide, so the pair cancels.
    pub degenerate_collision: bool,
}

fn validate(m: u32, i: u32, j: u32, u: i64) -> Result<(), ConstructError> {
    if m == 0 || m > MAX_HALF_DEGREE {
        return Err(ConstructError::InvalidParameters(format!(
            "m = {m} outside 1..={MAX_HALF_DEGREE}"
        )));
    }
    if i == 0 || j == 0 || i > MAX_SHIFT || j > MAX_SHIFT {
        return Err(ConstructError::InvalidParameters(format!(
            "i = {i}, j = {j} must lie in 1..={MAX_SHIFT}"
        )));
    }
    if i == j {
        return Err(ConstructError::InvalidParameters(format!(
            "i and j must differ (both {i})"
        )));
    }
    if u.unsigned_abs() > MAX_ABS_U as u64 {
        return Err(ConstructError::InvalidParameters(format!(
            "|u| = {} exceeds {MAX_ABS_U}",
            u.unsigned_abs()
        )));
    }
    Ok(())
}

/// `(d1, d2, d3)` as integers.
pub fn raw_exponents(m: u32, i: u32, j: u32, u: i64) -> [i128; 3] {
    let q_circle = (1i128 << m) + 1;
    let hi = 1i128 << (i - 1);
    let hj = 1i128 << (j - 1);
    let u = i128::from(u);
    [
        hi - hj + u * q_circle,
        hi + hj + (u - hj) * q_circle,
        -(hi + hj) + (u + hi) * q_circle,
    ]
}

pub fn derive_exponents(m: u32, i: u32, j: u32, u: i64) -> Result<ExponentTriple, ConstructError> {
    validate(m, i, j, u)?;
    let q_minus_1 = (1u64 << (2 * m)) - 1;
    let q_circle = (1u64 << m) + 1;

    let raw = raw_exponents(m, i, j, u);
    let normalized = raw.map(|d| rem_euclid(d, q_minus_1));

    let c2 = c2_gcd(m, i, j);
    if c2 != 1 {
        return Err(ConstructError::ConditionC2Failed { gcd: c2 });
    }
    let c1 = gcd(normalized[0], q_minus_1);
    if c1 != 1 {
        return Err(ConstructError::ConditionC1Failed { gcd: c1 });
    }
    if let Some(index) = normalized.iter().position(|&d| d == 0) {
        return Err(ConstructError::DegenerateZeroExponent { index });
    }

    let big_i = 1i128 << i;
    let big_j = 1i128 << j;
    let t = mod_inverse(big_j - big_i, q_circle).expect("C2 makes J - I invertible mod Q");
    let l = i128::from(t) * big_j;
    let b = (l - i128::from(t) * big_i - 1) / i128::from(q_circle);
    let a = mod_inverse(2 * i128::from(t), q_circle).expect("Q is odd and t is a unit");
    let intermediates = Intermediates {
        t,
        l,
        b,
        l1: (big_i + big_j) / 2,
        l2: (big_i - big_j) / 2,
        a,
    };

    let [d1, d2, d3] = normalized;
    Ok(ExponentTriple {
        params: TheoremParams { m, i, j, u },
        raw,
        normalized,
        intermediates,
        degenerate_collision: d1 == d2 || d1 == d3 || d2 == d3,
    })
}

impl ExponentTriple {
    pub fn as_polynomial(&self) -> SparseTrinomial {
        SparseTrinomial {
            exponents: self.normalized,
            collided: self.degenerate_collision,
        }
    }

    /// `(r, h)` with `f(x) = x^r h(x^{2^m - 1})`: `r = d1` and
    /// `h(y) = 1 + y^{-2^{j-1}} + y^{2^{i-1}}`.
    pub fn subgroup_form(&self) -> (i128, Vec<i128>) {
        let TheoremParams { i, j, .. } = self.params;
        (
            i128::from(self.normalized[0]),
            vec![0, -(1i128 << (j - 1)), 1i128 << (i - 1)],
        )
    }

    /// Doubling-orbit canonical form of the normalized exponents.
    pub fn canonical(&self) -> Vec<u64> {
        canonicalize(&self.normalized, 2 * self.params.m)
    }
}

/// An all-ones sparse polynomial with exponents in `[1, q - 2]`. Repeated
/// exponents cancel in pairs when evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsePoly {
    exponents: Vec<u64>,
}

impl SparsePoly {
    pub fn new(field: &FieldSpec, exponents: &[i128]) -> Result<SparsePoly, ConstructError> {
        let exponents = exponents
            .iter()
            .map(|&e| match field.normalize_exponent(e) {
                0 => Err(ConstructError::ZeroExponent(e)),
                r => Ok(r),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SparsePoly { exponents })
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    #[inline]
    pub fn eval(&self, field: &FieldSpec, x: FieldElement) -> FieldElement {
        self.exponents.iter().fold(FieldElement::ZERO, |acc, &e| {
            field.add(acc, field.pow_residue(x, e))
        })
    }

    /// Sorted exponents left after cancelling equal pairs.
    pub fn effective_exponents(&self) -> Vec<u64> {
        let mut sorted = self.exponents.clone();
        sorted.sort_unstable();
        let mut out: Vec<u64> = Vec::new();
        for e in sorted {
            if out.last() == Some(&e) {
                out.pop();
            } else {
                out.push(e);
            }
        }
        out
    }

    pub fn has_collision(&self) -> bool {
        self.effective_exponents().len() != self.exponents.len()
    }
}

/// `x^{d1} + x^{d2} + x^{d3}` with normalized exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseTrinomial {
    pub exponents: [u64; 3],
    /// Set when two exponents coincide; evaluation then cancels that pair.
    pub collided: bool,
}

impl SparseTrinomial {
    #[inline]
    pub fn eval(&self, field: &FieldSpec, x: FieldElement) -> FieldElement {
        let [a, b, c] = self.exponents;
        let fa = field.pow_residue(x, a);
        let fb = field.pow_residue(x, b);
        let fc = field.pow_residue(x, c);
        field.add(field.add(fa, fb), fc)
    }

    pub fn to_sparse(&self) -> SparsePoly {
        SparsePoly {
            exponents: self.exponents.to_vec(),
        }
    }
}

pub fn as_polynomial(triple: &ExponentTriple) -> SparseTrinomial {
    triple.as_polynomial()
}

/// Smallest sorted tuple in the orbit of `exponents` under multiplication by
/// powers of 2 modulo `2^n - 1`. Frobenius-equivalent polynomials share it.
pub fn canonicalize(exponents: &[u64], n: u32) -> Vec<u64> {
    let q_minus_1 = (1u64 << n) - 1;
    let mut current: Vec<u64> = exponents.iter().map(|e| e % q_minus_1).collect();
    let mut best: Option<Vec<u64>> = None;
    for _ in 0..n {
        let mut sorted = current.clone();
        sorted.sort_unstable();
        if best.as_ref().is_none_or(|b| sorted < *b) {
            best = Some(sorted);
        }
        for e in current.iter_mut() {
            *e = (*e * 2) % q_minus_1;
        }
    }
    best.unwrap_or_default()
}

/// Outcome counts for a parameter grid. Every grid point lands in exactly one
/// bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub total: u64,
    /// Points with `i = j`, outside the construction's domain.
    pub diagonal: u64,
    pub yielded: u64,
    pub c1_failed: u64,
    pub c2_failed: u64,
    pub degenerate_zero: u64,
    pub degenerate_collision: u64,
}

impl EnumerationSummary {
    pub fn degenerate(&self) -> u64 {
        self.degenerate_zero + self.degenerate_collision
    }

    pub fn is_partition(&self) -> bool {
        self.diagonal + self.yielded + self.c1_failed + self.c2_failed + self.degenerate()
            == self.total
    }

    fn merge(mut self, other: EnumerationSummary) -> EnumerationSummary {
        self.total += other.total;
        self.diagonal += other.diagonal;
        self.yielded += other.yielded;
        self.c1_failed += other.c1_failed;
        self.c2_failed += other.c2_failed;
        self.degenerate_zero += other.degenerate_zero;
        self.degenerate_collision += other.degenerate_collision;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    /// Non-degenerate triples passing C1 and C2, in grid order `(i, j, u)`.
    pub triples: Vec<ExponentTriple>,
    pub summary: EnumerationSummary,
}

/// `i, j ∈ [1, 2m]`, `u ∈ [0, 2^m]`.
pub fn default_grid(
    m: u32,
) -> (
    RangeInclusive<u32>,
    RangeInclusive<u32>,
    RangeInclusive<i64>,
) {
    (1..=2 * m, 1..=2 * m, 0..=(1i64 << m))
}

pub fn enumerate_triples(
    m: u32,
    i_range: RangeInclusive<u32>,
    j_range: RangeInclusive<u32>,
    u_range: RangeInclusive<i64>,
) -> Enumeration {
    let grid: Vec<(u32, u32, i64)> = i_range
        .flat_map(|i| {
            let u_range = u_range.clone();
            j_range
                .clone()
                .flat_map(move |j| u_range.clone().map(move |u| (i, j, u)))
        })
        .collect();

    let outcomes: Vec<(Option<ExponentTriple>, EnumerationSummary)> = grid
        .par_iter()
        .map(|&(i, j, u)| {
            let mut s = EnumerationSummary {
                total: 1,
                ..Default::default()
            };
            if i == j {
                s.diagonal = 1;
                return (None, s);
            }
            match derive_exponents(m, i, j, u) {
                Ok(t) if t.degenerate_collision => {
                    s.degenerate_collision = 1;
                    (None, s)
                }
                Ok(t) => {
                    s.yielded = 1;
                    (Some(t), s)
                }
                Err(ConstructError::ConditionC1Failed { .. }) => {
                    s.c1_failed = 1;
                    (None, s)
                }
                Err(ConstructError::ConditionC2Failed { .. }) => {
                    s.c2_failed = 1;
                    (None, s)
                }
                Err(ConstructError::DegenerateZeroExponent { .. }) => {
                    s.degenerate_zero = 1;
                    (None, s)
                }
                // out-of-range parameters count as degenerate grid points
                Err(_) => {
                    s.degenerate_zero = 1;
                    (None, s)
                }
            }
        })
        .collect();

    let mut triples = Vec::new();
    let mut summary = EnumerationSummary::default();
    for (t, s) in outcomes {
        summary = summary.merge(s);
        triples.extend(t);
    }
    Enumeration { triples, summary }
}

/// Whether all exponents agree modulo `2^m - 1`.
pub fn is_niho(exponents: &[u64], m: u32) -> bool {
    let modulus = (1u64 << m) - 1;
    exponents
        .windows(2)
        .all(|w| w[0] % modulus == w[1] % modulus)
}

/// C2 as computed: `gcd(2^|i-j| - 1, 2^m + 1)`.
pub fn c2_gcd(m: u32, i: u32, j: u32) -> u64 {
    gcd((1u64 << i.abs_diff(j)) - 1, (1u64 << m) + 1)
}

/// C2 in the form `gcd(2^i - 2^j, 2^m + 1)`.
pub fn c2_direct(m: u32, i: u32, j: u32) -> u64 {
    gcd_signed((1i128 << i) - (1i128 << j), (1u64 << m) + 1)
}
