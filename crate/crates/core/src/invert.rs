//! Compositional inverses.
//!
//! A permutation written as `f(x) = x^r h(x^s)` with `s | q - 1` has inverse
//!
//! ```text
//! f^{-1}(x) = (x^{q-s} h(l(x^s))^{s-1})^{r'} l(x^s)
//! ```
//!
//! where `r r' ≡ 1 (mod q - 1)` and `l` inverts `x ↦ x^r h(x)^s` on
//! `μ_{(q-1)/s}`. For the trinomials with `i = j + m - 1` the map on the unit
//! circle is a monomial and `l(x) = x^{r1 r2}` in closed form.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::construct::{derive_exponents, ConstructError, ExponentTriple};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::numtheory::{gcd, gcd_signed};
pub use crate::numtheory::{mod_inverse, ModInverseError};
use crate::unit_circle::UnitCircle;
use crate::verify::{permutes_via_subgroup, VerifyError, Witness};

/// Round trips are exhaustive up to this degree, sampled above it.
pub const MAX_EXHAUSTIVE_ROUNDTRIP_DEGREE: u32 = 20;
pub const ROUNDTRIP_SAMPLES: usize = 10_000;
pub const ROUNDTRIP_SEED: u64 = 0x5eed_1e55;
/// Dense interpolation costs `q^2` multiplications.
pub const MAX_INTERPOLATION_DEGREE: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvertError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(
        "gcd(2^(m-1) - 1, 2^m + 1) = {gcd} for m = {m}, so i = j + m - 1 fails C2 \
         (the gcd is 3 whenever m is odd)"
    )]
    CircleCondition { m: u32, gcd: u64 },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("no u in 0..={max_u} gives a usable triple for m = {m}, j = {j}")]
    NoValidU { m: u32, j: u32, max_u: i64 },
    #[error("map is not a bijection of the subgroup: {0}")]
    NotABijection(String),
    #[error("s = {s} does not divide q - 1 = {q_minus_1}")]
    SDoesNotDivide { s: u64, q_minus_1: u64 },
    #[error("gcd(r, q - 1) = {gcd} for r = {r}")]
    RNotCoprime { r: i128, gcd: u64 },
    #[error("h has no constant term, so h(0) = 0")]
    MissingConstantTerm,
    #[error("x^r h(x^s) is not a permutation: {0:?}")]
    NotAPermutation(Option<Witness>),
    #[error("field of degree {n} is too large (max {max})")]
    DomainTooLarge { n: u32, max: u32 },
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Parameters of the closed-form inverse for `i = j + m - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InverseParams {
    pub m: u32,
    pub i: u32,
    pub j: u32,
    pub u: i64,
    /// `Q = 2^m + 1`.
    pub q_circle: u64,
    /// `r1 2^{m-1} ≡ 1 (mod Q)`.
    pub r1: u64,
    /// `r2 2^{j-1} ≡ 1 (mod Q)`.
    pub r2: u64,
    /// `r1 r2 mod Q`: the inverse of `g` on `U` is `x^{r1 r2}`.
    pub g_inverse_exponent: u64,
    /// `r3 d1 ≡ 1 (mod 2^{2m} - 1)`.
    pub r3: u64,
    /// `r r' ≡ 1 (mod q - 1)` with `r = d1`; equal to `r3`.
    pub r_prime: u64,
    /// `s = 2^m - 1`.
    pub s: u64,
    pub triple: ExponentTriple,
}

fn pow2_mod(k: u32, modulus: u64) -> u64 {
    (0..k).fold(1 % modulus, |acc, _| (acc * 2) % modulus)
}

/// Closed-form inverse data for the trinomial with `i = j + m - 1`.
///
/// With `u = None` the smallest `u ∈ [0, 2^m]` giving a non-degenerate triple
/// that passes C1 is used.
pub fn inverse_params_special(
    m: u32,
    j: u32,
    u: Option<i64>,
) -> Result<InverseParams, InvertError> {
    if !(2..=crate::field::MAX_HALF_DEGREE).contains(&m) {
        return Err(InvertError::InvalidParameters(format!(
            "m = {m} outside 2..={}",
            crate::field::MAX_HALF_DEGREE
        )));
    }
    if j == 0 {
        return Err(InvertError::InvalidParameters(
            "j must be at least 1".into(),
        ));
    }
    let i = j + m - 1;
    let q_circle = (1u64 << m) + 1;
    let g = gcd((1u64 << (m - 1)) - 1, q_circle);
    if g != 1 {
        return Err(InvertError::CircleCondition { m, gcd: g });
    }
    let triple = match u {
        Some(u) => derive_exponents(m, i, j, u)?,
        None => {
            let max_u = 1i64 << m;
            (0..=max_u)
                .filter_map(|u| derive_exponents(m, i, j, u).ok())
                .find(|t| !t.degenerate_collision)
                .ok_or(InvertError::NoValidU { m, j, max_u })?
        }
    };
    let q_minus_1 = (1u64 << (2 * m)) - 1;
    let r1 = mod_inverse(i128::from(pow2_mod(m - 1, q_circle)), q_circle)
        .expect("powers of 2 are units modulo an odd number");
    let r2 = mod_inverse(i128::from(pow2_mod(j - 1, q_circle)), q_circle)
        .expect("powers of 2 are units modulo an odd number");
    let r3 = mod_inverse(i128::from(triple.normalized[0]), q_minus_1).expect("C1 makes d1 a unit");
    Ok(InverseParams {
        m,
        i,
        j,
        u: triple.params.u,
        q_circle,
        r1,
        r2,
        g_inverse_exponent: (r1 * r2) % q_circle,
        r3,
        r_prime: r3,
        s: (1u64 << m) - 1,
        triple,
    })
}

impl InverseParams {
    /// Exponents of `h(y) = 1 + y^{-2^{j-1}} + y^{2^{i-1}}`.
    pub fn h_exponents(&self) -> Vec<i128> {
        self.triple.subgroup_form().1
    }

    /// `g(x) = x^{d1} h(x)^{2^m - 1}` on `U`.
    pub fn g_on_circle(&self, circle: &UnitCircle, x: FieldElement) -> FieldElement {
        let field = circle.field();
        let hx = eval_all_ones(field, &normalize_all(field, &self.h_exponents()), x);
        field.mul(
            field.pow_residue(x, self.triple.normalized[0]),
            field.pow_residue(hx, self.s),
        )
    }

    /// `x^{r1 r2}` on `U`.
    pub fn g_inverse_on_circle(&self, circle: &UnitCircle, x: FieldElement) -> FieldElement {
        circle.pow(x, i128::from(self.g_inverse_exponent))
    }

    /// Full-field inverse of the trinomial with `l = x^{r1 r2}`.
    pub fn full_inverse<'f>(
        &self,
        field: &'f FieldSpec,
    ) -> Result<ComposedInverse<'f, impl Fn(FieldElement) -> FieldElement + Sync + 'f>, InvertError>
    {
        let e = self.g_inverse_exponent;
        let (r, h) = self.triple.subgroup_form();
        compose_inverse(
            field,
            &CompositionSpec {
                r,
                h_exponents: h,
                s: self.s,
            },
            move |y| field.pow_residue(y, e),
        )
    }
}

fn normalize_all(field: &FieldSpec, exponents: &[i128]) -> Vec<u64> {
    exponents
        .iter()
        .map(|&e| field.normalize_exponent(e))
        .collect()
}

/// `Σ x^{e_k}` for a nonzero `x`.
fn eval_all_ones(field: &FieldSpec, residues: &[u64], x: FieldElement) -> FieldElement {
    residues.iter().fold(FieldElement::ZERO, |acc, &e| {
        field.add(acc, field.pow_residue(x, e))
    })
}

/// Lookup table inverting a bijection of a subgroup.
#[derive(Debug, Clone)]
pub struct SubgroupInverse {
    table: HashMap<FieldElement, FieldElement>,
}

impl SubgroupInverse {
    pub fn apply(&self, y: FieldElement) -> Option<FieldElement> {
        self.table.get(&y).copied()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Tabulates `g(u) ↦ u` over `U` after checking that `g` is a bijection of `U`.
pub fn inverse_on_subgroup_bruteforce<G>(
    circle: &UnitCircle,
    g: G,
) -> Result<SubgroupInverse, InvertError>
where
    G: Fn(FieldElement) -> FieldElement,
{
    let mut table = HashMap::with_capacity(circle.elements().len());
    for &x in circle.elements() {
        let y = g(x);
        if !circle.contains(y) {
            return Err(InvertError::NotABijection(format!(
                "g({x}) = {y} is off the subgroup"
            )));
        }
        if let Some(prev) = table.insert(y, x) {
            return Err(InvertError::NotABijection(format!(
                "g({prev}) = g({x}) = {y}"
            )));
        }
    }
    Ok(SubgroupInverse { table })
}

/// `f(x) = x^r h(x^s)` with an all-ones `h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositionSpec {
    pub r: i128,
    pub h_exponents: Vec<i128>,
    pub s: u64,
}

/// Pointwise evaluator for `f^{-1}`.
pub struct ComposedInverse<'f, L> {
    field: &'f FieldSpec,
    r_prime: u64,
    s: u64,
    alpha_exponent: u64,
    h: Vec<u64>,
    l: L,
}

impl<L> ComposedInverse<'_, L>
where
    L: Fn(FieldElement) -> FieldElement,
{
    pub fn r_prime(&self) -> u64 {
        self.r_prime
    }

    pub fn eval(&self, x: FieldElement) -> FieldElement {
        if x.is_zero() {
            return FieldElement::ZERO;
        }
        let f = self.field;
        let lb = (self.l)(f.pow_residue(x, self.s));
        let hv = eval_all_ones(f, &self.h, lb);
        let hv_pow = if self.s == 1 {
            FieldElement::ONE
        } else {
            f.pow_residue(hv, self.s - 1)
        };
        let a = f.mul(f.pow_residue(x, self.alpha_exponent), hv_pow);
        f.mul(f.pow_residue(a, self.r_prime), lb)
    }
}

/// Builds the inverse of `x^r h(x^s)` from an inverse `l` of
/// `x ↦ x^r h(x)^s` on `μ_{(q-1)/s}`.
pub fn compose_inverse<'f, L>(
    field: &'f FieldSpec,
    spec: &CompositionSpec,
    l: L,
) -> Result<ComposedInverse<'f, L>, InvertError>
where
    L: Fn(FieldElement) -> FieldElement,
{
    let q_minus_1 = field.group_order();
    if spec.s == 0 || !q_minus_1.is_multiple_of(spec.s) {
        return Err(InvertError::SDoesNotDivide {
            s: spec.s,
            q_minus_1,
        });
    }
    let g = gcd_signed(spec.r, q_minus_1);
    if g != 1 {
        return Err(InvertError::RNotCoprime { r: spec.r, gcd: g });
    }
    if spec.h_exponents.iter().filter(|&&e| e == 0).count() % 2 == 0 {
        return Err(InvertError::MissingConstantTerm);
    }
    let report = permutes_via_subgroup(field, spec.r, &spec.h_exponents, q_minus_1 / spec.s)?;
    if !report.verdict {
        return Err(InvertError::NotAPermutation(report.witness));
    }
    let r_prime = mod_inverse(spec.r, q_minus_1).expect("coprimality checked above");
    Ok(ComposedInverse {
        field,
        r_prime,
        s: spec.s,
        alpha_exponent: field.normalize_exponent(i128::from(field.order()) - i128::from(spec.s)),
        h: normalize_all(field, &spec.h_exponents),
        l,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripFailure {
    pub x: FieldElement,
    pub f_of_finv: FieldElement,
    pub finv_of_f: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub verdict: bool,
    pub exhaustive: bool,
    pub points_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RoundtripFailure>,
}

/// Checks `f(finv(x)) = x` and `finv(f(x)) = x` on the whole field for
/// `n ≤ 20`, otherwise on 0, 1 and a seeded random sample.
pub fn verify_roundtrip<F, G>(field: &FieldSpec, f: F, finv: G) -> RoundtripReport
where
    F: Fn(FieldElement) -> FieldElement + Sync,
    G: Fn(FieldElement) -> FieldElement + Sync,
{
    let check = |x: FieldElement| {
        let f_of_finv = f(finv(x));
        let finv_of_f = finv(f(x));
        (f_of_finv != x || finv_of_f != x).then_some(RoundtripFailure {
            x,
            f_of_finv,
            finv_of_f,
        })
    };
    let exhaustive = field.n() <= MAX_EXHAUSTIVE_ROUNDTRIP_DEGREE;
    let points: Vec<u32> = if exhaustive {
        (0..field.order() as u32).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(ROUNDTRIP_SEED);
        let top = field.order() as u32 - 1;
        [0, 1]
            .into_iter()
            .chain((0..ROUNDTRIP_SAMPLES).map(|_| rng.random_range(2..=top)))
            .collect()
    };
    let witness = points
        .par_iter()
        .map(|&v| check(FieldElement(v)))
        .find_first(Option::is_some)
        .flatten();
    RoundtripReport {
        verdict: witness.is_none(),
        exhaustive,
        points_checked: points.len() as u64,
        witness,
    }
}

/// Coefficients `c_0 .. c_{q-1}` of the unique polynomial of degree below `q`
/// agreeing with `f` on the field.
pub fn interpolate_dense<F>(field: &FieldSpec, f: F) -> Result<Vec<FieldElement>, InvertError>
where
    F: Fn(FieldElement) -> FieldElement + Sync,
{
    if field.n() > MAX_INTERPOLATION_DEGREE {
        return Err(InvertError::DomainTooLarge {
            n: field.n(),
            max: MAX_INTERPOLATION_DEGREE,
        });
    }
    let q_minus_1 = field.group_order();
    let values: Vec<FieldElement> = field.elements().map(&f).collect();
    // f(X) = Σ_a f(a) (1 - (X - a)^{q-1}); in characteristic 2 every sign is +
    let mut coeffs: Vec<FieldElement> = (1..q_minus_1)
        .into_par_iter()
        .map(|k| {
            field.elements().skip(1).fold(FieldElement::ZERO, |acc, a| {
                let term = field.mul(values[a.0 as usize], field.pow_residue(a, q_minus_1 - k));
                field.add(acc, term)
            })
        })
        .collect();
    coeffs.insert(0, values[0]);
    coeffs.push(
        values
            .iter()
            .fold(FieldElement::ZERO, |acc, &v| field.add(acc, v)),
    );
    Ok(coeffs)
}

/// Horner evaluation of a dense coefficient vector.
pub fn eval_dense(field: &FieldSpec, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
        field.add(field.mul(acc, x), c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::unit_circle::tu_fraction;

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(3, 7), Ok(5));
        assert_eq!(mod_inverse(1, 9), Ok(1));
        assert!(mod_inverse(2, 4).is_err());
    }

    #[test]
    fn special_params_examples() {
        let p = inverse_params_special(4, 1, None).unwrap();
        assert_eq!(
            (p.q_circle, p.r1, p.r2, p.g_inverse_exponent),
            (17, 15, 1, 15)
        );
        assert_eq!(p.i, 4);
        let p = inverse_params_special(2, 1, None).unwrap();
        assert_eq!((p.r1, p.r2), (3, 1));
        assert_eq!(
            inverse_params_special(3, 1, None),
            Err(InvertError::CircleCondition { m: 3, gcd: 3 })
        );
    }

    #[test]
    fn special_params_congruences() {
        for m in [2u32, 4, 6, 8] {
            for j in 1..=m + 1 {
                let p = inverse_params_special(m, j, None).unwrap();
                let q = p.q_circle;
                assert_eq!((p.r1 + 2) % q, 0, "r1 ≡ -2");
                assert_eq!(p.r1 * pow2_mod(m - 1, q) % q, 1);
                assert_eq!(p.r2 * pow2_mod(j - 1, q) % q, 1);
                let prod = p.g_inverse_exponent * pow2_mod(m - 1, q) % q * pow2_mod(j - 1, q) % q;
                assert_eq!(prod, 1);
                let q_minus_1 = (1u128 << (2 * m)) - 1;
                assert_eq!(
                    u128::from(p.r3) * u128::from(p.triple.normalized[0]) % q_minus_1,
                    1
                );
                assert_eq!(p.r3, p.r_prime);
            }
        }
    }

    #[test]
    fn odd_m_is_always_rejected() {
        for m in (3..=15).step_by(2) {
            assert!(matches!(
                inverse_params_special(m, 1, None),
                Err(InvertError::CircleCondition { gcd: 3, .. })
            ));
        }
    }

    #[test]
    fn explicit_u_is_checked() {
        // u = 2 at m = 2, i = 2, j = 1 gives d1 = 1 + 10 = 11, gcd(11, 15) = 1
        let p = inverse_params_special(2, 1, Some(2)).unwrap();
        assert_eq!(p.u, 2);
        // u = 1 gives d1 = 6
        assert_eq!(
            inverse_params_special(2, 1, Some(1)),
            Err(InvertError::Construct(ConstructError::ConditionC1Failed {
                gcd: 3
            }))
        );
    }

    #[test]
    fn bruteforce_identity_and_monomial() {
        let f = make_field(4).unwrap();
        let u = UnitCircle::new(&f);
        let t = inverse_on_subgroup_bruteforce(&u, |x| x).unwrap();
        assert_eq!(t.len(), 17);
        assert!(u.elements().iter().all(|&x| t.apply(x) == Some(x)));

        let t = inverse_on_subgroup_bruteforce(&u, |x| u.pow(x, 8)).unwrap();
        for &x in u.elements() {
            assert_eq!(t.apply(x), Some(u.pow(x, 15)));
        }
        assert!(inverse_on_subgroup_bruteforce(&u, |x| u.pow(x, 17)).is_err());
    }

    #[test]
    fn bruteforce_inverts_tu_fraction() {
        let f = make_field(2).unwrap();
        let u = UnitCircle::new(&f);
        let frac = tu_fraction(1);
        let g = |x| {
            crate::unit_circle::eval_fraction(&u, &frac, x)
                .unwrap()
                .value
        };
        let t = inverse_on_subgroup_bruteforce(&u, g).unwrap();
        assert_eq!(t.len(), 5);
        for &x in u.elements() {
            assert_eq!(t.apply(g(x)), Some(x));
        }
    }

    #[test]
    fn compose_identity_and_monomials() {
        let f = make_field(2).unwrap();
        let spec = CompositionSpec {
            r: 1,
            h_exponents: vec![0],
            s: 15,
        };
        let inv = compose_inverse(&f, &spec, |y| y).unwrap();
        assert!(f.elements().all(|x| inv.eval(x) == x));

        for d in [2i128, 7, 11, 13] {
            let spec = CompositionSpec {
                r: d,
                h_exponents: vec![0],
                s: 15,
            };
            let inv = compose_inverse(&f, &spec, |y| y).unwrap();
            let dp = mod_inverse(d, 15).unwrap();
            for x in f.elements() {
                assert_eq!(inv.eval(x), f.pow_residue(x, dp));
            }
        }
    }

    #[test]
    fn compose_preconditions() {
        let f = make_field(2).unwrap();
        let id = |y| y;
        let bad_s = CompositionSpec {
            r: 1,
            h_exponents: vec![0],
            s: 4,
        };
        assert!(matches!(
            compose_inverse(&f, &bad_s, id),
            Err(InvertError::SDoesNotDivide { .. })
        ));
        let bad_r = CompositionSpec {
            r: 3,
            h_exponents: vec![0],
            s: 15,
        };
        assert!(matches!(
            compose_inverse(&f, &bad_r, id),
            Err(InvertError::RNotCoprime { .. })
        ));
        let no_const = CompositionSpec {
            r: 1,
            h_exponents: vec![1],
            s: 3,
        };
        assert_eq!(
            compose_inverse(&f, &no_const, id).err(),
            Some(InvertError::MissingConstantTerm)
        );
        // x (1 + x^3): f(0) = f(1) = 0
        let not_pp = CompositionSpec {
            r: 1,
            h_exponents: vec![0, 1],
            s: 3,
        };
        assert!(matches!(
            compose_inverse(&f, &not_pp, id),
            Err(InvertError::NotAPermutation(_))
        ));
    }

    #[test]
    fn full_inverse_roundtrips_small_fields() {
        for m in [2u32, 4] {
            let field = make_field(m).unwrap();
            for j in 1..=m + 1 {
                let p = inverse_params_special(m, j, None).unwrap();
                let poly = p.triple.as_polynomial();
                let inv = p.full_inverse(&field).unwrap();
                let rep = verify_roundtrip(&field, |x| poly.eval(&field, x), |x| inv.eval(x));
                assert!(rep.verdict, "m={m} j={j}: {:?}", rep.witness);
                assert!(rep.exhaustive);
            }
        }
    }

    #[test]
    fn circle_inverse_is_monomial() {
        let field = make_field(4).unwrap();
        let u = UnitCircle::new(&field);
        for j in 1..=5 {
            let p = inverse_params_special(4, j, None).unwrap();
            for &x in u.elements() {
                let y = p.g_on_circle(&u, x);
                assert_eq!(p.g_inverse_on_circle(&u, y), x);
            }
        }
    }

    #[test]
    fn roundtrip_examples() {
        let f = make_field(2).unwrap();
        assert!(verify_roundtrip(&f, |x| x, |x| x).verdict);
        let bad = verify_roundtrip(&f, |x| f.square(x), |x| f.pow_residue(x, 4));
        assert!(!bad.verdict);
        assert!(bad.witness.is_some());
        assert!(verify_roundtrip(&f, |x| f.square(x), |x| f.pow_residue(x, 8)).verdict);
    }

    #[test]
    fn roundtrip_samples_large_fields() {
        let f = make_field(11).unwrap();
        let rep = verify_roundtrip(&f, |x| f.square(x), |x| f.frobenius(x, 21));
        assert!(rep.verdict);
        assert!(!rep.exhaustive);
        assert_eq!(rep.points_checked, ROUNDTRIP_SAMPLES as u64 + 2);
    }

    #[test]
    fn interpolation_recovers_monomials_and_inverse() {
        let f = make_field(2).unwrap();
        let c = interpolate_dense(&f, |x| f.pow_residue(x, 7)).unwrap();
        assert_eq!(c.len(), 16);
        for (k, &ck) in c.iter().enumerate() {
            assert_eq!(
                ck,
                if k == 7 {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                }
            );
        }
        let p = inverse_params_special(2, 1, None).unwrap();
        let inv = p.full_inverse(&f).unwrap();
        let dense = interpolate_dense(&f, |x| inv.eval(x)).unwrap();
        for x in f.elements() {
            assert_eq!(eval_dense(&f, &dense, x), inv.eval(x));
        }
        assert!(interpolate_dense(&make_field(7).unwrap(), |x| x).is_err());
    }
}
