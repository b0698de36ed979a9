//! Permutation verifiers.
//!
//! Three routes that must agree on every all-ones polynomial of Niho type:
//!
//! * `exhaustive`: evaluate on the whole field, watch a presence bitmap.
//! * `expsum`: for every `δ`, count `λ ∈ U` with `g(λ) + g(λ)^{2^m} = 0`,
//!   where `g(λ) = λ^{d1} + Σ δ^{d1 - dk} λ^{dk}`. The polynomial permutes the
//!   field iff every count is exactly 1 (the Walsh sum equals `(N - 1) 2^m`).
//!   When no exponent is a unit the same count runs over `b · Σ λ^{dk}`, `b ≠ 0`.
//! * `subgroup`: write `f = x^r h(x^s)` and check `x^r h(x)^s` on `μ_{(q-1)/s}`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::construct::{is_niho, SparsePoly};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::numtheory::{gcd, gcd_signed};

/// Exhaustive checks are limited to fields of at most 2^24 elements.
pub const MAX_EXHAUSTIVE_DEGREE: u32 = 24;
/// The solution-count verifier costs `q (2^m + 1)` evaluations.
pub const MAX_EXPSUM_HALF_DEGREE: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("field of degree {n} is too large for this verifier (max {max})")]
    DomainTooLarge { n: u32, max: u32 },
    #[error("exponents {0:?} are not of Niho type (not congruent modulo 2^m - 1)")]
    NotNiho(Vec<u64>),
    #[error("no exponent in {0:?} is coprime to q - 1, nor is their residue mod 2^m - 1")]
    NoCoprimeExponent(Vec<u64>),
    #[error("all terms cancel: the polynomial is identically zero")]
    ZeroPolynomial,
    #[error("binomial coefficient a must be nonzero")]
    ZeroCoefficient,
    #[error("exponent must be positive")]
    NonPositiveExponent,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Expsum,
    Subgroup,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Exhaustive, Method::Expsum, Method::Subgroup];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Expsum => "expsum",
            Method::Subgroup => "subgroup",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exhaustive" => Ok(Method::Exhaustive),
            "expsum" => Ok(Method::Expsum),
            "subgroup" => Ok(Method::Subgroup),
            other => Err(format!(
                "unknown method {other:?} (expected exhaustive, expsum or subgroup)"
            )),
        }
    }
}

/// Counterexample attached to a negative verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f(first) = f(second) = image`, `first < second`.
    Collision {
        first: FieldElement,
        second: FieldElement,
        image: FieldElement,
    },
    /// `N(δ) ≠ 1`; `delta` is the multiplier `b` in the direct form.
    SolutionCount { delta: FieldElement, count: u64 },
    /// A side condition on the exponents failed.
    Condition { detail: String },
    /// The reduced map sends `point` outside the subgroup.
    LeavesSubgroup {
        point: FieldElement,
        image: FieldElement,
    },
}

fn as_secs<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub method: Method,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(rename = "elapsed_secs", serialize_with = "as_secs")]
    pub elapsed: Duration,
}

impl VerificationReport {
    fn new(method: Method, witness: Option<Witness>, started: Instant) -> Self {
        VerificationReport {
            method,
            verdict: witness.is_none(),
            witness,
            elapsed: started.elapsed(),
        }
    }
}

/// Evaluates `f` on every element in increasing order and stops at the first
/// repeated image.
pub fn permutes_exhaustive<F>(field: &FieldSpec, f: F) -> Result<VerificationReport, VerifyError>
where
    F: Fn(FieldElement) -> FieldElement,
{
    let started = Instant::now();
    if field.n() > MAX_EXHAUSTIVE_DEGREE {
        return Err(VerifyError::DomainTooLarge {
            n: field.n(),
            max: MAX_EXHAUSTIVE_DEGREE,
        });
    }
    let words = (field.order() as usize).div_ceil(64);
    let mut seen = vec![0u64; words];
    for x in field.elements() {
        let y = f(x);
        let (word, bit) = ((y.0 >> 6) as usize, y.0 & 63);
        if seen[word] & (1 << bit) != 0 {
            let first = field
                .elements()
                .find(|&z| f(z) == y)
                .expect("image was marked by an earlier element");
            let witness = Witness::Collision {
                first,
                second: x,
                image: y,
            };
            return Ok(VerificationReport::new(
                Method::Exhaustive,
                Some(witness),
                started,
            ));
        }
        seen[word] |= 1 << bit;
    }
    Ok(VerificationReport::new(Method::Exhaustive, None, started))
}

/// Exhaustive check of an all-ones sparse polynomial.
pub fn permutes_exhaustive_poly(
    field: &FieldSpec,
    poly: &SparsePoly,
) -> Result<VerificationReport, VerifyError> {
    permutes_exhaustive(field, |x| poly.eval(field, x))
}

/// Exponents surviving pairwise cancellation, in first-occurrence order.
fn surviving_exponents(exponents: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for &e in exponents {
        match out.iter().position(|&x| x == e) {
            Some(pos) => {
                out.remove(pos);
            }
            None => out.push(e),
        }
    }
    out
}

/// How the free parameter enters `g`.
enum Scaling {
    /// `g(λ) = λ^{lead} + Σ δ^{lead - d_k} λ^{d_k}`, with `lead` a unit mod `q - 1`.
    Delta {
        lead_powers: Vec<FieldElement>,
        others: Vec<(u64, Vec<FieldElement>)>,
    },
    /// `g(λ) = b Σ λ^{d_k}`; used when no exponent is a unit but the common
    /// residue mod `2^m - 1` is.
    Direct { sums: Vec<FieldElement> },
}

/// The per-parameter solution counting problem for one Niho-type polynomial.
pub struct ExpsumSystem<'a> {
    field: &'a FieldSpec,
    scaling: Scaling,
    subfield_frobenius: u64,
}

impl<'a> ExpsumSystem<'a> {
    /// `exponents` are residues in `[1, q - 2]`; the first one coprime to `q - 1`
    /// (after cancelling repeated pairs) becomes the leading term.
    pub fn new(field: &'a FieldSpec, exponents: &[u64]) -> Result<Self, VerifyError> {
        if field.m() > MAX_EXPSUM_HALF_DEGREE {
            return Err(VerifyError::DomainTooLarge {
                n: field.n(),
                max: 2 * MAX_EXPSUM_HALF_DEGREE,
            });
        }
        let q_minus_1 = field.group_order();
        let terms = surviving_exponents(exponents);
        if terms.is_empty() {
            return Err(VerifyError::ZeroPolynomial);
        }
        if !is_niho(&terms, field.m()) {
            return Err(VerifyError::NotNiho(terms));
        }
        let circle = field.subgroup(field.circle_order())?;
        let powers = |e: u64| -> Vec<FieldElement> {
            circle.iter().map(|&l| field.pow_residue(l, e)).collect()
        };
        let scaling = match terms.iter().position(|&e| gcd(e, q_minus_1) == 1) {
            Some(lead_idx) => {
                let lead = terms[lead_idx];
                let others = terms
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != lead_idx)
                    .map(|(_, &e)| {
                        let delta_exp = field.normalize_exponent(i128::from(lead) - i128::from(e));
                        (delta_exp, powers(e))
                    })
                    .collect();
                Scaling::Delta {
                    lead_powers: powers(lead),
                    others,
                }
            }
            None => {
                let sub = field.subfield_group_order();
                if gcd(terms[0] % sub, sub) != 1 {
                    return Err(VerifyError::NoCoprimeExponent(terms));
                }
                let sums = circle
                    .iter()
                    .map(|&l| {
                        terms.iter().fold(FieldElement::ZERO, |acc, &e| {
                            field.add(acc, field.pow_residue(l, e))
                        })
                    })
                    .collect();
                Scaling::Direct { sums }
            }
        };
        Ok(ExpsumSystem {
            field,
            scaling,
            subfield_frobenius: 1u64 << field.m(),
        })
    }

    /// True when the parameter is `δ` (substituted form), false when it is the
    /// plain multiplier `b`.
    pub fn is_substituted(&self) -> bool {
        matches!(self.scaling, Scaling::Delta { .. })
    }

    /// The number of `λ ∈ U` with `g(λ) ∈ GF(2^m)` for parameter `t`.
    pub fn count(&self, t: FieldElement) -> u64 {
        let f = self.field;
        let in_subfield = |g: FieldElement| f.pow_residue(g, self.subfield_frobenius) == g;
        match &self.scaling {
            Scaling::Delta {
                lead_powers,
                others,
            } => {
                // δ = 0 kills every non-leading term: each δ-exponent is a nonzero residue
                let coeffs: Vec<FieldElement> =
                    others.iter().map(|(e, _)| f.pow_residue(t, *e)).collect();
                (0..lead_powers.len())
                    .filter(|&idx| {
                        let g = coeffs
                            .iter()
                            .zip(others)
                            .fold(lead_powers[idx], |g, (c, (_, pw))| {
                                f.add(g, f.mul(*c, pw[idx]))
                            });
                        in_subfield(g)
                    })
                    .count() as u64
            }
            Scaling::Direct { sums } => {
                sums.iter().filter(|&&s| in_subfield(f.mul(t, s))).count() as u64
            }
        }
    }
}

/// Solution-count criterion: every parameter must give exactly one solution.
/// The substituted form ranges over every `δ`, zero included; the direct form
/// over every nonzero `b`. A non-unit common residue mod `2^m - 1` is a
/// `Condition` failure.
pub fn permutes_expsum(
    field: &FieldSpec,
    exponents: &[u64],
) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let system = match ExpsumSystem::new(field, exponents) {
        Err(VerifyError::NoCoprimeExponent(terms)) => {
            // f(yλ) = y^e g(λ) with y ↦ y^e not injective on GF(2^m)*
            let sub = field.subfield_group_order();
            let witness = Witness::Condition {
                detail: format!(
                    "common residue {} of {terms:?} shares a factor with 2^m - 1 = {sub}",
                    terms[0] % sub
                ),
            };
            return Ok(VerificationReport::new(
                Method::Expsum,
                Some(witness),
                started,
            ));
        }
        other => other?,
    };
    let first = if system.is_substituted() { 0 } else { 1 };
    let witness = (first..field.order())
        .into_par_iter()
        .map(|v| FieldElement(v as u32))
        .map(|delta| (delta, system.count(delta)))
        .find_first(|&(_, n)| n != 1)
        .map(|(delta, count)| Witness::SolutionCount { delta, count });
    Ok(VerificationReport::new(Method::Expsum, witness, started))
}

/// `x^r h(x^s)` permutes GF(q) iff `gcd(r, s) = 1` and `x ↦ x^r h(x)^s`
/// permutes `μ_d`, `d = (q-1)/s`. `h` is all-ones; exponent 0 is its constant.
pub fn permutes_via_subgroup(
    field: &FieldSpec,
    r: i128,
    h_exponents: &[i128],
    d: u64,
) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let q_minus_1 = field.group_order();
    let subgroup = field.subgroup(d)?;
    let s = q_minus_1 / d;
    let g = gcd_signed(r, s);
    if g != 1 {
        let witness = Witness::Condition {
            detail: format!("condition (1): gcd(r, (q-1)/d) = gcd({r}, {s}) = {g}"),
        };
        return Ok(VerificationReport::new(
            Method::Subgroup,
            Some(witness),
            started,
        ));
    }
    let r_res = field.normalize_exponent(r);
    let h_res: Vec<u64> = h_exponents
        .iter()
        .map(|&e| field.normalize_exponent(e))
        .collect();
    let mut images: Vec<(FieldElement, usize)> = Vec::with_capacity(subgroup.len());
    for (idx, &x) in subgroup.iter().enumerate() {
        let hx = h_res.iter().fold(FieldElement::ZERO, |acc, &e| {
            field.add(acc, field.pow_residue(x, e))
        });
        // (h^s)^d = h^{q-1}, so the image stays in μ_d exactly when h(x) ≠ 0
        if hx.is_zero() {
            let witness = Witness::LeavesSubgroup {
                point: x,
                image: FieldElement::ZERO,
            };
            return Ok(VerificationReport::new(
                Method::Subgroup,
                Some(witness),
                started,
            ));
        }
        let image = field.mul(field.pow_residue(x, r_res), field.pow_residue(hx, s));
        debug_assert_eq!(field.pow_residue(image, d), FieldElement::ONE);
        images.push((image, idx));
    }
    images.sort_unstable();
    // earliest repeat in enumeration order: the smallest second index of any run
    let witness = images
        .chunk_by(|a, b| a.0 == b.0)
        .filter(|run| run.len() > 1)
        .min_by_key(|run| run[1].1)
        .map(|run| Witness::Collision {
            first: subgroup[run[0].1],
            second: subgroup[run[1].1],
            image: run[0].0,
        });
    Ok(VerificationReport::new(Method::Subgroup, witness, started))
}

/// `(r, h)` with `Σ x^{e_k} = x^r h(x^{2^m - 1})`, for Niho-type exponents:
/// `r = e_1` and `h` has exponents `(e_k - e_1) / (2^m - 1)`.
pub fn niho_subgroup_form(
    field: &FieldSpec,
    exponents: &[u64],
) -> Result<(i128, Vec<i128>), VerifyError> {
    if exponents.is_empty() {
        return Err(VerifyError::ZeroPolynomial);
    }
    if !is_niho(exponents, field.m()) {
        return Err(VerifyError::NotNiho(exponents.to_vec()));
    }
    let s = i128::from(field.subfield_group_order());
    let r = i128::from(exponents[0]);
    let h = exponents.iter().map(|&e| (i128::from(e) - r) / s).collect();
    Ok((r, h))
}

/// Runs one verification method on an all-ones polynomial.
pub fn verify_with(
    method: Method,
    field: &FieldSpec,
    poly: &SparsePoly,
) -> Result<VerificationReport, VerifyError> {
    match method {
        Method::Exhaustive => permutes_exhaustive_poly(field, poly),
        Method::Expsum => permutes_expsum(field, poly.exponents()),
        Method::Subgroup => {
            let (r, h) = niho_subgroup_form(field, poly.exponents())?;
            permutes_via_subgroup(field, r, &h, field.circle_order())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum BinomialPath {
    /// Hypothesis held; the verdict comes from the three conditions.
    Criterion,
    /// Hypothesis not applicable; the verdict comes from exhaustive evaluation.
    ExhaustiveFallback { reason: String },
}

/// The three conditions of the binomial criterion, evaluated as stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinomialConditions {
    pub neg_a_outside_mu_d: bool,
    pub gcd_r_s_is_1: bool,
    pub gcd_2d_2r_plus_s_at_most_2: bool,
}

impl BinomialConditions {
    pub fn all(&self) -> bool {
        self.neg_a_outside_mu_d && self.gcd_r_s_is_1 && self.gcd_2d_2r_plus_s_at_most_2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinomialReport {
    pub path: BinomialPath,
    pub conditions: BinomialConditions,
    pub report: VerificationReport,
}

/// `x^r (x^{(q-1)/d} + a)`.
pub fn binomial_criterion(
    field: &FieldSpec,
    r: u64,
    d: u64,
    a: FieldElement,
) -> Result<BinomialReport, VerifyError> {
    let started = Instant::now();
    if a.is_zero() {
        return Err(VerifyError::ZeroCoefficient);
    }
    if r == 0 {
        return Err(VerifyError::NonPositiveExponent);
    }
    let q_minus_1 = field.group_order();
    field.subgroup(d)?;
    let s = q_minus_1 / d;
    let conditions = BinomialConditions {
        // -a = a in characteristic 2
        neg_a_outside_mu_d: field.pow_residue(a, d) != FieldElement::ONE,
        gcd_r_s_is_1: gcd(r, s) == 1,
        gcd_2d_2r_plus_s_at_most_2: gcd(2 * d, 2 * r + s) <= 2,
    };

    let hypothesis = if !q_minus_1.is_multiple_of(2 * d) {
        Err(format!(
            "μ_(2d) is not a subgroup: 2d = {} does not divide q - 1 = {q_minus_1}",
            2 * d
        ))
    } else {
        let eta_group = field.subgroup(2 * d)?;
        let fails = eta_group.iter().find(|&&eta| {
            let v = field.add(eta, field.mul(a, field.inv(eta).expect("η ≠ 0")));
            v.is_zero() || field.pow_residue(v, s) != FieldElement::ONE
        });
        match fails {
            Some(eta) => Err(format!("η + a/η leaves μ_((q-1)/d) at η = {eta}")),
            None => Ok(()),
        }
    };

    match hypothesis {
        Ok(()) => {
            let witness = (!conditions.all()).then(|| Witness::Condition {
                detail: format!("{conditions:?}"),
            });
            Ok(BinomialReport {
                path: BinomialPath::Criterion,
                conditions,
                report: VerificationReport::new(Method::Exhaustive, witness, started),
            })
        }
        Err(reason) => {
            let report = permutes_exhaustive(field, |x| {
                field.mul(
                    field.pow_residue(x, r),
                    field.add(field.pow_residue(x, s), a),
                )
            })?;
            Ok(BinomialReport {
                path: BinomialPath::ExhaustiveFallback { reason },
                conditions,
                report,
            })
        }
    }
}

/// All pairs `d1 < d2` in `[1, q-1]` with `x^{d1} + x^{d2}` a permutation,
/// plus the number of pairs examined.
pub fn scan_all_ones_binomials(field: &FieldSpec) -> Result<(Vec<(u64, u64)>, u64), VerifyError> {
    let top = field.group_order();
    let found: Vec<(u64, u64)> = (1..=top)
        .into_par_iter()
        .map(|d1| -> Result<Vec<(u64, u64)>, VerifyError> {
            let mut hits = Vec::new();
            for d2 in (d1 + 1)..=top {
                let rep = permutes_exhaustive(field, |x| {
                    field.add(field.pow_residue(x, d1), field.pow_residue(x, d2))
                })?;
                if rep.verdict {
                    hits.push((d1, d2));
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((found, top * (top - 1) / 2))
}
