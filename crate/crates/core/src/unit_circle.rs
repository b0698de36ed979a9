//! The unit circle `U = {x : x^{2^m+1} = 1}` of GF(2^{2m}) and fractional maps on it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::numtheory::{divisors, rem_euclid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionError {
    #[error("fraction has an empty denominator")]
    EmptyDenominator,
    #[error("duplicate exponent {0} in an exponent list")]
    DuplicateExponent(i64),
    #[error("{0} is not on the unit circle")]
    NotOnCircle(FieldElement),
    #[error("denominator vanishes at {point}: the fraction has a pole on U")]
    Pole { point: FieldElement },
}

/// The order-`(2^m + 1)` subgroup of GF(2^{2m})^×.
#[derive(Debug, Clone)]
pub struct UnitCircle {
    field: FieldSpec,
    order: u64,
    generator: FieldElement,
    elements: Vec<FieldElement>,
    // position of each element in `elements`, for bitmap bookkeeping
    index: HashMap<FieldElement, usize>,
}

impl UnitCircle {
    pub fn new(field: &FieldSpec) -> UnitCircle {
        let order = field.circle_order();
        let generator = field.pow_residue(field.primitive_element(), field.subfield_group_order());
        let mut elements = Vec::with_capacity(order as usize);
        let mut x = FieldElement::ONE;
        for _ in 0..order {
            elements.push(x);
            x = field.mul(x, generator);
        }
        debug_assert_eq!(x, FieldElement::ONE);
        let index = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        UnitCircle {
            field: field.clone(),
            order,
            generator,
            elements,
            index,
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    /// `generator^0, generator^1, ...`.
    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        self.index.contains_key(&x)
    }

    /// Position of `x` in [`UnitCircle::elements`], i.e. its discrete log
    /// base the generator.
    pub fn position(&self, x: FieldElement) -> Option<usize> {
        self.index.get(&x).copied()
    }

    /// `x^e` for `x` on the circle and any integer `e` (reduced mod `2^m + 1`).
    pub fn pow(&self, x: FieldElement, e: i128) -> FieldElement {
        self.field.pow_residue(x, rem_euclid(e, self.order))
    }

    /// True when the generator has order exactly `2^m + 1`.
    pub fn generator_has_full_order(&self) -> bool {
        let f = &self.field;
        f.pow_residue(self.generator, self.order) == FieldElement::ONE
            && divisors(self.order)
                .into_iter()
                .filter(|&d| d < self.order)
                .all(|d| f.pow_residue(self.generator, d) != FieldElement::ONE)
    }
}

pub fn build_unit_circle(field: &FieldSpec) -> UnitCircle {
    UnitCircle::new(field)
}

/// `x ≠ 0` and `x^{2^m+1} = 1`.
pub fn in_unit_circle(field: &FieldSpec, x: FieldElement) -> bool {
    !x.is_zero() && field.pow_residue(x, field.circle_order()) == FieldElement::ONE
}

/// A quotient of two all-ones sparse polynomials, as exponent lists.
/// Exponent 0 is the constant term; negative exponents are allowed since
/// the map is only ever evaluated on `U`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionMap {
    numerator: Vec<i64>,
    denominator: Vec<i64>,
}

impl FractionMap {
    pub fn new(numerator: Vec<i64>, denominator: Vec<i64>) -> Result<FractionMap, FractionError> {
        if denominator.is_empty() {
            return Err(FractionError::EmptyDenominator);
        }
        for list in [&numerator, &denominator] {
            let mut seen = list.clone();
            seen.sort_unstable();
            if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
                return Err(FractionError::DuplicateExponent(w[0]));
            }
        }
        Ok(FractionMap {
            numerator,
            denominator,
        })
    }

    pub fn identity() -> FractionMap {
        FractionMap {
            numerator: vec![1],
            denominator: vec![0],
        }
    }

    pub fn numerator(&self) -> &[i64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[i64] {
        &self.denominator
    }
}

/// `(x^{2^k+1} + x^{2^k} + 1) / (x^{2^k+1} + x + 1)`.
pub fn tu_fraction(k: u32) -> FractionMap {
    assert!((1..=62).contains(&k), "k = {k} out of range");
    let big_k = 1i64 << k;
    FractionMap {
        numerator: vec![big_k + 1, big_k, 0],
        denominator: vec![big_k + 1, 1, 0],
    }
}

/// A fraction value together with whether it landed on `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FractionValue {
    pub value: FieldElement,
    pub on_circle: bool,
}

fn eval_sparse(circle: &UnitCircle, exponents: &[i64], x: FieldElement) -> FieldElement {
    exponents.iter().fold(FieldElement::ZERO, |acc, &e| {
        circle.field.add(acc, circle.pow(x, i128::from(e)))
    })
}

pub fn eval_fraction(
    circle: &UnitCircle,
    f: &FractionMap,
    x: FieldElement,
) -> Result<FractionValue, FractionError> {
    if !circle.contains(x) {
        return Err(FractionError::NotOnCircle(x));
    }
    let field = &circle.field;
    let den = eval_sparse(circle, &f.denominator, x);
    let den_inv = field
        .inv(den)
        .map_err(|_| FractionError::Pole { point: x })?;
    let value = field.mul(eval_sparse(circle, &f.numerator, x), den_inv);
    Ok(FractionValue {
        value,
        on_circle: circle.contains(value),
    })
}

/// Outcome of evaluating a fraction over all of `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionCertificate {
    pub permutes: bool,
    /// `images[i]` is the value at `circle.elements()[i]`.
    pub images: Vec<FieldElement>,
    /// First point whose image leaves `U`, if any.
    pub off_circle: Option<FieldElement>,
    /// First pair of points (in enumeration order) sharing an image.
    pub collision: Option<(FieldElement, FieldElement)>,
}

/// Evaluates `f` everywhere on `U`. A pole is an error, not a negative verdict.
pub fn fraction_permutes(
    f: &FractionMap,
    circle: &UnitCircle,
) -> Result<FractionCertificate, FractionError> {
    let mut images = Vec::with_capacity(circle.elements.len());
    let mut hit: Vec<Option<usize>> = vec![None; circle.elements.len()];
    let mut off_circle = None;
    let mut collision = None;
    for (i, &x) in circle.elements.iter().enumerate() {
        let v = eval_fraction(circle, f, x)?;
        images.push(v.value);
        match circle.position(v.value) {
            None => {
                off_circle.get_or_insert(x);
            }
            Some(slot) => match hit[slot] {
                Some(prev) => {
                    collision.get_or_insert((circle.elements[prev], x));
                }
                None => hit[slot] = Some(i),
            },
        }
    }
    Ok(FractionCertificate {
        permutes: off_circle.is_none() && collision.is_none(),
        images,
        off_circle,
        collision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::numtheory::gcd;

    #[test]
    fn small_circles() {
        let f1 = make_field(1).unwrap();
        let u1 = UnitCircle::new(&f1);
        let mut e: Vec<_> = u1.elements().to_vec();
        e.sort();
        assert_eq!(e, vec![FieldElement(1), FieldElement(2), FieldElement(3)]);

        let f2 = make_field(2).unwrap();
        let u2 = UnitCircle::new(&f2);
        assert_eq!(u2.order(), 5);
        assert!(u2
            .elements()
            .iter()
            .all(|&x| f2.pow(x, 5).unwrap() == FieldElement::ONE));
        assert_eq!(UnitCircle::new(&make_field(3).unwrap()).elements().len(), 9);
    }

    #[test]
    fn membership_counts() {
        for m in 1..=10 {
            let f = make_field(m).unwrap();
            let count = f.elements().filter(|&x| in_unit_circle(&f, x)).count() as u64;
            assert_eq!(count, (1 << m) + 1, "m = {m}");
            let u = UnitCircle::new(&f);
            assert!(u.generator_has_full_order());
            let mut sorted = u.elements().to_vec();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len() as u64, u.order());
        }
        let f = make_field(2).unwrap();
        assert!(in_unit_circle(&f, FieldElement::ONE));
        assert!(!in_unit_circle(&f, FieldElement::ZERO));
    }

    #[test]
    fn conjugate_is_inverse_on_circle() {
        for m in 1..=8 {
            let f = make_field(m).unwrap();
            let u = UnitCircle::new(&f);
            for &x in u.elements() {
                assert_eq!(f.inv(x).unwrap(), f.pow_residue(x, 1 << m));
            }
        }
    }

    #[test]
    fn tu_fraction_shapes() {
        assert_eq!(
            tu_fraction(1),
            FractionMap::new(vec![3, 2, 0], vec![3, 1, 0]).unwrap()
        );
        assert_eq!(
            tu_fraction(2),
            FractionMap::new(vec![5, 4, 0], vec![5, 1, 0]).unwrap()
        );
    }

    #[test]
    fn eval_at_one_and_off_circle_input() {
        let f = make_field(2).unwrap();
        let u = UnitCircle::new(&f);
        let v = eval_fraction(&u, &tu_fraction(1), FieldElement::ONE).unwrap();
        assert_eq!(v.value, FieldElement::ONE);
        assert!(v.on_circle);
        let outside = f
            .elements()
            .find(|&x| !x.is_zero() && !u.contains(x))
            .unwrap();
        assert_eq!(
            eval_fraction(&u, &tu_fraction(1), outside),
            Err(FractionError::NotOnCircle(outside))
        );
    }

    #[test]
    fn first_table_row_permutes_small_m() {
        for m in 2..=8 {
            let u = UnitCircle::new(&make_field(m).unwrap());
            let cert = fraction_permutes(&tu_fraction(1), &u).unwrap();
            assert!(cert.permutes, "m = {m}");
            assert_eq!(cert.images.len() as u64, u.order());
        }
    }

    #[test]
    fn identity_fraction_permutes() {
        let u = UnitCircle::new(&make_field(3).unwrap());
        let cert = fraction_permutes(&FractionMap::identity(), &u).unwrap();
        assert!(cert.permutes);
        assert_eq!(cert.images, u.elements());
    }

    #[test]
    fn pole_found_by_search() {
        // search two-term denominators x^a + x^b at m = 2 for one vanishing on U
        let f = make_field(2).unwrap();
        let u = UnitCircle::new(&f);
        let (a, b) = (0..5i64)
            .flat_map(|a| ((a + 1)..5).map(move |b| (a, b)))
            .find(|&(a, b)| {
                u.elements()
                    .iter()
                    .any(|&x| f.add(u.pow(x, a.into()), u.pow(x, b.into())).is_zero())
            })
            .unwrap();
        let frac = FractionMap::new(vec![1], vec![a, b]).unwrap();
        assert!(matches!(
            fraction_permutes(&frac, &u),
            Err(FractionError::Pole { .. })
        ));
    }

    #[test]
    fn second_tu_row_has_pole_at_odd_m() {
        // For odd m, 3 | 2^m + 1 so the primitive cube roots of unity lie on U,
        // and x^2 + x + 1 divides both x^5 + x^4 + 1 and x^5 + x + 1.
        let u3 = UnitCircle::new(&make_field(3).unwrap());
        assert!(matches!(
            fraction_permutes(&tu_fraction(2), &u3),
            Err(FractionError::Pole { .. })
        ));
        for m in [2, 4, 6, 8] {
            let u = UnitCircle::new(&make_field(m).unwrap());
            assert!(fraction_permutes(&tu_fraction(2), &u).unwrap().permutes);
        }
    }

    #[test]
    fn tu_sufficiency_small() {
        for m in 1..=8u32 {
            let u = UnitCircle::new(&make_field(m).unwrap());
            for k in 1..=m {
                if gcd((1 << k) - 1, (1 << m) + 1) == 1 {
                    assert!(fraction_permutes(&tu_fraction(k), &u).unwrap().permutes);
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_fractions() {
        assert_eq!(
            FractionMap::new(vec![1], vec![]),
            Err(FractionError::EmptyDenominator)
        );
        assert_eq!(
            FractionMap::new(vec![1, 1], vec![0]),
            Err(FractionError::DuplicateExponent(1))
        );
    }

    #[test]
    fn reports_collision_witness() {
        // on U at m = 2, x^5 is constant and x^3 permutes (gcd(3, 5) = 1)
        let u = UnitCircle::new(&make_field(2).unwrap());
        let collapse = FractionMap::new(vec![5], vec![0]).unwrap();
        let cert = fraction_permutes(&collapse, &u).unwrap();
        assert!(!cert.permutes);
        assert_eq!(cert.collision, Some((u.elements()[0], u.elements()[1])));
        let cube = FractionMap::new(vec![3], vec![0]).unwrap();
        assert!(fraction_permutes(&cube, &u).unwrap().permutes);
    }
}
