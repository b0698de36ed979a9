//! Published fixture rows: all-ones trinomials over GF(2^{2m}) and
//! fractional maps on the unit circle.
//!
//! The fraction table ships as `data/table2_fractions.json`; see that file's
//! `description` field for the schema.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{make_field, FieldElement};
use crate::numtheory::gcd;
use crate::unit_circle::{fraction_permutes, tu_fraction, FractionError, FractionMap, UnitCircle};

const TABLE2_JSON: &str = include_str!("../data/table2_fractions.json");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("malformed fraction table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("row {label:?}: {reason}")]
    BadRow { label: String, reason: String },
}

/// Predicate on `m` (and `k` for the parametric family).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Always,
    MOdd,
    #[serde(rename = "gcd_3_m_is_1")]
    Gcd3MIs1,
    #[serde(rename = "m_mod_6_is_2_or_4")]
    MMod6Is2Or4,
    #[serde(rename = "gcd_2k_minus_1_coprime")]
    Gcd2kMinus1Coprime,
    #[serde(rename = "gcd_2k_plus_1_coprime")]
    Gcd2kPlus1Coprime,
}

impl Condition {
    pub fn holds(self, m: u32, k: Option<u32>) -> bool {
        let circle = (1u64 << m) + 1;
        match self {
            Condition::Always => true,
            Condition::MOdd => m % 2 == 1,
            Condition::Gcd3MIs1 => gcd(3, u64::from(m)) == 1,
            Condition::MMod6Is2Or4 => matches!(m % 6, 2 | 4),
            Condition::Gcd2kMinus1Coprime => k.is_some_and(|k| gcd((1u64 << k) - 1, circle) == 1),
            Condition::Gcd2kPlus1Coprime => k.is_some_and(|k| gcd((1u64 << k) + 1, circle) == 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tu,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub condition: Condition,
    pub asserted: bool,
}

#[derive(Deserialize)]
struct Table2File {
    rows: Vec<Table2Row>,
}

impl Table2Row {
    /// The concrete fractions this row stands for at `m`, each with its `k`.
    pub fn instances(&self, m: u32) -> Vec<(Option<u32>, FractionMap)> {
        match (self.family, &self.numerator, &self.denominator) {
            (Some(Family::Tu), _, _) => (1..=m).map(|k| (Some(k), tu_fraction(k))).collect(),
            (None, Some(num), Some(den)) => {
                let frac = FractionMap::new(num.clone(), den.clone())
                    .expect("rows are validated when parsed");
                vec![(None, frac)]
            }
            _ => unreachable!("rows are validated when parsed"),
        }
    }
}

pub fn parse_table2(json: &str) -> Result<Vec<Table2Row>, FixtureError> {
    let file: Table2File = serde_json::from_str(json)?;
    for row in &file.rows {
        let bad = |reason: &str| FixtureError::BadRow {
            label: row.label.clone(),
            reason: reason.to_string(),
        };
        match (row.family, &row.numerator, &row.denominator) {
            (Some(_), None, None) => {}
            (None, Some(num), Some(den)) => {
                FractionMap::new(num.clone(), den.clone()).map_err(|e| bad(&e.to_string()))?;
            }
            _ => return Err(bad("needs either a family or both exponent lists")),
        }
    }
    Ok(file.rows)
}

/// The shipped fraction table.
pub fn table2_rows() -> Vec<Table2Row> {
    parse_table2(TABLE2_JSON).expect("shipped fraction table is well-formed")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FractionOutcome {
    NotApplicable,
    Permutes,
    NotPermutation {
        #[serde(skip_serializing_if = "Option::is_none")]
        collision: Option<(FieldElement, FieldElement)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        off_circle: Option<FieldElement>,
    },
    Pole {
        point: FieldElement,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractionCheck {
    pub label: String,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub asserted: bool,
    pub outcome: FractionOutcome,
}

impl FractionCheck {
    /// An asserted, applicable row that did not permute `U`.
    pub fn is_failure(&self) -> bool {
        self.asserted
            && !matches!(
                self.outcome,
                FractionOutcome::NotApplicable | FractionOutcome::Permutes
            )
    }
}

/// Evaluates every row at `m`. Rows whose condition fails are still listed,
/// marked not-applicable.
pub fn check_table2(rows: &[Table2Row], m: u32) -> Vec<FractionCheck> {
    let field = make_field(m).expect("m within field support");
    let circle = UnitCircle::new(&field);
    let mut out = Vec::new();
    for row in rows {
        for (k, frac) in row.instances(m) {
            let outcome = if !row.condition.holds(m, k) {
                FractionOutcome::NotApplicable
            } else {
                match fraction_permutes(&frac, &circle) {
                    Ok(cert) if cert.permutes => FractionOutcome::Permutes,
                    Ok(cert) => FractionOutcome::NotPermutation {
                        collision: cert.collision,
                        off_circle: cert.off_circle,
                    },
                    Err(FractionError::Pole { point }) => FractionOutcome::Pole { point },
                    Err(e) => unreachable!("evaluation on U cannot fail with {e}"),
                }
            };
            out.push(FractionCheck {
                label: row.label.clone(),
                m,
                k,
                asserted: row.asserted,
                outcome,
            });
        }
    }
    out
}

/// One row of the published trinomial table, as a function of `m`.
#[derive(Debug, Clone, Copy)]
pub struct Table1Row {
    pub label: &'static str,
    pub condition: &'static str,
    /// Whether the row is credited to the reversed polar-decomposition construction.
    pub from_construction: bool,
    applies: fn(u32) -> bool,
    exponents: fn(u32) -> [i128; 3],
}

impl Table1Row {
    pub fn applies(&self, m: u32) -> bool {
        (self.applies)(m)
    }

    /// Raw (unreduced) exponents at `m`.
    pub fn exponents(&self, m: u32) -> [i128; 3] {
        (self.exponents)(m)
    }
}

fn p2(e: u32) -> i128 {
    1i128 << e
}

pub fn table1_rows() -> Vec<Table1Row> {
    vec![
        Table1Row {
            label: "x + x^3 + x^{2^{(m+1)/2}+2}",
            condition: "m odd",
            from_construction: false,
            applies: |m| m % 2 == 1,
            exponents: |m| [1, 3, p2(m.div_ceil(2)) + 2],
        },
        Table1Row {
            label: "x^{3*2^{(m+1)/2}+4} + x^{2^{(m+1)/2}+2} + x^{2^{(m+1)/2}}",
            condition: "m odd",
            from_construction: false,
            applies: |m| m % 2 == 1,
            exponents: |m| {
                let h = p2(m.div_ceil(2));
                [3 * h + 4, h + 2, h]
            },
        },
        Table1Row {
            label: "x + x^{2^{(m+1)/2}-1} + x^{2^m-2^{(m+1)/2}+1}",
            condition: "m odd",
            from_construction: false,
            applies: |m| m % 2 == 1,
            exponents: |m| {
                let h = p2(m.div_ceil(2));
                [1, h - 1, p2(m) - h + 1]
            },
        },
        Table1Row {
            label: "x + x^3 + x^{2^m-2^{(m+3)/2}+2}",
            condition: "m odd",
            from_construction: false,
            applies: |m| m % 2 == 1,
            exponents: |m| [1, 3, p2(m) - p2((m + 3) / 2) + 2],
        },
        Table1Row {
            label: "x + x^{2^{(m+1)/2}-1} + x^{2^m-2^{m/2}+1}",
            condition: "m odd",
            from_construction: false,
            applies: |m| m % 2 == 1,
            exponents: |m| [1, p2(m.div_ceil(2)) - 1, p2(m) - p2(m / 2) + 1],
        },
        Table1Row {
            label: "x^{2^{m/2}+4} + x^{2^{m/2+1}+3} + x^{2^{m/2+2}+1}",
            condition: "m ≡ 2 (mod 4)",
            from_construction: false,
            applies: |m| m % 4 == 2,
            exponents: |m| [p2(m / 2) + 4, p2(m / 2 + 1) + 3, p2(m / 2 + 2) + 1],
        },
        Table1Row {
            label: "x^5 + x^{2^{m/2}+4} + x^{5*2^{m/2}}",
            condition: "m ≡ 4 (mod 8)",
            from_construction: true,
            applies: |m| m % 8 == 4,
            exponents: |m| [5, p2(m / 2) + 4, 5 * p2(m / 2)],
        },
        Table1Row {
            label: "x^9 + x^{8+7*2^m} + x^{9*2^m}",
            condition: "m ≡ 2 (mod 4)",
            from_construction: true,
            applies: |m| m % 4 == 2,
            exponents: |m| [9, 8 + 7 * p2(m), 9 * p2(m)],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_parses() {
        let rows = table2_rows();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows.iter().filter(|r| r.asserted).count(), 8);
        assert_eq!(rows[0].numerator.as_deref(), Some(&[3, 2, 0][..]));
        assert_eq!(rows[7].family, Some(Family::Tu));
    }

    #[test]
    fn malformed_rows_rejected() {
        let both =
            r#"{"rows":[{"label":"x","numerator":[1],"condition":"always","asserted":true}]}"#;
        assert!(matches!(
            parse_table2(both),
            Err(FixtureError::BadRow { .. })
        ));
        let dup = r#"{"rows":[{"label":"x","numerator":[1,1],"denominator":[0],"condition":"always","asserted":true}]}"#;
        assert!(matches!(
            parse_table2(dup),
            Err(FixtureError::BadRow { .. })
        ));
        assert!(matches!(parse_table2("{"), Err(FixtureError::Parse(_))));
    }

    #[test]
    fn conditions() {
        assert!(Condition::MOdd.holds(3, None));
        assert!(!Condition::MOdd.holds(4, None));
        assert!(Condition::Gcd3MIs1.holds(4, None));
        assert!(!Condition::Gcd3MIs1.holds(6, None));
        assert!(Condition::MMod6Is2Or4.holds(8, None));
        assert!(!Condition::MMod6Is2Or4.holds(6, None));
        // gcd(2^2 - 1, 2^3 + 1) = 3
        assert!(!Condition::Gcd2kMinus1Coprime.holds(3, Some(2)));
        assert!(Condition::Gcd2kMinus1Coprime.holds(4, Some(2)));
        assert!(!Condition::Gcd2kMinus1Coprime.holds(4, None));
    }

    #[test]
    fn odd_condition_skipped_at_even_m() {
        let checks = check_table2(&table2_rows(), 4);
        let row = checks
            .iter()
            .find(|c| c.label == "(x^5+x^4+1)/(x^5+x+1)")
            .unwrap();
        assert_eq!(row.outcome, FractionOutcome::NotApplicable);
        assert!(!row.is_failure());
    }

    #[test]
    fn family_rows_expand_over_k() {
        let checks = check_table2(&table2_rows(), 3);
        let tu: Vec<_> = checks
            .iter()
            .filter(|c| c.label.starts_with("tu(k), gcd(2^k-1"))
            .collect();
        assert_eq!(tu.len(), 3);
        assert_eq!(tu[1].k, Some(2));
        assert_eq!(tu[1].outcome, FractionOutcome::NotApplicable);
        assert_eq!(tu[0].outcome, FractionOutcome::Permutes);
    }

    #[test]
    fn table1_exponents() {
        let rows = table1_rows();
        assert_eq!(rows[7].exponents(2), [9, 36, 36]);
        assert_eq!(rows[6].exponents(4), [5, 8, 20]);
        assert_eq!(rows.iter().filter(|r| r.from_construction).count(), 2);
    }
}
