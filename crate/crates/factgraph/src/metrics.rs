//! Accuracy, precision, recall, and F1 — overall and per claim type.
//!
//! The positive class is "supported" (label `true`). Precision, recall,
//! and F1 fall back to 0 on empty denominators. A claim carrying several
//! type tags counts once in the total and once in every matching type row,
//! so per-type confusions need not sum to the total.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{ClaimRecord, ClaimType};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {preds} predictions vs {gold} gold labels")]
    LengthMismatch { preds: usize, gold: usize },
    #[error("confusion holds no observations")]
    EmptyConfusion,
}

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    fn record(&mut self, pred: bool, gold: bool) {
        match (pred, gold) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_pos += 1,
            (false, true) => self.false_neg += 1,
            (false, false) => self.true_neg += 1,
        }
    }
}

/// Count a prediction/gold pairing into a confusion.
pub fn confusion(preds: &[bool], gold: &[bool]) -> Result<Confusion, MetricsError> {
    if preds.len() != gold.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            gold: gold.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &g) in preds.iter().zip(gold) {
        c.record(p, g);
    }
    Ok(c)
}

/// The four rates, as ratios in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Rates from a confusion. Precision, recall, and F1 are 0 when their
/// denominators are 0.
pub fn rates(c: &Confusion) -> Result<Rates, MetricsError> {
    let n = c.total();
    if n == 0 {
        return Err(MetricsError::EmptyConfusion);
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (c.true_pos + c.true_neg) as f64 / n as f64;
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Rates {
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// One report row: counts plus rates (absent when the row is empty).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowMetrics {
    pub confusion: Confusion,
    pub rates: Option<Rates>,
}

impl RowMetrics {
    fn from_confusion(confusion: Confusion) -> Self {
        RowMetrics {
            rates: rates(&confusion).ok(),
            confusion,
        }
    }
}

/// Totals plus one row per claim type, in report column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_type: BTreeMap<ClaimType, RowMetrics>,
    pub total: RowMetrics,
}

/// Score predictions against the aligned claim records.
pub fn report(preds: &[bool], claims: &[ClaimRecord]) -> Result<MetricsReport, MetricsError> {
    if preds.len() != claims.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            gold: claims.len(),
        });
    }
    let mut total = Confusion::default();
    let mut per_type: BTreeMap<ClaimType, Confusion> = ClaimType::ALL
        .into_iter()
        .map(|t| (t, Confusion::default()))
        .collect();
    for (&pred, claim) in preds.iter().zip(claims) {
        total.record(pred, claim.label);
        for tag in &claim.types {
            per_type.get_mut(tag).unwrap().record(pred, claim.label);
        }
    }
    Ok(MetricsReport {
        per_type: per_type
            .into_iter()
            .map(|(t, c)| (t, RowMetrics::from_confusion(c)))
            .collect(),
        total: RowMetrics::from_confusion(total),
    })
}

impl MetricsReport {
    /// Aligned-column table with the five type columns plus Total;
    /// percentages to two decimal places, `-` for empty rows.
    pub fn render_table(&self) -> String {
        const WIDTH: usize = 13;
        let columns: Vec<(&str, &RowMetrics)> = ClaimType::ALL
            .iter()
            .map(|t| (t.column_name(), &self.per_type[t]))
            .chain(std::iter::once(("Total", &self.total)))
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:<10}", "");
        for (name, _) in &columns {
            let _ = write!(out, "{name:>WIDTH$}");
        }
        out.push('\n');

        let _ = write!(out, "{:<10}", "Claims");
        for (_, row) in &columns {
            let _ = write!(out, "{:>WIDTH$}", row.confusion.total());
        }
        out.push('\n');

        type Picker = fn(&Rates) -> f64;
        let rows: [(&str, Picker); 4] = [
            ("Accuracy", |r| r.accuracy),
            ("Precision", |r| r.precision),
            ("Recall", |r| r.recall),
            ("F1", |r| r.f1),
        ];
        for (label, pick) in rows {
            let _ = write!(out, "{label:<10}");
            for (_, row) in &columns {
                match row.rates {
                    Some(rates) => {
                        let _ = write!(out, "{:>WIDTH$.2}", pick(&rates) * 100.0);
                    }
                    None => {
                        let _ = write!(out, "{:>WIDTH$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    use super::*;
    use crate::dataset::Split;

    #[test]
    fn confusion_counts() {
        let c = confusion(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(
            c,
            Confusion {
                true_pos: 1,
                false_pos: 1,
                false_neg: 1,
                true_neg: 1
            }
        );

        let perfect = confusion(&[true, true, false, false], &[true, true, false, false]).unwrap();
        assert_eq!(
            perfect,
            Confusion {
                true_pos: 2,
                false_pos: 0,
                false_neg: 0,
                true_neg: 2
            }
        );

        let hand = confusion(
            &[true, true, true, false, false],
            &[true, true, false, true, false],
        )
        .unwrap();
        assert_eq!(
            hand,
            Confusion {
                true_pos: 2,
                false_pos: 1,
                false_neg: 1,
                true_neg: 1
            }
        );

        let all_missed = confusion(&[false, false, false], &[true, true, true]).unwrap();
        assert_eq!(
            all_missed,
            Confusion {
                true_pos: 0,
                false_pos: 0,
                false_neg: 3,
                true_neg: 0
            }
        );

        assert_eq!(
            confusion(&[true], &[]),
            Err(MetricsError::LengthMismatch { preds: 1, gold: 0 })
        );
    }

    #[test]
    fn rates_hand_cases() {
        let r = rates(&Confusion {
            true_pos: 2,
            false_pos: 1,
            false_neg: 1,
            true_neg: 1,
        })
        .unwrap();
        assert!((r.accuracy - 0.6).abs() < 1e-12);
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);

        let perfect = rates(&Confusion {
            true_pos: 3,
            false_pos: 0,
            false_neg: 0,
            true_neg: 2,
        })
        .unwrap();
        assert_eq!(
            (
                perfect.accuracy,
                perfect.precision,
                perfect.recall,
                perfect.f1
            ),
            (1.0, 1.0, 1.0, 1.0)
        );

        // zero-division convention
        let degenerate = rates(&Confusion {
            true_pos: 0,
            false_pos: 0,
            false_neg: 2,
            true_neg: 2,
        })
        .unwrap();
        assert_eq!(degenerate.precision, 0.0);
        assert_eq!(degenerate.recall, 0.0);
        assert_eq!(degenerate.f1, 0.0);
        assert!((degenerate.accuracy - 0.5).abs() < 1e-12);

        assert_eq!(
            rates(&Confusion::default()),
            Err(MetricsError::EmptyConfusion)
        );
    }

    fn claim(label: bool, tags: &[ClaimType]) -> ClaimRecord {
        ClaimRecord {
            id: String::new(),
            claim: String::new(),
            entities: vec!["E".into()],
            label,
            types: tags.iter().copied().collect::<BTreeSet<_>>(),
            split: Split::Test,
            evidence: None,
        }
    }

    #[test]
    fn multi_tag_claims_count_in_every_matching_row_once_in_total() {
        let claims = vec![
            claim(true, &[ClaimType::MultiHop, ClaimType::Negation]),
            claim(false, &[ClaimType::OneHop]),
        ];
        // misclassify the multi-tag claim
        let r = report(&[false, false], &claims).unwrap();
        assert_eq!(r.total.confusion.total(), 2);
        assert_eq!(r.total.confusion.false_neg, 1);
        assert_eq!(r.per_type[&ClaimType::MultiHop].confusion.false_neg, 1);
        assert_eq!(r.per_type[&ClaimType::Negation].confusion.false_neg, 1);
        assert_eq!(r.per_type[&ClaimType::OneHop].confusion.true_neg, 1);

        // per-type totals exceed the overall total on multi-tag inputs
        let per_type_sum: usize = r.per_type.values().map(|m| m.confusion.total()).sum();
        assert!(per_type_sum > r.total.confusion.total());
    }

    #[test]
    fn perfect_predictions_render_one_hundred() {
        let claims = vec![
            claim(true, &[ClaimType::Existence]),
            claim(false, &[ClaimType::Existence]),
        ];
        let r = report(&[true, false], &claims).unwrap();
        let table = r.render_table();
        assert!(table.contains("100.00"));
        let accuracy_line = table.lines().find(|l| l.starts_with("Accuracy")).unwrap();
        assert_eq!(accuracy_line.matches("100.00").count(), 2); // Existence and Total
        assert_eq!(accuracy_line.matches('-').count(), 4); // the four empty type rows
    }

    #[test]
    fn table_layout_has_five_type_columns_plus_total() {
        let r = report(&[], &[]).unwrap();
        let table = r.render_table();
        let header = table.lines().next().unwrap();
        for column in [
            "One-hop",
            "Conjunction",
            "Existence",
            "Multi-hop",
            "Negation",
            "Total",
        ] {
            assert!(header.contains(column), "missing column {column}");
        }
        let positions: Vec<usize> = [
            "One-hop",
            "Conjunction",
            "Existence",
            "Multi-hop",
            "Negation",
            "Total",
        ]
        .iter()
        .map(|c| header.find(c).unwrap())
        .collect();
        assert!(
            positions.windows(2).all(|w| w[0] < w[1]),
            "columns in order"
        );
    }

    #[test]
    fn total_accuracy_matches_total_confusion_exactly() {
        let claims: Vec<ClaimRecord> = (0..17)
            .map(|i| claim(i % 3 == 0, &[ClaimType::ALL[i % 5]]))
            .collect();
        let preds: Vec<bool> = (0..17).map(|i| i % 2 == 0).collect();
        let r = report(&preds, &claims).unwrap();
        let c = r.total.confusion;
        let expected = (c.true_pos + c.true_neg) as f64 / c.total() as f64;
        assert_eq!(r.total.rates.unwrap().accuracy, expected);
    }

    #[test]
    fn report_is_permutation_invariant() {
        let mut rng = StdRng::seed_from_u64(99);
        let claims: Vec<ClaimRecord> = (0..40)
            .map(|i| {
                claim(
                    i % 3 != 1,
                    &[ClaimType::ALL[i % 5], ClaimType::ALL[(i * 2) % 5]],
                )
            })
            .collect();
        let preds: Vec<bool> = (0..40).map(|i| i % 4 != 2).collect();
        let base = report(&preds, &claims).unwrap();

        let mut paired: Vec<(bool, ClaimRecord)> =
            preds.iter().copied().zip(claims.iter().cloned()).collect();
        paired.shuffle(&mut rng);
        let (shuffled_preds, shuffled_claims): (Vec<bool>, Vec<ClaimRecord>) =
            paired.into_iter().unzip();
        let shuffled = report(&shuffled_preds, &shuffled_claims).unwrap();
        assert_eq!(base, shuffled);
    }

    #[test]
    fn report_rejects_misaligned_input() {
        assert_eq!(
            report(&[true], &[]),
            Err(MetricsError::LengthMismatch { preds: 1, gold: 0 })
        );
    }
}
