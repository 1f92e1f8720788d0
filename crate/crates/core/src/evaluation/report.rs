use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::signals::StateLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a zero denominator forced a metric to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub micro: AverageRow,
    #[serde(rename = "macro")]
    pub macro_avg: AverageRow,
    pub weighted: AverageRow,
    /// Per-sample average; identical to micro for single-label data.
    pub samples: AverageRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub classes: Vec<(StateLabel, ClassMetrics)>,
    pub averages: Averages,
    pub overall_accuracy: f64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub fn class_metrics(cm: &ConfusionMatrix, class: StateLabel) -> ClassMetrics {
    let tp = cm.true_positives(class);
    let precision = ratio(tp, cm.predicted(class));
    let recall = ratio(tp, cm.support(class));
    let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
    ClassMetrics {
        precision: p,
        recall: r,
        f1: harmonic(p, r),
        support: cm.support(class),
        degenerate: precision.is_none() || recall.is_none() || p + r == 0.0,
    }
}

pub fn averaged_metrics(cm: &ConfusionMatrix) -> Averages {
    let total = cm.total();
    let per: Vec<ClassMetrics> = StateLabel::ALL.iter().map(|&c| class_metrics(cm, c)).collect();

    let tp = cm.trace();
    let fp: u64 = StateLabel::ALL.iter().map(|&c| cm.false_positives(c)).sum();
    let fneg: u64 = StateLabel::ALL.iter().map(|&c| cm.false_negatives(c)).sum();
    let mp = ratio(tp, tp + fp).unwrap_or(0.0);
    let mr = ratio(tp, tp + fneg).unwrap_or(0.0);
    let micro = AverageRow { precision: mp, recall: mr, f1: harmonic(mp, mr), support: total };

    let k = per.len() as f64;
    let macro_avg = AverageRow {
        precision: per.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per.iter().map(|m| m.recall).sum::<f64>() / k,
        f1: per.iter().map(|m| m.f1).sum::<f64>() / k,
        support: total,
    };

    let weigh = |f: fn(&ClassMetrics) -> f64| -> f64 {
        if total == 0 {
            return 0.0;
        }
        per.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64
    };
    let weighted = AverageRow {
        precision: weigh(|m| m.precision),
        recall: weigh(|m| m.recall),
        f1: weigh(|m| m.f1),
        support: total,
    };

    Averages { micro, macro_avg, weighted, samples: micro }
}

/// Accuracy `(TP + TN) / (TP + TN + FP + FN)`. With a class, that class is
/// the positive one; without, it is the multiclass trace / total.
pub fn overall_accuracy(cm: &ConfusionMatrix, class: Option<StateLabel>) -> f64 {
    let total = cm.total();
    let correct = match class {
        Some(c) => cm.true_positives(c) + cm.true_negatives(c),
        None => cm.trace(),
    };
    ratio(correct, total).unwrap_or(0.0)
}

impl ClassificationReport {
    pub fn from_matrix(cm: &ConfusionMatrix) -> Self {
        Self {
            classes: StateLabel::ALL.iter().map(|&c| (c, class_metrics(cm, c))).collect(),
            averages: averaged_metrics(cm),
            overall_accuracy: overall_accuracy(cm, None),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Rounds half-up to `decimals` places.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f + 0.5).floor() / f
}

const LABEL_WIDTH: usize = 12;

fn push_row(out: &mut String, label: &str, p: f64, r: f64, f1: f64, support: u64) {
    let v = |x: f64| format!("{:.4}", round_half_up(x, 4));
    let _ = writeln!(out, "{label:>LABEL_WIDTH$} {:>10} {:>10} {:>10} {support:>10}", v(p), v(r), v(f1));
}

/// Fixed-width table: one row per class, then micro, macro, weighted and
/// samples averages. Values are rounded half-up to four decimals.
pub fn render_report(report: &ClassificationReport) -> String {
    let mut out = String::new();
    let _ =
        writeln!(out, "{:>LABEL_WIDTH$} {:>10} {:>10} {:>10} {:>10}", "", "precision", "recall", "f1-score", "support");
    out.push('\n');
    for (label, m) in &report.classes {
        push_row(&mut out, label.name(), m.precision, m.recall, m.f1, m.support);
    }
    out.push('\n');
    let a = &report.averages;
    for (name, row) in
        [("micro avg", a.micro), ("macro avg", a.macro_avg), ("weighted avg", a.weighted), ("samples avg", a.samples)]
    {
        push_row(&mut out, name, row.precision, row.recall, row.f1, row.support);
    }
    out
}

/// One parsed line of a rendered report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedRow {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Reads back a table produced by [`render_report`].
pub fn parse_report(text: &str) -> Result<Vec<ParsedRow>> {
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 5 {
            return Err(Error::Format(format!("report line too short: {line:?}")));
        }
        let n = tokens.len();
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?}")));
        rows.push(ParsedRow {
            label: tokens[..n - 4].join(" "),
            precision: num(tokens[n - 4])?,
            recall: num(tokens[n - 3])?,
            f1: num(tokens[n - 2])?,
            support: tokens[n - 1].parse().map_err(|_| Error::Format(format!("bad support {:?}", tokens[n - 1])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use StateLabel::*;

    fn reference_matrix() -> ConfusionMatrix {
        ConfusionMatrix::from_counts([[410, 0, 0], [0, 1006, 4], [0, 15, 40]])
    }

    fn r4(x: f64) -> f64 {
        round_half_up(x, 4)
    }

    #[test]
    fn per_class_rows() {
        let cm = reference_matrix();
        let d = class_metrics(&cm, Defective);
        assert_eq!((r4(d.precision), r4(d.recall), r4(d.f1), d.support), (0.9091, 0.7273, 0.8081, 55));
        let n = class_metrics(&cm, Nominal);
        assert_eq!((r4(n.precision), r4(n.recall), r4(n.f1), n.support), (1.0, 1.0, 1.0, 410));
        let c = class_metrics(&cm, Current);
        assert_eq!((r4(c.precision), r4(c.recall), r4(c.f1)), (0.9853, 0.9960, 0.9906));
    }

    #[test]
    fn average_rows() {
        let a = averaged_metrics(&reference_matrix());
        assert_eq!((r4(a.macro_avg.precision), r4(a.macro_avg.recall), r4(a.macro_avg.f1)), (0.9648, 0.9078, 0.9329));
        assert_eq!((r4(a.weighted.precision), r4(a.weighted.recall), r4(a.weighted.f1)), (0.9866, 0.9871, 0.9864));
        assert_eq!((r4(a.micro.precision), r4(a.micro.recall), r4(a.micro.f1)), (0.9871, 0.9871, 0.9871));
        assert_eq!(a.samples, a.micro);
    }

    #[test]
    fn accuracy_variants() {
        let cm = reference_matrix();
        assert_eq!(overall_accuracy(&cm, None), 1456.0 / 1475.0);
        assert_eq!(r4(overall_accuracy(&cm, None)), 0.9871);
        assert_eq!(cm.true_negatives(Defective), 1416);
        assert_eq!(overall_accuracy(&cm, Some(Defective)), 1456.0 / 1475.0);
        let diag = ConfusionMatrix::from_counts([[3, 0, 0], [0, 4, 0], [0, 0, 5]]);
        assert_eq!(overall_accuracy(&diag, None), 1.0);
        for c in StateLabel::ALL {
            assert_eq!(overall_accuracy(&diag, Some(c)), 1.0);
        }
    }

    #[test]
    fn empty_class_is_degenerate() {
        let cm = ConfusionMatrix::from_counts([[5, 0, 0], [0, 0, 0], [1, 0, 2]]);
        let m = class_metrics(&cm, Current);
        assert_eq!((m.precision, m.recall, m.f1, m.support), (0.0, 0.0, 0.0, 0));
        assert!(m.degenerate);
        assert!(!class_metrics(&cm, Nominal).degenerate);
    }

    #[test]
    fn rendered_table_matches_reference() {
        let text = render_report(&ClassificationReport::from_matrix(&reference_matrix()));
        let rows = parse_report(&text).unwrap();
        let expect = [
            ("nominal", 1.0, 1.0, 1.0, 410),
            ("current", 0.9853, 0.9960, 0.9906, 1010),
            ("defective", 0.9091, 0.7273, 0.8081, 55),
            ("micro avg", 0.9871, 0.9871, 0.9871, 1475),
            ("macro avg", 0.9648, 0.9078, 0.9329, 1475),
            ("weighted avg", 0.9866, 0.9871, 0.9864, 1475),
            ("samples avg", 0.9871, 0.9871, 0.9871, 1475),
        ];
        assert_eq!(rows.len(), expect.len());
        for (row, (l, p, r, f, s)) in rows.iter().zip(expect) {
            assert_eq!((row.label.as_str(), row.precision, row.recall, row.f1, row.support), (l, p, r, f, s));
        }
        assert!(text.contains("   defective     0.9091     0.7273     0.8081         55"));
    }

    #[test]
    fn degenerate_report_renders_zeros() {
        let cm = ConfusionMatrix::from_counts([[4, 0, 0], [0, 0, 0], [0, 0, 0]]);
        let text = render_report(&ClassificationReport::from_matrix(&cm));
        assert!(text.contains("     current     0.0000     0.0000     0.0000          0"));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(0.12345, 4), 0.1235);
        assert_eq!(round_half_up(0.99995, 4), 1.0);
        assert_eq!(round_half_up(0.5, 0), 1.0);
    }

    // Independent per-class TP/FP/FN enumeration over an explicit sample list.
    fn brute(cm: &ConfusionMatrix) -> Vec<(f64, f64, f64)> {
        let mut samples = Vec::new();
        for t in 0..3 {
            for p in 0..3 {
                for _ in 0..cm.counts[t][p] {
                    samples.push((t, p));
                }
            }
        }
        (0..3)
            .map(|c| {
                let tp = samples.iter().filter(|&&(t, p)| t == c && p == c).count() as f64;
                let fp = samples.iter().filter(|&&(t, p)| t != c && p == c).count() as f64;
                let fnn = samples.iter().filter(|&&(t, p)| t == c && p != c).count() as f64;
                let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
                let r = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
                let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
                (p, r, f)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn metric_identities(cells in proptest::collection::vec(0u64..3, 9)) {
            let mut counts = [[0u64; 3]; 3];
            for (k, v) in cells.iter().enumerate() {
                counts[k / 3][k % 3] = *v;
            }
            let cm = ConfusionMatrix::from_counts(counts);
            prop_assume!(cm.total() >= 1);
            let a = averaged_metrics(&cm);
            let acc = cm.trace() as f64 / cm.total() as f64;
            prop_assert_eq!(a.micro.precision, acc);
            prop_assert_eq!(a.micro.recall, acc);
            prop_assert!((a.weighted.recall - acc).abs() < 1e-12);
            prop_assert_eq!(StateLabel::ALL.iter().map(|&c| cm.support(c)).sum::<u64>(), cm.total());
            for (c, (p, r, f)) in StateLabel::ALL.iter().zip(brute(&cm)) {
                let m = class_metrics(&cm, *c);
                prop_assert!((m.precision - p).abs() < 1e-12);
                prop_assert!((m.recall - r).abs() < 1e-12);
                prop_assert!((m.f1 - f).abs() < 1e-12);
            }
        }
    }
}
