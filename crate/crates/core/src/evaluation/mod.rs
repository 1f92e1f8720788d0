//! Confusion matrices and classification reports.

mod confusion;
mod report;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use report::{
    averaged_metrics, class_metrics, overall_accuracy, parse_report, render_report, round_half_up, AverageRow,
    Averages, ClassMetrics, ClassificationReport, ParsedRow,
};
