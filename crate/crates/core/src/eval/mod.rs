//! Metrics, report tables and representation plots.

mod metrics;
mod plot;
mod report;
mod tsne;

pub use metrics::{aggregate, confusion, macro_metrics, metrics, ConfusionCounts, MetricsReport, RunMetrics, Summary};
pub use plot::{emit_plot, render_svg};
pub use report::{parse_table_csv, ReportTable, TableRow, TableStyle, MISSING_CELL};
pub use tsne::{
    conditional_affinities, joint_affinities, squared_distances, tsne, TsneConfig, TsneResult,
};
