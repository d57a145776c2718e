use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with label 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts with the roles of the two classes exchanged.
    pub fn swapped(&self) -> Self {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn confusion(predictions: &[u8], labels: &[u8]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::shape("confusion", &[predictions.len()], &[labels.len()]));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        if l > 1 {
            return Err(Error::InvalidLabel(l as i64));
        }
        if p > 1 {
            return Err(Error::InvalidLabel(p as i64));
        }
        match (p, l) {
            (1, 1) => c.tp += 1,
            (1, 0) => c.fp += 1,
            (0, 1) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// A zero denominator forced precision to 0.
    #[serde(default)]
    pub precision_undefined: bool,
    /// A zero denominator forced recall to 0.
    #[serde(default)]
    pub recall_undefined: bool,
}

impl RunMetrics {
    pub fn new(accuracy: f64, precision: f64, recall: f64) -> Self {
        RunMetrics {
            accuracy,
            precision,
            recall,
            precision_undefined: false,
            recall_undefined: false,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.precision_undefined || self.recall_undefined
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Accuracy plus positive-class precision and recall.
pub fn metrics(c: &ConfusionCounts) -> Result<RunMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyInput("metrics"));
    }
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    Ok(RunMetrics {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision,
        recall,
        precision_undefined,
        recall_undefined,
    })
}

/// Accuracy plus precision and recall averaged over both classes.
pub fn macro_metrics(c: &ConfusionCounts) -> Result<RunMetrics> {
    let pos = metrics(c)?;
    let neg = metrics(&c.swapped())?;
    Ok(RunMetrics {
        accuracy: pos.accuracy,
        precision: 0.5 * (pos.precision + neg.precision),
        recall: 0.5 * (pos.recall + neg.recall),
        precision_undefined: pos.precision_undefined || neg.precision_undefined,
        recall_undefined: pos.recall_undefined || neg.recall_undefined,
    })
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("summary"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(Summary { mean, std })
    }

    /// `"0.8500 ± 0.0707"`, or `"0,8500 ± 0,0707"` with a decimal comma.
    pub fn format(&self, decimal_comma: bool) -> String {
        let s = format!("{:.4} ± {:.4}", self.mean, self.std);
        if decimal_comma {
            s.replace('.', ",")
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub runs: usize,
    pub accuracy: Summary,
    pub precision: Summary,
    pub recall: Summary,
    /// Some run had an undefined precision or recall.
    pub degenerate: bool,
}

pub fn aggregate(runs: &[RunMetrics]) -> Result<MetricsReport> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("aggregate"));
    }
    let col = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    Ok(MetricsReport {
        runs: runs.len(),
        accuracy: Summary::of(&col(|r| r.accuracy))?,
        precision: Summary::of(&col(|r| r.precision))?,
        recall: Summary::of(&col(|r| r.recall))?,
        degenerate: runs.iter().any(RunMetrics::is_degenerate),
    })
}
