use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{Context, Result};
use hybridsent::config::RunConfig;
use hybridsent::eval::{aggregate, confusion, macro_metrics, metrics, ReportTable, RunMetrics, TableStyle};
use hybridsent::model::{load_checkpoint, ArchitectureSpec, Sample};
use hybridsent::{Error, Exec};

use super::{create_dir, write_file};
use crate::data::{find_checkpoints, load_test_set, Dataset};
use crate::opts::EvalArgs;

fn score(samples: &[Sample<f32>], preds: &[u8], macro_average: bool) -> Result<RunMetrics> {
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let c = confusion(preds, &labels)?;
    Ok(if macro_average { macro_metrics(&c)? } else { metrics(&c)? })
}

pub fn run(a: EvalArgs, exec: Exec) -> Result<()> {
    let checkpoints = find_checkpoints(&a.checkpoints)?;
    let tests: Vec<Dataset> = a.test.iter().map(|p| load_test_set(p)).collect::<Result<_>>()?;

    let mut by_spec: BTreeMap<(usize, usize), (ArchitectureSpec, Vec<RunMetrics>)> = BTreeMap::new();
    let mut runs_csv = String::from("checkpoint,representation,model,seed,accuracy,precision,recall\n");
    for path in &checkpoints {
        let (model, meta) = load_checkpoint::<f32>(path).with_context(|| format!("loading {}", path.display()))?;
        let test = tests
            .iter()
            .find(|t| t.representation == meta.spec.representation && t.dims == meta.dims)
            .ok_or_else(|| {
                Error::Config(format!(
                    "no test set matches {} ({} input, {:?})",
                    path.display(),
                    meta.spec.representation,
                    meta.dims
                ))
            })?;
        let inputs: Vec<_> = test.samples.iter().map(|s| &s.input).collect();
        let preds = model.predict(&inputs, exec)?;
        let m = score(&test.samples, &preds, a.macro_average)?;
        let _ = writeln!(
            runs_csv,
            "{},{},{},{},{},{},{}",
            path.display(),
            meta.spec.representation.label(),
            meta.spec.kind.label(),
            meta.seed,
            m.accuracy,
            m.precision,
            m.recall
        );
        let key = (meta.spec.representation as usize, meta.spec.kind as usize);
        by_spec.entry(key).or_insert_with(|| (meta.spec, Vec::new())).1.push(m);
    }

    let mut table = ReportTable::new();
    for (spec, runs) in by_spec.into_values() {
        table.insert(spec, aggregate(&runs)?);
    }
    let style = TableStyle {
        decimal_comma: a.decimal_comma,
    };
    let text = table.render_text(style);

    create_dir(&a.out)?;
    write_file(&a.out.join("report.txt"), &text)?;
    write_file(&a.out.join("report.csv"), table.render_csv(style)?)?;
    write_file(&a.out.join("runs.csv"), runs_csv)?;
    RunConfig {
        dataset: a.test.first().cloned(),
        output_dir: Some(a.out.clone()),
        ..RunConfig::default()
    }
    .write_snapshot(&a.out)?;
    print!("{text}");
    Ok(())
}
