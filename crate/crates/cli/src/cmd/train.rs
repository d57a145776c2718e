use std::collections::BTreeMap;

use anyhow::Result;
use hybridsent::eval::aggregate;
use hybridsent::model::{save_checkpoint, Architecture, ArchitectureSpec};
use hybridsent::train::{run_repetitions, split_dataset};
use hybridsent::Exec;
use serde_json::json;

use super::{create_dir, resolve_config, slug, write_file};
use crate::data::{load_input, write_test_set};
use crate::opts::TrainArgs;

pub fn run(a: TrainArgs, exec: Exec) -> Result<()> {
    let mut cfg = resolve_config(&a.protocol)?;
    let data = load_input(&a.input)?;
    cfg.dataset = Some(data.source.clone());
    cfg.representation = data.representation;
    cfg.output_dir = Some(a.out.clone());
    let archs: Vec<Architecture> = match (a.arch.is_empty(), cfg.architecture) {
        (false, _) => a.arch.clone(),
        (true, Some(arch)) => vec![arch],
        (true, None) => Architecture::ALL.to_vec(),
    };
    if let [only] = archs[..] {
        cfg.architecture = Some(only);
    }

    create_dir(&a.out)?;
    cfg.write_snapshot(&a.out)?;
    let (train_set, test_set) = split_dataset(data.samples, cfg.split_ratio, cfg.split_seed)?;
    write_test_set(&a.out, &test_set, data.dims)?;

    for arch in archs {
        let spec = ArchitectureSpec::new(arch, data.representation);
        let dir = a.out.join(slug(arch.label()));
        create_dir(&dir)?;
        let reps = run_repetitions(
            spec,
            &cfg.hyperparams,
            data.dims,
            &train_set,
            &test_set,
            &cfg.train,
            exec,
            |_, _| {},
        )?;
        let mut runs = Vec::with_capacity(reps.len());
        for (i, rep) in reps.iter().enumerate() {
            let metrics = BTreeMap::from([
                ("accuracy".to_string(), rep.metrics.accuracy),
                ("precision".to_string(), rep.metrics.precision),
                ("recall".to_string(), rep.metrics.recall),
                ("best_epoch".to_string(), rep.history.best_epoch as f64),
                ("stop_epoch".to_string(), rep.history.stop_epoch as f64),
            ]);
            save_checkpoint(&rep.model, &dir.join(format!("rep{i}.ntc")), &metrics)?;
            write_file(&dir.join(format!("history{i}.csv")), rep.history.to_csv())?;
            runs.push(rep.metrics);
        }
        let report = aggregate(&runs)?;
        let summary = json!({
            "spec": spec,
            "seeds": reps.iter().map(|r| r.seed).collect::<Vec<_>>(),
            "runs": runs,
            "summary": report,
        });
        write_file(&dir.join("metrics.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        println!("{spec}: accuracy {}", report.accuracy.format(false));
    }
    Ok(())
}
