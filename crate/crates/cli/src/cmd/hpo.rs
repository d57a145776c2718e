use anyhow::{Context, Result};
use hybridsent::hpo::{optimize, training_objective, HpoSettings, SearchSpace};
use hybridsent::model::ArchitectureSpec;
use hybridsent::train::{split_dataset, TrainConfig};
use hybridsent::{Error, Exec};
use serde_json::json;

use super::{create_dir, read_json, resolve_config, write_file};
use crate::data::load_input;
use crate::opts::HpoArgs;

pub fn run(a: HpoArgs, exec: Exec) -> Result<()> {
    let mut cfg = resolve_config(&a.protocol)?;
    let arch = a
        .arch
        .or(cfg.architecture)
        .ok_or_else(|| Error::Config("hpo needs --arch or an architecture in --config".into()))?;
    let data = load_input(&a.input)?;
    cfg.dataset = Some(data.source.clone());
    cfg.representation = data.representation;
    cfg.architecture = Some(arch);
    cfg.output_dir = Some(a.out.clone());
    cfg.region_sizes_as_printed |= a.as_printed;
    cfg.hpo_trials = a.max_trials.unwrap_or(cfg.hpo_trials);
    cfg.hpo_objective = a.objective.unwrap_or(cfg.hpo_objective);
    cfg.validate()?;

    let spec = ArchitectureSpec::new(arch, data.representation);
    let space = match &a.space {
        Some(p) => read_json::<SearchSpace>(p)?,
        None => SearchSpace::for_spec(spec, cfg.region_sizes_as_printed),
    };
    create_dir(&a.out)?;
    cfg.write_snapshot(&a.out)?;
    // Tuning sees only the training portion; the test portion stays unseen.
    let (train_set, _) = split_dataset(data.samples, cfg.split_ratio, cfg.split_seed)?;

    let settings = HpoSettings {
        max_trials: cfg.hpo_trials,
        search_seed: a.search_seed,
        train_seed: cfg.train.seed,
        ..HpoSettings::default()
    };
    let ledger = a.out.join("trials.jsonl");
    let outcome = optimize(
        &space,
        |hp, seed| {
            let train_cfg = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            training_objective(spec, hp, data.dims, &train_set, &train_cfg, cfg.hpo_objective, exec)
        },
        &settings,
        Some(&ledger),
    )
    .with_context(|| format!("searching {} configurations for {spec}", space.size()))?;

    let best = &outcome.best;
    write_file(
        &a.out.join("best_hp.json"),
        serde_json::to_string_pretty(&best.config)? + "\n",
    )?;
    let summary = json!({
        "spec": spec,
        "objective": cfg.hpo_objective,
        "trials": outcome.trials.len(),
        "best_trial": best.index,
        "best_score": best.score,
    });
    write_file(&a.out.join("best.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!(
        "{spec}: best trial {} of {} scored {:.4}",
        best.index,
        outcome.trials.len(),
        best.score.unwrap_or(f64::NAN)
    );
    Ok(())
}
