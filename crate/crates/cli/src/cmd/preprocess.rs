use anyhow::Result;
use hybridsent::config::RunConfig;
use hybridsent::text::{clean_text, read_jsonl, write_jsonl, LabelSummary, RawExample, SlangDict};

use super::{create_dir, write_file};
use crate::opts::PreprocessArgs;

pub fn run(a: PreprocessArgs) -> Result<()> {
    let slang = match &a.slang {
        Some(p) => SlangDict::load(p)?,
        None => SlangDict::default(),
    };
    let cleaned = read_jsonl(&a.data)?
        .into_iter()
        .map(|ex| RawExample::new(clean_text(&ex.text, &slang), ex.label))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = LabelSummary::of(&cleaned);

    create_dir(&a.out)?;
    write_jsonl(&a.out.join("clean.jsonl"), &cleaned)?;
    write_file(&a.out.join("summary.txt"), format!("{summary}\n"))?;
    RunConfig {
        dataset: Some(a.data),
        output_dir: Some(a.out.clone()),
        ..RunConfig::default()
    }
    .write_snapshot(&a.out)?;
    println!("{summary}");
    Ok(())
}
