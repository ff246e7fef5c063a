use std::path::{Path, PathBuf};

use glyphpress_core::EmbeddedFont;
use glyphpress_datagen::{
    emit, job, load_corpus, run_job, run_sft, ImageStore, Manifest, Mixture, Plan, SftRecord, Summary, Task,
};

use crate::args::{DatagenArgs, TaskArg};
use crate::error::CliError;
use crate::run::{create_dir, pretty, stdout, RunManifest};

fn sft_records(text: &str, path: &Path) -> Result<Vec<SftRecord>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Failed(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn mixture(args: &DatagenArgs) -> Result<Mixture, CliError> {
    let weights = [args.w_ocr, args.w_interleave, args.w_generation];
    let task = match args.task {
        TaskArg::Mix => {
            let [ocr, interleave, generation] = weights.map(|w| w.unwrap_or(1.0));
            let m = Mixture { ocr, interleave, generation };
            m.check().map_err(|e| CliError::Usage(e.to_string()))?;
            return Ok(m);
        }
        TaskArg::Ocr => Task::Ocr,
        TaskArg::Interleave => Task::Interleave,
        TaskArg::Generation => Task::Generation,
        TaskArg::Sft => Task::Sft,
    };
    if weights.iter().any(Option::is_some) {
        return Err(CliError::Usage("mixture weights only apply to --task mix".into()));
    }
    Ok(Mixture::only(task))
}

pub fn run(args: &DatagenArgs, manifest: &mut RunManifest, jobs: Option<u32>) -> Result<Option<PathBuf>, CliError> {
    manifest.seed("datagen", args.seed);
    let mixture = mixture(args)?;
    let config = args.config.as_deref().map(|p| manifest.config(p)).transpose()?;
    let out = create_dir(&args.out)?;
    let store = ImageStore::open(&out).map_err(CliError::io(&out))?;
    let manifest_path = out.join("manifest.jsonl");
    let mut entries = Manifest::open(&manifest_path).map_err(CliError::io(&manifest_path))?;
    let chunk = 4 * jobs.map_or_else(rayon::current_num_threads, |n| n as usize);
    let plan = |samples| Plan { samples, seed: args.seed, mixture, span: args.pages, config: config.clone() };

    let summary: Summary = if args.task == TaskArg::Sft {
        let text = manifest.read_text(&args.corpus)?;
        let records = sft_records(&text, &args.corpus)?;
        // Jobs only supply per-record seeds and configs here.
        let plan = Plan { mixture: Mixture::only(Task::Ocr), ..plan(args.samples.unwrap_or(records.len()).min(records.len())) };
        emit(plan.samples, chunk, &mut entries, |i| {
            let j = job(&plan, 1, i)?;
            run_sft(&records[i], &j.config, j.seed, &store, &EmbeddedFont)
        })
    } else {
        let docs = load_corpus(&args.corpus).map_err(CliError::io(&args.corpus))?;
        if docs.is_empty() {
            return Err(CliError::Failed(format!("{}: corpus has no text", args.corpus.display())));
        }
        for d in &docs {
            manifest.inputs.push(crate::run::FileDigest {
                path: d.name.clone(),
                sha256: crate::run::sha256_hex(d.text.as_bytes()),
            });
        }
        let plan = plan(args.samples.unwrap_or(docs.len()));
        emit(plan.samples, chunk, &mut entries, |i| {
            let j = job(&plan, docs.len(), i)?;
            run_job(&j, &docs, plan.span, &store, &EmbeddedFont)
        })
    }
    .map_err(CliError::io(&manifest_path))?;
    drop(entries);

    let bytes = std::fs::read(&manifest_path).map_err(CliError::io(&manifest_path))?;
    manifest.output(&manifest_path, &bytes);
    stdout(&pretty(&summary))?;
    if !summary.failed.is_empty() {
        for (i, e) in &summary.failed {
            eprintln!("sample {i}: {e}");
        }
        return Err(CliError::Failed(format!("{} of {} samples failed", summary.failed.len(), summary.failed.len() + summary.written + summary.skipped)));
    }
    Ok(Some(out.join("run_manifest.json")))
}
