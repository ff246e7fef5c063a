//! Corpus in, manifest out.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use glyphpress_core::config::{sample, RenderConfig};
use glyphpress_core::GlyphMetrics;
use glyphpress_search::ValidationItem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::{ImageStore, Manifest, ManifestEntry, SegmentRef, Task};
use crate::samples::{
    make_generation_sample, make_interleaved_sample, make_ocr_sample, package_sft, GenerationMode, SampleError,
    Segment, SpanPolicy,
};

#[derive(Debug, Clone)]
pub struct Document {
    pub name: String,
    pub text: String,
}

/// Every `*.txt` file of a directory in name order, or a single file.
/// Documents without visible text are skipped.
pub fn load_corpus(path: &Path) -> io::Result<Vec<Document>> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut docs = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f)?;
        if text.chars().any(|c| !c.is_whitespace()) {
            let name = f.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            docs.push(Document { name, text });
        }
    }
    Ok(docs)
}

/// Relative weights of the three pre-training task families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub ocr: f64,
    pub interleave: f64,
    pub generation: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("mixture weights must be finite, non-negative and not all zero: {0:?}")]
pub struct MixtureError(pub Mixture);

impl Mixture {
    pub fn only(task: Task) -> Self {
        Mixture {
            ocr: (task == Task::Ocr) as u8 as f64,
            interleave: (task == Task::Interleave) as u8 as f64,
            generation: (task == Task::Generation) as u8 as f64,
        }
    }

    pub fn check(&self) -> Result<(), MixtureError> {
        let w = [self.ocr, self.interleave, self.generation];
        if w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().sum::<f64>() > 0.0 {
            Ok(())
        } else {
            Err(MixtureError(*self))
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> Task {
        const TASKS: [Task; 3] = [Task::Ocr, Task::Interleave, Task::Generation];
        TASKS[glyphpress_core::config::sample::pick(rng, &[self.ocr, self.interleave, self.generation])]
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub samples: usize,
    pub seed: u64,
    pub mixture: Mixture,
    pub span: SpanPolicy,
    /// Fixed config; when `None` each sample draws its own.
    pub config: Option<RenderConfig>,
}

/// What one sample will be; a pure function of the plan seed and index.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub index: usize,
    pub task: Task,
    pub doc: usize,
    pub seed: u64,
    pub config: RenderConfig,
    pub fraction: f64,
    pub mode: GenerationMode,
}

/// Job `index`, drawn from its own stream so plans of different lengths
/// share their common prefix.
pub fn job(plan: &Plan, docs: usize, index: usize) -> Result<Job, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(index as u64);
    let task = plan.mixture.pick(&mut rng);
    let doc = rng.gen_range(0..docs.max(1));
    let seed: u64 = rng.gen();
    let config_seed: u64 = rng.gen();
    let fraction = rng.gen_range(0.2..0.8);
    let mode = if rng.gen_bool(0.5) { GenerationMode::CompleteSuffix } else { GenerationMode::CompletePrefix };
    let config = match &plan.config {
        Some(c) => c.clone(),
        None => sample(config_seed, None).map_err(SampleError::from)?,
    };
    Ok(Job { index, task, doc, seed, config, fraction, mode })
}

fn images(store: &ImageStore, pages: &[glyphpress_core::PageImage]) -> io::Result<Vec<String>> {
    store.put_all(pages)
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Build the sample for `job` and store its images.
pub fn run_job(
    job: &Job,
    docs: &[Document],
    span: SpanPolicy,
    store: &ImageStore,
    metrics: &dyn GlyphMetrics,
) -> Result<ManifestEntry, JobError> {
    let text = &docs[job.doc].text;
    let c = &job.config;
    let (images, segments, target) = match job.task {
        Task::Ocr => {
            let s = make_ocr_sample(text, c, span, job.seed, metrics)?;
            let imgs = images(store, &s.pages)?;
            (imgs.clone(), vec![SegmentRef::Images { images: imgs }, SegmentRef::Target], s.target)
        }
        Task::Interleave => {
            let s = make_interleaved_sample(text, c, job.fraction, job.seed, metrics)?;
            let mut all = Vec::new();
            let mut segs = Vec::new();
            for seg in &s.segments {
                segs.push(match seg {
                    Segment::Text(t) => SegmentRef::Text { text: t.clone() },
                    Segment::Images(b) => {
                        let imgs = images(store, &b.pages)?;
                        all.extend(imgs.iter().cloned());
                        SegmentRef::Images { images: imgs }
                    }
                });
            }
            (all, segs, s.original)
        }
        Task::Generation => {
            let s = make_generation_sample(text, c, job.mode, job.fraction, job.seed, metrics)?;
            let imgs = images(store, &s.visible.pages)?;
            let shown = SegmentRef::Images { images: imgs.clone() };
            let segs = match s.mode {
                GenerationMode::CompleteSuffix => vec![shown, SegmentRef::Target],
                GenerationMode::CompletePrefix => vec![SegmentRef::Target, shown],
            };
            (imgs, segs, s.target)
        }
        Task::Sft => unreachable!("sft jobs come from packaged items"),
    };
    Ok(ManifestEntry {
        task: job.task,
        images,
        segments,
        target,
        config_fingerprint: c.fingerprint(),
        seed: job.seed,
    })
}

/// A validation item with the response to train on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftRecord {
    pub id: String,
    pub context: String,
    pub instruction: String,
    #[serde(default)]
    pub answer: String,
    pub response: String,
}

pub fn run_sft(
    record: &SftRecord,
    config: &RenderConfig,
    seed: u64,
    store: &ImageStore,
    metrics: &dyn GlyphMetrics,
) -> Result<ManifestEntry, JobError> {
    let item = ValidationItem {
        id: record.id.clone(),
        context: record.context.clone(),
        instruction: record.instruction.clone(),
        answer: record.answer.clone(),
        tag: None,
    };
    let s = package_sft(&item, config, &record.response, metrics)?;
    let imgs = images(store, &s.pages)?;
    Ok(ManifestEntry {
        task: Task::Sft,
        images: imgs.clone(),
        segments: vec![
            SegmentRef::Images { images: imgs },
            SegmentRef::Text { text: s.instruction },
            SegmentRef::Target,
        ],
        target: s.response,
        config_fingerprint: config.fingerprint(),
        seed,
    })
}

#[derive(Debug, Default, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub written: usize,
    /// Entries already in the manifest.
    pub skipped: usize,
    /// `(index, error)` of samples that could not be built.
    pub failed: Vec<(usize, String)>,
}

/// Build entries in parallel, `chunk` at a time, and append them in index
/// order.
pub fn emit<F>(count: usize, chunk: usize, manifest: &mut Manifest, build: F) -> io::Result<Summary>
where
    F: Fn(usize) -> Result<ManifestEntry, JobError> + Sync,
{
    let mut summary = Summary::default();
    let chunk = chunk.max(1);
    for start in (0..count).step_by(chunk) {
        let results: Vec<Result<ManifestEntry, JobError>> =
            (start..(start + chunk).min(count)).into_par_iter().map(&build).collect();
        for (i, r) in (start..).zip(results) {
            match r {
                Ok(entry) => {
                    if manifest.append(&entry)? {
                        summary.written += 1;
                    } else {
                        summary.skipped += 1;
                    }
                }
                Err(JobError::Io(e)) => return Err(e),
                Err(e) => summary.failed.push((i, e.to_string())),
            }
        }
    }
    Ok(summary)
}
