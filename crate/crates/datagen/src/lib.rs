//! Training data with layout-derived ground truth.
//!
//! OCR, interleaved and completion samples for pre-training, plus packaged
//! reasoning samples for fine-tuning. Targets are read back from glyph
//! provenance rather than recognized from pixels, so they are exact.

pub mod manifest;
pub mod pipeline;
pub mod samples;

pub use manifest::{ImageStore, Manifest, ManifestEntry, SegmentRef, Task};
pub use pipeline::{emit, job, load_corpus, run_job, run_sft, Document, Job, JobError, Mixture, Plan, SftRecord, Summary};
pub use samples::{
    make_generation_sample, make_interleaved_sample, make_ocr_sample, package_sft, GenerationMode, GenerationSample,
    ImageBundle, InterleavedSample, OcrSample, SampleError, Segment, SftSample, SpanPolicy,
};
