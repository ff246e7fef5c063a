//! Manifest JSONL and the content-addressed image store behind it.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use glyphpress_core::PageImage;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ocr,
    Interleave,
    Generation,
    Sft,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Ocr => "ocr",
            Task::Interleave => "interleave",
            Task::Generation => "generation",
            Task::Sft => "sft",
        }
    }
}

/// One element of a sample in reading order. `Target` marks where the
/// target text belongs relative to the visible content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentRef {
    Text { text: String },
    Images { images: Vec<String> },
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub task: Task,
    /// Every image of the sample, in reading order.
    pub images: Vec<String>,
    pub segments: Vec<SegmentRef>,
    pub target: String,
    pub config_fingerprint: String,
    pub seed: u64,
}

/// PNG files named by the SHA-256 of their bytes, so identical pages are
/// stored once across samples and configs.
#[derive(Debug, Clone)]
pub struct ImageStore {
    root: PathBuf,
}

impl ImageStore {
    pub const DIR: &'static str = "images";

    /// Store under `out/images/`.
    pub fn open(out: &Path) -> io::Result<Self> {
        fs::create_dir_all(out.join(Self::DIR))?;
        Ok(ImageStore { root: out.to_path_buf() })
    }

    /// Write `image` unless present; returns its path relative to the output
    /// directory.
    pub fn put(&self, image: &PageImage) -> io::Result<String> {
        let png = image.to_png();
        let rel = format!("{}/{}.png", Self::DIR, hex::encode(Sha256::digest(&png)));
        let path = self.root.join(&rel);
        if !path.exists() {
            let tmp = path.with_extension(format!("png.tmp{}", std::process::id()));
            fs::write(&tmp, &png)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(rel)
    }

    pub fn put_all(&self, pages: &[PageImage]) -> io::Result<Vec<String>> {
        pages.iter().map(|p| self.put(p)).collect()
    }
}

/// Append-only manifest that skips entries it already holds.
pub struct Manifest {
    file: File,
    seen: HashSet<[u8; 32]>,
    pub existing: usize,
}

fn line_key(line: &str) -> [u8; 32] {
    Sha256::digest(line.trim_end().as_bytes()).into()
}

impl Manifest {
    /// Open or create `path`. An interrupted trailing line is discarded.
    pub fn open(path: &Path) -> io::Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e),
        };
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        let mut seen = HashSet::new();
        for (i, line) in text[..keep].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            serde_json::from_str::<ManifestEntry>(line).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            seen.insert(line_key(line));
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        file.set_len(keep as u64)?;
        Ok(Manifest { file, existing: seen.len(), seen })
    }

    /// Append `entry`; `false` when an identical entry is already present.
    pub fn append(&mut self, entry: &ManifestEntry) -> io::Result<bool> {
        let line = serde_json::to_string(entry).map_err(io::Error::other)?;
        if !self.seen.insert(line_key(&line)) {
            return Ok(false);
        }
        self.file.write_all(format!("{line}\n").as_bytes())?;
        self.file.flush()?;
        Ok(true)
    }
}

pub fn read_manifest(path: &Path) -> io::Result<Vec<ManifestEntry>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
        .collect()
}
