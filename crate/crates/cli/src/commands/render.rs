use std::path::PathBuf;

use glyphpress_core::layout::normalize_text;
use glyphpress_core::metrics::compression_report;
use glyphpress_core::{render_document, CompressionReport, EmbeddedFont, RenderConfig};
use rayon::prelude::*;

use crate::args::{RenderArgs, StatsArgs, TokenArgs};
use crate::error::CliError;
use crate::run::{create_dir, pretty, stdout, RunManifest};

fn report(
    text: &str,
    config: &RenderConfig,
    tokens: &TokenArgs,
) -> Result<(Vec<glyphpress_core::PageImage>, CompressionReport), CliError> {
    if normalize_text(text).is_empty() {
        return Err(CliError::Failed("empty context".into()));
    }
    let vtm = tokens.vtm()?;
    let tokenizer = tokens.tokenizer()?;
    let pages = render_document(text, config, &EmbeddedFont).map_err(CliError::failed)?;
    let report = compression_report(text, &pages, &vtm, tokenizer.as_ref()).map_err(CliError::failed)?;
    Ok((pages, report.with_config(config)))
}

pub fn render(args: &RenderArgs, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    let config = manifest.config(&args.config)?;
    let text = manifest.read_text(&args.input)?;
    let (pages, report) = report(&text, &config, &args.tokens)?;
    let out = create_dir(&args.out)?;
    let encoded: Vec<(Vec<u8>, Option<Vec<u8>>)> = pages
        .par_iter()
        .map(|p| {
            let layout = args.emit_layout.then(|| {
                let mut v = serde_json::to_vec_pretty(&*p.layout).expect("layout serializes");
                v.push(b'\n');
                v
            });
            (p.to_png(), layout)
        })
        .collect();
    for (i, (png, layout)) in encoded.iter().enumerate() {
        let stem = format!("page-{:04}", i + 1);
        manifest.write(&out.join(format!("{stem}.png")), png)?;
        if let Some(l) = layout {
            manifest.write(&out.join(format!("{stem}.layout.json")), l)?;
        }
    }
    manifest.write(&out.join("report.json"), format!("{}\n", pretty(&report)).as_bytes())?;
    stdout(&pretty(&report))?;
    Ok(Some(out.join("run_manifest.json")))
}

pub fn stats(args: &StatsArgs, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    let config = manifest.config(&args.config)?;
    let text = manifest.read_text(&args.input)?;
    let (_, report) = report(&text, &config, &args.tokens)?;
    stdout(&pretty(&report))?;
    Ok(None)
}
