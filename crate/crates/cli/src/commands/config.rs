use std::path::PathBuf;

use glyphpress_core::config::sample::{sample_with, SamplingPolicy};
use glyphpress_core::config::{validate, RenderConfig};

use crate::args::{ConfigAction, ConfigArgs};
use crate::error::CliError;
use crate::run::{pretty, stdout, RunManifest};

pub fn run(args: &ConfigArgs, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    match &args.action {
        ConfigAction::Sample { seed, theme, policy, out } => {
            manifest.seed("config", *seed);
            let policy = match policy {
                Some(p) => {
                    let bytes = manifest.read(p)?;
                    SamplingPolicy::from_json(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
                }
                None => SamplingPolicy::default(),
            };
            let config = sample_with(*seed, theme.as_deref(), &policy).map_err(|e| CliError::Usage(e.to_string()))?;
            let bytes = config.save();
            match out {
                Some(path) => manifest.write(path, &bytes)?,
                None => stdout(String::from_utf8_lossy(&bytes).trim_end())?,
            }
            Ok(None)
        }
        ConfigAction::Validate { file } => {
            let bytes = manifest.read(file)?;
            let config = RenderConfig::load(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
            let report = validate(&config);
            stdout(&pretty(&report))?;
            if report.valid {
                Ok(None)
            } else {
                Err(CliError::InvalidConfig(report))
            }
        }
    }
}
