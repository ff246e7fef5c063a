use std::path::PathBuf;

use glyphpress_core::rl::{group_advantages, group_terms, check_group, grpo_objective, Advantages};
use glyphpress_core::{GrpoParams, RewardGroup};
use serde_json::json;

use crate::args::RlcheckArgs;
use crate::error::CliError;
use crate::run::{stdout, RunManifest};

/// One JSON line per group, then a summary line with the objective over the
/// groups that were kept.
pub fn run(args: &RlcheckArgs, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    let params = GrpoParams::new(args.eps_low, args.eps_high, args.beta).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = manifest.read_text(&args.groups)?;
    let mut kept: Vec<RewardGroup> = Vec::new();
    let mut discarded = 0usize;
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = |e: String| CliError::Failed(format!("{}:{}: {e}", args.groups.display(), n + 1));
        let group: RewardGroup = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        let index = kept.len() + discarded;
        check_group(index, &group).map_err(|e| at(e.to_string()))?;
        let row = match group_advantages(&group.rewards).map_err(|e| at(e.to_string()))? {
            Advantages::Degenerate => {
                discarded += 1;
                json!({ "group": index, "verdict": "discard", "reason": "all rewards equal" })
            }
            Advantages::Standardized(_) => {
                let t = group_terms(index, &group, &params).map_err(|e| at(e.to_string()))?;
                kept.push(group);
                json!({
                    "group": index,
                    "verdict": "keep",
                    "advantages": t.advantages,
                    "weights": t.weights,
                    "clipped": t.clipped,
                    "kl": t.kl,
                    "value": t.value,
                })
            }
        };
        stdout(&row.to_string())?;
    }
    let objective = if kept.is_empty() {
        None
    } else {
        Some(grpo_objective(&kept, &params).map_err(CliError::failed)?.objective)
    };
    stdout(&json!({ "objective": objective, "kept": kept.len(), "discarded": discarded }).to_string())?;
    Ok(None)
}
