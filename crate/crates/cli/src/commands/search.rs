use std::fs;
use std::path::PathBuf;

use glyphpress_core::EmbeddedFont;
use glyphpress_search::engine::SearchError;
use glyphpress_search::eval::{ExactMatch, LegibilityMock, RemoteJudge, RemoteModel};
use glyphpress_search::landscape::{synthetic_space, HarnessEvaluator, SyntheticLandscape};
use glyphpress_search::{
    load_validation_set, run_search, CriticClient, Evaluator, FitnessPolicy, Harness, JsonlHistory, ModelClient,
    RemoteCritic, Scorer, SearchParams, SearchSpace,
};
use serde_json::json;

use crate::args::{PolicyKind, SearchArgs};
use crate::error::CliError;
use crate::run::{create_dir, pretty, stdout, RunManifest};

fn search_error(e: SearchError) -> CliError {
    match e {
        SearchError::PopulationTooSmall(_)
        | SearchError::TooManyElites { .. }
        | SearchError::BudgetTooSmall { .. }
        | SearchError::ZeroPatience
        | SearchError::Policy(_) => CliError::Usage(e.to_string()),
        other => CliError::failed(other),
    }
}

pub fn run(args: &SearchArgs, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    manifest.seed("search", args.seed);
    let policy = match args.policy {
        PolicyKind::Constrained => FitnessPolicy::Constrained { delta: args.delta },
        PolicyKind::Scalarized => FitnessPolicy::Scalarized { lambda: args.lambda, rho_norm: args.rho_norm },
    };
    policy.check().map_err(|e| CliError::Usage(e.to_string()))?;
    if args.elites >= args.population {
        return Err(CliError::Usage(format!(
            "--elites {} must be smaller than --population {}",
            args.elites, args.population
        )));
    }
    if args.budget < args.population {
        return Err(CliError::Usage(format!(
            "--budget {} is smaller than --population {}",
            args.budget, args.population
        )));
    }
    if args.valset.is_none() && !args.mock {
        return Err(CliError::Usage("--valset is required unless --mock is set".into()));
    }
    let remote = &args.remote;
    if args.mock && (remote.model_url.is_some() || remote.judge_url.is_some() || remote.critic_url.is_some()) {
        eprintln!("note: --mock ignores every remote endpoint");
    }

    let set = match &args.valset {
        Some(p) => {
            manifest.read(p)?;
            let set = load_validation_set(p).map_err(CliError::failed)?;
            if set.is_empty() {
                return Err(CliError::Failed(format!("{}: validation set is empty", p.display())));
            }
            set
        }
        None => Vec::new(),
    };
    let vtm = args.tokens.vtm()?;
    let tokenizer = args.tokens.tokenizer()?;

    let client: Box<dyn ModelClient> = if args.mock {
        Box::new(LegibilityMock::default())
    } else {
        let url = remote
            .model_url
            .as_deref()
            .ok_or_else(|| CliError::Usage("--model-url or GLYPHPRESS_MODEL_URL is required without --mock".into()))?;
        let endpoint = remote.endpoint(url);
        endpoint.probe().map_err(|e| CliError::Failed(format!("model endpoint {url} unreachable: {e}")))?;
        manifest.endpoints.insert("model".into(), url.to_string());
        Box::new(RemoteModel { endpoint })
    };
    let scorer: Box<dyn Scorer> = match remote.judge_url.as_deref().filter(|_| !args.mock) {
        Some(url) => {
            let endpoint = remote.endpoint(url);
            endpoint.probe().map_err(|e| CliError::Failed(format!("judge endpoint {url} unreachable: {e}")))?;
            manifest.endpoints.insert("judge".into(), url.to_string());
            Box::new(RemoteJudge { endpoint })
        }
        None => Box::new(ExactMatch),
    };
    let critic: Option<RemoteCritic> = remote.critic_url.as_deref().filter(|_| !args.mock).map(|url| {
        manifest.endpoints.insert("critic".into(), url.to_string());
        RemoteCritic { endpoint: remote.endpoint(url) }
    });

    let synthetic;
    let harness;
    let (evaluator, space): (&dyn Evaluator, SearchSpace) = if args.valset.is_none() {
        synthetic = SyntheticLandscape::default();
        (&synthetic, synthetic_space())
    } else {
        harness = HarnessEvaluator {
            harness: Harness {
                set: &set,
                client: client.as_ref(),
                scorer: scorer.as_ref(),
                vtm,
                tokenizer: tokenizer.as_ref(),
                metrics: &EmbeddedFont,
            },
        };
        (&harness, SearchSpace::full())
    };
    let params = SearchParams {
        population: args.population as usize,
        elites: args.elites as usize,
        patience: args.patience as usize,
        budget: args.budget as usize,
        policy,
        space,
        ..SearchParams::default()
    };

    let out = create_dir(&args.out)?;
    let history_path = out.join("history.jsonl");
    let (mut sink, resumed) = match &args.resume {
        Some(p) => {
            manifest.read(p)?;
            JsonlHistory::resume(p).map_err(|e| CliError::Failed(format!("{}: {e}", p.display())))?
        }
        None => (JsonlHistory::create(&history_path).map_err(CliError::io(&history_path))?, Vec::new()),
    };
    let outcome = run_search(
        args.seed,
        params,
        evaluator,
        critic.as_ref().map(|c| c as &dyn CriticClient),
        resumed,
        &mut sink,
    )
    .map_err(search_error)?;
    drop(sink);

    if let Some(p) = &args.resume {
        let same = fs::canonicalize(p).ok() == fs::canonicalize(&history_path).ok();
        if !same {
            fs::copy(p, &history_path).map_err(CliError::io(&history_path))?;
        }
    }
    let history = fs::read(&history_path).map_err(CliError::io(&history_path))?;
    manifest.output(&history_path, &history);
    manifest.write(&out.join("theta.json"), &outcome.best.config.save())?;

    let best = &outcome.best;
    let summary = json!({
        "fingerprint": best.fingerprint,
        "accuracy": best.accuracy,
        "rho": best.rho,
        "generations": outcome.generations,
        "evaluations": outcome.evaluations,
        "converged": outcome.converged,
    });
    stdout(&pretty(&summary))?;
    Ok(Some(out.join("run_manifest.json")))
}
