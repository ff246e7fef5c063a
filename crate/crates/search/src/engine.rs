//! The generational search loop.

use std::collections::{HashMap, HashSet};

use glyphpress_core::config::{ConfigError, RenderConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::critic::{critic_propose, CriticClient, CriticRow};
use crate::fitness::{compare, fitness, FitnessKeys, FitnessPolicy, PolicyError, Scored};
use crate::history::{
    CandidateRecord, EventKind, EventRecord, HistoryRecord, HistorySink, Provenance,
};
use crate::ops::{crossover, mutate_in, SearchSpace, MAX_TRIES};

/// Accuracy and compression of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub rho: f64,
}

pub trait Evaluator: Send + Sync {
    fn evaluate(&self, config: &RenderConfig) -> Result<Evaluation, String>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub config: RenderConfig,
    pub fingerprint: String,
    pub accuracy: Option<f64>,
    pub rho: Option<f64>,
    pub failure: Option<String>,
    pub generation: usize,
    pub provenance: Provenance,
}

impl Candidate {
    pub fn new(config: RenderConfig, generation: usize, provenance: Provenance) -> Self {
        Candidate {
            fingerprint: config.fingerprint(),
            config,
            accuracy: None,
            rho: None,
            failure: None,
            generation,
            provenance,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.accuracy.is_some() || self.failure.is_some()
    }

    pub fn scored(&self) -> Scored<'_> {
        Scored {
            scores: self.accuracy.zip(self.rho).filter(|_| self.failure.is_none()),
            fingerprint: &self.fingerprint,
        }
    }

    fn from_record(r: &CandidateRecord) -> Self {
        Candidate {
            config: r.config.clone(),
            fingerprint: r.fingerprint.clone(),
            accuracy: r.accuracy,
            rho: r.rho,
            failure: r.failure.clone(),
            generation: r.generation,
            provenance: r.provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub population: usize,
    pub elites: usize,
    /// Generations without strict improvement before stopping.
    pub patience: usize,
    /// Maximum number of evaluations.
    pub budget: usize,
    /// Evaluated history entries re-entered into each new population.
    pub history_samples: usize,
    /// Fraction of offspring requested from the critic, when there is one.
    pub critic_share: f64,
    pub policy: FitnessPolicy,
    pub space: SearchSpace,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            population: 8,
            elites: 2,
            patience: 5,
            budget: 200,
            history_samples: 1,
            critic_share: 0.5,
            policy: FitnessPolicy::default(),
            space: SearchSpace::full(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("population must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("elites ({elites}) must be smaller than the population ({population})")]
    TooManyElites { elites: usize, population: usize },
    #[error("budget {budget} is smaller than the population {population}")]
    BudgetTooSmall { budget: usize, population: usize },
    #[error("patience must be positive")]
    ZeroPatience,
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("could not seed the population: {0}")]
    Seeding(#[from] ConfigError),
    #[error("only {found} distinct seed configurations after {tries} draws")]
    NotEnoughDistinct { found: usize, tries: usize },
    #[error("history record {0} differs from the resumed history; was it written with other settings?")]
    ReplayMismatch(usize),
    #[error("writing history: {0}")]
    Io(#[from] std::io::Error),
    #[error("every evaluation failed")]
    NoSuccess,
}

/// `size` distinct seed configurations; deterministic in `seed`.
pub fn init_population(seed: u64, size: usize, space: &SearchSpace) -> Result<Vec<Candidate>, SearchError> {
    if size < 2 {
        return Err(SearchError::PopulationTooSmall(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(size);
    let tries = size * 64;
    for _ in 0..tries {
        let c = Candidate::new(space.sample(rng.gen())?, 0, Provenance::Seeded);
        if seen.insert(c.fingerprint.clone()) {
            out.push(c);
            if out.len() == size {
                return Ok(out);
            }
        }
    }
    Err(SearchError::NotEnoughDistinct { found: out.len(), tries })
}

/// Progress marker compared lexicographically. In constrained mode a rise in
/// the best accuracy counts as progress even if the feasible set shrinks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMark {
    pub accuracy_ref: f64,
    pub keys: Option<FitnessKeys>,
}

impl BestMark {
    pub fn improves_on(&self, other: &BestMark) -> bool {
        match self.accuracy_ref.total_cmp(&other.accuracy_ref) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => match (self.keys, other.keys) {
                (Some(a), Some(b)) => a.cmp(&b).is_gt(),
                (Some(_), None) => true,
                _ => false,
            },
        }
    }
}

/// True when the last `patience` generations brought no strict improvement.
pub fn converged(marks: &[BestMark], patience: usize) -> bool {
    if patience == 0 || marks.len() <= patience {
        return false;
    }
    let last = marks.len() - 1;
    !marks[last].improves_on(&marks[last - patience])
}

pub struct SearchOutcome {
    pub best: Candidate,
    pub history: Vec<HistoryRecord>,
    pub generations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Records from an interrupted run of the same search.
#[derive(Default)]
struct Replay {
    records: Vec<HistoryRecord>,
    cache: HashMap<String, CandidateRecord>,
    critic: Vec<Result<String, String>>,
    critic_used: usize,
}

impl Replay {
    fn new(records: Vec<HistoryRecord>) -> Self {
        let mut cache = HashMap::new();
        let mut critic = Vec::new();
        for r in &records {
            match r {
                HistoryRecord::Candidate(c) => {
                    cache.insert(c.fingerprint.clone(), c.clone());
                }
                HistoryRecord::Event(e) => match e.kind {
                    EventKind::CriticReply => critic.push(Ok(e.detail.clone())),
                    EventKind::CriticError => critic.push(Err(e.detail.clone())),
                    EventKind::CriticFallback => {}
                },
            }
        }
        Replay { records, cache, critic, critic_used: 0 }
    }
}

/// Search state with a single owner; evaluations run in parallel but every
/// state change happens here, in a fixed order.
pub struct Search<'a> {
    params: SearchParams,
    evaluator: &'a dyn Evaluator,
    critic: Option<&'a dyn CriticClient>,
    sink: &'a mut dyn HistorySink,
    rng: ChaCha8Rng,
    replay: Replay,
    pub generation: usize,
    pub population: Vec<Candidate>,
    /// Every evaluated candidate, in evaluation order.
    pub evaluated: Vec<Candidate>,
    known: HashSet<String>,
    pub history: Vec<HistoryRecord>,
    pub marks: Vec<BestMark>,
}

impl<'a> Search<'a> {
    pub fn new(
        seed: u64,
        params: SearchParams,
        evaluator: &'a dyn Evaluator,
        critic: Option<&'a dyn CriticClient>,
        resumed: Vec<HistoryRecord>,
        sink: &'a mut dyn HistorySink,
    ) -> Result<Self, SearchError> {
        let p = &params;
        if p.population < 2 {
            return Err(SearchError::PopulationTooSmall(p.population));
        }
        if p.elites >= p.population {
            return Err(SearchError::TooManyElites { elites: p.elites, population: p.population });
        }
        if p.budget < p.population {
            return Err(SearchError::BudgetTooSmall { budget: p.budget, population: p.population });
        }
        if p.patience == 0 {
            return Err(SearchError::ZeroPatience);
        }
        p.policy.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let population = init_population(rng.gen(), params.population, &params.space)?;
        Ok(Search {
            params,
            evaluator,
            critic,
            sink,
            rng,
            replay: Replay::new(resumed),
            generation: 0,
            population,
            evaluated: Vec::new(),
            known: HashSet::new(),
            history: Vec::new(),
            marks: Vec::new(),
        })
    }

    fn emit(&mut self, record: HistoryRecord) -> Result<(), SearchError> {
        let index = self.history.len();
        match self.replay.records.get(index) {
            Some(old) if old.to_line() != record.to_line() => return Err(SearchError::ReplayMismatch(index)),
            Some(_) => {}
            None => self.sink.append(&record)?,
        }
        self.history.push(record);
        Ok(())
    }

    fn event(&mut self, kind: EventKind, detail: String) -> Result<(), SearchError> {
        let record = EventRecord {
            generation: self.generation,
            kind,
            detail,
            timestamp: self.history.len() as u64,
        };
        self.emit(HistoryRecord::Event(record))
    }

    pub fn evaluations(&self) -> usize {
        self.evaluated.len()
    }

    pub fn best_accuracy(&self) -> f64 {
        self.evaluated.iter().filter_map(|c| c.scored().scores.map(|s| s.0)).fold(0.0, f64::max)
    }

    fn keys(&self, c: &Candidate, best: f64) -> Option<FitnessKeys> {
        c.scored().scores.map(|(a, r)| fitness(a, r, best, &self.params.policy))
    }

    /// Evaluated candidates, best first.
    pub fn ranking(&self) -> Vec<&Candidate> {
        let best = self.best_accuracy();
        let mut v: Vec<&Candidate> = self.evaluated.iter().collect();
        v.sort_by(|a, b| compare(&a.scored(), &b.scored(), best, &self.params.policy));
        v
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.ranking().into_iter().find(|c| c.failure.is_none())
    }

    fn mark(&self) -> BestMark {
        let best = self.best_accuracy();
        let accuracy_ref = match self.params.policy {
            FitnessPolicy::Constrained { .. } => best,
            FitnessPolicy::Scalarized { .. } => 0.0,
        };
        BestMark { accuracy_ref, keys: self.best().and_then(|c| self.keys(c, best)) }
    }

    /// Evaluate the pending members of the population, within the budget.
    fn evaluate_population(&mut self) -> Result<(), SearchError> {
        let remaining = self.params.budget.saturating_sub(self.evaluations());
        let mut pending = 0;
        self.population.retain(|c| {
            if c.is_evaluated() {
                true
            } else {
                pending += 1;
                pending <= remaining
            }
        });
        let todo: Vec<usize> = (0..self.population.len()).filter(|&i| !self.population[i].is_evaluated()).collect();
        let results: Vec<Result<Evaluation, String>> = todo
            .par_iter()
            .map(|&i| {
                let c = &self.population[i];
                match self.replay.cache.get(&c.fingerprint) {
                    Some(r) => match (&r.failure, r.accuracy, r.rho) {
                        (Some(f), _, _) => Err(f.clone()),
                        (None, Some(accuracy), Some(rho)) => Ok(Evaluation { accuracy, rho }),
                        _ => Err("incomplete history record".to_string()),
                    },
                    None => self.evaluator.evaluate(&c.config),
                }
            })
            .collect();
        for (&i, result) in todo.iter().zip(results) {
            let c = &mut self.population[i];
            match result {
                Ok(e) if e.accuracy.is_finite() && e.rho.is_finite() => {
                    c.accuracy = Some(e.accuracy.clamp(0.0, 1.0));
                    c.rho = Some(e.rho);
                }
                Ok(e) => c.failure = Some(format!("non-finite evaluation {e:?}")),
                Err(msg) => c.failure = Some(msg),
            }
            c.generation = self.generation;
            self.known.insert(c.fingerprint.clone());
            self.evaluated.push(c.clone());
        }
        let best = self.best_accuracy();
        for &i in &todo {
            let c = &self.population[i];
            let record = CandidateRecord {
                generation: self.generation,
                fingerprint: c.fingerprint.clone(),
                config: c.config.clone(),
                accuracy: c.accuracy,
                rho: c.rho,
                failure: c.failure.clone(),
                fitness_keys: self.keys(c, best),
                provenance: c.provenance,
                timestamp: self.history.len() as u64,
            };
            self.emit(HistoryRecord::Candidate(record))?;
        }
        Ok(())
    }

    fn is_new(&self, fingerprint: &str, next: &[Candidate]) -> bool {
        !self.known.contains(fingerprint) && next.iter().all(|c| c.fingerprint != fingerprint)
    }

    /// Build the next population: elites, sampled history entries, then
    /// critic and heuristic offspring.
    fn breed(&mut self) -> Result<(), SearchError> {
        let best = self.best_accuracy();
        let policy = self.params.policy;
        let mut ranked: Vec<Candidate> = self.population.iter().filter(|c| c.failure.is_none()).cloned().collect();
        ranked.sort_by(|a, b| compare(&a.scored(), &b.scored(), best, &policy));
        let global: Vec<Candidate> = self.ranking().into_iter().filter(|c| c.failure.is_none()).cloned().collect();
        if global.is_empty() {
            // Nothing to breed from: reseed.
            let next_gen = self.generation + 1;
            let mut fresh = Vec::new();
            for _ in 0..self.params.population * 64 {
                let c = Candidate::new(self.params.space.sample(self.rng.gen())?, next_gen, Provenance::Seeded);
                if self.is_new(&c.fingerprint, &fresh) {
                    fresh.push(c);
                }
                if fresh.len() == self.params.population {
                    break;
                }
            }
            self.population = fresh;
            self.generation = next_gen;
            return Ok(());
        }

        let mut next: Vec<Candidate> = ranked.iter().take(self.params.elites).cloned().collect();

        // Promising history entries, rank-weighted among the global top.
        let pool: Vec<&Candidate> = global
            .iter()
            .take(2 * self.params.population)
            .filter(|c| next.iter().all(|n| n.fingerprint != c.fingerprint))
            .collect();
        let mut pool = pool;
        for _ in 0..self.params.history_samples.min(pool.len()) {
            let w: Vec<f64> = (0..pool.len()).map(|r| 1.0 / (r + 1) as f64).collect();
            let pick = glyphpress_core::config::sample::pick(&mut self.rng, &w);
            next.push(pool.remove(pick).clone());
        }

        // Parents: the best of this generation's ranking plus the global top.
        let mut parents: Vec<Candidate> = ranked.clone();
        for c in global.iter().take(self.params.population) {
            if parents.iter().all(|p| p.fingerprint != c.fingerprint) {
                parents.push(c.clone());
            }
        }
        parents.sort_by(|a, b| compare(&a.scored(), &b.scored(), best, &policy));
        parents.truncate((self.params.population / 2).max(self.params.elites).max(2));

        let next_gen = self.generation + 1;
        let needed = self.params.population.saturating_sub(next.len());

        if let Some(critic) = self.critic {
            let n = ((needed as f64) * self.params.critic_share).round() as usize;
            if n > 0 {
                let pop_rows: Vec<CriticRow<'_>> = ranked.iter().map(row).collect();
                let top_rows: Vec<CriticRow<'_>> = global.iter().take(5).map(row).collect();
                let recorded = self.replay.critic.get(self.replay.critic_used).cloned();
                self.replay.critic_used += 1;
                let proposals = critic_propose(&pop_rows, &top_rows, critic, &self.params.space, n, recorded);
                match &proposals.reply {
                    Some(Ok(text)) => self.event(EventKind::CriticReply, text.clone())?,
                    Some(Err(e)) => self.event(EventKind::CriticError, e.clone())?,
                    None => {}
                }
                let mut accepted = 0;
                for c in proposals.configs {
                    let cand = Candidate::new(c, next_gen, Provenance::Critic);
                    if self.is_new(&cand.fingerprint, &next) {
                        next.push(cand);
                        accepted += 1;
                    }
                }
                if accepted < n {
                    let why = proposals.shortfall.unwrap_or_else(|| "proposals duplicate known configs".into());
                    self.event(EventKind::CriticFallback, format!("{accepted} of {n} critic proposals used; {why}"))?;
                }
            }
        }

        let mut tries = 0;
        while next.len() < self.params.population && tries < MAX_TRIES * self.params.population {
            tries += 1;
            let a = tournament(&mut self.rng, &parents);
            let (config, provenance) = if parents.len() > 1 && self.rng.gen_bool(0.4) {
                let b = tournament(&mut self.rng, &parents);
                (crossover(&a.config, &b.config, self.rng.gen()), Provenance::Crossover)
            } else {
                (mutate_in(&a.config, &self.params.space, self.rng.gen()), Provenance::Mutation)
            };
            let cand = Candidate::new(config, next_gen, provenance);
            if self.is_new(&cand.fingerprint, &next) {
                next.push(cand);
            }
        }

        self.population = next;
        self.generation = next_gen;
        Ok(())
    }

    /// Evaluate, rank, and unless the run is over, breed the next
    /// population. Returns `false` once the budget is spent or the search
    /// has converged.
    pub fn step_generation(&mut self) -> Result<bool, SearchError> {
        self.evaluate_population()?;
        self.marks.push(self.mark());
        if self.evaluations() >= self.params.budget || converged(&self.marks, self.params.patience) {
            return Ok(false);
        }
        self.breed()?;
        if self.population.iter().all(Candidate::is_evaluated) {
            // No unseen configuration could be produced.
            return Ok(false);
        }
        Ok(true)
    }

    pub fn run(mut self) -> Result<SearchOutcome, SearchError> {
        while self.step_generation()? {}
        let converged = converged(&self.marks, self.params.patience);
        let best = self.best().cloned().ok_or(SearchError::NoSuccess)?;
        Ok(SearchOutcome {
            best,
            generations: self.generation + 1,
            evaluations: self.evaluations(),
            history: self.history,
            converged,
        })
    }
}

fn row(c: &Candidate) -> CriticRow<'_> {
    CriticRow { config: &c.config, accuracy: c.accuracy.unwrap_or(0.0), rho: c.rho.unwrap_or(0.0) }
}

/// Binary tournament on rank (parents are sorted best first).
fn tournament<'c, R: Rng>(rng: &mut R, parents: &'c [Candidate]) -> &'c Candidate {
    let i = rng.gen_range(0..parents.len());
    let j = rng.gen_range(0..parents.len());
    &parents[i.min(j)]
}

/// Run a search to completion. `resumed` holds the records of an earlier,
/// interrupted run with the same seed and parameters; they are replayed
/// instead of re-evaluated and are not written to `sink` again.
pub fn run_search(
    seed: u64,
    params: SearchParams,
    evaluator: &dyn Evaluator,
    critic: Option<&dyn CriticClient>,
    resumed: Vec<HistoryRecord>,
    sink: &mut dyn HistorySink,
) -> Result<SearchOutcome, SearchError> {
    Search::new(seed, params, evaluator, critic, resumed, sink)?.run()
}

/// Best candidate of a persisted history, as a [`Candidate`].
pub fn best_in_history(records: &[HistoryRecord], policy: &FitnessPolicy) -> Option<Candidate> {
    crate::history::best_of(records, policy).map(|r| Candidate::from_record(&r))
}
