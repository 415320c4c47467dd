//! NSGA-II engine over binary feature masks.
//!
//! All three objectives are maximized. The generational loop follows the
//! classic elitist scheme: binary tournament on (rank, crowding), uniform
//! crossover, bit-flip mutation, parent+offspring merge, front-by-front
//! refill with crowding truncation, and a Pareto archive updated every
//! generation. Crowding increments are raw adjacent differences by default;
//! a range-normalized variant sits behind `normalized_crowding`.
//!
//! Determinism: every stochastic decision draws from a stream derived from
//! (seed, generation, index), so results do not depend on thread scheduling
//! or fitness evaluation order.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

const TAG_INIT: u64 = 0x696e6974; // initial population bits
const TAG_PAIR: u64 = 0x70616972; // per-generation, per-pair variation draws

/// Objectives assigned to empty masks and failed fitness evaluations.
/// Dominated by every genuine evaluation with non-negative accuracies.
pub const PENALTY: [f64; 3] = [0.0, 0.0, -1.0];

/// Which accuracy the search promotes and which it suppresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Maximize recognition, minimize identification (the default search).
    #[default]
    SuppressIdentity,
    /// Reversed: maximize identification, minimize recognition.
    SuppressActivity,
}

/// Binary feature-selection mask; bit i selects catalog feature i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMask {
    pub bits: Vec<bool>,
}

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        FeatureMask { bits }
    }

    pub fn full(n: usize) -> Self {
        FeatureMask { bits: vec![true; n] }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in indices {
            bits[i] = true;
        }
        FeatureMask { bits }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        FeatureMask {
            bits: (0..n).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// One population member with its evaluation and sorting bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Individual {
    pub mask: FeatureMask,
    pub objectives: [f64; 3],
    /// Front number, 1-based; front 1 is the non-dominated set.
    pub rank: usize,
    pub crowding: f64,
}

/// Non-dominated solutions accumulated over the whole run, deduplicated by
/// mask (first-seen evaluation kept).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParetoArchive {
    members: Vec<Individual>,
}

impl ParetoArchive {
    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Best archived value of objective `m`.
    pub fn best(&self, m: usize) -> Option<f64> {
        self.members
            .iter()
            .map(|ind| ind.objectives[m])
            .max_by(f64::total_cmp)
    }

    /// True when no member dominates another.
    pub fn is_pure(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates(&b.objectives, &a.objectives))
        })
    }

    /// Merge candidates and keep the non-dominated, mask-distinct subset.
    pub fn update(&mut self, candidates: &[Individual]) {
        let mut pool: Vec<Individual> = Vec::with_capacity(self.members.len() + candidates.len());
        let mut seen: HashSet<Vec<bool>> = HashSet::new();
        for ind in self.members.iter().chain(candidates.iter()) {
            if seen.insert(ind.mask.bits.clone()) {
                pool.push(ind.clone());
            }
        }
        self.members = pool
            .iter()
            .filter(|a| {
                !pool
                    .iter()
                    .any(|b| dominates(&b.objectives, &a.objectives))
            })
            .cloned()
            .collect();
        debug_assert!(self.is_pure());
    }
}

/// Engine settings. `seed` has no default on purpose: configs must pin it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaConfig {
    pub n_features: usize,
    pub population_size: usize,
    pub max_generations: usize,
    #[serde(default = "default_crossover_rate")]
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means 1/n_features.
    #[serde(default)]
    pub mutation_rate: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub objective_mode: ObjectiveMode,
    #[serde(default)]
    pub normalized_crowding: bool,
}

fn default_crossover_rate() -> f64 {
    0.9
}

impl GaConfig {
    pub fn new(n_features: usize, population_size: usize, max_generations: usize, seed: u64) -> Self {
        GaConfig {
            n_features,
            population_size,
            max_generations,
            crossover_rate: default_crossover_rate(),
            mutation_rate: None,
            seed,
            objective_mode: ObjectiveMode::default(),
            normalized_crowding: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::InvalidConfig("n_features must be >= 1".into()));
        }
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::InvalidConfig(format!(
                "crossover_rate {} outside [0, 1]",
                self.crossover_rate
            )));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::InvalidConfig(format!(
                    "mutation_rate {m} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn effective_mutation_rate(&self) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / self.n_features as f64)
    }
}

/// Pareto dominance under maximization: `a` is >= everywhere and > somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Deb's fast non-dominated sort; returns fronts as index lists, front 1 first.
/// The fronts partition the population.
pub fn fast_nondominated_sort<O: AsRef<[f64]>>(objectives: &[O]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n]; // i dominates these
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(objectives[i].as_ref(), objectives[j].as_ref()) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distances for one front. Boundary members per objective get +inf;
/// interior members accumulate the adjacent-neighbor objective differences,
/// raw by default or divided by the objective's range when `normalized`.
pub fn crowding_distance<O: AsRef<[f64]>>(objectives: &[O], normalized: bool) -> Vec<f64> {
    let n = objectives.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let arity = objectives[0].as_ref().len();
    let mut distance = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..arity {
        let value = |i: usize| objectives[i].as_ref()[m];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = value(order[n - 1]) - value(order[0]);
        let scale = if normalized && range > 0.0 { range } else { 1.0 };
        for w in 1..n - 1 {
            let gap = value(order[w + 1]) - value(order[w - 1]);
            distance[order[w]] += gap / scale;
        }
    }
    distance
}

/// Binary tournament on (rank, crowding); full tie resolved by a fair coin.
/// Returns the index of the winner.
pub fn binary_tournament<R: Rng>(population: &[Individual], rng: &mut R) -> usize {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    let (ra, rb) = (population[a].rank, population[b].rank);
    if ra != rb {
        return if ra < rb { a } else { b };
    }
    let (ca, cb) = (population[a].crowding, population[b].crowding);
    if ca != cb {
        return if ca > cb { a } else { b };
    }
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// Uniform crossover: with probability `rate` the pair recombines, exchanging
/// each bit with probability 1/2; otherwise the children are clones.
pub fn crossover<R: Rng>(
    p1: &FeatureMask,
    p2: &FeatureMask,
    rng: &mut R,
    rate: f64,
) -> (FeatureMask, FeatureMask) {
    debug_assert_eq!(p1.len(), p2.len());
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if rng.gen::<f64>() < rate {
        for i in 0..c1.bits.len() {
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut c1.bits[i], &mut c2.bits[i]);
            }
        }
    }
    (c1, c2)
}

/// Independent bit-flip with probability `rate` per position.
pub fn mutate<R: Rng>(mask: &FeatureMask, rng: &mut R, rate: f64) -> FeatureMask {
    FeatureMask {
        bits: mask
            .bits
            .iter()
            .map(|&b| if rng.gen::<f64>() < rate { !b } else { b })
            .collect(),
    }
}

#[derive(Serialize)]
struct TelemetryLine {
    generation: usize,
    best_o1: f64,
    best_o2: f64,
    best_o3: f64,
    archive_size: usize,
    wall_ms: f64,
}

/// Run the full generational loop and return the Pareto archive.
pub fn evolve<F>(config: &GaConfig, fitness: F) -> Result<ParetoArchive>
where
    F: Fn(&FeatureMask) -> Result<[f64; 3]> + Sync,
{
    evolve_logged(config, fitness, None)
}

/// `evolve` with an optional JSON-lines telemetry sink (one line per
/// generation: best objectives, archive size, wall time). Telemetry is the
/// only place wall-clock values ever appear, keeping primary outputs
/// byte-reproducible.
pub fn evolve_logged<F>(
    config: &GaConfig,
    fitness: F,
    mut log: Option<&mut dyn Write>,
) -> Result<ParetoArchive>
where
    F: Fn(&FeatureMask) -> Result<[f64; 3]> + Sync,
{
    config.validate()?;
    let pop_size = config.population_size;
    let mutation_rate = config.effective_mutation_rate();

    let started = Instant::now();
    let masks: Vec<FeatureMask> = (0..pop_size)
        .map(|i| {
            let mut rng = seeds::stream_rng(config.seed, &[TAG_INIT, i as u64]);
            FeatureMask::random(config.n_features, &mut rng)
        })
        .collect();
    let mut population = evaluate_all(masks, &fitness);
    assign_rank_and_crowding(&mut population, config.normalized_crowding);

    let mut archive = ParetoArchive::default();
    update_archive(&mut archive, &population);
    emit_telemetry(&mut log, 0, &archive, started.elapsed().as_secs_f64() * 1e3)?;

    for generation in 1..=config.max_generations {
        let gen_started = Instant::now();
        let mut offspring_masks = Vec::with_capacity(pop_size);
        let pairs = pop_size.div_ceil(2);
        for pair in 0..pairs {
            let mut rng =
                seeds::stream_rng(config.seed, &[TAG_PAIR, generation as u64, pair as u64]);
            let p1 = binary_tournament(&population, &mut rng);
            let p2 = binary_tournament(&population, &mut rng);
            let (c1, c2) = crossover(
                &population[p1].mask,
                &population[p2].mask,
                &mut rng,
                config.crossover_rate,
            );
            offspring_masks.push(mutate(&c1, &mut rng, mutation_rate));
            if offspring_masks.len() < pop_size {
                offspring_masks.push(mutate(&c2, &mut rng, mutation_rate));
            }
        }
        let offspring = evaluate_all(offspring_masks, &fitness);

        let mut merged = population;
        merged.extend(offspring);
        population = environmental_selection(merged, pop_size, config.normalized_crowding);

        update_archive(&mut archive, &population);
        emit_telemetry(
            &mut log,
            generation,
            &archive,
            gen_started.elapsed().as_secs_f64() * 1e3,
        )?;
    }
    Ok(archive)
}

/// Evaluate masks in parallel; empty masks and fitness failures take the
/// penalty triple without touching the fitness function.
fn evaluate_all<F>(masks: Vec<FeatureMask>, fitness: &F) -> Vec<Individual>
where
    F: Fn(&FeatureMask) -> Result<[f64; 3]> + Sync,
{
    masks
        .into_par_iter()
        .map(|mask| {
            let objectives = if mask.count_ones() == 0 {
                PENALTY
            } else {
                fitness(&mask).unwrap_or(PENALTY)
            };
            Individual {
                mask,
                objectives,
                rank: 0,
                crowding: 0.0,
            }
        })
        .collect()
}

fn assign_rank_and_crowding(population: &mut [Individual], normalized: bool) {
    let objectives: Vec<[f64; 3]> = population.iter().map(|ind| ind.objectives).collect();
    for (front_idx, front) in fast_nondominated_sort(&objectives).iter().enumerate() {
        let front_objs: Vec<[f64; 3]> = front.iter().map(|&i| objectives[i]).collect();
        let crowd = crowding_distance(&front_objs, normalized);
        for (&i, &c) in front.iter().zip(&crowd) {
            population[i].rank = front_idx + 1;
            population[i].crowding = c;
        }
    }
}

/// Fill the next population front by front from the 2P merged pool; the
/// overflowing front is truncated by descending crowding (ties keep the
/// lower merged index, so the outcome is deterministic).
fn environmental_selection(
    mut merged: Vec<Individual>,
    pop_size: usize,
    normalized: bool,
) -> Vec<Individual> {
    assign_rank_and_crowding(&mut merged, normalized);
    let objectives: Vec<[f64; 3]> = merged.iter().map(|ind| ind.objectives).collect();
    let fronts = fast_nondominated_sort(&objectives);

    let mut keep: Vec<usize> = Vec::with_capacity(pop_size);
    for front in fronts {
        if keep.len() + front.len() <= pop_size {
            keep.extend(front);
            if keep.len() == pop_size {
                break;
            }
        } else {
            let mut by_crowding = front;
            by_crowding.sort_by(|&a, &b| {
                merged[b]
                    .crowding
                    .total_cmp(&merged[a].crowding)
                    .then(a.cmp(&b))
            });
            by_crowding.truncate(pop_size - keep.len());
            keep.extend(by_crowding);
            break;
        }
    }
    let mut keep_flags = vec![false; merged.len()];
    for &i in &keep {
        keep_flags[i] = true;
    }
    let mut flags = keep_flags.into_iter();
    merged.retain(|_| flags.next().unwrap());
    merged
}

fn update_archive(archive: &mut ParetoArchive, population: &[Individual]) {
    let front1: Vec<Individual> = population
        .iter()
        .filter(|ind| ind.rank == 1)
        .cloned()
        .collect();
    archive.update(&front1);
}

fn emit_telemetry(
    log: &mut Option<&mut dyn Write>,
    generation: usize,
    archive: &ParetoArchive,
    wall_ms: f64,
) -> Result<()> {
    let Some(w) = log.as_deref_mut() else {
        return Ok(());
    };
    let line = TelemetryLine {
        generation,
        best_o1: archive.best(0).unwrap_or(f64::NAN),
        best_o2: archive.best(1).unwrap_or(f64::NAN),
        best_o3: archive.best(2).unwrap_or(f64::NAN),
        archive_size: archive.len(),
        wall_ms,
    };
    serde_json::to_writer(&mut *w, &line)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dominance_definition() {
        assert!(dominates(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]));
        assert!(!dominates(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]));
        assert!(!dominates(&[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0]));
        assert!(!dominates(&[0.0, 2.0, 0.0], &[2.0, 0.0, 0.0]));
        assert!(dominates(&[1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]));
    }

    #[test]
    fn sort_identical_objectives_single_front() {
        let objs = vec![[1.0, 2.0, 3.0]; 7];
        let fronts = fast_nondominated_sort(&objs);
        assert_eq!(fronts, vec![(0..7).collect::<Vec<_>>()]);
    }

    #[test]
    fn sort_strict_chain_gives_singletons() {
        let objs: Vec<[f64; 3]> = (0..5).map(|i| [i as f64; 3]).collect();
        let fronts = fast_nondominated_sort(&objs);
        assert_eq!(fronts, vec![vec![4], vec![3], vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn sort_partitions_population() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let objs: Vec<[f64; 3]> = (0..60)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..1.0)))
            .collect();
        let fronts = fast_nondominated_sort(&objs);
        let mut all: Vec<usize> = fronts.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..60).collect::<Vec<_>>());
        // Front k must not dominate anything in earlier fronts.
        for (k, front) in fronts.iter().enumerate() {
            for &i in front {
                for earlier in &fronts[..k] {
                    for &j in earlier {
                        assert!(!dominates(&objs[i], &objs[j]));
                    }
                }
            }
        }
    }

    #[test]
    fn crowding_hand_example() {
        let objs = [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]];
        let d = crowding_distance(&objs, false);
        assert_eq!(d[0], f64::INFINITY);
        assert_eq!(d[1], 2.0);
        assert_eq!(d[2], f64::INFINITY);
    }

    #[test]
    fn crowding_small_fronts_all_infinite() {
        assert_eq!(
            crowding_distance(&[[0.3, 0.7]], false),
            vec![f64::INFINITY]
        );
        assert_eq!(
            crowding_distance(&[[0.3, 0.7], [0.1, 0.2]], false),
            vec![f64::INFINITY; 2]
        );
    }

    #[test]
    fn crowding_duplicates_get_zero_increments() {
        // Three identical interior points between two boundaries: the middle
        // duplicate sees equal neighbors on both sides in every objective.
        let objs = [[0.0, 0.0], [0.5, 0.5], [0.5, 0.5], [0.5, 0.5], [1.0, 1.0]];
        let d = crowding_distance(&objs, false);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn crowding_normalized_variant() {
        let objs = [[0.0, 10.0], [1.0, 5.0], [2.0, 0.0]];
        let raw = crowding_distance(&objs, false);
        let norm = crowding_distance(&objs, true);
        assert_eq!(raw[1], 2.0 + 10.0);
        assert_eq!(norm[1], 1.0 + 1.0);
    }

    fn individual(rank: usize, crowding: f64) -> Individual {
        Individual {
            mask: FeatureMask::full(4),
            objectives: [0.0; 3],
            rank,
            crowding,
        }
    }

    #[test]
    fn tournament_prefers_rank_then_crowding() {
        // Index 1 loses every mixed contest on rank; it can only return from
        // self-contests, which happen with probability 1/4.
        let pop = vec![individual(1, 0.0), individual(2, 100.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut wins = [0usize; 2];
        for _ in 0..2_000 {
            wins[binary_tournament(&pop, &mut rng)] += 1;
        }
        assert!(wins[1] < 700, "rank-2 won {} times", wins[1]);

        // Equal rank: larger crowding wins mixed contests.
        let pop = vec![individual(1, f64::INFINITY), individual(1, 1.0)];
        let mut wins = [0usize; 2];
        for _ in 0..2_000 {
            wins[binary_tournament(&pop, &mut rng)] += 1;
        }
        assert!(wins[1] < 700, "low-crowding won {} times", wins[1]);
    }

    #[test]
    fn tournament_full_tie_is_fair() {
        let pop = vec![individual(1, 1.0), individual(1, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut wins = [0usize; 2];
        for _ in 0..10_000 {
            wins[binary_tournament(&pop, &mut rng)] += 1;
        }
        let share = wins[0] as f64 / 10_000.0;
        assert!((share - 0.5).abs() < 0.03, "share {share}");
    }

    #[test]
    fn crossover_identical_parents() {
        let p = FeatureMask::new(vec![true, false, true, true, false]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (a, b) = crossover(&p, &p, &mut rng, 1.0);
            assert_eq!(a, p);
            assert_eq!(b, p);
        }
    }

    #[test]
    fn crossover_preserves_bit_multiset() {
        let p1 = FeatureMask::new(vec![true; 16]);
        let p2 = FeatureMask::new(vec![false; 16]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (a, b) = crossover(&p1, &p2, &mut rng, 1.0);
        for i in 0..16 {
            assert_ne!(a.bits[i], b.bits[i]);
        }
        assert_eq!(a.count_ones() + b.count_ones(), 16);
    }

    #[test]
    fn mutation_rate_extremes() {
        let m = FeatureMask::new(vec![true, false, true]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(mutate(&m, &mut rng, 0.0), m);
        let flipped = mutate(&m, &mut rng, 1.0);
        assert_eq!(flipped.bits, vec![false, true, false]);
    }

    fn popcount_fitness(mask: &FeatureMask) -> crate::error::Result<[f64; 3]> {
        let n = mask.len() as f64;
        let pc = mask.count_ones() as f64;
        Ok([pc / n, 1.0 - pc / n, 0.0])
    }

    #[test]
    fn evolve_popcount_archive_is_pure_and_spans() {
        let cfg = GaConfig::new(20, 24, 15, 11);
        let archive = evolve(&cfg, popcount_fitness).unwrap();
        assert!(archive.is_pure());
        assert!(!archive.is_empty());
        let counts: HashSet<usize> = archive
            .members()
            .iter()
            .map(|ind| ind.mask.count_ones())
            .collect();
        assert!(counts.len() > 5, "span {counts:?}");
        // Masks are pairwise distinct.
        let distinct: HashSet<&Vec<bool>> =
            archive.members().iter().map(|i| &i.mask.bits).collect();
        assert_eq!(distinct.len(), archive.len());
    }

    #[test]
    fn evolve_zero_generations_keeps_initial_front() {
        // Total order by popcount: the archive must hold exactly the masks
        // sharing the best popcount of the initial population.
        let fitness = |mask: &FeatureMask| {
            let pc = mask.count_ones() as f64;
            Ok([pc, pc, pc])
        };
        let cfg = GaConfig::new(16, 12, 0, 21);
        let archive = evolve(&cfg, fitness).unwrap();
        assert!(!archive.is_empty());
        let counts: HashSet<usize> = archive
            .members()
            .iter()
            .map(|ind| ind.mask.count_ones())
            .collect();
        assert_eq!(counts.len(), 1);
        assert!(archive.is_pure());
    }

    #[test]
    fn evolve_is_deterministic() {
        let cfg = GaConfig::new(24, 16, 10, 7);
        let a = evolve(&cfg, popcount_fitness).unwrap();
        let b = evolve(&cfg, popcount_fitness).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.members().iter().zip(b.members()) {
            assert_eq!(x.mask, y.mask);
            assert_eq!(x.objectives, y.objectives);
        }
    }

    #[test]
    fn evolve_never_calls_fitness_on_empty_mask_and_penalizes_failures() {
        // Small mask length makes empty masks frequent; the closure would
        // panic if one ever reached it. Masks with bit 0 set fail outright
        // and must be penalized without aborting the run.
        let fitness = |mask: &FeatureMask| {
            assert!(mask.count_ones() > 0, "fitness called on empty mask");
            if mask.bits[0] {
                return Err(Error::Data("injected failure".into()));
            }
            popcount_fitness(mask)
        };
        let cfg = GaConfig::new(3, 16, 8, 13);
        let archive = evolve(&cfg, fitness).unwrap();
        assert!(!archive.is_empty());
        for ind in archive.members() {
            assert_ne!(ind.objectives, PENALTY);
        }
    }

    #[test]
    fn telemetry_shows_nondecreasing_bests() {
        let cfg = GaConfig::new(20, 20, 12, 3);
        let mut buf: Vec<u8> = Vec::new();
        evolve_logged(&cfg, popcount_fitness, Some(&mut buf)).unwrap();
        let lines: Vec<serde_json::Value> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 13); // generation 0 plus 12
        for key in ["best_o1", "best_o2", "best_o3"] {
            let series: Vec<f64> = lines.iter().map(|v| v[key].as_f64().unwrap()).collect();
            for w in series.windows(2) {
                assert!(w[1] >= w[0], "{key} decreased: {series:?}");
            }
        }
        for (g, line) in lines.iter().enumerate() {
            assert_eq!(line["generation"].as_u64().unwrap() as usize, g);
            assert!(line["archive_size"].as_u64().unwrap() > 0);
        }
    }

    #[test]
    fn archive_update_dedups_and_keeps_first_seen() {
        let mut archive = ParetoArchive::default();
        let mask = FeatureMask::new(vec![true, false]);
        let first = Individual {
            mask: mask.clone(),
            objectives: [1.0, 1.0, 1.0],
            rank: 1,
            crowding: 0.0,
        };
        let second = Individual {
            mask,
            objectives: [2.0, 2.0, 2.0],
            rank: 1,
            crowding: 0.0,
        };
        archive.update(&[first]);
        archive.update(&[second]);
        assert_eq!(archive.len(), 1);
        assert_eq!(archive.members()[0].objectives, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn config_validation_and_mandatory_seed() {
        assert!(GaConfig::new(0, 10, 5, 1).validate().is_err());
        assert!(GaConfig::new(10, 1, 5, 1).validate().is_err());
        let mut bad = GaConfig::new(10, 10, 5, 1);
        bad.crossover_rate = 1.5;
        assert!(bad.validate().is_err());
        bad.crossover_rate = 0.9;
        bad.mutation_rate = Some(-0.1);
        assert!(bad.validate().is_err());

        let missing_seed = r#"{"n_features": 5, "population_size": 10, "max_generations": 2}"#;
        assert!(serde_json::from_str::<GaConfig>(missing_seed).is_err());
        let ok = r#"{"n_features": 5, "population_size": 10, "max_generations": 2, "seed": 42}"#;
        let cfg: GaConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.crossover_rate, 0.9);
        assert_eq!(cfg.mutation_rate, None);
        assert_eq!(cfg.objective_mode, ObjectiveMode::SuppressIdentity);
    }
}
