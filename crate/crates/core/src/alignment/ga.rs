//! Mutation-plus-elitism search over window-respecting frame mappings.
//!
//! A mapping is encoded by per-row offsets `o(i) = r(i) - i`. Strictly
//! increasing `r` with `r(i) in [i, i + d]` is exactly a non-decreasing `o`
//! with values in `[0, d]`, which makes repair after a mutation a clamp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::diff::DiffMatrix;
use super::lis::longest_nondecreasing_subsequence;
use super::{Alignment, AlignmentMethod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    /// Number of generations after the initial population.
    pub generations: usize,
    /// Per-row probability of mutating a free row in an offspring.
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 32,
            generations: 200,
            mutation_rate: 0.2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Error::InvalidConfig("generations must be at least 1".into()));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mutation_rate must lie in (0, 1], got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Individual {
    offsets: Vec<usize>,
    fitness: f64,
}

impl Individual {
    /// Higher fitness wins; equal fitness prefers smaller reference indices.
    fn beats(&self, other: &Individual) -> bool {
        self.fitness > other.fitness || (self.fitness == other.fitness && self.offsets < other.offsets)
    }
}

struct Search<'a> {
    dm: &'a DiffMatrix,
    lo: Vec<usize>,
    hi: Vec<usize>,
    anchored: Vec<bool>,
    free: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(dm: &'a DiffMatrix, anchors: &[(usize, usize)]) -> Self {
        let n = dm.distorted_len();
        let d = dm.drops();
        let mut lo = vec![0; n];
        let mut hi = vec![d; n];
        let mut anchored = vec![false; n];
        for &(row, off) in anchors {
            anchored[row] = true;
            lo[row] = off;
            hi[row] = off;
        }
        let mut floor = 0;
        for i in 0..n {
            if anchored[i] {
                floor = lo[i];
            } else {
                lo[i] = floor;
            }
        }
        let mut ceil = d;
        for i in (0..n).rev() {
            if anchored[i] {
                ceil = hi[i];
            } else {
                hi[i] = ceil;
            }
        }
        let free = (0..n).filter(|&i| !anchored[i]).collect();
        Self {
            dm,
            lo,
            hi,
            anchored,
            free,
        }
    }

    fn evaluate(&self, offsets: Vec<usize>) -> Individual {
        let total: f64 = offsets.iter().enumerate().map(|(i, &o)| self.dm.at_offset(i, o)).sum();
        Individual {
            fitness: total / offsets.len() as f64,
            offsets,
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Individual {
        let n = self.lo.len();
        let mut offsets = self.lo.clone();
        let mut i = 0;
        while i < n {
            if self.anchored[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && !self.anchored[i] {
                i += 1;
            }
            let (lo, hi) = (self.lo[start], self.hi[start]);
            let segment = &mut offsets[start..i];
            for o in segment.iter_mut() {
                *o = rng.gen_range(lo..=hi);
            }
            segment.sort_unstable();
        }
        self.evaluate(offsets)
    }

    /// Resamples one row anywhere in its window and clamps its neighbors back
    /// into non-decreasing order. Anchors only seed the initial population, so
    /// a wrong best match can still be displaced.
    fn mutate_row(&self, offsets: &mut [usize], row: usize, rng: &mut ChaCha8Rng) {
        let v = rng.gen_range(0..=self.dm.drops());
        offsets[row] = v;
        for o in offsets[row + 1..].iter_mut().take_while(|o| **o < v) {
            *o = v;
        }
        for o in offsets[..row].iter_mut().rev().take_while(|o| **o > v) {
            *o = v;
        }
    }

    /// Mutates free rows at `rate` and anchored rows at `rate / 4`, always
    /// touching at least one row.
    fn offspring(&self, parent: &Individual, rate: f64, rng: &mut ChaCha8Rng) -> Individual {
        let mut offsets = parent.offsets.clone();
        let mut mutated = false;
        for row in 0..offsets.len() {
            let p = if self.anchored[row] { rate / 4.0 } else { rate };
            if rng.gen::<f64>() < p {
                self.mutate_row(&mut offsets, row, rng);
                mutated = true;
            }
        }
        if !mutated {
            let row = self.free[rng.gen_range(0..self.free.len())];
            self.mutate_row(&mut offsets, row, rng);
        }
        self.evaluate(offsets)
    }
}

fn fittest(population: &[Individual]) -> &Individual {
    population
        .iter()
        .fold(&population[0], |best, ind| if ind.beats(best) { ind } else { best })
}

/// Result of a GA run together with the best fitness after each generation.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub alignment: Alignment,
    /// Entry 0 is the initial population; one entry per generation follows.
    pub history: Vec<f64>,
}

/// Searches for the mapping with the highest mean PSNR. Every initial
/// individual holds the rows of `anchor` at their best match; later
/// generations may move them.
///
/// Anchor rows whose best offsets would force a decreasing offset sequence
/// are released to the search, since no valid mapping can honor them all.
pub fn refine_with_ga(dm: &DiffMatrix, anchor: &[usize], ga: &GaConfig) -> Result<Alignment> {
    refine_with_ga_traced(dm, anchor, ga).map(|o| o.alignment)
}

pub fn refine_with_ga_traced(dm: &DiffMatrix, anchor: &[usize], ga: &GaConfig) -> Result<GaOutcome> {
    ga.validate()?;
    let n = dm.distorted_len();
    let m = dm.reference_len();
    if anchor.iter().any(|&r| r >= n) || anchor.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InconsistentAlignment(
            "anchor rows must be sorted and in range".into(),
        ));
    }

    let offsets: Vec<usize> = anchor.iter().map(|&r| dm.best_index()[r] - r).collect();
    let feasible: Vec<(usize, usize)> = longest_nondecreasing_subsequence(&offsets)
        .into_iter()
        .map(|k| (anchor[k], offsets[k]))
        .collect();
    let search = Search::new(dm, &feasible);

    if search.free.is_empty() {
        let best = search.evaluate(feasible.iter().map(|&(_, o)| o).collect());
        let alignment = to_alignment(m, &best, AlignmentMethod::ExactLis)?;
        return Ok(GaOutcome {
            alignment,
            history: vec![best.fitness],
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ga.seed);
    let mut population: Vec<Individual> = (0..ga.population_size).map(|_| search.random(&mut rng)).collect();
    let mut best = fittest(&population).clone();
    let mut history = Vec::with_capacity(ga.generations + 1);
    history.push(best.fitness);

    for _ in 0..ga.generations {
        let mut next = Vec::with_capacity(ga.population_size);
        next.push(best.clone());
        while next.len() < ga.population_size {
            let a = &population[rng.gen_range(0..population.len())];
            let b = &population[rng.gen_range(0..population.len())];
            let parent = if a.beats(b) { a } else { b };
            next.push(search.offspring(parent, ga.mutation_rate, &mut rng));
        }
        population = next;
        let candidate = fittest(&population);
        if candidate.beats(&best) {
            best = candidate.clone();
        }
        history.push(best.fitness);
    }

    Ok(GaOutcome {
        alignment: to_alignment(m, &best, AlignmentMethod::GaRefined)?,
        history,
    })
}

fn to_alignment(m: usize, ind: &Individual, method: AlignmentMethod) -> Result<Alignment> {
    let mapping = ind.offsets.iter().enumerate().map(|(i, &o)| i + o).collect();
    Alignment::from_mapping(m, mapping, method, ind.fitness)
}
