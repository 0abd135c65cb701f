//! From a 3D model to uniformly sampled orthant walks.
//!
//! [`Model::build`] runs the set-up phase (half-space, grammar, generating
//! function values). Sampling draws 1D meanders in a length window, lifts
//! each atom to its 3D source step and keeps the walks that never leave the
//! first orthant. Conditioned on its length, an accepted walk is distributed
//! proportionally to its weight.
//!
//! The module also holds the naive baseline (i.i.d. steps, restart on exit)
//! and the exact endpoint counts used to check both samplers.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::boltzmann::{
    evaluate_gf, evaluate_near_singularity, rng_from_seed, worker_seed, BoltzmannSampler,
    GfEvaluation,
};
use crate::error::{Error, Result};
use crate::grammar::{build_meander_grammar, Grammar, Symbol};
use crate::projection::{
    analyze_1d, minimize_inventory, project_stepset, projection_vector, rationalize, Growth1D,
    IntegerProjection, Minimizer, ProjectionVector, StepSet1D, DEFAULT_MAX_DEN,
    DEFAULT_MINIMIZE_TOL, UNIT_LOG_EPS,
};
use crate::stats::{chi_square, rmse, ChiSquare};
use crate::stepset::{Drift3, Step3, WeightedStepSet3};
use crate::SampledWord;

pub type Point3 = [i64; 3];

/// A walk from the origin.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Walk3D {
    pub steps: Vec<Step3>,
}

impl Walk3D {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Prefix sums, starting with the origin.
    pub fn positions(&self) -> Vec<Point3> {
        let mut p = [0i64; 3];
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(p);
        for s in &self.steps {
            p = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
            out.push(p);
        }
        out
    }

    pub fn endpoint(&self) -> Point3 {
        self.steps
            .iter()
            .fold([0; 3], |p, s| [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz])
    }

    pub fn in_orthant(&self) -> bool {
        in_orthant(self)
    }
}

/// Replaces each atom by its 3D source step.
pub fn lift(word: &SampledWord, a: &StepSet1D) -> Result<Walk3D> {
    word.atoms
        .iter()
        .map(|&id| {
            a.atom(id)
                .and_then(|at| at.source)
                .ok_or(Error::UnknownAtom(id))
        })
        .collect::<Result<Vec<_>>>()
        .map(|steps| Walk3D { steps })
}

/// True iff every prefix position is componentwise non-negative.
pub fn in_orthant(w: &Walk3D) -> bool {
    let mut p = [0i64; 3];
    for s in &w.steps {
        p = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
        if p[0] < 0 || p[1] < 0 || p[2] < 0 {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelOptions {
    pub max_den: u32,
    pub minimize_tol: f64,
    /// Longest length of interest. Only used when the meander series diverges
    /// at its singularity and a smaller evaluation point must be chosen.
    pub size_hint: usize,
    /// Evaluate the generating functions here instead of at the singularity.
    pub eval_point: Option<f64>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            max_den: DEFAULT_MAX_DEN,
            minimize_tol: DEFAULT_MINIMIZE_TOL,
            size_hint: 1000,
            eval_point: None,
        }
    }
}

/// Everything the set-up phase computes for one model.
pub struct Model {
    pub stepset: WeightedStepSet3,
    pub drift: Drift3,
    pub minimizer: Minimizer,
    pub vector: ProjectionVector,
    pub projection: IntegerProjection,
    pub step1d: StepSet1D,
    pub growth: Growth1D,
    pub grammar: Grammar,
    pub gf: GfEvaluation,
    sampler: BoltzmannSampler,
    /// `source` of each atom, indexed by atom id.
    lift_table: Vec<Step3>,
}

impl Model {
    pub fn build(stepset: WeightedStepSet3, opts: &ModelOptions) -> Result<Self> {
        let drift = stepset.drift();
        let minimizer = minimize_inventory(&stepset, opts.minimize_tol)?;
        let vector = projection_vector(&minimizer, UNIT_LOG_EPS)?;
        let projection = rationalize(&vector, opts.max_den);
        let step1d = project_stepset(&stepset, &projection)?;
        let growth = analyze_1d(&step1d)?;
        let grammar = build_meander_grammar(&step1d)?;
        let gf = match opts.eval_point {
            Some(x) => evaluate_gf(&grammar, x)?,
            None => evaluate_near_singularity(&grammar, growth.rho, opts.size_hint)?,
        };
        let sampler = BoltzmannSampler::new(&grammar, &gf)?;
        let lift_table = step1d
            .atoms()
            .iter()
            .map(|a| a.source.expect("projected atoms carry their source"))
            .collect();
        Ok(Model {
            stepset,
            drift,
            minimizer,
            vector,
            projection,
            step1d,
            growth,
            grammar,
            gf,
            sampler,
            lift_table,
        })
    }

    pub fn sampler(&self) -> &BoltzmannSampler {
        &self.sampler
    }

    /// Samples `count` orthant walks with lengths in `[n_min, n_max]` from a
    /// single random stream, spending at most `max_attempts` free draws.
    pub fn sample_walks<R: Rng + ?Sized>(
        &self,
        n_min: usize,
        n_max: usize,
        count: usize,
        max_attempts: u64,
        rng: &mut R,
    ) -> Result<SampleReport> {
        let started = Instant::now();
        let mut counters = Counters::default();
        let mut walks = Vec::with_capacity(count);
        let mut word = Vec::new();
        let mut stack: Vec<Symbol> = Vec::new();
        while walks.len() < count {
            if counters.free_draws >= max_attempts {
                return Err(Error::AttemptsExhausted(Box::new(SampleReport {
                    walks,
                    counters,
                    wall_time: started.elapsed(),
                    seed: None,
                })));
            }
            counters.free_draws += 1;
            if !self.sampler.sample_into(n_max, rng, &mut word, &mut stack) {
                counters.oversize += 1;
            } else if word.len() < n_min {
                counters.undersize += 1;
            } else if self.lifted_in_orthant(&word) {
                counters.accepted += 1;
                walks.push(Walk3D {
                    steps: word.iter().map(|&a| self.lift_table[a]).collect(),
                });
            } else {
                counters.orthant_rejects += 1;
            }
        }
        Ok(SampleReport {
            walks,
            counters,
            wall_time: started.elapsed(),
            seed: None,
        })
    }

    fn lifted_in_orthant(&self, word: &[usize]) -> bool {
        let mut p = [0i64; 3];
        for &a in word {
            let s = self.lift_table[a];
            p = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
            if p[0] < 0 || p[1] < 0 || p[2] < 0 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub free_draws: u64,
    pub oversize: u64,
    pub undersize: u64,
    pub orthant_rejects: u64,
    pub accepted: u64,
}

impl Counters {
    fn merge(&mut self, o: &Counters) {
        self.free_draws += o.free_draws;
        self.oversize += o.oversize;
        self.undersize += o.undersize;
        self.orthant_rejects += o.orthant_rejects;
        self.accepted += o.accepted;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub walks: Vec<Walk3D>,
    pub counters: Counters,
    pub wall_time: Duration,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleRequest {
    pub n_min: usize,
    pub n_max: usize,
    pub count: usize,
    pub max_attempts: u64,
    pub seed: u64,
    pub workers: usize,
}

pub const DEFAULT_BOLTZMANN_ATTEMPTS: u64 = 10_000_000;
pub const DEFAULT_NAIVE_ATTEMPTS: u64 = 100_000_000;

/// Splits `total` into `parts` shares, the first ones one larger.
fn shares(total: u64, parts: usize) -> Vec<u64> {
    let parts = parts.max(1) as u64;
    (0..parts)
        .map(|i| total / parts + u64::from(i < total % parts))
        .collect()
}

/// Runs `job` on `workers` threads, worker `i` with its own generator seeded
/// by [`worker_seed`]`(seed, i)`, and concatenates the results in worker order.
fn run_workers<F>(
    count: usize,
    max_attempts: u64,
    seed: u64,
    workers: usize,
    job: F,
) -> Result<SampleReport>
where
    F: Fn(usize, u64, &mut crate::boltzmann::WalkRng) -> Result<SampleReport> + Sync,
{
    let started = Instant::now();
    let counts = shares(count as u64, workers);
    let budgets = shares(max_attempts, workers);
    let results: Vec<Result<SampleReport>> = if workers <= 1 {
        let mut rng = rng_from_seed(worker_seed(seed, 0));
        vec![job(count, max_attempts, &mut rng)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..counts.len())
                .map(|i| {
                    let job = &job;
                    let (c, b) = (counts[i] as usize, budgets[i]);
                    scope.spawn(move || {
                        let mut rng = rng_from_seed(worker_seed(seed, i as u64));
                        job(c, b, &mut rng)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        })
    };
    let mut merged = SampleReport {
        walks: Vec::with_capacity(count),
        counters: Counters::default(),
        wall_time: Duration::ZERO,
        seed: Some(seed),
    };
    let mut exhausted = false;
    for r in results {
        let part = match r {
            Ok(p) => p,
            Err(Error::AttemptsExhausted(p)) => {
                exhausted = true;
                *p
            }
            Err(e) => return Err(e),
        };
        merged.counters.merge(&part.counters);
        merged.walks.extend(part.walks);
    }
    merged.wall_time = started.elapsed();
    if exhausted {
        Err(Error::AttemptsExhausted(Box::new(merged)))
    } else {
        Ok(merged)
    }
}

/// Boltzmann pipeline over `req.workers` independent streams.
pub fn sample_orthant_walks(model: &Model, req: &SampleRequest) -> Result<SampleReport> {
    if req.n_min > req.n_max {
        return Err(Error::LengthMismatch(format!(
            "window [{}, {}] is empty",
            req.n_min, req.n_max
        )));
    }
    run_workers(
        req.count,
        req.max_attempts,
        req.seed,
        req.workers,
        |c, b, rng| model.sample_walks(req.n_min, req.n_max, c, b, rng),
    )
}

/// Naive rejection: steps drawn i.i.d. proportionally to weight, restarting
/// as soon as the walk leaves the orthant. `max_attempts` counts started walks.
pub fn naive_sample<R: Rng + ?Sized>(
    w: &WeightedStepSet3,
    n: usize,
    count: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<SampleReport> {
    let started = Instant::now();
    let total = w.total_weight();
    let mut cumulative = Vec::with_capacity(w.len());
    let mut acc = 0;
    for (s, wt) in w.entries() {
        acc += wt;
        cumulative.push((acc, *s));
    }
    let mut counters = Counters::default();
    let mut walks = Vec::with_capacity(count);
    let mut steps = Vec::with_capacity(n);
    'attempt: while walks.len() < count {
        if counters.free_draws >= max_attempts {
            return Err(Error::AttemptsExhausted(Box::new(SampleReport {
                walks,
                counters,
                wall_time: started.elapsed(),
                seed: None,
            })));
        }
        counters.free_draws += 1;
        steps.clear();
        let mut p = [0i64; 3];
        for _ in 0..n {
            let r = rng.random_range(0..total);
            let s = cumulative
                .iter()
                .find(|(c, _)| r < *c)
                .map(|(_, s)| *s)
                .expect("r below total weight");
            p = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
            if p[0] < 0 || p[1] < 0 || p[2] < 0 {
                counters.orthant_rejects += 1;
                continue 'attempt;
            }
            steps.push(s);
        }
        counters.accepted += 1;
        walks.push(Walk3D {
            steps: steps.clone(),
        });
    }
    Ok(SampleReport {
        walks,
        counters,
        wall_time: started.elapsed(),
        seed: None,
    })
}

/// Naive baseline over `workers` streams, seeded like [`sample_orthant_walks`].
pub fn naive_sample_parallel(
    w: &WeightedStepSet3,
    n: usize,
    count: usize,
    max_attempts: u64,
    seed: u64,
    workers: usize,
) -> Result<SampleReport> {
    run_workers(count, max_attempts, seed, workers, |c, b, rng| {
        naive_sample(w, n, c, b, rng)
    })
}

/// Weighted counts of orthant walks by length and endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    levels: Vec<BTreeMap<Point3, BigUint>>,
}

/// Largest number of endpoints kept at one length.
const COUNT_STATE_BUDGET: usize = 4_000_000;

impl CountTable {
    pub fn max_len(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &BTreeMap<Point3, BigUint> {
        &self.levels[n]
    }

    pub fn total(&self, n: usize) -> BigUint {
        self.levels[n].values().sum()
    }

    pub fn count(&self, n: usize, p: Point3) -> BigUint {
        self.levels[n].get(&p).cloned().unwrap_or_default()
    }

    /// Endpoint distribution at length `n`.
    pub fn proportions(&self, n: usize) -> BTreeMap<Point3, f64> {
        let total = self.total(n);
        self.levels[n]
            .iter()
            .map(|(p, c)| (*p, big_ratio(c, &total)))
            .collect()
    }
}

/// `a / b` in double precision for arbitrarily large integers.
pub fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = b.bits().saturating_sub(1000);
    let a = (a >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// `T_0 = {origin: 1}`, `T_n(p) = Σ w · T_{n-1}(p - s)` over orthant points.
pub fn count_orthant_walks(w: &WeightedStepSet3, n_max: usize) -> Result<CountTable> {
    let mut levels = Vec::with_capacity(n_max + 1);
    levels.push(BTreeMap::from([([0i64; 3], BigUint::from(1u32))]));
    for n in 1..=n_max {
        let prev: &BTreeMap<Point3, BigUint> = &levels[n - 1];
        let mut next: BTreeMap<Point3, BigUint> = BTreeMap::new();
        for (p, c) in prev {
            for (s, wt) in w.entries() {
                let q = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
                if q[0] < 0 || q[1] < 0 || q[2] < 0 {
                    continue;
                }
                *next.entry(q).or_insert_with(BigUint::zero) += c * *wt;
            }
        }
        if next.len() > COUNT_STATE_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "{} endpoints at length {n}",
                next.len()
            )));
        }
        levels.push(next);
    }
    Ok(CountTable { levels })
}

/// Endpoint histogram of walks of one length.
pub fn endpoint_tally(walks: &[Walk3D]) -> BTreeMap<Point3, u64> {
    let mut t = BTreeMap::new();
    for w in walks {
        *t.entry(w.endpoint()).or_insert(0) += 1;
    }
    t
}

/// Relative frequencies of a tally.
pub fn frequencies(tally: &BTreeMap<Point3, u64>) -> BTreeMap<Point3, f64> {
    let total: u64 = tally.values().sum();
    tally
        .iter()
        .map(|(p, c)| (*p, *c as f64 / total as f64))
        .collect()
}

/// Root-mean-square difference between empirical and exact endpoint
/// proportions, averaged over the endpoints with nonzero exact count.
pub fn endpoint_rmse(
    empirical: &BTreeMap<Point3, f64>,
    exact: &CountTable,
    n: usize,
) -> Result<f64> {
    let level = exact.level(n);
    if let Some(p) = empirical
        .iter()
        .find(|(p, f)| **f > 0.0 && !level.contains_key(*p))
        .map(|(p, _)| *p)
    {
        return Err(Error::ImpossibleEndpoint(p));
    }
    let props = exact.proportions(n);
    let (emp, ex): (Vec<f64>, Vec<f64>) = props
        .iter()
        .map(|(p, q)| (empirical.get(p).copied().unwrap_or(0.0), *q))
        .unzip();
    Ok(rmse(&emp, &ex))
}

/// Pearson test of an endpoint tally against the exact distribution.
pub fn endpoint_chi_square(
    tally: &BTreeMap<Point3, u64>,
    exact: &CountTable,
    n: usize,
) -> Result<ChiSquare> {
    let level = exact.level(n);
    if let Some(p) = tally.keys().find(|p| !level.contains_key(*p)) {
        return Err(Error::ImpossibleEndpoint(*p));
    }
    let props = exact.proportions(n);
    let (obs, probs): (Vec<u64>, Vec<f64>) = props
        .iter()
        .map(|(p, q)| (tally.get(p).copied().unwrap_or(0), *q))
        .unzip();
    Ok(chi_square(&obs, &probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flagship_model() -> Model {
        Model::build(WeightedStepSet3::flagship(), &ModelOptions::default()).unwrap()
    }

    #[test]
    fn lift_examples() {
        let m = flagship_model();
        // atoms 0..2 are e1,e2,e3; 3..5 are -e1,-e2,-e3
        let w = lift(
            &SampledWord {
                atoms: vec![0, 1, 3],
            },
            &m.step1d,
        )
        .unwrap();
        assert_eq!(w.steps, vec![Step3::E1, Step3::E2, Step3::E1.neg()]);
        assert_eq!(
            w.positions(),
            vec![[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
        );
        let empty = lift(&SampledWord { atoms: vec![] }, &m.step1d).unwrap();
        assert_eq!(empty.positions(), vec![[0, 0, 0]]);
        assert!(matches!(
            lift(&SampledWord { atoms: vec![17] }, &m.step1d),
            Err(Error::UnknownAtom(17))
        ));
        let bare = StepSet1D::from_weighted_values(&[(1, 1), (-1, 1)]).unwrap();
        assert!(lift(&SampledWord { atoms: vec![0] }, &bare).is_err());
    }

    #[test]
    fn orthant_membership() {
        assert!(in_orthant(&Walk3D {
            steps: vec![Step3::E1, Step3::E1.neg()]
        }));
        assert!(!in_orthant(&Walk3D {
            steps: vec![Step3::E1, Step3::E2.neg()]
        }));
        assert!(in_orthant(&Walk3D::default()));
    }

    #[test]
    fn flagship_small_counts() {
        let t = count_orthant_walks(&WeightedStepSet3::flagship(), 3).unwrap();
        let totals: Vec<u64> = (0..=2).map(|n| t.total(n).to_u64().unwrap()).collect();
        assert_eq!(totals, vec![1, 3, 15]);
        let zero = WeightedStepSet3::axis_model([1; 6]).unwrap();
        let t = count_orthant_walks(&zero, 1).unwrap();
        assert_eq!(t.total(1), BigUint::from(3u32));
    }

    /// Exhaustive enumeration of weighted step sequences.
    fn brute_force(w: &WeightedStepSet3, n: usize) -> BTreeMap<Point3, BigUint> {
        let mut out = BTreeMap::new();
        let k = w.len();
        let mut idx = vec![0usize; n];
        loop {
            let mut p = [0i64; 3];
            let mut ok = true;
            let mut weight = BigUint::from(1u32);
            for &i in &idx {
                let (s, wt) = w.entries()[i];
                p = [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz];
                weight *= wt;
                if p.iter().any(|c| *c < 0) {
                    ok = false;
                    break;
                }
            }
            if ok {
                *out.entry(p).or_insert_with(BigUint::zero) += weight;
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < k {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn count_table_matches_enumeration() {
        for w in [
            WeightedStepSet3::flagship(),
            WeightedStepSet3::axis_model([1, 1, 1, 2, 1, 1]).unwrap(),
            WeightedStepSet3::validate([
                (Step3::new(1, 1, 0), 2),
                (Step3::new(-1, 0, 0), 1),
                (Step3::new(0, -1, 1), 3),
                (Step3::new(0, 0, -1), 1),
                (Step3::new(-1, -1, -1), 1),
            ])
            .unwrap(),
        ] {
            let t = count_orthant_walks(&w, 6).unwrap();
            for n in 0..=6 {
                assert_eq!(t.level(n), &brute_force(&w, n), "n = {n}");
            }
        }
    }

    #[test]
    fn naive_two_steps() {
        let mut rng = rng_from_seed(11);
        let r = naive_sample(&WeightedStepSet3::flagship(), 2, 20_000, u64::MAX, &mut rng).unwrap();
        let rate = r.counters.accepted as f64 / r.counters.free_draws as f64;
        let p = 15.0 / 81.0;
        let sd = (p * (1.0 - p) / r.counters.free_draws as f64).sqrt();
        assert!((rate - p).abs() < 5.0 * sd, "rate {rate}");
        assert_eq!(
            r.counters.accepted + r.counters.orthant_rejects,
            r.counters.free_draws
        );
    }

    #[test]
    fn naive_zero_length_accepts_immediately() {
        let mut rng = rng_from_seed(1);
        let r = naive_sample(&WeightedStepSet3::flagship(), 0, 5, 5, &mut rng).unwrap();
        assert_eq!(r.walks, vec![Walk3D::default(); 5]);
        assert_eq!(r.counters.free_draws, 5);
    }

    #[test]
    fn naive_exhaustion_keeps_partial_report() {
        let mut rng = rng_from_seed(1);
        match naive_sample(&WeightedStepSet3::flagship(), 100, 1, 10_000, &mut rng) {
            Err(Error::AttemptsExhausted(r)) => {
                assert_eq!(r.counters.free_draws, 10_000);
                assert!(r.walks.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_request_is_empty_report() {
        let m = flagship_model();
        let r = sample_orthant_walks(
            &m,
            &SampleRequest {
                n_min: 5,
                n_max: 10,
                count: 0,
                max_attempts: 10,
                seed: 1,
                workers: 1,
            },
        )
        .unwrap();
        assert!(r.walks.is_empty());
        assert_eq!(r.counters, Counters::default());
    }

    #[test]
    fn sampler_soundness_and_determinism() {
        let m = flagship_model();
        let req = SampleRequest {
            n_min: 20,
            n_max: 30,
            count: 50,
            max_attempts: DEFAULT_BOLTZMANN_ATTEMPTS,
            seed: 9,
            workers: 1,
        };
        let a = sample_orthant_walks(&m, &req).unwrap();
        let b = sample_orthant_walks(&m, &req).unwrap();
        assert_eq!(a.walks, b.walks);
        for w in &a.walks {
            assert!(w.in_orthant());
            assert!((20..=30).contains(&w.len()));
        }
        let c = a.counters;
        assert_eq!(c.accepted, a.walks.len() as u64);
        assert_eq!(
            c.oversize + c.undersize + c.orthant_rejects + c.accepted,
            c.free_draws
        );
        let par = sample_orthant_walks(&m, &SampleRequest { workers: 3, ..req }).unwrap();
        assert_eq!(par.walks.len(), 50);
        let par2 = sample_orthant_walks(&m, &SampleRequest { workers: 3, ..req }).unwrap();
        assert_eq!(par.walks, par2.walks);
    }

    #[test]
    fn rmse_edge_cases() {
        let t = count_orthant_walks(&WeightedStepSet3::flagship(), 2).unwrap();
        let exact = t.proportions(2);
        assert_eq!(endpoint_rmse(&exact, &t, 2).unwrap(), 0.0);
        let bad = BTreeMap::from([([1, 0, 0], 1.0)]);
        assert!(matches!(
            endpoint_rmse(&bad, &t, 2),
            Err(Error::ImpossibleEndpoint([1, 0, 0]))
        ));
    }

    #[test]
    fn walks_inject_into_meanders() {
        use crate::grammar::count_walks_dp;
        for weights in [[1, 2, 1, 2, 1, 2], [1, 1, 1, 2, 1, 1], [1; 6]] {
            let m = Model::build(
                WeightedStepSet3::axis_model(weights).unwrap(),
                &ModelOptions::default(),
            )
            .unwrap();
            let t = count_orthant_walks(&m.stepset, 20).unwrap();
            let dp = count_walks_dp(&m.step1d, 20);
            let total = BigUint::from(m.stepset.total_weight());
            for n in 0..=20 {
                assert!(t.total(n) <= dp.meanders(n));
                assert!(t.total(n) <= total.pow(n as u32));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn lift_then_project_recovers_values(
            atoms in prop::collection::vec(0usize..6, 0..40),
            weights in prop::array::uniform6(1u64..4),
        ) {
            let w = WeightedStepSet3::axis_model(weights).unwrap();
            let ip = IntegerProjection { coefficients: [3, 2, 1], denominator: 1, max_abs_error: 0.0 };
            let a = project_stepset(&w, &ip).unwrap();
            let word = SampledWord { atoms: atoms.clone() };
            let walk = lift(&word, &a).unwrap();
            let projected: Vec<i64> = walk.steps.iter().map(|s| ip.project(s)).collect();
            let values: Vec<i64> = atoms.iter().map(|&i| a.atom(i).unwrap().value).collect();
            prop_assert_eq!(projected, values);
        }
    }
}
