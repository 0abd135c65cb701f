//! Numerical generating functions and the singular Boltzmann sampler.
//!
//! The grammar induces a polynomial system `y = Φ(x, y)`. Its least
//! non-negative solution at a point `x` gives the generating-function values
//! the sampler needs. The system is solved one strongly connected component
//! at a time (dependencies first): a short Kleene warm-up from 0 followed by
//! Newton steps, which for monotone polynomial systems approach the least
//! solution from below. A component whose values blow up is reported as
//! `+∞`; that is the value of its generating function at `x`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Symbol};
use crate::pipeline::{Counters, SampleReport};

/// Name of the generator recorded in output metadata.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub type WalkRng = ChaCha8Rng;

/// Generator for a given seed.
pub fn rng_from_seed(seed: u64) -> WalkRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of worker `index` derived from a master seed by one SplitMix64 round
/// over `master + (index + 1) * 0x9E3779B97F4A7C15`.
pub fn worker_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const WARMUP: usize = 100;
const KLEENE_CAP: usize = 1_000_000;
const NEWTON_MAX: usize = 400;
/// Values above this are treated as divergence.
const VALUE_CAP: f64 = 1e6;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GfEvaluation {
    pub x0: f64,
    /// Per nonterminal; `f64::INFINITY` where the series diverges at `x0`.
    pub values: Vec<f64>,
    /// `max |y - Φ(x0, y)|` over the finite values.
    pub residual: f64,
    pub kleene_iterations: usize,
    pub newton_iterations: usize,
    /// Extra evaluations spent moving `x0` below a divergent point.
    pub fallback_evaluations: usize,
}

impl GfEvaluation {
    pub fn value(&self, nt: usize) -> f64 {
        self.values[nt]
    }

    pub fn is_finite(&self, nt: usize) -> bool {
        self.values[nt].is_finite()
    }
}

/// Least non-negative solution of the grammar's system at `x`.
///
/// Returns `Divergent` only when the start symbol's value is infinite.
/// `NoConvergence` means some component neither converged nor blew up within
/// the iteration budget.
pub fn evaluate_gf(g: &Grammar, x: f64) -> Result<GfEvaluation> {
    let eval = evaluate_components(g, x)?;
    if !eval.is_finite(g.start()) {
        return Err(Error::Divergent { x });
    }
    Ok(eval)
}

/// Evaluates at `rho` when that converges. Otherwise moves to
/// `rho (1 - 1/(2 size_hint))`, then bisects below until the start value is
/// finite (at most 60 steps).
///
/// The second point is used when the meander series itself is infinite at
/// its radius (zero or positive 1D drift). There the singular point is
/// useless and a point whose truncated size distribution is spread up to
/// `size_hint` is the natural substitute.
pub fn evaluate_near_singularity(g: &Grammar, rho: f64, size_hint: usize) -> Result<GfEvaluation> {
    let mut spent = 0;
    match evaluate_gf(g, rho) {
        Ok(e) => return Ok(e),
        Err(Error::Divergent { .. } | Error::NoConvergence { .. }) => spent += 1,
        Err(e) => return Err(e),
    }
    let hinted = rho * (1.0 - 0.5 / size_hint.max(1) as f64);
    match evaluate_gf(g, hinted) {
        Ok(mut e) => {
            e.fallback_evaluations = spent;
            return Ok(e);
        }
        Err(Error::Divergent { .. } | Error::NoConvergence { .. }) => spent += 1,
        Err(e) => return Err(e),
    }
    let (mut lo, mut hi) = (0.0, hinted);
    let mut best = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        spent += 1;
        match evaluate_gf(g, mid) {
            Ok(e) => {
                lo = mid;
                best = Some(e);
            }
            Err(Error::Divergent { .. } | Error::NoConvergence { .. }) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    let mut e = best.ok_or(Error::Divergent { x: hi })?;
    e.fallback_evaluations = spent;
    Ok(e)
}

fn evaluate_components(g: &Grammar, x: f64) -> Result<GfEvaluation> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Divergent { x });
    }
    let n = g.nonterminals().len();
    let mut values = vec![0.0f64; n];
    let mut kleene = 0;
    let mut newton = 0;
    let mut residual: f64 = 0.0;
    for comp in strongly_connected_components(g) {
        let depends_on_infinite = comp.iter().any(|&nt| {
            g.terms(nt)
                .iter()
                .flat_map(|t| t.factors.iter())
                .any(|&f| !comp.contains(&f) && values[f].is_infinite())
        });
        if depends_on_infinite {
            for &nt in &comp {
                values[nt] = f64::INFINITY;
            }
            continue;
        }
        let system = Subsystem::new(g, x, &comp, &values);
        match system.solve()? {
            Solved::Finite {
                y,
                residual: r,
                kleene: k,
                newton: nw,
            } => {
                for (i, &nt) in comp.iter().enumerate() {
                    values[nt] = y[i];
                }
                residual = residual.max(r);
                kleene += k;
                newton += nw;
            }
            Solved::Infinite { kleene: k } => {
                kleene += k;
                for &nt in &comp {
                    values[nt] = f64::INFINITY;
                }
            }
        }
    }
    Ok(GfEvaluation {
        x0: x,
        values,
        residual,
        kleene_iterations: kleene,
        newton_iterations: newton,
        fallback_evaluations: 0,
    })
}

/// Tarjan's algorithm; components come out dependencies first.
fn strongly_connected_components(g: &Grammar) -> Vec<Vec<usize>> {
    let n = g.nonterminals().len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut s: Vec<usize> = g
                .terms(v)
                .iter()
                .flat_map(|t| t.factors.iter().copied())
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// `y_i = Σ c · Π y_local · (constant from earlier components)`
struct LocalTerm {
    coef: f64,
    factors: Vec<usize>,
}

struct Subsystem {
    rows: Vec<Vec<LocalTerm>>,
}

enum Solved {
    Finite {
        y: Vec<f64>,
        residual: f64,
        kleene: usize,
        newton: usize,
    },
    Infinite {
        kleene: usize,
    },
}

impl Subsystem {
    fn new(g: &Grammar, x: f64, comp: &[usize], values: &[f64]) -> Self {
        let local = |nt: usize| comp.iter().position(|&c| c == nt);
        let rows = comp
            .iter()
            .map(|&nt| {
                g.terms(nt)
                    .iter()
                    .filter_map(|t| {
                        let mut coef = t.coef as f64 * x.powi(t.shift as i32);
                        let mut factors = Vec::new();
                        for &f in &t.factors {
                            match local(f) {
                                Some(i) => factors.push(i),
                                None => coef *= values[f],
                            }
                        }
                        (coef > 0.0).then_some(LocalTerm { coef, factors })
                    })
                    .collect()
            })
            .collect();
        Subsystem { rows }
    }

    fn phi(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| t.coef * t.factors.iter().map(|&f| y[f]).product::<f64>())
                    .sum()
            })
            .collect()
    }

    fn residual(&self, y: &[f64]) -> f64 {
        self.phi(y)
            .iter()
            .zip(y)
            .map(|(p, v)| (p - v).abs())
            .fold(0.0, f64::max)
    }

    /// Jacobian of `y - Φ(y)`.
    fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let k = y.len();
        let mut j = DMatrix::<f64>::identity(k, k);
        for (i, row) in self.rows.iter().enumerate() {
            for t in row {
                for (pos, &f) in t.factors.iter().enumerate() {
                    let others: f64 = t
                        .factors
                        .iter()
                        .enumerate()
                        .filter(|(q, _)| *q != pos)
                        .map(|(_, &h)| y[h])
                        .product();
                    j[(i, f)] -= t.coef * others;
                }
            }
        }
        j
    }

    fn solve(&self) -> Result<Solved> {
        let k = self.rows.len();
        let mut y = vec![0.0; k];
        let mut kleene = 0;
        let mut newton = 0;
        let mut batch = WARMUP;
        loop {
            for _ in 0..batch {
                y = self.phi(&y);
                kleene += 1;
                if y.iter().any(|v| !v.is_finite() || *v > VALUE_CAP) {
                    return Ok(Solved::Infinite { kleene });
                }
            }
            let (ny, steps) = self.newton(y.clone());
            newton += steps;
            if ny.iter().any(|v| *v > VALUE_CAP) {
                return Ok(Solved::Infinite { kleene });
            }
            let r = self.residual(&ny);
            let scale = 1.0 + ny.iter().copied().fold(0.0, f64::max);
            if r <= RESIDUAL_TOL * scale {
                return Ok(Solved::Finite {
                    y: ny,
                    residual: r,
                    kleene,
                    newton,
                });
            }
            if kleene >= KLEENE_CAP {
                return Err(Error::NoConvergence {
                    what: "generating function evaluation",
                    iterations: kleene,
                    residual: r,
                });
            }
            // Newton stalled away from a solution; advance the monotone
            // iteration and retry from further up.
            y = ny;
            batch = (batch * 4).min(KLEENE_CAP - kleene);
        }
    }

    /// Newton iteration from a point below the least solution. A step is kept
    /// while it lowers the residual, or while it stays below the solution
    /// (`y <= Φ(y)` and increasing); the last kept point is returned.
    fn newton(&self, mut y: Vec<f64>) -> (Vec<f64>, usize) {
        let mut r = self.residual(&y);
        let mut steps = 0;
        while steps < NEWTON_MAX {
            let p = self.phi(&y);
            let rhs = DVector::from_iterator(y.len(), p.iter().zip(&y).map(|(a, b)| a - b));
            let Some(delta) = self.jacobian(&y).lu().solve(&rhs) else {
                break;
            };
            let candidate: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            if candidate.iter().any(|v| !v.is_finite() || *v < 0.0) {
                break;
            }
            let scale = 1.0 + candidate.iter().copied().fold(0.0, f64::max);
            let slack = 1e-14 * scale;
            let rc = self.residual(&candidate);
            let pc = self.phi(&candidate);
            let below = candidate.iter().zip(&y).all(|(c, old)| *c >= old - slack)
                && pc.iter().zip(&candidate).all(|(p, c)| *p >= c - slack);
            if !(rc < r || (below && rc <= r * 4.0 + slack)) {
                break;
            }
            let step = delta.amax();
            y = candidate;
            r = rc;
            steps += 1;
            if r == 0.0 || step <= 1e-15 * scale {
                break;
            }
        }
        (y, steps)
    }
}

/// Outcome of one free draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Draw {
    Word(SampledWord),
    /// Aborted as soon as the word was certain to exceed `n_max`.
    Oversize,
}

/// A sampled 1D word as a sequence of atom ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampledWord {
    pub atoms: Vec<usize>,
}

impl SampledWord {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WindowStats {
    pub draws: u64,
    pub oversize: u64,
    pub undersize: u64,
}

struct Choice {
    cumulative: Vec<f64>,
    /// Extra minimum length each alternative commits beyond the
    /// nonterminal's own minimum.
    extra_min: Vec<usize>,
}

/// Free Boltzmann sampler from the grammar's start symbol.
pub struct BoltzmannSampler {
    alternatives: Vec<Vec<Vec<Symbol>>>,
    choices: Vec<Option<Choice>>,
    start: usize,
    start_min: usize,
    x0: f64,
    max_normalization_deviation: f64,
}

impl BoltzmannSampler {
    pub fn new(g: &Grammar, eval: &GfEvaluation) -> Result<Self> {
        if !eval.is_finite(g.start()) {
            return Err(Error::Divergent { x: eval.x0 });
        }
        let x = eval.x0;
        let mut max_dev: f64 = 0.0;
        let choices = g
            .nonterminals()
            .iter()
            .enumerate()
            .map(|(i, nt)| {
                let total = eval.value(i);
                if !total.is_finite() || total <= 0.0 {
                    return None;
                }
                let weights: Vec<f64> = nt
                    .alternatives
                    .iter()
                    .map(|alt| {
                        alt.iter()
                            .map(|s| match *s {
                                Symbol::Atom(a) => g.atoms()[a].weight as f64 * x,
                                Symbol::Nt(y) => eval.value(y),
                            })
                            .product::<f64>()
                    })
                    .collect();
                let sum: f64 = weights.iter().sum();
                max_dev = max_dev.max((sum / total - 1.0).abs());
                let mut acc = 0.0;
                let cumulative = weights
                    .iter()
                    .map(|w| {
                        acc += w / sum;
                        acc
                    })
                    .collect();
                let extra_min = nt
                    .alternatives
                    .iter()
                    .map(|alt| {
                        alt.iter()
                            .map(|s| match *s {
                                Symbol::Atom(_) => 1,
                                Symbol::Nt(y) => g.min_len(y),
                            })
                            .sum::<usize>()
                            - g.min_len(i)
                    })
                    .collect();
                Some(Choice {
                    cumulative,
                    extra_min,
                })
            })
            .collect();
        Ok(BoltzmannSampler {
            alternatives: g
                .nonterminals()
                .iter()
                .map(|nt| nt.alternatives.clone())
                .collect(),
            choices,
            start: g.start(),
            start_min: g.min_len(g.start()),
            x0: x,
            max_normalization_deviation: max_dev,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Largest `|Σ alternatives / value - 1|` seen before renormalizing.
    pub fn max_normalization_deviation(&self) -> f64 {
        self.max_normalization_deviation
    }

    /// Probability of each alternative of a nonterminal.
    pub fn alternative_probabilities(&self, nt: usize) -> Option<Vec<f64>> {
        let c = self.choices[nt].as_ref()?;
        let mut prev = 0.0;
        Some(
            c.cumulative
                .iter()
                .map(|&v| {
                    let p = v - prev;
                    prev = v;
                    p
                })
                .collect(),
        )
    }

    /// One free draw, expanded with an explicit stack. The draw stops with
    /// `Oversize` once the atoms emitted plus the minimum length still owed by
    /// pending symbols exceed `n_max`.
    pub fn sample_word<R: Rng + ?Sized>(&self, n_max: usize, rng: &mut R) -> Draw {
        let mut word = Vec::new();
        let mut stack = Vec::new();
        if self.sample_into(n_max, rng, &mut word, &mut stack) {
            Draw::Word(SampledWord { atoms: word })
        } else {
            Draw::Oversize
        }
    }

    /// [`sample_word`](Self::sample_word) with caller-owned buffers; returns
    /// `false` on oversize. `word` holds the atoms on success.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        n_max: usize,
        rng: &mut R,
        word: &mut Vec<usize>,
        stack: &mut Vec<Symbol>,
    ) -> bool {
        word.clear();
        stack.clear();
        let mut committed = self.start_min;
        if committed > n_max {
            return false;
        }
        stack.push(Symbol::Nt(self.start));
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Atom(a) => word.push(a),
                Symbol::Nt(nt) => {
                    let choice = self.choices[nt]
                        .as_ref()
                        .expect("reachable nonterminals have finite values");
                    let u: f64 = rng.random();
                    let k = choice
                        .cumulative
                        .iter()
                        .position(|&c| u < c)
                        .unwrap_or(choice.cumulative.len() - 1);
                    committed += choice.extra_min[k];
                    if committed > n_max {
                        return false;
                    }
                    stack.extend(self.alternatives[nt][k].iter().rev().copied());
                }
            }
        }
        true
    }

    /// Repeats free draws until the length falls in `[n_min, n_max]`.
    pub fn sample_in_window<R: Rng + ?Sized>(
        &self,
        n_min: usize,
        n_max: usize,
        max_attempts: u64,
        rng: &mut R,
    ) -> Result<(SampledWord, WindowStats)> {
        let mut stats = WindowStats::default();
        while stats.draws < max_attempts {
            stats.draws += 1;
            match self.sample_word(n_max, rng) {
                Draw::Oversize => stats.oversize += 1,
                Draw::Word(w) if w.len() < n_min => stats.undersize += 1,
                Draw::Word(w) => return Ok((w, stats)),
            }
        }
        Err(Error::AttemptsExhausted(Box::new(SampleReport {
            walks: Vec::new(),
            counters: Counters {
                free_draws: stats.draws,
                oversize: stats.oversize,
                undersize: stats.undersize,
                orthant_rejects: 0,
                accepted: 0,
            },
            wall_time: Default::default(),
            seed: None,
        })))
    }
}
