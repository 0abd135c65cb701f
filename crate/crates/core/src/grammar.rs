//! Unambiguous grammars for 1D meanders and exact coefficient extraction.
//!
//! [`build_meander_grammar`] produces a grammar whose start symbol `W`
//! derives each walk with non-negative prefix sums exactly once. Words are
//! factored at their first step and at the first time they drop below a
//! level:
//!
//! ```text
//! W      = ε + Σ_{s ≥ 0} a_s · M_s                        M_0 = W
//! M_h    = W + Σ_{t=1}^{min(h,m)} B_t · M_{h-t}
//! B_t    = [a_{-t}] + Σ_{j ≥ 0} a_j · C_{j,t}             C_{0,t} = B_t
//! C_{j,t}= [B_{j+t} if j+t ≤ m] + Σ_{r=1}^{min(j,m)} B_r · C_{j-r,t}
//! D      = ε + Σ_{s ≥ 0} a_s · T_s                        T_0 = D
//! T_j    = Σ_{r=1}^{min(j,m)} B_r · T_{j-r}
//! ```
//!
//! `M_h` are meanders started at height `h`, `B_t` walks whose only visit
//! below 0 is their final step to `-t`, and `D` excursions. Atoms with the same
//! value stay distinct so that a word identifies a unique 3D walk.
//!
//! [`count_walks_dp`] is the independent height-indexed recurrence used to
//! check the grammar.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::projection::{Atom, StepSet1D};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Atom(usize),
    Nt(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nonterminal {
    pub name: String,
    /// Each alternative is a sequence of symbols; the empty sequence is ε.
    pub alternatives: Vec<Vec<Symbol>>,
}

/// An alternative reduced to `coef · x^shift · Π y_factor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Term {
    pub coef: u64,
    pub shift: usize,
    pub factors: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Grammar {
    atoms: Vec<Atom>,
    nonterminals: Vec<Nonterminal>,
    start: usize,
    excursion: Option<usize>,
    /// Order in which coefficients of equal length can be computed.
    order: Vec<usize>,
    min_len: Vec<usize>,
    terms: Vec<Vec<Term>>,
}

pub struct GrammarBuilder {
    atoms: Vec<Atom>,
    nonterminals: Vec<Nonterminal>,
}

impl GrammarBuilder {
    pub fn new(atoms: &[Atom]) -> Self {
        GrammarBuilder {
            atoms: atoms.to_vec(),
            nonterminals: Vec::new(),
        }
    }

    pub fn nonterminal(&mut self, name: impl Into<String>) -> usize {
        self.nonterminals.push(Nonterminal {
            name: name.into(),
            alternatives: Vec::new(),
        });
        self.nonterminals.len() - 1
    }

    pub fn alternative(&mut self, nt: usize, symbols: Vec<Symbol>) {
        self.nonterminals[nt].alternatives.push(symbols);
    }

    /// Finishes the grammar. Unproductive nonterminals, the alternatives that
    /// mention them, and nonterminals unreachable from `start` or `extra_root`
    /// are removed.
    pub fn build(self, start: usize, extra_root: Option<usize>) -> Result<Grammar> {
        let GrammarBuilder {
            atoms,
            mut nonterminals,
        } = self;
        let n = nonterminals.len();
        for nt in &nonterminals {
            for sym in nt.alternatives.iter().flatten() {
                match *sym {
                    Symbol::Atom(a) if a >= atoms.len() => {
                        return Err(Error::InvalidGrammar(format!(
                            "{} uses unknown atom {a}",
                            nt.name
                        )))
                    }
                    Symbol::Nt(x) if x >= n => {
                        return Err(Error::InvalidGrammar(format!(
                            "{} uses unknown nonterminal {x}",
                            nt.name
                        )))
                    }
                    _ => {}
                }
            }
        }

        let min_len = shortest_words(&nonterminals);
        if min_len[start] == usize::MAX {
            return Err(Error::InvalidGrammar(format!(
                "start symbol {} derives no word",
                nonterminals[start].name
            )));
        }
        for nt in nonterminals.iter_mut() {
            nt.alternatives.retain(|alt| {
                alt.iter().all(|s| match s {
                    Symbol::Nt(x) => min_len[*x] != usize::MAX,
                    Symbol::Atom(_) => true,
                })
            });
        }

        let mut keep = vec![false; n];
        let mut stack = vec![start];
        stack.extend(extra_root.filter(|r| min_len[*r] != usize::MAX));
        while let Some(x) = stack.pop() {
            if keep[x] {
                continue;
            }
            keep[x] = true;
            for sym in nonterminals[x].alternatives.iter().flatten() {
                if let Symbol::Nt(y) = sym {
                    stack.push(*y);
                }
            }
        }

        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for (old, nt) in nonterminals.into_iter().enumerate() {
            if keep[old] {
                remap[old] = kept.len();
                kept.push(nt);
            }
        }
        for nt in kept.iter_mut() {
            for sym in nt.alternatives.iter_mut().flatten() {
                if let Symbol::Nt(x) = sym {
                    *x = remap[*x];
                }
            }
        }
        let min_len = shortest_words(&kept);
        let order = evaluation_order(&kept, &min_len)?;
        let terms = kept
            .iter()
            .map(|nt| {
                nt.alternatives
                    .iter()
                    .map(|alt| reduce_alternative(alt, &atoms))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Grammar {
            atoms,
            start: remap[start],
            excursion: extra_root.map(|r| remap[r]).filter(|r| *r != usize::MAX),
            nonterminals: kept,
            order,
            min_len,
            terms,
        })
    }
}

/// Length of the shortest word of each nonterminal (`usize::MAX` if none).
fn shortest_words(nts: &[Nonterminal]) -> Vec<usize> {
    let mut len = vec![usize::MAX; nts.len()];
    loop {
        let mut changed = false;
        for (i, nt) in nts.iter().enumerate() {
            for alt in &nt.alternatives {
                let l = alt.iter().try_fold(0usize, |acc, s| match s {
                    Symbol::Atom(_) => Some(acc + 1),
                    Symbol::Nt(x) => (len[*x] != usize::MAX).then(|| acc + len[*x]),
                });
                if let Some(l) = l {
                    if l < len[i] {
                        len[i] = l;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return len;
        }
    }
}

/// Topological order of the "same length" dependency: `N` needs `X` at the
/// same length when `X` occurs in an alternative of `N` whose other symbols
/// all derive ε. A cycle means some word has infinitely many derivations.
fn evaluation_order(nts: &[Nonterminal], min_len: &[usize]) -> Result<Vec<usize>> {
    let n = nts.len();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, nt) in nts.iter().enumerate() {
        for alt in &nt.alternatives {
            for (pos, sym) in alt.iter().enumerate() {
                let Symbol::Nt(x) = sym else { continue };
                let others_nullable = alt
                    .iter()
                    .enumerate()
                    .all(|(q, s)| q == pos || matches!(s, Symbol::Nt(y) if min_len[*y] == 0));
                if others_nullable && !deps[i].contains(x) {
                    deps[i].push(*x);
                }
            }
        }
    }
    // 0 = unvisited, 1 = in progress, 2 = done
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some((node, next)) = stack.pop() {
            if next < deps[node].len() {
                stack.push((node, next + 1));
                let d = deps[node][next];
                match state[d] {
                    0 => {
                        state[d] = 1;
                        stack.push((d, 0));
                    }
                    1 => {
                        return Err(Error::InvalidGrammar(format!(
                            "ε-cycle through {}",
                            nts[d].name
                        )))
                    }
                    _ => {}
                }
            } else {
                state[node] = 2;
                order.push(node);
            }
        }
    }
    Ok(order)
}

fn reduce_alternative(alt: &[Symbol], atoms: &[Atom]) -> Result<Term> {
    let mut coef: u64 = 1;
    let mut shift = 0;
    let mut factors = Vec::new();
    for sym in alt {
        match *sym {
            Symbol::Atom(a) => {
                coef = coef
                    .checked_mul(atoms[a].weight)
                    .ok_or_else(|| Error::InvalidGrammar("weight product overflows".into()))?;
                shift += 1;
            }
            Symbol::Nt(x) => factors.push(x),
        }
    }
    Ok(Term {
        coef,
        shift,
        factors,
    })
}

impl Grammar {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn nonterminals(&self) -> &[Nonterminal] {
        &self.nonterminals
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// The excursion symbol `D`, when the grammar was built with one.
    pub fn excursion(&self) -> Option<usize> {
        self.excursion
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().position(|nt| nt.name == name)
    }

    pub fn min_len(&self, nt: usize) -> usize {
        self.min_len[nt]
    }

    pub(crate) fn terms(&self, nt: usize) -> &[Term] {
        &self.terms[nt]
    }

    pub fn production_count(&self) -> usize {
        self.nonterminals.iter().map(|n| n.alternatives.len()).sum()
    }

    /// Plain-text productions, one nonterminal per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for nt in &self.nonterminals {
            let alts: Vec<String> = nt
                .alternatives
                .iter()
                .map(|alt| {
                    if alt.is_empty() {
                        "ε".to_string()
                    } else {
                        alt.iter()
                            .map(|s| match *s {
                                Symbol::Atom(a) => {
                                    let at = &self.atoms[a];
                                    format!("a{}[{:+},w{}]", a, at.value, at.weight)
                                }
                                Symbol::Nt(x) => self.nonterminals[x].name.clone(),
                            })
                            .collect::<Vec<_>>()
                            .join(" × ")
                    }
                })
                .collect();
            let _ = writeln!(out, "{} = {}", nt.name, alts.join(" + "));
        }
        out
    }
}

/// Builds the first-dive meander grammar of a 1D stepset.
pub fn build_meander_grammar(a: &StepSet1D) -> Result<Grammar> {
    let m = a.max_down();
    let big_m = a.max_up();
    if m < 1 || big_m < 1 {
        return Err(Error::DegenerateStepset);
    }
    let (m, big_m) = (m as usize, big_m as usize);
    let mut b = GrammarBuilder::new(a.atoms());

    let w = b.nonterminal("W");
    let d = b.nonterminal("D");
    let meander_at: Vec<usize> = (0..=big_m)
        .map(|h| {
            if h == 0 {
                w
            } else {
                b.nonterminal(format!("M{h}"))
            }
        })
        .collect();
    let dive: Vec<usize> = (0..=m)
        .map(|t| {
            if t == 0 {
                usize::MAX
            } else {
                b.nonterminal(format!("B{t}"))
            }
        })
        .collect();
    // climb[j][t] = C_{j,t}
    let climb: Vec<Vec<usize>> = (0..=big_m)
        .map(|j| {
            (0..=m)
                .map(|t| match (j, t) {
                    (_, 0) => usize::MAX,
                    (0, t) => dive[t],
                    (j, t) => b.nonterminal(format!("C{j},{t}")),
                })
                .collect()
        })
        .collect();
    let excursion_at: Vec<usize> = (0..=big_m)
        .map(|j| {
            if j == 0 {
                d
            } else {
                b.nonterminal(format!("T{j}"))
            }
        })
        .collect();

    let up_atoms: Vec<(usize, usize)> = a
        .atoms()
        .iter()
        .filter(|at| at.value >= 0)
        .map(|at| (at.id, at.value as usize))
        .collect();

    b.alternative(w, vec![]);
    for &(id, s) in &up_atoms {
        b.alternative(w, vec![Symbol::Atom(id), Symbol::Nt(meander_at[s])]);
    }
    for h in 1..=big_m {
        b.alternative(meander_at[h], vec![Symbol::Nt(w)]);
        for t in 1..=h.min(m) {
            b.alternative(
                meander_at[h],
                vec![Symbol::Nt(dive[t]), Symbol::Nt(meander_at[h - t])],
            );
        }
    }
    for t in 1..=m {
        for at in a.atoms().iter().filter(|at| at.value == -(t as i64)) {
            b.alternative(dive[t], vec![Symbol::Atom(at.id)]);
        }
        for &(id, j) in &up_atoms {
            b.alternative(dive[t], vec![Symbol::Atom(id), Symbol::Nt(climb[j][t])]);
        }
    }
    for j in 1..=big_m {
        for t in 1..=m {
            if j + t <= m {
                b.alternative(climb[j][t], vec![Symbol::Nt(dive[j + t])]);
            }
            for r in 1..=j.min(m) {
                b.alternative(
                    climb[j][t],
                    vec![Symbol::Nt(dive[r]), Symbol::Nt(climb[j - r][t])],
                );
            }
        }
    }
    b.alternative(d, vec![]);
    for &(id, s) in &up_atoms {
        b.alternative(d, vec![Symbol::Atom(id), Symbol::Nt(excursion_at[s])]);
    }
    for j in 1..=big_m {
        for r in 1..=j.min(m) {
            b.alternative(
                excursion_at[j],
                vec![Symbol::Nt(dive[r]), Symbol::Nt(excursion_at[j - r])],
            );
        }
    }
    b.build(w, Some(d))
}

/// Weighted word counts per nonterminal, indexed by length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTable {
    pub names: Vec<String>,
    pub coefficients: Vec<Vec<BigUint>>,
}

impl SeriesTable {
    pub fn series(&self, nt: usize) -> &[BigUint] {
        &self.coefficients[nt]
    }

    pub fn by_name(&self, name: &str) -> Option<&[BigUint]> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(&self.coefficients[i])
    }
}

/// Exact coefficients `[x^n] N` for `n <= n_max` and every nonterminal.
pub fn grammar_counts(g: &Grammar, n_max: usize) -> SeriesTable {
    let k = g.nonterminals.len();
    let mut c: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); n_max + 1]; k];
    for n in 0..=n_max {
        for &nt in &g.order {
            let mut total = BigUint::zero();
            for term in &g.terms[nt] {
                if term.shift > n {
                    continue;
                }
                let p = product_coefficient(&c, &term.factors, n - term.shift);
                if !p.is_zero() {
                    total += p * term.coef;
                }
            }
            c[nt][n] = total;
        }
    }
    SeriesTable {
        names: g.nonterminals.iter().map(|n| n.name.clone()).collect(),
        coefficients: c,
    }
}

fn product_coefficient(c: &[Vec<BigUint>], factors: &[usize], r: usize) -> BigUint {
    match factors {
        [] => {
            if r == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        }
        [f] => c[*f][r].clone(),
        [f, g] => (0..=r)
            .filter(|&i| !c[*f][i].is_zero() && !c[*g][r - i].is_zero())
            .map(|i| &c[*f][i] * &c[*g][r - i])
            .sum(),
        [first, rest @ ..] => {
            let mut acc: Vec<BigUint> = c[*first][..=r].to_vec();
            for f in rest {
                acc = (0..=r)
                    .map(|n| (0..=n).map(|i| &acc[i] * &c[*f][n - i]).sum())
                    .collect();
            }
            acc.swap_remove(r)
        }
    }
}

/// Weighted counts of non-negative 1D walks by length and final height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightCounts {
    /// `table[n][h]`
    table: Vec<Vec<BigUint>>,
}

impl HeightCounts {
    pub fn meanders(&self, n: usize) -> BigUint {
        self.table[n].iter().sum()
    }

    pub fn excursions(&self, n: usize) -> BigUint {
        self.table[n][0].clone()
    }

    pub fn ending_at(&self, n: usize, h: usize) -> BigUint {
        self.table[n].get(h).cloned().unwrap_or_default()
    }

    pub fn max_len(&self) -> usize {
        self.table.len() - 1
    }
}

/// `f(0,0) = 1`, `f(n,h) = Σ_atoms w · f(n-1, h - value)` over `h - value >= 0`.
pub fn count_walks_dp(a: &StepSet1D, n_max: usize) -> HeightCounts {
    let up = a.max_up().max(0) as usize;
    let mut table = vec![vec![BigUint::one()]];
    for n in 1..=n_max {
        let prev = &table[n - 1];
        let mut row = vec![BigUint::zero(); prev.len() + up];
        for (h, c) in prev.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for at in a.atoms() {
                let to = h as i64 + at.value;
                if to >= 0 {
                    row[to as usize] += c * at.weight;
                }
            }
        }
        table.push(row);
    }
    HeightCounts { table }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(values: &[(i64, u64)]) -> StepSet1D {
        StepSet1D::from_weighted_values(values).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn flagship_dp_values() {
        let dp = count_walks_dp(&set(&[(1, 3), (-1, 6)]), 3);
        let meanders: Vec<BigUint> = (0..=3).map(|n| dp.meanders(n)).collect();
        assert_eq!(meanders, big(&[1, 3, 27, 135]));
        assert_eq!(dp.excursions(2), BigUint::from(18u32));
        assert_eq!(dp.ending_at(2, 2), BigUint::from(9u32));
        assert_eq!(dp.ending_at(3, 1), BigUint::from(108u32));
        assert_eq!(dp.ending_at(3, 3), BigUint::from(27u32));
    }

    #[test]
    fn dyck_dp_values() {
        let dp = count_walks_dp(&set(&[(1, 1), (-1, 1)]), 6);
        let exc: Vec<BigUint> = (0..=6).map(|n| dp.excursions(n)).collect();
        assert_eq!(exc, big(&[1, 0, 1, 0, 2, 0, 5]));
    }

    #[test]
    fn dyck_grammar_counts() {
        let g = build_meander_grammar(&set(&[(1, 1), (-1, 1)])).unwrap();
        let t = grammar_counts(&g, 5);
        assert_eq!(t.series(g.start()), &big(&[1, 1, 2, 3, 6, 10])[..]);
        assert_eq!(t.by_name("D").unwrap(), &big(&[1, 0, 1, 0, 2, 0])[..]);
    }

    #[test]
    fn flagship_grammar_shape() {
        let g = build_meander_grammar(&set(&[(1, 3), (-1, 6)])).unwrap();
        let names: Vec<&str> = g.nonterminals().iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, vec!["W", "D", "M1", "B1", "C1,1", "T1"]);
        let b1 = g.lookup("B1").unwrap();
        // B1 = b + a × C1,1 with C1,1 = B1 × B1
        assert_eq!(g.nonterminals()[b1].alternatives.len(), 2);
        let dump = g.dump();
        assert!(dump.contains("W = ε + a0[+1,w3] × M1"));
        assert!(dump.contains("C1,1 = B1 × B1"));
    }

    #[test]
    fn last_passage_dyck_grammar_agrees() {
        // Nine unit-weight atoms: a1..a3 up, b1..b6 down.
        let atoms: Vec<Atom> = (0..9)
            .map(|id| Atom {
                id,
                value: if id < 3 { 1 } else { -1 },
                weight: 1,
                source: None,
            })
            .collect();
        let mut b = GrammarBuilder::new(&atoms);
        let p = b.nonterminal("P");
        let p_aux = b.nonterminal("P_aux");
        let l1 = b.nonterminal("L1");
        let r1 = b.nonterminal("R1");
        let d = b.nonterminal("D");
        b.alternative(p, vec![Symbol::Nt(d), Symbol::Nt(p_aux)]);
        b.alternative(p_aux, vec![]);
        b.alternative(p_aux, vec![Symbol::Nt(l1), Symbol::Nt(p_aux)]);
        for a in 0..3 {
            b.alternative(l1, vec![Symbol::Atom(a), Symbol::Nt(d)]);
        }
        for a in 3..9 {
            b.alternative(r1, vec![Symbol::Atom(a), Symbol::Nt(d)]);
        }
        b.alternative(d, vec![Symbol::Nt(l1), Symbol::Nt(r1)]);
        b.alternative(d, vec![]);
        let alt = b.build(p, None).unwrap();
        let alt_counts = grammar_counts(&alt, 25);
        assert_eq!(
            &alt_counts.by_name("D").unwrap()[..5],
            &big(&[1, 0, 18, 0, 648])[..]
        );

        let ours = build_meander_grammar(&set(&[(1, 3), (-1, 6)])).unwrap();
        let our_counts = grammar_counts(&ours, 25);
        assert_eq!(
            alt_counts.by_name("P").unwrap(),
            our_counts.series(ours.start())
        );
        assert_eq!(
            alt_counts.by_name("D").unwrap(),
            our_counts.by_name("D").unwrap()
        );
    }

    #[test]
    fn multi_unit_down_step() {
        let a = set(&[(1, 1), (-2, 1)]);
        let g = build_meander_grammar(&a).unwrap();
        let t = grammar_counts(&g, 12);
        let d = t.by_name("D").unwrap();
        for (n, c) in d.iter().enumerate() {
            assert_eq!(c.is_zero(), n % 3 != 0, "n = {n}");
        }
        assert_eq!(d[3], BigUint::one());
    }

    #[test]
    fn zero_atoms_count_as_steps() {
        let a = set(&[(0, 4), (1, 1), (-1, 2)]);
        let g = build_meander_grammar(&a).unwrap();
        let t = grammar_counts(&g, 3);
        assert_eq!(t.series(g.start())[1], BigUint::from(5u32));
    }

    #[test]
    fn unproductive_levels_are_pruned() {
        // Even values only: odd heights are unreachable and B1 is empty.
        let a = set(&[(2, 1), (-2, 1)]);
        let g = build_meander_grammar(&a).unwrap();
        assert!(g.lookup("B1").is_none());
        assert!(g.lookup("B2").is_some());
        let t = grammar_counts(&g, 10);
        let dp = count_walks_dp(&a, 10);
        for n in 0..=10 {
            assert_eq!(t.series(g.start())[n], dp.meanders(n));
        }
    }

    #[test]
    fn epsilon_cycle_is_rejected() {
        let mut b = GrammarBuilder::new(&[]);
        let x = b.nonterminal("X");
        b.alternative(x, vec![]);
        b.alternative(x, vec![Symbol::Nt(x)]);
        assert!(matches!(b.build(x, None), Err(Error::InvalidGrammar(_))));
    }

    #[test]
    fn unknown_references_are_rejected() {
        let mut b = GrammarBuilder::new(&[]);
        let x = b.nonterminal("X");
        b.alternative(x, vec![Symbol::Atom(0)]);
        assert!(matches!(b.build(x, None), Err(Error::InvalidGrammar(_))));
    }

    #[test]
    fn long_alternatives_convolve() {
        let atoms = [Atom {
            id: 0,
            value: 1,
            weight: 2,
            source: None,
        }];
        let mut b = GrammarBuilder::new(&atoms);
        let s = b.nonterminal("S");
        let x = b.nonterminal("X");
        // X = ε + a; S = X X X, so [z^n] S = C(3, n) 2^n.
        b.alternative(x, vec![]);
        b.alternative(x, vec![Symbol::Atom(0)]);
        b.alternative(s, vec![Symbol::Nt(x), Symbol::Nt(x), Symbol::Nt(x)]);
        let g = b.build(s, None).unwrap();
        let t = grammar_counts(&g, 4);
        assert_eq!(t.by_name("S").unwrap(), &big(&[1, 6, 12, 8, 0])[..]);
    }
}
