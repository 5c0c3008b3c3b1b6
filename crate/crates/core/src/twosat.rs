//! 2-SAT: satisfiability through strongly connected components of the
//! implication graph, uniqueness of a known solution, and an exhaustive
//! reference counter.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Bitstring, Literal, Posiform};

/// `first OR second`. A unit clause is written `(l OR l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub first: Literal,
    pub second: Literal,
}

impl Clause {
    pub fn new(first: Literal, second: Literal) -> Self {
        Clause { first, second }
    }

    pub fn unit(l: Literal) -> Self {
        Clause {
            first: l,
            second: l,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.first == self.second
    }

    pub fn is_satisfied_by(&self, x: &[bool]) -> bool {
        self.first.eval(x) || self.second.eval(x)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.first, self.second)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TwoSatFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl TwoSatFormula {
    pub fn new(num_vars: usize) -> Self {
        TwoSatFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn with_clauses(num_vars: usize, clauses: impl IntoIterator<Item = Clause>) -> Result<Self> {
        let mut f = TwoSatFormula::new(num_vars);
        for c in clauses {
            f.push(c)?;
        }
        Ok(f)
    }

    pub fn push(&mut self, c: Clause) -> Result<()> {
        for l in [c.first, c.second] {
            if l.var >= self.num_vars {
                return Err(Error::Range(format!(
                    "literal {l} outside 0..{}",
                    self.num_vars
                )));
            }
        }
        self.clauses.push(c);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_satisfied_by(&self, x: &Bitstring) -> Result<bool> {
        x.check_len(self.num_vars)?;
        Ok(self.clauses.iter().all(|c| c.is_satisfied_by(x.bits())))
    }

    fn implication_graph(&self) -> ImplicationGraph {
        let mut g = ImplicationGraph::new(self.num_vars);
        for &c in &self.clauses {
            g.add_clause(c);
        }
        g
    }

    /// A satisfying assignment, or `None` if the formula is unsatisfiable.
    /// Runs in `O(n + m)`. The empty formula yields all zeros.
    pub fn solve(&self) -> Option<Bitstring> {
        self.implication_graph().solve()
    }

    /// Whether `witness` is the only satisfying assignment.
    ///
    /// Variable `i` is pinned to `witness[i]` exactly when the opposite
    /// literal `m` implies its own complement in the implication graph, which
    /// is the condition under which `f AND m` is unsatisfiable. Literals
    /// already known to fail short-circuit later searches.
    pub fn is_uniquely_satisfiable(&self, witness: &Bitstring) -> Result<bool> {
        self.check_witness(witness)?;
        let mut probe = UniquenessProbe::from_graph(self.implication_graph(), witness.clone());
        Ok(probe.is_unique())
    }

    /// Reference uniqueness test: for every variable, solve the formula with
    /// a unit clause forcing the variable away from the witness. Unique iff
    /// all `n` forced formulas are unsatisfiable.
    pub fn is_uniquely_satisfiable_by_forcing(&self, witness: &Bitstring) -> Result<bool> {
        self.check_witness(witness)?;
        let base = self.implication_graph();
        Ok((0..self.num_vars).into_par_iter().all(|i| {
            let mut g = base.clone();
            g.add_clause(Clause::unit(Literal::with_value(i, !witness.get(i))));
            g.solve().is_none()
        }))
    }

    fn check_witness(&self, witness: &Bitstring) -> Result<()> {
        if !self.is_satisfied_by(witness)? {
            return Err(Error::Contract(format!(
                "witness {witness} does not satisfy the formula"
            )));
        }
        Ok(())
    }

    /// Every satisfying assignment, in lexicographic order.
    pub fn brute_force_solutions(&self, cap: usize) -> Result<Vec<Bitstring>> {
        let n = self.num_vars;
        if n > cap || n >= 64 {
            return Err(Error::SizeCap {
                what: "2-SAT enumeration",
                n,
                cap: cap.min(63),
            });
        }
        // a clause is violated iff (mask & bits) == pattern
        let forbidden: Vec<(u64, u64)> = self
            .clauses
            .iter()
            .filter(|c| !(c.first.var == c.second.var && c.first.negated != c.second.negated))
            .map(|c| {
                let bits = (1u64 << c.first.var) | (1u64 << c.second.var);
                let pattern = (u64::from(c.first.negated) << c.first.var)
                    | (u64::from(c.second.negated) << c.second.var);
                (bits, pattern)
            })
            .collect();
        let mut sols: Vec<Bitstring> = (0..1u64 << n)
            .into_par_iter()
            .filter(|&m| forbidden.iter().all(|&(b, p)| m & b != p))
            .map(|m| Bitstring::from_mask(m, n))
            .collect();
        sols.sort();
        Ok(sols)
    }

    /// Exact count of satisfying assignments (`n <= 24`).
    pub fn brute_force_count(&self) -> Result<(usize, Vec<Bitstring>)> {
        let sols = self.brute_force_solutions(24)?;
        Ok((sols.len(), sols))
    }

    /// DIMACS CNF, variables 1-based. Unit clauses are written with a single
    /// literal.
    pub fn to_dimacs(&self) -> String {
        let lit = |l: Literal| {
            let v = l.var as i64 + 1;
            if l.negated {
                -v
            } else {
                v
            }
        };
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            if c.is_unit() {
                out.push_str(&format!("{} 0\n", lit(c.first)));
            } else {
                out.push_str(&format!("{} {} 0\n", lit(c.first), lit(c.second)));
            }
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    ["cnf", n, m] => {
                        let parse = |s: &str| {
                            s.parse::<usize>()
                                .map_err(|_| Error::Parse(format!("bad DIMACS header {line:?}")))
                        };
                        header = Some((parse(n)?, parse(m)?));
                    }
                    _ => return Err(Error::Parse(format!("bad DIMACS header {line:?}"))),
                }
                continue;
            }
            let (n, _) = header.ok_or_else(|| Error::Parse("clause before header".into()))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad literal {tok:?}")))?;
                if v == 0 {
                    let clause = match current.as_slice() {
                        [a] => Clause::unit(*a),
                        [a, b] => Clause::new(*a, *b),
                        [] => return Err(Error::Parse("empty clause".into())),
                        _ => {
                            return Err(Error::Parse(format!(
                                "clause with {} literals is not 2-SAT",
                                current.len()
                            )))
                        }
                    };
                    clauses.push(clause);
                    current.clear();
                } else {
                    let var = v.unsigned_abs() as usize - 1;
                    if var >= n {
                        return Err(Error::Parse(format!("literal {v} exceeds {n} variables")));
                    }
                    current.push(Literal {
                        var,
                        negated: v < 0,
                    });
                }
            }
        }
        let (n, m) = header.ok_or_else(|| Error::Parse("missing DIMACS header".into()))?;
        if !current.is_empty() {
            return Err(Error::Parse("unterminated clause".into()));
        }
        if clauses.len() != m {
            return Err(Error::Parse(format!(
                "header declares {m} clauses, found {}",
                clauses.len()
            )));
        }
        TwoSatFormula::with_clauses(n, clauses)
    }
}

impl From<&Posiform> for TwoSatFormula {
    /// Clauses whose models are exactly the zeros of `p - offset`:
    /// `b z z'` gives `(~z OR ~z')` and `b z` gives `(~z OR ~z)`.
    fn from(p: &Posiform) -> Self {
        let mut f = TwoSatFormula::new(p.num_vars());
        for &z in p.linear().keys() {
            f.clauses.push(Clause::unit(z.complement()));
        }
        for &(z, w) in p.quadratic().keys() {
            f.clauses.push(Clause::new(z.complement(), w.complement()));
        }
        f
    }
}

pub fn posiform_to_two_sat(p: &Posiform) -> TwoSatFormula {
    TwoSatFormula::from(p)
}

/// Node of literal `l`: `2 var` for `~x_var`, `2 var + 1` for `x_var`.
fn node(l: Literal) -> usize {
    2 * l.var + usize::from(!l.negated)
}

/// Clause `(a OR b)` contributes `~a -> b` and `~b -> a`.
#[derive(Debug, Clone)]
pub(crate) struct ImplicationGraph {
    adj: Vec<Vec<u32>>,
}

impl ImplicationGraph {
    pub(crate) fn new(num_vars: usize) -> Self {
        ImplicationGraph {
            adj: vec![Vec::new(); 2 * num_vars],
        }
    }

    pub(crate) fn add_clause(&mut self, c: Clause) {
        self.adj[node(c.first.complement())].push(node(c.second) as u32);
        if !c.is_unit() {
            self.adj[node(c.second.complement())].push(node(c.first) as u32);
        }
    }

    fn num_vars(&self) -> usize {
        self.adj.len() / 2
    }

    /// Tarjan's algorithm with an explicit stack. Components are numbered in
    /// reverse topological order (sinks first).
    fn components(&self) -> Vec<u32> {
        const UNSEEN: u32 = u32::MAX;
        let nn = self.adj.len();
        let mut index = vec![UNSEEN; nn];
        let mut low = vec![0u32; nn];
        let mut comp = vec![UNSEEN; nn];
        let mut on_path: Vec<u32> = Vec::new();
        let mut call: Vec<(u32, u32)> = Vec::new();
        let mut counter = 0u32;
        let mut n_comp = 0u32;

        for root in 0..nn {
            if index[root] != UNSEEN {
                continue;
            }
            call.push((root as u32, 0));
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            on_path.push(root as u32);

            while let Some(&mut (u, ref mut edge)) = call.last_mut() {
                let u = u as usize;
                if let Some(&v) = self.adj[u].get(*edge as usize) {
                    *edge += 1;
                    let v = v as usize;
                    if index[v] == UNSEEN {
                        index[v] = counter;
                        low[v] = counter;
                        counter += 1;
                        on_path.push(v as u32);
                        call.push((v as u32, 0));
                    } else if comp[v] == UNSEEN {
                        low[u] = low[u].min(index[v]);
                    }
                    continue;
                }
                call.pop();
                if low[u] == index[u] {
                    loop {
                        let w = on_path.pop().expect("component root is on the path") as usize;
                        comp[w] = n_comp;
                        if w == u {
                            break;
                        }
                    }
                    n_comp += 1;
                }
                if let Some(&(p, _)) = call.last() {
                    let p = p as usize;
                    low[p] = low[p].min(low[u]);
                }
            }
        }
        comp
    }

    pub(crate) fn solve(&self) -> Option<Bitstring> {
        let comp = self.components();
        (0..self.num_vars())
            .map(|v| {
                let (neg, pos) = (comp[2 * v], comp[2 * v + 1]);
                // the literal whose component is closer to the sinks is true
                (neg != pos).then_some(pos < neg)
            })
            .collect::<Option<Vec<bool>>>()
            .map(Bitstring::new)
    }
}

/// Incremental uniqueness test against a fixed witness.
///
/// Clauses may be added between checks. A variable once shown to be pinned
/// stays pinned as clauses accumulate, so checks resume where the previous
/// one stopped.
#[derive(Debug, Clone)]
pub struct UniquenessProbe {
    graph: ImplicationGraph,
    witness: Bitstring,
    /// `failed[node]`: the literal implies its own complement.
    failed: Vec<bool>,
    next_var: usize,
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl UniquenessProbe {
    pub fn new(witness: Bitstring) -> Self {
        let n = witness.len();
        Self::from_graph(ImplicationGraph::new(n), witness)
    }

    fn from_graph(graph: ImplicationGraph, witness: Bitstring) -> Self {
        let nn = graph.adj.len();
        UniquenessProbe {
            graph,
            witness,
            failed: vec![false; nn],
            next_var: 0,
            stamp: vec![0; nn],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    /// The caller guarantees `c` is satisfied by the witness.
    pub fn add_clause(&mut self, c: Clause) {
        debug_assert!(c.is_satisfied_by(self.witness.bits()));
        self.graph.add_clause(c);
    }

    /// Number of variables already shown to be pinned to the witness.
    pub fn pinned(&self) -> usize {
        self.next_var
    }

    pub fn is_unique(&mut self) -> bool {
        while self.next_var < self.graph.num_vars() {
            let v = self.next_var;
            let m = Literal::with_value(v, !self.witness.get(v));
            if !self.fails(m) {
                return false;
            }
            self.failed[node(m)] = true;
            self.next_var += 1;
        }
        true
    }

    /// Depth-first search from `m` for `~m` or any literal known to fail.
    fn fails(&mut self, m: Literal) -> bool {
        let target = node(m.complement());
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.stack.clear();
        self.stack.push(node(m) as u32);
        self.stamp[node(m)] = self.epoch;
        while let Some(u) = self.stack.pop() {
            for &v in &self.graph.adj[u as usize] {
                let vu = v as usize;
                if vu == target || self.failed[vu] {
                    return true;
                }
                if self.stamp[vu] != self.epoch {
                    self.stamp[vu] = self.epoch;
                    self.stack.push(v);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: usize) -> Literal {
        Literal::pos(v)
    }
    fn n(v: usize) -> Literal {
        Literal::neg(v)
    }

    /// The six-clause planting example, 0-based.
    pub(crate) fn planting_example() -> TwoSatFormula {
        TwoSatFormula::with_clauses(
            3,
            [
                Clause::new(n(1), n(2)),
                Clause::new(p(0), n(1)),
                Clause::new(p(0), n(2)),
                Clause::new(p(0), p(1)),
                Clause::new(n(1), p(2)),
                Clause::new(n(0), p(2)),
            ],
        )
        .unwrap()
    }

    fn bits(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn solve_examples() {
        assert_eq!(planting_example().solve(), Some(bits("101")));
        assert_eq!(TwoSatFormula::new(3).solve(), Some(bits("000")));
        let contradiction = TwoSatFormula::with_clauses(
            2,
            [
                Clause::new(p(0), p(1)),
                Clause::new(p(0), n(1)),
                Clause::new(n(0), p(1)),
                Clause::new(n(0), n(1)),
            ],
        )
        .unwrap();
        assert_eq!(contradiction.solve(), None);
    }

    #[test]
    fn unit_clauses_force_values() {
        let f = TwoSatFormula::with_clauses(2, [Clause::unit(p(1)), Clause::unit(n(0))]).unwrap();
        assert_eq!(f.solve(), Some(bits("01")));
        let g = TwoSatFormula::with_clauses(1, [Clause::unit(p(0)), Clause::unit(n(0))]).unwrap();
        assert_eq!(g.solve(), None);
    }

    #[test]
    fn uniqueness_examples() {
        let f = planting_example();
        assert!(f.is_uniquely_satisfiable(&bits("101")).unwrap());
        assert!(f.is_uniquely_satisfiable_by_forcing(&bits("101")).unwrap());
        let empty = TwoSatFormula::new(1);
        assert!(!empty.is_uniquely_satisfiable(&bits("0")).unwrap());
        assert!(!empty.is_uniquely_satisfiable_by_forcing(&bits("0")).unwrap());
    }

    #[test]
    fn uniqueness_rejects_non_witness() {
        let f = planting_example();
        assert!(matches!(
            f.is_uniquely_satisfiable(&bits("000")),
            Err(Error::Contract(_))
        ));
        assert!(f.is_uniquely_satisfiable_by_forcing(&bits("111")).is_err());
    }

    #[test]
    fn counting_examples() {
        let (count, sols) = planting_example().brute_force_count().unwrap();
        assert_eq!((count, sols), (1, vec![bits("101")]));
        assert_eq!(TwoSatFormula::new(2).brute_force_count().unwrap().0, 4);
        let single = TwoSatFormula::with_clauses(2, [Clause::new(p(0), p(1))]).unwrap();
        assert_eq!(
            single.brute_force_count().unwrap(),
            (3, vec![bits("01"), bits("10"), bits("11")])
        );
        assert!(TwoSatFormula::new(25).brute_force_count().is_err());
    }

    #[test]
    fn tautologies_never_violate() {
        let f = TwoSatFormula::with_clauses(1, [Clause::new(p(0), n(0))]).unwrap();
        assert_eq!(f.brute_force_count().unwrap().0, 2);
        assert!(f.solve().is_some());
    }

    #[test]
    fn posiform_translation() {
        let mut pf = Posiform::new(3);
        for (z, w) in [
            (p(1), p(2)),
            (n(0), p(1)),
            (n(0), p(2)),
            (n(0), n(1)),
            (p(1), n(2)),
            (p(0), n(2)),
        ] {
            pf.add_quadratic(z, w, 1.0).unwrap();
        }
        let mut got: Vec<Clause> = posiform_to_two_sat(&pf).clauses().to_vec();
        let mut want = planting_example().clauses().to_vec();
        got.sort();
        want.sort();
        assert_eq!(got, want);

        assert!(posiform_to_two_sat(&Posiform::new(4)).is_empty());

        let mut small = Posiform::new(3);
        small.add_linear(p(0), 2.0).unwrap();
        small.add_quadratic(n(1), p(2), 1.0).unwrap();
        let f = posiform_to_two_sat(&small);
        assert_eq!(
            f.clauses(),
            &[Clause::unit(n(0)), Clause::new(p(1), n(2))]
        );
        for mask in 0..8 {
            let x = Bitstring::from_mask(mask, 3);
            assert_eq!(
                f.is_satisfied_by(&x).unwrap(),
                small.value(&x).unwrap() - small.offset() == 0.0
            );
        }
    }

    #[test]
    fn dimacs_roundtrip_and_errors() {
        let mut f = planting_example();
        f.push(Clause::unit(p(0))).unwrap();
        let text = f.to_dimacs();
        assert!(text.starts_with("p cnf 3 7\n-2 -3 0\n"));
        assert!(text.ends_with("1 0\n"));
        assert_eq!(TwoSatFormula::from_dimacs(&text).unwrap(), f);

        assert!(TwoSatFormula::from_dimacs("p cnf 3 1\n1 2 3 0\n").is_err());
        assert!(TwoSatFormula::from_dimacs("p cnf 2 1\n1 5 0\n").is_err());
        assert!(TwoSatFormula::from_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(TwoSatFormula::from_dimacs("1 2 0\n").is_err());
        let multi = TwoSatFormula::from_dimacs("c comment\np cnf 2 1\n1\n-2 0\n").unwrap();
        assert_eq!(multi.clauses(), &[Clause::new(p(0), n(1))]);
    }

    #[test]
    fn deep_chain_does_not_overflow_stack() {
        // x_0 -> x_1 -> ... -> x_{n-1}, plus x_0 forced
        let nv = 200_000;
        let mut f = TwoSatFormula::new(nv);
        f.push(Clause::unit(p(0))).unwrap();
        for i in 0..nv - 1 {
            f.push(Clause::new(n(i), p(i + 1))).unwrap();
        }
        let x = f.solve().unwrap();
        assert_eq!(x.count_ones(), nv);
        assert!(f.is_uniquely_satisfiable(&x).unwrap());
    }

    fn arb_formula(max_n: usize, max_m: usize) -> impl Strategy<Value = TwoSatFormula> {
        (1..=max_n).prop_flat_map(move |nv| {
            let lit = (0..nv, any::<bool>()).prop_map(|(var, negated)| Literal { var, negated });
            proptest::collection::vec((lit.clone(), lit), 0..=max_m).prop_map(move |cs| {
                TwoSatFormula::with_clauses(nv, cs.into_iter().map(|(a, b)| Clause::new(a, b)))
                    .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn solver_agrees_with_enumeration(f in arb_formula(10, 30)) {
            let (count, sols) = f.brute_force_count().unwrap();
            match f.solve() {
                Some(x) => {
                    prop_assert!(count > 0);
                    prop_assert!(f.is_satisfied_by(&x).unwrap());
                }
                None => prop_assert_eq!(count, 0),
            }
            if let Some(w) = sols.first() {
                let unique = count == 1;
                prop_assert_eq!(f.is_uniquely_satisfiable(w).unwrap(), unique);
                prop_assert_eq!(f.is_uniquely_satisfiable_by_forcing(w).unwrap(), unique);
            }
        }

        #[test]
        fn incremental_probe_matches_fresh_check(
            f in arb_formula(9, 40),
            checkpoints in proptest::collection::vec(0usize..40, 1..6),
        ) {
            // keep only the clauses satisfied by the all-ones witness
            let w = Bitstring::new(vec![true; f.num_vars()]);
            let kept: Vec<Clause> = f.clauses().iter().copied()
                .filter(|c| c.is_satisfied_by(w.bits())).collect();
            let mut probe = UniquenessProbe::new(w.clone());
            let mut sorted = checkpoints.clone();
            sorted.sort();
            let mut added = 0;
            for cp in sorted {
                let cp = cp.min(kept.len());
                for &c in &kept[added..cp.max(added)] {
                    probe.add_clause(c);
                }
                added = added.max(cp);
                let fresh = TwoSatFormula::with_clauses(f.num_vars(), kept[..added].iter().copied()).unwrap();
                prop_assert_eq!(probe.is_unique(), fresh.brute_force_count().unwrap().0 == 1);
            }
        }
    }
}
