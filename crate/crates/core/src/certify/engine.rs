//! Proof-producing rewriting over a finite presentation.
//!
//! Every relation the engine learns is a *fact*. A fact is either an input
//! relator, an activated conditional relator, or a product of conjugates of
//! earlier facts. Rewrites (substitution, commutation swaps) are recorded as
//! proof terms so that [`super::replay`] can re-check them with free
//! reduction alone.

use std::collections::{BTreeMap, BTreeSet};

use crate::presentation::FpPresentation;
use crate::word::{Generator, Letter, Word};

use super::{Elimination, Justification, ProofTerm, TraceStep};

/// Definitions longer than this are not used for elimination.
const MAX_DEFINITION_LEN: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exhausted;

/// Unordered generator pair, stored with the smaller generator first.
pub(crate) fn pair(a: &Generator, b: &Generator) -> (Generator, Generator) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// If `w` is cyclically a commutator of two distinct single generators
/// (any signs), returns them.
pub(crate) fn commutator_pair(w: &Word) -> Option<(Generator, Generator)> {
    let c = w.cyclically_reduced();
    let l = c.letters();
    if l.len() != 4 {
        return None;
    }
    let (x, y) = (&l[0], &l[1]);
    if x.gen == y.gen {
        return None;
    }
    if l[2] == x.inv() && l[3] == y.inv() {
        Some(pair(&x.gen, &y.gen))
    } else {
        None
    }
}

/// Finds `(inverse, conj)` with `conj · base^{±1} · conj⁻¹ = target` when
/// `target` is a cyclic rotation of the cyclic reduction of `base^{±1}`.
pub(crate) fn conjugate_to(base: &Word, target: &Word) -> Option<(bool, Word)> {
    for inverse in [false, true] {
        let b = if inverse { base.inverse() } else { base.clone() };
        let core = b.cyclically_reduced();
        if core.len() != target.len() {
            continue;
        }
        // b = s · core · s⁻¹
        let strip = (b.len() - core.len()) / 2;
        let s = Word::reduce(b.letters()[..strip].iter().cloned());
        let n = core.len();
        for k in 0..n.max(1) {
            let rot = Word::reduce(core.letters()[k..].iter().chain(core.letters()[..k].iter()).cloned());
            if rot == *target {
                // rot = p⁻¹ core p with p = core[..k]
                let p = Word::reduce(core.letters()[..k].iter().cloned());
                let conj = p.inverse().multiply(&s.inverse());
                return Some((inverse, conj));
            }
        }
    }
    None
}

fn term_word(rel: &Word, t: &ProofTerm) -> Word {
    let f = if t.inverse { rel.inverse() } else { rel.clone() };
    f.conjugate(&t.conjugator)
}

/// Commutation graph: generator pair -> fact ids proving the pair commutes.
#[derive(Debug, Clone, Default)]
pub(crate) struct CommGraph {
    edges: BTreeMap<(Generator, Generator), Vec<usize>>,
}

impl CommGraph {
    pub(crate) fn fact_for(&self, a: &Generator, b: &Generator, exclude: Option<usize>) -> Option<usize> {
        self.edges.get(&pair(a, b))?.iter().copied().find(|f| Some(*f) != exclude)
    }

    pub(crate) fn commutes(&self, a: &Generator, b: &Generator, exclude: Option<usize>) -> bool {
        a == b || self.fact_for(a, b, exclude).is_some()
    }

    pub(crate) fn pairs(&self) -> BTreeSet<(Generator, Generator)> {
        self.edges.keys().cloned().collect()
    }

    fn insert(&mut self, p: (Generator, Generator), fact: usize) {
        self.edges.entry(p).or_default().push(fact);
    }
}

/// Reduces `word` in the partially commutative group defined by `commutes`:
/// repeatedly cancels `x … x⁻¹` when everything in between commutes with `x`.
/// `on_swap(prefix, u, v)` is called before each adjacent swap `u v → v u`.
pub(crate) fn partially_commutative_reduce(
    word: &Word,
    commutes: &dyn Fn(&Generator, &Generator) -> bool,
    on_swap: &mut dyn FnMut(&[Letter], &Letter, &Letter),
) -> Word {
    let mut cur: Vec<Letter> = word.letters().to_vec();
    'outer: loop {
        for i in 0..cur.len() {
            let x = cur[i].clone();
            let mut found = None;
            for j in i + 1..cur.len() {
                if cur[j].cancels(&x) {
                    found = Some(j);
                    break;
                }
                if cur[j].gen == x.gen || commutes(&x.gen, &cur[j].gen) {
                    continue;
                }
                break;
            }
            if let Some(j) = found {
                for k in i..j - 1 {
                    if cur[k] != cur[k + 1] {
                        on_swap(&cur[..k], &cur[k], &cur[k + 1]);
                    }
                    cur.swap(k, k + 1);
                }
                cur.drain(j - 1..=j);
                continue 'outer;
            }
        }
        break;
    }
    Word::reduce(cur)
}

pub(crate) struct Engine {
    pub steps: Vec<TraceStep>,
    pub live: Vec<usize>,
    pub gens: Vec<Generator>,
    pub eliminations: Vec<Elimination>,
    max_steps: usize,
    /// exact `g·def⁻¹` facts derived from a relator, keyed by (relator fact, generator)
    definition_cache: BTreeMap<(usize, Generator), usize>,
}

impl Engine {
    pub fn new(p: &FpPresentation, max_steps: usize) -> Self {
        let mut e = Engine {
            steps: Vec::new(),
            live: Vec::new(),
            gens: p.generators().to_vec(),
            eliminations: Vec::new(),
            max_steps,
            definition_cache: BTreeMap::new(),
        };
        for (i, r) in p.relators().iter().enumerate() {
            let id = e.push(TraceStep {
                id: 0,
                rule: "relator".into(),
                relation: r.clone(),
                justification: Justification::Relator { index: i },
                note: None,
            });
            if !r.is_identity() {
                e.live.push(id);
            }
        }
        e
    }

    fn push(&mut self, mut step: TraceStep) -> usize {
        let id = self.steps.len();
        step.id = id;
        self.steps.push(step);
        id
    }

    pub fn steps_used(&self) -> usize {
        self.steps.len()
    }

    pub fn relation(&self, id: usize) -> &Word {
        &self.steps[id].relation
    }

    pub fn add_fact(
        &mut self,
        rule: &str,
        relation: Word,
        justification: Justification,
        note: Option<String>,
    ) -> Result<usize, Exhausted> {
        if self.steps.len() >= self.max_steps {
            return Err(Exhausted);
        }
        debug_assert!(self.check_product(&relation, &justification));
        Ok(self.push(TraceStep { id: 0, rule: rule.to_string(), relation, justification, note }))
    }

    fn check_product(&self, relation: &Word, j: &Justification) -> bool {
        match j {
            Justification::Product { terms } => {
                let mut acc = Word::identity();
                for t in terms {
                    acc = acc.multiply(&term_word(self.relation(t.fact), t));
                }
                acc == *relation
            }
            _ => true,
        }
    }

    pub fn graph(&self) -> CommGraph {
        let live_gens: BTreeSet<&Generator> = self.gens.iter().collect();
        let mut g = CommGraph::default();
        for &f in &self.live {
            if let Some(p) = commutator_pair(self.relation(f)) {
                if live_gens.contains(&p.0) && live_gens.contains(&p.1) {
                    g.insert(p, f);
                }
            }
        }
        g
    }

    /// Rewrites `word` by substituting `g` using fact `d` (relation exactly
    /// `g·def⁻¹`). Returns the new word and the terms applied, in order.
    fn substitute(&self, word: &Word, g: &Generator, def: &Word, d: usize) -> (Word, Vec<ProofTerm>) {
        let mut raw: Vec<Letter> = Vec::with_capacity(word.len());
        let mut terms = Vec::new();
        let def_inv = def.inverse();
        for l in word.letters() {
            if &l.gen != g {
                raw.push(l.clone());
                continue;
            }
            let prefix = Word::reduce(raw.iter().cloned());
            if l.inverse {
                // w⁻¹ g = g⁻¹ (g w⁻¹) g
                let conj = prefix.multiply(&Word::reduce([l.clone()]));
                terms.push(ProofTerm { fact: d, inverse: false, conjugator: conj });
                raw.extend(def_inv.letters().iter().cloned());
            } else {
                // w g⁻¹ = (g w⁻¹)⁻¹
                terms.push(ProofTerm { fact: d, inverse: true, conjugator: prefix });
                raw.extend(def.letters().iter().cloned());
            }
        }
        (Word::reduce(raw), terms)
    }

    /// Partially commutative reduction, recording each swap as a proof term.
    /// Facts listed in `exclude` are not used.
    fn normalize(&self, word: &Word, graph: &CommGraph, exclude: Option<usize>) -> (Word, Vec<ProofTerm>) {
        let mut terms = Vec::new();
        let commutes = |a: &Generator, b: &Generator| graph.commutes(a, b, exclude);
        let mut on_swap = |prefix: &[Letter], u: &Letter, v: &Letter| {
            let fact = graph.fact_for(&u.gen, &v.gen, exclude).expect("swap uses a known edge");
            let target = Word::commutator(&Word::reduce([v.clone()]), &Word::reduce([u.clone()]));
            let (inverse, c) = conjugate_to(self.relation(fact), &target).expect("commutator rotation");
            let p = Word::reduce(prefix.iter().cloned());
            terms.push(ProofTerm { fact, inverse, conjugator: p.multiply(&c) });
        };
        let out = partially_commutative_reduce(word, &commutes, &mut on_swap);
        (out, terms)
    }

    /// Rewrites a word over the original generators into the live
    /// generators and reduces it.
    pub fn rewrite_to_live(&self, word: &Word, graph: &CommGraph, exclude: Option<usize>) -> (Word, Vec<ProofTerm>) {
        let mut cur = word.clone();
        let mut terms = Vec::new();
        for e in &self.eliminations {
            if cur.contains(&e.generator) {
                let (w, t) = self.substitute(&cur, &e.generator, &e.definition, e.fact);
                cur = w;
                terms.extend(t);
            }
        }
        let (w, t) = self.normalize(&cur, graph, exclude);
        terms.extend(t);
        (w, terms)
    }

    /// Product proof of `Y = T_n ⋯ T_1 · X` for fact `x`.
    fn forward(x: usize, applied: &[ProofTerm]) -> Justification {
        let mut terms: Vec<ProofTerm> = applied.iter().rev().cloned().collect();
        terms.push(ProofTerm { fact: x, inverse: false, conjugator: Word::identity() });
        Justification::Product { terms }
    }

    /// Product proof of `X = T_1⁻¹ ⋯ T_n⁻¹` when the terms rewrite `X` to 1.
    fn backward(applied: &[ProofTerm]) -> Justification {
        let terms = applied
            .iter()
            .map(|t| ProofTerm { fact: t.fact, inverse: !t.inverse, conjugator: t.conjugator.clone() })
            .collect();
        Justification::Product { terms }
    }

    /// Tries to prove `word = 1`; on success returns the new fact id.
    pub fn prove_trivial(&mut self, word: &Word, rule: &str, note: Option<String>) -> Result<Option<usize>, Exhausted> {
        let graph = self.graph();
        let (w, terms) = self.rewrite_to_live(word, &graph, None);
        if !w.is_identity() {
            return Ok(None);
        }
        let j = Engine::backward(&terms);
        self.add_fact(rule, word.clone(), j, note).map(Some)
    }

    /// Adds an externally justified fact (e.g. an activated conditional)
    /// and brings it into the live set, rewritten over live generators.
    pub fn add_live(&mut self, rule: &str, relation: Word, j: Justification, note: Option<String>) -> Result<(), Exhausted> {
        let id = self.add_fact(rule, relation, j, note)?;
        let graph = self.graph();
        let (w, terms) = self.rewrite_to_live(self.relation(id), &graph, None);
        if terms.is_empty() {
            if !w.is_identity() {
                self.live.push(id);
            }
            return Ok(());
        }
        let nid = self.add_fact("rewrite", w.clone(), Engine::forward(id, &terms), None)?;
        if !w.is_identity() {
            self.live.push(nid);
        }
        Ok(())
    }

    /// Reduces every live relator against the commutation graph, dropping
    /// those that become trivial. Returns whether anything changed.
    fn normalize_all(&mut self) -> Result<bool, Exhausted> {
        let mut changed = false;
        let mut i = 0;
        while i < self.live.len() {
            let f = self.live[i];
            let graph = self.graph();
            let (w, terms) = self.normalize(self.relation(f), &graph, Some(f));
            if terms.is_empty() && w == *self.relation(f) {
                i += 1;
                continue;
            }
            changed = true;
            if w.is_identity() {
                self.live.remove(i);
                continue;
            }
            let nid = self.add_fact("commute", w, Engine::forward(f, &terms), None)?;
            self.live[i] = nid;
            i += 1;
        }
        Ok(changed)
    }

    /// Definitional readings `g = def` of a live relator: `g` occurs exactly
    /// once in its cyclic reduction.
    fn definitions_of(&self, f: usize) -> Vec<(Generator, Word)> {
        let c = self.relation(f).cyclically_reduced();
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (pos, l) in c.letters().iter().enumerate() {
            if !seen.insert(l.gen.clone()) || c.occurrences(&l.gen) != 1 {
                continue;
            }
            let n = c.len();
            let rest = Word::reduce((1..n).map(|k| c.letters()[(pos + k) % n].clone()));
            let def = if l.inverse { rest } else { rest.inverse() };
            out.push((l.gen.clone(), def));
        }
        out
    }

    /// Exact fact `g·def⁻¹` derived from live relator `f`.
    fn definition_fact(&mut self, f: usize, g: &Generator, def: &Word) -> Result<usize, Exhausted> {
        if let Some(&d) = self.definition_cache.get(&(f, g.clone())) {
            return Ok(d);
        }
        let target = Word::gen(g).multiply(&def.inverse());
        let d = if *self.relation(f) == target {
            f
        } else {
            let (inverse, conjugator) = conjugate_to(self.relation(f), &target).expect("definition is a rotation");
            let j = Justification::Product { terms: vec![ProofTerm { fact: f, inverse, conjugator }] };
            self.add_fact("rotate", target, j, None)?
        };
        self.definition_cache.insert((f, g.clone()), d);
        Ok(d)
    }

    /// One round of commutation propagation: a definitional relator
    /// `g = w` with `w` commuting with `x` proves `[g, x] = 1`.
    pub fn propagate_commutations(&mut self) -> Result<bool, Exhausted> {
        let mut added = false;
        let live = self.live.clone();
        for f in live {
            if !self.live.contains(&f) {
                continue;
            }
            for (g, def) in self.definitions_of(f) {
                if def.len() > MAX_DEFINITION_LEN {
                    continue;
                }
                let gens = self.gens.clone();
                for x in gens.iter().filter(|x| **x != g) {
                    let graph = self.graph();
                    if graph.commutes(&g, x, None) {
                        continue;
                    }
                    let xw = Word::gen(x);
                    if !def.generators().iter().all(|h| h == x || graph.commutes(h, x, None)) {
                        continue;
                    }
                    let (red, _) = self.normalize(&Word::commutator(&def, &xw), &graph, None);
                    if !red.is_identity() {
                        continue;
                    }
                    let d = self.definition_fact(f, &g, &def)?;
                    let goal = Word::commutator(&Word::gen(&g), &xw);
                    let (w1, mut terms) = self.substitute(&goal, &g, &def, d);
                    let (w2, t2) = self.normalize(&w1, &graph, None);
                    debug_assert!(w2.is_identity());
                    terms.extend(t2);
                    let note = Some(format!("{g} = {def} commutes with {x}"));
                    let id = self.add_fact("commutation", goal, Engine::backward(&terms), note)?;
                    self.live.push(id);
                    added = true;
                }
            }
        }
        Ok(added)
    }

    /// Chooses the next elimination: shortest definition first; for
    /// non-trivial definitions prefer generators with few commutation edges;
    /// ties go to the generator listed last.
    fn pick_elimination(&self) -> Option<(usize, Generator, Word)> {
        let graph = self.graph();
        let degree = |g: &Generator| self.gens.iter().filter(|x| *x != g && graph.commutes(g, x, None)).count();
        let position = |g: &Generator| self.gens.iter().position(|x| x == g).unwrap_or(0);
        let mut best: Option<((usize, usize, std::cmp::Reverse<usize>), usize, Generator, Word)> = None;
        for &f in &self.live {
            for (g, def) in self.definitions_of(f) {
                if def.len() > MAX_DEFINITION_LEN {
                    continue;
                }
                let deg = if def.len() > 1 { degree(&g) } else { 0 };
                let key = (def.len(), deg, std::cmp::Reverse(position(&g)));
                if best.as_ref().is_none_or(|(k, ..)| key < *k) {
                    best = Some((key, f, g, def));
                }
            }
        }
        best.map(|(_, f, g, d)| (f, g, d))
    }

    fn eliminate(&mut self, f: usize, g: Generator, def: Word) -> Result<(), Exhausted> {
        let d = self.definition_fact(f, &g, &def)?;
        self.live.retain(|&x| x != f);
        self.gens.retain(|x| *x != g);
        self.eliminations.push(Elimination { generator: g.clone(), definition: def.clone(), fact: d });
        let live = self.live.clone();
        let mut next = Vec::with_capacity(live.len());
        for x in live {
            if !self.relation(x).contains(&g) {
                next.push(x);
                continue;
            }
            let (w, terms) = self.substitute(&self.relation(x).clone(), &g, &def, d);
            if w.is_identity() {
                continue;
            }
            let nid = self.add_fact("substitute", w, Engine::forward(x, &terms), Some(format!("{g} := {def}")))?;
            next.push(nid);
        }
        self.live = next;
        Ok(())
    }

    /// Runs commutation propagation, reduction and elimination to a fixed point.
    pub fn simplify(&mut self) -> Result<(), Exhausted> {
        loop {
            self.normalize_all()?;
            if self.propagate_commutations()? {
                self.normalize_all()?;
            }
            match self.pick_elimination() {
                Some((f, g, def)) => self.eliminate(f, g, def)?,
                None => return Ok(()),
            }
        }
    }

    /// With `c` the only live generator, combines the power relators into a
    /// single fact `c^n` and returns `n` (0 when there are none).
    pub fn cyclic_order(&mut self, c: &Generator) -> Result<Option<u64>, Exhausted> {
        let mut powers: Vec<(usize, i64)> = Vec::new();
        for &f in &self.live {
            match self.relation(f).as_power() {
                Some((g, k)) if &g == c => powers.push((f, k)),
                _ => return Ok(None),
            }
        }
        let Some(&(mut fx, mut x)) = powers.first() else {
            return Ok(Some(0));
        };
        for &(mut fy, mut y) in &powers[1..] {
            // Euclid on exponents; each remainder is a product of earlier facts.
            while y != 0 {
                let q = x.div_euclid(y);
                let r = x - q * y;
                let mut terms = vec![ProofTerm { fact: fx, inverse: false, conjugator: Word::identity() }];
                let inv = q > 0;
                for _ in 0..q.unsigned_abs() {
                    terms.push(ProofTerm { fact: fy, inverse: inv, conjugator: Word::identity() });
                }
                let rel = Word::gen(c).pow(r);
                let fr = if r == 0 {
                    None
                } else {
                    Some(self.add_fact("gcd", rel, Justification::Product { terms }, None)?)
                };
                (fx, x) = (fy, y);
                if let Some(fr) = fr {
                    (fy, y) = (fr, r);
                } else {
                    y = 0;
                }
            }
        }
        if x < 0 {
            let terms = vec![ProofTerm { fact: fx, inverse: true, conjugator: Word::identity() }];
            fx = self.add_fact("gcd", Word::gen(c).pow(-x), Justification::Product { terms }, None)?;
            x = -x;
        }
        self.live = vec![fx];
        Ok(Some(x as u64))
    }

    /// The current presentation over the live generators.
    pub fn presentation(&self) -> FpPresentation {
        let mut rels: Vec<Word> = Vec::new();
        for &f in &self.live {
            let r = self.relation(f);
            if !rels.iter().any(|x| x.relator_equivalent(r)) {
                rels.push(r.clone());
            }
        }
        FpPresentation::new(self.gens.clone(), rels).expect("live relators use live generators")
    }
}
