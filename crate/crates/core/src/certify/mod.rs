//! Bounded-effort certification that a presentation defines the trivial
//! group, `Z` or `Z/p`.
//!
//! The pipeline strips the meridional tier, simplifies the core with the
//! proof-producing [`engine`](self) (commutation propagation plus
//! elimination), discharges meridians, activates conditional relators and
//! simplifies again. When the derivation alone does not reach a canonical
//! form, abelianization and coset enumeration act as a backstop.

mod closure;
mod coset;
mod engine;
mod replay;

use serde::{Deserialize, Serialize};

use crate::abelianize::{h1, H1Result};
use crate::presentation::FpPresentation;
use crate::word::{Generator, Word};

pub use closure::{commutation_closure, CommutationClosure};
pub use coset::{todd_coxeter, CosetEnumeration, CosetError};
pub use replay::{replay, ReplayError, ReplaySummary};

use engine::{Engine, Exhausted};

/// Environment variable overriding [`Budget::max_cosets`].
pub const BUDGET_COSETS_ENV: &str = "M4KIT_BUDGET_COSETS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_cosets: usize,
    pub max_derivation_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_cosets: 1_000_000, max_derivation_steps: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("budget limits must be positive")]
pub struct BudgetError;

impl Budget {
    pub fn new(max_cosets: usize, max_derivation_steps: usize) -> Result<Self, BudgetError> {
        if max_cosets == 0 || max_derivation_steps == 0 {
            return Err(BudgetError);
        }
        Ok(Budget { max_cosets, max_derivation_steps })
    }

    /// Default budget with the coset limit taken from
    /// [`BUDGET_COSETS_ENV`] when it is set to a positive integer.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(n) = std::env::var(BUDGET_COSETS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            if n > 0 {
                b.max_cosets = n;
            }
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Trivial,
    InfiniteCyclic,
    FiniteCyclic { order: u64 },
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Trivial => write!(f, "trivial"),
            Target::InfiniteCyclic => write!(f, "Z"),
            Target::FiniteCyclic { order } => write!(f, "Z/{order}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Trivial,
    InfiniteCyclic { generator: Word },
    FiniteCyclic { order: u64, generator: Word },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_conclusive(&self) -> bool {
        !matches!(self, Verdict::Inconclusive { .. })
    }

    /// Whether the verdict establishes the group named by `target`.
    pub fn meets(&self, target: &Target) -> bool {
        matches!(
            (self, target),
            (Verdict::Trivial, Target::Trivial)
                | (Verdict::InfiniteCyclic { .. }, Target::InfiniteCyclic)
        ) || matches!((self, target), (Verdict::FiniteCyclic { order, .. }, Target::FiniteCyclic { order: o }) if order == o)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Trivial => write!(f, "trivial"),
            Verdict::InfiniteCyclic { generator } => write!(f, "Z generated by {generator}"),
            Verdict::FiniteCyclic { order, generator } => write!(f, "Z/{order} generated by {generator}"),
            Verdict::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

/// How a conclusive verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Every step is in the trace and re-checkable by free reduction.
    Derivation,
    /// Abelianization and coset enumeration, re-run on replay.
    Checks,
}

/// `conj · fact^{±1} · conj⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTerm {
    pub fact: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverse: bool,
    #[serde(default, skip_serializing_if = "Word::is_identity")]
    pub conjugator: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Justification {
    /// Core relator of the input presentation, by index.
    Relator { index: usize },
    /// Conditional relator, activated by a fact proving its meridian trivial.
    Conditional { index: usize, meridian_fact: usize },
    /// The relation is the free reduction of the product of the terms.
    Product { terms: Vec<ProofTerm> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub id: usize,
    pub rule: String,
    /// A word proved equal to the identity.
    pub relation: Word,
    pub justification: Justification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Tietze elimination `generator := definition`, backed by a fact whose
/// relation is exactly `generator · definition⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub generator: Generator,
    pub definition: Word,
    pub fact: usize,
}

/// A meridian word proved trivial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discharge {
    pub meridian: Word,
    pub fact: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetCheck {
    pub presentation: FpPresentation,
    pub subgroup: Vec<Word>,
    /// `None` when the enumeration exceeded the coset budget.
    pub index: Option<usize>,
    pub cosets: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    /// First homology of the core with every conditional relator active.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<H1Result>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset: Option<CosetCheck>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub derivation_steps: usize,
    pub cosets: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: Target,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    pub presentation: FpPresentation,
    pub trace: Vec<TraceStep>,
    pub eliminations: Vec<Elimination>,
    pub survivors: Vec<Generator>,
    /// Live relator facts at the end of the derivation.
    pub final_relators: Vec<usize>,
    pub discharged: Vec<Discharge>,
    pub checks: Checks,
    pub usage: Usage,
}

impl Certificate {
    /// Human-readable trace, one line per step.
    pub fn render_trace(&self) -> String {
        let mut out = String::new();
        for s in &self.trace {
            let how = match &s.justification {
                Justification::Relator { index } => format!("relator #{index}"),
                Justification::Conditional { index, meridian_fact } => {
                    format!("conditional #{index} after [{meridian_fact}]")
                }
                Justification::Product { terms } => {
                    let mut ids: Vec<String> = terms.iter().map(|t| t.fact.to_string()).collect();
                    ids.dedup();
                    format!("from [{}]", ids.join(","))
                }
            };
            out.push_str(&format!("[{}] {:<11} {} = 1   ({how})", s.id, s.rule, s.relation));
            if let Some(n) = &s.note {
                out.push_str(&format!("  {n}"));
            }
            out.push('\n');
        }
        for e in &self.eliminations {
            out.push_str(&format!("eliminate {} := {}   [{}]\n", e.generator, e.definition, e.fact));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }
}

/// Meridian words the full presentation depends on, in first-seen order.
fn meridians(p: &FpPresentation) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    let words = p.meridional().iter().map(|m| &m.meridian).chain(p.conditional().iter().map(|c| &c.meridian));
    for w in words {
        if !out.contains(w) {
            out.push(w.clone());
        }
    }
    out
}

struct Run {
    engine: Engine,
    discharged: Vec<Discharge>,
    exhausted: bool,
    all_discharged: bool,
}

/// Simplify, discharge meridians and activate conditional relators until
/// nothing changes.
fn derive(p: &FpPresentation, budget: &Budget) -> Run {
    let core = FpPresentation::new(p.generators().to_vec(), p.relators().to_vec()).expect("core of a valid presentation");
    let mut engine = Engine::new(&core, budget.max_derivation_steps);
    let wanted = meridians(p);
    let mut discharged: Vec<Discharge> = Vec::new();
    let mut activated = vec![false; p.conditional().len()];
    let mut exhausted = false;
    let result: Result<(), Exhausted> = (|| {
        engine.simplify()?;
        loop {
            for m in &wanted {
                if discharged.iter().any(|d| &d.meridian == m) {
                    continue;
                }
                if let Some(f) = engine.prove_trivial(m, "meridian", Some("meridian is trivial".into()))? {
                    discharged.push(Discharge { meridian: m.clone(), fact: f });
                }
            }
            let mut any = false;
            for (i, c) in p.conditional().iter().enumerate() {
                if activated[i] {
                    continue;
                }
                if let Some(d) = discharged.iter().find(|d| d.meridian == c.meridian) {
                    let j = Justification::Conditional { index: i, meridian_fact: d.fact };
                    engine.add_live("conditional", c.relator.clone(), j, None)?;
                    activated[i] = true;
                    any = true;
                }
            }
            if !any {
                return Ok(());
            }
            engine.simplify()?;
        }
    })();
    if result.is_err() {
        exhausted = true;
    }
    let all_discharged = wanted.iter().all(|m| discharged.iter().any(|d| &d.meridian == m));
    Run { engine, discharged, exhausted, all_discharged }
}

/// The presentation whose group the verdict describes: core relators plus
/// every conditional relator.
pub fn candidate(p: &FpPresentation) -> FpPresentation {
    p.strip_meridional().with_conditionals_activated()
}

/// Certifies `p` against `target`, auto-selecting the cyclic generator.
pub fn certify(p: &FpPresentation, target: &Target, budget: &Budget) -> Certificate {
    certify_with_generator(p, target, None, budget)
}

/// Certifies `p` against `target`; for cyclic targets `generator` (a word
/// over the generators of `p`) is tried first as the cyclic generator.
pub fn certify_with_generator(
    p: &FpPresentation,
    target: &Target,
    generator: Option<&Word>,
    budget: &Budget,
) -> Certificate {
    let mut run = derive(p, budget);
    let mut checks = Checks::default();
    let mut cosets = 0;

    let verdict_and_basis = decide(p, target, generator, budget, &mut run, &mut checks, &mut cosets);
    let (verdict, basis) = match verdict_and_basis {
        Ok(vb) => vb,
        Err(reason) => (Verdict::Inconclusive { reason }, None),
    };
    if verdict == Verdict::Trivial {
        let h = checks.h1.clone().unwrap_or_else(|| h1(&candidate(p)));
        assert!(h.is_trivial(), "trivial verdict with non-trivial abelianization {h}");
    }
    let engine = run.engine;
    Certificate {
        target: target.clone(),
        verdict,
        basis,
        presentation: p.clone(),
        usage: Usage { derivation_steps: engine.steps_used(), cosets },
        eliminations: engine.eliminations.clone(),
        survivors: engine.gens.clone(),
        final_relators: engine.live.clone(),
        trace: engine.steps,
        discharged: run.discharged,
        checks,
    }
}

fn coset_check(
    simplified: &FpPresentation,
    subgroup: Vec<Word>,
    budget: &Budget,
    cosets: &mut usize,
) -> CosetCheck {
    let (index, used) = match todd_coxeter(simplified, &subgroup, budget) {
        Ok(e) => (Some(e.index), e.cosets_defined),
        Err(CosetError::Exceeded { cosets_defined, .. }) => (None, cosets_defined),
    };
    *cosets = (*cosets).max(used);
    CosetCheck { presentation: simplified.clone(), subgroup, index, cosets: used }
}

fn decide(
    p: &FpPresentation,
    target: &Target,
    generator: Option<&Word>,
    budget: &Budget,
    run: &mut Run,
    checks: &mut Checks,
    cosets: &mut usize,
) -> Result<(Verdict, Option<Basis>), String> {
    if !run.all_discharged {
        let pending: Vec<String> = meridians(p)
            .into_iter()
            .filter(|m| !run.discharged.iter().any(|d| &d.meridian == m))
            .map(|m| m.to_string())
            .collect();
        let why = if run.exhausted { "derivation budget exhausted; " } else { "" };
        return Err(format!("{why}meridian not proved trivial: {}", pending.join(", ")));
    }
    let cand = candidate(p);
    let homology = h1(&cand);
    checks.h1 = Some(homology.clone());

    let engine = &mut run.engine;
    if engine.gens.is_empty() && !run.exhausted {
        return Ok((Verdict::Trivial, Some(Basis::Derivation)));
    }

    // A single survivor with power relators pins the group exactly.
    let mut derived_order: Option<u64> = None;
    if engine.gens.len() == 1 && !run.exhausted {
        let c = engine.gens[0].clone();
        if let Ok(order) = engine.cyclic_order(&c) {
            derived_order = order;
        }
    }
    let simplified = engine.presentation();
    let survivor = engine.gens.first().cloned();

    // Candidate cyclic generators, as words over the original generators.
    let mut candidates: Vec<Word> = Vec::new();
    if let Some(g) = generator {
        candidates.push(g.clone());
    }
    if let Some(c) = &survivor {
        candidates.push(Word::gen(c));
    }
    for g in &engine.gens {
        let w = Word::gen(g);
        if !candidates.contains(&w) {
            candidates.push(w);
        }
    }
    // Plain substitution keeps the subgroup word reproducible on replay.
    let live_word = |engine: &Engine, w: &Word| {
        engine.eliminations.iter().fold(w.clone(), |acc, e| acc.substitute(&e.generator, &e.definition))
    };

    if let Some(order) = derived_order {
        let abelian_ok = match order {
            0 => homology.is_infinite_cyclic(),
            1 => homology.is_trivial(),
            n => homology.finite_cyclic_order().is_some_and(|o| o == n.into()),
        };
        assert!(abelian_ok, "derived cyclic order {order} disagrees with abelianization {homology}");
        if order == 1 {
            return Ok((Verdict::Trivial, Some(Basis::Derivation)));
        }
        // Report the first candidate that generates; the survivor always does.
        let mut chosen = Word::gen(survivor.as_ref().expect("single survivor"));
        for w in &candidates {
            let lw = live_word(engine, w);
            let check = coset_check(&simplified, vec![lw], budget, cosets);
            let ok = check.index == Some(1);
            checks.coset = Some(check);
            if ok {
                chosen = w.clone();
                break;
            }
        }
        let verdict = if order == 0 {
            Verdict::InfiniteCyclic { generator: chosen }
        } else {
            Verdict::FiniteCyclic { order, generator: chosen }
        };
        return Ok((verdict, Some(Basis::Derivation)));
    }

    // Backstop: abelianization plus coset enumeration on the simplified core.
    let why = if run.exhausted { "derivation budget exhausted" } else { "derivation stalled" };
    match target {
        Target::Trivial => {
            if !homology.is_trivial() {
                return Err(format!("{why}; abelianization is {homology}"));
            }
            let check = coset_check(&simplified, vec![], budget, cosets);
            let index = check.index;
            checks.coset = Some(check);
            match index {
                Some(1) => Ok((Verdict::Trivial, Some(Basis::Checks))),
                Some(n) => Err(format!("{why}; coset enumeration found index {n}")),
                None => Err(format!("{why}; coset enumeration exceeded {} cosets", budget.max_cosets)),
            }
        }
        Target::InfiniteCyclic | Target::FiniteCyclic { .. } => {
            let order = if homology.is_infinite_cyclic() {
                0
            } else if let Some(n) = homology.finite_cyclic_order().and_then(|n| u64::try_from(n).ok()) {
                n
            } else {
                return Err(format!("{why}; abelianization is {homology}, not cyclic"));
            };
            for w in &candidates {
                let lw = live_word(engine, w);
                let check = coset_check(&simplified, vec![lw], budget, cosets);
                let index = check.index;
                checks.coset = Some(check);
                if index == Some(1) {
                    let verdict = match order {
                        0 => Verdict::InfiniteCyclic { generator: w.clone() },
                        n => Verdict::FiniteCyclic { order: n, generator: w.clone() },
                    };
                    return Ok((verdict, Some(Basis::Checks)));
                }
            }
            Err(format!("{why}; no candidate generator has coset index 1"))
        }
    }
}

/// Result of [`certify_relation`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCertificate {
    pub relation: Word,
    /// Fact id proving the relation, when found.
    pub fact: Option<usize>,
    pub certificate: Certificate,
}

impl RelationCertificate {
    pub fn holds(&self) -> bool {
        self.fact.is_some()
    }
}

/// Tries to prove `relation = 1` in the group of `p`, using conditional
/// relators once their meridians are discharged.
pub fn certify_relation(p: &FpPresentation, relation: &Word, budget: &Budget) -> RelationCertificate {
    let mut run = derive(p, budget);
    let fact = if run.exhausted {
        None
    } else {
        run.engine.prove_trivial(relation, "goal", Some("requested relation".into())).ok().flatten()
    };
    let engine = run.engine;
    let verdict = match fact {
        Some(_) => Verdict::Inconclusive { reason: "relation proof only; the group is not classified".into() },
        None => Verdict::Inconclusive { reason: format!("could not prove {relation} = 1") },
    };
    RelationCertificate {
        relation: relation.clone(),
        fact,
        certificate: Certificate {
            target: Target::Trivial,
            verdict,
            basis: None,
            presentation: p.clone(),
            usage: Usage { derivation_steps: engine.steps_used(), cosets: 0 },
            eliminations: engine.eliminations.clone(),
            survivors: engine.gens.clone(),
            final_relators: engine.live.clone(),
            trace: engine.steps,
            discharged: run.discharged,
            checks: Checks::default(),
        },
    }
}

/// Runs the simplification pipeline and returns the resulting presentation
/// together with its trace. The output group is isomorphic to the core of
/// `p` (meridional tier removed, conditional relators ignored).
pub fn simplify(p: &FpPresentation, budget: &Budget) -> (FpPresentation, Vec<TraceStep>, bool) {
    let core = FpPresentation::new(p.generators().to_vec(), p.relators().to_vec()).expect("core of a valid presentation");
    let mut engine = Engine::new(&core, budget.max_derivation_steps);
    let complete = engine.simplify().is_ok();
    (engine.presentation(), engine.steps, complete)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(gens: &[&str], rels: &[&str]) -> FpPresentation {
        FpPresentation::from_strs(gens, rels)
    }

    #[test]
    fn trivial_by_derivation() {
        let c = certify(&p(&["a", "b"], &["a b^-1", "a^2 b^-1"]), &Target::Trivial, &Budget::default());
        assert_eq!(c.verdict, Verdict::Trivial);
        assert_eq!(c.basis, Some(Basis::Derivation));
        replay(&c).unwrap();
    }

    #[test]
    fn cyclic_orders() {
        let c = certify(&p(&["a", "b"], &["a^6", "b a^-2", "[a,b]"]), &Target::FiniteCyclic { order: 6 }, &Budget::default());
        assert!(c.verdict.meets(&Target::FiniteCyclic { order: 6 }), "{}", c.verdict);
        replay(&c).unwrap();
        let c = certify(&p(&["a", "b"], &["b a^-3"]), &Target::InfiniteCyclic, &Budget::default());
        assert!(matches!(c.verdict, Verdict::InfiniteCyclic { .. }));
        replay(&c).unwrap();
        let c = certify(&p(&["a"], &["a^4", "a^6"]), &Target::FiniteCyclic { order: 2 }, &Budget::default());
        assert!(c.verdict.meets(&Target::FiniteCyclic { order: 2 }), "{}", c.verdict);
        replay(&c).unwrap();
    }

    #[test]
    fn free_group_is_inconclusive_not_negative() {
        let c = certify(&p(&["a", "b"], &[]), &Target::Trivial, &Budget::new(1000, 100).unwrap());
        assert!(!c.verdict.is_conclusive());
    }

    #[test]
    fn symmetric_group_backstop_rejects() {
        let c = certify(&p(&["a", "b"], &["a^2", "b^3", "(a b)^2"]), &Target::Trivial, &Budget::default());
        assert!(!c.verdict.is_conclusive());
    }

    #[test]
    fn meridian_gates_conditionals() {
        // a2 = x^2 only modulo [x,y]; the core kills x and y, so a2 dies too.
        let base = p(&["a2", "x", "y"], &["x", "y x^-1"])
            .with_meridional("g*", Word::parse("[x,y]").unwrap())
            .unwrap()
            .with_conditional(Word::parse("a2 x^-2").unwrap(), Word::parse("[x,y]").unwrap())
            .unwrap();
        let c = certify(&base, &Target::Trivial, &Budget::default());
        assert_eq!(c.verdict, Verdict::Trivial);
        assert_eq!(c.discharged.len(), 1);
        replay(&c).unwrap();
    }

    #[test]
    fn undischarged_meridian_is_inconclusive() {
        let base = p(&["x", "y"], &[]).with_meridional("g*", Word::parse("[x,y]").unwrap()).unwrap();
        let c = certify(&base, &Target::Trivial, &Budget::default());
        assert!(!c.verdict.is_conclusive());
    }

    #[test]
    fn simplify_leaves_free_generator() {
        let (q, _, done) = simplify(&p(&["a"], &[]), &Budget::default());
        assert!(done);
        assert_eq!(q.generators().len(), 1);
        assert!(q.relators().is_empty());
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(0, 1).is_err());
        assert!(Budget::new(1, 0).is_err());
        let b = Budget::default();
        assert_eq!((b.max_cosets, b.max_derivation_steps), (1_000_000, 10_000));
    }
}
