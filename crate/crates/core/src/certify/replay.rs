//! Independent certificate checker.
//!
//! Trace steps, eliminations and derivation-based verdicts are re-checked
//! with free reduction only. Check-based verdicts additionally re-run the
//! recorded abelianization and coset enumeration.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abelianize::h1;
use crate::presentation::FpPresentation;
use crate::word::{Generator, Word};

use super::{todd_coxeter, Basis, Budget, Certificate, Justification, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {id}: {message}")]
    Step { id: usize, message: String },
    #[error("{0}")]
    Structure(String),
    #[error("re-run check failed: {0}")]
    Check(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub steps_checked: usize,
    /// Whether abelianization or coset enumeration was re-run.
    pub reran_checks: bool,
}

fn structure(msg: impl Into<String>) -> ReplayError {
    ReplayError::Structure(msg.into())
}

fn check_steps(c: &Certificate) -> Result<(), ReplayError> {
    let p = &c.presentation;
    for (i, s) in c.trace.iter().enumerate() {
        let fail = |message: String| ReplayError::Step { id: i, message };
        if s.id != i {
            return Err(fail(format!("id {} out of sequence", s.id)));
        }
        match &s.justification {
            Justification::Relator { index } => {
                let r = p.relators().get(*index).ok_or_else(|| fail(format!("no relator #{index}")))?;
                if *r != s.relation {
                    return Err(fail(format!("relator #{index} is {r}, not {}", s.relation)));
                }
            }
            Justification::Conditional { index, meridian_fact } => {
                let cr = p.conditional().get(*index).ok_or_else(|| fail(format!("no conditional #{index}")))?;
                if *meridian_fact >= i {
                    return Err(fail("meridian fact is not earlier".into()));
                }
                if c.trace[*meridian_fact].relation != cr.meridian {
                    return Err(fail(format!("fact {meridian_fact} does not prove {} trivial", cr.meridian)));
                }
                if cr.relator != s.relation {
                    return Err(fail(format!("conditional #{index} is {}", cr.relator)));
                }
            }
            Justification::Product { terms } => {
                let mut acc = Word::identity();
                for t in terms {
                    if t.fact >= i {
                        return Err(fail(format!("term uses later fact {}", t.fact)));
                    }
                    let f = &c.trace[t.fact].relation;
                    let f = if t.inverse { f.inverse() } else { f.clone() };
                    acc = acc.multiply(&t.conjugator.multiply(&f).multiply(&t.conjugator.inverse()));
                }
                if acc != s.relation {
                    return Err(fail(format!("product reduces to {acc}, not {}", s.relation)));
                }
            }
        }
    }
    Ok(())
}

fn fact(c: &Certificate, id: usize) -> Result<&Word, ReplayError> {
    c.trace.get(id).map(|s| &s.relation).ok_or_else(|| structure(format!("fact {id} missing")))
}

/// Checks the elimination chain and returns the survivors it implies.
fn check_eliminations(c: &Certificate) -> Result<Vec<Generator>, ReplayError> {
    let gens = c.presentation.generators();
    let mut gone: BTreeSet<Generator> = BTreeSet::new();
    for e in &c.eliminations {
        if !gens.contains(&e.generator) || gone.contains(&e.generator) {
            return Err(structure(format!("cannot eliminate {}", e.generator)));
        }
        if e.definition.contains(&e.generator) || e.definition.generators().iter().any(|g| gone.contains(g)) {
            return Err(structure(format!("definition of {} uses eliminated generators", e.generator)));
        }
        let expected = Word::gen(&e.generator).multiply(&e.definition.inverse());
        if *fact(c, e.fact)? != expected {
            return Err(structure(format!("fact {} is not {expected}", e.fact)));
        }
        gone.insert(e.generator.clone());
    }
    let survivors: Vec<Generator> = gens.iter().filter(|g| !gone.contains(*g)).cloned().collect();
    if survivors != c.survivors {
        return Err(structure("survivor list does not match eliminations"));
    }
    Ok(survivors)
}

fn substitute_all(c: &Certificate, w: &Word) -> Word {
    c.eliminations.iter().fold(w.clone(), |acc, e| acc.substitute(&e.generator, &e.definition))
}

/// Exponent of `w` as a power of `g`, if it is one.
fn power_of(w: &Word, g: &Generator) -> Option<i64> {
    if w.is_identity() {
        return Some(0);
    }
    match w.as_power() {
        Some((h, k)) if &h == g => Some(k),
        _ => None,
    }
}

fn candidate_relators(p: &FpPresentation) -> Vec<Word> {
    p.relators().iter().cloned().chain(p.conditional().iter().map(|c| c.relator.clone())).collect()
}

/// Re-checks a certificate. Inconclusive certificates only have their trace
/// checked.
pub fn replay(c: &Certificate) -> Result<ReplaySummary, ReplayError> {
    check_steps(c)?;
    let mut summary = ReplaySummary { steps_checked: c.trace.len(), reran_checks: false };
    for d in &c.discharged {
        if *fact(c, d.fact)? != d.meridian {
            return Err(structure(format!("fact {} does not prove {} trivial", d.fact, d.meridian)));
        }
    }
    if !c.verdict.is_conclusive() {
        return Ok(summary);
    }
    let p = &c.presentation;
    let needed = p.meridional().iter().map(|m| &m.meridian).chain(p.conditional().iter().map(|x| &x.meridian));
    for m in needed {
        if !c.discharged.iter().any(|d| &d.meridian == m) {
            return Err(structure(format!("meridian {m} not discharged")));
        }
    }
    let survivors = check_eliminations(c)?;
    let basis = c.basis.ok_or_else(|| structure("conclusive verdict without a basis"))?;
    match basis {
        Basis::Derivation => check_derived_verdict(c, &survivors)?,
        Basis::Checks => {
            check_rerun(c, &survivors)?;
            summary.reran_checks = true;
        }
    }
    if basis == Basis::Derivation && c.checks.coset.is_some() {
        rerun_coset(c)?;
        summary.reran_checks = true;
    }
    Ok(summary)
}

fn check_derived_verdict(c: &Certificate, survivors: &[Generator]) -> Result<(), ReplayError> {
    match &c.verdict {
        Verdict::Trivial => {
            if !survivors.is_empty() {
                return Err(structure("trivial verdict with surviving generators"));
            }
            Ok(())
        }
        Verdict::InfiniteCyclic { generator } | Verdict::FiniteCyclic { generator, .. } => {
            let order = match &c.verdict {
                Verdict::FiniteCyclic { order, .. } => *order as i64,
                _ => 0,
            };
            let [s] = survivors else {
                return Err(structure("cyclic verdict needs exactly one survivor"));
            };
            // Upper bound: a fact s^order (only needed for finite order).
            if order > 0 {
                let has = c.final_relators.iter().any(|&f| {
                    c.trace.get(f).is_some_and(|st| power_of(&st.relation, s).is_some_and(|k| k.abs() == order))
                });
                if !has {
                    return Err(structure(format!("no fact {s}^{order}")));
                }
            }
            // Lower bound: every relator maps into the multiples of order.
            for r in candidate_relators(&c.presentation) {
                let img = substitute_all(c, &r);
                let k = power_of(&img, s).ok_or_else(|| structure(format!("relator {r} does not reduce to a power of {s}")))?;
                let ok = if order == 0 { k == 0 } else { k % order == 0 };
                if !ok {
                    return Err(structure(format!("relator {r} maps to {s}^{k}")));
                }
            }
            let k = power_of(&substitute_all(c, generator), s)
                .ok_or_else(|| structure(format!("{generator} is not a power of {s}")))?;
            let generates = if order == 0 { k.abs() == 1 } else { k.gcd(&order) == 1 };
            if !generates {
                return Err(structure(format!("{generator} = {s}^{k} does not generate")));
            }
            Ok(())
        }
        Verdict::Inconclusive { .. } => Ok(()),
    }
}

fn rerun_coset(c: &Certificate) -> Result<usize, ReplayError> {
    let check = c.checks.coset.as_ref().ok_or_else(|| structure("missing coset check"))?;
    let budget = Budget { max_cosets: check.cosets.max(1) * 4 + 64, ..Budget::default() };
    let got = todd_coxeter(&check.presentation, &check.subgroup, &budget).ok().map(|e| e.index);
    if got != check.index {
        return Err(ReplayError::Check(format!("coset index {got:?}, recorded {:?}", check.index)));
    }
    Ok(got.unwrap_or(0))
}

fn check_rerun(c: &Certificate, survivors: &[Generator]) -> Result<(), ReplayError> {
    let check = c.checks.coset.as_ref().ok_or_else(|| structure("missing coset check"))?;
    // The enumerated presentation must consist of proved facts over the survivors.
    if check.presentation.generators() != survivors {
        return Err(structure("coset check is not over the survivors"));
    }
    for r in check.presentation.relators() {
        let proved = c.final_relators.iter().any(|&f| c.trace.get(f).is_some_and(|s| s.relation == *r));
        if !proved {
            return Err(structure(format!("coset relator {r} is not a final fact")));
        }
    }
    if rerun_coset(c)? != 1 {
        return Err(ReplayError::Check("coset index is not 1".into()));
    }
    let homology = h1(&super::candidate(&c.presentation));
    if c.checks.h1.as_ref() != Some(&homology) {
        return Err(ReplayError::Check(format!("abelianization {homology} differs from recorded")));
    }
    match &c.verdict {
        Verdict::Trivial => {
            if !check.subgroup.is_empty() {
                return Err(structure("trivial verdict must enumerate the trivial subgroup"));
            }
        }
        Verdict::InfiniteCyclic { generator } | Verdict::FiniteCyclic { generator, .. } => {
            if check.subgroup != [substitute_all(c, generator)] {
                return Err(structure("coset subgroup is not the verdict generator"));
            }
            let ok = match &c.verdict {
                Verdict::FiniteCyclic { order, .. } => homology.finite_cyclic_order() == Some((*order).into()),
                _ => homology.is_infinite_cyclic(),
            };
            if !ok {
                return Err(ReplayError::Check(format!("abelianization {homology} does not match verdict")));
            }
        }
        Verdict::Inconclusive { .. } => {}
    }
    Ok(())
}
