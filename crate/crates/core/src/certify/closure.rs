//! Commuting generator pairs implied by a presentation.

use std::collections::BTreeSet;

use crate::presentation::FpPresentation;
use crate::word::{Generator, Letter, Word};

use super::engine::{pair, partially_commutative_reduce, Engine};

/// Fixed point of commutation propagation over a presentation's generators.
/// Composite words are handled by reduction in the partially commutative
/// group the pairs define.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationClosure {
    pairs: BTreeSet<(Generator, Generator)>,
}

impl CommutationClosure {
    pub fn pairs(&self) -> &BTreeSet<(Generator, Generator)> {
        &self.pairs
    }

    pub fn commutes_gens(&self, a: &Generator, b: &Generator) -> bool {
        a == b || self.pairs.contains(&pair(a, b))
    }

    /// Reduces `w` using only the proved commutations.
    pub fn reduce(&self, w: &Word) -> Word {
        let commutes = |a: &Generator, b: &Generator| self.commutes_gens(a, b);
        let mut noop = |_: &[Letter], _: &Letter, _: &Letter| {};
        partially_commutative_reduce(w, &commutes, &mut noop)
    }

    /// Whether `[u, v] = 1` follows from the proved commutations.
    pub fn commutes(&self, u: &Word, v: &Word) -> bool {
        self.reduce(&Word::commutator(u, v)).is_identity()
    }
}

/// Seeds pairs from commutator relators and propagates through definitional
/// relators `g = w` whose `w` commutes with another generator.
pub fn commutation_closure(p: &FpPresentation) -> CommutationClosure {
    let core = FpPresentation::new(p.generators().to_vec(), p.relators().to_vec()).expect("core of a valid presentation");
    let mut engine = Engine::new(&core, usize::MAX);
    while engine.propagate_commutations().unwrap_or(false) {}
    CommutationClosure { pairs: engine.graph().pairs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn composite_words() {
        let p = FpPresentation::from_strs(&["a", "b", "c"], &["[a,b]", "[a,c]"]);
        let cl = commutation_closure(&p);
        assert!(cl.commutes(&w("a"), &w("b c")));
        assert!(cl.commutes(&w("a^-1"), &w("c^-1 b^2")));
        assert!(!cl.commutes(&w("b"), &w("c")));
    }

    #[test]
    fn empty_relators() {
        let p = FpPresentation::from_strs(&["a", "b"], &[]);
        assert!(commutation_closure(&p).pairs().is_empty());
    }

    #[test]
    fn definitional_propagation() {
        // b1 = x, b2 = y with [x,y] = 1 gives [b1,b2] = 1
        let p = FpPresentation::from_strs(&["b1", "b2", "x", "y"], &["[x,y]", "b1 x^-1", "b2 y^-1"]);
        let cl = commutation_closure(&p);
        assert!(cl.commutes_gens(&Generator::new("b1").unwrap(), &Generator::new("b2").unwrap()));
    }
}
