//! Finite presentations with a meridional tier and conditional relators.
//!
//! Besides ordinary generators and relators an [`FpPresentation`] carries
//! two extra tiers coming from surface complements:
//!
//! * meridional tiers: an unspecified number of extra generators known only
//!   to lie in the normal closure of a meridian word. They never occur in
//!   relators, so they are stored as a label plus the meridian.
//! * conditional relators: relations that hold only modulo the normal
//!   closure of a meridian word. They may be used once that meridian has
//!   been shown trivial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{Generator, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("generator {0} occurs on both sides of a free product")]
    Collision(String),
    #[error("distinguished word {0:?} occurs on both sides of a free product")]
    DistinguishedCollision(String),
    #[error("duplicate generator {0}")]
    DuplicateGenerator(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("generator {0} occurs in its own definition")]
    SelfReferential(String),
    #[error("no relator establishes {0}")]
    MissingRelator(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

/// `label*`: extra generators normally generated by `meridian`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeridionalTier {
    pub label: String,
    pub meridian: Word,
}

/// A relator valid modulo the normal closure of `meridian`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalRelator {
    pub relator: Word,
    pub meridian: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FpPresentation {
    generators: Vec<Generator>,
    relators: Vec<Word>,
    meridional: Vec<MeridionalTier>,
    conditional: Vec<ConditionalRelator>,
    distinguished: BTreeMap<String, Word>,
}

impl FpPresentation {
    pub fn new(generators: Vec<Generator>, relators: Vec<Word>) -> Result<Self, PresentationError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.clone()) {
                return Err(PresentationError::DuplicateGenerator(g.to_string()));
            }
        }
        let p = FpPresentation { generators, relators, ..Default::default() };
        for r in &p.relators {
            p.check_word(r)?;
        }
        Ok(p)
    }

    /// Convenience constructor from generator names and relator text.
    /// Panics on malformed input; intended for catalog data and tests.
    pub fn from_strs(generators: &[&str], relators: &[&str]) -> Self {
        let gens = generators.iter().map(|g| Generator::new(g).expect("generator")).collect();
        let rels = relators.iter().map(|r| Word::parse_relation(r).expect("relator")).collect();
        FpPresentation::new(gens, rels).expect("well-formed presentation")
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn meridional(&self) -> &[MeridionalTier] {
        &self.meridional
    }

    pub fn conditional(&self) -> &[ConditionalRelator] {
        &self.conditional
    }

    pub fn distinguished(&self) -> &BTreeMap<String, Word> {
        &self.distinguished
    }

    pub fn distinguished_word(&self, name: &str) -> Option<&Word> {
        self.distinguished.get(name)
    }

    pub fn has_generator(&self, g: &Generator) -> bool {
        self.generators.contains(g)
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name() == name)
    }

    fn check_word(&self, w: &Word) -> Result<(), PresentationError> {
        for l in w.letters() {
            if !self.generators.contains(&l.gen) {
                return Err(PresentationError::UnknownGenerator(l.gen.to_string()));
            }
        }
        Ok(())
    }

    pub fn with_meridional(mut self, label: &str, meridian: Word) -> Result<Self, PresentationError> {
        self.check_word(&meridian)?;
        self.meridional.push(MeridionalTier { label: label.to_string(), meridian });
        Ok(self)
    }

    pub fn with_conditional(mut self, relator: Word, meridian: Word) -> Result<Self, PresentationError> {
        self.check_word(&relator)?;
        self.check_word(&meridian)?;
        self.conditional.push(ConditionalRelator { relator, meridian });
        Ok(self)
    }

    pub fn with_distinguished(mut self, name: &str, w: Word) -> Result<Self, PresentationError> {
        self.check_word(&w)?;
        self.distinguished.insert(name.to_string(), w);
        Ok(self)
    }

    /// Prefixes every distinguished name with `prefix.`.
    pub fn namespaced(&self, prefix: &str) -> Self {
        let mut p = self.clone();
        p.distinguished =
            self.distinguished.iter().map(|(k, v)| (format!("{prefix}.{k}"), v.clone())).collect();
        p
    }

    /// Renames generators throughout every tier.
    pub fn rename(&self, f: &dyn Fn(&Generator) -> Generator) -> Self {
        FpPresentation {
            generators: self.generators.iter().map(f).collect(),
            relators: self.relators.iter().map(|r| r.rename(f)).collect(),
            meridional: self
                .meridional
                .iter()
                .map(|t| MeridionalTier { label: t.label.clone(), meridian: t.meridian.rename(f) })
                .collect(),
            conditional: self
                .conditional
                .iter()
                .map(|c| ConditionalRelator { relator: c.relator.rename(f), meridian: c.meridian.rename(f) })
                .collect(),
            distinguished: self.distinguished.iter().map(|(k, v)| (k.clone(), v.rename(f))).collect(),
        }
    }

    pub fn free_product(&self, other: &FpPresentation) -> Result<Self, PresentationError> {
        for g in &other.generators {
            if self.generators.contains(g) {
                return Err(PresentationError::Collision(g.to_string()));
            }
        }
        for k in other.distinguished.keys() {
            if self.distinguished.contains_key(k) {
                return Err(PresentationError::DistinguishedCollision(k.clone()));
            }
        }
        let mut p = self.clone();
        p.generators.extend(other.generators.iter().cloned());
        p.relators.extend(other.relators.iter().cloned());
        p.meridional.extend(other.meridional.iter().cloned());
        p.conditional.extend(other.conditional.iter().cloned());
        p.distinguished.extend(other.distinguished.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(p)
    }

    /// Appends relators, i.e. passes to the quotient by their normal closure.
    pub fn impose(&self, relations: &[Word]) -> Result<Self, PresentationError> {
        for r in relations {
            self.check_word(r)?;
        }
        let mut p = self.clone();
        p.relators.extend(relations.iter().cloned());
        Ok(p)
    }

    /// Tietze elimination of `g` using a relator equivalent to `g·definition⁻¹`.
    pub fn eliminate(&self, g: &Generator, definition: &Word) -> Result<Self, PresentationError> {
        if !self.has_generator(g) {
            return Err(PresentationError::UnknownGenerator(g.to_string()));
        }
        if definition.contains(g) {
            return Err(PresentationError::SelfReferential(g.to_string()));
        }
        self.check_word(definition)?;
        let defining = Word::gen(g).multiply(&definition.inverse());
        let idx = self
            .relators
            .iter()
            .position(|r| r.relator_equivalent(&defining))
            .ok_or_else(|| PresentationError::MissingRelator(format!("{g} = {definition}")))?;
        let sub = |w: &Word| w.substitute(g, definition);
        let mut relators = Vec::with_capacity(self.relators.len());
        for (i, r) in self.relators.iter().enumerate() {
            if i == idx {
                continue;
            }
            let r = sub(r);
            if !r.is_identity() {
                relators.push(r);
            }
        }
        Ok(FpPresentation {
            generators: self.generators.iter().filter(|x| *x != g).cloned().collect(),
            relators,
            meridional: self
                .meridional
                .iter()
                .map(|t| MeridionalTier { label: t.label.clone(), meridian: sub(&t.meridian) })
                .collect(),
            conditional: self
                .conditional
                .iter()
                .map(|c| ConditionalRelator { relator: sub(&c.relator), meridian: sub(&c.meridian) })
                .collect(),
            distinguished: self.distinguished.iter().map(|(k, v)| (k.clone(), sub(v))).collect(),
        })
    }

    /// Drops the meridional tier, leaving the core presentation.
    pub fn strip_meridional(&self) -> Self {
        FpPresentation { meridional: Vec::new(), ..self.clone() }
    }

    /// The core with every conditional relator promoted to an ordinary one.
    pub fn with_conditionals_activated(&self) -> Self {
        let mut p = self.strip_meridional();
        p.relators.extend(p.conditional.drain(..).map(|c| c.relator));
        p
    }

    /// Removes the first relator equivalent to `r`; returns `None` when absent.
    pub fn without_relator(&self, r: &Word) -> Option<Self> {
        let idx = self.relators.iter().position(|x| x.relator_equivalent(r))?;
        let mut p = self.clone();
        p.relators.remove(idx);
        Some(p)
    }

    /// Replaces the first relator equivalent to `old` by `new`, in place.
    pub fn replace_relator(&self, old: &Word, new: Word) -> Option<Self> {
        let idx = self.relators.iter().position(|x| x.relator_equivalent(old))?;
        let mut p = self.clone();
        p.relators[idx] = new;
        Some(p)
    }

    pub fn contains_relator(&self, r: &Word) -> bool {
        self.relators.iter().any(|x| x.relator_equivalent(r))
    }

    /// Compares relator multisets up to relator equivalence.
    pub fn same_relators(&self, other: &FpPresentation) -> bool {
        if self.relators.len() != other.relators.len() {
            return false;
        }
        let mut used = vec![false; other.relators.len()];
        'outer: for r in &self.relators {
            for (i, s) in other.relators.iter().enumerate() {
                if !used[i] && r.relator_equivalent(s) {
                    used[i] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Parses the text format documented in `docs/formats.md`.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        parse_presentation(text)
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn word_err(line: usize, offset: usize, e: WordError) -> PresentationError {
    match e {
        WordError::Parse { column, message } => {
            PresentationError::Parse { line, column: offset + column, message }
        }
        WordError::InvalidGenerator(g) => {
            PresentationError::Parse { line, column: offset + 1, message: format!("invalid generator {g:?}") }
        }
    }
}

fn parse_presentation(text: &str) -> Result<FpPresentation, PresentationError> {
    let perr = |line: usize, column: usize, message: &str| PresentationError::Parse {
        line,
        column,
        message: message.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (ln, head) = lines.next().ok_or_else(|| perr(1, 1, "empty presentation"))?;
    let open = head.find('<').ok_or_else(|| perr(ln, 1, "expected '<'"))?;
    let close = head.rfind('>').ok_or_else(|| perr(ln, head.len() + 1, "expected '>'"))?;
    let body = &head[open + 1..close];
    let bar = body.find('|').ok_or_else(|| perr(ln, open + 2, "expected '|'"))?;
    let base = open + 1;

    let mut gens = Vec::new();
    for (off, g) in split_top_level(&body[..bar], ',') {
        let name = g.trim();
        if name.is_empty() {
            continue;
        }
        let col = base + off + g.find(name).unwrap_or(0) + 1;
        gens.push(Generator::new(name).map_err(|_| perr(ln, col, &format!("invalid generator {name:?}")))?);
    }
    let mut rels = Vec::new();
    let rel_base = base + bar + 1;
    for (off, r) in split_top_level(&body[bar + 1..], ',') {
        if r.trim().is_empty() {
            continue;
        }
        rels.push(Word::parse_relation(r).map_err(|e| word_err(ln, rel_base + off, e))?);
    }
    let mut p = FpPresentation::new(gens, rels)?;

    for (ln, line) in lines {
        let (key, rest) = line.split_once(':').ok_or_else(|| perr(ln, 1, "expected 'section:'"))?;
        let offset = key.len() + 1;
        match key.trim() {
            "meridional" => {
                let (label, m) = rest.split_once('~').ok_or_else(|| perr(ln, offset + 1, "expected '~'"))?;
                let mw = Word::parse(m).map_err(|e| word_err(ln, offset + label.len() + 1, e))?;
                p = p.with_meridional(label.trim().trim_end_matches('*'), mw)?;
            }
            "conditional" => {
                let (r, m) = rest.split_once('~').ok_or_else(|| perr(ln, offset + 1, "expected '~'"))?;
                let rw = Word::parse_relation(r).map_err(|e| word_err(ln, offset, e))?;
                let mw = Word::parse(m).map_err(|e| word_err(ln, offset + r.len() + 1, e))?;
                p = p.with_conditional(rw, mw)?;
            }
            "distinguished" => {
                let (name, w) = rest.split_once('=').ok_or_else(|| perr(ln, offset + 1, "expected '='"))?;
                let ww = Word::parse(w).map_err(|e| word_err(ln, offset + name.len() + 1, e))?;
                p = p.with_distinguished(name.trim(), ww)?;
            }
            other => return Err(perr(ln, 1, &format!("unknown section {other:?}"))),
        }
    }
    Ok(p)
}

impl fmt::Display for FpPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| r.to_string()).collect();
        write!(f, "< {} | {} >", gens.join(", "), rels.join(", "))?;
        for t in &self.meridional {
            write!(f, "\nmeridional: {}* ~ {}", t.label, t.meridian)?;
        }
        for c in &self.conditional {
            write!(f, "\nconditional: {} ~ {}", c.relator, c.meridian)?;
        }
        for (k, v) in &self.distinguished {
            write!(f, "\ndistinguished: {k} = {v}")?;
        }
        Ok(())
    }
}

impl Serialize for FpPresentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FpPresentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FpPresentation::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Assignment of target words to source generators.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GeneratorMap {
    assignments: Vec<(Generator, Word)>,
}

impl GeneratorMap {
    pub fn new(assignments: Vec<(Generator, Word)>) -> Self {
        GeneratorMap { assignments }
    }

    pub fn assignments(&self) -> &[(Generator, Word)] {
        &self.assignments
    }

    pub fn get(&self, g: &Generator) -> Option<&Word> {
        self.assignments.iter().find(|(s, _)| s == g).map(|(_, w)| w)
    }

    pub fn sources(&self) -> impl Iterator<Item = &Generator> {
        self.assignments.iter().map(|(g, _)| g)
    }

    /// Image of `w`; `None` if `w` uses a generator outside the domain.
    pub fn apply(&self, w: &Word) -> Option<Word> {
        let mut out = Word::identity();
        for l in w.letters() {
            let img = self.get(&l.gen)?;
            out = out.multiply(&if l.inverse { img.inverse() } else { img.clone() });
        }
        Some(out)
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelianize::h1;

    fn g(s: &str) -> Generator {
        Generator::new(s).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn free_product_basic() {
        let a = FpPresentation::from_strs(&["a"], &[]);
        let b = FpPresentation::from_strs(&["b"], &[]);
        let ab = a.free_product(&b).unwrap();
        assert_eq!(ab.generators().len(), 2);
        assert!(ab.relators().is_empty());

        let a2 = FpPresentation::from_strs(&["a"], &["a^2"]);
        let b3 = FpPresentation::from_strs(&["b"], &["b^3"]);
        let p = a2.free_product(&b3).unwrap();
        let h = h1(&p);
        assert_eq!(h.rank, 0);
        assert_eq!(h.torsion_u64(), vec![6]);
    }

    #[test]
    fn free_product_collision_names_symbol() {
        let a = FpPresentation::from_strs(&["a", "x"], &[]);
        let b = FpPresentation::from_strs(&["x"], &[]);
        assert_eq!(a.free_product(&b), Err(PresentationError::Collision("x".into())));
    }

    #[test]
    fn impose_quotients() {
        let p = FpPresentation::from_strs(&["a", "b"], &[]);
        let q = p.impose(&[w("a b^-1")]).unwrap();
        assert_eq!(h1(&q).rank, 1);
        let t = FpPresentation::from_strs(&["a"], &[]).impose(&[w("a")]).unwrap();
        assert!(h1(&t).is_trivial());
        assert!(matches!(p.impose(&[w("z")]), Err(PresentationError::UnknownGenerator(_))));
    }

    #[test]
    fn impose_associates() {
        let p = FpPresentation::from_strs(&["a", "b", "c"], &["[a,b]"]);
        let r1 = [w("a^2")];
        let r2 = [w("b c^-1"), w("c^3")];
        let both: Vec<Word> = r1.iter().chain(r2.iter()).cloned().collect();
        let lhs = p.impose(&both).unwrap();
        let rhs = p.impose(&r1).unwrap().impose(&r2).unwrap();
        assert!(lhs.same_relators(&rhs));
    }

    #[test]
    fn eliminate_examples() {
        let p = FpPresentation::from_strs(&["a", "b"], &["a b^-1"]);
        let q = p.eliminate(&g("a"), &w("b")).unwrap();
        assert_eq!(q.generators(), &[g("b")]);
        assert!(q.relators().is_empty());

        let p = FpPresentation::from_strs(&["a", "b"], &["a", "[a,b]"]);
        let q = p.eliminate(&g("a"), &Word::identity()).unwrap();
        assert_eq!(q.generators(), &[g("b")]);
        assert!(q.relators().is_empty());
    }

    #[test]
    fn eliminate_errors() {
        let p = FpPresentation::from_strs(&["a", "b"], &["a b^-1"]);
        assert!(matches!(p.eliminate(&g("a"), &w("a b")), Err(PresentationError::SelfReferential(_))));
        assert!(matches!(p.eliminate(&g("a"), &w("b^2")), Err(PresentationError::MissingRelator(_))));
    }

    #[test]
    fn strip_meridional_drops_tier() {
        let p = FpPresentation::from_strs(&["a", "b"], &["[a,b]"]).with_meridional("g", w("[a,b]")).unwrap();
        let s = p.strip_meridional();
        assert!(s.meridional().is_empty());
        assert_eq!(s.relators(), p.relators());
        let plain = FpPresentation::from_strs(&["a"], &["a^3"]);
        assert_eq!(plain.strip_meridional(), plain);
    }

    #[test]
    fn text_round_trip() {
        let text = "< a1, b1, d | [b1^-1,d^-1] = a1, [a1,b1]^2 >\n\
                    meridional: g* ~ [a1,d]\n\
                    conditional: b1 = a1^2 ~ [a1,d]\n\
                    distinguished: meridian = [a1,d]";
        let p = FpPresentation::parse(text).unwrap();
        assert_eq!(p.generators().len(), 3);
        assert_eq!(p.relators().len(), 2);
        assert_eq!(p.meridional().len(), 1);
        assert_eq!(p.conditional()[0].relator, w("b1 a1^-2"));
        let again = FpPresentation::parse(&p.to_string()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn parse_errors_have_positions() {
        match FpPresentation::parse("< a, b | a [b, >") {
            Err(PresentationError::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            FpPresentation::parse("< a | b >"),
            Err(PresentationError::UnknownGenerator(_))
        ));
        match FpPresentation::parse("< a | a >\nbogus: x") {
            Err(PresentationError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generator_map_applies() {
        let m = GeneratorMap::new(vec![(g("a"), w("c")), (g("b"), w("c^-1 d"))]);
        assert_eq!(m.apply(&w("a b")), Some(w("d")));
        assert_eq!(m.apply(&w("z")), None);
    }
}
