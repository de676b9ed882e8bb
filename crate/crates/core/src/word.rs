//! Free-group words over named generators.
//!
//! A [`Word`] is always freely reduced. All group computation in the crate
//! (presentations, coset enumeration, derivation traces) is expressed in
//! terms of these values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("invalid generator name {0:?}")]
    InvalidGenerator(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

/// A named group generator such as `a1`, `alpha3` or `g7`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(Arc<str>);

impl Generator {
    pub fn new(name: &str) -> Result<Self, WordError> {
        if is_valid_name(name) {
            Ok(Generator(Arc::from(name)))
        } else {
            Err(WordError::InvalidGenerator(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

/// Generator names start with a letter or underscore and continue with
/// letters, digits, `_`, `.` or `'`. Signs and `^` are never allowed.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(is_name_char)
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\''
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Generator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Generator::new(&s).map_err(serde::de::Error::custom)
    }
}

/// A generator with a sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: Generator,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: Generator, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(&self) -> Letter {
        Letter { gen: self.gen.clone(), inverse: !self.inverse }
    }

    pub fn cancels(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn gen(g: &Generator) -> Self {
        Word { letters: vec![Letter::new(g.clone(), false)] }
    }

    /// Shorthand for a single generator named `name`. Panics on an invalid name.
    pub fn var(name: &str) -> Self {
        Word::gen(&Generator::new(name).expect("valid generator name"))
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in raw {
            if out.last().is_some_and(|last| last.cancels(&l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(Letter::inv).collect() }
    }

    pub fn multiply(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).cloned())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// `by · self · by⁻¹`
    pub fn conjugate(&self, by: &Word) -> Word {
        Word::reduce(
            by.letters
                .iter()
                .cloned()
                .chain(self.letters.iter().cloned())
                .chain(by.inverse().letters),
        )
    }

    /// `[x, y] = x y x⁻¹ y⁻¹`
    pub fn commutator(x: &Word, y: &Word) -> Word {
        Word::reduce(
            x.letters
                .iter()
                .cloned()
                .chain(y.letters.iter().cloned())
                .chain(x.inverse().letters)
                .chain(y.inverse().letters),
        )
    }

    /// Replaces every `g^{±1}` by `replacement^{±1}`.
    pub fn substitute(&self, g: &Generator, replacement: &Word) -> Word {
        if !self.contains(g) {
            return self.clone();
        }
        let inv = replacement.inverse();
        let mut raw = Vec::with_capacity(self.len());
        for l in &self.letters {
            if &l.gen == g {
                let r = if l.inverse { &inv } else { replacement };
                raw.extend(r.letters.iter().cloned());
            } else {
                raw.push(l.clone());
            }
        }
        Word::reduce(raw)
    }

    /// Simultaneous substitution; generators missing from `map` are kept.
    pub fn substitute_all(&self, map: &BTreeMap<Generator, Word>) -> Word {
        let mut raw = Vec::with_capacity(self.len());
        for l in &self.letters {
            match map.get(&l.gen) {
                Some(r) if l.inverse => raw.extend(r.inverse().letters),
                Some(r) => raw.extend(r.letters.iter().cloned()),
                None => raw.push(l.clone()),
            }
        }
        Word::reduce(raw)
    }

    pub fn rename(&self, f: &dyn Fn(&Generator) -> Generator) -> Word {
        Word {
            letters: self.letters.iter().map(|l| Letter::new(f(&l.gen), l.inverse)).collect(),
        }
    }

    /// Strips matching inverse letters from both ends.
    pub fn cyclically_reduced(&self) -> Word {
        let l = &self.letters;
        let (mut i, mut j) = (0usize, l.len());
        while j >= i + 2 && l[i].cancels(&l[j - 1]) {
            i += 1;
            j -= 1;
        }
        Word { letters: l[i..j].to_vec() }
    }

    /// All cyclic rotations of the cyclic reduction.
    pub fn rotations(&self) -> Vec<Word> {
        let c = self.cyclically_reduced();
        let n = c.len();
        if n == 0 {
            return vec![c];
        }
        (0..n)
            .map(|k| Word {
                letters: c.letters[k..].iter().chain(c.letters[..k].iter()).cloned().collect(),
            })
            .collect()
    }

    /// Two relators are equivalent when one is a cyclic permutation of the
    /// other or of its inverse (after cyclic reduction).
    pub fn relator_equivalent(&self, other: &Word) -> bool {
        let a = self.cyclically_reduced();
        let b = other.cyclically_reduced();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        let binv = b.inverse();
        a.rotations().iter().any(|r| *r == b || *r == binv)
    }

    pub fn contains(&self, g: &Generator) -> bool {
        self.letters.iter().any(|l| &l.gen == g)
    }

    pub fn occurrences(&self, g: &Generator) -> usize {
        self.letters.iter().filter(|l| &l.gen == g).count()
    }

    pub fn exponent_sum(&self, g: &Generator) -> i64 {
        self.letters.iter().filter(|l| &l.gen == g).map(Letter::sign).sum()
    }

    pub fn generators(&self) -> BTreeSet<Generator> {
        self.letters.iter().map(|l| l.gen.clone()).collect()
    }

    /// `Some((g, k))` when the word is `g^k` for a single generator, `k ≠ 0`.
    pub fn as_power(&self) -> Option<(Generator, i64)> {
        let first = self.letters.first()?;
        if self.letters.iter().all(|l| l == first) {
            Some((first.gen.clone(), first.sign() * self.len() as i64))
        } else {
            None
        }
    }

    /// Parses the textual word syntax: juxtaposed atoms, `^k` powers,
    /// `[x,y]` commutators, parentheses and `1` for the identity.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let w = p.word()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(w)
    }

    /// Parses either a word or an equation `lhs = rhs`, returning `lhs·rhs⁻¹`.
    pub fn parse_relation(text: &str) -> Result<Word, WordError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let lhs = p.word()?;
        p.skip_ws();
        let w = if p.peek() == Some(b'=') {
            p.pos += 1;
            let rhs = p.word()?;
            lhs.multiply(&rhs.inverse())
        } else {
            lhs
        };
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(w)
    }
}

impl Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        self.multiply(rhs)
    }
}

impl Mul for Word {
    type Output = Word;
    fn mul(self, rhs: Word) -> Word {
        self.multiply(&rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.letters.len() {
            let l = &self.letters[i];
            let mut j = i + 1;
            while j < self.letters.len() && self.letters[j] == *l {
                j += 1;
            }
            let run = (j - i) as i64 * l.sign();
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if run == 1 {
                write!(f, "{}", l.gen)?;
            } else {
                write!(f, "{}^{}", l.gen, run)?;
            }
            i = j;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> WordError {
        WordError::Parse { column: self.pos + 1, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn word(&mut self) -> Result<Word, WordError> {
        let mut acc = Word::identity();
        let mut any = false;
        loop {
            match self.peek() {
                Some(b'*') if any => {
                    self.pos += 1;
                }
                Some(c) if c == b'[' || c == b'(' || c == b'1' || c == b'_' || c.is_ascii_alphabetic() => {
                    let t = self.term()?;
                    acc = acc.multiply(&t);
                    any = true;
                }
                _ => break,
            }
        }
        if !any {
            return Err(self.error("expected a word"));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Word, WordError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            Ok(base.pow(k))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i64, WordError> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') || self.src.get(self.pos) == Some(&b'+') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                self.pos = start;
                self.error("expected an integer exponent")
            })
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let x = self.word()?;
                if self.peek() != Some(b',') {
                    return Err(self.error("expected ',' in commutator"));
                }
                self.pos += 1;
                let y = self.word()?;
                if self.peek() != Some(b']') {
                    return Err(self.error("expected ']'"));
                }
                self.pos += 1;
                Ok(Word::commutator(&x, &y))
            }
            Some(b'(') => {
                self.pos += 1;
                let w = self.word()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(w)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Word::identity())
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && is_name_char(self.src[self.pos] as char) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Ok(Word::gen(&Generator::new(name)?))
            }
            _ => Err(self.error("expected a generator, '[', '(' or '1'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_cancels() {
        assert_eq!(w("a a^-1 b"), w("b"));
        assert_eq!(Word::reduce(Vec::new()), Word::identity());
        assert_eq!(w("a b b^-1 a^-1 c"), w("c"));
    }

    #[test]
    fn group_operations() {
        assert!(w("a").multiply(&w("a^-1")).is_identity());
        assert_eq!(w("a b").inverse(), w("b^-1 a^-1"));
        assert_eq!(w("b").conjugate(&w("a")), w("a b a^-1"));
    }

    #[test]
    fn commutator_convention() {
        assert!(Word::commutator(&w("a"), &w("a")).is_identity());
        assert_eq!(Word::commutator(&w("a"), &w("b")).letters().len(), 4);
        assert_eq!(Word::commutator(&w("a"), &w("b")), w("a b a^-1 b^-1"));
        // [c⁻¹,b₂]⁻¹ = [b₂,c⁻¹]
        let lhs = Word::commutator(&w("c^-1"), &w("b2")).inverse();
        let rhs = Word::commutator(&w("b2"), &w("c^-1"));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, w("b2 c^-1 b2^-1 c"));
    }

    #[test]
    fn substitution() {
        assert_eq!(w("a b").substitute(&Generator::new("b").unwrap(), &Word::identity()), w("a"));
        assert_eq!(
            w("a b a^-1").substitute(&Generator::new("a").unwrap(), &w("c d")),
            w("c d b d^-1 c^-1")
        );
        assert!(w("[a,b]").substitute(&Generator::new("a").unwrap(), &w("b")).is_identity());
    }

    #[test]
    fn parse_sugar() {
        assert_eq!(w("[b1^-1,d1^-1]"), w("b1^-1 d1^-1 b1 d1"));
        assert_eq!(w("(a b)^2"), w("a b a b"));
        assert_eq!(w("[a,b]^-1"), w("b a b^-1 a^-1"));
        assert_eq!(w("1"), Word::identity());
        assert_eq!(w("alpha3^3"), w("alpha3 alpha3 alpha3"));
        assert_eq!(w("a*b"), w("a b"));
        assert_eq!(Word::parse_relation("c = [d^-1,b2^-1]").unwrap(), w("c [d^-1,b2^-1]^-1"));
    }

    #[test]
    fn parse_errors_report_column() {
        match Word::parse("a [b, c") {
            Err(WordError::Parse { column, .. }) => assert_eq!(column, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Word::parse("").is_err());
        assert!(Word::parse("a ^ x").is_err());
    }

    #[test]
    fn display_compresses_runs() {
        assert_eq!(w("a a a b^-1 b^-1").to_string(), "a^3 b^-2");
        assert_eq!(Word::identity().to_string(), "1");
    }

    #[test]
    fn relator_equivalence_covers_commutator_sign_variants() {
        let c = w("[x,y]");
        for v in ["[x^-1,y^-1]", "[x,y^-1]", "[x^-1,y]", "[y,x]", "y x y^-1 x^-1"] {
            assert!(c.relator_equivalent(&w(v)), "{v}");
        }
        assert!(!c.relator_equivalent(&w("[x,y]^2")));
        assert!(w("a b a^-1").relator_equivalent(&w("b")));
    }

    #[test]
    fn as_power() {
        assert_eq!(w("c^5").as_power(), Some((Generator::new("c").unwrap(), 5)));
        assert_eq!(w("c^-2").as_power(), Some((Generator::new("c").unwrap(), -2)));
        assert_eq!(w("c d").as_power(), None);
        assert_eq!(Word::identity().as_power(), None);
    }

    #[test]
    fn generator_names() {
        assert!(Generator::new("alpha3").is_ok());
        assert!(Generator::new("M.alpha1").is_ok());
        assert!(Generator::new("").is_err());
        assert!(Generator::new("a-1").is_err());
        assert!(Generator::new("3a").is_err());
    }
}
