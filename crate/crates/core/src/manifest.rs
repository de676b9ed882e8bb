//! Construction manifests: a line-oriented DSL, its pipeline driver and the
//! JSON report it produces. The grammar is documented in `docs/formats.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::abelianize::{h1, H1Result};
use crate::blocks::{self, MarkedManifold, Parity};
use crate::certify::{candidate, certify_with_generator, replay, Budget, Certificate, ReplayError, ReplaySummary, Target, Verdict};
use crate::geography::{coords_of, freedman_model, realize_pair, region_check, FreedmanModel, GeoPoint, Realization};
use crate::presentation::FpPresentation;
use crate::surgery::{blow_up, fiber_sum, torus_surgery, Gluing};
use crate::word::Word;

/// Version of the report layout; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {}, column {}: {message}", pos.line, pos.column)]
pub struct ManifestError {
    pub pos: Pos,
    pub message: String,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, ManifestError> {
    Err(ManifestError { pos, message: message.into() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "constructor")]
pub enum Constructor {
    T4,
    T4Blown,
    T4Blown2,
    Sigma2xT2,
    Sigma2xSigmaN { n: u32 },
    Y1 { p: u64, q: u64 },
    Yn { n: u32, m: u64, skip: Option<String> },
    Zpp { q: u64, r: u64, m: u64, e1: i8, e3: i8 },
    Mqr { q: u64, r: u64 },
    T2xS2_4blowups,
}

/// Constructor names with their required and optional parameters.
const CONSTRUCTORS: &[(&str, &[&str], &[&str])] = &[
    ("T4", &[], &[]),
    ("T4Blown", &[], &[]),
    ("T4Blown2", &[], &[]),
    ("Sigma2xT2", &[], &[]),
    ("Sigma2xSigmaN", &["n"], &[]),
    ("Y1", &["p", "q"], &[]),
    ("Yn", &["n", "m"], &["skip"]),
    ("Zpp", &["q", "r", "m"], &["e1", "e3"]),
    ("Mqr", &["q", "r"], &[]),
    ("T2xS2_4blowups", &[], &[]),
];

impl Constructor {
    pub fn build(&self) -> Result<MarkedManifold, blocks::BlockError> {
        Ok(match self {
            Constructor::T4 => blocks::t4(),
            Constructor::T4Blown => blocks::t4_blown_signed(1, -1),
            Constructor::T4Blown2 => blocks::t4_blown2(),
            Constructor::Sigma2xT2 => blocks::sigma2xt2(),
            Constructor::Sigma2xSigmaN { n } => blocks::sigma2xsigman(*n)?,
            Constructor::Y1 { p, q } => blocks::y1(*p, *q)?,
            Constructor::Yn { n, m, skip } => match skip {
                Some(s) => blocks::yn_skipping(*n, *m, &[s.as_str()])?,
                None => blocks::yn(*n, *m)?,
            },
            Constructor::Zpp { q, r, m, e1, e3 } => blocks::zpp_signed(*q, *r, *m, *e1, *e3)?,
            Constructor::Mqr { q, r } => blocks::mqr(*q, *r)?,
            Constructor::T2xS2_4blowups => blocks::t2xs2_4blowups(),
        })
    }
}

impl fmt::Display for Constructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constructor::T4 => write!(f, "T4()"),
            Constructor::T4Blown => write!(f, "T4Blown()"),
            Constructor::T4Blown2 => write!(f, "T4Blown2()"),
            Constructor::Sigma2xT2 => write!(f, "Sigma2xT2()"),
            Constructor::Sigma2xSigmaN { n } => write!(f, "Sigma2xSigmaN(n={n})"),
            Constructor::Y1 { p, q } => write!(f, "Y1(p={p}, q={q})"),
            Constructor::Yn { n, m, skip: None } => write!(f, "Yn(n={n}, m={m})"),
            Constructor::Yn { n, m, skip: Some(s) } => write!(f, "Yn(n={n}, m={m}, skip={s:?})"),
            Constructor::Zpp { q, r, m, e1: 1, e3: -1 } => write!(f, "Zpp(q={q}, r={r}, m={m})"),
            Constructor::Zpp { q, r, m, e1, e3 } => write!(f, "Zpp(q={q}, r={r}, m={m}, e1={e1}, e3={e3})"),
            Constructor::Mqr { q, r } => write!(f, "Mqr(q={q}, r={r})"),
            Constructor::T2xS2_4blowups => write!(f, "T2xS2_4blowups()"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceRef {
    pub manifold: String,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "key", content = "value", rename_all = "snake_case")]
pub enum Expectation {
    E(i64),
    Sigma(i64),
    ChiH(i64),
    C1sq(i64),
    Parity(Parity),
    Symplectic(bool),
    Pi1(Target),
    Generator(Word),
    Model(FreedmanModel),
    Region(bool),
    Surjective(bool),
    /// Triviality of the meridian of the torus in a realization.
    Meridian(bool),
}

impl Expectation {
    pub fn key(&self) -> &'static str {
        match self {
            Expectation::E(_) => "e",
            Expectation::Sigma(_) => "sigma",
            Expectation::ChiH(_) => "chi_h",
            Expectation::C1sq(_) => "c1sq",
            Expectation::Parity(_) => "parity",
            Expectation::Symplectic(_) => "symplectic",
            Expectation::Pi1(_) => "pi1",
            Expectation::Generator(_) => "generator",
            Expectation::Model(_) => "model",
            Expectation::Region(_) => "region",
            Expectation::Surjective(_) => "surjective",
            Expectation::Meridian(_) => "meridian",
        }
    }

    fn value_text(&self) -> String {
        match self {
            Expectation::E(v) | Expectation::Sigma(v) | Expectation::ChiH(v) | Expectation::C1sq(v) => v.to_string(),
            Expectation::Parity(p) => parity_text(*p).to_string(),
            Expectation::Symplectic(b) | Expectation::Region(b) | Expectation::Surjective(b) => b.to_string(),
            Expectation::Meridian(b) => if *b { "trivial" } else { "nontrivial" }.to_string(),
            Expectation::Pi1(t) => t.to_string(),
            Expectation::Generator(w) => w.to_string().replace(' ', "*"),
            Expectation::Model(m) => m.to_string(),
        }
    }

    fn needs_certificate(&self) -> bool {
        matches!(self, Expectation::Pi1(_) | Expectation::Model(_) | Expectation::Generator(_))
    }
}

fn parity_text(p: Parity) -> &'static str {
    match p {
        Parity::Odd => "odd",
        Parity::Even => "even",
        Parity::Unknown => "unknown",
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.key(), self.value_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub pos: Pos,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "statement", rename_all = "snake_case")]
pub enum Stmt {
    Block { name: String, constructor: Constructor },
    Surgery { name: String, source: String, site: String, k: u64, m: u64 },
    Blowup { name: String, source: String },
    Sum { name: String, left: SurfaceRef, right: SurfaceRef },
    Realize { name: String, chi: i64, c: i64 },
    Expect { target: String, clauses: Vec<Clause> },
}

impl Stmt {
    /// Name introduced by the statement.
    pub fn defines(&self) -> Option<&str> {
        match self {
            Stmt::Block { name, .. }
            | Stmt::Surgery { name, .. }
            | Stmt::Blowup { name, .. }
            | Stmt::Sum { name, .. }
            | Stmt::Realize { name, .. } => Some(name),
            Stmt::Expect { .. } => None,
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Block { name, constructor } => write!(f, "block {name} = {constructor}"),
            Stmt::Surgery { name, source, site, k, m } => {
                write!(f, "surgery {name} = surgery({source}, site={site:?}, k={k}, m={m})")
            }
            Stmt::Blowup { name, source } => write!(f, "blowup {name} = blowup({source})"),
            Stmt::Sum { name, left, right } => write!(
                f,
                "sum {name} = fibersum({}.{}, {}.{}, map=standard)",
                left.manifold, left.surface, right.manifold, right.surface
            ),
            Stmt::Realize { name, chi, c } => write!(f, "realize {name} = realize(chi={chi}, c={c})"),
            Stmt::Expect { target, clauses } => {
                write!(f, "expect {target}:")?;
                for c in clauses {
                    write!(f, " {}", c.expectation)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub pos: Pos,
    pub stmt: Stmt,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub statements: Vec<Statement>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        parse(text)
    }

    /// Statements with positions cleared, for comparisons across formatting.
    pub fn stmts(&self) -> Vec<Stmt> {
        let mut out: Vec<Stmt> = self.statements.iter().map(|s| s.stmt.clone()).collect();
        for s in &mut out {
            if let Stmt::Expect { clauses, .. } = s {
                clauses.iter_mut().for_each(|c| c.pos = Pos::default());
            }
        }
        out
    }
}

/// Canonical text: one statement per line.
impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{}", s.stmt)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Strips a trailing comment: `#` at the start of the line or after
/// whitespace (so `CP2#2CP2bar` survives).
fn strip_comment(line: &str) -> &str {
    let mut prev_space = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_space {
            return &line[..i];
        }
        prev_space = c.is_whitespace();
    }
    line
}

fn lex(line: &str, lineno: usize) -> Result<Vec<(Pos, Tok)>, ManifestError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line: lineno, column: i + 1 };
        if c.is_whitespace() {
            i += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().collect())));
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| ManifestError { pos, message: format!("integer {text} out of range") })?;
            out.push((pos, Tok::Int(v)));
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return err(pos, "unterminated string");
            }
            out.push((pos, Tok::Str(chars[start..i].iter().collect())));
            i += 1;
        } else if "()=,.:".contains(c) {
            out.push((pos, Tok::Punct(c)));
            i += 1;
        } else {
            return err(pos, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(Pos, Tok)>,
    i: usize,
    end: Pos,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |(p, _)| *p)
    }

    fn found(&self) -> String {
        self.peek().map_or("end of line".to_string(), |t| t.to_string())
    }

    fn ident(&mut self, what: &str) -> Result<(Pos, String), ManifestError> {
        match self.toks.get(self.i) {
            Some((p, Tok::Ident(s))) => {
                self.i += 1;
                Ok((*p, s.clone()))
            }
            _ => err(self.pos(), format!("expected {what}, found {}", self.found())),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ManifestError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.i += 1;
            Ok(())
        } else {
            err(self.pos(), format!("expected `{c}`, found {}", self.found()))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn done(&self) -> Result<(), ManifestError> {
        if self.i < self.toks.len() {
            return err(self.pos(), format!("unexpected {}", self.found()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Str(String),
    Ref(String, Option<String>),
}

struct Arg {
    pos: Pos,
    key: Option<String>,
    value: Value,
}

fn parse_value(cur: &mut Cursor) -> Result<Value, ManifestError> {
    let pos = cur.pos();
    match cur.toks.get(cur.i).map(|(_, t)| t.clone()) {
        Some(Tok::Int(v)) => {
            cur.i += 1;
            Ok(Value::Int(v))
        }
        Some(Tok::Str(s)) => {
            cur.i += 1;
            Ok(Value::Str(s))
        }
        Some(Tok::Ident(s)) => {
            cur.i += 1;
            if cur.eat('.') {
                let (_, sub) = cur.ident("surface name")?;
                Ok(Value::Ref(s, Some(sub)))
            } else {
                Ok(Value::Ref(s, None))
            }
        }
        _ => err(pos, format!("expected a value, found {}", cur.found())),
    }
}

fn parse_args(cur: &mut Cursor) -> Result<Vec<Arg>, ManifestError> {
    cur.punct('(')?;
    let mut args = Vec::new();
    if cur.eat(')') {
        return Ok(args);
    }
    loop {
        let pos = cur.pos();
        let named = matches!(cur.peek(), Some(Tok::Ident(_))) && cur.toks.get(cur.i + 1).map(|(_, t)| t) == Some(&Tok::Punct('='));
        let key = if named {
            let (_, k) = cur.ident("argument name")?;
            cur.punct('=')?;
            Some(k)
        } else {
            None
        };
        let value = parse_value(cur)?;
        args.push(Arg { pos, key, value });
        if cur.eat(')') {
            return Ok(args);
        }
        cur.punct(',')?;
    }
}

/// Named integer/string arguments checked against a signature.
struct Named {
    values: BTreeMap<String, (Pos, Value)>,
}

impl Named {
    fn new(args: Vec<Arg>, verb_pos: Pos, verb: &str, required: &[&str], optional: &[&str]) -> Result<Self, ManifestError> {
        let mut values = BTreeMap::new();
        for a in args {
            let Some(k) = a.key else {
                return err(a.pos, format!("{verb} takes named arguments only"));
            };
            if !required.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
                return err(a.pos, format!("{verb} has no parameter `{k}`"));
            }
            if values.insert(k.clone(), (a.pos, a.value)).is_some() {
                return err(a.pos, format!("parameter `{k}` given twice"));
            }
        }
        let missing: Vec<&str> = required.iter().copied().filter(|r| !values.contains_key(*r)).collect();
        if !missing.is_empty() {
            return err(
                verb_pos,
                format!("arity mismatch: {verb} expects ({}), missing {}", required.join(", "), missing.join(", ")),
            );
        }
        Ok(Named { values })
    }

    fn int(&self, key: &str) -> Result<Option<i64>, ManifestError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((_, Value::Int(v))) => Ok(Some(*v)),
            Some((p, _)) => err(*p, format!("`{key}` must be an integer")),
        }
    }

    fn nonneg(&self, key: &str) -> Result<u64, ManifestError> {
        let v = self.int(key)?.expect("required parameter");
        u64::try_from(v).or_else(|_| err(self.values[key].0, format!("`{key}` must be nonnegative")))
    }

    fn sign(&self, key: &str) -> Result<i8, ManifestError> {
        match self.int(key)? {
            None => Ok(if key == "e1" { 1 } else { -1 }),
            Some(1) => Ok(1),
            Some(-1) => Ok(-1),
            Some(_) => err(self.values[key].0, format!("`{key}` must be 1 or -1")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, ManifestError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((_, Value::Str(s))) => Ok(Some(s.clone())),
            Some((p, _)) => err(*p, format!("`{key}` must be a quoted string")),
        }
    }
}

fn parse_constructor(cur: &mut Cursor) -> Result<Constructor, ManifestError> {
    let (pos, name) = cur.ident("constructor")?;
    let Some((_, required, optional)) = CONSTRUCTORS.iter().find(|(n, _, _)| *n == name) else {
        let known: Vec<&str> = CONSTRUCTORS.iter().map(|(n, _, _)| *n).collect();
        return err(pos, format!("unknown constructor `{name}` (known: {})", known.join(", ")));
    };
    let args = parse_args(cur)?;
    let a = Named::new(args, pos, &name, required, optional)?;
    let small = |k: &str| -> Result<u32, ManifestError> {
        let v = a.nonneg(k)?;
        u32::try_from(v).or_else(|_| err(a.values[k].0, format!("`{k}` is too large")))
    };
    Ok(match name.as_str() {
        "T4" => Constructor::T4,
        "T4Blown" => Constructor::T4Blown,
        "T4Blown2" => Constructor::T4Blown2,
        "Sigma2xT2" => Constructor::Sigma2xT2,
        "Sigma2xSigmaN" => Constructor::Sigma2xSigmaN { n: small("n")? },
        "Y1" => Constructor::Y1 { p: a.nonneg("p")?, q: a.nonneg("q")? },
        "Yn" => Constructor::Yn { n: small("n")?, m: a.nonneg("m")?, skip: a.string("skip")? },
        "Zpp" => Constructor::Zpp {
            q: a.nonneg("q")?,
            r: a.nonneg("r")?,
            m: a.nonneg("m")?,
            e1: a.sign("e1")?,
            e3: a.sign("e3")?,
        },
        "Mqr" => Constructor::Mqr { q: a.nonneg("q")?, r: a.nonneg("r")? },
        "T2xS2_4blowups" => Constructor::T2xS2_4blowups,
        _ => unreachable!("constructor table and match agree"),
    })
}

fn positional_ref(args: &[Arg], idx: usize, verb_pos: Pos, verb: &str, surface: bool) -> Result<(String, Option<String>), ManifestError> {
    let Some(a) = args.get(idx) else {
        return err(verb_pos, format!("arity mismatch: {verb} is missing argument {}", idx + 1));
    };
    match (&a.key, &a.value) {
        (None, Value::Ref(m, s)) if s.is_some() == surface => Ok((m.clone(), s.clone())),
        _ if surface => err(a.pos, "expected a surface reference `Manifold.Surface`"),
        _ => err(a.pos, "expected a manifold name"),
    }
}

fn parse_decl(cur: &mut Cursor, keyword: &str) -> Result<Stmt, ManifestError> {
    let (_, name) = cur.ident("a name")?;
    cur.punct('=')?;
    if keyword == "block" {
        let c = parse_constructor(cur)?;
        return Ok(Stmt::Block { name, constructor: c });
    }
    let (vpos, verb) = cur.ident("operation")?;
    let expected = match keyword {
        "surgery" => "surgery",
        "blowup" => "blowup",
        "sum" => "fibersum",
        "realize" => "realize",
        _ => unreachable!("keyword checked by caller"),
    };
    if verb != expected {
        return err(vpos, format!("`{keyword}` statements use `{expected}(...)`, found `{verb}`"));
    }
    let args = parse_args(cur)?;
    match keyword {
        "surgery" => {
            let (source, _) = positional_ref(&args, 0, vpos, &verb, false)?;
            let a = Named::new(args.into_iter().skip(1).collect(), vpos, &verb, &["site", "k", "m"], &[])?;
            let site = a.string("site")?.expect("required");
            Ok(Stmt::Surgery { name, source, site, k: a.nonneg("k")?, m: a.nonneg("m")? })
        }
        "blowup" => {
            let (source, _) = positional_ref(&args, 0, vpos, &verb, false)?;
            if let Some(extra) = args.get(1) {
                return err(extra.pos, "arity mismatch: blowup takes one argument");
            }
            Ok(Stmt::Blowup { name, source })
        }
        "sum" => {
            let (lm, ls) = positional_ref(&args, 0, vpos, &verb, true)?;
            let (rm, rs) = positional_ref(&args, 1, vpos, &verb, true)?;
            let rest: Vec<Arg> = args.into_iter().skip(2).collect();
            for a in &rest {
                match (&a.key, &a.value) {
                    (Some(k), Value::Ref(v, None)) if k == "map" && v == "standard" => {}
                    (Some(k), _) if k == "map" => return err(a.pos, "only map=standard is supported"),
                    _ => return err(a.pos, "arity mismatch: fibersum takes two surfaces and map=standard"),
                }
            }
            Ok(Stmt::Sum {
                name,
                left: SurfaceRef { manifold: lm, surface: ls.expect("surface") },
                right: SurfaceRef { manifold: rm, surface: rs.expect("surface") },
            })
        }
        "realize" => {
            let a = Named::new(args, vpos, &verb, &["chi", "c"], &[])?;
            Ok(Stmt::Realize { name, chi: a.int("chi")?.expect("required"), c: a.int("c")?.expect("required") })
        }
        _ => unreachable!("keyword checked by caller"),
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_target(v: &str) -> Option<Target> {
    match v {
        "trivial" | "1" => Some(Target::Trivial),
        "Z" => Some(Target::InfiniteCyclic),
        _ => v.strip_prefix("Z/").and_then(|n| n.parse().ok()).map(|order| Target::FiniteCyclic { order }),
    }
}

fn parse_clause(key: &str, value: &str, pos: Pos, vpos: Pos) -> Result<Expectation, ManifestError> {
    let int = || value.parse::<i64>().or_else(|_| err(vpos, format!("`{key}` expects an integer, found `{value}`")));
    let boolean = || parse_bool(value).map_or_else(|| err(vpos, format!("`{key}` expects true or false")), Ok);
    Ok(match key {
        "e" => Expectation::E(int()?),
        "sigma" => Expectation::Sigma(int()?),
        "chi_h" => Expectation::ChiH(int()?),
        "c1sq" => Expectation::C1sq(int()?),
        "parity" => Expectation::Parity(match value {
            "odd" => Parity::Odd,
            "even" => Parity::Even,
            "unknown" => Parity::Unknown,
            _ => return err(vpos, "parity expects odd, even or unknown"),
        }),
        "symplectic" => Expectation::Symplectic(boolean()?),
        "region" => Expectation::Region(boolean()?),
        "surjective" => Expectation::Surjective(boolean()?),
        "meridian" => Expectation::Meridian(match value {
            "trivial" => true,
            "nontrivial" => false,
            _ => return err(vpos, "meridian expects trivial or nontrivial"),
        }),
        "pi1" => Expectation::Pi1(parse_target(value).map_or_else(|| err(vpos, format!("unknown group `{value}`")), Ok)?),
        "generator" => {
            Expectation::Generator(Word::parse(&value.replace('*', " ")).or_else(|e| err(vpos, format!("bad word: {e}")))?)
        }
        "model" => Expectation::Model(FreedmanModel::parse(value).map_or_else(|| err(vpos, format!("bad model `{value}`")), Ok)?),
        _ => return err(pos, format!("unknown expectation `{key}`")),
    })
}

fn parse_expect(line: &str, lineno: usize, offset: usize) -> Result<Stmt, ManifestError> {
    // `expect NAME: key=value ...`, values are whitespace-delimited
    let rest = &line[offset..];
    let colon = rest.find(':').map_or_else(|| err(Pos { line: lineno, column: line.len() + 1 }, "expected `:`"), Ok)?;
    let target = rest[..colon].trim();
    let tpos = Pos { line: lineno, column: offset + rest.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1 };
    if target.is_empty() || !target.chars().next().is_some_and(is_ident_start) || !target.chars().all(is_ident_char) {
        return err(tpos, format!("expected a name before `:`, found `{target}`"));
    }
    let mut clauses = Vec::new();
    let body_start = offset + colon + 1;
    let body = &line[body_start..];
    let mut idx = 0;
    for piece in body.split_whitespace() {
        let at = body[idx..].find(piece).expect("piece from split") + idx;
        idx = at + piece.len();
        let pos = Pos { line: lineno, column: body_start + at + 1 };
        let Some((k, v)) = piece.split_once('=') else {
            return err(pos, format!("expected key=value, found `{piece}`"));
        };
        let vpos = Pos { line: lineno, column: pos.column + k.len() + 1 };
        clauses.push(Clause { pos, expectation: parse_clause(k, v, pos, vpos)? });
    }
    if clauses.is_empty() {
        return err(Pos { line: lineno, column: line.len() + 1 }, "expect needs at least one key=value clause");
    }
    Ok(Stmt::Expect { target: target.to_string(), clauses })
}

pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
    let mut statements = Vec::new();
    let mut defined: BTreeSet<String> = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = strip_comment(raw).trim_end();
        let Some(start) = line.find(|c: char| !c.is_whitespace()) else { continue };
        let pos = Pos { line: lineno, column: start + 1 };
        let stmt = if line[start..].starts_with("expect") && line[start + 6..].starts_with(char::is_whitespace) {
            parse_expect(line, lineno, start + 6)?
        } else {
            let toks = lex(line, lineno)?;
            let mut cur = Cursor { toks, i: 0, end: Pos { line: lineno, column: line.chars().count() + 1 } };
            let (kpos, keyword) = cur.ident("a statement keyword")?;
            if !["block", "surgery", "blowup", "sum", "realize"].contains(&keyword.as_str()) {
                return err(kpos, format!("unknown statement `{keyword}`"));
            }
            let s = parse_decl(&mut cur, &keyword)?;
            cur.done()?;
            s
        };
        check_references(&stmt, &defined, pos, line)?;
        if let Some(name) = stmt.defines() {
            if !defined.insert(name.to_string()) {
                return err(pos, format!("`{name}` is already defined"));
            }
        }
        statements.push(Statement { pos, stmt });
    }
    Ok(Manifest { statements })
}

fn check_references(stmt: &Stmt, defined: &BTreeSet<String>, pos: Pos, line: &str) -> Result<(), ManifestError> {
    let refs: Vec<&str> = match stmt {
        Stmt::Surgery { source, .. } | Stmt::Blowup { source, .. } => vec![source],
        Stmt::Sum { left, right, .. } => vec![&left.manifold, &right.manifold],
        Stmt::Expect { target, .. } => vec![target],
        _ => vec![],
    };
    for r in refs {
        if !defined.contains(r) {
            let column = line.find(r).map_or(pos.column, |c| c + 1);
            return err(Pos { line: pos.line, column }, format!("`{r}` is not defined earlier"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- running

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub budget: Budget,
    /// When false, fundamental-group expectations are skipped.
    pub certify: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { budget: Budget::default(), certify: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Skipped,
    Inconclusive,
    Fail,
}

impl Status {
    /// 0 all met, 1 an expectation failed, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Skipped => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSummary {
    pub e: i64,
    pub sigma: i64,
    pub parity: Parity,
    pub symplectic: bool,
    pub minimal: bool,
    pub pi1: FpPresentation,
    pub surfaces: Vec<String>,
    pub tori: Vec<String>,
    pub history: Vec<String>,
}

impl ManifoldSummary {
    fn of(m: &MarkedManifold) -> Self {
        ManifoldSummary {
            e: m.e,
            sigma: m.sigma,
            parity: m.parity,
            symplectic: m.symplectic,
            minimal: m.minimal,
            pi1: m.pi1.clone(),
            surfaces: m.surfaces.keys().cloned().collect(),
            tori: m.tori.keys().cloned().collect(),
            history: m.history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub construction: String,
    pub summand: String,
    pub skipped: String,
    pub torus_generators: Vec<Word>,
    pub meridian: Word,
    pub surjectivity_index: Option<usize>,
    pub meridian_trivial: bool,
    pub meridian_certificate: crate::certify::RelationCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub pos: Pos,
    pub statement: String,
    pub manifold: ManifoldSummary,
    pub coords: Option<GeoPoint>,
    pub region: Option<bool>,
    pub model: Option<FreedmanModel>,
    /// Abelianization of the group the certifier works on.
    pub h1: H1Result,
    pub certificate: Option<Certificate>,
    pub trace: Option<String>,
    pub realization: Option<RealizationSummary>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub pos: Pos,
    pub target: String,
    pub key: String,
    pub expected: String,
    pub actual: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub source: Option<String>,
    pub options: RunOptions,
    pub entries: Vec<Entry>,
    pub expectations: Vec<ExpectationResult>,
    pub status: Status,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

enum Built {
    Manifold(Box<MarkedManifold>),
    Realized(Box<Realization>),
}

impl Built {
    fn manifold(&self) -> &MarkedManifold {
        match self {
            Built::Manifold(m) => m,
            Built::Realized(r) => &r.recipe.manifold,
        }
    }
}

fn target_for(clauses: &[&Clause]) -> Option<(Target, Option<Word>)> {
    let mut target = None;
    let mut generator = None;
    for c in clauses {
        match &c.expectation {
            Expectation::Pi1(t) => target = Some(t.clone()),
            Expectation::Model(_) if target.is_none() => target = Some(Target::Trivial),
            Expectation::Generator(w) => generator = Some(w.clone()),
            _ => {}
        }
    }
    target.map(|t| (t, generator))
}

/// Executes `manifest` in order and evaluates its expectations.
pub fn run(manifest: &Manifest, options: &RunOptions) -> Result<Report, ManifestError> {
    let started = Instant::now();
    let mut values: BTreeMap<String, Built> = BTreeMap::new();
    let mut entries: Vec<Entry> = Vec::new();
    let mut clauses_by_target: BTreeMap<&str, Vec<&Clause>> = BTreeMap::new();
    for s in &manifest.statements {
        if let Stmt::Expect { target, clauses } = &s.stmt {
            clauses_by_target.entry(target.as_str()).or_default().extend(clauses.iter());
        }
    }

    for s in &manifest.statements {
        let t0 = Instant::now();
        let fail = |m: String| ManifestError { pos: s.pos, message: m };
        let get = |name: &str| values.get(name).map(|v| v.manifold().clone()).ok_or_else(|| fail(format!("`{name}` is undefined")));
        let value = match &s.stmt {
            Stmt::Block { name, constructor } => {
                Built::Manifold(Box::new(constructor.build().map_err(|e| fail(e.to_string()))?.with_name(name)))
            }
            Stmt::Surgery { name, source, site, k, m } => {
                let src = get(source)?;
                Built::Manifold(Box::new(torus_surgery(&src, site, *k, *m).map_err(|e| fail(e.to_string()))?.with_name(name)))
            }
            Stmt::Blowup { name, source } => Built::Manifold(Box::new(blow_up(&get(source)?).with_name(name))),
            Stmt::Sum { name, left, right } => {
                let l = get(&left.manifold)?;
                let r = get(&right.manifold)?;
                let genus = l.surface(&left.surface).map_or(2, |s| s.genus);
                let out = fiber_sum(&l, &left.surface, &r, &right.surface, &Gluing::standard(genus)).map_err(|e| fail(e.to_string()))?;
                Built::Manifold(Box::new(out.with_name(name)))
            }
            Stmt::Realize { chi, c, .. } => {
                let r = realize_pair(GeoPoint::new(*chi, *c), &options.budget).map_err(|e| fail(e.to_string()))?;
                Built::Realized(Box::new(r))
            }
            Stmt::Expect { .. } => continue,
        };
        let name = s.stmt.defines().expect("declaration").to_string();
        let m = value.manifold();
        let clauses = clauses_by_target.get(name.as_str()).cloned().unwrap_or_default();
        let coords = coords_of(m).ok();
        let mut certificate = None;
        let mut realization = None;
        match &value {
            Built::Realized(r) => {
                certificate = Some(r.pi1.clone());
                realization = Some(RealizationSummary {
                    construction: r.recipe.construction.clone(),
                    summand: r.recipe.summand.clone(),
                    skipped: r.recipe.skipped.clone(),
                    torus_generators: r.recipe.torus_generators.clone(),
                    meridian: r.recipe.meridian().clone(),
                    surjectivity_index: r.surjectivity.index,
                    meridian_trivial: r.meridian_trivial(),
                    meridian_certificate: r.meridian.clone(),
                });
            }
            Built::Manifold(m) => {
                if options.certify {
                    if let Some((target, generator)) = target_for(&clauses) {
                        let generator = match generator {
                            Some(g) if !g.generators().iter().all(|x| m.pi1.has_generator(x)) => {
                                return err(s.pos, format!("generator {g} is not a word in {name}"));
                            }
                            g => g,
                        };
                        certificate = Some(certify_with_generator(&m.pi1, &target, generator.as_ref(), &options.budget));
                    }
                }
            }
        }
        let model = certificate.as_ref().and_then(|c| freedman_model(m, c).ok());
        entries.push(Entry {
            name: name.clone(),
            pos: s.pos,
            statement: s.stmt.to_string(),
            manifold: ManifoldSummary::of(m),
            coords,
            region: coords.map(region_check),
            model,
            h1: h1(&candidate(&m.pi1)),
            trace: certificate.as_ref().map(|c| c.render_trace()),
            certificate,
            realization,
            wall_time_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        values.insert(name, value);
    }

    let mut expectations = Vec::new();
    for s in &manifest.statements {
        let Stmt::Expect { target, clauses } = &s.stmt else { continue };
        let entry = entries.iter().find(|e| &e.name == target).expect("targets are checked at parse time");
        for c in clauses {
            expectations.push(evaluate(entry, c, options));
        }
    }
    let status = expectations.iter().map(|e| e.status).max().unwrap_or(Status::Pass);
    let status = if status == Status::Skipped { Status::Pass } else { status };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        source: None,
        options: *options,
        entries,
        expectations,
        status,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn evaluate(entry: &Entry, clause: &Clause, options: &RunOptions) -> ExpectationResult {
    let m = &entry.manifold;
    let expected = clause.expectation.value_text();
    let cmp = |ok: bool, actual: String| (if ok { Status::Pass } else { Status::Fail }, actual);
    let cert = entry.certificate.as_ref();
    let (status, actual) = if clause.expectation.needs_certificate() && entry.realization.is_none() && !options.certify {
        (Status::Skipped, "not certified (build mode)".to_string())
    } else {
        match &clause.expectation {
            Expectation::E(v) => cmp(m.e == *v, m.e.to_string()),
            Expectation::Sigma(v) => cmp(m.sigma == *v, m.sigma.to_string()),
            Expectation::ChiH(v) => match entry.coords {
                Some(p) => cmp(p.chi_h == *v, p.chi_h.to_string()),
                None => (Status::Fail, "e + sigma not divisible by 4".into()),
            },
            Expectation::C1sq(v) => match entry.coords {
                Some(p) => cmp(p.c1sq == *v, p.c1sq.to_string()),
                None => (Status::Fail, "e + sigma not divisible by 4".into()),
            },
            Expectation::Region(b) => match entry.region {
                Some(r) => cmp(r == *b, r.to_string()),
                None => (Status::Fail, "no coordinates".into()),
            },
            Expectation::Parity(p) => cmp(m.parity == *p, parity_text(m.parity).into()),
            Expectation::Symplectic(b) => cmp(m.symplectic == *b, m.symplectic.to_string()),
            Expectation::Pi1(t) => match cert {
                Some(c) if c.verdict.meets(t) => (Status::Pass, c.verdict.to_string()),
                _ if refutes(&entry.h1, t) => (Status::Fail, format!("abelianization {} rules out {t}", entry.h1)),
                Some(c) if !c.verdict.is_conclusive() => (Status::Inconclusive, c.verdict.to_string()),
                Some(c) => (Status::Fail, c.verdict.to_string()),
                None => (Status::Inconclusive, "no certificate".into()),
            },
            Expectation::Generator(g) => match cert.map(|c| &c.verdict) {
                Some(Verdict::InfiniteCyclic { generator } | Verdict::FiniteCyclic { generator, .. }) => {
                    cmp(generator == g, generator.to_string())
                }
                Some(Verdict::Inconclusive { reason }) => (Status::Inconclusive, reason.clone()),
                Some(v) => (Status::Fail, v.to_string()),
                None => (Status::Inconclusive, "no certificate".into()),
            },
            Expectation::Model(want) => match (entry.model, cert) {
                (Some(got), _) => cmp(got == *want, got.to_string()),
                (None, Some(c)) if !c.verdict.is_conclusive() => (Status::Inconclusive, c.verdict.to_string()),
                (None, _) => (Status::Fail, "no Freedman model (not simply connected or not odd)".into()),
            },
            Expectation::Surjective(b) => match &entry.realization {
                Some(r) => {
                    let got = r.surjectivity_index == Some(1);
                    match r.surjectivity_index {
                        None if *b => (Status::Inconclusive, "coset enumeration did not finish".into()),
                        _ => cmp(got == *b, format!("index {:?}", r.surjectivity_index)),
                    }
                }
                None => (Status::Fail, "not a realization".into()),
            },
            Expectation::Meridian(b) => match &entry.realization {
                Some(r) if r.meridian_trivial == *b => (Status::Pass, r.meridian_trivial.to_string()),
                Some(r) if *b => (Status::Inconclusive, format!("could not prove {} = 1", r.meridian)),
                Some(r) => (Status::Fail, r.meridian_trivial.to_string()),
                None => (Status::Fail, "not a realization".into()),
            },
        }
    };
    ExpectationResult {
        pos: clause.pos,
        target: entry.name.clone(),
        key: clause.expectation.key().to_string(),
        expected,
        actual,
        status,
    }
}

/// True when `h` cannot be a quotient of the abelianization of `t`. The
/// certified group is a quotient of the fundamental group, so this
/// disproves the target outright.
fn refutes(h: &H1Result, t: &Target) -> bool {
    match t {
        Target::Trivial => !h.is_trivial(),
        Target::InfiniteCyclic => h.rank + h.torsion.len() > 1,
        Target::FiniteCyclic { order } => match h.order() {
            Some(n) => h.torsion.len() > 1 || (num_bigint::BigInt::from(*order) % n) != num_bigint::BigInt::from(0),
            None => true,
        },
    }
}

/// Parses and runs manifest text.
pub fn run_text(text: &str, options: &RunOptions) -> Result<Report, ManifestError> {
    run(&parse(text)?, options)
}

/// Outcome of re-checking one embedded certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub entry: String,
    pub what: &'static str,
    pub result: Result<ReplaySummary, ReplayError>,
}

/// Re-checks every certificate embedded in `report`, including the
/// meridian proofs of realizations.
pub fn replay_report(report: &Report) -> Vec<ReplayOutcome> {
    let mut out = Vec::new();
    for e in &report.entries {
        if let Some(c) = &e.certificate {
            out.push(ReplayOutcome { entry: e.name.clone(), what: "pi1", result: replay(c) });
        }
        if let Some(r) = &e.realization {
            let mc = &r.meridian_certificate;
            let mut result = replay(&mc.certificate);
            if let (Ok(_), Some(f)) = (&result, mc.fact) {
                if mc.certificate.trace.get(f).map(|s| &s.relation) != Some(&mc.relation) {
                    result = Err(ReplayError::Structure(format!("fact {f} is not {}", mc.relation)));
                }
            }
            out.push(ReplayOutcome { entry: e.name.clone(), what: "meridian", result });
        }
    }
    out
}

/// `h1` of the candidate presentation of a manifold, for quick reporting.
pub fn abelianization(m: &MarkedManifold) -> String {
    h1(&candidate(&m.pi1)).to_string()
}
