//! Geography coordinates, Freedman models, the wedge arithmetic and
//! realizations of `(chi, c)` pairs by a manifold `N` with a torus `T'`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelianize::h1;
use crate::blocks::{mqr, t2xs2_4blowups, t4_blown2, y1, yn_skipping, zpp, MarkedManifold, Parity, SurgeryDatum};
use crate::certify::{
    candidate, certify_relation, certify_with_generator, todd_coxeter, Budget, Certificate, CosetError, RelationCertificate,
    Target, Verdict,
};
use crate::presentation::FpPresentation;
use crate::surgery::{fiber_sum, Gluing};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeoError {
    #[error("e + sigma = {0} is not divisible by 4")]
    NotAdmissible(i64),
    #[error("fundamental group not certified trivial: {0}")]
    NotSimplyConnected(String),
    #[error("parity is {0:?}, expected odd")]
    NotOdd(Parity),
    #[error("b2 = {b2}, sigma = {sigma} give no definite model")]
    NoModel { b2: i64, sigma: i64 },
    #[error("({chi}, {c}) violates 0 <= c <= 8 chi - 1")]
    OutOfRange { chi: i64, c: i64 },
    #[error("pair ({chi}, {c}) is not realized here; it is covered by the earlier small-(chi, c) constructions")]
    Unsupported { chi: i64, c: i64 },
    #[error("construction failed: {0}")]
    Construction(String),
}

/// `(chi_h, c1^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeoPoint {
    pub chi_h: i64,
    pub c1sq: i64,
}

impl GeoPoint {
    pub fn new(chi_h: i64, c1sq: i64) -> Self {
        GeoPoint { chi_h, c1sq }
    }

    /// `(e, sigma)` with `sigma = c1^2 - 8 chi_h` and `e = 4 chi_h - sigma`.
    pub fn e_sigma(&self) -> (i64, i64) {
        let sigma = self.c1sq - 8 * self.chi_h;
        (4 * self.chi_h - sigma, sigma)
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.chi_h, self.c1sq)
    }
}

pub fn coords(e: i64, sigma: i64) -> Result<GeoPoint, GeoError> {
    if (e + sigma).rem_euclid(4) != 0 {
        return Err(GeoError::NotAdmissible(e + sigma));
    }
    Ok(GeoPoint { chi_h: (e + sigma) / 4, c1sq: 2 * e + 3 * sigma })
}

pub fn coords_of(m: &MarkedManifold) -> Result<GeoPoint, GeoError> {
    coords(m.e, m.sigma)
}

/// Membership in `0 <= c1^2 <= 8 chi_h - 1`.
pub fn region_check(p: GeoPoint) -> bool {
    0 <= p.c1sq && p.c1sq < 8 * p.chi_h
}

/// `m CP2 # n CP2bar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreedmanModel {
    pub m: u64,
    pub n: u64,
}

impl FreedmanModel {
    /// Parses `CP2#2CP2bar`, `3CP2#10CP2bar` and the like.
    pub fn parse(text: &str) -> Option<Self> {
        let (l, r) = text.trim().split_once('#')?;
        let count = |s: &str, suffix: &str| -> Option<u64> {
            let k = s.strip_suffix(suffix)?;
            if k.is_empty() {
                Some(1)
            } else {
                k.parse().ok()
            }
        };
        Some(FreedmanModel { m: count(l, "CP2")?, n: count(r, "CP2bar")? })
    }

    pub fn from_e_sigma(e: i64, sigma: i64) -> Result<Self, GeoError> {
        let b2 = e - 2;
        if b2 < 0 || (b2 + sigma) % 2 != 0 {
            return Err(GeoError::NoModel { b2, sigma });
        }
        let plus = (b2 + sigma) / 2;
        let minus = (b2 - sigma) / 2;
        if plus < 1 || minus < 0 {
            return Err(GeoError::NoModel { b2, sigma });
        }
        Ok(FreedmanModel { m: plus as u64, n: minus as u64 })
    }
}

impl fmt::Display for FreedmanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |k: u64, s: &str| if k == 1 { s.to_string() } else { format!("{k}{s}") };
        write!(f, "{}#{}", part(self.m, "CP2"), part(self.n, "CP2bar"))
    }
}

/// The homeomorphism model of a simply-connected odd manifold.
pub fn freedman_model(m: &MarkedManifold, cert: &Certificate) -> Result<FreedmanModel, GeoError> {
    if cert.verdict != Verdict::Trivial {
        return Err(GeoError::NotSimplyConnected(cert.verdict.to_string()));
    }
    if m.parity != Parity::Odd {
        return Err(GeoError::NotOdd(m.parity));
    }
    FreedmanModel::from_e_sigma(m.e, m.sigma)
}

/// Coordinates of a sum with a pair `(chi, c)` realized by some `(N, T')`.
pub fn wedge_sum(x: GeoPoint, chi: i64, c: i64) -> Result<GeoPoint, GeoError> {
    if c < 0 || c > 8 * chi - 1 {
        return Err(GeoError::OutOfRange { chi, c });
    }
    Ok(GeoPoint { chi_h: x.chi_h + chi, c1sq: x.c1sq + c })
}

/// A manifold `N` obtained by forgoing one surgery, and the torus `T'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub pair: GeoPoint,
    pub construction: String,
    /// Site of the surgery left out, in the summand named by `summand`.
    pub skipped: String,
    pub summand: String,
    pub torus: SurgeryDatum,
    /// Generators of `pi_1(T')` as words in `pi_1(N)`.
    pub torus_generators: Vec<Word>,
    pub manifold: MarkedManifold,
    /// False for rows built by analogy with the detailed ones.
    pub detailed: bool,
}

impl Recipe {
    /// Meridian of `T'`: its push-off commutator.
    pub fn meridian(&self) -> &Word {
        &self.torus.pushoff
    }

    /// The complement `N \ nu T'`: the presentation of `N` without the
    /// relation that `T'` imposes.
    pub fn complement(&self) -> Option<FpPresentation> {
        self.manifold.pi1.without_relator(&self.torus.deleted_relator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityCheck {
    pub subgroup: Vec<Word>,
    pub index: Option<usize>,
    pub cosets: usize,
}

impl SurjectivityCheck {
    pub fn holds(&self) -> bool {
        self.index == Some(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub recipe: Recipe,
    pub coords: GeoPoint,
    pub pi1: Certificate,
    pub surjectivity: SurjectivityCheck,
    pub meridian: RelationCertificate,
}

impl Realization {
    pub fn meridian_trivial(&self) -> bool {
        self.meridian.holds()
    }
}

fn build_err(e: impl fmt::Display) -> GeoError {
    GeoError::Construction(e.to_string())
}

fn xt1_skip() -> Result<MarkedManifold, GeoError> {
    let y = y1(0, 1).map_err(build_err)?;
    let z = zpp(1, 1, 1).map_err(build_err)?;
    fiber_sum(&y, "Sigma2", &z, "SigmaBar2", &Gluing::standard(2)).map_err(build_err)
}

fn v_skip() -> Result<MarkedManifold, GeoError> {
    let m = mqr(1, 1).map_err(build_err)?.with_name("M");
    let z = zpp(1, 0, 1).map_err(build_err)?;
    fiber_sum(&m, "SigmaHat2", &z, "SigmaBar2", &Gluing::standard(2)).map_err(build_err)
}

fn w_skip() -> Result<MarkedManifold, GeoError> {
    let t = t2xs2_4blowups();
    let z = zpp(1, 0, 1).map_err(build_err)?;
    fiber_sum(&t, "SigmaTilde2", &z, "SigmaBar2", &Gluing::standard(2)).map_err(build_err)
}

fn with_t4_blown2(x: MarkedManifold, name: &str, surface: &str) -> Result<MarkedManifold, GeoError> {
    let x = x.with_name(name);
    fiber_sum(&x, surface, &t4_blown2(), "SigmaHat2", &Gluing::standard(2)).map_err(build_err)
}

/// The recipe for `p` without running any checks.
pub fn recipe(p: GeoPoint) -> Result<Recipe, GeoError> {
    let GeoPoint { chi_h: chi, c1sq: c } = p;
    // (site key in N, site as printed, summand, construction, N, detailed)
    let (key, skipped, summand, construction, n, detailed) = match (chi, c) {
        (1, 7) => ("a2'xc'", "a2'xc'", "Y1(1,1)", "X1(1)", xt1_skip()?, true),
        (chi, c) if chi >= 2 && c == 8 * chi - 1 => {
            let y = yn_skipping(chi as u32, 1, &["a2'xc1'"]).map_err(build_err)?;
            let z = zpp(1, 0, 1).map_err(build_err)?;
            let n = fiber_sum(&y, "Sigma2", &z, "SigmaBar2", &Gluing::standard(2)).map_err(build_err)?;
            ("a2'xc1'", "a2'xc1'", "Y_chi(1)", "X_chi(1)", n, false)
        }
        (1, 5) => ("alpha2''xalpha4'", "alpha2''xalpha4'", "Zpp(1,1)", "V(1)", v_skip()?, false),
        (2, 13) => ("X1.a2'xc'", "a2'xc'", "X1(1)", "X1(1) # T4Blown2", with_t4_blown2(xt1_skip()?, "X1", "Sigma2")?, false),
        (2, 11) => (
            "V.alpha2''xalpha4'",
            "alpha2''xalpha4'",
            "V(1)",
            "V(1) # T4Blown2",
            with_t4_blown2(v_skip()?, "V", "SigmaHat2")?,
            false,
        ),
        (2, 9) => (
            "W.alpha2''xalpha4'",
            "alpha2''xalpha4'",
            "W(1)",
            "W(1) # T4Blown2",
            with_t4_blown2(w_skip()?, "W", "SigmaTilde2")?,
            false,
        ),
        _ => {
            return Err(if c < 0 || c > 8 * chi - 1 { GeoError::OutOfRange { chi, c } } else { GeoError::Unsupported { chi, c } })
        }
    };
    // a sum only prefixes a site when the other summand has one of the same name
    let unprefixed = key.rsplit_once('.').map_or(key, |(_, s)| s);
    let torus = n.tori.get(key).or_else(|| n.tori.get(unprefixed)).cloned().ok_or_else(|| GeoError::Construction(format!("torus {key} not registered")))?;
    let torus_generators = torus_generators(&torus);
    Ok(Recipe {
        pair: p,
        construction: construction.to_string(),
        skipped: skipped.to_string(),
        summand: summand.to_string(),
        torus,
        torus_generators,
        manifold: n,
        detailed,
    })
}

/// The two circles of a Lagrangian torus: its surgery curve and the
/// generator it pairs with in the push-off commutator that does not occur
/// in the curve. For `a2' x c'` these are `c` and `a2`.
fn torus_generators(t: &SurgeryDatum) -> Vec<Word> {
    let partner = partner_circle(t);
    let mut out = vec![Word::gen(&t.curve)];
    if let Some(p) = partner {
        out.push(p);
    }
    out
}

fn partner_circle(t: &SurgeryDatum) -> Option<Word> {
    // The site name is `x' x y'`; the circle not equal to the curve is the
    // partner. Names may carry a namespace prefix like `X1.`.
    let base = t.site.rsplit_once('.').map_or(t.site.as_str(), |(_, s)| s);
    let prefix = t.curve.name().rsplit_once('.').map(|(p, _)| p);
    let curve_base = t.curve.name().rsplit_once('.').map_or(t.curve.name(), |(_, s)| s);
    base.split('x')
        .map(|part| part.trim_end_matches('\''))
        .find(|part| !part.is_empty() && *part != curve_base)
        .map(|part| match prefix {
            Some(pre) => Word::var(&format!("{pre}.{part}")),
            None => Word::var(part),
        })
}

fn target_from_h1(p: &FpPresentation) -> Result<Target, GeoError> {
    let h = h1(&candidate(p));
    if h.is_trivial() {
        Ok(Target::Trivial)
    } else if h.is_infinite_cyclic() {
        Ok(Target::InfiniteCyclic)
    } else if let Some(n) = h.finite_cyclic_order().and_then(|n| u64::try_from(n).ok()) {
        Ok(Target::FiniteCyclic { order: n })
    } else {
        Err(GeoError::Construction(format!("abelianization {h} is not cyclic")))
    }
}

/// Index of the subgroup generated by the torus circles, enumerated over
/// the survivors and final facts of `cert`. That group surjects onto the
/// fundamental group once every meridional tier is discharged, so index 1
/// transfers.
fn surjectivity(cert: &Certificate, words: &[Word], budget: &Budget) -> SurjectivityCheck {
    let subst = |w: &Word| cert.eliminations.iter().fold(w.clone(), |acc, e| acc.substitute(&e.generator, &e.definition));
    let subgroup: Vec<Word> = words.iter().map(subst).collect();
    let discharged = |m: &Word| cert.discharged.iter().any(|d| &d.meridian == m);
    if !cert.presentation.meridional().iter().all(|t| discharged(&t.meridian)) {
        return SurjectivityCheck { subgroup, index: None, cosets: 0 };
    }
    let rels: Vec<Word> = cert.final_relators.iter().filter_map(|&f| cert.trace.get(f)).map(|s| s.relation.clone()).collect();
    let p = FpPresentation::new(cert.survivors.clone(), rels).expect("facts over the survivors");
    match todd_coxeter(&p, &subgroup, budget) {
        Ok(e) => SurjectivityCheck { subgroup, index: Some(e.index), cosets: e.cosets_defined },
        Err(CosetError::Exceeded { cosets_defined, .. }) => SurjectivityCheck { subgroup, index: None, cosets: cosets_defined },
    }
}

/// Builds the recipe for `p` and runs its checks: the fundamental group of
/// `N` (cyclic, generated by the torus curve), surjectivity of the torus
/// subgroup, and triviality of the meridian of `T'` in the complement.
pub fn realize_pair(p: GeoPoint, budget: &Budget) -> Result<Realization, GeoError> {
    let recipe = recipe(p)?;
    let coords = coords_of(&recipe.manifold)?;
    if coords != p {
        return Err(GeoError::Construction(format!("construction lands at {coords}, not {p}")));
    }
    let pi1 = &recipe.manifold.pi1;
    let target = target_from_h1(pi1)?;
    let cert = certify_with_generator(pi1, &target, recipe.torus_generators.first(), budget);
    let surj = surjectivity(&cert, &recipe.torus_generators, budget);
    let complement = recipe.complement().ok_or_else(|| GeoError::Construction("torus relation missing".into()))?;
    let meridian = certify_relation(&complement, recipe.meridian(), budget);
    Ok(Realization { recipe, coords, pi1: cert, surjectivity: surj, meridian })
}

/// The pairs realized here: four sporadic ones and `(chi, 8 chi - 1)`.
pub fn realized_pairs(max_chi: i64) -> Vec<GeoPoint> {
    let mut v = vec![GeoPoint::new(1, 5), GeoPoint::new(2, 9), GeoPoint::new(2, 11), GeoPoint::new(2, 13)];
    v.extend((1..=max_chi).map(|chi| GeoPoint::new(chi, 8 * chi - 1)));
    v
}
