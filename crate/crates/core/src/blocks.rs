//! Building blocks: closed 4-manifolds with fundamental-group presentations,
//! embedded genus-2 surfaces and registered surgery tori.
//!
//! Composite blocks are produced from base blocks with the operations in
//! [`crate::surgery`], so the catalog data below is only the base
//! presentations, surfaces and surgery sites.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::presentation::FpPresentation;
use crate::surgery::{blow_up, torus_surgery, SurgeryError};
use crate::word::{Generator, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    Unknown,
}

/// Standard generator names of a genus-2 surface group.
pub const SURFACE_GENERATORS: [&str; 4] = ["a1", "b1", "a2", "b2"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedSurface {
    pub genus: u32,
    pub self_intersection: i64,
    /// Images of the standard generators of a parallel copy, in the
    /// complement's generators.
    pub generator_images: BTreeMap<String, Word>,
    /// Images that hold only modulo the normal closure of the meridian.
    pub modulo_meridian: BTreeSet<String>,
    pub meridian: Word,
    pub complement_pi1: FpPresentation,
}

impl EmbeddedSurface {
    pub fn image(&self, name: &str) -> Option<&Word> {
        self.generator_images.get(name)
    }

    pub fn is_exact(&self, name: &str) -> bool {
        !self.modulo_meridian.contains(name)
    }
}

/// One surgery site: performing `(curve, k, m)` surgery replaces the relator
/// equivalent to `deleted_relator` by `curve^k = pushoff^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryDatum {
    pub site: String,
    pub curve: Generator,
    pub pushoff: Word,
    pub deleted_relator: Word,
    /// Sign of the framing coefficient (`±1/k`, `±m/k`).
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedManifold {
    pub name: String,
    pub e: i64,
    pub sigma: i64,
    pub parity: Parity,
    pub symplectic: bool,
    /// Copied from published claims; never computed.
    pub minimal: bool,
    pub pi1: FpPresentation,
    pub surfaces: BTreeMap<String, EmbeddedSurface>,
    /// Surgery sites not yet used.
    pub tori: BTreeMap<String, SurgeryDatum>,
    /// Operations applied, oldest first.
    pub history: Vec<String>,
}

impl MarkedManifold {
    pub fn surface(&self, name: &str) -> Option<&EmbeddedSurface> {
        self.surfaces.get(name)
    }

    pub fn chi_h_times_4(&self) -> i64 {
        self.e + self.sigma
    }

    pub fn c1_squared(&self) -> i64 {
        2 * self.e + 3 * self.sigma
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("{block}: {message}")]
    InvalidParameter { block: String, message: String },
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
}

fn invalid(block: &str, message: impl Into<String>) -> BlockError {
    BlockError::InvalidParameter { block: block.to_string(), message: message.into() }
}

fn w(text: &str) -> Word {
    Word::parse_relation(text).expect("catalog word")
}

fn g(name: &str) -> Generator {
    Generator::new(name).expect("catalog generator")
}

fn site(name: &str, curve: &str, pushoff: &str, sign: i8) -> SurgeryDatum {
    let p = w(pushoff);
    SurgeryDatum { site: name.to_string(), curve: g(curve), deleted_relator: p.clone(), pushoff: p, sign }
}

fn images(pairs: &[(&str, &str)]) -> BTreeMap<String, Word> {
    pairs.iter().map(|(k, v)| (k.to_string(), w(v))).collect()
}

fn manifold(name: &str, e: i64, sigma: i64, parity: Parity, pi1: FpPresentation, tori: Vec<SurgeryDatum>) -> MarkedManifold {
    MarkedManifold {
        name: name.to_string(),
        e,
        sigma,
        parity,
        symplectic: true,
        minimal: false,
        pi1,
        surfaces: BTreeMap::new(),
        tori: tori.into_iter().map(|t| (t.site.clone(), t)).collect(),
        history: vec![name.to_string()],
    }
}

const T4_GENERATORS: [&str; 4] = ["alpha1", "alpha2", "alpha3", "alpha4"];
const T4_RELATORS: [&str; 6] = [
    "[alpha1,alpha4]",
    "[alpha1,alpha3]",
    "[alpha2,alpha3]",
    "[alpha2,alpha4]",
    "[alpha1,alpha2]",
    "[alpha3,alpha4]",
];

/// The 4-torus with its four Lagrangian surgery sites. The `alpha2''xalpha4'`
/// push-off is `[alpha1^e1, alpha3^e3]`.
pub fn t4_signed(e1: i8, e3: i8) -> MarkedManifold {
    let pi1 = FpPresentation::from_strs(&T4_GENERATORS, &T4_RELATORS);
    let p13 = format!("[alpha1^{e1},alpha3^{e3}]");
    manifold(
        "T4",
        0,
        0,
        Parity::Even,
        pi1,
        vec![
            site("alpha2'xalpha3'", "alpha3", "[alpha1^-1,alpha4^-1]", -1),
            site("alpha2''xalpha4'", "alpha4", &p13, -1),
            site("alpha1'xalpha3'", "alpha1", "[alpha2^-1,alpha4^-1]", -1),
            site("alpha2'xalpha3''", "alpha2", "[alpha1^-1,alpha4]", -1),
        ],
    )
}

pub fn t4() -> MarkedManifold {
    t4_signed(1, -1)
}

/// `T4 # CP2bar` with the genus-2 surface `SigmaBar2` of square 0.
pub fn t4_blown_signed(e1: i8, e3: i8) -> MarkedManifold {
    let mut m = blow_up(&t4_signed(e1, e3));
    m.name = "T4Blown".into();
    let meridian = w("[alpha3,alpha4]");
    let complement = m
        .pi1
        .without_relator(&w("[alpha1,alpha2]"))
        .and_then(|p| p.without_relator(&meridian))
        .expect("T4 relators")
        .with_meridional("g", meridian.clone())
        .expect("meridian over alpha");
    m.surfaces.insert(
        "SigmaBar2".into(),
        EmbeddedSurface {
            genus: 2,
            self_intersection: 0,
            generator_images: images(&[("a1", "alpha1"), ("b1", "alpha2"), ("a2", "alpha3^2"), ("b2", "alpha4")]),
            modulo_meridian: BTreeSet::from(["a2".to_string()]),
            meridian,
            complement_pi1: complement,
        },
    );
    m
}

/// `T4 # 2 CP2bar` with the genus-2 surface `SigmaHat2` of square 0, whose
/// meridian bounds a punctured exceptional sphere.
pub fn t4_blown2() -> MarkedManifold {
    let mut m = blow_up(&blow_up(&t4()));
    m.name = "T4Blown2".into();
    m.history = vec!["T4Blown2".into()];
    m.surfaces.insert(
        "SigmaHat2".into(),
        EmbeddedSurface {
            genus: 2,
            self_intersection: 0,
            generator_images: images(&[("a1", "alpha1"), ("b1", "alpha2"), ("a2", "alpha3"), ("b2", "alpha4")]),
            modulo_meridian: BTreeSet::new(),
            meridian: Word::identity(),
            complement_pi1: m.pi1.clone(),
        },
    );
    m
}

/// `Z''(1/q, m/r)` with the default push-off signs.
pub fn zpp(q: u64, r: u64, m: u64) -> Result<MarkedManifold, BlockError> {
    zpp_signed(q, r, m, 1, -1)
}

/// `Z''(1/q, m/r)` with `alpha4^r = [alpha1^e1, alpha3^e3]^m`.
pub fn zpp_signed(q: u64, r: u64, m: u64, e1: i8, e3: i8) -> Result<MarkedManifold, BlockError> {
    let name = "Zpp";
    if m == 0 {
        return Err(invalid(name, "m must be at least 1"));
    }
    if m.gcd(&r) != 1 {
        return Err(invalid(name, format!("gcd(m, r) = gcd({m}, {r}) must be 1")));
    }
    if ![1, -1].contains(&e1) || ![1, -1].contains(&e3) {
        return Err(invalid(name, "signs must be +1 or -1"));
    }
    let base = t4_blown_signed(e1, e3);
    let step = torus_surgery(&base, "alpha2'xalpha3'", q, 1)?;
    let mut out = torus_surgery(&step, "alpha2''xalpha4'", r, m)?;
    out.name = name.into();
    out.history = vec![format!("Zpp(q={q},r={r},m={m},e1={e1},e3={e3})")];
    out.symplectic = m == 1;
    Ok(out)
}

/// `M(1/q, 1/r)`: two Luttinger surgeries on `T4 # 2 CP2bar`.
pub fn mqr(q: u64, r: u64) -> Result<MarkedManifold, BlockError> {
    if q == 0 || r == 0 {
        return Err(invalid("Mqr", "q and r must be at least 1"));
    }
    let step = torus_surgery(&t4_blown2(), "alpha1'xalpha3'", q, 1)?;
    let mut out = torus_surgery(&step, "alpha2'xalpha3''", r, 1)?;
    out.name = "Mqr".into();
    out.history = vec![format!("Mqr(q={q},r={r})")];
    Ok(out)
}

/// `(T2 x S2) # 4 CP2bar` with the genus-2 surface `SigmaTilde2`.
pub fn t2xs2_4blowups() -> MarkedManifold {
    let pi1 = FpPresentation::from_strs(&["c", "d"], &["[c,d]"]);
    let mut m = manifold("T2xS2_4blowups", 4, -4, Parity::Odd, pi1.clone(), vec![]);
    m.surfaces.insert(
        "SigmaTilde2".into(),
        EmbeddedSurface {
            genus: 2,
            self_intersection: 0,
            generator_images: images(&[("a1", "c"), ("b1", "d"), ("a2", "c^-1"), ("b2", "d^-1")]),
            modulo_meridian: BTreeSet::new(),
            meridian: Word::identity(),
            complement_pi1: pi1,
        },
    );
    m
}

/// `Sigma2 x T2`, relators listed with the surgery-site commutators first.
pub fn sigma2xt2() -> MarkedManifold {
    let gens = ["a1", "b1", "a2", "b2", "c", "d"];
    let rels = [
        "[b1^-1,d^-1]",
        "[a1^-1,d]",
        "[d^-1,b2^-1]",
        "[c^-1,b2]",
        "[a1,c]",
        "[b1,c]",
        "[a2,c]",
        "[a2,d]",
        "[a1,b1][a2,b2]",
        "[c,d]",
    ];
    let mut m = manifold(
        "Sigma2xT2",
        0,
        0,
        Parity::Even,
        FpPresentation::from_strs(&gens, &rels),
        vec![
            site("a1'xc'", "a1", "[b1^-1,d^-1]", -1),
            site("b1'xc''", "b1", "[a1^-1,d]", -1),
            site("a2'xc'", "c", "[d^-1,b2^-1]", 1),
            site("a2''xd'", "d", "[c^-1,b2]", 1),
        ],
    );
    attach_sigma2(&mut m, "[c,d]");
    m
}

/// Adds the surface `Sigma2 x pt` with meridian `meridian` (a relator of
/// the closed manifold that fails in the complement).
fn attach_sigma2(m: &mut MarkedManifold, meridian: &str) {
    let mu = w(meridian);
    let complement = m.pi1.without_relator(&mu).expect("meridian relator present");
    m.surfaces.insert(
        "Sigma2".into(),
        EmbeddedSurface {
            genus: 2,
            self_intersection: 0,
            generator_images: images(&[("a1", "a1"), ("b1", "b1"), ("a2", "a2"), ("b2", "b2")]),
            modulo_meridian: BTreeSet::new(),
            meridian: mu,
            complement_pi1: complement,
        },
    );
}

/// `Y1(1/p, 1/q)`.
pub fn y1(p: u64, q: u64) -> Result<MarkedManifold, BlockError> {
    let mut m = sigma2xt2();
    for (s, k) in [("a1'xc'", 1), ("b1'xc''", 1), ("a2'xc'", p), ("a2''xd'", q)] {
        m = torus_surgery(&m, s, k, 1)?;
    }
    m.name = "Y1".into();
    m.history = vec![format!("Y1(p={p},q={q})")];
    m.minimal = true;
    m.symplectic = true;
    Ok(m)
}

/// The product `Sigma2 x Sigma_n` presented by the commutation relations
/// that the surgeries of `Yn` modify or keep.
pub fn sigma2xsigman(n: u32) -> Result<MarkedManifold, BlockError> {
    if n < 2 {
        return Err(invalid("Sigma2xSigmaN", "n must be at least 2"));
    }
    let mut gens: Vec<String> = ["a1", "b1", "a2", "b2"].iter().map(|s| s.to_string()).collect();
    for j in 1..=n {
        gens.push(format!("c{j}"));
        gens.push(format!("d{j}"));
    }
    let mut rels: Vec<String> = [
        "[b1^-1,d1^-1]",
        "[a1^-1,d1]",
        "[b2^-1,d2^-1]",
        "[a2^-1,d2]",
        "[d1^-1,b2^-1]",
        "[c1^-1,b2]",
        "[d2^-1,b1^-1]",
        "[c2^-1,b1]",
        "[a1,c1]",
        "[a1,c2]",
        "[a1,d2]",
        "[b1,c1]",
        "[a2,c1]",
        "[a2,c2]",
        "[a2,d1]",
        "[b2,c2]",
        "[a1,b1][a2,b2]",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let prod: Vec<String> = (1..=n).map(|j| format!("[c{j},d{j}]")).collect();
    rels.push(prod.join(""));
    let mut sites = vec![
        site("a1'xc1'", "a1", "[b1^-1,d1^-1]", -1),
        site("b1'xc1''", "b1", "[a1^-1,d1]", -1),
        site("a2'xc2'", "a2", "[b2^-1,d2^-1]", -1),
        site("b2'xc2''", "b2", "[a2^-1,d2]", -1),
        site("a2'xc1'", "c1", "[d1^-1,b2^-1]", 1),
        site("a2''xd1'", "d1", "[c1^-1,b2]", 1),
        site("a1'xc2'", "c2", "[d2^-1,b1^-1]", 1),
        site("a1''xd2'", "d2", "[c2^-1,b1]", 1),
    ];
    for j in 3..=n {
        rels.push(format!("[a1^-1,d{j}^-1]"));
        rels.push(format!("[a2^-1,c{j}^-1]"));
        sites.push(site(&format!("b1'xc{j}'"), &format!("c{j}"), &format!("[a1^-1,d{j}^-1]"), -1));
        sites.push(site(&format!("b2'xd{j}'"), &format!("d{j}"), &format!("[a2^-1,c{j}^-1]"), -1));
    }
    for j in 3..=n {
        rels.push(format!("[b1,c{j}]"));
        rels.push(format!("[b2,d{j}]"));
    }
    let gref: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
    let rref: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
    let mut m = manifold("Sigma2xSigmaN", 4 * (n as i64) - 4, 0, Parity::Even, FpPresentation::from_strs(&gref, &rref), sites);
    m.history = vec![format!("Sigma2xSigmaN(n={n})")];
    attach_sigma2(&mut m, &prod.join(""));
    Ok(m)
}

/// `Y_n(m)`: `2n + 3` Luttinger surgeries and one `m` surgery.
pub fn yn(n: u32, m: u64) -> Result<MarkedManifold, BlockError> {
    yn_skipping(n, m, &[])
}

/// `Y_n(m)` with the listed surgeries replaced by trivial ones.
pub fn yn_skipping(n: u32, m: u64, skip: &[&str]) -> Result<MarkedManifold, BlockError> {
    if m == 0 {
        return Err(invalid("Yn", "m must be at least 1"));
    }
    let mut out = sigma2xsigman(n)?;
    let mut plan: Vec<(String, u64)> = [
        "a1'xc1'", "b1'xc1''", "a2'xc2'", "b2'xc2''", "a2'xc1'", "a2''xd1'", "a1'xc2'",
    ]
    .iter()
    .map(|s| (s.to_string(), 1))
    .collect();
    for j in 3..=n {
        plan.push((format!("b1'xc{j}'"), 1));
        plan.push((format!("b2'xd{j}'"), 1));
    }
    plan.push(("a1''xd2'".to_string(), 1));
    for s in skip {
        if !plan.iter().any(|(p, _)| p == s) {
            return Err(invalid("Yn", format!("no surgery site {s}")));
        }
    }
    for (s, k) in plan {
        let skipped = skip.contains(&s.as_str());
        let (k, mult) = if skipped { (0, 1) } else if s == "a1''xd2'" { (k, m) } else { (k, 1) };
        out = torus_surgery(&out, &s, k, mult)?;
    }
    out.name = "Yn".into();
    out.history = vec![if skip.is_empty() { format!("Yn(n={n},m={m})") } else { format!("Yn(n={n},m={m},skip={})", skip.join(",")) }];
    out.minimal = true;
    out.symplectic = m == 1 || skip.contains(&"a1''xd2'");
    Ok(out)
}

/// Catalog entry for listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub constructor: String,
    pub parameters: String,
    pub example: MarkedManifold,
}

/// Every constructor with a representative instance.
pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |c: &str, p: &str, m: MarkedManifold| CatalogEntry { constructor: c.into(), parameters: p.into(), example: m };
    vec![
        entry("T4", "", t4()),
        entry("T4Blown", "", t4_blown_signed(1, -1)),
        entry("T4Blown2", "", t4_blown2()),
        entry("Sigma2xT2", "", sigma2xt2()),
        entry("Sigma2xSigmaN", "n>=2", sigma2xsigman(2).expect("n=2")),
        entry("Y1", "p>=0, q>=0", y1(1, 1).expect("Y1(1,1)")),
        entry("Yn", "n>=2, m>=1", yn(2, 1).expect("Yn(2,1)")),
        entry("Zpp", "q>=0, r>=0, m>=1, gcd(m,r)=1, e1=+-1, e3=+-1", zpp(1, 1, 1).expect("Zpp(1,1,1)")),
        entry("Mqr", "q>=1, r>=1", mqr(1, 1).expect("Mqr(1,1)")),
        entry("T2xS2_4blowups", "", t2xs2_4blowups()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelianize::h1;

    fn rels(m: &MarkedManifold) -> Vec<String> {
        m.pi1.relators().iter().map(|r| r.to_string()).collect()
    }

    fn expect_relators(m: &MarkedManifold, displays: &[&str]) {
        let want = FpPresentation::new(m.pi1.generators().to_vec(), displays.iter().map(|d| w(d)).collect()).unwrap();
        assert!(m.pi1.same_relators(&want), "{:?}\nvs\n{displays:?}", rels(m));
    }

    #[test]
    fn yn_transcription() {
        let m = yn(2, 1).unwrap();
        assert_eq!((m.e, m.sigma), (4, 0));
        assert_eq!(m.pi1.generators().len(), 8);
        expect_relators(
            &m,
            &[
                "[b1^-1,d1^-1]=a1",
                "[a1^-1,d1]=b1",
                "[b2^-1,d2^-1]=a2",
                "[a2^-1,d2]=b2",
                "[d1^-1,b2^-1]=c1",
                "[c1^-1,b2]=d1",
                "[d2^-1,b1^-1]=c2",
                "[c2^-1,b1]=d2",
                "[a1,c1]",
                "[a1,c2]",
                "[a1,d2]",
                "[b1,c1]",
                "[a2,c1]",
                "[a2,c2]",
                "[a2,d1]",
                "[b2,c2]",
                "[a1,b1][a2,b2]",
                "[c1,d1][c2,d2]",
            ],
        );
        let m3 = yn(3, 2).unwrap();
        assert_eq!((m3.e, m3.pi1.generators().len()), (8, 10));
        assert!(m3.pi1.contains_relator(&w("[a1^-1,d3^-1]=c3")));
        assert!(m3.pi1.contains_relator(&w("[a2^-1,c3^-1]=d3")));
        assert!(m3.pi1.contains_relator(&w("[b1,c3]")));
        assert!(m3.pi1.contains_relator(&w("[c2^-1,b1]^2=d2")));
        assert!(!m3.symplectic);
        assert!(yn(1, 1).is_err());
    }

    #[test]
    fn yn_homology_vanishes() {
        for n in 2..=5 {
            for m in 1..=3 {
                let y = yn(n, m).unwrap();
                assert!(h1(&y.pi1).is_trivial(), "n={n} m={m}: {}", h1(&y.pi1));
            }
        }
    }

    #[test]
    fn y1_transcription() {
        let m = y1(1, 1).unwrap();
        assert_eq!((m.e, m.sigma), (0, 0));
        expect_relators(
            &m,
            &[
                "[b1^-1,d^-1]=a1",
                "[a1^-1,d]=b1",
                "[d^-1,b2^-1]=c",
                "[c^-1,b2]=d",
                "[a1,c]",
                "[b1,c]",
                "[a2,c]",
                "[a2,d]",
                "[a1,b1][a2,b2]",
                "[c,d]",
            ],
        );
        let s = m.surface("Sigma2").unwrap();
        assert_eq!(s.meridian, w("[c,d]"));
        assert_eq!(s.complement_pi1.relators().len(), 9);
        // p = 0 leaves the unsurgered commutator
        let m0 = y1(0, 1).unwrap();
        assert!(m0.pi1.contains_relator(&w("[d^-1,b2^-1]")));
        for p in 2..=5u64 {
            let h = h1(&y1(p, 1).unwrap().pi1);
            assert!(h.torsion_u64().contains(&p), "p={p}: {h}");
        }
    }

    #[test]
    fn zpp_transcription() {
        let z = zpp(1, 1, 3).unwrap();
        assert_eq!((z.e, z.sigma, z.parity), (1, -1, Parity::Odd));
        assert!(z.pi1.relators().contains(&w("alpha4 = [alpha1,alpha3^-1]^3")));
        let s = z.surface("SigmaBar2").unwrap();
        expect_relators(
            &MarkedManifold { pi1: s.complement_pi1.strip_meridional(), ..z.clone() },
            &[
                "alpha3 = [alpha1^-1,alpha4^-1]",
                "alpha4 = [alpha1,alpha3^-1]^3",
                "[alpha2,alpha3]",
                "[alpha2,alpha4]",
            ],
        );
        assert_eq!(s.complement_pi1.meridional().len(), 1);
        assert_eq!(s.image("a2"), Some(&w("alpha3^2")));
        assert!(!s.is_exact("a2") && s.is_exact("b2"));

        let zp = zpp(1, 0, 1).unwrap();
        assert!(zp.pi1.contains_relator(&w("[alpha1,alpha3]")));
        assert!(zp.pi1.contains_relator(&w("alpha3 = [alpha1^-1,alpha4^-1]")));

        let z0 = zpp(0, 0, 1).unwrap();
        for r in ["[alpha1,alpha4]", "[alpha1,alpha3]", "[alpha2,alpha3]", "[alpha2,alpha4]"] {
            assert!(z0.pi1.contains_relator(&w(r)), "{r}");
        }
        assert!(zpp(1, 2, 2).is_err());
        assert!(!zpp(1, 1, 2).unwrap().symplectic);
    }

    #[test]
    fn mqr_transcription() {
        let m = mqr(1, 1).unwrap();
        assert_eq!((m.e, m.sigma), (2, -2));
        let s = m.surface("SigmaHat2").unwrap();
        assert!(s.meridian.is_identity());
        expect_relators(
            &MarkedManifold { pi1: s.complement_pi1.clone(), ..m.clone() },
            &[
                "alpha1 = [alpha2^-1,alpha4^-1]",
                "alpha2 = [alpha1^-1,alpha4]",
                "[alpha1,alpha3]",
                "[alpha2,alpha3]",
                "[alpha1,alpha2]",
                "[alpha3,alpha4]",
            ],
        );
        let h = h1(&s.complement_pi1);
        assert_eq!((h.rank, h.torsion.len()), (2, 0));
    }

    #[test]
    fn t2xs2_data() {
        let m = t2xs2_4blowups();
        assert_eq!((m.e, m.sigma), (4, -4));
        let s = m.surface("SigmaTilde2").unwrap();
        assert!(s.meridian.is_identity());
        assert_eq!(s.image("a2"), Some(&w("c^-1")));
        assert_eq!(h1(&s.complement_pi1).rank, 2);
    }

    #[test]
    fn characteristic_identity_for_all_blocks() {
        for entry in catalog() {
            let m = &entry.example;
            let chi4 = m.chi_h_times_4();
            assert_eq!(4 * m.c1_squared() - 8 * chi4, 4 * m.sigma, "{}", entry.constructor);
        }
    }
}
