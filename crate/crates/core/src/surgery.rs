//! Torus surgery, blow-up and the normal connected sum, as rewrites of
//! characteristic numbers and fundamental-group presentations.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::blocks::{EmbeddedSurface, MarkedManifold, Parity, SurgeryDatum};
use crate::presentation::{FpPresentation, GeneratorMap, PresentationError};
use crate::word::{Generator, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurgeryError {
    #[error("{manifold} has no surgery site {site}")]
    UnknownSite { manifold: String, site: String },
    #[error("relator {relator} of site {site} is not present")]
    RelatorAbsent { site: String, relator: String },
    #[error("coefficients k = {k}, m = {m} are not coprime")]
    NotCoprime { k: u64, m: u64 },
    #[error("{manifold} has no surface {surface}")]
    MissingSurface { manifold: String, surface: String },
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(u32, u32),
    #[error("surface {surface} has self-intersection {value}, expected 0")]
    SelfIntersection { surface: String, value: i64 },
    #[error("gluing map does not cover generator {0}")]
    Gluing(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// The relator `curve^k · (pushoff^m)^-1` installed by a `(k, m)` surgery.
pub fn surgery_relator(site: &SurgeryDatum, k: u64, m: u64) -> Word {
    Word::gen(&site.curve).pow(k as i64).multiply(&site.pushoff.pow(m as i64).inverse())
}

/// Performs the surgery registered at `site` with coefficient data `(k, m)`:
/// the site's relator becomes `curve^k = pushoff^m`, in the closed
/// presentation and in every surface complement that carries it. `k = 0`,
/// `m = 1` is the trivial surgery.
pub fn torus_surgery(x: &MarkedManifold, site: &str, k: u64, m: u64) -> Result<MarkedManifold, SurgeryError> {
    let datum = x
        .tori
        .get(site)
        .ok_or_else(|| SurgeryError::UnknownSite { manifold: x.name.clone(), site: site.to_string() })?;
    if m == 0 || k.gcd(&m) != 1 {
        return Err(SurgeryError::NotCoprime { k, m });
    }
    let new = surgery_relator(datum, k, m);
    let absent = || SurgeryError::RelatorAbsent { site: site.to_string(), relator: datum.deleted_relator.to_string() };
    let pi1 = x.pi1.replace_relator(&datum.deleted_relator, new.clone()).ok_or_else(absent)?;
    let mut out = x.clone();
    out.pi1 = pi1;
    for s in out.surfaces.values_mut() {
        if let Some(p) = s.complement_pi1.replace_relator(&datum.deleted_relator, new.clone()) {
            s.complement_pi1 = p;
        }
    }
    out.symplectic = x.symplectic && m == 1;
    // a trivial surgery leaves the torus in place
    if k != 0 {
        out.tori.remove(site);
    }
    // sites sharing the replaced relator are gone with it
    let pi1 = out.pi1.clone();
    out.tori.retain(|_, d| pi1.contains_relator(&d.deleted_relator));
    out.history.push(format!("surgery {site} k={k} m={m}"));
    Ok(out)
}

/// Connected sum with a negative-definite projective plane.
pub fn blow_up(x: &MarkedManifold) -> MarkedManifold {
    let mut out = x.clone();
    out.e += 1;
    out.sigma -= 1;
    out.parity = Parity::Odd;
    out.minimal = false;
    out.history.push("blowup".into());
    out
}

/// Identifications of a normal connected sum. Each map sends a standard
/// surface generator to the relator `x_image · n_image^-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumIdentification {
    pub exact: GeneratorMap,
    /// Relators valid once the listed meridian is trivial.
    pub conditional: Vec<(Generator, Word, Word)>,
    pub meridian_relation: Word,
}

/// Gluing of parallel copies: pairs (X-side generator, N-side generator).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub pairs: Vec<(String, String)>,
}

impl Gluing {
    /// `a_i -> a_i`, `b_i -> b_i`.
    pub fn standard(genus: u32) -> Self {
        let pairs = (1..=genus)
            .flat_map(|i| [format!("a{i}"), format!("b{i}")])
            .map(|n| (n.clone(), n))
            .collect();
        Gluing { pairs }
    }
}

/// Builds the identifications for gluing `sx` to `sn` along `gluing`.
pub fn sum_identification(sx: &EmbeddedSurface, sn: &EmbeddedSurface, gluing: &Gluing) -> Result<SumIdentification, SurgeryError> {
    let mut exact = Vec::new();
    let mut conditional = Vec::new();
    for (gx, gn) in &gluing.pairs {
        let xi = sx.image(gx).ok_or_else(|| SurgeryError::Gluing(gx.clone()))?;
        let ni = sn.image(gn).ok_or_else(|| SurgeryError::Gluing(gn.clone()))?;
        let rel = xi.multiply(&ni.inverse());
        let label = Generator::new(gx).map_err(|_| SurgeryError::Gluing(gx.clone()))?;
        match (sx.is_exact(gx), sn.is_exact(gn)) {
            (true, true) => exact.push((label, rel)),
            (true, false) => conditional.push((label, rel, sn.meridian.clone())),
            (false, true) => conditional.push((label, rel, sx.meridian.clone())),
            (false, false) => {
                let both = sx.meridian.multiply(&sn.meridian);
                conditional.push((label, rel, both));
            }
        }
    }
    if gluing.pairs.len() != 2 * sx.genus as usize {
        return Err(SurgeryError::Gluing(format!("{} pairs for genus {}", gluing.pairs.len(), sx.genus)));
    }
    Ok(SumIdentification {
        exact: GeneratorMap::new(exact),
        conditional,
        meridian_relation: sx.meridian.multiply(&sn.meridian),
    })
}

fn sanitize(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => s,
        _ => format!("m_{s}"),
    }
}

fn rename_surface(s: &EmbeddedSurface, f: &dyn Fn(&Generator) -> Generator) -> EmbeddedSurface {
    EmbeddedSurface {
        genus: s.genus,
        self_intersection: s.self_intersection,
        generator_images: s.generator_images.iter().map(|(k, v)| (k.clone(), v.rename(f))).collect(),
        modulo_meridian: s.modulo_meridian.clone(),
        meridian: s.meridian.rename(f),
        complement_pi1: s.complement_pi1.rename(f),
    }
}

fn rename_datum(d: &SurgeryDatum, f: &dyn Fn(&Generator) -> Generator) -> SurgeryDatum {
    SurgeryDatum {
        site: d.site.clone(),
        curve: f(&d.curve),
        pushoff: d.pushoff.rename(f),
        deleted_relator: d.deleted_relator.rename(f),
        sign: d.sign,
    }
}

fn surface<'a>(m: &'a MarkedManifold, name: &str) -> Result<&'a EmbeddedSurface, SurgeryError> {
    let s = m
        .surfaces
        .get(name)
        .ok_or_else(|| SurgeryError::MissingSurface { manifold: m.name.clone(), surface: name.to_string() })?;
    if s.self_intersection != 0 {
        return Err(SurgeryError::SelfIntersection { surface: name.to_string(), value: s.self_intersection });
    }
    Ok(s)
}

/// Normal connected sum of `x` and `n` along square-zero surfaces of equal
/// genus. Generators of `x` that collide with generators of `n` are renamed
/// `{x.name}.{g}`.
///
/// The result's presentation is an upper bound: the fundamental group of
/// the sum is a quotient of it. Conditional identifications are attached
/// to the side whose meridian they depend on. The result carries a parallel
/// copy of the glued surface under the name `sx`, with meridian
/// `mu_x · mu_n` and complement the sum without the meridian relation.
pub fn fiber_sum(x: &MarkedManifold, sx: &str, n: &MarkedManifold, sn: &str, gluing: &Gluing) -> Result<MarkedManifold, SurgeryError> {
    let sxs = surface(x, sx)?;
    let sns = surface(n, sn)?;
    if sxs.genus != sns.genus {
        return Err(SurgeryError::GenusMismatch(sxs.genus, sns.genus));
    }
    let n_gens: BTreeSet<Generator> = sns.complement_pi1.generators().iter().chain(n.pi1.generators()).cloned().collect();
    let prefix = sanitize(&x.name);
    let rename = |g: &Generator| -> Generator {
        if n_gens.contains(g) {
            Generator::new(&format!("{prefix}.{}", g.name())).expect("sanitized prefix")
        } else {
            g.clone()
        }
    };
    let sxs = rename_surface(sxs, &rename);
    let id = sum_identification(&sxs, sns, gluing)?;

    let mut body = sxs.complement_pi1.free_product(&sns.complement_pi1)?;
    let exact: Vec<Word> = id.exact.assignments().iter().map(|(_, r)| r.clone()).filter(|r| !r.is_identity()).collect();
    body = body.impose(&exact)?;
    for (_, rel, mu) in &id.conditional {
        if !rel.is_identity() {
            body = body.with_conditional(rel.clone(), mu.clone())?;
        }
    }
    let parallel_complement = body.clone();
    if !id.meridian_relation.is_identity() {
        body = body.impose(std::slice::from_ref(&id.meridian_relation))?;
    }

    let mut tori = BTreeMap::new();
    for (k, d) in &n.tori {
        tori.insert(k.clone(), d.clone());
    }
    for (k, d) in &x.tori {
        let key = if tori.contains_key(k) { format!("{prefix}.{k}") } else { k.clone() };
        tori.insert(key.clone(), SurgeryDatum { site: key, ..rename_datum(d, &rename) });
    }
    let parity = if x.parity == Parity::Odd || n.parity == Parity::Odd { Parity::Odd } else { Parity::Unknown };
    let chi_surface = 2 - 2 * i64::from(sxs.genus);
    let mut history = vec![format!("fibersum({}.{sx}, {}.{sn})", x.name, n.name)];
    history.extend(x.history.iter().map(|h| format!("  {}: {h}", x.name)));
    history.extend(n.history.iter().map(|h| format!("  {}: {h}", n.name)));
    let parallel = EmbeddedSurface {
        genus: sxs.genus,
        self_intersection: 0,
        generator_images: sxs.generator_images.clone(),
        modulo_meridian: sxs.modulo_meridian.clone(),
        meridian: id.meridian_relation.clone(),
        complement_pi1: parallel_complement,
    };
    Ok(MarkedManifold {
        name: format!("{}#{}", x.name, n.name),
        e: x.e + n.e - 2 * chi_surface,
        sigma: x.sigma + n.sigma,
        parity,
        symplectic: x.symplectic && n.symplectic,
        minimal: false,
        pi1: body,
        surfaces: BTreeMap::from([(sx.to_string(), parallel)]),
        tori,
        history,
    })
}

/// The Van Kampen presentation of a sum without its meridional tier and
/// with every conditional relator active: the group whose triviality the
/// certifier establishes.
pub fn candidate(m: &MarkedManifold) -> FpPresentation {
    m.pi1.with_conditionals_activated()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelianize::h1;
    use crate::blocks::{mqr, t2xs2_4blowups, t4, y1, yn, zpp};

    fn w(s: &str) -> Word {
        Word::parse_relation(s).unwrap()
    }

    #[test]
    fn luttinger_on_t4() {
        let m = torus_surgery(&t4(), "alpha2'xalpha3'", 1, 1).unwrap();
        assert!(!m.pi1.contains_relator(&w("[alpha1,alpha4]")));
        assert!(m.pi1.relators().contains(&w("alpha3 = [alpha1^-1,alpha4^-1]")));
        assert_eq!((m.e, m.sigma), (0, 0));
        assert!(!m.tori.contains_key("alpha2'xalpha3'"));
    }

    #[test]
    fn trivial_surgery_restores() {
        let base = t4();
        let m = torus_surgery(&base, "alpha1'xalpha3'", 0, 1).unwrap();
        assert!(m.pi1.same_relators(&base.pi1));
    }

    #[test]
    fn surgery_errors() {
        assert!(matches!(torus_surgery(&t4(), "nope", 1, 1), Err(SurgeryError::UnknownSite { .. })));
        assert!(matches!(torus_surgery(&t4(), "alpha2'xalpha3'", 2, 4), Err(SurgeryError::NotCoprime { .. })));
        let once = torus_surgery(&t4(), "alpha2'xalpha3'", 1, 1).unwrap();
        assert!(matches!(torus_surgery(&once, "alpha2'xalpha3'", 1, 1), Err(SurgeryError::UnknownSite { .. })));
        // the trivial surgery keeps the torus
        let skipped = torus_surgery(&t4(), "alpha2'xalpha3'", 0, 1).unwrap();
        assert!(skipped.tori.contains_key("alpha2'xalpha3'"));
    }

    #[test]
    fn surgery_keeps_characteristic_numbers() {
        for entry in crate::blocks::catalog() {
            let m = entry.example;
            for s in m.tori.keys() {
                let out = torus_surgery(&m, s, 1, 2).unwrap();
                assert_eq!((out.e, out.sigma), (m.e, m.sigma));
                assert!(!out.symplectic);
            }
        }
    }

    #[test]
    fn blow_up_arithmetic() {
        let b = blow_up(&t4());
        assert_eq!((b.e, b.sigma, b.parity), (1, -1, Parity::Odd));
        assert_eq!(b.pi1, t4().pi1);
        let bb = blow_up(&b);
        assert_eq!((bb.e, bb.sigma), (2, -2));
    }

    #[test]
    fn sum_characteristic_numbers() {
        let g = Gluing::standard(2);
        let x1 = fiber_sum(&y1(1, 1).unwrap(), "Sigma2", &zpp(1, 1, 2).unwrap(), "SigmaBar2", &g).unwrap();
        assert_eq!((x1.e, x1.sigma, x1.parity), (5, -1, Parity::Odd));
        for n in 2..=4 {
            let xn = fiber_sum(&yn(n, 1).unwrap(), "Sigma2", &zpp(1, 0, 1).unwrap(), "SigmaBar2", &g).unwrap();
            assert_eq!((xn.e, xn.sigma), (4 * n as i64 + 1, -1));
        }
        let wm = fiber_sum(&t2xs2_4blowups(), "SigmaTilde2", &zpp(1, 1, 1).unwrap(), "SigmaBar2", &g).unwrap();
        assert_eq!((wm.e, wm.sigma), (9, -5));
        let rev = fiber_sum(&zpp(1, 1, 1).unwrap(), "SigmaBar2", &t2xs2_4blowups(), "SigmaTilde2", &g).unwrap();
        assert_eq!((rev.e, rev.sigma), (wm.e, wm.sigma));
    }

    #[test]
    fn x1_quotient_shape() {
        let g = Gluing::standard(2);
        let x1 = fiber_sum(&y1(1, 1).unwrap(), "Sigma2", &zpp(1, 1, 1).unwrap(), "SigmaBar2", &g).unwrap();
        assert_eq!(x1.pi1.generators().len(), 10);
        // 9 + 4 block relators, three exact identifications, one meridian relation
        assert_eq!(x1.pi1.relators().len(), 9 + 4 + 3 + 1);
        assert_eq!(x1.pi1.conditional().len(), 1);
        assert_eq!(x1.pi1.conditional()[0].meridian, w("[alpha3,alpha4]"));
        assert_eq!(x1.pi1.meridional().len(), 1);
        assert!(x1.pi1.relators().contains(&w("[c,d][alpha3,alpha4]")));
        assert!(h1(&candidate(&x1)).is_trivial());
    }

    #[test]
    fn collisions_are_renamed() {
        let g = Gluing::standard(2);
        let v = fiber_sum(&mqr(1, 1).unwrap().with_name("M"), "SigmaHat2", &zpp(1, 1, 1).unwrap(), "SigmaBar2", &g).unwrap();
        assert_eq!(v.pi1.generators().len(), 8);
        assert!(v.pi1.generator("M.alpha1").is_some());
        assert_eq!((v.e, v.sigma), (7, -3));
        assert!(h1(&candidate(&v)).is_trivial());
    }

    #[test]
    fn sum_errors() {
        let g = Gluing::standard(2);
        let z = zpp(1, 1, 1).unwrap();
        assert!(matches!(fiber_sum(&t4(), "Sigma2", &z, "SigmaBar2", &g), Err(SurgeryError::MissingSurface { .. })));
        assert!(matches!(fiber_sum(&z, "SigmaBar2", &z, "SigmaBar2", &Gluing::standard(1)), Err(SurgeryError::Gluing(_))));
    }
}
