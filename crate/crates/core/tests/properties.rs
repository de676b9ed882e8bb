use m4kit::abelianize::{smith_normal_form, IntMatrix};
use m4kit::manifest::{parse, Constructor, Manifest, Statement, Stmt};
use m4kit::word::{Generator, Letter, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn word_strategy() -> impl Strategy<Value = Word> {
    let gens = ["a", "b", "c", "M.x1", "y'"];
    prop::collection::vec((0..gens.len(), any::<bool>()), 0..24)
        .prop_map(move |v| Word::reduce(v.into_iter().map(|(i, inv)| Letter::new(Generator::new(gens[i]).unwrap(), inv))))
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..5).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-9i64..=9, n), n))
}

proptest! {
    #[test]
    fn word_inverse_cancels(w in word_strategy()) {
        prop_assert!(w.multiply(&w.inverse()).is_identity());
        prop_assert_eq!(w.inverse().inverse(), w);
    }

    #[test]
    fn word_text_round_trips(w in word_strategy()) {
        prop_assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn rotations_are_equivalent_relators(w in word_strategy()) {
        let c = w.cyclically_reduced();
        for r in c.rotations() {
            prop_assert!(r.relator_equivalent(&w));
            prop_assert!(r.inverse().relator_equivalent(&w));
        }
    }

    #[test]
    fn smith_form_is_a_unimodular_diagonalization(rows in matrix_strategy()) {
        let m = IntMatrix::from_rows(&rows);
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.left.mul(&m).mul(&s.right), s.diagonal.clone());
        prop_assert!(s.diagonal.is_diagonal());
        prop_assert_eq!(s.left.determinant().abs(), BigInt::from(1));
        prop_assert_eq!(s.right.determinant().abs(), BigInt::from(1));
        let f = s.invariant_factors();
        for pair in f.windows(2) {
            prop_assert!(pair[1].is_multiple_of(&pair[0]));
        }
        let det = m.determinant().abs();
        if !det.is_zero() {
            prop_assert_eq!(f.iter().product::<BigInt>().abs(), det);
        }
    }

    #[test]
    fn manifest_print_parse_is_a_fixed_point(
        q in 0u64..6, r in 0u64..6, m in 1u64..6, e1 in prop::bool::ANY, e3 in prop::bool::ANY,
        p in 0u64..9, chi in -3i64..5, c in -3i64..40,
    ) {
        let sign = |b: bool| if b { 1 } else { -1 };
        let stmts = vec![
            Stmt::Block { name: "Z".into(), constructor: Constructor::Zpp { q, r, m, e1: sign(e1), e3: sign(e3) } },
            Stmt::Block { name: "Y".into(), constructor: Constructor::Y1 { p, q: r } },
            Stmt::Surgery { name: "S".into(), source: "Z".into(), site: "alpha1'xalpha3'".into(), k: q, m },
            Stmt::Blowup { name: "B".into(), source: "S".into() },
            Stmt::Realize { name: "R".into(), chi, c },
        ];
        let manifest = Manifest { statements: stmts.into_iter().map(|stmt| Statement { pos: Default::default(), stmt }).collect() };
        let text = manifest.to_string();
        let once = parse(&text).unwrap();
        prop_assert_eq!(once.stmts(), manifest.stmts());
        let twice = parse(&once.to_string()).unwrap();
        prop_assert_eq!(twice.to_string(), text);
    }
}
