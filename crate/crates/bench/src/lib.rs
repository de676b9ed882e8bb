//! Fixtures shared by the criterion benches in `benches/`.

use m4kit::abelianize::IntMatrix;
use m4kit::blocks::{y1, yn, zpp, MarkedManifold};
use m4kit::presentation::FpPresentation;
use m4kit::surgery::{fiber_sum, Gluing};

/// `X1(m)`: the smallest simply connected sum.
pub fn x1(m: u64) -> MarkedManifold {
    let y = y1(1, 1).expect("Y1(1,1)");
    let z = zpp(1, 1, m).expect("Zpp(1,1,m)");
    fiber_sum(&y, "Sigma2", &z, "SigmaBar2", &Gluing::standard(2)).expect("sum")
}

/// `Xn(m)` with `n` genus-`n` factors.
pub fn xn(n: u32, m: u64) -> MarkedManifold {
    let y = yn(n, m).expect("Yn");
    let z = zpp(1, 0, 1).expect("Z'");
    fiber_sum(&y, "Sigma2", &z, "SigmaBar2", &Gluing::standard(2)).expect("sum")
}

/// `Z/n x Z/n`, whose coset table has `n^2` rows.
pub fn abelian_square(n: u32) -> FpPresentation {
    let rels = [format!("a^{n}"), format!("b^{n}"), "[a,b]".to_string()];
    let rels: Vec<&str> = rels.iter().map(String::as_str).collect();
    FpPresentation::from_strs(&["a", "b"], &rels)
}

/// Dense `size x size` integer matrix with a deterministic pattern.
pub fn dense_matrix(size: usize) -> IntMatrix {
    let rows: Vec<Vec<i64>> =
        (0..size).map(|i| (0..size).map(|j| ((i * 7 + j * 13 + i * j) % 19) as i64 - 9).collect()).collect();
    IntMatrix::from_rows(&rows)
}
