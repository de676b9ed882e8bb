//! First homology via exponent-sum matrices and Smith normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::presentation::FpPresentation;

/// Dense matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = IntMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(*v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for c in 0..self.cols {
            let v = k * &self[(src, c)];
            self[(dst, c)] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for r in 0..self.rows {
            let v = k * &self[(r, src)];
            self[(r, dst)] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -&self[(r, c)];
            self[(r, c)] = v;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// `left · input · right = diagonal`, with `left` and `right` unimodular.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub diagonal: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    /// The nonzero diagonal entries, each dividing the next.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let n = self.diagonal.rows.min(self.diagonal.cols);
        (0..n).map(|i| self.diagonal[(i, i)].clone()).filter(|d| !d.is_zero()).collect()
    }
}

/// Exponent sums: entry `(i, j)` is the exponent sum of generator `j` in relator `i`.
pub fn relation_matrix(p: &FpPresentation) -> IntMatrix {
    let gens = p.generators();
    let mut m = IntMatrix::zeros(p.relators().len(), gens.len());
    for (i, r) in p.relators().iter().enumerate() {
        for l in r.letters() {
            let j = gens.iter().position(|g| *g == l.gen).expect("relator letter is a generator");
            m[(i, j)] += l.sign();
        }
    }
    m
}

/// Smith normal form with smallest-absolute-value pivoting.
pub fn smith_normal_form(input: &IntMatrix) -> SmithForm {
    let (rows, cols) = (input.rows, input.cols);
    let mut d = input.clone();
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero |entry| in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(d, left, right);
            };
            d.swap_rows(t, pi);
            left.swap_rows(t, pi);
            d.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_row(i, t, &nq);
                left.add_row(i, t, &nq);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_col(j, t, &nq);
                right.add_col(j, t, &nq);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: pivot must divide every trailing entry
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&d[(i, j)] % &d[(t, t)]).is_zero());
            match bad {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    left.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            left.negate_row(t);
        }
    }
    finish(d, left, right)
}

fn finish(mut d: IntMatrix, mut left: IntMatrix, right: IntMatrix) -> SmithForm {
    for t in 0..d.rows.min(d.cols) {
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            left.negate_row(t);
        }
    }
    SmithForm { diagonal: d, left, right }
}

/// Abelianization `ℤ^rank ⊕ ⊕ ℤ/dᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Result {
    pub rank: usize,
    #[serde(with = "bigint_vec")]
    pub torsion: Vec<BigInt>,
}

impl H1Result {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_infinite_cyclic(&self) -> bool {
        self.rank == 1 && self.torsion.is_empty()
    }

    /// `Some(n)` if the group is `ℤ/n` with `n ≥ 2`.
    pub fn finite_cyclic_order(&self) -> Option<BigInt> {
        (self.rank == 0 && self.torsion.len() == 1).then(|| self.torsion[0].clone())
    }

    /// Group order when finite.
    pub fn order(&self) -> Option<BigInt> {
        (self.rank == 0).then(|| self.torsion.iter().product())
    }

    pub fn torsion_u64(&self) -> Vec<u64> {
        self.torsion.iter().map(|t| t.to_u64().expect("small torsion")).collect()
    }
}

impl fmt::Display for H1Result {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|b| b.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

/// Cokernel of the relation matrix in canonical form. Meridional tiers are
/// not counted: they contribute no columns.
pub fn h1(p: &FpPresentation) -> H1Result {
    let m = relation_matrix(p);
    let snf = smith_normal_form(&m);
    let factors = snf.invariant_factors();
    let rank = p.generators().len() - factors.len();
    let torsion = factors.into_iter().filter(|d| !d.is_one()).collect();
    H1Result { rank, torsion }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::FpPresentation;

    fn check_transforms(m: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(s.left.mul(m).mul(&s.right), s.diagonal);
        assert!(s.diagonal.is_diagonal());
        assert_eq!(s.left.determinant().abs(), BigInt::one());
        assert_eq!(s.right.determinant().abs(), BigInt::one());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "{} does not divide {}", w[0], w[1]);
        }
        s
    }

    #[test]
    fn snf_examples() {
        let s = check_transforms(&IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]));
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2), BigInt::from(4)]);
        let id = IntMatrix::identity(3);
        assert_eq!(check_transforms(&id).diagonal, id);
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(check_transforms(&z).diagonal, z);
    }

    #[test]
    fn snf_needs_divisibility_fix() {
        // diag(2,3) is not in Smith form; it should become diag(1,6)
        let s = check_transforms(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(s.invariant_factors(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn relation_matrix_examples() {
        let p = FpPresentation::from_strs(&["a"], &["a^5"]);
        assert_eq!(relation_matrix(&p), IntMatrix::from_rows(&[vec![5]]));
        let p = FpPresentation::from_strs(&["a", "b"], &["[a,b]"]);
        assert_eq!(relation_matrix(&p), IntMatrix::from_rows(&[vec![0, 0]]));
    }

    #[test]
    fn h1_examples() {
        for p in 2..8 {
            let pres = FpPresentation::from_strs(&["c"], &[&format!("c^{p}")]);
            let h = h1(&pres);
            assert_eq!(h.rank, 0);
            assert_eq!(h.torsion_u64(), vec![p]);
        }
        let free = FpPresentation::from_strs(&["a", "b"], &[]);
        assert_eq!(h1(&free).rank, 2);
        assert_eq!(h1(&free).to_string(), "Z^2");
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 0], vec![3, 4, 5], vec![0, 7, -2]]);
        // 2(4·-2 - 5·7) - (-1)(3·-2 - 0) + 0 = 2(-43) + (-6) = -92
        assert_eq!(m.determinant(), BigInt::from(-92));
    }
}
