//! Abelianization and first homology via integer Smith normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::pairing::GroupPresentation;

/// Dense matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<BigInt>>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![vec![BigInt::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    /// Rows must share a length; `cols` is taken from `cols` when there are no rows.
    pub fn from_i64(rows: &[Vec<i64>], cols: usize) -> Self {
        IntegerMatrix {
            rows: rows.len(),
            cols,
            data: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i][j] += &self.data[i][k] * &other.data[k][j];
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.data.swap(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for r in &mut self.data {
            r.swap(a, b);
        }
    }

    /// row[dst] -= q * row[src]
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let t = &self.data[src][j] * q;
            self.data[dst][j] -= t;
        }
    }

    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for r in &mut self.data {
            let t = &r[src] * q;
            r[dst] -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.data[i] {
            *x = -&*x;
        }
    }

    fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.data[i][j].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.data[i][i].clone()).collect()
    }
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &IntegerMatrix) -> BigInt {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.data.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Returns (U, D, V) with U·M·V = D diagonal, d1 | d2 | ..., pivots >= 0.
pub fn smith_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix, IntegerMatrix) {
    let mut d = m.clone();
    let mut u = IntegerMatrix::identity(m.rows);
    let mut v = IntegerMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);
    let mut t = 0;
    while t < n {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..d.rows {
            for j in t..d.cols {
                let x = &d.data[i][j];
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d.data[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        let mut dirty = false;
        for i in t + 1..d.rows {
            if d.data[i][t].is_zero() {
                continue;
            }
            let q = d.data[i][t].div_floor(&d.data[t][t]);
            d.sub_row(i, t, &q);
            u.sub_row(i, t, &q);
            dirty |= !d.data[i][t].is_zero();
        }
        for j in t + 1..d.cols {
            if d.data[t][j].is_zero() {
                continue;
            }
            let q = d.data[t][j].div_floor(&d.data[t][t]);
            d.sub_col(j, t, &q);
            v.sub_col(j, t, &q);
            dirty |= !d.data[t][j].is_zero();
        }
        if dirty {
            // a smaller remainder appeared; pick a new pivot
            continue;
        }
        // divisibility: fold a non-multiple into the pivot row
        let bad = (t + 1..d.rows)
            .flat_map(|i| (t + 1..d.cols).map(move |j| (i, j)))
            .find(|&(i, j)| !(&d.data[i][j] % &d.data[t][t]).is_zero());
        if let Some((i, _)) = bad {
            let one = BigInt::from(-1);
            d.sub_row(t, i, &one);
            u.sub_row(t, i, &one);
            continue;
        }
        if d.data[t][t].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    debug_assert!(d.is_diagonal());
    (u, d, v)
}

/// Row lattice membership: is `r` an integer combination of the rows of `m`?
pub fn in_row_lattice(m: &IntegerMatrix, r: &[BigInt]) -> bool {
    let (_, d, v) = smith_normal_form(m);
    let rv: Vec<BigInt> = (0..m.cols)
        .map(|j| (0..m.cols).map(|k| &r[k] * &v.data[k][j]).sum())
        .collect();
    rv.iter().enumerate().all(|(j, x)| {
        let dj = if j < d.rows {
            d.data[j][j].clone()
        } else {
            BigInt::zero()
        };
        if dj.is_zero() {
            x.is_zero()
        } else {
            (x % &dj).is_zero()
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    /// Invariant factors, each > 1, each dividing the next.
    #[serde(with = "decimal")]
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.torsion.iter().product())
    }
}

impl std::fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z_{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

/// Integers as JSON numbers when they fit in i64, else as decimal strings.
mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(i64),
        Big(String),
    }

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| {
                i64::try_from(x)
                    .map(Repr::Small)
                    .unwrap_or_else(|_| Repr::Big(x.to_string()))
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Small(x) => Ok(BigInt::from(x)),
                Repr::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

/// Exponent sums: one row per relator, one column per generator.
pub fn abelianize(p: &GroupPresentation) -> IntegerMatrix {
    IntegerMatrix {
        rows: p.relators.len(),
        cols: p.generators.len(),
        data: p
            .relators
            .iter()
            .map(|r| p.generators.iter().map(|g| BigInt::from(r.exponent_sum(g))).collect())
            .collect(),
    }
}

pub fn homology_of_matrix(m: &IntegerMatrix) -> HomologyGroup {
    let (_, d, _) = smith_normal_form(m);
    let diag = d.diagonal();
    let rank = diag.iter().filter(|x| !x.is_zero()).count();
    HomologyGroup {
        free_rank: m.cols - rank,
        torsion: diag.into_iter().filter(|x| *x > BigInt::one()).collect(),
    }
}

pub fn first_homology(p: &GroupPresentation) -> HomologyGroup {
    homology_of_matrix(&abelianize(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::GroupWord;

    fn mat(rows: &[Vec<i64>]) -> IntegerMatrix {
        IntegerMatrix::from_i64(rows, rows.first().map_or(0, |r| r.len()))
    }

    fn diag_of(rows: &[Vec<i64>]) -> Vec<i64> {
        let m = mat(rows);
        let (u, d, v) = smith_normal_form(&m);
        assert_eq!(u.mul(&m).mul(&v), d);
        assert_eq!(determinant(&u).abs(), BigInt::one());
        assert_eq!(determinant(&v).abs(), BigInt::one());
        d.diagonal().iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn small_snf() {
        assert_eq!(diag_of(&[vec![8, -7], vec![-6, 7]]), vec![1, 14]);
        assert_eq!(diag_of(&[vec![0, 4], vec![4, 0]]), vec![4, 4]);
        assert_eq!(diag_of(&[vec![0, 0], vec![0, 0]]), vec![0, 0]);
        assert_eq!(diag_of(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(
            diag_of(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]),
            vec![2, 6, 12]
        );
    }

    #[test]
    fn determinant_matches_cofactor() {
        assert_eq!(determinant(&mat(&[vec![8, -7], vec![-6, 7]])), BigInt::from(14));
        assert_eq!(
            determinant(&mat(&[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 9]])),
            BigInt::from(-3)
        );
        assert_eq!(determinant(&mat(&[vec![1, 2], vec![2, 4]])), BigInt::zero());
    }

    #[test]
    fn homology_strings() {
        let p = |gens: &[&str], rels: &[&str]| GroupPresentation {
            generators: gens.iter().map(|s| s.to_string()).collect(),
            relators: rels.iter().map(|r| GroupWord::parse(r).unwrap()).collect(),
        };
        assert_eq!(
            first_homology(&p(&["a", "b"], &["a^8 b^-7", "a^-6 b^7"])).to_string(),
            "Z_14"
        );
        assert_eq!(
            first_homology(&p(&["u", "v"], &["v^2 u v^2 u^-1", "u^2 v^-1 u^2 v"])).to_string(),
            "Z_4 ⊕ Z_4"
        );
        assert_eq!(
            first_homology(&p(&["x", "y", "z"], &["x y x^-1 y^-1"])).to_string(),
            "Z^3"
        );
        assert_eq!(first_homology(&p(&["a"], &["a"])).to_string(), "0");
        assert_eq!(first_homology(&p(&["a", "b"], &["a^2"])).to_string(), "Z ⊕ Z_2");
        assert_eq!(abelianize(&p(&["a"], &[])).rows, 0);
    }

    #[test]
    fn json_round_trip() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let h = HomologyGroup {
            free_rank: 1,
            torsion: vec![BigInt::from(14), big],
        };
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains("[14,\"123456789012345678901234567890\"]"), "{s}");
        assert_eq!(serde_json::from_str::<HomologyGroup>(&s).unwrap(), h);
    }

    #[test]
    fn lattice_membership() {
        let m = mat(&[vec![8, -7], vec![-6, 7]]);
        assert!(in_row_lattice(&m, &[BigInt::from(2), BigInt::zero()]));
        assert!(!in_row_lattice(&m, &[BigInt::from(1), BigInt::zero()]));
        assert!(in_row_lattice(
            &IntegerMatrix::zeros(0, 2),
            &[BigInt::zero(), BigInt::zero()]
        ));
    }
}
