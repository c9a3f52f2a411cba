//! Exact rational matrices: rank, kernel, reduced row echelon form, and a
//! sparse elimination for the larger cochain complexes.  No floating point
//! anywhere.

use crate::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A dense matrix over the rationals, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<Rat>,
}

impl QMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        QMatrix {
            nrows,
            ncols,
            data: vec![Rat::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols);
            data.extend(r);
        }
        QMatrix { nrows, ncols, data }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| crate::rat(x)).collect())
                .collect(),
        )
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = QMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.ncols {
                    if other[(k, j)].is_zero() {
                        continue;
                    }
                    let add = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.ncols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc += &self[(i, j)] * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Exact rank via fraction-free (Bareiss-style) elimination on a
    /// denominator-cleared integer copy.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<BigInt>> = (0..self.nrows)
            .map(|i| clear_denominators(self.row(i)))
            .collect();
        integer_rank(&mut rows)
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.ncols {
            if r == m.nrows {
                break;
            }
            // pick the shortest nonzero candidate row for stability of cost
            let pivot = (r..m.nrows)
                .filter(|&i| !m[(i, c)].is_zero())
                .min_by_key(|&i| m.row(i).iter().filter(|x| !x.is_zero()).count());
            let Some(p) = pivot else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].clone();
            for j in c..m.ncols {
                let v = &m[(r, j)] / &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.nrows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.ncols {
                        let sub = &f * &m[(r, j)];
                        m[(i, j)] -= sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// A basis of the (right) kernel `{v : A v = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (rref, pivots) = self.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.ncols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Rat::zero(); self.ncols];
            v[f] = Rat::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -rref[(r, f)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `A x = b`; `None` when inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.nrows);
        let mut aug = QMatrix::zeros(self.nrows, self.ncols + 1);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.ncols)] = b[i].clone();
        }
        let (rref, pivots) = aug.rref();
        if pivots.contains(&self.ncols) {
            return None; // pivot in the augmented column
        }
        let mut x = vec![Rat::zero(); self.ncols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = rref[(r, self.ncols)].clone();
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            self.data.swap(a * self.ncols + j, b * self.ncols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.ncols + j]
    }
}

impl std::fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            writeln!(
                f,
                "  {:?}",
                self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()
            )?;
        }
        write!(f, "]")
    }
}

fn clear_denominators(row: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in row {
        if !x.is_zero() {
            let d = x.denom();
            let g = gcd_big(&lcm, d);
            lcm = &lcm / &g * d;
        }
    }
    row.iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect()
}

fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Fraction-free Gaussian elimination (Bareiss) rank of integer rows.
fn integer_rank(rows: &mut [Vec<BigInt>]) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let pivot = (r..nrows).find(|&i| !rows[i][c].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(r, p);
        for i in r + 1..nrows {
            if rows[i].iter().all(|x| x.is_zero()) {
                continue;
            }
            for j in c + 1..ncols {
                let num = &rows[r][c] * &rows[i][j] - &rows[i][c] * &rows[r][j];
                rows[i][j] = &num / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        rank += 1;
        r += 1;
    }
    rank
}

/// A sparse matrix over the rationals, for rank computations on large
/// cochain complexes.  Rows are sorted (column, value) pairs.
pub struct SparseMat {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, Rat)>>,
}

impl SparseMat {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: Rat) {
        if !v.is_zero() {
            self.rows[i].push((j, v));
        }
    }

    pub fn finish_rows(&mut self) {
        for r in &mut self.rows {
            r.sort_by_key(|&(j, _)| j);
        }
    }

    /// Rank by sparse elimination with a fewest-entries pivot heuristic.
    pub fn rank(mut self) -> usize {
        // bucket rows by leading column; eliminate column by column
        let mut rank = 0;
        let mut by_lead: Vec<Vec<Vec<(usize, Rat)>>> = vec![Vec::new(); self.ncols + 1];
        for row in self.rows.drain(..) {
            let lead = row.first().map_or(self.ncols, |&(j, _)| j);
            by_lead[lead].push(row);
        }
        for col in 0..self.ncols {
            let mut bucket = std::mem::take(&mut by_lead[col]);
            if bucket.is_empty() {
                continue;
            }
            // pick the sparsest row as pivot
            let pi = bucket
                .iter()
                .enumerate()
                .min_by_key(|(_, r)| r.len())
                .map(|(i, _)| i)
                .unwrap();
            let pivot = bucket.swap_remove(pi);
            rank += 1;
            let pv = pivot[0].1.clone();
            for row in bucket {
                let f = &row[0].1 / &pv;
                let new = row_axpy(&row, &pivot, &f);
                let lead = new.first().map_or(self.ncols, |&(j, _)| j);
                debug_assert!(lead > col);
                by_lead[lead].push(new);
            }
        }
        rank
    }
}

/// `a - f * b`, sparse.
fn row_axpy(a: &[(usize, Rat)], b: &[(usize, Rat)], f: &Rat) -> Vec<(usize, Rat)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ca, ref va)), Some(&(cb, ref vb))) => {
                if ca < cb {
                    out.push((ca, va.clone()));
                    i += 1;
                } else if cb < ca {
                    out.push((cb, -(f * vb)));
                    j += 1;
                } else {
                    let v = va - &(f * vb);
                    if !v.is_zero() {
                        out.push((ca, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some(&(ca, ref va)), None) => {
                out.push((ca, va.clone()));
                i += 1;
            }
            (None, Some(&(cb, ref vb))) => {
                out.push((cb, -(f * vb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn identity_rank_and_kernel() {
        let m = QMatrix::identity(3);
        assert_eq!(m.rank(), 3);
        assert!(m.kernel_basis().is_empty());
    }

    #[test]
    fn zero_matrix_kernel() {
        let m = QMatrix::zeros(2, 3);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.kernel_basis().len(), 3);
    }

    #[test]
    fn rank_and_kernel_consistency() {
        let m = QMatrix::from_int_rows(&[
            vec![1, 2, 3, 1],
            vec![2, 4, 6, 2],
            vec![1, 0, 1, 0],
            vec![0, 2, 2, 1],
        ]);
        let r = m.rank();
        let k = m.kernel_basis();
        assert_eq!(r + k.len(), 4);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        // sparse path agrees
        let mut s = SparseMat::new(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                s.push(i, j, m[(i, j)].clone());
            }
        }
        s.finish_rows();
        assert_eq!(s.rank(), r);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = QMatrix::from_int_rows(&[vec![1, 1], vec![1, -1]]);
        let x = m.solve(&[rat(3), rat(1)]).unwrap();
        assert_eq!(x, vec![rat(2), rat(1)]);
        let sing = QMatrix::from_int_rows(&[vec![1, 1], vec![2, 2]]);
        assert!(sing.solve(&[rat(1), rat(3)]).is_none());
        assert!(sing.solve(&[rat(1), rat(2)]).is_some());
    }

    #[test]
    fn fractions_are_exact() {
        // a matrix engineered to produce awkward fractions
        let m = QMatrix::from_int_rows(&[
            vec![3, 7, 2],
            vec![5, 11, 13],
            vec![8, 18, 15],
        ]);
        // third row = first + second, so rank 2
        assert_eq!(m.rank(), 2);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn random_rank_matches_dense_sparse() {
        // deterministic pseudo-random small matrices
        let mut seed = 0x12345678u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 7) as i64 - 3
        };
        for _ in 0..20 {
            let rows: Vec<Vec<i64>> = (0..6).map(|_| (0..8).map(|_| next()).collect()).collect();
            let m = QMatrix::from_int_rows(&rows);
            let mut s = SparseMat::new(6, 8);
            for (i, r) in rows.iter().enumerate() {
                for (j, &v) in r.iter().enumerate() {
                    s.push(i, j, rat(v));
                }
            }
            s.finish_rows();
            assert_eq!(m.rank(), s.rank());
            assert_eq!(m.rank(), m.rref().1.len());
        }
    }
}
