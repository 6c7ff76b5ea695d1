use std::fmt;

use super::{RatFunc, ScalarError};

/// Dense row-major matrix over Q(zeta_m)(t).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FMatrix {
    m: u32,
    rows: usize,
    cols: usize,
    data: Vec<RatFunc>,
}

/// One particular solution together with a basis of the homogeneous solutions.
#[derive(Clone, Debug)]
pub struct Solution {
    pub particular: FMatrix,
    pub kernel: FMatrix,
}

struct Reduced {
    rows: Vec<Vec<RatFunc>>,
    pivots: Vec<(usize, usize)>,
}

impl FMatrix {
    pub fn zeros(m: u32, rows: usize, cols: usize) -> Self {
        FMatrix { m, rows, cols, data: vec![RatFunc::zero(m); rows * cols] }
    }

    pub fn identity(m: u32, n: usize) -> Self {
        let mut a = Self::zeros(m, n, n);
        for k in 0..n {
            a.data[k * n + k] = RatFunc::one(m);
        }
        a
    }

    pub fn from_fn(m: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RatFunc) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        FMatrix { m, rows, cols, data }
    }

    pub fn from_rows(m: u32, rows: Vec<Vec<RatFunc>>) -> Result<Self, ScalarError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(ScalarError::Shape("ragged rows".into()));
        }
        if rows.iter().flatten().any(|x| x.conductor() != m) {
            return Err(ScalarError::ConductorMismatch(m, rows.iter().flatten().find(|x| x.conductor() != m).unwrap().conductor()));
        }
        Ok(FMatrix { m, rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_int_rows(m: u32, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(m, r, c, |i, j| RatFunc::from_int(m, rows[i][j]))
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &RatFunc {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: RatFunc) {
        self.data[r * self.cols + c] = x;
    }

    pub fn entries(&self) -> &[RatFunc] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[RatFunc] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn same_shape(&self, o: &Self) -> Result<(), ScalarError> {
        if self.m != o.m {
            return Err(ScalarError::ConductorMismatch(self.m, o.m));
        }
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(ScalarError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, ScalarError> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.try_add(b)).collect::<Result<_, _>>()?;
        Ok(self.with_data(data))
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, ScalarError> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.try_sub(b)).collect::<Result<_, _>>()?;
        Ok(self.with_data(data))
    }

    fn with_data(&self, data: Vec<RatFunc>) -> FMatrix {
        FMatrix { m: self.m, rows: self.rows, cols: self.cols, data }
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ScalarError> {
        if self.m != o.m {
            return Err(ScalarError::ConductorMismatch(self.m, o.m));
        }
        if self.cols != o.rows {
            return Err(ScalarError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.m, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].try_add(&a.try_mul(b)?)?;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &RatFunc) -> Self {
        self.with_data(self.data.iter().map(|x| x.try_mul(s).expect("conductor mismatch")).collect())
    }

    pub fn neg(&self) -> Self {
        self.with_data(self.data.iter().map(|x| x.neg()).collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.m, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose, with t real.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.m, self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(self.m, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(self.m, nr, nc, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &FMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn hstack(&self, o: &Self) -> Result<Self, ScalarError> {
        if self.rows != o.rows {
            return Err(ScalarError::Shape("hstack row mismatch".into()));
        }
        Ok(Self::from_fn(self.m, self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols { self.get(i, j).clone() } else { o.get(i, j - self.cols).clone() }
        }))
    }

    pub fn vstack(&self, o: &Self) -> Result<Self, ScalarError> {
        if self.cols != o.cols {
            return Err(ScalarError::Shape("vstack column mismatch".into()));
        }
        Ok(Self::from_fn(self.m, self.rows + o.rows, self.cols, |i, j| {
            if i < self.rows { self.get(i, j).clone() } else { o.get(i - self.rows, j).clone() }
        }))
    }

    /// Gauss-Jordan elimination with pivots restricted to the first `pivot_cols` columns.
    /// Pivot choice: lowest total degree, then row, then column.
    fn reduce(&self, pivot_cols: usize) -> Result<Reduced, ScalarError> {
        let mut rows: Vec<Vec<RatFunc>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut row_used = vec![false; self.rows];
        let mut col_used = vec![false; pivot_cols];
        let mut pivots = Vec::new();
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for (r, row) in rows.iter().enumerate() {
                if row_used[r] {
                    continue;
                }
                for c in 0..pivot_cols {
                    if col_used[c] || row[c].is_zero() {
                        continue;
                    }
                    let key = (row[c].total_degree(), r, c);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
            let Some((_, pr, pc)) = best else { break };
            let inv = rows[pr][pc].inv()?;
            for x in rows[pr].iter_mut() {
                if !x.is_zero() {
                    *x = x.try_mul(&inv)?;
                }
            }
            let prow = rows[pr].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == pr || row[pc].is_zero() {
                    continue;
                }
                let f = row[pc].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *x = x.try_sub(&f.try_mul(p)?)?;
                    }
                }
            }
            row_used[pr] = true;
            col_used[pc] = true;
            pivots.push((pr, pc));
        }
        Ok(Reduced { rows, pivots })
    }

    pub fn rank(&self) -> usize {
        self.reduce(self.cols).expect("elimination").pivots.len()
    }

    /// Basis of the right kernel as the columns of a cols x (cols - rank) matrix.
    pub fn kernel_basis(&self) -> FMatrix {
        let red = self.reduce(self.cols).expect("elimination");
        Self::kernel_from(&red, self.m, self.cols)
    }

    fn kernel_from(red: &Reduced, m: u32, n: usize) -> FMatrix {
        let mut is_pivot = vec![false; n];
        for &(_, c) in &red.pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..n).filter(|c| !is_pivot[*c]).collect();
        let mut k = FMatrix::zeros(m, n, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, RatFunc::one(m));
            for &(r, c) in &red.pivots {
                let v = &red.rows[r][f];
                if !v.is_zero() {
                    k.set(c, j, v.neg());
                }
            }
        }
        k
    }

    /// Solves self * X = b for all columns of b at once.
    pub fn solve(&self, b: &FMatrix) -> Result<Solution, ScalarError> {
        if b.rows != self.rows {
            return Err(ScalarError::Shape("right-hand side row mismatch".into()));
        }
        let aug = self.hstack(b)?;
        let red = aug.reduce(self.cols)?;
        let mut pivot_row = vec![false; self.rows];
        for &(r, _) in &red.pivots {
            pivot_row[r] = true;
        }
        for (r, row) in red.rows.iter().enumerate() {
            if !pivot_row[r] && row[self.cols..].iter().any(|x| !x.is_zero()) {
                return Err(ScalarError::Inconsistent);
            }
        }
        let mut x = FMatrix::zeros(self.m, self.cols, b.cols);
        for &(r, c) in &red.pivots {
            for j in 0..b.cols {
                x.set(c, j, red.rows[r][self.cols + j].clone());
            }
        }
        Ok(Solution { particular: x, kernel: Self::kernel_from(&red, self.m, self.cols) })
    }

    pub fn inverse(&self) -> Result<FMatrix, ScalarError> {
        if !self.is_square() {
            return Err(ScalarError::Shape("inverse of a non-square matrix".into()));
        }
        let s = self.solve(&FMatrix::identity(self.m, self.rows)).map_err(|e| match e {
            ScalarError::Inconsistent => ScalarError::Singular,
            e => e,
        })?;
        if s.kernel.cols > 0 {
            return Err(ScalarError::Singular);
        }
        Ok(s.particular)
    }

    /// Reduced row echelon form with zero rows dropped. Unique for a given row space.
    pub fn rref(&self) -> FMatrix {
        let mut rows: Vec<Vec<RatFunc>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut lead = 0;
        for c in 0..self.cols {
            let Some(p) = (lead..rows.len()).filter(|&r| !rows[r][c].is_zero()).min_by_key(|&r| (rows[r][c].total_degree(), r))
            else {
                continue;
            };
            rows.swap(lead, p);
            let inv = rows[lead][c].inv().expect("nonzero pivot");
            for x in rows[lead].iter_mut() {
                *x = x.try_mul(&inv).unwrap();
            }
            let prow = rows[lead].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == lead || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, q) in row.iter_mut().zip(&prow) {
                    if !q.is_zero() {
                        *x = x.try_sub(&f.try_mul(q).unwrap()).unwrap();
                    }
                }
            }
            lead += 1;
        }
        rows.truncate(lead);
        FMatrix { m: self.m, rows: lead, cols: self.cols, data: rows.into_iter().flatten().collect() }
    }

    /// Row indices of a maximal independent set of rows, in elimination order sorted ascending.
    pub fn pivot_rows(&self) -> Vec<usize> {
        let red = self.transpose().reduce(self.rows).expect("elimination");
        let mut r: Vec<usize> = red.pivots.iter().map(|p| p.1).collect();
        r.sort_unstable();
        r
    }

    /// Surjection pi with ker(pi) = im(self). Returns pi and the complement of
    /// the pivot rows, which indexes the rows of pi.
    pub fn cokernel_projection(&self) -> Result<(FMatrix, Vec<usize>), ScalarError> {
        let piv = self.pivot_rows();
        let comp: Vec<usize> = (0..self.rows).filter(|r| piv.binary_search(r).is_err()).collect();
        let all: Vec<usize> = (0..self.cols).collect();
        let a_r = self.select(&piv, &all);
        let a_c = self.select(&comp, &all);
        let mut pi = FMatrix::zeros(self.m, comp.len(), self.rows);
        if !comp.is_empty() && !piv.is_empty() {
            let mt = a_r.transpose().solve(&a_c.transpose())?.particular;
            for (i, _) in comp.iter().enumerate() {
                for (k, &r) in piv.iter().enumerate() {
                    pi.set(i, r, mt.get(k, i).neg());
                }
            }
        }
        for (i, &c) in comp.iter().enumerate() {
            pi.set(i, c, RatFunc::one(self.m));
        }
        Ok((pi, comp))
    }
}

impl fmt::Display for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {}", self.rows, self.cols, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> RatFunc {
        RatFunc::t(4)
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = FMatrix::from_rows(
            4,
            vec![vec![t(), RatFunc::one(4)], vec![t().pow(2).unwrap(), t()]],
        )
        .unwrap();
        assert_eq!(a.rank(), 1);
        let k = a.kernel_basis();
        assert_eq!(k.cols(), 1);
        assert!(a.try_mul(&k).unwrap().is_zero());
    }

    #[test]
    fn zero_kernel_is_identity() {
        assert_eq!(FMatrix::zeros(4, 2, 2).kernel_basis(), FMatrix::identity(4, 2));
    }

    #[test]
    fn unipotent_inverse() {
        let a = FMatrix::from_int_rows(4, &[&[1, 1], &[0, 1]]);
        assert_eq!(a.inverse().unwrap(), FMatrix::from_int_rows(4, &[&[1, -1], &[0, 1]]));
        assert!(matches!(FMatrix::zeros(4, 2, 2).inverse(), Err(ScalarError::Singular)));
    }

    #[test]
    fn inconsistent_solve() {
        let a = FMatrix::from_int_rows(4, &[&[1, 1], &[1, 1]]);
        let b = FMatrix::from_int_rows(4, &[&[1], &[2]]);
        assert!(matches!(a.solve(&b), Err(ScalarError::Inconsistent)));
    }

    #[test]
    fn cokernel_kills_image() {
        let a = FMatrix::from_int_rows(4, &[&[1, 0], &[2, 0], &[0, 1], &[1, 1]]);
        let (pi, comp) = a.cokernel_projection().unwrap();
        assert_eq!(pi.rows(), 2);
        assert_eq!(comp.len(), 2);
        assert!(pi.try_mul(&a).unwrap().is_zero());
        assert_eq!(pi.rank(), 2);
    }
}
