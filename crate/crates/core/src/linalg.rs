//! Sparse symmetric matrices, envelope Cholesky, and a shift-invert block
//! Krylov eigensolver for the smallest eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Systems at or below this size are solved densely.
pub const DENSE_LIMIT: usize = 300;

/// Symmetric sparse matrix in row-compressed form (both triangles stored).
#[derive(Clone, Debug)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Build from per-row `(col, value)` lists. Rows must be symmetric; each
    /// row is sorted by column here.
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Envelope (skyline) Cholesky factor `A = L Lᵀ`. Row `i` of `L` is stored
/// densely from its first structural nonzero to the diagonal.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offs: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSym) -> Result<Self> {
        let n = a.n();
        let mut first = vec![0usize; n];
        let mut offs = vec![0usize; n + 1];
        for i in 0..n {
            first[i] = a
                .row(i)
                .map(|(c, _)| c)
                .filter(|&c| c <= i)
                .min()
                .unwrap_or(i);
            offs[i + 1] = offs[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offs[n]];
        for i in 0..n {
            for (c, v) in a.row(i) {
                if c <= i {
                    data[offs[i] + c - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (head, tail) = data.split_at_mut(offs[i]);
            let row_i = &mut tail[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &head[offs[j]..offs[j] + (j - fj + 1)];
                let s = dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let d = row_i[i - fi] - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 0.0) {
                return Err(Error::SolverNoConvergence(format!(
                    "matrix not positive definite at row {i}"
                )));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self { first, offs, data })
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offs[i]..self.offs[i + 1]];
            let s = dot(&row[..i - fi], &x[fi..i]);
            x[i] = (x[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offs[i]..self.offs[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (xk, l) in x[fi..i].iter_mut().zip(&row[..i - fi]) {
                *xk -= l * xi;
            }
        }
    }
}

/// Options for [`smallest_eigenvalues`].
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub count: usize,
    /// Relative residual `‖A y − θ y‖ / θ` required of each returned pair.
    pub tolerance: f64,
    pub block: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl EigenOptions {
    pub fn new(count: usize, tolerance: f64) -> Self {
        let block = count.clamp(4, 8);
        Self {
            count,
            tolerance,
            block,
            max_basis: (6 * block + 2 * count).max(40),
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

/// The `count` smallest eigenvalues of a symmetric positive definite matrix,
/// with multiplicity, nondecreasing.
pub fn smallest_eigenvalues(a: &SparseSym, opts: &EigenOptions) -> Result<Vec<f64>> {
    let n = a.n();
    if opts.count == 0 || opts.count > n {
        return Err(Error::InvalidConfig(format!(
            "requested {} eigenvalues of a {n}x{n} system",
            opts.count
        )));
    }
    if n <= DENSE_LIMIT || n <= opts.max_basis + opts.block {
        let eig = SymmetricEigen::new(a.to_dense());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.truncate(opts.count);
        return Ok(vals);
    }
    let chol = EnvelopeCholesky::factor(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pending: Vec<Vec<f64>> = (0..opts.block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut a_basis: Vec<Vec<f64>> = Vec::new();
    let mut restarts = 0;
    loop {
        // expand with the pending block
        let mut added: Vec<usize> = Vec::new();
        for mut x in pending.drain(..) {
            let before = dot(&x, &x).sqrt();
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &x);
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi -= c * vi;
                    }
                }
            }
            let norm = dot(&x, &x).sqrt();
            if !(norm > 1e-10 * before) {
                continue;
            }
            x.iter_mut().for_each(|xi| *xi /= norm);
            let mut ax = vec![0.0; n];
            a.mul(&x, &mut ax);
            added.push(basis.len());
            basis.push(x);
            a_basis.push(ax);
        }
        let m = basis.len();
        if added.is_empty() || m < opts.count {
            return Err(Error::SolverNoConvergence("Krylov space collapsed".into()));
        }
        let h = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &a_basis[j]));
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let ritz = |col: usize| -> (Vec<f64>, Vec<f64>) {
            let mut y = vec![0.0; n];
            let mut ay = vec![0.0; n];
            for k in 0..m {
                let c = eig.eigenvectors[(k, col)];
                for ((yi, ayi), (v, av)) in y
                    .iter_mut()
                    .zip(ay.iter_mut())
                    .zip(basis[k].iter().zip(&a_basis[k]))
                {
                    *yi += c * v;
                    *ayi += c * av;
                }
            }
            (y, ay)
        };
        let mut converged = true;
        for &col in order.iter().take(opts.count) {
            let theta = eig.eigenvalues[col];
            let (y, ay) = ritz(col);
            let res: f64 = y
                .iter()
                .zip(&ay)
                .map(|(yi, ayi)| (ayi - theta * yi).powi(2))
                .sum::<f64>()
                .sqrt();
            if !(res <= opts.tolerance * theta.abs()) {
                converged = false;
                break;
            }
        }
        if converged {
            return Ok(order
                .iter()
                .take(opts.count)
                .map(|&c| eig.eigenvalues[c])
                .collect());
        }
        if m + opts.block > opts.max_basis {
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(Error::SolverNoConvergence(format!(
                    "no convergence after {} restarts",
                    opts.max_restarts
                )));
            }
            let keep = (opts.count + opts.block).min(m);
            let kept: Vec<Vec<f64>> = order.iter().take(keep).map(|&c| ritz(c).0).collect();
            basis.clear();
            a_basis.clear();
            // the kept Ritz vectors seed the new basis; the next expansion
            // applies the inverse to the trailing block of them
            pending = kept;
            let mut solved: Vec<Vec<f64>> = pending
                [pending.len() - opts.block.min(pending.len())..]
                .iter()
                .map(|v| {
                    let mut x = v.clone();
                    chol.solve_in_place(&mut x);
                    x
                })
                .collect();
            pending.append(&mut solved);
            continue;
        }
        pending = added
            .iter()
            .map(|&k| {
                let mut x = basis[k].clone();
                chol.solve_in_place(&mut x);
                x
            })
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn path_laplacian_2d(nx: usize, ny: usize) -> SparseSym {
        let idx = |i: usize, j: usize| j * nx + i;
        let mut rows = vec![Vec::new(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let r = &mut rows[idx(i, j)];
                r.push((idx(i, j), 4.0));
                if i > 0 {
                    r.push((idx(i - 1, j), -1.0));
                }
                if i + 1 < nx {
                    r.push((idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    r.push((idx(i, j - 1), -1.0));
                }
                if j + 1 < ny {
                    r.push((idx(i, j + 1), -1.0));
                }
            }
        }
        SparseSym::from_rows(rows)
    }

    /// Closed form for the 5-point Laplacian on an nx × ny grid.
    fn exact(nx: usize, ny: usize, count: usize) -> Vec<f64> {
        let mut v = Vec::new();
        for p in 1..=nx {
            for q in 1..=ny {
                let a = (p as f64 * std::f64::consts::PI / (2.0 * (nx + 1) as f64)).sin();
                let b = (q as f64 * std::f64::consts::PI / (2.0 * (ny + 1) as f64)).sin();
                v.push(4.0 * (a * a + b * b));
            }
        }
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    #[test]
    fn cholesky_solves() {
        let a = path_laplacian_2d(7, 5);
        let l = EnvelopeCholesky::factor(&a).unwrap();
        let x: Vec<f64> = (0..35).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 35];
        a.mul(&x, &mut b);
        l.solve_in_place(&mut b);
        for (u, v) in x.iter().zip(&b) {
            assert_relative_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn krylov_matches_closed_form_with_multiplicity() {
        // square grid: many double eigenvalues
        let a = path_laplacian_2d(40, 40);
        let got = smallest_eigenvalues(&a, &EigenOptions::new(6, 1e-9)).unwrap();
        let want = exact(40, 40, 6);
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(g, w, max_relative = 1e-10);
        }
        assert_relative_eq!(got[1], got[2], max_relative = 1e-10);
    }

    #[test]
    fn dense_path_agrees() {
        let a = path_laplacian_2d(12, 9);
        let got = smallest_eigenvalues(&a, &EigenOptions::new(5, 1e-9)).unwrap();
        let want = exact(12, 9, 5);
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(g, w, max_relative = 1e-12);
        }
    }
}
