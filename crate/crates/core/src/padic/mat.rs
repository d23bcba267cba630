use super::{PElt, PPoly, RingCtx};
use crate::error::{Error, Result};
use crate::fp;

/// Dense row-major matrix over Z/p^W.
#[derive(Clone, Debug)]
pub struct PMat {
    rows: usize,
    cols: usize,
    entries: Vec<PElt>,
}

impl PMat {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<PElt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "matrix shape mismatch");
        PMat {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(ctx: &RingCtx, rows: usize, cols: usize) -> Self {
        PMat::from_entries(rows, cols, vec![ctx.zero(); rows * cols])
    }

    pub fn identity(ctx: &RingCtx, n: usize) -> Self {
        let mut m = PMat::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> PElt) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PMat::from_entries(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PElt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PElt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[PElt] {
        &self.entries
    }

    pub fn min_prec(&self, ctx: &RingCtx) -> u32 {
        self.entries
            .iter()
            .map(|e| e.prec())
            .min()
            .unwrap_or(ctx.w())
    }

    pub fn truncated(mut self, k: u32) -> Self {
        self.entries = self.entries.into_iter().map(|e| e.truncated(k)).collect();
        self
    }

    pub fn map(&self, f: impl Fn(&PElt) -> PElt) -> Self {
        PMat::from_entries(self.rows, self.cols, self.entries.iter().map(f).collect())
    }

    pub fn add(&self, ctx: &RingCtx, o: &PMat) -> PMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        PMat::from_entries(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| ctx.add(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, ctx: &RingCtx, s: &PElt) -> PMat {
        self.map(|a| ctx.mul(a, s))
    }

    /// Matrix product with per-entry precision tracking.
    pub fn mul(&self, ctx: &RingCtx, o: &PMat) -> PMat {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        PMat::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(ctx.zero(), |acc, k| {
                ctx.add(&acc, &ctx.mul(self.get(i, k), o.get(k, j)))
            })
        })
    }

    pub fn mul_vec(&self, ctx: &RingCtx, v: &[PElt]) -> Vec<PElt> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(ctx.zero(), |acc, k| {
                    ctx.add(&acc, &ctx.mul(self.get(i, k), &v[k]))
                })
            })
            .collect()
    }

    pub fn trace(&self, ctx: &RingCtx) -> PElt {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).fold(ctx.zero(), |acc, i| ctx.add(&acc, self.get(i, i)))
    }

    /// Entrywise equality modulo p^min(prec).
    pub fn eq(&self, ctx: &RingCtx, o: &PMat) -> bool {
        (self.rows, self.cols) == (o.rows, o.cols)
            && self.entries.iter().zip(&o.entries).all(|(a, b)| ctx.eq(a, b))
    }

    /// Entrywise equality modulo p^k.
    pub fn eq_mod(&self, ctx: &RingCtx, o: &PMat, k: u32) -> bool {
        (self.rows, self.cols) == (o.rows, o.cols)
            && self
                .entries
                .iter()
                .zip(&o.entries)
                .all(|(a, b)| ctx.eq_mod(a, b, k))
    }

    /// Minimum p-adic valuation over the trusted digits of all entries.
    pub fn valuation(&self, ctx: &RingCtx) -> u32 {
        self.entries
            .iter()
            .map(|e| ctx.valuation(e))
            .min()
            .unwrap_or(ctx.w())
    }

    /// Determinant of the reduction modulo p.
    pub fn det_mod_p(&self, ctx: &RingCtx) -> u64 {
        assert_eq!(self.rows, self.cols);
        let p = ctx.p();
        let n = self.rows;
        let mut a: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| ctx.residue_mod_p(self.get(i, j))).collect())
            .collect();
        let mut det = 1u64;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
                return 0;
            };
            if piv != col {
                a.swap(piv, col);
                det = fp::sub_mod(0, det, p);
            }
            det = fp::mul_mod(det, a[col][col], p);
            let inv = fp::inv_mod(a[col][col], p).unwrap();
            for r in col + 1..n {
                let f = fp::mul_mod(a[r][col], inv, p);
                if f == 0 {
                    continue;
                }
                for c in col..n {
                    let t = fp::mul_mod(f, a[col][c], p);
                    a[r][c] = fp::sub_mod(a[r][c], t, p);
                }
            }
        }
        det
    }
}

/// Monic characteristic polynomial det(tI - M), ascending coefficients.
///
/// Berkowitz's algorithm: division free, so it is valid over Z/p^W without
/// any pivoting on units.
pub fn mat_charpoly(ctx: &RingCtx, m: &PMat) -> PPoly {
    assert_eq!(m.rows(), m.cols(), "charpoly of a non-square matrix");
    let n = m.rows();
    // `q` holds the coefficients of the charpoly of the leading r x r block,
    // highest degree first.
    let mut q: Vec<PElt> = vec![ctx.one()];
    for r in 0..n {
        // Partition the leading (r+1)x(r+1) block as [[A, R], [C, a]] with
        // A the leading r x r block.
        let a = m.get(r, r).clone();
        let row: Vec<PElt> = (0..r).map(|j| m.get(r, j).clone()).collect();
        let col: Vec<PElt> = (0..r).map(|i| m.get(i, r).clone()).collect();
        let block = PMat::from_fn(r, r, |i, j| m.get(i, j).clone());
        // Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        let mut t = Vec::with_capacity(r + 2);
        t.push(ctx.one());
        t.push(ctx.neg(&a));
        let mut v = col;
        for _ in 0..r {
            let dot = row
                .iter()
                .zip(&v)
                .fold(ctx.zero(), |acc, (x, y)| ctx.add(&acc, &ctx.mul(x, y)));
            t.push(ctx.neg(&dot));
            v = block.mul_vec(ctx, &v);
        }
        // New coefficients: lower-triangular Toeplitz (r+2)x(r+1) times q.
        let next: Vec<PElt> = (0..r + 2)
            .map(|i| {
                (0..=r.min(i)).fold(ctx.zero(), |acc, k| {
                    if i - k < t.len() && k < q.len() {
                        ctx.add(&acc, &ctx.mul(&t[i - k], &q[k]))
                    } else {
                        acc
                    }
                })
            })
            .collect();
        q = next;
    }
    q.reverse();
    PPoly::new(q)
}

/// Interpolates a matrix-valued polynomial Q with Q(node_i) = value_i,
/// deg Q < number of nodes. Returns the coefficient matrices, ascending.
///
/// Newton divided differences; the node differences must be units.
pub fn vandermonde_solve(ctx: &RingCtx, nodes: &[PElt], values: &[PMat]) -> Result<Vec<PMat>> {
    assert_eq!(nodes.len(), values.len(), "one value per node");
    let n = nodes.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let (rows, cols) = (values[0].rows(), values[0].cols());
    // Inverses of all pairwise differences.
    let mut inv_diff = vec![vec![ctx.zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let d = ctx.sub(&nodes[i], &nodes[j]);
            let inv = ctx.inv(&d).map_err(|_| Error::SingularNodes)?;
            inv_diff[i][j] = inv;
        }
    }
    let coeffs_per_entry: Vec<Vec<PElt>> = (0..rows * cols)
        .map(|e| {
            let ys: Vec<PElt> = values.iter().map(|v| v.entries()[e].clone()).collect();
            interpolate_scalar(ctx, nodes, &ys, &inv_diff)
        })
        .collect();
    Ok((0..n)
        .map(|k| {
            PMat::from_entries(
                rows,
                cols,
                coeffs_per_entry.iter().map(|c| c[k].clone()).collect(),
            )
        })
        .collect())
}

fn interpolate_scalar(
    ctx: &RingCtx,
    nodes: &[PElt],
    ys: &[PElt],
    inv_diff: &[Vec<PElt>],
) -> Vec<PElt> {
    let n = nodes.len();
    // Divided differences in place.
    let mut dd: Vec<PElt> = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = ctx.sub(&dd[i], &dd[i - 1]);
            dd[i] = ctx.mul(&num, &inv_diff[i][i - level]);
        }
    }
    // Newton form to monomial basis, Horner style from the top.
    let mut coeffs: Vec<PElt> = vec![dd[n - 1].clone()];
    for i in (0..n - 1).rev() {
        // coeffs <- coeffs * (x - node_i) + dd[i]
        let mut next = vec![ctx.zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] = ctx.add(&next[k + 1], c);
            next[k] = ctx.sub(&next[k], &ctx.mul(c, &nodes[i]));
        }
        next[0] = ctx.add(&next[0], &dd[i]);
        coeffs = next;
    }
    coeffs.resize(n, ctx.zero());
    coeffs
}

/// Evaluates a matrix polynomial (ascending coefficients) at x.
pub fn eval_matrix_poly(ctx: &RingCtx, coeffs: &[PMat], x: &PElt) -> PMat {
    let mut it = coeffs.iter().rev();
    let Some(top) = it.next() else {
        panic!("empty matrix polynomial");
    };
    it.fold(top.clone(), |acc, c| acc.scale(ctx, x).add(ctx, c))
}
