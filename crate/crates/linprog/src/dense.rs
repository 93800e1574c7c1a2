//! Dense LU factorization with partial pivoting, used for the simplex basis.
//!
//! A transposed copy of the packed factors is kept so that both the forward
//! and the transposed solves walk memory sequentially.

use crate::scalar::Scalar;

pub struct DenseLu<S> {
    n: usize,
    /// Packed L (unit diagonal, below) and U (diagonal and above), row-major.
    lu: Vec<S>,
    /// The same factors transposed, for cache-friendly transposed solves.
    lut: Vec<S>,
    /// Row permutation: pivot row chosen at each elimination step.
    perm: Vec<usize>,
}

impl<S: Scalar> DenseLu<S> {
    /// Factorizes an n x n row-major matrix. Returns None if singular to
    /// working precision.
    pub fn factorize(mut a: Vec<S>, n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm = Vec::with_capacity(n);
        for k in 0..n {
            // partial pivot: largest magnitude in column k at/below row k
            let mut piv = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < S::from_f64_lossy(1e-12) {
                return None;
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
            }
            perm.push(piv);
            let pivot = a[k * n + k];
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pivot;
                a[r * n + k] = factor;
                if factor != S::zero() {
                    let (upper, lower) = a.split_at_mut(r * n);
                    let urow = &upper[k * n + k + 1..k * n + n];
                    let lrow = &mut lower[k + 1..n];
                    for (l, u) in lrow.iter_mut().zip(urow) {
                        *l -= factor * *u;
                    }
                }
            }
        }
        let mut lut = vec![S::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                lut[c * n + r] = a[r * n + c];
            }
        }
        Some(Self {
            n,
            lu: a,
            lut,
            perm,
        })
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [S]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.perm[k]);
        }
        // forward: L y = P b
        for r in 1..n {
            let row = &self.lu[r * n..r * n + r];
            let mut acc = b[r];
            for (lc, bc) in row.iter().zip(b.iter()) {
                acc -= *lc * *bc;
            }
            b[r] = acc;
        }
        // backward: U x = y
        for r in (0..n).rev() {
            let row = &self.lu[r * n + r + 1..(r + 1) * n];
            let mut acc = b[r];
            for (uc, bc) in row.iter().zip(b[r + 1..].iter()) {
                acc -= *uc * *bc;
            }
            b[r] = acc / self.lu[r * n + r];
        }
    }

    /// Solves A' x = b in place.
    pub fn solve_transposed(&self, b: &mut [S]) {
        let n = self.n;
        // U' y = b (forward, U' is lower-triangular; U'[r][c] = lut[r*n+c])
        for r in 0..n {
            let row = &self.lut[r * n..r * n + r];
            let mut acc = b[r];
            for (uc, bc) in row.iter().zip(b.iter()) {
                acc -= *uc * *bc;
            }
            b[r] = acc / self.lut[r * n + r];
        }
        // L' z = y (backward; unit diagonal)
        for r in (0..n).rev() {
            let row = &self.lut[r * n + r + 1..(r + 1) * n];
            let mut acc = b[r];
            for (lc, bc) in row.iter().zip(b[r + 1..].iter()) {
                acc -= *lc * *bc;
            }
            b[r] = acc;
        }
        for k in (0..n).rev() {
            b.swap(k, self.perm[k]);
        }
    }
}
