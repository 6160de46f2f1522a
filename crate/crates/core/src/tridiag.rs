//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection for single
//! eigenvalues, and inverse iteration with tail refinement for eigenvectors.

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// Sub/super-diagonal, length `n − 1`.
    pub off: Vec<f64>,
}

const PIVOT_GUARD: f64 = 1e-300;

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `sigma` (LDLᵀ inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - sigma - coupling;
            if q == 0.0 {
                q = -PIVOT_GUARD;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (1-based) by bisection to `tol` absolute.
    pub fn eigenvalue(&self, j: usize, tol: f64) -> Result<f64> {
        let n = self.len();
        if j == 0 || j > n {
            return Err(Error::Argument(format!("eigenvalue index {j} outside 1..={n}")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        lo -= pad;
        hi += pad;
        // invariant: count_below(lo) < j <= count_below(hi)
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Solve `(T − σI) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let d = guard(self.diag[0] - sigma, self.scale());
            return vec![rhs[0] / d];
        }
        let scale = self.scale();
        // rows stored as (main, upper1, upper2) after elimination
        let mut a: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        let mut b: Vec<f64> = self.off.clone(); // super-diagonal
        let mut c: Vec<f64> = vec![0.0; n]; // second super-diagonal fill
        let sub: Vec<f64> = self.off.clone();
        let mut r = rhs.to_vec();
        for i in 0..n - 1 {
            let l = sub[i];
            if a[i].abs() >= l.abs() {
                let p = guard(a[i], scale);
                a[i] = p;
                let m = l / p;
                a[i + 1] -= m * b[i];
                if i + 1 < n - 1 {
                    // row i+1 super-diagonal unchanged, c[i] stays 0
                }
                r[i + 1] -= m * r[i];
            } else {
                // swap rows i and i+1
                let m = a[i] / l;
                let (ai1, bi1) = (a[i + 1], if i + 1 < n - 1 { b[i + 1] } else { 0.0 });
                a[i] = l;
                let old_b = b[i];
                b[i] = ai1;
                c[i] = bi1;
                a[i + 1] = old_b - m * ai1;
                if i + 1 < n - 1 {
                    b[i + 1] = -m * bi1;
                }
                r.swap(i, i + 1);
                r[i + 1] -= m * r[i];
            }
        }
        a[n - 1] = guard(a[n - 1], scale);
        let mut x = vec![0.0; n];
        x[n - 1] = r[n - 1] / a[n - 1];
        x[n - 2] = (r[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (r[i] - b[i] * x[i + 1] - c[i] * x[i + 2]) / a[i];
        }
        x
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Unit eigenvector for the eigenvalue `e` (already converged): inverse
    /// iteration, then the exponentially small tails are rebuilt from the
    /// three-term recurrence so they keep full relative accuracy.
    pub fn eigenvector(&self, e: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let mut v = start_vector(n);
        let scale = self.scale();
        let mut residual = f64::INFINITY;
        for step in 0..6 {
            let w = self.shifted_solve(e, &v);
            let norm = norm2(&w);
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Numerical(format!(
                    "inverse iteration broke down at shift {e} (step {step})"
                )));
            }
            v = w.iter().map(|x| x / norm).collect();
            let tv = self.apply(&v);
            residual = tv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
            if step >= 1 && residual <= 1e-9 * scale.max(1.0) {
                break;
            }
        }
        if residual > 1e-6 * scale.max(1.0) {
            return Err(Error::Numerical(format!(
                "inverse iteration stagnated at shift {e}: residual {residual:.3e}"
            )));
        }
        self.refine_tails(e, &mut v);
        let norm = norm2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(&mut v);
        Ok(v)
    }

    /// Recompute entries in the decaying ends from the ratio recurrence
    /// `vᵢ = rᵢ vᵢ₊₁`, started at the boundary where it is stable.
    fn refine_tails(&self, e: f64, v: &mut [f64]) {
        let n = v.len();
        if n < 3 {
            return;
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let forbidden = |i: usize| {
            let coupling = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            self.diag[i] - coupling > e
        };

        // left end
        let mut stop = 0;
        while stop < n && forbidden(stop) && v[stop].abs() < 1e-6 * vmax {
            stop += 1;
        }
        if stop > 0 && stop < n {
            let mut ratios = vec![0.0; stop];
            let mut prev = 0.0;
            for i in 0..stop {
                let left = if i > 0 { self.off[i - 1] * prev } else { 0.0 };
                let denom = self.diag[i] - e + left;
                prev = if denom != 0.0 { -self.off[i] / denom } else { 0.0 };
                ratios[i] = prev;
            }
            for i in (0..stop).rev() {
                v[i] = ratios[i] * v[i + 1];
            }
        }

        // right end
        let mut start = n;
        while start > 0 && forbidden(start - 1) && v[start - 1].abs() < 1e-6 * vmax {
            start -= 1;
        }
        if start < n && start > 0 {
            let mut ratios = vec![0.0; n - start];
            let mut prev = 0.0;
            for i in (start..n).rev() {
                let right = if i + 1 < n { self.off[i] * prev } else { 0.0 };
                let denom = self.diag[i] - e + right;
                prev = if denom != 0.0 { -self.off[i - 1] / denom } else { 0.0 };
                ratios[i - start] = prev;
            }
            for i in start..n {
                v[i] = ratios[i - start] * v[i - 1];
            }
        }
    }
}

fn guard(p: f64, scale: f64) -> f64 {
    let floor = f64::EPSILON * scale;
    if p.abs() < floor {
        if p < 0.0 {
            -floor
        } else {
            floor
        }
    } else {
        p
    }
}

/// Deterministic, well-spread start vector.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Make the entry of largest magnitude positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        let n = 50;
        let t = laplacian(n);
        for j in 1..=n {
            let exact = 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            let e = t.eigenvalue(j, 1e-13).unwrap();
            assert!((e - exact).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn eigenvector_residual_and_sign() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + ((i as f64 - 100.0) * 0.05).powi(2)).collect();
        let t = SymTridiag::new(diag, vec![-1.0; n - 1]);
        for j in 1..=3 {
            let e = t.eigenvalue(j, 1e-13).unwrap();
            let v = t.eigenvector(e).unwrap();
            assert!((norm2(&v) - 1.0).abs() < 1e-12);
            let tv = t.apply(&v);
            let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-9);
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn tails_keep_relative_accuracy() {
        // strongly confining well: exact tail ratios from the recurrence
        let n = 400;
        let h = 0.05;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let x = -10.0 + (i as f64 + 1.0) * h;
                2.0 / (h * h) + x * x
            })
            .collect();
        let t = SymTridiag::new(diag, vec![-1.0 / (h * h); n - 1]);
        let e = t.eigenvalue(1, 1e-12).unwrap();
        let v = t.eigenvector(e).unwrap();
        // the continuum tail ~ e^{-x²/2}: at x = ±9.95 ~ 1e-22, far below rounding of the bulk
        assert!(v[0] > 0.0 && v[0] < 1e-15, "v[0] = {}", v[0]);
        assert!(v[n - 1] > 0.0 && v[n - 1] < 1e-15);
        // every entry satisfies its row of (T − e)v = 0 relative to its own size
        for i in 1..n - 1 {
            let row = t.off[i - 1] * v[i - 1] + (t.diag[i] - e) * v[i] + t.off[i] * v[i + 1];
            let size = (t.off[i - 1] * v[i - 1]).abs() + (t.diag[i] * v[i]).abs();
            assert!(row.abs() <= 1e-8 * size.max(1e-300) + 1e-12, "row {i}");
        }
    }

    proptest! {
        #[test]
        fn count_is_monotone(diag in prop::collection::vec(-5.0f64..5.0, 2..40), s1 in -8.0f64..8.0, s2 in -8.0f64..8.0) {
            let n = diag.len();
            let t = SymTridiag::new(diag, vec![0.7; n - 1]);
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(t.count_below(lo) <= t.count_below(hi));
            prop_assert!(t.count_below(hi) <= n);
        }
    }
}
