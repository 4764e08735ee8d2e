//! Small dense 2×2 algebra and a banded LU solver for the Newton systems.

use std::ops::{Add, Mul, Sub};

pub type Vec2 = [f64; 2];

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// `(M + Mᵀ)/2`; the quadratic form of `M` only sees this part.
    pub fn sym_part(&self) -> Self {
        let off = 0.5 * (self.0[0][1] + self.0[1][0]);
        Mat2([[self.0[0][0], off], [off, self.0[1][1]]])
    }

    /// Largest absolute difference between `M` and `Mᵀ`.
    pub fn asymmetry(&self) -> f64 {
        (self.0[0][1] - self.0[1][0]).abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, &x| a.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Eigenvalues `(λ_min, λ_max)` of the symmetric part.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let s = self.sym_part();
        let (a, b, d) = (s.0[0][0], s.0[0][1], s.0[1][1]);
        let mean = 0.5 * (a + d);
        let radius = (0.5 * (a - d)).hypot(b);
        // Avoid cancellation in the small eigenvalue when both have the same sign.
        if mean > 0.0 {
            let big = mean + radius;
            ((a * d - b * b) / big, big)
        } else if mean < 0.0 {
            let small = mean - radius;
            (small, (a * d - b * b) / small)
        } else {
            (-radius, radius)
        }
    }

    pub fn sym_min_eigenvalue(&self) -> f64 {
        self.sym_eigenvalues().0
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("singular banded system (zero pivot in column {column})")]
pub struct SingularMatrix {
    pub column: usize,
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, factored in
/// place by Gaussian elimination with partial pivoting. Storage reserves `kl`
/// extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`; panics if `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_block(&mut self, row: usize, col: usize, m: &Mat2) {
        for a in 0..2 {
            for b in 0..2 {
                self.add(row + a, col + b, m.0[a][b]);
            }
        }
    }

    /// Factor and solve `self · x = rhs` in place; `self` is consumed.
    pub fn solve(mut self, rhs: &mut [f64]) -> Result<(), SingularMatrix> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        assert_eq!(rhs.len(), n);
        let reach = kl + ku;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix { column: k });
            }
            piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        for k in 0..n {
            rhs.swap(k, piv[k]);
            let bk = rhs[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                rhs[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.data[self.idx(k, j)] * rhs[j];
            }
            rhs[k] = s / self.data[self.idx(k, k)];
        }
        Ok(())
    }
}
