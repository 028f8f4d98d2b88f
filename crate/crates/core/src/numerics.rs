//! Special functions, entropies and a small dense symmetric eigensolver.
//!
//! Every state and operator handled by this crate is real and symmetric in
//! the photon-number basis, so a cyclic Jacobi solver on matrices of a few
//! dozen rows is all the linear algebra the entropy path needs.

use std::fmt;

use crate::error::{Error, Result};

/// Eigenvalues below this (relative to the spectral scale) are clipped to zero.
pub const PSD_CLIP: f64 = 1e-12;
/// Eigenvalues below this (relative to the spectral scale) are rejected.
pub const PSD_REJECT: f64 = 1e-9;
/// Entropy terms `x log x` with `x` below this count as zero.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Threshold `tau` and the diagonal of the no-click/click operators.
///
/// `lambda(n)` is the probability that heterodyne detection of the Fock state
/// `|n>` returns an intensity above `tau`; `complement(n)` is `1 - lambda(n)`
/// evaluated without cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCoeffs {
    tau: f64,
    lambda: Vec<f64>,
    complement: Vec<f64>,
}

impl ThresholdCoeffs {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Largest photon number with a tabulated coefficient.
    pub fn nmax(&self) -> usize {
        self.lambda.len() - 1
    }

    /// `lambda_n`; panics if `n > nmax`.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// `1 - lambda_n`; panics if `n > nmax`.
    pub fn complement(&self, n: usize) -> f64 {
        self.complement[n]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// Fails unless coefficients up to photon number `j` are tabulated.
    pub fn require(&self, j: usize) -> Result<()> {
        if j > self.nmax() {
            Err(Error::InsufficientCoefficients {
                j,
                available: self.nmax(),
            })
        } else {
            Ok(())
        }
    }

    /// Same threshold, table extended (or truncated) to `nmax`.
    pub fn extended(&self, nmax: usize) -> ThresholdCoeffs {
        if nmax == self.nmax() {
            return self.clone();
        }
        lambda_coeffs(self.tau, nmax).expect("tau already validated")
    }

    /// Copy with `lambda_n` shifted by `delta` (complement kept consistent).
    /// Only used to check that the verification suites notice a corrupted table.
    pub fn perturbed(&self, n: usize, delta: f64) -> ThresholdCoeffs {
        let mut out = self.clone();
        out.lambda[n] += delta;
        out.complement[n] -= delta;
        out
    }
}

/// `lambda_n = Gamma(1+n, tau)/n!` for `n = 0..=nmax`.
///
/// For integer order the regularized upper incomplete gamma function is the
/// Poisson tail `e^{-tau} sum_{k<=n} tau^k/k!`, which is summed directly.
pub fn lambda_coeffs(tau: f64, nmax: usize) -> Result<ThresholdCoeffs> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            expected: "finite tau > 0",
        });
    }
    let weight = (-tau).exp();
    let mut lambda = Vec::with_capacity(nmax + 1);
    let mut term = weight;
    let mut acc = 0.0;
    for k in 0..=nmax {
        if k > 0 {
            term *= tau / k as f64;
        }
        acc += term;
        lambda.push(acc.min(1.0));
    }

    let complement = (0..=nmax)
        .map(|n| {
            if lambda[n] <= 0.5 {
                1.0 - lambda[n]
            } else {
                poisson_upper_tail(tau, n)
            }
        })
        .collect();

    Ok(ThresholdCoeffs {
        tau,
        lambda,
        complement,
    })
}

/// `e^{-tau} sum_{k>n} tau^k/k!`, summed until the terms stop mattering.
fn poisson_upper_tail(tau: f64, n: usize) -> f64 {
    let mut term = (-tau).exp();
    for k in 1..=n + 1 {
        term *= tau / k as f64;
    }
    let mut acc = 0.0;
    let mut k = n + 1;
    loop {
        acc += term;
        k += 1;
        term *= tau / k as f64;
        if k as f64 > tau && term <= acc * f64::EPSILON * 0.25 {
            break;
        }
    }
    acc
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            expected: "0 <= x <= 1",
        });
    }
    Ok(-xlog2x(x) - xlog2x(1.0 - x))
}

/// `x log2 x` with `0 log 0 = 0` and tiny arguments treated as zero.
pub fn xlog2x(x: f64) -> f64 {
    if x < ENTROPY_FLOOR {
        0.0
    } else {
        x * x.log2()
    }
}

/// `g(N) = (N+1) log2(N+1) - N log2 N`, the entropy of a thermal state.
pub fn gaussian_g(n: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return Err(Error::Domain {
            name: "N",
            value: n,
            expected: "N >= 0",
        });
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok((n + 1.0) * (n + 1.0).log2() - n * n.log2())
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `[self, rhs] = self rhs - rhs self`.
    pub fn commutator(&self, rhs: &Mat) -> Mat {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Mat) -> Mat {
        Mat::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Symmetric part `(M + M^T)/2`, for matrices that are symmetric up to rounding.
    pub fn symmetrize(&self) -> SymMatrix {
        assert_eq!(self.rows, self.cols);
        SymMatrix::from_fn(self.rows, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Real symmetric matrix storing only the lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle `i >= j` only.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.packed[Self::offset(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Sum of weighted outer products `sum_k w_k v_k v_k^T`.
    pub fn from_outer_products<'a>(
        dim: usize,
        terms: impl IntoIterator<Item = (f64, &'a [f64])>,
    ) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for (w, v) in terms {
            assert_eq!(v.len(), dim);
            for i in 0..dim {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    m.packed[Self::offset(i, j)] += w * v[i] * v[j];
                }
            }
        }
        m
    }

    fn offset(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[Self::offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.packed[Self::offset(i, j)] = value;
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let x = self.get(i, j);
                acc += if i == j { x * x } else { 2.0 * x * x };
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            packed: self.packed.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim);
        SymMatrix {
            dim: self.dim,
            packed: self
                .packed
                .iter()
                .zip(&rhs.packed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, rhs: &SymMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.packed
            .iter()
            .zip(&rhs.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `Tr(self * rhs)`.
    pub fn trace_product(&self, rhs: &SymMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let x = self.get(i, j) * rhs.get(i, j);
                acc += if i == j { x } else { 2.0 * x };
            }
        }
        acc
    }

    /// `D self D` for a diagonal `D`.
    pub fn congruence_diag(&self, d: &[f64]) -> SymMatrix {
        assert_eq!(d.len(), self.dim);
        SymMatrix::from_fn(self.dim, |i, j| d[i] * self.get(i, j) * d[j])
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[SymMatrix]) -> SymMatrix {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = SymMatrix::zeros(dim);
        let mut base = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..=i {
                    out.set(base + i, base + j, b.get(i, j));
                }
            }
            base += b.dim;
        }
        out
    }

    pub fn to_dense(&self) -> Mat {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:>10.6}", self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn sym_eigvals(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.to_dense();
    let scale = m.frobenius_sq();
    if n == 0 {
        return Vec::new();
    }
    let tol = (f64::EPSILON * f64::EPSILON) * scale;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= tol || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// Von Neumann entropy in bits of a (possibly unnormalized) PSD matrix.
pub fn vn_entropy(m: &SymMatrix) -> Result<f64> {
    let eig = sym_eigvals(m);
    entropy_of_spectrum(&eig)
}

/// `-sum mu log2 mu` after the PSD check and clipping.
pub fn entropy_of_spectrum(eig: &[f64]) -> Result<f64> {
    let scale = eig.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mut s = 0.0;
    for &mu in eig {
        if mu < -PSD_REJECT * scale {
            return Err(Error::NotPsd { eigenvalue: mu });
        }
        if mu < -PSD_CLIP * scale {
            log::warn!("clipping eigenvalue {mu:e} to zero");
        }
        s -= xlog2x(mu.max(0.0));
    }
    Ok(s)
}
