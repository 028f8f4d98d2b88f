//! Rotation-invariant states of one photon on Alice's side and `j` photons
//! on Bob's side, together with their yield and error parameter.
//!
//! The 1:j sector splits into two irreducible subspaces of dimensions `j+2`
//! and `j`. Every invariant state is `(1-f)/(j+2) P_big + f/j P_small`, so a
//! single number `f` (the weight of the small subspace) labels it.

use crate::error::{check_unit, Error, Result};
use crate::fock::{op_m, op_r, Click, Pol, SectorBasis};
use crate::numerics::{SymMatrix, ThresholdCoeffs};

/// Invariant state of the 1:j sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub j: usize,
    /// Weight of the small subspace; always 0 for the vacuum sector.
    pub f: f64,
    pub rho: SymMatrix,
}

impl SectorState {
    pub fn basis(&self) -> SectorBasis {
        SectorBasis::new(self.j)
    }

    /// Reduced state of Bob's field, dimension `j+1`.
    pub fn bob_marginal(&self) -> SymMatrix {
        bob_marginal(&self.rho, self.j)
    }

    /// Reduced state of Alice's photon, dimension 2.
    pub fn alice_marginal(&self) -> SymMatrix {
        let n = self.j + 1;
        SymMatrix::from_fn(2, |a, b| {
            (0..n).map(|k| self.rho.get(a * n + k, b * n + k)).sum()
        })
    }
}

/// Partial trace over Alice of a 1:j sector matrix.
pub fn bob_marginal(rho: &SymMatrix, j: usize) -> SymMatrix {
    let n = j + 1;
    assert_eq!(rho.dim(), 2 * n);
    SymMatrix::from_fn(n, |b, c| rho.get(b, c) + rho.get(n + b, n + c))
}

/// Orthonormal bases `(big, small)` of the two invariant subspaces of the 1:j
/// sector, as coordinate vectors in the joint sector basis.
///
/// The big subspace has `j+2` vectors, the small one `j`.
pub fn cg_basis(j: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if j == 0 {
        return Err(Error::Domain {
            name: "j",
            value: 0.0,
            expected: "j >= 1; the vacuum sector has a single invariant state",
        });
    }
    let basis = SectorBasis::new(j);
    let dim = 2 * (j + 1);
    let norm = (j + 1) as f64;

    // vector k pairs |V;(j-k, k)> with |H;(j-k+1, k-1)>
    let mut big = Vec::with_capacity(j + 2);
    for k in 0..=j + 1 {
        let mut v = vec![0.0; dim];
        if k <= j {
            v[basis.joint_index(Pol::V, j - k)] = ((j + 1 - k) as f64 / norm).sqrt();
        }
        if k >= 1 {
            v[basis.joint_index(Pol::H, j + 1 - k)] = -(k as f64 / norm).sqrt();
        }
        big.push(v);
    }

    let mut small = Vec::with_capacity(j);
    for k in 1..=j {
        let mut v = vec![0.0; dim];
        v[basis.joint_index(Pol::V, j - k)] = (k as f64 / norm).sqrt();
        v[basis.joint_index(Pol::H, j + 1 - k)] = ((j + 1 - k) as f64 / norm).sqrt();
        small.push(v);
    }
    Ok((big, small))
}

/// Orthogonal projector onto the span of `vectors`.
pub fn projector(dim: usize, vectors: &[Vec<f64>]) -> SymMatrix {
    SymMatrix::from_outer_products(dim, vectors.iter().map(|v| (1.0, v.as_slice())))
}

/// Vacuum-sector state `(|H><H| + |V><V|)/2 ⊗ |0><0|`.
pub fn vacuum_state() -> SectorState {
    SectorState {
        j: 0,
        f: 0.0,
        rho: SymMatrix::identity(2).scaled(0.5),
    }
}

/// The invariant state of the 1:j sector with small-subspace weight `f`.
pub fn invariant_state(j: usize, f: f64) -> Result<SectorState> {
    check_unit("f", f)?;
    if j == 0 {
        return Ok(vacuum_state());
    }
    let (big, small) = cg_basis(j)?;
    let dim = 2 * (j + 1);
    let wb = (1.0 - f) / (j + 2) as f64;
    let ws = f / j as f64;
    let terms = big
        .iter()
        .map(|v| (wb, v.as_slice()))
        .chain(small.iter().map(|v| (ws, v.as_slice())));
    Ok(SectorState {
        j,
        f,
        rho: SymMatrix::from_outer_products(dim, terms),
    })
}

/// Recovers `f` from a (normalized) sector state as `Tr(P_small rho)`.
pub fn mixing_parameter(rho: &SymMatrix, j: usize) -> Result<f64> {
    if j == 0 {
        return Ok(0.0);
    }
    let (_, small) = cg_basis(j)?;
    Ok(projector(2 * (j + 1), &small).trace_product(rho))
}

/// Yield `Y_j`: probability of a conclusive outcome given `j` photons at Bob.
///
/// Depends only on the maximally mixed Bob marginal, hence not on `f`.
pub fn sector_yield(coeffs: &ThresholdCoeffs, j: usize) -> Result<f64> {
    coeffs.require(j)?;
    let s: f64 = (0..=j)
        .map(|a| {
            let (la, lb) = (coeffs.lambda(a), coeffs.lambda(j - a));
            la + lb - 2.0 * la * lb
        })
        .sum();
    Ok(s / (j + 1) as f64)
}

/// `Y_j` as `Tr[(M_H + M_V) P_j] / (j+1)` from the sector operators.
pub fn sector_yield_numeric(coeffs: &ThresholdCoeffs, j: usize) -> Result<f64> {
    let m = op_m(coeffs, j, Pol::H)?.add(&op_m(coeffs, j, Pol::V)?);
    Ok(m.diag.iter().sum::<f64>() / (j + 1) as f64)
}

/// Error parameter `c_j(f)` of the invariant state.
///
/// Closed forms for `j <= 3`; larger sectors go through [`sector_c_numeric`].
pub fn sector_c(coeffs: &ThresholdCoeffs, j: usize, f: f64) -> Result<f64> {
    check_unit("f", f)?;
    coeffs.require(j)?;
    let l = |n: usize| coeffs.lambda(n);
    let r = |n: usize| coeffs.complement(n);
    let c = match j {
        0 => l(0) * r(0) / 2.0,
        1 => {
            let a = (2.0 * f + 1.0) / 6.0;
            let c = (1.0 - f) / 3.0;
            a * r(1) * l(0) + c * r(0) * l(1)
        }
        2 => {
            let a = (3.0 * f + 1.0) / 12.0;
            let c = 1.0 / 6.0;
            let d = (1.0 - f) / 4.0;
            a * l(0) * r(2) + c * r(1) * l(1) + d * r(0) * l(2)
        }
        3 => {
            let a = (12.0 * f + 3.0) / 60.0;
            let c = (4.0 * f + 6.0) / 60.0;
            let e = (9.0 - 4.0 * f) / 60.0;
            let ff = 12.0 * (1.0 - f) / 60.0;
            a * l(0) * r(3) + c * l(1) * r(2) + e * r(1) * l(2) + ff * r(0) * l(3)
        }
        _ => return sector_c_numeric(coeffs, &invariant_state(j, f)?),
    };
    Ok(c)
}

/// `c = Tr[(|H><H| ⊗ R0^H ⊗ R1^V) rho]` evaluated on the matrix.
pub fn sector_c_numeric(coeffs: &ThresholdCoeffs, state: &SectorState) -> Result<f64> {
    let r0 = op_r(coeffs, state.j, Click::R0, Pol::H)?;
    let r1 = op_r(coeffs, state.j, Click::R1, Pol::V)?;
    // Alice's H block occupies the first j+1 rows
    Ok((0..=state.j)
        .map(|b| state.rho.get(b, b) * r0.diag[b] * r1.diag[b])
        .sum())
}

/// Per-sector constants: `Y_j` and `c_j(f) = c_const + c_slope f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSummary {
    pub j: usize,
    pub yield_: f64,
    pub c_const: f64,
    pub c_slope: f64,
}

impl SectorSummary {
    pub fn c(&self, f: f64) -> f64 {
        self.c_const + self.c_slope * f
    }

    /// `(min, max)` of `c_j` over `f in [0, 1]`.
    pub fn c_range(&self) -> (f64, f64) {
        let (a, b) = (self.c(0.0), self.c(1.0));
        (a.min(b), a.max(b))
    }
}

pub fn sector_summary(coeffs: &ThresholdCoeffs, j: usize) -> Result<SectorSummary> {
    let c0 = sector_c(coeffs, j, 0.0)?;
    let c1 = sector_c(coeffs, j, 1.0)?;
    Ok(SectorSummary {
        j,
        yield_: sector_yield(coeffs, j)?,
        c_const: c0,
        c_slope: if j == 0 { 0.0 } else { c1 - c0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{schwinger_total, Generator};
    use crate::numerics::lambda_coeffs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cg_j1_matches_bell_structure() {
        let (big, small) = cg_basis(1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        // basis: H;(1,0)  H;(0,1)  V;(1,0)  V;(0,1)
        assert_eq!(big[0], vec![0.0, 0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(big[1][3], h, epsilon = 1e-15);
        assert_abs_diff_eq!(big[1][0], -h, epsilon = 1e-15);
        assert_eq!(big[2], vec![0.0, -1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(small[0][0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(small[0][3], h, epsilon = 1e-15);
        assert!(cg_basis(0).is_err());
    }

    #[test]
    fn cg_j2_first_vectors() {
        let (big, small) = cg_basis(2).unwrap();
        let b = SectorBasis::new(2);
        assert_eq!(big[0][b.joint_index(Pol::V, 2)], 1.0);
        assert_abs_diff_eq!(
            small[0][b.joint_index(Pol::V, 1)],
            (1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            small[0][b.joint_index(Pol::H, 2)],
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn cg_orthonormal() {
        for j in 1..=8 {
            let (big, small) = cg_basis(j).unwrap();
            let all: Vec<_> = big.iter().chain(&small).collect();
            assert_eq!(all.len(), 2 * (j + 1));
            for (p, u) in all.iter().enumerate() {
                for (q, v) in all.iter().enumerate() {
                    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(dot, want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn state_properties() {
        for j in 0..=8 {
            for &f in &[0.0, 0.3, 1.0] {
                let s = invariant_state(j, f).unwrap();
                assert_abs_diff_eq!(s.rho.trace(), 1.0, epsilon = 1e-12);
                let half = SymMatrix::identity(2).scaled(0.5);
                assert!(s.alice_marginal().max_abs_diff(&half) < 1e-12);
                let flat = SymMatrix::identity(j + 1).scaled(1.0 / (j + 1) as f64);
                assert!(s.bob_marginal().max_abs_diff(&flat) < 1e-12);
                let dense = s.rho.to_dense();
                for g in [Generator::ZTot, Generator::PlusTot] {
                    let comm = schwinger_total(j, g).commutator(&dense);
                    assert!(comm.frobenius() < 1e-12, "j={j} f={f}");
                }
                if j > 0 {
                    assert_abs_diff_eq!(mixing_parameter(&s.rho, j).unwrap(), f, epsilon = 1e-12);
                }
            }
        }
        assert!(invariant_state(2, 1.5).is_err());
    }

    #[test]
    fn bell_projector_at_f_one() {
        let s = invariant_state(1, 1.0).unwrap();
        let want = SymMatrix::from_fn(4, |i, j| {
            if (i == 0 || i == 3) && (j == 0 || j == 3) {
                0.5
            } else {
                0.0
            }
        });
        assert!(s.rho.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn yield_and_c_examples() {
        let c = lambda_coeffs(1.0, 8).unwrap();
        assert_abs_diff_eq!(sector_yield(&c, 0).unwrap(), 0.465088, epsilon = 1e-6);
        assert_abs_diff_eq!(sector_yield(&c, 1).unwrap(), 0.5622972, epsilon = 1e-6);
        assert_abs_diff_eq!(sector_yield(&c, 2).unwrap(), 0.5368796, epsilon = 1e-6);
        assert_abs_diff_eq!(sector_c(&c, 0, 0.0).unwrap(), 0.116272, epsilon = 1e-6);
        assert_abs_diff_eq!(sector_c(&c, 1, 1.0).unwrap(), 0.0486044, epsilon = 1e-6);
        assert_abs_diff_eq!(sector_c(&c, 1, 0.0).unwrap(), 0.1712309, epsilon = 1e-6);
        for j in 0..=8 {
            assert_abs_diff_eq!(
                sector_yield(&c, j).unwrap(),
                sector_yield_numeric(&c, j).unwrap(),
                epsilon = 1e-12
            );
            for &f in &[0.0, 0.2, 0.7, 1.0] {
                let s = invariant_state(j, f).unwrap();
                assert_abs_diff_eq!(
                    sector_c(&c, j, f).unwrap(),
                    sector_c_numeric(&c, &s).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn c_range_bounds() {
        for &tau in &[0.5, 1.0, 2.0] {
            let c = lambda_coeffs(tau, 6).unwrap();
            for j in 1..=6 {
                let s = sector_summary(&c, j).unwrap();
                assert!(s.c_slope < 0.0);
                let (lo, hi) = s.c_range();
                let l = c.lambdas();
                assert!(lo >= (1.0 - l[j]) * l[0] / 2.0 - 1e-15);
                assert!(hi <= (1.0 - l[0]) * l[j] / 2.0 + 1e-15);
            }
            let s1 = sector_summary(&c, 1).unwrap();
            assert_abs_diff_eq!(
                s1.c(1.0),
                (1.0 - c.lambda(1)) * c.lambda(0) / 2.0,
                epsilon = 1e-15
            );
        }
    }
}
