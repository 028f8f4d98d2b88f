//! Key map, pinching, and the relative entropy that lower-bounds the
//! extractable key per sector.
//!
//! The key map isometrically attaches a register `B1` recording Bob's
//! conclusive outcome: `K = |H>_B1 ⊗ sqrt(M_H) + |V>_B1 ⊗ sqrt(M_V)`. The
//! relative entropy is `S[Z(G(rho))] - S[G(rho)]` on the unnormalized output,
//! where `Z` dephases `B1`.

use crate::error::{Error, Result};
use crate::fock::{op_m, Pol};
use crate::invariant::{sector_c_numeric, SectorState};
use crate::numerics::{vn_entropy, xlog2x, SymMatrix, ThresholdCoeffs};

/// Unnormalized key-map output on `A ⊗ B ⊗ B1` for one sector.
///
/// Row `A * 2(j+1) + 2 b + s` holds Alice's polarization `A`, Bob's basis
/// state `b` and register value `s` (0 for H, 1 for V).
#[derive(Debug, Clone, PartialEq)]
pub struct KeyMapOutput {
    pub j: usize,
    pub g_rho: SymMatrix,
    /// Probability of a conclusive outcome in this sector.
    pub trace_q: f64,
}

impl KeyMapOutput {
    fn register(i: usize) -> usize {
        i % 2
    }
}

pub fn gmap(state: &SectorState, coeffs: &ThresholdCoeffs) -> Result<KeyMapOutput> {
    let j = state.j;
    let kh = op_m(coeffs, j, Pol::H)?.sqrt();
    let kv = op_m(coeffs, j, Pol::V)?.sqrt();
    let n = j + 1;
    let split = |i: usize| {
        let (alice, rest) = (i / (2 * n), i % (2 * n));
        let (b, s) = (rest / 2, rest % 2);
        let k = if s == 0 { kh.diag[b] } else { kv.diag[b] };
        (alice * n + b, k)
    };
    let g = SymMatrix::from_fn(4 * n, |r, c| {
        let (ri, kr) = split(r);
        let (ci, kc) = split(c);
        kr * state.rho.get(ri, ci) * kc
    });
    let trace_q = g.trace();
    Ok(KeyMapOutput {
        j,
        g_rho: g,
        trace_q,
    })
}

/// Dephases the outcome register.
pub fn zmap(out: &KeyMapOutput) -> SymMatrix {
    pinch(&out.g_rho)
}

/// Zeroes every entry coupling different register values.
pub fn pinch(m: &SymMatrix) -> SymMatrix {
    SymMatrix::from_fn(m.dim(), |r, c| {
        if KeyMapOutput::register(r) == KeyMapOutput::register(c) {
            m.get(r, c)
        } else {
            0.0
        }
    })
}

/// `S[Z(G)] - S[G]` for an already-mapped (unnormalized) matrix.
pub fn pinching_gap(g: &SymMatrix) -> Result<f64> {
    Ok(vn_entropy(&pinch(g))? - vn_entropy(g)?)
}

/// Relative entropy of one sector from the eigenvalues of the mapped state.
pub fn rel_entropy_numeric(state: &SectorState, coeffs: &ThresholdCoeffs) -> Result<f64> {
    pinching_gap(&gmap(state, coeffs)?.g_rho)
}

/// Relative entropy of `sum_j P_j rho_j`, assembled as one block-diagonal
/// matrix (sectors have orthogonal support).
pub fn rel_entropy_mixture(parts: &[(f64, SectorState)], coeffs: &ThresholdCoeffs) -> Result<f64> {
    let blocks = parts
        .iter()
        .map(|(p, s)| Ok(gmap(s, coeffs)?.g_rho.scaled(*p)))
        .collect::<Result<Vec<_>>>()?;
    // block boundaries are at even offsets, so the register parity survives
    pinching_gap(&SymMatrix::direct_sum(&blocks))
}

/// `(Q_sector, c_sector)` of a state, from matrix traces.
pub fn gain_and_c_numeric(state: &SectorState, coeffs: &ThresholdCoeffs) -> Result<(f64, f64)> {
    let q = gmap(state, coeffs)?.trace_q;
    Ok((q, sector_c_numeric(coeffs, state)?))
}

/// Closed-form relative entropy for the sectors `j <= 3`.
pub fn rel_entropy_closed(j: usize, f: f64, coeffs: &ThresholdCoeffs) -> Result<f64> {
    crate::error::check_unit("f", f)?;
    if j > 3 {
        return Err(Error::UnsupportedSector { j });
    }
    coeffs.require(j)?;
    let l = |n: usize| coeffs.lambda(n);
    let r = |n: usize| coeffs.complement(n);
    let xl = xlog2x;
    // lambda_a + lambda_b - 2 lambda_a lambda_b, written without cancellation
    let y = |a: usize, b: usize| l(a) * r(b) + l(b) * r(a);
    // (x + z) ± sqrt((x - z)^2 + w)
    let pm = |x: f64, z: f64, w: f64| {
        let s = ((x - z).powi(2) + w).max(0.0).sqrt();
        (x + z + s, x + z - s)
    };

    let d = match j {
        0 => 2.0 * l(0) * r(0),
        1 => {
            let a = (2.0 * f + 1.0) / 6.0;
            let b = (4.0 * f - 1.0) / 6.0;
            let c = (1.0 - f) / 3.0;
            let y01 = y(0, 1);
            let s =
                (a * a * (l(0) - l(1)).powi(2) + 4.0 * b * b * l(0) * l(1) * r(0) * r(1)).sqrt();
            let (fp, fm) = (a * y01 + s, a * y01 - s);
            -xl(fp) - xl(fm) - 2.0 * c * xl(l(0) * r(1)) - 2.0 * c * xl(l(1) * r(0))
                + y01 * xl(a - b)
                + y01 * xl(a + b)
                + 2.0 * a * y01
                + 2.0 * (a + c) * xl(y01)
        }
        2 => {
            let a = (3.0 * f + 1.0) / 12.0;
            let b = 2f64.sqrt() * (3.0 * f - 1.0) / 12.0;
            let c = 1.0 / 6.0;
            let dd = (1.0 - f) / 4.0;
            let y02 = y(0, 2);
            let m1 = l(1) * r(1);
            let (gp, gm) = pm(a * y02, 2.0 * c * m1, 8.0 * b * b * m1 * y02);
            let (hp, hm) = pm(a * r(0) * l(2), c * m1, 4.0 * b * b * r(0) * m1 * l(2));
            let (ip, im) = pm(a * r(2) * l(0), c * m1, 4.0 * b * b * r(2) * m1 * l(0));
            2.0 * dd * (xl(y02) - xl(l(0) * r(2)) - xl(l(2) * r(0))) + xl(gp) + xl(gm)
                - xl(hp)
                - xl(hm)
                - xl(ip)
                - xl(im)
        }
        _ => {
            let a = (12.0 * f + 3.0) / 60.0;
            let b = 3f64.sqrt() * (8.0 * f - 3.0) / 60.0;
            let c = (4.0 * f + 6.0) / 60.0;
            let dd = (16.0 * f - 6.0) / 60.0;
            let e = (9.0 - 4.0 * f) / 60.0;
            let ff = 12.0 * (1.0 - f) / 60.0;
            let y12 = y(1, 2);
            let y03 = y(0, 3);
            let t1 = y12 * (xl(c - dd) + xl(c + dd)) + 2.0 * c * (y12 + xl(y12));
            let t2 = 2.0 * ff * (xl(y03) - xl(l(0) * r(3)) - xl(l(3) * r(0)));
            let (pp, pm_) = pm(a * y03, e * y12, 4.0 * b * b * y03 * y12);
            let sq =
                (c * c * (l(1) - l(2)).powi(2) + 4.0 * dd * dd * l(1) * l(2) * r(1) * r(2)).sqrt();
            let (qp, qm) = (c * y12 + sq, c * y12 - sq);
            let (rp, rm) = pm(
                a * l(0) * r(3),
                e * l(1) * r(2),
                4.0 * b * b * l(0) * l(1) * r(2) * r(3),
            );
            let (sp, sm) = pm(
                a * r(0) * l(3),
                e * r(1) * l(2),
                4.0 * b * b * r(0) * r(1) * l(2) * l(3),
            );
            t1 + t2 + xl(pp) + xl(pm_) - xl(qp) - xl(qm) - xl(rp) - xl(rm) - xl(sp) - xl(sm)
        }
    };
    Ok(d)
}

/// Relative entropy of the invariant state `(j, f)`: closed form when one
/// exists, eigenvalues otherwise.
pub fn rel_entropy(j: usize, f: f64, coeffs: &ThresholdCoeffs) -> Result<f64> {
    if j <= 3 {
        rel_entropy_closed(j, f, coeffs)
    } else {
        rel_entropy_numeric(&crate::invariant::invariant_state(j, f)?, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::{invariant_state, sector_c, sector_yield, vacuum_state};
    use crate::numerics::lambda_coeffs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_values() {
        let c = lambda_coeffs(1.0, 3).unwrap();
        let out = gmap(&vacuum_state(), &c).unwrap();
        assert_abs_diff_eq!(out.trace_q, 0.465088, epsilon = 1e-6);
        let d = rel_entropy_numeric(&vacuum_state(), &c).unwrap();
        assert_abs_diff_eq!(d, 0.465088, epsilon = 1e-6);
        let (q, cc) = gain_and_c_numeric(&vacuum_state(), &c).unwrap();
        assert_abs_diff_eq!(q, 0.465088, epsilon = 1e-6);
        assert_abs_diff_eq!(cc, 0.116272, epsilon = 1e-6);
        assert_abs_diff_eq!(2.0 * cc / q, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn closed_matches_numeric() {
        for &tau in &[0.5, 0.8, 1.0, 1.5, 2.0] {
            let c = lambda_coeffs(tau, 3).unwrap();
            for j in 0..=3 {
                for &f in &[0.0, 0.25, 0.5, 0.75, 1.0, 0.375] {
                    let s = invariant_state(j, f).unwrap();
                    let num = rel_entropy_numeric(&s, &c).unwrap();
                    let cl = rel_entropy_closed(j, f, &c).unwrap();
                    assert!(
                        (num - cl).abs() < 1e-9,
                        "tau={tau} j={j} f={f}: {num} vs {cl}"
                    );
                }
            }
        }
    }

    #[test]
    fn trace_is_yield() {
        let c = lambda_coeffs(1.3, 6).unwrap();
        for j in 0..=6 {
            for &f in &[0.0, 0.6, 1.0] {
                let s = invariant_state(j, f).unwrap();
                let out = gmap(&s, &c).unwrap();
                assert_abs_diff_eq!(out.trace_q, sector_yield(&c, j).unwrap(), epsilon = 1e-12);
                assert_abs_diff_eq!(zmap(&out).trace(), out.trace_q, epsilon = 1e-14);
                let (_, cc) = gain_and_c_numeric(&s, &c).unwrap();
                assert_abs_diff_eq!(cc, sector_c(&c, j, f).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pinching_fixed_point_and_gap() {
        let c = lambda_coeffs(1.0, 2).unwrap();
        let out = gmap(&invariant_state(1, 1.0).unwrap(), &c).unwrap();
        let z = zmap(&out);
        assert_eq!(pinch(&z), z);
        assert!(vn_entropy(&z).unwrap() > vn_entropy(&out.g_rho).unwrap());
        assert!(vn_entropy(&out.g_rho).unwrap() >= 0.0);
    }

    #[test]
    fn large_tau_kills_signal() {
        let c = lambda_coeffs(60.0, 3).unwrap();
        for j in 0..=3 {
            assert!(
                rel_entropy_numeric(&invariant_state(j, 0.5).unwrap(), &c)
                    .unwrap()
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn j3_at_three_eighths() {
        let c = lambda_coeffs(0.9, 3).unwrap();
        let s = invariant_state(3, 0.375).unwrap();
        // the off-diagonal couplings vanish, so the state is diagonal
        for r in 0..8 {
            for col in 0..r {
                assert!(s.rho.get(r, col).abs() < 1e-15);
            }
        }
        assert_abs_diff_eq!(
            rel_entropy_closed(3, 0.375, &c).unwrap(),
            rel_entropy_numeric(&s, &c).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn closed_rejects_large_sector() {
        let c = lambda_coeffs(1.0, 5).unwrap();
        assert_eq!(
            rel_entropy_closed(4, 0.5, &c),
            Err(Error::UnsupportedSector { j: 4 })
        );
        assert!(rel_entropy(4, 0.5, &c).is_ok());
    }

    #[test]
    fn mixture_is_additive() {
        let c = lambda_coeffs(1.2, 3).unwrap();
        let parts: Vec<(f64, SectorState)> = [(0.4, 0), (0.3, 1), (0.2, 2), (0.1, 3)]
            .iter()
            .map(|&(p, j)| (p, invariant_state(j, 0.7).unwrap()))
            .collect();
        let total = rel_entropy_mixture(&parts, &c).unwrap();
        let sum: f64 = parts
            .iter()
            .map(|(p, s)| p * rel_entropy_numeric(s, &c).unwrap())
            .sum();
        assert_abs_diff_eq!(total, sum, epsilon = 1e-10);
    }
}
