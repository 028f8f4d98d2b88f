//! Photon-number sectors of the two-mode (H, V) receiver and the detection
//! operators restricted to them.
//!
//! Sector `j` of Bob's field is spanned by `|a>_H |j-a>_V` for `a = j..=0`, in
//! that order. The joint sector with Alice's single photon is ordered with
//! Alice's `H` block first, so the joint index of `(A, a)` is
//! `A * (j+1) + (j - a)`.

use crate::error::Result;
use crate::numerics::{Mat, SymMatrix, ThresholdCoeffs};

/// Polarization label, used both for modes and for key-map outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

/// Which of the single-mode threshold operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Click {
    /// No click: intensity below threshold.
    R0,
    /// Click: intensity above threshold.
    R1,
}

/// Generators of the joint polarization rotation on a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    ZTot,
    PlusTot,
}

/// Ordered photon-number basis of Bob's `j`-photon sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    j: usize,
    states: Vec<(usize, usize)>,
}

impl SectorBasis {
    pub fn new(j: usize) -> Self {
        SectorBasis {
            j,
            states: (0..=j).rev().map(|a| (a, j - a)).collect(),
        }
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `(n_H, n_V)` pairs in basis order.
    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    /// Position of `|a>_H |j-a>_V`.
    pub fn index_of(&self, a: usize) -> usize {
        debug_assert!(a <= self.j);
        self.j - a
    }

    /// Position of Alice `pol` times Bob `|a>_H |j-a>_V` in the joint sector.
    pub fn joint_index(&self, pol: Pol, a: usize) -> usize {
        pol.index() * (self.j + 1) + self.index_of(a)
    }
}

/// A diagonal operator on Bob's `j`-photon sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorOperator {
    pub j: usize,
    pub diag: Vec<f64>,
}

impl SectorOperator {
    pub fn to_matrix(&self) -> SymMatrix {
        SymMatrix::diagonal(&self.diag)
    }

    /// Entrywise square root; exact because the operator is diagonal.
    pub fn sqrt(&self) -> SectorOperator {
        SectorOperator {
            j: self.j,
            diag: self.diag.iter().map(|x| x.max(0.0).sqrt()).collect(),
        }
    }

    pub fn add(&self, rhs: &SectorOperator) -> SectorOperator {
        assert_eq!(self.j, rhs.j);
        SectorOperator {
            j: self.j,
            diag: self
                .diag
                .iter()
                .zip(&rhs.diag)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// `R0` or `R1` of mode `mode`, restricted to sector `j`.
pub fn op_r(coeffs: &ThresholdCoeffs, j: usize, which: Click, mode: Pol) -> Result<SectorOperator> {
    coeffs.require(j)?;
    let diag = SectorBasis::new(j)
        .states()
        .iter()
        .map(|&(nh, nv)| {
            let n = match mode {
                Pol::H => nh,
                Pol::V => nv,
            };
            match which {
                Click::R1 => coeffs.lambda(n),
                Click::R0 => coeffs.complement(n),
            }
        })
        .collect();
    Ok(SectorOperator { j, diag })
}

/// Conclusive outcome `M_H = R1^H R0^V` or `M_V = R0^H R1^V` on sector `j`.
pub fn op_m(coeffs: &ThresholdCoeffs, j: usize, outcome: Pol) -> Result<SectorOperator> {
    coeffs.require(j)?;
    let diag = SectorBasis::new(j)
        .states()
        .iter()
        .map(|&(nh, nv)| match outcome {
            Pol::H => coeffs.lambda(nh) * coeffs.complement(nv),
            Pol::V => coeffs.complement(nh) * coeffs.lambda(nv),
        })
        .collect();
    Ok(SectorOperator { j, diag })
}

/// Generator of the joint rotation `U ⊗ U*` on the 1:j sector, in real form.
///
/// `ZTot = Jz^A ⊗ 1 - 1 ⊗ Jz^B` and `PlusTot = J+^A ⊗ 1 - 1 ⊗ J-^B` with
/// `J+ = a_H^† a_V`. Neither needs to be symmetric.
pub fn schwinger_total(j: usize, component: Generator) -> Mat {
    let basis = SectorBasis::new(j);
    let n = basis.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    match component {
        Generator::ZTot => {
            for pol in [Pol::H, Pol::V] {
                let ma = if pol == Pol::H { 0.5 } else { -0.5 };
                for &(nh, nv) in basis.states() {
                    let mb = (nh as f64 - nv as f64) / 2.0;
                    let i = basis.joint_index(pol, nh);
                    m[(i, i)] = ma - mb;
                }
            }
        }
        Generator::PlusTot => {
            // Alice: V -> H
            for a in 0..=j {
                m[(basis.joint_index(Pol::H, a), basis.joint_index(Pol::V, a))] += 1.0;
            }
            // Bob: J- = a_V^† a_H moves a photon from H to V
            for pol in [Pol::H, Pol::V] {
                for a in 1..=j {
                    let amp = ((a * (j - a + 1)) as f64).sqrt();
                    let row = basis.joint_index(pol, a - 1);
                    let col = basis.joint_index(pol, a);
                    m[(row, col)] -= amp;
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::lambda_coeffs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_ordering() {
        let b = SectorBasis::new(2);
        assert_eq!(b.states(), &[(2, 0), (1, 1), (0, 2)]);
        assert_eq!(b.joint_index(Pol::V, 2), 3);
        assert_eq!(b.joint_index(Pol::H, 0), 2);
    }

    #[test]
    fn r_examples() {
        let c = lambda_coeffs(1.0, 4).unwrap();
        let r = op_r(&c, 0, Click::R1, Pol::H).unwrap();
        assert_abs_diff_eq!(r.diag[0], 0.367879, epsilon = 1e-6);
        // basis (1,0), (0,1): the V mode sees 0 then 1 photons
        let r = op_r(&c, 1, Click::R1, Pol::V).unwrap();
        assert_abs_diff_eq!(r.diag[0], 0.3679, epsilon = 1e-4);
        assert_abs_diff_eq!(r.diag[1], 0.7358, epsilon = 1e-4);
        let r = op_r(&c, 1, Click::R1, Pol::H).unwrap();
        assert_abs_diff_eq!(r.diag[0], 0.7358, epsilon = 1e-4);
        for j in 0..=4 {
            for mode in [Pol::H, Pol::V] {
                let s = op_r(&c, j, Click::R0, mode)
                    .unwrap()
                    .add(&op_r(&c, j, Click::R1, mode).unwrap());
                for x in s.diag {
                    assert_abs_diff_eq!(x, 1.0, epsilon = 1e-15);
                }
            }
        }
        assert!(op_r(&c, 5, Click::R0, Pol::H).is_err());
    }

    #[test]
    fn m_examples() {
        let c = lambda_coeffs(1.0, 4).unwrap();
        let mh = op_m(&c, 0, Pol::H).unwrap();
        let mv = op_m(&c, 0, Pol::V).unwrap();
        assert_abs_diff_eq!(mh.diag[0], 0.232544, epsilon = 1e-6);
        assert_eq!(mh.diag, mv.diag);
        let mh = op_m(&c, 1, Pol::H).unwrap();
        assert_abs_diff_eq!(mh.diag[0], 0.4651, epsilon = 1e-4);
        assert_abs_diff_eq!(mh.diag[1], 0.0972, epsilon = 1e-4);
        for j in 0..=4 {
            let mh = op_m(&c, j, Pol::H).unwrap();
            let mv = op_m(&c, j, Pol::V).unwrap();
            let rev: Vec<f64> = mv.diag.iter().rev().copied().collect();
            assert_eq!(mh.diag, rev);
            for x in mh.add(&mv).diag {
                assert!((0.0..=1.0 - c.lambda(0) + 1e-15).contains(&x));
            }
        }
    }

    #[test]
    fn generator_examples() {
        let z0 = schwinger_total(0, Generator::ZTot);
        assert_eq!((z0[(0, 0)], z0[(1, 1)]), (0.5, -0.5));
        let z1 = schwinger_total(1, Generator::ZTot);
        let d: Vec<f64> = (0..4).map(|i| z1[(i, i)]).collect();
        assert_eq!(d, vec![0.0, 1.0, -1.0, 0.0]);
        let p = schwinger_total(2, Generator::PlusTot);
        for i in 0..6 {
            assert_eq!(p[(i, i)], 0.0);
        }
    }
}
