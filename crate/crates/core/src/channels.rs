//! Channel models: pure loss, passive attacks (with the virtual-detector
//! comparison model), and loss followed by Gaussian noise. Also the
//! repeaterless and continuous-variable upper bounds used as references.

use crate::error::{check_unit, Error, Result};
use crate::fock::{Pol, SectorBasis};
use crate::invariant::{sector_c, sector_summary, sector_yield};
use crate::keymap::rel_entropy_closed;
use crate::numerics::{binary_entropy, gaussian_g, SymMatrix, ThresholdCoeffs};
use crate::rates::{tail_bounds, RateBreakdown};

/// Noise variances below this use the noiseless limits.
pub const NOISELESS: f64 = 1e-12;

/// Transmissivity from a loss in dB.
pub fn eta_from_db(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Loss in dB from a transmissivity.
pub fn db_from_eta(eta: f64) -> f64 {
    // adding 0.0 turns -0 at eta = 1 into 0
    -10.0 * eta.log10() + 0.0
}

/// Gain of the vacuum-plus-one-photon mixture with transmissivity `eta`.
fn passive_gain(eta: f64, coeffs: &ThresholdCoeffs) -> f64 {
    let (l0, l1) = (coeffs.lambda(0), coeffs.lambda(1));
    let (r0, r1) = (coeffs.complement(0), coeffs.complement(1));
    2.0 * (1.0 - eta) * l0 * r0 + eta * (l0 * r1 + l1 * r0)
}

/// Pure-loss channel: vacuum with probability `1-eta`, the one-photon Bell
/// state otherwise.
pub fn pure_loss_rate(eta: f64, coeffs: &ThresholdCoeffs) -> Result<RateBreakdown> {
    check_unit("eta", eta)?;
    coeffs.require(1)?;
    let l0 = coeffs.lambda(0);
    let q = passive_gain(eta, coeffs);
    let c = l0 / 2.0 * (1.0 - (1.0 - eta) * l0 - eta * coeffs.lambda(1));
    let d = vec![
        (1.0 - eta) * rel_entropy_closed(0, 0.0, coeffs)?,
        eta * rel_entropy_closed(1, 1.0, coeffs)?,
    ];
    let mut out = RateBreakdown::from_c(coeffs.tau(), q, c, d)?;
    out.mixing = vec![0.0, 1.0];
    Ok(out)
}

/// Small-`eta` limit of the pure-loss rate divided by `eta^2`:
/// `tau^2 / ((e^tau - 1) ln 16)`.
pub fn pure_loss_asymptote(tau: f64) -> f64 {
    tau * tau / (tau.exp_m1() * 16f64.ln())
}

/// Feasible `(Q, c)` region of passive attacks at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRegion {
    pub tau: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// `Q` at `eta = 0` and `eta = 1`.
    q_vacuum: f64,
    q_single: f64,
    c_vacuum: f64,
    c1_lo: f64,
    c1_hi: f64,
}

impl FeasibleRegion {
    /// Transmissivity implied by a gain; not clamped.
    pub fn eta_of(&self, q: f64) -> f64 {
        (q - self.q_vacuum) / (self.q_single - self.q_vacuum)
    }

    pub fn q_of(&self, eta: f64) -> f64 {
        (1.0 - eta) * self.q_vacuum + eta * self.q_single
    }

    /// Smallest attainable `c` at this transmissivity (reached at `f_1 = 1`).
    pub fn c_min(&self, eta: f64) -> f64 {
        (1.0 - eta) * self.c_vacuum + eta * self.c1_lo
    }

    /// Largest attainable `c` at this transmissivity (reached at `f_1 = 0`).
    pub fn c_max(&self, eta: f64) -> f64 {
        (1.0 - eta) * self.c_vacuum + eta * self.c1_hi
    }

    /// Whether `(q, c)` lies in the region, with absolute slack `tol`.
    pub fn contains(&self, q: f64, c: f64, tol: f64) -> bool {
        if q < self.q_min - tol || q > self.q_max + tol {
            return false;
        }
        let eta = self.eta_of(q).clamp(0.0, 1.0);
        c >= self.c_min(eta) - tol && c <= self.c_max(eta) + tol
    }
}

pub fn feasible_region(coeffs: &ThresholdCoeffs) -> Result<FeasibleRegion> {
    coeffs.require(1)?;
    let q_vacuum = passive_gain(0.0, coeffs);
    let q_single = passive_gain(1.0, coeffs);
    if (q_single - q_vacuum).abs() < 1e-15 {
        return Err(Error::Degenerate { tau: coeffs.tau() });
    }
    let s1 = sector_summary(coeffs, 1)?;
    Ok(FeasibleRegion {
        tau: coeffs.tau(),
        q_min: q_vacuum.min(q_single),
        q_max: q_vacuum.max(q_single),
        q_vacuum,
        q_single,
        c_vacuum: sector_c(coeffs, 0, 0.0)?,
        c1_lo: s1.c(1.0),
        c1_hi: s1.c(0.0),
    })
}

/// Recovers `(eta, f_1)` from estimated `(Q, c)` under a passive attack.
///
/// At `eta = 0` the one-photon state is unobservable and `f_1 = 1` is returned.
pub fn passive_attack_params(q: f64, c: f64, coeffs: &ThresholdCoeffs) -> Result<(f64, f64)> {
    let region = feasible_region(coeffs)?;
    let tol = 1e-12;
    let mut eta = region.eta_of(q);
    if !(-tol..=1.0 + tol).contains(&eta) {
        return Err(Error::Infeasible {
            what: "Q",
            value: q,
            lo: region.q_min,
            hi: region.q_max,
        });
    }
    eta = eta.clamp(0.0, 1.0);
    let (lo, hi) = (region.c_min(eta), region.c_max(eta));
    if c < lo - tol || c > hi + tol {
        return Err(Error::Infeasible {
            what: "c",
            value: c,
            lo,
            hi,
        });
    }
    if eta == 0.0 {
        return Ok((0.0, 1.0));
    }
    // c is affine in f_1 with value c_max at 0 and c_min at 1
    let f1 = ((hi - c) / (hi - lo)).clamp(0.0, 1.0);
    Ok((eta, f1))
}

/// Rate of a passive attack with transmissivity `eta` and one-photon mixing `f1`.
pub fn passive_rate(eta: f64, f1: f64, coeffs: &ThresholdCoeffs) -> Result<RateBreakdown> {
    check_unit("eta", eta)?;
    check_unit("f1", f1)?;
    coeffs.require(1)?;
    let q = passive_gain(eta, coeffs);
    let c = (1.0 - eta) * sector_c(coeffs, 0, 0.0)? + eta * sector_c(coeffs, 1, f1)?;
    let d = vec![
        (1.0 - eta) * rel_entropy_closed(0, 0.0, coeffs)?,
        eta * rel_entropy_closed(1, f1, coeffs)?,
    ];
    let mut out = RateBreakdown::from_c(coeffs.tau(), q, c, d)?;
    out.mixing = vec![0.0, f1];
    Ok(out)
}

/// One-photon QBER of the virtual-detector misalignment model.
pub fn qi_single_photon_qber(ed: f64, tau: f64) -> f64 {
    let e1 = (-tau).exp();
    let e2 = (-2.0 * tau).exp();
    ((ed * tau + 1.0) * e1 - (tau + 1.0) * e2) / ((tau + 2.0) * e1 - 2.0 * (tau + 1.0) * e2)
}

/// Mixing parameter whose one-photon QBER equals the misalignment model's.
pub fn qi_equivalent_f1(ed: f64) -> f64 {
    1.0 - 1.5 * ed
}

/// Rate of the virtual-detector misalignment model with error probability `ed`.
pub fn qi_rate(eta: f64, ed: f64, coeffs: &ThresholdCoeffs) -> Result<RateBreakdown> {
    check_unit("eta", eta)?;
    check_unit("Ed", ed)?;
    coeffs.require(1)?;
    let q0 = (1.0 - eta) * sector_yield(coeffs, 0)?;
    let q1 = eta * sector_yield(coeffs, 1)?;
    let q = q0 + q1;
    let e1 = qi_single_photon_qber(ed, coeffs.tau());
    let c = q0 / 4.0 + q1 * e1 / 2.0;
    let d = vec![q0, q1 * (1.0 - binary_entropy(ed)?)];
    RateBreakdown::from_c(coeffs.tau(), q, c, d)
}

/// Photon statistics at Bob and the invariant-state mixing of each sector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStats {
    /// `P_0..=P_k`.
    pub p: Vec<f64>,
    /// `f_j` indexed by `j`; `f[0]` is unused and 0.
    pub f: Vec<f64>,
}

impl PhotonStats {
    pub fn k(&self) -> usize {
        self.p.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.p.iter().sum::<f64>()).max(0.0)
    }
}

/// Photon-number distribution `p_m` of a single mode carrying one photon
/// after noise of variance `n`, for `m = 0..=mmax`.
pub fn noisy_photon_distribution(n: f64, mmax: usize) -> Vec<f64> {
    (0..=mmax)
        .map(|m| {
            if m == 0 {
                n / (n + 1.0).powi(2)
            } else {
                (m as f64 + n * n) * n.powi(m as i32 - 1) / (n + 1.0).powi(m as i32 + 2)
            }
        })
        .collect()
}

fn check_noise(n: f64) -> Result<()> {
    if n >= 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "N",
            value: n,
            expected: "finite N >= 0",
        })
    }
}

/// `P_0..P_3` and `f_1..f_3` for loss `eta` followed by Gaussian noise `n`.
pub fn gaussian_stats(eta: f64, n: f64) -> Result<PhotonStats> {
    check_unit("eta", eta)?;
    check_noise(n)?;
    let x = n / (n + 1.0);
    let pm = noisy_photon_distribution(n, 3);
    let p = (0..=3)
        .map(|j| {
            let signal: f64 = (0..=j).map(|m| pm[m] * x.powi((j - m) as i32)).sum();
            eta / (n + 1.0) * signal
                + (j + 1) as f64 * (1.0 - eta) / (n + 1.0).powi(2) * x.powi(j as i32)
        })
        .collect();
    let f = if n < NOISELESS {
        vec![0.0, 1.0, 1.0, 1.0]
    } else {
        let base = n * n - eta * n + n;
        vec![
            0.0,
            (2.0 * eta + base) / (2.0 * (eta + 2.0 * n * n - 2.0 * eta * n + 2.0 * n)),
            (3.0 * eta + base) / (3.0 * (eta + base)),
            3.0 * (4.0 * eta + base) / (4.0 * (3.0 * eta + 2.0 * n * n - 2.0 * eta * n + 2.0 * n)),
        ]
    };
    Ok(PhotonStats { p, f })
}

/// Unnormalized 1:j sector block (`j <= 3`) of the state after loss and noise,
/// built entry by entry in the photon-number basis. Its trace is `P_j`.
pub fn gaussian_sector_matrix(eta: f64, n: f64, j: usize) -> Result<SymMatrix> {
    check_unit("eta", eta)?;
    check_noise(n)?;
    if j > 3 {
        return Err(Error::UnsupportedSector { j });
    }
    let x = n / (n + 1.0);
    let thermal = |m: usize| x.powi(m as i32) / (n + 1.0);
    let pm = noisy_photon_distribution(n, j);
    let t = |m: usize| x.powi(m as i32) * ((m + 1) as f64).sqrt() / (n + 1.0).powi(2);
    let basis = SectorBasis::new(j);
    let dim = 2 * (j + 1);
    let mut rho = SymMatrix::identity(dim).scaled((1.0 - eta) / 2.0 * thermal(0) * thermal(j));

    for a in 0..=j {
        // Alice H: the signal photon sits in Bob's H mode
        let h = basis.joint_index(Pol::H, a);
        rho.set(h, h, rho.get(h, h) + eta / 2.0 * pm[a] * thermal(j - a));
        let v = basis.joint_index(Pol::V, a);
        rho.set(v, v, rho.get(v, v) + eta / 2.0 * thermal(a) * pm[j - a]);
    }
    // coherence between |H;(m+1, j-1-m)> and |V;(m, j-m)>
    for m in 0..j {
        let r = basis.joint_index(Pol::H, m + 1);
        let c = basis.joint_index(Pol::V, m);
        rho.set(r, c, rho.get(r, c) + eta / 2.0 * t(m) * t(j - 1 - m));
    }
    Ok(rho)
}

/// Rate under loss `eta` followed by Gaussian noise `n`, keeping sectors up
/// to three photons and bounding the rest.
pub fn gaussian_rate(eta: f64, n: f64, coeffs: &ThresholdCoeffs) -> Result<RateBreakdown> {
    let stats = gaussian_stats(eta, n)?;
    let tail = tail_bounds(&stats.p, coeffs)?;
    let mut d = Vec::with_capacity(4);
    let mut c = tail.c_tail;
    for j in 0..=3 {
        d.push(stats.p[j] * rel_entropy_closed(j, stats.f[j], coeffs)?);
        c += stats.p[j] * sector_c(coeffs, j, stats.f[j])?;
    }
    let mut out = RateBreakdown::from_c(coeffs.tau(), tail.q_k, c, d)?;
    out.mixing = stats.f;
    Ok(out)
}

/// Repeaterless bound `-log2(1 - eta)`; infinite at `eta = 1`.
pub fn plob_bound(eta: f64) -> Result<f64> {
    check_unit("eta", eta)?;
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Reverse coherent information `log2(1/(1-eta)) - g(N)`.
pub fn cv_upper_bound(eta: f64, n: f64) -> Result<f64> {
    check_noise(n)?;
    Ok(plob_bound(eta)? - gaussian_g(n)?)
}
