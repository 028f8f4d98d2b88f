//! Rate assembly, bounds on the unobserved photon-number tail, the
//! constrained minimization over sector mixings, and threshold optimization.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{check_unit, Error, Result};
use crate::invariant::{sector_summary, sector_yield, SectorSummary};
use crate::keymap::rel_entropy;
use crate::numerics::{binary_entropy, ThresholdCoeffs};

/// Largest photon number inspected when checking that yields decrease.
pub const TAIL_HORIZON: usize = 20;

/// Everything that enters one key-rate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBreakdown {
    pub tau: f64,
    /// Gain.
    pub q: f64,
    /// Error parameter.
    pub c: f64,
    /// QBER `2c/Q`.
    pub e: f64,
    /// Per-sector contributions `P_j D_j`.
    pub d_terms: Vec<f64>,
    /// Error-correction leakage `Q h2(E)`.
    pub leak: f64,
    pub rate_signed: f64,
    /// `max(rate_signed, 0)`.
    pub rate: f64,
    /// Set when `E > 1/2` and the leakage was evaluated at `E = 1/2`.
    pub qber_clamped: bool,
    /// Mixing parameter used in each sector, indexed by `j` (empty if not applicable).
    pub mixing: Vec<f64>,
}

impl RateBreakdown {
    /// Assembles a breakdown from the gain, the error parameter and the
    /// per-sector relative-entropy terms.
    pub fn from_c(tau: f64, q: f64, c: f64, d_terms: Vec<f64>) -> Result<Self> {
        let e = if q > 0.0 { 2.0 * c / q } else { 0.5 };
        Self::from_qber(tau, q, e, d_terms).map(|mut out| {
            out.c = c;
            out
        })
    }

    /// Same as [`from_c`](Self::from_c) with the QBER given directly.
    pub fn from_qber(tau: f64, q: f64, e: f64, d_terms: Vec<f64>) -> Result<Self> {
        if !(e >= 0.0) {
            return Err(Error::Domain {
                name: "E",
                value: e,
                expected: "E >= 0",
            });
        }
        let qber_clamped = e > 0.5;
        if qber_clamped {
            log::debug!("QBER {e} exceeds 1/2 at tau = {tau}; leakage evaluated at 1/2");
        }
        let leak = q * binary_entropy(e.min(0.5))?;
        let rate_signed = d_terms.iter().sum::<f64>() - leak;
        Ok(RateBreakdown {
            tau,
            q,
            c: e * q / 2.0,
            e,
            d_terms,
            leak,
            rate_signed,
            rate: rate_signed.max(0.0),
            qber_clamped,
            mixing: Vec::new(),
        })
    }

    /// Total relative entropy `sum_j P_j D_j`.
    pub fn relative_entropy(&self) -> f64 {
        self.d_terms.iter().sum()
    }
}

/// Upper bounds on the gain and error parameter from sectors `0..=k` plus
/// the unobserved tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// `sum_{j<=k} P_j Y_j + (1 - sum P_j) Y_{k+1}`.
    pub q_k: f64,
    /// `(1 - sum P_j)(1 - lambda_0)/2`, added to the observed part of `c`.
    pub c_tail: f64,
    pub tail_mass: f64,
}

/// Checks that `Y_j` does not increase for `k+1 <= j <= TAIL_HORIZON + 1`.
pub fn check_tail_validity(coeffs: &ThresholdCoeffs, k: usize) -> Result<()> {
    let coeffs = coeffs.extended(coeffs.nmax().max(TAIL_HORIZON + 1));
    let mut prev = sector_yield(&coeffs, k + 1)?;
    for j in k + 1..=TAIL_HORIZON {
        let next = sector_yield(&coeffs, j + 1)?;
        if next > prev + 1e-15 {
            return Err(Error::BoundInvalid {
                tau: coeffs.tau(),
                first_violation: j,
            });
        }
        prev = next;
    }
    Ok(())
}

/// Largest threshold in `[lo, hi]` at which the tail bound for cutoff `k` is
/// valid, found by bisection. Assumes validity at `lo`.
pub fn tail_valid_tau_ceiling(k: usize, lo: f64, hi: f64) -> Result<f64> {
    let valid = |tau: f64| -> Result<bool> {
        let c = crate::numerics::lambda_coeffs(tau, TAIL_HORIZON + 1)?;
        Ok(check_tail_validity(&c, k).is_ok())
    };
    if valid(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if valid(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

/// Tail bounds for the distribution `p = (P_0, ..., P_k)`.
///
/// Fails with [`Error::BoundInvalid`] when the tail carries weight and the
/// yields are not monotone past `k` at this threshold.
pub fn tail_bounds(p: &[f64], coeffs: &ThresholdCoeffs) -> Result<TailBounds> {
    assert!(!p.is_empty(), "need at least P_0");
    let k = p.len() - 1;
    let coeffs = coeffs.extended(coeffs.nmax().max(k + 1));
    let tail_mass = (1.0 - p.iter().sum::<f64>()).max(0.0);
    if tail_mass > 0.0 {
        check_tail_validity(&coeffs, k)?;
    }
    let mut q_k = tail_mass * sector_yield(&coeffs, k + 1)?;
    for (j, &pj) in p.iter().enumerate() {
        q_k += pj * sector_yield(&coeffs, j)?;
    }
    Ok(TailBounds {
        q_k,
        c_tail: tail_mass * coeffs.complement(0) / 2.0,
        tail_mass,
    })
}

/// How the error estimate enters the minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Estimated error parameter `c`.
    C(f64),
    /// Estimated QBER, compared against `2c / Q_(k)`.
    Qber(f64),
}

/// Experimental estimates feeding [`constrained_min_rate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub q_hat: f64,
    pub target: Target,
    /// `P_0..=P_k`.
    pub p_hat: Vec<f64>,
}

impl EstimateSet {
    pub fn k(&self) -> usize {
        self.p_hat.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// Observed-sector error parameter equal to the estimate.
    #[default]
    Equality,
    /// Observed-sector error parameter at most the estimate.
    Inequality,
}

/// Spot check of a minimization result against random feasible points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Feasible points probed.
    pub points: usize,
    /// Minimized objective `sum_{j>=1} P_j D_j`.
    pub objective: f64,
    /// Smallest objective seen among the probes.
    pub best_probe: f64,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.best_probe >= self.objective - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedMin {
    pub breakdown: RateBreakdown,
    /// Minimizing `f_j` indexed by `j`; `f[0]` is unused. Sectors with zero
    /// weight report 1.
    pub f: Vec<f64>,
    pub certificate: Certificate,
}

const GRID: usize = 33;
const CERT_POINTS: usize = 100;

/// One sector taking part in the search.
struct Axis {
    j: usize,
    weight: f64,
    /// `weight * dc_j/df`, negative.
    slope: f64,
}

struct Problem<'a> {
    axes: Vec<Axis>,
    /// Required value of `sum_i slope_i f_i` (upper limit in inequality mode).
    budget: f64,
    coeffs: &'a ThresholdCoeffs,
}

impl Problem<'_> {
    fn objective(&self, f: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (ax, &x) in self.axes.iter().zip(f) {
            acc += ax.weight * rel_entropy(ax.j, x, self.coeffs)?;
        }
        Ok(acc)
    }

    fn pivot(&self) -> usize {
        let mut best = 0;
        for (i, ax) in self.axes.iter().enumerate() {
            if ax.slope.abs() > self.axes[best].slope.abs() {
                best = i;
            }
        }
        best
    }

    /// Solves the equality constraint for the pivot coordinate; `None` if
    /// the solution leaves `[0, 1]`.
    fn complete(&self, pivot: usize, f: &mut [f64]) -> Option<()> {
        let rest: f64 = self
            .axes
            .iter()
            .zip(f.iter())
            .enumerate()
            .filter(|(i, _)| *i != pivot)
            .map(|(_, (ax, &x))| ax.slope * x)
            .sum();
        let x = (self.budget - rest) / self.axes[pivot].slope;
        if !(-1e-12..=1.0 + 1e-12).contains(&x) {
            return None;
        }
        f[pivot] = x.clamp(0.0, 1.0);
        Some(())
    }

    /// Grid search over the free coordinates inside `boxes`, the pivot
    /// being fixed by the constraint.
    fn scan(&self, pivot: usize, boxes: &[(f64, f64)], best: &mut (f64, Vec<f64>)) -> Result<()> {
        let free: Vec<usize> = (0..self.axes.len()).filter(|&i| i != pivot).collect();
        let total = GRID.pow(free.len() as u32);
        let mut f = vec![0.0; self.axes.len()];
        for idx in 0..total {
            let mut rem = idx;
            for &i in &free {
                let (lo, hi) = boxes[i];
                let step = rem % GRID;
                rem /= GRID;
                f[i] = lo + (hi - lo) * step as f64 / (GRID - 1) as f64;
            }
            if self.complete(pivot, &mut f).is_none() {
                continue;
            }
            let v = self.objective(&f)?;
            if v < best.0 {
                *best = (v, f.clone());
            }
        }
        Ok(())
    }

    /// Minimum of the objective on the constraint surface, refining the
    /// grid around the incumbent until the box is below `1e-9`.
    fn solve_equality(&self, start: Option<&[f64]>) -> Result<Option<(f64, Vec<f64>)>> {
        let n = self.axes.len();
        let pivot = self.pivot();
        let mut best = (f64::INFINITY, vec![0.0; n]);
        let mut boxes = vec![(0.0, 1.0); n];
        if let Some(s) = start {
            best = (self.objective(s)?, s.to_vec());
        } else {
            self.scan(pivot, &boxes, &mut best)?;
        }
        if !best.0.is_finite() {
            return Ok(None);
        }
        if n == 1 {
            return Ok(Some(best));
        }
        let mut width = if start.is_some() {
            0.25
        } else {
            4.0 / (GRID - 1) as f64
        };
        let mut passes = 0;
        while passes < 2 || width > 1e-9 {
            for i in 0..n {
                if i != pivot {
                    let c = best.1[i];
                    boxes[i] = ((c - width).max(0.0), (c + width).min(1.0));
                }
            }
            self.scan(pivot, &boxes, &mut best)?;
            width *= 4.0 / (GRID - 1) as f64;
            passes += 1;
            if passes > 60 {
                break;
            }
        }
        Ok(Some(best))
    }

    /// Per-sector unconstrained minimizer of `D_j` on `[0, 1]`.
    fn unconstrained(&self) -> Result<Vec<f64>> {
        self.axes
            .iter()
            .map(|ax| {
                let d = |x: f64| rel_entropy(ax.j, x, self.coeffs);
                let mut best = (f64::INFINITY, 0.0);
                for i in 0..=64 {
                    let x = i as f64 / 64.0;
                    let v = d(x)?;
                    if v < best.0 {
                        best = (v, x);
                    }
                }
                let (lo, hi) = (
                    (best.1 - 1.0 / 64.0).max(0.0),
                    (best.1 + 1.0 / 64.0).min(1.0),
                );
                golden_min(d, lo, hi, 1e-10)
            })
            .collect()
    }

    fn constraint(&self, f: &[f64]) -> f64 {
        self.axes.iter().zip(f).map(|(ax, &x)| ax.slope * x).sum()
    }

    fn certify(&self, mode: ConstraintMode, objective: f64) -> Result<Certificate> {
        let n = self.axes.len();
        if n == 0 {
            return Ok(Certificate {
                points: 0,
                objective,
                best_probe: objective,
            });
        }
        let pivot = self.pivot();
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let mut points = 0;
        let mut best_probe = f64::INFINITY;
        let mut f = vec![0.0; n];
        for _ in 0..100_000 {
            if points == CERT_POINTS {
                break;
            }
            for x in f.iter_mut() {
                *x = rng.gen::<f64>();
            }
            let ok = match mode {
                ConstraintMode::Equality => self.complete(pivot, &mut f).is_some(),
                ConstraintMode::Inequality => self.constraint(&f) <= self.budget,
            };
            if ok {
                points += 1;
                best_probe = best_probe.min(self.objective(&f)?);
            }
        }
        Ok(Certificate {
            points,
            objective,
            best_probe,
        })
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
fn golden_min(mut fun: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = fun(x1)?;
    let mut f2 = fun(x2)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = fun(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = fun(x2)?;
        }
    }
    // the endpoints are never probed by the bracketing itself
    let mid = 0.5 * (a + b);
    let mut best = (fun(mid)?, mid);
    for x in [lo, hi] {
        let v = fun(x)?;
        if v < best.0 {
            best = (v, x);
        }
    }
    Ok(best.1)
}

/// Lowest rate compatible with the estimates: minimizes
/// `P_0 D_0 + sum_j P_j D_j(f_j)` subject to the error-parameter constraint.
///
/// The estimated gain enters only through the leakage term.
pub fn constrained_min_rate(
    est: &EstimateSet,
    coeffs: &ThresholdCoeffs,
    mode: ConstraintMode,
) -> Result<ConstrainedMin> {
    if est.p_hat.is_empty() {
        return Err(Error::Domain {
            name: "k",
            value: -1.0,
            expected: "at least P_0",
        });
    }
    check_unit("Q", est.q_hat)?;
    for &p in &est.p_hat {
        check_unit("P_j", p)?;
    }
    let k = est.k();
    let coeffs = coeffs.extended(coeffs.nmax().max(k + 1));
    let summaries: Vec<SectorSummary> = (0..=k)
        .map(|j| sector_summary(&coeffs, j))
        .collect::<Result<_>>()?;

    let (c_target, e_hat, scale, what) = match est.target {
        Target::C(c) => {
            check_unit("c", c)?;
            let e = if est.q_hat > 0.0 {
                2.0 * c / est.q_hat
            } else {
                0.5
            };
            (c, e, 1.0, "c")
        }
        Target::Qber(e) => {
            check_unit("E", e)?;
            let qk = tail_bounds(&est.p_hat, &coeffs)?.q_k;
            (e * qk / 2.0, e, 2.0 / qk, "E")
        }
    };

    let fixed: f64 = summaries
        .iter()
        .zip(&est.p_hat)
        .map(|(s, p)| p * s.c_const)
        .sum();
    let axes: Vec<Axis> = summaries
        .iter()
        .zip(&est.p_hat)
        .filter(|(s, &p)| s.j > 0 && p > 0.0)
        .map(|(s, &p)| Axis {
            j: s.j,
            weight: p,
            slope: p * s.c_slope,
        })
        .collect();
    let problem = Problem {
        budget: c_target - fixed,
        axes,
        coeffs: &coeffs,
    };

    // attainable range of the observed error parameter
    let lo = fixed + problem.axes.iter().map(|ax| ax.slope).sum::<f64>();
    let hi = fixed;
    let tol = 1e-12;
    let infeasible = || Error::Infeasible {
        what,
        value: match est.target {
            Target::C(c) => c,
            Target::Qber(e) => e,
        },
        lo: lo * scale,
        hi: hi * scale,
    };
    if c_target < lo - tol || (mode == ConstraintMode::Equality && c_target > hi + tol) {
        return Err(infeasible());
    }

    let (problem, solved, on_boundary) = if problem.axes.is_empty() {
        (problem, (0.0, Vec::new()), false)
    } else {
        let free = problem.unconstrained()?;
        if mode == ConstraintMode::Inequality && problem.constraint(&free) <= problem.budget {
            let v = problem.objective(&free)?;
            (problem, (v, free), false)
        } else {
            // the optimum sits on the constraint surface
            let mut p = problem;
            p.budget = p.budget.clamp(lo - fixed, 0.0);
            let solved = p.solve_equality(None)?.ok_or_else(infeasible)?;
            (p, solved, true)
        }
    };
    finish(
        est,
        &coeffs,
        mode,
        problem,
        solved,
        on_boundary,
        e_hat,
        c_target,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    est: &EstimateSet,
    coeffs: &ThresholdCoeffs,
    mode: ConstraintMode,
    problem: Problem<'_>,
    mut solved: (f64, Vec<f64>),
    on_boundary: bool,
    e_hat: f64,
    c_target: f64,
) -> Result<ConstrainedMin> {
    let mut cert = problem.certify(mode, solved.0)?;
    for _ in 0..3 {
        if cert.holds() || !on_boundary {
            break;
        }
        log::warn!(
            "random feasible point ({}) beat the grid search ({}); refining again",
            cert.best_probe,
            solved.0
        );
        if let Some(better) = problem.solve_equality(Some(&solved.1))? {
            if better.0 < solved.0 {
                solved = better;
            }
        }
        cert = problem.certify(mode, solved.0)?;
    }

    let k = est.k();
    let mut f = vec![1.0; k + 1];
    f[0] = 0.0;
    let mut d_terms = vec![0.0; k + 1];
    d_terms[0] = est.p_hat[0] * rel_entropy(0, 0.0, coeffs)?;
    for (ax, &x) in problem.axes.iter().zip(&solved.1) {
        f[ax.j] = x;
        d_terms[ax.j] = ax.weight * rel_entropy(ax.j, x, coeffs)?;
    }
    let mut breakdown = RateBreakdown::from_qber(coeffs.tau(), est.q_hat, e_hat, d_terms)?;
    breakdown.c = match est.target {
        Target::C(c) => c,
        Target::Qber(_) => c_target,
    };
    breakdown.mixing = f.clone();
    Ok(ConstrainedMin {
        breakdown,
        f,
        certificate: cert,
    })
}

/// Result of a threshold optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauOptimum {
    pub tau: f64,
    pub rate: f64,
    /// Whether the grid fallback replaced the golden-section result.
    pub used_fallback: bool,
}

/// Maximizes `rate_fn` over `tau in [lo, hi]`.
///
/// Golden-section search first; a 33-point scan then checks the result, and
/// if any probe beats it the search is redone from a 256-point grid.
pub fn optimize_tau(
    mut rate_fn: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<TauOptimum> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain {
            name: "tau range",
            value: lo,
            expected: "0 < lo < hi < inf",
        });
    }
    let mut eval = |tau: f64| -> Result<f64> {
        let v = rate_fn(tau)?;
        if !v.is_finite() {
            return Err(Error::Evaluation { tau, value: v });
        }
        Ok(-v)
    };
    let tol = 1e-7;
    let tau = golden_min(&mut eval, lo, hi, tol)?;
    let rate = -eval(tau)?;

    let scan = 33;
    let mut beaten = false;
    for i in 0..scan {
        let t = lo + (hi - lo) * i as f64 / (scan - 1) as f64;
        if -eval(t)? > rate + 1e-12 * rate.abs().max(1e-300) {
            beaten = true;
            break;
        }
    }
    if !beaten {
        return Ok(TauOptimum {
            tau,
            rate,
            used_fallback: false,
        });
    }

    let grid = 256;
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = (f64::INFINITY, 0);
    for i in 0..grid {
        let v = eval(lo + step * i as f64)?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let centre = lo + step * best.1 as f64;
    let t2 = golden_min(
        &mut eval,
        (centre - step).max(lo),
        (centre + step).min(hi),
        tol,
    )?;
    let r2 = -eval(t2)?;
    log::warn!(
        "rate is not unimodal on [{lo}, {hi}]: golden section gave tau = {tau} (rate {rate}), grid search gave tau = {t2} (rate {r2})"
    );
    let (tau, rate) = if r2 >= rate { (t2, r2) } else { (tau, rate) };
    Ok(TauOptimum {
        tau,
        rate,
        used_fallback: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{passive_rate, pure_loss_rate};
    use crate::numerics::lambda_coeffs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn breakdown_sums() {
        let r = RateBreakdown::from_c(1.0, 0.5, 0.05, vec![0.1, 0.3]).unwrap();
        assert_abs_diff_eq!(r.rate_signed, 0.4 - r.leak, epsilon = 1e-15);
        assert_abs_diff_eq!(r.e, 0.2, epsilon = 1e-15);
        let r = RateBreakdown::from_c(1.0, 0.5, 0.2, vec![0.1]).unwrap();
        assert!(r.qber_clamped);
        assert_abs_diff_eq!(r.leak, 0.5, epsilon = 1e-15);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn tail_bound_validity() {
        let c = lambda_coeffs(1.0, 3).unwrap();
        assert!(check_tail_validity(&c, 0).is_ok());
        let c = lambda_coeffs(2.0, 3).unwrap();
        assert!(check_tail_validity(&c, 3).is_ok());
        assert_eq!(
            check_tail_validity(&c, 0),
            Err(Error::BoundInvalid {
                tau: 2.0,
                first_violation: 1
            })
        );
        let c = lambda_coeffs(3.0, 3).unwrap();
        assert!(matches!(
            check_tail_validity(&c, 3),
            Err(Error::BoundInvalid { .. })
        ));
        let ceiling = tail_valid_tau_ceiling(3, 1.0, 10.0).unwrap();
        assert!(ceiling > 2.4 && ceiling < 2.6, "{ceiling}");
    }

    #[test]
    fn tail_bounds_values() {
        let c = lambda_coeffs(1.0, 4).unwrap();
        let p = [0.5, 0.3, 0.2];
        let t = tail_bounds(&p, &c).unwrap();
        let exact: f64 = p
            .iter()
            .enumerate()
            .map(|(j, pj)| pj * sector_yield(&c, j).unwrap())
            .sum();
        assert_abs_diff_eq!(t.q_k, exact, epsilon = 1e-15);
        assert_eq!(t.tail_mass, 0.0);
        let t = tail_bounds(&[0.5, 0.3], &c).unwrap();
        assert!(t.q_k > 0.5 * sector_yield(&c, 0).unwrap() + 0.3 * sector_yield(&c, 1).unwrap());
        assert_abs_diff_eq!(t.c_tail, 0.2 * (1.0 - c.lambda(0)) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn k1_recovers_passive_rate() {
        let c = lambda_coeffs(1.1, 3).unwrap();
        for &(eta, f1) in &[(0.5, 1.0), (0.8, 0.6), (0.2, 0.1)] {
            let want = passive_rate(eta, f1, &c).unwrap();
            let est = EstimateSet {
                q_hat: want.q,
                target: Target::C(want.c),
                p_hat: vec![1.0 - eta, eta],
            };
            let got = constrained_min_rate(&est, &c, ConstraintMode::Equality).unwrap();
            assert_abs_diff_eq!(got.f[1], f1, epsilon = 1e-4);
            assert_abs_diff_eq!(got.breakdown.rate_signed, want.rate_signed, epsilon = 1e-6);
            assert!(got.certificate.holds());
        }
    }

    #[test]
    fn k3_certificate_and_feasibility() {
        let c = lambda_coeffs(1.0, 4).unwrap();
        let p = vec![0.4, 0.3, 0.2, 0.1];
        let s: Vec<_> = (0..4).map(|j| sector_summary(&c, j).unwrap()).collect();
        let c_mid: f64 = p.iter().zip(&s).map(|(pj, sj)| pj * sj.c(0.5)).sum();
        let est = EstimateSet {
            q_hat: 0.5,
            target: Target::C(c_mid),
            p_hat: p.clone(),
        };
        for mode in [ConstraintMode::Equality, ConstraintMode::Inequality] {
            let got = constrained_min_rate(&est, &c, mode).unwrap();
            assert!(got.certificate.holds(), "{mode:?} {:?}", got.certificate);
            assert_eq!(got.certificate.points, 100);
            let achieved: f64 = p
                .iter()
                .zip(&s)
                .zip(&got.f)
                .map(|((pj, sj), &f)| pj * sj.c(f))
                .sum();
            match mode {
                ConstraintMode::Equality => assert_abs_diff_eq!(achieved, c_mid, epsilon = 1e-10),
                ConstraintMode::Inequality => assert!(achieved <= c_mid + 1e-10),
            }
        }
        let c_low: f64 = p.iter().zip(&s).map(|(pj, sj)| pj * sj.c(1.0)).sum::<f64>() - 1e-4;
        let est = EstimateSet {
            q_hat: 0.5,
            target: Target::C(c_low),
            p_hat: p,
        };
        assert!(matches!(
            constrained_min_rate(&est, &c, ConstraintMode::Equality),
            Err(Error::Infeasible { what: "c", .. })
        ));
    }

    #[test]
    fn golden_section_pure_loss() {
        let opt = optimize_tau(
            |tau| Ok(pure_loss_rate(1.0, &lambda_coeffs(tau, 1)?)?.rate_signed),
            0.1,
            5.0,
        )
        .unwrap();
        assert_abs_diff_eq!(opt.tau, 0.8012, epsilon = 1e-3);
        assert!(!opt.used_fallback);
    }

    #[test]
    fn fallback_on_bimodal() {
        // a broad bump that captures the golden section, and a taller narrow one
        let f = |t: f64| {
            Ok((-(t - 1.0f64).powi(2)).exp() + 2.0 * (-(t - 4.5f64).powi(2) * 200.0).exp())
        };
        let opt = optimize_tau(f, 0.1, 5.0).unwrap();
        assert!(opt.used_fallback);
        assert_abs_diff_eq!(opt.tau, 4.5, epsilon = 1e-4);
    }

    #[test]
    fn nonfinite_is_an_error() {
        let r = optimize_tau(|_| Ok(f64::NAN), 0.1, 1.0);
        assert!(matches!(r, Err(Error::Evaluation { .. })));
    }
}
