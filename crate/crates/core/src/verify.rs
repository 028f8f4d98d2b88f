//! Self-checks comparing every closed form against an independent route:
//! quadrature for the threshold coefficients, explicit matrices for the
//! invariant states, eigenvalues for the relative entropies, and traces of
//! the noisy-channel sector blocks for the photon statistics.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::channels::{
    feasible_region, gaussian_sector_matrix, gaussian_stats, passive_attack_params, passive_rate,
    qi_rate,
};
use crate::error::Result;
use crate::fock::{schwinger_total, Generator};
use crate::invariant::{
    invariant_state, mixing_parameter, sector_c, sector_c_numeric, sector_yield,
    sector_yield_numeric, SectorState,
};
use crate::keymap::{rel_entropy_closed, rel_entropy_mixture, rel_entropy_numeric};
use crate::numerics::{lambda_coeffs, sym_eigvals, vn_entropy, SymMatrix, ThresholdCoeffs};

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    /// Largest deviation seen, in the suite's own units.
    pub max_error: f64,
    pub tolerance: f64,
    /// First failing check, if any.
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Knobs for [`run_all`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    /// Shift `lambda_n` by `delta` in the tables fed to the closed forms.
    /// Exists to confirm the suites notice a corrupted table.
    pub perturb_lambda: Option<(usize, f64)>,
}

impl VerifyOptions {
    fn table(&self, tau: f64, nmax: usize) -> Result<ThresholdCoeffs> {
        let c = lambda_coeffs(tau, nmax)?;
        Ok(match self.perturb_lambda {
            Some((n, delta)) if n <= nmax => c.perturbed(n, delta),
            _ => c,
        })
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    checks: usize,
    max_error: f64,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            checks: 0,
            max_error: 0.0,
            failure: None,
        }
    }

    fn check(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max_error = self.max_error.max(err);
        if err > self.tolerance && self.failure.is_none() {
            self.failure = Some(format!("{} (error {err:.3e})", what()));
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        if self.failure.is_none() {
            self.failure = Some(what);
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            checks: self.checks,
            max_error: self.max_error,
            tolerance: self.tolerance,
            failure: self.failure,
        }
    }
}

/// The one-, two- and three-photon invariant states written out entry by
/// entry, for comparison against the general construction.
pub fn printed_invariant_state(j: usize, f: f64) -> Option<SymMatrix> {
    let (scale, diag_h, offdiag): (f64, Vec<f64>, Vec<f64>) = match j {
        1 => (
            6.0,
            vec![2.0 * f + 1.0, 2.0 * (1.0 - f)],
            vec![4.0 * f - 1.0],
        ),
        2 => (
            12.0,
            vec![3.0 * f + 1.0, 2.0, 3.0 * (1.0 - f)],
            vec![2f64.sqrt() * (3.0 * f - 1.0); 2],
        ),
        3 => (
            60.0,
            vec![
                12.0 * f + 3.0,
                4.0 * f + 6.0,
                9.0 - 4.0 * f,
                12.0 * (1.0 - f),
            ],
            vec![
                3f64.sqrt() * (8.0 * f - 3.0),
                16.0 * f - 6.0,
                3f64.sqrt() * (8.0 * f - 3.0),
            ],
        ),
        _ => return None,
    };
    let n = j + 1;
    let mut m = SymMatrix::zeros(2 * n);
    for (b, &x) in diag_h.iter().enumerate() {
        m.set(b, b, x / scale);
        // the V block is the H block in reverse order
        m.set(2 * n - 1 - b, 2 * n - 1 - b, x / scale);
    }
    // (H, basis b) couples to (V, basis b + 1)
    for (b, &x) in offdiag.iter().enumerate() {
        m.set(b, n + b + 1, x / scale);
    }
    Some(m)
}

/// `int_a^b g` by adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson(g: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (g(a), g(b), g(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(g, a, b, fa, fm, fb, whole, tol, 50)
}

/// `Gamma(1+n, tau)/n!` by quadrature of `t^n e^{-t}/n!` over `[tau, inf)`.
pub fn lambda_by_quadrature(tau: f64, n: usize) -> f64 {
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let g = |t: f64| {
        if t <= 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (n as f64 * t.ln() - t - log_fact).exp()
        }
    };
    // the integrand is below 1e-30 past this point
    let upper = tau.max(n as f64) + 80.0 + 4.0 * n as f64;
    // split at the mode so each piece is smooth and single-signed in slope
    let mode = (n as f64).max(tau);
    let mut acc = 0.0;
    let mut a = tau;
    for b in [mode, mode + 10.0, mode + 30.0, upper] {
        if b > a {
            acc += adaptive_simpson(&g, a, b, 1e-15);
            a = b;
        }
    }
    acc
}

fn suite_lambda(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut t = Tally::new("threshold coefficients vs quadrature", 1e-12);
    for &tau in &[0.1, 0.5, 1.0, 2.0, 3.7, 5.0] {
        let c = opts.table(tau, 10)?;
        for n in 0..=10 {
            let q = lambda_by_quadrature(tau, n);
            t.check((c.lambda(n) - q).abs(), || format!("tau={tau} n={n}"));
        }
        for n in 0..10 {
            // lambda saturates at 1.0 in double precision, the complement does not
            if c.complement(n + 1) >= c.complement(n) {
                t.fail(format!("complement not decreasing at tau={tau} n={n}"));
            }
        }
    }
    Ok(t.finish())
}

fn suite_eigen() -> Result<SuiteResult> {
    let mut t = Tally::new("eigensolver trace and Frobenius identities", 1e-10);
    let mut rng = StdRng::seed_from_u64(7);
    for dim in 1..=12 {
        let entries: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = SymMatrix::from_fn(dim, |i, j| entries[i * dim + j]);
        let eig = sym_eigvals(&m);
        t.check((eig.iter().sum::<f64>() - m.trace()).abs(), || {
            format!("trace, dim {dim}")
        });
        t.check(
            (eig.iter().map(|x| x * x).sum::<f64>() - m.frobenius_sq()).abs(),
            || format!("Frobenius, dim {dim}"),
        );
        // entropy is additive over blocks
        let a = SymMatrix::diagonal(
            &(0..dim)
                .map(|_| rng.gen_range(0.0..0.2))
                .collect::<Vec<_>>(),
        );
        let vecs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect())
            .collect();
        let b = SymMatrix::from_outer_products(dim, vecs.iter().map(|v| (1.0, v.as_slice())));
        let joint = SymMatrix::direct_sum(&[a.clone(), b.clone()]);
        let sum = vn_entropy(&a)? + vn_entropy(&b)?;
        t.check((vn_entropy(&joint)? - sum).abs(), || {
            format!("block additivity, dim {dim}")
        });
    }
    Ok(t.finish())
}

fn suite_fixtures() -> Result<SuiteResult> {
    let mut t = Tally::new("invariant states vs written-out matrices", 1e-12);
    let mut rng = StdRng::seed_from_u64(11);
    for j in 1..=3 {
        for _ in 0..20 {
            let f: f64 = rng.gen();
            let built = invariant_state(j, f)?;
            let printed = printed_invariant_state(j, f).expect("j <= 3");
            t.check(built.rho.max_abs_diff(&printed), || format!("j={j} f={f}"));
        }
    }
    Ok(t.finish())
}

fn suite_invariance() -> Result<SuiteResult> {
    let mut t = Tally::new("rotation invariance and marginals", 1e-12);
    let mut rng = StdRng::seed_from_u64(13);
    for j in 0..=8 {
        for _ in 0..5 {
            let f: f64 = rng.gen();
            let s = invariant_state(j, f)?;
            let dense = s.rho.to_dense();
            for g in [Generator::ZTot, Generator::PlusTot] {
                let comm = schwinger_total(j, g).commutator(&dense).frobenius();
                t.check(comm, || format!("commutator {g:?}, j={j} f={f}"));
            }
            t.check((s.rho.trace() - 1.0).abs(), || format!("trace, j={j}"));
            let half = SymMatrix::identity(2).scaled(0.5);
            t.check(s.alice_marginal().max_abs_diff(&half), || {
                format!("Alice marginal, j={j}")
            });
            let flat = SymMatrix::identity(j + 1).scaled(1.0 / (j + 1) as f64);
            t.check(s.bob_marginal().max_abs_diff(&flat), || {
                format!("Bob marginal, j={j}")
            });
            if j > 0 {
                t.check((mixing_parameter(&s.rho, j)? - f).abs(), || {
                    format!("f recovery, j={j}")
                });
            }
            let min_eig = sym_eigvals(&s.rho)[0];
            t.check((-min_eig).max(0.0), || format!("positivity, j={j}"));
        }
    }
    Ok(t.finish())
}

fn suite_closed_forms(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut t = Tally::new("closed-form relative entropies vs eigenvalues", 1e-9);
    for &tau in &[0.5, 0.8, 1.0, 1.5, 2.0] {
        let exact = lambda_coeffs(tau, 3)?;
        let table = opts.table(tau, 3)?;
        for j in 0..=3 {
            for &f in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                let numeric = rel_entropy_numeric(&invariant_state(j, f)?, &exact)?;
                let closed = rel_entropy_closed(j, f, &table)?;
                t.check((numeric - closed).abs(), || {
                    format!("tau={tau} j={j} f={f}")
                });
            }
        }
    }
    Ok(t.finish())
}

fn suite_yield_c(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut t = Tally::new("yields and error parameters vs matrix traces", 1e-12);
    for &tau in &[0.5, 1.0, 2.0] {
        let exact = lambda_coeffs(tau, 8)?;
        let table = opts.table(tau, 8)?;
        for j in 0..=8 {
            t.check(
                (sector_yield(&table, j)? - sector_yield_numeric(&exact, j)?).abs(),
                || format!("Y, tau={tau} j={j}"),
            );
            for &f in &[0.0, 0.5, 1.0] {
                let s = invariant_state(j, f)?;
                t.check(
                    (sector_c(&table, j, f)? - sector_c_numeric(&exact, &s)?).abs(),
                    || format!("c, tau={tau} j={j} f={f}"),
                );
            }
        }
    }
    Ok(t.finish())
}

fn suite_passive() -> Result<SuiteResult> {
    let mut t = Tally::new("passive-attack parameter round trip", 1e-11);
    for &tau in &[0.5, 1.0, 1.5, 2.0] {
        let c = lambda_coeffs(tau, 1)?;
        for i in 1..=10 {
            for k in 0..=10 {
                let (eta, f1) = (i as f64 / 10.0, k as f64 / 10.0);
                let r = passive_rate(eta, f1, &c)?;
                let (e2, f2) = passive_attack_params(r.q, r.c, &c)?;
                t.check((e2 - eta).abs().max((f2 - f1).abs()), || {
                    format!("tau={tau} eta={eta} f1={f1}")
                });
            }
        }
        let region = feasible_region(&c)?;
        for i in 0..=10 {
            let eta = i as f64 / 10.0;
            let lo = passive_rate(eta, 1.0, &c)?.c;
            let hi = passive_rate(eta, 0.0, &c)?.c;
            t.check((lo - region.c_min(eta)).abs(), || {
                format!("c_min, tau={tau} eta={eta}")
            });
            t.check((hi - region.c_max(eta)).abs(), || {
                format!("c_max, tau={tau} eta={eta}")
            });
        }
    }
    Ok(t.finish())
}

fn suite_qi() -> Result<SuiteResult> {
    let mut t = Tally::new("misalignment model agrees at zero misalignment", 1e-9);
    for &tau in &[0.5, 0.8, 1.2, 2.0] {
        let c = lambda_coeffs(tau, 1)?;
        for i in 1..=10 {
            let eta = i as f64 / 10.0;
            let a = qi_rate(eta, 0.0, &c)?.rate_signed;
            let b = passive_rate(eta, 1.0, &c)?.rate_signed;
            t.check((a - b).abs(), || format!("tau={tau} eta={eta}"));
        }
    }
    Ok(t.finish())
}

fn suite_gaussian() -> Result<SuiteResult> {
    let mut t = Tally::new("noisy-channel statistics vs sector matrices", 1e-10);
    for i in 0..10 {
        let eta = 0.05 + 0.1 * i as f64;
        for k in 0..10 {
            let n = 10f64.powf(-6.0 + 0.6 * k as f64);
            let stats = gaussian_stats(eta, n)?;
            for j in 0..=3 {
                let m = gaussian_sector_matrix(eta, n, j)?;
                let tr = m.trace();
                t.check((tr - stats.p[j]).abs(), || {
                    format!("P_{j}, eta={eta} N={n}")
                });
                let normalized = m.scaled(1.0 / tr);
                if j > 0 {
                    t.check(
                        (mixing_parameter(&normalized, j)? - stats.f[j]).abs(),
                        || format!("f_{j}, eta={eta} N={n}"),
                    );
                }
                let want = invariant_state(j, stats.f[j])?;
                t.check(normalized.max_abs_diff(&want.rho), || {
                    format!("state j={j}, eta={eta} N={n}")
                });
            }
        }
    }
    Ok(t.finish())
}

fn suite_additivity() -> Result<SuiteResult> {
    let mut t = Tally::new("relative entropy additive over sectors", 1e-10);
    let mut rng = StdRng::seed_from_u64(17);
    for &tau in &[0.7, 1.0, 1.8] {
        let c = lambda_coeffs(tau, 3)?;
        for _ in 0..5 {
            let mut w: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let mut parts: Vec<(f64, SectorState)> = Vec::with_capacity(4);
            for (j, &p) in w.iter().enumerate() {
                parts.push((p, invariant_state(j, rng.gen())?));
            }
            let joint = rel_entropy_mixture(&parts, &c)?;
            let mut sum = 0.0;
            for (p, s) in &parts {
                sum += p * rel_entropy_closed(s.j, s.f, &c)?;
            }
            t.check((joint - sum).abs(), || format!("tau={tau}"));
        }
    }
    Ok(t.finish())
}

/// Runs every suite. An internal error inside a suite counts as a failure.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteResult> {
    type Suite<'a> = (&'static str, Box<dyn Fn() -> Result<SuiteResult> + 'a>);
    let suites: Vec<Suite> = vec![
        (
            "threshold coefficients vs quadrature",
            Box::new(move || suite_lambda(opts)),
        ),
        (
            "eigensolver trace and Frobenius identities",
            Box::new(suite_eigen),
        ),
        (
            "invariant states vs written-out matrices",
            Box::new(suite_fixtures),
        ),
        (
            "rotation invariance and marginals",
            Box::new(suite_invariance),
        ),
        (
            "closed-form relative entropies vs eigenvalues",
            Box::new(move || suite_closed_forms(opts)),
        ),
        (
            "yields and error parameters vs matrix traces",
            Box::new(move || suite_yield_c(opts)),
        ),
        (
            "passive-attack parameter round trip",
            Box::new(suite_passive),
        ),
        (
            "misalignment model agrees at zero misalignment",
            Box::new(suite_qi),
        ),
        (
            "noisy-channel statistics vs sector matrices",
            Box::new(suite_gaussian),
        ),
        (
            "relative entropy additive over sectors",
            Box::new(suite_additivity),
        ),
    ];
    suites
        .into_iter()
        .map(|(name, run)| {
            run().unwrap_or_else(|e| SuiteResult {
                name,
                checks: 0,
                max_error: f64::INFINITY,
                tolerance: 0.0,
                failure: Some(format!("error: {e}")),
            })
        })
        .collect()
}

/// Human-readable report, one line per suite.
pub fn report(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status}  {:<48} {:>5} checks  max error {:.2e} (tol {:.0e})\n",
            r.name, r.checks, r.max_error, r.tolerance
        ));
        if let Some(f) = &r.failure {
            out.push_str(&format!("      first failure: {f}\n"));
        }
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    out.push_str(&format!("{} suites, {} failed\n", results.len(), failed));
    out
}
