//! Parameter sweeps producing CSV tables, and the number formatting they use.
//!
//! Every sweep evaluates its points on the current rayon pool and returns
//! rows in input order, so output is byte-identical across runs and thread
//! counts.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channels::{
    cv_upper_bound, db_from_eta, eta_from_db, feasible_region, gaussian_rate, passive_rate,
    plob_bound, pure_loss_rate, qi_equivalent_f1, qi_rate,
};
use crate::error::{Error, Result};
use crate::numerics::lambda_coeffs;
use crate::rates::{
    optimize_tau, tail_valid_tau_ceiling, ConstrainedMin, RateBreakdown, TAIL_HORIZON,
};

/// Formats like C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    fmt_g_prec(x, 12)
}

/// Formats like C's `%.<prec>g`.
pub fn fmt_g_prec(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let prec = prec.max(1);
    let sci = format!("{:.*e}", prec - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= prec as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (prec as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Error in a grid specification.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed grid '{spec}': {reason}")]
pub struct GridError {
    pub spec: String,
    pub reason: &'static str,
}

/// Parses `a,b,c`, `start:stop:count` (linear) or `start:stop:count:log`.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<f64>, GridError> {
    let err = |reason| GridError {
        spec: spec.to_string(),
        reason,
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err("not a number"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(err("expected start:stop:count[:log]"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| err("count must be a positive integer"))?;
        if n == 0 {
            return Err(err("count must be a positive integer"));
        }
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(err("scale must be 'lin' or 'log'")),
        };
        if log && (a <= 0.0 || b <= 0.0) {
            return Err(err("log grid needs positive endpoints"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        Ok((0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if log {
                    (a.ln() + t * (b.ln() - a.ln())).exp()
                } else {
                    a + t * (b - a)
                }
            })
            .collect())
    } else {
        let v = spec
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err(err("empty list"));
        }
        Ok(v)
    }
}

/// One CSV row.
pub type SweepRow = Vec<f64>;

/// A CSV table with `#` metadata lines and a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub meta: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        SweepTable {
            meta: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_g(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Threshold selection for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum TauChoice {
    /// Fixed thresholds; every point is evaluated at each of them.
    Fixed(Vec<f64>),
    /// Optimize within `[lo, hi]` at every point.
    Optimize { lo: f64, hi: f64 },
}

impl TauChoice {
    pub fn describe(&self) -> String {
        match self {
            TauChoice::Fixed(v) => {
                let s: Vec<String> = v.iter().map(|&t| fmt_g(t)).collect();
                format!("tau={}", s.join(","))
            }
            TauChoice::Optimize { lo, hi } => {
                format!("tau=opt in [{}, {}]", fmt_g(*lo), fmt_g(*hi))
            }
        }
    }
}

/// Best rate over `tau` (or the rate at each fixed `tau`) for one point.
fn evaluate(
    choice: &TauChoice,
    rate: impl Fn(f64) -> Result<RateBreakdown> + Sync,
) -> Result<Vec<RateBreakdown>> {
    match choice {
        TauChoice::Fixed(taus) => taus.iter().map(|&t| rate(t)).collect(),
        TauChoice::Optimize { lo, hi } => {
            let opt = optimize_tau(|t| Ok(rate(t)?.rate_signed), *lo, *hi)?;
            Ok(vec![rate(opt.tau)?])
        }
    }
}

/// Pure-loss rate at each transmissivity. Columns `eta, loss_db, tau, Q, E, rate`.
pub fn pure_loss_table(etas: &[f64], tau: &TauChoice) -> Result<SweepTable> {
    let rows: Vec<Vec<SweepRow>> = etas
        .par_iter()
        .map(|&eta| {
            let out = evaluate(tau, |t| pure_loss_rate(eta, &lambda_coeffs(t, 1)?))?;
            Ok(out
                .into_iter()
                .map(|r| vec![eta, db_from_eta(eta), r.tau, r.q, r.e, r.rate])
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(vec!["eta", "loss_db", "tau", "Q", "E", "rate"]);
    table.meta.push(tau.describe());
    table.rows = rows.into_iter().flatten().collect();
    Ok(table)
}

/// Boundary of the passive-attack region at each threshold, sampled on
/// `points` transmissivities. Columns `tau, eta, Q, c_min, c_max, c_passive`;
/// `c_passive` is the pure-loss value, which lies on the lower boundary.
pub fn region_table(taus: &[f64], points: usize) -> Result<SweepTable> {
    let points = points.max(2);
    let rows: Vec<Vec<SweepRow>> = taus
        .par_iter()
        .map(|&tau| {
            let coeffs = lambda_coeffs(tau, 1)?;
            let region = feasible_region(&coeffs)?;
            (0..points)
                .map(|i| {
                    let eta = i as f64 / (points - 1) as f64;
                    let pl = pure_loss_rate(eta, &coeffs)?;
                    Ok(vec![
                        tau,
                        eta,
                        region.q_of(eta),
                        region.c_min(eta),
                        region.c_max(eta),
                        pl.c,
                    ])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(vec!["tau", "eta", "Q", "c_min", "c_max", "c_passive"]);
    table.rows = rows.into_iter().flatten().collect();
    Ok(table)
}

/// Our passive rate with `f_1 = 1 - 3 Ed/2` against the virtual-detector model,
/// both threshold-optimized. Columns
/// `loss_db, Ed, rate_ours, rate_qi, plob, tau_ours, tau_qi`.
pub fn qi_compare_table(eds: &[f64], losses_db: &[f64], lo: f64, hi: f64) -> Result<SweepTable> {
    let points: Vec<(f64, f64)> = eds
        .iter()
        .flat_map(|&ed| losses_db.iter().map(move |&db| (ed, db)))
        .collect();
    let choice = TauChoice::Optimize { lo, hi };
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(ed, db)| {
            let eta = eta_from_db(db);
            let f1 = qi_equivalent_f1(ed);
            let ours = evaluate(&choice, |t| passive_rate(eta, f1, &lambda_coeffs(t, 1)?))?;
            let theirs = evaluate(&choice, |t| qi_rate(eta, ed, &lambda_coeffs(t, 1)?))?;
            Ok(vec![
                db,
                ed,
                ours[0].rate,
                theirs[0].rate,
                plob_bound(eta)?,
                ours[0].tau,
                theirs[0].tau,
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(vec![
        "loss_db",
        "Ed",
        "rate_ours",
        "rate_qi",
        "plob",
        "tau_ours",
        "tau_qi",
    ]);
    table.meta.push(choice.describe());
    table.rows = rows;
    Ok(table)
}

/// Largest threshold at which the three-photon tail bound holds.
pub fn gaussian_tau_ceiling() -> Result<f64> {
    tail_valid_tau_ceiling(3, 1.0, 10.0)
}

/// Rate under loss plus Gaussian noise against the reverse coherent
/// information. Columns
/// `loss_db, N, tau_opt, rate_hybrid, rate_cv_upper, qber_clamped`.
pub fn gaussian_table(noises: &[f64], losses_db: &[f64], tau: &TauChoice) -> Result<SweepTable> {
    let points: Vec<(f64, f64)> = noises
        .iter()
        .flat_map(|&n| losses_db.iter().map(move |&db| (n, db)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(n, db)| {
            let eta = eta_from_db(db);
            let out = evaluate(tau, |t| {
                gaussian_rate(eta, n, &lambda_coeffs(t, TAIL_HORIZON + 1)?)
            })?;
            let cv = cv_upper_bound(eta, n)?;
            Ok(out
                .into_iter()
                .map(|r| {
                    vec![
                        db,
                        n,
                        r.tau,
                        r.rate,
                        cv,
                        f64::from(u8::from(r.qber_clamped)),
                    ]
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(vec![
        "loss_db",
        "N",
        "tau_opt",
        "rate_hybrid",
        "rate_cv_upper",
        "qber_clamped",
    ]);
    table.meta.push(tau.describe());
    table.rows = rows.into_iter().flatten().collect();
    Ok(table)
}

/// Signed rate, threshold-optimized, for loss plus Gaussian noise.
pub fn gaussian_optimal_rate(eta: f64, n: f64, lo: f64, hi: f64) -> Result<RateBreakdown> {
    let opt = optimize_tau(
        |t| Ok(gaussian_rate(eta, n, &lambda_coeffs(t, TAIL_HORIZON + 1)?)?.rate_signed),
        lo,
        hi,
    )?;
    gaussian_rate(eta, n, &lambda_coeffs(opt.tau, TAIL_HORIZON + 1)?)
}

/// Finds the loss (dB) at which `signed_rate` crosses zero in `[lo_db, hi_db]`
/// by bisection; `None` if it does not change sign there.
pub fn zero_crossing_db(
    signed_rate: impl Fn(f64) -> Result<f64>,
    lo_db: f64,
    hi_db: f64,
    tol_db: f64,
) -> Result<Option<f64>> {
    let (mut a, mut b) = (lo_db, hi_db);
    let (fa, fb) = (signed_rate(a)?, signed_rate(b)?);
    if fa <= 0.0 || fb > 0.0 {
        return Ok(None);
    }
    while b - a > tol_db {
        let m = 0.5 * (a + b);
        if signed_rate(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// `key=value` lines for a constrained-minimization result.
pub fn format_estimate(res: &ConstrainedMin) -> String {
    let b = &res.breakdown;
    let join = |v: &[f64]| v.iter().map(|&x| fmt_g(x)).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    let _ = writeln!(out, "tau={}", fmt_g(b.tau));
    let _ = writeln!(out, "Q={}", fmt_g(b.q));
    let _ = writeln!(out, "c={}", fmt_g(b.c));
    let _ = writeln!(out, "E={}", fmt_g(b.e));
    let _ = writeln!(out, "f={}", join(&res.f[1..]));
    let _ = writeln!(out, "D_terms={}", join(&b.d_terms));
    let _ = writeln!(out, "D={}", fmt_g(b.relative_entropy()));
    let _ = writeln!(out, "leak={}", fmt_g(b.leak));
    let _ = writeln!(out, "rate_signed={}", fmt_g(b.rate_signed));
    let _ = writeln!(out, "rate={}", fmt_g(b.rate));
    let _ = writeln!(out, "qber_clamped={}", b.qber_clamped);
    let _ = writeln!(
        out,
        "certificate={} ({} feasible probes, best probe {})",
        if res.certificate.holds() {
            "ok"
        } else {
            "failed"
        },
        res.certificate.points,
        fmt_g(res.certificate.best_probe)
    );
    out
}

/// Converts a list given in dB or as transmissivities into transmissivities.
pub fn etas_from(eta: Option<Vec<f64>>, loss_db: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match (eta, loss_db) {
        (Some(e), None) => Ok(e),
        (None, Some(d)) => Ok(d.into_iter().map(eta_from_db).collect()),
        _ => Err(Error::Domain {
            name: "eta/loss_db",
            value: f64::NAN,
            expected: "exactly one of eta or loss_db",
        }),
    }
}
