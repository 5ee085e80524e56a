//! Pathwise stochastic integration on dyadic grids and the piecewise
//! quadratic mollifier family used by the local-time estimators.
//!
//! The convention `sign(0) = +1` is fixed crate-wide; it is the unique
//! zero-robust choice under which the discrete sign-change identity holds
//! for sequences containing exact zeros.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::path_model::PiecewiseLinearPath;
use crate::sampler::{random_brownian, stream_seed, Seed};
use crate::{Error, Result, MAX_LEVEL};

/// Sign with `sign(0) = +1`.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// First grid level tried by the adaptive integrator; below this, boundary
/// terms dominate and gap-based stopping is meaningless.
pub const START_LEVEL: u32 = 4;

/// The piecewise-quadratic smoothing of x -> max(x, 0) with corner width
/// `2 epsilon`, together with its derivatives and the mirrored complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    epsilon: f64,
}

impl Mollifier {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidEpsilon { epsilon });
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// 0 for x <= -eps, (x+eps)^2 / 4eps on the corner, x beyond.
    pub fn value(&self, x: f64) -> f64 {
        let e = self.epsilon;
        if x <= -e {
            0.0
        } else if x >= e {
            x
        } else {
            (x + e) * (x + e) / (4.0 * e)
        }
    }

    /// 0 for x <= -eps, (x+eps) / 2eps on the corner, 1 beyond.
    pub fn derivative(&self, x: f64) -> f64 {
        let e = self.epsilon;
        if x <= -e {
            0.0
        } else if x >= e {
            1.0
        } else {
            (x + e) / (2.0 * e)
        }
    }

    /// 1/2eps strictly inside the corner, 0 outside and at x = ±eps.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let e = self.epsilon;
        if x.abs() < e {
            1.0 / (2.0 * e)
        } else {
            0.0
        }
    }

    /// Mirrored family: -x for x <= -eps, (eps-x)^2 / 4eps on the corner,
    /// 0 beyond. Satisfies value(x) + complement(x) - |x| -> 0 as eps -> 0.
    pub fn complement(&self, x: f64) -> f64 {
        let e = self.epsilon;
        if x <= -e {
            -x
        } else if x >= e {
            0.0
        } else {
            (e - x) * (e - x) / (4.0 * e)
        }
    }
}

/// Integrand phi in integrals of phi(path(t)) d path(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrandSpec {
    Sign,
    IndicatorNonneg,
    IndicatorNonpos,
    MollifiedDerivative { epsilon: f64 },
    Constant { c: f64 },
}

impl IntegrandSpec {
    pub fn validate(&self) -> Result<()> {
        if let IntegrandSpec::MollifiedDerivative { epsilon } = self {
            Mollifier::new(*epsilon)?;
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            IntegrandSpec::Sign => sign0(x),
            IntegrandSpec::IndicatorNonneg => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            IntegrandSpec::IndicatorNonpos => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            IntegrandSpec::MollifiedDerivative { epsilon } => {
                let e = *epsilon;
                if x <= -e {
                    0.0
                } else if x >= e {
                    1.0
                } else {
                    (x + e) / (2.0 * e)
                }
            }
            IntegrandSpec::Constant { c } => *c,
        }
    }
}

impl FromStr for IntegrandSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s {
            "sign" => IntegrandSpec::Sign,
            "indplus" => IntegrandSpec::IndicatorNonneg,
            "indminus" => IntegrandSpec::IndicatorNonpos,
            other => {
                if let Some(eps) = other.strip_prefix("mollified:") {
                    let epsilon: f64 = eps.parse().map_err(|_| Error::Config {
                        field: "spec",
                        message: format!("bad epsilon in {other:?}"),
                    })?;
                    IntegrandSpec::MollifiedDerivative { epsilon }
                } else if let Some(c) = other.strip_prefix("const:") {
                    let c: f64 = c.parse().map_err(|_| Error::Config {
                        field: "spec",
                        message: format!("bad constant in {other:?}"),
                    })?;
                    IntegrandSpec::Constant { c }
                } else {
                    return Err(Error::Config {
                        field: "spec",
                        message: format!(
                            "unknown integrand {other:?} (want sign|indplus|indminus|mollified:EPS|const:C)"
                        ),
                    });
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrandSpec::Sign => write!(f, "sign"),
            IntegrandSpec::IndicatorNonneg => write!(f, "indplus"),
            IntegrandSpec::IndicatorNonpos => write!(f, "indminus"),
            IntegrandSpec::MollifiedDerivative { epsilon } => write!(f, "mollified:{epsilon}"),
            IntegrandSpec::Constant { c } => write!(f, "const:{c}"),
        }
    }
}

/// The left-endpoint step function values phi(path(k / 2^n)) for
/// k = 0 .. 2^n - 1.
pub fn simple_integrand(
    spec: IntegrandSpec,
    path: &PiecewiseLinearPath,
    n: u32,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if n > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: n,
            cap: MAX_LEVEL,
        });
    }
    Ok((0..1u64 << n)
        .map(|k| spec.eval(path.sample_dyadic(k, n)))
        .collect())
}

/// Level-`n` Riemann sum of phi(path) d path up to `t`: left-endpoint
/// weights over complete cells plus the boundary term
/// `phi(path(l 2^-n)) (path(t) - path(l 2^-n))`, `l = floor(2^n t)`.
pub fn riemann_integral(
    spec: IntegrandSpec,
    path: &PiecewiseLinearPath,
    t: f64,
    n: u32,
) -> Result<f64> {
    spec.validate()?;
    if n > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: n,
            cap: MAX_LEVEL,
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain { value: t });
    }
    let cells = 1u64 << n;
    let ell = ((t * cells as f64).floor() as u64).min(cells);
    let mut prev = path.sample_dyadic(0, n);
    let mut acc = 0.0;
    for k in 1..=ell {
        let cur = path.sample_dyadic(k, n);
        acc += spec.eval(prev) * (cur - prev);
        prev = cur;
    }
    let value_at_t = path.eval_unchecked(t);
    acc += spec.eval(prev) * (value_at_t - prev);
    Ok(acc)
}

/// Outcome of the adaptive grid refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralResult {
    pub value: f64,
    /// Grid level of the reported value.
    pub grid_level: u32,
    /// Last successive-level deviation |I_n - I_{n-1}| (infinite when only a
    /// single level fit under `max_level`).
    pub cauchy_gap: f64,
    pub converged: bool,
    /// Full gap history (level, gap) for rate diagnostics.
    pub gaps: Vec<(u32, f64)>,
}

/// Iterates Riemann sums over grid levels until successive values differ by
/// at most `tol` or `max_level` is reached. Non-convergence is reported in
/// the flag, never raised: the theoretical limit is only guaranteed for
/// Brownian-like paths.
pub fn pathwise_integral(
    spec: IntegrandSpec,
    path: &PiecewiseLinearPath,
    t: f64,
    tol: f64,
    max_level: u32,
) -> Result<IntegralResult> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidTolerance { tol });
    }
    if max_level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: max_level,
            cap: MAX_LEVEL,
        });
    }
    let n0 = START_LEVEL.min(max_level);
    let mut value = riemann_integral(spec, path, t, n0)?;
    let mut grid_level = n0;
    let mut cauchy_gap = f64::INFINITY;
    let mut converged = false;
    let mut gaps = Vec::new();
    for n in (n0 + 1)..=max_level {
        let next = riemann_integral(spec, path, t, n)?;
        cauchy_gap = (next - value).abs();
        gaps.push((n, cauchy_gap));
        value = next;
        grid_level = n;
        if cauchy_gap <= tol {
            converged = true;
            break;
        }
    }
    Ok(IntegralResult {
        value,
        grid_level,
        cauchy_gap,
        converged,
        gaps,
    })
}

/// One row of the mollifier expectation-bound table.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MollifierBoundRow {
    pub n: u32,
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MollifierBoundTable {
    pub rows: Vec<MollifierBoundRow>,
    pub paths: u64,
    pub max_level: u32,
    pub quadrature_refine: u32,
}

/// Trapezoid subcells per path cell in the bound estimator. The path value
/// at t = 0 is exactly 0, where the squared mismatch is 1/4 regardless of
/// epsilon; on the raw path grid that single node carries enough weight to
/// bias the estimate above the bound for small epsilon, so the quadrature
/// runs on a 16x finer dyadic grid (still exact on the piecewise-linear
/// path).
pub const BOUND_QUADRATURE_REFINE: u32 = 16;

/// Monte Carlo estimates of the mean squared mismatch between the mollified
/// derivative at `epsilon = 2^-n` and the closed half-line indicator, along
/// seeded Gaussian paths, with the analytic bound `epsilon / (3 sqrt(2 pi))`
/// per row.
pub fn mollifier_expectation_bound(
    n_range: RangeInclusive<u32>,
    paths: u64,
    max_level: u32,
    seed: Seed,
) -> Result<MollifierBoundTable> {
    if paths < 1000 {
        return Err(Error::TooFewSamples {
            got: paths,
            min: 1000,
        });
    }
    if max_level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: max_level,
            cap: MAX_LEVEL,
        });
    }
    let ns: Vec<u32> = n_range.collect();
    if ns.is_empty() {
        return Err(Error::Config {
            field: "levels",
            message: "empty mollifier index range".into(),
        });
    }
    if let Some(bad) = ns.iter().find(|n| **n > 60) {
        return Err(Error::LevelOverflow {
            level: *bad,
            cap: 60,
        });
    }
    // Epsilons in decreasing order so the inner loop can stop early.
    let eps: Vec<f64> = ns.iter().map(|n| (0.5f64).powi(*n as i32)).collect();

    let per_path: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let coeffs = random_brownian(max_level, stream_seed(seed, i))
                .expect("level validated above");
            let path = coeffs.partial_sum(max_level).expect("level in range");
            mismatch_integrals(path.values(), &eps)
        })
        .collect();

    let rows = ns
        .iter()
        .zip(&eps)
        .enumerate()
        .map(|(col, (&n, &epsilon))| {
            let mut sum = 0.0;
            for row in &per_path {
                sum += row[col];
            }
            let mean = sum / paths as f64;
            let mut ss = 0.0;
            for row in &per_path {
                let d = row[col] - mean;
                ss += d * d;
            }
            let std_error = (ss / (paths as f64 - 1.0)).sqrt() / (paths as f64).sqrt();
            let bound = epsilon / (3.0 * (2.0 * std::f64::consts::PI).sqrt());
            MollifierBoundRow {
                n,
                epsilon,
                estimate: mean,
                std_error,
                bound,
                satisfied: mean <= bound + 3.0 * std_error,
            }
        })
        .collect();

    Ok(MollifierBoundTable {
        rows,
        paths,
        max_level,
        quadrature_refine: BOUND_QUADRATURE_REFINE,
    })
}

/// Trapezoid of (mollified derivative - indicator)^2 along one path for all
/// epsilons at once; `eps` must be decreasing. The squared mismatch equals
/// (1 - |w|/eps)^2 / 4 inside the band and 0 outside.
fn mismatch_integrals(samples: &[f64], eps: &[f64]) -> Vec<f64> {
    let refine = BOUND_QUADRATURE_REFINE as usize;
    let cells = samples.len() - 1;
    let h_sub = 1.0 / (cells * refine) as f64;
    let mut acc = vec![0.0f64; eps.len()];
    let add = |w: f64, weight: f64, acc: &mut [f64]| {
        let a = w.abs();
        for (slot, &e) in eps.iter().enumerate() {
            if a >= e {
                break;
            }
            let g = 1.0 - a / e;
            acc[slot] += weight * g * g;
        }
    };
    let inv = 1.0 / refine as f64;
    for c in 0..cells {
        let v0 = samples[c];
        let dv = samples[c + 1] - v0;
        for r in 0..refine {
            let weight = if c == 0 && r == 0 { 0.5 } else { 1.0 };
            add(v0 + (r as f64 * inv) * dv, weight, &mut acc);
        }
    }
    add(samples[cells], 0.5, &mut acc);
    acc.into_iter().map(|a| 0.25 * a * h_sub).collect()
}
