//! Three local-time estimators for piecewise-linear paths — shrinking-band
//! occupation density, the Tanaka stochastic-integral form, and the dyadic
//! sign-change sum — plus the exact discrete identity linking them and a
//! cross-validation report.
//!
//! The sign-change sum at grid level `m` and the level-`m` discretization of
//! the Tanaka form are the *same number* at dyadic horizons: that is the
//! discrete identity, exact for any real sequence, not just in the limit.

use serde::Serialize;

use crate::integration::{
    pathwise_integral, riemann_integral, sign0, IntegralResult, IntegrandSpec,
};
use crate::occupation::{occupation_density_estimate, segment_band_time};
use crate::path_model::PiecewiseLinearPath;
use crate::{Error, Result, MAX_LEVEL};

/// Indices `k` in `1..=ell` where the sign of the samples flips
/// (with sign(0) = +1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignChangeSet {
    pub indices: Vec<usize>,
    pub ell: usize,
}

/// Sign-flip indices of a sample sequence up to horizon index `ell`.
pub fn sign_change_set(samples: &[f64], ell: usize) -> Result<SignChangeSet> {
    if samples.is_empty() || ell > samples.len() - 1 {
        return Err(Error::HorizonOutOfRange {
            ell,
            max: samples.len().saturating_sub(1),
        });
    }
    let mut indices = Vec::new();
    let mut prev = sign0(samples[0]);
    for (k, s) in samples.iter().enumerate().take(ell + 1).skip(1) {
        let cur = sign0(*s);
        if cur != prev {
            indices.push(k);
        }
        prev = cur;
    }
    Ok(SignChangeSet { indices, ell })
}

/// Twice the sum of |samples[k]| over sign flips k <= ell.
fn flip_sum(samples: &[f64], ell: usize) -> f64 {
    let mut acc = 0.0;
    let mut prev = sign0(samples[0]);
    for s in samples.iter().take(ell + 1).skip(1) {
        let cur = sign0(*s);
        if cur != prev {
            acc += 2.0 * s.abs();
        }
        prev = cur;
    }
    acc
}

/// Sign-change estimator at grid level `m`:
/// `2 * sum |path(k/2^m)|` over the flips up to `floor(t 2^m)`.
pub fn local_time_sign_change(path: &PiecewiseLinearPath, t: f64, m: u32) -> Result<f64> {
    if m > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: m,
            cap: MAX_LEVEL,
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain { value: t });
    }
    let cells = 1u64 << m;
    let ell = ((t * cells as f64).floor() as u64).min(cells);
    let mut acc = 0.0;
    let mut prev = sign0(path.sample_dyadic(0, m));
    for k in 1..=ell {
        let s = path.sample_dyadic(k, m);
        let cur = sign0(s);
        if cur != prev {
            acc += 2.0 * s.abs();
        }
        prev = cur;
    }
    Ok(acc)
}

/// Tanaka estimate with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TanakaEstimate {
    pub value: f64,
    pub integral: IntegralResult,
}

/// Tanaka estimator `|path(t)| - integral of sign(path) d path`, the integral
/// computed adaptively. Finite-level values may be slightly negative; the
/// deficit is controlled by the reported Cauchy gap.
pub fn local_time_tanaka(
    path: &PiecewiseLinearPath,
    t: f64,
    tol: f64,
    max_level: u32,
) -> Result<TanakaEstimate> {
    let integral = pathwise_integral(IntegrandSpec::Sign, path, t, tol, max_level)?;
    let value = path.eval(t)?.abs() - integral.value;
    Ok(TanakaEstimate { value, integral })
}

/// Occupation-density estimator at level `x` with band half-width `2^-n`.
pub fn local_time_occupation(path: &PiecewiseLinearPath, t: f64, n: u32, x: f64) -> Result<f64> {
    occupation_density_estimate(path, t, x, n)
}

/// The two one-sided estimates and their integral diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OneSidedEstimates {
    pub plus: f64,
    pub minus: f64,
    pub plus_integral: IntegralResult,
    pub minus_integral: IntegralResult,
}

/// One-sided forms: `2 [path(t)^+ - integral of 1_{>=0}(path) d path]` and
/// `2 [path(t)^- + integral of 1_{<=0}(path) d path]`.
///
/// The two integrals refine *jointly* and stop at a shared grid level (both
/// gaps under `tol`, or `max_level`): at a shared level their average equals
/// the level's Tanaka discretization exactly, up to the first-cell increment
/// (the only grid sample at exactly 0 is t = 0).
pub fn one_sided_formulas(
    path: &PiecewiseLinearPath,
    t: f64,
    tol: f64,
    max_level: u32,
) -> Result<OneSidedEstimates> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidTolerance { tol });
    }
    if max_level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: max_level,
            cap: MAX_LEVEL,
        });
    }
    let n0 = crate::integration::START_LEVEL.min(max_level);
    let mut iplus = riemann_integral(IntegrandSpec::IndicatorNonneg, path, t, n0)?;
    let mut iminus = riemann_integral(IntegrandSpec::IndicatorNonpos, path, t, n0)?;
    let mut grid_level = n0;
    let (mut gap_plus, mut gap_minus) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let (mut gaps_plus, mut gaps_minus) = (Vec::new(), Vec::new());
    for n in (n0 + 1)..=max_level {
        let next_plus = riemann_integral(IntegrandSpec::IndicatorNonneg, path, t, n)?;
        let next_minus = riemann_integral(IntegrandSpec::IndicatorNonpos, path, t, n)?;
        gap_plus = (next_plus - iplus).abs();
        gap_minus = (next_minus - iminus).abs();
        gaps_plus.push((n, gap_plus));
        gaps_minus.push((n, gap_minus));
        iplus = next_plus;
        iminus = next_minus;
        grid_level = n;
        if gap_plus.max(gap_minus) <= tol {
            converged = true;
            break;
        }
    }
    let wt = path.eval(t)?;
    let plus = 2.0 * (wt.max(0.0) - iplus);
    let minus = 2.0 * ((-wt).max(0.0) + iminus);
    Ok(OneSidedEstimates {
        plus,
        minus,
        plus_integral: IntegralResult {
            value: iplus,
            grid_level,
            cauchy_gap: gap_plus,
            converged,
            gaps: gaps_plus,
        },
        minus_integral: IntegralResult {
            value: iminus,
            grid_level,
            cauchy_gap: gap_minus,
            converged,
            gaps: gaps_minus,
        },
    })
}

/// Both sides of the exact discrete identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TanakaIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

/// For any reals t_0..t_N (N >= 1), with sign(0) = +1:
///
/// `|t_N| - sum_k sign(t_{k-1})(t_k - t_{k-1})  =  |t_0| + 2 sum_{flips} |t_k|`.
///
/// The left side carries |t_0|, not t_0: the unsigned form is the one that
/// holds for negative starts (try [-1, 1]); both agree whenever t_0 = 0,
/// which is the only case the estimators use.
pub fn discrete_tanaka_identity(seq: &[f64]) -> Result<TanakaIdentity> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            len: seq.len(),
            min: 2,
        });
    }
    let mut integral = 0.0;
    for w in seq.windows(2) {
        integral += sign0(w[0]) * (w[1] - w[0]);
    }
    let lhs = seq.last().unwrap().abs() - integral;
    let rhs = seq[0].abs() + flip_sum(seq, seq.len() - 1);
    Ok(TanakaIdentity { lhs, rhs })
}

/// Estimator choice for a local-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveMethod {
    /// Band occupation with half-width 2^-n.
    Occupation { n: u32 },
    /// Tanaka form discretized at grid level n.
    Tanaka { n: u32 },
    /// Sign-change sum at grid level m.
    SignChange { m: u32 },
}

/// A local-time curve `t -> L(t)` sampled on the dyadic grid `k / 2^grid_level`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalTimeCurve {
    pub grid_level: u32,
    /// `values[k]` estimates the local time at `t = k / 2^grid_level`.
    pub values: Vec<f64>,
    pub method: CurveMethod,
    /// Level at which local time is estimated (paths are shifted by -x
    /// internally; the Tanaka form carries the |x| start correction).
    pub x: f64,
}

/// Evaluates the chosen estimator at every `t = k / 2^grid_level`.
/// Occupation and sign-change curves are nondecreasing by construction.
pub fn local_time_curve(
    path: &PiecewiseLinearPath,
    method: CurveMethod,
    grid_level: u32,
    x: f64,
) -> Result<LocalTimeCurve> {
    if grid_level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: grid_level,
            cap: MAX_LEVEL,
        });
    }
    let values = match method {
        CurveMethod::SignChange { m } => sign_change_curve(path, m, grid_level, x)?,
        CurveMethod::Occupation { n } => occupation_curve(path, n, grid_level, x)?,
        CurveMethod::Tanaka { n } => tanaka_curve(path, n, grid_level, x)?,
    };
    Ok(LocalTimeCurve {
        grid_level,
        values,
        method,
        x,
    })
}

fn checked_level(level: u32) -> Result<u32> {
    if level > MAX_LEVEL {
        Err(Error::LevelOverflow {
            level,
            cap: MAX_LEVEL,
        })
    } else {
        Ok(level)
    }
}

/// Horizon index floor(t_i 2^m) for checkpoint i of the curve grid, exact in
/// integer arithmetic.
fn horizon_index(i: usize, grid_level: u32, m: u32) -> usize {
    if m >= grid_level {
        i << (m - grid_level)
    } else {
        i >> (grid_level - m)
    }
}

fn sign_change_curve(
    path: &PiecewiseLinearPath,
    m: u32,
    grid_level: u32,
    x: f64,
) -> Result<Vec<f64>> {
    checked_level(m)?;
    let cells = 1usize << m;
    // Prefix flip sums of the shifted samples.
    let mut prefix = Vec::with_capacity(cells + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    let mut prev = sign0(path.sample_dyadic(0, m) - x);
    for k in 1..=cells {
        let s = path.sample_dyadic(k as u64, m) - x;
        let cur = sign0(s);
        if cur != prev {
            acc += 2.0 * s.abs();
        }
        prev = cur;
        prefix.push(acc);
    }
    Ok((0..=(1usize << grid_level))
        .map(|i| prefix[horizon_index(i, grid_level, m)])
        .collect())
}

fn occupation_curve(
    path: &PiecewiseLinearPath,
    n: u32,
    grid_level: u32,
    x: f64,
) -> Result<Vec<f64>> {
    if n > 60 {
        return Err(Error::LevelOverflow { level: n, cap: 60 });
    }
    let eps = (0.5f64).powi(n as i32);
    let (lo, hi) = (x - eps, x + eps);
    let npoints = (1usize << grid_level) + 1;
    let scale = (1u64 << grid_level) as f64;
    let checkpoint = |i: usize| i as f64 / scale;
    let mut values = vec![0.0f64; npoints];
    let mut acc = 0.0;
    let mut ci = 1usize;
    for seg in path.segments() {
        let mut t0 = seg.t0;
        let mut v0 = seg.v0;
        while ci < npoints && checkpoint(ci) <= seg.t1 {
            let tc = checkpoint(ci);
            let vc = if tc == seg.t1 {
                seg.v1
            } else {
                seg.v0 + (tc - seg.t0) / (seg.t1 - seg.t0) * (seg.v1 - seg.v0)
            };
            acc += segment_band_time(t0, tc, v0, vc, lo, hi);
            values[ci] = acc / (2.0 * eps);
            t0 = tc;
            v0 = vc;
            ci += 1;
        }
        acc += segment_band_time(t0, seg.t1, v0, seg.v1, lo, hi);
    }
    Ok(values)
}

fn tanaka_curve(
    path: &PiecewiseLinearPath,
    n: u32,
    grid_level: u32,
    x: f64,
) -> Result<Vec<f64>> {
    checked_level(n)?;
    let cells = 1usize << n;
    // Prefix sums of sign(s_{k-1})(s_k - s_{k-1}) over the shifted samples.
    let mut shifted = Vec::with_capacity(cells + 1);
    for k in 0..=cells {
        shifted.push(path.sample_dyadic(k as u64, n) - x);
    }
    let mut prefix = Vec::with_capacity(cells + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for w in shifted.windows(2) {
        acc += sign0(w[0]) * (w[1] - w[0]);
        prefix.push(acc);
    }
    let x_abs = x.abs();
    Ok((0..=(1usize << grid_level))
        .map(|i| {
            let wi = path.sample_dyadic(i as u64, grid_level) - x;
            let ell = horizon_index(i, grid_level, n);
            let boundary = sign0(shifted[ell]) * (wi - shifted[ell]);
            wi.abs() - x_abs - (prefix[ell] + boundary)
        })
        .collect())
}

/// Pairwise comparison of the three estimators at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossValidation {
    pub occupation: f64,
    pub tanaka: f64,
    pub sign_change: f64,
    pub dev_occupation_tanaka: f64,
    pub dev_occupation_sign: f64,
    pub dev_tanaka_sign: f64,
    pub max_pairwise_dev: f64,
    /// Sign-change grid level.
    pub sign_level: u32,
    /// Occupation band exponent (half-width 2^-n).
    pub occupation_level: u32,
    /// Level at which the Tanaka integral stopped.
    pub tanaka_level: u32,
    pub tanaka_gap: f64,
    pub tanaka_converged: bool,
}

/// Runs all three estimators at time `t`: occupation with band `2^-n`,
/// sign-change at level `m`, Tanaka adaptively up to level `m`.
///
/// Agreement is only promised for Brownian-like paths; smooth paths get
/// occupation density without commensurate Tanaka/sign-change mass, and the
/// report simply states the numbers.
pub fn cross_validate(
    path: &PiecewiseLinearPath,
    t: f64,
    m: u32,
    n: u32,
    tol: f64,
) -> Result<CrossValidation> {
    let occupation = local_time_occupation(path, t, n, 0.0)?;
    let tanaka = local_time_tanaka(path, t, tol, m)?;
    let sign_change = local_time_sign_change(path, t, m)?;
    let dev_occupation_tanaka = (occupation - tanaka.value).abs();
    let dev_occupation_sign = (occupation - sign_change).abs();
    let dev_tanaka_sign = (tanaka.value - sign_change).abs();
    Ok(CrossValidation {
        occupation,
        tanaka: tanaka.value,
        sign_change,
        dev_occupation_tanaka,
        dev_occupation_sign,
        dev_tanaka_sign,
        max_pairwise_dev: dev_occupation_tanaka
            .max(dev_occupation_sign)
            .max(dev_tanaka_sign),
        sign_level: m,
        occupation_level: n,
        tanaka_level: tanaka.integral.grid_level,
        tanaka_gap: tanaka.integral.cauchy_gap,
        tanaka_converged: tanaka.integral.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::riemann_integral;
    use crate::path_model::BinaryCode;
    use crate::sampler::{random_brownian, Seed};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tent() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_code(&BinaryCode::parse("10").unwrap()).unwrap()
    }

    fn identity() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_uniform_values(vec![0.0, 1.0]).unwrap()
    }

    fn gaussian_path(level: u32, seed: u64) -> PiecewiseLinearPath {
        random_brownian(level, Seed(seed))
            .unwrap()
            .partial_sum(level)
            .unwrap()
    }

    #[test]
    fn sign_change_set_examples() {
        let samples = [0.0, 0.5, -0.25, 0.25, -0.5];
        let set = sign_change_set(&samples, 4).unwrap();
        assert_eq!(set.indices, vec![2, 3, 4]);

        let set = sign_change_set(&[0.0, 1.0, 2.0, 0.5], 3).unwrap();
        assert!(set.indices.is_empty());

        let set = sign_change_set(&[0.0, -1.0], 1).unwrap();
        assert_eq!(set.indices, vec![1]);

        assert!(matches!(
            sign_change_set(&samples, 5),
            Err(Error::HorizonOutOfRange { .. })
        ));
    }

    #[test]
    fn sign_change_estimator_examples() {
        for m in [1u32, 4, 10] {
            assert_eq!(local_time_sign_change(&tent(), 1.0, m).unwrap(), 0.0);
        }
        let path =
            PiecewiseLinearPath::from_uniform_values(vec![0.0, 0.5, -0.25, 0.25, -0.5]).unwrap();
        assert_abs_diff_eq!(
            local_time_sign_change(&path, 1.0, 2).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(local_time_sign_change(&path, 0.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn identity_examples() {
        let id = discrete_tanaka_identity(&[1.0, -1.0]).unwrap();
        assert_eq!((id.lhs, id.rhs), (3.0, 3.0));
        let id = discrete_tanaka_identity(&[2.0, -1.0, 3.0]).unwrap();
        assert_eq!((id.lhs, id.rhs), (10.0, 10.0));
        let id = discrete_tanaka_identity(&[0.0, 5.0]).unwrap();
        assert_eq!((id.lhs, id.rhs), (0.0, 0.0));
        // The case that forces |t_0| over t_0.
        let id = discrete_tanaka_identity(&[-1.0, 1.0]).unwrap();
        assert_eq!((id.lhs, id.rhs), (3.0, 3.0));
        assert!(matches!(
            discrete_tanaka_identity(&[1.0]),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn tanaka_examples() {
        let est = local_time_tanaka(&identity(), 1.0, 1e-9, 12).unwrap();
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-12);
        let est = local_time_tanaka(&tent(), 1.0, 1e-9, 12).unwrap();
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tanaka_equals_sign_change_on_matching_grids() {
        // At dyadic horizons the discrete identity makes the level-m Tanaka
        // discretization and the level-m sign-change sum the same number.
        let path = gaussian_path(14, 90210);
        for t in [0.25, 0.5, 0.75, 1.0] {
            let grid_tanaka = path.eval(t).unwrap().abs()
                - riemann_integral(IntegrandSpec::Sign, &path, t, 14).unwrap();
            let sign = local_time_sign_change(&path, t, 14).unwrap();
            assert!(
                (grid_tanaka - sign).abs() <= 1e-10,
                "grid identity violated at t={t}: {grid_tanaka} vs {sign}"
            );
        }
    }

    #[test]
    fn one_sided_on_monotone_and_vee_paths() {
        let est = one_sided_formulas(&identity(), 1.0, 1e-6, 20).unwrap();
        assert_abs_diff_eq!(est.plus, 0.0, epsilon = 1e-12);
        assert!(est.minus.abs() <= 1e-5, "minus = {}", est.minus);

        let vee = PiecewiseLinearPath::from_code(&BinaryCode::parse("01").unwrap()).unwrap();
        let est = one_sided_formulas(&vee, 1.0, 1e-6, 20).unwrap();
        assert!(est.plus.abs() <= 1e-5, "plus = {}", est.plus);

        let est = one_sided_formulas(&tent(), 0.0, 1e-6, 12).unwrap();
        assert_eq!((est.plus, est.minus), (0.0, 0.0));
    }

    #[test]
    fn one_sided_average_matches_tanaka_up_to_the_origin_cell() {
        // On a shared grid level the half-line indicators differ from the
        // sign only at the zero sample k = 0, so the averaged one-sided
        // forms and the Tanaka form differ by exactly the first increment.
        let path = gaussian_path(12, 777);
        let t = 1.0;
        let n = 12u32;
        let iplus =
            riemann_integral(IntegrandSpec::IndicatorNonneg, &path, t, n).unwrap();
        let iminus =
            riemann_integral(IntegrandSpec::IndicatorNonpos, &path, t, n).unwrap();
        let isign = riemann_integral(IntegrandSpec::Sign, &path, t, n).unwrap();
        let wt = path.eval(t).unwrap();
        let plus = 2.0 * (wt.max(0.0) - iplus);
        let minus = 2.0 * ((-wt).max(0.0) + iminus);
        let avg = 0.5 * (plus + minus);
        let tanaka = wt.abs() - isign;
        assert_abs_diff_eq!(avg - tanaka, path.sample_dyadic(1, n), epsilon = 1e-12);
    }

    #[test]
    fn one_sided_pair_shares_a_grid_and_averages_to_tanaka() {
        let path = gaussian_path(12, 777);
        let t = 1.0;
        let sides = one_sided_formulas(&path, t, 1e-4, 12).unwrap();
        assert_eq!(
            sides.plus_integral.grid_level,
            sides.minus_integral.grid_level
        );
        let level = sides.plus_integral.grid_level;
        let avg = 0.5 * (sides.plus + sides.minus);
        let tanaka_at_level = path.eval(t).unwrap().abs()
            - riemann_integral(IntegrandSpec::Sign, &path, t, level).unwrap();
        let first = path.sample_dyadic(1, level);
        assert_abs_diff_eq!(avg - tanaka_at_level, first, epsilon = 1e-12);
        // The level mismatch term is within the pair's Cauchy gaps here.
        assert!(
            (avg - tanaka_at_level).abs()
                <= sides.plus_integral.cauchy_gap + sides.minus_integral.cauchy_gap
        );
    }

    #[test]
    fn tanaka_is_bounded_below_by_its_gap() {
        for seed in 0..20u64 {
            let path = gaussian_path(12, 4000 + seed);
            let est = local_time_tanaka(&path, 1.0, 1e-4, 12).unwrap();
            assert!(
                est.value >= -(est.integral.cauchy_gap + 1e-9),
                "seed {seed}: value {} gap {}",
                est.value,
                est.integral.cauchy_gap
            );
        }
    }

    #[test]
    fn curves_start_at_zero_and_monotone_methods_are_monotone() {
        let path = gaussian_path(12, 31);
        for method in [
            CurveMethod::SignChange { m: 10 },
            CurveMethod::Occupation { n: 6 },
            CurveMethod::Tanaka { n: 10 },
        ] {
            let curve = local_time_curve(&path, method, 8, 0.0).unwrap();
            assert_eq!(curve.values[0], 0.0);
            assert_eq!(curve.values.len(), 257);
            if !matches!(method, CurveMethod::Tanaka { .. }) {
                for w in curve.values.windows(2) {
                    assert!(w[1] >= w[0] - 1e-15, "curve not monotone: {w:?}");
                }
            }
        }
        let flat = local_time_curve(&tent(), CurveMethod::SignChange { m: 8 }, 6, 0.0).unwrap();
        assert!(flat.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn occupation_curve_endpoint_matches_point_estimator() {
        let path = gaussian_path(12, 57);
        let curve = local_time_curve(&path, CurveMethod::Occupation { n: 6 }, 8, 0.0).unwrap();
        let direct = local_time_occupation(&path, 1.0, 6, 0.0).unwrap();
        assert_abs_diff_eq!(*curve.values.last().unwrap(), direct, epsilon = 1e-12);
        // Interior checkpoints agree with fresh point queries too.
        for i in [1usize, 77, 200] {
            let t = i as f64 / 256.0;
            assert_abs_diff_eq!(
                curve.values[i],
                local_time_occupation(&path, t, 6, 0.0).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn shifted_level_semantics() {
        let path = gaussian_path(10, 4242);
        let x = 0.21;
        let m = 9u32;
        let curve = local_time_curve(&path, CurveMethod::SignChange { m }, m, x).unwrap();
        // Manual flip sum of the shifted samples.
        let samples: Vec<f64> = path.samples_at_level(m).iter().map(|s| s - x).collect();
        let mut acc = 0.0;
        let mut prev = sign0(samples[0]);
        for (k, s) in samples.iter().enumerate().skip(1) {
            let cur = sign0(*s);
            if cur != prev {
                acc += 2.0 * s.abs();
            }
            prev = cur;
            assert_abs_diff_eq!(curve.values[k], acc, epsilon = 1e-12);
        }
        // Occupation at level x equals a band query centered at x.
        let occ = local_time_occupation(&path, 1.0, 5, x).unwrap();
        let curve = local_time_curve(&path, CurveMethod::Occupation { n: 5 }, 4, x).unwrap();
        assert_abs_diff_eq!(*curve.values.last().unwrap(), occ, epsilon = 1e-12);
    }

    #[test]
    fn tanaka_curve_matches_sign_curve_at_matching_levels() {
        let path = gaussian_path(12, 8);
        let m = 11u32;
        let sign = local_time_curve(&path, CurveMethod::SignChange { m }, m, 0.0).unwrap();
        let tan = local_time_curve(&path, CurveMethod::Tanaka { n: m }, m, 0.0).unwrap();
        for (a, b) in sign.values.iter().zip(&tan.values) {
            assert!((a - b).abs() <= 1e-10, "curve identity violated: {a} vs {b}");
        }
    }

    #[test]
    fn cross_validation_reports_smooth_path_disagreement() {
        let report = cross_validate(&identity(), 1.0, 12, 12, 1e-9).unwrap();
        assert_abs_diff_eq!(report.occupation, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.tanaka, 0.0, epsilon = 1e-12);
        assert_eq!(report.sign_change, 0.0);
        assert_abs_diff_eq!(report.max_pairwise_dev, 0.5, epsilon = 1e-12);

        let report = cross_validate(&identity(), 0.0, 10, 10, 1e-9).unwrap();
        assert_eq!(
            (report.occupation, report.tanaka, report.sign_change),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn cross_validation_agrees_on_brownian_paths() {
        let path = gaussian_path(14, 20240810);
        let report = cross_validate(&path, 1.0, 14, 7, 1e-15).unwrap();
        assert!(report.dev_tanaka_sign <= 1e-12);
        assert!(
            report.max_pairwise_dev <= 0.25,
            "estimators far apart: {report:?}"
        );
    }

    proptest! {
        // The discrete identity is exact for arbitrary sequences, including
        // zeros and negative starts.
        #[test]
        fn identity_holds_for_random_sequences(
            mut seq in proptest::collection::vec(-1.0f64..1.0, 2..64),
            zero_mask in proptest::collection::vec(0u8..10, 2..64),
        ) {
            for (s, z) in seq.iter_mut().zip(&zero_mask) {
                if *z == 0 {
                    *s = 0.0;
                }
            }
            let id = discrete_tanaka_identity(&seq).unwrap();
            prop_assert!((id.lhs - id.rhs).abs() <= 1e-10);
        }

        // Path-level grid equality: the sign-change sum at level m equals the
        // level-m Riemann discretization of the Tanaka form.
        #[test]
        fn grid_equality_for_sampled_paths(
            mut values in proptest::collection::vec(-2.0f64..2.0, 17..=17),
        ) {
            values[0] = 0.0;
            let path = PiecewiseLinearPath::from_uniform_values(values).unwrap();
            let m = 4u32;
            for t in [0.25, 0.5, 1.0] {
                let sign = local_time_sign_change(&path, t, m).unwrap();
                let grid_tanaka = path.eval(t).unwrap().abs()
                    - riemann_integral(IntegrandSpec::Sign, &path, t, m).unwrap();
                prop_assert!((sign - grid_tanaka).abs() <= 1e-10);
            }
        }
    }
}
