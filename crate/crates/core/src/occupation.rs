//! Exact occupation measure and occupation time for piecewise-linear paths,
//! and the shrinking-band occupation-density estimator.
//!
//! Everything is computed segment by segment in closed form as the measure
//! of the preimage of a level band under an affine map; there is no sampling
//! anywhere. Band boundaries are closed, and a flat segment lying exactly on
//! a band edge counts as inside.

use crate::path_model::PiecewiseLinearPath;
use crate::{Error, Result};

/// Query triple for occupation time: horizon `t`, level `x`, half-width
/// `epsilon` of the closed band `[x - epsilon, x + epsilon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationQuery {
    t: f64,
    x: f64,
    epsilon: f64,
}

impl OccupationQuery {
    pub fn new(t: f64, x: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain { value: t });
        }
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidEpsilon { epsilon });
        }
        if !x.is_finite() {
            return Err(Error::OutOfDomain { value: x });
        }
        Ok(Self { t, x, epsilon })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Lebesgue measure of `{s <= t : |path(s) - x| <= epsilon}`.
pub fn occupation_time(path: &PiecewiseLinearPath, query: &OccupationQuery) -> f64 {
    band_time(path, query.t, query.x - query.epsilon, query.x + query.epsilon)
}

/// Lebesgue measure of `{s <= t : a <= path(s) <= b}`.
pub fn occupation_measure(path: &PiecewiseLinearPath, t: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain { value: t });
    }
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(band_time(path, t, a, b))
}

/// Finite-band density estimate `(2 * 2^-n)^{-1} * lambda{s <= t : |path(s) - x| <= 2^-n}`.
pub fn occupation_density_estimate(
    path: &PiecewiseLinearPath,
    t: f64,
    x: f64,
    n: u32,
) -> Result<f64> {
    if n > 60 {
        return Err(Error::LevelOverflow { level: n, cap: 60 });
    }
    let epsilon = (0.5f64).powi(n as i32);
    let query = OccupationQuery::new(t, x, epsilon)?;
    Ok(occupation_time(path, &query) / (2.0 * epsilon))
}

/// Shared band sweep. The horizon may fall strictly inside a segment; the
/// segment is split analytically.
pub(crate) fn band_time(path: &PiecewiseLinearPath, horizon: f64, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for seg in path.segments() {
        if seg.t0 >= horizon {
            break;
        }
        let (t1, v1) = if seg.t1 <= horizon {
            (seg.t1, seg.v1)
        } else {
            // Split at the horizon.
            let frac = (horizon - seg.t0) / (seg.t1 - seg.t0);
            (horizon, seg.v0 + frac * (seg.v1 - seg.v0))
        };
        total += segment_band_time(seg.t0, t1, seg.v0, v1, lo, hi);
    }
    total
}

/// Band time of a single linear piece: the measure of the preimage of
/// [lo, hi] under the affine map, via closed-form interval intersection.
pub(crate) fn segment_band_time(t0: f64, t1: f64, v0: f64, v1: f64, lo: f64, hi: f64) -> f64 {
    let dt = t1 - t0;
    if v0 == v1 {
        return if lo <= v0 && v0 <= hi { dt } else { 0.0 };
    }
    let (vlo, vhi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
    let overlap = hi.min(vhi) - lo.max(vlo);
    if overlap > 0.0 {
        dt * overlap / (vhi - vlo)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_model::BinaryCode;
    use approx::assert_abs_diff_eq;

    fn tent() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_code(&BinaryCode::parse("10").unwrap()).unwrap()
    }

    fn identity() -> PiecewiseLinearPath {
        PiecewiseLinearPath::from_uniform_values(vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn band_on_identity_path() {
        let q = OccupationQuery::new(1.0, 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(occupation_time(&identity(), &q), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn band_on_tent_path() {
        let q = OccupationQuery::new(1.0, 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(
            occupation_time(&tent(), &q),
            0.2 * std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn far_band_is_empty() {
        let q = OccupationQuery::new(1.0, 5.0, 0.1).unwrap();
        assert_eq!(occupation_time(&identity(), &q), 0.0);
    }

    #[test]
    fn full_band_has_total_mass_t() {
        let p = tent();
        assert_abs_diff_eq!(
            occupation_measure(&p, 0.75, -1e9, 1e9).unwrap(),
            0.75,
            epsilon = 1e-12
        );
    }

    #[test]
    fn identity_path_pushes_lebesgue_to_itself() {
        assert_abs_diff_eq!(
            occupation_measure(&identity(), 1.0, 0.2, 0.5).unwrap(),
            0.3,
            epsilon = 1e-15
        );
    }

    #[test]
    fn tent_range_lies_in_band() {
        let top = (0.5f64).powf(1.5);
        assert_abs_diff_eq!(
            occupation_measure(&tent(), 1.0, 0.0, top).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn invalid_interval_is_rejected() {
        assert!(matches!(
            occupation_measure(&tent(), 1.0, 0.5, 0.2),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(occupation_measure(&tent(), 1.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn density_estimate_examples() {
        let p = identity();
        assert_abs_diff_eq!(
            occupation_density_estimate(&p, 1.0, 0.5, 4).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // Boundary level: only the upper half of the band is hit.
        assert_abs_diff_eq!(
            occupation_density_estimate(&p, 1.0, 0.0, 4).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(occupation_density_estimate(&p, 1.0, 7.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn flat_segment_at_band_edge_counts_inside() {
        let p = PiecewiseLinearPath::from_breakpoints(
            vec![0.0, 0.25, 0.75, 1.0],
            vec![0.0, 0.5, 0.5, 0.0],
        )
        .unwrap();
        // Band [0.3, 0.5]: rising part hits it for 0.2/0.5 of 0.25, the flat
        // top sits exactly on the edge and counts fully, symmetric descent.
        let got = occupation_measure(&p, 1.0, 0.3, 0.5).unwrap();
        assert_abs_diff_eq!(got, 0.25 * 0.4 + 0.5 + 0.25 * 0.4, epsilon = 1e-15);
    }

    #[test]
    fn horizon_splits_segments_analytically() {
        let p = identity();
        // Horizon inside the single segment.
        let q = OccupationQuery::new(0.35, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(occupation_time(&p, &q), 0.35, epsilon = 1e-15);
        let q = OccupationQuery::new(0.35, 0.3, 0.02).unwrap();
        assert_abs_diff_eq!(occupation_time(&p, &q), 0.04, epsilon = 1e-15);
    }

    #[test]
    fn additive_in_time() {
        let p = tent();
        let (t1, t2) = (0.37, 0.83);
        let band = |t| occupation_measure(&p, t, 0.1, 0.3).unwrap();
        assert_abs_diff_eq!(band(t2), band(t1) + (band(t2) - band(t1)), epsilon = 1e-12);
        // Monotone in t and in epsilon.
        assert!(band(t2) >= band(t1));
        let q1 = OccupationQuery::new(1.0, 0.2, 0.05).unwrap();
        let q2 = OccupationQuery::new(1.0, 0.2, 0.10).unwrap();
        assert!(occupation_time(&p, &q2) >= occupation_time(&p, &q1));
    }

    #[test]
    fn level_sets_of_non_flat_paths_are_null() {
        let p = tent();
        for a in [-0.2, 0.0, 0.1, 0.25, (0.5f64).powf(1.5)] {
            assert_eq!(occupation_measure(&p, 1.0, a, a).unwrap(), 0.0);
        }
    }
}
