use crate::{Error, Result};

use super::BinaryCode;

/// Breakpoint layout of a piecewise-linear path.
///
/// Uniform grids are stored implicitly (`j / n`), so dyadic paths keep their
/// grid points as exact integers; floating point enters only in `eval` and
/// the integrators.
#[derive(Debug, Clone, PartialEq)]
pub enum PathGrid {
    /// Breakpoints `j / n` for `j = 0..=n`.
    Uniform { n: u64 },
    /// Arbitrary strictly increasing breakpoints from 0 to 1.
    Explicit(Vec<f64>),
}

/// One linear segment of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub v0: f64,
    pub v1: f64,
}

/// A continuous piecewise-linear function on [0, 1] vanishing at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    grid: PathGrid,
    values: Vec<f64>,
}

impl PiecewiseLinearPath {
    /// Path on the uniform grid `j / (len - 1)` with the given heights.
    pub fn from_uniform_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidPath("need at least two points".into()));
        }
        validate_values(&values)?;
        let n = (values.len() - 1) as u64;
        Ok(Self {
            grid: PathGrid::Uniform { n },
            values,
        })
    }

    /// Path with explicit breakpoints (used by the file loader).
    pub fn from_breakpoints(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidPath(format!(
                "{} breakpoints but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidPath("need at least two points".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath("first breakpoint must be 0".into()));
        }
        if *times.last().unwrap() != 1.0 {
            return Err(Error::InvalidPath("last breakpoint must be 1".into()));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidPath(format!(
                    "breakpoints not strictly increasing at t = {}",
                    w[1]
                )));
            }
        }
        validate_values(&values)?;
        Ok(Self {
            grid: PathGrid::Explicit(times),
            values,
        })
    }

    /// Decodes a slope code: over interval `j` of length `1/n` the path moves
    /// by `+n^{-1/2} / n` when bit `j` is 1 and by `-n^{-1/2} / n` otherwise,
    /// accumulated by cumulative summation.
    pub fn from_code(code: &BinaryCode) -> Result<Self> {
        let n = code.len();
        if n == 0 {
            return Err(Error::InvalidCode("empty code".into()));
        }
        let nf = n as f64;
        let step = 1.0 / (nf * nf.sqrt());
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(acc);
        for bit in code.iter() {
            acc += if bit { step } else { -step };
            values.push(acc);
        }
        Ok(Self {
            grid: PathGrid::Uniform { n: n as u64 },
            values,
        })
    }

    /// Recovers the slope code, checking membership in the slope class: the
    /// breakpoints must be exactly `j / n` and every increment must match
    /// `±n^{-1/2} / n` to within 1e-7 relative (cumulative-sum rounding grows
    /// with `n`; any genuinely wrong slope is off by orders of magnitude).
    pub fn to_code(&self, n: u64) -> Result<BinaryCode> {
        if self.num_segments() as u64 != n {
            return Err(Error::NotInClass {
                n,
                detail: format!("{} segments", self.num_segments()),
            });
        }
        match &self.grid {
            PathGrid::Uniform { n: g } if *g == n => {}
            _ => {
                let nf = n as f64;
                for i in 0..=self.num_segments() {
                    if self.breakpoint(i) != i as f64 / nf {
                        return Err(Error::NotInClass {
                            n,
                            detail: format!("breakpoint {i} is not {i}/{n}"),
                        });
                    }
                }
            }
        }
        let nf = n as f64;
        let step = 1.0 / (nf * nf.sqrt());
        let mut bits = Vec::with_capacity(n as usize);
        for i in 0..self.num_segments() {
            let d = self.values[i + 1] - self.values[i];
            if (d.abs() / step - 1.0).abs() > 1e-7 {
                return Err(Error::NotInClass {
                    n,
                    detail: format!("segment {i} has increment {d}, expected ±{step}"),
                });
            }
            bits.push(d > 0.0);
        }
        BinaryCode::from_bits(bits)
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_points(&self) -> usize {
        self.values.len()
    }

    pub fn num_segments(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid level `L` when the breakpoints are exactly `k / 2^L`.
    pub fn dyadic_level(&self) -> Option<u32> {
        match &self.grid {
            PathGrid::Uniform { n } if n.is_power_of_two() => Some(n.trailing_zeros()),
            _ => None,
        }
    }

    /// Time of breakpoint `i`.
    pub fn breakpoint(&self, i: usize) -> f64 {
        match &self.grid {
            PathGrid::Uniform { n } => i as f64 / *n as f64,
            PathGrid::Explicit(times) => times[i],
        }
    }

    pub fn segment(&self, i: usize) -> Segment {
        Segment {
            t0: self.breakpoint(i),
            t1: self.breakpoint(i + 1),
            v0: self.values[i],
            v1: self.values[i + 1],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.num_segments()).map(move |i| self.segment(i))
    }

    /// Linear interpolation, exact at breakpoints.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain { value: t });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        let i = self.segment_index(t);
        let t0 = self.breakpoint(i);
        if t == t0 {
            return self.values[i];
        }
        let t1 = self.breakpoint(i + 1);
        if t == t1 {
            return self.values[i + 1];
        }
        let v0 = self.values[i];
        let v1 = self.values[i + 1];
        v0 + (t - t0) * (v1 - v0) / (t1 - t0)
    }

    /// Index of the segment whose closed span contains `t`.
    fn segment_index(&self, t: f64) -> usize {
        let last = self.num_segments() - 1;
        match &self.grid {
            PathGrid::Uniform { n } => {
                let nf = *n as f64;
                let mut i = ((t * nf).floor() as usize).min(last);
                // Guard against rounding of t * n across a breakpoint.
                while i > 0 && t < self.breakpoint(i) {
                    i -= 1;
                }
                while i < last && t >= self.breakpoint(i + 1) {
                    i += 1;
                }
                i
            }
            PathGrid::Explicit(times) => {
                let count = times.partition_point(|x| *x <= t);
                (count - 1).min(last)
            }
        }
    }

    /// Value at the dyadic time `k / 2^m`; an exact array lookup whenever the
    /// path grid is dyadic of level >= m, and exact dyadic interpolation when
    /// the request is finer than the grid.
    pub(crate) fn sample_dyadic(&self, k: u64, m: u32) -> f64 {
        debug_assert!(m <= 52 && k <= 1u64 << m);
        if let Some(level) = self.dyadic_level() {
            if m <= level {
                return self.values[(k << (level - m)) as usize];
            }
            let shift = m - level;
            let j = (k >> shift) as usize;
            let r = k & ((1u64 << shift) - 1);
            if r == 0 {
                return self.values[j];
            }
            let frac = r as f64 / (1u64 << shift) as f64;
            return self.values[j] + frac * (self.values[j + 1] - self.values[j]);
        }
        self.eval_unchecked(k as f64 * (0.5f64).powi(m as i32))
    }

    /// All values on the level-`m` dyadic grid (`2^m + 1` samples).
    pub fn samples_at_level(&self, m: u32) -> Vec<f64> {
        (0..=1u64 << m).map(|k| self.sample_dyadic(k, m)).collect()
    }
}

fn validate_values(values: &[f64]) -> Result<()> {
    if values[0] != 0.0 {
        return Err(Error::InvalidPath("path must vanish at the origin".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidPath(format!("non-finite value {bad}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn code(s: &str) -> BinaryCode {
        BinaryCode::parse(s).unwrap()
    }

    #[test]
    fn decode_single_bit_is_identity_path() {
        let p = PiecewiseLinearPath::from_code(&code("1")).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0]);
        assert_eq!(p.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn decode_two_bits_matches_hand_evaluation() {
        let up_up = PiecewiseLinearPath::from_code(&code("11")).unwrap();
        let half = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(up_up.eval(0.5).unwrap(), half, epsilon = 1e-15);
        assert_abs_diff_eq!(
            up_up.eval(1.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );

        let tent = PiecewiseLinearPath::from_code(&code("10")).unwrap();
        assert_abs_diff_eq!(tent.eval(0.5).unwrap(), half, epsilon = 1e-15);
        assert_abs_diff_eq!(tent.eval(1.0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn decode_rejects_empty() {
        assert!(matches!(
            BinaryCode::parse("").map(|c| PiecewiseLinearPath::from_code(&c)),
            Err(Error::InvalidCode(_))
        ));
    }

    #[test]
    fn eval_examples() {
        let tent = PiecewiseLinearPath::from_code(&code("10")).unwrap();
        assert_abs_diff_eq!(
            tent.eval(0.25).unwrap(),
            0.25 * std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(tent.eval(0.0).unwrap(), 0.0);
        assert!(matches!(
            tent.eval(1.5),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(tent.eval(-0.1).is_err());
    }

    #[test]
    fn encode_round_trips() {
        let c = code("1011");
        let p = PiecewiseLinearPath::from_code(&c).unwrap();
        assert_eq!(p.to_code(4).unwrap(), c);

        let identity = PiecewiseLinearPath::from_uniform_values(vec![0.0, 1.0]).unwrap();
        assert_eq!(identity.to_code(1).unwrap().to_string(), "1");
    }

    #[test]
    fn encode_rejects_wrong_slope() {
        let p = PiecewiseLinearPath::from_uniform_values(vec![0.0, 0.25, 0.0]).unwrap();
        assert!(matches!(p.to_code(2), Err(Error::NotInClass { .. })));
    }

    #[test]
    fn encode_rejects_wrong_grid() {
        let p = PiecewiseLinearPath::from_breakpoints(
            vec![0.0, 0.3, 1.0],
            vec![0.0, 0.5, 0.0],
        )
        .unwrap();
        assert!(matches!(p.to_code(2), Err(Error::NotInClass { .. })));
    }

    #[test]
    fn sample_dyadic_is_exact_on_dyadic_grids() {
        let p = PiecewiseLinearPath::from_uniform_values(vec![0.0, 1.0, -2.0, 0.5, 1.0]).unwrap();
        assert_eq!(p.dyadic_level(), Some(2));
        assert_eq!(p.sample_dyadic(2, 2), -2.0);
        assert_eq!(p.sample_dyadic(1, 1), -2.0);
        // Finer than the grid: exact midpoint.
        assert_eq!(p.sample_dyadic(1, 3), 0.5);
        assert_eq!(p.samples_at_level(1), vec![0.0, -2.0, 1.0]);
    }

    #[test]
    fn breakpoints_must_start_at_the_origin() {
        assert!(PiecewiseLinearPath::from_uniform_values(vec![0.5, 1.0]).is_err());
        assert!(
            PiecewiseLinearPath::from_breakpoints(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 1.0])
                .is_ok()
        );
        assert!(
            PiecewiseLinearPath::from_breakpoints(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err()
        );
    }

    proptest! {
        // Round trip through the code space, with the slope law checked on
        // every segment.
        #[test]
        fn code_round_trip_and_slope_law(bits in proptest::collection::vec(any::<bool>(), 1..=24)) {
            let c = BinaryCode::from_bits(bits.clone()).unwrap();
            let n = bits.len() as u64;
            let p = PiecewiseLinearPath::from_code(&c).unwrap();
            prop_assert_eq!(p.to_code(n).unwrap(), c);
            let slope = (n as f64).sqrt().recip();
            for s in p.segments() {
                let seg_slope = (s.v1 - s.v0) / (s.t1 - s.t0);
                prop_assert!((seg_slope.abs() / slope - 1.0).abs() < 1e-12);
            }
        }

        // eval is affine between consecutive breakpoints.
        #[test]
        fn eval_is_affine_between_breakpoints(
            values in proptest::collection::vec(-10.0f64..10.0, 2..40),
            i in 0usize..38,
        ) {
            let mut values = values;
            values[0] = 0.0;
            let p = PiecewiseLinearPath::from_uniform_values(values).unwrap();
            let i = i.min(p.num_segments() - 1);
            let s = p.segment(i);
            let mid = 0.5 * (s.t0 + s.t1);
            let lhs = p.eval(mid).unwrap();
            let rhs = 0.5 * (p.eval(s.t0).unwrap() + p.eval(s.t1).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12);
            prop_assert_eq!(p.eval(s.t0).unwrap(), s.v0);
            prop_assert_eq!(p.eval(s.t1).unwrap(), s.v1);
        }
    }
}
