use crate::{Error, Result, MAX_LEVEL};

use super::{PathGrid, PiecewiseLinearPath};

/// Index into the Schauder (integrated Haar) system.
///
/// `Ramp` is the integral of the constant 1 (the function t); `Tent { j, n }`
/// is the tent supported on `[n 2^-j, (n+1) 2^-j]` peaking at its midpoint
/// with height `2^{j/2} 2^{-(j+1)}`. The top tent peaking at 1/2 is
/// `Tent { j: 0, n: 0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchauderIndex {
    Ramp,
    Tent { j: u32, n: u64 },
}

/// Evaluates one Schauder basis function at `t`.
pub fn schauder_basis(index: SchauderIndex, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain { value: t });
    }
    match index {
        SchauderIndex::Ramp => Ok(t),
        SchauderIndex::Tent { j, n } => {
            if j > 51 || n >= (1u64 << j) {
                return Err(Error::InvalidIndex { j, n });
            }
            let width = (0.5f64).powi(j as i32);
            let left = n as f64 * width;
            let right = (n + 1) as f64 * width;
            let peak = (2 * n + 1) as f64 * (0.5 * width);
            let slope = (2.0f64).powi(j as i32).sqrt();
            Ok(if t <= left || t >= right {
                0.0
            } else if t <= peak {
                slope * (t - left)
            } else {
                slope * (right - t)
            })
        }
    }
}

/// Schauder coefficients of a path through tent level `max_level`.
///
/// Tent coefficients are stored flat with level `j` occupying
/// `[2^j - 1, 2^{j+1} - 1)`; the classical second coefficient is the level-0
/// tent entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SchauderCoeffs {
    xi0: f64,
    tents: Vec<f64>,
    max_level: u32,
}

fn flat_len(max_level: u32) -> usize {
    (1usize << (max_level + 1)) - 1
}

fn flat_index(j: u32, n: u64) -> usize {
    ((1u64 << j) - 1 + n) as usize
}

/// Peak height of the level-`j` tents.
fn tent_height(j: u32) -> f64 {
    0.5 * (0.5f64).powi(j as i32).sqrt()
}

impl SchauderCoeffs {
    pub(crate) fn from_flat(xi0: f64, tents: Vec<f64>, max_level: u32) -> Self {
        debug_assert_eq!(tents.len(), flat_len(max_level));
        Self {
            xi0,
            tents,
            max_level,
        }
    }

    /// Builds coefficients from explicit parts; `higher[j - 1]` holds the
    /// level-`j` tent coefficients and must have exactly `2^j` entries.
    pub fn from_parts(xi0: f64, xi1: f64, higher: Vec<Vec<f64>>) -> Result<Self> {
        let max_level = higher.len() as u32;
        if max_level > MAX_LEVEL {
            return Err(Error::LevelOverflow {
                level: max_level,
                cap: MAX_LEVEL,
            });
        }
        let mut tents = Vec::with_capacity(flat_len(max_level));
        tents.push(xi1);
        for (i, level) in higher.into_iter().enumerate() {
            let j = (i + 1) as u32;
            if level.len() != 1usize << j {
                return Err(Error::IncompleteCoefficients {
                    level: j,
                    expected: 1usize << j,
                    got: level.len(),
                });
            }
            tents.extend(level);
        }
        Ok(Self {
            xi0,
            tents,
            max_level,
        })
    }

    /// Extracts coefficients from a complete dyadic sample grid at level
    /// `m + 1` (`2^{m+1} + 1` values, first one 0): the endpoint value, the
    /// midpoint second difference, and scaled second differences per tent.
    pub fn from_samples(samples: &[f64], m: u32) -> Result<Self> {
        if m > MAX_LEVEL {
            return Err(Error::LevelOverflow {
                level: m,
                cap: MAX_LEVEL,
            });
        }
        let expected = (1usize << (m + 1)) + 1;
        if samples.len() != expected {
            return Err(Error::IncompleteSamples {
                expected,
                got: samples.len(),
            });
        }
        if samples[0] != 0.0 {
            return Err(Error::InvalidPath("sample at 0 must be 0".into()));
        }
        let xi0 = samples[expected - 1];
        let mut tents = Vec::with_capacity(flat_len(m));
        for j in 0..=m {
            let scale = (2.0f64).powi(j as i32).sqrt();
            // Center of tent (j, n) sits at sample index (2n+1) 2^{m-j}.
            let half = 1usize << (m - j);
            for n in 0..(1usize << j) {
                let c = (2 * n + 1) * half;
                let coeff = scale * (2.0 * samples[c] - samples[c + half] - samples[c - half]);
                tents.push(coeff);
            }
        }
        Ok(Self {
            xi0,
            tents,
            max_level: m,
        })
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn xi1(&self) -> f64 {
        self.tents[0]
    }

    /// Tent coefficient at level `j` (0 = top tent), position `n`.
    pub fn tent(&self, j: u32, n: u64) -> Result<f64> {
        if j > self.max_level || n >= (1u64 << j) {
            return Err(Error::InvalidIndex { j, n });
        }
        Ok(self.tents[flat_index(j, n)])
    }

    /// The partial sum through tent level `m` as a piecewise-linear path on
    /// the level-`m + 1` dyadic grid, built by midpoint displacement; when
    /// the coefficients came from `from_samples(samples, m)` this reproduces
    /// `samples` at every grid point.
    pub fn partial_sum(&self, m: u32) -> Result<PiecewiseLinearPath> {
        if m > self.max_level {
            return Err(Error::LevelOverflow {
                level: m,
                cap: self.max_level,
            });
        }
        let grid_level = m + 1;
        let npoints = (1usize << grid_level) + 1;
        let mut values = vec![0.0f64; npoints];
        values[npoints - 1] = self.xi0;
        for j in 0..=m {
            let half = 1usize << (m - j);
            let disp = tent_height(j);
            for n in 0..(1usize << j) {
                let c = (2 * n + 1) * half;
                let mid = 0.5 * (values[c - half] + values[c + half]);
                values[c] = mid + self.tents[flat_index(j, n as u64)] * disp;
            }
        }
        Ok(PiecewiseLinearPath::from_uniform_values(values)
            .expect("midpoint construction yields a valid path"))
    }

    /// Evaluates the partial sum directly (used for spot checks; `partial_sum`
    /// is the grid workhorse).
    pub fn eval_partial_sum(&self, m: u32, t: f64) -> Result<f64> {
        if m > self.max_level {
            return Err(Error::LevelOverflow {
                level: m,
                cap: self.max_level,
            });
        }
        let mut acc = self.xi0 * schauder_basis(SchauderIndex::Ramp, t)?;
        for j in 0..=m {
            for n in 0..(1u64 << j) {
                let coeff = self.tents[flat_index(j, n)];
                if coeff != 0.0 {
                    acc += coeff * schauder_basis(SchauderIndex::Tent { j, n }, t)?;
                }
            }
        }
        Ok(acc)
    }
}

impl PiecewiseLinearPath {
    /// Schauder coefficients of this path through level `m`, read off the
    /// level-`m + 1` dyadic grid.
    pub fn schauder_coefficients(&self, m: u32) -> Result<SchauderCoeffs> {
        match self.grid() {
            PathGrid::Uniform { n } if *n == 1u64 << (m + 1) => {
                SchauderCoeffs::from_samples(self.values(), m)
            }
            _ => SchauderCoeffs::from_samples(&self.samples_at_level(m + 1), m),
        }
    }
}
