//! Regression data whose coefficients drift with time `z`.
//!
//! The time-varying variant draws per-row coefficients
//!
//! ```text
//! b_{z,j} = beta_j * alpha_j * z         + eps_j   for lo < z <= t1
//!           beta_j * (alpha_j + 1) * z^2 + eps_j   for t1 < z <= t2
//!           beta_j * (alpha_j - 1) * z   + eps_j   for t2 < z <= hi
//! ```
//!
//! with `alpha_j ~ U[alpha_range]` and `eps_j ~ N(0, coef_noise_sd_j^2)` drawn once
//! per coordinate, and responds with `y = b_z . x + noise`, `x ~ N(0, I_p)`. The
//! time-invariant control uses `y = beta . x + noise` throughout.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, MetaColumn};
use crate::linalg::{self, Matrix};
use crate::rng::SeedStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TimeVarying,
    TimeInvariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub beta: Vec<f64>,
    pub coef_noise_sd: Vec<f64>,
    pub alpha_range: (f64, f64),
    /// Standard deviation of the response noise.
    pub noise_sd: f64,
    /// Time lies in `(z_range.0, z_range.1]`.
    pub z_range: (f64, f64),
    /// Regime boundaries `t1 < t2`.
    pub breakpoints: [f64; 2],
    pub variant: Variant,
    /// Draw `z` from the integers in the range instead of continuously.
    pub integer_z: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            beta: vec![0.9, 0.2, -0.3, 0.3],
            coef_noise_sd: vec![0.01, 0.1, 0.04, 0.1],
            alpha_range: (-1.0, 1.0),
            noise_sd: 0.1,
            z_range: (0.0, 10.0),
            breakpoints: [3.0, 5.0],
            variant: Variant::TimeVarying,
            integer_z: false,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "must be at least 1",
            });
        }
        if self.beta.is_empty() {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "need at least one coefficient",
            });
        }
        if self.coef_noise_sd.len() != self.beta.len() {
            return Err(Error::DimensionMismatch {
                context: "coef_noise_sd length",
                expected: self.beta.len(),
                found: self.coef_noise_sd.len(),
            });
        }
        if self.coef_noise_sd.iter().any(|s| !(*s >= 0.0)) || !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise",
                reason: "standard deviations must be nonnegative",
            });
        }
        let (lo, hi) = self.z_range;
        if !(lo < hi) {
            return Err(Error::InvalidParameter {
                name: "z_range",
                reason: "lower bound must be below upper bound",
            });
        }
        if !(self.alpha_range.0 <= self.alpha_range.1) {
            return Err(Error::InvalidParameter {
                name: "alpha_range",
                reason: "lower bound must not exceed upper bound",
            });
        }
        let [t1, t2] = self.breakpoints;
        if !(t1 < t2) {
            return Err(Error::InvalidParameter {
                name: "breakpoints",
                reason: "must be strictly increasing",
            });
        }
        if self.integer_z && libm::floor(hi) <= lo {
            return Err(Error::InvalidParameter {
                name: "z_range",
                reason: "contains no integer",
            });
        }
        Ok(())
    }
}

/// Coordinate `j` of the drifting coefficient at time `z`.
pub fn coefficient_at(
    z: f64,
    alpha_j: f64,
    beta_j: f64,
    eps_j: f64,
    breakpoints: [f64; 2],
    z_range: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = z_range;
    if !(z > lo && z <= hi) {
        return Err(Error::OutOfRange {
            value: z,
            lower: lo,
            upper: hi,
        });
    }
    let [t1, t2] = breakpoints;
    let value = if z <= t1 {
        beta_j * alpha_j * z
    } else if z <= t2 {
        beta_j * (alpha_j + 1.0) * z * z
    } else {
        beta_j * (alpha_j - 1.0) * z
    };
    Ok(value + eps_j)
}

/// A generated dataset together with the coordinate-level draws behind it.
#[derive(Debug, Clone)]
pub struct Simulation {
    /// Features `x1..xp`, response `y`, metadata column `z`.
    pub data: Dataset,
    pub alpha: Vec<f64>,
    pub coef_noise: Vec<f64>,
}

pub fn generate(config: &SimConfig) -> Result<Dataset> {
    simulate(config).map(|s| s.data)
}

pub fn simulate(config: &SimConfig) -> Result<Simulation> {
    config.validate()?;
    let p = config.p();
    let mut rng = SeedStream::new(config.seed);
    let (a_lo, a_hi) = config.alpha_range;
    let alpha: Vec<f64> = (0..p).map(|_| a_lo + (a_hi - a_lo) * rng.uniform()).collect();
    let coef_noise: Vec<f64> = config
        .coef_noise_sd
        .iter()
        .map(|sd| sd * rng.standard_normal())
        .collect();

    let (z_lo, z_hi) = config.z_range;
    let first_int = libm::floor(z_lo) as i64 + 1;
    let int_count = (libm::floor(z_hi) as i64 - first_int + 1).max(1) as usize;

    let mut x = Matrix::zeros(config.n, p);
    let mut y = Vec::with_capacity(config.n);
    let mut z = Vec::with_capacity(config.n);
    let mut coef = vec![0.0; p];
    for i in 0..config.n {
        let zi = if config.integer_z {
            (first_int + rng.index(int_count) as i64) as f64
        } else {
            // (lo, hi]: reflect the half-open [0, 1) draw
            z_hi - (z_hi - z_lo) * rng.uniform()
        };
        for v in x.row_mut(i) {
            *v = rng.standard_normal();
        }
        match config.variant {
            Variant::TimeVarying => {
                for j in 0..p {
                    coef[j] = coefficient_at(
                        zi,
                        alpha[j],
                        config.beta[j],
                        coef_noise[j],
                        config.breakpoints,
                        config.z_range,
                    )?;
                }
            }
            Variant::TimeInvariant => coef.copy_from_slice(&config.beta),
        }
        let noise = config.noise_sd * rng.standard_normal();
        y.push(linalg::dot(x.row(i), &coef) + noise);
        z.push(zi);
    }

    let names = (1..=p).map(|j| alloc::format!("x{j}")).collect();
    let data = Dataset::new(x, y)?
        .with_names(names, String::from("y"))?
        .with_meta(MetaColumn::numeric("z", z))?;
    Ok(Simulation {
        data,
        alpha,
        coef_noise,
    })
}
