//! Uniform-grid representations of real functions and their Fourier transforms.
//!
//! `GridFunction` samples a real function on `n` equispaced points of
//! `[lo, hi)`; `SpectralFunction` is its complex twin on the symmetric
//! frequency grid `[-omega_max, omega_max)`. Both demand power-of-two
//! lengths so transforms stay fast.

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use std::io::{BufRead, Write};

/// Tolerance below which a density may dip negative (fp noise from transforms).
pub const DENSITY_NEG_TOL: f64 = 1e-12;
/// Tolerance for the unit-mass check of a density.
pub const DENSITY_MASS_TOL: f64 = 1e-6;

/// Real-valued function sampled at `x_j = lo + j*dx`, `dx = (hi-lo)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(n));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CoreError::InvalidSupport { lo, hi });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite(i));
        }
        Ok(Self { lo, hi, values })
    }

    /// Sample `f` at the grid points of `[lo, hi)`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_len(n)?;
        let dx = (hi - lo) / n as f64;
        let values: Vec<f64> = (0..n).map(|j| f(lo + j as f64 * dx)).collect();
        Self::new(lo, hi, values)
    }

    pub fn support_lo(&self) -> f64 {
        self.lo
    }

    pub fn support_hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.dx()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Nearest grid index for a point inside the support.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.lo) / self.dx()).round() as isize;
        j.clamp(0, self.values.len() as isize - 1) as usize
    }

    /// Linear interpolation; zero outside the represented interval.
    pub fn interpolate(&self, x: f64) -> f64 {
        let dx = self.dx();
        let t = (x - self.lo) / dx;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let j = t.floor() as usize;
        if j + 1 >= self.values.len() {
            return self.values[j];
        }
        let w = t - j as f64;
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }

    /// Uniform-rectangle quadrature `dx * sum(values)`.
    ///
    /// Coincides with the trapezoid rule whenever the function vanishes at
    /// the boundary or wraps periodically across it, which covers every
    /// function this crate puts on a grid.
    pub fn integral(&self) -> f64 {
        self.dx() * kahan_sum(self.values.iter().copied())
    }

    /// Quadrature of f^2 on the grid.
    pub fn norm_sq(&self) -> f64 {
        self.dx() * kahan_sum(self.values.iter().map(|v| v * v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Density check: values >= -1e-12 and unit mass within 1e-6.
    pub fn density_violation(&self) -> Option<String> {
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -DENSITY_NEG_TOL)
        {
            return Some(format!("negative value {v:.3e} at x = {:.6}", self.x(i)));
        }
        let mass = self.integral();
        if (mass - 1.0).abs() > DENSITY_MASS_TOL {
            return Some(format!("integral {mass:.9} deviates from 1"));
        }
        None
    }

    pub fn is_density(&self) -> bool {
        self.density_violation().is_none()
    }

    pub fn require_density(&self) -> Result<()> {
        match self.density_violation() {
            Some(reason) => Err(CoreError::NotADensity { reason }),
            None => Ok(()),
        }
    }

    /// Smallest interval of grid points carrying non-negligible values.
    /// Returns the full support when the function is identically tiny.
    pub fn effective_support(&self, threshold: f64) -> (f64, f64) {
        let first = self.values.iter().position(|v| v.abs() > threshold);
        let last = self.values.iter().rposition(|v| v.abs() > threshold);
        match (first, last) {
            (Some(a), Some(b)) => {
                let dx = self.dx();
                (self.x(a) - dx, self.x(b) + dx)
            }
            _ => (self.lo, self.hi),
        }
    }

    /// Write `x,value` CSV rows (17 significant digits).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "x,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.x(j), v)?;
        }
        Ok(())
    }

    /// Read back a CSV produced by [`write_csv`]. The grid is reconstructed
    /// from the first/last abscissae and the row count.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let mut parts = line.split(',');
            let x: f64 = parse_field(parts.next(), lineno)?;
            let v: f64 = parse_field(parts.next(), lineno)?;
            xs.push(x);
            vs.push(v);
        }
        if vs.len() < 2 {
            return Err(CoreError::Parse("csv holds fewer than 2 rows".into()));
        }
        let n = vs.len();
        let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        GridFunction::new(xs[0], xs[0] + dx * n as f64, vs)
    }
}

fn parse_field(field: Option<&str>, lineno: usize) -> Result<f64> {
    field
        .ok_or_else(|| CoreError::Parse(format!("line {lineno}: missing field")))?
        .trim()
        .parse::<f64>()
        .map_err(|e| CoreError::Parse(format!("line {lineno}: {e}")))
}

/// Compensated summation; keeps aggregation order-insensitive at the 1e-12 level.
pub fn kahan_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in it {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Complex-valued function on the symmetric frequency grid
/// `omega_k = -omega_max + k * (2 omega_max / n)`, so `omega = 0` sits at `k = n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    omega_max: f64,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(omega_max: f64, values: Vec<Complex64>) -> Result<Self> {
        check_len(values.len())?;
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(CoreError::OmegaMaxNonPositive(omega_max));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoreError::NonFinite(i));
        }
        Ok(Self { omega_max, values })
    }

    pub fn from_fn(omega_max: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_len(n)?;
        let dw = 2.0 * omega_max / n as f64;
        let values: Vec<Complex64> = (0..n).map(|k| f(-omega_max + k as f64 * dw)).collect();
        Self::new(omega_max, values)
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.omega_max / self.values.len() as f64
    }

    pub fn omega(&self, k: usize) -> f64 {
        -self.omega_max + k as f64 * self.d_omega()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at `omega = 0` (equals the integral of the time-domain function).
    pub fn value_at_zero(&self) -> Complex64 {
        self.values[self.values.len() / 2]
    }

    /// Maximum deviation from Hermitian symmetry, relative to the peak magnitude.
    /// The unpaired bin at `-omega_max` is skipped.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.values.len();
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm()))
            .max(f64::MIN_POSITIVE);
        let mut dev = 0.0f64;
        for k in 1..n {
            let mirror = self.values[n - k].conj();
            dev = dev.max((self.values[k] - mirror).norm());
        }
        dev / scale
    }

    /// Write `omega,re,im` CSV rows (17 significant digits).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "omega,re,im")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.omega(k), v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut ws = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('o') {
                continue;
            }
            let mut parts = line.split(',');
            let w: f64 = parse_field(parts.next(), lineno)?;
            let re: f64 = parse_field(parts.next(), lineno)?;
            let im: f64 = parse_field(parts.next(), lineno)?;
            ws.push(w);
            vs.push(Complex64::new(re, im));
        }
        if vs.len() < 2 {
            return Err(CoreError::Parse("csv holds fewer than 2 rows".into()));
        }
        let omega_max = -ws[0];
        SpectralFunction::new(omega_max, vs)
    }
}
