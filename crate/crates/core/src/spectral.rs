//! Fourier representation of real, zero-mean fields on the periodic box
//! `[-pi, pi]^N` for `N = 1, 2`.
//!
//! Coefficients follow `v(x) = sum_k vhat(k) exp(i k.x)`, so that
//! `vhat(k) = (2 pi)^-N * integral v(x) exp(-i k.x) dx`. A single cosine
//! `cos(x_1)` therefore carries two coefficients of `1/2` and has unit
//! Wiener norm.
//!
//! Sample points sit at `x_j = -pi + 2 pi j / M`; the half-period offset
//! contributes a `(-1)^(k_1 + ... + k_N)` phase between the raw DFT and the
//! coefficients, applied by [`forward_transform`] and [`inverse_transform`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FilmError, Result};

/// Largest tolerated imaginary residue, relative to the sample scale, when
/// converting coefficients back to real samples.
pub const HERMITIAN_RESIDUE: f64 = 1e-12;

/// Lattice vector; the second component is unused (zero) in one dimension.
pub type Mode = [i64; 2];

/// Uniform periodic grid with `points` samples per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    dim: usize,
    points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    points: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = FilmError;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.dim, raw.points)
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(FilmError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(FilmError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical coordinate of sample index `j` along any axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.points as f64
    }

    /// Lattice vector stored at flat (FFT-ordered) index `flat`.
    pub fn mode(&self, flat: usize) -> Mode {
        axis_modes(self.dim, self.points, flat)
    }

    /// Flat index of lattice vector `k`, if resolved.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.points / 2) as i64;
        let mut flat = 0usize;
        for &kj in k {
            if kj < -half || kj >= half {
                return None;
            }
            let idx = if kj >= 0 { kj } else { kj + self.points as i64 } as usize;
            flat = flat * self.points + idx;
        }
        Some(flat)
    }

    /// True when any component of `k` sits on the unpaired Nyquist index `-M/2`.
    pub fn is_nyquist(&self, k: Mode) -> bool {
        let half = (self.points / 2) as i64;
        k[..self.dim].iter().any(|&kj| kj == -half)
    }

    /// Iterator over `(flat index, lattice vector)` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (usize, Mode)> + '_ {
        (0..self.len()).map(move |i| (i, self.mode(i)))
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D, {} points per axis", self.dim, self.points)
    }
}

pub(crate) fn wavenumber(points: usize, idx: usize) -> i64 {
    if idx < points / 2 {
        idx as i64
    } else {
        idx as i64 - points as i64
    }
}

fn axis_modes(dim: usize, points: usize, flat: usize) -> Mode {
    match dim {
        1 => [wavenumber(points, flat), 0],
        _ => [
            wavenumber(points, flat / points),
            wavenumber(points, flat % points),
        ],
    }
}

pub(crate) fn norm_sq(k: Mode) -> i64 {
    k[0] * k[0] + k[1] * k[1]
}

/// Unnormalized N-dimensional complex FFT on a square `n^dim` array.
#[derive(Clone)]
pub(crate) struct FftNd {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub(crate) fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub(crate) fn process(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        // rows (or the single axis); rustfft handles a multiple of the length
        fft.process(data);
        if self.dim == 2 {
            let n = self.n;
            let mut t = transpose(data, n);
            fft.process(&mut t);
            data.copy_from_slice(&transpose(&t, n));
        }
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = data[r * n + c];
        }
    }
    out
}

/// Zero-mean real field stored as Hermitian Fourier coefficients.
///
/// The `k = 0` slot of the coefficient array is always zero; the average of
/// the represented function is kept separately in `mean`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    mean: f64,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
            mean: 0.0,
        }
    }

    /// Builds a field from a full coefficient array in storage order.
    ///
    /// The `k = 0` entry is moved into `mean` (only its real part is kept).
    pub fn from_coefficients(grid: Grid, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(FilmError::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(FilmError::NonFinite { index });
        }
        let mean = coeffs[0].re;
        coeffs[0] = Complex64::new(0.0, 0.0);
        Ok(Self { grid, coeffs, mean })
    }

    /// Sum of `amplitude * cos(k.x + phase)` terms.
    pub fn from_cosines(grid: Grid, modes: &[(Vec<i64>, f64, f64)]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        for (k, amplitude, phase) in modes {
            let c = Complex64::from_polar(0.5 * amplitude, *phase);
            field.add_mode(k, c)?;
        }
        Ok(field)
    }

    /// Adds `c` at `k` and `conj(c)` at `-k`.
    pub fn add_mode(&mut self, k: &[i64], c: Complex64) -> Result<()> {
        let idx = self
            .grid
            .index_of(k)
            .ok_or_else(|| FilmError::UnresolvedMode(k.to_vec()))?;
        let neg: Vec<i64> = k.iter().map(|&kj| -kj).collect();
        let nidx = self
            .grid
            .index_of(&neg)
            .ok_or_else(|| FilmError::UnresolvedMode(neg.clone()))?;
        if idx == 0 {
            self.mean += c.re;
            return Ok(());
        }
        if idx == nidx {
            self.coeffs[idx] += Complex64::new(2.0 * c.re, 0.0);
        } else {
            self.coeffs[idx] += c;
            self.coeffs[nidx] += c.conj();
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at lattice vector `k` (zero when not resolved).
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        match self.grid.index_of(k) {
            Some(0) => Complex64::new(self.mean, 0.0),
            Some(i) => self.coeffs[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// The recorded `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Same coefficients with the average discarded.
    pub fn zero_mean(mut self) -> Self {
        self.mean = 0.0;
        self
    }

    /// Same function on another grid of the same dimension: modes that are
    /// resolved and non-Nyquist on both grids are copied, the rest dropped.
    pub fn resampled(&self, grid: Grid) -> Result<Self> {
        if grid.dim != self.grid.dim {
            return Err(FilmError::InvalidGrid(format!(
                "cannot resample a {}-dimensional field onto {grid}",
                self.grid.dim
            )));
        }
        let mut out = Self::zeros(grid);
        out.mean = self.mean;
        for (i, k) in self.grid.modes().skip(1) {
            if self.grid.is_nyquist(k) || grid.is_nyquist(k) {
                continue;
            }
            if let Some(j) = grid.index_of(&k[..grid.dim]) {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        Ok(out)
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn set_mean(&mut self, mean: f64) {
        self.mean = mean;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            mean: self.mean * factor,
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
            mean: self.mean + factor * other.mean,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn partner(&self, k: Mode) -> usize {
        let half = (self.grid.points / 2) as i64;
        // -(-M/2) aliases back onto -M/2
        let neg = |kj: i64| if kj == -half { kj } else { -kj };
        let k = [neg(k[0]), neg(k[1])];
        self.grid.index_of(&k[..self.grid.dim]).expect("resolved partner")
    }

    /// Projects onto exactly Hermitian coefficients (real samples).
    pub fn symmetrize(&mut self) {
        for (i, k) in self.grid.modes().skip(1) {
            let j = self.partner(k);
            if j > i {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            } else if j == i {
                self.coeffs[i].im = 0.0;
            }
        }
    }

    /// Largest deviation from `vhat(-k) = conj(vhat(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, k) in self.grid.modes() {
            let j = self.partner(k);
            worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
        }
        worst
    }

    /// Wiener semi-norm `sum_k |k|^alpha |vhat(k)|` over nonzero modes.
    pub fn wiener(&self, alpha: f64) -> Result<f64> {
        if alpha < 0.0 || alpha.is_nan() {
            return Err(FilmError::NegativeExponent(alpha));
        }
        Ok(self.wiener_unchecked(alpha))
    }

    pub(crate) fn wiener_unchecked(&self, alpha: f64) -> f64 {
        let half = 0.5 * alpha;
        let integral = half.fract() == 0.0;
        self.grid
            .modes()
            .skip(1)
            .map(|(i, k)| {
                let a = self.coeffs[i].norm();
                if a == 0.0 {
                    return 0.0;
                }
                let k2 = norm_sq(k) as f64;
                let w = if integral {
                    k2.powi(half as i32)
                } else {
                    k2.powf(half)
                };
                w * a
            })
            .sum()
    }

    /// Bessel-potential norm `((2 pi)^N sum_k (1 + |k|^2)^s |vhat(k)|^2)^(1/2)`,
    /// including the mean.
    pub fn sobolev(&self, s: f64) -> f64 {
        let volume = (2.0 * PI).powi(self.grid.dim as i32);
        let sum: f64 = self
            .grid
            .modes()
            .skip(1)
            .map(|(i, k)| (1.0 + norm_sq(k) as f64).powf(s) * self.coeffs[i].norm_sqr())
            .sum::<f64>()
            + self.mean * self.mean;
        (volume * sum).sqrt()
    }

    /// Max-abs over the sample grid.
    pub fn linf(&self) -> f64 {
        real_samples(self)
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    /// Partial derivative with multi-index `orders` (one entry per axis).
    pub fn derivative(&self, orders: &[usize]) -> Result<Self> {
        if orders.len() != self.grid.dim {
            return Err(FilmError::InvalidParams(format!(
                "multi-index has {} entries for a {}D grid",
                orders.len(),
                self.grid.dim
            )));
        }
        let total: usize = orders.iter().sum();
        if total > 4 {
            return Err(FilmError::DerivativeOrder(total));
        }
        let half = (self.grid.points / 2) as i64;
        let mut out = Self::zeros(self.grid);
        for (i, k) in self.grid.modes().skip(1) {
            let mut factor = Complex64::new(1.0, 0.0);
            let mut drop = false;
            for (j, &m) in orders.iter().enumerate() {
                if m % 2 == 1 && k[j] == -half {
                    drop = true;
                }
                factor *= Complex64::new(0.0, k[j] as f64).powu(m as u32);
            }
            if !drop {
                out.coeffs[i] = self.coeffs[i] * factor;
            }
        }
        if total == 0 {
            out.mean = self.mean;
        }
        Ok(out)
    }

    /// Applies a real radial multiplier `symbol(|k|^2)` to every nonzero mode.
    pub fn apply_radial(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let mut out = Self::zeros(self.grid);
        for (i, k) in self.grid.modes().skip(1) {
            out.coeffs[i] = self.coeffs[i] * symbol(norm_sq(k) as f64);
        }
        out
    }

    pub fn norms(&self) -> NormVector {
        NormVector {
            a0: self.wiener_unchecked(0.0),
            a2: self.wiener_unchecked(2.0),
            a4: self.wiener_unchecked(4.0),
            l2: self.sobolev(0.0),
            h2: self.sobolev(2.0),
            linf: self.linf(),
            mean: self.mean,
        }
    }

    /// Fraction of `sum |vhat|^2` carried by modes outside the inner
    /// two-thirds box `max_j |k_j| <= M/3`.
    pub fn top_third_energy_fraction(&self) -> f64 {
        let cutoff = (self.grid.points / 3) as i64;
        let mut total = 0.0;
        let mut top = 0.0;
        for (i, k) in self.grid.modes().skip(1) {
            let e = self.coeffs[i].norm_sqr();
            total += e;
            if k[..self.grid.dim].iter().any(|kj| kj.abs() > cutoff) {
                top += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            top / total
        }
    }

    /// Random smooth zero-mean field: `|vhat(k)|` proportional to `rho^|k|`
    /// for `0 < max_j |k_j| <= kmax`, uniform random phases, rescaled so the
    /// Wiener norm equals `a0`.
    pub fn random<R: Rng + ?Sized>(grid: Grid, rng: &mut R, spec: &RandomFieldSpec) -> Result<Self> {
        let half = (grid.points / 2) as i64;
        let kmax = spec.kmax.min(half - 1);
        if kmax < 1 {
            return Err(FilmError::InvalidParams("random field needs kmax >= 1".into()));
        }
        let mut field = Self::zeros(grid);
        // Visit each +/- pair once: first nonzero component positive.
        for (_, k) in grid.modes() {
            let k = &k[..grid.dim];
            let first = k.iter().find(|&&kj| kj != 0);
            match first {
                Some(&f) if f > 0 => {}
                _ => continue,
            }
            if k.iter().any(|kj| kj.abs() > kmax) {
                continue;
            }
            let radius = (k.iter().map(|kj| kj * kj).sum::<i64>() as f64).sqrt();
            let amplitude = spec.rho.powf(radius) * rng.random_range(0.5..1.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            field.add_mode(k, Complex64::from_polar(amplitude, phase))?;
        }
        let a0 = field.wiener_unchecked(0.0);
        if a0 == 0.0 {
            return Ok(field);
        }
        Ok(field.scaled(spec.a0 / a0))
    }
}

/// Parameters of [`SpectralField::random`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldSpec {
    pub a0: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_kmax")]
    pub kmax: i64,
}

fn default_rho() -> f64 {
    0.5
}

fn default_kmax() -> i64 {
    16
}

/// Snapshot of the norms monitored along a trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormVector {
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub l2: f64,
    pub h2: f64,
    pub linf: f64,
    pub mean: f64,
}

fn phase_sign(k: Mode) -> f64 {
    if (k[0] + k[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Real samples to coefficients.
pub fn forward_transform(grid: &Grid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(FilmError::SizeMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(FilmError::NonFinite { index });
    }
    let fft = FftNd::new(grid.dim, grid.points);
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.process(&mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for (i, k) in grid.modes() {
        data[i] *= scale * phase_sign(k);
    }
    let mut field = SpectralField::from_coefficients(*grid, data)?;
    field.symmetrize();
    Ok(field)
}

/// Coefficients to real samples; fails if the imaginary residue shows
/// broken Hermitian symmetry.
pub fn inverse_transform(field: &SpectralField) -> Result<Vec<f64>> {
    let data = complex_samples(field);
    let scale = data.iter().fold(1.0f64, |acc, c| acc.max(c.re.abs()));
    let residue = data.iter().fold(0.0f64, |acc, c| acc.max(c.im.abs()));
    let threshold = HERMITIAN_RESIDUE * scale;
    if residue > threshold {
        return Err(FilmError::HermitianResidue { residue, threshold });
    }
    Ok(data.into_iter().map(|c| c.re).collect())
}

fn complex_samples(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid;
    let fft = FftNd::new(grid.dim, grid.points);
    let mut data = field.coeffs.clone();
    data[0] = Complex64::new(field.mean, 0.0);
    for (i, k) in grid.modes() {
        data[i] *= phase_sign(k);
    }
    fft.process(&mut data, true);
    data
}

fn real_samples(field: &SpectralField) -> Vec<f64> {
    complex_samples(field).into_iter().map(|c| c.re).collect()
}

/// Moves coefficients between the `M`-point grid and a `3M/2`-point padded
/// grid, so that quadratic products are alias-free on the retained modes.
#[derive(Clone)]
pub struct Dealiaser {
    grid: Grid,
    padded: usize,
    fft: FftNd,
    /// For every resolved non-Nyquist mode: (index on M grid, index on padded grid).
    map: Vec<(usize, usize)>,
}

impl Dealiaser {
    pub fn new(grid: Grid) -> Self {
        let padded = 3 * grid.points / 2;
        let fft = FftNd::new(grid.dim, padded);
        let map = grid
            .modes()
            .filter(|&(_, k)| !grid.is_nyquist(k))
            .map(|(i, k)| {
                let pi = |kj: i64| if kj >= 0 { kj as usize } else { (kj + padded as i64) as usize };
                let j = match grid.dim {
                    1 => pi(k[0]),
                    _ => pi(k[0]) * padded + pi(k[1]),
                };
                (i, j)
            })
            .collect();
        Self {
            grid,
            padded,
            fft,
            map,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn padded_points(&self) -> usize {
        self.padded
    }

    pub fn padded_len(&self) -> usize {
        self.fft.len()
    }

    /// Samples of the field (mean included) on the padded grid. Nyquist
    /// modes are dropped.
    pub fn to_padded(&self, coeffs: &[Complex64], mean: f64) -> Vec<f64> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.fft.len()];
        for &(i, j) in &self.map {
            data[j] = coeffs[i];
        }
        data[0] = Complex64::new(mean, 0.0);
        self.fft.process(&mut data, true);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Coefficients of padded samples truncated to the resolved non-Nyquist
    /// modes of the base grid. The `k = 0` coefficient is returned as the mean.
    pub fn from_padded(&self, samples: &[f64]) -> SpectralField {
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.process(&mut data, false);
        let scale = 1.0 / self.fft.len() as f64;
        let mut field = SpectralField::zeros(self.grid);
        for &(i, j) in &self.map {
            field.coeffs[i] = data[j] * scale;
        }
        field.mean = field.coeffs[0].re;
        field.coeffs[0] = Complex64::new(0.0, 0.0);
        field
    }
}
