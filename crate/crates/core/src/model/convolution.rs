//! Transform-free evaluation of the series right-hand side.
//!
//! Each family is `(-1)^r a_i(r) v^r m_i` with `m_i` a product of derivatives
//! of `v`. In coefficient space `v^r m_i` is the `r`-fold nested lattice sum
//!
//! ```text
//! sum_{a1..ar} vhat(a_r) prod_s vhat(a_s - a_{s+1}) mhat_i(k - a_1)
//! ```
//!
//! which is evaluated here as iterated direct convolution over a bounded
//! box of the integer lattice. Derivatives use the exact symbols `(i k_j)`.
//! Cost grows like `(n kmax)^N` per convolution; use only on small supports.

use num_complex::Complex64;

use super::{linear_symbol_sq, FamilyCoefficients, CoefficientForm, ModelParams};
use crate::error::{FilmError, Result};
use crate::spectral::SpectralField;

/// Largest admissible per-axis support of the input field.
pub const MAX_ORACLE_KMAX: i64 = 4;

/// Largest lattice box (number of sites) the oracle will allocate.
const MAX_BOX_SITES: usize = 1 << 16;

/// Coefficients on the box `[-radius, radius]^dim`.
#[derive(Clone, Debug)]
struct Lattice {
    dim: usize,
    radius: i64,
    data: Vec<Complex64>,
}

impl Lattice {
    fn zeros(dim: usize, radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        Self {
            dim,
            radius,
            data: vec![Complex64::new(0.0, 0.0); side.pow(dim as u32)],
        }
    }

    fn delta(dim: usize) -> Self {
        let mut l = Self::zeros(dim, 0);
        l.data[0] = Complex64::new(1.0, 0.0);
        l
    }

    fn side(&self) -> i64 {
        2 * self.radius + 1
    }

    fn site(&self, idx: usize) -> [i64; 2] {
        let side = self.side() as usize;
        match self.dim {
            1 => [idx as i64 - self.radius, 0],
            _ => [
                (idx / side) as i64 - self.radius,
                (idx % side) as i64 - self.radius,
            ],
        }
    }

    fn index(&self, k: [i64; 2]) -> Option<usize> {
        let r = self.radius;
        if k[0].abs() > r || (self.dim == 2 && k[1].abs() > r) {
            return None;
        }
        let side = self.side();
        Some(match self.dim {
            1 => (k[0] + r) as usize,
            _ => ((k[0] + r) * side + (k[1] + r)) as usize,
        })
    }

    fn get(&self, k: [i64; 2]) -> Complex64 {
        self.index(k).map_or(Complex64::new(0.0, 0.0), |i| self.data[i])
    }

    /// Multiplies every site by `symbol(k)`.
    fn map(&self, symbol: impl Fn([i64; 2]) -> Complex64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.data.iter_mut().enumerate() {
            *c *= symbol(self.site(i));
        }
        out
    }

    /// Direct lattice convolution `(a * b)(k) = sum_q a(q) b(k - q)`.
    fn conv(&self, other: &Lattice) -> Lattice {
        let mut out = Lattice::zeros(self.dim, self.radius + other.radius);
        let support: Vec<([i64; 2], Complex64)> = other
            .data
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .map(|(i, &c)| (other.site(i), c))
            .collect();
        for (i, &a) in self.data.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let q = self.site(i);
            for &(p, b) in &support {
                let k = [q[0] + p[0], q[1] + p[1]];
                let j = out.index(k).expect("sum of radii bounds the support");
                out.data[j] += a * b;
            }
        }
        out
    }

    /// `self += factor * other`, with `other` no larger than `self`.
    fn add_scaled(&mut self, other: &Lattice, factor: f64) {
        for (i, &c) in other.data.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let j = self.index(other.site(i)).expect("accumulator covers operand");
            self.data[j] += c * factor;
        }
    }
}

fn i_k(k: i64) -> Complex64 {
    Complex64::new(0.0, k as f64)
}

fn k_sq(k: [i64; 2]) -> f64 {
    (k[0] * k[0] + k[1] * k[1]) as f64
}

/// Full right-hand side (linear symbol plus truncated series) of a field
/// supported on `max_j |k_j| <= kmax`, evaluated by direct convolution.
///
/// The result keeps the base grid's resolved non-Nyquist modes, the same set
/// retained by the dealiased evaluators. The `k = 0` value of the nonlinear
/// sum is stored as the field mean.
pub fn rhs_convolution_oracle(v: &SpectralField, params: &ModelParams, kmax: i64) -> Result<SpectralField> {
    let grid = *v.grid();
    let dim = grid.dim();
    if !(1..=MAX_ORACLE_KMAX).contains(&kmax) {
        return Err(FilmError::SupportTooLarge(format!(
            "kmax must be in 1..={MAX_ORACLE_KMAX}, got {kmax}"
        )));
    }
    let a0 = v.wiener_unchecked(0.0);
    if a0 >= 1.0 {
        return Err(FilmError::SeriesDivergence(a0));
    }
    let n = params.n_trunc;
    let radius = (n as i64 + 3) * kmax;
    let sites = ((2 * radius + 1) as usize).pow(dim as u32);
    if sites > MAX_BOX_SITES {
        return Err(FilmError::SupportTooLarge(format!(
            "lattice box of {sites} sites for n = {n}, kmax = {kmax}"
        )));
    }

    let mut base = Lattice::zeros(dim, kmax);
    let noise = 1e-14 * a0;
    for (i, k) in grid.modes().skip(1) {
        let c = v.coeffs()[i];
        match base.index(k) {
            Some(j) => base.data[j] = c,
            None if c.norm() > noise => {
                return Err(FilmError::SupportTooLarge(format!(
                    "mode {:?} lies outside |k_j| <= {kmax}",
                    &k[..dim]
                )))
            }
            None => {}
        }
    }

    let lap = base.map(|k| Complex64::new(-k_sq(k), 0.0));
    let bilap = base.map(|k| Complex64::new(k_sq(k) * k_sq(k), 0.0));
    let mut grad_sq = Lattice::zeros(dim, 2 * kmax);
    let mut grad_dot = Lattice::zeros(dim, 4 * kmax);
    for axis in 0..dim {
        let d = base.map(|k| i_k(k[axis]));
        let dl = lap.map(|k| i_k(k[axis]));
        grad_sq.add_scaled(&d.conv(&d), 1.0);
        grad_dot.add_scaled(&d.conv(&dl), 1.0);
    }
    // 2 grad v . grad lap v + (lap v)^2
    let mut m1 = lap.conv(&lap);
    m1.add_scaled(&grad_dot, 2.0);
    let m2 = grad_sq.conv(&lap);

    let mut sum = Lattice::zeros(dim, radius);
    let mut power = Lattice::delta(dim);
    for r in 0..=n {
        if r > 0 {
            power = power.conv(&base);
        }
        let c = FamilyCoefficients::at(r, params.c1, params.c2, CoefficientForm::Quasilinear);
        let mut family = Lattice::zeros(dim, 3 * kmax);
        family.add_scaled(&m1, c.n1);
        family.add_scaled(&m2, c.n2);
        family.add_scaled(&grad_sq, -c.n4);
        if r > 0 {
            family.add_scaled(&bilap, c.n0);
            family.add_scaled(&lap, -c.n3);
        }
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        sum.add_scaled(&power.conv(&family), sign);
    }

    let mut out = SpectralField::zeros(grid);
    for (i, k) in grid.modes().skip(1) {
        if grid.is_nyquist(k) {
            continue;
        }
        let linear = linear_symbol_sq(k_sq(k), params.c1, params.c2) * base.get(k);
        out.coeffs_mut()[i] = linear - sum.get(k);
    }
    out.set_mean(-sum.get([0, 0]).re);
    Ok(out)
}
