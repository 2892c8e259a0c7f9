//! Wetting potential and right-hand-side evaluators.
//!
//! Three independent routes to the right-hand side of
//! `dv/dt = -lap^2 v - lap(G(v) lap v - G'(v))`:
//!
//! * [`RhsEvaluator::pseudospectral`] forms `G(v) lap v - G'(v)` pointwise
//!   with the closed-form potential and applies `-lap` in coefficient space.
//! * [`RhsEvaluator::series`] splits off the exact linear part and sums the
//!   quasilinear power-series families `N_i^r` pointwise, truncated at order
//!   `n`.
//! * [`rhs_convolution_oracle`] evaluates the same families as exact lattice
//!   convolutions of the Fourier coefficients, with no transforms at all.
//!
//! The first two share the dealiased sample grid; the oracle shares nothing
//! but the coefficient formulas.

mod convolution;

use serde::{Deserialize, Serialize};

use crate::error::{FilmError, Result};
use crate::spectral::{Dealiaser, Grid, SpectralField};

pub use convolution::{rhs_convolution_oracle, MAX_ORACLE_KMAX};

/// Dimensionless potential coefficients and the series truncation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub c1: f64,
    pub c2: f64,
    #[serde(default = "default_n_trunc")]
    pub n_trunc: usize,
}

/// Series order used when a configuration leaves it out.
pub const DEFAULT_N_TRUNC: usize = 40;

fn default_n_trunc() -> usize {
    DEFAULT_N_TRUNC
}

impl ModelParams {
    pub fn new(c1: f64, c2: f64, n_trunc: usize) -> Result<Self> {
        let params = Self { c1, c2, n_trunc };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(FilmError::InvalidParams(format!("c1 must be positive, got {}", self.c1)));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(FilmError::InvalidParams(format!("c2 must be positive, got {}", self.c2)));
        }
        Ok(())
    }

    /// Coefficient of `-lap^2 v` in the linearization, `1 + c2 - c1`.
    pub fn biharmonic_coefficient(&self) -> f64 {
        1.0 + self.c2 - self.c1
    }

    /// Coefficient of `lap v` in the linearization, `2 (3 c2 - c1)`.
    pub fn laplacian_coefficient(&self) -> f64 {
        2.0 * (3.0 * self.c2 - self.c1)
    }
}

fn pole_check(v: f64) -> Result<()> {
    if v > -1.0 {
        Ok(())
    } else {
        Err(FilmError::OutOfDomain(format!("G has a pole at v = -1, got v = {v}")))
    }
}

/// `G(v) = -c1/(1+v) + c2/(1+v)^2`.
pub fn g_closed(v: f64, params: &ModelParams) -> Result<f64> {
    pole_check(v)?;
    Ok(g_unchecked(v, 0, params))
}

/// `p`-th derivative of `G`, `0 <= p <= 3`:
/// `(-1)^p p! [ -c1/(1+v)^(1+p) + (p+1) c2/(1+v)^(2+p) ]`.
pub fn g_deriv(v: f64, p: usize, params: &ModelParams) -> Result<f64> {
    if p > 3 {
        return Err(FilmError::OutOfDomain(format!("derivative order {p} > 3")));
    }
    pole_check(v)?;
    Ok(g_unchecked(v, p, params))
}

#[inline]
fn g_unchecked(v: f64, p: usize, params: &ModelParams) -> f64 {
    let inv = 1.0 / (1.0 + v);
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let fact = [1.0, 1.0, 2.0, 6.0][p];
    let a = inv.powi(1 + p as i32);
    sign * fact * (-params.c1 * a + (p as f64 + 1.0) * params.c2 * a * inv)
}

/// Truncated potential `G_n(v) = -c1 sum_{r<=n} (-v)^r + c2 sum_{r<=n} (r+1) (-v)^r`.
pub fn g_truncated(v: f64, params: &ModelParams) -> f64 {
    let mut acc = Kahan::default();
    let mut power = 1.0;
    for r in 0..=params.n_trunc {
        acc.add(power * (-params.c1 + (r as f64 + 1.0) * params.c2));
        power *= -v;
    }
    acc.sum()
}

/// Fourier symbol of the linear part, `-(1 + c2 - c1)|k|^4 - 2(3 c2 - c1)|k|^2`.
pub fn linear_symbol(k: &[i64], params: &ModelParams) -> f64 {
    let k2 = k.iter().map(|kj| kj * kj).sum::<i64>() as f64;
    linear_symbol_sq(k2, params.c1, params.c2)
}

/// [`linear_symbol`] as a function of `|k|^2`.
pub fn linear_symbol_sq(k2: f64, c1: f64, c2: f64) -> f64 {
    -(1.0 + c2 - c1) * k2 * k2 - 2.0 * (3.0 * c2 - c1) * k2
}

/// Which set of series coefficients to use for the `N_i^r` families.
///
/// `Quasilinear` carries the Taylor coefficients of `G^(p)` and reproduces the
/// equation. `Expanded` carries the alternative constants (extra factors 2,
/// 2, 2 and 3! on families 1 through 4) that appear in the first derivation of
/// the quasilinear form; it does not reproduce the equation and is kept only
/// for comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientForm {
    #[default]
    Quasilinear,
    Expanded,
}

/// Scalar prefactors of the five families at order `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyCoefficients {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
}

impl FamilyCoefficients {
    pub fn at(r: usize, c1: f64, c2: f64, form: CoefficientForm) -> Self {
        let r = r as f64;
        let p1 = r + 1.0;
        let p2 = (r + 2.0) * p1;
        let p3 = (r + 3.0) * p2;
        let p4 = (r + 4.0) * p3;
        match form {
            CoefficientForm::Quasilinear => Self {
                n0: -c1 + p1 * c2,
                n1: c1 * p1 - c2 * p2,
                n2: -c1 * p2 + c2 * p3,
                n3: -c1 * p2 + c2 * p3,
                n4: c1 * p3 - c2 * p4,
            },
            CoefficientForm::Expanded => Self {
                n0: -c1 + p1 * c2,
                n1: c1 * p1 - 2.0 * c2 * p2,
                n2: 2.0 * (-c1 * p2 + 3.0 * c2 * p3),
                n3: 2.0 * (-c1 * p2 + 3.0 * c2 * p3),
                n4: 6.0 * (c1 * p3 - 4.0 * c2 * p4),
            },
        }
    }
}

/// Right-hand side split into its linear and nonlinear contributions.
#[derive(Clone, Debug)]
pub struct RhsBreakdown {
    pub linear_biharmonic: SpectralField,
    pub linear_laplacian: SpectralField,
    pub nonlinear: SpectralField,
    pub total: SpectralField,
}

/// Thresholds checked before every evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    /// Smallest admissible `1 + min v` over the sample grid.
    pub pole: f64,
    /// Largest admissible fraction of spectral energy in the top third of modes.
    pub resolution: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            pole: 1e-6,
            resolution: 1e-8,
        }
    }
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn sum(&self) -> f64 {
        self.sum
    }
}

/// Pointwise samples of `v` and the derivative combinations entering the
/// series families, on the padded grid.
struct Monomials {
    v: Vec<f64>,
    /// `lap^2 v`
    m0: Vec<f64>,
    /// `2 grad v . grad lap v + (lap v)^2`
    m1: Vec<f64>,
    /// `|grad v|^2 lap v`
    m2: Vec<f64>,
    /// `lap v`
    m3: Vec<f64>,
    /// `|grad v|^2`
    m4: Vec<f64>,
}

/// Right-hand-side evaluator bound to one grid (holds FFT plans).
#[derive(Clone)]
pub struct RhsEvaluator {
    dealiaser: Dealiaser,
    guards: Guards,
}

impl RhsEvaluator {
    pub fn new(grid: Grid) -> Self {
        Self::with_guards(grid, Guards::default())
    }

    pub fn with_guards(grid: Grid, guards: Guards) -> Self {
        Self {
            dealiaser: Dealiaser::new(grid),
            guards,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.dealiaser.grid()
    }

    pub fn guards(&self) -> &Guards {
        &self.guards
    }

    fn check_resolution(&self, v: &SpectralField) -> Result<()> {
        let fraction = v.top_third_energy_fraction();
        if fraction > self.guards.resolution {
            return Err(FilmError::Underresolved {
                fraction,
                limit: self.guards.resolution,
            });
        }
        Ok(())
    }

    fn check_pole(&self, samples: &[f64]) -> Result<()> {
        let min = samples.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        let margin = 1.0 + min;
        if samples.is_empty() || margin > self.guards.pole {
            Ok(())
        } else {
            Err(FilmError::Pole {
                margin,
                guard: self.guards.pole,
            })
        }
    }

    fn padded(&self, field: &SpectralField) -> Vec<f64> {
        self.dealiaser.to_padded(field.coeffs(), field.mean())
    }

    fn laplacian(v: &SpectralField) -> SpectralField {
        v.apply_radial(|k2| -k2)
    }

    fn linear_parts(v: &SpectralField, params: &ModelParams) -> (SpectralField, SpectralField) {
        let b = params.biharmonic_coefficient();
        let l = params.laplacian_coefficient();
        (
            v.apply_radial(|k2| -b * k2 * k2),
            v.apply_radial(|k2| -l * k2),
        )
    }

    /// Closed-form potential evaluated pointwise on the dealiased grid.
    ///
    /// The linear Laplacian part is not separated: `linear_laplacian` is
    /// zero and `nonlinear` holds `-lap(G(v) lap v - G'(v))` in full.
    pub fn pseudospectral(&self, v: &SpectralField, params: &ModelParams) -> Result<RhsBreakdown> {
        self.check_resolution(v)?;
        let vs = self.padded(v);
        self.check_pole(&vs)?;
        let lap = self.padded(&Self::laplacian(v));
        let flux: Vec<f64> = vs
            .iter()
            .zip(&lap)
            .map(|(&x, &l)| g_unchecked(x, 0, params) * l - g_unchecked(x, 1, params))
            .collect();
        let flux = self.dealiaser.from_padded(&flux);
        // -lap in coefficient space; the mean is annihilated exactly
        let nonlinear = flux.apply_radial(|k2| k2);
        let biharmonic = v.apply_radial(|k2| -k2 * k2);
        let total = biharmonic.axpy(1.0, &nonlinear);
        Ok(RhsBreakdown {
            linear_biharmonic: biharmonic,
            linear_laplacian: SpectralField::zeros(*v.grid()),
            nonlinear,
            total,
        })
    }

    /// Quasilinear series form truncated at `params.n_trunc`.
    pub fn series(&self, v: &SpectralField, params: &ModelParams) -> Result<RhsBreakdown> {
        self.series_with(v, params, CoefficientForm::Quasilinear)
    }

    pub fn series_with(
        &self,
        v: &SpectralField,
        params: &ModelParams,
        form: CoefficientForm,
    ) -> Result<RhsBreakdown> {
        let a0 = v.wiener_unchecked(0.0);
        if a0 >= 1.0 {
            return Err(FilmError::SeriesDivergence(a0));
        }
        self.check_resolution(v)?;
        let m = self.monomials(v);
        self.check_pole(&m.v)?;
        let coeffs: Vec<FamilyCoefficients> = (0..=params.n_trunc)
            .map(|r| FamilyCoefficients::at(r, params.c1, params.c2, form))
            .collect();
        let samples: Vec<f64> = (0..m.v.len())
            .map(|p| {
                let x = m.v[p];
                let (m0, m1, m2, m3, m4) = (m.m0[p], m.m1[p], m.m2[p], m.m3[p], m.m4[p]);
                let mut acc = Kahan::default();
                // (-1)^r v^r
                let mut power = 1.0;
                for (r, c) in coeffs.iter().enumerate() {
                    let mut term = c.n1 * m1 + c.n2 * m2 - c.n4 * m4;
                    if r >= 1 {
                        term += c.n0 * m0 - c.n3 * m3;
                    }
                    acc.add(power * term);
                    power *= -x;
                }
                -acc.sum()
            })
            .collect();
        let nonlinear = self.dealiaser.from_padded(&samples);
        let (biharmonic, laplacian) = Self::linear_parts(v, params);
        let total = biharmonic.axpy(1.0, &laplacian).axpy(1.0, &nonlinear);
        Ok(RhsBreakdown {
            linear_biharmonic: biharmonic,
            linear_laplacian: laplacian,
            nonlinear,
            total,
        })
    }

    fn monomials(&self, v: &SpectralField) -> Monomials {
        let dim = v.grid().dim();
        let lap = Self::laplacian(v);
        let vs = self.padded(v);
        let n = vs.len();
        let lap_s = self.padded(&lap);
        let bilap_s = self.padded(&v.apply_radial(|k2| k2 * k2));
        let mut grad_sq = vec![0.0; n];
        let mut grad_dot = vec![0.0; n];
        for axis in 0..dim {
            let mut orders = vec![0; dim];
            orders[axis] = 1;
            let g = self.padded(&v.derivative(&orders).expect("first derivative"));
            let gl = self.padded(&lap.derivative(&orders).expect("first derivative"));
            for p in 0..n {
                grad_sq[p] += g[p] * g[p];
                grad_dot[p] += g[p] * gl[p];
            }
        }
        let m1 = (0..n).map(|p| 2.0 * grad_dot[p] + lap_s[p] * lap_s[p]).collect();
        let m2 = (0..n).map(|p| grad_sq[p] * lap_s[p]).collect();
        Monomials {
            v: vs,
            m0: bilap_s,
            m1,
            m2,
            m3: lap_s,
            m4: grad_sq,
        }
    }
}

/// [`RhsEvaluator::pseudospectral`] with default guards.
pub fn rhs_pseudospectral(v: &SpectralField, params: &ModelParams) -> Result<RhsBreakdown> {
    RhsEvaluator::new(*v.grid()).pseudospectral(v, params)
}

/// [`RhsEvaluator::series`] with default guards.
pub fn rhs_series(v: &SpectralField, params: &ModelParams) -> Result<RhsBreakdown> {
    RhsEvaluator::new(*v.grid()).series(v, params)
}

/// `L(k) vhat(k)` for every mode.
pub fn apply_linear_symbol(v: &SpectralField, params: &ModelParams) -> SpectralField {
    v.apply_radial(|k2| linear_symbol_sq(k2, params.c1, params.c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RandomFieldSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize) -> ModelParams {
        ModelParams::new(0.5, 1.0, n).unwrap()
    }

    fn a0_distance(a: &SpectralField, b: &SpectralField) -> f64 {
        a.axpy(-1.0, b).wiener_unchecked(0.0)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 3).is_err());
        assert!(ModelParams::new(0.5, -1.0, 3).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 3).is_err());
    }

    #[test]
    fn potential_examples() {
        let p = ModelParams::new(0.7, 1.3, 0).unwrap();
        assert_relative_eq!(g_closed(0.0, &p).unwrap(), 1.3 - 0.7, epsilon = 1e-15);
        assert_relative_eq!(g_deriv(0.0, 1, &p).unwrap(), 0.7 - 2.0 * 1.3, epsilon = 1e-15);
        assert_eq!(g_deriv(0.3, 0, &p).unwrap(), g_closed(0.3, &p).unwrap());
        assert!(g_closed(-1.0, &p).is_err());
        assert!(g_deriv(-1.5, 2, &p).is_err());
        assert!(g_deriv(0.0, 4, &p).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = ModelParams::new(0.8, 1.7, 0).unwrap();
        let g = |v: f64| g_closed(v, &p).unwrap();
        for i in 0..=20 {
            let v = 0.5 * i as f64 / 20.0;
            let h = 1e-5;
            let d1 = (g(v + h) - g(v - h)) / (2.0 * h);
            let h = 1e-4;
            let d2 = (g(v + h) - 2.0 * g(v) + g(v - h)) / (h * h);
            // third derivative: Richardson on the 4-point central stencil
            let d3h = |h: f64| (g(v + 2.0 * h) - 2.0 * g(v + h) + 2.0 * g(v - h) - g(v - 2.0 * h)) / (2.0 * h.powi(3));
            let d3 = (4.0 * d3h(1e-3) - d3h(2e-3)) / 3.0;
            for (p_order, fd) in [(1, d1), (2, d2), (3, d3)] {
                let exact = g_deriv(v, p_order, &p).unwrap();
                assert!(
                    ((exact - fd) / exact).abs() < 1e-6,
                    "p={p_order} v={v} exact={exact} fd={fd}"
                );
            }
        }
    }

    #[test]
    fn truncated_potential_examples() {
        let p = ModelParams::new(0.4, 0.9, 0).unwrap();
        for v in [-0.7, 0.0, 0.3, 2.0] {
            assert_relative_eq!(g_truncated(v, &p), 0.9 - 0.4, epsilon = 1e-15);
        }
        let p = ModelParams::new(0.4, 0.9, 17).unwrap();
        assert_relative_eq!(g_truncated(0.0, &p), 0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn truncation_tail_bound(v in -0.5f64..0.5, n in 0usize..=80, c1 in 0.01f64..3.0, c2 in 0.01f64..3.0) {
            let p = ModelParams::new(c1, c2, n).unwrap();
            let w = v.abs();
            let bound = (c1 + c2 * (n as f64 + 2.0)) * w.powi(n as i32 + 1) / (1.0 - w).powi(2);
            let diff = (g_truncated(v, &p) - g_closed(v, &p).unwrap()).abs();
            prop_assert!(diff <= bound + 1e-13 * (c1 + c2), "diff={} bound={}", diff, bound);
        }

        #[test]
        fn potential_minimum_bound(c1 in 0.01f64..3.0, ratio in 0.5f64..5.0, v in 0.0f64..20.0) {
            // 2 c2 >= c1
            let c2 = ratio * c1;
            let p = ModelParams::new(c1, c2, 0).unwrap();
            let value = 1.0 + g_closed(v, &p).unwrap();
            prop_assert!(value >= 1.0 - c1 * c1 / (4.0 * c2) - 1e-12);
        }
    }

    #[test]
    fn linear_symbol_examples() {
        let p = params(0);
        assert_eq!(linear_symbol(&[0], &p), 0.0);
        assert_relative_eq!(linear_symbol(&[1], &p), -6.5, epsilon = 1e-15);
        assert_relative_eq!(linear_symbol(&[0, 2], &p), -44.0, epsilon = 1e-13);
        assert_relative_eq!(linear_symbol(&[2, 0], &p), -44.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_field_gives_zero_rhs() {
        let g = Grid::new(2, 16).unwrap();
        let v = SpectralField::zeros(g);
        let ps = rhs_pseudospectral(&v, &params(4)).unwrap();
        let se = rhs_series(&v, &params(4)).unwrap();
        for b in [&ps, &se] {
            for f in [&b.linear_biharmonic, &b.linear_laplacian, &b.nonlinear, &b.total] {
                assert_eq!(f.wiener_unchecked(0.0), 0.0);
                assert_eq!(f.mean(), 0.0);
            }
        }
    }

    #[test]
    fn small_cosine_linearizes_to_symbol() {
        let g = Grid::new(1, 32).unwrap();
        let p = params(0);
        let expected_rate = -(1.0 + 1.0 - 0.5) - 2.0 * (3.0 - 0.5);
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4, 1e-8] {
            let v = SpectralField::from_cosines(g, &[(vec![1], eps, 0.0)]).unwrap();
            let rhs = rhs_pseudospectral(&v, &p).unwrap();
            let c = rhs.total.coeff(&[1]);
            let rel = (c.re - expected_rate * eps / 2.0).abs() / (expected_rate * eps / 2.0).abs();
            assert!(rel < 10.0 * eps, "eps={eps} rel={rel}");
            assert!(rel < last || rel < 1e-12);
            last = rel;
        }
    }

    #[test]
    fn pseudospectral_rejects_pole_and_underresolution() {
        let g = Grid::new(1, 32).unwrap();
        let v = SpectralField::from_cosines(g, &[(vec![1], 1.2, 0.0)]).unwrap();
        assert!(matches!(rhs_pseudospectral(&v, &params(0)), Err(FilmError::Pole { .. })));
        let v = SpectralField::from_cosines(g, &[(vec![1], 0.1, 0.0), (vec![14], 0.01, 0.0)]).unwrap();
        assert!(matches!(
            rhs_pseudospectral(&v, &params(0)),
            Err(FilmError::Underresolved { .. })
        ));
    }

    #[test]
    fn series_rejects_large_wiener_norm() {
        let g = Grid::new(1, 32).unwrap();
        let v = SpectralField::from_cosines(g, &[(vec![1], 0.6, 0.0), (vec![2], 0.5, 0.0)]).unwrap();
        assert!(matches!(rhs_series(&v, &params(10)), Err(FilmError::SeriesDivergence(_))));
    }

    #[test]
    fn series_order_zero_single_mode_is_quadratic() {
        let g = Grid::new(1, 32).unwrap();
        let p = params(0);
        let mut prev = None;
        for eps in [1e-3, 1e-4] {
            let v = SpectralField::from_cosines(g, &[(vec![1], eps, 0.0)]).unwrap();
            let nl = rhs_series(&v, &p).unwrap().nonlinear.wiener_unchecked(0.0);
            if let Some(prev) = prev {
                // ten times smaller amplitude, hundred times smaller remainder
                // (up to the cubic family, one order higher)
                assert_relative_eq!(prev / nl, 100.0, max_relative = 1e-2);
            }
            prev = Some(nl);
        }
    }

    #[test]
    fn series_breakdown_sums_to_total() {
        let g = Grid::new(2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = SpectralField::random(g, &mut rng, &RandomFieldSpec { a0: 0.2, rho: 0.5, kmax: 6 }).unwrap();
        let b = rhs_series(&v, &params(30)).unwrap();
        let sum = b.linear_biharmonic.axpy(1.0, &b.linear_laplacian).axpy(1.0, &b.nonlinear);
        assert!(a0_distance(&sum, &b.total) <= 1e-12);
        assert!(b.total.mean().abs() <= 1e-12);
        assert_eq!(b.total.hermitian_defect(), b.total.hermitian_defect().min(1e-14));
    }

    #[test]
    fn evaluators_agree_on_random_fields() {
        for (dim, m) in [(1usize, 128usize), (2, 32)] {
            let g = Grid::new(dim, m).unwrap();
            let ev = RhsEvaluator::new(g);
            let p = params(60);
            for seed in 0..5u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = SpectralField::random(g, &mut rng, &RandomFieldSpec { a0: 0.2, rho: 0.5, kmax: m as i64 / 4 }).unwrap();
                let a = ev.pseudospectral(&v, &p).unwrap();
                let b = ev.series(&v, &p).unwrap();
                let tol = 1e-8 * (1.0 + v.wiener_unchecked(4.0));
                assert!(a0_distance(&a.total, &b.total) <= tol);
                assert!(a.total.mean().abs() <= 1e-12 && b.total.mean().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn expanded_form_differs_from_quasilinear() {
        let g = Grid::new(1, 32).unwrap();
        let v = SpectralField::from_cosines(g, &[(vec![1], 0.1, 0.0)]).unwrap();
        let ev = RhsEvaluator::new(g);
        let a = ev.series_with(&v, &params(10), CoefficientForm::Quasilinear).unwrap();
        let b = ev.series_with(&v, &params(10), CoefficientForm::Expanded).unwrap();
        assert!(a0_distance(&a.nonlinear, &b.nonlinear) > 1e-3);
        let c = FamilyCoefficients::at(0, 0.5, 1.0, CoefficientForm::Quasilinear);
        // r = 0 coefficient of the G'' series is the linear Laplacian coefficient
        assert_relative_eq!(c.n3, params(0).laplacian_coefficient(), epsilon = 1e-15);
    }
}
