//! Closed-form analysis: scaling to dimensionless form, parameter conditions,
//! the smallness constants and decay envelope, and linear stability.

use serde::{Deserialize, Serialize};

use crate::error::{FilmError, Result};
use crate::model::linear_symbol_sq;

/// Dimensional inputs (CGS units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Length parameter `d` (cm).
    pub d: f64,
    /// Atomic volume (cm^3).
    #[serde(rename = "V")]
    pub volume: f64,
    /// Surface energy (erg/cm^2).
    pub g0: f64,
    /// Surface mobility (cm s / g).
    #[serde(rename = "M_mob")]
    pub mobility: f64,
    /// Attractive wetting energy (erg/cm^2).
    pub c1_phys: f64,
    /// Repulsive wetting energy (erg/cm^2).
    pub c2_phys: f64,
    /// Mean initial film height (cm). Taken as supplied; no torus-measure
    /// normalization is applied.
    pub u0_mass: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d", self.d),
            ("V", self.volume),
            ("g0", self.g0),
            ("M_mob", self.mobility),
            ("c1_phys", self.c1_phys),
            ("c2_phys", self.c2_phys),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FilmError::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.u0_mass >= 0.0 && self.u0_mass.is_finite()) {
            return Err(FilmError::InvalidParams(format!(
                "u0_mass must be nonnegative, got {}",
                self.u0_mass
            )));
        }
        Ok(())
    }
}

/// Dimensionless coefficients and the length/time units they imply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub c1: f64,
    pub c2: f64,
    /// Physical length of one dimensionless unit (cm).
    pub x_scale: f64,
    /// Physical time of one dimensionless unit (s).
    pub t_scale: f64,
}

pub fn nondimensionalize(p: &PhysicalParams) -> Result<Scaling> {
    p.validate()?;
    let ratio = p.d / (p.d + p.u0_mass);
    Ok(Scaling {
        c1: ratio * p.c1_phys / p.g0,
        c2: ratio * ratio * p.c2_phys / p.g0,
        x_scale: p.d,
        t_scale: p.d.powi(4) / (p.volume * p.mobility * p.g0),
    })
}

/// Which parameter condition to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    /// `c2 > max{c1 - 1, c1/3}`
    Existence,
    /// `c2 > max{c1 - 1, c1/3, c1^2/4}`
    Regularity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    /// `c2 - bound`; positive when the strict inequality holds.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub mode: ConditionMode,
    pub holds: bool,
    pub margins: Vec<Margin>,
}

pub fn check_conditions(c1: f64, c2: f64, mode: ConditionMode) -> ConditionReport {
    let mut margins = vec![
        Margin {
            name: "c2 > c1 - 1".into(),
            value: c2 - (c1 - 1.0),
        },
        Margin {
            name: "c2 > c1/3".into(),
            value: c2 - c1 / 3.0,
        },
    ];
    if mode == ConditionMode::Regularity {
        margins.push(Margin {
            name: "c2 > c1^2/4".into(),
            value: c2 - c1 * c1 / 4.0,
        });
    }
    ConditionReport {
        mode,
        holds: margins.iter().all(|m| m.value > 0.0),
        margins,
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..1.0).contains(&s) {
        return Err(FilmError::OutOfDomain(format!(
            "A0 norm must lie in [0, 1), got {s}"
        )));
    }
    Ok(())
}

/// Coefficient multiplying the `A^4` semi-norm in the nonlinear bound.
pub fn delta1(s: f64, c1: f64, c2: f64) -> Result<f64> {
    check_s(s)?;
    let q = 1.0 - s;
    Ok(s * (c1 / q
        + (c2 * (2.0 - s) + 3.0 * c1) / q.powi(2)
        + 2.0 * (3.0 * c2 + c1 * s) / q.powi(3)
        + 6.0 * c2 * s / q.powi(4)))
}

/// Coefficient multiplying the `A^2` semi-norm in the nonlinear bound.
pub fn delta2(s: f64, c1: f64, c2: f64) -> Result<f64> {
    check_s(s)?;
    let q = 1.0 - s;
    Ok(s * (2.0 * c1 * (3.0 - 3.0 * s + s * s) / q.powi(3)
        + 6.0 * (c2 * (4.0 - 6.0 * s + 4.0 * s * s - s * s * s) + c1) / q.powi(4)
        + 24.0 * c2 / q.powi(5)))
}

/// Smallness constants and condition verdicts at `s0 = ||v0||_{A^0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub s0: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta1: f64,
    pub delta2: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    pub cond_existence: bool,
    pub cond_regularity: bool,
    pub cond_smallness: bool,
}

impl BoundSet {
    /// Guaranteed exponential decay rate `D1 + D2`.
    pub fn decay_rate(&self) -> f64 {
        self.d1 + self.d2
    }

    pub fn envelope(&self, t: f64) -> f64 {
        decay_envelope(t, self.s0, self.d1, self.d2)
    }
}

pub fn smallness_margins(s: f64, c1: f64, c2: f64) -> Result<BoundSet> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(FilmError::InvalidParams(format!(
            "c1 and c2 must be positive, got {c1}, {c2}"
        )));
    }
    let delta1 = delta1(s, c1, c2)?;
    let delta2 = delta2(s, c1, c2)?;
    let d1 = 1.0 + c2 - c1 - delta1;
    let d2 = 2.0 * (3.0 * c2 - c1) - delta2;
    Ok(BoundSet {
        s0: s,
        c1,
        c2,
        delta1,
        delta2,
        d1,
        d2,
        cond_existence: check_conditions(c1, c2, ConditionMode::Existence).holds,
        cond_regularity: check_conditions(c1, c2, ConditionMode::Regularity).holds,
        cond_smallness: d1 > 0.0 && d2 > 0.0,
    })
}

/// `s0 exp(-(D1 + D2) t)`.
pub fn decay_envelope(t: f64, s0: f64, d1: f64, d2: f64) -> f64 {
    s0 * (-(d1 + d2) * t).exp()
}

/// Linear growth rate of lattice mode `k`.
pub fn dispersion(k: &[i64], c1: f64, c2: f64) -> f64 {
    let k2 = k.iter().map(|kj| kj * kj).sum::<i64>() as f64;
    linear_symbol_sq(k2, c1, c2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthMode {
    pub k: Vec<i64>,
    pub lambda: f64,
}

/// Fastest-growing nonzero lattice mode with `|k| <= kmax` in `dim`
/// dimensions. Ties keep the first mode in lexicographic order.
pub fn max_growth(c1: f64, c2: f64, kmax: i64, dim: usize) -> GrowthMode {
    let kmax = kmax.max(1);
    let mut best = GrowthMode {
        k: vec![0; dim.max(1)],
        lambda: f64::NEG_INFINITY,
    };
    let mut consider = |k: Vec<i64>| {
        let k2: i64 = k.iter().map(|x| x * x).sum();
        if k2 == 0 || k2 > kmax * kmax {
            return;
        }
        let lambda = linear_symbol_sq(k2 as f64, c1, c2);
        if lambda > best.lambda {
            best = GrowthMode { k, lambda };
        }
    };
    if dim >= 2 {
        for a in -kmax..=kmax {
            for b in -kmax..=kmax {
                consider(vec![a, b]);
            }
        }
    } else {
        for a in -kmax..=kmax {
            consider(vec![a]);
        }
    }
    best
}

/// Open interval of `|k|` over which the continuum symbol is positive, if any.
/// Returns `(lo, f64::INFINITY)` when the quartic coefficient is negative.
pub fn unstable_band(c1: f64, c2: f64) -> Option<(f64, f64)> {
    let a = 1.0 + c2 - c1;
    let b = 2.0 * (3.0 * c2 - c1);
    if a > 0.0 {
        (b < 0.0).then(|| (0.0, (-b / a).sqrt()))
    } else if a < 0.0 {
        let lo = if b > 0.0 { (-b / a).sqrt() } else { 0.0 };
        Some((lo, f64::INFINITY))
    } else {
        (b < 0.0).then_some((0.0, f64::INFINITY))
    }
}

/// Critical thickness `d (3 c2 / c1 - 1)` of the classical linear stability
/// criterion, in the units of `d`. May be negative.
pub fn khenner_threshold(p: &PhysicalParams) -> f64 {
    p.d * (3.0 * p.c2_phys / p.c1_phys - 1.0)
}

/// Symbol-based stability set against the classical thickness criterion.
///
/// The two verdicts are reported side by side; they are not reconciled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityComparison {
    /// Mean film thickness over `d`.
    pub thickness_ratio: f64,
    /// Threshold `3 c2/c1 - 1` on the thickness ratio, in physical
    /// coefficients recovered from the dimensionless ones.
    pub threshold_ratio: f64,
    pub threshold_positive: bool,
    /// Classical criterion: stable when the thickness exceeds the threshold.
    pub threshold_stable: bool,
    /// No resolved lattice mode grows.
    pub symbol_stable_lattice: bool,
    /// No wavenumber of the continuum symbol grows.
    pub symbol_stable_continuum: bool,
    pub fastest_mode: GrowthMode,
    pub agree: bool,
}

/// Compares the dispersion-relation verdict for dimensionless `(c1, c2)` with
/// the thickness criterion at `thickness_ratio = u0 / d`.
pub fn stability_comparison(
    c1: f64,
    c2: f64,
    thickness_ratio: f64,
    kmax: i64,
    dim: usize,
) -> StabilityComparison {
    // dimensionless c2/c1 = (d / (d + u0)) * physical c2/c1
    let phys_ratio = (c2 / c1) * (1.0 + thickness_ratio);
    let threshold_ratio = 3.0 * phys_ratio - 1.0;
    let threshold_stable = thickness_ratio > threshold_ratio;
    let fastest_mode = max_growth(c1, c2, kmax, dim);
    let symbol_stable_lattice = fastest_mode.lambda <= 0.0;
    StabilityComparison {
        thickness_ratio,
        threshold_ratio,
        threshold_positive: threshold_ratio > 0.0,
        threshold_stable,
        symbol_stable_lattice,
        symbol_stable_continuum: unstable_band(c1, c2).is_none(),
        fastest_mode,
        agree: threshold_stable == symbol_stable_lattice,
    }
}

/// Partial sums and closed forms of the power series used in the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSums {
    pub w: f64,
    pub m: u32,
    pub n_trunc: usize,
    /// `sum_{r=0}^{n} w^r`
    pub geometric: f64,
    /// `1 / (1 - w)`
    pub geometric_closed: f64,
    /// `sum_{r=0}^{n} prod_{j=1}^{m} (r + j) w^r`
    pub rising_from0: f64,
    /// `m! / (1 - w)^(m+1)`
    pub rising_from0_closed: f64,
    /// `sum_{r=1}^{n} prod_{j=1}^{m} (r + j) w^r`
    pub rising_from1: f64,
    /// `m! (1 - (1 - w)^(m+1)) / (1 - w)^(m+1)`
    pub rising_from1_closed: f64,
}

pub fn series_closed_forms(w: f64, m: u32, n_trunc: usize) -> Result<SeriesSums> {
    if !(w > 0.0 && w < 1.0) {
        return Err(FilmError::OutOfDomain(format!("w must lie in (0, 1), got {w}")));
    }
    if !(1..=4).contains(&m) {
        return Err(FilmError::OutOfDomain(format!("m must lie in 1..=4, got {m}")));
    }
    let mut geometric = 0.0;
    let mut rising = 0.0;
    let mut first = 0.0;
    let mut power = 1.0;
    for r in 0..=n_trunc {
        let prod: f64 = (1..=m).map(|j| (r as u64 + j as u64) as f64).product();
        geometric += power;
        rising += prod * power;
        if r == 0 {
            first = prod;
        }
        power *= w;
    }
    let factorial: f64 = (1..=m).map(f64::from).product();
    let q = (1.0 - w).powi(m as i32 + 1);
    Ok(SeriesSums {
        w,
        m,
        n_trunc,
        geometric,
        geometric_closed: 1.0 / (1.0 - w),
        rising_from0: rising,
        rising_from0_closed: factorial / q,
        rising_from1: rising - first,
        rising_from1_closed: factorial * (1.0 - q) / q,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table() -> PhysicalParams {
        PhysicalParams {
            d: 0.5e-7,
            volume: 1e-22,
            g0: 2.5e3,
            mobility: 4e-3,
            c1_phys: 0.025,
            c2_phys: 2.5,
            u0_mass: 0.0,
        }
    }

    #[test]
    fn nondimensionalize_examples() {
        let s = nondimensionalize(&table()).unwrap();
        assert_relative_eq!(s.c1, 0.025 / 2.5e3, max_relative = 1e-15);
        assert_relative_eq!(s.c2, 2.5 / 2.5e3, max_relative = 1e-15);
        // (5e-8)^4 = 6.25e-30 over 1e-22 * 4e-3 * 2.5e3 = 1e-21
        assert_relative_eq!(s.t_scale, 6.25e-9, max_relative = 1e-12);
        assert_eq!(s.x_scale, 0.5e-7);

        let mut p = table();
        p.c1_phys = 1.0;
        p.c2_phys = 1.0;
        p.u0_mass = p.d;
        let s = nondimensionalize(&p).unwrap();
        assert_relative_eq!(s.c2, s.c1 / 2.0, max_relative = 1e-15);

        p.g0 = -1.0;
        assert!(nondimensionalize(&p).is_err());
    }

    #[test]
    fn condition_examples() {
        assert!(check_conditions(0.5, 1.0, ConditionMode::Existence).holds);
        assert!(check_conditions(2.0, 1.01, ConditionMode::Regularity).holds);
        let r = check_conditions(2.0, 0.9, ConditionMode::Regularity);
        assert!(!r.holds);
        assert_relative_eq!(r.margins[2].value, -0.1, epsilon = 1e-15);
    }

    // Reference values from a 30-digit evaluation of the closed forms.
    const D1_001: f64 = 1.396_776_601_226_981_985_9;
    const D2_001: f64 = 4.439_668_532_014_574_551_2;
    const DELTA2_01: f64 = 8.038_357_973_886_094_599_4;

    #[test]
    fn delta_examples() {
        assert_eq!(delta1(0.0, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(delta2(0.0, 0.5, 1.0).unwrap(), 0.0);
        assert_relative_eq!(delta1(0.01, 0.5, 1.0).unwrap(), 0.103_223_398_773_018_014, max_relative = 1e-13);
        assert_relative_eq!(delta2(0.01, 0.5, 1.0).unwrap(), 0.560_331_467_985_425_449, max_relative = 1e-13);
        assert_relative_eq!(delta2(0.1, 0.5, 1.0).unwrap(), DELTA2_01, max_relative = 1e-13);
        assert!(delta1(1.0, 0.5, 1.0).is_err());
        assert!(delta2(-0.1, 0.5, 1.0).is_err());
    }

    #[test]
    fn smallness_examples() {
        let b = smallness_margins(0.0, 0.5, 1.0).unwrap();
        assert_eq!((b.d1, b.d2), (1.5, 5.0));
        assert!(b.cond_smallness && b.cond_existence && b.cond_regularity);
        let b = smallness_margins(0.01, 0.5, 1.0).unwrap();
        assert_relative_eq!(b.d1, D1_001, max_relative = 1e-13);
        assert_relative_eq!(b.d2, D2_001, max_relative = 1e-13);
        assert!(b.cond_smallness);
        let b = smallness_margins(0.1, 0.5, 1.0).unwrap();
        assert_relative_eq!(b.d2, 5.0 - DELTA2_01, max_relative = 1e-13);
        assert!(!b.cond_smallness);
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(decay_envelope(0.0, 0.3, 1.0, 2.0), 0.3);
        assert_eq!(decay_envelope(7.0, 0.3, 1.0, -1.0), 0.3);
        // 0.01 * exp(-5.836), 30-digit reference
        assert_relative_eq!(
            decay_envelope(1.0, 0.01, 2.0, 3.836),
            2.920_501_298_115_547_756e-5,
            max_relative = 1e-13
        );
    }

    #[test]
    fn dispersion_examples() {
        let g = max_growth(0.5, 1.0, 8, 1);
        assert!(g.lambda < 0.0);
        assert_relative_eq!(g.lambda, -6.5, epsilon = 1e-14);
        assert_relative_eq!(dispersion(&[1], 3.0, 0.5), 4.5, epsilon = 1e-14);
        assert!(max_growth(3.0, 0.5, 8, 2).lambda > 0.0);
        // positive continuum band below |k| = sqrt(2/3), no lattice mode inside it
        assert_relative_eq!(dispersion(&[1], 1.0, 0.3), -0.1, epsilon = 1e-14);
        for k in 1..=8 {
            assert!(dispersion(&[k], 1.0, 0.3) < 0.0);
        }
        let band = unstable_band(1.0, 0.3).unwrap();
        assert_relative_eq!(band.1, (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert!(max_growth(1.0, 0.3, 8, 2).lambda < 0.0);
        assert!(unstable_band(0.5, 1.0).is_none());
    }

    #[test]
    fn khenner_examples() {
        let mut p = table();
        p.c1_phys = 1.0;
        p.c2_phys = 1.0;
        assert_relative_eq!(khenner_threshold(&p), 2.0 * p.d, max_relative = 1e-15);
        p.c2_phys = 0.1;
        assert!(khenner_threshold(&p) < 0.0);
        assert_relative_eq!(khenner_threshold(&table()), 1.495e-5, max_relative = 1e-12);
    }

    #[test]
    fn stability_verdicts_are_opposed_away_from_threshold() {
        // thin film: symbol long-wave stable, classical criterion says unstable
        let c = stability_comparison(0.5, 1.0, 0.0, 16, 1);
        assert!(c.symbol_stable_lattice && c.symbol_stable_continuum);
        assert!(!c.threshold_stable);
        assert!(!c.agree);
    }

    #[test]
    fn series_examples() {
        let s = series_closed_forms(0.5, 1, 200).unwrap();
        assert_relative_eq!(s.rising_from0, 4.0, max_relative = 1e-14);
        assert_relative_eq!(s.rising_from0_closed, 4.0, max_relative = 1e-15);
        assert_relative_eq!(s.geometric, 2.0, max_relative = 1e-14);
        let s = series_closed_forms(0.9, 3, 400).unwrap();
        assert_relative_eq!(s.rising_from0_closed, 60000.0, max_relative = 1e-10);
        assert!(((s.rising_from0 - 60000.0) / 60000.0).abs() < 1e-6);
        assert!(series_closed_forms(1.0, 1, 5).is_err());
        assert!(series_closed_forms(0.5, 5, 5).is_err());
    }

    proptest! {
        #[test]
        fn deltas_increase_in_s(c1 in 0.01f64..3.0, c2 in 0.01f64..3.0, s in 0.0f64..0.98, ds in 1e-4f64..0.01) {
            let t = (s + ds).min(0.99);
            prop_assert!(delta1(t, c1, c2).unwrap() > delta1(s, c1, c2).unwrap());
            prop_assert!(delta2(t, c1, c2).unwrap() > delta2(s, c1, c2).unwrap());
        }

        #[test]
        fn zero_norm_margins_are_linear_coefficients(c1 in 0.01f64..3.0, c2 in 0.01f64..3.0) {
            let b = smallness_margins(0.0, c1, c2).unwrap();
            prop_assert_eq!(b.d1, 1.0 + c2 - c1);
            prop_assert_eq!(b.d2, 2.0 * (3.0 * c2 - c1));
        }

        #[test]
        fn regularity_implies_existence(c1 in 0.0f64..5.0, c2 in 0.0f64..5.0) {
            let reg = check_conditions(c1, c2, ConditionMode::Regularity).holds;
            let ex = check_conditions(c1, c2, ConditionMode::Existence).holds;
            prop_assert!(!reg || ex);
        }

        #[test]
        fn existence_makes_every_mode_decay(c1 in 0.01f64..3.0, c2 in 0.01f64..3.0, k in 1i64..64) {
            prop_assume!(check_conditions(c1, c2, ConditionMode::Existence).holds);
            prop_assert!(dispersion(&[k], c1, c2) < 0.0);
        }

        #[test]
        fn truncated_sums_within_first_omitted_term(w in 0.01f64..0.95, m in 1u32..=4, n in 0usize..200) {
            let s = series_closed_forms(w, m, n).unwrap();
            let next = |r: usize| (1..=m).map(|j| r as f64 + j as f64).product::<f64>() * w.powi(r as i32);
            // tail of sum prod(r+j) w^r is bounded by the first omitted term times
            // the ratio bound of the remaining terms
            let ratio = w * (n as f64 + 2.0 + m as f64) / (n as f64 + 2.0);
            let tail_bound = if ratio < 1.0 { next(n + 1) / (1.0 - ratio) } else { f64::INFINITY };
            let err = s.rising_from0_closed - s.rising_from0;
            prop_assert!(err >= -1e-9 * s.rising_from0_closed);
            prop_assert!(err <= tail_bound * (1.0 + 1e-9) + 1e-9 * s.rising_from0_closed);
            let g_err = s.geometric_closed - s.geometric;
            prop_assert!(g_err <= w.powi(n as i32 + 1) / (1.0 - w) * (1.0 + 1e-9) + 1e-12);
        }
    }
}
