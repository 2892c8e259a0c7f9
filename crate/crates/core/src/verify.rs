//! Randomized inequality checks, cross-evaluator equivalence, and oracles
//! for the closed-form constants.
//!
//! Every check returns a [`CheckReport`] whose `worst_margin` is nonnegative
//! exactly when the property held on all trials. Trials draw from
//! independent ChaCha8 streams keyed by `(seed, trial)`, may run in parallel,
//! and are reduced in trial order, so reports are reproducible.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{delta1, delta2};
use crate::error::{FilmError, Result};
use crate::model::{rhs_convolution_oracle, Kahan, ModelParams, RhsEvaluator};
use crate::spectral::{inverse_transform, Grid, RandomFieldSpec, SpectralField};

/// Margins in `[-ROUNDOFF_CLAMP, 0)` are reported as zero.
pub const ROUNDOFF_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// Smallest margin over all trials; positive means satisfied.
    pub worst_margin: f64,
    /// Replayable description of the worst failing trial, empty on success.
    pub witness: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst_margin >= 0.0
    }
}

struct Outcome {
    margin: f64,
    witness: String,
}

fn clamp(margin: f64) -> f64 {
    if (-ROUNDOFF_CLAMP..0.0).contains(&margin) {
        0.0
    } else {
        margin
    }
}

fn reduce(name: &str, outcomes: Vec<Outcome>, notes: Vec<String>) -> CheckReport {
    let trials = outcomes.len();
    let mut worst = f64::INFINITY;
    let mut witness = String::new();
    for o in outcomes {
        let m = clamp(o.margin);
        // NaN margins count as failures
        if m < worst || m.is_nan() && !worst.is_nan() {
            worst = m;
            witness = if m >= 0.0 { String::new() } else { o.witness };
        }
    }
    if trials == 0 {
        worst = 0.0;
    }
    CheckReport {
        name: name.to_string(),
        trials,
        worst_margin: worst,
        witness,
        notes,
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random-field draw of one trial; enough to rebuild the field exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialField {
    pub seed: u64,
    pub trial: usize,
    pub dim: usize,
    pub points: usize,
    pub a0: f64,
    pub rho: f64,
    pub kmax: i64,
}

impl TrialField {
    fn draw(seed: u64, trial: usize, s_max: f64, kmax_div: usize) -> (Self, ChaCha8Rng) {
        let mut rng = trial_rng(seed, trial);
        let dim = rng.random_range(1..=2);
        let points = if dim == 1 {
            [16, 32, 64, 128][rng.random_range(0..4)]
        } else {
            [16, 32][rng.random_range(0..2)]
        };
        let top = (points / kmax_div).max(1) as i64;
        let spec = Self {
            seed,
            trial,
            dim,
            points,
            a0: rng.random_range(0.01..1.0) * s_max,
            rho: rng.random_range(0.2..0.9),
            kmax: rng.random_range(1..=top),
        };
        (spec, rng)
    }

    fn field_with(&self, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
        let grid = Grid::new(self.dim, self.points)?;
        SpectralField::random(
            grid,
            rng,
            &RandomFieldSpec {
                a0: self.a0,
                rho: self.rho,
                kmax: self.kmax,
            },
        )
    }

    fn witness(&self, detail: String) -> String {
        let mut value = serde_json::to_value(self).unwrap_or_default();
        value["detail"] = serde_json::Value::String(detail);
        value.to_string()
    }
}

/// Rebuilds the field drawn by trial `trial` of a check run with `seed`.
pub fn replay_field(seed: u64, trial: usize, s_max: f64, kmax_div: usize) -> Result<SpectralField> {
    let (spec, mut rng) = TrialField::draw(seed, trial, s_max, kmax_div);
    spec.field_with(&mut rng)
}

fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(FilmError::InvalidParams("trials must be at least 1".into()));
    }
    Ok(())
}

/// Relative slack of `lhs <= rhs`; zero when both vanish.
fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 && lhs == 0.0 {
        0.0
    } else {
        (rhs - lhs) / rhs.abs().max(lhs.abs())
    }
}

const FIELD_S_MAX: f64 = 0.9;
const FIELD_KMAX_DIV: usize = 4;
const QUAD_KMAX_DIV: usize = 8;

/// `||v||_{A^p} <= ||v||_{A^0}^(1-p/q) ||v||_{A^q}^(p/q)` for `0 <= p <= q`.
pub fn check_interpolation(trials: usize, seed: u64) -> Result<CheckReport> {
    require_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (spec, mut rng) = TrialField::draw(seed, trial, FIELD_S_MAX, FIELD_KMAX_DIV);
            let v = spec.field_with(&mut rng)?;
            let mut pairs = vec![(0.0, 4.0), (1.0, 4.0), (2.0, 4.0), (3.0, 4.0), (1.0, 3.0), (1.0, 2.0)];
            for _ in 0..4 {
                let q: f64 = rng.random_range(0.1..6.0);
                pairs.push((rng.random_range(0.0..=q), q));
            }
            let a0 = v.wiener_unchecked(0.0);
            let mut worst = (f64::INFINITY, String::new());
            for (p, q) in pairs {
                let theta = p / q;
                let lhs = v.wiener_unchecked(p);
                let rhs = a0.powf(1.0 - theta) * v.wiener_unchecked(q).powf(theta);
                let m = rel_margin(lhs, rhs);
                if m < worst.0 {
                    worst = (m, format!("p={p}, q={q}, lhs={lhs}, rhs={rhs}"));
                }
            }
            Ok(Outcome {
                margin: worst.0,
                witness: spec.witness(worst.1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce("interpolation", outcomes, Vec::new()))
}

/// Explicit constants for the gradient lemma in dimension `dim`:
/// `(l2, l4, l42)`.
pub fn gradient_lemma_constants(dim: usize) -> (f64, f64, f64) {
    ((2.0 * PI).powf(dim as f64 / 2.0), 3.0, 3.0)
}

/// Exact `||grad w||_{L^2}^2` and `||grad w||_{L^4}^2`.
///
/// The `L^4` integral uses the trapezoid rule on the field's own grid, which
/// is exact when every mode satisfies `max_j |k_j| <= M/8`.
pub fn gradient_norms(w: &SpectralField) -> Result<(f64, f64)> {
    let grid = *w.grid();
    let dim = grid.dim();
    let measure = (2.0 * PI).powi(dim as i32);
    let mut components = Vec::with_capacity(dim);
    let mut l2_sq = 0.0;
    for axis in 0..dim {
        let mut orders = vec![0; dim];
        orders[axis] = 1;
        let d = w.derivative(&orders)?;
        l2_sq += measure * d.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        components.push(inverse_transform(&d)?);
    }
    let n = grid.len();
    let mut sum4 = Kahan::default();
    for j in 0..n {
        let g2: f64 = components.iter().map(|c| c[j] * c[j]).sum();
        sum4.add(g2 * g2);
    }
    let l4_sq = (measure / n as f64 * sum4.sum()).sqrt();
    Ok((l2_sq, l4_sq))
}

/// The three gradient estimates with the constants of
/// [`gradient_lemma_constants`], each multiplied by `scale`.
///
/// `scale = 1` is the real check; a small `scale` must fail and exercises
/// the failure path.
pub fn check_gradient_lemma_scaled(trials: usize, seed: u64, scale: f64) -> Result<CheckReport> {
    require_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (spec, mut rng) = TrialField::draw(seed, trial, FIELD_S_MAX, QUAD_KMAX_DIV);
            let w = spec.field_with(&mut rng)?;
            let (c2, c4, c42) = gradient_lemma_constants(spec.dim);
            let (l2_sq, l4_sq) = gradient_norms(&w)?;
            let n = w.norms();
            let checks = [
                ("l2", l2_sq, scale * c2 * n.a0 * n.h2),
                ("l4", l4_sq, scale * c4 * n.a0 * n.h2),
                ("l42", l4_sq, scale * c42 * n.l2 * n.a2),
            ];
            let (name, lhs, rhs) = checks
                .iter()
                .copied()
                .min_by(|a, b| rel_margin(a.1, a.2).total_cmp(&rel_margin(b.1, b.2)))
                .expect("three checks");
            Ok(Outcome {
                margin: rel_margin(lhs, rhs),
                witness: spec.witness(format!("{name}: lhs={lhs}, rhs={rhs}")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let notes = vec![
        "l2: |grad w|_L2^2 <= (2 pi)^(N/2) |w|_A0 |w|_H2".into(),
        "l4: |grad w|_L4^2 <= 3 |w|_A0 |w|_H2".into(),
        "l42: |grad w|_L4^2 <= 3 |w|_L2 |w|_A2".into(),
        format!("constant scale {scale}"),
    ];
    Ok(reduce("gradient_lemma", outcomes, notes))
}

pub fn check_gradient_lemma(trials: usize, seed: u64) -> Result<CheckReport> {
    check_gradient_lemma_scaled(trials, seed, 1.0)
}

/// `||v||_{A^0} <= ||v||_{A^2} <= ||v||_{A^4}` for zero-mean fields.
pub fn check_norm_ordering(trials: usize, seed: u64) -> Result<CheckReport> {
    require_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (spec, mut rng) = TrialField::draw(seed, trial, FIELD_S_MAX, FIELD_KMAX_DIV);
            let n = spec.field_with(&mut rng)?.norms();
            let m = rel_margin(n.a0, n.a2).min(rel_margin(n.a2, n.a4));
            Ok(Outcome {
                margin: m,
                witness: spec.witness(format!("A0={}, A2={}, A4={}", n.a0, n.a2, n.a4)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce("norm_ordering", outcomes, Vec::new()))
}

/// `||v||_{L^inf} <= ||v||_{A^0}` and `||v||_{L^2} <= (2 pi)^(N/2) ||v||_{A^0}`.
pub fn check_embedding(trials: usize, seed: u64) -> Result<CheckReport> {
    require_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (spec, mut rng) = TrialField::draw(seed, trial, FIELD_S_MAX, FIELD_KMAX_DIV);
            let n = spec.field_with(&mut rng)?.norms();
            let l2_bound = (2.0 * PI).powf(spec.dim as f64 / 2.0) * n.a0;
            let m = rel_margin(n.linf, n.a0).min(rel_margin(n.l2, l2_bound));
            Ok(Outcome {
                margin: m,
                witness: spec.witness(format!("Linf={}, L2={}, A0={}", n.linf, n.l2, n.a0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce("embedding", outcomes, Vec::new()))
}

/// Settings for [`check_rhs_equivalence`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsEquivalence {
    pub trials: usize,
    pub seed: u64,
    pub n_trunc: usize,
    pub s_max: f64,
    pub c1: f64,
    pub c2: f64,
    /// Grid for the pseudospectral/series comparison.
    pub grid: Grid,
    /// Largest accepted Wiener-norm gap between pseudospectral and series.
    pub tol: f64,
    /// Trials against the convolution oracle (on top of `trials`).
    pub oracle_trials: usize,
    pub oracle_kmax: i64,
    pub oracle_n_trunc: usize,
    pub oracle_tol: f64,
}

impl Default for RhsEquivalence {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 42,
            n_trunc: 60,
            s_max: 0.2,
            c1: 0.5,
            c2: 1.0,
            grid: Grid::new(1, 128).expect("valid grid"),
            tol: 1e-8,
            oracle_trials: 10,
            oracle_kmax: 2,
            oracle_n_trunc: 6,
            oracle_tol: 1e-10,
        }
    }
}

/// Compares the pseudospectral and series right-hand sides on random fields
/// with `||v||_{A^0} <= s_max`, and the series against the convolution oracle
/// on fields supported in `max_j |k_j| <= oracle_kmax`. The margin is
/// `tol - gap` in the Wiener norm.
pub fn check_rhs_equivalence(cfg: &RhsEquivalence) -> Result<CheckReport> {
    if !(cfg.s_max > 0.0 && cfg.s_max < 1.0) {
        return Err(FilmError::OutOfDomain(format!("s_max must lie in (0, 1), got {}", cfg.s_max)));
    }
    require_trials(cfg.trials)?;
    let params = ModelParams::new(cfg.c1, cfg.c2, cfg.n_trunc)?;
    let oracle_params = ModelParams::new(cfg.c1, cfg.c2, cfg.oracle_n_trunc)?;
    let evaluator = RhsEvaluator::new(cfg.grid);
    let main = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let a0 = rng.random_range(0.0..=cfg.s_max);
            let rho = rng.random_range(0.3..0.7);
            let v = SpectralField::random(cfg.grid, &mut rng, &RandomFieldSpec { a0, rho, kmax: 16 })?;
            let ps = evaluator.pseudospectral(&v, &params)?.total;
            let se = evaluator.series(&v, &params)?.total;
            let gap = ps.axpy(-1.0, &se).wiener_unchecked(0.0);
            Ok(Outcome {
                margin: cfg.tol - gap,
                witness: format!(
                    r#"{{"seed":{},"trial":{trial},"a0":{a0},"rho":{rho},"gap":{gap},"pair":"pseudospectral/series"}}"#,
                    cfg.seed
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let main_gap = main.iter().map(|o| cfg.tol - o.margin).fold(0.0, f64::max);

    let oracle = (0..cfg.oracle_trials)
        .into_par_iter()
        .map(|i| {
            let trial = cfg.trials + i;
            let mut rng = trial_rng(cfg.seed, trial);
            let dim = 1 + i % 2;
            let grid = Grid::new(dim, 64)?;
            let a0 = rng.random_range(0.0..=cfg.s_max);
            let spec = RandomFieldSpec {
                a0,
                rho: 0.5,
                kmax: cfg.oracle_kmax,
            };
            let v = SpectralField::random(grid, &mut rng, &spec)?;
            let se = RhsEvaluator::new(grid).series(&v, &oracle_params)?.total;
            let conv = rhs_convolution_oracle(&v, &oracle_params, cfg.oracle_kmax)?;
            let gap = se.axpy(-1.0, &conv).wiener_unchecked(0.0);
            Ok(Outcome {
                margin: cfg.oracle_tol - gap,
                witness: format!(
                    r#"{{"seed":{},"trial":{trial},"dim":{dim},"a0":{a0},"gap":{gap},"pair":"series/convolution"}}"#,
                    cfg.seed
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let oracle_gap = oracle.iter().map(|o| cfg.oracle_tol - o.margin).fold(0.0, f64::max);

    let notes = vec![
        format!("pseudospectral vs series: max gap {main_gap:e}, tol {:e}", cfg.tol),
        format!("series vs convolution: max gap {oracle_gap:e}, tol {:e}", cfg.oracle_tol),
    ];
    let mut outcomes = main;
    outcomes.extend(oracle);
    Ok(reduce("rhs_equivalence", outcomes, notes))
}

/// Sums of the five per-family bound series at `||v||_{A^0} = s`, truncated
/// after `r_max` terms. Families 0-2 carry the `A^4` weight, 3-4 the `A^2`.
pub fn family_bound_sums(s: f64, c1: f64, c2: f64, r_max: usize) -> [f64; 5] {
    let mut sums = [Kahan::default(); 5];
    let mut pw = 1.0; // s^r
    for r in 0..=r_max {
        let x = r as f64;
        let p1 = x + 1.0;
        let p2 = p1 * (x + 2.0);
        let p3 = p2 * (x + 3.0);
        let p4 = p3 * (x + 4.0);
        if r >= 1 {
            sums[0].add((c1 + p1 * c2) * pw);
            sums[3].add((c1 * p2 + c2 * p3) * pw);
        }
        sums[1].add(3.0 * (c1 * p1 + c2 * p2) * pw * s);
        sums[2].add((c1 * p2 + c2 * p3) * pw * s * s);
        sums[4].add((c1 * p3 + c2 * p4) * pw * s);
        pw *= s;
        if pw == 0.0 {
            break;
        }
    }
    sums.map(|k| k.sum())
}

/// Number of terms summed by [`check_delta_series`].
pub const DELTA_SERIES_TERMS: usize = 10_000;
/// Relative agreement required between series and closed forms.
pub const DELTA_SERIES_TOL: f64 = 1e-8;

/// Series totals against the closed-form `delta1`, `delta2` at every sample
/// `(s, c1, c2)`. The margin is `tol - relative gap`.
pub fn check_delta_series(samples: &[(f64, f64, f64)]) -> Result<CheckReport> {
    require_trials(samples.len())?;
    let outcomes = samples
        .par_iter()
        .map(|&(s, c1, c2)| {
            let f = family_bound_sums(s, c1, c2, DELTA_SERIES_TERMS);
            let d1 = delta1(s, c1, c2)?;
            let d2 = delta2(s, c1, c2)?;
            let e1 = rel_gap(f[0] + f[1] + f[2], d1);
            let e2 = rel_gap(f[3] + f[4], d2);
            Ok(Outcome {
                margin: DELTA_SERIES_TOL - e1.max(e2),
                witness: format!(
                    r#"{{"s":{s},"c1":{c1},"c2":{c2},"delta1":{d1},"delta2":{d2},"rel_gap1":{e1},"rel_gap2":{e2}}}"#
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce("delta_series", outcomes, Vec::new()))
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `n^3` samples: `s` evenly in `[0, s_max]`, `c1` and `c2` evenly in `[c_lo, c_hi]`.
pub fn delta_grid(n: usize, s_max: f64, c_lo: f64, c_hi: f64) -> Vec<(f64, f64, f64)> {
    let at = |lo: f64, hi: f64, i: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push((at(0.0, s_max, i), at(c_lo, c_hi, j), at(c_lo, c_hi, k)));
            }
        }
    }
    out
}

/// Minimum of `1 + G` located numerically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub report: CheckReport,
    pub c1: f64,
    pub c2: f64,
    pub v_min: f64,
    pub min_value: f64,
    pub closed_location: f64,
    pub closed_value: f64,
    /// Minimum is zero up to roundoff: `c2 = c1^2/4`.
    pub boundary: bool,
    pub agrees: bool,
}

/// Agreement required between the located and the closed-form minimum.
pub const POSITIVITY_TOL: f64 = 1e-8;
const POSITIVITY_SCAN: usize = 100_000;

fn one_plus_g(v: f64, c1: f64, c2: f64) -> f64 {
    let w = 1.0 / (1.0 + v);
    1.0 - c1 * w + c2 * w * w
}

/// Dense scan of `1 + G(v)` over `(-1, v_max]` refined by golden-section
/// search, compared with the minimum `1 - c1^2/(4 c2)` at `v = 2 c2/c1 - 1`.
///
/// The margin is the located minimum of `1 + G`, lowered to the disagreement
/// with the closed form when that exceeds the tolerance.
pub fn check_positivity(c1: f64, c2: f64, v_max: f64) -> Result<PositivityReport> {
    ModelParams::new(c1, c2, 0)?;
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(FilmError::InvalidParams(format!("v_max must be positive, got {v_max}")));
    }
    let lo = -1.0 + 1e-3 * c2 / (c1 + c2);
    let step = (v_max - lo) / POSITIVITY_SCAN as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=POSITIVITY_SCAN {
        let y = one_plus_g(lo + step * i as f64, c1, c2);
        if y < best {
            best = y;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(v_max);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (one_plus_g(x1, c1, c2), one_plus_g(x2, c1, c2));
    for _ in 0..200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = one_plus_g(x1, c1, c2);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = one_plus_g(x2, c1, c2);
        }
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    let (mut v_min, mut min_value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if best < min_value {
        v_min = lo + step * best_i as f64;
        min_value = best;
    }
    let closed_location = 2.0 * c2 / c1 - 1.0;
    let interior = closed_location > lo && closed_location <= v_max;
    let closed_value = if interior {
        1.0 - c1 * c1 / (4.0 * c2)
    } else {
        one_plus_g(closed_location.clamp(lo, v_max), c1, c2)
    };
    let gap = (min_value - closed_value).abs();
    let agrees = gap <= POSITIVITY_TOL;
    let boundary = min_value.abs() <= ROUNDOFF_CLAMP;
    let margin = if agrees { min_value } else { min_value.min(-gap) };
    let witness = format!(
        r#"{{"c1":{c1},"c2":{c2},"v_max":{v_max},"v_min":{v_min},"min_value":{min_value},"closed_value":{closed_value}}}"#
    );
    let mut notes = vec![format!(
        "min 1+G = {min_value} at v = {v_min}; closed form {closed_value} at v = {closed_location}"
    )];
    if boundary {
        notes.push("boundary case c2 = c1^2/4: minimum is zero".into());
    }
    if !interior {
        notes.push("closed-form minimizer lies outside the scanned interval".into());
    }
    let report = reduce(
        "positivity",
        vec![Outcome { margin, witness }],
        notes,
    );
    Ok(PositivityReport {
        report,
        c1,
        c2,
        v_min,
        min_value,
        closed_location,
        closed_value,
        boundary,
        agrees,
    })
}

/// Named groups of checks run by the command-line `verify` command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Spectral,
    Model,
    Analysis,
}

impl std::str::FromStr for Suite {
    type Err = FilmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "spectral" => Ok(Suite::Spectral),
            "model" => Ok(Suite::Model),
            "analysis" => Ok(Suite::Analysis),
            other => Err(FilmError::InvalidParams(format!(
                "unknown suite {other:?}; expected all, spectral, model or analysis"
            ))),
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    require_trials(trials)?;
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Spectral) {
        out.push(check_interpolation(trials, seed)?);
        out.push(check_gradient_lemma(trials, seed)?);
        out.push(check_norm_ordering(trials, seed)?);
        out.push(check_embedding(trials, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Model) {
        out.push(check_rhs_equivalence(&RhsEquivalence {
            trials: trials.min(100),
            seed,
            oracle_trials: trials.min(10),
            ..RhsEquivalence::default()
        })?);
        for (c1, c2) in [(2.0, 1.01), (2.0, 1.0), (0.5, 1.0)] {
            out.push(check_positivity(c1, c2, 10.0)?.report);
        }
    }
    if matches!(suite, Suite::All | Suite::Analysis) {
        out.push(check_delta_series(&delta_grid(10, 0.3, 0.1, 2.0))?);
    }
    Ok(out)
}
