//! Adaptive second-order exponential time differencing (ETDRK2) with an
//! embedded exponential Euler error estimate, and the norm monitors recorded
//! along a trajectory.
//!
//! The linear symbol `L(k)` is integrated exactly; only the remainder
//! `N(v) = RHS(v) - L v` is approximated. The `k = 0` coefficient is never
//! touched, so the mean of `v` stays exactly zero.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{smallness_margins, BoundSet};
use crate::error::{FilmError, Result};
use crate::model::{linear_symbol_sq, Guards, ModelParams, RhsEvaluator};
use crate::spectral::{norm_sq, Grid, RandomFieldSpec, SpectralField};

/// Which right-hand side drives the nonlinear part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    #[default]
    Pseudospectral,
    Series,
    /// Nonlinearity switched off; only `L(k)` acts.
    LinearOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted relative Wiener-norm difference between the embedded pair.
    #[serde(default = "default_step_tol")]
    pub step: f64,
    #[serde(default = "default_pole")]
    pub pole: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_step_tol() -> f64 {
    1e-7
}

fn default_pole() -> f64 {
    Guards::default().pole
}

fn default_resolution() -> f64 {
    Guards::default().resolution
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            step: default_step_tol(),
            pole: default_pole(),
            resolution: default_resolution(),
        }
    }
}

impl Tolerances {
    pub fn guards(&self) -> Guards {
        Guards {
            pole: self.pole,
            resolution: self.resolution,
        }
    }
}

/// `amplitude * cos(k.x + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    pub k: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Modes {
        modes: Vec<CosineMode>,
    },
    /// FILMv1 file on the configured grid; a mean within roundoff is dropped.
    Snapshot {
        path: PathBuf,
    },
    Random {
        a0: f64,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_kmax")]
        kmax: i64,
        seed: u64,
    },
}

fn default_rho() -> f64 {
    0.5
}

fn default_kmax() -> i64 {
    16
}

impl InitialData {
    pub fn resolve(&self, grid: &Grid) -> Result<SpectralField> {
        match self {
            InitialData::Modes { modes } => {
                let terms: Vec<_> = modes
                    .iter()
                    .map(|m| (m.k.clone(), m.amplitude, m.phase))
                    .collect();
                SpectralField::from_cosines(*grid, &terms)
            }
            InitialData::Snapshot { path } => {
                let snap = crate::io::load_snapshot(path)?;
                if snap.grid != *grid {
                    return Err(FilmError::InvalidGrid(format!(
                        "snapshot grid {} does not match configured grid {}",
                        snap.grid, grid
                    )));
                }
                let field = snap.to_field()?;
                let scale = field.wiener_unchecked(0.0).max(1.0);
                if field.mean().abs() > 1e-12 * scale {
                    return Err(FilmError::InvalidParams(format!(
                        "snapshot has mean {}, expected a zero-mean perturbation",
                        field.mean()
                    )));
                }
                Ok(field.zero_mean())
            }
            InitialData::Random { a0, rho, kmax, seed } => {
                let spec = RandomFieldSpec {
                    a0: *a0,
                    rho: *rho,
                    kmax: *kmax,
                };
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                SpectralField::random(*grid, &mut rng, &spec)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: Grid,
    pub params: ModelParams,
    #[serde(default)]
    pub rhs_mode: RhsMode,
    pub initial: InitialData,
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    pub t_end: f64,
    /// Record norms every this many accepted steps.
    #[serde(default = "default_stride")]
    pub monitor_stride: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Bound on `sup ||v||_{H^2}` and on the accumulated `H^4` integral.
    #[serde(default)]
    pub energy_bound: Option<f64>,
    /// Compare the Wiener norm with the decay envelope when smallness holds.
    #[serde(default = "default_true")]
    pub check_envelope: bool,
}

fn default_dt_init() -> f64 {
    1e-5
}

fn default_dt_min() -> f64 {
    1e-14
}

fn default_dt_max() -> f64 {
    0.05
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    /// Configuration with default step sizes and monitors.
    pub fn new(grid: Grid, params: ModelParams, initial: InitialData, t_end: f64) -> Self {
        Self {
            grid,
            params,
            rhs_mode: RhsMode::default(),
            initial,
            dt_init: default_dt_init(),
            dt_min: default_dt_min(),
            dt_max: default_dt_max(),
            t_end,
            monitor_stride: default_stride(),
            tolerances: Tolerances::default(),
            snapshot_times: Vec::new(),
            energy_bound: None,
            check_envelope: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(FilmError::InvalidParams(msg));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        if !self.dt_max.is_finite() {
            return bad("dt_max must be finite".into());
        }
        if self.monitor_stride == 0 {
            return bad("monitor_stride must be at least 1".into());
        }
        let tol = &self.tolerances;
        if !(tol.step > 0.0 && tol.pole > 0.0 && tol.resolution > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.t_end))
        {
            return bad(format!("snapshot time {t} outside [0, t_end]"));
        }
        if let Some(b) = self.energy_bound {
            if !(b > 0.0) {
                return bad(format!("energy_bound must be positive, got {b}"));
            }
        }
        Ok(())
    }
}

/// Norms sampled along a trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub a0: Vec<f64>,
    pub a2: Vec<f64>,
    pub a4: Vec<f64>,
    pub l2: Vec<f64>,
    pub h2: Vec<f64>,
    pub linf: Vec<f64>,
    pub mean: Vec<f64>,
    pub envelope: Vec<Option<f64>>,
    /// `||v||_{H^4}^2` at each sample.
    pub h4_sq: Vec<f64>,
    /// Trapezoid accumulation of `h4_sq` in time.
    pub h4_sq_integral: Vec<f64>,
}

impl NormSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, v: &SpectralField, envelope: Option<f64>) {
        let n = v.norms();
        let h4_sq = v.sobolev(4.0).powi(2);
        let integral = match (self.times.last(), self.h4_sq.last(), self.h4_sq_integral.last()) {
            (Some(&t0), Some(&q0), Some(&i0)) => i0 + 0.5 * (t - t0) * (q0 + h4_sq),
            _ => 0.0,
        };
        self.times.push(t);
        self.a0.push(n.a0);
        self.a2.push(n.a2);
        self.a4.push(n.a4);
        self.l2.push(n.l2);
        self.h2.push(n.h2);
        self.linf.push(n.linf);
        self.mean.push(n.mean);
        self.envelope.push(envelope);
        self.h4_sq.push(h4_sq);
        self.h4_sq_integral.push(integral);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    /// A guard rejected a trial stage; the step was retried with a smaller size.
    GuardTrip { t: f64, dt: f64, message: String },
    EnvelopeViolation { t: f64, a0: f64, envelope: f64 },
    EnergyBound {
        t: f64,
        quantity: String,
        value: f64,
        bound: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    StepUnderflow { t: f64, dt: f64 },
    Guard { t: f64, message: String },
    BlowUp { t: f64 },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub dt_smallest: f64,
    pub dt_largest: f64,
}

#[derive(Clone, Debug)]
pub struct SimResult {
    /// Last accepted state.
    pub final_field: SpectralField,
    pub final_time: f64,
    pub series: NormSeries,
    pub events: Vec<SimEvent>,
    pub stop: StopReason,
    /// Smallness constants at the initial Wiener norm, when it is below one.
    pub bounds: Option<BoundSet>,
    /// Largest `|mean(v)|` over every accepted step.
    pub max_abs_mean: f64,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub stats: StepStats,
}

/// Result of a single trial step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: SpectralField,
    /// `||next - euler||_{A^0} / ||next||_{A^0}`.
    pub error: f64,
}

const PHI_TAYLOR_SWITCH: f64 = 1e-4;
const PHI_TAYLOR_TERMS: usize = 8;

/// `phi_1(z) = (e^z - 1)/z` and `phi_2(z) = (e^z - 1 - z)/z^2`.
pub fn phi_functions(z: f64) -> (f64, f64) {
    if z.abs() < PHI_TAYLOR_SWITCH {
        // sum z^j/(j+1)! and sum z^j/(j+2)!, Horner from the top term
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for j in (0..PHI_TAYLOR_TERMS).rev() {
            p1 = 1.0 / factorial(j + 1) + z * p1;
            p2 = 1.0 / factorial(j + 2) + z * p2;
        }
        (p1, p2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

struct PhiCache {
    h: f64,
    exp: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

/// ETDRK2 stepper for a fixed grid, parameter set and right-hand side.
pub struct Stepper {
    evaluator: RhsEvaluator,
    params: ModelParams,
    mode: RhsMode,
    symbol: Vec<f64>,
    cache: Option<PhiCache>,
}

impl Stepper {
    pub fn new(grid: Grid, params: ModelParams, mode: RhsMode, guards: Guards) -> Result<Self> {
        params.validate()?;
        let symbol = grid
            .modes()
            .map(|(i, k)| {
                if i == 0 {
                    0.0
                } else {
                    linear_symbol_sq(norm_sq(k) as f64, params.c1, params.c2)
                }
            })
            .collect();
        Ok(Self {
            evaluator: RhsEvaluator::with_guards(grid, guards),
            params,
            mode,
            symbol,
            cache: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.evaluator.grid()
    }

    /// Coefficients of `N(v) = RHS(v) - L v`, zero at `k = 0`.
    pub fn nonlinear(&self, v: &SpectralField) -> Result<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        let total = match self.mode {
            RhsMode::LinearOnly => return Ok(vec![zero; v.coeffs().len()]),
            RhsMode::Pseudospectral => self.evaluator.pseudospectral(v, &self.params)?.total,
            RhsMode::Series => self.evaluator.series(v, &self.params)?.total,
        };
        let mut n: Vec<Complex64> = total
            .coeffs()
            .iter()
            .zip(v.coeffs())
            .zip(&self.symbol)
            .map(|((t, u), l)| t - u * l)
            .collect();
        n[0] = zero;
        Ok(n)
    }

    fn phi(&mut self, h: f64) -> &PhiCache {
        let stale = self.cache.as_ref().is_none_or(|c| c.h != h);
        if stale {
            let n = self.symbol.len();
            let mut cache = PhiCache {
                h,
                exp: Vec::with_capacity(n),
                phi1: Vec::with_capacity(n),
                phi2: Vec::with_capacity(n),
            };
            for &l in &self.symbol {
                let z = l * h;
                let (p1, p2) = phi_functions(z);
                cache.exp.push(z.exp());
                cache.phi1.push(p1);
                cache.phi2.push(p2);
            }
            self.cache = Some(cache);
        }
        self.cache.as_ref().expect("cache filled above")
    }

    /// One step of size `h` from `v`.
    pub fn step(&mut self, v: &SpectralField, h: f64) -> Result<StepOutcome> {
        let n0 = self.nonlinear(v)?;
        self.step_with(v, &n0, h)
    }

    /// One step reusing `n0 = N(v)`.
    pub fn step_with(&mut self, v: &SpectralField, n0: &[Complex64], h: f64) -> Result<StepOutcome> {
        if !(h > 0.0) {
            return Err(FilmError::InvalidParams(format!("step size must be positive, got {h}")));
        }
        let grid = *v.grid();
        let cache = self.phi(h);
        let euler: Vec<Complex64> = v
            .coeffs()
            .iter()
            .zip(n0)
            .enumerate()
            .map(|(i, (u, n))| u * cache.exp[i] + n * (h * cache.phi1[i]))
            .collect();
        let mut euler = SpectralField::from_coefficients(grid, euler).map_err(|_| FilmError::BlowUp)?;
        // Roundoff leaves a small anti-Hermitian part that the pointwise
        // nonlinearity cannot see; left alone it is amplified every step.
        euler.symmetrize();
        let n1 = self.nonlinear(&euler)?;
        let phi2 = &self.cache.as_ref().expect("cache filled above").phi2;
        let next: Vec<Complex64> = euler
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, a)| a + (n1[i] - n0[i]) * (h * phi2[i]))
            .collect();
        let mut next = SpectralField::from_coefficients(grid, next).map_err(|_| FilmError::BlowUp)?;
        next.symmetrize();
        let size = next.wiener_unchecked(0.0);
        let diff = next.axpy(-1.0, &euler).wiener_unchecked(0.0);
        let error = if diff == 0.0 { 0.0 } else { diff / size.max(f64::MIN_POSITIVE) };
        Ok(StepOutcome { next, error })
    }

    /// `steps` steps of constant size `h`.
    pub fn integrate_fixed(&mut self, v: &SpectralField, h: f64, steps: usize) -> Result<SpectralField> {
        let mut u = v.clone();
        for _ in 0..steps {
            u = self.step(&u, h)?.next;
        }
        Ok(u)
    }
}

/// PI step-size controller on the embedded error estimate.
struct Controller {
    tol: f64,
    prev: f64,
}

impl Controller {
    const SAFETY: f64 = 0.9;
    const GROWTH: f64 = 2.0;
    const SHRINK: f64 = 0.2;

    fn new(tol: f64) -> Self {
        Self { tol, prev: 1.0 }
    }

    fn accepted(&mut self, error: f64) -> f64 {
        let ratio = error / self.tol;
        let factor = if ratio == 0.0 {
            Self::GROWTH
        } else {
            Self::SAFETY * ratio.powf(-0.35) * self.prev.powf(0.2)
        };
        self.prev = ratio.max(1e-4);
        factor.clamp(Self::SHRINK, Self::GROWTH)
    }

    fn rejected(&self, error: f64) -> f64 {
        (Self::SAFETY * (self.tol / error).sqrt()).clamp(Self::SHRINK, Self::SAFETY)
    }
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let v0 = config.initial.resolve(&config.grid)?;
    simulate_from(config, v0)
}

/// Runs `config` from an explicit initial field, ignoring `config.initial`.
pub fn simulate_from(config: &SimConfig, v0: SpectralField) -> Result<SimResult> {
    config.validate()?;
    if *v0.grid() != config.grid {
        return Err(FilmError::InvalidGrid(format!(
            "initial field grid {} does not match configured grid {}",
            v0.grid(),
            config.grid
        )));
    }
    let v0 = v0.zero_mean();
    let mut stepper = Stepper::new(
        config.grid,
        config.params,
        config.rhs_mode,
        config.tolerances.guards(),
    )?;
    let s0 = v0.wiener_unchecked(0.0);
    let bounds = if s0 < 1.0 {
        Some(smallness_margins(s0, config.params.c1, config.params.c2)?)
    } else {
        None
    };
    let envelope_bounds = bounds.filter(|b| config.check_envelope && b.cond_smallness);

    let mut targets: Vec<f64> = config.snapshot_times.clone();
    targets.push(config.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut run = Run {
        config,
        envelope: envelope_bounds,
        series: NormSeries::default(),
        events: Vec::new(),
        snapshots: Vec::new(),
        sup_h2: 0.0,
    };

    let mut v = v0;
    let mut t = 0.0;
    let mut stats = StepStats {
        dt_smallest: f64::INFINITY,
        ..StepStats::default()
    };
    let mut max_abs_mean = v.mean().abs();
    run.record(t, &v);
    let mut target_idx = 0;
    while target_idx < targets.len() && targets[target_idx] <= 0.0 {
        run.snapshots.push((0.0, v.clone()));
        target_idx += 1;
    }

    let mut controller = Controller::new(config.tolerances.step);
    let mut h_ctrl = config.dt_init;
    let mut since_monitor = 0;
    let mut stop = StopReason::Completed;

    'outer: while target_idx < targets.len() {
        let target = targets[target_idx];
        let n0 = match stepper.nonlinear(&v) {
            Ok(n) => n,
            Err(e) => {
                stop = StopReason::Guard {
                    t,
                    message: e.to_string(),
                };
                break;
            }
        };
        loop {
            let remaining = target - t;
            let clamped = remaining <= h_ctrl;
            let h = if clamped { remaining } else { h_ctrl };
            match stepper.step_with(&v, &n0, h) {
                Ok(out) if out.error <= config.tolerances.step => {
                    let factor = controller.accepted(out.error);
                    h_ctrl = if clamped { h_ctrl.max(h * factor) } else { h * factor };
                    h_ctrl = h_ctrl.min(config.dt_max);
                    t = if clamped { target } else { t + h };
                    v = out.next;
                    stats.accepted += 1;
                    stats.dt_smallest = stats.dt_smallest.min(h);
                    stats.dt_largest = stats.dt_largest.max(h);
                    max_abs_mean = max_abs_mean.max(v.mean().abs());
                    since_monitor += 1;
                    let at_target = clamped;
                    if since_monitor >= config.monitor_stride || at_target {
                        run.record(t, &v);
                        since_monitor = 0;
                    }
                    if at_target {
                        if target < config.t_end || config.snapshot_times.contains(&target) {
                            run.snapshots.push((t, v.clone()));
                        }
                        target_idx += 1;
                    }
                    continue 'outer;
                }
                Ok(out) => {
                    stats.rejected += 1;
                    if !out.error.is_finite() {
                        h_ctrl = h * Controller::SHRINK;
                    } else {
                        h_ctrl = h * controller.rejected(out.error);
                    }
                }
                Err(FilmError::BlowUp) => {
                    stats.rejected += 1;
                    h_ctrl = h * Controller::SHRINK;
                    if h_ctrl < config.dt_min {
                        stop = StopReason::BlowUp { t };
                        break 'outer;
                    }
                    continue;
                }
                Err(e @ (FilmError::Pole { .. }
                | FilmError::Underresolved { .. }
                | FilmError::SeriesDivergence(_))) => {
                    stats.rejected += 1;
                    run.events.push(SimEvent::GuardTrip {
                        t,
                        dt: h,
                        message: e.to_string(),
                    });
                    h_ctrl = h * 0.5;
                }
                Err(e) => return Err(e),
            }
            if h_ctrl < config.dt_min {
                stop = StopReason::StepUnderflow { t, dt: h_ctrl };
                break 'outer;
            }
        }
    }
    if run.series.times.last() != Some(&t) {
        run.record(t, &v);
    }
    if stats.accepted == 0 {
        stats.dt_smallest = 0.0;
    }
    Ok(SimResult {
        final_field: v,
        final_time: t,
        series: run.series,
        events: run.events,
        stop,
        bounds,
        max_abs_mean,
        snapshots: run.snapshots,
        stats,
    })
}

struct Run<'a> {
    config: &'a SimConfig,
    envelope: Option<BoundSet>,
    series: NormSeries,
    events: Vec<SimEvent>,
    snapshots: Vec<(f64, SpectralField)>,
    sup_h2: f64,
}

impl Run<'_> {
    fn record(&mut self, t: f64, v: &SpectralField) {
        let envelope = self.envelope.map(|b| b.envelope(t));
        self.series.push(t, v, envelope);
        let i = self.series.len() - 1;
        let a0 = self.series.a0[i];
        if let Some(env) = envelope {
            if a0 > ENVELOPE_SLACK * env + ENVELOPE_FLOOR {
                self.events.push(SimEvent::EnvelopeViolation { t, a0, envelope: env });
            }
        }
        if let Some(bound) = self.config.energy_bound {
            let h2 = self.series.h2[i];
            if h2 > bound && self.sup_h2 <= bound {
                self.events.push(SimEvent::EnergyBound {
                    t,
                    quantity: "sup_h2".into(),
                    value: h2,
                    bound,
                });
            }
            let integral = self.series.h4_sq_integral[i];
            let before = if i > 0 { self.series.h4_sq_integral[i - 1] } else { 0.0 };
            if integral > bound && before <= bound {
                self.events.push(SimEvent::EnergyBound {
                    t,
                    quantity: "h4_sq_integral".into(),
                    value: integral,
                    bound,
                });
            }
        }
        self.sup_h2 = self.sup_h2.max(self.series.h2[i]);
    }
}

/// Multiplicative slack on the decay envelope.
pub const ENVELOPE_SLACK: f64 = 1.01;
/// Additive slack on the decay envelope.
pub const ENVELOPE_FLOOR: f64 = 1e-12;

/// `a0 <= 1.01 * envelope + 1e-12` at every sample carrying an envelope.
pub fn envelope_holds(series: &NormSeries) -> bool {
    series
        .a0
        .iter()
        .zip(&series.envelope)
        .all(|(a, e)| e.is_none_or(|e| *a <= ENVELOPE_SLACK * e + ENVELOPE_FLOOR))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub h2_initial: f64,
    pub sup_h2: f64,
    pub h4_sq_integral: f64,
    pub integral_finite: bool,
    pub integral_nondecreasing: bool,
    /// Both monitored quantities at or below the bound, when one is given.
    pub within_bound: Option<bool>,
}

pub fn monitor_energy(series: &NormSeries, bound: Option<f64>) -> EnergyReport {
    let h2_initial = series.h2.first().copied().unwrap_or(0.0);
    let sup_h2 = series.h2.iter().copied().fold(0.0, f64::max);
    let h4_sq_integral = series.h4_sq_integral.last().copied().unwrap_or(0.0);
    EnergyReport {
        h2_initial,
        sup_h2,
        h4_sq_integral,
        integral_finite: h4_sq_integral.is_finite(),
        integral_nondecreasing: series.h4_sq_integral.windows(2).all(|w| w[1] >= w[0]),
        within_bound: bound.map(|b| sup_h2 <= b && h4_sq_integral <= b),
    }
}
