//! Parameter sweeps over `(c1, c2, s0)`.

use std::fmt::Write as _;

use filmspec::analysis::{smallness_margins, stability_comparison, BoundSet, StabilityComparison};
use filmspec::integrator::{simulate, InitialData, SimConfig, StopReason};
use filmspec::model::{ModelParams, DEFAULT_N_TRUNC};
use filmspec::spectral::Grid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn validate(&self, name: &str) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(format!("sweep axis `{name}`: {m}")));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("bounds must be finite".into());
        }
        if self.min > self.max {
            return bad(format!("min {} exceeds max {}", self.min, self.max));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return bad("log spacing needs min > 0".into());
        }
        Ok(())
    }

    /// Grid values; the endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.count {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * f,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    Smallness,
    Dispersion,
    DecayRate,
}

/// Short per-point run started from random data with Wiener norm `s0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSimulation {
    pub points: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub t_end: f64,
    #[serde(default = "default_sim_kmax")]
    pub kmax: i64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub c1: Axis,
    pub c2: Axis,
    pub s0: Axis,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<SweepOutput>,
    /// Largest lattice wavenumber for the dispersion scan.
    #[serde(default = "default_kmax")]
    pub kmax: i64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Film thickness over `d` for the classical threshold.
    #[serde(default)]
    pub thickness_ratio: f64,
    #[serde(default)]
    pub simulate: Option<SweepSimulation>,
}

fn default_jobs() -> usize {
    1
}

fn all_outputs() -> Vec<SweepOutput> {
    vec![SweepOutput::Smallness, SweepOutput::Dispersion, SweepOutput::DecayRate]
}

fn default_kmax() -> i64 {
    16
}

fn default_dim() -> usize {
    1
}

fn default_sim_kmax() -> i64 {
    4
}

fn default_rho() -> f64 {
    0.5
}

impl SweepConfig {
    pub fn single(c1: f64, c2: f64, s0: f64) -> Self {
        Self {
            c1: Axis::fixed(c1),
            c2: Axis::fixed(c2),
            s0: Axis::fixed(s0),
            jobs: 1,
            outputs: all_outputs(),
            kmax: default_kmax(),
            dim: default_dim(),
            thickness_ratio: 0.0,
            simulate: None,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(format!("sweep: {m}")));
        self.c1.validate("c1")?;
        self.c2.validate("c2")?;
        self.s0.validate("s0")?;
        if self.c1.min <= 0.0 || self.c2.min <= 0.0 {
            return bad("c1 and c2 must be positive".into());
        }
        if self.s0.min < 0.0 || self.s0.max >= 1.0 {
            return bad(format!("s0 must lie in [0, 1), got [{}, {}]", self.s0.min, self.s0.max));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs must not be empty".into());
        }
        if self.kmax < 1 {
            return bad("kmax must be at least 1".into());
        }
        if !(1..=2).contains(&self.dim) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(self.thickness_ratio >= 0.0 && self.thickness_ratio.is_finite()) {
            return bad("thickness_ratio must be nonnegative".into());
        }
        if let Some(s) = &self.simulate {
            Grid::new(s.dim, s.points).map_err(|e| CliError::Usage(format!("sweep simulate: {e}")))?;
            if !(s.t_end > 0.0 && s.t_end.is_finite()) {
                return bad("simulate.t_end must be positive".into());
            }
        }
        Ok(())
    }

    /// Grid points with `c1` slowest and `s0` fastest.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let (c1s, c2s, s0s) = (self.c1.values(), self.c2.values(), self.s0.values());
        let mut out = Vec::with_capacity(c1s.len() * c2s.len() * s0s.len());
        for &c1 in &c1s {
            for &c2 in &c2s {
                for &s0 in &s0s {
                    out.push((c1, c2, s0));
                }
            }
        }
        out
    }

    fn has(&self, o: SweepOutput) -> bool {
        self.outputs.contains(&o)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub rate: Option<f64>,
    pub stop: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub c1: f64,
    pub c2: f64,
    pub s0: f64,
    pub bounds: BoundSet,
    pub stability: StabilityComparison,
    pub measured: Option<Measured>,
}

pub fn evaluate(cfg: &SweepConfig, (c1, c2, s0): (f64, f64, f64)) -> CliResult<SweepRow> {
    let bounds = smallness_margins(s0, c1, c2).map_err(|e| CliError::Usage(format!("sweep point ({c1}, {c2}, {s0}): {e}")))?;
    let stability = stability_comparison(c1, c2, cfg.thickness_ratio, cfg.kmax, cfg.dim);
    let measured = cfg.simulate.as_ref().map(|s| measure_decay(s, c1, c2, s0));
    Ok(SweepRow {
        c1,
        c2,
        s0,
        bounds,
        stability,
        measured,
    })
}

/// Observed rate `-ln(A0(T)/A0(0)) / T`.
fn measure_decay(s: &SweepSimulation, c1: f64, c2: f64, s0: f64) -> Measured {
    if s0 == 0.0 {
        return Measured { rate: None, stop: "skipped" };
    }
    let run = (|| {
        let grid = Grid::new(s.dim, s.points)?;
        let params = ModelParams::new(c1, c2, DEFAULT_N_TRUNC)?;
        let initial = InitialData::Random {
            a0: s0,
            rho: s.rho,
            kmax: s.kmax,
            seed: s.seed,
        };
        let mut cfg = SimConfig::new(grid, params, initial, s.t_end);
        cfg.check_envelope = false;
        simulate(&cfg)
    })();
    match run {
        Err(_) => Measured { rate: None, stop: "error" },
        Ok(r) => {
            let stop = match r.stop {
                StopReason::Completed => "completed",
                StopReason::StepUnderflow { .. } => "step_underflow",
                StopReason::Guard { .. } => "guard",
                StopReason::BlowUp { .. } => "blow_up",
            };
            let a = &r.series.a0;
            let rate = (r.stop.is_completed() && a.len() >= 2 && a[0] > 0.0 && r.final_time > 0.0)
                .then(|| -(a[a.len() - 1] / a[0]).ln() / r.final_time);
            Measured { rate, stop }
        }
    }
}

/// Evaluates every grid point on a pool of `jobs` threads. Rows come back in
/// grid order whatever the scheduling.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> CliResult<Vec<SweepRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let points = cfg.points();
    pool.install(|| points.par_iter().map(|&p| evaluate(cfg, p)).collect())
}

pub fn csv_header(cfg: &SweepConfig) -> String {
    let mut cols = vec!["c1", "c2", "s0"];
    if cfg.has(SweepOutput::Smallness) {
        cols.extend(["delta1", "delta2", "D1", "D2", "existence", "regularity", "smallness"]);
    }
    if cfg.has(SweepOutput::Dispersion) {
        cols.extend([
            "lambda_max",
            "k_fastest",
            "lattice_stable",
            "continuum_stable",
            "threshold_ratio",
            "threshold_stable",
            "agree",
        ]);
    }
    if cfg.has(SweepOutput::DecayRate) {
        cols.push("decay_rate");
    }
    if cfg.simulate.is_some() {
        cols.extend(["measured_rate", "sim_stop"]);
    }
    cols.join(",")
}

pub fn csv_row(cfg: &SweepConfig, r: &SweepRow) -> String {
    let mut s = format!("{},{},{}", r.c1, r.c2, r.s0);
    let b = &r.bounds;
    if cfg.has(SweepOutput::Smallness) {
        let _ = write!(
            s,
            ",{},{},{},{},{},{},{}",
            b.delta1, b.delta2, b.d1, b.d2, b.cond_existence, b.cond_regularity, b.cond_smallness
        );
    }
    if cfg.has(SweepOutput::Dispersion) {
        let st = &r.stability;
        let k: Vec<String> = st.fastest_mode.k.iter().map(i64::to_string).collect();
        let _ = write!(
            s,
            ",{},{},{},{},{},{},{}",
            st.fastest_mode.lambda,
            k.join(";"),
            st.symbol_stable_lattice,
            st.symbol_stable_continuum,
            st.threshold_ratio,
            st.threshold_stable,
            st.agree
        );
    }
    if cfg.has(SweepOutput::DecayRate) {
        let _ = write!(s, ",{}", b.decay_rate());
    }
    if let Some(m) = &r.measured {
        let rate = m.rate.map(|x| x.to_string()).unwrap_or_default();
        let _ = write!(s, ",{rate},{}", m.stop);
    }
    s
}

pub fn to_csv(cfg: &SweepConfig, rows: &[SweepRow]) -> String {
    let mut out = csv_header(cfg);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_row(cfg, r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_hit_endpoints() {
        let lin = Axis {
            min: 0.1,
            max: 2.0,
            count: 5,
            spacing: Spacing::Linear,
        };
        let v = lin.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 2.0);
        let log = Axis {
            min: 1e-3,
            max: 1e-1,
            count: 3,
            spacing: Spacing::Log,
        };
        let v = log.values();
        assert_eq!(v[0], 1e-3);
        assert!((v[1] - 1e-2).abs() < 1e-15);
        assert_eq!(v[2], 1e-1);
        assert_eq!(Axis::fixed(0.3).values(), vec![0.3]);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let mut cfg = SweepConfig::single(0.5, 1.0, 0.01);
        cfg.c1.count = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::single(0.5, 1.0, 0.01);
        cfg.c2 = Axis {
            min: 2.0,
            max: 1.0,
            count: 3,
            spacing: Spacing::Linear,
        };
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::single(0.5, 1.0, 0.01);
        cfg.s0.max = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::single(0.5, 1.0, 0.01);
        cfg.s0 = Axis {
            min: 0.0,
            max: 0.5,
            count: 2,
            spacing: Spacing::Log,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_point_matches_closed_forms() {
        let cfg = SweepConfig::single(0.5, 1.0, 0.01);
        let rows = run_sweep(&cfg, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].bounds, smallness_margins(0.01, 0.5, 1.0).unwrap());
        let csv = to_csv(&cfg, &rows);
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), row.len());
        let d2 = header.iter().position(|h| *h == "D2").unwrap();
        assert_eq!(row[d2].parse::<f64>().unwrap(), rows[0].bounds.d2);
    }

    #[test]
    fn row_order_is_grid_order() {
        let cfg = SweepConfig {
            c1: Axis {
                min: 0.1,
                max: 2.0,
                count: 7,
                spacing: Spacing::Linear,
            },
            c2: Axis {
                min: 0.1,
                max: 2.0,
                count: 5,
                spacing: Spacing::Log,
            },
            s0: Axis {
                min: 0.0,
                max: 0.2,
                count: 3,
                spacing: Spacing::Linear,
            },
            ..SweepConfig::single(1.0, 1.0, 0.0)
        };
        let a = to_csv(&cfg, &run_sweep(&cfg, 1).unwrap());
        let b = to_csv(&cfg, &run_sweep(&cfg, 4).unwrap());
        assert_eq!(a, b);
        let pts = cfg.points();
        assert_eq!(pts.len(), 105);
        assert_eq!(pts[1], (0.1, 0.1, 0.1));
    }

    #[test]
    fn measured_rate_follows_the_linear_symbol() {
        let mut cfg = SweepConfig::single(0.5, 1.0, 1e-6);
        cfg.simulate = Some(SweepSimulation {
            points: 16,
            dim: 1,
            t_end: 0.1,
            kmax: 1,
            rho: 0.5,
            seed: 3,
        });
        let rows = run_sweep(&cfg, 1).unwrap();
        let m = rows[0].measured.as_ref().unwrap();
        assert_eq!(m.stop, "completed");
        assert!((m.rate.unwrap() - 6.5).abs() < 1e-3, "{m:?}");
        assert!(csv_header(&cfg).ends_with("measured_rate,sim_stop"));
    }
}
