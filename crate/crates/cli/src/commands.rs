use std::io::Write;
use std::path::Path;

use filmspec::analysis::{
    check_conditions, khenner_threshold, max_growth, nondimensionalize, smallness_margins,
    stability_comparison, unstable_band, BoundSet, ConditionMode, ConditionReport, GrowthMode,
    PhysicalParams, Scaling, StabilityComparison,
};
use filmspec::integrator::{envelope_holds, monitor_energy, simulate, SimResult, StopReason};
use filmspec::io::{save_snapshot, write_norm_csv};
use filmspec::verify::{check_gradient_lemma_scaled, run_suite, Suite};
use filmspec::FilmError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, ConditionsArgs, DispersionArgs, SimulateArgs, SweepArgs, VerifyArgs};
use crate::config::{from_value, load_run_config, read_json, RunConfig};
use crate::manifest::{
    sha256_hex, Conditions, Manifest, Outputs, SnapshotEntry, FINAL_SNAPSHOT_FILE, MANIFEST_FILE,
    MANIFEST_FORMAT, NORMS_FILE,
};
use crate::sweep::{run_sweep, to_csv, SweepConfig};
use crate::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME};

pub fn dispatch(cmd: Command, thread_cap: Option<usize>, out: &mut dyn Write) -> CliResult<u8> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Conditions(a) => cmd_conditions(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, thread_cap, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Dispersion(a) => cmd_dispersion(&a, out),
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_json(out: &mut dyn Write, v: &impl Serialize) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(runtime)?;
    writeln!(out)?;
    Ok(())
}

// simulate

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult<u8> {
    let rc = load_run_config(&a.config, a.seed)?;
    let dir = a
        .out
        .clone()
        .or_else(|| rc.out_dir.clone())
        .ok_or_else(|| usage("no output directory: pass --out or set `out_dir` in the config"))?;
    let result = simulate(&rc.sim).map_err(|e| match e {
        FilmError::BlowUp | FilmError::Pole { .. } | FilmError::Underresolved { .. } => runtime(e),
        other => usage(format!("config: {other}")),
    })?;
    std::fs::create_dir_all(&dir)?;
    let manifest = write_run(&dir, &rc, &result)?;
    if a.json {
        write_json(out, &manifest)?;
    } else {
        summarize(out, &manifest, &result, &dir)?;
    }
    Ok(if result.stop.is_completed() { EXIT_OK } else { EXIT_RUNTIME })
}

/// Writes norms, snapshots and the manifest for a finished run.
pub fn write_run(dir: &Path, rc: &RunConfig, r: &SimResult) -> CliResult<Manifest> {
    let mut norms = Vec::new();
    write_norm_csv(&mut norms, &r.series).map_err(runtime)?;
    std::fs::write(dir.join(NORMS_FILE), &norms)?;

    let mut snapshots = Vec::new();
    for (i, (t, field)) in r.snapshots.iter().enumerate() {
        let file = format!("snapshot_{i:03}.film");
        save_snapshot(dir.join(&file), field, *t).map_err(runtime)?;
        snapshots.push(SnapshotEntry { time: *t, file });
    }
    save_snapshot(dir.join(FINAL_SNAPSHOT_FILE), &r.final_field, r.final_time).map_err(runtime)?;

    let p = &rc.sim.params;
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: rc.hash(),
        config: rc.document.clone(),
        resolved: rc.sim.clone(),
        physical: rc.physical,
        scaling: rc.scaling,
        bounds: r.bounds,
        conditions: Conditions::evaluate(p.c1, p.c2, r.bounds.as_ref()),
        stop: r.stop.clone(),
        final_time: r.final_time,
        stats: r.stats,
        max_abs_mean: r.max_abs_mean,
        envelope_holds: envelope_holds(&r.series),
        energy: monitor_energy(&r.series, rc.sim.energy_bound),
        events: r.events.clone(),
        outputs: Outputs {
            norms: NORMS_FILE.into(),
            norms_sha256: sha256_hex(&norms),
            snapshots,
            final_snapshot: FINAL_SNAPSHOT_FILE.into(),
        },
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
    std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
    Ok(manifest)
}

fn summarize(out: &mut dyn Write, m: &Manifest, r: &SimResult, dir: &Path) -> CliResult<()> {
    let stop = match &r.stop {
        StopReason::Completed => "completed".to_string(),
        StopReason::StepUnderflow { t, dt } => format!("step underflow at t = {t} (dt = {dt:e})"),
        StopReason::Guard { t, message } => format!("guard at t = {t}: {message}"),
        StopReason::BlowUp { t } => format!("blow-up at t = {t}"),
    };
    writeln!(out, "stop: {stop}")?;
    writeln!(out, "final time: {}", r.final_time)?;
    writeln!(
        out,
        "steps: {} accepted, {} rejected, dt in [{:e}, {:e}]",
        r.stats.accepted, r.stats.rejected, r.stats.dt_smallest, r.stats.dt_largest
    )?;
    if let (Some(first), Some(last)) = (r.series.a0.first(), r.series.a0.last()) {
        writeln!(out, "A0: {first:e} -> {last:e}")?;
    }
    if let Some(b) = &r.bounds {
        writeln!(
            out,
            "D1 = {}, D2 = {}, smallness {}",
            b.d1,
            b.d2,
            verdict(b.cond_smallness)
        )?;
    }
    writeln!(out, "envelope: {}", verdict(m.envelope_holds))?;
    writeln!(
        out,
        "energy: sup H2 = {:e} (H2(0) = {:e}), H4^2 integral = {:e}",
        m.energy.sup_h2, m.energy.h2_initial, m.energy.h4_sq_integral
    )?;
    writeln!(out, "max |mean| = {:e}", r.max_abs_mean)?;
    if !r.events.is_empty() {
        writeln!(out, "events: {}", r.events.len())?;
    }
    writeln!(out, "config hash: {}", m.config_hash)?;
    writeln!(out, "outputs: {}", dir.display())?;
    Ok(())
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

// conditions

/// Continuum band of growing wavenumbers; `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: Option<f64>,
}

fn band(c1: f64, c2: f64) -> Option<Band> {
    unstable_band(c1, c2).map(|(lo, hi)| Band {
        lo,
        hi: hi.is_finite().then_some(hi),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhysicalSummary {
    pub params: PhysicalParams,
    pub scaling: Scaling,
    /// Critical thickness of the classical criterion, cm.
    pub khenner_threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub bounds: BoundSet,
    pub decay_rate: f64,
    pub existence: ConditionReport,
    pub regularity: ConditionReport,
    pub stability: StabilityComparison,
    pub unstable_band: Option<Band>,
    pub physical: Option<PhysicalSummary>,
}

pub fn conditions_report(
    c1: f64,
    c2: f64,
    s0: f64,
    thickness_ratio: f64,
    kmax: i64,
    dim: usize,
) -> CliResult<ConditionsReport> {
    if !(thickness_ratio >= 0.0 && thickness_ratio.is_finite()) {
        return Err(usage(format!("--thickness-ratio must be nonnegative, got {thickness_ratio}")));
    }
    let bounds = smallness_margins(s0, c1, c2).map_err(usage)?;
    Ok(ConditionsReport {
        bounds,
        decay_rate: bounds.decay_rate(),
        existence: check_conditions(c1, c2, ConditionMode::Existence),
        regularity: check_conditions(c1, c2, ConditionMode::Regularity),
        stability: stability_comparison(c1, c2, thickness_ratio, kmax, dim),
        unstable_band: band(c1, c2),
        physical: None,
    })
}

pub fn cmd_conditions(a: &ConditionsArgs, out: &mut dyn Write) -> CliResult<u8> {
    let dim = a.dim as usize;
    let report = match &a.config {
        Some(path) => {
            let phys: PhysicalParams = from_value(read_json(path)?, "")?;
            let scaling = nondimensionalize(&phys).map_err(usage)?;
            let mut r = conditions_report(scaling.c1, scaling.c2, a.s0, phys.u0_mass / phys.d, a.kmax, dim)?;
            r.physical = Some(PhysicalSummary {
                params: phys,
                scaling,
                khenner_threshold: khenner_threshold(&phys),
            });
            r
        }
        None => {
            let (c1, c2) = (a.c1.expect("required by clap"), a.c2.expect("required by clap"));
            conditions_report(c1, c2, a.s0, a.thickness_ratio, a.kmax, dim)?
        }
    };
    if a.json {
        write_json(out, &report)?;
    } else {
        print_conditions(out, &report)?;
    }
    Ok(EXIT_OK)
}

fn print_conditions(out: &mut dyn Write, r: &ConditionsReport) -> CliResult<()> {
    let b = &r.bounds;
    if let Some(p) = &r.physical {
        writeln!(
            out,
            "scaling: x unit = {:e} cm, t unit = {:e} s",
            p.scaling.x_scale, p.scaling.t_scale
        )?;
    }
    writeln!(out, "c1 = {}, c2 = {}, s0 = {}", b.c1, b.c2, b.s0)?;
    writeln!(out, "delta1 = {}", b.delta1)?;
    writeln!(out, "delta2 = {}", b.delta2)?;
    writeln!(out, "D1 = {}", b.d1)?;
    writeln!(out, "D2 = {}", b.d2)?;
    writeln!(out, "decay rate D1 + D2 = {}", r.decay_rate)?;
    writeln!(out, "existence  c2 > max(c1 - 1, c1/3): {}", verdict(r.existence.holds))?;
    writeln!(
        out,
        "regularity c2 > max(c1 - 1, c1/3, c1^2/4): {}",
        verdict(r.regularity.holds)
    )?;
    writeln!(out, "smallness  D1 > 0 and D2 > 0: {}", verdict(b.cond_smallness))?;
    let s = &r.stability;
    writeln!(
        out,
        "dispersion: fastest mode k = {:?}, lambda = {}; lattice {}",
        s.fastest_mode.k,
        s.fastest_mode.lambda,
        stable(s.symbol_stable_lattice)
    )?;
    match r.unstable_band {
        None => writeln!(out, "continuum: no growing wavenumbers")?,
        Some(Band { lo, hi: Some(hi) }) => writeln!(out, "continuum: growth for {lo} < |k| < {hi}")?,
        Some(Band { lo, hi: None }) => writeln!(out, "continuum: growth for |k| > {lo}")?,
    }
    writeln!(
        out,
        "thickness criterion: ratio {} against threshold {}: {}",
        s.thickness_ratio,
        s.threshold_ratio,
        stable(s.threshold_stable)
    )?;
    if let Some(p) = &r.physical {
        writeln!(out, "critical thickness: {:e} cm", p.khenner_threshold)?;
    }
    writeln!(
        out,
        "stability verdicts {}",
        if s.agree { "agree" } else { "disagree" }
    )?;
    Ok(())
}

fn stable(s: bool) -> &'static str {
    if s {
        "stable"
    } else {
        "unstable"
    }
}

// sweep

pub fn cmd_sweep(a: &SweepArgs, thread_cap: Option<usize>, out: &mut dyn Write) -> CliResult<u8> {
    let cfg: SweepConfig = from_value(read_json(&a.config)?, "")?;
    cfg.validate()?;
    let mut jobs = a.jobs.map(|j| j as usize).unwrap_or(cfg.jobs);
    if let Some(cap) = thread_cap {
        jobs = jobs.min(cap);
    }
    let rows = run_sweep(&cfg, jobs)?;
    let csv = to_csv(&cfg, &rows);
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join("sweep.csv");
            std::fs::write(&path, csv)?;
            writeln!(out, "{} rows -> {}", rows.len(), path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

// verify

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<u8> {
    let trials = a.trials as usize;
    let mut reports = run_suite(a.suite, a.seed, trials).map_err(runtime)?;
    if a.lemma_scale != 1.0 && matches!(a.suite, Suite::All | Suite::Spectral) {
        let scaled = check_gradient_lemma_scaled(trials, a.seed, a.lemma_scale).map_err(runtime)?;
        for r in reports.iter_mut().filter(|r| r.name == scaled.name) {
            *r = scaled.clone();
        }
    }
    let mut failed = Vec::new();
    for r in &reports {
        let mut v = serde_json::to_value(r).map_err(runtime)?;
        v["passed"] = Value::Bool(r.passed());
        if !r.passed() {
            failed.push(r.name.clone());
        }
        writeln!(out, "{v}")?;
    }
    let summary = json!({
        "summary": {
            "suite": a.suite,
            "seed": a.seed,
            "trials": trials,
            "checks": reports.len(),
            "failed": failed,
            "passed": failed.is_empty(),
        }
    });
    writeln!(out, "{summary}")?;
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_RUNTIME })
}

// dispersion

#[derive(Clone, Debug, Serialize)]
pub struct ShellRate {
    pub k2: i64,
    pub abs_k: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DispersionReport {
    pub c1: f64,
    pub c2: f64,
    pub dim: usize,
    pub kmax: i64,
    /// One entry per distinct `|k|^2` of resolved lattice modes.
    pub shells: Vec<ShellRate>,
    pub fastest: GrowthMode,
    pub lattice_stable: bool,
    pub unstable_band: Option<Band>,
}

pub fn dispersion_report(c1: f64, c2: f64, kmax: i64, dim: usize) -> CliResult<DispersionReport> {
    if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(usage(format!("c1 and c2 must be positive, got {c1}, {c2}")));
    }
    let mut k2s: Vec<i64> = if dim == 1 {
        (1..=kmax).map(|k| k * k).collect()
    } else {
        (0..=kmax)
            .flat_map(|a| (0..=kmax).map(move |b| a * a + b * b))
            .filter(|&k2| k2 > 0 && k2 <= kmax * kmax)
            .collect()
    };
    k2s.sort_unstable();
    k2s.dedup();
    let shells = k2s
        .into_iter()
        .map(|k2| ShellRate {
            k2,
            abs_k: (k2 as f64).sqrt(),
            lambda: filmspec::model::linear_symbol_sq(k2 as f64, c1, c2),
        })
        .collect();
    let fastest = max_growth(c1, c2, kmax, dim);
    Ok(DispersionReport {
        c1,
        c2,
        dim,
        kmax,
        shells,
        lattice_stable: fastest.lambda <= 0.0,
        fastest,
        unstable_band: band(c1, c2),
    })
}

pub fn cmd_dispersion(a: &DispersionArgs, out: &mut dyn Write) -> CliResult<u8> {
    let r = dispersion_report(a.c1, a.c2, a.kmax, a.dim as usize)?;
    if a.json {
        write_json(out, &r)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "|k|^2,|k|,lambda")?;
    for s in &r.shells {
        writeln!(out, "{},{},{}", s.k2, s.abs_k, s.lambda)?;
    }
    writeln!(
        out,
        "# fastest mode k = {:?}, lambda = {}; lattice {}",
        r.fastest.k,
        r.fastest.lambda,
        stable(r.lattice_stable)
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn conditions_report_at_reference_point() {
        let r = conditions_report(0.5, 1.0, 0.01, 0.0, 16, 1).unwrap();
        assert!(r.existence.holds && r.regularity.holds && r.bounds.cond_smallness);
        assert!((r.bounds.d1 - 1.3967766012269819859).abs() < 1e-12);
        assert!(r.unstable_band.is_none());
        let r = conditions_report(0.5, 1.0, 0.1, 0.0, 16, 1).unwrap();
        assert!(r.bounds.d2 < 0.0 && !r.bounds.cond_smallness);
        let r = conditions_report(0.5, 1.0, 0.0, 0.0, 16, 1).unwrap();
        assert_eq!((r.bounds.delta1, r.bounds.delta2), (0.0, 0.0));
    }

    #[test]
    fn conditions_reject_bad_inputs() {
        for (c1, c2, s0) in [(0.5, 1.0, 1.0), (0.5, 1.0, -0.1), (-0.5, 1.0, 0.01)] {
            assert!(matches!(
                conditions_report(c1, c2, s0, 0.0, 16, 1),
                Err(CliError::Usage(_))
            ));
        }
        assert!(conditions_report(0.5, 1.0, 0.01, -1.0, 16, 1).is_err());
    }

    #[test]
    fn conditions_text_lists_every_verdict() {
        let r = conditions_report(0.5, 1.0, 0.01, 0.0, 16, 1).unwrap();
        let mut buf = Vec::new();
        print_conditions(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for needle in ["delta1 =", "delta2 =", "D1 =", "D2 =", "existence", "regularity", "smallness", "thickness criterion", "disagree"] {
            assert!(text.contains(needle), "missing {needle}:\n{text}");
        }
    }

    #[test]
    fn dispersion_shells() {
        let r = dispersion_report(0.5, 1.0, 3, 1).unwrap();
        assert_eq!(r.shells.iter().map(|s| s.k2).collect::<Vec<_>>(), vec![1, 4, 9]);
        assert_eq!(r.shells[0].lambda, -6.5);
        assert!(r.lattice_stable);
        let r = dispersion_report(0.5, 1.0, 2, 2).unwrap();
        assert_eq!(r.shells.iter().map(|s| s.k2).collect::<Vec<_>>(), vec![1, 2, 4]);
        let r = dispersion_report(3.0, 0.5, 4, 1).unwrap();
        assert!(!r.lattice_stable);
        assert!(r.unstable_band.unwrap().hi.is_none());
    }
}
