// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies: run an experiment, write CSV outputs and `manifest.toml`.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};

use kerrnet::dynamics::{uniform_grid, ExpectationSeries, TrajectoryConfig};
use kerrnet::gates::{high_level, test_pattern, CavityFactory, GateKind, GateModel};
use kerrnet::reduction::ReductionBasis;
use kerrnet::slh::CavityProvider;

use crate::config::{ExperimentConfig, ModelKind};
use crate::experiments::{
    compute_basis, fidelity_curve, linear_drive_response, max_relative_deviation, steady_sweep, steepest_rise,
    OutputPoint, ReductionMethod,
};
use crate::manifest::Manifest;
use crate::validate;

/// Loads the configured basis file or builds one, truncated to `cfg.d`.
pub fn obtain_basis(cfg: &ExperimentConfig) -> Result<ReductionBasis> {
    let basis = match &cfg.basis {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let b = ReductionBasis::read(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            b.validate()?;
            if b.full_dim() != cfg.n {
                bail!("basis {} has N = {}, config has n = {}", path.display(), b.full_dim(), cfg.n);
            }
            b
        }
        None => compute_basis(cfg.n, cfg.d, cfg.lambda(), &cfg.params.cavity)?,
    };
    Ok(basis.with_dim(cfg.d)?)
}

fn single_factory(cfg: &ExperimentConfig, model: ModelKind, basis: Option<&ReductionBasis>) -> Result<CavityFactory> {
    Ok(match model {
        ModelKind::Full => CavityFactory::full(1, cfg.n, &cfg.params.cavity)?,
        ModelKind::Reduced => CavityFactory::reduced(1, basis.expect("reduced model needs a basis"), &cfg.params.cavity)?,
    })
}

fn needs_basis(cfg: &ExperimentConfig) -> bool {
    cfg.models.contains(&ModelKind::Reduced)
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

/// `reduce`: builds the basis and writes `basis.txt` and `weights.csv`.
pub fn reduce(cfg: &ExperimentConfig, out: &Path) -> Result<ReductionBasis> {
    prepare(out)?;
    let mut manifest = Manifest::new("reduce", cfg);
    let mut basis = compute_basis(cfg.n, cfg.d, cfg.lambda(), &cfg.params.cavity)?;
    basis.manifest_hash = Some(manifest.input_hash()?);

    let mut text = Vec::new();
    basis.write(&mut text)?;
    manifest.write_output(out, "basis.txt", &text)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "weight", "retained"])?;
    let first_kept = cfg.n - cfg.d;
    for (i, x) in basis.weights.iter().enumerate() {
        w.write_record([i.to_string(), format!("{x:e}"), (i >= first_kept).to_string()])?;
    }
    manifest.write_output(out, "weights.csv", &w.into_inner()?)?;

    let kept: f64 = basis.weights[first_kept..].iter().sum();
    let total: f64 = basis.weights.iter().sum();
    manifest.result("retained_weight_fraction", kept / total);
    manifest.write(out)?;
    Ok(basis)
}

fn push_points(w: &mut csv::Writer<Vec<u8>>, model: &str, pts: &[OutputPoint]) -> Result<()> {
    for p in pts {
        for (channel, z) in [("reflected", p.reflected), ("transmitted", p.transmitted)] {
            w.write_record([
                p.eps.to_string(),
                model.to_string(),
                channel.to_string(),
                format!("{:e}", z.norm()),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
            ])?;
        }
    }
    Ok(())
}

/// Steady-state sweeps of each configured model.
#[derive(Clone, Debug)]
pub struct SteadySweep {
    pub models: Vec<(ModelKind, Vec<OutputPoint>)>,
}

impl SteadySweep {
    pub fn model(&self, kind: ModelKind) -> Option<&[OutputPoint]> {
        self.models.iter().find(|(k, _)| *k == kind).map(|(_, p)| p.as_slice())
    }
}

/// `sweep-steady`: steady-state reflected and transmitted fields over the `eps` grid.
pub fn sweep_steady(cfg: &ExperimentConfig, out: &Path) -> Result<SteadySweep> {
    prepare(out)?;
    let mut manifest = Manifest::new("sweep-steady", cfg);
    let basis = if needs_basis(cfg) { Some(obtain_basis(cfg)?) } else { None };
    let eps = cfg.eps.points()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eps", "model", "channel", "abs", "re", "im"])?;
    let mut models = Vec::new();
    for &model in &cfg.models {
        let f = single_factory(cfg, model, basis.as_ref())?;
        let pts: Vec<OutputPoint> = steady_sweep(&f, &eps)?.into_iter().map(|(p, _)| p).collect();
        push_points(&mut w, model.label(), &pts)?;
        if let Some((at, slope)) = steepest_rise(&pts) {
            manifest.result(&format!("{}_steepest_rise_eps", model.label()), at);
            manifest.result(&format!("{}_steepest_rise_slope", model.label()), slope);
        }
        models.push((model, pts));
    }
    let sweep = SteadySweep { models };
    if let (Some(full), Some(red)) = (sweep.model(ModelKind::Full), sweep.model(ModelKind::Reduced)) {
        let (dev, at, channel) = max_relative_deviation(full, red)?;
        manifest.result("max_relative_deviation", dev);
        manifest.result("max_relative_deviation_eps", at);
        manifest.result("max_relative_deviation_channel", channel);
    }
    manifest.write_output(out, "steady.csv", &w.into_inner()?)?;
    manifest.write(out)?;
    Ok(sweep)
}

fn push_series(w: &mut csv::Writer<Vec<u8>>, model: &str, s: &ExpectationSeries) -> Result<()> {
    for (k, t) in s.times.iter().enumerate() {
        for (o, name) in s.names.iter().enumerate() {
            let z = s.mean[o][k];
            w.write_record([
                t.to_string(),
                model.to_string(),
                name.clone(),
                format!("{:e}", z.norm()),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", s.stderr[o][k]),
            ])?;
        }
    }
    Ok(())
}

const SERIES_HEADER: [&str; 7] = ["t", "model", "observable", "abs", "re", "im", "stderr"];

fn trajectory_config(cfg: &ExperimentConfig) -> TrajectoryConfig {
    TrajectoryConfig { trajectories: cfg.trajectories, seed: cfg.seed, ..TrajectoryConfig::default() }
}

fn samples(cfg: &ExperimentConfig, duration: f64) -> usize {
    (duration * cfg.samples_per_unit as f64).round() as usize + 1
}

/// `sweep-time`: outputs under a linear drive ramp.
pub fn sweep_time(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(ModelKind, ExpectationSeries)>> {
    prepare(out)?;
    let mut manifest = Manifest::new("sweep-time", cfg);
    let basis = if needs_basis(cfg) { Some(obtain_basis(cfg)?) } else { None };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SERIES_HEADER)?;
    let mut all = Vec::new();
    for &model in &cfg.models {
        let f = single_factory(cfg, model, basis.as_ref())?;
        let s = linear_drive_response(
            &f,
            cfg.drive_slope,
            cfg.t_end,
            samples(cfg, cfg.t_end),
            cfg.method,
            &trajectory_config(cfg),
        )?;
        push_series(&mut w, model.label(), &s)?;
        all.push((model, s));
    }
    manifest.write_output(out, "time.csv", &w.into_inner()?)?;
    manifest.write(out)?;
    Ok(all)
}

/// `fidelity-curve`: fidelity versus retained dimension for both reductions.
pub fn fidelity(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<crate::experiments::FidelityPoint>> {
    prepare(out)?;
    let mut manifest = Manifest::new("fidelity-curve", cfg);
    let basis = obtain_basis(cfg)?;
    let eps = cfg.fidelity_eps();
    let pts =
        fidelity_curve(&basis, &cfg.params.cavity, &eps, &cfg.d_grid, &[ReductionMethod::Jade, ReductionMethod::Fock])?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eps", "d", "method", "fidelity"])?;
    for p in &pts {
        w.write_record([p.eps.to_string(), p.d.to_string(), p.method.label().to_string(), format!("{:.12}", p.fidelity)])?;
    }
    for (i, &e) in eps.iter().enumerate() {
        for method in [ReductionMethod::Jade, ReductionMethod::Fock] {
            let first = pts.iter().find(|p| p.eps == e && p.method == method && p.fidelity >= 0.99).map(|p| p.d as i64);
            manifest.result(&format!("eps{i}_{}_first_d_above_0.99", method.label()), first.unwrap_or(-1));
        }
    }
    manifest.write_output(out, "fidelity.csv", &w.into_inner()?)?;
    manifest.write(out)?;
    Ok(pts)
}

/// Factory for a gate of `cfg.gate`; `long` runs a full latch at `n` levels per mode.
pub fn gate_factory(
    cfg: &ExperimentConfig,
    model: ModelKind,
    basis: Option<&ReductionBasis>,
    long: bool,
) -> Result<CavityFactory> {
    let modes = cfg.gate.modes();
    Ok(match model {
        ModelKind::Full => {
            let n = if cfg.gate == GateKind::Latch && !long { cfg.latch_full_n } else { cfg.n };
            CavityFactory::full(modes, n, &cfg.params.cavity)?
        }
        ModelKind::Reduced => {
            CavityFactory::reduced(modes, basis.expect("reduced model needs a basis"), &cfg.params.cavity)?
        }
    })
}

/// `gate-sim`: trajectory simulation of `cfg.gate` under its logic test pattern.
pub fn gate_sim(cfg: &ExperimentConfig, out: &Path, long: bool) -> Result<Vec<(ModelKind, ExpectationSeries)>> {
    prepare(out)?;
    let mut manifest = Manifest::new("gate-sim", cfg);
    manifest.result("long", long);
    let basis = if needs_basis(cfg) { Some(obtain_basis(cfg)?) } else { None };
    let schedule = test_pattern(cfg.gate, high_level(cfg.gate, &cfg.params), cfg.ramp)?;
    let grid = uniform_grid(schedule.start(), schedule.end(), samples(cfg, schedule.end() - schedule.start()));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SERIES_HEADER)?;
    let mut all = Vec::new();
    for &model in &cfg.models {
        let f = gate_factory(cfg, model, basis.as_ref(), long)?;
        manifest.result(&format!("{}_dimension", model.label()), f.space().total_dim() as i64);
        let g = GateModel::new(cfg.gate, &f, &cfg.params)?;
        let s = g.simulate(&schedule, &grid, &trajectory_config(cfg))?;
        push_series(&mut w, model.label(), &s)?;
        all.push((model, s));
    }
    manifest.write_output(out, &format!("gate_{}.csv", cfg.gate), &w.into_inner()?)?;
    manifest.write(out)?;
    Ok(all)
}

/// `validate`: algebra and validity checks; fails when any check fails.
pub fn validate(cfg: &ExperimentConfig, out: &Path, fault: f64) -> Result<validate::Report> {
    prepare(out)?;
    let mut manifest = Manifest::new("validate", cfg);
    manifest.result("injected_fault", fault);
    let report = validate::run(&cfg.params, cfg.seed, fault)?;
    manifest.result("passed", report.passed());
    manifest.write_output(out, "validation.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    manifest.write(out)?;
    if !report.passed() {
        let names: Vec<_> = report.failures().map(|c| format!("{} ({:e} > {:e})", c.name, c.value, c.tolerance)).collect();
        bail!("validation failed: {}", names.join("; "));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 20,
            d: 6,
            eps: Grid { start: 0.0, stop: 4.0, step: 2.0 },
            d_grid: vec![4, 6],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn reduce_writes_linked_basis() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small();
        let b = reduce(&cfg, dir.path()).unwrap();
        let back = ReductionBasis::read(BufReader::new(fs::File::open(dir.path().join("basis.txt")).unwrap())).unwrap();
        assert_eq!(back, b);
        let hash = Manifest::new("reduce", &cfg).input_hash().unwrap();
        assert_eq!(back.manifest_hash.as_deref(), Some(hash.as_str()));
        assert!(dir.path().join("manifest.toml").exists());
    }

    #[test]
    fn steady_csv_has_two_channels_per_point() {
        let dir = tempfile::tempdir().unwrap();
        sweep_steady(&small(), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
        assert!(text.starts_with("eps,model,channel,abs,re,im"));
    }

    #[test]
    fn basis_dimension_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        reduce(&small(), dir.path()).unwrap();
        let cfg = ExperimentConfig { n: 21, basis: Some(dir.path().join("basis.txt")), ..small() };
        assert!(obtain_basis(&cfg).is_err());
    }
}
