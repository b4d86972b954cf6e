// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kerrnet::dynamics::{master_evolve, DriveSchedule, EvolveOptions, TrajectoryConfig};
use kerrnet::fock::{SpaceDescriptor, STATE_TOL};
use kerrnet::gates::{build_gate, closed_form, test_pattern, CavityFactory, GateKind, GateModel, GateParams};
use kerrnet::reduction::{BlockConvention, ReductionBasis};
use kerrnet::slh::{drives, Drives, NetworkDescription, SlhTriple};
use kerrnet::C64;

fn drive_names(kind: GateKind) -> &'static [&'static str] {
    match kind {
        GateKind::And => &["xi1", "xi2"],
        GateKind::Not => &["xi"],
        GateKind::Latch => &["s_bar", "r_bar"],
    }
}

fn random_drives(kind: GateKind, rng: &mut ChaCha8Rng) -> Drives {
    drives(drive_names(kind).iter().map(|n| (*n, C64::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)))))
}

fn random_basis(n: usize, d: usize, rng: &mut ChaCha8Rng) -> ReductionBasis {
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    ReductionBasis {
        t: m.qr().q(),
        d,
        lambda: 1.0,
        weights: vec![],
        convention: BlockConvention::Last,
        manifest_hash: None,
    }
}

fn gap(a: &SlhTriple, b: &SlhTriple, dr: &Drives) -> (f64, f64, f64) {
    let (x, y) = (a.evaluate(dr).unwrap(), b.evaluate(dr).unwrap());
    let s = (x.s - y.s).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let l = x.l.iter().zip(&y.l).fold(0.0f64, |m, (p, q)| m.max(p.sub(q).unwrap().max_abs()));
    let scale = 1.0 + y.h.max_abs();
    (s, l, x.h.sub(&y.h).unwrap().max_abs() / scale)
}

#[test]
fn bundled_networks_parse() {
    for kind in GateKind::ALL {
        NetworkDescription::parse(kind.network()).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduced_composition_matches_reduced_closed_form(seed in any::<u64>(), which in 0usize..3) {
        let kind = GateKind::ALL[which];
        let p = GateParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = if kind == GateKind::Latch { 6 } else { 9 };
        let basis = random_basis(n, n - 2, &mut rng);
        let f = CavityFactory::reduced(kind.modes(), &basis, &p.cavity).unwrap();
        let composed = build_gate(kind, &f, &p).unwrap();
        let closed = closed_form(kind, &f, &p).unwrap();
        let (s, l, h) = gap(&composed, &closed, &random_drives(kind, &mut rng));
        prop_assert!(s <= 1e-12, "S gap {s}");
        prop_assert!(l <= 1e-9, "L gap {l}");
        prop_assert!(h <= 1e-9, "H gap {h}");
    }
}

#[test]
fn full_composition_matches_closed_form() {
    let p = GateParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in GateKind::ALL {
        let f = CavityFactory::full(kind.modes(), 8, &p.cavity).unwrap();
        let composed = build_gate(kind, &f, &p).unwrap();
        let closed = closed_form(kind, &f, &p).unwrap();
        let (s, l, h) = gap(&composed, &closed, &random_drives(kind, &mut rng));
        assert!(s <= 1e-12 && l <= 1e-9 && h <= 1e-9, "{kind:?}: {s} {l} {h}");
    }
}

#[test]
fn trajectory_ensembles_are_bit_stable() {
    let p = GateParams::default();
    let f = CavityFactory::full(1, 12, &p.cavity).unwrap();
    let model = GateModel::new(GateKind::Not, &f, &p).unwrap();
    let schedule = test_pattern(GateKind::Not, 5.0, 0.2).unwrap();
    let grid: Vec<f64> = (0..=30).map(|k| k as f64 * 0.2).collect();
    let cfg = TrajectoryConfig { trajectories: 6, seed: 41, ..TrajectoryConfig::default() };
    let a = model.simulate(&schedule, &grid, &cfg).unwrap();
    let b = model.simulate(&schedule, &grid, &cfg).unwrap();
    assert_eq!(a, b);
    let other = model.simulate(&schedule, &grid, &TrajectoryConfig { seed: 42, ..cfg }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn master_evolution_keeps_states_valid() {
    let p = GateParams::default();
    let f = CavityFactory::full(2, 5, &p.cavity).unwrap();
    let model = GateModel::new(GateKind::Latch, &f, &p).unwrap();
    let levels = drives([("s_bar", C64::new(4.0, 0.0)), ("r_bar", C64::new(3.0, 0.0))]);
    let schedule = DriveSchedule::constant(&levels, 0.0, 1.0).unwrap();
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
    let ev = master_evolve(&model.initial, &model.system, &schedule, &grid, &model.observables, &EvolveOptions::default())
        .unwrap();
    assert!(ev.final_state.validity().is_valid(STATE_TOL));
    assert_eq!(ev.final_state.space(), &SpaceDescriptor::new(vec![5, 5]).unwrap());
    assert!(ev.series.stderr.iter().flatten().all(|&s| s == 0.0));
}
