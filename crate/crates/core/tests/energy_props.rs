mod common;

use std::collections::BTreeMap;

use lora_txsel::energy::{attempt_energy, reward_basis, symbol_time, time_on_air, EnergyModel, RadioConfig, RewardMode};
use lora_txsel::params::TxPower;
use proptest::prelude::*;

use common::rel;

fn radio() -> impl Strategy<Value = RadioConfig> {
    (6u32..=12, prop::sample::select(vec![125_000.0, 250_000.0, 500_000.0]), 6u32..=16, 1u32..=64)
        .prop_map(|(sf, bw_hz, n_preamble, n_payload)| RadioConfig { sf, bw_hz, n_preamble, n_payload })
}

/// Strictly increasing draws for five levels.
fn draws() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..40.0, 5).prop_map(|steps| {
        let mut acc = 0.0;
        steps.into_iter().map(|s| { acc += s; acc }).collect()
    })
}

fn model_with(draws: &[f64]) -> (EnergyModel, Vec<TxPower>) {
    let levels = [-3, 1, 5, 9, 13];
    let table: BTreeMap<i32, f64> = levels.iter().copied().zip(draws.iter().copied()).collect();
    let powers = levels.iter().zip(draws).map(|(&l, &d)| TxPower::new(l, d)).collect();
    (EnergyModel { p_toa_by_level: table, ..Default::default() }, powers)
}

proptest! {
    #[test]
    fn airtime_is_sum_of_symbols(cfg in radio()) {
        let air = time_on_air(&cfg);
        let expected = symbol_time(&cfg) * (4.25 + cfg.n_preamble as f64 + cfg.n_payload as f64);
        prop_assert!(rel(air.t_toa, expected) < 1e-12);
        prop_assert!(rel(air.t_preamble + air.t_payload, air.t_toa) < 1e-12);
    }

    #[test]
    fn transmit_energy_grows_with_power(cfg in radio(), d in draws()) {
        let (model, powers) = model_with(&d);
        model.validate(&powers).unwrap();
        let e: Vec<f64> = powers.iter().map(|&p| attempt_energy(&cfg, &model, p).unwrap().e_toa).collect();
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reward_strictly_falls_with_power(cfg in radio(), d in draws()) {
        let (model, powers) = model_with(&d);
        let energies: Vec<_> = powers.iter().map(|&p| attempt_energy(&cfg, &model, p).unwrap()).collect();
        let e_min = energies[0].e_toa;
        for mode in [RewardMode::Normalized, RewardMode::Raw] {
            let r: Vec<f64> = energies.iter().map(|e| reward_basis(e, e_min, mode)).collect();
            prop_assert!(r.windows(2).all(|w| w[0] > w[1]), "{:?} {:?}", mode, r);
        }
        prop_assert_eq!(reward_basis(&energies[0], e_min, RewardMode::Normalized), 1.0);
    }

    #[test]
    fn energies_and_times_positive(cfg in radio(), d in draws()) {
        let (model, powers) = model_with(&d);
        for p in powers {
            let e = attempt_energy(&cfg, &model, p).unwrap();
            for v in [e.t_symbol, e.t_preamble, e.t_payload, e.t_toa, e.e_toa, e.e_active] {
                prop_assert!(v > 0.0 && v.is_finite());
            }
            prop_assert!(e.e_active > e.e_toa);
        }
    }
}

#[test]
fn default_attempt_energy() {
    let model = EnergyModel::default();
    let e = attempt_energy(&RadioConfig::default(), &model, TxPower::new(-3, 20.0)).unwrap();
    assert!(rel(e.e_toa, (29.7 + 20.0) * 49.408e-3) < 1e-12);
    assert!(rel(e.e_active, 56.1 + 85.8 + 66.0 + (29.7 + 20.0) * 49.408e-3) < 1e-12);
}

#[test]
fn rejects_bad_draw_tables() {
    let (model, powers) = model_with(&[20.0, 25.0, 25.0, 55.0, 90.0]);
    assert!(model.validate(&powers).is_err());
    let (mut model, powers) = model_with(&[20.0, 25.0, 35.0, 55.0, 90.0]);
    model.p_toa_by_level.remove(&9);
    assert!(model.validate(&powers).is_err());
}
