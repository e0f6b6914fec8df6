use intent_ran::apps::AppSet;
use intent_ran::runtime::AppChange;
use intent_ran_service::live::{app_intervals, slice, TickRows};
use intent_ran_service::store::{read_kpis, KpiRow, KPI_HEADER};
use proptest::prelude::*;

fn trace(n: u64) -> Vec<TickRows> {
    (0..n).map(|tick| TickRows { tick, apps: "App1".into(), violations: 0, rows: vec![] }).collect()
}

proptest! {
    #[test]
    fn windows_are_clipped_to_the_trace(len in 0u64..300, from in 0u64..400, extra in 0u64..400) {
        let to = from + extra;
        let s = slice(&trace(len), &[AppChange { tick: 0, apps: AppSet::EMPTY }], from, to);
        let want = to.min(len).saturating_sub(from.min(len));
        prop_assert_eq!(s.rows.len() as u64, want);
        prop_assert_eq!(s.clipped, to > len);
        for (i, r) in s.rows.iter().enumerate() {
            prop_assert_eq!(r.tick, from + i as u64);
        }
    }

    #[test]
    fn intervals_tile_the_timeline(changes in prop::collection::vec((1u64..5, 0u8..32), 1..20)) {
        let mut t = 0;
        let timeline: Vec<AppChange> = changes
            .iter()
            .map(|(dt, m)| {
                let c = AppChange { tick: t, apps: AppSet::from_mask(*m).unwrap() };
                t += dt;
                c
            })
            .collect();
        for iv in app_intervals(&timeline) {
            prop_assert!(iv.to_tick.is_none_or(|e| e > iv.from_tick));
            // the app is on throughout the interval
            for c in timeline.iter().filter(|c| c.tick >= iv.from_tick && iv.to_tick.is_none_or(|e| c.tick < e)) {
                prop_assert!(c.apps.contains(iv.app));
            }
        }
    }
}

#[test]
fn kpi_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kpis.csv");
    let rows = vec![
        KpiRow { slot: 100, throughput_bps: 1.5e6, mean_delay_s: 0.012, ee_bits_per_joule: 2.0e5, energy_j: 7.25, class: "all".into() },
        KpiRow { slot: 100, throughput_bps: 0.1 + 0.2, mean_delay_s: 1e-9, ee_bits_per_joule: 3.0, energy_j: 7.25, class: "video".into() },
    ];
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).unwrap();
    w.write_record(KPI_HEADER).unwrap();
    for r in &rows {
        w.serialize(r).unwrap();
    }
    w.flush().unwrap();
    assert_eq!(read_kpis(&path).unwrap(), rows);
}
