use polarlut::pipeline::{
    export_schedule, schedule, throughput_report, unroll, PipelineMode, ScheduleExport,
};
use polarlut::{DecoderTree, PolarCode};

fn load(name: &str) -> PolarCode {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    PolarCode::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn deep_8_5_export_matches_golden() {
    let code = load("code_8_5.json");
    let s = schedule(&unroll(&DecoderTree::build(&code)), PipelineMode::Deep).unwrap();
    let got = export_schedule(&s, 4);
    let path = format!(
        "{}/tests/golden/schedule_8_5_deep.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let want: ScheduleExport =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(got, want);
    assert_eq!(got.totals.register_bits, 169);
}

#[test]
fn export_is_stable() {
    let code = load("code_128_64.json");
    let g = unroll(&DecoderTree::build(&code));
    let a = serde_json::to_string(&export_schedule(
        &schedule(&g, PipelineMode::Partial(10)).unwrap(),
        5,
    ))
    .unwrap();
    let b = serde_json::to_string(&export_schedule(
        &schedule(&g, PipelineMode::Partial(10)).unwrap(),
        5,
    ))
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn partial_128_64() {
    let code = load("code_128_64.json");
    let g = unroll(&DecoderTree::build(&code));
    let deep = schedule(&g, PipelineMode::Deep).unwrap();
    let part = schedule(&g, PipelineMode::Partial(10)).unwrap();
    assert_eq!(deep.latency_cc, 86);
    assert_eq!(part.latency_cc, 86);
    assert_eq!(part.initiation_interval, 10);
    assert!(part.register_bits(5) < deep.register_bits(5) / 4);
    let r = throughput_report(&part, 1.47e9, code.k(), 5).unwrap();
    assert!((r.info_throughput_bps - 9.408e9).abs() < 1.0);
    // Register chains of a partial schedule keep columns rc, rc + ii, ...
    for reg in part.kept_registers() {
        assert_eq!((reg.column - part.ready[reg.signal]) % 10, 0);
    }
}
