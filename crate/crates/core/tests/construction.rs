use polarlut::PolarCode;

fn golden() -> PolarCode {
    let path = format!(
        "{}/tests/golden/code_128_64.json",
        env!("CARGO_MANIFEST_DIR")
    );
    PolarCode::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn construct_128_64_matches_golden() {
    assert_eq!(PolarCode::construct(128, 64, 3.0, 256).unwrap(), golden());
}

#[test]
#[ignore = "slow: finer density evolution"]
fn construct_128_64_is_stable_in_fidelity() {
    assert_eq!(PolarCode::construct(128, 64, 3.0, 512).unwrap(), golden());
}
