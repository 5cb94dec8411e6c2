use hrs_core::dataset::ScenarioConfig;
use hrs_core::mlp::TrainHyper;
use hrs_sim::format::*;
use hrs_sim::pipeline::{generate_dataset, train_checkpoint};
use hrs_sim::SimError;
use proptest::prelude::*;
use std::path::Path;
use std::sync::OnceLock;

fn fixture() -> &'static (Vec<u8>, Vec<u8>) {
    static CELL: OnceLock<(Vec<u8>, Vec<u8>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = ScenarioConfig { samples: 80, calibration_draws: 50, min_class: 2, num_shuffles: 2, ..ScenarioConfig::new(3, 4) };
        let data = generate_dataset(&cfg).unwrap();
        let ck = train_checkpoint(&data, &TrainHyper { epochs: 1, ..Default::default() }).unwrap();
        (encode_dataset(&data).unwrap(), encode_checkpoint(&ck).unwrap())
    })
}

#[test]
fn dataset_and_checkpoint_reencode_identically() {
    let (d, m) = fixture();
    let data = decode_dataset(d, Path::new("d")).unwrap();
    assert_eq!(&encode_dataset(&data).unwrap(), d);
    let ck = decode_checkpoint(m, Path::new("m")).unwrap();
    assert_eq!(&encode_checkpoint(&ck).unwrap(), m);
}

#[test]
fn files_on_disk_round_trip() {
    let (d, _) = fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/d.hrsdat");
    let data = decode_dataset(d, Path::new("d")).unwrap();
    save_dataset(&data, &path).unwrap();
    assert_eq!(&std::fs::read(&path).unwrap(), d);
    assert_eq!(load_dataset(&path).unwrap(), data);
}

fn is_format<T>(r: &Result<T, SimError>) -> bool {
    matches!(r, Err(SimError::Format { .. }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn any_single_byte_flip_is_rejected(pos in 0usize..1_000_000, bit in 0u8..8) {
        let (d, m) = fixture();
        for bytes in [d, m] {
            let mut bad = bytes.clone();
            let i = pos % bad.len();
            bad[i] ^= 1 << bit;
            let r1 = decode_dataset(&bad, Path::new("x")).map(|_| ());
            let r2 = decode_checkpoint(&bad, Path::new("x")).map(|_| ());
            prop_assert!(is_format(&r1));
            prop_assert!(is_format(&r2));
        }
    }

    #[test]
    fn truncation_is_rejected(cut in 1usize..10_000) {
        let (d, _) = fixture();
        let keep = d.len().saturating_sub(cut);
        let r = decode_dataset(&d[..keep], Path::new("x"));
        prop_assert!(is_format(&r));
    }
}

