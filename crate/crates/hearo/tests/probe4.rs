// Scratch calibration probe; not part of the shipped test suite.
use hearo::dataset::{parse_cleveland, preprocess, split};
use hearo::trainer::{train, TrainConfig};
use hearo::tuner::hearo5_preset;

#[test]
#[ignore]
fn probe_history() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/processed.cleveland.data"
    ))
    .unwrap();
    let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
    let spec = split(&d, 2.0 / 3.0, 1).unwrap();
    let d_train = d.subset(&spec.train_indices).unwrap();
    let d_test = d.subset(&spec.test_indices).unwrap();
    let cfg = TrainConfig::new(hearo5_preset(), 1)
        .with_record_every(500)
        .unwrap();
    let (_, history) = train(&d_train, &cfg, Some(&d_test)).unwrap();
    for e in history.entries() {
        println!(
            "epoch {:>5}  J {:.4}  train {:.4}  test {:.4}",
            e.epoch,
            e.cost,
            e.train_accuracy,
            e.test_accuracy.unwrap()
        );
    }
}
