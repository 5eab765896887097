// Scratch calibration probe; not part of the shipped test suite.
use hearo::dataset::{parse_cleveland, split, Dataset};
use hearo::linalg::Matrix;
use hearo::trainer::{train, TrainConfig};
use hearo::tuner::hearo5_preset;
use hearo::validation::evaluate;

fn raw_grid() -> (Matrix, Matrix) {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/processed.cleveland.data"
    ))
    .unwrap();
    let records = parse_cleveland(&text).unwrap();
    let n = records.len();
    let mut x = Matrix::zeros(13, n);
    let mut y = Matrix::zeros(1, n);
    for (j, r) in records.iter().enumerate() {
        for i in 0..13 {
            let v = if r.values[i] == "?" { -1.0 } else { r.values[i].parse().unwrap() };
            x.set(i, j, v);
        }
        let outcome: f64 = r.values[13].parse().unwrap();
        y.set(0, j, if outcome >= 1.0 { 1.0 } else { 0.0 });
    }
    (x, y)
}

fn sweep(d: &Dataset, label: &str, lr: f64) {
    let mut best = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..10u64 {
        let spec = split(d, 2.0 / 3.0, seed).unwrap();
        let d_train = d.subset(&spec.train_indices).unwrap();
        let d_test = d.subset(&spec.test_indices).unwrap();
        let hp = hearo5_preset().with_learning_rate(lr).unwrap();
        let cfg = TrainConfig::new(hp, seed);
        match train(&d_train, &cfg, None) {
            Ok((model, _)) => {
                let tr = evaluate(&model, &d_train).unwrap();
                let te = evaluate(&model, &d_test).unwrap();
                println!(
                    "  {label} lr={lr} seed {seed}: train={:.4} test={:.4} mcc={:.4}",
                    tr.accuracy, te.accuracy, te.mcc
                );
                if te.accuracy > best.1 {
                    best = (tr.accuracy, te.accuracy, te.mcc);
                }
            }
            Err(e) => println!("  {label} lr={lr} seed {seed}: {e}"),
        }
    }
    println!("  {label} lr={lr} BEST: train={:.4} test={:.4} mcc={:.4}", best.0, best.1, best.2);
}

#[test]
#[ignore]
fn probe_scaling_variants() {
    let (x, y) = raw_grid();
    let n = x.cols();
    let names: Vec<String> = (0..13).map(|i| format!("f{i}")).collect();

    // Per-feature rows scaled to unit length (current pipeline).
    let mut xf = x.clone();
    for i in 0..13 {
        let norm: f64 = (0..n).map(|j| xf.get(i, j).powi(2)).sum::<f64>().sqrt();
        for j in 0..n {
            xf.set(i, j, xf.get(i, j) / norm);
        }
    }
    let df = Dataset::from_parts(xf, y.clone(), names.clone()).unwrap();
    sweep(&df, "per-feature", 0.01);
    sweep(&df, "per-feature", 0.1);
    sweep(&df, "per-feature", 1.0);

    // Per-example columns scaled to unit length.
    let mut xe = x.clone();
    for j in 0..n {
        let norm: f64 = (0..13).map(|i| xe.get(i, j).powi(2)).sum::<f64>().sqrt();
        for i in 0..13 {
            xe.set(i, j, xe.get(i, j) / norm);
        }
    }
    let de = Dataset::from_parts(xe, y.clone(), names.clone()).unwrap();
    sweep(&de, "per-example", 0.01);
    sweep(&de, "per-example", 0.1);
}
