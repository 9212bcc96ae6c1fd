mod support;

use csrc::neural::{
    init_model, load_model, save_model, softmax_rows, train, HiddenLayout, Mode, ModelConfig, TrainConfig,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{last_token_task, random_encoded_batch};

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("rel{i:02}")).collect()
}

#[test]
fn parameter_count_matches_closed_form() {
    let (model, _) = init_model(names(41), ModelConfig::new(303), 1).unwrap();
    let mut expect = 0;
    let mut fan_in = 303;
    for h in [450, 200, 100] {
        expect += 4 * h * (fan_in + h) + 4 * h;
        fan_in = h;
    }
    expect += fan_in * 41 + 41;
    assert_eq!(expect, 2_002_541);
    assert_eq!(model.classifier_param_count(), expect);
}

#[test]
fn softmax_rows_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let logits = Array2::from_shape_simple_fn((10_000, 41), || rng.gen_range(-50.0..50.0));
    let probs = softmax_rows(&logits);
    for row in probs.rows() {
        assert!((row.sum() - 1.0).abs() <= 1e-9);
        assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}

#[test]
fn zero_output_layer_gives_log_class_count_loss() {
    let cfg = ModelConfig {
        hidden: vec![8, 6, 4],
        ..ModelConfig::new(13)
    };
    let (mut model, _) = init_model(names(41), cfg, 2).unwrap();
    model.params.output.w.fill(0.0);
    model.params.output.b.fill(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let batch = random_encoded_batch(&mut rng, 30, 13, 41);
    for mode in [Mode::Infer, Mode::Train] {
        let (loss, _) = model.loss_and_gradients(&batch, mode, 4).unwrap();
        assert!((loss - 41f64.ln()).abs() <= 1e-9, "{loss}");
    }
}

#[test]
fn batched_and_single_inference_agree() {
    let cfg = ModelConfig {
        hidden: vec![16, 8, 4],
        ..ModelConfig::new(13)
    };
    let (model, _) = init_model(names(5), cfg, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let batch = random_encoded_batch(&mut rng, 40, 13, 5);
    let all = model.forward(&batch, Mode::Infer, 0).unwrap();
    for (i, ex) in batch.iter().enumerate() {
        let (_, one) = model.predict(ex).unwrap();
        for (a, b) in all.row(i).iter().zip(&one) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn save_load_is_bit_identical() {
    for layout in [HiddenLayout::StackedRecurrent, HiddenLayout::RecurrentThenDense] {
        let cfg = ModelConfig {
            hidden: vec![7, 5, 3],
            layout,
            trainable_entities: true,
            ..ModelConfig::new(13)
        };
        let (mut model, _) = init_model(names(4), cfg, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inputs = random_encoded_batch(&mut rng, 100, 13, 4);
        model.attach_entities(&inputs).unwrap();
        let mut bytes = Vec::new();
        save_model(&model, "hash=abc seed=21", &mut bytes).unwrap();
        let (back, provenance) = load_model(bytes.as_slice()).unwrap();
        assert_eq!(provenance, "hash=abc seed=21");
        assert_eq!(back, model);
        let before = model.forward(&inputs, Mode::Infer, 0).unwrap();
        let after = back.forward(&inputs, Mode::Infer, 0).unwrap();
        assert!(before.iter().zip(after.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn corrupt_or_future_files_are_rejected() {
    let (model, _) = init_model(names(3), ModelConfig { hidden: vec![2, 2, 2], ..ModelConfig::new(5) }, 0).unwrap();
    let mut bytes = Vec::new();
    save_model(&model, "", &mut bytes).unwrap();

    let mut future = bytes.clone();
    future[8..12].copy_from_slice(&99u32.to_le_bytes());
    let err = load_model(future.as_slice()).unwrap_err().to_string();
    assert!(err.contains("version 99"), "{err}");

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(load_model(bad_magic.as_slice()).is_err());

    assert!(load_model(&bytes[..bytes.len() - 3]).is_err());
}

#[test]
fn short_training_is_deterministic_and_reduces_loss() {
    let data = last_token_task(120, 3, 8, 6, 4);
    let cfg = ModelConfig {
        hidden: vec![24, 12, 8],
        ..ModelConfig::new(9)
    };
    let tc = TrainConfig {
        epochs: 6,
        seed: 17,
        ..TrainConfig::default()
    };
    let run = || {
        let (model, _) = init_model(names(3), cfg.clone(), 17).unwrap();
        train(model, &data[..100], &data[100..], &tc).unwrap()
    };
    let (m1, h1) = run();
    let (m2, h2) = run();
    assert_eq!(m1, m2);
    assert_eq!(h1, h2);
    assert!(h1.epochs.last().unwrap().train_loss < h1.epochs[0].train_loss);
}

#[test]
fn duplicated_example_counts_twice() {
    let cfg = ModelConfig {
        hidden: vec![6, 5, 4],
        ..ModelConfig::new(9)
    };
    let (model, _) = init_model(names(4), cfg, 30).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let batch = random_encoded_batch(&mut rng, 2, 9, 4);
    let single = |ex: &csrc::dataset::EncodedExample| model.loss_and_gradients(std::slice::from_ref(ex), Mode::Infer, 0).unwrap().1;
    let (ga, gb) = (single(&batch[0]), single(&batch[1]));
    let tripled = vec![batch[0].clone(), batch[0].clone(), batch[1].clone()];
    let (_, g) = model.loss_and_gradients(&tripled, Mode::Infer, 0).unwrap();
    for ((t, a), b) in g.tensors().iter().zip(ga.tensors()).zip(gb.tensors()) {
        for ((x, y), z) in t.iter().zip(a.iter()).zip(b.iter()) {
            let expect = 2.0 * y + z;
            assert!((3.0 * x - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }
}

#[test]
fn seeds_control_init_and_masks() {
    let cfg = ModelConfig {
        hidden: vec![6, 5, 4],
        ..ModelConfig::new(9)
    };
    let (a, _) = init_model(names(4), cfg.clone(), 1).unwrap();
    let (b, _) = init_model(names(4), cfg.clone(), 1).unwrap();
    let (c, _) = init_model(names(4), cfg, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.params, c.params);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch = random_encoded_batch(&mut rng, 8, 9, 4);
    let p1 = a.forward(&batch, Mode::Train, 10).unwrap();
    let p2 = a.forward(&batch, Mode::Train, 10).unwrap();
    let p3 = a.forward(&batch, Mode::Train, 11).unwrap();
    assert_eq!(p1, p2);
    assert_ne!(p1, p3);
    assert_eq!(a.forward(&batch, Mode::Infer, 1).unwrap(), a.forward(&batch, Mode::Infer, 2).unwrap());
}

#[test]
fn zero_epochs_rejected() {
    let data = last_token_task(10, 2, 4, 3, 0);
    let (model, _) = init_model(names(2), ModelConfig { hidden: vec![2, 2, 2], ..ModelConfig::new(6) }, 0).unwrap();
    let tc = TrainConfig { epochs: 0, ..TrainConfig::default() };
    assert!(train(model, &data, &data, &tc).is_err());
}
