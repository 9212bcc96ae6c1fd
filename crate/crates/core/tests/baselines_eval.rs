mod support;

use csrc::baselines::{predict_random, train_single, train_unigram};
use csrc::eval::{class_metrics, evaluate_predictions, ConfusionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::cue_corpus;

fn relations(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("rel{i:02}")).collect()
}

fn accuracy(pred: &[usize], gold: &[usize]) -> f64 {
    pred.iter().zip(gold).filter(|(p, g)| p == g).count() as f64 / gold.len() as f64
}

#[test]
fn single_conditionals_are_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for round in 0..50 {
        let k = rng.gen_range(2..12);
        let vocab = relations(k);
        let corpus = cue_corpus(rng.gen_range(5..200), &vocab, round);
        let model = train_single(&corpus, &vocab).unwrap();
        let mut contexts: Vec<String> = model.context_counts.keys().cloned().collect();
        contexts.push("c:never_seen".into());
        for ctx in &contexts {
            let total: f64 = (0..k).map(|r| model.conditional(ctx, r)).sum();
            assert!((total - 1.0).abs() <= 1e-12, "{ctx}: {total}");
        }
    }
}

#[test]
fn single_beats_unigram_beats_random() {
    let vocab = relations(10);
    for seed in 0..3 {
        let train = cue_corpus(3000, &vocab, 100 + seed);
        let test = cue_corpus(1000, &vocab, 200 + seed);
        let gold: Vec<usize> = test
            .iter()
            .map(|e| vocab.iter().position(|v| *v == e.target).unwrap())
            .collect();
        let single = train_single(&train, &vocab).unwrap();
        let single_pred: Vec<usize> = test.iter().map(|e| single.predict(e).unwrap()).collect();
        let unigram = train_unigram(&train, &vocab).unwrap();
        let unigram_pred = vec![unigram.predict(); test.len()];
        let random_pred = predict_random(vocab.len(), seed, test.len()).unwrap();
        let (s, u, r) = (
            accuracy(&single_pred, &gold),
            accuracy(&unigram_pred, &gold),
            accuracy(&random_pred, &gold),
        );
        assert!(s >= u + 0.05 && u >= r + 0.05, "seed {seed}: {s} {u} {r}");
    }
}

#[test]
fn modal_predictor_reproduces_low_macro_precision() {
    let labels = relations(41);
    let n = 10_000;
    let modal = (n as f64 * 0.1606).round() as usize;
    let gold: Vec<usize> = (0..n).map(|i| if i < modal { 7 } else { (i % 40 + 8) % 41 }).collect();
    assert_eq!(gold.iter().filter(|&&g| g == 7).count(), modal);
    let pred = vec![7; n];
    let (report, _) = evaluate_predictions(&labels, &gold, &pred).unwrap();
    assert!((report.accuracy - 0.1606).abs() < 1e-12);
    assert!((report.macro_precision - 0.1606 / 41.0).abs() < 1e-12);
    assert!((report.macro_precision - 0.0043).abs() <= 0.001);
}

#[test]
fn hand_matrix_matches_manual_counts() {
    let labels = relations(3);
    let rows = [[2u64, 1, 0], [0, 3, 0], [1, 0, 3]];
    let (mut gold, mut pred) = (Vec::new(), Vec::new());
    for (g, row) in rows.iter().enumerate() {
        for (p, &c) in row.iter().enumerate() {
            for _ in 0..c {
                gold.push(g);
                pred.push(p);
            }
        }
    }
    let (report, _) = evaluate_predictions(&labels, &gold, &pred).unwrap();
    let precision = [2.0 / 3.0, 3.0 / 4.0, 1.0];
    let recall = [2.0 / 3.0, 1.0, 3.0 / 4.0];
    let f1: Vec<f64> = (0..3).map(|i| 2.0 * precision[i] * recall[i] / (precision[i] + recall[i])).collect();
    assert_eq!(report.accuracy, 0.8);
    assert!((report.macro_precision - precision.iter().sum::<f64>() / 3.0).abs() < 1e-15);
    assert!((report.macro_recall - recall.iter().sum::<f64>() / 3.0).abs() < 1e-15);
    assert!((report.macro_f1 - f1.iter().sum::<f64>() / 3.0).abs() < 1e-15);
}

#[test]
fn micro_recall_equals_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let k = rng.gen_range(2..8);
        let n = rng.gen_range(1..300);
        let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let cm = ConfusionMatrix::from_predictions(relations(k), &gold, &pred).unwrap();
        let tp: u64 = (0..k).map(|c| cm.counts[c][c]).sum();
        let rows: u64 = (0..k).map(|c| cm.row_sum(c)).sum();
        assert_eq!(tp as f64 / rows as f64, cm.accuracy());
        assert_eq!(cm.accuracy(), accuracy(&pred, &gold));
        let recalls = class_metrics(&cm);
        let weighted: f64 = (0..k).map(|c| recalls[c].recall * cm.row_sum(c) as f64).sum::<f64>() / n as f64;
        assert!((weighted - cm.accuracy()).abs() < 1e-12);
    }
}
