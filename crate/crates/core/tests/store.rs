mod common;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cdwe::demographics::{Attribute, Demographics};
use cdwe::pipeline::{prepare_corpus, train_model};
use cdwe::skipgram::{ModelKind, TrainingConfig};
use cdwe::store::{compose_for_user, EmbeddingSpace, Selection, TrainedModel};

use common::{topic_corpus, ARCHITECTURES};

fn trained(kind: ModelKind, attr: Option<Attribute>) -> TrainedModel {
    let posts = topic_corpus(5, 10, 3_000, 10, &mut ChaCha8Rng::seed_from_u64(1));
    let corpus = prepare_corpus(&posts, &HashMap::new(), 1).unwrap();
    let config = TrainingConfig {
        dim: 12,
        min_count: 1,
        ..Default::default()
    };
    train_model(&corpus, kind, attr, &config, None).unwrap().0
}

#[test]
fn binary_files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, attr) in ARCHITECTURES {
        let m = trained(kind, attr);
        let path = dir.path().join(format!("{}.cdwe", kind.name()));
        m.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(back, m);
        let again = dir.path().join("again.cdwe");
        back.save(&again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn truncated_file_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let m = trained(ModelKind::Generic, None);
    let path = dir.path().join("m.cdwe");
    m.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    for cut in [10, 60, bytes.len() / 2, bytes.len() - 1] {
        std::fs::write(&path, &bytes[..cut]).unwrap();
        let err = TrainedModel::load(&path).unwrap_err();
        assert!(matches!(err, cdwe::Error::Format { .. }), "cut {cut}: {err}");
    }
}

#[test]
fn text_space_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = trained(ModelKind::DemographicMatrices, Some(Attribute::Gender));
    let space = m.value_space(cdwe::demographics::Gender::Female.value()).unwrap();
    let path = dir.path().join("space.txt");
    space.save_text(&path).unwrap();
    assert_eq!(EmbeddingSpace::load_text(&path).unwrap(), space);
}

#[test]
fn composed_space_neighbors_are_deterministic() {
    let g = trained(ModelKind::Generic, None);
    let mats: Vec<TrainedModel> = Attribute::ALL.iter().map(|&a| trained(ModelKind::DemographicMatrices, Some(a))).collect();
    let refs: Vec<&TrainedModel> = mats.iter().collect();
    let c = compose_for_user(Some(&g), &refs, &Demographics::unknown(), &Selection::all()).unwrap();
    assert_eq!(c.dim(), 5 * 12);
    let a = c.space.nearest_neighbors("t0w0", 5).unwrap();
    let b = c.space.nearest_neighbors("t0w0", 5).unwrap();
    assert_eq!(a, b);
    // Topic structure survives composition.
    assert!(a.iter().filter(|(w, _)| w.starts_with("t0")).count() >= 4, "{a:?}");
}
