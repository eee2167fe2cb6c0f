//! End-to-end helpers: posts to profiles, posts to training sequences, and
//! training a persisted model.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{posts_by_user, tokenize, Post};
use crate::demographics::{build_profile, Attribute, Demographics, Gazetteer, ProfileOutcome, UserProfile};
use crate::error::Result;
use crate::skipgram::{
    train, EmbeddingModel, ModelKind, ProgressFn, TrainingConfig, TrainingReport, TrainingSequence,
};
use crate::store::TrainedModel;
use crate::vocab::{count_words, HuffmanTree, Vocabulary};

const SECONDS_PER_YEAR: f64 = 365.25 * 24.0 * 3600.0;

/// Time covered by the corpus, in years, from its earliest to latest post.
pub fn corpus_span_years(posts: &[Post]) -> f64 {
    let min = posts.iter().map(|p| p.created_at).min();
    let max = posts.iter().map(|p| p.created_at).max();
    match (min, max) {
        (Some(a), Some(b)) => (b - a) as f64 / SECONDS_PER_YEAR,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExtractionSummary {
    pub profiles: Vec<UserProfile>,
    /// Removed user count per reason name.
    pub removed: BTreeMap<&'static str, usize>,
}

/// Builds a profile for every user, in user-id order.
pub fn extract_profiles(posts: &[Post], gazetteer: &Gazetteer) -> ExtractionSummary {
    let span = corpus_span_years(posts);
    let mut summary = ExtractionSummary::default();
    for (user, user_posts) in posts_by_user(posts) {
        match build_profile(user, &user_posts, span, gazetteer) {
            ProfileOutcome::Profile(p) => summary.profiles.push(p),
            ProfileOutcome::Removed(reason) => *summary.removed.entry(reason.name()).or_default() += 1,
        }
    }
    summary
}

/// A vocabulary, its Huffman tree, and the posts encoded as sequences.
#[derive(Clone, Debug)]
pub struct PreparedCorpus {
    pub vocab: Vocabulary,
    pub tree: HuffmanTree,
    pub sequences: Vec<TrainingSequence>,
}

impl PreparedCorpus {
    pub fn token_count(&self) -> u64 {
        self.sequences.iter().map(|s| s.tokens.len() as u64).sum()
    }
}

/// One sequence per post. Speakers without a profile get all-Unknown
/// demographics; posts with no in-vocabulary token are dropped.
pub fn prepare_corpus<'a, I>(posts: I, speakers: &HashMap<String, Demographics>, min_count: u64) -> Result<PreparedCorpus>
where
    I: IntoIterator<Item = &'a Post>,
{
    let tokenized: Vec<(&Post, _)> = posts.into_iter().map(|p| (p, tokenize(&p.body))).collect();
    let counts = count_words(tokenized.iter().map(|(_, t)| t));
    let vocab = Vocabulary::build(&counts, min_count)?;
    let tree = HuffmanTree::build(&vocab)?;
    let sequences = tokenized
        .iter()
        .filter_map(|(post, tokens)| {
            let tokens = vocab.encode(tokens);
            (!tokens.is_empty()).then(|| TrainingSequence {
                tokens,
                speaker: speakers.get(&post.user_id).copied().unwrap_or_default(),
            })
        })
        .collect();
    Ok(PreparedCorpus { vocab, tree, sequences })
}

/// Initializes a model from `config.seed` and trains it on `corpus`.
pub fn train_model(
    corpus: &PreparedCorpus,
    kind: ModelKind,
    attribute: Option<Attribute>,
    config: &TrainingConfig,
    progress: Option<ProgressFn<'_>>,
) -> Result<(TrainedModel, TrainingReport)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = EmbeddingModel::<f32>::new(kind, attribute, corpus.vocab.len(), config.dim, &mut rng)?;
    let report = train(&mut model, &corpus.tree, &corpus.sequences, config, progress)?;
    if !model.is_finite() {
        return Err(crate::Error::NonFinite {
            context: "training".into(),
            detail: "parameters contain NaN or infinity after training".into(),
        });
    }
    Ok((
        TrainedModel {
            vocab: corpus.vocab.clone(),
            model,
            seed: config.seed,
        },
        report,
    ))
}
