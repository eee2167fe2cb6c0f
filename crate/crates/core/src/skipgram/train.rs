use std::cell::UnsafeCell;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::softmax::{hs_loss_and_grad, hs_update};
use super::{Real, SkipGram, TableId, TrainingConfig, TrainingExample};
use crate::demographics::Demographics;
use crate::error::{Error, Result};
use crate::vocab::HuffmanTree;

/// Learning rate never decays below this fraction of the initial rate.
const MIN_LR_FRACTION: f64 = 1e-4;

/// An encoded post (out-of-vocabulary tokens already dropped) and its author's
/// demographics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingSequence {
    pub tokens: Vec<u32>,
    pub speaker: Demographics,
}

/// Machine-readable progress record.
#[derive(Clone, Debug, Serialize)]
pub struct Progress {
    pub epoch: usize,
    pub examples: u64,
    pub tokens: u64,
    pub tokens_per_sec: f64,
    pub avg_loss: f64,
    pub lr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainingReport {
    /// Mean per-example loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub examples: u64,
    pub tokens: u64,
    pub seconds: f64,
    pub tokens_per_sec: f64,
}

/// Skip-gram pairs with a dynamic window: for every position a radius is
/// drawn uniformly from `1..=window`, and the position is paired with each
/// neighbour within that radius (left neighbour first at each distance).
pub fn generate_pairs<R: Rng>(sequence: &[u32], window: usize, rng: &mut R) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for_each_pair(sequence, window, rng, |c, o| pairs.push((c, o)));
    pairs
}

#[inline]
fn for_each_pair<R: Rng>(
    sequence: &[u32],
    window: usize,
    rng: &mut R,
    mut emit: impl FnMut(u32, u32),
) {
    let n = sequence.len();
    for t in 0..n {
        let radius = rng.gen_range(1..=window);
        for j in 1..=radius {
            if j <= t {
                emit(sequence[t], sequence[t - j]);
            }
            if t + j < n {
                emit(sequence[t], sequence[t + j]);
            }
        }
    }
}

struct Scratch<T> {
    input: Vec<T>,
    delta: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn new(dim: usize) -> Self {
        Scratch {
            input: vec![T::zero(); dim],
            delta: vec![T::zero(); dim],
        }
    }
}

#[inline]
fn step<T: Real, M: SkipGram<T> + ?Sized>(
    model: &mut M,
    tree: &HuffmanTree,
    center: usize,
    context: usize,
    speaker: &Demographics,
    lr: T,
    scratch: &mut Scratch<T>,
) -> Result<T> {
    model.input_vector(center, speaker, &mut scratch.input);
    scratch.delta.fill(T::zero());
    let loss = hs_update(
        &scratch.input,
        context,
        tree,
        model.nodes_mut(),
        lr,
        &mut scratch.delta,
    )?;
    model.apply_input_delta(center, speaker, &scratch.delta);
    Ok(loss)
}

fn check_example<T: Real, M: SkipGram<T> + ?Sized>(model: &M, ex: &TrainingExample) -> Result<()> {
    let v = model.vocab_len();
    if ex.center as usize >= v || ex.context as usize >= v {
        return Err(Error::InvalidArgument(format!(
            "example ({}, {}) outside vocabulary of {v}",
            ex.center, ex.context
        )));
    }
    Ok(())
}

/// One SGD step on one example. Every row summed into the input receives the
/// same update, as do the node rows on the context word's path. Returns the
/// loss before the step.
pub fn sgd_step<T: Real, M: SkipGram<T> + ?Sized>(
    model: &mut M,
    tree: &HuffmanTree,
    example: &TrainingExample,
    lr: T,
) -> Result<T> {
    check_example(model, example)?;
    if lr.is_nan() || lr <= T::zero() {
        return Err(Error::InvalidArgument("learning rate must be positive".into()));
    }
    let mut scratch = Scratch::new(model.dim());
    step(
        model,
        tree,
        example.center as usize,
        example.context as usize,
        &example.speaker,
        lr,
        &mut scratch,
    )
}

/// Gradient rows keyed by (table, row).
pub type RowGradients<T> = Vec<((TableId, usize), Vec<T>)>;

/// Loss of one example and its gradient with respect to every parameter row
/// it touches.
pub fn model_loss_and_grad<T: Real, M: SkipGram<T> + ?Sized>(
    model: &M,
    tree: &HuffmanTree,
    example: &TrainingExample,
) -> Result<(T, RowGradients<T>)> {
    check_example(model, example)?;
    let mut input = vec![T::zero(); model.dim()];
    model.input_vector(example.center as usize, &example.speaker, &mut input);
    let g = hs_loss_and_grad(&input, example.context as usize, tree, model.nodes())?;
    let mut grads: RowGradients<T> = model
        .input_rows(example.center as usize, &example.speaker)
        .into_iter()
        .map(|key| (key, g.input.clone()))
        .collect();
    grads.extend(
        g.nodes
            .into_iter()
            .map(|(node, grad)| ((TableId::Nodes, node as usize), grad)),
    );
    Ok((g.loss, grads))
}

/// Mean loss over `examples` without updating the model.
pub fn average_loss<T: Real, M: SkipGram<T> + ?Sized>(
    model: &M,
    tree: &HuffmanTree,
    examples: &[TrainingExample],
) -> Result<T> {
    let mut input = vec![T::zero(); model.dim()];
    let mut total = T::zero();
    for ex in examples {
        check_example(model, ex)?;
        model.input_vector(ex.center as usize, &ex.speaker, &mut input);
        total += hs_loss_and_grad(&input, ex.context as usize, tree, model.nodes())?.loss;
    }
    Ok(total / T::from(examples.len().max(1)).unwrap())
}

/// Shares one model between worker threads without locking. Concurrent
/// updates to the same row may interleave; with sparse updates this only
/// perturbs SGD noise.
#[repr(transparent)]
struct Hogwild<M>(UnsafeCell<M>);

unsafe impl<M: Send> Sync for Hogwild<M> {}

impl<M> Hogwild<M> {
    fn from_mut(model: &mut M) -> &Self {
        // SAFETY: repr(transparent) over UnsafeCell<M>, which has M's layout.
        unsafe { &*(model as *mut M as *const Hogwild<M>) }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn get(&self) -> &mut M {
        &mut *self.0.get()
    }
}

pub type ProgressFn<'a> = &'a mut (dyn FnMut(&Progress) + Send);

struct Shared<'a> {
    processed: AtomicU64,
    examples: AtomicU64,
    total_tokens: u64,
    started: Instant,
    progress: Mutex<Option<ProgressFn<'a>>>,
}

impl Shared<'_> {
    fn lr(&self, initial: f64) -> f64 {
        let done = self.processed.load(Ordering::Relaxed) as f64 / self.total_tokens as f64;
        initial * (1.0 - done).max(MIN_LR_FRACTION)
    }
}

/// Per-epoch (loss sum, example count) of one worker.
type EpochTotals = Vec<(f64, u64)>;

fn run_worker<T: Real, M: SkipGram<T>>(
    model: &Hogwild<M>,
    tree: &HuffmanTree,
    shard: &[TrainingSequence],
    config: &TrainingConfig,
    worker: usize,
    shared: &Shared<'_>,
) -> Result<EpochTotals> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(worker as u64 + 1);
    // SAFETY: see `Hogwild`; the model outlives the scoped threads.
    let model = unsafe { model.get() };
    let mut scratch = Scratch::new(model.dim());
    let mut totals = Vec::with_capacity(config.epochs);
    let report_every = config.report_every;

    for epoch in 0..config.epochs {
        let (mut loss_sum, mut count) = (0.0f64, 0u64);
        for seq in shard {
            let n = seq.tokens.len();
            let mut seq_count = 0u64;
            for (t, &center) in seq.tokens.iter().enumerate() {
                let lr = T::from(shared.lr(config.initial_lr)).unwrap();
                let radius = rng.gen_range(1..=config.window);
                for j in 1..=radius {
                    let left = (j <= t).then(|| seq.tokens[t - j]);
                    let right = (t + j < n).then(|| seq.tokens[t + j]);
                    for context in left.into_iter().chain(right) {
                        let l = step(
                            model,
                            tree,
                            center as usize,
                            context as usize,
                            &seq.speaker,
                            lr,
                            &mut scratch,
                        )?;
                        loss_sum += l.to_f64().unwrap();
                        seq_count += 1;
                    }
                }
                shared.processed.fetch_add(1, Ordering::Relaxed);
            }
            count += seq_count;
            let before = shared.examples.fetch_add(seq_count, Ordering::Relaxed);
            if report_every > 0 && before / report_every != (before + seq_count) / report_every {
                if let Some(cb) = shared.progress.lock().unwrap().as_mut() {
                    let tokens = shared.processed.load(Ordering::Relaxed);
                    let secs = shared.started.elapsed().as_secs_f64().max(1e-9);
                    cb(&Progress {
                        epoch: epoch + 1,
                        examples: before + seq_count,
                        tokens,
                        tokens_per_sec: tokens as f64 / secs,
                        avg_loss: loss_sum / count.max(1) as f64,
                        lr: shared.lr(config.initial_lr),
                    });
                }
            }
        }
        totals.push((loss_sum, count));
    }
    Ok(totals)
}

/// Trains `model` in place.
///
/// Each epoch visits every sequence once. The learning rate decays linearly
/// from `initial_lr` to `initial_lr * 1e-4` over `epochs × tokens` center
/// positions. With one worker, results are a pure function of the model's
/// initial state, the corpus and `config.seed`.
pub fn train<T: Real, M: SkipGram<T> + Send>(
    model: &mut M,
    tree: &HuffmanTree,
    corpus: &[TrainingSequence],
    config: &TrainingConfig,
    progress: Option<ProgressFn<'_>>,
) -> Result<TrainingReport> {
    config.validate()?;
    if tree.len() != model.vocab_len() {
        return Err(Error::VocabularyMismatch(format!(
            "tree has {} words, model has {}",
            tree.len(),
            model.vocab_len()
        )));
    }
    let tokens_per_epoch: u64 = corpus.iter().map(|s| s.tokens.len() as u64).sum();
    if tokens_per_epoch == 0 || config.epochs == 0 {
        return Err(Error::EmptyCorpus);
    }
    for seq in corpus {
        if let Some(&bad) = seq.tokens.iter().find(|&&t| t as usize >= model.vocab_len()) {
            return Err(Error::InvalidArgument(format!(
                "token index {bad} outside vocabulary of {}",
                model.vocab_len()
            )));
        }
    }

    let shared = Shared {
        processed: AtomicU64::new(0),
        examples: AtomicU64::new(0),
        total_tokens: tokens_per_epoch * config.epochs as u64,
        started: Instant::now(),
        progress: Mutex::new(progress),
    };
    let workers = config.workers.min(corpus.len()).max(1);
    let shards = shard(corpus, workers);
    let cell = Hogwild::from_mut(model);

    let results: Vec<Result<EpochTotals>> = if workers == 1 {
        vec![run_worker(cell, tree, corpus, config, 0, &shared)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(w, s)| {
                    let shared = &shared;
                    scope.spawn(move || run_worker(cell, tree, s, config, w, shared))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        })
    };

    let mut sums = vec![(0.0f64, 0u64); config.epochs];
    for r in results {
        for (acc, (l, n)) in sums.iter_mut().zip(r?) {
            acc.0 += l;
            acc.1 += n;
        }
    }
    let seconds = shared.started.elapsed().as_secs_f64();
    let tokens = shared.processed.load(Ordering::Relaxed);
    Ok(TrainingReport {
        epoch_losses: sums.iter().map(|&(l, n)| l / n.max(1) as f64).collect(),
        examples: sums.iter().map(|s| s.1).sum(),
        tokens,
        seconds,
        tokens_per_sec: tokens as f64 / seconds.max(1e-9),
    })
}

/// Splits the corpus into `workers` contiguous shards of roughly equal token
/// counts.
fn shard(corpus: &[TrainingSequence], workers: usize) -> Vec<&[TrainingSequence]> {
    let total: usize = corpus.iter().map(|s| s.tokens.len()).sum();
    let target = total.div_ceil(workers);
    let mut shards = Vec::with_capacity(workers);
    let mut start = 0;
    let mut acc = 0;
    for (i, seq) in corpus.iter().enumerate() {
        acc += seq.tokens.len();
        if acc >= target && shards.len() + 1 < workers {
            shards.push(&corpus[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    shards.push(&corpus[start..]);
    shards
}
