//! Skip-gram training with a hierarchical softmax over a Huffman tree, for
//! three input layouts: plain word vectors, word vectors plus demographic
//! value vectors, and generic plus per-value word matrices.

mod model;
mod softmax;
mod table;
mod train;

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::Float;
use rand::Rng;

pub use model::{
    DemographicMatricesModel, DemographicVectorsModel, EmbeddingModel, GenericModel, ModelKind,
    SkipGram, TableId,
};
pub use softmax::{hs_loss_and_grad, hs_probability, hs_update, HsGradient};
pub use table::Table;
pub use train::{
    average_loss, generate_pairs, model_loss_and_grad, sgd_step, train, Progress, ProgressFn, RowGradients, TrainingReport,
    TrainingSequence,
};

use crate::demographics::Demographics;

/// Floating point type of parameter tables.
pub trait Real:
    Float + AddAssign + SubAssign + MulAssign + Send + Sync + Debug + Display + Default + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub dim: usize,
    pub initial_lr: f64,
    pub window: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
    /// Emit a progress record every this many training examples; 0 disables.
    pub report_every: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 100,
            initial_lr: 0.025,
            window: 5,
            epochs: 1,
            min_count: crate::vocab::DEFAULT_MIN_COUNT,
            seed: 1,
            workers: 1,
            report_every: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidArgument(m.to_owned()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        Ok(())
    }
}

/// One (center, context) pair together with the speaker's demographics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingExample {
    pub center: u32,
    pub context: u32,
    pub speaker: Demographics,
}

/// Uniform initialization range for word tables: ±0.5/dim.
pub(crate) fn init_word_table<T: Real, R: Rng>(rng: &mut R, rows: usize, dim: usize) -> Table<T> {
    let half = 0.5 / dim as f64;
    let data = (0..rows * dim)
        .map(|_| T::from(rng.gen_range(-half..half)).unwrap())
        .collect();
    Table::from_vec(rows, dim, data)
}
