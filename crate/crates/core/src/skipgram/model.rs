use rand::Rng;

use super::table::add_assign;
use super::{init_word_table, Real, Table};
use crate::demographics::{Attribute, Demographics, VALUE_COUNT};

/// Names one parameter table of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableId {
    /// Input word table of the generic and attribute-vector models.
    Words,
    /// Demographic value table (19 rows) of the attribute-vector model.
    Values,
    /// Generic word table of a matrices model.
    Generic,
    /// Per-value word table of a matrices model, by value ordinal.
    ValueWords(usize),
    /// Hierarchical-softmax internal nodes.
    Nodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Generic,
    DemographicVectors,
    DemographicMatrices,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Generic => "generic",
            ModelKind::DemographicVectors => "dvec",
            ModelKind::DemographicMatrices => "dmat",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "generic" => Some(ModelKind::Generic),
            "dvec" => Some(ModelKind::DemographicVectors),
            "dmat" => Some(ModelKind::DemographicMatrices),
            _ => None,
        }
    }
}

/// Input side of a skip-gram model: how the hidden vector is formed from a
/// center word and the speaker, and which rows receive its gradient.
pub trait SkipGram<T: Real> {
    fn dim(&self) -> usize;

    fn vocab_len(&self) -> usize;

    /// Writes the hidden-layer input for `center` spoken by `speaker`.
    fn input_vector(&self, center: usize, speaker: &Demographics, out: &mut [T]);

    /// Rows that are summed into the input vector.
    fn input_rows(&self, center: usize, speaker: &Demographics) -> Vec<(TableId, usize)>;

    /// Adds `delta` to every row listed by [`SkipGram::input_rows`].
    fn apply_input_delta(&mut self, center: usize, speaker: &Demographics, delta: &[T]);

    fn nodes(&self) -> &Table<T>;

    fn nodes_mut(&mut self) -> &mut Table<T>;

    fn table(&self, id: TableId) -> Option<&Table<T>>;

    fn table_mut(&mut self, id: TableId) -> Option<&mut Table<T>>;

    fn table_ids(&self) -> Vec<TableId>;
}

/// One word table plus node parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericModel<T = f32> {
    pub words: Table<T>,
    pub nodes: Table<T>,
}

impl<T: Real> GenericModel<T> {
    pub fn new<R: Rng>(vocab_len: usize, dim: usize, rng: &mut R) -> Self {
        GenericModel {
            words: init_word_table(rng, vocab_len, dim),
            nodes: Table::zeros(vocab_len.saturating_sub(1), dim),
        }
    }
}

impl<T: Real> SkipGram<T> for GenericModel<T> {
    fn dim(&self) -> usize {
        self.words.cols()
    }

    fn vocab_len(&self) -> usize {
        self.words.rows()
    }

    #[inline]
    fn input_vector(&self, center: usize, _: &Demographics, out: &mut [T]) {
        out.copy_from_slice(self.words.row(center));
    }

    fn input_rows(&self, center: usize, _: &Demographics) -> Vec<(TableId, usize)> {
        vec![(TableId::Words, center)]
    }

    #[inline]
    fn apply_input_delta(&mut self, center: usize, _: &Demographics, delta: &[T]) {
        add_assign(self.words.row_mut(center), delta);
    }

    fn nodes(&self) -> &Table<T> {
        &self.nodes
    }

    fn nodes_mut(&mut self) -> &mut Table<T> {
        &mut self.nodes
    }

    fn table(&self, id: TableId) -> Option<&Table<T>> {
        match id {
            TableId::Words => Some(&self.words),
            TableId::Nodes => Some(&self.nodes),
            _ => None,
        }
    }

    fn table_mut(&mut self, id: TableId) -> Option<&mut Table<T>> {
        match id {
            TableId::Words => Some(&mut self.words),
            TableId::Nodes => Some(&mut self.nodes),
            _ => None,
        }
    }

    fn table_ids(&self) -> Vec<TableId> {
        vec![TableId::Words, TableId::Nodes]
    }
}

/// Word table plus one learned vector per demographic value; the input is
/// the word row plus the speaker's four value rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DemographicVectorsModel<T = f32> {
    pub words: Table<T>,
    pub values: Table<T>,
    pub nodes: Table<T>,
}

impl<T: Real> DemographicVectorsModel<T> {
    /// Value vectors start at zero.
    pub fn new<R: Rng>(vocab_len: usize, dim: usize, rng: &mut R) -> Self {
        DemographicVectorsModel {
            words: init_word_table(rng, vocab_len, dim),
            values: Table::zeros(VALUE_COUNT, dim),
            nodes: Table::zeros(vocab_len.saturating_sub(1), dim),
        }
    }

    /// Sum of the speaker's four value vectors.
    pub fn speaker_vector(&self, speaker: &Demographics) -> Vec<T> {
        let mut out = vec![T::zero(); self.values.cols()];
        for row in speaker.value_rows() {
            add_assign(&mut out, self.values.row(row));
        }
        out
    }
}

impl<T: Real> SkipGram<T> for DemographicVectorsModel<T> {
    fn dim(&self) -> usize {
        self.words.cols()
    }

    fn vocab_len(&self) -> usize {
        self.words.rows()
    }

    #[inline]
    fn input_vector(&self, center: usize, speaker: &Demographics, out: &mut [T]) {
        out.copy_from_slice(self.words.row(center));
        for row in speaker.value_rows() {
            add_assign(out, self.values.row(row));
        }
    }

    fn input_rows(&self, center: usize, speaker: &Demographics) -> Vec<(TableId, usize)> {
        let mut rows = vec![(TableId::Words, center)];
        rows.extend(speaker.value_rows().map(|r| (TableId::Values, r)));
        rows
    }

    #[inline]
    fn apply_input_delta(&mut self, center: usize, speaker: &Demographics, delta: &[T]) {
        add_assign(self.words.row_mut(center), delta);
        for row in speaker.value_rows() {
            add_assign(self.values.row_mut(row), delta);
        }
    }

    fn nodes(&self) -> &Table<T> {
        &self.nodes
    }

    fn nodes_mut(&mut self) -> &mut Table<T> {
        &mut self.nodes
    }

    fn table(&self, id: TableId) -> Option<&Table<T>> {
        match id {
            TableId::Words => Some(&self.words),
            TableId::Values => Some(&self.values),
            TableId::Nodes => Some(&self.nodes),
            _ => None,
        }
    }

    fn table_mut(&mut self, id: TableId) -> Option<&mut Table<T>> {
        match id {
            TableId::Words => Some(&mut self.words),
            TableId::Values => Some(&mut self.values),
            TableId::Nodes => Some(&mut self.nodes),
            _ => None,
        }
    }

    fn table_ids(&self) -> Vec<TableId> {
        vec![TableId::Words, TableId::Values, TableId::Nodes]
    }
}

/// Generic word table plus one deviation table per value of a single
/// attribute; the input is `generic[w] + value_words[v][w]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DemographicMatricesModel<T = f32> {
    pub attribute: Attribute,
    pub generic: Table<T>,
    /// Indexed by value ordinal; `Unknown` is the last table.
    pub value_words: Vec<Table<T>>,
    pub nodes: Table<T>,
}

impl<T: Real> DemographicMatricesModel<T> {
    /// Value tables start at zero.
    pub fn new<R: Rng>(attribute: Attribute, vocab_len: usize, dim: usize, rng: &mut R) -> Self {
        DemographicMatricesModel {
            attribute,
            generic: init_word_table(rng, vocab_len, dim),
            value_words: (0..attribute.cardinality())
                .map(|_| Table::zeros(vocab_len, dim))
                .collect(),
            nodes: Table::zeros(vocab_len.saturating_sub(1), dim),
        }
    }

    #[inline]
    fn value_of(&self, speaker: &Demographics) -> usize {
        speaker.get(self.attribute).ordinal()
    }
}

impl<T: Real> SkipGram<T> for DemographicMatricesModel<T> {
    fn dim(&self) -> usize {
        self.generic.cols()
    }

    fn vocab_len(&self) -> usize {
        self.generic.rows()
    }

    #[inline]
    fn input_vector(&self, center: usize, speaker: &Demographics, out: &mut [T]) {
        out.copy_from_slice(self.generic.row(center));
        add_assign(out, self.value_words[self.value_of(speaker)].row(center));
    }

    fn input_rows(&self, center: usize, speaker: &Demographics) -> Vec<(TableId, usize)> {
        vec![
            (TableId::Generic, center),
            (TableId::ValueWords(self.value_of(speaker)), center),
        ]
    }

    #[inline]
    fn apply_input_delta(&mut self, center: usize, speaker: &Demographics, delta: &[T]) {
        let v = self.value_of(speaker);
        add_assign(self.generic.row_mut(center), delta);
        add_assign(self.value_words[v].row_mut(center), delta);
    }

    fn nodes(&self) -> &Table<T> {
        &self.nodes
    }

    fn nodes_mut(&mut self) -> &mut Table<T> {
        &mut self.nodes
    }

    fn table(&self, id: TableId) -> Option<&Table<T>> {
        match id {
            TableId::Generic => Some(&self.generic),
            TableId::ValueWords(v) => self.value_words.get(v),
            TableId::Nodes => Some(&self.nodes),
            _ => None,
        }
    }

    fn table_mut(&mut self, id: TableId) -> Option<&mut Table<T>> {
        match id {
            TableId::Generic => Some(&mut self.generic),
            TableId::ValueWords(v) => self.value_words.get_mut(v),
            TableId::Nodes => Some(&mut self.nodes),
            _ => None,
        }
    }

    fn table_ids(&self) -> Vec<TableId> {
        let mut ids = vec![TableId::Generic];
        ids.extend((0..self.value_words.len()).map(TableId::ValueWords));
        ids.push(TableId::Nodes);
        ids
    }
}

/// Any of the three architectures.
#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddingModel<T = f32> {
    Generic(GenericModel<T>),
    Vectors(DemographicVectorsModel<T>),
    Matrices(DemographicMatricesModel<T>),
}

impl<T: Real> EmbeddingModel<T> {
    pub fn new<R: Rng>(
        kind: ModelKind,
        attribute: Option<Attribute>,
        vocab_len: usize,
        dim: usize,
        rng: &mut R,
    ) -> crate::Result<Self> {
        Ok(match kind {
            ModelKind::Generic => EmbeddingModel::Generic(GenericModel::new(vocab_len, dim, rng)),
            ModelKind::DemographicVectors => {
                EmbeddingModel::Vectors(DemographicVectorsModel::new(vocab_len, dim, rng))
            }
            ModelKind::DemographicMatrices => {
                let attribute = attribute.ok_or_else(|| {
                    crate::Error::InvalidArgument("matrices model needs an attribute".into())
                })?;
                EmbeddingModel::Matrices(DemographicMatricesModel::new(
                    attribute, vocab_len, dim, rng,
                ))
            }
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            EmbeddingModel::Generic(_) => ModelKind::Generic,
            EmbeddingModel::Vectors(_) => ModelKind::DemographicVectors,
            EmbeddingModel::Matrices(_) => ModelKind::DemographicMatrices,
        }
    }

    pub fn attribute(&self) -> Option<Attribute> {
        match self {
            EmbeddingModel::Matrices(m) => Some(m.attribute),
            _ => None,
        }
    }

    /// The speaker-independent word table: `words` or `generic`.
    pub fn generic_words(&self) -> &Table<T> {
        match self {
            EmbeddingModel::Generic(m) => &m.words,
            EmbeddingModel::Vectors(m) => &m.words,
            EmbeddingModel::Matrices(m) => &m.generic,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.table_ids()
            .into_iter()
            .all(|id| self.table(id).is_some_and(Table::is_finite))
    }
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            EmbeddingModel::Generic($m) => $e,
            EmbeddingModel::Vectors($m) => $e,
            EmbeddingModel::Matrices($m) => $e,
        }
    };
}

impl<T: Real> SkipGram<T> for EmbeddingModel<T> {
    fn dim(&self) -> usize {
        dispatch!(self, m => m.dim())
    }

    fn vocab_len(&self) -> usize {
        dispatch!(self, m => m.vocab_len())
    }

    #[inline]
    fn input_vector(&self, center: usize, speaker: &Demographics, out: &mut [T]) {
        dispatch!(self, m => m.input_vector(center, speaker, out))
    }

    fn input_rows(&self, center: usize, speaker: &Demographics) -> Vec<(TableId, usize)> {
        dispatch!(self, m => m.input_rows(center, speaker))
    }

    #[inline]
    fn apply_input_delta(&mut self, center: usize, speaker: &Demographics, delta: &[T]) {
        dispatch!(self, m => m.apply_input_delta(center, speaker, delta))
    }

    fn nodes(&self) -> &Table<T> {
        dispatch!(self, m => m.nodes())
    }

    fn nodes_mut(&mut self) -> &mut Table<T> {
        dispatch!(self, m => m.nodes_mut())
    }

    fn table(&self, id: TableId) -> Option<&Table<T>> {
        dispatch!(self, m => m.table(id))
    }

    fn table_mut(&mut self, id: TableId) -> Option<&mut Table<T>> {
        dispatch!(self, m => m.table_mut(id))
    }

    fn table_ids(&self) -> Vec<TableId> {
        dispatch!(self, m => m.table_ids())
    }
}
