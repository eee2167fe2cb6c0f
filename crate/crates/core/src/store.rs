//! Model persistence, cosine nearest neighbours, neighbour overlap and
//! per-user composition of embedding spaces.
//!
//! Binary model files (`*.cdwe`) are little-endian:
//!
//! ```text
//! "CDWE"  u32 version  u8 kind  u8 attribute (0xFF if none)  u64 seed
//! u64 min_count  u32 vocab_len  u32 dim
//! u32 value_count, then value_count × (u32 len, utf-8 name)
//! vocab_len × (u32 len, utf-8 word, u64 count)
//! u32 section_count, then per section:
//!     u32 len, utf-8 name, u32 rows, u32 cols, rows·cols × f32 (row-major)
//! ```
//!
//! Text space files hold a `<vocab_size> <dim>` header followed by one
//! `<word> <v1> … <v_dim>` line per word.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::demographics::{Attribute, DemographicValue, Demographics};
use crate::error::{Error, Result};
use crate::skipgram::{
    DemographicMatricesModel, DemographicVectorsModel, EmbeddingModel, GenericModel, ModelKind,
    Table,
};
use crate::vocab::Vocabulary;

pub const MAGIC: &[u8; 4] = b"CDWE";
pub const FORMAT_VERSION: u32 = 1;
const NO_ATTRIBUTE: u8 = 0xFF;

/// A trained model together with its vocabulary and the seed it was
/// trained with.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub vocab: Vocabulary,
    pub model: EmbeddingModel<f32>,
    pub seed: u64,
}

fn kind_code(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::Generic => 0,
        ModelKind::DemographicVectors => 1,
        ModelKind::DemographicMatrices => 2,
    }
}

fn attribute_code(a: Attribute) -> u8 {
    Attribute::ALL.iter().position(|&x| x == a).unwrap() as u8
}

/// Names of the value rows or tables a model carries, in storage order.
fn value_names(model: &EmbeddingModel<f32>) -> Vec<String> {
    match model {
        EmbeddingModel::Generic(_) => Vec::new(),
        EmbeddingModel::Vectors(_) => DemographicValue::all().map(|v| v.to_string()).collect(),
        EmbeddingModel::Matrices(m) => m.attribute.values().map(|v| v.name().to_owned()).collect(),
    }
}

fn sections(model: &EmbeddingModel<f32>) -> Vec<(String, &Table<f32>)> {
    match model {
        EmbeddingModel::Generic(m) => vec![("W".into(), &m.words), ("nodes".into(), &m.nodes)],
        EmbeddingModel::Vectors(m) => vec![
            ("W".into(), &m.words),
            ("D".into(), &m.values),
            ("nodes".into(), &m.nodes),
        ],
        EmbeddingModel::Matrices(m) => {
            let mut s = vec![("G".to_owned(), &m.generic)];
            for (v, t) in m.attribute.values().zip(&m.value_words) {
                s.push((v.name().to_owned(), t));
            }
            s.push(("nodes".into(), &m.nodes));
            s
        }
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.model.generic_words().cols()
    }

    pub fn write_binary<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&[kind_code(self.model.kind())])?;
        w.write_all(&[self.model.attribute().map_or(NO_ATTRIBUTE, attribute_code)])?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.vocab.min_count().to_le_bytes())?;
        w.write_all(&(self.vocab.len() as u32).to_le_bytes())?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        let names = value_names(&self.model);
        w.write_all(&(names.len() as u32).to_le_bytes())?;
        for n in &names {
            write_str(&mut w, n)?;
        }
        for (word, &count) in self.vocab.words().iter().zip(self.vocab.counts()) {
            write_str(&mut w, word)?;
            w.write_all(&count.to_le_bytes())?;
        }
        let sections = sections(&self.model);
        w.write_all(&(sections.len() as u32).to_le_bytes())?;
        for (name, table) in sections {
            write_str(&mut w, &name)?;
            w.write_all(&(table.rows() as u32).to_le_bytes())?;
            w.write_all(&(table.cols() as u32).to_le_bytes())?;
            for v in table.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(reader: R) -> Result<Self> {
        let mut r = Reader {
            inner: BufReader::new(reader),
        };
        let magic = r.bytes::<4>("magic")?;
        if &magic != MAGIC {
            return Err(Error::format(
                format!("magic {:?}", String::from_utf8_lossy(MAGIC)),
                format!("{:?}", String::from_utf8_lossy(&magic)),
            ));
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::format(
                format!("format version {FORMAT_VERSION}"),
                format!("version {version}"),
            ));
        }
        let kind = match r.u8("model kind")? {
            0 => ModelKind::Generic,
            1 => ModelKind::DemographicVectors,
            2 => ModelKind::DemographicMatrices,
            k => return Err(Error::format("model kind 0, 1 or 2", format!("{k}"))),
        };
        let attribute = match r.u8("attribute")? {
            NO_ATTRIBUTE => None,
            a if (a as usize) < Attribute::ALL.len() => Some(Attribute::ALL[a as usize]),
            a => return Err(Error::format("attribute code 0-3 or 255", format!("{a}"))),
        };
        if (kind == ModelKind::DemographicMatrices) != attribute.is_some() {
            return Err(Error::format(
                "an attribute exactly for matrices models",
                format!("kind {} with attribute {attribute:?}", kind.name()),
            ));
        }
        let seed = r.u64("seed")?;
        let min_count = r.u64("min_count")?;
        let vocab_len = r.u32("vocab size")? as usize;
        let dim = r.u32("dimension")? as usize;
        if dim == 0 {
            return Err(Error::format("dimension > 0", "0"));
        }
        let value_count = r.u32("value count")? as usize;
        let mut names = Vec::with_capacity(value_count.min(64));
        for _ in 0..value_count {
            names.push(r.string("value name")?);
        }
        let mut entries = Vec::with_capacity(vocab_len.min(1 << 20));
        for i in 0..vocab_len {
            let word = r.string(&format!("vocabulary word {i}"))?;
            let count = r.u64(&format!("count of word {i}"))?;
            entries.push((word, count));
        }
        let vocab = Vocabulary::from_entries(entries, min_count)?;
        let section_count = r.u32("section count")? as usize;
        let mut tables = HashMap::new();
        let mut order = Vec::new();
        for _ in 0..section_count {
            let name = r.string("section name")?;
            let rows = r.u32(&format!("rows of section {name}"))? as usize;
            let cols = r.u32(&format!("cols of section {name}"))? as usize;
            let mut data = vec![0f32; rows * cols];
            for (i, v) in data.iter_mut().enumerate() {
                *v = f32::from_le_bytes(r.bytes::<4>(&format!(
                    "section {name}: {} floats, stream ended after {i}",
                    rows * cols
                ))?);
            }
            order.push(name.clone());
            tables.insert(name, Table::from_vec(rows, cols, data));
        }
        let mut trailing = [0u8; 1];
        if r.inner.read(&mut trailing)? != 0 {
            return Err(Error::format("end of file", "trailing bytes"));
        }

        let mut take = |name: &str, rows: usize| -> Result<Table<f32>> {
            let t = tables
                .remove(name)
                .ok_or_else(|| Error::format(format!("section {name}"), format!("sections {order:?}")))?;
            if t.rows() != rows || t.cols() != dim {
                return Err(Error::format(
                    format!("section {name} of shape {rows}x{dim}"),
                    format!("{}x{}", t.rows(), t.cols()),
                ));
            }
            Ok(t)
        };
        let nodes_rows = vocab_len.saturating_sub(1);
        let model = match kind {
            ModelKind::Generic => EmbeddingModel::Generic(GenericModel {
                words: take("W", vocab_len)?,
                nodes: take("nodes", nodes_rows)?,
            }),
            ModelKind::DemographicVectors => EmbeddingModel::Vectors(DemographicVectorsModel {
                words: take("W", vocab_len)?,
                values: take("D", crate::demographics::VALUE_COUNT)?,
                nodes: take("nodes", nodes_rows)?,
            }),
            ModelKind::DemographicMatrices => {
                let attribute = attribute.unwrap();
                let mut value_words = Vec::new();
                for v in attribute.values() {
                    value_words.push(take(v.name(), vocab_len)?);
                }
                EmbeddingModel::Matrices(DemographicMatricesModel {
                    attribute,
                    generic: take("G", vocab_len)?,
                    value_words,
                    nodes: take("nodes", nodes_rows)?,
                })
            }
        };
        let expected = value_names(&model);
        if names != expected {
            return Err(Error::format(
                format!("value names {expected:?}"),
                format!("{names:?}"),
            ));
        }
        Ok(TrainedModel { vocab, model, seed })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_binary(File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::read_binary(file)
    }

    fn matrices(&self) -> Result<&DemographicMatricesModel<f32>> {
        match &self.model {
            EmbeddingModel::Matrices(m) => Ok(m),
            other => Err(Error::InvalidArgument(format!(
                "expected a dmat model, found {}",
                other.kind().name()
            ))),
        }
    }

    /// The speaker-independent space (`W`, or `G` for matrices models).
    pub fn generic_space(&self) -> EmbeddingSpace {
        EmbeddingSpace::from_table(&self.vocab, self.model.generic_words())
    }

    /// `G + W_v` for every word of a matrices model.
    pub fn value_space(&self, value: DemographicValue) -> Result<EmbeddingSpace> {
        let m = self.matrices()?;
        check_value(m, value)?;
        let mut table = m.generic.clone();
        for (g, d) in table
            .as_mut_slice()
            .iter_mut()
            .zip(m.value_words[value.ordinal()].as_slice())
        {
            *g += d;
        }
        Ok(EmbeddingSpace::from_table(&self.vocab, &table))
    }

    pub fn demographic_word_vector(&self, word: &str, value: DemographicValue) -> Result<Vec<f32>> {
        let index = self
            .vocab
            .index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))?;
        demographic_word_vector(self.matrices()?, index, value)
    }
}

fn check_value(m: &DemographicMatricesModel<f32>, value: DemographicValue) -> Result<()> {
    if value.attribute() != m.attribute {
        return Err(Error::ValueAttributeMismatch {
            value: value.name().to_owned(),
            attribute: m.attribute.name().to_owned(),
        });
    }
    Ok(())
}

/// `G[w] + W_v[w]`.
pub fn demographic_word_vector(
    model: &DemographicMatricesModel<f32>,
    word: usize,
    value: DemographicValue,
) -> Result<Vec<f32>> {
    check_value(model, value)?;
    if word >= model.generic.rows() {
        return Err(Error::UnknownWord(format!("index {word}")));
    }
    Ok(model
        .generic
        .row(word)
        .iter()
        .zip(model.value_words[value.ordinal()].row(word))
        .map(|(g, d)| g + d)
        .collect())
}

struct Reader<R> {
    inner: BufReader<R>,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::format(what.to_owned(), "end of file"),
            _ => Error::Io(e),
        })?;
        Ok(buf)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.bytes::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(what)?))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let mut buf = Vec::new();
        (&mut self.inner)
            .take(len as u64)
            .read_to_end(&mut buf)?;
        if buf.len() != len {
            return Err(Error::format(format!("{what} of {len} bytes"), format!("{} bytes", buf.len())));
        }
        String::from_utf8(buf).map_err(|_| Error::format(format!("utf-8 {what}"), "invalid utf-8"))
    }
}

/// Dense word vectors with cached norms.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingSpace {
    pub fn new(words: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if vectors.len() != words.len() * dim {
            return Err(Error::format(
                format!("{} values for {} words of dimension {dim}", words.len() * dim, words.len()),
                format!("{}", vectors.len()),
            ));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word {w:?}")));
            }
        }
        let norms = vectors
            .chunks_exact(dim)
            .map(|v| v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt())
            .collect();
        Ok(EmbeddingSpace {
            words,
            index,
            dim,
            vectors,
            norms,
        })
    }

    pub fn from_table(vocab: &Vocabulary, table: &Table<f32>) -> Self {
        Self::new(vocab.words().to_vec(), table.cols(), table.as_slice().to_vec())
            .expect("vocabulary and table agree")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, index: usize) -> &[f32] {
        &self.vectors[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector_of(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        let (na, nb) = (self.norms[a], self.norms[b]);
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let dot: f64 = self
            .vector(a)
            .iter()
            .zip(self.vector(b))
            .map(|(&x, &y)| f64::from(x) * f64::from(y))
            .sum();
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }

    /// The `n` words most cosine-similar to `word`, excluding `word` itself,
    /// in descending similarity with ties broken by index. `n` larger than
    /// the remaining vocabulary returns every other word.
    pub fn nearest_neighbors(&self, word: &str, n: usize) -> Result<Vec<(String, f64)>> {
        let q = self
            .index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))?;
        Ok(self
            .nearest_indices(q, n)?
            .into_iter()
            .map(|(i, c)| (self.words[i].clone(), c))
            .collect())
    }

    pub fn nearest_indices(&self, query: usize, n: usize) -> Result<Vec<(usize, f64)>> {
        if self.norms[query] == 0.0 {
            return Err(Error::ZeroNorm(self.words[query].clone()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&i| i != query)
            .map(|i| (i, self.cosine(query, i)))
            .collect();
        let by_rank = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        if n < scored.len() {
            scored.select_nth_unstable_by(n - 1, by_rank);
            scored.truncate(n);
        }
        scored.sort_by(by_rank);
        Ok(scored)
    }

    pub fn write_text<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for v in self.vector(i) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::format("header \"<vocab_size> <dim>\"", "empty file"))?;
        let mut parts = header.split_whitespace();
        let (size, dim) = match (
            parts.next().and_then(|s| s.parse::<usize>().ok()),
            parts.next().and_then(|s| s.parse::<usize>().ok()),
            parts.next(),
        ) {
            (Some(s), Some(d), None) => (s, d),
            _ => return Err(Error::format("header \"<vocab_size> <dim>\"", format!("{header:?}"))),
        };
        let mut words = Vec::with_capacity(size);
        let mut vectors = Vec::with_capacity(size * dim);
        for row in 0..size {
            let line = lines.next().transpose()?.ok_or_else(|| {
                Error::format(format!("{size} rows"), format!("{row} rows"))
            })?;
            let mut fields = line.split(' ');
            let word = fields.next().unwrap_or_default().to_owned();
            let values: Vec<&str> = fields.collect();
            if values.len() != dim {
                return Err(Error::format(
                    format!("{dim} values in row {} (word {word:?})", row + 1),
                    format!("{}", values.len()),
                ));
            }
            for v in values {
                vectors.push(v.parse::<f32>().map_err(|_| {
                    Error::format(format!("a number in row {} (word {word:?})", row + 1), v.to_owned())
                })?);
            }
            words.push(word);
        }
        if let Some(extra) = lines.next().transpose()? {
            if !extra.is_empty() {
                return Err(Error::format(format!("{size} rows"), "additional rows"));
            }
        }
        Self::new(words, dim, vectors)
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        self.write_text(File::create(path)?)
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::read_text(BufReader::new(file))
    }
}

/// |top-n(a) ∩ top-n(b)| / n for the neighbours of `word` in two spaces.
pub fn neighbor_overlap(word: &str, a: &EmbeddingSpace, b: &EmbeddingSpace, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("overlap needs n >= 1".into()));
    }
    let top_a = a.nearest_neighbors(word, n)?;
    let top_b = b.nearest_neighbors(word, n)?;
    let shared = top_a
        .iter()
        .filter(|(w, _)| top_b.iter().any(|(v, _)| v == w))
        .count();
    Ok(shared as f64 / n as f64)
}

/// Where one slice of a composed vector comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartSelection {
    Generic,
    Value(DemographicValue),
    /// Sum of the speaker's four value vectors from an attribute-vector model.
    SpeakerValues(Demographics),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposedPart {
    pub source: String,
    pub selection: PartSelection,
}

/// Concatenation of several spaces over one shared vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedSpace {
    pub parts: Vec<ComposedPart>,
    pub space: EmbeddingSpace,
}

impl ComposedSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Which parts to concatenate; attributes are always emitted in
/// age, gender, location, religion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub generic: bool,
    pub attributes: Vec<Attribute>,
}

impl Selection {
    pub fn all() -> Self {
        Selection {
            generic: true,
            attributes: Attribute::ALL.to_vec(),
        }
    }
}

fn concat(parts: &[Vec<f32>], words: usize) -> Vec<f32> {
    let dims: Vec<usize> = parts.iter().map(|p| p.len() / words).collect();
    let mut out = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for w in 0..words {
        for (p, &d) in parts.iter().zip(&dims) {
            out.extend_from_slice(&p[w * d..(w + 1) * d]);
        }
    }
    out
}

fn check_same_vocab(base: &TrainedModel, other: &TrainedModel, label: &str) -> Result<()> {
    if base.vocab.words() != other.vocab.words() {
        return Err(Error::VocabularyMismatch(format!(
            "{label} has {} words, expected the same {} words as the generic part",
            other.vocab.len(),
            base.vocab.len()
        )));
    }
    if base.dim() != other.dim() {
        return Err(Error::VocabularyMismatch(format!(
            "{label} has dimension {}, expected {}",
            other.dim(),
            base.dim()
        )));
    }
    Ok(())
}

/// Builds a user-conditioned space: the generic vector followed by
/// `G + W_v` for every selected attribute at the profile's value (the
/// `Unknown` table when the attribute is not known).
pub fn compose_for_user(
    generic: Option<&TrainedModel>,
    matrices: &[&TrainedModel],
    profile: &Demographics,
    selection: &Selection,
) -> Result<ComposedSpace> {
    let mut chosen: Vec<(&TrainedModel, Attribute)> = Vec::new();
    for attribute in Attribute::ALL {
        if !selection.attributes.contains(&attribute) {
            continue;
        }
        let model = matrices
            .iter()
            .find(|m| m.model.attribute() == Some(attribute))
            .ok_or_else(|| Error::InvalidArgument(format!("no dmat model for attribute {attribute}")))?;
        chosen.push((model, attribute));
    }
    let base = match (selection.generic, generic) {
        (true, Some(g)) => g,
        (true, None) => {
            return Err(Error::InvalidArgument("generic part selected but no generic model given".into()))
        }
        (false, _) => chosen
            .first()
            .map(|c| c.0)
            .ok_or_else(|| Error::InvalidArgument("empty selection".into()))?,
    };

    let words = base.vocab.len();
    let mut parts = Vec::new();
    let mut data = Vec::new();
    if selection.generic {
        parts.push(ComposedPart {
            source: base.model.kind().name().to_owned(),
            selection: PartSelection::Generic,
        });
        data.push(base.model.generic_words().as_slice().to_vec());
    }
    for (model, attribute) in chosen {
        let label = format!("dmat:{attribute}");
        check_same_vocab(base, model, &label)?;
        let value = profile.get(attribute);
        let space = model.value_space(value)?;
        data.push(space.vectors);
        parts.push(ComposedPart {
            source: label,
            selection: PartSelection::Value(value),
        });
    }
    let dim = data.iter().map(|d| d.len() / words).sum();
    Ok(ComposedSpace {
        parts,
        space: EmbeddingSpace::new(base.vocab.words().to_vec(), dim, concat(&data, words))?,
    })
}

/// Word vector concatenated with the summed value vectors of the speaker,
/// for an attribute-vector model.
pub fn compose_vectors_for_user(model: &TrainedModel, profile: &Demographics) -> Result<ComposedSpace> {
    let m = match &model.model {
        EmbeddingModel::Vectors(m) => m,
        other => {
            return Err(Error::InvalidArgument(format!(
                "expected a dvec model, found {}",
                other.kind().name()
            )))
        }
    };
    let words = model.vocab.len();
    let speaker = m.speaker_vector(profile);
    let repeated: Vec<f32> = (0..words).flat_map(|_| speaker.iter().copied()).collect();
    let data = [m.words.as_slice().to_vec(), repeated];
    Ok(ComposedSpace {
        parts: vec![
            ComposedPart {
                source: "dvec".into(),
                selection: PartSelection::Generic,
            },
            ComposedPart {
                source: "dvec".into(),
                selection: PartSelection::SpeakerValues(*profile),
            },
        ],
        space: EmbeddingSpace::new(model.vocab.words().to_vec(), 2 * m.words.cols(), concat(&data, words))?,
    })
}
