//! Word counting, frequency cutoff and Huffman coding for hierarchical softmax.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::io::{BufRead, Write};

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 5;

pub type WordCounts = HashMap<String, u64>;

pub fn count_words<'a, I>(corpus: I) -> WordCounts
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    let mut counts = WordCounts::new();
    for seq in corpus {
        for token in &seq.tokens {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Adds the counts of `other` into `into`.
pub fn merge_counts(into: &mut WordCounts, other: WordCounts) {
    for (word, n) in other {
        *into.entry(word).or_insert(0) += n;
    }
}

/// Dense word index. Index order is descending count, ties broken
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    pub fn build(counts: &WordCounts, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidArgument("min_count must be at least 1".into()));
        }
        let mut kept: Vec<(&String, u64)> = counts
            .iter()
            .filter(|(_, &n)| n >= min_count)
            .map(|(w, &n)| (w, n))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let entries = kept.into_iter().map(|(w, n)| (w.clone(), n)).collect();
        Self::from_entries(entries, min_count)
    }

    /// Builds a vocabulary from words already in index order.
    pub fn from_entries(entries: Vec<(String, u64)>, min_count: u64) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (word, n)) in entries.into_iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word {word:?}")));
            }
            words.push(word);
            counts.push(n);
        }
        if words.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Maps tokens to indices, dropping out-of-vocabulary tokens.
    pub fn encode(&self, seq: &TokenSequence) -> Vec<u32> {
        seq.tokens
            .iter()
            .filter_map(|t| self.index_of(t))
            .map(|i| i as u32)
            .collect()
    }

    /// Writes `<word>\t<count>` lines in index order.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (w, n) in self.words.iter().zip(&self.counts) {
            writeln!(writer, "{w}\t{n}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R, min_count: u64) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (w, n) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected <word>\\t<count>"))?;
            let n = n
                .parse::<u64>()
                .map_err(|_| Error::parse(i + 1, format!("bad count {n:?}")))?;
            entries.push((w.to_owned(), n));
        }
        Self::from_entries(entries, min_count)
    }
}

/// Binary Huffman code over vocabulary counts.
///
/// Internal nodes are numbered `0..|V|-1` in merge order; the root is the
/// last one. For each word, `path` lists internal nodes from the root down
/// and `code` holds the branch bit taken at each of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTree {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<u32>>,
}

impl HuffmanTree {
    pub fn build(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.counts())
    }

    /// Merges the two lightest subtrees until one remains. Ties are broken
    /// by node id (leaves first, then internal nodes in creation order); the
    /// first subtree popped takes bit 0.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::VocabularyTooSmall(n));
        }
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| Reverse((c, i)))
            .collect();
        // parent[node] and bit[node] for all 2n-1 nodes; internal node j has id n + j.
        let mut parent = vec![usize::MAX; 2 * n - 1];
        let mut bit = vec![0u8; 2 * n - 1];
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((c0, a)) = heap.pop().unwrap();
            let Reverse((c1, b)) = heap.pop().unwrap();
            parent[a] = next;
            parent[b] = next;
            bit[b] = 1;
            heap.push(Reverse((c0.saturating_add(c1), next)));
            next += 1;
        }
        let root = 2 * n - 2;
        let mut codes = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push((node - n) as u32);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanTree { codes, paths })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.codes.len() - 1
    }

    pub fn code(&self, word: usize) -> &[u8] {
        &self.codes[word]
    }

    pub fn path(&self, word: usize) -> &[u32] {
        &self.paths[word]
    }

    /// Σ count(w) · len(code(w)).
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        self.codes
            .iter()
            .zip(counts)
            .map(|(c, &n)| n * c.len() as u64)
            .sum()
    }
}
