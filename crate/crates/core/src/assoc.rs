//! Word-association evaluation of embedding spaces.
//!
//! Datasets are stanza files: a `<stimulus>\t<t>` line followed by
//! `<response>\t<f_w>` lines, stanzas separated by blank lines. Lines starting
//! with `#` are comments; `# group: <label>` names the dataset.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::EmbeddingSpace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationStimulus {
    pub stimulus: String,
    pub responses: HashMap<String, u64>,
    /// Number of participants shown the stimulus.
    pub t: u64,
    pub f_max: u64,
}

impl AssociationStimulus {
    pub fn new(stimulus: String, t: u64, responses: HashMap<String, u64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidArgument(format!("stimulus {stimulus:?}: t must be positive")));
        }
        if responses.values().any(|&f| f == 0) {
            return Err(Error::InvalidArgument(format!("stimulus {stimulus:?}: response counts must be positive")));
        }
        let f_max = responses.values().copied().max().ok_or_else(|| {
            Error::InvalidArgument(format!("stimulus {stimulus:?} has no responses"))
        })?;
        let total: u64 = responses.values().sum();
        if total > t {
            return Err(Error::InvalidArgument(format!(
                "stimulus {stimulus:?}: {total} responses from {t} participants"
            )));
        }
        Ok(AssociationStimulus {
            stimulus,
            responses,
            t,
            f_max,
        })
    }

    pub fn count(&self, word: &str) -> u64 {
        self.responses.get(word).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationDataset {
    pub group: String,
    pub stimuli: Vec<AssociationStimulus>,
}

struct Stanza {
    line: usize,
    stimulus: String,
    t: u64,
    responses: HashMap<String, u64>,
}

fn parse_pair(line: &str, number: usize) -> Result<(String, u64)> {
    let mut fields = line.split('\t');
    let (word, count) = match (fields.next(), fields.next(), fields.next()) {
        (Some(w), Some(c), None) if !w.trim().is_empty() => (w.trim(), c.trim()),
        _ => return Err(Error::parse(number, format!("expected \"<word>\\t<count>\", found {line:?}"))),
    };
    let count: i64 = count
        .parse()
        .map_err(|_| Error::parse(number, format!("count {count:?} is not an integer")))?;
    if count <= 0 {
        return Err(Error::parse(number, format!("count {count} must be positive")));
    }
    Ok((word.to_owned(), count as u64))
}

impl AssociationDataset {
    pub fn read<R: BufRead>(reader: R, default_group: &str) -> Result<Self> {
        let mut group = default_group.to_owned();
        let mut stanzas: Vec<Stanza> = Vec::new();
        let mut open = false;
        for (i, line) in reader.lines().enumerate() {
            let number = i + 1;
            let line = line?;
            let trimmed = line.trim_end_matches('\r');
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(label) = comment.trim().strip_prefix("group:") {
                    group = label.trim().to_owned();
                }
                continue;
            }
            if trimmed.trim().is_empty() {
                open = false;
                continue;
            }
            let (word, count) = parse_pair(trimmed, number)?;
            if open {
                let stanza = stanzas.last_mut().unwrap();
                if stanza.responses.insert(word.clone(), count).is_some() {
                    return Err(Error::parse(number, format!("duplicate response {word:?}")));
                }
            } else {
                if let Some(prev) = stanzas.iter().find(|s| s.stimulus == word) {
                    return Err(Error::parse(
                        number,
                        format!("duplicate stimulus {word:?} (first at line {})", prev.line),
                    ));
                }
                stanzas.push(Stanza {
                    line: number,
                    stimulus: word,
                    t: count,
                    responses: HashMap::new(),
                });
                open = true;
            }
        }
        if stanzas.is_empty() {
            return Err(Error::parse(0, "no stimuli"));
        }
        let stimuli = stanzas
            .into_iter()
            .map(|s| {
                AssociationStimulus::new(s.stimulus, s.t, s.responses).map_err(|e| match e {
                    Error::InvalidArgument(m) => Error::parse(s.line, m),
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        Ok(AssociationDataset { group, stimuli })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::read(BufReader::new(file), &stem)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# group: {}", self.group)?;
        for (i, s) in self.stimuli.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            writeln!(w, "{}\t{}", s.stimulus, s.t)?;
            let mut responses: Vec<_> = s.responses.iter().collect();
            responses.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            for (word, f) in responses {
                writeln!(w, "{word}\t{f}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Best,
    OutOf(usize),
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "best" {
            return Ok(Metric::Best);
        }
        match s.strip_prefix("oo").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 1 => Ok(Metric::OutOf(n)),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?} (expected best or ooN)"))),
        }
    }

    pub fn neighbors(self) -> usize {
        match self {
            Metric::Best => 1,
            Metric::OutOf(n) => n,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Best => f.write_str("best"),
            Metric::OutOf(n) => write!(f, "oo{n}"),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StimulusScore {
    pub stimulus: String,
    /// `None` when the stimulus is not in the space's vocabulary.
    pub score: Option<f64>,
    pub neighbors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub metric: Metric,
    /// Mean over evaluated stimuli; 0 when none could be evaluated.
    pub score: f64,
    pub coverage: f64,
    pub evaluated: usize,
    pub total: usize,
    pub per_stimulus: Vec<StimulusScore>,
}

fn evaluate(space: &EmbeddingSpace, dataset: &AssociationDataset, metric: Metric) -> Result<Evaluation> {
    let n = metric.neighbors();
    let mut per_stimulus = Vec::with_capacity(dataset.stimuli.len());
    let mut sum = 0.0;
    let mut evaluated = 0;
    for s in &dataset.stimuli {
        let query = space.index_of(&s.stimulus);
        let neighbors = match query {
            Some(q) => match space.nearest_indices(q, n) {
                Ok(nn) => Some(nn),
                // A zero vector has no meaningful neighbours; treat like OOV.
                Err(Error::ZeroNorm(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        let Some(neighbors) = neighbors else {
            per_stimulus.push(StimulusScore {
                stimulus: s.stimulus.clone(),
                score: None,
                neighbors: Vec::new(),
            });
            continue;
        };
        let words: Vec<String> = neighbors.iter().map(|&(i, _)| space.words()[i].clone()).collect();
        let found: u64 = words.iter().map(|w| s.count(w)).sum();
        let score = match metric {
            Metric::Best => found as f64 / s.f_max as f64,
            Metric::OutOf(_) => found as f64 / s.t as f64,
        };
        sum += score;
        evaluated += 1;
        per_stimulus.push(StimulusScore {
            stimulus: s.stimulus.clone(),
            score: Some(score),
            neighbors: words,
        });
    }
    let total = dataset.stimuli.len();
    Ok(Evaluation {
        metric,
        score: if evaluated == 0 { 0.0 } else { sum / evaluated as f64 },
        coverage: evaluated as f64 / total as f64,
        evaluated,
        total,
        per_stimulus,
    })
}

/// f_w / f_max for the nearest neighbour of each stimulus.
pub fn eval_best(space: &EmbeddingSpace, dataset: &AssociationDataset) -> Result<Evaluation> {
    evaluate(space, dataset, Metric::Best)
}

/// Σ f_w / t over the `n` nearest neighbours of each stimulus.
pub fn eval_oo_n(space: &EmbeddingSpace, dataset: &AssociationDataset, n: usize) -> Result<Evaluation> {
    if n == 0 {
        return Err(Error::InvalidArgument("ooN needs N >= 1".into()));
    }
    evaluate(space, dataset, Metric::OutOf(n))
}

pub fn eval_metric(space: &EmbeddingSpace, dataset: &AssociationDataset, metric: Metric) -> Result<Evaluation> {
    match metric {
        Metric::Best => eval_best(space, dataset),
        Metric::OutOf(n) => eval_oo_n(space, dataset, n),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub configuration: String,
    pub metric: Metric,
    /// Per group, in the table's group order.
    pub scores: Vec<f64>,
    pub coverage: Vec<f64>,
    #[serde(rename = "macro")]
    pub macro_average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultsTable {
    pub groups: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "configuration\tmetric")?;
        for g in &self.groups {
            write!(w, "\t{g}")?;
        }
        writeln!(w, "\tmacro")?;
        for row in &self.rows {
            write!(w, "{}\t{}", row.configuration, row.metric)?;
            for s in &row.scores {
                write!(w, "\t{s:.4}")?;
            }
            writeln!(w, "\t{:.4}", row.macro_average)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("results serialize")
    }
}

/// A named space configuration that provides one space per group.
pub type SpaceConfiguration<'a> = (String, BTreeMap<String, &'a EmbeddingSpace>);

/// Scores each configuration on every group's dataset. Rows are ordered by
/// metric, then configuration; columns follow the datasets' group order.
pub fn eval_matrix(
    configurations: &[SpaceConfiguration<'_>],
    datasets: &BTreeMap<String, AssociationDataset>,
    metrics: &[Metric],
) -> Result<ResultsTable> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("no association datasets".into()));
    }
    let groups: Vec<String> = datasets.keys().cloned().collect();
    for (name, spaces) in configurations {
        let mut missing: Vec<String> = groups
            .iter()
            .filter(|g| !spaces.contains_key(*g))
            .map(|g| format!("{name}:{g}"))
            .collect();
        let known: HashSet<&String> = groups.iter().collect();
        missing.extend(
            spaces
                .keys()
                .filter(|g| !known.contains(g))
                .map(|g| format!("dataset:{g}")),
        );
        if !missing.is_empty() {
            return Err(Error::MissingGroups(missing));
        }
    }
    let mut rows = Vec::new();
    for &metric in metrics {
        for (name, spaces) in configurations {
            let mut scores = Vec::with_capacity(groups.len());
            let mut coverage = Vec::with_capacity(groups.len());
            for g in &groups {
                let e = eval_metric(spaces[g], &datasets[g], metric)?;
                scores.push(e.score);
                coverage.push(e.coverage);
            }
            let macro_average = scores.iter().sum::<f64>() / scores.len() as f64;
            rows.push(ResultRow {
                configuration: name.clone(),
                metric,
                scores,
                coverage,
                macro_average,
            });
        }
    }
    Ok(ResultsTable { groups, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stanza(stimulus: &str, t: u64, responses: &[(&str, u64)]) -> AssociationStimulus {
        AssociationStimulus::new(
            stimulus.into(),
            t,
            responses.iter().map(|&(w, f)| (w.to_owned(), f)).collect(),
        )
        .unwrap()
    }

    /// "animal" at the origin direction; neighbours in the order given.
    fn ranked_space(order: &[&str]) -> EmbeddingSpace {
        let mut words = vec!["animal".to_owned()];
        let mut vectors = vec![1.0f32, 0.0];
        for (i, w) in order.iter().enumerate() {
            let angle = 0.1 * (i + 1) as f32;
            words.push((*w).to_owned());
            vectors.extend([angle.cos(), angle.sin()]);
        }
        EmbeddingSpace::new(words, 2, vectors).unwrap()
    }

    fn animal_dataset() -> AssociationDataset {
        AssociationDataset {
            group: "g".into(),
            stimuli: vec![stanza("animal", 10, &[("dog", 5), ("mouse", 3), ("cat", 2)])],
        }
    }

    #[test]
    fn best_examples() {
        let ds = animal_dataset();
        assert_eq!(eval_best(&ranked_space(&["mouse", "pet", "dog"]), &ds).unwrap().score, 0.6);
        assert_eq!(eval_best(&ranked_space(&["pet", "mouse"]), &ds).unwrap().score, 0.0);
        assert_eq!(eval_best(&ranked_space(&["dog", "pet"]), &ds).unwrap().score, 1.0);
    }

    #[test]
    fn out_of_n_examples() {
        let ds = animal_dataset();
        let sp = ranked_space(&["mouse", "pet", "dog", "cat"]);
        let e = eval_oo_n(&sp, &ds, 3).unwrap();
        assert!((e.score - 0.8).abs() < 1e-12);
        assert_eq!(e.per_stimulus[0].neighbors, ["mouse", "pet", "dog"]);
        assert!((eval_oo_n(&sp, &ds, 10).unwrap().score - 1.0).abs() < 1e-12);
        assert!(eval_oo_n(&sp, &ds, 0).is_err());
    }

    #[test]
    fn oov_stimuli_reduce_coverage() {
        let mut ds = animal_dataset();
        ds.stimuli.push(stanza("zebra", 4, &[("stripes", 4)]));
        let e = eval_best(&ranked_space(&["dog"]), &ds).unwrap();
        assert_eq!(e.coverage, 0.5);
        assert_eq!(e.score, 1.0);
        assert_eq!(e.per_stimulus[1].score, None);
    }

    #[test]
    fn stimulus_never_its_own_neighbor() {
        let ds = AssociationDataset {
            group: "g".into(),
            stimuli: vec![stanza("animal", 10, &[("animal", 6), ("dog", 4)])],
        };
        let e = eval_best(&ranked_space(&["dog"]), &ds).unwrap();
        assert_eq!(e.per_stimulus[0].neighbors, ["dog"]);
        assert!((e.score - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn loads_stanzas() {
        let text = "# group: young-female\nanimal\t10\ndog\t5\nmouse\t3\n\nsun\t4\nhot\t1\nmoon\t2\n";
        let ds = AssociationDataset::read(text.as_bytes(), "x").unwrap();
        assert_eq!(ds.group, "young-female");
        assert_eq!(ds.stimuli.len(), 2);
        assert_eq!(ds.stimuli[0].f_max, 5);
        assert_eq!(ds.stimuli[1].f_max, 2);
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        assert_eq!(AssociationDataset::read(buf.as_slice(), "x").unwrap(), ds);
    }

    #[test]
    fn loader_errors_carry_line_numbers() {
        let dup = "a\t3\nb\t1\n\na\t2\nc\t1\n";
        let msg = AssociationDataset::read(dup.as_bytes(), "x").unwrap_err().to_string();
        assert!(msg.contains("line 4") && msg.contains("duplicate stimulus"), "{msg}");
        let zero = "a\t3\nb\t0\n";
        let msg = AssociationDataset::read(zero.as_bytes(), "x").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let negative = "a\t-3\nb\t1\n";
        assert!(AssociationDataset::read(negative.as_bytes(), "x").is_err());
        assert!(AssociationDataset::read("".as_bytes(), "x").is_err());
        assert!(AssociationDataset::read("# only\n\n".as_bytes(), "x").is_err());
        let bare = "a\t3\n\nb\t2\nc\t1\n";
        let msg = AssociationDataset::read(bare.as_bytes(), "x").unwrap_err().to_string();
        assert!(msg.contains("line 1") && msg.contains("no responses"), "{msg}");
    }

    #[test]
    fn metric_names() {
        assert_eq!(Metric::parse("best").unwrap(), Metric::Best);
        assert_eq!(Metric::parse("oo10").unwrap(), Metric::OutOf(10));
        assert!(Metric::parse("oo0").is_err());
        assert_eq!(Metric::OutOf(3).to_string(), "oo3");
    }

    #[test]
    fn matrix_macro_and_missing_groups() {
        let sp_a = ranked_space(&["cat", "pet"]);
        let sp_b = ranked_space(&["pet", "cat"]);
        let ds_a = AssociationDataset {
            group: "a".into(),
            stimuli: vec![stanza("animal", 10, &[("cat", 2), ("dog", 8)])],
        };
        let ds_b = AssociationDataset {
            group: "b".into(),
            stimuli: vec![stanza("animal", 10, &[("pet", 4), ("dog", 6)])],
        };
        let datasets: BTreeMap<_, _> = [("a".to_owned(), ds_a), ("b".to_owned(), ds_b)].into();
        let spaces: BTreeMap<_, _> = [("a".to_owned(), &sp_a), ("b".to_owned(), &sp_b)].into();
        let table = eval_matrix(&[("generic".into(), spaces.clone())], &datasets, &[Metric::OutOf(1)]).unwrap();
        assert_eq!(table.rows[0].scores, [0.2, 0.4]);
        assert!((table.rows[0].macro_average - 0.3).abs() < 1e-12);
        let mut tsv = Vec::new();
        table.write_tsv(&mut tsv).unwrap();
        assert_eq!(
            String::from_utf8(tsv).unwrap(),
            "configuration\tmetric\ta\tb\tmacro\ngeneric\too1\t0.2000\t0.4000\t0.3000\n"
        );
        assert_eq!(table.to_json()["rows"][0]["macro"], 0.30000000000000004);

        let partial: BTreeMap<_, _> = [("a".to_owned(), &sp_a)].into();
        match eval_matrix(&[("generic".into(), partial)], &datasets, &[Metric::Best]) {
            Err(Error::MissingGroups(m)) => assert_eq!(m, ["generic:b"]),
            other => panic!("{other:?}"),
        }
    }
}
