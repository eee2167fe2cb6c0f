#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use cdwe::assoc::{AssociationDataset, AssociationStimulus};
use cdwe::corpus::Post;
use cdwe::demographics::{AgeGroup, Attribute, Demographics, Gender, Region, Religion};
use cdwe::skipgram::{model_loss_and_grad, EmbeddingModel, ModelKind, SkipGram, TrainingExample};
use cdwe::store::EmbeddingSpace;
use cdwe::vocab::HuffmanTree;

pub const ARCHITECTURES: [(ModelKind, Option<Attribute>); 3] = [
    (ModelKind::Generic, None),
    (ModelKind::DemographicVectors, None),
    (ModelKind::DemographicMatrices, Some(Attribute::Location)),
];

pub fn random_speaker<R: Rng>(rng: &mut R) -> Demographics {
    Demographics {
        age: *AgeGroup::ALL.choose(rng).unwrap(),
        gender: *Gender::ALL.choose(rng).unwrap(),
        location: *Region::ALL.choose(rng).unwrap(),
        religion: *Religion::ALL.choose(rng).unwrap(),
    }
}

/// A model whose every table, demographic ones included, holds random values.
pub fn random_model<R: Rng>(
    kind: ModelKind,
    attribute: Option<Attribute>,
    vocab_len: usize,
    dim: usize,
    scale: f64,
    rng: &mut R,
) -> EmbeddingModel<f64> {
    let mut model = EmbeddingModel::<f64>::new(kind, attribute, vocab_len, dim, rng).unwrap();
    for id in model.table_ids() {
        for v in model.table_mut(id).unwrap().as_mut_slice() {
            *v = rng.gen_range(-scale..scale);
        }
    }
    model
}

pub fn random_tree<R: Rng>(size: usize, rng: &mut R) -> HuffmanTree {
    let counts: Vec<u64> = (0..size).map(|_| rng.gen_range(1..50)).collect();
    HuffmanTree::from_counts(&counts).unwrap()
}

fn loss_of(model: &EmbeddingModel<f64>, tree: &HuffmanTree, ex: &TrainingExample) -> f64 {
    model_loss_and_grad(model, tree, ex).unwrap().0
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub entries: usize,
    /// Entries outside the reported rows whose numeric gradient is nonzero.
    pub leaked: usize,
}

/// Central-difference check of every entry of every row that the analytic
/// gradient reports, plus a sweep of all other entries expecting zero.
pub fn gradient_check(model: &mut EmbeddingModel<f64>, tree: &HuffmanTree, ex: &TrainingExample, h: f64) -> GradCheck {
    let (_, grads) = model_loss_and_grad(&*model, tree, ex).unwrap();
    let reported: HashMap<_, _> = grads.into_iter().collect();
    let mut check = GradCheck::default();
    for id in model.table_ids() {
        let (rows, cols) = {
            let t = model.table(id).unwrap();
            (t.rows(), t.cols())
        };
        for r in 0..rows {
            let analytic = reported.get(&(id, r));
            for c in 0..cols {
                let orig = model.table(id).unwrap().row(r)[c];
                model.table_mut(id).unwrap().row_mut(r)[c] = orig + h;
                let plus = loss_of(model, tree, ex);
                model.table_mut(id).unwrap().row_mut(r)[c] = orig - h;
                let minus = loss_of(model, tree, ex);
                model.table_mut(id).unwrap().row_mut(r)[c] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                match analytic {
                    Some(g) => {
                        let a = g[c];
                        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
                        check.max_rel_error = check.max_rel_error.max(rel);
                        check.entries += 1;
                    }
                    None => {
                        if numeric != 0.0 {
                            check.leaked += 1;
                        }
                    }
                }
            }
        }
    }
    check
}

/// Independent scoring of one stimulus set against a space: full sort of
/// all cosines, no shared code with the library's neighbour search.
pub fn brute_force_scores(space: &EmbeddingSpace, dataset: &AssociationDataset, n: usize, best: bool) -> (f64, f64) {
    let words = space.words();
    let norm = |v: &[f32]| v.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let mut total = 0.0;
    let mut evaluated = 0usize;
    for s in &dataset.stimuli {
        let Some(q) = words.iter().position(|w| *w == s.stimulus) else {
            continue;
        };
        let qv = space.vector(q);
        let mut ranked: Vec<(f64, usize)> = (0..words.len())
            .filter(|&i| i != q)
            .map(|i| {
                let v = space.vector(i);
                let dot: f64 = qv.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64).sum();
                let (nq, nv) = (norm(qv), norm(v));
                let cos = if nv == 0.0 { 0.0 } else { dot / (nq * nv) };
                (cos, i)
            })
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let found: u64 = ranked.iter().take(n).map(|&(_, i)| s.responses.get(&words[i]).copied().unwrap_or(0)).sum();
        total += found as f64 / if best { s.f_max as f64 } else { s.t as f64 };
        evaluated += 1;
    }
    let score = if evaluated == 0 { 0.0 } else { total / evaluated as f64 };
    (score, evaluated as f64 / dataset.stimuli.len() as f64)
}

/// Minimum weighted code length over every multiset of leaf depths that a
/// full binary tree with `n` leaves can have.
pub struct DepthProfiles {
    by_size: BTreeMap<usize, Vec<Vec<u32>>>,
}

impl DepthProfiles {
    pub fn up_to(max_leaves: usize) -> Self {
        let mut by_size = BTreeMap::new();
        for n in 2..=max_leaves {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            depth_multisets(n, 1, &mut cur, &mut out);
            by_size.insert(n, out);
        }
        DepthProfiles { by_size }
    }

    pub fn profiles(&self, n: usize) -> &[Vec<u32>] {
        &self.by_size[&n]
    }

    /// Optimal cost: heaviest counts on the shallowest leaves, for each profile.
    pub fn optimal_cost(&self, counts: &[u64]) -> u64 {
        let mut sorted = counts.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        self.by_size[&counts.len()]
            .iter()
            .map(|depths| sorted.iter().zip(depths).map(|(&c, &d)| c * d as u64).sum())
            .min()
            .unwrap()
    }
}

/// Nondecreasing depth vectors of length `n` (depths ≥ `min`) with Kraft sum
/// exactly one. Every such vector is realized by some full binary tree.
fn depth_multisets(n: usize, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let max_depth = (n - 1) as u32;
    let kraft = |v: &[u32]| -> u128 { v.iter().map(|&d| 1u128 << (max_depth - d)).sum() };
    let full = 1u128 << max_depth;
    if cur.len() == n {
        if kraft(cur) == full {
            out.push(cur.clone());
        }
        return;
    }
    for d in min..=max_depth {
        cur.push(d);
        // Remaining leaves each contribute at least 2^(max-max)=1.
        let remaining = (n - cur.len()) as u128;
        if kraft(cur) + remaining <= full {
            depth_multisets(n, d, cur, out);
        }
        cur.pop();
    }
}

pub const GROUP_A_CONTEXT: [&str; 3] = ["insurance", "coverage", "reform"];
pub const GROUP_B_CONTEXT: [&str; 3] = ["mental", "professional", "experiences"];

/// Two speaker groups (location usa vs uk) sharing a filler vocabulary.
/// Half the posts are filler text, in which all six context words also
/// occur. The other half are short topical posts in which a speaker mixes
/// "health" with their own group's context words.
pub fn separation_corpus<R: Rng>(target_tokens: usize, rng: &mut R) -> (Vec<Post>, HashMap<String, Demographics>) {
    let filler: Vec<String> = (0..300).map(|i| format!("f{i:03}")).collect();
    // Zipf-like weights over filler words.
    let weights: Vec<f64> = (0..filler.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
    let mut speakers = HashMap::new();
    for u in 0..200 {
        let mut d = Demographics::unknown();
        d.location = if u % 2 == 0 { Region::Usa } else { Region::Uk };
        speakers.insert(format!("user{u:03}"), d);
    }
    let shared: Vec<&str> = GROUP_A_CONTEXT.iter().chain(&GROUP_B_CONTEXT).copied().collect();
    let mut posts = Vec::new();
    let mut tokens = 0;
    let mut t = 0i64;
    while tokens < target_tokens {
        let u = rng.gen_range(0..200);
        let ctx = if u % 2 == 0 { GROUP_A_CONTEXT } else { GROUP_B_CONTEXT };
        let words: Vec<String> = if rng.gen_bool(0.5) {
            (0..rng.gen_range(6..12))
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        filler[rng.sample(&dist)].clone()
                    } else if rng.gen_bool(0.3) {
                        "health".to_owned()
                    } else {
                        (*ctx.choose(rng).unwrap()).to_owned()
                    }
                })
                .collect()
        } else {
            (0..rng.gen_range(12..24))
                .map(|_| {
                    if rng.gen_bool(0.05) {
                        (*shared.choose(rng).unwrap()).to_owned()
                    } else {
                        filler[rng.sample(&dist)].clone()
                    }
                })
                .collect()
        };
        tokens += words.len();
        t += 1;
        posts.push(Post {
            user_id: format!("user{u:03}"),
            created_at: t,
            body: words.join(" "),
        });
    }
    (posts, speakers)
}

/// Zipf-distributed synthetic text for throughput and curve checks.
pub fn zipf_corpus<R: Rng>(vocab: usize, tokens: usize, sentence: usize, rng: &mut R) -> Vec<Post> {
    let weights: Vec<f64> = (0..vocab).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
    let mut posts = Vec::new();
    let mut emitted = 0;
    while emitted < tokens {
        let body: Vec<String> = (0..sentence).map(|_| format!("w{}", rng.sample(&dist))).collect();
        emitted += sentence;
        posts.push(Post {
            user_id: format!("u{}", posts.len() % 50),
            created_at: posts.len() as i64,
            body: body.join(" "),
        });
    }
    posts
}

/// One labelled case from the extraction fixture file.
#[derive(Debug)]
pub struct ExtractionCase {
    pub name: String,
    pub line: usize,
    pub span_years: f64,
    pub posts: Vec<Post>,
    pub expect: String,
}

/// Fixture format: `case <name>`, `span <years>`, `expect <outcome>`, then
/// `post <created_at>\t<body>` lines; blank lines end a case.
pub fn parse_extraction_fixture(text: &str) -> Vec<ExtractionCase> {
    let mut cases = Vec::new();
    let mut cur: Option<ExtractionCase> = None;
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some(c) = cur.take() {
                cases.push(c);
            }
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let case = cur.get_or_insert_with(|| ExtractionCase {
            name: String::new(),
            line: i + 1,
            span_years: 10.0,
            posts: Vec::new(),
            expect: String::new(),
        });
        match key {
            "case" => case.name = rest.to_owned(),
            "span" => case.span_years = rest.parse().unwrap(),
            "expect" => case.expect = rest.to_owned(),
            "post" => {
                let (t, body) = rest.split_once('\t').expect("post <created_at>\\t<body>");
                case.posts.push(Post {
                    user_id: "fixture".into(),
                    created_at: t.parse().unwrap(),
                    body: body.to_owned(),
                });
            }
            other => panic!("line {}: unknown key {other:?}", i + 1),
        }
    }
    if let Some(c) = cur {
        cases.push(c);
    }
    cases
}

/// The outcome string a profile is compared against in the fixture file.
pub fn describe_outcome(outcome: &cdwe::demographics::ProfileOutcome) -> String {
    use cdwe::demographics::ProfileOutcome;
    match outcome {
        ProfileOutcome::Removed(r) => format!("removed {}", r.name()),
        ProfileOutcome::Profile(p) => {
            let d = &p.demographics;
            let age = match p.raw_age {
                Some(a) => format!("{}/{a}", d.age),
                None => d.age.to_string(),
            };
            format!("age={age} gender={} location={} religion={}", d.gender, d.location, d.religion)
        }
    }
}

/// Posts that each draw all their words from one of `topics` disjoint word
/// groups, so co-occurrence carries signal.
pub fn topic_corpus<R: Rng>(topics: usize, words_per_topic: usize, tokens: usize, sentence: usize, rng: &mut R) -> Vec<Post> {
    let mut posts = Vec::new();
    let mut emitted = 0;
    while emitted < tokens {
        let topic = rng.gen_range(0..topics);
        let body: Vec<String> = (0..sentence)
            .map(|_| format!("t{topic}w{}", rng.gen_range(0..words_per_topic)))
            .collect();
        emitted += sentence;
        posts.push(Post {
            user_id: format!("u{}", posts.len() % 50),
            created_at: posts.len() as i64,
            body: body.join(" "),
        });
    }
    posts
}

pub fn random_space<R: Rng>(rng: &mut R, words: usize, dim: usize) -> EmbeddingSpace {
    EmbeddingSpace::new(
        (0..words).map(|i| format!("w{i}")).collect(),
        dim,
        (0..words * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
    )
    .unwrap()
}

/// Stimuli drawn from the space (plus one out-of-vocabulary stimulus when
/// `with_oov`), responses a mix of in- and out-of-vocabulary words.
pub fn random_dataset<R: Rng>(rng: &mut R, space: &EmbeddingSpace, stimuli: usize, with_oov: bool) -> AssociationDataset {
    let mut words: Vec<&String> = space.words().iter().collect();
    words.shuffle(rng);
    let mut out = Vec::new();
    for (i, w) in words.iter().take(stimuli).enumerate() {
        let name = if with_oov && i == 0 { "zzz-missing".to_owned() } else { (*w).clone() };
        let mut responses = HashMap::new();
        for _ in 0..rng.gen_range(1..8) {
            let r = if rng.gen_bool(0.2) {
                format!("oov{}", rng.gen_range(0..5))
            } else {
                space.words()[rng.gen_range(0..space.len())].clone()
            };
            *responses.entry(r).or_insert(0) += rng.gen_range(1..6);
        }
        let total: u64 = responses.values().sum();
        let t = total + rng.gen_range(0..10);
        out.push(AssociationStimulus::new(name, t, responses).unwrap());
    }
    AssociationDataset {
        group: "g".into(),
        stimuli: out,
    }
}
