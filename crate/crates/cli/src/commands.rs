use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use cdwe::assoc::{eval_matrix, AssociationDataset, Metric};
use cdwe::corpus::{load_bot_list, load_posts_from_path, make_splits, remove_bot_posts, CorpusSplit, Post, SplitSizes};
use cdwe::demographics::{read_profiles, select_subset, write_profiles, Attribute, DemographicValue, Demographics, Gazetteer};
use cdwe::pipeline::{extract_profiles, prepare_corpus, train_model};
use cdwe::skipgram::{ModelKind, Progress, TrainingConfig};
use cdwe::store::{compose_for_user, compose_vectors_for_user, neighbor_overlap, EmbeddingSpace, Selection, TrainedModel, MAGIC};

use crate::config::{existing, require, LoadedConfig};
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::{Cli, Command};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = LoadedConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Extract(a) => extract(&config, a),
        Command::Subset(a) => subset(&config, a),
        Command::Split(a) => split(&config, a),
        Command::Train(a) => train(&config, a),
        Command::Neighbors(a) => neighbors(&config, a),
        Command::Overlap(a) => overlap(&config, a),
        Command::Compose(a) => compose(&config, a),
        Command::Export(a) => export(&config, a),
        Command::EvalAssoc(a) => eval_assoc(&config, a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush()?;
    Ok(())
}

fn display(p: &Option<PathBuf>) -> serde_json::Value {
    p.as_ref().map_or(serde_json::Value::Null, |p| json!(p))
}

fn load_posts(path: &Path, bots: Option<&Path>) -> Result<(Vec<Post>, usize, usize), CliError> {
    let loaded = load_posts_from_path(path)?;
    let total = loaded.posts.len();
    let posts = match bots {
        Some(b) => remove_bot_posts(loaded.posts, &load_bot_list(b)?),
        None => loaded.posts,
    };
    let removed = total - posts.len();
    Ok((posts, loaded.skipped, removed))
}

fn parse_value(s: &str) -> Result<DemographicValue, CliError> {
    let (attr, name) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("expected attribute=value, found {s:?}")))?;
    let attribute = Attribute::parse(attr.trim())
        .ok_or_else(|| CliError::config(format!("unknown attribute {attr:?}")))?;
    DemographicValue::parse(attribute, name.trim())
        .ok_or_else(|| CliError::config(format!("unknown {attribute} value {name:?}")))
}

fn parse_attribute(s: &str) -> Result<Attribute, CliError> {
    Attribute::parse(s.trim()).ok_or_else(|| CliError::config(format!("unknown attribute {s:?}")))
}

fn parse_demographics(s: &str) -> Result<Demographics, CliError> {
    let mut d = Demographics::unknown();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        d.set(parse_value(part)?);
    }
    Ok(d)
}

fn is_binary_model(path: &Path) -> Result<bool, CliError> {
    let mut head = [0u8; 4];
    let mut f = open(path)?;
    let n = f.read(&mut head)?;
    Ok(n == 4 && &head == MAGIC)
}

/// A binary model (generic space, or `G + W_v` when a value is given) or a
/// text space file.
fn load_space(path: &Path, value: Option<&str>) -> Result<EmbeddingSpace, CliError> {
    if is_binary_model(path)? {
        let model = TrainedModel::load(path)?;
        match value {
            Some(v) => Ok(model.value_space(parse_value(v)?)?),
            None => Ok(model.generic_space()),
        }
    } else {
        if value.is_some() {
            return Err(CliError::config(format!(
                "--value needs a binary dmat model, {} is a text space",
                path.display()
            )));
        }
        Ok(EmbeddingSpace::load_text(path)?)
    }
}

fn write_optional_manifest(config: &LoadedConfig, m: &Manifest, flag: Option<PathBuf>, command: &str) -> Result<(), CliError> {
    if flag.is_none() && config.paths().output_dir.is_none() {
        return Ok(());
    }
    m.write_to(&config.output(flag, &format!("{command}.manifest.json"))?)
}

fn extract(config: &LoadedConfig, a: crate::ExtractArgs) -> Result<(), CliError> {
    let paths = config.paths();
    let corpus = existing(require(a.corpus, &paths.corpus, "--corpus")?, "corpus")?;
    let bots = a.bots.or_else(|| paths.bots.clone());
    let gazetteer_path = a.gazetteer.or_else(|| paths.gazetteer.clone());
    let out = config.output(a.out, "profiles.tsv")?;

    let gazetteer = match &gazetteer_path {
        Some(p) => Gazetteer::from_path(&existing(p.clone(), "gazetteer")?)?,
        None => Gazetteer::builtin(),
    };
    let (posts, skipped, bot_posts) = load_posts(&corpus, bots.as_deref())?;
    let summary = extract_profiles(&posts, &gazetteer);
    let mut w = create(&out)?;
    write_profiles(&mut w, &summary.profiles)?;
    finish(w)?;

    let mut m = Manifest::new(
        "extract",
        config.path.as_deref(),
        json!({"corpus": corpus, "bots": display(&bots), "gazetteer": display(&gazetteer_path)}),
        None,
    );
    m.input(&corpus)?;
    for p in [&bots, &gazetteer_path].into_iter().flatten() {
        m.input(p)?;
    }
    m.output(&out)?;
    let mut by_known = [0usize; 5];
    for p in &summary.profiles {
        by_known[p.known_count()] += 1;
    }
    m.results = json!({
        "posts": posts.len(),
        "malformed_lines": skipped,
        "bot_posts_removed": bot_posts,
        "profiles": summary.profiles.len(),
        "users_removed": summary.removed,
        "profiles_by_known_count": by_known,
    });
    m.write_beside(&out)?;
    eprintln!("{}", m.results);
    Ok(())
}

fn subset(config: &LoadedConfig, a: crate::SubsetArgs) -> Result<(), CliError> {
    let profiles_path = existing(require(a.profiles, &config.paths().profiles, "--profiles")?, "profiles")?;
    let min_known = require(a.min_known, &config.config.subset.min_known, "--min-known")?;
    if min_known > 4 {
        return Err(CliError::config(format!("--min-known must be 0-4, found {min_known}")));
    }
    let out = config.output(a.out, &format!("users-{min_known}dem.txt"))?;
    let profiles = read_profiles(open(&profiles_path)?)?;
    let users = select_subset(&profiles, min_known);
    let mut w = create(&out)?;
    for u in &users {
        writeln!(w, "{u}")?;
    }
    finish(w)?;
    let mut m = Manifest::new("subset", config.path.as_deref(), json!({"profiles": profiles_path, "min_known": min_known}), None);
    m.input(&profiles_path)?;
    m.output(&out)?;
    m.results = json!({"users": users.len(), "profiles": profiles.len()});
    m.write_beside(&out)?;
    Ok(())
}

fn split(config: &LoadedConfig, a: crate::SplitArgs) -> Result<(), CliError> {
    let c = &config.config.split;
    let corpus = existing(require(a.corpus, &config.paths().corpus, "--corpus")?, "corpus")?;
    let sizes = SplitSizes {
        train: require(a.train, &c.train, "--train")?,
        val: require(a.val, &c.val, "--val")?,
        test: require(a.test, &c.test, "--test")?,
    };
    let seed = require(a.seed, &c.seed, "--seed")?;
    let out = config.output(a.out, "split.tsv")?;
    let loaded = load_posts_from_path(&corpus)?;
    let split = make_splits(loaded.posts.len(), sizes, seed)?;
    let mut w = create(&out)?;
    split.write_manifest(&mut w)?;
    finish(w)?;
    let mut m = Manifest::new(
        "split",
        config.path.as_deref(),
        json!({"corpus": corpus, "train": sizes.train, "val": sizes.val, "test": sizes.test}),
        Some(seed),
    );
    m.input(&corpus)?;
    m.output(&out)?;
    m.results = json!({"posts": loaded.posts.len(), "malformed_lines": loaded.skipped});
    m.write_beside(&out)?;
    Ok(())
}

fn train(config: &LoadedConfig, a: crate::TrainArgs) -> Result<(), CliError> {
    let paths = config.paths();
    let t = &config.config.training;
    let corpus = existing(require(a.corpus, &paths.corpus, "--corpus")?, "corpus")?;
    let bots = a.bots.or_else(|| paths.bots.clone());
    let profiles_path = a.profiles.or_else(|| paths.profiles.clone());
    let arch = a.arch.or_else(|| t.arch.clone()).unwrap_or_else(|| "generic".into());
    let kind = ModelKind::parse(&arch)
        .ok_or_else(|| CliError::config(format!("unknown --arch {arch:?} (generic, dvec or dmat)")))?;
    let attribute = match (kind, a.attribute.or_else(|| t.attribute.clone())) {
        (ModelKind::DemographicMatrices, Some(s)) => Some(parse_attribute(&s)?),
        (ModelKind::DemographicMatrices, None) => {
            return Err(CliError::config("--arch dmat needs --attribute"))
        }
        (_, Some(_)) => return Err(CliError::config("--attribute only applies to --arch dmat")),
        (_, None) => None,
    };
    let defaults = TrainingConfig::default();
    let training = TrainingConfig {
        dim: a.dim.or(t.dim).unwrap_or(defaults.dim),
        initial_lr: a.lr.or(t.lr).unwrap_or(defaults.initial_lr),
        window: a.window.or(t.window).unwrap_or(defaults.window),
        epochs: a.epochs.or(t.epochs).unwrap_or(defaults.epochs),
        min_count: a.min_count.or(t.min_count).unwrap_or(defaults.min_count),
        seed: a.seed.or(t.seed).unwrap_or(defaults.seed),
        workers: a.workers.or(t.workers).unwrap_or(defaults.workers),
        report_every: a.report_every.or(t.report_every).unwrap_or(defaults.report_every),
    };
    training.validate()?;
    let default_name = match attribute {
        Some(attr) => format!("model-{}-{attr}.cdwe", kind.name()),
        None => format!("model-{}.cdwe", kind.name()),
    };
    let out = config.output(a.out, &default_name)?;

    let loaded = load_posts_from_path(&corpus)?;
    let mut posts = loaded.posts;
    if let Some(sp) = &a.split {
        let split = CorpusSplit::read_manifest(open(&existing(sp.clone(), "split manifest")?)?, 0)?;
        posts = posts
            .into_iter()
            .enumerate()
            .filter(|(i, _)| split.train.contains(i))
            .map(|(_, p)| p)
            .collect();
    }
    if let Some(b) = &bots {
        posts = remove_bot_posts(posts, &load_bot_list(b)?);
    }
    let speakers: HashMap<String, Demographics> = match &profiles_path {
        Some(p) => read_profiles(open(&existing(p.clone(), "profiles")?)?)?
            .into_iter()
            .map(|p| (p.user_id, p.demographics))
            .collect(),
        None => {
            if kind != ModelKind::Generic {
                eprintln!("warning: no --profiles given, every speaker is unknown");
            }
            HashMap::new()
        }
    };
    let prepared = prepare_corpus(&posts, &speakers, training.min_count)?;
    let stderr = io::stderr();
    let mut report_line = |p: &Progress| {
        let mut line = serde_json::to_value(p).expect("progress serializes");
        line["event"] = json!("progress");
        let _ = writeln!(stderr.lock(), "{line}");
    };
    let progress: Option<cdwe::skipgram::ProgressFn<'_>> =
        (training.report_every > 0).then_some(&mut report_line as cdwe::skipgram::ProgressFn<'_>);
    let (model, report) = train_model(&prepared, kind, attribute, &training, progress)?;
    model.save(&out)?;

    let mut m = Manifest::new(
        "train",
        config.path.as_deref(),
        json!({
            "corpus": corpus,
            "bots": display(&bots),
            "profiles": display(&profiles_path),
            "split": display(&a.split),
            "arch": kind.name(),
            "attribute": attribute.map(|a| a.name()),
            "dim": training.dim,
            "lr": training.initial_lr,
            "window": training.window,
            "epochs": training.epochs,
            "min_count": training.min_count,
            "seed": training.seed,
            "workers": training.workers,
        }),
        Some(training.seed),
    );
    m.input(&corpus)?;
    for p in [&bots, &profiles_path, &a.split].into_iter().flatten() {
        m.input(p)?;
    }
    m.output(&out)?;
    m.results = json!({
        "vocabulary": prepared.vocab.len(),
        "sequences": prepared.sequences.len(),
        "report": report,
    });
    m.write_beside(&out)?;
    eprintln!("{}", json!({"event": "done", "report": report}));
    Ok(())
}

fn neighbors(config: &LoadedConfig, a: crate::NeighborsArgs) -> Result<(), CliError> {
    let model = existing(a.model, "model")?;
    let space = load_space(&model, a.value.as_deref())?;
    let nn = space.nearest_neighbors(&a.word, a.n)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (w, c) in &nn {
        writeln!(out, "{w}\t{c:.6}")?;
    }
    let mut m = Manifest::new(
        "neighbors",
        config.path.as_deref(),
        json!({"model": model, "word": a.word, "n": a.n, "value": a.value}),
        None,
    );
    m.input(&model)?;
    m.results = json!(nn);
    write_optional_manifest(config, &m, a.manifest, "neighbors")
}

fn overlap(config: &LoadedConfig, a: crate::OverlapArgs) -> Result<(), CliError> {
    let pa = existing(a.a, "model")?;
    let pb = existing(a.b, "model")?;
    let sa = load_space(&pa, a.a_value.as_deref())?;
    let sb = load_space(&pb, a.b_value.as_deref())?;
    let fraction = neighbor_overlap(&a.word, &sa, &sb, a.n)?;
    println!("{fraction}");
    let mut m = Manifest::new(
        "overlap",
        config.path.as_deref(),
        json!({"a": pa, "b": pb, "a_value": a.a_value, "b_value": a.b_value, "word": a.word, "n": a.n}),
        None,
    );
    m.input(&pa)?;
    m.input(&pb)?;
    m.results = json!({"overlap": fraction});
    write_optional_manifest(config, &m, a.manifest, "overlap")
}

fn compose(config: &LoadedConfig, a: crate::ComposeArgs) -> Result<(), CliError> {
    let demographics = match (&a.profiles, &a.user, &a.demographics) {
        (Some(p), Some(user), _) => read_profiles(open(&existing(p.clone(), "profiles")?)?)?
            .into_iter()
            .find(|p| &p.user_id == user)
            .map(|p| p.demographics)
            .ok_or_else(|| CliError::data(format!("user {user:?} not in {}", p.display())))?,
        (_, _, Some(d)) => parse_demographics(d)?,
        _ => Demographics::unknown(),
    };
    let out = config.output(a.out, "composed.txt")?;
    let mut inputs: Vec<PathBuf> = Vec::new();
    let composed = if let Some(dvec) = &a.dvec {
        let path = existing(dvec.clone(), "dvec model")?;
        let model = TrainedModel::load(&path)?;
        inputs.push(path);
        compose_vectors_for_user(&model, &demographics)?
    } else {
        let generic = match &a.generic {
            Some(p) => {
                let path = existing(p.clone(), "generic model")?;
                inputs.push(path.clone());
                Some(TrainedModel::load(&path)?)
            }
            None => None,
        };
        let mut mats = Vec::new();
        for p in &a.dmat {
            let path = existing(p.clone(), "dmat model")?;
            mats.push(TrainedModel::load(&path)?);
            inputs.push(path);
        }
        let attributes = if a.attributes.is_empty() {
            mats.iter().filter_map(|m| m.model.attribute()).collect()
        } else {
            a.attributes.iter().map(|s| parse_attribute(s)).collect::<Result<Vec<_>, _>>()?
        };
        let selection = Selection {
            generic: generic.is_some(),
            attributes,
        };
        let refs: Vec<&TrainedModel> = mats.iter().collect();
        compose_for_user(generic.as_ref(), &refs, &demographics, &selection)?
    };
    composed.space.save_text(&out)?;

    let parts: Vec<String> = composed
        .parts
        .iter()
        .map(|p| match &p.selection {
            cdwe::store::PartSelection::Generic => format!("{}:generic", p.source),
            cdwe::store::PartSelection::Value(v) => format!("{}={}", p.source, v.name()),
            cdwe::store::PartSelection::SpeakerValues(_) => format!("{}:speaker", p.source),
        })
        .collect();
    let mut m = Manifest::new(
        "compose",
        config.path.as_deref(),
        json!({
            "generic": display(&a.generic),
            "dmat": a.dmat,
            "dvec": display(&a.dvec),
            "demographics": demographics.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "attributes": a.attributes,
        }),
        None,
    );
    for p in inputs.iter().chain(a.profiles.iter()) {
        m.input(p)?;
    }
    m.output(&out)?;
    m.results = json!({"dim": composed.dim(), "parts": parts});
    m.write_beside(&out)?;
    Ok(())
}

fn export(config: &LoadedConfig, a: crate::ExportArgs) -> Result<(), CliError> {
    let model = existing(a.model, "model")?;
    let space = load_space(&model, a.value.as_deref())?;
    let out = config.output(a.out, "space.txt")?;
    space.save_text(&out)?;
    let mut m = Manifest::new("export", config.path.as_deref(), json!({"model": model, "value": a.value}), None);
    m.input(&model)?;
    m.output(&out)?;
    m.write_beside(&out)?;
    Ok(())
}

fn eval_assoc(config: &LoadedConfig, a: crate::EvalAssocArgs) -> Result<(), CliError> {
    let metrics = a.metrics.iter().map(|s| Metric::parse(s.trim())).collect::<Result<Vec<_>, _>>()?;
    let mut datasets = BTreeMap::new();
    for p in &a.dataset {
        let ds = AssociationDataset::load(&existing(p.clone(), "dataset")?)?;
        if datasets.contains_key(&ds.group) {
            return Err(CliError::config(format!("two datasets for group {:?}", ds.group)));
        }
        datasets.insert(ds.group.clone(), ds);
    }
    let mut space_paths: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in &a.group_space {
        let (g, p) = entry
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("expected GROUP=PATH, found {entry:?}")))?;
        space_paths.insert(g.to_owned(), existing(PathBuf::from(p), "space")?);
    }
    if let Some(p) = &a.space {
        let p = existing(p.clone(), "space")?;
        for g in datasets.keys() {
            space_paths.entry(g.clone()).or_insert_with(|| p.clone());
        }
    }
    if space_paths.is_empty() {
        return Err(CliError::config("eval-assoc needs --space or --group-space"));
    }
    // Load each distinct file once.
    let mut cache: BTreeMap<PathBuf, EmbeddingSpace> = BTreeMap::new();
    for p in space_paths.values() {
        if !cache.contains_key(p) {
            cache.insert(p.clone(), load_space(p, None)?);
        }
    }
    let spaces: BTreeMap<String, &EmbeddingSpace> =
        space_paths.iter().map(|(g, p)| (g.clone(), &cache[p])).collect();
    let table = eval_matrix(&[(a.name.clone(), spaces)], &datasets, &metrics)?;

    let target = match (&a.out, &config.paths().output_dir) {
        (None, None) => None,
        (flag, _) => Some(config.output(flag.clone(), "assoc.tsv")?),
    };
    let Some(out) = target else {
        table.write_tsv(io::stdout().lock())?;
        return Ok(());
    };
    let mut w = create(&out)?;
    table.write_tsv(&mut w)?;
    finish(w)?;
    let mut summary_path = out.as_os_str().to_owned();
    summary_path.push(".summary.json");
    let summary_path = PathBuf::from(summary_path);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&table.to_json()).expect("json") + "\n")
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", summary_path.display())))?;

    let mut m = Manifest::new(
        "eval-assoc",
        config.path.as_deref(),
        json!({"datasets": a.dataset, "spaces": space_paths, "name": a.name, "metrics": a.metrics}),
        None,
    );
    for p in a.dataset.iter().chain(cache.keys()) {
        m.input(p)?;
    }
    m.output(&out)?;
    m.output(&summary_path)?;
    m.results = table.to_json();
    m.write_beside(&out)?;
    Ok(())
}
