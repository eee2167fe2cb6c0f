//! Post ingestion, tokenization, bot filtering and corpus splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One user-authored text unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub user_id: String,
    pub created_at: i64,
    pub body: String,
}

/// Result of reading a post stream: the well-formed posts and the number of
/// lines that could not be parsed.
#[derive(Clone, Debug, Default)]
pub struct LoadedPosts {
    pub posts: Vec<Post>,
    pub skipped: usize,
}

/// Reads line-delimited JSON records. Blank lines are ignored; lines that do
/// not parse, or that carry an empty `user_id`, are counted and skipped.
pub fn load_posts<R: BufRead>(reader: R) -> Result<LoadedPosts> {
    let mut loaded = LoadedPosts::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Post>(&line) {
            Ok(post) if !post.user_id.is_empty() => loaded.posts.push(post),
            _ => loaded.skipped += 1,
        }
    }
    Ok(loaded)
}

pub fn load_posts_from_path(path: &Path) -> Result<LoadedPosts> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    load_posts(BufReader::new(file))
}

pub fn write_posts<W: Write>(mut writer: W, posts: &[Post]) -> Result<()> {
    for post in posts {
        let line = serde_json::to_string(post)
            .map_err(|e| Error::InvalidArgument(format!("cannot serialize post: {e}")))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Lowercase word tokens of a post body.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Lowercases, splits on whitespace and trims non-alphanumeric characters
/// from both ends of every token. Internal apostrophes and hyphens survive.
pub fn tokenize(body: &str) -> TokenSequence {
    let tokens = body
        .split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_owned())
            }
        })
        .collect();
    TokenSequence { tokens }
}

/// Reads a bot list: one user id per line, `#` comment lines and blank lines
/// ignored.
pub fn load_bot_list(path: &Path) -> Result<HashSet<String>> {
    if !path.exists() {
        return Err(Error::MissingBotList(path.to_owned()));
    }
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    let mut bots = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let name = line.trim();
        if name.is_empty() || name.starts_with('#') {
            continue;
        }
        bots.insert(name.to_owned());
    }
    Ok(bots)
}

pub fn filter_bots(users: &BTreeSet<String>, bots: &HashSet<String>) -> BTreeSet<String> {
    users
        .iter()
        .filter(|u| !bots.contains(u.as_str()))
        .cloned()
        .collect()
}

/// Drops every post authored by a listed bot.
pub fn remove_bot_posts(posts: Vec<Post>, bots: &HashSet<String>) -> Vec<Post> {
    posts
        .into_iter()
        .filter(|p| !bots.contains(&p.user_id))
        .collect()
}

/// Groups posts by author, keeping stream order within each user.
pub fn posts_by_user(posts: &[Post]) -> BTreeMap<&str, Vec<&Post>> {
    let mut by_user: BTreeMap<&str, Vec<&Post>> = BTreeMap::new();
    for post in posts {
        by_user.entry(post.user_id.as_str()).or_default().push(post);
    }
    by_user
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SplitPart {
    Train,
    Val,
    Test,
}

impl SplitPart {
    pub fn name(self) -> &'static str {
        match self {
            SplitPart::Train => "train",
            SplitPart::Val => "val",
            SplitPart::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(SplitPart::Train),
            "val" => Some(SplitPart::Val),
            "test" => Some(SplitPart::Test),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// Disjoint train/validation/test sets of post identifiers. A post's
/// identifier is its position in the loaded corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: BTreeSet<usize>,
    pub val: BTreeSet<usize>,
    pub test: BTreeSet<usize>,
    pub seed: u64,
}

impl CorpusSplit {
    pub fn part_of(&self, post_id: usize) -> Option<SplitPart> {
        if self.train.contains(&post_id) {
            Some(SplitPart::Train)
        } else if self.val.contains(&post_id) {
            Some(SplitPart::Val)
        } else if self.test.contains(&post_id) {
            Some(SplitPart::Test)
        } else {
            None
        }
    }

    /// Writes `<post_id>\t<part>` lines ordered by post id.
    pub fn write_manifest<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut rows: Vec<(usize, SplitPart)> = Vec::new();
        rows.extend(self.train.iter().map(|&i| (i, SplitPart::Train)));
        rows.extend(self.val.iter().map(|&i| (i, SplitPart::Val)));
        rows.extend(self.test.iter().map(|&i| (i, SplitPart::Test)));
        rows.sort_unstable();
        for (id, part) in rows {
            writeln!(writer, "{id}\t{}", part.name())?;
        }
        Ok(())
    }

    /// Reads a manifest written by [`CorpusSplit::write_manifest`]. The seed is
    /// not part of the manifest and must be supplied.
    pub fn read_manifest<R: BufRead>(reader: R, seed: u64) -> Result<Self> {
        let mut split = CorpusSplit {
            seed,
            ..Default::default()
        };
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (id, part) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno + 1, "expected <post_id>\\t<part>"))?;
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(lineno + 1, format!("bad post id {id:?}")))?;
            let part = SplitPart::parse(part)
                .ok_or_else(|| Error::parse(lineno + 1, format!("bad split name {part:?}")))?;
            if split.part_of(id).is_some() {
                return Err(Error::parse(lineno + 1, format!("post {id} listed twice")));
            }
            match part {
                SplitPart::Train => split.train.insert(id),
                SplitPart::Val => split.val.insert(id),
                SplitPart::Test => split.test.insert(id),
            };
        }
        Ok(split)
    }
}

/// Samples posts uniformly without replacement into three disjoint sets.
pub fn make_splits(corpus_size: usize, sizes: SplitSizes, seed: u64) -> Result<CorpusSplit> {
    if sizes.total() > corpus_size {
        return Err(Error::SplitTooLarge {
            requested: sizes.total(),
            available: corpus_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, corpus_size, sizes.total()).into_vec();
    let (train, rest) = picked.split_at(sizes.train);
    let (val, test) = rest.split_at(sizes.val);
    Ok(CorpusSplit {
        train: train.iter().copied().collect(),
        val: val.iter().copied().collect(),
        test: test.iter().copied().collect(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).tokens
    }

    #[test]
    fn load_three_lines() {
        let input = r#"{"user_id":"a","created_at":1,"body":"hi"}
{"user_id":"b","created_at":2,"body":"there"}
{"user_id":"a","created_at":3,"body":""}
"#;
        let loaded = load_posts(input.as_bytes()).unwrap();
        assert_eq!(loaded.posts.len(), 3);
        assert_eq!(loaded.skipped, 0);
        assert_eq!(loaded.posts[1].user_id, "b");
    }

    #[test]
    fn load_empty_stream() {
        let loaded = load_posts("".as_bytes()).unwrap();
        assert!(loaded.posts.is_empty());
        assert_eq!(loaded.skipped, 0);
    }

    #[test]
    fn truncated_line_is_skipped() {
        let input = r#"{"user_id":"a","created_at":1,"body":"hi"}
{"user_id":"b","created_at":2,"bo
{"user_id":"c","created_at":3,"body":"x"}
"#;
        let loaded = load_posts(input.as_bytes()).unwrap();
        assert_eq!(loaded.posts.len(), 2);
        assert_eq!(loaded.skipped, 1);
        assert_eq!(loaded.posts[1].user_id, "c");
    }

    #[test]
    fn empty_user_id_is_malformed() {
        let input = r#"{"user_id":"","created_at":1,"body":"hi"}"#;
        let loaded = load_posts(input.as_bytes()).unwrap();
        assert_eq!(loaded.skipped, 1);
    }

    #[test]
    fn unreadable_path_is_fatal() {
        let err = load_posts_from_path(Path::new("/nonexistent/posts.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Read { .. }));
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("I'm 25 Years old."), ["i'm", "25", "years", "old"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("Health-care, (really)!"), ["health-care", "really"]);
        assert!(toks(" -- ... !! ").is_empty());
    }

    #[test]
    fn filter_bots_examples() {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let bots = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<HashSet<_>>();
        assert_eq!(filter_bots(&set(&["a", "b", "c"]), &bots(&["b"])), set(&["a", "c"]));
        assert_eq!(filter_bots(&set(&["a"]), &bots(&[])), set(&["a"]));
        assert_eq!(filter_bots(&set(&[]), &bots(&["b"])), set(&[]));
    }

    #[test]
    fn bot_list_parsing_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bots.txt");
        std::fs::write(&path, "# known bots\nAutoModerator\n\n  wikibot \n").unwrap();
        let bots = load_bot_list(&path).unwrap();
        assert_eq!(bots.len(), 2);
        assert!(bots.contains("wikibot"));

        let missing = dir.path().join("nope.txt");
        let err = load_bot_list(&missing).unwrap_err();
        assert!(matches!(err, Error::MissingBotList(_)));
        assert!(err.to_string().contains("nope.txt"));
    }

    #[test]
    fn splits_examples() {
        let sizes = SplitSizes {
            train: 50,
            val: 10,
            test: 10,
        };
        let a = make_splits(100, sizes, 7).unwrap();
        let b = make_splits(100, sizes, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 50);

        let empty = make_splits(100, SplitSizes::default(), 7).unwrap();
        assert!(empty.train.is_empty() && empty.val.is_empty() && empty.test.is_empty());

        assert!(matches!(
            make_splits(10, sizes, 7),
            Err(Error::SplitTooLarge { .. })
        ));
    }

    #[test]
    fn manifest_round_trip() {
        let split = make_splits(
            30,
            SplitSizes {
                train: 10,
                val: 5,
                test: 5,
            },
            3,
        )
        .unwrap();
        let mut buf = Vec::new();
        split.write_manifest(&mut buf).unwrap();
        let back = CorpusSplit::read_manifest(buf.as_slice(), 3).unwrap();
        assert_eq!(back, split);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.to_string());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_have_no_whitespace(s in "\\PC{0,60}") {
            for t in tokenize(&s).tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn splits_are_disjoint(seed in any::<u64>(), n in 0usize..200, a in 0usize..80, b in 0usize..60, c in 0usize..60) {
            let sizes = SplitSizes { train: a, val: b, test: c };
            match make_splits(n, sizes, seed) {
                Ok(split) => {
                    prop_assert!(split.train.is_disjoint(&split.val));
                    prop_assert!(split.train.is_disjoint(&split.test));
                    prop_assert!(split.val.is_disjoint(&split.test));
                    prop_assert!(split.train.iter().chain(&split.val).chain(&split.test).all(|&i| i < n));
                    prop_assert_eq!(split.train.len() + split.val.len() + split.test.len(), sizes.total());
                }
                Err(_) => prop_assert!(sizes.total() > n),
            }
        }

        #[test]
        fn posts_round_trip(posts in proptest::collection::vec(
            ("[a-z0-9_]{1,12}", any::<i64>(), "\\PC{0,40}").prop_map(|(u, t, b)| Post { user_id: u, created_at: t, body: b }),
            0..20,
        )) {
            let mut buf = Vec::new();
            write_posts(&mut buf, &posts).unwrap();
            let loaded = load_posts(buf.as_slice()).unwrap();
            prop_assert_eq!(loaded.skipped, 0);
            prop_assert_eq!(loaded.posts, posts);
        }
    }
}
