//! Rule-based extraction of self-reported demographics from post text.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use regex::Regex;

use super::{AgeGroup, Demographics, Gazetteer, Gender, Region, Religion, UserProfile};
use crate::corpus::{tokenize, Post};

/// Users stating an age below this are dropped from the corpus.
pub const MIN_AGE: u32 = 13;
/// Ages at or above this fall into the old group.
pub const OLD_AGE_THRESHOLD: u32 = 30;

fn age_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // End of input counts as a valid non-'e' follower of "old".
    RE.get_or_init(|| Regex::new(r"\b(?:i am|i'm) (\d+) (?:years|yrs|yr) old(?:[^e]|$)").unwrap())
}

fn gender_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b(?:i am|i'm) (?:a |an )?(boy|man|male|guy|girl|woman|female|gal)\b").unwrap()
    })
}

fn religion_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // "(a )?" only: "i'm an atheist" is intentionally not matched.
    RE.get_or_init(|| {
        Regex::new(
            r"\b(?:i am|i'm) (?:a )?(christian|muslim|secular|atheist|agnostic|hindu|buddhist)\b",
        )
        .unwrap()
    })
}

fn location_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"\b(?:i am from|i'm from|i live in) ([^,;:!?()\[\]\n"]*)"#).unwrap()
    })
}

/// Outcome of an extractor that may demand the user's removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extraction<T> {
    Value(T),
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgeOutcome {
    Unknown,
    Known { group: AgeGroup, age: u32 },
    /// At least one statement gives an age below [`MIN_AGE`].
    Excluded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RemovalReason {
    UnderAge,
    GenderConflict,
    MultipleReligions,
}

impl RemovalReason {
    pub fn name(self) -> &'static str {
        match self {
            RemovalReason::UnderAge => "under-age",
            RemovalReason::GenderConflict => "gender-conflict",
            RemovalReason::MultipleReligions => "multiple-religions",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProfileOutcome {
    Profile(UserProfile),
    Removed(RemovalReason),
}

fn age_group(age: u32) -> AgeGroup {
    if age < OLD_AGE_THRESHOLD {
        AgeGroup::Young
    } else {
        AgeGroup::Old
    }
}

/// Resolves a user's age from "i am N years old" statements.
///
/// Statements spanning more than `corpus_span_years` make the age unknown.
/// Otherwise the statement with the latest `created_at` wins; equal
/// timestamps resolve to the larger age so the result does not depend on
/// post order.
pub fn extract_age(posts: &[&Post], corpus_span_years: f64) -> AgeOutcome {
    let mut statements: Vec<(i64, u32)> = Vec::new();
    for post in posts {
        let body = post.body.to_lowercase();
        for caps in age_regex().captures_iter(&body) {
            // Digit runs too long for u32 are not plausible ages.
            if let Ok(age) = caps[1].parse::<u32>() {
                statements.push((post.created_at, age));
            }
        }
    }
    if statements.is_empty() {
        return AgeOutcome::Unknown;
    }
    if statements.iter().any(|&(_, age)| age < MIN_AGE) {
        return AgeOutcome::Excluded;
    }
    let min = statements.iter().map(|s| s.1).min().unwrap();
    let max = statements.iter().map(|s| s.1).max().unwrap();
    if f64::from(max - min) > corpus_span_years {
        return AgeOutcome::Unknown;
    }
    let (_, age) = statements.into_iter().max().unwrap();
    AgeOutcome::Known {
        group: age_group(age),
        age,
    }
}

/// Counts "i am a <term>" self-references. When both genders appear, the
/// majority is kept only if the minority is under one fifth of all matches.
pub fn extract_gender(posts: &[&Post]) -> Extraction<Gender> {
    let (mut male, mut female) = (0usize, 0usize);
    for post in posts {
        let body = post.body.to_lowercase();
        for caps in gender_regex().captures_iter(&body) {
            match &caps[1] {
                "boy" | "man" | "male" | "guy" => male += 1,
                _ => female += 1,
            }
        }
    }
    let total = male + female;
    let minority = male.min(female);
    if total == 0 {
        Extraction::Value(Gender::Unknown)
    } else if minority * 5 < total {
        Extraction::Value(if male > female {
            Gender::Male
        } else {
            Gender::Female
        })
    } else {
        Extraction::Remove
    }
}

/// The phrase following a location trigger ends at clause punctuation or at
/// a sentence-final period; periods inside a word ("u.s") are kept.
fn trim_sentence(phrase: &str) -> &str {
    let bytes = phrase.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'.' && bytes.get(i + 1).is_none_or(|c| c.is_ascii_whitespace()) {
            return &phrase[..i];
        }
    }
    phrase
}

/// Resolves "i am from X" / "i live in X" statements against the gazetteer.
/// Statements that resolve to more than one region overall give `Unknown`.
pub fn extract_location(posts: &[&Post], gazetteer: &Gazetteer) -> Region {
    let mut regions = BTreeSet::new();
    for post in posts {
        let body = post.body.to_lowercase();
        for caps in location_regex().captures_iter(&body) {
            let phrase = tokenize(trim_sentence(&caps[1])).tokens;
            if let Some(hit) = gazetteer.resolve_phrase(&phrase) {
                regions.extend(hit.iter().copied());
            }
        }
    }
    match regions.len() {
        1 => regions.into_iter().next().unwrap(),
        _ => Region::Unknown,
    }
}

/// Secular, atheist and agnostic map to one non-religious group. Users naming
/// more than one group are removed.
pub fn extract_religion(posts: &[&Post]) -> Extraction<Religion> {
    let mut groups = HashSet::new();
    for post in posts {
        let body = post.body.to_lowercase();
        for caps in religion_regex().captures_iter(&body) {
            groups.insert(match &caps[1] {
                "christian" => Religion::Christian,
                "muslim" => Religion::Muslim,
                "hindu" => Religion::Hindu,
                "buddhist" => Religion::Buddhist,
                _ => Religion::NonReligious,
            });
        }
    }
    match groups.len() {
        0 => Extraction::Value(Religion::Unknown),
        1 => Extraction::Value(groups.into_iter().next().unwrap()),
        _ => Extraction::Remove,
    }
}

/// Runs all four extractors over one user's posts.
pub fn build_profile(
    user_id: &str,
    posts: &[&Post],
    corpus_span_years: f64,
    gazetteer: &Gazetteer,
) -> ProfileOutcome {
    let (age, raw_age) = match extract_age(posts, corpus_span_years) {
        AgeOutcome::Excluded => return ProfileOutcome::Removed(RemovalReason::UnderAge),
        AgeOutcome::Unknown => (AgeGroup::Unknown, None),
        AgeOutcome::Known { group, age } => (group, Some(age)),
    };
    let gender = match extract_gender(posts) {
        Extraction::Value(g) => g,
        Extraction::Remove => return ProfileOutcome::Removed(RemovalReason::GenderConflict),
    };
    let religion = match extract_religion(posts) {
        Extraction::Value(r) => r,
        Extraction::Remove => return ProfileOutcome::Removed(RemovalReason::MultipleReligions),
    };
    let location = extract_location(posts, gazetteer);
    ProfileOutcome::Profile(UserProfile {
        user_id: user_id.to_owned(),
        demographics: Demographics {
            age,
            gender,
            location,
            religion,
        },
        raw_age,
    })
}

/// Users with at least `min_known` known attributes.
pub fn select_subset(profiles: &[UserProfile], min_known: usize) -> BTreeSet<String> {
    profiles
        .iter()
        .filter(|p| p.known_count() >= min_known)
        .map(|p| p.user_id.clone())
        .collect()
}
