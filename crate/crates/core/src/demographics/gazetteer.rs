use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::Region;
use crate::corpus::tokenize;
use crate::error::{Error, Result};

/// Modifiers removed from a location phrase before lookup.
pub const RELATIVE_WORDS: [&str; 6] = [
    "northern", "western", "eastern", "southern", "downtown", "suburbs",
];

const BUILTIN: &str = include_str!("../../data/gazetteer.tsv");

/// Lexicon from place strings to regions.
///
/// Place strings are stored in token form (the output of [`tokenize`] joined
/// by single spaces) so they compare directly against tokenized post text.
#[derive(Clone, Debug, Default)]
pub struct Gazetteer {
    places: HashMap<String, BTreeSet<Region>>,
    max_tokens: usize,
}

impl Gazetteer {
    /// The lexicon shipped in `data/gazetteer.tsv`.
    pub fn builtin() -> Self {
        Self::from_reader(BUILTIN.as_bytes()).expect("builtin gazetteer is well-formed")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_reader(BufReader::new(file))
    }

    /// Parses `<region>\t<place>` lines; `#` lines and blank lines are
    /// ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut gazetteer = Gazetteer::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (region, place) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected <region>\\t<place>"))?;
            let region = Region::parse(region.trim())
                .filter(|r| r.is_known())
                .ok_or_else(|| Error::parse(i + 1, format!("unknown region {region:?}")))?;
            gazetteer.insert(region, place);
        }
        Ok(gazetteer)
    }

    pub fn insert(&mut self, region: Region, place: &str) {
        let tokens = tokenize(place).tokens;
        if tokens.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(tokens.len());
        self.places
            .entry(tokens.join(" "))
            .or_default()
            .insert(region);
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn regions(&self, place: &str) -> Option<&BTreeSet<Region>> {
        self.places.get(place)
    }

    /// Regions of the longest gazetteer entry that is a prefix of `tokens`.
    pub fn longest_prefix_match(&self, tokens: &[&str]) -> Option<&BTreeSet<Region>> {
        let longest = self.max_tokens.min(tokens.len());
        (1..=longest)
            .rev()
            .find_map(|n| self.places.get(&tokens[..n].join(" ")))
    }

    /// Resolves a phrase that followed a location trigger. Leading `the` is
    /// dropped; the phrase is looked up as written first and, failing that,
    /// again with every relative modifier removed.
    pub fn resolve_phrase(&self, phrase: &[String]) -> Option<&BTreeSet<Region>> {
        let mut words: Vec<&str> = phrase.iter().map(String::as_str).collect();
        while words.first() == Some(&"the") {
            words.remove(0);
        }
        if let Some(hit) = self.longest_prefix_match(&words) {
            return Some(hit);
        }
        let stripped: Vec<&str> = words
            .into_iter()
            .filter(|w| *w != "the" && !RELATIVE_WORDS.contains(w))
            .collect();
        self.longest_prefix_match(&stripped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrase(s: &str) -> Vec<String> {
        tokenize(s).tokens
    }

    fn one(set: Option<&BTreeSet<Region>>) -> Option<Region> {
        set.filter(|s| s.len() == 1).and_then(|s| s.iter().next().copied())
    }

    #[test]
    fn builtin_loads_and_is_lowercase() {
        let g = Gazetteer::builtin();
        assert!(g.len() > 500);
        assert!(g.places.keys().all(|k| *k == k.to_lowercase()));
        for region in &Region::ALL[..6] {
            assert!(g.places.values().any(|s| s.contains(region)), "{region}");
        }
    }

    #[test]
    fn resolves_cities_and_modifiers() {
        let g = Gazetteer::builtin();
        assert_eq!(one(g.resolve_phrase(&phrase("toronto"))), Some(Region::Canada));
        assert_eq!(one(g.resolve_phrase(&phrase("the northern uk"))), Some(Region::Uk));
        assert_eq!(one(g.resolve_phrase(&phrase("mumbai"))), Some(Region::Asia));
        assert_eq!(one(g.resolve_phrase(&phrase("downtown seattle"))), Some(Region::Usa));
        assert_eq!(one(g.resolve_phrase(&phrase("northern ireland"))), Some(Region::Uk));
        assert_eq!(one(g.resolve_phrase(&phrase("new york city now"))), Some(Region::Usa));
        assert_eq!(g.resolve_phrase(&phrase("a small town")), None);
    }

    #[test]
    fn ambiguous_places_keep_all_regions() {
        let mut g = Gazetteer::default();
        g.insert(Region::Usa, "Georgia");
        g.insert(Region::Europe, "georgia");
        assert_eq!(g.regions("georgia").unwrap().len(), 2);
    }

    #[test]
    fn rejects_unknown_region() {
        let err = Gazetteer::from_reader("Mars\tolympus mons\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(Gazetteer::from_reader("unknown\tnowhere\n".as_bytes()).is_err());
    }
}
