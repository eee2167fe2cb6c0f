//! Demographic attributes, their values and per-user profiles.
//!
//! Each of the four attributes has a closed set of values, one of which is
//! always `Unknown`. Across attributes there are 19 values in total, and the
//! global value index (`DemographicValue::index`) addresses rows of the
//! demographic value table in the attribute-vector model.

mod extract;
mod gazetteer;

use std::fmt;
use std::io::{BufRead, Write};

pub use extract::{
    build_profile, extract_age, extract_gender, extract_location, extract_religion,
    select_subset, AgeOutcome, Extraction, ProfileOutcome, RemovalReason,
};
pub use gazetteer::{Gazetteer, RELATIVE_WORDS};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Age,
    Gender,
    Location,
    Religion,
}

/// Number of values across all attributes, `Unknown` included.
pub const VALUE_COUNT: usize = 19;

impl Attribute {
    /// Attributes in composition order.
    pub const ALL: [Attribute; 4] = [
        Attribute::Age,
        Attribute::Gender,
        Attribute::Location,
        Attribute::Religion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Age => "age",
            Attribute::Gender => "gender",
            Attribute::Location => "location",
            Attribute::Religion => "religion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
    }

    pub fn value_names(self) -> &'static [&'static str] {
        match self {
            Attribute::Age => AgeGroup::NAMES,
            Attribute::Gender => Gender::NAMES,
            Attribute::Location => Region::NAMES,
            Attribute::Religion => Religion::NAMES,
        }
    }

    pub fn cardinality(self) -> usize {
        self.value_names().len()
    }

    /// Index of this attribute's first value in the global value table.
    pub fn offset(self) -> usize {
        Attribute::ALL
            .into_iter()
            .take_while(|&a| a != self)
            .map(Attribute::cardinality)
            .sum()
    }

    pub fn values(self) -> impl Iterator<Item = DemographicValue> {
        (0..self.cardinality()).map(move |ordinal| DemographicValue {
            attribute: self,
            ordinal: ordinal as u8,
        })
    }

    pub fn unknown(self) -> DemographicValue {
        DemographicValue {
            attribute: self,
            ordinal: (self.cardinality() - 1) as u8,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value of one attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemographicValue {
    attribute: Attribute,
    ordinal: u8,
}

impl DemographicValue {
    pub fn new(attribute: Attribute, ordinal: usize) -> Option<Self> {
        (ordinal < attribute.cardinality()).then_some(DemographicValue {
            attribute,
            ordinal: ordinal as u8,
        })
    }

    pub fn all() -> impl Iterator<Item = DemographicValue> {
        Attribute::ALL.into_iter().flat_map(Attribute::values)
    }

    pub fn from_index(index: usize) -> Option<Self> {
        DemographicValue::all().nth(index)
    }

    pub fn parse(attribute: Attribute, name: &str) -> Option<Self> {
        attribute
            .value_names()
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|ordinal| DemographicValue {
                attribute,
                ordinal: ordinal as u8,
            })
    }

    pub fn attribute(self) -> Attribute {
        self.attribute
    }

    /// Position within the attribute's value list.
    pub fn ordinal(self) -> usize {
        self.ordinal as usize
    }

    /// Position in the global 19-row value table.
    pub fn index(self) -> usize {
        self.attribute.offset() + self.ordinal()
    }

    pub fn name(self) -> &'static str {
        self.attribute.value_names()[self.ordinal()]
    }

    pub fn is_unknown(self) -> bool {
        self == self.attribute.unknown()
    }
}

impl fmt::Display for DemographicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.name())
    }
}

macro_rules! value_enum {
    ($name:ident, $attr:expr, [$($variant:ident => $text:literal),+ $(,)?]) => {
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant,)+
            #[default]
            Unknown,
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($text,)+ "unknown"];
            pub const ALL: &'static [$name] = &[$($name::$variant,)+ $name::Unknown];

            pub fn name(self) -> &'static str {
                Self::NAMES[self as usize]
            }

            pub fn parse(s: &str) -> Option<Self> {
                Self::NAMES
                    .iter()
                    .position(|n| n.eq_ignore_ascii_case(s))
                    .map(|i| Self::ALL[i])
            }

            pub fn value(self) -> DemographicValue {
                DemographicValue { attribute: $attr, ordinal: self as u8 }
            }

            pub fn is_known(self) -> bool {
                self != $name::Unknown
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

value_enum!(AgeGroup, Attribute::Age, [Young => "young", Old => "old"]);
value_enum!(Gender, Attribute::Gender, [Male => "male", Female => "female"]);
value_enum!(Region, Attribute::Location, [
    Usa => "usa",
    Asia => "asia",
    Oceania => "oceania",
    Uk => "uk",
    Europe => "europe",
    Canada => "canada",
]);
value_enum!(Religion, Attribute::Religion, [
    Christian => "christian",
    Muslim => "muslim",
    NonReligious => "nonreligious",
    Hindu => "hindu",
    Buddhist => "buddhist",
]);

/// The four resolved attribute values of one speaker.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Demographics {
    pub age: AgeGroup,
    pub gender: Gender,
    pub location: Region,
    pub religion: Religion,
}

impl Demographics {
    pub fn unknown() -> Self {
        Self::default()
    }

    pub fn get(&self, attribute: Attribute) -> DemographicValue {
        match attribute {
            Attribute::Age => self.age.value(),
            Attribute::Gender => self.gender.value(),
            Attribute::Location => self.location.value(),
            Attribute::Religion => self.religion.value(),
        }
    }

    /// Values in composition order (age, gender, location, religion).
    pub fn values(&self) -> [DemographicValue; 4] {
        Attribute::ALL.map(|a| self.get(a))
    }

    /// Global value-table rows of the four values.
    pub fn value_rows(&self) -> [usize; 4] {
        self.values().map(DemographicValue::index)
    }

    pub fn set(&mut self, value: DemographicValue) {
        let o = value.ordinal();
        match value.attribute() {
            Attribute::Age => self.age = AgeGroup::ALL[o],
            Attribute::Gender => self.gender = Gender::ALL[o],
            Attribute::Location => self.location = Region::ALL[o],
            Attribute::Religion => self.religion = Religion::ALL[o],
        }
    }

    pub fn known_count(&self) -> usize {
        self.values().iter().filter(|v| !v.is_unknown()).count()
    }
}

/// Resolved demographics of one user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserProfile {
    pub user_id: String,
    pub demographics: Demographics,
    /// Stated age in years; present exactly when the age group is known.
    pub raw_age: Option<u32>,
}

impl UserProfile {
    pub fn unknown(user_id: impl Into<String>) -> Self {
        UserProfile {
            user_id: user_id.into(),
            demographics: Demographics::unknown(),
            raw_age: None,
        }
    }

    pub fn known_count(&self) -> usize {
        self.demographics.known_count()
    }
}

/// Writes one tab-separated line per profile:
/// `user_id, age_group, raw_age|-, gender, location, religion, known_count`.
pub fn write_profiles<W: Write>(mut writer: W, profiles: &[UserProfile]) -> Result<()> {
    for p in profiles {
        let d = &p.demographics;
        let raw_age = p.raw_age.map_or_else(|| "-".to_owned(), |a| a.to_string());
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.user_id,
            d.age,
            raw_age,
            d.gender,
            d.location,
            d.religion,
            p.known_count()
        )?;
    }
    Ok(())
}

pub fn read_profiles<R: BufRead>(reader: R) -> Result<Vec<UserProfile>> {
    let mut profiles = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                lineno,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let bad = |what: &str, v: &str| Error::parse(lineno, format!("bad {what} {v:?}"));
        let demographics = Demographics {
            age: AgeGroup::parse(fields[1]).ok_or_else(|| bad("age group", fields[1]))?,
            gender: Gender::parse(fields[3]).ok_or_else(|| bad("gender", fields[3]))?,
            location: Region::parse(fields[4]).ok_or_else(|| bad("location", fields[4]))?,
            religion: Religion::parse(fields[5]).ok_or_else(|| bad("religion", fields[5]))?,
        };
        let raw_age = match fields[2] {
            "-" => None,
            v => Some(v.parse::<u32>().map_err(|_| bad("raw age", v))?),
        };
        if raw_age.is_some() != demographics.age.is_known() {
            return Err(Error::parse(lineno, "raw age must be present iff age group is known"));
        }
        let known: usize = fields[6].parse().map_err(|_| bad("known count", fields[6]))?;
        if known != demographics.known_count() {
            return Err(Error::parse(
                lineno,
                format!(
                    "known_count {known} disagrees with {} known values",
                    demographics.known_count()
                ),
            ));
        }
        profiles.push(UserProfile {
            user_id: fields[0].to_owned(),
            demographics,
            raw_age,
        });
    }
    Ok(profiles)
}
