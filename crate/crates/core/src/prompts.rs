//! The experimental prompt grid: four emotions, one per quadrant of the
//! valence/arousal plane, crossed with eight painting genres.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valence {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arousal {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Affect {
    Anger,
    Calmness,
    Depression,
    Happiness,
}

impl Affect {
    pub const ALL: [Affect; 4] = [Affect::Anger, Affect::Calmness, Affect::Depression, Affect::Happiness];

    pub fn name(self) -> &'static str {
        match self {
            Affect::Anger => "anger",
            Affect::Calmness => "calmness",
            Affect::Depression => "depression",
            Affect::Happiness => "happiness",
        }
    }

    pub fn adjective(self) -> &'static str {
        match self {
            Affect::Anger => "angry",
            Affect::Calmness => "calm",
            Affect::Depression => "depressed",
            Affect::Happiness => "happy",
        }
    }

    pub fn valence(self) -> Valence {
        match self {
            Affect::Anger | Affect::Depression => Valence::Negative,
            Affect::Calmness | Affect::Happiness => Valence::Positive,
        }
    }

    pub fn arousal(self) -> Arousal {
        match self {
            Affect::Anger | Affect::Happiness => Arousal::High,
            Affect::Calmness | Affect::Depression => Arousal::Low,
        }
    }

    /// Case-insensitive match on the canonical name, ignoring surrounding
    /// whitespace.
    pub fn parse(s: &str) -> Option<Affect> {
        let s = s.trim();
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s))
    }

    pub fn position(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Affect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.name();
        write!(f, "{}{}", n[..1].to_uppercase(), &n[1..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Genre {
    Abstract,
    Cityscape,
    #[serde(rename = "Genre Painting")]
    GenrePainting,
    Landscape,
    Portrait,
    #[serde(rename = "Religious Painting")]
    ReligiousPainting,
    #[serde(rename = "Sketch Study")]
    SketchStudy,
    #[serde(rename = "Still Life")]
    StillLife,
}

impl Genre {
    pub const ALL: [Genre; 8] = [
        Genre::Abstract,
        Genre::Cityscape,
        Genre::GenrePainting,
        Genre::Landscape,
        Genre::Portrait,
        Genre::ReligiousPainting,
        Genre::SketchStudy,
        Genre::StillLife,
    ];

    /// Class name as used in table headings.
    pub fn name(self) -> &'static str {
        match self {
            Genre::Abstract => "Abstract",
            Genre::Cityscape => "Cityscape",
            Genre::GenrePainting => "Genre Painting",
            Genre::Landscape => "Landscape",
            Genre::Portrait => "Portrait",
            Genre::ReligiousPainting => "Religious Painting",
            Genre::SketchStudy => "Sketch Study",
            Genre::StillLife => "Still Life",
        }
    }

    /// Wording used inside a prompt.
    pub fn surface_form(self) -> &'static str {
        match self {
            Genre::Abstract => "abstract painting",
            Genre::Cityscape => "cityscape",
            Genre::GenrePainting => "genre painting",
            Genre::Landscape => "landscape",
            Genre::Portrait => "portrait",
            Genre::ReligiousPainting => "religious painting",
            Genre::SketchStudy => "sketch and study",
            Genre::StillLife => "still life",
        }
    }

    pub fn parse(s: &str) -> Option<Genre> {
        let s = s.trim();
        Self::ALL.into_iter().find(|g| g.name().eq_ignore_ascii_case(s))
    }

    pub fn position(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptSpec {
    pub index: usize,
    pub affect: Affect,
    pub genre: Genre,
    #[serde(rename = "prompt")]
    pub text: String,
}

impl PromptSpec {
    /// Filesystem-friendly `NN_affect_genre` stem.
    pub fn slug(&self) -> String {
        format!(
            "{:02}_{}_{}",
            self.index,
            self.affect.name(),
            self.genre.name().to_lowercase().replace(' ', "_")
        )
    }
}

/// Which label a set of images is split by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Affect,
    Genre,
}

impl Grouping {
    /// All keys of this grouping in table order.
    pub fn keys(self) -> Vec<GroupKey> {
        match self {
            Grouping::Affect => Affect::ALL.into_iter().map(GroupKey::Affect).collect(),
            Grouping::Genre => Genre::ALL.into_iter().map(GroupKey::Genre).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupKey {
    Affect(Affect),
    Genre(Genre),
}

impl GroupKey {
    pub fn matches(self, spec: &PromptSpec) -> bool {
        match self {
            GroupKey::Affect(a) => spec.affect == a,
            GroupKey::Genre(g) => spec.genre == g,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Affect(a) => a.fmt(f),
            GroupKey::Genre(g) => g.fmt(f),
        }
    }
}

/// `"A <adjective> <genre>"`, with "An" before a vowel-initial adjective.
pub fn build_prompt(affect: Affect, genre: Genre) -> String {
    let adj = affect.adjective();
    let article = if adj.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "An"
    } else {
        "A"
    };
    format!("{article} {adj} {}", genre.surface_form())
}

/// All 32 prompts, genre-major: index = `4 * genre + affect`.
pub fn enumerate_dataset() -> Vec<PromptSpec> {
    Genre::ALL
        .into_iter()
        .flat_map(|g| Affect::ALL.into_iter().map(move |a| (g, a)))
        .enumerate()
        .map(|(index, (genre, affect))| PromptSpec {
            index,
            affect,
            genre,
            text: build_prompt(affect, genre),
        })
        .collect()
}

/// Presentation order for a survey. Indices are kept, only the order changes.
pub fn shuffled_dataset(seed: u64) -> Vec<PromptSpec> {
    let mut specs = enumerate_dataset();
    specs.shuffle(&mut seed::rng(seed::stream_seed(seed, "shuffle")));
    specs
}

pub fn dataset_json() -> serde_json::Result<String> {
    serde_json::to_string_pretty(&enumerate_dataset())
}
