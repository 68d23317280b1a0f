use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transceiver schemes, tagged by their lowercase hyphenated abbreviation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Scheme {
    /// Centralized joint MMSE over all O-RUs.
    JointMmse,
    /// Centralized maximum-ratio combining / transmission.
    JointMrc,
    /// Fully distributed (per-O-RU) MMSE.
    LMmse,
    /// Centralized MMSE restricted to each UE's serving O-RUs.
    PMmse,
    /// Per-O-RU MMSE restricted to serving O-RUs.
    LpMmse,
    /// Per-O-RU maximum ratio restricted to serving O-RUs.
    LpMrc,
    /// Per-EDU MMSE, every EDU serves every UE.
    EduMmse,
    /// Per-EDU MMSE with UE-EDU association.
    EduPmmse,
}

/// How O-RUs are grouped into processing units for a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// One unit holding every O-RU.
    Central,
    /// One unit per O-RU.
    PerOru,
    /// The deployment's EDU partition.
    Edu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Processing {
    Mmse,
    MaxRatio,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::JointMmse,
        Scheme::JointMrc,
        Scheme::LMmse,
        Scheme::PMmse,
        Scheme::LpMmse,
        Scheme::LpMrc,
        Scheme::EduMmse,
        Scheme::EduPmmse,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::JointMmse => "joint-mmse",
            Scheme::JointMrc => "joint-mrc",
            Scheme::LMmse => "l-mmse",
            Scheme::PMmse => "p-mmse",
            Scheme::LpMmse => "lp-mmse",
            Scheme::LpMrc => "lp-mrc",
            Scheme::EduMmse => "edu-mmse",
            Scheme::EduPmmse => "edu-pmmse",
        }
    }

    pub fn grouping(self) -> Grouping {
        match self {
            Scheme::JointMmse | Scheme::JointMrc | Scheme::PMmse => Grouping::Central,
            Scheme::LMmse | Scheme::LpMmse | Scheme::LpMrc => Grouping::PerOru,
            Scheme::EduMmse | Scheme::EduPmmse => Grouping::Edu,
        }
    }

    pub fn processing(self) -> Processing {
        match self {
            Scheme::JointMrc | Scheme::LpMrc => Processing::MaxRatio,
            _ => Processing::Mmse,
        }
    }

    /// Whether the scheme uses the dynamic (partial) association.
    pub fn uses_dcc(self) -> bool {
        matches!(
            self,
            Scheme::PMmse | Scheme::LpMmse | Scheme::LpMrc | Scheme::EduPmmse
        )
    }

    /// Parses a comma-separated list of tags. Unknown tags produce an error
    /// naming every valid tag.
    pub fn parse_list(text: &str) -> Result<Vec<Scheme>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let s: Scheme = part.parse()?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("empty scheme list".into()));
        }
        Ok(out)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.tag() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Scheme::ALL.iter().map(|x| x.tag()).collect();
                Error::Parse(format!("unknown scheme {s:?}; valid: {}", valid.join(", ")))
            })
    }
}

/// Uplink or downlink.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
pub enum Link {
    #[serde(rename = "ul")]
    #[value(name = "ul")]
    Uplink,
    #[serde(rename = "dl")]
    #[value(name = "dl")]
    Downlink,
}

impl Link {
    pub fn tag(self) -> &'static str {
        match self {
            Link::Uplink => "ul",
            Link::Downlink => "dl",
        }
    }
}
