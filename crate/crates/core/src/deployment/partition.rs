use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};

/// O-RU to EDU assignment (the genome): `genome[l]` is the EDU of O-RU `l`.
///
/// Labels are kept canonical (EDUs numbered in order of first appearance), so
/// two partitions with the same groups compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    genome: Vec<usize>,
    num_edu: usize,
}

impl Partition {
    /// Checks that every label lies in `0..num_edu` and that every EDU owns at
    /// least one O-RU. Group sizes are not required to be balanced here; see
    /// [`Partition::satisfies_balance`].
    pub fn from_genome(genome: Vec<usize>, num_edu: usize) -> Result<Self> {
        if num_edu == 0 {
            return Err(Error::Infeasible("partition needs at least one EDU".into()));
        }
        if genome.len() < num_edu {
            return Err(Error::Infeasible(format!(
                "{} O-RUs cannot cover {num_edu} EDUs",
                genome.len()
            )));
        }
        let mut used = vec![false; num_edu];
        for (l, &m) in genome.iter().enumerate() {
            if m >= num_edu {
                return Err(Error::Parse(format!("O-RU {l} assigned to EDU {m}, only {num_edu} EDUs")));
            }
            used[m] = true;
        }
        if let Some(m) = used.iter().position(|u| !u) {
            return Err(Error::Parse(format!("EDU {m} has no O-RU")));
        }
        Ok(Self {
            genome: canonical(&genome, num_edu),
            num_edu,
        })
    }

    /// Single group holding every O-RU.
    pub fn single(num_oru: usize) -> Self {
        Self {
            genome: vec![0; num_oru],
            num_edu: 1,
        }
    }

    /// One EDU per O-RU.
    pub fn singletons(num_oru: usize) -> Self {
        Self {
            genome: (0..num_oru).collect(),
            num_edu: num_oru,
        }
    }

    pub fn genome(&self) -> &[usize] {
        &self.genome
    }

    pub fn num_oru(&self) -> usize {
        self.genome.len()
    }

    pub fn num_edu(&self) -> usize {
        self.num_edu
    }

    #[inline]
    pub fn edu_of(&self, oru: usize) -> usize {
        self.genome[oru]
    }

    /// O-RU indices of every EDU, ascending within each group.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_edu];
        for (l, &m) in self.genome.iter().enumerate() {
            out[m].push(l);
        }
        out
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_edu];
        for &m in &self.genome {
            sizes[m] += 1;
        }
        sizes
    }

    /// Partition constraints: exactly `num_edu` non-empty disjoint groups
    /// covering all O-RUs, with sizes differing by at most one.
    pub fn satisfies_balance(&self, num_edu: usize) -> bool {
        self.num_edu == num_edu && genome_is_balanced(&self.genome, num_edu)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, usize> = self
            .genome
            .iter()
            .enumerate()
            .map(|(l, &m)| (l.to_string(), m))
            .collect();
        // Keys sort lexicographically in a BTreeMap; emit in numeric order instead.
        let body: Vec<String> = (0..self.genome.len())
            .map(|l| format!("  \"{l}\": {}", map[&l.to_string()]))
            .collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }

    /// Parses `{"<oru_index>": <edu_index>, ...}`. Indices must cover `0..L`.
    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, usize> = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("partition JSON: {e}")))?;
        let mut pairs = Vec::with_capacity(map.len());
        for (key, edu) in map {
            let oru: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("partition JSON: key {key:?} is not an O-RU index")))?;
            pairs.push((oru, edu));
        }
        from_pairs(pairs)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("oru_index,edu_index\n");
        for (l, m) in self.genome.iter().enumerate() {
            out.push_str(&format!("{l},{m}\n"));
        }
        out
    }

    pub fn from_csv(reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            oru_index: usize,
            edu_index: usize,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut pairs = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(format!("partition CSV: {e}")))?;
            pairs.push((row.oru_index, row.edu_index));
        }
        from_pairs(pairs)
    }

    /// Loads a partition file, choosing the format by extension (`.json`, else CSV).
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::from_json(&text),
            _ => Self::from_csv(text.as_bytes()),
        }
    }
}

fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Result<Partition> {
    if pairs.is_empty() {
        return Err(Error::Parse("partition is empty".into()));
    }
    pairs.sort_unstable();
    for (i, &(oru, _)) in pairs.iter().enumerate() {
        if oru != i {
            return Err(Error::Parse(format!(
                "O-RU indices must be exactly 0..{} without repeats (found {oru} at position {i})",
                pairs.len()
            )));
        }
    }
    let genome: Vec<usize> = pairs.into_iter().map(|(_, m)| m).collect();
    let num_edu = genome.iter().max().map_or(0, |m| m + 1);
    Partition::from_genome(genome, num_edu)
}

pub(crate) fn genome_is_balanced(genome: &[usize], num_edu: usize) -> bool {
    if num_edu == 0 || genome.len() < num_edu {
        return false;
    }
    let mut sizes = vec![0usize; num_edu];
    for &m in genome {
        if m >= num_edu {
            return false;
        }
        sizes[m] += 1;
    }
    let lo = genome.len() / num_edu;
    let hi = genome.len().div_ceil(num_edu);
    sizes.iter().all(|&s| s >= 1 && s >= lo && s <= hi)
}

/// Relabels EDUs in order of first appearance.
pub(crate) fn canonical(genome: &[usize], num_edu: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; num_edu.max(genome.iter().max().map_or(0, |m| m + 1))];
    let mut next = 0;
    genome
        .iter()
        .map(|&m| {
            if map[m] == usize::MAX {
                map[m] = next;
                next += 1;
            }
            map[m]
        })
        .collect()
}
