use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionEntry {
    pub factor: String,
    pub start: usize,
    pub end: usize,
}

impl PartitionEntry {
    pub fn dims(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// Assignment of contiguous latent-dimension ranges to named factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorPartition {
    entries: Vec<PartitionEntry>,
}

impl FactorPartition {
    /// Entries must be non-empty, non-overlapping ranges with unique names.
    pub fn new(entries: Vec<PartitionEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("partition has no entries"));
        }
        let mut names = HashSet::new();
        for e in &entries {
            if e.start >= e.end {
                return Err(Error::invalid(format!(
                    "partition entry {:?} has empty range [{}, {})",
                    e.factor, e.start, e.end
                )));
            }
            if !names.insert(e.factor.as_str()) {
                return Err(Error::DuplicateName(e.factor.clone()));
            }
        }
        let mut sorted: Vec<&PartitionEntry> = entries.iter().collect();
        sorted.sort_by_key(|e| e.start);
        for w in sorted.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::invalid(format!(
                    "partition entries {:?} and {:?} overlap",
                    w[0].factor, w[1].factor
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[PartitionEntry] {
        &self.entries
    }

    pub fn get(&self, factor: &str) -> Option<&PartitionEntry> {
        self.entries.iter().find(|e| e.factor == factor)
    }

    /// One past the largest covered dimension.
    pub fn max_dim(&self) -> usize {
        self.entries.iter().map(|e| e.end).max().unwrap_or(0)
    }

    pub fn covered_dims(&self) -> usize {
        self.entries.iter().map(|e| e.end - e.start).sum()
    }

    pub fn check_dims(&self, dims: usize) -> Result<()> {
        match self.entries.iter().find(|e| e.end > dims) {
            Some(e) => Err(Error::invalid(format!(
                "partition entry {:?} spans [{}, {}) but the representation has {} dims",
                e.factor, e.start, e.end, dims
            ))),
            None => Ok(()),
        }
    }

    /// Parse lines of `name,start,end_exclusive`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || {
                Error::invalid(format!(
                    "partition line {}: expected name,start,end_exclusive",
                    lineno + 1
                ))
            };
            if parts.len() != 3 || parts[0].is_empty() {
                return Err(bad());
            }
            let start = parts[1].parse().map_err(|_| bad())?;
            let end = parts[2].parse().map_err(|_| bad())?;
            entries.push(PartitionEntry {
                factor: parts[0].to_string(),
                start,
                end,
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Factor names of the five-way 24-d layout, in dimension order.
pub const DEFAULT_FACTORS: [&str; 5] = ["friction", "mass", "motor", "contact", "delay"];

/// friction [0,4), mass [4,10), motor [10,16), contact [16,20), delay [20,24).
pub fn default_partition() -> FactorPartition {
    let bounds = [(0, 4), (4, 10), (10, 16), (16, 20), (20, 24)];
    let entries = DEFAULT_FACTORS
        .iter()
        .zip(bounds)
        .map(|(name, (start, end))| PartitionEntry {
            factor: (*name).to_string(),
            start,
            end,
        })
        .collect();
    FactorPartition::new(entries).expect("default partition is valid")
}
