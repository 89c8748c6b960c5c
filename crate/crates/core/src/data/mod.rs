//! Data model, ingestion, and latent-subspace manipulation.

mod io;
mod matrix;
mod partition;

use std::collections::HashSet;
use std::path::Path;

pub use io::{
    csv_string, decode_bin, encode_bin, is_bin_file, load_bin, parse_csv_matrix, read_csv_matrix, save_bin,
    write_csv_matrix, Table, MAGIC,
};
pub use matrix::Matrix;
pub use partition::{default_partition, FactorPartition, PartitionEntry, DEFAULT_FACTORS};

use crate::error::{Error, Result};

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

fn check_names(names: &[String], m: &Matrix) -> Result<()> {
    if names.len() != m.cols() {
        return Err(Error::LengthMismatch {
            what: "names vs columns",
            left: names.len(),
            right: m.cols(),
        });
    }
    check_unique(names)
}

/// Representation samples with one name per latent dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    matrix: Matrix,
    dim_names: Vec<String>,
}

impl RepresentationSet {
    pub fn new(matrix: Matrix, dim_names: Vec<String>) -> Result<Self> {
        check_names(&dim_names, &matrix)?;
        Ok(Self { matrix, dim_names })
    }

    /// Dimensions named `z0`, `z1`, ...
    pub fn unnamed(matrix: Matrix) -> Self {
        let names = (0..matrix.cols()).map(|j| format!("z{j}")).collect();
        Self {
            matrix,
            dim_names: names,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> usize {
        self.matrix.cols()
    }
}

/// Ground-truth factor values, one named column per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    matrix: Matrix,
    factor_names: Vec<String>,
}

impl FactorSet {
    pub fn new(matrix: Matrix, factor_names: Vec<String>) -> Result<Self> {
        check_names(&factor_names, &matrix)?;
        Ok(Self { matrix, factor_names })
    }

    /// Five columns get the default factor names, otherwise `factor0`, `factor1`, ...
    pub fn unnamed(matrix: Matrix) -> Self {
        let names = default_factor_names(matrix.cols());
        Self {
            matrix,
            factor_names: names,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.factor_names.iter().position(|n| n == name)
    }
}

pub fn default_factor_names(count: usize) -> Vec<String> {
    if count == DEFAULT_FACTORS.len() {
        DEFAULT_FACTORS.iter().map(|s| s.to_string()).collect()
    } else {
        (0..count).map(|j| format!("factor{j}")).collect()
    }
}

/// Row-aligned representation and factor matrices, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    repr: RepresentationSet,
    factors: FactorSet,
}

impl Dataset {
    pub fn repr(&self) -> &RepresentationSet {
        &self.repr
    }

    pub fn factors(&self) -> &FactorSet {
        &self.factors
    }

    pub fn rows(&self) -> usize {
        self.repr.rows()
    }

    pub fn dims(&self) -> usize {
        self.repr.dims()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.count()
    }

    /// Column `j` of the representation.
    pub fn dim(&self, j: usize) -> Vec<f64> {
        self.repr.matrix().column(j)
    }

    /// Column `f` of the factor matrix.
    pub fn factor(&self, f: usize) -> Vec<f64> {
        self.factors.matrix().column(f)
    }

    pub fn into_parts(self) -> (RepresentationSet, FactorSet) {
        (self.repr, self.factors)
    }
}

pub fn validate_dataset(repr: RepresentationSet, factors: FactorSet) -> Result<Dataset> {
    if repr.rows() != factors.rows() {
        return Err(Error::RowMismatch {
            repr: repr.rows(),
            factors: factors.rows(),
        });
    }
    for m in [repr.matrix(), factors.matrix()] {
        if let Some((row, col)) = m.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(Dataset { repr, factors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Repr,
    Factors,
}

/// Either set, as returned by [`load_csv`].
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSet {
    Repr(RepresentationSet),
    Factors(FactorSet),
}

pub fn load_csv(path: &Path, kind: CsvKind) -> Result<LoadedSet> {
    let (names, m) = read_csv_matrix(path)?;
    Ok(match kind {
        CsvKind::Repr => LoadedSet::Repr(RepresentationSet::new(m, names)?),
        CsvKind::Factors => LoadedSet::Factors(FactorSet::new(m, names)?),
    })
}

/// Load a representation from CSV or the binary format (detected by magic).
pub fn load_repr(path: &Path) -> Result<RepresentationSet> {
    if is_bin_file(path)? {
        return Ok(RepresentationSet::unnamed(load_bin(path)?));
    }
    let (names, m) = read_csv_matrix(path)?;
    RepresentationSet::new(m, names)
}

/// Load a factor set from CSV or the binary format (detected by magic).
pub fn load_factors(path: &Path) -> Result<FactorSet> {
    if is_bin_file(path)? {
        return Ok(FactorSet::unnamed(load_bin(path)?));
    }
    let (names, m) = read_csv_matrix(path)?;
    FactorSet::new(m, names)
}

/// Copy of `repr` with every column in `factor`'s range set to `value`.
pub fn clamp_subspace(
    repr: &RepresentationSet,
    partition: &FactorPartition,
    factor: &str,
    value: f64,
) -> Result<RepresentationSet> {
    let entry = partition
        .get(factor)
        .ok_or_else(|| Error::UnknownFactor(factor.to_string()))?;
    if !value.is_finite() {
        return Err(Error::invalid("clamp value must be finite"));
    }
    partition.check_dims(repr.dims())?;
    let mut m = repr.matrix().clone();
    for i in 0..m.rows() {
        for j in entry.dims() {
            m.set(i, j, value);
        }
    }
    Ok(RepresentationSet {
        matrix: m,
        dim_names: repr.dim_names.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repr(rows: usize, cols: usize) -> RepresentationSet {
        RepresentationSet::unnamed(Matrix::from_fn(rows, cols, |i, j| (i * cols + j) as f64 * 0.37 - 3.0).unwrap())
    }

    fn factors(rows: usize, cols: usize) -> FactorSet {
        FactorSet::unnamed(Matrix::from_fn(rows, cols, |i, j| (i + 2 * j) as f64).unwrap())
    }

    #[test]
    fn validate_ok() {
        let ds = validate_dataset(repr(100, 24), factors(100, 5)).unwrap();
        assert_eq!((ds.rows(), ds.dims(), ds.factor_count()), (100, 24, 5));
        assert_eq!(ds.factors().factor_names()[0], "friction");
    }

    #[test]
    fn validate_row_mismatch_reports_both_counts() {
        let err = validate_dataset(repr(100, 24), factors(99, 5)).unwrap_err();
        assert!(matches!(err, Error::RowMismatch { repr: 100, factors: 99 }));
        let msg = err.to_string();
        assert!(msg.contains("100") && msg.contains("99"));
    }

    #[test]
    fn validate_non_finite_location() {
        let mut m = repr(100, 24).matrix().clone();
        m.set(7, 3, f64::NAN);
        let err = validate_dataset(RepresentationSet::unnamed(m), factors(100, 5)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 7, col: 3 }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let m = Matrix::from_fn(2, 2, |_, _| 0.0).unwrap();
        assert!(RepresentationSet::new(m, vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn clamp_friction_to_zero() {
        let r = repr(10, 24);
        let c = clamp_subspace(&r, &default_partition(), "friction", 0.0).unwrap();
        for i in 0..10 {
            for j in 0..24 {
                let v = c.matrix().get(i, j);
                if j < 4 {
                    assert_eq!(v, 0.0);
                } else {
                    assert_eq!(v.to_bits(), r.matrix().get(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn clamp_delay() {
        let c = clamp_subspace(&repr(5, 24), &default_partition(), "delay", 1.5).unwrap();
        assert!((0..5).all(|i| (20..24).all(|j| c.matrix().get(i, j) == 1.5)));
    }

    #[test]
    fn clamp_unknown_factor() {
        let err = clamp_subspace(&repr(5, 24), &default_partition(), "gravity", 0.0).unwrap_err();
        assert!(matches!(err, Error::UnknownFactor(ref f) if f == "gravity"));
    }

    #[test]
    fn load_csv_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "a,b\n1,2\n3,4\n").unwrap();
        match load_csv(&p, CsvKind::Factors).unwrap() {
            LoadedSet::Factors(f) => assert_eq!(f.factor_names(), &["a", "b"]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_csv(&dir.path().join("missing.csv"), CsvKind::Repr),
            Err(Error::Io { .. })
        ));
    }
}
