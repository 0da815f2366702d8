//! Decision problems: a finite set of alternatives together with one of
//! three information structures.
//!
//! - [`Structure::Point`]: every alternative has a point value per criterion.
//! - [`Structure::Interval`]: every value is only known to lie in an interval.
//! - [`Structure::Relation`]: one preference relation per criterion, possibly
//!   leaving some pairs of alternatives incomparable.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{DominanceMode, Interval};
use crate::relation::PreferenceRelation;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlternativeId(String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CriterionId(String);

macro_rules! label_newtype {
    ($ty:ident) => {
        impl $ty {
            pub fn new(label: impl Into<String>) -> Self {
                $ty(label.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                $ty(s.to_owned())
            }
        }
    };
}

label_newtype!(AlternativeId);
label_newtype!(CriterionId);

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Point(Matrix<f64>),
    Interval {
        matrix: Matrix<Interval>,
        mode: DominanceMode,
    },
    /// One transitively closed relation per criterion.
    Relation(Vec<PreferenceRelation>),
}

impl Structure {
    pub fn kind(&self) -> &'static str {
        match self {
            Structure::Point(_) => "point",
            Structure::Interval { .. } => "interval",
            Structure::Relation(_) => "relation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    alternatives: Vec<AlternativeId>,
    criteria: Vec<CriterionId>,
    structure: Structure,
}

impl Problem {
    /// Validates dimensions, id uniqueness and relation consistency.
    /// Relations are transitively closed.
    pub fn new(
        alternatives: Vec<AlternativeId>,
        criteria: Vec<CriterionId>,
        structure: Structure,
    ) -> Result<Self> {
        check_labels(alternatives.iter().map(AlternativeId::as_str), "alternative")?;
        check_labels(criteria.iter().map(CriterionId::as_str), "criterion")?;
        let (n, m) = (alternatives.len(), criteria.len());
        let structure = match structure {
            Structure::Point(matrix) => {
                check_dims(matrix.rows(), matrix.cols(), n, m)?;
                if let Some(v) = matrix.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Schema(format!("non-finite criterion value {v}")));
                }
                Structure::Point(matrix)
            }
            Structure::Interval { matrix, mode } => {
                check_dims(matrix.rows(), matrix.cols(), n, m)?;
                Structure::Interval { matrix, mode }
            }
            Structure::Relation(relations) => {
                if relations.len() != m {
                    return Err(Error::Dimension(format!(
                        "{} relations for {m} criteria",
                        relations.len()
                    )));
                }
                let mut closed = Vec::with_capacity(m);
                for (j, rel) in relations.into_iter().enumerate() {
                    if rel.size() != n {
                        return Err(Error::Dimension(format!(
                            "relation for `{}` spans {} alternatives, expected {n}",
                            criteria[j],
                            rel.size()
                        )));
                    }
                    let c = rel.transitive_closure();
                    if let Some((x, y)) = c.downgraded_strict_pair(&rel) {
                        return Err(Error::InconsistentRelation {
                            criterion: criteria[j].to_string(),
                            preferred: alternatives[x].to_string(),
                            other: alternatives[y].to_string(),
                        });
                    }
                    closed.push(c);
                }
                Structure::Relation(closed)
            }
        };
        Ok(Problem {
            alternatives,
            criteria,
            structure,
        })
    }

    pub fn alternatives(&self) -> &[AlternativeId] {
        &self.alternatives
    }

    pub fn criteria(&self) -> &[CriterionId] {
        &self.criteria
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn n(&self) -> usize {
        self.alternatives.len()
    }

    pub fn m(&self) -> usize {
        self.criteria.len()
    }

    pub fn alt_index(&self, label: &str) -> Result<usize> {
        self.alternatives
            .iter()
            .position(|a| a.as_str() == label)
            .ok_or_else(|| Error::UnknownId(label.to_owned()))
    }

    pub fn criterion_index(&self, label: &str) -> Result<usize> {
        self.criteria
            .iter()
            .position(|c| c.as_str() == label)
            .ok_or_else(|| Error::UnknownId(label.to_owned()))
    }

    pub fn alt_label(&self, i: usize) -> &str {
        self.alternatives[i].as_str()
    }

    pub fn criterion_label(&self, j: usize) -> &str {
        self.criteria[j].as_str()
    }

    pub fn points(&self) -> Result<&Matrix<f64>> {
        match &self.structure {
            Structure::Point(k) => Ok(k),
            other => Err(wrong_variant("point", other)),
        }
    }

    pub fn intervals(&self) -> Result<(&Matrix<Interval>, DominanceMode)> {
        match &self.structure {
            Structure::Interval { matrix, mode } => Ok((matrix, *mode)),
            other => Err(wrong_variant("interval", other)),
        }
    }

    pub fn relations(&self) -> Result<&[PreferenceRelation]> {
        match &self.structure {
            Structure::Relation(r) => Ok(r),
            other => Err(wrong_variant("relation", other)),
        }
    }

    /// Copy of an interval problem with its dominance mode replaced.
    /// Other variants are returned unchanged.
    pub fn with_mode(&self, new_mode: DominanceMode) -> Problem {
        let mut p = self.clone();
        if let Structure::Interval { mode, .. } = &mut p.structure {
            *mode = new_mode;
        }
        p
    }

    pub fn to_file(&self) -> ProblemFile {
        let structure = match &self.structure {
            Structure::Point(k) => StructureFile::Point { matrix: k.to_rows() },
            Structure::Interval { matrix, mode } => StructureFile::Interval {
                mode: *mode,
                matrix: (0..matrix.rows())
                    .map(|i| matrix.row(i).iter().map(|d| [d.lower(), d.upper()]).collect())
                    .collect(),
            },
            Structure::Relation(rels) => StructureFile::Relation {
                relations: rels
                    .iter()
                    .enumerate()
                    .map(|(j, rel)| RelationFile {
                        criterion: self.criteria[j].to_string(),
                        pairs: rel
                            .pairs()
                            .map(|(x, y)| (self.alternatives[x].to_string(), self.alternatives[y].to_string()))
                            .collect(),
                    })
                    .collect(),
            },
        };
        ProblemFile {
            alternatives: self.alternatives.iter().map(ToString::to_string).collect(),
            criteria: self.criteria.iter().map(ToString::to_string).collect(),
            structure,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serialization is infallible")
    }
}

pub(crate) fn wrong_variant(expected: &'static str, found: &Structure) -> Error {
    Error::WrongVariant {
        expected,
        found: found.kind(),
    }
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    let mut count = 0;
    for label in labels {
        count += 1;
        if label.is_empty() {
            return Err(Error::Schema(format!("empty {what} label")));
        }
        if !seen.insert(label) {
            return Err(Error::DuplicateId(label.to_owned()));
        }
    }
    if count == 0 {
        return Err(Error::Dimension(format!("at least one {what} required")));
    }
    Ok(())
}

fn check_dims(rows: usize, cols: usize, n: usize, m: usize) -> Result<()> {
    if rows != n || cols != m {
        return Err(Error::Dimension(format!(
            "matrix is {rows}x{cols}, expected {n}x{m}"
        )));
    }
    Ok(())
}

/// On-disk problem schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub alternatives: Vec<String>,
    pub criteria: Vec<String>,
    pub structure: StructureFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureFile {
    Point {
        matrix: Vec<Vec<f64>>,
    },
    Interval {
        #[serde(default)]
        mode: DominanceMode,
        /// Raw `[lower, upper]` pairs; bounds are checked during validation.
        matrix: Vec<Vec<[f64; 2]>>,
    },
    Relation {
        relations: Vec<RelationFile>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationFile {
    pub criterion: String,
    pub pairs: Vec<(String, String)>,
}

impl TryFrom<ProblemFile> for Problem {
    type Error = Error;

    fn try_from(file: ProblemFile) -> Result<Self> {
        let alternatives: Vec<AlternativeId> = file.alternatives.into_iter().map(AlternativeId).collect();
        let criteria: Vec<CriterionId> = file.criteria.into_iter().map(CriterionId).collect();
        check_labels(alternatives.iter().map(AlternativeId::as_str), "alternative")?;
        check_labels(criteria.iter().map(CriterionId::as_str), "criterion")?;
        let (n, m) = (alternatives.len(), criteria.len());
        let structure = match file.structure {
            StructureFile::Point { matrix } => {
                check_rows(matrix.len(), n)?;
                Structure::Point(Matrix::from_rows(matrix, m)?)
            }
            StructureFile::Interval { mode, matrix } => {
                check_rows(matrix.len(), n)?;
                let checked = matrix
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|[lower, upper]| Interval::new(lower, upper))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Structure::Interval {
                    matrix: Matrix::from_rows(checked, m)?,
                    mode,
                }
            }
            StructureFile::Relation { relations } => {
                let alt_pos: HashMap<&str, usize> =
                    alternatives.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
                let mut slots: Vec<Option<PreferenceRelation>> = vec![None; m];
                for rf in &relations {
                    let j = criteria
                        .iter()
                        .position(|c| c.as_str() == rf.criterion)
                        .ok_or_else(|| Error::UnknownId(rf.criterion.clone()))?;
                    if slots[j].is_some() {
                        return Err(Error::DuplicateId(rf.criterion.clone()));
                    }
                    let mut rel = PreferenceRelation::empty(n);
                    for (x, y) in &rf.pairs {
                        let xi = *alt_pos.get(x.as_str()).ok_or_else(|| Error::UnknownId(x.clone()))?;
                        let yi = *alt_pos.get(y.as_str()).ok_or_else(|| Error::UnknownId(y.clone()))?;
                        rel.insert(xi, yi);
                    }
                    slots[j] = Some(rel);
                }
                // A criterion without an entry carries no pairwise information.
                Structure::Relation(
                    slots
                        .into_iter()
                        .map(|s| s.unwrap_or_else(|| PreferenceRelation::empty(n)))
                        .collect(),
                )
            }
        };
        Problem::new(alternatives, criteria, structure)
    }
}

fn check_rows(rows: usize, n: usize) -> Result<()> {
    if rows != n {
        return Err(Error::Dimension(format!("matrix has {rows} rows, expected {n}")));
    }
    Ok(())
}

impl Serialize for Problem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Problem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ProblemFile::deserialize(d)?;
        Problem::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Parses and validates a UTF-8 JSON problem file.
pub fn parse_problem(text: &[u8]) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_slice(text).map_err(|e| Error::Schema(e.to_string()))?;
    Problem::try_from(file)
}

/// The relation `{(x_i, x_q) : i != q, K_j(x_i) >= K_j(x_q)}` induced by
/// one point criterion. Ties yield indifference.
pub fn criterion_to_relation(problem: &Problem, j: usize) -> Result<PreferenceRelation> {
    let k = problem.points()?;
    if j >= problem.m() {
        return Err(Error::UnknownId(format!("criterion #{j}")));
    }
    let n = problem.n();
    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |q| (i, q)))
        .filter(|&(i, q)| i != q && k.get(i, j) >= k.get(q, j));
    // Closed by construction: >= on reals is transitive.
    Ok(PreferenceRelation::from_pairs(n, pairs).transitive_closure())
}

/// Turns every point criterion into its relation, giving a relation problem
/// over the same alternatives and criteria.
pub fn point_to_relation_problem(problem: &Problem) -> Result<Problem> {
    let relations = (0..problem.m())
        .map(|j| criterion_to_relation(problem, j))
        .collect::<Result<Vec<_>>>()?;
    Problem::new(
        problem.alternatives.clone(),
        problem.criteria.clone(),
        Structure::Relation(relations),
    )
}

/// Wraps every point value in a zero-width interval.
pub fn point_to_degenerate_intervals(problem: &Problem, mode: DominanceMode) -> Result<Problem> {
    let k = problem.points()?;
    let matrix = Matrix::from_fn(problem.n(), problem.m(), |i, j| {
        Interval::point(*k.get(i, j)).expect("validated finite")
    });
    Problem::new(
        problem.alternatives.clone(),
        problem.criteria.clone(),
        Structure::Interval { matrix, mode },
    )
}

/// Convenience constructor with generated labels `x1..xn` and `K1..Km`.
pub fn labelled(n: usize, m: usize, structure: Structure) -> Result<Problem> {
    Problem::new(
        (1..=n).map(|i| AlternativeId(format!("x{i}"))).collect(),
        (1..=m).map(|j| CriterionId(format!("K{j}"))).collect(),
        structure,
    )
}
