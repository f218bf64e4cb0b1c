//! Published example matrices with their structural metadata.
//!
//! Matrices live in `corpus/*.json`; `corpus/expected.json` records for each
//! entry a checksum of the canonical serialization and the published
//! metadata. Loading re-derives rank and nilpotency class and rejects any
//! mismatch. The 5x5 upper triangular family is generated on demand.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use keller_algebra::{ExactMatrix, GaussianRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrixio::{matrix_hash, parse_matrix};

/// Id of the generated triangular family.
pub const FAMILY_ID: &str = "example4";
const FAMILY_SEED: u64 = 4;
const FAMILY_BOUND: i64 = 25;

const EMBEDDED: &[(&str, &str)] = &[
    ("expected.json", include_str!("../corpus/expected.json")),
    ("a0.json", include_str!("../corpus/a0.json")),
    ("example1.json", include_str!("../corpus/example1.json")),
    ("example2.json", include_str!("../corpus/example2.json")),
    ("example2_printed.json", include_str!("../corpus/example2_printed.json")),
    ("example3.json", include_str!("../corpus/example3.json")),
    ("example5.json", include_str!("../corpus/example5.json")),
    ("example6.json", include_str!("../corpus/example6.json")),
    ("example6_printed.json", include_str!("../corpus/example6_printed.json")),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry {0:?}")]
    UnknownId(String),
    #[error("{id}: cannot read {file}: {message}")]
    Io { id: String, file: String, message: String },
    #[error("{id}: malformed file: {message}")]
    Malformed { id: String, message: String },
    #[error("{id}: checksum mismatch (expected {expected}, found {found})")]
    Checksum { id: String, expected: String, found: String },
    #[error("{id}: {field} is {found}, published value {expected}")]
    Metadata {
        id: String,
        field: &'static str,
        expected: String,
        found: String,
    },
}

impl CorpusError {
    /// The entry the error is about, when there is one.
    pub fn id(&self) -> &str {
        match self {
            CorpusError::UnknownId(id)
            | CorpusError::Io { id, .. }
            | CorpusError::Malformed { id, .. }
            | CorpusError::Checksum { id, .. }
            | CorpusError::Metadata { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NilpotencyClass {
    /// `A^2 = 0`.
    SquareZero,
    /// `A^2 != 0`, `A^3 = 0`.
    CubeZero,
    /// Nilpotent of index above 3.
    Nilpotent,
    NotNilpotent,
}

impl NilpotencyClass {
    pub fn of(a: &ExactMatrix) -> Self {
        let square = a.checked_mul(a).expect("square matrix");
        if square.is_zero() {
            return NilpotencyClass::SquareZero;
        }
        if square.checked_mul(a).expect("square matrix").is_zero() {
            return NilpotencyClass::CubeZero;
        }
        if a.is_nilpotent() {
            NilpotencyClass::Nilpotent
        } else {
            NilpotencyClass::NotNilpotent
        }
    }
}

impl fmt::Display for NilpotencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NilpotencyClass::SquareZero => "square_zero",
            NilpotencyClass::CubeZero => "cube_zero",
            NilpotencyClass::Nilpotent => "nilpotent",
            NilpotencyClass::NotNilpotent => "not_nilpotent",
        })
    }
}

/// A published verdict, or the absence of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Published {
    Holds,
    Unpublished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub dimension: usize,
    pub rank: usize,
    pub nilpotency: NilpotencyClass,
    pub is_druzkowski: bool,
    pub c1: Published,
    pub jc: Published,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    file: String,
    sha256: String,
    #[serde(flatten)]
    expected: Expected,
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PrintedEntry {
    id: String,
    file: String,
    sha256: String,
    of: String,
    issue: String,
    note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    entries: Vec<ManifestEntry>,
    printed: Vec<PrintedEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub id: String,
    pub matrix: ExactMatrix,
    pub expected: Expected,
    pub source: String,
    pub note: Option<String>,
}

/// A matrix exactly as printed, kept beside the entry derived from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintedVariant {
    pub id: String,
    pub of: String,
    pub issue: String,
    pub note: String,
    pub matrix: ExactMatrix,
}

/// The manifest plus the raw text of every matrix file.
#[derive(Debug, Clone)]
pub struct Corpus {
    manifest: Manifest,
    files: BTreeMap<String, String>,
}

impl Corpus {
    /// The copy compiled into the crate.
    pub fn embedded() -> Self {
        let files: BTreeMap<String, String> =
            EMBEDDED.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let manifest = serde_json::from_str(&files["expected.json"]).expect("embedded manifest parses");
        Corpus { manifest, files }
    }

    /// A corpus directory laid out like the embedded one.
    pub fn from_dir(dir: &Path) -> Result<Self, CorpusError> {
        let read = |file: &str| {
            std::fs::read_to_string(dir.join(file)).map_err(|e| CorpusError::Io {
                id: file.trim_end_matches(".json").to_string(),
                file: file.to_string(),
                message: e.to_string(),
            })
        };
        let manifest_text = read("expected.json")?;
        let manifest: Manifest = serde_json::from_str(&manifest_text).map_err(|e| CorpusError::Malformed {
            id: "expected".into(),
            message: e.to_string(),
        })?;
        let mut files = BTreeMap::new();
        let names = manifest
            .entries
            .iter()
            .map(|e| &e.file)
            .chain(manifest.printed.iter().map(|p| &p.file));
        for name in names {
            if let Ok(text) = read(name) {
                files.insert(name.clone(), text);
            }
        }
        Ok(Corpus { manifest, files })
    }

    /// Stored entries followed by the generated family.
    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.manifest.entries.iter().map(|e| e.id.clone()).collect();
        ids.push(FAMILY_ID.to_string());
        ids
    }

    pub fn printed_ids(&self) -> Vec<String> {
        self.manifest.printed.iter().map(|p| p.id.clone()).collect()
    }

    /// Loads an entry and re-verifies its checksum, dimension, rank and
    /// nilpotency class.
    pub fn load(&self, id: &str) -> Result<CorpusEntry, CorpusError> {
        if id == FAMILY_ID {
            return Ok(example4_instance(FAMILY_SEED, FAMILY_BOUND));
        }
        let entry = self
            .manifest
            .entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| CorpusError::UnknownId(id.to_string()))?;
        let matrix = self.read_matrix(id, &entry.file, &entry.sha256)?;
        let loaded = CorpusEntry {
            id: entry.id.clone(),
            matrix,
            expected: entry.expected.clone(),
            source: entry.source.clone(),
            note: entry.note.clone(),
        };
        verify_structure(&loaded)?;
        Ok(loaded)
    }

    /// A printed variant; only its checksum is verified.
    pub fn printed(&self, id: &str) -> Result<PrintedVariant, CorpusError> {
        let p = self
            .manifest
            .printed
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| CorpusError::UnknownId(id.to_string()))?;
        Ok(PrintedVariant {
            id: p.id.clone(),
            of: p.of.clone(),
            issue: p.issue.clone(),
            note: p.note.clone(),
            matrix: self.read_matrix(id, &p.file, &p.sha256)?,
        })
    }

    fn read_matrix(&self, id: &str, file: &str, sha256: &str) -> Result<ExactMatrix, CorpusError> {
        let text = self.files.get(file).ok_or_else(|| CorpusError::Io {
            id: id.to_string(),
            file: file.to_string(),
            message: "missing".into(),
        })?;
        let matrix = parse_matrix(text).map_err(|e| CorpusError::Malformed {
            id: id.to_string(),
            message: e.to_string(),
        })?;
        let found = matrix_hash(&matrix);
        if found != sha256 {
            return Err(CorpusError::Checksum {
                id: id.to_string(),
                expected: sha256.to_string(),
                found,
            });
        }
        Ok(matrix)
    }
}

fn mismatch(id: &str, field: &'static str, expected: impl fmt::Display, found: impl fmt::Display) -> CorpusError {
    CorpusError::Metadata {
        id: id.to_string(),
        field,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Recomputes dimension, rank and nilpotency class.
pub fn verify_structure(entry: &CorpusEntry) -> Result<(), CorpusError> {
    let (a, e, id) = (&entry.matrix, &entry.expected, entry.id.as_str());
    if !a.is_square() || a.rows() != e.dimension {
        return Err(mismatch(id, "dimension", e.dimension, format!("{}x{}", a.rows(), a.cols())));
    }
    let rank = a.rank();
    if rank != e.rank {
        return Err(mismatch(id, "rank", e.rank, rank));
    }
    let class = NilpotencyClass::of(a);
    if class != e.nilpotency {
        return Err(mismatch(id, "nilpotency", e.nilpotency, class));
    }
    Ok(())
}

/// Loads an entry of the embedded corpus.
pub fn load_example(id: &str) -> Result<CorpusEntry, CorpusError> {
    Corpus::embedded().load(id)
}

/// An integer instance of the 5x5 family
/// `[[0, a2, a3, a4, a5], [0, 0, b3, b4, b5], 0, 0, 0]` with nonzero
/// parameters in `[-bound, bound]`.
pub fn example4_instance(seed: u64, bound: i64) -> CorpusEntry {
    assert!(bound >= 1, "bound must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return GaussianRational::from_int(v);
        }
    };
    let mut a = ExactMatrix::zeros(5, 5);
    for j in 1..5 {
        a.set(0, j, draw());
    }
    for j in 2..5 {
        a.set(1, j, draw());
    }
    CorpusEntry {
        id: FAMILY_ID.to_string(),
        matrix: a,
        expected: Expected {
            dimension: 5,
            rank: 2,
            nilpotency: NilpotencyClass::CubeZero,
            is_druzkowski: true,
            c1: Published::Holds,
            jc: Published::Holds,
        },
        source: "published 5x5 symbolic upper triangular family; random integer instance".into(),
        note: Some(format!("seed {seed}, bound {bound}")),
    }
}
