//! Input documents: strict JSON with exact integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::lattice::IntegerMatrix;
use crate::polytope::{Block, BlockKind, BlockPolytope};
use crate::weights::{Mode, WeightedOrbitSpace};

pub const FORMAT_VERSION: &str = "1";

const FIELDS: &[&str] = &[
    "format_version",
    "torus_rank",
    "blocks",
    "weights",
    "mode",
    "free_dim_bound",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Position { line: usize, column: usize },
    Field(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Position { line, column } => write!(f, "line {line}, column {column}"),
            Location::Field(path) if path.is_empty() => write!(f, "document root"),
            Location::Field(path) => write!(f, "field `{path}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl ParseError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        ParseError {
            location: Location::Field(path.to_string()),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDocument {
    pub torus_rank: usize,
    pub blocks: Vec<Block>,
    pub weights: Vec<Vec<BigInt>>,
    pub mode: Option<Mode>,
    pub free_dim_bound: Option<u32>,
}

impl InputDocument {
    pub fn polytope(&self) -> BlockPolytope {
        BlockPolytope::new(self.blocks.clone()).expect("checked at parse time")
    }

    pub fn space(&self) -> WeightedOrbitSpace {
        let weights = IntegerMatrix::from_rows(self.torus_rank, self.weights.clone())
            .expect("checked at parse time");
        WeightedOrbitSpace::new(self.polytope(), self.torus_rank, weights)
            .expect("checked at parse time")
    }

    /// Pretty canonical serialization, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serialization");
        s.push('\n');
        s
    }

    /// `sha256:` digest of the compact canonical serialization.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(self).expect("document serialization");
        format!("sha256:{}", hex::encode(Sha256::digest(compact.as_bytes())))
    }
}

struct BlockSpec<'a>(&'a Block);

impl Serialize for BlockSpec<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Block", 2)?;
        st.serialize_field("type", &self.0.kind())?;
        st.serialize_field("dim", &self.0.dim())?;
        st.end()
    }
}

struct Rows<'a>(&'a [Vec<BigInt>]);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::json::rows(self.0, s)
    }
}

impl Serialize for InputDocument {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = 4 + self.mode.is_some() as usize + self.free_dim_bound.is_some() as usize;
        let mut st = s.serialize_struct("InputDocument", n)?;
        st.serialize_field("format_version", FORMAT_VERSION)?;
        st.serialize_field("torus_rank", &self.torus_rank)?;
        let blocks: Vec<_> = self.blocks.iter().map(BlockSpec).collect();
        st.serialize_field("blocks", &blocks)?;
        st.serialize_field("weights", &Rows(&self.weights))?;
        if let Some(mode) = &self.mode {
            st.serialize_field("mode", mode)?;
        }
        if let Some(b) = &self.free_dim_bound {
            st.serialize_field("free_dim_bound", b)?;
        }
        st.end()
    }
}

/// Parses and structurally checks an input document.
///
/// Weight rows are not validated here; a row like `[2, 0]` parses fine.
pub fn parse_input(text: &str) -> Result<InputDocument, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError {
        location: Location::Position {
            line: e.line(),
            column: e.column(),
        },
        message: syntax_message(&e),
    })?;
    let root = object(&value, "")?;
    for key in root.keys() {
        if !FIELDS.contains(&key.as_str()) {
            return Err(ParseError::at(key, format!("unknown field `{key}`")));
        }
    }
    let required = |key: &str| {
        root.get(key)
            .ok_or_else(|| ParseError::at(key, "missing required field"))
    };

    match required("format_version")? {
        Value::String(v) if v == FORMAT_VERSION => {}
        Value::String(v) => {
            return Err(ParseError::at(
                "format_version",
                format!("unsupported format version {v:?}, expected \"1\""),
            ))
        }
        _ => return Err(ParseError::at("format_version", "expected a string")),
    }

    let torus_rank = small_int(required("torus_rank")?, "torus_rank")?;
    if torus_rank == 0 {
        return Err(ParseError::at("torus_rank", "torus rank must be positive"));
    }

    let blocks_value = required("blocks")?;
    let Value::Array(items) = blocks_value else {
        return Err(ParseError::at("blocks", "expected a list of blocks"));
    };
    if items.is_empty() {
        return Err(ParseError::at("blocks", "at least one block is required"));
    }
    let blocks = items
        .iter()
        .enumerate()
        .map(|(i, b)| parse_block(b, &format!("blocks[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let m: usize = blocks.iter().map(|b| b.facet_count()).sum();

    let Value::Array(rows) = required("weights")? else {
        return Err(ParseError::at("weights", "expected a list of rows"));
    };
    if rows.len() != m {
        return Err(ParseError::at(
            "weights",
            format!(
                "blocks imply {m} facets but {} weight rows were given",
                rows.len()
            ),
        ));
    }
    let mut weights = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let path = format!("weights[{i}]");
        let Value::Array(entries) = row else {
            return Err(ParseError::at(&path, "expected a row of integers"));
        };
        if entries.len() != torus_rank {
            return Err(ParseError::at(
                &path,
                format!(
                    "row has {} entries but torus_rank is {torus_rank}",
                    entries.len()
                ),
            ));
        }
        let parsed = entries
            .iter()
            .enumerate()
            .map(|(j, x)| integer(x, &format!("{path}[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        weights.push(parsed);
    }

    let mode = match root.get("mode") {
        None => None,
        Some(Value::String(s)) if s == "manifold" => Some(Mode::Manifold),
        Some(Value::String(s)) if s == "orbifold" => Some(Mode::Orbifold),
        Some(_) => {
            return Err(ParseError::at(
                "mode",
                "expected \"manifold\" or \"orbifold\"",
            ))
        }
    };
    let free_dim_bound = match root.get("free_dim_bound") {
        None => None,
        Some(v) => {
            let b = small_int(v, "free_dim_bound")?;
            if b == 0 {
                return Err(ParseError::at("free_dim_bound", "bound must be positive"));
            }
            Some(
                u32::try_from(b)
                    .map_err(|_| ParseError::at("free_dim_bound", "bound too large"))?,
            )
        }
    };

    Ok(InputDocument {
        torus_rank,
        blocks,
        weights,
        mode,
        free_dim_bound,
    })
}

fn syntax_message(e: &serde_json::Error) -> String {
    // serde_json appends " at line L column C"; the location is reported separately.
    let full = e.to_string();
    match full.rfind(" at line ") {
        Some(i) => full[..i].to_string(),
        None => full,
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ParseError> {
    v.as_object()
        .ok_or_else(|| ParseError::at(path, "expected an object"))
}

fn parse_block(v: &Value, path: &str) -> Result<Block, ParseError> {
    let obj = object(v, path)?;
    for key in obj.keys() {
        if key != "type" && key != "dim" {
            return Err(ParseError::at(
                &format!("{path}.{key}"),
                format!("unknown field `{key}`"),
            ));
        }
    }
    let kind = match obj.get("type") {
        Some(Value::String(s)) if s == "simplex" => BlockKind::Simplex,
        Some(Value::String(s)) if s == "suspension" => BlockKind::Suspension,
        Some(Value::String(s)) => {
            return Err(ParseError::at(
                &format!("{path}.type"),
                format!("unknown block type {s:?}, expected \"simplex\" or \"suspension\""),
            ))
        }
        Some(_) => return Err(ParseError::at(&format!("{path}.type"), "expected a string")),
        None => {
            return Err(ParseError::at(
                &format!("{path}.type"),
                "missing required field",
            ))
        }
    };
    let dim_path = format!("{path}.dim");
    let dim = small_int(
        obj.get("dim")
            .ok_or_else(|| ParseError::at(&dim_path, "missing required field"))?,
        &dim_path,
    )?;
    Block::new(kind, dim).map_err(|e| ParseError::at(&dim_path, e.to_string()))
}

/// A native JSON integer or a decimal string, of any magnitude.
fn integer(v: &Value, path: &str) -> Result<BigInt, ParseError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => {
            return Err(ParseError::at(
                path,
                "expected an integer or a decimal string",
            ))
        }
    };
    let digits = text.strip_prefix('-').unwrap_or(&text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::at(path, format!("{text:?} is not an integer")));
    }
    Ok(BigInt::from_str(&text).expect("decimal digits"))
}

fn small_int(v: &Value, path: &str) -> Result<usize, ParseError> {
    integer(v, path)?
        .to_usize()
        .ok_or_else(|| ParseError::at(path, "expected a non-negative integer of moderate size"))
}
