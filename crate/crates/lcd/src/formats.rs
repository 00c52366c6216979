//! On-disk dataset formats.
//!
//! Embeddings use the LCE1 container: the magic `LCE1`, then little-endian
//! `u32` N, D and layer id, then `N·D` little-endian `f32` values row by row.
//! Tokens are JSON lines `{"id","sent","pos","word","label","span"}`, one per
//! row, with `span` defaulting to 1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lcd_core::{EmbeddingDataset, Matrix, TokenRecord};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// File magic of the embedding container.
pub const LCE1_MAGIC: [u8; 4] = *b"LCE1";
const HEADER_LEN: usize = 16;

/// Decoded LCE1 contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Lce1 {
    /// Layer the vectors were taken from.
    pub layer_id: u32,
    /// `N × D` vectors.
    pub vectors: Matrix,
}

/// Parses an LCE1 image. Non-finite values are rejected with their row.
pub fn decode_lce1(bytes: &[u8], path: &Path) -> Result<Lce1> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "malformed header: file shorter than 16 bytes"));
    }
    if bytes[..4] != LCE1_MAGIC {
        return Err(Error::format(path, "malformed header: missing LCE1 magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    let (n, d, layer_id) = (word(1) as usize, word(2) as usize, word(3));
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(path, format!("malformed header: N={n}, D={d} overflow")))?;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "header declares N={n}, D={d} ({expected} bytes) but the file has {} bytes",
                bytes.len()
            ),
        ));
    }
    let data: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let vectors = Matrix::new(n, d, data)?;
    if let Some((row, col)) = vectors.first_non_finite() {
        return Err(Error::format(path, format!("non-finite value at row {row}, column {col}")));
    }
    Ok(Lce1 { layer_id, vectors })
}

/// Serializes vectors as an LCE1 image.
pub fn encode_lce1(layer_id: u32, vectors: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * vectors.as_slice().len());
    out.extend_from_slice(&LCE1_MAGIC);
    for v in [vectors.rows() as u32, vectors.cols() as u32, layer_id] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in vectors.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads an LCE1 file.
pub fn read_lce1(path: &Path) -> Result<Lce1> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_lce1(&bytes, path)
}

/// Writes an LCE1 file.
pub fn write_lce1(path: &Path, layer_id: u32, vectors: &Matrix) -> Result<()> {
    if vectors.rows() > u32::MAX as usize || vectors.cols() > u32::MAX as usize {
        return Err(Error::Usage("matrix too large for LCE1".into()));
    }
    std::fs::write(path, encode_lce1(layer_id, vectors)).map_err(|e| Error::io(path, e))
}

fn one() -> usize {
    1
}

/// One line of the token file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLine {
    /// Row index.
    pub id: usize,
    /// Sentence index.
    pub sent: usize,
    /// Position within the sentence.
    pub pos: usize,
    /// Surface form.
    pub word: String,
    /// Ontology label, `null` when unannotated.
    pub label: Option<String>,
    /// Words covered by the row.
    #[serde(default = "one")]
    pub span: usize,
}

impl From<&TokenRecord> for TokenLine {
    fn from(t: &TokenRecord) -> Self {
        TokenLine {
            id: t.id,
            sent: t.sentence_idx,
            pos: t.token_idx,
            word: t.surface.clone(),
            label: t.label.clone(),
            span: t.span_len,
        }
    }
}

impl From<TokenLine> for TokenRecord {
    fn from(t: TokenLine) -> Self {
        TokenRecord {
            id: t.id,
            sentence_idx: t.sent,
            token_idx: t.pos,
            surface: t.word,
            label: t.label,
            span_len: t.span,
        }
    }
}

/// Reads a token file. Blank lines are ignored; every other line must be a
/// token object.
pub fn read_tokens(path: &Path) -> Result<Vec<TokenRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TokenLine = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {e}", no + 1)))?;
        out.push(t.into());
    }
    Ok(out)
}

/// Writes a token file.
pub fn write_tokens(path: &Path, tokens: &[TokenRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in tokens {
        serde_json::to_writer(&mut w, &TokenLine::from(t)).map_err(|e| Error::Internal(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads and validates an embedding file with its token file.
pub fn load_dataset(emb: &Path, tok: &Path) -> Result<EmbeddingDataset> {
    let Lce1 { layer_id, vectors } = read_lce1(emb)?;
    let tokens = read_tokens(tok)?;
    Ok(EmbeddingDataset::new(layer_id, vectors, tokens)?)
}

/// Writes a dataset as an LCE1 file plus token file.
pub fn save_dataset(ds: &EmbeddingDataset, emb: &Path, tok: &Path) -> Result<()> {
    write_lce1(emb, ds.layer_id(), ds.vectors())?;
    write_tokens(tok, ds.tokens())
}
