//! Binary model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "G2PM"                      magic
//! u32                         format version (1)
//! u8                          architecture tag (0 encdec, 1 uni, 2 bi)
//! u32 x5                      letter emb, phoneme emb, hidden, layers, window
//! u64                         seed
//! f64                         init scale
//! table x2                    letters then phonemes: u32 count, then per
//!                             symbol u32 byte length + UTF-8 bytes
//! f32 ...                     every parameter tensor, row-major, in
//!                             `ModelParams` order
//! u32                         CRC-32 of every preceding byte
//! ```

use std::fs;
use std::io;
use std::path::Path;

use g2p_core::lexicon::{SymbolKind, SymbolTable};
use g2p_core::model::{Architecture, G2PModel, ModelConfig, ModelParams};
use g2p_core::nn::{Parameters, RngSeed};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"G2PM";
pub const VERSION: u32 = 1;

const MAX_DIM: usize = 1 << 16;
const MAX_DEPTH: usize = 64;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0} (expected {VERSION})")]
    UnsupportedVersion(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model file checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&u32::try_from(v).expect("value fits in u32").to_le_bytes());
}

fn put_table(out: &mut Vec<u8>, table: &SymbolTable) {
    put_u32(out, table.len());
    for s in table.symbols() {
        put_u32(out, s.len());
        out.extend_from_slice(s.as_bytes());
    }
}

pub fn encode_model(model: &G2PModel<f32>) -> Vec<u8> {
    let c = model.config();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(c.architecture.tag());
    for v in [c.letter_embedding, c.phoneme_embedding, c.hidden, c.layers, c.window] {
        put_u32(&mut out, v);
    }
    out.extend_from_slice(&c.seed.0.to_le_bytes());
    out.extend_from_slice(&c.init_scale.to_le_bytes());
    put_table(&mut out, model.letters());
    put_table(&mut out, model.phonemes());
    for t in model.params.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(ModelFileError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelFileError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn usize(&mut self) -> Result<usize, ModelFileError> {
        Ok(self.u32()? as usize)
    }

    fn table(&mut self, kind: SymbolKind) -> Result<SymbolTable, ModelFileError> {
        let n = self.usize()?;
        let mut symbols = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let len = self.usize()?;
            let s = std::str::from_utf8(self.take(len)?)
                .map_err(|_| ModelFileError::Malformed("symbol is not UTF-8".into()))?;
            symbols.push(s.to_string());
        }
        SymbolTable::from_symbols(kind, symbols).map_err(|e| ModelFileError::Malformed(e.to_string()))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<G2PModel<f32>, ModelFileError> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) { ModelFileError::Truncated } else { ModelFileError::BadMagic });
    }
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }
    let tag = r.array::<1>()?[0];
    let architecture = Architecture::from_tag(tag)
        .ok_or_else(|| ModelFileError::Malformed(format!("unknown architecture tag {tag}")))?;
    let config = ModelConfig {
        architecture,
        letter_embedding: r.usize()?,
        phoneme_embedding: r.usize()?,
        hidden: r.usize()?,
        layers: r.usize()?,
        window: r.usize()?,
        seed: RngSeed(u64::from_le_bytes(r.array()?)),
        init_scale: f64::from_le_bytes(r.array()?),
    };
    let dims = [config.letter_embedding, config.phoneme_embedding, config.hidden];
    if dims.iter().any(|&d| d > MAX_DIM) || config.layers > MAX_DEPTH || config.window > MAX_DEPTH {
        return Err(ModelFileError::Malformed(format!("implausible dimensions {dims:?}")));
    }
    let letters = r.table(SymbolKind::Letter)?;
    let phonemes = r.table(SymbolKind::Phoneme)?;
    let declared = config.param_count(letters.len(), phonemes.len());
    if declared.saturating_mul(4) > bytes.len() - r.pos {
        return Err(ModelFileError::Truncated);
    }
    let mut params = ModelParams::<f32>::zeros(&config, letters.len(), phonemes.len())
        .map_err(|e| ModelFileError::Malformed(e.to_string()))?;
    for t in params.tensors_mut() {
        let raw = r.take(4 * t.len())?;
        for (v, b) in t.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes(b.try_into().expect("chunk of 4"));
        }
    }
    let body = r.pos;
    let stored = r.u32()?;
    if r.pos != bytes.len() {
        return Err(ModelFileError::Malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let computed = crc32fast::hash(&bytes[..body]);
    if stored != computed {
        return Err(ModelFileError::Checksum { stored, computed });
    }
    G2PModel::from_parts(config, letters, phonemes, params).map_err(|e| ModelFileError::Malformed(e.to_string()))
}

pub fn save_model(model: &G2PModel<f32>, path: &Path) -> Result<(), ModelFileError> {
    Ok(fs::write(path, encode_model(model))?)
}

pub fn load_model(path: &Path) -> Result<G2PModel<f32>, ModelFileError> {
    decode_model(&fs::read(path)?)
}
