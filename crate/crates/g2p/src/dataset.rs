//! Prepared dataset directories.
//!
//! A prepared directory holds `lexicon.tsv` (every parsed entry), one
//! tabular lexicon per partition (`train.tsv`, `validation.tsv`,
//! `test.tsv`) and the symbol inventories `letters.txt` and `phonemes.txt`,
//! one symbol per line with reserved symbols first.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use g2p_core::lexicon::{
    parse_lexicon, serialize_lexicon, DatasetSplit, LexiconEntry, LexiconError, LexiconFormat, Partition,
    SymbolKind, SymbolTable,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: LexiconError },
}

pub fn read_text(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), DatasetError> {
    fs::write(path, text).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

pub fn partition_file(partition: Partition) -> &'static str {
    match partition {
        Partition::Train => "train.tsv",
        Partition::Validation => "validation.tsv",
        Partition::Test => "test.tsv",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub split: DatasetSplit,
    pub letters: SymbolTable,
    pub phonemes: SymbolTable,
}

fn table_text(table: &SymbolTable) -> String {
    table.symbols().iter().map(|s| format!("{s}\n")).collect()
}

impl Dataset {
    pub fn write(&self, dir: &Path, all: &[LexiconEntry]) -> Result<(), DatasetError> {
        fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
        write_text(&dir.join("lexicon.tsv"), &serialize_lexicon(all))?;
        for p in [Partition::Train, Partition::Validation, Partition::Test] {
            write_text(&dir.join(partition_file(p)), &serialize_lexicon(self.split.partition(p)))?;
        }
        write_text(&dir.join("letters.txt"), &table_text(&self.letters))?;
        write_text(&dir.join("phonemes.txt"), &table_text(&self.phonemes))
    }

    pub fn read(dir: &Path) -> Result<Self, DatasetError> {
        let lex = |p: Partition| -> Result<Vec<LexiconEntry>, DatasetError> {
            let path = dir.join(partition_file(p));
            parse_lexicon(&read_text(&path)?, LexiconFormat::Tabular, false)
                .map_err(|source| DatasetError::Lexicon { path, source })
        };
        let table = |name: &str, kind| -> Result<SymbolTable, DatasetError> {
            let path = dir.join(name);
            let symbols = read_text(&path)?.lines().map(String::from).collect();
            SymbolTable::from_symbols(kind, symbols).map_err(|source| DatasetError::Lexicon { path, source })
        };
        Ok(Self {
            split: DatasetSplit {
                train: lex(Partition::Train)?,
                validation: lex(Partition::Validation)?,
                test: lex(Partition::Test)?,
            },
            letters: table("letters.txt", SymbolKind::Letter)?,
            phonemes: table("phonemes.txt", SymbolKind::Phoneme)?,
        })
    }
}
