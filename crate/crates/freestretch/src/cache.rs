//! On-disk memo of preimage partitions.
//!
//! One line per entry: `rank<TAB>map<TAB>word<TAB>cylinders`, cylinders
//! comma separated and `-` for the empty set. Lines are written sorted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use freestretch_core::boundary::{BoundaryMap, PartitionCache};
use freestretch_core::{CylinderPartition, Rank, Word};

use crate::error::CliError;

const FILE: &str = "partitions.tsv";

pub struct DiskCache {
    path: Option<PathBuf>,
    memo: PartitionCache,
    dirty: bool,
}

impl DiskCache {
    pub fn disabled() -> Self {
        DiskCache { path: None, memo: PartitionCache::new(), dirty: false }
    }

    /// Loads the cache in `dir`; unreadable or malformed lines are skipped.
    pub fn open(dir: &Path) -> Self {
        let path = dir.join(FILE);
        let mut cache = DiskCache { path: Some(path.clone()), ..DiskCache::disabled() };
        if let Ok(text) = fs::read_to_string(&path) {
            for line in text.lines() {
                let _ = cache.load_line(line);
            }
        }
        cache
    }

    fn load_line(&mut self, line: &str) -> Option<()> {
        let mut fields = line.split('\t');
        let rank = Rank::new(fields.next()?.parse().ok()?).ok()?;
        let key = fields.next()?.to_string();
        let word = Word::parse(fields.next()?, rank).ok()?;
        let cells = fields.next()?;
        let words = if cells == "-" {
            Vec::new()
        } else {
            cells.split(',').map(|w| Word::parse(w, rank).ok()).collect::<Option<Vec<_>>>()?
        };
        self.memo.insert(key, word, CylinderPartition::from_words(rank, words));
        Some(())
    }

    pub fn get(&self, bm: &BoundaryMap, u: &Word) -> Option<CylinderPartition> {
        self.memo.get(&PartitionCache::key(bm.automorphism()), u).filter(|p| p.rank() == bm.rank()).cloned()
    }

    pub fn insert(&mut self, bm: &BoundaryMap, u: &Word, p: &CylinderPartition) {
        if self.path.is_some() {
            self.memo.insert(PartitionCache::key(bm.automorphism()), u.clone(), p.clone());
            self.dirty = true;
        }
    }

    pub fn save(&self) -> Result<(), CliError> {
        let Some(path) = &self.path else { return Ok(()) };
        if !self.dirty {
            return Ok(());
        }
        let fail = |e| CliError::Output(path.display().to_string(), e);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(fail)?;
        }
        let mut out = Vec::new();
        for (key, word, p) in self.memo.iter() {
            let cells = if p.is_empty() {
                String::from("-")
            } else {
                p.words().iter().map(Word::to_string).collect::<Vec<_>>().join(",")
            };
            writeln!(out, "{}\t{key}\t{word}\t{cells}", p.rank().get()).map_err(fail)?;
        }
        fs::write(path, out).map_err(fail)
    }
}
