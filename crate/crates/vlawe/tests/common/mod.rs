#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POSITIVE: &[&str] = &[
    "good",
    "great",
    "fine",
    "nice",
    "superb",
    "lovely",
    "brilliant",
    "fun",
];
pub const NEGATIVE: &[&str] = &[
    "bad", "awful", "poor", "dull", "weak", "ugly", "boring", "messy",
];
pub const NEUTRAL: &[&str] = &[
    "the", "movie", "film", "plot", "actor", "story", "a", "is", "scene", "director", "it", "was",
];

/// Three-dimensional table: sentiment words share a region and differ in the
/// sign of the second coordinate, neutral words sit far away.
pub fn table_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut row = |w: &str, base: [f64; 3], rng: &mut ChaCha8Rng| {
        out.push_str(w);
        for b in base {
            let v = b + rng.random_range(-0.3..0.3);
            write!(out, " {v:.5}").unwrap();
        }
        out.push('\n');
    };
    for w in POSITIVE {
        row(w, [3.0, 1.0, 0.0], &mut rng);
    }
    for w in NEGATIVE {
        row(w, [3.0, -1.0, 0.0], &mut rng);
    }
    for w in NEUTRAL {
        row(w, [-3.0, 0.0, 0.0], &mut rng);
    }
    out
}

/// Binary corpus of `n` short documents, alternating labels, each with two
/// sentiment words, a few neutral words and one unknown token.
pub fn corpus_text(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let (label, pool) = if i % 2 == 0 {
            ("pos", POSITIVE)
        } else {
            ("neg", NEGATIVE)
        };
        let mut words: Vec<&str> = (0..4)
            .map(|_| NEUTRAL[rng.random_range(0..NEUTRAL.len())])
            .collect();
        words.extend((0..2).map(|_| pool[rng.random_range(0..pool.len())]));
        words.push("qwxz");
        let rot = rng.random_range(0..words.len());
        words.rotate_left(rot);
        writeln!(out, "doc{i}\t{label}\t-\t{}", words.join(" ")).unwrap();
    }
    out
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub table: PathBuf,
    pub corpus: PathBuf,
}

impl Fixture {
    pub fn new(docs: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("vectors.txt");
        let corpus = dir.path().join("corpus.tsv");
        std::fs::write(&table, table_text(7)).unwrap();
        std::fs::write(&corpus, corpus_text(docs, 11)).unwrap();
        Self { dir, table, corpus }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
