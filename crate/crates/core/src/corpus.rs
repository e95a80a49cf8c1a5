//! Corpus ingestion: tokenization, vocabulary construction and document encoding.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Tokens with fewer characters than this are dropped.
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_token_len: 1,
        }
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Split text into maximal runs of letters, digits and underscores.
///
/// Underscores join multi-word phrases (`new_york`) so they survive as one
/// token; leading and trailing underscores are stripped from each run.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !is_token_char(c))
        .map(|run| run.trim_matches('_'))
        .filter(|run| !run.is_empty())
        .map(|run| {
            if config.lowercase {
                run.to_lowercase()
            } else {
                run.to_owned()
            }
        })
        .filter(|tok| tok.chars().count() >= config.min_token_len)
        .collect()
}

/// Tokenize raw bytes, replacing invalid UTF-8 sequences with U+FFFD first.
pub fn tokenize_bytes(bytes: &[u8], config: &TokenizerConfig) -> Vec<String> {
    tokenize(&String::from_utf8_lossy(bytes), config)
}

/// Bidirectional token/id map with corpus frequencies.
///
/// Ids are dense, assigned by descending frequency with lexicographic
/// tie-breaking.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    id_of: HashMap<String, usize>,
    freq: Vec<u64>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn build<D, T, S>(docs: D, min_count: u64) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counter = VocabCounter::default();
        for doc in docs {
            counter.add(doc);
        }
        counter.finish(min_count)
    }

    /// A vocabulary for vectors whose corpus frequencies are unknown
    /// (loaded spaces). All frequencies are zero.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for tok in tokens {
            let tok = tok.into();
            if vocab.id_of.contains_key(&tok) {
                return Err(Error::DuplicateToken(tok));
            }
            vocab.push(tok, 0);
        }
        Ok(vocab)
    }

    fn push(&mut self, token: String, freq: u64) {
        self.id_of.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.freq.push(freq);
    }

    /// Restrict to the given ids (in the given order), renumbering densely.
    pub fn subset(&self, ids: &[usize]) -> Vocabulary {
        let mut vocab = Vocabulary {
            total_tokens: self.total_tokens,
            ..Default::default()
        };
        for &id in ids {
            vocab.push(self.tokens[id].clone(), self.freq[id]);
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.id_of.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn freq(&self, id: usize) -> u64 {
        self.freq[id]
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freq
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Map tokens to ids, dropping unknown tokens.
    pub fn encode<I, S>(&self, tokens: I) -> Vec<usize>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        tokens
            .into_iter()
            .filter_map(|t| self.id(t.as_ref()))
            .collect()
    }

    /// One `token<TAB>frequency` line per id, in id order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (tok, freq) in self.tokens.iter().zip(&self.freq) {
            writeln!(w, "{}\t{}", tok, freq)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let (tok, freq) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected token<TAB>frequency".into(),
            })?;
            let freq: u64 = freq.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad frequency: {}", e),
            })?;
            if vocab.id_of.contains_key(tok) {
                return Err(Error::DuplicateToken(tok.to_owned()));
            }
            vocab.total_tokens += freq;
            vocab.push(tok.to_owned(), freq);
        }
        Ok(vocab)
    }
}

/// Streaming frequency counter behind [`Vocabulary::build`].
#[derive(Debug, Default)]
pub struct VocabCounter {
    counts: HashMap<String, u64>,
    total: u64,
}

impl VocabCounter {
    pub fn add<T, S>(&mut self, doc: T)
    where
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for tok in doc {
            let tok = tok.as_ref();
            self.total += 1;
            match self.counts.get_mut(tok) {
                Some(c) => *c += 1,
                None => {
                    self.counts.insert(tok.to_owned(), 1);
                }
            }
        }
    }

    /// Merge another counter. Order of merging does not affect the result.
    pub fn merge(&mut self, other: VocabCounter) {
        self.total += other.total;
        for (tok, c) in other.counts {
            *self.counts.entry(tok).or_insert(0) += c;
        }
    }

    pub fn finish(self, min_count: u64) -> Result<Vocabulary> {
        if min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        let mut kept: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut vocab = Vocabulary {
            total_tokens: self.total,
            ..Default::default()
        };
        for (tok, c) in kept {
            vocab.push(tok, c);
        }
        Ok(vocab)
    }
}

/// A document as a sequence of vocabulary ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: usize,
    pub token_ids: Vec<usize>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// Encode token sequences against a vocabulary. Document ids are positions.
pub fn encode_documents<D, T, S>(docs: D, vocab: &Vocabulary) -> Vec<Document>
where
    D: IntoIterator<Item = T>,
    T: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    docs.into_iter()
        .enumerate()
        .map(|(doc_id, toks)| Document {
            doc_id,
            token_ids: vocab.encode(toks),
        })
        .collect()
}

/// A plain-text corpus on disk: either one file with one document per line,
/// or a directory whose `.txt` files (sorted by name) are one document each.
#[derive(Clone, Debug)]
pub struct Corpus {
    root: PathBuf,
}

impl Corpus {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let root = path.as_ref().to_path_buf();
        fs::metadata(&root).map_err(|e| Error::io_at(&root, e))?;
        Ok(Corpus { root })
    }

    fn txt_files(&self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        let entries = fs::read_dir(&self.root).map_err(|e| Error::io_at(&self.root, e))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_file() && path.extension().is_some_and(|ext| ext == "txt") {
                files.push(path);
            }
        }
        files.sort();
        Ok(files)
    }

    /// Visit every document's raw bytes in corpus order.
    pub fn for_each_document<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&[u8]),
    {
        if self.root.is_dir() {
            for path in self.txt_files()? {
                let mut buf = Vec::new();
                File::open(&path)
                    .and_then(|mut file| file.read_to_end(&mut buf))
                    .map_err(|e| Error::io_at(&path, e))?;
                f(&buf);
            }
        } else {
            let file = File::open(&self.root).map_err(|e| Error::io_at(&self.root, e))?;
            let mut reader = BufReader::new(file);
            let mut line = Vec::new();
            loop {
                line.clear();
                let n = reader.read_until(b'\n', &mut line)?;
                if n == 0 {
                    break;
                }
                if line.last() == Some(&b'\n') {
                    line.pop();
                }
                if line.last() == Some(&b'\r') {
                    line.pop();
                }
                f(&line);
            }
        }
        Ok(())
    }

    /// Two streaming passes: count frequencies, then encode documents.
    pub fn load(
        &self,
        tokenizer: &TokenizerConfig,
        min_count: u64,
    ) -> Result<(Vocabulary, Vec<Document>)> {
        let mut counter = VocabCounter::default();
        self.for_each_document(|bytes| counter.add(tokenize_bytes(bytes, tokenizer)))?;
        let vocab = counter.finish(min_count)?;

        let mut docs = Vec::new();
        self.for_each_document(|bytes| {
            docs.push(Document {
                doc_id: docs.len(),
                token_ids: vocab.encode(tokenize_bytes(bytes, tokenizer)),
            })
        })?;
        Ok((vocab, docs))
    }
}
