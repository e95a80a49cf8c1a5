//! The word2vec binary format.
//!
//! ```text
//! "<vocab_size> <dim>\n"
//! then per entry: token bytes, 0x20, dim little-endian f32 values, optional 0x0A
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{write_atomically, EmbeddingSpace, ModelKind, Provenance};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub fn write_binary(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    write_atomically(path.as_ref(), |w| write_binary_to(space, w))
}

pub fn write_binary_to<W: Write>(space: &EmbeddingSpace, w: W) -> Result<()> {
    if space.is_empty() {
        return Err(Error::InvalidConfig("cannot write an empty space".into()));
    }
    let mut w = BufWriter::new(w);
    writeln!(w, "{} {}", space.len(), space.dim())?;
    let mut buf = Vec::with_capacity(space.dim() * 4);
    for (id, token) in space.vocab().tokens().iter().enumerate() {
        check_token(token)?;
        w.write_all(token.as_bytes())?;
        w.write_all(b" ")?;
        buf.clear();
        for v in space.vector(id) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn check_token(token: &str) -> Result<()> {
    if token.is_empty() || token.bytes().any(|b| b == b' ' || b == b'\n') {
        return Err(Error::InvalidConfig(format!(
            "token {:?} cannot be stored in the binary format",
            token
        )));
    }
    Ok(())
}

/// Read a binary vector file, keeping only tokens in `filter` when given.
///
/// The file is streamed once; with a filter, memory grows with the number of
/// retained entries rather than the file size. Duplicate detection then only
/// covers retained tokens. All-zero vectors are dropped with a warning.
pub fn read_binary(path: impl AsRef<Path>, filter: Option<&HashSet<String>>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    let mut space = read_binary_from(BufReader::with_capacity(1 << 20, file), filter)?;
    space.provenance.config = format!("binary:{}", path.display());
    Ok(space)
}

pub fn read_binary_from<R: BufRead>(mut r: R, filter: Option<&HashSet<String>>) -> Result<EmbeddingSpace> {
    let (n_entries, dim) = read_header(&mut r)?;

    let mut seen: HashSet<String> = HashSet::new();
    let mut tokens = Vec::new();
    let mut data: Vec<f32> = Vec::new();
    let mut token_buf = Vec::new();
    let mut vec_buf = vec![0u8; dim * 4];

    for index in 0..n_entries {
        let truncated = || Error::TruncatedEntry {
            index,
            expected: n_entries,
        };

        token_buf.clear();
        r.read_until(b' ', &mut token_buf)?;
        if token_buf.pop() != Some(b' ') {
            return Err(truncated());
        }
        // Some writers emit the separator newline before the next token instead.
        let start = token_buf.iter().take_while(|&&b| b == b'\n').count();
        let raw = &token_buf[start..];
        if raw.is_empty() {
            return Err(Error::MalformedRecord {
                record: index,
                message: "empty token".into(),
            });
        }

        r.read_exact(&mut vec_buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => truncated(),
            _ => Error::Io(e),
        })?;
        if r.fill_buf()?.first() == Some(&b'\n') {
            r.consume(1);
        }

        let token = match std::str::from_utf8(raw) {
            Ok(s) => s.to_owned(),
            Err(_) => {
                let lossy = String::from_utf8_lossy(raw).into_owned();
                warn!("entry {}: token is not valid UTF-8, using {:?}", index, lossy);
                lossy
            }
        };
        if filter.is_some_and(|f| !f.contains(&token)) {
            continue;
        }
        if !seen.insert(token.clone()) {
            return Err(Error::DuplicateToken(token));
        }
        tokens.push(token);
        data.extend(
            vec_buf
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
    }
    if !r.fill_buf()?.is_empty() {
        warn!("ignoring trailing bytes after {} entries", n_entries);
    }

    let vocab = Vocabulary::from_tokens(tokens)?;
    let space = EmbeddingSpace::new(
        vocab,
        dim,
        data,
        Provenance {
            kind: ModelKind::Pretrained,
            config: "binary".into(),
        },
    )?;
    let (space, dropped) = space.drop_zero_rows();
    if !dropped.is_empty() {
        warn!("dropped {} all-zero vectors (first: {:?})", dropped.len(), dropped[0]);
    }
    Ok(space)
}

fn read_header<R: BufRead>(r: &mut R) -> Result<(usize, usize)> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.pop() != Some(b'\n') {
        return Err(Error::MalformedHeader("missing header line".into()));
    }
    let text = std::str::from_utf8(&line)
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let fields: Vec<&str> = text.trim_end_matches('\r').split(' ').collect();
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("expected \"<vocab_size> <dim>\", got {:?}", text)))
    };
    if fields.len() != 2 {
        return Err(Error::MalformedHeader(format!(
            "expected \"<vocab_size> <dim>\", got {:?}",
            text
        )));
    }
    let (n, dim) = (parse(fields[0])?, parse(fields[1])?);
    if dim == 0 {
        return Err(Error::MalformedHeader("dimension must be at least 1".into()));
    }
    Ok((n, dim))
}
