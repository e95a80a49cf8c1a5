//! The word2vec text format: an optional `"<vocab_size> <dim>"` header, then
//! one `token v1 ... vdim` line per term.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{write_atomically, EmbeddingSpace, ModelKind, Provenance};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Format like C's `%.9g`, which is enough to round-trip any `f32`.
pub fn format_sig9(x: f32) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{:.8e}", x as f64);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", mantissa, sign, exp.abs())
    } else {
        let fixed = format!("{:.*}", (8 - exp) as usize, x as f64);
        trim_fraction(&fixed).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_text(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    write_atomically(path.as_ref(), |w| write_text_to(space, w))
}

pub fn write_text_to<W: Write>(space: &EmbeddingSpace, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{} {}", space.len(), space.dim())?;
    for (id, token) in space.vocab().tokens().iter().enumerate() {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidConfig(format!(
                "token {:?} cannot be stored in the text format",
                token
            )));
        }
        w.write_all(token.as_bytes())?;
        for &v in space.vector(id) {
            write!(w, " {}", format_sig9(v))?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    let mut space = read_text_from(BufReader::new(file))?;
    space.provenance.config = format!("text:{}", path.display());
    Ok(space)
}

pub fn read_text_from<R: BufRead>(r: R) -> Result<EmbeddingSpace> {
    let mut dim: Option<usize> = None;
    let mut declared: Option<usize> = None;
    let mut tokens = Vec::new();
    let mut data = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let values: Vec<&str> = fields.collect();

        if line_no == 1 && values.len() == 1 {
            if let (Ok(n), Ok(d)) = (token.parse::<usize>(), values[0].parse::<usize>()) {
                if d == 0 {
                    return Err(Error::MalformedHeader("dimension must be at least 1".into()));
                }
                declared = Some(n);
                dim = Some(d);
                continue;
            }
        }

        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(Error::DimensionMismatch {
                line: line_no,
                expected,
                found: values.len(),
            });
        }
        for v in values {
            let x: f32 = v.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad float {:?}", v),
            })?;
            data.push(x);
        }
        tokens.push(token.to_owned());
    }

    if let Some(n) = declared {
        if n != tokens.len() {
            warn!("header declares {} entries, file has {}", n, tokens.len());
        }
    }
    let dim = dim.ok_or_else(|| Error::MalformedHeader("no vectors in file".into()))?;
    let vocab = Vocabulary::from_tokens(tokens)?;
    let space = EmbeddingSpace::new(
        vocab,
        dim,
        data,
        Provenance {
            kind: ModelKind::Pretrained,
            config: "text".into(),
        },
    )?;
    let (space, dropped) = space.drop_zero_rows();
    if !dropped.is_empty() {
        warn!("dropped {} all-zero vectors (first: {:?})", dropped.len(), dropped[0]);
    }
    Ok(space)
}
