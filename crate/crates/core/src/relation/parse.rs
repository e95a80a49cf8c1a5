use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::{Direction, RelationCategory, RelationInstance};
use crate::corpus::{tokenize, TokenizerConfig};
use crate::error::{Error, Result};

static SENTENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"^\s*\d+\s+"(.*)"\s*$"#).unwrap());
static E1: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<e1>(.*?)</e1>").unwrap());
static E2: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<e2>(.*?)</e2>").unwrap());
static LABEL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([A-Za-z-]+)\s*(?:\(\s*(\w+)\s*,\s*(\w+)\s*\))?$").unwrap());

/// Tokenize an entity mention and join multi-token spans with `_`, so that
/// `New York` matches the phrase token `new_york`.
pub fn normalize_term(mention: &str) -> String {
    tokenize(mention, &TokenizerConfig::default()).join("_")
}

pub fn parse_semeval(path: impl AsRef<Path>) -> Result<Vec<RelationInstance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    parse_semeval_from(BufReader::new(file))
}

/// Parse records in the SemEval-2010 Task 8 distribution format:
///
/// ```text
/// 1    "There were apples, <e2>pears</e2> and oranges in the <e1>bowl</e1>."
/// Content-Container(e2,e1)
/// Comment:
///
/// ```
///
/// Records are numbered from 1 in error messages. The head is the first
/// argument of the label, so `Content-Container(e2,e1)` yields head `e2`.
pub fn parse_semeval_from<R: BufRead>(r: R) -> Result<Vec<RelationInstance>> {
    let mut out = Vec::new();
    let mut block: Vec<String> = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                out.push(parse_record(out.len() + 1, &block)?);
                block.clear();
            }
        } else {
            block.push(line.to_owned());
        }
    }
    if !block.is_empty() {
        out.push(parse_record(out.len() + 1, &block)?);
    }
    Ok(out)
}

fn parse_record(record: usize, lines: &[String]) -> Result<RelationInstance> {
    let malformed = |message: &str| Error::MalformedRecord {
        record,
        message: message.to_owned(),
    };

    let sentence = SENTENCE
        .captures(&lines[0])
        .ok_or_else(|| malformed("expected a numbered, quoted sentence"))?
        .get(1)
        .unwrap()
        .as_str();
    let e1 = E1
        .captures(sentence)
        .ok_or_else(|| malformed("missing <e1>...</e1>"))?;
    let e2 = E2
        .captures(sentence)
        .ok_or_else(|| malformed("missing <e2>...</e2>"))?;
    let e1 = normalize_term(&e1[1]);
    let e2 = normalize_term(&e2[1]);

    let label = lines.get(1).ok_or_else(|| malformed("missing relation label"))?.trim();
    if let Some(extra) = lines[2..].iter().find(|l| !l.trim_start().starts_with("Comment")) {
        return Err(malformed(&format!("unexpected line {:?}", extra)));
    }

    let unknown = || Error::UnknownLabel {
        location: format!("record {}", record),
        label: label.to_owned(),
    };
    let caps = LABEL.captures(label).ok_or_else(unknown)?;
    let category: RelationCategory = caps[1].parse().map_err(|_| unknown())?;
    let args = (caps.get(2).map(|m| m.as_str()), caps.get(3).map(|m| m.as_str()));

    let (head, tail, direction) = match (category, args) {
        (RelationCategory::Other, (None, None)) => (e1, e2, Direction::Undirected),
        (RelationCategory::Other, (Some(a), Some(b))) if is_arg_pair(a, b) => (e1, e2, Direction::Undirected),
        (_, (Some(a), Some(b))) if a.eq_ignore_ascii_case("e1") && b.eq_ignore_ascii_case("e2") => {
            (e1, e2, Direction::E1ToE2)
        }
        (_, (Some(a), Some(b))) if a.eq_ignore_ascii_case("e2") && b.eq_ignore_ascii_case("e1") => {
            (e2, e1, Direction::E2ToE1)
        }
        _ => return Err(unknown()),
    };

    if head.is_empty() || tail.is_empty() {
        return Err(malformed("empty entity mention"));
    }
    if head == tail {
        return Err(malformed("head and tail are the same term"));
    }
    Ok(RelationInstance {
        head,
        tail,
        category,
        direction,
    })
}

fn is_arg_pair(a: &str, b: &str) -> bool {
    let a = a.to_ascii_lowercase();
    let b = b.to_ascii_lowercase();
    (a == "e1" && b == "e2") || (a == "e2" && b == "e1")
}

pub fn parse_tsv(path: impl AsRef<Path>) -> Result<Vec<RelationInstance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    parse_tsv_from(BufReader::new(file))
}

/// Parse `head<TAB>tail<TAB>category[<TAB>direction]` lines. Blank lines and
/// `#` comments are skipped; a missing direction means undirected.
pub fn parse_tsv_from<R: BufRead>(r: R) -> Result<Vec<RelationInstance>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(bad(format!("expected 3 or 4 tab-separated fields, found {}", fields.len())));
        }
        let category: RelationCategory = fields[2].parse().map_err(|_| Error::UnknownLabel {
            location: format!("line {}", line_no),
            label: fields[2].to_owned(),
        })?;
        let direction = match fields.get(3) {
            Some(d) => d.parse().map_err(|_| bad(format!("unknown direction {:?}", d)))?,
            None => Direction::Undirected,
        };
        let head = normalize_term(fields[0]);
        let tail = normalize_term(fields[1]);
        if head.is_empty() || tail.is_empty() {
            return Err(bad("empty head or tail".into()));
        }
        if head == tail {
            return Err(bad("head and tail are the same term".into()));
        }
        out.push(RelationInstance {
            head,
            tail,
            category,
            direction,
        });
    }
    Ok(out)
}
