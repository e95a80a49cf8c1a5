//! Synthetic corpora with known structure, for checking that trainers
//! recover what was planted.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::store::EmbeddingSpace;

/// Documents drawn from disjoint per-topic vocabularies.
#[derive(Clone, Debug)]
pub struct TopicCorpus {
    pub docs: Vec<Vec<String>>,
    /// Generating topic of every word.
    pub topic_of: HashMap<String, usize>,
}

/// `topics` disjoint vocabularies of `words_per_topic` words; each document
/// draws `doc_len` words uniformly from one topic. Documents cycle through
/// the topics, `docs_per_topic` each.
pub fn topic_corpus(
    topics: usize,
    words_per_topic: usize,
    docs_per_topic: usize,
    doc_len: usize,
    seed: u64,
) -> TopicCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |t: usize, w: usize| format!("t{}w{:02}", t, w);
    let topic_of = (0..topics)
        .flat_map(|t| (0..words_per_topic).map(move |w| (t, w)))
        .map(|(t, w)| (word(t, w), t))
        .collect();
    let docs = (0..topics * docs_per_topic)
        .map(|d| {
            let t = d % topics;
            (0..doc_len)
                .map(|_| word(t, rng.random_range(0..words_per_topic)))
                .collect()
        })
        .collect();
    TopicCorpus { docs, topic_of }
}

/// Fraction of labelled terms whose dominant dimension matches their
/// generating topic, under the best one-to-one relabelling of dimensions.
///
/// Intended for LDA spaces, where each vector is `p(topic | word)`.
pub fn topic_purity(space: &EmbeddingSpace, topic_of: &HashMap<String, usize>) -> Result<f64> {
    let n_topics = topic_of.values().max().map_or(0, |m| m + 1);
    if n_topics != space.dim() || n_topics > 8 {
        return Err(Error::InvalidConfig(format!(
            "purity needs one dimension per topic (at most 8), got {} topics and dim {}",
            n_topics,
            space.dim()
        )));
    }
    let mut pairs = Vec::new();
    for (term, &topic) in topic_of {
        let Some(v) = space.lookup(term) else { continue };
        let mut best = 0;
        for (k, &p) in v.iter().enumerate() {
            if p > v[best] {
                best = k;
            }
        }
        pairs.push((best, topic));
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let mut perm: Vec<usize> = (0..n_topics).collect();
    let mut best_hits = 0;
    permutations(&mut perm, 0, &mut |p| {
        let hits = pairs.iter().filter(|&&(dim, topic)| p[dim] == topic).count();
        best_hits = best_hits.max(hits);
    });
    Ok(best_hits as f64 / pairs.len() as f64)
}

fn permutations(p: &mut [usize], start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// Documents in which designated term pairs keep close company.
#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub docs: Vec<Vec<String>>,
    pub pairs: Vec<(String, String)>,
}

/// `n_pairs` pairs `(pa_i, pb_i)` plus `n_fillers` filler terms; `n_docs`
/// documents cycle through the pairs. In 90% of a pair's documents the two
/// terms appear interleaved (`a b a b`) inside filler text; in the rest only
/// one of them appears. Fillers are drawn uniformly everywhere.
pub fn planted_pair_corpus(n_pairs: usize, n_fillers: usize, n_docs: usize, seed: u64) -> PlantedCorpus {
    const FILLER_LEN: usize = 16;
    const BURSTS: usize = 2;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(String, String)> = (0..n_pairs)
        .map(|i| (format!("pa{:02}", i), format!("pb{:02}", i)))
        .collect();
    let filler = |i: usize| format!("f{:02}", i);

    // Exactly 90% of each pair's documents (rounded) carry both terms.
    let docs_per_pair = n_docs.div_ceil(n_pairs);
    let together = (docs_per_pair * 9).div_ceil(10);
    let mut slots: Vec<Vec<bool>> = (0..n_pairs)
        .map(|_| {
            let mut s: Vec<bool> = (0..docs_per_pair).map(|j| j < together).collect();
            s.shuffle(&mut rng);
            s
        })
        .collect();

    let mut docs = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        let p = d % n_pairs;
        let (a, b) = &pairs[p];
        let both = slots[p].pop().unwrap_or(true);
        let mut doc: Vec<String> = (0..FILLER_LEN)
            .map(|_| filler(rng.random_range(0..n_fillers)))
            .collect();
        let lone = if rng.random_bool(0.5) { a } else { b };
        for _ in 0..BURSTS {
            let burst: Vec<String> = if both {
                vec![a.clone(), b.clone(), a.clone(), b.clone()]
            } else {
                vec![lone.clone(), lone.clone()]
            };
            let at = rng.random_range(0..=doc.len());
            doc.splice(at..at, burst);
        }
        docs.push(doc);
    }
    PlantedCorpus { docs, pairs }
}

/// Write documents one per line, tokens separated by spaces.
pub fn write_corpus(docs: &[Vec<String>], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::new();
    for doc in docs {
        text.push_str(&doc.join(" "));
        text.push('\n');
    }
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}
