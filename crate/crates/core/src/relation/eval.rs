use std::collections::{BTreeSet, HashSet};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parse::normalize_term;
use super::{RelationCategory, RelationInstance};
use crate::error::{Error, Result};
use crate::store::{EmbeddingSpace, NeighborList};

/// How the query terms are chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingSpec {
    /// Query exactly these terms (those missing from the space are skipped).
    Terms(Vec<String>),
    /// Draw `n` distinct relation heads present in the space, seeded.
    Random { n: usize, seed: u64 },
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec::Random { n: 100, seed: 42 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub k: usize,
    pub sample: SamplingSpec,
    /// Also count `(h, x)` as reproduced when `h` is among the neighbors of `x`.
    pub symmetric: bool,
    /// Count instances with an out-of-vocabulary participant in `N`.
    pub strict_oov: bool,
    /// Only terms in this list may be sampled (e.g. a list of nouns).
    pub allow: Option<BTreeSet<String>>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k: 10,
            sample: SamplingSpec::default(),
            symmetric: true,
            strict_oov: false,
            allow: None,
        }
    }
}

impl EvalOptions {
    pub fn summary(&self) -> String {
        let sample = match &self.sample {
            SamplingSpec::Terms(t) => format!("terms({})", t.len()),
            SamplingSpec::Random { n, seed } => format!("random(n={}, seed={})", n, seed),
        };
        format!(
            "k={} sample={} symmetric={} strict_oov={} allow_list={}",
            self.k,
            sample,
            self.symmetric,
            self.strict_oov,
            self.allow.as_ref().map_or("none".to_owned(), |a| a.len().to_string())
        )
    }
}

/// Per-category metrics; `total` is the overall relation count RC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: RelationCategory,
    pub n: usize,
    pub total: usize,
    pub relations: usize,
    pub retrieved: usize,
    pub r_prec: f64,
    pub r_rec: f64,
    pub r_prec_undefined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub space_name: String,
    pub provenance: String,
    pub config: String,
    pub k: usize,
    pub seed: Option<u64>,
    pub sample_terms: Vec<String>,
    pub n_relations: usize,
    pub oov_skipped: usize,
    pub rc: usize,
    pub tr: usize,
    pub retrieved: usize,
    pub ssric: f64,
    pub r_prec: f64,
    pub r_rec: f64,
    /// Set when nothing was retrieved, in which case `r_prec` is reported as 0.
    pub r_prec_undefined: bool,
    pub per_category: Vec<CategoryRow>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

struct Resolved<'a> {
    instance: &'a RelationInstance,
    ids: Option<(usize, usize)>,
}

/// Replay `relations` through `space` and compute the reproduction metrics.
pub fn evaluate(
    space: &EmbeddingSpace,
    space_name: &str,
    relations: &[RelationInstance],
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if relations.is_empty() {
        return Err(Error::InvalidConfig("no relations to evaluate".into()));
    }
    if opts.k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let max_k = space.len().saturating_sub(1);
    if opts.k > max_k {
        return Err(Error::KExceedsVocabulary { k: opts.k, max: max_k });
    }
    let vocab = space.vocab();

    let resolved: Vec<Resolved> = relations
        .iter()
        .map(|r| Resolved {
            instance: r,
            ids: vocab.id(&r.head).zip(vocab.id(&r.tail)),
        })
        .collect();
    let in_vocab = resolved.iter().filter(|r| r.ids.is_some()).count();
    let oov_skipped = relations.len() - in_vocab;
    let eval_set: Vec<&Resolved> = resolved
        .iter()
        .filter(|r| opts.strict_oov || r.ids.is_some())
        .collect();
    let n_relations = eval_set.len();

    let allowed = |t: &str| opts.allow.as_ref().is_none_or(|a| a.contains(t));
    let (sample, seed): (Vec<usize>, Option<u64>) = match &opts.sample {
        SamplingSpec::Terms(terms) => {
            let ids: BTreeSet<usize> = terms
                .iter()
                .map(|t| normalize_term(t))
                .filter(|t| allowed(t))
                .filter_map(|t| vocab.id(&t))
                .collect();
            (ids.into_iter().collect(), None)
        }
        SamplingSpec::Random { n, seed } => {
            let heads: BTreeSet<&str> = eval_set
                .iter()
                .filter(|r| r.ids.is_some() && allowed(&r.instance.head))
                .map(|r| r.instance.head.as_str())
                .collect();
            let heads: Vec<&str> = heads.into_iter().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let picked: BTreeSet<usize> = heads
                .choose_multiple(&mut rng, (*n).min(heads.len()))
                .map(|h| vocab.id(h).unwrap())
                .collect();
            (picked.into_iter().collect(), Some(*seed))
        }
    };
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }

    let neighbors: Vec<NeighborList> = sample.par_iter().map(|&t| space.top_k_id(t, opts.k)).collect();
    let neighbor_sets: Vec<HashSet<usize>> = neighbors.iter().map(|nl| nl.ids().collect()).collect();
    let position = |id: usize| sample.binary_search(&id).ok();
    let has_neighbor = |query: usize, n: usize| position(query).is_some_and(|p| neighbor_sets[p].contains(&n));

    let mut reproduced = vec![false; eval_set.len()];
    let mut returning = vec![false; sample.len()];
    for (i, r) in eval_set.iter().enumerate() {
        let Some((h, x)) = r.ids else { continue };
        let forward = has_neighbor(h, x);
        let backward = opts.symmetric && has_neighbor(x, h);
        if forward {
            returning[position(h).unwrap()] = true;
        }
        if backward {
            returning[position(x).unwrap()] = true;
        }
        reproduced[i] = forward || backward;
    }
    let rc = reproduced.iter().filter(|&&r| r).count();
    let tr = returning.iter().filter(|&&r| r).count();

    let count_retrieved = |participants: &HashSet<usize>| -> usize {
        neighbors
            .iter()
            .map(|nl| nl.ids().filter(|n| participants.contains(n)).count())
            .sum()
    };
    let participants_of = |cat: Option<RelationCategory>| -> HashSet<usize> {
        eval_set
            .iter()
            .filter(|r| cat.is_none_or(|c| r.instance.category == c))
            .flat_map(|r| {
                [vocab.id(&r.instance.head), vocab.id(&r.instance.tail)]
                    .into_iter()
                    .flatten()
            })
            .collect()
    };
    let retrieved = count_retrieved(&participants_of(None));

    let per_category = RelationCategory::ALL
        .into_iter()
        .map(|c| {
            let in_cat = |i: &usize| eval_set[*i].instance.category == c;
            let relations = (0..eval_set.len()).filter(in_cat).count();
            let n = (0..eval_set.len()).filter(in_cat).filter(|&i| reproduced[i]).count();
            let retrieved = count_retrieved(&participants_of(Some(c)));
            CategoryRow {
                category: c,
                n,
                total: rc,
                relations,
                retrieved,
                r_prec: ratio(n, retrieved),
                r_rec: ratio(n, relations),
                r_prec_undefined: retrieved == 0,
            }
        })
        .collect();

    Ok(EvalReport {
        space_name: space_name.to_owned(),
        provenance: space.provenance().to_string(),
        config: opts.summary(),
        k: opts.k,
        seed,
        sample_terms: sample.iter().map(|&t| vocab.token(t).to_owned()).collect(),
        n_relations,
        oov_skipped,
        rc,
        tr,
        retrieved,
        ssric: ratio(tr, n_relations),
        r_prec: ratio(rc, retrieved),
        r_rec: ratio(rc, n_relations),
        r_prec_undefined: retrieved == 0,
        per_category,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Direction;
    use crate::store::toy_space;

    fn toy() -> EmbeddingSpace {
        toy_space(&[("p", &[1.0, 0.0]), ("b", &[0.9, 0.1]), ("x", &[0.0, 1.0])])
    }

    fn rel(h: &str, t: &str, c: RelationCategory) -> RelationInstance {
        RelationInstance::new(h, t, c, Direction::Undirected)
    }

    fn opts(terms: &[&str], k: usize) -> EvalOptions {
        EvalOptions {
            k,
            sample: SamplingSpec::Terms(terms.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        }
    }

    #[test]
    fn toy_reproduced() {
        let rels = [rel("p", "b", RelationCategory::ContentContainer)];
        let r = evaluate(&toy(), "toy", &rels, &opts(&["p"], 1)).unwrap();
        assert_eq!((r.rc, r.tr, r.retrieved, r.n_relations), (1, 1, 1, 1));
        assert_eq!((r.ssric, r.r_prec, r.r_rec), (1.0, 1.0, 1.0));
        assert!(!r.r_prec_undefined);
        let cc = &r.per_category[RelationCategory::ContentContainer.index()];
        assert_eq!((cc.n, cc.total), (1, 1));
        assert_eq!((cc.r_prec, cc.r_rec), (1.0, 1.0));
        assert_eq!(r.per_category.iter().map(|c| c.n).sum::<usize>(), r.rc);
    }

    #[test]
    fn toy_not_reproduced() {
        let rels = [rel("p", "x", RelationCategory::Other)];
        let r = evaluate(&toy(), "toy", &rels, &opts(&["p"], 1)).unwrap();
        assert_eq!((r.rc, r.tr, r.retrieved), (0, 0, 0));
        assert_eq!((r.ssric, r.r_rec, r.r_prec), (0.0, 0.0, 0.0));
        assert!(r.r_prec_undefined);
    }

    #[test]
    fn symmetric_mode() {
        // NN(x) = {p}: (p, x) is only reproduced from x's side.
        let s = toy_space(&[("p", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("x", &[0.8, 0.2])]);
        let rels = [rel("b", "x", RelationCategory::Other), rel("p", "x", RelationCategory::Other)];
        let mut o = opts(&["x"], 1);
        let sym = evaluate(&s, "s", &rels, &o).unwrap();
        assert_eq!(sym.rc, 1);
        o.symmetric = false;
        let asym = evaluate(&s, "s", &rels, &o).unwrap();
        assert_eq!(asym.rc, 0);
    }

    #[test]
    fn oov_handling() {
        let rels = [
            rel("p", "b", RelationCategory::ContentContainer),
            rel("p", "zzz", RelationCategory::Other),
        ];
        let r = evaluate(&toy(), "toy", &rels, &opts(&["p"], 1)).unwrap();
        assert_eq!((r.oov_skipped, r.n_relations, r.rc), (1, 1, 1));
        assert_eq!(r.r_rec, 1.0);

        let mut strict = opts(&["p"], 1);
        strict.strict_oov = true;
        let r = evaluate(&toy(), "toy", &rels, &strict).unwrap();
        assert_eq!((r.oov_skipped, r.n_relations, r.rc), (1, 2, 1));
        assert_eq!(r.r_rec, 0.5);
    }

    #[test]
    fn random_sampling_uses_heads() {
        let rels = [
            rel("p", "b", RelationCategory::ContentContainer),
            rel("x", "p", RelationCategory::Other),
            rel("zzz", "p", RelationCategory::Other),
        ];
        let o = EvalOptions {
            k: 1,
            sample: SamplingSpec::Random { n: 100, seed: 3 },
            ..Default::default()
        };
        let r = evaluate(&toy(), "toy", &rels, &o).unwrap();
        assert_eq!(r.sample_terms, ["p", "x"]);
        assert_eq!(r.seed, Some(3));

        let o = EvalOptions {
            k: 1,
            sample: SamplingSpec::Random { n: 1, seed: 3 },
            allow: Some(["x".to_string()].into_iter().collect()),
            ..Default::default()
        };
        let r = evaluate(&toy(), "toy", &rels, &o).unwrap();
        assert_eq!(r.sample_terms, ["x"]);
    }

    #[test]
    fn errors() {
        let rels = [rel("p", "b", RelationCategory::Other)];
        assert!(matches!(
            evaluate(&toy(), "toy", &rels, &opts(&["nope"], 1)),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            evaluate(&toy(), "toy", &rels, &opts(&["p"], 3)),
            Err(Error::KExceedsVocabulary { k: 3, max: 2 })
        ));
        assert!(evaluate(&toy(), "toy", &[], &opts(&["p"], 1)).is_err());
    }
}
