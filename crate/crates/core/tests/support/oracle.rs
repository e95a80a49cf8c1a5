//! Brute-force reference implementations, written without reusing any of the
//! library's internals. Shared by the integration tests and the acceptance
//! runner.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semspace::{
    Direction, EmbeddingSpace, EvalOptions, EvalReport, ModelKind, Provenance, RelationCategory,
    RelationInstance, SamplingSpec, Vocabulary,
};

pub fn space_from_rows(tokens: &[String], rows: &[Vec<f32>]) -> EmbeddingSpace {
    let dim = rows[0].len();
    let vocab = Vocabulary::from_tokens(tokens.iter().map(String::as_str)).unwrap();
    EmbeddingSpace::new(
        vocab,
        dim,
        rows.concat(),
        Provenance {
            kind: ModelKind::Pretrained,
            config: "oracle".into(),
        },
    )
    .unwrap()
}

/// Full cosine matrix in f64; `None` where either row has zero norm.
pub fn cosine_matrix(rows: &[Vec<f32>]) -> Vec<Vec<Option<f64>>> {
    let norm = |r: &Vec<f32>| r.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let norms: Vec<f64> = rows.iter().map(norm).collect();
    rows.iter()
        .enumerate()
        .map(|(i, a)| {
            rows.iter()
                .enumerate()
                .map(|(j, b)| {
                    if norms[i] == 0.0 || norms[j] == 0.0 {
                        return None;
                    }
                    let d: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
                    Some(d / (norms[i] * norms[j]))
                })
                .collect()
        })
        .collect()
}

/// Full sort of every other nonzero row by (score desc, id asc), cut to `k`.
pub fn brute_top_k(cos: &[Vec<Option<f64>>], query: usize, k: usize) -> Vec<(usize, f64)> {
    if cos[query][query].is_none() {
        return Vec::new();
    }
    let mut all: Vec<(usize, f64)> = (0..cos.len())
        .filter(|&j| j != query)
        .filter_map(|j| cos[query][j].map(|s| (j, s)))
        .collect();
    // insertion sort keeps the comparison logic in plain sight
    for i in 1..all.len() {
        let mut j = i;
        while j > 0 && {
            let (a, b) = (all[j - 1], all[j]);
            b.1 > a.1 || (b.1 == a.1 && b.0 < a.0)
        } {
            all.swap(j - 1, j);
            j -= 1;
        }
    }
    all.truncate(k);
    all
}

/// One randomized metric-oracle instance.
pub struct MetricCase {
    pub tokens: Vec<String>,
    pub rows: Vec<Vec<f32>>,
    pub relations: Vec<RelationInstance>,
    pub opts: EvalOptions,
}

pub fn random_metric_case(seed: u64) -> MetricCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = rng.random_range(2..=30);
    let dim = rng.random_range(1..=5);
    let tokens: Vec<String> = (0..v).map(|i| format!("w{}", i)).collect();
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(v);
    for i in 0..v {
        let row = match rng.random_range(0..10) {
            0 => vec![0.0; dim],
            1 if i > 0 => rows[rng.random_range(0..i)].clone(),
            2..=4 => (0..dim).map(|_| rng.random_range(-2i32..=2) as f32).collect(),
            _ => (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
        };
        rows.push(row);
    }
    if rows.iter().all(|r| r.iter().all(|&x| x == 0.0)) {
        rows[0][0] = 1.0;
    }

    let term = |rng: &mut ChaCha8Rng| -> String {
        if rng.random_bool(0.1) {
            format!("oov{}", rng.random_range(0..3))
        } else {
            tokens[rng.random_range(0..v)].clone()
        }
    };
    let n_rel = rng.random_range(1..=20);
    let mut relations = Vec::with_capacity(n_rel);
    while relations.len() < n_rel {
        let (h, t) = (term(&mut rng), term(&mut rng));
        if h == t {
            continue;
        }
        let c = RelationCategory::ALL[rng.random_range(0..10)];
        relations.push(RelationInstance::new(h, t, c, Direction::Undirected));
    }

    let sample = if rng.random_bool(0.5) {
        let n = rng.random_range(0..=v.min(8));
        let mut terms: Vec<String> = (0..n).map(|_| term(&mut rng)).collect();
        if rng.random_bool(0.2) {
            terms.push("never_seen".into());
        }
        SamplingSpec::Terms(terms)
    } else {
        SamplingSpec::Random {
            n: rng.random_range(1..=10),
            seed: rng.random(),
        }
    };
    let allow = rng.random_bool(0.3).then(|| {
        tokens
            .iter()
            .filter(|_| rng.random_bool(0.6))
            .cloned()
            .collect::<BTreeSet<String>>()
    });
    let opts = EvalOptions {
        k: [1, 3, 10][rng.random_range(0..3)],
        sample,
        symmetric: rng.random_bool(0.7),
        strict_oov: rng.random_bool(0.3),
        allow,
    };
    MetricCase {
        tokens,
        rows,
        relations,
        opts,
    }
}

/// What the brute-force scan expects `evaluate` to return.
#[derive(Debug, PartialEq)]
pub enum Expected {
    KTooLarge,
    EmptySample,
    Report {
        sample: Vec<String>,
        n: usize,
        oov: usize,
        rc: usize,
        tr: usize,
        retrieved: usize,
        /// (reproduced, relations, retrieved) per category
        per_category: Vec<(usize, usize, usize)>,
    },
}

pub fn brute_metrics(case: &MetricCase, report_sample: Option<&[String]>) -> Expected {
    let opts = &case.opts;
    let v = case.tokens.len();
    if opts.k > v - 1 {
        return Expected::KTooLarge;
    }
    let idx = |t: &str| case.tokens.iter().position(|x| x == t);
    let allowed = |t: &str| opts.allow.as_ref().is_none_or(|a| a.contains(t));

    let known = |r: &RelationInstance| idx(&r.head).is_some() && idx(&r.tail).is_some();
    let oov = case.relations.iter().filter(|r| !known(r)).count();
    let eval: Vec<&RelationInstance> = case
        .relations
        .iter()
        .filter(|r| opts.strict_oov || known(r))
        .collect();

    let mut sample: Vec<usize> = match &opts.sample {
        SamplingSpec::Terms(terms) => terms
            .iter()
            .filter(|t| allowed(t))
            .filter_map(|t| idx(t))
            .collect(),
        SamplingSpec::Random { n, .. } => {
            // the draw itself is the library's; check it is a valid draw
            let mut heads: Vec<usize> = eval
                .iter()
                .filter(|r| known(r) && allowed(&r.head))
                .map(|r| idx(&r.head).unwrap())
                .collect();
            heads.sort();
            heads.dedup();
            let Some(drawn) = report_sample else {
                return if heads.is_empty() {
                    Expected::EmptySample
                } else {
                    panic!("random sampling needs the reported draw")
                };
            };
            let drawn: Vec<usize> = drawn.iter().map(|t| idx(t).expect("drawn term in vocab")).collect();
            assert_eq!(drawn.len(), (*n).min(heads.len()), "sample size");
            assert!(drawn.iter().all(|d| heads.contains(d)), "sample drawn from heads");
            drawn
        }
    };
    sample.sort();
    sample.dedup();
    if sample.is_empty() {
        return Expected::EmptySample;
    }

    let cos = cosine_matrix(&case.rows);
    let nn: Vec<Vec<usize>> = sample
        .iter()
        .map(|&t| brute_top_k(&cos, t, opts.k).into_iter().map(|(j, _)| j).collect())
        .collect();
    let in_nn = |q: usize, n: usize| {
        sample
            .iter()
            .position(|&s| s == q)
            .is_some_and(|p| nn[p].contains(&n))
    };

    let reproduced: Vec<bool> = eval
        .iter()
        .map(|r| match (idx(&r.head), idx(&r.tail)) {
            (Some(h), Some(x)) => in_nn(h, x) || (opts.symmetric && in_nn(x, h)),
            _ => false,
        })
        .collect();
    let rc = reproduced.iter().filter(|&&b| b).count();
    let tr = sample
        .iter()
        .filter(|&&t| {
            eval.iter().any(|r| match (idx(&r.head), idx(&r.tail)) {
                (Some(h), Some(x)) => (t == h && in_nn(h, x)) || (opts.symmetric && t == x && in_nn(x, h)),
                _ => false,
            })
        })
        .count();

    let retrieved_for = |cat: Option<RelationCategory>| -> usize {
        let participates = |n: usize| {
            eval.iter()
                .filter(|r| cat.is_none_or(|c| r.category == c))
                .any(|r| idx(&r.head) == Some(n) || idx(&r.tail) == Some(n))
        };
        nn.iter().flatten().filter(|&&n| participates(n)).count()
    };
    let per_category = RelationCategory::ALL
        .iter()
        .map(|&c| {
            let members: Vec<usize> = (0..eval.len()).filter(|&i| eval[i].category == c).collect();
            let n = members.iter().filter(|&&i| reproduced[i]).count();
            (n, members.len(), retrieved_for(Some(c)))
        })
        .collect();

    Expected::Report {
        sample: sample.iter().map(|&i| case.tokens[i].clone()).collect(),
        n: eval.len(),
        oov,
        rc,
        tr,
        retrieved: retrieved_for(None),
        per_category,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Compare a report with the oracle: counts exactly, ratios within 1e-12.
pub fn check_report(report: &EvalReport, expected: &Expected) -> Result<(), String> {
    let Expected::Report {
        sample,
        n,
        oov,
        rc,
        tr,
        retrieved,
        per_category,
    } = expected
    else {
        return Err(format!("oracle expected an error, got {:?}", report));
    };
    let counts = (
        &report.sample_terms,
        report.n_relations,
        report.oov_skipped,
        report.rc,
        report.tr,
        report.retrieved,
    );
    if counts != (sample, *n, *oov, *rc, *tr, *retrieved) {
        return Err(format!(
            "counts differ: got {:?}, oracle {:?}",
            counts,
            (sample, n, oov, rc, tr, retrieved)
        ));
    }
    let reals = [
        (report.ssric, div(*tr, *n)),
        (report.r_prec, div(*rc, *retrieved)),
        (report.r_rec, div(*rc, *n)),
    ];
    if !reals.iter().all(|&(a, b)| close(a, b)) {
        return Err(format!("ratios differ: {:?}", reals));
    }
    if report.r_prec_undefined != (*retrieved == 0) {
        return Err("r_prec_undefined flag wrong".into());
    }
    for (row, &(cn, crel, cret)) in report.per_category.iter().zip(per_category) {
        let ok = row.n == cn
            && row.relations == crel
            && row.retrieved == cret
            && row.total == *rc
            && close(row.r_prec, div(cn, cret))
            && close(row.r_rec, div(cn, crel))
            && row.r_prec_undefined == (cret == 0);
        if !ok {
            return Err(format!("category {} differs: {:?} vs {:?}", row.category, row, (cn, crel, cret)));
        }
    }
    Ok(())
}

/// Singular values by one-sided Jacobi rotations, descending.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let m = a.len();
    let n = a[0].len();
    // work on columns
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    (*x, *y) = (c * *x - s * *y, s * *x + c * *y);
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `rows x cols` matrix with orthonormal columns, by modified Gram-Schmidt
/// on Gaussian-ish draws.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while q.len() < cols {
        let mut v: Vec<f64> = (0..rows)
            .map(|_| (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0)
            .collect();
        for _ in 0..2 {
            for b in &q {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    // column vectors -> row-major matrix
    (0..rows).map(|i| q.iter().map(|c| c[i]).collect()).collect()
}

/// `m x n` matrix `U diag(sigma) V^T` with the given spectrum.
pub fn matrix_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sigma.len();
    let u = random_orthonormal(m, r, &mut rng);
    let v = random_orthonormal(n, r, &mut rng);
    (0..m)
        .map(|i| (0..n).map(|j| (0..r).map(|k| u[i][k] * sigma[k] * v[j][k]).sum()).collect())
        .collect()
}
