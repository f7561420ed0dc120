//! Word and query representations.
//!
//! A query of `n` words is the tensor product of its word states; its
//! coefficient tensor (the local representation) is the rank-1 outer product
//! of the words' amplitude rows. The global representation is a CP-form
//! tensor whose unit factors act as per-position filters. Their inner product
//! is always evaluated in factored form:
//!
//! ```text
//! ⟨𝓛, 𝓖⟩ = Σ_r w_r ∏_i ⟨e_{r,i}, α_i⟩
//! ```
//!
//! Dense materialization and CP-ALS exist for verification only.

mod als;
mod amplitude;
mod dense;
mod global;

pub use als::{cp_decompose, AlsOptions, AlsReport};
pub use amplitude::AmplitudeTable;
pub use dense::DenseTensor;
pub use global::GlobalRepresentation;

use crate::error::{Error, Result};
use crate::vocab::{Vocabulary, NULL_ID};

/// A query embedded at fixed order `n`: padded with NULL or truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryState {
    word_ids: Vec<usize>,
    k: usize,
    rows: Vec<f64>,
}

impl QueryState {
    pub fn word_ids(&self) -> &[usize] {
        &self.word_ids
    }

    pub fn order(&self) -> usize {
        self.word_ids.len()
    }

    pub fn basis_dim(&self) -> usize {
        self.k
    }

    /// Amplitude row `α_i` of position `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }
}

/// Maps tokens through `vocab` (unseen tokens become UNK) and embeds them.
pub fn embed_query<S: AsRef<str>>(
    words: &[S],
    vocab: &Vocabulary,
    table: &AmplitudeTable,
    order: usize,
) -> Result<QueryState> {
    let ids: Vec<usize> = words.iter().map(|w| vocab.lookup(w.as_ref())).collect();
    embed_ids(&ids, table, order)
}

/// Embeds word ids at `order`, right-padding with NULL or truncating.
pub fn embed_ids(ids: &[usize], table: &AmplitudeTable, order: usize) -> Result<QueryState> {
    if ids.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let word_ids: Vec<usize> = ids
        .iter()
        .copied()
        .chain(std::iter::repeat(NULL_ID))
        .take(order)
        .collect();
    if let Some(&bad) = word_ids.iter().find(|&&id| id >= table.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: table.len(),
        });
    }
    let rows = word_ids
        .iter()
        .flat_map(|&id| table.row(id).iter().copied())
        .collect();
    Ok(QueryState {
        word_ids,
        k: table.basis_dim(),
        rows,
    })
}

/// Dense local tensor with entries `∏_i α_{i,b_i}`.
pub fn materialize_local(q: &QueryState) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(vec![q.k; q.order()])?;
    for flat in 0..t.len() {
        let idx = t.multi_index(flat);
        t.as_mut_slice()[flat] = idx
            .iter()
            .enumerate()
            .map(|(i, &b)| q.row(i)[b])
            .product();
    }
    Ok(t)
}

/// Dense global tensor `Σ_r w_r · e_{r,1} ⊗ … ⊗ e_{r,n}`.
pub fn cp_reconstruct(g: &GlobalRepresentation) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(vec![g.basis_dim(); g.order()])?;
    for flat in 0..t.len() {
        let idx = t.multi_index(flat);
        t.as_mut_slice()[flat] = (0..g.rank()).fold(0.0, |acc, r| {
            let term: f64 = idx
                .iter()
                .enumerate()
                .map(|(i, &b)| g.factor(r, i)[b])
                .product();
            acc + g.weights()[r] * term
        });
    }
    Ok(t)
}

/// Per-rank, per-position filter responses `⟨e_{r,i}, α_i⟩`, `rank × order`.
pub fn filter_responses(g: &GlobalRepresentation, q: &QueryState) -> Result<Vec<Vec<f64>>> {
    check_shapes(g, q)?;
    Ok((0..g.rank())
        .map(|r| {
            (0..g.order())
                .map(|i| dot(g.factor(r, i), q.row(i)))
                .collect()
        })
        .collect())
}

/// Product pooling: component `r` is `∏_i ⟨e_{r,i}, α_i⟩`.
pub fn product_pool(g: &GlobalRepresentation, q: &QueryState) -> Result<Vec<f64>> {
    Ok(filter_responses(g, q)?
        .iter()
        .map(|row| row.iter().fold(1.0, |acc, x| acc * x))
        .collect())
}

/// `⟨𝓛, 𝓖⟩` in factored form, `O(R·n·k)`.
pub fn project(g: &GlobalRepresentation, q: &QueryState) -> Result<f64> {
    Ok(weighted_sum(g.weights(), &product_pool(g, q)?))
}

/// `Σ_r w_r · pooled_r`, accumulated left to right.
pub fn weighted_sum(weights: &[f64], pooled: &[f64]) -> f64 {
    weights
        .iter()
        .zip(pooled)
        .fold(0.0, |acc, (w, p)| acc + w * p)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn check_shapes(g: &GlobalRepresentation, q: &QueryState) -> Result<()> {
    if g.order() != q.order() || g.basis_dim() != q.basis_dim() {
        return Err(Error::ShapeMismatch(format!(
            "global representation of order {} and dimension {} against query of order {} and dimension {}",
            g.order(),
            g.basis_dim(),
            q.order(),
            q.basis_dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::UNK_ID;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Vocabulary, AmplitudeTable) {
        let mut vocab = Vocabulary::new();
        for w in ["dogs", "chase", "cats"] {
            vocab.insert(w);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let table = AmplitudeTable::random(vocab.len(), 2, &mut rng);
        (vocab, table)
    }

    fn query_from_rows(rows: &[&[f64]]) -> QueryState {
        QueryState {
            word_ids: (0..rows.len()).map(|i| i + 2).collect(),
            k: rows[0].len(),
            rows: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[test]
    fn padding_truncation_and_oov() {
        let (vocab, table) = setup();
        let cats = vocab.lookup("cats");
        let q = embed_query(&["cats"], &vocab, &table, 3).unwrap();
        assert_eq!(q.word_ids(), &[cats, NULL_ID, NULL_ID]);
        assert_eq!(q.row(0), table.row(cats));
        assert_eq!(q.row(1), table.row(NULL_ID));

        let q = embed_query(&["dogs", "chase", "cats"], &vocab, &table, 3).unwrap();
        assert_eq!(q.word_ids(), &[2, 3, 4]);

        let q = embed_query(&["dogs", "zzzunseen", "cats"], &vocab, &table, 3).unwrap();
        assert_eq!(q.word_ids()[1], UNK_ID);
        assert_eq!(q.row(1), table.row(UNK_ID));

        let q = embed_query(&["dogs", "chase", "cats"], &vocab, &table, 2).unwrap();
        assert_eq!(q.word_ids(), &[2, 3]);

        let empty: [&str; 0] = [];
        assert!(matches!(embed_query(&empty, &vocab, &table, 3), Err(Error::EmptyQuery)));
    }

    #[test]
    fn materialize_examples() {
        let (vocab, table) = setup();
        let q = embed_query(&["dogs"], &vocab, &table, 1).unwrap();
        assert_eq!(materialize_local(&q).unwrap().as_slice(), table.row(2));

        let q = query_from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(materialize_local(&q).unwrap().as_slice(), &[0.0, 1.0, 0.0, 0.0]);

        let q = embed_query(&["dogs", "chase", "cats"], &vocab, &table, 3).unwrap();
        assert!((materialize_local(&q).unwrap().frobenius_norm() - 1.0).abs() < 1e-12);

        let big = embed_ids(&[2; 13], &table, 13).unwrap();
        assert!(matches!(materialize_local(&big), Err(Error::DenseCapExceeded { .. })));
    }

    #[test]
    fn reconstruct_examples() {
        let g = GlobalRepresentation::new(3, 2, vec![1.0], vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let t = cp_reconstruct(&g).unwrap();
        assert_eq!(t.get(&[0, 0]), 1.0);
        assert_eq!(t.as_slice().iter().filter(|&&x| x != 0.0).count(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = GlobalRepresentation::random(1, 3, 2, 1.0, &mut rng);
        let mut factors = base.factors().to_vec();
        factors.extend_from_slice(base.factors());
        let g = GlobalRepresentation::new(2, 3, vec![0.7, -0.7], factors).unwrap();
        assert!(cp_reconstruct(&g).unwrap().as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reconstruct_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = GlobalRepresentation::random(2, 3, 2, 1.0, &mut rng);
        let t = cp_reconstruct(&g).unwrap();
        for b1 in 0..2 {
            for b2 in 0..2 {
                for b3 in 0..2 {
                    let mut expected = 0.0;
                    for r in 0..2 {
                        expected += g.weights()[r]
                            * g.factor(r, 0)[b1]
                            * g.factor(r, 1)[b2]
                            * g.factor(r, 2)[b3];
                    }
                    assert!((t.get(&[b1, b2, b3]) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let q = query_from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let g = GlobalRepresentation::new(2, 2, vec![2.0, 3.0], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(project(&g, &q).unwrap(), 5.0);

        let (vocab, table) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = GlobalRepresentation::random(3, 1, 2, 1.0, &mut rng);
        let q = embed_query(&["cats"], &vocab, &table, 1).unwrap();
        let dense = cp_reconstruct(&g).unwrap().inner(&materialize_local(&q).unwrap()).unwrap();
        assert!((project(&g, &q).unwrap() - dense).abs() < 1e-14);

        let g = GlobalRepresentation::random(2, 3, 2, 1.0, &mut rng);
        let q = embed_query(&["dogs", "chase", "cats"], &vocab, &table, 3).unwrap();
        let dense = cp_reconstruct(&g).unwrap().inner(&materialize_local(&q).unwrap()).unwrap();
        assert!((project(&g, &q).unwrap() - dense).abs() < 1e-10);

        let wrong = embed_query(&["dogs"], &vocab, &table, 2).unwrap();
        assert!(matches!(project(&g, &wrong), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn pooling_examples() {
        // factor orthogonal to the amplitude at position 1 annihilates rank 0
        let g = GlobalRepresentation::new(2, 2, vec![1.0, 1.0], vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let q = query_from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let pool = product_pool(&g, &q).unwrap();
        assert_eq!(pool, vec![0.0, 1.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let (vocab, table) = setup();
        let g = GlobalRepresentation::random(4, 3, 2, 1.0, &mut rng);
        let q = embed_query(&["cats", "dogs"], &vocab, &table, 3).unwrap();
        let pool = product_pool(&g, &q).unwrap();
        let mut sum = 0.0;
        for (w, p) in g.weights().iter().zip(&pool) {
            sum += w * p;
        }
        assert_eq!(sum.to_bits(), project(&g, &q).unwrap().to_bits());

        let g1 = GlobalRepresentation::random(3, 1, 2, 1.0, &mut rng);
        let q1 = embed_query(&["chase"], &vocab, &table, 1).unwrap();
        for (r, p) in product_pool(&g1, &q1).unwrap().iter().enumerate() {
            assert_eq!(*p, dot(g1.factor(r, 0), q1.row(0)));
        }
    }

    #[test]
    fn projection_is_linear_in_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (vocab, table) = setup();
        let g = GlobalRepresentation::random(5, 3, 2, 1.0, &mut rng);
        let q = embed_query(&["cats", "chase", "dogs"], &vocab, &table, 3).unwrap();
        let base = project(&g, &q).unwrap();
        let doubled = project(&g.with_scaled_weights(2.0), &q).unwrap();
        assert!((doubled - 2.0 * base).abs() < 1e-12);
    }
}
