//! One federated-learning user: top-r selection, combined updates, permuted
//! write tuples and downlink decoding.
//!
//! Values are hidden by one-time-pad noise folded into the combined update;
//! positions are hidden by expressing everything in permuted coordinates.

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::node::WriteTuple;
use crate::params::SystemParams;
use crate::perm::{permuted_to_real, real_to_permuted, PermutationSet, PermutedIndex, RealIndex};
use crate::storage::decode_read_answers;

/// The subpackets a user chose to update, with their plaintext deltas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseSelection {
    pub pairs: Vec<RealIndex>,
    /// One length-`ell` delta vector per selected pair.
    pub deltas: Vec<Vec<u64>>,
}

impl SparseSelection {
    pub fn new(pairs: Vec<RealIndex>, deltas: Vec<Vec<u64>>) -> Result<Self> {
        if pairs.len() != deltas.len() {
            return Err(Error::DimensionMismatch {
                context: "selection pairs vs deltas",
                expected: pairs.len(),
                got: deltas.len(),
            });
        }
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != pairs.len() {
            return Err(Error::config("selection pairs must be distinct"));
        }
        Ok(SparseSelection { pairs, deltas })
    }
}

/// Picks the `P*r` subpackets with the highest scores; ties go to the lower
/// global subpacket index. Scores are indexed by global subpacket position.
pub fn top_r_select(scores: &[f64], params: &SystemParams) -> Result<Vec<RealIndex>> {
    if scores.len() != params.subpackets {
        return Err(Error::DimensionMismatch {
            context: "subpacket scores",
            expected: params.subpackets,
            got: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| {
        scores[*b]
            .partial_cmp(&scores[*a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    let m = params.per_segment();
    Ok(order
        .into_iter()
        .take(params.upload_subpackets)
        .map(|g| RealIndex {
            subpacket: g % m + 1,
            segment: g / m + 1,
        })
        .collect())
}

/// The combined update `U_n = sum_k alpha_n^{-k} Delta_k + z`. The noise
/// symbol `z` has no database dependence: the same `z` goes to all `N`
/// databases for one subpacket, and a fresh one is drawn per write.
pub fn combine_update(field: &Field, delta: &[u64], alpha_n: u64, z: u64) -> Result<u64> {
    let mut acc = field.reduce(z);
    for (k, d) in delta.iter().enumerate() {
        let coef = field.pow_signed(alpha_n, -(k as i64 + 1))?;
        acc = field.add(acc, field.mul(coef, *d));
    }
    Ok(acc)
}

/// Builds the per-database permuted `(update, subpacket, segment)` tuples
/// for one user's selection. Returns `N` tuple lists, one per database;
/// the lists differ only in the update symbol.
pub fn build_write_tuples<R: Rng>(
    sel: &SparseSelection,
    perms: &PermutationSet,
    params: &SystemParams,
    rng: &mut R,
) -> Result<Vec<Vec<WriteTuple>>> {
    let q = params.field.modulus();
    let mut per_db: Vec<Vec<WriteTuple>> =
        vec![Vec::with_capacity(sel.pairs.len()); params.databases];
    for (pair, delta) in sel.pairs.iter().zip(&sel.deltas) {
        if delta.len() != params.ell {
            return Err(Error::DimensionMismatch {
                context: "delta length",
                expected: params.ell,
                got: delta.len(),
            });
        }
        let permuted = real_to_permuted(*pair, perms, params)?;
        let z = rng.gen_range(0..q);
        for (n, tuples) in per_db.iter_mut().enumerate() {
            let value = combine_update(&params.field, delta, params.alphas.get(n), z)?;
            tuples.push(WriteTuple {
                value,
                subpacket: permuted.subpacket,
                segment: permuted.segment,
            });
        }
    }
    Ok(per_db)
}

/// Maps the broadcast permuted positions back to real positions and decodes
/// each subpacket from its `N` answers.
pub fn decode_downlink(
    permuted_pairs: &[PermutedIndex],
    answers: &[Vec<u64>],
    perms: &PermutationSet,
    params: &SystemParams,
) -> Result<Vec<(RealIndex, Vec<u64>)>> {
    if answers.len() != permuted_pairs.len() {
        return Err(Error::DimensionMismatch {
            context: "answer sets vs downlink pairs",
            expected: permuted_pairs.len(),
            got: answers.len(),
        });
    }
    permuted_pairs
        .iter()
        .zip(answers)
        .map(|(p, ans)| {
            let real = permuted_to_real(*p, perms, params)?;
            let plain = decode_read_answers(ans, params)?;
            Ok((real, plain))
        })
        .collect()
}

/// Shape of the synthetic per-subpacket significance scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreDistribution {
    /// Every subpacket equally likely to enter the sparse set.
    Uniform,
    /// Pareto-tailed scores so that a clear top-r exists.
    #[default]
    HeavyTailed,
}

/// Draws one significance score per subpacket.
pub fn generate_scores<R: Rng>(
    dist: ScoreDistribution,
    params: &SystemParams,
    rng: &mut R,
) -> Vec<f64> {
    (0..params.subpackets)
        .map(|_| match dist {
            ScoreDistribution::Uniform => rng.gen::<f64>(),
            ScoreDistribution::HeavyTailed => Pareto::new(1.0, 1.2).unwrap().sample(rng),
        })
        .collect()
}

/// Symmetric fixed-point quantization of a real-valued update into the
/// field: `round(value * scale)` taken mod `q`, negatives wrapping to
/// `q - |v|`.
pub fn quantize_update(field: &Field, value: f64, scale: u64) -> u64 {
    let v = (value * scale as f64).round() as i64;
    field.from_signed(v)
}

/// Draws a quantized pseudo-gradient delta vector for one subpacket. The
/// score scales the magnitude so selected subpackets carry the largest
/// updates.
pub fn generate_delta<R: Rng>(
    field: &Field,
    ell: usize,
    score: f64,
    scale: u64,
    rng: &mut R,
) -> Vec<u64> {
    (0..ell)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            quantize_update(field, g * score, scale)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Scheme;
    use crate::perm::Permutation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn params_case1() -> SystemParams {
        SystemParams::new(Scheme::Case1, 4, 15, 3, 4, 2, 257).unwrap()
    }

    #[test]
    fn top_r_takes_highest_scores() {
        let params = params_case1();
        let scores: Vec<f64> = (0..15).map(|i| 100.0 - i as f64).collect();
        let picked = top_r_select(&scores, &params).unwrap();
        assert_eq!(
            picked,
            vec![
                RealIndex { subpacket: 1, segment: 1 },
                RealIndex { subpacket: 2, segment: 1 },
                RealIndex { subpacket: 3, segment: 1 },
                RealIndex { subpacket: 4, segment: 1 },
            ]
        );
    }

    #[test]
    fn top_r_reference_selection() {
        // peaks at real subpackets 2 and 4 of segment 1, 2 of segment 2,
        // 5 of segment 3 (global positions 2, 4, 7, 15)
        let params = params_case1();
        let mut scores = vec![0.1; 15];
        scores[1] = 9.0;
        scores[3] = 8.0;
        scores[6] = 7.0;
        scores[14] = 6.0;
        let picked = top_r_select(&scores, &params).unwrap();
        let mut sorted = picked.clone();
        sorted.sort_unstable();
        assert_eq!(
            sorted,
            vec![
                RealIndex { subpacket: 2, segment: 1 },
                RealIndex { subpacket: 2, segment: 2 },
                RealIndex { subpacket: 4, segment: 1 },
                RealIndex { subpacket: 5, segment: 3 },
            ]
        );
    }

    #[test]
    fn top_r_all_equal_is_lexicographic() {
        let params = params_case1();
        let picked = top_r_select(&[1.0; 15], &params).unwrap();
        assert_eq!(
            picked,
            vec![
                RealIndex { subpacket: 1, segment: 1 },
                RealIndex { subpacket: 2, segment: 1 },
                RealIndex { subpacket: 3, segment: 1 },
                RealIndex { subpacket: 4, segment: 1 },
            ]
        );
    }

    #[test]
    fn combine_update_example() {
        // q=7, ell=1, Delta=[2], z=3, alpha=2: 4*2 + 3 = 11 = 4 (mod 7)
        let f7 = Field::new(7).unwrap();
        assert_eq!(combine_update(&f7, &[2], 2, 3).unwrap(), 4);
        assert_eq!(combine_update(&f7, &[0], 2, 0).unwrap(), 0);
    }

    #[test]
    fn combined_update_is_uniform_over_the_pad() {
        // exhaustive at q=5: for any fixed delta, U is uniform over z, so
        // the distribution carries no information about the delta
        let f5 = Field::new(5).unwrap();
        for delta in 0..5u64 {
            let mut counts = [0u32; 5];
            for z in 0..5u64 {
                let u = combine_update(&f5, &[delta], 3, z).unwrap();
                counts[u as usize] += 1;
            }
            assert_eq!(counts, [1, 1, 1, 1, 1]);
        }
    }

    #[test]
    fn write_tuples_match_reference_examples() {
        // case 1 reference
        let params = params_case1();
        let perms = PermutationSet::new(
            vec![
                Permutation::from_images(vec![2, 1, 4, 5, 3]).unwrap(),
                Permutation::from_images(vec![3, 5, 2, 4, 1]).unwrap(),
                Permutation::from_images(vec![5, 2, 3, 1, 4]).unwrap(),
            ],
            None,
            &params,
        )
        .unwrap();
        let pairs = vec![
            RealIndex { subpacket: 2, segment: 1 },
            RealIndex { subpacket: 4, segment: 1 },
            RealIndex { subpacket: 2, segment: 2 },
            RealIndex { subpacket: 5, segment: 3 },
        ];
        let sel = SparseSelection::new(pairs, vec![vec![1]; 4]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let tuples = build_write_tuples(&sel, &perms, &params, &mut rng).unwrap();
        assert_eq!(tuples.len(), 4);
        let positions: Vec<(usize, usize)> = tuples[0]
            .iter()
            .map(|t| (t.subpacket, t.segment))
            .collect();
        assert_eq!(positions, vec![(1, 1), (3, 1), (3, 2), (1, 3)]);
        // positions identical across databases, values differ per alpha
        for db in &tuples[1..] {
            let pos: Vec<(usize, usize)> = db.iter().map(|t| (t.subpacket, t.segment)).collect();
            assert_eq!(pos, positions);
        }

        // case 2 reference
        let params = SystemParams::new(Scheme::Case2, 6, 12, 3, 3, 3, 257).unwrap();
        let perms = PermutationSet::new(
            vec![
                Permutation::from_images(vec![2, 4, 3, 1]).unwrap(),
                Permutation::from_images(vec![1, 3, 2, 4]).unwrap(),
                Permutation::from_images(vec![3, 1, 4, 2]).unwrap(),
            ],
            Some(Permutation::from_images(vec![2, 3, 1]).unwrap()),
            &params,
        )
        .unwrap();
        let pairs = vec![
            RealIndex { subpacket: 2, segment: 1 },
            RealIndex { subpacket: 2, segment: 2 },
            RealIndex { subpacket: 3, segment: 3 },
        ];
        let sel = SparseSelection::new(pairs, vec![vec![1]; 3]).unwrap();
        let tuples = build_write_tuples(&sel, &perms, &params, &mut rng).unwrap();
        let positions: Vec<(usize, usize)> = tuples[0]
            .iter()
            .map(|t| (t.subpacket, t.segment))
            .collect();
        assert_eq!(positions, vec![(1, 3), (3, 1), (1, 2)]);
    }

    #[test]
    fn empty_selection_gives_empty_tuples() {
        let params = params_case1();
        let perms = PermutationSet::sample(&params, &mut ChaCha12Rng::seed_from_u64(0));
        let sel = SparseSelection::new(vec![], vec![]).unwrap();
        let tuples =
            build_write_tuples(&sel, &perms, &params, &mut ChaCha12Rng::seed_from_u64(0)).unwrap();
        assert!(tuples.iter().all(|t| t.is_empty()));
    }

    #[test]
    fn selection_rejects_duplicates_and_bad_lengths() {
        let p = RealIndex { subpacket: 1, segment: 1 };
        assert!(SparseSelection::new(vec![p, p], vec![vec![1], vec![2]]).is_err());
        assert!(SparseSelection::new(vec![p], vec![]).is_err());
    }

    #[test]
    fn quantization_wraps_negatives() {
        let f = Field::new(257).unwrap();
        assert_eq!(quantize_update(&f, 0.5, 2), 1);
        assert_eq!(quantize_update(&f, -0.5, 2), 256);
        assert_eq!(quantize_update(&f, 0.0, 65536), 0);
    }
}
