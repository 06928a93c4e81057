//! Secret permutations, noise-added permutation-reversing matrices, and the
//! real/permuted index maps.
//!
//! Users hold the permutations; databases hold only the reversing matrices,
//! which are one-time-padded entrywise so they carry no information about
//! the underlying permutation. In `Case2` the per-segment reversers compose
//! with an inter-segment reverser through a Kronecker structure; the
//! composed matrix is never materialized, only its columns and its action
//! on vectors are evaluated from the stored factors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::{Scheme, SystemParams};

/// Dense row-major matrix over the field.
pub type Matrix = Vec<Vec<u64>>;

/// A bijection on `{1..m}`, stored as the one-based image table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds from a one-based image table (`images[k-1]` is the image of `k`).
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &v in &images {
            if v == 0 || v > m || seen[v - 1] {
                return Err(Error::config(format!(
                    "not a bijection on 1..={m}: image table {images:?}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (1..=m).collect(),
        }
    }

    /// Uniform sample by Fisher-Yates.
    pub fn sample<R: Rng>(m: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (1..=m).collect();
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            images.swap(i, j);
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image of one-based `k`.
    pub fn apply(&self, k: usize) -> usize {
        self.images[k - 1]
    }

    /// Preimage of one-based `v`.
    pub fn apply_inv(&self, v: usize) -> usize {
        self.images.iter().position(|&x| x == v).unwrap() + 1
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

/// A real (subpacket, segment) position, both one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RealIndex {
    pub subpacket: usize,
    pub segment: usize,
}

/// A permuted (subpacket, segment) position as seen by the databases.
/// Under `Case1` the segment component equals the real segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutedIndex {
    pub subpacket: usize,
    pub segment: usize,
}

/// The user-side secret: `B` within-segment permutations, plus the
/// inter-segment permutation under `Case2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSet {
    pub within: Vec<Permutation>,
    pub inter: Option<Permutation>,
}

impl PermutationSet {
    pub fn new(
        within: Vec<Permutation>,
        inter: Option<Permutation>,
        params: &SystemParams,
    ) -> Result<Self> {
        if within.len() != params.segments {
            return Err(Error::config(format!(
                "need {} within-segment permutations, got {}",
                params.segments,
                within.len()
            )));
        }
        let m = params.per_segment();
        if let Some(p) = within.iter().find(|p| p.len() != m) {
            return Err(Error::config(format!(
                "within-segment permutation has size {}, expected {m}",
                p.len()
            )));
        }
        match (params.scheme, &inter) {
            (Scheme::Case1, None) => {}
            (Scheme::Case2, Some(p)) if p.len() == params.segments => {}
            (Scheme::Case2, Some(p)) => {
                return Err(Error::config(format!(
                    "inter-segment permutation has size {}, expected {}",
                    p.len(),
                    params.segments
                )));
            }
            (Scheme::Case1, Some(_)) => {
                return Err(Error::config(
                    "case 1 does not use an inter-segment permutation",
                ));
            }
            (Scheme::Case2, None) => {
                return Err(Error::config(
                    "case 2 requires an inter-segment permutation",
                ));
            }
        }
        Ok(PermutationSet { within, inter })
    }

    /// Samples the full secret uniformly.
    pub fn sample<R: Rng>(params: &SystemParams, rng: &mut R) -> Self {
        let m = params.per_segment();
        let within = (0..params.segments)
            .map(|_| Permutation::sample(m, rng))
            .collect();
        let inter = match params.scheme {
            Scheme::Case1 => None,
            Scheme::Case2 => Some(Permutation::sample(params.segments, rng)),
        };
        PermutationSet { within, inter }
    }
}

/// Maps a real position to the permuted position sent on the wire:
/// `eta_p = P~_{phi_r}^{-1}(eta_r)`, and under `Case2` also
/// `phi_p = P^_{-1}(phi_r)`.
pub fn real_to_permuted(
    real: RealIndex,
    perms: &PermutationSet,
    params: &SystemParams,
) -> Result<PermutedIndex> {
    params.check_pair(real.subpacket, real.segment)?;
    let subpacket = perms.within[real.segment - 1].apply_inv(real.subpacket);
    let segment = match &perms.inter {
        Some(inter) => inter.apply_inv(real.segment),
        None => real.segment,
    };
    Ok(PermutedIndex { subpacket, segment })
}

/// Inverse of [`real_to_permuted`]: `phi_r = P^(phi_p)`, then
/// `eta_r = P~_{phi_r}(eta_p)`.
pub fn permuted_to_real(
    permuted: PermutedIndex,
    perms: &PermutationSet,
    params: &SystemParams,
) -> Result<RealIndex> {
    params.check_pair(permuted.subpacket, permuted.segment)?;
    let segment = match &perms.inter {
        Some(inter) => inter.apply(permuted.segment),
        None => permuted.segment,
    };
    let subpacket = perms.within[segment - 1].apply(permuted.subpacket);
    Ok(RealIndex { subpacket, segment })
}

/// The 0/1 matrix `M` with `M e_k = e_{perm(k)}`; applied to a permuted
/// vector it restores the real order.
pub fn permutation_matrix(perm: &Permutation) -> Matrix {
    let m = perm.len();
    let mut mat = vec![vec![0u64; m]; m];
    for k in 1..=m {
        mat[perm.apply(k) - 1][k - 1] = 1;
    }
    mat
}

/// One noise-added permutation-reversing matrix: `M + alpha_n^ell * noise`,
/// entrywise over the field.
pub fn build_reverser(
    field: &Field,
    perm: &Permutation,
    alpha_n: u64,
    ell: usize,
    noise: &Matrix,
) -> Result<Matrix> {
    let m = perm.len();
    if noise.len() != m || noise.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            context: "reverser noise matrix",
            expected: m,
            got: noise.len(),
        });
    }
    let scale = field.pow(alpha_n, ell as u64);
    let mut mat = permutation_matrix(perm);
    for (row, zrow) in mat.iter_mut().zip(noise) {
        for (v, z) in row.iter_mut().zip(zrow) {
            *v = field.add(*v, field.mul(scale, *z));
        }
    }
    Ok(mat)
}

/// One database's reversing matrices: `B` within-segment reversers, plus
/// the inter-segment reverser under `Case2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReverserSet {
    /// One-based database index `n`.
    pub database: usize,
    pub alpha: u64,
    pub within: Vec<Matrix>,
    pub inter: Option<Matrix>,
}

impl ReverserSet {
    /// Field elements this set occupies at the database.
    pub fn stored_symbols(&self) -> usize {
        let within: usize = self.within.iter().map(|m| m.len() * m.len()).sum();
        let inter = self.inter.as_ref().map_or(0, |m| m.len() * m.len());
        within + inter
    }
}

fn sample_matrix<R: Rng>(m: usize, q: u64, rng: &mut R) -> Matrix {
    (0..m)
        .map(|_| (0..m).map(|_| rng.gen_range(0..q)).collect())
        .collect()
}

/// Builds the reverser sets for all databases. The noise pads are drawn
/// once and shared across databases up to the `alpha_n^ell` scaling, which
/// is what keeps the write-phase noise on a single polynomial in `alpha`.
pub fn build_reverser_sets<R: Rng>(
    perms: &PermutationSet,
    params: &SystemParams,
    rng: &mut R,
) -> Result<Vec<ReverserSet>> {
    let q = params.field.modulus();
    let m = params.per_segment();
    let within_noise: Vec<Matrix> = (0..params.segments)
        .map(|_| sample_matrix(m, q, rng))
        .collect();
    let inter_noise = perms
        .inter
        .as_ref()
        .map(|_| sample_matrix(params.segments, q, rng));

    (0..params.databases)
        .map(|n| {
            let alpha = params.alphas.get(n);
            let within = perms
                .within
                .iter()
                .zip(&within_noise)
                .map(|(p, z)| build_reverser(&params.field, p, alpha, params.ell, z))
                .collect::<Result<Vec<_>>>()?;
            let inter = match (&perms.inter, &inter_noise) {
                (Some(p), Some(z)) => {
                    Some(build_reverser(&params.field, p, alpha, params.ell, z)?)
                }
                _ => None,
            };
            Ok(ReverserSet {
                database: n + 1,
                alpha,
                within,
                inter,
            })
        })
        .collect()
}

fn inter_of(rev: &ReverserSet) -> Result<&Matrix> {
    rev.inter.as_ref().ok_or(Error::Config(
        "case 2 operation on a reverser set without an inter-segment matrix".into(),
    ))
}

/// Column `c` of the combined matrix `blockdiag(R^[1..B]) * (R^ (x) I_m)`,
/// computed from the factors. With `c = (j-1)*m + i`, block `k` of the
/// column is `R^[k](:, i)` scaled by the inter entry `(k, j)`.
pub fn case2_reverser_column(
    rev: &ReverserSet,
    column: usize,
    params: &SystemParams,
) -> Result<Vec<u64>> {
    let m = params.per_segment();
    let p = params.subpackets;
    if column == 0 || column > p {
        return Err(Error::IndexOutOfRange {
            what: "reverser column",
            index: column,
            max: p,
        });
    }
    let inter = inter_of(rev)?;
    let j = (column - 1) / m; // zero-based segment of the column
    let i = (column - 1) % m; // zero-based position within the segment
    let field = &params.field;
    let mut out = Vec::with_capacity(p);
    for k in 0..params.segments {
        let scale = inter[k][j];
        let block = &rev.within[k];
        for row in 0..m {
            out.push(field.mul(scale, block[row][i]));
        }
    }
    Ok(out)
}

/// Applies the combined reverser to a length-`P` vector in two stages,
/// `O(P^2/B + B*P)` work, without materializing the product matrix.
pub fn case2_apply_reverser(
    rev: &ReverserSet,
    y: &[u64],
    params: &SystemParams,
) -> Result<Vec<u64>> {
    let m = params.per_segment();
    let b = params.segments;
    if y.len() != params.subpackets {
        return Err(Error::DimensionMismatch {
            context: "permuted update vector",
            expected: params.subpackets,
            got: y.len(),
        });
    }
    let inter = inter_of(rev)?;
    let field = &params.field;
    // stage 1: (R^ (x) I_m) y -- mix the segment blocks
    let mut mixed = vec![0u64; params.subpackets];
    for k in 0..b {
        for j in 0..b {
            let w = inter[k][j];
            if w == 0 {
                continue;
            }
            for t in 0..m {
                let v = field.mul(w, y[j * m + t]);
                mixed[k * m + t] = field.add(mixed[k * m + t], v);
            }
        }
    }
    // stage 2: per-segment reversers on each mixed block
    let mut out = vec![0u64; params.subpackets];
    for k in 0..b {
        let block = &rev.within[k];
        for row in 0..m {
            let mut acc = 0u64;
            for col in 0..m {
                acc = field.add(acc, field.mul(block[row][col], mixed[k * m + col]));
            }
            out[k * m + row] = acc;
        }
    }
    Ok(out)
}

/// Dense product `blockdiag(R^[1..B]) * (R^ (x) I_m)`, materialized.
/// Quadratic in `P`; test oracle only.
pub fn case2_dense_reverser(rev: &ReverserSet, params: &SystemParams) -> Result<Matrix> {
    (1..=params.subpackets)
        .map(|c| case2_reverser_column(rev, c, params))
        .collect::<Result<Vec<_>>>()
        .map(|cols| {
            let p = params.subpackets;
            (0..p)
                .map(|r| (0..p).map(|c| cols[c][r]).collect())
                .collect()
        })
}

/// Dense matrix-vector product over the field.
pub fn mat_vec(field: &Field, mat: &Matrix, v: &[u64]) -> Result<Vec<u64>> {
    mat.iter().map(|row| field.dot(row, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn case1_params() -> SystemParams {
        SystemParams::new(Scheme::Case1, 4, 15, 3, 4, 2, 257).unwrap()
    }

    fn case2_params() -> SystemParams {
        SystemParams::new(Scheme::Case2, 6, 12, 3, 3, 3, 257).unwrap()
    }

    fn case1_reference_perms(params: &SystemParams) -> PermutationSet {
        PermutationSet::new(
            vec![
                Permutation::from_images(vec![2, 1, 4, 5, 3]).unwrap(),
                Permutation::from_images(vec![3, 5, 2, 4, 1]).unwrap(),
                Permutation::from_images(vec![5, 2, 3, 1, 4]).unwrap(),
            ],
            None,
            params,
        )
        .unwrap()
    }

    fn case2_reference_perms(params: &SystemParams) -> PermutationSet {
        PermutationSet::new(
            vec![
                Permutation::from_images(vec![2, 4, 3, 1]).unwrap(),
                Permutation::from_images(vec![1, 3, 2, 4]).unwrap(),
                Permutation::from_images(vec![3, 1, 4, 2]).unwrap(),
            ],
            Some(Permutation::from_images(vec![2, 3, 1]).unwrap()),
            params,
        )
        .unwrap()
    }

    #[test]
    fn singleton_permutation_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let p = Permutation::sample(1, &mut rng);
        assert_eq!(p, Permutation::identity(1));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let params = case2_params();
        let a = PermutationSet::sample(&params, &mut ChaCha12Rng::seed_from_u64(9));
        let b = PermutationSet::sample(&params, &mut ChaCha12Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn fisher_yates_is_uniform_chi_square() {
        // 6000 draws over the 6 permutations of size 3, df = 5
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut counts = std::collections::BTreeMap::new();
        let draws = 6000;
        for _ in 0..draws {
            let p = Permutation::sample(3, &mut rng);
            *counts.entry(p.images().to_vec()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 20.52, "chi-square {chi2} too large"); // p = 0.001 cutoff
    }

    #[test]
    fn reverser_matches_reference_layout() {
        let f = Field::new(257).unwrap();
        let perm = Permutation::from_images(vec![2, 1, 4, 5, 3]).unwrap();
        let zero = vec![vec![0u64; 5]; 5];
        let r = build_reverser(&f, &perm, 2, 1, &zero).unwrap();
        let expected: Matrix = vec![
            vec![0, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 1],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
        ];
        assert_eq!(r, expected);
        let id = Permutation::identity(3);
        let zero3 = vec![vec![0u64; 3]; 3];
        let r = build_reverser(&f, &id, 5, 2, &zero3).unwrap();
        assert_eq!(r, permutation_matrix(&id));
    }

    #[test]
    fn reverser_reverses_every_permutation() {
        let f = Field::new(257).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let perm = Permutation::sample(5, &mut rng);
            let zero = vec![vec![0u64; 5]; 5];
            let r = build_reverser(&f, &perm, 3, 1, &zero).unwrap();
            for k in 1..=5 {
                let mut e = vec![0u64; 5];
                e[k - 1] = 1;
                let out = mat_vec(&f, &r, &e).unwrap();
                let mut expect = vec![0u64; 5];
                expect[perm.apply(k) - 1] = 1;
                assert_eq!(out, expect);
            }
        }
    }

    #[test]
    fn reverser_distribution_is_permutation_independent() {
        // exhaust all 5^4 noise matrices at m=2, q=5: the joint distribution
        // of the four entries is uniform and identical for both permutations
        let f = Field::new(5).unwrap();
        let perms = [
            Permutation::from_images(vec![1, 2]).unwrap(),
            Permutation::from_images(vec![2, 1]).unwrap(),
        ];
        let mut dists = Vec::new();
        for perm in &perms {
            let mut counts = std::collections::BTreeMap::new();
            for z in 0..625u64 {
                let noise = vec![
                    vec![z % 5, (z / 5) % 5],
                    vec![(z / 25) % 5, (z / 125) % 5],
                ];
                let r = build_reverser(&f, perm, 2, 1, &noise).unwrap();
                *counts.entry(r).or_insert(0u32) += 1;
            }
            assert_eq!(counts.len(), 625);
            assert!(counts.values().all(|c| *c == 1));
            dists.push(counts);
        }
        assert_eq!(dists[0], dists[1]);
    }

    #[test]
    fn case1_index_maps_match_reference_example() {
        let params = case1_params();
        let perms = case1_reference_perms(&params);
        let map = |s, g| {
            real_to_permuted(RealIndex { subpacket: s, segment: g }, &perms, &params).unwrap()
        };
        assert_eq!(map(2, 1), PermutedIndex { subpacket: 1, segment: 1 });
        assert_eq!(map(4, 1), PermutedIndex { subpacket: 3, segment: 1 });
        assert_eq!(map(2, 2), PermutedIndex { subpacket: 3, segment: 2 });
        assert_eq!(map(5, 3), PermutedIndex { subpacket: 1, segment: 3 });
        // downlink direction: permuted {1,3} of segment 1 are real {2,4}
        let real: Vec<usize> = [1usize, 3]
            .iter()
            .map(|&i| {
                permuted_to_real(PermutedIndex { subpacket: i, segment: 1 }, &perms, &params)
                    .unwrap()
                    .subpacket
            })
            .collect();
        assert_eq!(real, vec![2, 4]);
    }

    #[test]
    fn case2_index_maps_match_reference_example() {
        let params = case2_params();
        let perms = case2_reference_perms(&params);
        let fwd = |s, g| {
            real_to_permuted(RealIndex { subpacket: s, segment: g }, &perms, &params).unwrap()
        };
        assert_eq!(fwd(2, 1), PermutedIndex { subpacket: 1, segment: 3 });
        assert_eq!(fwd(2, 2), PermutedIndex { subpacket: 3, segment: 1 });
        assert_eq!(fwd(3, 3), PermutedIndex { subpacket: 1, segment: 2 });
        let back = permuted_to_real(
            PermutedIndex { subpacket: 1, segment: 3 },
            &perms,
            &params,
        )
        .unwrap();
        assert_eq!(back, RealIndex { subpacket: 2, segment: 1 });
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let params = case1_params();
        let perms = case1_reference_perms(&params);
        let bad = RealIndex { subpacket: 6, segment: 1 };
        assert!(real_to_permuted(bad, &perms, &params).is_err());
        let bad = PermutedIndex { subpacket: 1, segment: 4 };
        assert!(permuted_to_real(bad, &perms, &params).is_err());
    }

    #[test]
    fn case2_column_matches_reference_query() {
        // column 9 = (i, j) = (1, 3) with zero noise is e_2 padded with zeros
        let params = case2_params();
        let perms = case2_reference_perms(&params);
        let rev = noiseless_reversers(&perms, &params);
        let col = case2_reverser_column(&rev[0], 9, &params).unwrap();
        let mut expected = vec![0u64; 12];
        expected[1] = 1;
        assert_eq!(col, expected);
        assert!(case2_reverser_column(&rev[0], 13, &params).is_err());
    }

    #[test]
    fn case2_identity_perms_give_standard_basis_columns() {
        let params = case2_params();
        let perms = PermutationSet::new(
            vec![Permutation::identity(4); 3],
            Some(Permutation::identity(3)),
            &params,
        )
        .unwrap();
        let rev = noiseless_reversers(&perms, &params);
        for c in 1..=12 {
            let col = case2_reverser_column(&rev[0], c, &params).unwrap();
            let mut e = vec![0u64; 12];
            e[c - 1] = 1;
            assert_eq!(col, e);
        }
    }

    fn noiseless_reversers(perms: &PermutationSet, params: &SystemParams) -> Vec<ReverserSet> {
        struct ZeroRng;
        impl rand::RngCore for ZeroRng {
            fn next_u32(&mut self) -> u32 {
                0
            }
            fn next_u64(&mut self) -> u64 {
                0
            }
            fn fill_bytes(&mut self, dest: &mut [u8]) {
                dest.fill(0);
            }
            fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
                dest.fill(0);
                Ok(())
            }
        }
        build_reverser_sets(perms, params, &mut ZeroRng).unwrap()
    }

    #[test]
    fn case2_lazy_column_and_apply_match_dense_oracle() {
        let params = SystemParams::new(Scheme::Case2, 6, 12, 3, 3, 3, 11).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let perms = PermutationSet::sample(&params, &mut rng);
        let revs = build_reverser_sets(&perms, &params, &mut rng).unwrap();
        for rev in &revs {
            let dense = case2_dense_reverser(rev, &params).unwrap();
            for c in 1..=12usize {
                let lazy = case2_reverser_column(rev, c, &params).unwrap();
                let direct: Vec<u64> = dense.iter().map(|row| row[c - 1]).collect();
                assert_eq!(lazy, direct);
            }
            for _ in 0..5 {
                let y: Vec<u64> = (0..12).map(|_| rng.gen_range(0..11)).collect();
                let fast = case2_apply_reverser(rev, &y, &params).unwrap();
                let slow = mat_vec(&params.field, &dense, &y).unwrap();
                assert_eq!(fast, slow);
            }
        }
        let zero = vec![0u64; 12];
        assert_eq!(
            case2_apply_reverser(&revs[0], &zero, &params).unwrap(),
            zero
        );
    }

    #[test]
    fn case2_apply_places_updates_at_real_positions() {
        // reference permuted vector: markers at permuted slots 3, 5, 9 land
        // at real global positions 6, 11, 2
        let params = case2_params();
        let perms = case2_reference_perms(&params);
        let rev = noiseless_reversers(&perms, &params);
        let mut y = vec![0u64; 12];
        y[2] = 22; // (3, 1) -> real (2, 2) -> global 6
        y[4] = 33; // (1, 2) -> real (3, 3) -> global 11
        y[8] = 21; // (1, 3) -> real (2, 1) -> global 2
        let out = case2_apply_reverser(&rev[0], &y, &params).unwrap();
        let mut expected = vec![0u64; 12];
        expected[5] = 22;
        expected[10] = 33;
        expected[1] = 21;
        assert_eq!(out, expected);
    }

    proptest! {
        #[test]
        fn permuted_real_maps_compose_to_identity(seed in 0u64..500) {
            for (scheme, n) in [(Scheme::Case1, 4usize), (Scheme::Case2, 6)] {
                let params = SystemParams::new(scheme, n, 12, 3, 3, 3, 257).unwrap();
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let perms = PermutationSet::sample(&params, &mut rng);
                for segment in 1..=3usize {
                    for subpacket in 1..=4usize {
                        let real = RealIndex { subpacket, segment };
                        let p = real_to_permuted(real, &perms, &params).unwrap();
                        let back = permuted_to_real(p, &perms, &params).unwrap();
                        prop_assert_eq!(back, real);
                    }
                }
            }
        }
    }
}
