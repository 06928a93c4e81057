//! Coordinator initialization and deterministic round orchestration.
//!
//! The coordinator is a transient function: it derives every provisioning
//! artifact (permutations for users, reversers and coded storage for
//! databases) from the root seed and is gone once the simulation starts.
//! The orchestrator keeps a plaintext shadow of the model and checks the
//! read and write correctness conditions against it at every round
//! boundary; a mismatch is a protocol bug, not a recoverable state.
//!
//! All randomness flows from the root seed through named sub-streams, so
//! any component's stream can be replayed in isolation.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::accounting::{measured_costs, storage_complexity, CostReport};
use crate::client::{
    build_write_tuples, decode_downlink, generate_delta, generate_scores, top_r_select,
    ScoreDistribution, SparseSelection,
};
use crate::error::{Error, Result};
use crate::field::DEFAULT_MODULUS;
use crate::node::DatabaseNode;
use crate::params::{Scheme, SystemParams};
use crate::perm::{build_reverser_sets, PermutationSet, PermutedIndex, RealIndex, ReverserSet};
use crate::storage::{decode_stored_subpacket, init_storage, StorageState};

fn default_modulus() -> u64 {
    DEFAULT_MODULUS
}

fn default_scale() -> u64 {
    1 << 16
}

/// Simulation configuration; the JSON schema rejects unknown fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scheme: Scheme,
    pub databases: usize,
    pub subpackets: usize,
    pub segments: usize,
    pub upload_subpackets: usize,
    pub download_subpackets: usize,
    #[serde(default = "default_modulus")]
    pub field_modulus: u64,
    pub users_per_round: usize,
    pub rounds: usize,
    pub seed: u64,
    #[serde(default)]
    pub score_distribution: ScoreDistribution,
    #[serde(default = "default_scale")]
    pub quantization_scale: u64,
}

impl SimulationConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let config: SimulationConfig =
            serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.rounds == 0 {
            return Err(Error::config("rounds must be at least 1"));
        }
        if self.users_per_round == 0 {
            return Err(Error::config("users_per_round must be at least 1"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.scheme,
            self.databases,
            self.subpackets,
            self.segments,
            self.upload_subpackets,
            self.download_subpackets,
            self.field_modulus,
        )
    }
}

/// A named deterministic RNG sub-stream of the root seed.
pub fn substream(root_seed: u64, label: &str, a: u64, b: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(a.to_le_bytes());
    hasher.update(b.to_le_bytes());
    ChaCha12Rng::from_seed(hasher.finalize().into())
}

/// Plaintext mirror of the model, maintained by the orchestrator as the
/// correctness oracle for reads and writes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowModel {
    /// `subpackets[global position - 1]`, each of length `ell`.
    pub subpackets: Vec<Vec<u64>>,
}

impl ShadowModel {
    pub fn get(&self, pair: RealIndex, params: &SystemParams) -> &[u64] {
        &self.subpackets[params.global_position(pair.subpacket, pair.segment) - 1]
    }

    pub fn add_delta(&mut self, pair: RealIndex, delta: &[u64], params: &SystemParams) {
        let slot =
            &mut self.subpackets[params.global_position(pair.subpacket, pair.segment) - 1];
        for (w, d) in slot.iter_mut().zip(delta) {
            *w = params.field.add(*w, *d);
        }
    }
}

/// Everything the coordinator hands out before leaving the system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provisioning {
    /// Users' secret.
    pub perms: PermutationSet,
    /// One reverser set per database.
    pub reversers: Vec<ReverserSet>,
    /// One coded storage state per database.
    pub storages: Vec<StorageState>,
    /// The initial plaintext model (orchestrator oracle only).
    pub model: Vec<Vec<u64>>,
}

/// Runs coordinator initialization with permutations sampled from the seed.
pub fn coordinator_init(config: &SimulationConfig) -> Result<Provisioning> {
    let params = config.params()?;
    let perms = PermutationSet::sample(
        &params,
        &mut substream(config.seed, "coordinator-permutations", 0, 0),
    );
    coordinator_init_with_permutations(config, perms)
}

/// Coordinator initialization with externally fixed permutations (used by
/// the built-in reference checks and permutation-sensitive tests).
pub fn coordinator_init_with_permutations(
    config: &SimulationConfig,
    perms: PermutationSet,
) -> Result<Provisioning> {
    let params = config.params()?;
    let q = params.field.modulus();
    let mut model_rng = substream(config.seed, "coordinator-model", 0, 0);
    let model: Vec<Vec<u64>> = (0..params.subpackets)
        .map(|_| (0..params.ell).map(|_| model_rng.gen_range(0..q)).collect())
        .collect();
    let storages = init_storage(
        &model,
        &params,
        &mut substream(config.seed, "coordinator-storage-noise", 0, 0),
    )?;
    let reversers = build_reverser_sets(
        &perms,
        &params,
        &mut substream(config.seed, "coordinator-reverser-noise", 0, 0),
    )?;
    Ok(Provisioning {
        perms,
        reversers,
        storages,
        model,
    })
}

/// One user's write activity in a round report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserWriteReport {
    pub user: usize,
    /// Real positions and plaintext deltas (oracle view, never on the wire).
    pub real: Vec<(RealIndex, Vec<u64>)>,
    /// Permuted positions as every database observed them.
    pub database_view: Vec<PermutedIndex>,
}

/// Everything measured in one round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub users: usize,
    pub writes: Vec<UserWriteReport>,
    /// Downlink set broadcast by the designated database (database view).
    pub downlink_permuted: Vec<PermutedIndex>,
    /// The same set in real coordinates (oracle view).
    pub downlink_real: Vec<RealIndex>,
    /// Decoded downlink plaintexts, verified against the shadow model.
    pub reads: Vec<(RealIndex, Vec<u64>)>,
    /// Tuple counts accumulated this round, `[segment-1][subpacket-1]` in
    /// permuted coordinates; drives the next round's downlink selection.
    pub histogram: Vec<Vec<u64>>,
    pub costs: CostReport,
}

/// The running system: nodes, user secret, shadow oracle and round counter.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimulationConfig,
    pub params: SystemParams,
    pub perms: PermutationSet,
    pub nodes: Vec<DatabaseNode>,
    pub shadow: ShadowModel,
    round: usize,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let provisioning = coordinator_init(&config)?;
        Self::from_provisioning(config, provisioning)
    }

    /// Builds the simulation around externally fixed permutations.
    pub fn with_permutations(config: SimulationConfig, perms: PermutationSet) -> Result<Self> {
        config.validate()?;
        let provisioning = coordinator_init_with_permutations(&config, perms)?;
        Self::from_provisioning(config, provisioning)
    }

    fn from_provisioning(config: SimulationConfig, provisioning: Provisioning) -> Result<Self> {
        let params = config.params()?;
        let nodes = provisioning
            .storages
            .into_iter()
            .zip(provisioning.reversers)
            .enumerate()
            .map(|(i, (storage, reverser))| {
                DatabaseNode::new(i + 1, params.clone(), storage, reverser)
            })
            .collect();
        Ok(Simulation {
            config,
            params,
            perms: provisioning.perms,
            nodes,
            shadow: ShadowModel {
                subpackets: provisioning.model,
            },
            round: 1,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Decodes the full model from raw storage across databases, verifying
    /// the degree structure of every subpacket on the way.
    pub fn decode_full_model(&self) -> Result<Vec<Vec<u64>>> {
        (0..self.params.subpackets)
            .map(|s| {
                let column: Vec<u64> = self.nodes.iter().map(|n| n.storage.symbols[s]).collect();
                decode_stored_subpacket(&column, &self.params)
            })
            .collect()
    }

    fn oracle(&self, ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::OracleViolation(msg()))
        }
    }

    /// Executes one round: write phase for every user, downlink selection
    /// from the previous round's histogram, read phase, then the exact
    /// end-of-round storage-vs-shadow check.
    pub fn run_round(&mut self) -> Result<RoundReport> {
        let round = self.round;
        let params = self.params.clone();
        let users = self.config.users_per_round;

        // write phase
        let mut writes = Vec::with_capacity(users);
        for u in 0..users {
            let mut rng = substream(self.config.seed, "user", round as u64, u as u64);
            let scores = generate_scores(self.config.score_distribution, &params, &mut rng);
            let pairs = top_r_select(&scores, &params)?;
            let deltas: Vec<Vec<u64>> = pairs
                .iter()
                .map(|pair| {
                    let g = params.global_position(pair.subpacket, pair.segment) - 1;
                    generate_delta(
                        &params.field,
                        params.ell,
                        scores[g],
                        self.config.quantization_scale,
                        &mut rng,
                    )
                })
                .collect();
            let selection = SparseSelection::new(pairs.clone(), deltas.clone())?;
            let per_db = build_write_tuples(&selection, &self.perms, &params, &mut rng)?;
            let database_view: Vec<PermutedIndex> =
                per_db[0].iter().map(|t| t.position()).collect();
            for (node, tuples) in self.nodes.iter_mut().zip(&per_db) {
                node.apply_write(tuples)?;
            }
            for (pair, delta) in pairs.iter().zip(&deltas) {
                self.shadow.add_delta(*pair, delta, &params);
            }
            writes.push(UserWriteReport {
                user: u + 1,
                real: pairs.into_iter().zip(deltas).collect(),
                database_view,
            });
        }

        // downlink selection: all nodes must agree without exchanging state
        let downlink = self.nodes[0].select_downlink();
        for node in &self.nodes[1..] {
            let other = node.select_downlink();
            self.oracle(other == downlink, || {
                format!(
                    "round {round}: database {} selected a different downlink set",
                    node.index
                )
            })?;
        }
        self.nodes[0].log_downlink_broadcast(&downlink, users);

        // read phase: every user downloads the same set and checks it
        // against the shadow
        let mut reads = Vec::new();
        for _ in 0..users {
            let mut answer_sets = Vec::with_capacity(downlink.len());
            for pair in &downlink {
                let mut answers = Vec::with_capacity(self.nodes.len());
                for node in self.nodes.iter_mut() {
                    let query = node.build_read_query(*pair)?;
                    answers.push(node.answer_read_query(*pair, &query)?);
                }
                answer_sets.push(answers);
            }
            let decoded = decode_downlink(&downlink, &answer_sets, &self.perms, &params)?;
            for (real, plain) in &decoded {
                self.oracle(plain == self.shadow.get(*real, &params), || {
                    format!(
                        "round {round}: read of real (subpacket {}, segment {}) decoded {:?}, shadow has {:?}",
                        real.subpacket,
                        real.segment,
                        plain,
                        self.shadow.get(*real, &params)
                    )
                })?;
            }
            reads = decoded;
        }
        let downlink_real = reads.iter().map(|(r, _)| *r).collect();

        // end-of-round: full storage decodes to the shadow exactly
        let decoded_model = self.decode_full_model()?;
        self.oracle(decoded_model == self.shadow.subpackets, || {
            let bad = decoded_model
                .iter()
                .zip(&self.shadow.subpackets)
                .position(|(a, b)| a != b)
                .unwrap();
            format!(
                "round {round}: storage decodes to {:?} at global subpacket {}, shadow has {:?}",
                decoded_model[bad],
                bad + 1,
                self.shadow.subpackets[bad]
            )
        })?;

        // storage never grows: the lazy case-2 composition keeps each node
        // at the declared symbol count
        let expected_symbols = storage_complexity(&params).0;
        for node in &self.nodes {
            self.oracle(
                node.stored_symbol_count() as u64 == expected_symbols,
                || {
                    format!(
                        "round {round}: database {} stores {} symbols, expected {}",
                        node.index,
                        node.stored_symbol_count(),
                        expected_symbols
                    )
                },
            )?;
        }

        let rows: Vec<_> = self.nodes.iter().map(|n| n.current_trace()).collect();
        let costs = measured_costs(&rows, users, &params)?;
        let histogram = self.nodes[0].histogram_counts();
        for node in self.nodes.iter_mut() {
            node.end_round();
        }
        self.round += 1;

        Ok(RoundReport {
            round,
            users,
            writes,
            downlink_permuted: downlink,
            downlink_real,
            reads,
            histogram,
            costs,
        })
    }

    /// Runs all configured rounds.
    pub fn run(&mut self) -> Result<Vec<RoundReport>> {
        (0..self.config.rounds).map(|_| self.run_round()).collect()
    }

    /// Per-node trace CSV (call after the rounds have completed).
    pub fn trace_csv(&self, node: usize) -> String {
        crate::node::trace_csv(self.nodes[node].trace_rows())
    }
}

/// Convenience constructor for the small grids used in tests and the
/// acceptance suite.
#[allow(clippy::too_many_arguments)]
pub fn config_for(
    scheme: Scheme,
    databases: usize,
    subpackets: usize,
    segments: usize,
    upload: usize,
    download: usize,
    modulus: u64,
    users: usize,
    rounds: usize,
    seed: u64,
) -> SimulationConfig {
    SimulationConfig {
        scheme,
        databases,
        subpackets,
        segments,
        upload_subpackets: upload,
        download_subpackets: download,
        field_modulus: modulus,
        users_per_round: users,
        rounds,
        seed,
        score_distribution: ScoreDistribution::HeavyTailed,
        quantization_scale: 1 << 16,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::real_to_permuted;

    fn small_config() -> SimulationConfig {
        config_for(Scheme::Case1, 4, 12, 3, 3, 3, 257, 1, 3, 42)
    }

    #[test]
    fn strict_json_schema() {
        let json = r#"{
            "scheme": "case1", "databases": 4, "subpackets": 12,
            "segments": 3, "upload_subpackets": 3, "download_subpackets": 3,
            "users_per_round": 1, "rounds": 2, "seed": 7
        }"#;
        let config = SimulationConfig::from_json(json).unwrap();
        assert_eq!(config.field_modulus, DEFAULT_MODULUS);
        assert_eq!(config.quantization_scale, 1 << 16);

        let with_unknown = json.replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        let err = SimulationConfig::from_json(&with_unknown).unwrap_err();
        assert!(err.to_string().contains("extra"));

        let bad_divisor = json.replace("\"segments\": 3", "\"segments\": 5");
        let err = SimulationConfig::from_json(&bad_divisor).unwrap_err();
        assert!(err.to_string().contains("must divide"));
    }

    #[test]
    fn same_seed_same_artifacts() {
        let a = coordinator_init(&small_config()).unwrap();
        let b = coordinator_init(&small_config()).unwrap();
        assert_eq!(a.perms, b.perms);
        assert_eq!(a.reversers, b.reversers);
        assert_eq!(a.storages, b.storages);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let run = || {
            let mut sim = Simulation::new(small_config()).unwrap();
            let reports = sim.run().unwrap();
            serde_json::to_string(&reports).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rounds_pass_oracles_for_both_schemes() {
        for (scheme, n) in [(Scheme::Case1, 7usize), (Scheme::Case2, 6)] {
            let config = config_for(scheme, n, 12, 3, 2, 2, 1009, 3, 3, 5);
            let mut sim = Simulation::new(config).unwrap();
            let reports = sim.run().unwrap();
            assert_eq!(reports.len(), 3);
            // histogram-driven downlink: round 2 serves round 1's writes
            let written: std::collections::BTreeSet<_> = reports[0]
                .writes
                .iter()
                .flat_map(|w| w.database_view.iter().copied())
                .collect();
            for pair in &reports[1].downlink_permuted {
                assert!(written.contains(pair), "{scheme:?}: {pair:?} not written");
            }
        }
    }

    #[test]
    fn round_one_downlink_is_lexicographic_bootstrap() {
        let mut sim = Simulation::new(small_config()).unwrap();
        let report = sim.run_round().unwrap();
        let expected: Vec<PermutedIndex> = (1..=3)
            .map(|s| PermutedIndex { subpacket: s, segment: 1 })
            .collect();
        assert_eq!(report.downlink_permuted, expected);
    }

    #[test]
    fn single_user_reads_back_its_own_writes() {
        // Pr = Pr': the next round's downlink is exactly the user's last
        // write set, so the user reads back what it wrote
        let config = config_for(Scheme::Case1, 4, 12, 3, 3, 3, 1009, 1, 2, 11);
        let mut sim = Simulation::new(config).unwrap();
        let r1 = sim.run_round().unwrap();
        let r2 = sim.run_round().unwrap();
        let mut written: Vec<RealIndex> =
            r1.writes[0].real.iter().map(|(p, _)| *p).collect();
        written.sort_unstable();
        let mut served = r2.downlink_real.clone();
        served.sort_unstable();
        assert_eq!(written, served);
    }

    #[test]
    fn zero_update_write_leaves_the_model_unchanged() {
        let config = small_config();
        let mut sim = Simulation::new(config).unwrap();
        let before = sim.decode_full_model().unwrap();
        let pairs = vec![
            RealIndex { subpacket: 1, segment: 1 },
            RealIndex { subpacket: 2, segment: 2 },
        ];
        let selection =
            SparseSelection::new(pairs, vec![vec![0; sim.params.ell]; 2]).unwrap();
        let mut rng = substream(9, "test-zero-update", 0, 0);
        let per_db = build_write_tuples(&selection, &sim.perms, &sim.params, &mut rng).unwrap();
        for (node, tuples) in sim.nodes.iter_mut().zip(&per_db) {
            node.apply_write(tuples).unwrap();
        }
        assert_eq!(sim.decode_full_model().unwrap(), before);
    }

    #[test]
    fn concurrent_users_sum_on_overlapping_subpackets() {
        let config = small_config();
        let mut sim = Simulation::new(config).unwrap();
        let target = RealIndex { subpacket: 2, segment: 1 };
        let flat = sim.params.global_position(target.subpacket, target.segment) - 1;
        let before = sim.decode_full_model().unwrap()[flat].clone();
        for (user, delta) in [(0u64, 11u64), (1, 31)] {
            let selection =
                SparseSelection::new(vec![target], vec![vec![delta]]).unwrap();
            let mut rng = substream(77, "test-overlap", user, 0);
            let per_db =
                build_write_tuples(&selection, &sim.perms, &sim.params, &mut rng).unwrap();
            for (node, tuples) in sim.nodes.iter_mut().zip(&per_db) {
                node.apply_write(tuples).unwrap();
            }
        }
        let after = sim.decode_full_model().unwrap()[flat].clone();
        let f = &sim.params.field;
        assert_eq!(after[0], f.add(before[0], f.add(11, 31)));
    }

    #[test]
    fn empirical_segment_counts_follow_the_hypergeometric_pmf() {
        // uniform scores make the sparse set a uniform Pr-subset; the
        // database-observed per-segment counts across 10^4 user-rounds must
        // match the exact pmf (chi-square, df = 2, 0.001 cutoff)
        let params = SystemParams::new(Scheme::Case1, 4, 6, 2, 2, 2, 257).unwrap();
        let perms = PermutationSet::sample(&params, &mut substream(13, "perm", 0, 0));
        let mut observed = std::collections::BTreeMap::new();
        for round in 0..10_000u64 {
            let mut rng = substream(13, "user", round, 0);
            let scores = generate_scores(ScoreDistribution::Uniform, &params, &mut rng);
            let pairs = top_r_select(&scores, &params).unwrap();
            let mut counts = vec![0usize; params.segments];
            for pair in &pairs {
                let p = real_to_permuted(*pair, &perms, &params).unwrap();
                counts[p.segment - 1] += 1;
            }
            *observed.entry(counts).or_insert(0u64) += 1;
        }
        let pmf = crate::leakage::pmf_hat(6, 2, 2).unwrap();
        let chi2: f64 = pmf
            .iter()
            .map(|(x, p)| {
                use num_traits::ToPrimitive;
                let expect = 10_000.0 * p.to_f64().unwrap();
                let got = *observed.get(x).unwrap_or(&0) as f64;
                (got - expect).powi(2) / expect
            })
            .sum();
        assert!(chi2 < 13.816, "chi-square {chi2}");
    }
}
