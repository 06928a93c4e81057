//! One database: coded storage plus reversing matrices, the downlink
//! selection rule, read query generation/answering, and permuted writes.
//!
//! Every communication a node sees is in permuted coordinates. Nodes never
//! exchange state with each other; all of them compute the same downlink
//! selection from the same received tuples.

use serde::{Deserialize, Serialize};

use crate::accounting::{downlink_index_symbols, upload_symbols_per_tuple};
use crate::error::{Error, Result};
use crate::params::{Scheme, SystemParams};
use crate::perm::{case2_apply_reverser, case2_reverser_column, mat_vec, PermutedIndex, ReverserSet};
use crate::storage::StorageState;

/// One sparse update as received by one database: the combined update
/// symbol `U_n` and the permuted position it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteTuple {
    pub value: u64,
    pub subpacket: usize,
    pub segment: usize,
}

impl WriteTuple {
    pub fn position(&self) -> PermutedIndex {
        PermutedIndex {
            subpacket: self.subpacket,
            segment: self.segment,
        }
    }
}

/// Per-position tuple counts in permuted coordinates, accumulated over one
/// round's writes and consumed by the next round's downlink selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateHistogram {
    /// `counts[segment-1][subpacket-1]`.
    counts: Vec<Vec<u64>>,
}

impl UpdateHistogram {
    pub fn zero(params: &SystemParams) -> Self {
        UpdateHistogram {
            counts: vec![vec![0; params.per_segment()]; params.segments],
        }
    }

    pub fn increment(&mut self, pos: PermutedIndex) {
        self.counts[pos.segment - 1][pos.subpacket - 1] += 1;
    }

    pub fn count(&self, pos: PermutedIndex) -> u64 {
        self.counts[pos.segment - 1][pos.subpacket - 1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// `counts[segment-1][subpacket-1]`, permuted coordinates.
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// The `P*r'` most commonly updated permuted positions, ties broken by
/// (segment, subpacket) ascending. On an all-zero histogram (round 1) this
/// degenerates to the first `P*r'` positions in permuted lexicographic
/// order.
pub fn select_downlink(hist: &UpdateHistogram, params: &SystemParams) -> Vec<PermutedIndex> {
    let mut entries: Vec<(u64, usize, usize)> = Vec::with_capacity(params.subpackets);
    for segment in 1..=params.segments {
        for subpacket in 1..=params.per_segment() {
            let pos = PermutedIndex { subpacket, segment };
            entries.push((hist.count(pos), segment, subpacket));
        }
    }
    entries.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    entries
        .into_iter()
        .take(params.download_subpackets)
        .map(|(_, segment, subpacket)| PermutedIndex { subpacket, segment })
        .collect()
}

fn mark_position(
    seen: &mut [bool],
    t: &WriteTuple,
    params: &SystemParams,
) -> Result<usize> {
    params.check_pair(t.subpacket, t.segment)?;
    let flat = params.global_position(t.subpacket, t.segment) - 1;
    if seen[flat] {
        return Err(Error::DuplicateWritePosition {
            subpacket: t.subpacket,
            segment: t.segment,
        });
    }
    seen[flat] = true;
    Ok(flat)
}

/// Assembles the per-segment permuted update vectors `Y_n^[j]` from one
/// user's tuples (case 1 layout).
pub fn case1_update_vectors(
    tuples: &[WriteTuple],
    params: &SystemParams,
) -> Result<Vec<Vec<u64>>> {
    let m = params.per_segment();
    let mut vectors = vec![vec![0u64; m]; params.segments];
    let mut seen = vec![false; params.subpackets];
    for t in tuples {
        mark_position(&mut seen, t, params)?;
        vectors[t.segment - 1][t.subpacket - 1] = t.value;
    }
    Ok(vectors)
}

/// Assembles the length-`P` permuted update vector `Y_n` (case 2 layout):
/// the tuple for permuted position `(i, j)` sits at entry `(j-1)*P/B + i`.
pub fn case2_update_vector(tuples: &[WriteTuple], params: &SystemParams) -> Result<Vec<u64>> {
    let mut y = vec![0u64; params.subpackets];
    let mut seen = vec![false; params.subpackets];
    for t in tuples {
        let flat = mark_position(&mut seen, t, params)?;
        y[flat] = t.value;
    }
    Ok(y)
}

/// One row of a node's trace log, one per round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    /// Permuted positions received in write tuples, all users concatenated.
    pub received: Vec<PermutedIndex>,
    /// Downlink set this node broadcast (empty unless designated).
    pub broadcast: Vec<PermutedIndex>,
    /// Symbols received from users (their upload).
    pub upload_symbols: u64,
    /// Symbols sent to users (their download).
    pub download_symbols: u64,
}

fn fmt_pairs(pairs: &[PermutedIndex]) -> String {
    pairs
        .iter()
        .map(|p| format!("{}:{}", p.subpacket, p.segment))
        .collect::<Vec<_>>()
        .join(";")
}

/// Renders trace rows as CSV (`subpacket:segment` pairs joined by `;`).
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("round,received,broadcast,upload_symbols,download_symbols\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.round,
            fmt_pairs(&r.received),
            fmt_pairs(&r.broadcast),
            r.upload_symbols,
            r.download_symbols
        ));
    }
    out
}

/// State machine of one database node.
#[derive(Debug, Clone)]
pub struct DatabaseNode {
    /// One-based database index `n`.
    pub index: usize,
    pub params: SystemParams,
    pub storage: StorageState,
    pub reverser: ReverserSet,
    /// Histogram of the previous round (downlink selection input).
    prev_hist: UpdateHistogram,
    /// Histogram accumulating in the current round.
    cur_hist: UpdateHistogram,
    finished_rows: Vec<TraceRow>,
    current_row: TraceRow,
    round: usize,
}

impl DatabaseNode {
    pub fn new(
        index: usize,
        params: SystemParams,
        storage: StorageState,
        reverser: ReverserSet,
    ) -> Self {
        let prev_hist = UpdateHistogram::zero(&params);
        let cur_hist = UpdateHistogram::zero(&params);
        DatabaseNode {
            index,
            params,
            storage,
            reverser,
            prev_hist,
            cur_hist,
            finished_rows: Vec::new(),
            current_row: TraceRow {
                round: 1,
                ..TraceRow::default()
            },
            round: 1,
        }
    }

    pub fn alpha(&self) -> u64 {
        self.reverser.alpha
    }

    /// Total field elements this node stores (coded model + reversers).
    pub fn stored_symbol_count(&self) -> usize {
        self.storage.symbols.len() + self.reverser.stored_symbols()
    }

    /// The downlink positions for the current round, computed from the
    /// previous round's histogram. Identical across nodes since every node
    /// received the same tuples.
    pub fn select_downlink(&self) -> Vec<PermutedIndex> {
        select_downlink(&self.prev_hist, &self.params)
    }

    /// Charges the index broadcast of the designated node to its trace.
    pub fn log_downlink_broadcast(&mut self, pairs: &[PermutedIndex], users: usize) {
        self.current_row.broadcast = pairs.to_vec();
        self.current_row.download_symbols +=
            pairs.len() as u64 * downlink_index_symbols(&self.params) * users as u64;
    }

    /// Builds the query for one permuted position: a column of the
    /// within-segment reverser (case 1) or of the combined reverser, taken
    /// lazily from the factors (case 2). Queries never leave the node.
    pub fn build_read_query(&self, permuted: PermutedIndex) -> Result<Vec<u64>> {
        self.params.check_pair(permuted.subpacket, permuted.segment)?;
        match self.params.scheme {
            Scheme::Case1 => {
                let block = &self.reverser.within[permuted.segment - 1];
                Ok(block
                    .iter()
                    .map(|row| row[permuted.subpacket - 1])
                    .collect())
            }
            Scheme::Case2 => {
                let c = self
                    .params
                    .global_position(permuted.subpacket, permuted.segment);
                case2_reverser_column(&self.reverser, c, &self.params)
            }
        }
    }

    /// Inner product of the stored symbols with the query: the segment
    /// storage vector under case 1, the full vector under case 2.
    pub fn answer_read_query(&mut self, permuted: PermutedIndex, query: &[u64]) -> Result<u64> {
        let field = &self.params.field;
        let answer = match self.params.scheme {
            Scheme::Case1 => field.dot(
                self.storage
                    .segment(permuted.segment, self.params.per_segment()),
                query,
            )?,
            Scheme::Case2 => field.dot(&self.storage.symbols, query)?,
        };
        self.current_row.download_symbols += 1;
        Ok(answer)
    }

    /// Applies one user's permuted write tuples: assembles the permuted
    /// update vector(s), reverses them through the stored matrices and adds
    /// the result onto storage. Also feeds the histogram and the trace.
    pub fn apply_write(&mut self, tuples: &[WriteTuple]) -> Result<()> {
        match self.params.scheme {
            Scheme::Case1 => {
                let vectors = case1_update_vectors(tuples, &self.params)?;
                let touched: Vec<bool> = (1..=self.params.segments)
                    .map(|j| tuples.iter().any(|t| t.segment == j))
                    .collect();
                for (j, y) in vectors.iter().enumerate() {
                    if !touched[j] {
                        continue;
                    }
                    let inc = mat_vec(&self.params.field, &self.reverser.within[j], y)?;
                    self.storage.add_to_segment(
                        j + 1,
                        self.params.per_segment(),
                        &self.params.field,
                        &inc,
                    );
                }
            }
            Scheme::Case2 => {
                let y = case2_update_vector(tuples, &self.params)?;
                let inc = case2_apply_reverser(&self.reverser, &y, &self.params)?;
                let field = self.params.field;
                for (s, v) in self.storage.symbols.iter_mut().zip(&inc) {
                    *s = field.add(*s, *v);
                }
            }
        }
        let per_tuple = upload_symbols_per_tuple(&self.params);
        for t in tuples {
            self.cur_hist.increment(t.position());
            self.current_row.received.push(t.position());
        }
        self.current_row.upload_symbols += tuples.len() as u64 * per_tuple;
        Ok(())
    }

    /// Closes the round: the current histogram becomes the selection input
    /// for the next round and the trace row is finalized.
    pub fn end_round(&mut self) {
        self.prev_hist = std::mem::replace(&mut self.cur_hist, UpdateHistogram::zero(&self.params));
        self.round += 1;
        let row = std::mem::replace(
            &mut self.current_row,
            TraceRow {
                round: self.round,
                ..TraceRow::default()
            },
        );
        self.finished_rows.push(row);
    }

    pub fn trace_rows(&self) -> &[TraceRow] {
        &self.finished_rows
    }

    /// The trace row of the round currently in progress.
    pub fn current_trace(&self) -> &TraceRow {
        &self.current_row
    }

    pub fn histogram_total(&self) -> u64 {
        self.cur_hist.total()
    }

    /// Snapshot of the histogram accumulating in the current round.
    pub fn histogram_counts(&self) -> Vec<Vec<u64>> {
        self.cur_hist.counts().to_vec()
    }
}
