//! Exact index-information leakage: the entropy of the per-segment sparse
//! update counts a database observes, in closed form and by brute-force
//! enumeration.
//!
//! With every subpacket equally likely to enter the sparse set, the count
//! vector over `B` segments of `P/B` subpackets follows a multivariate
//! hypergeometric law. Case 1 leaks the full count vector (segments are in
//! the clear); case 2 leaks only its sorted multiset because segments are
//! permuted too. Probabilities stay exact rationals; floating point enters
//! only at the final logarithm.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn check_geometry(p: usize, b: usize, pr: usize) -> Result<usize> {
    if b == 0 || p == 0 || p % b != 0 {
        return Err(Error::config(format!(
            "segment count B = {b} must divide subpacket count P = {p}"
        )));
    }
    if pr > p {
        return Err(Error::config(format!(
            "sparse count Pr = {pr} exceeds P = {p}"
        )));
    }
    Ok(p / b)
}

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

/// All count vectors of length `b`, entries at most `m`, summing to `pr`,
/// in lexicographic order.
fn compositions(b: usize, m: usize, pr: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; b];
    fn rec(cur: &mut Vec<usize>, i: usize, left: usize, m: usize, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining_capacity = (cur.len() - i - 1) * m;
        for v in 0..=m.min(left) {
            if left - v > remaining_capacity {
                continue;
            }
            cur[i] = v;
            rec(cur, i + 1, left - v, m, out);
        }
        cur[i] = 0;
    }
    rec(&mut cur, 0, pr, m, &mut out);
    out
}

/// Weight of one count vector: the number of sparse sets realizing it,
/// `prod_i C(P/B, x_i)`.
fn count_weight(x: &[usize], m: usize) -> BigInt {
    x.iter()
        .fold(BigInt::one(), |acc, xi| acc * binomial(big(m), big(*xi)))
}

/// Exact pmf of the per-segment count vector: multivariate hypergeometric,
/// `Pr[X = x] = prod_i C(P/B, x_i) / C(P, Pr)`.
pub fn pmf_hat(p: usize, b: usize, pr: usize) -> Result<Vec<(Vec<usize>, BigRational)>> {
    let m = check_geometry(p, b, pr)?;
    let total = binomial(big(p), big(pr));
    let mut out = Vec::new();
    let mut mass = BigInt::zero();
    for x in compositions(b, m, pr) {
        let w = count_weight(&x, m);
        mass += &w;
        out.push((x, BigRational::new(w, total.clone())));
    }
    debug_assert_eq!(mass, total);
    Ok(out)
}

/// Shannon entropy in bits from exact integer weights; only the logs are
/// taken in floating point.
fn entropy_from_weights<'a, I: Iterator<Item = &'a BigInt>>(weights: I, total: &BigInt) -> f64 {
    let total_f = total.to_f64().expect("weight total fits f64");
    let mut acc = 0.0;
    for w in weights {
        if w.is_zero() {
            continue;
        }
        let wf = w.to_f64().expect("weight fits f64");
        acc += wf * wf.log2();
    }
    total_f.log2() - acc / total_f
}

/// Entropy of the raw count vector, `H(X^_1..X^_B)` in bits.
pub fn entropy_hat(p: usize, b: usize, pr: usize) -> Result<f64> {
    let m = check_geometry(p, b, pr)?;
    let total = binomial(big(p), big(pr));
    let weights: Vec<BigInt> = compositions(b, m, pr)
        .iter()
        .map(|x| count_weight(x, m))
        .collect();
    Ok(entropy_from_weights(weights.iter(), &total))
}

/// Entropy of the sorted count vector, `H(X~_1..X~_B)` in bits: the
/// pushforward of the count pmf under descending sort.
pub fn entropy_tilde(p: usize, b: usize, pr: usize) -> Result<f64> {
    let m = check_geometry(p, b, pr)?;
    let total = binomial(big(p), big(pr));
    let mut classes: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
    for x in compositions(b, m, pr) {
        let mut key = x.clone();
        key.sort_unstable_by(|a, b| b.cmp(a));
        *classes.entry(key).or_insert_with(BigInt::zero) += count_weight(&x, m);
    }
    Ok(entropy_from_weights(classes.values(), &total))
}

/// Brute-force oracle: enumerates every `Pr`-subset of the `P` subpackets,
/// tallies the count vectors and their sorted classes, and returns
/// `(H_hat, H_tilde)` from the exact frequencies. Guarded to at most
/// `10^7` subsets.
pub fn brute_force_entropies(p: usize, b: usize, pr: usize) -> Result<(f64, f64)> {
    let m = check_geometry(p, b, pr)?;
    let total = binomial(big(p), big(pr));
    if total > big(10_000_000) {
        return Err(Error::SizeGuard(format!(
            "C({p}, {pr}) = {total} subsets exceed the 10^7 enumeration guard"
        )));
    }
    let mut hat: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
    let mut tilde: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
    let mut seen = BigInt::zero();
    for subset in (0..p).combinations(pr) {
        let mut counts = vec![0usize; b];
        for g in subset {
            counts[g / m] += 1;
        }
        let mut sorted = counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        *hat.entry(counts).or_insert_with(BigInt::zero) += 1;
        *tilde.entry(sorted).or_insert_with(BigInt::zero) += 1;
        seen += 1;
    }
    debug_assert_eq!(seen, total);
    Ok((
        entropy_from_weights(hat.values(), &total),
        entropy_from_weights(tilde.values(), &total),
    ))
}

/// One row of a leakage sweep over segment counts.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub segments: usize,
    pub h_hat_bits: f64,
    pub h_tilde_bits: f64,
    /// Total sparse sets `C(P, Pr)` (decimal string; may exceed u64).
    pub sparse_sets: String,
    /// Per-database symbols under case 1, `P + B (P/B)^2`.
    pub storage_case1: u64,
    /// Per-database symbols under case 2, `P + B (P/B)^2 + B^2`.
    pub storage_case2: u64,
}

/// Evaluates both entropies and the storage symbol counts for each segment
/// count in `b_list`.
pub fn sweep_leakage(p: usize, pr: usize, b_list: &[usize]) -> Result<Vec<SweepRow>> {
    b_list
        .iter()
        .map(|&b| {
            let m = check_geometry(p, b, pr)? as u64;
            let (pb, bb) = (p as u64, b as u64);
            Ok(SweepRow {
                segments: b,
                h_hat_bits: entropy_hat(p, b, pr)?,
                h_tilde_bits: entropy_tilde(p, b, pr)?,
                sparse_sets: binomial(big(p), big(pr)).to_string(),
                storage_case1: pb + bb * m * m,
                storage_case2: pb + bb * m * m + bb * bb,
            })
        })
        .collect()
}

/// Renders sweep rows as plot-ready CSV.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "B,H_hat_bits,H_tilde_bits,sparse_sets,storage_case1_symbols,storage_case2_symbols\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.segments, r.h_hat_bits, r.h_tilde_bits, r.sparse_sets, r.storage_case1, r.storage_case2
        ));
    }
    out
}

/// Largest segment count whose leakage stays within the budget `epsilon`,
/// per scheme (case 1 budgets `H_hat`, case 2 budgets `H_tilde`). The
/// comparison carries a tiny tolerance so `epsilon = 0` admits the exact
/// zero-entropy rows.
pub fn max_feasible_segments(rows: &[SweepRow], epsilon: f64) -> (Option<usize>, Option<usize>) {
    let eps = epsilon + 1e-12;
    let case1 = rows
        .iter()
        .filter(|r| r.h_hat_bits <= eps)
        .map(|r| r.segments)
        .max();
    let case2 = rows
        .iter()
        .filter(|r| r.h_tilde_bits <= eps)
        .map(|r| r.segments)
        .max();
    (case1, case2)
}
