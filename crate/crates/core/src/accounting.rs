//! Communication and storage cost accounting: closed-form expressions,
//! exact ceiling-variant formulas, and reconciliation against measured
//! symbol counts from simulation traces.
//!
//! Costs are normalized by the model size `L`: `C_R = D / L` and
//! `C_W = U / L` where `D` and `U` are the symbols one user downloads and
//! uploads in a round. Indices travel as field symbols: an index with `m`
//! possible values costs `ceil(log_q m)` symbols on the wire, which is the
//! integer counterpart of the `log_q` terms in the closed forms.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::node::TraceRow;
use crate::params::{Scheme, SystemParams};

/// Smallest `k` with `q^k >= m`: symbols needed for a `q`-ary encoding of
/// an `m`-valued index. Zero when `m == 1`.
pub fn ceil_log(q: u64, m: u64) -> u64 {
    let mut k = 0;
    let mut reach: u128 = 1;
    while reach < m as u128 {
        reach *= q as u128;
        k += 1;
    }
    k
}

/// Real-valued `log_q m` as used in the closed-form cost expressions.
pub fn real_log(q: u64, m: u64) -> f64 {
    (m as f64).ln() / (q as f64).ln()
}

/// Symbols one write tuple occupies on the wire to one database: the
/// combined update plus the permuted segment and subpacket indices.
pub fn upload_symbols_per_tuple(params: &SystemParams) -> u64 {
    let q = params.field.modulus();
    1 + ceil_log(q, params.segments as u64) + ceil_log(q, params.per_segment() as u64)
}

/// Symbols one downlink index costs in the designated database's broadcast:
/// a global position among `P` subpackets.
pub fn downlink_index_symbols(params: &SystemParams) -> u64 {
    ceil_log(params.field.modulus(), params.subpackets as u64)
}

/// Per-round, per-user cost report: measured rationals next to the
/// closed-form values they must reconcile with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Measured download symbols per user divided by `L`.
    pub reading_cost: Ratio<u64>,
    /// Measured upload symbols per user divided by `L`.
    pub writing_cost: Ratio<u64>,
    /// Stored field elements per database (model plus reversers).
    pub storage_symbols: u64,
    /// Closed-form reading cost with real-valued `log_q`.
    pub formula_reading: f64,
    /// Closed-form writing cost with real-valued `log_q`.
    pub formula_writing: f64,
    /// Exact formula with `ceil(log_q)` index symbols.
    pub formula_reading_ceil: Ratio<u64>,
    /// Exact formula with `ceil(log_q)` index symbols.
    pub formula_writing_ceil: Ratio<u64>,
}

/// Closed-form costs: the real-valued pair `(C_R, C_W)` and the exact
/// ceiling-variant pair used for reconciliation with traces.
pub fn formula_costs(params: &SystemParams) -> (f64, f64, Ratio<u64>, Ratio<u64>) {
    let q = params.field.modulus();
    let n = params.databases as u64;
    let p = params.subpackets as u64;
    let l = params.model_len() as u64;
    let pr = params.upload_subpackets as u64;
    let pr_down = params.download_subpackets as u64;

    let log_p = real_log(q, p);
    let reading = (pr_down as f64 * log_p + (pr_down * n) as f64) / l as f64;
    let writing = (pr * n) as f64 * (1.0 + log_p) / l as f64;

    let reading_ceil = Ratio::new(pr_down * ceil_log(q, p) + pr_down * n, l);
    let writing_ceil = Ratio::new(pr * n * upload_symbols_per_tuple(params), l);
    (reading, writing, reading_ceil, writing_ceil)
}

/// The published closed forms with the scheme constant made explicit:
/// `C_R = c r' (1 + log_q(P)/N) / (1 - 1/N)` and
/// `C_W = c r (1 + log_q P) / (1 - 1/N)` with `c = 3` (case 1) or
/// `c = 5` (case 2). Equal to [`formula_costs`] after substituting
/// `ell = (N-1)/c`; kept separate so the equality is testable.
pub fn closed_form_costs(params: &SystemParams) -> (f64, f64) {
    let c = match params.scheme {
        Scheme::Case1 => 3.0,
        Scheme::Case2 => 5.0,
    };
    let n = params.databases as f64;
    let p = params.subpackets as f64;
    let log_p = real_log(params.field.modulus(), params.subpackets as u64);
    let r = params.upload_subpackets as f64 / p;
    let r_down = params.download_subpackets as f64 / p;
    let denom = 1.0 - 1.0 / n;
    let reading = c * r_down * (1.0 + log_p / n) / denom;
    let writing = c * r * (1.0 + log_p) / denom;
    (reading, writing)
}

/// Exact per-database stored symbol count and its asymptotic label:
/// `P` model symbols, `B` within-segment reversers of `(P/B)^2` entries,
/// plus the `B^2` inter-segment reverser under case 2.
pub fn storage_complexity(params: &SystemParams) -> (u64, &'static str) {
    let p = params.subpackets as u64;
    let b = params.segments as u64;
    let m = params.per_segment() as u64;
    match params.scheme {
        Scheme::Case1 => (p + b * m * m, "O(L^2/(B N^2))"),
        Scheme::Case2 => (p + b * m * m + b * b, "max{O(L^2/(B N^2)), O(B^2)}"),
    }
}

/// Extracts per-user measured costs from one round's trace rows (one row
/// per database) and pairs them with the formulas for reconciliation.
pub fn measured_costs(
    rows: &[&TraceRow],
    users: usize,
    params: &SystemParams,
) -> Result<CostReport> {
    if rows.len() != params.databases {
        return Err(Error::Trace(format!(
            "need one trace row per database ({}), got {}",
            params.databases,
            rows.len()
        )));
    }
    if users == 0 {
        return Err(Error::Trace("round had no users".into()));
    }
    let round = rows[0].round;
    if rows.iter().any(|r| r.round != round) {
        return Err(Error::Trace("trace rows span different rounds".into()));
    }
    let down: u64 = rows.iter().map(|r| r.download_symbols).sum();
    let up: u64 = rows.iter().map(|r| r.upload_symbols).sum();
    let denom = users as u64 * params.model_len() as u64;
    let (formula_reading, formula_writing, formula_reading_ceil, formula_writing_ceil) =
        formula_costs(params);
    Ok(CostReport {
        reading_cost: Ratio::new(down, denom),
        writing_cost: Ratio::new(up, denom),
        storage_symbols: storage_complexity(params).0,
        formula_reading,
        formula_writing,
        formula_reading_ceil,
        formula_writing_ceil,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log_integer_symbol_counts() {
        assert_eq!(ceil_log(17, 1), 0);
        assert_eq!(ceil_log(17, 16), 1);
        assert_eq!(ceil_log(17, 17), 1);
        assert_eq!(ceil_log(17, 18), 2);
        assert_eq!(ceil_log(5, 25), 2);
        assert_eq!(ceil_log(5, 26), 3);
    }

    #[test]
    fn zero_download_rate_means_zero_reading_cost() {
        let params = SystemParams::new(Scheme::Case1, 4, 16, 4, 4, 0, 257).unwrap();
        let (reading, _, reading_ceil, _) = formula_costs(&params);
        assert_eq!(reading, 0.0);
        assert_eq!(reading_ceil, Ratio::new(0u64, 1u64));
    }

    #[test]
    fn intermediate_and_closed_forms_agree() {
        for (scheme, n) in [(Scheme::Case1, 4usize), (Scheme::Case1, 7), (Scheme::Case2, 6), (Scheme::Case2, 11)] {
            for p in [12usize, 18, 24] {
                for b in [1usize, 2, 3] {
                    let params =
                        SystemParams::new(scheme, n, p, b, 3, 2, 1009).unwrap();
                    let (reading, writing, _, _) = formula_costs(&params);
                    let (reading_cf, writing_cf) = closed_form_costs(&params);
                    assert!((reading - reading_cf).abs() < 1e-12, "{scheme:?} N={n} P={p}");
                    assert!((writing - writing_cf).abs() < 1e-12, "{scheme:?} N={n} P={p}");
                }
            }
        }
    }

    #[test]
    fn storage_symbol_counts() {
        let params = SystemParams::new(Scheme::Case1, 4, 15, 3, 4, 2, 257).unwrap();
        assert_eq!(storage_complexity(&params).0, 15 + 3 * 25);
        let params = SystemParams::new(Scheme::Case2, 6, 12, 3, 3, 3, 257).unwrap();
        assert_eq!(storage_complexity(&params).0, 12 + 3 * 16 + 9);
        // one-subpacket segments leave scalar reversers, P of them
        let params = SystemParams::new(Scheme::Case1, 4, 12, 12, 3, 3, 257).unwrap();
        assert_eq!(storage_complexity(&params).0, 12 + 12);
    }

    #[test]
    fn measured_costs_from_synthetic_trace() {
        // N=4, ell=1, P=L=16, q=17, P*r'=4: D = 4*1 + 4*4 = 20 per user
        let params = SystemParams::new(Scheme::Case1, 4, 16, 4, 4, 4, 17).unwrap();
        assert_eq!(downlink_index_symbols(&params), 1);
        let mut rows = vec![
            TraceRow { round: 1, download_symbols: 4, upload_symbols: 0, ..Default::default() };
            4
        ];
        rows[0].download_symbols += 4; // designated node broadcast 4 indices
        let refs: Vec<&TraceRow> = rows.iter().collect();
        let report = measured_costs(&refs, 1, &params).unwrap();
        assert_eq!(report.reading_cost, Ratio::new(20u64, 16u64));
        assert_eq!(report.reading_cost, report.formula_reading_ceil);
    }

    #[test]
    fn incomplete_traces_are_rejected() {
        let params = SystemParams::new(Scheme::Case1, 4, 16, 4, 4, 4, 17).unwrap();
        let rows = vec![TraceRow::default(); 3];
        let refs: Vec<&TraceRow> = rows.iter().collect();
        assert!(matches!(
            measured_costs(&refs, 1, &params),
            Err(Error::Trace(_))
        ));
        let rows = vec![TraceRow::default(); 4];
        let refs: Vec<&TraceRow> = rows.iter().collect();
        assert!(measured_costs(&refs, 0, &params).is_err());
    }
}
