//! Noisy MDS coded storage: encoding model subpackets into single symbols
//! per database, and decoding read answers back to plaintext parameters.
//!
//! A subpacket with parameters `W_1..W_ell` is stored at database `n` as
//!
//! ```text
//! S_n = sum_{i=1..ell} alpha_n^{-i} W_i  +  sum_{i=0..x} alpha_n^{i} Z_i
//! ```
//!
//! with one shared noise vector `Z` per subpacket, evaluated at each
//! database's own point. The noise degree bound is `x = ell` for `Case1`
//! and `x = 2*ell` for `Case2`; incremental updates preserve the form, so
//! any `ell + x + 1` of the stored evaluations re-determine the polynomial
//! and the remaining ones certify it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fit_power_poly, solve_power_system, Field};
use crate::params::SystemParams;

/// One database's coded model: one symbol per subpacket, `P` in total,
/// grouped in `B` segments of `P/B` consecutive entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageState {
    pub symbols: Vec<u64>,
}

impl StorageState {
    /// The `P/B` symbols of one-based segment `j`.
    pub fn segment(&self, j: usize, per_segment: usize) -> &[u64] {
        &self.symbols[(j - 1) * per_segment..j * per_segment]
    }

    /// Adds an incremental update vector to one segment in place.
    pub fn add_to_segment(&mut self, j: usize, per_segment: usize, field: &Field, inc: &[u64]) {
        let base = (j - 1) * per_segment;
        for (k, v) in inc.iter().enumerate() {
            self.symbols[base + k] = field.add(self.symbols[base + k], *v);
        }
    }

    /// Flat little-endian snapshot: the field modulus followed by the `P`
    /// symbol residues.
    pub fn snapshot_bytes(&self, field: &Field) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (1 + self.symbols.len()));
        out.extend_from_slice(&field.modulus().to_le_bytes());
        for s in &self.symbols {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    /// Parses a snapshot produced by [`StorageState::snapshot_bytes`].
    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<(u64, StorageState)> {
        if bytes.len() < 8 || bytes.len() % 8 != 0 {
            return Err(Error::config(format!(
                "snapshot length {} is not a positive multiple of 8",
                bytes.len()
            )));
        }
        let mut words = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()));
        let q = words.next().unwrap();
        Ok((q, StorageState { symbols: words.collect() }))
    }
}

/// Encodes one subpacket for one database: `sum alpha^{-i} W_i + sum alpha^i Z_i`
/// with noise polynomial degree bound `x` (so `noise` has `x + 1` entries).
pub fn encode_subpacket(
    field: &Field,
    plain: &[u64],
    noise: &[u64],
    alpha: u64,
    x: usize,
) -> Result<u64> {
    if noise.len() != x + 1 {
        return Err(Error::DimensionMismatch {
            context: "storage noise vector",
            expected: x + 1,
            got: noise.len(),
        });
    }
    let mut acc = 0u64;
    for (i, w) in plain.iter().enumerate() {
        let coef = field.pow_signed(alpha, -(i as i64 + 1))?;
        acc = field.add(acc, field.mul(coef, *w));
    }
    for (i, z) in noise.iter().enumerate() {
        acc = field.add(acc, field.mul(field.pow(alpha, i as u64), *z));
    }
    Ok(acc)
}

/// Encodes the full model for all `N` databases. One noise vector is drawn
/// per subpacket and evaluated at every database's point, which is what
/// keeps the `N` stored symbols of a subpacket on a single polynomial.
pub fn init_storage<R: Rng>(
    model: &[Vec<u64>],
    params: &SystemParams,
    rng: &mut R,
) -> Result<Vec<StorageState>> {
    if model.len() != params.subpackets {
        return Err(Error::DimensionMismatch {
            context: "model subpacket count",
            expected: params.subpackets,
            got: model.len(),
        });
    }
    let q = params.field.modulus();
    let x = params.noise_degree();
    let mut states = vec![
        StorageState {
            symbols: Vec::with_capacity(params.subpackets)
        };
        params.databases
    ];
    for plain in model {
        if plain.len() != params.ell {
            return Err(Error::DimensionMismatch {
                context: "subpacket length",
                expected: params.ell,
                got: plain.len(),
            });
        }
        let noise: Vec<u64> = (0..=x).map(|_| rng.gen_range(0..q)).collect();
        for (n, state) in states.iter_mut().enumerate() {
            let alpha = params.alphas.get(n);
            state
                .symbols
                .push(encode_subpacket(&params.field, plain, &noise, alpha, x)?);
        }
    }
    Ok(states)
}

fn extract_parameters(coeffs: &[u64], ell: usize) -> Vec<u64> {
    // coefficient of alpha^{-i} is W_i; the window starts at -ell
    (1..=ell).map(|i| coeffs[ell - i]).collect()
}

/// Decodes one subpacket from the `N` read answers. The answer of database
/// `n` is a degree-window `[-ell, 2x]` polynomial evaluated at `alpha_n`
/// (storage noise reaches degree `x` and the query noise another `x`); the
/// window size `ell + 2x + 1` equals `N`, so exactly `N` answers are both
/// necessary and sufficient.
pub fn decode_read_answers(answers: &[u64], params: &SystemParams) -> Result<Vec<u64>> {
    let n = params.databases;
    if answers.len() < n {
        return Err(Error::Underdetermined {
            got: answers.len(),
            required: n,
        });
    }
    if answers.len() > n {
        return Err(Error::DimensionMismatch {
            context: "read answers",
            expected: n,
            got: answers.len(),
        });
    }
    let ell = params.ell as i64;
    let high = 2 * params.noise_degree() as i64;
    let coeffs = solve_power_system(&params.field, answers, &params.alphas, -ell, high)?;
    Ok(extract_parameters(&coeffs, params.ell))
}

/// Recovers a subpacket's plaintext from the raw stored symbols across all
/// databases, certifying on the way that they lie in the declared window
/// `[-ell, x]`. Storage has `ell` fewer noise terms than the read answers,
/// so the system is overdetermined and the spare points act as a check.
pub fn decode_stored_subpacket(symbols: &[u64], params: &SystemParams) -> Result<Vec<u64>> {
    if symbols.len() != params.databases {
        return Err(Error::DimensionMismatch {
            context: "stored symbols",
            expected: params.databases,
            got: symbols.len(),
        });
    }
    let ell = params.ell as i64;
    let x = params.noise_degree() as i64;
    let coeffs = fit_power_poly(&params.field, symbols, &params.alphas, -ell, x)?;
    Ok(extract_parameters(&coeffs, params.ell))
}
