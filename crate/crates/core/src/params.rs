//! System parameters shared by every protocol component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{EvaluationPoints, Field};

/// Which of the two permutation schemes is in effect.
///
/// `Case1` permutes subpackets only within each segment (segment indices are
/// sent in the clear). `Case2` additionally permutes the segment indices,
/// which lowers the index leakage at the price of a deeper noise polynomial
/// in storage and a second reversing matrix per database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Case1,
    Case2,
}

impl Scheme {
    /// Subpacketization forced by the database count: the read-phase system
    /// has `ell + x + ell + 1` unknowns, which must equal `N`.
    pub fn subpacketization(self, databases: usize) -> Result<usize> {
        let (div, label) = match self {
            Scheme::Case1 => (3, "N = 3*ell + 1"),
            Scheme::Case2 => (5, "N = 5*ell + 1"),
        };
        if databases < 4 || (databases - 1) % div != 0 {
            return Err(Error::config(format!(
                "database count {databases} does not satisfy {label} for {self:?}"
            )));
        }
        Ok((databases - 1) / div)
    }

    /// Degree bound `x` of the storage noise polynomial.
    pub fn storage_noise_degree(self, ell: usize) -> usize {
        match self {
            Scheme::Case1 => ell,
            Scheme::Case2 => 2 * ell,
        }
    }
}

/// Validated system configuration: field, geometry and sparsification counts.
///
/// Sparsification rates are carried as the integer subpacket counts
/// `P*r` (uplink) and `P*r'` (downlink) so that all accounting stays exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub scheme: Scheme,
    /// Number of non-colluding databases `N`.
    pub databases: usize,
    /// Number of subpackets `P`.
    pub subpackets: usize,
    /// Number of segments `B`; must divide `P`.
    pub segments: usize,
    /// Parameters per subpacket, `ell`, fixed by `N` and the scheme.
    pub ell: usize,
    /// Subpackets uploaded per user per round, `P*r`.
    pub upload_subpackets: usize,
    /// Subpackets downloaded per user per round, `P*r'`.
    pub download_subpackets: usize,
    pub field: Field,
    pub alphas: EvaluationPoints,
}

impl SystemParams {
    pub fn new(
        scheme: Scheme,
        databases: usize,
        subpackets: usize,
        segments: usize,
        upload_subpackets: usize,
        download_subpackets: usize,
        modulus: u64,
    ) -> Result<Self> {
        let field = Field::new(modulus)?;
        let ell = scheme.subpacketization(databases)?;
        if subpackets == 0 {
            return Err(Error::config("subpacket count P must be positive"));
        }
        if segments == 0 || subpackets % segments != 0 {
            return Err(Error::config(format!(
                "segment count B = {segments} must divide subpacket count P = {subpackets}"
            )));
        }
        if upload_subpackets > subpackets {
            return Err(Error::config(format!(
                "upload count P*r = {upload_subpackets} exceeds P = {subpackets}"
            )));
        }
        if download_subpackets > subpackets {
            return Err(Error::config(format!(
                "download count P*r' = {download_subpackets} exceeds P = {subpackets}"
            )));
        }
        let alphas = EvaluationPoints::natural(databases, &field)?;
        Ok(SystemParams {
            scheme,
            databases,
            subpackets,
            segments,
            ell,
            upload_subpackets,
            download_subpackets,
            field,
            alphas,
        })
    }

    /// Subpackets per segment, `P/B`.
    #[inline]
    pub fn per_segment(&self) -> usize {
        self.subpackets / self.segments
    }

    /// Total model parameters `L = P * ell`.
    #[inline]
    pub fn model_len(&self) -> usize {
        self.subpackets * self.ell
    }

    /// Storage noise degree bound `x` for this scheme.
    #[inline]
    pub fn noise_degree(&self) -> usize {
        self.scheme.storage_noise_degree(self.ell)
    }

    /// Converts a one-based (subpacket-within-segment, segment) pair to the
    /// one-based global subpacket position in `[1, P]`.
    #[inline]
    pub fn global_position(&self, subpacket: usize, segment: usize) -> usize {
        (segment - 1) * self.per_segment() + subpacket
    }

    pub(crate) fn check_pair(&self, subpacket: usize, segment: usize) -> Result<()> {
        let m = self.per_segment();
        if subpacket == 0 || subpacket > m {
            return Err(Error::IndexOutOfRange {
                what: "subpacket",
                index: subpacket,
                max: m,
            });
        }
        if segment == 0 || segment > self.segments {
            return Err(Error::IndexOutOfRange {
                what: "segment",
                index: segment,
                max: self.segments,
            });
        }
        Ok(())
    }
}
