//! Prime-field arithmetic and the generalized power-basis linear solver.
//!
//! All protocol values are residues in `F_q` for a prime `q`. Storage symbols,
//! queries and answers are evaluations of Laurent polynomials
//! `sum_k c_k * alpha^k` with exponents ranging over a signed window, so the
//! solver here works directly with signed exponent ranges: given one
//! evaluation per point it recovers the coefficient vector by Gaussian
//! elimination, and given more points than coefficients it additionally
//! certifies that the extra evaluations are consistent with the fitted
//! window.

use crate::error::{Error, Result};

/// Arithmetic in the prime field `F_q`. Elements are `u64` residues in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Field {
    q: u64,
}

impl Field {
    /// Creates the field `F_q`. The modulus must be prime (checked).
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime_u64(q) {
            return Err(Error::config(format!("field modulus {q} is not prime")));
        }
        Ok(Field { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    /// Maps a signed integer to its residue, so `-1` becomes `q - 1`.
    #[inline]
    pub fn from_signed(&self, a: i64) -> u64 {
        let m = self.q as i64;
        (a.rem_euclid(m)) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (a, b) = (a % self.q, b % self.q);
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let (a, b) = (a % self.q, b % self.q);
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        let a = a % self.q;
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (((a % self.q) as u128 * (b % self.q) as u128) % self.q as u128) as u64
    }

    /// Multiplicative inverse via Fermat: `a^(q-2)`. Errors on zero.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a % self.q == 0 {
            return Err(Error::ZeroInverse { modulus: self.q });
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// `a^e` by binary exponentiation, `e >= 0`.
    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.q;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^e` for signed exponents; negative exponents require `a != 0`.
    pub fn pow_signed(&self, a: u64, e: i64) -> Result<u64> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow(inv, e.unsigned_abs()))
        }
    }

    /// Inner product of two equal-length vectors.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> Result<u64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "inner product",
                expected: a.len(),
                got: b.len(),
            });
        }
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc = self.add(acc, self.mul(*x, *y));
        }
        Ok(acc)
    }
}

/// The `N` distinct nonzero evaluation points `alpha_1..alpha_N`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EvaluationPoints {
    alphas: Vec<u64>,
}

impl EvaluationPoints {
    /// Validates distinctness, nonzeroness and `N < q`.
    pub fn new(alphas: Vec<u64>, field: &Field) -> Result<Self> {
        if alphas.len() as u64 >= field.modulus() {
            return Err(Error::config(format!(
                "need N < q, got N = {} points over F_{}",
                alphas.len(),
                field.modulus()
            )));
        }
        let mut seen = alphas
            .iter()
            .map(|a| field.reduce(*a))
            .collect::<Vec<_>>();
        if seen.iter().any(|a| *a == 0) {
            return Err(Error::config(
                "evaluation points must be nonzero (negative powers must exist)".to_string(),
            ));
        }
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != alphas.len() {
            return Err(Error::config(
                "evaluation points must be distinct".to_string(),
            ));
        }
        Ok(EvaluationPoints { alphas })
    }

    /// The default choice `alpha_n = n` for `n = 1..=N`.
    pub fn natural(n: usize, field: &Field) -> Result<Self> {
        Self::new((1..=n as u64).collect(), field)
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn get(&self, n: usize) -> u64 {
        self.alphas[n]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.alphas
    }
}

/// Evaluates `sum_{k=low..=high} coeffs[k-low] * alpha^k`.
pub fn eval_power_poly(field: &Field, coeffs: &[u64], low_deg: i64, alpha: u64) -> Result<u64> {
    let mut acc = 0u64;
    for (i, c) in coeffs.iter().enumerate() {
        let e = low_deg + i as i64;
        acc = field.add(acc, field.mul(*c, field.pow_signed(alpha, e)?));
    }
    Ok(acc)
}

/// Solves for the coefficients `c_{low_deg..=high_deg}` such that
/// `sum_k c_k * alpha_n^k = answers[n]` at every point. Requires exactly
/// `high_deg - low_deg + 1` answers.
pub fn solve_power_system(
    field: &Field,
    answers: &[u64],
    alphas: &EvaluationPoints,
    low_deg: i64,
    high_deg: i64,
) -> Result<Vec<u64>> {
    let width = (high_deg - low_deg + 1) as usize;
    if answers.len() != width {
        return Err(Error::DimensionMismatch {
            context: "power system",
            expected: width,
            got: answers.len(),
        });
    }
    if alphas.len() < width {
        return Err(Error::Underdetermined {
            got: alphas.len(),
            required: width,
        });
    }
    let mut rows = Vec::with_capacity(width);
    for n in 0..width {
        let a = alphas.get(n);
        let mut row = Vec::with_capacity(width + 1);
        for k in 0..width {
            row.push(field.pow_signed(a, low_deg + k as i64)?);
        }
        row.push(answers[n]);
        rows.push(row);
    }
    gaussian_solve(field, &mut rows)
}

/// Fits the coefficient window `[low_deg, high_deg]` using the first
/// `high_deg - low_deg + 1` points, then certifies the fit against all
/// remaining points. This is the overdetermined variant used to verify
/// that stored symbols stay inside their declared degree window.
pub fn fit_power_poly(
    field: &Field,
    values: &[u64],
    alphas: &EvaluationPoints,
    low_deg: i64,
    high_deg: i64,
) -> Result<Vec<u64>> {
    let width = (high_deg - low_deg + 1) as usize;
    if values.len() != alphas.len() {
        return Err(Error::DimensionMismatch {
            context: "fit values vs points",
            expected: alphas.len(),
            got: values.len(),
        });
    }
    if values.len() < width {
        return Err(Error::Underdetermined {
            got: values.len(),
            required: width,
        });
    }
    let head = EvaluationPoints::new(alphas.as_slice()[..width].to_vec(), field)?;
    let coeffs = solve_power_system(field, &values[..width], &head, low_deg, high_deg)?;
    for n in width..values.len() {
        let predicted = eval_power_poly(field, &coeffs, low_deg, alphas.get(n))?;
        if predicted != values[n] {
            return Err(Error::DegreeStructure {
                database: n + 1,
                low: low_deg,
                high: high_deg,
            });
        }
    }
    Ok(coeffs)
}

/// Gaussian elimination over `F_q` on an augmented matrix (last column is
/// the right-hand side). Consumes the rows in place.
fn gaussian_solve(field: &Field, rows: &mut [Vec<u64>]) -> Result<Vec<u64>> {
    let n = rows.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|r| rows[*r][col] != 0)
            .ok_or(Error::SingularMatrix)?;
        rows.swap(col, pivot);
        let inv = field.inv(rows[col][col])?;
        for k in col..=n {
            rows[col][k] = field.mul(rows[col][k], inv);
        }
        for r in 0..n {
            if r != col && rows[r][col] != 0 {
                let factor = rows[r][col];
                for k in col..=n {
                    let t = field.mul(factor, rows[col][k]);
                    rows[r][k] = field.sub(rows[r][k], t);
                }
            }
        }
    }
    Ok(rows.iter().map(|r| r[r.len() - 1]).collect())
}

/// Deterministic Miller-Rabin, valid for all `u64` inputs.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The default production modulus, the Mersenne prime `2^61 - 1`.
pub const DEFAULT_MODULUS: u64 = (1 << 61) - 1;
