//! Integer matrices and rank computation, exact and modular.
//!
//! The exact path is fraction-free (Bareiss) elimination with full pivoting
//! on the entry of smallest bit length, which keeps intermediate growth down
//! on the sparse multiplication matrices this crate produces. The modular
//! path eliminates over F_p for a prime p and is a lower bound on the exact
//! rank; the certified path samples several random 31-bit primes and falls
//! back to exact elimination when they disagree.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::from(1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        IntMatrix {
            rows: r,
            cols: c,
            data: rows
                .into_iter()
                .flatten()
                .map(BigInt::from)
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *t.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        t
    }
}

/// Rank over the rationals by fraction-free elimination.
///
/// Row and column swaps pick the nonzero entry of smallest bit length as the
/// next pivot; every division by the previous pivot is exact.
pub fn rank_exact(m: &IntMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| (0..m.cols).map(|c| m.at(r, c).clone()).collect())
        .collect();
    let rows = m.rows;
    let cols = m.cols;
    let mut prev = BigInt::from(1);
    let mut k = 0;
    while k < rows.min(cols) {
        // Full pivot search: smallest nonzero entry by bit length.
        let mut pivot: Option<(usize, usize, u64)> = None;
        for r in k..rows {
            for c in k..cols {
                let e = &a[r][c];
                if e.is_zero() {
                    continue;
                }
                let bits = e.bits();
                if pivot.map_or(true, |(_, _, b)| bits < b) {
                    pivot = Some((r, c, bits));
                    if bits <= 1 {
                        break;
                    }
                }
            }
            if pivot.is_some_and(|(_, _, b)| b <= 1) {
                break;
            }
        }
        let Some((pr, pc, _)) = pivot else {
            return k;
        };
        a.swap(k, pr);
        if pc != k {
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
        }
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot_val = pivot_row[k].clone();
        for row in tail.iter_mut() {
            if row[k].is_zero() {
                // Still need the Bareiss rescale to keep later divisions exact.
                for j in k + 1..cols {
                    if !row[j].is_zero() {
                        let num = &row[j] * &pivot_val;
                        row[j] = exact_div(num, &prev);
                    }
                }
            } else {
                let factor = std::mem::replace(&mut row[k], BigInt::zero());
                for j in k + 1..cols {
                    let num = &row[j] * &pivot_val - &factor * &pivot_row[j];
                    row[j] = exact_div(num, &prev);
                }
            }
        }
        prev = pivot_val;
        k += 1;
    }
    k
}

fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "fraction-free elimination produced a remainder");
    q
}

/// Rank of `m` reduced modulo the prime `p`. Always `<= rank_exact(m)`.
pub fn rank_modular(m: &IntMatrix, p: u64) -> Result<usize, LinalgError> {
    if !is_prime_u64(p) {
        return Err(LinalgError::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let a: Vec<Vec<u64>> = (0..m.rows)
        .map(|r| {
            (0..m.cols)
                .map(|c| {
                    m.at(r, c)
                        .mod_floor(&pb)
                        .to_u64()
                        .expect("mod_floor by a u64 prime fits in u64")
                })
                .collect()
        })
        .collect();
    Ok(rank_mod_p(a, p))
}

fn rank_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let Some(pr) = (rank..rows).find(|&r| a[r][col] != 0) else {
            col += 1;
            continue;
        };
        a.swap(rank, pr);
        let inv = mod_inverse(a[rank][col], p);
        for j in col..cols {
            a[rank][j] = mulmod(a[rank][j], inv, p);
        }
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            let f = row[col];
            if f == 0 {
                continue;
            }
            row[col] = 0;
            for j in col + 1..cols {
                let sub = mulmod(f, pivot_row[j], p);
                row[j] = submod(row[j], sub, p);
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

// Operands stay below 2^31 in the certified path, but go through u128 so
// arbitrary u64 primes are also handled.
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Deterministic Miller-Rabin over the full u64 range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Samples `count` distinct primes in the open interval (2^30, 2^31).
pub fn sample_primes<R: Rng>(rng: &mut R, count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    while primes.len() < count {
        let candidate = rng.gen_range((1u64 << 30) + 1..1u64 << 31) | 1;
        if is_prime_u64(candidate) && !primes.contains(&candidate) {
            primes.push(candidate);
        }
    }
    primes
}

/// Outcome of a certified rank computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedRank {
    pub rank: usize,
    /// True when the modular ranks disagreed and exact elimination decided.
    pub fell_back: bool,
    pub primes: Vec<u64>,
}

/// Rank at each of the given primes; exact elimination when they disagree.
///
/// A prime can only shrink the rank, so agreement across independently
/// sampled primes is accepted; any disagreement proves at least one prime is
/// bad and triggers the exact path.
pub fn rank_certified_with_primes(
    m: &IntMatrix,
    primes: &[u64],
) -> Result<CertifiedRank, LinalgError> {
    assert!(!primes.is_empty(), "certified rank needs at least one prime");
    let ranks = primes
        .iter()
        .map(|&p| rank_modular(m, p))
        .collect::<Result<Vec<_>, _>>()?;
    if ranks.windows(2).all(|w| w[0] == w[1]) {
        Ok(CertifiedRank {
            rank: ranks[0],
            fell_back: false,
            primes: primes.to_vec(),
        })
    } else {
        Ok(CertifiedRank {
            rank: rank_exact(m),
            fell_back: true,
            primes: primes.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn rank_of_identity() {
        assert_eq!(rank_exact(&IntMatrix::identity(3)), 3);
    }

    #[test]
    fn rank_of_zero_matrix() {
        assert_eq!(rank_exact(&IntMatrix::zero(4, 7)), 0);
        assert_eq!(rank_exact(&IntMatrix::zero(0, 5)), 0);
    }

    #[test]
    fn rank_of_proportional_rows() {
        let m = IntMatrix::from_rows(vec![vec![1, 2], vec![2, 4]]);
        assert_eq!(rank_exact(&m), 1);
    }

    #[test]
    fn rank_sees_cancellation_only_over_q() {
        // Determinant 1, but every entry is large; exercises the exact divisions.
        let m = IntMatrix::from_rows(vec![
            vec![1000000007, 1000000006],
            vec![1000000006, 1000000005],
        ]);
        assert_eq!(rank_exact(&m), 2);
    }

    #[test]
    fn modular_rank_drops_at_a_bad_prime() {
        let p = 1073741827; // prime just above 2^30
        assert!(is_prime_u64(p));
        let m = IntMatrix::from_rows(vec![vec![p as i64, 0], vec![0, 1]]);
        assert_eq!(rank_modular(&m, p).unwrap(), 1);
        assert_eq!(rank_exact(&m), 2);
    }

    #[test]
    fn modular_rank_rejects_composites() {
        let m = IntMatrix::identity(2);
        assert_eq!(
            rank_modular(&m, 1 << 20),
            Err(LinalgError::NotPrime(1 << 20))
        );
    }

    #[test]
    fn modular_rank_of_zero_matrix() {
        assert_eq!(rank_modular(&IntMatrix::zero(3, 2), 1073741827).unwrap(), 0);
    }

    #[test]
    fn certified_falls_back_on_disagreement() {
        let p = 1073741827u64;
        let m = IntMatrix::from_rows(vec![vec![p as i64, 0], vec![0, 1]]);
        let good = 2147483647u64; // 2^31 - 1
        let out = rank_certified_with_primes(&m, &[p, good]).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.rank, 2);
    }

    #[test]
    fn certified_accepts_agreement() {
        let m = IntMatrix::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let primes = sample_primes(&mut rng, 3);
        let out = rank_certified_with_primes(&m, &primes).unwrap();
        assert!(!out.fell_back);
        assert_eq!(out.rank, 2);
        assert_eq!(rank_exact(&m), 2);
    }

    #[test]
    fn sampled_primes_are_prime_and_in_range() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let primes = sample_primes(&mut rng, 5);
        assert_eq!(primes.len(), 5);
        for &p in &primes {
            assert!(p > 1 << 30 && p < 1 << 31);
            assert!(is_prime_u64(p));
        }
    }

    #[test]
    fn miller_rabin_matches_small_sieve() {
        let mut sieve = vec![true; 1000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..1000 {
            if sieve[i] {
                for j in (i * i..1000).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for n in 0..1000u64 {
            assert_eq!(is_prime_u64(n), sieve[n as usize], "n = {}", n);
        }
    }

    #[test]
    fn transpose_preserves_rank() {
        let m = IntMatrix::from_rows(vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(rank_exact(&m), rank_exact(&m.transpose()));
    }
}
