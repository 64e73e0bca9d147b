use super::{DenseMatrix, Ring};
use crate::error::{Error, Result};

/// Largest prime below 2^62.
pub const DEFAULT_PRIME: u64 = (1 << 62) - 57;
/// Second largest prime below 2^62, used when a negative result is re-checked.
pub const RETRY_PRIME: u64 = (1 << 62) - 87;

/// The field of integers modulo a prime `p < 2^63`.
///
/// Elements are canonical residues in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, n: u64) -> u64 {
        n % self.p
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        let r = (n as i128).rem_euclid(self.p as i128);
        r as u64
    }

    /// Inverse by the extended Euclidean algorithm; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.p as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Some(old_s.rem_euclid(self.p as i128) as u64)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&self, a: &mut DenseMatrix<u64>) -> Vec<usize> {
        let (rows, cols) = (a.rows(), a.cols());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| a.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    let tmp = a.get(r, j);
                    a.set(r, j, a.get(pr, j));
                    a.set(pr, j, tmp);
                }
            }
            let inv = self.inv(a.get(r, c)).expect("pivot is nonzero");
            for x in a.row_mut(r)[c..].iter_mut() {
                *x = mul_mod(*x, inv, self.p);
            }
            let pivot_row: Vec<u64> = a.row(r)[c..].to_vec();
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = a.get(i, c);
                if factor == 0 {
                    continue;
                }
                let row = &mut a.row_mut(i)[c..];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x = self.sub(*x, mul_mod(factor, pv, self.p));
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Exact rank by Gaussian elimination.
    pub fn rank(&self, a: &DenseMatrix<u64>) -> usize {
        // Forward elimination only; cheaper than full RREF.
        let mut m = a.clone();
        let (rows, cols) = (m.rows(), m.cols());
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in c..cols {
                    let tmp = m.get(r, j);
                    m.set(r, j, m.get(pr, j));
                    m.set(pr, j, tmp);
                }
            }
            let inv = self.inv(m.get(r, c)).expect("pivot is nonzero");
            let pivot_row: Vec<u64> = m.row(r)[c..].iter().map(|&x| mul_mod(x, inv, self.p)).collect();
            for i in r + 1..rows {
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                let row = &mut m.row_mut(i)[c..];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x = self.sub(*x, mul_mod(factor, pv, self.p));
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right null space `{v : A v = 0}`.
    ///
    /// One vector per free column of the RREF: a 1 in the free column and the
    /// negated RREF entries in the pivot columns.
    pub fn kernel_basis(&self, a: &DenseMatrix<u64>) -> Vec<Vec<u64>> {
        let mut m = a.clone();
        let pivots = self.rref(&mut m);
        let cols = m.cols();
        let mut is_pivot = vec![false; cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0u64; cols];
                v[f] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = self.neg(m.get(i, f));
                }
                v
            })
            .collect()
    }
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        // p < 2^63 so the sum cannot overflow
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn from_u64(&self, n: u64) -> u64 {
        n % self.p
    }
    fn mul_add(&self, acc: u64, a: u64, b: u64) -> u64 {
        ((acc as u128 + a as u128 * b as u128) % self.p as u128) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(field: &PrimeField, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<u64> {
        let data = (0..rows * cols).map(|_| rng.random_range(0..field.modulus())).collect();
        DenseMatrix::from_row_major(rows, cols, data)
    }

    #[test]
    fn default_primes_are_prime() {
        assert!(is_prime(DEFAULT_PRIME));
        assert!(is_prime(RETRY_PRIME));
        assert!(PrimeField::new(DEFAULT_PRIME - 2).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(is_prime(101));
        assert!(!is_prime(561)); // Carmichael
    }

    #[test]
    fn inverse_roundtrip() {
        let f = PrimeField::default();
        for a in [1u64, 2, 3, 12345, DEFAULT_PRIME - 1] {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
    }

    #[test]
    fn rank_small_cases() {
        let f = PrimeField::default();
        let id = DenseMatrix::from_rows(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(f.rank(&id), 3);
        assert_eq!(f.rank(&DenseMatrix::filled(4, 5, 0)), 0);
        let rep = DenseMatrix::from_rows(3, &[vec![1, 2, 3], vec![4, 5, 6], vec![1, 2, 3]]);
        assert_eq!(f.rank(&rep), 2);
    }

    #[test]
    fn kernel_small_cases() {
        let f = PrimeField::default();
        let id = DenseMatrix::from_rows(2, &[vec![1, 0], vec![0, 1]]);
        assert!(f.kernel_basis(&id).is_empty());
        let ones = DenseMatrix::from_rows(2, &[vec![1, 1]]);
        assert_eq!(f.kernel_basis(&ones), vec![vec![DEFAULT_PRIME - 1, 1]]);
    }

    #[test]
    fn kernel_of_random_wide_matrix() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&f, &mut rng, 24, 36);
        let ker = f.kernel_basis(&a);
        assert_eq!(ker.len(), 12);
        for v in &ker {
            assert!(a.mul_vec(&f, v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn rank_invariant_under_row_scaling_and_permutation() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // rank 3 product of 6x3 and 3x7
        let left = random_matrix(&f, &mut rng, 6, 3);
        let right = random_matrix(&f, &mut rng, 3, 7);
        let mut prod = DenseMatrix::filled(6, 7, 0u64);
        for i in 0..6 {
            for j in 0..7 {
                let v = (0..3).fold(0, |acc, t| f.mul_add(acc, left.get(i, t), right.get(t, j)));
                prod.set(i, j, v);
            }
        }
        assert_eq!(f.rank(&prod), 3);
        let mut scaled = prod.clone();
        for x in scaled.row_mut(2) {
            *x = f.mul(*x, 987654321);
        }
        assert_eq!(f.rank(&scaled), 3);
        let rows: Vec<Vec<u64>> = (0..6).rev().map(|i| prod.row(i).to_vec()).collect();
        assert_eq!(f.rank(&DenseMatrix::from_rows(7, &rows)), 3);
        assert_eq!(f.rank(&prod.transpose()), 3);
    }

    #[test]
    fn two_primes_agree_on_integer_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f1 = PrimeField::default();
        let f2 = PrimeField::new(RETRY_PRIME).unwrap();
        let ints: Vec<i64> = (0..8 * 10).map(|_| rng.random_range(-20..=20)).collect();
        // force dependence: row 7 = row 0 + row 1
        let mut ints = ints;
        for j in 0..10 {
            ints[70 + j] = ints[j] + ints[10 + j];
        }
        let m1 = DenseMatrix::from_row_major(8, 10, ints.iter().map(|&x| f1.from_i64(x)).collect());
        let m2 = DenseMatrix::from_row_major(8, 10, ints.iter().map(|&x| f2.from_i64(x)).collect());
        assert_eq!(f1.rank(&m1), 7);
        assert_eq!(f1.rank(&m1), f2.rank(&m2));
    }
}
