//! Hessian identifiability criterion in sub-generic rank.
//!
//! For `k` random points `g_i` on the rank-one variety, the Terracini matrix
//! stacks the tangent rows `∂Φ/∂u` at every point. If it has full rank
//! `k(n+r)`, its kernel gives linear equations `K_m · y = 0` for the span `T`
//! of the tangent spaces. The contact locus is cut out by `K_m · ∂Φ/∂u_s = 0`;
//! its Jacobian at `g_i` is the stack of contracted Hessians
//! `K_m · ∂²Φ/∂u_s ∂u_t`. Rank `n + r − 1` at every `g_i` means the contact
//! locus is zero-dimensional there and the general rank-`k` polynomial
//! vector is identifiable over ℂ.
//!
//! Everything runs over a large prime field; a negative outcome is re-checked
//! once with a second prime and fresh points.

use crate::error::{Error, Result};
use crate::linalg::{numerical_kernel, numerical_rank, ComplexRing, DenseMatrix, PrimeField, Ring, DEFAULT_PRIME, RETRY_PRIME};
use crate::polyspace::{forward_hessian_contraction, summand_tangent_rows, ProblemSpec, SummandParams};
use crate::system::rank_info;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub prime: u64,
    pub retry_prime: u64,
    pub retry: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            prime: DEFAULT_PRIME,
            retry_prime: RETRY_PRIME,
            retry: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyVerdict {
    Certified,
    TerraciniDeficient,
    ContactLocusPositive,
}

impl CertifyVerdict {
    pub fn is_certified(self) -> bool {
        self == CertifyVerdict::Certified
    }
}

impl fmt::Display for CertifyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertifyVerdict::Certified => "certified",
            CertifyVerdict::TerraciniDeficient => "terracini-deficient",
            CertifyVerdict::ContactLocusPositive => "contact-locus-positive",
        })
    }
}

/// One evaluation of the criterion at one prime and one set of points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub prime: u64,
    pub seed: u64,
    pub terracini_rank: usize,
    /// Empty when the Terracini test already failed.
    pub hessian_ranks: Vec<usize>,
    pub verdict: CertifyVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentCertificate {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub k: usize,
    pub expected_rank: usize,
    pub terracini_rank: usize,
    pub hessian_ranks: Vec<usize>,
    pub verdict: CertifyVerdict,
    pub prime: u64,
    pub seed: u64,
    pub attempts: Vec<Attempt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStep {
    pub k: usize,
    pub verdict: CertifyVerdict,
    pub terracini_rank: usize,
    pub expected_rank: usize,
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifierRun {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub generic_rank: usize,
    pub perfect: bool,
    pub start_k: usize,
    pub seed: u64,
    pub trace: Vec<DescentStep>,
    pub max_certified: Option<usize>,
    pub certificate: Option<IdentCertificate>,
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `k` uniformly random points of the rank-one variety over `field`, no zero weights.
pub fn random_variety_points(spec: &ProblemSpec, k: usize, field: &PrimeField, seed: u64) -> Vec<SummandParams<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = field.modulus();
    (0..k)
        .map(|_| loop {
            let linear: Vec<u64> = (0..spec.n()).map(|_| rng.random_range(0..p)).collect();
            let weights: Vec<u64> = (0..spec.r()).map(|_| rng.random_range(0..p)).collect();
            if weights.iter().all(|&w| w != 0) {
                break SummandParams::new(&linear, &weights);
            }
        })
        .collect()
}

/// The `k(n+r) × N` matrix of tangent rows at the given points.
pub fn terracini_matrix<R: Ring>(
    ring: &R,
    spec: &ProblemSpec,
    points: &[SummandParams<R::Elem>],
) -> Result<DenseMatrix<R::Elem>> {
    let mut j1 = DenseMatrix::filled(0, spec.ambient_dim(), ring.zero());
    for p in points {
        j1.vstack(&summand_tangent_rows(ring, spec, p.as_slice())?);
    }
    Ok(j1)
}

/// Contracted Hessians of one point stacked by kernel vector:
/// rows `m(n+r) .. (m+1)(n+r)` hold `K_m · ∂²Φ`.
pub fn contact_hessian<R: Ring>(
    ring: &R,
    spec: &ProblemSpec,
    point: &SummandParams<R::Elem>,
    kernel_vectors: &[Vec<R::Elem>],
) -> Result<DenseMatrix<R::Elem>> {
    let mut h = DenseMatrix::filled(0, spec.block_size(), ring.zero());
    for kv in kernel_vectors {
        h.vstack(&forward_hessian_contraction(ring, spec, point.as_slice(), kv)?);
    }
    Ok(h)
}

fn attempt(spec: &ProblemSpec, k: usize, prime: u64, seed: u64) -> Result<Attempt> {
    let field = PrimeField::new(prime)?;
    let points = random_variety_points(spec, k, &field, seed);
    let j1 = terracini_matrix(&field, spec, &points)?;
    let terracini_rank = field.rank(&j1);
    if terracini_rank < k * spec.block_size() {
        return Ok(Attempt {
            prime,
            seed,
            terracini_rank,
            hessian_ranks: Vec::new(),
            verdict: CertifyVerdict::TerraciniDeficient,
        });
    }
    // kernel of j1 as a map on coefficient space: K with j1 K = 0
    let kernel = field.kernel_basis(&j1);
    let hessian_ranks = points
        .par_iter()
        .map(|p| Ok(field.rank(&contact_hessian(&field, spec, p, &kernel)?)))
        .collect::<Result<Vec<usize>>>()?;
    let target = spec.block_size() - 1;
    let verdict = if hessian_ranks.iter().all(|&h| h == target) {
        CertifyVerdict::Certified
    } else {
        CertifyVerdict::ContactLocusPositive
    };
    Ok(Attempt {
        prime,
        seed,
        terracini_rank,
        hessian_ranks,
        verdict,
    })
}

/// Runs the criterion at rank `k < g`.
pub fn certify_at_k(spec: &ProblemSpec, k: usize, seed: u64, options: &CertifyOptions) -> Result<IdentCertificate> {
    let info = rank_info(spec);
    if !info.is_subgeneric(k) {
        return Err(Error::NotSubGeneric {
            k,
            g: info.generic_rank,
        });
    }
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    let mut attempts = vec![attempt(spec, k, options.prime, seed)?];
    if options.retry && !attempts[0].verdict.is_certified() {
        attempts.push(attempt(spec, k, options.retry_prime, mix_seed(seed, 1))?);
    }
    let chosen = attempts
        .iter()
        .find(|a| a.verdict.is_certified())
        .or_else(|| attempts.iter().max_by_key(|a| (a.terracini_rank, std::cmp::Reverse(a.prime))))
        .expect("at least one attempt")
        .clone();
    Ok(IdentCertificate {
        schema_version: crate::SCHEMA_VERSION,
        spec: spec.clone(),
        k,
        expected_rank: k * spec.block_size(),
        terracini_rank: chosen.terracini_rank,
        hessian_ranks: chosen.hessian_ranks,
        verdict: chosen.verdict,
        prime: chosen.prime,
        seed: chosen.seed,
        attempts,
    })
}

/// Terracini rank at any `k ≥ 1`, including `k ≥ g` where the Hessian
/// criterion does not apply. Evaluated at both primes with independent points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerraciniObservation {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub k: usize,
    /// `min(k(n+r), N)`, the dimension of a non-defective span.
    pub expected_dim: usize,
    pub ranks: Vec<(u64, usize)>,
    pub defective: bool,
}

pub fn observe_terracini(spec: &ProblemSpec, k: usize, seed: u64, options: &CertifyOptions) -> Result<TerraciniObservation> {
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    let expected_dim = (k * spec.block_size()).min(spec.ambient_dim());
    let mut ranks = Vec::new();
    for (i, prime) in [options.prime, options.retry_prime].into_iter().enumerate() {
        let field = PrimeField::new(prime)?;
        let points = random_variety_points(spec, k, &field, mix_seed(seed, i as u64));
        ranks.push((prime, field.rank(&terracini_matrix(&field, spec, &points)?)));
    }
    Ok(TerraciniObservation {
        schema_version: crate::SCHEMA_VERSION,
        spec: spec.clone(),
        k,
        expected_dim,
        defective: ranks.iter().all(|&(_, r)| r < expected_dim),
        ranks,
    })
}

/// Tries `k = g − 1, g − 2, ..` until the criterion certifies or `k` reaches 0.
pub fn certify_descend(spec: &ProblemSpec, seed: u64, options: &CertifyOptions) -> Result<CertifierRun> {
    let info = rank_info(spec);
    let start_k = info.max_subgeneric;
    let mut trace = Vec::new();
    let mut certificate = None;
    for k in (1..=start_k).rev() {
        let cert = certify_at_k(spec, k, mix_seed(seed, k as u64 + 2), options)?;
        trace.push(DescentStep {
            k,
            verdict: cert.verdict,
            terracini_rank: cert.terracini_rank,
            expected_rank: cert.expected_rank,
            retries: cert.attempts.len() - 1,
        });
        if cert.verdict.is_certified() {
            certificate = Some(cert);
            break;
        }
    }
    Ok(CertifierRun {
        schema_version: crate::SCHEMA_VERSION,
        spec: spec.clone(),
        generic_rank: info.generic_rank,
        perfect: info.perfect,
        start_k,
        seed,
        max_certified: certificate.as_ref().map(|c| c.k),
        trace,
        certificate,
    })
}

/// Outcome of the criterion evaluated in floating point with numerical ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FloatCertificate {
    pub k: usize,
    pub terracini_rank: usize,
    pub hessian_ranks: Vec<usize>,
    pub verdict: CertifyVerdict,
}

/// The same criterion at random real points in `[-1, 1]`, using SVD ranks
/// with relative threshold `tol`. Independent of the prime-field path except
/// for the shared forward-map derivatives.
pub fn certify_at_k_float(spec: &ProblemSpec, k: usize, seed: u64, tol: f64) -> Result<FloatCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Complex64::new(rng.random_range(-1.0..=1.0), 0.0);
    let points: Vec<SummandParams<Complex64>> = (0..k)
        .map(|_| {
            let linear: Vec<Complex64> = (0..spec.n()).map(|_| draw()).collect();
            let weights: Vec<Complex64> = (0..spec.r()).map(|_| draw()).collect();
            SummandParams::new(&linear, &weights)
        })
        .collect();
    let j1 = terracini_matrix(&ComplexRing, spec, &points)?;
    let terracini_rank = numerical_rank(&j1, tol);
    if terracini_rank < k * spec.block_size() {
        return Ok(FloatCertificate {
            k,
            terracini_rank,
            hessian_ranks: Vec::new(),
            verdict: CertifyVerdict::TerraciniDeficient,
        });
    }
    let kernel = numerical_kernel(&j1, tol);
    let hessian_ranks = points
        .iter()
        .map(|p| Ok(numerical_rank(&contact_hessian(&ComplexRing, spec, p, &kernel)?, tol)))
        .collect::<Result<Vec<usize>>>()?;
    let target = spec.block_size() - 1;
    let verdict = if hessian_ranks.iter().all(|&h| h == target) {
        CertifyVerdict::Certified
    } else {
        CertifyVerdict::ContactLocusPositive
    };
    Ok(FloatCertificate {
        k,
        terracini_rank,
        hessian_ranks,
        verdict,
    })
}
