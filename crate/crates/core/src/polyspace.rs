//! Monomial combinatorics and the rank-one forward map.
//!
//! A summand is parametrized by `u = (l_1, .., l_n, λ^1, .., λ^r)` and
//! contributes `(λ^1 ℓ^{d_1}, .., λ^r ℓ^{d_r})` with `ℓ = x_0 + l_1 x_1 + .. + l_n x_n`.
//! Coefficient vectors list the components one after the other, each in the
//! graded-lex order of its [`MonomialBasis`].

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Ring};
use serde::{Deserialize, Serialize};

/// `n!`-free multinomial `d! / (α_0! .. α_n!)`, as a product of binomials.
pub fn multinomial(d: usize, alpha: &[usize]) -> Result<u64> {
    let total: usize = alpha.iter().sum();
    if total != d {
        return Err(Error::DegreeMismatch {
            expected: d,
            actual: total,
        });
    }
    let mut acc: u128 = 1;
    let mut used = 0usize;
    for &a in alpha {
        // acc *= C(used + a, a)
        for i in 1..=a as u128 {
            acc = acc * (used as u128 + i) / i;
        }
        used += a;
    }
    u64::try_from(acc).map_err(|_| Error::InvalidSpec(format!("multinomial for degree {d} overflows u64")))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent tuples of degree `d` in `n + 1` variables, graded lexicographic
/// with `x_0 ≻ x_1 ≻ .. ≻ x_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    degree: usize,
    vars: usize,
    exponents: Vec<usize>,
    multinomials: Vec<u64>,
}

impl MonomialBasis {
    pub fn new(n: usize, degree: usize) -> Self {
        let vars = n + 1;
        let mut exponents = Vec::with_capacity(binomial(n + degree, degree) * vars);
        let mut current = vec![0usize; vars];
        fill_lex(&mut current, 0, degree, &mut exponents);
        let multinomials = exponents
            .chunks(vars)
            .map(|alpha| multinomial(degree, alpha).expect("degree matches by construction"))
            .collect();
        Self {
            degree,
            vars,
            exponents,
            multinomials,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.multinomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multinomials.is_empty()
    }

    pub fn exponent(&self, i: usize) -> &[usize] {
        &self.exponents[i * self.vars..(i + 1) * self.vars]
    }

    pub fn multinomial(&self, i: usize) -> u64 {
        self.multinomials[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.exponents.chunks(self.vars)
    }
}

fn fill_lex(current: &mut [usize], var: usize, remaining: usize, out: &mut Vec<usize>) {
    if var == current.len() - 1 {
        current[var] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e;
        fill_lex(current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

#[derive(Serialize, Deserialize)]
struct ProblemSpecRepr {
    n: usize,
    r: usize,
    degrees: Vec<usize>,
}

/// The shape `(n, r, d_1 ≤ .. ≤ d_r)` of one decomposition problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpecRepr", into = "ProblemSpecRepr")]
pub struct ProblemSpec {
    n: usize,
    degrees: Vec<usize>,
    bases: Vec<MonomialBasis>,
    offsets: Vec<usize>,
    ambient: usize,
}

impl TryFrom<ProblemSpecRepr> for ProblemSpec {
    type Error = Error;

    fn try_from(repr: ProblemSpecRepr) -> Result<Self> {
        if repr.r != repr.degrees.len() {
            return Err(Error::InvalidSpec(format!(
                "r = {} but {} degrees given",
                repr.r,
                repr.degrees.len()
            )));
        }
        ProblemSpec::new(repr.n, repr.degrees)
    }
}

impl From<ProblemSpec> for ProblemSpecRepr {
    fn from(spec: ProblemSpec) -> Self {
        Self {
            n: spec.n,
            r: spec.r(),
            degrees: spec.degrees,
        }
    }
}

impl ProblemSpec {
    pub fn new(n: usize, degrees: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if degrees.is_empty() {
            return Err(Error::InvalidSpec("at least one component is required".into()));
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(Error::InvalidSpec("degrees must be at least 1".into()));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpec(format!("degrees {degrees:?} are not sorted nondecreasing")));
        }
        let bases: Vec<MonomialBasis> = degrees.iter().map(|&d| MonomialBasis::new(n, d)).collect();
        let mut offsets = Vec::with_capacity(bases.len());
        let mut ambient = 0;
        for b in &bases {
            offsets.push(ambient);
            ambient += b.len();
        }
        debug_assert_eq!(ambient, degrees.iter().map(|&d| binomial(n + d, d)).sum::<usize>());
        Ok(Self {
            n,
            degrees,
            bases,
            offsets,
            ambient,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// `N = Σ_j C(n + d_j, d_j)`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Parameters per summand, `n + r`.
    pub fn block_size(&self) -> usize {
        self.n + self.r()
    }

    pub fn basis(&self, component: usize) -> &MonomialBasis {
        &self.bases[component]
    }

    /// Start index of component `j` in a coefficient vector.
    pub fn offset(&self, component: usize) -> usize {
        self.offsets[component]
    }

    fn max_degree(&self) -> usize {
        *self.degrees.last().expect("nonempty")
    }

    fn check_blocks(&self, len: usize) -> Result<usize> {
        let b = self.block_size();
        if len % b != 0 {
            return Err(Error::Shape(format!("parameter vector of length {len} is not a multiple of n+r = {b}")));
        }
        Ok(len / b)
    }
}

impl std::fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ds: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
        write!(f, "n={}, r={}, degrees=({})", self.n, self.r(), ds.join(","))
    }
}

/// Parameters of one summand: `n` linear coefficients then `r` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SummandParams<T> {
    coords: Vec<T>,
    n: usize,
}

impl<T: Copy> SummandParams<T> {
    pub fn new(linear: &[T], weights: &[T]) -> Self {
        let mut coords = linear.to_vec();
        coords.extend_from_slice(weights);
        Self { coords, n: linear.len() }
    }

    pub fn linear(&self) -> &[T] {
        &self.coords[..self.n]
    }

    pub fn weights(&self) -> &[T] {
        &self.coords[self.n..]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.coords
    }
}

/// Powers `l_h^e` for one summand, `e ≤ max degree`.
struct Powers<E> {
    table: Vec<E>,
    stride: usize,
}

impl<E: Copy> Powers<E> {
    fn new<R: Ring<Elem = E>>(ring: &R, linear: &[E], max_degree: usize) -> Self {
        let stride = max_degree + 1;
        let mut table = Vec::with_capacity(linear.len() * stride);
        for &l in linear {
            let mut p = ring.one();
            for _ in 0..stride {
                table.push(p);
                p = ring.mul(p, l);
            }
        }
        Self { table, stride }
    }

    fn get(&self, h: usize, e: usize) -> E {
        self.table[h * self.stride + e]
    }
}

/// `∂^{|D|} (mult · Π_h l_h^{α_h}) / Π_{h∈D} ∂l_h` for up to two derivative
/// indices `D` (indices into `l_1..l_n`, so 0-based over `α_1..α_n`).
fn monomial_derivative<R: Ring>(
    ring: &R,
    powers: &Powers<R::Elem>,
    alpha: &[usize],
    mult: u64,
    d: &[usize],
) -> R::Elem {
    let mut coeff = mult;
    let mut lowered = [0usize; 2];
    for (slot, &h) in d.iter().enumerate() {
        let e = alpha[h + 1];
        let already = lowered[..slot].iter().filter(|&&x| x == h + 1).count();
        if e <= already {
            return ring.zero();
        }
        coeff *= (e - already) as u64;
        lowered[slot] = h + 1;
    }
    let mut value = ring.from_u64(coeff);
    for h in 0..alpha.len() - 1 {
        let drop = d.iter().filter(|&&x| x == h).count();
        let e = alpha[h + 1] - drop;
        if e > 0 {
            value = ring.mul(value, powers.get(h, e));
        }
    }
    value
}

/// Coefficient vector of `Σ_i (λ_i^1 ℓ_i^{d_1}, .., λ_i^r ℓ_i^{d_r})`.
///
/// `blocks` is the concatenation of `k` summands of `n + r` parameters each.
pub fn forward_map<R: Ring>(ring: &R, spec: &ProblemSpec, blocks: &[R::Elem]) -> Result<Vec<R::Elem>> {
    spec.check_blocks(blocks.len())?;
    let n = spec.n();
    let mut out = vec![ring.zero(); spec.ambient_dim()];
    for summand in blocks.chunks(spec.block_size()) {
        let powers = Powers::new(ring, &summand[..n], spec.max_degree());
        for (j, basis) in spec.bases.iter().enumerate() {
            let weight = summand[n + j];
            let off = spec.offset(j);
            for (i, alpha) in basis.iter().enumerate() {
                let v = monomial_derivative(ring, &powers, alpha, basis.multinomial(i), &[]);
                out[off + i] = ring.mul_add(out[off + i], weight, v);
            }
        }
    }
    Ok(out)
}

/// The `n + r` tangent rows `∂Φ/∂u_s` of one summand, each of length `N`.
pub fn summand_tangent_rows<R: Ring>(
    ring: &R,
    spec: &ProblemSpec,
    summand: &[R::Elem],
) -> Result<DenseMatrix<R::Elem>> {
    let (n, bs) = (spec.n(), spec.block_size());
    if summand.len() != bs {
        return Err(Error::Shape(format!("summand has {} parameters, expected {bs}", summand.len())));
    }
    let mut rows = DenseMatrix::filled(bs, spec.ambient_dim(), ring.zero());
    let powers = Powers::new(ring, &summand[..n], spec.max_degree());
    for (j, basis) in spec.bases.iter().enumerate() {
        let weight = summand[n + j];
        let off = spec.offset(j);
        for (i, alpha) in basis.iter().enumerate() {
            let mult = basis.multinomial(i);
            rows.set(n + j, off + i, monomial_derivative(ring, &powers, alpha, mult, &[]));
            for h in 0..n {
                let d = monomial_derivative(ring, &powers, alpha, mult, &[h]);
                rows.set(h, off + i, ring.mul(weight, d));
            }
        }
    }
    Ok(rows)
}

/// Jacobian of [`forward_map`], `N × k(n+r)`, columns in block order.
pub fn forward_jacobian<R: Ring>(ring: &R, spec: &ProblemSpec, blocks: &[R::Elem]) -> Result<DenseMatrix<R::Elem>> {
    let k = spec.check_blocks(blocks.len())?;
    let bs = spec.block_size();
    let mut jac = DenseMatrix::filled(spec.ambient_dim(), k * bs, ring.zero());
    for (b, summand) in blocks.chunks(bs).enumerate() {
        let rows = summand_tangent_rows(ring, spec, summand)?;
        for s in 0..bs {
            for (c, &v) in rows.row(s).iter().enumerate() {
                jac.set(c, b * bs + s, v);
            }
        }
    }
    Ok(jac)
}

/// Second partials of `covector · Φ(u)` over the `n + r` parameters of one summand.
pub fn forward_hessian_contraction<R: Ring>(
    ring: &R,
    spec: &ProblemSpec,
    summand: &[R::Elem],
    covector: &[R::Elem],
) -> Result<DenseMatrix<R::Elem>> {
    let (n, bs) = (spec.n(), spec.block_size());
    if summand.len() != bs {
        return Err(Error::Shape(format!("summand has {} parameters, expected {bs}", summand.len())));
    }
    if covector.len() != spec.ambient_dim() {
        return Err(Error::Shape(format!(
            "covector has length {}, expected N = {}",
            covector.len(),
            spec.ambient_dim()
        )));
    }
    let powers = Powers::new(ring, &summand[..n], spec.max_degree());
    let mut hess = DenseMatrix::filled(bs, bs, ring.zero());
    for (j, basis) in spec.bases.iter().enumerate() {
        let weight = summand[n + j];
        let off = spec.offset(j);
        // l-l block accumulates Σ K·∂²m before the weight is applied
        let mut ll = vec![ring.zero(); n * n];
        for (i, alpha) in basis.iter().enumerate() {
            let kv = covector[off + i];
            if kv == ring.zero() {
                continue;
            }
            let mult = basis.multinomial(i);
            for h in 0..n {
                let d1 = monomial_derivative(ring, &powers, alpha, mult, &[h]);
                let cross = ring.mul_add(hess.get(h, n + j), kv, d1);
                hess.set(h, n + j, cross);
                for g in h..n {
                    let d2 = monomial_derivative(ring, &powers, alpha, mult, &[h, g]);
                    ll[h * n + g] = ring.mul_add(ll[h * n + g], kv, d2);
                }
            }
        }
        for h in 0..n {
            hess.set(n + j, h, hess.get(h, n + j));
            for g in h..n {
                let v = ring.mul_add(hess.get(h, g), weight, ll[h * n + g]);
                hess.set(h, g, v);
                hess.set(g, h, v);
            }
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexRing, PrimeField};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(3, &[1, 1, 1]).unwrap(), 6);
        assert_eq!(multinomial(2, &[2, 0, 0]).unwrap(), 1);
        assert_eq!(multinomial(3, &[2, 1, 0]).unwrap(), 3);
        assert_eq!(multinomial(12, &[4, 4, 4]).unwrap(), 34650);
        assert_eq!(
            multinomial(3, &[1, 1]),
            Err(Error::DegreeMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn basis_order_is_graded_lex() {
        let b = MonomialBasis::new(2, 2);
        let got: Vec<&[usize]> = b.iter().collect();
        let want: Vec<&[usize]> = vec![&[2, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 2, 0], &[0, 1, 1], &[0, 0, 2]];
        assert_eq!(got, want);
        for (n, d) in [(1, 5), (2, 3), (3, 4), (2, 12)] {
            assert_eq!(MonomialBasis::new(n, d).len(), binomial(n + d, d));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ProblemSpec::new(2, vec![3, 2]).is_err());
        assert!(ProblemSpec::new(0, vec![2]).is_err());
        assert!(ProblemSpec::new(2, vec![0, 2]).is_err());
        assert!(ProblemSpec::new(2, vec![]).is_err());
        let s = ProblemSpec::new(2, vec![2, 3, 3, 3]).unwrap();
        assert_eq!(s.ambient_dim(), 36);
        assert_eq!(s.block_size(), 6);
        assert_eq!(s.offset(2), 16);
    }

    #[test]
    fn spec_json_shape() {
        let s = ProblemSpec::new(2, vec![2, 4]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"n":2,"r":2,"degrees":[2,4]}"#);
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ProblemSpec>(r#"{"n":2,"r":3,"degrees":[2,4]}"#).is_err());
    }

    #[test]
    fn forward_map_of_pure_powers() {
        let spec = ProblemSpec::new(2, vec![2]).unwrap();
        let f = forward_map(&ComplexRing, &spec, &[c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(f, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0)]);
        let f = forward_map(&ComplexRing, &spec, &[c(1.0), c(0.0), c(2.0)]).unwrap();
        assert_eq!(f, vec![c(2.0), c(4.0), c(0.0), c(2.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn multinomial_theorem_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.random_range(1..=3);
            let d = rng.random_range(1..=8);
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let basis = MonomialBasis::new(n, d);
            let sum: f64 = basis
                .iter()
                .enumerate()
                .map(|(i, a)| basis.multinomial(i) as f64 * (0..n).map(|h| l[h].powi(a[h + 1] as i32)).product::<f64>())
                .sum();
            let want = (1.0 + l.iter().sum::<f64>()).powi(d as i32);
            assert!((sum - want).abs() <= 1e-12 * want.abs().max(1.0), "{sum} vs {want}");
        }
    }

    #[test]
    fn weight_column_is_power_coefficients() {
        let spec = ProblemSpec::new(2, vec![2, 3]).unwrap();
        let u = [c(0.3), c(-0.7), c(1.1), c(-0.4)];
        let jac = forward_jacobian(&ComplexRing, &spec, &u).unwrap();
        let pure2 = forward_map(&ComplexRing, &ProblemSpec::new(2, vec![2]).unwrap(), &[c(0.3), c(-0.7), c(1.0)]).unwrap();
        for (i, v) in pure2.iter().enumerate() {
            assert!((jac.get(i, 2) - v).norm() < 1e-15);
        }
        for i in 6..16 {
            assert_eq!(jac.get(i, 2), c(0.0));
        }
    }

    #[test]
    fn zero_weights_kill_linear_columns() {
        let spec = ProblemSpec::new(2, vec![2, 3]).unwrap();
        let jac = forward_jacobian(&ComplexRing, &spec, &[c(0.3), c(-0.7), c(0.0), c(0.0)]).unwrap();
        for i in 0..spec.ambient_dim() {
            assert_eq!(jac.get(i, 0), c(0.0));
            assert_eq!(jac.get(i, 1), c(0.0));
        }
    }

    #[test]
    fn hessian_contraction_trivial_cases() {
        let spec = ProblemSpec::new(2, vec![2, 3, 3]).unwrap();
        let u = [c(0.3), c(-0.7), c(1.1), c(-0.4), c(0.9)];
        let zero = vec![c(0.0); spec.ambient_dim()];
        let h = forward_hessian_contraction(&ComplexRing, &spec, &u, &zero).unwrap();
        assert!(h.as_slice().iter().all(|z| *z == c(0.0)));
        let cov: Vec<Complex64> = (0..spec.ambient_dim()).map(|i| c(i as f64 * 0.1 - 1.0)).collect();
        let h = forward_hessian_contraction(&ComplexRing, &spec, &u, &cov).unwrap();
        for s in 2..5 {
            for t in 2..5 {
                assert_eq!(h.get(s, t), c(0.0));
            }
        }
    }

    #[test]
    fn same_code_path_over_prime_field() {
        let field = PrimeField::new(101).unwrap();
        let spec = ProblemSpec::new(2, vec![2]).unwrap();
        // ℓ = x0 + x1, λ = 2 → 2x0² + 4x0x1 + 2x1²
        assert_eq!(forward_map(&field, &spec, &[1, 0, 2]).unwrap(), vec![2, 4, 0, 2, 0, 0]);
        // ℓ = x0 - x1 over F_101
        assert_eq!(forward_map(&field, &spec, &[100, 0, 1]).unwrap(), vec![1, 99, 0, 1, 0, 0]);
    }
}
