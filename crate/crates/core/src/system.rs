//! The square decomposition system `F_f(u) = f − Σ_i Φ(u_i)`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexRing, DenseMatrix};
use crate::polyspace::{binomial, forward_jacobian, forward_map, ProblemSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `k` summand blocks of `n + r` complex parameters each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct DecompositionPoint {
    block_size: usize,
    coords: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct BlockRepr(#[serde(with = "crate::serde_complex")] Vec<Complex64>);

#[derive(Serialize, Deserialize)]
struct PointRepr {
    blocks: Vec<BlockRepr>,
}

impl TryFrom<PointRepr> for DecompositionPoint {
    type Error = Error;

    fn try_from(repr: PointRepr) -> Result<Self> {
        let blocks: Vec<Vec<Complex64>> = repr.blocks.into_iter().map(|b| b.0).collect();
        DecompositionPoint::from_blocks(&blocks)
    }
}

impl From<DecompositionPoint> for PointRepr {
    fn from(p: DecompositionPoint) -> Self {
        PointRepr {
            blocks: p.blocks().map(|b| BlockRepr(b.to_vec())).collect(),
        }
    }
}

impl DecompositionPoint {
    pub fn new(block_size: usize, coords: Vec<Complex64>) -> Result<Self> {
        if block_size == 0 || coords.len() % block_size != 0 {
            return Err(Error::Shape(format!(
                "{} coordinates do not split into blocks of {block_size}",
                coords.len()
            )));
        }
        Ok(Self { block_size, coords })
    }

    pub fn from_real(block_size: usize, coords: &[f64]) -> Result<Self> {
        Self::new(block_size, coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_blocks(blocks: &[Vec<Complex64>]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Shape("a decomposition needs at least one block".into()));
        };
        let bs = first.len();
        if blocks.iter().any(|b| b.len() != bs) {
            return Err(Error::Shape("blocks have different lengths".into()));
        }
        Self::new(bs, blocks.concat())
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.block_size
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn block(&self, i: usize) -> &[Complex64] {
        &self.coords[i * self.block_size..(i + 1) * self.block_size]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[Complex64]> {
        self.coords.chunks(self.block_size)
    }

    pub fn conj(&self) -> Self {
        Self {
            block_size: self.block_size,
            coords: self.coords.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Reorders blocks so that block `i` of the result is block `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.k(), "permutation length");
        let coords = order.iter().flat_map(|&i| self.block(i).iter().copied()).collect();
        Self {
            block_size: self.block_size,
            coords,
        }
    }

    pub fn max_imag(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn norm_inf(&self) -> f64 {
        inf_norm(&self.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub(crate) fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Expected generic rank bookkeeping for a [`ProblemSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankInfo {
    pub spec: ProblemSpec,
    /// `g = ⌈N / (n + r)⌉`.
    pub generic_rank: usize,
    /// `N` divisible by `n + r`.
    pub perfect: bool,
    /// Largest sub-generic rank, `g − 1`.
    pub max_subgeneric: usize,
}

impl RankInfo {
    pub fn is_subgeneric(&self, k: usize) -> bool {
        k < self.generic_rank
    }
}

pub fn rank_info(spec: &ProblemSpec) -> RankInfo {
    let n_amb: usize = spec.degrees().iter().map(|&d| binomial(spec.n() + d, d)).sum();
    let bs = spec.block_size();
    let g = n_amb.div_ceil(bs);
    RankInfo {
        spec: spec.clone(),
        generic_rank: g,
        perfect: n_amb % bs == 0,
        max_subgeneric: g - 1,
    }
}

/// Decomposition system with the coefficients of `f` as parameters.
///
/// Residual convention: `parameters − forward_map(point)`, so zeros are
/// exactly the decompositions of `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaringSystem {
    spec: ProblemSpec,
    k: usize,
    #[serde(with = "crate::serde_complex")]
    parameters: Vec<Complex64>,
}

impl WaringSystem {
    /// Square system; fails unless `N = k(n + r)`.
    pub fn new(spec: ProblemSpec, k: usize, parameters: Vec<Complex64>) -> Result<Self> {
        let sys = Self::rectangular(spec, k, parameters)?;
        sys.require_square()?;
        Ok(sys)
    }

    /// System without the squareness requirement; usable for residual checks only.
    pub fn rectangular(spec: ProblemSpec, k: usize, parameters: Vec<Complex64>) -> Result<Self> {
        if parameters.len() != spec.ambient_dim() {
            return Err(Error::Shape(format!(
                "{} parameters given, N = {}",
                parameters.len(),
                spec.ambient_dim()
            )));
        }
        if k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        Ok(Self { spec, k, parameters })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parameters(&self) -> &[Complex64] {
        &self.parameters
    }

    pub fn equations(&self) -> usize {
        self.spec.ambient_dim()
    }

    pub fn unknowns(&self) -> usize {
        self.k * self.spec.block_size()
    }

    pub fn is_square(&self) -> bool {
        self.equations() == self.unknowns()
    }

    pub fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare {
                equations: self.equations(),
                unknowns: self.unknowns(),
            })
        }
    }

    /// Same system with different parameters.
    pub fn with_parameters(&self, parameters: Vec<Complex64>) -> Result<Self> {
        Self::rectangular(self.spec.clone(), self.k, parameters)
    }

    pub fn conj(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            k: self.k,
            parameters: self.parameters.iter().map(|z| z.conj()).collect(),
        }
    }

    fn check_point(&self, point: &DecompositionPoint) -> Result<()> {
        if point.block_size() != self.spec.block_size() || point.k() != self.k {
            return Err(Error::Shape(format!(
                "point has {} blocks of {}, system expects {} blocks of {}",
                point.k(),
                point.block_size(),
                self.k,
                self.spec.block_size()
            )));
        }
        Ok(())
    }

    pub fn residual(&self, point: &DecompositionPoint) -> Result<Vec<Complex64>> {
        self.check_point(point)?;
        let model = forward_map(&ComplexRing, &self.spec, point.coords())?;
        Ok(self.parameters.iter().zip(model).map(|(p, m)| p - m).collect())
    }

    pub fn residual_norm(&self, point: &DecompositionPoint) -> Result<f64> {
        Ok(inf_norm(&self.residual(point)?))
    }

    /// Derivative of [`Self::residual`], i.e. the negated forward Jacobian.
    pub fn jacobian(&self, point: &DecompositionPoint) -> Result<DenseMatrix<Complex64>> {
        self.check_point(point)?;
        Ok(forward_jacobian(&ComplexRing, &self.spec, point.coords())?.map(|z| -z))
    }
}
