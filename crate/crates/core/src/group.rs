//! The Carnot group of a stratified algebra in exponential coordinates of
//! the first kind: BCH product, inverse, dilations, a homogeneous norm and
//! Haar-uniform ball sampling.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{validate_algebra, AlgebraError, StratifiedAlgebra};
use crate::scalar::{format_rational, Rational, Scalar};

/// Highest step with hardcoded BCH terms.
pub const MAX_STEP: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("points belong to different groups")]
    MixedGroups,
    #[error("point has {got} coordinates, group has dimension {expected}")]
    Length { got: usize, expected: usize },
    #[error("step {0} exceeds the supported maximum of {MAX_STEP}")]
    StepTooLarge(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("dilation factor must be positive")]
    NonPositiveDilation,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("norm weights must be {expected} positive numbers")]
    BadWeights { expected: usize },
    #[error("rejection sampling acceptance rate {rate:.2e} is below 1e-3")]
    LowAcceptance { rate: f64 },
}

/// Identifies the group a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupId(u64);

/// A point in exponential coordinates of the first kind, ordered by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint<S = f64> {
    coords: Vec<S>,
    group: GroupId,
}

impl<S: Scalar> GroupPoint<S> {
    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn group_id(&self) -> GroupId {
        self.group
    }

    pub fn to_f64(&self) -> GroupPoint<f64> {
        GroupPoint { coords: self.coords.iter().map(Scalar::to_f64).collect(), group: self.group }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|x| x.is_zero())
    }

    pub(crate) fn with_coords(&self, coords: Vec<S>) -> Self {
        GroupPoint { coords, group: self.group }
    }
}

impl GroupPoint<f64> {
    /// Exact rational copy of a float point.
    pub fn to_exact(&self) -> GroupPoint<Rational> {
        GroupPoint { coords: self.coords.iter().map(|&x| Rational::from_f64(x)).collect(), group: self.group }
    }

    /// Largest coordinate difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `‖g‖ = max_a ε_a |g_a|^{1/a}`, with `|·|` Euclidean within layer `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousNorm {
    weights: Vec<f64>,
}

impl HomogeneousNorm {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A Carnot group realized on `ℝⁿ`. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct CarnotGroup {
    algebra: Arc<StratifiedAlgebra>,
    norm: HomogeneousNorm,
    id: GroupId,
    layer_ranges: Vec<std::ops::Range<usize>>,
}

/// Groups compare by identity of their defining data.
impl PartialEq for CarnotGroup {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl CarnotGroup {
    /// Requires a valid algebra of step at most [`MAX_STEP`]. All norm
    /// weights start at 1.
    pub fn new(algebra: StratifiedAlgebra) -> Result<Self, GroupError> {
        let report = validate_algebra(&algebra)?;
        if !report.is_valid() {
            return Err(AlgebraError::Invalid { name: algebra.name().to_string(), report }.into());
        }
        if algebra.step() > MAX_STEP {
            return Err(GroupError::StepTooLarge(algebra.step()));
        }
        let weights = vec![1.0; algebra.step()];
        Ok(Self::assemble(algebra, weights))
    }

    pub fn with_norm_weights(&self, weights: Vec<f64>) -> Result<Self, GroupError> {
        let s = self.step();
        if weights.len() != s || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(GroupError::BadWeights { expected: s });
        }
        Ok(Self::assemble((*self.algebra).clone(), weights))
    }

    fn assemble(algebra: StratifiedAlgebra, weights: Vec<f64>) -> Self {
        let mut h = DefaultHasher::new();
        algebra.name().hash(&mut h);
        algebra.layer_dims().hash(&mut h);
        for (i, j, k, c) in algebra.bracket_entries() {
            (i, j, k, format_rational(&c)).hash(&mut h);
        }
        for w in &weights {
            w.to_bits().hash(&mut h);
        }
        let layer_ranges = (1..=algebra.step()).map(|a| algebra.layer_range(a)).collect();
        CarnotGroup {
            algebra: Arc::new(algebra),
            norm: HomogeneousNorm { weights },
            id: GroupId(h.finish()),
            layer_ranges,
        }
    }

    pub fn algebra(&self) -> &StratifiedAlgebra {
        &self.algebra
    }

    pub fn norm(&self) -> &HomogeneousNorm {
        &self.norm
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn step(&self) -> usize {
        self.algebra.step()
    }

    pub fn homogeneous_dimension(&self) -> usize {
        self.algebra.homogeneous_dimension()
    }

    pub fn point<S: Scalar>(&self, coords: Vec<S>) -> Result<GroupPoint<S>, GroupError> {
        if coords.len() != self.dim() {
            return Err(GroupError::Length { got: coords.len(), expected: self.dim() });
        }
        Ok(GroupPoint { coords, group: self.id })
    }

    /// Convenience for literals; panics on a length mismatch.
    pub fn pt(&self, coords: &[f64]) -> GroupPoint<f64> {
        self.point(coords.to_vec()).expect("coordinate count")
    }

    pub fn identity<S: Scalar>(&self) -> GroupPoint<S> {
        GroupPoint { coords: vec![S::zero(); self.dim()], group: self.id }
    }

    fn owns<S>(&self, g: &GroupPoint<S>) -> bool {
        g.group == self.id
    }

    /// Group product by the BCH series truncated at the step:
    /// `x + y + ½[x,y] + 1/12([x,[x,y]] + [y,[y,x]]) − 1/24[y,[x,[x,y]]]`.
    ///
    /// Panics if either point belongs to another group; see [`checked_mul`](Self::checked_mul).
    pub fn mul<S: Scalar>(&self, g: &GroupPoint<S>, h: &GroupPoint<S>) -> GroupPoint<S> {
        assert!(self.owns(g) && self.owns(h), "mul: points from a different group");
        GroupPoint { coords: self.bch(&g.coords, &h.coords), group: self.id }
    }

    pub fn checked_mul<S: Scalar>(
        &self,
        g: &GroupPoint<S>,
        h: &GroupPoint<S>,
    ) -> Result<GroupPoint<S>, GroupError> {
        if !self.owns(g) || !self.owns(h) {
            return Err(GroupError::MixedGroups);
        }
        Ok(self.mul(g, h))
    }

    /// Product of several points, left to right.
    pub fn mul_all<S: Scalar>(&self, factors: &[&GroupPoint<S>]) -> GroupPoint<S> {
        factors.iter().fold(self.identity(), |acc, g| self.mul(&acc, g))
    }

    pub(crate) fn bch<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let a = &*self.algebra;
        let mut z: Vec<S> = x.iter().zip(y).map(|(p, q)| p.clone() + q.clone()).collect();
        let step = a.step();
        if step < 2 || a.is_abelian() {
            return z;
        }
        let xy = a.bracket(x, y);
        axpy(&mut z, &S::ratio(1, 2), &xy);
        if step >= 3 {
            let x_xy = a.bracket(x, &xy);
            let y_xy = a.bracket(y, &xy);
            // [y,[y,x]] = -[y,[x,y]]
            axpy(&mut z, &S::ratio(1, 12), &x_xy);
            axpy(&mut z, &S::ratio(-1, 12), &y_xy);
            if step >= 4 {
                let y_x_xy = a.bracket(y, &x_xy);
                axpy(&mut z, &S::ratio(-1, 24), &y_x_xy);
            }
        }
        z
    }

    /// Coordinate negation.
    pub fn inv<S: Scalar>(&self, g: &GroupPoint<S>) -> GroupPoint<S> {
        g.with_coords(g.coords.iter().map(|x| -x.clone()).collect())
    }

    /// `δ_λ`: layer-`a` coordinates scaled by `λ^a`. Panics if `λ <= 0`.
    pub fn dilate<S: Scalar>(&self, lambda: &S, g: &GroupPoint<S>) -> GroupPoint<S> {
        self.checked_dilate(lambda, g).expect("dilation factor must be positive")
    }

    pub fn checked_dilate<S: Scalar>(
        &self,
        lambda: &S,
        g: &GroupPoint<S>,
    ) -> Result<GroupPoint<S>, GroupError> {
        if *lambda <= S::zero() {
            return Err(GroupError::NonPositiveDilation);
        }
        let mut coords = g.coords.clone();
        let mut factor = S::one();
        for range in &self.layer_ranges {
            factor = factor * lambda.clone();
            for x in &mut coords[range.clone()] {
                *x = x.clone() * factor.clone();
            }
        }
        Ok(g.with_coords(coords))
    }

    /// Norm of a raw coordinate vector.
    pub fn norm_of<S: Scalar>(&self, coords: &[S]) -> f64 {
        let mut best = 0.0_f64;
        for (a, range) in self.layer_ranges.iter().enumerate() {
            let sq = coords[range.clone()]
                .iter()
                .fold(S::zero(), |acc, x| acc + x.clone() * x.clone())
                .to_f64();
            if sq == 0.0 {
                continue;
            }
            let layer_norm = sq.sqrt();
            let v = self.norm.weights[a]
                * if a == 0 { layer_norm } else { layer_norm.powf(1.0 / (a + 1) as f64) };
            best = best.max(v);
        }
        best
    }

    pub fn hnorm<S: Scalar>(&self, g: &GroupPoint<S>) -> f64 {
        self.norm_of(&g.coords)
    }

    /// Left-invariant `‖g⁻¹·h‖`.
    pub fn hdist<S: Scalar>(&self, g: &GroupPoint<S>, h: &GroupPoint<S>) -> f64 {
        self.hnorm(&self.mul(&self.inv(g), h))
    }

    /// Half-widths of the coordinate box containing `B(e, r)`.
    pub fn ball_box(&self, r: f64) -> Vec<f64> {
        let mut half = vec![0.0; self.dim()];
        for (a, range) in self.layer_ranges.iter().enumerate() {
            let h = (r / self.norm.weights[a]).powi(a as i32 + 1);
            for x in &mut half[range.clone()] {
                *x = h;
            }
        }
        half
    }

    /// `count` Haar-uniform points of the closed ball `{g : d(center, g) <= r}`,
    /// drawn by rejection from the bounding box of `B(e, r)` and translated by
    /// `center`. Lebesgue measure in these coordinates is the Haar measure.
    pub fn sample_ball(
        &self,
        center: &GroupPoint<f64>,
        r: f64,
        count: usize,
        seed: u64,
    ) -> Result<Vec<GroupPoint<f64>>, GroupError> {
        if !(r > 0.0) {
            return Err(GroupError::NonPositiveRadius);
        }
        let half = self.ball_box(r);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0_u64;
        while out.len() < count {
            attempts += 1;
            let u: Vec<f64> = half.iter().map(|&h| rng.random_range(-h..=h)).collect();
            if self.norm_of(&u) <= r {
                let u = GroupPoint { coords: u, group: self.id };
                out.push(self.mul(center, &u));
            } else if attempts >= 10_000 {
                let rate = out.len() as f64 / attempts as f64;
                if rate < 1e-3 {
                    return Err(GroupError::LowAcceptance { rate });
                }
            }
        }
        Ok(out)
    }

    /// Empirical constant `C` in `d(g,k) <= C (d(g,h) + d(h,k))`, maximized
    /// over random triples in the unit coordinate cube. Not assumed to be 1.
    pub fn quasi_triangle_constant(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| GroupPoint {
            coords: (0..self.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect::<Vec<f64>>(),
            group: self.id,
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = draw(&mut rng);
            let k = draw(&mut rng);
            // Intermediate points near the segment stress the inequality most.
            let t: f64 = rng.random_range(0.0..=1.0);
            let mid: Vec<f64> = g.coords.iter().zip(&k.coords).map(|(a, b)| a + t * (b - a)).collect();
            let h = GroupPoint { coords: mid, group: self.id };
            for h in [h, draw(&mut rng)] {
                let denom = self.hdist(&g, &h) + self.hdist(&h, &k);
                if denom > 0.0 {
                    worst = worst.max(self.hdist(&g, &k) / denom);
                }
            }
        }
        worst
    }
}

fn axpy<S: Scalar>(z: &mut [S], a: &S, x: &[S]) {
    for (zi, xi) in z.iter_mut().zip(x) {
        if !xi.is_zero() {
            *zi = zi.clone() + a.clone() * xi.clone();
        }
    }
}
