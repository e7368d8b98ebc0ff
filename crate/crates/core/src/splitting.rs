//! Complementary homogeneous subgroups `(W, L)` and the projections
//! `g = π_W(g) · π_L(g)`.
//!
//! Projections are solved layer by layer: the layer-`a` coordinate of `w·l`
//! is `w_a + l_a` plus BCH terms built only from layers below `a`, so once
//! the lower layers are fixed the residual splits linearly along
//! `V_a = (V_a ∩ W) ⊕ (V_a ∩ L)`.

use thiserror::Error;

use crate::algebra::{check_carnot_subgroup, check_complementary, AlgebraError, Subspace};
use crate::group::{CarnotGroup, GroupError, GroupPoint};
use crate::linalg::{self, Vector};
use crate::scalar::{Coeff, Rational, Scalar};

/// Coordinate tolerance for float membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplittingError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("internal inconsistency: W complements an ideal but is not a Carnot subgroup")]
    NotCarnot,
    #[error("L is not normal; this operation needs a normal complement")]
    NotNormal,
    #[error("point is not in W")]
    NotInW,
}

#[derive(Debug, Clone)]
pub struct Splitting {
    group: CarnotGroup,
    w: Subspace,
    l: Subspace,
    normal: bool,
    /// Per layer, the matrix `P_a` with `r ↦ r · P_a` the W-component of a
    /// layer-`a` row vector along `V_a ∩ L`.
    w_part: Vec<Vec<Vec<Coeff>>>,
}

impl Splitting {
    /// Validated splitting with `L` normal: both graded, complementary, `L`
    /// an ideal, and `W` a Carnot subgroup.
    pub fn new(group: &CarnotGroup, w: Subspace, l: Subspace) -> Result<Self, SplittingError> {
        check_complementary(group.algebra(), &w, &l, true)?;
        if !check_carnot_subgroup(group.algebra(), &w)? {
            return Err(SplittingError::NotCarnot);
        }
        Ok(Self::assemble(group, w, l, true))
    }

    /// Graded complementary subgroups without the normality requirement. The
    /// layered solver still produces projections; operations whose formulas
    /// need a normal `L` refuse to run.
    pub fn complementary(group: &CarnotGroup, w: Subspace, l: Subspace) -> Result<Self, SplittingError> {
        check_complementary(group.algebra(), &w, &l, false)?;
        let normal = crate::algebra::is_ideal(group.algebra(), &l);
        Ok(Self::assemble(group, w, l, normal))
    }

    /// Parse-friendly constructor from rational basis rows.
    pub fn from_rows(group: &CarnotGroup, w_rows: Vec<Vector>, l_rows: Vec<Vector>) -> Result<Self, SplittingError> {
        let w = Subspace::new(group.algebra(), w_rows)?;
        let l = Subspace::new(group.algebra(), l_rows)?;
        Self::new(group, w, l)
    }

    /// Splitting by 1-based coordinate indices.
    pub fn coordinate(group: &CarnotGroup, w: &[usize], l: &[usize]) -> Result<Self, SplittingError> {
        let a = group.algebra();
        Self::new(group, Subspace::coordinate(a, w)?, Subspace::coordinate(a, l)?)
    }

    fn assemble(group: &CarnotGroup, w: Subspace, l: Subspace, normal: bool) -> Self {
        let a = group.algebra();
        let mut w_part = Vec::with_capacity(a.step());
        for layer in 1..=a.step() {
            let range = a.layer_range(layer);
            let wb = w.layer_basis(layer);
            let lb = l.layer_basis(layer);
            let rows: Vec<Vector> =
                wb.iter().chain(lb).map(|v| v[range.clone()].to_vec()).collect();
            let inv = linalg::inverse(&rows).expect("complementary layers");
            let d = range.len();
            // P = B⁻¹ · diag(1_W, 0_L) · B
            let p: Vec<Vec<Coeff>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let s: Rational = (0..wb.len()).map(|m| &inv[i][m] * &rows[m][j]).sum();
                            Coeff::new(s)
                        })
                        .collect()
                })
                .collect();
            w_part.push(p);
        }
        Splitting { group: group.clone(), w, l, normal, w_part }
    }

    pub fn group(&self) -> &CarnotGroup {
        &self.group
    }

    pub fn w(&self) -> &Subspace {
        &self.w
    }

    pub fn l(&self) -> &Subspace {
        &self.l
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    /// Homogeneous dimension of `W`.
    pub fn k(&self) -> usize {
        self.w.homogeneous_dimension()
    }

    pub fn w_dim(&self) -> usize {
        self.w.dim()
    }

    pub fn l_dim(&self) -> usize {
        self.l.dim()
    }

    pub(crate) fn require_normal(&self) -> Result<(), SplittingError> {
        if self.normal {
            Ok(())
        } else {
            Err(SplittingError::NotNormal)
        }
    }

    fn layer_w_component<S: Scalar>(&self, layer: usize, r: &[S]) -> Vec<S> {
        let p = &self.w_part[layer - 1];
        (0..r.len())
            .map(|j| {
                r.iter().enumerate().fold(S::zero(), |acc, (i, ri)| {
                    if ri.is_zero() || p[i][j].is_zero() {
                        acc
                    } else {
                        acc + ri.clone() * S::from_coeff(&p[i][j])
                    }
                })
            })
            .collect()
    }

    /// `(g_W, g_L)` with `g = g_W · g_L`.
    pub fn project<S: Scalar>(&self, g: &GroupPoint<S>) -> (GroupPoint<S>, GroupPoint<S>) {
        let a = self.group.algebra();
        let n = a.dim();
        let mut w = vec![S::zero(); n];
        let mut l = vec![S::zero(); n];
        for layer in 1..=a.step() {
            let range = a.layer_range(layer);
            let residual: Vec<S> = if layer == 1 {
                g.coords()[range.clone()].to_vec()
            } else {
                let p = self.group.bch(&w, &l);
                range.clone().map(|k| g.coords()[k].clone() - p[k].clone()).collect()
            };
            let wa = self.layer_w_component(layer, &residual);
            for ((k, r), wk) in range.zip(residual).zip(wa) {
                l[k] = r - wk.clone();
                w[k] = wk;
            }
        }
        (g.with_coords(w), g.with_coords(l))
    }

    pub fn pi_w<S: Scalar>(&self, g: &GroupPoint<S>) -> GroupPoint<S> {
        self.project(g).0
    }

    pub fn pi_l<S: Scalar>(&self, g: &GroupPoint<S>) -> GroupPoint<S> {
        self.project(g).1
    }

    /// Exact for rationals; coordinates within [`MEMBERSHIP_TOL`] (relative
    /// to unit scale) for floats.
    pub fn contains_w<S: Scalar>(&self, g: &GroupPoint<S>) -> bool {
        self.layer_membership(g, true)
    }

    pub fn contains_l<S: Scalar>(&self, g: &GroupPoint<S>) -> bool {
        self.layer_membership(g, false)
    }

    fn layer_membership<S: Scalar>(&self, g: &GroupPoint<S>, in_w: bool) -> bool {
        let a = self.group.algebra();
        let tol = MEMBERSHIP_TOL * crate::scalar::max_abs(g.coords()).max(1.0);
        (1..=a.step()).all(|layer| {
            let r = &g.coords()[a.layer_range(layer)];
            let wa = self.layer_w_component(layer, r);
            if in_w {
                r.iter().zip(&wa).all(|(x, y)| (x.clone() - y.clone()).is_negligible(tol))
            } else {
                wa.iter().all(|y| y.is_negligible(tol))
            }
        })
    }

    /// Coordinates of `w ∈ W` in the canonical basis of `Lie(W)`.
    pub fn w_coords<S: Scalar>(&self, w: &GroupPoint<S>) -> Vec<S> {
        self.w.coordinates_of(w.coords())
    }

    pub fn w_point<S: Scalar>(&self, t: &[S]) -> GroupPoint<S> {
        self.group.point(self.w.combine(t)).expect("ambient length")
    }

    pub fn l_coords<S: Scalar>(&self, l: &GroupPoint<S>) -> Vec<S> {
        self.l.coordinates_of(l.coords())
    }

    pub fn l_point<S: Scalar>(&self, t: &[S]) -> GroupPoint<S> {
        self.group.point(self.l.combine(t)).expect("ambient length")
    }

    /// Check `π_W(q⁻¹a) = q_W⁻¹a` and `π_L(q⁻¹a) = a⁻¹ q_W q_L⁻¹ q_W⁻¹ a`
    /// for `a ∈ W`, comparing the projection solver against the closed forms.
    pub fn verify_normal_projection_identities<S: Scalar>(
        &self,
        q: &GroupPoint<S>,
        a: &GroupPoint<S>,
    ) -> Result<ProjectionIdentityReport, SplittingError> {
        self.require_normal()?;
        if !self.contains_w(a) {
            return Err(SplittingError::NotInW);
        }
        let g = &self.group;
        let (qw, ql) = self.project(q);
        let (lhs_w, lhs_l) = self.project(&g.mul(&g.inv(q), a));
        let rhs_w = g.mul(&g.inv(&qw), a);
        let rhs_l = g.mul_all(&[&g.inv(a), &qw, &g.inv(&ql), &g.inv(&qw), a]);
        Ok(ProjectionIdentityReport {
            w_discrepancy: max_diff(&lhs_w, &rhs_w),
            l_discrepancy: max_diff(&lhs_l, &rhs_l),
        })
    }
}

pub(crate) fn max_diff<S: Scalar>(a: &GroupPoint<S>, b: &GroupPoint<S>) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x.clone() - y.clone()).to_f64().abs())
        .fold(0.0, f64::max)
}

/// Largest coordinate discrepancy of each projection identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionIdentityReport {
    pub w_discrepancy: f64,
    pub l_discrepancy: f64,
}

impl ProjectionIdentityReport {
    pub fn max(&self) -> f64 {
        self.w_discrepancy.max(self.l_discrepancy)
    }
}

/// Validated splitting from basis rows; see [`Splitting::new`].
pub fn make_splitting(
    group: &CarnotGroup,
    w_rows: Vec<Vector>,
    l_rows: Vec<Vector>,
) -> Result<Splitting, SplittingError> {
    Splitting::from_rows(group, w_rows, l_rows)
}
