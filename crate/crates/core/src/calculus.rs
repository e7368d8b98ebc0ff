//! Numerical Pansu differentiation on a scale ladder, the intrinsic
//! differential of a graph function, and blow-up diagnostics.
//!
//! The rescaled increments `D_t(w) = δ_{1/t}(f(a₀)⁻¹·f(a₀·δ_t w))` are
//! extrapolated to `t = 0` with a three-point quadratic fit before the
//! Cauchy test, since the raw quotients only decay like a power of `t`.

use std::sync::Arc;

use thiserror::Error;

use crate::algebra::Subspace;
use crate::graph::{
    linear_from_hom_tol, projection_residual, GraphError, GraphFunction, HomogeneousHom, IntrinsicLinearMap,
};
use crate::group::{CarnotGroup, GroupPoint};
use crate::linalg::{self, Vector};
use crate::scalar::{Coeff, Rational, Scalar};
use crate::splitting::SplittingError;

pub const DEFAULT_TOL: f64 = 1e-4;
/// Slack allowed when checking that the raw residual trace decreases.
pub const MONOTONE_SLACK: f64 = 0.10;
const MONOTONE_FLOOR: f64 = 1e-12;
const MIN_SCALES: usize = 6;

/// `2^-3, …, 2^-12`.
pub fn default_ladder() -> Vec<f64> {
    (3..=12).map(|e| 2f64.powi(-e)).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Splitting(#[from] SplittingError),
    #[error("scale ladder must be strictly decreasing positive values with at least {MIN_SCALES} usable entries (got {0})")]
    Ladder(usize),
    #[error("base point is not an interior point of the domain")]
    NotInterior,
    #[error("rule cannot be differentiated (sample table)")]
    NotDifferentiableRule,
    #[error("not differentiable at the base point: {0}")]
    NotDifferentiable(String),
    #[error("{0} of the sampled blow-up points landed in the ball")]
    TooFewSamples(usize),
}

/// Arithmetic used for the difference quotients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
    /// Exact when the map supports it and the group is not abelian.
    Auto,
}

/// A map from a homogeneous subgroup `W ⊆ G` to `G`.
pub trait WMap: Sync {
    fn group(&self) -> &CarnotGroup;
    fn source(&self) -> &Subspace;
    fn supports_exact(&self) -> bool;
    fn in_domain_interior(&self, w: &GroupPoint<f64>, margin: f64) -> bool;
    fn eval<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError>;
}

impl WMap for GraphFunction {
    fn group(&self) -> &CarnotGroup {
        GraphFunction::group(self)
    }

    fn source(&self) -> &Subspace {
        self.splitting().w()
    }

    fn supports_exact(&self) -> bool {
        GraphFunction::supports_exact(self)
    }

    fn in_domain_interior(&self, w: &GroupPoint<f64>, margin: f64) -> bool {
        self.in_domain_margin(w, margin)
    }

    fn eval<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
        self.graph_map(w)
    }
}

/// `g ↦ q·g` on a subgroup (all of `G` by default).
#[derive(Debug, Clone)]
pub struct LeftTranslation {
    group: CarnotGroup,
    source: Subspace,
    q: Vec<Rational>,
}

impl LeftTranslation {
    pub fn new(group: &CarnotGroup, q: &GroupPoint<Rational>) -> Self {
        LeftTranslation {
            group: group.clone(),
            source: Subspace::whole(group.algebra()),
            q: q.coords().to_vec(),
        }
    }
}

impl WMap for LeftTranslation {
    fn group(&self) -> &CarnotGroup {
        &self.group
    }

    fn source(&self) -> &Subspace {
        &self.source
    }

    fn supports_exact(&self) -> bool {
        true
    }

    fn in_domain_interior(&self, _w: &GroupPoint<f64>, _margin: f64) -> bool {
        true
    }

    fn eval<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
        let q = crate::graph::exact_point(&self.group, &self.q);
        Ok(self.group.mul(&q, w))
    }
}

/// Outcome of [`pansu_diff`].
#[derive(Debug, Clone)]
pub struct DifferentiabilityReport {
    /// W-coordinates of `a₀`.
    pub base_point: Vec<f64>,
    pub hom: HomogeneousHom,
    pub arithmetic: Arithmetic,
    /// Scales actually used, decreasing.
    pub scales: Vec<f64>,
    /// `max_w hnorm(df[w]⁻¹·D_t(w))` per scale.
    pub residuals: Vec<f64>,
    /// Same, per probe direction (rows) and scale (columns).
    pub direction_residuals: Vec<Vec<f64>>,
    /// Layer-1 Cauchy differences of the extrapolated limits, from the third scale on.
    pub cauchy: Vec<f64>,
    /// Residual of the extrapolated limits against `df`.
    pub final_residual: f64,
    /// Largest inconsistency met while generating higher layers by brackets.
    pub bracket_defect: f64,
    pub monotone: bool,
    pub converged: bool,
    pub tol: f64,
    /// `sup_w hnorm(π_W(df[w])⁻¹·w)`, filled in for graph maps.
    pub projection_residual: Option<f64>,
}

/// Options for [`pansu_diff`].
#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub ladder: Vec<f64>,
    pub tol: f64,
    pub arithmetic: Arithmetic,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig { ladder: default_ladder(), tol: DEFAULT_TOL, arithmetic: Arithmetic::Auto }
    }
}

impl DiffConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_ladder(mut self, ladder: Vec<f64>) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn with_arithmetic(mut self, arithmetic: Arithmetic) -> Self {
        self.arithmetic = arithmetic;
        self
    }
}

/// How higher-layer W-basis vectors are reached from layer one by brackets.
struct BracketPlan {
    /// Per layer `a >= 2`: products `(i, u)` meaning `[b_i, word_u]` where
    /// `b_i` is a layer-1 basis index and `u` indexes the words of layer
    /// `a - 1`; the first ones form a basis of `V_a ∩ W`.
    layers: Vec<LayerPlan>,
}

struct LayerPlan {
    /// Every candidate product `(first-layer basis index, word index in the previous layer)`.
    products: Vec<(usize, usize)>,
    /// Number of leading products kept as words of this layer.
    basis_len: usize,
    /// Canonical W-basis vectors of this layer as combinations of the kept words.
    basis_in_words: Vec<Vector>,
    /// Every product as a combination of the kept words.
    products_in_words: Vec<Vector>,
}

impl BracketPlan {
    fn new(g: &CarnotGroup, w: &Subspace) -> Result<Self, CalculusError> {
        let a = g.algebra();
        let first: Vec<Vector> = w.layer_basis(1).to_vec();
        let mut prev_words: Vec<Vector> = first.clone();
        let mut layers = Vec::new();
        for layer in 2..=a.step() {
            let target = w.layer_basis(layer);
            if target.is_empty() {
                break;
            }
            let mut products = Vec::new();
            let mut vectors = Vec::new();
            for (i, b) in first.iter().enumerate() {
                for (u, word) in prev_words.iter().enumerate() {
                    products.push((i, u));
                    vectors.push(a.bracket(b, word));
                }
            }
            // Keep an independent prefix-greedy subset as words, moved to the front.
            let mut kept: Vec<usize> = Vec::new();
            let mut kept_vecs: Vec<Vector> = Vec::new();
            for (idx, v) in vectors.iter().enumerate() {
                let mut trial = kept_vecs.clone();
                trial.push(v.clone());
                if linalg::rank(&trial) > kept_vecs.len() {
                    kept.push(idx);
                    kept_vecs.push(v.clone());
                }
            }
            if kept.len() != target.len() {
                return Err(CalculusError::NotDifferentiable(format!(
                    "W is not generated by its first layer at layer {layer}"
                )));
            }
            let rest: Vec<usize> = (0..products.len()).filter(|i| !kept.contains(i)).collect();
            let order: Vec<usize> = kept.iter().chain(&rest).copied().collect();
            let products: Vec<(usize, usize)> = order.iter().map(|&i| products[i]).collect();
            let vectors: Vec<Vector> = order.iter().map(|&i| vectors[i].clone()).collect();
            let basis_in_words = target
                .iter()
                .map(|t| linalg::solve_combination(&kept_vecs, t).expect("kept words span the layer"))
                .collect();
            let products_in_words = vectors
                .iter()
                .map(|v| linalg::solve_combination(&kept_vecs, v).expect("products lie in the layer"))
                .collect();
            layers.push(LayerPlan { products, basis_len: kept.len(), basis_in_words, products_in_words });
            prev_words = kept_vecs;
        }
        Ok(BracketPlan { layers })
    }
}

fn lin_comb<S: Scalar>(coeffs: &[Rational], vectors: &[Vec<S>], n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n];
    for (c, v) in coeffs.iter().zip(vectors) {
        if num_traits::Zero::is_zero(c) {
            continue;
        }
        let c = S::from_coeff(&Coeff::new(c.clone()));
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + c.clone() * x.clone();
        }
    }
    out
}

/// Lagrange weights at `t = 0` for nodes `t0, t1, t2`.
fn extrapolation_weights<S: Scalar>(t: [&S; 3]) -> [S; 3] {
    let w = |i: usize, j: usize, k: usize| {
        (t[j].clone() * t[k].clone()) / ((t[i].clone() - t[j].clone()) * (t[i].clone() - t[k].clone()))
    };
    [w(0, 1, 2), w(1, 0, 2), w(2, 0, 1)]
}

/// Pansu differential of `f` at `a₀` (W-coordinates) along the ladder.
///
/// Non-convergence is reported through `converged = false`; errors are
/// reserved for unusable input and for bracket inconsistencies.
pub fn pansu_diff<F: WMap>(f: &F, a0: &[f64], cfg: &DiffConfig) -> Result<DifferentiabilityReport, CalculusError> {
    let exact = match cfg.arithmetic {
        Arithmetic::Exact => f.supports_exact(),
        Arithmetic::Float => false,
        Arithmetic::Auto => f.supports_exact() && !f.group().algebra().is_abelian(),
    };
    if exact {
        pansu_diff_in::<Rational, F>(f, a0, cfg, Arithmetic::Exact)
    } else {
        pansu_diff_in::<f64, F>(f, a0, cfg, Arithmetic::Float)
    }
}

fn pansu_diff_in<S: Scalar, F: WMap>(
    f: &F,
    a0: &[f64],
    cfg: &DiffConfig,
    arithmetic: Arithmetic,
) -> Result<DifferentiabilityReport, CalculusError> {
    let g = f.group();
    let alg = g.algebra();
    let n = g.dim();
    let w = f.source();
    let m = w.dim();
    if a0.len() != m {
        return Err(GraphError::Shape(format!("base point has {} coordinates, W has {m}", a0.len())).into());
    }
    if cfg.ladder.windows(2).any(|p| !(p[1] < p[0])) || cfg.ladder.iter().any(|&t| !(t > 0.0)) {
        return Err(CalculusError::Ladder(cfg.ladder.len()));
    }
    let plan = BracketPlan::new(g, w)?;

    let a0_s: Vec<S> = a0.iter().map(|&x| S::from_f64(x)).collect();
    let base = g.point::<S>(w.combine(&a0_s)).expect("ambient length");
    if !f.in_domain_interior(&base.to_f64(), 0.0) {
        return Err(CalculusError::NotInterior);
    }

    // Probe directions in W-coordinates: first-layer basis, then held-out ones.
    let first: Vec<usize> = (0..m).filter(|&j| w.basis_layer(j) == 1).collect();
    let unit = |j: usize| -> Vec<S> { (0..m).map(|i| if i == j { S::one() } else { S::zero() }).collect() };
    let mut probes: Vec<Vec<S>> = first.iter().map(|&j| unit(j)).collect();
    if let Some(&j) = first.first() {
        probes.push(unit(j).into_iter().map(|x| -x).collect());
    }
    if first.len() > 1 {
        probes.push((0..m).map(|i| if first.contains(&i) { S::one() } else { S::zero() }).collect());
    }
    if let Some(j) = (0..m).find(|&j| w.basis_layer(j) >= 2) {
        probes.push(unit(j));
    }

    // Drop leading scales whose probes leave the domain.
    let probe_points: Vec<GroupPoint<f64>> = probes.iter().map(|t| g.point(w.combine(t)).unwrap().to_f64()).collect();
    let usable: Vec<f64> = cfg
        .ladder
        .iter()
        .copied()
        .skip_while(|&t| {
            probe_points.iter().any(|p| {
                let moved = g.mul(&base.to_f64(), &g.dilate(&t, p));
                !f.in_domain_interior(&moved, 0.0)
            })
        })
        .collect();
    if usable.len() < MIN_SCALES {
        return Err(CalculusError::Ladder(usable.len()));
    }

    let f_base = f.eval(&base)?;
    let f_base_inv = g.inv(&f_base);
    // quotients[p][i] = D_{t_i}(probe p)
    let mut quotients: Vec<Vec<GroupPoint<S>>> = Vec::with_capacity(probes.len());
    let scales_s: Vec<S> = usable.iter().map(|&t| S::from_f64(t)).collect();
    for p in &probes {
        let pw = g.point(w.combine(p)).expect("ambient length");
        let mut row = Vec::with_capacity(usable.len());
        for t in &scales_s {
            let moved = g.mul(&base, &g.dilate(t, &pw));
            let inc = g.mul(&f_base_inv, &f.eval(&moved)?);
            row.push(g.dilate(&(S::one() / t.clone()), &inc));
        }
        quotients.push(row);
    }

    // Extrapolated limits E_i for i >= 2.
    let extrap: Vec<Vec<Vec<S>>> = quotients
        .iter()
        .map(|row| {
            (2..row.len())
                .map(|i| {
                    let wts = extrapolation_weights([&scales_s[i - 2], &scales_s[i - 1], &scales_s[i]]);
                    (0..n)
                        .map(|k| {
                            wts[0].clone() * row[i - 2].coords()[k].clone()
                                + wts[1].clone() * row[i - 1].coords()[k].clone()
                                + wts[2].clone() * row[i].coords()[k].clone()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let layer1 = alg.layer_range(1);
    let keep_layer1 = |v: &[S]| -> Vec<S> {
        v.iter().enumerate().map(|(k, x)| if layer1.contains(&k) { x.clone() } else { S::zero() }).collect()
    };

    // Layer-1 images of the first-layer basis from the last extrapolation.
    let mut images: Vec<Option<Vec<S>>> = vec![None; m];
    for (pi, &j) in first.iter().enumerate() {
        images[j] = Some(keep_layer1(extrap[pi].last().expect("at least one extrapolation")));
    }
    // Higher layers by bracket generation.
    let first_images: Vec<Vec<S>> = first.iter().map(|&j| images[j].clone().expect("set above")).collect();
    let mut bracket_defect: f64 = 0.0;
    let mut prev_word_images = first_images.clone();
    let mut layer_offset = first.len();
    for lp in &plan.layers {
        let product_images: Vec<Vec<S>> =
            lp.products.iter().map(|&(i, u)| alg.bracket(&first_images[i], &prev_word_images[u])).collect();
        let words: Vec<Vec<S>> = product_images[..lp.basis_len].to_vec();
        for (c, img) in lp.products_in_words.iter().zip(&product_images) {
            let predicted = lin_comb(c, &words, n);
            let d = predicted.iter().zip(img).map(|(x, y)| (x.clone() - y.clone()).to_f64().abs()).fold(0.0, f64::max);
            bracket_defect = bracket_defect.max(d);
        }
        for (k, c) in lp.basis_in_words.iter().enumerate() {
            images[layer_offset + k] = Some(lin_comb(c, &words, n));
        }
        layer_offset += lp.basis_in_words.len();
        prev_word_images = words;
    }
    let columns: Vec<Vec<Coeff>> = images
        .into_iter()
        .map(|c| c.expect("every basis vector reached").iter().map(Scalar::to_coeff).collect())
        .collect();
    let hom = HomogeneousHom::new(g, w, columns)?;
    if bracket_defect > cfg.tol {
        return Err(CalculusError::NotDifferentiable(format!("bracket generation inconsistent by {bracket_defect:e}")));
    }

    // Residual traces.
    let predicted: Vec<GroupPoint<S>> = probes.iter().map(|p| hom.apply(p)).collect();
    let direction_residuals: Vec<Vec<f64>> = quotients
        .iter()
        .zip(&predicted)
        .map(|(row, h)| {
            let h_inv = g.inv(h);
            row.iter().map(|d| g.hnorm(&g.mul(&h_inv, d))).collect()
        })
        .collect();
    let residuals: Vec<f64> = (0..usable.len())
        .map(|i| direction_residuals.iter().map(|r| r[i]).fold(0.0, f64::max))
        .collect();
    let final_residual = extrap
        .iter()
        .zip(&predicted)
        .map(|(e, h)| {
            let last = g.point(e.last().unwrap().clone()).expect("length");
            g.hnorm(&g.mul(&g.inv(h), &last))
        })
        .fold(0.0, f64::max);
    let cauchy: Vec<f64> = (1..extrap[0].len())
        .map(|i| {
            first
                .iter()
                .enumerate()
                .map(|(pi, _)| {
                    let diff: Vec<S> = keep_layer1(&extrap[pi][i])
                        .into_iter()
                        .zip(keep_layer1(&extrap[pi][i - 1]))
                        .map(|(a, b)| a - b)
                        .collect();
                    g.norm_of(&diff)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let monotone = residuals.windows(2).all(|p| p[1] <= (1.0 + MONOTONE_SLACK) * p[0] + MONOTONE_FLOOR);
    let cauchy_ok = cauchy.len() >= 3 && cauchy[cauchy.len() - 3..].iter().all(|&c| c <= cfg.tol);
    let converged = cauchy_ok && monotone && final_residual <= cfg.tol;
    Ok(DifferentiabilityReport {
        base_point: a0.to_vec(),
        hom,
        arithmetic,
        scales: usable,
        residuals,
        direction_residuals,
        cauchy,
        final_residual,
        bracket_defect,
        monotone,
        converged,
        tol: cfg.tol,
        projection_residual: None,
    })
}

/// Intrinsic differential `d^φφ_{a₀}` through `dΦ_{a₀}[w] = w·d^φφ_{a₀}[w]`.
pub fn intrinsic_diff(
    phi: &GraphFunction,
    a0: &[f64],
    cfg: &DiffConfig,
) -> Result<(IntrinsicLinearMap, DifferentiabilityReport), CalculusError> {
    phi.splitting().require_normal()?;
    if !phi.differentiable_rule() {
        return Err(CalculusError::NotDifferentiableRule);
    }
    let mut report = pansu_diff(phi, a0, cfg)?;
    let residual = projection_residual(&report.hom, phi.splitting());
    report.projection_residual = Some(residual);
    if !report.converged {
        return Err(CalculusError::NotDifferentiable(format!(
            "difference quotients did not converge (final residual {:e}, monotone {})",
            report.final_residual, report.monotone
        )));
    }
    if residual > cfg.tol {
        return Err(CalculusError::NotDifferentiable(format!("π_W∘dΦ differs from the identity by {residual:e}")));
    }
    let ell = linear_from_hom_tol(&report.hom, phi.splitting_arc().clone(), cfg.tol)?;
    Ok((ell, report))
}

/// `hnorm(ℓ(b)⁻¹·φ_{p₀}(b)) / hnorm(b)` for `b = δ_t(first-layer basis)`,
/// with `p₀ = φ(a₀)⁻¹·a₀⁻¹`; the quotient of the intrinsic
/// differentiability definition. Returns `(t, max quotient)` per scale.
pub fn intrinsic_quotient_trace(
    phi: &GraphFunction,
    a0: &[f64],
    ell: &IntrinsicLinearMap,
    ladder: &[f64],
) -> Result<Vec<(f64, f64)>, CalculusError> {
    let s = phi.splitting();
    let g = s.group();
    let a0_exact: Vec<Rational> = a0.iter().map(|&x| Rational::from_f64(x)).collect();
    let a = s.w_point(&a0_exact);
    let p0 = g.inv(&g.mul(&a, &phi.phi(&a)?));
    let translated = phi.translate(&p0)?;
    let m = s.w_dim();
    let first: Vec<usize> = (0..m).filter(|&j| s.w().basis_layer(j) == 1).collect();
    ladder
        .iter()
        .map(|&t| {
            let mut worst: f64 = 0.0;
            for &j in &first {
                let dir: Vec<f64> = (0..m).map(|i| if i == j { t } else { 0.0 }).collect();
                let b = s.w_point(&dir);
                let val = translated.phi(&b)?;
                let lin = ell.ell(&dir);
                worst = worst.max(g.hdist(&lin, &val) / g.hnorm(&b));
            }
            Ok((t, worst))
        })
        .collect()
}

/// Sampled one-sided Hausdorff distances from blow-ups of `graph(φ)` at
/// `a₀` to a candidate tangent subgroup `T`, one per `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupTrace {
    pub lambdas: Vec<f64>,
    pub distances: Vec<f64>,
    pub samples_in_ball: Vec<usize>,
}

/// Options for [`blowup_tangent_check`].
#[derive(Debug, Clone)]
pub struct BlowupConfig {
    pub radius: f64,
    /// Graph samples per `λ`.
    pub samples: usize,
    /// Grid points per W-axis used to discretize `T`.
    pub grid: usize,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig { radius: 1.0, samples: 400, grid: 2001 }
    }
}

/// For each `λ`, map `graph(φ)` near `a₀` through `p ↦ δ_λ((a₀·φ(a₀))⁻¹·p)`,
/// keep the points in `B̄(e, R)`, and take the largest distance to a grid
/// of `T ∩ B̄(e, R)`, where `T` is spanned by the graded rows `t_basis`
/// (as the image of a homomorphism from its canonical coordinates).
pub fn blowup_tangent_check(
    phi: &GraphFunction,
    a0: &[f64],
    t_basis: &[Vector],
    lambdas: &[f64],
    cfg: &BlowupConfig,
) -> Result<BlowupTrace, CalculusError> {
    let s = phi.splitting();
    let g = s.group();
    let tsub = Subspace::new(g.algebra(), t_basis.to_vec()).map_err(|e| GraphError::Shape(e.to_string()))?;
    let tangent = t_grid(g, &tsub, cfg.radius, cfg.grid);
    let a = s.w_point(a0);
    let center_inv = g.inv(&g.mul(&a, &phi.phi(&a)?));
    let m = s.w_dim();
    let half = g.ball_box(cfg.radius);
    let w_half: Vec<f64> = s.w().pivots().iter().map(|&p| half[p]).collect();
    let mut distances = Vec::new();
    let mut counts = Vec::new();
    for &lambda in lambdas {
        // Graph points above a₀·δ_{1/λ}(v) for v on a W-grid of the ball box.
        let per_axis = ((cfg.samples as f64).powf(1.0 / m as f64).ceil() as usize).max(2);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for v in grid_points(&w_half, per_axis) {
            let vw = s.w_point(&v);
            let wpt = g.mul(&a, &g.dilate(&(1.0 / lambda), &vw));
            if !phi.in_domain(&wpt) {
                continue;
            }
            let p = g.dilate(&lambda, &g.mul(&center_inv, &phi.graph_map(&wpt)?));
            if g.hnorm(&p) > cfg.radius {
                continue;
            }
            count += 1;
            let d = tangent.iter().map(|t| g.hdist(t, &p)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        if count < 10 {
            return Err(CalculusError::TooFewSamples(count));
        }
        distances.push(worst);
        counts.push(count);
    }
    Ok(BlowupTrace { lambdas: lambdas.to_vec(), distances, samples_in_ball: counts })
}

fn grid_points(half: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &h in half {
        let mut next = Vec::with_capacity(out.len() * per_axis);
        for p in &out {
            for i in 0..per_axis {
                let x = -h + 2.0 * h * i as f64 / (per_axis - 1) as f64;
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn t_grid(g: &CarnotGroup, t: &Subspace, radius: f64, per_axis: usize) -> Vec<GroupPoint<f64>> {
    // T is homogeneous; scan its coordinates over the box of the ball.
    let half = g.ball_box(radius);
    let t_half: Vec<f64> = t.pivots().iter().map(|&p| half[p] * 1.5).collect();
    let per_axis = if t.dim() <= 1 { per_axis } else { ((per_axis as f64).powf(1.0 / t.dim() as f64).ceil() as usize).max(50) };
    grid_points(&t_half, per_axis)
        .into_iter()
        .map(|c| g.point(t.combine(&c)).expect("length"))
        .filter(|p| g.hnorm(p) <= radius)
        .collect()
}

/// Convenience: intrinsic differential as an `Arc`-shared graph function on
/// all of `W`.
pub fn differential_graph(ell: &IntrinsicLinearMap) -> GraphFunction {
    ell.to_graph_function(crate::graph::Domain::everywhere(ell.splitting().w_dim()))
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Arc<GraphFunction>>();
}
