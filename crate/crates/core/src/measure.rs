//! Hausdorff-content estimates by greedy coverings with homogeneous balls,
//! curve lengths, Jacobians of homogeneous homomorphisms and the area
//! formula check for intrinsic graphs.
//!
//! Values are convention-relative: `N(δ)·δ^k` with no normalizing
//! constant, so only ratios of estimates made the same way are meaningful.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::Subspace;
use crate::calculus::{intrinsic_diff, Arithmetic, CalculusError, DiffConfig};
use crate::graph::{GraphError, GraphFunction, HomogeneousHom};
use crate::group::{CarnotGroup, GroupPoint};
use crate::scalar::{Coeff, Rational, Scalar};

pub const DEFAULT_DELTAS: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_MIN_DENSITY: f64 = 20.0;
pub const DEFAULT_MC_SAMPLES: usize = 10_000;
/// Relative tolerance when matching image and ball sample densities.
const DENSITY_MATCH: f64 = 0.1;
/// Cap on the refined ball grid used for Jacobian numerators.
const MAX_REFINED_POINTS: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("sample too coarse for δ = {delta}: {density:.1} points per covering ball (need {required})")]
    CoarseSample { delta: f64, density: f64, required: f64 },
    #[error("δ must be positive")]
    BadScale,
    #[error("denominator estimate is consistent with zero")]
    ZeroDenominator,
    #[error("differentiation failed at {failed} of {total} sampled points; first failure: {first}")]
    DifferentiationFailures { failed: usize, total: usize, first: String },
    #[error("classical oracle needs an abelian group")]
    NotAbelian,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("box has {got} sides, W has dimension {expected}")]
    BoxShape { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Covering,
    CurveLength,
    ClassicalOracle,
    /// Ratio of two covering estimates.
    CoveringRatio,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Covering => "covering",
            Method::CurveLength => "curve-length",
            Method::ClassicalOracle => "classical-oracle",
            Method::CoveringRatio => "covering-ratio",
        }
    }
}

/// One row of a covering ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringLevel {
    pub delta: f64,
    pub balls: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub method: Method,
    /// Finest `δ` for coverings, sample count otherwise.
    pub scale: f64,
    pub error: f64,
    pub levels: Vec<CoveringLevel>,
    pub warning: Option<String>,
}

impl MeasureEstimate {
    fn simple(value: f64, method: Method, scale: f64, error: f64) -> Self {
        MeasureEstimate { value, method, scale, error, levels: Vec::new(), warning: None }
    }
}

/// Greedy covering count at one `δ`: points are visited in lexicographic
/// order and each point not within `δ` of an existing center becomes a
/// center. Neighbor search hashes layer-1 coordinates, which bound the
/// distance from below.
pub fn covering_count(g: &CarnotGroup, points: &[GroupPoint<f64>], delta: f64) -> Result<usize, MeasureError> {
    if !(delta > 0.0) {
        return Err(MeasureError::BadScale);
    }
    let mut order: Vec<&GroupPoint<f64>> = points.iter().collect();
    order.sort_by(|a, b| {
        a.coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let l1 = g.algebra().layer_range(1);
    let w1 = g.norm().weights()[0];
    let cell = delta / w1;
    let key = |p: &GroupPoint<f64>| -> Vec<i64> { p.coords()[l1.clone()].iter().map(|x| (x / cell).floor() as i64).collect() };
    // Each center is registered in its cell and all adjacent ones, so a
    // point only inspects its own cell.
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut centers: Vec<GroupPoint<f64>> = Vec::new();
    let offsets = neighbor_offsets(l1.len());
    for p in order {
        let k = key(p);
        let p1 = &p.coords()[l1.clone()];
        let p_inv = g.inv(p);
        let covered = grid.get(&k).is_some_and(|ids| {
            ids.iter().any(|&c| {
                let c1 = &centers[c].coords()[l1.clone()];
                // The layer-1 part of p⁻¹c bounds its norm from below.
                let sq: f64 = p1.iter().zip(c1).map(|(a, b)| (a - b) * (a - b)).sum();
                w1 * sq.sqrt() <= delta && g.hnorm(&g.mul(&p_inv, &centers[c])) <= delta
            })
        });
        if !covered {
            for off in &offsets {
                let nk: Vec<i64> = k.iter().zip(off).map(|(a, b)| a + b).collect();
                grid.entry(nk).or_default().push(centers.len());
            }
            centers.push(p.clone());
        }
    }
    Ok(centers.len())
}

fn neighbor_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

/// `N(δ)·δ^k` for one `δ`, refusing samples with fewer than `min_density`
/// points per covering ball on average. An empty sample has content 0.
pub fn hausdorff_content(
    g: &CarnotGroup,
    points: &[GroupPoint<f64>],
    k: f64,
    delta: f64,
    min_density: f64,
) -> Result<MeasureEstimate, MeasureError> {
    if points.is_empty() {
        return Ok(MeasureEstimate::simple(0.0, Method::Covering, delta, 0.0));
    }
    let level = covering_level(g, points, k, delta, min_density)?;
    Ok(MeasureEstimate {
        value: level.value,
        method: Method::Covering,
        scale: delta,
        error: delta.powf(k),
        levels: vec![level],
        warning: None,
    })
}

fn covering_level(
    g: &CarnotGroup,
    points: &[GroupPoint<f64>],
    k: f64,
    delta: f64,
    min_density: f64,
) -> Result<CoveringLevel, MeasureError> {
    let balls = covering_count(g, points, delta)?;
    let density = points.len() as f64 / balls as f64;
    if density < min_density {
        return Err(MeasureError::CoarseSample { delta, density, required: min_density });
    }
    Ok(CoveringLevel { delta, balls, value: balls as f64 * delta.powf(k) })
}

/// Covering estimates over a decreasing `δ` ladder. With `extrapolate`,
/// the value is the linear Richardson extrapolation
/// `(r·v(δ_f) − v(δ_p)) / (r − 1)`, `r = δ_p/δ_f`, of the two finest
/// levels; otherwise the finest level. The error bar is `max(δ_f^k, |v(δ_f) − v(δ_p)|)`.
pub fn covering_ladder(
    g: &CarnotGroup,
    points: &[GroupPoint<f64>],
    k: f64,
    deltas: &[f64],
    min_density: f64,
    extrapolate: bool,
) -> Result<MeasureEstimate, MeasureError> {
    if points.is_empty() {
        return Ok(MeasureEstimate::simple(0.0, Method::Covering, deltas.last().copied().unwrap_or(0.0), 0.0));
    }
    let levels: Vec<CoveringLevel> =
        deltas.iter().map(|&d| covering_level(g, points, k, d, min_density)).collect::<Result<_, _>>()?;
    let fine = *levels.last().ok_or(MeasureError::BadScale)?;
    let (value, error) = if levels.len() >= 2 {
        let prev = levels[levels.len() - 2];
        let jump = (fine.value - prev.value).abs();
        let r = prev.delta / fine.delta;
        let v = if extrapolate { (r * fine.value - prev.value) / (r - 1.0) } else { fine.value };
        (v, fine.delta.powf(k).max(jump))
    } else {
        (fine.value, fine.delta.powf(k))
    };
    // A non-positive extrapolation means the ladder is far from the asymptotic regime.
    let (value, warning) = if value > 0.0 || fine.value == 0.0 {
        (value, None)
    } else {
        (fine.value, Some("extrapolation was not positive; using the finest level".to_string()))
    };
    Ok(MeasureEstimate { value, method: Method::Covering, scale: fine.delta, error, levels, warning })
}

/// `Σ hdist(p_i, p_{i+1})` along an ordered sample. Steps more than ten
/// times the median step raise a warning (possible unordered input).
pub fn curve_length(g: &CarnotGroup, points: &[GroupPoint<f64>]) -> MeasureEstimate {
    let steps: Vec<f64> = points.windows(2).map(|p| g.hdist(&p[0], &p[1])).collect();
    let value: f64 = steps.iter().sum();
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let warning = sorted.get(sorted.len() / 2).and_then(|&median| {
        let big = steps.iter().filter(|&&s| s > 10.0 * median && median > 0.0).count();
        (big > 0).then(|| format!("{big} steps exceed ten times the median step; input may be unordered"))
    });
    let mut est = MeasureEstimate::simple(value, Method::CurveLength, points.len() as f64, 0.0);
    est.warning = warning;
    est
}

/// Regular grid in W-coordinates over the box of `B(e, r) ∩ W`, keeping
/// the points of the ball. Returns W-coordinates.
pub fn w_ball_grid(g: &CarnotGroup, w: &Subspace, r: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let half = g.ball_box(r);
    let t_half: Vec<f64> = w.pivots().iter().map(|&p| half[p]).collect();
    jittered_grid(&t_half.iter().map(|&h| (-h, h)).collect::<Vec<_>>(), per_axis)
        .into_iter()
        .filter(|t| g.norm_of(&w.combine(t)) <= r)
        .collect()
}

/// Points per axis of a `dim`-dimensional grid with about
/// `budget · 3^(dim−1)` points; greedy coverings in more dimensions need
/// more points per ball.
pub fn per_axis(budget: usize, dim: usize) -> usize {
    let dim = dim.max(1);
    let total = budget as f64 * 3f64.powi(dim as i32 - 1);
    (total.powf(1.0 / dim as f64).round() as usize).max(2)
}

/// Regular grid with `per_axis` points per side (endpoints included).
pub fn box_grid(bounds: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds {
        let mut next = Vec::with_capacity(out.len() * per_axis);
        for p in &out {
            for i in 0..per_axis {
                let mut q = p.clone();
                q.push(lo + (hi - lo) * i as f64 / (per_axis - 1) as f64);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// [`box_grid`] with each point moved uniformly within its cell (clamped to
/// the box), from a fixed seed. Greedy centers on a regular grid snap to
/// multiples of the spacing, which biases counts by up to a grid step per δ.
pub fn jittered_grid(bounds: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let steps: Vec<f64> = bounds.iter().map(|&(lo, hi)| (hi - lo) / (per_axis - 1) as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a17);
    let mut pts = box_grid(bounds, per_axis);
    for p in &mut pts {
        for ((x, &h), &(lo, hi)) in p.iter_mut().zip(&steps).zip(bounds) {
            if h > 0.0 {
                *x = (*x + h * (rng.random::<f64>() - 0.5)).clamp(lo, hi);
            }
        }
    }
    pts
}

/// Options shared by [`jacobian`] and [`area_check`].
#[derive(Debug, Clone)]
pub struct CoveringConfig {
    pub deltas: Vec<f64>,
    pub min_density: f64,
    pub extrapolate: bool,
    /// Grid size for the unit ball of a one-dimensional W in [`jacobian`];
    /// see [`per_axis`] for higher dimensions.
    pub ball_points: usize,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        CoveringConfig {
            deltas: DEFAULT_DELTAS.to_vec(),
            min_density: DEFAULT_MIN_DENSITY,
            extrapolate: true,
            ball_points: 20_000,
        }
    }
}

/// Numerator and denominator estimates of a Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianEstimate {
    pub value: MeasureEstimate,
    pub numerator: MeasureEstimate,
    pub denominator: MeasureEstimate,
}

/// `J(F) = H^k(F(B(e,1))) / H^k(B(e,1))` with both contents estimated on the
/// same W-grid and δ ladder, `k` the homogeneous dimension of `W`.
pub fn jacobian(f: &HomogeneousHom, cfg: &CoveringConfig) -> Result<JacobianEstimate, MeasureError> {
    let g = f.target();
    let w = f.source();
    let k = w.homogeneous_dimension() as f64;
    let grid = w_ball_grid(g, w, 1.0, per_axis(cfg.ball_points, w.dim()));
    let ball: Vec<GroupPoint<f64>> = grid.iter().map(|t| g.point(w.combine(t)).expect("length")).collect();
    let denominator = covering_ladder(g, &ball, k, &cfg.deltas, cfg.min_density, cfg.extrapolate)?;
    jacobian_with_denominator(f, &grid, denominator, cfg)
}

fn jacobian_with_denominator(
    f: &HomogeneousHom,
    grid: &[Vec<f64>],
    denominator: MeasureEstimate,
    cfg: &CoveringConfig,
) -> Result<JacobianEstimate, MeasureError> {
    let g = f.target();
    let w = f.source();
    let k = w.homogeneous_dimension() as f64;
    if denominator.value <= denominator.error {
        return Err(MeasureError::ZeroDenominator);
    }
    let target = finest_density(grid.len(), &denominator);
    let axis = per_axis(cfg.ball_points, w.dim());
    let numerator =
        matched_ladder(g, k, cfg, target, w.dim(), axis, |a| w_ball_grid(g, w, 1.0, a), |t| Ok(f.apply(t)))?;
    let ratio = numerator.value / denominator.value;
    let rel = numerator.error / numerator.value.max(f64::MIN_POSITIVE) + denominator.error / denominator.value;
    let value = MeasureEstimate {
        value: ratio,
        method: Method::CoveringRatio,
        scale: denominator.scale,
        error: if numerator == denominator { 0.0 } else { ratio * rel },
        levels: Vec::new(),
        warning: None,
    };
    Ok(JacobianEstimate { value, numerator, denominator })
}

/// Covering ladder of `map(grid(axis))`, regridding until the image has
/// about `target` samples per ball at the finest δ. Greedy counts depend on
/// that density, so matching it lets the bias cancel in ratios. Images
/// below the density floor are refined first.
#[allow(clippy::too_many_arguments)]
fn matched_ladder(
    g: &CarnotGroup,
    k: f64,
    cfg: &CoveringConfig,
    target: f64,
    dim: usize,
    mut axis: usize,
    grid: impl Fn(usize) -> Vec<Vec<f64>>,
    map: impl Fn(&[f64]) -> Result<GroupPoint<f64>, MeasureError>,
) -> Result<MeasureEstimate, MeasureError> {
    let mut matched = 0;
    loop {
        let pts = grid(axis);
        let image: Vec<GroupPoint<f64>> = pts.iter().map(|t| map(t)).collect::<Result<_, _>>()?;
        let factor = match covering_ladder(g, &image, k, &cfg.deltas, cfg.min_density, cfg.extrapolate) {
            Err(MeasureError::CoarseSample { density, .. }) if pts.len() < MAX_REFINED_POINTS => {
                cfg.min_density / density.max(1e-3) * 1.25
            }
            Ok(est) => {
                let r = target / finest_density(pts.len(), &est);
                if (r - 1.0).abs() <= DENSITY_MATCH || matched == 3 || (r > 1.0 && pts.len() >= MAX_REFINED_POINTS) {
                    return Ok(est);
                }
                matched += 1;
                r
            }
            Err(e) => return Err(e),
        };
        let next = (axis as f64 * factor.powf(1.0 / dim.max(1) as f64)).round() as usize;
        axis = if factor > 1.0 { next.max(axis + 1) } else { next.clamp(2, axis.saturating_sub(1).max(2)) };
    }
}

/// Samples per ball at the finest level of `est`.
fn finest_density(samples: usize, est: &MeasureEstimate) -> f64 {
    let balls = est.levels.iter().min_by(|a, b| a.delta.total_cmp(&b.delta)).map_or(1, |l| l.balls.max(1));
    samples as f64 / balls as f64
}

/// Options for [`area_check`].
#[derive(Debug, Clone)]
pub struct AreaConfig {
    pub covering: CoveringConfig,
    /// Grid size over a one-dimensional `V` for the left-hand side and
    /// `H^k(V)`; see [`per_axis`].
    pub lhs_points: usize,
    /// Monte-Carlo points for the right-hand side.
    pub samples: usize,
    pub seed: u64,
    /// Float arithmetic by default: the Jacobians only need a few digits.
    pub diff: DiffConfig,
    /// Largest tolerated fraction of differentiation failures.
    pub max_failure_rate: f64,
    /// Differentials whose matrices agree after rounding to this step share
    /// one Jacobian estimate; 0 disables rounding.
    pub jacobian_quantum: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig {
            covering: CoveringConfig::default(),
            lhs_points: 200_000,
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            diff: DiffConfig::default().with_arithmetic(Arithmetic::Float),
            max_failure_rate: 0.01,
            jacobian_quantum: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaReport {
    pub k: usize,
    pub lhs: MeasureEstimate,
    pub rhs: f64,
    pub rhs_err: f64,
    /// `H^k(V)` by the same covering estimator.
    pub domain_content: MeasureEstimate,
    pub mean_jacobian: f64,
    pub jacobian_std_err: f64,
    pub samples: usize,
    pub failures: usize,
    pub seed: u64,
    pub rel_discrepancy: f64,
}

/// Both sides of `H^k(Φ(V)) = ∫_V J(dΦ_x) dH^k(x)` for a box `V ⊆ U`.
pub fn area_check(phi: &GraphFunction, v: &[(f64, f64)], cfg: &AreaConfig) -> Result<AreaReport, MeasureError> {
    let s = phi.splitting();
    let g = s.group();
    let m = s.w_dim();
    if v.len() != m {
        return Err(MeasureError::BoxShape { got: v.len(), expected: m });
    }
    let k = s.k();
    let kf = k as f64;
    let cov = &cfg.covering;

    let axis = per_axis(cfg.lhs_points, m);
    let grid = jittered_grid(v, axis);
    let w_points: Vec<GroupPoint<f64>> = grid.iter().map(|t| s.w_point(t)).collect();
    let domain_content = covering_ladder(g, &w_points, kf, &cov.deltas, cov.min_density, cov.extrapolate)?;
    let target = finest_density(grid.len(), &domain_content);
    let lhs = matched_ladder(g, kf, cov, target, m, axis, |a| jittered_grid(v, a), |t| Ok(phi.graph_map(&s.w_point(t))?))?;

    // Unit ball of W, shared by every Jacobian denominator.
    let ball_grid = w_ball_grid(g, s.w(), 1.0, per_axis(cov.ball_points, m));
    let ball: Vec<GroupPoint<f64>> = ball_grid.iter().map(|t| s.w_point(t)).collect();
    let ball_content = covering_ladder(g, &ball, kf, &cov.deltas, cov.min_density, cov.extrapolate)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut values = Vec::with_capacity(cfg.samples);
    let mut failures = 0;
    let mut first_failure = None;
    for _ in 0..cfg.samples {
        let x: Vec<f64> = v.iter().map(|&(lo, hi)| if lo < hi { rng.random_range(lo..hi) } else { lo }).collect();
        match intrinsic_diff(phi, &x, &cfg.diff) {
            Ok((_, report)) => {
                let (key, hom) = quantized(&report.hom, cfg.jacobian_quantum);
                let j = match cache.get(&key) {
                    Some(&j) => j,
                    None => {
                        let est = jacobian_with_denominator(&hom, &ball_grid, ball_content.clone(), cov)?;
                        cache.insert(key, est.value.value);
                        est.value.value
                    }
                };
                values.push(j);
            }
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failures as f64 > cfg.max_failure_rate * cfg.samples as f64 || values.is_empty() {
        return Err(MeasureError::DifferentiationFailures {
            failed: failures,
            total: cfg.samples,
            first: first_failure.unwrap_or_default(),
        });
    }
    let nvals = values.len() as f64;
    let mean = values.iter().sum::<f64>() / nvals;
    let var = values.iter().map(|j| (j - mean).powi(2)).sum::<f64>() / (nvals - 1.0).max(1.0);
    let std_err = (var / nvals).sqrt();
    let rhs = domain_content.value * mean;
    let rhs_err = domain_content.value * std_err
        + mean * domain_content.error
        + domain_content.value * mean * ball_content.error / ball_content.value;
    let rel_discrepancy = (lhs.value - rhs).abs() / lhs.value.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(AreaReport {
        k,
        lhs,
        rhs,
        rhs_err,
        domain_content,
        mean_jacobian: mean,
        jacobian_std_err: std_err,
        samples: cfg.samples,
        failures,
        seed: cfg.seed,
        rel_discrepancy,
    })
}

/// Cache key and representative of a differential rounded to `quantum`.
fn quantized(hom: &HomogeneousHom, quantum: f64) -> (Vec<i64>, HomogeneousHom) {
    let m = hom.matrix_f64();
    if quantum <= 0.0 {
        return (m.iter().flatten().map(|x| x.to_bits() as i64).collect(), hom.clone());
    }
    let key: Vec<i64> = m.iter().flatten().map(|x| (x / quantum).round() as i64).collect();
    let n = hom.target().dim();
    let cols = (0..hom.source().dim())
        .map(|j| {
            (0..n)
                .map(|i| Coeff::new(Rational::from_f64((m[i][j] / quantum).round() * quantum)))
                .collect()
        })
        .collect();
    let rounded = HomogeneousHom::new(hom.target(), hom.source(), cols).unwrap_or_else(|_| hom.clone());
    (key, rounded)
}

/// Euclidean area of the graph of `φ` over the box `V` in an abelian group:
/// composite Gauss–Legendre quadrature of `√det(I + ∇φᵀ∇φ)` with
/// central-difference gradients.
pub fn classical_area_oracle(phi: &GraphFunction, v: &[(f64, f64)]) -> Result<MeasureEstimate, MeasureError> {
    let s = phi.splitting();
    if !s.group().algebra().is_abelian() {
        return Err(MeasureError::NotAbelian);
    }
    let m = s.w_dim();
    if v.len() != m {
        return Err(MeasureError::BoxShape { got: v.len(), expected: m });
    }
    const PANELS: usize = 32;
    const ORDER: usize = 10;
    let (nodes, weights) = gauss_legendre(ORDER);
    let axis: Vec<Vec<(f64, f64)>> = v
        .iter()
        .map(|&(lo, hi)| {
            let h = (hi - lo) / PANELS as f64;
            (0..PANELS)
                .flat_map(|p| {
                    let a = lo + p as f64 * h;
                    nodes.iter().zip(&weights).map(move |(x, w)| (a + (x + 1.0) * h / 2.0, w * h / 2.0))
                })
                .collect()
        })
        .collect();
    let l_of = |t: &[f64]| -> Result<Vec<f64>, MeasureError> {
        let w = s.w_point(t);
        Ok(s.l_coords(&phi.phi_unchecked(&w)?))
    };
    let mut total = 0.0;
    let mut idx = vec![0_usize; m];
    let npts = axis[0].len();
    loop {
        let t: Vec<f64> = (0..m).map(|d| axis[d][idx[d]].0).collect();
        let weight: f64 = (0..m).map(|d| axis[d][idx[d]].1).product();
        let mut jac = DMatrix::<f64>::zeros(s.l_dim(), m);
        for d in 0..m {
            let h = 1e-5 * (1.0 + t[d].abs());
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[d] += h;
            tm[d] -= h;
            let (fp, fm) = (l_of(&tp)?, l_of(&tm)?);
            for r in 0..s.l_dim() {
                jac[(r, d)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let gram = DMatrix::<f64>::identity(m, m) + jac.transpose() * &jac;
        total += weight * gram.determinant().sqrt();
        let mut d = 0;
        loop {
            if d == m {
                return Ok(MeasureEstimate::simple(total, Method::ClassicalOracle, (npts.pow(m as u32)) as f64, 1e-8));
            }
            idx[d] += 1;
            if idx[d] < npts {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `F ∘ δ_λ` for a rational `λ`, as used by the homogeneity checks.
pub fn dilated(f: &HomogeneousHom, lambda: (i64, i64)) -> HomogeneousHom {
    f.precompose_dilation(&Rational::ratio(lambda.0, lambda.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((int - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_sample_has_zero_content() {
        let g = catalog::heisenberg(1);
        assert_eq!(hausdorff_content(&g, &[], 1.0, 0.1, 20.0).unwrap().value, 0.0);
    }

    #[test]
    fn coarse_samples_are_rejected() {
        let g = catalog::euclidean(2);
        let pts: Vec<_> = (0..10).map(|i| g.pt(&[i as f64 * 0.1, 0.0])).collect();
        assert!(matches!(
            hausdorff_content(&g, &pts, 1.0, 0.05, 20.0),
            Err(MeasureError::CoarseSample { .. })
        ));
    }

    #[test]
    fn curve_length_of_a_point_and_a_segment() {
        let g = catalog::heisenberg(1);
        assert_eq!(curve_length(&g, &[g.pt(&[0.3, 0.1, 0.0])]).value, 0.0);
        let seg: Vec<_> = (0..=100).map(|i| g.pt(&[i as f64 / 100.0, 0.0, 0.0])).collect();
        assert!((curve_length(&g, &seg).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covering_count_on_a_line() {
        let g = catalog::euclidean(2);
        let pts: Vec<_> = (0..=1000).map(|i| g.pt(&[i as f64 / 1000.0, 0.0])).collect();
        // Centers at 0, 0.101, 0.202, ...: spacing just above δ.
        assert_eq!(covering_count(&g, &pts, 0.1).unwrap(), 10);
    }
}
