//! Intrinsic graphs `Φ(w) = w·φ(w)` over a splitting, intrinsic
//! translations, Lipschitz estimation and intrinsically linear maps.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::Subspace;
use crate::group::{CarnotGroup, GroupPoint};
use crate::poly::Polynomial;
use crate::scalar::{Coeff, Rational, Scalar};
use crate::splitting::{max_diff, Splitting, SplittingError};

/// Agreement required between the fast and generic translation rules.
pub const TRANSLATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("point {0:?} is outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error(transparent)]
    Splitting(#[from] SplittingError),
    #[error("rule shape: {0}")]
    Shape(String),
    #[error("fast and generic translation rules disagree by {0:e}")]
    TranslationMismatch(f64),
    #[error("all {0} sample pairs are degenerate")]
    DegeneratePairs(usize),
    #[error("not a homogeneous homomorphism: defect {defect:e} ({what})")]
    NotHomomorphism { defect: f64, what: &'static str },
    #[error("π_W∘H differs from the identity on W by {0:e}")]
    ProjectionIdentity(f64),
}

/// Finite union of closed coordinate boxes in W-coordinates, or the left
/// translate `{a : π_W(q⁻¹a) ∈ U}` of another domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Boxes(Vec<Vec<(f64, f64)>>),
    Translated { base: Box<Domain>, q: Vec<Rational> },
}

impl Domain {
    /// Whole of `W`.
    pub fn everywhere(m: usize) -> Self {
        Domain::Boxes(vec![vec![(f64::NEG_INFINITY, f64::INFINITY); m]])
    }

    pub fn single_box(bounds: Vec<(f64, f64)>) -> Self {
        Domain::Boxes(vec![bounds])
    }

    fn contains_coords(&self, t: &[f64], margin: f64) -> bool {
        match self {
            Domain::Boxes(boxes) => boxes.iter().any(|b| {
                b.len() == t.len()
                    && b.iter().zip(t).all(|(&(lo, hi), &x)| x >= lo + margin && x <= hi - margin)
            }),
            Domain::Translated { .. } => unreachable!("handled by GraphFunction"),
        }
    }

    /// Boxes of an untranslated domain.
    pub fn boxes(&self) -> Option<&[Vec<(f64, f64)>]> {
        match self {
            Domain::Boxes(b) => Some(b),
            Domain::Translated { .. } => None,
        }
    }
}

pub type CallableRule = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// How `φ` is evaluated. Rules work on W-coordinates and produce L-points.
#[derive(Clone)]
pub enum Rule {
    /// One polynomial per canonical L-coordinate, in the W-coordinates.
    Polynomial(Vec<Polynomial>),
    /// Nearest-sample lookup; for Lipschitz estimation only.
    SampleTable { points: Vec<Vec<f64>>, values: Vec<Vec<f64>> },
    /// Opaque float callable returning L-coordinates.
    Callable(CallableRule),
    /// `ℓ(w) = w⁻¹·H(w)` for a homogeneous homomorphism `H`.
    Linear(HomogeneousHom),
    /// Intrinsic translate of another function.
    Translated { base: Box<GraphFunction>, q: Vec<Rational>, fast: bool, verify: bool },
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Rule::SampleTable { points, .. } => write!(f, "SampleTable({} samples)", points.len()),
            Rule::Callable(_) => write!(f, "Callable"),
            Rule::Linear(h) => f.debug_tuple("Linear").field(h).finish(),
            Rule::Translated { q, fast, verify, .. } => f
                .debug_struct("Translated")
                .field("q", q)
                .field("fast", fast)
                .field("verify", verify)
                .finish(),
        }
    }
}

/// `φ: U ⊆ W → L` over a splitting.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    splitting: Arc<Splitting>,
    domain: Domain,
    rule: Rule,
}

impl GraphFunction {
    pub fn new(splitting: Arc<Splitting>, domain: Domain, rule: Rule) -> Result<Self, GraphError> {
        let (m, l) = (splitting.w_dim(), splitting.l_dim());
        if let Domain::Boxes(boxes) = &domain {
            if let Some(b) = boxes.iter().find(|b| b.len() != m) {
                return Err(GraphError::Shape(format!("domain box has {} bounds, W has dimension {m}", b.len())));
            }
            if boxes.iter().flatten().any(|(lo, hi)| !(lo <= hi)) {
                return Err(GraphError::Shape("domain box with lo > hi".into()));
            }
        }
        match &rule {
            Rule::Polynomial(ps) => {
                if ps.len() != l {
                    return Err(GraphError::Shape(format!("{} polynomials for an L of dimension {l}", ps.len())));
                }
                if ps.iter().any(|p| p.nvars() != m) {
                    return Err(GraphError::Shape(format!("polynomials must use {m} W-variables")));
                }
            }
            Rule::SampleTable { points, values } => {
                if points.is_empty()
                    || points.len() != values.len()
                    || points.iter().any(|p| p.len() != m)
                    || values.iter().any(|v| v.len() != l)
                {
                    return Err(GraphError::Shape("sample table dimensions".into()));
                }
            }
            Rule::Linear(h) => {
                if h.source() != splitting.w() || h.target().id() != splitting.group().id() {
                    return Err(GraphError::Shape("homomorphism does not map W into G".into()));
                }
            }
            Rule::Callable(_) | Rule::Translated { .. } => {}
        }
        Ok(GraphFunction { splitting, domain, rule })
    }

    pub fn polynomial(splitting: Arc<Splitting>, domain: Domain, polys: Vec<Polynomial>) -> Result<Self, GraphError> {
        Self::new(splitting, domain, Rule::Polynomial(polys))
    }

    /// Constant `φ ≡ value`; `value` must lie in `L`.
    pub fn constant(splitting: Arc<Splitting>, domain: Domain, value: &GroupPoint<Rational>) -> Result<Self, GraphError> {
        if !splitting.contains_l(value) {
            return Err(GraphError::Shape("constant value is not in L".into()));
        }
        let m = splitting.w_dim();
        let polys = splitting.l_coords(value).into_iter().map(|c| Polynomial::constant(m, c)).collect();
        Self::polynomial(splitting, domain, polys)
    }

    /// `φ ≡ e`.
    pub fn zero(splitting: Arc<Splitting>, domain: Domain) -> Self {
        let (m, l) = (splitting.w_dim(), splitting.l_dim());
        Self::polynomial(splitting, domain, vec![Polynomial::zero(m); l]).expect("shapes match")
    }

    pub fn callable(
        splitting: Arc<Splitting>,
        domain: Domain,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(splitting, domain, Rule::Callable(Arc::new(f))).expect("callable rules need no checks")
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn splitting_arc(&self) -> &Arc<Splitting> {
        &self.splitting
    }

    pub fn group(&self) -> &CarnotGroup {
        self.splitting.group()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Whether evaluation is exact in rational arithmetic.
    pub fn supports_exact(&self) -> bool {
        match &self.rule {
            Rule::Polynomial(_) | Rule::Linear(_) => true,
            Rule::SampleTable { .. } | Rule::Callable(_) => false,
            Rule::Translated { base, .. } => base.supports_exact(),
        }
    }

    /// Whether the rule may be differentiated (sample tables may not).
    pub fn differentiable_rule(&self) -> bool {
        match &self.rule {
            Rule::SampleTable { .. } => false,
            Rule::Translated { base, .. } => base.differentiable_rule(),
            _ => true,
        }
    }

    /// Domain membership of a W-point.
    pub fn in_domain<S: Scalar>(&self, w: &GroupPoint<S>) -> bool {
        self.in_domain_margin(w, 0.0)
    }

    /// Membership at least `margin` inside the box faces (W-coordinates).
    pub fn in_domain_margin<S: Scalar>(&self, w: &GroupPoint<S>, margin: f64) -> bool {
        domain_contains(&self.splitting, &self.domain, w, margin)
    }

    pub fn contains_w_coords(&self, t: &[f64]) -> bool {
        self.in_domain(&self.splitting.w_point(t))
    }

    /// `φ(w)` for `w ∈ U`.
    pub fn phi<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
        if !self.in_domain(w) {
            return Err(GraphError::OutsideDomain(w.to_f64().into_coords()));
        }
        self.phi_unchecked(w)
    }

    /// `φ(w)` ignoring the domain, for rules defined on all of `W`.
    pub fn phi_unchecked<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
        let s = &*self.splitting;
        let t = s.w_coords(w);
        match &self.rule {
            Rule::Polynomial(ps) => {
                let l: Vec<S> = ps.iter().map(|p| p.eval(&t)).collect();
                Ok(s.l_point(&l))
            }
            Rule::Callable(f) => {
                let tf: Vec<f64> = t.iter().map(Scalar::to_f64).collect();
                let l = f(&tf);
                if l.len() != s.l_dim() {
                    return Err(GraphError::Shape(format!("callable returned {} L-coordinates", l.len())));
                }
                Ok(s.l_point(&l.into_iter().map(S::from_f64).collect::<Vec<_>>()))
            }
            Rule::SampleTable { points, values } => {
                let tf: Vec<f64> = t.iter().map(Scalar::to_f64).collect();
                let nearest = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, p.iter().zip(&tf).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
                    .expect("nonempty table");
                Ok(s.l_point(&values[nearest].iter().map(|&x| S::from_f64(x)).collect::<Vec<_>>()))
            }
            Rule::Linear(h) => {
                let g = s.group();
                Ok(g.mul(&g.inv(w), &h.apply(&t)))
            }
            Rule::Translated { base, q, fast, verify } => {
                let q: GroupPoint<S> = exact_point(s.group(), q);
                let primary = if *fast { fast_translated(base, &q, w)? } else { generic_translated(base, &q, w)? };
                if *verify {
                    let other = if *fast { generic_translated(base, &q, w)? } else { fast_translated(base, &q, w)? };
                    let d = max_diff(&primary, &other) / (1.0 + crate::scalar::max_abs(primary.coords()));
                    if d > TRANSLATION_TOL {
                        return Err(GraphError::TranslationMismatch(d));
                    }
                }
                Ok(primary)
            }
        }
    }

    /// `Φ(w) = w·φ(w)`.
    pub fn graph_map<S: Scalar>(&self, w: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
        let p = self.phi(w)?;
        Ok(self.group().mul(w, &p))
    }

    /// `Φ` at W-coordinates `t`.
    pub fn graph_map_at<S: Scalar>(&self, t: &[S]) -> Result<GroupPoint<S>, GraphError> {
        self.graph_map(&self.splitting.w_point(t))
    }

    /// `φ_q` by the closed form for normal `L`:
    /// `φ_q(a) = a⁻¹·q_W·q_L·q_W⁻¹·a·φ(q_W⁻¹·a)` on `U_q = q_W·U`.
    pub fn translate(&self, q: &GroupPoint<Rational>) -> Result<GraphFunction, GraphError> {
        self.translated(q, true, false)
    }

    /// Fast rule, cross-checked at every evaluation against the generic rule.
    pub fn translate_verified(&self, q: &GroupPoint<Rational>) -> Result<GraphFunction, GraphError> {
        self.translated(q, true, true)
    }

    /// `φ_q(a) = π_L(q⁻¹a)⁻¹·φ(π_W(q⁻¹a))` through the projection solver.
    /// Works for any splitting.
    pub fn translate_generic(&self, q: &GroupPoint<Rational>) -> GraphFunction {
        self.translated(q, false, false).expect("generic rule has no preconditions")
    }

    pub fn translate_f64(&self, q: &GroupPoint<f64>) -> Result<GraphFunction, GraphError> {
        self.translate(&q.to_exact())
    }

    fn translated(&self, q: &GroupPoint<Rational>, fast: bool, verify: bool) -> Result<GraphFunction, GraphError> {
        if fast {
            self.splitting.require_normal()?;
        }
        let q = q.coords().to_vec();
        Ok(GraphFunction {
            splitting: self.splitting.clone(),
            domain: Domain::Translated { base: Box::new(self.domain.clone()), q: q.clone() },
            rule: Rule::Translated { base: Box::new(self.clone()), q, fast, verify },
        })
    }

    /// Estimate of the intrinsic Lipschitz constant on the given W-points.
    /// See [`intrinsic_lip_constant`].
    pub fn lip_constant(&self, samples: &[GroupPoint<f64>]) -> Result<LipEstimate, GraphError> {
        intrinsic_lip_constant(self, samples)
    }

    /// `count` seeded uniform W-points from the boxes of the domain, with
    /// unbounded sides clipped to `[-clip, clip]`.
    pub fn sample_domain(&self, count: usize, clip: f64, seed: u64) -> Vec<GroupPoint<f64>> {
        let boxes = match &self.domain {
            Domain::Boxes(b) => b.clone(),
            Domain::Translated { .. } => vec![vec![(-clip, clip); self.splitting.w_dim()]],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut guard = 0_usize;
        while out.len() < count && guard < 1000 * count.max(1) {
            guard += 1;
            let b = &boxes[rng.random_range(0..boxes.len())];
            let t: Vec<f64> = b
                .iter()
                .map(|&(lo, hi)| {
                    let (lo, hi) = (lo.max(-clip), hi.min(clip));
                    if lo >= hi { lo } else { rng.random_range(lo..=hi) }
                })
                .collect();
            let w = self.splitting.w_point(&t);
            if self.in_domain(&w) {
                out.push(w);
            }
        }
        out
    }
}

fn domain_contains<S: Scalar>(s: &Splitting, d: &Domain, w: &GroupPoint<S>, margin: f64) -> bool {
    match d {
        Domain::Boxes(_) => {
            let t: Vec<f64> = s.w_coords(w).iter().map(Scalar::to_f64).collect();
            d.contains_coords(&t, margin)
        }
        Domain::Translated { base, q } => {
            let g = s.group();
            let q: GroupPoint<S> = exact_point(g, q);
            let pre = s.pi_w(&g.mul(&g.inv(&q), w));
            domain_contains(s, base, &pre, margin)
        }
    }
}

pub(crate) fn exact_point<S: Scalar>(g: &CarnotGroup, q: &[Rational]) -> GroupPoint<S> {
    g.point(q.iter().map(|x| S::from_coeff(&Coeff::new(x.clone()))).collect()).expect("stored length")
}

fn fast_translated<S: Scalar>(base: &GraphFunction, q: &GroupPoint<S>, a: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
    let s = base.splitting();
    let g = s.group();
    let (qw, ql) = s.project(q);
    let qw_inv = g.inv(&qw);
    let pre = g.mul(&qw_inv, a);
    let value = base.phi(&pre)?;
    Ok(g.mul_all(&[&g.inv(a), &qw, &ql, &qw_inv, a, &value]))
}

fn generic_translated<S: Scalar>(base: &GraphFunction, q: &GroupPoint<S>, a: &GroupPoint<S>) -> Result<GroupPoint<S>, GraphError> {
    let s = base.splitting();
    let g = s.group();
    let (pw, pl) = s.project(&g.mul(&g.inv(q), a));
    let value = base.phi(&pw)?;
    Ok(g.mul(&g.inv(&pl), &value))
}

/// Result of [`intrinsic_lip_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct LipEstimate {
    pub value: f64,
    pub pairs: usize,
    /// Pairs skipped because `π_W(Φ(w)⁻¹Φ(w′))` vanished.
    pub degenerate: usize,
}

/// `max hnorm(π_L(Φ(w)⁻¹Φ(w′))) / hnorm(π_W(Φ(w)⁻¹Φ(w′)))` over all
/// ordered sample pairs; monotone in the sample set.
pub fn intrinsic_lip_constant(phi: &GraphFunction, samples: &[GroupPoint<f64>]) -> Result<LipEstimate, GraphError> {
    if samples.len() < 2 {
        return Err(GraphError::DegeneratePairs(0));
    }
    let g = phi.group();
    let s = phi.splitting();
    let images: Vec<GroupPoint<f64>> = samples.iter().map(|w| phi.graph_map(w)).collect::<Result<_, _>>()?;
    let mut value: f64 = 0.0;
    let (mut pairs, mut degenerate) = (0, 0);
    for (i, a) in images.iter().enumerate() {
        let a_inv = g.inv(a);
        for (j, b) in images.iter().enumerate() {
            if i == j {
                continue;
            }
            let (pw, pl) = s.project(&g.mul(&a_inv, b));
            let den = g.hnorm(&pw);
            if den == 0.0 {
                degenerate += 1;
                continue;
            }
            pairs += 1;
            value = value.max(g.hnorm(&pl) / den);
        }
    }
    if pairs == 0 {
        return Err(GraphError::DegeneratePairs(degenerate));
    }
    Ok(LipEstimate { value, pairs, degenerate })
}

/// Graded Lie-algebra homomorphism `Lie(W) → Lie(G)`, stored by the images
/// of the canonical W-basis. In exponential coordinates it is also the
/// group homomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousHom {
    target: CarnotGroup,
    source: Subspace,
    columns: Vec<Vec<Coeff>>,
}

impl HomogeneousHom {
    /// `columns[j]` is the image of W-basis vector `j`. Entries outside the
    /// layer of that basis vector must vanish (exactly, or below `1e-9` for
    /// float-derived columns).
    pub fn new(target: &CarnotGroup, source: &Subspace, columns: Vec<Vec<Coeff>>) -> Result<Self, GraphError> {
        let a = target.algebra();
        if columns.len() != source.dim() || columns.iter().any(|c| c.len() != a.dim()) {
            return Err(GraphError::Shape("homomorphism matrix dimensions".into()));
        }
        for (j, col) in columns.iter().enumerate() {
            let layer = source.basis_layer(j);
            let range = a.layer_range(layer);
            let leak = col
                .iter()
                .enumerate()
                .filter(|(k, _)| !range.contains(k))
                .map(|(_, c)| c.approx.abs())
                .fold(0.0, f64::max);
            if leak > 1e-9 {
                return Err(GraphError::NotHomomorphism { defect: leak, what: "not layer-preserving" });
            }
        }
        Ok(HomogeneousHom { target: target.clone(), source: source.clone(), columns })
    }

    /// Inclusion `W ↪ G`.
    pub fn embedding(target: &CarnotGroup, source: &Subspace) -> Self {
        let columns = source.basis().iter().map(|b| b.iter().map(|x| Coeff::new(x.clone())).collect()).collect();
        HomogeneousHom { target: target.clone(), source: source.clone(), columns }
    }

    pub fn target(&self) -> &CarnotGroup {
        &self.target
    }

    pub fn source(&self) -> &Subspace {
        &self.source
    }

    pub fn columns(&self) -> &[Vec<Coeff>] {
        &self.columns
    }

    /// Matrix in `f64`, row-major `n × m`.
    pub fn matrix_f64(&self) -> Vec<Vec<f64>> {
        let n = self.target.dim();
        (0..n).map(|i| self.columns.iter().map(|c| c[i].approx).collect()).collect()
    }

    /// Image of the W-point with canonical coordinates `t`.
    pub fn apply<S: Scalar>(&self, t: &[S]) -> GroupPoint<S> {
        let mut out = vec![S::zero(); self.target.dim()];
        for (tj, col) in t.iter().zip(&self.columns) {
            if tj.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(col) {
                if !c.is_zero() {
                    *o = o.clone() + tj.clone() * S::from_coeff(c);
                }
            }
        }
        self.target.point(out).expect("target dimension")
    }

    /// `F ∘ δ_λ`.
    pub fn precompose_dilation(&self, lambda: &Rational) -> Self {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, col)| {
                let mut f = lambda.clone();
                for _ in 1..self.source.basis_layer(j) {
                    f = &f * lambda;
                }
                col.iter().map(|c| Coeff::new(&c.exact * &f)).collect()
            })
            .collect();
        HomogeneousHom { target: self.target.clone(), source: self.source.clone(), columns }
    }

    /// Largest coordinate of `H([b_i, b_j]) − [H b_i, H b_j]` over basis pairs.
    pub fn bracket_defect(&self) -> f64 {
        let a = self.target.algebra();
        let m = self.source.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let inner = a.bracket(&self.source.basis()[i], &self.source.basis()[j]);
                let lhs: GroupPoint<Rational> = self.apply(&self.source.coordinates_of(&inner));
                let hi: Vec<f64> = self.columns[i].iter().map(|c| c.approx).collect();
                let hj: Vec<f64> = self.columns[j].iter().map(|c| c.approx).collect();
                let rhs = a.bracket(&hi, &hj);
                for (x, y) in lhs.coords().iter().zip(&rhs) {
                    worst = worst.max((Scalar::to_f64(x) - y).abs());
                }
            }
        }
        worst
    }
}

/// Intrinsically linear `ℓ: W → L`, carried by `H(w) = w·ℓ(w)`.
#[derive(Debug, Clone)]
pub struct IntrinsicLinearMap {
    hom: HomogeneousHom,
    splitting: Arc<Splitting>,
}

impl IntrinsicLinearMap {
    pub fn hom(&self) -> &HomogeneousHom {
        &self.hom
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    /// `ℓ(w) = w⁻¹·H(w)` at W-coordinates `t`.
    pub fn ell<S: Scalar>(&self, t: &[S]) -> GroupPoint<S> {
        let g = self.splitting.group();
        let w = self.splitting.w_point(t);
        g.mul(&g.inv(&w), &self.hom.apply(t))
    }

    /// `ℓ` as a graph function on `domain`.
    pub fn to_graph_function(&self, domain: Domain) -> GraphFunction {
        GraphFunction::new(self.splitting.clone(), domain, Rule::Linear(self.hom.clone())).expect("hom maps W into G")
    }

    /// Whether `graph(ℓ)` is closed under products and dilations on `count`
    /// seeded samples, to `tol` relative.
    pub fn graph_is_subgroup(&self, count: usize, seed: u64, tol: f64) -> bool {
        let g = self.splitting.group();
        let m = self.splitting.w_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).all(|_| {
            let a: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lambda: f64 = rng.random_range(0.1..3.0);
            let prod = g.mul(&self.hom.apply(&a), &self.hom.apply(&b));
            let dil = g.dilate(&lambda, &self.hom.apply(&a));
            self.on_graph(&prod, tol) && self.on_graph(&dil, tol)
        })
    }

    fn on_graph(&self, p: &GroupPoint<f64>, tol: f64) -> bool {
        let s = &*self.splitting;
        let (pw, _) = s.project(p);
        let back = self.hom.apply(&s.w_coords(&pw));
        max_diff(&back, p) <= tol * (1.0 + crate::scalar::max_abs(p.coords()))
    }
}

/// `H(w) = w·ℓ(w)` for a map `ℓ` that should be intrinsically linear.
/// The candidate is read off the basis images and then checked to be
/// linear in exponential coordinates, a homomorphism and dilation
/// equivariant on basis pairs and seeded samples; exact when the rule is.
pub fn hom_from_linear(ell: &GraphFunction) -> Result<HomogeneousHom, GraphError> {
    if ell.supports_exact() {
        hom_from_linear_in::<Rational>(ell, 0.0)
    } else {
        hom_from_linear_in::<f64>(ell, 1e-9)
    }
}

fn hom_from_linear_in<S: Scalar>(ell: &GraphFunction, tol: f64) -> Result<HomogeneousHom, GraphError> {
    let s = ell.splitting();
    let g = s.group();
    let m = s.w_dim();
    let graph = |t: &[S]| -> Result<GroupPoint<S>, GraphError> {
        let w = s.w_point(t);
        Ok(g.mul(&w, &ell.phi_unchecked(&w)?))
    };
    let unit = |j: usize| -> Vec<S> { (0..m).map(|i| if i == j { S::one() } else { S::zero() }).collect() };
    let columns: Vec<Vec<Coeff>> = (0..m)
        .map(|j| graph(&unit(j)).map(|p| p.coords().iter().map(Scalar::to_coeff).collect()))
        .collect::<Result<_, _>>()?;
    let hom = HomogeneousHom::new(g, s.w(), columns)?;
    let defect_of = |a: &GroupPoint<S>, b: &GroupPoint<S>| max_diff(a, b) / (1.0 + crate::scalar::max_abs(b.coords()));
    let check = |defect: f64, what: &'static str| {
        if defect > tol {
            Err(GraphError::NotHomomorphism { defect, what })
        } else {
            Ok(())
        }
    };
    // Sample points with small denominators keep the exact path cheap.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c69_6e65);
    let mut points: Vec<Vec<S>> = (0..m).map(unit).collect();
    for _ in 0..6 {
        points.push((0..m).map(|_| S::ratio(rng.random_range(-8..=8), 4)).collect());
    }
    for t in &points {
        check(defect_of(&graph(t)?, &hom.apply(t)), "not linear in exponential coordinates")?;
        let two = S::ratio(2, 1);
        let lhs = graph(&s.w_coords(&g.dilate(&two, &s.w_point(t))))?;
        check(defect_of(&lhs, &g.dilate(&two, &hom.apply(t))), "does not commute with dilations")?;
    }
    for a in &points {
        for b in &points {
            let ab = s.w_coords(&g.mul(&s.w_point(a), &s.w_point(b)));
            let lhs = g.mul(&graph(a)?, &graph(b)?);
            check(defect_of(&lhs, &graph(&ab)?), "H(a)·H(b) ≠ H(a·b)")?;
        }
    }
    Ok(hom)
}

/// Inverse of [`hom_from_linear`]: requires `π_W∘H = id` on `W`.
pub fn linear_from_hom(hom: &HomogeneousHom, splitting: Arc<Splitting>) -> Result<IntrinsicLinearMap, GraphError> {
    linear_from_hom_tol(hom, splitting, 1e-9)
}

/// [`linear_from_hom`] with a caller-chosen tolerance, for estimated
/// homomorphisms.
pub fn linear_from_hom_tol(
    hom: &HomogeneousHom,
    splitting: Arc<Splitting>,
    tol: f64,
) -> Result<IntrinsicLinearMap, GraphError> {
    if hom.source() != splitting.w() || hom.target().id() != splitting.group().id() {
        return Err(GraphError::Shape("homomorphism does not map W into G".into()));
    }
    let residual = projection_residual(hom, &splitting);
    if residual > tol {
        return Err(GraphError::ProjectionIdentity(residual));
    }
    Ok(IntrinsicLinearMap { hom: hom.clone(), splitting })
}

/// `max_j hnorm(π_W(H b_j)⁻¹·b_j)` over the canonical W-basis, plus the same
/// at a few combined directions.
pub fn projection_residual(hom: &HomogeneousHom, s: &Splitting) -> f64 {
    let g = s.group();
    let m = s.w_dim();
    let mut probes: Vec<Vec<f64>> =
        (0..m).map(|j| (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    probes.push(vec![1.0; m]);
    probes.push((0..m).map(|i| if i % 2 == 0 { -0.5 } else { 0.75 }).collect());
    probes
        .iter()
        .map(|t| {
            let w = s.w_point(t);
            let pw = s.pi_w(&hom.apply(t));
            g.hnorm(&g.mul(&g.inv(&pw), &w))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn h1_split() -> Arc<Splitting> {
        Arc::new(Splitting::coordinate(&catalog::heisenberg(1), &[1], &[2, 3]).unwrap())
    }

    fn r2_split() -> Arc<Splitting> {
        Arc::new(Splitting::coordinate(&catalog::euclidean(2), &[1], &[2]).unwrap())
    }

    fn poly1(split: &Arc<Splitting>, exprs: &[&str]) -> GraphFunction {
        let m = split.w_dim();
        let ps = exprs.iter().map(|e| Polynomial::parse(e, 'w', m).unwrap()).collect();
        GraphFunction::polynomial(split.clone(), Domain::everywhere(m), ps).unwrap()
    }

    #[test]
    fn euclidean_graph() {
        let s = r2_split();
        let phi = poly1(&s, &["w1^2"]);
        assert_eq!(phi.graph_map_at(&[3.0]).unwrap().coords(), &[3.0, 9.0]);
        let zero = GraphFunction::zero(s.clone(), Domain::everywhere(1));
        assert_eq!(zero.graph_map_at(&[q(2, 3)]).unwrap().coords(), &[q(2, 3), q(0, 1)]);
    }

    #[test]
    fn domain_is_enforced() {
        let s = r2_split();
        let phi = GraphFunction::polynomial(
            s.clone(),
            Domain::Boxes(vec![vec![(0.0, 1.0)], vec![(2.0, 3.0)]]),
            vec![Polynomial::parse("w1", 'w', 1).unwrap()],
        )
        .unwrap();
        assert!(phi.graph_map_at(&[0.5]).is_ok());
        assert!(phi.graph_map_at(&[2.5]).is_ok());
        assert!(matches!(phi.graph_map_at(&[1.5]), Err(GraphError::OutsideDomain(_))));
    }

    #[test]
    fn abelian_translation_is_shift() {
        let s = r2_split();
        let phi = poly1(&s, &["w1^2"]);
        let qp = s.group().point(vec![q(1, 2), q(-3, 4)]).unwrap();
        let t = phi.translate(&qp).unwrap();
        // φ_q(a) = q_L + φ(a − q_W)
        let a = q(7, 5);
        let got = t.phi(&s.w_point(&[a.clone()])).unwrap();
        let shifted = &a - q(1, 2);
        assert_eq!(got.coords()[1], q(-3, 4) + &shifted * &shifted);
    }

    #[test]
    fn translation_by_identity_is_noop() {
        let s = h1_split();
        let phi = poly1(&s, &["w1^2", "w1 - 1"]);
        let t = phi.translate_verified(&s.group().identity()).unwrap();
        for x in [-1.0, 0.25, 2.0] {
            let w = s.w_point(&[x]);
            assert!(t.phi(&w).unwrap().max_abs_diff(&phi.phi(&w).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn lip_constant_examples() {
        let s = r2_split();
        let m = q(-5, 2);
        let phi = GraphFunction::polynomial(s.clone(), Domain::everywhere(1), vec![Polynomial::linear(&[m])]).unwrap();
        let samples: Vec<_> = (0..7).map(|i| s.w_point(&[i as f64 * 0.3 - 1.0])).collect();
        let est = phi.lip_constant(&samples).unwrap();
        assert!((est.value - 2.5).abs() < 1e-12);
        let zero = GraphFunction::zero(s.clone(), Domain::everywhere(1));
        assert_eq!(zero.lip_constant(&samples).unwrap().value, 0.0);
        let same = vec![s.w_point(&[0.5]), s.w_point(&[0.5])];
        assert_eq!(zero.lip_constant(&same), Err(GraphError::DegeneratePairs(2)));
    }

    #[test]
    fn abelian_linear_round_trip() {
        let s = r2_split();
        let phi = poly1(&s, &["3*w1"]);
        let h = hom_from_linear(&phi).unwrap();
        assert_eq!(h.apply(&[q(2, 1)]).coords(), &[q(2, 1), q(6, 1)]);
        let ell = linear_from_hom(&h, s.clone()).unwrap();
        assert_eq!(ell.ell(&[q(2, 1)]).coords(), &[q(0, 1), q(6, 1)]);
    }

    #[test]
    fn zero_map_gives_embedding() {
        let s = h1_split();
        let phi = GraphFunction::zero(s.clone(), Domain::everywhere(1));
        let h = hom_from_linear(&phi).unwrap();
        assert_eq!(h, HomogeneousHom::embedding(s.group(), s.w()));
    }

    #[test]
    fn heisenberg_linear_maps() {
        let s = h1_split();
        // Graph {(x, cx, 0)}: ℓ(x) = (0, cx, −cx²/2).
        let good = poly1(&s, &["2*w1", "-w1^2"]);
        let h = hom_from_linear(&good).unwrap();
        assert_eq!(h.apply(&[q(1, 1)]).coords(), &[q(1, 1), q(2, 1), q(0, 1)]);
        let ell = linear_from_hom(&h, s.clone()).unwrap();
        assert!(ell.graph_is_subgroup(50, 1, 1e-12));
        // ℓ(x) = (0, cx, 0) has the graph map (x, cx, cx²/2), which is not a homomorphism.
        let bad = poly1(&s, &["2*w1", "0"]);
        assert!(matches!(hom_from_linear(&bad), Err(GraphError::NotHomomorphism { .. })));
    }

    #[test]
    fn projection_identity_is_required() {
        let s = h1_split();
        let g = s.group();
        let cols = vec![vec![Coeff::from_int(0), Coeff::from_int(1), Coeff::from_int(0)]];
        let h = HomogeneousHom::new(g, s.w(), cols).unwrap();
        assert!(matches!(linear_from_hom(&h, s.clone()), Err(GraphError::ProjectionIdentity(_))));
        let leaky = vec![vec![Coeff::from_int(1), Coeff::from_int(0), Coeff::from_int(1)]];
        assert!(HomogeneousHom::new(g, s.w(), leaky).is_err());
    }

    #[test]
    fn translate_needs_normal_l() {
        let g = catalog::heisenberg(2);
        let a = g.algebra();
        let split = Arc::new(
            Splitting::complementary(
                &g,
                Subspace::coordinate(a, &[2, 3, 4, 5]).unwrap(),
                Subspace::coordinate(a, &[1]).unwrap(),
            )
            .unwrap(),
        );
        let phi = GraphFunction::zero(split, Domain::everywhere(4));
        assert!(matches!(
            phi.translate(&g.identity()),
            Err(GraphError::Splitting(SplittingError::NotNormal))
        ));
        let _generic = phi.translate_generic(&g.identity());
    }
}
