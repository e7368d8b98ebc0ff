//! Stratified Lie algebras given by structure constants on a graded basis
//! `X_1, …, X_n` (ordered by layer), and exact subspace tests on them.
//!
//! Basis indices in the public API and in diagnostics are 1-based, matching
//! the `X_i` naming; internal storage is 0-based.

use std::fmt;
use std::ops::Range;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, Vector};
use crate::scalar::{format_rational, Coeff, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("structure constant array is not {n}x{n}x{n}")]
    Shape { n: usize },
    #[error("layer dimensions sum to {sum} but the algebra has dimension {n}")]
    DimensionMismatch { sum: usize, n: usize },
    #[error("bracket index out of range: X_{0} (dimension {1})")]
    IndexOutOfRange(usize, usize),
    #[error("conflicting values for bracket [X_{i}, X_{j}] component X_{k}")]
    ConflictingBracket { i: usize, j: usize, k: usize },
    #[error("algebra `{name}` fails validation: {report}")]
    Invalid { name: String, report: ValidationReport },
    #[error("vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("subspace basis vectors are linearly dependent")]
    DependentBasis,
    #[error("{0} is not a graded subalgebra")]
    NotGradedSubalgebra(&'static str),
    #[error("subspaces are not complementary: {0}")]
    NotComplementary(String),
    #[error("L is not an ideal: [X_{generator}, {vector}] leaves L")]
    NotIdeal { generator: usize, vector: String },
}

/// One failed axiom, with 1-based witness indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyLayer { layer: usize },
    Antisymmetry { i: usize, j: usize, k: usize },
    Jacobi { i: usize, j: usize, l: usize, k: usize },
    Grading { i: usize, j: usize, k: usize },
    Stratification { layer: usize, expected: usize, generated: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyLayer { layer } => write!(f, "layer {layer} is empty"),
            Violation::Antisymmetry { i, j, k } => {
                write!(f, "antisymmetry fails at ({i},{j},{k})")
            }
            Violation::Jacobi { i, j, l, k } => {
                write!(f, "Jacobi identity fails on (X_{i},X_{j},X_{l}) in component X_{k}")
            }
            Violation::Grading { i, j, k } => {
                write!(f, "grading fails: [X_{i},X_{j}] has a component on X_{k}")
            }
            Violation::Stratification { layer, expected, generated } => write!(
                f,
                "stratification fails: [V_1, V_{}] spans dimension {generated}, layer {layer} has dimension {expected}",
                layer - 1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone)]
struct BracketTerm {
    i: usize,
    j: usize,
    k: usize,
    c: Coeff,
}

/// A graded Lie algebra in a fixed basis, described by `[X_i, X_j] = Σ_k c[i][j][k] X_k`.
///
/// Construction through [`StratifiedAlgebra::from_raw`] does not check the
/// axioms; call [`validate_algebra`] or use [`StratifiedAlgebra::new`].
#[derive(Debug, Clone)]
pub struct StratifiedAlgebra {
    name: String,
    n: usize,
    layer_dims: Vec<usize>,
    constants: Vec<Rational>,
    terms: Vec<BracketTerm>,
    layer_of: Vec<usize>,
}

impl StratifiedAlgebra {
    /// Wrap a dense `n×n×n` constant array without checking any axiom.
    pub fn from_raw(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        constants: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self, AlgebraError> {
        let n = constants.len();
        if constants.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return Err(AlgebraError::Shape { n });
        }
        let flat: Vec<Rational> = constants.into_iter().flatten().flatten().collect();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = &flat[(i * n + j) * n + k];
                    if !c.is_zero() {
                        terms.push(BracketTerm { i, j, k, c: Coeff::new(c.clone()) });
                    }
                }
            }
        }
        let mut layer_of = Vec::with_capacity(n);
        for (a, &d) in layer_dims.iter().enumerate() {
            layer_of.extend(std::iter::repeat_n(a + 1, d));
        }
        // Only meaningful when the dimensions agree; validation reports otherwise.
        layer_of.resize(n, layer_dims.len() + 1);
        Ok(StratifiedAlgebra { name: name.into(), n, layer_dims, constants: flat, terms, layer_of })
    }

    /// Build from 1-based entries `(i, j, k, c)` meaning `c[i][j][k] = c`,
    /// filling in `c[j][i][k] = -c`, then validate.
    pub fn from_brackets(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        entries: &[(usize, usize, usize, Rational)],
    ) -> Result<Self, AlgebraError> {
        let n: usize = layer_dims.iter().sum();
        let mut c = vec![vec![vec![None::<Rational>; n]; n]; n];
        for (i, j, k, v) in entries {
            for &idx in [i, j, k] {
                if idx == 0 || idx > n {
                    return Err(AlgebraError::IndexOutOfRange(idx, n));
                }
            }
            let (i0, j0, k0) = (i - 1, j - 1, k - 1);
            let conflict = |slot: &Option<Rational>, want: &Rational| {
                slot.as_ref().is_some_and(|old| old != want)
            };
            let neg = -v.clone();
            if conflict(&c[i0][j0][k0], v) || conflict(&c[j0][i0][k0], &neg) {
                return Err(AlgebraError::ConflictingBracket { i: *i, j: *j, k: *k });
            }
            c[i0][j0][k0] = Some(v.clone());
            c[j0][i0][k0] = Some(neg);
        }
        let dense = c
            .into_iter()
            .map(|m| m.into_iter().map(|r| r.into_iter().map(Option::unwrap_or_default).collect()).collect())
            .collect();
        StratifiedAlgebra::new(name, layer_dims, dense)
    }

    /// Construct and validate; any failed axiom is an error.
    pub fn new(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        constants: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self, AlgebraError> {
        let a = Self::from_raw(name, layer_dims, constants)?;
        let report = validate_algebra(&a)?;
        if report.is_valid() {
            Ok(a)
        } else {
            Err(AlgebraError::Invalid { name: a.name.clone(), report })
        }
    }

    /// The abelian algebra `ℝⁿ` with a single layer.
    pub fn abelian(n: usize) -> Self {
        Self::from_raw(format!("R{n}"), vec![n], vec![vec![vec![Rational::zero(); n]; n]; n])
            .expect("well-formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// 1-based layer of the 0-based basis index `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    /// 0-based index range of layer `a` (1-based).
    pub fn layer_range(&self, a: usize) -> Range<usize> {
        let start: usize = self.layer_dims[..a - 1].iter().sum();
        start..start + self.layer_dims[a - 1]
    }

    /// `Q = Σ a · dim V_a`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_dims.iter().enumerate().map(|(a, d)| (a + 1) * d).sum()
    }

    /// `c[i][j][k]`, 0-based.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.constants[(i * self.n + j) * self.n + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero structure constants as 1-based `(i, j, k, c)` with `i < j`.
    pub fn bracket_entries(&self) -> Vec<(usize, usize, usize, Rational)> {
        self.terms
            .iter()
            .filter(|t| t.i < t.j)
            .map(|t| (t.i + 1, t.j + 1, t.k + 1, t.c.exact.clone()))
            .collect()
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n, "bracket operand length");
        assert_eq!(y.len(), self.n, "bracket operand length");
        let mut out = vec![S::zero(); self.n];
        for t in &self.terms {
            if x[t.i].is_zero() || y[t.j].is_zero() {
                continue;
            }
            let v = S::from_coeff(&t.c) * x[t.i].clone() * y[t.j].clone();
            out[t.k] = out[t.k].clone() + v;
        }
        out
    }

    /// Length-checked [`bracket`](Self::bracket).
    pub fn try_bracket<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<Vec<S>, AlgebraError> {
        for v in [x, y] {
            if v.len() != self.n {
                return Err(AlgebraError::Length { got: v.len(), expected: self.n });
            }
        }
        Ok(self.bracket(x, y))
    }

    /// `X_i` as an exact coordinate vector (0-based `i`).
    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.n];
        v[i] = Rational::one();
        v
    }

    /// Render as a group-definition file.
    pub fn to_group_file(&self) -> String {
        let dims: Vec<String> = self.layer_dims.iter().map(ToString::to_string).collect();
        let mut out = format!("name = {}\nlayer_dims = {}\n", self.name, dims.join(" "));
        for (i, j, k, c) in self.bracket_entries() {
            out.push_str(&format!("brackets = {i} {j} {k} {}\n", format_rational(&c)));
        }
        out
    }
}

/// Check antisymmetry, Jacobi, grading and stratification exactly.
pub fn validate_algebra(a: &StratifiedAlgebra) -> Result<ValidationReport, AlgebraError> {
    let n = a.n;
    let sum: usize = a.layer_dims.iter().sum();
    if sum != n {
        return Err(AlgebraError::DimensionMismatch { sum, n });
    }
    let mut violations = Vec::new();
    for (idx, &d) in a.layer_dims.iter().enumerate() {
        if d == 0 {
            violations.push(Violation::EmptyLayer { layer: idx + 1 });
        }
    }
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                if *a.constant(i, j, k) != -a.constant(j, i, k).clone() {
                    violations.push(Violation::Antisymmetry { i: i + 1, j: j + 1, k: k + 1 });
                }
            }
        }
    }
    let basis: Vec<Vector> = (0..n).map(|i| a.basis_vector(i)).collect();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let t1 = a.bracket(&basis[i], &a.bracket(&basis[j], &basis[l]));
                let t2 = a.bracket(&basis[j], &a.bracket(&basis[l], &basis[i]));
                let t3 = a.bracket(&basis[l], &a.bracket(&basis[i], &basis[j]));
                if let Some(k) = (0..n).find(|&k| !(t1[k].clone() + t2[k].clone() + t3[k].clone()).is_zero()) {
                    violations.push(Violation::Jacobi { i: i + 1, j: j + 1, l: l + 1, k: k + 1 });
                }
            }
        }
    }
    for t in &a.terms {
        let target = a.layer_of(t.i) + a.layer_of(t.j);
        if a.layer_of(t.k) != target {
            violations.push(Violation::Grading { i: t.i + 1, j: t.j + 1, k: t.k + 1 });
        }
    }
    for layer in 2..=a.step() {
        let mut gens = Vec::new();
        for i in a.layer_range(1) {
            for j in a.layer_range(layer - 1) {
                gens.push(a.bracket(&basis[i], &basis[j]));
            }
        }
        // Restrict to layer `layer` so grading defects are not double counted.
        let range = a.layer_range(layer);
        let restricted: Vec<Vector> = gens.iter().map(|g| g[range.clone()].to_vec()).collect();
        let generated = linalg::rank(&restricted);
        let expected = a.layer_dims[layer - 1];
        if generated != expected {
            violations.push(Violation::Stratification { layer, expected, generated });
        }
    }
    Ok(ValidationReport { violations })
}

/// A linear subspace of the algebra with canonical (reduced row-echelon)
/// basis, plus its intersections with each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    n: usize,
    basis: Vec<Vector>,
    basis_coeffs: Vec<Vec<Coeff>>,
    pivots: Vec<usize>,
    layer_bases: Vec<Vec<Vector>>,
    homogeneous: bool,
}

impl Subspace {
    /// Span of independent `rows`. For homogeneous subspaces the canonical
    /// basis is the concatenation of per-layer echelon bases, so basis vector
    /// `i` has a 1 at coordinate `pivots()[i]` and zeros at the other pivots.
    pub fn new(a: &StratifiedAlgebra, rows: Vec<Vector>) -> Result<Self, AlgebraError> {
        let n = a.dim();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(AlgebraError::Length { got: r.len(), expected: n });
        }
        let (red, pivots) = linalg::rref(&rows);
        if red.len() != rows.len() {
            return Err(AlgebraError::DependentBasis);
        }
        let layer_bases: Vec<Vec<Vector>> =
            (1..=a.step()).map(|layer| intersect_layer(a, &red, layer)).collect();
        let homogeneous = layer_bases.iter().map(Vec::len).sum::<usize>() == red.len();
        let (basis, pivots) = if homogeneous {
            let basis: Vec<Vector> = layer_bases.iter().flatten().cloned().collect();
            let pivots = basis
                .iter()
                .map(|v| v.iter().position(|x| !x.is_zero()).expect("nonzero basis vector"))
                .collect();
            (basis, pivots)
        } else {
            (red, pivots)
        };
        let basis_coeffs =
            basis.iter().map(|b| b.iter().map(|x| Coeff::new(x.clone())).collect()).collect();
        Ok(Subspace { n, basis, basis_coeffs, pivots, layer_bases, homogeneous })
    }

    /// Span of the given 1-based basis vectors `X_i`.
    pub fn coordinate(a: &StratifiedAlgebra, indices: &[usize]) -> Result<Self, AlgebraError> {
        let rows = indices
            .iter()
            .map(|&i| {
                if i == 0 || i > a.dim() {
                    Err(AlgebraError::IndexOutOfRange(i, a.dim()))
                } else {
                    Ok(a.basis_vector(i - 1))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Subspace::new(a, rows)
    }

    pub fn whole(a: &StratifiedAlgebra) -> Self {
        Subspace::new(a, (0..a.dim()).map(|i| a.basis_vector(i)).collect()).expect("identity basis")
    }

    pub fn zero(a: &StratifiedAlgebra) -> Self {
        Subspace::new(a, Vec::new()).expect("empty basis")
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Coordinates where the canonical basis vectors have their leading 1.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis of `S ∩ V_a` (1-based layer).
    pub fn layer_basis(&self, layer: usize) -> &[Vector] {
        &self.layer_bases[layer - 1]
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        self.layer_bases.iter().map(Vec::len).collect()
    }

    /// Whether `S = ⊕_a (S ∩ V_a)`.
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// `Σ_a a · dim(S ∩ V_a)`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_bases.iter().enumerate().map(|(a, b)| (a + 1) * b.len()).sum()
    }

    /// 1-based layer of canonical basis vector `i` (homogeneous subspaces only).
    pub fn basis_layer(&self, i: usize) -> usize {
        let mut acc = 0;
        for (a, b) in self.layer_bases.iter().enumerate() {
            acc += b.len();
            if i < acc {
                return a + 1;
            }
        }
        panic!("basis index {i} out of range")
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        linalg::in_span(&self.basis, v)
    }

    /// Coordinates of `v` in the canonical basis, assuming `v ∈ S`.
    pub fn coordinates_of<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }

    /// `Σ_i t_i b_i`.
    pub fn combine<S: Scalar>(&self, t: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.n];
        for (ti, b) in t.iter().zip(&self.basis_coeffs) {
            if ti.is_zero() {
                continue;
            }
            for (o, bk) in out.iter_mut().zip(b) {
                if !bk.is_zero() {
                    *o = o.clone() + ti.clone() * S::from_coeff(bk);
                }
            }
        }
        out
    }
}

/// Basis of `S ∩ V_layer`: echelon-reduce with the layer's columns last, so
/// rows whose pivot falls in the layer vanish on every other coordinate.
fn intersect_layer(a: &StratifiedAlgebra, rows: &[Vector], layer: usize) -> Vec<Vector> {
    let range = a.layer_range(layer);
    let order: Vec<usize> = (0..a.dim()).filter(|c| !range.contains(c)).chain(range.clone()).collect();
    let permuted: Vec<Vector> =
        rows.iter().map(|r| order.iter().map(|&c| r[c].clone()).collect()).collect();
    let (red, pivots) = linalg::rref(&permuted);
    let first_layer_col = a.dim() - range.len();
    let inside: Vec<Vector> = red
        .iter()
        .zip(&pivots)
        .filter(|(_, &p)| p >= first_layer_col)
        .map(|(r, _)| {
            let mut v = vec![Rational::zero(); a.dim()];
            for (pos, &c) in order.iter().enumerate() {
                v[c] = r[pos].clone();
            }
            v
        })
        .collect();
    linalg::rref(&inside).0
}

/// Witness that `S` is not an ideal: 1-based generator index and the
/// offending basis vector of `S`.
pub fn ideal_witness(a: &StratifiedAlgebra, s: &Subspace) -> Option<(usize, Vector)> {
    for i in 0..a.dim() {
        let x = a.basis_vector(i);
        for v in s.basis() {
            if !s.contains(&a.bracket(&x, v)) {
                return Some((i + 1, v.clone()));
            }
        }
    }
    None
}

/// `[X_i, v] ∈ S` for every basis `X_i` and basis `v` of `S`.
pub fn is_ideal(a: &StratifiedAlgebra, s: &Subspace) -> bool {
    ideal_witness(a, s).is_none()
}

/// Homogeneous and closed under the bracket.
pub fn is_graded_subalgebra(a: &StratifiedAlgebra, s: &Subspace) -> bool {
    if !s.is_homogeneous() {
        return false;
    }
    let b = s.basis();
    (0..b.len()).all(|i| (i + 1..b.len()).all(|j| s.contains(&a.bracket(&b[i], &b[j]))))
}

/// Whether the first layer of `W` generates `W`: for each layer `i`,
/// `[V_1 ∩ W, V_i ∩ W]` spans `V_{i+1} ∩ W`.
pub fn check_carnot_subgroup(a: &StratifiedAlgebra, w: &Subspace) -> Result<bool, AlgebraError> {
    if !is_graded_subalgebra(a, w) {
        return Err(AlgebraError::NotGradedSubalgebra("W"));
    }
    for layer in 1..a.step() {
        let target = w.layer_basis(layer + 1).len();
        let mut gens = Vec::new();
        for x in w.layer_basis(1) {
            for y in w.layer_basis(layer) {
                gens.push(a.bracket(x, y));
            }
        }
        if linalg::rank(&gens) != target {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Check that `W` and `L` are graded, complementary and `L` an ideal.
pub fn check_complementary(
    a: &StratifiedAlgebra,
    w: &Subspace,
    l: &Subspace,
    require_ideal: bool,
) -> Result<(), AlgebraError> {
    if !is_graded_subalgebra(a, w) {
        return Err(AlgebraError::NotGradedSubalgebra("W"));
    }
    if !is_graded_subalgebra(a, l) {
        return Err(AlgebraError::NotGradedSubalgebra("L"));
    }
    if w.dim() + l.dim() != a.dim() {
        return Err(AlgebraError::NotComplementary(format!(
            "dim W + dim L = {} + {} != {}",
            w.dim(),
            l.dim(),
            a.dim()
        )));
    }
    let mut all = w.basis().to_vec();
    all.extend_from_slice(l.basis());
    if linalg::rank(&all) != a.dim() {
        return Err(AlgebraError::NotComplementary("W ∩ L is nontrivial".into()));
    }
    if require_ideal {
        if let Some((generator, v)) = ideal_witness(a, l) {
            let vector = v.iter().map(format_rational).collect::<Vec<_>>().join(" ");
            return Err(AlgebraError::NotIdeal { generator, vector: format!("({vector})") });
        }
    }
    Ok(())
}

/// For `L` an ideal complementary to `W`, `W` must be a Carnot subgroup.
/// A `false` return means the exact checks contradict that fact, i.e. an
/// internal inconsistency.
pub fn check_normal_complement_is_carnot(
    a: &StratifiedAlgebra,
    w: &Subspace,
    l: &Subspace,
) -> Result<bool, AlgebraError> {
    check_complementary(a, w, l, true)?;
    check_carnot_subgroup(a, w)
}
