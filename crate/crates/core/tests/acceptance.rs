//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the summary lines always print.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use carnot::algebra::{check_carnot_subgroup, check_complementary, StratifiedAlgebra, Subspace};
use carnot::calculus::{
    blowup_tangent_check, intrinsic_diff, pansu_diff, BlowupConfig, DiffConfig,
};
use carnot::graph::{linear_from_hom, Domain, GraphFunction, HomogeneousHom};
use carnot::linalg::{self, Vector};
use carnot::measure::{
    area_check, classical_area_oracle, curve_length, dilated, jacobian, AreaConfig, CoveringConfig,
};
use carnot::poly::Polynomial;
use carnot::scalar::Coeff;
use carnot::{catalog, counterexample, CarnotGroup, GroupPoint, Rational, Scalar, Splitting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn rat(rng: &mut ChaCha8Rng) -> Rational {
    Rational::ratio(rng.random_range(-24..=24), rng.random_range(1..=8))
}

fn rat_point(g: &CarnotGroup, rng: &mut ChaCha8Rng) -> GroupPoint<Rational> {
    g.point((0..g.dim()).map(|_| rat(rng)).collect()).unwrap()
}

fn f64_point(g: &CarnotGroup, rng: &mut ChaCha8Rng, r: f64) -> GroupPoint<f64> {
    g.point((0..g.dim()).map(|_| rng.random_range(-r..r)).collect()).unwrap()
}

fn criterion_1() -> Outcome {
    // Closed form evaluated here, independently of the library's helper.
    let (g, phi) = counterexample::setup();
    let mut worst: f64 = 0.0;
    for k in 1..=14 {
        let eps = 2f64.powi(-k);
        let w = phi.splitting().w_point(&[0.0, eps, 0.0, 0.0]);
        let v = phi.graph_map(&w).map_err(|e| e.to_string())?;
        let expected = [1.0, 0.0, eps, 0.0, -eps / 2.0];
        worst = v.coords().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    check(g.dim() == 5, || "wrong group".into())?;
    let report = counterexample::run(&counterexample::default_eps_ladder(), 0, 0).map_err(|e| e.to_string())?;
    let worst = worst.max(report.max_error);
    check(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("max |Φ − closed form| = {worst:e} over 14 scales"))
}

fn criterion_2() -> Outcome {
    let eps: Vec<f64> = (1..=14).map(|k| 2f64.powi(-k)).collect();
    let r = counterexample::run(&eps, 200, 7).map_err(|e| e.to_string())?;
    check((r.graph_slope - 0.5).abs() <= 0.05, || format!("graph slope {}", r.graph_slope))?;
    check((r.w_slope - 1.0).abs() <= 0.01, || format!("W slope {}", r.w_slope))?;
    check(r.lip.value.is_finite(), || "Lipschitz estimate not finite".into())?;
    Ok(format!(
        "slope hnorm(Φ(0)⁻¹Φ(εe₃)) = {:.4}, slope hnorm(εe₃) = {:.4}, L̂ = {}",
        r.graph_slope, r.w_slope, r.lip.value
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = 0;
    for g in catalog::all() {
        let name = g.algebra().name().to_string();
        let e = g.identity::<Rational>();
        for _ in 0..1000 {
            let (a, b, c) = (rat_point(&g, &mut rng), rat_point(&g, &mut rng), rat_point(&g, &mut rng));
            let lam = Rational::ratio(rng.random_range(1..=9), rng.random_range(1..=4));
            check(g.mul(&g.mul(&a, &b), &c) == g.mul(&a, &g.mul(&b, &c)), || format!("{name}: associativity"))?;
            check(g.mul(&a, &e) == a && g.mul(&e, &a) == a, || format!("{name}: identity"))?;
            check(g.mul(&a, &g.inv(&a)) == e && g.mul(&g.inv(&a), &a) == e, || format!("{name}: inverse"))?;
            check(
                g.dilate(&lam, &g.mul(&a, &b)) == g.mul(&g.dilate(&lam, &a), &g.dilate(&lam, &b)),
                || format!("{name}: dilation is not a homomorphism"),
            )?;

            let (x, y, z) = (f64_point(&g, &mut rng, 3.0), f64_point(&g, &mut rng, 3.0), f64_point(&g, &mut rng, 3.0));
            let t = rng.random_range(0.05..5.0);
            let ef = g.identity::<f64>();
            let tol = 1e-9;
            check(g.mul(&g.mul(&x, &y), &z).max_abs_diff(&g.mul(&x, &g.mul(&y, &z))) <= tol, || {
                format!("{name}: float associativity")
            })?;
            check(g.mul(&x, &g.inv(&x)).max_abs_diff(&ef) <= tol, || format!("{name}: float inverse"))?;
            check(
                g.dilate(&t, &g.mul(&x, &y)).max_abs_diff(&g.mul(&g.dilate(&t, &x), &g.dilate(&t, &y))) <= tol * 25.0,
                || format!("{name}: float dilation"),
            )?;
            let n = g.hnorm(&x);
            check((g.hnorm(&g.dilate(&t, &x)) - t * n).abs() <= tol * t * n.max(1.0), || {
                format!("{name}: norm homogeneity")
            })?;
            check((g.hnorm(&g.inv(&x)) - n).abs() <= tol * n.max(1.0), || format!("{name}: norm symmetry"))?;
            check(n > 0.0 || x.max_abs_diff(&ef) == 0.0, || format!("{name}: norm definiteness"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} randomized cases over {} groups, 0 failures", catalog::names().len()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let splittings = catalog::normal_splittings();
    for s in &splittings {
        let g = s.group();
        for _ in 0..1000 {
            let (q, a) = (f64_point(g, &mut rng, 2.0), f64_point(g, &mut rng, 2.0));
            let (aw, al) = s.project(&a);
            check(s.contains_w(&aw) && s.contains_l(&al), || "projection left its subgroup".into())?;
            worst = worst.max(g.mul(&aw, &al).max_abs_diff(&a));
            let t: Vec<f64> = (0..s.w_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ids = s.verify_normal_projection_identities(&q, &s.w_point(&t)).map_err(|e| e.to_string())?;
            worst = worst.max(ids.max());
        }
    }
    check(worst <= 1e-9, || format!("max discrepancy {worst:e}"))?;
    Ok(format!("{} splittings × 1000 pairs, max discrepancy {worst:e}", splittings.len()))
}

fn random_poly_phi(s: &Arc<Splitting>, rng: &mut ChaCha8Rng) -> GraphFunction {
    let m = s.w_dim();
    let polys = (0..s.l_dim())
        .map(|_| {
            let mut terms = vec![format!("{}/{}", rng.random_range(-5..=5), rng.random_range(1..=4))];
            for i in 1..=m {
                terms.push(format!("{}/3*w{i}", rng.random_range(-4..=4)));
                let j = rng.random_range(1..=m);
                terms.push(format!("{}/5*w{i}*w{j}", rng.random_range(-4..=4)));
            }
            Polynomial::parse(&terms.join(" + "), 'w', m).unwrap()
        })
        .collect();
    GraphFunction::polynomial(s.clone(), Domain::everywhere(m), polys).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut graph_err, mut path_err): (f64, f64) = (0.0, 0.0);
    let mut evals = 0;
    for s in catalog::normal_splittings() {
        let s = Arc::new(s);
        let g = s.group().clone();
        for _ in 0..10 {
            let phi = random_poly_phi(&s, &mut rng);
            let q = rat_point(&g, &mut rng);
            let fast = phi.translate(&q).map_err(|e| e.to_string())?;
            let generic = phi.translate_generic(&q);
            let qf = q.to_f64();
            let qw = s.pi_w(&qf);
            for _ in 0..30 {
                let t: Vec<f64> = (0..s.w_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let w = s.w_point(&t);
                let a = g.mul(&qw, &w);
                let lhs = fast.graph_map(&a).map_err(|e| e.to_string())?;
                let rhs = g.mul(&qf, &phi.graph_map(&w).map_err(|e| e.to_string())?);
                graph_err = graph_err.max(lhs.max_abs_diff(&rhs) / (1.0 + rhs.coords().iter().fold(0.0_f64, |m, x| m.max(x.abs()))));
                let b = f64_point(&g, &mut rng, 2.0);
                let b = s.pi_w(&b);
                let d = fast.phi(&b).map_err(|e| e.to_string())?;
                let e = generic.phi(&b).map_err(|e| e.to_string())?;
                path_err = path_err.max(d.max_abs_diff(&e) / (1.0 + e.coords().iter().fold(0.0_f64, |m, x| m.max(x.abs()))));
                evals += 1;
            }
        }
    }
    check(graph_err <= 1e-9, || format!("graph(φ_q) ≠ q·graph(φ): {graph_err:e}"))?;
    check(path_err <= 1e-9, || format!("fast and generic translations differ by {path_err:e}"))?;
    Ok(format!("{evals} evaluations; graph identity {graph_err:e}, fast vs generic {path_err:e} (relative)"))
}

/// Random intrinsically linear maps for each catalog splitting, written as
/// images of the W-basis. Higher-layer images follow from brackets.
fn random_linear_homs(rng: &mut ChaCha8Rng, span: i64) -> Vec<(Arc<Splitting>, HomogeneousHom)> {
    let mut out = Vec::new();
    for (idx, s) in catalog::normal_splittings().into_iter().enumerate() {
        let g = s.group().clone();
        let n = g.dim();
        let mut r = || rng.random_range(-span..=span);
        let (a, b, c, d) = (r(), r(), r(), r());
        let col = |entries: &[(usize, i64)]| {
            let mut v = vec![0_i64; n];
            for &(i, x) in entries {
                v[i - 1] += x;
            }
            v
        };
        let cols: Vec<Vec<i64>> = match idx {
            0 => vec![col(&[(1, 1), (2, a)])],
            1 => vec![col(&[(1, 1), (3, a)]), col(&[(2, 1), (3, b)])],
            2 => vec![col(&[(1, 1), (2, a)])],
            3 => vec![col(&[(1, 1), (3, a), (4, b)]), col(&[(2, 1), (3, b), (4, d)])],
            4 => vec![col(&[(1, 1), (2, a), (3, b), (4, c)])],
            5 => vec![col(&[(1, 1), (2, a)])],
            6 => vec![col(&[(2, 1), (1, a)])],
            7 => vec![col(&[(1, 1), (3, a)]), col(&[(2, 1), (3, b)]), col(&[(4, 1), (5, b), (6, -a)])],
            _ => unreachable!("catalog splittings changed"),
        };
        let cols = cols.into_iter().map(|c| c.into_iter().map(Coeff::from_int).collect()).collect();
        let hom = HomogeneousHom::new(&g, s.w(), cols).expect("layer-preserving");
        assert_eq!(hom.bracket_defect(), 0.0, "splitting {idx}");
        out.push((Arc::new(s), hom));
    }
    out
}

fn matrix_gap(a: &HomogeneousHom, b: &HomogeneousHom) -> f64 {
    let (a, b) = (a.matrix_f64(), b.matrix_f64());
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = DiffConfig::default();
    let mut worst_residual: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut worst_projection: f64 = 0.0;
    let mut runs = 0;
    for _ in 0..3 {
        for (s, hom) in random_linear_homs(&mut rng, 6) {
            let g = s.group().clone();
            let m = s.w_dim();
            let ell = linear_from_hom(&hom, s.clone()).map_err(|e| e.to_string())?;
            let phi = ell.to_graph_function(Domain::everywhere(m));
            let q = rat_point(&g, &mut rng);
            let translated = phi.translate(&q).map_err(|e| e.to_string())?;
            for f in [&phi, &translated] {
                let a0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.5..1.5)).collect();
                let r = pansu_diff(f, &a0, &cfg).map_err(|e| e.to_string())?;
                check(r.converged, || "pansu_diff did not converge on a linear graph".into())?;
                worst_residual = r.residuals.iter().copied().fold(worst_residual, f64::max);
                let (d, rep) = intrinsic_diff(f, &a0, &cfg).map_err(|e| e.to_string())?;
                let gap = matrix_gap(d.hom(), &hom);
                check(gap <= 1e-9, || format!("intrinsic_diff differs from φ by {gap:e}"))?;
                worst_projection = worst_projection.max(rep.projection_residual.unwrap());
                for _ in 0..10 {
                    let t: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let lhs = g.mul(&s.w_point(&t), &d.ell(&t));
                    worst_identity = worst_identity.max(lhs.max_abs_diff(&rep.hom.apply(&t)));
                }
                runs += 1;
            }
        }
    }
    check(worst_residual <= 1e-9, || format!("linear residual {worst_residual:e}"))?;

    // Nonlinear cases: abelian square and a horizontal curve in ℍ¹.
    let r2 = Arc::new(Splitting::coordinate(&catalog::euclidean(2), &[1], &[2]).unwrap());
    let sq = GraphFunction::polynomial(r2, Domain::everywhere(1), vec![Polynomial::parse("w1^2", 'w', 1).unwrap()])
        .unwrap();
    let (d, rep) = intrinsic_diff(&sq, &[1.0], &cfg).map_err(|e| e.to_string())?;
    let slope = d.ell(&[1.0]).coords()[1];
    check((slope - 2.0).abs() <= 1e-3, || format!("abelian slope {slope}"))?;
    worst_projection = worst_projection.max(rep.projection_residual.unwrap());

    let h1 = Arc::new(Splitting::coordinate(&catalog::heisenberg(1), &[1], &[2, 3]).unwrap());
    let g = h1.group().clone();
    let curve = GraphFunction::polynomial(
        h1.clone(),
        Domain::everywhere(1),
        vec![Polynomial::parse("w1^2", 'w', 1).unwrap(), Polynomial::parse("-w1^3/3", 'w', 1).unwrap()],
    )
    .unwrap();
    for _ in 0..20 {
        let a0 = rng.random_range(-1.0..1.0);
        let (d, rep) = intrinsic_diff(&curve, &[a0], &cfg).map_err(|e| e.to_string())?;
        worst_projection = worst_projection.max(rep.projection_residual.unwrap());
        for _ in 0..10 {
            let t = [rng.random_range(-2.0..2.0)];
            let lhs = g.mul(&h1.w_point(&t), &d.ell(&t));
            worst_identity = worst_identity.max(lhs.max_abs_diff(&rep.hom.apply(&t)));
        }
        runs += 1;
    }
    check(worst_identity <= 1e-9, || format!("w·d^φφ[w] vs dΦ[w]: {worst_identity:e}"))?;
    check(worst_projection <= 1e-6, || format!("projection residual {worst_projection:e}"))?;
    Ok(format!(
        "{runs} differentials; linear residual {worst_residual:e}, slope {slope:.6}, identity {worst_identity:e}, projection {worst_projection:e}"
    ))
}

fn pairwise_within(values: &[(&str, f64)], tol: f64) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (i, (na, a)) in values.iter().enumerate() {
        for (nb, b) in &values[i + 1..] {
            let d = rel(*a, *b);
            worst = worst.max(d);
            check(d <= tol, || format!("{na} = {a} vs {nb} = {b}: {:.2}%", d * 100.0))?;
        }
    }
    Ok(worst)
}

fn criterion_7() -> Outcome {
    let cfg = AreaConfig::default();
    let mut notes = Vec::new();
    let r2 = Arc::new(Splitting::coordinate(&catalog::euclidean(2), &[1], &[2]).unwrap());
    let u = Domain::single_box(vec![(-1.0, 2.0)]);
    let v = [(0.0, 1.0)];
    for m in [0, 1, 3] {
        let phi = GraphFunction::polynomial(
            r2.clone(),
            u.clone(),
            vec![Polynomial::parse(&format!("{m}*w1"), 'w', 1).unwrap()],
        )
        .unwrap();
        let rep = area_check(&phi, &v, &cfg).map_err(|e| e.to_string())?;
        let oracle = classical_area_oracle(&phi, &v).map_err(|e| e.to_string())?.value;
        let exact = (1.0 + (m * m) as f64).sqrt();
        check(rel(oracle, exact) <= 1e-9, || format!("oracle {oracle} vs √(1+m²)"))?;
        let w = pairwise_within(&[("lhs", rep.lhs.value), ("rhs", rep.rhs), ("oracle", oracle)], 0.05)?;
        notes.push(format!("m={m}: {:.2}%", w * 100.0));
    }

    // ∫₀¹ √(1+4x²) dx in closed form.
    let closed = 5f64.sqrt() / 2.0 + 2f64.asinh() / 4.0;
    check((closed - 1.478943).abs() < 1e-6, || format!("closed form {closed}"))?;
    let sq = GraphFunction::polynomial(r2, u.clone(), vec![Polynomial::parse("w1^2", 'w', 1).unwrap()]).unwrap();
    let oracle = classical_area_oracle(&sq, &v).map_err(|e| e.to_string())?.value;
    check((oracle - closed).abs() <= 1e-6, || format!("quadrature {oracle} vs {closed}"))?;
    let rep = area_check(&sq, &v, &cfg).map_err(|e| e.to_string())?;
    check(rel(rep.rhs, 1.478943) <= 0.05, || format!("x² rhs {}", rep.rhs))?;
    notes.push(format!("x²: rhs {:.4}", rep.rhs));

    // Horizontal curve Φ(x) = (x, x², x³/6) in ℍ¹.
    let h1 = Arc::new(Splitting::coordinate(&catalog::heisenberg(1), &[1], &[2, 3]).unwrap());
    let curve = GraphFunction::polynomial(
        h1.clone(),
        u,
        vec![Polynomial::parse("w1^2", 'w', 1).unwrap(), Polynomial::parse("-w1^3/3", 'w', 1).unwrap()],
    )
    .unwrap();
    let rep = area_check(&curve, &v, &cfg).map_err(|e| e.to_string())?;
    let pts: Vec<GroupPoint<f64>> =
        (0..=20_000).map(|i| curve.graph_map_at(&[i as f64 / 20_000.0]).unwrap()).collect();
    let len = curve_length(h1.group(), &pts).value;
    let w = pairwise_within(&[("lhs", rep.lhs.value), ("curve_length", len), ("rhs", rep.rhs)], 0.05)?;
    notes.push(format!("ℍ¹ curve: lhs {:.4}, length {len:.4}, rhs {:.4} ({:.2}%)", rep.lhs.value, rep.rhs, w * 100.0));
    Ok(notes.join("; "))
}

fn covering_for(k: usize) -> CoveringConfig {
    let mut c = CoveringConfig::default();
    if k > 2 {
        c.deltas = vec![0.5, 0.4, 0.3];
        c.ball_points = 4_000;
    }
    c
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for s in catalog::normal_splittings() {
        let id = HomogeneousHom::embedding(s.group(), s.w());
        let j = jacobian(&id, &covering_for(s.k())).map_err(|e| e.to_string())?;
        check((j.value.value - 1.0).abs() <= j.value.error, || format!("J(id) = {}", j.value.value))?;
    }
    notes.push("J(id) = 1 on all catalog W".to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let homs = random_linear_homs(&mut rng, 2);
    // ℍ¹ line, ℍ² plane and an Engel line. The free group's W (k = 4) needs
    // δ ladders too coarse for a meaningful ratio at this sample size.
    for idx in [2, 3, 6] {
        let (s, f) = &homs[idx];
        let k = s.k() as i32;
        let cfg = covering_for(s.k());
        let base = jacobian(f, &cfg).map_err(|e| e.to_string())?.value;
        for lam in [(1, 2), (2, 1)] {
            let lf = lam.0 as f64 / lam.1 as f64;
            let j = jacobian(&dilated(f, lam), &cfg).map_err(|e| e.to_string())?.value;
            let ratio = j.value / base.value;
            let err = ratio * (j.error / j.value + base.error / base.value);
            let target = lf.powi(k);
            check((ratio - target).abs() <= err, || {
                format!("W of splitting {idx}, λ = {lf}: ratio {ratio} vs {target} ± {err}")
            })?;
            notes.push(format!("k={k} λ={lf}: {ratio:.4}/{target} ± {err:.3}"));
        }
    }
    Ok(notes.join("; "))
}

fn random_vec(rng: &mut ChaCha8Rng, a: &StratifiedAlgebra, layer: usize) -> Vector {
    let r = a.layer_range(layer);
    (0..a.dim()).map(|i| if r.contains(&i) { Rational::ratio(rng.random_range(-2..=2), 1) } else { Rational::ratio(0, 1) }).collect()
}

fn span_basis(vs: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut t = out.clone();
        t.push(v.clone());
        if linalg::rank(&t) > out.len() {
            out = t;
        }
    }
    out
}

/// A random graded ideal `L` and a graded subalgebra `W` complementary to
/// it, or `None` when the draw is degenerate.
fn random_normal_pair(a: &StratifiedAlgebra, rng: &mut ChaCha8Rng) -> Option<(Subspace, Subspace)> {
    let d1 = a.layer_dims()[0];
    let wd = rng.random_range(1..=d1);
    let w1 = span_basis(&(0..wd).map(|_| random_vec(rng, a, 1)).collect::<Vec<_>>());
    let mut l_layer = {
        let mut l: Vec<Vector> = Vec::new();
        let mut guard = 0;
        while w1.len() + l.len() < d1 && guard < 100 {
            guard += 1;
            let mut t: Vec<Vector> = w1.iter().chain(&l).cloned().collect();
            let v = random_vec(rng, a, 1);
            t.push(v.clone());
            if linalg::rank(&t) == t.len() {
                l.push(v);
            }
        }
        l
    };
    let v1: Vec<Vector> = (0..d1).map(|i| a.basis_vector(i)).collect();
    let mut w_all = w1.clone();
    let mut l_all = l_layer.clone();
    let mut w_layer = w1.clone();
    for layer in 2..=a.step() {
        let dim = a.layer_dims()[layer - 1];
        w_layer = span_basis(&w1.iter().flat_map(|x| w_layer.iter().map(|y| a.bracket(x, y))).collect::<Vec<_>>());
        let mut next = span_basis(&v1.iter().flat_map(|x| l_layer.iter().map(|y| a.bracket(x, y))).collect::<Vec<_>>());
        let mut guard = 0;
        while w_layer.len() + next.len() < dim && guard < 100 {
            guard += 1;
            let mut t: Vec<Vector> = w_layer.iter().chain(&next).cloned().collect();
            let v = random_vec(rng, a, layer);
            t.push(v.clone());
            if linalg::rank(&t) == t.len() {
                next.push(v);
            }
        }
        w_all.extend(w_layer.iter().cloned());
        l_all.extend(next.iter().cloned());
        l_layer = next;
    }
    let w = Subspace::new(a, w_all).ok()?;
    let l = if l_all.is_empty() { Subspace::zero(a) } else { Subspace::new(a, l_all).ok()? };
    check_complementary(a, &w, &l, true).ok()?;
    Some((w, l))
}

fn criterion_9() -> Outcome {
    let h2 = catalog::heisenberg(2);
    let w = Subspace::coordinate(h2.algebra(), &[2, 3, 4, 5]).unwrap();
    check(check_carnot_subgroup(h2.algebra(), &w) == Ok(true), || "span{X2..X5} in ℍ²".into())?;
    let h1 = catalog::heisenberg(1);
    let w = Subspace::coordinate(h1.algebra(), &[3]).unwrap();
    check(check_carnot_subgroup(h1.algebra(), &w) == Ok(false), || "span{X3} in ℍ¹".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut generated = 0;
    for g in catalog::all() {
        let a = g.algebra();
        let mut got = 0;
        let mut tries = 0;
        while got < 50 && tries < 5000 {
            tries += 1;
            if let Some((w, l)) = random_normal_pair(a, &mut rng) {
                check(check_carnot_subgroup(a, &w) == Ok(true), || format!("{}: W not Carnot", a.name()))?;
                check(Splitting::new(&g, w, l).is_ok(), || format!("{}: splitting rejected", a.name()))?;
                got += 1;
            }
        }
        check(got == 50, || format!("{}: only {got} pairs generated", a.name()))?;
        generated += got;
    }
    Ok(format!("fixed cases correct; {generated} random normal-complement splittings all Carnot"))
}

fn criterion_10() -> Outcome {
    let r2 = Arc::new(Splitting::coordinate(&catalog::euclidean(2), &[1], &[2]).unwrap());
    let phi = GraphFunction::polynomial(r2, Domain::everywhere(1), vec![Polynomial::parse("w1^2", 'w', 1).unwrap()])
        .unwrap();
    let lambdas = [1.0, 2.0, 4.0, 8.0, 16.0];
    let cfg = BlowupConfig::default();
    let q = |n| Rational::ratio(n, 1);
    let right = blowup_tangent_check(&phi, &[1.0], &[vec![q(1), q(2)]], &lambdas, &cfg).map_err(|e| e.to_string())?;
    let wrong = blowup_tangent_check(&phi, &[1.0], &[vec![q(1), q(0)]], &lambdas, &cfg).map_err(|e| e.to_string())?;
    let d = &right.distances;
    check(d.windows(2).all(|p| p[1] <= 1.1 * p[0]), || format!("trace not decreasing: {d:?}"))?;
    let (last, bad) = (d[d.len() - 1], wrong.distances[d.len() - 1]);
    check(last < bad / 5.0, || format!("final {last} vs wrong candidate {bad}"))?;
    Ok(format!("trace {:?}, wrong candidate {bad:.4}", d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("paper-value regression", 1.0, criterion_1),
        ("Hölder asymptotics", 1.0, criterion_2),
        ("algebraic properties", 10.0, criterion_3),
        ("projections", 10.0, criterion_4),
        ("translations", 10.0, criterion_5),
        ("differentiation consistency", 30.0, criterion_6),
        ("area formula", 300.0, criterion_7),
        ("Jacobian properties", 120.0, criterion_8),
        ("Carnot-subgroup checker", 5.0, criterion_9),
        ("blow-up diagnostic", 30.0, criterion_10),
    ];
    // ACCEPTANCE_ONLY=3,7 restricts the run to the listed criteria.
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    // Panic messages are reported on the criterion line instead.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs_f64(*limit) => Err(format!("took {took:.2?}, limit {limit} s")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{took:.2?}]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{took:.2?}]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
