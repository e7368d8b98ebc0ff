//! The constant intrinsic graph over a non-normal complement in `ℍ²`:
//! `W = {x₁ = 0}`, `L` the `x₁`-axis, `φ ≡ (1,0,0,0,0)`. `φ` is intrinsically
//! Lipschitz, yet `Φ(0,0,ε,0,0) = (1,0,ε,0,−ε/2)` sits at distance `~ ε^{1/2}`
//! from `Φ(0)`, so `Φ` is not Lipschitz.

use std::sync::Arc;

use crate::algebra::Subspace;
use crate::catalog;
use crate::graph::{Domain, GraphError, GraphFunction, LipEstimate};
use crate::group::{CarnotGroup, GroupPoint};
use crate::scalar::{Rational, Scalar};
use crate::splitting::Splitting;

/// `2^-1, …, 2^-14`.
pub fn default_eps_ladder() -> Vec<f64> {
    (1..=14).map(|e| 2f64.powi(-e)).collect()
}

/// The splitting and graph function of the example.
pub fn setup() -> (CarnotGroup, GraphFunction) {
    let g = catalog::heisenberg(2);
    let a = g.algebra();
    let split = Splitting::complementary(
        &g,
        Subspace::coordinate(a, &[2, 3, 4, 5]).expect("indices"),
        Subspace::coordinate(a, &[1]).expect("indices"),
    )
    .expect("complementary");
    let one = g.point([1, 0, 0, 0, 0].iter().map(|&x| Rational::ratio(x, 1)).collect()).expect("length");
    let phi = GraphFunction::constant(Arc::new(split), Domain::everywhere(4), &one).expect("constant in L");
    (g, phi)
}

/// `(1, 0, ε, 0, −ε/2)`.
pub fn closed_form(eps: f64) -> [f64; 5] {
    [1.0, 0.0, eps, 0.0, -eps / 2.0]
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub eps: Vec<f64>,
    /// `Φ(0,0,ε,0,0)` per `ε`.
    pub values: Vec<Vec<f64>>,
    /// Largest coordinate deviation from the closed form.
    pub max_error: f64,
    /// `hnorm(Φ(0)⁻¹·Φ(0,0,ε,0,0))`.
    pub graph_dist: Vec<f64>,
    /// `hnorm((0,0,ε,0,0))`.
    pub w_norm: Vec<f64>,
    /// Least-squares log–log slopes of the two traces against `ε`.
    pub graph_slope: f64,
    pub w_slope: f64,
    pub lip: LipEstimate,
}

/// Evaluate the example along `eps` (exactly, then rounded) and estimate
/// the intrinsic Lipschitz constant on the ladder points plus `extra`
/// seeded samples of `W ∩ [-1, 1]⁴`.
pub fn run(eps: &[f64], extra: usize, seed: u64) -> Result<CounterexampleReport, GraphError> {
    let (g, phi) = setup();
    let origin = phi.graph_map(&g.identity::<Rational>())?;
    let origin_inv = g.inv(&origin);
    let mut values = Vec::new();
    let mut graph_dist = Vec::new();
    let mut w_norm = Vec::new();
    let mut max_error: f64 = 0.0;
    let mut samples: Vec<GroupPoint<f64>> = vec![g.identity()];
    for &e in eps {
        let w = phi.splitting().w_point(&[Rational::ratio(0, 1), Rational::from_f64(e), Rational::ratio(0, 1), Rational::ratio(0, 1)]);
        let v = phi.graph_map(&w)?;
        let vf: Vec<f64> = v.coords().iter().map(Scalar::to_f64).collect();
        max_error = vf.iter().zip(closed_form(e)).map(|(a, b)| (a - b).abs()).fold(max_error, f64::max);
        graph_dist.push(g.hnorm(&g.mul(&origin_inv, &v)));
        w_norm.push(g.hnorm(&w));
        samples.push(w.to_f64());
        values.push(vf);
    }
    samples.extend(phi.sample_domain(extra, 1.0, seed));
    let lip = phi.lip_constant(&samples)?;
    Ok(CounterexampleReport {
        eps: eps.to_vec(),
        graph_slope: loglog_slope(eps, &graph_dist),
        w_slope: loglog_slope(eps, &w_norm),
        values,
        max_error,
        graph_dist,
        w_norm,
        lip,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn splitting_is_not_normal() {
        let (_, phi) = setup();
        assert!(!phi.splitting().is_normal());
    }
}
