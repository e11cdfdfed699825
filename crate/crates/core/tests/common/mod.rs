#![allow(dead_code)]

use gibbs_geom_core::config::{Configuration, MarkedPoint};
use gibbs_geom_core::laguerre::Generator;
use gibbs_geom_core::poisson::{sample_poisson, MarkDistribution, PoissonSpec, RealLaw};
use gibbs_geom_core::rng::CounterRng;
use gibbs_geom_core::window::Window;

pub fn cfg(pts: &[(f64, f64, f64)]) -> Configuration {
    Configuration::from_points(2, pts.iter().map(|&(x, y, w)| MarkedPoint::weighted(&[x, y], w)).collect()).unwrap()
}

pub fn gens(g: &Configuration) -> Vec<Generator> {
    g.iter().map(|p| Generator { nucleus: [p.loc[0], p.loc[1]], weight: p.mark.weight().unwrap() }).collect()
}

pub fn poisson_weighted(seed: u64, half: f64, z: f64, w: (f64, f64)) -> Configuration {
    sample_poisson(&PoissonSpec {
        window: Window::cube(half, 2),
        z,
        marks: MarkDistribution::Weight(RealLaw::Uniform { lo: w.0, hi: w.1 }),
        seed,
    })
    .unwrap()
}

/// Power distance evaluated independently of the library.
pub fn rho(z: [f64; 2], g: &Generator) -> f64 {
    let dx = g.nucleus[0] - z[0];
    let dy = g.nucleus[1] - z[1];
    dx * dx + dy * dy - g.weight * g.weight
}

/// Brute-force argmin with the gap to the runner-up.
pub fn argmin_gap(gs: &[Generator], z: [f64; 2]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (i, g) in gs.iter().enumerate() {
        let d = rho(z, g);
        if d < best.1 {
            second = best.1;
            best = (i, d);
        } else if d < second {
            second = d;
        }
    }
    (best.0, second - best.1)
}

/// Boundary configuration for the conditional-energy fixtures around
/// `Λ_1`: a jittered heavy ring at radius about 3 plus light clutter in
/// `Λ_25` away from the ring. Inner points are light and lie in `Λ_1`.
pub fn ring_fixture(seed: u64) -> (Configuration, Configuration) {
    let mut rng = CounterRng::new(seed, 0);
    let mut outer = Vec::new();
    for k in 0..16 {
        let t = k as f64 * std::f64::consts::TAU / 16.0 + rng.uniform_in(-0.05, 0.05);
        let r = rng.uniform_in(2.8, 3.2);
        outer.push(MarkedPoint::weighted(&[r * t.cos(), r * t.sin()], rng.uniform_in(1.0, 1.3)));
    }
    while outer.len() < 16 + 60 {
        let x = [rng.uniform_in(-25.0, 25.0), rng.uniform_in(-25.0, 25.0)];
        if x[0].hypot(x[1]) >= 4.0 {
            outer.push(MarkedPoint::weighted(&x, rng.uniform_in(0.05, 0.3)));
        }
    }
    let inner = (0..1 + rng.below(4))
        .map(|_| MarkedPoint::weighted(&[rng.uniform_in(-0.95, 0.95), rng.uniform_in(-0.95, 0.95)], rng.uniform_in(0.1, 0.5)))
        .collect();
    (Configuration::from_points(2, inner).unwrap(), Configuration::from_points(2, outer).unwrap())
}
