//! Attractive planar facets (`a_2 < 0`): the configurations `γ_N` that break
//! stability, the window on which facets from two direction caps always
//! cross, and the lower bound on `log Z_Λ` that diverges.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::config::{Configuration, MarkedPoint};
use crate::facet::{facet_energy, facet_of, pair_intersection, FacetEnergyModel, FacetError, DEFAULT_TOLERANCE};
use crate::poisson::{DirectionLaw, MarkDistribution};
use crate::rng::CounterRng;

type Result<T> = core::result::Result<T, FacetError>;

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleSpec {
    /// Even number of facets in `γ_N`.
    pub n: usize,
    /// Normals of the two halves of `γ_N`.
    pub n1: [f64; 2],
    pub n2: [f64; 2],
    /// Centres of the direction caps `U(u ± ε)`, `U(v ± ε)`.
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub eps: f64,
    /// Radius interval `(a, b)`.
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

/// Angle of a unit vector of the upper half circle, in `(-π/2, π/2]`.
pub fn half_circle_angle(n: [f64; 2]) -> f64 {
    libm::atan2(n[1], n[0])
}

fn unit_in_half_circle(n: [f64; 2]) -> bool {
    let len = libm::sqrt(n[0] * n[0] + n[1] * n[1]);
    (len - 1.0).abs() <= 1e-12 && (n[0] > 0.0 || (n[0] == 0.0 && n[1] > 0.0))
}

impl CounterexampleSpec {
    /// The shipped parameter set: caps of half width 0.2 around the
    /// diagonals, radii in `(1, 2)`, unit activity.
    pub fn standard(n: usize) -> Self {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        CounterexampleSpec { n, n1: [r, r], n2: [r, -r], u: [r, r], v: [r, -r], eps: 0.2, a: 1.0, b: 2.0, z: 1.0 }
    }

    /// Mark law matching [`CounterexampleSpec::standard`].
    pub fn standard_marks() -> MarkDistribution {
        MarkDistribution::Facet {
            direction: DirectionLaw::UniformHemisphere,
            radius: crate::poisson::RealLaw::Uniform { lo: 1.0, hi: 2.0 },
        }
    }

    /// Checks the direction and radius parameters (everything except `n`).
    pub fn validate_caps(&self) -> Result<()> {
        if !unit_in_half_circle(self.u) || !unit_in_half_circle(self.v) {
            return Err(FacetError::Counterexample("u and v must be unit vectors of the upper half circle"));
        }
        if !(self.eps > 0.0) || !(self.a > 0.0) || !(self.a <= self.b) || !self.b.is_finite() || !(self.z > 0.0) {
            return Err(FacetError::Counterexample("need eps > 0, 0 < a <= b < inf, z > 0"));
        }
        let (tu, tv) = (half_circle_angle(self.u), half_circle_angle(self.v));
        for t in [tu, tv] {
            if t - self.eps <= -PI / 2.0 || t + self.eps > PI / 2.0 {
                return Err(FacetError::Counterexample("direction cap leaves the upper half circle"));
            }
        }
        if (tu - tv).abs() <= 2.0 * self.eps {
            return Err(FacetError::Counterexample("direction caps overlap"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(FacetError::Counterexample("N must be even and at least 2"));
        }
        if !unit_in_half_circle(self.n1) || !unit_in_half_circle(self.n2) || self.n1 == self.n2 {
            return Err(FacetError::Counterexample("n1, n2 must be distinct unit vectors of the upper half circle"));
        }
        if self.n1 == [0.0, 1.0] || self.n2 == [0.0, 1.0] {
            // horizontal facets would lie on the axis and overlap within a half
            return Err(FacetError::Counterexample("normals must not be (0, 1)"));
        }
        self.validate_caps()
    }

    fn in_cap(&self, centre: [f64; 2], n: [f64; 2]) -> bool {
        (half_circle_angle(n) - half_circle_angle(centre)).abs() <= self.eps
    }
}

/// `γ_N` together with the shared radius.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaN {
    pub config: Configuration,
    pub radius: f64,
}

/// Distances along the two lines from `x` (direction `t1`) and `y`
/// (direction `t2`) to their crossing point.
fn crossing_params(x: [f64; 2], t1: [f64; 2], y: [f64; 2], t2: [f64; 2]) -> (f64, f64) {
    let den = t1[0] * t2[1] - t1[1] * t2[0];
    let w = [y[0] - x[0], y[1] - x[1]];
    ((w[0] * t2[1] - w[1] * t2[0]) / den, (w[0] * t1[1] - w[1] * t1[0]) / den)
}

/// Locations `1 = x_1 > … > x_{N/2} > 0` with normal `n1` and
/// `-1 = x_{N/2+1} < … < x_N < 0` with normal `n2`, all on the first axis,
/// with `R` 1.1 times the smallest radius making the extreme pair cross.
pub fn gen_gamma_n(spec: &CounterexampleSpec) -> Result<GammaN> {
    spec.validate()?;
    let half = spec.n / 2;
    let t1 = [spec.n1[1], -spec.n1[0]];
    let t2 = [spec.n2[1], -spec.n2[0]];
    let (s, u) = crossing_params([1.0, 0.0], t1, [-1.0, 0.0], t2);
    let radius = 1.1 * s.abs().max(u.abs());
    let mut pts = Vec::with_capacity(spec.n);
    for i in 0..half {
        let x = 1.0 - i as f64 / half as f64;
        pts.push(MarkedPoint::facet(&[x, 0.0], &spec.n1, radius));
        pts.push(MarkedPoint::facet(&[-x, 0.0], &spec.n2, radius));
    }
    let config = Configuration::from_points(2, pts).map_err(|_| FacetError::Counterexample("invalid facet"))?;
    Ok(GammaN { config, radius })
}

/// `(f_1, f_2)`: distances from `x` and `y` to the crossing point of the
/// lines through them with normals `n`, `m`.
pub fn crossing_distances(x: [f64; 2], y: [f64; 2], n: [f64; 2], m: [f64; 2]) -> (f64, f64) {
    let det = n[0] * m[1] - n[1] * m[0];
    let b0 = n[0] * x[0] + n[1] * x[1];
    let b1 = m[0] * y[0] + m[1] * y[1];
    let p = [(m[1] * b0 - n[1] * b1) / det, (n[0] * b1 - m[0] * b0) / det];
    (libm::hypot(x[0] - p[0], x[1] - p[1]), libm::hypot(y[0] - p[0], y[1] - p[1]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaScale {
    /// Half side of `Λ = [-s, s]^2`.
    pub s: f64,
    /// Estimated maxima of `f_1`, `f_2` on `[-1,1]^2 × [-1,1]^2 × caps`.
    pub m1: f64,
    pub m2: f64,
    pub validated_samples: usize,
}

pub const SCALE_SAFETY: f64 = 0.9;
pub const SCALE_VALIDATION_SAMPLES: usize = 100_000;

fn unit(theta: f64) -> [f64; 2] {
    [libm::cos(theta), libm::sin(theta)]
}

/// For fixed directions, `f_1` and `f_2` are norms of linear maps of
/// `(x, y)`, hence convex; their maxima over the cube sit at its 16 corners.
fn corner_max(n: [f64; 2], m: [f64; 2]) -> (f64, f64) {
    let mut best = (0.0f64, 0.0f64);
    for c in 0..16u32 {
        let sgn = |bit: u32| if c & (1 << bit) != 0 { 1.0 } else { -1.0 };
        let (f1, f2) = crossing_distances([sgn(0), sgn(1)], [sgn(2), sgn(3)], n, m);
        best = (best.0.max(f1), best.1.max(f2));
    }
    best
}

/// Choose `s` so that two facets with centres in `[-s,s]^2`, normals in the
/// two caps and radii above `a` always cross exactly once.
pub fn find_lambda_scale(spec: &CounterexampleSpec) -> Result<LambdaScale> {
    spec.validate_caps()?;
    let (tu, tv) = (half_circle_angle(spec.u), half_circle_angle(spec.v));
    const GRID: usize = 64;
    let eval = |a: f64, b: f64| corner_max(unit(a), unit(b));
    let mut m = (0.0f64, 0.0f64);
    let mut arg = (tu, tv);
    let mut best = 0.0f64;
    for i in 0..=GRID {
        for j in 0..=GRID {
            let a = tu - spec.eps + 2.0 * spec.eps * i as f64 / GRID as f64;
            let b = tv - spec.eps + 2.0 * spec.eps * j as f64 / GRID as f64;
            let f = eval(a, b);
            m = (m.0.max(f.0), m.1.max(f.1));
            if f.0.max(f.1) > best {
                best = f.0.max(f.1);
                arg = (a, b);
            }
        }
    }
    // local refinement around the grid argmax, clamped to the caps
    let mut h = 2.0 * spec.eps / GRID as f64;
    for _ in 0..30 {
        let mut moved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h), (h, -h), (-h, h)] {
            let a = (arg.0 + da).clamp(tu - spec.eps, tu + spec.eps);
            let b = (arg.1 + db).clamp(tv - spec.eps, tv + spec.eps);
            let f = eval(a, b);
            m = (m.0.max(f.0), m.1.max(f.1));
            if f.0.max(f.1) > best {
                best = f.0.max(f.1);
                arg = (a, b);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    let peak = m.0.max(m.1);
    let s = if peak > 0.0 { SCALE_SAFETY * spec.a / peak } else { 1.0 };
    validate_scale(spec, s, SCALE_VALIDATION_SAMPLES, 0x5CA1E)?;
    Ok(LambdaScale { s, m1: m.0, m2: m.1, validated_samples: SCALE_VALIDATION_SAMPLES })
}

/// Random check that every sampled cross pair crosses exactly once.
pub fn validate_scale(spec: &CounterexampleSpec, s: f64, samples: usize, seed: u64) -> Result<()> {
    let mut rng = CounterRng::new(seed, 0);
    let (tu, tv) = (half_circle_angle(spec.u), half_circle_angle(spec.v));
    let hi = if spec.b > spec.a { spec.b } else { spec.a * 2.0 };
    for k in 0..samples {
        let x = [rng.uniform_in(-s, s), rng.uniform_in(-s, s)];
        let y = [rng.uniform_in(-s, s), rng.uniform_in(-s, s)];
        let n = unit(rng.uniform_in(tu - spec.eps, tu + spec.eps));
        let m = unit(rng.uniform_in(tv - spec.eps, tv + spec.eps));
        let r = rng.uniform_in(spec.a, hi);
        let t = rng.uniform_in(spec.a, hi);
        let fx = facet_of(&MarkedPoint::facet(&x, &n, r), 2)?;
        let fy = facet_of(&MarkedPoint::facet(&y, &m, t), 2)?;
        let p = pair_intersection(&fx, &fy, DEFAULT_TOLERANCE);
        let (f1, f2) = crossing_distances(x, y, n, m);
        if !p.is_proper() || p.measure != 1.0 || f1 >= spec.a || f2 >= spec.a {
            return Err(FacetError::ScaleValidation(k));
        }
    }
    Ok(())
}

/// `k^2 - Δ - Γ_u - Γ_v + k (ln Γ_u + ln Γ_v) - 2 ln k!`, a lower bound on
/// `log Z_Λ` for every `k`.
pub fn z_lower_bound_log_term(k: u64, gamma_u: f64, gamma_v: f64, delta: f64) -> f64 {
    let k = k as f64;
    k * k - delta - gamma_u - gamma_v + k * (libm::log(gamma_u) + libm::log(gamma_v)) - 2.0 * libm::lgamma(k + 1.0)
}

/// Intensity masses of `G_u`, `G_v` and of the rest of `Λ × S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapRates {
    pub gamma_u: f64,
    pub gamma_v: f64,
    pub delta: f64,
}

pub fn cap_rates(spec: &CounterexampleSpec, s: f64, marks: &MarkDistribution) -> Result<CapRates> {
    spec.validate_caps()?;
    let MarkDistribution::Facet { direction, radius } = marks else {
        return Err(FacetError::NotFacet);
    };
    let p_dir = |c: [f64; 2]| -> f64 {
        match direction {
            DirectionLaw::UniformHemisphere => 2.0 * spec.eps / PI,
            DirectionLaw::Atoms(at) => at.iter().filter(|x| spec.in_cap(c, [x.0[0], x.0[1]])).map(|x| x.1).sum(),
        }
    };
    let p_rad = radius.prob_open(spec.a, spec.b);
    let mass = spec.z * 4.0 * s * s;
    let gamma_u = mass * p_dir(spec.u) * p_rad;
    let gamma_v = mass * p_dir(spec.v) * p_rad;
    Ok(CapRates { gamma_u, gamma_v, delta: mass - gamma_u - gamma_v })
}

/// A configuration from `A_{Λ,2k}` with its pair counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ALambdaSample {
    pub config: Configuration,
    /// Crossing pairs with one facet from each cap.
    pub cross_pairs: usize,
    /// Crossing pairs within a cap (not controlled by the construction).
    pub within_pairs: usize,
    /// `H` with `a_2 = -1`.
    pub energy: f64,
}

/// `k` facets with directions in `U(u ± ε)` and `k` in `U(v ± ε)`,
/// centres uniform in `[-s,s]^2`, radii uniform in `(a, b)`.
pub fn sample_a_lambda_2k(k: usize, spec: &CounterexampleSpec, s: f64, seed: u64) -> Result<ALambdaSample> {
    spec.validate_caps()?;
    if k == 0 {
        return Err(FacetError::Counterexample("k must be positive"));
    }
    if !(spec.a < spec.b) || !(s > 0.0) {
        return Err(FacetError::Counterexample("need a < b and s > 0"));
    }
    let mut pts = Vec::with_capacity(2 * k);
    let mut caps = Vec::with_capacity(2 * k);
    for (cap, centre) in [(0u8, spec.u), (1u8, spec.v)] {
        let t = half_circle_angle(centre);
        for i in 0..k {
            let mut rng = CounterRng::new(seed, 2 * i as u64 + cap as u64);
            let n = unit(rng.uniform_in(t - spec.eps, t + spec.eps));
            let r = rng.uniform_in(spec.a, spec.b);
            let x = [rng.uniform_in(-s, s), rng.uniform_in(-s, s)];
            pts.push(MarkedPoint::facet(&x, &n, r));
            caps.push(cap);
        }
    }
    let fs: Vec<_> = pts.iter().map(|p| facet_of(p, 2)).collect::<Result<_>>()?;
    let (mut cross, mut within) = (0, 0);
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            if pair_intersection(&fs[i], &fs[j], DEFAULT_TOLERANCE).is_proper() {
                if caps[i] != caps[j] {
                    cross += 1;
                } else {
                    within += 1;
                }
            }
        }
    }
    let config = Configuration::from_points(2, pts).map_err(|_| FacetError::Counterexample("location collision"))?;
    let energy = facet_energy(&config, &FacetEnergyModel::planar(-1.0))?;
    Ok(ALambdaSample { config, cross_pairs: cross, within_pairs: within, energy })
}

/// One row of the divergence report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceRow {
    pub k: u64,
    pub log_lower_bound: f64,
    pub cross_pair_count: usize,
    pub energy: f64,
}

pub fn divergence_table(
    spec: &CounterexampleSpec,
    marks: &MarkDistribution,
    ks: &[u64],
    seed: u64,
) -> Result<(LambdaScale, CapRates, Vec<DivergenceRow>)> {
    let scale = find_lambda_scale(spec)?;
    let rates = cap_rates(spec, scale.s, marks)?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let sample = sample_a_lambda_2k(k as usize, spec, scale.s, crate::rng::derive_seed(seed, k))?;
        rows.push(DivergenceRow {
            k,
            log_lower_bound: z_lower_bound_log_term(k, rates.gamma_u, rates.gamma_v, rates.delta),
            cross_pair_count: sample.cross_pairs,
            energy: sample.energy,
        });
    }
    Ok((scale, rates, rows))
}
