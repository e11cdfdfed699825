//! Facets, their intersections and the intersection energy.
//!
//! A facet is the flat disc `x + (A(n) ∩ B(0, R))` where `A(n)` is the
//! hyperplane through the origin with normal `n`. In the plane it is a
//! segment of length `2R`.
//!
//! The energy is `H(γ) = Σ_j a_j φ_j(γ)` with `φ_j` the sum over unordered
//! `j`-tuples of `ℍ^{d-j}` of the common intersection, counted only when
//! that measure is finite.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::{mark_sup, restrict, Configuration, Mark, MarkedPoint};
use crate::vec::{add, cross, dot, norm, scale, sub, V3};
use crate::window::Window;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub dim: usize,
    pub center: V3,
    pub normal: V3,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FacetError {
    #[error("point does not carry a facet mark")]
    NotFacet,
    #[error("dimension must be 2 or 3")]
    Dimension,
    #[error("model expects {expected} coefficients, got {got}")]
    Coefficients { expected: usize, got: usize },
    #[error("boundary configuration intersects the window")]
    BoundaryInsideWindow,
    #[error("inner configuration has points outside the window")]
    InnerOutsideWindow,
    #[error("boundary configuration is not in M̄_l for l = {0}")]
    BoundaryNotTempered(u64),
    #[error("window coordinates must be finite")]
    Unbounded,
    #[error("invalid counterexample parameters: {0}")]
    Counterexample(&'static str),
    #[error("validation of the window scale failed at sample {0}")]
    ScaleValidation(usize),
}

pub fn facet_of(p: &MarkedPoint, dim: usize) -> Result<Facet, FacetError> {
    if !(2..=3).contains(&dim) {
        return Err(FacetError::Dimension);
    }
    match p.mark {
        Mark::Facet { normal, radius } => Ok(Facet { dim, center: p.loc, normal, radius }),
        Mark::Weight(_) => Err(FacetError::NotFacet),
    }
}

pub fn facets_of(gamma: &Configuration) -> Result<Vec<Facet>, FacetError> {
    gamma.iter().map(|p| facet_of(p, gamma.dim())).collect()
}

impl Facet {
    /// In-plane direction of a planar facet, `(n_2, -n_1)`.
    pub fn direction(&self) -> V3 {
        [self.normal[1], -self.normal[0], 0.0]
    }

    /// Endpoints of a planar facet.
    pub fn endpoints(&self) -> (V3, V3) {
        let t = self.direction();
        (sub(&self.center, &scale(&t, self.radius)), add(&self.center, &scale(&t, self.radius)))
    }

    fn key_cmp(&self, other: &Facet) -> Ordering {
        let a = self.center.iter().chain(&self.normal).chain(core::iter::once(&self.radius));
        let b = other.center.iter().chain(&other.normal).chain(core::iter::once(&other.radius));
        for (x, y) in a.zip(b) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// Intersection of two facets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairIntersection {
    /// Dimension of the intersection, `-1` when empty.
    pub dim: i8,
    /// `ℍ^{d-2}` of the intersection (`∞` when not finite).
    pub measure: f64,
    pub finite: bool,
    /// The configuration sits within the tolerance band of a combinatorial
    /// change (touching endpoints, tangencies). Such pairs contribute 0.
    pub degenerate: bool,
}

impl PairIntersection {
    const EMPTY: PairIntersection = PairIntersection { dim: -1, measure: 0.0, finite: true, degenerate: false };

    /// Contribution `ℍ^{d-2} · 1[finite]` with degenerate pairs counted as 0.
    pub fn contribution(&self) -> f64 {
        if self.finite && !self.degenerate && self.dim >= 0 {
            self.measure
        } else {
            0.0
        }
    }

    /// Transversal, non-degenerate crossing.
    pub fn is_proper(&self) -> bool {
        self.contribution() > 0.0
    }
}

pub fn pair_intersection(f1: &Facet, f2: &Facet, tol: f64) -> PairIntersection {
    // canonical order makes the result symmetric bit for bit
    let (a, b) = if f1.key_cmp(f2) == Ordering::Greater { (f2, f1) } else { (f1, f2) };
    if a.dim == 2 {
        pair_2d(a, b, tol)
    } else {
        pair_3d(a, b, tol)
    }
}

/// Overlap of `[c1-h1, c1+h1]` and `[c2-h2, c2+h2]`, classified with `tol`:
/// `Some(len)` with `len > tol`, `Some(0)` touching, `None` disjoint.
fn interval_overlap(c1: f64, h1: f64, c2: f64, h2: f64, tol: f64) -> Option<(f64, bool)> {
    let lo = (c1 - h1).max(c2 - h2);
    let hi = (c1 + h1).min(c2 + h2);
    let len = hi - lo;
    if len > tol {
        Some((len, false))
    } else if len >= -tol {
        Some((0.0, true))
    } else {
        None
    }
}

fn pair_2d(a: &Facet, b: &Facet, tol: f64) -> PairIntersection {
    let ta = a.direction();
    let tb = b.direction();
    let w = sub(&b.center, &a.center);
    let den = ta[0] * tb[1] - ta[1] * tb[0];
    if den.abs() <= tol {
        // parallel: collinear iff the offset along the normal vanishes
        let off = dot(&w, &a.normal);
        if off.abs() > tol {
            return PairIntersection::EMPTY;
        }
        let p = dot(&w, &ta);
        return match interval_overlap(0.0, a.radius, p, b.radius, tol) {
            None => PairIntersection::EMPTY,
            Some((_, true)) => PairIntersection { dim: 0, measure: 1.0, finite: true, degenerate: true },
            Some((_, false)) => PairIntersection { dim: 1, measure: f64::INFINITY, finite: false, degenerate: false },
        };
    }
    // a.center + s ta = b.center + u tb
    let s = (w[0] * tb[1] - w[1] * tb[0]) / den;
    let u = (w[0] * ta[1] - w[1] * ta[0]) / den;
    let ea = s.abs() - a.radius;
    let eb = u.abs() - b.radius;
    if ea > tol || eb > tol {
        return PairIntersection::EMPTY;
    }
    let degenerate = ea.abs() <= tol || eb.abs() <= tol || den.abs() <= 2.0 * tol;
    PairIntersection { dim: 0, measure: 1.0, finite: true, degenerate }
}

/// Line of intersection of two non-parallel planes: `(point, unit direction)`.
fn plane_line(a: &Facet, b: &Facet) -> Option<(V3, V3)> {
    let w = cross(&a.normal, &b.normal);
    let w2 = dot(&w, &w);
    if w2 == 0.0 {
        return None;
    }
    let h1 = dot(&a.normal, &a.center);
    let h2 = dot(&b.normal, &b.center);
    let c = dot(&a.normal, &b.normal);
    // unit normals: |n|^2 = 1
    let k1 = (h1 - h2 * c) / w2;
    let k2 = (h2 - h1 * c) / w2;
    let p0 = add(&scale(&a.normal, k1), &scale(&b.normal, k2));
    Some((p0, scale(&w, 1.0 / libm::sqrt(w2))))
}

/// Chord of a disc along a line in its plane: `Some((mid, half, tangent))`.
fn chord(f: &Facet, p0: &V3, e: &V3, tol: f64) -> Option<(f64, f64, bool)> {
    let q = sub(&f.center, p0);
    let t = dot(&q, e);
    let foot = sub(&q, &scale(e, t));
    let dist = norm(&foot);
    if dist > f.radius + tol {
        return None;
    }
    let tangent = (dist - f.radius).abs() <= tol;
    let half = libm::sqrt((f.radius * f.radius - dist * dist).max(0.0));
    Some((t, half, tangent))
}

fn pair_3d(a: &Facet, b: &Facet, tol: f64) -> PairIntersection {
    let w = cross(&a.normal, &b.normal);
    if norm(&w) <= tol {
        let off = dot(&sub(&b.center, &a.center), &a.normal);
        if off.abs() > tol {
            return PairIntersection::EMPTY;
        }
        let d = norm(&sub(&b.center, &a.center));
        let gap = d - (a.radius + b.radius);
        return if gap > tol {
            PairIntersection::EMPTY
        } else if gap >= -tol {
            PairIntersection { dim: 0, measure: 0.0, finite: true, degenerate: true }
        } else {
            PairIntersection { dim: 2, measure: f64::INFINITY, finite: false, degenerate: false }
        };
    }
    let (p0, e) = plane_line(a, b).expect("planes are not parallel");
    let (Some((ta, ha, tga)), Some((tb, hb, tgb))) = (chord(a, &p0, &e, tol), chord(b, &p0, &e, tol)) else {
        return PairIntersection::EMPTY;
    };
    match interval_overlap(ta, ha, tb, hb, tol) {
        None => PairIntersection::EMPTY,
        Some((_, true)) => PairIntersection { dim: 0, measure: 0.0, finite: true, degenerate: true },
        Some((len, false)) => {
            PairIntersection { dim: 1, measure: len, finite: true, degenerate: tga || tgb || norm(&w) <= 2.0 * tol }
        }
    }
}

/// `ℍ^0` of the intersection of three discs in space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleIntersection {
    pub count: u8,
    pub finite: bool,
    pub degenerate: bool,
}

impl TripleIntersection {
    const EMPTY: TripleIntersection = TripleIntersection { count: 0, finite: true, degenerate: false };
    const INFINITE: TripleIntersection = TripleIntersection { count: 0, finite: false, degenerate: false };

    pub fn contribution(&self) -> f64 {
        if self.finite && !self.degenerate {
            self.count as f64
        } else {
            0.0
        }
    }
}

/// Position of the in-plane point `p` relative to disc `f`:
/// `Some(false)` strictly inside, `Some(true)` on the boundary band, `None` outside.
fn point_in_disc(f: &Facet, p: &V3, tol: f64) -> Option<bool> {
    let gap = norm(&sub(p, &f.center)) - f.radius;
    if gap > tol {
        None
    } else {
        Some(gap >= -tol)
    }
}

/// Three-way overlap of chords along one line.
fn triple_on_line(fs: [&Facet; 3], p0: &V3, e: &V3, tol: f64) -> TripleIntersection {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for f in fs {
        let Some((t, h, _)) = chord(f, p0, e, tol) else {
            return TripleIntersection::EMPTY;
        };
        lo = lo.max(t - h);
        hi = hi.min(t + h);
    }
    let len = hi - lo;
    if len > tol {
        TripleIntersection::INFINITE
    } else if len >= -tol {
        TripleIntersection { count: 1, finite: true, degenerate: true }
    } else {
        TripleIntersection::EMPTY
    }
}

fn same_plane(a: &Facet, b: &Facet, tol: f64) -> bool {
    norm(&cross(&a.normal, &b.normal)) <= tol && dot(&sub(&b.center, &a.center), &a.normal).abs() <= tol
}

/// Three coplanar discs: the common intersection has interior, is a single
/// touching point, or is empty. Candidates are the centres and the pairwise
/// circle intersection points.
fn triple_coplanar(fs: [&Facet; 3], tol: f64) -> TripleIntersection {
    let mut candidates: Vec<V3> = fs.iter().map(|f| f.center).collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (fs[i], fs[j]);
            let dv = sub(&b.center, &a.center);
            let d = norm(&dv);
            if d == 0.0 || d > a.radius + b.radius + tol || d < (a.radius - b.radius).abs() - tol {
                continue;
            }
            let x = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
            let y = libm::sqrt((a.radius * a.radius - x * x).max(0.0));
            let ex = scale(&dv, 1.0 / d);
            let ey = cross(&a.normal, &ex);
            let base = add(&a.center, &scale(&ex, x));
            candidates.push(add(&base, &scale(&ey, y)));
            candidates.push(sub(&base, &scale(&ey, y)));
        }
    }
    let mut touching = false;
    for c in &candidates {
        let verdicts: Vec<Option<bool>> = fs.iter().map(|f| point_in_disc(f, c, tol)).collect();
        if verdicts.iter().all(|v| v.is_some()) {
            if verdicts.iter().all(|v| *v == Some(false)) {
                return TripleIntersection::INFINITE;
            }
            touching = true;
        }
    }
    if touching {
        // a lens of positive width has interior points away from every boundary
        // only if some candidate is strictly inside; otherwise treat as knife edge
        TripleIntersection { count: 1, finite: true, degenerate: true }
    } else {
        TripleIntersection::EMPTY
    }
}

pub fn triple_intersection_h0(f1: &Facet, f2: &Facet, f3: &Facet, tol: f64) -> TripleIntersection {
    let mut fs = [f1, f2, f3];
    fs.sort_by(|a, b| a.key_cmp(b));
    for i in 0..3 {
        for j in i + 1..3 {
            if pair_3d(fs[i], fs[j], tol).dim < 0 {
                return TripleIntersection::EMPTY;
            }
        }
    }
    let coplanar = [(0, 1, 2), (0, 2, 1), (1, 2, 0)].into_iter().find(|&(i, j, _)| same_plane(fs[i], fs[j], tol));
    if let Some((i, _, k)) = coplanar {
        if same_plane(fs[i], fs[k], tol) {
            return triple_coplanar(fs, tol);
        }
        // the third plane cuts the common plane in a line
        let (p0, e) = plane_line(fs[i], fs[k]).expect("distinct planes");
        return triple_on_line(fs, &p0, &e, tol);
    }
    let (p0, e) = plane_line(fs[0], fs[1]).expect("not parallel");
    let c = dot(&fs[2].normal, &e);
    let h3 = dot(&fs[2].normal, &fs[2].center);
    let r = h3 - dot(&fs[2].normal, &p0);
    if c.abs() <= tol {
        if r.abs() > tol {
            return TripleIntersection::EMPTY;
        }
        // three planes through one line
        return triple_on_line(fs, &p0, &e, tol);
    }
    let p = add(&p0, &scale(&e, r / c));
    let mut degenerate = c.abs() <= 2.0 * tol;
    for f in fs {
        match point_in_disc(f, &p, tol) {
            None => return TripleIntersection::EMPTY,
            Some(edge) => degenerate |= edge,
        }
    }
    TripleIntersection { count: 1, finite: true, degenerate }
}

/// Coefficients `a_2, …, a_d` and the degeneracy tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetEnergyModel {
    pub dim: usize,
    pub coefficients: Vec<f64>,
    pub tolerance: f64,
}

impl FacetEnergyModel {
    pub fn new(dim: usize, coefficients: Vec<f64>) -> Result<Self, FacetError> {
        let m = FacetEnergyModel { dim, coefficients, tolerance: DEFAULT_TOLERANCE };
        m.validate()?;
        Ok(m)
    }

    pub fn planar(a2: f64) -> Self {
        FacetEnergyModel { dim: 2, coefficients: alloc::vec![a2], tolerance: DEFAULT_TOLERANCE }
    }

    pub fn validate(&self) -> Result<(), FacetError> {
        if !(2..=3).contains(&self.dim) {
            return Err(FacetError::Dimension);
        }
        if self.coefficients.len() != self.dim - 1 {
            return Err(FacetError::Coefficients { expected: self.dim - 1, got: self.coefficients.len() });
        }
        Ok(())
    }

    fn a2(&self) -> f64 {
        self.coefficients[0]
    }

    fn a3(&self) -> f64 {
        self.coefficients.get(1).copied().unwrap_or(0.0)
    }
}

/// `H` on a list of facets.
pub fn facet_energy_of(fs: &[Facet], model: &FacetEnergyModel) -> f64 {
    let (a2, a3) = (model.a2(), model.a3());
    let mut h = 0.0;
    if a2 != 0.0 {
        let mut s = 0.0;
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                s += pair_intersection(&fs[i], &fs[j], model.tolerance).contribution();
            }
        }
        h += a2 * s;
    }
    if model.dim == 3 && a3 != 0.0 {
        let mut s = 0.0;
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                for k in j + 1..fs.len() {
                    s += triple_intersection_h0(&fs[i], &fs[j], &fs[k], model.tolerance).contribution();
                }
            }
        }
        h += a3 * s;
    }
    h
}

pub fn facet_energy(gamma: &Configuration, model: &FacetEnergyModel) -> Result<f64, FacetError> {
    model.validate()?;
    if gamma.dim() != model.dim {
        return Err(FacetError::Dimension);
    }
    Ok(facet_energy_of(&facets_of(gamma)?, model))
}

/// `H(γ ∪ {f}) - H(γ)` for facets `others` of `γ`.
pub fn insertion_delta(others: &[Facet], f: &Facet, model: &FacetEnergyModel) -> f64 {
    let (a2, a3) = (model.a2(), model.a3());
    let mut h = 0.0;
    if a2 != 0.0 {
        let s: f64 = others.iter().map(|g| pair_intersection(f, g, model.tolerance).contribution()).sum();
        h += a2 * s;
    }
    if model.dim == 3 && a3 != 0.0 {
        let mut s = 0.0;
        for i in 0..others.len() {
            if pair_intersection(f, &others[i], model.tolerance).dim < 0 {
                continue;
            }
            for j in i + 1..others.len() {
                s += triple_intersection_h0(f, &others[i], &others[j], model.tolerance).contribution();
            }
        }
        h += a3 * s;
    }
    h
}

/// Range radius `τ(m, l0, Λ)`:
/// `l1 = min{l : Λ ⊕ B(0,m) ⊂ U(0,l)}`, `l2 = max(l0, l1)`,
/// `τ = min{k >= 1 : U(0, 2 l2 + 1) ⊂ Λ ⊕ B(0,k)}`. `Λ` is taken closed.
pub fn compute_tau(mark_sup: f64, l0: u64, window: &Window) -> Result<u64, FacetError> {
    let far = window.farthest_norm();
    let inner = window.min_support();
    if !far.is_finite() || !inner.is_finite() || !mark_sup.is_finite() {
        return Err(FacetError::Unbounded);
    }
    let l1 = (libm::floor(far + mark_sup) as u64 + 1).max(1);
    let l2 = l0.max(l1);
    let r = (2 * l2 + 1) as f64;
    // U(0,r) ⊂ K ⊕ B(0,k)  iff  r <= h_K(u) + k for all unit u
    Ok((libm::ceil(r - inner).max(1.0)) as u64)
}

/// `H(γ_W) - H(γ_W ∖ γ_Λ)` for `W = Λ ⊕ B(0, radius)`.
pub fn truncated_conditional_energy(
    inner: &Configuration,
    boundary: &Configuration,
    window: &Window,
    radius: f64,
    model: &FacetEnergyModel,
) -> Result<f64, FacetError> {
    let mut fs: Vec<Facet> = facets_of(inner)?;
    let n_inner = fs.len();
    for p in boundary {
        if window.dist_to(&p.loc) <= radius {
            fs.push(facet_of(p, boundary.dim())?);
        }
    }
    let outer = &fs[n_inner..];
    Ok(facet_energy_of(&fs, model) - facet_energy_of(outer, model))
}

/// Conditional energy of `inner` (in `Λ`) given the boundary `ξ` (outside
/// `Λ`), truncated at `τ(m(inner), l0, Λ)`.
pub fn conditional_energy_facet(
    inner: &Configuration,
    boundary: &Configuration,
    window: &Window,
    l0: u64,
    model: &FacetEnergyModel,
) -> Result<f64, FacetError> {
    model.validate()?;
    if inner.iter().any(|p| !window.contains(&p.loc)) {
        return Err(FacetError::InnerOutsideWindow);
    }
    if boundary.iter().any(|p| window.contains(&p.loc)) {
        return Err(FacetError::BoundaryInsideWindow);
    }
    let k_max = crate::config::mbar_vacuous_from(boundary).max(l0);
    if !crate::config::in_mbar_l(boundary, l0, k_max) {
        return Err(FacetError::BoundaryNotTempered(l0));
    }
    let tau = compute_tau(mark_sup(inner), l0, window)?;
    truncated_conditional_energy(inner, boundary, window, tau as f64, model)
}

/// `H(γ_{Λ_n}) - H(γ_{Λ_n ∖ Λ})` for the centred cube `Λ_n`.
pub fn windowed_conditional_energy(
    inner: &Configuration,
    boundary: &Configuration,
    n: f64,
    model: &FacetEnergyModel,
) -> Result<f64, FacetError> {
    let cube = Window::cube(n, inner.dim());
    let outer = restrict(boundary, &cube);
    let all: Vec<Facet> = facets_of(inner)?.into_iter().chain(facets_of(&outer)?).collect();
    Ok(facet_energy_of(&all, model) - facet_energy_of(&all[inner.len()..], model))
}
