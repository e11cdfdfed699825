//! Marked points, finite configurations and the tempered-set machinery.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::vec::{norm, V3};
use crate::window::Window;

/// Tolerance on the length of a facet normal.
pub const NORMAL_TOLERANCE: f64 = 1e-12;

/// A mark: a flat facet `(n, R)` or a Laguerre weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mark {
    /// Unit normal in the upper hemisphere and a radius.
    Facet { normal: V3, radius: f64 },
    Weight(f64),
}

impl Mark {
    /// Euclidean norm of the mark: `sqrt(1 + R^2)` for a facet, the weight
    /// itself for a Laguerre mark.
    pub fn norm(&self) -> f64 {
        match self {
            Mark::Facet { radius, .. } => libm::sqrt(1.0 + radius * radius),
            Mark::Weight(w) => *w,
        }
    }

    pub fn is_facet(&self) -> bool {
        matches!(self, Mark::Facet { .. })
    }

    pub fn weight(&self) -> Option<f64> {
        match self {
            Mark::Weight(w) => Some(*w),
            _ => None,
        }
    }
}

/// True if `n` (first `dim` coordinates) lies in the upper hemisphere: the
/// first nonzero coordinate is strictly positive.
pub fn in_upper_hemisphere(n: &V3, dim: usize) -> bool {
    for &c in &n[..dim] {
        if c > 0.0 {
            return true;
        }
        if c < 0.0 {
            return false;
        }
    }
    false
}

/// Flip a nonzero vector into the upper hemisphere.
pub fn to_upper_hemisphere(n: V3, dim: usize) -> V3 {
    if in_upper_hemisphere(&n, dim) {
        n
    } else {
        [-n[0], -n[1], -n[2]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkedPoint {
    pub loc: V3,
    pub mark: Mark,
}

impl MarkedPoint {
    pub fn weighted(loc: &[f64], w: f64) -> Self {
        let mut l = [0.0; 3];
        l[..loc.len()].copy_from_slice(loc);
        MarkedPoint { loc: l, mark: Mark::Weight(w) }
    }

    pub fn facet(loc: &[f64], normal: &[f64], radius: f64) -> Self {
        let mut l = [0.0; 3];
        l[..loc.len()].copy_from_slice(loc);
        let mut n = [0.0; 3];
        n[..normal.len()].copy_from_slice(normal);
        MarkedPoint { loc: l, mark: Mark::Facet { normal: n, radius } }
    }

    /// Validate the point for dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), ConfigError> {
        if self.loc[..dim].iter().any(|v| !v.is_finite()) || self.loc[dim..].iter().any(|&v| v != 0.0) {
            return Err(ConfigError::BadLocation);
        }
        match self.mark {
            Mark::Weight(w) => {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(ConfigError::BadMark("weight must be positive and finite"));
                }
            }
            Mark::Facet { normal, radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(ConfigError::BadMark("radius must be positive and finite"));
                }
                if normal[dim..].iter().any(|&v| v != 0.0) || normal.iter().any(|v| !v.is_finite()) {
                    return Err(ConfigError::BadMark("normal has wrong dimension"));
                }
                if (norm(&normal) - 1.0).abs() > NORMAL_TOLERANCE {
                    return Err(ConfigError::BadMark("normal is not a unit vector"));
                }
                if !in_upper_hemisphere(&normal, dim) {
                    return Err(ConfigError::BadMark("normal is not in the upper hemisphere"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("location is not finite or has the wrong dimension")]
    BadLocation,
    #[error("invalid mark: {0}")]
    BadMark(&'static str),
    #[error("two points share a location")]
    Duplicate,
    #[error("dimensions of the operands differ")]
    DimensionMismatch,
    #[error("l_max = {l_max} does not cover the configuration (needs at least {needed})")]
    ExtentNotCovered { l_max: u64, needed: u64 },
    #[error("this formula is only available for d = 2")]
    OnlyPlanar,
    #[error("parameter out of range: {0}")]
    Parameter(&'static str),
}

fn lex_cmp(a: &V3, b: &V3, dim: usize) -> Ordering {
    for i in 0..dim {
        match a[i].total_cmp(&b[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// A finite simple configuration, kept in lexicographic order of locations.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    points: Vec<MarkedPoint>,
}

impl Configuration {
    pub fn empty(dim: usize) -> Self {
        Configuration { dim, points: Vec::new() }
    }

    pub fn from_points(dim: usize, mut points: Vec<MarkedPoint>) -> Result<Self, ConfigError> {
        if !(2..=3).contains(&dim) {
            return Err(ConfigError::Dimension(dim));
        }
        for p in &points {
            p.validate(dim)?;
        }
        points.sort_by(|a, b| lex_cmp(&a.loc, &b.loc, dim));
        if points.windows(2).any(|w| lex_cmp(&w[0].loc, &w[1].loc, dim) == Ordering::Equal) {
            return Err(ConfigError::Duplicate);
        }
        Ok(Configuration { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn iter(&self) -> core::slice::Iter<'_, MarkedPoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<MarkedPoint> {
        self.points
    }

    /// Index of the point at `loc`, if any.
    pub fn find(&self, loc: &V3) -> Option<usize> {
        self.points.binary_search_by(|p| lex_cmp(&p.loc, loc, self.dim)).ok()
    }

    /// Insert a point, keeping canonical order. Returns its index.
    pub fn insert(&mut self, p: MarkedPoint) -> Result<usize, ConfigError> {
        p.validate(self.dim)?;
        match self.points.binary_search_by(|q| lex_cmp(&q.loc, &p.loc, self.dim)) {
            Ok(_) => Err(ConfigError::Duplicate),
            Err(i) => {
                self.points.insert(i, p);
                Ok(i)
            }
        }
    }

    pub fn remove(&mut self, index: usize) -> MarkedPoint {
        self.points.remove(index)
    }

    /// Union of two configurations on disjoint location sets.
    pub fn union(&self, other: &Configuration) -> Result<Configuration, ConfigError> {
        if self.dim != other.dim {
            return Err(ConfigError::DimensionMismatch);
        }
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Configuration::from_points(self.dim, pts)
    }

    /// Points satisfying a predicate.
    pub fn filter(&self, mut keep: impl FnMut(&MarkedPoint) -> bool) -> Configuration {
        Configuration { dim: self.dim, points: self.points.iter().filter(|p| keep(p)).copied().collect() }
    }

    /// Shift every location by `c`.
    pub fn translate(&self, c: &[f64]) -> Configuration {
        let mut pts = self.points.clone();
        for p in &mut pts {
            for (l, d) in p.loc[..self.dim].iter_mut().zip(c) {
                *l += d;
            }
        }
        // translation can merge locations only through rounding; keep order canonical
        pts.sort_by(|a, b| lex_cmp(&a.loc, &b.loc, self.dim));
        Configuration { dim: self.dim, points: pts }
    }

    /// Largest distance of a location from the origin (0 for the empty set).
    pub fn max_location_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(&p.loc)).fold(0.0, f64::max)
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a MarkedPoint;
    type IntoIter = core::slice::Iter<'a, MarkedPoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// The points of `gamma` lying in `w`.
pub fn restrict(gamma: &Configuration, w: &Window) -> Configuration {
    gamma.filter(|p| w.contains(&p.loc))
}

/// Supremum of mark norms; 0 for the empty configuration.
pub fn mark_sup(gamma: &Configuration) -> f64 {
    gamma.iter().map(|p| p.mark.norm()).fold(0.0, f64::max)
}

/// `sum (1 + |m|^(d + delta))`.
pub fn weighted_count(gamma: &Configuration, d: usize, delta: f64) -> f64 {
    gamma.iter().map(|p| 1.0 + libm::pow(p.mark.norm(), d as f64 + delta)).sum()
}

/// Open ball `U(0, l)`.
pub fn open_ball(l: f64, dim: usize) -> Window {
    Window::Ball { dim, center: [0.0; 3], radius: l, closed: false }
}

/// Smallest integer `l >= 1` with every location and every ball
/// `B(x, |m|)` inside `U(0, l)`.
pub fn extent(gamma: &Configuration) -> u64 {
    let r = gamma.iter().map(|p| norm(&p.loc) + p.mark.norm()).fold(0.0, f64::max);
    (libm::floor(r) as u64 + 1).max(1)
}

/// Smallest `t` in `1..=t_cap` with `weighted_count(gamma restricted to
/// U(0,l)) <= t l^d` for all `l` in `1..=l_max`; `None` if no such `t`.
pub fn temperedness_level(
    gamma: &Configuration,
    delta: f64,
    l_max: u64,
    t_cap: u64,
) -> Result<Option<u64>, ConfigError> {
    if !(delta > 0.0) {
        return Err(ConfigError::Parameter("delta must be positive"));
    }
    let needed = extent(gamma);
    if l_max < needed {
        return Err(ConfigError::ExtentNotCovered { l_max, needed });
    }
    let d = gamma.dim();
    // sort contributions by distance once, then sweep l upward
    let mut items: Vec<(f64, f64)> = gamma
        .iter()
        .map(|p| (norm(&p.loc), 1.0 + libm::pow(p.mark.norm(), d as f64 + delta)))
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut need = 0.0f64;
    let mut acc = 0.0;
    let mut j = 0;
    for l in 1..=l_max {
        let lf = l as f64;
        while j < items.len() && items[j].0 < lf {
            acc += items[j].1;
            j += 1;
        }
        need = need.max(acc / libm::pow(lf, d as f64));
    }
    let t = (libm::ceil(need) as u64).max(1);
    Ok(if t <= t_cap { Some(t) } else { None })
}

/// `l(t) = (1/2) t^(1/delta) 2^((2+delta)/delta)`, the radius beyond which
/// property (1) holds for `M^t`. Planar only.
pub fn l_of_t(t: u64, delta: f64, d: usize) -> Result<f64, ConfigError> {
    if d != 2 {
        return Err(ConfigError::OnlyPlanar);
    }
    if t < 1 || !(delta > 0.0) {
        return Err(ConfigError::Parameter("need t >= 1 and delta > 0"));
    }
    Ok(0.5 * libm::pow(t as f64, 1.0 / delta) * libm::pow(2.0, (2.0 + delta) / delta))
}

/// Checks membership in `M̄_l` over `k` in `l..=k_max`: every point outside
/// `U(0, 2k+1)` must have `B(x, |m|)` disjoint from `U(0, k)`, that is
/// `|x| - |m| >= k`.
pub fn in_mbar_l(gamma: &Configuration, l: u64, k_max: u64) -> bool {
    gamma.iter().all(|p| {
        let r = norm(&p.loc);
        let m = p.mark.norm();
        // the constraint binds for k < (r - 1) / 2, the tightest k is the largest one
        (l..=k_max).rev().filter(|&k| r >= (2 * k + 1) as f64).take(1).all(|k| r - m >= k as f64)
    })
}

/// `k_max` beyond which the `M̄_l` condition is vacuous for a finite
/// configuration (no point lies outside `U(0, 2k+1)`).
pub fn mbar_vacuous_from(gamma: &Configuration) -> u64 {
    let r = gamma.max_location_norm();
    (libm::ceil(r / 2.0) as u64).max(1)
}

/// Property (1): for every `l` in `l_range` with `l >= l(t)`, each point
/// outside `U(0, 2l+1)` has its mark ball disjoint from `U(0, l)`.
pub fn verify_tempered_growth(
    gamma: &Configuration,
    t: u64,
    delta: f64,
    l_range: core::ops::RangeInclusive<u64>,
) -> Result<bool, ConfigError> {
    let lt = l_of_t(t, delta, gamma.dim())?;
    Ok(l_range.filter(|&l| l as f64 >= lt).all(|l| {
        gamma.iter().all(|p| {
            let r = norm(&p.loc);
            r < (2 * l + 1) as f64 || r - p.mark.norm() >= l as f64
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fixture() -> Configuration {
        Configuration::from_points(
            2,
            vec![MarkedPoint::weighted(&[150.0, 150.0], 43.0), MarkedPoint::weighted(&[120.0, 120.0], 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn canonical_order_and_simplicity() {
        let g = fixture();
        assert_eq!(g.points()[0].loc[0], 120.0);
        let dup = Configuration::from_points(
            2,
            vec![MarkedPoint::weighted(&[1.0, 1.0], 1.0), MarkedPoint::weighted(&[1.0, 1.0], 2.0)],
        );
        assert_eq!(dup, Err(ConfigError::Duplicate));
    }

    #[test]
    fn rejects_lower_hemisphere_normal() {
        let p = MarkedPoint::facet(&[0.0, 0.0], &[-1.0, 0.0], 1.0);
        assert!(p.validate(2).is_err());
        let q = MarkedPoint::facet(&[0.0, 0.0], &[0.0, 1.0], 1.0);
        assert!(q.validate(2).is_ok());
    }

    #[test]
    fn mark_norms() {
        assert_eq!(mark_sup(&Configuration::empty(2)), 0.0);
        let p = MarkedPoint::facet(&[0.0, 0.0], &[0.0, 1.0], 43.0);
        assert_eq!(p.mark.norm(), libm::sqrt(1.0 + 43.0 * 43.0));
    }

    #[test]
    fn l_of_t_values() {
        assert_eq!(l_of_t(1, 0.5, 2).unwrap(), 16.0);
        assert_eq!(l_of_t(2, 0.5, 2).unwrap(), 64.0);
        assert_eq!(l_of_t(1, 1.0, 2).unwrap(), 4.0);
        assert!(l_of_t(1, 0.5, 3).is_err());
    }

    #[test]
    fn fixture_is_tempered_at_level_one() {
        assert_eq!(temperedness_level(&fixture(), 0.5, 256, 100).unwrap(), Some(1));
        assert_eq!(temperedness_level(&Configuration::empty(2), 0.5, 1, 100).unwrap(), Some(1));
        assert!(temperedness_level(&fixture(), 0.5, 100, 100).is_err());
    }

    #[test]
    fn far_heavy_point_not_in_mbar() {
        let g = Configuration::from_points(2, vec![MarkedPoint::weighted(&[100.0, 0.0], 99.0)]).unwrap();
        assert!(!in_mbar_l(&g, 5, 60));
        assert!(in_mbar_l(&Configuration::empty(2), 5, 60));
    }
}
