//! Bounded observation windows.

use crate::rng::CounterRng;
use crate::vec::{norm, sub, V3};

/// A bounded window in dimension 2 or 3.
///
/// `Box` is half-open, `[lower, upper)` per coordinate; a box with
/// `lower == upper` in every coordinate is allowed and denotes the single
/// point `lower` (its closure). `Ball` is open or closed.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    Box { dim: usize, lower: V3, upper: V3 },
    Ball { dim: usize, center: V3, radius: f64, closed: bool },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("window coordinates must be finite")]
    NonFinite,
    #[error("box must satisfy lower < upper in every coordinate (or be a single point)")]
    Inverted,
    #[error("ball radius must be positive")]
    Radius,
}

fn pad(dim: usize, v: &[f64]) -> V3 {
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(&v[..dim]);
    out
}

impl Window {
    /// The centred cube `[-n, n)^d`.
    pub fn cube(n: f64, dim: usize) -> Self {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        for i in 0..dim {
            lower[i] = -n;
            upper[i] = n;
        }
        Window::Box { dim, lower, upper }
    }

    pub fn new_box(lower: &[f64], upper: &[f64]) -> Result<Self, WindowError> {
        let dim = lower.len();
        if !(2..=3).contains(&dim) || upper.len() != dim {
            return Err(WindowError::Dimension(dim));
        }
        if lower.iter().chain(upper).any(|v| !v.is_finite()) {
            return Err(WindowError::NonFinite);
        }
        let point = lower.iter().zip(upper).all(|(a, b)| a == b);
        if !point && lower.iter().zip(upper).any(|(a, b)| a >= b) {
            return Err(WindowError::Inverted);
        }
        Ok(Window::Box { dim, lower: pad(dim, lower), upper: pad(dim, upper) })
    }

    pub fn new_ball(center: &[f64], radius: f64, closed: bool) -> Result<Self, WindowError> {
        let dim = center.len();
        if !(2..=3).contains(&dim) {
            return Err(WindowError::Dimension(dim));
        }
        if center.iter().any(|v| !v.is_finite()) || !radius.is_finite() {
            return Err(WindowError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(WindowError::Radius);
        }
        Ok(Window::Ball { dim, center: pad(dim, center), radius, closed })
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { dim, .. } | Window::Ball { dim, .. } => *dim,
        }
    }

    fn is_point_box(&self) -> bool {
        matches!(self, Window::Box { dim, lower, upper } if (0..*dim).all(|i| lower[i] == upper[i]))
    }

    pub fn contains(&self, x: &V3) -> bool {
        match self {
            Window::Box { dim, lower, upper } => {
                if self.is_point_box() {
                    return (0..*dim).all(|i| x[i] == lower[i]);
                }
                (0..*dim).all(|i| x[i] >= lower[i] && x[i] < upper[i])
            }
            Window::Ball { center, radius, closed, .. } => {
                let d = norm(&sub(x, center));
                if *closed {
                    d <= *radius
                } else {
                    d < *radius
                }
            }
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { dim, lower, upper } => (0..*dim).map(|i| upper[i] - lower[i]).product(),
            Window::Ball { dim, radius, .. } => {
                let pi = core::f64::consts::PI;
                if *dim == 2 {
                    pi * radius * radius
                } else {
                    4.0 / 3.0 * pi * radius * radius * radius
                }
            }
        }
    }

    /// Euclidean distance from `x` to the closure of the window.
    pub fn dist_to(&self, x: &V3) -> f64 {
        match self {
            Window::Box { dim, lower, upper } => {
                let mut s = 0.0;
                for i in 0..*dim {
                    let d = if x[i] < lower[i] {
                        lower[i] - x[i]
                    } else if x[i] > upper[i] {
                        x[i] - upper[i]
                    } else {
                        0.0
                    };
                    s += d * d;
                }
                libm::sqrt(s)
            }
            Window::Ball { center, radius, .. } => (norm(&sub(x, center)) - radius).max(0.0),
        }
    }

    /// `max |x|` over the closure.
    pub fn farthest_norm(&self) -> f64 {
        match self {
            Window::Box { dim, lower, upper } => {
                let mut s = 0.0;
                for i in 0..*dim {
                    let m = lower[i].abs().max(upper[i].abs());
                    s += m * m;
                }
                libm::sqrt(s)
            }
            Window::Ball { center, radius, .. } => norm(center) + radius,
        }
    }

    /// `min_{|u|=1} h(u)` where `h` is the support function of the closure.
    /// Positive iff the origin is interior; then it is the inradius about 0.
    pub fn min_support(&self) -> f64 {
        match self {
            Window::Box { dim, lower, upper } => {
                let inside = (0..*dim).all(|i| lower[i] <= 0.0 && 0.0 <= upper[i]);
                if inside {
                    (0..*dim).map(|i| upper[i].min(-lower[i])).fold(f64::INFINITY, f64::min)
                } else {
                    -self.dist_to(&[0.0; 3])
                }
            }
            Window::Ball { center, radius, .. } => radius - norm(center),
        }
    }

    /// Axis-aligned bounding box of the closure.
    pub fn bounds(&self) -> (V3, V3) {
        match self {
            Window::Box { lower, upper, .. } => (*lower, *upper),
            Window::Ball { dim, center, radius, .. } => {
                let mut lo = *center;
                let mut hi = *center;
                for i in 0..*dim {
                    lo[i] -= radius;
                    hi[i] += radius;
                }
                (lo, hi)
            }
        }
    }

    /// Diameter of the closure.
    pub fn diameter(&self) -> f64 {
        match self {
            Window::Box { lower, upper, .. } => norm(&sub(upper, lower)),
            Window::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Whether the closure of `self` lies inside `other` (closure-wise).
    pub fn closure_within(&self, other: &Window) -> bool {
        let (lo, hi) = self.bounds();
        let dim = self.dim();
        match (self, other) {
            (_, Window::Box { lower, upper, .. }) => {
                (0..dim).all(|i| lo[i] >= lower[i] && hi[i] <= upper[i])
            }
            (Window::Ball { center, radius, .. }, Window::Ball { center: c2, radius: r2, .. }) => {
                norm(&sub(center, c2)) + radius <= *r2
            }
            (Window::Box { .. }, Window::Ball { center, radius, .. }) => {
                // farthest corner from the ball centre
                let mut s = 0.0;
                for i in 0..dim {
                    let m = (lo[i] - center[i]).abs().max((hi[i] - center[i]).abs());
                    s += m * m;
                }
                libm::sqrt(s) <= *radius
            }
        }
    }

    /// Uniform point in the window.
    pub fn sample_uniform(&self, rng: &mut CounterRng) -> V3 {
        match self {
            Window::Box { dim, lower, upper } => {
                let mut x = [0.0; 3];
                for i in 0..*dim {
                    x[i] = rng.uniform_in(lower[i], upper[i]);
                    // rounding can land exactly on the open upper face
                    if x[i] >= upper[i] {
                        x[i] = lower[i];
                    }
                }
                x
            }
            Window::Ball { dim, center, radius, .. } => loop {
                let mut x = [0.0; 3];
                for v in &mut x[..*dim] {
                    *v = rng.uniform_in(-1.0, 1.0);
                }
                if norm(&x) < 1.0 {
                    let mut y = *center;
                    for i in 0..*dim {
                        y[i] += radius * x[i];
                    }
                    if self.contains(&y) {
                        return y;
                    }
                }
            },
        }
    }
}
