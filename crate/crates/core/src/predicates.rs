//! Exact sign predicates on binary floating-point input.
//!
//! Each predicate first evaluates in `f64` with an error bound; when the
//! result is too close to zero to trust, it is recomputed exactly with big
//! integers after scaling every input to a common binary exponent.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;

/// Decompose a finite `f64` as `mantissa · 2^exponent`.
fn decompose(v: f64) -> (i64, i32) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign: i64 = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    (sign * m, e)
}

/// Exact integers `X_i` with `v_i = X_i · 2^E` for a shared `E`.
fn to_common_scale(vals: &[f64]) -> Vec<BigInt> {
    let parts: Vec<(i64, i32)> = vals.iter().map(|&v| decompose(v)).collect();
    let e_min = parts.iter().filter(|p| p.0 != 0).map(|p| p.1).min().unwrap_or(0);
    parts.iter().map(|&(m, e)| BigInt::from(m) << ((e - e_min) as usize)).collect()
}

fn sign_of(v: &BigInt) -> Ordering {
    v.sign().cmp(&num_bigint::Sign::NoSign)
}

/// Sign of `(b - a) × (c - a)`: `Greater` for a counter-clockwise turn.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Ordering {
    let l = (b[0] - a[0]) * (c[1] - a[1]);
    let r = (b[1] - a[1]) * (c[0] - a[0]);
    let det = l - r;
    // Shewchuk's first-stage bound
    let bound = 3.330_669_073_875_471_6e-16 * (l.abs() + r.abs());
    if det.abs() > bound {
        return det.partial_cmp(&0.0).unwrap();
    }
    let x = to_common_scale(&[a[0], a[1], b[0], b[1], c[0], c[1]]);
    let det = (&x[2] - &x[0]) * (&x[5] - &x[1]) - (&x[3] - &x[1]) * (&x[4] - &x[0]);
    sign_of(&det)
}

/// Sign of the lifted determinant of four weighted points
/// `(x_i, y_i, x_i^2 + y_i^2 - w_i^2)`. Zero iff the lifted points are
/// coplanar, i.e. the four generators have a common power-equidistant
/// centre (or their nuclei are collinear with a degenerate lift).
pub fn lifted_orient(p: [[f64; 3]; 4]) -> Ordering {
    let s = |q: &[f64; 3]| q[0] * q[0] + q[1] * q[1] - q[2] * q[2];
    let mag = |q: &[f64; 3]| q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let mut rows = [[0.0f64; 3]; 3];
    let mut mags = [[0.0f64; 3]; 3];
    for i in 0..3 {
        let (q, o) = (&p[i + 1], &p[0]);
        rows[i] = [q[0] - o[0], q[1] - o[1], s(q) - s(o)];
        mags[i] = [(q[0] - o[0]).abs(), (q[1] - o[1]).abs(), mag(q) + mag(o)];
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let perm = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] + m[1][2] * m[2][1])
            + m[0][1] * (m[1][0] * m[2][2] + m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] + m[1][1] * m[2][0])
    };
    let det = det3(&rows);
    if det.abs() > 1e-12 * perm(&mags) {
        return det.partial_cmp(&0.0).unwrap();
    }
    let flat: Vec<f64> = p.iter().flat_map(|q| q.iter().copied()).collect();
    let x = to_common_scale(&flat);
    let lift = |i: usize| -> [BigInt; 3] {
        let (a, b, w) = (&x[3 * i], &x[3 * i + 1], &x[3 * i + 2]);
        [a.clone(), b.clone(), a * a + b * b - w * w]
    };
    let o = lift(0);
    let r: Vec<[BigInt; 3]> = (1..4)
        .map(|i| {
            let q = lift(i);
            [&q[0] - &o[0], &q[1] - &o[1], &q[2] - &o[2]]
        })
        .collect();
    let det = &r[0][0] * (&r[1][1] * &r[2][2] - &r[1][2] * &r[2][1])
        - &r[0][1] * (&r[1][0] * &r[2][2] - &r[1][2] * &r[2][0])
        + &r[0][2] * (&r[1][0] * &r[2][1] - &r[1][1] * &r[2][0]);
    sign_of(&det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_exact() {
        assert_eq!(orient2d([0.0, 0.0], [1.0, 0.0], [2.0, 0.0]), Ordering::Equal);
        assert_eq!(orient2d([0.1, 0.1], [0.2, 0.2], [0.3, 0.3]), Ordering::Equal);
        // decimal-collinear but not binary-collinear; sign checked with exact rationals
        assert_eq!(orient2d([0.1, 0.2], [0.3, 0.7], [0.5, 1.2]), Ordering::Less);
        assert_eq!(orient2d([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), Ordering::Greater);
    }

    #[test]
    fn near_collinear_resolved_exactly() {
        let e = f64::EPSILON;
        assert_eq!(orient2d([0.5, 0.5], [12.0, 12.0], [24.0, 24.0 + 24.0 * e]), Ordering::Greater);
    }

    #[test]
    fn cocircular_equal_weights() {
        let p = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]];
        assert_eq!(lifted_orient(p), Ordering::Equal);
        let q = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.5]];
        assert_ne!(lifted_orient(q), Ordering::Equal);
    }

    #[test]
    fn decompose_roundtrip() {
        for v in [1.0, -0.1, 3.5e-310, 1e300] {
            let (m, e) = decompose(v);
            assert_eq!(m as f64 * libm::pow(2.0, e as f64), v);
        }
    }
}
