use gibbs_geom_core::config::*;
use gibbs_geom_core::counterexample::*;
use gibbs_geom_core::facet::*;
use gibbs_geom_core::rng::CounterRng;
use gibbs_geom_core::window::Window;
use num_bigint::BigUint;
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}
fn cross2(a: V3, b: V3) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Unit vector spanning `A(n)` in the plane, by Gram–Schmidt from a coordinate axis.
fn gram_schmidt_2d(n: V3) -> V3 {
    let e = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let p = dot(e, n);
    let v = [e[0] - p * n[0], e[1] - p * n[1], 0.0];
    let l = norm(v);
    [v[0] / l, v[1] / l, 0.0]
}

const MARGIN: f64 = 1e-7;

#[derive(Debug, PartialEq)]
enum SegOracle {
    Cross,
    Disjoint,
    Overlap,
}

/// Parametric segment solver: `c1 + s t1 = c2 + u t2`. `None` near a tangency.
fn segment_oracle(f: &Facet, g: &Facet) -> Option<SegOracle> {
    let (t1, t2) = (gram_schmidt_2d(f.normal), gram_schmidt_2d(g.normal));
    let w = sub(g.center, f.center);
    let det = cross2(t1, t2);
    if det.abs() < 1e-12 {
        if cross2(w, t1).abs() > 1e-9 {
            return Some(SegOracle::Disjoint);
        }
        let c = dot(w, t1);
        let gap = c.abs() - (f.radius + g.radius);
        if gap.abs() < MARGIN {
            return None;
        }
        return Some(if gap < 0.0 { SegOracle::Overlap } else { SegOracle::Disjoint });
    }
    let s = cross2(w, t2) / det;
    let u = cross2(w, t1) / det;
    if (s.abs() - f.radius).abs() < MARGIN || (u.abs() - g.radius).abs() < MARGIN {
        return None;
    }
    Some(if s.abs() < f.radius && u.abs() < g.radius { SegOracle::Cross } else { SegOracle::Disjoint })
}

fn random_segment(rng: &mut CounterRng, half: f64, r: (f64, f64)) -> Facet {
    let th = rng.uniform_in(-PI / 2.0 + 1e-6, PI / 2.0);
    let c = [rng.uniform_in(-half, half), rng.uniform_in(-half, half)];
    facet_of(&MarkedPoint::facet(&c, &[th.cos(), th.sin()], rng.uniform_in(r.0, r.1)), 2).unwrap()
}

fn random_disc(rng: &mut CounterRng) -> Facet {
    let (a, b) = rng.normal_pair();
    let (c, _) = rng.normal_pair();
    let l = (a * a + b * b + c * c).sqrt();
    let mut n = [a / l, b / l, c / l];
    if n[0] < 0.0 {
        n = [-n[0], -n[1], -n[2]];
    }
    let x = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
    facet_of(&MarkedPoint::facet(&x, &n, rng.uniform_in(0.5, 2.0)), 3).unwrap()
}

/// Line `plane1 ∩ plane2` as `(p0, w)`.
fn plane_line(f: &Facet, g: &Facet) -> Option<(V3, V3)> {
    let w = cross(f.normal, g.normal);
    let det = dot(w, w);
    if det < 1e-10 {
        return None;
    }
    let (h1, h2) = (dot(f.normal, f.center), dot(g.normal, g.center));
    // p0 = (h1 (n2 × w) + h2 (w × n1)) / |w|^2 solves n1·p = h1, n2·p = h2, w·p = 0
    let a = cross(g.normal, w);
    let b = cross(w, f.normal);
    Some(([(h1 * a[0] + h2 * b[0]) / det, (h1 * a[1] + h2 * b[1]) / det, (h1 * a[2] + h2 * b[2]) / det], w))
}

/// Parameter interval of `p0 + t w` inside the disc.
fn disc_interval(f: &Facet, p0: V3, w: V3) -> Option<(f64, f64)> {
    let q = sub(p0, f.center);
    let (a, b, c) = (dot(w, w), 2.0 * dot(q, w), dot(q, q) - f.radius * f.radius);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((-b - r) / (2.0 * a), (-b + r) / (2.0 * a)))
}

fn triple_oracle(f: &Facet, g: &Facet, h: &Facet) -> Option<u8> {
    let (p0, w) = plane_line(f, g)?;
    let den = dot(h.normal, w);
    if den.abs() < 1e-6 {
        return None;
    }
    let t = (dot(h.normal, h.center) - dot(h.normal, p0)) / den;
    let p = [p0[0] + t * w[0], p0[1] + t * w[1], p0[2] + t * w[2]];
    let mut inside = true;
    for d in [f, g, h] {
        let gap = norm(sub(p, d.center)) - d.radius;
        if gap.abs() < MARGIN {
            return None;
        }
        inside &= gap < 0.0;
    }
    Some(inside as u8)
}

#[test]
fn facet_of_examples() {
    let f = facet_of(&MarkedPoint::facet(&[0.0, 0.0], &[0.0, 1.0], 1.0), 2).unwrap();
    let (a, b) = f.endpoints();
    let mut e = [a, b];
    e.sort_by(|x, y| x[0].total_cmp(&y[0]));
    assert_eq!(e, [[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
    let n = [0.6, 0.8];
    let f = facet_of(&MarkedPoint::facet(&[120.0, 120.0], &n, 1.0), 2).unwrap();
    let (a, b) = f.endpoints();
    assert!((norm(sub(a, b)) - 2.0).abs() < 1e-12);
    assert_eq!([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0], [120.0, 120.0]);
    assert!(facet_of(&MarkedPoint::weighted(&[0.0, 0.0], 1.0), 2).is_err());
}

#[test]
fn endpoints_match_gram_schmidt_basis() {
    let mut rng = CounterRng::new(11, 0);
    for _ in 0..200 {
        let f = random_segment(&mut rng, 5.0, (0.1, 3.0));
        let t = gram_schmidt_2d(f.normal);
        let p = [f.center[0] + f.radius * t[0], f.center[1] + f.radius * t[1], 0.0];
        let q = [f.center[0] - f.radius * t[0], f.center[1] - f.radius * t[1], 0.0];
        let (a, b) = f.endpoints();
        let d1 = norm(sub(a, p)).max(norm(sub(b, q)));
        let d2 = norm(sub(a, q)).max(norm(sub(b, p)));
        assert!(d1.min(d2) < 1e-12);
    }
}

#[test]
fn pair_trivial_cases() {
    let h = facet_of(&MarkedPoint::facet(&[0.0, 0.0], &[0.0, 1.0], 1.0), 2).unwrap();
    let v = facet_of(&MarkedPoint::facet(&[0.0, 0.0], &[1.0, 0.0], 1.0), 2).unwrap();
    let p = pair_intersection(&h, &v, DEFAULT_TOLERANCE);
    assert_eq!((p.dim, p.measure, p.finite), (0, 1.0, true));
    let h2 = facet_of(&MarkedPoint::facet(&[1.5, 0.0], &[0.0, 1.0], 1.0), 2).unwrap();
    let p = pair_intersection(&h, &h2, DEFAULT_TOLERANCE);
    assert_eq!((p.dim, p.finite, p.contribution()), (1, false, 0.0));
    let far = facet_of(&MarkedPoint::facet(&[0.0, 5.0], &[1.0, 0.0], 1.0), 2).unwrap();
    assert_eq!(pair_intersection(&h, &far, DEFAULT_TOLERANCE).dim, -1);
}

#[test]
fn pair_matches_parametric_solver() {
    let mut rng = CounterRng::new(3, 0);
    let (mut checked, mut crossings) = (0, 0);
    while checked < 100 {
        let f = random_segment(&mut rng, 2.0, (0.5, 2.0));
        let g = random_segment(&mut rng, 2.0, (0.5, 2.0));
        let Some(o) = segment_oracle(&f, &g) else { continue };
        let p = pair_intersection(&f, &g, DEFAULT_TOLERANCE);
        match o {
            SegOracle::Cross => {
                assert_eq!((p.dim, p.measure, p.finite, p.is_proper()), (0, 1.0, true, true));
                crossings += 1;
            }
            SegOracle::Disjoint => assert_eq!(p.contribution(), 0.0),
            SegOracle::Overlap => assert!(!p.finite),
        }
        checked += 1;
    }
    assert!(crossings > 10 && crossings < 90);
}

#[test]
fn chord_length_matches_line_oracle() {
    let mut rng = CounterRng::new(8, 0);
    let mut hits = 0;
    for _ in 0..300 {
        let (f, g) = (random_disc(&mut rng), random_disc(&mut rng));
        let Some((p0, w)) = plane_line(&f, &g) else { continue };
        let expected = match (disc_interval(&f, p0, w), disc_interval(&g, p0, w)) {
            (Some(a), Some(b)) => ((a.1.min(b.1) - a.0.max(b.0)).max(0.0)) * norm(w),
            _ => 0.0,
        };
        let p = pair_intersection(&f, &g, DEFAULT_TOLERANCE);
        if p.degenerate || (expected > 0.0 && expected < 1e-6) {
            continue;
        }
        assert!((p.contribution() - expected).abs() <= 1e-9, "{} vs {expected}", p.contribution());
        if expected > 0.0 {
            assert_eq!(p.dim, 1);
            hits += 1;
        }
    }
    assert!(hits > 20);
}

#[test]
fn triple_trivial_cases() {
    let mk = |c: [f64; 3], n: [f64; 3]| Facet { dim: 3, center: c, normal: n, radius: 1.0 };
    let o = [0.0; 3];
    let t = triple_intersection_h0(&mk(o, [1.0, 0.0, 0.0]), &mk(o, [0.0, 1.0, 0.0]), &mk(o, [0.0, 0.0, 1.0]), DEFAULT_TOLERANCE);
    assert_eq!((t.count, t.finite), (1, true));
    let n = [0.0, 0.0, 1.0];
    let t = triple_intersection_h0(&mk([0.0, 0.0, 0.0], n), &mk([0.0, 0.0, 1.0], n), &mk([0.0, 0.0, 2.0], n), DEFAULT_TOLERANCE);
    assert_eq!((t.count, t.finite), (0, true));
}

#[test]
fn triple_matches_line_plane_oracle() {
    let mut rng = CounterRng::new(21, 0);
    let (mut checked, mut ones) = (0, 0);
    while checked < 100 {
        let (f, g, h) = (random_disc(&mut rng), random_disc(&mut rng), random_disc(&mut rng));
        let Some(c) = triple_oracle(&f, &g, &h) else { continue };
        let t = triple_intersection_h0(&f, &g, &h, DEFAULT_TOLERANCE);
        assert!(t.finite);
        assert_eq!(t.contribution(), c as f64);
        ones += c as usize;
        checked += 1;
    }
    assert!(ones > 5);
}

#[test]
fn energy_matches_exhaustive_pair_oracle() {
    let model = FacetEnergyModel::planar(1.0);
    assert_eq!(facet_energy(&Configuration::empty(2), &model).unwrap(), 0.0);
    let mut rng = CounterRng::new(5, 0);
    let mut done = 0;
    while done < 30 {
        let fs: Vec<Facet> = (0..8).map(|_| random_segment(&mut rng, 2.0, (0.5, 2.0))).collect();
        let mut count = 0.0;
        let mut clean = true;
        for i in 0..8 {
            for j in i + 1..8 {
                match segment_oracle(&fs[i], &fs[j]) {
                    Some(SegOracle::Cross) => count += 1.0,
                    None => clean = false,
                    _ => {}
                }
            }
        }
        if !clean {
            continue;
        }
        let g = Configuration::from_points(2, fs.iter().map(|f| MarkedPoint::facet(&f.center[..2], &f.normal[..2], f.radius)).collect()).unwrap();
        assert_eq!(facet_energy(&g, &model).unwrap(), count);
        done += 1;
    }
}

#[test]
fn triple_energy_uses_unordered_triples() {
    let mut rng = CounterRng::new(17, 0);
    let fs: Vec<Facet> = (0..7).map(|_| random_disc(&mut rng)).collect();
    let mut count = 0.0;
    for i in 0..7 {
        for j in i + 1..7 {
            for k in j + 1..7 {
                count += triple_oracle(&fs[i], &fs[j], &fs[k]).expect("knife edge") as f64;
            }
        }
    }
    let model = FacetEnergyModel::new(3, vec![0.0, 1.0]).unwrap();
    assert_eq!(facet_energy_of(&fs, &model), count);
}

/// `τ` by scanning the two covering conditions directly.
fn tau_scan(mark: f64, l0: u64, lower: [f64; 2], upper: [f64; 2]) -> u64 {
    let corners = [[lower[0], lower[1]], [lower[0], upper[1]], [upper[0], lower[1]], [upper[0], upper[1]]];
    let l1 = (1..).find(|&l| corners.iter().all(|c| (c[0] * c[0] + c[1] * c[1]).sqrt() + mark < l as f64)).unwrap();
    let r = (2 * l0.max(l1) + 1) as f64;
    let dist = |p: [f64; 2]| {
        let dx = (lower[0] - p[0]).max(p[0] - upper[0]).max(0.0);
        let dy = (lower[1] - p[1]).max(p[1] - upper[1]).max(0.0);
        (dx * dx + dy * dy).sqrt()
    };
    // the open disc U(0,r) lies in the closed dilation iff its boundary circle does
    (1..).find(|&k| (0..4096).all(|i| {
        let a = i as f64 * 2.0 * PI / 4096.0;
        dist([r * a.cos(), r * a.sin()]) <= k as f64 + 1e-9
    })).unwrap()
}

#[test]
fn tau_examples() {
    let point = Window::new_box(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(compute_tau(0.0, 1, &point).unwrap(), 3);
    let l1 = Window::cube(1.0, 2);
    let expected = tau_scan(2.0, 16, [-1.0, -1.0], [1.0, 1.0]);
    assert_eq!(compute_tau(2.0, 16, &l1).unwrap(), expected);
    assert_eq!(expected, 32);
    let mut rng = CounterRng::new(1, 0);
    for _ in 0..20 {
        let lo = [rng.uniform_in(-3.0, 0.0), rng.uniform_in(-3.0, 0.0)];
        let hi = [lo[0] + rng.uniform_in(0.1, 3.0), lo[1] + rng.uniform_in(0.1, 3.0)];
        let m = rng.uniform_in(0.0, 10.0);
        let l0 = 1 + rng.below(20);
        let w = Window::new_box(&lo, &hi).unwrap();
        assert_eq!(compute_tau(m, l0, &w).unwrap(), tau_scan(m, l0, lo, hi));
    }
}

#[test]
fn tau_monotone_in_mark() {
    let mut rng = CounterRng::new(99, 0);
    let w = Window::cube(1.0, 2);
    for _ in 0..100 {
        let a = rng.uniform_in(0.0, 50.0);
        let b = a + rng.uniform_in(0.0, 50.0);
        assert!(compute_tau(a, 1, &w).unwrap() <= compute_tau(b, 1, &w).unwrap());
    }
}

fn flawed_range_fixture() -> (Configuration, Configuration, Window) {
    let inner = Configuration::from_points(2, vec![MarkedPoint::facet(&[120.0, 120.0], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1.0)]).unwrap();
    let outer = Configuration::from_points(2, vec![MarkedPoint::facet(&[150.0, 150.0], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], 43.0)]).unwrap();
    (inner, outer, Window::new_ball(&[120.0, 120.0], 0.5, true).unwrap())
}

#[test]
fn flawed_radius_misses_the_crossing() {
    let (inner, outer, lam) = flawed_range_fixture();
    let model = FacetEnergyModel::planar(1.0);
    let all = inner.union(&outer).unwrap();
    assert_eq!(facet_energy(&all, &model).unwrap(), 1.0);
    assert!(lam.dist_to(&outer.points()[0].loc) > 35.0);
    assert_eq!(truncated_conditional_energy(&inner, &outer, &lam, 35.0, &model).unwrap(), 0.0);
    assert_eq!(conditional_energy_facet(&inner, &outer, &lam, 16, &model).unwrap(), 1.0);
    assert_eq!(windowed_conditional_energy(&inner, &outer, 1000.0, &model).unwrap(), 1.0);
}

#[test]
fn empty_boundary_gives_plain_energy() {
    let mut rng = CounterRng::new(6, 0);
    let model = FacetEnergyModel::planar(1.0);
    let pts: Vec<_> = (0..6).map(|_| {
        let f = random_segment(&mut rng, 0.99, (0.2, 1.0));
        MarkedPoint::facet(&f.center[..2], &f.normal[..2], f.radius)
    }).collect();
    let g = Configuration::from_points(2, pts).unwrap();
    let w = Window::cube(1.0, 2);
    assert_eq!(conditional_energy_facet(&g, &Configuration::empty(2), &w, 1, &model).unwrap(), facet_energy(&g, &model).unwrap());
}

#[test]
fn conditional_energy_matches_stabilized_limit() {
    let model = FacetEnergyModel::planar(1.0);
    let lam = Window::cube(1.0, 2);
    let mut done = 0;
    for seed in 0..40u64 {
        let mut rng = CounterRng::new(seed, 7);
        let inner: Vec<Facet> = (0..3).map(|_| random_segment(&mut rng, 0.99, (0.3, 1.0))).collect();
        let mut outer = Vec::new();
        while outer.len() < 40 {
            let f = random_segment(&mut rng, 12.0, (0.3, 1.5));
            if !lam.contains(&f.center) {
                outer.push(f);
            }
        }
        let all: Vec<&Facet> = inner.iter().chain(&outer).collect();
        if all.iter().enumerate().any(|(i, f)| all[i + 1..].iter().any(|g| segment_oracle(f, g).is_none())) {
            continue;
        }
        // brute-force limit: pairs touching the inner facets among points of Λ_n
        let at = |n: f64| -> f64 {
            let inside = |f: &Facet| f.center[0].abs() < n && f.center[1].abs() < n;
            let mut c = 0;
            for (i, f) in inner.iter().enumerate() {
                for g in inner[i + 1..].iter().chain(outer.iter().filter(|g| inside(g))) {
                    c += (segment_oracle(f, g) == Some(SegOracle::Cross)) as i32;
                }
            }
            c as f64
        };
        let mut n = 2.0;
        let limit = loop {
            let (a, b) = (at(n), at(2.0 * n));
            if a == b && n > 12.0 {
                break a;
            }
            n *= 2.0;
        };
        let to_cfg = |fs: &[Facet]| Configuration::from_points(2, fs.iter().map(|f| MarkedPoint::facet(&f.center[..2], &f.normal[..2], f.radius)).collect()).unwrap();
        let (gi, xi) = (to_cfg(&inner), to_cfg(&outer));
        let k = mbar_vacuous_from(&xi);
        let l0 = (1..=k.max(1)).find(|&l| in_mbar_l(&xi, l, k.max(l))).unwrap();
        assert_eq!(conditional_energy_facet(&gi, &xi, &lam, l0, &model).unwrap(), limit, "seed {seed}");
        done += 1;
    }
    assert!(done >= 20, "{done}");
}

#[test]
fn gamma_n_energy_and_structure() {
    let model = FacetEnergyModel::planar(-1.0);
    for n in [2usize, 10, 20] {
        let g = gen_gamma_n(&CounterexampleSpec::standard(n)).unwrap();
        let fs = facets_of(&g.config).unwrap();
        let half = |f: &Facet| f.center[0] > 0.0;
        let mut cross = 0;
        for i in 0..n {
            for j in i + 1..n {
                let o = segment_oracle(&fs[i], &fs[j]).expect("knife edge");
                if half(&fs[i]) == half(&fs[j]) {
                    assert_eq!(o, SegOracle::Disjoint);
                } else {
                    assert_eq!(o, SegOracle::Cross);
                    cross += 1;
                }
            }
        }
        assert_eq!(cross, (n / 2) * (n / 2));
        assert_eq!(facet_energy(&g.config, &model).unwrap(), -((n / 2 * n / 2) as f64));
        // |H| / weighted count = (N/4) / b
        let b = 1.0 + (1.0 + g.radius * g.radius).powf(1.25);
        let wc = weighted_count(&g.config, 2, 0.5);
        assert!((wc - n as f64 * b).abs() <= 1e-12 * wc);
    }
}

#[test]
fn lambda_scale_homogeneity() {
    let mut rng = CounterRng::new(12, 0);
    for _ in 0..1000 {
        let x = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
        let y = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
        let a = rng.uniform_in(0.2, 1.2);
        let b = rng.uniform_in(-1.2, -0.2);
        let (n, m) = ([a.cos(), a.sin()], [b.cos(), b.sin()]);
        let s = rng.uniform_in(0.1, 10.0);
        let (f1, f2) = crossing_distances(x, y, n, m);
        let (g1, g2) = crossing_distances([s * x[0], s * x[1]], [s * y[0], s * y[1]], n, m);
        if f1 > 1e-3 {
            assert!((g1 / f1 - s).abs() <= 1e-9 * s);
        }
        if f2 > 1e-3 {
            assert!((g2 / f2 - s).abs() <= 1e-9 * s);
        }
    }
}

#[test]
fn lambda_scale_trivial_case() {
    let mut spec = CounterexampleSpec::standard(2);
    spec.eps = 1e-6;
    assert_eq!(crossing_distances([0.0, 0.0], [0.0, 0.0], spec.u, spec.v), (0.0, 0.0));
    assert!(find_lambda_scale(&spec).unwrap().s > 0.0);
}

#[test]
fn lambda_scale_gives_single_crossings() {
    let spec = CounterexampleSpec::standard(2);
    let s = find_lambda_scale(&spec).unwrap().s;
    let (tu, tv) = (half_circle_angle(spec.u), half_circle_angle(spec.v));
    let mut rng = CounterRng::new(0xface, 0);
    for _ in 0..100_000 {
        let x = [rng.uniform_in(-s, s), rng.uniform_in(-s, s)];
        let y = [rng.uniform_in(-s, s), rng.uniform_in(-s, s)];
        let a = rng.uniform_in(tu - spec.eps, tu + spec.eps);
        let b = rng.uniform_in(tv - spec.eps, tv + spec.eps);
        let f = facet_of(&MarkedPoint::facet(&x, &[a.cos(), a.sin()], rng.uniform_in(spec.a, spec.b)), 2).unwrap();
        let g = facet_of(&MarkedPoint::facet(&y, &[b.cos(), b.sin()], rng.uniform_in(spec.a, spec.b)), 2).unwrap();
        assert_eq!(segment_oracle(&f, &g), Some(SegOracle::Cross));
    }
}

#[test]
fn lower_bound_plug_in() {
    assert_eq!(z_lower_bound_log_term(1, 1.0, 1.0, 0.0), -1.0);
    let t: Vec<f64> = [10, 20, 40].iter().map(|&k| z_lower_bound_log_term(k, 1.0, 1.0, 1.0)).collect();
    assert!(t[0] < t[1] && t[1] < t[2] && t[2] > 1e3);
}

/// `ln k!` from the exact integer factorial.
fn ln_factorial(k: u64) -> f64 {
    let f: BigUint = (1..=k).map(BigUint::from).product();
    let bits = f.bits();
    let shift = bits.saturating_sub(64);
    let top = (&f >> shift).iter_u64_digits().next().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn lower_bound_matches_product_formula() {
    for &(gu, gv, d) in &[(1.0, 1.0, 1.0), (0.0455, 0.0455, 0.267), (3.5, 0.2, 11.0)] {
        for k in 1..=20u64 {
            let kf = k as f64;
            let direct = kf * kf - d - gu - gv + kf * (f64::ln(gu) + f64::ln(gv)) - 2.0 * ln_factorial(k);
            let v = z_lower_bound_log_term(k, gu, gv, d);
            assert!((v - direct).abs() <= 1e-10 * direct.abs().max(1.0), "k={k}: {v} vs {direct}");
        }
    }
}

fn cap_crossings(sample: &ALambdaSample, spec: &CounterexampleSpec) -> (usize, usize) {
    let fs = facets_of(&sample.config).unwrap();
    let tu = half_circle_angle(spec.u);
    let cap = |f: &Facet| (half_circle_angle([f.normal[0], f.normal[1]]) - tu).abs() <= spec.eps;
    let (mut cross, mut within) = (0, 0);
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            if segment_oracle(&fs[i], &fs[j]).expect("knife edge") == SegOracle::Cross {
                if cap(&fs[i]) != cap(&fs[j]) {
                    cross += 1;
                } else {
                    within += 1;
                }
            }
        }
    }
    (cross, within)
}

#[test]
fn a_lambda_samples() {
    let spec = CounterexampleSpec::standard(2);
    let s = find_lambda_scale(&spec).unwrap().s;
    let one = sample_a_lambda_2k(1, &spec, s, 0).unwrap();
    assert_eq!(one.energy, -1.0);
    let five = sample_a_lambda_2k(5, &spec, s, 1).unwrap();
    assert_eq!(five.cross_pairs, 25);
    assert_eq!(five.energy, -((25 + five.within_pairs) as f64));
    for seed in 0..100 {
        let a = sample_a_lambda_2k(3, &spec, s, seed).unwrap();
        let (cross, within) = cap_crossings(&a, &spec);
        assert_eq!(cross, 9);
        assert_eq!((a.cross_pairs, a.within_pairs), (cross, within));
        assert!(a.config.iter().all(|p| p.loc[0].abs() <= s && p.loc[1].abs() <= s));
    }
}

fn arb_segment() -> impl Strategy<Value = Facet> {
    (-2.0f64..2.0, -2.0f64..2.0, -1.5f64..1.5, 0.2f64..2.0)
        .prop_map(|(x, y, th, r)| facet_of(&MarkedPoint::facet(&[x, y], &[th.cos(), th.sin()], r), 2).unwrap())
}

proptest! {
    #[test]
    fn pair_is_symmetric(f in arb_segment(), g in arb_segment()) {
        prop_assert_eq!(pair_intersection(&f, &g, DEFAULT_TOLERANCE), pair_intersection(&g, &f, DEFAULT_TOLERANCE));
    }

    #[test]
    fn energy_translation_invariant(fs in prop::collection::vec(arb_segment(), 0..10), c in (-50.0f64..50.0, -50.0f64..50.0)) {
        let g = Configuration::from_points(2, fs.iter().map(|f| MarkedPoint::facet(&f.center[..2], &f.normal[..2], f.radius)).collect());
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let model = FacetEnergyModel::planar(1.0);
        let clean = fs.iter().enumerate().all(|(i, f)| fs[i + 1..].iter().all(|h| segment_oracle(f, h).is_some()));
        prop_assume!(clean);
        let h0 = facet_energy(&g, &model).unwrap();
        let h1 = facet_energy(&g.translate(&[c.0, c.1]), &model).unwrap();
        prop_assert!((h0 - h1).abs() <= 1e-9);
    }

    #[test]
    fn repulsive_energy_nonnegative_and_monotone(fs in prop::collection::vec(arb_segment(), 1..10), a in 0.0f64..3.0) {
        let model = FacetEnergyModel::planar(a);
        let h = facet_energy_of(&fs, &model);
        prop_assert!(h >= 0.0);
        prop_assert!(facet_energy_of(&fs[1..], &model) <= h);
    }

    #[test]
    fn insertion_delta_matches_recomputation(fs in prop::collection::vec(arb_segment(), 1..10)) {
        let model = FacetEnergyModel::planar(1.0);
        let (f, rest) = fs.split_last().unwrap();
        let d = insertion_delta(rest, f, &model);
        prop_assert!((facet_energy_of(&fs, &model) - facet_energy_of(rest, &model) - d).abs() <= 1e-9);
    }

    #[test]
    fn tau_nondecreasing(a in 0.0f64..100.0, db in 0.0f64..100.0, l0 in 1u64..50) {
        let w = Window::cube(1.0, 2);
        prop_assert!(compute_tau(a, l0, &w).unwrap() <= compute_tau(a + db, l0, &w).unwrap());
    }
}
