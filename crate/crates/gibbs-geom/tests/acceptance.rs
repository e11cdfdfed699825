//! One line per acceptance criterion: `[PASS]` or `[FAIL]`, then the detail.

use std::time::{Duration, Instant};

use gibbs_geom::dlr::{dlr_consistency_test, DlrOutcome, DlrSpec};
use gibbs_geom::stats::{chi_square_gof, effective_sample_size, mean, variance};
use gibbs_geom_core::config::*;
use gibbs_geom_core::counterexample::*;
use gibbs_geom_core::facet::*;
use gibbs_geom_core::laguerre::*;
use gibbs_geom_core::laguerre_energy::*;
use gibbs_geom_core::mcmc::*;
use gibbs_geom_core::poisson::*;
use gibbs_geom_core::rng::{derive_seed, CounterRng};
use gibbs_geom_core::window::Window;
use gibbs_geom_core::Energy;

fn report(id: &str, what: &str, ok: bool, detail: String, start: Instant, limit: Duration) {
    let t = start.elapsed();
    let pass = ok && t <= limit;
    println!("[{}] {id} {what}: {detail} ({:.2}s, limit {}s)", if pass { "PASS" } else { "FAIL" }, t.as_secs_f64(), limit.as_secs());
    assert!(ok, "{id} failed: {detail}");
    assert!(t <= limit, "{id} exceeded its runtime limit");
}

fn cfg(pts: &[(f64, f64, f64)]) -> Configuration {
    Configuration::from_points(2, pts.iter().map(|&(x, y, w)| MarkedPoint::weighted(&[x, y], w)).collect()).unwrap()
}

fn poisson_weighted(seed: u64, half: f64, z: f64, w: (f64, f64)) -> Configuration {
    let marks = MarkDistribution::Weight(RealLaw::Uniform { lo: w.0, hi: w.1 });
    sample_poisson(&PoissonSpec { window: Window::cube(half, 2), z, marks, seed }).unwrap()
}

fn facet_marks(lo: f64, hi: f64) -> MarkDistribution {
    MarkDistribution::Facet { direction: DirectionLaw::UniformHemisphere, radius: RealLaw::Uniform { lo, hi } }
}

#[test]
fn ac1_counterexample_energy() {
    let start = Instant::now();
    let model = FacetEnergyModel::planar(-1.0);
    let mut bad = Vec::new();
    for n in (2..=20).step_by(2) {
        let g = gen_gamma_n(&CounterexampleSpec::standard(n)).unwrap();
        let h = facet_energy(&g.config, &model).unwrap();
        if h != -((n / 2 * (n / 2)) as f64) {
            bad.push((n, h));
        }
    }
    report("AC1", "H(γ_N) = -(N/2)^2 for N = 2..20", bad.is_empty(), format!("mismatches {bad:?}"), start, Duration::from_secs(1));
}

#[test]
fn ac2_flawed_range_radius() {
    let start = Instant::now();
    let l1 = l_of_t(1, 0.5, 2).unwrap();
    let weighted = cfg(&[(120.0, 120.0, 1.0), (150.0, 150.0, 43.0)]);
    let level = temperedness_level(&weighted, 0.5, 256, 10).unwrap();
    let (x, y) = ([120.0f64, 120.0], [150.0f64, 150.0]);
    let balls_meet = (x[0] - y[0]).hypot(x[1] - y[1]) < 1.0 + 43.0;
    let lam = Window::new_ball(&x, 0.5, true).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let inner = Configuration::from_points(2, vec![MarkedPoint::facet(&x, &[r, r], 1.0)]).unwrap();
    let outer = Configuration::from_points(2, vec![MarkedPoint::facet(&y, &[r, -r], 43.0)]).unwrap();
    let excluded = lam.dist_to(&outer.points()[0].loc) > 35.0;
    let model = FacetEnergyModel::planar(1.0);
    let flawed = truncated_conditional_energy(&inner, &outer, &lam, 35.0, &model).unwrap();
    let limit = windowed_conditional_energy(&inner, &outer, 1024.0, &model).unwrap();
    let stable = windowed_conditional_energy(&inner, &outer, 512.0, &model).unwrap() == limit;
    let correct = conditional_energy_facet(&inner, &outer, &lam, 16, &model).unwrap();
    let ok = l1 == 16.0 && level == Some(1) && balls_meet && excluded && flawed == 0.0 && limit == 1.0 && stable && correct == 1.0;
    report(
        "AC2",
        "l(1) = 16 and the τ = 35 truncation misses the crossing",
        ok,
        format!("l(1)={l1} t={level:?} balls_meet={balls_meet} excluded={excluded} truncated={flawed} limit={limit} corrected={correct}"),
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn ac3_removal_identity() {
    let start = Instant::now();
    let bbox = Window::cube(200.0, 2);
    let (mut valid, mut bad) = (0, Vec::new());
    for seed in 0..2000u64 {
        if valid >= 120 {
            break;
        }
        let c = poisson_weighted(seed, 2.0, 4.0, (0.1, 0.15));
        let Some(i) = c.iter().position(|p| p.loc[0].abs() < 1.0 && p.loc[1].abs() < 1.0) else { continue };
        let Ok(r) = removal_diff(&c, i, &bbox) else { continue };
        valid += 1;
        if r.diff != 6 || !r.degree_identity() || !r.tree_identity() {
            bad.push((seed, r));
        }
    }
    report("AC3", "removal difference 6 with local Euler identities", valid >= 100 && bad.is_empty(), format!("{valid} fixtures, failures {bad:?}"), start, Duration::from_secs(30));
}

/// Heavy jittered ring around `Λ_1` plus light clutter in `Λ_25`; light inner points.
fn ring_fixture(seed: u64) -> (Configuration, Configuration) {
    let mut rng = CounterRng::new(seed, 0);
    let mut outer = Vec::new();
    for k in 0..16 {
        let t = k as f64 * std::f64::consts::TAU / 16.0 + rng.uniform_in(-0.05, 0.05);
        let r = rng.uniform_in(2.8, 3.2);
        outer.push(MarkedPoint::weighted(&[r * t.cos(), r * t.sin()], rng.uniform_in(1.0, 1.3)));
    }
    while outer.len() < 76 {
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

#[test]
fn ac4_conditional_energy() {
    let start = Instant::now();
    let lam = Window::cube(1.0, 2);
    let params = CSetParams { window: lam.clone(), a: 1.0, l: 8, n: 17 };
    let schedule = [17, 34, 68];
    let rule = BboxRule::default();
    let (mut fixtures, mut bad, mut skipped) = (0, Vec::new(), 0);
    for seed in 0..200u64 {
        if fixtures >= 60 {
            break;
        }
        let (inner, outer) = ring_fixture(seed);
        let all = inner.union(&outer).unwrap();
        let gp = check_general_position(&all).unwrap();
        let no_empty = laguerre_energy_with(&all, &rule).unwrap().empty_cells.is_empty();
        let c = check_c_set(&outer, &params, default_grid_step(&lam)).unwrap();
        let mbar = in_mbar_l(&outer, 8, mbar_vacuous_from(&outer).max(8));
        if !(gp.gp1 && gp.gp2 && no_empty && c.holds() && c.radii_compatible && mbar) {
            skipped += 1;
            continue;
        }
        fixtures += 1;
        let full = conditional_energy_laguerre(&inner, &outer, &lam, &schedule, &rule).unwrap();
        let cut = restrict(&outer, &Window::cube(17.0, 2));
        let trunc = conditional_energy_laguerre(&inner, &cut, &lam, &schedule, &rule).unwrap();
        let expect = Some(Energy::Finite(6.0 * inner.len() as f64));
        if full.value != expect || trunc.value != expect || full.stabilized_at.is_none() {
            bad.push(seed);
        }
    }
    report(
        "AC4",
        "conditional energy stabilises at 6|γ_Λ| and ignores ξ beyond Λ_n",
        fixtures >= 50 && bad.is_empty(),
        format!("{fixtures} admissible fixtures ({skipped} rejected by the filters), failures {bad:?}"),
        start,
        Duration::from_secs(60),
    );
}

fn deep_inside(poly: &[[f64; 2]], z: [f64; 2], m: f64) -> bool {
    let n = poly.len();
    (0..n).all(|k| {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = e[0].hypot(e[1]);
        len > 0.0 && (e[0] * (z[1] - a[1]) - e[1] * (z[0] - a[0])) / len > m
    })
}

fn brute_argmin(gs: &[Generator], z: [f64; 2]) -> usize {
    let rho = |g: &Generator| (g.nucleus[0] - z[0]).powi(2) + (g.nucleus[1] - z[1]).powi(2) - g.weight * g.weight;
    (0..gs.len()).min_by(|&a, &b| rho(&gs[a]).total_cmp(&rho(&gs[b]))).unwrap()
}

/// Grid points further than one grid cell inside a polygon that disagree with the brute-force argmin.
fn grid_disagreements(d: &LaguerreDiagram, size: usize) -> (usize, usize) {
    let (lo, hi) = d.bbox;
    let (hx, hy) = ((hi[0] - lo[0]) / size as f64, (hi[1] - lo[1]) / size as f64);
    let margin = hx.hypot(hy);
    let polys: Vec<(usize, &CellPolygon)> = d.cells.iter().enumerate().filter_map(|(i, c)| c.polygon().map(|p| (i, p))).collect();
    let (mut checked, mut wrong) = (0, 0);
    for ix in 0..size {
        for iy in 0..size {
            let z = [lo[0] + (ix as f64 + 0.5) * hx, lo[1] + (iy as f64 + 0.5) * hy];
            if let Some((i, _)) = polys.iter().find(|(_, p)| deep_inside(&p.vertices, z, margin)) {
                checked += 1;
                wrong += (*i != brute_argmin(&d.generators, z)) as usize;
            }
        }
    }
    (checked, wrong)
}

#[test]
fn ac5_diagram_correctness() {
    let start = Instant::now();
    let (mut configs, mut wrong, mut checked) = (0, 0, 0);
    for seed in 0..300u64 {
        if configs >= 100 {
            break;
        }
        let c = poisson_weighted(seed, 1.0, 15.0, (0.05, 0.4));
        let gp = check_general_position(&c).unwrap();
        if !(gp.gp1 && gp.gp2) {
            continue;
        }
        configs += 1;
        let (n, w) = grid_disagreements(&build_diagram(&c, &Window::cube(1.0, 2)).unwrap(), 300);
        checked += n;
        wrong += w;
    }
    let mut rng = CounterRng::new(77, 0);
    let eq: Vec<_> = (0..20).map(|_| (rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0), 0.5)).collect();
    let vd = build_diagram(&cfg(&eq), &Window::cube(1.2, 2)).unwrap();
    let (vn, vw) = grid_disagreements(&vd, 400);
    let voronoi_ok = vw == 0 && vd.empty_cells().is_empty() && vn > 400 * 400 * 3 / 4;
    // w^2 + 24^2 is a perfect square, so both weight sets are exact
    let pairs = [(7.0, 25.0), (10.0, 26.0), (18.0, 30.0), (32.0, 40.0), (45.0, 51.0), (70.0, 74.0), (143.0, 145.0)];
    let mut shift_ok = true;
    for _ in 0..10 {
        let nuclei: Vec<[f64; 2]> = pairs.iter().map(|_| [rng.uniform_in(-200.0, 200.0), rng.uniform_in(-200.0, 200.0)]).collect();
        let mk = |k: usize| nuclei.iter().zip(&pairs).map(|(x, p)| Generator { nucleus: *x, weight: if k == 0 { p.0 } else { p.1 } }).collect::<Vec<_>>();
        let bbox = Window::cube(400.0, 2);
        let (a, b) = (build_from_generators(mk(0), &bbox).unwrap(), build_from_generators(mk(1), &bbox).unwrap());
        shift_ok &= a.cells == b.cells && a.neighbors == b.neighbors && a.vertices == b.vertices && a.edges == b.edges;
    }
    report(
        "AC5",
        "grid argmin agreement, Voronoi reduction, weight-shift invariance",
        configs == 100 && wrong == 0 && voronoi_ok && shift_ok,
        format!("{configs} configurations, {checked} interior grid points, {wrong} disagreements; voronoi {vn} points {vw} wrong; shift bit-identical {shift_ok}"),
        start,
        Duration::from_secs(60),
    );
}

#[test]
fn ac6_normality() {
    let start = Instant::now();
    let (mut configs, mut normal) = (0, 0);
    for seed in 0..300u64 {
        if configs >= 100 {
            break;
        }
        let c = poisson_weighted(1000 + seed, 1.0, 10.0, (0.1, 0.5));
        let gp = check_general_position(&c).unwrap();
        if !(gp.gp1 && gp.gp2) {
            continue;
        }
        configs += 1;
        normal += is_normal(&build_diagram(&c, &Window::cube(1.0, 2)).unwrap()).normal as usize;
    }
    let four = cfg(&[(1.0, 0.0, 0.3), (0.0, 1.0, 0.3), (-1.0, 0.0, 0.3), (0.0, -1.0, 0.3)]);
    let r = is_normal(&build_diagram(&four, &Window::cube(10.0, 2)).unwrap());
    let caught = !r.normal && r.vertex_degree_histogram.get(&4) == Some(&1);
    report(
        "AC6",
        "normality of Poisson diagrams, degree-4 vertex detected",
        configs == 100 && normal == 100 && caught,
        format!("{normal}/{configs} normal; cocircular histogram {:?}", r.vertex_degree_histogram),
        start,
        Duration::from_secs(30),
    );
}

#[test]
fn ac7_partition_divergence() {
    let start = Instant::now();
    let spec = CounterexampleSpec::standard(2);
    let s = find_lambda_scale(&spec).unwrap().s;
    let rates = cap_rates(&spec, s, &CounterexampleSpec::standard_marks()).unwrap();
    let b = |k: u64| z_lower_bound_log_term(k, rates.gamma_u, rates.gamma_v, rates.delta);
    // smallest k0 after which the bound increases up to k = 200
    let k0 = (1..200).rev().take_while(|&k| b(k + 1) > b(k)).last().unwrap_or(200);
    let model = EnergyModel::Facet(FacetEnergyModel::planar(-1.0));
    let p = estimate_partition(&Window::cube(1.0, 2), 1.0, &CounterexampleSpec::standard_marks(), &model, 2000, 7).unwrap();
    report(
        "AC7",
        "lower bound on log Z diverges and the MC estimate is flagged",
        k0 <= 40 && b(40) > 1e3 && p.divergent,
        format!("s={s:.4} Γu={:.4} Γv={:.4} Δ={:.4}; increasing from k0={k0}; bound(40)={:.1}; estimate share {:.3} divergent={}", rates.gamma_u, rates.gamma_v, rates.delta, b(40), p.max_weight_share, p.divergent),
        start,
        Duration::from_secs(10),
    );
}

fn pair_count(g: &Configuration) -> usize {
    facet_energy(g, &FacetEnergyModel::planar(1.0)).unwrap() as usize
}

/// Joint category of `(count, crossing pairs)` with capped values.
fn category(g: &Configuration) -> usize {
    g.len().min(5) * 3 + pair_count(g).min(2)
}

fn dlr_facet_spec(mutation: KernelMutation) -> DlrSpec {
    DlrSpec {
        big_n: 4,
        small: Window::cube(1.0, 2),
        z: 1.0,
        marks: facet_marks(0.5, 1.5),
        model: EnergyModel::Facet(FacetEnergyModel::planar(1.0)),
        chains: 8,
        chain: ChainSettings::new(20_000, 4_000, 400, 0),
        kernel_steps: 400,
        seed: 11,
        mutation,
        min_effective: 200.0,
    }
}

#[test]
fn ac8_sampler_correctness() {
    let start = Instant::now();
    // (a) H = 0 against the Poisson mean
    let zero = GibbsSpec::new(Window::cube(1.0, 2), 5.0, facet_marks(0.2, 0.6), EnergyModel::Facet(FacetEnergyModel::planar(0.0)), ChainSettings::new(200_000, 10_000, 200, 42));
    let counts: Vec<f64> = run_chain(&zero).unwrap().samples.iter().map(|s| s.len() as f64).collect();
    let ess = effective_sample_size(&counts);
    let se = (variance(&counts) / ess).sqrt();
    let a_ok = ess >= 200.0 && (mean(&counts) - 20.0).abs() <= 3.0 * se;

    // (b) repulsive facets on a tiny window against rejection sampling
    let w = Window::new_box(&[-0.5, -0.5], &[0.5, 0.5]).unwrap();
    let (z, marks) = (2.0, facet_marks(0.2, 0.6));
    let mut reference = [0u64; 18];
    let mut accepted = 0;
    let mut rng = CounterRng::new(0xacce, 1);
    let mut i = 0;
    while accepted < 200_000 {
        let g = sample_poisson(&PoissonSpec { window: w.clone(), z, marks: marks.clone(), seed: derive_seed(0xacce, i) }).unwrap();
        i += 1;
        if rng.uniform() < (-(pair_count(&g) as f64)).exp() {
            reference[category(&g)] += 1;
            accepted += 1;
        }
    }
    let probs: Vec<f64> = reference.iter().map(|&c| c as f64 / accepted as f64).collect();
    let rep = GibbsSpec::new(w, z, marks, EnergyModel::Facet(FacetEnergyModel::planar(1.0)), ChainSettings::new(600_000, 10_000, 200, 5));
    let mut observed = vec![0u64; 18];
    for s in run_chain(&rep).unwrap().samples {
        observed[category(&s)] += 1;
    }
    let chi = chi_square_gof(&observed, &probs);
    let b_ok = chi.p_value > 0.01;

    // (c) the sign-flipped kernel must fail the DLR test
    let c = dlr_consistency_test(&dlr_facet_spec(KernelMutation::FlipEnergySign)).unwrap();
    let c_p = c.p_value().unwrap_or(f64::NAN);
    let c_ok = c_p < 0.001;
    report(
        "AC8",
        "sampler: Poisson mean, rejection oracle, mutated kernel",
        a_ok && b_ok && c_ok,
        format!("(a) mean {:.3} ± {se:.3} (ess {ess:.0}) vs 20; (b) χ² {:.2} df {} p={:.3}; (c) mutated DLR p={c_p:.2e}", mean(&counts), chi.statistic, chi.df, chi.p_value),
        start,
        Duration::from_secs(300),
    );
}

#[test]
fn ac9_dlr_consistency() {
    let start = Instant::now();
    let facet = dlr_consistency_test(&dlr_facet_spec(KernelMutation::None)).unwrap();
    let mut lag = dlr_facet_spec(KernelMutation::None);
    lag.z = 50.0;
    lag.marks = MarkDistribution::Weight(RealLaw::Uniform { lo: 0.1, hi: 0.5 });
    lag.model = EnergyModel::LaguerreVertex(BboxRule::default());
    let lag = dlr_consistency_test(&lag).unwrap();
    let describe = |o: &DlrOutcome| match o {
        DlrOutcome::Tested(r) => format!("p={:.3} ess={:.0} n={}", r.p_value, r.effective_samples, r.samples),
        DlrOutcome::Insufficient { effective_samples, required } => format!("insufficient ess {effective_samples:.0} < {required}"),
    };
    let ok = [&facet, &lag].iter().all(|o| matches!(o, DlrOutcome::Tested(r) if r.p_value > 0.01 && r.effective_samples >= 200.0));
    report("AC9", "DLR consistency for facets and Laguerre tessellations", ok, format!("facet {}; laguerre {}", describe(&facet), describe(&lag)), start, Duration::from_secs(600));
}

/// Points far out with marks near the cap allowed by a random level.
fn random_tempered(seed: u64) -> Configuration {
    let mut rng = CounterRng::new(seed, 3);
    let t = (1 + rng.below(3)) as f64;
    let pts = (0..1 + rng.below(6))
        .map(|_| {
            let r = rng.uniform_in(0.0, 7.0).exp();
            let a = rng.uniform_in(0.0, std::f64::consts::TAU);
            let cap = (t * r * r).powf(0.4);
            MarkedPoint::weighted(&[r * a.cos(), r * a.sin()], (cap * rng.uniform_in(0.05, 1.0)).max(1e-3))
        })
        .collect();
    Configuration::from_points(2, pts).unwrap()
}

#[test]
fn ac10_tempered_property_suite() {
    let start = Instant::now();
    let trials = 10_000;
    let mut passed = 0;
    for i in 0..trials {
        let g = random_tempered(i);
        let l_max = extent(&g).max(64);
        let t = temperedness_level(&g, 0.5, l_max, u64::MAX).unwrap().unwrap();
        passed += verify_tempered_growth(&g, t, 0.5, 1..=l_max).unwrap() as u64;
    }
    let far = [1u64, 16].iter().all(|&l| verify_far_power_bound(l, trials as usize, l));
    let mut rng = CounterRng::new(10, 0);
    let mut monotone = 0;
    for _ in 0..100 {
        let w = Window::cube(rng.uniform_in(0.5, 5.0), 2);
        let a = rng.uniform_in(0.0, 20.0);
        let b = a + rng.uniform_in(1e-6, 20.0);
        let l0 = rng.below(30);
        monotone += (compute_tau(a, l0, &w).unwrap() <= compute_tau(b, l0, &w).unwrap()) as usize;
    }
    report(
        "AC10",
        "tempered-property suite",
        passed == trials && far && monotone == 100,
        format!("tempered growth {passed}/{trials}; far-generator power bound at l=1,16 ({trials} trials each) {far}; τ monotone {monotone}/100"),
        start,
        Duration::from_secs(30),
    );
}
