//! The vertex-count energy of Laguerre tessellations,
//! `H(γ) = Σ_x |Δ_0(x, γ)|`, or `+∞` when some cell is empty.

use alloc::vec::Vec;

use crate::config::{
    extent, in_mbar_l, mbar_vacuous_from, restrict, temperedness_level, Configuration, MarkedPoint,
};
use crate::energy::Energy;
use crate::laguerre::{
    build_diagram, build_from_generators, check_general_position, check_general_position_gens, check_r2,
    generators_of, Cell, CellPolygon, Generator, LaguerreDiagram, LaguerreError,
};
use crate::vec::{cross2, norm2, sub2};
use crate::window::Window;

/// How the clipping box is chosen for energy evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum BboxRule {
    Fixed(Window),
    /// Square around the nuclei with half side `factor × spread`, doubled
    /// until no cell depends on it.
    Auto { factor: f64, max_doublings: u32 },
}

impl Default for BboxRule {
    fn default() -> Self {
        BboxRule::Auto { factor: 4.0, max_doublings: 24 }
    }
}

/// Square box centred on the nuclei with half side `factor × spread`.
pub fn auto_bbox(gens: &[Generator], factor: f64) -> Window {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut wmax = 0.0f64;
    for g in gens {
        for k in 0..2 {
            lo[k] = lo[k].min(g.nucleus[k]);
            hi[k] = hi[k].max(g.nucleus[k]);
        }
        wmax = wmax.max(g.weight);
    }
    if gens.is_empty() {
        return Window::cube(1.0, 2);
    }
    let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let spread = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(wmax).max(1.0);
    let h = factor * spread;
    Window::new_box(&[c[0] - h, c[1] - h], &[c[0] + h, c[1] + h]).expect("finite box")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaguerreEnergyResult {
    pub value: Energy,
    /// `|Δ_0(x, γ)|` per generator (0 for empty cells).
    pub per_cell_counts: Vec<usize>,
    pub empty_cells: Vec<usize>,
}

fn energy_of_diagram(dia: &LaguerreDiagram) -> Result<LaguerreEnergyResult, LaguerreError> {
    let empty = dia.empty_cells();
    let counts: Vec<usize> = (0..dia.cells.len()).map(|i| dia.cell_vertex_count(i).unwrap_or(0)).collect();
    if !empty.is_empty() {
        return Ok(LaguerreEnergyResult { value: Energy::Infinite, per_cell_counts: counts, empty_cells: empty });
    }
    if let Some(i) = dia.contaminated_cell() {
        return Err(LaguerreError::BboxTooSmall(i));
    }
    let total: usize = counts.iter().sum();
    Ok(LaguerreEnergyResult { value: Energy::Finite(total as f64), per_cell_counts: counts, empty_cells: empty })
}

/// Energy with a fixed clipping box. Fails with `BboxTooSmall` when some
/// cell has a vertex outside the box.
pub fn laguerre_energy(gamma: &Configuration, bbox: &Window) -> Result<LaguerreEnergyResult, LaguerreError> {
    if gamma.is_empty() {
        return Ok(LaguerreEnergyResult { value: Energy::Finite(0.0), per_cell_counts: Vec::new(), empty_cells: Vec::new() });
    }
    energy_of_diagram(&build_diagram(gamma, bbox)?)
}

/// Diagram whose cells do not depend on the box, under `rule`.
pub fn diagram_with_rule(gamma: &Configuration, rule: &BboxRule) -> Result<LaguerreDiagram, LaguerreError> {
    let gens = generators_of(gamma)?;
    match rule {
        BboxRule::Fixed(w) => build_from_generators(gens, w),
        BboxRule::Auto { factor, max_doublings } => {
            let mut f = *factor;
            let mut last = None;
            for _ in 0..=*max_doublings {
                let dia = build_from_generators(gens.clone(), &auto_bbox(&gens, f))?;
                if !dia.empty_cells().is_empty() || dia.contaminated_cell().is_none() {
                    return Ok(dia);
                }
                last = dia.contaminated_cell();
                f *= 2.0;
            }
            Err(LaguerreError::BboxTooSmall(last.unwrap_or(0)))
        }
    }
}

pub fn laguerre_energy_with(gamma: &Configuration, rule: &BboxRule) -> Result<LaguerreEnergyResult, LaguerreError> {
    if gamma.is_empty() {
        return laguerre_energy(gamma, &Window::cube(1.0, 2));
    }
    energy_of_diagram(&diagram_with_rule(gamma, rule)?)
}

/// `H(γ) - H(γ ∖ {x_i})` with the local graph bookkeeping of the removed cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovalReport {
    pub diff: i64,
    /// Vertices of the removed cell.
    pub k: usize,
    /// New vertices inside the removed cell.
    pub new_vertices: usize,
    /// New edge pieces inside the removed cell.
    pub new_edges: usize,
}

impl RemovalReport {
    /// Degree count: `3 (k + |V_2|) = 2 (k + |E_2|)`.
    pub fn degree_identity(&self) -> bool {
        3 * (self.k + self.new_vertices) == 2 * (self.k + self.new_edges)
    }

    /// Tree count: `k + |V_2| = |E_2| + 1`.
    pub fn tree_identity(&self) -> bool {
        self.k + self.new_vertices == self.new_edges + 1
    }
}

/// Length of the part of segment `[a, b]` inside a convex CCW polygon.
fn segment_inside_length(poly: &CellPolygon, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = sub2(b, a);
    let n = poly.vertices.len();
    for k in 0..n {
        let p = poly.vertices[k];
        let e = sub2(poly.vertices[(k + 1) % n], p);
        // inside: cross(e, z - p) >= 0
        let num = cross2(e, sub2(a, p));
        let den = cross2(e, d);
        if den == 0.0 {
            if num < 0.0 {
                return 0.0;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    ((t1 - t0).max(0.0)) * norm2(d)
}

/// Removal of a generator with a bounded cell changes the energy by 6.
/// Preconditions (general position, no empty cell, bounded unclipped cell)
/// are checked and reported as errors.
pub fn removal_diff(gamma: &Configuration, i: usize, bbox: &Window) -> Result<RemovalReport, LaguerreError> {
    if i >= gamma.len() {
        return Err(LaguerreError::Index(i));
    }
    let gp = check_general_position(gamma)?;
    if !(gp.gp1 && gp.gp2) {
        return Err(LaguerreError::NotGeneralPosition);
    }
    let before = build_diagram(gamma, bbox)?;
    if let Some(&e) = before.empty_cells().first() {
        return Err(LaguerreError::EmptyCell(e));
    }
    let poly = match &before.cells[i] {
        Cell::Polygon(p) if !p.clipped() => p.clone(),
        Cell::Polygon(_) => return Err(LaguerreError::ClippedCell(i)),
        _ => return Err(LaguerreError::EmptyCell(i)),
    };
    let h_before = energy_of_diagram(&before)?.value;
    let mut rest = gamma.clone();
    rest.remove(i);
    let after = build_diagram(&rest, bbox)?;
    let h_after = energy_of_diagram(&after)?.value;
    let (Energy::Finite(b), Energy::Finite(a)) = (h_before, h_after) else {
        return Err(LaguerreError::EmptyCell(i));
    };
    let tol = 16.0 * before.tolerance.max(after.tolerance);
    let new_vertices = after.vertices.iter().filter(|v| poly.contains_with_margin(v.point, tol)).count();
    let new_edges = after
        .edges
        .iter()
        .filter(|e| segment_inside_length(&poly, e.endpoints[0], e.endpoints[1]) > tol)
        .count();
    Ok(RemovalReport { diff: (b - a) as i64, k: poly.vertices.len(), new_vertices, new_edges })
}

/// Outcome of the limit `lim_n H(γ_{Λ_n}) - H(γ_{Λ_n ∖ Λ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalEnergy {
    /// Value once two consecutive schedule points agree exactly.
    pub value: Option<Energy>,
    pub stabilized_at: Option<u64>,
    /// `(n, H(γ_{Λ_n}) - H(γ_{Λ_n ∖ Λ}))`; `None` when the boundary part alone
    /// has an empty cell and the difference is undefined.
    pub trace: Vec<(u64, Option<Energy>)>,
}

/// `n` doubling from the smallest integer cube containing the window.
pub fn default_schedule(window: &Window, len: usize) -> Vec<u64> {
    let (lo, hi) = window.bounds();
    let m = (0..2).map(|k| lo[k].abs().max(hi[k].abs())).fold(0.0, f64::max);
    let n0 = libm::floor(m) as u64 + 1;
    (0..len).map(|k| n0 << k).collect()
}

pub fn conditional_energy_laguerre(
    inner: &Configuration,
    boundary: &Configuration,
    window: &Window,
    schedule: &[u64],
    rule: &BboxRule,
) -> Result<ConditionalEnergy, LaguerreError> {
    if inner.iter().any(|p| !window.contains(&p.loc)) || boundary.iter().any(|p| window.contains(&p.loc)) {
        return Err(LaguerreError::Placement);
    }
    let mut trace = Vec::new();
    if inner.is_empty() {
        if let Some(&n) = schedule.first() {
            trace.push((n, Some(Energy::Finite(0.0))));
            return Ok(ConditionalEnergy { value: Some(Energy::Finite(0.0)), stabilized_at: Some(n), trace });
        }
    }
    for &n in schedule {
        let cube = Window::cube(n as f64, 2);
        if !window.closure_within(&cube) {
            return Err(LaguerreError::Schedule);
        }
        let outer = restrict(boundary, &cube);
        let full = outer.union(inner).map_err(|_| LaguerreError::Placement)?;
        let h_outer = laguerre_energy_with(&outer, rule)?.value;
        let h_full = laguerre_energy_with(&full, rule)?.value;
        let v = h_outer.finite().map(|o| h_full.minus(o));
        let stable = matches!((trace.last(), v), (Some((_, Some(p))), Some(c)) if *p == c);
        trace.push((n, v));
        if stable {
            return Ok(ConditionalEnergy { value: v, stabilized_at: Some(n), trace });
        }
    }
    Ok(ConditionalEnergy { value: None, stabilized_at: None, trace })
}

/// `H(ξ_{Λ_n∖Λ} γ_Λ) - H(ξ_{Λ_n∖Λ})` for one `n`.
pub fn cutoff_conditional_energy(
    inner: &Configuration,
    boundary: &Configuration,
    window: &Window,
    n: u64,
    rule: &BboxRule,
) -> Result<Option<Energy>, LaguerreError> {
    let outer = restrict(boundary, &Window::cube(n as f64, 2)).filter(|p| !window.contains(&p.loc));
    let full = outer.union(inner).map_err(|_| LaguerreError::Placement)?;
    let h_outer = laguerre_energy_with(&outer, rule)?.value;
    h_outer.finite().map(|o| laguerre_energy_with(&full, rule).map(|r| r.value.minus(o))).transpose()
}

/// Parameters `(Λ, a, l, n)` of the local sets `C(Λ, a, l, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CSetParams {
    pub window: Window,
    pub a: f64,
    pub l: u64,
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct C2Verdict {
    pub holds: bool,
    pub grid_step: f64,
    pub grid_points: usize,
    /// First grid point whose cell escapes `U(0, l/2)`.
    pub witness: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CSetReport {
    pub params: CSetParams,
    pub c1: bool,
    pub c2: C2Verdict,
    /// `U(0, 2l+1) ⊂ Λ_n` and `Λ ⊕ B(0, a) ⊂ U(0, l/2)`.
    pub radii_compatible: bool,
}

impl CSetReport {
    pub fn holds(&self) -> bool {
        self.c1 && self.c2.holds
    }
}

/// Default grid step: `min(0.05 · diam Λ, 0.1)`.
pub fn default_grid_step(window: &Window) -> f64 {
    (0.05 * window.diameter()).min(0.1)
}

/// Whether the cell of `x` in `others ∪ {x}` lies in the open disc `U(0, r)`.
fn cell_within(others: &[Generator], x: Generator, r: f64) -> bool {
    let mut gens = Vec::with_capacity(others.len() + 1);
    gens.push(x);
    gens.extend_from_slice(others);
    if gens[1..].iter().any(|g| g.nucleus == x.nucleus) {
        return true;
    }
    let m = gens.iter().map(|g| g.nucleus[0].abs().max(g.nucleus[1].abs())).fold(2.0 * r, f64::max);
    let big = Window::new_box(&[-m, -m], &[m, m]).expect("finite");
    let Ok(dia) = build_from_generators(gens, &big) else { return false };
    match &dia.cells[0] {
        Cell::Empty => true,
        Cell::OutsideBbox => false,
        Cell::Polygon(p) => !p.clipped() && p.vertices.iter().all(|v| norm2(*v) < r),
    }
}

/// Checks (C1) by scan and (C2) through the single-mark-`a` reduction on a
/// grid over `Λ`: `L((x', a), ξ_{Λ_n∖Λ} ∪ {(x', a)}) ⊂ U(0, l/2)`.
pub fn check_c_set(boundary: &Configuration, params: &CSetParams, grid_step: f64) -> Result<CSetReport, LaguerreError> {
    let w = &params.window;
    let cube = Window::cube(params.n as f64, 2);
    if !w.closure_within(&cube) {
        return Err(LaguerreError::Schedule);
    }
    let local = restrict(boundary, &cube).filter(|p| !w.contains(&p.loc));
    let half_l = params.l as f64 / 2.0;
    let c1 = local.iter().any(|p| norm2([p.loc[0], p.loc[1]]) < half_l);
    let others = generators_of(&local)?;
    let (lo, hi) = w.bounds();
    let steps = |k: usize| libm::ceil((hi[k] - lo[k]) / grid_step) as usize;
    let (nx, ny) = (steps(0), steps(1));
    let mut holds = true;
    let mut witness = None;
    let mut count = 0;
    'grid: for ix in 0..=nx {
        for iy in 0..=ny {
            let x = [(lo[0] + ix as f64 * grid_step).min(hi[0]), (lo[1] + iy as f64 * grid_step).min(hi[1])];
            // the closure of Λ is covered
            if w.dist_to(&[x[0], x[1], 0.0]) > 0.0 {
                continue;
            }
            count += 1;
            if !cell_within(&others, Generator { nucleus: x, weight: params.a }, half_l) {
                holds = false;
                witness = Some(x);
                break 'grid;
            }
        }
    }
    let reach = w.farthest_norm() + params.a;
    let radii_compatible = (2 * params.l + 1) as f64 <= params.n as f64 && reach < half_l;
    Ok(CSetReport {
        params: params.clone(),
        c1,
        c2: C2Verdict { holds, grid_step, grid_points: count, witness },
        radii_compatible,
    })
}

/// Parameters for [`is_admissible`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityParams {
    pub c_set: CSetParams,
    pub grid_step: f64,
    pub delta: f64,
    pub t_cap: u64,
    /// Upper end of the verified `k` range for `M̄_l`; `None` uses the
    /// range beyond which the condition is vacuous.
    pub k_max: Option<u64>,
    /// Region the convex hull of the nuclei must cover.
    pub observation_window: Window,
    pub bbox: BboxRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MbarVerdict {
    pub l: u64,
    pub k_max: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub gp1: bool,
    pub gp2: bool,
    pub no_empty: bool,
    pub empty_cells: Vec<usize>,
    pub tempered_level: Option<u64>,
    pub tempered_l_max: u64,
    pub mbar: MbarVerdict,
    pub c_set: CSetReport,
    /// Convex hull of the nuclei covers the observation window.
    pub r2_window_relative: bool,
}

impl AdmissibilityReport {
    pub fn all_hold(&self) -> bool {
        self.gp1
            && self.gp2
            && self.no_empty
            && self.tempered_level.is_some()
            && self.mbar.holds
            && self.c_set.holds()
            && self.r2_window_relative
    }
}

pub fn is_admissible(gamma: &Configuration, params: &AdmissibilityParams) -> Result<AdmissibilityReport, LaguerreError> {
    let gens = generators_of(gamma)?;
    let gp = check_general_position_gens(&gens);
    let empty_cells = if gamma.is_empty() {
        Vec::new()
    } else {
        let dia = diagram_with_rule(gamma, &params.bbox)?;
        dia.empty_cells()
    };
    let l_max = extent(gamma);
    let tempered_level = temperedness_level(gamma, params.delta, l_max, params.t_cap).map_err(|_| LaguerreError::Placement)?;
    let l = params.c_set.l;
    let k_max = params.k_max.unwrap_or_else(|| mbar_vacuous_from(gamma).max(l));
    let mbar = MbarVerdict { l, k_max, holds: in_mbar_l(gamma, l, k_max) };
    let boundary = gamma.filter(|p| !params.c_set.window.contains(&p.loc));
    let c_set = check_c_set(&boundary, &params.c_set, params.grid_step)?;
    Ok(AdmissibilityReport {
        gp1: gp.gp1,
        gp2: gp.gp2,
        no_empty: empty_cells.is_empty(),
        empty_cells,
        tempered_level,
        tempered_l_max: l_max,
        mbar,
        c_set,
        r2_window_relative: check_r2(gamma, Some(&params.observation_window)),
    })
}

/// A point with weight mark, for fixtures.
pub fn weighted(x: f64, y: f64, w: f64) -> MarkedPoint {
    MarkedPoint::weighted(&[x, y], w)
}
