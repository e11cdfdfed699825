//! Finite-volume Gibbs measures and Gibbs kernels sampled by a
//! birth-death-translate Metropolis-Hastings chain.

use alloc::vec::Vec;

use crate::config::{restrict, ConfigError, Configuration, MarkedPoint};
use crate::energy::Energy;
use crate::facet::{facet_of, facets_of, insertion_delta, Facet, FacetEnergyModel, FacetError};
use crate::laguerre::LaguerreError;
use crate::laguerre_energy::{laguerre_energy_with, BboxRule};
use crate::poisson::{sample_poisson, MarkDistribution, PoissonError, PoissonSpec};
use crate::rng::{derive_seed, CounterRng};
use crate::vec::V3;
use crate::window::Window;

#[derive(Clone, Debug, PartialEq)]
pub enum EnergyModel {
    Facet(FacetEnergyModel),
    LaguerreVertex(BboxRule),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum McmcError {
    #[error("invalid specification: {0}")]
    Spec(&'static str),
    #[error(transparent)]
    Facet(#[from] FacetError),
    #[error(transparent)]
    Laguerre(#[from] LaguerreError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error("initial state has infinite conditional energy")]
    InfiniteStart,
    #[error("boundary energy is infinite; the kernel is undefined")]
    InfiniteBoundary,
    #[error("chain diverged at step {step}: energy {energy}, {points} points (no integrable target)")]
    Divergent { step: u64, energy: f64, points: usize },
    #[error("energy delta {delta} disagrees with recomputation {full} at step {step}")]
    DeltaMismatch { step: u64, delta: f64, full: f64 },
}

impl EnergyModel {
    pub fn energy(&self, gamma: &Configuration) -> Result<Energy, McmcError> {
        match self {
            EnergyModel::Facet(m) => Ok(to_energy(crate::facet::facet_energy(gamma, m)?)),
            EnergyModel::LaguerreVertex(rule) => Ok(laguerre_energy_with(gamma, rule)?.value),
        }
    }

    /// `H(γ ∪ {p}) - H(γ)`; `γ` must have finite energy.
    pub fn insert_delta(&self, gamma: &Configuration, p: &MarkedPoint) -> Result<Energy, McmcError> {
        match self {
            EnergyModel::Facet(m) => {
                Ok(to_energy(insertion_delta(&facets_of(gamma)?, &facet_of(p, gamma.dim())?, m)))
            }
            EnergyModel::LaguerreVertex(_) => {
                let before = self.energy(gamma)?.finite().ok_or(McmcError::InfiniteStart)?;
                let mut g = gamma.clone();
                g.insert(*p)?;
                Ok(self.energy(&g)?.minus(before))
            }
        }
    }

    /// `H(γ ∖ {x_i}) - H(γ)`; `γ` must have finite energy.
    pub fn delete_delta(&self, gamma: &Configuration, i: usize) -> Result<Energy, McmcError> {
        let mut g = gamma.clone();
        let p = g.remove(i);
        match self {
            EnergyModel::Facet(m) => {
                Ok(to_energy(-insertion_delta(&facets_of(&g)?, &facet_of(&p, gamma.dim())?, m)))
            }
            EnergyModel::LaguerreVertex(_) => {
                let before = self.energy(gamma)?.finite().ok_or(McmcError::InfiniteStart)?;
                Ok(self.energy(&g)?.minus(before))
            }
        }
    }

    /// Whether every coefficient is non-negative, so that `H >= 0`.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            EnergyModel::Facet(m) => m.coefficients.iter().all(|&a| a >= 0.0),
            EnergyModel::LaguerreVertex(_) => true,
        }
    }
}

fn to_energy(v: f64) -> Energy {
    if v.is_nan() || v == f64::INFINITY {
        Energy::Infinite
    } else {
        Energy::Finite(v)
    }
}

/// The cut-off kernel: marks restricted to `M_a`, boundary to `Λ_n ∖ Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub n: u64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSettings {
    pub steps: u64,
    pub burnin: u64,
    pub thinning: u64,
    pub seed: u64,
    /// Probabilities of birth, death and translate proposals.
    pub move_mix: [f64; 3],
    /// Gaussian translate scale; `None` means `0.1 · diam Λ`.
    pub translate_sigma: Option<f64>,
    pub record_trace: bool,
    /// Recompute the energy after each accepted move and compare.
    pub verify_deltas: bool,
}

impl ChainSettings {
    pub fn new(steps: u64, burnin: u64, thinning: u64, seed: u64) -> Self {
        ChainSettings {
            steps,
            burnin,
            thinning,
            seed,
            move_mix: DEFAULT_MOVE_MIX,
            translate_sigma: None,
            record_trace: false,
            verify_deltas: false,
        }
    }
}

pub const DEFAULT_MOVE_MIX: [f64; 3] = [0.4, 0.4, 0.2];

/// Abort rule for targets without a finite partition function: the energy
/// is below `floor` after `streak` accepted births with negative energy
/// change and no accepted death, or the state exceeds `max_points`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceGuard {
    pub floor: f64,
    pub streak: u64,
    pub max_points: usize,
}

impl Default for DivergenceGuard {
    fn default() -> Self {
        DivergenceGuard { floor: -1e4, streak: 10_000, max_points: 100_000 }
    }
}

/// Deliberate kernel defects for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KernelMutation {
    #[default]
    None,
    /// Uses `exp(+ΔH)` in every acceptance ratio.
    FlipEnergySign,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsSpec {
    pub window: Window,
    pub z: f64,
    pub marks: MarkDistribution,
    pub model: EnergyModel,
    /// `ξ`, supported outside the window.
    pub boundary: Option<Configuration>,
    pub cutoff: Option<Cutoff>,
    pub chain: ChainSettings,
    pub initial: Option<Configuration>,
    /// RNG position to resume from.
    pub start_counter: u64,
    pub guard: DivergenceGuard,
    pub mutation: KernelMutation,
}

impl GibbsSpec {
    pub fn new(window: Window, z: f64, marks: MarkDistribution, model: EnergyModel, chain: ChainSettings) -> Self {
        GibbsSpec {
            window,
            z,
            marks,
            model,
            boundary: None,
            cutoff: None,
            chain,
            initial: None,
            start_counter: 0,
            guard: DivergenceGuard::default(),
            mutation: KernelMutation::None,
        }
    }

    pub fn validate(&self) -> Result<(), McmcError> {
        let mix = self.chain.move_mix;
        if mix.iter().any(|p| !(*p >= 0.0)) || libm::fabs(mix.iter().sum::<f64>() - 1.0) > 1e-12 {
            return Err(McmcError::Spec("move mix must be a probability vector"));
        }
        if mix[0] == 0.0 || mix[1] == 0.0 {
            return Err(McmcError::Spec("birth and death must both be proposed"));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(McmcError::Spec("activity must be positive"));
        }
        if self.chain.thinning == 0 || self.chain.burnin > self.chain.steps {
            return Err(McmcError::Spec("need thinning >= 1 and burnin <= steps"));
        }
        if !(self.window.volume() > 0.0) {
            return Err(McmcError::Spec("window must have positive volume"));
        }
        self.marks.validate(self.window.dim())?;
        if let Some(b) = &self.boundary {
            if b.iter().any(|p| self.window.contains(&p.loc)) {
                return Err(McmcError::Spec("boundary must lie outside the window"));
            }
        }
        if let Some(c) = &self.cutoff {
            if !self.window.closure_within(&Window::cube(c.n as f64, self.window.dim())) {
                return Err(McmcError::Spec("cut-off cube must contain the window"));
            }
        }
        if let Some(g) = &self.initial {
            if g.iter().any(|p| !self.window.contains(&p.loc) || !self.mark_allowed(p)) {
                return Err(McmcError::Spec("initial state must lie in the window with admissible marks"));
            }
        }
        Ok(())
    }

    fn mark_allowed(&self, p: &MarkedPoint) -> bool {
        self.cutoff.map_or(true, |c| p.mark.norm() <= c.a)
    }

    /// The boundary actually seen by the kernel.
    pub fn effective_boundary(&self) -> Configuration {
        let dim = self.window.dim();
        match (&self.boundary, &self.cutoff) {
            (None, _) => Configuration::empty(dim),
            (Some(b), None) => b.clone(),
            (Some(b), Some(c)) => restrict(b, &Window::cube(c.n as f64, dim)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Birth,
    Death,
    Translate,
}

impl MoveKind {
    pub fn name(&self) -> &'static str {
        match self {
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
            MoveKind::Translate => "translate",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub kind: MoveKind,
    pub accepted: bool,
    pub n_points: usize,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    pub samples: Vec<Configuration>,
    /// `H_Λ` of each retained sample.
    pub sample_energies: Vec<f64>,
    /// Birth, death, translate.
    pub stats: [MoveStats; 3],
    pub trace: Vec<TraceRow>,
    pub final_state: Configuration,
    pub final_energy: f64,
    pub seed: u64,
    pub final_counter: u64,
}

/// `min(1, z |Λ| p_d / ((n + 1) p_b) · exp(-ΔH))`.
pub fn birth_acceptance(z: f64, volume: f64, n: usize, p_birth: f64, p_death: f64, dh: Energy, m: KernelMutation) -> f64 {
    match dh {
        Energy::Infinite => 0.0,
        Energy::Finite(d) => {
            let r = libm::log(z * volume * p_death / ((n + 1) as f64 * p_birth)) - signed(d, m);
            if r >= 0.0 {
                1.0
            } else {
                libm::exp(r)
            }
        }
    }
}

/// `min(1, n p_b / (z |Λ| p_d) · exp(-ΔH))` for a state with `n` points.
pub fn death_acceptance(z: f64, volume: f64, n: usize, p_birth: f64, p_death: f64, dh: Energy, m: KernelMutation) -> f64 {
    match dh {
        Energy::Infinite => 0.0,
        Energy::Finite(d) => {
            let r = libm::log(n as f64 * p_birth / (z * volume * p_death)) - signed(d, m);
            if r >= 0.0 {
                1.0
            } else {
                libm::exp(r)
            }
        }
    }
}

pub fn translate_acceptance(dh: Energy, m: KernelMutation) -> f64 {
    match dh {
        Energy::Infinite => 0.0,
        Energy::Finite(d) => libm::exp(-signed(d, m)).min(1.0),
    }
}

fn signed(d: f64, m: KernelMutation) -> f64 {
    match m {
        KernelMutation::None => d,
        KernelMutation::FlipEnergySign => -d,
    }
}

/// Reflect `x` into `[lo, hi]`.
fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return lo;
    }
    x = libm::fmod(x - lo, 2.0 * w);
    if x < 0.0 {
        x += 2.0 * w;
    }
    if x > w {
        x = 2.0 * w - x;
    }
    lo + x
}

/// Energy bookkeeping for the current state together with the boundary.
struct State<'a> {
    spec: &'a GibbsSpec,
    inner: Configuration,
    boundary: Configuration,
    boundary_facets: Vec<Facet>,
    /// `H(γ ∪ ξ)`.
    h_total: f64,
    /// `H(ξ)`.
    h_boundary: f64,
}

impl<'a> State<'a> {
    fn new(spec: &'a GibbsSpec, inner: Configuration) -> Result<Self, McmcError> {
        let boundary = spec.effective_boundary();
        let h_boundary = spec.model.energy(&boundary)?.finite().ok_or(McmcError::InfiniteBoundary)?;
        let boundary_facets = match &spec.model {
            EnergyModel::Facet(_) => facets_of(&boundary)?,
            EnergyModel::LaguerreVertex(_) => Vec::new(),
        };
        let all = inner.union(&boundary)?;
        let h_total = spec.model.energy(&all)?.finite().ok_or(McmcError::InfiniteStart)?;
        Ok(State { spec, inner, boundary, boundary_facets, h_total, h_boundary })
    }

    fn conditional(&self) -> f64 {
        self.h_total - self.h_boundary
    }

    fn facets_without(&self, skip: Option<usize>) -> Result<Vec<Facet>, McmcError> {
        let mut fs = Vec::with_capacity(self.inner.len() + self.boundary_facets.len());
        for (j, p) in self.inner.iter().enumerate() {
            if Some(j) != skip {
                fs.push(facet_of(p, self.inner.dim())?);
            }
        }
        fs.extend_from_slice(&self.boundary_facets);
        Ok(fs)
    }

    fn full_energy(&self, inner: &Configuration) -> Result<Energy, McmcError> {
        self.spec.model.energy(&inner.union(&self.boundary)?)
    }

    fn birth_delta(&self, p: &MarkedPoint) -> Result<Energy, McmcError> {
        match &self.spec.model {
            EnergyModel::Facet(m) => {
                Ok(to_energy(insertion_delta(&self.facets_without(None)?, &facet_of(p, self.inner.dim())?, m)))
            }
            EnergyModel::LaguerreVertex(_) => {
                let mut g = self.inner.clone();
                g.insert(*p)?;
                Ok(self.full_energy(&g)?.minus(self.h_total))
            }
        }
    }

    fn death_delta(&self, i: usize) -> Result<Energy, McmcError> {
        match &self.spec.model {
            EnergyModel::Facet(m) => {
                let f = facet_of(&self.inner.points()[i], self.inner.dim())?;
                Ok(to_energy(-insertion_delta(&self.facets_without(Some(i))?, &f, m)))
            }
            EnergyModel::LaguerreVertex(_) => {
                let mut g = self.inner.clone();
                g.remove(i);
                Ok(self.full_energy(&g)?.minus(self.h_total))
            }
        }
    }

    fn translate_delta(&self, i: usize, q: &MarkedPoint) -> Result<Energy, McmcError> {
        match &self.spec.model {
            EnergyModel::Facet(m) => {
                let others = self.facets_without(Some(i))?;
                let old = facet_of(&self.inner.points()[i], self.inner.dim())?;
                let new = facet_of(q, self.inner.dim())?;
                Ok(to_energy(insertion_delta(&others, &new, m) - insertion_delta(&others, &old, m)))
            }
            EnergyModel::LaguerreVertex(_) => {
                let mut g = self.inner.clone();
                g.remove(i);
                g.insert(*q)?;
                Ok(self.full_energy(&g)?.minus(self.h_total))
            }
        }
    }
}

fn collides(inner: &Configuration, boundary: &Configuration, loc: &V3) -> bool {
    inner.find(loc).is_some() || boundary.find(loc).is_some()
}

/// Runs the chain. Identical specs give identical outputs.
pub fn run_chain(spec: &GibbsSpec) -> Result<ChainOutput, McmcError> {
    spec.validate()?;
    let dim = spec.window.dim();
    let vol = spec.window.volume();
    let [pb, pd, _] = spec.chain.move_mix;
    let sigma = spec.chain.translate_sigma.unwrap_or(0.1 * spec.window.diameter());
    let (lo, hi) = spec.window.bounds();
    let mut rng = CounterRng::at(spec.chain.seed, 0, spec.start_counter);
    let mut st = State::new(spec, spec.initial.clone().unwrap_or_else(|| Configuration::empty(dim)))?;
    let mut stats = [MoveStats::default(); 3];
    let mut trace = Vec::new();
    let mut samples = Vec::new();
    let mut sample_energies = Vec::new();
    let mut streak = 0u64;
    let full_check = matches!(spec.model, EnergyModel::Facet(_)) && spec.chain.verify_deltas;

    for step in 0..spec.chain.steps {
        let u = rng.uniform();
        let n = st.inner.len();
        let kind = if u < pb {
            MoveKind::Birth
        } else if u < pb + pd {
            MoveKind::Death
        } else {
            MoveKind::Translate
        };
        let mut accepted = false;
        let mut delta = 0.0;
        match kind {
            MoveKind::Birth => {
                stats[0].proposed += 1;
                let loc = spec.window.sample_uniform(&mut rng);
                let mark = spec.marks.sample(dim, &mut rng);
                let p = MarkedPoint { loc, mark };
                let alpha_u = rng.uniform();
                if spec.mark_allowed(&p) && !collides(&st.inner, &st.boundary, &loc) {
                    let dh = st.birth_delta(&p)?;
                    if alpha_u < birth_acceptance(spec.z, vol, n, pb, pd, dh, spec.mutation) {
                        st.inner.insert(p)?;
                        delta = dh.finite().unwrap_or(0.0);
                        accepted = true;
                    }
                }
            }
            MoveKind::Death => {
                stats[1].proposed += 1;
                if n > 0 {
                    let i = rng.below(n as u64) as usize;
                    let alpha_u = rng.uniform();
                    let dh = st.death_delta(i)?;
                    if alpha_u < death_acceptance(spec.z, vol, n, pb, pd, dh, spec.mutation) {
                        st.inner.remove(i);
                        delta = dh.finite().unwrap_or(0.0);
                        accepted = true;
                    }
                }
            }
            MoveKind::Translate => {
                stats[2].proposed += 1;
                if n > 0 {
                    let i = rng.below(n as u64) as usize;
                    let old = st.inner.points()[i];
                    let (g0, g1) = rng.normal_pair();
                    let g2 = if dim == 3 { rng.normal_pair().0 } else { 0.0 };
                    let mut loc = old.loc;
                    for (k, g) in [g0, g1, g2].into_iter().enumerate().take(dim) {
                        loc[k] = reflect(old.loc[k] + sigma * g, lo[k], hi[k]);
                    }
                    let alpha_u = rng.uniform();
                    let q = MarkedPoint { loc, mark: old.mark };
                    if spec.window.contains(&loc) && !collides(&st.inner, &st.boundary, &loc) {
                        let dh = st.translate_delta(i, &q)?;
                        if alpha_u < translate_acceptance(dh, spec.mutation) {
                            st.inner.remove(i);
                            st.inner.insert(q)?;
                            delta = dh.finite().unwrap_or(0.0);
                            accepted = true;
                        }
                    }
                }
            }
        }
        if accepted {
            let k = kind as usize;
            stats[k].accepted += 1;
            st.h_total += delta;
            if full_check || (spec.chain.verify_deltas && matches!(spec.model, EnergyModel::LaguerreVertex(_))) {
                let full = st.full_energy(&st.inner)?.finite().ok_or(McmcError::InfiniteStart)?;
                let tol = if full_check { 1e-9 * (1.0 + libm::fabs(full)) } else { 0.0 };
                if libm::fabs(full - st.h_total) > tol {
                    return Err(McmcError::DeltaMismatch { step, delta: st.h_total, full });
                }
                st.h_total = full;
            }
            match kind {
                MoveKind::Birth if delta < 0.0 => streak += 1,
                MoveKind::Death => streak = 0,
                _ => {}
            }
        }
        let h = st.conditional();
        if st.inner.len() > spec.guard.max_points || (h < spec.guard.floor && streak >= spec.guard.streak) {
            return Err(McmcError::Divergent { step, energy: h, points: st.inner.len() });
        }
        if spec.chain.record_trace {
            trace.push(TraceRow { step, kind, accepted, n_points: st.inner.len(), energy: h });
        }
        if step >= spec.chain.burnin && (step + 1 - spec.chain.burnin) % spec.chain.thinning == 0 {
            samples.push(st.inner.clone());
            sample_energies.push(h);
        }
    }
    Ok(ChainOutput {
        samples,
        sample_energies,
        stats,
        trace,
        final_energy: st.conditional(),
        final_state: st.inner,
        seed: spec.chain.seed,
        final_counter: rng.counter(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `ln` of the estimate, finite even when the estimate overflows.
    pub log_estimate: f64,
    /// Largest single term over the sum of terms.
    pub max_weight_share: f64,
    pub divergent: bool,
}

/// A single term above this share of the sum flags an estimator dominated
/// by rare low-energy configurations.
pub const DIVERGENCE_SHARE: f64 = 0.2;

/// Monte Carlo estimate of `Z_Λ = E[exp(-H)]` under `π_Λ^z`.
pub fn estimate_partition(
    window: &Window,
    z: f64,
    marks: &MarkDistribution,
    model: &EnergyModel,
    n_samples: usize,
    seed: u64,
) -> Result<PartitionEstimate, McmcError> {
    if n_samples == 0 {
        return Err(McmcError::Spec("need at least one sample"));
    }
    let mut logs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let spec = PoissonSpec { window: window.clone(), z, marks: marks.clone(), seed: derive_seed(seed, i as u64) };
        let g = sample_poisson(&spec)?;
        logs.push(match model.energy(&g)? {
            Energy::Finite(h) => -h,
            Energy::Infinite => f64::NEG_INFINITY,
        });
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nf = n_samples as f64;
    if m == f64::NEG_INFINITY {
        return Ok(PartitionEstimate { estimate: 0.0, std_error: 0.0, log_estimate: m, max_weight_share: 0.0, divergent: false });
    }
    let w: Vec<f64> = logs.iter().map(|l| libm::exp(l - m)).collect();
    let sum: f64 = w.iter().sum();
    let mean = sum / nf;
    let var = if n_samples > 1 { w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    let scale = libm::exp(m);
    let share = 1.0 / sum;
    Ok(PartitionEstimate {
        estimate: scale * mean,
        std_error: scale * libm::sqrt(var / nf),
        log_estimate: m + libm::log(mean),
        max_weight_share: share,
        divergent: !model.is_nonnegative() && share > DIVERGENCE_SHARE,
    })
}

/// Empirical-field average `(1/|Λ_n|) Σ_{κ ∈ Λ_n ∩ ℤ²} mean_s F(θ_κ γ_s)`.
///
/// `F` depends on the configuration in `local` only. Samples live in
/// `Λ_n` and are tiled by independent copies: the tile at offset `t ≠ 0`
/// around sample `s` is another sample.
pub fn shift_average(
    samples: &[Configuration],
    f: &dyn Fn(&Configuration) -> f64,
    local: &Window,
    n: u64,
) -> Result<f64, McmcError> {
    if samples.is_empty() {
        return Err(McmcError::Spec("no samples"));
    }
    let dim = samples[0].dim();
    if dim != 2 {
        return Err(McmcError::Spec("shift averages are planar"));
    }
    let side = 2.0 * n as f64;
    let (llo, lhi) = local.bounds();
    let nn = n as i64;
    let tiles_needed = |lo: f64, hi: f64| -> (i64, i64) {
        (libm::floor((lo + n as f64) / side) as i64, libm::floor((hi + n as f64) / side) as i64)
    };
    let s_len = samples.len();
    let mut total = 0.0;
    for kx in -nn..nn {
        for ky in -nn..nn {
            let kappa = [kx as f64, ky as f64];
            let shifted = Window::new_box(
                &[llo[0] + kappa[0], llo[1] + kappa[1]],
                &[lhi[0] + kappa[0], lhi[1] + kappa[1]],
            )
            .map_err(|_| McmcError::Spec("local window"))?;
            let (tx0, tx1) = tiles_needed(llo[0] + kappa[0], lhi[0] + kappa[0]);
            let (ty0, ty1) = tiles_needed(llo[1] + kappa[1], lhi[1] + kappa[1]);
            let mut acc = 0.0;
            for s in 0..s_len {
                let mut pts = Vec::new();
                for tx in tx0..=tx1 {
                    for ty in ty0..=ty1 {
                        let idx = tile_index(tx, ty);
                        let src = &samples[(s + idx) % s_len];
                        for p in src {
                            let mut q = *p;
                            q.loc[0] += tx as f64 * side;
                            q.loc[1] += ty as f64 * side;
                            if shifted.contains(&q.loc) {
                                q.loc[0] -= kappa[0];
                                q.loc[1] -= kappa[1];
                                pts.push(q);
                            }
                        }
                    }
                }
                acc += f(&Configuration::from_points(2, pts)?);
            }
            total += acc / s_len as f64;
        }
    }
    Ok(total / (side * side))
}

/// Distinct indices for tile offsets, 0 at the origin (zigzag then Cantor pairing).
fn tile_index(tx: i64, ty: i64) -> usize {
    let zz = |v: i64| (if v >= 0 { 2 * v } else { -2 * v - 1 }) as usize;
    let (a, b) = (zz(tx), zz(ty));
    (a + b) * (a + b + 1) / 2 + b
}
