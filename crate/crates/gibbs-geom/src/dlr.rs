//! Statistical check of the DLR equation on one inner window.
//!
//! Sample A is `γ_Λ` from full-window chains on `Λ_n`. Sample B redraws
//! `γ'_Λ ~ Ξ_Λ(ξ, ·)` with `ξ` the same chain state outside `Λ`. Counts and
//! conditional energies of A and B are compared by two-sample KS tests
//! with Bonferroni correction.

use anyhow::{bail, Result};
use gibbs_geom_core::config::Configuration;
use gibbs_geom_core::mcmc::{run_chain, ChainSettings, EnergyModel, GibbsSpec, KernelMutation};
use gibbs_geom_core::poisson::MarkDistribution;
use gibbs_geom_core::rng::derive_seed;
use gibbs_geom_core::window::Window;
use rayon::prelude::*;
use serde::Serialize;

use crate::stats::{effective_sample_size, ks_two_sample, KsResult};

const KERNEL_SALT: u64 = 0x6b65_726e_656c;

#[derive(Clone, Debug, PartialEq)]
pub struct DlrSpec {
    /// Half side of the outer cube `Λ_n`.
    pub big_n: u64,
    pub small: Window,
    pub z: f64,
    pub marks: MarkDistribution,
    pub model: EnergyModel,
    pub chains: usize,
    /// Settings of each full-window chain; the seed is derived per chain.
    pub chain: ChainSettings,
    /// Length of each kernel resampling chain started from `∅`.
    pub kernel_steps: u64,
    pub seed: u64,
    /// Defect injected into the kernel resampling only.
    pub mutation: KernelMutation,
    pub min_effective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DlrResult {
    /// Largest KS distance.
    pub statistic: f64,
    /// Bonferroni-corrected p-value over both coordinates.
    pub p_value: f64,
    pub count: KsResult,
    pub energy: KsResult,
    pub samples: usize,
    pub effective_samples: f64,
    pub mean_count_a: f64,
    pub mean_count_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum DlrOutcome {
    Tested(DlrResult),
    /// Too few effective samples; no test was run.
    Insufficient { effective_samples: f64, required: f64 },
}

impl DlrOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            DlrOutcome::Tested(r) => Some(r.p_value),
            DlrOutcome::Insufficient { .. } => None,
        }
    }
}

/// `H(inner ∪ outer) - H(outer)`.
fn conditional(model: &EnergyModel, inner: &Configuration, outer: &Configuration) -> Result<f64> {
    let full = model.energy(&inner.union(outer)?)?;
    let out = model.energy(outer)?;
    match (full.finite(), out.finite()) {
        (Some(a), Some(b)) => Ok(a - b),
        _ => bail!("infinite energy in a chain sample"),
    }
}

struct ChainStats {
    a: Vec<(f64, f64)>,
    b: Vec<(f64, f64)>,
    ess: f64,
}

fn one_chain(spec: &DlrSpec, c: usize) -> Result<ChainStats> {
    let big = Window::cube(spec.big_n as f64, spec.small.dim());
    if !spec.small.closure_within(&big) {
        bail!("inner window must lie inside the outer cube");
    }
    let mut settings = spec.chain.clone();
    settings.seed = derive_seed(spec.seed, c as u64);
    let full = GibbsSpec::new(big, spec.z, spec.marks.clone(), spec.model.clone(), settings);
    let out = run_chain(&full)?;
    let mut a = Vec::with_capacity(out.samples.len());
    let mut b = Vec::with_capacity(out.samples.len());
    for (j, s) in out.samples.iter().enumerate() {
        let inner = s.filter(|p| spec.small.contains(&p.loc));
        let outer = s.filter(|p| !spec.small.contains(&p.loc));
        a.push((inner.len() as f64, conditional(&spec.model, &inner, &outer)?));
        let mut ks = ChainSettings::new(spec.kernel_steps, spec.kernel_steps - 1, 1, derive_seed(spec.seed ^ KERNEL_SALT, ((c as u64) << 32) | j as u64));
        ks.move_mix = spec.chain.move_mix;
        let mut kernel = GibbsSpec::new(spec.small.clone(), spec.z, spec.marks.clone(), spec.model.clone(), ks);
        kernel.boundary = Some(outer);
        kernel.mutation = spec.mutation;
        let k = run_chain(&kernel)?;
        b.push((k.final_state.len() as f64, k.final_energy));
    }
    let counts: Vec<f64> = a.iter().map(|x| x.0).collect();
    Ok(ChainStats { ess: effective_sample_size(&counts), a, b })
}

pub fn dlr_consistency_test(spec: &DlrSpec) -> Result<DlrOutcome> {
    if spec.kernel_steps == 0 || spec.chains == 0 {
        bail!("need at least one chain and one kernel step");
    }
    let per_chain: Vec<ChainStats> = (0..spec.chains).into_par_iter().map(|c| one_chain(spec, c)).collect::<Result<_>>()?;
    let ess: f64 = per_chain.iter().map(|c| c.ess).sum();
    if ess < spec.min_effective {
        return Ok(DlrOutcome::Insufficient { effective_samples: ess, required: spec.min_effective });
    }
    let col = |f: fn(&ChainStats) -> &Vec<(f64, f64)>, k: usize| -> Vec<f64> {
        per_chain.iter().flat_map(|c| f(c).iter().map(move |x| if k == 0 { x.0 } else { x.1 })).collect()
    };
    let (ac, ae) = (col(|c| &c.a, 0), col(|c| &c.a, 1));
    let (bc, be) = (col(|c| &c.b, 0), col(|c| &c.b, 1));
    let count = ks_two_sample(&ac, &bc);
    let energy = ks_two_sample(&ae, &be);
    Ok(DlrOutcome::Tested(DlrResult {
        statistic: count.statistic.max(energy.statistic),
        p_value: (2.0 * count.p_value.min(energy.p_value)).min(1.0),
        count,
        energy,
        samples: ac.len(),
        effective_samples: ess,
        mean_count_a: crate::stats::mean(&ac),
        mean_count_b: crate::stats::mean(&bc),
    }))
}
