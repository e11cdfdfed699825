//! JSON experiment configurations and their execution.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use gibbs_geom_core::config::{extent, temperedness_level, verify_tempered_growth, Configuration};
use gibbs_geom_core::counterexample::{divergence_table, CounterexampleSpec};
use gibbs_geom_core::facet::{compute_tau, facet_energy, FacetEnergyModel};
use gibbs_geom_core::laguerre::{build_diagram, check_general_position, is_normal, verify_far_power_bound};
use gibbs_geom_core::laguerre_energy::{
    default_grid_step, is_admissible, laguerre_energy, AdmissibilityParams, BboxRule, CSetParams,
};
use gibbs_geom_core::mcmc::{run_chain, ChainSettings, Cutoff, GibbsSpec, DEFAULT_MOVE_MIX};
use gibbs_geom_core::poisson::{sample_poisson, PoissonSpec};
use gibbs_geom_core::rng::{derive_seed, CounterRng};
use gibbs_geom_core::window::Window;
use gibbs_geom_core::{Energy, DEFAULT_DELTA};
use serde::{Deserialize, Serialize};

use crate::csv_out::{divergence_csv, trace_csv};
use crate::dlr::{dlr_consistency_test, DlrSpec};
use crate::dto::*;
use crate::io::{Manifest, OutputSet};
use crate::svg::{render_diagram, render_facets};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub out_dir: Option<String>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Source {
    Inline(ConfigurationDto),
    Poisson { window: WindowDto, z: f64, marks: MarksDto, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDto {
    pub steps: u64,
    #[serde(default)]
    pub burnin: u64,
    #[serde(default = "one")]
    pub thinning: u64,
    pub seed: u64,
    #[serde(default)]
    pub move_mix: Option<[f64; 3]>,
    #[serde(default)]
    pub translate_sigma: Option<f64>,
}

fn one() -> u64 {
    1
}

impl ChainDto {
    fn build(&self) -> ChainSettings {
        let mut c = ChainSettings::new(self.steps, self.burnin, self.thinning, self.seed);
        c.move_mix = self.move_mix.unwrap_or(DEFAULT_MOVE_MIX);
        c.translate_sigma = self.translate_sigma;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffDto {
    pub n: u64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Poisson {
        window: WindowDto,
        z: f64,
        marks: MarksDto,
        seed: u64,
    },
    FacetEnergy {
        configuration: ConfigurationDto,
        coefficients: Vec<f64>,
    },
    FacetCounterexample {
        spec: CounterexampleDto,
        #[serde(default)]
        marks: Option<MarksDto>,
        ks: Vec<u64>,
        seed: u64,
    },
    LaguerreBuild {
        generators: Source,
        bbox: WindowDto,
    },
    GibbsChain {
        window: WindowDto,
        z: f64,
        marks: MarksDto,
        model: ModelDto,
        #[serde(default)]
        boundary: Option<ConfigurationDto>,
        #[serde(default)]
        cutoff: Option<CutoffDto>,
        chain: ChainDto,
    },
    DlrTest {
        big_n: u64,
        small: WindowDto,
        z: f64,
        marks: MarksDto,
        model: ModelDto,
        chains: usize,
        chain: ChainDto,
        kernel_steps: u64,
        seed: u64,
    },
    Admissibility {
        configuration: ConfigurationDto,
        window: WindowDto,
        a: f64,
        l: u64,
        n: u64,
        observation_window: WindowDto,
        #[serde(default)]
        grid_step: Option<f64>,
        #[serde(default)]
        delta: Option<f64>,
    },
    PropertySuite {
        trials: usize,
        seed: u64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Poisson { .. } => "poisson",
            Experiment::FacetEnergy { .. } => "facet-energy",
            Experiment::FacetCounterexample { .. } => "facet-counterexample",
            Experiment::LaguerreBuild { .. } => "laguerre-build",
            Experiment::GibbsChain { .. } => "gibbs-chain",
            Experiment::DlrTest { .. } => "dlr-test",
            Experiment::Admissibility { .. } => "admissibility",
            Experiment::PropertySuite { .. } => "property-suite",
        }
    }

    fn seeds_mut(&mut self) -> Vec<&mut u64> {
        match self {
            Experiment::Poisson { seed, .. }
            | Experiment::FacetCounterexample { seed, .. }
            | Experiment::DlrTest { seed, .. }
            | Experiment::PropertySuite { seed, .. } => vec![seed],
            Experiment::LaguerreBuild { generators: Source::Poisson { seed, .. }, .. } => vec![seed],
            Experiment::GibbsChain { chain, .. } => vec![&mut chain.seed],
            _ => vec![],
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.clone().seeds_mut().into_iter().map(|s| *s).collect()
    }
}

/// Failure classes mapped to exit codes 2 and 1.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0:#}")]
    Schema(anyhow::Error),
    #[error("run failed: {0:#}")]
    Runtime(anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub verbose: bool,
}

pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig, RunError> {
    let cfg: ExperimentConfig = serde_json::from_slice(bytes).map_err(|e| RunError::Schema(e.into()))?;
    Ok(cfg)
}

/// Everything an experiment needs, built and checked before running.
enum Plan {
    Poisson(PoissonSpec),
    FacetEnergy(Configuration, FacetEnergyModel),
    Counterexample(CounterexampleSpec, gibbs_geom_core::poisson::MarkDistribution, Vec<u64>, u64),
    LaguerreBuild(Configuration, Window),
    Gibbs(Box<GibbsSpec>),
    Dlr(Box<DlrSpec>),
    Admissibility(Configuration, AdmissibilityParams),
    Properties(usize, u64),
}

fn source(s: &Source) -> Result<Configuration> {
    match s {
        Source::Inline(c) => Configuration::try_from(c),
        Source::Poisson { window, z, marks, seed } => Ok(sample_poisson(&PoissonSpec {
            window: window.build()?,
            z: *z,
            marks: marks.build()?,
            seed: *seed,
        })?),
    }
}

fn plan(e: &Experiment) -> Result<Plan> {
    Ok(match e {
        Experiment::Poisson { window, z, marks, seed } => {
            let spec = PoissonSpec { window: window.build()?, z: *z, marks: marks.build()?, seed: *seed };
            spec.validate()?;
            Plan::Poisson(spec)
        }
        Experiment::FacetEnergy { configuration, coefficients } => {
            let c = Configuration::try_from(configuration)?;
            let m = FacetEnergyModel::new(configuration.dim, coefficients.clone())?;
            Plan::FacetEnergy(c, m)
        }
        Experiment::FacetCounterexample { spec, marks, ks, seed } => {
            let s = CounterexampleSpec::from(spec);
            s.validate()?;
            if ks.is_empty() || ks.contains(&0) {
                bail!("ks must be nonempty and positive");
            }
            let m = marks.as_ref().map(|m| m.build()).transpose()?.unwrap_or_else(CounterexampleSpec::standard_marks);
            m.validate(2)?;
            Plan::Counterexample(s, m, ks.clone(), *seed)
        }
        Experiment::LaguerreBuild { generators, bbox } => {
            let c = source(generators)?;
            let w = bbox.build()?;
            if c.dim() != 2 || w.dim() != 2 {
                bail!("Laguerre diagrams are planar");
            }
            Plan::LaguerreBuild(c, w)
        }
        Experiment::GibbsChain { window, z, marks, model, boundary, cutoff, chain } => {
            let mut g = GibbsSpec::new(window.build()?, *z, marks.build()?, model.build()?, chain.build());
            g.boundary = boundary.as_ref().map(Configuration::try_from).transpose()?;
            g.cutoff = cutoff.as_ref().map(|c| Cutoff { n: c.n, a: c.a });
            g.chain.record_trace = true;
            g.validate()?;
            Plan::Gibbs(Box::new(g))
        }
        Experiment::DlrTest { big_n, small, z, marks, model, chains, chain, kernel_steps, seed } => {
            let small = small.build()?;
            if !small.closure_within(&Window::cube(*big_n as f64, small.dim())) {
                bail!("small window must lie inside the cube of half side big_n");
            }
            Plan::Dlr(Box::new(DlrSpec {
                big_n: *big_n,
                small,
                z: *z,
                marks: marks.build()?,
                model: model.build()?,
                chains: *chains,
                chain: chain.build(),
                kernel_steps: *kernel_steps,
                seed: *seed,
                mutation: Default::default(),
                min_effective: 100.0,
            }))
        }
        Experiment::Admissibility { configuration, window, a, l, n, observation_window, grid_step, delta } => {
            let c = Configuration::try_from(configuration)?;
            let w = window.build()?;
            let params = AdmissibilityParams {
                grid_step: grid_step.unwrap_or_else(|| default_grid_step(&w)),
                c_set: CSetParams { window: w, a: *a, l: *l, n: *n },
                delta: delta.unwrap_or(DEFAULT_DELTA),
                t_cap: 1 << 20,
                k_max: None,
                observation_window: observation_window.build()?,
                bbox: BboxRule::default(),
            };
            if params.grid_step.is_nan() || params.grid_step <= 0.0 {
                bail!("grid_step must be positive");
            }
            Plan::Admissibility(c, params)
        }
        Experiment::PropertySuite { trials, seed } => Plan::Properties(*trials, *seed),
    })
}

/// Checks the configuration without running it.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), RunError> {
    plan(&cfg.experiment).map(|_| ()).map_err(RunError::Schema)
}

#[derive(Serialize)]
struct EnergyOut {
    energy: f64,
    points: usize,
}

#[derive(Serialize)]
struct BuildReport {
    generators: usize,
    gp1: bool,
    gp2: bool,
    normal: bool,
    vertex_degree_histogram: std::collections::BTreeMap<usize, usize>,
    empty_cells: Vec<usize>,
    energy: Option<f64>,
    energy_infinite: bool,
}

#[derive(Serialize)]
struct ChainSummary {
    samples: usize,
    acceptance: [(String, u64, u64, f64); 3],
    final_points: usize,
    final_energy: f64,
    seed: u64,
    rng_counter: u64,
    geweke_count_z: f64,
}

#[derive(Serialize)]
struct Checkpoint {
    state: ConfigurationDto,
    rng: RngState,
}

#[derive(Serialize)]
struct RngState {
    seed: u64,
    stream: u64,
    counter: u64,
}

#[derive(Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub tempered_growth_passed: usize,
    pub far_power_bound_passed: bool,
    pub tau_monotone_pairs: usize,
    pub tau_pairs: usize,
}

/// Randomised property checks shared with the test-suite.
pub fn property_suite(trials: usize, seed: u64) -> Result<PropertyReport> {
    let mut passed = 0;
    for i in 0..trials {
        let g = random_tempered(derive_seed(seed, i as u64));
        let l_max = extent(&g).max(64);
        let t = temperedness_level(&g, DEFAULT_DELTA, l_max, u64::MAX)?.ok_or_else(|| anyhow!("untempered"))?;
        if verify_tempered_growth(&g, t, DEFAULT_DELTA, 1..=l_max)? {
            passed += 1;
        }
    }
    let far = (1..=8).all(|l| verify_far_power_bound(l, trials / 8 + 1, derive_seed(seed, 1 << 40 | l)));
    let mut rng = CounterRng::new(seed, 7);
    let mut monotone = 0;
    let pairs = 100;
    for _ in 0..pairs {
        let w = Window::cube(rng.uniform_in(0.5, 5.0), 2);
        let (m1, m2) = (rng.uniform_in(0.0, 20.0), rng.uniform_in(0.0, 20.0));
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        let l0 = rng.below(30);
        if compute_tau(lo, l0, &w)? <= compute_tau(hi, l0, &w)? {
            monotone += 1;
        }
    }
    Ok(PropertyReport {
        trials,
        tempered_growth_passed: passed,
        far_power_bound_passed: far,
        tau_monotone_pairs: monotone,
        tau_pairs: pairs,
    })
}

/// A configuration with a few far points carrying marks close to the
/// largest size allowed by its temperedness level.
pub fn random_tempered(seed: u64) -> Configuration {
    use gibbs_geom_core::config::MarkedPoint;
    let mut rng = CounterRng::new(seed, 0);
    let t = (1 + rng.below(3)) as f64;
    let k = 1 + rng.below(6);
    let mut pts = Vec::new();
    for _ in 0..k {
        let r = rng.uniform_in(0.0, 7.0).exp();
        let a = rng.uniform_in(0.0, std::f64::consts::TAU);
        // one point in U(0, l) may carry 1 + m^(2+δ) <= t l^2 for l just above r
        let cap = (t * r * r).powf(1.0 / (2.0 + DEFAULT_DELTA));
        let m = cap * rng.uniform_in(0.05, 1.0);
        pts.push(MarkedPoint::weighted(&[r * a.cos(), r * a.sin()], m.max(1e-3)));
    }
    Configuration::from_points(2, pts).unwrap_or_else(|_| Configuration::empty(2))
}

/// Runs the experiment and writes its outputs and `manifest.json`.
pub fn run(cfg: &ExperimentConfig, config_bytes: &[u8], opts: &RunOptions) -> Result<Manifest, RunError> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed_override {
        for seed in cfg.experiment.seeds_mut() {
            *seed = s;
        }
    }
    let plan = plan(&cfg.experiment).map_err(RunError::Schema)?;
    let dir = opts.out_dir.clone().or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let mut out = OutputSet::new(dir);
    execute(plan, &mut out, opts.verbose).map_err(RunError::Runtime)?;
    let mut hashed = config_bytes.to_vec();
    if let Some(s) = opts.seed_override {
        hashed.extend_from_slice(format!("\nseed-override={s}").as_bytes());
    }
    out.finish(cfg.experiment.kind(), &hashed, cfg.experiment.seeds()).map_err(RunError::Runtime)
}

fn execute(plan: Plan, out: &mut OutputSet, verbose: bool) -> Result<()> {
    match plan {
        Plan::Poisson(spec) => {
            let c = sample_poisson(&spec)?;
            if verbose {
                eprintln!("sampled {} points", c.len());
            }
            out.write_json("configuration.json", &ConfigurationDto::from(&c))?;
        }
        Plan::FacetEnergy(c, m) => {
            let e = facet_energy(&c, &m)?;
            out.write_json("energy.json", &EnergyOut { energy: e, points: c.len() })?;
            if c.dim() == 2 {
                let r = c.iter().map(|p| p.loc[0].abs().max(p.loc[1].abs()) + p.mark.norm()).fold(1.0, f64::max);
                out.write("facets.svg", render_facets(&c, [-r, -r], [r, r])?.as_bytes())?;
            }
        }
        Plan::Counterexample(spec, marks, ks, seed) => {
            let (scale, rates, rows) = divergence_table(&spec, &marks, &ks, seed)?;
            out.write("divergence.csv", &divergence_csv(&rows)?)?;
            #[derive(Serialize)]
            struct Scale {
                half_side: f64,
                m1: f64,
                m2: f64,
                validated_samples: usize,
                gamma_u: f64,
                gamma_v: f64,
                delta: f64,
            }
            out.write_json(
                "lambda.json",
                &Scale {
                    half_side: scale.s,
                    m1: scale.m1,
                    m2: scale.m2,
                    validated_samples: scale.validated_samples,
                    gamma_u: rates.gamma_u,
                    gamma_v: rates.gamma_v,
                    delta: rates.delta,
                },
            )?;
        }
        Plan::LaguerreBuild(c, bbox) => {
            let dia = build_diagram(&c, &bbox)?;
            let gp = check_general_position(&c)?;
            let normal = is_normal(&dia);
            let energy = laguerre_energy(&c, &bbox).ok().map(|r| r.value);
            let dto = DiagramDto::from(&dia);
            out.write_json("diagram.json", &dto)?;
            out.write("diagram.svg", render_diagram(&dto, &[]).as_bytes())?;
            out.write_json(
                "report.json",
                &BuildReport {
                    generators: c.len(),
                    gp1: gp.gp1,
                    gp2: gp.gp2,
                    normal: normal.normal,
                    vertex_degree_histogram: normal.vertex_degree_histogram,
                    empty_cells: dia.empty_cells(),
                    energy: energy.and_then(|e| e.finite()),
                    energy_infinite: energy == Some(Energy::Infinite),
                },
            )?;
        }
        Plan::Gibbs(spec) => {
            let o = run_chain(&spec)?;
            let counts: Vec<f64> = o.samples.iter().map(|s| s.len() as f64).collect();
            out.write("trace.csv", &trace_csv(&o.trace)?)?;
            out.write_json("samples.json", &o.samples.iter().map(ConfigurationDto::from).collect::<Vec<_>>())?;
            let names = ["birth", "death", "translate"];
            let acc = std::array::from_fn(|k| (names[k].to_string(), o.stats[k].proposed, o.stats[k].accepted, o.stats[k].rate()));
            out.write_json(
                "summary.json",
                &ChainSummary {
                    samples: o.samples.len(),
                    acceptance: acc,
                    final_points: o.final_state.len(),
                    final_energy: o.final_energy,
                    seed: o.seed,
                    rng_counter: o.final_counter,
                    geweke_count_z: if counts.len() >= 20 { crate::stats::geweke_z(&counts) } else { 0.0 },
                },
            )?;
            out.write_json(
                "checkpoint.json",
                &Checkpoint {
                    state: ConfigurationDto::from(&o.final_state),
                    rng: RngState { seed: o.seed, stream: 0, counter: o.final_counter },
                },
            )?;
        }
        Plan::Dlr(spec) => {
            let r = dlr_consistency_test(&spec)?;
            out.write_json("dlr.json", &r)?;
        }
        Plan::Admissibility(c, params) => {
            let r = is_admissible(&c, &params)?;
            out.write_json("admissibility.json", &AdmissibilityDto::from(&r))?;
        }
        Plan::Properties(trials, seed) => {
            let r = property_suite(trials, seed)?;
            out.write_json("properties.json", &r)?;
        }
    }
    Ok(())
}

/// Reads a config file, keeping the raw bytes for hashing.
pub fn load(path: &std::path::Path) -> Result<(ExperimentConfig, Vec<u8>), RunError> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display())).map_err(RunError::Schema)?;
    Ok((parse_config(&bytes)?, bytes))
}
