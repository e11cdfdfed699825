//! JSON representations of core types.

use anyhow::{anyhow, bail, Context, Result};
use gibbs_geom_core::config::{Configuration, Mark, MarkedPoint};
use gibbs_geom_core::counterexample::CounterexampleSpec;
use gibbs_geom_core::facet::{FacetEnergyModel, DEFAULT_TOLERANCE};
use gibbs_geom_core::laguerre::{Cell, LaguerreDiagram};
use gibbs_geom_core::laguerre_energy::{AdmissibilityReport, BboxRule, CSetReport};
use gibbs_geom_core::mcmc::EnergyModel;
use gibbs_geom_core::poisson::{DirectionLaw, MarkDistribution, RealLaw};
use gibbs_geom_core::window::Window;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MarkDto {
    Weight(f64),
    Facet { normal: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDto {
    pub loc: Vec<f64>,
    pub mark: MarkDto,
}

/// `{"dim": 2, "points": [{"loc": [x, y], "mark": {"weight": w}}, …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationDto {
    pub dim: usize,
    pub points: Vec<PointDto>,
}

impl From<&Configuration> for ConfigurationDto {
    fn from(c: &Configuration) -> Self {
        let d = c.dim();
        let points = c
            .iter()
            .map(|p| PointDto {
                loc: p.loc[..d].to_vec(),
                mark: match p.mark {
                    Mark::Weight(w) => MarkDto::Weight(w),
                    Mark::Facet { normal, radius } => MarkDto::Facet { normal: normal[..d].to_vec(), radius },
                },
            })
            .collect();
        ConfigurationDto { dim: d, points }
    }
}

impl TryFrom<&ConfigurationDto> for Configuration {
    type Error = anyhow::Error;
    fn try_from(c: &ConfigurationDto) -> Result<Self> {
        let mut pts = Vec::with_capacity(c.points.len());
        for (i, p) in c.points.iter().enumerate() {
            if p.loc.len() != c.dim {
                bail!("point {i}: location has {} coordinates, expected {}", p.loc.len(), c.dim);
            }
            pts.push(match &p.mark {
                MarkDto::Weight(w) => MarkedPoint::weighted(&p.loc, *w),
                MarkDto::Facet { normal, radius } => {
                    if normal.len() != c.dim {
                        bail!("point {i}: normal has wrong dimension");
                    }
                    MarkedPoint::facet(&p.loc, normal, *radius)
                }
            });
        }
        Configuration::from_points(c.dim, pts).map_err(|e| anyhow!("{e}"))
    }
}

pub fn configuration_to_json(c: &Configuration) -> String {
    serde_json::to_string_pretty(&ConfigurationDto::from(c)).expect("serialisable")
}

pub fn configuration_from_json(s: &str) -> Result<Configuration> {
    let dto: ConfigurationDto = serde_json::from_str(s).context("configuration JSON")?;
    Configuration::try_from(&dto)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum WindowDto {
    /// Half-open cube `[-n, n)^dim`.
    Cube { n: f64, dim: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64, #[serde(default)] closed: bool },
}

impl WindowDto {
    pub fn build(&self) -> Result<Window> {
        Ok(match self {
            WindowDto::Cube { n, dim } => {
                if !(n.is_finite() && *n > 0.0) || !(2..=3).contains(dim) {
                    bail!("cube needs n > 0 and dim 2 or 3");
                }
                Window::cube(*n, *dim)
            }
            WindowDto::Box { lower, upper } => Window::new_box(lower, upper)?,
            WindowDto::Ball { center, radius, closed } => Window::new_ball(center, *radius, *closed)?,
        })
    }
}

impl From<&Window> for WindowDto {
    fn from(w: &Window) -> Self {
        match w {
            Window::Box { dim, lower, upper } => WindowDto::Box { lower: lower[..*dim].to_vec(), upper: upper[..*dim].to_vec() },
            Window::Ball { dim, center, radius, closed } => {
                WindowDto::Ball { center: center[..*dim].to_vec(), radius: *radius, closed: *closed }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RealLawDto {
    Uniform { lo: f64, hi: f64 },
    /// `[[value, probability], …]`.
    Atoms(Vec<(f64, f64)>),
}

impl RealLawDto {
    fn build(&self) -> RealLaw {
        match self {
            RealLawDto::Uniform { lo, hi } => RealLaw::Uniform { lo: *lo, hi: *hi },
            RealLawDto::Atoms(a) => RealLaw::Atoms(a.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DirectionDto {
    UniformHemisphere,
    /// `[[normal, probability], …]`.
    Atoms(Vec<(Vec<f64>, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MarksDto {
    Weight(RealLawDto),
    Facet { direction: DirectionDto, radius: RealLawDto },
}

impl MarksDto {
    pub fn build(&self) -> Result<MarkDistribution> {
        Ok(match self {
            MarksDto::Weight(l) => MarkDistribution::Weight(l.build()),
            MarksDto::Facet { direction, radius } => MarkDistribution::Facet {
                direction: match direction {
                    DirectionDto::UniformHemisphere => DirectionLaw::UniformHemisphere,
                    DirectionDto::Atoms(a) => DirectionLaw::Atoms(
                        a.iter()
                            .map(|(n, p)| {
                                if !(2..=3).contains(&n.len()) {
                                    bail!("direction atom must have 2 or 3 coordinates");
                                }
                                let mut v = [0.0; 3];
                                v[..n.len()].copy_from_slice(n);
                                Ok((v, *p))
                            })
                            .collect::<Result<_>>()?,
                    ),
                },
                radius: radius.build(),
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum BboxDto {
    Fixed(WindowDto),
    Auto { factor: f64, max_doublings: u32 },
}

impl BboxDto {
    pub fn build(&self) -> Result<BboxRule> {
        Ok(match self {
            BboxDto::Fixed(w) => BboxRule::Fixed(w.build()?),
            BboxDto::Auto { factor, max_doublings } => BboxRule::Auto { factor: *factor, max_doublings: *max_doublings },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelDto {
    /// Coefficients `a_2, …, a_d`.
    Facet { dim: usize, coefficients: Vec<f64>, #[serde(default)] tolerance: Option<f64> },
    LaguerreVertex { #[serde(default)] bbox: Option<BboxDto> },
}

impl ModelDto {
    pub fn build(&self) -> Result<EnergyModel> {
        Ok(match self {
            ModelDto::Facet { dim, coefficients, tolerance } => {
                let mut m = FacetEnergyModel::new(*dim, coefficients.clone())?;
                m.tolerance = tolerance.unwrap_or(DEFAULT_TOLERANCE);
                EnergyModel::Facet(m)
            }
            ModelDto::LaguerreVertex { bbox } => {
                EnergyModel::LaguerreVertex(bbox.as_ref().map(|b| b.build()).transpose()?.unwrap_or_default())
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleDto {
    pub n: usize,
    pub n1: [f64; 2],
    pub n2: [f64; 2],
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl From<&CounterexampleDto> for CounterexampleSpec {
    fn from(d: &CounterexampleDto) -> Self {
        CounterexampleSpec { n: d.n, n1: d.n1, n2: d.n2, u: d.u, v: d.v, eps: d.eps, a: d.a, b: d.b, z: d.z }
    }
}

/// Cell vertices, or `"EMPTY"` / `"OUTSIDE_BBOX"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellVerticesDto {
    Polygon(Vec<[f64; 2]>),
    Marker(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDto {
    pub vertices: CellVerticesDto,
    pub clipped: bool,
    pub neighbors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDto {
    pub nucleus: [f64; 2],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDto {
    pub point: [f64; 2],
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDto {
    pub cells: [usize; 2],
    pub endpoints: [[f64; 2]; 2],
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramDto {
    pub bbox: [[f64; 2]; 2],
    pub generators: Vec<GeneratorDto>,
    pub cells: Vec<CellDto>,
    pub vertices: Vec<VertexDto>,
    pub edges: Vec<EdgeDto>,
}

impl From<&LaguerreDiagram> for DiagramDto {
    fn from(d: &LaguerreDiagram) -> Self {
        DiagramDto {
            bbox: [d.bbox.0, d.bbox.1],
            generators: d.generators.iter().map(|g| GeneratorDto { nucleus: g.nucleus, weight: g.weight }).collect(),
            cells: d
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| match c {
                    Cell::Empty => CellDto { vertices: CellVerticesDto::Marker("EMPTY".into()), clipped: false, neighbors: vec![] },
                    Cell::OutsideBbox => {
                        CellDto { vertices: CellVerticesDto::Marker("OUTSIDE_BBOX".into()), clipped: false, neighbors: vec![] }
                    }
                    Cell::Polygon(p) => CellDto {
                        vertices: CellVerticesDto::Polygon(p.vertices.clone()),
                        clipped: p.clipped(),
                        neighbors: d.neighbors[i].clone(),
                    },
                })
                .collect(),
            vertices: d.vertices.iter().map(|v| VertexDto { point: v.point, cells: v.cells.clone() }).collect(),
            edges: d
                .edges
                .iter()
                .map(|e| EdgeDto { cells: [e.cells.0, e.cells.1], endpoints: e.endpoints, bounded: e.bounded })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CSetDto {
    pub window: WindowDto,
    pub a: f64,
    pub l: u64,
    pub n: u64,
    pub c1: bool,
    pub c2: bool,
    pub c2_grid_step: f64,
    pub c2_grid_points: usize,
    pub c2_witness: Option<[f64; 2]>,
    pub radii_compatible: bool,
}

impl From<&CSetReport> for CSetDto {
    fn from(r: &CSetReport) -> Self {
        CSetDto {
            window: WindowDto::from(&r.params.window),
            a: r.params.a,
            l: r.params.l,
            n: r.params.n,
            c1: r.c1,
            c2: r.c2.holds,
            c2_grid_step: r.c2.grid_step,
            c2_grid_points: r.c2.grid_points,
            c2_witness: r.c2.witness,
            radii_compatible: r.radii_compatible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityDto {
    pub all_hold: bool,
    pub gp1: bool,
    pub gp2: bool,
    pub no_empty: bool,
    pub empty_cells: Vec<usize>,
    pub tempered_level: Option<u64>,
    pub tempered_checked_up_to_l: u64,
    pub mbar_l: u64,
    pub mbar_checked_k_max: u64,
    pub mbar_holds: bool,
    pub c_set: CSetDto,
    pub r2_window_relative: bool,
}

impl From<&AdmissibilityReport> for AdmissibilityDto {
    fn from(r: &AdmissibilityReport) -> Self {
        AdmissibilityDto {
            all_hold: r.all_hold(),
            gp1: r.gp1,
            gp2: r.gp2,
            no_empty: r.no_empty,
            empty_cells: r.empty_cells.clone(),
            tempered_level: r.tempered_level,
            tempered_checked_up_to_l: r.tempered_l_max,
            mbar_l: r.mbar.l,
            mbar_checked_k_max: r.mbar.k_max,
            mbar_holds: r.mbar.holds,
            c_set: CSetDto::from(&r.c_set),
            r2_window_relative: r.r2_window_relative,
        }
    }
}
