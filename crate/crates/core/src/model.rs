//! Network, service and resource-grid types.
//!
//! A [`Scenario`] is immutable once built. Association matrices are derived
//! from the service list at construction time and never serialized.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Planar coordinate in meters.
pub type Point = [f64; 2];

/// Minimum-resource-unit grid: `w_t` time units of `delta_t` seconds by
/// `w_f` frequency units of `delta_f` Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MruGrid {
    pub delta_t: f64,
    pub delta_f: f64,
    pub w_t: u32,
    pub w_f: u32,
}

impl MruGrid {
    pub fn new(delta_t: f64, delta_f: f64, w_t: u32, w_f: u32) -> Result<Self> {
        let grid = Self {
            delta_t,
            delta_f,
            w_t,
            w_f,
        };
        grid.check()?;
        Ok(grid)
    }

    fn check(&self) -> Result<()> {
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "delta_t must be positive, got {}",
                self.delta_t
            )));
        }
        if !(self.delta_f > 0.0 && self.delta_f.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "delta_f must be positive, got {}",
                self.delta_f
            )));
        }
        if self.w_t == 0 || self.w_f == 0 {
            return Err(Error::InvalidInput(
                "grid needs at least one time and one frequency unit".into(),
            ));
        }
        Ok(())
    }

    /// Total number of MRUs.
    pub fn total_units(&self) -> u64 {
        u64::from(self.w_t) * u64::from(self.w_f)
    }

    /// Bits carried by the whole grid at unit spectral efficiency (Hz·s).
    pub fn capacity_scale(&self) -> f64 {
        self.delta_t * self.delta_f * self.total_units() as f64
    }
}

impl Default for MruGrid {
    /// 0.5 ms x 15 kHz units, 20 x 300 of them: 10 ms over 4.5 MHz.
    fn default() -> Self {
        Self {
            delta_t: 0.5e-3,
            delta_f: 15e3,
            w_t: 20,
            w_f: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[serde(alias = "UL", alias = "u")]
    Ul,
    #[serde(alias = "DL", alias = "d")]
    Dl,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Ul => Direction::Dl,
            Direction::Dl => Direction::Ul,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Service {
    pub ue: usize,
    pub bs: usize,
    pub direction: Direction,
    pub demand_bits: f64,
    pub tx_power_watt: f64,
}

/// Indicator matrices relating UEs and BSs to services.
#[derive(Debug, Clone, PartialEq)]
pub struct Associations {
    /// K x S, UE-to-service.
    pub ue: Array2<f64>,
    /// N x S, BS-to-service.
    pub bs: Array2<f64>,
    pub bs_ul: Array2<f64>,
    pub bs_dl: Array2<f64>,
}

impl Associations {
    fn derive(n_bs: usize, n_ue: usize, services: &[Service]) -> Self {
        let s = services.len();
        let mut ue = Array2::zeros((n_ue, s));
        let mut bs_ul = Array2::zeros((n_bs, s));
        let mut bs_dl = Array2::zeros((n_bs, s));
        for (idx, svc) in services.iter().enumerate() {
            ue[[svc.ue, idx]] = 1.0;
            match svc.direction {
                Direction::Ul => bs_ul[[svc.bs, idx]] = 1.0,
                Direction::Dl => bs_dl[[svc.bs, idx]] = 1.0,
            }
        }
        let bs = &bs_ul + &bs_dl;
        Self {
            ue,
            bs,
            bs_ul,
            bs_dl,
        }
    }

    /// Structural problems with the indicator matrices, if any.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, m) in [("UE", &self.ue), ("BS", &self.bs)] {
            for (s, col) in m.columns().into_iter().enumerate() {
                let sum: f64 = col.sum();
                if sum > 1.0 {
                    out.push(format!(
                        "multi-associated service {s} ({name} column sum {sum})"
                    ));
                } else if sum < 1.0 {
                    out.push(format!(
                        "unassociated service {s} ({name} column sum {sum})"
                    ));
                }
            }
        }
        for ((n, s), &u) in self.bs_ul.indexed_iter() {
            let d = self.bs_dl[[n, s]];
            if u != 0.0 && d != 0.0 {
                out.push(format!("service {s} is both UL and DL at BS {n}"));
            }
            if self.bs[[n, s]] != u + d {
                out.push(format!("BS association at ({n}, {s}) is not the UL/DL sum"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScenarioDoc {
    bs_positions: Vec<Point>,
    ue_positions: Vec<Point>,
    services: Vec<Service>,
    grid: MruGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioDoc", into = "ScenarioDoc")]
pub struct Scenario {
    bs_positions: Vec<Point>,
    ue_positions: Vec<Point>,
    services: Vec<Service>,
    grid: MruGrid,
    assoc: Associations,
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = Error;

    fn try_from(doc: ScenarioDoc) -> Result<Self> {
        Scenario::new(doc.bs_positions, doc.ue_positions, doc.services, doc.grid)
    }
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> Self {
        ScenarioDoc {
            bs_positions: s.bs_positions,
            ue_positions: s.ue_positions,
            services: s.services,
            grid: s.grid,
        }
    }
}

impl Scenario {
    /// Builds a scenario and derives its association matrices.
    ///
    /// Only structural errors (dangling BS/UE indices, bad grid) fail here;
    /// value-level problems are reported by [`Scenario::validate`].
    pub fn new(
        bs_positions: Vec<Point>,
        ue_positions: Vec<Point>,
        services: Vec<Service>,
        grid: MruGrid,
    ) -> Result<Self> {
        grid.check()?;
        if bs_positions.is_empty() {
            return Err(Error::InvalidInput("scenario has no base stations".into()));
        }
        for (idx, svc) in services.iter().enumerate() {
            if svc.bs >= bs_positions.len() {
                return Err(Error::InvalidInput(format!(
                    "service {idx} refers to missing BS {}",
                    svc.bs
                )));
            }
            if svc.ue >= ue_positions.len() {
                return Err(Error::InvalidInput(format!(
                    "service {idx} refers to missing UE {}",
                    svc.ue
                )));
            }
        }
        let assoc = Associations::derive(bs_positions.len(), ue_positions.len(), &services);
        Ok(Self {
            bs_positions,
            ue_positions,
            services,
            grid,
            assoc,
        })
    }

    pub fn bs_positions(&self) -> &[Point] {
        &self.bs_positions
    }

    pub fn ue_positions(&self) -> &[Point] {
        &self.ue_positions
    }

    pub fn services(&self) -> &[Service] {
        &self.services
    }

    pub fn grid(&self) -> &MruGrid {
        &self.grid
    }

    pub fn associations(&self) -> &Associations {
        &self.assoc
    }

    pub fn n_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn n_ue(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn n_services(&self) -> usize {
        self.services.len()
    }

    pub fn demands(&self) -> Vec<f64> {
        self.services.iter().map(|s| s.demand_bits).collect()
    }

    /// Per-MRU transmit power: each service's power spread evenly over the
    /// frequency units of the grid.
    pub fn mru_powers(&self) -> Vec<f64> {
        let wf = f64::from(self.grid.w_f);
        self.services.iter().map(|s| s.tx_power_watt / wf).collect()
    }

    /// Indices of services served by BS `n`.
    pub fn services_of(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.services
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.bs == n)
            .map(|(i, _)| i)
    }

    /// Every violated invariant, empty when the scenario is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.assoc.issues();
        for (i, svc) in self.services.iter().enumerate() {
            if !(svc.demand_bits > 0.0) || !svc.demand_bits.is_finite() {
                out.push(format!(
                    "nonpositive demand for service {i}: {}",
                    svc.demand_bits
                ));
            }
            if !(svc.tx_power_watt > 0.0) || !svc.tx_power_watt.is_finite() {
                out.push(format!(
                    "nonpositive power for service {i}: {}",
                    svc.tx_power_watt
                ));
            }
        }
        let coords = self.bs_positions.iter().chain(&self.ue_positions);
        if coords.flat_map(|p| p.iter()).any(|c| !c.is_finite()) {
            out.push("non-finite node coordinate".into());
        }
        out
    }

    /// [`Scenario::validate`] as a `Result`.
    pub fn ensure_valid(&self) -> Result<()> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

/// Fraction of the grid given to each service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidInput(format!("allocation entry {i} is {v}")));
        }
        Ok(Self(w))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for Allocation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellLoads {
    pub total: Vec<f64>,
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
}

impl CellLoads {
    pub fn of(&self, n: usize, dir: Direction) -> f64 {
        match dir {
            Direction::Ul => self.ul[n],
            Direction::Dl => self.dl[n],
        }
    }
}

/// Per-cell total, UL and DL load for allocation `w`.
pub fn cell_loads(scn: &Scenario, w: &[f64]) -> Result<CellLoads> {
    check_len(scn.n_services(), w.len())?;
    let n = scn.n_bs();
    let mut ul = vec![0.0; n];
    let mut dl = vec![0.0; n];
    for (svc, &ws) in scn.services.iter().zip(w) {
        match svc.direction {
            Direction::Ul => ul[svc.bs] += ws,
            Direction::Dl => dl[svc.bs] += ws,
        }
    }
    let total = ul.iter().zip(&dl).map(|(u, d)| u + d).collect();
    Ok(CellLoads { total, ul, dl })
}

/// Vector norm used to compare per-cell traffic profiles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficNorm {
    L1,
    #[default]
    L2,
    LInf,
}

impl TrafficNorm {
    fn apply(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let (du, dd) = ((a[0] - b[0]).abs(), (a[1] - b[1]).abs());
        match self {
            TrafficNorm::L1 => du + dd,
            TrafficNorm::L2 => du.hypot(dd),
            TrafficNorm::LInf => du.max(dd),
        }
    }
}

/// Fraction of the total demand carried by each cell, split as `[ul, dl]`.
pub fn traffic_fractions(scn: &Scenario) -> Result<Vec<[f64; 2]>> {
    let total: f64 = scn.services.iter().map(|s| s.demand_bits).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("total demand must be positive".into()));
    }
    let mut theta = vec![[0.0; 2]; scn.n_bs()];
    for svc in &scn.services {
        let k = match svc.direction {
            Direction::Ul => 0,
            Direction::Dl => 1,
        };
        theta[svc.bs][k] += svc.demand_bits / total;
    }
    Ok(theta)
}

/// Inter-cell traffic distance under the Euclidean norm.
pub fn traffic_distance(scn: &Scenario) -> Result<f64> {
    traffic_distance_with(scn, TrafficNorm::L2)
}

/// Largest pairwise distance between per-cell traffic profiles.
pub fn traffic_distance_with(scn: &Scenario, norm: TrafficNorm) -> Result<f64> {
    if scn.n_bs() < 2 {
        return Err(Error::InvalidInput(
            "traffic distance needs at least two cells".into(),
        ));
    }
    let theta = traffic_fractions(scn)?;
    let mut best = 0.0_f64;
    for m in 0..theta.len() {
        for n in (m + 1)..theta.len() {
            best = best.max(norm.apply(theta[m], theta[n]));
        }
    }
    Ok(best)
}
