//! Two-cell Monte-Carlo experiments over traffic-asymmetry grids.

mod aggregate;
mod records;

use std::fmt;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_channel, build_coupling, dbm_to_watt, ChannelParams, InterferenceFlags,
};
use crate::error::{Error, Result};
use crate::model::{
    traffic_distance_with, Direction, MruGrid, Point, Scenario, Service, TrafficNorm,
};
use crate::parallel::Execution;
use crate::rng;
use crate::solvers::{solve_many, Protocol, SolverConfig};

pub use aggregate::{
    aggregate, bin_index, Aggregates, BinSummary, ClassSummary, Ecdf, ProtocolSummary,
};
pub use records::{read_records, write_records, Record};

/// A two-way split in tenths: `Ratio(3)` is 3/7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio(pub u32);

impl Ratio {
    pub fn first(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    pub fn second(self) -> f64 {
        f64::from(10 - self.0) / 10.0
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0, 10 - self.0)
    }
}

impl std::str::FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad ratio '{s}', expected a/b with a + b = 10"));
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a + b != 10 {
            return Err(bad());
        }
        Ok(Ratio(a))
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub runs: usize,
    /// Split of the total demand between cell 1 and cell 2.
    pub inter_ratios: Vec<Ratio>,
    /// UL/DL split inside a cell.
    pub intra_ratios: Vec<Ratio>,
    pub total_demand_bits: f64,
    pub bs_spacing_m: f64,
    /// UEs are dropped where disks of this radius around both BSs meet.
    pub ue_radius_m: f64,
    pub bs_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub grid: MruGrid,
    pub channel: ChannelParams,
    pub interference: InterferenceFlags,
    pub solver: SolverConfig,
    pub protocols: Vec<Protocol>,
    pub traffic_norm: TrafficNorm,
    /// Distance bin edges; the last bin is closed and absorbs `D` above it.
    pub bin_edges: Vec<f64>,
    /// `D <= split` is the low-distance class.
    pub distance_split: f64,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            runs: 50,
            inter_ratios: (1..=10).map(Ratio).collect(),
            intra_ratios: (1..=9).map(Ratio).collect(),
            total_demand_bits: 50e3,
            bs_spacing_m: 2000.0,
            ue_radius_m: 2000.0,
            bs_power_dbm: 43.0,
            ue_power_dbm: 22.0,
            grid: MruGrid::default(),
            channel: ChannelParams::default(),
            interference: InterferenceFlags::default(),
            solver: SolverConfig {
                record_trace: false,
                ..SolverConfig::default()
            },
            protocols: Protocol::ALL.to_vec(),
            traffic_norm: TrafficNorm::L2,
            bin_edges: vec![0.0, 0.16, 0.32, 0.48, 0.64, 0.80, 1.0],
            distance_split: 0.5,
            output_dir: PathBuf::from("results"),
            master_seed: 2017,
            execution: Execution::best_available(),
        }
    }
}

impl SweepConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if !(self.total_demand_bits > 0.0) {
            return bad("total demand must be positive");
        }
        if self.inter_ratios.is_empty() || self.intra_ratios.is_empty() || self.protocols.is_empty()
        {
            return bad("ratio sets and protocol list must be nonempty");
        }
        if self.inter_ratios.iter().any(|r| r.0 == 0 || r.0 > 10) {
            return bad("inter-cell ratios must give cell 1 a positive share");
        }
        if self.intra_ratios.iter().any(|r| r.0 > 10) {
            return bad("intra-cell ratio out of range");
        }
        if !(self.bs_spacing_m > 0.0) || !(2.0 * self.ue_radius_m > self.bs_spacing_m) {
            return bad("UE disks around the two BSs must intersect");
        }
        let e = &self.bin_edges;
        if e.len() < 2 || e[0] != 0.0 || e.windows(2).any(|p| p[1] <= p[0]) {
            return bad("bin edges must start at 0 and increase");
        }
        self.channel.check()?;
        self.solver.check()
    }

    /// Every `(inter, intra_1, intra_2)` triple, in enumeration order.
    pub fn combos(&self) -> Vec<Combo> {
        let mut out = Vec::new();
        for &inter in &self.inter_ratios {
            for &intra1 in &self.intra_ratios {
                for &intra2 in &self.intra_ratios {
                    out.push(Combo {
                        inter,
                        intra: [intra1, intra2],
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Combo {
    pub inter: Ratio,
    pub intra: [Ratio; 2],
}

/// Uniform point in the lens where both BS disks overlap.
fn sample_lens<R: Rng>(rng: &mut R, bs: [Point; 2], radius: f64) -> Point {
    let spacing = (bs[1][0] - bs[0][0]).hypot(bs[1][1] - bs[0][1]);
    let half_width = (radius * radius - spacing * spacing / 4.0).sqrt();
    let (x_lo, x_hi) = (spacing - radius, radius);
    let (ux, uy) = (
        (bs[1][0] - bs[0][0]) / spacing,
        (bs[1][1] - bs[0][1]) / spacing,
    );
    loop {
        let a = rng.gen_range(x_lo..x_hi);
        let b = rng.gen_range(-half_width..half_width);
        let p = [bs[0][0] + a * ux - b * uy, bs[0][1] + a * uy + b * ux];
        let inside = bs
            .iter()
            .all(|c| (p[0] - c[0]).hypot(p[1] - c[1]) <= radius);
        if inside {
            return p;
        }
    }
}

/// Two BSs, one UL and one DL service per cell with demands split by the
/// given ratios; zero-demand services are left out.
pub fn generate_scenario(
    config: &SweepConfig,
    inter: Ratio,
    intra: [Ratio; 2],
    run_seed: u64,
) -> Result<Scenario> {
    let bs = [[0.0, 0.0], [config.bs_spacing_m, 0.0]];
    let mut place = rng::stream(run_seed, &[0]);
    let cell_share = [inter.first(), inter.second()];
    let (bs_w, ue_w) = (
        dbm_to_watt(config.bs_power_dbm),
        dbm_to_watt(config.ue_power_dbm),
    );

    let mut services = Vec::new();
    let mut ues = Vec::new();
    for cell in 0..2 {
        for (direction, share) in [
            (Direction::Ul, intra[cell].first()),
            (Direction::Dl, intra[cell].second()),
        ] {
            let demand_bits = config.total_demand_bits * cell_share[cell] * share;
            if demand_bits <= 0.0 {
                continue;
            }
            let tx_power_watt = if direction == Direction::Ul {
                ue_w
            } else {
                bs_w
            };
            services.push(Service {
                ue: ues.len(),
                bs: cell,
                direction,
                demand_bits,
                tx_power_watt,
            });
            ues.push(sample_lens(&mut place, bs, config.ue_radius_m));
        }
    }
    Scenario::new(bs.to_vec(), ues, services, config.grid)
}

/// Seeds for one Monte-Carlo run: `[placement, channel, solver]` derive
/// from this by path.
pub fn run_seed(master: u64, combo: usize, run: usize) -> u64 {
    rng::derive_seed(master, &[combo as u64, run as u64])
}

/// Generates one scenario and solves it with every configured protocol.
pub fn run_once(
    config: &SweepConfig,
    combo_index: usize,
    combo: Combo,
    run: usize,
) -> Result<Vec<Record>> {
    let seed = run_seed(config.master_seed, combo_index, run);
    let scn = generate_scenario(config, combo.inter, combo.intra, seed)?;
    let distance = traffic_distance_with(&scn, config.traffic_norm)?;
    let params = ChannelParams {
        seed: rng::derive_seed(seed, &[1]),
        ..config.channel.clone()
    };
    let chan = build_channel(&scn, &params)?;
    let coupling = build_coupling(&scn, &chan, &params, config.interference)?;
    let solver = SolverConfig {
        seed: rng::derive_seed(seed, &[2]),
        ..config.solver.clone()
    };
    let outcomes = solve_many(&config.protocols, &scn, &coupling, &solver)?;
    Ok(outcomes
        .into_iter()
        .map(|out| Record {
            protocol: out.protocol,
            inter: combo.inter,
            intra1: combo.intra[0],
            intra2: combo.intra[1],
            run,
            distance,
            rho: out.rho_star,
            converged: out.converged,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<Record>,
    pub aggregates: Aggregates,
}

/// Full sweep; records come out in `(combo, run, protocol)` order whatever
/// the execution strategy.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.check()?;
    let combos = config.combos();
    let runs = config.runs;
    let per_task = config.execution.map_indexed(combos.len() * runs, |task| {
        let (c, r) = (task / runs, task % runs);
        run_once(config, c, combos[c], r)
    });
    let mut records = Vec::with_capacity(per_task.len() * config.protocols.len());
    for batch in per_task {
        records.extend(batch?);
    }
    let aggregates = aggregate(&records, &config.bin_edges, config.distance_split)?;
    Ok(SweepResult {
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_text() {
        assert_eq!(Ratio(3).to_string(), "3/7");
        assert_eq!("10/0".parse::<Ratio>().unwrap(), Ratio(10));
        assert!("3/8".parse::<Ratio>().is_err());
        assert!("x".parse::<Ratio>().is_err());
    }

    #[test]
    fn even_split_gives_equal_demands() {
        let cfg = SweepConfig::default();
        let scn = generate_scenario(&cfg, Ratio(5), [Ratio(5), Ratio(5)], 1).unwrap();
        assert_eq!(scn.n_services(), 4);
        assert!(scn
            .services()
            .iter()
            .all(|s| (s.demand_bits - 12500.0).abs() < 1e-9));
        assert!(scn.validate().is_empty());
    }

    #[test]
    fn empty_cell_drops_services() {
        let cfg = SweepConfig::default();
        let scn = generate_scenario(&cfg, Ratio(10), [Ratio(3), Ratio(6)], 4).unwrap();
        assert_eq!(scn.n_services(), 2);
        assert!(scn.services().iter().all(|s| s.bs == 0));
        let total: f64 = scn.demands().iter().sum();
        assert!((total - 50e3).abs() < 1e-9);
    }

    #[test]
    fn ues_stay_in_lens() {
        let cfg = SweepConfig::default();
        for seed in 0..200 {
            let scn = generate_scenario(&cfg, Ratio(4), [Ratio(2), Ratio(7)], seed).unwrap();
            for ue in scn.ue_positions() {
                for bs in scn.bs_positions() {
                    assert!((ue[0] - bs[0]).hypot(ue[1] - bs[1]) <= 2000.0);
                }
            }
        }
    }

    #[test]
    fn powers_follow_direction() {
        let cfg = SweepConfig::default();
        let scn = generate_scenario(&cfg, Ratio(5), [Ratio(5), Ratio(5)], 1).unwrap();
        for s in scn.services() {
            let expected = if s.direction == Direction::Ul {
                0.158_489_319
            } else {
                19.952_623_15
            };
            assert!((s.tx_power_watt - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn config_checks() {
        assert!(SweepConfig::default().check().is_ok());
        assert!(SweepConfig {
            runs: 0,
            ..Default::default()
        }
        .check()
        .is_err());
        assert!(SweepConfig {
            ue_radius_m: 900.0,
            ..Default::default()
        }
        .check()
        .is_err());
        assert!(SweepConfig {
            bin_edges: vec![0.1, 0.5],
            ..Default::default()
        }
        .check()
        .is_err());
        assert!(SweepConfig {
            inter_ratios: vec![Ratio(0)],
            ..Default::default()
        }
        .check()
        .is_err());
        assert_eq!(SweepConfig::default().combos().len(), 810);
    }

    #[test]
    fn config_json_defaults_fill_in() {
        let cfg: SweepConfig =
            serde_json::from_str(r#"{"runs": 3, "inter_ratios": ["2/8"]}"#).unwrap();
        assert_eq!(cfg.runs, 3);
        assert_eq!(cfg.inter_ratios, vec![Ratio(2)]);
        assert_eq!(cfg.intra_ratios.len(), 9);
    }

    #[test]
    fn tiny_sweep_counts() {
        let cfg = SweepConfig {
            runs: 1,
            inter_ratios: vec![Ratio(6)],
            intra_ratios: vec![Ratio(3)],
            protocols: vec![Protocol::Fix],
            ..Default::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.records.len(), 1);

        let cfg = SweepConfig {
            runs: 2,
            intra_ratios: vec![Ratio(3), Ratio(8)],
            inter_ratios: vec![Ratio(6)],
            protocols: vec![Protocol::Fix, Protocol::Dtdd],
            ..Default::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.records.len(), 2 * 4 * 2);
    }
}
