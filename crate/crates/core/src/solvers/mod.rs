//! Max-min resource partitioning solvers.
//!
//! * [`solve_fp`]: normalized fixed-point iteration on the load-proportional
//!   interference model.
//! * [`solve_safp`]: successive approximation, alternating a frozen reuse
//!   coupling with fixed-point solves over random restarts.
//! * [`solve_rmdi`]: SAFP plus resource muting for dominant interferers,
//!   rolled back as soon as muting stops paying off.
//!
//! All reported utilities are evaluated under the reuse-aware SINR model so
//! protocols can be compared directly.

mod fixed_point;
mod mapping;
mod rmdi;
mod safp;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{solve_dtdd, solve_fix};
use crate::channel::LinkCoupling;
use crate::error::{Error, Result};
use crate::interference::{qos, reuse_coupling, sinr_flex, ReuseCoupling};
use crate::model::{Allocation, Scenario};
use crate::parallel::Execution;

pub use fixed_point::{fixed_point_solve, FixedPoint, TraceRecord};
pub use mapping::{f_map, g_muted, g_norm, utility, FrozenMap, LoadConstraint};
pub use rmdi::{default_alpha, solve_rmdi};
pub use safp::{solve_fp, solve_safp, solve_safp_all_ones};

/// Service index to the cells that blank its resource.
pub type MutingMap = BTreeMap<usize, Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Random restarts.
    pub n_max: usize,
    /// Cap on coupling updates per restart.
    pub n_iter: usize,
    /// Infinity-norm convergence threshold.
    pub epsilon: f64,
    /// Muting threshold; `None` picks the median positive cell impact.
    pub alpha: Option<f64>,
    pub seed: u64,
    /// Safety bound on one fixed-point loop; hitting it marks the solve
    /// unconverged. Strongly interference-limited instances can need more
    /// than ten thousand steps.
    pub inner_iter_cap: usize,
    pub record_trace: bool,
    /// How SAFP restarts are scheduled.
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_max: 30,
            n_iter: 1000,
            epsilon: 1e-4,
            alpha: None,
            seed: 0,
            inner_iter_cap: 100_000,
            record_trace: true,
            execution: Execution::Sequential,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_max == 0 || self.n_iter == 0 || self.inner_iter_cap == 0 {
            return Err(Error::InvalidInput(
                "restart and iteration counts must be at least 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0) {
                return Err(Error::InvalidInput("alpha must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Fix,
    Dtdd,
    Fp,
    Safp,
    Rmdi,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Fix,
        Protocol::Dtdd,
        Protocol::Fp,
        Protocol::Safp,
        Protocol::Rmdi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Fix => "fix",
            Protocol::Dtdd => "dtdd",
            Protocol::Fp => "fp",
            Protocol::Safp => "safp",
            Protocol::Rmdi => "rmdi",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown protocol '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub protocol: Protocol,
    pub w_star: Allocation,
    pub rho_star: f64,
    pub rho_per_service: Vec<f64>,
    pub muted: MutingMap,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub restarts_used: usize,
}

/// Scenario-derived inputs shared by every solver.
pub(crate) struct Instance<'a> {
    pub scn: &'a Scenario,
    pub coupling: &'a LinkCoupling,
    pub p: Vec<f64>,
    pub demands: Vec<f64>,
}

impl<'a> Instance<'a> {
    pub fn new(scn: &'a Scenario, coupling: &'a LinkCoupling) -> Result<Self> {
        scn.ensure_valid()?;
        if coupling.n_services() != scn.n_services() {
            return Err(Error::Dimension {
                expected: scn.n_services(),
                got: coupling.n_services(),
            });
        }
        Ok(Self {
            scn,
            coupling,
            p: scn.mru_powers(),
            demands: scn.demands(),
        })
    }

    /// Reuse coupling at `w`, with overlap removed for muted resource.
    pub fn reuse_at(&self, w: &[f64], muted: &MutingMap) -> Result<ReuseCoupling> {
        let reuse = reuse_coupling(self.scn, w)?;
        Ok(if muted.is_empty() {
            reuse
        } else {
            reuse.with_muting(self.scn, muted)
        })
    }

    /// Per-service satisfaction under a given reuse coupling.
    pub fn qos_with(&self, w: &[f64], reuse: &ReuseCoupling) -> Result<(f64, Vec<f64>)> {
        let sinr = sinr_flex(self.coupling, reuse, w, &self.p)?;
        let q = qos(self.scn.grid(), w, &sinr, &self.demands)?;
        Ok((q.worst, q.per_service))
    }

    pub fn outcome(
        &self,
        protocol: Protocol,
        w: Vec<f64>,
        reuse: &ReuseCoupling,
        muted: MutingMap,
        trace: Vec<TraceRecord>,
        converged: bool,
        restarts_used: usize,
    ) -> Result<SolveOutcome> {
        let (rho_star, rho_per_service) = self.qos_with(&w, reuse)?;
        Ok(SolveOutcome {
            protocol,
            w_star: Allocation::new(w)?,
            rho_star,
            rho_per_service,
            muted,
            trace,
            converged,
            restarts_used,
        })
    }
}

/// Worst-case satisfaction of `w` under the reuse-aware model, optionally
/// with muting applied.
pub fn evaluate_flex(
    scn: &Scenario,
    coupling: &LinkCoupling,
    w: &[f64],
    muted: &MutingMap,
) -> Result<(f64, Vec<f64>)> {
    let inst = Instance::new(scn, coupling)?;
    let reuse = inst.reuse_at(w, muted)?;
    inst.qos_with(w, &reuse)
}

/// Runs one protocol on a scenario.
pub fn solve(
    protocol: Protocol,
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    match protocol {
        Protocol::Fix => solve_fix(scn, coupling),
        Protocol::Dtdd => solve_dtdd(scn, coupling),
        Protocol::Fp => solve_fp(scn, coupling, config),
        Protocol::Safp => solve_safp(scn, coupling, config),
        Protocol::Rmdi => solve_rmdi(scn, coupling, config),
    }
}

/// Runs several protocols on one scenario. SAFP and RMDI share the SAFP
/// solve when both are requested; outcomes equal separate [`solve`] calls.
pub fn solve_many(
    protocols: &[Protocol],
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<Vec<SolveOutcome>> {
    let shared = protocols.contains(&Protocol::Safp) && protocols.contains(&Protocol::Rmdi);
    if !shared {
        return protocols
            .iter()
            .map(|&p| solve(p, scn, coupling, config))
            .collect();
    }
    let inst = Instance::new(scn, coupling)?;
    let base = safp::safp_core(&inst, &MutingMap::new(), safp::ReuseMode::Flex, config)?;
    protocols
        .iter()
        .map(|&p| match p {
            Protocol::Safp => safp::safp_outcome(&inst, base.clone(), config),
            Protocol::Rmdi => rmdi::rmdi_from_base(&inst, base.clone(), config),
            _ => solve(p, scn, coupling, config),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("SAFP".parse::<Protocol>().unwrap(), Protocol::Safp);
        assert!("tdd".parse::<Protocol>().is_err());
    }

    #[test]
    fn config_checks() {
        assert!(SolverConfig::default().check().is_ok());
        assert!(SolverConfig {
            n_max: 0,
            ..Default::default()
        }
        .check()
        .is_err());
        assert!(SolverConfig {
            epsilon: 0.0,
            ..Default::default()
        }
        .check()
        .is_err());
        assert!(SolverConfig {
            alpha: Some(-1.0),
            ..Default::default()
        }
        .check()
        .is_err());
    }
}
