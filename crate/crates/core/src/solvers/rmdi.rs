//! Resource muting for dominant interferers.
//!
//! Services are ranked once by the interference they generate at the SAFP
//! solution. The top-k interferers get resource reserved in their own cell
//! and blanked in every strongly impacted neighbour; k grows until the
//! utility drops, and the last non-worse solution is returned.

use super::safp::{safp_core, Restart, ReuseMode};
use super::{Instance, MutingMap, Protocol, SolveOutcome, SolverConfig};
use crate::channel::LinkCoupling;
use crate::error::Result;
use crate::interference::{cell_impact, interferer_score, muting_set, ReuseCoupling};
use crate::model::Scenario;

/// Median of the positive per-cell impacts `J[s,m]`, `m != n_s`, at `w`.
/// Infinite when nothing interferes.
pub fn default_alpha(
    scn: &Scenario,
    coupling: &LinkCoupling,
    reuse: &ReuseCoupling,
    w: &[f64],
    p: &[f64],
) -> f64 {
    let mut impacts: Vec<f64> = (0..scn.n_services())
        .flat_map(|s| {
            let own = scn.services()[s].bs;
            cell_impact(scn, coupling, reuse, w, p, s)
                .into_iter()
                .enumerate()
                .filter(move |&(m, j)| m != own && j > 0.0)
                .map(|(_, j)| j)
        })
        .collect();
    if impacts.is_empty() {
        return f64::INFINITY;
    }
    impacts.sort_by(f64::total_cmp);
    let mid = impacts.len() / 2;
    if impacts.len() % 2 == 1 {
        impacts[mid]
    } else {
        0.5 * (impacts[mid - 1] + impacts[mid])
    }
}

/// Services by descending interferer score, ties by ascending index.
fn rank_interferers(inst: &Instance<'_>, reuse: &ReuseCoupling, w: &[f64]) -> Vec<usize> {
    let scores: Vec<f64> = (0..w.len())
        .map(|s| interferer_score(inst.coupling, reuse, w, &inst.p, s))
        .collect();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

pub fn solve_rmdi(
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let inst = Instance::new(scn, coupling)?;
    let base = safp_core(&inst, &MutingMap::new(), ReuseMode::Flex, config)?;
    rmdi_from_base(&inst, base, config)
}

/// RMDI starting from an already computed SAFP solution.
pub(crate) fn rmdi_from_base(
    inst: &Instance<'_>,
    base: Restart,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let (scn, coupling) = (inst.scn, inst.coupling);
    let none = MutingMap::new();
    let base_reuse = inst.reuse_at(&base.w, &none)?;
    let (base_rho, _) = inst.qos_with(&base.w, &base_reuse)?;

    let order = rank_interferers(inst, &base_reuse, &base.w);
    let alpha = config
        .alpha
        .unwrap_or_else(|| default_alpha(scn, coupling, &base_reuse, &base.w, &inst.p));

    let mut restarts = config.n_max;
    let mut best = base;
    let mut best_rho = base_rho;
    let mut best_muted = none;
    for k in 1..=order.len() {
        let reuse_now = inst.reuse_at(&best.w, &MutingMap::new())?;
        let muted: MutingMap = order[..k]
            .iter()
            .map(|&s| {
                let impacts = cell_impact(scn, coupling, &reuse_now, &best.w, &inst.p, s);
                (s, muting_set(&impacts, scn.services()[s].bs, alpha))
            })
            .filter(|(_, cells)| !cells.is_empty())
            .collect();

        let cand = safp_core(inst, &muted, ReuseMode::Flex, config)?;
        restarts += config.n_max;
        let reuse = inst.reuse_at(&cand.w, &muted)?;
        let (rho, _) = inst.qos_with(&cand.w, &reuse)?;
        if rho < best_rho {
            break;
        }
        best = cand;
        best_rho = rho;
        best_muted = muted;
    }

    let reuse = inst.reuse_at(&best.w, &best_muted)?;
    inst.outcome(
        Protocol::Rmdi,
        best.w,
        &reuse,
        best_muted,
        best.trace,
        best.converged,
        restarts,
    )
}
