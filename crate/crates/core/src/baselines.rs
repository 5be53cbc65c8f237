//! Reference protocols: a fixed half/half UL/DL split aligned across cells
//! (FIX) and per-cell traffic-proportional dynamic TDD (dTDD).

use crate::channel::LinkCoupling;
use crate::error::Result;
use crate::model::{Direction, Scenario};
use crate::solvers::{Instance, MutingMap, Protocol, SolveOutcome};

/// Splits `share` of a cell among the selected services by demand.
fn proportional(
    scn: &Scenario,
    share: f64,
    pick: impl Fn(usize, Direction) -> Option<usize>,
) -> Vec<f64> {
    let n_groups = scn.n_bs() * 2;
    let mut totals = vec![0.0; n_groups];
    let key: Vec<Option<usize>> = scn
        .services()
        .iter()
        .map(|s| pick(s.bs, s.direction))
        .collect();
    for (svc, k) in scn.services().iter().zip(&key) {
        if let Some(k) = k {
            totals[*k] += svc.demand_bits;
        }
    }
    scn.services()
        .iter()
        .zip(&key)
        .map(|(svc, k)| k.map_or(0.0, |k| share * svc.demand_bits / totals[k]))
        .collect()
}

/// UL in the first half of every cell's grid, DL in the second half.
pub fn solve_fix(scn: &Scenario, coupling: &LinkCoupling) -> Result<SolveOutcome> {
    let inst = Instance::new(scn, coupling)?;
    let w = proportional(scn, 0.5, |n, dir| Some(2 * n + dir as usize));
    let mut reuse = inst.reuse_at(&w, &MutingMap::new())?;
    // halves are orthogonal, so opposite directions never overlap
    for (l, a) in scn.services().iter().enumerate() {
        for (s, b) in scn.services().iter().enumerate() {
            if a.direction != b.direction {
                reuse.c[[l, s]] = 0.0;
            }
        }
    }
    inst.outcome(
        Protocol::Fix,
        w,
        &reuse,
        MutingMap::new(),
        Vec::new(),
        true,
        0,
    )
}

/// Every cell fully occupied, split by the demand of its own services.
pub fn solve_dtdd(scn: &Scenario, coupling: &LinkCoupling) -> Result<SolveOutcome> {
    let inst = Instance::new(scn, coupling)?;
    let w = proportional(scn, 1.0, |n, _| Some(n));
    let reuse = inst.reuse_at(&w, &MutingMap::new())?;
    inst.outcome(
        Protocol::Dtdd,
        w,
        &reuse,
        MutingMap::new(),
        Vec::new(),
        true,
        0,
    )
}
