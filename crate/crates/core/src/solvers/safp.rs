use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;

use super::fixed_point::{fixed_point_solve, max_abs_diff, normalize, TraceRecord};
use super::mapping::{utility, FrozenMap, LoadConstraint};
use super::{Instance, MutingMap, Protocol, SolveOutcome, SolverConfig};
use crate::channel::LinkCoupling;
use crate::error::Result;
use crate::interference::ReuseCoupling;
use crate::model::Scenario;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ReuseMode {
    /// Reuse coupling recomputed from the loads.
    Flex,
    /// Reuse coupling pinned to all ones.
    AllOnes,
}

#[derive(Clone)]
pub(crate) struct Restart {
    pub w: Vec<f64>,
    pub rho: f64,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
}

/// Result of one outer step, kept for replaying cycles.
struct Step {
    w: Vec<f64>,
    delta: f64,
    trace: Range<usize>,
}

/// Uniform(0,1) entries rescaled onto the constraint boundary.
fn random_start(n: usize, seed: u64, restart: usize, g: &LoadConstraint) -> Vec<f64> {
    let mut rng = rng::stream(seed, &[restart as u64]);
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    normalize(&mut w, g);
    w
}

struct Subproblem<'a> {
    inst: &'a Instance<'a>,
    g: LoadConstraint,
    muted: &'a MutingMap,
    mode: ReuseMode,
}

impl Subproblem<'_> {
    fn reuse_at(&self, w: &[f64]) -> Result<ReuseCoupling> {
        match self.mode {
            ReuseMode::Flex => self.inst.reuse_at(w, self.muted),
            ReuseMode::AllOnes => Ok(ReuseCoupling::all_ones(w.len())),
        }
    }

    fn frozen(&self, reuse: &ReuseCoupling) -> Result<FrozenMap> {
        let inst = self.inst;
        FrozenMap::new(
            inst.coupling,
            Some(reuse),
            inst.scn.grid(),
            &inst.demands,
            &inst.p,
        )
    }

    fn run(&self, config: &SolverConfig, restart: usize) -> Result<Restart> {
        let mut w = random_start(self.inst.scn.n_services(), config.seed, restart, &self.g);
        let mut reuse = self.reuse_at(&w)?;
        let mut trace = Vec::new();
        let mut inner_ok = true;
        let mut delta;
        // Each outer step is a pure function of the incoming `w`, so once an
        // iterate repeats bit for bit the remaining steps up to the cap are
        // replayed from history instead of recomputed.
        let mut steps: Vec<Step> = Vec::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        loop {
            let outer = steps.len();
            let f = self.frozen(&reuse)?;
            let start = trace.len();
            let sink = config.record_trace.then_some(&mut trace);
            let fp = fixed_point_solve(
                &f,
                &self.g,
                config.epsilon,
                config.inner_iter_cap,
                &w,
                outer,
                sink,
            );
            inner_ok &= fp.converged;
            delta = max_abs_diff(&fp.w, &w);
            w = fp.w;
            steps.push(Step {
                w: w.clone(),
                delta,
                trace: start..trace.len(),
            });
            if delta < config.epsilon || steps.len() >= config.n_iter {
                break;
            }
            let key = w.iter().map(|x| x.to_bits()).collect();
            if let Some(first) = seen.insert(key, outer) {
                let period = outer - first;
                for t in steps.len()..config.n_iter {
                    let src = &steps[first + 1 + (t - first - 1) % period];
                    if config.record_trace {
                        let replay: Vec<TraceRecord> = trace[src.trace.clone()]
                            .iter()
                            .map(|r| TraceRecord { outer: t, ..*r })
                            .collect();
                        trace.extend(replay);
                    }
                    if t + 1 == config.n_iter {
                        w = src.w.clone();
                        delta = src.delta;
                    }
                }
                break;
            }
            reuse = self.reuse_at(&w)?;
        }
        let reuse = self.reuse_at(&w)?;
        let rho = utility(&w, &self.frozen(&reuse)?.eval(&w));
        Ok(Restart {
            w,
            rho,
            trace,
            converged: inner_ok && delta < config.epsilon,
        })
    }
}

/// Best of `config.n_max` restarts; ties go to the lowest restart index.
pub(crate) fn safp_core(
    inst: &Instance<'_>,
    muted: &MutingMap,
    mode: ReuseMode,
    config: &SolverConfig,
) -> Result<Restart> {
    config.check()?;
    let sub = Subproblem {
        inst,
        g: LoadConstraint::muted(inst.scn, muted),
        muted,
        mode,
    };
    let runs = config
        .execution
        .map_indexed(config.n_max, |i| sub.run(config, i));
    let mut best: Option<Restart> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().map_or(true, |b| run.rho > b.rho) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_max >= 1"))
}

pub fn solve_safp(
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    solve_safp_mode(scn, coupling, config, ReuseMode::Flex)
}

/// SAFP with the reuse coupling pinned to all ones, which collapses it
/// onto the load-proportional model.
pub fn solve_safp_all_ones(
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    solve_safp_mode(scn, coupling, config, ReuseMode::AllOnes)
}

fn solve_safp_mode(
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
    mode: ReuseMode,
) -> Result<SolveOutcome> {
    let inst = Instance::new(scn, coupling)?;
    let best = safp_core(&inst, &MutingMap::new(), mode, config)?;
    safp_outcome(&inst, best, config)
}

pub(crate) fn safp_outcome(
    inst: &Instance<'_>,
    best: Restart,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let none = MutingMap::new();
    let reuse = inst.reuse_at(&best.w, &none)?;
    inst.outcome(
        Protocol::Safp,
        best.w,
        &reuse,
        none,
        best.trace,
        best.converged,
        config.n_max,
    )
}

/// Fixed-point iteration on the load-proportional model from one random
/// start. The reported utility is re-evaluated with the reuse coupling.
pub fn solve_fp(
    scn: &Scenario,
    coupling: &LinkCoupling,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    config.check()?;
    let inst = Instance::new(scn, coupling)?;
    let g = LoadConstraint::plain(scn);
    let f = FrozenMap::new(coupling, None, scn.grid(), &inst.demands, &inst.p)?;
    let start = random_start(scn.n_services(), config.seed, 0, &g);
    let mut trace = Vec::new();
    let sink = config.record_trace.then_some(&mut trace);
    let fp = fixed_point_solve(
        &f,
        &g,
        config.epsilon,
        config.inner_iter_cap,
        &start,
        0,
        sink,
    );
    let none = MutingMap::new();
    let reuse = inst.reuse_at(&fp.w, &none)?;
    inst.outcome(Protocol::Fp, fp.w, &reuse, none, trace, fp.converged, 1)
}
