//! The resource-requirement mapping `f` and the load constraints `g`, `g'`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use crate::channel::LinkCoupling;
use crate::error::{check_len, Error, Result};
use crate::interference::ReuseCoupling;
use crate::model::{MruGrid, Scenario};

/// `f_s(w) = d_s / (dt * df * W * log2(1 + SINR_s(w)))` with the reuse
/// coupling frozen, which makes `f` a standard interference function.
///
/// Interference weights `c[l,s] * v[l,s] * p_l` are folded into one
/// column-major table so an evaluation is a single pass over `S^2` entries.
#[derive(Debug, Clone)]
pub struct FrozenMap {
    n: usize,
    /// `kernel[s * n + l]`: weight of `w_l` in the interference at `s`.
    kernel: Vec<f64>,
    p: Vec<f64>,
    sigma: Vec<f64>,
    /// `d_s * ln 2 / (dt * df * W)`.
    need: Vec<f64>,
}

impl FrozenMap {
    /// `reuse = None` gives the load-proportional (legacy) interference model.
    pub fn new(
        coupling: &LinkCoupling,
        reuse: Option<&ReuseCoupling>,
        grid: &MruGrid,
        demands: &[f64],
        p: &[f64],
    ) -> Result<Self> {
        let n = coupling.n_services();
        check_len(n, demands.len())?;
        check_len(n, p.len())?;
        if let Some(r) = reuse {
            check_len(n, r.c.nrows())?;
        }
        if let Some(s) = p.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "service {s} has zero SINR (power {})",
                p[s]
            )));
        }
        if let Some(s) = demands.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "service {s} has nonpositive demand"
            )));
        }
        let mut kernel = vec![0.0; n * n];
        for s in 0..n {
            for l in 0..n {
                let v = coupling.v_tilde[[l, s]];
                let k = match reuse {
                    Some(r) => r.c[[l, s]] * v,
                    None => v,
                };
                kernel[s * n + l] = k * p[l];
            }
        }
        let scale = grid.capacity_scale();
        Ok(Self {
            n,
            kernel,
            p: p.to_vec(),
            sigma: coupling.sigma_tilde.clone(),
            need: demands.iter().map(|d| d / scale * LN_2).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sinr(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n).map(|s| self.sinr_at(s, w)).collect()
    }

    fn sinr_at(&self, s: usize, w: &[f64]) -> f64 {
        let row = &self.kernel[s * self.n..(s + 1) * self.n];
        let interference: f64 = row.iter().zip(w).map(|(k, wl)| k * wl).sum();
        self.p[s] / (interference + self.sigma[s])
    }

    pub fn eval_into(&self, w: &[f64], out: &mut [f64]) {
        for (s, o) in out.iter_mut().enumerate() {
            *o = self.need[s] / self.sinr_at(s, w).ln_1p();
        }
    }

    pub fn eval(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.eval_into(w, &mut out);
        out
    }
}

/// `min_s w_s / f_s`, the worst-case satisfaction level at `w`.
pub fn utility(w: &[f64], fw: &[f64]) -> f64 {
    w.iter()
        .zip(fw)
        .map(|(a, b)| a / b)
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates `f` at `w` with a frozen reuse coupling.
pub fn f_map(
    coupling: &LinkCoupling,
    reuse_fixed: &ReuseCoupling,
    grid: &MruGrid,
    demands: &[f64],
    p: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    let map = FrozenMap::new(coupling, Some(reuse_fixed), grid, demands, p)?;
    check_len(map.len(), w.len())?;
    Ok(map.eval(w))
}

/// Per-cell load constraint, optionally with resource muted on behalf of
/// dominant interferers. Monotone and homogeneous of degree one.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadConstraint {
    cell_of: Vec<usize>,
    n_cells: usize,
    muted: Vec<(usize, Vec<usize>)>,
}

impl LoadConstraint {
    pub fn plain(scn: &Scenario) -> Self {
        Self {
            cell_of: scn.services().iter().map(|s| s.bs).collect(),
            n_cells: scn.n_bs(),
            muted: Vec::new(),
        }
    }

    pub fn muted(scn: &Scenario, muted: &BTreeMap<usize, Vec<usize>>) -> Self {
        let mut g = Self::plain(scn);
        g.muted = muted
            .iter()
            .filter(|(_, cells)| !cells.is_empty())
            .map(|(&s, cells)| (s, cells.clone()))
            .collect();
        g
    }

    pub fn per_cell(&self, w: &[f64]) -> Vec<f64> {
        let mut load = vec![0.0; self.n_cells];
        self.fill(w, &mut load);
        load
    }

    fn fill(&self, w: &[f64], load: &mut [f64]) {
        for (&n, &ws) in self.cell_of.iter().zip(w) {
            load[n] += ws;
        }
        for (s, cells) in &self.muted {
            for &m in cells {
                load[m] += w[*s];
            }
        }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        // called once per fixed-point iteration; skip the heap for small N
        let mut small = [0.0; 8];
        if self.n_cells <= small.len() {
            let load = &mut small[..self.n_cells];
            self.fill(w, load);
            load.iter().copied().fold(0.0, f64::max)
        } else {
            self.per_cell(w).into_iter().fold(0.0, f64::max)
        }
    }
}

/// `||B w||_inf`: the most loaded cell.
pub fn g_norm(scn: &Scenario, w: &[f64]) -> Result<f64> {
    check_len(scn.n_services(), w.len())?;
    Ok(LoadConstraint::plain(scn).eval(w))
}

/// Largest per-cell load counting resource muted for dominant interferers.
pub fn g_muted(scn: &Scenario, w: &[f64], muted: &BTreeMap<usize, Vec<usize>>) -> Result<f64> {
    check_len(scn.n_services(), w.len())?;
    if let Some(&s) = muted.keys().find(|&&s| s >= scn.n_services()) {
        return Err(Error::InvalidInput(format!(
            "muted service {s} does not exist"
        )));
    }
    if muted.values().flatten().any(|&m| m >= scn.n_bs()) {
        return Err(Error::InvalidInput(
            "muting refers to a missing cell".into(),
        ));
    }
    Ok(LoadConstraint::muted(scn, muted).eval(w))
}
