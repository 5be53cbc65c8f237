//! Average channel gains and the normalized link-gain coupling.
//!
//! Gains come from a log-distance pathloss model with lognormal shadowing.
//! Node indices `0..N` are base stations, `N..N+K` are UEs.

use std::io::Write;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, Scenario};

/// `PL(d) = intercept_db + slope_db * log10(d / 1 km)` plus shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub intercept_db: f64,
    pub slope_db: f64,
    pub shadowing_db: f64,
}

impl LinkModel {
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        self.intercept_db + self.slope_db * (distance_m.max(1.0) / 1000.0).log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// BS-UE links in either direction (gains are reciprocal).
    pub bs_ue: LinkModel,
    pub bs_bs: LinkModel,
    pub ue_ue: LinkModel,
    pub noise_psd_dbm_hz: f64,
    pub bs_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    pub min_coupling_loss_db: f64,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            bs_ue: LinkModel {
                intercept_db: 128.1,
                slope_db: 37.6,
                shadowing_db: 8.0,
            },
            bs_bs: LinkModel {
                intercept_db: 98.4,
                slope_db: 40.0,
                shadowing_db: 8.0,
            },
            ue_ue: LinkModel {
                intercept_db: 147.4,
                slope_db: 43.3,
                shadowing_db: 10.0,
            },
            noise_psd_dbm_hz: -174.0,
            bs_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
            min_coupling_loss_db: 70.0,
            seed: 0,
        }
    }
}

impl ChannelParams {
    pub fn without_shadowing(mut self) -> Self {
        self.bs_ue.shadowing_db = 0.0;
        self.bs_bs.shadowing_db = 0.0;
        self.ue_ue.shadowing_db = 0.0;
        self
    }

    pub fn check(&self) -> Result<()> {
        for (name, m) in [
            ("bs_ue", &self.bs_ue),
            ("bs_bs", &self.bs_bs),
            ("ue_ue", &self.ue_ue),
        ] {
            if !(m.slope_db > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} pathloss slope must be positive"
                )));
            }
            if !(m.shadowing_db >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} shadowing stddev must be nonnegative"
                )));
            }
        }
        Ok(())
    }

    /// Receiver noise power in watts over a bandwidth of `bandwidth_hz`.
    pub fn noise_watt(&self, bandwidth_hz: f64, at_bs: bool) -> f64 {
        let nf = if at_bs {
            self.bs_noise_figure_db
        } else {
            self.ue_noise_figure_db
        };
        db_to_linear(self.noise_psd_dbm_hz + nf - 30.0) * bandwidth_hz
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Symmetric matrix of linear average gains between all nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_bs: usize,
    h: Array2<f64>,
}

impl ChannelMatrix {
    pub fn from_gains(n_bs: usize, h: Array2<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() < n_bs {
            return Err(Error::InvalidInput(format!(
                "gain matrix shape {:?} does not fit {n_bs} BSs",
                h.shape()
            )));
        }
        if h.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput(
                "channel gains must be positive and finite".into(),
            ));
        }
        Ok(Self { n_bs, h })
    }

    pub fn gains(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn bs_node(&self, n: usize) -> usize {
        n
    }

    pub fn ue_node(&self, k: usize) -> usize {
        self.n_bs + k
    }

    pub fn gain(&self, from: usize, to: usize) -> f64 {
        self.h[[from, to]]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let header: Vec<String> = (0..self.h.ncols()).map(|j| self.node_label(j)).collect();
        wtr.write_field("node")?;
        wtr.write_record(&header)?;
        for (i, row) in self.h.rows().into_iter().enumerate() {
            wtr.write_field(self.node_label(i))?;
            wtr.write_record(row.iter().map(|g| format!("{g:e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn node_label(&self, i: usize) -> String {
        if i < self.n_bs {
            format!("bs{i}")
        } else {
            format!("ue{}", i - self.n_bs)
        }
    }
}

/// Draws the gain matrix for a scenario. Deterministic in `params.seed`.
pub fn build_channel(scn: &Scenario, params: &ChannelParams) -> Result<ChannelMatrix> {
    params.check()?;
    let n_bs = scn.n_bs();
    let nodes: Vec<_> = scn
        .bs_positions()
        .iter()
        .chain(scn.ue_positions())
        .copied()
        .collect();
    let total = nodes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut h = Array2::from_elem((total, total), 1.0);
    for i in 0..total {
        for j in (i + 1)..total {
            let model = match (i < n_bs, j < n_bs) {
                (true, true) => &params.bs_bs,
                (false, false) => &params.ue_ue,
                _ => &params.bs_ue,
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            let d = (nodes[i][0] - nodes[j][0]).hypot(nodes[i][1] - nodes[j][1]);
            let loss =
                (model.pathloss_db(d) + model.shadowing_db * z).max(params.min_coupling_loss_db);
            let g = db_to_linear(-loss);
            h[[i, j]] = g;
            h[[j, i]] = g;
        }
    }
    ChannelMatrix::from_gains(n_bs, h)
}

/// Which interference terms are removed from the coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterferenceFlags {
    pub self_interference_cancellation: bool,
    pub zero_intra_cell: bool,
}

impl InterferenceFlags {
    pub const NONE: Self = Self {
        self_interference_cancellation: false,
        zero_intra_cell: false,
    };
}

impl Default for InterferenceFlags {
    fn default() -> Self {
        Self {
            self_interference_cancellation: true,
            zero_intra_cell: true,
        }
    }
}

/// Interference gains relative to each service's own link gain, plus
/// normalized noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCoupling {
    pub v_tilde: Array2<f64>,
    pub sigma_tilde: Vec<f64>,
}

impl LinkCoupling {
    pub fn new(v_tilde: Array2<f64>, sigma_tilde: Vec<f64>) -> Result<Self> {
        let s = sigma_tilde.len();
        if v_tilde.dim() != (s, s) {
            return Err(Error::Dimension {
                expected: s,
                got: v_tilde.nrows(),
            });
        }
        if v_tilde.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "coupling entries must be nonnegative".into(),
            ));
        }
        if sigma_tilde.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "normalized noise must be positive".into(),
            ));
        }
        Ok(Self {
            v_tilde,
            sigma_tilde,
        })
    }

    pub fn n_services(&self) -> usize {
        self.sigma_tilde.len()
    }
}

fn endpoints(scn: &Scenario, chan: &ChannelMatrix, s: usize) -> (usize, usize) {
    let svc = &scn.services()[s];
    let (bs, ue) = (chan.bs_node(svc.bs), chan.ue_node(svc.ue));
    match svc.direction {
        Direction::Ul => (ue, bs),
        Direction::Dl => (bs, ue),
    }
}

/// Normalized coupling `v[l,s] / v[s,s]` and noise `sigma_s^2 / v[s,s]`,
/// with noise measured over one MRU bandwidth.
pub fn build_coupling(
    scn: &Scenario,
    chan: &ChannelMatrix,
    params: &ChannelParams,
    flags: InterferenceFlags,
) -> Result<LinkCoupling> {
    let expected = scn.n_bs() + scn.n_ue();
    if chan.gains().nrows() != expected || chan.n_bs() != scn.n_bs() {
        return Err(Error::Dimension {
            expected,
            got: chan.gains().nrows(),
        });
    }
    let s_count = scn.n_services();
    let ends: Vec<_> = (0..s_count).map(|s| endpoints(scn, chan, s)).collect();
    let own: Vec<f64> = ends.iter().map(|&(tx, rx)| chan.gain(tx, rx)).collect();

    let mut v = Array2::zeros((s_count, s_count));
    for l in 0..s_count {
        for s in 0..s_count {
            let same_cell = scn.services()[l].bs == scn.services()[s].bs;
            let zeroed = (l == s && flags.self_interference_cancellation)
                || (l != s && same_cell && flags.zero_intra_cell);
            if !zeroed {
                v[[l, s]] = chan.gain(ends[l].0, ends[s].1) / own[s];
            }
        }
    }

    let bandwidth = scn.grid().delta_f;
    let sigma = scn
        .services()
        .iter()
        .zip(&own)
        .map(|(svc, g)| params.noise_watt(bandwidth, svc.direction == Direction::Ul) / g)
        .collect();
    LinkCoupling::new(v, sigma)
}
