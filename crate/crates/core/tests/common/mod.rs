#![allow(dead_code)]

use flexduplex::channel::{build_channel, build_coupling, ChannelParams, LinkCoupling};
use flexduplex::harness::{generate_scenario, Ratio, SweepConfig};
use flexduplex::model::Scenario;
use flexduplex::rng::derive_seed;
use rand::Rng;

/// A two-cell scenario drawn like a sweep run, with random ratios.
pub fn random_instance<R: Rng>(rng: &mut R) -> (Scenario, LinkCoupling) {
    let cfg = SweepConfig::default();
    let inter = Ratio(rng.gen_range(1..=10));
    let intra = [Ratio(rng.gen_range(1..=9)), Ratio(rng.gen_range(1..=9))];
    let seed: u64 = rng.gen();
    let scn = generate_scenario(&cfg, inter, intra, seed).unwrap();
    let params = ChannelParams { seed: derive_seed(seed, &[1]), ..cfg.channel.clone() };
    let chan = build_channel(&scn, &params).unwrap();
    let coupling = build_coupling(&scn, &chan, &params, cfg.interference).unwrap();
    (scn, coupling)
}

/// Per-MRU transmit power, from the service list.
pub fn mru_power(scn: &Scenario) -> Vec<f64> {
    scn.services().iter().map(|s| s.tx_power_watt / f64::from(scn.grid().w_f)).collect()
}

/// `f_s(w) = d_s / (dt df W log2(1 + SINR_s))`, with `c = None` for the
/// load-proportional model.
pub fn oracle_f(scn: &Scenario, v: &LinkCoupling, c: Option<&[Vec<f64>]>, w: &[f64]) -> Vec<f64> {
    let g = scn.grid();
    let cap = g.delta_t * g.delta_f * f64::from(g.w_t) * f64::from(g.w_f);
    let p = mru_power(scn);
    let n = w.len();
    (0..n)
        .map(|s| {
            let mut interference = 0.0;
            for l in 0..n {
                let cl = c.map_or(1.0, |c| c[l][s]);
                interference += cl * v.v_tilde[[l, s]] * p[l] * w[l];
            }
            let sinr = p[s] / (interference + v.sigma_tilde[s]);
            scn.services()[s].demand_bits * std::f64::consts::LN_2 / (cap * sinr.ln_1p())
        })
        .collect()
}

/// Largest per-cell sum of `w`.
pub fn oracle_g(scn: &Scenario, w: &[f64]) -> f64 {
    let mut load = vec![0.0; scn.n_bs()];
    for (svc, x) in scn.services().iter().zip(w) {
        load[svc.bs] += x;
    }
    load.into_iter().fold(0.0, f64::max)
}
