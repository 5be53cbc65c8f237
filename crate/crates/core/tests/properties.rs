use std::collections::BTreeMap;

use flexduplex::channel::LinkCoupling;
use flexduplex::harness::bin_index;
use flexduplex::interference::{overlap_factor, reuse_coupling, sinr_flex, sinr_legacy, ReuseCoupling};
use flexduplex::model::{cell_loads, traffic_distance_with, traffic_fractions, Direction, MruGrid, Scenario, Service, TrafficNorm};
use flexduplex::solvers::{g_muted, g_norm, utility, FrozenMap, LoadConstraint};
use ndarray::Array2;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    scn: Scenario,
    coupling: LinkCoupling,
    w: Vec<f64>,
    p: Vec<f64>,
}

fn service() -> impl Strategy<Value = (usize, bool, f64, f64)> {
    (0..3usize, any::<bool>(), 1e2..1e5f64, 0.01..20.0f64)
}

fn case() -> impl Strategy<Value = Case> {
    prop::collection::vec(service(), 1..7)
        .prop_flat_map(|svcs| {
            let n = svcs.len();
            (
                Just(svcs),
                prop::collection::vec(0.0..2.0f64, n * n),
                prop::collection::vec(1e-3..1.0f64, n),
                prop::collection::vec(0.0..1.0f64, n),
            )
        })
        .prop_map(|(svcs, v, sigma, w)| {
            let n = svcs.len();
            let services: Vec<Service> = svcs
                .iter()
                .enumerate()
                .map(|(i, &(bs, ul, d, p))| Service {
                    ue: i,
                    bs,
                    direction: if ul { Direction::Ul } else { Direction::Dl },
                    demand_bits: d,
                    tx_power_watt: p,
                })
                .collect();
            let ues = (0..n).map(|i| [i as f64 * 10.0, 5.0]).collect();
            let bss = vec![[0.0, 0.0], [500.0, 0.0], [1000.0, 0.0]];
            let scn = Scenario::new(bss, ues, services, MruGrid::default()).unwrap();
            let mut v = Array2::from_shape_vec((n, n), v).unwrap();
            for s in 0..n {
                v[[s, s]] = 0.0;
            }
            let coupling = LinkCoupling::new(v, sigma).unwrap();
            let p = scn.mru_powers();
            Case { scn, coupling, w, p }
        })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn cell_load_splits_by_direction(c in case()) {
        let loads = cell_loads(&c.scn, &c.w).unwrap();
        for n in 0..c.scn.n_bs() {
            prop_assert_eq!(loads.total[n], loads.ul[n] + loads.dl[n]);
        }
        let sum: f64 = c.w.iter().sum();
        let total: f64 = loads.total.iter().sum();
        prop_assert!(rel_close(sum, total, 1e-12));
    }

    #[test]
    fn reuse_entries_are_fractions(c in case()) {
        let reuse = reuse_coupling(&c.scn, &c.w).unwrap();
        prop_assert!(reuse.c.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn overlap_grows_with_interferer_load(
        a in 0.0..6000.0f64,
        b in 0.0..6000.0f64,
        v in 0.0..6000.0f64,
        same in any::<bool>(),
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = overlap_factor(lo, v, 6000.0, same);
        let y = overlap_factor(hi, v, 6000.0, same);
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!(x <= y);
    }

    #[test]
    fn all_ones_reuse_reduces_to_legacy(c in case()) {
        let ones = ReuseCoupling::all_ones(c.w.len());
        let flex = sinr_flex(&c.coupling, &ones, &c.w, &c.p).unwrap();
        let legacy = sinr_legacy(&c.coupling, &c.w, &c.p).unwrap();
        for (a, b) in flex.iter().zip(&legacy) {
            prop_assert!(rel_close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn sinr_falls_as_an_interferer_gets_louder(c in case(), pick in any::<prop::sample::Index>(), boost in 1.0..10.0f64) {
        let l = pick.index(c.w.len());
        let reuse = reuse_coupling(&c.scn, &c.w).unwrap();
        let before = sinr_flex(&c.coupling, &reuse, &c.w, &c.p).unwrap();
        let mut p = c.p.clone();
        p[l] *= boost;
        let after = sinr_flex(&c.coupling, &reuse, &c.w, &p).unwrap();
        for s in (0..c.w.len()).filter(|&s| s != l) {
            prop_assert!(after[s] <= before[s]);
        }
    }

    #[test]
    fn frozen_map_is_monotone_and_scalable(c in case(), bump in 0.0..1.0f64, a in 1.01..5.0f64) {
        let reuse = reuse_coupling(&c.scn, &c.w).unwrap();
        let f = FrozenMap::new(&c.coupling, Some(&reuse), c.scn.grid(), &c.scn.demands(), &c.p).unwrap();
        let fw = f.eval(&c.w);
        let bigger: Vec<f64> = c.w.iter().map(|x| x + bump).collect();
        let fb = f.eval(&bigger);
        let scaled: Vec<f64> = c.w.iter().map(|x| a * x).collect();
        let fs = f.eval(&scaled);
        for s in 0..c.w.len() {
            prop_assert!(fb[s] >= fw[s]);
            prop_assert!(fs[s] <= a * fw[s] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn utility_ignores_service_order(w in prop::collection::vec(0.01..1.0f64, 1..8), seed in any::<u64>()) {
        let fw: Vec<f64> = w.iter().map(|x| x * 1.7 + 0.1).collect();
        let n = w.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| (seed.rotate_left(i as u32) ^ i as u64, i));
        let wp: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        let fp: Vec<f64> = idx.iter().map(|&i| fw[i]).collect();
        prop_assert_eq!(utility(&w, &fw), utility(&wp, &fp));
    }

    #[test]
    fn load_constraint_is_homogeneous(c in case(), a in 0.0..10.0f64) {
        let g = LoadConstraint::plain(&c.scn);
        let scaled: Vec<f64> = c.w.iter().map(|x| a * x).collect();
        prop_assert!(rel_close(g.eval(&scaled), a * g.eval(&c.w), 1e-12));
        prop_assert_eq!(g_muted(&c.scn, &c.w, &BTreeMap::new()).unwrap(), g_norm(&c.scn, &c.w).unwrap());
    }

    #[test]
    fn muting_only_adds_load(c in case(), pick in any::<prop::sample::Index>(), cell in 0..3usize) {
        let s = pick.index(c.w.len());
        let muted = BTreeMap::from([(s, vec![cell])]);
        let gm = g_muted(&c.scn, &c.w, &muted).unwrap();
        let g = g_norm(&c.scn, &c.w).unwrap();
        prop_assert!(gm >= g);
        prop_assert!(gm <= g + c.w[s] * (1.0 + 1e-12));
    }

    #[test]
    fn traffic_profiles_sum_to_one(c in case()) {
        let theta = traffic_fractions(&c.scn).unwrap();
        let sum: f64 = theta.iter().map(|t| t[0] + t[1]).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn traffic_distance_ignores_scale_and_cell_labels(c in case(), k in 0.1..100.0f64) {
        let base = traffic_distance_with(&c.scn, TrafficNorm::L2).unwrap();
        let relabel = |svcs: &[Service], scale: f64, swap: bool| -> Scenario {
            let services = svcs
                .iter()
                .map(|s| Service {
                    bs: if swap { 2 - s.bs } else { s.bs },
                    demand_bits: s.demand_bits * scale,
                    ..s.clone()
                })
                .collect();
            Scenario::new(
                c.scn.bs_positions().to_vec(),
                c.scn.ue_positions().to_vec(),
                services,
                *c.scn.grid(),
            )
            .unwrap()
        };
        let scaled = traffic_distance_with(&relabel(c.scn.services(), k, false), TrafficNorm::L2).unwrap();
        let swapped = traffic_distance_with(&relabel(c.scn.services(), 1.0, true), TrafficNorm::L2).unwrap();
        prop_assert!((scaled - base).abs() < 1e-12);
        prop_assert_eq!(swapped, base);
        prop_assert!(base <= std::f64::consts::SQRT_2 + 1e-12);
    }

    #[test]
    fn every_distance_lands_in_a_covering_bin(d in 0.0..2.0f64) {
        let edges = [0.0, 0.16, 0.32, 0.48, 0.64, 0.80, 1.0];
        let b = bin_index(d, &edges).unwrap();
        prop_assert!(edges[b] <= d);
        if b + 2 < edges.len() {
            prop_assert!(d < edges[b + 1]);
        }
    }
}
