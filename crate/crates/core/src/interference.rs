//! Load-dependent interference: reuse-factor coupling, SINR, throughput,
//! QoS satisfaction and the dominant-interferer metrics.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::Array2;

use crate::channel::LinkCoupling;
use crate::error::{check_len, Result};
use crate::model::{cell_loads, CellLoads, MruGrid, Scenario};

/// Probability-like overlap factor between every ordered pair of services.
#[derive(Debug, Clone, PartialEq)]
pub struct ReuseCoupling {
    pub c: Array2<f64>,
}

impl ReuseCoupling {
    /// Every pair fully overlapping: the load-proportional interference model.
    pub fn all_ones(s: usize) -> Self {
        Self {
            c: Array2::ones((s, s)),
        }
    }

    /// Removes overlap between each muted service and every service of the
    /// cells that blank its resource.
    pub fn with_muting(mut self, scn: &Scenario, muted: &BTreeMap<usize, Vec<usize>>) -> Self {
        for (&s, cells) in muted {
            for &m in cells {
                for l in scn.services_of(m) {
                    self.c[[s, l]] = 0.0;
                    self.c[[l, s]] = 0.0;
                }
            }
        }
        self
    }
}

/// Fraction of a victim's resource overlapped by an interferer, with both
/// loads counted in MRUs out of `total_units`.
///
/// Opposite directions are placed from opposite ends of the grid, so they
/// only meet once the two loads add past the grid size. A zero-load victim
/// gets 0, and an over-committed cell overlaps at most all of it. Working
/// in MRU counts keeps grid-aligned loads exact.
pub fn overlap_factor(interferer_units: f64, victim_units: f64, total_units: f64, same_direction: bool) -> f64 {
    if !(victim_units > 0.0) {
        return 0.0;
    }
    if same_direction {
        (interferer_units / victim_units).min(1.0)
    } else {
        ((interferer_units + victim_units - total_units) / victim_units).clamp(0.0, 1.0)
    }
}

pub fn reuse_coupling(scn: &Scenario, w: &[f64]) -> Result<ReuseCoupling> {
    let loads = cell_loads(scn, w)?;
    Ok(reuse_coupling_from_loads(scn, &loads))
}

pub(crate) fn reuse_coupling_from_loads(scn: &Scenario, loads: &CellLoads) -> ReuseCoupling {
    let svcs = scn.services();
    let s = svcs.len();
    let total = scn.grid().total_units() as f64;
    let own: Vec<f64> = svcs.iter().map(|x| loads.of(x.bs, x.direction) * total).collect();
    let c = Array2::from_shape_fn((s, s), |(l, v)| {
        overlap_factor(own[l], own[v], total, svcs[l].direction == svcs[v].direction)
    });
    ReuseCoupling { c }
}

/// Normalized interference at each victim, `sum_l factor(l,s) * v[l,s] * p_l * w_l`.
fn normalized_interference(
    coupling: &LinkCoupling,
    reuse: Option<&ReuseCoupling>,
    w: &[f64],
    p: &[f64],
) -> Vec<f64> {
    let v = &coupling.v_tilde;
    let s_count = coupling.n_services();
    (0..s_count)
        .map(|s| {
            (0..s_count)
                .map(|l| {
                    let k = match reuse {
                        Some(r) => r.c[[l, s]] * v[[l, s]],
                        None => v[[l, s]],
                    };
                    k * (p[l] * w[l])
                })
                .sum()
        })
        .collect()
}

fn sinr_from(coupling: &LinkCoupling, interference: Vec<f64>, p: &[f64]) -> Vec<f64> {
    interference
        .into_iter()
        .zip(&coupling.sigma_tilde)
        .zip(p)
        .map(|((i, sig), ps)| ps / (i + sig))
        .collect()
}

/// SINR when each interferer hits with probability equal to its resource share.
pub fn sinr_legacy(coupling: &LinkCoupling, w: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    check_len(coupling.n_services(), w.len())?;
    check_len(coupling.n_services(), p.len())?;
    let i = normalized_interference(coupling, None, w, p);
    Ok(sinr_from(coupling, i, p))
}

/// SINR with interference weighted by the reuse-factor coupling.
pub fn sinr_flex(
    coupling: &LinkCoupling,
    reuse: &ReuseCoupling,
    w: &[f64],
    p: &[f64],
) -> Result<Vec<f64>> {
    check_len(coupling.n_services(), w.len())?;
    check_len(coupling.n_services(), p.len())?;
    check_len(coupling.n_services(), reuse.c.nrows())?;
    let i = normalized_interference(coupling, Some(reuse), w, p);
    Ok(sinr_from(coupling, i, p))
}

/// `log2(1 + x)`, accurate for small `x`.
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Bits delivered to each service over the grid.
pub fn throughput(grid: &MruGrid, w: &[f64], sinr: &[f64]) -> Result<Vec<f64>> {
    check_len(w.len(), sinr.len())?;
    let scale = grid.capacity_scale();
    Ok(w.iter()
        .zip(sinr)
        .map(|(ws, g)| scale * ws * log2_1p(*g))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qos {
    pub per_service: Vec<f64>,
    pub worst: f64,
}

pub fn qos(grid: &MruGrid, w: &[f64], sinr: &[f64], demands: &[f64]) -> Result<Qos> {
    check_len(w.len(), demands.len())?;
    let eta = throughput(grid, w, sinr)?;
    let per_service: Vec<f64> = eta.iter().zip(demands).map(|(e, d)| e / d).collect();
    let worst = per_service.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Qos { per_service, worst })
}

/// Total normalized interference service `s` causes to everyone else.
pub fn interferer_score(
    coupling: &LinkCoupling,
    reuse: &ReuseCoupling,
    w: &[f64],
    p: &[f64],
    s: usize,
) -> f64 {
    let row: f64 = coupling
        .v_tilde
        .row(s)
        .iter()
        .zip(reuse.c.row(s).iter())
        .map(|(v, c)| c * v)
        .sum();
    row * p[s] * w[s]
}

/// Interference caused by service `s`, summed over the victims of each cell.
pub fn cell_impact(
    scn: &Scenario,
    coupling: &LinkCoupling,
    reuse: &ReuseCoupling,
    w: &[f64],
    p: &[f64],
    s: usize,
) -> Vec<f64> {
    let mut per_cell = vec![0.0; scn.n_bs()];
    for (t, victim) in scn.services().iter().enumerate() {
        per_cell[victim.bs] += reuse.c[[s, t]] * coupling.v_tilde[[s, t]];
    }
    let scale = p[s] * w[s];
    per_cell.iter_mut().for_each(|j| *j *= scale);
    per_cell
}

/// Cells other than `own_cell` whose impact reaches `alpha`.
pub fn muting_set(impacts: &[f64], own_cell: usize, alpha: f64) -> Vec<usize> {
    impacts
        .iter()
        .enumerate()
        .filter(|&(m, &j)| m != own_cell && j >= alpha)
        .map(|(m, _)| m)
        .collect()
}

/// Debug dump: the reuse matrix followed by one row of SINR values.
pub fn write_debug_csv<W: Write>(reuse: &ReuseCoupling, sinr: &[f64], out: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for (l, row) in reuse.c.rows().into_iter().enumerate() {
        wtr.write_field(format!("c{l}"))?;
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.write_field("sinr")?;
    wtr.write_record(sinr.iter().map(|v| v.to_string()))?;
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{svc, two_cell};
    use crate::model::Direction;
    use ndarray::array;

    #[test]
    fn cross_mode_overlap() {
        assert_eq!(overlap_factor(0.5, 0.5, 1.0, false), 0.0);
        assert_eq!(overlap_factor(16.0, 12.0, 20.0, false), 8.0 / 12.0);
        assert_eq!(overlap_factor(1.0, 1.0, 1.0, false), 1.0);
    }

    #[test]
    fn same_mode_overlap() {
        assert_eq!(overlap_factor(0.4, 0.8, 1.0, true), 0.5);
        assert_eq!(overlap_factor(0.9, 0.3, 1.0, true), 1.0);
        assert_eq!(overlap_factor(0.9, 0.0, 1.0, true), 0.0);
        assert_eq!(overlap_factor(0.9, 0.0, 1.0, false), 0.0);
    }

    #[test]
    fn reuse_uses_victim_direction_load() {
        // cell 0: UL 0.8; cell 1: DL 0.6
        let scn = two_cell(vec![
            svc(0, 0, Direction::Ul, 1.0),
            svc(1, 1, Direction::Dl, 1.0),
        ]);
        let r = reuse_coupling(&scn, &[0.8, 0.6]).unwrap();
        assert!((r.c[[0, 1]] - 0.4 / 0.6).abs() < 1e-12);
        assert!((r.c[[1, 0]] - 0.4 / 0.8).abs() < 1e-12);
        assert_eq!(r.c[[0, 0]], 1.0);
    }

    fn pair() -> LinkCoupling {
        LinkCoupling::new(array![[0.0, 0.3], [0.2, 0.0]], vec![0.01, 0.02]).unwrap()
    }

    #[test]
    fn legacy_sinr_examples() {
        let c = pair();
        let s = sinr_legacy(&c, &[0.0, 0.0], &[2.0, 3.0]).unwrap();
        assert_eq!(s, vec![200.0, 150.0]);

        let s = sinr_legacy(&c, &[0.7, 0.5], &[1.0, 1.0]).unwrap();
        assert!((s[0] - 1.0 / 0.11).abs() < 1e-12);
    }

    #[test]
    fn flex_sinr_examples() {
        let c = pair();
        let ones = ReuseCoupling::all_ones(2);
        let w = [0.5, 0.5];
        let p = [1.0, 1.0];
        assert_eq!(
            sinr_flex(&c, &ones, &w, &p).unwrap(),
            sinr_legacy(&c, &w, &p).unwrap()
        );
        assert!((sinr_flex(&c, &ones, &w, &p).unwrap()[0] - 1.0 / 0.11).abs() < 1e-12);

        let zero = ReuseCoupling {
            c: Array2::zeros((2, 2)),
        };
        assert_eq!(
            sinr_flex(&c, &zero, &w, &[2.0, 3.0]).unwrap(),
            vec![200.0, 150.0]
        );
    }

    #[test]
    fn sinr_dimension_checks() {
        let c = pair();
        assert!(sinr_legacy(&c, &[0.1], &[1.0, 1.0]).is_err());
        assert!(sinr_flex(&c, &ReuseCoupling::all_ones(3), &[0.1, 0.1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn throughput_examples() {
        let grid = MruGrid::default();
        assert_eq!(throughput(&grid, &[0.0], &[5.0]).unwrap(), vec![0.0]);
        let eta = throughput(&grid, &[1.0, 0.5], &[1.0, 1.0]).unwrap();
        assert!((eta[0] - 45000.0).abs() < 1e-9);
        assert!((eta[1] * 2.0 - eta[0]).abs() < 1e-9);
    }

    #[test]
    fn qos_examples() {
        let grid = MruGrid::default();
        let q = qos(&grid, &[1.0], &[1.0], &[22500.0]).unwrap();
        assert!((q.worst - 2.0).abs() < 1e-12);
        let q = qos(&grid, &[1.0, 1.0], &[1.0, 1.0], &[45000.0, 45000.0]).unwrap();
        assert!((q.worst - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interferer_metrics() {
        let scn = two_cell(vec![
            svc(0, 0, Direction::Ul, 1.0),
            svc(1, 1, Direction::Ul, 1.0),
        ]);
        let c = LinkCoupling::new(array![[0.0, 0.1], [0.2, 0.0]], vec![0.01, 0.01]).unwrap();
        let ones = ReuseCoupling::all_ones(2);
        let w = [0.5, 0.5];
        let p = [1.0, 1.0];
        assert!((interferer_score(&c, &ones, &w, &p, 0) - 0.05).abs() < 1e-15);
        assert_eq!(interferer_score(&c, &ones, &[0.0, 0.5], &p, 0), 0.0);

        let j = cell_impact(&scn, &c, &ones, &w, &p, 0);
        assert!((j[1] - 0.05).abs() < 1e-15);
        assert_eq!(j[0], 0.0);
        assert_eq!(
            cell_impact(&scn, &c, &ones, &[0.0, 0.5], &p, 0),
            vec![0.0, 0.0]
        );

        let isolated = LinkCoupling::new(array![[0.0, 0.0], [0.2, 0.0]], vec![0.01, 0.01]).unwrap();
        assert_eq!(interferer_score(&isolated, &ones, &w, &p, 0), 0.0);
    }

    #[test]
    fn muting_threshold_is_inclusive() {
        assert_eq!(muting_set(&[9.0, 0.05], 0, 0.1), Vec::<usize>::new());
        assert_eq!(muting_set(&[9.0, 0.05], 0, 0.05), vec![1]);
        assert_eq!(muting_set(&[1.0, 2.0, 3.0], 1, 0.0), vec![0, 2]);
    }

    #[test]
    fn muting_clears_overlap_with_blanked_cells() {
        let scn = two_cell(vec![
            svc(0, 0, Direction::Ul, 1.0),
            svc(1, 1, Direction::Ul, 1.0),
            svc(2, 1, Direction::Dl, 1.0),
        ]);
        let mut muted = BTreeMap::new();
        muted.insert(0, vec![1]);
        let r = ReuseCoupling::all_ones(3).with_muting(&scn, &muted);
        assert_eq!(r.c[[0, 1]], 0.0);
        assert_eq!(r.c[[2, 0]], 0.0);
        assert_eq!(r.c[[1, 2]], 1.0);
    }

    #[test]
    fn debug_dump() {
        let mut buf = Vec::new();
        write_debug_csv(&ReuseCoupling::all_ones(2), &[1.5, 2.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "c0,1,1\nc1,1,1\nsinr,1.5,2\n");
    }
}
