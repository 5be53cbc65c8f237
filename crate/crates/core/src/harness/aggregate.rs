//! Empirical CDFs, outage and distance-binned means over sweep records.
//!
//! Samples are sorted before any reduction, so the result does not depend
//! on record order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Record;
use crate::error::{Error, Result};
use crate::solvers::Protocol;

/// Sorted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `Pr[X <= x]`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `Pr[X < x]`.
    pub fn below(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `v` with `Pr[X <= v] >= q`.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        let n = self.sorted.len();
        if n == 0 {
            return None;
        }
        let k = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        Some(self.sorted[k - 1])
    }

    pub fn mean(&self) -> Option<f64> {
        if self.sorted.is_empty() {
            None
        } else {
            Some(self.sorted.iter().sum::<f64>() / self.sorted.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub count: usize,
    /// Fraction of runs with `rho < 1`; absent for an empty class.
    pub outage: Option<f64>,
    pub mean_rho: Option<f64>,
    /// `(rho, F(rho))` at the percentiles 0, 1, ..., 100.
    pub cdf: Vec<(f64, f64)>,
}

impl ClassSummary {
    fn from_samples(samples: Vec<f64>) -> Self {
        let ecdf = Ecdf::new(samples);
        let cdf = if ecdf.is_empty() {
            Vec::new()
        } else {
            (0..=100)
                .filter_map(|i| ecdf.quantile(f64::from(i) / 100.0))
                .map(|x| (x, ecdf.eval(x)))
                .collect()
        };
        Self {
            count: ecdf.len(),
            outage: (!ecdf.is_empty()).then(|| ecdf.below(1.0)),
            mean_rho: ecdf.mean(),
            cdf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Absent when no run fell in the bin.
    pub mean_rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub all: ClassSummary,
    pub low_distance: ClassSummary,
    pub high_distance: ClassSummary,
    pub bins: Vec<BinSummary>,
    pub non_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub schema_version: u32,
    pub distance_split: f64,
    pub protocols: BTreeMap<Protocol, ProtocolSummary>,
}

/// Bin of `d` among `edges`: half-open bins, except the last, which is
/// closed and absorbs everything above it.
pub fn bin_index(d: f64, edges: &[f64]) -> Option<usize> {
    let bins = edges.len().checked_sub(1)?;
    if bins == 0 || d < edges[0] {
        return None;
    }
    Some(edges[1..bins].partition_point(|&e| e <= d))
}

pub fn aggregate(records: &[Record], edges: &[f64], split: f64) -> Result<Aggregates> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to aggregate".into()));
    }
    let n_bins = edges.len().saturating_sub(1);
    let mut grouped: BTreeMap<Protocol, Vec<&Record>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.protocol).or_default().push(r);
    }
    let protocols = grouped
        .into_iter()
        .map(|(protocol, recs)| {
            let pick = |f: &dyn Fn(&Record) -> bool| {
                recs.iter()
                    .filter(|r| f(r))
                    .map(|r| r.rho)
                    .collect::<Vec<_>>()
            };
            let bins = (0..n_bins)
                .map(|b| {
                    let ecdf = Ecdf::new(pick(&|r| bin_index(r.distance, edges) == Some(b)));
                    BinSummary {
                        lo: edges[b],
                        hi: edges[b + 1],
                        count: ecdf.len(),
                        mean_rho: ecdf.mean(),
                    }
                })
                .collect();
            let summary = ProtocolSummary {
                all: ClassSummary::from_samples(pick(&|_| true)),
                low_distance: ClassSummary::from_samples(pick(&|r| r.distance <= split)),
                high_distance: ClassSummary::from_samples(pick(&|r| r.distance > split)),
                bins,
                non_converged: recs.iter().filter(|r| !r.converged).count(),
            };
            (protocol, summary)
        })
        .collect();
    Ok(Aggregates {
        schema_version: 1,
        distance_split: split,
        protocols,
    })
}
