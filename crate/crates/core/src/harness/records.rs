//! Records CSV: `protocol,inter,intra1,intra2,run,D,rho,converged`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Ratio;
use crate::error::Result;
use crate::solvers::Protocol;

/// One solved Monte-Carlo run under one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub protocol: Protocol,
    pub inter: Ratio,
    pub intra1: Ratio,
    pub intra2: Ratio,
    pub run: usize,
    #[serde(rename = "D")]
    pub distance: f64,
    pub rho: f64,
    pub converged: bool,
}

pub fn write_records<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(input);
    let records = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<Record>, _>>()?;
    Ok(records)
}
