//! Load-table layout shared by `synthesize` and `verify`.

use anyhow::{bail, Result};
use lma_core::synthesis::wrap_angle;
use lma_core::{BeamspaceSymbolPair, ReactanceTuple, SynthesisResult, Topology};
use num_complex::Complex64;

use crate::table::{Cell, RowView, Table};

const LEADING: [&str; 13] = [
    "ind", "s1_re", "s1_im", "s2_re", "s2_im", "Vin_V", "I1_re", "I1_im", "I2_re", "I2_im", "phi_deg", "P1_W", "P2_W",
];

pub const STATUS_OK: &str = "ok";

fn load_columns(topology: Topology) -> Vec<String> {
    let names = match topology {
        Topology::TWithTl => [("X1", "ohm"), ("B2", "S"), ("X3", "ohm")],
        Topology::PiNoTl => [("B1", "S"), ("X2", "ohm"), ("B3", "S")],
    };
    (1..=2).flat_map(|k| names.iter().map(move |(n, unit)| format!("{n}_{k}_{unit}"))).collect()
}

pub fn headers(topology: Topology) -> Vec<String> {
    let mut h: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    h.extend(load_columns(topology));
    h.push("s".into());
    h.push("status".into());
    h
}

/// One table row. `ind` is 1-based.
pub fn row(
    ind: usize,
    pair: &BeamspaceSymbolPair,
    s: Option<f64>,
    outcome: &lma_core::Result<SynthesisResult>,
    z0: f64,
) -> Vec<Cell> {
    let mut cells = vec![
        Cell::Int(ind as i64),
        Cell::Num(pair.s1.re),
        Cell::Num(pair.s1.im),
        Cell::Num(pair.s2.re),
        Cell::Num(pair.s2.im),
    ];
    match outcome {
        Ok(r) => {
            cells.extend([
                Cell::Num(r.vin.norm()),
                Cell::Num(r.i1.re),
                Cell::Num(r.i1.im),
                Cell::Num(r.i2.re),
                Cell::Num(r.i2.im),
                Cell::Num(wrap_angle(r.i2.arg() - pair.s2.arg()).to_degrees()),
                Cell::Num(r.power.p1),
                Cell::Num(r.power.p2),
            ]);
            cells.extend(r.loads1.denormalized(z0).into_iter().map(Cell::Num));
            cells.extend(r.loads2.denormalized(z0).into_iter().map(Cell::Num));
            cells.push(Cell::Num(r.s_param));
            cells.push(Cell::text(STATUS_OK));
        }
        Err(e) => {
            cells.extend(std::iter::repeat(Cell::Empty).take(8 + 6));
            cells.push(s.map_or(Cell::Empty, Cell::Num));
            cells.push(Cell::text(e.to_string()));
        }
    }
    cells
}

/// A row read back from a load table.
#[derive(Debug, Clone)]
pub struct LoadRow {
    pub ind: String,
    pub pair: BeamspaceSymbolPair,
    pub status: String,
    /// Present when the row was synthesized.
    pub design: Option<Design>,
}

#[derive(Debug, Clone, Copy)]
pub struct Design {
    pub vin: f64,
    pub loads1: ReactanceTuple,
    pub loads2: ReactanceTuple,
}

/// Identifies the topology from the header and parses every row.
pub fn parse(table: &Table, z0: f64) -> Result<(Topology, Vec<LoadRow>)> {
    let topology = [Topology::TWithTl, Topology::PiNoTl]
        .into_iter()
        .find(|t| load_columns(*t).iter().all(|c| table.column(c).is_some()));
    let Some(topology) = topology else {
        bail!("header has neither the T nor the Π load columns");
    };
    let cols = load_columns(topology);
    let mut rows = Vec::with_capacity(table.rows.len());
    for index in 0..table.rows.len() {
        let v = RowView { table, index };
        let pair = BeamspaceSymbolPair::new(
            Complex64::new(v.num("s1_re")?, v.num("s1_im")?),
            Complex64::new(v.num("s2_re")?, v.num("s2_im")?),
        );
        let status = v.text("status")?;
        let design = if status == STATUS_OK {
            let physical = |k: usize| -> Result<[f64; 3]> {
                Ok([v.num(&cols[3 * k])?, v.num(&cols[3 * k + 1])?, v.num(&cols[3 * k + 2])?])
            };
            Some(Design {
                vin: v.num("Vin_V")?,
                loads1: ReactanceTuple::from_physical(topology, physical(0)?, z0),
                loads2: ReactanceTuple::from_physical(topology, physical(1)?, z0),
            })
        } else {
            None
        };
        rows.push(LoadRow { ind: v.text("ind")?, pair, status, design });
    }
    Ok((topology, rows))
}
