use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::AntennaZMatrix;
use crate::beamspace::{self, BasisConfig, BeamspaceSymbolPair};
use crate::error::{Error, Result};
use crate::oracle;
use crate::synthesis;
use crate::twoport::{ReactanceTuple, Topology};

/// How the feed drives the modulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeedModel {
    /// The nominal feed voltage appears at the input whatever the load.
    IdealVoltage,
    /// Source with internal impedance `Z0` whose open-circuit voltage is
    /// twice the nominal feed voltage; a mismatched network sees less.
    MatchedSource,
}

/// Beamspace symbols actually radiated by a (possibly imperfect) load set,
/// read back through the inverse current mapping of the intended pair.
pub fn effective_symbols(
    pair: &BeamspaceSymbolPair,
    loads1: &ReactanceTuple,
    loads2: &ReactanceTuple,
    zm: &AntennaZMatrix,
    cfg: &BasisConfig,
    feed: FeedModel,
) -> Result<BeamspaceSymbolPair> {
    let q = beamspace::power_norm_factor(pair, zm, cfg)?;
    effective_symbols_with_q(pair, q, loads1, loads2, zm, cfg, feed)
}

fn effective_symbols_with_q(
    pair: &BeamspaceSymbolPair,
    q: f64,
    loads1: &ReactanceTuple,
    loads2: &ReactanceTuple,
    zm: &AntennaZMatrix,
    cfg: &BasisConfig,
    feed: FeedModel,
) -> Result<BeamspaceSymbolPair> {
    let vin = Complex64::new(beamspace::feeding_voltage(pair, cfg), 0.0);
    let sol = match feed {
        FeedModel::IdealVoltage => oracle::solve_network(loads1, loads2, zm, vin)?,
        FeedModel::MatchedSource => oracle::solve_with_source(loads1, loads2, zm, 2.0 * vin)?,
    };
    beamspace::symbols_from_currents(sol.i1, sol.i2, cfg, q)
}

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub pair: BeamspaceSymbolPair,
    pub q: f64,
    pub loads1: ReactanceTuple,
    pub loads2: ReactanceTuple,
    pub ideal: BeamspaceSymbolPair,
}

/// Synthesized load table for every symbol pair, indexed by label pair.
#[derive(Debug, Clone)]
pub struct LmaSystem {
    pub zm: AntennaZMatrix,
    pub cfg: BasisConfig,
    pub feed: FeedModel,
    entries: Vec<Entry>,
    order: usize,
}

impl LmaSystem {
    pub fn new(zm: AntennaZMatrix, cfg: BasisConfig, topology: Topology, s: f64, feed: FeedModel) -> Result<Self> {
        let points = cfg.constellation.points();
        let order = points.len();
        let mut entries = Vec::with_capacity(order * order);
        for &s1 in &points {
            for &s2 in &points {
                let pair = BeamspaceSymbolPair::new(s1, s2);
                let r = synthesis::synthesize(&pair, &zm, &cfg, topology, s).map_err(|e| {
                    Error::Config(format!("pair ({s1}, {s2}) cannot be synthesized: {e}"))
                })?;
                let ideal = effective_symbols_with_q(&pair, r.q, &r.loads1, &r.loads2, &zm, &cfg, feed)?;
                entries.push(Entry { pair, q: r.q, loads1: r.loads1, loads2: r.loads2, ideal });
            }
        }
        Ok(Self { zm, cfg, feed, entries, order })
    }

    pub(crate) fn entry(&self, label1: u32, label2: u32) -> &Entry {
        &self.entries[label1 as usize * self.order + label2 as usize]
    }

    /// Symbols radiated with loads `loads1`, `loads2` in place of the
    /// synthesized ones for the pair `(label1, label2)`.
    pub(crate) fn radiate(
        &self,
        label1: u32,
        label2: u32,
        loads1: &ReactanceTuple,
        loads2: &ReactanceTuple,
    ) -> Result<BeamspaceSymbolPair> {
        let e = self.entry(label1, label2);
        effective_symbols_with_q(&e.pair, e.q, loads1, loads2, &self.zm, &self.cfg, self.feed)
    }

    /// Worst `|ŝ − s|` over the ideal table.
    pub fn ideal_distortion(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| (e.ideal.s1 - e.pair.s1).norm().max((e.ideal.s2 - e.pair.s2).norm()))
            .fold(0.0, f64::max)
    }
}
