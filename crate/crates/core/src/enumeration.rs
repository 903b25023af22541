//! Orderings of symbol pairs for design tables.
//!
//! A table holds one stream's symbol fixed per block of `M` rows while the
//! other stream sweeps the grid. Both sweeps follow the same grid traversal,
//! one of the eight symmetries of a row/column scan.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamspace::{BeamspaceSymbolPair, Constellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MajorAxis {
    /// Outer loop over the in-phase level.
    Real,
    /// Outer loop over the quadrature level.
    Imag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridTraversal {
    pub major: MajorAxis,
    pub re_ascending: bool,
    pub im_ascending: bool,
}

impl GridTraversal {
    pub fn all() -> Vec<GridTraversal> {
        let mut out = Vec::with_capacity(8);
        for major in [MajorAxis::Real, MajorAxis::Imag] {
            for re_ascending in [true, false] {
                for im_ascending in [false, true] {
                    out.push(GridTraversal { major, re_ascending, im_ascending });
                }
            }
        }
        out
    }

    pub fn order(&self, constellation: &Constellation) -> Vec<Complex64> {
        let mut re: Vec<f64> = constellation.levels().to_vec();
        let mut im = re.clone();
        if !self.re_ascending {
            re.reverse();
        }
        if !self.im_ascending {
            im.reverse();
        }
        let mut out = Vec::with_capacity(re.len() * im.len());
        match self.major {
            MajorAxis::Real => {
                for &r in &re {
                    out.extend(im.iter().map(|&i| Complex64::new(r, i)));
                }
            }
            MajorAxis::Imag => {
                for &i in &im {
                    out.extend(re.iter().map(|&r| Complex64::new(r, i)));
                }
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let dir = |asc: bool| if asc { "ascending" } else { "descending" };
        let (outer, outer_asc, inner, inner_asc) = match self.major {
            MajorAxis::Real => ("re", self.re_ascending, "im", self.im_ascending),
            MajorAxis::Imag => ("im", self.im_ascending, "re", self.re_ascending),
        };
        format!("outer {outer} {}, inner {inner} {}", dir(outer_asc), dir(inner_asc))
    }
}

/// Which stream stays fixed within each block of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeldStream {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairEnumeration {
    pub traversal: GridTraversal,
    pub held: HeldStream,
    /// Traversal index of the held symbol in the first block.
    pub start: usize,
}

impl Default for PairEnumeration {
    /// The ordering that reproduces the reference design table: `s1 = −1+3j`
    /// held while `s2` sweeps columns left to right, top to bottom.
    fn default() -> Self {
        Self {
            traversal: GridTraversal { major: MajorAxis::Real, re_ascending: true, im_ascending: false },
            held: HeldStream::First,
            start: 4,
        }
    }
}

impl PairEnumeration {
    /// All `M²` pairs in table order.
    pub fn pairs(&self, constellation: &Constellation) -> Vec<BeamspaceSymbolPair> {
        let pts = self.traversal.order(constellation);
        let m = pts.len();
        let mut out = Vec::with_capacity(m * m);
        for block in 0..m {
            let held = pts[(self.start + block) % m];
            for &sweep in &pts {
                out.push(match self.held {
                    HeldStream::First => BeamspaceSymbolPair::new(held, sweep),
                    HeldStream::Second => BeamspaceSymbolPair::new(sweep, held),
                });
            }
        }
        out
    }

    /// Every enumeration in the family for an `M`-point constellation.
    pub fn candidates(constellation: &Constellation) -> Vec<PairEnumeration> {
        let m = constellation.order();
        let mut out = Vec::new();
        for traversal in GridTraversal::all() {
            for held in [HeldStream::First, HeldStream::Second] {
                for start in 0..m {
                    out.push(PairEnumeration { traversal, held, start });
                }
            }
        }
        out
    }

    pub fn describe(&self, constellation: &Constellation) -> String {
        let pts = self.traversal.order(constellation);
        let p = pts[self.start % pts.len()];
        let (held, swept) = match self.held {
            HeldStream::First => ("s1", "s2"),
            HeldStream::Second => ("s2", "s1"),
        };
        format!(
            "{held} held starting at {}{:+}j, {swept} swept; traversal {}",
            p.re,
            p.im,
            self.traversal.describe()
        )
    }
}
