//! Mutual-impedance model of the coupled two-element array.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open-circuit impedance matrix of the two antenna ports plus the source
/// reference impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaZMatrix {
    z11: Complex64,
    z12: Complex64,
    z21: Complex64,
    z22: Complex64,
    z0: f64,
}

/// `Z / Z0`, entry by entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedZ {
    pub z11: Complex64,
    pub z12: Complex64,
    pub z21: Complex64,
    pub z22: Complex64,
}

impl AntennaZMatrix {
    /// Validates reciprocity (`Z12 == Z21`), the passivity precondition on the
    /// self-resistances, and `Z0 > 0`.
    pub fn new(z11: Complex64, z12: Complex64, z21: Complex64, z22: Complex64, z0: f64) -> Result<Self> {
        let all = [z11, z12, z21, z22];
        if all.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidAntenna("non-finite entry".into()));
        }
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::InvalidAntenna(format!("reference impedance {z0} must be positive")));
        }
        if z12 != z21 {
            return Err(Error::InvalidAntenna(format!("not reciprocal: Z12 = {z12}, Z21 = {z21}")));
        }
        if z11.re <= 0.0 || z22.re <= 0.0 {
            return Err(Error::InvalidAntenna(format!(
                "self-resistances must be positive (Re Z11 = {}, Re Z22 = {})",
                z11.re, z22.re
            )));
        }
        Ok(Self { z11, z12, z21, z22, z0 })
    }

    pub fn symmetric(z_self: Complex64, z_mutual: Complex64, z0: f64) -> Result<Self> {
        Self::new(z_self, z_mutual, z_mutual, z_self, z0)
    }

    /// 2.5 GHz two-element array with λ/8 spacing, referenced to 50 Ω.
    pub fn reference_fixture() -> Self {
        Self::symmetric(Complex64::new(46.09, -12.18), Complex64::new(18.36, -29.92), 50.0)
            .expect("fixture is valid")
    }

    pub fn z11(&self) -> Complex64 {
        self.z11
    }
    pub fn z12(&self) -> Complex64 {
        self.z12
    }
    pub fn z21(&self) -> Complex64 {
        self.z21
    }
    pub fn z22(&self) -> Complex64 {
        self.z22
    }
    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.z11, self.z12], [self.z21, self.z22]]
    }

    pub fn normalized(&self) -> NormalizedZ {
        NormalizedZ {
            z11: self.z11 / self.z0,
            z12: self.z12 / self.z0,
            z21: self.z21 / self.z0,
            z22: self.z22 / self.z0,
        }
    }

    /// Port voltages `V = Z·I`.
    pub fn port_voltages(&self, i1: Complex64, i2: Complex64) -> (Complex64, Complex64) {
        (self.z11 * i1 + self.z12 * i2, self.z21 * i1 + self.z22 * i2)
    }

    /// `Re(V1·I1* + V2·I2*)` for the given port currents.
    pub fn radiated_power(&self, i1: Complex64, i2: Complex64) -> f64 {
        let (v1, v2) = self.port_voltages(i1, i2);
        (v1 * i1.conj() + v2 * i2.conj()).re
    }
}

impl NormalizedZ {
    pub fn rescaled(&self, z0: f64) -> [[Complex64; 2]; 2] {
        [[self.z11 * z0, self.z12 * z0], [self.z21 * z0, self.z22 * z0]]
    }
}
