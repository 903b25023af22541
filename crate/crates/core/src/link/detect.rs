use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamspace::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Receiver {
    /// Exhaustive search over all symbol pairs.
    Ml,
    /// Channel inversion followed by per-stream slicing.
    Zf,
}

pub type Channel2x2 = [[Complex64; 2]; 2];

/// Detector bound to one constellation and transmit scaling.
#[derive(Debug, Clone)]
pub struct Detector {
    constellation: Constellation,
    /// Transmit amplitude per constellation unit.
    scale: f64,
    /// Scaled points indexed by label.
    points: Vec<Complex64>,
}

impl Detector {
    pub fn new(constellation: Constellation, scale: f64) -> Self {
        let points = constellation.points().into_iter().map(|p| p * scale).collect();
        Self { constellation, scale, points }
    }

    pub fn detect(&self, receiver: Receiver, h: &Channel2x2, y: [Complex64; 2]) -> (u32, u32) {
        match receiver {
            Receiver::Ml => self.ml(h, y),
            Receiver::Zf => self.zf(h, y),
        }
    }

    fn ml(&self, h: &Channel2x2, y: [Complex64; 2]) -> (u32, u32) {
        // per-column contributions, then all combinations
        let col = |k: usize| -> Vec<[Complex64; 2]> {
            self.points.iter().map(|&p| [h[0][k] * p, h[1][k] * p]).collect()
        };
        let first = col(0);
        let second = col(1);
        let mut best = (0u32, 0u32);
        let mut best_metric = f64::INFINITY;
        for (l1, a) in first.iter().enumerate() {
            let r0 = y[0] - a[0];
            let r1 = y[1] - a[1];
            for (l2, b) in second.iter().enumerate() {
                let metric = (r0 - b[0]).norm_sqr() + (r1 - b[1]).norm_sqr();
                if metric < best_metric {
                    best_metric = metric;
                    best = (l1 as u32, l2 as u32);
                }
            }
        }
        best
    }

    fn zf(&self, h: &Channel2x2, y: [Complex64; 2]) -> (u32, u32) {
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.norm() == 0.0 {
            return self.ml(h, y);
        }
        let x0 = (h[1][1] * y[0] - h[0][1] * y[1]) / det;
        let x1 = (h[0][0] * y[1] - h[1][0] * y[0]) / det;
        (self.constellation.slice(x0 / self.scale), self.constellation.slice(x1 / self.scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_detection() {
        let k = Constellation::qam16();
        let det = Detector::new(k.clone(), 0.3);
        let h = [
            [Complex64::new(0.3, -1.1), Complex64::new(0.7, 0.2)],
            [Complex64::new(-0.4, 0.5), Complex64::new(1.2, -0.8)],
        ];
        for l1 in 0..16u32 {
            for l2 in 0..16u32 {
                let x = [k.modulate(l1) * 0.3, k.modulate(l2) * 0.3];
                let y = [h[0][0] * x[0] + h[0][1] * x[1], h[1][0] * x[0] + h[1][1] * x[1]];
                assert_eq!(det.detect(Receiver::Ml, &h, y), (l1, l2));
                assert_eq!(det.detect(Receiver::Zf, &h, y), (l1, l2));
            }
        }
    }
}
