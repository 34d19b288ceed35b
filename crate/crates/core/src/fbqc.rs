//! Fusion-network erasure analysis: maps a fusion's (p_succ, p_loss) to a
//! single-outcome erasure probability under the static bias arrangement,
//! optionally applies the (2,2)-Shor encoding transformation, and compares
//! against the network's marginal erasure threshold.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bisection tolerance for probability inversions.
pub const BISECTION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FbqcError {
    #[error("{name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("unknown fusion network '{0}'")]
    UnknownNetwork(String),
    #[error("unknown encoding '{0}'")]
    UnknownEncoding(String),
}

fn check_unit(name: &'static str, value: f64) -> Result<(), FbqcError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(FbqcError::OutOfRange { name, value })
    }
}

/// Fusion-network topologies with their marginal erasure thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionNetwork {
    SixRing,
    FourStar,
}

impl FusionNetwork {
    pub const ALL: [FusionNetwork; 2] = [FusionNetwork::SixRing, FusionNetwork::FourStar];

    /// Marginal single-outcome erasure threshold of the network.
    pub fn threshold_p_er(self) -> f64 {
        match self {
            FusionNetwork::SixRing => 0.1198,
            FusionNetwork::FourStar => 0.0690,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FusionNetwork::SixRing => "six_ring",
            FusionNetwork::FourStar => "four_star",
        }
    }

    pub fn parse(s: &str) -> Result<Self, FbqcError> {
        match s {
            "six_ring" | "six-ring" | "6-ring" => Ok(FusionNetwork::SixRing),
            "four_star" | "four-star" | "4-star" => Ok(FusionNetwork::FourStar),
            other => Err(FbqcError::UnknownNetwork(other.to_string())),
        }
    }
}

impl fmt::Display for FusionNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    Bare,
    Shor22,
}

impl EncodingMode {
    pub const ALL: [EncodingMode; 2] = [EncodingMode::Bare, EncodingMode::Shor22];

    pub fn name(self) -> &'static str {
        match self {
            EncodingMode::Bare => "bare",
            EncodingMode::Shor22 => "shor_2_2",
        }
    }

    pub fn parse(s: &str) -> Result<Self, FbqcError> {
        match s {
            "bare" => Ok(EncodingMode::Bare),
            "shor_2_2" | "shor" | "shor-2-2" => Ok(EncodingMode::Shor22),
            other => Err(FbqcError::UnknownEncoding(other.to_string())),
        }
    }
}

impl fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Single-outcome erasure probability under the static bias arrangement:
/// p_0 = 1 - (1 - p_loss)(1 - (1 - p_succ)/2).
pub fn erasure_p0(p_succ: f64, p_loss: f64) -> Result<f64, FbqcError> {
    check_unit("p_succ", p_succ)?;
    check_unit("p_loss", p_loss)?;
    Ok(1.0 - (1.0 - p_loss) * (1.0 - (1.0 - p_succ) / 2.0))
}

/// Erasure probability of the (2,2)-Shor encoded measurement:
/// p_enc = ((1 - (1 - p0)^2)^2 + 1 - (1 - p0^2)^2) / 2.
pub fn erasure_shor(p_0: f64) -> Result<f64, FbqcError> {
    check_unit("p_0", p_0)?;
    let a = 1.0 - (1.0 - p_0).powi(2);
    let b = 1.0 - (1.0 - p_0 * p_0).powi(2);
    Ok((a * a + b) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureAssessment {
    pub p_0: f64,
    pub p_enc: Option<f64>,
    pub effective_erasure: f64,
    pub correctable: bool,
}

/// Composes the erasure maps and compares against the network threshold
/// (strict inequality; boundary points are not correctable).
pub fn assess(
    p_succ: f64,
    p_loss: f64,
    network: FusionNetwork,
    encoding: EncodingMode,
) -> Result<ErasureAssessment, FbqcError> {
    let p_0 = erasure_p0(p_succ, p_loss)?;
    let p_enc = match encoding {
        EncodingMode::Bare => None,
        EncodingMode::Shor22 => Some(erasure_shor(p_0)?),
    };
    let effective_erasure = p_enc.unwrap_or(p_0);
    Ok(ErasureAssessment {
        p_0,
        p_enc,
        effective_erasure,
        correctable: effective_erasure < network.threshold_p_er(),
    })
}

/// Smallest lossless success probability for which the network remains
/// correctable, found by bisection to [`BISECTION_TOL`].
pub fn min_p_succ(network: FusionNetwork, encoding: EncodingMode) -> f64 {
    // effective erasure decreases monotonically in p_succ at p_loss = 0
    let erases = |p: f64| {
        assess(p, 0.0, network, encoding)
            .expect("in range")
            .effective_erasure
    };
    let threshold = network.threshold_p_er();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    debug_assert!(erases(lo) > threshold && erases(hi) < threshold);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if erases(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn erasure_p0_values() {
        assert_abs_diff_eq!(erasure_p0(0.5, 0.0).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(erasure_p0(1.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(erasure_p0(0.75, 0.10362).unwrap(), 0.21567, epsilon = 1e-4);
        assert!(erasure_p0(1.2, 0.0).is_err());
        assert!(erasure_p0(0.5, -0.1).is_err());
    }

    #[test]
    fn erasure_shor_values() {
        assert_abs_diff_eq!(erasure_shor(0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(erasure_shor(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(erasure_shor(0.5).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(erasure_shor(0.21567).unwrap(), 0.11950, epsilon = 1e-4);
    }

    #[test]
    fn shor_helps_below_half_and_hurts_above() {
        for i in 1..50 {
            let p = i as f64 / 100.0;
            assert!(erasure_shor(p).unwrap() < p, "p = {p}");
        }
        for i in 51..100 {
            let p = i as f64 / 100.0;
            assert!(erasure_shor(p).unwrap() > p, "p = {p}");
        }
    }

    #[test]
    fn min_p_succ_matches_published_values() {
        // four_star/shor_2_2 solves to 0.6790; the commonly quoted "0.67" is a
        // truncation of that value
        let cases = [
            (FusionNetwork::SixRing, EncodingMode::Bare, 0.7604),
            (FusionNetwork::SixRing, EncodingMode::Shor22, 0.5680),
            (FusionNetwork::FourStar, EncodingMode::Bare, 0.8620),
            (FusionNetwork::FourStar, EncodingMode::Shor22, 0.6790),
        ];
        for (network, encoding, expected) in cases {
            let got = min_p_succ(network, encoding);
            assert_abs_diff_eq!(got, expected, epsilon = 0.0005);
        }
    }

    #[test]
    fn assess_examples() {
        let a = assess(0.75, 0.0, FusionNetwork::SixRing, EncodingMode::Shor22).unwrap();
        assert_abs_diff_eq!(a.p_0, 0.125, epsilon = 1e-12);
        // Eq. (2) simplifies to p_0^2 (3 - 2 p_0)
        assert_abs_diff_eq!(a.effective_erasure, 0.125f64.powi(2) * 2.75, epsilon = 1e-12);
        assert!(a.correctable);

        let b = assess(0.5, 0.0, FusionNetwork::SixRing, EncodingMode::Bare).unwrap();
        assert_abs_diff_eq!(b.effective_erasure, 0.25, epsilon = 1e-12);
        assert!(!b.correctable);

        let c = assess(0.875, 0.0, FusionNetwork::FourStar, EncodingMode::Bare).unwrap();
        assert_abs_diff_eq!(c.effective_erasure, 0.0625, epsilon = 1e-12);
        assert!(c.correctable);
    }

    #[test]
    fn erasure_monotonicity() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for window in grid.windows(2) {
            let (lo, hi) = (window[0], window[1]);
            assert!(erasure_p0(hi, 0.3).unwrap() <= erasure_p0(lo, 0.3).unwrap());
            assert!(erasure_p0(0.7, hi).unwrap() >= erasure_p0(0.7, lo).unwrap());
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(FusionNetwork::parse("six_ring").unwrap(), FusionNetwork::SixRing);
        assert_eq!(FusionNetwork::parse("4-star").unwrap(), FusionNetwork::FourStar);
        assert!(FusionNetwork::parse("octagon").is_err());
        assert_eq!(EncodingMode::parse("shor_2_2").unwrap(), EncodingMode::Shor22);
        assert!(EncodingMode::parse("steane").is_err());
    }

    #[test]
    fn thresholds_are_published_constants() {
        assert_eq!(FusionNetwork::SixRing.threshold_p_er(), 0.1198);
        assert_eq!(FusionNetwork::FourStar.threshold_p_er(), 0.0690);
    }
}
