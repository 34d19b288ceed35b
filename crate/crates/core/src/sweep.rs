//! Threshold bisection and grid sweeps over the three-dimensional loss
//! parameter space, per (scheme, network, encoding).

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bsm::{catalog, BsmError, BsmScheme};
use crate::config::SweepConfig;
use crate::fbqc::{assess, EncodingMode, ErasureAssessment, FbqcError, FusionNetwork};
use crate::loss::{compute_p_loss, instrument, LossError, LossParams};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Bsm(#[from] BsmError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Fbqc(#[from] FbqcError),
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("unknown axis '{0}'")]
    UnknownAxis(String),
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
}

/// Swept loss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    PEff,
    BsLossDb,
    PropLossDbPerCm,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::PEff, Axis::BsLossDb, Axis::PropLossDbPerCm];

    /// The three two-axis slices of the loss space (the remaining axis ideal).
    pub const PAIRS: [(Axis, Axis); 3] = [
        (Axis::PEff, Axis::BsLossDb),
        (Axis::PEff, Axis::PropLossDbPerCm),
        (Axis::BsLossDb, Axis::PropLossDbPerCm),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::PEff => "p_eff",
            Axis::BsLossDb => "bs_loss_db",
            Axis::PropLossDbPerCm => "prop_loss_db_per_cm",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Axis::PEff => "probability",
            Axis::BsLossDb => "dB",
            Axis::PropLossDbPerCm => "dB/cm",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SweepError> {
        match s {
            "p_eff" => Ok(Axis::PEff),
            "bs_loss_db" => Ok(Axis::BsLossDb),
            "prop_loss_db_per_cm" => Ok(Axis::PropLossDbPerCm),
            other => Err(SweepError::UnknownAxis(other.to_string())),
        }
    }

    /// Parameter value at which the axis contributes no loss.
    pub fn ideal_value(self) -> f64 {
        match self {
            Axis::PEff => 1.0,
            _ => 0.0,
        }
    }

    pub fn set(self, params: &mut LossParams, value: f64) {
        match self {
            Axis::PEff => params.p_det = value,
            Axis::BsLossDb => params.bs_loss_db = value,
            Axis::PropLossDbPerCm => params.prop_loss_db_per_cm = value,
        }
    }

    pub fn params_at(self, value: f64, layer_length_um: f64) -> LossParams {
        let mut params = LossParams {
            layer_length_um,
            ..LossParams::ideal()
        };
        self.set(&mut params, value);
        params
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn p_loss_at(scheme: &BsmScheme, params: &LossParams) -> Result<f64, SweepError> {
    Ok(compute_p_loss(&instrument(scheme, params)?)?)
}

fn correctable_at(
    scheme: &BsmScheme,
    network: FusionNetwork,
    encoding: EncodingMode,
    params: &LossParams,
) -> Result<bool, SweepError> {
    let p_loss = p_loss_at(scheme, params)?;
    Ok(assess(scheme.p_succ_lossless, p_loss, network, encoding)?.correctable)
}

/// One marginal-threshold answer of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRecord {
    pub scheme: String,
    pub ancilla: String,
    pub p_succ: f64,
    pub network: FusionNetwork,
    pub encoding: EncodingMode,
    pub axis: Axis,
    /// The marginal threshold along the axis with the other loss sources
    /// ideal, or None if the scheme is uncorrectable even without loss.
    pub threshold: Option<f64>,
    pub layer_count: usize,
    pub beamsplitter_count: usize,
}

/// Bisects the loss boundary along one axis, the other two axes ideal.
/// Returns None if the scheme is uncorrectable even at zero loss.
pub fn marginal_threshold(
    scheme: &BsmScheme,
    network: FusionNetwork,
    encoding: EncodingMode,
    axis: Axis,
    tolerance: f64,
    layer_length_um: f64,
) -> Result<Option<f64>, SweepError> {
    let probe = |value: f64| -> Result<bool, SweepError> {
        correctable_at(
            scheme,
            network,
            encoding,
            &axis.params_at(value, layer_length_um),
        )
    };
    if !probe(axis.ideal_value())? {
        return Ok(None);
    }
    let value = match axis {
        Axis::PEff => {
            // minimal efficiency that stays correctable
            let mut bad = 0.0f64;
            let mut good = 1.0f64;
            while good - bad > tolerance {
                let mid = 0.5 * (bad + good);
                if probe(mid)? {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            0.5 * (bad + good)
        }
        Axis::BsLossDb | Axis::PropLossDbPerCm => {
            // maximal attenuation that stays correctable
            let mut hi = 0.05f64;
            while probe(hi)? {
                hi *= 2.0;
            }
            let mut lo = 0.0f64;
            while hi - lo > tolerance {
                let mid = 0.5 * (lo + hi);
                if probe(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(Some(value))
}

fn resolve_schemes(names: &[String]) -> Result<Vec<BsmScheme>, SweepError> {
    let all = catalog()?;
    names
        .iter()
        .map(|name| {
            all.iter()
                .find(|s| &s.name == name)
                .cloned()
                .ok_or_else(|| SweepError::UnknownScheme(name.clone()))
        })
        .collect()
}

/// Computes the full marginal-threshold table for a configuration.
pub fn threshold_records(config: &SweepConfig) -> Result<Vec<ThresholdRecord>, SweepError> {
    let schemes = resolve_schemes(&config.schemes)?;
    let mut combos = Vec::new();
    for scheme in &schemes {
        for &network in &config.networks {
            for &encoding in &config.encodings {
                for axis in Axis::ALL {
                    combos.push((scheme, network, encoding, axis));
                }
            }
        }
    }
    in_pool(config.workers, || {
        combos
            .par_iter()
            .map(|&(scheme, network, encoding, axis)| {
                let threshold = marginal_threshold(
                    scheme,
                    network,
                    encoding,
                    axis,
                    config.bisection_tolerance,
                    config.layer_length_um,
                )?;
                Ok(ThresholdRecord {
                    scheme: scheme.name.clone(),
                    ancilla: scheme.ancilla.label().to_string(),
                    p_succ: scheme.p_succ_lossless,
                    network,
                    encoding,
                    axis,
                    threshold,
                    layer_count: scheme.layout.layer_count(),
                    beamsplitter_count: scheme.layout.beamsplitter_count(),
                })
            })
            .collect()
    })
}

/// p_loss samples of one scheme over one two-axis slice (third axis ideal).
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGrid {
    pub scheme: String,
    pub ancilla: String,
    pub p_succ: f64,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Row-major over y (index = iy * x_values.len() + ix).
    pub p_loss: Vec<f64>,
}

/// Erasure and correctability of one slice under one (network, encoding).
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAssessment {
    pub network: FusionNetwork,
    pub encoding: EncodingMode,
    pub effective_erasure: Vec<f64>,
    pub correctable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    pub grid: SliceGrid,
    pub assessments: Vec<SliceAssessment>,
}

fn in_pool<T, F>(workers: usize, f: F) -> Result<T, SweepError>
where
    T: Send,
    F: FnOnce() -> Result<T, SweepError> + Send,
{
    if workers == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SweepError::ThreadPool(e.to_string()))?;
        pool.install(f)
    }
}

/// Evaluates every configured scheme over the three axis-pair slices. The
/// p_loss grid is computed once per (scheme, slice) and shared across all
/// (network, encoding) assessments; grid points are merged by index so the
/// output is independent of worker count.
pub fn sweep_slices(config: &SweepConfig) -> Result<Vec<SliceResult>, SweepError> {
    let schemes = resolve_schemes(&config.schemes)?;
    in_pool(config.workers, || {
        let mut out = Vec::new();
        for scheme in &schemes {
            for (x_axis, y_axis) in Axis::PAIRS {
                let x_values = config.axes.for_axis(x_axis).values();
                let y_values = config.axes.for_axis(y_axis).values();
                let nx = x_values.len();
                let p_loss: Vec<f64> = (0..nx * y_values.len())
                    .into_par_iter()
                    .map(|idx| {
                        let (ix, iy) = (idx % nx, idx / nx);
                        let mut params = LossParams {
                            layer_length_um: config.layer_length_um,
                            ..LossParams::ideal()
                        };
                        x_axis.set(&mut params, x_values[ix]);
                        y_axis.set(&mut params, y_values[iy]);
                        p_loss_at(scheme, &params)
                    })
                    .collect::<Result<_, _>>()?;
                let mut assessments = Vec::new();
                for &network in &config.networks {
                    for &encoding in &config.encodings {
                        let evaluated: Vec<ErasureAssessment> = p_loss
                            .iter()
                            .map(|&p| assess(scheme.p_succ_lossless, p, network, encoding))
                            .collect::<Result<_, _>>()?;
                        assessments.push(SliceAssessment {
                            network,
                            encoding,
                            effective_erasure: evaluated
                                .iter()
                                .map(|a| a.effective_erasure)
                                .collect(),
                            correctable: evaluated.iter().map(|a| a.correctable).collect(),
                        });
                    }
                }
                out.push(SliceResult {
                    grid: SliceGrid {
                        scheme: scheme.name.clone(),
                        ancilla: scheme.ancilla.label().to_string(),
                        p_succ: scheme.p_succ_lossless,
                        x_axis,
                        y_axis,
                        x_values: x_values.clone(),
                        y_values,
                        p_loss,
                    },
                    assessments,
                });
            }
        }
        Ok(out)
    })
}

/// Loss point and verdict of a joint feasibility evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCheck {
    pub scheme: String,
    pub network: FusionNetwork,
    pub encoding: EncodingMode,
    pub params: LossParams,
    pub p_loss: f64,
    pub assessment: ErasureAssessment,
}

/// Evaluates a scheme at one simultaneous loss coordinate (in contrast to the
/// per-axis marginals, which pin the other axes to ideal).
pub fn joint_check(
    scheme: &BsmScheme,
    network: FusionNetwork,
    encoding: EncodingMode,
    params: &LossParams,
) -> Result<JointCheck, SweepError> {
    let p_loss = p_loss_at(scheme, params)?;
    let assessment = assess(scheme.p_succ_lossless, p_loss, network, encoding)?;
    Ok(JointCheck {
        scheme: scheme.name.clone(),
        network,
        encoding,
        params: *params,
        p_loss,
        assessment,
    })
}
