//! Hardware loss parameterization and instrumentation of fusion circuits with
//! loss channels, plus evaluation of the probability that at least one photon
//! is lost (p_loss).
//!
//! Conventions: generation and detection inefficiency combine into a single
//! per-photon efficiency p_eff = p_gen * p_det applied up front on every mode;
//! each beamsplitter adds a loss channel on both of its output modes; every
//! layer of the layout adds a propagation loss channel on every mode. Mode
//! swaps carry no element loss.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bsm::BsmScheme;
use crate::circuit::{
    compile, survival_probability_gram, CircuitError, CircuitLayout, CompiledCircuit, Element,
    Space,
};
use crate::fock::{amplitude_raw, enumerate_patterns, FockAmplitudeVector, FockError, FockPattern, C64};

pub const DEFAULT_LAYER_LENGTH_UM: f64 = 500.0;

#[derive(Debug, Error)]
pub enum LossError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
}

fn default_layer_length() -> f64 {
    DEFAULT_LAYER_LENGTH_UM
}

/// Converts an attenuation in dB to a transmissivity in (0, 1].
pub fn db_to_transmission(db: f64) -> Result<f64, LossError> {
    if !(db >= 0.0) {
        return Err(LossError::OutOfRange {
            name: "db",
            value: db,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(10f64.powf(-db / 10.0))
}

/// Hardware loss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    /// Per-photon generation efficiency.
    pub p_gen: f64,
    /// Per-detector efficiency.
    pub p_det: f64,
    /// Loss per beamsplitter in dB.
    #[serde(default)]
    pub bs_loss_db: f64,
    /// Propagation loss in dB/cm.
    #[serde(default)]
    pub prop_loss_db_per_cm: f64,
    /// Length of one circuit layer in micrometers.
    #[serde(default = "default_layer_length")]
    pub layer_length_um: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams::ideal()
    }
}

impl LossParams {
    pub fn ideal() -> Self {
        LossParams {
            p_gen: 1.0,
            p_det: 1.0,
            bs_loss_db: 0.0,
            prop_loss_db_per_cm: 0.0,
            layer_length_um: DEFAULT_LAYER_LENGTH_UM,
        }
    }

    pub fn validate(&self) -> Result<(), LossError> {
        let unit = [("p_gen", self.p_gen), ("p_det", self.p_det)];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(LossError::OutOfRange {
                    name,
                    value,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        let nonneg = [
            ("bs_loss_db", self.bs_loss_db),
            ("prop_loss_db_per_cm", self.prop_loss_db_per_cm),
            ("layer_length_um", self.layer_length_um),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0) {
                return Err(LossError::OutOfRange {
                    name,
                    value,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
        }
        Ok(())
    }

    /// Combined generation and detection efficiency.
    pub fn p_eff(&self) -> f64 {
        self.p_gen * self.p_det
    }

    /// Transmissivity of one beamsplitter output.
    pub fn eta_bs(&self) -> f64 {
        db_to_transmission(self.bs_loss_db).expect("validated")
    }

    /// Propagation transmissivity of one layer.
    pub fn eta_layer(&self) -> f64 {
        let db = self.prop_loss_db_per_cm * self.layer_length_um * 1e-4;
        db_to_transmission(db).expect("validated")
    }

    pub fn is_lossless(&self) -> bool {
        self.p_eff() == 1.0 && self.bs_loss_db == 0.0 && self.prop_loss_db_per_cm == 0.0
    }
}

/// A scheme instrumented with the loss channels of a parameter point.
#[derive(Debug, Clone)]
pub struct LossySchemeInstance {
    pub base: BsmScheme,
    pub params: LossParams,
    pub layout: CircuitLayout,
}

/// Inserts loss channels into a scheme's layout: a front p_eff channel on
/// every mode, then after each base layer one merged channel per mode
/// combining the layer's propagation loss with beamsplitter loss on
/// beamsplitter output modes.
pub fn instrument(base: &BsmScheme, params: &LossParams) -> Result<LossySchemeInstance, LossError> {
    params.validate()?;
    let m = base.mode_count();
    let p_eff = params.p_eff();
    let eta_bs = params.eta_bs();
    let eta_layer = params.eta_layer();
    let mut layers: Vec<Vec<Element>> = Vec::new();
    if p_eff < 1.0 {
        layers.push((0..m).map(|mode| Element::Loss { mode, eta: p_eff }).collect());
    }
    for layer in base.layout.layers() {
        layers.push(layer.clone());
        let mut eta = vec![eta_layer; m];
        for el in layer {
            if let Element::Beamsplitter { a, b } = el {
                eta[*a] *= eta_bs;
                eta[*b] *= eta_bs;
            }
        }
        let loss_layer: Vec<Element> = eta
            .into_iter()
            .enumerate()
            .filter(|&(_, e)| e < 1.0)
            .map(|(mode, eta)| Element::Loss { mode, eta })
            .collect();
        if !loss_layer.is_empty() {
            layers.push(loss_layer);
        }
    }
    Ok(LossySchemeInstance {
        base: base.clone(),
        params: *params,
        layout: CircuitLayout::new(m, layers)?,
    })
}

/// |+>_L over one dual-rail channel's two modes: (|10> + |01>)/sqrt2.
fn plus_channel() -> FockAmplitudeVector {
    let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    FockAmplitudeVector::from_entries(
        2,
        [
            (FockPattern::new(vec![1, 0]), s),
            (FockPattern::new(vec![0, 1]), s),
        ],
    )
    .expect("2-mode patterns")
}

/// Default evaluation input over the four qubit rails: |+>_L (x) |+>_L.
pub fn logical_plus_plus() -> FockAmplitudeVector {
    plus_channel().tensor(&plus_channel())
}

/// The four computational-basis product states over the four qubit rails.
pub fn computational_products() -> [FockAmplitudeVector; 4] {
    let basis = |occ: [u32; 4]| FockAmplitudeVector::from_pattern(FockPattern::new(occ.to_vec()));
    [
        basis([1, 0, 1, 0]),
        basis([1, 0, 0, 1]),
        basis([0, 1, 1, 0]),
        basis([0, 1, 0, 1]),
    ]
}

/// p_loss for the default input and the worst computational-basis product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlossEvaluation {
    pub default_input: f64,
    pub worst_basis_input: f64,
}

impl PlossEvaluation {
    /// The conservative figure used in threshold analysis.
    pub fn reported(&self) -> f64 {
        self.default_input.max(self.worst_basis_input)
    }
}

fn p_loss_for(
    compiled: &CompiledCircuit,
    instance: &LossySchemeInstance,
    qubits: &FockAmplitudeVector,
) -> Result<f64, LossError> {
    let input = instance.base.input_state(qubits);
    let p_surv = survival_probability_gram(compiled, &input)?;
    Ok((1.0 - p_surv).clamp(0.0, 1.0))
}

/// Evaluates p_loss = 1 - p_surv over the reduced-space subunitary, for the
/// default |+>_L (x) |+>_L input and for each computational product.
pub fn evaluate_p_loss(instance: &LossySchemeInstance) -> Result<PlossEvaluation, LossError> {
    let compiled = compile(&instance.layout, Space::Reduced)?;
    let default_input = p_loss_for(&compiled, instance, &logical_plus_plus())?;
    let mut worst_basis_input: f64 = 0.0;
    for qubits in computational_products() {
        worst_basis_input = worst_basis_input.max(p_loss_for(&compiled, instance, &qubits)?);
    }
    Ok(PlossEvaluation {
        default_input,
        worst_basis_input,
    })
}

/// Conservative p_loss: the maximum over the default input and the four
/// computational-basis products.
pub fn compute_p_loss(instance: &LossySchemeInstance) -> Result<f64, LossError> {
    Ok(evaluate_p_loss(instance)?.reported())
}

/// Independent oracle: survival probability via extended-space unitary
/// evolution, summing the probability of every output pattern that keeps all
/// photons out of the loss modes (equivalent to the density-matrix partial
/// trace over loss modes). Exponentially slower than the reduced method; used
/// for cross-checks.
pub fn survival_probability_extended(
    instance: &LossySchemeInstance,
    qubits: &FockAmplitudeVector,
) -> Result<f64, LossError> {
    use rayon::prelude::*;
    let compiled = compile(&instance.layout, Space::Extended)?;
    let m = compiled.original_mode_count;
    let extra = compiled.loss_mode_count;
    let input = instance.base.input_state(qubits);
    let n = instance.base.total_photons();
    let u = compiled.matrix.matrix();
    let padded: Vec<(FockPattern, C64)> = input
        .entries()
        .map(|(p, a)| (p.padded(extra), *a))
        .collect();
    let outputs = enumerate_patterns(m, n)?;
    let total = outputs
        .par_iter()
        .map(|out| {
            let out_padded = out.padded(extra);
            let mut acc = C64::new(0.0, 0.0);
            for (p, a) in &padded {
                acc += *a * amplitude_raw(&u.view(), p, &out_padded).expect("sector sizes match");
            }
            acc.norm_sqr()
        })
        .sum::<f64>();
    Ok(total.clamp(0.0, 1.0))
}
