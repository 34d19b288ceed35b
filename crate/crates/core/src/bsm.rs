//! Catalog of linear-optical fusion circuits: the regular Bell-state
//! measurement and its boosted variants, with exhaustive classification of
//! detection patterns into success / failure / loss outcomes and computation
//! of the lossless success probability.
//!
//! Mode convention: dual-rail channel c occupies modes (2c, 2c+1). The two
//! measured qubits sit in channels 0 and 1 (modes 0..3, in the order
//! h1, v1, h2, v2); ancilla channels follow.

use std::fmt;

use thiserror::Error;

use crate::circuit::{
    evolve_sector, CircuitError, CircuitLayout, Element, SectorState,
};
use crate::fock::{enumerate_patterns, FockAmplitudeVector, FockError, FockPattern, C64};

/// Probability below which a detection pattern counts as unreachable from a
/// Bell input. Interference zeros in these circuits are dyadic-rational and
/// numerically clean.
pub const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BsmError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("pattern {pattern} is consistent with Bell states {states:?} and cannot be classified")]
    UnclassifiablePattern {
        pattern: FockPattern,
        states: Vec<BellLabel>,
    },
    #[error("circuit failure patterns mix XX and ZZ operators")]
    MixedFailureBasis,
    #[error("circuit needs at least the four qubit modes, got {0}")]
    TooFewModes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// XX eigenvalue: +1 for the "+" states, -1 for the "-" states.
    pub fn xx(self) -> i8 {
        match self {
            BellLabel::PhiPlus | BellLabel::PsiPlus => 1,
            BellLabel::PhiMinus | BellLabel::PsiMinus => -1,
        }
    }

    /// ZZ eigenvalue: +1 for Phi, -1 for Psi.
    pub fn zz(self) -> i8 {
        match self {
            BellLabel::PhiPlus | BellLabel::PhiMinus => 1,
            BellLabel::PsiPlus | BellLabel::PsiMinus => -1,
        }
    }

    /// Dual-rail Fock representation over 4 modes (h1, v1, h2, v2).
    pub fn state(self) -> FockAmplitudeVector {
        let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let (first, second, sign) = match self {
            BellLabel::PhiPlus => (vec![1, 0, 1, 0], vec![0, 1, 0, 1], 1.0),
            BellLabel::PhiMinus => (vec![1, 0, 1, 0], vec![0, 1, 0, 1], -1.0),
            BellLabel::PsiPlus => (vec![1, 0, 0, 1], vec![0, 1, 1, 0], 1.0),
            BellLabel::PsiMinus => (vec![1, 0, 0, 1], vec![0, 1, 1, 0], -1.0),
        };
        FockAmplitudeVector::from_entries(
            4,
            [
                (FockPattern::new(first), s),
                (FockPattern::new(second), s * sign),
            ],
        )
        .expect("4-mode patterns")
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PhiMinus => "Phi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PsiMinus => "Psi-",
        };
        write!(f, "{s}")
    }
}

/// Ancillary photonic states used for boosting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AncillaKind {
    /// No ancilla.
    None,
    /// |11>: one unentangled photon pair feeding a single boosting module.
    OnePair,
    /// 2x|11>: two unentangled pairs, one boosting module per output arm.
    TwoPairs,
    /// |Phi+> = (|1010> + |0101>)/sqrt2: a dual-rail Bell pair.
    BellPair,
    /// |A2> = (|2020> + |0202>)/sqrt2.
    A2,
    /// |Phi+> (x) |B2>, with |B2> = (|10101010> + |01010101>)/sqrt2.
    BellPairB2,
}

impl AncillaKind {
    pub fn photon_count(self) -> u32 {
        match self {
            AncillaKind::None => 0,
            AncillaKind::OnePair | AncillaKind::BellPair => 2,
            AncillaKind::TwoPairs | AncillaKind::A2 => 4,
            AncillaKind::BellPairB2 => 6,
        }
    }

    pub fn mode_count(self) -> usize {
        match self {
            AncillaKind::None => 0,
            AncillaKind::OnePair => 2,
            AncillaKind::TwoPairs | AncillaKind::BellPair | AncillaKind::A2 => 4,
            AncillaKind::BellPairB2 => 12,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AncillaKind::None => "none",
            AncillaKind::OnePair => "|11>",
            AncillaKind::TwoPairs => "2x|11>",
            AncillaKind::BellPair => "|Phi+>",
            AncillaKind::A2 => "|A2>",
            AncillaKind::BellPairB2 => "|Phi+>|B2>",
        }
    }

    /// Fock representation over this ancilla's own modes.
    pub fn state(self) -> FockAmplitudeVector {
        let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            AncillaKind::None => {
                FockAmplitudeVector::from_entries(0, [(FockPattern::vacuum(0), one)])
                    .expect("vacuum")
            }
            AncillaKind::OnePair => {
                FockAmplitudeVector::from_pattern(FockPattern::new(vec![1, 1]))
            }
            AncillaKind::TwoPairs => {
                FockAmplitudeVector::from_pattern(FockPattern::new(vec![1, 1, 1, 1]))
            }
            AncillaKind::BellPair => FockAmplitudeVector::from_entries(
                4,
                [
                    (FockPattern::new(vec![1, 0, 1, 0]), s),
                    (FockPattern::new(vec![0, 1, 0, 1]), s),
                ],
            )
            .expect("4-mode patterns"),
            AncillaKind::A2 => FockAmplitudeVector::from_entries(
                4,
                [
                    (FockPattern::new(vec![2, 0, 2, 0]), s),
                    (FockPattern::new(vec![0, 2, 0, 2]), s),
                ],
            )
            .expect("4-mode patterns"),
            AncillaKind::BellPairB2 => {
                let bell = AncillaKind::BellPair.state();
                let b2 = FockAmplitudeVector::from_entries(
                    8,
                    [
                        (FockPattern::new(vec![1, 0, 1, 0, 1, 0, 1, 0]), s),
                        (FockPattern::new(vec![0, 1, 0, 1, 0, 1, 0, 1]), s),
                    ],
                )
                .expect("8-mode patterns");
                bell.tensor(&b2)
            }
        }
    }
}

/// Which single two-qubit operator a fusion yields when it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureBasis {
    XX,
    ZZ,
}

impl fmt::Display for FailureBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureBasis::XX => write!(f, "XX"),
            FailureBasis::ZZ => write!(f, "ZZ"),
        }
    }
}

/// Classification of one detection pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeClass {
    /// The pattern identifies exactly one Bell state; XX and ZZ are measured.
    Success(BellLabel),
    /// The pattern is consistent with the two Bell states sharing one
    /// eigenvalue; only that operator is measured.
    Failure { operator: FailureBasis, outcome: i8 },
    /// Short photon count: at least one photon was lost.
    Loss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternClass {
    pub pattern: FockPattern,
    pub class: OutcomeClass,
    /// Detection probability of this pattern for each Bell input, in
    /// [`BellLabel::ALL`] order.
    pub probabilities: [f64; 4],
}

/// A named fusion circuit: lossless layout, ancilla, and the simulated
/// lossless success probability.
#[derive(Debug, Clone)]
pub struct BsmScheme {
    pub name: String,
    pub layout: CircuitLayout,
    pub ancilla: AncillaKind,
    /// Input modes of the two measured qubits: h1, v1, h2, v2.
    pub qubit_modes: [usize; 4],
    pub failure_basis: FailureBasis,
    pub p_succ_lossless: f64,
}

impl BsmScheme {
    pub fn mode_count(&self) -> usize {
        self.layout.mode_count()
    }

    pub fn total_photons(&self) -> u32 {
        2 + self.ancilla.photon_count()
    }

    /// Full circuit input for a given two-qubit state over the four qubit
    /// rails: qubits (x) ancilla, padded with vacuum up to the layout width.
    pub fn input_state(&self, qubits: &FockAmplitudeVector) -> FockAmplitudeVector {
        assert_eq!(qubits.mode_count(), 4);
        let mut state = qubits.tensor(&self.ancilla.state());
        let extra = self.mode_count() - state.mode_count();
        if extra > 0 {
            state = state.tensor(&FockAmplitudeVector::from_pattern(FockPattern::vacuum(extra)));
        }
        state
    }
}

fn leading_hadamard_layer() -> Vec<Element> {
    vec![
        Element::Beamsplitter { a: 0, b: 1 },
        Element::Beamsplitter { a: 2, b: 3 },
    ]
}

/// Pairs the two rails of dual-rail channel pairs for the next beamsplitter
/// layer: swap(4k+1, 4k+2) for every channel pair k, over `channels` channels.
fn rail_pair_swap_layer(channels: usize) -> Vec<Element> {
    (0..channels / 2)
        .map(|k| Element::Swap {
            a: 4 * k + 1,
            b: 4 * k + 2,
        })
        .collect()
}

/// Beamsplitters on adjacent mode pairs (0,1), (2,3), ... over `modes` modes.
fn adjacent_bs_layer(modes: usize) -> Vec<Element> {
    (0..modes / 2)
        .map(|k| Element::Beamsplitter { a: 2 * k, b: 2 * k + 1 })
        .collect()
}

/// Beamsplitters between the rails of channel pairs differing in `bit`.
fn channel_stage_layer(channels: usize, bit: usize) -> Vec<Element> {
    let mut layer = Vec::new();
    for c in 0..channels {
        if c & bit == 0 {
            let d = c | bit;
            layer.push(Element::Beamsplitter { a: 2 * c, b: 2 * d });
            layer.push(Element::Beamsplitter {
                a: 2 * c + 1,
                b: 2 * d + 1,
            });
        }
    }
    layer
}

/// Regular two-beamsplitter BSM on 4 modes, p_succ = 0.5. The XX variant
/// carries leading beamsplitters on each qubit; removing them moves the
/// failure basis to ZZ.
pub fn build_regular_bsm(variant: FailureBasis) -> Result<BsmScheme, BsmError> {
    let mut layers = Vec::new();
    if variant == FailureBasis::XX {
        layers.push(leading_hadamard_layer());
    }
    layers.push(rail_pair_swap_layer(2));
    layers.push(adjacent_bs_layer(4));
    layers.push(rail_pair_swap_layer(2));
    let layout = CircuitLayout::new(4, layers)?;
    finish_scheme("regular".to_string(), layout, AncillaKind::None, variant)
}

/// Boosted BSM circuit for the given ancilla. All catalog schemes measure XX
/// on failure; apply [`with_failure_basis`] for the ZZ variants.
pub fn build_boosted_bsm(ancilla: AncillaKind) -> Result<BsmScheme, BsmError> {
    build_boosted_variant(ancilla, FailureBasis::XX)
}

fn build_boosted_variant(
    ancilla: AncillaKind,
    variant: FailureBasis,
) -> Result<BsmScheme, BsmError> {
    let (name, layout) = match ancilla {
        AncillaKind::None => {
            let scheme = build_regular_bsm(variant)?;
            return Ok(scheme);
        }
        AncillaKind::BellPair => {
            // entangled-ancilla boosting: 4-channel Hadamard butterfly with the
            // ancilla in channels 2 and 3
            let mut layers = Vec::new();
            if variant == FailureBasis::XX {
                layers.push(leading_hadamard_layer());
            }
            layers.push(rail_pair_swap_layer(4));
            layers.push(adjacent_bs_layer(8));
            layers.push(rail_pair_swap_layer(4));
            layers.push(channel_stage_layer(4, 2));
            ("boosted-phi+".to_string(), CircuitLayout::new(8, layers)?)
        }
        AncillaKind::BellPairB2 => {
            // two butterfly stages deeper: 8 channels, |Phi+> in channels 2-3,
            // |B2> in channels 4-7
            let mut layers = Vec::new();
            if variant == FailureBasis::XX {
                layers.push(leading_hadamard_layer());
            }
            layers.push(rail_pair_swap_layer(8));
            layers.push(adjacent_bs_layer(16));
            layers.push(rail_pair_swap_layer(8));
            layers.push(channel_stage_layer(8, 2));
            layers.push(channel_stage_layer(8, 4));
            ("boosted-phi+b2".to_string(), CircuitLayout::new(16, layers)?)
        }
        AncillaKind::OnePair | AncillaKind::TwoPairs | AncillaKind::A2 => {
            // unentangled-photon-style boosting: regular core, then a 4-mode
            // Hadamard module mixing an output arm's two rails with one
            // ancilla pair. These schemes measure XX on failure as built;
            // leading qubit beamsplitters move the failure basis to ZZ.
            let both_arms = ancilla != AncillaKind::OnePair;
            let modes = if both_arms { 8 } else { 6 };
            let mut layers = Vec::new();
            if variant == FailureBasis::ZZ {
                layers.push(leading_hadamard_layer());
            }
            layers.push(rail_pair_swap_layer(2));
            layers.push(adjacent_bs_layer(4));
            layers.push(rail_pair_swap_layer(2));
            // module stage 1: rails within each arm, rails within each
            // ancilla pair; the unboosted arm of the single-module scheme
            // still gets its rail mixer so the failure basis stays uniform
            let mut stage1 = vec![
                Element::Beamsplitter { a: 0, b: 1 },
                Element::Beamsplitter { a: 2, b: 3 },
                Element::Beamsplitter { a: 4, b: 5 },
            ];
            // module stage 2: arm rails against ancilla rails
            let mut stage2 = vec![
                Element::Beamsplitter { a: 0, b: 4 },
                Element::Beamsplitter { a: 1, b: 5 },
            ];
            if both_arms {
                stage1.push(Element::Beamsplitter { a: 6, b: 7 });
                stage2.push(Element::Beamsplitter { a: 2, b: 6 });
                stage2.push(Element::Beamsplitter { a: 3, b: 7 });
            }
            layers.push(stage1);
            layers.push(stage2);
            let name = match ancilla {
                AncillaKind::OnePair => "boosted-11",
                AncillaKind::TwoPairs => "boosted-2x11",
                _ => "boosted-a2",
            };
            (name.to_string(), CircuitLayout::new(modes, layers)?)
        }
    };
    finish_scheme(name, layout, ancilla, variant)
}

/// Rebuilds a catalog scheme with the other failure basis by adding or
/// removing the leading qubit beamsplitters.
pub fn with_failure_basis(
    scheme: &BsmScheme,
    variant: FailureBasis,
) -> Result<BsmScheme, BsmError> {
    if scheme.ancilla == AncillaKind::None {
        build_regular_bsm(variant)
    } else {
        build_boosted_variant(scheme.ancilla, variant)
    }
}

fn finish_scheme(
    name: String,
    layout: CircuitLayout,
    ancilla: AncillaKind,
    failure_basis: FailureBasis,
) -> Result<BsmScheme, BsmError> {
    let mut scheme = BsmScheme {
        name,
        layout,
        ancilla,
        qubit_modes: [0, 1, 2, 3],
        failure_basis,
        p_succ_lossless: f64::NAN,
    };
    let classes = classify_patterns(&scheme)?;
    scheme.p_succ_lossless = success_probability_from(&classes);
    Ok(scheme)
}

/// Builds a scheme around a user-supplied layout: qubits in modes 0..3, any
/// further modes fed with vacuum. The failure basis is inferred from the
/// classification and must be uniform across failure patterns.
pub fn custom_scheme(name: &str, layout: CircuitLayout) -> Result<BsmScheme, BsmError> {
    if layout.mode_count() < 4 {
        return Err(BsmError::TooFewModes(layout.mode_count()));
    }
    let mut scheme = BsmScheme {
        name: name.to_string(),
        layout,
        ancilla: AncillaKind::None,
        qubit_modes: [0, 1, 2, 3],
        failure_basis: FailureBasis::XX,
        p_succ_lossless: f64::NAN,
    };
    let classes = classify_patterns(&scheme)?;
    let mut basis = None;
    for pc in &classes {
        if let OutcomeClass::Failure { operator, .. } = pc.class {
            match basis {
                None => basis = Some(operator),
                Some(b) if b != operator => return Err(BsmError::MixedFailureBasis),
                Some(_) => {}
            }
        }
    }
    scheme.failure_basis = basis.unwrap_or(FailureBasis::XX);
    scheme.p_succ_lossless = success_probability_from(&classes);
    Ok(scheme)
}

/// Classifies every reachable full-photon-count detection pattern of a
/// lossless scheme by its consistency with the four Bell inputs.
pub fn classify_patterns(scheme: &BsmScheme) -> Result<Vec<PatternClass>, BsmError> {
    let modes = scheme.mode_count();
    let photons = scheme.total_photons();
    let mut probs_per_bell = Vec::with_capacity(4);
    for bell in BellLabel::ALL {
        let input = scheme.input_state(&bell.state());
        let mut sector = SectorState::from_vector(&input)?;
        evolve_sector(&scheme.layout, &mut sector)?;
        probs_per_bell.push(
            sector
                .amplitudes
                .iter()
                .map(|a| a.norm_sqr())
                .collect::<Vec<f64>>(),
        );
    }
    let patterns = enumerate_patterns(modes, photons)?;
    let mut out = Vec::new();
    for (i, pattern) in patterns.into_iter().enumerate() {
        let probabilities = [
            probs_per_bell[0][i],
            probs_per_bell[1][i],
            probs_per_bell[2][i],
            probs_per_bell[3][i],
        ];
        let consistent: Vec<BellLabel> = BellLabel::ALL
            .iter()
            .copied()
            .zip(probabilities)
            .filter(|&(_, p)| p > CLASSIFY_TOL)
            .map(|(b, _)| b)
            .collect();
        let class = match consistent.as_slice() {
            [] => continue, // unreachable pattern
            [single] => OutcomeClass::Success(*single),
            [a, b] if a.xx() == b.xx() && a.zz() != b.zz() => OutcomeClass::Failure {
                operator: FailureBasis::XX,
                outcome: a.xx(),
            },
            [a, b] if a.zz() == b.zz() && a.xx() != b.xx() => OutcomeClass::Failure {
                operator: FailureBasis::ZZ,
                outcome: a.zz(),
            },
            _ => {
                return Err(BsmError::UnclassifiablePattern {
                    pattern,
                    states: consistent,
                })
            }
        };
        out.push(PatternClass {
            pattern,
            class,
            probabilities,
        });
    }
    Ok(out)
}

/// Classifies an arbitrary detection pattern against a precomputed table.
/// Short photon counts are loss; full-count patterns must appear in the table.
pub fn classify_one(
    scheme: &BsmScheme,
    table: &[PatternClass],
    pattern: &FockPattern,
) -> Option<OutcomeClass> {
    if pattern.total_photons() < scheme.total_photons() {
        return Some(OutcomeClass::Loss);
    }
    table
        .iter()
        .find(|pc| &pc.pattern == pattern)
        .map(|pc| pc.class.clone())
}

pub fn success_probability_from(classes: &[PatternClass]) -> f64 {
    // success probability for a uniformly distributed Bell input, i.e. the
    // average over the four Bell states
    classes
        .iter()
        .filter(|pc| matches!(pc.class, OutcomeClass::Success(_)))
        .map(|pc| pc.probabilities.iter().sum::<f64>())
        .sum::<f64>()
        / 4.0
}

/// Lossless success probability, averaged over the four Bell inputs.
pub fn success_probability(scheme: &BsmScheme) -> Result<f64, BsmError> {
    Ok(success_probability_from(&classify_patterns(scheme)?))
}

/// All catalog schemes, cheapest first.
pub fn catalog() -> Result<Vec<BsmScheme>, BsmError> {
    Ok(vec![
        build_regular_bsm(FailureBasis::XX)?,
        build_boosted_bsm(AncillaKind::OnePair)?,
        build_boosted_bsm(AncillaKind::TwoPairs)?,
        build_boosted_bsm(AncillaKind::BellPair)?,
        build_boosted_bsm(AncillaKind::A2)?,
        build_boosted_bsm(AncillaKind::BellPairB2)?,
    ])
}

pub fn catalog_scheme(name: &str) -> Result<Option<BsmScheme>, BsmError> {
    Ok(catalog()?.into_iter().find(|s| s.name == name))
}

/// Structured text export of a scheme: header metadata, layout records and the
/// pattern classification table. Used for golden-file regression tests.
pub fn export_scheme(scheme: &BsmScheme) -> Result<String, BsmError> {
    let classes = classify_patterns(scheme)?;
    let mut out = String::new();
    out.push_str(&format!("scheme {}\n", scheme.name));
    out.push_str(&format!("ancilla {}\n", scheme.ancilla.label()));
    out.push_str(&format!("modes {}\n", scheme.mode_count()));
    out.push_str(&format!("photons {}\n", scheme.total_photons()));
    out.push_str(&format!("failure_basis {}\n", scheme.failure_basis));
    out.push_str(&format!("p_succ {:.12}\n", scheme.p_succ_lossless));
    out.push_str(&format!(
        "layers {} beamsplitters {} swaps {}\n",
        scheme.layout.layer_count(),
        scheme.layout.beamsplitter_count(),
        scheme.layout.swap_count()
    ));
    out.push_str("layout\n");
    out.push_str(&crate::circuit::format_circuit(&scheme.layout));
    out.push_str("classification\n");
    for pc in &classes {
        let desc = match &pc.class {
            OutcomeClass::Success(b) => format!("success {b}"),
            OutcomeClass::Failure { operator, outcome } => {
                format!("failure {operator} {outcome:+}")
            }
            OutcomeClass::Loss => "loss".to_string(),
        };
        out.push_str(&format!(
            "{} {} p={:.12},{:.12},{:.12},{:.12}\n",
            pc.pattern,
            desc,
            pc.probabilities[0],
            pc.probabilities[1],
            pc.probabilities[2],
            pc.probabilities[3]
        ));
    }
    Ok(out)
}
