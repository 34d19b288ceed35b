//! Layered linear-optical circuits built from 50:50 beamsplitters, mode swaps
//! and loss channels, with compilation to transfer matrices. Loss channels can
//! be compiled either into an extended-space unitary (one fresh vacuum mode per
//! channel) or into a reduced-space subunitary acting on the original modes.

use std::collections::HashMap;

use ndarray::Array2;
use thiserror::Error;

use crate::fock::{
    self, amplitude_raw, enumerate_patterns, pattern_rank, FockAmplitudeVector, FockError,
    FockPattern, MatrixKind, TransferMatrix, C64,
};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("mode index {mode} out of range for width {width}")]
    ModeOutOfRange { mode: usize, width: usize },
    #[error("beamsplitter/swap modes must be distinct (got {0})")]
    DegenerateElement(usize),
    #[error("transmissivity {0} outside [0, 1]")]
    BadTransmissivity(f64),
    #[error("layer {layer} touches mode {mode} twice")]
    LayerNotDisjoint { layer: usize, mode: usize },
    #[error("input state mixes photon numbers; survival probability is undefined")]
    MixedPhotonNumber,
    #[error("input has {got} modes, circuit has {expected}")]
    ModeCountMismatch { expected: usize, got: usize },
    #[error("circuit file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A placed optical element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// 50:50 beamsplitter, transfer matrix (1/sqrt2)[[1,1],[1,-1]] on (a, b).
    Beamsplitter { a: usize, b: usize },
    /// Mode swap; lossless routing only.
    Swap { a: usize, b: usize },
    /// Attenuation of one mode with transmissivity eta.
    Loss { mode: usize, eta: f64 },
}

impl Element {
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Element::Beamsplitter { a, b } | Element::Swap { a, b } => vec![a, b],
            Element::Loss { mode, .. } => vec![mode],
        }
    }

    fn validate(&self, width: usize) -> Result<(), CircuitError> {
        match *self {
            Element::Beamsplitter { a, b } | Element::Swap { a, b } => {
                if a == b {
                    return Err(CircuitError::DegenerateElement(a));
                }
                for m in [a, b] {
                    if m >= width {
                        return Err(CircuitError::ModeOutOfRange { mode: m, width });
                    }
                }
            }
            Element::Loss { mode, eta } => {
                if mode >= width {
                    return Err(CircuitError::ModeOutOfRange { mode, width });
                }
                if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
                    return Err(CircuitError::BadTransmissivity(eta));
                }
            }
        }
        Ok(())
    }
}

/// Which space a circuit is compiled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Loss channels become beamsplitters into fresh vacuum modes; the result
    /// is unitary on mode_count + loss_mode_count modes.
    Extended,
    /// Loss channels scale amplitudes; the result is a subunitary matrix on
    /// the original modes.
    Reduced,
}

/// Layered circuit over a fixed number of modes. Elements within a layer act
/// on disjoint modes; layer order is temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitLayout {
    mode_count: usize,
    layers: Vec<Vec<Element>>,
}

impl CircuitLayout {
    pub fn new(mode_count: usize, layers: Vec<Vec<Element>>) -> Result<Self, CircuitError> {
        for (li, layer) in layers.iter().enumerate() {
            let mut seen = vec![false; mode_count];
            for el in layer {
                el.validate(mode_count)?;
                for m in el.modes() {
                    if seen[m] {
                        return Err(CircuitError::LayerNotDisjoint { layer: li, mode: m });
                    }
                    seen[m] = true;
                }
            }
        }
        Ok(CircuitLayout { mode_count, layers })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn layers(&self) -> &[Vec<Element>] {
        &self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn beamsplitter_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|e| matches!(e, Element::Beamsplitter { .. }))
            .count()
    }

    pub fn loss_channel_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|e| matches!(e, Element::Loss { .. }))
            .count()
    }

    pub fn swap_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|e| matches!(e, Element::Swap { .. }))
            .count()
    }
}

/// A layout compiled to a single transfer matrix.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub original_mode_count: usize,
    pub loss_mode_count: usize,
    pub matrix: TransferMatrix,
}

/// Transfer matrix of a single element embedded into `width` modes.
/// Loss channels are compiled per `space`: reduced scales the target row by
/// sqrt(eta); extended couples the target to a dedicated loss mode appended as
/// mode `width` (the returned matrix then has width + 1 modes).
pub fn element_matrix(
    element: &Element,
    width: usize,
    space: Space,
) -> Result<TransferMatrix, CircuitError> {
    element.validate(width)?;
    let dim = match (element, space) {
        (Element::Loss { .. }, Space::Extended) => width + 1,
        _ => width,
    };
    let mut m = Array2::from_shape_fn((dim, dim), |(r, c)| {
        if r == c {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    apply_element_to_matrix(&mut m, element, space, width);
    Ok(match (element, space) {
        (Element::Loss { .. }, Space::Reduced) => TransferMatrix::subunitary(m)?,
        _ => TransferMatrix::unitary(m)?,
    })
}

/// Left-multiplies `m` by the element's matrix (rows are updated in place).
/// For an extended-space loss channel, `loss_mode` names the dedicated loss
/// mode row.
fn apply_element_rows(m: &mut Array2<C64>, element: &Element, space: Space, loss_mode: usize) {
    let cols = m.ncols();
    match *element {
        Element::Beamsplitter { a, b } => {
            let s = 1.0 / 2.0_f64.sqrt();
            for c in 0..cols {
                let (xa, xb) = (m[(a, c)], m[(b, c)]);
                m[(a, c)] = s * (xa + xb);
                m[(b, c)] = s * (xa - xb);
            }
        }
        Element::Swap { a, b } => {
            for c in 0..cols {
                let tmp = m[(a, c)];
                m[(a, c)] = m[(b, c)];
                m[(b, c)] = tmp;
            }
        }
        Element::Loss { mode, eta } => {
            let t = eta.sqrt();
            match space {
                Space::Reduced => {
                    for c in 0..cols {
                        m[(mode, c)] *= t;
                    }
                }
                Space::Extended => {
                    let r = (1.0 - eta).sqrt();
                    for c in 0..cols {
                        let (xm, xl) = (m[(mode, c)], m[(loss_mode, c)]);
                        m[(mode, c)] = t * xm + r * xl;
                        m[(loss_mode, c)] = r * xm - t * xl;
                    }
                }
            }
        }
    }
}

fn apply_element_to_matrix(m: &mut Array2<C64>, element: &Element, space: Space, width: usize) {
    apply_element_rows(m, element, space, width);
}

/// Compiles a layout to a single transfer matrix by multiplying element
/// matrices in layer order. In extended space each loss channel receives a
/// fresh, initially unoccupied mode, appended in layer order.
pub fn compile(layout: &CircuitLayout, space: Space) -> Result<CompiledCircuit, CircuitError> {
    let m_orig = layout.mode_count();
    let loss_modes = match space {
        Space::Reduced => 0,
        Space::Extended => layout.loss_channel_count(),
    };
    let dim = m_orig + loss_modes;
    let mut total = Array2::from_shape_fn((dim, dim), |(r, c)| {
        if r == c {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut next_loss_mode = m_orig;
    for layer in layout.layers() {
        for el in layer {
            let lm = if matches!(el, Element::Loss { .. }) && space == Space::Extended {
                let lm = next_loss_mode;
                next_loss_mode += 1;
                lm
            } else {
                0
            };
            apply_element_rows(&mut total, el, space, lm);
        }
    }
    let matrix = match space {
        Space::Extended => TransferMatrix::unitary(total)?,
        Space::Reduced => TransferMatrix::subunitary(total)?,
    };
    Ok(CompiledCircuit {
        original_mode_count: m_orig,
        loss_mode_count: loss_modes,
        matrix,
    })
}

/// Probability that all photons survive the circuit: the summed probability of
/// every same-photon-number output pattern under the reduced-space subunitary.
pub fn survival_probability(
    layout: &CircuitLayout,
    input: &FockAmplitudeVector,
) -> Result<f64, CircuitError> {
    if input.mode_count() != layout.mode_count() {
        return Err(CircuitError::ModeCountMismatch {
            expected: layout.mode_count(),
            got: input.mode_count(),
        });
    }
    let n = input
        .uniform_photon_count()
        .ok_or(CircuitError::MixedPhotonNumber)?;
    let compiled = compile(layout, Space::Reduced)?;
    let l = compiled.matrix.matrix().view();
    let mut total = 0.0;
    for out in enumerate_patterns(layout.mode_count(), n)? {
        let mut acc = C64::new(0.0, 0.0);
        for (p, a) in input.entries() {
            acc += a * amplitude_raw(&l, p, &out)?;
        }
        total += acc.norm_sqr();
    }
    Ok(total)
}

/// Dense amplitude vector over one photon-number sector, used for fast
/// element-by-element evolution of full circuits.
#[derive(Debug, Clone)]
pub struct SectorState {
    pub mode_count: usize,
    pub photon_count: u32,
    pub patterns: std::sync::Arc<Vec<FockPattern>>,
    pub amplitudes: Vec<C64>,
}

impl SectorState {
    pub fn from_vector(input: &FockAmplitudeVector) -> Result<Self, CircuitError> {
        let n = input
            .uniform_photon_count()
            .ok_or(CircuitError::MixedPhotonNumber)?;
        let patterns = enumerate_patterns(input.mode_count(), n)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); patterns.len()];
        for (p, a) in input.entries() {
            amplitudes[pattern_rank(p)] = *a;
        }
        Ok(SectorState {
            mode_count: input.mode_count(),
            photon_count: n,
            patterns: std::sync::Arc::new(patterns),
            amplitudes,
        })
    }

    pub fn to_vector(&self, eps: f64) -> FockAmplitudeVector {
        let mut v = FockAmplitudeVector::new(self.mode_count);
        for (p, a) in self.patterns.iter().zip(&self.amplitudes) {
            if a.norm() > eps {
                v.add(p.clone(), *a).expect("mode counts match");
            }
        }
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude_of(&self, pattern: &FockPattern) -> C64 {
        self.amplitudes[pattern_rank(pattern)]
    }
}

/// Two-mode transition blocks <r, t-r| U2 |n, t-n> for a 2x2 matrix, cached
/// per total photon number t. block[t][r][n].
fn two_mode_blocks(u: [[C64; 2]; 2], max_t: u32) -> Vec<Vec<Vec<C64>>> {
    let m2 = Array2::from_shape_fn((2, 2), |(r, c)| u[r][c]);
    (0..=max_t)
        .map(|t| {
            (0..=t)
                .map(|r| {
                    (0..=t)
                        .map(|n| {
                            amplitude_raw(
                                &m2.view(),
                                &FockPattern::new(vec![n, t - n]),
                                &FockPattern::new(vec![r, t - r]),
                            )
                            .expect("photon counts match")
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Applies one layout in reduced space to a dense sector state, element by
/// element. Equivalent to evolving through compile(layout, Reduced) but much
/// faster for large sectors.
pub fn evolve_sector(layout: &CircuitLayout, state: &mut SectorState) -> Result<(), CircuitError> {
    if state.mode_count != layout.mode_count() {
        return Err(CircuitError::ModeCountMismatch {
            expected: layout.mode_count(),
            got: state.mode_count,
        });
    }
    let n = state.photon_count;
    let s = 1.0 / 2.0_f64.sqrt();
    let bs = [
        [C64::new(s, 0.0), C64::new(s, 0.0)],
        [C64::new(s, 0.0), C64::new(-s, 0.0)],
    ];
    let bs_blocks = two_mode_blocks(bs, n);
    let patterns = state.patterns.clone();
    let index_of = |p: &FockPattern| pattern_rank(p);
    let mut scratch = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
    let mut eta_pows: HashMap<u64, Vec<f64>> = HashMap::new();
    for layer in layout.layers() {
        for el in layer {
            match *el {
                Element::Swap { a, b } => {
                    for x in scratch.iter_mut() {
                        *x = C64::new(0.0, 0.0);
                    }
                    let mut occ = Vec::new();
                    for (i, p) in patterns.iter().enumerate() {
                        let amp = state.amplitudes[i];
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        occ.clear();
                        occ.extend_from_slice(p.occupations());
                        occ.swap(a, b);
                        scratch[index_of(&FockPattern::new(occ.clone()))] += amp;
                    }
                    std::mem::swap(&mut state.amplitudes, &mut scratch);
                }
                Element::Beamsplitter { a, b } => {
                    for x in scratch.iter_mut() {
                        *x = C64::new(0.0, 0.0);
                    }
                    let mut occ = Vec::new();
                    for (i, p) in patterns.iter().enumerate() {
                        let amp = state.amplitudes[i];
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        let na = p.occupations()[a];
                        let nb = p.occupations()[b];
                        let t = na + nb;
                        let block = &bs_blocks[t as usize];
                        occ.clear();
                        occ.extend_from_slice(p.occupations());
                        for r in 0..=t {
                            let coeff = block[r as usize][na as usize];
                            if coeff.norm_sqr() == 0.0 {
                                continue;
                            }
                            occ[a] = r;
                            occ[b] = t - r;
                            scratch[index_of(&FockPattern::new(occ.clone()))] += amp * coeff;
                        }
                    }
                    std::mem::swap(&mut state.amplitudes, &mut scratch);
                }
                Element::Loss { mode, eta } => {
                    // diagonal in the pattern basis: amplitude factor eta^(n/2)
                    let key = eta.to_bits();
                    let pows = eta_pows.entry(key).or_insert_with(|| {
                        (0..=n)
                            .map(|k| eta.sqrt().powi(k as i32))
                            .collect::<Vec<_>>()
                    });
                    for (i, p) in patterns.iter().enumerate() {
                        let k = p.occupations()[mode];
                        state.amplitudes[i] *= pows[k as usize];
                    }
                }
            }
        }
    }
    Ok(())
}

/// Parses the structured text circuit format: a `modes <M>` header followed by
/// one record per element: `bs <layer> <a> <b>`, `swap <layer> <a> <b>`,
/// `loss <layer> <mode> <eta>`. Blank lines and `#` comments are ignored.
pub fn parse_circuit(text: &str) -> Result<CircuitLayout, CircuitError> {
    let mut mode_count: Option<usize> = None;
    let mut layers: Vec<Vec<Element>> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: &str| CircuitError::Parse {
            line: ln + 1,
            msg: msg.to_string(),
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "modes" => {
                let m = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err("expected `modes <count>`"))?;
                mode_count = Some(m);
            }
            kind @ ("bs" | "swap" | "loss") => {
                if mode_count.is_none() {
                    return Err(parse_err("`modes` header must come first"));
                }
                let layer: usize = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err("expected layer index"))?;
                let element = match kind {
                    "bs" | "swap" => {
                        let a = toks
                            .get(2)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err("expected mode index"))?;
                        let b = toks
                            .get(3)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err("expected mode index"))?;
                        if kind == "bs" {
                            Element::Beamsplitter { a, b }
                        } else {
                            Element::Swap { a, b }
                        }
                    }
                    _ => {
                        let mode = toks
                            .get(2)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err("expected mode index"))?;
                        let eta = toks
                            .get(3)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err("expected transmissivity"))?;
                        Element::Loss { mode, eta }
                    }
                };
                while layers.len() <= layer {
                    layers.push(Vec::new());
                }
                layers[layer].push(element);
            }
            other => return Err(parse_err(&format!("unknown record kind `{other}`"))),
        }
    }
    let mode_count = mode_count.ok_or(CircuitError::Parse {
        line: 0,
        msg: "missing `modes` header".to_string(),
    })?;
    CircuitLayout::new(mode_count, layers)
}

/// Serializes a layout in the format accepted by [`parse_circuit`].
pub fn format_circuit(layout: &CircuitLayout) -> String {
    let mut out = format!("modes {}\n", layout.mode_count());
    for (li, layer) in layout.layers().iter().enumerate() {
        for el in layer {
            match *el {
                Element::Beamsplitter { a, b } => out.push_str(&format!("bs {li} {a} {b}\n")),
                Element::Swap { a, b } => out.push_str(&format!("swap {li} {a} {b}\n")),
                Element::Loss { mode, eta } => out.push_str(&format!("loss {li} {mode} {eta}\n")),
            }
        }
    }
    out
}

/// Hadamard butterfly over a power-of-two set of dual-rail channels: stage s
/// pairs channels differing in bit s, each pair getting beamsplitters on both
/// rails. Channel c occupies modes (2c, 2c+1).
pub fn hadamard_network_layers(channels: usize) -> Vec<Vec<Element>> {
    assert!(channels.is_power_of_two());
    let stages = channels.trailing_zeros();
    let mut layers = Vec::new();
    for s in 0..stages {
        let bit = 1usize << s;
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
        layers.push(layer);
    }
    layers
}

/// Survival probability via the Gram matrix L†L: the expectation of the
/// second-quantized operator of L†L in the input state. Agrees with
/// [`survival_probability`] but needs only one permanent per input pattern
/// pair instead of a sum over the full output sector.
pub fn survival_probability_gram(
    reduced: &CompiledCircuit,
    input: &FockAmplitudeVector,
) -> Result<f64, CircuitError> {
    debug_assert_eq!(reduced.matrix.kind(), MatrixKind::Subunitary);
    let m = reduced.matrix.dim();
    if input.mode_count() != m {
        return Err(CircuitError::ModeCountMismatch {
            expected: m,
            got: input.mode_count(),
        });
    }
    if input.uniform_photon_count().is_none() {
        return Err(CircuitError::MixedPhotonNumber);
    }
    let l = reduced.matrix.matrix();
    let mut gram = Array2::from_elem((m, m), C64::new(0.0, 0.0));
    for i in 0..m {
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m {
                acc += l[(k, i)].conj() * l[(k, j)];
            }
            gram[(i, j)] = acc;
        }
    }
    let entries: Vec<(&FockPattern, &C64)> = input.entries().collect();
    let mut total = C64::new(0.0, 0.0);
    for (p_out, a_out) in &entries {
        for (p_in, a_in) in &entries {
            let elem = amplitude_raw(&gram.view(), p_in, p_out)?;
            total += a_out.conj() * *a_in * elem;
        }
    }
    debug_assert!(total.im.abs() < 1e-9);
    Ok(total.re.clamp(0.0, 1.0 + fock::TOL))
}
