//! Exact Fock-space linear algebra: occupation patterns, matrix permanents,
//! multi-photon transition amplitudes and full-sector state evolution for
//! (sub)unitary transfer matrices.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix too large for permanent: n = {0}")]
    TooLarge(usize),
    #[error("photon count mismatch: input has {input}, output has {output}")]
    PhotonCountMismatch { input: usize, output: usize },
    #[error("mode count mismatch: expected {expected}, got {got}")]
    ModeCountMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not subunitary (largest singular value {0})")]
    NotSubunitary(f64),
    #[error("mode count must be at least 1")]
    EmptyModes,
}

/// Occupation-number list over a fixed set of optical modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockPattern(Vec<u32>);

impl FockPattern {
    pub fn new(occupations: Vec<u32>) -> Self {
        FockPattern(occupations)
    }

    pub fn vacuum(mode_count: usize) -> Self {
        FockPattern(vec![0; mode_count])
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn total_photons(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Concatenates two patterns over disjoint mode sets.
    pub fn tensor(&self, other: &FockPattern) -> FockPattern {
        let mut occ = self.0.clone();
        occ.extend_from_slice(&other.0);
        FockPattern(occ)
    }

    /// Pattern padded with `extra` trailing empty modes.
    pub fn padded(&self, extra: usize) -> FockPattern {
        let mut occ = self.0.clone();
        occ.extend(std::iter::repeat(0).take(extra));
        FockPattern(occ)
    }

    /// Product of factorials of the occupations, as f64.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

impl fmt::Display for FockPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Binomial coefficient as u64; saturates are not expected at the scales used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Matrix permanent via Ryser's inclusion-exclusion with Gray-code updates,
/// O(2^n * n).
pub fn permanent(a: ArrayView2<C64>) -> Result<C64, FockError> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows != cols {
        return Err(FockError::NotSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if n > 30 {
        return Err(FockError::TooLarge(n));
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1..(1u64 << n) {
        let next = k ^ (k >> 1);
        let flipped = (next ^ gray).trailing_zeros() as usize;
        if next & (1 << flipped) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, flipped)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, flipped)];
            }
        }
        gray = next;
        let prod: C64 = row_sums.iter().product();
        // sign (-1)^(n - |S|)
        if (n as u32 - next.count_ones()) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Naive O(n!) permutation-sum permanent, retained as an independent oracle
/// for small matrices.
pub fn permanent_naive(a: ArrayView2<C64>) -> Result<C64, FockError> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows != cols {
        return Err(FockError::NotSquare { rows, cols });
    }
    let n = rows;
    if n > 10 {
        return Err(FockError::TooLarge(n));
    }
    fn rec(a: &ArrayView2<C64>, row: usize, used: u32, n: usize) -> C64 {
        if row == n {
            return C64::new(1.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..n {
            if used & (1 << col) == 0 {
                acc += a[(row, col)] * rec(a, row + 1, used | (1 << col), n);
            }
        }
        acc
    }
    Ok(rec(&a, 0, 0, n))
}

/// M x M transfer matrix acting on mode creation operators, flagged by whether
/// it is exactly unitary or merely norm-non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Unitary,
    Subunitary,
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    matrix: Array2<C64>,
    kind: MatrixKind,
}

impl TransferMatrix {
    pub fn unitary(matrix: Array2<C64>) -> Result<Self, FockError> {
        let dev = unitarity_deviation(&matrix.view());
        if dev > TOL {
            return Err(FockError::NotUnitary(dev));
        }
        Ok(TransferMatrix {
            matrix,
            kind: MatrixKind::Unitary,
        })
    }

    pub fn subunitary(matrix: Array2<C64>) -> Result<Self, FockError> {
        let s = largest_singular_value(&matrix.view());
        if s > 1.0 + TOL {
            return Err(FockError::NotSubunitary(s));
        }
        Ok(TransferMatrix {
            matrix,
            kind: MatrixKind::Subunitary,
        })
    }

    pub fn identity(dim: usize) -> Self {
        TransferMatrix {
            matrix: Array2::eye(dim).mapv(|x| C64::new(x, 0.0)),
            kind: MatrixKind::Unitary,
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Max elementwise deviation of U†U from the identity.
pub fn unitarity_deviation(m: &ArrayView2<C64>) -> f64 {
    let n = m.ncols();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m.nrows() {
                acc += m[(k, i)].conj() * m[(k, j)];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((acc - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Largest singular value via power iteration on A†A.
pub fn largest_singular_value(m: &ArrayView2<C64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    // deterministic, mildly irregular start vector
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64) * 0.137, 0.3 * ((i * i % 7) as f64)))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        // w = A v, u = A† w
        let mut w = vec![C64::new(0.0, 0.0); m.nrows()];
        for (r, wr) in w.iter_mut().enumerate() {
            for c in 0..n {
                *wr += m[(r, c)] * v[c];
            }
        }
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (c, uc) in u.iter_mut().enumerate() {
            for r in 0..m.nrows() {
                *uc += m[(r, c)].conj() * w[r];
            }
        }
        let norm: f64 = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for (uc, vc) in u.iter().zip(v.iter_mut()) {
            *vc = uc / norm;
        }
    }
    lambda.sqrt()
}

/// Sparse superposition of Fock patterns with complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockAmplitudeVector {
    mode_count: usize,
    entries: BTreeMap<FockPattern, C64>,
}

impl FockAmplitudeVector {
    pub fn new(mode_count: usize) -> Self {
        FockAmplitudeVector {
            mode_count,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_pattern(pattern: FockPattern) -> Self {
        let mut v = FockAmplitudeVector::new(pattern.mode_count());
        v.entries.insert(pattern, C64::new(1.0, 0.0));
        v
    }

    pub fn from_entries(
        mode_count: usize,
        entries: impl IntoIterator<Item = (FockPattern, C64)>,
    ) -> Result<Self, FockError> {
        let mut v = FockAmplitudeVector::new(mode_count);
        for (p, a) in entries {
            v.add(p, a)?;
        }
        Ok(v)
    }

    pub fn add(&mut self, pattern: FockPattern, amplitude: C64) -> Result<(), FockError> {
        if pattern.mode_count() != self.mode_count {
            return Err(FockError::ModeCountMismatch {
                expected: self.mode_count,
                got: pattern.mode_count(),
            });
        }
        *self.entries.entry(pattern).or_insert(C64::new(0.0, 0.0)) += amplitude;
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FockPattern, &C64)> {
        self.entries.iter()
    }

    pub fn amplitude_of(&self, pattern: &FockPattern) -> C64 {
        self.entries
            .get(pattern)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in self.entries.values_mut() {
                *a /= n;
            }
        }
        self
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        for a in self.entries.values_mut() {
            *a *= factor;
        }
        self
    }

    /// Tensor product over disjoint mode sets; `other` occupies the trailing modes.
    pub fn tensor(&self, other: &FockAmplitudeVector) -> FockAmplitudeVector {
        let mut out = FockAmplitudeVector::new(self.mode_count + other.mode_count);
        for (p1, a1) in &self.entries {
            for (p2, a2) in &other.entries {
                out.entries.insert(p1.tensor(p2), a1 * a2);
            }
        }
        out
    }

    /// Drops entries with |amplitude| below `eps`.
    pub fn pruned(mut self, eps: f64) -> Self {
        self.entries.retain(|_, a| a.norm() > eps);
        self
    }

    /// Total photon number if all entries share it.
    pub fn uniform_photon_count(&self) -> Option<u32> {
        let mut it = self.entries.keys();
        let first = it.next()?.total_photons();
        if it.all(|p| p.total_photons() == first) {
            Some(first)
        } else {
            None
        }
    }
}

/// All weak compositions of `photon_count` over `mode_count` modes, in
/// ascending lexicographic order of the occupation lists.
pub fn enumerate_patterns(
    mode_count: usize,
    photon_count: u32,
) -> Result<Vec<FockPattern>, FockError> {
    if mode_count == 0 {
        return Err(FockError::EmptyModes);
    }
    let count = binomial(
        photon_count as u64 + mode_count as u64 - 1,
        mode_count as u64 - 1,
    ) as usize;
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0u32; mode_count];
    current[mode_count - 1] = photon_count;
    loop {
        out.push(FockPattern(current.clone()));
        // next composition in lexicographic order: increment the rightmost
        // position that has photons anywhere to its right
        let mut i = mode_count - 1;
        let mut found = false;
        while i > 0 {
            i -= 1;
            let right_sum: u32 = current[i + 1..].iter().sum();
            if right_sum > 0 {
                current[i] += 1;
                let rest = right_sum - 1;
                for x in &mut current[i + 1..] {
                    *x = 0;
                }
                current[mode_count - 1] = rest;
                found = true;
                break;
            }
        }
        if !found {
            break;
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// Rank of `pattern` within the lexicographic enumeration of its sector.
pub fn pattern_rank(pattern: &FockPattern) -> usize {
    let m = pattern.mode_count();
    let mut remaining = pattern.total_photons() as u64;
    let mut rank: u64 = 0;
    for (i, &n) in pattern.occupations().iter().enumerate() {
        let modes_right = (m - i - 1) as u64;
        if modes_right == 0 {
            break;
        }
        // patterns with a smaller value at position i, all photons still to place
        for v in 0..n as u64 {
            rank += binomial(remaining - v + modes_right - 1, modes_right - 1);
        }
        remaining -= n as u64;
    }
    rank as usize
}

/// Submatrix of `transfer` with column k repeated input[k] times and row j
/// repeated output[j] times; its permanent gives the transition amplitude.
pub fn build_submatrix(
    transfer: &TransferMatrix,
    input: &FockPattern,
    output: &FockPattern,
) -> Result<Array2<C64>, FockError> {
    build_submatrix_raw(&transfer.matrix.view(), input, output)
}

pub fn build_submatrix_raw(
    matrix: &ArrayView2<C64>,
    input: &FockPattern,
    output: &FockPattern,
) -> Result<Array2<C64>, FockError> {
    let m = matrix.nrows();
    if input.mode_count() != m || output.mode_count() != m {
        return Err(FockError::ModeCountMismatch {
            expected: m,
            got: input.mode_count().max(output.mode_count()),
        });
    }
    let n_in = input.total_photons() as usize;
    let n_out = output.total_photons() as usize;
    if n_in != n_out {
        return Err(FockError::PhotonCountMismatch {
            input: n_in,
            output: n_out,
        });
    }
    let mut cols = Vec::with_capacity(n_in);
    for (k, &n) in input.occupations().iter().enumerate() {
        for _ in 0..n {
            cols.push(k);
        }
    }
    let mut rows = Vec::with_capacity(n_out);
    for (j, &n) in output.occupations().iter().enumerate() {
        for _ in 0..n {
            rows.push(j);
        }
    }
    let mut sub = Array2::from_elem((n_out, n_in), C64::new(0.0, 0.0));
    for (r, &j) in rows.iter().enumerate() {
        for (c, &k) in cols.iter().enumerate() {
            sub[(r, c)] = matrix[(j, k)];
        }
    }
    Ok(sub)
}

/// Transition amplitude <output| U |input> = perm(U_sub) / sqrt(n!...m!...).
pub fn amplitude(
    transfer: &TransferMatrix,
    input: &FockPattern,
    output: &FockPattern,
) -> Result<C64, FockError> {
    amplitude_raw(&transfer.matrix.view(), input, output)
}

pub fn amplitude_raw(
    matrix: &ArrayView2<C64>,
    input: &FockPattern,
    output: &FockPattern,
) -> Result<C64, FockError> {
    let sub = build_submatrix_raw(matrix, input, output)?;
    let perm = permanent(sub.view())?;
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(perm / norm)
}

/// Evolves a state through a transfer matrix by evaluating the permanent
/// amplitude onto every pattern of each photon-number sector.
pub fn evolve_state(
    transfer: &TransferMatrix,
    input: &FockAmplitudeVector,
) -> Result<FockAmplitudeVector, FockError> {
    let m = transfer.dim();
    if input.mode_count() != m {
        return Err(FockError::ModeCountMismatch {
            expected: m,
            got: input.mode_count(),
        });
    }
    let mut out = FockAmplitudeVector::new(m);
    let mut sectors: BTreeMap<u32, Vec<(&FockPattern, C64)>> = BTreeMap::new();
    for (p, a) in input.entries() {
        sectors.entry(p.total_photons()).or_default().push((p, *a));
    }
    for (n, inputs) in sectors {
        for target in enumerate_patterns(m, n)? {
            let mut acc = C64::new(0.0, 0.0);
            for (p, a) in &inputs {
                acc += a * amplitude_raw(&transfer.matrix.view(), p, &target)?;
            }
            if acc.norm() > 0.0 {
                out.add(target, acc)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn hadamard() -> Array2<C64> {
        let s = 1.0 / 2.0_f64.sqrt();
        array![[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]
    }

    #[test]
    fn permanent_1x1_is_entry() {
        let a = array![[c(7.0, 0.0)]];
        assert_abs_diff_eq!(permanent(a.view()).unwrap().re, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn permanent_0x0_is_one() {
        let a = Array2::<C64>::zeros((0, 0));
        assert_abs_diff_eq!(permanent(a.view()).unwrap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn permanent_hadamard_hom_cancellation() {
        let p = permanent(hadamard().view()).unwrap();
        assert!(p.norm() < 1e-14);
    }

    #[test]
    fn permanent_all_ones_is_factorial() {
        for n in 1..=7usize {
            let a = Array2::from_elem((n, n), c(1.0, 0.0));
            let p = permanent(a.view()).unwrap();
            assert_abs_diff_eq!(p.re, factorial(n as u32), epsilon = 1e-6);
        }
    }

    #[test]
    fn permanent_rejects_non_square() {
        let a = Array2::<C64>::zeros((2, 3));
        assert!(matches!(
            permanent(a.view()),
            Err(FockError::NotSquare { .. })
        ));
    }

    #[test]
    fn ryser_matches_naive_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..120 {
            let n = rng.gen_range(1..=6);
            let a = Array2::from_shape_fn((n, n), |_| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let fast = permanent(a.view()).unwrap();
            let slow = permanent_naive(a.view()).unwrap();
            let scale = slow.norm().max(1.0);
            assert!((fast - slow).norm() / scale < 1e-10, "n={n}");
        }
    }

    #[test]
    fn random_5x5_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Array2::from_shape_fn((5, 5), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let fast = permanent(a.view()).unwrap();
        let slow = permanent_naive(a.view()).unwrap();
        assert!((fast - slow).norm() < 1e-12);
    }

    #[test]
    fn enumerate_small_sectors() {
        let p = enumerate_patterns(2, 1).unwrap();
        assert_eq!(
            p,
            vec![
                FockPattern::new(vec![0, 1]),
                FockPattern::new(vec![1, 0])
            ]
        );
        assert_eq!(enumerate_patterns(2, 2).unwrap().len(), 3);
    }

    #[test]
    fn enumerate_16_8_count() {
        // C(23, 8) computed combinatorially
        assert_eq!(binomial(23, 8), 490314);
        let pats = enumerate_patterns(16, 8).unwrap();
        assert_eq!(pats.len(), 490314);
        // spot-check ordering and ranks
        for (i, w) in pats.windows(2).enumerate() {
            if i % 10007 == 0 {
                assert!(w[0] < w[1]);
            }
        }
        assert_eq!(pattern_rank(&pats[0]), 0);
        assert_eq!(pattern_rank(&pats[123456]), 123456);
        assert_eq!(pattern_rank(&pats[490313]), 490313);
    }

    #[test]
    fn rank_is_inverse_of_enumeration() {
        for (m, n) in [(3, 4), (5, 3), (4, 0), (1, 5)] {
            for (i, p) in enumerate_patterns(m, n).unwrap().iter().enumerate() {
                assert_eq!(pattern_rank(p), i);
            }
        }
    }

    #[test]
    fn submatrix_identity() {
        let u = TransferMatrix::identity(2);
        let p = FockPattern::new(vec![1, 1]);
        let sub = build_submatrix(&u, &p, &p).unwrap();
        assert_abs_diff_eq!(sub[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sub[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sub[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn submatrix_column_repetition() {
        let u = TransferMatrix::unitary(hadamard()).unwrap();
        let sub = build_submatrix(
            &u,
            &FockPattern::new(vec![2, 0]),
            &FockPattern::new(vec![1, 1]),
        )
        .unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        for r in 0..2 {
            for cidx in 0..2 {
                assert_abs_diff_eq!(sub[(r, cidx)].re, s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn submatrix_rejects_photon_mismatch() {
        let u = TransferMatrix::identity(2);
        let err = build_submatrix(
            &u,
            &FockPattern::new(vec![1, 0]),
            &FockPattern::new(vec![1, 1]),
        );
        assert!(matches!(err, Err(FockError::PhotonCountMismatch { .. })));
    }

    #[test]
    fn amplitude_hom_dip_and_bunching() {
        let u = TransferMatrix::unitary(hadamard()).unwrap();
        let one_one = FockPattern::new(vec![1, 1]);
        let two_zero = FockPattern::new(vec![2, 0]);
        let a_dip = amplitude(&u, &one_one, &one_one).unwrap();
        assert!(a_dip.norm() < 1e-12);
        let a_bunch = amplitude(&u, &one_one, &two_zero).unwrap();
        assert_abs_diff_eq!(a_bunch.norm(), 1.0 / 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn amplitude_identity_diagonal() {
        let u = TransferMatrix::identity(4);
        for p in enumerate_patterns(4, 3).unwrap() {
            let a = amplitude(&u, &p, &p).unwrap();
            assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolve_identity_returns_input() {
        let u = TransferMatrix::identity(3);
        let input = FockAmplitudeVector::from_entries(
            3,
            [
                (FockPattern::new(vec![1, 1, 0]), c(0.6, 0.0)),
                (FockPattern::new(vec![0, 2, 0]), c(0.0, 0.8)),
            ],
        )
        .unwrap();
        let out = evolve_state(&u, &input).unwrap().pruned(1e-12);
        assert_eq!(out, input);
    }

    #[test]
    fn evolve_beamsplitter_hom() {
        let u = TransferMatrix::unitary(hadamard()).unwrap();
        let input = FockAmplitudeVector::from_pattern(FockPattern::new(vec![1, 1]));
        let out = evolve_state(&u, &input).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!(out.amplitude_of(&FockPattern::new(vec![1, 1])).norm() < 1e-12);
        assert_abs_diff_eq!(
            out.amplitude_of(&FockPattern::new(vec![2, 0])).norm(),
            s,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            out.amplitude_of(&FockPattern::new(vec![0, 2])).norm(),
            s,
            epsilon = 1e-12
        );
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
        // Gram-Schmidt on a random complex matrix
        let mut cols: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in 0..i {
                let dot: C64 = (0..n).map(|k| cols[j][k].conj() * cols[i][k]).sum();
                for k in 0..n {
                    let sub = dot * cols[j][k];
                    cols[i][k] -= sub;
                }
            }
            let norm: f64 = cols[i].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for k in 0..n {
                cols[i][k] /= norm;
            }
        }
        Array2::from_shape_fn((n, n), |(r, cidx)| cols[cidx][r])
    }

    #[test]
    fn unitary_amplitudes_preserve_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(m, n) in &[(2usize, 2u32), (3, 3), (4, 2), (6, 4)] {
            let u = TransferMatrix::unitary(random_unitary(&mut rng, m)).unwrap();
            for input in enumerate_patterns(m, n).unwrap().iter().take(5) {
                let total: f64 = enumerate_patterns(m, n)
                    .unwrap()
                    .iter()
                    .map(|out| amplitude(&u, input, out).unwrap().norm_sqr())
                    .sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn evolution_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = 3;
        let u1 = random_unitary(&mut rng, m);
        let u2 = random_unitary(&mut rng, m);
        let u21 = u2.dot(&u1);
        let t1 = TransferMatrix::unitary(u1).unwrap();
        let t2 = TransferMatrix::unitary(u2).unwrap();
        let t21 = TransferMatrix::unitary(u21).unwrap();
        let input = FockAmplitudeVector::from_entries(
            m,
            [
                (FockPattern::new(vec![2, 0, 1]), c(0.5, 0.1)),
                (FockPattern::new(vec![1, 1, 1]), c(-0.3, 0.7)),
            ],
        )
        .unwrap()
        .normalized();
        let step = evolve_state(&t2, &evolve_state(&t1, &input).unwrap()).unwrap();
        let direct = evolve_state(&t21, &input).unwrap();
        for (p, a) in direct.entries() {
            assert!((step.amplitude_of(p) - a).norm() < 1e-9);
        }
    }

    #[test]
    fn amplitude_symmetric_under_mode_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = 4;
        let u = random_unitary(&mut rng, m);
        let perm = [2usize, 0, 3, 1];
        let permuted = Array2::from_shape_fn((m, m), |(r, cidx)| u[(perm[r], perm[cidx])]);
        let tu = TransferMatrix::unitary(u).unwrap();
        let tp = TransferMatrix::unitary(permuted).unwrap();
        let input = FockPattern::new(vec![1, 2, 0, 1]);
        let output = FockPattern::new(vec![0, 1, 2, 1]);
        let permute = |p: &FockPattern| {
            FockPattern::new(perm.iter().map(|&i| p.occupations()[i]).collect())
        };
        let a1 = amplitude(&tu, &input, &output).unwrap();
        let a2 = amplitude(&tp, &permute(&input), &permute(&output)).unwrap();
        assert!((a1 - a2).norm() < 1e-10);
    }

    #[test]
    fn subunitary_validation() {
        let ok = Array2::from_shape_fn((2, 2), |(r, cidx)| {
            if r == cidx {
                c(0.9, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(TransferMatrix::subunitary(ok).is_ok());
        let bad = Array2::from_shape_fn((2, 2), |(r, cidx)| {
            if r == cidx {
                c(1.2, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(matches!(
            TransferMatrix::subunitary(bad),
            Err(FockError::NotSubunitary(_))
        ));
    }
}
