//! Correlated selective-fading channel model.
//!
//! A codeword sees `N` parallel MIMO sub-channels `H_n` (each `nr x nt`,
//! constant for the whole transmission) correlated across sub-channels
//! through an `N x N` matrix `R`:
//!
//! ```text
//! [H_0 ... H_{N-1}] = H_w (R^{1/2} (x) I_nt),   H_w ~ iid CN(0,1)
//! ```
//!
//! Block fading is `R = I` (rank `N`); an OFDM-style frequency-selective
//! channel with `L` taps has a circulant `R` of rank `L`. SNR is linear
//! everywhere in this crate; dB conversion happens at the CLI boundary.

use crate::CMat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("correlation matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("correlation matrix must be {expected}x{expected}, got {rows}x{cols}")]
    WrongCorrelationShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("tap count {taps} must be in 1..={subchannels}")]
    BadTapCount { taps: usize, subchannels: usize },
    #[error("shape mismatch between channel ({ch_rows}x{ch_cols}) and codeword block ({cw_rows}x{cw_cols})")]
    ShapeMismatch {
        ch_rows: usize,
        ch_cols: usize,
        cw_rows: usize,
        cw_cols: usize,
    },
}

type Result<T> = std::result::Result<T, ChannelError>;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Numeric-rank threshold relative to the largest eigenvalue.
const RANK_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Correlation models
// ---------------------------------------------------------------------------

/// Sub-channel correlation descriptor.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationModel {
    /// Independent sub-channels (block fading), full rank.
    Identity,
    /// Circulant correlation of an `L`-tap uniform power delay profile:
    /// `R[m,n] = (1/L) sum_l e^{-2 pi i l (m-n)/N}`, rank `L`, unit diagonal.
    CirculantTaps { taps: usize },
    /// Explicit Hermitian PSD matrix, entries as `(re, im)` pairs row-major.
    Explicit { entries: Vec<Vec<(f64, f64)>> },
}

/// Correlation model resolved against `N`: the matrix, its principal square
/// root, numeric rank and smallest nonzero eigenvalue.
#[derive(Debug, Clone)]
pub struct ResolvedCorrelation {
    pub matrix: CMat,
    pub sqrt: Option<CMat>,
    pub rank: usize,
    pub min_nonzero_eigenvalue: f64,
}

impl CorrelationModel {
    pub fn resolve(&self, subchannels: usize) -> Result<ResolvedCorrelation> {
        let n = subchannels;
        match self {
            CorrelationModel::Identity => Ok(ResolvedCorrelation {
                matrix: CMat::identity(n, n),
                sqrt: None,
                rank: n,
                min_nonzero_eigenvalue: 1.0,
            }),
            CorrelationModel::CirculantTaps { taps } => {
                let l = *taps;
                if l == 0 || l > n {
                    return Err(ChannelError::BadTapCount {
                        taps: l,
                        subchannels: n,
                    });
                }
                let m = CMat::from_fn(n, n, |r, c| {
                    let mut acc = Complex64::ZERO;
                    for tap in 0..l {
                        let phase =
                            -2.0 * std::f64::consts::PI * tap as f64 * (r as f64 - c as f64) / n as f64;
                        acc += Complex64::new(phase.cos(), phase.sin());
                    }
                    acc / l as f64
                });
                resolve_explicit(m)
            }
            CorrelationModel::Explicit { entries } => {
                let rows = entries.len();
                let cols = entries.first().map_or(0, Vec::len);
                if rows != n || cols != n {
                    return Err(ChannelError::WrongCorrelationShape {
                        expected: n,
                        rows,
                        cols,
                    });
                }
                let m = CMat::from_fn(n, n, |r, c| {
                    Complex64::new(entries[r][c].0, entries[r][c].1)
                });
                resolve_explicit(m)
            }
        }
    }
}

/// Resolves an explicit Hermitian PSD matrix (principal square root,
/// numeric rank, smallest nonzero eigenvalue).
pub fn resolve_correlation_matrix(m: CMat) -> Result<ResolvedCorrelation> {
    resolve_explicit(m)
}

fn resolve_explicit(m: CMat) -> Result<ResolvedCorrelation> {
    let n = m.nrows();
    // Symmetrize to kill representation noise before the eigensolve.
    let herm = (m.clone() + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = RANK_EPS * max.max(1.0);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| l < -1e-9 * max.max(1.0)) {
        return Err(ChannelError::NotPsd(*bad));
    }
    let mut rank = 0usize;
    let mut min_nonzero = f64::INFINITY;
    let mut sqrt_vals = Vec::with_capacity(n);
    for &l in eig.eigenvalues.iter() {
        if l > floor {
            rank += 1;
            min_nonzero = min_nonzero.min(l);
            sqrt_vals.push(l.sqrt());
        } else {
            sqrt_vals.push(0.0);
        }
    }
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        sqrt_vals.into_iter().map(|v| Complex64::new(v, 0.0)),
    ));
    let sqrt = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    Ok(ResolvedCorrelation {
        matrix: m,
        sqrt: Some(sqrt),
        rank,
        min_nonzero_eigenvalue: min_nonzero,
    })
}

// ---------------------------------------------------------------------------
// Channel spec and realizations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelSpec {
    /// Number of parallel sub-channels N.
    pub subchannels: usize,
    /// Transmit antennas.
    pub tx: usize,
    /// Receive antennas.
    pub rx: usize,
    pub correlation: CorrelationModel,
}

impl ChannelSpec {
    pub fn block_fading(subchannels: usize, tx: usize, rx: usize) -> Self {
        Self {
            subchannels,
            tx,
            rx,
            correlation: CorrelationModel::Identity,
        }
    }
}

/// One draw of the channel: per-sub-channel matrices plus the white matrix
/// that generated them.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `H_n`, each `nr x nt`.
    pub blocks: Vec<CMat>,
    /// `H_w`, shape `nr x (N*nt)`, iid CN(0,1).
    pub white: CMat,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * SQRT_HALF, im * SQRT_HALF)
}

/// Draws `H_w` iid CN(0,1) and applies the Kronecker correlation root.
pub fn sample_channel<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    corr: &ResolvedCorrelation,
    rng: &mut R,
) -> ChannelRealization {
    let (n, nt, nr) = (spec.subchannels, spec.tx, spec.rx);
    let mut white = CMat::zeros(nr, n * nt);
    for r in 0..nr {
        for c in 0..n * nt {
            white[(r, c)] = complex_gaussian(rng);
        }
    }
    let blocks = match &corr.sqrt {
        None => (0..n)
            .map(|k| CMat::from(white.view((0, k * nt), (nr, nt))))
            .collect(),
        Some(root) => {
            // H_n = sum_l H_{w,l} * root[l, n]
            (0..n)
                .map(|k| {
                    let mut block = CMat::zeros(nr, nt);
                    for l in 0..n {
                        let w = root[(l, k)];
                        if w.norm_sqr() > 0.0 {
                            block += white.view((0, l * nt), (nr, nt)) * w;
                        }
                    }
                    block
                })
                .collect()
        }
    };
    ChannelRealization { blocks, white }
}

/// `Y_n = sqrt(snr/nt) H_n X_n + Z_n` with iid CN(0,1) noise.
pub fn transmit<R: Rng + ?Sized>(
    h: &ChannelRealization,
    blocks: &[CMat],
    snr: f64,
    rng: &mut R,
) -> Result<Vec<CMat>> {
    let mut out = transmit_noiseless(h, blocks, snr)?;
    for y in &mut out {
        for e in y.iter_mut() {
            *e += complex_gaussian(rng);
        }
    }
    Ok(out)
}

/// Noiseless variant for decoder tests.
pub fn transmit_noiseless(
    h: &ChannelRealization,
    blocks: &[CMat],
    snr: f64,
) -> Result<Vec<CMat>> {
    let nt = h.blocks[0].ncols();
    let scale = Complex64::new((snr / nt as f64).sqrt(), 0.0);
    h.blocks
        .iter()
        .zip(blocks)
        .map(|(hn, xn)| {
            if hn.ncols() != xn.nrows() {
                return Err(ChannelError::ShapeMismatch {
                    ch_rows: hn.nrows(),
                    ch_cols: hn.ncols(),
                    cw_rows: xn.nrows(),
                    cw_cols: xn.ncols(),
                });
            }
            Ok(hn * xn * scale)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Mutual information and the equivalent channel forms
// ---------------------------------------------------------------------------

/// Ascending eigenvalues of a Hermitian matrix (symmetrized first).
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let herm = (m.clone() + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// `sum_n log2 det(I + (snr/denom) H_n H_n^dag)` in bits.
///
/// `denom_antennas` is `nt` for the standard outage form and `N*nt` for the
/// split-scheme normalization.
pub fn mutual_information(h: &ChannelRealization, snr: f64, denom_antennas: usize) -> f64 {
    let c = snr / denom_antennas as f64;
    h.blocks
        .iter()
        .map(|hn| {
            // Gram on the smaller side; same nonzero spectrum either way.
            if hn.nrows() == 1 || hn.ncols() == 1 {
                (1.0 + c * hn.norm_squared()).log2()
            } else {
                let gram = if hn.nrows() <= hn.ncols() {
                    hn * hn.adjoint()
                } else {
                    hn.adjoint() * hn
                };
                hermitian_eigenvalues(&gram)
                    .iter()
                    .map(|l| (1.0 + c * l.max(0.0)).log2())
                    .sum()
            }
        })
        .sum()
}

/// Standard block circulant with first block-row `[B_0 B_1 ... B_{N-1}]`,
/// each subsequent block-row right-rotated: block `(k, j) = B_{(j-k) mod N}`.
pub fn block_circulant(blocks: &[CMat]) -> CMat {
    let n = blocks.len();
    let (nr, nt) = (blocks[0].nrows(), blocks[0].ncols());
    let mut out = CMat::zeros(n * nr, n * nt);
    for k in 0..n {
        for j in 0..n {
            let src = &blocks[(j + n - k) % n];
            out.view_mut((k * nr, j * nt), (nr, nt)).copy_from(src);
        }
    }
    out
}

/// Block-diagonal DFT form: block `k` is `(1/sqrt N) sum_l B_l e^{-2 pi i l k / N}`.
///
/// Each diagonal block is again CN(0,1) when the inputs are, so this form is
/// distributed like the block-fading channel itself; the circulant satisfies
/// `spectrum(C C^dag) = N * spectrum(D D^dag)`.
pub fn fourier_block_diagonal(blocks: &[CMat]) -> CMat {
    let n = blocks.len();
    let (nr, nt) = (blocks[0].nrows(), blocks[0].ncols());
    let norm = 1.0 / (n as f64).sqrt();
    let mut out = CMat::zeros(n * nr, n * nt);
    for k in 0..n {
        let mut acc: CMat = CMat::zeros(nr, nt);
        for (l, b) in blocks.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (l * k) as f64 / n as f64;
            acc += b * Complex64::new(phase.cos() * norm, phase.sin() * norm);
        }
        out.view_mut((k * nr, k * nt), (nr, nt)).copy_from(&acc);
    }
    out
}

/// The `m x (rho*M)` Jensen channel: the first `rho` white blocks
/// concatenated, conjugate-transposed when `nr > nt`.
pub fn jensen_channel(white_blocks: &[CMat], rho: usize, tx: usize, rx: usize) -> CMat {
    assert!(rho <= white_blocks.len(), "rho exceeds block count");
    let parts: Vec<CMat> = if rx <= tx {
        white_blocks[..rho].to_vec()
    } else {
        white_blocks[..rho].iter().map(CMat::adjoint).collect()
    };
    let rows = parts[0].nrows();
    let cols_each = parts[0].ncols();
    let mut out = CMat::zeros(rows, rho * cols_each);
    for (k, p) in parts.iter().enumerate() {
        out.view_mut((0, k * cols_each), (rows, cols_each)).copy_from(p);
    }
    out
}

/// Splits an `nr x (N*nt)` white matrix into its `N` blocks.
pub fn white_blocks(white: &CMat, subchannels: usize) -> Vec<CMat> {
    let nt = white.ncols() / subchannels;
    (0..subchannels)
        .map(|k| CMat::from(white.view((0, k * nt), (white.nrows(), nt))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn hermitian_eigenvalues_known_2x2() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let e = hermitian_eigenvalues(&m);
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_blocks_are_independent() {
        let spec = ChannelSpec::block_fading(2, 1, 1);
        let corr = spec.correlation.resolve(2).unwrap();
        let mut r = rng(11);
        let n = 100_000;
        let mut cross = Complex64::ZERO;
        for _ in 0..n {
            let h = sample_channel(&spec, &corr, &mut r);
            cross += h.blocks[0][(0, 0)] * h.blocks[1][(0, 0)].conj();
        }
        let mean = cross / n as f64;
        // Each summand has unit variance, so the mean is ~CN(0, 1/n).
        assert!(mean.norm() < 3.0 / (n as f64).sqrt() * 1.5, "cross {mean}");
    }

    #[test]
    fn single_tap_makes_all_blocks_equal() {
        let spec = ChannelSpec {
            subchannels: 4,
            tx: 2,
            rx: 2,
            correlation: CorrelationModel::CirculantTaps { taps: 1 },
        };
        let corr = spec.correlation.resolve(4).unwrap();
        assert_eq!(corr.rank, 1);
        let mut r = rng(5);
        let h = sample_channel(&spec, &corr, &mut r);
        for k in 1..4 {
            let diff = (h.blocks[k].clone() - h.blocks[0].clone()).norm();
            assert!(diff < 1e-9, "block {k} differs by {diff}");
        }
    }

    #[test]
    fn circulant_taps_rank_and_unit_diagonal() {
        let corr = CorrelationModel::CirculantTaps { taps: 2 }
            .resolve(4)
            .unwrap();
        assert_eq!(corr.rank, 2);
        for k in 0..4 {
            assert_relative_eq!(corr.matrix[(k, k)].re, 1.0, epsilon = 1e-12);
        }
        assert!(matches!(
            CorrelationModel::CirculantTaps { taps: 5 }.resolve(4),
            Err(ChannelError::BadTapCount { .. })
        ));
    }

    #[test]
    fn per_entry_variance_is_unit() {
        let spec = ChannelSpec {
            subchannels: 2,
            tx: 2,
            rx: 2,
            correlation: CorrelationModel::CirculantTaps { taps: 2 },
        };
        let corr = spec.correlation.resolve(2).unwrap();
        let mut r = rng(7);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let h = sample_channel(&spec, &corr, &mut r);
            acc += h.blocks[0][(1, 0)].norm_sqr();
        }
        let mean = acc / n as f64;
        // |h|^2 for CN(0,1) has variance 1.
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt() * 1.5, "mean {mean}");
    }

    #[test]
    fn explicit_correlation_is_reproduced() {
        let entries = vec![
            vec![(1.0, 0.0), (0.7, 0.0)],
            vec![(0.7, 0.0), (1.0, 0.0)],
        ];
        let spec = ChannelSpec {
            subchannels: 2,
            tx: 1,
            rx: 1,
            correlation: CorrelationModel::Explicit { entries },
        };
        let corr = spec.correlation.resolve(2).unwrap();
        assert_eq!(corr.rank, 2);
        let mut r = rng(13);
        let n = 50_000;
        let mut cross = Complex64::ZERO;
        for _ in 0..n {
            let h = sample_channel(&spec, &corr, &mut r);
            cross += h.blocks[0][(0, 0)] * h.blocks[1][(0, 0)].conj();
        }
        let mean = cross / n as f64;
        assert!((mean.re - 0.7).abs() < 0.02, "measured correlation {mean}");
        assert!(mean.im.abs() < 0.02);
    }

    #[test]
    fn non_psd_explicit_rejected() {
        let entries = vec![
            vec![(1.0, 0.0), (2.0, 0.0)],
            vec![(2.0, 0.0), (1.0, 0.0)],
        ];
        let model = CorrelationModel::Explicit { entries };
        assert!(matches!(model.resolve(2), Err(ChannelError::NotPsd(_))));
    }

    #[test]
    fn transmit_trivial_cases() {
        let h = ChannelRealization {
            blocks: vec![CMat::identity(2, 2), CMat::identity(2, 2)],
            white: CMat::zeros(2, 4),
        };
        let zero = vec![CMat::zeros(2, 4), CMat::zeros(2, 4)];
        let y = transmit_noiseless(&h, &zero, 100.0).unwrap();
        assert_relative_eq!(y[0].norm(), 0.0);

        // snr = nt cancels the scale.
        let x = vec![CMat::from_element(2, 4, Complex64::new(0.5, -0.25)); 2];
        let y = transmit_noiseless(&h, &x, 2.0).unwrap();
        assert_relative_eq!((y[0].clone() - x[0].clone()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_only_variance_is_unit() {
        let h = ChannelRealization {
            blocks: vec![CMat::zeros(2, 2); 2],
            white: CMat::zeros(2, 4),
        };
        let zero = vec![CMat::zeros(2, 4), CMat::zeros(2, 4)];
        let mut r = rng(3);
        let mut acc = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let y = transmit(&h, &zero, 10.0, &mut r).unwrap();
            acc += y[0][(0, 0)].norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt() * 1.5, "mean {mean}");
    }

    #[test]
    fn transmit_shape_mismatch_rejected() {
        let h = ChannelRealization {
            blocks: vec![CMat::identity(2, 2)],
            white: CMat::zeros(2, 2),
        };
        let bad = vec![CMat::zeros(3, 4)];
        assert!(matches!(
            transmit_noiseless(&h, &bad, 1.0),
            Err(ChannelError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn mutual_information_scalar_cases() {
        let h = ChannelRealization {
            blocks: vec![CMat::from_element(1, 1, Complex64::new(1.0, 0.0))],
            white: CMat::zeros(1, 1),
        };
        assert_relative_eq!(mutual_information(&h, 1.0, 1), 1.0, epsilon = 1e-12);

        let zero = ChannelRealization {
            blocks: vec![CMat::zeros(2, 2); 2],
            white: CMat::zeros(2, 4),
        };
        assert_relative_eq!(mutual_information(&zero, 100.0, 2), 0.0);
    }

    #[test]
    fn mutual_information_matches_block_diagonal_form() {
        let spec = ChannelSpec::block_fading(2, 2, 2);
        let corr = spec.correlation.resolve(2).unwrap();
        let mut r = rng(29);
        for _ in 0..20 {
            let h = sample_channel(&spec, &corr, &mut r);
            let per_block = mutual_information(&h, 7.3, 2);
            // Independent route: eigenvalues of the full 4x4 diag{H_n}.
            let mut big = CMat::zeros(4, 4);
            big.view_mut((0, 0), (2, 2)).copy_from(&h.blocks[0]);
            big.view_mut((2, 2), (2, 2)).copy_from(&h.blocks[1]);
            let gram = &big * big.adjoint();
            let direct: f64 = hermitian_eigenvalues(&gram)
                .iter()
                .map(|l| (1.0 + 7.3 / 2.0 * l.max(0.0)).log2())
                .sum();
            assert_relative_eq!(per_block, direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn circulant_structure() {
        let a = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let b = CMat::from_element(1, 1, Complex64::new(2.0, 0.0));
        let c1 = block_circulant(&[a.clone()]);
        assert_eq!(c1.nrows(), 1);
        assert_relative_eq!(c1[(0, 0)].re, 1.0);

        let c2 = block_circulant(&[a, b]);
        // [[A, B], [B, A]]
        assert_relative_eq!(c2[(0, 0)].re, 1.0);
        assert_relative_eq!(c2[(0, 1)].re, 2.0);
        assert_relative_eq!(c2[(1, 0)].re, 2.0);
        assert_relative_eq!(c2[(1, 1)].re, 1.0);
    }

    #[test]
    fn circulant_and_fourier_spectra_agree_up_to_n() {
        let spec = ChannelSpec::block_fading(3, 2, 2);
        let corr = spec.correlation.resolve(3).unwrap();
        let mut r = rng(17);
        for _ in 0..50 {
            let h = sample_channel(&spec, &corr, &mut r);
            let blocks = white_blocks(&h.white, 3);
            let c = block_circulant(&blocks);
            let d = fourier_block_diagonal(&blocks);
            let ce = hermitian_eigenvalues(&(&c * c.adjoint()));
            let de = hermitian_eigenvalues(&(&d * d.adjoint()));
            let max = ce.last().copied().unwrap_or(1.0).max(1.0);
            for (ci, di) in ce.iter().zip(&de) {
                assert!(
                    (ci - 3.0 * di).abs() <= 1e-9 * max,
                    "spectrum mismatch: {ci} vs 3*{di}"
                );
            }
        }
    }

    #[test]
    fn fourier_block_diagonal_trivia() {
        let a = CMat::from_element(2, 2, Complex64::new(1.5, -0.5));
        let d = fourier_block_diagonal(&[a.clone()]);
        assert_relative_eq!((d - a).norm(), 0.0, epsilon = 1e-12);

        let z = fourier_block_diagonal(&[CMat::zeros(2, 2), CMat::zeros(2, 2)]);
        assert_relative_eq!(z.norm(), 0.0);
    }

    #[test]
    fn fourier_preserves_average_energy() {
        let spec = ChannelSpec::block_fading(2, 2, 2);
        let corr = spec.correlation.resolve(2).unwrap();
        let mut r = rng(23);
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let h = sample_channel(&spec, &corr, &mut r);
            let d = fourier_block_diagonal(&white_blocks(&h.white, 2));
            acc += d.norm_squared();
        }
        let mean = acc / n as f64;
        // E||D||^2 = N*nt*nr = 8; ||D||^2 is a sum of 8 unit-variance |CN|^2.
        assert!((mean - 8.0).abs() < 3.0 * (8.0f64).sqrt() / (n as f64).sqrt() * 1.5);
    }

    #[test]
    fn jensen_channel_shapes() {
        let blocks: Vec<CMat> = (0..3)
            .map(|k| CMat::from_element(2, 2, Complex64::new(k as f64, 1.0)))
            .collect();
        // nr <= nt: horizontal concatenation of the first rho blocks.
        let j = jensen_channel(&blocks, 2, 2, 2);
        assert_eq!((j.nrows(), j.ncols()), (2, 4));
        assert_relative_eq!(j[(0, 0)].re, 0.0);
        assert_relative_eq!(j[(0, 2)].re, 1.0);

        // nr > nt: conjugate-transposed blocks.
        let tall: Vec<CMat> = (0..2)
            .map(|k| CMat::from_element(3, 2, Complex64::new(1.0, k as f64)))
            .collect();
        let j = jensen_channel(&tall, 2, 2, 3);
        assert_eq!((j.nrows(), j.ncols()), (2, 6));
        assert_relative_eq!(j[(0, 0)].im, 0.0);
        assert_relative_eq!(j[(0, 3)].im, -1.0);

        let single = jensen_channel(&blocks, 1, 2, 2);
        assert_eq!((single.nrows(), single.ncols()), (2, 2));
    }
}
