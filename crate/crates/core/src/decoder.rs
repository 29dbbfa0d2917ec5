//! Exact maximum-likelihood decoding over enumerated codebooks.
//!
//! The decoder scans every codeword and minimizes
//! `sum_n ||Y_n - sqrt(snr/nt) H_n X_n||_F^2`. Candidate metrics accumulate
//! column by column with early abandonment against the current runner-up, so
//! the scan is branch-and-prune but returns results bit-identical to the
//! naive full scan (including the runner-up margin). Candidate columns are
//! scalar pairs looked up from the shared generator tables; the split
//! scheme's repeated sub-blocks are therefore computed once, not per
//! codeword.

use crate::channel::ChannelRealization;
use crate::codes::{Code, CodeError, Scheme};
use crate::CMat;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("received blocks have wrong shape: expected {expected} blocks of {rows}x{cols}")]
    BadReceivedShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Outcome of one ML decode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    /// Codebook index of the metric minimizer (lowest index wins ties).
    pub best_index: usize,
    pub best_metric: f64,
    /// Runner-up metric minus best metric; `inf` for one-codeword books.
    pub metric_margin: f64,
}

/// Exhaustive ML decoder for a built golden code.
pub struct MlDecoder {
    scheme: Scheme,
    half_count: usize,
    // Generator entry tables with the codeword entry scale folded in.
    e11: Vec<Complex64>,
    e22: Vec<Complex64>,
    e12: Vec<Complex64>,
    e21: Vec<Complex64>,
    t11: Vec<Complex64>,
    t22: Vec<Complex64>,
    t12: Vec<Complex64>,
    t21: Vec<Complex64>,
}

/// Per-trial view of the received blocks and the scaled channel.
struct Workspace {
    /// `y[n][r][j]`.
    y: Vec<Vec<[Complex64; 4]>>,
    /// `g[n][r][c] = sqrt(snr/nt) * H_n[r, c]`.
    g: Vec<Vec<[Complex64; 2]>>,
    rx: usize,
}

impl Workspace {
    /// Residual energy of column `j` on sub-channel `n` for X-entries `(a, b)`.
    #[inline]
    fn column(&self, n: usize, j: usize, a: Complex64, b: Complex64) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.rx {
            let resid = self.y[n][r][j] - a * self.g[n][r][0] - b * self.g[n][r][1];
            acc += resid.norm_sqr();
        }
        acc
    }

    /// Candidate-independent energy of the zero-padded columns.
    fn constant_term(&self, cols: &[(usize, usize)]) -> f64 {
        let mut acc = 0.0;
        for &(n, j) in cols {
            for r in 0..self.rx {
                acc += self.y[n][r][j].norm_sqr();
            }
        }
        acc
    }
}

impl MlDecoder {
    /// Errors when the codebook exceeds the enumeration guard (exhaustive ML
    /// is the whole point here; there is no sphere decoder fallback).
    pub fn new(code: &Code) -> Result<Self, DecodeError> {
        code.enumerable()?;
        let s = code.entry_scale();
        let t = code.tables();
        let scale = |v: &[Complex64]| v.iter().map(|z| z * s).collect();
        Ok(Self {
            scheme: code.spec().scheme,
            half_count: code.half_count(),
            e11: scale(&t.e11),
            e22: scale(&t.e22),
            e12: scale(&t.e12),
            e21: scale(&t.e21),
            t11: scale(&t.t11),
            t22: scale(&t.t22),
            t12: scale(&t.t12),
            t21: scale(&t.t21),
        })
    }

    pub fn codebook_size(&self) -> usize {
        let k = self.half_count;
        match self.scheme {
            Scheme::BlockDiagNvd => k * k,
            Scheme::SplitNvd => k * k * k * k,
        }
    }

    /// ML decode of received blocks `y` (N blocks, `nr x N*T`).
    pub fn decode(
        &self,
        y: &[CMat],
        h: &ChannelRealization,
        snr: f64,
    ) -> Result<DecodeResult, DecodeError> {
        self.decode_inner(y, h, snr, true)
    }

    fn workspace(
        &self,
        y: &[CMat],
        h: &ChannelRealization,
        snr: f64,
    ) -> Result<Workspace, DecodeError> {
        let nt = 2usize;
        let rx = h.blocks[0].nrows();
        if y.len() != 2 || y.iter().any(|b| b.nrows() != rx || b.ncols() != 4) {
            return Err(DecodeError::BadReceivedShape {
                expected: 2,
                rows: rx,
                cols: 4,
            });
        }
        let c = (snr / nt as f64).sqrt();
        let ws_y = y
            .iter()
            .map(|block| {
                (0..rx)
                    .map(|r| std::array::from_fn(|j| block[(r, j)]))
                    .collect()
            })
            .collect();
        let ws_g = h
            .blocks
            .iter()
            .map(|block| {
                (0..rx)
                    .map(|r| std::array::from_fn(|col| block[(r, col)] * c))
                    .collect()
            })
            .collect();
        Ok(Workspace {
            y: ws_y,
            g: ws_g,
            rx,
        })
    }

    fn decode_inner(
        &self,
        y: &[CMat],
        h: &ChannelRealization,
        snr: f64,
        prune: bool,
    ) -> Result<DecodeResult, DecodeError> {
        let ws = self.workspace(y, h, snr)?;
        let mut best = f64::INFINITY;
        let mut second = f64::INFINITY;
        let mut best_index = 0usize;
        let k = self.half_count;

        macro_rules! consider {
            ($idx:expr, $metric:expr) => {
                if let Some(m) = $metric {
                    if m < best {
                        second = best;
                        best = m;
                        best_index = $idx;
                    } else if m < second {
                        second = m;
                    }
                }
            };
        }

        match self.scheme {
            Scheme::BlockDiagNvd => {
                let constant = ws.constant_term(&[(0, 2), (0, 3), (1, 0), (1, 1)]);
                let mut idx = 0usize;
                for u in 0..k {
                    for v in 0..k {
                        let limit = if prune { second } else { f64::INFINITY };
                        let metric = (|| {
                            let mut m = constant;
                            m += ws.column(0, 0, self.e11[u], self.e21[v]);
                            if m >= limit {
                                return None;
                            }
                            m += ws.column(0, 1, self.e12[v], self.e22[u]);
                            if m >= limit {
                                return None;
                            }
                            m += ws.column(1, 2, self.t11[u], self.t21[v]);
                            if m >= limit {
                                return None;
                            }
                            m += ws.column(1, 3, self.t12[v], self.t22[u]);
                            if m >= limit {
                                return None;
                            }
                            Some(m)
                        })();
                        consider!(idx, metric);
                        idx += 1;
                    }
                }
            }
            Scheme::SplitNvd => {
                let mut idx = 0usize;
                for u1 in 0..k {
                    for v1 in 0..k {
                        for u2 in 0..k {
                            for v2 in 0..k {
                                let limit = if prune { second } else { f64::INFINITY };
                                let metric = (|| {
                                    let mut m = 0.0;
                                    m += ws.column(0, 0, self.e11[u1], self.e21[v1]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(0, 1, self.e12[v1], self.e22[u1]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(0, 2, self.e11[u2], self.e21[v2]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(0, 3, self.e12[v2], self.e22[u2]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(1, 0, self.t11[u2], self.t21[v2]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(1, 1, self.t12[v2], self.t22[u2]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(1, 2, self.t11[u1], self.t21[v1]);
                                    if m >= limit {
                                        return None;
                                    }
                                    m += ws.column(1, 3, self.t12[v1], self.t22[u1]);
                                    if m >= limit {
                                        return None;
                                    }
                                    Some(m)
                                })();
                                consider!(idx, metric);
                                idx += 1;
                            }
                        }
                    }
                }
            }
        }

        Ok(DecodeResult {
            best_index,
            best_metric: best,
            metric_margin: second - best,
        })
    }
}

/// Naive ML scan over an explicit candidate list (independent reference, and
/// the decoder for non-golden toy codebooks).
pub fn ml_decode_candidates(
    y: &[CMat],
    h: &ChannelRealization,
    snr: f64,
    candidates: &[Vec<CMat>],
) -> DecodeResult {
    let nt = h.blocks[0].ncols();
    let scale = Complex64::new((snr / nt as f64).sqrt(), 0.0);
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    let mut best_index = 0usize;
    for (idx, cand) in candidates.iter().enumerate() {
        let mut metric = 0.0;
        for (n, xn) in cand.iter().enumerate() {
            let resid = &y[n] - h.blocks[n].clone() * xn * scale;
            metric += resid.norm_squared();
        }
        if metric < best {
            second = best;
            best = metric;
            best_index = idx;
        } else if metric < second {
            second = metric;
        }
    }
    DecodeResult {
        best_index,
        best_metric: best,
        metric_margin: second - best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, transmit, transmit_noiseless, ChannelSpec};
    use crate::codes::CodeSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn golden_channel() -> (ChannelSpec, crate::channel::ResolvedCorrelation) {
        let spec = ChannelSpec::block_fading(2, 2, 2);
        let corr = spec.correlation.resolve(2).unwrap();
        (spec, corr)
    }

    #[test]
    fn noiseless_transmission_decodes_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let (spec, corr) = golden_channel();
        for scheme in [Scheme::BlockDiagNvd, Scheme::SplitNvd] {
            let code = Code::build(CodeSpec::golden(scheme, 1).unwrap()).unwrap();
            let dec = MlDecoder::new(&code).unwrap();
            for _ in 0..5 {
                let h = sample_channel(&spec, &corr, &mut rng);
                let idx = rng.random_range(0..code.size());
                let cw = code.codeword_by_index(idx);
                let y = transmit_noiseless(&h, &cw.blocks, 8.0).unwrap();
                let r = dec.decode(&y, &h, 8.0).unwrap();
                assert_eq!(r.best_index, idx);
                assert!(r.metric_margin > 0.0);
            }
        }
    }

    #[test]
    fn near_zero_snr_decodes_uniformly() {
        // Pure-noise limit: the decoder output is essentially a uniform draw,
        // so the error rate approaches 1 - 1/|codebook|.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let (spec, corr) = golden_channel();
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let dec = MlDecoder::new(&code).unwrap();
        let snr = 1e-6;
        let trials = 2000u32;
        let mut errors = 0u32;
        for _ in 0..trials {
            let h = sample_channel(&spec, &corr, &mut rng);
            let idx = rng.random_range(0..code.size());
            let cw = code.codeword_by_index(idx);
            let y = transmit(&h, &cw.blocks, snr, &mut rng).unwrap();
            if dec.decode(&y, &h, snr).unwrap().best_index != idx {
                errors += 1;
            }
        }
        let p = errors as f64 / trials as f64;
        let expect = 1.0 - 1.0 / code.size() as f64;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((p - expect).abs() < 4.0 * sigma, "p = {p}, expected {expect}");
    }

    #[test]
    fn two_codeword_error_rate_matches_q_function() {
        // Scalar BPSK channel: the pairwise error rate is Q(sqrt(2 snr)).
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let one = Complex64::new(1.0, 0.0);
        let candidates = vec![
            vec![CMat::from_element(1, 1, -one)],
            vec![CMat::from_element(1, 1, one)],
        ];
        let h = ChannelRealization {
            blocks: vec![CMat::from_element(1, 1, one)],
            white: CMat::from_element(1, 1, one),
        };
        let snr = 1.0f64;
        let q = |x: f64| 0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2);
        let expect = q((2.0 * snr).sqrt());
        let trials = 4000u32;
        let mut errors = 0u32;
        for _ in 0..trials {
            let idx = rng.random_range(0..2usize);
            let y = transmit(&h, &candidates[idx], snr, &mut rng).unwrap();
            if ml_decode_candidates(&y, &h, snr, &candidates).best_index != idx {
                errors += 1;
            }
        }
        let p = errors as f64 / trials as f64;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((p - expect).abs() < 4.0 * sigma, "p = {p}, expected {expect}");
    }

    #[test]
    fn pruned_scan_equals_naive_scan() {
        let mut rng = ChaCha12Rng::seed_from_u64(101);
        let (spec, corr) = golden_channel();
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let dec = MlDecoder::new(&code).unwrap();
        let all: Vec<Vec<CMat>> = code.codewords().unwrap().map(|c| c.blocks).collect();
        for trial in 0..100 {
            let h = sample_channel(&spec, &corr, &mut rng);
            let idx = rng.random_range(0..code.size());
            let cw = code.codeword_by_index(idx);
            // Mix of noisy SNRs, down to ties-in-noise territory.
            let snr = [0.1, 1.0, 10.0, 100.0][trial % 4];
            let y = transmit(&h, &cw.blocks, snr, &mut rng).unwrap();
            let pruned = dec.decode(&y, &h, snr).unwrap();
            let naive = dec.decode_inner(&y, &h, snr, false).unwrap();
            assert_eq!(pruned, naive);
            let reference = ml_decode_candidates(&y, &h, snr, &all);
            assert_eq!(pruned.best_index, reference.best_index);
            assert!((pruned.best_metric - reference.best_metric).abs() < 1e-9);
            assert!((pruned.metric_margin - reference.metric_margin).abs() < 1e-9);
        }
    }

    #[test]
    fn pruned_scan_equals_naive_scan_split() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let (spec, corr) = golden_channel();
        let code = Code::build(CodeSpec::golden(Scheme::SplitNvd, 1).unwrap()).unwrap();
        let dec = MlDecoder::new(&code).unwrap();
        for _ in 0..10 {
            let h = sample_channel(&spec, &corr, &mut rng);
            let idx = rng.random_range(0..code.size());
            let cw = code.codeword_by_index(idx);
            let y = transmit(&h, &cw.blocks, 4.0, &mut rng).unwrap();
            let pruned = dec.decode(&y, &h, 4.0).unwrap();
            let naive = dec.decode_inner(&y, &h, 4.0, false).unwrap();
            assert_eq!(pruned, naive);
        }
    }

    #[test]
    fn argmin_is_scale_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let (spec, corr) = golden_channel();
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let dec = MlDecoder::new(&code).unwrap();
        for _ in 0..20 {
            let h = sample_channel(&spec, &corr, &mut rng);
            let idx = rng.random_range(0..code.size());
            let cw = code.codeword_by_index(idx);
            let y = transmit(&h, &cw.blocks, 2.0, &mut rng).unwrap();
            let base = dec.decode(&y, &h, 2.0).unwrap();
            let k = 3.7f64;
            let scaled: Vec<CMat> = y.iter().map(|b| b * Complex64::new(k, 0.0)).collect();
            let scaled_res = dec.decode(&scaled, &h, 2.0 * k * k).unwrap();
            assert_eq!(base.best_index, scaled_res.best_index);
        }
    }

    #[test]
    fn bad_shape_is_rejected() {
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let dec = MlDecoder::new(&code).unwrap();
        let h = ChannelRealization {
            blocks: vec![CMat::identity(2, 2), CMat::identity(2, 2)],
            white: CMat::zeros(2, 4),
        };
        let y = vec![CMat::zeros(2, 3), CMat::zeros(2, 4)];
        assert!(matches!(
            dec.decode(&y, &h, 1.0),
            Err(DecodeError::BadReceivedShape { .. })
        ));
    }
}
