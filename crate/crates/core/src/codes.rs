//! Constellations and codeword construction for the two transmission schemes.
//!
//! Both schemes are built from the same 2x2 generator matrix over
//! `Z[i][zeta8, theta]`: entry-wise linear combinations of eight symbols
//! through the golden-ratio basis, with `alpha = 1 + i - i*theta` shaping the
//! rows and a `zeta8` multiplier on the lower-left entry. The block-diagonal
//! scheme sends the generator on sub-channel 0 and its zeta-conjugate on
//! sub-channel 1; the split scheme spreads two independent generators across
//! both sub-channels with a `1/sqrt(2)` assembly factor.
//!
//! Power normalization is empirical: the uniform-codebook average of the
//! total Frobenius energy is driven to exactly `T_total * N` by a scalar
//! computed from the enumerated codebook, rather than trusting the
//! asymptotic constellation-size rule.

use crate::algebra::{AlgebraError, GaussianInt, RingElement, RingMatrix};
use crate::CMat;
use num_complex::Complex64;
use thiserror::Error;

/// Hard ceiling on exhaustively enumerable codebooks.
pub const ENUMERATION_GUARD: u128 = 1 << 24;

/// Structural entry scale of the generator matrix (1/sqrt 5).
pub const GENERATOR_SCALE: f64 = 0.4472135954999579;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("unsupported constellation: {0} bits per symbol (use 1, 2, 4 or 6)")]
    UnsupportedConstellation(u32),
    #[error("exact code construction requires N = 2 sub-channels, 2 tx antennas, 2 slots (got N={n}, nt={nt}, T={t})")]
    UnsupportedDimensions { n: usize, nt: usize, t: usize },
    #[error("wrong symbol count: expected {expected}, got {got}")]
    WrongSymbolCount { expected: usize, got: usize },
    #[error("desk-scale exceeded: codebook has {count} codewords (guard is {guard})")]
    DeskScaleExceeded { count: u128, guard: u128 },
    #[error("degenerate codebook: average energy is zero")]
    DegenerateCodebook,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, CodeError>;

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

/// A QAM alphabet with exact Gaussian-integer points.
///
/// Indices are Gray-mapped per axis so adjacent indices differ in one level.
/// BPSK is the 2-point degenerate case `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Constellation {
    pub bits_per_symbol: u32,
    pub points: Vec<GaussianInt>,
}

impl Constellation {
    pub fn qam(bits_per_symbol: u32) -> Result<Self> {
        let points = match bits_per_symbol {
            1 => vec![GaussianInt::new(-1, 0), GaussianInt::new(1, 0)],
            2 | 4 | 6 => {
                let axis_bits = bits_per_symbol / 2;
                let levels = 1usize << axis_bits;
                let pam = |idx: usize| -> i128 {
                    let gray = idx ^ (idx >> 1);
                    2 * gray as i128 - (levels as i128 - 1)
                };
                let mut pts = Vec::with_capacity(1 << bits_per_symbol);
                for hi in 0..levels {
                    for lo in 0..levels {
                        pts.push(GaussianInt::new(pam(hi), pam(lo)));
                    }
                }
                pts
            }
            other => return Err(CodeError::UnsupportedConstellation(other)),
        };
        Ok(Self {
            bits_per_symbol,
            points,
        })
    }

    /// Arbitrary point set (used for degenerate/scaled test alphabets).
    pub fn custom(points: Vec<GaussianInt>) -> Self {
        let bits = (points.len() as f64).log2().round() as u32;
        Self {
            bits_per_symbol: bits,
            points,
        }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Average symbol energy `E|s|^2` over the uniform alphabet.
    pub fn mean_energy(&self) -> f64 {
        let total: u128 = self
            .points
            .iter()
            .map(|p| p.norm_sq().expect("constellation energy overflow"))
            .sum();
        total as f64 / self.points.len() as f64
    }

    /// The set `{a - b}` over all point pairs, deduplicated and sorted.
    pub fn difference_set(&self) -> Vec<GaussianInt> {
        let mut diffs: Vec<GaussianInt> = self
            .points
            .iter()
            .flat_map(|a| self.points.iter().map(move |b| a.checked_sub(*b).unwrap()))
            .collect();
        diffs.sort_by_key(|d| (d.re, d.im));
        diffs.dedup();
        diffs
    }
}

// ---------------------------------------------------------------------------
// Code specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Generator on sub-channel 0, zeta-conjugate on sub-channel 1, zero-padded.
    BlockDiagNvd,
    /// Two generators spread across both sub-channels with a 1/sqrt(2) factor.
    SplitNvd,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::BlockDiagNvd => "block-diag-nvd",
            Scheme::SplitNvd => "split-nvd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CodeSpec {
    pub scheme: Scheme,
    /// Number of parallel sub-channels N.
    pub subchannels: usize,
    /// Transmit antennas per sub-channel.
    pub tx: usize,
    /// Slots per generator block T.
    pub slots: usize,
    pub constellation: Constellation,
}

impl CodeSpec {
    pub fn golden(scheme: Scheme, bits_per_symbol: u32) -> Result<Self> {
        Ok(Self {
            scheme,
            subchannels: 2,
            tx: 2,
            slots: 2,
            constellation: Constellation::qam(bits_per_symbol)?,
        })
    }

    /// Total slots spanned by one codeword on each sub-channel.
    pub fn total_slots(&self) -> usize {
        self.subchannels * self.slots
    }

    pub fn symbols_per_codeword(&self) -> usize {
        match self.scheme {
            Scheme::BlockDiagNvd => 8,
            Scheme::SplitNvd => 16,
        }
    }

    pub fn codebook_size(&self) -> u128 {
        (self.constellation.size() as u128).pow(self.symbols_per_codeword() as u32)
    }

    /// Information bits carried by one codeword.
    pub fn bits_per_codeword(&self) -> u32 {
        self.symbols_per_codeword() as u32 * self.constellation.bits_per_symbol
    }

    /// Rate in bits per channel use (per slot).
    pub fn bits_per_channel_use(&self) -> f64 {
        self.bits_per_codeword() as f64 / self.total_slots() as f64
    }
}

/// Constellation cardinality required to sustain multiplexing gain `r`.
///
/// The block-diagonal scheme needs `snr^(r/nt)` points; the split scheme
/// spreads the rate over all `N*T` slots and needs only `snr^(r/(N*nt))`.
pub fn constellation_size_for_rate(
    scheme: Scheme,
    r: f64,
    snr: f64,
    subchannels: usize,
    tx: usize,
) -> f64 {
    match scheme {
        Scheme::BlockDiagNvd => snr.powf(r / tx as f64),
        Scheme::SplitNvd => snr.powf(r / (subchannels as f64 * tx as f64)),
    }
}

// ---------------------------------------------------------------------------
// Exact generator construction
// ---------------------------------------------------------------------------

/// `alpha = 1 + i - i*theta`.
pub fn alpha() -> RingElement {
    RingElement::new(
        GaussianInt::new(1, 1),
        GaussianInt::ZERO,
        GaussianInt::new(0, -1),
        GaussianInt::ZERO,
    )
}

/// The ring element `s1 + s2*zeta8 + s3*theta + s4*zeta8*theta`.
pub fn symbol_element(s: &[GaussianInt]) -> RingElement {
    RingElement::new(s[0], s[1], s[2], s[3])
}

/// Exact (unnormalized) 2x2 generator matrix from eight symbols.
///
/// Row one carries `alpha*u, alpha*v`; row two the theta-conjugates with the
/// `zeta8` multiplier on the lower-left entry. The `1/sqrt(5)` scale is
/// applied only at embedding time.
pub fn generator_ring_matrix(symbols: &[GaussianInt]) -> Result<RingMatrix> {
    if symbols.len() != 8 {
        return Err(CodeError::WrongSymbolCount {
            expected: 8,
            got: symbols.len(),
        });
    }
    let a = alpha();
    let u = symbol_element(&symbols[..4]);
    let v = symbol_element(&symbols[4..]);
    let e11 = a.checked_mul(&u)?;
    let e12 = a.checked_mul(&v)?;
    let e21 = RingElement::zeta().checked_mul(&e12.conj_theta())?;
    let e22 = e11.conj_theta();
    Ok(RingMatrix::from_rows(vec![vec![e11, e12], vec![e21, e22]]))
}

/// Exact unnormalized stacked codeword matrix (`N*nt` x `N*T` = 4x4).
///
/// Block-diagonal scheme: `diag(G, conj_zeta(G))`. Split scheme:
/// `[[G1, G2], [conj_zeta(G2), conj_zeta(G1)]]` (the structural `1/sqrt(2)`
/// and `1/sqrt(5)` live in the embedding only).
pub fn stacked_ring_matrix(scheme: Scheme, symbols: &[GaussianInt]) -> Result<RingMatrix> {
    match scheme {
        Scheme::BlockDiagNvd => {
            let g = generator_ring_matrix(symbols)?;
            Ok(g.block_diag(&g.map(RingElement::conj_zeta)))
        }
        Scheme::SplitNvd => {
            if symbols.len() != 16 {
                return Err(CodeError::WrongSymbolCount {
                    expected: 16,
                    got: symbols.len(),
                });
            }
            let g1 = generator_ring_matrix(&symbols[..8])?;
            let g2 = generator_ring_matrix(&symbols[8..])?;
            let t1 = g1.map(RingElement::conj_zeta);
            let t2 = g2.map(RingElement::conj_zeta);
            let mut m = RingMatrix::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] = g1[(i, j)];
                    m[(i, j + 2)] = g2[(i, j)];
                    m[(i + 2, j)] = t2[(i, j)];
                    m[(i + 2, j + 2)] = t1[(i, j)];
                }
            }
            Ok(m)
        }
    }
}

// ---------------------------------------------------------------------------
// Embedded half tables
// ---------------------------------------------------------------------------

/// Embedded generator entries for every 4-symbol half-vector, shared by the
/// encoder, the decoder and the difference-set enumerations.
///
/// With `u` built from the first four symbols and `v` from the last four,
/// the generator is `[[e11(u), e12(v)], [e21(v), e22(u)]]`; the `t*` tables
/// are the zeta-conjugated entries. Entries are unnormalized (no 1/sqrt 5).
#[derive(Debug, Clone)]
pub struct HalfTables {
    pub e11: Vec<Complex64>,
    pub e22: Vec<Complex64>,
    pub e12: Vec<Complex64>,
    pub e21: Vec<Complex64>,
    pub t11: Vec<Complex64>,
    pub t22: Vec<Complex64>,
    pub t12: Vec<Complex64>,
    pub t21: Vec<Complex64>,
}

impl HalfTables {
    /// Tables over all `|points|^4` half-vectors, lexicographic with the
    /// first symbol most significant.
    pub fn build(points: &[GaussianInt]) -> Result<Self> {
        let q = points.len();
        let count = q * q * q * q;
        let a = alpha();
        let zeta = RingElement::zeta();
        let mut tables = HalfTables {
            e11: Vec::with_capacity(count),
            e22: Vec::with_capacity(count),
            e12: Vec::with_capacity(count),
            e21: Vec::with_capacity(count),
            t11: Vec::with_capacity(count),
            t22: Vec::with_capacity(count),
            t12: Vec::with_capacity(count),
            t21: Vec::with_capacity(count),
        };
        for idx in 0..count {
            let mut rem = idx;
            let mut syms = [GaussianInt::ZERO; 4];
            for k in (0..4).rev() {
                syms[k] = points[rem % q];
                rem /= q;
            }
            let x = symbol_element(&syms);
            let diag = a.checked_mul(&x)?;
            let off = zeta.checked_mul(&diag.conj_theta())?;
            tables.e11.push(diag.embed());
            tables.e22.push(diag.conj_theta().embed());
            tables.e12.push(diag.embed());
            tables.e21.push(off.embed());
            tables.t11.push(diag.conj_zeta().embed());
            tables.t22.push(diag.conj_theta().conj_zeta().embed());
            tables.t12.push(diag.conj_zeta().embed());
            tables.t21.push(off.conj_zeta().embed());
        }
        Ok(tables)
    }

    pub fn len(&self) -> usize {
        self.e11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e11.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Codewords and the built code
// ---------------------------------------------------------------------------

/// One codeword: `N` complex blocks of shape `nt x (N*T)` plus the symbols
/// that produced it. Sub-channel `n` transmits row-block `n` of the stacked
/// matrix over the full `N*T` slots.
#[derive(Debug, Clone)]
pub struct Codeword {
    pub blocks: Vec<CMat>,
    pub symbols: Vec<GaussianInt>,
}

impl Codeword {
    /// `diag{X_n}`: shape `(N*nt) x (N * N*T)`.
    pub fn block_diagonal(&self) -> CMat {
        let nt = self.blocks[0].nrows();
        let tt = self.blocks[0].ncols();
        let n = self.blocks.len();
        let mut out = CMat::zeros(n * nt, n * tt);
        for (k, b) in self.blocks.iter().enumerate() {
            out.view_mut((k * nt, k * tt), (nt, tt)).copy_from(b);
        }
        out
    }

    /// Row-stacked `(N*nt) x (N*T)` matrix (the square codeword form).
    pub fn stacked(&self) -> CMat {
        let nt = self.blocks[0].nrows();
        let tt = self.blocks[0].ncols();
        let mut out = CMat::zeros(self.blocks.len() * nt, tt);
        for (k, b) in self.blocks.iter().enumerate() {
            out.view_mut((k * nt, 0), (nt, tt)).copy_from(b);
        }
        out
    }

    /// Total Frobenius energy over all sub-channel blocks.
    pub fn total_energy(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }
}

/// A fully built code: spec, embedded tables and the empirical power scale.
#[derive(Debug, Clone)]
pub struct Code {
    spec: CodeSpec,
    tables: HalfTables,
    power_scale: f64,
}

impl Code {
    /// Builds the code and computes the power scale making the
    /// uniform-codebook average of `sum_n ||X_n||_F^2` exactly `T_total*N`.
    ///
    /// Building only materializes the per-half tables (`|A|^4` entries), so
    /// codes whose full codebook is beyond the enumeration guard can still
    /// be constructed for difference-set analysis; [`Code::enumerable`]
    /// gates the paths that walk the whole codebook.
    pub fn build(spec: CodeSpec) -> Result<Self> {
        if spec.subchannels != 2 || spec.tx != 2 || spec.slots != 2 {
            return Err(CodeError::UnsupportedDimensions {
                n: spec.subchannels,
                nt: spec.tx,
                t: spec.slots,
            });
        }
        let table_len = (spec.constellation.size() as u128).pow(4);
        if table_len > 1 << 18 {
            return Err(CodeError::DeskScaleExceeded {
                count: spec.codebook_size(),
                guard: ENUMERATION_GUARD,
            });
        }
        let tables = HalfTables::build(&spec.constellation.points)?;

        // Uniform-codebook average of the raw (power-scale 1) energy. The
        // energy separates over half-vectors, so the mean over the product
        // codebook is the sum of per-half means.
        let k = tables.len() as f64;
        let mean = |t: &[Complex64]| t.iter().map(|z| z.norm_sqr()).sum::<f64>() / k;
        let u_mean = mean(&tables.e11) + mean(&tables.e22) + mean(&tables.t11) + mean(&tables.t22);
        let v_mean = mean(&tables.e12) + mean(&tables.e21) + mean(&tables.t12) + mean(&tables.t21);
        let raw_avg = match spec.scheme {
            Scheme::BlockDiagNvd => (u_mean + v_mean) / 5.0,
            Scheme::SplitNvd => 2.0 * (u_mean + v_mean) / 10.0,
        };
        if raw_avg == 0.0 {
            return Err(CodeError::DegenerateCodebook);
        }
        let target = (spec.total_slots() * spec.subchannels) as f64;
        let power_scale = (target / raw_avg).sqrt();
        Ok(Self {
            spec,
            tables,
            power_scale,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn tables(&self) -> &HalfTables {
        &self.tables
    }

    /// Empirical power scale (the outer scaling factor of the codeword).
    pub fn power_scale(&self) -> f64 {
        self.power_scale
    }

    /// Combined scalar applied to every embedded generator entry.
    pub fn entry_scale(&self) -> f64 {
        match self.spec.scheme {
            Scheme::BlockDiagNvd => self.power_scale * GENERATOR_SCALE,
            Scheme::SplitNvd => self.power_scale * GENERATOR_SCALE * FRAC_1_SQRT_2,
        }
    }

    pub fn size(&self) -> usize {
        self.spec.codebook_size() as usize
    }

    /// Errors unless the full codebook is small enough to enumerate (and
    /// hence to ML-decode); the message names the offending count.
    pub fn enumerable(&self) -> Result<()> {
        let count = self.spec.codebook_size();
        if count > ENUMERATION_GUARD {
            Err(CodeError::DeskScaleExceeded {
                count,
                guard: ENUMERATION_GUARD,
            })
        } else {
            Ok(())
        }
    }

    pub fn half_count(&self) -> usize {
        self.tables.len()
    }

    /// Symbol vector for a codebook index (lexicographic, first symbol most
    /// significant).
    pub fn symbols_for_index(&self, index: usize) -> Vec<GaussianInt> {
        let q = self.spec.constellation.size();
        let nsym = self.spec.symbols_per_codeword();
        let mut rem = index;
        let mut syms = vec![GaussianInt::ZERO; nsym];
        for k in (0..nsym).rev() {
            syms[k] = self.spec.constellation.points[rem % q];
            rem /= q;
        }
        syms
    }

    /// Half-vector indices for a codebook index: `(u, v)` for the
    /// block-diagonal scheme, `(u1, v1, u2, v2)` for the split scheme.
    pub fn half_indices(&self, index: usize) -> Vec<usize> {
        let k = self.half_count();
        match self.spec.scheme {
            Scheme::BlockDiagNvd => vec![index / k, index % k],
            Scheme::SplitNvd => vec![
                index / (k * k * k),
                (index / (k * k)) % k,
                (index / k) % k,
                index % k,
            ],
        }
    }

    /// Normalized codeword for a codebook index.
    pub fn codeword_by_index(&self, index: usize) -> Codeword {
        let s = Complex64::new(self.entry_scale(), 0.0);
        let t = &self.tables;
        let halves = self.half_indices(index);
        let blocks = match self.spec.scheme {
            Scheme::BlockDiagNvd => {
                let (u, v) = (halves[0], halves[1]);
                let z = Complex64::ZERO;
                let x0 = CMat::from_row_slice(
                    2,
                    4,
                    &[t.e11[u] * s, t.e12[v] * s, z, z, t.e21[v] * s, t.e22[u] * s, z, z],
                );
                let x1 = CMat::from_row_slice(
                    2,
                    4,
                    &[z, z, t.t11[u] * s, t.t12[v] * s, z, z, t.t21[v] * s, t.t22[u] * s],
                );
                vec![x0, x1]
            }
            Scheme::SplitNvd => {
                let (u1, v1, u2, v2) = (halves[0], halves[1], halves[2], halves[3]);
                let x0 = CMat::from_row_slice(
                    2,
                    4,
                    &[
                        t.e11[u1] * s,
                        t.e12[v1] * s,
                        t.e11[u2] * s,
                        t.e12[v2] * s,
                        t.e21[v1] * s,
                        t.e22[u1] * s,
                        t.e21[v2] * s,
                        t.e22[u2] * s,
                    ],
                );
                let x1 = CMat::from_row_slice(
                    2,
                    4,
                    &[
                        t.t11[u2] * s,
                        t.t12[v2] * s,
                        t.t11[u1] * s,
                        t.t12[v1] * s,
                        t.t21[v2] * s,
                        t.t22[u2] * s,
                        t.t21[v1] * s,
                        t.t22[u1] * s,
                    ],
                );
                vec![x0, x1]
            }
        };
        Codeword {
            blocks,
            symbols: self.symbols_for_index(index),
        }
    }

    /// Encode an explicit symbol vector (normalized).
    pub fn encode(&self, symbols: &[GaussianInt]) -> Result<Codeword> {
        self.encode_scaled(symbols, self.power_scale)
    }

    /// Encode with structural scales only (`1/sqrt(5)`, `1/sqrt(2)`); used by
    /// linearity checks, where the power scale is irrelevant.
    pub fn encode_structural(&self, symbols: &[GaussianInt]) -> Result<Codeword> {
        self.encode_scaled(symbols, 1.0)
    }

    fn encode_scaled(&self, symbols: &[GaussianInt], power_scale: f64) -> Result<Codeword> {
        let expected = self.spec.symbols_per_codeword();
        if symbols.len() != expected {
            return Err(CodeError::WrongSymbolCount {
                expected,
                got: symbols.len(),
            });
        }
        let stacked = stacked_ring_matrix(self.spec.scheme, symbols)?;
        let scale = match self.spec.scheme {
            Scheme::BlockDiagNvd => power_scale * GENERATOR_SCALE,
            Scheme::SplitNvd => power_scale * GENERATOR_SCALE * FRAC_1_SQRT_2,
        };
        let full = stacked.embed() * Complex64::new(scale, 0.0);
        let blocks = (0..self.spec.subchannels)
            .map(|n| CMat::from(full.view((n * self.spec.tx, 0), (self.spec.tx, 4))))
            .collect();
        Ok(Codeword {
            blocks,
            symbols: symbols.to_vec(),
        })
    }

    /// Iterator over the whole codebook in index order (symbol-lexicographic,
    /// first symbol most significant); guarded by desk scale.
    pub fn codewords(&self) -> Result<impl Iterator<Item = Codeword> + '_> {
        self.enumerable()?;
        Ok((0..self.size()).map(|i| self.codeword_by_index(i)))
    }
}
