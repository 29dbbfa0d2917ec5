//! Diversity-multiplexing formulas, code-design criteria and eigenvalue
//! bound verifiers.
//!
//! The exact side certifies the non-vanishing determinant: difference
//! codewords of the golden schemes are enumerated through small per-half
//! tables, the determinant of the unnormalized stacked difference reduces to
//! a Gaussian integer, and its squared magnitude is minimized exactly in
//! integer arithmetic. The numeric side minimizes the product of the `m`
//! smallest eigenvalues of `DD^dag` (the quantity the sufficient DMT
//! condition constrains) and verifies the supporting eigenvalue bounds with
//! randomized suites.

use crate::algebra::{AlgebraError, GaussianInt, RingElement};
use crate::channel::{
    block_circulant, fourier_block_diagonal, hermitian_eigenvalues, mutual_information,
    sample_channel, white_blocks, ChannelError, ChannelSpec, ResolvedCorrelation,
};
use crate::codes::{symbol_element, Code, CodeError, Constellation, HalfTables, Scheme};
use crate::stats::ks_two_sample;
use crate::CMat;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

/// Ceiling on exhaustively enumerable difference sets (`|D|^8`).
pub const DIFFERENCE_GUARD: u128 = 1 << 26;

/// Relative eigenvalue threshold for numeric rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("desk-scale exceeded: difference enumeration has {count} vectors (guard is {guard})")]
    DeskScaleExceeded { count: u128, guard: u128 },
    #[error("difference matrix is rank deficient (rank {rank}, expected {expected})")]
    RankDeficientDifference { rank: usize, expected: usize },
    #[error("matrix C is singular (or numerically rank deficient)")]
    SingularMatrix,
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

type Result<T> = std::result::Result<T, AnalysisError>;

// ---------------------------------------------------------------------------
// Closed-form DMT expressions
// ---------------------------------------------------------------------------

/// One point of a diversity-multiplexing curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DmtPoint {
    pub r: f64,
    pub d: f64,
}

/// Jensen-bound DMT `d(r) = (rho*M - r)(m - r)`, the optimal tradeoff of the
/// selective channel with correlation rank `rho`.
pub fn dmt_jensen(rho: usize, max_antennas: usize, min_antennas: usize, r: f64) -> DmtPoint {
    let d = (rho as f64 * max_antennas as f64 - r) * (min_antennas as f64 - r);
    DmtPoint { r, d }
}

/// Per-block tradeoff `d(r) = N(M - r)(m - r)` (the flat-fading curve scaled
/// by the block count); a lower curve used for comparison plots.
pub fn dmt_blockfading_zhengtse(
    subchannels: usize,
    max_antennas: usize,
    min_antennas: usize,
    r: f64,
) -> DmtPoint {
    let d = subchannels as f64 * (max_antennas as f64 - r) * (min_antennas as f64 - r);
    DmtPoint { r, d }
}

/// Parameter count of the rank-`Nr` manifold of block-circulant channels:
/// `N*M*r + (m - r)*r`.
pub fn manifold_dim(subchannels: usize, max_antennas: usize, min_antennas: usize, r: usize) -> usize {
    subchannels * max_antennas * r + (min_antennas - r) * r
}

/// Membership in the high-SNR outage region: all prefix sums of the eigen
/// exponents must satisfy `sum_{i<=k} alpha_i >= k - r` for `k = 1..m`.
pub fn outage_region_membership(alpha: &[f64], r: f64, m: usize) -> bool {
    assert!(alpha.len() >= m, "need at least {m} eigen exponents");
    let mut prefix = 0.0;
    for k in 1..=m {
        prefix += alpha[k - 1];
        if prefix < k as f64 - r {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Golden difference enumeration
// ---------------------------------------------------------------------------

/// Precomputed tables over the 4-symbol half-vectors of the difference
/// alphabet `D = {a - b}`.
///
/// For the generator `G(u, v)` the determinant factors as
/// `det G = (2+i) (P(u) - Q(v))` with `P = u*conj_theta(u)` and
/// `Q = zeta * v*conj_theta(v)`, both in `Z[i] + Z[i]*zeta`. The full
/// block-diagonal determinant is `(3+4i) (w0^2 - i w1^2)` with
/// `w = P - Q`, a Gaussian integer fact checked against the cofactor
/// determinant in the tests.
#[derive(Debug)]
struct DiffTables {
    diffs: Vec<GaussianInt>,
    half: HalfTables,
    p: Vec<(GaussianInt, GaussianInt)>,
    q: Vec<(GaussianInt, GaussianInt)>,
    zero_half: usize,
}

impl DiffTables {
    fn build(constellation: &Constellation) -> Result<DiffTables> {
        let diffs = constellation.difference_set();
        let b = diffs.len() as u128;
        let count = b.pow(8);
        if count > DIFFERENCE_GUARD {
            return Err(AnalysisError::DeskScaleExceeded {
                count,
                guard: DIFFERENCE_GUARD,
            });
        }
        let half = HalfTables::build(&diffs)?;
        let k = half.len();
        let zeta = RingElement::zeta();
        let mut p = Vec::with_capacity(k);
        let mut q = Vec::with_capacity(k);
        let base = diffs.len();
        for idx in 0..k {
            let mut rem = idx;
            let mut syms = [GaussianInt::ZERO; 4];
            for slot in (0..4).rev() {
                syms[slot] = diffs[rem % base];
                rem /= base;
            }
            let x = symbol_element(&syms);
            let px = x.checked_mul(&x.conj_theta())?;
            debug_assert!(px.c[2].is_zero() && px.c[3].is_zero());
            let qx = zeta.checked_mul(&px)?;
            debug_assert!(qx.c[2].is_zero() && qx.c[3].is_zero());
            p.push((px.c[0], px.c[1]));
            q.push((qx.c[0], qx.c[1]));
        }
        let zero_digit = diffs
            .iter()
            .position(|d| d.is_zero())
            .expect("difference set always contains zero");
        let zero_half =
            ((zero_digit * base + zero_digit) * base + zero_digit) * base + zero_digit;
        Ok(DiffTables {
            diffs,
            half,
            p,
            q,
            zero_half,
        })
    }

    fn base(&self) -> usize {
        self.diffs.len()
    }

    fn symbols(&self, u: usize, v: usize) -> Vec<GaussianInt> {
        let b = self.base();
        let mut out = Vec::with_capacity(8);
        for idx in [u, v] {
            let mut rem = idx;
            let mut digits = [0usize; 4];
            for slot in (0..4).rev() {
                digits[slot] = rem % b;
                rem /= b;
            }
            out.extend(digits.iter().map(|&d| self.diffs[d]));
        }
        out
    }
}

/// `|det|^2` of the unnormalized stacked block-diagonal difference, as an
/// exact integer: `|(3+4i)(w0^2 - i w1^2)|^2 = 25 * N(w0^2 - i w1^2)`.
fn exact_detsq(p: (GaussianInt, GaussianInt), q: (GaussianInt, GaussianInt)) -> u128 {
    let w0 = p.0.checked_sub(q.0).expect("difference overflow");
    let w1 = p.1.checked_sub(q.1).expect("difference overflow");
    // g = w0^2 - i*w1^2
    let g_re = w0.re * w0.re - w0.im * w0.im + 2 * w1.re * w1.im;
    let g_im = 2 * w0.re * w0.im - (w1.re * w1.re - w1.im * w1.im);
    25u128 * ((g_re * g_re) as u128 + (g_im * g_im) as u128)
}

#[derive(Debug, Clone, Copy)]
struct Herm2 {
    a: f64,
    c: f64,
    b: Complex64,
}

impl Herm2 {
    #[inline]
    fn from_rows(x11: Complex64, x12: Complex64, x21: Complex64, x22: Complex64) -> Herm2 {
        Herm2 {
            a: x11.norm_sqr() + x12.norm_sqr(),
            c: x21.norm_sqr() + x22.norm_sqr(),
            b: x11 * x21.conj() + x12 * x22.conj(),
        }
    }

    #[inline]
    fn add(self, o: Herm2) -> Herm2 {
        Herm2 {
            a: self.a + o.a,
            c: self.c + o.c,
            b: self.b + o.b,
        }
    }

    #[inline]
    fn eigenvalues(self) -> (f64, f64) {
        let tr = self.a + self.c;
        let disc = ((self.a - self.c) * (self.a - self.c) + 4.0 * self.b.norm_sqr()).sqrt();
        (0.5 * (tr - disc).max(0.0), 0.5 * (tr + disc))
    }
}

#[inline]
fn product_of_m_smallest(vals: [f64; 4], m: usize) -> f64 {
    let mut v = vals;
    v.sort_by(f64::total_cmp);
    v[..m].iter().product()
}

#[derive(Debug, Clone, Copy)]
struct ScanMin {
    detsq: u128,
    det_at: (usize, usize),
    product: f64,
    product_at: (usize, usize),
}

impl ScanMin {
    fn empty() -> ScanMin {
        ScanMin {
            detsq: u128::MAX,
            det_at: (usize::MAX, usize::MAX),
            product: f64::INFINITY,
            product_at: (usize::MAX, usize::MAX),
        }
    }

    fn merge(self, o: ScanMin) -> ScanMin {
        let det = if (o.detsq, o.det_at) < (self.detsq, self.det_at) {
            (o.detsq, o.det_at)
        } else {
            (self.detsq, self.det_at)
        };
        let prod = if (o.product, o.product_at) < (self.product, self.product_at) {
            (o.product, o.product_at)
        } else {
            (self.product, self.product_at)
        };
        ScanMin {
            detsq: det.0,
            det_at: det.1,
            product: prod.0,
            product_at: prod.1,
        }
    }
}

/// Single pass over all nonzero difference vectors of one generator: exact
/// minimum `|det|^2` and minimum eigen-product of `DD^dag = diag(s^2 A A^dag,
/// s^2 tA tA^dag)` with entry scale `s`.
fn golden_difference_scan(tables: &DiffTables, entry_scale: f64, m: usize) -> ScanMin {
    let k = tables.half.len();
    let s = Complex64::new(entry_scale, 0.0);
    (0..k)
        .into_par_iter()
        .map(|u| {
            let mut local = ScanMin::empty();
            let e11 = tables.half.e11[u] * s;
            let e22 = tables.half.e22[u] * s;
            let t11 = tables.half.t11[u] * s;
            let t22 = tables.half.t22[u] * s;
            let pu = tables.p[u];
            for v in 0..k {
                if u == tables.zero_half && v == tables.zero_half {
                    continue;
                }
                let detsq = exact_detsq(pu, tables.q[v]);
                if (detsq, (u, v)) < (local.detsq, local.det_at) {
                    local.detsq = detsq;
                    local.det_at = (u, v);
                }
                let e12 = tables.half.e12[v] * s;
                let e21 = tables.half.e21[v] * s;
                let t12 = tables.half.t12[v] * s;
                let t21 = tables.half.t21[v] * s;
                let (l1, l2) = Herm2::from_rows(e11, e12, e21, e22).eigenvalues();
                let (m1, m2) = Herm2::from_rows(t11, t12, t21, t22).eigenvalues();
                let prod = product_of_m_smallest([l1, l2, m1, m2], m);
                if (prod, (u, v)) < (local.product, local.product_at) {
                    local.product = prod;
                    local.product_at = (u, v);
                }
            }
            local
        })
        .reduce(ScanMin::empty, ScanMin::merge)
}

/// How a report's minima were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NvdMethod {
    /// Every nonzero difference vector of the codebook was enumerated.
    FullDifferenceEnumeration,
    /// Split scheme: the system decomposes into independent parallel
    /// sub-codes, and adding energy on the other sub-code can only raise
    /// every eigenvalue of `DD^dag`, so the minimum over all differences is
    /// attained on single-sub-code differences.
    PerSubCodeReduction,
}

/// Exact/numeric non-vanishing-determinant certificate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NvdReport {
    pub scheme: Scheme,
    pub bits_per_symbol: u32,
    pub method: NvdMethod,
    /// Number of nonzero difference vectors covered by the scan.
    pub differences: u128,
    /// Exact minimum `|det|^2` of the unnormalized stacked difference.
    pub min_exact_detsq: u128,
    /// Difference symbol vector attaining the exact minimum.
    pub witness_exact: Vec<GaussianInt>,
    /// Minimum over differences of the product of the `m` smallest
    /// eigenvalues of `DD^dag` (power-normalized codewords).
    pub min_product: f64,
    pub witness_product: Vec<GaussianInt>,
    pub eigenvalues_used: usize,
}

/// Exact minimum determinant over all nonzero codeword differences.
///
/// The split scheme reports the per-sub-code certificate: its stacked matrix
/// has no determinant bound of its own (two equal sub-codes cancel), but an
/// error event always involves at least one sub-code difference, whose
/// block-diagonal determinant is the certified quantity.
pub fn min_det_exact(code: &Code) -> Result<NvdReport> {
    min_det_with_m(code, code.spec().tx.min(2))
}

fn min_det_with_m(code: &Code, m: usize) -> Result<NvdReport> {
    let tables = DiffTables::build(&code.spec().constellation)?;
    let scan = golden_difference_scan(&tables, code.entry_scale(), m);
    let method = match code.spec().scheme {
        Scheme::BlockDiagNvd => NvdMethod::FullDifferenceEnumeration,
        Scheme::SplitNvd => NvdMethod::PerSubCodeReduction,
    };
    Ok(NvdReport {
        scheme: code.spec().scheme,
        bits_per_symbol: code.spec().constellation.bits_per_symbol,
        method,
        differences: (tables.base() as u128).pow(8) - 1,
        min_exact_detsq: scan.detsq,
        witness_exact: tables.symbols(scan.det_at.0, scan.det_at.1),
        min_product: scan.product,
        witness_product: tables.symbols(scan.product_at.0, scan.product_at.1),
        eigenvalues_used: m,
    })
}

/// Outcome of the sufficient-condition check at one `(snr, rate)` operating
/// point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionReport {
    pub scheme: Scheme,
    pub bits_per_symbol: u32,
    pub snr: f64,
    pub rate_bits: f64,
    pub min_product: f64,
    pub witness: Vec<GaussianInt>,
    /// `log(min_product)/log(snr)`, to compare against `-r`.
    pub exponent: f64,
    /// `log2(min_product) + rate_bits`: the measured constant of the
    /// `min >= 2^-R` bound (only its exponent is pinned by the theory).
    pub offset_bits: f64,
    pub differences: u128,
}

/// Minimum eigen-product of `DD^dag` over all codeword pairs, compared to
/// the `2^-R` sufficient condition.
///
/// Pairs reduce to nonzero differences by linearity; the split scheme
/// further reduces to single-sub-code differences (adding the other
/// sub-code's difference energy is a PSD perturbation and can only raise
/// eigenvalues).
pub fn check_nvd_criterion(code: &Code, m: usize, rate_bits: f64, snr: f64) -> Result<CriterionReport> {
    let report = min_det_with_m(code, m)?;
    Ok(CriterionReport {
        scheme: report.scheme,
        bits_per_symbol: report.bits_per_symbol,
        snr,
        rate_bits,
        min_product: report.min_product,
        witness: report.witness_product.clone(),
        exponent: report.min_product.ln() / snr.ln(),
        offset_bits: report.min_product.log2() + rate_bits,
        differences: report.differences,
    })
}

/// Brute-force minimum eigen-product over the split scheme's full difference
/// space (both sub-codes varying); validates the per-sub-code reduction.
#[allow(dead_code)]
fn split_min_product_full_scan(code: &Code, m: usize) -> Result<(f64, u128)> {
    assert_eq!(code.spec().scheme, Scheme::SplitNvd);
    let tables = DiffTables::build(&code.spec().constellation)?;
    let k = tables.half.len();
    let pairs = (k * k) as u128;
    let count = pairs * pairs;
    if count > DIFFERENCE_GUARD {
        return Err(AnalysisError::DeskScaleExceeded {
            count,
            guard: DIFFERENCE_GUARD,
        });
    }
    let s = Complex64::new(code.entry_scale(), 0.0);
    // Gram blocks of one generator (and its zeta-conjugate) per (u, v).
    let mut gram = Vec::with_capacity(k * k);
    let mut gram_t = Vec::with_capacity(k * k);
    for u in 0..k {
        for v in 0..k {
            gram.push(Herm2::from_rows(
                tables.half.e11[u] * s,
                tables.half.e12[v] * s,
                tables.half.e21[v] * s,
                tables.half.e22[u] * s,
            ));
            gram_t.push(Herm2::from_rows(
                tables.half.t11[u] * s,
                tables.half.t12[v] * s,
                tables.half.t21[v] * s,
                tables.half.t22[u] * s,
            ));
        }
    }
    let zero_pair = tables.zero_half * k + tables.zero_half;
    let min = (0..k * k)
        .into_par_iter()
        .map(|p1| {
            let mut local = f64::INFINITY;
            for p2 in 0..k * k {
                if p1 == zero_pair && p2 == zero_pair {
                    continue;
                }
                let (l1, l2) = gram[p1].add(gram[p2]).eigenvalues();
                let (m1, m2) = gram_t[p1].add(gram_t[p2]).eigenvalues();
                let prod = product_of_m_smallest([l1, l2, m1, m2], m);
                local = local.min(prod);
            }
            local
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok((min, count - 1))
}

// ---------------------------------------------------------------------------
// Effective codeword and eigenvalue-bound verifiers
// ---------------------------------------------------------------------------

/// Report of one effective-codeword construction.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EffectiveCodewordReport {
    pub rank: usize,
    pub expected_rank: usize,
    /// Count of eigenvalue-bound violations beyond relative slack.
    pub violations: usize,
    /// Largest relative shortfall `(bound - lambda)/scale` observed.
    pub worst_slack: f64,
}

/// Builds `Theta = (R^{1/2} (x) I_nt) diag{dX_n dX_n^dag} (R^{1/2} (x) I_nt)`
/// and checks `rank(Theta) = rho*nt` and
/// `lambda_i(Theta) >= sigma2_min(R) * lambda_i(DD^dag)` on the nonzero
/// ascending spectrum.
pub fn effective_codeword(
    corr: &ResolvedCorrelation,
    delta_blocks: &[CMat],
) -> Result<EffectiveCodewordReport> {
    let n = delta_blocks.len();
    let nt = delta_blocks[0].nrows();
    let dim = n * nt;

    let mut dd = CMat::zeros(dim, dim);
    for (k, dx) in delta_blocks.iter().enumerate() {
        let gram = dx * dx.adjoint();
        dd.view_mut((k * nt, k * nt), (nt, nt)).copy_from(&gram);
    }
    let dd_eigs = hermitian_eigenvalues(&dd);
    let dd_max = dd_eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let dd_rank = dd_eigs.iter().filter(|&&l| l > RANK_TOLERANCE * dd_max).count();
    if dd_rank != dim {
        return Err(AnalysisError::RankDeficientDifference {
            rank: dd_rank,
            expected: dim,
        });
    }

    let root = match &corr.sqrt {
        Some(r) => r.clone(),
        None => CMat::identity(corr.matrix.nrows(), corr.matrix.nrows()),
    };
    let lift = root.kronecker(&CMat::identity(nt, nt));
    let theta = &lift * &dd * &lift;

    let theta_eigs = hermitian_eigenvalues(&theta);
    let theta_max = theta_eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let nonzero: Vec<f64> = theta_eigs
        .iter()
        .copied()
        .filter(|&l| l > RANK_TOLERANCE * theta_max)
        .collect();
    let expected_rank = corr.rank * nt;

    let sigma2 = corr.min_nonzero_eigenvalue;
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    for (i, &lam) in nonzero.iter().enumerate() {
        let bound = sigma2 * dd_eigs[i];
        let slack = (bound - lam) / theta_max;
        worst = worst.max(slack);
        if slack > RANK_TOLERANCE {
            violations += 1;
        }
    }
    Ok(EffectiveCodewordReport {
        rank: nonzero.len(),
        expected_rank,
        violations,
        worst_slack: worst,
    })
}

/// Report of one `A = B (CC^dag) B^dag` bound check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OstrowskiReport {
    pub rank_a: usize,
    pub rank_b: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

/// Verifies `rank(A) = rank(B)` and the lower bound
/// `lambda_k(A) >= lambda_1(BB^dag) * lambda_k(CC^dag)` on the nonzero
/// ascending spectrum, for square `B` and full-rank square `C`.
pub fn ostrowski_check(b: &CMat, c: &CMat) -> Result<OstrowskiReport> {
    assert_eq!(b.nrows(), b.ncols(), "B must be square");
    assert_eq!(c.nrows(), c.ncols(), "C must be square");
    let cc = c * c.adjoint();
    let cc_eigs = hermitian_eigenvalues(&cc);
    let cc_max = cc_eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    if cc_eigs.iter().any(|&l| l <= RANK_TOLERANCE * cc_max) {
        return Err(AnalysisError::SingularMatrix);
    }

    let bb = b * b.adjoint();
    let bb_eigs = hermitian_eigenvalues(&bb);
    let bb_max = bb_eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let bb_nonzero: Vec<f64> = bb_eigs
        .iter()
        .copied()
        .filter(|&l| l > RANK_TOLERANCE * bb_max)
        .collect();
    let rank_b = bb_nonzero.len();
    let lambda1_bb = bb_nonzero.first().copied().unwrap_or(0.0);

    let a = b * &cc * b.adjoint();
    let a_eigs = hermitian_eigenvalues(&a);
    let a_max = a_eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let a_nonzero: Vec<f64> = a_eigs
        .iter()
        .copied()
        .filter(|&l| l > RANK_TOLERANCE * a_max)
        .collect();

    let mut violations = if a_nonzero.len() == rank_b { 0 } else { 1 };
    let mut worst: f64 = 0.0;
    for (k, &lam) in a_nonzero.iter().enumerate() {
        let bound = lambda1_bb * cc_eigs[k];
        let slack = (bound - lam) / a_max;
        worst = worst.max(slack);
        if slack > RANK_TOLERANCE {
            violations += 1;
        }
    }
    Ok(OstrowskiReport {
        rank_a: a_nonzero.len(),
        rank_b,
        violations,
        worst_slack: worst,
    })
}

// ---------------------------------------------------------------------------
// Randomized suites and the equivalent-form verifier
// ---------------------------------------------------------------------------

/// Aggregate of a randomized verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

fn random_cmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random instances of the `A = B (CC^dag) B^dag` bound with mixed sizes and
/// B-ranks.
pub fn run_ostrowski_suite(instances: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    let mut done = 0usize;
    while done < instances {
        let p = rng.random_range(2..=6usize);
        let s = rng.random_range(1..=p);
        let b = random_cmat(&mut rng, p, s) * random_cmat(&mut rng, s, p);
        let c = random_cmat(&mut rng, p, p);
        match ostrowski_check(&b, &c) {
            Ok(rep) => {
                violations += rep.violations;
                worst = worst.max(rep.worst_slack);
                done += 1;
            }
            // A random C can be near-singular; redraw.
            Err(AnalysisError::SingularMatrix) => continue,
            Err(e) => panic!("unexpected suite error: {e}"),
        }
    }
    SuiteReport {
        instances,
        violations,
        worst_slack: worst,
    }
}

/// Random instances of the effective-codeword rank/eigenvalue check with
/// random PSD correlations of every admissible rank.
pub fn run_effective_codeword_suite(instances: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst: f64 = 0.0;
    let mut done = 0usize;
    while done < instances {
        let n = rng.random_range(2..=4usize);
        let nt = rng.random_range(1..=2usize);
        let rho = rng.random_range(1..=n);
        let factor = random_cmat(&mut rng, n, rho);
        let r = &factor * factor.adjoint();
        let corr = match crate::channel::resolve_correlation_matrix(r) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if corr.rank != rho {
            continue;
        }
        let blocks: Vec<CMat> = (0..n).map(|_| random_cmat(&mut rng, nt, nt + 2)).collect();
        match effective_codeword(&corr, &blocks) {
            Ok(rep) => {
                violations += rep.violations;
                if rep.rank != rep.expected_rank {
                    violations += 1;
                }
                worst = worst.max(rep.worst_slack);
                done += 1;
            }
            Err(AnalysisError::RankDeficientDifference { .. }) => continue,
            Err(e) => panic!("unexpected suite error: {e}"),
        }
    }
    SuiteReport {
        instances,
        violations,
        worst_slack: worst,
    }
}

/// Report of the block-circulant outage-equivalence verifier.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CirculantEquivalenceReport {
    pub ks_statistic: f64,
    pub ks_threshold: f64,
    pub ks_reject: bool,
    pub spectrum_draws: usize,
    /// Worst relative mismatch between `spec(C C^dag)` and
    /// `N * spec(D D^dag)` over all draws.
    pub worst_spectrum_mismatch: f64,
}

/// Verifies the outage equivalence of the block-fading channel: mutual
/// information of the block-diagonal form (at `snr/nt`) and of the
/// block-circulant form (at `snr/(N*nt)`) are samples of one distribution,
/// and per draw the circulant and DFT-diagonal Grams share a spectrum up to
/// the factor `N`.
pub fn verify_circulant_equivalence(
    subchannels: usize,
    tx: usize,
    rx: usize,
    snr: f64,
    mi_samples: usize,
    spectrum_draws: usize,
    seed: u64,
) -> CirculantEquivalenceReport {
    let spec = ChannelSpec::block_fading(subchannels, tx, rx);
    let corr = spec
        .correlation
        .resolve(subchannels)
        .expect("identity correlation always resolves");

    let mut rng_a = ChaCha12Rng::seed_from_u64(seed);
    let mut rng_b = ChaCha12Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);

    let diag_mi: Vec<f64> = (0..mi_samples)
        .map(|_| {
            let h = sample_channel(&spec, &corr, &mut rng_a);
            mutual_information(&h, snr, tx)
        })
        .collect();
    let c_denom = snr / (subchannels * tx) as f64;
    let circ_mi: Vec<f64> = (0..mi_samples)
        .map(|_| {
            let h = sample_channel(&spec, &corr, &mut rng_b);
            let c = block_circulant(&white_blocks(&h.white, subchannels));
            hermitian_eigenvalues(&(&c * c.adjoint()))
                .iter()
                .map(|l| (1.0 + c_denom * l.max(0.0)).log2())
                .sum()
        })
        .collect();
    let ks = ks_two_sample(&diag_mi, &circ_mi, 0.01);

    let mut worst: f64 = 0.0;
    for _ in 0..spectrum_draws {
        let h = sample_channel(&spec, &corr, &mut rng_a);
        let blocks = white_blocks(&h.white, subchannels);
        let c = block_circulant(&blocks);
        let d = fourier_block_diagonal(&blocks);
        let ce = hermitian_eigenvalues(&(&c * c.adjoint()));
        let de = hermitian_eigenvalues(&(&d * d.adjoint()));
        let max = ce.last().copied().unwrap_or(1.0).max(1.0);
        for (ci, di) in ce.iter().zip(&de) {
            worst = worst.max((ci - subchannels as f64 * di).abs() / max);
        }
    }
    CirculantEquivalenceReport {
        ks_statistic: ks.statistic,
        ks_threshold: ks.threshold,
        ks_reject: ks.reject,
        spectrum_draws,
        worst_spectrum_mismatch: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{stacked_ring_matrix, CodeSpec};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn dmt_caption_values() {
        // 2 sub-channels, 2x2: split achieves (4-r)(2-r), parallel 2(2-r)^2.
        assert_relative_eq!(dmt_jensen(2, 2, 2, 0.0).d, 8.0);
        assert_relative_eq!(dmt_jensen(2, 2, 2, 1.0).d, 3.0);
        assert_relative_eq!(dmt_jensen(2, 2, 2, 2.0).d, 0.0);
        assert_relative_eq!(dmt_blockfading_zhengtse(2, 2, 2, 0.0).d, 8.0);
        assert_relative_eq!(dmt_blockfading_zhengtse(2, 2, 2, 1.0).d, 2.0);
        assert_relative_eq!(dmt_blockfading_zhengtse(2, 2, 2, 2.0).d, 0.0);
    }

    #[test]
    fn zhengtse_curve_never_exceeds_jensen() {
        for (n, mm, m) in [(2usize, 2usize, 2usize), (3, 2, 2), (2, 3, 2), (4, 4, 3)] {
            for step in 0..=20 {
                let r = m as f64 * step as f64 / 20.0;
                let j = dmt_jensen(n, mm, m, r).d;
                let z = dmt_blockfading_zhengtse(n, mm, m, r).d;
                assert!(z <= j + 1e-12, "N={n} M={mm} m={m} r={r}: {z} > {j}");
                // Gap is r(N-1)(m-r): zero only at r = 0, r = m, or N = 1.
                if r > 1e-9 && r < m as f64 - 1e-9 && n > 1 {
                    assert!(j > z);
                }
            }
        }
    }

    #[test]
    fn manifold_dimension_identity() {
        assert_eq!(manifold_dim(2, 2, 2, 1), 5);
        assert_eq!(manifold_dim(2, 2, 2, 0), 0);
        for (n, mm, m) in [(2usize, 2usize, 2usize), (3, 4, 2), (2, 3, 3)] {
            for r in 0..=m {
                let dim = manifold_dim(n, mm, m, r);
                assert_eq!(n * mm * m - dim, (n * mm - r) * (m - r));
            }
        }
    }

    #[test]
    fn outage_region_examples() {
        assert!(!outage_region_membership(&[0.0, 0.0], 0.5, 2));
        assert!(outage_region_membership(&[1.0, 1.0], 0.0, 2));
        assert!(!outage_region_membership(&[0.4, 0.7], 0.5, 2));
        assert!(outage_region_membership(&[0.6, 0.9], 0.5, 2));
    }

    #[test]
    fn exact_detsq_matches_cofactor_determinant() {
        // Dual route: the factored table formula against the generic exact
        // cofactor determinant of the stacked 4x4 difference.
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 2).unwrap()).unwrap();
        let tables = DiffTables::build(&code.spec().constellation).unwrap();
        let k = tables.half.len();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = rng.random_range(0..k);
            let v = rng.random_range(0..k);
            let fast = exact_detsq(tables.p[u], tables.q[v]);
            let syms = tables.symbols(u, v);
            let det = stacked_ring_matrix(Scheme::BlockDiagNvd, &syms)
                .unwrap()
                .det_exact()
                .unwrap()
                .as_gaussian()
                .unwrap();
            assert_eq!(fast, det.norm_sq().unwrap(), "mismatch at u={u} v={v}");
        }
    }

    #[test]
    fn single_symbol_difference_det() {
        // delta = 2*e1: det = 2^4 (3+4i), |det|^2 = 6400.
        let mut syms = vec![GaussianInt::ZERO; 8];
        syms[0] = GaussianInt::new(2, 0);
        let det = stacked_ring_matrix(Scheme::BlockDiagNvd, &syms)
            .unwrap()
            .det_exact()
            .unwrap()
            .as_gaussian()
            .unwrap();
        assert_eq!(det, GaussianInt::new(48, 64));
        assert_eq!(det.norm_sq().unwrap(), 6400);
    }

    #[test]
    fn bpsk_min_det_is_positive_and_attained() {
        let code = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let report = min_det_exact(&code).unwrap();
        assert_eq!(report.differences, 6560); // 3^8 - 1
        assert!(report.min_exact_detsq > 0);
        assert!(report.min_product > 0.0);
        // Witness reproduces the reported determinant.
        let det = stacked_ring_matrix(Scheme::BlockDiagNvd, &report.witness_exact)
            .unwrap()
            .det_exact()
            .unwrap()
            .as_gaussian()
            .unwrap();
        assert_eq!(det.norm_sq().unwrap(), report.min_exact_detsq);
    }

    #[test]
    fn scaling_homogeneity_of_the_minima() {
        // Doubling the constellation scales every unnormalized difference by
        // 2: the degree-4 determinant picks up 2^8 in |det|^2, while the
        // empirical power scale halves, leaving the normalized eigen-product
        // minimum unchanged.
        let base = Code::build(CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()).unwrap();
        let doubled_spec = CodeSpec {
            constellation: crate::codes::Constellation::custom(vec![
                GaussianInt::new(-2, 0),
                GaussianInt::new(2, 0),
            ]),
            ..CodeSpec::golden(Scheme::BlockDiagNvd, 1).unwrap()
        };
        let doubled = Code::build(doubled_spec).unwrap();
        let a = min_det_exact(&base).unwrap();
        let b = min_det_exact(&doubled).unwrap();
        assert_eq!(b.min_exact_detsq, a.min_exact_detsq * 256);
        assert_relative_eq!(b.min_product, a.min_product, max_relative = 1e-12);

        // Pure codebook scaling (fixed entry scale) multiplies the product
        // of the m = 2 smallest eigenvalues by c^(2m).
        let tables = DiffTables::build(&base.spec().constellation).unwrap();
        let s = base.entry_scale();
        let unscaled = golden_difference_scan(&tables, s, 2);
        let scaled = golden_difference_scan(&tables, 3.0 * s, 2);
        assert_relative_eq!(scaled.product, unscaled.product * 81.0, max_relative = 1e-12);
    }

    #[test]
    fn guard_rejects_16qam_difference_enumeration() {
        let code_spec = CodeSpec::golden(Scheme::BlockDiagNvd, 4).unwrap();
        let err = DiffTables::build(&code_spec.constellation).unwrap_err();
        assert!(matches!(err, AnalysisError::DeskScaleExceeded { .. }));
    }

    #[test]
    fn split_reduction_matches_full_scan() {
        // The per-sub-code reduction must reproduce the minimum of the full
        // two-sub-code difference space.
        let code = Code::build(CodeSpec::golden(Scheme::SplitNvd, 1).unwrap()).unwrap();
        let reduced = min_det_exact(&code).unwrap();
        let (full, _count) = split_min_product_full_scan(&code, 2).unwrap();
        assert_relative_eq!(reduced.min_product, full, max_relative = 1e-12);
    }

    #[test]
    fn ostrowski_identity_case() {
        let b = CMat::identity(2, 2);
        let c = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let rep = ostrowski_check(&b, &c).unwrap();
        assert_eq!(rep.rank_a, 2);
        assert_eq!(rep.rank_b, 2);
        assert_eq!(rep.violations, 0);
        // Equality case: slack is ~0 but not negative beyond tolerance.
        assert!(rep.worst_slack.abs() < 1e-12);
    }

    #[test]
    fn ostrowski_rank_one_b() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let b = random_cmat(&mut rng, 3, 1) * random_cmat(&mut rng, 1, 3);
        let c = random_cmat(&mut rng, 3, 3);
        let rep = ostrowski_check(&b, &c).unwrap();
        assert_eq!(rep.rank_a, 1);
        assert_eq!(rep.rank_b, 1);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn ostrowski_singular_c_rejected() {
        let b = CMat::identity(2, 2);
        let c = CMat::zeros(2, 2);
        assert!(matches!(
            ostrowski_check(&b, &c),
            Err(AnalysisError::SingularMatrix)
        ));
    }

    #[test]
    fn effective_codeword_identity_correlation() {
        let corr = crate::channel::CorrelationModel::Identity.resolve(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let blocks: Vec<CMat> = (0..2).map(|_| random_cmat(&mut rng, 2, 4)).collect();
        let rep = effective_codeword(&corr, &blocks).unwrap();
        assert_eq!(rep.rank, 4);
        assert_eq!(rep.expected_rank, 4);
        assert_eq!(rep.violations, 0);
        // sigma2 = 1 and Theta = DD^dag: the bound holds with equality.
        assert!(rep.worst_slack.abs() < 1e-9);
    }

    #[test]
    fn effective_codeword_rank_one_correlation() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let f = random_cmat(&mut rng, 2, 1);
        let corr = crate::channel::resolve_correlation_matrix(&f * f.adjoint()).unwrap();
        assert_eq!(corr.rank, 1);
        let blocks: Vec<CMat> = (0..2).map(|_| random_cmat(&mut rng, 2, 4)).collect();
        let rep = effective_codeword(&corr, &blocks).unwrap();
        assert_eq!(rep.rank, 2);
        assert_eq!(rep.expected_rank, 2);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn quick_randomized_suites() {
        let o = run_ostrowski_suite(100, 2024);
        assert_eq!(o.violations, 0, "worst slack {}", o.worst_slack);
        let e = run_effective_codeword_suite(100, 2025);
        assert_eq!(e.violations, 0, "worst slack {}", e.worst_slack);
    }

}
