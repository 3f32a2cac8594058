//! Shared numeric primitives: normal CDF/quantile, the binary KL divergence,
//! exact binomial tail sums in log space, and seeded substream derivation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf;
use statrs::function::gamma::ln_gamma;

/// Complementary error function, rational-approximation evaluation with
/// relative accuracy near machine precision over the whole real line.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        // Small arguments: erfc = 1 - erf with a direct erf approximation.
        const A: [f64; 5] = [
            3.161_123_743_870_565_6e0,
            1.138_641_541_510_501_56e2,
            3.774_852_376_853_020_2e2,
            3.209_377_589_138_469_47e3,
            1.857_777_061_846_031_53e-1,
        ];
        const B: [f64; 4] = [
            2.360_129_095_234_412_09e1,
            2.440_246_379_344_441_73e2,
            1.282_616_526_077_372_28e3,
            2.844_236_833_439_170_62e3,
        ];
        let z = y * y;
        let mut num = A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + A[i]) * z;
            den = (den + B[i]) * z;
        }
        return 1.0 - x * (num + A[3]) / (den + B[3]);
    } else if y <= 4.0 {
        const C: [f64; 9] = [
            5.641_884_969_886_700_9e-1,
            8.883_149_794_388_375_9e0,
            6.611_919_063_714_163e1,
            2.986_351_381_974_001_3e2,
            8.819_522_212_417_69e2,
            1.712_047_612_634_070_6e3,
            2.051_078_377_826_071_5e3,
            1.230_339_354_797_997_2e3,
            2.153_115_354_744_038_3e-8,
        ];
        const D: [f64; 8] = [
            1.574_492_611_070_983_5e1,
            1.176_939_508_913_125e2,
            5.371_811_018_620_098_6e2,
            1.621_389_574_566_690_3e3,
            3.290_799_235_733_459_7e3,
            4.362_619_090_143_247e3,
            3.439_367_674_143_721_6e3,
            1.230_339_354_803_749_4e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        exp_scaled(y) * (num + C[7]) / (den + D[7])
    } else {
        const P: [f64; 6] = [
            3.053_266_349_612_323_4e-1,
            3.603_448_999_498_044_4e-1,
            1.257_817_261_112_292_5e-1,
            1.608_378_514_874_227_7e-2,
            6.587_491_615_298_378e-4,
            1.631_538_713_730_209_8e-2,
        ];
        const Q: [f64; 5] = [
            2.568_520_192_289_822_4e0,
            1.872_952_849_923_460_4e0,
            5.279_051_029_514_284e-1,
            6.051_834_131_244_131_9e-2,
            2.335_204_976_268_691_8e-3,
        ];
        const INV_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;
        let z = 1.0 / (y * y);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let r = z * (num + P[4]) / (den + Q[4]);
        exp_scaled(y) * (INV_SQRT_PI - r) / y
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// `exp(-y^2)` with the argument split to limit rounding in the huge-exponent
/// regime.
fn exp_scaled(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Standard normal CDF, evaluated through the complementary error function so
/// the deep tail keeps high relative accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Phi(x)`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile function: library initial guess polished by one
/// Newton step against the high-accuracy CDF.
pub fn std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    let pdf = std_normal_pdf(x);
    if pdf > 0.0 {
        x -= (std_normal_cdf(x) - p) / pdf;
    }
    x
}

/// Binary KL divergence `h1(a, b) = a log(a/b) + (1-a) log((1-a)/(1-b))`,
/// with the conventions `0 log 0 = 0` and `h1(a, a) = 0`.
pub fn h1(a: f64, b: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a));
    debug_assert!(b > 0.0 && b < 1.0);
    if a == b {
        return 0.0;
    }
    let first = if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    let second = if a == 1.0 {
        0.0
    } else {
        (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
    };
    first + second
}

fn ln_binom_coeff(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `log P(Bin(n, p) <= k)` by direct summation of exact terms in log space.
/// No normal approximation is used anywhere.
pub fn log_binom_cdf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let k = k.min(n);
    let lp = p.ln();
    let lq = (1.0 - p).ln();
    // Incremental log-sum-exp over the pmf terms.
    let mut acc = f64::NEG_INFINITY;
    for i in 0..=k {
        let term = ln_binom_coeff(n, i) + i as f64 * lp + (n - i) as f64 * lq;
        acc = log_add_exp(acc, term);
    }
    acc.min(0.0)
}

/// Full table `log P(Bin(n, p) <= k)` for `k = 0..=n`, built in one
/// incremental pass so repeated tail lookups at the same `(n, p)` are O(1).
pub fn log_binom_cdf_table(n: u64, p: f64) -> Vec<f64> {
    debug_assert!(p > 0.0 && p < 1.0);
    let odds = (p / (1.0 - p)).ln();
    let mut table = Vec::with_capacity(n as usize + 1);
    let mut ln_pmf = n as f64 * (1.0 - p).ln();
    let mut acc = ln_pmf;
    table.push(acc.min(0.0));
    for k in 1..=n {
        ln_pmf += ((n - k + 1) as f64 / k as f64).ln() + odds;
        acc = log_add_exp(acc, ln_pmf);
        table.push(acc.min(0.0));
    }
    table
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> (f64, f64) {
    let mut x1 = hi - GOLDEN_RATIO * (hi - lo);
    let mut x2 = lo + GOLDEN_RATIO * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN_RATIO * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN_RATIO * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent ChaCha substream from a master seed and two stream
/// labels (typically trial and example indices). The derivation is a pure
/// function of its arguments, so trial-level parallelism reproduces bitwise
/// identical draws regardless of thread count.
pub fn substream(master_seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ 0x6a09_e667_f3bc_c908;
    let mut label_a = a.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut label_b = b.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    state = state.wrapping_add(splitmix64(&mut label_a));
    state ^= splitmix64(&mut label_b);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
