//! Small numeric helpers shared across modules.

use alloc::vec::Vec;

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7). `sorted` must be ascending and non-empty.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub(crate) fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean (sample standard deviation over sqrt(n)).
pub(crate) fn std_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    libm::sqrt(var / n as f64)
}

/// Moment coefficient of skewness `g1`.
pub(crate) fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = mean(values);
    let m2 = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - m) * (v - m) * (v - m)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    m3 / libm::pow(m2, 1.5)
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

// 15-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    0.0,
    0.201_194_093_997_434_5,
    0.394_151_347_077_563_4,
    0.570_972_172_608_538_8,
    0.724_417_731_360_17,
    0.848_206_583_410_427_2,
    0.937_273_392_400_706,
    0.987_992_518_020_485_4,
];
const GL_WEIGHTS: [f64; 8] = [
    0.202_578_241_925_561_3,
    0.198_431_485_327_111_6,
    0.186_161_000_015_562_2,
    0.166_269_205_816_993_9,
    0.139_570_677_926_154_3,
    0.107_159_220_467_171_9,
    0.070_366_047_488_108_1,
    0.030_753_241_996_117_3,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = GL_WEIGHTS[0] * f(mid);
    for k in 1..GL_NODES.len() {
        let dx = half * GL_NODES[k];
        sum += GL_WEIGHTS[k] * (f(mid - dx) + f(mid + dx));
    }
    sum * half
}

/// Adaptive Gauss–Legendre quadrature of `f` over `[a, b]` to relative
/// tolerance `rel_tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gauss_legendre(f, a, mid);
        let right = gauss_legendre(f, mid, b);
        let both = left + right;
        if depth == 0 || libm::fabs(both - whole) <= tol * libm::fabs(both).max(f64::MIN_POSITIVE) {
            return both;
        }
        recurse(f, a, mid, left, tol, depth - 1) + recurse(f, mid, b, right, tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gauss_legendre(&f, a, b);
    recurse(&f, a, b, whole, rel_tol, 40)
}
