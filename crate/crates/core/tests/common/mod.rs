//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the library code it is used to check.

#![allow(dead_code)]

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use statrs::function::gamma::ln_gamma;

// ---------------------------------------------------------------- geometry

/// `(e_x, e_y, d)` by solving `[bx by n]·c = tip - entry`, with the plane
/// basis built from cross products.
pub fn oracle_entry_error(
    tip: Vector3<f64>,
    entry: Vector3<f64>,
    direction: Vector3<f64>,
    frame_x: Vector3<f64>,
) -> (f64, f64, f64) {
    let n = direction.normalize();
    let by = n.cross(&frame_x).normalize();
    let bx = by.cross(&n);
    let m = Matrix3::from_columns(&[bx, by, n]);
    let c = m.lu().solve(&(tip - entry)).expect("orthonormal basis");
    (c.x, c.y, c.x.hypot(c.y))
}

fn wrap_deg(a: f64) -> f64 {
    let mut a = a % 360.0;
    if a > 180.0 {
        a -= 360.0;
    } else if a <= -180.0 {
        a += 360.0;
    }
    a
}

/// Polar angle of `v` in the plane `(u, w)`, degrees.
fn polar(v: &Vector3<f64>, u: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
    v.dot(w).atan2(v.dot(u)).to_degrees()
}

/// `(e_phi, e_delta, theta)` as differences of polar angles of the projected
/// axes.
pub fn oracle_angular_error(
    tool_axis: Vector3<f64>,
    direction: Vector3<f64>,
    fx: Vector3<f64>,
    fy: Vector3<f64>,
    fz: Vector3<f64>,
) -> (f64, f64, f64) {
    let e_phi = wrap_deg(polar(&tool_axis, &fx, &fy) - polar(&direction, &fx, &fy));
    let e_delta = wrap_deg(polar(&tool_axis, &fy, &fz) - polar(&direction, &fy, &fz));
    // half-angle chord form, independent of acos
    let (a, b) = (tool_axis.normalize(), direction.normalize());
    let theta = (2.0 * ((a - b).norm() / 2.0).asin()).to_degrees();
    (e_phi, e_delta, theta)
}

pub fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    // uniform via normalized Gaussian-ish 4-vector
    loop {
        let q = nalgebra::Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    random_rotation(rng) * Vector3::z()
}

// ------------------------------------------------------------------ stats

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance from all pairwise squared differences.
pub fn pairwise_variance(v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += (v[i] - v[j]).powi(2);
        }
    }
    s / (n * (n - 1)) as f64
}

fn t_density(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Composite 20-point Gauss-Legendre on `[a, b]` split into `panels`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    // nodes/weights on [-1, 1], 10 positive nodes of the 20-point rule
    #[allow(clippy::excessive_precision)]
    const X: [f64; 10] = [
        0.076_526_521_133_497_33,
        0.227_785_851_141_645_08,
        0.373_706_088_715_419_56,
        0.510_867_001_950_827_1,
        0.636_053_680_726_515,
        0.746_331_906_460_150_8,
        0.839_116_971_822_218_8,
        0.912_234_428_251_325_9,
        0.963_971_927_277_913_8,
        0.993_128_599_185_094_9,
    ];
    const W: [f64; 10] = [
        0.152_753_387_130_725_85,
        0.149_172_986_472_603_75,
        0.142_096_109_318_382_05,
        0.131_688_638_449_176_63,
        0.118_194_531_961_518_42,
        0.101_930_119_817_240_44,
        0.083_276_741_576_704_75,
        0.062_672_048_334_109_06,
        0.040_601_429_800_386_94,
        0.017_614_007_139_152_12,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + h / 2.0;
        let half = h / 2.0;
        for (x, w) in X.iter().zip(W) {
            total += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total
}

/// Two-sided p-value by integrating the t density from 0 to |t|.
pub fn oracle_t_two_sided(t: f64, df: f64) -> f64 {
    let inner = gauss_legendre(|x| t_density(x, df), 0.0, t.abs(), 200);
    (1.0 - 2.0 * inner).max(0.0)
}

/// `P(T > t)` by integration.
pub fn oracle_t_sf(t: f64, df: f64) -> f64 {
    let inner = gauss_legendre(|x| t_density(x, df), 0.0, t.abs(), 200);
    if t >= 0.0 {
        0.5 - inner
    } else {
        0.5 + inner
    }
}

/// Welch `(t, df, p)` from first principles.
pub fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (pairwise_variance(a) / na, pairwise_variance(b) / nb);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va.powi(2) / (na - 1.0) + vb.powi(2) / (nb - 1.0));
    (t, df, oracle_t_two_sided(t, df))
}

pub fn oracle_paired(before: &[f64], after: &[f64]) -> (f64, f64, f64) {
    let d: Vec<f64> = after.iter().zip(before).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let t = mean(&d) / (pairwise_variance(&d) / n).sqrt();
    (t, n - 1.0, oracle_t_two_sided(t, n - 1.0))
}

/// Welch TOST p-values `(p_lower, p_upper)`.
pub fn oracle_tost(a: &[f64], b: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (pairwise_variance(a) / na, pairwise_variance(b) / nb);
    let se = (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va.powi(2) / (na - 1.0) + vb.powi(2) / (nb - 1.0));
    let diff = mean(a) - mean(b);
    (oracle_t_sf((diff + lo) / se, df), oracle_t_sf((hi - diff) / se, df))
}

// ------------------------------------------------------------------ audio

/// Hann-windowed magnitude spectrum of the first `n` samples (zero-padded).
pub fn spectrum(samples: &[f32], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|i| {
            let s = samples.get(i).copied().unwrap_or(0.0) as f64;
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
            Complex::new(s * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2].iter().map(|c| c.norm()).collect()
}

pub fn peak_bin(spec: &[f64], from_bin: usize) -> usize {
    (from_bin..spec.len())
        .max_by(|&a, &b| spec[a].total_cmp(&spec[b]))
        .expect("non-empty")
}

/// Largest bin within ±`radius` of `bin`.
pub fn local_peak(spec: &[f64], bin: usize, radius: usize) -> usize {
    (bin.saturating_sub(radius)..=(bin + radius).min(spec.len() - 1))
        .max_by(|&a, &b| spec[a].total_cmp(&spec[b]))
        .expect("non-empty")
}

/// Whether `bin` is a strict local maximum over ±`width` bins.
pub fn is_local_max(spec: &[f64], bin: usize, width: usize) -> bool {
    let lo = bin.saturating_sub(width);
    let hi = (bin + width).min(spec.len() - 1);
    (lo..=hi).all(|i| i == bin || spec[i] < spec[bin])
}

/// Onsets: sample indices where the 1 ms RMS rises above `on` × the global
/// RMS maximum after having been below `off` × maximum.
pub fn detect_onsets(samples: &[f32], sample_rate: u32, on: f64, off: f64) -> Vec<usize> {
    let hop = (sample_rate / 1000).max(1) as usize;
    let rms: Vec<f64> = samples
        .chunks(hop)
        .map(|c| (c.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / c.len() as f64).sqrt())
        .collect();
    let max = rms.iter().cloned().fold(0.0, f64::max);
    let mut armed = true;
    let mut onsets = Vec::new();
    for (i, &r) in rms.iter().enumerate() {
        if armed && r > on * max {
            onsets.push(i * hop);
            armed = false;
        } else if !armed && r < off * max {
            armed = true;
        }
    }
    onsets
}

/// Dominant frequency of a segment, with parabolic peak interpolation.
pub fn dominant_hz(samples: &[f32], sample_rate: u32, n: usize) -> f64 {
    let spec = spectrum(samples, n);
    let k = peak_bin(&spec, 2);
    let (a, b, c) = (spec[k - 1].ln(), spec[k].ln(), spec[k + 1].ln());
    let offset = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + offset) * sample_rate as f64 / n as f64
}
