//! Straight-from-the-definition reference implementations of the three
//! filters, used as independent oracles. They share no code with the
//! library: each is a direct transcription of the filter's formula over a
//! flat slice of window samples.

pub type Sample = [u8; 3];

fn as_f64(p: Sample) -> [f64; 3] {
    [p[0] as f64, p[1] as f64, p[2] as f64]
}

/// Basic vector directional filter: the sample minimizing the accumulated
/// angle to all samples. Zero-length vectors contribute no angle; the
/// cosine is clamped into [0, 1]; ties resolve to the lowest index.
pub fn bvdf(window: &[Sample]) -> Sample {
    let n = window.len();
    let v: Vec<[f64; 3]> = window.iter().map(|&p| as_f64(p)).collect();
    let norms: Vec<f64> = v
        .iter()
        .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        .collect();

    let mut best_index = 0;
    let mut best_sum = f64::INFINITY;
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            let mut cosine =
                (v[i][0] * v[j][0] + v[i][1] * v[j][1] + v[i][2] * v[j][2]) / (norms[i] * norms[j]);
            if cosine > 1.0 {
                cosine = 1.0;
            }
            if cosine < 0.0 {
                cosine = 0.0;
            }
            sum += cosine.acos();
        }
        if sum < best_sum {
            best_sum = sum;
            best_index = i;
        }
    }
    window[best_index]
}

/// Which kernel the reference AMNF uses.
#[derive(Clone, Copy)]
pub enum Kernel {
    Exponential,
    Gaussian,
}

/// Adaptive multichannel non-parametric filter: kernel-density weighted
/// mean with per-sample bandwidths `h_i = n^(-kappa/3) * sum_j |x_i - x_j|_1`,
/// weights `K(d(c, i) / h_i) / h_i^3`, rounded half away from zero.
pub fn amnf(window: &[Sample], kernel: Kernel, kappa: f64) -> Sample {
    let n = window.len();
    let center = (n - 1) / 2;
    let v: Vec<[f64; 3]> = window.iter().map(|&p| as_f64(p)).collect();
    let prefactor = (n as f64).powf(-kappa / 3.0);

    let l1 = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        (a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()
    };

    let mut bandwidth = vec![0.0; n];
    for i in 0..n {
        let mut spread = 0.0;
        for j in 0..n {
            spread += l1(&v[i], &v[j]);
        }
        bandwidth[i] = prefactor * spread;
        if bandwidth[i] == 0.0 {
            return window[center];
        }
    }

    let mut weight_sum = 0.0;
    let mut acc = [0.0f64; 3];
    for i in 0..n {
        let h = bandwidth[i];
        let u = match kernel {
            Kernel::Exponential => l1(&v[center], &v[i]) / h,
            Kernel::Gaussian => {
                let d0 = v[center][0] - v[i][0];
                let d1 = v[center][1] - v[i][1];
                let d2 = v[center][2] - v[i][2];
                0.5 * (d0 * d0 + d1 * d1 + d2 * d2) / (h * h)
            }
        };
        let w = (-u).exp() / (h * h * h);
        weight_sum += w;
        acc[0] += w * v[i][0];
        acc[1] += w * v[i][1];
        acc[2] += w * v[i][2];
    }
    if weight_sum == 0.0 {
        return window[center];
    }

    let mut out = [0u8; 3];
    for ch in 0..3 {
        out[ch] = (acc[ch] / weight_sum).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Entropy vector median filter: normalized distance-to-mean contrasts,
/// entropy threshold, and a Euclidean vector median when the center's
/// contrast exceeds the threshold.
pub fn evmf(window: &[Sample]) -> Sample {
    let n = window.len();
    let center = (n - 1) / 2;
    let v: Vec<[f64; 3]> = window.iter().map(|&p| as_f64(p)).collect();

    let mut mean = [0.0f64; 3];
    for x in &v {
        mean[0] += x[0];
        mean[1] += x[1];
        mean[2] += x[2];
    }
    mean = [mean[0] / n as f64, mean[1] / n as f64, mean[2] / n as f64];

    let distance = |x: &[f64; 3]| -> f64 {
        let d0 = x[0] - mean[0];
        let d1 = x[1] - mean[1];
        let d2 = x[2] - mean[2];
        (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
    };
    let d: Vec<f64> = v.iter().map(distance).collect();
    let mut total = 0.0;
    for &di in &d {
        total += di;
    }
    if total == 0.0 {
        return window[center];
    }

    let p: Vec<f64> = d.iter().map(|&di| di / total).collect();
    let entropy = |z: f64| if z == 0.0 { 0.0 } else { z * z.ln() };
    let mut entropy_sum = 0.0;
    for &pi in &p {
        entropy_sum += entropy(pi);
    }
    let threshold = if entropy_sum == 0.0 {
        0.0
    } else {
        entropy(p[center]) / entropy_sum
    };

    if p[center] > threshold {
        // Euclidean vector median, ties to the lowest index
        let mut best_index = 0;
        let mut best_sum = f64::INFINITY;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let d0 = v[i][0] - v[j][0];
                let d1 = v[i][1] - v[j][1];
                let d2 = v[i][2] - v[j][2];
                sum += (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
            }
            if sum < best_sum {
                best_sum = sum;
                best_index = i;
            }
        }
        window[best_index]
    } else {
        window[center]
    }
}
