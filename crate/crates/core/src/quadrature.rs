//! Quadrature and interpolation on sampled (possibly non-uniform) grids.

/// Weights `w` with `∫_a^b p(t) dt = Σ w_j p(t_j)` for every quadratic `p`,
/// given three distinct nodes.
pub fn quad_weights(nodes: [f64; 3], a: f64, b: f64) -> [f64; 3] {
    // shift to `a` for conditioning
    let s = [nodes[0] - a, nodes[1] - a, nodes[2] - a];
    let len = b - a;
    let mut w = [0.0; 3];
    for j in 0..3 {
        let (k, l) = ((j + 1) % 3, (j + 2) % 3);
        let denom = (s[j] - s[k]) * (s[j] - s[l]);
        // (x - s_k)(x - s_l) = x² - (s_k + s_l) x + s_k s_l
        let integral = len.powi(3) / 3.0 - (s[k] + s[l]) * len * len / 2.0 + s[k] * s[l] * len;
        w[j] = integral / denom;
    }
    w
}

/// Cumulative integral `∫_{t_0}^{t_i} f` at every sample. Even-indexed
/// samples use composite Simpson over consecutive pairs of intervals; odd
/// ones add a quadratic rule on the last interval.
pub fn cumulative(ts: &[f64], fs: &[f64]) -> Vec<f64> {
    assert_eq!(ts.len(), fs.len());
    let n = ts.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (ts[1] - ts[0]) * (fs[0] + fs[1]);
        return out;
    }
    let mut i = 2;
    while i < n {
        let w = quad_weights([ts[i - 2], ts[i - 1], ts[i]], ts[i - 2], ts[i]);
        out[i] = out[i - 2] + w[0] * fs[i - 2] + w[1] * fs[i - 1] + w[2] * fs[i];
        i += 2;
    }
    let mut i = 1;
    while i < n {
        let (a, b) = (ts[i - 1], ts[i]);
        let idx = if i + 1 < n { [i - 1, i, i + 1] } else { [i - 2, i - 1, i] };
        let w = quad_weights([ts[idx[0]], ts[idx[1]], ts[idx[2]]], a, b);
        out[i] = out[i - 1] + w[0] * fs[idx[0]] + w[1] * fs[idx[1]] + w[2] * fs[idx[2]];
        i += 2;
    }
    out
}

/// Value at `t` of the quadratic through the three samples nearest to `t`.
/// `ts` must be increasing with at least three entries; `t` is clamped.
pub fn interpolate(ts: &[f64], fs: &[f64], t: f64) -> f64 {
    let n = ts.len();
    assert!(n >= 3 && fs.len() == n);
    let t = t.clamp(ts[0], ts[n - 1]);
    let j = ts.partition_point(|&x| x < t).clamp(1, n - 2);
    let idx = [j - 1, j, j + 1];
    let mut v = 0.0;
    for a in 0..3 {
        let mut l = 1.0;
        for b in 0..3 {
            if a != b {
                l *= (t - ts[idx[b]]) / (ts[idx[a]] - ts[idx[b]]);
            }
        }
        v += l * fs[idx[a]];
    }
    v
}

/// Integral over `[t_0, t]` for `t` inside the sampled range.
pub fn integral_to(ts: &[f64], fs: &[f64], cum: &[f64], t: f64) -> f64 {
    let n = ts.len();
    let k = ts.partition_point(|&x| x <= t);
    if k == 0 {
        return 0.0;
    }
    let i = k - 1;
    if i == n - 1 || t == ts[i] {
        return cum[i];
    }
    let idx = if i + 2 < n {
        [i, i + 1, i + 2]
    } else {
        [i - 1, i, i + 1]
    };
    let w = quad_weights([ts[idx[0]], ts[idx[1]], ts[idx[2]]], ts[i], t);
    cum[i] + w[0] * fs[idx[0]] + w[1] * fs[idx[1]] + w[2] * fs[idx[2]]
}
