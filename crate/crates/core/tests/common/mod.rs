//! Oracles written independently of the library's algorithms.
#![allow(dead_code)]

/// Knowledgeable optimum by LP vertex enumeration: maximize
/// `sum mu_i x_i` subject to `sum mu_i u_i x_i >= 0`, `x in [0,1]^n`. A
/// vertex has at most one fractional coordinate.
pub fn lp_optimum(mu: &[f64], u: &[f64]) -> f64 {
    let n = mu.len();
    assert!(n <= 20);
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let (mut mass, mut val) = (0.0, 0.0);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                mass += mu[i];
                val += mu[i] * u[i];
            }
        }
        if val >= -1e-12 {
            best = best.max(mass);
            // top up with one fractional state outside the mask
            for j in 0..n {
                if mask >> j & 1 == 0 && u[j] < 0.0 {
                    let x = (val / (-u[j] * mu[j])).min(1.0);
                    best = best.max(mass + x * mu[j]);
                }
            }
        }
    }
    best
}

/// Composite Gauss-Legendre (5 nodes) of `f` on `[a, b]` with `k` panels.
pub fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    const X: [f64; 5] =
        [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / k as f64;
    let mut s = 0.0;
    for p in 0..k {
        let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in X.iter().zip(W) {
            s += w * r * f(c + r * x);
        }
    }
    s
}

/// Angle-weighted mass of the boundary of the triangle
/// `(0,0), (1,0), (1/2, sqrt3/2)` inside `{P : f(P) >= 0}`, integrated over
/// `steps` equal angles around the centroid by direct ray shooting.
pub fn ternary_mass_by_rays(f: impl Fn(f64, f64) -> f64, steps: usize) -> f64 {
    let s3 = 3f64.sqrt();
    let c = (0.5, s3 / 6.0);
    let v = [(0.0, 0.0), (1.0, 0.0), (0.5, s3 / 2.0)];
    let mut hit = 0usize;
    for k in 0..steps {
        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / steps as f64;
        let d = (th.cos(), th.sin());
        let mut best = f64::INFINITY;
        for e in 0..3 {
            let (a, b) = (v[e], v[(e + 1) % 3]);
            // solve c + s d = a + r (b - a)
            let (ex, ey) = (b.0 - a.0, b.1 - a.1);
            let det = d.0 * (-ey) - d.1 * (-ex);
            if det.abs() < 1e-15 {
                continue;
            }
            let (rx, ry) = (a.0 - c.0, a.1 - c.1);
            let s = (rx * (-ey) - ry * (-ex)) / det;
            let r = (d.0 * ry - d.1 * rx) / det;
            if s > 0.0 && (0.0..=1.0).contains(&r) {
                best = best.min(s);
            }
        }
        if f(c.0 + best * d.0, c.1 + best * d.1) >= 0.0 {
            hit += 1;
        }
    }
    hit as f64 / steps as f64
}

/// `C(n, k)` as an exact big integer.
pub fn binom(n: u64, k: u64) -> num_bigint::BigInt {
    let mut r = num_bigint::BigInt::from(1u8);
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}
