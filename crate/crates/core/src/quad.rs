//! Gauss–Legendre rules and Chebyshev interpolation on `[0, 1]`.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// First-kind Chebyshev points on `[0, 1]` (ascending) with barycentric weights.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    pub fn new(p: usize) -> Self {
        let mut nodes = Vec::with_capacity(p);
        let mut weights = Vec::with_capacity(p);
        for j in 0..p {
            let a = (2 * j + 1) as f64 * PI / (2 * p) as f64;
            nodes.push(0.5 * (1.0 - a.cos()));
            weights.push(if j % 2 == 0 { a.sin() } else { -a.sin() });
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Row `r` with `f(u) = Σ_j r_j f_j`.
    pub fn row(&self, u: f64, out: &mut [f64]) {
        if let Some(j) = self.nodes.iter().position(|&x| x == u) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
        let mut s = 0.0;
        for (j, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let t = w / (u - x);
            out[j] = t;
            s += t;
        }
        out.iter_mut().for_each(|v| *v /= s);
    }

    pub fn eval(&self, values: &[f64], u: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = u - x;
            if d == 0.0 {
                return f;
            }
            let t = w / d;
            num += t * f;
            den += t;
        }
        num / den
    }
}
