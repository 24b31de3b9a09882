//! Reference computations built directly from the raw tables, sharing no
//! code with the library solvers.
#![allow(dead_code)]

use algae_core::{SoftmaxPolicy, TabularMdp};

pub type Matrix = Vec<Vec<f64>>;

pub fn probs(pi: &SoftmaxPolicy) -> Vec<f64> {
    let na = pi.num_actions();
    let mut out = Vec::with_capacity(pi.logits().len());
    for row in pi.logits().chunks(na) {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = e.iter().sum();
        out.extend(e.iter().map(|v| v / z));
    }
    out
}

/// `P[(s,a), (s',a')] = T(s'|s,a) π(a'|s')`.
pub fn pair_matrix(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Matrix {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let p = probs(pi);
    let n = ns * na;
    let mut m = vec![vec![0.0; n]; n];
    for s in 0..ns {
        for a in 0..na {
            for t in 0..ns {
                let tr = mdp.transition(s, a, t);
                for b in 0..na {
                    m[s * na + a][t * na + b] = tr * p[t * na + b];
                }
            }
        }
    }
    m
}

pub fn initial_pairs(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Vec<f64> {
    let na = mdp.num_actions();
    let p = probs(pi);
    (0..mdp.num_pairs()).map(|i| mdp.initial_dist()[i / na] * p[i]).collect()
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn mat_t_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m[0].len()];
    for (row, xi) in m.iter().zip(x) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * xi;
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Matrix, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `I - γP`.
pub fn bellman_matrix(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Matrix {
    let g = mdp.discount();
    let mut m = pair_matrix(mdp, pi);
    for (i, row) in m.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v *= -g;
        }
        row[i] += 1.0;
    }
    m
}

pub fn q_solve(mdp: &TabularMdp, pi: &SoftmaxPolicy, reward: &[f64]) -> Vec<f64> {
    gauss_solve(bellman_matrix(mdp, pi), reward.to_vec())
}

/// `Σ_{t<terms} γ^t P^t r`.
pub fn neumann_q(mdp: &TabularMdp, pi: &SoftmaxPolicy, terms: usize) -> Vec<f64> {
    let p = pair_matrix(mdp, pi);
    let g = mdp.discount();
    let mut term = mdp.rewards().to_vec();
    let mut sum = term.clone();
    for _ in 1..terms {
        term = mat_vec(&p, &term).iter().map(|v| g * v).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    sum
}

/// `(1-γ) Σ_{t<terms} γ^t (Pᵀ)^t μ0π`.
pub fn visitation_series(mdp: &TabularMdp, pi: &SoftmaxPolicy, terms: usize) -> Vec<f64> {
    let p = pair_matrix(mdp, pi);
    let g = mdp.discount();
    let mut term: Vec<f64> = initial_pairs(mdp, pi).iter().map(|v| (1.0 - g) * v).collect();
    let mut sum = term.clone();
    for _ in 1..terms {
        term = mat_t_vec(&p, &term).iter().map(|v| g * v).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    sum
}

/// `d^π` by solving `(I - γPᵀ) d = (1-γ) μ0π`.
pub fn visitation_solve(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Vec<f64> {
    let a = bellman_matrix(mdp, pi);
    let n = a.len();
    let at: Matrix = (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect();
    let g = mdp.discount();
    gauss_solve(at, initial_pairs(mdp, pi).iter().map(|v| (1.0 - g) * v).collect())
}

/// Stationary pair distribution by power iteration on the lazy chain.
pub fn stationary_power(mdp: &TabularMdp, pi: &SoftmaxPolicy, iters: usize) -> Vec<f64> {
    let p = pair_matrix(mdp, pi);
    let n = p.len();
    let mut d = vec![1.0 / n as f64; n];
    for _ in 0..iters {
        let next = mat_t_vec(&p, &d);
        d = d.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
    }
    d
}

/// Softmax score-function gradient `Σ_s c(s) Σ_a ∇θ π(a|s) q(s,a)`.
pub fn score_gradient(state_weight: &[f64], pi: &SoftmaxPolicy, q: &[f64]) -> Vec<f64> {
    let na = pi.num_actions();
    let p = probs(pi);
    let mut g = vec![0.0; p.len()];
    for (s, c) in state_weight.iter().enumerate() {
        let base: f64 = (0..na).map(|b| p[s * na + b] * q[s * na + b]).sum();
        for a in 0..na {
            g[s * na + a] = c * p[s * na + a] * (q[s * na + a] - base);
        }
    }
    g
}

pub fn state_marginal(d: &[f64], na: usize) -> Vec<f64> {
    d.chunks(na).map(|c| c.iter().sum()).collect()
}

/// Quadratic-f minimizer from the explicit normal equations
/// `AᵀDA ν = AᵀD r - α(1-γ) μ0π` with `A = I - γP`.
pub fn normal_equation_nu(mdp: &TabularMdp, pi: &SoftmaxPolicy, d: &[f64], alpha: f64) -> Vec<f64> {
    let a = bellman_matrix(mdp, pi);
    let n = a.len();
    let g = mdp.discount();
    let b = initial_pairs(mdp, pi);
    let mut ata = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            ata[i][j] = (0..n).map(|k| a[k][i] * d[k] * a[k][j]).sum();
        }
    }
    let rhs: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|k| a[k][i] * d[k] * mdp.rewards()[k]).sum::<f64>() - alpha * (1.0 - g) * b[i])
        .collect();
    gauss_solve(ata, rhs)
}

/// `(B_π ν - ν)` from the explicit pair matrix.
pub fn residual(mdp: &TabularMdp, pi: &SoftmaxPolicy, nu: &[f64]) -> Vec<f64> {
    let p = pair_matrix(mdp, pi);
    let pn = mat_vec(&p, nu);
    (0..nu.len())
        .map(|i| mdp.rewards()[i] + mdp.discount() * pn[i] - nu[i])
        .collect()
}

/// Largest value of `g` on `[lo, hi]`: dense scan, then golden section
/// around the best grid point.
pub fn maximize_1d(g: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / points as f64;
    let best = (0..=points)
        .map(|i| lo + i as f64 * h)
        .max_by(|a, b| g(*a).total_cmp(&g(*b)))
        .unwrap();
    let (mut a, mut b) = (best - h, best + h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let e = a + r * (b - a);
        if g(c) > g(e) {
            b = e;
        } else {
            a = c;
        }
    }
    g(0.5 * (a + b))
}

/// Central differences of `f` over every coordinate of `x`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}
