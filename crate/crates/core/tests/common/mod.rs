//! Brute-force oracles shared by the integration tests. They only use the
//! closed-form step probabilities, never the library's evolution code.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Forward probabilities `(p0, p1)` for `ρ`, `α = l/L`.
pub fn forward_probs(rho: f64, l: u32, period: u32) -> (f64, f64) {
    let alpha = l as f64 / period as f64;
    let a = rho.powf((1.0 - alpha) / alpha);
    (a / (1.0 + a), 1.0 / (1.0 + rho))
}

/// Probability of stepping right from `site` at refinement `n`, phase on or off.
pub fn step_right(site: i64, on: bool, n: u32, l: u32, period: u32, rho: f64) -> f64 {
    if !on {
        return 0.5;
    }
    let (p0, p1) = forward_probs(rho, l, period);
    if site.rem_euclid((period * n) as i64) < (l * n) as i64 {
        p0
    } else {
        p1
    }
}

/// Exact law after the given phase sequence by summing over all `2^k` paths.
pub fn enumerate_paths(start: i64, phases: &[bool], n: u32, l: u32, period: u32, rho: f64) -> BTreeMap<i64, f64> {
    let k = phases.len();
    let mut law = BTreeMap::new();
    for bits in 0u64..(1 << k) {
        let (mut site, mut prob) = (start, 1.0);
        for (i, &on) in phases.iter().enumerate() {
            let right = step_right(site, on, n, l, period, rho);
            if bits >> i & 1 == 1 {
                prob *= right;
                site += 1;
            } else {
                prob *= 1.0 - right;
                site -= 1;
            }
        }
        *law.entry(site).or_insert(0.0) += prob;
    }
    law
}

pub type Matrix = Vec<Vec<f64>>;

/// One-step matrix on the ring `ℤ_size`.
pub fn ring_step(size: usize, on: bool, n: u32, l: u32, period: u32, rho: f64) -> Matrix {
    let mut m = vec![vec![0.0; size]; size];
    for i in 0..size {
        let right = step_right(i as i64, on, n, l, period, rho);
        m[i][(i + 1) % size] += right;
        m[i][(i + size - 1) % size] += 1.0 - right;
    }
    m
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let size = a.len();
    let mut c = vec![vec![0.0; size]; size];
    for i in 0..size {
        for k in 0..size {
            for j in 0..size {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Product of one-step matrices for a phase sequence.
pub fn ring_product(phases: &[bool], n: u32, l: u32, period: u32, rho: f64) -> Matrix {
    let size = (period * n) as usize;
    let mut acc: Matrix = (0..size).map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for &on in phases {
        acc = matmul(&acc, &ring_step(size, on, n, l, period, rho));
    }
    acc
}

/// Phase of every step of one cycle: `off` symmetric steps then `on` ratchet steps.
pub fn cycle_phases(off: usize, on: usize) -> Vec<bool> {
    let mut v = vec![false; off];
    v.extend(std::iter::repeat_n(true, on));
    v
}
