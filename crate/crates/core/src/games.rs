//! Parrondo games A and B on the cycle `ℤ_L`.
//!
//! Game A is a fair coin toss. Game B moves forward with probability `p₀`
//! at states `j mod L < l` and `p₁` elsewhere. The pair is tied to a single
//! parameter `ρ ∈ (0, 1)` so that detailed balance holds and B is
//! asymptotically fair; mixing or alternating the two fair games then wins
//! when `α = l/L < 1/2` and loses when `α > 1/2`.

use nalgebra::DMatrix;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::linalg;

/// Forward probabilities `(p₀, p₁)` for a given `ρ`:
/// `p₀ = ρ^((1−α)/α) / (1 + ρ^((1−α)/α))`, `p₁ = 1/(1 + ρ)`.
pub fn p0_p1_from_rho(rho: f64, l: u32, period: u32) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::RhoOutOfRange(rho));
    }
    check_shape(l, period)?;
    Ok(p0_p1_unchecked(rho, l, period))
}

/// Same formulas, but `ρ = 1` (both probabilities 1/2) is allowed.
pub(crate) fn p0_p1_unchecked(rho: f64, l: u32, period: u32) -> (f64, f64) {
    let exponent = (period - l) as f64 / l as f64;
    let r = rho.powf(exponent);
    (r / (1.0 + r), 1.0 / (1.0 + rho))
}

/// Inverts the fairness identity for `p₁` given `p₀`:
/// `p₁ = 1 / (1 + (p₀/(1 − p₀))^(α/(1−α)))`.
pub fn solve_p1_from_p0(p0: f64, alpha: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 0.5) {
        return Err(Error::P0OutOfRange(p0));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(1.0 / (1.0 + (p0 / (1.0 - p0)).powf(alpha / (1.0 - alpha))))
}

fn check_shape(l: u32, period: u32) -> Result<()> {
    if l == 0 || l >= period || l.gcd(&period) != 1 {
        return Err(Error::InvalidParams(format!(
            "need coprime 0 < l < L, got l={l}, L={period}"
        )));
    }
    Ok(())
}

/// Game B with its `ρ`-parameterised forward probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct GameB {
    l: u32,
    period: u32,
    rho: f64,
    p0: f64,
    p1: f64,
}

impl GameB {
    pub fn new(rho: f64, l: u32, period: u32) -> Result<Self> {
        let (p0, p1) = p0_p1_from_rho(rho, l, period)?;
        Ok(Self { l, period, rho, p0, p1 })
    }

    /// Parrondo's original game: `ρ = 1/3`, `α = 1/3`, so `p₀ = 1/10`, `p₁ = 3/4`.
    pub fn classical() -> Self {
        Self::new(1.0 / 3.0, 1, 3).expect("valid constants")
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn alpha(&self) -> f64 {
        self.l as f64 / self.period as f64
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn forward(&self, state: usize) -> f64 {
        if (state as u32) % self.period < self.l {
            self.p0
        } else {
            self.p1
        }
    }

    /// Relative defect of `(1−p₀)^l (1−p₁)^(L−l) = p₀^l p₁^(L−l)`.
    pub fn fairness_residual(&self) -> f64 {
        let (l, k) = (self.l as f64, (self.period - self.l) as f64);
        // compare in log space to avoid underflow for long periods
        let lhs = l * (1.0 - self.p0).ln() + k * (1.0 - self.p1).ln();
        let rhs = l * self.p0.ln() + k * self.p1.ln();
        (lhs - rhs).exp_m1().abs()
    }

    pub fn chain(&self) -> CycleChain {
        CycleChain { forward: (0..self.period as usize).map(|j| self.forward(j)).collect() }
    }

    /// Invariant measure from the closed-form solution of the detailed
    /// balance equations, normalised to a probability vector.
    pub fn invariant_measure(&self) -> Vec<f64> {
        let (l, period) = (self.l as i32, self.period as i32);
        let e = (period - l) as f64 / l as f64;
        let rho = self.rho;
        let tail = (1.0 + rho) / (1.0 + rho.powf(e));
        let mut pi: Vec<f64> = (0..period)
            .map(|j| {
                if j < l {
                    rho.powf(j as f64 * e)
                } else {
                    rho.powi((period - l) - (j - l + 1)) * tail
                }
            })
            .collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
        pi
    }

    /// Largest absolute defect over the individual detailed-balance
    /// equations `π(j)P(j, j+1) = π(j+1)P(j+1, j)`.
    pub fn detailed_balance_residual(&self, pi: &[f64]) -> f64 {
        let size = self.period as usize;
        (0..size)
            .map(|j| {
                let next = (j + 1) % size;
                (pi[j] * self.forward(j) - pi[next] * (1.0 - self.forward(next))).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Nearest-neighbour walk on `ℤ_size` with state-dependent forward
/// probabilities; the backward probability is the complement.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleChain {
    forward: Vec<f64>,
}

impl CycleChain {
    pub fn new(forward: Vec<f64>) -> Result<Self> {
        if forward.len() < 2 {
            return Err(Error::InvalidParams("a cycle chain needs at least 2 states".into()));
        }
        if let Some(p) = forward.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidParams(format!(
                "forward probabilities must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self { forward })
    }

    /// Game A on `ℤ_size`.
    pub fn fair_coin(size: usize) -> Self {
        Self { forward: vec![0.5; size] }
    }

    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[f64] {
        &self.forward
    }

    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut p = DMatrix::zeros(n, n);
        for (j, &f) in self.forward.iter().enumerate() {
            p[(j, (j + 1) % n)] += f;
            p[(j, (j + n - 1) % n)] += 1.0 - f;
        }
        p
    }

    /// Stationary distribution by a direct linear solve (no detailed balance
    /// assumed).
    pub fn stationary(&self) -> Vec<f64> {
        linalg::stationary_direct(&self.transition_matrix())
            .expect("irreducible cycle chains have a unique stationary law")
    }

    /// Expected one-step profit `Σ ν(j)(2p(j) − 1)` under the stationary law.
    pub fn mean_profit(&self) -> f64 {
        expected_increment(&self.stationary(), &self.forward)
    }
}

fn expected_increment(law: &[f64], forward: &[f64]) -> f64 {
    law.iter().zip(forward).map(|(m, f)| m * (2.0 * f - 1.0)).sum()
}

/// Stationary profit of game B on its own.
pub fn mean_profit_single(chain: &CycleChain) -> f64 {
    chain.mean_profit()
}

/// Stationary profit per step of the random mixture `cA + (1 − c)B`.
pub fn mean_profit_mixture(c: f64, game: &GameB) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::MixOutOfRange(c));
    }
    let forward = (0..game.period() as usize)
        .map(|j| c / 2.0 + (1.0 - c) * game.forward(j))
        .collect();
    Ok(CycleChain::new(forward)?.mean_profit())
}

/// Expected profit over one period of the deterministic pattern `AʳBˢ`,
/// starting from the stationary law of the period chain.
pub fn mean_profit_pattern(r: u32, s: u32, game: &GameB) -> Result<f64> {
    if r < 1 || s < 1 {
        return Err(Error::InvalidPattern { r, s });
    }
    let a = CycleChain::fair_coin(game.period() as usize);
    let b = game.chain();
    let (pa, pb) = (a.transition_matrix(), b.transition_matrix());
    let sequence: Vec<(&CycleChain, &DMatrix<f64>)> = std::iter::repeat_n((&a, &pa), r as usize)
        .chain(std::iter::repeat_n((&b, &pb), s as usize))
        .collect();

    let mut period = DMatrix::identity(a.size(), a.size());
    for (_, step) in &sequence {
        period *= *step;
    }
    let start = linalg::stationary_direct(&period)
        .ok_or(Error::StationaryFailed { residual: f64::NAN })?;

    let mut law = nalgebra::DVector::from_vec(start);
    let mut profit = 0.0;
    for (chain, step) in &sequence {
        profit += expected_increment(law.as_slice(), chain.forward());
        law = step.tr_mul(&law);
    }
    Ok(profit)
}
