//! The continuous model: sawtooth potential, ratchet drift and the invariant
//! density of the (wrapped) Brownian ratchet.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Parameters of the flashing Brownian ratchet.
///
/// The asymmetry is `α = l / L` with `l` and `L` coprime. The drift strength
/// is carried both as `λ` (the lattice scaling parameter) and as
/// `γ = λ(1 − α)/2`; the two are always kept consistent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatchetParams {
    l: u32,
    period: u32,
    lambda: f64,
    gamma: f64,
    tau1: Rational,
    tau2: Rational,
}

impl RatchetParams {
    /// Builds the parameters from `λ`. `λ = 0` is accepted and switches the
    /// ratchet off entirely.
    pub fn new(l: u32, period: u32, lambda: f64, tau1: Rational, tau2: Rational) -> Result<Self> {
        validate_shape(l, period)?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !tau1.is_positive() || !tau2.is_positive() {
            return Err(Error::InvalidParams(format!(
                "phase durations must be positive, got tau1={tau1}, tau2={tau2}"
            )));
        }
        let alpha = l as f64 / period as f64;
        Ok(Self { l, period, lambda, gamma: lambda * (1.0 - alpha) / 2.0, tau1, tau2 })
    }

    /// Builds the parameters from the drift strength `γ` instead of `λ`.
    pub fn with_gamma(l: u32, period: u32, gamma: f64, tau1: Rational, tau2: Rational) -> Result<Self> {
        validate_shape(l, period)?;
        let alpha = l as f64 / period as f64;
        let mut params = Self::new(l, period, 2.0 * gamma / (1.0 - alpha), tau1, tau2)?;
        params.gamma = gamma;
        Ok(params)
    }

    /// Same model with a different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.l, self.period, lambda, self.tau1, self.tau2)
    }

    /// Same model with different phase durations.
    pub fn with_taus(&self, tau1: Rational, tau2: Rational) -> Result<Self> {
        Self::new(self.l, self.period, self.lambda, tau1, tau2)
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// The period `L` of the potential.
    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn alpha(&self) -> Rational {
        Rational::new(self.l as i64, self.period as i64).expect("period is positive")
    }

    pub fn alpha_f64(&self) -> f64 {
        self.l as f64 / self.period as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau1(&self) -> Rational {
        self.tau1
    }

    pub fn tau2(&self) -> Rational {
        self.tau2
    }

    /// `α = 1/2` gives a symmetric tooth and no directed motion. It is
    /// allowed, but callers may want to warn about it.
    pub fn is_symmetric(&self) -> bool {
        2 * self.l == self.period
    }

    /// Location `αL` of the potential maximum in `[0, L)`.
    pub fn peak_position(&self) -> f64 {
        self.l as f64
    }

    /// Asymmetric sawtooth potential: `x/α` on `[0, αL]`, `(L − x)/(1 − α)`
    /// on `[αL, L]`, extended with period `L`.
    pub fn potential(&self, x: f64) -> f64 {
        let period = self.period as f64;
        let alpha = self.alpha_f64();
        let r = reduce(x, period);
        if r <= alpha * period {
            r / alpha
        } else {
            (period - r) / (1.0 - alpha)
        }
    }

    /// Ratchet drift `μ = −γV′`, right-continuous at the breakpoints.
    pub fn drift(&self, x: f64) -> f64 {
        let period = self.period as f64;
        let alpha = self.alpha_f64();
        if reduce(x, period) < alpha * period {
            -self.gamma / alpha
        } else {
            self.gamma / (1.0 - alpha)
        }
    }

    /// `∫₀ᴸ exp{−2γV(x)} dx`, evaluated in closed form.
    ///
    /// Both linear pieces integrate to the same factor, so the total is
    /// `(1 − e^{−2γL}) / (2γ)`, which tends to `L` as `γ → 0`.
    pub fn invariant_normalizer(&self) -> f64 {
        let period = self.period as f64;
        let k = 2.0 * self.gamma;
        if k * period < 1e-12 {
            return period * (1.0 - 0.5 * k * period);
        }
        -(-k * period).exp_m1() / k
    }

    /// Invariant density `C exp{−2γV(x)}` of the Brownian ratchet, normalised
    /// over one period.
    pub fn invariant_density(&self, x: f64) -> f64 {
        (-2.0 * self.gamma * self.potential(x)).exp() / self.invariant_normalizer()
    }

    /// Potential on/off at continuous time `t`.
    pub fn phase_at(&self, t: f64) -> FlashingPhase {
        FlashingPhase::at(t, self.tau1.to_f64(), self.tau2.to_f64())
    }
}

fn validate_shape(l: u32, period: u32) -> Result<()> {
    if l == 0 || l >= period {
        return Err(Error::InvalidParams(format!("need 0 < l < L, got l={l}, L={period}")));
    }
    if l.gcd(&period) != 1 {
        return Err(Error::InvalidParams(format!("l={l} and L={period} must be coprime")));
    }
    Ok(())
}

/// `x mod period` in `[0, period)`; exact multiples (and values that round up
/// to `period`) map to 0.
fn reduce(x: f64, period: f64) -> f64 {
    let r = x - period * (x / period).floor();
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// Whether the sawtooth potential is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FlashingPhase {
    /// Free Brownian motion (game A / simple symmetric walk).
    Off,
    /// Brownian ratchet (game B / periodic asymmetric walk).
    On,
}

impl FlashingPhase {
    /// Off when `mod(t, τ₁ + τ₂) < τ₁`, on otherwise.
    pub fn at(t: f64, tau1: f64, tau2: f64) -> Self {
        let cycle = tau1 + tau2;
        let r = t - cycle * (t / cycle).floor();
        if r < tau1 {
            FlashingPhase::Off
        } else {
            FlashingPhase::On
        }
    }
}
