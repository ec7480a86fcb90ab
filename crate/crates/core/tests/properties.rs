mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use ratchetlab::games::{mean_profit_mixture, mean_profit_single, GameB};
use ratchetlab::lattice::evolve_segments;
use ratchetlab::{FlashingPhase, LatticeDistribution, RatchetKernel, RatchetParams, Rational};

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Coprime `(l, L)` with `0 < l < L ≤ 12`.
fn shape() -> impl Strategy<Value = (u32, u32)> {
    (2u32..=12).prop_flat_map(|period| (1..period, Just(period))).prop_filter("coprime", |&(l, p)| gcd(l, p) == 1)
}

fn ratchet() -> impl Strategy<Value = RatchetParams> {
    (shape(), 0.0f64..20.0).prop_map(|((l, period), gamma)| {
        RatchetParams::with_gamma(l, period, gamma, Rational::from_integer(1), Rational::from_integer(1)).unwrap()
    })
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rule(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) * (fa + 4.0 * fm + fb) / 6.0
    }
    #[allow(clippy::too_many_arguments)]
    fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = rule(fa, lm, fm, a, m);
        let right = rule(fm, rm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        refine(f, a, m, fa, lm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    refine(f, a, b, fa, fm, fb, rule(fa, fm, fb, a, b), tol, 40)
}

/// `∫₀ᴸ f` split at the kink `αL`, so each piece is smooth.
fn integrate_period(p: &RatchetParams, f: impl Fn(f64) -> f64) -> f64 {
    let (peak, period) = (p.peak_position(), p.period() as f64);
    // stay strictly inside each piece so the right-continuous drift is not
    // sampled on the wrong side of the kink
    let eps = 1e-15;
    simpson(&f, 0.0, peak * (1.0 - eps), 1e-13) + simpson(&f, peak, period * (1.0 - eps), 1e-13)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn potential_and_drift_are_periodic(p in ratchet(), x in -50.0f64..50.0, k in -5i32..5) {
        let shifted = x + k as f64 * p.period() as f64;
        prop_assert!((p.potential(shifted) - p.potential(x)).abs() < 1e-9);
        prop_assert_eq!(p.drift(shifted), p.drift(x));
    }

    #[test]
    fn drift_is_minus_gamma_times_slope(p in ratchet(), x in 0.0f64..1.0) {
        let period = p.period() as f64;
        let x = x * period;
        let h = 1e-6;
        // away from the kinks at 0, αL and L
        let peak = p.peak_position();
        prop_assume!(x > 2.0 * h && (x - peak).abs() > 2.0 * h && period - x > 2.0 * h);
        let slope = (p.potential(x + h) - p.potential(x - h)) / (2.0 * h);
        let mu = p.drift(x);
        let expected = -p.gamma() * slope;
        prop_assert!((mu - expected).abs() <= 1e-4 * expected.abs().max(1e-3), "{mu} vs {expected}");
    }

    #[test]
    fn invariant_density_integrates_to_one_with_zero_mean_drift(p in ratchet()) {
        let total = integrate_period(&p, |x| p.invariant_density(x));
        prop_assert!((total - 1.0).abs() < 1e-10, "total {total}");
        let drift = integrate_period(&p, |x| p.drift(x) * p.invariant_density(x));
        prop_assert!(drift.abs() < 1e-10, "mean drift {drift}");
    }

    #[test]
    fn game_b_is_fair_and_reversible((l, period) in shape(), rho in 0.02f64..0.98) {
        let game = GameB::new(rho, l, period).unwrap();
        prop_assert!(game.fairness_residual() < 1e-12);
        let pi = game.invariant_measure();
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(game.detailed_balance_residual(&pi) < 1e-12);
        // against the stationary law of the chain itself
        let stationary = game.chain().stationary();
        for (a, b) in pi.iter().zip(&stationary) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!(mean_profit_single(&game.chain()).abs() < 1e-12);
    }

    #[test]
    fn mixture_sign_follows_alpha((l, period) in shape(), rho in 0.05f64..0.95, c in 0.05f64..0.95) {
        let game = GameB::new(rho, l, period).unwrap();
        let profit = mean_profit_mixture(c, &game).unwrap();
        if 2 * l < period {
            prop_assert!(profit > 0.0, "{profit}");
        } else if 2 * l > period {
            prop_assert!(profit < 0.0, "{profit}");
        } else {
            prop_assert!(profit.abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_conserves_mass_and_parity(
        lambda in 0.0f64..9.0,
        start in -30i64..30,
        runs in prop::collection::vec((any::<bool>(), 1u64..200), 1..6),
    ) {
        let p = RatchetParams::new(1, 4, lambda, Rational::from_integer(1), Rational::from_integer(1)).unwrap();
        let kernel = RatchetKernel::new(&p, 10).unwrap();
        let plan: Vec<_> = runs.iter().map(|&(on, k)| (if on { FlashingPhase::On } else { FlashingPhase::Off }, k)).collect();
        let total: u64 = runs.iter().map(|r| r.1).sum();
        let end = evolve_segments(&LatticeDistribution::point_mass(start, 10), &kernel, &plan).unwrap();
        prop_assert!((end.total_mass() - 1.0).abs() < 1e-12);
        prop_assert_eq!(end.parity_violation(), 0.0);
        prop_assert_eq!(end.parity(), Some(((start + total as i64).rem_euclid(2)) as u8));
        prop_assert_eq!(end.steps_taken(), total);
    }

    #[test]
    fn translation_by_a_period_commutes_with_evolution(
        lambda in 0.0f64..9.0,
        shift in -3i64..3,
        runs in prop::collection::vec((any::<bool>(), 1u64..120), 1..5),
    ) {
        let n = 10;
        let p = RatchetParams::new(1, 4, lambda, Rational::from_integer(1), Rational::from_integer(1)).unwrap();
        let kernel = RatchetKernel::new(&p, n).unwrap();
        let plan: Vec<_> = runs.iter().map(|&(on, k)| (if on { FlashingPhase::On } else { FlashingPhase::Off }, k)).collect();
        let sites = shift * kernel.period_sites();
        let a = evolve_segments(&LatticeDistribution::point_mass(sites, n), &kernel, &plan).unwrap();
        let b = evolve_segments(&LatticeDistribution::point_mass(0, n), &kernel, &plan).unwrap().shifted(sites);
        prop_assert_eq!(a.offset(), b.offset());
        prop_assert_eq!(a.masses(), b.masses());
    }
}

#[test]
fn classical_invariant_measure() {
    let pi = GameB::classical().invariant_measure();
    for (a, b) in pi.iter().zip([5.0 / 13.0, 2.0 / 13.0, 6.0 / 13.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
}

#[test]
fn path_oracle_is_self_consistent() {
    // the shared oracle sums to one and is symmetric when the phase is off
    let law = common::enumerate_paths(0, &[false; 8], 1, 1, 3, 0.5);
    assert_abs_diff_eq!(law.values().sum::<f64>(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(law[&2], law[&-2], epsilon = 1e-15);
}
