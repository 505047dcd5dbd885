//! Glicko-2 rating updates.
//!
//! Ratings live on the familiar 1500-centered scale and are converted to
//! the internal scale by mu = (r - 1500) / 173.7178, phi = RD / 173.7178.
//! The volatility is found by the bounded Illinois iteration with
//! convergence tolerance 1e-6.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conversion factor between the display scale and the internal scale.
pub const GLICKO2_SCALE: f64 = 173.7178;
/// Default system constant constraining volatility change.
pub const DEFAULT_TAU: f64 = 0.5;

const CONVERGENCE_TOLERANCE: f64 = 1e-6;
const MAX_VOLATILITY_ITERATIONS: usize = 100;

/// Rating, rating deviation, and volatility for one method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlickoState {
    pub rating: f64,
    pub deviation: f64,
    pub volatility: f64,
}

impl Default for GlickoState {
    fn default() -> Self {
        GlickoState {
            rating: 1500.0,
            deviation: 350.0,
            volatility: 0.06,
        }
    }
}

fn g(phi: f64) -> f64 {
    1.0 / (1.0 + 3.0 * phi * phi / (std::f64::consts::PI * std::f64::consts::PI)).sqrt()
}

fn expectation(mu: f64, mu_j: f64, phi_j: f64) -> f64 {
    1.0 / (1.0 + (-g(phi_j) * (mu - mu_j)).exp())
}

/// Applies one rating period: the player's games against `opponents`,
/// each `(pre-period opponent state, score)` with score 1 for a win, 0.5
/// for a draw, 0 for a loss. With no games the deviation inflates and
/// rating and volatility stay put.
pub fn glicko2_update(
    state: &GlickoState,
    opponents: &[(GlickoState, f64)],
    tau: f64,
) -> Result<GlickoState> {
    if tau <= 0.0 || tau.is_nan() {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    if opponents.is_empty() {
        return Ok(inflate_deviation(state));
    }
    let mu = (state.rating - 1500.0) / GLICKO2_SCALE;
    let phi = state.deviation / GLICKO2_SCALE;

    let mut v_inv = 0.0;
    let mut improvement_sum = 0.0;
    for (opp, score) in opponents {
        let mu_j = (opp.rating - 1500.0) / GLICKO2_SCALE;
        let phi_j = opp.deviation / GLICKO2_SCALE;
        let g_j = g(phi_j);
        let e_j = expectation(mu, mu_j, phi_j);
        v_inv += g_j * g_j * e_j * (1.0 - e_j);
        improvement_sum += g_j * (score - e_j);
    }
    let v = 1.0 / v_inv;
    let delta = v * improvement_sum;

    let new_volatility = solve_volatility(state.volatility, delta, phi, v, tau)?;
    let phi_star = (phi * phi + new_volatility * new_volatility).sqrt();
    let new_phi = 1.0 / (1.0 / (phi_star * phi_star) + 1.0 / v).sqrt();
    let new_mu = mu + new_phi * new_phi * improvement_sum;

    Ok(GlickoState {
        rating: new_mu * GLICKO2_SCALE + 1500.0,
        deviation: new_phi * GLICKO2_SCALE,
        volatility: new_volatility,
    })
}

/// Deviation inflation for a period with no games.
pub fn inflate_deviation(state: &GlickoState) -> GlickoState {
    let phi = state.deviation / GLICKO2_SCALE;
    let phi_star = (phi * phi + state.volatility * state.volatility).sqrt();
    GlickoState {
        rating: state.rating,
        deviation: phi_star * GLICKO2_SCALE,
        volatility: state.volatility,
    }
}

fn solve_volatility(volatility: f64, delta: f64, phi: f64, v: f64, tau: f64) -> Result<f64> {
    let a = (volatility * volatility).ln();
    let delta2 = delta * delta;
    let phi2 = phi * phi;
    let f = |x: f64| {
        let ex = x.exp();
        let num = ex * (delta2 - phi2 - v - ex);
        let den = 2.0 * (phi2 + v + ex) * (phi2 + v + ex);
        num / den - (x - a) / (tau * tau)
    };

    let mut big_a = a;
    let mut big_b = if delta2 > phi2 + v {
        (delta2 - phi2 - v).ln()
    } else {
        let mut k = 1.0;
        while f(a - k * tau) < 0.0 {
            k += 1.0;
        }
        a - k * tau
    };
    let mut f_a = f(big_a);
    let mut f_b = f(big_b);
    let mut iterations = 0;
    while (big_b - big_a).abs() > CONVERGENCE_TOLERANCE {
        if iterations >= MAX_VOLATILITY_ITERATIONS {
            return Err(Error::VolatilityNonConvergence);
        }
        let big_c = big_a + (big_a - big_b) * f_a / (f_b - f_a);
        let f_c = f(big_c);
        if f_c * f_b <= 0.0 {
            big_a = big_b;
            f_a = f_b;
        } else {
            f_a /= 2.0;
        }
        big_b = big_c;
        f_b = f_c;
        iterations += 1;
    }
    Ok((big_a / 2.0).exp())
}
