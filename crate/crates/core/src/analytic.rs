//! Closed-form predictions for the cosine-response model: per-pair
//! correlations under each source policy, single-side marginals, and the
//! CHSH combination β for whole settings quads, including the reference
//! one-parameter sweep.

use crate::angle::Angle;
use crate::error::Error;
use crate::model::{
    response_prob_a, response_prob_b, PairKind, QuadSlot, ResolvedSource, SettingsPair,
    SettingsQuad, XiScheme,
};

/// Correlation E[A·B] when the source density sits on the antipodal pair
/// {ξ, ξ + π}: the product form −cos(a − ξ) cos(b − ξ).
pub fn corr_fixed_xi(a: Angle, b: Angle, xi: Angle) -> f64 {
    -(a - xi).cos() * (b - xi).cos()
}

/// Same correlation assembled from first principles: average over the two λ
/// branches of Σ_{μ,ν} μν P(A = μ | a, λ) P(B = ν | b, λ).
pub fn corr_via_ch_expansion(a: Angle, b: Angle, xi: Angle) -> f64 {
    let mut total = 0.0;
    for lambda in [xi, xi.antipode()] {
        let pa_plus = response_prob_a(a, lambda, 1);
        let pa_minus = response_prob_a(a, lambda, -1);
        let pb_plus = response_prob_b(b, lambda, 1);
        let pb_minus = response_prob_b(b, lambda, -1);
        total += 0.5
            * (pa_plus * pb_plus + pa_minus * pb_minus - pa_plus * pb_minus - pa_minus * pb_plus);
    }
    total
}

/// Correlation under the setting-independent uniform source: −½ cos(a − b),
/// half the singlet value.
pub fn corr_uniform(a: Angle, b: Angle) -> f64 {
    -0.5 * (a - b).cos()
}

/// Single-side mean of A. Zero for every setting: the uniform source
/// averages cos(a − λ) over the whole circle, and a delta-pair source
/// averages it over two antipodal points, which cancel exactly.
pub fn marginal_a(_setting: Angle, _source: &ResolvedSource) -> f64 {
    0.0
}

/// Single-side mean of B; zero by the same cancellation as `marginal_a`.
pub fn marginal_b(_setting: Angle, _source: &ResolvedSource) -> f64 {
    0.0
}

/// Correlation for one settings pair under the Γ-mixture source: the
/// ξ-weighted average of the fixed-ξ correlations over the quad entries.
pub fn corr_gamma_mixture(
    pair: &SettingsPair,
    quad: &SettingsQuad,
    gamma: f64,
    scheme: &XiScheme,
) -> Result<f64, Error> {
    let weights = scheme.weights(gamma, pair.kind())?;
    let mut total = 0.0;
    for slot in QuadSlot::ALL {
        let w = weights[slot.index()];
        if w != 0.0 {
            total += w * corr_fixed_xi(pair.phi_a, pair.phi_b, quad.get(slot));
        }
    }
    Ok(total)
}

/// The CHSH combination E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′) for any
/// two-setting correlation function.
pub fn chsh<E>(corr: E, quad: &SettingsQuad) -> f64
where
    E: Fn(Angle, Angle) -> f64,
{
    corr(quad.a, quad.b) + corr(quad.a, quad.b_prime) + corr(quad.a_prime, quad.b)
        - corr(quad.a_prime, quad.b_prime)
}

/// CHSH value for the singlet-state correlation E(x, y) = −cos(x − y).
pub fn beta_q(quad: &SettingsQuad) -> f64 {
    chsh(|x, y| -(x - y).cos(), quad)
}

/// CHSH value under the Γ-mixture source, with each term conditioned on its
/// own chosen settings pair.
pub fn beta_mixture(quad: &SettingsQuad, gamma: f64, scheme: &XiScheme) -> Result<f64, Error> {
    let mut total = 0.0;
    for kind in PairKind::ALL {
        total += kind.chsh_sign() * corr_gamma_mixture(&quad.pair(kind), quad, gamma, scheme)?;
    }
    Ok(total)
}

/// The compact closed-form β for the paired-symmetric mixture,
/// β_q + ½(1 − Γ) · [four sine cross terms]. It keeps only the unchosen-Bob
/// ξ corrections, so it disagrees with `beta_mixture` for Γ < 1; both are
/// emitted side by side so the difference stays visible. See the README
/// discussion.
pub fn beta_printed(quad: &SettingsQuad, gamma: f64) -> f64 {
    let s = |x: Angle, y: Angle| (x - y).sin();
    let cross = s(quad.a, quad.b_prime) * s(quad.b, quad.b_prime)
        + s(quad.a, quad.b) * s(quad.b_prime, quad.b)
        + s(quad.a_prime, quad.b_prime) * s(quad.b, quad.b_prime)
        - s(quad.a_prime, quad.b) * s(quad.b_prime, quad.b);
    beta_q(quad) + 0.5 * (1.0 - gamma) * cross
}

/// One row of the reference sweep: every β variant at a (θ, Γ) grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaPoint {
    /// Raw grid value, not wrapped into [0, 2π), so closed endpoints such as
    /// 2π survive in output.
    pub theta: f64,
    pub gamma: f64,
    pub beta_q: f64,
    pub beta_mixture: f64,
    pub beta_printed: f64,
    pub beta_uniform: f64,
}

/// Evaluates the β variants over an inclusive θ grid for the reference
/// family a = 2θ, a′ = 0, b = θ, b′ = 3θ, for each Γ in `gammas` under the
/// paired-symmetric scheme. Rows are ordered θ-major, then Γ in the order
/// given. Both endpoints land exactly on `theta_min` and `theta_max`.
pub fn sweep_fig1(
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    gammas: &[f64],
) -> Result<Vec<BetaPoint>, Error> {
    if !theta_min.is_finite() || !theta_max.is_finite() || theta_min > theta_max {
        return Err(Error::InvalidSweepBounds);
    }
    if steps < 2 {
        return Err(Error::TooFewSteps(steps));
    }
    if gammas.is_empty() {
        return Err(Error::NoGammas);
    }
    for &gamma in gammas {
        if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
    }

    let mut rows = Vec::with_capacity(steps * gammas.len());
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let theta = theta_min * (1.0 - t) + theta_max * t;
        let quad = SettingsQuad::from_theta(theta);
        let beta_q_value = beta_q(&quad);
        let beta_uniform = chsh(corr_uniform, &quad);
        for &gamma in gammas {
            let beta_mix = beta_mixture(&quad, gamma, &XiScheme::PairedSymmetric)?;
            rows.push(BetaPoint {
                theta,
                gamma,
                beta_q: beta_q_value,
                beta_mixture: beta_mix,
                beta_printed: beta_printed(&quad, gamma),
                beta_uniform,
            });
        }
    }
    Ok(rows)
}
