//! Shared fixtures for the benchmark targets. The crate ships no runtime
//! code of its own; run `cargo bench -p bellsim-bench` for the suites.

use bellsim_core::{SettingsQuad, SourcePolicy, XiScheme};

/// θ = 5π/4, the sweep point where the full-correlation model reaches the
/// quantum maximum. All benchmarks measure at these settings so numbers stay
/// comparable across runs.
pub fn reference_quad() -> SettingsQuad {
    SettingsQuad::from_theta(5.0 * std::f64::consts::FRAC_PI_4)
}

/// The partially setting-correlated source used throughout the benches; Γ is
/// picked off the curve's interior so every code path (chosen and unchosen ξ
/// slots, both λ branches) stays exercised.
pub fn reference_source() -> SourcePolicy {
    SourcePolicy::gamma_mixture(0.8, XiScheme::PairedSymmetric).expect("valid gamma")
}
