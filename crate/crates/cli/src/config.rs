//! JSON run-configuration parsing and validation.
//!
//! A document sets the settings quad (either `theta`, expanded to the family
//! a = 2θ, a′ = 0, b = θ, b′ = 3θ, or an explicit `angles` object — exactly
//! one of the two), the source policy, the event count, the seed, and
//! optional chunking and audit thresholds. Unknown keys are rejected.

use serde::Deserialize;

use bellsim_core::{Angle, AuditConfig, SettingsQuad, SourcePolicy, XiScheme};

pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    theta: Option<f64>,
    angles: Option<RawAngles>,
    gamma: Option<f64>,
    source: String,
    xi: Option<f64>,
    events: u64,
    seed: u64,
    chunk_size: Option<u64>,
    audit: Option<RawAudit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAudit {
    z_threshold: Option<f64>,
    chi2_alpha: Option<f64>,
}

/// A fully resolved run: validated quad, source, seed (after any environment
/// override), chunking, and audit thresholds, plus the raw values needed to
/// echo the configuration back into the output.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// θ in radians when the quad came from the one-parameter family.
    pub theta: Option<f64>,
    pub quad: SettingsQuad,
    pub source: SourcePolicy,
    pub source_name: &'static str,
    pub gamma: Option<f64>,
    pub xi: Option<Angle>,
    pub events: u64,
    pub seed: u64,
    /// True when `BELLSIM_SEED` supplied the seed.
    pub seed_from_env: bool,
    pub chunk_size: u64,
    pub audit: AuditConfig,
}

/// Parses and validates a JSON config. `degrees` converts every input angle
/// (θ, explicit quad entries, ξ) to radians before validation; `env_seed`
/// takes precedence over the document's `seed` when present.
pub fn parse_config(text: &str, degrees: bool, env_seed: Option<u64>) -> Result<RunConfig, String> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| format!("invalid config document: {e}"))?;

    let to_radians = |x: f64| if degrees { x.to_radians() } else { x };

    let (theta, quad) = match (raw.theta, raw.angles) {
        (Some(_), Some(_)) => {
            return Err("set exactly one of `theta` or `angles`; both are present".into())
        }
        (None, None) => {
            return Err("set exactly one of `theta` or `angles`; neither is present".into())
        }
        (Some(t), None) => {
            if !t.is_finite() {
                return Err(format!("`theta` must be finite, got {t}"));
            }
            let t = to_radians(t);
            (Some(t), SettingsQuad::from_theta(t))
        }
        (None, Some(angles)) => {
            for (name, value) in [
                ("a", angles.a),
                ("a_prime", angles.a_prime),
                ("b", angles.b),
                ("b_prime", angles.b_prime),
            ] {
                if !value.is_finite() {
                    return Err(format!("`angles.{name}` must be finite, got {value}"));
                }
            }
            let quad = SettingsQuad::new(
                Angle::new(to_radians(angles.a)),
                Angle::new(to_radians(angles.a_prime)),
                Angle::new(to_radians(angles.b)),
                Angle::new(to_radians(angles.b_prime)),
            );
            (None, quad)
        }
    };

    let (source, source_name, gamma, xi) = match raw.source.as_str() {
        "gamma_mixture" => {
            let gamma =
                raw.gamma.ok_or_else(|| "source `gamma_mixture` requires `gamma`".to_string())?;
            if raw.xi.is_some() {
                return Err("`xi` is only valid with source `fixed_xi`".into());
            }
            let policy = SourcePolicy::gamma_mixture(gamma, XiScheme::PairedSymmetric)
                .map_err(|e| e.to_string())?;
            (policy, "gamma_mixture", Some(gamma), None)
        }
        "fixed_xi" => {
            let xi = raw.xi.ok_or_else(|| "source `fixed_xi` requires `xi`".to_string())?;
            if raw.gamma.is_some() {
                return Err("`gamma` is only valid with source `gamma_mixture`".into());
            }
            if !xi.is_finite() {
                return Err(format!("`xi` must be finite, got {xi}"));
            }
            let xi = Angle::new(to_radians(xi));
            (SourcePolicy::DeltaPair(xi), "fixed_xi", None, Some(xi))
        }
        "uniform" => {
            if raw.gamma.is_some() {
                return Err("`gamma` is only valid with source `gamma_mixture`".into());
            }
            if raw.xi.is_some() {
                return Err("`xi` is only valid with source `fixed_xi`".into());
            }
            (SourcePolicy::UniformOnCircle, "uniform", None, None)
        }
        other => {
            return Err(format!(
                "unknown source `{other}`; expected `gamma_mixture`, `fixed_xi`, or `uniform`"
            ))
        }
    };

    let chunk_size = raw.chunk_size.unwrap_or(DEFAULT_CHUNK_SIZE);
    if chunk_size == 0 {
        return Err("`chunk_size` must be at least 1".into());
    }

    let mut audit = AuditConfig::default();
    if let Some(raw_audit) = raw.audit {
        if let Some(z) = raw_audit.z_threshold {
            if !z.is_finite() || z <= 0.0 {
                return Err(format!("`audit.z_threshold` must be positive, got {z}"));
            }
            audit.z_threshold = z;
        }
        if let Some(alpha) = raw_audit.chi2_alpha {
            if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
                return Err(format!("`audit.chi2_alpha` must lie in (0, 1), got {alpha}"));
            }
            audit.chi2_alpha = alpha;
        }
    }

    let (seed, seed_from_env) = match env_seed {
        Some(seed) => (seed, true),
        None => (raw.seed, false),
    };

    Ok(RunConfig {
        theta,
        quad,
        source,
        source_name,
        gamma,
        xi,
        events: raw.events,
        seed,
        seed_from_env,
        chunk_size,
        audit,
    })
}
