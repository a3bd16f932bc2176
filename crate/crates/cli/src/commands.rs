//! Subcommand implementations. Every emitter computes its results first and
//! writes afterwards, so a failing run produces no partial output; all
//! numbers are formatted locale-independently (`.` decimal point, `\n`
//! terminators, 17 significant digits for reals).

use std::f64::consts::{PI, TAU};
use std::io::Write;

use bellsim_core::{
    beta_mixture, chsh, corr_fixed_xi, corr_uniform, estimate, factorability_audit,
    no_signaling_audit, run_simulation, subensemble_report, sweep_fig1, PairKind, RngStreamSpec,
    SettingsQuad, SourcePolicy, XiScheme,
};

use crate::config::{RunConfig, DEFAULT_CHUNK_SIZE};
use crate::Failure;

/// Full-precision real formatting: 17 significant digits, enough to
/// round-trip any double exactly.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Comment lines describing the fully resolved run: derived quad, source
/// parameters, event count, the seed and where it came from, and audit
/// thresholds. `chunk_size` is deliberately absent — it partitions work
/// without affecting any result, and the output must not depend on it.
fn echo_config(out: &mut impl Write, cfg: &RunConfig) -> Result<(), Failure> {
    writeln!(out, "# source = {}", cfg.source_name)?;
    if let Some(theta) = cfg.theta {
        writeln!(out, "# theta = {}", real(theta))?;
    }
    writeln!(out, "# a = {}", real(cfg.quad.a.radians()))?;
    writeln!(out, "# a_prime = {}", real(cfg.quad.a_prime.radians()))?;
    writeln!(out, "# b = {}", real(cfg.quad.b.radians()))?;
    writeln!(out, "# b_prime = {}", real(cfg.quad.b_prime.radians()))?;
    if let Some(gamma) = cfg.gamma {
        writeln!(out, "# gamma = {}", real(gamma))?;
    }
    if let Some(xi) = cfg.xi {
        writeln!(out, "# xi = {}", real(xi.radians()))?;
    }
    writeln!(out, "# events = {}", cfg.events)?;
    writeln!(out, "# seed = {}", cfg.seed)?;
    writeln!(
        out,
        "# seed_source = {}",
        if cfg.seed_from_env { "env:BELLSIM_SEED" } else { "config" }
    )?;
    writeln!(out, "# audit_z_threshold = {}", real(cfg.audit.z_threshold))?;
    writeln!(out, "# audit_chi2_alpha = {}", real(cfg.audit.chi2_alpha))?;
    Ok(())
}

/// The closed-form β the configured source should produce.
fn analytic_beta(cfg: &RunConfig) -> Result<f64, Failure> {
    match &cfg.source {
        SourcePolicy::GammaMixture { gamma, scheme } => {
            Ok(beta_mixture(&cfg.quad, *gamma, scheme)?)
        }
        SourcePolicy::DeltaPair(xi) => {
            let xi = *xi;
            Ok(chsh(|x, y| corr_fixed_xi(x, y, xi), &cfg.quad))
        }
        SourcePolicy::UniformOnCircle => Ok(chsh(corr_uniform, &cfg.quad)),
    }
}

pub fn cmd_analytic_sweep(
    out: &mut impl Write,
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    gammas: &[f64],
) -> Result<(), Failure> {
    let rows = sweep_fig1(theta_min, theta_max, steps, gammas)?;
    writeln!(out, "theta,gamma,beta_q,beta_mixture,beta_printed,beta_uniform")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            real(r.theta),
            real(r.gamma),
            real(r.beta_q),
            real(r.beta_mixture),
            real(r.beta_printed),
            real(r.beta_uniform)
        )?;
    }
    Ok(())
}

pub fn cmd_simulate(out: &mut impl Write, cfg: &RunConfig) -> Result<(), Failure> {
    let stream = RngStreamSpec { seed: cfg.seed, stream_id: 0 };
    let tally = run_simulation(&cfg.quad, &cfg.source, cfg.events, stream, cfg.chunk_size)?;
    let est = estimate(&tally)?;
    let beta_analytic = analytic_beta(cfg)?;

    echo_config(out, cfg)?;
    writeln!(out, "pair,n,npp,npm,nmp,nmm,corr_hat,corr_se")?;
    for kind in PairKind::ALL {
        let p = &est.per_pair[kind.index()];
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            kind.label(),
            p.n,
            p.counts.pp,
            p.counts.pm,
            p.counts.mp,
            p.counts.mm,
            real(p.corr_hat),
            real(p.corr_se)
        )?;
    }
    writeln!(out, "beta_hat,beta_se,beta_analytic,gamma_hat")?;
    writeln!(
        out,
        "{},{},{},{}",
        real(est.beta_hat),
        real(est.beta_se),
        real(beta_analytic),
        real(est.gamma.map_or(f64::NAN, |g| g.gamma_hat))
    )?;
    Ok(())
}

pub fn cmd_reproduce_fig1(
    out: &mut impl Write,
    events: u64,
    seed: u64,
    steps: usize,
    seed_from_env: bool,
) -> Result<(), Failure> {
    const GAMMAS: [f64; 3] = [1.0, 0.8, 0.5];
    let rows = sweep_fig1(PI, TAU, steps, &GAMMAS)?;

    let mut body = String::new();
    let mut max_abs_z = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let quad = SettingsQuad::from_theta(row.theta);
        let source = SourcePolicy::gamma_mixture(row.gamma, XiScheme::PairedSymmetric)?;
        let stream = RngStreamSpec { seed, stream_id: i as u64 };
        let tally = run_simulation(&quad, &source, events, stream, DEFAULT_CHUNK_SIZE)?;
        let est = estimate(&tally)?;
        let diff = (row.beta_mixture - est.beta_hat).abs();
        // deterministic grid points (all four correlations exactly ±1) have
        // zero standard error; agreement there must be exact
        let z = if est.beta_se > 0.0 {
            diff / est.beta_se
        } else if diff <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        max_abs_z = max_abs_z.max(z);
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            real(row.theta),
            real(row.gamma),
            real(row.beta_mixture),
            real(est.beta_hat),
            real(est.beta_se),
            real(row.beta_uniform)
        ));
    }

    writeln!(out, "# source = gamma_mixture")?;
    writeln!(out, "# theta_min = {}", real(PI))?;
    writeln!(out, "# theta_max = {}", real(TAU))?;
    writeln!(out, "# steps = {steps}")?;
    writeln!(out, "# gammas = {}", GAMMAS.map(real).join(","))?;
    writeln!(out, "# events_per_point = {events}")?;
    writeln!(out, "# seed = {seed}")?;
    writeln!(out, "# seed_source = {}", if seed_from_env { "env:BELLSIM_SEED" } else { "cli" })?;
    writeln!(out, "theta,gamma,beta_analytic,beta_sim,beta_se,beta_uniform")?;
    out.write_all(body.as_bytes())?;
    writeln!(out, "# max_abs_z = {}", real(max_abs_z))?;
    Ok(())
}

pub fn cmd_no_signaling_audit(out: &mut impl Write, cfg: &RunConfig) -> Result<(), Failure> {
    let stream = RngStreamSpec { seed: cfg.seed, stream_id: 0 };
    let tally = run_simulation(&cfg.quad, &cfg.source, cfg.events, stream, cfg.chunk_size)?;
    let ns = no_signaling_audit(&tally, &cfg.audit)?;
    let fact = factorability_audit(&tally, &cfg.audit);
    let sub = subensemble_report(&tally);
    let rejected = fact.cells.iter().filter(|c| c.reject).count();
    let pass = ns.pass && fact.pass;

    echo_config(out, cfg)?;
    writeln!(out, "marginals (side A):")?;
    for kind in PairKind::ALL {
        let m = &ns.marginal_a[kind.index()];
        writeln!(
            out,
            "  {:<6} n={:<10} mean={:+.6} z={:+.3}",
            kind.label(),
            m.n,
            m.mean,
            m.z_zero
        )?;
    }
    writeln!(out, "marginals (side B):")?;
    for kind in PairKind::ALL {
        let m = &ns.marginal_b[kind.index()];
        writeln!(
            out,
            "  {:<6} n={:<10} mean={:+.6} z={:+.3}",
            kind.label(),
            m.n,
            m.mean,
            m.z_zero
        )?;
    }
    writeln!(out, "remote-setting dependence:")?;
    writeln!(out, "  A at a  (b vs bp): z = {:+.3}", ns.equality_z_a[0])?;
    writeln!(out, "  A at ap (b vs bp): z = {:+.3}", ns.equality_z_a[1])?;
    writeln!(out, "  B at b  (a vs ap): z = {:+.3}", ns.equality_z_b[0])?;
    writeln!(out, "  B at bp (a vs ap): z = {:+.3}", ns.equality_z_b[1])?;
    writeln!(
        out,
        "max |z|: side A = {:.3}, side B = {:.3} (threshold {})",
        ns.max_abs_z_a, ns.max_abs_z_b, ns.z_threshold
    )?;
    writeln!(out, "no-signaling: {}", pass_str(ns.pass))?;
    writeln!(
        out,
        "factorability: {} cells tested at family alpha {}, {} rejected, {} skipped",
        fact.cells.len(),
        fact.alpha,
        rejected,
        fact.skipped.len()
    )?;
    writeln!(out, "factorability: {}", pass_str(fact.pass))?;
    match sub.gamma {
        Some(g) => {
            writeln!(out, "xi distribution by pair (slots a, ap, b, bp):")?;
            for kind in PairKind::ALL {
                let p = &sub.per_pair[kind.index()];
                writeln!(
                    out,
                    "  {:<6} n={:<10} {:.6} {:.6} {:.6} {:.6}  chosen={:.6}",
                    kind.label(),
                    p.n_with_xi,
                    p.freq[0],
                    p.freq[1],
                    p.freq[2],
                    p.freq[3],
                    p.chosen_fraction
                )?;
            }
            let m = sub.marginal;
            writeln!(
                out,
                "  {:<6} n={:<10} {:.6} {:.6} {:.6} {:.6}",
                "all", g.n, m[0], m[1], m[2], m[3]
            )?;
            writeln!(out, "gamma_hat = {:.6} (se = {:.6}, n = {})", g.gamma_hat, g.se, g.n)?;
        }
        None => {
            writeln!(
                out,
                "xi distribution: no per-event xi draws for source `{}`",
                cfg.source_name
            )?;
        }
    }
    writeln!(out, "overall: {}", pass_str(pass))?;

    if pass {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "audit failed: max |z| side A = {:.3}, side B = {:.3}, factorability rejections = {rejected}",
            ns.max_abs_z_a, ns.max_abs_z_b
        )))
    }
}
