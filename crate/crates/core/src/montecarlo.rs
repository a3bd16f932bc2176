//! Deterministic, chunk-parallel event generation with tallying, estimation,
//! and the statistical audits (no-signaling and per-cell factorability).
//!
//! Determinism contract: event `k` of a run always consumes the same
//! generator words regardless of chunk size or thread count. Each event owns
//! a fixed-width slice of the keyed ChaCha stream, and every chunk seeks to
//! the slice of its first event before generating.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::Error;
use crate::model::{
    generate_event, EventRandoms, EventRecord, LambdaBranch, PairKind, QuadSlot, SettingsQuad,
    SourcePolicy,
};

/// Generator words one event consumes: six uniform doubles, two 32-bit words
/// each. Every event draws all six, so slices never shift between sources.
pub const WORDS_PER_EVENT: u128 = 12;

/// Addressable deterministic randomness: `seed` keys the generator and
/// `stream_id` selects one of 2^64 independent streams of the same key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStreamSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStreamSpec {
    /// A generator positioned at the first word of `event_index`'s slice.
    pub fn rng_at_event(self, event_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(event_index) * WORDS_PER_EVENT);
        rng
    }
}

/// Joint ±1 outcome counts; `pp` counts (A,B) = (+1,+1), `pm` (+1,−1),
/// `mp` (−1,+1), `mm` (−1,−1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts2x2 {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl Counts2x2 {
    pub fn record(&mut self, outcome_a: i8, outcome_b: i8) {
        match (outcome_a > 0, outcome_b > 0) {
            (true, true) => self.pp += 1,
            (true, false) => self.pm += 1,
            (false, true) => self.mp += 1,
            (false, false) => self.mm += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }

    /// Events with A = +1.
    pub fn plus_a(&self) -> u64 {
        self.pp + self.pm
    }

    /// Events with B = +1.
    pub fn plus_b(&self) -> u64 {
        self.pp + self.mp
    }

    fn add(&mut self, other: &Counts2x2) {
        self.pp += other.pp;
        self.pm += other.pm;
        self.mp += other.mp;
        self.mm += other.mm;
    }
}

/// Index of the conditioning cell used when ξ is fixed for the whole run
/// (delta-pair source); cells 0–3 are the per-slot cells of mixture runs.
const FIXED_XI_CELL: usize = 4;

/// Counters for one settings pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairTally {
    /// Joint outcomes over all events measuring this pair.
    pub outcomes: Counts2x2,
    /// ξ occurrences by quad slot (only mixture events record one).
    pub xi: [u64; 4],
    /// Joint outcomes conditioned on (ξ cell, λ branch). Cells 0–3 are the
    /// quad slots ξ can come from; cell 4 is the fixed-ξ cell.
    pub cells: [[Counts2x2; 2]; 5],
}

impl PairTally {
    fn add(&mut self, other: &PairTally) {
        self.outcomes.add(&other.outcomes);
        for i in 0..4 {
            self.xi[i] += other.xi[i];
        }
        for cell in 0..5 {
            for branch in 0..2 {
                self.cells[cell][branch].add(&other.cells[cell][branch]);
            }
        }
    }
}

/// Event counts binned for estimation and audits. Merging is componentwise
/// addition, so chunked and parallel accumulation commutes exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub events: u64,
    pub pairs: [PairTally; 4],
}

impl Tally {
    pub fn record(&mut self, event: &EventRecord) {
        let pair = &mut self.pairs[event.pair.kind().index()];
        pair.outcomes.record(event.outcome_a, event.outcome_b);
        if let Some(slot) = event.xi_slot {
            pair.xi[slot.index()] += 1;
        }
        if let Some(branch) = event.lambda_branch {
            let cell = event.xi_slot.map_or(FIXED_XI_CELL, QuadSlot::index);
            pair.cells[cell][branch.index()].record(event.outcome_a, event.outcome_b);
        }
        self.events += 1;
    }

    /// Componentwise sum; `Tally::default()` is the identity.
    pub fn merge(mut self, other: Tally) -> Tally {
        self.events += other.events;
        for i in 0..4 {
            self.pairs[i].add(&other.pairs[i]);
        }
        self
    }
}

/// Generates `n_events` events and tallies them, splitting the work into
/// chunks of at most `chunk_size` events that may run on any number of
/// threads. The tally is identical for every chunk size and thread count
/// because each event's randomness is addressed by its index alone.
pub fn run_simulation(
    quad: &SettingsQuad,
    source: &SourcePolicy,
    n_events: u64,
    stream: RngStreamSpec,
    chunk_size: u64,
) -> Result<Tally, Error> {
    if chunk_size == 0 {
        return Err(Error::InvalidChunkSize);
    }
    source.validate()?;

    let n_chunks = n_events.div_ceil(chunk_size);
    (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let first = chunk * chunk_size;
            let last = (first + chunk_size).min(n_events);
            let mut rng = stream.rng_at_event(first);
            let mut tally = Tally::default();
            for _ in first..last {
                let randoms = EventRandoms::from_rng(&mut rng);
                let event = generate_event(quad, source, &randoms)?;
                tally.record(&event);
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |left, right| Ok(left.merge(right)))
}

/// Per-pair correlation estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEstimate {
    pub n: u64,
    pub counts: Counts2x2,
    pub corr_hat: f64,
    pub corr_se: f64,
}

/// Binomial estimate of the chosen-pair ξ fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaEstimate {
    pub gamma_hat: f64,
    pub se: f64,
    /// ξ draws the estimate is based on.
    pub n: u64,
}

/// Point estimates from one tally, indexed by `PairKind` order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimates {
    pub per_pair: [PairEstimate; 4],
    pub beta_hat: f64,
    pub beta_se: f64,
    /// Present when the run recorded per-event ξ draws (mixture sources).
    pub gamma: Option<GammaEstimate>,
}

/// Correlation, CHSH, and ξ estimates from a tally. Errors if any settings
/// pair has no events, naming the first empty one.
pub fn estimate(tally: &Tally) -> Result<Estimates, Error> {
    let mut per_pair = Vec::with_capacity(4);
    let mut beta_hat = 0.0;
    let mut beta_var = 0.0;
    for kind in PairKind::ALL {
        let counts = tally.pairs[kind.index()].outcomes;
        let n = counts.total();
        if n == 0 {
            return Err(Error::InsufficientData { pair: kind });
        }
        let nf = n as f64;
        let corr_hat = ((counts.pp + counts.mm) as f64 - (counts.pm + counts.mp) as f64) / nf;
        let corr_se = (((1.0 - corr_hat * corr_hat) / nf).max(0.0)).sqrt();
        beta_hat += kind.chsh_sign() * corr_hat;
        beta_var += corr_se * corr_se;
        per_pair.push(PairEstimate { n, counts, corr_hat, corr_se });
    }
    let per_pair: [PairEstimate; 4] = per_pair.try_into().expect("one estimate per pair");
    Ok(Estimates { per_pair, beta_hat, beta_se: beta_var.sqrt(), gamma: gamma_from_tally(tally) })
}

fn gamma_from_tally(tally: &Tally) -> Option<GammaEstimate> {
    let mut total = 0u64;
    let mut chosen = 0u64;
    for kind in PairKind::ALL {
        let xi = &tally.pairs[kind.index()].xi;
        total += xi.iter().sum::<u64>();
        chosen += xi[kind.alice().slot().index()] + xi[kind.bob().slot().index()];
    }
    if total == 0 {
        return None;
    }
    let gamma_hat = chosen as f64 / total as f64;
    let se = (gamma_hat * (1.0 - gamma_hat) / total as f64).sqrt();
    Some(GammaEstimate { gamma_hat, se, n: total })
}

/// Thresholds for the statistical audits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditConfig {
    /// Largest acceptable |z| for marginal and setting-dependence tests.
    pub z_threshold: f64,
    /// Family-wise significance level for the factorability cell tests,
    /// split across cells by Bonferroni correction.
    pub chi2_alpha: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { z_threshold: 4.0, chi2_alpha: 1e-3 }
    }
}

/// One side's marginal within one settings pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalEstimate {
    pub n: u64,
    pub mean: f64,
    /// z-score of the mean against the null value 0 (unit variance of a
    /// centered ±1 variable).
    pub z_zero: f64,
}

/// Marginal and remote-setting-dependence checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoSignalingReport {
    /// A-side marginals, indexed by `PairKind` order.
    pub marginal_a: [MarginalEstimate; 4],
    /// B-side marginals, indexed by `PairKind` order.
    pub marginal_b: [MarginalEstimate; 4],
    /// Two-proportion z for P(A = +1) across the remote settings b, b′ at
    /// fixed own setting: entry 0 for a, entry 1 for a′.
    pub equality_z_a: [f64; 2],
    /// Two-proportion z for P(B = +1) across a, a′ at fixed own setting:
    /// entry 0 for b, entry 1 for b′.
    pub equality_z_b: [f64; 2],
    pub max_abs_z_a: f64,
    pub max_abs_z_b: f64,
    pub z_threshold: f64,
    pub pass: bool,
}

fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    let p1 = x1 as f64 / n1 as f64;
    let p2 = x2 as f64 / n2 as f64;
    let pooled = (x1 + x2) as f64 / ((n1 + n2) as f64);
    let var = pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    if var <= 0.0 {
        // both samples unanimous on the same outcome: no evidence of a difference
        return 0.0;
    }
    (p1 - p2) / var.sqrt()
}

fn marginal_estimate(plus: u64, n: u64) -> MarginalEstimate {
    let nf = n as f64;
    let mean = (2 * plus) as f64 / nf - 1.0;
    MarginalEstimate { n, mean, z_zero: mean * nf.sqrt() }
}

/// Tests that each side's outcome distribution is independent of the remote
/// setting: marginals near zero pair by pair, and equal +1 rates across the
/// two remote settings at fixed own setting. Errors if any pair is empty.
pub fn no_signaling_audit(tally: &Tally, config: &AuditConfig) -> Result<NoSignalingReport, Error> {
    for kind in PairKind::ALL {
        if tally.pairs[kind.index()].outcomes.total() == 0 {
            return Err(Error::InsufficientData { pair: kind });
        }
    }
    let counts = |kind: PairKind| tally.pairs[kind.index()].outcomes;

    let marginal_a: [MarginalEstimate; 4] = std::array::from_fn(|i| {
        let c = counts(PairKind::ALL[i]);
        marginal_estimate(c.plus_a(), c.total())
    });
    let marginal_b: [MarginalEstimate; 4] = std::array::from_fn(|i| {
        let c = counts(PairKind::ALL[i]);
        marginal_estimate(c.plus_b(), c.total())
    });

    let z_across = |c1: Counts2x2, c2: Counts2x2, plus: fn(&Counts2x2) -> u64| {
        two_proportion_z(plus(&c1), c1.total(), plus(&c2), c2.total())
    };
    let equality_z_a = [
        z_across(counts(PairKind::AB), counts(PairKind::ABPrime), Counts2x2::plus_a),
        z_across(counts(PairKind::APrimeB), counts(PairKind::APrimeBPrime), Counts2x2::plus_a),
    ];
    let equality_z_b = [
        z_across(counts(PairKind::AB), counts(PairKind::APrimeB), Counts2x2::plus_b),
        z_across(counts(PairKind::ABPrime), counts(PairKind::APrimeBPrime), Counts2x2::plus_b),
    ];

    let side_max = |marginals: &[MarginalEstimate; 4], eq: &[f64; 2]| {
        marginals
            .iter()
            .map(|m| m.z_zero.abs())
            .chain(eq.iter().map(|z| z.abs()))
            .fold(0.0f64, f64::max)
    };
    let max_abs_z_a = side_max(&marginal_a, &equality_z_a);
    let max_abs_z_b = side_max(&marginal_b, &equality_z_b);
    let pass = max_abs_z_a < config.z_threshold && max_abs_z_b < config.z_threshold;

    Ok(NoSignalingReport {
        marginal_a,
        marginal_b,
        equality_z_a,
        equality_z_b,
        max_abs_z_a,
        max_abs_z_b,
        z_threshold: config.z_threshold,
        pass,
    })
}

/// Cells with fewer events than this are skipped by the factorability audit.
pub const MIN_CELL_EVENTS: u64 = 20;

/// Why a conditioning cell was not chi-square tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// Fewer than `MIN_CELL_EVENTS` events.
    BelowMinCount,
    /// A row or column margin is zero, so the statistic is undefined; a
    /// deterministic side carries no independence evidence either way.
    DegenerateMargins,
}

/// One chi-square independence test of A against B inside a (pair, ξ cell,
/// λ branch) conditioning cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellTest {
    pub pair: PairKind,
    /// `Some(slot)` for mixture cells, `None` for the fixed-ξ cell.
    pub xi_slot: Option<QuadSlot>,
    pub branch: LambdaBranch,
    pub n: u64,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// A conditioning cell excluded from testing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkippedCell {
    pub pair: PairKind,
    pub xi_slot: Option<QuadSlot>,
    pub branch: LambdaBranch,
    pub n: u64,
    pub reason: SkipReason,
}

/// Outcome of the conditional-independence (factorability) audit.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorabilityReport {
    pub cells: Vec<CellTest>,
    pub skipped: Vec<SkippedCell>,
    /// Family-wise level the audit was run at.
    pub alpha: f64,
    /// Bonferroni-corrected per-cell level actually applied.
    pub per_cell_alpha: f64,
    /// Chi-square statistic (1 dof) above which a cell is rejected.
    pub statistic_threshold: f64,
    pub pass: bool,
}

struct CellCounts {
    pair: PairKind,
    xi_slot: Option<QuadSlot>,
    branch: LambdaBranch,
    counts: Counts2x2,
}

fn occupied_cells(tally: &Tally) -> Vec<CellCounts> {
    let mut out = Vec::new();
    for kind in PairKind::ALL {
        let pair = &tally.pairs[kind.index()];
        for cell in 0..5 {
            let xi_slot = if cell < 4 { Some(QuadSlot::ALL[cell]) } else { None };
            for branch in [LambdaBranch::AtXi, LambdaBranch::Antipode] {
                let counts = pair.cells[cell][branch.index()];
                if counts.total() > 0 {
                    out.push(CellCounts { pair: kind, xi_slot, branch, counts });
                }
            }
        }
    }
    out
}

fn chi_square_statistic(c: &Counts2x2) -> Option<f64> {
    let row_plus = c.pp + c.pm;
    let row_minus = c.mp + c.mm;
    let col_plus = c.pp + c.mp;
    let col_minus = c.pm + c.mm;
    if row_plus == 0 || row_minus == 0 || col_plus == 0 || col_minus == 0 {
        return None;
    }
    let det = c.pp as f64 * c.mm as f64 - c.pm as f64 * c.mp as f64;
    let denom = row_plus as f64 * row_minus as f64 * col_plus as f64 * col_minus as f64;
    Some(c.total() as f64 * det * det / denom)
}

/// Chi-square tests A⊥B inside every occupied (pair, ξ cell, λ branch) cell,
/// where the model makes the outcomes exactly independent. The family-wise
/// level `config.chi2_alpha` is Bonferroni-split across the testable cells;
/// under-filled or margin-degenerate cells are skipped and listed.
pub fn factorability_audit(tally: &Tally, config: &AuditConfig) -> FactorabilityReport {
    let occupied = occupied_cells(tally);

    let mut testable = Vec::new();
    let mut skipped = Vec::new();
    for cell in occupied {
        let n = cell.counts.total();
        if n < MIN_CELL_EVENTS {
            skipped.push(SkippedCell {
                pair: cell.pair,
                xi_slot: cell.xi_slot,
                branch: cell.branch,
                n,
                reason: SkipReason::BelowMinCount,
            });
            continue;
        }
        match chi_square_statistic(&cell.counts) {
            Some(statistic) => testable.push((cell, statistic)),
            None => skipped.push(SkippedCell {
                pair: cell.pair,
                xi_slot: cell.xi_slot,
                branch: cell.branch,
                n,
                reason: SkipReason::DegenerateMargins,
            }),
        }
    }

    let per_cell_alpha = config.chi2_alpha / testable.len().max(1) as f64;
    let dist = ChiSquared::new(1.0).expect("one degree of freedom is valid");
    let statistic_threshold = dist.inverse_cdf(1.0 - per_cell_alpha);

    let cells: Vec<CellTest> = testable
        .into_iter()
        .map(|(cell, statistic)| CellTest {
            pair: cell.pair,
            xi_slot: cell.xi_slot,
            branch: cell.branch,
            n: cell.counts.total(),
            statistic,
            p_value: dist.sf(statistic),
            reject: statistic > statistic_threshold,
        })
        .collect();

    let pass = cells.iter().all(|c| !c.reject);
    FactorabilityReport {
        cells,
        skipped,
        alpha: config.chi2_alpha,
        per_cell_alpha,
        statistic_threshold,
        pass,
    }
}

/// ξ bookkeeping for one settings pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairXiReport {
    /// All events measuring this pair.
    pub n_events: u64,
    /// Those that recorded a ξ draw.
    pub n_with_xi: u64,
    /// Empirical ξ distribution over the quad slots [a, a′, b, b′]; zeros
    /// when no ξ was recorded.
    pub freq: [f64; 4],
    /// Fraction of ξ draws that landed on this pair's own two slots.
    pub chosen_fraction: f64,
}

/// Empirical ξ distributions, overall and per settings pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubensembleReport {
    /// Indexed by `PairKind` order.
    pub per_pair: [PairXiReport; 4],
    /// ξ distribution over all events, by quad slot.
    pub marginal: [f64; 4],
    /// Global chosen-pair fraction; `None` if no event recorded a ξ draw.
    pub gamma: Option<GammaEstimate>,
}

/// Summarizes how ξ distributed itself over the quad entries, per settings
/// pair and overall.
pub fn subensemble_report(tally: &Tally) -> SubensembleReport {
    let mut slot_totals = [0u64; 4];
    let per_pair: [PairXiReport; 4] = std::array::from_fn(|i| {
        let kind = PairKind::ALL[i];
        let pair = &tally.pairs[i];
        let n_with_xi: u64 = pair.xi.iter().sum();
        let mut freq = [0.0; 4];
        let mut chosen_fraction = 0.0;
        if n_with_xi > 0 {
            freq = pair.xi.map(|count| count as f64 / n_with_xi as f64);
            let chosen = pair.xi[kind.alice().slot().index()] + pair.xi[kind.bob().slot().index()];
            chosen_fraction = chosen as f64 / n_with_xi as f64;
        }
        for (total, count) in slot_totals.iter_mut().zip(pair.xi) {
            *total += count;
        }
        PairXiReport { n_events: pair.outcomes.total(), n_with_xi, freq, chosen_fraction }
    });

    let total: u64 = slot_totals.iter().sum();
    let mut marginal = [0.0; 4];
    if total > 0 {
        marginal = slot_totals.map(|count| count as f64 / total as f64);
    }
    SubensembleReport { per_pair, marginal, gamma: gamma_from_tally(tally) }
}
