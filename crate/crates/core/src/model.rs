use std::fmt;

use rand::Rng;

use crate::angle::Angle;
use crate::error::Error;

/// Tolerance for checking that an explicit ξ weight row sums to one.
pub const XI_WEIGHT_SUM_TOL: f64 = 1e-12;

/// Which of the two A-side orientations an event measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AliceSetting {
    A,
    APrime,
}

impl AliceSetting {
    pub fn slot(self) -> QuadSlot {
        match self {
            AliceSetting::A => QuadSlot::A,
            AliceSetting::APrime => QuadSlot::APrime,
        }
    }

    pub fn other(self) -> AliceSetting {
        match self {
            AliceSetting::A => AliceSetting::APrime,
            AliceSetting::APrime => AliceSetting::A,
        }
    }
}

/// Which of the two B-side orientations an event measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BobSetting {
    B,
    BPrime,
}

impl BobSetting {
    pub fn slot(self) -> QuadSlot {
        match self {
            BobSetting::B => QuadSlot::B,
            BobSetting::BPrime => QuadSlot::BPrime,
        }
    }

    pub fn other(self) -> BobSetting {
        match self {
            BobSetting::B => BobSetting::BPrime,
            BobSetting::BPrime => BobSetting::B,
        }
    }
}

/// One of the four settings pairs of the CHSH combination, in tally order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairKind {
    AB,
    ABPrime,
    APrimeB,
    APrimeBPrime,
}

impl PairKind {
    pub const ALL: [PairKind; 4] =
        [PairKind::AB, PairKind::ABPrime, PairKind::APrimeB, PairKind::APrimeBPrime];

    pub fn new(alice: AliceSetting, bob: BobSetting) -> Self {
        match (alice, bob) {
            (AliceSetting::A, BobSetting::B) => PairKind::AB,
            (AliceSetting::A, BobSetting::BPrime) => PairKind::ABPrime,
            (AliceSetting::APrime, BobSetting::B) => PairKind::APrimeB,
            (AliceSetting::APrime, BobSetting::BPrime) => PairKind::APrimeBPrime,
        }
    }

    pub fn index(self) -> usize {
        match self {
            PairKind::AB => 0,
            PairKind::ABPrime => 1,
            PairKind::APrimeB => 2,
            PairKind::APrimeBPrime => 3,
        }
    }

    pub fn alice(self) -> AliceSetting {
        match self {
            PairKind::AB | PairKind::ABPrime => AliceSetting::A,
            PairKind::APrimeB | PairKind::APrimeBPrime => AliceSetting::APrime,
        }
    }

    pub fn bob(self) -> BobSetting {
        match self {
            PairKind::AB | PairKind::APrimeB => BobSetting::B,
            PairKind::ABPrime | PairKind::APrimeBPrime => BobSetting::BPrime,
        }
    }

    /// Sign of this pair's correlation inside the CHSH combination.
    pub fn chsh_sign(self) -> f64 {
        match self {
            PairKind::APrimeBPrime => -1.0,
            _ => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairKind::AB => "a-b",
            PairKind::ABPrime => "a-bp",
            PairKind::APrimeB => "ap-b",
            PairKind::APrimeBPrime => "ap-bp",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Position in a `SettingsQuad`; also the index space for ξ diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadSlot {
    A,
    APrime,
    B,
    BPrime,
}

impl QuadSlot {
    pub const ALL: [QuadSlot; 4] = [QuadSlot::A, QuadSlot::APrime, QuadSlot::B, QuadSlot::BPrime];

    pub fn index(self) -> usize {
        match self {
            QuadSlot::A => 0,
            QuadSlot::APrime => 1,
            QuadSlot::B => 2,
            QuadSlot::BPrime => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QuadSlot::A => "a",
            QuadSlot::APrime => "ap",
            QuadSlot::B => "b",
            QuadSlot::BPrime => "bp",
        }
    }
}

impl fmt::Display for QuadSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The four analyzer orientations of a CHSH run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingsQuad {
    pub a: Angle,
    pub a_prime: Angle,
    pub b: Angle,
    pub b_prime: Angle,
}

impl SettingsQuad {
    pub fn new(a: Angle, a_prime: Angle, b: Angle, b_prime: Angle) -> Self {
        SettingsQuad { a, a_prime, b, b_prime }
    }

    /// The one-parameter family a = 2θ, a′ = 0, b = θ, b′ = 3θ used by the
    /// reference sweep.
    pub fn from_theta(theta: f64) -> Self {
        SettingsQuad {
            a: Angle::new(2.0 * theta),
            a_prime: Angle::new(0.0),
            b: Angle::new(theta),
            b_prime: Angle::new(3.0 * theta),
        }
    }

    pub fn get(&self, slot: QuadSlot) -> Angle {
        match slot {
            QuadSlot::A => self.a,
            QuadSlot::APrime => self.a_prime,
            QuadSlot::B => self.b,
            QuadSlot::BPrime => self.b_prime,
        }
    }

    pub fn alice(&self, setting: AliceSetting) -> Angle {
        self.get(setting.slot())
    }

    pub fn bob(&self, setting: BobSetting) -> Angle {
        self.get(setting.slot())
    }

    pub fn pair(&self, kind: PairKind) -> SettingsPair {
        SettingsPair::from_quad(self, kind.alice(), kind.bob())
    }
}

/// The two orientations measured in one event, tagged with which quad
/// entries they are.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingsPair {
    pub phi_a: Angle,
    pub phi_b: Angle,
    pub index_a: AliceSetting,
    pub index_b: BobSetting,
}

impl SettingsPair {
    pub fn from_quad(quad: &SettingsQuad, index_a: AliceSetting, index_b: BobSetting) -> Self {
        SettingsPair { phi_a: quad.alice(index_a), phi_b: quad.bob(index_b), index_a, index_b }
    }

    pub fn kind(&self) -> PairKind {
        PairKind::new(self.index_a, self.index_b)
    }
}

/// How ξ is distributed over the quad entries, conditional on the chosen
/// settings pair.
#[derive(Clone, Debug, PartialEq)]
pub enum XiScheme {
    /// The two chosen orientations carry weight Γ/2 each; the two unchosen
    /// ones carry (1 − Γ)/2 each.
    PairedSymmetric,
    /// Explicit weight rows over the quad slots `[a, a′, b, b′]`, one row per
    /// `PairKind` in tally order. Each row must be non-negative and sum to 1.
    CustomTable { weights: [[f64; 4]; 4] },
}

impl XiScheme {
    /// Conditional ξ weights over the quad slots `[a, a′, b, b′]` for one
    /// settings pair. `gamma` is ignored by `CustomTable`.
    pub fn weights(&self, gamma: f64, pair: PairKind) -> Result<[f64; 4], Error> {
        match self {
            XiScheme::PairedSymmetric => {
                check_gamma(gamma)?;
                let mut w = [0.0; 4];
                w[pair.alice().slot().index()] = gamma / 2.0;
                w[pair.alice().other().slot().index()] = (1.0 - gamma) / 2.0;
                w[pair.bob().slot().index()] = gamma / 2.0;
                w[pair.bob().other().slot().index()] = (1.0 - gamma) / 2.0;
                Ok(w)
            }
            XiScheme::CustomTable { weights } => {
                let row = weights[pair.index()];
                validate_weight_row(&row, pair)?;
                Ok(row)
            }
        }
    }
}

fn check_gamma(gamma: f64) -> Result<(), Error> {
    if gamma.is_finite() && (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

fn validate_weight_row(row: &[f64; 4], pair: PairKind) -> Result<(), Error> {
    for &w in row {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::NegativeXiWeight { pair, weight: w });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > XI_WEIGHT_SUM_TOL {
        return Err(Error::XiWeightsNotNormalized { pair, sum });
    }
    Ok(())
}

/// How the source draws the hidden state λ for each event.
#[derive(Clone, Debug, PartialEq)]
pub enum SourcePolicy {
    /// λ is ξ or ξ + π with probability ½ each, for a fixed ξ.
    DeltaPair(Angle),
    /// λ is uniform on the circle.
    UniformOnCircle,
    /// ξ is drawn per event from the quad entries with weights set by
    /// `scheme`, correlated with the chosen settings through `gamma`; λ is
    /// then ξ or ξ + π with probability ½ each.
    GammaMixture { gamma: f64, scheme: XiScheme },
}

impl SourcePolicy {
    /// A `GammaMixture` with its parameters validated up front.
    pub fn gamma_mixture(gamma: f64, scheme: XiScheme) -> Result<Self, Error> {
        let policy = SourcePolicy::GammaMixture { gamma, scheme };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            SourcePolicy::DeltaPair(_) | SourcePolicy::UniformOnCircle => Ok(()),
            SourcePolicy::GammaMixture { gamma, scheme } => {
                check_gamma(*gamma)?;
                if let XiScheme::CustomTable { weights } = scheme {
                    for kind in PairKind::ALL {
                        validate_weight_row(&weights[kind.index()], kind)?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// λ-generation rule after any per-event ξ mixing has been resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResolvedSource {
    DeltaPair(Angle),
    Uniform,
}

/// Which member of the antipodal pair {ξ, ξ + π} an event's λ landed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LambdaBranch {
    AtXi,
    Antipode,
}

impl LambdaBranch {
    pub fn index(self) -> usize {
        match self {
            LambdaBranch::AtXi => 0,
            LambdaBranch::Antipode => 1,
        }
    }
}

/// P(A = μ | φ_A, λ) = ½ (1 + μ cos(φ_A − λ)).
pub fn response_prob_a(setting: Angle, lambda: Angle, mu: i8) -> f64 {
    debug_assert!(mu == 1 || mu == -1, "outcome must be ±1, got {mu}");
    0.5 * (1.0 + f64::from(mu) * (setting - lambda).cos())
}

/// P(B = μ | φ_B, λ) = ½ (1 − μ cos(φ_B − λ)).
pub fn response_prob_b(setting: Angle, lambda: Angle, mu: i8) -> f64 {
    debug_assert!(mu == 1 || mu == -1, "outcome must be ±1, got {mu}");
    0.5 * (1.0 - f64::from(mu) * (setting - lambda).cos())
}

/// λ draw by inverse transform: `u < ½` selects ξ itself, otherwise ξ + π;
/// for the uniform source, `u` scales to the whole circle.
pub fn sample_lambda(source: ResolvedSource, u: f64) -> Angle {
    debug_assert!((0.0..1.0).contains(&u), "uniform draw must be in [0,1), got {u}");
    match source {
        ResolvedSource::DeltaPair(xi) => {
            if u < 0.5 {
                xi
            } else {
                xi.antipode()
            }
        }
        ResolvedSource::Uniform => Angle::new(std::f64::consts::TAU * u),
    }
}

/// ξ draw by inverse transform over the scheme's weights, reporting which
/// quad slot was hit. For `PairedSymmetric` the cumulative slabs are ordered
/// [chosen A, chosen B, unchosen A, unchosen B]; for `CustomTable` they
/// follow the quad slot order [a, a′, b, b′].
pub fn sample_xi_slot(
    scheme: &XiScheme,
    gamma: f64,
    quad: &SettingsQuad,
    pair: &SettingsPair,
    u: f64,
) -> Result<(QuadSlot, Angle), Error> {
    debug_assert!((0.0..1.0).contains(&u), "uniform draw must be in [0,1), got {u}");
    let slabs: [(QuadSlot, f64); 4] = match scheme {
        XiScheme::PairedSymmetric => {
            check_gamma(gamma)?;
            [
                (pair.index_a.slot(), gamma / 2.0),
                (pair.index_b.slot(), gamma / 2.0),
                (pair.index_a.other().slot(), (1.0 - gamma) / 2.0),
                (pair.index_b.other().slot(), (1.0 - gamma) / 2.0),
            ]
        }
        XiScheme::CustomTable { weights } => {
            let row = weights[pair.kind().index()];
            validate_weight_row(&row, pair.kind())?;
            [
                (QuadSlot::A, row[0]),
                (QuadSlot::APrime, row[1]),
                (QuadSlot::B, row[2]),
                (QuadSlot::BPrime, row[3]),
            ]
        }
    };

    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (slot, weight) in slabs {
        if weight > 0.0 {
            cumulative += weight;
            last_positive = Some(slot);
            if u < cumulative {
                return Ok((slot, quad.get(slot)));
            }
        }
    }
    // u landed past the accumulated total (rounding at the top end):
    // attribute it to the last slab with positive weight.
    let slot = last_positive.expect("a validated weight row has a positive entry");
    Ok((slot, quad.get(slot)))
}

/// ξ draw by inverse transform over the scheme's weights.
pub fn sample_xi(
    scheme: &XiScheme,
    gamma: f64,
    quad: &SettingsQuad,
    pair: &SettingsPair,
    u: f64,
) -> Result<Angle, Error> {
    sample_xi_slot(scheme, gamma, quad, pair, u).map(|(_, xi)| xi)
}

/// Threshold rule turning a response probability into a ±1 outcome:
/// `omega < p_plus` gives +1, anything else −1.
pub fn sample_outcome(p_plus: f64, omega: f64) -> i8 {
    debug_assert!(
        (0.0..=1.0).contains(&p_plus),
        "response probability must be in [0,1], got {p_plus}"
    );
    if omega < p_plus {
        1
    } else {
        -1
    }
}

/// The six independent uniforms one event consumes, in draw order.
///
/// Every event draws all six regardless of source, so the generator
/// advances by a fixed stride per event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRandoms {
    /// Selects the A-side setting: `< ½` is a, otherwise a′.
    pub choice_a: f64,
    /// Selects the B-side setting: `< ½` is b, otherwise b′.
    pub choice_b: f64,
    /// Drives the ξ draw (unused for non-mixture sources).
    pub xi: f64,
    /// Drives the λ draw (branch pick, or position on the circle).
    pub lambda: f64,
    /// Thresholds the A-side outcome.
    pub omega_a: f64,
    /// Thresholds the B-side outcome.
    pub omega_b: f64,
}

impl EventRandoms {
    pub fn from_rng<R: Rng + ?Sized>(rng: &mut R) -> Self {
        EventRandoms {
            choice_a: rng.random(),
            choice_b: rng.random(),
            xi: rng.random(),
            lambda: rng.random(),
            omega_a: rng.random(),
            omega_b: rng.random(),
        }
    }
}

/// Everything one simulated event produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub pair: SettingsPair,
    /// The drawn (or fixed) ξ; `None` for the uniform source.
    pub xi: Option<Angle>,
    /// Which quad slot ξ came from; `None` unless ξ was drawn per event.
    pub xi_slot: Option<QuadSlot>,
    pub lambda: Angle,
    /// Which member of {ξ, ξ + π} λ is; `None` for the uniform source.
    pub lambda_branch: Option<LambdaBranch>,
    pub outcome_a: i8,
    pub outcome_b: i8,
}

/// Runs one event: choose settings, draw ξ and λ, then realize both outcomes
/// locally — each side reads only its own setting, λ, and its own threshold
/// uniform.
pub fn generate_event(
    quad: &SettingsQuad,
    source: &SourcePolicy,
    randoms: &EventRandoms,
) -> Result<EventRecord, Error> {
    let index_a = if randoms.choice_a < 0.5 { AliceSetting::A } else { AliceSetting::APrime };
    let index_b = if randoms.choice_b < 0.5 { BobSetting::B } else { BobSetting::BPrime };
    let pair = SettingsPair::from_quad(quad, index_a, index_b);

    let (xi, xi_slot, resolved) = match source {
        SourcePolicy::DeltaPair(xi) => (Some(*xi), None, ResolvedSource::DeltaPair(*xi)),
        SourcePolicy::UniformOnCircle => (None, None, ResolvedSource::Uniform),
        SourcePolicy::GammaMixture { gamma, scheme } => {
            let (slot, xi) = sample_xi_slot(scheme, *gamma, quad, &pair, randoms.xi)?;
            (Some(xi), Some(slot), ResolvedSource::DeltaPair(xi))
        }
    };

    let (lambda, lambda_branch) = match resolved {
        ResolvedSource::DeltaPair(xi) => {
            if randoms.lambda < 0.5 {
                (xi, Some(LambdaBranch::AtXi))
            } else {
                (xi.antipode(), Some(LambdaBranch::Antipode))
            }
        }
        ResolvedSource::Uniform => (sample_lambda(ResolvedSource::Uniform, randoms.lambda), None),
    };

    let outcome_a = sample_outcome(response_prob_a(pair.phi_a, lambda, 1), randoms.omega_a);
    let outcome_b = sample_outcome(response_prob_b(pair.phi_b, lambda, 1), randoms.omega_b);

    Ok(EventRecord { pair, xi, xi_slot, lambda, lambda_branch, outcome_a, outcome_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn quad() -> SettingsQuad {
        SettingsQuad::new(Angle::new(0.3), Angle::new(1.9), Angle::new(1.1), Angle::new(2.7))
    }

    #[test]
    fn response_probabilities_match_cosine_law() {
        let phi = Angle::new(0.3);
        let lambda = Angle::new(2.0);
        // ½(1 + cos(0.3 − 2.0)) and ½(1 − cos(1.1 − 2.0)), frozen at 30-digit
        // precision
        assert_abs_diff_eq!(
            response_prob_a(phi, lambda, 1),
            0.435_577_752_852_237_66,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            response_prob_b(Angle::new(1.1), lambda, 1),
            0.189_195_015_864_667_77,
            epsilon = 1e-12
        );
    }

    #[test]
    fn response_probabilities_of_opposite_outcomes_sum_to_one() {
        let phi = Angle::new(4.4);
        let lambda = Angle::new(0.7);
        assert_abs_diff_eq!(
            response_prob_a(phi, lambda, 1) + response_prob_a(phi, lambda, -1),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            response_prob_b(phi, lambda, 1) + response_prob_b(phi, lambda, -1),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn aligned_and_antialigned_settings_are_deterministic() {
        let lambda = Angle::new(1.0);
        assert_eq!(response_prob_a(lambda, lambda, 1), 1.0);
        assert_eq!(response_prob_a(lambda.antipode(), lambda, 1), 0.0);
        // B responds anti-aligned: φ_B = λ forces B = −1
        assert_eq!(response_prob_b(lambda, lambda, -1), 1.0);
        assert_eq!(response_prob_b(lambda, lambda, 1), 0.0);
    }

    #[test]
    fn lambda_branches_split_at_one_half() {
        let xi = Angle::new(0.25);
        assert_eq!(sample_lambda(ResolvedSource::DeltaPair(xi), 0.0), xi);
        assert_eq!(sample_lambda(ResolvedSource::DeltaPair(xi), 0.499_999), xi);
        assert_eq!(sample_lambda(ResolvedSource::DeltaPair(xi), 0.5), xi.antipode());
        assert_eq!(sample_lambda(ResolvedSource::DeltaPair(xi), 0.999_999), xi.antipode());
    }

    #[test]
    fn uniform_lambda_scales_the_draw_to_the_circle() {
        let lambda = sample_lambda(ResolvedSource::Uniform, 0.75);
        assert_abs_diff_eq!(lambda.radians(), 1.5 * PI, epsilon = 1e-15);
    }

    #[test]
    fn paired_symmetric_weights_put_gamma_on_the_chosen_pair() {
        let check = |pair, expected: [f64; 4]| {
            let w = XiScheme::PairedSymmetric.weights(0.8, pair).unwrap();
            for (got, want) in w.iter().zip(expected) {
                assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
            }
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        };
        check(PairKind::AB, [0.4, 0.1, 0.4, 0.1]);
        check(PairKind::APrimeBPrime, [0.1, 0.4, 0.1, 0.4]);
        check(PairKind::ABPrime, [0.4, 0.1, 0.1, 0.4]);
        check(PairKind::APrimeB, [0.1, 0.4, 0.4, 0.1]);
    }

    #[test]
    fn gamma_outside_unit_interval_is_rejected() {
        assert!(matches!(
            XiScheme::PairedSymmetric.weights(1.2, PairKind::AB),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(matches!(
            XiScheme::PairedSymmetric.weights(-0.1, PairKind::AB),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(matches!(
            XiScheme::PairedSymmetric.weights(f64::NAN, PairKind::AB),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(SourcePolicy::gamma_mixture(1.2, XiScheme::PairedSymmetric).is_err());
        assert!(SourcePolicy::gamma_mixture(1.0, XiScheme::PairedSymmetric).is_ok());
        assert!(SourcePolicy::gamma_mixture(0.0, XiScheme::PairedSymmetric).is_ok());
    }

    #[test]
    fn custom_table_rows_must_be_normalized_and_non_negative() {
        let mut weights = [[0.25; 4]; 4];
        assert!(SourcePolicy::gamma_mixture(0.5, XiScheme::CustomTable { weights }).is_ok());

        weights[2] = [0.5, 0.5, 0.5, -0.5];
        assert!(matches!(
            SourcePolicy::gamma_mixture(0.5, XiScheme::CustomTable { weights }).unwrap_err(),
            Error::NegativeXiWeight { pair: PairKind::APrimeB, .. }
        ));

        weights[2] = [0.5, 0.5, 0.5, 0.5];
        assert!(matches!(
            SourcePolicy::gamma_mixture(0.5, XiScheme::CustomTable { weights }).unwrap_err(),
            Error::XiWeightsNotNormalized { pair: PairKind::APrimeB, .. }
        ));
    }

    #[test]
    fn xi_slabs_for_paired_symmetric_are_chosen_first() {
        let quad = quad();
        let pair = quad.pair(PairKind::AB);
        // Γ = 1: [a: ½, b: ½], so u = 0.4 → a and u = 0.6 → b
        let (slot, xi) =
            sample_xi_slot(&XiScheme::PairedSymmetric, 1.0, &quad, &pair, 0.4).unwrap();
        assert_eq!(slot, QuadSlot::A);
        assert_eq!(xi, quad.a);
        let (slot, _) = sample_xi_slot(&XiScheme::PairedSymmetric, 1.0, &quad, &pair, 0.6).unwrap();
        assert_eq!(slot, QuadSlot::B);

        // Γ = 0.8, pair (a′, b): slabs a′ .4 | b .4 | a .1 | b′ .1
        let pair = quad.pair(PairKind::APrimeB);
        let cases = [
            (0.0, QuadSlot::APrime),
            (0.399, QuadSlot::APrime),
            (0.4, QuadSlot::B),
            (0.799, QuadSlot::B),
            (0.8, QuadSlot::A),
            (0.899, QuadSlot::A),
            (0.9, QuadSlot::BPrime),
            (0.999_999_999, QuadSlot::BPrime),
        ];
        for (u, expected) in cases {
            let (slot, xi) =
                sample_xi_slot(&XiScheme::PairedSymmetric, 0.8, &quad, &pair, u).unwrap();
            assert_eq!(slot, expected, "u = {u}");
            assert_eq!(xi, quad.get(expected));
        }
    }

    #[test]
    fn xi_zero_width_slabs_are_never_hit() {
        let quad = quad();
        let pair = quad.pair(PairKind::AB);
        // Γ = 1: the unchosen slabs have zero width; the top of the range
        // must fall into the last chosen slab, not a zero-width one.
        let (slot, _) =
            sample_xi_slot(&XiScheme::PairedSymmetric, 1.0, &quad, &pair, 0.999_999_999_999)
                .unwrap();
        assert_eq!(slot, QuadSlot::B);

        // Γ = 0: only the unchosen slabs remain
        let (slot, _) = sample_xi_slot(&XiScheme::PairedSymmetric, 0.0, &quad, &pair, 0.0).unwrap();
        assert_eq!(slot, QuadSlot::APrime);
        let (slot, _) =
            sample_xi_slot(&XiScheme::PairedSymmetric, 0.0, &quad, &pair, 0.75).unwrap();
        assert_eq!(slot, QuadSlot::BPrime);
    }

    #[test]
    fn custom_table_slabs_follow_quad_order() {
        let quad = quad();
        let pair = quad.pair(PairKind::AB);
        let weights = [[0.1, 0.2, 0.3, 0.4]; 4];
        let scheme = XiScheme::CustomTable { weights };
        let cases = [
            (0.05, QuadSlot::A),
            (0.15, QuadSlot::APrime),
            (0.45, QuadSlot::B),
            (0.95, QuadSlot::BPrime),
        ];
        for (u, expected) in cases {
            let (slot, _) = sample_xi_slot(&scheme, 0.5, &quad, &pair, u).unwrap();
            assert_eq!(slot, expected, "u = {u}");
        }
    }

    #[test]
    fn outcome_threshold_is_strict() {
        assert_eq!(sample_outcome(0.75, 0.749_999), 1);
        assert_eq!(sample_outcome(0.75, 0.75), -1);
        assert_eq!(sample_outcome(0.0, 0.0), -1);
        assert_eq!(sample_outcome(1.0, 0.999_999), 1);
    }

    #[test]
    fn generate_event_traces_the_draws_through() {
        let quad = quad();
        let source = SourcePolicy::gamma_mixture(0.8, XiScheme::PairedSymmetric).unwrap();
        // choices pick (a, b′); ξ draw 0.45 lands in the chosen-b′ slab
        // [0.4, 0.8); λ draw 0.9 takes the antipode branch
        let randoms = EventRandoms {
            choice_a: 0.3,
            choice_b: 0.7,
            xi: 0.45,
            lambda: 0.9,
            omega_a: 0.0,
            omega_b: 0.99,
        };
        let event = generate_event(&quad, &source, &randoms).unwrap();
        assert_eq!(event.pair.kind(), PairKind::ABPrime);
        assert_eq!(event.pair.phi_a, quad.a);
        assert_eq!(event.pair.phi_b, quad.b_prime);
        assert_eq!(event.xi_slot, Some(QuadSlot::BPrime));
        assert_eq!(event.xi, Some(quad.b_prime));
        assert_eq!(event.lambda_branch, Some(LambdaBranch::Antipode));
        assert_eq!(event.lambda, quad.b_prime.antipode());
        // ω_a = 0 is below any positive response probability
        assert_eq!(event.outcome_a, 1);
        // φ_B = ξ and λ = ξ + π forces B = +1, so even ω_b = 0.99 gives +1
        assert_eq!(event.outcome_b, 1);
    }

    #[test]
    fn generate_event_with_fixed_xi_records_no_slot() {
        let quad = quad();
        let xi = Angle::new(2.0);
        let randoms = EventRandoms {
            choice_a: 0.6,
            choice_b: 0.1,
            xi: 0.99,
            lambda: 0.1,
            omega_a: 0.5,
            omega_b: 0.5,
        };
        let event = generate_event(&quad, &SourcePolicy::DeltaPair(xi), &randoms).unwrap();
        assert_eq!(event.pair.kind(), PairKind::APrimeB);
        assert_eq!(event.xi, Some(xi));
        assert_eq!(event.xi_slot, None);
        assert_eq!(event.lambda_branch, Some(LambdaBranch::AtXi));
        assert_eq!(event.lambda, xi);
    }

    #[test]
    fn generate_event_with_uniform_source_records_no_xi() {
        let quad = quad();
        let randoms = EventRandoms {
            choice_a: 0.6,
            choice_b: 0.9,
            xi: 0.5,
            lambda: 0.25,
            omega_a: 0.5,
            omega_b: 0.5,
        };
        let event = generate_event(&quad, &SourcePolicy::UniformOnCircle, &randoms).unwrap();
        assert_eq!(event.pair.kind(), PairKind::APrimeBPrime);
        assert_eq!(event.xi, None);
        assert_eq!(event.xi_slot, None);
        assert_eq!(event.lambda_branch, None);
        assert_abs_diff_eq!(event.lambda.radians(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn from_theta_builds_the_reference_family() {
        let theta = 5.0 * PI / 4.0;
        let quad = SettingsQuad::from_theta(theta);
        assert_abs_diff_eq!(quad.a.radians(), PI / 2.0, epsilon = 1e-12);
        assert_eq!(quad.a_prime.radians(), 0.0);
        assert_abs_diff_eq!(quad.b.radians(), 5.0 * PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(quad.b_prime.radians(), 7.0 * PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn pair_kind_round_trips_through_settings() {
        for kind in PairKind::ALL {
            assert_eq!(PairKind::new(kind.alice(), kind.bob()), kind);
            assert_eq!(PairKind::ALL[kind.index()], kind);
        }
    }
}
