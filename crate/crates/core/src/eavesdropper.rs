//! The optimal individual attack: a symmetric probe coupled to each particle,
//! measured only after Alice has announced her basis.
//!
//! The probe lives in a four-dimensional space with orthonormal basis
//! `η0..η3`. The probe starts in `|ψ⟩ = η0` and the coupling acts as
//!
//! ```text
//! |0⟩|ψ⟩ → √(1−d) |0⟩|χ00⟩ + √d |1⟩|χ01⟩
//! |1⟩|ψ⟩ → √d |0⟩|χ10⟩ + √(1−d) |1⟩|χ11⟩
//! ```
//!
//! so every preparation reaches Alice as `(1 − 2d)ρ + d·I`. Given Alice's
//! public basis and outcome, the probe is in one of two mixed states that are
//! unitarily equivalent to the pair `Γ0`, `Γ1`; Eve measures the rank-one
//! POVM that optimally separates that pair, rotated into the announced basis.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_strength, Error, Result};
use crate::qmath::{
    check_povm, clamp_probability, complete_unitary, partial_trace_first, partial_trace_second,
    tensor_product, ComplexMatrix, DensityMatrix, Povm, StateVector,
};
use crate::qubit::{Basis, Bit, Outcome, Preparation};

pub const PROBE_DIM: usize = 4;

/// Probability below which a conditioning branch is treated as impossible.
pub const DEGENERATE_BRANCH: f64 = 1e-14;

fn eta(components: [f64; 4]) -> StateVector {
    StateVector::from_real(&components).expect("probe vectors are normalized by construction")
}

/// `√(d(1−d))`
fn root_term(d: f64) -> f64 {
    (d * (1.0 - d)).sqrt()
}

/// `(cos γ, sin γ)` with `cos²γ = (1 + 2√(d(1−d)))/2`.
pub fn mixing_angle(d: f64) -> Result<(f64, f64)> {
    check_strength(d)?;
    let x = 2.0 * root_term(d);
    Ok((((1.0 + x) / 2.0).sqrt(), ((1.0 - x).max(0.0) / 2.0).sqrt()))
}

/// The eight probe states `|χ_ij⟩`, expressed over `η0..η3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVectors {
    pub chi00: StateVector,
    pub chi01: StateVector,
    pub chi10: StateVector,
    pub chi11: StateVector,
    pub chi_pp: StateVector,
    pub chi_pm: StateVector,
    pub chi_mp: StateVector,
    pub chi_mm: StateVector,
}

impl ProbeVectors {
    pub fn for_strength(d: f64) -> Result<Self> {
        check_strength(d)?;
        let s = root_term(d);
        let c = 1.0 - 2.0 * d;
        // The σ1 states follow from linearity of the coupling; these are the
        // closed forms, which stay finite at d = 0 and d = 1/2.
        Ok(Self {
            chi00: eta([1.0, 0.0, 0.0, 0.0]),
            chi01: eta([0.0, 1.0, 0.0, 0.0]),
            chi10: eta([0.0, c, 0.0, 2.0 * s]),
            chi11: eta([c, 0.0, 2.0 * s, 0.0]),
            chi_pp: eta([1.0 - d, s, s, d]),
            chi_pm: eta([s, -d, -(1.0 - d), s]),
            chi_mp: eta([s, d, -(1.0 - d), -s]),
            chi_mm: eta([1.0 - d, -s, s, -d]),
        })
    }

    /// `d = (1 − ⟨χ00|χ11⟩) / (2 − ⟨χ00|χ11⟩ + ⟨χ01|χ10⟩)`
    pub fn strength_from_overlaps(&self) -> f64 {
        let a = self.chi00.inner(&self.chi11).re;
        let b = self.chi01.inner(&self.chi10).re;
        (1.0 - a) / (2.0 - a + b)
    }

    /// The same ratio with denominator `1 − ⟨χ00|χ11⟩ + ⟨χ01|χ10⟩`.
    ///
    /// Kept for comparison: for these vectors it evaluates to `2d`.
    pub fn strength_from_overlaps_alt(&self) -> f64 {
        let a = self.chi00.inner(&self.chi11).re;
        let b = self.chi01.inner(&self.chi10).re;
        (1.0 - a) / (1.0 - a + b)
    }
}

/// Analytic probabilities `Pr(E_i | Γ_j)`, rows `E1..E4`, columns `Γ0, Γ1`.
pub fn discrimination_table(d: f64) -> Result<[[f64; 2]; 4]> {
    let (cos_g, sin_g) = mixing_angle(d)?;
    let (c2, s2) = (cos_g * cos_g, sin_g * sin_g);
    Ok([
        [(1.0 - d) * c2, (1.0 - d) * s2],
        [(1.0 - d) * s2, (1.0 - d) * c2],
        [d * c2, d * s2],
        [d * s2, d * c2],
    ])
}

/// Eve's measurement result, `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct EveOutcome(u8);

impl EveOutcome {
    pub const ALL: [EveOutcome; 4] = [EveOutcome(1), EveOutcome(2), EveOutcome(3), EveOutcome(4)];

    pub fn new(index: u8) -> Option<Self> {
        (1..=4).contains(&index).then_some(Self(index))
    }

    /// One-based label.
    pub fn label(self) -> u8 {
        self.0
    }

    pub fn zero_based(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl TryFrom<u8> for EveOutcome {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        EveOutcome::new(v).ok_or_else(|| format!("Eve's outcome must be 1..=4, got {v}"))
    }
}

impl From<EveOutcome> for u8 {
    fn from(o: EveOutcome) -> u8 {
        o.0
    }
}

/// A precomputed attack of strength `d`.
#[derive(Debug, Clone)]
pub struct ProbeAttack {
    strength: f64,
    chi: ProbeVectors,
    probe_ready: StateVector,
    coupling: ComplexMatrix,
    fuchs_povm: Povm,
    rotation_v: ComplexMatrix,
    rotation_w: ComplexMatrix,
    povm_z: Povm,
    povm_x: Povm,
    joint: [DensityMatrix; 4],
    forwarded: [DensityMatrix; 4],
    // indexed [basis][outcome]
    branch_projectors: [[ComplexMatrix; 2]; 2],
}

fn basis_index(basis: Basis) -> usize {
    match basis {
        Basis::Sigma1 => 0,
        Basis::Sigma3 => 1,
    }
}

fn outcome_index(m: Outcome) -> usize {
    match m {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

fn column(entries: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(entries.len(), entries.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn kron_columns(particle: [f64; 2], probe: &StateVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(8);
    for p in particle {
        out.extend(probe.amplitudes().iter().map(|a| p * a.re));
    }
    out
}

/// Builds the symmetric probe attack of strength `d ∈ [0, 1/2]`.
pub fn build_probe_attack(d: f64) -> Result<ProbeAttack> {
    ProbeAttack::new(d)
}

impl ProbeAttack {
    pub fn new(d: f64) -> Result<Self> {
        check_strength(d)?;
        let chi = ProbeVectors::for_strength(d)?;
        let probe_ready = StateVector::basis(PROBE_DIM, 0)?;

        let (keep, flip) = ((1.0 - d).sqrt(), d.sqrt());
        let mut image_zero = kron_columns([keep, 0.0], &chi.chi00);
        for (x, y) in image_zero.iter_mut().zip(kron_columns([0.0, flip], &chi.chi01)) {
            *x += y;
        }
        let mut image_one = kron_columns([flip, 0.0], &chi.chi10);
        for (x, y) in image_one.iter_mut().zip(kron_columns([0.0, keep], &chi.chi11)) {
            *x += y;
        }
        // |0⟩|η0⟩ is column 0 and |1⟩|η0⟩ is column 4 in particle-major order.
        let coupling = complete_unitary(8, &[(0, column(&image_zero)), (4, column(&image_one))])?;

        let (cos_g, sin_g) = mixing_angle(d)?;
        let fuchs_povm = Povm::from_basis(&[
            eta([cos_g, 0.0, -sin_g, 0.0]),
            eta([sin_g, 0.0, cos_g, 0.0]),
            eta([0.0, cos_g, 0.0, -sin_g]),
            eta([0.0, sin_g, 0.0, cos_g]),
        ])?;

        // Reflection in the (η0, η2) plane carrying χ00 to χ11.
        let s = root_term(d);
        let c = 1.0 - 2.0 * d;
        let rotation_v = ComplexMatrix::from_real(
            4,
            &[
                c, 0.0, 2.0 * s, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                2.0 * s, 0.0, -c, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )?;
        // Columns are an orthonormal basis of span{χ++, χ+−, χ−+, χ−−} built
        // the same way η0..η3 is built from χ00, χ01, χ11, χ10.
        let transport = ComplexMatrix::from_real(
            4,
            &[
                1.0 - d, s, s, d, //
                s, -d, -(1.0 - d), s, //
                s, -(1.0 - d), d, -s, //
                d, s, -s, -(1.0 - d),
            ],
        )?
        .adjoint();
        let rotation_w = &transport * &rotation_v;

        let povm_z = fuchs_povm.conjugated_by(&rotation_v)?;
        let povm_x = fuchs_povm.conjugated_by(&rotation_w)?;
        for povm in [&fuchs_povm, &povm_z, &povm_x] {
            let report = check_povm(povm);
            if !report.valid {
                return Err(Error::Construction(format!(
                    "probe POVM failed validation: {report:?}"
                )));
            }
        }

        let ready = probe_ready.projector();
        let mut joint = Vec::with_capacity(4);
        let mut forwarded = Vec::with_capacity(4);
        for prep in Preparation::ALL {
            let input = tensor_product(prep.density().matrix(), &ready)?;
            let state = DensityMatrix::from_matrix_unchecked(coupling.conjugate(&input)?);
            forwarded.push(DensityMatrix::from_matrix_unchecked(partial_trace_second(
                state.matrix(),
                PROBE_DIM,
            )?));
            joint.push(state);
        }

        let identity = ComplexMatrix::identity(PROBE_DIM)?;
        let lift = |basis: Basis, m: Outcome| tensor_product(&basis.projector(m), &identity);
        let branch_projectors = [
            [
                lift(Basis::Sigma1, Outcome::Plus)?,
                lift(Basis::Sigma1, Outcome::Minus)?,
            ],
            [
                lift(Basis::Sigma3, Outcome::Plus)?,
                lift(Basis::Sigma3, Outcome::Minus)?,
            ],
        ];

        Ok(Self {
            strength: d,
            chi,
            probe_ready,
            coupling,
            fuchs_povm,
            rotation_v,
            rotation_w,
            povm_z,
            povm_x,
            joint: joint.try_into().expect("four preparations"),
            forwarded: forwarded.try_into().expect("four preparations"),
            branch_projectors,
        })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn probe_vectors(&self) -> &ProbeVectors {
        &self.chi
    }

    /// Initial probe state `|ψ⟩`.
    pub fn probe_ready(&self) -> &StateVector {
        &self.probe_ready
    }

    /// The 8×8 particle ⊗ probe unitary.
    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    /// `{E_i}` separating `Γ0` from `Γ1`.
    pub fn fuchs_povm(&self) -> &Povm {
        &self.fuchs_povm
    }

    /// Probe unitary relating the σ3 branch states to `Γ0`, `Γ1`.
    pub fn rotation_v(&self) -> &ComplexMatrix {
        &self.rotation_v
    }

    /// Probe unitary relating the σ1 branch states to `Γ0`, `Γ1`.
    pub fn rotation_w(&self) -> &ComplexMatrix {
        &self.rotation_w
    }

    /// Measurement used after Alice announces σ3.
    pub fn povm_z(&self) -> &Povm {
        &self.povm_z
    }

    /// Measurement used after Alice announces σ1.
    pub fn povm_x(&self) -> &Povm {
        &self.povm_x
    }

    pub fn povm_for(&self, basis: Basis) -> &Povm {
        match basis {
            Basis::Sigma1 => &self.povm_x,
            Basis::Sigma3 => &self.povm_z,
        }
    }

    /// `U(ρ_i ⊗ |ψ⟩⟨ψ|)U†`
    pub fn joint_state(&self, prepared: Preparation) -> &DensityMatrix {
        &self.joint[prepared.index()]
    }

    /// Particle marginal reaching Alice.
    pub fn forwarded_state(&self, prepared: Preparation) -> &DensityMatrix {
        &self.forwarded[prepared.index()]
    }

    /// `Γ0 = (1−d)|χ00⟩⟨χ00| + d|χ01⟩⟨χ01|` and `Γ1 = d|χ10⟩⟨χ10| + (1−d)|χ11⟩⟨χ11|`.
    pub fn fuchs_states(&self) -> (DensityMatrix, DensityMatrix) {
        let d = self.strength;
        let g0 = &self.chi.chi00.projector().scale(1.0 - d) + &self.chi.chi01.projector().scale(d);
        let g1 = &self.chi.chi10.projector().scale(d) + &self.chi.chi11.projector().scale(1.0 - d);
        (
            DensityMatrix::from_matrix_unchecked(g0),
            DensityMatrix::from_matrix_unchecked(g1),
        )
    }

    /// Eve's description of her probe once Alice has announced `basis` and
    /// found `m`, averaged over Bob's four equally likely preparations.
    pub fn probe_state_given(&self, basis: Basis, m: Outcome) -> Result<DensityMatrix> {
        let projector = &self.branch_projectors[basis_index(basis)][outcome_index(m)];
        let mut acc = ComplexMatrix::zeros(8)?;
        for joint in &self.joint {
            let collapsed = projector.conjugate(joint.matrix())?;
            acc = &acc + &collapsed.scale(0.25);
        }
        let weight = acc.trace().re;
        if weight < DEGENERATE_BRANCH {
            return Err(Error::DegenerateBranch(weight));
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            partial_trace_first(&acc, 2)?.scale(1.0 / weight),
        ))
    }

    pub(crate) fn branch_projector(&self, basis: Basis, m: Outcome) -> &ComplexMatrix {
        &self.branch_projectors[basis_index(basis)][outcome_index(m)]
    }
}

/// Result of routing one particle through the probe.
#[derive(Debug, Clone)]
pub struct Interception {
    /// Particle state reaching Alice.
    pub forwarded: DensityMatrix,
    /// Particle ⊗ probe state, retained until Alice's announcements.
    pub joint: DensityMatrix,
}

pub fn eve_intercept(prepared: Preparation, attack: &ProbeAttack) -> Interception {
    Interception {
        forwarded: attack.forwarded_state(prepared).clone(),
        joint: attack.joint_state(prepared).clone(),
    }
}

/// Outcome probabilities of Eve's basis-matched measurement after Alice's
/// measurement in `basis` produced `m`.
pub fn eve_outcome_distribution(
    joint: &DensityMatrix,
    basis: Basis,
    m: Outcome,
    attack: &ProbeAttack,
) -> Result<[f64; 4]> {
    if joint.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "expected a particle-probe state of dimension 8, got {}",
            joint.dim()
        )));
    }
    let collapsed = attack.branch_projector(basis, m).conjugate(joint.matrix())?;
    let weight = collapsed.trace().re;
    if weight < DEGENERATE_BRANCH {
        return Err(Error::DegenerateBranch(weight));
    }
    let probe = partial_trace_first(&collapsed, 2)?;
    let mut dist = [0.0; 4];
    for (slot, effect) in dist.iter_mut().zip(attack.povm_for(basis).elements()) {
        *slot = clamp_probability(effect.trace_product(&probe)?.re / weight)?;
    }
    Ok(dist)
}

/// Samples Eve's outcome; see [`eve_outcome_distribution`].
pub fn eve_measure<R: Rng + ?Sized>(
    joint: &DensityMatrix,
    basis: Basis,
    m: Outcome,
    attack: &ProbeAttack,
    rng: &mut R,
) -> Result<EveOutcome> {
    let dist = eve_outcome_distribution(joint, basis, m, attack)?;
    Ok(sample_outcome(&dist, rng.random::<f64>()))
}

pub(crate) fn sample_outcome(dist: &[f64; 4], u: f64) -> EveOutcome {
    let mut cumulative = 0.0;
    let mut last_possible = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            last_possible = i;
        }
        cumulative += p;
        if p > 0.0 && u < cumulative {
            return EveOutcome::ALL[i];
        }
    }
    EveOutcome::ALL[last_possible]
}

/// The four classes of Eve's compound events with a common likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventSet {
    S1,
    S2,
    S3,
    S4,
}

impl EventSet {
    pub const ALL: [EventSet; 4] = [EventSet::S1, EventSet::S2, EventSet::S3, EventSet::S4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index() + 1)
    }
}

/// Classifies a bit-announcement event `(σ_l, a, outcome)`.
///
/// The grouping is the same in both bases: with `a = 0` outcomes 1..4 fall
/// into S1..S4, and with `a = 1` the pairs (1,2) and (3,4) swap.
pub fn classify_event(_basis: Basis, a: Bit, outcome: EveOutcome) -> EventSet {
    use EventSet::*;
    match (a, outcome.label()) {
        (Bit::Zero, 1) | (Bit::One, 2) => S1,
        (Bit::Zero, 2) | (Bit::One, 1) => S2,
        (Bit::Zero, 3) | (Bit::One, 4) => S3,
        _ => S4,
    }
}

/// `p1..p4`: probability of each event set on a bit-announcement shot, given `b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl EventProbabilities {
    /// Probabilities of `S1..S4` given message bit `b`; `b = 1` swaps
    /// `p1 ↔ p2` and `p3 ↔ p4`.
    pub fn given(&self, b: Bit) -> [f64; 4] {
        match b {
            Bit::Zero => [self.p1, self.p2, self.p3, self.p4],
            Bit::One => [self.p2, self.p1, self.p4, self.p3],
        }
    }

    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + self.p3 + self.p4
    }
}

pub fn event_probabilities(d: f64) -> Result<EventProbabilities> {
    check_strength(d)?;
    let x = 2.0 * root_term(d);
    Ok(EventProbabilities {
        p1: 0.5 * (1.0 - d) * (1.0 - x),
        p2: 0.5 * (1.0 - d) * (1.0 + x),
        p3: 0.5 * d * (1.0 - x),
        p4: 0.5 * d * (1.0 + x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> impl Iterator<Item = f64> {
        (0..=10).map(|i| i as f64 * 0.05)
    }

    #[test]
    fn invalid_strength_rejected() {
        assert!(matches!(
            build_probe_attack(0.51),
            Err(Error::InvalidStrength(_))
        ));
        assert!(build_probe_attack(-0.01).is_err());
        assert!(build_probe_attack(f64::NAN).is_err());
    }

    #[test]
    fn orthogonality_conditions() {
        for d in grid() {
            let c = ProbeVectors::for_strength(d).unwrap();
            let zero = |a: &StateVector, b: &StateVector| a.inner(b).norm();
            for (a, b) in [
                (&c.chi00, &c.chi10),
                (&c.chi01, &c.chi11),
                (&c.chi00, &c.chi01),
                (&c.chi10, &c.chi11),
                (&c.chi_pp, &c.chi_mp),
                (&c.chi_pm, &c.chi_mm),
                (&c.chi_pp, &c.chi_pm),
                (&c.chi_mp, &c.chi_mm),
            ] {
                assert!(zero(a, b) < 1e-12, "d={d}");
            }
            let expected = 1.0 - 2.0 * d;
            assert!((c.chi00.inner(&c.chi11).re - expected).abs() < 1e-15);
            assert!((c.chi01.inner(&c.chi10).re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_strength_is_transparent() {
        let attack = build_probe_attack(0.0).unwrap();
        let c = attack.probe_vectors();
        assert_eq!(c.chi10, c.chi01);
        assert_eq!(c.chi11, c.chi00);
        for prep in Preparation::ALL {
            let out = eve_intercept(prep, &attack);
            assert!(out.forwarded.matrix().approx_eq(prep.density().matrix(), 1e-15));
        }
    }

    #[test]
    fn full_strength_vectors() {
        let c = ProbeVectors::for_strength(0.5).unwrap();
        assert!(c.chi10.inner(&eta([0.0, 0.0, 0.0, 1.0])).re > 1.0 - 1e-15);
        assert!(c.chi11.inner(&eta([0.0, 0.0, 1.0, 0.0])).re > 1.0 - 1e-15);
        assert!(c.chi00.inner(&c.chi11).norm() < 1e-15);
    }

    #[test]
    fn linear_relationships_hold() {
        // χ++ = ½[χ00 + χ11 + √(d/(1−d))(χ01 + χ10)] and friends, away from the endpoints.
        for d in [0.05, 0.2, 0.33, 0.45] {
            let c = ProbeVectors::for_strength(d).unwrap();
            let v = |s: &StateVector| -> Vec<f64> { s.amplitudes().iter().map(|a| a.re).collect() };
            let (a, b, e, f) = (v(&c.chi00), v(&c.chi01), v(&c.chi10), v(&c.chi11));
            let r = (d / (1.0 - d)).sqrt();
            let ri = 1.0 / r;
            for i in 0..4 {
                let pp = 0.5 * (a[i] + f[i] + r * (b[i] + e[i]));
                let pm = 0.5 * (ri * (a[i] - f[i]) - (b[i] - e[i]));
                let mp = 0.5 * (ri * (a[i] - f[i]) + (b[i] - e[i]));
                let mm = 0.5 * (a[i] + f[i] - r * (b[i] + e[i]));
                assert!((pp - v(&c.chi_pp)[i]).abs() < 1e-12);
                assert!((pm - v(&c.chi_pm)[i]).abs() < 1e-12);
                assert!((mp - v(&c.chi_mp)[i]).abs() < 1e-12);
                assert!((mm - v(&c.chi_mm)[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_decomposes_diagonal_inputs() {
        // U|±⟩|ψ⟩ = √(1−d)|±⟩|χ±±⟩ + √d|∓⟩|χ±∓⟩
        for d in [0.0, 0.1, 0.3, 0.5] {
            let attack = build_probe_attack(d).unwrap();
            let c = attack.probe_vectors();
            let psi = attack.probe_ready();
            let plus = Preparation::Plus.state_vector();
            let minus = Preparation::Minus.state_vector();
            let out_plus = plus.kron(psi).unwrap().apply(attack.coupling()).unwrap();
            let out_minus = minus.kron(psi).unwrap().apply(attack.coupling()).unwrap();
            let combine = |x: &StateVector, cx: f64, y: &StateVector, cy: f64| -> Vec<Complex64> {
                x.amplitudes()
                    .iter()
                    .zip(y.amplitudes())
                    .map(|(p, q)| p * cx + q * cy)
                    .collect()
            };
            let (keep, flip) = ((1.0 - d).sqrt(), d.sqrt());
            let e_plus = combine(
                &plus.kron(&c.chi_pp).unwrap(),
                keep,
                &minus.kron(&c.chi_pm).unwrap(),
                flip,
            );
            let e_minus = combine(
                &plus.kron(&c.chi_mp).unwrap(),
                flip,
                &minus.kron(&c.chi_mm).unwrap(),
                keep,
            );
            for i in 0..8 {
                assert!((out_plus.amplitudes()[i] - e_plus[i]).norm() < 1e-12, "d={d}");
                assert!((out_minus.amplitudes()[i] - e_minus[i]).norm() < 1e-12, "d={d}");
            }
        }
    }

    #[test]
    fn coupling_is_unitary_and_depolarizes() {
        for d in grid() {
            let attack = build_probe_attack(d).unwrap();
            assert!(attack.coupling().unitarity_residual() < 1e-10);
            for prep in Preparation::ALL {
                let expected = &prep.density().matrix().scale(1.0 - 2.0 * d)
                    + &ComplexMatrix::identity(2).unwrap().scale(d);
                assert!(attack.forwarded_state(prep).matrix().approx_eq(&expected, 1e-10));
            }
        }
    }

    #[test]
    fn intercept_quarter_strength() {
        let attack = build_probe_attack(0.25).unwrap();
        let out = eve_intercept(Preparation::Zero, &attack);
        let expected = ComplexMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!(out.forwarded.matrix().approx_eq(&expected, 1e-12));
        for prep in Preparation::ALL {
            let out = eve_intercept(prep, &attack);
            assert!((out.forwarded.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!((out.joint.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotations_are_unitary() {
        for d in grid() {
            let attack = build_probe_attack(d).unwrap();
            assert!(attack.rotation_v().unitarity_residual() < 1e-12);
            assert!(attack.rotation_w().unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn povms_valid() {
        let attack = build_probe_attack(0.2).unwrap();
        for povm in [attack.fuchs_povm(), attack.povm_z(), attack.povm_x()] {
            let report = check_povm(povm);
            assert!(report.valid);
            assert!(report.completeness_residual < 1e-10);
        }
    }

    #[test]
    fn discrimination_table_on_fuchs_states() {
        for d in grid() {
            let attack = build_probe_attack(d).unwrap();
            let (g0, g1) = attack.fuchs_states();
            let table = discrimination_table(d).unwrap();
            let p0 = attack.fuchs_povm().probabilities(&g0).unwrap();
            let p1 = attack.fuchs_povm().probabilities(&g1).unwrap();
            for i in 0..4 {
                assert!((p0[i] - table[i][0]).abs() < 1e-10, "d={d} E{}", i + 1);
                assert!((p1[i] - table[i][1]).abs() < 1e-10, "d={d} E{}", i + 1);
            }
        }
    }

    #[test]
    fn rotations_carry_fuchs_states_to_branches() {
        for d in [0.0, 0.1, 0.25, 0.4, 0.5] {
            let attack = build_probe_attack(d).unwrap();
            let (g0, g1) = attack.fuchs_states();
            for (basis, rot) in [
                (Basis::Sigma3, attack.rotation_v()),
                (Basis::Sigma1, attack.rotation_w()),
            ] {
                let plus = attack.probe_state_given(basis, Outcome::Plus).unwrap();
                let minus = attack.probe_state_given(basis, Outcome::Minus).unwrap();
                assert!(rot.conjugate(g1.matrix()).unwrap().approx_eq(plus.matrix(), 1e-12));
                assert!(rot.conjugate(g0.matrix()).unwrap().approx_eq(minus.matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn eve_distribution_examples() {
        let d = 0.2;
        let attack = build_probe_attack(d).unwrap();
        // probe collapses to χ00 for ρ0 with Alice finding +1 in σ3
        let dist = eve_outcome_distribution(
            attack.joint_state(Preparation::Zero),
            Basis::Sigma3,
            Outcome::Plus,
            &attack,
        )
        .unwrap();
        for (got, want) in dist.iter().zip([0.1, 0.9, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{dist:?}");
        }
        // averaged over Bob's preparations: the Γ1 column of the discrimination table
        let branch = attack.probe_state_given(Basis::Sigma3, Outcome::Plus).unwrap();
        let probs = attack.povm_z().probabilities(&branch).unwrap();
        for (got, want) in probs.iter().zip([0.08, 0.72, 0.02, 0.18]) {
            assert!((got - want).abs() < 1e-12, "{probs:?}");
        }
    }

    #[test]
    fn zero_strength_outcomes_ignore_alice() {
        let attack = build_probe_attack(0.0).unwrap();
        for basis in Basis::ALL {
            let a = attack.probe_state_given(basis, Outcome::Plus).unwrap();
            let b = attack.probe_state_given(basis, Outcome::Minus).unwrap();
            let pa = attack.povm_for(basis).probabilities(&a).unwrap();
            let pb = attack.povm_for(basis).probabilities(&b).unwrap();
            for i in 0..4 {
                assert!((pa[i] - pb[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eve_distributions_complete() {
        for d in [0.05, 0.2, 0.45] {
            let attack = build_probe_attack(d).unwrap();
            for prep in Preparation::ALL {
                for basis in Basis::ALL {
                    for m in Outcome::ALL {
                        let dist = eve_outcome_distribution(attack.joint_state(prep), basis, m, &attack)
                            .unwrap();
                        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn impossible_branch_is_degenerate() {
        let attack = build_probe_attack(0.0).unwrap();
        let err = eve_outcome_distribution(
            attack.joint_state(Preparation::Zero),
            Basis::Sigma3,
            Outcome::Minus,
            &attack,
        );
        assert!(matches!(err, Err(Error::DegenerateBranch(_))));
    }

    #[test]
    fn sampling_is_seeded() {
        let attack = build_probe_attack(0.3).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| {
                    eve_measure(
                        attack.joint_state(Preparation::Plus),
                        Basis::Sigma1,
                        Outcome::Plus,
                        &attack,
                        &mut rng,
                    )
                    .unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn sampler_skips_impossible_outcomes() {
        assert_eq!(sample_outcome(&[0.0, 1.0, 0.0, 0.0], 0.0), EveOutcome::ALL[1]);
        assert_eq!(sample_outcome(&[0.5, 0.5, 0.0, 0.0], 0.999_999_999), EveOutcome::ALL[1]);
        assert_eq!(sample_outcome(&[0.3, 0.3, 0.3, 0.1 - 1e-17], 1.0 - 1e-17), EveOutcome::ALL[3]);
    }

    #[test]
    fn classification_examples() {
        let o = |i| EveOutcome::new(i).unwrap();
        assert_eq!(classify_event(Basis::Sigma1, Bit::Zero, o(1)), EventSet::S1);
        assert_eq!(classify_event(Basis::Sigma1, Bit::One, o(1)), EventSet::S2);
        assert_eq!(classify_event(Basis::Sigma3, Bit::One, o(1)), EventSet::S2);
        assert_eq!(classify_event(Basis::Sigma1, Bit::One, o(3)), EventSet::S4);
        assert_eq!(classify_event(Basis::Sigma3, Bit::Zero, o(3)), EventSet::S3);
        assert_eq!(classify_event(Basis::Sigma3, Bit::One, o(3)), EventSet::S4);
    }

    #[test]
    fn classification_is_total_and_balanced() {
        let mut counts = [0; 4];
        for basis in Basis::ALL {
            for a in [Bit::Zero, Bit::One] {
                for o in EveOutcome::ALL {
                    counts[classify_event(basis, a, o).index()] += 1;
                }
            }
        }
        assert_eq!(counts, [4, 4, 4, 4]);
    }

    #[test]
    fn event_probability_endpoints() {
        let p = event_probabilities(0.0).unwrap();
        assert_eq!([p.p1, p.p2, p.p3, p.p4], [0.5, 0.5, 0.0, 0.0]);
        let p = event_probabilities(0.5).unwrap();
        assert!(p.p1.abs() < 1e-15 && p.p3.abs() < 1e-15);
        assert!((p.p2 - 0.5).abs() < 1e-15 && (p.p4 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlap_equation_forms() {
        for d in grid() {
            let c = ProbeVectors::for_strength(d).unwrap();
            assert!((c.strength_from_overlaps() - d).abs() < 1e-12);
            assert!((c.strength_from_overlaps_alt() - 2.0 * d).abs() < 1e-12);
        }
    }

    #[test]
    fn eve_outcome_bounds() {
        assert!(EveOutcome::new(0).is_none());
        assert!(EveOutcome::new(5).is_none());
        assert_eq!(EveOutcome::new(4).unwrap().zero_based(), 3);
        assert!(serde_json::from_str::<EveOutcome>("7").is_err());
    }

    proptest::proptest! {
        #[test]
        fn event_probabilities_normalized(d in 0.0f64..=0.5) {
            let p = event_probabilities(d).unwrap();
            proptest::prop_assert!((p.total() - 1.0).abs() < 1e-14);
            proptest::prop_assert!(p.p1 >= 0.0 && p.p3 >= 0.0);
        }
    }
}
