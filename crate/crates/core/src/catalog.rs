//! Every uncertainty relation as a named check with left side, right side
//! and slack `lhs - rhs`.
//!
//! Relations of type `(n, m)` compare moments of `n` observables across `m`
//! states. Single-state relations accept mixed states; the multi-state
//! relations built from Gram matrices of per-state vectors require pure
//! states, except the `(2, m)` relation and the Robertson-matrix flavour of
//! the lemma checks, which are built from Robertson matrices.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, UrError};
use crate::kernel::{self, char_coeffs, CVector, Tolerances};
use crate::moments::{self, centered_image, moment_set, GramKind, GramUR, MomentSet, Provenance};
use crate::quantum::{Observable, PureState, QuantumState};

const AUDIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma2Flavor {
    /// `C_r(sum S) - C_r(sum A)`.
    Entangled,
    /// `C_r(sum H) - sum C_r(H)`.
    Superadditive,
}

/// Identity of a relation. `order: None` means `r = n` for a single check
/// and a per-instance random order in scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrId {
    Heisenberg,
    Schrodinger,
    Robertson,
    Characteristic {
        #[serde(default)]
        order: Option<usize>,
    },
    #[serde(rename = "type_1_2a")]
    Type12A,
    #[serde(rename = "type_1_2b")]
    Type12B,
    #[serde(rename = "type_2_1")]
    Type21,
    #[serde(rename = "type_2_2a")]
    Type22A,
    #[serde(rename = "type_2_2b")]
    Type22B,
    ExtendedSchrodinger,
    EntangledHeisenberg,
    #[serde(rename = "type_3_1")]
    Type31,
    #[serde(rename = "type_2_m")]
    Type2M,
    /// The `(2, m)` display taken literally, index slips included. Not a
    /// valid relation in general; kept for comparison only.
    #[serde(rename = "type_2_m_printed")]
    Type2MPrinted,
    Lemma2 {
        flavor: Lemma2Flavor,
        choice: GramKind,
        #[serde(default)]
        order: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Exact(usize),
    AtLeast(usize),
}

impl Count {
    pub fn admits(self, k: usize) -> bool {
        match self {
            Count::Exact(n) => k == n,
            Count::AtLeast(n) => k >= n,
        }
    }

    pub fn min(self) -> usize {
        match self {
            Count::Exact(n) | Count::AtLeast(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub observables: Count,
    pub states: Count,
    pub mixed_allowed: bool,
}

impl UrId {
    /// The relations a universal-validity scan covers.
    pub fn catalog() -> Vec<UrId> {
        use GramKind::*;
        use Lemma2Flavor::*;
        let mut v = vec![
            UrId::Heisenberg,
            UrId::Schrodinger,
            UrId::Robertson,
            UrId::Characteristic { order: None },
            UrId::Type12A,
            UrId::Type12B,
            UrId::Type21,
            UrId::Type22A,
            UrId::Type22B,
            UrId::ExtendedSchrodinger,
            UrId::EntangledHeisenberg,
            UrId::Type31,
            UrId::Type2M,
        ];
        for flavor in [Entangled, Superadditive] {
            for choice in [Robertson, Centered, Raw] {
                v.push(UrId::Lemma2 { flavor, choice, order: None });
            }
        }
        v
    }

    pub fn signature(&self) -> Signature {
        use Count::*;
        let (observables, states, mixed_allowed) = match self {
            UrId::Heisenberg | UrId::Schrodinger | UrId::Type21 => (Exact(2), Exact(1), true),
            UrId::Robertson => (AtLeast(2), Exact(1), true),
            UrId::Characteristic { .. } => (AtLeast(1), Exact(1), true),
            UrId::Type12A | UrId::Type12B => (Exact(1), Exact(2), false),
            UrId::Type22A | UrId::Type22B | UrId::ExtendedSchrodinger | UrId::EntangledHeisenberg => {
                (Exact(2), Exact(2), false)
            }
            UrId::Type31 => (Exact(3), Exact(1), false),
            UrId::Type2M | UrId::Type2MPrinted => (Exact(2), AtLeast(2), true),
            UrId::Lemma2 { choice, .. } => (AtLeast(1), AtLeast(1), *choice == GramKind::Robertson),
        };
        Signature {
            observables,
            states,
            mixed_allowed,
        }
    }

    pub fn name(&self) -> String {
        let base = match self {
            UrId::Heisenberg => "heisenberg",
            UrId::Schrodinger => "schrodinger",
            UrId::Robertson => "robertson",
            UrId::Characteristic { .. } => "characteristic",
            UrId::Type12A => "type_1_2a",
            UrId::Type12B => "type_1_2b",
            UrId::Type21 => "type_2_1",
            UrId::Type22A => "type_2_2a",
            UrId::Type22B => "type_2_2b",
            UrId::ExtendedSchrodinger => "extended_schrodinger",
            UrId::EntangledHeisenberg => "entangled_heisenberg",
            UrId::Type31 => "type_3_1",
            UrId::Type2M => "type_2_m",
            UrId::Type2MPrinted => "type_2_m_printed",
            UrId::Lemma2 { .. } => "lemma2",
        };
        match self {
            UrId::Characteristic { order: Some(r) } => format!("{base}(r={r})"),
            UrId::Lemma2 { flavor, choice, order } => {
                let f = match flavor {
                    Lemma2Flavor::Entangled => "entangled",
                    Lemma2Flavor::Superadditive => "superadditive",
                };
                let c = match choice {
                    GramKind::Robertson => "robertson",
                    GramKind::Centered => "centered",
                    GramKind::Raw => "raw",
                };
                match order {
                    Some(r) => format!("{base}_{f}_{c}(r={r})"),
                    None => format!("{base}_{f}_{c}"),
                }
            }
            _ => base.to_string(),
        }
    }

    pub fn with_order(self, r: usize) -> UrId {
        match self {
            UrId::Characteristic { .. } => UrId::Characteristic { order: Some(r) },
            UrId::Lemma2 { flavor, choice, .. } => UrId::Lemma2 {
                flavor,
                choice,
                order: Some(r),
            },
            other => other,
        }
    }

    pub fn has_free_order(&self) -> bool {
        matches!(
            self,
            UrId::Characteristic { order: None } | UrId::Lemma2 { order: None, .. }
        )
    }
}

impl fmt::Display for UrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Provenance of a report: observable names, state descriptions and a hash
/// of the numerical inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputsDigest {
    pub observables: Vec<String>,
    pub states: Vec<String>,
    pub sha256: String,
}

impl InputsDigest {
    pub fn new(observables: &[&Observable], states: &[&QuantumState]) -> Self {
        let mut h = Sha256::new();
        let mut feed = |z: &Complex64| {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        };
        for o in observables {
            o.matrix().iter().for_each(&mut feed);
        }
        for s in states {
            match s {
                QuantumState::Pure(p) => p.amplitudes().iter().for_each(&mut feed),
                QuantumState::Mixed(d) => d.matrix().iter().for_each(&mut feed),
            }
        }
        let mut h2 = h;
        for o in observables {
            h2.update(o.name().as_bytes());
            h2.update([0u8]);
        }
        Self {
            observables: observables.iter().map(|o| o.name().to_string()).collect(),
            states: states.iter().map(|s| format!("{}(d={})", s.kind_label(), s.dim())).collect(),
            sha256: hex::encode(h2.finalize()),
        }
    }

    fn from_provenance(p: &Provenance) -> Self {
        let mut h = Sha256::new();
        for s in p.observables.iter().chain(&p.states) {
            h.update(s.as_bytes());
            h.update([0u8]);
        }
        Self {
            observables: p.observables.clone(),
            states: p.states.clone(),
            sha256: hex::encode(h.finalize()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct URReport {
    pub ur_id: UrId,
    pub name: String,
    /// `(n, m)`: observables and states involved.
    pub type_nm: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub saturated: bool,
    /// Absolute slack tolerance, `tol_slack * max(|lhs|, |rhs|, 1)`.
    pub tolerance: f64,
    pub inputs_digest: InputsDigest,
}

impl URReport {
    pub fn new(ur_id: UrId, type_nm: (usize, usize), lhs: f64, rhs: f64, tol: &Tolerances, inputs_digest: InputsDigest) -> Self {
        Self {
            ur_id,
            name: ur_id.name(),
            type_nm,
            lhs,
            rhs,
            slack: lhs - rhs,
            saturated: tol.is_saturated(lhs, rhs),
            tolerance: tol.slack * Tolerances::scale(lhs, rhs),
            inputs_digest,
        }
    }

    /// `slack >= -tolerance`.
    pub fn holds(&self) -> bool {
        self.slack >= -self.tolerance
    }

    /// Slack divided by `max(|lhs|, |rhs|, 1)`.
    pub fn scaled_slack(&self) -> f64 {
        self.slack / Tolerances::scale(self.lhs, self.rhs)
    }
}

fn audited_real(what: &str, z: Complex64) -> Result<f64> {
    if z.im.abs() > AUDIT_TOL * z.norm().max(1.0) {
        return Err(UrError::Numeric(format!("{what}: imaginary residue {:.3e}", z.im)));
    }
    Ok(z.re)
}

fn pure(state: &QuantumState, slot: usize) -> Result<&PureState> {
    state
        .as_pure()
        .ok_or_else(|| UrError::Unsupported(format!("state slot #{slot} must be a pure state")))
}

/// `<psi|[X, Y]|psi>` computed directly.
fn mean_commutator(x: &Observable, y: &Observable, psi: &PureState) -> Complex64 {
    let xv = x.apply(psi.amplitudes());
    let yv = y.apply(psi.amplitudes());
    xv.dotc(&yv) - yv.dotc(&xv)
}

fn pair_moments(x: &Observable, y: &Observable, state: &QuantumState) -> Result<MomentSet> {
    moment_set(&[x.clone(), y.clone()], state)
}

fn check_same_dims(observables: &[&Observable], states: &[&QuantumState]) -> Result<()> {
    moments::check_dims(observables, states).map(|_| ())
}

type Sides = (f64, f64);

fn heisenberg_sides(x: &Observable, y: &Observable, state: &QuantumState) -> Result<Sides> {
    let ms = pair_moments(x, y, state)?;
    let c = ms.c[(0, 1)];
    Ok((ms.variance(0) * ms.variance(1), c * c))
}

fn schrodinger_sides(x: &Observable, y: &Observable, state: &QuantumState) -> Result<Sides> {
    let ms = pair_moments(x, y, state)?;
    let (c, s) = (ms.c[(0, 1)], ms.covariance(0, 1));
    Ok((ms.variance(0) * ms.variance(1) - s * s, c * c))
}

fn robertson_sides(observables: &[Observable], state: &QuantumState) -> Result<Sides> {
    if observables.len() < 2 {
        return Err(UrError::input("Robertson relation needs at least two observables"));
    }
    let ms = moment_set(observables, state)?;
    Ok((ms.sigma.determinant(), ms.c.determinant()))
}

fn characteristic_sides(observables: &[Observable], state: &QuantumState, r: usize) -> Result<Sides> {
    let n = observables.len();
    if r == 0 || r > n {
        return Err(UrError::input(format!("order r = {r} outside 1..={n}")));
    }
    let ms = moment_set(observables, state)?;
    Ok((char_coeffs(&ms.sigma)?.order(r), char_coeffs(&ms.c)?.order(r)))
}

/// Two-vector Gram bound `|u|^2 |v|^2 >= |<u|v>|^2`.
fn schwarz_sides(u: &CVector, v: &CVector) -> Sides {
    (u.norm_squared() * v.norm_squared(), u.dotc(v).norm_sqr())
}

fn type_1_2_sides(x: &Observable, psi1: &QuantumState, psi2: &QuantumState, variant: Variant) -> Result<Sides> {
    check_same_dims(&[x], &[psi1, psi2])?;
    let (p1, p2) = (pure(psi1, 0)?, pure(psi2, 1)?);
    Ok(match variant {
        Variant::A => schwarz_sides(&centered_image(x, p1), &centered_image(x, p2)),
        Variant::B => schwarz_sides(&x.apply(p1.amplitudes()), &x.apply(p2.amplitudes())),
    })
}

fn type_2_1_sides(x: &Observable, y: &Observable, state: &QuantumState) -> Result<Sides> {
    let ms = pair_moments(x, y, state)?;
    let sym = ms.covariance(0, 1) + ms.means[0] * ms.means[1];
    let c = ms.c[(0, 1)];
    Ok((ms.second_moment(0) * ms.second_moment(1), sym * sym + c * c))
}

fn type_2_2_sides(x: &Observable, y: &Observable, psi1: &QuantumState, psi2: &QuantumState, variant: Variant) -> Result<Sides> {
    check_same_dims(&[x, y], &[psi1, psi2])?;
    let (p1, p2) = (pure(psi1, 0)?, pure(psi2, 1)?);
    Ok(match variant {
        Variant::A => schwarz_sides(&centered_image(x, p1), &centered_image(y, p2)),
        Variant::B => schwarz_sides(&x.apply(p1.amplitudes()), &y.apply(p2.amplitudes())),
    })
}

/// `1/2 [dX1 dY2 + dX2 dY1]` with variances in the two states.
fn cross_variance_term(m1: &MomentSet, m2: &MomentSet) -> f64 {
    0.5 * (m1.variance(0) * m2.variance(1) + m2.variance(0) * m1.variance(1))
}

fn extended_schrodinger_sides(x: &Observable, y: &Observable, psi1: &QuantumState, psi2: &QuantumState) -> Result<Sides> {
    check_same_dims(&[x, y], &[psi1, psi2])?;
    let (p1, p2) = (pure(psi1, 0)?, pure(psi2, 1)?);
    let (m1, m2) = (pair_moments(x, y, psi1)?, pair_moments(x, y, psi2)?);
    let lhs = cross_variance_term(&m1, &m2) - m1.covariance(0, 1) * m2.covariance(0, 1);
    let product = mean_commutator(x, y, p1) * mean_commutator(x, y, p2).conj();
    Ok((lhs, 0.25 * audited_real("commutator product", product)?))
}

fn entangled_heisenberg_sides(x: &Observable, y: &Observable, psi1: &QuantumState, psi2: &QuantumState) -> Result<Sides> {
    check_same_dims(&[x, y], &[psi1, psi2])?;
    let (p1, p2) = (pure(psi1, 0)?, pure(psi2, 1)?);
    let (m1, m2) = (pair_moments(x, y, psi1)?, pair_moments(x, y, psi2)?);
    let rhs = 0.25 * (mean_commutator(x, y, p1) * mean_commutator(x, y, p2)).norm();
    Ok((cross_variance_term(&m1, &m2), rhs))
}

fn type_3_1_sides(x: &Observable, y: &Observable, z: &Observable, state: &QuantumState) -> Result<Sides> {
    check_same_dims(&[x, y, z], &[state])?;
    let psi = pure(state, 0)?;
    let ms = moment_set(&[x.clone(), y.clone(), z.clone()], state)?;
    let lhs = ms.variance(0) * (ms.variance(1) + ms.variance(2));
    let product = mean_commutator(x, z, psi) * mean_commutator(y, x, psi);
    let rhs = 2.0 * ms.covariance(0, 1) * ms.covariance(0, 2) + 0.5 * audited_real("commutator product", product)?;
    Ok((lhs, rhs))
}

fn type_2_m_sides(x: &Observable, y: &Observable, states: &[QuantumState], printed: bool) -> Result<Sides> {
    if states.len() < 2 {
        return Err(UrError::input(format!("(2, m) relation needs m >= 2 states, got {}", states.len())));
    }
    let srefs: Vec<&QuantumState> = states.iter().collect();
    check_same_dims(&[x, y], &srefs)?;
    let ms: Vec<MomentSet> = states.iter().map(|s| pair_moments(x, y, s)).collect::<Result<_>>()?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for mu in 0..ms.len() {
        for nu in (mu + 1)..ms.len() {
            let (a, b) = (&ms[mu], &ms[nu]);
            if printed {
                lhs += a.variance(0) * b.variance(1) + b.variance(0) * a.variance(0);
                lhs -= 2.0 * a.covariance(0, 1) * b.variance(1);
            } else {
                lhs += a.variance(0) * b.variance(1) + b.variance(0) * a.variance(1);
                lhs -= 2.0 * a.covariance(0, 1) * b.covariance(0, 1);
            }
            rhs += 2.0 * a.c[(0, 1)] * b.c[(0, 1)];
        }
    }
    Ok((lhs, rhs))
}

fn lemma2_sides(matrices: &[GramUR], r: usize, flavor: Lemma2Flavor, tol: &Tolerances) -> Result<Sides> {
    let hs: Vec<_> = matrices.iter().map(|g| g.matrix.clone()).collect();
    match flavor {
        Lemma2Flavor::Entangled => kernel::entangled_char_sides(&hs, r, tol),
        Lemma2Flavor::Superadditive => kernel::superadditive_char_sides(&hs, r, tol),
    }
}

/// `(lhs, rhs)` of `ur` after the arity and purity checks of [`evaluate`].
/// Cheaper than [`evaluate`] since no digest is computed.
pub fn evaluate_sides(ur: &UrId, observables: &[Observable], states: &[QuantumState], tol: &Tolerances) -> Result<Sides> {
    let sig = ur.signature();
    if !sig.observables.admits(observables.len()) {
        return Err(UrError::input(format!(
            "{ur} takes {:?} observables, got {}",
            sig.observables,
            observables.len()
        )));
    }
    if !sig.states.admits(states.len()) {
        return Err(UrError::input(format!("{ur} takes {:?} states, got {}", sig.states, states.len())));
    }
    if !sig.mixed_allowed {
        if let Some(k) = states.iter().position(|s| !s.is_pure()) {
            return Err(UrError::Unsupported(format!("{ur} needs pure states; slot #{k} is mixed")));
        }
    }
    let o = observables;
    let s = states;
    match *ur {
        UrId::Heisenberg => heisenberg_sides(&o[0], &o[1], &s[0]),
        UrId::Schrodinger => schrodinger_sides(&o[0], &o[1], &s[0]),
        UrId::Robertson => robertson_sides(o, &s[0]),
        UrId::Characteristic { order } => characteristic_sides(o, &s[0], order.unwrap_or(o.len())),
        UrId::Type12A => type_1_2_sides(&o[0], &s[0], &s[1], Variant::A),
        UrId::Type12B => type_1_2_sides(&o[0], &s[0], &s[1], Variant::B),
        UrId::Type21 => type_2_1_sides(&o[0], &o[1], &s[0]),
        UrId::Type22A => type_2_2_sides(&o[0], &o[1], &s[0], &s[1], Variant::A),
        UrId::Type22B => type_2_2_sides(&o[0], &o[1], &s[0], &s[1], Variant::B),
        UrId::ExtendedSchrodinger => extended_schrodinger_sides(&o[0], &o[1], &s[0], &s[1]),
        UrId::EntangledHeisenberg => entangled_heisenberg_sides(&o[0], &o[1], &s[0], &s[1]),
        UrId::Type31 => type_3_1_sides(&o[0], &o[1], &o[2], &s[0]),
        UrId::Type2M => type_2_m_sides(&o[0], &o[1], s, false),
        UrId::Type2MPrinted => type_2_m_sides(&o[0], &o[1], s, true),
        UrId::Lemma2 { flavor, choice, order } => {
            let mats = lemma2_matrices(choice, o, s)?;
            lemma2_sides(&mats, order.unwrap_or(o.len()), flavor, tol)
        }
    }
}

/// Evaluates `ur` on the given inputs, checking arity and state purity.
pub fn evaluate(ur: &UrId, observables: &[Observable], states: &[QuantumState], tol: &Tolerances) -> Result<URReport> {
    let (lhs, rhs) = evaluate_sides(ur, observables, states, tol)?;
    let id = match *ur {
        UrId::Characteristic { order: None } | UrId::Lemma2 { order: None, .. } => ur.with_order(observables.len()),
        other => other,
    };
    let orefs: Vec<&Observable> = observables.iter().collect();
    let srefs: Vec<&QuantumState> = states.iter().collect();
    Ok(URReport::new(
        id,
        (observables.len(), states.len()),
        lhs,
        rhs,
        tol,
        InputsDigest::new(&orefs, &srefs),
    ))
}

fn owned(observables: &[&Observable]) -> Vec<Observable> {
    observables.iter().map(|&o| o.clone()).collect()
}

fn owned_states(states: &[&QuantumState]) -> Vec<QuantumState> {
    states.iter().map(|&s| s.clone()).collect()
}

pub fn heisenberg(x: &Observable, y: &Observable, state: &QuantumState, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Heisenberg, &owned(&[x, y]), &owned_states(&[state]), tol)
}

pub fn schrodinger(x: &Observable, y: &Observable, state: &QuantumState, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Schrodinger, &owned(&[x, y]), &owned_states(&[state]), tol)
}

pub fn robertson(observables: &[Observable], state: &QuantumState, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Robertson, observables, &owned_states(&[state]), tol)
}

pub fn characteristic(observables: &[Observable], state: &QuantumState, r: usize, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Characteristic { order: Some(r) }, observables, &owned_states(&[state]), tol)
}

pub fn type_1_2(x: &Observable, psi1: &QuantumState, psi2: &QuantumState, variant: Variant, tol: &Tolerances) -> Result<URReport> {
    let id = match variant {
        Variant::A => UrId::Type12A,
        Variant::B => UrId::Type12B,
    };
    evaluate(&id, &owned(&[x]), &owned_states(&[psi1, psi2]), tol)
}

pub fn type_2_1(x: &Observable, y: &Observable, state: &QuantumState, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Type21, &owned(&[x, y]), &owned_states(&[state]), tol)
}

pub fn type_2_2(
    x: &Observable,
    y: &Observable,
    psi1: &QuantumState,
    psi2: &QuantumState,
    variant: Variant,
    tol: &Tolerances,
) -> Result<URReport> {
    let id = match variant {
        Variant::A => UrId::Type22A,
        Variant::B => UrId::Type22B,
    };
    evaluate(&id, &owned(&[x, y]), &owned_states(&[psi1, psi2]), tol)
}

pub fn extended_schrodinger(
    x: &Observable,
    y: &Observable,
    psi1: &QuantumState,
    psi2: &QuantumState,
    tol: &Tolerances,
) -> Result<URReport> {
    evaluate(&UrId::ExtendedSchrodinger, &owned(&[x, y]), &owned_states(&[psi1, psi2]), tol)
}

pub fn entangled_heisenberg(
    x: &Observable,
    y: &Observable,
    psi1: &QuantumState,
    psi2: &QuantumState,
    tol: &Tolerances,
) -> Result<URReport> {
    evaluate(&UrId::EntangledHeisenberg, &owned(&[x, y]), &owned_states(&[psi1, psi2]), tol)
}

pub fn type_3_1(x: &Observable, y: &Observable, z: &Observable, state: &QuantumState, tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Type31, &owned(&[x, y, z]), &owned_states(&[state]), tol)
}

/// The `(2, m)` relation in the form that reduces to twice the extended
/// Schrodinger relation at `m = 2`:
/// `sum_{mu<nu} [dX_mu dY_nu + dX_nu dY_mu] - 2 sum cov_mu cov_nu >= 2 sum C_mu C_nu`.
pub fn type_2_m(x: &Observable, y: &Observable, states: &[QuantumState], tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Type2M, &owned(&[x, y]), states, tol)
}

/// The `(2, m)` display evaluated literally: `dX_nu dX_mu` in place of the
/// second cross term and `cov_mu * dY_nu` in the covariance sum.
pub fn type_2_m_printed(x: &Observable, y: &Observable, states: &[QuantumState], tol: &Tolerances) -> Result<URReport> {
    evaluate(&UrId::Type2MPrinted, &owned(&[x, y]), states, tol)
}

/// Lemma-2 gap over physical matrices; reduces to [`characteristic`] for a
/// single Robertson matrix with the entangled flavour.
pub fn lemma2_ur(matrices: &[GramUR], r: usize, flavor: Lemma2Flavor, tol: &Tolerances) -> Result<URReport> {
    let first = matrices.first().ok_or_else(|| UrError::input("lemma check needs at least one matrix"))?;
    let (lhs, rhs) = lemma2_sides(matrices, r, flavor, tol)?;
    let mut prov = Provenance::default();
    for (mu, g) in matrices.iter().enumerate() {
        prov.observables.extend(g.provenance.observables.iter().map(|o| format!("H{mu}:{o}")));
        prov.states.extend(g.provenance.states.iter().map(|s| format!("H{mu}:{s}")));
    }
    let id = UrId::Lemma2 {
        flavor,
        choice: first.kind,
        order: Some(r),
    };
    Ok(URReport::new(id, (first.matrix.dim(), matrices.len()), lhs, rhs, tol, InputsDigest::from_provenance(&prov)))
}

/// Physical matrices for a lemma check: one per state. Gram choices take
/// slot `k` of matrix `mu` from state `(mu + k) mod m`.
pub fn lemma2_matrices(choice: GramKind, observables: &[Observable], states: &[QuantumState]) -> Result<Vec<GramUR>> {
    let m = states.len();
    (0..m)
        .map(|mu| match choice {
            GramKind::Robertson => moments::robertson_matrix(observables, &states[mu]),
            GramKind::Centered | GramKind::Raw => {
                let slots: Vec<QuantumState> = (0..observables.len()).map(|k| states[(mu + k) % m].clone()).collect();
                if choice == GramKind::Centered {
                    moments::gram_centered(observables, &slots)
                } else {
                    moments::gram_raw(observables, &slots)
                }
            }
        })
        .collect()
}
