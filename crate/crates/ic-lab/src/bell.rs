//! Bell functionals over correlators, exhaustive local-strategy bounds,
//! derivative-free measurement optimization, monogamy sweeps, and the
//! correlation-tensor norm.
//!
//! All functionals are full-correlator expressions: a coefficient per joint
//! input, applied to `E(i) = sum_o (-1)^(sum o) P(o|i)` with outputs mapped
//! 0 -> +1, 1 -> -1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{IcError, Result};
use crate::nsbox::BoxTable;
use crate::quantum::{
    bloch_observable, kron_all, sigma_x, sigma_y, ComplexMatrix, DensityMatrix,
    Observable,
};

const LOCAL_ENUM_GUARD: u64 = 1 << 20;

/// A linear functional over full correlators with known reference values.
#[derive(Debug, Clone, Serialize)]
pub struct BellFunctional {
    pub name: String,
    /// Input alphabet size per party; outputs are binary.
    pub input_sizes: Vec<usize>,
    /// Dense coefficients over the joint input index (row-major, last party
    /// fastest).
    pub coeffs: Vec<f64>,
    pub algebraic_max: f64,
    pub quantum_max: Option<f64>,
    pub local_max: Option<f64>,
}

impl BellFunctional {
    fn input_index(&self, inputs: &[usize]) -> usize {
        let mut idx = 0;
        for (d, s) in inputs.iter().zip(&self.input_sizes) {
            idx = idx * s + d;
        }
        idx
    }

    pub fn coeff(&self, inputs: &[usize]) -> f64 {
        self.coeffs[self.input_index(inputs)]
    }

    pub fn num_parties(&self) -> usize {
        self.input_sizes.len()
    }
}

fn dense_coeffs(sizes: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Vec<f64> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; sizes.len()];
    for idx in 0..total {
        let mut rest = idx;
        for i in (0..sizes.len()).rev() {
            digits[i] = rest % sizes[i];
            rest /= sizes[i];
        }
        out.push(f(&digits));
    }
    out
}

/// Construct a named functional; `k` applies to the `ic` family only.
pub fn functional(name: &str, k: Option<usize>) -> Result<BellFunctional> {
    match name {
        "chsh" => Ok(BellFunctional {
            name: "chsh".into(),
            input_sizes: vec![2, 2],
            coeffs: dense_coeffs(&[2, 2], |i| if i[0] * i[1] == 1 { -1.0 } else { 1.0 }),
            algebraic_max: 4.0,
            quantum_max: Some(2.0 * 2f64.sqrt()),
            local_max: Some(2.0),
        }),
        "sb" => Ok(BellFunctional {
            name: "sb".into(),
            input_sizes: vec![2, 2, 2],
            coeffs: dense_coeffs(&[2, 2, 2], |i| {
                let f = (i[0] & i[1] & i[2]) ^ ((1 - i[0]) & (1 - i[1]) & (1 - i[2]));
                if f == 1 {
                    -1.0
                } else {
                    1.0
                }
            }),
            algebraic_max: 8.0,
            quantum_max: Some(4.0 * 2f64.sqrt()),
            local_max: Some(4.0),
        }),
        "mermin" => Ok(BellFunctional {
            name: "mermin".into(),
            input_sizes: vec![2, 2, 2],
            coeffs: dense_coeffs(&[2, 2, 2], |i| match (i[0], i[1], i[2]) {
                (1, 0, 0) | (0, 1, 0) | (0, 0, 1) => 1.0,
                (1, 1, 1) => -1.0,
                _ => 0.0,
            }),
            algebraic_max: 4.0,
            quantum_max: Some(4.0),
            local_max: Some(2.0),
        }),
        "ic" => {
            let k = k.ok_or_else(|| IcError::InvalidArgument("ic needs k".into()))?;
            if k < 2 {
                return Err(IcError::InvalidArgument("ic needs k >= 2".into()));
            }
            let alice = 1usize << (k - 1);
            let (lower, upper) = ic_bounds(k)?;
            Ok(BellFunctional {
                name: format!("ic{k}"),
                input_sizes: vec![alice, k],
                coeffs: dense_coeffs(&[alice, k], |i| {
                    // alpha . b = alpha_l, with alpha_l bit (l-1) of the
                    // Alice input and alpha_0 identically zero.
                    let (alpha, l) = (i[0], i[1]);
                    let dot = if l == 0 { 0 } else { alpha >> (l - 1) & 1 };
                    if dot == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                }),
                algebraic_max: (alice * k) as f64,
                quantum_max: Some(upper),
                local_max: Some(lower),
            })
        }
        other => Err(IcError::UnknownName(other.to_string())),
    }
}

/// Full correlator of a box for one joint input.
fn correlator(table: &BoxTable, inputs: &[usize]) -> f64 {
    let mut e = 0.0;
    for (outs, p) in table.outcomes(inputs) {
        let parity = outs.iter().sum::<usize>() % 2;
        e += if parity == 0 { p } else { -p };
    }
    e
}

/// Evaluate a functional on a box table.
pub fn evaluate(functional: &BellFunctional, table: &BoxTable) -> Result<f64> {
    if table.num_parties() != functional.num_parties() {
        return Err(IcError::DimensionMismatch("party count".into()));
    }
    if table
        .parties()
        .iter()
        .zip(&functional.input_sizes)
        .any(|(&(i, o), &s)| i != s || o != 2)
    {
        return Err(IcError::DimensionMismatch("signature mismatch".into()));
    }
    let mut value = 0.0;
    let mut inputs = vec![0usize; functional.num_parties()];
    for (idx, &coeff) in functional.coeffs.iter().enumerate() {
        if coeff == 0.0 {
            continue;
        }
        let mut rest = idx;
        for i in (0..inputs.len()).rev() {
            inputs[i] = rest % functional.input_sizes[i];
            rest /= functional.input_sizes[i];
        }
        value += coeff * correlator(table, &inputs);
    }
    Ok(value)
}

/// Deterministic output assignment: one bit per input per party.
#[derive(Debug, Clone, Serialize)]
pub struct LocalWitness {
    pub value: f64,
    /// `outputs[party][input]`.
    pub outputs: Vec<Vec<u8>>,
}

/// Exact maximum of `|value|` over all deterministic strategies.
///
/// All parties but the last are enumerated; the last party's optimal signs
/// are the absolute values of its per-input partial sums. Ties resolve to
/// the lowest strategy index.
pub fn local_max(functional: &BellFunctional) -> Result<LocalWitness> {
    let p = functional.num_parties();
    let lead_sizes = &functional.input_sizes[..p - 1];
    let last_size = functional.input_sizes[p - 1];
    let mut strategies: u64 = 1;
    for &s in lead_sizes {
        strategies = strategies
            .checked_shl(s as u32)
            .ok_or_else(|| IcError::SizeGuard("strategy space overflow".into()))?;
        if strategies > LOCAL_ENUM_GUARD {
            return Err(IcError::SizeGuard(format!(
                "strategy space exceeds {LOCAL_ENUM_GUARD}"
            )));
        }
    }
    let lead_total: usize = lead_sizes.iter().product();
    let mut best = f64::NEG_INFINITY;
    let mut best_assign: Vec<Vec<u8>> = Vec::new();
    let mut inputs = vec![0usize; p];
    for strat in 0..strategies {
        // Bits of `strat` are the lead parties' outputs, party-major.
        let mut offset = 0u32;
        let assign: Vec<Vec<u8>> = lead_sizes
            .iter()
            .map(|&s| {
                let bits: Vec<u8> = (0..s).map(|i| (strat >> (offset + i as u32) & 1) as u8).collect();
                offset += s as u32;
                bits
            })
            .collect();
        let mut value = 0.0;
        let mut last_signs = vec![0.0f64; last_size];
        for y in 0..last_size {
            let mut partial = 0.0;
            for lead in 0..lead_total {
                let mut rest = lead;
                for i in (0..p - 1).rev() {
                    inputs[i] = rest % lead_sizes[i];
                    rest /= lead_sizes[i];
                }
                inputs[p - 1] = y;
                let coeff = functional.coeff(&inputs);
                if coeff == 0.0 {
                    continue;
                }
                let mut sign = 1.0;
                for (party, ass) in assign.iter().enumerate() {
                    if ass[inputs[party]] == 1 {
                        sign = -sign;
                    }
                }
                partial += coeff * sign;
            }
            last_signs[y] = partial;
            value += partial.abs();
        }
        if value > best {
            best = value;
            let mut full = assign;
            full.push(
                last_signs
                    .iter()
                    .map(|&s| if s < 0.0 { 1u8 } else { 0u8 })
                    .collect(),
            );
            best_assign = full;
        }
    }
    Ok(LocalWitness { value: best, outputs: best_assign })
}

/// Closed-form window for the generalized functional:
/// `sum_m C(k-1, m) |k - 2m| <= |IC| <= 2^(k-1) sqrt(k)`.
pub fn ic_bounds(k: usize) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(IcError::InvalidArgument("k must be >= 2".into()));
    }
    let mut lower = 0.0f64;
    for m in 0..k {
        lower += binomial(k - 1, m) * (k as f64 - 2.0 * m as f64).abs();
    }
    let upper = (1u64 << (k - 1)) as f64 * (k as f64).sqrt();
    Ok((lower, upper))
}

fn binomial(n: usize, m: usize) -> f64 {
    if m > n {
        return 0.0;
    }
    let mut out = 1.0f64;
    for i in 0..m {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Measurement angles: `per_site[site][observable] = (theta, phi)`.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub per_site: Vec<Vec<(f64, f64)>>,
}

impl Settings {
    pub fn observables(&self) -> Vec<Vec<Observable>> {
        self.per_site
            .iter()
            .map(|site| site.iter().map(|&(t, p)| bloch_observable(t, p)).collect())
            .collect()
    }

    fn canonical(obs_per_site: &[usize]) -> Self {
        // Fixed default: alternate z, x, y axes per observable index.
        let axes = [(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0)];
        Settings {
            per_site: obs_per_site
                .iter()
                .map(|&n| (0..n).map(|m| axes[m % 3]).collect())
                .collect(),
        }
    }

    fn random(obs_per_site: &[usize], rng: &mut ChaCha8Rng) -> Self {
        Settings {
            per_site: obs_per_site
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            (
                                (1.0 - 2.0 * rng.gen::<f64>()).acos(),
                                rng.gen::<f64>() * 2.0 * PI,
                            )
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// One functional placed on a subset of single-qubit sites.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionalInstance {
    pub functional: BellFunctional,
    /// Global site owning each party slot.
    pub site_map: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ObjectiveMode {
    Sum,
    SumOfSquares,
}

/// Joint objective over shared measurement settings.
struct Objective<'a> {
    rho: &'a DensityMatrix,
    instances: &'a [FunctionalInstance],
    mode: ObjectiveMode,
    num_sites: usize,
}

impl<'a> Objective<'a> {
    fn correlator(&self, obs: &[Vec<Observable>], instance: &FunctionalInstance, inputs: &[usize]) -> f64 {
        let mut mats: Vec<ComplexMatrix> = Vec::with_capacity(self.num_sites);
        for site in 0..self.num_sites {
            let mat = instance
                .site_map
                .iter()
                .position(|&s| s == site)
                .map(|party| obs[site][inputs[party]].matrix().clone())
                .unwrap_or_else(|| ComplexMatrix::identity(2, 2));
            mats.push(mat);
        }
        let op = kron_all(&mats);
        (self.rho.matrix() * op).trace().re
    }

    fn instance_value(&self, obs: &[Vec<Observable>], instance: &FunctionalInstance) -> f64 {
        let sizes = &instance.functional.input_sizes;
        let mut inputs = vec![0usize; sizes.len()];
        let mut value = 0.0;
        for (idx, &coeff) in instance.functional.coeffs.iter().enumerate() {
            if coeff == 0.0 {
                continue;
            }
            let mut rest = idx;
            for i in (0..sizes.len()).rev() {
                inputs[i] = rest % sizes[i];
                rest /= sizes[i];
            }
            value += coeff * self.correlator(obs, instance, &inputs);
        }
        value
    }

    fn values(&self, obs: &[Vec<Observable>]) -> Vec<f64> {
        self.instances
            .iter()
            .map(|inst| self.instance_value(obs, inst))
            .collect()
    }

    fn total(&self, values: &[f64]) -> f64 {
        match self.mode {
            ObjectiveMode::Sum => values.iter().sum(),
            ObjectiveMode::SumOfSquares => values.iter().map(|v| v * v).sum(),
        }
    }

    /// Decompose each instance value as `const + n . w` in the Bloch vector
    /// of observable `(site, obs_idx)`.
    fn linearize(
        &self,
        obs: &[Vec<Observable>],
        site: usize,
        obs_idx: usize,
    ) -> Vec<(f64, [f64; 3])> {
        let paulis = [sigma_x(), sigma_y(), crate::quantum::sigma_z()];
        self.instances
            .iter()
            .map(|inst| {
                let party = inst.site_map.iter().position(|&s| s == site);
                let sizes = &inst.functional.input_sizes;
                let mut constant = 0.0;
                let mut w = [0.0f64; 3];
                let mut inputs = vec![0usize; sizes.len()];
                for (idx, &coeff) in inst.functional.coeffs.iter().enumerate() {
                    if coeff == 0.0 {
                        continue;
                    }
                    let mut rest = idx;
                    for i in (0..sizes.len()).rev() {
                        inputs[i] = rest % sizes[i];
                        rest /= sizes[i];
                    }
                    match party {
                        Some(p) if inputs[p] == obs_idx => {
                            for (kx, pauli) in paulis.iter().enumerate() {
                                let mut mats: Vec<ComplexMatrix> =
                                    Vec::with_capacity(self.num_sites);
                                for s in 0..self.num_sites {
                                    let mat = if s == site {
                                        pauli.clone()
                                    } else {
                                        inst.site_map
                                            .iter()
                                            .position(|&ss| ss == s)
                                            .map(|pp| obs[s][inputs[pp]].matrix().clone())
                                            .unwrap_or_else(|| ComplexMatrix::identity(2, 2))
                                    };
                                    mats.push(mat);
                                }
                                let op = kron_all(&mats);
                                w[kx] += coeff * (self.rho.matrix() * op).trace().re;
                            }
                        }
                        _ => {
                            constant += coeff * self.correlator(obs, inst, &inputs);
                        }
                    }
                }
                (constant, w)
            })
            .collect()
    }
}

fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn linearized_total(mode: ObjectiveMode, parts: &[(f64, [f64; 3])], theta: f64, phi: f64) -> f64 {
    let n = unit_vector(theta, phi);
    let mut total = 0.0;
    for (c, w) in parts {
        let v = c + n[0] * w[0] + n[1] * w[1] + n[2] * w[2];
        total += match mode {
            ObjectiveMode::Sum => v,
            ObjectiveMode::SumOfSquares => v * v,
        };
    }
    total
}

/// Golden-section maximization on an interval.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

const GRID_POINTS: usize = 64;
const PASS_TOL: f64 = 1e-10;

fn ascend(
    objective: &Objective<'_>,
    settings: &mut Settings,
    max_passes: usize,
) -> f64 {
    let mut obs = settings.observables();
    let mut current = objective.total(&objective.values(&obs));
    for _ in 0..max_passes {
        let before = current;
        for site in 0..settings.per_site.len() {
            for m in 0..settings.per_site[site].len() {
                let parts = objective.linearize(&obs, site, m);
                let mode = objective.mode;
                // Coarse grid over the sphere, then golden refinement per angle.
                let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
                for it in 0..GRID_POINTS {
                    let theta = PI * (it as f64 + 0.5) / GRID_POINTS as f64;
                    for ip in 0..GRID_POINTS {
                        let phi = 2.0 * PI * ip as f64 / GRID_POINTS as f64;
                        let v = linearized_total(mode, &parts, theta, phi);
                        if v > best.0 {
                            best = (v, theta, phi);
                        }
                    }
                }
                let (_, mut theta, mut phi) = best;
                let dt = PI / GRID_POINTS as f64;
                let dp = 2.0 * PI / GRID_POINTS as f64;
                for _ in 0..3 {
                    theta = golden_max(theta - dt, theta + dt, 1e-12, |t| {
                        linearized_total(mode, &parts, t, phi)
                    });
                    phi = golden_max(phi - dp, phi + dp, 1e-12, |p| {
                        linearized_total(mode, &parts, theta, p)
                    });
                }
                let v = linearized_total(mode, &parts, theta, phi);
                if v > current {
                    settings.per_site[site][m] = (theta, phi);
                    obs[site][m] = bloch_observable(theta, phi);
                    current = v;
                }
            }
        }
        if current - before < PASS_TOL {
            break;
        }
    }
    current
}

/// Optimized single-functional value: coordinate ascent over Bloch angles
/// with seeded random restarts; monotone per pass, best restart kept.
pub fn optimize_settings(
    rho: &DensityMatrix,
    functional: &BellFunctional,
    seed: u64,
    restarts: usize,
    iterations: usize,
) -> Result<(Settings, f64)> {
    let p = functional.num_parties();
    if rho.num_qubits() != p {
        return Err(IcError::DimensionMismatch(format!(
            "functional has {p} parties, state has {} qubits",
            rho.num_qubits()
        )));
    }
    let instance = FunctionalInstance {
        functional: functional.clone(),
        site_map: (0..p).collect(),
    };
    let instances = vec![instance];
    let objective = Objective {
        rho,
        instances: &instances,
        mode: ObjectiveMode::Sum,
        num_sites: p,
    };
    let obs_per_site = functional.input_sizes.clone();
    optimize_objective(&objective, &obs_per_site, seed, restarts, iterations)
}

fn optimize_objective(
    objective: &Objective<'_>,
    obs_per_site: &[usize],
    seed: u64,
    restarts: usize,
    iterations: usize,
) -> Result<(Settings, f64)> {
    let mut best: Option<(Settings, f64)> = None;
    for restart in 0..restarts.max(1) {
        let mut settings = if restart == 0 {
            Settings::canonical(obs_per_site)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
            Settings::random(obs_per_site, &mut rng)
        };
        let value = ascend(objective, &mut settings, iterations.max(1));
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((settings, value));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Identifier of a quadratic monogamy relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationId {
    Chsh8,
    Sb32,
    Sb64,
    Mermin16,
    IcK,
}

/// A list of functional placements plus the claimed quadratic bound.
#[derive(Debug, Clone, Serialize)]
pub struct MonogamyRelation {
    pub id: RelationId,
    pub instances: Vec<FunctionalInstance>,
    pub bound: f64,
    pub num_sites: usize,
    /// Observables needed per site.
    pub obs_per_site: Vec<usize>,
}

/// Build a relation. `receivers` applies to `chsh8`, `sb32` and `ick`;
/// `k` applies to `ick` only.
pub fn relation(id: RelationId, receivers: Option<usize>, k: Option<usize>) -> Result<MonogamyRelation> {
    match id {
        RelationId::Chsh8 => {
            let n = receivers.unwrap_or(2);
            if n < 1 {
                return Err(IcError::InvalidArgument("need receivers >= 1".into()));
            }
            let chsh = functional("chsh", None)?;
            let instances = (1..=n)
                .map(|j| FunctionalInstance {
                    functional: chsh.clone(),
                    site_map: vec![0, j],
                })
                .collect();
            Ok(MonogamyRelation {
                id,
                instances,
                bound: 8.0,
                num_sites: 1 + n,
                obs_per_site: vec![2; 1 + n],
            })
        }
        RelationId::Sb32 => {
            let n = receivers.unwrap_or(2);
            if n < 1 {
                return Err(IcError::InvalidArgument("need receivers >= 1".into()));
            }
            let sb = functional("sb", None)?;
            let instances = (2..2 + n)
                .map(|j| FunctionalInstance {
                    functional: sb.clone(),
                    site_map: vec![0, 1, j],
                })
                .collect();
            Ok(MonogamyRelation {
                id,
                instances,
                bound: 32.0,
                num_sites: 2 + n,
                obs_per_site: vec![2; 2 + n],
            })
        }
        RelationId::Sb64 | RelationId::Mermin16 => {
            let f = functional(if id == RelationId::Sb64 { "sb" } else { "mermin" }, None)?;
            let maps = [vec![0, 1, 2], vec![0, 1, 3], vec![2, 3, 0], vec![2, 3, 1]];
            let instances = maps
                .into_iter()
                .map(|site_map| FunctionalInstance { functional: f.clone(), site_map })
                .collect();
            Ok(MonogamyRelation {
                id,
                instances,
                bound: if id == RelationId::Sb64 { 64.0 } else { 16.0 },
                num_sites: 4,
                obs_per_site: vec![2; 4],
            })
        }
        RelationId::IcK => {
            let k = k.ok_or_else(|| IcError::InvalidArgument("ick needs k".into()))?;
            let n = receivers.unwrap_or(1);
            let f = functional("ic", Some(k))?;
            let instances = (1..=n)
                .map(|j| FunctionalInstance { functional: f.clone(), site_map: vec![0, j] })
                .collect();
            let mut obs = vec![k; 1 + n];
            obs[0] = 1 << (k - 1);
            Ok(MonogamyRelation {
                id,
                instances,
                bound: 4f64.powi(k as i32 - 1) * k as f64,
                num_sites: 1 + n,
                obs_per_site: obs,
            })
        }
    }
}

/// Where monogamy samples come from.
pub enum SweepSource {
    State(DensityMatrix),
    Random { trials: u64, seed: u64 },
    Boxes(BoxTable),
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSample {
    pub sample_id: u64,
    pub seed: u64,
    pub lhs: f64,
    pub bound: f64,
    pub violated: bool,
    pub per_functional: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub relation: RelationId,
    pub bound: f64,
    pub max_lhs: f64,
    pub violations: u64,
    pub samples: Vec<SweepSample>,
}

const SWEEP_TOL: f64 = 1e-6;

/// Evaluate the quadratic sum for every sample, sharing settings across
/// functionals inside the relation, and report the maximum and any samples
/// exceeding `bound + 1e-6`.
pub fn monogamy_sweep(
    relation: &MonogamyRelation,
    source: &SweepSource,
    optimize: bool,
    seed: u64,
    restarts: usize,
    iterations: usize,
) -> Result<SweepReport> {
    let mut samples = Vec::new();
    match source {
        SweepSource::State(rho) => {
            samples.push(sweep_state(relation, rho, optimize, seed, 0, restarts, iterations)?);
        }
        SweepSource::Random { trials, seed: state_seed } => {
            for t in 0..*trials {
                let sample_seed = state_seed.wrapping_add(t);
                let rho = crate::quantum::random_pure_state(relation.num_sites, sample_seed)?;
                samples.push(sweep_state(
                    relation, &rho, optimize, seed, t, restarts, iterations,
                )?);
                samples.last_mut().expect("just pushed").seed = sample_seed;
            }
        }
        SweepSource::Boxes(table) => {
            let mut per = Vec::new();
            for inst in &relation.instances {
                let comp_inputs = vec![
                    0usize;
                    table.num_parties().saturating_sub(inst.site_map.len())
                ];
                let marg = table.marginal(&inst.site_map, &comp_inputs)?;
                per.push(evaluate(&inst.functional, &marg)?);
            }
            let lhs: f64 = per.iter().map(|v| v * v).sum();
            samples.push(SweepSample {
                sample_id: 0,
                seed: 0,
                lhs,
                bound: relation.bound,
                violated: lhs > relation.bound + SWEEP_TOL,
                per_functional: per,
            });
        }
    }
    let max_lhs = samples.iter().map(|s| s.lhs).fold(f64::NEG_INFINITY, f64::max);
    let violations = samples.iter().filter(|s| s.violated).count() as u64;
    Ok(SweepReport {
        relation: relation.id,
        bound: relation.bound,
        max_lhs,
        violations,
        samples,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep_state(
    relation: &MonogamyRelation,
    rho: &DensityMatrix,
    optimize: bool,
    seed: u64,
    sample_id: u64,
    restarts: usize,
    iterations: usize,
) -> Result<SweepSample> {
    if rho.num_qubits() != relation.num_sites {
        return Err(IcError::DimensionMismatch(format!(
            "relation needs {} qubits, state has {}",
            relation.num_sites,
            rho.num_qubits()
        )));
    }
    let objective = Objective {
        rho,
        instances: &relation.instances,
        mode: ObjectiveMode::SumOfSquares,
        num_sites: relation.num_sites,
    };
    let (settings, lhs) = if optimize {
        optimize_objective(
            &objective,
            &relation.obs_per_site,
            seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(sample_id),
            restarts,
            iterations,
        )?
    } else {
        let settings = Settings::canonical(&relation.obs_per_site);
        let value = objective.total(&objective.values(&settings.observables()));
        (settings, value)
    };
    let per = objective.values(&settings.observables());
    Ok(SweepSample {
        sample_id,
        seed,
        lhs,
        bound: relation.bound,
        violated: lhs > relation.bound + SWEEP_TOL,
        per_functional: per,
    })
}

/// `sum over {x,y}^N strings of Tr(rho s_1 x ... x s_N)^2`, unit
/// normalization.
pub fn correlation_tensor_norm(rho: &DensityMatrix) -> f64 {
    let n = rho.num_qubits();
    let mut total = 0.0;
    for mask in 0..1usize << n {
        let mats: Vec<ComplexMatrix> = (0..n)
            .map(|q| if mask >> q & 1 == 0 { sigma_x() } else { sigma_y() })
            .collect();
        let op = kron_all(&mats);
        let t = (rho.matrix() * op).trace().re;
        total += t * t;
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct TradeoffReport {
    pub k: usize,
    pub values: Vec<f64>,
    pub sum_sq: f64,
    pub bound: f64,
    pub respected: bool,
}

/// `sum_j IC^2` for a list of bipartite boxes against `4^(k-1) k`.
pub fn tradeoff_ic(boxes: &[BoxTable], k: usize) -> Result<TradeoffReport> {
    let f = functional("ic", Some(k))?;
    let mut values = Vec::with_capacity(boxes.len());
    for b in boxes {
        values.push(evaluate(&f, b)?);
    }
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    let bound = 4f64.powi(k as i32 - 1) * k as f64;
    Ok(TradeoffReport {
        k,
        values,
        sum_sq,
        bound,
        respected: sum_sq <= bound + SWEEP_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsbox::{isotropic_box, perfect_sb_box, pr_box, BoxTable};
    use crate::quantum::{expectation, named_state, NamedState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn chsh_reference_values() {
        let chsh = functional("chsh", None).unwrap();
        assert_abs_diff_eq!(evaluate(&chsh, &pr_box()).unwrap(), 4.0, epsilon = 1e-12);
        for e in [0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(
                evaluate(&chsh, &isotropic_box(e).unwrap()).unwrap(),
                4.0 * e,
                epsilon = 1e-12
            );
        }
        // Local deterministic A = B = 0.
        let det = BoxTable::from_fn(vec![(2, 2); 2], |_, o| {
            if o[0] == 0 && o[1] == 0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_abs_diff_eq!(evaluate(&chsh, &det).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sb_saturates_on_perfect_box() {
        let sb = functional("sb", None).unwrap();
        let b = perfect_sb_box(1).unwrap();
        assert_abs_diff_eq!(evaluate(&sb, &b).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn ic2_is_chsh() {
        let chsh = functional("chsh", None).unwrap();
        let ic2 = functional("ic", Some(2)).unwrap();
        assert_eq!(chsh.input_sizes, ic2.input_sizes);
        assert_eq!(chsh.coeffs, ic2.coeffs);
    }

    #[test]
    fn local_maxima_by_enumeration() {
        assert_abs_diff_eq!(
            local_max(&functional("chsh", None).unwrap()).unwrap().value,
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            local_max(&functional("mermin", None).unwrap()).unwrap().value,
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            local_max(&functional("sb", None).unwrap()).unwrap().value,
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ic_bounds_match_enumeration() {
        for (k, lower, upper) in [
            (2, 2.0, 2.0 * 2f64.sqrt()),
            (3, 6.0, 4.0 * 3f64.sqrt()),
            (4, 12.0, 8.0 * 2.0),
        ] {
            let (lo, up) = ic_bounds(k).unwrap();
            assert_abs_diff_eq!(lo, lower, epsilon = 1e-12);
            assert_abs_diff_eq!(up, upper, epsilon = 1e-12);
            let enumerated = local_max(&functional("ic", Some(k)).unwrap()).unwrap().value;
            assert_abs_diff_eq!(enumerated, lower, epsilon = 1e-12);
        }
        let (lo5, up5) = ic_bounds(5).unwrap();
        assert_abs_diff_eq!(lo5, 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up5, 16.0 * 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            local_max(&functional("ic", Some(5)).unwrap()).unwrap().value,
            30.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn evaluate_is_linear_under_mixing() {
        let chsh = functional("chsh", None).unwrap();
        let b1 = isotropic_box(0.9).unwrap();
        let b2 = isotropic_box(-0.4).unwrap();
        let m = crate::nsbox::mix(&[b1.clone(), b2.clone()], &[0.25, 0.75]).unwrap();
        let lhs = evaluate(&chsh, &m).unwrap();
        let rhs = 0.25 * evaluate(&chsh, &b1).unwrap() + 0.75 * evaluate(&chsh, &b2).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn singlet_chsh_optimum() {
        let rho = named_state(&NamedState::Singlet).unwrap();
        let chsh = functional("chsh", None).unwrap();
        let (_, value) = optimize_settings(&rho, &chsh, 11, 5, 50).unwrap();
        assert_abs_diff_eq!(value, 2.0 * 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn ghz_mermin_optimum() {
        let rho = named_state(&NamedState::Ghz(3)).unwrap();
        let mermin = functional("mermin", None).unwrap();
        let (_, value) = optimize_settings(&rho, &mermin, 11, 5, 50).unwrap();
        assert_abs_diff_eq!(value, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn ghz_mermin_closed_form_settings() {
        // sigma_x / sigma_y settings oracle for the Mermin value on GHZ.
        let rho = named_state(&NamedState::Ghz(3)).unwrap();
        let x = Observable::new(1, sigma_x()).unwrap();
        let y = Observable::new(1, sigma_y()).unwrap();
        let minus_y = bloch_observable(PI / 2.0, -PI / 2.0);
        // A = (x, y), A' = (x, y), B = (-y, x).
        let term = |a: &Observable, b: &Observable, c: &Observable| {
            expectation(&rho, &[a.clone(), b.clone(), c.clone()]).unwrap()
        };
        let m = term(&y, &x, &minus_y) + term(&x, &y, &minus_y) + term(&x, &x, &x)
            - term(&y, &y, &x);
        assert_abs_diff_eq!(m, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn ghz_sb_optimum() {
        let rho = named_state(&NamedState::Ghz(3)).unwrap();
        let sb = functional("sb", None).unwrap();
        let (_, value) = optimize_settings(&rho, &sb, 11, 5, 50).unwrap();
        assert_abs_diff_eq!(value, 4.0 * 2f64.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn chsh8_product_fixture() {
        // Bell pair between Alice and receiver 1, |0> on receiver 2:
        // one term reaches 8, the other vanishes at shared settings.
        let rho = crate::quantum::bell_pair_padded(1).unwrap();
        let rel = relation(RelationId::Chsh8, Some(2), None).unwrap();
        let report = monogamy_sweep(
            &rel,
            &SweepSource::State(rho),
            true,
            3,
            5,
            60,
        )
        .unwrap();
        assert_abs_diff_eq!(report.max_lhs, 8.0, epsilon = 1e-6);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn chsh8_random_states_respect_bound() {
        let rel = relation(RelationId::Chsh8, Some(2), None).unwrap();
        let report = monogamy_sweep(
            &rel,
            &SweepSource::Random { trials: 25, seed: 21 },
            true,
            5,
            1,
            25,
        )
        .unwrap();
        assert!(report.max_lhs <= 8.0 + 1e-6, "max {}", report.max_lhs);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn chsh8_shared_coin_probe_exceeds() {
        let rel = relation(RelationId::Chsh8, Some(3), None).unwrap();
        let coin = crate::nsbox::shared_coin_box(3).unwrap();
        let report =
            monogamy_sweep(&rel, &SweepSource::Boxes(coin), false, 0, 1, 1).unwrap();
        assert_abs_diff_eq!(report.max_lhs, 12.0, epsilon = 1e-12);
        assert_eq!(report.violations, 1);
    }

    #[test]
    fn tensor_norm_values() {
        let zero2 = named_state(&NamedState::Product("00".into())).unwrap();
        assert_abs_diff_eq!(correlation_tensor_norm(&zero2), 0.0, epsilon = 1e-12);
        let singlet = named_state(&NamedState::Singlet).unwrap();
        assert_abs_diff_eq!(correlation_tensor_norm(&singlet), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_norm_product_states_capped_at_one() {
        // Product pure states factor the tensor: sum T^2 =
        // (ux^2 + uy^2)(vx^2 + vy^2) <= 1, saturated on equatorial states.
        let plus2 = named_state(&NamedState::Plus(2)).unwrap();
        assert_abs_diff_eq!(correlation_tensor_norm(&plus2), 1.0, epsilon = 1e-12);
        for seed in 0..20 {
            let a = crate::quantum::random_pure_state(1, seed).unwrap();
            let b = crate::quantum::random_pure_state(1, seed + 1000).unwrap();
            let rho = DensityMatrix::new(2, a.matrix().kronecker(b.matrix())).unwrap();
            assert!(correlation_tensor_norm(&rho) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn tradeoff_single_quantum_box() {
        let rho = named_state(&NamedState::Singlet).unwrap();
        let chsh = functional("chsh", None).unwrap();
        let (settings, value) = optimize_settings(&rho, &chsh, 11, 5, 50).unwrap();
        assert_abs_diff_eq!(value, 2.0 * 2f64.sqrt(), epsilon = 1e-6);
        let obs = settings.observables();
        let b = crate::nsbox::quantum_box(
            &rho,
            &[
                crate::nsbox::PartySettings { qubits: 1, observables: obs[0].clone() },
                crate::nsbox::PartySettings { qubits: 1, observables: obs[1].clone() },
            ],
        )
        .unwrap();
        let report = tradeoff_ic(&[b], 2).unwrap();
        assert_abs_diff_eq!(report.sum_sq, 8.0, epsilon = 1e-5);
        assert!(report.respected);
    }
}
