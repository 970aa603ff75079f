//! Exact execution of random access code protocols over box tables.
//!
//! Everything here is full enumeration: uniform database bits, uniform
//! independent receiver questions, and a sum over all box outcomes. No
//! sampling, so reports are deterministic and reproducible bit for bit.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{IcError, Result};
use crate::infotheory::JointDistribution;
use crate::nsbox::BoxTable;

const ENUM_GUARD: usize = 1 << 26;
const LEAK_TOL: f64 = 1e-9;
const QUAD_TOL: f64 = 1e-9;

/// Protocol family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RacVariant {
    Additive,
    SbVariant,
    Nested { depth: usize },
}

/// Configuration of an `(n, k)` run; priors are uniform throughout.
#[derive(Debug, Clone, Serialize)]
pub struct RacConfig {
    pub receivers: usize,
    pub database_bits: usize,
    pub variant: RacVariant,
}

impl RacConfig {
    pub fn new(receivers: usize, database_bits: usize, variant: RacVariant) -> Result<Self> {
        if receivers < 1 {
            return Err(IcError::InvalidArgument("need at least one receiver".into()));
        }
        if database_bits < 2 {
            return Err(IcError::InvalidArgument("need at least two database bits".into()));
        }
        match variant {
            RacVariant::SbVariant if database_bits != 2 => {
                return Err(IcError::InvalidArgument("the two-box variant requires k = 2".into()))
            }
            RacVariant::Nested { depth } if database_bits != 1 << depth => {
                return Err(IcError::InvalidArgument(
                    "nested variant requires k = 2^depth".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { receivers, database_bits, variant })
    }
}

/// Per-run information-causality accounting.
#[derive(Debug, Clone, Serialize)]
pub struct InfoReport {
    /// Total quantity `I = sum_j I_j` in bits.
    pub i_total: f64,
    /// Per-receiver totals `I_j = sum_l I(a_l : beta_j | b_j = l)`.
    pub i_j: Vec<f64>,
    /// Mutual informations keyed `"j,l"` (receiver, question).
    pub mi: BTreeMap<String, f64>,
    /// Bias coefficients keyed `"j,l"`, computed from the protocol joint.
    pub xi: BTreeMap<String, f64>,
    /// Communication leakage `I(a_l : c)` per database bit.
    pub leakage: Vec<f64>,
    /// Per-receiver quadratic budgets `sum_l xi_{j,l}^2`.
    pub sum_xi_sq: Vec<f64>,
    pub flags: ReportFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFlags {
    /// `I <= 1`.
    pub ic_satisfied: bool,
    /// `max_l I(a_l : c) <= 1e-9`.
    pub leak_free: bool,
    /// Per receiver, `I_j <= sum_l xi^2 + 1e-9`.
    pub quadratic_bound_respected: Vec<bool>,
}

impl InfoReport {
    pub fn all_checks_pass(&self) -> bool {
        self.flags.ic_satisfied
            && self.flags.leak_free
            && self.flags.quadratic_bound_respected.iter().all(|&b| b)
    }
}

/// Accumulators for the protocol joint: one `(a_l, beta_j)` table per
/// receiver and question, and one `(a_l, c)` table per database bit.
struct JointAccumulator {
    receivers: usize,
    k: usize,
    /// `guess[j][l][a_l * 2 + beta]`, conditioned on `b_j = l`.
    guess: Vec<Vec<[f64; 4]>>,
    /// `leak[l][a_l * 2 + c]`.
    leak: Vec<[f64; 4]>,
}

impl JointAccumulator {
    fn new(receivers: usize, k: usize) -> Self {
        Self {
            receivers,
            k,
            guess: vec![vec![[0.0; 4]; k]; receivers],
            leak: vec![[0.0; 4]; k],
        }
    }

    fn add_guess(&mut self, j: usize, l: usize, a_l: usize, beta: usize, p: f64) {
        self.guess[j][l][a_l * 2 + beta] += p;
    }

    fn add_leak(&mut self, l: usize, a_l: usize, c: usize, p: f64) {
        self.leak[l][a_l * 2 + c] += p;
    }

    fn finish(self) -> Result<InfoReport> {
        let mut mi = BTreeMap::new();
        let mut xi = BTreeMap::new();
        let mut i_j = Vec::with_capacity(self.receivers);
        let mut sum_xi_sq = Vec::with_capacity(self.receivers);
        for (j, per_l) in self.guess.iter().enumerate() {
            let mut total = 0.0;
            let mut quad = 0.0;
            for (l, table) in per_l.iter().enumerate() {
                let weight: f64 = table.iter().sum();
                if weight <= 0.0 {
                    return Err(IcError::Invariant("empty protocol joint".into()));
                }
                let normalized: Vec<f64> = table.iter().map(|p| p / weight).collect();
                let joint = JointDistribution::new(
                    vec!["a".into(), "beta".into()],
                    vec![2, 2],
                    normalized.clone(),
                )?;
                let info = joint.mutual_information(&["a"], &["beta"])?;
                let bias =
                    normalized[0] + normalized[3] - normalized[1] - normalized[2];
                mi.insert(format!("{},{l}", j + 1), info);
                xi.insert(format!("{},{l}", j + 1), bias);
                total += info;
                quad += bias * bias;
            }
            i_j.push(total);
            sum_xi_sq.push(quad);
        }
        let mut leakage = Vec::with_capacity(self.k);
        for table in &self.leak {
            let weight: f64 = table.iter().sum();
            let normalized: Vec<f64> = table.iter().map(|p| p / weight).collect();
            let joint = JointDistribution::new(
                vec!["a".into(), "c".into()],
                vec![2, 2],
                normalized,
            )?;
            leakage.push(joint.mutual_information(&["a"], &["c"])?);
        }
        let i_total: f64 = i_j.iter().sum();
        let flags = ReportFlags {
            ic_satisfied: i_total <= 1.0 + 1e-12,
            leak_free: leakage.iter().all(|&v| v <= LEAK_TOL),
            quadratic_bound_respected: i_j
                .iter()
                .zip(&sum_xi_sq)
                .map(|(&i, &q)| i <= q + QUAD_TOL)
                .collect(),
        };
        Ok(InfoReport { i_total, i_j, mi, xi, leakage, sum_xi_sq, flags })
    }
}

fn decode_bits(mut v: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(n) {
        *slot = v & 1;
        v >>= 1;
    }
}

/// Additive `(n, k)` protocol: Alice inputs `alpha_i = a_0 xor a_i`,
/// announces `c = a_0 xor A`, and every receiver guesses `beta_j = c xor B_j`.
pub fn run_additive(table: &BoxTable, config: &RacConfig) -> Result<InfoReport> {
    let n = config.receivers;
    let k = config.database_bits;
    if table.num_parties() != 1 + n {
        return Err(IcError::DimensionMismatch(format!(
            "box has {} parties, protocol needs {}",
            table.num_parties(),
            1 + n
        )));
    }
    let parties = table.parties();
    if parties[0].0 != 1 << (k - 1) {
        return Err(IcError::DimensionMismatch(format!(
            "Alice alphabet {} does not match k = {k}",
            parties[0].0
        )));
    }
    if parties.iter().any(|&(_, o)| o != 2) {
        return Err(IcError::DimensionMismatch("protocol needs binary outputs".into()));
    }
    if parties[1..].iter().any(|&(i, _)| i != k) {
        return Err(IcError::DimensionMismatch("receiver alphabets must equal k".into()));
    }
    let b_combos = k.checked_pow(n as u32).ok_or_else(|| {
        IcError::SizeGuard("question space overflow".into())
    })?;
    let work = (1usize << k) * b_combos * table.outcome_count();
    if work > ENUM_GUARD {
        return Err(IcError::SizeGuard(format!("enumeration size {work} > {ENUM_GUARD}")));
    }

    let mut acc = JointAccumulator::new(n, k);
    let p_a = 1.0 / (1 << k) as f64;
    let p_b = 1.0 / (b_combos as f64);
    let mut abits = vec![0usize; k];
    let mut inputs = vec![0usize; 1 + n];
    for a in 0..1usize << k {
        decode_bits(a, k, &mut abits);
        // Alice input integer: bits alpha_1..alpha_{k-1}, alpha_1 least significant.
        let mut alpha = 0usize;
        for i in (1..k).rev() {
            alpha = (alpha << 1) | (abits[0] ^ abits[i]);
        }
        inputs[0] = alpha;
        for bq in 0..b_combos {
            let mut rest = bq;
            for j in 0..n {
                inputs[1 + j] = rest % k;
                rest /= k;
            }
            for (outs, p_box) in table.outcomes(&inputs) {
                if p_box == 0.0 {
                    continue;
                }
                let p = p_a * p_b * p_box;
                let c = abits[0] ^ outs[0];
                for l in 0..k {
                    // b-average is uniform, so every (a, bq) cell contributes.
                    acc.add_leak(l, abits[l], c, p);
                }
                for j in 0..n {
                    let l = inputs[1 + j];
                    let beta = c ^ outs[1 + j];
                    acc.add_guess(j, l, abits[l], beta, p);
                }
            }
        }
    }
    acc.finish()
}

/// Two-box `(n, 2)` variant: Alice inputs `x1 = a_0`, `x2 = a_1` into sites
/// 0 and 1, announces `c = A1 xor A2 xor a0 xor !a1 xor (a0 & !a1)`, and the
/// receiver corrects by its own question bit.
pub fn run_sb_variant(table: &BoxTable, receivers: usize) -> Result<InfoReport> {
    let n = receivers;
    if n < 1 {
        return Err(IcError::InvalidArgument("need at least one receiver".into()));
    }
    if table.num_parties() != 2 + n {
        return Err(IcError::DimensionMismatch(format!(
            "box has {} parties, protocol needs {}",
            table.num_parties(),
            2 + n
        )));
    }
    if table.parties().iter().any(|&(i, o)| i != 2 || o != 2) {
        return Err(IcError::DimensionMismatch("variant needs binary alphabets".into()));
    }
    let b_combos = 1usize << n;
    let mut acc = JointAccumulator::new(n, 2);
    let p_prior = 0.25 / (b_combos as f64);
    let mut inputs = vec![0usize; 2 + n];
    for a in 0..4usize {
        let (a0, a1) = (a & 1, a >> 1);
        inputs[0] = a0;
        inputs[1] = a1;
        let offset = a0 ^ (1 - a1) ^ (a0 & (1 - a1));
        for bq in 0..b_combos {
            for j in 0..n {
                inputs[2 + j] = bq >> j & 1;
            }
            for (outs, p_box) in table.outcomes(&inputs) {
                if p_box == 0.0 {
                    continue;
                }
                let p = p_prior * p_box;
                let c = outs[0] ^ outs[1] ^ offset;
                for (l, &a_l) in [a0, a1].iter().enumerate() {
                    acc.add_leak(l, a_l, c, p);
                }
                for j in 0..n {
                    let y = inputs[2 + j];
                    let beta = outs[2 + j] ^ c ^ y;
                    let a_l = if y == 0 { a0 } else { a1 };
                    acc.add_guess(j, y, a_l, beta, p);
                }
            }
        }
    }
    acc.finish()
}

/// Nested `(1, 2^p)` protocol on a binary complete tree of bipartite boxes.
///
/// Leaves hold the database bits in index order; each internal node's box
/// takes the XOR of its children's values, and the node value is the left
/// child value XOR the Alice-side output. Alice announces the root value.
/// The receiver descends along the path picked by the binary expansion of
/// the address (most significant bit at the root), XORing the Bob-side
/// outputs into the announced bit.
pub fn run_nested(edge_box: &BoxTable, depth: usize) -> Result<InfoReport> {
    if depth < 1 || depth > 3 {
        return Err(IcError::InvalidArgument("depth must be in 1..=3".into()));
    }
    if edge_box.num_parties() != 2 || edge_box.parties().iter().any(|&(i, o)| i != 2 || o != 2) {
        return Err(IcError::DimensionMismatch("edge box must be bipartite binary".into()));
    }
    let k = 1usize << depth;
    let num_nodes = k - 1; // internal nodes, level order
    let mut acc = JointAccumulator::new(1, k);
    let p_a = 1.0 / (1 << k) as f64;
    // Conditional p(A, B | x, y) and the Alice marginal p(A | x).
    let p_joint = |x: usize, y: usize, a_out: usize, b_out: usize| {
        edge_box.prob(&[x, y], &[a_out, b_out])
    };
    let p_alice = |x: usize, a_out: usize| {
        p_joint(x, 0, a_out, 0) + p_joint(x, 0, a_out, 1)
    };

    let mut abits = vec![0usize; k];
    for address in 0..k {
        // Nodes on the receiver's path, root first, with the question bit
        // consumed most significant first.
        let mut path = Vec::with_capacity(depth);
        let mut node = 0usize;
        for level in 0..depth {
            let bit = address >> (depth - 1 - level) & 1;
            path.push((node, bit));
            node = 2 * node + 1 + bit;
        }
        let on_path = |idx: usize| path.iter().position(|&(n, _)| n == idx);

        for a in 0..1usize << k {
            decode_bits(a, k, &mut abits);
            // Enumerate Alice outputs for every node and Bob outputs along
            // the path.
            for a_outs in 0..1usize << num_nodes {
                for b_outs in 0..1usize << depth {
                    // Values bottom-up; node i has children 2i+1, 2i+2.
                    // Leaves of the node tree are the database bits.
                    let mut value = vec![0usize; num_nodes];
                    let mut prob = p_a;
                    for i in (0..num_nodes).rev() {
                        let child = |c: usize| {
                            if c >= num_nodes {
                                abits[c - num_nodes]
                            } else {
                                value[c]
                            }
                        };
                        let (vl, vr) = (child(2 * i + 1), child(2 * i + 2));
                        let x = vl ^ vr;
                        let a_out = a_outs >> i & 1;
                        if let Some(slot) = on_path(i) {
                            let y = path[slot].1;
                            let b_out = b_outs >> slot & 1;
                            prob *= p_joint(x, y, a_out, b_out);
                        } else {
                            prob *= p_alice(x, a_out);
                        }
                        value[i] = vl ^ a_out;
                    }
                    if prob == 0.0 {
                        continue;
                    }
                    let c = value[0];
                    let mut beta = c;
                    for slot in 0..depth {
                        beta ^= b_outs >> slot & 1;
                    }
                    acc.add_guess(0, address, abits[address], beta, prob / k as f64);
                    if address == 0 {
                        // Leakage is address independent; tally once.
                        for l in 0..k {
                            acc.add_leak(l, abits[l], c, prob);
                        }
                    }
                }
            }
        }
    }
    acc.finish()
}

/// Result of a `leakage_check`.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageCheck {
    pub passed: bool,
    pub per_bit: Vec<f64>,
    pub tol: f64,
}

pub fn leakage_check(report: &InfoReport, tol: f64) -> LeakageCheck {
    LeakageCheck {
        passed: report.leakage.iter().all(|&v| v <= tol),
        per_bit: report.leakage.clone(),
        tol,
    }
}

/// Per-receiver comparison of `I_j` against its quadratic budget.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticBoundRow {
    pub receiver: usize,
    pub i_j: f64,
    pub sum_xi_sq: f64,
    pub respected: bool,
}

pub fn quadratic_bound_report(report: &InfoReport) -> Vec<QuadraticBoundRow> {
    report
        .i_j
        .iter()
        .zip(&report.sum_xi_sq)
        .enumerate()
        .map(|(j, (&i, &q))| QuadraticBoundRow {
            receiver: j + 1,
            i_j: i,
            sum_xi_sq: q,
            respected: i <= q + QUAD_TOL,
        })
        .collect()
}

/// Best leak-free deterministic classical strategy for `(n, 2)`.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalSearchResult {
    pub best_i: f64,
    /// Alice's bit as a table over `(a1 a0, r)`, index `a + 4r`.
    pub witness_c: Vec<u8>,
    /// Receiver guess as a table over `(b, c, r)`, index `b + 2c + 4r`.
    pub witness_beta: Vec<u8>,
    pub receivers: usize,
    pub shared_randomness_bits: usize,
    pub strategies_scanned: u64,
}

/// Exhaustive search over deterministic strategies with up to one shared
/// random bit, subject to `I(a_l : c) <= 1e-9` for every l. Receivers are
/// interchangeable, so one receiver's optimum is scanned and multiplied.
pub fn classical_strategy_search(
    receivers: usize,
    database_bits: usize,
    shared_randomness_bits: usize,
) -> Result<ClassicalSearchResult> {
    if database_bits != 2 {
        return Err(IcError::InvalidArgument("search supports k = 2 only".into()));
    }
    if receivers < 1 || receivers > 3 {
        return Err(IcError::SizeGuard("search supports n <= 3".into()));
    }
    if shared_randomness_bits > 1 {
        return Err(IcError::SizeGuard("at most one shared random bit".into()));
    }
    let r_vals = 1usize << shared_randomness_bits;
    let c_funcs = 1usize << (4 * r_vals); // c : (a, r) -> bit
    let beta_funcs = 1usize << (4 * r_vals); // beta : (b, c, r) -> bit
    let p_prior = 0.25 / r_vals as f64;

    let mut best_i = 0.0f64;
    let mut best_c = 0usize;
    let mut best_beta = 0usize;
    let mut scanned = 0u64;
    for cf in 0..c_funcs {
        let c_of = |a: usize, r: usize| cf >> (a + 4 * r) & 1;
        // Leakage screen: I(a_l : c) must vanish for both bits.
        let mut leak_ok = true;
        for l in 0..2 {
            let mut joint = [0.0f64; 4];
            for a in 0..4 {
                for r in 0..r_vals {
                    let a_l = a >> l & 1;
                    joint[a_l * 2 + c_of(a, r)] += p_prior;
                }
            }
            let dist = JointDistribution::new(
                vec!["a".into(), "c".into()],
                vec![2, 2],
                joint.to_vec(),
            )?;
            if dist.mutual_information(&["a"], &["c"])? > 1e-9 {
                leak_ok = false;
                break;
            }
        }
        if !leak_ok {
            continue;
        }
        for bf in 0..beta_funcs {
            scanned += 1;
            let beta_of = |b: usize, c: usize, r: usize| bf >> (b + 2 * c + 4 * r) & 1;
            let mut i_one = 0.0;
            for l in 0..2 {
                let mut joint = [0.0f64; 4];
                for a in 0..4 {
                    for r in 0..r_vals {
                        let a_l = a >> l & 1;
                        let c = c_of(a, r);
                        joint[a_l * 2 + beta_of(l, c, r)] += p_prior;
                    }
                }
                let dist = JointDistribution::new(
                    vec!["a".into(), "beta".into()],
                    vec![2, 2],
                    joint.to_vec(),
                )?;
                i_one += dist.mutual_information(&["a"], &["beta"])?;
            }
            let total = i_one * receivers as f64;
            if total > best_i {
                best_i = total;
                best_c = cf;
                best_beta = bf;
            }
        }
    }
    Ok(ClassicalSearchResult {
        best_i,
        witness_c: (0..4 * r_vals).map(|i| (best_c >> i & 1) as u8).collect(),
        witness_beta: (0..4 * r_vals).map(|i| (best_beta >> i & 1) as u8).collect(),
        receivers,
        shared_randomness_bits,
        strategies_scanned: scanned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::binary_entropy;
    use crate::nsbox::{
        self, bias_xi, isotropic_box, one_hot, pr_box, shared_coin_box,
    };
    use approx::assert_abs_diff_eq;

    fn config(n: usize, k: usize) -> RacConfig {
        RacConfig::new(n, k, RacVariant::Additive).unwrap()
    }

    #[test]
    fn pr_box_doubles_information() {
        let report = run_additive(&pr_box(), &config(1, 2)).unwrap();
        assert_eq!(report.i_total, 2.0);
        assert!(!report.flags.ic_satisfied);
        assert!(report.flags.leak_free);
        // xi = 1 for both questions, respected with equality.
        assert_abs_diff_eq!(report.sum_xi_sq[0], 2.0, epsilon = 1e-12);
        assert!(report.flags.quadratic_bound_respected[0]);
    }

    #[test]
    fn flat_box_gives_nothing() {
        let report = run_additive(&isotropic_box(0.0).unwrap(), &config(1, 2)).unwrap();
        assert_abs_diff_eq!(report.i_total, 0.0, epsilon = 1e-12);
        assert!(report.flags.leak_free);
        assert!(report.flags.ic_satisfied);
    }

    #[test]
    fn isotropic_matches_closed_form() {
        // Closed-form oracle: each question behaves as a BSC of bias E.
        for e in [0.3, 0.5, 0.9] {
            let report = run_additive(&isotropic_box(e).unwrap(), &config(1, 2)).unwrap();
            let expect = 2.0 * (1.0 - binary_entropy((1.0 - e) / 2.0));
            assert_abs_diff_eq!(report.i_total, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn shared_coin_three_receivers() {
        let report = run_additive(&shared_coin_box(3).unwrap(), &config(3, 2)).unwrap();
        assert_eq!(report.i_total, 3.0);
        assert!(report.flags.leak_free);
        assert!(!report.flags.ic_satisfied);
        for row in quadratic_bound_report(&report) {
            assert!(row.respected);
            assert_abs_diff_eq!(row.sum_xi_sq, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn report_totals_consistent() {
        let report = run_additive(&isotropic_box(0.7).unwrap(), &config(1, 2)).unwrap();
        let sum: f64 = report.i_j.iter().sum();
        assert_abs_diff_eq!(report.i_total, sum, epsilon = 1e-12);
        for v in report.mi.values() {
            assert!((0.0..=1.0 + 1e-12).contains(v));
        }
    }

    #[test]
    fn xi_from_joint_matches_box_bias() {
        for e in [0.25, 0.6, 1.0] {
            let table = isotropic_box(e).unwrap();
            let report = run_additive(&table, &config(1, 2)).unwrap();
            for l in 0..2 {
                let direct = bias_xi(&table, 1, &one_hot(2, l)).unwrap();
                assert_abs_diff_eq!(report.xi[&format!("1,{l}")], direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_correlation() {
        let mut last = -1.0;
        for i in 0..=10 {
            let e = i as f64 / 10.0;
            let report = run_additive(&isotropic_box(e).unwrap(), &config(1, 2)).unwrap();
            assert!(report.i_j[0] >= last - 1e-12);
            last = report.i_j[0];
        }
    }

    #[test]
    fn sb_variant_perfect_box() {
        // The perfect Seevinck-Bell box makes the two-box encoding exact.
        let table = nsbox::perfect_sb_box(1).unwrap();
        let report = run_sb_variant(&table, 1).unwrap();
        assert_abs_diff_eq!(report.i_total, 2.0, epsilon = 1e-12);
        assert!(report.flags.leak_free);
    }

    #[test]
    fn sb_variant_flat_box() {
        let flat = BoxTable::from_fn(vec![(2, 2); 3], |_, _| 0.125).unwrap();
        let report = run_sb_variant(&flat, 1).unwrap();
        assert_abs_diff_eq!(report.i_total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nested_depth_one_equals_additive() {
        for e in [0.4, 0.9, 1.0] {
            let edge = isotropic_box(e).unwrap();
            let nested = run_nested(&edge, 1).unwrap();
            let additive = run_additive(&edge, &config(1, 2)).unwrap();
            assert_abs_diff_eq!(nested.i_total, additive.i_total, epsilon = 1e-12);
            for (key, v) in &nested.mi {
                assert_abs_diff_eq!(*v, additive.mi[key], epsilon = 1e-12);
            }
            for (key, v) in &nested.xi {
                assert_abs_diff_eq!(*v, additive.xi[key], epsilon = 1e-12);
            }
            for (a, b) in nested.leakage.iter().zip(&additive.leakage) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn nested_perfect_depth_two() {
        let report = run_nested(&pr_box(), 2).unwrap();
        assert_abs_diff_eq!(report.i_total, 4.0, epsilon = 1e-12);
        assert!(report.flags.leak_free);
    }

    #[test]
    fn nested_bias_is_power_law() {
        let report = run_nested(&isotropic_box(0.9).unwrap(), 2).unwrap();
        for l in 0..4 {
            assert_abs_diff_eq!(report.xi[&format!("1,{l}")], 0.81, epsilon = 1e-12);
        }
        let expect = 4.0 * (1.0 - binary_entropy((1.0 - 0.81) / 2.0));
        assert_abs_diff_eq!(report.i_total, expect, epsilon = 1e-12);
    }

    #[test]
    fn leakage_check_cases() {
        // c = a_0 leaks exactly one bit on question 0.
        let mut report = run_additive(&isotropic_box(0.0).unwrap(), &config(1, 2)).unwrap();
        report.leakage = vec![1.0, 0.0];
        let check = leakage_check(&report, 1e-9);
        assert!(!check.passed);
        assert_abs_diff_eq!(check.per_bit[0], 1.0);

        let clean = run_additive(&shared_coin_box(1).unwrap(), &config(1, 2)).unwrap();
        assert!(leakage_check(&clean, 1e-9).passed);
    }

    #[test]
    fn classical_search_without_randomness() {
        let result = classical_strategy_search(1, 2, 0).unwrap();
        assert_abs_diff_eq!(result.best_i, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn classical_search_with_shared_bit() {
        let result = classical_strategy_search(1, 2, 1).unwrap();
        assert_abs_diff_eq!(result.best_i, 1.0, epsilon = 1e-9);
        let result3 = classical_strategy_search(3, 2, 1).unwrap();
        assert_abs_diff_eq!(result3.best_i, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_mismatched_shapes() {
        assert!(run_additive(&pr_box(), &config(2, 2)).is_err());
        assert!(run_sb_variant(&pr_box(), 1).is_err());
        assert!(run_nested(&shared_coin_box(2).unwrap(), 1).is_err());
        assert!(RacConfig::new(1, 3, RacVariant::SbVariant).is_err());
        assert!(RacConfig::new(1, 3, RacVariant::Nested { depth: 2 }).is_err());
    }
}
