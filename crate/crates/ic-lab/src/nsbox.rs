//! Multi-party input/output boxes as exact conditional probability tables,
//! plus the standard classical / quantum / superquantum constructions.
//!
//! Conventions fixed here and relied on everywhere else:
//! party 0 is Alice, parties `1..` are receivers; for a database of `k` bits
//! Alice's input alphabet is the `2^(k-1)` vectors `(alpha_1..alpha_{k-1})`
//! read as an integer with `alpha_1` the least significant bit (`alpha_0` is
//! identically zero); outputs are binary with 0 mapped to +1 and 1 to -1
//! wherever correlators appear.

use serde::{Deserialize, Serialize};

use crate::error::{IcError, Result};
use crate::quantum::{self, DensityMatrix, Observable};

const ENTRY_GUARD: usize = 1 << 24;
const ENTRY_NEG_TOL: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-9;

/// Dense table of `P(outputs | inputs)` over an ordered list of parties.
///
/// Entries are row-major over `(inputs, outputs)` with the last party's
/// symbol varying fastest inside each group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxTable {
    /// Per party: (input alphabet size, output alphabet size).
    parties: Vec<(usize, usize)>,
    probs: Vec<f64>,
}

impl BoxTable {
    pub fn new(parties: Vec<(usize, usize)>, probs: Vec<f64>) -> Result<Self> {
        let table = Self { parties, probs };
        table.validate()?;
        Ok(table)
    }

    /// Build from a per-input closure returning `P(outputs|inputs)`.
    pub fn from_fn(
        parties: Vec<(usize, usize)>,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let ins: Vec<usize> = parties.iter().map(|p| p.0).collect();
        let outs: Vec<usize> = parties.iter().map(|p| p.1).collect();
        let n_in: usize = ins.iter().product();
        let n_out: usize = outs.iter().product();
        if n_in.checked_mul(n_out).map_or(true, |n| n > ENTRY_GUARD) {
            return Err(IcError::SizeGuard(format!(
                "box table would exceed {ENTRY_GUARD} entries"
            )));
        }
        let mut probs = Vec::with_capacity(n_in * n_out);
        let mut ivec = vec![0usize; parties.len()];
        for i in 0..n_in {
            decode_mixed(i, &ins, &mut ivec);
            let mut ovec = vec![0usize; parties.len()];
            for o in 0..n_out {
                decode_mixed(o, &outs, &mut ovec);
                probs.push(f(&ivec, &ovec));
            }
        }
        Self::new(parties, probs)
    }

    fn validate(&self) -> Result<()> {
        if self.parties.is_empty() {
            return Err(IcError::Invariant("box needs at least 1 party".into()));
        }
        if self.parties.iter().any(|&(i, o)| i == 0 || o == 0) {
            return Err(IcError::Invariant("empty alphabet".into()));
        }
        let n_in = self.input_count();
        let n_out = self.outcome_count();
        if n_in.checked_mul(n_out) != Some(self.probs.len()) {
            return Err(IcError::DimensionMismatch(format!(
                "table has {} entries, expected {}",
                self.probs.len(),
                n_in * n_out
            )));
        }
        if self.probs.len() > ENTRY_GUARD {
            return Err(IcError::SizeGuard(format!(
                "box table exceeds {ENTRY_GUARD} entries"
            )));
        }
        for (idx, &p) in self.probs.iter().enumerate() {
            if !(p >= -ENTRY_NEG_TOL) {
                return Err(IcError::Invariant(format!("entry {idx} is {p}")));
            }
        }
        for i in 0..n_in {
            let row: f64 = self.probs[i * n_out..(i + 1) * n_out].iter().sum();
            if (row - 1.0).abs() > ROW_SUM_TOL {
                return Err(IcError::Invariant(format!(
                    "input row {i} sums to {row}"
                )));
            }
        }
        Ok(())
    }

    pub fn parties(&self) -> &[(usize, usize)] {
        &self.parties
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn input_count(&self) -> usize {
        self.parties.iter().map(|p| p.0).product()
    }

    pub fn outcome_count(&self) -> usize {
        self.parties.iter().map(|p| p.1).product()
    }

    fn input_index(&self, inputs: &[usize]) -> usize {
        encode_mixed(inputs, &self.input_sizes())
    }

    fn outcome_index(&self, outputs: &[usize]) -> usize {
        encode_mixed(outputs, &self.output_sizes())
    }

    pub fn input_sizes(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p.0).collect()
    }

    pub fn output_sizes(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p.1).collect()
    }

    pub fn prob(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        debug_assert_eq!(inputs.len(), self.parties.len());
        debug_assert_eq!(outputs.len(), self.parties.len());
        self.probs[self.input_index(inputs) * self.outcome_count() + self.outcome_index(outputs)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Iterate outcomes with nonzero probability for fixed inputs.
    pub fn outcomes<'a>(
        &'a self,
        inputs: &[usize],
    ) -> impl Iterator<Item = (Vec<usize>, f64)> + 'a {
        let base = self.input_index(inputs) * self.outcome_count();
        let sizes = self.output_sizes();
        (0..self.outcome_count()).map(move |o| {
            let mut ovec = vec![0usize; sizes.len()];
            decode_mixed(o, &sizes, &mut ovec);
            (ovec, self.probs[base + o])
        })
    }

    /// Marginal box on a subset of parties, holding the complement's inputs
    /// fixed and summing over its outputs.
    pub fn marginal(&self, keep: &[usize], complement_inputs: &[usize]) -> Result<BoxTable> {
        let p = self.parties.len();
        if keep.is_empty() || keep.len() > p {
            return Err(IcError::InvalidArgument("marginal needs a nonempty subset".into()));
        }
        let comp: Vec<usize> = (0..p).filter(|i| !keep.contains(i)).collect();
        if complement_inputs.len() != comp.len() {
            return Err(IcError::DimensionMismatch("complement input length".into()));
        }
        let kept_parties: Vec<(usize, usize)> = keep.iter().map(|&i| self.parties[i]).collect();
        let comp_out_sizes: Vec<usize> = comp.iter().map(|&i| self.parties[i].1).collect();
        let comp_out_total: usize = comp_out_sizes.iter().product();
        BoxTable::from_fn(kept_parties, |ivec, ovec| {
            let mut full_in = vec![0usize; p];
            let mut full_out = vec![0usize; p];
            for (slot, &party) in keep.iter().enumerate() {
                full_in[party] = ivec[slot];
                full_out[party] = ovec[slot];
            }
            for (slot, &party) in comp.iter().enumerate() {
                full_in[party] = complement_inputs[slot];
            }
            let mut total = 0.0;
            let mut comp_out = vec![0usize; comp.len()];
            for co in 0..comp_out_total {
                decode_mixed(co, &comp_out_sizes, &mut comp_out);
                for (slot, &party) in comp.iter().enumerate() {
                    full_out[party] = comp_out[slot];
                }
                total += self.prob(&full_in, &full_out);
            }
            total
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("box table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let table: BoxTable = serde_json::from_str(s)?;
        table.validate()?;
        Ok(table)
    }
}

fn encode_mixed(digits: &[usize], sizes: &[usize]) -> usize {
    let mut idx = 0;
    for (d, s) in digits.iter().zip(sizes) {
        debug_assert!(d < s);
        idx = idx * s + d;
    }
    idx
}

fn decode_mixed(mut idx: usize, sizes: &[usize], out: &mut [usize]) {
    for i in (0..sizes.len()).rev() {
        out[i] = idx % sizes[i];
        idx /= sizes[i];
    }
}

/// The Popescu-Rohrlich box: `A xor B = x*y` with uniform marginals.
pub fn pr_box() -> BoxTable {
    isotropic_box(1.0).expect("E=1 is in range")
}

/// PR correlation mixed with uniform noise: `P(A xor B = x*y) = (1+E)/2`.
pub fn isotropic_box(e: f64) -> Result<BoxTable> {
    if !(-1.0..=1.0).contains(&e) {
        return Err(IcError::InvalidArgument(format!("correlation {e} outside [-1,1]")));
    }
    BoxTable::from_fn(vec![(2, 2); 2], |i, o| {
        let target = i[0] & i[1];
        if o[0] ^ o[1] == target {
            (1.0 + e) / 4.0
        } else {
            (1.0 - e) / 4.0
        }
    })
}

/// Classical shared coin over `1 + n` parties: every output equals one
/// uniform random bit, all inputs ignored.
pub fn shared_coin_box(n: usize) -> Result<BoxTable> {
    if n < 1 {
        return Err(IcError::InvalidArgument("need at least one receiver".into()));
    }
    BoxTable::from_fn(vec![(2, 2); 1 + n], |_i, o| {
        if o.iter().all(|&b| b == o[0]) {
            0.5
        } else {
            0.0
        }
    })
}

/// Naive broadcast extension of the PR box: `A xor B_j = x*y_j` for every
/// receiver simultaneously, with `A` uniform. Exists as a table but signals.
pub fn broadcast_pr_box(n: usize) -> Result<BoxTable> {
    if n < 2 {
        return Err(IcError::InvalidArgument("broadcast box needs n >= 2".into()));
    }
    BoxTable::from_fn(vec![(2, 2); 1 + n], |i, o| {
        let x = i[0];
        let ok = (1..=n).all(|j| o[0] ^ o[j] == (x & i[j]));
        if ok {
            0.5
        } else {
            0.0
        }
    })
}

/// Perfect Seevinck-Bell box over `2 + n` parties (Alice holds sites 0, 1):
/// `A1 xor A2 xor B_j = x1*x2*y_j xor !x1*!x2*!y_j`, with `(A1, A2)` uniform.
pub fn perfect_sb_box(n: usize) -> Result<BoxTable> {
    if n < 1 {
        return Err(IcError::InvalidArgument("need at least one receiver".into()));
    }
    BoxTable::from_fn(vec![(2, 2); 2 + n], |i, o| {
        let (x1, x2) = (i[0], i[1]);
        let ok = (2..2 + n).all(|j| {
            let y = i[j];
            let target = (x1 & x2 & y) ^ ((1 - x1) & (1 - x2) & (1 - y));
            o[0] ^ o[1] ^ o[j] == target
        });
        if ok {
            0.25
        } else {
            0.0
        }
    })
}

/// Entrywise convex combination of boxes with identical signatures.
pub fn mix(boxes: &[BoxTable], weights: &[f64]) -> Result<BoxTable> {
    if boxes.is_empty() || boxes.len() != weights.len() {
        return Err(IcError::InvalidArgument("need matching boxes and weights".into()));
    }
    let sig = boxes[0].parties.clone();
    if boxes.iter().any(|b| b.parties != sig) {
        return Err(IcError::DimensionMismatch("mixing different signatures".into()));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(IcError::InvalidArgument("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(IcError::InvalidArgument(format!("weights sum to {total}")));
    }
    let mut probs = vec![0.0; boxes[0].probs.len()];
    for (b, &w) in boxes.iter().zip(weights) {
        for (acc, &p) in probs.iter_mut().zip(&b.probs) {
            *acc += w * p;
        }
    }
    BoxTable::new(sig, probs)
}

/// Measurement settings for one party of a quantum box.
#[derive(Debug, Clone)]
pub struct PartySettings {
    /// Number of qubits this party holds.
    pub qubits: usize,
    /// One dichotomic observable per input symbol.
    pub observables: Vec<Observable>,
}

/// Born-rule box: `P(o|i) = Tr(rho prod_parties Proj(i_p, o_p))` with the
/// outcome-0 projector on the +1 eigenspace.
pub fn quantum_box(rho: &DensityMatrix, settings: &[PartySettings]) -> Result<BoxTable> {
    let total_qubits: usize = settings.iter().map(|s| s.qubits).sum();
    if total_qubits != rho.num_qubits() {
        return Err(IcError::DimensionMismatch(format!(
            "settings cover {total_qubits} qubits, state has {}",
            rho.num_qubits()
        )));
    }
    for s in settings {
        if s.observables.is_empty() {
            return Err(IcError::InvalidArgument("party with no observables".into()));
        }
        if s.observables.iter().any(|o| o.arity() != s.qubits) {
            return Err(IcError::DimensionMismatch(
                "observable arity differs from party qubit count".into(),
            ));
        }
    }
    let parties: Vec<(usize, usize)> = settings.iter().map(|s| (s.observables.len(), 2)).collect();
    BoxTable::from_fn(parties, |ivec, ovec| {
        let projs: Vec<_> = settings
            .iter()
            .enumerate()
            .map(|(p, s)| s.observables[ivec[p]].projector(ovec[p] as u8))
            .collect();
        let op = quantum::kron_all(&projs);
        let val = (rho.matrix() * op).trace();
        debug_assert!(val.im.abs() < 1e-9);
        val.re.max(0.0)
    })
}

/// Outcome of a no-signaling audit.
#[derive(Debug, Clone, Serialize)]
pub struct NoSignalingReport {
    pub passed: bool,
    pub worst_violation: f64,
    /// `(kept parties, kept inputs, kept outputs, complement inputs lo/hi)`
    /// for the worst offender, when the check failed.
    pub offending: Option<OffendingMarginal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffendingMarginal {
    pub parties: Vec<usize>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub complement_inputs: (Vec<usize>, Vec<usize>),
}

/// For every proper party subset, the marginal on the subset's outputs given
/// its inputs must be independent of the complement's inputs within `tol`.
pub fn no_signaling_check(table: &BoxTable, tol: f64) -> NoSignalingReport {
    let p = table.num_parties();
    let mut worst = 0.0f64;
    let mut offending = None;
    for mask in 1..(1usize << p) - 1 {
        let keep: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
        let comp: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 0).collect();
        let comp_in_sizes: Vec<usize> = comp.iter().map(|&i| table.parties[i].0).collect();
        let comp_total: usize = comp_in_sizes.iter().product();
        let mut comp_in = vec![0usize; comp.len()];
        // Marginals for every complement input assignment.
        let mut marginals = Vec::with_capacity(comp_total);
        for ci in 0..comp_total {
            decode_mixed(ci, &comp_in_sizes, &mut comp_in);
            marginals.push((
                comp_in.clone(),
                table
                    .marginal(&keep, &comp_in)
                    .expect("subset marginal is well formed"),
            ));
        }
        let reference = &marginals[0].1;
        for entry in 0..reference.probs.len() {
            let mut lo = (0usize, f64::INFINITY);
            let mut hi = (0usize, f64::NEG_INFINITY);
            for (ci, (_, m)) in marginals.iter().enumerate() {
                let v = m.probs[entry];
                if v < lo.1 {
                    lo = (ci, v);
                }
                if v > hi.1 {
                    hi = (ci, v);
                }
            }
            let spread = hi.1 - lo.1;
            if spread > worst {
                worst = spread;
                let n_out = reference.outcome_count();
                let in_sizes = reference.input_sizes();
                let out_sizes = reference.output_sizes();
                let mut ivec = vec![0usize; keep.len()];
                let mut ovec = vec![0usize; keep.len()];
                decode_mixed(entry / n_out, &in_sizes, &mut ivec);
                decode_mixed(entry % n_out, &out_sizes, &mut ovec);
                offending = Some(OffendingMarginal {
                    parties: keep.clone(),
                    inputs: ivec,
                    outputs: ovec,
                    complement_inputs: (marginals[lo.0].0.clone(), marginals[hi.0].0.clone()),
                });
            }
        }
    }
    let passed = worst <= tol;
    NoSignalingReport {
        passed,
        worst_violation: worst,
        offending: if passed { None } else { offending },
    }
}

/// Bias coefficient of the addressed-bit XOR condition, averaged uniformly
/// over Alice's inputs:
/// `xi = P(A xor B_j = alpha . b) - P(A xor B_j = alpha . b xor 1)`.
///
/// `b_vector` must be one-hot of length `k`; Alice's input alphabet must be
/// `2^(k-1)` and the receiver's input alphabet `k`. Other receivers' inputs
/// are pinned to 0 and their outputs summed out.
pub fn bias_xi(table: &BoxTable, receiver: usize, b_vector: &[bool]) -> Result<f64> {
    let k = b_vector.len();
    let ones: Vec<usize> = (0..k).filter(|&i| b_vector[i]).collect();
    if ones.len() != 1 {
        return Err(IcError::InvalidArgument("b_vector must be one-hot".into()));
    }
    let l = ones[0];
    if receiver == 0 || receiver >= table.num_parties() {
        return Err(IcError::InvalidArgument(format!("receiver index {receiver}")));
    }
    let alice_inputs = 1usize << (k - 1);
    if table.parties[0].0 != alice_inputs {
        return Err(IcError::DimensionMismatch(format!(
            "Alice alphabet {} does not match k={k}",
            table.parties[0].0
        )));
    }
    if table.parties[receiver].0 != k {
        return Err(IcError::DimensionMismatch(format!(
            "receiver alphabet {} does not match k={k}",
            table.parties[receiver].0
        )));
    }
    if table.parties[0].1 != 2 || table.parties[receiver].1 != 2 {
        return Err(IcError::DimensionMismatch("bias needs binary outputs".into()));
    }
    let comp: Vec<usize> = (0..table.num_parties())
        .filter(|&i| i != 0 && i != receiver)
        .collect();
    let comp_inputs = vec![0usize; comp.len()];
    let pair = table.marginal(&[0, receiver], &comp_inputs)?;
    let mut xi = 0.0;
    for alpha in 0..alice_inputs {
        // alpha_l for l >= 1 is bit (l-1) of the input integer; alpha_0 = 0.
        let target = if l == 0 { 0 } else { alpha >> (l - 1) & 1 };
        let mut diff = 0.0;
        for a_out in 0..2usize {
            for b_out in 0..2usize {
                let p = pair.prob(&[alpha, l], &[a_out, b_out]);
                if a_out ^ b_out == target {
                    diff += p;
                } else {
                    diff -= p;
                }
            }
        }
        xi += diff;
    }
    Ok(xi / alice_inputs as f64)
}

/// One-hot vector with a single set bit at `l`.
pub fn one_hot(k: usize, l: usize) -> Vec<bool> {
    let mut v = vec![false; k];
    v[l] = true;
    v
}
