//! Exact discrete Shannon quantities on small dense joint distributions,
//! the binary symmetric channel, a randomized probe of the channel
//! attenuation lemma, and the BB84 information-splitting identity.
//!
//! All logarithms are base 2 and `0 log 0 = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{IcError, Result};

const TOTAL_TOL: f64 = 1e-12;

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Dense joint probability table over named finite variables.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    names: Vec<String>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(names: Vec<String>, sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if names.len() != sizes.len() {
            return Err(IcError::DimensionMismatch("names vs sizes".into()));
        }
        let expected: usize = sizes.iter().product();
        if probs.len() != expected {
            return Err(IcError::DimensionMismatch(format!(
                "table has {} entries, expected {expected}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(IcError::Invariant("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOTAL_TOL {
            return Err(IcError::Invariant(format!("total {total} != 1")));
        }
        Ok(Self { names, sizes, probs })
    }

    /// Build by summing a closure over all assignments.
    pub fn from_fn(
        names: Vec<String>,
        sizes: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let total: usize = sizes.iter().product();
        let mut probs = Vec::with_capacity(total);
        let mut assignment = vec![0usize; sizes.len()];
        for idx in 0..total {
            decode(idx, &sizes, &mut assignment);
            probs.push(f(&assignment));
        }
        Self::new(names, sizes, probs)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| IcError::UnknownName(name.to_string()))
    }

    fn var_indices(&self, vars: &[&str]) -> Result<Vec<usize>> {
        vars.iter().map(|v| self.var_index(v)).collect()
    }

    /// Marginal distribution over the named variables, in the given order.
    pub fn marginal(&self, vars: &[&str]) -> Result<JointDistribution> {
        let keep = self.var_indices(vars)?;
        let keep_sizes: Vec<usize> = keep.iter().map(|&i| self.sizes[i]).collect();
        let out_total: usize = keep_sizes.iter().product();
        let mut out = vec![0.0; out_total];
        let mut assignment = vec![0usize; self.sizes.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode(idx, &self.sizes, &mut assignment);
            let digits: Vec<usize> = keep.iter().map(|&i| assignment[i]).collect();
            out[encode(&digits, &keep_sizes)] += p;
        }
        JointDistribution::new(
            vars.iter().map(|s| s.to_string()).collect(),
            keep_sizes,
            out,
        )
    }

    /// Shannon entropy of the whole table, in bits.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum()
    }

    /// Entropy of a marginal.
    pub fn entropy_of(&self, vars: &[&str]) -> Result<f64> {
        Ok(self.marginal(vars)?.entropy())
    }

    /// `I(A;B) = H(A) + H(B) - H(A,B)`, clamped at zero from below.
    pub fn mutual_information(&self, vars_a: &[&str], vars_b: &[&str]) -> Result<f64> {
        let mut ab: Vec<&str> = vars_a.to_vec();
        ab.extend_from_slice(vars_b);
        let mi = self.entropy_of(vars_a)? + self.entropy_of(vars_b)? - self.entropy_of(&ab)?;
        debug_assert!(mi >= -1e-9, "mutual information {mi}");
        Ok(mi.max(0.0))
    }

    /// `I(A;B|Q) = sum_q P(q) I(A;B | Q=q)`.
    pub fn conditional_mutual_information(
        &self,
        vars_a: &[&str],
        vars_b: &[&str],
        cond: &[&str],
    ) -> Result<f64> {
        let mut all: Vec<&str> = vars_a.to_vec();
        all.extend_from_slice(vars_b);
        all.extend_from_slice(cond);
        let joint = self.marginal(&all)?;
        let cond_idx: Vec<usize> = (vars_a.len() + vars_b.len()..all.len()).collect();
        let cond_sizes: Vec<usize> = cond_idx.iter().map(|&i| joint.sizes[i]).collect();
        let cond_total: usize = cond_sizes.iter().product();
        let mut out = 0.0;
        let mut assignment = vec![0usize; joint.sizes.len()];
        for q in 0..cond_total {
            let mut cond_digits = vec![0usize; cond_idx.len()];
            decode(q, &cond_sizes, &mut cond_digits);
            // Slice of the joint with Q pinned.
            let mut slice = Vec::new();
            let mut weight = 0.0;
            for (idx, &p) in joint.probs.iter().enumerate() {
                decode(idx, &joint.sizes, &mut assignment);
                if cond_idx
                    .iter()
                    .zip(&cond_digits)
                    .all(|(&i, &d)| assignment[i] == d)
                {
                    slice.push(p);
                    weight += p;
                }
            }
            if weight <= 0.0 {
                continue;
            }
            for p in &mut slice {
                *p /= weight;
            }
            let reduced = JointDistribution::new(
                all[..vars_a.len() + vars_b.len()]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                joint.sizes[..vars_a.len() + vars_b.len()].to_vec(),
                slice,
            )?;
            out += weight * reduced.mutual_information(vars_a, vars_b)?;
        }
        Ok(out)
    }
}

fn encode(digits: &[usize], sizes: &[usize]) -> usize {
    let mut idx = 0;
    for (d, s) in digits.iter().zip(sizes) {
        idx = idx * s + d;
    }
    idx
}

fn decode(mut idx: usize, sizes: &[usize], out: &mut [usize]) {
    for i in (0..sizes.len()).rev() {
        out[i] = idx % sizes[i];
        idx /= sizes[i];
    }
}

/// Binary symmetric channel with flip probability `(1 - xi) / 2`.
#[derive(Debug, Clone, Copy)]
pub struct BscChannel {
    xi: f64,
}

impl BscChannel {
    pub fn new(xi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&xi) {
            return Err(IcError::InvalidArgument(format!("bias {xi} outside [-1,1]")));
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn flip_probability(&self) -> f64 {
        (1.0 - self.xi) / 2.0
    }
}

/// Append `new_var = BSC(var)`, conditionally independent of everything else
/// given `var`.
pub fn bsc_apply(
    dist: &JointDistribution,
    var: &str,
    channel: &BscChannel,
    new_var: &str,
) -> Result<JointDistribution> {
    let vi = dist.var_index(var)?;
    if dist.sizes[vi] != 2 {
        return Err(IcError::InvalidArgument(format!("{var} is not binary")));
    }
    let mut names = dist.names.clone();
    names.push(new_var.to_string());
    let mut sizes = dist.sizes.clone();
    sizes.push(2);
    let flip = channel.flip_probability();
    let mut probs = Vec::with_capacity(dist.probs.len() * 2);
    let mut assignment = vec![0usize; dist.sizes.len()];
    for (idx, &p) in dist.probs.iter().enumerate() {
        decode(idx, &dist.sizes, &mut assignment);
        let v = assignment[vi];
        for z in 0..2 {
            probs.push(p * if z == v { 1.0 - flip } else { flip });
        }
    }
    JointDistribution::new(names, sizes, probs)
}

/// Closed-form BB84 split: `(1 - h(Q), h(Q))`.
pub fn bb84_split(q: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&q) {
        return Err(IcError::InvalidArgument(format!("QBER {q} outside [0, 1/2]")));
    }
    let i2 = binary_entropy(q);
    Ok((1.0 - i2, i2))
}

/// One extremal case found by [`es_ratio_probe`].
#[derive(Debug, Clone, Serialize)]
pub struct EsProbeCase {
    pub trial: u64,
    pub xi: f64,
    pub ratio: f64,
    pub ratio_over_xi2: f64,
}

/// Report of a randomized channel-attenuation probe.
#[derive(Debug, Clone, Serialize)]
pub struct EsProbeReport {
    pub max_ratio: f64,
    pub max_ratio_over_xi2: f64,
    pub arg_case: Option<EsProbeCase>,
    pub trials: u64,
    pub skipped_vacuous: u64,
}

/// Randomized verification of `I(X;Z|Q) <= xi^2 I(X;Y|Q)` for `Z = BSC(Y)`.
///
/// Samples `trials` random joints over `(Q, X, Y)` with the given alphabet
/// sizes (`Y` binary), pushes `Y` through the channel for every bias in
/// `xi_grid`, and reports the maximum of `ratio / xi^2`. Denominators below
/// `1e-9` are counted as vacuous and skipped. Trial seeds are derived as
/// `seed ^ trial_index`, so any evaluation order gives the same report.
pub fn es_ratio_probe(
    trials: u64,
    seed: u64,
    q_size: usize,
    x_size: usize,
    xi_grid: &[f64],
) -> Result<EsProbeReport> {
    if trials < 1 {
        return Err(IcError::InvalidArgument("need at least one trial".into()));
    }
    if q_size < 1 || q_size > 4 || x_size < 2 || x_size > 4 {
        return Err(IcError::InvalidArgument(
            "probe alphabets limited to Q in 1..=4, X in 2..=4".into(),
        ));
    }
    let mut report = EsProbeReport {
        max_ratio: 0.0,
        max_ratio_over_xi2: 0.0,
        arg_case: None,
        trials,
        skipped_vacuous: 0,
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
        let sizes = vec![q_size, x_size, 2];
        let total: usize = sizes.iter().product();
        // Exponential weights normalize to a Dirichlet(1,..,1) sample.
        let raw: Vec<f64> = (0..total)
            .map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln())
            .collect();
        let norm: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|w| w / norm).collect();
        let joint = JointDistribution::new(
            vec!["q".into(), "x".into(), "y".into()],
            sizes,
            probs,
        )?;
        let denom = joint.conditional_mutual_information(&["x"], &["y"], &["q"])?;
        if denom <= 1e-9 {
            report.skipped_vacuous += 1;
            continue;
        }
        for &xi in xi_grid {
            let channel = BscChannel::new(xi)?;
            let with_z = bsc_apply(&joint, "y", &channel, "z")?;
            let numer = with_z.conditional_mutual_information(&["x"], &["z"], &["q"])?;
            let ratio = numer / denom;
            report.max_ratio = report.max_ratio.max(ratio);
            let scaled = if xi != 0.0 { ratio / (xi * xi) } else { 0.0 };
            if scaled > report.max_ratio_over_xi2 || report.arg_case.is_none() {
                report.max_ratio_over_xi2 = report.max_ratio_over_xi2.max(scaled);
                if scaled >= report.max_ratio_over_xi2 {
                    report.arg_case = Some(EsProbeCase {
                        trial,
                        xi,
                        ratio,
                        ratio_over_xi2: scaled,
                    });
                }
            }
        }
    }
    Ok(report)
}
