//! Posterior means by full enumeration of topic assignments, for tiny corpora.

use super::sampler::{log_joint, SamplerState};
use super::{LdaConfig, LdaError};
use crate::vectorize::DocTermMatrix;

/// Largest number of assignment vectors [`exact_posterior`] will visit.
pub const MAX_ASSIGNMENTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    pub topics: usize,
    pub n_terms: usize,
    /// Row-major D × K posterior mean of the document-topic estimator.
    pub theta: Vec<f64>,
    /// Row-major K × V posterior mean of the topic-word estimator.
    pub phi: Vec<f64>,
    /// `p(w)`: the sum of `p(w, z)` over every assignment vector.
    pub evidence: f64,
    /// Sum of the normalized weights; 1 up to rounding.
    pub weight_total: f64,
    pub assignments: u64,
}

impl ExactPosterior {
    pub fn theta_row(&self, d: usize) -> &[f64] {
        &self.theta[d * self.topics..(d + 1) * self.topics]
    }

    pub fn phi_row(&self, k: usize) -> &[f64] {
        &self.phi[k * self.n_terms..(k + 1) * self.n_terms]
    }
}

/// Weights every assignment vector by its collapsed joint probability and
/// averages the smoothed count estimators under those weights.
pub fn exact_posterior(matrix: &DocTermMatrix, config: &LdaConfig) -> Result<ExactPosterior, LdaError> {
    config.validate()?;
    let k = config.topics;
    let n_tokens = matrix.total_tokens();
    if n_tokens == 0 {
        return Err(LdaError::EmptyMatrix);
    }
    let total = (k as u64)
        .checked_pow(u32::try_from(n_tokens).unwrap_or(u32::MAX))
        .filter(|&n| n <= MAX_ASSIGNMENTS)
        .ok_or(LdaError::TooLarge {
            tokens: n_tokens,
            topics: k,
        })?;

    let lengths: Vec<usize> = (0..matrix.n_docs())
        .map(|d| matrix.row_total(d) as usize)
        .collect();
    let n_docs = matrix.n_docs();
    let n_terms = matrix.n_terms();
    let mut flat = vec![0u32; n_tokens as usize];

    // Two passes: the first finds the largest log weight so the second can
    // exponentiate without underflow.
    let mut max = f64::NEG_INFINITY;
    for _ in 0..total {
        let state = SamplerState::from_assignments(matrix, split(&flat, &lengths), config)?;
        max = max.max(log_joint(&state, config));
        advance(&mut flat, k as u32);
    }

    let mut theta = vec![0.0; n_docs * k];
    let mut phi = vec![0.0; k * n_terms];
    let mut scaled_sum = 0.0;
    let mut est_theta = vec![0.0; n_docs * k];
    let mut est_phi = vec![0.0; k * n_terms];
    for _ in 0..total {
        let state = SamplerState::from_assignments(matrix, split(&flat, &lengths), config)?;
        let w = (log_joint(&state, config) - max).exp();
        scaled_sum += w;
        est_theta.iter_mut().for_each(|x| *x = 0.0);
        est_phi.iter_mut().for_each(|x| *x = 0.0);
        state.accumulate(config, &mut est_theta, &mut est_phi);
        theta.iter_mut().zip(&est_theta).for_each(|(t, e)| *t += w * e);
        phi.iter_mut().zip(&est_phi).for_each(|(p, e)| *p += w * e);
        advance(&mut flat, k as u32);
    }
    theta.iter_mut().for_each(|t| *t /= scaled_sum);
    phi.iter_mut().for_each(|p| *p /= scaled_sum);
    // Normalized weights, summed a second time as a check on the arithmetic.
    let mut weight_total = 0.0;
    for _ in 0..total {
        let state = SamplerState::from_assignments(matrix, split(&flat, &lengths), config)?;
        weight_total += (log_joint(&state, config) - max).exp() / scaled_sum;
        advance(&mut flat, k as u32);
    }

    Ok(ExactPosterior {
        topics: k,
        n_terms,
        theta,
        phi,
        evidence: max.exp() * scaled_sum,
        weight_total,
        assignments: total,
    })
}

fn split(flat: &[u32], lengths: &[usize]) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(lengths.len());
    let mut at = 0;
    for &n in lengths {
        out.push(flat[at..at + n].to_vec());
        at += n;
    }
    out
}

/// Odometer increment in base `k`.
fn advance(digits: &mut [u32], k: u32) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < k {
            return;
        }
        *d = 0;
    }
}
