use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::{LdaConfig, LdaError};
use crate::vectorize::DocTermMatrix;

/// Topic assignments for every token slot plus the count tables they induce.
///
/// Token slots of a document are laid out in term order, each term repeated
/// by its count. The random stream lives in the state so consecutive sweeps
/// continue one seeded sequence.
#[derive(Debug, Clone)]
pub struct SamplerState {
    topics: usize,
    n_terms: usize,
    words: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    n_d: Vec<u32>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

/// Count tables recomputed from assignments alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    pub n_dk: Vec<u32>,
    pub n_kw: Vec<u32>,
    pub n_k: Vec<u32>,
    pub n_d: Vec<u32>,
}

fn expand(matrix: &DocTermMatrix) -> Vec<Vec<u32>> {
    matrix
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .flat_map(|&(t, c)| std::iter::repeat_n(t as u32, c as usize))
                .collect()
        })
        .collect()
}

fn tally(topics: usize, n_terms: usize, words: &[Vec<u32>], z: &[Vec<u32>]) -> CountTables {
    let mut t = CountTables {
        n_dk: vec![0; words.len() * topics],
        n_kw: vec![0; topics * n_terms],
        n_k: vec![0; topics],
        n_d: vec![0; words.len()],
    };
    for (d, (ws, zs)) in words.iter().zip(z).enumerate() {
        for (&w, &k) in ws.iter().zip(zs) {
            let (k, w) = (k as usize, w as usize);
            t.n_dk[d * topics + k] += 1;
            t.n_kw[k * n_terms + w] += 1;
            t.n_k[k] += 1;
            t.n_d[d] += 1;
        }
    }
    t
}

/// Unnormalized collapsed conditional for one topic, counts already excluding the slot.
#[inline]
fn topic_weight(n_dk: u32, n_kw: u32, n_k: u32, alpha: f64, beta: f64, v_beta: f64) -> f64 {
    (f64::from(n_dk) + alpha) * (f64::from(n_kw) + beta) / (f64::from(n_k) + v_beta)
}

impl SamplerState {
    /// Uses the given assignments, one vector per document in slot order.
    pub fn from_assignments(
        matrix: &DocTermMatrix,
        z: Vec<Vec<u32>>,
        config: &LdaConfig,
    ) -> Result<Self, LdaError> {
        let words = expand(matrix);
        let k = config.topics;
        if z.len() != words.len()
            || z.iter().zip(&words).any(|(zs, ws)| zs.len() != ws.len())
            || z.iter().flatten().any(|&t| t as usize >= k)
        {
            return Err(LdaError::InvalidArgument(
                "assignments do not match the matrix".into(),
            ));
        }
        let tables = tally(k, matrix.n_terms(), &words, &z);
        Ok(Self {
            topics: k,
            n_terms: matrix.n_terms(),
            words,
            z,
            n_dk: tables.n_dk,
            n_kw: tables.n_kw,
            n_k: tables.n_k,
            n_d: tables.n_d,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            weights: vec![0.0; k],
        })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.words.len()
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn words(&self) -> &[Vec<u32>] {
        &self.words
    }

    pub fn n_dk(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.topics + k]
    }

    pub fn n_kw(&self, k: usize, w: usize) -> u32 {
        self.n_kw[k * self.n_terms + w]
    }

    pub fn n_k(&self, k: usize) -> u32 {
        self.n_k[k]
    }

    pub fn n_d(&self, d: usize) -> u32 {
        self.n_d[d]
    }

    pub fn tables(&self) -> CountTables {
        CountTables {
            n_dk: self.n_dk.clone(),
            n_kw: self.n_kw.clone(),
            n_k: self.n_k.clone(),
            n_d: self.n_d.clone(),
        }
    }

    /// Tallies rebuilt from `z` only.
    pub fn recount(&self) -> CountTables {
        tally(self.topics, self.n_terms, &self.words, &self.z)
    }

    pub fn is_consistent(&self) -> bool {
        self.recount() == self.tables()
    }

    /// Adds the current smoothed estimates into row-major accumulators.
    pub(crate) fn accumulate(&self, config: &LdaConfig, theta: &mut [f64], phi: &mut [f64]) {
        let k = self.topics;
        let k_alpha = k as f64 * config.alpha;
        for d in 0..self.n_docs() {
            let denom = f64::from(self.n_d[d]) + k_alpha;
            for t in 0..k {
                theta[d * k + t] += (f64::from(self.n_dk[d * k + t]) + config.alpha) / denom;
            }
        }
        let v_beta = self.n_terms as f64 * config.beta;
        for t in 0..k {
            let denom = f64::from(self.n_k[t]) + v_beta;
            for w in 0..self.n_terms {
                phi[t * self.n_terms + w] +=
                    (f64::from(self.n_kw[t * self.n_terms + w]) + config.beta) / denom;
            }
        }
    }
}

/// Draws every slot's topic uniformly from the seeded stream.
pub fn init_assignments(matrix: &DocTermMatrix, config: &LdaConfig) -> Result<SamplerState, LdaError> {
    config.validate()?;
    let words = expand(matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let z: Vec<Vec<u32>> = words
        .iter()
        .map(|ws| {
            ws.iter()
                .map(|_| rng.random_range(0..config.topics as u32))
                .collect()
        })
        .collect();
    let mut state = SamplerState::from_assignments(matrix, z, config)?;
    state.rng = rng;
    Ok(state)
}

/// Normalized full conditional of slot `slot` in document `d`, with that
/// slot's own assignment excluded from the counts. Leaves `state` untouched.
pub fn gibbs_conditional(state: &SamplerState, d: usize, slot: usize, config: &LdaConfig) -> Vec<f64> {
    let current = state.z[d][slot] as usize;
    let w = state.words[d][slot] as usize;
    let v_beta = state.n_terms as f64 * config.beta;
    let mut p: Vec<f64> = (0..state.topics)
        .map(|k| {
            let own = u32::from(k == current);
            topic_weight(
                state.n_dk(d, k) - own,
                state.n_kw(k, w) - own,
                state.n_k[k] - own,
                config.alpha,
                config.beta,
                v_beta,
            )
        })
        .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Resamples every slot once, documents in order and slots in order.
pub fn gibbs_sweep(state: &mut SamplerState, config: &LdaConfig) {
    let k_topics = state.topics;
    let n_terms = state.n_terms;
    let v_beta = n_terms as f64 * config.beta;
    for d in 0..state.words.len() {
        for slot in 0..state.words[d].len() {
            let w = state.words[d][slot] as usize;
            let old = state.z[d][slot] as usize;
            state.n_dk[d * k_topics + old] -= 1;
            state.n_kw[old * n_terms + w] -= 1;
            state.n_k[old] -= 1;

            let mut total = 0.0;
            for k in 0..k_topics {
                let p = topic_weight(
                    state.n_dk[d * k_topics + k],
                    state.n_kw[k * n_terms + w],
                    state.n_k[k],
                    config.alpha,
                    config.beta,
                    v_beta,
                );
                state.weights[k] = p;
                total += p;
            }
            let mut u = state.rng.random::<f64>() * total;
            let mut new = k_topics - 1;
            for k in 0..k_topics {
                if u < state.weights[k] {
                    new = k;
                    break;
                }
                u -= state.weights[k];
            }

            state.z[d][slot] = new as u32;
            state.n_dk[d * k_topics + new] += 1;
            state.n_kw[new * n_terms + w] += 1;
            state.n_k[new] += 1;
        }
    }
}

/// `ln p(w | z)` with topic-word distributions integrated out.
pub fn log_likelihood(state: &SamplerState, config: &LdaConfig) -> f64 {
    let v = state.n_terms as f64;
    let beta = config.beta;
    // Zero cells contribute ln Γ(β) - ln Γ(β) = 0 and are skipped.
    let mut ll = state.topics as f64 * ln_gamma(v * beta);
    for k in 0..state.topics {
        for w in 0..state.n_terms {
            let n = state.n_kw(k, w);
            if n > 0 {
                ll += ln_gamma(f64::from(n) + beta) - ln_gamma(beta);
            }
        }
        ll -= ln_gamma(f64::from(state.n_k[k]) + v * beta);
    }
    ll
}

/// `ln p(z)` with document-topic proportions integrated out.
pub fn log_prior(state: &SamplerState, config: &LdaConfig) -> f64 {
    let k = state.topics as f64;
    let alpha = config.alpha;
    let mut lp = state.n_docs() as f64 * (ln_gamma(k * alpha) - k * ln_gamma(alpha));
    for d in 0..state.n_docs() {
        for t in 0..state.topics {
            lp += ln_gamma(f64::from(state.n_dk(d, t)) + alpha);
        }
        lp -= ln_gamma(f64::from(state.n_d[d]) + k * alpha);
    }
    lp
}

/// Collapsed joint `ln p(w, z)`.
pub fn log_joint(state: &SamplerState, config: &LdaConfig) -> f64 {
    log_likelihood(state, config) + log_prior(state, config)
}
