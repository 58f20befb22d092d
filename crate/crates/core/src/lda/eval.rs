//! Model scores: perplexity and UMass topic coherence.

use std::collections::HashSet;

use super::{LdaError, LdaModel};
use crate::vectorize::DocTermMatrix;

fn check_alignment(model: &LdaModel, matrix: &DocTermMatrix) -> Result<(), LdaError> {
    if matrix.n_terms() != model.n_terms() {
        return Err(LdaError::VocabularyMismatch {
            expected: model.n_terms(),
            found: matrix.n_terms(),
        });
    }
    if matrix.n_docs() != model.n_docs() {
        return Err(LdaError::DocumentMismatch {
            expected: model.n_docs(),
            found: matrix.n_docs(),
        });
    }
    Ok(())
}

/// Per-token log-likelihood of `matrix` under the model's θ̂ and φ̂.
pub fn mean_log_likelihood(model: &LdaModel, matrix: &DocTermMatrix) -> Result<f64, LdaError> {
    check_alignment(model, matrix)?;
    let tokens = matrix.total_tokens();
    if tokens == 0 {
        return Err(LdaError::EmptyMatrix);
    }
    let mut ll = 0.0;
    for d in 0..matrix.n_docs() {
        let theta = model.theta_row(d);
        for &(w, c) in matrix.row(d) {
            let p: f64 = theta
                .iter()
                .enumerate()
                .map(|(k, t)| t * model.phi_row(k)[w])
                .sum();
            ll += f64::from(c) * p.ln();
        }
    }
    Ok(ll / tokens as f64)
}

/// `exp(-mean log-likelihood)` over every token of `matrix`.
pub fn perplexity(model: &LdaModel, matrix: &DocTermMatrix) -> Result<f64, LdaError> {
    mean_log_likelihood(model, matrix).map(|ll| (-ll).exp())
}

/// UMass coherence of each topic's `top_m` words.
///
/// For top words ranked `w_1, w_2, ...`, sums `ln((D(w_i, w_j) + 1) / D(w_j))`
/// over pairs `i < j`, where `D(·)` counts documents containing the word(s).
pub fn coherence_umass(model: &LdaModel, matrix: &DocTermMatrix, top_m: usize) -> Result<Vec<f64>, LdaError> {
    if matrix.n_terms() != model.n_terms() {
        return Err(LdaError::VocabularyMismatch {
            expected: model.n_terms(),
            found: matrix.n_terms(),
        });
    }
    if top_m < 2 || top_m > model.n_terms() {
        return Err(LdaError::InvalidArgument(format!(
            "top_m {top_m} outside 2..={}",
            model.n_terms()
        )));
    }
    let doc_sets: Vec<HashSet<usize>> = matrix
        .rows()
        .iter()
        .map(|row| row.iter().map(|&(t, _)| t).collect())
        .collect();
    let df = matrix.doc_frequencies();
    (0..model.topics())
        .map(|k| {
            let top = model.top_word_indices(k, top_m);
            let mut score = 0.0;
            for j in 1..top.len() {
                let wj = top[j];
                if df[wj] == 0 {
                    return Err(LdaError::InvalidArgument(format!(
                        "top word {:?} occurs in no document",
                        model.term(wj)
                    )));
                }
                for &wi in &top[..j] {
                    let co = doc_sets
                        .iter()
                        .filter(|s| s.contains(&wi) && s.contains(&wj))
                        .count();
                    score += ((co as f64 + 1.0) / df[wj] as f64).ln();
                }
            }
            Ok(score)
        })
        .collect()
}
