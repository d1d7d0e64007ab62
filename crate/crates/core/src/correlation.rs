//! Pearson and Spearman correlation matrices over per-group percent vectors.

use serde::{Deserialize, Serialize};

use crate::decomposition::DecompositionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub pearson: Vec<Vec<f64>>,
    pub spearman: Vec<Vec<f64>>,
    /// Number of groups each vector spans.
    pub n: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation (the `n - 1` factors cancel). Callers guarantee equal lengths ≥ 2 and
/// nonzero variance.
fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    r.clamp(-1.0, 1.0)
}

/// 1-based ranks, ties sharing the average of the positions they span.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn matrix(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = vectors.len();
    let mut m = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson(&vectors[i], &vectors[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Pearson on the raw values and Spearman on average ranks, for every pair
/// of labelled vectors.
pub fn contribution_correlations(vectors: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix, DecompositionError> {
    let n = vectors.first().map_or(0, |(_, v)| v.len());
    if n < 3 {
        return Err(DecompositionError::TooFewGroups(n));
    }
    for (label, v) in vectors {
        if v.len() != n {
            return Err(DecompositionError::LengthMismatch {
                label: label.clone(),
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().all(|&x| x == v[0]) {
            return Err(DecompositionError::DegenerateVariance(label.clone()));
        }
    }
    let raw: Vec<Vec<f64>> = vectors.iter().map(|(_, v)| v.clone()).collect();
    let ranked: Vec<Vec<f64>> = raw.iter().map(|v| average_ranks(v)).collect();
    Ok(CorrelationMatrix {
        labels: vectors.iter().map(|(l, _)| l.clone()).collect(),
        pearson: matrix(&raw),
        spearman: matrix(&ranked),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(vs: &[&[f64]]) -> Vec<(String, Vec<f64>)> {
        vs.iter().enumerate().map(|(i, v)| (format!("v{i}"), v.to_vec())).collect()
    }

    #[test]
    fn self_correlation_is_one() {
        let v: &[f64] = &[3.0, 1.0, 4.0, 1.5, 9.0];
        let m = contribution_correlations(&labelled(&[v, v])).unwrap();
        assert_eq!(m.pearson[0][1], 1.0);
        assert_eq!(m.spearman[0][1], 1.0);
        assert_eq!(m.pearson[0][0], 1.0);
    }

    #[test]
    fn reversed_ranks() {
        let a: &[f64] = &[1.0, 2.0, 3.0, 4.0];
        let b: &[f64] = &[10.0, 5.0, 0.5, -3.0];
        let m = contribution_correlations(&labelled(&[a, b])).unwrap();
        assert_eq!(m.spearman[0][1], -1.0);
        assert!(m.pearson[0][1] < -0.9);
    }

    #[test]
    fn known_pearson_value() {
        // r = 0.8 for these: cov = 2, var x = 2.5, var y = 2.5
        let a: &[f64] = &[1.0, 2.0, 3.0, 4.0, 5.0];
        let b: &[f64] = &[2.0, 1.0, 4.0, 3.0, 5.0];
        let m = contribution_correlations(&labelled(&[a, b])).unwrap();
        assert!((m.pearson[0][1] - 0.8).abs() < 1e-15);
        assert!((m.spearman[0][1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn error_cases() {
        let a: &[f64] = &[1.0, 2.0];
        assert_eq!(
            contribution_correlations(&labelled(&[a, a])).unwrap_err(),
            DecompositionError::TooFewGroups(2)
        );
        let c: &[f64] = &[2.0, 2.0, 2.0];
        let d: &[f64] = &[1.0, 2.0, 3.0];
        assert!(matches!(
            contribution_correlations(&labelled(&[d, c])),
            Err(DecompositionError::DegenerateVariance(l)) if l == "v1"
        ));
        let e: &[f64] = &[1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            contribution_correlations(&labelled(&[d, e])),
            Err(DecompositionError::LengthMismatch { .. })
        ));
    }
}
