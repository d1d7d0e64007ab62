//! Dense brute-force reference for the information quantities.
//!
//! Materialises the full joint probability array over the observed label
//! sets and takes every marginal by explicit summation. Shares nothing with
//! the sparse path in [`crate::table`] / [`crate::entropy`] beyond the
//! definition of entropy, which is what makes it useful as a check.

use std::collections::BTreeMap;

use thiserror::Error;

/// Largest dense domain `|G| · |T| · |O|` the oracle will materialise.
pub const MAX_DOMAIN: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("dense domain of {0} cells exceeds the oracle limit of 1000000")]
    DomainTooLarge(u128),
    #[error("empty sample")]
    EmptySample,
}

/// The seven entropies `[H_g, H_t, H_o, H_gt, H_go, H_to, H_gto]` in bits.
pub type DenseEntropies = [f64; 7];

fn h(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

pub fn brute_force_entropies<T: Ord>(records: &[[T; 3]]) -> Result<DenseEntropies, OracleError> {
    if records.is_empty() {
        return Err(OracleError::EmptySample);
    }
    let index = |d: usize| {
        let mut labels: BTreeMap<&T, usize> = records.iter().map(|r| (&r[d], 0)).collect();
        for (i, slot) in labels.values_mut().enumerate() {
            *slot = i;
        }
        labels
    };
    let (gi, ti, oi) = (index(0), index(1), index(2));
    let (kg, kt, ko) = (gi.len(), ti.len(), oi.len());
    let domain = kg as u128 * kt as u128 * ko as u128;
    if domain > MAX_DOMAIN {
        return Err(OracleError::DomainTooLarge(domain));
    }

    let at = |g: usize, t: usize, o: usize| (g * kt + t) * ko + o;
    let mut joint = vec![0.0f64; kg * kt * ko];
    let n = records.len() as f64;
    for r in records {
        joint[at(gi[&r[0]], ti[&r[1]], oi[&r[2]])] += 1.0;
    }
    for p in &mut joint {
        *p /= n;
    }

    let mut pg = vec![0.0; kg];
    let mut pt = vec![0.0; kt];
    let mut po = vec![0.0; ko];
    let mut pgt = vec![0.0; kg * kt];
    let mut pgo = vec![0.0; kg * ko];
    let mut pto = vec![0.0; kt * ko];
    for g in 0..kg {
        for t in 0..kt {
            for o in 0..ko {
                let p = joint[at(g, t, o)];
                pg[g] += p;
                pt[t] += p;
                po[o] += p;
                pgt[g * kt + t] += p;
                pgo[g * ko + o] += p;
                pto[t * ko + o] += p;
            }
        }
    }
    Ok([h(&pg), h(&pt), h(&po), h(&pgt), h(&pgo), h(&pto), h(&joint)])
}

/// `H_g + H_t + H_o - H_gt - H_go - H_to + H_gto` from the dense array.
pub fn brute_force_t3<T: Ord>(records: &[[T; 3]]) -> Result<f64, OracleError> {
    let [hg, ht, ho, hgt, hgo, hto, hgto] = brute_force_entropies(records)?;
    Ok(hg + ht + ho - hgt - hgo - hto + hgto)
}

/// Two-way mutual information between dimensions `a` and `b` (0, 1, 2).
pub fn brute_force_mi2<T: Ord>(records: &[[T; 3]], a: usize, b: usize) -> Result<f64, OracleError> {
    let e = brute_force_entropies(records)?;
    let joint = match (a.min(b), a.max(b)) {
        (0, 1) => e[3],
        (0, 2) => e[4],
        (1, 2) => e[5],
        _ => panic!("dimension pair ({a}, {b}) is not two distinct dimensions of 0..3"),
    };
    Ok(e[a] + e[b] - joint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_copy_single() {
        let xor = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]];
        assert_eq!(brute_force_t3(&xor).unwrap(), -1.0);
        let copy = [[0, 0, 0], [1, 1, 1]];
        assert_eq!(brute_force_t3(&copy).unwrap(), 1.0);
        assert_eq!(brute_force_t3(&[["a", "b", "c"]]).unwrap(), 0.0);
        assert_eq!(brute_force_mi2(&xor, 0, 2).unwrap(), 0.0);
        assert_eq!(brute_force_mi2(&copy, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn domain_limit() {
        let records: Vec<[u32; 3]> = (0..101).map(|i| [i, i, i]).collect();
        assert_eq!(brute_force_t3(&records), Err(OracleError::DomainTooLarge(1_030_301)));
        assert_eq!(brute_force_t3::<u8>(&[]), Err(OracleError::EmptySample));
    }
}
