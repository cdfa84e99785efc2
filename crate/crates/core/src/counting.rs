//! Closed-form counts of environment components.

use crate::{Error, Result};

/// Qubit connectivity assumed for CNOT placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    AllToAll,
    Linear,
}

/// Number of components that affect the cost of a `k`-qubit gate:
/// `(4^k − 1)² + 1`.
pub fn count_relevant(k: u32) -> u128 {
    let b = 4u128.pow(k) - 1;
    b * b + 1
}

fn binomial(n: u32, r: u32) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Components reachable by Clifford probes with at most `t` CNOTs on a fully
/// connected `k`-qubit gate.
///
/// `t = 0` gives `10^k`; otherwise
/// `2 + Σ_{l=0}^{t} 6^l C(k,l) (10^{k−l} − 2^{1−l})`, evaluated in integers as
/// `2 + Σ_l [6^l C(k,l) 10^{k−l} − 2·3^l C(k,l)]` and capped at
/// [`count_relevant`].
pub fn count_cnot_limited(k: u32, t: u32, connectivity: Connectivity) -> Result<u128> {
    if connectivity != Connectivity::AllToAll {
        return Err(Error::Unsupported("CNOT-limited counts need all-to-all connectivity".into()));
    }
    if t == 0 {
        return Ok(10u128.pow(k));
    }
    let mut total: i128 = 2;
    for l in 0..=t.min(k) {
        let c = binomial(k, l) as i128;
        total += 6i128.pow(l) * c * 10i128.pow(k - l) - 2 * 3i128.pow(l) * c;
    }
    Ok((total as u128).min(count_relevant(k)))
}

/// Sequential CNOTs needed so that Clifford probes reach every component:
/// `k` with all-to-all connectivity, `2k − 2` on a line. At `k = 1` these
/// give 1 and 0 although a single qubit needs none; the values are returned
/// as the formula states.
pub fn min_cnot_for_full_tomography(k: u32, connectivity: Connectivity) -> Result<u32> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(match connectivity {
        Connectivity::AllToAll => k,
        Connectivity::Linear => 2 * k - 2,
    })
}
