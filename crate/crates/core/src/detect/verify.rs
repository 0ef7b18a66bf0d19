//! Match-count threshold from the exact binomial tail.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bits::Bits;
use crate::error::{invalid, Result};

/// Smallest τ with Σ_{j≥τ} C(N, j) ≤ fpr·2^N. Returns `n_bits + 1` when
/// even the all-match event is too likely.
pub fn threshold(n_bits: usize, fpr_target: f64) -> Result<usize> {
    if !(fpr_target > 0.0 && fpr_target < 1.0) {
        return invalid(format!("fpr target {fpr_target} outside (0, 1)"));
    }
    let fpr = BigRational::from_float(fpr_target).expect("finite");
    let bound = fpr * BigRational::from_integer(BigInt::one() << n_bits);
    // walk down from j = N, accumulating C(N, j)
    let mut tail = BigInt::zero();
    let mut c = BigInt::one();
    let mut tau = n_bits + 1;
    for j in (0..=n_bits).rev() {
        tail += &c;
        if BigRational::from_integer(tail.clone()) > bound {
            break;
        }
        tau = j;
        // C(N, j-1) = C(N, j)·j / (N − j + 1)
        if j > 0 {
            c = c * BigInt::from(j) / BigInt::from(n_bits - j + 1);
        }
    }
    Ok(tau)
}

/// True iff the number of agreeing bits reaches the threshold.
pub fn verify(corrected: &Bits, reference: &Bits, fpr_target: f64) -> Result<bool> {
    if corrected.len() != reference.len() {
        return invalid(format!("length mismatch: {} vs {}", corrected.len(), reference.len()));
    }
    let n = reference.len();
    let matches = n - corrected.hamming(reference);
    Ok(matches >= threshold(n, fpr_target)?)
}
