//! Exact combinatorial counting in 128-bit arithmetic.
//!
//! Every function returns `None` on overflow instead of wrapping; callers
//! turn that into their own error. Desk-scale parameters (`n * k <= 64`)
//! never overflow in practice.

/// Binomial coefficient C(n, k).
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Multiply before dividing; the running value stays an exact
        // binomial so the division is always exact.
        acc = acc.checked_mul(n - k + i)? / i;
    }
    Some(acc)
}

/// Multiset coefficient ((n, k)) = C(n + k - 1, k): multisets of size `k`
/// drawn from `n` symbols.
pub fn multichoose(n: u128, k: u128) -> Option<u128> {
    if k == 0 {
        return Some(1);
    }
    if n == 0 {
        return Some(0);
    }
    binomial(n.checked_add(k)? - 1, k)
}

/// Falling factorial n * (n-1) * ... * (n-k+1): ordered k-subsets of `n`
/// symbols. Zero when k > n.
pub fn falling_factorial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.checked_mul(n - j)?;
    }
    Some(acc)
}
