//! Shared numeric helpers: streaming log-sum-exp, compensated sums,
//! medians, bracketed bisection, significant-digit rounding.

/// Streaming log-sum-exp accumulator.
///
/// Terms are supplied as logarithms; the running sum is kept as
/// `max + log(sum of exp(x_i - max))` with Kahan compensation on the scaled
/// sum, so partition sums spanning hundreds of orders of magnitude never
/// leave log space. Merging two accumulators is associative to ~1 ulp.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
    count: u64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0, count: 0 }
    }

    fn add_scaled(&mut self, term: f64) {
        // Kahan step on sum += term.
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Add a term given as `log(value)`.
    pub fn push(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        self.count += 1;
        if log_term <= self.max {
            self.add_scaled((log_term - self.max).exp());
        } else {
            // Rescale the accumulated sum to the new maximum.
            let scale = (self.max - log_term).exp();
            self.sum = self.sum * scale + 1.0;
            self.comp *= scale;
            self.max = log_term;
        }
    }

    /// Add `count` equal terms of value `log_term` each.
    pub fn push_many(&mut self, log_term: f64, count: u64) {
        if count == 0 || log_term == f64::NEG_INFINITY {
            return;
        }
        self.count += count;
        let log_total = log_term + (count as f64).ln();
        if log_total <= self.max {
            self.add_scaled((log_total - self.max).exp());
        } else {
            let scale = (self.max - log_total).exp();
            self.sum = self.sum * scale + 1.0;
            self.comp *= scale;
            self.max = log_total;
        }
    }

    /// Merge another accumulator into this one.
    pub fn merge(&mut self, other: &LogSumExp) {
        if other.count == 0 {
            return;
        }
        self.count += other.count;
        if other.max <= self.max {
            self.add_scaled((other.max - self.max).exp() * other.sum);
        } else {
            let scale = (self.max - other.max).exp();
            self.sum = self.sum * scale + other.sum;
            self.comp *= scale;
            self.max = other.max;
        }
    }

    /// Number of pushed terms.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// `log(sum of exp terms)`; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.count == 0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Median of a slice (average of the two middle values for even lengths).
/// Returns `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median over NaN"));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Index of the first element of the tail window covering the last
/// `ceil(frac * len)` items.
pub fn tail_start(len: usize, frac: f64) -> usize {
    if len == 0 {
        return 0;
    }
    let take = ((len as f64) * frac).ceil() as usize;
    len - take.clamp(1, len)
}

/// Median over the last `ceil(30%)` of the values.
pub fn tail_median(values: &[f64]) -> Option<f64> {
    median(&values[tail_start(values.len(), 0.3)..])
}

/// Bracketed bisection for a decreasing function: finds `s` in `[lo, hi]`
/// with `|f(s)| <= resid_tol` or bracket width below `step_tol`.
///
/// The caller guarantees `f(lo) >= 0 >= f(hi)` up to roundoff; endpoints
/// violating that by more than roundoff indicate a bad bracket and the
/// nearest endpoint is returned.
pub fn bisect_decreasing(
    mut lo: f64,
    mut hi: f64,
    mut f: impl FnMut(f64) -> f64,
    step_tol: f64,
    resid_tol: f64,
    max_iter: usize,
) -> f64 {
    debug_assert!(lo <= hi);
    if f(lo) < 0.0 {
        return lo;
    }
    if f(hi) > 0.0 {
        return hi;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= resid_tol || (hi - lo) <= step_tol {
            return mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Round to `digits` significant decimal digits (report formatting).
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_direct_sum_on_small_values() {
        let xs = [0.3_f64, 1.7, 0.2, 2.5, 0.9];
        let mut acc = LogSumExp::new();
        for &x in &xs {
            acc.push(x.ln());
        }
        let direct: f64 = xs.iter().sum();
        assert!((acc.value() - direct.ln()).abs() < 1e-14);
    }

    #[test]
    fn lse_handles_huge_spread() {
        let mut acc = LogSumExp::new();
        acc.push(-900.0);
        acc.push(-100.0);
        acc.push(-905.0);
        // exp(-900) and exp(-905) are negligible next to exp(-100).
        assert!((acc.value() - (-100.0)).abs() < 1e-12);
    }

    #[test]
    fn lse_merge_agrees_with_sequential() {
        let xs: Vec<f64> = (0..50).map(|i| -3.0 * i as f64).collect();
        let mut whole = LogSumExp::new();
        for &x in &xs {
            whole.push(x);
        }
        let mut left = LogSumExp::new();
        let mut right = LogSumExp::new();
        for &x in &xs[..20] {
            left.push(x);
        }
        for &x in &xs[20..] {
            right.push(x);
        }
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() < 1e-13);
    }

    #[test]
    fn push_many_equals_repeated_push() {
        let mut a = LogSumExp::new();
        let mut b = LogSumExp::new();
        a.push_many(-5.0, 1000);
        for _ in 0..1000 {
            b.push(-5.0);
        }
        assert!((a.value() - b.value()).abs() < 1e-12);
    }

    #[test]
    fn empty_lse_is_neg_infinity() {
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn median_and_tail() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        // last ceil(0.3 * 10) = 3 entries
        assert_eq!(tail_start(10, 0.3), 7);
        assert_eq!(tail_median(&(1..=10).map(f64::from).collect::<Vec<_>>()), Some(9.0));
    }

    #[test]
    fn bisection_finds_root_of_decreasing_function() {
        let root = bisect_decreasing(0.0, 10.0, |s| 3.0 - s, 1e-12, 1e-12, 200);
        assert!((root - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sig_digit_rounding() {
        assert_eq!(round_sig(0.123456789012345, 12), 0.123456789012);
        assert_eq!(round_sig(0.0, 12), 0.0);
    }
}
