//! Exact beta-expansion arithmetic.
//!
//! Betas are quadratic numbers `(a + b sqrt(d)) / c` or plain rationals, so
//! greedy-expansion digits of 1 are decided by exact sign tests instead of
//! floating point. A finite greedy expansion `d_1 .. d_m` is replaced by the
//! quasi-greedy period `(d_1 .. d_{m-1} (d_m - 1))^inf`; otherwise digits are
//! generated up to a horizon with eventual-period detection on the exact
//! remainder state.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::words::Symbol;
use crate::Result;

/// Exact element of `Q(sqrt(d))`: the value `a + b sqrt(d)`.
///
/// `d` is a non-square nonnegative integer; perfect squares are folded into
/// the rational part on construction, so `b != 0` implies `sqrt(d)` is
/// irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadReal {
    a: BigRational,
    b: BigRational,
    d: u64,
}

fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

impl QuadReal {
    pub fn from_rational(a: BigRational) -> Self {
        QuadReal { a, b: BigRational::zero(), d: 0 }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `(a + b sqrt(d))` with perfect-square `d` folded away.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Self {
        let r = isqrt(d);
        if r * r == d {
            QuadReal {
                a: a + &b * BigRational::from_integer(BigInt::from(r)),
                b: BigRational::zero(),
                d: 0,
            }
        } else {
            let (b, d) = if b.is_zero() { (BigRational::zero(), 0) } else { (b, d) };
            QuadReal { a, b, d }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Sign of the value: -1, 0, or 1. Exact.
    pub fn sign(&self) -> i32 {
        if self.b.is_zero() {
            return match self.a.cmp(&BigRational::zero()) {
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => 1,
            };
        }
        if self.a.is_zero() {
            return if self.b.is_positive() { 1 } else { -1 };
        }
        let sa = self.a.is_positive();
        let sb = self.b.is_positive();
        if sa == sb {
            return if sa { 1 } else { -1 };
        }
        // Opposite signs: compare a^2 with b^2 d.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        match a2.cmp(&b2d) {
            std::cmp::Ordering::Greater => {
                if sa {
                    1
                } else {
                    -1
                }
            }
            std::cmp::Ordering::Less => {
                if sb {
                    1
                } else {
                    -1
                }
            }
            std::cmp::Ordering::Equal => 0,
        }
    }

    fn sub_integer(&self, k: &BigInt) -> QuadReal {
        QuadReal {
            a: &self.a - BigRational::from_integer(k.clone()),
            b: self.b.clone(),
            d: self.d,
        }
    }

    /// Product; both operands must live in the same quadratic field.
    pub fn mul(&self, other: &QuadReal) -> QuadReal {
        assert!(
            self.d == other.d || self.b.is_zero() || other.b.is_zero(),
            "mixed quadratic fields"
        );
        let d = if self.b.is_zero() { other.d } else { self.d };
        let df = BigRational::from_integer(BigInt::from(d));
        QuadReal::new(
            &self.a * &other.a + &self.b * &other.b * df,
            &self.a * &other.b + &self.b * &other.a,
            d,
        )
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        let mut k = BigInt::from(self.to_f64().floor() as i64);
        // Correct the float estimate with exact comparisons.
        while self.sub_integer(&k).sign() < 0 {
            k -= 1;
        }
        loop {
            let next = &k + 1;
            if self.sub_integer(&next).sign() >= 0 {
                k = next;
            } else {
                break;
            }
        }
        k
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }
}

/// Parses a beta description: a decimal string (exact rational) or the
/// symbolic form `(a+sqrt b)/c` (parentheses and `/c` optional, `a-sqrt b`
/// accepted).
pub fn parse_beta(s: &str) -> Result<QuadReal> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::InvalidInput("empty beta".into()));
    }
    let bad = |_: std::num::ParseIntError| Error::InvalidInput(format!("unparsable beta {s:?}"));

    // Plain decimal.
    if compact.chars().all(|c| c.is_ascii_digit() || c == '.' || c == '-') {
        return parse_decimal(&compact);
    }

    // Split a trailing "/c".
    let (head, den) = match compact.rsplit_once('/') {
        Some((h, c)) => {
            let c: i64 = c.parse().map_err(bad)?;
            if c <= 0 {
                return Err(Error::InvalidInput(format!("beta denominator {c} must be > 0")));
            }
            (h.to_string(), c)
        }
        None => (compact.clone(), 1),
    };
    let head = head.strip_prefix('(').unwrap_or(&head);
    let head = head.strip_suffix(')').unwrap_or(head);

    // head is "A+sqrtB", "A-sqrtB", "sqrtB", or "A".
    let (a_str, sign, d_str) = if let Some(i) = head.find("+sqrt") {
        (&head[..i], 1i64, &head[i + 5..])
    } else if let Some(i) = head.find("-sqrt") {
        (&head[..i], -1i64, &head[i + 5..])
    } else if let Some(rest) = head.strip_prefix("sqrt") {
        ("", 1i64, rest)
    } else {
        (head, 0i64, "")
    };
    let a: i64 = if a_str.is_empty() { 0 } else { a_str.parse().map_err(bad)? };
    let denom = BigRational::from_integer(BigInt::from(den));
    if sign == 0 {
        return Ok(QuadReal::from_rational(BigRational::from_integer(BigInt::from(a)) / denom));
    }
    let d: u64 = d_str.parse().map_err(bad)?;
    Ok(QuadReal::new(
        BigRational::from_integer(BigInt::from(a)) / &denom,
        BigRational::from_integer(BigInt::from(sign)) / denom,
        d,
    ))
}

fn parse_decimal(s: &str) -> Result<QuadReal> {
    let bad = || Error::InvalidInput(format!("unparsable beta {s:?}"));
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if frac_part.contains('-') || int_part.matches('-').count() > 1 {
        return Err(bad());
    }
    let digits: String = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(QuadReal::from_rational(BigRational::new(num, den)))
}

/// Quasi-greedy expansion of 1 in base beta.
#[derive(Debug, Clone)]
pub struct BetaExpansion {
    beta: QuadReal,
    beta_f64: f64,
    /// Number of symbols `ceil(beta)` of the shift alphabet.
    alphabet: u32,
    /// Generated digit prefix (always at least `horizon` long when the
    /// expansion is periodic, exactly `horizon` otherwise).
    digits: Vec<Symbol>,
    /// `(preperiod, period)` when the expansion is eventually periodic.
    period: Option<(usize, usize)>,
    horizon: usize,
}

impl BetaExpansion {
    /// Computes the expansion with exact arithmetic.
    ///
    /// The greedy expansion of 1 is generated; if it terminates (`x_m = 0`)
    /// the quasi-greedy convention replaces it by the periodic word
    /// `(d_1 .. d_{m-1} (d_m - 1))^inf`. Otherwise digits are emitted until
    /// either the remainder state repeats (eventual period) or `horizon`
    /// digits exist.
    pub fn compute(beta: QuadReal, horizon: usize) -> Result<Self> {
        let one = QuadReal::from_integer(1);
        if beta.sub_integer(&BigInt::one()).sign() <= 0 {
            return Err(Error::InvalidInput("beta must exceed 1".into()));
        }
        let beta_f64 = beta.to_f64();
        if horizon == 0 || horizon > 100_000 {
            return Err(Error::InvalidInput(format!("beta horizon {horizon} outside 1..=100000")));
        }
        let floor_beta = beta.floor();
        let is_integer = beta.sub_integer(&floor_beta).is_zero();
        let alphabet_big = if is_integer { floor_beta.clone() } else { &floor_beta + 1 };
        let alphabet = alphabet_big
            .to_u32()
            .filter(|&p| (2..=65_536).contains(&p))
            .ok_or_else(|| Error::InvalidInput("beta alphabet outside 2..=65536".into()))?;

        // Greedy digits of 1: x_0 = 1, d_j = floor(beta x_{j-1}),
        // x_j = beta x_{j-1} - d_j.
        let mut digits: Vec<Symbol> = Vec::new();
        let mut x = one;
        let mut seen: BTreeMap<(BigRational, BigRational), usize> = BTreeMap::new();
        let mut period = None;
        for j in 0..horizon {
            let bx = beta.mul(&x);
            let d = bx.floor();
            let digit = d
                .to_u32()
                .filter(|&d| d < alphabet || (j == 0 && is_integer))
                .ok_or_else(|| Error::InvalidInput("greedy digit left the alphabet".into()))?;
            digits.push(digit as Symbol);
            x = bx.sub_integer(&d);
            if x.is_zero() {
                // Finite greedy expansion: switch to the quasi-greedy period.
                let m = digits.len();
                digits[m - 1] -= 1;
                period = Some((0, m));
                break;
            }
            if let Some(&start) = seen.get(&(x.a.clone(), x.b.clone())) {
                period = Some((start + 1, j - start));
                break;
            }
            seen.insert((x.a.clone(), x.b.clone()), j);
        }

        let mut exp =
            BetaExpansion { beta, beta_f64, alphabet, digits, period, horizon };
        if period.is_some() {
            exp.extend_to(horizon);
        }
        debug_assert!(exp.digits.iter().all(|&d| (d as u32) < exp.alphabet));
        Ok(exp)
    }

    fn extend_to(&mut self, len: usize) {
        if let Some((pre, per)) = self.period {
            while self.digits.len() < len {
                let i = self.digits.len();
                let src = pre + (i - pre) % per;
                self.digits.push(self.digits[src]);
            }
        }
    }

    pub fn beta(&self) -> &QuadReal {
        &self.beta
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta_f64
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn period(&self) -> Option<(usize, usize)> {
        self.period
    }

    /// Digit `i` (0-based) of the quasi-greedy expansion.
    pub fn digit(&self, i: usize) -> Result<Symbol> {
        if i < self.digits.len() {
            return Ok(self.digits[i]);
        }
        match self.period {
            Some((pre, per)) => Ok(self.digits[pre + (i - pre) % per]),
            None => Err(Error::PrecisionExhausted(format!(
                "digit {i} beyond the generated horizon {}",
                self.digits.len()
            ))),
        }
    }

    /// First `n` digits.
    pub fn prefix(&self, n: usize) -> Result<Vec<Symbol>> {
        (0..n).map(|i| self.digit(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> QuadReal {
        parse_beta("(1+sqrt5)/2").unwrap()
    }

    #[test]
    fn parse_forms() {
        assert!((golden().to_f64() - 1.618033988749895).abs() < 1e-12);
        assert!((parse_beta("2").unwrap().to_f64() - 2.0).abs() < 1e-15);
        assert!((parse_beta("1.8").unwrap().to_f64() - 1.8).abs() < 1e-15);
        assert!((parse_beta("sqrt2").unwrap().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((parse_beta("(3-sqrt2)/1").unwrap().to_f64() - (3.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!(parse_beta("nonsense").is_err());
    }

    #[test]
    fn quadratic_floor_and_sign() {
        let g = golden();
        assert_eq!(g.floor(), BigInt::from(1));
        let g2 = g.mul(&g); // golden ratio squared = golden + 1 in Q(sqrt 5)
        assert_eq!(g2.floor(), BigInt::from(2));
        assert_eq!(g.sub_integer(&BigInt::from(2)).sign(), -1);
        assert_eq!(g.sub_integer(&BigInt::from(1)).sign(), 1);
    }

    #[test]
    fn golden_mean_expansion_is_10_periodic() {
        // Greedy expansion of 1 is "11" (finite); quasi-greedy is (10)^inf.
        let e = BetaExpansion::compute(golden(), 32).unwrap();
        assert_eq!(e.alphabet(), 2);
        assert_eq!(e.period(), Some((0, 2)));
        let p = e.prefix(8).unwrap();
        assert_eq!(p, vec![1, 0, 1, 0, 1, 0, 1, 0]);
        // Period gives digits past the horizon too.
        assert_eq!(e.digit(100).unwrap(), 1);
        assert_eq!(e.digit(101).unwrap(), 0);
    }

    #[test]
    fn integer_beta_expansion() {
        // Greedy expansion of 1 in base 2 is the single digit 2; the
        // quasi-greedy convention yields (1)^inf and the full 2-shift.
        let e = BetaExpansion::compute(parse_beta("2").unwrap(), 16).unwrap();
        assert_eq!(e.alphabet(), 2);
        assert_eq!(e.period(), Some((0, 1)));
        assert_eq!(e.prefix(4).unwrap(), vec![1, 1, 1, 1]);
        let e3 = BetaExpansion::compute(parse_beta("3").unwrap(), 16).unwrap();
        assert_eq!(e3.alphabet(), 3);
        assert_eq!(e3.prefix(3).unwrap(), vec![2, 2, 2]);
    }

    #[test]
    fn rational_beta_expansion_digits() {
        // beta = 3/2: d1 = floor(1.5) = 1, x1 = 1/2; d2 = floor(3/4) = 0,
        // x2 = 3/4; d3 = floor(9/8) = 1, x3 = 1/8; ...
        let e = BetaExpansion::compute(parse_beta("1.5").unwrap(), 8).unwrap();
        assert_eq!(e.alphabet(), 2);
        assert_eq!(&e.prefix(4).unwrap(), &[1, 0, 1, 0]);
    }

    #[test]
    fn suffixes_never_exceed_the_expansion() {
        // Defining property of the quasi-greedy word: every suffix is
        // lexicographically <= the word itself.
        for beta in ["(1+sqrt5)/2", "1.8", "sqrt5", "2.5"] {
            let e = BetaExpansion::compute(parse_beta(beta).unwrap(), 64).unwrap();
            let w = e.prefix(48).unwrap();
            for j in 1..24 {
                let suffix = &w[j..];
                let head = &w[..suffix.len()];
                assert!(suffix <= head, "beta {beta} suffix {j} exceeds the expansion");
            }
        }
    }

    #[test]
    fn horizon_exhaustion_is_reported() {
        // sqrt(2)+... pick a beta with (likely) aperiodic expansion: 1+sqrt2
        // has greedy digits that stay aperiodic within small horizons.
        let e = BetaExpansion::compute(parse_beta("(3+sqrt2)/2").unwrap(), 12).unwrap();
        if e.period().is_none() {
            assert!(matches!(e.digit(500), Err(Error::PrecisionExhausted(_))));
        }
    }

    #[test]
    fn beta_must_exceed_one() {
        assert!(BetaExpansion::compute(parse_beta("1").unwrap(), 8).is_err());
        assert!(BetaExpansion::compute(parse_beta("0.7").unwrap(), 8).is_err());
    }
}
