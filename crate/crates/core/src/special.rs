//! Scalar special functions: log-gamma, the multivariate gamma, the
//! regularized incomplete beta function and its inverse, and a sign-tracking
//! Pochhammer symbol.
//!
//! Anything that can overflow a double is evaluated in the log domain.

use std::f64::consts::PI;
use std::ops::Mul;
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// A real number stored as `sign * exp(log_abs)`.
///
/// `sign == 0` marks an exact zero; `log_abs` is then meaningless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    pub log_abs: f64,
    pub sign: i8,
}

impl SignedLogValue {
    pub const ZERO: Self = Self { log_abs: f64::NEG_INFINITY, sign: 0 };
    pub const ONE: Self = Self { log_abs: 0.0, sign: 1 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { log_abs: v.abs().ln(), sign: if v > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn recip(self) -> Result<Self> {
        if self.is_zero() {
            return domain("reciprocal of zero");
        }
        Ok(Self { log_abs: -self.log_abs, sign: self.sign })
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }
}

impl Mul for SignedLogValue {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            Self { log_abs: self.log_abs + rhs.log_abs, sign: self.sign * rhs.sign }
        }
    }
}

/// `zeta(k) - 1` for k = 2..=64, index k.
fn zeta_minus_one() -> &'static [f64; 65] {
    static TABLE: OnceLock<[f64; 65]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 65];
        const M: i32 = 64;
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            let kf = k as f64;
            let m = f64::from(M);
            let mut s: f64 = (2..M).rev().map(|n| f64::from(n).powf(-kf)).sum();
            // Euler-Maclaurin tail for n >= M.
            s += m.powf(1.0 - kf) / (kf - 1.0) + 0.5 * m.powf(-kf) + kf * m.powf(-kf - 1.0) / 12.0
                - kf * (kf + 1.0) * (kf + 2.0) * m.powf(-kf - 3.0) / 720.0
                + kf * (kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0) * m.powf(-kf - 5.0) / 30240.0;
            *slot = s;
        }
        t
    })
}

/// ln Γ(1 + eps) for |eps| <= 0.5, via the Taylor series about 1.
fn log_gamma_one_plus(eps: f64) -> f64 {
    let z = zeta_minus_one();
    let mut sum = 0.0;
    let mut pow = -eps;
    for (k, zk) in z.iter().enumerate().skip(2) {
        pow *= -eps;
        let term = zk * pow / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA * eps + (eps - eps.ln_1p()) + sum
}

fn stirling(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in C {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + corr
}

fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        log_gamma_one_plus(x) - x.ln()
    } else if x <= 1.5 {
        log_gamma_one_plus(x - 1.0)
    } else if x <= 2.5 {
        (x - 2.0).ln_1p() + log_gamma_one_plus(x - 2.0)
    } else if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        prod.ln() + log_gamma_unchecked(y)
    } else {
        stirling(x)
    }
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    Ok(log_gamma_unchecked(x))
}

/// ln B(a, b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    check_beta_params(a, b)?;
    Ok(log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b))
}

/// ln Γ_K(N) = ½K(K−1) ln π + Σ_{j<K} ln Γ(N − j), the complex multivariate gamma.
pub fn multivariate_log_gamma(k: usize, n: f64) -> Result<f64> {
    if k == 0 {
        return domain("multivariate_log_gamma requires K >= 1");
    }
    if !(n > (k - 1) as f64) {
        return domain(format!("multivariate_log_gamma requires N > K - 1 (K = {k}, N = {n})"));
    }
    let kf = k as f64;
    let mut s = 0.5 * kf * (kf - 1.0) * PI.ln();
    for j in 0..k {
        s += log_gamma_unchecked(n - j as f64);
    }
    Ok(s)
}

fn check_beta_params(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("beta parameters must be finite and positive, got ({a}, {b})"));
    }
    Ok(())
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const MAX_ITER: usize = 100_000;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::Convergence(format!("incomplete beta continued fraction at x={x}, a={a}, b={b}")))
}

/// Which tail the continued fraction was evaluated on.
enum Tail {
    Lower(f64),
    Upper(f64),
}

/// Log of the tail that converges fastest, either ln I_y(a,b) or ln(1 − I_y(a,b)).
fn log_tail(y: f64, a: f64, b: f64) -> Result<Tail> {
    let lb = log_beta(a, b)?;
    if y < (a + 1.0) / (a + b + 2.0) {
        let front = a * y.ln() + b * (-y).ln_1p() - lb - a.ln();
        Ok(Tail::Lower(front + beta_continued_fraction(y, a, b)?.ln()))
    } else {
        let yc = 1.0 - y;
        let front = b * yc.ln() + a * y.ln() - lb - b.ln();
        Ok(Tail::Upper(front + beta_continued_fraction(yc, b, a)?.ln()))
    }
}

/// I_y(a, b) = B_y(a, b) / B(a, b). `y` is clamped to [0, 1].
pub fn regularized_incomplete_beta(y: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_params(a, b)?;
    if y.is_nan() {
        return domain("incomplete beta argument is NaN");
    }
    let y = y.clamp(0.0, 1.0);
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    Ok(match log_tail(y, a, b)? {
        Tail::Lower(l) => l.exp().min(1.0),
        Tail::Upper(l) => (-l.exp()).ln_1p().exp().clamp(0.0, 1.0),
    })
}

/// ln I_y(a, b), accurate even when I_y underflows a double.
pub fn log_regularized_incomplete_beta(y: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_params(a, b)?;
    if y.is_nan() {
        return domain("incomplete beta argument is NaN");
    }
    let y = y.clamp(0.0, 1.0);
    if y == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    Ok(match log_tail(y, a, b)? {
        Tail::Lower(l) => l.min(0.0),
        Tail::Upper(l) => (-l.exp()).ln_1p(),
    })
}

/// Inverse of [`regularized_incomplete_beta`] in its first argument.
///
/// Newton steps on the forward function, falling back to bisection whenever
/// a step leaves the current bracket.
pub fn inverse_regularized_incomplete_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_params(a, b)?;
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability must lie in [0,1], got {p}"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let lb = log_beta(a, b)?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut y = a / (a + b);
    let mut best = (f64::INFINITY, y);
    for _ in 0..400 {
        let f = regularized_incomplete_beta(y, a, b)? - p;
        if f.abs() < best.0 {
            best = (f.abs(), y);
        }
        if f == 0.0 || f.abs() <= 1e-15 * p.min(1.0 - p).max(1e-300) {
            return Ok(y);
        }
        if f < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= 4.0 * f64::EPSILON * y.max(1e-300) {
            break;
        }
        let log_pdf = (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - lb;
        let step = f / log_pdf.exp();
        let next = y - step;
        y = if step.is_finite() && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    Ok(best.1)
}

/// The Pochhammer symbol (x)_n = Γ(x+n)/Γ(x) with exact sign tracking.
///
/// For n ≥ 1 this is x(x+1)⋯(x+n−1); for n = 0 it is 1; for n ≤ −1 it is
/// 1/((x−1)(x−2)⋯(x+n)), which is a pole when any of those factors is zero.
pub fn pochhammer_signed(x: f64, n: i64) -> Result<SignedLogValue> {
    if !x.is_finite() {
        return domain(format!("pochhammer argument must be finite, got {x}"));
    }
    match n {
        0 => Ok(SignedLogValue::ONE),
        n if n > 0 => Ok(rising_product(x, n as u64)),
        n => {
            let m = n.unsigned_abs();
            let denom = rising_product(x + n as f64, m);
            if denom.is_zero() {
                return domain(format!("pochhammer ({x})_{n} is a pole"));
            }
            denom.recip()
        }
    }
}

/// x(x+1)⋯(x+n−1) for n ≥ 1.
fn rising_product(x: f64, n: u64) -> SignedLogValue {
    const DIRECT: u64 = 64;
    if n <= DIRECT {
        let mut acc = SignedLogValue::ONE;
        for i in 0..n {
            acc = acc * SignedLogValue::from_f64(x + i as f64);
        }
        return acc;
    }
    let last = x + (n - 1) as f64;
    if x > 0.0 {
        return SignedLogValue { log_abs: log_gamma_unchecked(x + n as f64) - log_gamma_unchecked(x), sign: 1 };
    }
    if x == x.floor() && last >= 0.0 {
        return SignedLogValue::ZERO;
    }
    // Split into the negative factors x, …, x+m−1 and the positive remainder.
    let m = ((-x).ceil() as u64).min(n);
    let ax = -x;
    // Π_{i<m} (ax − i) = Γ(ax + 1)/Γ(ax − m + 1)
    let neg = log_gamma_unchecked(ax + 1.0) - log_gamma_unchecked(ax - m as f64 + 1.0);
    let pos = if m < n { log_gamma_unchecked(x + n as f64) - log_gamma_unchecked(x + m as f64) } else { 0.0 };
    SignedLogValue { log_abs: neg + pos, sign: if m.is_multiple_of(2) { 1 } else { -1 } }
}
