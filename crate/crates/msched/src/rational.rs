//! Exact rational arithmetic helpers shared by every module.
//!
//! All scheduling quantities (speeds, durations, loads, LP entries) are
//! `BigRational`. The only place true irrationals can appear is a fractional
//! power (power-law processing times, p-norm effective speeds). Those are
//! replaced by a deterministic high-precision rational approximation computed
//! by [`nth_root`]; everything downstream still compares exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Workhorse number type for the whole crate.
pub type Rat = BigRational;

/// `n/d` as a `Rat`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a `Rat`.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `x^e` for integer exponents of either sign. Panics on `0^negative`.
pub fn pow_int(x: &Rat, e: i64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let mag = num::pow::pow(x.clone(), e.unsigned_abs() as usize);
    if e > 0 {
        mag
    } else {
        assert!(!mag.is_zero(), "0 raised to a negative power");
        mag.recip()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError(pub String);

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal: {}", self.0)
    }
}

impl std::error::Error for ParseRatError {}

/// Parses `"num/den"`, a plain integer, or a decimal/scientific literal
/// (converted exactly from its binary `f64` value, e.g. for CLI epsilons).
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseRatError(s.to_string()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| ParseRatError(s.to_string()))?;
        let den: BigInt = d.trim().parse().map_err(|_| ParseRatError(s.to_string()))?;
        if den.is_zero() {
            return Err(ParseRatError(s.to_string()));
        }
        return Ok(Rat::new(num, den));
    }
    if let Ok(num) = t.parse::<BigInt>() {
        return Ok(Rat::from_integer(num));
    }
    let v: f64 = t.parse().map_err(|_| ParseRatError(s.to_string()))?;
    Rat::from_float(v).ok_or_else(|| ParseRatError(s.to_string()))
}

/// Canonical `"num/den"` rendering, denominator always present.
pub fn fmt_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal rendering to 12 significant digits, round half away from zero.
/// Falls back to scientific notation outside `1e-4 ..= 1e15`.
pub fn dec12(x: &Rat) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rat {
        let p = BigInt::from(10u32).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Rat::from_integer(p)
        } else {
            Rat::new(BigInt::one(), p)
        }
    };
    if a < pow10(e) {
        e -= 1;
    } else if a >= pow10(e + 1) {
        e += 1;
    }
    // 12 significant digits: round a / 10^(e-11) to an integer
    let scaled = &a / pow10(e - 11);
    let mut digits = (scaled.numer() + scaled.denom() / BigInt::from(2)) / scaled.denom();
    let cap = BigInt::from(10u32).pow(12);
    if digits >= cap {
        digits /= BigInt::from(10);
        e += 1;
    }
    let ds = digits.to_string();
    debug_assert_eq!(ds.len(), 12);
    let sign = if neg { "-" } else { "" };
    let trim = |s: &str| s.trim_end_matches('0').trim_end_matches('.').to_string();
    let body = if (-6..=15).contains(&e) {
        let plain = if e >= 11 {
            format!("{ds}{}", "0".repeat((e - 11) as usize))
        } else if e >= 0 {
            let cut = (e + 1) as usize;
            format!("{}.{}", &ds[..cut], &ds[cut..])
        } else {
            format!("0.{}{ds}", "0".repeat((-e - 1) as usize))
        };
        trim(&plain)
    } else {
        format!("{}e{}", trim(&format!("{}.{}", &ds[..1], &ds[1..])), e)
    };
    format!("{sign}{body}")
}

/// Lossy `f64` view for display and analysis-level math only.
pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

// Approximation grid for nth_root: results land on multiples of 2^-224,
// giving far more headroom than the crate-wide 1e-9 comparison tolerance.
const ROOT_GRID_BITS: u64 = 224;

fn trunc_to_grid(x: &Rat) -> Rat {
    let scale = BigInt::one() << ROOT_GRID_BITS;
    Rat::new(x.numer() * &scale / x.denom(), scale)
}

/// Deterministic `d`-th root of a positive rational, relative error far below
/// `2^-180`. Newton iteration from an `f64` seed (bit-length seed when the
/// value is outside `f64` range), truncated to a fixed dyadic grid each step.
pub fn nth_root(x: &Rat, d: u32) -> Rat {
    assert!(d >= 1, "root order must be >= 1");
    assert!(x.is_positive(), "nth_root needs a positive argument");
    if d == 1 || x.is_one() {
        return x.clone();
    }
    let df = i64::from(d);
    let (mut y, iters) = match x.to_f64().filter(|v| v.is_finite() && *v > 0.0) {
        Some(v) => {
            let seed = v.powf(1.0 / d as f64);
            match Rat::from_float(seed).filter(|r| r.is_positive()) {
                Some(r) => (r, 5),
                None => (bit_seed(x, d), 14),
            }
        }
        None => (bit_seed(x, d), 14),
    };
    for _ in 0..iters {
        // y <- ((d-1) y + x / y^(d-1)) / d, then clamp representation size
        let yp = pow_int(&y, df - 1);
        y = (&y * rint(df - 1) + x / yp) / rint(df);
        y = trunc_to_grid(&y);
        if y.is_zero() {
            // only possible for absurdly tiny roots below the grid
            y = Rat::new(BigInt::one(), BigInt::one() << ROOT_GRID_BITS);
        }
    }
    y
}

// Seed 2^ceil(bitlen(x)/d), always above the true root.
fn bit_seed(x: &Rat, d: u32) -> Rat {
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let approx_log2 = nb - db + 1; // x < 2^approx_log2
    let k = approx_log2.div_euclid(i64::from(d)) + 1;
    if k >= 0 {
        Rat::from_integer(BigInt::one() << k as u64)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-k) as u64)
    }
}

/// `x^(num/den)` for positive `x` and a rational exponent with small terms.
/// Exact whenever `den == 1`; otherwise goes through [`nth_root`].
pub fn pow_rat(x: &Rat, num: i64, den: u32) -> Rat {
    assert!(den >= 1);
    assert!(
        num.unsigned_abs() <= 1 << 20 && den <= 1 << 20,
        "exponent out of supported range"
    );
    let powed = pow_int(x, num);
    nth_root(&powed, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["5/4", "-3/7", "12", "0/5"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
        }
        assert_eq!(parse_rat("6/4").unwrap(), rat(3, 2));
        assert_eq!(fmt_rat(&rat(3, 2)), "3/2");
        assert_eq!(fmt_rat(&rint(7)), "7/1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        // decimal literals are accepted exactly as their binary f64 value
        assert_eq!(parse_rat("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("1e-6").unwrap(), Rat::from_float(1e-6).unwrap());
    }

    #[test]
    fn dec12_renders_12_significant_digits() {
        assert_eq!(dec12(&rat(4, 3)), "1.33333333333");
        assert_eq!(dec12(&rat(1, 3)), "0.333333333333");
        assert_eq!(dec12(&rat(2, 3)), "0.666666666667");
        assert_eq!(dec12(&rint(2)), "2");
        assert_eq!(dec12(&rat(-1, 2)), "-0.5");
        assert_eq!(dec12(&rint(0)), "0");
        assert_eq!(dec12(&rat(1, 1000000)), "0.000001");
        assert_eq!(dec12(&rat(1, 10000000)), "1e-7");
        // rounds into pure trailing zeros, which the trim then drops
        assert_eq!(dec12(&(rint(1) + rat(1, 2).pow(40))), "1");
    }

    #[test]
    fn pow_int_signs() {
        assert_eq!(pow_int(&rat(2, 3), 2), rat(4, 9));
        assert_eq!(pow_int(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(pow_int(&rat(5, 7), 0), rint(1));
    }

    #[test]
    fn nth_root_hits_exact_roots() {
        let eps = Rat::new(BigInt::one(), BigInt::one() << 100);
        for (x, d, want) in [
            (rint(4), 2u32, rint(2)),
            (rint(27), 3, rint(3)),
            (rat(1, 16), 4, rat(1, 2)),
            (rat(49, 9), 2, rat(7, 3)),
        ] {
            let got = nth_root(&x, d);
            assert!((&got - &want).abs() < eps, "root({x}, {d}) = {got}");
        }
    }

    #[test]
    fn nth_root_of_two_squares_back() {
        let r = nth_root(&rint(2), 2);
        let back = &r * &r;
        let err = (&back - rint(2)).abs();
        assert!(err < Rat::new(BigInt::one(), BigInt::one() << 90), "err {err}");
    }

    #[test]
    fn nth_root_handles_values_beyond_f64() {
        // (2^1100)^(1/11) = 2^100
        let big = Rat::from_integer(BigInt::one() << 1100);
        let r = nth_root(&big, 11);
        let want = Rat::from_integer(BigInt::one() << 100);
        let rel = ((&r - &want) / &want).abs();
        assert!(rel < Rat::new(BigInt::one(), BigInt::one() << 80), "rel {rel}");
    }

    #[test]
    fn pow_rat_exact_when_integral() {
        assert_eq!(pow_rat(&rat(3, 2), 3, 1), rat(27, 8));
        assert_eq!(pow_rat(&rat(3, 2), -1, 1), rat(2, 3));
    }
}
