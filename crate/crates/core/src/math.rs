//! Small numerical helpers shared by the measure, rate and oracle layers.

use statrs::function::gamma::ln_gamma;

/// `x ln(x / y)` with `0 ln(0/y) = 0` and `x ln(x/0) = +inf` for `x > 0`.
#[inline]
pub fn entropy_term(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x.ln() - y.ln())
    }
}

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Log of the Poisson(λ) mass at `k`; `λ = 0` puts all mass on zero.
pub fn ln_poisson(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -lambda + k as f64 * lambda.ln() - ln_factorial(k)
}

/// Stable `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^a)` for `a <= 0`.
pub fn ln_one_minus_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// Smallest `L` such that the Poisson(λ) mass above `L` is at most `tail`.
pub fn poisson_truncation_point(lambda: f64, tail: f64) -> u64 {
    if lambda == 0.0 {
        return 0;
    }
    let horizon = (lambda + 40.0 * lambda.sqrt() + 80.0).ceil() as u64;
    let pmf: Vec<f64> = (0..=horizon).map(|k| ln_poisson(lambda, k).exp()).collect();
    // suffix sums accumulated from the far tail inwards
    let mut above = 0.0;
    for l in (0..horizon).rev() {
        above += pmf[l as usize + 1];
        if above > tail {
            return l + 1;
        }
    }
    0
}

/// Integer cube root: largest `r` with `r^3 <= n`.
pub fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while (r + 1).checked_pow(3).is_some_and(|v| v <= n) {
        r += 1;
    }
    while r.checked_pow(3).is_none_or(|v| v > n) {
        r -= 1;
    }
    r
}

/// Integer fourth root: largest `r` with `r^4 <= n`.
pub fn i4rt(n: u64) -> u64 {
    let mut r = (n as f64).powf(0.25) as u64;
    while (r + 1).checked_pow(4).is_some_and(|v| v <= n) {
        r += 1;
    }
    while r.checked_pow(4).is_none_or(|v| v > n) {
        r -= 1;
    }
    r
}

/// Serde adapter for extended reals: infinities are written as the strings
/// `"inf"` / `"-inf"` and NaN as `null`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
        Null(()),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Null(()) => Ok(f64::NAN),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("`{other}` is not an extended real"))),
            },
        }
    }
}

/// An extended real that serializes through [`ext_real`].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ExtReal(#[serde(with = "ext_real")] pub f64);
