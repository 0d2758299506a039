//! Number formatting for CSV tables and solution dumps.

/// Significant digits in study tables.
pub const TABLE_DIGITS: usize = 6;
/// Significant digits in solution curves; enough to round-trip any `f64`.
pub const DUMP_DIGITS: usize = 17;

/// `x` with `digits` significant digits in the style of C's `%g`: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros removed.
pub fn general(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn table(x: f64) -> String {
    general(x, TABLE_DIGITS)
}

pub fn dump(x: f64) -> String {
    general(x, DUMP_DIGITS)
}
