//! Deterministic number formatting for report files.

/// Formats a float with 6 significant digits, the way C's `%.6g` would.
///
/// Trailing zeros after the decimal point are trimmed, very large or very
/// small magnitudes switch to scientific notation. The output is a pure
/// function of the bit pattern of `x`, which is what makes report files
/// byte-reproducible.
pub fn format_sig6(x: f64) -> String {
    format_sig(x, 6)
}

fn format_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }

    // Decimal exponent after rounding to `sig` digits; rounding can bump the
    // exponent (0.99999995 -> 1.0), so recompute from the rounded mantissa.
    let mut exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(sig as i32 - 1 - exp);
    let mantissa = (x.abs() * scale).round();
    if mantissa >= 10f64.powi(sig as i32) {
        exp += 1;
    }

    if exp < -4 || exp >= sig as i32 {
        let digits = sig - 1;
        let s = format!("{:.*e}", digits, x);
        // Rust prints `1.23456e3`; trim mantissa zeros but keep the exponent.
        let (mant, e) = s.split_once('e').expect("exponent in scientific float");
        let mant = trim_zeros(mant);
        format!("{mant}e{e}")
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s.to_string()
    }
}
