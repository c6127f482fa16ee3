//! Significant-digit decimal formatting shared by the grid writer and the reports.

/// Format `v` with `sig` significant digits, trimming trailing zeros.
///
/// Uses plain decimal notation in the printf `%g` range and falls back to
/// exponential notation outside it. The output always re-parses to the value
/// rounded to `sig` significant digits.
pub fn format_sig(v: f64, sig: u32) -> String {
    let sig = sig.clamp(1, 17);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = decimal_exponent(v);
    if exp >= sig as i32 || exp < -4 {
        let s = format!("{:.*e}", sig as usize - 1, v);
        let (mantissa, exponent) = s.split_once('e').expect("exponential format");
        let mantissa = trim_trailing_zeros(mantissa);
        format!("{mantissa}e{exponent}")
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        trim_trailing_zeros(&s).to_string()
    }
}

/// Round `v` to `sig` significant digits.
pub fn quantize_sig(v: f64, sig: u32) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format_sig(v, sig)
        .parse()
        .expect("formatted float re-parses")
}

/// Power-of-ten exponent of the leading digit, read off the exact `{:e}` rendering.
fn decimal_exponent(v: f64) -> i32 {
    let s = format!("{:e}", v.abs());
    s.split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .expect("exponential format carries an exponent")
}

fn trim_trailing_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
