/// `x` rounded to `digits` significant digits, in plain notation where
/// that stays short.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - magnitude;
    if (0..=12).contains(&decimals) && magnitude > -5 {
        let s = format!("{:.*}", decimals as usize, x);
        // Rounding can carry into a new leading digit; that is harmless.
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

/// Percent yield with six significant digits.
pub fn pct(decimal: f64) -> String {
    sig(decimal * 100.0, 6)
}

/// Parameter or price with ten significant digits.
pub fn param(x: f64) -> String {
    sig(x, 10)
}
