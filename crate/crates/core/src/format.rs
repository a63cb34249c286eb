//! Fixed-width numeric text output.

/// Significant digits used for every number the crate writes to text.
pub const SIG_DIGITS: usize = 9;

/// Formats `x` with [`SIG_DIGITS`] significant digits.
///
/// Plain decimal notation is used for magnitudes in `[1e-4, 1e15)`,
/// scientific notation otherwise.
pub fn sig(x: f64) -> String {
    sig_digits(x, SIG_DIGITS)
}

pub fn sig_digits(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round in scientific form first so the exponent accounts for carries
    // such as 9.9999999996 -> 10.0000000.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-4..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.starts_with("-") && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig(-0.8660254037844386), "-0.866025404");
        assert_eq!(sig(-1.0), "-1.00000000");
        assert_eq!(sig(20.999063), "20.9990630");
        assert_eq!(sig(9.99999999996), "10.0000000");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(1.5e-7), "1.50000000e-7");
    }
}
