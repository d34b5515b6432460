//! Decimal formatting for CSV cells: fixed significant-digit precision
//! with trailing zeros trimmed, falling back to scientific notation for
//! extreme magnitudes.

/// Formats with `sig` significant digits, like C's `%.{sig}g` but without
/// locale concerns. `sig` must be at least 1.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if exp < -4 || exp >= sig as i32 {
        let trimmed = trim_fraction(mantissa);
        return format!("{sign}{trimmed}e{exp}");
    }

    let body = if exp >= 0 {
        let point = (exp + 1) as usize;
        if point >= digits.len() {
            let mut s = digits.clone();
            s.push_str(&"0".repeat(point - digits.len()));
            s
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim_fraction(&body))
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
