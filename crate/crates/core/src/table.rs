//! Delimiter-separated output helpers shared by the plot-ready tables.

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros removed. Non-finite values print as `nan`, `inf` or `-inf`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a delimiter-separated row.
pub fn join_row<I, S>(fields: I, delimiter: char) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(delimiter);
        }
        out.push_str(f.as_ref());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(0.5, 9), "0.5");
        assert_eq!(format_sig(0.750_489_960_270_438_8, 9), "0.75048996");
        assert_eq!(format_sig(-2.438_123_456_7, 4), "-2.438");
        assert_eq!(format_sig(123_456_789_012.0, 9), "1.23456789e11");
        assert_eq!(format_sig(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_sig(100.0, 9), "100");
        assert_eq!(format_sig(f64::NAN, 9), "nan");
        for &x in &[std::f64::consts::PI, 1e-3, 98765.4321, -0.000_123_456_789_1] {
            let back: f64 = format_sig(x, 9).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-8);
        }
    }

    #[test]
    fn rows() {
        assert_eq!(join_row(["a", "b", "c"], ','), "a,b,c");
        assert_eq!(join_row(Vec::<String>::new(), '\t'), "");
    }
}
