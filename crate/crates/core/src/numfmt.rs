//! Decimal formatting shared by every CSV and JSON emitter.

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub(crate) fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
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

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn matches_percent_g() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(-1.0), "-1");
        assert_eq!(sig12(4.0), "4");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(123456.789), "123456.789");
        assert_eq!(sig12(1e-5), "1e-05");
        assert_eq!(sig12(1.5e-7), "1.5e-07");
        assert_eq!(sig12(0.0001234), "0.0001234");
        assert_eq!(sig12(1e12), "1e+12");
        assert_eq!(sig12(999999999999.0), "999999999999");
        assert_eq!(sig12(9.9999999999999), "10");
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
    }
}
