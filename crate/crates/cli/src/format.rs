use cimsim::bits::BitVector;

/// Engineering notation with up to six significant digits: `104e-12`,
/// `2.09e-15`, `0.5`.
pub fn eng(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mut exp = (x.abs().log10() / 3.0).floor() as i32 * 3;
    let mut mantissa = x / 10f64.powi(exp);
    let rounded = |m: f64| -> f64 {
        let digits = 6 - (m.abs().log10().floor() as i32 + 1);
        let scale = 10f64.powi(digits.max(0));
        (m * scale).round() / scale
    };
    mantissa = rounded(mantissa);
    if mantissa.abs() >= 1000.0 {
        exp += 3;
        mantissa = rounded(mantissa / 1000.0);
    }
    if exp == 0 {
        format!("{mantissa}")
    } else {
        format!("{mantissa}e{exp}")
    }
}

pub fn bit_string(v: &BitVector) -> String {
    v.iter().map(|b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineering_notation() {
        assert_eq!(eng(104e-12), "104e-12");
        assert_eq!(eng(2.09e-15), "2.09e-15");
        assert_eq!(eng(161e-12), "161e-12");
        assert_eq!(eng(5.16e-15), "5.16e-15");
        assert_eq!(eng(3.0 * 2.09e-15), "6.27e-15");
        assert_eq!(eng(0.4e-3), "400e-6");
        assert_eq!(eng(999.9999999e-9), "1e-6");
        assert_eq!(eng(0.5), "500e-3");
        assert_eq!(eng(12.5), "12.5");
        assert_eq!(eng(-2e3), "-2e3");
        assert_eq!(eng(0.0), "0");
    }
}
