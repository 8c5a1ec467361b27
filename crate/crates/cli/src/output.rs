//! Output formatting: C-style %.12g floats, header stamps, file writing.
//! All files are UTF-8 with LF line endings.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Significant digits used in every emitted float.
pub const FLOAT_DIGITS: usize = 12;

/// C printf `%.{prec}g`: `prec` significant digits, fixed notation for
/// exponents in [-4, prec), scientific otherwise, trailing zeros stripped.
pub fn fmt_g(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let prec = prec.max(1);
    // scientific rendering decides the decimal exponent after rounding
    let sci = format!("{:.*e}", prec - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp < -4 || exp >= prec as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (prec as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}"))
    }
}

pub fn g12(x: f64) -> String {
    fmt_g(x, FLOAT_DIGITS)
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// First line of every output file: tool version and config hash.
pub fn header_line(config_hash: &str) -> String {
    format!(
        "# wcnet v{} config={}",
        env!("CARGO_PKG_VERSION"),
        config_hash
    )
}

pub fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Numeric(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Numeric(format!("cannot write {path}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf_g12() {
        let cases: &[(f64, &str)] = &[
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0000123456, "1.23456e-05"),
            (6.0, "6"),
            (2.5, "2.5"),
            (1e-4, "0.0001"),
            (9.99999999999e-05, "9.99999999999e-05"),
            (123456789012345.0, "1.23456789012e+14"),
            (-2.75, "-2.75"),
            (0.04, "0.04"),
            (1.25, "1.25"),
            (1e12, "1e+12"),
            (999999999999.5, "1e+12"),
            (1.911, "1.911"),
            (3.0791234567891236e-07, "3.07912345679e-07"),
            (700.0, "700"),
            (0.0, "0"),
            (-0.0, "0"),
        ];
        for &(x, want) in cases {
            assert_eq!(g12(x), want, "formatting {x}");
        }
        assert_eq!(fmt_g(f64::NAN, 12), "nan");
        assert_eq!(fmt_g(f64::NEG_INFINITY, 12), "-inf");
    }
}
