use num_complex::Complex64;

/// Parses `a+bi`, `a-bi`, `bi`, `i`, `-i` or a plain real.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number `{text}` (expected a+bi)");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s
            .parse::<f64>()
            .ok()
            .filter(|re| re.is_finite())
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(bad);
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let z = Complex64::new(re, im);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("1.0+0.5i").unwrap(), c(1.0, 0.5));
        assert_eq!(parse_complex("1.25").unwrap(), c(1.25, 0.0));
        assert_eq!(parse_complex("-2-3i").unwrap(), c(-2.0, -3.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex("1e-3").unwrap(), c(1e-3, 0.0));
        assert_eq!(parse_complex(" 1 - i ").unwrap(), c(1.0, -1.0));
        assert_eq!(parse_complex("-1e-2i").unwrap(), c(0.0, -1e-2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1+2j", "1+2i+3i", "nan", "1++2i"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }
}
