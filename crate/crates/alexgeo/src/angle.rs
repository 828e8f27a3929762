//! Angle literals: `1.25`, `pi`, `-pi/3`, `5pi/4`, `0.5pi`.

use std::f64::consts::PI;

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("angle {s:?} is not finite")) };
    }
    let bad = || format!("cannot read angle {s:?}; use a decimal or a literal like 5pi/4");
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t),
    };
    let at = body.find("pi").ok_or_else(bad)?;
    let (coef, rest) = (body[..at].trim(), body[at + 2..].trim());
    let a = match coef.trim_end_matches('*') {
        "" => 1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let b = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?,
    };
    if b == 0.0 {
        return Err(format!("angle {s:?} divides by zero"));
    }
    let v = a * PI / b;
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_angle("1.5").unwrap(), 1.5);
        assert!((parse_angle("5pi/4").unwrap() - 1.25 * PI).abs() < 1e-15);
        assert!((parse_angle("-pi/3").unwrap() + PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert!((parse_angle("0.5pi").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((parse_angle("2*pi").unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("x").is_err());
    }
}
