use num_complex::Complex64;

use crate::{CliError, Result};

fn real(s: &str, whole: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Input(format!("bad number `{whole}`"))),
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i` or `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(CliError::Input("empty coordinate".into()));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(real(&t, s)?, 0.0));
    };
    let b = body.as_bytes();
    // The imaginary part starts at the last sign that is not an exponent sign.
    let split = (1..b.len())
        .rev()
        .find(|&k| (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => real(x, s)?,
    };
    let re = if re.is_empty() { 0.0 } else { real(re, s)? };
    Ok(Complex64::new(re, im))
}

/// Comma separated coordinates; `nvars` of them.
pub fn parse_point(s: &str, nvars: usize) -> Result<Vec<Complex64>> {
    let z = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    if z.len() != nvars {
        return Err(CliError::Input(format!(
            "point `{s}` has {} coordinates, the map has {nvars} variables",
            z.len()
        )));
    }
    Ok(z)
}

/// `lo,hi` with `lo < hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!("range `{s}` must be `lo,hi`")));
    }
    let lo = real(parts[0].trim(), s)?;
    let hi = real(parts[1].trim(), s)?;
    if lo >= hi {
        return Err(CliError::Input(format!("empty range `{s}`")));
    }
    Ok((lo, hi))
}
