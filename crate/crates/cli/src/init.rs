//! Parser for `--init` field expressions, e.g. `u0=0.1*sin;um1=1` or
//! `u0=1+0.25*cos2;u1=1-0.1*sin`.
//!
//! Grammar per field: a signed sum of terms, each `c`, `c*sin[k]`,
//! `c*cos[k]`, `sin[k]`, or `cos[k]` (wavenumber k defaults to 1).
//! Field names follow the pattern coordinates: `u0`, `u1`, `um1` (= degree
//! −1), `um2`, ...

use laxtower::error::{Error, Result};
use laxtower::fourier::FourierField;
use laxtower::hierarchy::HierarchySpec;

pub fn parse_field_expr(expr: &str) -> Result<FourierField> {
    let mut out = FourierField::zero();
    let expr = expr.trim();
    if expr.is_empty() {
        return Ok(out);
    }
    // Split into signed terms.
    let mut terms: Vec<(f64, String)> = vec![];
    let mut sign = 1.0;
    let mut cur = String::new();
    for ch in expr.chars() {
        match ch {
            '+' | '-' if !cur.is_empty() => {
                terms.push((sign, cur.clone()));
                cur.clear();
                sign = if ch == '-' { -1.0 } else { 1.0 };
            }
            '-' => sign = -sign,
            '+' => {}
            c if c.is_whitespace() => {}
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        terms.push((sign, cur));
    }
    for (sign, term) in terms {
        out = out.add(&parse_term(sign, &term)?);
    }
    Ok(out)
}

fn parse_term(sign: f64, term: &str) -> Result<FourierField> {
    let (coeff_str, trig) = match term.split_once('*') {
        Some((c, t)) => (c, Some(t)),
        None => {
            if term.starts_with("sin") || term.starts_with("cos") {
                ("1", Some(term))
            } else {
                (term, None)
            }
        }
    };
    let coeff: f64 = coeff_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad coefficient '{coeff_str}' in '{term}'")))?;
    let coeff = sign * coeff;
    match trig {
        None => Ok(FourierField::constant(coeff)),
        Some(t) => {
            let (name, k_str) = t.split_at(3);
            let k: usize = if k_str.is_empty() {
                1
            } else {
                k_str
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad wavenumber '{k_str}' in '{term}'")))?
            };
            match name {
                "sin" => Ok(FourierField::sine(k, coeff)),
                "cos" => Ok(FourierField::cosine(k, coeff)),
                other => Err(Error::Parse(format!("unknown function '{other}' in '{term}'"))),
            }
        }
    }
}

fn component_key(degree: i32) -> String {
    if degree < 0 {
        format!("um{}", -degree)
    } else {
        format!("u{degree}")
    }
}

/// Builds the initial state of a hierarchy from an `--init` string;
/// unspecified components are zero.
pub fn parse_init(spec: &HierarchySpec, init: &str) -> Result<Vec<FourierField>> {
    let degrees = spec.component_degrees();
    let mut fields = vec![FourierField::zero(); degrees.len()];
    for assign in init.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, expr) = assign
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected name=expr, got '{assign}'")))?;
        let name = name.trim();
        let idx = degrees
            .iter()
            .position(|&d| component_key(d) == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown field '{name}' for {} (expected one of {:?})",
                    spec.name.name(),
                    degrees.iter().map(|&d| component_key(d)).collect::<Vec<_>>()
                ))
            })?;
        fields[idx] = parse_field_expr(expr)?;
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use laxtower::hierarchy::HierarchyName;

    #[test]
    fn parses_the_canonical_strings() {
        let spec = HierarchySpec::new(HierarchyName::Benny);
        let fields = parse_init(&spec, "u0=0.1*sin;um1=1").unwrap();
        assert!((fields[0].eval_at(0.25) - 0.1).abs() < 1e-12);
        assert!((fields[1].mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parses_sums_and_wavenumbers() {
        let f = parse_field_expr("1-0.2*cos2+0.05*sin3").unwrap();
        let x = 0.37;
        let want = 1.0 - 0.2 * (2.0 * std::f64::consts::PI * 2.0 * x).cos()
            + 0.05 * (2.0 * std::f64::consts::PI * 3.0 * x).sin();
        assert!((f.eval_at(x) - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonsense() {
        assert!(parse_field_expr("0.1*tan").is_err());
        let spec = HierarchySpec::new(HierarchyName::Benny);
        assert!(parse_init(&spec, "bogus=1").is_err());
    }
}
