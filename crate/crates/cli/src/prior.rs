//! The `family:param:param` prior grammar.
//!
//! ```text
//! flat | uniform          improper flat prior (uniform on [0, 1] for a probability)
//! flat-plane              flat on both logistic coefficients
//! jeffreys-var            1/σ² on a normal variance
//! gamma:α:β               gamma kernel, β = 0 allowed (improper)
//! beta:α:β                beta kernel, 0 allowed (beta:0:0 is Haldane)
//! ig:α:β                  inverse-gamma kernel on a variance
//! normal:μ:σ²             normal with the given variance
//! t:a:b:c                 Student t with location a, scale b, c degrees of freedom
//! cauchy:a:b              Cauchy with location a and scale b
//! skewnormal:ξ:ω:α        skew-normal
//! uniform:lo:hi           uniform on an interval
//! ```

use std::fmt;

use wim_core::distributions::Distribution;
use wim_core::posterior::PriorSpec;

/// A prior string that failed to parse; `column` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub input: String,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prior '{}', column {}: {}", self.input, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<ParseError> for crate::CliError {
    fn from(e: ParseError) -> Self {
        crate::CliError::Input(e.to_string())
    }
}

/// A decimal number or a fraction `p/q`.
fn parse_number(text: &str) -> Option<f64> {
    match text.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => text.parse().ok(),
    }
}

pub fn parse_prior(input: &str) -> Result<PriorSpec, ParseError> {
    let err = |column: usize, message: String| ParseError {
        input: input.to_string(),
        column,
        message,
    };
    let mut fields = Vec::new();
    let mut start = 0;
    for part in input.split(':') {
        fields.push((start + 1, part.trim()));
        start += part.len() + 1;
    }
    let (_, name) = fields[0];
    let name = name.to_ascii_lowercase();
    let arity = match name.as_str() {
        "flat" | "uniform" if fields.len() == 1 => 0,
        "flat-plane" | "jeffreys-var" => 0,
        "gamma" | "beta" | "ig" | "normal" | "cauchy" | "uniform" => 2,
        "t" | "skewnormal" => 3,
        "" => return Err(err(1, "empty prior".into())),
        other => return Err(err(1, format!("unknown prior family '{other}'"))),
    };
    if fields.len() != arity + 1 {
        let column = fields.get(arity + 1).map_or(input.len() + 1, |f| f.0);
        return Err(err(column, format!("'{name}' takes {arity} parameter(s), got {}", fields.len() - 1)));
    }
    let mut params = Vec::with_capacity(arity);
    for &(column, text) in &fields[1..] {
        let v = parse_number(text).ok_or_else(|| err(column, format!("'{text}' is not a number")))?;
        if !v.is_finite() {
            return Err(err(column, format!("'{text}' is not finite")));
        }
        params.push(v);
    }
    // Report domain errors at the first parameter's column.
    let domain = |e: wim_core::WimError| err(fields.get(1).map_or(1, |f| f.0), e.to_string());
    let p = |i: usize| params[i];
    let spec = match name.as_str() {
        "flat" | "uniform" if arity == 0 => PriorSpec::Flat,
        "flat-plane" => PriorSpec::FlatPlane,
        "jeffreys-var" => PriorSpec::JeffreysVariance,
        "gamma" => PriorSpec::gamma(p(0), p(1)).map_err(domain)?,
        "beta" => PriorSpec::beta(p(0), p(1)).map_err(domain)?,
        "ig" => PriorSpec::inverse_gamma(p(0), p(1)).map_err(domain)?,
        "normal" => {
            if !(p(1) > 0.0) {
                return Err(err(fields[2].0, "variance must be positive".into()));
            }
            PriorSpec::Proper(Distribution::normal(p(0), p(1).sqrt()).map_err(domain)?)
        }
        "cauchy" => PriorSpec::Proper(Distribution::cauchy(p(0), p(1)).map_err(domain)?),
        "uniform" => PriorSpec::Proper(Distribution::uniform(p(0), p(1)).map_err(domain)?),
        "t" => PriorSpec::Proper(Distribution::student_t(p(0), p(1), p(2)).map_err(domain)?),
        "skewnormal" => PriorSpec::Proper(Distribution::skew_normal(p(0), p(1), p(2)).map_err(domain)?),
        _ => unreachable!("family list checked above"),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        assert_eq!(parse_prior("flat").unwrap(), PriorSpec::Flat);
        assert_eq!(parse_prior("jeffreys-var").unwrap(), PriorSpec::JeffreysVariance);
        assert_eq!(parse_prior("gamma:2.5:2.5").unwrap(), PriorSpec::gamma(2.5, 2.5).unwrap());
        assert_eq!(parse_prior("beta:1/3:1/3").unwrap(), PriorSpec::beta(1.0 / 3.0, 1.0 / 3.0).unwrap());
        assert_eq!(parse_prior("gamma:1:0").unwrap(), PriorSpec::ImproperGamma { shape: 1.0, rate: 0.0 });
        assert_eq!(parse_prior("beta:0:0").unwrap(), PriorSpec::ImproperBeta { alpha: 0.0, beta: 0.0 });
        assert_eq!(
            parse_prior("normal:0:4").unwrap(),
            PriorSpec::Proper(Distribution::normal(0.0, 2.0).unwrap())
        );
        assert_eq!(
            parse_prior("cauchy:0:2.5").unwrap(),
            PriorSpec::Proper(Distribution::cauchy(0.0, 2.5).unwrap())
        );
        assert!(matches!(parse_prior("t:0:0.92:1").unwrap(), PriorSpec::Proper(Distribution::StudentT { .. })));
        assert!(matches!(parse_prior("uniform:-1:1").unwrap(), PriorSpec::Proper(Distribution::Uniform { .. })));
    }

    #[test]
    fn errors_point_at_the_offending_field() {
        let e = parse_prior("gamma:-1:2").unwrap_err();
        assert_eq!(e.column, 7);
        let e = parse_prior("gamma:1:x").unwrap_err();
        assert_eq!(e.column, 9);
        let e = parse_prior("gamma:1").unwrap_err();
        assert_eq!(e.column, 8);
        let e = parse_prior("gamma:1:2:3").unwrap_err();
        assert_eq!(e.column, 11);
        assert_eq!(parse_prior("wibble").unwrap_err().column, 1);
        assert_eq!(parse_prior("normal:0:-1").unwrap_err().column, 10);
        assert_eq!(parse_prior("beta:1/0:1").unwrap_err().column, 6);
        assert_eq!(parse_prior("beta:1/x:1").unwrap_err().column, 6);
    }
}
