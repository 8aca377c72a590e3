//! Dataset files: one observation per line, optional header, `#` comments.
//!
//! Dose-response files have three comma- or whitespace-separated columns
//! (dose, trials, successes).

use std::path::Path;

use crate::{CliError, CliResult};

fn fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses rows of `width` numbers. A first non-comment line that does not
/// parse is taken as a header.
fn parse_rows(text: &str, width: usize, source: &str) -> CliResult<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f = fields(line);
        let parsed: Result<Vec<f64>, _> = f.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == width && v.iter().all(|x| x.is_finite()) => {
                rows.push(v);
                seen_data = true;
            }
            Err(_) if !seen_data && rows.is_empty() => {
                // Header line.
                seen_data = true;
            }
            _ => {
                return Err(CliError::Input(format!(
                    "{source}, line {}: expected {width} finite number(s), got '{line}'",
                    i + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{source}: no observations")));
    }
    Ok(rows)
}

pub fn parse_observations(text: &str, source: &str) -> CliResult<Vec<f64>> {
    Ok(parse_rows(text, 1, source)?.into_iter().map(|r| r[0]).collect())
}

pub fn read_observations(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_observations(&text, &path.display().to_string())
}

/// Grouped binomial dose-response data.
#[derive(Debug, Clone, PartialEq)]
pub struct DoseResponse {
    pub doses: Vec<f64>,
    pub trials: Vec<u64>,
    pub successes: Vec<f64>,
}

pub fn parse_dose_response(text: &str, source: &str) -> CliResult<DoseResponse> {
    let rows = parse_rows(text, 3, source)?;
    let mut out = DoseResponse {
        doses: Vec::new(),
        trials: Vec::new(),
        successes: Vec::new(),
    };
    for r in rows {
        if r[1] < 1.0 || r[1].fract() != 0.0 {
            return Err(CliError::Input(format!("{source}: trial counts must be positive integers")));
        }
        out.doses.push(r[0]);
        out.trials.push(r[1] as u64);
        out.successes.push(r[2]);
    }
    Ok(out)
}

/// Log dose (g/ml), animals and deaths of the classic four-group bioassay
/// experiment (Racine et al., 1986).
pub const BIOASSAY: &str = "\
# log dose, animals, deaths
-0.86, 5, 0
-0.30, 5, 1
-0.05, 5, 3
 0.73, 5, 5
";

pub fn bioassay() -> DoseResponse {
    parse_dose_response(BIOASSAY, "bioassay fixture").expect("embedded fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_blank_lines() {
        let v = parse_observations("count\n# note\n3\n\n4 # inline\n", "t").unwrap();
        assert_eq!(v, vec![3.0, 4.0]);
    }

    #[test]
    fn bad_line_is_reported_with_its_number() {
        let e = parse_observations("1\n2\nthree\n", "t").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(parse_observations("# nothing\n", "t").is_err());
    }

    #[test]
    fn fixture() {
        let b = bioassay();
        assert_eq!(b.doses.len(), 4);
        assert_eq!(b.trials, vec![5; 4]);
        assert_eq!(b.successes.iter().sum::<f64>(), 9.0);
    }
}
