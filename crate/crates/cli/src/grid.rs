//! Sweep grids `start:stop:step` (inclusive), or a single value.

use crate::error::{usage, CliResult};

pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| -> CliResult<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map_or_else(|| usage(format!("bad number '{s}' in grid '{spec}'")), Ok)
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, h] => {
            let (a, b, h) = (num(a)?, num(b)?, num(h)?);
            if !(h > 0.0) || b < a {
                return usage(format!("grid '{spec}' needs start <= stop and step > 0"));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return usage(format!("grid '{spec}' has too many points"));
            }
            // Points are start + k step, so rows are independent of
            // accumulated rounding.
            Ok((0..=n).map(|k| a + k as f64 * h).collect())
        }
        _ => usage(format!("grid '{spec}' is not start:stop:step or a single value")),
    }
}

/// Closed window `a:b`.
pub fn parse_window(spec: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    if let [a, b] = parts.as_slice() {
        if let (Ok(a), Ok(b)) = (a.parse::<f64>(), b.parse::<f64>()) {
            if a <= b {
                return Ok((a, b));
            }
        }
    }
    usage(format!("window '{spec}' is not a:b with a <= b"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:0:1").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("0.2").unwrap(), vec![0.2]);
        assert_eq!(parse_grid("0.05:0.925:0.025").unwrap().len(), 36);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("0.8:0.875").unwrap(), (0.8, 0.875));
        assert!(parse_window("0.9:0.8").is_err());
        assert!(parse_window("0.9").is_err());
    }
}
