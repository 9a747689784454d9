//! Value parsers for counts and `N` grids.

use qwqrng_core::rate::log_grid;

/// A non-negative integer, written plainly (`1000000`) or in scientific
/// notation with an integral value (`1e6`).
pub fn count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v < 1.8e19) {
        return Err(format!("not a non-negative integer: {s:?}"));
    }
    Ok(v as u64)
}

/// Strictly increasing `N` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid(pub Vec<u64>);

/// A grid of `N` values: either a comma list (`1e4,1e5,1e6`) or a
/// logarithmic range `start:end:points`.
pub fn grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, end, points] => {
            let start = count(start)? as f64;
            let end = count(end)? as f64;
            let points: usize = points
                .trim()
                .parse()
                .map_err(|_| format!("bad point count {points:?}"))?;
            log_grid(start, end, points)
                .map(Grid)
                .map_err(|e| e.to_string())
        }
        [list] => {
            let values = list.split(',').map(count).collect::<Result<Vec<_>, _>>()?;
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err("grid values must be strictly increasing".into());
            }
            Ok(Grid(values))
        }
        _ => Err(format!(
            "expected a comma list or start:end:points, got {s:?}"
        )),
    }
}
