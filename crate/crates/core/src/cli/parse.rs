//! Command-line value syntax. Complex numbers are written `1.5-2i`, points as
//! comma-separated coordinates, lists of points separated by `;`.

use crate::error::{Error, Result};
use crate::numeric::{CPoint, C64};

pub fn complex(text: &str) -> Result<C64> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    compact.parse::<C64>().map_err(|_| Error::InvalidInput(format!("not a complex number: `{text}`")))
}

pub fn point(text: &str, g: usize) -> Result<CPoint> {
    let coords = text.split(',').map(complex).collect::<Result<Vec<_>>>()?;
    if coords.len() != g {
        return Err(Error::InvalidInput(format!("`{text}` has {} coordinates, expected {g}", coords.len())));
    }
    Ok(CPoint::new(coords))
}

pub fn points(text: &str, g: usize) -> Result<Vec<CPoint>> {
    text.split(';').map(|p| point(p, g)).collect()
}

/// `(x, y, t)` triples separated by `;`.
pub fn triples(text: &str) -> Result<Vec<[C64; 3]>> {
    text.split(';')
        .map(|t| {
            let v = point(t, 3)?;
            Ok([v[0], v[1], v[2]])
        })
        .collect()
}

/// Characteristic bits, e.g. `01` or `0,1`.
pub fn bits(text: &str, g: usize) -> Result<Vec<u8>> {
    let bits = text
        .chars()
        .filter(|c| *c != ',' && !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidInput(format!("characteristic bits must be 0 or 1, got `{c}`"))),
        })
        .collect::<Result<Vec<u8>>>()?;
    if bits.len() != g {
        return Err(Error::InvalidInput(format!("characteristic `{text}` has {} bits, expected {g}", bits.len())));
    }
    Ok(bits)
}

/// `g,seed,scale` for [`crate::scenarios::sample_siegel`].
pub fn sample_spec(text: &str) -> Result<(usize, u64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::InvalidInput(format!("--sample expects g,seed,scale, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?, parts[2].parse().map_err(|_| bad())?))
}
