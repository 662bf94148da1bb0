//! Two-column numeric tables and the tabulated ω family.

use std::path::Path;
use std::sync::Arc;

use super::omega::{omega_to_warping_kind, OmegaProfile, TabulatedOmega, DEFAULT_TABLE_SIZE};
use super::{Admissibility, ModelFamily, ModelSpec};
use crate::error::{GeomError, Result};
use crate::warping::{Kind, Variant, WarpingFunction};

/// Parses whitespace- or comma-separated `(x, y)` rows; `#` starts a comment line.
pub fn parse_two_column(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != 2 {
            return Err(GeomError::Table(format!("line {}: expected two columns, found {}", lineno + 1, fields.len())));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| GeomError::Table(format!("line {}: `{f}` is not a finite number", lineno + 1)))
        };
        let x = parse(fields[0])?;
        if let Some(&last) = xs.last() {
            if x <= last {
                return Err(GeomError::Table(format!("line {}: first column must be strictly increasing", lineno + 1)));
            }
        }
        xs.push(x);
        ys.push(parse(fields[1])?);
    }
    if xs.len() < 8 {
        return Err(GeomError::Table(format!("need at least 8 rows, found {}", xs.len())));
    }
    Ok((xs, ys))
}

pub fn read_two_column(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeomError::Table(format!("cannot read {}: {e}", path.display())))?;
    parse_two_column(&text)
}

/// ω sampled from a file of `(s, ω)` rows.
pub struct TabulatedFamily;

impl TabulatedFamily {
    fn profile(spec: &ModelSpec) -> Result<OmegaProfile> {
        let path = spec
            .table
            .as_ref()
            .ok_or_else(|| GeomError::InvalidArgument("family `tabulated` needs a `table` file".into()))?;
        let (s, w) = read_two_column(path)?;
        OmegaProfile::new(Arc::new(TabulatedOmega::new(s, w)?), spec.n, 1.0)
    }
}

impl ModelFamily for TabulatedFamily {
    fn name(&self) -> &'static str {
        "tabulated"
    }

    fn summary(&self) -> &'static str {
        "omega(s) read from a two-column (s, omega) file"
    }

    fn variant(&self) -> Variant {
        Variant::Boundary
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        match Self::profile(spec) {
            Ok(p) => Admissibility::new(p.omega.eval(p.s_lower)[1], "omega'(s_lower) > 0"),
            Err(e) => Admissibility::new(f64::NAN, e.to_string()),
        }
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        let p = Self::profile(spec)?;
        let s_max = spec.s_max.or_else(|| {
            let (_, hi) = p.omega.search_range();
            Some(p.default_s_max().min(p.s_lower + 0.999 * (hi - p.s_lower)))
        });
        Ok(omega_to_warping_kind(&p, spec.table_size.unwrap_or(DEFAULT_TABLE_SIZE), s_max, Kind::Tabulated)?
            .with_label("tabulated"))
    }

    fn omega_profile(&self, spec: &ModelSpec) -> Option<Result<OmegaProfile>> {
        Some(Self::profile(spec))
    }
}
