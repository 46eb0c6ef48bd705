//! `(τ, g)` tables and their CSV representation.
//!
//! Files start with `# key = value` metadata lines, followed by a header row
//! and comma-separated rows in 15-significant-digit scientific notation.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Formats a value with 15 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.14e}")
}

/// Ordered `key = value` parameter record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces `key`.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: &Metadata) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }
}

/// A rectangular table of named `f64` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(metadata: Metadata, columns: Vec<String>) -> Self {
        Self { metadata, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Validation(format!("row has {} values for {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in self.metadata.iter() {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_value(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut metadata = Metadata::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    metadata.set(k.trim(), v.trim());
                }
                body_start += line.len();
            } else if trimmed.is_empty() {
                body_start += line.len();
            } else {
                break;
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(&text.as_bytes()[body_start..]);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if columns.is_empty() || columns.iter().all(String::is_empty) {
            return Err(Error::Parse("missing header row".into()));
        }
        let mut table = Table::new(metadata, columns);
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse(format!("data row {}: '{s}' is not a number", line + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Sampled correlation `g(τ)` with optional per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub tau: Vec<f64>,
    pub g: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub model: String,
    pub params: Metadata,
}

impl CorrelationCurve {
    pub fn new(tau: Vec<f64>, g: Vec<f64>, model: impl Into<String>) -> Result<Self> {
        let curve = Self { tau, g, sigma: None, model: model.into(), params: Metadata::new() };
        curve.validate()?;
        Ok(curve)
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        self.sigma = Some(sigma);
        self.validate()?;
        Ok(self)
    }

    pub fn with_params(mut self, params: Metadata) -> Self {
        self.params = params;
        self
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.len() != self.g.len() {
            return Err(Error::Validation(format!("{} tau values but {} g values", self.tau.len(), self.g.len())));
        }
        validate_grid(&self.tau)?;
        if let Some(i) = self.g.iter().position(|g| !g.is_finite()) {
            return Err(Error::Validation(format!("g is not finite at tau = {}", self.tau[i])));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.tau.len() {
                return Err(Error::Validation("sigma length differs from tau grid".into()));
            }
            if let Some(i) = s.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::Validation(format!("invalid standard error at tau = {}", self.tau[i])));
            }
        }
        Ok(())
    }

    pub fn to_table(&self) -> Table {
        let mut metadata = Metadata::new().with("model", &self.model);
        metadata.extend(&self.params);
        let mut columns = vec!["tau".to_string(), "g".to_string()];
        if self.sigma.is_some() {
            columns.push("sigma".into());
        }
        let mut table = Table::new(metadata, columns);
        for i in 0..self.len() {
            let mut row = vec![self.tau[i], self.g[i]];
            if let Some(s) = &self.sigma {
                row.push(s[i]);
            }
            table.rows.push(row);
        }
        table
    }

    /// Builds a curve from a table, taking `g` from `column` or, when absent,
    /// from `g` or the first column after `tau`. A `sigma` column is used when
    /// present.
    pub fn from_table(table: &Table, column: Option<&str>) -> Result<Self> {
        let tau = table.column("tau").ok_or_else(|| Error::Parse("no 'tau' column".into()))?;
        let name = match column {
            Some(c) => c.to_string(),
            None if table.column_index("g").is_some() => "g".into(),
            None => table
                .columns
                .iter()
                .find(|c| *c != "tau" && *c != "sigma")
                .cloned()
                .ok_or_else(|| Error::Parse("no value column".into()))?,
        };
        let g = table.column(&name).ok_or_else(|| Error::Parse(format!("no '{name}' column")))?;
        let mut params = table.metadata.clone();
        let model = params.get("model").unwrap_or("unknown").to_string();
        params.entries.retain(|(k, _)| k != "model");
        let mut curve = CorrelationCurve::new(tau, g, model)?.with_params(params);
        if let Some(s) = table.column("sigma") {
            curve = curve.with_sigma(s)?;
        }
        Ok(curve)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.to_table().write_csv(out)
    }

    pub fn read_csv<R: Read>(input: R, column: Option<&str>) -> Result<Self> {
        Self::from_table(&Table::read_csv(input)?, column)
    }
}

/// Checks that a τ grid is nonempty, nonnegative, finite and strictly increasing.
pub fn validate_grid(tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::Validation("empty tau grid".into()));
    }
    if let Some(t) = tau.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Validation(format!("tau = {t} must be finite and >= 0")));
    }
    if let Some(w) = tau.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!("tau grid not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Log,
}

impl std::str::FromStr for GridSpacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            other => Err(Error::Parse(format!("unknown grid spacing '{other}' (linear|log)"))),
        }
    }
}

/// Builds `points` grid values from `min` to `max` inclusive.
pub fn make_grid(min: f64, max: f64, points: usize, spacing: GridSpacing) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Validation("grid needs at least one point".into()));
    }
    if points > 1 && !(max > min) {
        return Err(Error::Validation(format!("grid max {max} must exceed min {min}")));
    }
    let grid: Vec<f64> = match spacing {
        GridSpacing::Linear => {
            if points == 1 {
                vec![min]
            } else {
                (0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect()
            }
        }
        GridSpacing::Log => {
            if !(min > 0.0) {
                return Err(Error::Validation(format!("log grid needs min > 0, got {min}")));
            }
            if points == 1 {
                vec![min]
            } else {
                let (a, b) = (min.ln(), max.ln());
                (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
            }
        }
    };
    validate_grid(&grid)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let curve = CorrelationCurve::new(vec![0.0, 0.5, 1.25], vec![0.0, 0.123_456_789_012_345_68, 1.0 / 3.0], "test")
            .unwrap()
            .with_params(Metadata::new().with("omega", 0.3))
            .with_sigma(vec![0.1, 0.2, 0.3])
            .unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# model = test\n# omega = 0.3\ntau,g,sigma\n"));
        assert!(!text.contains('\r'));
        let back = CorrelationCurve::read_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back.model, "test");
        assert_eq!(back.params.get("omega"), Some("0.3"));
        for (a, b) in back.g.iter().zip(&curve.g) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn format_has_fifteen_digits() {
        assert_eq!(format_value(1.0 / 3.0), "3.33333333333333e-1");
    }

    #[test]
    fn grids() {
        let g = make_grid(1e-2, 1e4, 7, GridSpacing::Log).unwrap();
        assert!((g[0] - 1e-2).abs() < 1e-16 && (g[6] - 1e4).abs() < 1e-9);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!(make_grid(0.0, 1.0, 3, GridSpacing::Log).is_err());
        assert_eq!(make_grid(0.0, 1.0, 3, GridSpacing::Linear).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(validate_grid(&[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn named_column_selection() {
        let text = "# model = m\ntau,g_model,g_oracle\n0,1,2\n1,3,4\n";
        let c = CorrelationCurve::read_csv(text.as_bytes(), Some("g_oracle")).unwrap();
        assert_eq!(c.g, vec![2.0, 4.0]);
        let d = CorrelationCurve::read_csv(text.as_bytes(), None).unwrap();
        assert_eq!(d.g, vec![1.0, 3.0]);
        assert!(CorrelationCurve::read_csv("tau,g\n0,x\n".as_bytes(), None).is_err());
    }
}
