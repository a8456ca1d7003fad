//! Yield-curve CSV input and the ACT/365.25 day count.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: f64 = 365.25;

/// Year fraction between two dates, ACT/365.25.
pub fn year_fraction(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64 / DAYS_PER_YEAR
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .map_err(|_| Error::Data(format!("unrecognized date '{s}' (expected YYYY-MM-DD or M/D/YYYY)")))
}

/// A numeric table keyed by column name, one row per maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    /// Times to maturity in years.
    pub maturities: Vec<f64>,
    /// Remaining numeric columns; empty cells and `---` become `None`.
    pub columns: BTreeMap<String, Vec<Option<f64>>>,
    /// Date the maturities were measured from, when they came from dates.
    pub valuation_date: Option<NaiveDate>,
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Data(format!("missing column '{name}'")))
    }
}

fn cell_value(raw: &str, line: u64, name: &str) -> Result<Option<f64>> {
    let s = raw.trim();
    if s.is_empty() || s.chars().all(|c| c == '-') {
        return Ok(None);
    }
    s.replace('\u{2212}', "-")
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Data(format!("line {line}: column '{name}' has non-numeric value '{s}'")))
}

/// Finds a `# valuation_date: YYYY-MM-DD` line among the leading comments.
fn valuation_directive(text: &str) -> Result<Option<NaiveDate>> {
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else { break };
        if let Some(value) = comment.trim().strip_prefix("valuation_date:") {
            return parse_date(value).map(Some).map_err(|e| Error::Data(format!("line {}: {e}", i + 1)));
        }
    }
    Ok(None)
}

/// Reads a curve table. The maturity comes from `maturity_years` or, when
/// absent, from `maturity_date` measured from the valuation date. An explicit
/// `valuation` wins over a `# valuation_date:` header line.
pub fn read_table<R: Read>(mut reader: R, valuation: Option<NaiveDate>) -> Result<CurveTable> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| Error::Data(format!("unreadable input: {e}")))?;
    let valuation = match valuation {
        Some(v) => Some(v),
        None => valuation_directive(&text)?,
    };
    let mut rdr =
        csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(format!("line 1: {e}")))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let years_col = find("maturity_years").or_else(|| find("maturity"));
    let date_col = find("maturity_date").or_else(|| find("date"));
    let maturity_source = match (years_col, date_col, valuation) {
        (Some(c), _, _) => (c, false),
        (None, Some(c), Some(_)) => (c, true),
        (None, Some(_), None) => {
            return Err(Error::Data(
                "maturity_date column needs a valuation date (flag or '# valuation_date:' header)".into(),
            ));
        }
        (None, None, _) => {
            return Err(Error::Data("line 1: missing column 'maturity_years' or 'maturity_date'".into()));
        }
    };
    let value_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, h)| i != maturity_source.0 && Some(i) != date_col && Some(i) != years_col && !h.is_empty())
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let used_dates = maturity_source.1;
    let mut table = CurveTable {
        maturities: Vec::new(),
        columns: BTreeMap::new(),
        valuation_date: if used_dates { valuation } else { None },
    };
    for (_, name) in &value_cols {
        table.columns.insert(name.clone(), Vec::new());
    }
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Data(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record
            .get(maturity_source.0)
            .ok_or_else(|| Error::Data(format!("line {line}: missing maturity")))?;
        let maturity = if maturity_source.1 {
            let date = parse_date(raw).map_err(|e| Error::Data(format!("line {line}: {e}")))?;
            year_fraction(valuation.expect("checked above"), date)
        } else {
            cell_value(raw, line, "maturity_years")?
                .ok_or_else(|| Error::Data(format!("line {line}: empty maturity")))?
        };
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::Data(format!("line {line}: maturity must be positive, got {maturity}")));
        }
        if let Some(&prev) = table.maturities.last() {
            if maturity <= prev {
                return Err(Error::Data(format!("line {line}: maturities must be strictly increasing")));
            }
        }
        table.maturities.push(maturity);
        for (i, name) in &value_cols {
            let v = cell_value(record.get(*i).unwrap_or(""), line, name)?;
            table.columns.get_mut(name).expect("inserted above").push(v);
        }
    }
    if table.maturities.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    Ok(table)
}

pub fn read_table_file(path: &Path, valuation: Option<NaiveDate>) -> Result<CurveTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    read_table(file, valuation).map_err(|e| match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}
