//! CSV input: price tables for screening and two-column samples.
//!
//! A price table has a header row; the first column holds time labels
//! (ISO `YYYY-MM-DD`, `YYYY/MM/DD`, `MM/DD/YYYY`, `DD.MM.YYYY`, or plain
//! integers), every other column is one named series. Blank cells and
//! `NA`, `N/A`, `null` are missing values. Rows are numbered as file lines,
//! header included.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use tktp_core::screen::PriceTable;
use tktp_core::Sample;

use crate::error::{AppError, Result};

const DATE_FORMATS: [&str; 4] = ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%d.%m.%Y"];

/// Sort key of a time label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TimeKey {
    Date(NaiveDate),
    Index(i64),
}

pub fn parse_time_label(s: &str) -> Option<TimeKey> {
    let s = s.trim();
    if let Ok(i) = s.parse::<i64>() {
        return Some(TimeKey::Index(i));
    }
    DATE_FORMATS.iter().find_map(|f| NaiveDate::parse_from_str(s, f).ok()).map(TimeKey::Date)
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "N/A" | "na" | "null")
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| AppError::io(path, e))
}

fn csv_row(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}

pub fn load_table(path: &Path) -> Result<PriceTable> {
    read_table(open(path)?, path)
}

/// Parses a price table; `path` only labels error messages.
pub fn read_table<R: Read>(input: R, path: &Path) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| AppError::row(path, csv_row(&e), e.to_string()))?.clone();
    if header.len() < 2 {
        return Err(AppError::row(path, 1, "header needs a time column and at least one series"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(AppError::row(path, 1, format!("series {} has an empty name", i + 1)));
        }
        if names[..i].contains(name) {
            return Err(AppError::row(path, 1, format!("duplicate series name {name:?}")));
        }
    }

    let mut labels = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    let mut last: Option<TimeKey> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| AppError::row(path, csv_row(&e), e.to_string()))?;
        let row = record.position().map_or(labels.len() + 2, |p| p.line() as usize);
        let label = &record[0];
        let key = parse_time_label(label)
            .ok_or_else(|| AppError::row(path, row, format!("cannot parse time label {label:?}")))?;
        if let Some(prev) = last {
            if std::mem::discriminant(&prev) != std::mem::discriminant(&key) {
                return Err(AppError::row(path, row, "time labels mix dates and integers"));
            }
            if key == prev {
                return Err(AppError::row(path, row, format!("duplicate time label {label:?}")));
            }
            if key < prev {
                return Err(AppError::row(path, row, format!("time label {label:?} is out of order")));
            }
        }
        last = Some(key);
        labels.push(label.to_string());
        for (j, cell) in record.iter().skip(1).enumerate() {
            let value = if is_missing(cell) {
                None
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    AppError::row(path, row, format!("cannot parse {cell:?} in series {:?}", names[j]))
                })?;
                if !v.is_finite() {
                    return Err(AppError::row(path, row, format!("non-finite value in series {:?}", names[j])));
                }
                Some(v)
            };
            columns[j].push(value);
        }
    }
    if labels.is_empty() {
        return Err(AppError::data(path, "no data rows"));
    }
    Ok(PriceTable::new(labels, names.into_iter().zip(columns).collect())?)
}

pub fn load_sample(path: &Path) -> Result<Sample> {
    read_sample(open(path)?, path)
}

/// Two numeric columns `x,y`, optionally preceded by a header row. An
/// optional third column holds positive integer observation identifiers.
pub fn read_sample<R: Read>(input: R, path: &Path) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let (mut x, mut y, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    let mut width = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| AppError::row(path, csv_row(&e), e.to_string()))?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if !(2..=3).contains(&record.len()) {
            return Err(AppError::row(path, row, format!("expected 2 or 3 columns, found {}", record.len())));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        let (Ok(a), Ok(b)) = parsed else {
            if i == 0 {
                continue;
            }
            return Err(AppError::row(path, row, "expected two numeric values"));
        };
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(AppError::row(path, row, "inconsistent column count"));
        }
        if record.len() == 3 {
            let id = record[2]
                .parse::<usize>()
                .map_err(|_| AppError::row(path, row, format!("bad identifier {:?}", &record[2])))?;
            ids.push(id);
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(AppError::row(path, row, "non-finite value"));
        }
        x.push(a);
        y.push(b);
    }
    if x.is_empty() {
        return Err(AppError::Usage(format!("{}: no observations", path.display())));
    }
    let s = if ids.is_empty() { Sample::new(x, y) } else { Sample::with_ids(x, y, ids) };
    Ok(s?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Result<PriceTable> {
        read_table(text.as_bytes(), Path::new("t.csv"))
    }

    #[test]
    fn well_formed_table() {
        let t = table("date,oil,a\n2020-01-03,1.5,2\n2020-01-10,1.6,\n2020-01-17,1.7,4\n").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.series("a").unwrap(), &[Some(2.0), None, Some(4.0)]);
        assert!(!t.is_complete("a").unwrap());
    }

    #[test]
    fn table_errors_carry_rows() {
        let e = table("date,oil\n2020-01-10,1\n2020-01-03,2\n").unwrap_err();
        assert!(matches!(e, AppError::Row { row: 3, .. }), "{e}");
        let e = table("date,oil\n2020-01-10,1\n2020-01-10,2\n").unwrap_err();
        assert!(e.to_string().contains("duplicate"));
        let e = table("date,oil,oil\n2020-01-10,1,2\n").unwrap_err();
        assert!(matches!(e, AppError::Row { row: 1, .. }));
        let e = table("date,oil\n2020-01-10,1\nnot-a-date,2\n").unwrap_err();
        assert!(matches!(e, AppError::Row { row: 3, .. }));
        let e = table("date,oil\n2020-01-10,abc\n").unwrap_err();
        assert!(matches!(e, AppError::Row { row: 2, .. }));
        let e = table("date,oil\n2020-01-10,1,3\n").unwrap_err();
        assert!(matches!(e, AppError::Row { row: 2, .. }), "{e}");
    }

    #[test]
    fn label_formats() {
        assert!(parse_time_label("2020-02-29").is_some());
        assert!(parse_time_label("12/31/1999").is_some());
        assert_eq!(parse_time_label("17"), Some(TimeKey::Index(17)));
        assert!(parse_time_label("2020-13-01").is_none());
        assert!(table("t,a\n1,1\n2020-01-01,2\n").is_err());
    }

    #[test]
    fn samples() {
        let read = |t: &str| read_sample(t.as_bytes(), Path::new("s.csv"));
        let s = read("x,y\n1,4\n2,3\n4,1\n").unwrap();
        assert_eq!(s.y(), &[4.0, 3.0, 1.0]);
        let s = read("1,4,10\n2,3,20\n").unwrap();
        assert_eq!(s.ids(), &[10, 20]);
        assert!(matches!(read(""), Err(AppError::Usage(_))));
        assert!(matches!(read("x,y\n"), Err(AppError::Usage(_))));
        assert!(matches!(read("1,2\n3,z\n"), Err(AppError::Row { row: 2, .. })));
        assert!(read("1,2\n").is_err());
    }
}
