//! Daily time-series CSV files: `date,<region1>,<region2>,...`.
//!
//! All years have 365 days. February 29 is dropped on reading and skipped
//! when generating dates, so day-of-year labels run `1..=365` everywhere.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};
use windflex_core::calendar::{Calendar, CalendarDay, Weekday};
use windflex_core::weather::CapacityFactorSeries;
use windflex_core::Matrix;

use crate::error::{display, IoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    CapacityFactor,
    Temperature,
    Load,
}

impl SeriesKind {
    pub fn label(self) -> &'static str {
        match self {
            SeriesKind::CapacityFactor => "cf",
            SeriesKind::Temperature => "temperature",
            SeriesKind::Load => "load",
        }
    }

    fn range(self) -> &'static str {
        match self {
            SeriesKind::CapacityFactor => "[0, 1)",
            SeriesKind::Temperature => "[-60, 50] degC",
            SeriesKind::Load => "[0, inf) MW",
        }
    }

    fn accepts(self, v: f64) -> bool {
        match self {
            SeriesKind::CapacityFactor => (0.0..1.0).contains(&v),
            SeriesKind::Temperature => (-60.0..=50.0).contains(&v),
            SeriesKind::Load => v >= 0.0 && v.is_finite(),
        }
    }
}

/// A validated daily series on the 365-day calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub kind: SeriesKind,
    pub regions: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// One row per date, one column per region.
    pub values: Matrix,
}

fn is_leap_day(d: NaiveDate) -> bool {
    d.month() == 2 && d.day() == 29
}

/// Day after `d` on the 365-day calendar.
pub fn next_day(d: NaiveDate) -> NaiveDate {
    let n = d + Days::new(1);
    if is_leap_day(n) {
        n + Days::new(1)
    } else {
        n
    }
}

/// Day of year in `1..=365`, counting as if February 29 did not exist.
pub fn day_of_year(d: NaiveDate) -> u16 {
    let ord = d.ordinal() as u16;
    if d.leap_year() && d.month() > 2 {
        ord - 1
    } else {
        ord
    }
}

/// `n` consecutive 365-day-calendar dates starting at `start`.
pub fn date_range(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = if is_leap_day(start) {
        next_day(start)
    } else {
        start
    };
    for _ in 0..n {
        out.push(d);
        d = next_day(d);
    }
    out
}

fn weekday(d: NaiveDate) -> Weekday {
    Weekday::from_index(d.weekday().num_days_from_monday() as usize)
}

impl TimeSeries {
    pub fn new(
        kind: SeriesKind,
        regions: Vec<String>,
        dates: Vec<NaiveDate>,
        values: Matrix,
    ) -> Result<Self> {
        if regions.len() != values.cols() || dates.len() != values.rows() {
            return Err(IoError::invalid(
                kind.label(),
                format!(
                    "{} regions and {} dates for a {}x{} table",
                    regions.len(),
                    dates.len(),
                    values.rows(),
                    values.cols()
                ),
            ));
        }
        Ok(TimeSeries {
            kind,
            regions,
            dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn day_of_year(&self) -> Vec<u16> {
        self.dates.iter().map(|&d| day_of_year(d)).collect()
    }

    /// Weekdays of the actual dates; `holidays` are day-of-year numbers.
    pub fn calendar(&self, holidays: &[u16]) -> Calendar {
        Calendar::new(
            self.dates
                .iter()
                .map(|&d| CalendarDay {
                    weekday: weekday(d),
                    holiday: holidays.contains(&day_of_year(d)),
                })
                .collect(),
        )
    }

    pub fn to_capacity_factors(&self) -> Result<CapacityFactorSeries> {
        CapacityFactorSeries::new(
            self.regions.clone(),
            self.values.clone(),
            self.day_of_year(),
        )
        .map_err(|e| IoError::model(self.kind.label(), e))
    }

    /// Rows whose dates fall in `from..=to`.
    pub fn between(&self, from: NaiveDate, to: NaiveDate) -> TimeSeries {
        let start = self.dates.partition_point(|d| *d < from);
        let end = self.dates.partition_point(|d| *d <= to);
        TimeSeries {
            kind: self.kind,
            regions: self.regions.clone(),
            dates: self.dates[start..end].to_vec(),
            values: self.values.slice_rows(start, end),
        }
    }
}

/// Read and validate a series file.
pub fn ingest_timeseries(path: &Path, kind: SeriesKind) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_timeseries(file, &display(path), kind)
}

/// Read and validate a series from any reader; `source` names it in errors.
pub fn read_timeseries<R: Read>(reader: R, source: &str, kind: SeriesKind) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |row: u64, column: &str, message: String| IoError::Parse {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, "header", e.to_string()))?
        .clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(parse_err(
            1,
            "header",
            "expected `date,<region1>,<region2>,...`".into(),
        ));
    }
    let regions: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut data = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            parse_err(row, "record", e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_err(
                row,
                "record",
                format!("{} fields, header has {}", record.len(), header.len()),
            ));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            parse_err(
                row,
                "date",
                format!("`{}` is not an ISO date: {e}", &record[0]),
            )
        })?;
        if is_leap_day(date) {
            continue;
        }
        if let Some(&prev) = dates.last() {
            let expected = next_day(prev);
            if date != expected {
                return Err(IoError::GapDetected {
                    path: source.to_string(),
                    row,
                    expected,
                    found: date,
                });
            }
        }
        for (k, field) in record.iter().enumerate().skip(1) {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(row, &regions[k - 1], format!("`{field}` is not a number"))
            })?;
            if !kind.accepts(v) {
                return Err(IoError::RangeViolation {
                    path: source.to_string(),
                    row,
                    column: regions[k - 1].clone(),
                    value: v,
                    range: kind.range(),
                });
            }
            data.push(v);
        }
        dates.push(date);
    }
    if dates.is_empty() {
        return Err(IoError::invalid(source, "no data rows"));
    }
    let values = Matrix::from_vec(dates.len(), regions.len(), data)
        .map_err(|e| IoError::model(source, e))?;
    TimeSeries::new(kind, regions, dates, values)
}

pub fn write_timeseries<W: Write>(writer: W, series: &TimeSeries) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(series.regions.iter().cloned());
    w.write_record(&header)?;
    for (t, d) in series.dates.iter().enumerate() {
        let mut rec = vec![d.format("%Y-%m-%d").to_string()];
        rec.extend(series.values.row(t).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn leap_years_keep_365_labels() {
        assert_eq!(day_of_year(ymd(2020, 2, 28)), 59);
        assert_eq!(day_of_year(ymd(2020, 3, 1)), 60);
        assert_eq!(day_of_year(ymd(2020, 12, 31)), 365);
        assert_eq!(day_of_year(ymd(2019, 12, 31)), 365);
        assert_eq!(next_day(ymd(2020, 2, 28)), ymd(2020, 3, 1));
        let r = date_range(ymd(2019, 1, 1), 730);
        assert_eq!(r[729], ymd(2020, 12, 31));
    }
}
