//! Hourly panel ingestion, clock-change repair and calendar dummies.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable labels in panel order.
pub const VARIABLES: [&str; 4] = ["price", "demand", "wind", "solar"];

/// Hours (inclusive) for which solar is part of the panel.
pub const SOLAR_HOURS: std::ops::RangeInclusive<u8> = 8..=16;

pub const N_DUMMIES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawHourlyRecord {
    pub date: NaiveDate,
    pub hour: u8,
    pub price: f64,
    pub demand: f64,
    pub wind: f64,
    pub solar: Option<f64>,
}

impl RawHourlyRecord {
    fn key(&self) -> (NaiveDate, u8) {
        (self.date, self.hour)
    }
}

/// Header names of the input columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub date: String,
    pub hour: String,
    pub price: String,
    pub demand: String,
    pub wind: String,
    pub solar: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            hour: "hour".into(),
            price: "price".into(),
            demand: "demand".into(),
            wind: "wind".into(),
            solar: "solar".into(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<Vec<RawHourlyRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file, schema)
}

/// Parses hourly records from CSV and orders them by (date, hour).
///
/// Duplicate keys are rejected unless they form a clock-change day: 25 rows
/// covering all 24 hours with exactly one hour doubled.
pub fn read_records<R: Read>(reader: R, schema: &ColumnSchema) -> Result<Vec<RawHourlyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| find(name).ok_or_else(|| Error::Schema(format!("missing column '{name}'")));
    let i_date = need(&schema.date)?;
    let i_hour = need(&schema.hour)?;
    let i_price = need(&schema.price)?;
    let i_demand = need(&schema.demand)?;
    let i_wind = need(&schema.wind)?;
    let i_solar = find(&schema.solar);

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Row { line, message };
        let field = |i: usize| row.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(i_date), "%Y-%m-%d")
            .map_err(|e| err(format!("bad date '{}': {e}", field(i_date))))?;
        let hour: u8 = field(i_hour)
            .parse()
            .ok()
            .filter(|h| *h < 24)
            .ok_or_else(|| err(format!("bad hour '{}'", field(i_hour))))?;
        let number = |i: usize, name: &str| -> Result<f64> {
            let s = field(i);
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {name} value '{s}'")))
        };
        let solar = match i_solar.map(field) {
            None | Some("") => None,
            Some(_) => Some(number(i_solar.unwrap(), "solar")?),
        };
        out.push(RawHourlyRecord {
            date,
            hour,
            price: number(i_price, "price")?,
            demand: number(i_demand, "demand")?,
            wind: number(i_wind, "wind")?,
            solar,
        });
    }
    out.sort_by_key(|r| r.key());
    check_duplicates(&out)?;
    Ok(out)
}

fn check_duplicates(sorted: &[RawHourlyRecord]) -> Result<()> {
    let mut by_day: BTreeMap<NaiveDate, Vec<u8>> = BTreeMap::new();
    for r in sorted {
        by_day.entry(r.date).or_default().push(r.hour);
    }
    for (date, hours) in by_day {
        let dups: Vec<u8> = hours.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
        if dups.is_empty() {
            continue;
        }
        let mut distinct = hours.clone();
        distinct.dedup();
        let clock_change = hours.len() == 25 && distinct.len() == 24 && dups.len() == 1;
        if !clock_change {
            return Err(Error::DuplicateKey { date, hour: dups[0] });
        }
    }
    Ok(())
}

pub fn write_records_csv<W: Write>(writer: W, records: &[RawHourlyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "hour", "price", "demand", "wind", "solar"])?;
    for r in records {
        w.write_record([
            r.date.to_string(),
            r.hour.to_string(),
            r.price.to_string(),
            r.demand.to_string(),
            r.wind.to_string(),
            r.solar.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockFix {
    pub records: Vec<RawHourlyRecord>,
    /// Repeated autumn hours that were dropped (the first record is kept).
    pub dropped: Vec<(NaiveDate, u8)>,
    /// Missing spring hours that were filled in.
    pub interpolated: Vec<(NaiveDate, u8)>,
}

/// Drops repeated hours and fills a single missing hour per day by linear
/// interpolation between its neighbours (an edge hour copies its one
/// neighbour). Output has 24 records for every day present in the input.
pub fn fix_clock_changes(records: &[RawHourlyRecord]) -> Result<ClockFix> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&RawHourlyRecord>> = BTreeMap::new();
    for r in records {
        by_day.entry(r.date).or_default().push(r);
    }
    let mut out = Vec::with_capacity(by_day.len() * 24);
    let mut dropped = Vec::new();
    let mut interpolated = Vec::new();
    for (date, rows) in by_day {
        let mut slots: [Option<RawHourlyRecord>; 24] = [None; 24];
        for r in rows {
            let slot = &mut slots[r.hour as usize];
            if slot.is_some() {
                dropped.push((date, r.hour));
            } else {
                *slot = Some(*r);
            }
        }
        let missing: Vec<u8> = (0..24u8).filter(|&h| slots[h as usize].is_none()).collect();
        if missing.len() > 1 {
            return Err(Error::UnrecoverableGap { date, missing });
        }
        if let Some(&h) = missing.first() {
            let prev = h.checked_sub(1).and_then(|p| slots[p as usize]);
            let next = slots.get(h as usize + 1).copied().flatten();
            let filled = match (prev, next) {
                (Some(a), Some(b)) => RawHourlyRecord {
                    date,
                    hour: h,
                    price: 0.5 * (a.price + b.price),
                    demand: 0.5 * (a.demand + b.demand),
                    wind: 0.5 * (a.wind + b.wind),
                    solar: match (a.solar, b.solar) {
                        (Some(x), Some(y)) => Some(0.5 * (x + y)),
                        (x, y) => x.or(y),
                    },
                },
                (Some(a), None) | (None, Some(a)) => RawHourlyRecord { hour: h, ..a },
                (None, None) => unreachable!("a day with 23 present hours has a neighbour"),
            };
            slots[h as usize] = Some(filled);
            interpolated.push((date, h));
        }
        out.extend(slots.into_iter().flatten());
    }
    Ok(ClockFix { records: out, dropped, interpolated })
}

/// Calendar regressors: 12 month indicators (Jan..Dec), then Saturday and
/// Sunday.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarDummies {
    pub rows: Vec<[f64; N_DUMMIES]>,
}

impl CalendarDummies {
    pub fn column_names() -> [&'static str; N_DUMMIES] {
        [
            "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec", "sat", "sun",
        ]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_sums(&self) -> [f64; N_DUMMIES] {
        let mut s = [0.0; N_DUMMIES];
        for r in &self.rows {
            for (a, b) in s.iter_mut().zip(r) {
                *a += b;
            }
        }
        s
    }
}

pub fn build_dummies(dates: &[NaiveDate]) -> CalendarDummies {
    let rows = dates
        .iter()
        .map(|d| {
            let mut row = [0.0; N_DUMMIES];
            row[d.month0() as usize] = 1.0;
            match d.weekday() {
                Weekday::Sat => row[12] = 1.0,
                Weekday::Sun => row[13] = 1.0,
                _ => {}
            }
            row
        })
        .collect();
    CalendarDummies { rows }
}

/// One hour-of-day slice: T daily observations of 3 or 4 variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyPanel {
    pub hour: u8,
    pub dates: Vec<NaiveDate>,
    /// Row-major, `values[t][j]` for day `t` and variable `j`.
    pub values: Vec<Vec<f64>>,
    pub variable_names: Vec<String>,
}

pub fn has_solar(hour: u8) -> bool {
    SOLAR_HOURS.contains(&hour)
}

impl HourlyPanel {
    pub fn n_vars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Days `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> HourlyPanel {
        HourlyPanel {
            hour: self.hour,
            dates: self.dates[start..start + len].to_vec(),
            values: self.values[start..start + len].to_vec(),
            variable_names: self.variable_names.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hour > 23 {
            return Err(Error::Domain(format!("hour {} outside 0..=23", self.hour)));
        }
        let n = if has_solar(self.hour) { 4 } else { 3 };
        if self.n_vars() != n || self.variable_names.iter().zip(VARIABLES).any(|(a, b)| a != b) {
            return Err(Error::Schema(format!(
                "hour {} panel must hold {:?}, found {:?}",
                self.hour,
                &VARIABLES[..n],
                self.variable_names
            )));
        }
        if self.values.len() != self.dates.len() {
            return Err(Error::Schema("panel dates and rows differ in length".into()));
        }
        for w in self.dates.windows(2) {
            if w[1] - w[0] != Duration::days(1) {
                return Err(Error::MissingDays { hour: self.hour, dates: missing_between(w[0], w[1]) });
            }
        }
        if self.values.iter().any(|r| r.len() != n || r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Schema("panel values must be finite with one entry per variable".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string(), "hour".to_string()];
        header.extend(self.variable_names.iter().cloned());
        w.write_record(&header)?;
        for (d, row) in self.dates.iter().zip(&self.values) {
            let mut rec = vec![d.to_string(), self.hour.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<HourlyPanel> {
        let records = read_records(reader, &ColumnSchema::default())?;
        let hour = records
            .first()
            .map(|r| r.hour)
            .ok_or_else(|| Error::Schema("panel file has no rows".into()))?;
        if records.iter().any(|r| r.hour != hour) {
            return Err(Error::Schema("panel file mixes several hours".into()));
        }
        slice_hour(&records, hour)
    }
}

fn missing_between(a: NaiveDate, b: NaiveDate) -> Vec<NaiveDate> {
    a.iter_days().skip(1).take_while(|d| *d < b).collect()
}

/// Extracts the panel for one hour of the day.
pub fn slice_hour(records: &[RawHourlyRecord], hour: u8) -> Result<HourlyPanel> {
    if hour > 23 {
        return Err(Error::Domain(format!("hour {hour} outside 0..=23")));
    }
    let solar = has_solar(hour);
    let n = if solar { 4 } else { 3 };
    let mut rows: BTreeMap<NaiveDate, &RawHourlyRecord> = BTreeMap::new();
    for r in records.iter().filter(|r| r.hour == hour) {
        rows.entry(r.date).or_insert(r);
    }
    let (first, last) = match (rows.keys().next(), rows.keys().next_back()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::MissingDays { hour, dates: vec![] }),
    };
    let mut missing: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).filter(|d| !rows.contains_key(d)).collect();
    if solar {
        missing.extend(rows.values().filter(|r| r.solar.is_none()).map(|r| r.date));
        missing.sort();
    }
    if !missing.is_empty() {
        return Err(Error::MissingDays { hour, dates: missing });
    }
    let values = rows
        .values()
        .map(|r| {
            let mut v = vec![r.price, r.demand, r.wind];
            if solar {
                v.push(r.solar.expect("checked above"));
            }
            v
        })
        .collect();
    Ok(HourlyPanel {
        hour,
        dates: rows.keys().copied().collect(),
        values,
        variable_names: VARIABLES[..n].iter().map(|s| s.to_string()).collect(),
    })
}
