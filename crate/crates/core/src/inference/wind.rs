//! Parser for the StatLib Irish wind file and generic one-column series.
//!
//! Each data row is `YY MM DD` followed by twelve station daily mean speeds in
//! knots. An optional header row naming the columns is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

/// Station codes in file column order.
pub const STATIONS: [&str; 12] = [
    "RPT", "VAL", "ROS", "KIL", "SHA", "BIR", "DUB", "CLA", "MUL", "CLO", "BEL", "MAL",
];

pub const MAX_SPEED: f64 = 80.0;

/// Day in a 365-day calendar: February 29 has no slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CalendarDay {
    pub year: i32,
    /// 1..=365.
    pub day: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub values: Vec<f64>,
    pub calendar: Vec<CalendarDay>,
}

impl DailySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks strictly increasing, gap-free calendar.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.calendar.len() {
            return Err(GwmError::InsufficientData("values and calendar differ in length".into()));
        }
        for (i, w) in self.calendar.windows(2).enumerate() {
            if next_day(w[0]) != w[1] {
                return Err(GwmError::InsufficientData(format!(
                    "calendar gap or disorder between entries {} and {}: {:?} -> {:?}",
                    i,
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

fn next_day(d: CalendarDay) -> CalendarDay {
    if d.day == 365 {
        CalendarDay { year: d.year + 1, day: 1 }
    } else {
        CalendarDay { year: d.year, day: d.day + 1 }
    }
}

const MONTH_START: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];
const MONTH_LEN: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// Day index in the 365-day calendar, or `None` for February 29.
fn day_of_year(year: i32, month: u32, day: u32) -> std::result::Result<Option<u32>, String> {
    if !(1..=12).contains(&month) {
        return Err(format!("month {month} out of range"));
    }
    let m = (month - 1) as usize;
    if month == 2 && day == 29 {
        return if is_leap(year) { Ok(None) } else { Err(format!("February 29 in non-leap year {year}")) };
    }
    if day == 0 || day > MONTH_LEN[m] {
        return Err(format!("day {day} out of range for month {month}"));
    }
    Ok(Some(MONTH_START[m] + day))
}

/// Which station column to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Station {
    /// 0-based index into the twelve station columns.
    Index(usize),
    Name(String),
}

impl Default for Station {
    fn default() -> Self {
        Station::Index(0)
    }
}

impl std::str::FromStr for Station {
    type Err = GwmError;

    /// A number is a 1-based column among the stations; anything else a code.
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(GwmError::InvalidParameter("station columns are numbered from 1".into())),
            Ok(k) => Ok(Station::Index(k - 1)),
            Err(_) => Ok(Station::Name(s.to_ascii_uppercase())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindQuery {
    pub station: Station,
    /// Inclusive four-digit year range.
    pub years: (i32, i32),
}

impl Default for WindQuery {
    fn default() -> Self {
        WindQuery {
            station: Station::default(),
            years: (1973, 1978),
        }
    }
}

/// Parses the wind file and extracts one station over the year range.
///
/// Every data row is validated (field count, date, speed range) even when it
/// falls outside the range. The selected span must be complete: one row per
/// day, February 29 dropped.
pub fn parse_wind(text: &str, q: &WindQuery) -> Result<DailySeries> {
    let mut names: Vec<String> = STATIONS.iter().map(|s| s.to_string()).collect();
    let mut values = Vec::new();
    let mut calendar = Vec::new();
    let mut seen_data = false;
    let mut column: Option<usize> = None;
    let resolve = |names: &[String]| -> Result<usize> {
        match &q.station {
            Station::Index(k) if *k < 12 => Ok(*k),
            Station::Index(k) => Err(GwmError::InvalidParameter(format!("station column {} out of 1..=12", k + 1))),
            Station::Name(n) => names
                .iter()
                .position(|s| s.eq_ignore_ascii_case(n))
                .ok_or_else(|| GwmError::InvalidParameter(format!("unknown station {n}"))),
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if !seen_data && fields[0].parse::<f64>().is_err() {
            if fields.len() != 15 {
                return Err(GwmError::Parse {
                    line,
                    msg: format!("header has {} columns, expected 15", fields.len()),
                });
            }
            names = fields[3..].iter().map(|s| s.to_ascii_uppercase()).collect();
            continue;
        }
        seen_data = true;
        let col = match column {
            Some(c) => c,
            None => {
                let c = resolve(&names)?;
                column = Some(c);
                c
            }
        };
        if fields.len() != 15 {
            return Err(GwmError::Parse {
                line,
                msg: format!("expected 15 fields, found {}", fields.len()),
            });
        }
        let int = |s: &str, what: &str| {
            s.parse::<u32>().map_err(|_| GwmError::Parse {
                line,
                msg: format!("bad {what} {s:?}"),
            })
        };
        let yy = int(fields[0], "year")?;
        if yy > 99 {
            return Err(GwmError::Parse {
                line,
                msg: format!("year {yy} is not two digits"),
            });
        }
        let year = 1900 + yy as i32;
        let month = int(fields[1], "month")?;
        let day = int(fields[2], "day")?;
        let doy = day_of_year(year, month, day).map_err(|msg| GwmError::Parse { line, msg })?;
        let mut speeds = [0.0; 12];
        for (k, s) in fields[3..].iter().enumerate() {
            let v: f64 = s.parse().map_err(|_| GwmError::Parse {
                line,
                msg: format!("bad speed {s:?} in station column {}", k + 1),
            })?;
            if !(0.0..=MAX_SPEED).contains(&v) {
                return Err(GwmError::Parse {
                    line,
                    msg: format!("speed {v} outside [0, {MAX_SPEED}] knots"),
                });
            }
            speeds[k] = v;
        }
        let Some(doy) = doy else { continue };
        if year < q.years.0 || year > q.years.1 {
            continue;
        }
        let d = CalendarDay { year, day: doy };
        if let Some(&prev) = calendar.last() {
            if next_day(prev) != d {
                return Err(GwmError::Parse {
                    line,
                    msg: format!("expected {:?} after {:?}, found {:?}", next_day(prev), prev, d),
                });
            }
        } else if doy != 1 || year != q.years.0 {
            return Err(GwmError::Parse {
                line,
                msg: format!("selected span must start on {}-01-01", q.years.0),
            });
        }
        calendar.push(d);
        values.push(speeds[col]);
    }
    let expected = 365 * (q.years.1 - q.years.0 + 1).max(0) as usize;
    if values.len() != expected {
        return Err(GwmError::InsufficientData(format!(
            "found {} days in {}..={}, expected {expected}",
            values.len(),
            q.years.0,
            q.years.1
        )));
    }
    Ok(DailySeries { values, calendar })
}

/// One number per non-blank line; `#` starts a comment. A first line that
/// does not parse is taken as a header.
pub fn parse_single_column(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => {
                return Err(GwmError::Parse {
                    line: i + 1,
                    msg: "non-finite value".into(),
                })
            }
            Err(_) if out.is_empty() && i == 0 => continue,
            Err(_) => {
                return Err(GwmError::Parse {
                    line: i + 1,
                    msg: format!("not a number: {s:?}"),
                })
            }
        }
    }
    Ok(out)
}
