//! Solar Hijri (Jalali) record dates.
//!
//! Publication dates arrive as free text ("Sunday, July 11, 1402", "1402/04/11",
//! "04/04/1402"). Only the numeric day, month and year tokens are kept; weekday
//! names are ignored. English month names are read the way the source site's
//! translations use them: each Jalali month is rendered with the Gregorian
//! month it mostly overlaps (Tir, the fourth month, is "July").
//!
//! Conversion uses the 33-year-break arithmetic of the Iranian civil calendar,
//! valid for Jalali years -61..=3177.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Break years of the leap cycle table.
const BREAKS: [i64; 20] = [
    -61, 9, 38, 199, 426, 686, 756, 818, 1111, 1181, 1210, 1635, 2060, 2097, 2192, 2262, 2324,
    2394, 2456, 3178,
];

const PERSIAN_MONTHS: [&str; 12] = [
    "farvardin",
    "ordibehesht",
    "khordad",
    "tir",
    "mordad",
    "shahrivar",
    "mehr",
    "aban",
    "azar",
    "dey",
    "bahman",
    "esfand",
];

const PERSIAN_MONTHS_NATIVE: [&str; 12] = [
    "فروردین",
    "اردیبهشت",
    "خرداد",
    "تیر",
    "مرداد",
    "شهریور",
    "مهر",
    "آبان",
    "آذر",
    "دی",
    "بهمن",
    "اسفند",
];

/// English month names as they appear in translated listings, mapped to the
/// Jalali month they stand for.
const ENGLISH_MONTHS: [(&str, u8); 12] = [
    ("april", 1),
    ("may", 2),
    ("june", 3),
    ("july", 4),
    ("august", 5),
    ("september", 6),
    ("october", 7),
    ("november", 8),
    ("december", 9),
    ("january", 10),
    ("february", 11),
    ("march", 12),
];

/// A Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GregorianDate {
    pub year: i32,
    pub month: u8,
    pub day: u8,
}

/// A record's publication date: the text as published plus its Jalali
/// components and derived Gregorian year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordDate {
    pub raw: String,
    pub jalali_year: i32,
    pub jalali_month: u8,
    pub jalali_day: u8,
    pub gregorian_year: i32,
}

impl RecordDate {
    pub fn from_jalali(
        raw: impl Into<String>,
        year: i32,
        month: u8,
        day: u8,
    ) -> Result<Self, CorpusError> {
        let raw = raw.into();
        let gregorian_year = jalali_to_gregorian_year(year, month, day)
            .map_err(|_| CorpusError::MalformedDate(raw.clone()))?;
        Ok(Self {
            raw,
            jalali_year: year,
            jalali_month: month,
            jalali_day: day,
            gregorian_year,
        })
    }

    /// Parses a published date string.
    pub fn parse(raw: &str) -> Result<Self, CorpusError> {
        let malformed = || CorpusError::MalformedDate(raw.to_string());
        let (year, month, day) = parse_components(raw).ok_or_else(malformed)?;
        let year = i32::try_from(year).map_err(|_| malformed())?;
        let month = u8::try_from(month).map_err(|_| malformed())?;
        let day = u8::try_from(day).map_err(|_| malformed())?;
        Self::from_jalali(raw, year, month, day)
    }

    pub fn to_gregorian(&self) -> GregorianDate {
        // Components were validated at construction.
        jalali_to_gregorian(self.jalali_year, self.jalali_month, self.jalali_day)
            .expect("validated jalali date")
    }
}

impl fmt::Display for RecordDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl Serialize for RecordDate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for RecordDate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        RecordDate::parse(&raw).map_err(serde::de::Error::custom)
    }
}

fn ascii_digits(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{06F0}'..='\u{06F9}' => char::from(b'0' + (c as u32 - 0x06F0) as u8),
            '\u{0660}'..='\u{0669}' => char::from(b'0' + (c as u32 - 0x0660) as u8),
            _ => c,
        })
        .collect()
}

fn month_from_name(word: &str) -> Option<u8> {
    let lower = word.to_lowercase();
    if let Some(&(_, m)) = ENGLISH_MONTHS.iter().find(|(name, _)| *name == lower) {
        return Some(m);
    }
    PERSIAN_MONTHS
        .iter()
        .position(|name| *name == lower)
        .or_else(|| PERSIAN_MONTHS_NATIVE.iter().position(|name| *name == word))
        .map(|i| i as u8 + 1)
}

/// Extracts (year, month, day) from the numeric tokens of a date string.
fn parse_components(raw: &str) -> Option<(i64, i64, i64)> {
    let text = ascii_digits(raw);
    let mut numbers: Vec<&str> = Vec::new();
    let mut month_name = None;
    for token in text.split(|c: char| !c.is_alphanumeric()) {
        if token.is_empty() {
            continue;
        }
        if token.chars().all(|c| c.is_ascii_digit()) {
            numbers.push(token);
        } else if let Some(m) = month_from_name(token) {
            if month_name.replace(m).is_some() {
                return None;
            }
        }
    }
    let value = |s: &str| s.parse::<i64>().ok();
    match (month_name, numbers.as_slice()) {
        (Some(m), [a, b]) => {
            // "July 10, 1402" or "10 Tir 1402": the four-digit token is the year.
            if a.len() == 4 && b.len() <= 2 {
                Some((value(a)?, i64::from(m), value(b)?))
            } else if b.len() == 4 && a.len() <= 2 {
                Some((value(b)?, i64::from(m), value(a)?))
            } else {
                None
            }
        }
        (None, [a, b, c]) => {
            if a.len() == 4 && b.len() <= 2 && c.len() <= 2 {
                // 1402/04/11
                Some((value(a)?, value(b)?, value(c)?))
            } else if c.len() == 4 && a.len() <= 2 && b.len() <= 2 {
                // 04/11/1402, month first as in the source listings
                Some((value(c)?, value(a)?, value(b)?))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Jalali leap-year data: (is_leap, gregorian year of Farvardin 1, March day of Farvardin 1).
struct JalaliYearInfo {
    leap: bool,
    gregorian_year: i64,
    march_day: i64,
}

fn jalali_year_info(jy: i64) -> Option<JalaliYearInfo> {
    if jy < BREAKS[0] || jy >= BREAKS[BREAKS.len() - 1] {
        return None;
    }
    let gy = jy + 621;
    let mut leap_j = -14;
    let mut jp = BREAKS[0];
    let mut jump = 0;
    for &jm in &BREAKS[1..] {
        jump = jm - jp;
        if jy < jm {
            break;
        }
        leap_j += jump / 33 * 8 + (jump % 33) / 4;
        jp = jm;
    }
    let mut n = jy - jp;
    leap_j += n / 33 * 8 + ((n % 33) + 3) / 4;
    if jump % 33 == 4 && jump - n == 4 {
        leap_j += 1;
    }
    let leap_g = gy / 4 - ((gy / 100 + 1) * 3) / 4 - 150;
    let march_day = 20 + leap_j - leap_g;
    if jump - n < 6 {
        n = n - jump + (jump + 4) / 33 * 33;
    }
    let mut leap = (((n + 1) % 33) - 1) % 4;
    if leap == -1 {
        leap = 4;
    }
    Some(JalaliYearInfo {
        leap: leap == 0,
        gregorian_year: gy,
        march_day,
    })
}

fn gregorian_to_jdn(gy: i64, gm: i64, gd: i64) -> i64 {
    let d = ((gy + (gm - 8) / 6 + 100100) * 1461) / 4 + (153 * ((gm + 9) % 12) + 2) / 5 + gd
        - 34840408;
    d - ((gy + 100100 + (gm - 8) / 6) / 100 * 3) / 4 + 752
}

fn jdn_to_gregorian(jdn: i64) -> (i64, i64, i64) {
    let mut j = 4 * jdn + 139361631;
    j += (4 * jdn + 183187720) / 146097 * 3 / 4 * 4 - 3908;
    let i = (j % 1461) / 4 * 5 + 308;
    let gd = (i % 153) / 5 + 1;
    let gm = (i / 153) % 12 + 1;
    let gy = j / 1461 - 100100 + (8 - gm) / 6;
    (gy, gm, gd)
}

/// Whether `year` has a 30th of Esfand.
pub fn is_jalali_leap_year(year: i32) -> bool {
    jalali_year_info(i64::from(year)).is_some_and(|info| info.leap)
}

/// Number of days in a Jalali month, or `None` when out of range.
pub fn jalali_month_length(year: i32, month: u8) -> Option<u8> {
    match month {
        1..=6 => Some(31),
        7..=11 => Some(30),
        12 => jalali_year_info(i64::from(year)).map(|info| if info.leap { 30 } else { 29 }),
        _ => None,
    }
}

fn validate(year: i32, month: u8, day: u8) -> Option<JalaliYearInfo> {
    let info = jalali_year_info(i64::from(year))?;
    let max_day = match month {
        1..=6 => 31,
        7..=11 => 30,
        12 if info.leap => 30,
        12 => 29,
        _ => return None,
    };
    (1..=max_day).contains(&day).then_some(info)
}

/// Exact Jalali to Gregorian conversion.
pub fn jalali_to_gregorian(year: i32, month: u8, day: u8) -> Result<GregorianDate, CorpusError> {
    let info = validate(year, month, day)
        .ok_or_else(|| CorpusError::MalformedDate(format!("{year:04}/{month:02}/{day:02}")))?;
    let jm = i64::from(month);
    let jdn = gregorian_to_jdn(info.gregorian_year, 3, info.march_day) + (jm - 1) * 31
        - jm / 7 * (jm - 7)
        + i64::from(day)
        - 1;
    let (gy, gm, gd) = jdn_to_gregorian(jdn);
    Ok(GregorianDate {
        year: gy as i32,
        month: gm as u8,
        day: gd as u8,
    })
}

/// Gregorian year in which the given Jalali date falls.
pub fn jalali_to_gregorian_year(year: i32, month: u8, day: u8) -> Result<i32, CorpusError> {
    jalali_to_gregorian(year, month, day).map(|g| g.year)
}
