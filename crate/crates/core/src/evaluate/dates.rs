//! Pattern-table date engine.
//!
//! Recognizes ISO-8601, numeric day/month/year orders, month names in
//! English, German, Russian and Arabic, and CJK year/month/day markers.
//! Relative expressions ("yesterday") and dates without a year are not
//! parsed.

use std::sync::OnceLock;

use chrono::{Duration, FixedOffset, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use regex::Regex;

use crate::dom::normalize_text;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParsedDate {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
    /// Whether the source carried seconds, which decides match granularity.
    pub has_seconds: bool,
    pub offset: Option<FixedOffset>,
}

impl ParsedDate {
    fn naive(&self) -> Option<NaiveDateTime> {
        self.time.map(|t| self.date.and_time(t))
    }

    fn utc(&self) -> Option<NaiveDateTime> {
        let off = self.offset?;
        Some(self.naive()? - Duration::seconds(off.local_minus_utc() as i64))
    }

    /// ISO-like rendering at the granularity present.
    pub fn to_iso(&self) -> String {
        let mut s = self.date.format("%Y-%m-%d").to_string();
        if let Some(t) = self.time {
            s.push('T');
            if self.has_seconds {
                s.push_str(&t.format("%H:%M:%S").to_string());
            } else {
                s.push_str(&t.format("%H:%M").to_string());
            }
            if let Some(off) = self.offset {
                s.push_str(&off.to_string());
            }
        }
        s
    }
}

/// Agreement at the finest granularity both sides carry.
pub fn dates_match(a: &ParsedDate, b: &ParsedDate) -> bool {
    match (a.time, b.time) {
        (Some(ta), Some(tb)) => {
            if let (Some(ua), Some(ub)) = (a.utc(), b.utc()) {
                return if a.has_seconds && b.has_seconds {
                    ua == ub
                } else {
                    ua.with_second(0) == ub.with_second(0)
                };
            }
            a.date == b.date
                && ta.hour() == tb.hour()
                && ta.minute() == tb.minute()
                && (!(a.has_seconds && b.has_seconds) || ta.second() == tb.second())
        }
        _ => a.date == b.date,
    }
}

const MONTHS: &[(&str, u32)] = &[
    // en
    ("january", 1), ("jan", 1), ("february", 2), ("feb", 2), ("march", 3), ("mar", 3),
    ("april", 4), ("apr", 4), ("may", 5), ("june", 6), ("jun", 6), ("july", 7), ("jul", 7),
    ("august", 8), ("aug", 8), ("september", 9), ("sept", 9), ("sep", 9), ("october", 10),
    ("oct", 10), ("november", 11), ("nov", 11), ("december", 12), ("dec", 12),
    // de
    ("januar", 1), ("jänner", 1), ("jän", 1), ("februar", 2), ("märz", 3), ("maerz", 3),
    ("mär", 3), ("mai", 5), ("juni", 6), ("juli", 7), ("oktober", 10), ("okt", 10),
    ("dezember", 12), ("dez", 12),
    // ru, nominative and genitive
    ("январь", 1), ("января", 1), ("янв", 1), ("февраль", 2), ("февраля", 2), ("фев", 2),
    ("март", 3), ("марта", 3), ("мар", 3), ("апрель", 4), ("апреля", 4), ("апр", 4),
    ("май", 5), ("мая", 5), ("июнь", 6), ("июня", 6), ("июн", 6), ("июль", 7), ("июля", 7),
    ("июл", 7), ("август", 8), ("августа", 8), ("авг", 8), ("сентябрь", 9), ("сентября", 9),
    ("сен", 9), ("сент", 9), ("октябрь", 10), ("октября", 10), ("окт", 10), ("ноябрь", 11),
    ("ноября", 11), ("ноя", 11), ("декабрь", 12), ("декабря", 12), ("дек", 12),
    // ar, Egyptian/Gulf names
    ("يناير", 1), ("فبراير", 2), ("مارس", 3), ("أبريل", 4), ("ابريل", 4), ("إبريل", 4),
    ("مايو", 5), ("يونيو", 6), ("يونيه", 6), ("يوليو", 7), ("يوليه", 7), ("أغسطس", 8),
    ("اغسطس", 8), ("سبتمبر", 9), ("أكتوبر", 10), ("اكتوبر", 10), ("نوفمبر", 11),
    ("ديسمبر", 12),
    // ar, Levantine single-word names
    ("شباط", 2), ("آذار", 3), ("اذار", 3), ("نيسان", 4), ("أيار", 5), ("ايار", 5),
    ("حزيران", 6), ("تموز", 7), ("آب", 8), ("اب", 8), ("أيلول", 9), ("ايلول", 9),
];

// Two-word Levantine names, rewritten to a single token before lookup.
const MULTIWORD_MONTHS: &[(&str, &str)] = &[
    ("كانون الثاني", "m01"),
    ("تشرين الأول", "m10"),
    ("تشرين الاول", "m10"),
    ("تشرين الثاني", "m11"),
    ("كانون الأول", "m12"),
    ("كانون الاول", "m12"),
];

fn month_of(word: &str) -> Option<u32> {
    let w = word.trim_end_matches('.');
    if let Some(n) = w.strip_prefix('m').filter(|n| n.len() == 2) {
        if let Ok(m) = n.parse::<u32>() {
            return Some(m);
        }
    }
    MONTHS.iter().find(|(name, _)| *name == w).map(|(_, m)| *m)
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern compiles"))
}

fn ascii_digits(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '\u{0660}'..='\u{0669}' => char::from(b'0' + (c as u32 - 0x0660) as u8),
            '\u{06F0}'..='\u{06F9}' => char::from(b'0' + (c as u32 - 0x06F0) as u8),
            '\u{FF10}'..='\u{FF19}' => char::from(b'0' + (c as u32 - 0xFF10) as u8),
            '\u{FF1A}' => ':',
            '\u{FF0F}' => '/',
            '\u{FF0D}' => '-',
            '\u{060C}' => ',',
            c => c,
        })
        .collect()
}

fn parse_offset(sign: &str, hours: &str, minutes: Option<&str>) -> Option<FixedOffset> {
    let h: i32 = hours.parse().ok()?;
    let m: i32 = minutes.map(|m| m.parse().ok()).unwrap_or(Some(0))?;
    if h > 14 || m > 59 {
        return None;
    }
    let secs = (h * 3600 + m * 60) * if sign == "-" { -1 } else { 1 };
    FixedOffset::east_opt(secs)
}

fn named_zone(name: &str) -> Option<FixedOffset> {
    let hours = match name {
        "z" | "utc" | "gmt" => 0,
        "bst" | "cet" | "mez" => 1,
        "cest" | "mesz" | "eet" => 2,
        "msk" | "eest" | "ast" => 3,
        "kst" | "jst" => 9,
        "edt" => -4,
        "est" => -5,
        "pdt" => -7,
        "pst" => -8,
        _ => return None,
    };
    FixedOffset::east_opt(hours * 3600)
}

fn parse_iso(s: &str) -> Option<ParsedDate> {
    static ISO: OnceLock<Regex> = OnceLock::new();
    let caps = re(
        &ISO,
        r"^(\d{4})-(\d{2})-(\d{2})(?:[t ](\d{2}):(\d{2})(?::(\d{2})(?:[.,]\d+)?)?)?\s*(z|[+-]\d{2}(?::?\d{2})?)?$",
    )
    .captures(s)?;
    let num = |i: usize| caps.get(i).and_then(|m| m.as_str().parse::<u32>().ok());
    let date = NaiveDate::from_ymd_opt(num(1)? as i32, num(2)?, num(3)?)?;
    let time = match (num(4), num(5)) {
        (Some(h), Some(m)) => Some(NaiveTime::from_hms_opt(h, m, num(6).unwrap_or(0))?),
        _ => None,
    };
    let offset = match caps.get(7).map(|m| m.as_str()) {
        None => None,
        Some("z") => named_zone("z"),
        Some(z) => {
            let (sign, rest) = z.split_at(1);
            let rest = rest.replace(':', "");
            let (h, m) = rest.split_at(2.min(rest.len()));
            Some(parse_offset(sign, h, (!m.is_empty()).then_some(m))?)
        }
    };
    Some(ParsedDate {
        date,
        time,
        has_seconds: caps.get(6).is_some(),
        offset: time.and(offset),
    })
}

struct TimePart {
    time: NaiveTime,
    has_seconds: bool,
    offset: Option<FixedOffset>,
}

// Finds and removes the time-of-day (with meridiem and zone) from `s`.
fn take_time(s: &mut String) -> Option<TimePart> {
    static CLOCK: OnceLock<Regex> = OnceLock::new();
    static CJK_CLOCK: OnceLock<Regex> = OnceLock::new();
    static AFTER: OnceLock<Regex> = OnceLock::new();
    static ZONE: OnceLock<Regex> = OnceLock::new();

    let clock = re(&CLOCK, r"(?:^|[^\d:])(\d{1,2}):(\d{2})(?::(\d{2}))?(?:[^\d:]|$)");
    let cjk = re(&CJK_CLOCK, r"(\d{1,2})\s*[时時시]\s*(\d{1,2})\s*[分분]");
    let (start, end, h, m, sec) = if let Some(c) = clock.captures(s) {
        let g = c.get(0).unwrap();
        let last = c.get(3).or(c.get(2)).unwrap();
        (
            c.get(1).unwrap().start(),
            last.end().max(g.start()),
            c[1].parse::<u32>().ok()?,
            c[2].parse::<u32>().ok()?,
            c.get(3).map(|x| x.as_str().parse::<u32>().unwrap_or(99)),
        )
    } else {
        let c = cjk.captures(s)?;
        let g = c.get(0).unwrap();
        (g.start(), g.end(), c[1].parse().ok()?, c[2].parse().ok()?, None)
    };

    let before = &s[..start];
    let mut after_end = end;
    let after = &s[end..];
    let mut hour = h;
    let meridiem = re(&AFTER, r"^\s*(a\.?\s?m\.?|p\.?\s?m\.?|ص|م)(?:\s|$|[,;)\]])");
    let mut pm = None;
    if let Some(c) = meridiem.captures(after) {
        let word = c.get(1).unwrap().as_str();
        pm = Some(word.starts_with('p') || word == "م");
        after_end = end + c.get(1).unwrap().end();
    } else {
        let tail: String = before.chars().rev().take(4).collect::<Vec<_>>().into_iter().rev().collect();
        if tail.contains("오후") || tail.contains("下午") || tail.contains("晚上") {
            pm = Some(true);
        } else if tail.contains("오전") || tail.contains("上午") || tail.contains("早上") {
            pm = Some(false);
        }
    }
    match pm {
        Some(true) if hour < 12 => hour += 12,
        Some(false) if hour == 12 => hour = 0,
        _ => {}
    }
    let has_seconds = sec.is_some();
    let time = NaiveTime::from_hms_opt(hour, m, sec.unwrap_or(0))?;

    let zone = re(
        &ZONE,
        r"^\s*\(?\s*(?:(utc|gmt)\s*(?:([+-])(\d{1,2})(?::?(\d{2}))?)?|([+-])(\d{2}):?(\d{2})|(z|msk|kst|jst|cet|cest|mez|mesz|eet|eest|bst|est|edt|pst|pdt)\b)",
    );
    let mut offset = None;
    if let Some(c) = zone.captures(&s[after_end..]) {
        offset = if let Some(base) = c.get(1) {
            match (c.get(2), c.get(3)) {
                (Some(sign), Some(hh)) => parse_offset(sign.as_str(), hh.as_str(), c.get(4).map(|m| m.as_str())),
                _ => named_zone(base.as_str()),
            }
        } else if let (Some(sign), Some(hh)) = (c.get(5), c.get(6)) {
            parse_offset(sign.as_str(), hh.as_str(), c.get(7).map(|m| m.as_str()))
        } else {
            c.get(8).and_then(|z| named_zone(z.as_str()))
        };
        after_end += c.get(0).unwrap().end();
    }
    s.replace_range(start..after_end, " ");
    Some(TimePart {
        time,
        has_seconds,
        offset,
    })
}

fn number_token(tok: &str) -> Option<u32> {
    static NUM: OnceLock<Regex> = OnceLock::new();
    let caps = re(&NUM, r"^(\d{1,4})(?:st|nd|rd|th|er|e|го|е)?\.?$").captures(tok)?;
    caps[1].parse().ok()
}

fn take_date(s: &str, lang: Option<&str>) -> Option<NaiveDate> {
    static CJK: OnceLock<Regex> = OnceLock::new();
    static YMD: OnceLock<Regex> = OnceLock::new();
    static DMY: OnceLock<Regex> = OnceLock::new();

    if let Some(c) = re(&CJK, r"(\d{4})\s*[年년]\s*(\d{1,2})\s*[月월]\s*(\d{1,2})").captures(s) {
        return NaiveDate::from_ymd_opt(c[1].parse().ok()?, c[2].parse().ok()?, c[3].parse().ok()?);
    }
    if let Some(c) = re(&YMD, r"(?:^|\D)(\d{4})\s*[./-]\s*(\d{1,2})\s*[./-]\s*(\d{1,2})(?:\D|$)").captures(s) {
        return NaiveDate::from_ymd_opt(c[1].parse().ok()?, c[2].parse().ok()?, c[3].parse().ok()?);
    }
    if let Some(c) = re(&DMY, r"(?:^|\D)(\d{1,2})\s*([./-])\s*(\d{1,2})\s*[./-]\s*(\d{4})(?:\D|$)").captures(s) {
        let a: u32 = c[1].parse().ok()?;
        let b: u32 = c[3].parse().ok()?;
        let year: i32 = c[4].parse().ok()?;
        let month_first = if a > 12 {
            false
        } else if b > 12 {
            true
        } else {
            &c[2] == "/" && lang.is_none_or(|l| l.starts_with("en"))
        };
        let (month, day) = if month_first { (a, b) } else { (b, a) };
        return NaiveDate::from_ymd_opt(year, month, day);
    }

    let mut text = s.to_string();
    for (name, token) in MULTIWORD_MONTHS {
        if text.contains(name) {
            text = text.replace(name, &format!(" {token} "));
        }
    }
    let tokens: Vec<&str> = text
        .split(|c: char| !(c.is_alphanumeric() || c == '.'))
        .map(|t| t.trim_matches('.'))
        .filter(|t| !t.is_empty())
        .collect();
    let (month_pos, month) = tokens
        .iter()
        .enumerate()
        .find_map(|(i, t)| month_of(t).map(|m| (i, m)))?;
    let numbers: Vec<(usize, u32)> = tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| number_token(t).map(|n| (i, n)))
        .collect();
    let &(year_pos, year) = numbers.iter().find(|(_, n)| (1900..=2100).contains(n))?;
    let day = numbers
        .iter()
        .filter(|(i, n)| *i != year_pos && (1..=31).contains(n))
        .min_by_key(|(i, _)| (i.abs_diff(month_pos), *i > month_pos))
        .map(|(_, n)| *n)?;
    NaiveDate::from_ymd_opt(year as i32, month, day)
}

/// Parses `raw` with no language hint.
pub fn parse_date(raw: &str) -> Option<ParsedDate> {
    parse_date_hint(raw, None)
}

/// Parses `raw`; the language hint only disambiguates slash-separated
/// numeric dates (month-first for English).
pub fn parse_date_hint(raw: &str, lang: Option<&str>) -> Option<ParsedDate> {
    let s = ascii_digits(&normalize_text(raw)).to_lowercase();
    if s.is_empty() {
        return None;
    }
    if let Some(d) = parse_iso(&s) {
        return Some(d);
    }
    let mut rest = s.clone();
    let time = take_time(&mut rest);
    let date = take_date(&rest, lang)?;
    Some(match time {
        Some(t) => ParsedDate {
            date,
            time: Some(t.time),
            has_seconds: t.has_seconds,
            offset: t.offset,
        },
        None => ParsedDate {
            date,
            time: None,
            has_seconds: false,
            offset: None,
        },
    })
}

/// Short text that parses as a date.
pub fn is_date_like(text: &str) -> bool {
    text.chars().count() <= 60 && parse_date(text).is_some()
}
