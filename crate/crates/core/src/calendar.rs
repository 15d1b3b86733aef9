//! 365-day calendars with weekday and holiday labels.

use alloc::vec::Vec;

pub const DAYS_PER_YEAR: usize = 365;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ];

    /// Monday = 0 .. Sunday = 6.
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Weekday {
        Weekday::ALL[i % 7]
    }

    pub fn succ(self) -> Weekday {
        Weekday::from_index(self.index() + 1)
    }

    pub fn name(self) -> &'static str {
        [
            "monday",
            "tuesday",
            "wednesday",
            "thursday",
            "friday",
            "saturday",
            "sunday",
        ][self.index()]
    }

    pub fn parse(s: &str) -> Option<Weekday> {
        Weekday::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s) || d.name()[..3].eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalendarDay {
    pub weekday: Weekday,
    pub holiday: bool,
}

impl CalendarDay {
    /// Regression class of the day; holidays count as Sundays.
    #[inline]
    pub fn load_class(self) -> Weekday {
        if self.holiday {
            Weekday::Sunday
        } else {
            self.weekday
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    days: Vec<CalendarDay>,
}

impl Calendar {
    pub fn new(days: Vec<CalendarDay>) -> Self {
        Calendar { days }
    }

    /// One 365-day year starting on `start`, with holidays given as
    /// day-of-year numbers in `1..=365`.
    pub fn year(start: Weekday, holidays: &[u16]) -> Self {
        Calendar::years(1, start, holidays)
    }

    /// `n_years` consecutive 365-day years. The weekday cycle runs on across
    /// year boundaries; holidays repeat every year.
    pub fn years(n_years: usize, start: Weekday, holidays: &[u16]) -> Self {
        let mut weekday = start;
        let mut days = Vec::with_capacity(n_years * DAYS_PER_YEAR);
        for _ in 0..n_years {
            for doy in 1..=DAYS_PER_YEAR as u16 {
                days.push(CalendarDay {
                    weekday,
                    holiday: holidays.contains(&doy),
                });
                weekday = weekday.succ();
            }
        }
        Calendar { days }
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[CalendarDay] {
        &self.days
    }

    #[inline]
    pub fn get(&self, t: usize) -> CalendarDay {
        self.days[t]
    }
}

/// Day-of-year (1..=365) of step `t` for a series starting on `start_day`.
#[inline]
pub fn day_of_year(start_day: u16, t: usize) -> u16 {
    ((start_day as usize - 1 + t) % DAYS_PER_YEAR) as u16 + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn years_have_consistent_weekday_cycle() {
        let cal = Calendar::years(3, Weekday::Monday, &[1, 360]);
        assert_eq!(cal.len(), 3 * 365);
        for t in 1..cal.len() {
            assert_eq!(cal.get(t).weekday, cal.get(t - 1).weekday.succ());
        }
        // 365 = 52 weeks + 1 day
        assert_eq!(cal.get(365).weekday, Weekday::Tuesday);
        for y in 0..3 {
            assert!(cal.get(y * 365).holiday);
            assert_eq!(cal.get(y * 365 + 359).load_class(), Weekday::Sunday);
            assert!(!cal.get(y * 365 + 1).holiday);
        }
    }

    #[test]
    fn day_of_year_wraps() {
        assert_eq!(day_of_year(1, 0), 1);
        assert_eq!(day_of_year(1, 364), 365);
        assert_eq!(day_of_year(1, 365), 1);
        assert_eq!(day_of_year(300, 100), 35);
    }

    #[test]
    fn weekday_parsing() {
        assert_eq!(Weekday::parse("Mon"), Some(Weekday::Monday));
        assert_eq!(Weekday::parse("sunday"), Some(Weekday::Sunday));
        assert_eq!(Weekday::parse("xyz"), None);
    }
}
