//! Load-time sources for satellite `Datetime` values.

use super::value::Timestamp;

pub trait Clock: Send {
    fn now(&mut self) -> Timestamp;
}

/// Wall-clock time in milliseconds, never repeating or going backwards.
#[derive(Debug, Default)]
pub struct SystemClock {
    last: Option<Timestamp>,
}

impl Clock for SystemClock {
    fn now(&mut self) -> Timestamp {
        let wall = Timestamp::from_millis(chrono::Utc::now().timestamp_millis());
        let next = match self.last {
            Some(last) if wall <= last => last.plus_millis(1),
            _ => wall,
        };
        self.last = Some(next);
        next
    }
}

/// Deterministic clock: starts at `start` and advances by `step` per call.
#[derive(Clone, Debug)]
pub struct SteppingClock {
    next: Timestamp,
    step_millis: i64,
}

impl SteppingClock {
    pub fn new(start: Timestamp, step_millis: i64) -> Self {
        assert!(step_millis > 0, "clock step must be positive");
        SteppingClock { next: start, step_millis }
    }
}

impl Clock for SteppingClock {
    fn now(&mut self) -> Timestamp {
        let now = self.next;
        self.next = now.plus_millis(self.step_millis);
        now
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clocks_are_strictly_increasing() {
        let mut c = SteppingClock::new(Timestamp::from_millis(10), 5);
        assert_eq!(c.now(), Timestamp::from_millis(10));
        assert_eq!(c.now(), Timestamp::from_millis(15));
        let mut s = SystemClock::default();
        let a = s.now();
        assert!(s.now() > a);
    }
}
