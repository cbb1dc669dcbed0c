use std::io::{self, Read, Write};

use crate::error::{Error, Result};

use super::{TickReport, World};

pub const LOG_HEADER: &str = "tick,time_s,agent_id,x,y,alpha,phi,walking";

/// One agent at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub tick: u64,
    pub time_s: f64,
    pub agent_id: u32,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub phi: f64,
    pub walking: bool,
}

/// Positions of every live agent at every tick, plus the move that
/// produced them. The initial snapshot carries zero `alpha`/`phi`/`walking`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub rows: Vec<LogRow>,
}

impl TrajectoryLog {
    pub fn new(dt: f64) -> Self {
        TrajectoryLog {
            dt,
            rows: Vec::new(),
        }
    }

    pub fn record_initial(&mut self, world: &World) {
        let time_s = world.time();
        self.rows.extend(world.agents.iter().map(|a| LogRow {
            tick: world.tick,
            time_s,
            agent_id: a.id,
            x: a.position.x,
            y: a.position.y,
            alpha: 0.0,
            phi: 0.0,
            walking: false,
        }));
    }

    pub fn record(&mut self, world: &World, report: &TickReport) {
        let time_s = world.time();
        for a in &world.agents {
            let m = report
                .moves
                .binary_search_by_key(&a.id, |m| m.id)
                .map(|i| report.moves[i])
                .ok();
            self.rows.push(LogRow {
                tick: world.tick,
                time_s,
                agent_id: a.id,
                x: a.position.x,
                y: a.position.y,
                alpha: m.map_or(0.0, |m| m.alpha),
                phi: m.map_or(0.0, |m| m.phi),
                walking: m.is_some_and(|m| m.walking),
            });
        }
    }

    /// Rows of one tick (rows are stored tick-major).
    pub fn tick_rows(&self, tick: u64) -> &[LogRow] {
        let start = self.rows.partition_point(|r| r.tick < tick);
        let end = self.rows.partition_point(|r| r.tick <= tick);
        &self.rows[start..end]
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.rows.last().map(|r| r.tick)
    }

    /// Writes the CSV form. Floats use the shortest representation that
    /// round-trips exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{LOG_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.tick,
                r.time_s,
                r.agent_id,
                r.x,
                r.y,
                r.alpha,
                r.phi,
                u8::from(r.walking)
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, dt: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let bad = |e: csv::Error| Error::Metric(format!("trajectory log: {e}"));
        let header = reader.headers().map_err(bad)?.iter().collect::<Vec<_>>().join(",");
        if header != LOG_HEADER {
            return Err(Error::Metric(format!("unexpected trajectory header `{header}`")));
        }
        let mut rows = Vec::new();
        for record in reader.deserialize::<(u64, f64, u32, f64, f64, f64, f64, u8)>() {
            let (tick, time_s, agent_id, x, y, alpha, phi, walking) = record.map_err(bad)?;
            if walking > 1 {
                return Err(Error::Metric(format!("trajectory log: walking flag {walking} at tick {tick}")));
            }
            rows.push(LogRow {
                tick,
                time_s,
                agent_id,
                x,
                y,
                alpha,
                phi,
                walking: walking == 1,
            });
        }
        Ok(TrajectoryLog { dt, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tick: u64, id: u32, x: f64) -> LogRow {
        LogRow {
            tick,
            time_s: tick as f64 * 0.5,
            agent_id: id,
            x,
            y: 0.1 + 0.2,
            alpha: 0.95,
            phi: -0.1308996938995747,
            walking: id % 2 == 0,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let log = TrajectoryLog {
            dt: 0.5,
            rows: vec![row(0, 1, 1.0 / 3.0), row(0, 2, 19.999999999999996), row(1, 1, 1e-300)],
        };
        let mut bytes = Vec::new();
        log.write_csv(&mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("tick,time_s,agent_id,x,y,alpha,phi,walking\n0,0,1,"));
        assert_eq!(TrajectoryLog::read_csv(&bytes[..], 0.5).unwrap(), log);
    }

    #[test]
    fn reader_accepts_crlf() {
        let text = format!("{LOG_HEADER}\r\n3,1.5,7,1,2,1,0,1\r\n");
        let log = TrajectoryLog::read_csv(text.as_bytes(), 0.5).unwrap();
        assert_eq!(log.rows.len(), 1);
        assert_eq!((log.rows[0].tick, log.rows[0].agent_id, log.rows[0].walking), (3, 7, true));
    }

    #[test]
    fn reader_rejects_malformed_input() {
        for text in [
            "tick,x\n".to_owned(),
            format!("{LOG_HEADER}\n0,0,1,1,2,1,0,2\n"),
            format!("{LOG_HEADER}\n0,0,1,1,2,1,0\n"),
            format!("{LOG_HEADER}\n0,0,one,1,2,1,0,1\n"),
        ] {
            assert!(TrajectoryLog::read_csv(text.as_bytes(), 0.5).is_err(), "{text}");
        }
    }
}
